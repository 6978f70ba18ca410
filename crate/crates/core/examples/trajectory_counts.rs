// Jump-time grids and how many trajectories each order costs.
//
//     cargo run --example trajectory_counts

use dqj::grid::{build_grid, count_trajectories, generated_trajectory_count, PointKind};

pub fn run_example() -> dqj::Result<()> {
    let grid = build_grid(2, 1.0, 4)?;
    println!("order 2, N_grid 4: {} points, weight sum {:.6}", grid.points.len(), grid.weight_sum());
    for p in &grid.points {
        let tag = if p.kind == PointKind::Cartesian { "" } else { " (shared cell)" };
        println!("  t = {:?}  w = {:.5}{tag}", p.times, p.weight);
    }

    println!("\norder  N_grid  N_J  closed form  generated");
    for order in 1..=3 {
        for n in [4u64, 16, 64] {
            for j in [1u64, 3] {
                let closed = count_trajectories(order, n, j)?;
                let generated = generated_trajectory_count(order, n, j)?;
                println!("{order:>5}  {n:>6}  {j:>3}  {closed:>11}  {generated:>9}");
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::process::ExitCode {
    match run_example() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code() as u8)
        }
    }
}
