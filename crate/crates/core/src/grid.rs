//! Deterministic jump-time grids over the ordered-time simplex.
//!
//! The simplex `0 < t1 < ... < tn < T` is tiled by the cubic cells of the
//! midpoint grid. Cells strictly inside the simplex are sampled at their
//! Cartesian midpoint; cells cut by the ordering constraint are sampled at the
//! barycenter of the part that lies inside, weighted by its volume.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum PointKind {
    Cartesian,
    /// Two jumps in the same cell.
    Bary2,
    /// Three jumps in the same cell.
    Bary3A,
    /// First jump in an earlier cell, second and third sharing a later cell.
    Bary3B,
    /// First and second jump sharing a cell, third in a later cell.
    Bary3C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// Strictly increasing jump times.
    pub times: Vec<f64>,
    pub weight: f64,
    pub kind: PointKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpTimeGrid {
    pub order: usize,
    pub t_final: f64,
    pub n_grid: usize,
    pub dt: f64,
    pub points: Vec<GridPoint>,
}

impl JumpTimeGrid {
    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    /// Volume of the ordered-time simplex, `T^n / n!`.
    pub fn simplex_volume(&self) -> f64 {
        self.t_final.powi(self.order as i32) / factorial(self.order)
    }

    pub fn count_kind(&self, kind: PointKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if (1..=3).contains(&order) {
        Ok(())
    } else {
        Err(Error::InvalidOrder(order))
    }
}

/// Offset `(cell + frac) * dt`. All grid times go through here so that equal
/// times from different point families are bit-identical.
fn at(cell: usize, frac: f64, dt: f64) -> f64 {
    (cell as f64 + frac) * dt
}

const THIRD: f64 = 1.0 / 3.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;

pub fn build_grid(order: usize, t_final: f64, n_grid: usize) -> Result<JumpTimeGrid> {
    check_order(order)?;
    if n_grid == 0 {
        return Err(Error::Config("n_grid must be at least 1".into()));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Config(format!("final time must be positive, got {t_final}")));
    }
    let dt = t_final / n_grid as f64;
    let n = n_grid;
    let mid = |i: usize| at(i, 0.5, dt);
    let mut points = Vec::new();
    match order {
        1 => {
            for i in 0..n {
                points.push(GridPoint { times: vec![mid(i)], weight: dt, kind: PointKind::Cartesian });
            }
        }
        2 => {
            let w = dt * dt;
            for i in 0..n {
                for j in i + 1..n {
                    points.push(GridPoint { times: vec![mid(i), mid(j)], weight: w, kind: PointKind::Cartesian });
                }
            }
            for i in 0..n {
                points.push(GridPoint {
                    times: vec![mid(i) - dt / 6.0, mid(i) + dt / 6.0],
                    weight: 0.5 * w,
                    kind: PointKind::Bary2,
                });
            }
        }
        3 => {
            let w = dt * dt * dt;
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        points.push(GridPoint {
                            times: vec![mid(i), mid(j), mid(k)],
                            weight: w,
                            kind: PointKind::Cartesian,
                        });
                    }
                }
            }
            for i in 0..n {
                points.push(GridPoint {
                    times: vec![mid(i) - dt / 4.0, mid(i), mid(i) + dt / 4.0],
                    weight: w / 6.0,
                    kind: PointKind::Bary3A,
                });
            }
            for k in 0..n {
                for l in 0..k {
                    points.push(GridPoint {
                        times: vec![mid(l), at(k, THIRD, dt), at(k, TWO_THIRDS, dt)],
                        weight: w / 2.0,
                        kind: PointKind::Bary3B,
                    });
                }
            }
            for k in 0..n {
                for l in 0..k {
                    points.push(GridPoint {
                        times: vec![at(l, THIRD, dt), at(l, TWO_THIRDS, dt), mid(k)],
                        weight: w / 2.0,
                        kind: PointKind::Bary3C,
                    });
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(JumpTimeGrid { order, t_final, n_grid, dt, points })
}

/// Closed-form trajectory count up to `order` jumps:
/// `1 + N J`, `+ N(N+1)/2 J^2`, `+ N(N^2 - 2N + 2) J^3`.
pub fn count_trajectories(order: usize, n_grid: u64, n_jumps: u64) -> Result<u64> {
    check_order(order)?;
    if n_grid == 0 || n_jumps == 0 {
        return Err(Error::Config("n_grid and the number of jump operators must be at least 1".into()));
    }
    let (n, j) = (n_grid, n_jumps);
    let mut total = 1 + n * j;
    if order >= 2 {
        total += n * (n + 1) / 2 * j * j;
    }
    if order >= 3 {
        total += n * (n * n + 2 - 2 * n) * j * j * j;
    }
    Ok(total)
}

/// Number of grid points `build_grid` produces at exactly `order` jumps.
pub fn grid_point_count(order: usize, n_grid: u64) -> Result<u64> {
    check_order(order)?;
    let n = n_grid;
    Ok(match order {
        1 => n,
        2 => n * (n + 1) / 2,
        _ => n * (n + 1) * (n + 2) / 6,
    })
}

/// Trajectories actually generated by the grids up to `order`:
/// `1 + sum_m |grid_m| * n_jumps^m`.
pub fn generated_trajectory_count(order: usize, n_grid: u64, n_jumps: u64) -> Result<u64> {
    check_order(order)?;
    let mut total = 1;
    for m in 1..=order {
        total += grid_point_count(m, n_grid)? * n_jumps.pow(m as u32);
    }
    Ok(total)
}
