//! Fidelity, observable traces, quadrature spectra and power-law fits.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::{hermitian_eigen, DensityMatrix, DensityMatrixSeries, OperatorMatrix, C64};

/// Validity gate applied to fidelity inputs.
pub const DENSITY_GATE: f64 = 1e-6;

fn gate(rho: &DensityMatrix, which: &str) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_GATE || tr.im.abs() > DENSITY_GATE {
        return Err(Error::NotADensityMatrix(format!("{which}: trace {tr}")));
    }
    let min = rho.min_eigenvalue();
    if min < -DENSITY_GATE {
        return Err(Error::NotADensityMatrix(format!("{which}: eigenvalue {min:e}")));
    }
    Ok(())
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen(m);
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * v.adjoint()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2`, clamped to `[0, 1]`.
pub fn fidelity(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    gate(sigma, "sigma")?;
    gate(rho, "rho")?;
    let s = psd_sqrt(sigma.matrix());
    let m = &s * rho.matrix() * &s;
    let eig = hermitian_eigen(&m);
    let root_sum: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

pub fn infidelity(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    Ok(1.0 - fidelity(sigma, rho)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
}

impl ObservableSeries {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("observable times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Config("observable values must be finite".into()));
        }
        Ok(Self { times, values })
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// `Tr(rho(t) O)` along a series. For Hermitian `O` the values are real and an
/// imaginary residue above 1e-9 is an error.
pub fn observable_trace(series: &DensityMatrixSeries, op: &OperatorMatrix) -> Result<ObservableSeries> {
    let hermitian = op.hermiticity_error() <= 1e-12;
    let mut values = Vec::with_capacity(series.len());
    for rho in &series.states {
        let v = rho.expectation(op)?;
        if hermitian {
            if v.im.abs() > 1e-9 {
                return Err(Error::NotADensityMatrix(format!("imaginary expectation residue {:e}", v.im)));
            }
            values.push(C64::new(v.re, 0.0));
        } else {
            values.push(v);
        }
    }
    ObservableSeries::new(series.times.clone(), values)
}

/// `S(w) = int dt x(t) e^{-i w t}` by the trapezoidal rule on the series times.
pub fn spectrum(series: &ObservableSeries, omega: f64) -> C64 {
    let f: Vec<C64> = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, &x)| x * C64::new(0.0, -omega * t).exp())
        .collect();
    series
        .times
        .windows(2)
        .zip(f.windows(2))
        .map(|(t, y)| (y[0] + y[1]) * (0.5 * (t[1] - t[0])))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: Range<usize>,
    /// RMS residual in log space.
    pub residual: f64,
}

/// Least-squares line through `(ln x, ln y)` over `window`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64], window: Range<usize>) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if window.end > xs.len() || window.len() < 3 {
        return Err(Error::DegenerateWindow(format!("window {window:?} over {} points", xs.len())));
    }
    let xw = &xs[window.clone()];
    let yw = &ys[window.clone()];
    if xw.windows(2).any(|w| w[1] <= w[0]) || xw[0] <= 0.0 {
        return Err(Error::DegenerateWindow("x values must be positive and strictly increasing".into()));
    }
    if yw.iter().any(|&y| y.is_nan() || y <= 0.0) {
        return Err(Error::DegenerateWindow("y values must be positive".into()));
    }
    let lx: Vec<f64> = xw.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = yw.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit { slope, intercept, window, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pure(i: usize) -> DensityMatrix {
        StateVector::basis(2, i).outer_product_normalized().unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let rho = DensityMatrix::from_matrix(DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.7, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.3, 0.0)],
        ));
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&pure(0), &pure(1)).unwrap().abs() < 1e-12);
        assert!((fidelity(&pure(0), &DensityMatrix::maximally_mixed(2)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_invalid_inputs() {
        let bad = DensityMatrix::from_matrix(DMatrix::identity(2, 2));
        assert!(matches!(fidelity(&bad, &pure(0)), Err(Error::NotADensityMatrix(_))));
        let neg = DensityMatrix::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.1, 0.0),
            C64::new(-0.1, 0.0),
        ])));
        assert!(matches!(fidelity(&neg, &pure(0)), Err(Error::NotADensityMatrix(_))));
    }

    #[test]
    fn observable_examples() {
        let sz = OperatorMatrix::sigma_z();
        let series = DensityMatrixSeries::new(vec![0.0, 1.0], vec![DensityMatrix::maximally_mixed(2), pure(0)]);
        let obs = observable_trace(&series, &sz).unwrap();
        assert_eq!(obs.real_parts(), vec![0.0, 1.0]);
    }

    #[test]
    fn kerr_closed_system_quadrature() {
        use crate::lindblad::{integrate_master, LindbladSystem};
        use crate::models::build_kerr;
        let alpha = C64::new(1.5 / 2f64.sqrt(), 0.0);
        let (w0, wk) = (24.0 * PI, 6.0 * PI);
        let m = build_kerr(12, w0, wk, 0.0, alpha).unwrap();
        let sys = LindbladSystem::new(m.hamiltonian.clone(), m.jumps.clone(), DensityMatrix::pure(&m.psi0).unwrap()).unwrap();
        let times: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        let series = integrate_master(&sys, 1.0, &times, 1e-3).unwrap();
        let obs = observable_trace(&series, m.observable("X").unwrap()).unwrap();
        for (&t, v) in obs.times.iter().zip(&obs.values) {
            let a = alpha * C64::new(0.0, -w0 * t).exp() * (alpha.norm_sqr() * (C64::new(0.0, -wk * t).exp() - 1.0)).exp();
            let x = 2f64.sqrt() * a.re;
            assert!((v.re - x).abs() < 2e-3, "t = {t}: {} vs {x}", v.re);
        }
    }

    #[test]
    fn spectrum_examples() {
        let n = 2001;
        let t_final = 2.0;
        let times: Vec<f64> = (0..n).map(|k| t_final * k as f64 / (n - 1) as f64).collect();
        let constant = ObservableSeries::new(times.clone(), vec![C64::new(0.7, 0.0); n]).unwrap();
        assert!((spectrum(&constant, 0.0) - C64::new(1.4, 0.0)).norm() < 1e-12);

        let w = 3.0;
        let exact = C64::new(0.7, 0.0) * (C64::new(1.0, 0.0) - C64::new(0.0, -w * t_final).exp()) / C64::new(0.0, w);
        let dt = t_final / (n - 1) as f64;
        assert!((spectrum(&constant, w) - exact).norm() < w * w * dt * dt);

        let w0 = 5.0;
        let osc = ObservableSeries::new(
            times.clone(),
            times.iter().map(|&t| C64::new(0.0, -w0 * t).exp()).collect(),
        )
        .unwrap();
        assert!((spectrum(&osc, -w0) - C64::new(t_final, 0.0)).norm() < 1e-12);
        let resonant = ObservableSeries::new(
            times.clone(),
            times.iter().map(|&t| C64::new(0.0, w0 * t).exp()).collect(),
        )
        .unwrap();
        assert!((spectrum(&resonant, w0) - C64::new(t_final, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn slope_examples() {
        let xs: Vec<f64> = (1..=6).map(|k| (k * k) as f64).collect();
        let inv2: Vec<f64> = xs.iter().map(|x| 3.0 / (x * x)).collect();
        let fit = fit_loglog_slope(&xs, &inv2, 0..6).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-9);
        let inv4: Vec<f64> = xs.iter().map(|x| 0.5 / x.powi(4)).collect();
        assert!((fit_loglog_slope(&xs, &inv4, 1..5).unwrap().slope + 4.0).abs() < 1e-9);
        let flat = vec![2.0; 6];
        assert!(fit_loglog_slope(&xs, &flat, 0..6).unwrap().slope.abs() < 1e-12);
        assert!(matches!(fit_loglog_slope(&xs, &flat, 0..2), Err(Error::DegenerateWindow(_))));
    }

    fn arb_density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
            let a = DMatrix::from_iterator(dim, dim, v.into_iter().map(|(r, i)| C64::new(r, i)));
            let m = &a * a.adjoint() + DMatrix::identity(dim, dim) * C64::new(1e-3, 0.0);
            let tr = m.trace();
            DensityMatrix::from_matrix(m / tr).hermitized()
        })
    }

    proptest! {
        #[test]
        fn fidelity_is_symmetric(a in arb_density(3), b in arb_density(3)) {
            let f1 = fidelity(&a, &b).unwrap();
            let f2 = fidelity(&b, &a).unwrap();
            prop_assert!((f1 - f2).abs() <= 1e-9);
            prop_assert!(1.0 - f1 >= 0.0);
        }

        #[test]
        fn spectrum_of_real_series_is_conjugate_symmetric(
            vals in prop::collection::vec(-2.0f64..2.0, 5..40),
            omega in -20.0f64..20.0,
            scale in -3.0f64..3.0,
        ) {
            let n = vals.len();
            let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.05).collect();
            let s = ObservableSeries::new(times.clone(), vals.iter().map(|&v| C64::new(v, 0.0)).collect()).unwrap();
            prop_assert!((spectrum(&s, -omega) - spectrum(&s, omega).conj()).norm() < 1e-12);
            let scaled = ObservableSeries::new(times, vals.iter().map(|&v| C64::new(scale * v, 0.0)).collect()).unwrap();
            prop_assert!((spectrum(&scaled, omega) - spectrum(&s, omega) * scale).norm() < 1e-12);
        }
    }
}
