//! Linear maps and their spectral norms.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A real linear map given by its action and the action of its transpose.
pub trait LinearMap {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64>;
}

impl LinearMap for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVectorView::from_slice(x, x.len());
        (self * v).as_slice().to_vec()
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVectorView::from_slice(y, y.len());
        (self.tr_mul(&v)).as_slice().to_vec()
    }
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }

    fn ncols(&self) -> usize {
        (**self).ncols()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (**self).apply_transpose(y)
    }
}

/// Dense matrix of a linear map, built column by column.
pub fn materialize(map: &dyn LinearMap, budget: usize) -> Result<DMatrix<f64>> {
    let (r, c) = (map.nrows(), map.ncols());
    if r.max(c) > budget {
        return Err(Error::Size { what: "dense materialisation", requested: r.max(c) as u128, limit: budget as u128 });
    }
    let mut out = DMatrix::zeros(r, c);
    let mut e = vec![0.0; c];
    for j in 0..c {
        e[j] = 1.0;
        let col = map.apply(&e);
        e[j] = 0.0;
        out.column_mut(j).copy_from_slice(&col);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DenseSvd,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    /// Relative tolerance on the estimate of `σ²` between iterations.
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Largest dimension accepted by the dense method.
    pub dense_budget: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { tol: 1e-8, max_iterations: 10_000, seed: 0, dense_budget: super::DENSE_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub method: Method,
    pub tol: f64,
    pub iterations: usize,
    /// `‖AᵀA x − σ² x‖ / σ²` at the returned unit vector (zero for dense).
    pub residual: f64,
}

/// Largest singular value of `map`.
pub fn spectral_norm(map: &dyn LinearMap, method: Method, opts: &NormOptions) -> Result<NormReport> {
    match method {
        Method::DenseSvd => {
            let d = materialize(map, opts.dense_budget)?;
            let value = if d.is_empty() { 0.0 } else { d.singular_values().max() };
            Ok(NormReport { value, method, tol: opts.tol, iterations: 0, residual: 0.0 })
        }
        Method::PowerIteration => power_iteration(map, opts),
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Power iteration on `AᵀA` from a seeded random start.
pub fn power_iteration(map: &dyn LinearMap, opts: &NormOptions) -> Result<NormReport> {
    let report = |value: f64, iterations: usize, residual: f64| NormReport {
        value,
        method: Method::PowerIteration,
        tol: opts.tol,
        iterations,
        residual,
    };
    let n = map.ncols();
    if n == 0 || map.nrows() == 0 {
        return Ok(report(0.0, 0, 0.0));
    }
    let mut r = rng::root(opts.seed);
    let mut x: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let ax = map.apply(&x);
        let z = map.apply_transpose(&ax);
        // Rayleigh quotient of AᵀA at the unit vector x
        let rho: f64 = ax.iter().map(|v| v * v).sum();
        if rho == 0.0 {
            return Ok(report(0.0, it, 0.0));
        }
        residual = z.iter().zip(&x).map(|(zi, xi)| (zi - rho * xi).powi(2)).sum::<f64>().sqrt() / rho;
        let nz = norm2(&z);
        x = z.into_iter().map(|v| v / nz).collect();
        if (rho - prev).abs() <= opts.tol * rho {
            return Ok(report(rho.sqrt(), it, residual));
        }
        prev = rho;
    }
    Err(Error::Convergence { iterations: opts.max_iterations, estimate: prev.max(0.0).sqrt(), residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_power_agree() {
        let mut r = rng::root(4);
        for _ in 0..5 {
            let m = DMatrix::from_fn(30, 20, |_, _| r.gen_range(-1.0..1.0));
            let d = spectral_norm(&m, Method::DenseSvd, &NormOptions::default()).unwrap();
            let p = spectral_norm(&m, Method::PowerIteration, &NormOptions::default()).unwrap();
            assert!((d.value - p.value).abs() <= 1e-6 * d.value, "{} vs {}", d.value, p.value);
            assert_eq!(p.method, Method::PowerIteration);
        }
    }

    #[test]
    fn zero_map_has_zero_norm() {
        let z = DMatrix::<f64>::zeros(4, 3);
        assert_eq!(power_iteration(&z, &NormOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn cap_reached_is_a_convergence_error() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.999, 0.5]));
        let opts = NormOptions { max_iterations: 3, tol: 1e-15, ..Default::default() };
        match power_iteration(&m, &opts) {
            Err(Error::Convergence { iterations: 3, estimate, .. }) => assert!(estimate > 0.9),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn dense_budget_refused() {
        let m = DMatrix::<f64>::zeros(10, 10);
        let opts = NormOptions { dense_budget: 5, ..Default::default() };
        assert!(matches!(spectral_norm(&m, Method::DenseSvd, &opts), Err(Error::Size { .. })));
    }

    #[test]
    fn materialize_round_trip() {
        let m = DMatrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64);
        assert_eq!(materialize(&m, 10).unwrap(), m);
    }
}
