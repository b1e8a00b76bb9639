//! The Fourier basis of `C^q` and the column structure of `Ψ^T_R` in it.
//!
//! Everything else in the crate is real; complex arithmetic is confined here.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::{psi, PsiFamily, DENSE_BUDGET};
use crate::error::Result;

/// A Fourier index `(i_1, …, i_m)` over `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FourierIndex(pub Vec<usize>);

impl FourierIndex {
    /// Number of nonzero components.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&i| i != 0).count()
    }

    /// Positions of the nonzero components.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k] != 0).collect()
    }
}

/// `(i_1, i_2, i_3) ↦ (i_2 − i_1, i_3 − i_1) mod q`.
pub fn fourier_map(i1: usize, i2: usize, i3: usize, q: usize) -> (usize, usize) {
    ((i2 + q - i1 % q) % q, (i3 + q - i1 % q) % q)
}

/// Unitary DFT on `C^{q^m}`: column `i` is the character `x ↦ ω^{i·x}/q^{m/2}`.
pub fn dft(q: usize, m: usize) -> DMatrix<Complex<f64>> {
    let one = DMatrix::from_fn(q, q, |x, i| {
        let angle = 2.0 * std::f64::consts::PI * ((x * i) % q) as f64 / q as f64;
        Complex::from_polar(1.0 / (q as f64).sqrt(), angle)
    });
    let mut out = DMatrix::from_element(1, 1, Complex::new(1.0, 0.0));
    for _ in 0..m {
        out = out.kronecker(&one);
    }
    out
}

/// Outcome of the exhaustive Fourier-column check for one `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCheck {
    pub q: usize,
    pub columns_checked: usize,
    pub failures: usize,
    pub max_deviation: f64,
}

/// Checks, for every `R ⊆ T` and every Fourier column `i`, that `Ψ^T_R e_i`
/// is the single Fourier row vector at `fourier_map(i)` with coefficient 1
/// when the support of `i` is `R`, and zero otherwise.
pub fn check_psi_fourier_columns(q: usize, tol: f64) -> Result<FourierCheck> {
    let f2 = dft(q, 2);
    let f3 = dft(q, 3);
    let f2h = f2.adjoint();
    let mut failures = 0;
    let mut max_dev: f64 = 0.0;
    let mut checked = 0;
    for mask in 0usize..8 {
        let r: Vec<usize> = (0..3).filter(|k| mask >> k & 1 == 1).collect();
        let p = psi(&PsiFamily::Single(r.clone()), q)?.to_dense(DENSE_BUDGET)?;
        let pc = p.map(|v| Complex::new(v, 0.0));
        let hat = &f2h * pc * &f3;
        for col in 0..q * q * q {
            let idx = FourierIndex(vec![col / (q * q), col / q % q, col % q]);
            let expected = (idx.support() == r).then(|| {
                let (j1, j2) = fourier_map(idx.0[0], idx.0[1], idx.0[2], q);
                j1 * q + j2
            });
            let mut bad = false;
            for row in 0..q * q {
                let want = if Some(row) == expected { 1.0 } else { 0.0 };
                let dev = (hat[(row, col)] - Complex::new(want, 0.0)).norm();
                max_dev = max_dev.max(dev);
                bad |= dev > tol;
            }
            failures += bad as usize;
            checked += 1;
        }
    }
    Ok(FourierCheck { q, columns_checked: checked, failures, max_deviation: max_dev })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_examples() {
        assert_eq!(fourier_map(0, 3, 4, 5), (3, 4));
        assert_eq!(fourier_map(1, 1, 1, 5), (0, 0));
        assert_eq!(fourier_map(2, 0, 1, 3), (1, 2));
    }

    #[test]
    fn weights() {
        assert_eq!(FourierIndex(vec![0, 2, 0, 1]).weight(), 2);
        assert_eq!(FourierIndex(vec![0, 0]).support(), Vec::<usize>::new());
    }

    #[test]
    fn dft_is_unitary() {
        let f = dft(3, 2);
        let e = &f.adjoint() * &f - DMatrix::identity(9, 9);
        assert!(e.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn psi_columns_small_q() {
        for q in [2, 3] {
            let c = check_psi_fourier_columns(q, 1e-9).unwrap();
            assert_eq!(c.failures, 0, "{c:?}");
            assert_eq!(c.columns_checked, 8 * q * q * q);
        }
    }
}
