//! Weight-space construction for the Boolean alphabet.
//!
//! For `q = 2` both `Π_0` and `Π_1` have rank one, so the weight-k space on
//! `m` sites is the permutation module on `k`-subsets of `[m]`. Its component
//! with exactly `k` boxes below the first row is the harmonic subspace, the
//! kernel of the down map `D` to `(k−1)`-subsets (zero when `2k > m`). This
//! reaches `m` far beyond what group averaging allows.

use nalgebra::DMatrix;

use super::projectors::symmetric_norm;
use crate::error::{Error, Result};

/// Largest `C(m, k)` handled.
pub const JOHNSON_BUDGET: usize = 4096;

/// All `k`-subsets of `[m]` as bitmasks, in increasing order.
pub fn subsets(m: usize, k: usize) -> Vec<u64> {
    assert!(m <= 64, "at most 64 sites");
    let mut out = Vec::new();
    crate::sets::for_each_subset_up_to(&(0..m).collect::<Vec<_>>(), k, |s| {
        if s.len() == k {
            out.push(s.to_mask().expect("sites below 64"));
        }
    });
    out.sort_unstable();
    out
}

fn binom(m: usize, k: usize) -> usize {
    if k > m {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (m - i) / (i + 1))
}

/// Orthogonal projector onto the harmonic `k`-subset functions of `[m]`.
pub fn harmonic_projector(m: usize, k: usize) -> Result<DMatrix<f64>> {
    let size = binom(m, k);
    if size > JOHNSON_BUDGET {
        return Err(Error::Size {
            what: "Johnson scheme dimension",
            requested: size as u128,
            limit: JOHNSON_BUDGET as u128,
        });
    }
    if 2 * k > m {
        return Ok(DMatrix::zeros(size, size));
    }
    if k == 0 {
        return Ok(DMatrix::identity(1, 1));
    }
    let upper = subsets(m, k);
    let lower = subsets(m, k - 1);
    let d = DMatrix::from_fn(lower.len(), upper.len(), |i, j| if lower[i] & upper[j] == lower[i] { 1.0 } else { 0.0 });
    let gram = &d * d.transpose();
    let chol = gram.cholesky().ok_or_else(|| Error::Precondition("down map is not surjective".into()))?;
    let proj_perp = d.transpose() * chol.solve(&d);
    Ok(DMatrix::identity(upper.len(), upper.len()) - proj_perp)
}

/// `Φ_k` on `m` sites for `q = 2`, in the basis of `k`-subsets.
///
/// Subsets avoiding site 0 carry the harmonic projector of the remaining
/// `m − 1` sites at level `k`; subsets containing it carry level `k − 1`.
pub fn phi_weight_space(k: usize, m: usize) -> Result<DMatrix<f64>> {
    if m == 0 || k > m {
        return Err(Error::InvalidParams(format!("Φ_{k} needs 1 ≤ m and k ≤ m, got m = {m}")));
    }
    let full = subsets(m, k);
    let mut phi = harmonic_projector(m, k)?;
    let tail_k = subsets(m - 1, k);
    let tail_k1 = if k >= 1 { subsets(m - 1, k - 1) } else { Vec::new() };
    let h_k = harmonic_projector(m - 1, k)?;
    let h_k1 = if k >= 1 { Some(harmonic_projector(m - 1, k - 1)?) } else { None };
    // position of a tail subset (sites 1..m shifted down by one)
    let locate = |list: &[u64], mask: u64| list.binary_search(&mask).expect("tail subset");
    let info: Vec<(bool, usize)> = full
        .iter()
        .map(|&s| if s & 1 == 1 { (true, locate(&tail_k1, s >> 1)) } else { (false, locate(&tail_k, s >> 1)) })
        .collect();
    for (a, &(ia, pa)) in info.iter().enumerate() {
        for (b, &(ib, pb)) in info.iter().enumerate() {
            if ia != ib {
                continue;
            }
            phi[(a, b)] -= if ia { h_k1.as_ref().unwrap()[(pa, pb)] } else { h_k[(pa, pb)] };
        }
    }
    Ok(phi)
}

/// `‖Φ_k^{[m]}‖` for `q = 2`.
pub fn phi_norm_weight_space(k: usize, m: usize) -> Result<f64> {
    Ok(symmetric_norm(&phi_weight_space(k, m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::projectors::{bar_pi, phi_error};

    #[test]
    fn harmonic_dimensions() {
        // dim S^{(m−k,k)} = C(m,k) − C(m,k−1)
        for m in 2..=10 {
            for k in 0..=m / 2 {
                let p = harmonic_projector(m, k).unwrap();
                let lower = if k == 0 { 0 } else { binom(m, k - 1) };
                assert!((p.trace() - (binom(m, k) - lower) as f64).abs() < 1e-9);
                assert!((&p * &p - &p).iter().all(|x| x.abs() < 1e-10));
            }
        }
        assert_eq!(harmonic_projector(5, 3).unwrap().trace(), 0.0);
    }

    #[test]
    fn matches_dense_construction() {
        for m in 2..=6 {
            for k in 1..=2 {
                let dense = phi_error(k, m, 2).unwrap().1;
                let ws = phi_norm_weight_space(k, m).unwrap();
                assert!((dense - ws).abs() < 1e-9, "m={m} k={k}: {dense} vs {ws}");
                let rank_dense = bar_pi(k, m, 2).unwrap().trace();
                assert!((rank_dense - harmonic_projector(m, k).unwrap().trace()).abs() < 1e-9);
            }
        }
    }
}
