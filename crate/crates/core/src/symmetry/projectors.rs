//! Dense projectors on `(C^q)^{⊗m}` built from the permutation action of `S_m`.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::partitions::{character, cycle_type, partitions, Partition};
use crate::error::{Error, Result};
use crate::operators::{OperatorExpression, DENSE_BUDGET};
use crate::problems::permutations;
use crate::sets::for_each_subset_up_to;

/// Largest `m` whose group averages are taken explicitly.
pub const MAX_AVERAGING_DEGREE: usize = 8;

/// The action of `S_m` on `[q]^m` by permuting tensor factors:
/// `(πx)_i = x_{π⁻¹(i)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupAction {
    pub m: usize,
    pub q: usize,
}

impl GroupAction {
    pub fn new(m: usize, q: usize) -> Result<Self> {
        let dim = checked_dim(q, m)?;
        if dim > DENSE_BUDGET {
            return Err(Error::Size {
                what: "tensor power dimension",
                requested: dim as u128,
                limit: DENSE_BUDGET as u128,
            });
        }
        Ok(GroupAction { m, q })
    }

    pub fn dim(&self) -> usize {
        self.q.pow(self.m as u32)
    }

    /// `ρ(π)` as an index map: `ρ(π) e_x = e_{image[x]}`.
    pub fn index_map(&self, perm: &[usize]) -> Vec<usize> {
        let (m, q) = (self.m, self.q);
        let mut digits = vec![0usize; m];
        let mut y = vec![0usize; m];
        (0..self.dim())
            .map(|mut idx| {
                for d in digits.iter_mut().rev() {
                    *d = idx % q;
                    idx /= q;
                }
                // site i of πx carries x_{π⁻¹(i)}, i.e. site π(s) carries x_s
                for s in 0..m {
                    y[perm[s]] = digits[s];
                }
                y.iter().fold(0, |acc, &v| acc * q + v)
            })
            .collect()
    }

    pub fn matrix(&self, perm: &[usize]) -> DMatrix<f64> {
        let map = self.index_map(perm);
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (x, &y) in map.iter().enumerate() {
            out[(y, x)] = 1.0;
        }
        out
    }

    /// `Σ_π w(cycle type of π) ρ(π)` over all of `S_m`.
    pub fn class_sum(&self, weight: impl Fn(&[usize]) -> f64) -> Result<DMatrix<f64>> {
        if self.m > MAX_AVERAGING_DEGREE {
            return Err(Error::Size {
                what: "group averaging degree",
                requested: self.m as u128,
                limit: MAX_AVERAGING_DEGREE as u128,
            });
        }
        let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for perm in permutations(self.m) {
            let ct = cycle_type(&perm);
            let w = *cache.entry(ct.clone()).or_insert_with(|| weight(&ct));
            if w == 0.0 {
                continue;
            }
            for (x, y) in self.index_map(&perm).into_iter().enumerate() {
                out[(y, x)] += w;
            }
        }
        Ok(out)
    }
}

fn checked_dim(q: usize, m: usize) -> Result<usize> {
    q.checked_pow(m as u32).ok_or(Error::Size {
        what: "tensor power dimension",
        requested: u128::MAX,
        limit: DENSE_BUDGET as u128,
    })
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Isotypic projector `E_λ = (dim λ / m!) Σ_π χ_λ(π) ρ(π)`.
pub fn isotypic(lambda: &Partition, q: usize) -> Result<DMatrix<f64>> {
    let m = lambda.size();
    let act = GroupAction::new(m, q)?;
    let c = lambda.dim() as f64 / factorial(m);
    act.class_sum(|ct| c * character(lambda, ct).expect("cycle type of m") as f64)
}

/// `Σ_{λ : m − λ_1 = k} E_λ` in one group average.
pub fn exactly_k_isotypic(k: usize, m: usize, q: usize) -> Result<DMatrix<f64>> {
    let act = GroupAction::new(m, q)?;
    let lambdas = partitions(m, Some(k));
    if lambdas.is_empty() {
        return Ok(DMatrix::zeros(act.dim(), act.dim()));
    }
    let f = factorial(m);
    act.class_sum(|ct| {
        lambdas.iter().map(|l| l.dim() as f64 * character(l, ct).expect("cycle type of m") as f64).sum::<f64>() / f
    })
}

/// Weight projector `Π_k = Σ_{|S| = k} Π_S` on `m` sites (zero for `k > m`).
pub fn weight_projector(k: usize, m: usize, q: usize) -> Result<DMatrix<f64>> {
    let dim = checked_dim(q, m)?;
    if dim > DENSE_BUDGET {
        return Err(Error::Size { what: "weight projector", requested: dim as u128, limit: DENSE_BUDGET as u128 });
    }
    let ground: Vec<usize> = (0..m).collect();
    let mut sets = Vec::new();
    for_each_subset_up_to(&ground, k, |s| {
        if s.len() == k {
            sets.push((s.clone(), 1.0));
        }
    });
    OperatorExpression::projector_sum(q, m, &sets)?.to_dense(DENSE_BUDGET)
}

/// The exactly-k projector `Π̄_k = Π_k · Σ_{λ: m−λ_1 = k} E_λ`.
///
/// On zero sites `Π̄_0` is the `1 × 1` identity and every other `Π̄_k` is zero.
pub fn bar_pi(k: usize, m: usize, q: usize) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Ok(DMatrix::from_element(1, 1, if k == 0 { 1.0 } else { 0.0 }));
    }
    if k > m {
        let d = checked_dim(q, m)?;
        return Ok(DMatrix::zeros(d, d));
    }
    Ok(weight_projector(k, m, q)? * exactly_k_isotypic(k, m, q)?)
}

/// `Σ_{k ≤ K} Π̄_k` on `m` sites.
pub fn group_v(cutoff: usize, m: usize, q: usize) -> Result<DMatrix<f64>> {
    let mut v = bar_pi(0, m, q)?;
    for k in 1..=cutoff.min(m) {
        v += bar_pi(k, m, q)?;
    }
    Ok(v)
}

/// `Φ_k = Π̄_k − Π_0⊗Π̄′_k − Π_1⊗Π̄′_{k−1}`, primes on sites `1..m`.
pub fn phi(k: usize, m: usize, q: usize) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::InvalidParams("Φ_k needs at least one site".into()));
    }
    let (pi0, pi1) = crate::operators::site_projectors(q);
    let mut out = bar_pi(k, m, q)?;
    out -= pi0.kronecker(&bar_pi(k, m - 1, q)?);
    if k >= 1 {
        out -= pi1.kronecker(&bar_pi(k - 1, m - 1, q)?);
    }
    Ok(out)
}

/// `‖M‖` of a symmetric matrix.
pub fn symmetric_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().symmetric_eigen().eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()))
}

/// `Φ_k` on `m` sites with its spectral norm.
pub fn phi_error(k: usize, m: usize, q: usize) -> Result<(DMatrix<f64>, f64)> {
    let p = phi(k, m, q)?;
    let norm = symmetric_norm(&p);
    Ok((p, norm))
}

/// `F = Π_i (ε − (a_i, b_i)) / 2` on `(C^q)^{⊗m}`.
pub fn f_projector(pairs: &[(usize, usize)], m: usize, q: usize) -> Result<DMatrix<f64>> {
    let mut seen = vec![false; m];
    for &(a, b) in pairs {
        for s in [a, b] {
            if s >= m {
                return Err(Error::InvalidParams(format!("site {s} outside [0, {m})")));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::OverlappingPairs(format!("site {s} appears in two pairs")));
            }
        }
    }
    let act = GroupAction::new(m, q)?;
    let id = DMatrix::identity(act.dim(), act.dim());
    let mut f = id.clone();
    for &(a, b) in pairs {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.swap(a, b);
        f = f * (&id - act.matrix(&perm)) * 0.5;
    }
    Ok(f)
}

/// The canonical pairs `(0,1), (2,3), …` used for `k` boxes.
pub fn canonical_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).map(|i| (2 * i, 2 * i + 1)).collect()
}

/// `rank(F|_{S^λ})` with `F` on the canonical `k = m − λ_1` pairs, exactly:
/// `2^{−k} Σ_e C(k,e) (−1)^e χ_λ(2^e 1^{m−2e})`.
pub fn kappa_rank(lambda: &Partition) -> Result<i64> {
    let m = lambda.size();
    let k = lambda.k_below();
    if 2 * k > m {
        return Err(Error::Precondition(format!("{lambda} has more than m/2 boxes below the first row")));
    }
    let mut total: i64 = 0;
    let mut binom: i64 = 1;
    for e in 0..=k {
        let mut cycle = vec![2; e];
        cycle.extend(std::iter::repeat_n(1, m - 2 * e));
        let chi = character(lambda, &cycle)?;
        total += if e % 2 == 0 { binom * chi } else { -binom * chi };
        binom = binom * (k - e) as i64 / (e + 1) as i64;
    }
    if total % (1 << k) != 0 {
        return Err(Error::Precondition(format!("non-integral trace for {lambda}")));
    }
    Ok(total >> k)
}

/// Whether some nonzero `v ∈ S^λ` has `Fv = v`.
pub fn kappa_check(lambda: &Partition) -> Result<bool> {
    Ok(kappa_rank(lambda)? >= 1)
}

/// Dense cross-check: `trace(F E_λ) = mult_q(λ) · rank(F|_{S^λ})`, returned as
/// `(trace, multiplicity)` with the multiplicity `trace(E_λ)/dim λ`.
pub fn kappa_dense(lambda: &Partition, q: usize) -> Result<(f64, f64)> {
    let m = lambda.size();
    let e = isotypic(lambda, q)?;
    let f = f_projector(&canonical_pairs(lambda.k_below()), m, q)?;
    let mult = e.trace() / lambda.dim() as f64;
    Ok(((f * e).trace(), mult))
}
