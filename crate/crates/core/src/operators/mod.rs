//! The Π/Ψ tensor algebra over `Z_q`.
//!
//! An [`OperatorExpression`] on `m` sites is a weighted sum of Kronecker
//! products of per-site factors, optionally with its rows restricted to the
//! zero-sum slices `P^T` of some disjoint site triples and scaled by `√q` per
//! triple. Rows of a restricted expression are indexed by the free sites (all
//! sites except the first of each restricted triple) in increasing order, so
//! for a full matching on `[3n]` they are the pairs `(x_B, x_C)` row-major.

mod apply;
pub mod fourier;
pub mod kron;
pub mod norm;

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Matching;
use crate::sets::SiteSet;

pub use fourier::{fourier_map, FourierIndex};
pub use kron::GroupKron;
pub use norm::{spectral_norm, LinearMap, Method, NormOptions, NormReport};

/// Largest dimension for which dense matrices are built.
pub const DENSE_BUDGET: usize = 4096;

/// `(Π_0, Π_1)` on `C^q`: the uniform rank-one projector and its complement.
pub fn site_projectors(q: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let pi0 = DMatrix::from_element(q, q, 1.0 / q as f64);
    let pi1 = DMatrix::identity(q, q) - &pi0;
    (pi0, pi1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteFactor {
    Pi0,
    Pi1,
    Identity,
    /// A general `q × q` matrix, row-major.
    Dense(Arc<Vec<f64>>),
}

impl SiteFactor {
    pub fn dense(m: &DMatrix<f64>) -> Self {
        let q = m.nrows();
        SiteFactor::Dense(Arc::new((0..q * q).map(|k| m[(k / q, k % q)]).collect()))
    }

    pub fn matrix(&self, q: usize) -> DMatrix<f64> {
        let (pi0, pi1) = site_projectors(q);
        match self {
            SiteFactor::Pi0 => pi0,
            SiteFactor::Pi1 => pi1,
            SiteFactor::Identity => DMatrix::identity(q, q),
            SiteFactor::Dense(v) => DMatrix::from_row_slice(q, q, v),
        }
    }

    pub fn transpose(&self, q: usize) -> SiteFactor {
        match self {
            SiteFactor::Dense(_) => SiteFactor::dense(&self.matrix(q).transpose()),
            other => other.clone(),
        }
    }

    /// `self · other`, with `None` for the zero matrix.
    pub fn compose(&self, other: &SiteFactor, q: usize) -> Option<SiteFactor> {
        use SiteFactor::*;
        match (self, other) {
            (Identity, x) | (x, Identity) => Some(x.clone()),
            (Pi0, Pi0) => Some(Pi0),
            (Pi1, Pi1) => Some(Pi1),
            (Pi0, Pi1) | (Pi1, Pi0) => None,
            (a, b) => Some(SiteFactor::dense(&(a.matrix(q) * b.matrix(q)))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorTerm {
    pub coefficient: f64,
    pub factors: Vec<SiteFactor>,
}

impl TensorTerm {
    /// `Π_S`: `Π_1` on the sites of `S`, `Π_0` elsewhere.
    pub fn projector(m: usize, s: &SiteSet, coefficient: f64) -> Self {
        let factors = (0..m).map(|i| if s.contains(i) { SiteFactor::Pi1 } else { SiteFactor::Pi0 }).collect();
        TensorTerm { coefficient, factors }
    }

    pub fn identity(m: usize, coefficient: f64) -> Self {
        TensorTerm { coefficient, factors: vec![SiteFactor::Identity; m] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorExpression {
    q: usize,
    m: usize,
    terms: Vec<TensorTerm>,
    /// Disjoint site triples whose rows are restricted to the zero-sum slice;
    /// the first site of each is the dropped (forced) coordinate.
    restriction: Vec<[usize; 3]>,
    #[serde(skip)]
    gather: OnceLock<Vec<usize>>,
}

impl PartialEq for OperatorExpression {
    fn eq(&self, other: &Self) -> bool {
        (self.q, self.m, &self.terms, &self.restriction) == (other.q, other.m, &other.terms, &other.restriction)
    }
}

impl OperatorExpression {
    pub fn new(q: usize, m: usize, terms: Vec<TensorTerm>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParams(format!("q must be at least 2, got {q}")));
        }
        for t in &terms {
            if t.factors.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: t.factors.len() });
            }
            for f in &t.factors {
                if let SiteFactor::Dense(v) = f {
                    if v.len() != q * q {
                        return Err(Error::DimensionMismatch { expected: q * q, got: v.len() });
                    }
                }
            }
        }
        Ok(OperatorExpression { q, m, terms, restriction: Vec::new(), gather: OnceLock::new() })
    }

    pub fn zero(q: usize, m: usize) -> Self {
        OperatorExpression::new(q, m, Vec::new()).expect("valid shape")
    }

    pub fn identity(q: usize, m: usize) -> Self {
        OperatorExpression::new(q, m, vec![TensorTerm::identity(m, 1.0)]).expect("valid shape")
    }

    /// `Σ_S c_S Π_S` over the given weighted sets.
    pub fn projector_sum(q: usize, m: usize, sets: &[(SiteSet, f64)]) -> Result<Self> {
        let terms = sets.iter().map(|(s, c)| TensorTerm::projector(m, s, *c)).collect();
        OperatorExpression::new(q, m, terms)
    }

    /// Restricts rows to `P^T` for each triple, scaling by `√q` per triple.
    pub fn restrict_rows(mut self, triples: &[[usize; 3]]) -> Result<Self> {
        let mut seen = vec![false; self.m];
        for t in self.restriction.iter().chain(triples) {
            for &s in t {
                if s >= self.m {
                    return Err(Error::InvalidParams(format!("site {s} outside [0, {})", self.m)));
                }
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidParams(format!("restricted triples overlap at site {s}")));
                }
            }
        }
        self.restriction.extend_from_slice(triples);
        self.gather = OnceLock::new();
        Ok(self)
    }

    /// Restriction to the positive slice `P^μ` of a matching on `[3n]`.
    pub fn restrict_to_matching(self, mu: &Matching) -> Result<Self> {
        let triples: Vec<[usize; 3]> = mu.triples().iter().map(|t| t.sites()).collect();
        self.restrict_rows(&triples)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sites(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    pub fn restriction(&self) -> &[[usize; 3]] {
        &self.restriction
    }

    /// `(√q)^{#restricted triples}`.
    pub fn row_scale(&self) -> f64 {
        (self.q as f64).sqrt().powi(self.restriction.len() as i32)
    }

    pub fn nrows(&self) -> usize {
        self.q.pow((self.m - self.restriction.len()) as u32)
    }

    pub fn ncols(&self) -> usize {
        self.q.pow(self.m as u32)
    }

    /// Column index in `[q]^m` of every row (the identity without restriction).
    pub fn gather(&self) -> &[usize] {
        self.gather.get_or_init(|| row_gather(self.q, self.m, &self.restriction))
    }

    /// `self · (⊗ right)`: composes a per-site factor on the right of every term.
    pub fn compose_right(&self, right: &[SiteFactor]) -> Result<Self> {
        if right.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: right.len() });
        }
        let terms = self
            .terms
            .iter()
            .filter_map(|t| {
                let factors: Option<Vec<SiteFactor>> =
                    t.factors.iter().zip(right).map(|(a, b)| a.compose(b, self.q)).collect();
                factors.map(|factors| TensorTerm { coefficient: t.coefficient, factors })
            })
            .collect();
        let mut out = OperatorExpression::new(self.q, self.m, terms)?;
        out.restriction = self.restriction.clone();
        Ok(out)
    }

    /// `self` with the factor of every term at `site` composed on the right by `f`.
    pub fn right_multiply_site(&self, site: usize, f: &SiteFactor) -> Result<Self> {
        if site >= self.m {
            return Err(Error::InvalidParams(format!("site {site} outside [0, {})", self.m)));
        }
        let mut right = vec![SiteFactor::Identity; self.m];
        right[site] = f.clone();
        self.compose_right(&right)
    }

    fn map_site(&self, j: usize, f: impl Fn(&TensorTerm) -> Result<Vec<TensorTerm>>) -> Result<Self> {
        if j >= self.m {
            return Err(Error::InvalidParams(format!("site {j} outside [0, {})", self.m)));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            terms.extend(f(t)?);
        }
        let mut out = OperatorExpression::new(self.q, self.m, terms)?;
        out.restriction = self.restriction.clone();
        Ok(out)
    }

    /// Dense matrix, refused above `budget` rows or columns.
    pub fn to_dense(&self, budget: usize) -> Result<DMatrix<f64>> {
        let (r, c) = (self.nrows(), self.ncols());
        if r.max(c) > budget {
            return Err(Error::Size { what: "dense operator", requested: r.max(c) as u128, limit: budget as u128 });
        }
        let mut full = DMatrix::zeros(c, c);
        for t in &self.terms {
            let mut k = DMatrix::from_element(1, 1, t.coefficient);
            for f in &t.factors {
                k = k.kronecker(&f.matrix(self.q));
            }
            full += k;
        }
        let scale = self.row_scale();
        let gather = self.gather();
        Ok(DMatrix::from_fn(r, c, |i, j| scale * full[(gather[i], j)]))
    }
}

fn row_gather(q: usize, m: usize, restriction: &[[usize; 3]]) -> Vec<usize> {
    let dropped: Vec<Option<(usize, usize)>> =
        (0..m).map(|s| restriction.iter().find(|t| t[0] == s).map(|t| (t[1], t[2]))).collect();
    let free: Vec<usize> = (0..m).filter(|&s| dropped[s].is_none()).collect();
    let rows = q.pow(free.len() as u32);
    let mut out = Vec::with_capacity(rows);
    let mut x = vec![0usize; m];
    for mut r in 0..rows {
        for &s in free.iter().rev() {
            x[s] = r % q;
            r /= q;
        }
        for s in 0..m {
            if let Some((b, c)) = dropped[s] {
                x[s] = (2 * q - x[b] - x[c]) % q;
            }
        }
        out.push(x.iter().fold(0, |acc, &v| acc * q + v));
    }
    out
}

/// Weight families of `Ψ^T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsiFamily {
    /// `Ψ^T_R` for `R` given by positions `0..3` within the triple.
    Single(Vec<usize>),
    /// `Σ_{|R| ≤ 1} Ψ^T_R`.
    Le1,
    /// `Σ_{R ⊊ T} Ψ^T_R`.
    Le2,
    /// `Ψ^T_∅`.
    Empty,
}

/// `Ψ^T_R = √q Π^T_R[P^T, ·]` on a single triple, as a `q² × q³` operator.
pub fn psi(family: &PsiFamily, q: usize) -> Result<OperatorExpression> {
    let sets: Vec<SiteSet> = match family {
        PsiFamily::Single(r) => {
            if r.iter().any(|&i| i > 2) {
                return Err(Error::InvalidParams(format!("{r:?} is not a subset of the triple")));
            }
            vec![SiteSet::from_sites(r.iter().copied())]
        }
        PsiFamily::Empty => vec![SiteSet::empty()],
        PsiFamily::Le1 => {
            (0..4u64).map(|k| if k == 0 { SiteSet::empty() } else { SiteSet::from_sites([k as usize - 1]) }).collect()
        }
        PsiFamily::Le2 => (0u64..7).map(SiteSet::from_mask).collect(),
    };
    let weighted: Vec<(SiteSet, f64)> = sets.into_iter().map(|s| (s, 1.0)).collect();
    OperatorExpression::projector_sum(q, 3, &weighted)?.restrict_rows(&[[0, 1, 2]])
}

/// `Ψ^μ_S` on `[3n]`.
pub fn psi_matching(mu: &Matching, s: &SiteSet, q: usize) -> Result<OperatorExpression> {
    OperatorExpression::projector_sum(q, 3 * mu.n(), &[(s.clone(), 1.0)])?.restrict_to_matching(mu)
}

/// The Δ_j-rewrite: `Π_1` at `j` becomes `−Π_0`, `Π_0` and `I` stay.
///
/// The result agrees with `expr` on every entry whose row and column inputs
/// differ at site `j`.
pub fn delta_rewrite(expr: &OperatorExpression, j: usize) -> Result<OperatorExpression> {
    expr.map_site(j, |t| match &t.factors[j] {
        SiteFactor::Pi0 | SiteFactor::Identity => Ok(vec![t.clone()]),
        SiteFactor::Pi1 => {
            let mut u = t.clone();
            u.factors[j] = SiteFactor::Pi0;
            u.coefficient = -u.coefficient;
            Ok(vec![u])
        }
        SiteFactor::Dense(_) => Err(Error::UnsupportedRewrite {
            site: j,
            reason: "general factor has no definite weight at this site".into(),
        }),
    })
}

/// The exact Hadamard product `Δ_j ∘ expr`, kept in tensor form.
///
/// Masking the pattern `x_j ≠ y_j` only touches the site-`j` factor: it loses
/// its diagonal. On the `Π` basis this is `Π_0 ↦ (1−1/q)Π_0 − (1/q)Π_1`,
/// `Π_1 ↦ (1/q)Π_1 − (1−1/q)Π_0` and `I ↦ 0`. Row restriction commutes with
/// entrywise masking, so restricted expressions are handled as well.
pub fn hadamard_delta(expr: &OperatorExpression, j: usize) -> Result<OperatorExpression> {
    let q = expr.q as f64;
    expr.map_site(j, |t| {
        let with = |f: SiteFactor, c: f64| {
            let mut u = t.clone();
            u.factors[j] = f;
            u.coefficient *= c;
            u
        };
        Ok(match &t.factors[j] {
            SiteFactor::Pi0 => vec![with(SiteFactor::Pi0, 1.0 - 1.0 / q), with(SiteFactor::Pi1, -1.0 / q)],
            SiteFactor::Pi1 => vec![with(SiteFactor::Pi1, 1.0 / q), with(SiteFactor::Pi0, -(1.0 - 1.0 / q))],
            SiteFactor::Identity => Vec::new(),
            SiteFactor::Dense(_) => {
                let mut m = t.factors[j].matrix(expr.q);
                m.fill_diagonal(0.0);
                vec![with(SiteFactor::dense(&m), 1.0)]
            }
        })
    })
}
