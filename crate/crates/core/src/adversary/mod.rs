//! Adversary matrices `G(α)`, `G̃(α)`, their restriction to negative inputs,
//! the `Δ_j` constraints and certified lower bounds.

use std::collections::HashMap;
use std::sync::Arc;

use crate::certificates::DualSolution;
use crate::error::{Error, Result};
use crate::operators::{
    delta_rewrite, hadamard_delta, spectral_norm, GroupKron, LinearMap, Method, NormOptions, NormReport,
    OperatorExpression,
};
use crate::problems::{enumerate_matchings, Matching, ProblemParams};
use crate::sets::{count_subsets_up_to, SiteSet};

mod certify;
mod gvdelta;

pub use certify::{
    analytic_gamma_bound, certify, certify_3matching, certify_3shift, lambda_inequality, matching_cutoff,
    psi_prime_norm, BoundCertificate, CertifyOptions, ChainEntry, Construction, LambdaInequality, MatchingChecks,
    ShiftChecks, CSV_HEADER,
};
pub use gvdelta::{gv_delta_residual, GvDeltaReport};

/// Largest number of projector terms allowed per block.
pub const TERM_BUDGET: u128 = 100_000;

#[derive(Debug, Clone)]
struct Block {
    mu: Matching,
    expr: usize,
    gather: Arc<Vec<usize>>,
}

/// `G(α)` as stacked blocks `G^μ(α) = Σ_S α(μ,S) Ψ^μ_S`, optionally followed
/// by a right projector and a column mask.
///
/// Blocks with identical term lists share one unrestricted expression, so an
/// apply evaluates each distinct expression once and gathers per block.
#[derive(Debug, Clone)]
pub struct AdversaryOperator {
    q: usize,
    m: usize,
    exprs: Vec<OperatorExpression>,
    blocks: Vec<Block>,
    row_scale: f64,
    factor: f64,
    columns: Option<Arc<Vec<usize>>>,
    right: Option<GroupKron>,
}

type TermKey = Vec<(Vec<usize>, u64)>;

fn check_term_budget(alpha: &DualSolution) -> Result<()> {
    let t = count_subsets_up_to(3 * alpha.n(), alpha.support_bound());
    if t > TERM_BUDGET {
        return Err(Error::Size { what: "projector terms per block", requested: t, limit: TERM_BUDGET });
    }
    Ok(())
}

fn sorted_terms(alpha: &DualSolution, mu: &Matching) -> Vec<(SiteSet, f64)> {
    let mut terms: Vec<(SiteSet, f64)> = alpha.terms(mu).into_iter().filter(|(_, c)| *c != 0.0).collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    terms
}

fn params_of(alpha: &DualSolution, q: usize) -> Result<ProblemParams> {
    let q32 = u32::try_from(q).map_err(|_| Error::InvalidParams(format!("q = {q} too large")))?;
    ProblemParams::new(alpha.n(), q32, alpha.variant())
}

/// Full input index of every row of `P^μ`.
pub fn positive_rows(mu: &Matching, q: usize) -> Result<Vec<usize>> {
    Ok(OperatorExpression::identity(q, 3 * mu.n()).restrict_to_matching(mu)?.gather().to_vec())
}

/// `G(α)` over the whole family, with all columns `U`.
pub fn build_g(alpha: &DualSolution, q: usize) -> Result<AdversaryOperator> {
    let params = params_of(alpha, q)?;
    check_term_budget(alpha)?;
    let m = params.sites();
    let mut index: HashMap<TermKey, usize> = HashMap::new();
    let mut exprs = Vec::new();
    let mut blocks = Vec::new();
    for mu in enumerate_matchings(&params)? {
        let terms = sorted_terms(alpha, &mu);
        let key: TermKey = terms.iter().map(|(s, c)| (s.as_slice().to_vec(), c.to_bits())).collect();
        let expr = match index.get(&key) {
            Some(&i) => i,
            None => {
                exprs.push(OperatorExpression::projector_sum(q, m, &terms)?);
                index.insert(key, exprs.len() - 1);
                exprs.len() - 1
            }
        };
        let gather = Arc::new(positive_rows(&mu, q)?);
        blocks.push(Block { mu, expr, gather });
    }
    Ok(AdversaryOperator {
        q,
        m,
        exprs,
        blocks,
        row_scale: (q as f64).sqrt().powi(alpha.n() as i32),
        factor: 1.0,
        columns: None,
        right: None,
    })
}

/// Keeps only the given columns (input indices into `U`, increasing).
pub fn restrict_columns(op: AdversaryOperator, columns: Vec<usize>) -> Result<AdversaryOperator> {
    op.restrict_columns(columns)
}

impl AdversaryOperator {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sites(&self) -> usize {
        self.m
    }

    pub fn universe(&self) -> usize {
        self.q.pow(self.m as u32)
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Number of distinct unrestricted expressions behind the blocks.
    pub fn distinct_expressions(&self) -> usize {
        self.exprs.len()
    }

    pub fn matchings(&self) -> impl Iterator<Item = &Matching> {
        self.blocks.iter().map(|b| &b.mu)
    }

    pub fn columns(&self) -> Option<&[usize]> {
        self.columns.as_deref().map(Vec::as_slice)
    }

    pub fn right(&self) -> Option<&GroupKron> {
        self.right.as_ref()
    }

    /// Full input index of every row, block by block.
    pub fn row_inputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().flat_map(|b| b.gather.iter().copied())
    }

    /// Full input index of every column.
    pub fn column_input(&self, k: usize) -> usize {
        match &self.columns {
            Some(c) => c[k],
            None => k,
        }
    }

    pub fn restrict_columns(mut self, columns: Vec<usize>) -> Result<Self> {
        let u = self.universe();
        if columns.windows(2).any(|w| w[0] >= w[1]) || columns.last().is_some_and(|&c| c >= u) {
            return Err(Error::InvalidParams("column set must be increasing and inside U".into()));
        }
        let columns = match &self.columns {
            Some(old) => {
                if columns.iter().any(|c| old.binary_search(c).is_err()) {
                    return Err(Error::InvalidParams("column set leaves the current columns".into()));
                }
                columns
            }
            None => columns,
        };
        self.columns = Some(Arc::new(columns));
        Ok(self)
    }

    /// Right multiplication by a projector on `U`, applied before the column mask.
    pub fn with_right(mut self, right: GroupKron) -> Result<Self> {
        if right.sites() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: right.sites() });
        }
        if self.columns.is_some() {
            return Err(Error::Precondition("right multiplier must precede the column restriction".into()));
        }
        self.right = Some(right);
        Ok(self)
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.factor *= c;
        self
    }

    fn map_exprs(&self, f: impl Fn(&OperatorExpression) -> Result<OperatorExpression>) -> Result<Self> {
        if self.right.is_some() {
            return Err(Error::Precondition("site rewrites need a right multiplier free operator".into()));
        }
        let exprs = self.exprs.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(AdversaryOperator { exprs, ..self.clone() })
    }

    /// The exact `Δ_j ∘ self` in factorized form.
    pub fn hadamard_delta(&self, j: usize) -> Result<Self> {
        self.map_exprs(|e| hadamard_delta(e, j))
    }

    /// The `Δ_j`-rewrite `Γ′_j`, equal to `self` wherever `x_j ≠ y_j`.
    pub fn delta_rewrite(&self, j: usize) -> Result<Self> {
        self.map_exprs(|e| delta_rewrite(e, j))
    }

    fn lift(&self, x: &[f64]) -> Vec<f64> {
        let mut full = match &self.columns {
            Some(c) => {
                let mut v = vec![0.0; self.universe()];
                for (&i, &xi) in c.iter().zip(x) {
                    v[i] = xi;
                }
                v
            }
            None => x.to_vec(),
        };
        if let Some(r) = &self.right {
            full = r.apply(&full);
        }
        full
    }

    fn project(&self, mut full: Vec<f64>) -> Vec<f64> {
        if let Some(r) = &self.right {
            full = r.apply_transpose(&full);
        }
        match &self.columns {
            Some(c) => c.iter().map(|&i| full[i]).collect(),
            None => full,
        }
    }
}

impl LinearMap for AdversaryOperator {
    fn nrows(&self) -> usize {
        self.blocks.iter().map(|b| b.gather.len()).sum()
    }

    fn ncols(&self) -> usize {
        self.columns.as_ref().map_or(self.universe(), |c| c.len())
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols(), "input length");
        let full = self.lift(x);
        let images: Vec<Vec<f64>> = self.exprs.iter().map(|e| e.apply(&full)).collect();
        let s = self.row_scale * self.factor;
        let mut out = Vec::with_capacity(self.nrows());
        for b in &self.blocks {
            let img = &images[b.expr];
            out.extend(b.gather.iter().map(|&g| s * img[g]));
        }
        out
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows(), "input length");
        let u = self.universe();
        let s = self.row_scale * self.factor;
        let mut acc = vec![vec![0.0; u]; self.exprs.len()];
        let mut offset = 0;
        for b in &self.blocks {
            let a = &mut acc[b.expr];
            for (&g, &v) in b.gather.iter().zip(&y[offset..offset + b.gather.len()]) {
                a[g] += s * v;
            }
            offset += b.gather.len();
        }
        let mut full = vec![0.0; u];
        for (e, a) in self.exprs.iter().zip(&acc) {
            for (f, v) in full.iter_mut().zip(e.apply_transpose(a)) {
                *f += v;
            }
        }
        self.project(full)
    }
}

/// `G̃(α)`: blocks `G̃^μ(α) = Σ_S α(μ,S) Π_S` on `U × U`, stacked over `μ`.
#[derive(Debug, Clone)]
pub struct ExtendedOperator {
    u: usize,
    blocks: Vec<(Matching, OperatorExpression)>,
}

pub fn build_tilde_g(alpha: &DualSolution, q: usize) -> Result<ExtendedOperator> {
    let params = params_of(alpha, q)?;
    check_term_budget(alpha)?;
    let blocks = enumerate_matchings(&params)?
        .map(|mu| {
            let terms = sorted_terms(alpha, &mu);
            OperatorExpression::projector_sum(q, params.sites(), &terms).map(|e| (mu, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtendedOperator { u: q.pow(params.sites() as u32), blocks })
}

impl ExtendedOperator {
    pub fn blocks(&self) -> &[(Matching, OperatorExpression)] {
        &self.blocks
    }
}

impl LinearMap for ExtendedOperator {
    fn nrows(&self) -> usize {
        self.u * self.blocks.len()
    }

    fn ncols(&self) -> usize {
        self.u
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.blocks.iter().flat_map(|(_, e)| e.apply(x)).collect()
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.u];
        for (chunk, (_, e)) in y.chunks(self.u).zip(&self.blocks) {
            for (o, v) in out.iter_mut().zip(e.apply_transpose(chunk)) {
                *o += v;
            }
        }
        out
    }
}

fn digit(index: usize, site: usize, q: usize, m: usize) -> usize {
    (index / q.pow((m - 1 - site) as u32)) % q
}

/// `Δ_j ∘ Γ = Γ − Σ_a D_a Γ D_a`, with `D_a` keeping inputs whose coordinate
/// `j` equals `a`; one matvec costs `q + 1` applies of `Γ`.
pub struct DeltaSandwich<'a> {
    op: &'a AdversaryOperator,
    q: usize,
    row_digit: Vec<usize>,
    col_digit: Vec<usize>,
}

impl<'a> DeltaSandwich<'a> {
    pub fn new(op: &'a AdversaryOperator, j: usize) -> Result<Self> {
        let (q, m) = (op.q, op.m);
        if j >= m {
            return Err(Error::InvalidParams(format!("site {j} outside [0, {m})")));
        }
        let row_digit = op.row_inputs().map(|g| digit(g, j, q, m)).collect();
        let col_digit = (0..op.ncols()).map(|k| digit(op.column_input(k), j, q, m)).collect();
        Ok(DeltaSandwich { op, q, row_digit, col_digit })
    }
}

impl LinearMap for DeltaSandwich<'_> {
    fn nrows(&self) -> usize {
        self.row_digit.len()
    }

    fn ncols(&self) -> usize {
        self.col_digit.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.op.apply(x);
        for a in 0..self.q {
            let xa: Vec<f64> = x.iter().zip(&self.col_digit).map(|(&v, &d)| if d == a { v } else { 0.0 }).collect();
            if xa.iter().all(|&v| v == 0.0) {
                continue;
            }
            let ya = self.op.apply(&xa);
            for ((yi, &v), &d) in y.iter_mut().zip(&ya).zip(&self.row_digit) {
                if d == a {
                    *yi -= v;
                }
            }
        }
        y
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut z = self.op.apply_transpose(y);
        for a in 0..self.q {
            let ya: Vec<f64> = y.iter().zip(&self.row_digit).map(|(&v, &d)| if d == a { v } else { 0.0 }).collect();
            if ya.iter().all(|&v| v == 0.0) {
                continue;
            }
            let za = self.op.apply_transpose(&ya);
            for ((zi, &v), &d) in z.iter_mut().zip(&za).zip(&self.col_digit) {
                if d == a {
                    *zi -= v;
                }
            }
        }
        z
    }
}

/// How `Δ_j ∘ Γ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRoute {
    /// Tensor-form masking of the site-`j` factor; needs no right multiplier.
    Factorized,
    /// `Γ − Σ_a D_a Γ D_a`.
    Sandwich,
}

impl DeltaRoute {
    /// The factorized route when available, the sandwich otherwise.
    pub fn for_operator(op: &AdversaryOperator) -> Self {
        if op.right.is_some() {
            DeltaRoute::Sandwich
        } else {
            DeltaRoute::Factorized
        }
    }
}

/// Largest dimension for which [`auto_method`] picks a dense SVD.
pub const AUTO_DENSE_DIMENSION: usize = 1024;

/// Dense SVD for small maps (both dimensions at most [`AUTO_DENSE_DIMENSION`]
/// and the dense budget), power iteration otherwise.
pub fn auto_method(map: &dyn LinearMap, opts: &NormOptions) -> Method {
    if map.nrows().max(map.ncols()) <= opts.dense_budget.min(AUTO_DENSE_DIMENSION) {
        Method::DenseSvd
    } else {
        Method::PowerIteration
    }
}

/// `‖Δ_j ∘ Γ‖`.
pub fn delta_hadamard_norm(
    op: &AdversaryOperator,
    j: usize,
    route: DeltaRoute,
    method: Option<Method>,
    opts: &NormOptions,
) -> Result<NormReport> {
    match route {
        DeltaRoute::Factorized => {
            let d = op.hadamard_delta(j)?;
            spectral_norm(&d, method.unwrap_or_else(|| auto_method(&d, opts)), opts)
        }
        DeltaRoute::Sandwich => {
            let d = DeltaSandwich::new(op, j)?;
            spectral_norm(&d, method.unwrap_or_else(|| auto_method(&d, opts)), opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{alpha_matching, alpha_shift_prime, norm, partial, table};
    use crate::operators::norm::materialize;
    use crate::problems::{negative_indices, Variant, DEFAULT_INPUT_BUDGET};
    use nalgebra::DMatrix;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    fn dense_delta(m: &DMatrix<f64>, op: &AdversaryOperator, j: usize) -> DMatrix<f64> {
        let rows: Vec<usize> = op.row_inputs().collect();
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
            let (x, y) = (rows[r], op.column_input(c));
            if digit(x, j, op.q, op.m) != digit(y, j, op.q, op.m) {
                m[(r, c)]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn single_empty_entry_is_uniform_rank_one() {
        let mu = Matching::shift(1, 0, 0);
        let a = table(1, Variant::Shift, 0, [(mu, SiteSet::empty(), 1.0)]).unwrap();
        let g = build_g(&a, 3).unwrap();
        let d = materialize(&g, 4096).unwrap();
        let v = 3f64.powf(-2.5);
        assert!(d.iter().all(|&x| (x - v).abs() < 1e-12));
        let s = spectral_norm(&g, Method::DenseSvd, &NormOptions::default()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_columns_n1_q3() {
        let a = alpha_shift_prime(1);
        let p = ProblemParams::new(1, 3, Variant::Shift).unwrap();
        let n = negative_indices(&p, DEFAULT_INPUT_BUDGET).unwrap();
        let g = build_g(&a, 3).unwrap().restrict_columns(n).unwrap();
        assert_eq!(g.ncols(), 18);
        let empty = build_g(&a, 3).unwrap().restrict_columns(Vec::new()).unwrap();
        assert_eq!(spectral_norm(&empty, Method::PowerIteration, &NormOptions::default()).unwrap().value, 0.0);
        let all = build_g(&a, 3).unwrap().restrict_columns((0..27).collect()).unwrap();
        let x: Vec<f64> = (0..27).map(|i| (i as f64).sin()).collect();
        assert_eq!(all.apply(&x), build_g(&a, 3).unwrap().apply(&x));
    }

    #[test]
    fn tilde_g_norm_is_alpha_norm() {
        for (n, q) in [(1, 3), (1, 5), (2, 3)] {
            for a in [alpha_matching(n, Variant::Matching), alpha_shift_prime(n), alpha_matching(n, Variant::Shift)] {
                for alpha in [a.clone(), partial(&a, 0).unwrap()] {
                    let t = build_tilde_g(&alpha, q).unwrap();
                    let opts = NormOptions { tol: 1e-13, ..Default::default() };
                    let s = spectral_norm(&t, auto_method(&t, &opts), &opts).unwrap();
                    assert!((s.value - norm(&alpha).unwrap()).abs() < 1e-9, "n={n} q={q}");
                }
            }
        }
    }

    #[test]
    fn g_is_psi_times_tilde_g() {
        // G^μ(α) = √q^n · G̃^μ(α)[P^μ, U]
        let a = alpha_matching(1, Variant::Matching);
        let g = materialize(&build_g(&a, 3).unwrap(), 4096).unwrap();
        let t = build_tilde_g(&a, 3).unwrap();
        let td = t.blocks()[0].1.clone().restrict_to_matching(&t.blocks()[0].0).unwrap().to_dense(4096).unwrap();
        assert!(max_abs(&(g - td)) < 1e-12);
    }

    #[test]
    fn shared_expressions_match_per_block_build() {
        let a = alpha_shift_prime(2);
        let g = build_g(&a, 3).unwrap();
        assert_eq!(g.distinct_expressions(), 1);
        assert_eq!(g.block_count(), 4);
        let d = materialize(&g, 1000).unwrap();
        let mut off = 0;
        for mu in g.matchings() {
            let e = OperatorExpression::projector_sum(3, 6, &a.terms(mu))
                .unwrap()
                .restrict_to_matching(mu)
                .unwrap()
                .to_dense(1000)
                .unwrap();
            assert!(max_abs(&(d.rows(off, e.nrows()) - &e)) < 1e-12);
            off += e.nrows();
        }
    }

    #[test]
    fn delta_routes_match_dense_hadamard() {
        for (a, q) in [(alpha_shift_prime(1), 3), (alpha_matching(1, Variant::Matching), 5)] {
            let p = ProblemParams::new(1, q as u32, a.variant()).unwrap();
            let g =
                build_g(&a, q).unwrap().restrict_columns(negative_indices(&p, DEFAULT_INPUT_BUDGET).unwrap()).unwrap();
            let d = materialize(&g, 4096).unwrap();
            for j in 0..3 {
                let want = dense_delta(&d, &g, j);
                let fact = materialize(&g.hadamard_delta(j).unwrap(), 4096).unwrap();
                let sand = materialize(&DeltaSandwich::new(&g, j).unwrap(), 4096).unwrap();
                assert!(max_abs(&(&fact - &want)) < 1e-12);
                assert!(max_abs(&(&sand - &want)) < 1e-12);
                // G(α) and its rewrite agree on the Δ_j pattern
                let rw = materialize(&g.delta_rewrite(j).unwrap(), 4096).unwrap();
                assert!(max_abs(&(dense_delta(&rw, &g, j) - &want)) < 1e-12);
            }
        }
    }

    #[test]
    fn rewrite_is_g_of_partial() {
        let a = alpha_shift_prime(2);
        for j in [0, 3, 5] {
            let rw = materialize(&build_g(&a, 3).unwrap().delta_rewrite(j).unwrap(), 1000).unwrap();
            let gp = materialize(&build_g(&partial(&a, j).unwrap(), 3).unwrap(), 1000).unwrap();
            assert!(max_abs(&(rw - gp)) < 1e-12);
        }
    }

    #[test]
    fn all_ones_delta_norm() {
        // one site, q = m: Γ = J, Δ∘Γ = J − I
        let m = 4;
        let ones = DMatrix::from_element(m, m, 1.0);
        let d = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { ones[(i, j)] });
        let s = spectral_norm(&d, Method::DenseSvd, &NormOptions::default()).unwrap();
        assert!((s.value - (m as f64 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn sandwich_respects_right_multiplier() {
        use crate::symmetry::build_v_w;
        let a = alpha_matching(1, Variant::Matching);
        let vw = build_v_w(1, 1, 3).unwrap();
        let p = ProblemParams::new(1, 3, Variant::Matching).unwrap();
        let g = build_g(&a, 3)
            .unwrap()
            .with_right(vw.v.clone())
            .unwrap()
            .restrict_columns(negative_indices(&p, DEFAULT_INPUT_BUDGET).unwrap())
            .unwrap();
        assert!(g.hadamard_delta(0).is_err());
        let d = materialize(&g, 4096).unwrap();
        for j in 0..3 {
            let sand = materialize(&DeltaSandwich::new(&g, j).unwrap(), 4096).unwrap();
            assert!(max_abs(&(sand - dense_delta(&d, &g, j))) < 1e-12);
        }
    }

    #[test]
    fn transpose_is_adjoint() {
        use crate::symmetry::build_v_w;
        let a = alpha_matching(2, Variant::Matching);
        let p = ProblemParams::new(2, 3, Variant::Matching).unwrap();
        let vw = build_v_w(1, 2, 3).unwrap();
        let g = build_g(&a, 3)
            .unwrap()
            .with_right(vw.v)
            .unwrap()
            .restrict_columns(negative_indices(&p, DEFAULT_INPUT_BUDGET).unwrap())
            .unwrap()
            .scaled(0.7);
        let x: Vec<f64> = (0..g.ncols()).map(|i| ((i * 7) as f64).cos()).collect();
        let y: Vec<f64> = (0..g.nrows()).map(|i| ((i * 3) as f64).sin()).collect();
        let lhs: f64 = g.apply(&x).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = g.apply_transpose(&y).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
        let s = DeltaSandwich::new(&g, 2).unwrap();
        let lhs: f64 = s.apply(&x).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = s.apply_transpose(&y).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }
}
