//! Certified lower bounds `‖Γ‖ / max_j ‖Δ_j ∘ Γ‖` for both constructions.

use serde::{Deserialize, Serialize};

use super::{auto_method, build_g, delta_hadamard_norm, gv_delta_residual, DeltaRoute, GvDeltaReport};
use crate::certificates::{alpha_matching, alpha_shift_prime, norm, objective, partial, DualSolution};
use crate::error::{Error, Result};
use crate::operators::{spectral_norm, LinearMap, Method, NormOptions, NormReport, OperatorExpression, DENSE_BUDGET};
use crate::problems::{
    enumerate_matchings, negative_density_bound, negative_indices, Matching, ProblemParams, Variant,
    DEFAULT_INPUT_BUDGET,
};
use crate::sets::SiteSet;
use crate::symmetry::{build_v_w, lambda_bound, uniform_fixed_defect, LambdaMode, LambdaReport, VwProjectors};

pub const CSV_HEADER: &str = "n,q,variant,gamma_norm,max_delta_norm,certified_value,analytic_bound,negatives,seed";

/// Largest tolerated `max |Vᵀu − u|` for the hypothesis `Π_∅ V = Π_∅`.
const FIXED_DEFECT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_iterations: usize,
    pub dense_budget: usize,
    /// Forced norm method; by default dense below the budget, power iteration above.
    pub method: Option<Method>,
    /// Row cap for the entrywise GV-Δ check (`None` checks every row).
    pub gv_delta_rows: Option<usize>,
    pub input_budget: u128,
    /// Run the per-site side checks (chain and rewrite bounds).
    pub side_checks: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            tol: 1e-8,
            seed: 0,
            max_iterations: 10_000,
            dense_budget: DENSE_BUDGET,
            method: None,
            gv_delta_rows: Some(4096),
            input_budget: DEFAULT_INPUT_BUDGET,
            side_checks: true,
        }
    }
}

impl CertifyOptions {
    pub fn norm_options(&self) -> NormOptions {
        NormOptions {
            tol: self.tol,
            max_iterations: self.max_iterations,
            seed: self.seed,
            dense_budget: self.dense_budget,
        }
    }

    fn norm(&self, map: &dyn LinearMap) -> Result<NormReport> {
        let o = self.norm_options();
        spectral_norm(map, self.method.unwrap_or_else(|| auto_method(map, &o)), &o)
    }
}

/// Which right projector multiplies `G(α)` before the column restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Construction {
    Plain,
    /// `V` built with the given cutoff.
    Symmetrized {
        cutoff: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub site: usize,
    /// `‖G(∂_jα)‖` over all columns.
    pub g_partial_norm: f64,
    /// `‖G̃(∂_jα)‖ = ‖∂_jα‖`.
    pub alpha_partial_norm: f64,
    /// `‖Γ′_j‖`, the rewrite restricted to negative columns.
    pub rewrite_norm: f64,
    /// `‖G(∂_jα)‖ ≤ ‖Ψ′‖·‖∂_jα‖` and `‖Δ_j∘Γ‖ ≤ 2‖Γ′_j‖`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftChecks {
    /// `max_μ ‖Ψ′^μ‖`.
    pub psi_prime_norm: NormReport,
    pub chain: Vec<ChainEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingChecks {
    pub v_cutoff: usize,
    /// `max |Vᵀu − u|` for the uniform unit vector `u`.
    pub fixed_defect: f64,
    pub gv_delta: GvDeltaReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub variant: Variant,
    pub n: usize,
    pub q: usize,
    pub alpha: DualSolution,
    pub construction: Construction,
    pub gamma_norm: NormReport,
    pub delta_route: DeltaRoute,
    pub delta_norms: Vec<NormReport>,
    pub max_delta_norm: f64,
    pub certified_value: f64,
    pub analytic_bound: f64,
    pub negative_count: u128,
    pub universe_size: u128,
    /// `q ≥ 2n³`.
    pub hypothesis_holds: bool,
    pub warnings: Vec<String>,
    pub seed: u64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_checks: Option<ShiftChecks>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching_checks: Option<MatchingChecks>,
}

impl BoundCertificate {
    /// The type invariants and any recorded side checks.
    pub fn pass(&self) -> bool {
        let tol = 1e-6 * self.gamma_norm.value.max(1.0);
        self.certified_value >= 0.0
            && self.analytic_bound <= self.gamma_norm.value + tol
            && self.shift_checks.as_ref().is_none_or(|s| s.pass)
            && self.matching_checks.as_ref().is_none_or(|m| m.pass)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
            self.n,
            self.q,
            self.variant,
            self.gamma_norm.value,
            self.max_delta_norm,
            self.certified_value,
            self.analytic_bound,
            self.negative_count,
            self.seed
        )
    }
}

/// `√(|N|/|U| · Σ_μ α(μ,∅)²)`, with `|N|` by enumeration when within
/// `input_budget` and the density bound `1 − n³/q` otherwise.
///
/// When `v` is given, `Π_∅ V = Π_∅` is checked first.
pub fn analytic_gamma_bound(
    alpha: &DualSolution,
    q: usize,
    v: Option<&dyn LinearMap>,
    input_budget: u128,
) -> Result<f64> {
    let params = ProblemParams::new(alpha.n(), q as u32, alpha.variant())?;
    let density = match negative_indices(&params, input_budget) {
        Ok(neg) => neg.len() as f64 / params.universe_size().expect("enumerated") as f64,
        Err(Error::Size { .. }) => {
            let b = negative_density_bound(&params);
            *b.numer() as f64 / *b.denom() as f64
        }
        Err(e) => return Err(e),
    };
    analytic_from_density(alpha, density, v)
}

fn analytic_from_density(alpha: &DualSolution, density: f64, v: Option<&dyn LinearMap>) -> Result<f64> {
    if let Some(v) = v {
        let d = uniform_fixed_defect(v);
        if d > FIXED_DEFECT_TOL {
            return Err(Error::Precondition(format!("Π_∅ V ≠ Π_∅ (defect {d:.3e})")));
        }
    }
    Ok(density.max(0.0).sqrt() * objective(alpha)?)
}

/// `‖Ψ′^μ‖` for `Ψ′^μ = Σ_{S: |S∩T| ≤ 1 ∀T∈μ} Ψ^μ_S`.
pub fn psi_prime_norm(mu: &Matching, q: usize, opts: &NormOptions) -> Result<NormReport> {
    let mut sets = vec![SiteSet::empty()];
    for t in mu.triples() {
        sets = sets
            .into_iter()
            .flat_map(|s| {
                let mut v = vec![s.clone()];
                v.extend(t.sites().iter().map(|&x| s.with(x)));
                v
            })
            .collect();
    }
    let weighted: Vec<(SiteSet, f64)> = sets.into_iter().map(|s| (s, 1.0)).collect();
    let e = OperatorExpression::projector_sum(q, 3 * mu.n(), &weighted)?.restrict_to_matching(mu)?;
    spectral_norm(&e, auto_method(&e, opts), opts)
}

/// The certificate for `Γ = [G(α)·V][P, N]` (no `V` for [`Construction::Plain`]).
pub fn certify(
    alpha: &DualSolution,
    q: usize,
    construction: Construction,
    opts: &CertifyOptions,
) -> Result<BoundCertificate> {
    let n = alpha.n();
    let params = ProblemParams::new(n, q as u32, alpha.variant())?;
    let negatives = negative_indices(&params, opts.input_budget)?;
    let universe = params.universe_size().expect("enumerated");
    let negative_count = negatives.len() as u128;
    let mut op = build_g(alpha, q)?;
    let vw = match construction {
        Construction::Plain => None,
        Construction::Symmetrized { cutoff } => {
            let vw = build_v_w(cutoff, n, q)?;
            op = op.with_right(vw.v.clone())?;
            Some(vw)
        }
    };
    let op = op.restrict_columns(negatives)?;
    let gamma = opts.norm(&op)?;
    let route = DeltaRoute::for_operator(&op);
    let delta_norms = (0..3 * n)
        .map(|j| delta_hadamard_norm(&op, j, route, opts.method, &opts.norm_options()))
        .collect::<Result<Vec<_>>>()?;
    let max_delta = delta_norms.iter().map(|r| r.value).fold(0.0, f64::max);
    let density = negative_count as f64 / universe as f64;
    let analytic = analytic_from_density(alpha, density, vw.as_ref().map(|v| &v.v as &dyn LinearMap))?;
    let mut warnings = Vec::new();
    if !params.hypothesis_holds() {
        warnings.push(format!("q = {q} is below 2n³ = {}", 2 * n.pow(3)));
    }
    Ok(BoundCertificate {
        variant: alpha.variant(),
        n,
        q,
        alpha: alpha.clone(),
        construction,
        gamma_norm: gamma.clone(),
        delta_route: route,
        max_delta_norm: max_delta,
        certified_value: if max_delta > 0.0 { gamma.value / max_delta } else { 0.0 },
        delta_norms,
        analytic_bound: analytic,
        negative_count,
        universe_size: universe,
        hypothesis_holds: params.hypothesis_holds(),
        warnings,
        seed: opts.seed,
        tol: opts.tol,
        elapsed_seconds: None,
        shift_checks: None,
        matching_checks: None,
    })
}

/// Certificate for the 3-shift-sum construction `Γ = G(α′_s)[P, N]`.
pub fn certify_3shift(n: usize, q: usize, opts: &CertifyOptions) -> Result<BoundCertificate> {
    let alpha = alpha_shift_prime(n);
    let mut cert = certify(&alpha, q, Construction::Plain, opts)?;
    if opts.side_checks {
        cert.shift_checks = Some(shift_checks(&alpha, q, &cert, opts)?);
    }
    Ok(cert)
}

fn shift_checks(alpha: &DualSolution, q: usize, cert: &BoundCertificate, opts: &CertifyOptions) -> Result<ShiftChecks> {
    let params = ProblemParams::new(alpha.n(), q as u32, Variant::Shift)?;
    let no = opts.norm_options();
    let mut psi: Option<NormReport> = None;
    for mu in enumerate_matchings(&params)? {
        let r = psi_prime_norm(&mu, q, &no)?;
        if psi.as_ref().is_none_or(|p| r.value > p.value) {
            psi = Some(r);
        }
    }
    let psi = psi.expect("nonempty family");
    let negatives = negative_indices(&params, opts.input_budget)?;
    let slack = |x: f64| x + 1e-6 * x.max(1.0);
    let mut chain = Vec::new();
    for j in 0..3 * alpha.n() {
        let d = partial(alpha, j)?;
        let g = build_g(&d, q)?;
        let g_partial = opts.norm(&g)?.value;
        let rewrite = opts.norm(&g.restrict_columns(negatives.clone())?)?.value;
        let alpha_partial = norm(&d)?;
        let holds = g_partial <= slack(psi.value * alpha_partial) && cert.delta_norms[j].value <= slack(2.0 * rewrite);
        chain.push(ChainEntry {
            site: j,
            g_partial_norm: g_partial,
            alpha_partial_norm: alpha_partial,
            rewrite_norm: rewrite,
            holds,
        });
    }
    let pass = (psi.value - 1.0).abs() <= 1e-9 && chain.iter().all(|c| c.holds);
    Ok(ShiftChecks { psi_prime_norm: psi, chain, pass })
}

/// `K = ⌊√n⌋`.
pub fn matching_cutoff(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    while k * k > n {
        k -= 1;
    }
    k
}

/// Certificate for the 3-matching-sum construction `Γ = [G(α_mm)V][P, N]`.
pub fn certify_3matching(n: usize, q: usize, opts: &CertifyOptions) -> Result<BoundCertificate> {
    let alpha = alpha_matching(n, Variant::Matching);
    let cutoff = matching_cutoff(n);
    let mut cert = certify(&alpha, q, Construction::Symmetrized { cutoff }, opts)?;
    let vw = build_v_w(cutoff, n, q)?;
    let fixed_defect = uniform_fixed_defect(&vw.v);
    let gv = gv_delta_residual(&alpha, q, &vw, opts.gv_delta_rows, opts.seed)?;
    let pass = fixed_defect <= FIXED_DEFECT_TOL && gv.residual <= 1e-10;
    cert.matching_checks = Some(MatchingChecks { v_cutoff: cutoff, fixed_defect, gv_delta: gv, pass });
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaInequality {
    pub cutoff: usize,
    /// `‖G(α)W‖`.
    pub gw_norm: NormReport,
    pub lambdas: Vec<LambdaReport>,
    pub max_lambda: f64,
    pub holds: bool,
}

/// `‖G(α)W‖ ≤ max_{k_B,k_C} Λ_{k_B,k_C}(α)` with exact Λ values.
///
/// `k_B, k_C` range over `0..=min(K, ⌊n/2⌋)`: larger windows do not fit in a group.
pub fn lambda_inequality(
    alpha: &DualSolution,
    q: usize,
    cutoff: usize,
    opts: &NormOptions,
) -> Result<LambdaInequality> {
    let n = alpha.n();
    let vw: VwProjectors = build_v_w(cutoff, n, q)?;
    let gw = build_g(alpha, q)?.with_right(vw.w)?;
    let gw_norm = spectral_norm(&gw, auto_method(&gw, opts), opts)?;
    let top = cutoff.min(n / 2);
    let mut lambdas = Vec::new();
    for kb in 0..=top {
        for kc in 0..=top {
            lambdas.push(lambda_bound(alpha, kb, kc, LambdaMode::Exact)?);
        }
    }
    let max_lambda = lambdas.iter().map(|l| l.value).fold(0.0, f64::max);
    let holds = gw_norm.value <= max_lambda * (1.0 + 1e-9) + 1e-9;
    Ok(LambdaInequality { cutoff, gw_norm, lambdas, max_lambda, holds })
}
