//! Overlap statistics `L(μ, R_B, R_C)` and the Λ bound.

use serde::{Deserialize, Serialize};

use crate::certificates::{DualSolution, Structure};
use crate::error::{Error, Result};
use crate::problems::{enumerate_matchings, random_matching, Matching, ProblemParams, Variant};
use crate::rng;
use crate::sets::{count_subsets_up_to, for_each_subset_up_to, SiteSet};

/// Windows `R_B = [n, n + 2k_B)` and `R_C = [2n, 2n + 2k_C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapConfig {
    pub n: usize,
    pub k_b: usize,
    pub k_c: usize,
}

impl OverlapConfig {
    pub fn new(n: usize, k_b: usize, k_c: usize) -> Result<Self> {
        if 2 * k_b > n || 2 * k_c > n {
            return Err(Error::InvalidParams(format!("windows 2·{k_b}, 2·{k_c} exceed n = {n}")));
        }
        Ok(OverlapConfig { n, k_b, k_c })
    }

    pub fn r_b(&self) -> std::ops::Range<usize> {
        self.n..self.n + 2 * self.k_b
    }

    pub fn r_c(&self) -> std::ops::Range<usize> {
        2 * self.n..2 * self.n + 2 * self.k_c
    }

    /// `A ∪ R_B ∪ R_C`.
    pub fn ground(&self) -> Vec<usize> {
        (0..self.n).chain(self.r_b()).chain(self.r_c()).collect()
    }
}

/// Number of triples of `mu` meeting both `R_B` and `R_C`.
pub fn overlap_l(mu: &Matching, cfg: &OverlapConfig) -> usize {
    let (rb, rc) = (cfg.r_b(), cfg.r_c());
    mu.triples().iter().filter(|t| rb.contains(&t.b) && rc.contains(&t.c)).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub ell: usize,
    pub count: u64,
    pub empirical: f64,
    pub sigma: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub n: usize,
    pub r_b: usize,
    pub r_c: usize,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<TailRow>,
    /// Empirical `E[3^L]` and its standard error.
    pub mean_three_pow_l: f64,
    pub mean_std_error: f64,
    /// `e^{24}`.
    pub moment_bound: f64,
    pub pass: bool,
}

/// Monte Carlo distribution of `L` over uniform matchings against `8^ℓ/ℓ!`.
pub fn tail_check(n: usize, k_b: usize, k_c: usize, samples: u64, max_ell: usize, seed: u64) -> Result<TailReport> {
    let cfg = OverlapConfig::new(n, k_b, k_c)?;
    if samples == 0 {
        return Err(Error::Statistical("tail check needs at least one sample".into()));
    }
    let params = ProblemParams::new(n, 2, Variant::Matching)?;
    let mut r = rng::stream(seed, 0);
    let mut counts = vec![0u64; cfg.n + 1];
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let l = overlap_l(&random_matching(&params, &mut r), &cfg);
        counts[l] += 1;
        let v = 3f64.powi(l as i32);
        s1 += v;
        s2 += v * v;
    }
    let ns = samples as f64;
    let mean = s1 / ns;
    let var = (s2 / ns - mean * mean).max(0.0);
    let rows: Vec<TailRow> = (0..=max_ell)
        .map(|ell| {
            let count = counts.get(ell).copied().unwrap_or(0);
            let p = count as f64 / ns;
            let sigma = (p * (1.0 - p) / ns).sqrt();
            let bound = 8f64.powi(ell as i32) / (1..=ell).map(|k| k as f64).product::<f64>();
            TailRow { ell, count, empirical: p, sigma, bound, pass: p <= bound + 3.0 * sigma }
        })
        .collect();
    let moment_bound = 24f64.exp();
    let pass = rows.iter().all(|r| r.pass) && mean <= moment_bound;
    Ok(TailReport {
        n,
        r_b: 2 * k_b,
        r_c: 2 * k_c,
        samples,
        seed,
        rows,
        mean_three_pow_l: mean,
        mean_std_error: (var / ns).sqrt(),
        moment_bound,
        pass,
    })
}

/// `max_{S ⊆ ground} (√|M| α(μ, S))²`.
///
/// Profile solutions with at most one derivative are handled in closed form:
/// the profile is non-increasing and its steps are at most its first step, so
/// only `S = ∅` and the smallest sets completing a certificate with `j` can
/// attain the maximum. Everything else is enumerated.
pub fn max_normalized_sq(alpha: &DualSolution, mu: &Matching, ground: &[usize]) -> Result<f64> {
    if let (Some((threshold, scale, structure)), true) = (alpha.profile(), alpha.partials().len() <= 1) {
        let sqrt_m = ProblemParams { n: alpha.n(), q: 2, variant: alpha.variant() }.sqrt_family_size();
        let c = alpha.factor() * scale * sqrt_m;
        let f = |s: usize| c * (threshold - s as f64).max(0.0);
        let best = match alpha.partials() {
            [] => f(0).powi(2),
            [j] => {
                let partners: Vec<usize> = mu.triple_of(*j).sites().into_iter().filter(|x| x != j).collect();
                let inside = partners.iter().filter(|p| ground.contains(p)).count();
                let completion = match structure {
                    Structure::Cs | Structure::Cm if inside == 2 => f(2).powi(2),
                    Structure::CsPrime if inside >= 1 => f(1).powi(2),
                    _ => 0.0,
                };
                (f(0) - f(1)).powi(2).max(completion)
            }
            _ => unreachable!(),
        };
        return Ok(best);
    }
    max_normalized_sq_exhaustive(alpha, mu, ground)
}

/// [`max_normalized_sq`] by enumerating every `S ⊆ ground` up to the support bound.
pub fn max_normalized_sq_exhaustive(alpha: &DualSolution, mu: &Matching, ground: &[usize]) -> Result<f64> {
    let work = count_subsets_up_to(ground.len(), alpha.support_bound());
    if work > 50_000_000 {
        return Err(Error::Size { what: "subset scan for Λ", requested: work, limit: 50_000_000 });
    }
    let mut best: f64 = 0.0;
    for_each_subset_up_to(ground, alpha.support_bound(), |s: &SiteSet| {
        best = best.max(alpha.normalized_value(mu, s).powi(2));
    });
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LambdaMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub k_b: usize,
    pub k_c: usize,
    pub value: f64,
    pub std_error: Option<f64>,
    pub mode: LambdaMode,
}

/// `Λ_{k_B,k_C}(α) = √(Σ_μ 3^{L(μ,R_B,R_C)} max_{S ⊆ A∪R_B∪R_C} α(μ,S)²)`.
pub fn lambda_bound(alpha: &DualSolution, k_b: usize, k_c: usize, mode: LambdaMode) -> Result<LambdaReport> {
    if alpha.variant() != Variant::Matching {
        return Err(Error::UnsupportedVariant("the Λ bound is stated for the matching family".into()));
    }
    let cfg = OverlapConfig::new(alpha.n(), k_b, k_c)?;
    let ground = cfg.ground();
    let params = ProblemParams { n: alpha.n(), q: 2, variant: Variant::Matching };
    match mode {
        LambdaMode::Exact => {
            let total: f64 = enumerate_matchings(&params)?
                .map(|mu| {
                    max_normalized_sq_exhaustive(alpha, &mu, &ground)
                        .map(|m| 3f64.powi(overlap_l(&mu, &cfg) as i32) * m)
                })
                .sum::<Result<f64>>()?;
            // Σ_μ α² = (1/|M|) Σ_μ (√|M| α)²
            let value = (total / params.sqrt_family_size().powi(2)).sqrt();
            Ok(LambdaReport { k_b, k_c, value, std_error: None, mode })
        }
        LambdaMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::Statistical("Monte Carlo Λ needs at least two samples".into()));
            }
            let mut r = rng::stream(seed, 1);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..samples {
                let mu = random_matching(&params, &mut r);
                let v = 3f64.powi(overlap_l(&mu, &cfg) as i32) * max_normalized_sq(alpha, &mu, &ground)?;
                s1 += v;
                s2 += v * v;
            }
            let ns = samples as f64;
            let mean = s1 / ns;
            let se_mean = ((s2 / ns - mean * mean).max(0.0) / (ns - 1.0)).sqrt();
            let value = mean.sqrt();
            let std_error = if value > 0.0 { se_mean / (2.0 * value) } else { 0.0 };
            Ok(LambdaReport { k_b, k_c, value, std_error: Some(std_error), mode })
        }
    }
}
