//! Classical query experiments: the random-subset algorithm, the coverage
//! and marginal statistics behind the randomised lower bound, and the
//! density of inputs far from every shifted xor.
//!
//! Trial `i` of grid point `g` draws from `rng::stream(seed, g << 32 | i)`,
//! so every statistic is a deterministic function of the seed.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::problems::{min_shift_xor_distance, random_permutation, InputString, ProblemParams, Variant};
use crate::rng::{self, ChaCha8Rng};

/// Default modulus for the sampling experiments, the prime `2³¹ − 1`.
pub const DEFAULT_Q: u64 = 2_147_483_647;
pub const SUCCESS_TARGET: f64 = 2.0 / 3.0;
pub const MIN_GRID_N: usize = 100;
/// Fewer trials than this per grid point cannot locate a 2/3 quantile.
pub const MIN_FIT_TRIALS: usize = 10;
pub const DEFAULT_MULTIPLIERS: [f64; 3] = [1.0, 2.0, 4.0];
pub const MARGINAL_BINS: usize = 16;
pub const FAR_THRESHOLD: (usize, usize) = (3, 7);

fn trial_rng(seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    rng::stream(seed, (point as u64) << 32 | trial as u64)
}

// ---------------------------------------------------------------- upper bound

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRate {
    pub multiplier: f64,
    /// Queries per row group.
    pub queries: usize,
    pub rate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperPoint {
    pub n: usize,
    pub trials: usize,
    /// Least per-group subset size at which at least 2/3 of the trials succeed.
    pub queries_two_thirds: usize,
    pub total_queries_two_thirds: usize,
    pub mean_threshold: f64,
    pub success: Vec<SuccessRate>,
    /// Success rate with `round(n^{1/3})` queries per group.
    pub cube_root_queries: usize,
    pub cube_root_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperReport {
    pub variant: Variant,
    pub trials: usize,
    pub seed: u64,
    pub points: Vec<UpperPoint>,
    /// Least-squares slope of `ln queries_two_thirds` against `ln n`.
    pub fitted_exponent: f64,
    pub fit_intercept: f64,
}

fn rate(hits: usize, trials: usize) -> (f64, f64) {
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Subset size per group at which the random-subset algorithm first queries
/// a whole triple of `μ`, whose values then witness a zero sum.
///
/// The subsets are prefixes of uniformly random orders of `A`, `B` and `C`,
/// so a trial with threshold `τ` succeeds exactly for subset sizes `t ≥ τ`.
/// Zero sums across different triples are not credited.
fn success_threshold(variant: Variant, n: usize, rng: &mut ChaCha8Rng) -> usize {
    let (b, c) = (rng.gen_range(0..n), rng.gen_range(0..n));
    let (pb, pc) = match variant {
        Variant::Shift => (Vec::new(), Vec::new()),
        Variant::Matching => (random_permutation(n, rng), random_permutation(n, rng)),
    };
    let partner = |a: usize| match variant {
        Variant::Shift => ((a + b) % n, (a + c) % n),
        Variant::Matching => (pb[a], pc[a]),
    };
    let ra = random_permutation(n, rng);
    let rb = random_permutation(n, rng);
    let rc = random_permutation(n, rng);
    (0..n)
        .map(|a| {
            let (pb, pc) = partner(a);
            ra[a].max(rb[pb]).max(rc[pc]) + 1
        })
        .min()
        .expect("n ≥ 1")
}

/// Runs the random-subset algorithm on `trials` positive inputs per grid
/// point and fits the growth of the query count reaching 2/3 success.
pub fn randomized_upper(
    variant: Variant,
    grid: &[usize],
    trials: usize,
    multipliers: &[f64],
    seed: u64,
) -> Result<UpperReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("the n grid is empty".into()));
    }
    if let Some(&n) = grid.iter().find(|&&n| n < MIN_GRID_N) {
        return Err(Error::InvalidParams(format!("grid value {n} is below {MIN_GRID_N}")));
    }
    let distinct: std::collections::BTreeSet<_> = grid.iter().collect();
    if trials < MIN_FIT_TRIALS || distinct.len() < 2 {
        return Err(Error::Statistical(format!(
            "a fit needs at least {MIN_FIT_TRIALS} trials and two distinct n, got {trials} trials over {} values",
            distinct.len()
        )));
    }
    let need = (SUCCESS_TARGET * trials as f64).ceil() as usize;
    let mut points = Vec::with_capacity(grid.len());
    for (g, &n) in grid.iter().enumerate() {
        let mut taus: Vec<usize> =
            (0..trials).map(|i| success_threshold(variant, n, &mut trial_rng(seed, g, i))).collect();
        taus.sort_unstable();
        let hits = |t: usize| taus.partition_point(|&tau| tau <= t);
        let two_thirds = taus[need - 1];
        let scale = (n as f64).powf(2.0 / 3.0);
        let success = multipliers
            .iter()
            .map(|&c| {
                let queries = ((c * scale).round() as usize).min(n);
                let (rate, std_error) = rate(hits(queries), trials);
                SuccessRate { multiplier: c, queries, rate, std_error }
            })
            .collect();
        let cube = ((n as f64).cbrt().round() as usize).max(1);
        points.push(UpperPoint {
            n,
            trials,
            queries_two_thirds: two_thirds,
            total_queries_two_thirds: 3 * two_thirds,
            mean_threshold: taus.iter().sum::<usize>() as f64 / trials as f64,
            success,
            cube_root_queries: cube,
            cube_root_rate: hits(cube) as f64 / trials as f64,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.queries_two_thirds as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(UpperReport { variant, trials, seed, points, fitted_exponent: slope, fit_intercept: intercept })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

// ---------------------------------------------------------------- distinguishing

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalTest {
    pub bins: usize,
    /// Trials kept after discarding those whose query set covers a triple.
    pub conditioned_trials: usize,
    pub value_observations: u64,
    pub pair_observations: u64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Total-variation distance between the binned `P` and `U` histograms.
    pub tv_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguishReport {
    pub variant: Variant,
    pub n: usize,
    pub q: u64,
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
    pub covered_trials: usize,
    pub coverage_rate: f64,
    pub coverage_std_error: f64,
    /// Exact expected number of covered triples, an upper bound on the rate.
    pub expected_covered_triples: f64,
    /// The reference scale `t³/n²`.
    pub reference: f64,
    /// `coverage_rate ≤ 2·reference + 3σ`.
    pub within_reference: bool,
    pub marginal: MarginalTest,
}

/// Expected number of triples of a matching inside a uniform `t`-subset of `[3n]`.
pub fn expected_covered_triples(n: usize, t: usize) -> f64 {
    if t < 3 {
        return 0.0;
    }
    let m = 3.0 * n as f64;
    let t = t as f64;
    n as f64 * t * (t - 1.0) * (t - 2.0) / (m * (m - 1.0) * (m - 2.0))
}

fn bin(v: u64, q: u64) -> usize {
    (v as u128 * MARGINAL_BINS as u128 / q as u128) as usize
}

/// Coverage of a random matching by a random `t`-subset of `[3n]`, and the
/// binned marginals of the `P` and `U` distributions on uncovered subsets.
///
/// Only the partners of queried row-A sites are drawn; the images of a fixed
/// set under a uniform permutation form a uniform injection.
pub fn distinguish(
    variant: Variant,
    n: usize,
    q: u64,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<DistinguishReport> {
    if n == 0 || !(2..=u64::MAX / 2).contains(&q) {
        return Err(Error::InvalidParams(format!("need n ≥ 1 and 2 ≤ q, got n = {n}, q = {q}")));
    }
    if t > 3 * n {
        return Err(Error::InvalidParams(format!("t = {t} exceeds the {} sites", 3 * n)));
    }
    if trials == 0 {
        return Err(Error::Statistical("no trials requested".into()));
    }
    let mut covered = 0usize;
    let mut kept = 0usize;
    let mut p_hist = [[0u64; MARGINAL_BINS]; 2];
    let mut u_hist = [[0u64; MARGINAL_BINS]; 2];
    let mut in_s = vec![false; 3 * n];
    let mut value = vec![0u64; 3 * n];
    let mut uniform = vec![0u64; 3 * n];
    for i in 0..trials {
        let mut rng = trial_rng(seed, 0, i);
        let s = sample(&mut rng, 3 * n, t).into_vec();
        s.iter().for_each(|&x| in_s[x] = true);
        let queried_a: Vec<usize> = s.iter().copied().filter(|&x| x < n).collect();
        let partners: Vec<(usize, usize)> = match variant {
            Variant::Shift => {
                let (b, c) = (rng.gen_range(0..n), rng.gen_range(0..n));
                queried_a.iter().map(|&a| ((a + b) % n, (a + c) % n)).collect()
            }
            Variant::Matching => {
                let k = queried_a.len();
                let ib = sample(&mut rng, n, k).into_vec();
                let ic = sample(&mut rng, n, k).into_vec();
                ib.into_iter().zip(ic).collect()
            }
        };
        let sites = |(b, c): (usize, usize)| (n + b, 2 * n + c);
        let hit = partners.iter().any(|&p| {
            let (b, c) = sites(p);
            in_s[b] && in_s[c]
        });
        if hit {
            covered += 1;
        } else {
            kept += 1;
            // P: rows B and C uniform, row A forced by its triple
            for &x in s.iter().filter(|&&x| x >= n) {
                value[x] = rng.gen_range(0..q);
            }
            for (&a, &p) in queried_a.iter().zip(&partners) {
                let (b, c) = sites(p);
                let vb = if in_s[b] { value[b] } else { rng.gen_range(0..q) };
                let vc = if in_s[c] { value[c] } else { rng.gen_range(0..q) };
                value[a] = (2 * q - vb - vc) % q;
            }
            for &x in &s {
                uniform[x] = rng.gen_range(0..q);
                p_hist[0][bin(value[x], q)] += 1;
                u_hist[0][bin(uniform[x], q)] += 1;
            }
            // sums of queried pairs that share a triple
            for (&a, &p) in queried_a.iter().zip(&partners) {
                let (b, c) = sites(p);
                for partner in [b, c] {
                    if in_s[partner] {
                        p_hist[1][bin((value[a] + value[partner]) % q, q)] += 1;
                        u_hist[1][bin((uniform[a] + uniform[partner]) % q, q)] += 1;
                    }
                }
            }
        }
        s.iter().for_each(|&x| in_s[x] = false);
    }
    let expected_bin = |total: u64, k: usize| -> f64 {
        // exact bin probability of a uniform residue
        let lo = (k as u128 * q as u128).div_ceil(MARGINAL_BINS as u128);
        let hi = ((k as u128 + 1) * q as u128).div_ceil(MARGINAL_BINS as u128);
        total as f64 * (hi - lo) as f64 / q as f64
    };
    let mut chi = 0.0;
    let mut dof = 0;
    let mut tv = 0.0;
    for h in 0..2 {
        let total: u64 = p_hist[h].iter().sum();
        if total == 0 {
            continue;
        }
        dof += MARGINAL_BINS - 1;
        let utotal: u64 = u_hist[h].iter().sum();
        for k in 0..MARGINAL_BINS {
            let e = expected_bin(total, k);
            chi += (p_hist[h][k] as f64 - e).powi(2) / e;
            tv += 0.5 * (p_hist[h][k] as f64 / total as f64 - u_hist[h][k] as f64 / utotal as f64).abs();
        }
    }
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Statistical(e.to_string()))?;
        1.0 - dist.cdf(chi)
    };
    let (coverage_rate, coverage_std_error) = rate(covered, trials);
    let reference = (t as f64).powi(3) / (n as f64).powi(2);
    Ok(DistinguishReport {
        variant,
        n,
        q,
        t,
        trials,
        seed,
        covered_trials: covered,
        coverage_rate,
        coverage_std_error,
        expected_covered_triples: expected_covered_triples(n, t),
        reference,
        within_reference: coverage_rate <= 2.0 * reference + 3.0 * coverage_std_error,
        marginal: MarginalTest {
            bins: MARGINAL_BINS,
            conditioned_trials: kept,
            value_observations: p_hist[0].iter().sum(),
            pair_observations: p_hist[1].iter().sum(),
            chi_square: chi,
            dof,
            p_value,
            tv_distance: tv,
        },
    })
}

// ---------------------------------------------------------------- property testing

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: usize,
    pub seed: u64,
    pub mode: DensityMode,
    pub evaluated: u64,
    pub far: u64,
    /// Fraction of inputs at relative distance at least 3/7 from every shifted xor.
    pub fraction: f64,
    pub std_error: f64,
    pub mean_distance: f64,
    /// `n² · Pr[Bin(n, 1/2) < 3n/7]`: expected number of shift pairs closer
    /// than the threshold, which bounds `1 − fraction`.
    pub expected_close_pairs: f64,
    /// Count per Hamming distance (numerator over `n`).
    pub histogram: BTreeMap<usize, u64>,
}

/// Distance statistics of uniform Boolean inputs; enumerates `{0,1}^{3n}`
/// when that is no larger than the requested sample count.
pub fn property_density(n: usize, samples: u64, seed: u64) -> Result<DensityReport> {
    if samples == 0 {
        return Err(Error::Statistical("empty report: zero samples requested".into()));
    }
    let params = ProblemParams::new(n, 2, Variant::Shift)?;
    let exact = 3 * n < 64 && (1u64 << (3 * n)) <= samples;
    let threshold = Ratio::new(FAR_THRESHOLD.0, FAR_THRESHOLD.1);
    let mut histogram = BTreeMap::new();
    let mut far = 0u64;
    let mut record = |bits: Vec<u32>| -> Result<()> {
        let d = min_shift_xor_distance(&InputString::new(bits, &params)?, &params)?;
        if d >= threshold {
            far += 1;
        }
        *histogram.entry(*d.numer() * (n / d.denom())).or_insert(0) += 1;
        Ok(())
    };
    let evaluated = if exact {
        let total = 1u64 << (3 * n);
        for x in 0..total {
            record((0..3 * n).map(|i| (x >> (3 * n - 1 - i) & 1) as u32).collect())?;
        }
        total
    } else {
        let mut rng = rng::root(seed);
        for _ in 0..samples {
            record((0..3 * n).map(|_| rng.gen_range(0..2)).collect())?;
        }
        samples
    };
    let mean_distance =
        histogram.iter().map(|(&d, &c)| d as f64 * c as f64).sum::<f64>() / (evaluated as f64 * n as f64);
    let (fraction, std_error) = match exact {
        true => (far as f64 / evaluated as f64, 0.0),
        false => rate(far as usize, evaluated as usize),
    };
    Ok(DensityReport {
        n,
        seed,
        mode: if exact { DensityMode::Exact } else { DensityMode::MonteCarlo },
        evaluated,
        far,
        fraction,
        std_error,
        mean_distance,
        expected_close_pairs: expected_close_pairs(n),
        histogram,
    })
}

pub fn expected_close_pairs(n: usize) -> f64 {
    let below = (FAR_THRESHOLD.0 * n).div_ceil(FAR_THRESHOLD.1);
    let tail: f64 =
        (0..below).map(|k| (ln_binomial(n as u64, k as u64) - n as f64 * std::f64::consts::LN_2).exp()).sum();
    (n * n) as f64 * tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_exact_at_n1() {
        // oracle: x_a differs from x_b xor x_c
        let far = (0..8u32).filter(|x| (x >> 2 & 1) != ((x >> 1 & 1) ^ (x & 1))).count();
        let r = property_density(1, 10, 0).unwrap();
        assert_eq!(r.mode, DensityMode::Exact);
        assert_eq!(r.evaluated, 8);
        assert_eq!(r.far as usize, far);
        assert_eq!(r.fraction, 0.5);
        assert_eq!(r.histogram, BTreeMap::from([(0, 4), (1, 4)]));
    }

    #[test]
    fn close_pair_estimate() {
        // direct sums of binomial coefficients
        let direct = |n: u64| {
            let mut c = 1.0f64;
            let mut tail = 0.0;
            for k in 0..(3 * n).div_ceil(7) {
                tail += c;
                c = c * (n - k) as f64 / (k + 1) as f64;
            }
            (n * n) as f64 * tail / 2f64.powi(n as i32)
        };
        for n in [1u64, 7, 50, 200, 1000] {
            let e = expected_close_pairs(n as usize);
            assert!((e - direct(n)).abs() <= 1e-9 * direct(n).max(1e-300), "n={n}");
        }
        assert!(expected_close_pairs(200) > 100.0);
        assert!(expected_close_pairs(2000) < 1e-3);
    }

    #[test]
    fn density_rejects_empty() {
        assert!(matches!(property_density(5, 0, 0), Err(Error::Statistical(_))));
    }

    #[test]
    fn density_sampled_is_reproducible() {
        let a = property_density(12, 200, 3).unwrap();
        assert_eq!(a.mode, DensityMode::MonteCarlo);
        assert_eq!(a, property_density(12, 200, 3).unwrap());
        assert_eq!(a.histogram.values().sum::<u64>(), 200);
    }

    #[test]
    fn expected_coverage_matches_enumeration() {
        // average number of triples of a fixed matching inside a t-subset of [6]
        let triples = [[0usize, 2, 4], [1, 3, 5]];
        for t in 0..=6 {
            let (mut subsets, mut inside) = (0u64, 0u64);
            for mask in 0u32..64 {
                if mask.count_ones() as usize != t {
                    continue;
                }
                subsets += 1;
                inside += triples.iter().filter(|tr| tr.iter().all(|&s| mask >> s & 1 == 1)).count() as u64;
            }
            let oracle = inside as f64 / subsets as f64;
            assert!((expected_covered_triples(2, t) - oracle).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn distinguish_extremes() {
        for variant in [Variant::Shift, Variant::Matching] {
            let r = distinguish(variant, 50, DEFAULT_Q, 0, 100, 1).unwrap();
            assert_eq!(r.covered_trials, 0);
            assert_eq!(r.marginal.dof, 0);
            let r = distinguish(variant, 5, DEFAULT_Q, 15, 20, 1).unwrap();
            assert_eq!(r.coverage_rate, 1.0);
        }
        assert!(distinguish(Variant::Matching, 5, DEFAULT_Q, 16, 20, 1).is_err());
    }

    #[test]
    fn distinguish_marginals_look_uniform() {
        let r = distinguish(Variant::Matching, 200, DEFAULT_Q, 60, 2000, 5).unwrap();
        assert_eq!(r.covered_trials + r.marginal.conditioned_trials, 2000);
        assert!(r.marginal.pair_observations > 0);
        assert!(r.marginal.p_value > 1e-3, "{:?}", r.marginal);
        assert!(r.marginal.tv_distance < 0.05);
    }

    #[test]
    fn upper_rejects_bad_grids() {
        assert!(matches!(randomized_upper(Variant::Shift, &[], 50, &[1.0], 0), Err(Error::InvalidParams(_))));
        assert!(matches!(randomized_upper(Variant::Shift, &[99, 200], 50, &[1.0], 0), Err(Error::InvalidParams(_))));
        assert!(matches!(randomized_upper(Variant::Shift, &[100, 200], 5, &[1.0], 0), Err(Error::Statistical(_))));
        assert!(matches!(randomized_upper(Variant::Shift, &[100, 100], 50, &[1.0], 0), Err(Error::Statistical(_))));
    }

    #[test]
    fn upper_rates_are_monotone() {
        let r = randomized_upper(Variant::Matching, &[100, 400], 60, &[0.5, 1.0, 2.0, 100.0], 9).unwrap();
        for p in &r.points {
            let rates: Vec<f64> = p.success.iter().map(|s| s.rate).collect();
            assert!(rates.windows(2).all(|w| w[0] <= w[1]));
            // a query set of size n covers every triple
            assert_eq!(p.success[3].queries, p.n);
            assert_eq!(rates[3], 1.0);
            assert!(p.queries_two_thirds <= p.n);
        }
        assert_eq!(r, randomized_upper(Variant::Matching, &[100, 400], 60, &[0.5, 1.0, 2.0, 100.0], 9).unwrap());
    }
}
