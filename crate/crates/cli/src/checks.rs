//! The registry of identities exercised by `verify`.
//!
//! Each check runs at reduced sizes in quick mode (q ≤ 5, n ≤ 2, m ≤ 16).

use nalgebra::DMatrix;
use serde::Serialize;
use tripsum_core::adversary::{
    build_g, build_tilde_g, certify_3matching, certify_3shift, gv_delta_residual, lambda_inequality, matching_cutoff,
    psi_prime_norm, CertifyOptions, DeltaSandwich,
};
use tripsum_core::certificates::{
    alpha_matching, alpha_shift_prime, feasibility_max, feasibility_max_exhaustive, in_certificate, norm,
    normalize_feasible, objective, partial, DualSolution, Structure,
};
use tripsum_core::operators::fourier::check_psi_fourier_columns;
use tripsum_core::operators::norm::{materialize, LinearMap};
use tripsum_core::operators::{psi, site_projectors, spectral_norm, Method, NormOptions, PsiFamily, DENSE_BUDGET};
use tripsum_core::problems::{
    enumerate_inputs, enumerate_matchings, negative_density_bound, negative_indices, InputClass, ProblemParams,
    Variant, DEFAULT_INPUT_BUDGET,
};
use tripsum_core::sets::{for_each_subset_up_to, SiteSet};
use tripsum_core::symmetry::johnson::phi_norm_weight_space;
use tripsum_core::symmetry::projectors::{bar_pi, exactly_k_isotypic, kappa_check, kappa_dense, phi, weight_projector};
use tripsum_core::symmetry::{build_v_w, partitions, tail_check};
use tripsum_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Operators,
    Certificates,
    Symmetry,
    Adversary,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Operators, Suite::Certificates, Suite::Symmetry, Suite::Adversary];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Operators => "operators",
            Suite::Certificates => "certificates",
            Suite::Symmetry => "symmetry",
            Suite::Adversary => "adversary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Dense,
    Power,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub quick: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub pass: bool,
    /// Largest deviation or the measured statistic.
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub detail: String,
}

pub struct Check {
    pub name: &'static str,
    pub suite: Suite,
    /// The identity, stated in one line.
    pub identity: &'static str,
    pub run: fn(&Ctx) -> Result<Outcome>,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

fn dense_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.singular_values().max()
    }
}

fn outcome(value: f64, tolerance: f64, provenance: Provenance, detail: String) -> Outcome {
    Outcome { pass: value <= tolerance, value, tolerance, provenance, detail }
}

fn qs(ctx: &Ctx, full: &[usize]) -> Vec<usize> {
    full.iter().copied().filter(|&q| !ctx.quick || q <= 5).collect()
}

fn psi_dense(f: PsiFamily, q: usize) -> Result<DMatrix<f64>> {
    psi(&f, q)?.to_dense(DENSE_BUDGET)
}

fn kron3(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b).kronecker(c)
}

// ---------------------------------------------------------------- operators

fn psi_norm_sqrt3(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    let list = qs(ctx, &[3, 5, 7, 11]);
    for &q in &list {
        dev = dev.max((dense_norm(&psi_dense(PsiFamily::Le2, q)?) - 3f64.sqrt()).abs());
    }
    Ok(outcome(dev, 1e-9, Provenance::Dense, format!("q ∈ {list:?}")))
}

fn psi_le1_unit(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    let list = qs(ctx, &[3, 5, 7, 11]);
    for &q in &list {
        dev = dev.max((dense_norm(&psi_dense(PsiFamily::Le1, q)?) - 1.0).abs());
    }
    Ok(outcome(dev, 1e-9, Provenance::Dense, format!("q ∈ {list:?}")))
}

fn psi_le2_projected_unit(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    let list = qs(ctx, &[3, 5, 7, 11]);
    for &q in &list {
        let p = psi_dense(PsiFamily::Le2, q)?;
        let (pi0, _) = site_projectors(q);
        let id = DMatrix::identity(q, q);
        for site in 0..3 {
            let f = |s: usize| if s == site { &pi0 } else { &id };
            dev = dev.max((dense_norm(&(&p * kron3(f(0), f(1), f(2)))) - 1.0).abs());
        }
    }
    Ok(outcome(dev, 1e-9, Provenance::Dense, format!("Π_0 at each of the three sites, q ∈ {list:?}")))
}

fn psi_empty_adjoint(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    let list = qs(ctx, &[3, 5, 7, 11]);
    for &q in &list {
        let e = psi_dense(PsiFamily::Empty, q)?;
        let p = psi_dense(PsiFamily::Le2, q)?;
        let (pi0, _) = site_projectors(q);
        dev = dev.max(max_abs(&(e.transpose() * p - kron3(&pi0, &pi0, &pi0))));
    }
    Ok(outcome(dev, 1e-9, Provenance::Dense, format!("entrywise, q ∈ {list:?}")))
}

fn fourier_columns(ctx: &Ctx) -> Result<Outcome> {
    let top = if ctx.quick { 5 } else { 7 };
    let (mut failures, mut cols, mut dev) = (0, 0, 0.0f64);
    for q in 2..=top {
        let c = check_psi_fourier_columns(q, 1e-9)?;
        failures += c.failures;
        cols += c.columns_checked;
        dev = dev.max(c.max_deviation);
    }
    Ok(Outcome {
        pass: failures == 0,
        value: failures as f64,
        tolerance: 0.0,
        provenance: Provenance::Dense,
        detail: format!("{cols} columns over q = 2..={top}, max deviation {dev:.3e}"),
    })
}

fn site_projector_algebra(_: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for q in 2..=11 {
        let (p0, p1) = site_projectors(q);
        let id = DMatrix::<f64>::identity(q, q);
        dev = dev
            .max(max_abs(&(&p0 * &p0 - &p0)))
            .max(max_abs(&(&p1 * &p1 - &p1)))
            .max(max_abs(&(&p0 * &p1)))
            .max(max_abs(&(&p0 + &p1 - &id)))
            .max(p0.iter().fold(0.0f64, |a, &v| a.max((v - 1.0 / q as f64).abs())));
    }
    Ok(outcome(dev, 1e-12, Provenance::Exact, "q = 2..=11".into()))
}

// ---------------------------------------------------------------- certificates

fn objective_alpha_mm(ctx: &Ctx) -> Result<Outcome> {
    let ns: &[usize] = if ctx.quick { &[1, 2, 4] } else { &[1, 2, 3, 4, 5, 6, 9, 16, 100] };
    let mut dev: f64 = 0.0;
    for &n in ns {
        // the matching family and the norm scan are enumerated, so they stop at n = 6
        let small = n <= 6;
        let variants: &[Variant] = if small { &[Variant::Shift, Variant::Matching] } else { &[Variant::Shift] };
        for &v in variants {
            dev = dev.max((objective(&alpha_matching(n, v))? - (n as f64).sqrt()).abs());
            if small {
                dev = dev.max((norm(&alpha_matching(n, v))? - (n as f64).sqrt()).abs());
            }
        }
    }
    Ok(outcome(dev, 1e-12, Provenance::Exact, format!("n ∈ {ns:?}; matching family and ‖α‖ for n ≤ 6")))
}

fn objective_shift_prime(ctx: &Ctx) -> Result<Outcome> {
    let ns: &[usize] = if ctx.quick { &[1, 2, 8] } else { &[1, 2, 8, 27, 64, 1000] };
    let mut dev: f64 = 0.0;
    for &n in ns {
        dev = dev.max((objective(&alpha_shift_prime(n))? - (n as f64).cbrt()).abs());
    }
    Ok(outcome(dev, 1e-12, Provenance::Exact, format!("n ∈ {ns:?}")))
}

fn feasibility_shift_prime(ctx: &Ctx) -> Result<Outcome> {
    let ns: &[usize] = if ctx.quick { &[8] } else { &[8, 27] };
    let mut worst: f64 = 0.0;
    for &n in ns {
        worst = worst.max(feasibility_max(&alpha_shift_prime(n))?);
    }
    Ok(outcome(worst, 2.0, Provenance::Exact, format!("max feasibility over n ∈ {ns:?}")))
}

fn feasibility_is_max_partial(ctx: &Ctx) -> Result<Outcome> {
    let mut cases: Vec<DualSolution> = vec![
        alpha_matching(2, Variant::Matching),
        alpha_matching(2, Variant::Shift),
        alpha_shift_prime(2),
        alpha_shift_prime(3),
    ];
    if !ctx.quick {
        cases.push(alpha_matching(4, Variant::Matching));
        cases.push(alpha_matching(4, Variant::Shift));
    }
    let mut dev: f64 = 0.0;
    for a in &cases {
        let f = feasibility_max(a)?;
        let mut top: f64 = 0.0;
        for j in 0..3 * a.n() {
            top = top.max(norm(&partial(a, j)?)?.powi(2));
        }
        dev = dev.max((f - top).abs()).max((f - feasibility_max_exhaustive(a)?).abs());
    }
    Ok(outcome(dev, 1e-9, Provenance::Exact, format!("{} solutions, counting vs enumeration", cases.len())))
}

fn alpha_shape(ctx: &Ctx) -> Result<Outcome> {
    let mut cases = vec![
        (alpha_matching(1, Variant::Matching), Structure::Cm),
        (alpha_matching(2, Variant::Matching), Structure::Cm),
        (alpha_matching(2, Variant::Shift), Structure::Cs),
        (alpha_shift_prime(2), Structure::CsPrime),
    ];
    if !ctx.quick {
        cases.push((alpha_matching(3, Variant::Matching), Structure::Cm));
        cases.push((alpha_shift_prime(3), Structure::CsPrime));
    }
    let mut bad = 0usize;
    for (a, st) in &cases {
        let params = ProblemParams::new(a.n(), 2, a.variant())?;
        let ground: Vec<usize> = (0..3 * a.n()).collect();
        for mu in enumerate_matchings(&params)? {
            for_each_subset_up_to(&ground, ground.len(), |s| {
                let v = a.value(&mu, s);
                bad += (v < 0.0) as usize;
                bad += (in_certificate(s, &mu, *st) && v != 0.0) as usize;
                bad += (s.len() > a.cutoff() && v != 0.0) as usize;
                for &j in &ground {
                    if !s.contains(j) && a.value(&mu, &s.with(j)) > v + 1e-15 {
                        bad += 1;
                    }
                }
            });
        }
    }
    Ok(Outcome {
        pass: bad == 0,
        value: bad as f64,
        tolerance: 0.0,
        provenance: Provenance::Exact,
        detail: "non-negative, non-increasing, zero on certificates and above the cutoff".into(),
    })
}

fn certificates_upward_closed(_: &Ctx) -> Result<Outcome> {
    let mut bad = 0usize;
    for (v, structures) in
        [(Variant::Shift, vec![Structure::Cs, Structure::CsPrime]), (Variant::Matching, vec![Structure::Cm])]
    {
        let params = ProblemParams::new(2, 2, v)?;
        let ground: Vec<usize> = (0..6).collect();
        for mu in enumerate_matchings(&params)? {
            for st in &structures {
                for_each_subset_up_to(&ground, 6, |s| {
                    if in_certificate(s, &mu, *st) {
                        bad += ground.iter().filter(|&&j| !in_certificate(&s.with(j), &mu, *st)).count();
                    }
                });
                bad += in_certificate(&SiteSet::empty(), &mu, *st) as usize;
                bad += !in_certificate(&SiteSet::from_sites(0..6), &mu, *st) as usize;
            }
        }
    }
    Ok(Outcome {
        pass: bad == 0,
        value: bad as f64,
        tolerance: 0.0,
        provenance: Provenance::Exact,
        detail: "n = 2, all structures".into(),
    })
}

fn normalization(_: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for a in
        [alpha_matching(3, Variant::Matching), alpha_shift_prime(8), alpha_matching(2, Variant::Shift).scaled(2.0)?]
    {
        let f = feasibility_max(&a)?;
        let b = normalize_feasible(&a)?;
        dev = dev.max((feasibility_max(&b)? - 1.0).max(0.0));
        let want = objective(&a)? / f.sqrt().max(1.0);
        dev = dev.max((objective(&b)? - want).abs());
    }
    Ok(outcome(dev, 1e-12, Provenance::Exact, "feasibility ≤ 1 after scaling, objective scaled alike".into()))
}

// ---------------------------------------------------------------- symmetry

fn sym_sizes(ctx: &Ctx) -> Vec<(usize, usize)> {
    let mut v = vec![(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (3, 4)];
    if !ctx.quick {
        v.extend([(2, 6), (3, 5), (3, 6)]);
    }
    v
}

fn bar_pi_zero(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for (q, m) in sym_sizes(ctx) {
        let (p0, _) = site_projectors(q);
        let mut all = DMatrix::from_element(1, 1, 1.0);
        for _ in 0..m {
            all = all.kronecker(&p0);
        }
        dev = dev.max(max_abs(&(bar_pi(0, m, q)? - all)));
    }
    Ok(outcome(dev, 1e-10, Provenance::Dense, "Π̄_0 = Π_0^{⊗m}".into()))
}

fn weight_isotypic_orthogonality(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for (q, m) in sym_sizes(ctx) {
        for k in 0..=m {
            let w = weight_projector(k, m, q)?;
            for j in k + 1..=m / 2 {
                dev = dev.max(max_abs(&(&w * exactly_k_isotypic(j, m, q)?)));
            }
        }
    }
    Ok(outcome(
        dev,
        1e-10,
        Provenance::Dense,
        "Π_k vanishes on isotypics with more than k boxes below the first row".into(),
    ))
}

fn phi_identities(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for (q, m) in sym_sizes(ctx) {
        dev = dev.max(max_abs(&phi(0, m, q)?));
        for k in 1..=m {
            let p = phi(k, m, q)?;
            let w = weight_projector(k, m, q)?;
            dev = dev.max(max_abs(&(&w * &p * &w - &p)));
        }
    }
    Ok(outcome(dev, 1e-10, Provenance::Dense, "Φ_0 = 0 and Π_kΦ_kΠ_k = Φ_k".into()))
}

fn pi_k_v_identity(_: &Ctx) -> Result<Outcome> {
    let (n, q) = (2, 3);
    let vw = build_v_w(2, n, q)?;
    let v = vw.v.to_dense();
    let mut dev: f64 = 0.0;
    for ka in 0..=n {
        for kb in 0..=n {
            for kc in 0..=n {
                let pk =
                    kron3(&weight_projector(ka, n, q)?, &weight_projector(kb, n, q)?, &weight_projector(kc, n, q)?);
                let bar = kron3(&bar_pi(ka, n, q)?, &bar_pi(kb, n, q)?, &bar_pi(kc, n, q)?);
                dev = dev.max(max_abs(&(pk * &v - bar)));
            }
        }
    }
    Ok(outcome(dev, 1e-10, Provenance::Dense, "n = 2, q = 3, all weight triples".into()))
}

fn kappa_m6(_: &Ctx) -> Result<Outcome> {
    let mut bad = 0usize;
    let mut dev: f64 = 0.0;
    let mut count = 0;
    for k in 0..=2 {
        for lambda in partitions(6, Some(k)) {
            count += 1;
            bad += !kappa_check(&lambda)? as usize;
            // trace(F E_λ) is the multiplicity times the rank of F on S^λ
            let (trace, mult) = kappa_dense(&lambda, 2)?;
            let rank = tripsum_core::symmetry::projectors::kappa_rank(&lambda)? as f64;
            dev = dev.max((trace - mult * rank).abs());
        }
    }
    Ok(Outcome {
        pass: bad == 0 && dev <= 1e-9,
        value: bad as f64,
        tolerance: 0.0,
        provenance: Provenance::Exact,
        detail: format!("{count} partitions of 6, dense trace deviation {dev:.3e}"),
    })
}

fn phi1_scaling(ctx: &Ctx) -> Result<Outcome> {
    let ms: &[usize] = if ctx.quick { &[4, 8, 16] } else { &[4, 8, 16, 32] };
    let norms = ms.iter().map(|&m| phi_norm_weight_space(1, m)).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|r| (0.5..=0.95).contains(r));
    Ok(Outcome {
        pass,
        value: ratios.iter().fold(0.0f64, |a, &b| a.max(b)),
        tolerance: 0.95,
        provenance: Provenance::Dense,
        detail: format!("‖Φ_1‖ at m ∈ {ms:?}: {norms:.6?}"),
    })
}

fn overlap_tail(ctx: &Ctx) -> Result<Outcome> {
    let samples = if ctx.quick { 10_000 } else { 100_000 };
    let r = tail_check(100, 10, 10, samples, 6, ctx.seed)?;
    Ok(Outcome {
        pass: r.pass,
        value: r.mean_three_pow_l,
        tolerance: r.moment_bound,
        provenance: Provenance::MonteCarlo,
        detail: format!(
            "n = 100, |R_B| = |R_C| = 20, {samples} samples, Pr[L = ℓ] for ℓ ≤ 6: {:?}",
            r.rows.iter().map(|x| x.empirical).collect::<Vec<_>>()
        ),
    })
}

fn lambda_bound_check(ctx: &Ctx) -> Result<Outcome> {
    let (n, q) = (2, 5);
    let a = alpha_matching(n, Variant::Matching);
    let opts = NormOptions { tol: 1e-10, seed: ctx.seed, ..Default::default() };
    let cutoff = matching_cutoff(n);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for alpha in [a.clone(), partial(&a, 0)?] {
        let li = lambda_inequality(&alpha, q, cutoff, &opts)?;
        worst = worst.max(li.gw_norm.value - li.max_lambda);
        parts.push(format!("‖GW‖ = {:.8}, max Λ = {:.8}", li.gw_norm.value, li.max_lambda));
    }
    Ok(outcome(
        worst,
        1e-9,
        Provenance::Power,
        format!("α_mm and its first derivative at n = 2, q = 5: {}", parts.join("; ")),
    ))
}

// ---------------------------------------------------------------- adversary

fn tilde_g_norm(ctx: &Ctx) -> Result<Outcome> {
    let mut cases = vec![(1, 3), (1, 5), (2, 3)];
    if !ctx.quick {
        cases.push((2, 5));
    }
    let mut dev: f64 = 0.0;
    for &(n, q) in &cases {
        for a in [alpha_matching(n, Variant::Matching), alpha_shift_prime(n), alpha_matching(n, Variant::Shift)] {
            let t = build_tilde_g(&a, q)?;
            let opts = NormOptions { tol: 1e-13, seed: ctx.seed, ..Default::default() };
            let method = if t.nrows().max(t.ncols()) <= 1024 { Method::DenseSvd } else { Method::PowerIteration };
            dev = dev.max((spectral_norm(&t, method, &opts)?.value - norm(&a)?).abs());
        }
    }
    Ok(outcome(dev, 1e-9, Provenance::Power, format!("(n, q) ∈ {cases:?}")))
}

fn digit(x: usize, j: usize, q: usize, m: usize) -> usize {
    x / q.pow((m - 1 - j) as u32) % q
}

fn delta_calculus(ctx: &Ctx) -> Result<Outcome> {
    let mut cases = vec![
        (alpha_shift_prime(1), 3),
        (alpha_shift_prime(1), 5),
        (alpha_matching(1, Variant::Matching), 5),
        (alpha_shift_prime(2), 3),
        (alpha_matching(2, Variant::Matching), 3),
    ];
    if !ctx.quick {
        cases.push((alpha_shift_prime(2), 5));
    }
    let mut dev: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let opts = NormOptions { tol: 1e-10, seed: ctx.seed, ..Default::default() };
    for (a, q) in &cases {
        let q = *q;
        let m = 3 * a.n();
        let p = ProblemParams::new(a.n(), q as u32, a.variant())?;
        let negatives = negative_indices(&p, DEFAULT_INPUT_BUDGET)?;
        let g = build_g(a, q)?.restrict_columns(negatives.clone())?;
        let d = materialize(&g, DENSE_BUDGET)?;
        let rows: Vec<usize> = g.row_inputs().collect();
        let mask = |m_: &DMatrix<f64>, j: usize| {
            DMatrix::from_fn(m_.nrows(), m_.ncols(), |r, c| {
                if digit(rows[r], j, q, m) != digit(g.column_input(c), j, q, m) {
                    m_[(r, c)]
                } else {
                    0.0
                }
            })
        };
        for j in 0..m {
            let want = mask(&d, j);
            let gp = materialize(&build_g(&partial(a, j)?, q)?.restrict_columns(negatives.clone())?, DENSE_BUDGET)?;
            dev = dev.max(max_abs(&(mask(&gp, j) - &want)));
            dev = dev.max(max_abs(&(materialize(&g.hadamard_delta(j)?, DENSE_BUDGET)? - &want)));
            dev = dev.max(max_abs(&(materialize(&DeltaSandwich::new(&g, j)?, DENSE_BUDGET)? - &want)));
            let gp_norm = spectral_norm(&gp, Method::PowerIteration, &opts)?.value;
            if gp_norm > 0.0 {
                ratio = ratio.max(spectral_norm(&want, Method::PowerIteration, &opts)?.value / (2.0 * gp_norm));
            }
        }
    }
    let pass = dev <= 1e-12 && ratio <= 1.0 + 1e-6;
    Ok(Outcome {
        pass,
        value: dev,
        tolerance: 1e-12,
        provenance: Provenance::Dense,
        detail: format!("{} instances, all j; max ‖Δ_j∘Γ‖ / 2‖Γ′_j‖ = {ratio:.6}", cases.len()),
    })
}

fn restriction_lemma(ctx: &Ctx) -> Result<Outcome> {
    let opts = CertifyOptions { seed: ctx.seed, side_checks: false, ..Default::default() };
    let mut runs = vec![("shift", 2, 5), ("matching", 2, 5)];
    if !ctx.quick {
        runs = vec![("shift", 2, 11), ("matching", 2, 5), ("matching", 2, 7)];
    }
    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for (v, n, q) in runs {
        let c = if v == "shift" { certify_3shift(n, q, &opts)? } else { certify_3matching(n, q, &opts)? };
        worst = worst.max(c.analytic_bound - c.gamma_norm.value);
        parts.push(format!("{v} n={n} q={q}: {:.10} ≤ {:.10}", c.analytic_bound, c.gamma_norm.value));
    }
    Ok(outcome(worst, 1e-6, Provenance::Power, parts.join("; ")))
}

fn density_bound(_: &Ctx) -> Result<Outcome> {
    let mut worst = f64::NEG_INFINITY;
    for q in 3..=17u32 {
        let p = ProblemParams::new(1, q, Variant::Shift)?;
        let neg = enumerate_inputs(&p, InputClass::Negative, DEFAULT_INPUT_BUDGET)?.count() as f64;
        let exact = neg / (q as f64).powi(3);
        let b = negative_density_bound(&p);
        worst = worst.max(*b.numer() as f64 / *b.denom() as f64 - exact);
    }
    Ok(outcome(worst, 1e-12, Provenance::Exact, "n = 1, q = 3..=17: bound minus exact negative density".into()))
}

fn dense_power_agree(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for shift in [true, false] {
        let run = |method| {
            let o = CertifyOptions { tol: 1e-12, seed: ctx.seed, method: Some(method), ..Default::default() };
            if shift {
                certify_3shift(1, 5, &o)
            } else {
                certify_3matching(1, 5, &o)
            }
        };
        let (d, p) = (run(Method::DenseSvd)?, run(Method::PowerIteration)?);
        dev = dev.max((d.certified_value - p.certified_value).abs() / d.certified_value);
        dev = dev.max((d.gamma_norm.value - p.gamma_norm.value).abs() / d.gamma_norm.value);
    }
    Ok(outcome(dev, 1e-6, Provenance::Dense, "n = 1, q = 5, both constructions, relative".into()))
}

fn gv_delta(ctx: &Ctx) -> Result<Outcome> {
    let mut cases = vec![(1, 3), (1, 5), (2, 3)];
    if !ctx.quick {
        cases.push((2, 5));
    }
    let mut worst: f64 = 0.0;
    for &(n, q) in &cases {
        let vw = build_v_w(matching_cutoff(n), n, q)?;
        let r = gv_delta_residual(&alpha_matching(n, Variant::Matching), q, &vw, None, ctx.seed)?;
        worst = worst.max(r.residual);
    }
    Ok(outcome(worst, 1e-10, Provenance::Exact, format!("every row and column, (n, q) ∈ {cases:?}")))
}

fn psi_prime_unit(ctx: &Ctx) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    let opts = NormOptions { tol: 1e-12, seed: ctx.seed, ..Default::default() };
    for (n, q) in [(1, 3), (1, 5), (2, 3)] {
        let p = ProblemParams::new(n, q as u32, Variant::Shift)?;
        for mu in enumerate_matchings(&p)? {
            dev = dev.max((psi_prime_norm(&mu, q, &opts)?.value - 1.0).abs());
        }
    }
    Ok(outcome(dev, 1e-9, Provenance::Dense, "every 3-shift at (n, q) ∈ [(1,3), (1,5), (2,3)]".into()))
}

pub fn registry() -> Vec<Check> {
    use Suite::*;
    let c = |name, suite, identity, run| Check { name, suite, identity, run };
    vec![
        c("psi_norm_sqrt3", Operators, "‖Ψ^T_{≤2}‖ = √3", psi_norm_sqrt3 as fn(&Ctx) -> Result<Outcome>),
        c("psi_le1_unit", Operators, "‖Ψ^T_{≤1}‖ = 1", psi_le1_unit),
        c("psi_le2_site_projected_unit", Operators, "‖Ψ^T_{≤2}(Π_0 at one site)‖ = 1", psi_le2_projected_unit),
        c("psi_empty_adjoint", Operators, "(Ψ^T_∅)*Ψ^T_{≤2} = Π^T_∅", psi_empty_adjoint),
        c("fourier_columns", Operators, "Ψ^T_R e_i is one Fourier unit at (i_2−i_1, i_3−i_1)", fourier_columns),
        c("site_projector_algebra", Operators, "Π_0, Π_1 complementary projectors, Π_0 = J/q", site_projector_algebra),
        c("objective_alpha_mm", Certificates, "objective(α_mm) = ‖α_mm‖ = √n", objective_alpha_mm),
        c("objective_shift_prime", Certificates, "objective(α′_s) = n^{1/3}", objective_shift_prime),
        c("feasibility_shift_prime", Certificates, "feasibility_max(α′_s) ≤ 2", feasibility_shift_prime),
        c("feasibility_is_max_partial", Certificates, "feasibility_max(α) = max_j ‖∂_jα‖²", feasibility_is_max_partial),
        c("alpha_shape", Certificates, "built-in α non-negative, monotone, zero on certificates", alpha_shape),
        c(
            "certificates_upward_closed",
            Certificates,
            "certificate membership is upward closed",
            certificates_upward_closed,
        ),
        c("normalize_feasible", Certificates, "normalisation makes α feasible", normalization),
        c("bar_pi_zero", Symmetry, "Π̄_0 = Π_0", bar_pi_zero),
        c(
            "weight_isotypic_orthogonality",
            Symmetry,
            "Π_k ⟂ isotypics with more than k boxes below",
            weight_isotypic_orthogonality,
        ),
        c("phi_identities", Symmetry, "Φ_0 = 0 and Π_kΦ_kΠ_k = Φ_k", phi_identities),
        c("pi_k_v_identity", Symmetry, "(Π_kA ⊗ Π_kB ⊗ Π_kC)V = Π̄_kA ⊗ Π̄_kB ⊗ Π̄_kC", pi_k_v_identity),
        c("kappa_m6", Symmetry, "F fixes a vector of S^λ for ≤ 2 boxes below, m = 6", kappa_m6),
        c("phi1_scaling", Symmetry, "‖Φ_1^{[m]}‖ shrinks by a factor in [0.5, 0.95] per doubling", phi1_scaling),
        c("overlap_tail", Symmetry, "Pr[L = ℓ] ≤ 8^ℓ/ℓ! + 3σ and E[3^L] ≤ e^24", overlap_tail),
        c("lambda_inequality", Symmetry, "‖G(α)W‖ ≤ max Λ_{k_B,k_C}(α)", lambda_bound_check),
        c("tilde_g_norm", Adversary, "‖G̃(α)‖ = ‖α‖", tilde_g_norm),
        c("delta_calculus", Adversary, "G(α)∘Δ_j = G(∂_jα)∘Δ_j, both Δ routes match dense", delta_calculus),
        c("restriction_lemma", Adversary, "√(|N|/|U|)·objective(α) ≤ ‖Γ‖", restriction_lemma),
        c("negative_density_bound", Adversary, "|N|/|U| ≥ 1 − n³/q", density_bound),
        c("dense_power_agree", Adversary, "dense and power-iteration certificates agree", dense_power_agree),
        c("gv_delta_identity", Adversary, "G(α)V ↦_{Δ} G(∂α)V′ + G(α)Φ", gv_delta),
        c("psi_prime_unit", Adversary, "‖Ψ′^μ‖ = 1", psi_prime_unit),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub suite: Suite,
    pub identity: &'static str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn line(&self) -> String {
        format!("{}: {}", self.name, self.status)
    }
}

pub fn run_check(check: &Check, ctx: &Ctx, timings: bool) -> CheckResult {
    let t = std::time::Instant::now();
    let r = (check.run)(ctx);
    let elapsed = timings.then(|| t.elapsed().as_secs_f64());
    let (status, outcome, error) = match r {
        Ok(o) => (if o.pass { "pass" } else { "FAIL" }, Some(o), None),
        Err(e) => ("FAIL", None, Some(e.to_string())),
    };
    CheckResult {
        name: check.name,
        suite: check.suite,
        identity: check.identity,
        status,
        outcome,
        error,
        elapsed_seconds: elapsed,
    }
}
