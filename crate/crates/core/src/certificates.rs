//! Certificate structures and dual learning-graph solutions `α(μ, S)`.
//!
//! A [`DualSolution`] is a base map (a profile depending only on `|S|` and
//! certificate membership, an explicit table, or zero) together with a
//! positive scale factor and a set of derivative indices: the solution
//! `c · ∂_{j_1} ⋯ ∂_{j_r} base`. The `∂_j` commute and are idempotent, so this
//! is closed under every operation used downstream.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{enumerate_matchings, Matching, ProblemParams, Triple, Variant};
use crate::sets::{count_subsets_up_to, for_each_subset_up_to, SiteSet};

/// Cap on `#S × |M|` for the exhaustive (brute-force) routes.
pub const EXHAUSTIVE_BUDGET: u128 = 400_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Structure {
    /// `C_s`: some 3-shift triple inside `S`.
    Cs,
    /// `C_m`: some matching triple inside `S`.
    Cm,
    /// `C′_s`: some 3-shift triple meeting `S` in at least two sites.
    CsPrime,
}

impl Structure {
    pub fn variant(&self) -> Variant {
        match self {
            Structure::Cm => Variant::Matching,
            Structure::Cs | Structure::CsPrime => Variant::Shift,
        }
    }

    /// Number of sites of one triple that `S` must contain.
    fn hits_needed(&self) -> usize {
        match self {
            Structure::Cs | Structure::Cm => 3,
            Structure::CsPrime => 2,
        }
    }
}

/// Largest number of sites `S` shares with a single triple of `mu`.
fn max_triple_hits(s: &[usize], mu: &Matching) -> usize {
    let mut owners: Vec<usize> = s.iter().map(|&x| mu.owner(x)).collect();
    owners.sort_unstable();
    let mut best = 0;
    let mut run = 0;
    for (i, o) in owners.iter().enumerate() {
        run = if i > 0 && owners[i - 1] == *o { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

/// Whether `S ∈ M_μ` for the given structure.
pub fn in_certificate(s: &SiteSet, mu: &Matching, structure: Structure) -> bool {
    max_triple_hits(s.as_slice(), mu) >= structure.hits_needed()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    AlphaMm,
    AlphaShiftPrime,
    Table,
}

#[derive(Debug, Clone, PartialEq)]
enum Base {
    /// `scale · max(threshold − |S|, 0)` off certificates, `0` on them.
    Profile {
        threshold: f64,
        scale: f64,
        structure: Structure,
    },
    Table(HashMap<Matching, HashMap<SiteSet, f64>>),
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    kind: Kind,
    n: usize,
    variant: Variant,
    cutoff: usize,
    base: Base,
    factor: f64,
    partials: Vec<usize>,
}

/// Exact integer `k`-th root of `n` when it exists, else the real root.
fn root(n: usize, k: u32) -> f64 {
    let r = (n as f64).powf(1.0 / k as f64).round() as usize;
    for c in r.saturating_sub(1)..=r + 1 {
        if c.checked_pow(k) == Some(n) {
            return c as f64;
        }
    }
    (n as f64).powf(1.0 / k as f64)
}

/// Least integer `K` with `K ≥ t`.
fn ceil_cutoff(t: f64) -> usize {
    t.ceil() as usize
}

/// `α_mm(μ, S) = max(√n − |S|, 0)/√|M_q|` over `C_s` or `C_m`.
pub fn alpha_matching(n: usize, variant: Variant) -> DualSolution {
    let threshold = root(n, 2);
    let params = ProblemParams { n, q: 2, variant };
    let structure = match variant {
        Variant::Shift => Structure::Cs,
        Variant::Matching => Structure::Cm,
    };
    DualSolution {
        kind: Kind::AlphaMm,
        n,
        variant,
        cutoff: ceil_cutoff(threshold),
        base: Base::Profile { threshold, scale: 1.0 / params.sqrt_family_size(), structure },
        factor: 1.0,
        partials: Vec::new(),
    }
}

/// `α′_s(μ, S) = (1/n) max(n^{1/3} − |S|, 0)` over `C′_s`.
pub fn alpha_shift_prime(n: usize) -> DualSolution {
    let threshold = root(n, 3);
    DualSolution {
        kind: Kind::AlphaShiftPrime,
        n,
        variant: Variant::Shift,
        cutoff: ceil_cutoff(threshold),
        base: Base::Profile { threshold, scale: 1.0 / n as f64, structure: Structure::CsPrime },
        factor: 1.0,
        partials: Vec::new(),
    }
}

/// The identically zero solution.
pub fn zero(n: usize, variant: Variant) -> DualSolution {
    DualSolution { kind: Kind::Table, n, variant, cutoff: 0, base: Base::Zero, factor: 1.0, partials: Vec::new() }
}

/// Explicit table; absent `(μ, S)` pairs are zero.
pub fn table(
    n: usize,
    variant: Variant,
    cutoff: usize,
    entries: impl IntoIterator<Item = (Matching, SiteSet, f64)>,
) -> Result<DualSolution> {
    let mut map: HashMap<Matching, HashMap<SiteSet, f64>> = HashMap::new();
    for (mu, s, v) in entries {
        if mu.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: mu.n() });
        }
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidParams(format!("table entry {v} is not a non-negative real")));
        }
        if s.iter().any(|x| x >= 3 * n) {
            return Err(Error::InvalidParams(format!("set {s:?} leaves [3n]")));
        }
        if s.len() > cutoff && v != 0.0 {
            return Err(Error::InvalidParams(format!("entry on {s:?} exceeds the cutoff {cutoff}")));
        }
        if v != 0.0 {
            map.entry(mu).or_default().insert(s, v);
        }
    }
    Ok(DualSolution {
        kind: Kind::Table,
        n,
        variant,
        cutoff,
        base: Base::Table(map),
        factor: 1.0,
        partials: Vec::new(),
    })
}

impl DualSolution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// The cutoff `K`: `α(μ, S) = 0` whenever `|S| > K`.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// Derivative indices applied to the base, sorted.
    pub fn partials(&self) -> &[usize] {
        &self.partials
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.base, Base::Zero) || self.factor == 0.0
    }

    /// Profile parameters `(threshold, scale, structure)` of the base, if any.
    pub fn profile(&self) -> Option<(f64, f64, Structure)> {
        match self.base {
            Base::Profile { threshold, scale, structure } => Some((threshold, scale, structure)),
            _ => None,
        }
    }

    /// Largest `|S|` on which the solution can be nonzero.
    pub fn support_bound(&self) -> usize {
        let b = match &self.base {
            Base::Profile { threshold, .. } => {
                // largest integer s with s < threshold
                let c = threshold.ceil() as usize;
                c.saturating_sub(1)
            }
            Base::Table(map) => map.values().flat_map(|m| m.keys().map(SiteSet::len)).max().unwrap_or(0),
            Base::Zero => 0,
        };
        b.min(self.cutoff).min(3 * self.n)
    }

    /// Profile value `f(s)` before the factor (zero on certificates).
    fn profile_at(threshold: f64, scale: f64, s: usize) -> f64 {
        scale * (threshold - s as f64).max(0.0)
    }

    fn base_value(&self, mu: &Matching, s: &SiteSet) -> f64 {
        match &self.base {
            Base::Profile { threshold, scale, structure } => {
                if s.len() as f64 >= *threshold || in_certificate(s, mu, *structure) {
                    0.0
                } else {
                    Self::profile_at(*threshold, *scale, s.len())
                }
            }
            Base::Table(map) => map.get(mu).and_then(|m| m.get(s)).copied().unwrap_or(0.0),
            Base::Zero => 0.0,
        }
    }

    /// `α(μ, S)`.
    pub fn value(&self, mu: &Matching, s: &SiteSet) -> f64 {
        if self.factor == 0.0 || self.partials.iter().any(|&j| s.contains(j)) {
            return 0.0;
        }
        let r = self.partials.len();
        let mut total = 0.0;
        for mask in 0u32..1 << r {
            let mut t = s.clone();
            for (i, &j) in self.partials.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    t = t.with(j);
                }
            }
            let v = self.base_value(mu, &t);
            if mask.count_ones() % 2 == 0 {
                total += v;
            } else {
                total -= v;
            }
        }
        self.factor * total
    }

    /// `√|M| · α(μ, S)`: the value with the family normalisation removed, so
    /// that very large families do not underflow.
    pub fn normalized_value(&self, mu: &Matching, s: &SiteSet) -> f64 {
        let params = ProblemParams { n: self.n, q: 2, variant: self.variant };
        self.value(mu, s) * params.sqrt_family_size()
    }

    /// Nonzero entries `(S, α(μ, S))` for one matching, `S ⊆ [3n]`.
    pub fn terms(&self, mu: &Matching) -> Vec<(SiteSet, f64)> {
        let mut out = Vec::new();
        if self.is_zero() {
            return out;
        }
        let ground: Vec<usize> = (0..3 * self.n).collect();
        for_each_subset_up_to(&ground, self.support_bound(), |s| {
            let v = self.value(mu, s);
            if v != 0.0 {
                out.push((s.clone(), v));
            }
        });
        out
    }

    /// Number of candidate sets `S` per matching in [`Self::terms`].
    pub fn term_budget(&self) -> u128 {
        count_subsets_up_to(3 * self.n, self.support_bound())
    }

    /// `c · α`.
    pub fn scaled(&self, c: f64) -> Result<DualSolution> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParams(format!("scale factor {c} must be finite and ≥ 0")));
        }
        Ok(DualSolution { factor: self.factor * c, ..self.clone() })
    }

    /// Materialises the solution as an explicit table.
    pub fn to_table(&self) -> Result<DualSolution> {
        let params = ProblemParams { n: self.n, q: 2, variant: self.variant };
        let mut entries = Vec::new();
        for mu in enumerate_matchings(&params)? {
            for (s, v) in self.terms(&mu) {
                entries.push((mu.clone(), s, v));
            }
        }
        table(self.n, self.variant, self.cutoff, entries)
    }

    fn params(&self) -> ProblemParams {
        ProblemParams { n: self.n, q: 2, variant: self.variant }
    }
}

/// `∂_j α`: `α(μ,S) − α(μ,S∪{j})` for `j ∉ S`, `0` for `j ∈ S`.
pub fn partial(alpha: &DualSolution, j: usize) -> Result<DualSolution> {
    if j >= 3 * alpha.n {
        return Err(Error::InvalidParams(format!("site {j} outside [0, {})", 3 * alpha.n)));
    }
    let mut out = alpha.clone();
    if !out.partials.contains(&j) {
        out.partials.push(j);
        out.partials.sort_unstable();
    }
    Ok(out)
}

/// Objective `√(Σ_μ α(μ, ∅)²)`.
pub fn objective(alpha: &DualSolution) -> Result<f64> {
    if alpha.is_zero() {
        return Ok(0.0);
    }
    if let (Base::Profile { threshold, scale, .. }, true) = (&alpha.base, alpha.partials.is_empty()) {
        // ∅ is never a certificate, so every matching contributes f(0)².
        let f0 = DualSolution::profile_at(*threshold, *scale, 0);
        return Ok(alpha.factor * f0 * alpha.params().sqrt_family_size());
    }
    let empty = SiteSet::empty();
    let mut sum = 0.0;
    for mu in enumerate_matchings(&alpha.params())? {
        sum += alpha.value(&mu, &empty).powi(2);
    }
    Ok(sum.sqrt())
}

/// `‖α‖ = max_S √(Σ_μ α(μ,S)²)`.
///
/// Profile solutions with at most one derivative use the counting route
/// ([`ProfileSums`]); everything else goes through [`norm_exhaustive`].
pub fn norm(alpha: &DualSolution) -> Result<f64> {
    if alpha.is_zero() {
        return Ok(0.0);
    }
    match (&alpha.base, alpha.partials.as_slice()) {
        (Base::Profile { .. }, []) => Ok(ProfileSums::new(alpha)?.norm_sq().sqrt()),
        (Base::Profile { .. }, [j]) => Ok(ProfileSums::new(alpha)?.partial_norm_sq(*j).sqrt()),
        _ => norm_exhaustive(alpha),
    }
}

/// Feasibility value `max_{S, j∉S} Σ_μ (∂_jα(μ,S))²`.
pub fn feasibility_max(alpha: &DualSolution) -> Result<f64> {
    if alpha.is_zero() {
        return Ok(0.0);
    }
    match (&alpha.base, alpha.partials.is_empty()) {
        (Base::Profile { .. }, true) => Ok(ProfileSums::new(alpha)?.feasibility()),
        _ => feasibility_max_exhaustive(alpha),
    }
}

fn exhaustive_setup(alpha: &DualSolution, extra: usize) -> Result<(Vec<Matching>, usize)> {
    let matchings: Vec<Matching> = enumerate_matchings(&alpha.params())?.collect();
    let max_size = alpha.support_bound();
    let work = count_subsets_up_to(3 * alpha.n, max_size)
        .saturating_mul(matchings.len() as u128)
        .saturating_mul(extra.max(1) as u128);
    if work > EXHAUSTIVE_BUDGET {
        return Err(Error::Size { what: "exhaustive dual scan", requested: work, limit: EXHAUSTIVE_BUDGET });
    }
    Ok((matchings, max_size))
}

/// `‖α‖` by direct evaluation over every `(μ, S)` with `|S|` up to the support bound.
pub fn norm_exhaustive(alpha: &DualSolution) -> Result<f64> {
    let (matchings, max_size) = exhaustive_setup(alpha, 1)?;
    let ground: Vec<usize> = (0..3 * alpha.n).collect();
    let mut best: f64 = 0.0;
    for_each_subset_up_to(&ground, max_size, |s| {
        let sum: f64 = matchings.iter().map(|mu| alpha.value(mu, s).powi(2)).sum();
        best = best.max(sum);
    });
    Ok(best.sqrt())
}

/// Feasibility value by direct evaluation of `∂_jα` over every `(μ, S, j)`.
pub fn feasibility_max_exhaustive(alpha: &DualSolution) -> Result<f64> {
    let m = 3 * alpha.n;
    let (matchings, max_size) = exhaustive_setup(alpha, m)?;
    let ground: Vec<usize> = (0..m).collect();
    let mut best: f64 = 0.0;
    for_each_subset_up_to(&ground, max_size, |s| {
        for j in (0..m).filter(|&j| !s.contains(j)) {
            let sj = s.with(j);
            let sum: f64 = matchings.iter().map(|mu| (alpha.value(mu, s) - alpha.value(mu, &sj)).powi(2)).sum();
            best = best.max(sum);
        }
    });
    Ok(best)
}

/// `α / max(1, √feasibility_max(α))`.
pub fn normalize_feasible(alpha: &DualSolution) -> Result<DualSolution> {
    let f = feasibility_max(alpha)?;
    alpha.scaled(1.0 / f.sqrt().max(1.0))
}

/// Counting route for profile solutions.
///
/// For each `S` up to the support bound and each matching with `S ∉ M_μ`,
/// only the set `J₁(μ,S)` of sites completing a certificate matters:
/// `Σ_μ (α(S) − α(S∪j))² = N₀·(f(s) − f(s+1))² + N₁·f(s)²`, where `N₁` counts
/// the matchings with `j ∈ J₁(μ,S)` and `N₀` the other off-certificate ones.
pub struct ProfileSums {
    /// Per `S`: `(S, N_off, count1[j] for every site j)`.
    rows: Vec<(SiteSet, usize, Vec<usize>)>,
    f: Vec<f64>,
    m: usize,
}

impl ProfileSums {
    pub fn new(alpha: &DualSolution) -> Result<Self> {
        let Base::Profile { threshold, scale, structure } = alpha.base else {
            return Err(Error::UnsupportedVariant("counting route needs a profile solution".into()));
        };
        let m = 3 * alpha.n;
        let (matchings, max_size) = exhaustive_setup(alpha, 1)?;
        let f: Vec<f64> =
            (0..=max_size + 1).map(|s| alpha.factor * DualSolution::profile_at(threshold, scale, s)).collect();
        let ground: Vec<usize> = (0..m).collect();
        let mut rows = Vec::new();
        for_each_subset_up_to(&ground, max_size, |s| {
            let mut n_off = 0;
            let mut count1 = vec![0usize; m];
            for mu in &matchings {
                if in_certificate(s, mu, structure) {
                    continue;
                }
                n_off += 1;
                completing_sites(s, mu, structure, |j| count1[j] += 1);
            }
            rows.push((s.clone(), n_off, count1));
        });
        Ok(ProfileSums { rows, f, m })
    }

    fn pair_sum(&self, s: usize, n_off: usize, c1: usize) -> f64 {
        let (fs, fs1) = (self.f[s], self.f[s + 1]);
        (n_off - c1) as f64 * (fs - fs1).powi(2) + c1 as f64 * fs * fs
    }

    pub fn norm_sq(&self) -> f64 {
        self.rows.iter().map(|(s, n_off, _)| *n_off as f64 * self.f[s.len()].powi(2)).fold(0.0, f64::max)
    }

    /// `‖∂_jα‖²`.
    pub fn partial_norm_sq(&self, j: usize) -> f64 {
        self.rows
            .iter()
            .filter(|(s, ..)| !s.contains(j))
            .map(|(s, n_off, c1)| self.pair_sum(s.len(), *n_off, c1[j]))
            .fold(0.0, f64::max)
    }

    pub fn feasibility(&self) -> f64 {
        (0..self.m).map(|j| self.partial_norm_sq(j)).fold(0.0, f64::max)
    }
}

/// Calls `f(j)` for each site `j ∉ S` with `S ∪ {j} ∈ M_μ`, assuming `S ∉ M_μ`.
fn completing_sites(s: &SiteSet, mu: &Matching, structure: Structure, mut f: impl FnMut(usize)) {
    let need = structure.hits_needed() - 1;
    let mut owners: Vec<usize> = s.iter().map(|x| mu.owner(x)).collect();
    owners.sort_unstable();
    owners.dedup();
    for o in owners {
        let t: &Triple = &mu.triples()[o];
        let hits = t.sites().iter().filter(|&&x| s.contains(x)).count();
        if hits == need {
            for x in t.sites() {
                if !s.contains(x) {
                    f(x);
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    matching: Matching,
    set: SiteSet,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct DualSolutionJson {
    kind: Kind,
    n: usize,
    variant: Variant,
    #[serde(rename = "K")]
    cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    partials: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<TableEntry>>,
}

impl Serialize for DualSolution {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = match &self.base {
            Base::Table(map) => {
                let mut e: Vec<TableEntry> = map
                    .iter()
                    .flat_map(|(mu, m)| {
                        m.iter().map(|(s, &v)| TableEntry { matching: mu.clone(), set: s.clone(), value: v })
                    })
                    .collect();
                e.sort_by(|a, b| (a.matching.triples(), &a.set).cmp(&(b.matching.triples(), &b.set)));
                Some(e)
            }
            Base::Zero => Some(Vec::new()),
            Base::Profile { .. } => None,
        };
        DualSolutionJson {
            kind: self.kind.clone(),
            n: self.n,
            variant: self.variant,
            cutoff: self.cutoff,
            scale: (self.factor != 1.0).then_some(self.factor),
            partials: self.partials.clone(),
            entries,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DualSolution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = DualSolutionJson::deserialize(de)?;
        let mut base = match j.kind {
            Kind::AlphaMm => alpha_matching(j.n, j.variant),
            Kind::AlphaShiftPrime if j.variant == Variant::Shift => alpha_shift_prime(j.n),
            Kind::AlphaShiftPrime => return Err(D::Error::custom("alpha_shift_prime is a shift solution")),
            Kind::Table => {
                let entries = j.entries.unwrap_or_default();
                if entries.is_empty() {
                    zero(j.n, j.variant)
                } else {
                    table(j.n, j.variant, j.cutoff, entries.into_iter().map(|e| (e.matching, e.set, e.value)))
                        .map_err(D::Error::custom)?
                }
            }
        };
        if j.kind != Kind::Table && base.cutoff != j.cutoff {
            return Err(D::Error::custom(format!("K = {} does not match the built-in {}", j.cutoff, base.cutoff)));
        }
        base.cutoff = j.cutoff;
        for p in j.partials {
            base = partial(&base, p).map_err(D::Error::custom)?;
        }
        base.scaled(j.scale.unwrap_or(1.0)).map_err(D::Error::custom)
    }
}
