//! Instance spaces of the 3-shift-sum and 3-matching-sum problems.
//!
//! Sites are 0-based: group `A` is `0..n`, `B` is `n..2n`, `C` is `2n..3n`.
//! Residues are stored as integers in `0..q`. An input string is identified
//! with its row-major index in `[q]^{3n}`, site 0 being the most significant
//! digit.

use std::collections::HashSet;
use std::ops::Range;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest `n` for which the `n²` shift matchings are enumerated.
pub const SHIFT_ENUMERATION_LIMIT: usize = 10_000;
/// Largest `n` for which the `(n!)²` matchings are enumerated.
pub const MATCHING_ENUMERATION_LIMIT: usize = 6;
/// Default cap on the number of input strings an exhaustive oracle may visit.
pub const DEFAULT_INPUT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Shift,
    Matching,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Shift => "shift",
            Variant::Matching => "matching",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shift" => Ok(Variant::Shift),
            "matching" => Ok(Variant::Matching),
            other => Err(Error::UnsupportedVariant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub q: u32,
    pub variant: Variant,
}

impl ProblemParams {
    pub fn new(n: usize, q: u32, variant: Variant) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if q < 2 {
            return Err(Error::InvalidParams(format!("q must be at least 2, got {q}")));
        }
        Ok(ProblemParams { n, q, variant })
    }

    pub fn sites(&self) -> usize {
        3 * self.n
    }

    pub fn group_of(&self, site: usize) -> Group {
        assert!(site < self.sites(), "site {site} out of range");
        match site / self.n {
            0 => Group::A,
            1 => Group::B,
            _ => Group::C,
        }
    }

    pub fn group_range(&self, group: Group) -> Range<usize> {
        let n = self.n;
        match group {
            Group::A => 0..n,
            Group::B => n..2 * n,
            Group::C => 2 * n..3 * n,
        }
    }

    /// `q^{3n}`, if it fits in 128 bits.
    pub fn universe_size(&self) -> Option<u128> {
        (self.q as u128).checked_pow(self.sites() as u32)
    }

    /// `q^{2n}`: the number of positive inputs of a fixed form.
    pub fn positive_block_size(&self) -> Option<u128> {
        (self.q as u128).checked_pow(2 * self.n as u32)
    }

    /// Whether `q ≥ 2n³`, the alphabet assumption of the lower-bound theorems.
    pub fn hypothesis_holds(&self) -> bool {
        let n3 = (self.n as u128).pow(3);
        self.q as u128 >= 2 * n3
    }

    /// `|M_s| = n²` or `|M_m| = (n!)²`, exactly when it fits.
    pub fn family_size_exact(&self) -> Option<u128> {
        match self.variant {
            Variant::Shift => (self.n as u128).checked_mul(self.n as u128),
            Variant::Matching => {
                let f = (1..=self.n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))?;
                f.checked_mul(f)
            }
        }
    }

    /// `√|M_q|` in floating point; infinite when the family is astronomically large.
    pub fn sqrt_family_size(&self) -> f64 {
        match self.variant {
            Variant::Shift => self.n as f64,
            Variant::Matching => (1..=self.n).map(|k| k as f64).product(),
        }
    }

    fn check_budget(&self, count: Option<u128>, budget: u128, what: &'static str) -> Result<usize> {
        match count {
            Some(c) if c <= budget && c <= usize::MAX as u128 => Ok(c as usize),
            other => Err(Error::Size { what, requested: other.unwrap_or(u128::MAX), limit: budget }),
        }
    }
}

/// One triple `{a, b, c}` with `a ∈ A`, `b ∈ B`, `c ∈ C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Triple {
    pub fn sites(&self) -> [usize; 3] {
        [self.a, self.b, self.c]
    }

    pub fn contains(&self, site: usize) -> bool {
        self.a == site || self.b == site || self.c == site
    }
}

/// A 3-dimensional matching: `n` disjoint triples covering `[3n]`, stored with
/// triple `i` holding `a = i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatchingRepr", into = "MatchingRepr")]
pub struct Matching {
    triples: Vec<Triple>,
    shift: Option<(usize, usize)>,
    /// `owner[site]` is the index of the triple containing `site`.
    owner: Vec<usize>,
}

impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Matching {}

impl std::hash::Hash for Matching {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.triples.hash(state);
    }
}

#[derive(Serialize, Deserialize)]
struct MatchingRepr {
    triples: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shift: Option<[usize; 2]>,
}

impl From<Matching> for MatchingRepr {
    fn from(m: Matching) -> Self {
        MatchingRepr { triples: m.triples.iter().map(Triple::sites).collect(), shift: m.shift.map(|(b, c)| [b, c]) }
    }
}

impl TryFrom<MatchingRepr> for Matching {
    type Error = Error;

    fn try_from(r: MatchingRepr) -> Result<Self> {
        let n = r.triples.len();
        let triples = r.triples.into_iter().map(|[a, b, c]| Triple { a, b, c }).collect();
        let m = Matching::from_triples(n, triples)?;
        match r.shift {
            Some([b, c]) if m != Matching::shift(n, b, c) => {
                Err(Error::InvalidParams(format!("triples do not form the shift ({b}, {c})")))
            }
            Some([b, c]) => Ok(Matching::shift(n, b, c)),
            None => Ok(m),
        }
    }
}

impl Matching {
    /// The 3-shift with triples `{i, n + (i+b mod n), 2n + (i+c mod n)}`.
    pub fn shift(n: usize, b: usize, c: usize) -> Self {
        assert!(b < n && c < n, "shift offsets must lie in 0..n");
        let triples = (0..n).map(|i| Triple { a: i, b: n + (i + b) % n, c: 2 * n + (i + c) % n }).collect();
        Self::with_owner(n, triples, Some((b, c)))
    }

    /// Matching with triple `i = {i, n + pb[i], 2n + pc[i]}`.
    pub fn from_permutations(pb: &[usize], pc: &[usize]) -> Result<Self> {
        let n = pb.len();
        let triples = (0..n)
            .map(|i| Triple {
                a: i,
                b: n + *pb.get(i).unwrap_or(&usize::MAX),
                c: 2 * n + *pc.get(i).unwrap_or(&usize::MAX),
            })
            .collect();
        if pc.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: pc.len() });
        }
        Self::from_triples(n, triples)
    }

    /// Validates `triples` and puts them in canonical order.
    pub fn from_triples(n: usize, mut triples: Vec<Triple>) -> Result<Self> {
        if triples.len() != n || n == 0 {
            return Err(Error::InvalidParams(format!(
                "a matching of [3·{n}] needs {n} triples, got {}",
                triples.len()
            )));
        }
        let mut seen = vec![false; 3 * n];
        for t in &triples {
            let ok = t.a < n && (n..2 * n).contains(&t.b) && (2 * n..3 * n).contains(&t.c);
            if !ok {
                return Err(Error::InvalidParams(format!("triple {t:?} does not take one site from each group")));
            }
            for s in t.sites() {
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidParams(format!("site {s} covered twice")));
                }
            }
        }
        triples.sort_by_key(|t| t.a);
        Ok(Self::with_owner(n, triples, None))
    }

    fn with_owner(n: usize, triples: Vec<Triple>, shift: Option<(usize, usize)>) -> Self {
        let mut owner = vec![0; 3 * n];
        for (i, t) in triples.iter().enumerate() {
            for s in t.sites() {
                owner[s] = i;
            }
        }
        Matching { triples, shift, owner }
    }

    pub fn n(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// `(b, c)` when the matching was built as a 3-shift.
    pub fn shift_label(&self) -> Option<(usize, usize)> {
        self.shift
    }

    /// Index of the triple containing `site`.
    pub fn owner(&self, site: usize) -> usize {
        self.owner[site]
    }

    pub fn triple_of(&self, site: usize) -> &Triple {
        &self.triples[self.owner[site]]
    }

    /// Whether the triples form one of the `n²` 3-shifts.
    pub fn is_shift(&self) -> bool {
        let n = self.n();
        let b = (self.triples[0].b - n) % n;
        let c = (self.triples[0].c - 2 * n) % n;
        self.triples == Matching::shift(n, b, c).triples
    }

    /// Checks the matching invariants directly from the triples.
    pub fn validate(&self) -> Result<()> {
        Matching::from_triples(self.n(), self.triples.clone()).map(|_| ())
    }
}

/// Streaming enumeration of `M_s` (indexed by `(b, c)`, `b` major) or `M_m`
/// (lexicographic in the two permutations).
pub struct Matchings {
    n: usize,
    next: usize,
    total: usize,
    perms: Option<Vec<Vec<usize>>>,
}

impl Iterator for Matchings {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.next >= self.total {
            return None;
        }
        let k = self.next;
        self.next += 1;
        Some(match &self.perms {
            None => Matching::shift(self.n, k / self.n, k % self.n),
            Some(perms) => {
                let (pb, pc) = (&perms[k / perms.len()], &perms[k % perms.len()]);
                Matching::from_permutations(pb, pc).expect("permutations give a matching")
            }
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Matchings {}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

/// Enumerates the matching family `M_q` of the variant.
pub fn enumerate_matchings(params: &ProblemParams) -> Result<Matchings> {
    let n = params.n;
    match params.variant {
        Variant::Shift => {
            if n > SHIFT_ENUMERATION_LIMIT {
                return Err(Error::Size {
                    what: "shift enumeration (n)",
                    requested: n as u128,
                    limit: SHIFT_ENUMERATION_LIMIT as u128,
                });
            }
            Ok(Matchings { n, next: 0, total: n * n, perms: None })
        }
        Variant::Matching => {
            if n > MATCHING_ENUMERATION_LIMIT {
                return Err(Error::Size {
                    what: "matching enumeration (n)",
                    requested: n as u128,
                    limit: MATCHING_ENUMERATION_LIMIT as u128,
                });
            }
            let perms = permutations(n);
            Ok(Matchings { n, next: 0, total: perms.len() * perms.len(), perms: Some(perms) })
        }
    }
}

/// Uniformly random member of the variant's matching family.
pub fn random_matching<R: Rng + ?Sized>(params: &ProblemParams, rng: &mut R) -> Matching {
    let n = params.n;
    match params.variant {
        Variant::Shift => Matching::shift(n, rng.gen_range(0..n), rng.gen_range(0..n)),
        Variant::Matching => {
            let pb = random_permutation(n, rng);
            let pc = random_permutation(n, rng);
            Matching::from_permutations(&pb, &pc).expect("permutations give a matching")
        }
    }
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

/// A string in `[q]^{3n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputString {
    values: Vec<u32>,
}

impl InputString {
    pub fn new(values: Vec<u32>, params: &ProblemParams) -> Result<Self> {
        if values.len() != params.sites() {
            return Err(Error::DimensionMismatch { expected: params.sites(), got: values.len() });
        }
        if let Some(v) = values.iter().find(|&&v| v >= params.q) {
            return Err(Error::InvalidParams(format!("residue {v} outside [0, {})", params.q)));
        }
        Ok(InputString { values })
    }

    pub fn zeros(params: &ProblemParams) -> Self {
        InputString { values: vec![0; params.sites()] }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, site: usize) -> u32 {
        self.values[site]
    }

    /// Row-major index in `[q]^{3n}`.
    pub fn index(&self, q: u32) -> u128 {
        self.values.iter().fold(0u128, |acc, &v| acc * q as u128 + v as u128)
    }

    pub fn from_index(mut index: u128, params: &ProblemParams) -> Self {
        let q = params.q as u128;
        let mut values = vec![0u32; params.sites()];
        for v in values.iter_mut().rev() {
            *v = (index % q) as u32;
            index /= q;
        }
        InputString { values }
    }
}

/// `x_a + x_b + x_c ≡ 0 (mod q)` for every triple of `mu`.
pub fn is_positive_form(x: &InputString, mu: &Matching, params: &ProblemParams) -> bool {
    let q = params.q as u64;
    mu.triples().iter().all(|t| {
        let s: u64 = t.sites().iter().map(|&i| x.get(i) as u64).sum();
        s.is_multiple_of(q)
    })
}

/// No cross triple `(a, b, c) ∈ A × B × C` sums to zero modulo `q`.
pub fn is_negative(x: &InputString, params: &ProblemParams) -> bool {
    let q = params.q as u64;
    let v = x.values();
    let (a, b, c) =
        (&v[params.group_range(Group::A)], &v[params.group_range(Group::B)], &v[params.group_range(Group::C)]);
    let c_values: HashSet<u64> = c.iter().map(|&z| z as u64).collect();
    for &xa in a {
        for &xb in b {
            let need = (2 * q - xa as u64 - xb as u64) % q;
            if c_values.contains(&need) {
                return false;
            }
        }
    }
    true
}

/// Which side of the promise an input lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Positive,
    Negative,
    /// Neither of a form in the family nor negative (excluded by the promise).
    Neither,
}

/// Classifies `x` against the variant's family, enumerating it.
pub fn classify(x: &InputString, params: &ProblemParams) -> Result<Classification> {
    if is_negative(x, params) {
        return Ok(Classification::Negative);
    }
    for mu in enumerate_matchings(params)? {
        if is_positive_form(x, &mu, params) {
            return Ok(Classification::Positive);
        }
    }
    Ok(Classification::Neither)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputClass {
    All,
    PositiveOf(Matching),
    Negative,
}

/// Exhaustive enumeration of `U`, `P^μ` or `N`, in row-major order.
///
/// `P^μ` is listed in the row order used by the adversary matrices: the free
/// coordinates `(x_B, x_C)` run row-major and `x_A` is forced.
pub fn enumerate_inputs(
    params: &ProblemParams,
    class: InputClass,
    budget: u128,
) -> Result<Box<dyn Iterator<Item = InputString>>> {
    let p = *params;
    match class {
        InputClass::All | InputClass::Negative => {
            let total = p.check_budget(p.universe_size(), budget, "input enumeration")?;
            let all = (0..total).map(move |i| InputString::from_index(i as u128, &p));
            if class == InputClass::Negative {
                Ok(Box::new(all.filter(move |x| is_negative(x, &p))))
            } else {
                Ok(Box::new(all))
            }
        }
        InputClass::PositiveOf(mu) => {
            if mu.n() != p.n {
                return Err(Error::DimensionMismatch { expected: p.n, got: mu.n() });
            }
            let total = p.check_budget(p.positive_block_size(), budget, "positive enumeration")?;
            Ok(Box::new((0..total).map(move |r| positive_of_row(&mu, r, &p))))
        }
    }
}

/// The `row`-th positive input of form `mu` (free coordinates `x_B, x_C`
/// read row-major from `row`).
pub fn positive_of_row(mu: &Matching, mut row: usize, params: &ProblemParams) -> InputString {
    let q = params.q as usize;
    let n = params.n;
    let mut values = vec![0u32; 3 * n];
    for site in (n..3 * n).rev() {
        values[site] = (row % q) as u32;
        row /= q;
    }
    complete_row_a(&mut values, mu, params.q);
    InputString { values }
}

fn complete_row_a(values: &mut [u32], mu: &Matching, q: u32) {
    let q = q as u64;
    for t in mu.triples() {
        let s = values[t.b] as u64 + values[t.c] as u64;
        values[t.a] = ((q - s % q) % q) as u32;
    }
}

/// Row-major indices of all negative inputs, ascending.
pub fn negative_indices(params: &ProblemParams, budget: u128) -> Result<Vec<usize>> {
    let total = params.check_budget(params.universe_size(), budget, "negative enumeration")?;
    let m = params.sites();
    let q = params.q;
    let mut digits = vec![0u32; m];
    let mut out = Vec::new();
    let mut x = InputString { values: vec![0; m] };
    for idx in 0..total {
        x.values.copy_from_slice(&digits);
        if is_negative(&x, params) {
            out.push(idx);
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// Uniform sample from `P^μ`.
pub fn sample_positive(mu: &Matching, params: &ProblemParams, seed: u64) -> InputString {
    sample_positive_with(mu, params, &mut rng::root(seed))
}

pub fn sample_positive_with<R: Rng + ?Sized>(mu: &Matching, params: &ProblemParams, rng: &mut R) -> InputString {
    let n = params.n;
    let mut values = vec![0u32; 3 * n];
    for v in &mut values[n..] {
        *v = rng.gen_range(0..params.q);
    }
    complete_row_a(&mut values, mu, params.q);
    InputString { values }
}

/// Union bound `max(0, 1 − n³/q)` on the fraction of negative inputs.
pub fn negative_density_bound(params: &ProblemParams) -> Ratio<u128> {
    let n3 = (params.n as u128).pow(3);
    let q = params.q as u128;
    if n3 >= q {
        Ratio::from_integer(0)
    } else {
        Ratio::new(q - n3, q)
    }
}

/// Minimum over the `n²` shifts `(b, c)` of the relative Hamming distance
/// between row `A` and the xor of rows `B` and `C` shifted by `b` and `c`.
///
/// Only defined for the Boolean alphabet.
pub fn min_shift_xor_distance(x: &InputString, params: &ProblemParams) -> Result<Ratio<usize>> {
    if params.q != 2 {
        return Err(Error::UnsupportedVariant(format!("xor distance needs q = 2, got q = {}", params.q)));
    }
    if x.values().len() != params.sites() {
        return Err(Error::DimensionMismatch { expected: params.sites(), got: x.values().len() });
    }
    let n = params.n;
    let words = n.div_ceil(64);
    let pack = |bits: &mut dyn Iterator<Item = u32>| {
        let mut w = vec![0u64; words];
        for (i, bit) in bits.enumerate() {
            w[i / 64] |= (bit as u64 & 1) << (i % 64);
        }
        w
    };
    let v = x.values();
    let row_a = pack(&mut v[..n].iter().copied());
    // rotations[b][i] = row[(i + b) mod n]
    let rotations =
        |row: &[u32]| -> Vec<Vec<u64>> { (0..n).map(|b| pack(&mut (0..n).map(|i| row[(i + b) % n]))).collect() };
    let rot_b = rotations(&v[n..2 * n]);
    let rot_c = rotations(&v[2 * n..]);
    let mut best = n;
    let mut scratch = vec![0u64; words];
    for rb in &rot_b {
        for (s, (a, b)) in scratch.iter_mut().zip(row_a.iter().zip(rb)) {
            *s = a ^ b;
        }
        for rc in &rot_c {
            let d: u32 = scratch.iter().zip(rc).map(|(s, c)| (s ^ c).count_ones()).sum();
            best = best.min(d as usize);
        }
        if best == 0 {
            break;
        }
    }
    Ok(Ratio::new(best, n))
}

/// JSON instance record `{"n", "q", "variant", "x"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub q: u32,
    pub variant: Variant,
    pub x: Vec<u32>,
}

impl Instance {
    pub fn new(params: &ProblemParams, x: &InputString) -> Self {
        Instance { n: params.n, q: params.q, variant: params.variant, x: x.values().to_vec() }
    }

    pub fn decode(&self) -> Result<(ProblemParams, InputString)> {
        let params = ProblemParams::new(self.n, self.q, self.variant)?;
        let x = InputString::new(self.x.clone(), &params)?;
        Ok((params, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, q: u32, variant: Variant) -> ProblemParams {
        ProblemParams::new(n, q, variant).unwrap()
    }

    fn set_of(p: &ProblemParams) -> HashSet<Matching> {
        enumerate_matchings(p).unwrap().collect()
    }

    #[test]
    fn single_triple_for_n_one() {
        let all: Vec<_> = enumerate_matchings(&params(1, 3, Variant::Shift)).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].triples(), &[Triple { a: 0, b: 1, c: 2 }]);
    }

    #[test]
    fn shifts_and_matchings_coincide_at_two() {
        let s = set_of(&params(2, 3, Variant::Shift));
        let m = set_of(&params(2, 3, Variant::Matching));
        assert_eq!(s.len(), 4);
        assert_eq!(s, m);
    }

    #[test]
    fn family_sizes() {
        assert_eq!(set_of(&params(3, 3, Variant::Matching)).len(), 36);
        for n in 1..=5 {
            let shifts = set_of(&params(n, 2, Variant::Shift));
            let all = set_of(&params(n, 2, Variant::Matching));
            assert_eq!(shifts.len(), n * n);
            let f: usize = (1..=n).product();
            assert_eq!(all.len(), f * f);
            assert!(shifts.is_subset(&all));
            for mu in shifts.iter().chain(all.iter()) {
                mu.validate().unwrap();
                for t in mu.triples() {
                    let p = params(n, 2, Variant::Shift);
                    assert_eq!(p.group_of(t.a), Group::A);
                    assert_eq!(p.group_of(t.b), Group::B);
                    assert_eq!(p.group_of(t.c), Group::C);
                }
            }
            assert!(shifts.iter().all(Matching::is_shift));
        }
        assert_eq!(params(4, 2, Variant::Matching).family_size_exact(), Some(576));
    }

    #[test]
    fn enumeration_limits_are_errors() {
        assert!(matches!(enumerate_matchings(&params(7, 2, Variant::Matching)), Err(Error::Size { limit: 6, .. })));
        assert!(enumerate_matchings(&params(10_001, 2, Variant::Shift)).is_err());
        assert_eq!(enumerate_matchings(&params(10_000, 2, Variant::Shift)).unwrap().len(), 100_000_000);
    }

    #[test]
    fn shift_formula() {
        let mu = Matching::shift(5, 2, 4);
        for (i, t) in mu.triples().iter().enumerate() {
            assert_eq!(*t, Triple { a: i, b: 5 + (i + 2) % 5, c: 10 + (i + 4) % 5 });
        }
        assert_eq!(mu.owner(5 + 3), 1);
    }

    #[test]
    fn bad_triples_rejected() {
        let bad = vec![Triple { a: 0, b: 2, c: 3 }, Triple { a: 1, b: 2, c: 5 }];
        assert!(Matching::from_triples(2, bad).is_err());
        let cross = vec![Triple { a: 0, b: 1, c: 2 }];
        assert!(Matching::from_triples(1, cross).is_ok());
        assert!(Matching::from_triples(1, vec![Triple { a: 0, b: 2, c: 1 }]).is_err());
    }

    #[test]
    fn positive_and_negative_examples() {
        let p = params(1, 3, Variant::Shift);
        let mu = Matching::shift(1, 0, 0);
        let x = |v: Vec<u32>| InputString::new(v, &p).unwrap();
        assert!(is_positive_form(&InputString::zeros(&p), &mu, &p));
        assert!(is_positive_form(&x(vec![1, 1, 1]), &mu, &p));
        assert!(!is_positive_form(&x(vec![1, 1, 2]), &mu, &p));
        assert!(!is_negative(&InputString::zeros(&p), &p));
        assert!(is_negative(&x(vec![1, 1, 2]), &p));

        let p5 = params(2, 5, Variant::Shift);
        // cross triple (1, 1, 3) at sites (0, 3, 4)
        let y = InputString::new(vec![1, 0, 2, 1, 3, 4], &p5).unwrap();
        assert!(!is_negative(&y, &p5));
    }

    #[test]
    fn small_enumeration_counts() {
        let p = params(1, 3, Variant::Shift);
        assert_eq!(enumerate_inputs(&p, InputClass::All, DEFAULT_INPUT_BUDGET).unwrap().count(), 27);
        assert_eq!(enumerate_inputs(&p, InputClass::Negative, DEFAULT_INPUT_BUDGET).unwrap().count(), 18);

        let p5 = params(2, 5, Variant::Matching);
        let mu = Matching::shift(2, 1, 0);
        let pos: Vec<_> =
            enumerate_inputs(&p5, InputClass::PositiveOf(mu.clone()), DEFAULT_INPUT_BUDGET).unwrap().collect();
        assert_eq!(pos.len(), 625);
        assert!(pos.iter().all(|x| is_positive_form(x, &mu, &p5)));
        assert_eq!(pos.iter().collect::<HashSet<_>>().len(), 625);
    }

    #[test]
    fn budget_exceeded_is_an_error() {
        let p = params(2, 5, Variant::Shift);
        assert!(matches!(enumerate_inputs(&p, InputClass::All, 1000), Err(Error::Size { .. })));
        assert!(negative_indices(&p, 1000).is_err());
    }

    #[test]
    fn negative_indices_match_filter() {
        let p = params(2, 3, Variant::Shift);
        let fast = negative_indices(&p, DEFAULT_INPUT_BUDGET).unwrap();
        let slow: Vec<usize> = enumerate_inputs(&p, InputClass::Negative, DEFAULT_INPUT_BUDGET)
            .unwrap()
            .map(|x| x.index(3) as usize)
            .collect();
        assert_eq!(fast, slow);
    }

    #[test]
    fn index_round_trip() {
        let p = params(2, 7, Variant::Shift);
        for idx in [0u128, 1, 6, 7, 48, 117_648] {
            assert_eq!(InputString::from_index(idx, &p).index(7), idx);
        }
    }

    #[test]
    fn sampled_positives_have_form() {
        let p = params(3, 2, Variant::Matching);
        let mu = Matching::from_permutations(&[2, 0, 1], &[1, 2, 0]).unwrap();
        for seed in 0..50 {
            let x = sample_positive(&mu, &p, seed);
            assert!(is_positive_form(&x, &mu, &p));
            for t in mu.triples() {
                assert_eq!(x.get(t.a), x.get(t.b) ^ x.get(t.c));
            }
        }
    }

    #[test]
    fn density_bound_values() {
        assert_eq!(negative_density_bound(&params(2, 17, Variant::Shift)), Ratio::new(9, 17));
        assert_eq!(negative_density_bound(&params(1, 3, Variant::Shift)), Ratio::new(2, 3));
        assert_eq!(negative_density_bound(&params(2, 5, Variant::Shift)), Ratio::from_integer(0));
    }

    #[test]
    fn xor_distance_examples() {
        let p = params(1, 2, Variant::Shift);
        let x = InputString::new(vec![1, 0, 0], &p).unwrap();
        assert_eq!(min_shift_xor_distance(&x, &p).unwrap(), Ratio::from_integer(1));
        let p3 = params(1, 3, Variant::Shift);
        assert!(matches!(min_shift_xor_distance(&InputString::zeros(&p3), &p3), Err(Error::UnsupportedVariant(_))));
    }

    #[test]
    fn xor_distance_matches_naive_definition() {
        let p = params(70, 2, Variant::Shift);
        let mut r = rng::root(3);
        for _ in 0..5 {
            let x = InputString::new((0..210).map(|_| r.gen_range(0..2)).collect(), &p).unwrap();
            let naive = (0..70)
                .flat_map(|b| (0..70).map(move |c| (b, c)))
                .map(|(b, c)| {
                    (0..70).filter(|&i| x.get(i) != x.get(70 + (i + b) % 70) ^ x.get(140 + (i + c) % 70)).count()
                })
                .min()
                .unwrap();
            assert_eq!(min_shift_xor_distance(&x, &p).unwrap(), Ratio::new(naive, 70));
        }
    }

    #[test]
    fn matching_json_is_a_triple_list() {
        let mu = Matching::shift(2, 1, 0);
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(s, r#"{"triples":[[0,3,4],[1,2,5]],"shift":[1,0]}"#);
        let back: Matching = serde_json::from_str(&s).unwrap();
        assert_eq!(back.shift_label(), Some((1, 0)));
        assert!(serde_json::from_str::<Matching>(r#"{"triples":[[0,3,4],[1,3,5]]}"#).is_err());
    }

    #[test]
    fn instance_json() {
        let p = params(1, 3, Variant::Matching);
        let x = InputString::new(vec![1, 2, 0], &p).unwrap();
        let s = serde_json::to_string(&Instance::new(&p, &x)).unwrap();
        assert_eq!(s, r#"{"n":1,"q":3,"variant":"matching","x":[1,2,0]}"#);
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(back.decode().unwrap(), (p, x));
        let bad = Instance { x: vec![3, 0, 0], ..back };
        assert!(bad.decode().is_err());
    }
}
