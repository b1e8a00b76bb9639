//! Integer partitions and symmetric-group characters.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams(format!("{parts:?} is not non-increasing")));
        }
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of boxes below the first row, `m − λ_1`.
    pub fn k_below(&self) -> usize {
        self.size() - self.parts.first().copied().unwrap_or(0)
    }

    /// Dimension of the irrep, by the hook length formula.
    pub fn dim(&self) -> u128 {
        let m = self.size();
        let cols: Vec<usize> = (0..self.parts.first().copied().unwrap_or(0))
            .map(|c| self.parts.iter().filter(|&&p| p > c).count())
            .collect();
        // multiply and divide alternately to stay exact without overflow for m ≤ 30
        let mut hooks: Vec<u128> = Vec::with_capacity(m);
        for (r, &len) in self.parts.iter().enumerate() {
            for (c, &col) in cols.iter().enumerate().take(len) {
                hooks.push((len - c - 1 + col - r - 1 + 1) as u128);
            }
        }
        let mut num: u128 = 1;
        for k in 1..=m as u128 {
            num *= k;
            if let Some(pos) = hooks.iter().position(|&h| num.is_multiple_of(h)) {
                num /= hooks.swap_remove(pos);
            }
        }
        for h in hooks {
            num /= h;
        }
        num
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// Partitions of `m` in reverse lexicographic order, optionally only those
/// with exactly `k` boxes below the first row.
pub fn partitions(m: usize, k_below: Option<usize>) -> Vec<Partition> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, m, &mut Vec::new(), &mut out);
    out.into_iter().map(|parts| Partition { parts }).filter(|p| k_below.is_none_or(|k| p.k_below() == k)).collect()
}

/// Cycle type of a permutation, as a non-increasing list.
pub fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

type Memo = HashMap<(Vec<usize>, Vec<usize>), i64>;

static MEMO: Mutex<Option<Memo>> = Mutex::new(None);

/// `χ_λ` on the class of the given cycle type (Murnaghan–Nakayama rule).
pub fn character(lambda: &Partition, cycle: &[usize]) -> Result<i64> {
    if cycle.iter().sum::<usize>() != lambda.size() || cycle.contains(&0) {
        return Err(Error::InvalidParams(format!("cycle type {cycle:?} is not a partition of {}", lambda.size())));
    }
    let mut cycle = cycle.to_vec();
    cycle.sort_unstable_by(|a, b| b.cmp(a));
    let mut guard = MEMO.lock().unwrap_or_else(|e| e.into_inner());
    let memo = guard.get_or_insert_with(HashMap::new);
    Ok(mn(lambda.parts.clone(), &cycle, memo))
}

/// Removes border strips of length `cycle[0]` in the beta-number picture:
/// each strip is a bead moved `r` positions down onto a free spot, with sign
/// `(−1)^{beads jumped}`.
fn mn(parts: Vec<usize>, cycle: &[usize], memo: &mut Memo) -> i64 {
    let Some((&r, rest)) = cycle.split_first() else {
        return 1;
    };
    let key = (parts.clone(), cycle.to_vec());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let t = parts.len();
    let beta: Vec<usize> = parts.iter().enumerate().map(|(i, &p)| p + t - 1 - i).collect();
    let mut total = 0;
    for i in 0..t {
        let Some(target) = beta[i].checked_sub(r) else { continue };
        if beta.contains(&target) {
            continue;
        }
        let jumped = beta.iter().filter(|&&b| b > target && b < beta[i]).count();
        let mut nb = beta.clone();
        nb[i] = target;
        nb.sort_unstable_by(|a, b| b.cmp(a));
        let len = nb.len();
        let np: Vec<usize> = nb.iter().enumerate().map(|(k, &b)| b - (len - 1 - k)).filter(|&p| p > 0).collect();
        let v = mn(np, rest, memo);
        total += if jumped % 2 == 0 { v } else { -v };
    }
    memo.insert(key, total);
    total
}
