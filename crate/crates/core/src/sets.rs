//! Small sorted index sets over the sites `0..3n`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of sites, stored sorted and without repetition.
///
/// Dual solutions are supported on sets of size at most the cutoff `K`, so
/// the sets handled here are short; a sorted vector beats a bitset on both
/// memory and lookup for those sizes and has no upper bound on `n`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteSet(Vec<usize>);

impl SiteSet {
    pub fn empty() -> Self {
        SiteSet(Vec::new())
    }

    pub fn from_sites<I: IntoIterator<Item = usize>>(sites: I) -> Self {
        let mut v: Vec<usize> = sites.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SiteSet(v)
    }

    /// Sites whose bits are set in `mask`.
    pub fn from_mask(mask: u64) -> Self {
        SiteSet((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    /// Bitmask of the set; `None` if a site does not fit in 64 bits.
    pub fn to_mask(&self) -> Option<u64> {
        self.0.iter().try_fold(0u64, |m, &s| (s < 64).then(|| m | 1 << s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `self ∪ {site}`.
    pub fn with(&self, site: usize) -> Self {
        match self.0.binary_search(&site) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, site);
                SiteSet(v)
            }
        }
    }

    /// `self ∖ {site}`.
    pub fn without(&self, site: usize) -> Self {
        match self.0.binary_search(&site) {
            Ok(pos) => {
                let mut v = self.0.clone();
                v.remove(pos);
                SiteSet(v)
            }
            Err(_) => self.clone(),
        }
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.iter().all(|s| other.contains(s))
    }
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl FromIterator<usize> for SiteSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SiteSet::from_sites(iter)
    }
}

/// Calls `f` on every subset of `ground` with at most `max_size` elements,
/// in order of increasing size.
pub fn for_each_subset_up_to(ground: &[usize], max_size: usize, mut f: impl FnMut(&SiteSet)) {
    let max_size = max_size.min(ground.len());
    for size in 0..=max_size {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            f(&SiteSet(idx.iter().map(|&i| ground[i]).collect()));
            // advance to the next combination in lexicographic order
            let mut i = size;
            while i > 0 && idx[i - 1] == ground.len() - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for k in i..size {
                idx[k] = idx[k - 1] + 1;
            }
        }
    }
}

/// Number of subsets of an `m`-set with at most `k` elements (saturating).
pub fn count_subsets_up_to(m: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for j in 0..=k.min(m) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((m - j) as u128) / (j as u128 + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn with_and_without_keep_order() {
        let s = SiteSet::from_sites([5, 1, 3]);
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        assert_eq!(s.with(2).as_slice(), &[1, 2, 3, 5]);
        assert_eq!(s.with(3), s);
        assert_eq!(s.without(1).as_slice(), &[3, 5]);
        assert_eq!(s.without(4), s);
    }

    #[test]
    fn mask_round_trip() {
        let s = SiteSet::from_sites([0, 4, 63]);
        assert_eq!(SiteSet::from_mask(s.to_mask().unwrap()), s);
        assert_eq!(SiteSet::from_sites([64]).to_mask(), None);
    }

    #[test]
    fn subset_enumeration_counts() {
        let ground: Vec<usize> = (0..7).collect();
        for k in 0..=7 {
            let mut seen = std::collections::HashSet::new();
            for_each_subset_up_to(&ground, k, |s| {
                assert!(s.len() <= k);
                assert!(seen.insert(s.clone()));
            });
            assert_eq!(seen.len() as u128, count_subsets_up_to(7, k));
        }
        let mut none = 0;
        for_each_subset_up_to(&[], 3, |_| none += 1);
        assert_eq!(none, 1);
    }
}
