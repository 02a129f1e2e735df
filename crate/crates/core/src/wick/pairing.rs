use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Serialize, Serializer};

use super::WickError;

/// Default ceiling on `2n` for explicit enumeration.
pub const DEFAULT_PAIRING_CAP: u32 = 12;

/// A perfect matching of `{1, ..., 2n}`, stored as `(a, b)` with `a < b`,
/// sorted by first index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    pairs: Vec<(u32, u32)>,
}

impl Pairing {
    /// Builds a pairing from arbitrary pairs, checking that they partition `{1..2n}`.
    pub fn new(pairs: impl IntoIterator<Item = (u32, u32)>) -> Option<Self> {
        let mut pairs: Vec<(u32, u32)> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        let n2 = 2 * pairs.len() as u32;
        let mut seen = vec![false; n2 as usize + 1];
        for &(a, b) in &pairs {
            if a == b || a == 0 || b > n2 || seen[a as usize] || seen[b as usize] {
                return None;
            }
            seen[a as usize] = true;
            seen[b as usize] = true;
        }
        Some(Self { pairs })
    }

    pub fn empty() -> Self {
        Self { pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({a},{b})")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Pairing {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `(2n)! / (2^n n!)`, exactly.
pub fn count_pairings(two_n: u32) -> Result<BigUint, WickError> {
    if two_n == 0 || two_n % 2 == 1 {
        return Err(WickError::OddOrder(two_n));
    }
    let mut acc = BigUint::one();
    for r in 1..=two_n / 2 {
        acc *= BigUint::from(2 * r - 1);
    }
    Ok(acc)
}

pub fn enumerate_pairings(two_n: u32) -> Result<Vec<Pairing>, WickError> {
    enumerate_pairings_with_cap(two_n, DEFAULT_PAIRING_CAP)
}

/// All perfect matchings in lexicographic order: the smallest free index is
/// paired with each remaining index in increasing order.
pub fn enumerate_pairings_with_cap(two_n: u32, cap: u32) -> Result<Vec<Pairing>, WickError> {
    if two_n == 0 || two_n % 2 == 1 {
        return Err(WickError::OddOrder(two_n));
    }
    if two_n > cap {
        return Err(WickError::CapExceeded { requested: two_n, cap });
    }
    let mut out = Vec::new();
    let mut free: Vec<u32> = (1..=two_n).collect();
    let mut current = Vec::with_capacity(two_n as usize / 2);
    recurse(&mut free, &mut current, &mut out);
    Ok(out)
}

fn recurse(free: &mut Vec<u32>, current: &mut Vec<(u32, u32)>, out: &mut Vec<Pairing>) {
    if free.is_empty() {
        out.push(Pairing { pairs: current.clone() });
        return;
    }
    let first = free.remove(0);
    for k in 0..free.len() {
        let partner = free.remove(k);
        current.push((first, partner));
        recurse(free, current, out);
        current.pop();
        free.insert(k, partner);
    }
    free.insert(0, first);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Independent count: perfect matchings of the complete graph via bitmask DP.
    fn matchings_by_bitmask(n: usize) -> u64 {
        let mut memo = vec![0u64; 1 << n];
        memo[0] = 1;
        for mask in 1..(1usize << n) {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let low = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << low);
            let mut total = 0;
            for j in 0..n {
                if rest & (1 << j) != 0 {
                    total += memo[rest & !(1 << j)];
                }
            }
            memo[mask] = total;
        }
        memo[(1 << n) - 1]
    }

    #[test]
    fn counts() {
        assert_eq!(count_pairings(2).unwrap(), BigUint::from(1u32));
        assert_eq!(count_pairings(4).unwrap(), BigUint::from(3u32));
        assert_eq!(count_pairings(8).unwrap(), BigUint::from(matchings_by_bitmask(8)));
        assert_eq!(matchings_by_bitmask(8), 105);
        assert_eq!(count_pairings(3), Err(WickError::OddOrder(3)));
        assert_eq!(count_pairings(0), Err(WickError::OddOrder(0)));
    }

    #[test]
    fn enumerates_small_cases_in_order() {
        let two = enumerate_pairings(2).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].to_string(), "{(1,2)}");
        let four: Vec<String> = enumerate_pairings(4).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(four, ["{(1,2),(3,4)}", "{(1,3),(2,4)}", "{(1,4),(2,3)}"]);
    }

    #[test]
    fn six_items_give_fifteen_unique_pairings() {
        let six = enumerate_pairings(6).unwrap();
        assert_eq!(six.len(), 15);
        let unique: HashSet<_> = six.iter().cloned().collect();
        assert_eq!(unique.len(), 15);
        let mut sorted = six.clone();
        sorted.sort();
        assert_eq!(sorted, six);
    }

    #[test]
    fn cap_guards_blowup() {
        assert_eq!(
            enumerate_pairings(14),
            Err(WickError::CapExceeded { requested: 14, cap: DEFAULT_PAIRING_CAP })
        );
    }

    #[test]
    fn enumeration_matches_count_up_to_cap() {
        for two_n in (2..=12).step_by(2) {
            let n = enumerate_pairings(two_n).unwrap().len();
            assert_eq!(BigUint::from(n), count_pairings(two_n).unwrap());
            assert_eq!(n as u64, matchings_by_bitmask(two_n as usize));
        }
    }

    #[test]
    fn pairing_validation() {
        assert!(Pairing::new([(2, 1), (3, 4)]).is_some());
        assert!(Pairing::new([(1, 2), (2, 3)]).is_none());
        assert!(Pairing::new([(1, 5), (2, 3)]).is_none());
    }
}
