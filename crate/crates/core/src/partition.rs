//! Integer partitions with a fixed number of parts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition stored with exactly `q` nonincreasing parts (zeros allowed).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!("{parts:?} is not nonincreasing")));
        }
        Ok(Partition(parts))
    }

    /// Pad or validate `parts` to exactly `q` entries.
    pub fn with_len(mut parts: Vec<u32>, q: usize) -> Result<Self> {
        while parts.len() > q && parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.len() > q {
            return Err(Error::InvalidParameter(format!("{parts:?} has more than {q} parts")));
        }
        parts.resize(q, 0);
        Partition::new(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.0.iter().take_while(|&&p| p > 0).count()
    }

    /// Conjugate partition, as a plain vector of column lengths.
    pub fn conjugate(&self) -> Vec<u32> {
        let first = self.0.first().copied().unwrap_or(0);
        (1..=first).map(|j| self.0.iter().filter(|&&p| p >= j).count() as u32).collect()
    }

    /// Dominance order: `self >= other`.
    pub fn dominates(&self, other: &Partition) -> bool {
        let mut a = 0u64;
        let mut b = 0u64;
        for i in 0..self.len().max(other.len()) {
            a += *self.0.get(i).unwrap_or(&0) as u64;
            b += *other.0.get(i).unwrap_or(&0) as u64;
            if a < b {
                return false;
            }
        }
        a == b
    }

    /// Distinct permutations of the parts, each a full exponent vector.
    pub fn distinct_permutations(&self) -> Vec<Vec<u32>> {
        let mut v = self.0.clone();
        v.sort_unstable();
        let mut out = vec![v.clone()];
        while next_permutation(&mut v) {
            out.push(v.clone());
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All partitions of `k` into at most `q` parts, in reverse lexicographic
/// order (largest first part first).
pub fn partitions(q: usize, k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(q);
    fill(q, k, k, &mut cur, &mut out);
    out
}

fn fill(q: usize, remaining: usize, max_part: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if cur.len() == q {
        if remaining == 0 {
            out.push(Partition(cur.clone()));
        }
        return;
    }
    let slots = q - cur.len();
    if remaining > slots * max_part {
        return;
    }
    for p in (0..=remaining.min(max_part)).rev() {
        cur.push(p as u32);
        fill(q, remaining - p, p, cur, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_lex_enumeration() {
        let p: Vec<Vec<u32>> = partitions(3, 4).into_iter().map(|p| p.0).collect();
        assert_eq!(p, vec![vec![4, 0, 0], vec![3, 1, 0], vec![2, 2, 0], vec![2, 1, 1]]);
        assert_eq!(partitions(1, 5).len(), 1);
        assert_eq!(partitions(2, 0), vec![Partition(vec![0, 0])]);
        // p(10) = 42 partitions when q >= 10
        assert_eq!(partitions(10, 10).len(), 42);
    }

    #[test]
    fn reverse_lex_extends_dominance() {
        for k in 0..9 {
            let ps = partitions(4, k);
            for (i, a) in ps.iter().enumerate() {
                for b in &ps[..i] {
                    assert!(!a.dominates(b) || a == b, "{a} dominates earlier {b}");
                }
            }
        }
    }

    #[test]
    fn permutations_and_conjugate() {
        let p = Partition::new(vec![2, 1, 1]).unwrap();
        assert_eq!(p.distinct_permutations().len(), 3);
        assert_eq!(p.conjugate(), vec![3, 1]);
        assert_eq!(Partition::with_len(vec![3, 1, 0, 0], 2).unwrap().parts(), &[3, 1]);
        assert!(Partition::with_len(vec![3, 1, 1], 2).is_err());
        assert!(Partition::new(vec![1, 2]).is_err());
    }
}
