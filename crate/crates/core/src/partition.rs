//! Partitions, Young diagram statistics and Jordan types.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Weakly decreasing list of positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

/// A box of a Young diagram with its arm and leg (rows and columns are 1-based).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub arm: usize,
    pub leg: usize,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Partition {
    /// Sorts the parts and drops zeros.
    pub fn new(mut parts: Vec<usize>) -> Partition {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    /// `(1^{r_1}, 2^{r_2}, ...)` from block multiplicities `r_1, r_2, ...`.
    pub fn from_multiplicities(r: &[usize]) -> Partition {
        let mut parts = Vec::new();
        for (i, &m) in r.iter().enumerate().rev() {
            parts.extend(std::iter::repeat(i + 1).take(m));
        }
        Partition(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Block multiplicities `r_1..r_t` with `t` the largest part.
    pub fn multiplicities(&self) -> Vec<usize> {
        let t = self.0.first().copied().unwrap_or(0);
        let mut r = vec![0; t];
        for &p in &self.0 {
            r[p - 1] += 1;
        }
        r
    }

    pub fn conjugate(&self) -> Partition {
        let t = self.0.first().copied().unwrap_or(0);
        Partition((1..=t).map(|j| self.0.iter().filter(|&&p| p >= j).count()).collect())
    }

    /// `<lambda, lambda> = sum of squared conjugate parts`.
    pub fn pairing(&self) -> usize {
        self.conjugate().0.iter().map(|c| c * c).sum()
    }

    pub fn cells(&self) -> Vec<Cell> {
        let conj = self.conjugate();
        let mut out = Vec::with_capacity(self.weight());
        for (i, &li) in self.0.iter().enumerate() {
            for j in 1..=li {
                out.push(Cell { row: i + 1, col: j, arm: li - j, leg: conj.0[j - 1] - (i + 1) });
            }
        }
        out
    }
}

/// All partitions of `r`, in reverse lexicographic order.
pub fn enumerate_partitions(r: usize) -> Vec<Partition> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, r, &mut Vec::new(), &mut out);
    out
}

/// Sequences `(r_1..r_t)` with `sum i r_i = r` and `r_t >= 1`.
pub fn enumerate_jgen(r: usize) -> Vec<Vec<usize>> {
    enumerate_partitions(r).iter().map(Partition::multiplicities).collect()
}

/// A lattice point `(rank, degree)` of the one-vertex lattice.
pub type Pt = (i64, i64);

/// `(r, d)[k] = (r, d + k l r)`.
pub fn shift(a: Pt, k: i64, l: i64) -> Pt {
    (a.0, a.1 + k * l * a.0)
}

fn add(a: Pt, b: Pt) -> Pt {
    (a.0 + b.0, a.1 + b.1)
}

/// Jordan type `(alpha_0, ..., alpha_{s-1})` for twist degree `l`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct JordanType {
    pub alphas: Vec<Pt>,
    pub l: i64,
}

/// The data `f''_k`, `f'_k` (for `k = 0..s`) and the partition of a Jordan type.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JordanShape {
    pub f2: Vec<Pt>,
    pub f1: Vec<Pt>,
    pub lambda: Partition,
}

impl JordanType {
    pub fn new(alphas: Vec<Pt>, l: i64) -> JordanType {
        JordanType { alphas, l }
    }

    /// `f''_k = sum_{j>=k} alpha_j[-k]`, `f'_k = sum_{j>=k} alpha_j[-j]`.
    pub fn shape(&self) -> JordanShape {
        let s = self.alphas.len();
        let mut f2 = Vec::with_capacity(s + 1);
        let mut f1 = Vec::with_capacity(s + 1);
        for k in 0..=s {
            let mut a = (0, 0);
            let mut b = (0, 0);
            for j in k..s {
                a = add(a, shift(self.alphas[j], -(k as i64), self.l));
                b = add(b, shift(self.alphas[j], -(j as i64), self.l));
            }
            f2.push(a);
            f1.push(b);
        }
        let mult: Vec<usize> = self.alphas.iter().map(|a| a.0.max(0) as usize).collect();
        JordanShape { f2, f1, lambda: Partition::from_multiplicities(&mult) }
    }

    /// Total class `sum_k f''_k`.
    pub fn class(&self) -> Pt {
        self.shape().f2.iter().fold((0, 0), |acc, &p| add(acc, p))
    }

    pub fn rank(&self) -> i64 {
        self.alphas.iter().enumerate().map(|(k, a)| (k as i64 + 1) * a.0).sum()
    }
}

/// Jordan types with `s <= max_len`, ranks `>= 0`, total rank `<= max_rank`,
/// entry degrees in `[-max_deg, max_deg]` and a nonzero last entry.
pub fn enumerate_jordan(max_rank: i64, max_deg: i64, max_len: usize, l: i64) -> Vec<JordanType> {
    fn rec(
        cur: &mut Vec<Pt>,
        rank: i64,
        max_rank: i64,
        max_deg: i64,
        max_len: usize,
        l: i64,
        out: &mut Vec<JordanType>,
    ) {
        if let Some(&last) = cur.last() {
            if last != (0, 0) {
                out.push(JordanType::new(cur.clone(), l));
            }
        }
        if cur.len() == max_len {
            return;
        }
        let k = cur.len() as i64 + 1;
        for r in 0..=(max_rank - rank) / k {
            for d in -max_deg..=max_deg {
                cur.push((r, d));
                rec(cur, rank + k * r, max_rank, max_deg, max_len, l, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 0, max_rank, max_deg, max_len, l, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec())
    }

    #[test]
    fn spec_examples() {
        assert_eq!(p(&[2, 1]).conjugate(), p(&[2, 1]));
        assert_eq!(p(&[3]).conjugate(), p(&[1, 1, 1]));
        assert_eq!(p(&[]).conjugate(), p(&[]));
        assert_eq!(p(&[1, 1]).pairing(), 4);
        assert_eq!(p(&[2, 1]).pairing(), 5);
        assert_eq!(p(&[2]).pairing(), 2);
        let c = p(&[2]).cells();
        assert_eq!((c[0].arm, c[0].leg, c[1].arm, c[1].leg), (1, 0, 0, 0));
        let c = p(&[1, 1]).cells();
        assert_eq!((c[0].arm, c[0].leg, c[1].arm, c[1].leg), (0, 1, 0, 0));
        assert_eq!(enumerate_partitions(2), vec![p(&[2]), p(&[1, 1])]);
        assert_eq!(enumerate_partitions(3).len(), 3);
        assert_eq!(enumerate_jgen(2), vec![vec![0, 1], vec![2]]);
        assert_eq!(enumerate_partitions(1), vec![p(&[1])]);
    }

    #[test]
    fn jordan_examples() {
        let j = JordanType::new(vec![(2, 5)], -1);
        let s = j.shape();
        assert_eq!((s.f2[0], s.f1[0], s.f2[1], s.f1[1]), ((2, 5), (2, 5), (0, 0), (0, 0)));
        assert_eq!(s.lambda, p(&[1, 1]));
        let j = JordanType::new(vec![(0, 0), (1, 0)], 0);
        let s = j.shape();
        assert_eq!((s.f2[0], s.f2[1]), ((1, 0), (1, 0)));
        assert_eq!(s.lambda, p(&[2]));
        assert_eq!(shift((1, 3), 1, -2), (1, 1));
    }

    #[test]
    fn multiplicities_roundtrip() {
        for r in 1..8 {
            for lam in enumerate_partitions(r) {
                assert_eq!(Partition::from_multiplicities(&lam.multiplicities()), lam);
            }
        }
    }
}
