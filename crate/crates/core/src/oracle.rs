//! Brute-force counts of positive nilpotent twisted Higgs pairs on split
//! bundles over the projective line.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::CurveData;
use crate::dt::{nil_vec_series, NumericBackend};
use crate::ratfun::univariate::Field;
use crate::error::{Error, Result};
use crate::kernel::ResidueConvention;
use crate::scalar::{QSqrt, Rat};
use crate::series::ZCoef;

/// Default cap on the number of Higgs fields enumerated per bundle.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// `O(n_1) + ... + O(n_r)` with `n_1 >= ... >= n_r >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitBundle {
    pub exps: Vec<i64>,
}

impl SplitBundle {
    pub fn new(mut exps: Vec<i64>) -> Result<SplitBundle> {
        if exps.iter().any(|&n| n < 0) {
            return Err(Error::Precondition("split bundle exponents must be nonnegative".into()));
        }
        exps.sort_unstable_by(|a, b| b.cmp(a));
        Ok(SplitBundle { exps })
    }

    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> i64 {
        self.exps.iter().sum()
    }

    /// Distinct exponents with multiplicities.
    fn blocks(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for (i, n) in self.exps.iter().enumerate() {
            if i > 0 && self.exps[i - 1] == *n {
                *out.last_mut().unwrap() += 1;
            } else {
                out.push(1);
            }
        }
        out
    }
}

/// All split bundles of rank `r` and degree `d` in the positive range.
pub fn split_bundles(r: usize, d: i64) -> Vec<SplitBundle> {
    fn rec(left: usize, rem: i64, max: i64, cur: &mut Vec<i64>, out: &mut Vec<SplitBundle>) {
        if left == 0 {
            if rem == 0 {
                out.push(SplitBundle { exps: cur.clone() });
            }
            return;
        }
        for n in (0..=rem.min(max)).rev() {
            cur.push(n);
            rec(left - 1, rem - n, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d >= 0 {
        rec(r, d, d, &mut Vec::new(), &mut out);
    }
    out
}

/// `dim Hom(O(n_i), O(n_j + l)) = max(0, n_j - n_i + l + 1)`.
pub fn hom_dim(e: &SplitBundle, l: i64) -> Vec<Vec<u32>> {
    e.exps.iter().map(|ni| e.exps.iter().map(|nj| (nj - ni + l + 1).max(0) as u32).collect()).collect()
}

fn gl_order(m: usize, q: &BigInt) -> BigInt {
    let qm = num_traits::pow(q.clone(), m);
    (0..m).fold(BigInt::one(), |acc, i| acc * (&qm - num_traits::pow(q.clone(), i)))
}

/// `|Aut E|` over `F_q`.
pub fn aut_count(e: &SplitBundle, q: u64) -> BigInt {
    let qb = BigInt::from(q);
    let dim_end: u32 = hom_dim(e, 0).iter().flatten().sum();
    let blocks = e.blocks();
    let sq: u32 = blocks.iter().map(|&m| (m * m) as u32).sum();
    blocks.iter().fold(num_traits::pow(qb.clone(), (dim_end - sq) as usize), |acc, &m| acc * gl_order(m, &qb))
}

fn check_prime(q: u64) -> Result<()> {
    if q < 2 || (2..q).take_while(|k| k * k <= q).any(|k| q % k == 0) {
        return Err(Error::Precondition(format!("the oracle enumerates over prime fields only, got q = {q}")));
    }
    Ok(())
}

/// Binary form of degree `deg` over `F_q`; negative degree means the zero form.
#[derive(Clone, Debug)]
struct Form {
    deg: i64,
    c: Vec<u64>,
}

impl Form {
    fn zero(deg: i64) -> Form {
        Form { deg, c: vec![0; (deg + 1).max(0) as usize] }
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    fn add(&self, o: &Form, q: u64) -> Form {
        if self.c.is_empty() {
            return o.clone();
        }
        if o.c.is_empty() {
            return self.clone();
        }
        Form { deg: self.deg, c: self.c.iter().zip(&o.c).map(|(a, b)| (a + b) % q).collect() }
    }

    fn neg(&self, q: u64) -> Form {
        Form { deg: self.deg, c: self.c.iter().map(|a| (q - a) % q).collect() }
    }

    fn mul(&self, o: &Form, q: u64) -> Form {
        let deg = self.deg + o.deg;
        let mut out = Form::zero(deg);
        if self.c.is_empty() || o.c.is_empty() {
            return Form { deg, c: Vec::new() };
        }
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out.c[i + j] = (out.c[i + j] + a * b) % q;
            }
        }
        out
    }
}

/// Whether the characteristic polynomial of `m` is `T^r`.
fn is_nilpotent(m: &[Vec<Form>], q: u64) -> bool {
    let r = m.len();
    let tr = (0..r).fold(Form { deg: 0, c: Vec::new() }, |acc, i| acc.add(&m[i][i], q));
    if !tr.is_zero() {
        return false;
    }
    let minor2 = |i: usize, j: usize| m[i][i].mul(&m[j][j], q).add(&m[i][j].mul(&m[j][i], q).neg(q), q);
    if r >= 2 {
        let e2 = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .fold(Form { deg: 0, c: Vec::new() }, |acc, (i, j)| acc.add(&minor2(i, j), q));
        if !e2.is_zero() {
            return false;
        }
    }
    if r == 3 {
        let det = m[0][0]
            .mul(&minor_of(m, 1, 2, 1, 2, q), q)
            .add(&m[0][1].mul(&minor_of(m, 1, 2, 0, 2, q), q).neg(q), q)
            .add(&m[0][2].mul(&minor_of(m, 1, 2, 0, 1, q), q), q);
        if !det.is_zero() {
            return false;
        }
    }
    true
}

fn minor_of(m: &[Vec<Form>], r0: usize, r1: usize, c0: usize, c1: usize, q: u64) -> Form {
    m[r0][c0].mul(&m[r1][c1], q).add(&m[r0][c1].mul(&m[r1][c0], q).neg(q), q)
}

fn det(m: &[Vec<Form>], q: u64) -> Form {
    match m.len() {
        1 => m[0][0].clone(),
        2 => minor_of(m, 0, 1, 0, 1, q),
        _ => m[0][0]
            .mul(&minor_of(m, 1, 2, 1, 2, q), q)
            .add(&m[0][1].mul(&minor_of(m, 1, 2, 0, 2, q), q).neg(q), q)
            .add(&m[0][2].mul(&minor_of(m, 1, 2, 0, 1, q), q), q),
    }
}

/// Enumerates all matrices of forms `m[i][j]` of degree `n_j - n_i + l`, in parallel.
fn enumerate_maps(e: &SplitBundle, l: i64, q: u64, budget: u64, pred: impl Fn(&[Vec<Form>]) -> bool + Sync) -> Result<u64> {
    let r = e.rank();
    if r > 3 {
        return Err(Error::Precondition("the oracle handles rank <= 3".into()));
    }
    let dims = hom_dim(e, l);
    let slots: u32 = dims.iter().flatten().sum();
    let total = (q as u128).checked_pow(slots).filter(|&t| t <= budget as u128).ok_or_else(|| {
        Error::Budget(format!("{q}^{slots} Higgs fields on {:?} exceed the budget {budget}", e.exps))
    })? as u64;
    let count = (0..total)
        .into_par_iter()
        .filter(|&u| {
            let mut u = u;
            let m: Vec<Vec<Form>> = (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| {
                            let deg = e.exps[j] - e.exps[i] + l;
                            let mut f = Form::zero(deg);
                            for c in f.c.iter_mut() {
                                *c = u % q;
                                u /= q;
                            }
                            f
                        })
                        .collect()
                })
                .collect();
            pred(&m)
        })
        .count();
    Ok(count as u64)
}

/// Number of nilpotent `theta: E -> E(l)`.
pub fn count_nilpotent(e: &SplitBundle, l: i64, q: u64, budget: u64) -> Result<u64> {
    check_prime(q)?;
    if l > 0 {
        return Err(Error::Precondition("the oracle counts nilpotent pairs for l <= 0".into()));
    }
    enumerate_maps(e, l, q, budget, |m| is_nilpotent(m, q))
}

/// `|Aut E|` by enumerating endomorphisms with a unit determinant.
pub fn aut_count_bruteforce(e: &SplitBundle, q: u64, budget: u64) -> Result<u64> {
    check_prime(q)?;
    enumerate_maps(e, 0, q, budget, |m| !det(m, q).is_zero())
}

/// `sum_E count_nilpotent(E) / |Aut E|` over split `E` of rank `r`, degree `d`.
pub fn oracle_vol(q: u64, l: i64, r: usize, d: i64, budget: u64) -> Result<Rat> {
    let mut acc = Rat::zero();
    for e in split_bundles(r, d) {
        let n = count_nilpotent(&e, l, q, budget)?;
        acc += Rat::new(BigInt::from(n), aut_count(&e, q));
    }
    Ok(acc)
}

/// `(-sqrt q)^{l r^2}` times the `w^r z^d` coefficient of the genus-0 nilpotent series, level 1.
pub fn formula_vol(q: u64, l: i64, r: usize, d: usize) -> Result<QSqrt> {
    let b = NumericBackend::new(CurveData::numeric(q, &[])?, ResidueConvention::default())?;
    let s = nil_vec_series(&b, l, r, 1)?;
    let coeff = s.rank(r).expand(d)?[d].level1().clone();
    let m = l * (r * r) as i64;
    let p = QSqrt::sqrt_q(q).neg().pow(m.unsigned_abs() as u32);
    let pre = if m < 0 { p.inv().ok_or(Error::DivisionByZero)? } else { p };
    Ok(coeff.mul(&pre))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn e(v: &[i64]) -> SplitBundle {
        SplitBundle::new(v.to_vec()).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(hom_dim(&e(&[1, 0]), 0), vec![vec![1, 0], vec![2, 1]]);
        assert_eq!(hom_dim(&e(&[0, 0]), -2), vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(aut_count(&e(&[0, 0]), 2), BigInt::from(6));
        assert_eq!(aut_count(&e(&[1, 0]), 3), BigInt::from(4 * 9));
        assert_eq!(aut_count(&e(&[0]), 5), BigInt::from(4));
        assert_eq!(count_nilpotent(&e(&[0, 0]), 0, 2, DEFAULT_BUDGET).unwrap(), 4);
        assert_eq!(count_nilpotent(&e(&[0, 0]), -2, 2, DEFAULT_BUDGET).unwrap(), 1);
        assert_eq!(count_nilpotent(&e(&[3]), 0, 3, DEFAULT_BUDGET).unwrap(), 1);
        assert!(count_nilpotent(&e(&[0]), 0, 4, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn anchors() {
        assert_eq!(oracle_vol(2, 0, 1, 2, DEFAULT_BUDGET).unwrap(), rat(1, 1));
        assert_eq!(oracle_vol(3, -1, 1, 0, DEFAULT_BUDGET).unwrap(), rat(1, 2));
        assert_eq!(oracle_vol(2, -2, 2, 0, DEFAULT_BUDGET).unwrap(), rat(1, 6));
        assert_eq!(oracle_vol(2, 0, 2, 0, DEFAULT_BUDGET).unwrap(), rat(2, 3));
    }

    #[test]
    fn aut_matches_enumeration() {
        for v in [&[0, 0][..], &[1, 0], &[2, 0], &[1, 1, 0], &[0, 0, 0]] {
            let b = e(v);
            assert_eq!(BigInt::from(aut_count_bruteforce(&b, 2, 1 << 16).unwrap()), aut_count(&b, 2), "{v:?}");
        }
    }
}
