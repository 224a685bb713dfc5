//! Truncated `(w, z)`-bigraded series and the plethystic `Exp` / `Log`.
//!
//! A rank series (exact rational functions in `z` per power of `w`) is a
//! [`GradedSeries`] with `dmax = 0` whose coefficients carry `z` themselves;
//! the Adams operations then act on `z` through the coefficient type.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ratfun::univariate::{Field, URat};
use crate::ratfun::{RatFun, VarSet};
use crate::scalar::{int, Coef, QSqrt, Rat, SymbolicScalar, TowerScalar};

/// Truncated series `sum c_{r,d} w^r z^d` over `0 <= r <= rmax`, `0 <= d <= dmax`.
#[derive(Clone, PartialEq, Debug)]
pub struct GradedSeries<S: Coef> {
    rmax: usize,
    dmax: usize,
    zero: S,
    c: Vec<S>,
}

/// Series in `w` with exact `z`-dependent coefficients.
pub type RankSeries<Z> = GradedSeries<Z>;

/// A ray `d / r = tau` of the first quadrant; `None` is the torsion ray `r = 0`.
pub type Slope = Option<(i64, i64)>;

pub fn slope_of(r: usize, d: usize) -> Slope {
    if r == 0 {
        return None;
    }
    let g = r.gcd(&d);
    Some(((d / g) as i64, (r / g) as i64))
}

fn mobius(n: usize) -> i64 {
    let mut n = n;
    let mut k = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            k += 1;
        }
        p += 1;
    }
    if n > 1 {
        k += 1;
    }
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

impl<S: Coef> GradedSeries<S> {
    /// The zero series; `zero` fixes the coefficient context.
    pub fn zero(zero: S, rmax: usize, dmax: usize) -> Self {
        let c = vec![zero.clone(); (rmax + 1) * (dmax + 1)];
        GradedSeries { rmax, dmax, zero, c }
    }

    pub fn one(zero: S, rmax: usize, dmax: usize) -> Self {
        let mut s = Self::zero(zero, rmax, dmax);
        s.c[0] = s.zero.one_like();
        s
    }

    /// Rank series from coefficients `c_0, ..., c_R`.
    pub fn from_ranks(zero: S, coeffs: Vec<S>) -> Self {
        let rmax = coeffs.len().saturating_sub(1);
        GradedSeries { rmax, dmax: 0, zero, c: coeffs }
    }

    pub fn rmax(&self) -> usize {
        self.rmax
    }

    pub fn dmax(&self) -> usize {
        self.dmax
    }

    fn idx(&self, r: usize, d: usize) -> usize {
        r * (self.dmax + 1) + d
    }

    pub fn get(&self, r: usize, d: usize) -> &S {
        &self.c[self.idx(r, d)]
    }

    pub fn set(&mut self, r: usize, d: usize, v: S) {
        let i = self.idx(r, d);
        self.c[i] = v;
    }

    /// Rank coefficient of a rank series.
    pub fn rank(&self, r: usize) -> &S {
        self.get(r, 0)
    }

    pub fn zero_elem(&self) -> &S {
        &self.zero
    }

    /// Nonzero entries in `(r, d)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        let w = self.dmax + 1;
        self.c.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(i, v)| (i / w, i % w, v))
    }

    fn check_shape(&self, o: &Self) -> Result<()> {
        if self.rmax != o.rmax || self.dmax != o.dmax {
            return Err(Error::Precondition("series truncations differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        Ok(self.zip(o, S::add))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        Ok(self.zip(o, S::sub))
    }

    fn zip(&self, o: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        let c = self
            .c
            .iter()
            .zip(&o.c)
            .map(|(a, b)| {
                if b.is_zero() {
                    a.clone()
                } else if a.is_zero() {
                    f(&b.zero_like(), b)
                } else {
                    f(a, b)
                }
            })
            .collect();
        GradedSeries { rmax: self.rmax, dmax: self.dmax, zero: self.zero.clone(), c }
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        let c = self.c.iter().map(|x| if x.is_zero() { x.clone() } else { f(x) }).collect();
        GradedSeries { rmax: self.rmax, dmax: self.dmax, zero: self.zero.clone(), c }
    }

    pub fn scale(&self, k: &Rat) -> Self {
        self.map(|x| x.scale(k))
    }

    /// Multiplies every coefficient by `k`.
    pub fn mul_coef(&self, k: &S) -> Self {
        self.map(|x| x.mul(k))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        let mut out = Self::zero(self.zero.clone(), self.rmax, self.dmax);
        let a: Vec<_> = self.entries().collect();
        let b: Vec<_> = o.entries().collect();
        for &(r1, d1, x) in &a {
            for &(r2, d2, y) in &b {
                if r1 + r2 > self.rmax || d1 + d2 > self.dmax {
                    continue;
                }
                let i = out.idx(r1 + r2, d1 + d2);
                let t = x.mul(y);
                out.c[i] = if out.c[i].is_zero() { t } else { out.c[i].add(&t) };
            }
        }
        Ok(out)
    }

    fn constant_is(&self, one: bool) -> bool {
        let c0 = &self.c[0];
        if one {
            *c0 == c0.one_like()
        } else {
            c0.is_zero()
        }
    }

    /// Inverse of a series with constant term 1.
    pub fn inv(&self) -> Result<Self> {
        if !self.constant_is(true) {
            return Err(Error::Precondition("series inverse needs constant term 1".into()));
        }
        let mut out = Self::zero(self.zero.clone(), self.rmax, self.dmax);
        out.c[0] = self.c[0].clone();
        for r in 0..=self.rmax {
            for d in 0..=self.dmax {
                if r == 0 && d == 0 {
                    continue;
                }
                let mut acc: Option<S> = None;
                for r1 in 0..=r {
                    for d1 in 0..=d {
                        if r1 == 0 && d1 == 0 {
                            continue;
                        }
                        let f = self.get(r1, d1);
                        let g = out.get(r - r1, d - d1);
                        if f.is_zero() || g.is_zero() {
                            continue;
                        }
                        let t = f.mul(g);
                        acc = Some(match acc {
                            None => t,
                            Some(a) => a.add(&t),
                        });
                    }
                }
                if let Some(a) = acc {
                    out.set(r, d, a.neg());
                }
            }
        }
        Ok(out)
    }

    /// Ordinary logarithm via `E(log f) f = E f` for the Euler operator `E`.
    fn log_ordinary(&self) -> Self {
        let mut out = Self::zero(self.zero.clone(), self.rmax, self.dmax);
        for r in 0..=self.rmax {
            for d in 0..=self.dmax {
                let t = r + d;
                if t == 0 {
                    continue;
                }
                let mut acc: Option<S> = None;
                for r1 in 0..=r {
                    for d1 in 0..=d {
                        let t1 = r1 + d1;
                        if t1 == 0 || t1 == t {
                            continue;
                        }
                        let l = out.get(r1, d1);
                        let f = self.get(r - r1, d - d1);
                        if l.is_zero() || f.is_zero() {
                            continue;
                        }
                        let x = l.mul(f).scale(&int(t1 as i64));
                        acc = Some(match acc {
                            None => x,
                            Some(a) => a.add(&x),
                        });
                    }
                }
                let f = self.get(r, d);
                let v = match acc {
                    None => f.clone(),
                    Some(a) => {
                        let a = a.scale(&Rat::new(1.into(), (t as i64).into()));
                        if f.is_zero() {
                            a.neg()
                        } else {
                            f.sub(&a)
                        }
                    }
                };
                out.set(r, d, v);
            }
        }
        out
    }

    /// Ordinary exponential via `E(F) = E(h) F`.
    fn exp_ordinary(&self) -> Self {
        let mut out = Self::one(self.zero.clone(), self.rmax, self.dmax);
        for r in 0..=self.rmax {
            for d in 0..=self.dmax {
                let t = r + d;
                if t == 0 {
                    continue;
                }
                let mut acc: Option<S> = None;
                for r1 in 0..=r {
                    for d1 in 0..=d {
                        let t1 = r1 + d1;
                        if t1 == 0 {
                            continue;
                        }
                        let h = self.get(r1, d1);
                        let f = out.get(r - r1, d - d1);
                        if h.is_zero() || f.is_zero() {
                            continue;
                        }
                        let x = h.mul(f).scale(&int(t1 as i64));
                        acc = Some(match acc {
                            None => x,
                            Some(a) => a.add(&x),
                        });
                    }
                }
                if let Some(a) = acc {
                    out.set(r, d, a.scale(&Rat::new(1.into(), (t as i64).into())));
                }
            }
        }
        out
    }

    /// `sum_{k | (r,d)} c_k / k * psi_k(x_{(r,d)/k})` with `c_k` from `weight`.
    fn adams_sum(&self, weight: impl Fn(usize) -> i64) -> Result<Self> {
        let mut out = Self::zero(self.zero.clone(), self.rmax, self.dmax);
        for r in 0..=self.rmax {
            for d in 0..=self.dmax {
                let g = r.gcd(&d);
                if g == 0 {
                    continue;
                }
                let mut acc: Option<S> = None;
                for k in 1..=g {
                    if g % k != 0 {
                        continue;
                    }
                    let w = weight(k);
                    let x = self.get(r / k, d / k);
                    if w == 0 || x.is_zero() {
                        continue;
                    }
                    let y = x.adams(k)?.scale(&Rat::new(w.into(), (k as i64).into()));
                    acc = Some(match acc {
                        None => y,
                        Some(a) => a.add(&y),
                    });
                }
                if let Some(a) = acc {
                    out.set(r, d, a);
                }
            }
        }
        Ok(out)
    }

    /// Plethystic exponential; the constant term must vanish.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_is(false) {
            return Err(Error::Precondition("Exp needs a series without constant term".into()));
        }
        Ok(self.adams_sum(|_| 1)?.exp_ordinary())
    }

    /// Plethystic logarithm; the constant term must be 1.
    pub fn log(&self) -> Result<Self> {
        if !self.constant_is(true) {
            return Err(Error::Precondition("Log needs constant term 1".into()));
        }
        self.log_ordinary().adams_sum(mobius)
    }

    /// Keeps the unit and the entries on the ray `tau`.
    pub fn restrict_ray(&self, tau: Slope) -> Self {
        let mut out = Self::zero(self.zero.clone(), self.rmax, self.dmax);
        out.c[0] = self.c[0].clone();
        for (r, d, v) in self.entries() {
            if (r, d) != (0, 0) && slope_of(r, d) == tau {
                out.set(r, d, v.clone());
            }
        }
        out
    }

    /// Rays met by nonzero entries.
    pub fn rays(&self) -> Vec<Slope> {
        let mut v: Vec<Slope> = self.entries().filter(|(r, d, _)| (*r, *d) != (0, 0)).map(|(r, d, _)| slope_of(r, d)).collect();
        v.sort();
        v.dedup();
        v
    }

    /// `Log` of the restriction to the ray `tau`.
    pub fn slope_log(&self, tau: Slope) -> Result<Self> {
        self.restrict_ray(tau).log()
    }
}

impl<S: Coef + fmt::Display> GradedSeries<S> {
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> =
            self.entries().map(|(r, d, v)| json!({"r": r, "d": d, "value": v.to_string()})).collect();
        json!({"truncation": {"rmax": self.rmax, "dmax": self.dmax}, "coefficients": coeffs})
    }
}

// ---------------------------------------------------------------------------

/// Rational functions in `v, a_i, z` are a lambda-ring with every variable a line element.
impl Coef for RatFun {
    fn zero_like(&self) -> Self {
        RatFun::zero(self.vars().clone())
    }
    fn one_like(&self) -> Self {
        RatFun::one(self.vars().clone())
    }
    fn is_zero(&self) -> bool {
        RatFun::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        RatFun::neg(self)
    }
    fn scale(&self, c: &Rat) -> Self {
        RatFun::scale(self, c)
    }
    fn adams(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("Adams index must be positive".into()));
        }
        Ok(self.inflate(k as u32))
    }
}

/// Numeric `z`-rational coefficient: one rational function per Frobenius level.
#[derive(Clone, PartialEq, Debug)]
pub struct TowerZ {
    pub q: u64,
    pub levels: Vec<URat<QSqrt>>,
}

impl TowerZ {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    fn zip(&self, o: &Self, f: impl Fn(&URat<QSqrt>, &URat<QSqrt>) -> URat<QSqrt>) -> Self {
        TowerZ { q: self.q, levels: self.levels.iter().zip(&o.levels).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn constant(q: u64, depth: usize, c: &Rat) -> TowerZ {
        TowerZ { q, levels: vec![URat::constant(QSqrt::rational(c.clone(), q)); depth] }
    }
}

impl Coef for TowerZ {
    fn zero_like(&self) -> Self {
        TowerZ { q: self.q, levels: self.levels.iter().map(|l| URat::zero(l.proto())).collect() }
    }
    fn one_like(&self) -> Self {
        TowerZ { q: self.q, levels: self.levels.iter().map(|l| URat::constant(l.proto().one_like())).collect() }
    }
    fn is_zero(&self) -> bool {
        self.levels.iter().all(URat::is_zero)
    }
    fn add(&self, o: &Self) -> Self {
        self.zip(o, URat::add)
    }
    fn sub(&self, o: &Self) -> Self {
        self.zip(o, URat::sub)
    }
    fn mul(&self, o: &Self) -> Self {
        self.zip(o, URat::mul)
    }
    fn neg(&self) -> Self {
        TowerZ { q: self.q, levels: self.levels.iter().map(URat::neg).collect() }
    }
    fn scale(&self, c: &Rat) -> Self {
        let k = QSqrt::rational(c.clone(), self.q);
        TowerZ { q: self.q, levels: self.levels.iter().map(|l| l.scale(&k)).collect() }
    }
    fn adams(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("Adams index must be positive".into()));
        }
        if k > self.levels.len() {
            return Err(Error::DepthExhausted { needed: k, depth: self.levels.len() });
        }
        let levels = self.levels.iter().skip(k - 1).step_by(k).map(|l| l.inflate(k)).collect();
        Ok(TowerZ { q: self.q, levels })
    }
}

/// A `z`-dependent coefficient that expands into scalar Taylor coefficients.
pub trait ZCoef: Coef {
    type S: Coef;
    /// Taylor coefficients of `z^0 .. z^dmax`.
    fn expand(&self, dmax: usize) -> Result<Vec<Self::S>>;
}

impl ZCoef for RatFun {
    type S = SymbolicScalar;
    fn expand(&self, dmax: usize) -> Result<Vec<SymbolicScalar>> {
        let n = self.vars().len();
        let scalars: Arc<VarSet> = VarSet::new(self.vars().names()[..n - 1].iter().cloned());
        self.series(n - 1, dmax)?.into_iter().map(|c| Ok(SymbolicScalar(c.restrict(&scalars)?))).collect()
    }
}

impl ZCoef for TowerZ {
    type S = TowerScalar;
    fn expand(&self, dmax: usize) -> Result<Vec<TowerScalar>> {
        let per_level = self
            .levels
            .iter()
            .map(|l| l.series(dmax).ok_or_else(|| Error::Precondition("pole at z = 0".into())))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..=dmax)
            .map(|d| TowerScalar::from_levels(self.q, per_level.iter().map(|s| s[d].clone()).collect()))
            .collect())
    }
}

/// Expands every rank coefficient of a rank series in `z` up to `dmax`.
pub fn rf_to_series<Z: ZCoef>(f: &RankSeries<Z>, dmax: usize) -> Result<GradedSeries<Z::S>> {
    if f.dmax() != 0 {
        return Err(Error::Precondition("expected a rank series".into()));
    }
    let unit = f.rank(0).expand(0)?.remove(0);
    let zero = unit.zero_like();
    let mut out = GradedSeries::zero(zero, f.rmax(), dmax);
    for r in 0..=f.rmax() {
        if f.rank(r).is_zero() {
            continue;
        }
        for (d, c) in f.rank(r).expand(dmax)?.into_iter().enumerate() {
            if !c.is_zero() {
                out.set(r, d, c);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::scalar::Scalar;

    fn c(v: i64) -> SymbolicScalar {
        SymbolicScalar::from_i64(&SymbolicScalar::context(0), v)
    }

    fn qs(rmax: usize, dmax: usize, entries: &[(usize, usize, i64)]) -> GradedSeries<SymbolicScalar> {
        let mut s = GradedSeries::zero(c(0), rmax, dmax);
        for &(r, d, v) in entries {
            s.set(r, d, c(v));
        }
        s
    }

    #[test]
    fn exp_of_w_is_geometric() {
        let f = qs(5, 0, &[(1, 0, 1)]);
        let e = f.exp().unwrap();
        for r in 0..=5 {
            assert_eq!(*e.get(r, 0), c(1));
        }
        assert_eq!(e.log().unwrap(), f);
    }

    #[test]
    fn mul_and_inv() {
        let a = qs(3, 0, &[(0, 0, 1), (1, 0, 1)]);
        let b = qs(3, 0, &[(0, 0, 1), (1, 0, -1)]);
        assert_eq!(a.mul(&b).unwrap(), qs(3, 0, &[(0, 0, 1), (2, 0, -1)]));
        assert_eq!(b.inv().unwrap(), qs(3, 0, &[(0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1)]));
    }

    #[test]
    fn mobius_values() {
        let v: Vec<i64> = (1..=10).map(mobius).collect();
        assert_eq!(v, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }
}
