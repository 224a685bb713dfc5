//! Coefficient arithmetic with Adams operations, in two backends.
//!
//! * [`SymbolicScalar`]: rational functions in `v` (with `q = v^2`) and the
//!   Weil variables `a1..ag`. `psi_k` raises every variable to the k-th power.
//! * [`TowerScalar`]: a list of values in `Q(sqrt q)`, entry `j` being the value
//!   over `F_{q^j}`. `psi_k` reads off every k-th level.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ratfun::univariate::Field;
use crate::ratfun::{RatFun, VarSet};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Ring operations shared by every series coefficient type.
pub trait Coef: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Rat) -> Self;
    /// The Adams operation `psi_k`.
    fn adams(&self, k: usize) -> Result<Self>;
}

/// A coefficient field element of one of the two backends.
pub trait Scalar: Coef + fmt::Display {
    type Ctx: Clone + fmt::Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn from_rat(ctx: &Self::Ctx, c: &Rat) -> Self;
    fn try_div(&self, o: &Self) -> Result<Self>;
    /// `(-q^{1/2})^m`.
    fn neg_sqrt_q_pow(ctx: &Self::Ctx, m: i64) -> Self;

    fn zero(ctx: &Self::Ctx) -> Self {
        Self::from_rat(ctx, &Rat::zero())
    }
    fn one(ctx: &Self::Ctx) -> Self {
        Self::from_rat(ctx, &Rat::one())
    }
    fn from_i64(ctx: &Self::Ctx, k: i64) -> Self {
        Self::from_rat(ctx, &int(k))
    }
    fn q(ctx: &Self::Ctx) -> Self {
        Self::neg_sqrt_q_pow(ctx, 2)
    }
    fn inv(&self) -> Result<Self> {
        self.one_like().try_div(self)
    }
    fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut r = self.one_like();
        for _ in 0..k.unsigned_abs() {
            r = r.mul(&base);
        }
        Ok(r)
    }
    /// Exact rational value when the element is a constant.
    fn as_rat(&self) -> Option<Rat>;
}

/// Element `a + b sqrt(q)` of `Q(sqrt q)`.
///
/// When `q` is a perfect square the `b` part is folded into `a`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QSqrt {
    pub a: Rat,
    pub b: Rat,
    pub q: u64,
}

fn isqrt_exact(q: u64) -> Option<u64> {
    let s = q.sqrt();
    (s * s == q).then_some(s)
}

impl QSqrt {
    pub fn new(a: Rat, b: Rat, q: u64) -> QSqrt {
        match isqrt_exact(q) {
            Some(s) if !b.is_zero() => QSqrt { a: a + b * int(s as i64), b: Rat::zero(), q },
            _ => QSqrt { a, b, q },
        }
    }

    pub fn rational(a: Rat, q: u64) -> QSqrt {
        QSqrt { a, b: Rat::zero(), q }
    }

    /// `sqrt(q)`.
    pub fn sqrt_q(q: u64) -> QSqrt {
        QSqrt::new(Rat::zero(), Rat::one(), q)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn pow(&self, k: u32) -> QSqrt {
        let mut r = self.one_like();
        for _ in 0..k {
            r = Field::mul(&r, self);
        }
        r
    }
}

impl fmt::Debug for QSqrt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QSqrt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let bs = if self.b.abs().is_one() { String::new() } else { format!("{}*", self.b.abs()) };
        let sign = if self.b.is_negative() { "-" } else { "+" };
        if self.a.is_zero() {
            let lead = if self.b.is_negative() { "-" } else { "" };
            write!(f, "{lead}{bs}v")
        } else {
            write!(f, "{}{sign}{bs}v", self.a)
        }
    }
}

impl Field for QSqrt {
    fn zero_like(&self) -> Self {
        QSqrt::rational(Rat::zero(), self.q)
    }
    fn one_like(&self) -> Self {
        QSqrt::rational(Rat::one(), self.q)
    }
    fn from_int_like(&self, k: &BigInt) -> Self {
        QSqrt::rational(Rat::from_integer(k.clone()), self.q)
    }
    fn is_zero_elem(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.q, o.q);
        QSqrt { a: &self.a + &o.a, b: &self.b + &o.b, q: self.q }
    }
    fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.q, o.q);
        QSqrt { a: &self.a - &o.a, b: &self.b - &o.b, q: self.q }
    }
    fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.q, o.q);
        if self.b.is_zero() && o.b.is_zero() {
            return QSqrt::rational(&self.a * &o.a, self.q);
        }
        let q = int(self.q as i64);
        QSqrt { a: &self.a * &o.a + &self.b * &o.b * q, b: &self.a * &o.b + &self.b * &o.a, q: self.q }
    }
    fn neg(&self) -> Self {
        QSqrt { a: -&self.a, b: -&self.b, q: self.q }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero_elem() {
            return None;
        }
        if self.b.is_zero() {
            return Some(QSqrt::rational(self.a.recip(), self.q));
        }
        let norm = &self.a * &self.a - &self.b * &self.b * int(self.q as i64);
        Some(QSqrt { a: &self.a / &norm, b: -&self.b / &norm, q: self.q })
    }
}

// ---------------------------------------------------------------------------

/// Symbolic scalar: a rational function in `v, a1, ..., ag`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymbolicScalar(pub RatFun);

impl SymbolicScalar {
    /// Variable universe `[v, a1, ..., ag]`.
    pub fn context(genus: usize) -> Arc<VarSet> {
        let mut names = vec!["v".to_string()];
        names.extend((1..=genus).map(|i| format!("a{i}")));
        VarSet::new(names)
    }

    pub fn v(ctx: &Arc<VarSet>) -> SymbolicScalar {
        SymbolicScalar(RatFun::var(ctx.clone(), 0))
    }

    /// The Weil variable `a_i`, `1 <= i <= g`.
    pub fn a(ctx: &Arc<VarSet>, i: usize) -> SymbolicScalar {
        SymbolicScalar(RatFun::var(ctx.clone(), i))
    }

    pub fn genus(&self) -> usize {
        self.0.vars().len() - 1
    }

    pub fn ratfun(&self) -> &RatFun {
        &self.0
    }

    /// Evaluates at `v = sqrt(q)^level` and `a_i = weil[i]^level`.
    pub fn specialize(&self, q: u64, weil: &[Rat], level: u32) -> Result<QSqrt> {
        let mut vals = vec![QSqrt::sqrt_q(q).pow(level)];
        for w in weil {
            vals.push(QSqrt::rational(num_traits::pow(w.clone(), level as usize), q));
        }
        if vals.len() != self.0.vars().len() {
            return Err(Error::BackendMismatch);
        }
        eval_ratfun(&self.0, &vals).ok_or(Error::DivisionByZero)
    }
}

/// Evaluates a rational function at field values, one per universe variable.
pub fn eval_ratfun<F: Field>(f: &RatFun, vals: &[F]) -> Option<F> {
    let ev = |p: &crate::ratfun::Poly| -> F {
        let proto = &vals[0];
        let mut acc = proto.zero_like();
        for (m, c) in p.terms() {
            let mut t = proto.from_int_like(c);
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&vals[i]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    };
    let d = ev(f.den());
    Some(ev(f.num()).mul(&d.inv()?))
}

impl fmt::Debug for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Coef for SymbolicScalar {
    fn zero_like(&self) -> Self {
        SymbolicScalar(RatFun::zero(self.0.vars().clone()))
    }
    fn one_like(&self) -> Self {
        SymbolicScalar(RatFun::one(self.0.vars().clone()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        SymbolicScalar(&self.0 + &o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        SymbolicScalar(&self.0 - &o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        SymbolicScalar(&self.0 * &o.0)
    }
    fn neg(&self) -> Self {
        SymbolicScalar(self.0.neg())
    }
    fn scale(&self, c: &Rat) -> Self {
        SymbolicScalar(self.0.scale(c))
    }
    fn adams(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("Adams index must be positive".into()));
        }
        Ok(SymbolicScalar(self.0.inflate(k as u32)))
    }
}

impl Scalar for SymbolicScalar {
    type Ctx = Arc<VarSet>;

    fn ctx(&self) -> Arc<VarSet> {
        self.0.vars().clone()
    }
    fn from_rat(ctx: &Arc<VarSet>, c: &Rat) -> Self {
        SymbolicScalar(RatFun::from_rat(ctx.clone(), c))
    }
    fn try_div(&self, o: &Self) -> Result<Self> {
        Ok(SymbolicScalar(self.0.try_div(&o.0)?))
    }
    fn neg_sqrt_q_pow(ctx: &Arc<VarSet>, m: i64) -> Self {
        let v = RatFun::var(ctx.clone(), 0).neg();
        SymbolicScalar(v.pow(m).expect("v is nonzero"))
    }
    fn as_rat(&self) -> Option<Rat> {
        self.0.constant_value()
    }
}

// ---------------------------------------------------------------------------

/// Context of the numeric backend: base field size and default depth.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TowerCtx {
    pub q: u64,
    pub depth: usize,
}

/// Values over `F_{q^j}` for `j = 1..=depth`, each in `Q(sqrt q)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TowerScalar {
    q: u64,
    levels: Vec<QSqrt>,
}

impl TowerScalar {
    pub fn from_levels(q: u64, levels: Vec<QSqrt>) -> TowerScalar {
        assert!(!levels.is_empty(), "tower needs at least one level");
        assert!(levels.iter().all(|x| x.q == q));
        TowerScalar { q, levels }
    }

    /// Builds a tower from a per-level function.
    pub fn from_fn(ctx: &TowerCtx, f: impl Fn(u32) -> QSqrt) -> TowerScalar {
        TowerScalar { q: ctx.q, levels: (1..=ctx.depth as u32).map(f).collect() }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn base_q(&self) -> u64 {
        self.q
    }

    pub fn levels(&self) -> &[QSqrt] {
        &self.levels
    }

    /// Value over the base field.
    pub fn level1(&self) -> &QSqrt {
        &self.levels[0]
    }

    pub fn truncate(&self, depth: usize) -> TowerScalar {
        TowerScalar { q: self.q, levels: self.levels[..depth.min(self.levels.len())].to_vec() }
    }

    fn zip(&self, o: &Self, f: impl Fn(&QSqrt, &QSqrt) -> QSqrt) -> Self {
        assert_eq!(self.q, o.q, "tower base mismatch");
        TowerScalar { q: self.q, levels: self.levels.iter().zip(&o.levels).map(|(a, b)| f(a, b)).collect() }
    }
}

impl fmt::Debug for TowerScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.levels.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

impl fmt::Display for TowerScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.levels[0])
    }
}

impl Coef for TowerScalar {
    fn zero_like(&self) -> Self {
        TowerScalar { q: self.q, levels: self.levels.iter().map(Field::zero_like).collect() }
    }
    fn one_like(&self) -> Self {
        TowerScalar { q: self.q, levels: self.levels.iter().map(Field::one_like).collect() }
    }
    fn is_zero(&self) -> bool {
        self.levels.iter().all(Field::is_zero_elem)
    }
    fn add(&self, o: &Self) -> Self {
        self.zip(o, Field::add)
    }
    fn sub(&self, o: &Self) -> Self {
        self.zip(o, Field::sub)
    }
    fn mul(&self, o: &Self) -> Self {
        self.zip(o, Field::mul)
    }
    fn neg(&self) -> Self {
        TowerScalar { q: self.q, levels: self.levels.iter().map(Field::neg).collect() }
    }
    fn scale(&self, c: &Rat) -> Self {
        let k = QSqrt::rational(c.clone(), self.q);
        TowerScalar { q: self.q, levels: self.levels.iter().map(|x| Field::mul(x, &k)).collect() }
    }
    fn adams(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("Adams index must be positive".into()));
        }
        if k > self.levels.len() {
            return Err(Error::DepthExhausted { needed: k, depth: self.levels.len() });
        }
        let levels = self.levels.iter().skip(k - 1).step_by(k).cloned().collect();
        Ok(TowerScalar { q: self.q, levels })
    }
}

impl Scalar for TowerScalar {
    type Ctx = TowerCtx;

    fn ctx(&self) -> TowerCtx {
        TowerCtx { q: self.q, depth: self.levels.len() }
    }
    fn from_rat(ctx: &TowerCtx, c: &Rat) -> Self {
        TowerScalar::from_fn(ctx, |_| QSqrt::rational(c.clone(), ctx.q))
    }
    fn try_div(&self, o: &Self) -> Result<Self> {
        assert_eq!(self.q, o.q, "tower base mismatch");
        let levels = self
            .levels
            .iter()
            .zip(&o.levels)
            .map(|(a, b)| b.inv().map(|bi| Field::mul(a, &bi)).ok_or(Error::DivisionByZero))
            .collect::<Result<Vec<_>>>()?;
        Ok(TowerScalar { q: self.q, levels })
    }
    fn neg_sqrt_q_pow(ctx: &TowerCtx, m: i64) -> Self {
        TowerScalar::from_fn(ctx, |j| {
            let base = QSqrt::sqrt_q(ctx.q).pow(j).neg();
            let p = base.pow(m.unsigned_abs() as u32);
            if m < 0 {
                p.inv().unwrap()
            } else {
                p
            }
        })
    }
    fn as_rat(&self) -> Option<Rat> {
        let first = &self.levels[0];
        (first.is_rational() && self.levels.iter().all(|x| x == first)).then(|| first.a.clone())
    }
}

/// Converts a nonnegative rational that must be an integer into `u64`.
pub fn rat_to_u64(r: &Rat) -> Option<u64> {
    if r.is_integer() {
        r.to_integer().to_u64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        assert_eq!(rat(1, 2) + rat(1, 3), rat(5, 6));
        let ctx = SymbolicScalar::context(1);
        let v = SymbolicScalar::v(&ctx);
        assert_eq!(v.mul(&v), SymbolicScalar::q(&ctx));
        let q = 5u64;
        let x = QSqrt::new(int(3), int(2), q);
        let y = QSqrt::new(int(3), int(-2), q);
        assert_eq!(Field::mul(&x, &y), QSqrt::rational(int(9 - 4 * 5), q));
    }

    #[test]
    fn adams_examples() {
        let ctx = SymbolicScalar::context(1);
        let v = SymbolicScalar::v(&ctx);
        assert_eq!(v.adams(2).unwrap(), v.mul(&v));
        let one = SymbolicScalar::one(&ctx);
        let a = SymbolicScalar::a(&ctx, 1);
        let f = one.try_div(&one.sub(&a)).unwrap();
        let expect = one.try_div(&one.sub(&a.mul(&a))).unwrap();
        assert_eq!(f.adams(2).unwrap(), expect);
        let t = TowerScalar::from_levels(3, (1..=4).map(|i| QSqrt::rational(int(i), 3)).collect());
        assert_eq!(t.adams(2).unwrap(), TowerScalar::from_levels(3, vec![QSqrt::rational(int(2), 3), QSqrt::rational(int(4), 3)]));
        assert!(matches!(t.adams(5), Err(Error::DepthExhausted { .. })));
    }

    #[test]
    fn perfect_square_folds() {
        let x = QSqrt::sqrt_q(4);
        assert!(x.is_rational());
        assert_eq!(x.a, int(2));
    }

    #[test]
    fn neg_sqrt_q_tower() {
        let ctx = TowerCtx { q: 2, depth: 2 };
        let u = TowerScalar::neg_sqrt_q_pow(&ctx, 3);
        // level 1: -2 sqrt2, level 2: (-2)^3 = -8
        assert_eq!(u.levels()[0], QSqrt::new(int(0), int(-2), 2));
        assert_eq!(u.levels()[1], QSqrt::rational(int(-8), 2));
        let uinv = TowerScalar::neg_sqrt_q_pow(&ctx, -3);
        assert!(u.mul(&uinv).as_rat() == Some(int(1)));
    }

    #[test]
    fn specialization_matches_tower_values() {
        let ctx = SymbolicScalar::context(1);
        let v = SymbolicScalar::v(&ctx);
        let a = SymbolicScalar::a(&ctx, 1);
        let x = v.add(&a.mul(&a)).try_div(&a.sub(&SymbolicScalar::one(&ctx))).unwrap();
        let s = x.specialize(4, &[int(-2)], 1).unwrap();
        assert_eq!(s, QSqrt::rational(rat(6, -3), 4));
    }
}
