//! Dense univariate polynomials and rational functions over an exact field.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact field whose elements may carry context (for example the value of q).
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, k: &BigInt) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;

    fn from_i64_like(&self, k: i64) -> Self {
        self.from_int_like(&BigInt::from(k))
    }

    fn is_one_elem(&self) -> bool {
        *self == self.one_like()
    }
}

impl Field for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn from_int_like(&self, k: &BigInt) -> Self {
        BigRational::from_integer(k.clone())
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
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
        -self
    }
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

/// Polynomial with ascending coefficients, trailing zeros trimmed.
#[derive(Clone, PartialEq, Debug)]
pub struct UPoly<F: Field> {
    proto: F,
    c: Vec<F>,
}

impl<F: Field> UPoly<F> {
    pub fn new(proto: &F, mut c: Vec<F>) -> Self {
        while c.last().is_some_and(|x| x.is_zero_elem()) {
            c.pop();
        }
        UPoly { proto: proto.zero_like(), c }
    }

    pub fn zero(proto: &F) -> Self {
        UPoly { proto: proto.zero_like(), c: Vec::new() }
    }

    pub fn constant(c: F) -> Self {
        let proto = c.zero_like();
        UPoly::new(&proto, vec![c])
    }

    pub fn x(proto: &F) -> Self {
        UPoly::new(proto, vec![proto.zero_like(), proto.one_like()])
    }

    pub fn coeffs(&self) -> &[F] {
        &self.c
    }

    pub fn proto(&self) -> &F {
        &self.proto
    }

    pub fn coeff(&self, k: usize) -> F {
        self.c.get(k).cloned().unwrap_or_else(|| self.proto.zero_like())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> Option<&F> {
        self.c.last()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect();
        UPoly::new(&self.proto, c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| self.coeff(k).sub(&o.coeff(k))).collect();
        UPoly::new(&self.proto, c)
    }

    pub fn neg(&self) -> Self {
        UPoly { proto: self.proto.clone(), c: self.c.iter().map(F::neg).collect() }
    }

    pub fn scale(&self, k: &F) -> Self {
        UPoly::new(&self.proto, self.c.iter().map(|x| x.mul(k)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero(&self.proto);
        }
        let mut c = vec![self.proto.zero_like(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero_elem() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].add(&a.mul(b));
            }
        }
        UPoly::new(&self.proto, c)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dl = d.lc().expect("division by zero polynomial").inv().expect("nonzero leading coefficient");
        let dd = d.c.len() - 1;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (UPoly::zero(&self.proto), self.clone());
        }
        let mut q = vec![self.proto.zero_like(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = r[k + dd].mul(&dl);
            if f.is_zero_elem() {
                continue;
            }
            for (i, dc) in d.c.iter().enumerate() {
                r[k + i] = r[k + i].sub(&f.mul(dc));
            }
            q[k] = f;
        }
        r.truncate(dd);
        (UPoly::new(&self.proto, q), UPoly::new(&self.proto, r))
    }

    pub fn monic(&self) -> Self {
        match self.lc() {
            None => self.clone(),
            Some(l) => self.scale(&l.inv().unwrap()),
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s*self + t*o = g`, `g` monic.
    pub fn ext_gcd(&self, o: &Self) -> (Self, Self, Self) {
        let one = UPoly::constant(self.proto.one_like());
        let zero = UPoly::zero(&self.proto);
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (one.clone(), zero.clone());
        let (mut t0, mut t1) = (zero, one);
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            let t2 = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        match r0.lc().cloned() {
            None => (r0, s0, t0),
            Some(l) => {
                let li = l.inv().unwrap();
                (r0.scale(&li), s0.scale(&li), t0.scale(&li))
            }
        }
    }

    pub fn eval(&self, x: &F) -> F {
        self.c.iter().rev().fold(self.proto.zero_like(), |acc, c| acc.mul(x).add(c))
    }

    /// Replaces x by x^k.
    pub fn inflate(&self, k: usize) -> Self {
        if self.is_zero() || k == 1 {
            return self.clone();
        }
        let mut c = vec![self.proto.zero_like(); (self.c.len() - 1) * k + 1];
        for (i, a) in self.c.iter().enumerate() {
            c[i * k] = a.clone();
        }
        UPoly::new(&self.proto, c)
    }

    pub fn map<G: Field>(&self, proto: &G, f: impl Fn(&F) -> G) -> UPoly<G> {
        UPoly::new(proto, self.c.iter().map(f).collect())
    }

    pub fn derivative(&self) -> Self {
        let c = self.c.iter().enumerate().skip(1).map(|(i, a)| a.mul(&a.from_i64_like(i as i64))).collect();
        UPoly::new(&self.proto, c)
    }

    /// Multiplicity of x as a factor.
    pub fn valuation(&self) -> usize {
        self.c.iter().position(|a| !a.is_zero_elem()).unwrap_or(0)
    }
}

/// Reduced univariate rational function with monic denominator.
#[derive(Clone, PartialEq, Debug)]
pub struct URat<F: Field> {
    num: UPoly<F>,
    den: UPoly<F>,
}

impl<F: Field> URat<F> {
    pub fn new(num: UPoly<F>, den: UPoly<F>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(URat::zero(num.proto()));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.degree() == Some(0) { (num, den) } else { (num.div_rem(&g).0, den.div_rem(&g).0) };
        let l = den.lc().unwrap().inv().unwrap();
        Some(URat { num: num.scale(&l), den: den.scale(&l) })
    }

    pub fn zero(proto: &F) -> Self {
        URat { num: UPoly::zero(proto), den: UPoly::constant(proto.one_like()) }
    }

    pub fn constant(c: F) -> Self {
        let one = c.one_like();
        URat { num: UPoly::constant(c), den: UPoly::constant(one) }
    }

    pub fn from_poly(p: UPoly<F>) -> Self {
        let one = p.proto().one_like();
        URat { num: p, den: UPoly::constant(one) }
    }

    pub fn num(&self) -> &UPoly<F> {
        &self.num
    }

    pub fn den(&self) -> &UPoly<F> {
        &self.den
    }

    pub fn proto(&self) -> &F {
        self.num.proto()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return URat::new(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        let g = self.den.gcd(&o.den);
        let b1 = self.den.div_rem(&g).0;
        let d1 = o.den.div_rem(&g).0;
        URat::new(self.num.mul(&d1).add(&o.num.mul(&b1)), b1.mul(&o.den)).unwrap()
    }

    pub fn neg(&self) -> Self {
        URat { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return URat::zero(self.proto());
        }
        URat::new(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn scale(&self, k: &F) -> Self {
        if k.is_zero_elem() {
            return URat::zero(self.proto());
        }
        URat { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn inv(&self) -> Option<Self> {
        URat::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inv()?))
    }

    pub fn inflate(&self, k: usize) -> Self {
        URat { num: self.num.inflate(k), den: self.den.inflate(k) }
    }

    pub fn map<G: Field>(&self, proto: &G, f: impl Fn(&F) -> G) -> URat<G> {
        URat::new(self.num.map(proto, &f), self.den.map(proto, &f)).expect("map keeps denominator nonzero")
    }

    /// Taylor coefficients at 0 for orders `0..=order`; `None` if 0 is a pole.
    pub fn series(&self, order: usize) -> Option<Vec<F>> {
        let d0inv = self.den.coeff(0).inv()?;
        let mut out: Vec<F> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = self.num.coeff(k);
            for i in 1..=k.min(self.den.c.len().saturating_sub(1)) {
                acc = acc.sub(&self.den.c[i].mul(&out[k - i]));
            }
            out.push(acc.mul(&d0inv));
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn p(c: &[i64]) -> UPoly<BigRational> {
        UPoly::new(&q(0), c.iter().map(|&x| q(x)).collect())
    }

    #[test]
    fn gcd_and_ext_gcd() {
        let a = p(&[-1, 0, 1]); // x^2-1
        let b = p(&[1, 2, 1]); // (x+1)^2
        assert_eq!(a.gcd(&b), p(&[1, 1]));
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }

    #[test]
    fn rational_function_series() {
        let f = URat::new(p(&[1]), p(&[1, 0, -1])).unwrap();
        assert_eq!(f.series(3).unwrap(), vec![q(1), q(0), q(1), q(0)]);
        let g = URat::new(p(&[-1, 0, 1]), p(&[-1, 1])).unwrap();
        assert_eq!(g, URat::from_poly(p(&[1, 1])));
    }
}
