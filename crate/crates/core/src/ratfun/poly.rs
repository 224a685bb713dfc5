//! Sparse multivariate polynomials with integer coefficients.
//!
//! Terms are kept sorted in descending lexicographic order of their exponent
//! vectors (variable 0 most significant). Variables are addressed by index;
//! naming lives one layer up in [`super::VarSet`].

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Upper bound on the number of variables a polynomial may use.
pub const MAX_VARS: usize = 12;

/// Exponent vector of a monomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mono(pub [u16; MAX_VARS]);

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&e| e != 0).map_or(0, |i| i + 1);
        write!(f, "{:?}", &self.0[..last])
    }
}

impl Mono {
    pub const ONE: Mono = Mono([0; MAX_VARS]);

    pub fn var(i: usize, e: u16) -> Mono {
        let mut m = Mono::ONE;
        m.0[i] = e;
        m
    }

    pub fn from_slice(e: &[u16]) -> Mono {
        assert!(e.len() <= MAX_VARS, "too many variables");
        let mut m = Mono::ONE;
        m.0[..e.len()].copy_from_slice(e);
        m
    }

    #[inline]
    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    #[inline]
    pub fn mul(&self, o: &Mono) -> Mono {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            *a = a.checked_add(*b).expect("exponent overflow");
        }
        r
    }

    #[inline]
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            if *a < *b {
                return None;
            }
            *a -= *b;
        }
        Some(r)
    }

    pub fn meet(&self, o: &Mono) -> Mono {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            *a = (*a).min(*b);
        }
        r
    }

    pub fn join(&self, o: &Mono) -> Mono {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            *a = (*a).max(*b);
        }
        r
    }

    pub fn pow(&self, k: u32) -> Mono {
        let mut r = *self;
        for a in r.0.iter_mut() {
            *a = u16::try_from(u32::from(*a) * k).expect("exponent overflow");
        }
        r
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| u32::from(e)).sum()
    }

    #[inline]
    pub fn exp(&self, var: usize) -> u16 {
        self.0[var]
    }

    pub fn with_exp(&self, var: usize, e: u16) -> Mono {
        let mut r = *self;
        r.0[var] = e;
        r
    }
}

/// Polynomial in `Z[x_0, ..., x_{MAX_VARS-1}]`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Mono, BigInt)>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{m:?}")?;
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Mono::ONE, c)] }
        }
    }

    pub fn from_i64(c: i64) -> Poly {
        Poly::constant(BigInt::from(c))
    }

    pub fn monomial(m: Mono, c: BigInt) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    pub fn var(i: usize) -> Poly {
        Poly::monomial(Mono::var(i, 1), BigInt::one())
    }

    /// Builds a polynomial from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms<I: IntoIterator<Item = (Mono, BigInt)>>(it: I) -> Poly {
        let mut map: HashMap<Mono, BigInt> = HashMap::new();
        for (m, c) in it {
            if c.is_zero() {
                continue;
            }
            *map.entry(m).or_default() += c;
        }
        Poly::from_map(map)
    }

    fn from_map(map: HashMap<Mono, BigInt>) -> Poly {
        let mut terms: Vec<(Mono, BigInt)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Mono, BigInt)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Mono, BigInt)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    /// Single term (including constants).
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        if self.terms.is_empty() {
            Some(BigInt::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> BigInt {
        match self.terms.last() {
            Some((m, c)) if m.is_one() => c.clone(),
            _ => BigInt::zero(),
        }
    }

    pub fn lm(&self) -> Option<Mono> {
        self.terms.first().map(|t| t.0)
    }

    pub fn lc(&self) -> Option<&BigInt> {
        self.terms.first().map(|t| &t.1)
    }

    pub fn degree(&self, var: usize) -> u16 {
        self.terms.iter().map(|(m, _)| m.exp(var)).max().unwrap_or(0)
    }

    pub fn min_degree(&self, var: usize) -> u16 {
        self.terms.iter().map(|(m, _)| m.exp(var)).min().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.total_degree()).max().unwrap_or(0)
    }

    /// Bitmask of variables that occur.
    pub fn var_mask(&self) -> u32 {
        let mut mask = 0u32;
        for (m, _) in &self.terms {
            for (i, &e) in m.0.iter().enumerate() {
                if e != 0 {
                    mask |= 1 << i;
                }
            }
        }
        mask
    }

    /// Largest monomial dividing every term.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        match it.next() {
            None => Mono::ONE,
            Some((m0, _)) => it.fold(*m0, |acc, (m, _)| acc.meet(m)),
        }
    }

    /// Gcd of the integer coefficients, nonnegative.
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect() }
    }

    /// Exact division of all coefficients by an integer.
    pub fn div_int(&self, k: &BigInt) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let (q, r) = c.div_rem(k);
                    debug_assert!(r.is_zero());
                    (*m, q)
                })
                .collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono) -> Poly {
        Poly { terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect() }
    }

    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.div(m).expect("monomial does not divide"), c.clone()))
                .collect(),
        }
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0, c));
        }
        Poly { terms: out }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.merge(o, false)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.merge(o, true)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.is_monomial() {
            let (m, c) = &o.terms[0];
            return Poly { terms: self.terms.iter().map(|(t, d)| (t.mul(m), d * c)).collect() };
        }
        if self.is_monomial() {
            return o.mul(self);
        }
        let mut map: HashMap<Mono, BigInt> = HashMap::with_capacity(self.len() * o.len() / 2 + 1);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let e = map.entry(ma.mul(mb)).or_default();
                *e += ca * cb;
            }
        }
        Poly::from_map(map)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact division; `None` when `d` does not divide `self` in `Z[x]`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.is_monomial() {
            let (m, c) = &d.terms[0];
            let mut terms = Vec::with_capacity(self.len());
            for (t, a) in &self.terms {
                let q = t.div(m)?;
                let (qc, r) = a.div_rem(c);
                if !r.is_zero() {
                    return None;
                }
                terms.push((q, qc));
            }
            return Some(Poly { terms });
        }
        let (dm, dc) = (&d.terms[0].0, &d.terms[0].1);
        let mut rem = self.clone();
        let mut quot: Vec<(Mono, BigInt)> = Vec::new();
        while let Some((rm, rc)) = rem.terms.first() {
            let qm = rm.div(dm)?;
            let (qc, r) = rc.div_rem(dc);
            if !r.is_zero() {
                return None;
            }
            let t = Poly { terms: d.terms.iter().map(|(m, c)| (m.mul(&qm), c * &qc)).collect() };
            rem = rem.sub(&t);
            quot.push((qm, qc));
        }
        Some(Poly { terms: quot })
    }

    /// Evaluates variable `var` at integer `x`.
    pub fn eval_int(&self, var: usize, x: &BigInt) -> Poly {
        let mut map: HashMap<Mono, BigInt> = HashMap::new();
        let mut powers: Vec<BigInt> = vec![BigInt::one()];
        for (m, c) in &self.terms {
            let e = m.exp(var) as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap() * x;
                powers.push(next);
            }
            *map.entry(m.with_exp(var, 0)).or_default() += c * &powers[e];
        }
        Poly::from_map(map)
    }

    /// Coefficients with respect to `var`: index k holds the coefficient of `var^k`.
    pub fn coefficients_in(&self, var: usize) -> Vec<Poly> {
        let deg = self.degree(var) as usize;
        let mut buckets: Vec<Vec<(Mono, BigInt)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            buckets[m.exp(var) as usize].push((m.with_exp(var, 0), c.clone()));
        }
        buckets.into_iter().map(Poly::from_sorted_preserving).collect()
    }

    // Removing one variable from a lex-sorted list keeps relative order only when the
    // variable is the lowest-priority one, so re-sort in general.
    fn from_sorted_preserving(mut terms: Vec<(Mono, BigInt)>) -> Poly {
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    /// Renames variables: variable `i` becomes `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut n = Mono::ONE;
            for (i, &e) in m.0.iter().enumerate() {
                if e != 0 {
                    let j = perm[i];
                    n.0[j] = n.0[j].checked_add(e).expect("exponent overflow");
                }
            }
            (n, c.clone())
        });
        Poly::from_terms(terms)
    }

    /// Replaces every variable by its k-th power.
    pub fn inflate(&self, k: u32) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.pow(k), c.clone())).collect() }
    }

    /// Replaces variable `var` by `var^k`.
    pub fn inflate_var(&self, var: usize, k: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let e = u16::try_from(u32::from(m.exp(var)) * k).expect("exponent overflow");
                    (m.with_exp(var, e), c.clone())
                })
                .collect(),
        }
    }

    /// Normalizes the sign so the leading coefficient is positive.
    pub fn with_positive_lc(self) -> Poly {
        match self.lc() {
            Some(c) if c.is_negative() => self.neg(),
            _ => self,
        }
    }

    /// Primitive part (integer content removed, positive leading coefficient).
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let c = self.int_content();
        let p = if c.is_one() { self.clone() } else { self.div_int(&c) };
        p.with_positive_lc()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(i)
    }

    #[test]
    fn arithmetic_and_exact_division() {
        let a = x(0).add(&Poly::one()); // x+1
        let b = x(0).sub(&x(1)); // x-y
        let p = a.mul(&b);
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert_eq!(p.div_exact(&b).unwrap(), a);
        assert!(p.div_exact(&x(1).add(&Poly::from_i64(3))).is_none());
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn coefficients_and_eval() {
        let p = x(0).mul(&x(1)).add(&x(1).pow(2)).add(&Poly::from_i64(2));
        let cs = p.coefficients_in(1);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[0], Poly::from_i64(2));
        assert_eq!(cs[1], x(0));
        let e = p.eval_int(1, &BigInt::from(3));
        assert_eq!(e, x(0).scale(&BigInt::from(3)).add(&Poly::from_i64(11)));
    }

    #[test]
    fn content_and_primitive() {
        let p = x(0).scale(&BigInt::from(-6)).add(&Poly::from_i64(4));
        assert_eq!(p.int_content(), BigInt::from(2));
        assert_eq!(p.primitive(), x(0).scale(&BigInt::from(3)).sub(&Poly::from_i64(2)));
        let q = x(0).pow(2).mul(&x(1)).add(&x(0).pow(3));
        assert_eq!(q.mono_content(), Mono::var(0, 2));
    }
}
