//! Exact multivariate rational functions over Q.
//!
//! A [`RatFun`] is a reduced quotient of two integer polynomials over a named
//! variable universe. Rational scalars are absorbed into the integer contents,
//! so the canonical form is: `gcd(num, den) = 1`, the integer contents are
//! coprime and the lex-leading coefficient of `den` is positive.

pub mod gcd;
mod parse;
pub mod poly;
pub mod univariate;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
pub use poly::{Mono, Poly, MAX_VARS};

/// Named, ordered variable universe.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VarSet {
    names: Vec<String>,
}

impl VarSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Arc<VarSet> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert!(names.len() <= MAX_VARS, "at most {MAX_VARS} variables");
        Arc::new(VarSet { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// True when `self` lists the same variables as the start of `other`.
    pub fn is_prefix_of(&self, other: &VarSet) -> bool {
        self.names.len() <= other.names.len() && self.names[..] == other.names[..self.names.len()]
    }
}

/// Laurent exponent vector.
pub type LExp = [i32; MAX_VARS];

/// A scaled Laurent monomial `coef * x^exps`, used for substitutions and residue points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonoMap {
    pub coef: BigRational,
    pub exps: LExp,
}

impl MonoMap {
    pub fn constant(c: BigRational) -> MonoMap {
        MonoMap { coef: c, exps: [0; MAX_VARS] }
    }

    pub fn var(i: usize) -> MonoMap {
        let mut exps = [0; MAX_VARS];
        exps[i] = 1;
        MonoMap { coef: BigRational::one(), exps }
    }

    pub fn with_exp(mut self, i: usize, e: i32) -> MonoMap {
        self.exps[i] += e;
        self
    }

    pub fn scaled(mut self, c: &BigRational) -> MonoMap {
        self.coef *= c;
        self
    }

    fn pow(&self, k: u32) -> (BigRational, LExp) {
        let mut exps = self.exps;
        for e in exps.iter_mut() {
            *e *= k as i32;
        }
        (num_traits::pow(self.coef.clone(), k as usize), exps)
    }
}

/// Sparse Laurent polynomial with rational coefficients; an intermediate form.
#[derive(Default, Clone, Debug)]
pub(crate) struct LaurentPoly {
    terms: HashMap<LExp, BigRational>,
}

impl LaurentPoly {
    fn add_term(&mut self, e: LExp, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Splits into `(poly, scale, shift)` with `self = poly * scale * x^shift`,
    /// `poly` having integer coefficients and nonnegative exponents.
    fn clear(&self) -> (Poly, BigRational, LExp) {
        let mut shift = [0i32; MAX_VARS];
        let mut first = true;
        let mut den_lcm = BigInt::one();
        for (e, c) in &self.terms {
            if first {
                shift = *e;
                first = false;
            } else {
                for i in 0..MAX_VARS {
                    shift[i] = shift[i].min(e[i]);
                }
            }
            den_lcm = den_lcm.lcm(c.denom());
        }
        let poly = Poly::from_terms(self.terms.iter().map(|(e, c)| {
            let mut m = Mono::ONE;
            for i in 0..MAX_VARS {
                m.0[i] = u16::try_from(e[i] - shift[i]).expect("exponent overflow");
            }
            let ci = c.numer() * (&den_lcm / c.denom());
            (m, ci)
        }));
        (poly, BigRational::new(BigInt::one(), den_lcm), shift)
    }
}

fn split_shift(shift: &LExp) -> (Mono, Mono) {
    let mut pos = Mono::ONE;
    let mut neg = Mono::ONE;
    for i in 0..MAX_VARS {
        if shift[i] > 0 {
            pos.0[i] = shift[i] as u16;
        } else {
            neg.0[i] = (-shift[i]) as u16;
        }
    }
    (pos, neg)
}

/// Exact rational function in a declared variable universe.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFun {
    vars: Arc<VarSet>,
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = poly_to_string(&self.num, &self.vars);
        if self.den.is_one() {
            write!(f, "{n}")
        } else {
            let d = poly_to_string(&self.den, &self.vars);
            let wrap = |s: String, p: &Poly| if p.len() > 1 { format!("({s})") } else { s };
            write!(f, "{}/{}", wrap(n, &self.num), wrap(d, &self.den))
        }
    }
}

/// Human-readable polynomial, e.g. `3*v^2*a1 - 1`.
pub fn poly_to_string(p: &Poly, vars: &VarSet) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        if k == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let abs = c.abs();
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = vars.names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
            factors.push(if e == 1 { name } else { format!("{name}^{e}") });
        }
        if factors.is_empty() {
            s.push_str(&abs.to_string());
        } else {
            if !abs.is_one() {
                s.push_str(&abs.to_string());
                s.push('*');
            }
            s.push_str(&factors.join("*"));
        }
    }
    s
}

impl RatFun {
    /// Normalizes `num/den`. Fails when `den` is zero.
    pub fn new(vars: Arc<VarSet>, num: Poly, den: Poly) -> Result<RatFun> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFun::zero(vars));
        }
        let g = gcd::gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        Ok(RatFun::from_coprime(vars, num, den))
    }

    /// Assumes `gcd(num, den)` is an integer; fixes contents and sign.
    fn from_coprime(vars: Arc<VarSet>, num: Poly, den: Poly) -> RatFun {
        let cn = num.int_content();
        let cd = den.int_content();
        let mut g = cn.gcd(&cd);
        if den.lc().map_or(false, |c| c.is_negative()) {
            g = -g;
        }
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_int(&g), den.div_int(&g)) };
        RatFun { vars, num, den }
    }

    pub fn zero(vars: Arc<VarSet>) -> RatFun {
        RatFun { vars, num: Poly::zero(), den: Poly::one() }
    }

    pub fn one(vars: Arc<VarSet>) -> RatFun {
        RatFun { vars, num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int(vars: Arc<VarSet>, c: i64) -> RatFun {
        RatFun { vars, num: Poly::from_i64(c), den: Poly::one() }
    }

    pub fn from_rat(vars: Arc<VarSet>, c: &BigRational) -> RatFun {
        RatFun::from_coprime(vars, Poly::constant(c.numer().clone()), Poly::constant(c.denom().clone()))
    }

    pub fn from_poly(vars: Arc<VarSet>, p: Poly) -> RatFun {
        RatFun::from_coprime(vars, p, Poly::one())
    }

    pub fn var(vars: Arc<VarSet>, i: usize) -> RatFun {
        assert!(i < vars.len(), "variable index out of range");
        RatFun { vars, num: Poly::var(i), den: Poly::one() }
    }

    /// `coef * x^exps` as a rational function.
    pub fn from_monomap(vars: Arc<VarSet>, m: &MonoMap) -> RatFun {
        let (pos, neg) = split_shift(&m.exps);
        RatFun::from_coprime(
            vars,
            Poly::monomial(pos, m.coef.numer().clone()),
            Poly::monomial(neg, m.coef.denom().clone()),
        )
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        let n = self.num.constant_value()?;
        let d = self.den.constant_value()?;
        Some(BigRational::new(n, d))
    }

    pub fn var_mask(&self) -> u32 {
        self.num.var_mask() | self.den.var_mask()
    }

    fn check_same(&self, o: &RatFun) -> Result<()> {
        if Arc::ptr_eq(&self.vars, &o.vars) || self.vars == o.vars {
            Ok(())
        } else {
            Err(Error::UniverseMismatch)
        }
    }

    /// Re-labels into a larger universe that extends the current one.
    pub fn embed(&self, vars: &Arc<VarSet>) -> Result<RatFun> {
        if !self.vars.is_prefix_of(vars) {
            return Err(Error::UniverseMismatch);
        }
        Ok(RatFun { vars: vars.clone(), num: self.num.clone(), den: self.den.clone() })
    }

    /// Re-labels into a smaller universe; fails if a dropped variable occurs.
    pub fn restrict(&self, vars: &Arc<VarSet>) -> Result<RatFun> {
        if !vars.is_prefix_of(&self.vars) || self.var_mask() >> vars.len() != 0 {
            return Err(Error::UniverseMismatch);
        }
        Ok(RatFun { vars: vars.clone(), num: self.num.clone(), den: self.den.clone() })
    }

    /// Moves into another universe with at least as many variables as are used.
    pub fn relabel(&self, vars: &Arc<VarSet>) -> Result<RatFun> {
        if self.var_mask() >> vars.len() != 0 {
            return Err(Error::UniverseMismatch);
        }
        Ok(RatFun { vars: vars.clone(), num: self.num.clone(), den: self.den.clone() })
    }

    pub fn try_add(&self, o: &RatFun) -> Result<RatFun> {
        self.check_same(o)?;
        Ok(self.add_unchecked(o, false))
    }

    pub fn try_sub(&self, o: &RatFun) -> Result<RatFun> {
        self.check_same(o)?;
        Ok(self.add_unchecked(o, true))
    }

    fn add_unchecked(&self, o: &RatFun, negate: bool) -> RatFun {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { o.neg() } else { o.clone() };
        }
        let vars = self.vars.clone();
        let combine = |x: &Poly, y: &Poly| if negate { x.sub(y) } else { x.add(y) };
        if self.den == o.den {
            let num = combine(&self.num, &o.num);
            if num.is_zero() {
                return RatFun::zero(vars);
            }
            return RatFun::new(vars, num, self.den.clone()).unwrap();
        }
        let g = gcd::gcd(&self.den, &o.den);
        if g.is_one() {
            let num = combine(&self.num.mul(&o.den), &o.num.mul(&self.den));
            if num.is_zero() {
                return RatFun::zero(vars);
            }
            return RatFun::from_coprime(vars, num, self.den.mul(&o.den));
        }
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = o.den.div_exact(&g).unwrap();
        let num = combine(&self.num.mul(&d1), &o.num.mul(&b1));
        if num.is_zero() {
            return RatFun::zero(vars);
        }
        let h = gcd::gcd(&num, &g);
        let (num, g) = if h.is_one() { (num, g) } else { (num.div_exact(&h).unwrap(), g.div_exact(&h).unwrap()) };
        RatFun::from_coprime(vars, num, b1.mul(&d1).mul(&g))
    }

    pub fn try_mul(&self, o: &RatFun) -> Result<RatFun> {
        self.check_same(o)?;
        Ok(self.mul_parts(&o.num, &o.den))
    }

    fn mul_parts(&self, on: &Poly, od: &Poly) -> RatFun {
        let vars = self.vars.clone();
        if self.is_zero() || on.is_zero() {
            return RatFun::zero(vars);
        }
        let g1 = gcd::gcd(&self.num, od);
        let g2 = gcd::gcd(on, &self.den);
        let cut = |p: &Poly, g: &Poly| if g.is_one() { p.clone() } else { p.div_exact(g).unwrap() };
        let num = cut(&self.num, &g1).mul(&cut(on, &g2));
        let den = cut(&self.den, &g2).mul(&cut(od, &g1));
        RatFun::from_coprime(vars, num, den)
    }

    pub fn try_div(&self, o: &RatFun) -> Result<RatFun> {
        self.check_same(o)?;
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.mul_parts(&o.den, &o.num))
    }

    pub fn inv(&self) -> Result<RatFun> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFun::from_coprime(self.vars.clone(), self.den.clone(), self.num.clone()))
    }

    pub fn neg(&self) -> RatFun {
        RatFun { vars: self.vars.clone(), num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, c: &BigRational) -> RatFun {
        if c.is_zero() {
            return RatFun::zero(self.vars.clone());
        }
        RatFun::from_coprime(self.vars.clone(), self.num.scale(c.numer()), self.den.scale(c.denom()))
    }

    pub fn pow(&self, k: i64) -> Result<RatFun> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let e = k.unsigned_abs() as u32;
        Ok(RatFun::from_coprime(self.vars.clone(), base.num.pow(e), base.den.pow(e)))
    }

    /// Replaces every variable by its k-th power (the Adams operation on monomials).
    pub fn inflate(&self, k: u32) -> RatFun {
        RatFun { vars: self.vars.clone(), num: self.num.inflate(k), den: self.den.inflate(k) }
    }

    pub fn inflate_var(&self, var: usize, k: u32) -> RatFun {
        RatFun { vars: self.vars.clone(), num: self.num.inflate_var(var, k), den: self.den.inflate_var(var, k) }
    }

    /// Renames variables: variable `i` becomes `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> RatFun {
        let mut full: Vec<usize> = (0..MAX_VARS).collect();
        full[..perm.len()].copy_from_slice(perm);
        RatFun { vars: self.vars.clone(), num: self.num.permute_vars(&full), den: self.den.permute_vars(&full) }
    }

    fn poly_subst_laurent(p: &Poly, map: &[Option<MonoMap>]) -> LaurentPoly {
        let mut cache: HashMap<(usize, u16), (BigRational, LExp)> = HashMap::new();
        let mut out = LaurentPoly::default();
        for (m, c) in p.terms() {
            let mut coef = BigRational::from_integer(c.clone());
            let mut e: LExp = [0; MAX_VARS];
            for (i, &k) in m.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map.get(i).and_then(|o| o.as_ref()) {
                    None => e[i] += i32::from(k),
                    Some(mm) => {
                        let (pc, pe) = cache.entry((i, k)).or_insert_with(|| mm.pow(u32::from(k)));
                        coef *= &*pc;
                        for j in 0..MAX_VARS {
                            e[j] += pe[j];
                        }
                    }
                }
            }
            out.add_term(e, coef);
        }
        out
    }

    /// Substitutes scaled Laurent monomials for variables.
    pub fn subst_monomial(&self, bindings: &[(usize, MonoMap)]) -> Result<RatFun> {
        let mut map: Vec<Option<MonoMap>> = vec![None; MAX_VARS];
        for (i, m) in bindings {
            map[*i] = Some(m.clone());
        }
        let n = Self::poly_subst_laurent(&self.num, &map);
        let d = Self::poly_subst_laurent(&self.den, &map);
        if d.is_zero() {
            return Err(Error::PoleAtSubstitution);
        }
        if n.is_zero() {
            return Ok(RatFun::zero(self.vars.clone()));
        }
        let (np, ns, nsh) = n.clear();
        let (dp, ds, dsh) = d.clear();
        let mut shift = [0i32; MAX_VARS];
        for i in 0..MAX_VARS {
            shift[i] = nsh[i] - dsh[i];
        }
        let (pos, neg) = split_shift(&shift);
        let scale = ns / ds;
        let num = np.mul_mono(&pos).scale(scale.numer());
        let den = dp.mul_mono(&neg).scale(scale.denom());
        RatFun::new(self.vars.clone(), num, den)
    }

    /// General substitution of rational functions (same universe) for variables.
    pub fn substitute(&self, bindings: &[(usize, RatFun)]) -> Result<RatFun> {
        for (_, r) in bindings {
            self.check_same(r)?;
        }
        let eval = |p: &Poly| -> RatFun {
            let mut powers: HashMap<(usize, u16), RatFun> = HashMap::new();
            let mut acc = RatFun::zero(self.vars.clone());
            for (m, c) in p.terms() {
                let mut rest = Mono::ONE;
                let mut term = RatFun::from_poly(self.vars.clone(), Poly::constant(c.clone()));
                for (i, &k) in m.0.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    match bindings.iter().find(|(j, _)| *j == i) {
                        None => rest.0[i] = k,
                        Some((_, r)) => {
                            let pw = powers.entry((i, k)).or_insert_with(|| r.pow(i64::from(k)).unwrap());
                            term = term.mul_parts(&pw.num, &pw.den);
                        }
                    }
                }
                if !rest.is_one() {
                    term = term.mul_parts(&Poly::monomial(rest, BigInt::one()), &Poly::one());
                }
                acc = acc.add_unchecked(&term, false);
            }
            acc
        };
        let n = eval(&self.num);
        let d = eval(&self.den);
        if d.is_zero() {
            return Err(Error::PoleAtSubstitution);
        }
        n.try_div(&d)
    }

    /// Expands `p(var = point*(1+eps))` as coefficients of `eps^k`, each a Laurent polynomial.
    fn eps_expand(p: &Poly, var: usize, point: &MonoMap) -> Vec<LaurentPoly> {
        let deg = p.degree(var) as usize;
        let mut out: Vec<LaurentPoly> = vec![LaurentPoly::default(); deg + 1];
        let mut ppow: Vec<(BigRational, LExp)> = Vec::with_capacity(deg + 1);
        for k in 0..=deg {
            ppow.push(point.pow(k as u32));
        }
        let binom = binomials(deg);
        for (m, c) in p.terms() {
            let e = m.exp(var) as usize;
            let (pc, pe) = &ppow[e];
            let mut base: LExp = [0; MAX_VARS];
            for j in 0..MAX_VARS {
                base[j] = i32::from(m.0[j]) + pe[j];
            }
            base[var] -= e as i32;
            let coef = pc * BigRational::from_integer(c.clone());
            for (k, slot) in out.iter_mut().enumerate().take(e + 1) {
                slot.add_term(base, &coef * BigRational::from_integer(binom[e][k].clone()));
            }
        }
        out
    }

    fn laurent_to_ratfun(&self, l: &LaurentPoly) -> RatFun {
        if l.is_zero() {
            return RatFun::zero(self.vars.clone());
        }
        let (p, s, sh) = l.clear();
        let (pos, neg) = split_shift(&sh);
        RatFun::from_coprime(
            self.vars.clone(),
            p.mul_mono(&pos).scale(s.numer()),
            Poly::monomial(neg, s.denom().clone()),
        )
    }

    /// Residue of `self * d(var)` at `var = point`.
    ///
    /// Returns the residue and the pole order found (0 when regular).
    pub fn residue(&self, var: usize, point: &MonoMap) -> Result<(RatFun, usize)> {
        if point.exps[var] != 0 {
            return Err(Error::Precondition("residue point must not involve the residue variable".into()));
        }
        if self.is_zero() || self.den.degree(var) == 0 {
            return Ok((RatFun::zero(self.vars.clone()), 0));
        }
        let ne = Self::eps_expand(&self.num, var, point);
        let de = Self::eps_expand(&self.den, var, point);
        let ord = |v: &[LaurentPoly]| v.iter().position(|l| !l.is_zero());
        let od = ord(&de).ok_or(Error::PoleAtSubstitution)?;
        let on = ord(&ne).expect("nonzero numerator");
        if od <= on {
            return Ok((RatFun::zero(self.vars.clone()), 0));
        }
        let m = od - on;
        let nk: Vec<RatFun> = (0..m).map(|k| ne.get(on + k).map_or_else(|| RatFun::zero(self.vars.clone()), |l| self.laurent_to_ratfun(l))).collect();
        let dk: Vec<RatFun> = (0..m).map(|k| de.get(od + k).map_or_else(|| RatFun::zero(self.vars.clone()), |l| self.laurent_to_ratfun(l))).collect();
        let coeffs = series_divide(&nk, &dk, m)?;
        let r = coeffs[m - 1].try_mul(&RatFun::from_monomap(self.vars.clone(), point))?;
        Ok((r, m))
    }

    /// Taylor coefficients in `var` at 0, orders `0..=order`.
    pub fn series(&self, var: usize, order: usize) -> Result<Vec<RatFun>> {
        let split = |p: &Poly| -> Vec<RatFun> {
            p.coefficients_in(var).into_iter().map(|c| RatFun::from_poly(self.vars.clone(), c)).collect()
        };
        let n = split(&self.num);
        let d = split(&self.den);
        if d[0].is_zero() {
            return Err(Error::Precondition("series expansion point is a pole".into()));
        }
        let pad = |mut v: Vec<RatFun>| {
            v.resize(order + 1, RatFun::zero(self.vars.clone()));
            v
        };
        series_divide(&pad(n), &pad(d), order + 1)
    }

    /// `{num: term-map, den: term-map}`; term keys are exponent lists over the universe.
    pub fn to_json(&self) -> Value {
        let nv = self.vars.len();
        let map = |p: &Poly| -> Value {
            Value::Array(
                p.terms()
                    .iter()
                    .map(|(m, c)| json!({"exp": m.0[..nv].to_vec(), "coef": c.to_string()}))
                    .collect(),
            )
        };
        json!({"vars": self.vars.names, "num": map(&self.num), "den": map(&self.den), "text": self.to_string()})
    }
}

/// Power series quotient `n/d` to `len` terms; `d[0]` must be nonzero.
fn series_divide(n: &[RatFun], d: &[RatFun], len: usize) -> Result<Vec<RatFun>> {
    let d0inv = d[0].inv()?;
    let mut q: Vec<RatFun> = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = n.get(k).cloned().unwrap_or_else(|| RatFun::zero(d[0].vars.clone()));
        for i in 1..=k {
            if let Some(di) = d.get(i) {
                if !di.is_zero() && !q[k - i].is_zero() {
                    acc = acc.try_sub(&di.try_mul(&q[k - i])?)?;
                }
            }
        }
        q.push(acc.try_mul(&d0inv)?);
    }
    Ok(q)
}

fn binomials(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![BigInt::one(); i + 1];
        for j in 1..i {
            row[j] = &prev[j - 1] + &prev[j];
        }
        rows.push(row);
    }
    rows
}

macro_rules! forward_op {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&RatFun> for &RatFun {
            type Output = RatFun;
            fn $m(self, o: &RatFun) -> RatFun {
                self.$f(o).expect("rational function arithmetic")
            }
        }
        impl std::ops::$tr<RatFun> for RatFun {
            type Output = RatFun;
            fn $m(self, o: RatFun) -> RatFun {
                self.$f(&o).expect("rational function arithmetic")
            }
        }
    };
}

forward_op!(Add, add, try_add);
forward_op!(Sub, sub, try_sub);
forward_op!(Mul, mul, try_mul);
forward_op!(Div, div, try_div);

impl std::ops::Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun::neg(self)
    }
}

/// Rational functions over a fixed universe form a field.
impl univariate::Field for RatFun {
    fn zero_like(&self) -> Self {
        RatFun::zero(self.vars.clone())
    }
    fn one_like(&self) -> Self {
        RatFun::one(self.vars.clone())
    }
    fn from_int_like(&self, k: &BigInt) -> Self {
        RatFun::from_poly(self.vars.clone(), Poly::constant(k.clone()))
    }
    fn is_zero_elem(&self) -> bool {
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
    fn inv(&self) -> Option<Self> {
        RatFun::inv(self).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Arc<VarSet>, RatFun, RatFun) {
        let vs = VarSet::new(["z", "c"]);
        let z = RatFun::var(vs.clone(), 0);
        let c = RatFun::var(vs.clone(), 1);
        (vs, z, c)
    }

    fn int(vs: &Arc<VarSet>, k: i64) -> RatFun {
        RatFun::from_int(vs.clone(), k)
    }

    #[test]
    fn spec_arith_examples() {
        let (vs, z, _) = setup();
        let one = int(&vs, 1);
        let a = &one / &(&one - &z);
        let b = &one / &(&one + &z);
        let expect = &int(&vs, 2) / &(&one - &(&z * &z));
        assert_eq!(&a + &b, expect);
        let c = &(&one - &(&z * &z)) / &(&one - &z);
        assert_eq!(c, &one + &z);
        let f = &(&z + &int(&vs, 3)) / &(&z * &z - int(&vs, 2));
        assert!((&f / &f).is_one());
        assert!((&f - &f).is_zero());
    }

    #[test]
    fn canonical_sign_and_content() {
        let (vs, z, _) = setup();
        let f = &int(&vs, 2) / &(&int(&vs, -4) * &z);
        assert_eq!(f.to_string(), "-1/2*z");
        assert_eq!(f.den().lc().unwrap(), &BigInt::from(2));
    }

    #[test]
    fn monomial_substitution() {
        let (vs, z, c) = setup();
        let one = int(&vs, 1);
        let f = &one / &(&one - &z);
        let g = f.subst_monomial(&[(0, MonoMap::var(0).with_exp(0, 1))]).unwrap();
        assert_eq!(g, &one / &(&one - &(&z * &z)));
        // pole: 1/(1 - 2 c/z) with c -> z/2
        let h = &one / &(&one - &(&int(&vs, 2) * &(&c / &z)));
        let half = BigRational::new(1.into(), 2.into());
        assert!(matches!(
            h.subst_monomial(&[(1, MonoMap::var(0).scaled(&half))]),
            Err(Error::PoleAtSubstitution)
        ));
        // ratio becomes constant
        let r = &c / &z;
        assert_eq!(r.subst_monomial(&[(1, MonoMap::var(0).scaled(&half))]).unwrap().constant_value(), Some(half));
    }

    #[test]
    fn residues() {
        let (vs, z, c) = setup();
        let one = int(&vs, 1);
        let at_c = MonoMap::var(1);
        let f = &one / &(&z - &c);
        assert_eq!(f.residue(0, &at_c).unwrap(), (one.clone(), 1));
        let f2 = &f * &f;
        let (r, ord) = f2.residue(0, &at_c).unwrap();
        assert!(r.is_zero());
        assert_eq!(ord, 2);
        let g = &z / &(&z - &c).pow(2).unwrap();
        assert_eq!(g.residue(0, &at_c).unwrap().0, one);
        let reg = &one / &(&z + &c);
        assert!(reg.residue(0, &at_c).unwrap().0.is_zero());
    }

    #[test]
    fn series_examples() {
        let (vs, z, c) = setup();
        let one = int(&vs, 1);
        let f = &one / &(&one - &z);
        assert!(f.series(0, 3).unwrap().iter().all(|x| x.is_one()));
        let g = &one / &(&(&one - &z) * &(&one - &(&c * &z)));
        let s = g.series(0, 2).unwrap();
        assert_eq!(s[1], &one + &c);
        assert_eq!(s[2], &(&one + &c) + &(&c * &c));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let (_, z, _) = setup();
        let other = VarSet::new(["w"]);
        let w = RatFun::var(other, 0);
        assert!(matches!(z.try_add(&w), Err(Error::UniverseMismatch)));
    }
}
