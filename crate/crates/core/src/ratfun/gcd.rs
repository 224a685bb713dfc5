//! Multivariate polynomial gcd over Z.
//!
//! Images modulo word-size primes are computed by recursive dense
//! interpolation (Brown), recombined by CRT and certified by trial division.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::poly::{Mono, Poly};

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

#[inline]
fn invmod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    powmod(a, p - 2, p)
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Descending list of primes just below 2^62.
pub(crate) fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut v = Vec::with_capacity(256);
        let mut n = (1u64 << 62) - 1;
        while v.len() < 256 {
            if is_prime_u64(n) {
                v.push(n);
            }
            n -= 2;
        }
        v
    })
}

/// Polynomial over F_p, sorted like [`Poly`].
#[derive(Clone, PartialEq, Eq, Debug)]
struct PolyP {
    terms: Vec<(Mono, u64)>,
}

impl PolyP {
    fn zero() -> PolyP {
        PolyP { terms: Vec::new() }
    }

    fn constant(c: u64) -> PolyP {
        if c == 0 {
            PolyP::zero()
        } else {
            PolyP { terms: vec![(Mono::ONE, c)] }
        }
    }

    fn from_poly(a: &Poly, p: u64) -> PolyP {
        let pb = BigInt::from(p);
        let terms = a
            .terms()
            .iter()
            .filter_map(|(m, c)| {
                let r = c.mod_floor(&pb).to_u64().unwrap();
                (r != 0).then_some((*m, r))
            })
            .collect();
        PolyP { terms }
    }

    fn from_map(map: HashMap<Mono, u64>) -> PolyP {
        let mut terms: Vec<(Mono, u64)> = map.into_iter().filter(|(_, c)| *c != 0).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        PolyP { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    fn lm(&self) -> Mono {
        self.terms[0].0
    }

    fn degree(&self, var: usize) -> u16 {
        self.terms.iter().map(|(m, _)| m.exp(var)).max().unwrap_or(0)
    }

    fn var_mask(&self) -> u32 {
        let mut mask = 0;
        for (m, _) in &self.terms {
            for (i, &e) in m.0.iter().enumerate() {
                if e != 0 {
                    mask |= 1 << i;
                }
            }
        }
        mask
    }

    fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        match it.next() {
            None => Mono::ONE,
            Some((m0, _)) => it.fold(*m0, |acc, (m, _)| acc.meet(m)),
        }
    }

    fn div_mono(&self, m: &Mono) -> PolyP {
        PolyP { terms: self.terms.iter().map(|(t, c)| (t.div(m).unwrap(), *c)).collect() }
    }

    fn mul_mono(&self, m: &Mono) -> PolyP {
        PolyP { terms: self.terms.iter().map(|(t, c)| (t.mul(m), *c)).collect() }
    }

    fn scale(&self, k: u64, p: u64) -> PolyP {
        if k == 0 {
            return PolyP::zero();
        }
        PolyP { terms: self.terms.iter().map(|(m, c)| (*m, mulmod(*c, k, p))).collect() }
    }

    fn monic(&self, p: u64) -> PolyP {
        if self.is_zero() {
            return PolyP::zero();
        }
        let inv = invmod(self.terms[0].1, p);
        self.scale(inv, p)
    }

    fn add(&self, o: &PolyP, p: u64) -> PolyP {
        let (a, b) = (&self.terms, &o.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = addmod(a[i].1, b[j].1, p);
                    if c != 0 {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        PolyP { terms: out }
    }

    fn sub(&self, o: &PolyP, p: u64) -> PolyP {
        self.add(&o.scale(p - 1, p), p)
    }

    fn mul(&self, o: &PolyP, p: u64) -> PolyP {
        if self.is_zero() || o.is_zero() {
            return PolyP::zero();
        }
        let mut map: HashMap<Mono, u64> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let e = map.entry(ma.mul(mb)).or_insert(0);
                *e = addmod(*e, mulmod(*ca, *cb, p), p);
            }
        }
        PolyP::from_map(map)
    }

    fn eval(&self, var: usize, x: u64, p: u64) -> PolyP {
        let mut map: HashMap<Mono, u64> = HashMap::new();
        let mut powers = vec![1u64];
        for (m, c) in &self.terms {
            let e = m.exp(var) as usize;
            while powers.len() <= e {
                let n = mulmod(*powers.last().unwrap(), x, p);
                powers.push(n);
            }
            let e2 = map.entry(m.with_exp(var, 0)).or_insert(0);
            *e2 = addmod(*e2, mulmod(*c, powers[e], p), p);
        }
        PolyP::from_map(map)
    }

    fn div_exact(&self, d: &PolyP, p: u64) -> Option<PolyP> {
        if self.is_zero() {
            return Some(PolyP::zero());
        }
        let (dm, dc) = d.terms[0];
        let dinv = invmod(dc, p);
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some(&(rm, rc)) = rem.terms.first() {
            let qm = rm.div(&dm)?;
            let qc = mulmod(rc, dinv, p);
            let t = PolyP { terms: d.terms.iter().map(|(m, c)| (m.mul(&qm), mulmod(*c, qc, p))).collect() };
            rem = rem.sub(&t, p);
            quot.push((qm, qc));
        }
        Some(PolyP { terms: quot })
    }

    /// Dense univariate coefficients in `var` (all other exponents must be zero).
    fn to_dense(&self, var: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.degree(var) as usize + 1];
        for (m, c) in &self.terms {
            v[m.exp(var) as usize] = *c;
        }
        trim(&mut v);
        v
    }

    fn from_dense(v: &[u64], var: usize) -> PolyP {
        let mut terms = Vec::new();
        for (k, &c) in v.iter().enumerate().rev() {
            if c != 0 {
                terms.push((Mono::var(var, k as u16), c));
            }
        }
        PolyP { terms }
    }
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn dense_rem(a: &mut Vec<u64>, b: &[u64], p: u64) {
    let db = b.len() - 1;
    let inv = invmod(b[db], p);
    while a.len() > db {
        let la = *a.last().unwrap();
        if la != 0 {
            let f = mulmod(la, inv, p);
            let off = a.len() - 1 - db;
            for (i, &bc) in b.iter().enumerate() {
                a[off + i] = submod(a[off + i], mulmod(f, bc, p), p);
            }
        }
        a.pop();
    }
    trim(a);
}

/// Monic gcd of dense univariate polynomials.
fn dense_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        dense_rem(&mut x, &y, p);
        std::mem::swap(&mut x, &mut y);
    }
    if x.is_empty() {
        return x;
    }
    let inv = invmod(*x.last().unwrap(), p);
    x.iter().map(|&c| mulmod(c, inv, p)).collect()
}

fn dense_eval(v: &[u64], x: u64, p: u64) -> u64 {
    v.iter().rev().fold(0, |acc, &c| addmod(mulmod(acc, x, p), c, p))
}

/// Splits `a` into coefficients (dense in `var`) indexed by the remaining monomial.
fn split_by_var(a: &PolyP, var: usize) -> Vec<(Mono, Vec<u64>)> {
    let mut map: HashMap<Mono, Vec<u64>> = HashMap::new();
    for (m, c) in &a.terms {
        let e = m.exp(var) as usize;
        let v = map.entry(m.with_exp(var, 0)).or_default();
        if v.len() <= e {
            v.resize(e + 1, 0);
        }
        v[e] = *c;
    }
    let mut out: Vec<(Mono, Vec<u64>)> = map.into_iter().collect();
    out.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    out
}

/// Content with respect to all variables except `var`, as a monic dense polynomial in `var`.
fn content_in(a: &PolyP, var: usize, p: u64) -> Vec<u64> {
    let mut g: Vec<u64> = Vec::new();
    for (_, c) in split_by_var(a, var) {
        g = if g.is_empty() { dense_gcd(&c, &[], p) } else { dense_gcd(&g, &c, p) };
        if g.len() == 1 {
            break;
        }
    }
    g
}

fn divide_by_univariate(a: &PolyP, c: &[u64], var: usize, p: u64) -> PolyP {
    if c.len() == 1 {
        return a.scale(invmod(c[0], p), p);
    }
    a.div_exact(&PolyP::from_dense(c, var), p).expect("content must divide")
}

/// Monic gcd over F_p (lex leading coefficient 1).
fn gcd_p(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    if a.is_zero() {
        return b.monic(p);
    }
    if b.is_zero() {
        return a.monic(p);
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let mg = ma.meet(&mb);
    let a = a.div_mono(&ma);
    let b = b.div_mono(&mb);
    if a.is_constant() || b.is_constant() {
        return PolyP::constant(1).mul_mono(&mg);
    }
    let mask_a = a.var_mask();
    let mask_b = b.var_mask();
    let mask = mask_a | mask_b;
    // A variable occurring in only one argument cannot occur in the gcd.
    if mask_a != mask_b {
        let only = mask ^ (mask_a & mask_b);
        let var = only.trailing_zeros() as usize;
        let (x, y) = if mask_a & (1 << var) != 0 { (&a, &b) } else { (&b, &a) };
        let mut g = y.clone();
        for (_, coeffs) in split_by_var_full(x, var) {
            g = gcd_p(&g, &coeffs, p);
            if g.is_constant() {
                break;
            }
        }
        return g.mul_mono(&mg).monic(p);
    }
    let last = 31 - mask.leading_zeros() as usize;
    if mask.count_ones() == 1 {
        let g = dense_gcd(&a.to_dense(last), &b.to_dense(last), p);
        return PolyP::from_dense(&g, last).mul_mono(&mg);
    }
    let ca = content_in(&a, last, p);
    let cb = content_in(&b, last, p);
    let cg = dense_gcd(&ca, &cb, p);
    let a = divide_by_univariate(&a, &ca, last, p);
    let b = divide_by_univariate(&b, &cb, last, p);
    let cpoly = PolyP::from_dense(&cg, last).mul_mono(&mg);
    if a.is_constant() || b.is_constant() {
        return cpoly.monic(p);
    }
    let lca = &split_by_var(&a, last)[0].1;
    let lcb = &split_by_var(&b, last)[0].1;
    let gamma = dense_gcd(lca, lcb, p);
    let bound = a.degree(last).min(b.degree(last)) as usize + gamma.len();

    let mut h: Option<PolyP> = None;
    let mut h_lm = Mono::ONE;
    let mut modulus: Vec<u64> = vec![1];
    let mut npts = 0usize;
    let mut t = 0u64;
    loop {
        t += 1;
        assert!(t < p, "ran out of evaluation points");
        let gt = dense_eval(&gamma, t, p);
        if dense_eval(lca, t, p) == 0 || dense_eval(lcb, t, p) == 0 {
            continue;
        }
        let ae = a.eval(last, t, p);
        let be = b.eval(last, t, p);
        if ae.is_zero() || be.is_zero() {
            continue;
        }
        let ge = gcd_p(&ae, &be, p);
        if ge.is_constant() {
            return cpoly.monic(p);
        }
        let ge = ge.scale(gt, p);
        let lm = ge.lm();
        let restart = match &h {
            None => true,
            Some(_) => lm < h_lm,
        };
        if restart {
            h = Some(ge);
            h_lm = lm;
            modulus = vec![p - t, 1];
            npts = 1;
        } else if lm > h_lm {
            continue;
        } else {
            let hp = h.take().unwrap();
            let ht = hp.eval(last, t, p);
            let diff = ge.sub(&ht, p);
            let unchanged = diff.is_zero();
            let hp = if unchanged {
                hp
            } else {
                let mt = dense_eval(&modulus, t, p);
                let factor = invmod(mt, p);
                let mpoly = PolyP::from_dense(&modulus, last).scale(factor, p);
                hp.add(&diff.mul(&mpoly, p), p)
            };
            // modulus *= (x - t)
            let mut next = vec![0u64; modulus.len() + 1];
            for (i, &c) in modulus.iter().enumerate() {
                next[i + 1] = addmod(next[i + 1], c, p);
                next[i] = submod(next[i], mulmod(c, t, p), p);
            }
            modulus = next;
            npts += 1;
            h = Some(hp);
            if !unchanged && npts <= bound {
                continue;
            }
        }
        if npts < 2 && bound > 1 {
            continue;
        }
        let hp = h.as_ref().unwrap();
        let hc = content_in(hp, last, p);
        let cand = divide_by_univariate(hp, &hc, last, p);
        if a.div_exact(&cand, p).is_some() && b.div_exact(&cand, p).is_some() {
            return cand.mul(&cpoly, p).monic(p);
        }
        if npts > bound {
            h = None;
        }
    }
}

/// Coefficients of `x` with respect to `var`, each as a polynomial in the other variables.
fn split_by_var_full(x: &PolyP, var: usize) -> Vec<(u16, PolyP)> {
    let mut map: HashMap<u16, HashMap<Mono, u64>> = HashMap::new();
    for (m, c) in &x.terms {
        map.entry(m.exp(var)).or_default().insert(m.with_exp(var, 0), *c);
    }
    map.into_iter().map(|(e, m)| (e, PolyP::from_map(m))).collect()
}

fn symmetric(c: &BigInt, m: &BigInt, half: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r > half {
        r - m
    } else {
        r
    }
}

/// Gcd over Z: primitive, positive leading coefficient.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let mg = ma.meet(&mb);
    let a = a.div_mono(&ma).primitive();
    let b = b.div_mono(&mb).primitive();
    let mono_part = Poly::monomial(mg, BigInt::one());
    if a.is_constant() || b.is_constant() {
        return mono_part;
    }
    if a == b {
        return a.mul(&mono_part);
    }
    if a.len() <= b.len() {
        if let Some(_) = b.div_exact(&a) {
            return a.mul(&mono_part);
        }
    } else if let Some(_) = a.div_exact(&b) {
        return b.mul(&mono_part);
    }
    let la = a.lc().unwrap().clone();
    let lb = b.lc().unwrap().clone();
    let gamma = la.gcd(&lb);

    let mut acc: Option<(Poly, Mono)> = None;
    let mut modulus = BigInt::one();
    for &p in primes() {
        let pb = BigInt::from(p);
        if (&la % &pb).is_zero() || (&lb % &pb).is_zero() {
            continue;
        }
        let ap = PolyP::from_poly(&a, p);
        let bp = PolyP::from_poly(&b, p);
        let gp = gcd_p(&ap, &bp, p);
        if gp.is_constant() {
            return mono_part;
        }
        let gmod = gamma.mod_floor(&pb).to_u64().unwrap();
        let gp = gp.scale(gmod, p);
        let lm = gp.lm();
        let image = Poly::from_terms(gp.terms.iter().map(|(m, c)| (*m, BigInt::from(*c))));
        let (next, stable) = match acc.take() {
            Some((h, hlm)) if hlm == lm => {
                let combined = crt(&h, &modulus, &image, &pb);
                modulus *= &pb;
                let stable = combined == h;
                (combined, stable)
            }
            Some((h, hlm)) if hlm < lm => {
                acc = Some((h, hlm));
                continue;
            }
            _ => {
                modulus = pb.clone();
                let half = &modulus >> 1;
                let h = Poly::from_terms(image.terms().iter().map(|(m, c)| (*m, symmetric(c, &modulus, &half))));
                (h, false)
            }
        };
        acc = Some((next.clone(), lm));
        if stable {
            let cand = next.primitive();
            if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                return cand.mul(&mono_part);
            }
        }
    }
    panic!("gcd: exhausted primes");
}

fn crt(h: &Poly, m: &BigInt, image: &Poly, p: &BigInt) -> Poly {
    let minv = {
        let mp = m.mod_floor(p);
        let e = p.extended_gcd(&mp);
        e.y.mod_floor(p)
    };
    let mm = m * p;
    let half = &mm >> 1;
    let mut map: HashMap<Mono, (BigInt, BigInt)> = HashMap::new();
    for (mono, c) in h.terms() {
        map.entry(*mono).or_insert((BigInt::zero(), BigInt::zero())).0 = c.clone();
    }
    for (mono, c) in image.terms() {
        map.entry(*mono).or_insert((BigInt::zero(), BigInt::zero())).1 = c.clone();
    }
    Poly::from_terms(map.into_iter().map(|(mono, (u, v))| {
        // x = u + m * ((v - u) * m^{-1} mod p)
        let k = ((&v - &u) * &minv).mod_floor(p);
        let x = &u + m * k;
        (mono, symmetric(&x, &mm, &half))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(i)
    }
    fn c(k: i64) -> Poly {
        Poly::from_i64(k)
    }

    #[test]
    fn primes_are_prime() {
        let ps = primes();
        assert!(ps.len() >= 100);
        assert!(ps.iter().all(|&p| is_prime_u64(p)));
    }

    #[test]
    fn univariate_gcd() {
        let a = x(0).sub(&c(1)).mul(&x(0).add(&c(2)));
        let b = x(0).sub(&c(1)).mul(&x(0).sub(&c(5)));
        assert_eq!(gcd(&a, &b), x(0).sub(&c(1)));
    }

    #[test]
    fn multivariate_gcd() {
        let g = x(0).mul(&x(1)).sub(&x(2).pow(2)).add(&c(3));
        let u = x(0).add(&x(1)).add(&x(2)).pow(2);
        let w = x(1).scale(&BigInt::from(7)).sub(&x(0).mul(&x(2)));
        let a = g.mul(&u);
        let b = g.mul(&w);
        assert_eq!(gcd(&a, &b), g);
        assert!(gcd(&u, &w).is_one());
    }

    #[test]
    fn gcd_with_big_coefficients() {
        let big = BigInt::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
        let g = x(0).scale(&big).add(&x(1)).add(&c(1));
        let a = g.mul(&x(0).sub(&x(1)));
        let b = g.mul(&x(0).add(&c(3)).pow(2));
        assert_eq!(gcd(&a, &b), g);
    }

    #[test]
    fn gcd_with_variable_only_in_one_argument() {
        let g = x(0).add(&c(1));
        let a = g.mul(&x(1).add(&x(0)));
        let b = g.mul(&x(0).sub(&c(2)));
        assert_eq!(gcd(&a, &b), g);
        let a2 = g.mul(&x(3).pow(2).add(&c(1)));
        assert_eq!(gcd(&a2, &g.mul(&x(0))), g);
    }

    #[test]
    fn gcd_monomial_content() {
        let a = x(0).pow(3).mul(&x(1));
        let b = x(0).pow(2).mul(&x(1).pow(2)).add(&x(0).pow(4));
        assert_eq!(gcd(&a, &b), x(0).pow(2));
    }
}
