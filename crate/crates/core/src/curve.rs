//! Curves over finite fields, described through their zeta functions.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratfun::{MonoMap, RatFun, VarSet, MAX_VARS};
use crate::scalar::{int, Coef, QSqrt, Rat, Scalar, SymbolicScalar, TowerCtx, TowerScalar};

/// Curve specification as accepted from configuration files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub genus: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_counts: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Symbolic,
    /// `e` holds the elementary symmetric functions `e_0..e_{2g}` of the Weil numbers.
    Numeric { q: u64, point_counts: Vec<i64>, e: Vec<BigInt> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveData {
    genus: usize,
    kind: CurveKind,
}

fn newton_e_from_p(p: &[BigInt], n: usize) -> Result<Vec<BigInt>> {
    // k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i
    let mut e = vec![BigInt::one()];
    for k in 1..=n {
        let mut s = BigInt::zero();
        for i in 1..=k {
            let t = &e[k - i] * &p[i];
            if i % 2 == 1 {
                s += t;
            } else {
                s -= t;
            }
        }
        let (q, r) = s.div_rem(&BigInt::from(k));
        if !r.is_zero() {
            return Err(Error::Precondition(
                "point counts do not come from integral Weil polynomial coefficients".into(),
            ));
        }
        e.push(q);
    }
    Ok(e)
}

/// Power sums `p_1..p_n` (index 0 unused) of the roots given by `e_0..e_m`.
fn newton_p_from_e(e: &[BigInt], n: usize) -> Vec<BigInt> {
    let m = e.len() - 1;
    let mut p = vec![BigInt::zero(); n + 1];
    for k in 1..=n {
        let mut s = BigInt::zero();
        for i in 1..k.min(m + 1) {
            let t = &e[i] * &p[k - i];
            if i % 2 == 1 {
                s += t;
            } else {
                s -= t;
            }
        }
        if k <= m {
            let t = &e[k] * BigInt::from(k);
            if k % 2 == 1 {
                s += t;
            } else {
                s -= t;
            }
        }
        p[k] = s;
    }
    p
}

impl CurveData {
    pub fn symbolic(genus: usize) -> Result<CurveData> {
        if genus + 1 + 4 > MAX_VARS {
            return Err(Error::Precondition(format!("symbolic genus {genus} is too large")));
        }
        Ok(CurveData { genus, kind: CurveKind::Symbolic })
    }

    /// Curve from `q` and `N_1..N_g`; checks the Weil bound and `P(1) > 0`.
    pub fn numeric(q: u64, point_counts: &[i64]) -> Result<CurveData> {
        let g = point_counts.len();
        if q < 2 {
            return Err(Error::Precondition("q must be a prime power >= 2".into()));
        }
        let qb = BigInt::from(q);
        let mut p = vec![BigInt::zero()];
        for (j, &n) in point_counts.iter().enumerate() {
            let qj = qb.pow(j as u32 + 1);
            let pj = &qj + 1 - BigInt::from(n);
            // |p_j| <= 2g q^{j/2}  <=>  p_j^2 <= 4 g^2 q^j
            if &pj * &pj > BigInt::from(4 * g * g) * &qj {
                return Err(Error::Precondition(format!("N_{} = {n} violates the Weil bound", j + 1)));
            }
            p.push(pj);
        }
        let half = newton_e_from_p(&p, g)?;
        let mut e = half.clone();
        for j in (0..g).rev() {
            e.push(&half[j] * qb.pow((g - j) as u32));
        }
        let c = CurveData { genus: g, kind: CurveKind::Numeric { q, point_counts: point_counts.to_vec(), e } };
        if !c.p_at_one_level(1)?.is_positive() {
            return Err(Error::Precondition("P(1) must be positive".into()));
        }
        Ok(c)
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<CurveData> {
        match (&spec.q, &spec.point_counts) {
            (Some(q), Some(n)) => {
                if n.len() != spec.genus {
                    return Err(Error::Precondition("need exactly g point counts".into()));
                }
                CurveData::numeric(*q, n)
            }
            (Some(q), None) if spec.genus == 0 => CurveData::numeric(*q, &[]),
            (None, None) => CurveData::symbolic(spec.genus),
            _ => Err(Error::Precondition("numeric curves need q and point_counts".into())),
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.kind, CurveKind::Symbolic)
    }

    pub fn q(&self) -> Option<u64> {
        match &self.kind {
            CurveKind::Numeric { q, .. } => Some(*q),
            CurveKind::Symbolic => None,
        }
    }

    pub fn spec(&self) -> CurveSpec {
        match &self.kind {
            CurveKind::Symbolic => {
                CurveSpec { genus: self.genus, backend: Some("symbolic".into()), q: None, point_counts: None }
            }
            CurveKind::Numeric { q, point_counts, .. } => CurveSpec {
                genus: self.genus,
                backend: Some("numeric".into()),
                q: Some(*q),
                point_counts: Some(point_counts.clone()),
            },
        }
    }

    /// Coefficients of `P_k(T) = prod (1 - w_i^k T)`; numeric backend only.
    pub fn zeta_numerator_level(&self, k: usize) -> Result<Vec<BigInt>> {
        let CurveKind::Numeric { e, .. } = &self.kind else {
            return Err(Error::BackendMismatch);
        };
        let g2 = 2 * self.genus;
        let p = newton_p_from_e(e, k * g2.max(1));
        let pk: Vec<BigInt> = (0..=g2).map(|j| if j == 0 { BigInt::zero() } else { p[k * j].clone() }).collect();
        let ek = newton_e_from_p(&pk, g2)?;
        Ok(ek.iter().enumerate().map(|(j, x)| if j % 2 == 1 { -x } else { x.clone() }).collect())
    }

    fn p_at_one_level(&self, k: usize) -> Result<BigInt> {
        Ok(self.zeta_numerator_level(k)?.iter().sum())
    }

    /// `N_k = |X(F_{q^k})|`, numeric backend.
    pub fn point_count_level(&self, k: usize) -> Result<BigInt> {
        let CurveKind::Numeric { q, e, .. } = &self.kind else {
            return Err(Error::BackendMismatch);
        };
        let p = newton_p_from_e(e, k.max(1));
        Ok(BigInt::from(*q).pow(k as u32) + 1 - &p[k])
    }

    /// Zeta data at Adams level `k` (symbolic curves only have level 1).
    pub fn zeta(&self, level: usize) -> Result<Zeta> {
        match &self.kind {
            CurveKind::Symbolic => {
                if level != 1 {
                    return Err(Error::Precondition("symbolic curves use Adams operations instead of levels".into()));
                }
                let scalars = SymbolicScalar::context(self.genus);
                let ti = scalars.len();
                let vs = VarSet::new(scalars.names().iter().cloned().chain(["T".to_string()]));
                let v2 = RatFun::var(vs.clone(), 0).pow(2).unwrap();
                let tt = RatFun::var(vs.clone(), ti);
                let one = RatFun::one(vs.clone());
                let mut p = one.clone();
                for i in 1..=self.genus {
                    let a = RatFun::var(vs.clone(), i);
                    let conj = &v2 / &a;
                    p = &p * &(&(&one - &(&a * &tt)) * &(&one - &(&conj * &tt)));
                }
                let mut coeffs = Vec::with_capacity(2 * self.genus + 1);
                for c in p.series(ti, 2 * self.genus)? {
                    coeffs.push(c.relabel(&scalars)?);
                }
                Ok(Zeta { genus: self.genus, scalars, q_num: None, p: coeffs })
            }
            CurveKind::Numeric { q, .. } => {
                if level == 0 {
                    return Err(Error::Precondition("levels start at 1".into()));
                }
                let pk = self.zeta_numerator_level(level)?;
                if pk.iter().sum::<BigInt>() <= BigInt::zero() {
                    return Err(Error::Precondition(format!("P_{level}(1) must be positive")));
                }
                let scalars = VarSet::new(Vec::<String>::new());
                let qk = BigInt::from(*q).pow(level as u32);
                let p = pk.into_iter().map(|c| RatFun::from_rat(scalars.clone(), &Rat::from_integer(c))).collect();
                Ok(Zeta { genus: self.genus, scalars, q_num: Some(qk), p })
            }
        }
    }

    /// `|X(F_q)| = q + 1 - sum(a_i + q/a_i)`.
    pub fn points_symbolic(&self) -> Result<SymbolicScalar> {
        if !self.is_symbolic() {
            return Err(Error::BackendMismatch);
        }
        let ctx = SymbolicScalar::context(self.genus);
        let q = SymbolicScalar::q(&ctx);
        let mut x = q.add(&SymbolicScalar::one(&ctx));
        for i in 1..=self.genus {
            let a = SymbolicScalar::a(&ctx, i);
            x = x.sub(&a).sub(&q.try_div(&a)?);
        }
        Ok(x)
    }

    pub fn points_tower(&self, ctx: &TowerCtx) -> Result<TowerScalar> {
        let q = self.q().ok_or(Error::BackendMismatch)?;
        let levels = (1..=ctx.depth)
            .map(|k| Ok(QSqrt::rational(Rat::from_integer(self.point_count_level(k)?), q)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TowerScalar::from_levels(q, levels))
    }

    /// `P(1) = |Pic^0|`.
    pub fn p_one_symbolic(&self) -> Result<SymbolicScalar> {
        let z = self.zeta(1)?;
        Ok(SymbolicScalar(z.p_at_one()))
    }

    pub fn p_one_tower(&self, ctx: &TowerCtx) -> Result<TowerScalar> {
        let q = self.q().ok_or(Error::BackendMismatch)?;
        let levels = (1..=ctx.depth)
            .map(|k| Ok(QSqrt::rational(Rat::from_integer(self.p_at_one_level(k)?), q)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TowerScalar::from_levels(q, levels))
    }

    /// Rational Weil numbers when every root equals `+-sqrt(q)` with `q` a square.
    pub fn rational_weil_numbers(&self) -> Option<Vec<Rat>> {
        let CurveKind::Numeric { q, e, .. } = &self.kind else {
            return None;
        };
        let s = num_integer::Roots::sqrt(q);
        if s * s != *q {
            return None;
        }
        // P(T) = (1 - sT)^m (1 + sT)^{2g-m}: try every split.
        let g2 = 2 * self.genus;
        for m in 0..=g2 {
            let mut poly = vec![BigInt::one()];
            for i in 0..g2 {
                let root = if i < m { BigInt::from(s) } else { -BigInt::from(s) };
                let mut next = vec![BigInt::zero(); poly.len() + 1];
                for (j, c) in poly.iter().enumerate() {
                    next[j] += c;
                    next[j + 1] -= c * &root;
                }
                poly = next;
            }
            let target: Vec<BigInt> =
                e.iter().enumerate().map(|(j, x)| if j % 2 == 1 { -x } else { x.clone() }).collect();
            if poly == target && m % 2 == 0 && (g2 - m) % 2 == 0 {
                // a_i and q/a_i coincide, so pair the roots up.
                let mut w = Vec::new();
                for _ in 0..m / 2 {
                    w.push(int(s as i64));
                }
                for _ in 0..(g2 - m) / 2 {
                    w.push(int(-(s as i64)));
                }
                return Some(w);
            }
        }
        None
    }
}

/// Zeta function data ready for evaluation inside rational functions.
///
/// `scalars` is the coefficient universe (`v, a1..ag`, or nothing for numeric
/// curves); evaluation happens in universes that extend it.
#[derive(Clone, Debug)]
pub struct Zeta {
    genus: usize,
    scalars: Arc<VarSet>,
    q_num: Option<BigInt>,
    p: Vec<RatFun>,
}

impl Zeta {
    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn scalars(&self) -> &Arc<VarSet> {
        &self.scalars
    }

    /// `scalars` followed by `extra`.
    pub fn universe(&self, extra: &[String]) -> Arc<VarSet> {
        VarSet::new(self.scalars.names().iter().cloned().chain(extra.iter().cloned()))
    }

    /// Index of the first non-scalar variable.
    pub fn offset(&self) -> usize {
        self.scalars.len()
    }

    /// `q^e` as a scaled monomial.
    pub fn q_pow(&self, e: i32) -> MonoMap {
        match &self.q_num {
            None => MonoMap::constant(Rat::one()).with_exp(0, 2 * e),
            Some(q) => {
                let qe = Rat::from_integer(q.pow(e.unsigned_abs()));
                MonoMap::constant(if e < 0 { qe.recip() } else { qe })
            }
        }
    }

    pub fn q_ratfun(&self, vars: &Arc<VarSet>) -> RatFun {
        RatFun::from_monomap(vars.clone(), &self.q_pow(1))
    }

    pub fn p_coeffs(&self) -> &[RatFun] {
        &self.p
    }

    pub fn p_at_one(&self) -> RatFun {
        self.p.iter().fold(RatFun::zero(self.scalars.clone()), |acc, c| &acc + c)
    }

    fn p_at(&self, vars: &Arc<VarSet>, m: &RatFun) -> Result<RatFun> {
        let mut acc = RatFun::zero(vars.clone());
        for c in self.p.iter().rev() {
            acc = &(&acc * m) + &c.embed(vars)?;
        }
        Ok(acc)
    }

    fn is_constant(m: &MonoMap, target: &MonoMap) -> bool {
        m == target
    }

    /// `Z(m) = P(m) / ((1 - m)(1 - q m))`.
    pub fn zeta_at(&self, vars: &Arc<VarSet>, m: &MonoMap) -> Result<RatFun> {
        if Self::is_constant(m, &MonoMap::constant(Rat::one())) || Self::is_constant(m, &self.q_pow(-1)) {
            return Err(Error::UnhandledSpecialPoint("zeta evaluated at one of its poles".into()));
        }
        let x = RatFun::from_monomap(vars.clone(), m);
        let one = RatFun::one(vars.clone());
        let q = self.q_ratfun(vars);
        let den = &(&one - &x) * &(&one - &(&q * &x));
        self.p_at(vars, &x)?.try_div(&den)
    }

    /// `m^{1-g} Z(m)`.
    pub fn zeta_tilde_at(&self, vars: &Arc<VarSet>, m: &MonoMap) -> Result<RatFun> {
        let z = self.zeta_at(vars, m)?;
        let x = RatFun::from_monomap(vars.clone(), m);
        z.try_mul(&x.pow(1 - self.genus as i64)?)
    }

    /// Starred zeta value at the argument `q^{-1} m'`.
    pub fn zstar_at(&self, vars: &Arc<VarSet>, m_prime: &MonoMap) -> Result<RatFun> {
        if Self::is_constant(m_prime, &MonoMap::constant(Rat::one())) {
            let q = self.q_ratfun(vars);
            let one = RatFun::one(vars.clone());
            let qpow = q.pow(1 - self.genus as i64)?;
            return qpow.try_mul(&self.p_at_one().embed(vars)?)?.try_div(&(&q - &one));
        }
        if Self::is_constant(m_prime, &self.q_pow(1)) {
            return Err(Error::UnhandledSpecialPoint("Z* at z = q is not defined".into()));
        }
        let mut arg = m_prime.clone();
        let qi = self.q_pow(-1);
        arg.coef *= &qi.coef;
        for i in 0..MAX_VARS {
            arg.exps[i] += qi.exps[i];
        }
        self.zeta_at(vars, &arg)
    }
}

/// Integer value of a rational, if it is one and fits.
pub fn rat_to_i64(r: &Rat) -> Option<i64> {
    r.is_integer().then(|| r.to_integer().to_i64()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zvars(z: &Zeta) -> Arc<VarSet> {
        z.universe(&["z".to_string()])
    }

    #[test]
    fn genus_zero_zeta() {
        let c = CurveData::symbolic(0).unwrap();
        let zt = c.zeta(1).unwrap();
        let vs = zvars(&zt);
        let zi = zt.offset();
        let z = RatFun::var(vs.clone(), zi);
        let one = RatFun::one(vs.clone());
        let v2 = RatFun::var(vs.clone(), 0).pow(2).unwrap();
        let got = zt.zeta_at(&vs, &MonoMap::var(zi)).unwrap();
        assert_eq!(got, &one / &(&(&one - &z) * &(&one - &(&v2 * &z))));
        let tilde = zt.zeta_tilde_at(&vs, &MonoMap::var(zi)).unwrap();
        assert_eq!(tilde, &got * &z);
        // Z*(q^{-1} * 1) = q/(q-1)
        let s = zt.zstar_at(&vs, &MonoMap::constant(Rat::one())).unwrap();
        assert_eq!(s, &v2 / &(&v2 - &one));
        let s2 = zt.zstar_at(&vs, &MonoMap::var(zi)).unwrap();
        let qinv_z = &z / &v2;
        assert_eq!(s2, &one / &(&(&one - &qinv_z) * &(&one - &z)));
        assert!(matches!(zt.zstar_at(&vs, &zt.q_pow(1)), Err(Error::UnhandledSpecialPoint(_))));
        assert!(zt.zeta_at(&vs, &MonoMap::constant(Rat::one())).is_err());
    }

    #[test]
    fn elliptic_curve_over_f2() {
        // y^2 + y = x^3 over F_2 has 3 points.
        let c = CurveData::numeric(2, &[3]).unwrap();
        assert_eq!(c.zeta_numerator_level(1).unwrap(), vec![BigInt::from(1), BigInt::from(0), BigInt::from(2)]);
        let zt = c.zeta(1).unwrap();
        let vs = zvars(&zt);
        let s = zt.zstar_at(&vs, &MonoMap::constant(Rat::one())).unwrap();
        assert_eq!(s.constant_value(), Some(int(3)));
        // N_2 = 4 + 1 - (w1^2 + w2^2) with w = +-i sqrt2: sum of squares = -4, N_2 = 9
        assert_eq!(c.point_count_level(2).unwrap(), BigInt::from(9));
        assert_eq!(c.point_count_level(1).unwrap(), BigInt::from(3));
    }

    #[test]
    fn weil_bound_is_checked() {
        assert!(CurveData::numeric(2, &[10]).is_err());
        assert!(CurveData::numeric(4, &[1]).is_ok());
    }

    #[test]
    fn genus_two_levels_reproduce_counts() {
        let c = CurveData::numeric(3, &[4, 10]).unwrap();
        assert_eq!(c.point_count_level(1).unwrap(), BigInt::from(4));
        assert_eq!(c.point_count_level(2).unwrap(), BigInt::from(10));
        for k in 1..=4 {
            let pk = c.zeta_numerator_level(k).unwrap();
            assert_eq!(pk[0], BigInt::one());
            assert!(pk.iter().sum::<BigInt>() > BigInt::zero());
            // functional equation: e_{2g-j} = q^{k(g-j)} e_j
            let q = BigInt::from(3).pow(k as u32);
            assert_eq!(pk[4], &pk[0] * q.pow(2));
            assert_eq!(pk[3], &pk[1] * &q);
        }
    }

    #[test]
    fn symbolic_numerator_is_swap_invariant() {
        let c = CurveData::symbolic(1).unwrap();
        let zt = c.zeta(1).unwrap();
        let vs = zt.scalars().clone();
        let a = RatFun::var(vs.clone(), 1);
        let v2 = RatFun::var(vs.clone(), 0).pow(2).unwrap();
        let swapped: Vec<RatFun> =
            zt.p_coeffs().iter().map(|p| p.substitute(&[(1, &v2 / &a)]).unwrap()).collect();
        assert_eq!(swapped, zt.p_coeffs());
        assert_eq!(zt.p_coeffs()[2], v2);
    }

    #[test]
    fn rational_weil_numbers_for_supersingular_square_q() {
        let c = CurveData::numeric(4, &[9]).unwrap();
        assert_eq!(c.rational_weil_numbers(), Some(vec![int(-2)]));
        assert_eq!(CurveData::numeric(2, &[3]).unwrap().rational_weil_numbers(), None);
    }
}
