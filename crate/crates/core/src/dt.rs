//! Generating series of positive vector-bundle counts, DT invariants and
//! Kac polynomials, in both scalar backends.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::CurveData;
use crate::error::{Error, Result};
use crate::hall::{first_difference, CheckResult, LatticePoint, QuiverLattice};
use crate::kernel::{KernelCache, ResidueConvention};
use crate::partition::{enumerate_jordan, enumerate_partitions, JordanType, Partition};
use crate::ratfun::univariate::{Field, UPoly, URat};
use crate::ratfun::{RatFun, VarSet};
use crate::scalar::{int, Coef, QSqrt, Rat, Scalar, SymbolicScalar, TowerCtx, TowerScalar};
use crate::series::{rf_to_series, GradedSeries, RankSeries, TowerZ, ZCoef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `l > 2g - 2`.
    Generic,
    /// `D = K`, `l = 2g - 2`.
    Canonical,
    /// `l <= 0`, nilpotent counting.
    Negative,
}

/// Twist degree `l = deg D` together with the counting regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub l: i64,
    pub flavor: Flavor,
}

impl TwistSpec {
    pub fn new(genus: usize, l: i64, flavor: Flavor) -> Result<TwistSpec> {
        let k = 2 * genus as i64 - 2;
        let ok = match flavor {
            Flavor::Generic => l > k,
            Flavor::Canonical => l == k,
            Flavor::Negative => l <= 0,
        };
        if !ok {
            return Err(Error::Precondition(format!("twist degree {l} does not fit flavor {flavor:?} in genus {genus}")));
        }
        Ok(TwistSpec { l, flavor })
    }

    /// Flavor for DT jobs: canonical at `2g-2`, generic above, rejected below.
    pub fn for_omega(genus: usize, l: i64) -> Result<TwistSpec> {
        let k = 2 * genus as i64 - 2;
        if l < k {
            return Err(Error::Precondition(format!("unsupported twist: DT invariants need l >= 2g-2 = {k}, got {l}")));
        }
        Self::new(genus, l, if l == k { Flavor::Canonical } else { Flavor::Generic })
    }
}

/// `sum_j binom(lambda_j, 2)`: the degree defect of a Jordan stratum per unit of twist.
pub fn n2(lambda: &Partition) -> i64 {
    lambda.parts().iter().map(|&p| (p * (p - 1) / 2) as i64).sum()
}

/// Outcome of the pole audit of one `X_r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleAudit {
    pub r: usize,
    pub ok: bool,
    /// Degree in `z` of the normalized denominator.
    pub den_degree: usize,
}

// ---------------------------------------------------------------------------
// Cyclotomic helpers.

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

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|k| n % k == 0).collect()
}

/// Integer coefficients of the m-th cyclotomic polynomial, ascending.
pub fn cyclotomic(m: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::from(0); m + 1];
    p[0] = BigInt::from(-1);
    p[m] = BigInt::from(1);
    for k in divisors(m) {
        if k == m {
            continue;
        }
        let phi = cyclotomic(k);
        // exact division by a monic polynomial
        let dd = phi.len() - 1;
        let mut q = vec![BigInt::from(0); p.len() - dd];
        for i in (0..q.len()).rev() {
            let f = p[i + dd].clone();
            for (j, c) in phi.iter().enumerate() {
                p[i + j] -= &f * c;
            }
            q[i] = f;
        }
        p = q;
    }
    p
}

/// `sum over primitive m-th roots xi of xi^i`.
fn ramanujan(m: usize, i: usize) -> i64 {
    let g = i.gcd(&m);
    divisors(g).into_iter().map(|e| mobius(m / e) * e as i64).sum()
}

fn upoly_from_ints<F: Field>(proto: &F, c: &[BigInt]) -> UPoly<F> {
    UPoly::new(proto, c.iter().map(|x| proto.from_int_like(x)).collect())
}

/// `-sum_{xi in mu_r} xi^{-d} Res_{z=xi} x(z) dz/z`, by exact traces over `Q[z]/Phi_m`.
pub fn cyclotomic_residue_sum<F: Field>(x: &URat<F>, r: usize, d: i64) -> Result<F> {
    let proto = x.proto().clone();
    let den = x.den();
    let mut total = proto.zero_like();
    for m in divisors(r) {
        let phi = upoly_from_ints(&proto, &cyclotomic(m));
        let (q1, rem) = den.div_rem(&phi);
        if !rem.is_zero() {
            continue;
        }
        if q1.div_rem(&phi).1.is_zero() {
            return Err(Error::IdentityFailure(format!("pole of order >= 2 along Phi_{m}")));
        }
        let (g, s, _) = den.derivative().ext_gcd(&phi);
        if g.degree() != Some(0) {
            return Err(Error::IdentityFailure(format!("repeated root on Phi_{m}")));
        }
        let e = (-d - 1).rem_euclid(m as i64) as usize;
        let mut zpow = vec![proto.zero_like(); e + 1];
        zpow[e] = proto.one_like();
        let h = x.num().mul(&s).mul(&UPoly::new(&proto, zpow)).div_rem(&phi).1;
        for (i, c) in h.coeffs().iter().enumerate() {
            let t = ramanujan(m, i);
            if t != 0 {
                total = total.add(&c.mul(&proto.from_i64_like(t)));
            }
        }
    }
    Ok(total.neg())
}

/// Checks that the denominator divides `prod_{m <= r} Phi_m`.
pub fn audit_urat<F: Field>(x: &URat<F>, r: usize) -> PoleAudit {
    let proto = x.proto().clone();
    let mut p = UPoly::constant(proto.one_like());
    for m in 1..=r {
        p = p.mul(&upoly_from_ints(&proto, &cyclotomic(m)));
    }
    let ok = p.div_rem(x.den()).1.is_zero();
    PoleAudit { r, ok, den_degree: x.den().degree().unwrap_or(0) }
}

// ---------------------------------------------------------------------------
// Backends.

/// Scalar backend: symbolic in the Weil numbers or numeric towers over `F_{q^j}`.
pub trait Backend: Sync + Send {
    type S: Scalar;
    type Z: ZCoef<S = Self::S>;

    fn curve(&self) -> &CurveData;
    fn scalar_ctx(&self, depth: usize) -> <Self::S as Scalar>::Ctx;
    /// Embeds a scalar as a `z`-constant coefficient.
    fn z_scalar(&self, s: &Self::S) -> Self::Z;
    fn z_one(&self, depth: usize) -> Self::Z;
    /// `sum_{|lambda| = r} (-q^{1/2})^{a <lambda,lambda>} z^{b n2(lambda)} J_lambda H_lambda`.
    fn lambda_sum(&self, r: usize, a: i64, b: i64, depth: usize) -> Result<Self::Z>;
    fn points(&self, depth: usize) -> Result<Self::S>;
    fn p_one(&self, depth: usize) -> Result<Self::S>;
    fn residue_sum(&self, x: &Self::Z, r: usize, d: i64) -> Result<Self::S>;
    fn pole_audit(&self, x: &Self::Z, r: usize) -> Result<PoleAudit>;
    fn is_denominator_free(s: &Self::S) -> bool;
    /// Partitions whose residues met a pole of order other than one.
    fn anomalies(&self) -> Vec<(Partition, Vec<usize>)>;

    fn genus(&self) -> usize {
        self.curve().genus()
    }
}

fn neg_v_pow(vars: &Arc<VarSet>, m: i64) -> RatFun {
    RatFun::var(vars.clone(), 0).neg().pow(m).expect("v is nonzero")
}

fn record_anomaly(store: &Mutex<Vec<(Partition, Vec<usize>)>>, lambda: &Partition, orders: &[usize]) {
    if orders.iter().any(|&m| m != 1) {
        let mut s = store.lock().unwrap();
        if !s.iter().any(|(l, _)| l == lambda) {
            s.push((lambda.clone(), orders.to_vec()));
        }
    }
}

/// Symbolic backend: coefficients are rational functions in `v = q^{1/2}` and `a_1..a_g`.
pub struct SymbolicBackend {
    curve: CurveData,
    kernels: KernelCache,
    scalars: Arc<VarSet>,
    anomalies: Mutex<Vec<(Partition, Vec<usize>)>>,
}

impl SymbolicBackend {
    pub fn new(curve: CurveData, conv: ResidueConvention) -> Result<SymbolicBackend> {
        if !curve.is_symbolic() {
            return Err(Error::BackendMismatch);
        }
        let kernels = KernelCache::new(&curve, 1, conv)?;
        let scalars = SymbolicScalar::context(curve.genus());
        Ok(SymbolicBackend { curve, kernels, scalars, anomalies: Mutex::default() })
    }

    pub fn kernels(&self) -> &KernelCache {
        &self.kernels
    }

    pub fn scalars(&self) -> &Arc<VarSet> {
        &self.scalars
    }

    fn to_urat(&self, x: &RatFun) -> Result<URat<RatFun>> {
        let zi = self.scalars.len();
        let proto = RatFun::zero(self.scalars.clone());
        let conv = |p: &crate::ratfun::Poly| -> UPoly<RatFun> {
            UPoly::new(&proto, p.coefficients_in(zi).into_iter().map(|c| RatFun::from_poly(self.scalars.clone(), c)).collect())
        };
        URat::new(conv(x.num()), conv(x.den())).ok_or(Error::DivisionByZero)
    }
}

impl Backend for SymbolicBackend {
    type S = SymbolicScalar;
    type Z = RatFun;

    fn curve(&self) -> &CurveData {
        &self.curve
    }

    fn scalar_ctx(&self, _depth: usize) -> Arc<VarSet> {
        self.scalars.clone()
    }

    fn z_scalar(&self, s: &SymbolicScalar) -> RatFun {
        s.0.embed(self.kernels.z_universe()).expect("scalar universe is a prefix")
    }

    fn z_one(&self, _depth: usize) -> RatFun {
        RatFun::one(self.kernels.z_universe().clone())
    }

    fn lambda_sum(&self, r: usize, a: i64, b: i64, _depth: usize) -> Result<RatFun> {
        let zv = self.kernels.z_universe().clone();
        let zi = self.scalars.len();
        self.kernels.build_l(partition_max_len(r))?;
        let terms = enumerate_partitions(r)
            .into_par_iter()
            .map(|lam| {
                let k = self.kernels.lambda(&lam)?;
                record_anomaly(&self.anomalies, &lam, &k.pole_orders);
                let pre = neg_v_pow(&zv, a * lam.pairing() as i64);
                let shift = RatFun::var(zv.clone(), zi).pow(b * n2(&lam))?;
                pre.try_mul(&shift)?.try_mul(&k.j)?.try_mul(&k.h)
            })
            .collect::<Result<Vec<_>>>()?;
        terms.iter().try_fold(RatFun::zero(zv.clone()), |acc, t| acc.try_add(t))
    }

    fn points(&self, _depth: usize) -> Result<SymbolicScalar> {
        self.curve.points_symbolic()
    }

    fn p_one(&self, _depth: usize) -> Result<SymbolicScalar> {
        self.curve.p_one_symbolic()
    }

    fn residue_sum(&self, x: &RatFun, r: usize, d: i64) -> Result<SymbolicScalar> {
        Ok(SymbolicScalar(cyclotomic_residue_sum(&self.to_urat(x)?, r, d)?))
    }

    fn pole_audit(&self, x: &RatFun, r: usize) -> Result<PoleAudit> {
        Ok(audit_urat(&self.to_urat(x)?, r))
    }

    fn is_denominator_free(s: &SymbolicScalar) -> bool {
        s.0.den().is_monomial()
    }

    fn anomalies(&self) -> Vec<(Partition, Vec<usize>)> {
        self.anomalies.lock().unwrap().clone()
    }
}

fn partition_max_len(r: usize) -> usize {
    r
}

/// Numeric backend: values over `F_{q^j}` for `j = 1..depth`.
pub struct NumericBackend {
    curve: CurveData,
    q: u64,
    conv: ResidueConvention,
    kernels: Mutex<HashMap<usize, Arc<KernelCache>>>,
    anomalies: Mutex<Vec<(Partition, Vec<usize>)>>,
}

impl NumericBackend {
    pub fn new(curve: CurveData, conv: ResidueConvention) -> Result<NumericBackend> {
        let q = curve.q().ok_or(Error::BackendMismatch)?;
        Ok(NumericBackend { curve, q, conv, kernels: Mutex::default(), anomalies: Mutex::default() })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn kernel(&self, level: usize) -> Result<Arc<KernelCache>> {
        if let Some(k) = self.kernels.lock().unwrap().get(&level) {
            return Ok(k.clone());
        }
        let k = Arc::new(KernelCache::new(&self.curve, level, self.conv)?);
        Ok(self.kernels.lock().unwrap().entry(level).or_insert(k).clone())
    }

    fn to_urat(&self, x: &RatFun) -> URat<QSqrt> {
        let proto = QSqrt::rational(int(0), self.q);
        let conv = |p: &crate::ratfun::Poly| -> UPoly<QSqrt> {
            UPoly::new(
                &proto,
                p.coefficients_in(0)
                    .into_iter()
                    .map(|c| QSqrt::rational(Rat::from_integer(c.constant_term()), self.q))
                    .collect(),
            )
        };
        URat::new(conv(x.num()), conv(x.den())).expect("nonzero denominator")
    }
}

impl Backend for NumericBackend {
    type S = TowerScalar;
    type Z = TowerZ;

    fn curve(&self) -> &CurveData {
        &self.curve
    }

    fn scalar_ctx(&self, depth: usize) -> TowerCtx {
        TowerCtx { q: self.q, depth }
    }

    fn z_scalar(&self, s: &TowerScalar) -> TowerZ {
        TowerZ { q: self.q, levels: s.levels().iter().map(|x| URat::constant(x.clone())).collect() }
    }

    fn z_one(&self, depth: usize) -> TowerZ {
        TowerZ::constant(self.q, depth, &int(1))
    }

    fn lambda_sum(&self, r: usize, a: i64, b: i64, depth: usize) -> Result<TowerZ> {
        let parts = enumerate_partitions(r);
        let levels = (1..=depth)
            .into_par_iter()
            .map(|j| {
                let kc = self.kernel(j)?;
                kc.build_l(r)?;
                let proto = QSqrt::rational(int(0), self.q);
                let base = QSqrt::sqrt_q(self.q).pow(j as u32).neg();
                let mut acc = URat::zero(&proto);
                for lam in &parts {
                    let k = kc.lambda(lam)?;
                    record_anomaly(&self.anomalies, lam, &k.pole_orders);
                    let m = a * lam.pairing() as i64;
                    let p = base.pow(m.unsigned_abs() as u32);
                    let pre = if m < 0 { p.inv().ok_or(Error::DivisionByZero)? } else { p };
                    let s = b * n2(lam);
                    if s < 0 {
                        return Err(Error::Precondition("negative degree shift".into()));
                    }
                    let mut zc = vec![proto.zero_like(); s as usize + 1];
                    zc[s as usize] = proto.one_like();
                    let jh = self.to_urat(&k.j.try_mul(&k.h)?);
                    let t = jh.mul(&URat::from_poly(UPoly::new(&proto, zc))).scale(&pre);
                    acc = acc.add(&t);
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TowerZ { q: self.q, levels })
    }

    fn points(&self, depth: usize) -> Result<TowerScalar> {
        self.curve.points_tower(&self.scalar_ctx(depth))
    }

    fn p_one(&self, depth: usize) -> Result<TowerScalar> {
        self.curve.p_one_tower(&self.scalar_ctx(depth))
    }

    fn residue_sum(&self, x: &TowerZ, r: usize, d: i64) -> Result<TowerScalar> {
        let levels = x.levels.iter().map(|l| cyclotomic_residue_sum(l, r, d)).collect::<Result<Vec<_>>>()?;
        Ok(TowerScalar::from_levels(self.q, levels))
    }

    fn pole_audit(&self, x: &TowerZ, r: usize) -> Result<PoleAudit> {
        let level1 = x.levels.first().ok_or(Error::DepthExhausted { needed: 1, depth: 0 })?;
        Ok(audit_urat(level1, r))
    }

    fn is_denominator_free(s: &TowerScalar) -> bool {
        s.levels().iter().all(|x| x.a.is_integer() && x.b.is_integer())
    }

    fn anomalies(&self) -> Vec<(Partition, Vec<usize>)> {
        self.anomalies.lock().unwrap().clone()
    }
}

// ---------------------------------------------------------------------------
// Series.

/// Rank series `sum_lambda (-q^{1/2})^{a <lambda,lambda>} z^{b n2} J H w^{|lambda|}`.
fn lambda_series<B: Backend>(b: &B, a: i64, shift: i64, rmax: usize, depth0: usize) -> Result<RankSeries<B::Z>> {
    let mut coeffs = vec![b.z_one(depth0)];
    for r in 1..=rmax {
        coeffs.push(b.lambda_sum(r, a, shift, (rmax / r).max(1))?);
    }
    let zero = coeffs[0].zero_like();
    Ok(RankSeries::from_ranks(zero, coeffs))
}

/// Positive nilpotent vector-bundle counts for `l <= 0`.
///
/// The stratum of `lambda` sits in degree `sum i deg alpha_i - l n2(lambda)`,
/// hence the factor `z^{-l n2(lambda)}`.
pub fn nil_vec_series<B: Backend>(b: &B, l: i64, rmax: usize, depth0: usize) -> Result<RankSeries<B::Z>> {
    if l > 0 {
        return Err(Error::Precondition(format!("nilpotent series needs l <= 0, got {l}")));
    }
    let g = b.genus() as i64;
    lambda_series(b, 2 * g - 2 - l, -l, rmax, depth0)
}

/// Positive vector-bundle counts for `l >= 2g-2`, via duality with twist `K - D`.
pub fn positive_vec_series<B: Backend>(b: &B, l: i64, rmax: usize, depth0: usize) -> Result<RankSeries<B::Z>> {
    let g = b.genus() as i64;
    if l < 2 * g - 2 {
        return Err(Error::Precondition(format!("positive series needs l >= 2g-2 = {}, got {l}", 2 * g - 2)));
    }
    lambda_series(b, l, l - 2 * g + 2, rmax, depth0)
}

fn q_minus_one<B: Backend>(b: &B, depth: usize) -> B::S {
    let ctx = b.scalar_ctx(depth);
    B::S::q(&ctx).sub(&B::S::one(&ctx))
}

/// `Exp(|X| / (q-1) * z / (1 - z))` as a rank-0 graded series: nilpotent torsion.
pub fn torsion_series<B: Backend>(b: &B, rmax: usize, dmax: usize) -> Result<GradedSeries<B::S>> {
    torsion_with(b, rmax, dmax, false)
}

/// `Exp(q |X| / (q-1) * z / (1 - z))`: torsion sheaves with an arbitrary Higgs field.
pub fn higgs_torsion_series<B: Backend>(b: &B, rmax: usize, dmax: usize) -> Result<GradedSeries<B::S>> {
    torsion_with(b, rmax, dmax, true)
}

fn torsion_with<B: Backend>(b: &B, rmax: usize, dmax: usize, all_fields: bool) -> Result<GradedSeries<B::S>> {
    let depth = dmax.max(rmax).max(1);
    let mut c = b.points(depth)?.try_div(&q_minus_one(b, depth))?;
    if all_fields {
        c = c.mul(&B::S::q(&b.scalar_ctx(depth)));
    }
    let mut g = GradedSeries::zero(c.zero_like(), rmax, dmax);
    for d in 1..=dmax {
        g.set(0, d, c.clone());
    }
    g.exp()
}

/// `X_1..X_R` with `sum X_r w^r = (q-1) Log(positive series)`; index 0 is unused.
pub fn x_r<B: Backend>(b: &B, l: i64, rmax: usize) -> Result<Vec<B::Z>> {
    let f = positive_vec_series(b, l, rmax, rmax.max(1))?;
    let lg = f.log()?;
    let qm1 = b.z_scalar(&q_minus_one(b, rmax.max(1)));
    Ok((0..=rmax).map(|r| if r == 0 { lg.rank(0).clone() } else { lg.rank(r).mul(&qm1) }).collect())
}

/// `A^{>=0}_{r,d}` from `(q-1) Log` of the full nilpotent `D = 0` series.
pub fn kac_positive<B: Backend>(b: &B, rmax: usize, dmax: usize) -> Result<GradedSeries<B::S>> {
    let depth0 = rmax.max(dmax).max(1);
    let vec = rf_to_series(&nil_vec_series(b, 0, rmax, depth0)?, dmax)?;
    let full = vec.mul(&torsion_series(b, rmax, dmax)?)?;
    Ok(full.log()?.mul_coef(&q_minus_one(b, depth0)))
}

// ---------------------------------------------------------------------------
// DT extraction.

/// One DT invariant per residue class of `d` modulo `r`.
#[derive(Clone, Debug)]
pub struct OmegaEntry<S> {
    pub r: usize,
    pub d_mod_r: usize,
    pub stabilized: Option<S>,
    pub residue: Option<S>,
}

/// Result of stabilization for one rank.
#[derive(Clone, Debug)]
pub struct Stabilization<S> {
    /// Value per residue class `0..r`, already multiplied by `q` in the canonical case.
    pub values: Vec<S>,
    /// `max(0, l binom(r, 2))`.
    pub threshold: usize,
    /// Earliest degree from which the expansion is visibly `r`-periodic.
    pub first_periodic: usize,
    /// Number of coefficients computed.
    pub expanded_to: usize,
}

/// `max(0, l * binom(r, 2))`.
pub fn stabilization_threshold(l: i64, r: usize) -> usize {
    (l * (r * (r.saturating_sub(1)) / 2) as i64).max(0) as usize
}

/// Reads `Omega(r, d)` off the Taylor expansion of `X_r`, demanding three
/// identical periods starting at the threshold.
pub fn omega_stabilized<B: Backend>(_b: &B, x: &B::Z, tw: TwistSpec, r: usize) -> Result<Stabilization<B::S>> {
    let t = stabilization_threshold(tw.l, r);
    let n = t + 3 * r;
    let seq = x.expand(n - 1)?;
    for i in t..t + 2 * r {
        if seq[i] != seq[i + r] {
            return Err(Error::IdentityFailure(format!(
                "X_{r} not {r}-periodic from the threshold {t}: coefficients {i} and {} differ",
                i + r
            )));
        }
    }
    let mut first = t;
    while first > 0 && seq[first - 1] == seq[first - 1 + r] {
        first -= 1;
    }
    let mut values = vec![seq[0].zero_like(); r];
    for i in t..t + r {
        values[i % r] = seq[i].clone();
    }
    if tw.flavor == Flavor::Canonical {
        let q = B::S::q(&values[0].ctx());
        values = values.iter().map(|v| v.mul(&q)).collect();
    }
    Ok(Stabilization { values, threshold: t, first_periodic: first, expanded_to: n - 1 })
}

/// `Omega(r, d)` by the cyclotomic residue formula.
pub fn omega_residue<B: Backend>(b: &B, x: &B::Z, tw: TwistSpec, r: usize, d: i64) -> Result<B::S> {
    let v = b.residue_sum(x, r, d)?;
    Ok(if tw.flavor == Flavor::Canonical { v.mul(&B::S::q(&v.ctx())) } else { v })
}

/// Closed form of the rank-one invariant.
pub fn omega_rank_one<B: Backend>(b: &B, tw: TwistSpec) -> Result<B::S> {
    let ctx = b.scalar_ctx(1);
    let p1 = b.p_one(1)?;
    let g = b.genus() as i64;
    Ok(match tw.flavor {
        Flavor::Canonical => p1.mul(&B::S::q(&ctx)),
        _ => B::S::neg_sqrt_q_pow(&ctx, tw.l + 2 - 2 * g).mul(&p1),
    })
}

/// Table of DT invariants together with diagnostics.
#[derive(Clone, Debug)]
pub struct DtTable<S> {
    pub twist: TwistSpec,
    pub rmax: usize,
    pub entries: Vec<OmegaEntry<S>>,
    pub stabilization: Vec<Stabilization<S>>,
    pub audits: Vec<PoleAudit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Stabilized,
    Residue,
    Both,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s {
            "stabilized" => Ok(Method::Stabilized),
            "residue" => Ok(Method::Residue),
            "both" => Ok(Method::Both),
            _ => Err(Error::Parse(format!("unknown method {s}"))),
        }
    }
}

pub fn omega_table<B: Backend>(b: &B, tw: TwistSpec, rmax: usize, method: Method) -> Result<DtTable<B::S>> {
    if tw.flavor == Flavor::Negative {
        return Err(Error::Precondition("DT invariants need l >= 2g-2".into()));
    }
    let xs = x_r(b, tw.l, rmax)?;
    let mut entries = Vec::new();
    let mut stabs = Vec::new();
    let mut audits = Vec::new();
    for r in 1..=rmax {
        audits.push(b.pole_audit(&xs[r], r)?);
        let st = match method {
            Method::Residue => None,
            _ => Some(omega_stabilized(b, &xs[r], tw, r)?),
        };
        for dm in 0..r {
            let res = match method {
                Method::Stabilized => None,
                _ => Some(omega_residue(b, &xs[r], tw, r, dm as i64)?),
            };
            entries.push(OmegaEntry { r, d_mod_r: dm, stabilized: st.as_ref().map(|s| s.values[dm].clone()), residue: res });
        }
        if let Some(s) = st {
            stabs.push(s);
        }
    }
    Ok(DtTable { twist: tw, rmax, entries, stabilization: stabs, audits })
}

/// Stable Kac values `A_{r,d}` per residue class, read at degrees past `(2g-2) binom(r,2)`.
pub fn kac_stable<S: Scalar>(table: &GradedSeries<S>, genus: usize, r: usize) -> Result<Vec<S>> {
    let t = stabilization_threshold(2 * genus as i64 - 2, r);
    if t + r > table.dmax() + 1 {
        return Err(Error::Budget(format!("need dmax >= {} for rank {r}", t + r - 1)));
    }
    let mut out = vec![table.zero_elem().clone(); r];
    for d in t..t + r {
        out[d % r] = table.get(r, d).clone();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Identity suite.

/// Exact identity checks at truncation `(rmax, dmax)`; `seed` drives the random pairs of (d).
pub fn identity_suite<B: Backend>(b: &B, rmax: usize, dmax: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let g = b.genus();
    let depth = rmax.max(dmax).max(1);
    let ctx = b.scalar_ctx(depth);
    let q = B::S::q(&ctx);
    let qm1 = q.sub(&B::S::one(&ctx));
    let a = kac_positive(b, rmax, dmax)?;
    let mut out = Vec::new();

    if g == 0 {
        // every positive-rank pair is nilpotent at l = -2; torsion carries any Higgs field
        let lhs = rf_to_series(&nil_vec_series(b, -2, rmax, depth)?, dmax)?.mul(&higgs_torsion_series(b, rmax, dmax)?)?;
        let rhs = a.mul_coef(&q.try_div(&qm1)?).exp()?;
        out.push(CheckResult::new("(a) canonical series equals Exp(q A / (q-1))", first_difference(&lhs, &rhs)));
    }

    let lhs = a.mul_coef(&q.try_div(&qm1)?).exp()?;
    let rhs = a.mul_coef(&B::S::one(&ctx).try_div(&qm1)?).exp()?.mul(&a.exp()?)?;
    out.push(CheckResult::new("(b) Exp(qA/(q-1)) = Exp(A/(q-1)) Exp(A)", first_difference(&lhs, &rhs)));

    let mut diff = None;
    'outer: for l in [0i64, -1, -2] {
        let lat = QuiverLattice::new(1, g, l)?;
        let lat0 = QuiverLattice::new(1, g, 0)?;
        for alpha in enumerate_jordan(3, 4, 3, l) {
            let r = alpha.rank();
            let lam = alpha.shape().lambda;
            let ad = lat.a_d(&alpha)?;
            let a0 = lat0.a_d(&JordanType::new(alpha.alphas.clone(), 0))?;
            let twice = 2 * a0 + l * (r * r - lam.pairing() as i64);
            if 2 * ad != twice {
                diff = Some(format!("{alpha:?}: a_D = {ad}, closed form {}", twice / 2));
                break 'outer;
            }
        }
    }
    out.push(CheckResult::new("(c) a_D = a_0 + (l/2) r^2 - (l/2) <lambda,lambda>", diff));

    let mut rng = StdRng::seed_from_u64(seed);
    let mut diff = None;
    for _ in 0..100 {
        let l = rng.gen_range(-4..=6);
        let lat = QuiverLattice::new(1, g, l)?;
        let x = LatticePoint::higgs(rng.gen_range(0..=5), rng.gen_range(-8..=8));
        let y = LatticePoint::higgs(rng.gen_range(0..=5), rng.gen_range(-8..=8));
        let want = -l * x.rk() * y.rk();
        if lat.skew(&x, &y) != 0 || lat.chi_d(&x, &y) != want || lat.chi_d(&y, &x) != want {
            diff = Some(format!("l={l}, {x:?}, {y:?}"));
            break;
        }
    }
    out.push(CheckResult::new("(d) n = 1 skew form vanishes and chi_D = -l rk rk'", diff));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomics() {
        let c = |m| cyclotomic(m).iter().map(|x| x.to_string().parse::<i64>().unwrap()).collect::<Vec<_>>();
        assert_eq!(c(1), vec![-1, 1]);
        assert_eq!(c(2), vec![1, 1]);
        assert_eq!(c(3), vec![1, 1, 1]);
        assert_eq!(c(4), vec![1, 0, 1]);
        assert_eq!(c(6), vec![1, -1, 1]);
        assert_eq!(ramanujan(4, 0), 2);
        assert_eq!(ramanujan(4, 2), -2);
        assert_eq!(ramanujan(3, 1), -1);
    }

    #[test]
    fn residue_of_geometric() {
        // x = c / (1 - z): -Res_{z=1} x dz/z = c
        let p = int(0);
        let num = UPoly::new(&p, vec![int(5)]);
        let den = UPoly::new(&p, vec![int(1), int(-1)]);
        let x = URat::new(num, den).unwrap();
        assert_eq!(cyclotomic_residue_sum(&x, 1, 0).unwrap(), int(5));
        // 1/(1-z^2) = sum z^{2k}: Omega(2,0) = 1, Omega(2,1) = 0
        let x2 = URat::new(UPoly::new(&p, vec![int(1)]), UPoly::new(&p, vec![int(1), int(0), int(-1)])).unwrap();
        assert_eq!(cyclotomic_residue_sum(&x2, 2, 0).unwrap(), int(1));
        assert_eq!(cyclotomic_residue_sum(&x2, 2, 1).unwrap(), int(0));
        assert!(audit_urat(&x2, 2).ok);
        assert!(!audit_urat(&x2, 1).ok);
    }

    #[test]
    fn twist_flavors() {
        assert_eq!(TwistSpec::for_omega(1, 0).unwrap().flavor, Flavor::Canonical);
        assert_eq!(TwistSpec::for_omega(1, 1).unwrap().flavor, Flavor::Generic);
        assert!(TwistSpec::for_omega(2, 1).is_err());
        assert!(TwistSpec::new(0, -1, Flavor::Generic).is_ok());
    }
}
