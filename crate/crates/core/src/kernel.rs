//! The symmetrized kernel `L`, iterated residues and the per-partition
//! factors `H_lambda`, `J_lambda`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveData, Zeta};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::ratfun::{MonoMap, RatFun, VarSet};

/// Which variable of each chain constraint `z_{j+1} = q^{-1} z_j` is consumed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ResidueConvention {
    /// Residue in `z_{j+1}` at `z_j / q`, top of each chain first; leaders survive.
    Leaders,
    /// Residue in `z_j` at `q z_{j+1}`, bottom of each chain first; block ends survive.
    #[default]
    Ends,
}

/// `H_lambda`, `J_lambda` and the pole orders met while taking residues.
#[derive(Clone, Debug)]
pub struct LambdaKernel {
    pub h: RatFun,
    pub j: RatFun,
    pub pole_orders: Vec<usize>,
}

impl LambdaKernel {
    /// Any residue step that met a pole of order other than one.
    pub fn has_anomaly(&self) -> bool {
        self.pole_orders.iter().any(|&m| m != 1)
    }
}

/// Per-curve kernel builder with memoized `L` and `(H, J)`.
pub struct KernelCache {
    zeta: Zeta,
    conv: ResidueConvention,
    zvars: Arc<VarSet>,
    ls: Mutex<HashMap<usize, RatFun>>,
    lambdas: Mutex<HashMap<Partition, Arc<LambdaKernel>>>,
}

fn zname(i: usize) -> String {
    format!("z{i}")
}

impl KernelCache {
    pub fn new(curve: &CurveData, level: usize, conv: ResidueConvention) -> Result<KernelCache> {
        Self::from_zeta(curve.zeta(level)?, conv)
    }

    pub fn from_zeta(zeta: Zeta, conv: ResidueConvention) -> Result<KernelCache> {
        let zvars = zeta.universe(&["z".to_string()]);
        Ok(KernelCache { zeta, conv, zvars, ls: Mutex::default(), lambdas: Mutex::default() })
    }

    pub fn zeta(&self) -> &Zeta {
        &self.zeta
    }

    pub fn convention(&self) -> ResidueConvention {
        self.conv
    }

    /// Universe of `H_lambda`, `J_lambda`: the scalar variables followed by `z`.
    pub fn z_universe(&self) -> &Arc<VarSet> {
        &self.zvars
    }

    /// Universe of `L(z_n, ..., z_1)`.
    pub fn l_universe(&self, n: usize) -> Arc<VarSet> {
        let names: Vec<String> = (1..=n).map(zname).collect();
        self.zeta.universe(&names)
    }

    pub fn build_l(&self, n: usize) -> Result<RatFun> {
        if let Some(l) = self.ls.lock().unwrap().get(&n) {
            return Ok(l.clone());
        }
        let l = build_l(&self.zeta, &self.l_universe(n), n)?;
        self.ls.lock().unwrap().insert(n, l.clone());
        Ok(l)
    }

    /// `H~_lambda` in the universe of `L`, together with the pole orders met.
    pub fn res_lambda(&self, lambda: &Partition) -> Result<(RatFun, Vec<usize>)> {
        let n = lambda.len();
        let l = self.build_l(n)?;
        res_lambda(&self.zeta, &l, &lambda.multiplicities(), self.conv)
    }

    pub fn lambda(&self, lambda: &Partition) -> Result<Arc<LambdaKernel>> {
        if let Some(k) = self.lambdas.lock().unwrap().get(lambda) {
            return Ok(k.clone());
        }
        let (ht, pole_orders) = self.res_lambda(lambda)?;
        let h = self.specialize_h(&ht, lambda)?;
        let j = j_lambda(&self.zeta, &self.zvars, lambda)?;
        let k = Arc::new(LambdaKernel { h, j, pole_orders });
        self.lambdas.lock().unwrap().insert(lambda.clone(), k.clone());
        Ok(k)
    }

    pub fn h_lambda(&self, lambda: &Partition) -> Result<RatFun> {
        Ok(self.lambda(lambda)?.h.clone())
    }

    pub fn j_lambda(&self, lambda: &Partition) -> Result<RatFun> {
        Ok(self.lambda(lambda)?.j.clone())
    }

    /// Sends each surviving `z_j` of block `i` to `z^i q^{-(j-1)}`.
    fn specialize_h(&self, ht: &RatFun, lambda: &Partition) -> Result<RatFun> {
        let off = self.zeta.offset();
        let r = lambda.multiplicities();
        let z = off; // the slot of z_1 doubles as z
        let mut binds = Vec::new();
        let mut start = 0;
        for (bi, &ri) in r.iter().enumerate() {
            if ri > 0 {
                let j = match self.conv {
                    ResidueConvention::Leaders => start + 1,
                    ResidueConvention::Ends => start + ri,
                };
                let m = self.zeta.q_pow(-(j as i32 - 1)).with_exp(z, bi as i32 + 1);
                binds.push((off + j - 1, m));
            }
            start += ri;
        }
        ht.subst_monomial(&binds)?.relabel(&self.zvars)
    }
}

fn ratio(off: usize, i: usize, j: usize) -> MonoMap {
    MonoMap::var(off + i - 1).with_exp(off + j - 1, -1)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `L(z_n, ..., z_1)` with `z_i` at index `offset + i - 1` of `vars`.
pub fn build_l(zeta: &Zeta, vars: &Arc<VarSet>, n: usize) -> Result<RatFun> {
    if n == 0 {
        return Err(Error::Precondition("L needs n >= 1".into()));
    }
    let off = zeta.offset();
    let one = RatFun::one(vars.clone());
    let q = zeta.q_ratfun(vars);
    let mut prod_zt = one.clone();
    for i in 1..=n {
        for j in i + 1..=n {
            prod_zt = prod_zt.try_mul(&zeta.zeta_tilde_at(vars, &ratio(off, i, j))?)?;
        }
    }
    let mut rest = (&one - &RatFun::var(vars.clone(), off)).inv()?;
    for i in 1..n {
        let u = RatFun::from_monomap(vars.clone(), &ratio(off, i + 1, i));
        rest = rest.try_div(&(&one - &(&q * &u)))?;
    }
    let t = prod_zt.try_mul(&rest)?;
    let terms: Vec<RatFun> = permutations(n)
        .into_par_iter()
        .map(|p| {
            let mut full: Vec<usize> = (0..off).collect();
            full.extend(p.iter().map(|&k| off + k));
            t.permute_vars(&full)
        })
        .collect();
    let sum = tree_sum(terms)?;
    sum.try_div(&prod_zt)
}

fn tree_sum(mut v: Vec<RatFun>) -> Result<RatFun> {
    while v.len() > 1 {
        let pairs: Vec<Vec<RatFun>> = v.chunks(2).map(|c| c.to_vec()).collect();
        v = pairs
            .into_par_iter()
            .map(|c| if c.len() == 2 { c[0].try_add(&c[1]) } else { Ok(c[0].clone()) })
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(v.pop().expect("nonempty sum"))
}

/// Iterated residue of `L * prod dz_j / z_j` along the within-block chains.
///
/// `mult` holds the block multiplicities `r_1..r_t`; `l` lives in a universe
/// whose variables after `zeta.offset()` are `z_1..z_n`.
pub fn res_lambda(zeta: &Zeta, l: &RatFun, mult: &[usize], conv: ResidueConvention) -> Result<(RatFun, Vec<usize>)> {
    let off = zeta.offset();
    let vars = l.vars().clone();
    let mut f = l.clone();
    let mut orders = Vec::new();
    let mut start = 0;
    for &ri in mult {
        let lead = start + 1;
        let end = start + ri;
        if ri > 1 {
            match conv {
                ResidueConvention::Leaders => {
                    for j in (lead..end).rev() {
                        // Res_{z_{j+1} = z_j / q} f dz_{j+1}/z_{j+1}
                        let zv = off + j;
                        let g = f.try_div(&RatFun::var(vars.clone(), zv))?;
                        let point = q_scaled(zeta, MonoMap::var(off + j - 1), -1);
                        let (r, m) = g.residue(zv, &point)?;
                        orders.push(m);
                        f = r;
                    }
                }
                ResidueConvention::Ends => {
                    for j in lead..end {
                        // Res_{z_j = q z_{j+1}} f dz_j/z_j
                        let zv = off + j - 1;
                        let g = f.try_div(&RatFun::var(vars.clone(), zv))?;
                        let point = q_scaled(zeta, MonoMap::var(off + j), 1);
                        let (r, m) = g.residue(zv, &point)?;
                        orders.push(m);
                        f = r;
                    }
                }
            }
        }
        start = end;
    }
    Ok((f, orders))
}

/// `m * q^e` as a monomial (symbolic `q` is `v^2`).
fn q_scaled(zeta: &Zeta, m: MonoMap, e: i32) -> MonoMap {
    let qe = zeta.q_pow(e);
    let mut out = m.scaled(&qe.coef);
    for (a, b) in out.exps.iter_mut().zip(qe.exps.iter()) {
        *a += b;
    }
    out
}

/// `J_lambda(z) = prod over cells of Z*(q^{-1-leg} z^{arm})`.
pub fn j_lambda(zeta: &Zeta, zvars: &Arc<VarSet>, lambda: &Partition) -> Result<RatFun> {
    let z = zeta.offset();
    let mut acc = RatFun::one(zvars.clone());
    for c in lambda.cells() {
        let m = zeta.q_pow(-(c.leg as i32)).with_exp(z, c.arm as i32);
        acc = acc.try_mul(&zeta.zstar_at(zvars, &m)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec())
    }

    #[test]
    fn small_kernels() {
        let c = CurveData::symbolic(0).unwrap();
        let k = KernelCache::new(&c, 1, ResidueConvention::Leaders).unwrap();
        let zv = k.z_universe().clone();
        let z = RatFun::var(zv.clone(), 1);
        let one = RatFun::one(zv.clone());
        assert_eq!(k.h_lambda(&p(&[1])).unwrap(), (&one - &z).inv().unwrap());
        assert_eq!(k.h_lambda(&p(&[2])).unwrap(), (&one - &(&z * &z)).inv().unwrap());
        // J_(1) = q/(q-1) in genus 0
        let q = k.zeta().q_ratfun(&zv);
        assert_eq!(k.j_lambda(&p(&[1])).unwrap(), &q / &(&q - &one));
    }

    #[test]
    fn l_has_no_diagonal_pole() {
        let c = CurveData::symbolic(0).unwrap();
        let k = KernelCache::new(&c, 1, ResidueConvention::Leaders).unwrap();
        let l = k.build_l(2).unwrap();
        // z2 -> z1 is a regular substitution
        let off = k.zeta().offset();
        let s = l.subst_monomial(&[(off + 1, MonoMap::var(off))]);
        assert!(s.is_ok());
    }

    #[test]
    fn numeric_matches_rational_constants() {
        let c = CurveData::numeric(2, &[3]).unwrap();
        let k = KernelCache::new(&c, 1, ResidueConvention::Leaders).unwrap();
        // J_(1) = P(1)/(q-1) = 3 in genus one
        assert_eq!(k.j_lambda(&p(&[1])).unwrap().constant_value(), Some(int(3)));
    }
}
