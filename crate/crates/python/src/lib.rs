use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use higgs_dt::curve::CurveData;
use higgs_dt::dt::{self, Backend, Method, NumericBackend, SymbolicBackend, TwistSpec};
use higgs_dt::error::Error;
use higgs_dt::kernel::ResidueConvention;
use higgs_dt::oracle;
use higgs_dt::partition::Partition;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::DivisionByZero | Error::PoleAtSubstitution => PyArithmeticError::new_err(e.to_string()),
        Error::IdentityFailure(_) | Error::Budget(_) | Error::DepthExhausted { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn conv(name: &str) -> PyResult<ResidueConvention> {
    match name {
        "ends" => Ok(ResidueConvention::Ends),
        "leaders" => Ok(ResidueConvention::Leaders),
        _ => Err(PyValueError::new_err(format!("unknown convention {name}"))),
    }
}

/// A curve over F_q: symbolic in (v, a_1..a_g) or given by q and point counts.
#[pyclass(frozen)]
#[derive(Clone)]
struct Curve {
    inner: CurveData,
    convention: ResidueConvention,
}

#[pymethods]
impl Curve {
    #[new]
    #[pyo3(signature = (genus, q=None, points=None, convention="ends"))]
    fn new(genus: usize, q: Option<u64>, points: Option<Vec<i64>>, convention: &str) -> PyResult<Self> {
        let inner = match q {
            None => CurveData::symbolic(genus),
            Some(q) => {
                let pts = points.unwrap_or_default();
                if pts.len() != genus {
                    return Err(PyValueError::new_err(format!("need {genus} point counts, got {}", pts.len())));
                }
                CurveData::numeric(q, &pts)
            }
        }
        .map_err(py_err)?;
        Ok(Curve { inner, convention: conv(convention)? })
    }

    #[getter]
    fn genus(&self) -> usize {
        self.inner.genus()
    }

    #[getter]
    fn q(&self) -> Option<u64> {
        self.inner.q()
    }

    #[getter]
    fn symbolic(&self) -> bool {
        self.inner.is_symbolic()
    }

    fn __repr__(&self) -> String {
        match self.inner.q() {
            None => format!("Curve(genus={})", self.inner.genus()),
            Some(q) => format!("Curve(genus={}, q={q})", self.inner.genus()),
        }
    }
}

macro_rules! with_backend {
    ($curve:expr, |$b:ident| $body:expr) => {{
        let c: &Curve = $curve;
        if c.inner.is_symbolic() {
            let $b = SymbolicBackend::new(c.inner.clone(), c.convention).map_err(py_err)?;
            $body
        } else {
            let $b = NumericBackend::new(c.inner.clone(), c.convention).map_err(py_err)?;
            $body
        }
    }};
}

/// One DT invariant per residue class.
#[pyclass(frozen, get_all)]
struct OmegaEntry {
    r: usize,
    d_mod_r: usize,
    stabilized: Option<String>,
    residue: Option<String>,
}

#[pymethods]
impl OmegaEntry {
    fn __repr__(&self) -> String {
        let v = self.residue.as_ref().or(self.stabilized.as_ref()).cloned().unwrap_or_default();
        format!("OmegaEntry(r={}, d_mod_r={}, value={v:?})", self.r, self.d_mod_r)
    }
}

fn table<B: Backend>(b: &B, l: i64, rmax: usize, method: Method) -> PyResult<Vec<OmegaEntry>> {
    let tw = TwistSpec::for_omega(b.genus(), l).map_err(py_err)?;
    let t = dt::omega_table(b, tw, rmax, method).map_err(py_err)?;
    if let Some(a) = t.audits.iter().find(|a| !a.ok) {
        return Err(PyRuntimeError::new_err(format!("pole audit failed for X_{}", a.r)));
    }
    Ok(t.entries
        .into_iter()
        .map(|e| OmegaEntry {
            r: e.r,
            d_mod_r: e.d_mod_r,
            stabilized: e.stabilized.map(|s| s.to_string()),
            residue: e.residue.map(|s| s.to_string()),
        })
        .collect())
}

/// DT invariants Omega_D(r, d) for r <= rmax.
#[pyfunction]
#[pyo3(signature = (curve, l, rmax, method="both"))]
fn omega(curve: &Curve, l: i64, rmax: usize, method: &str) -> PyResult<Vec<OmegaEntry>> {
    let m: Method = method.parse().map_err(py_err)?;
    with_backend!(curve, |b| table(&b, l, rmax, m))
}

/// `A^{>=0}_{r,d}` as a dict keyed by `(r, d)`.
#[pyfunction]
fn kac_positive(curve: &Curve, rmax: usize, dmax: usize) -> PyResult<Vec<((usize, usize), String)>> {
    with_backend!(curve, |b| {
        let t = dt::kac_positive(&b, rmax, dmax).map_err(py_err)?;
        Ok(t.entries().filter(|&(r, d, _)| (r, d) != (0, 0)).map(|(r, d, v)| ((r, d), v.to_string())).collect())
    })
}

/// Brute-force genus-0 nilpotent volume as `(numerator, denominator)`.
#[pyfunction]
#[pyo3(signature = (q, l, r, d, budget=oracle::DEFAULT_BUDGET))]
fn oracle_vol(q: u64, l: i64, r: usize, d: i64, budget: u64) -> PyResult<(String, String)> {
    let v = oracle::oracle_vol(q, l, r, d, budget).map_err(py_err)?;
    Ok((v.numer().to_string(), v.denom().to_string()))
}

/// The same volume read off the nilpotent generating series.
#[pyfunction]
fn formula_vol(q: u64, l: i64, r: usize, d: usize) -> PyResult<String> {
    Ok(oracle::formula_vol(q, l, r, d).map_err(py_err)?.to_string())
}

/// HN slope factors of a quantum torus series given as JSON.
#[pyfunction]
fn hn_factorize(series_json: &str) -> PyResult<String> {
    higgs_dt::cli::hn_json(series_json, false).map_err(py_err)
}

/// Ordered product of HN slope factors given as JSON.
#[pyfunction]
fn hn_expand(factors_json: &str) -> PyResult<String> {
    higgs_dt::cli::hn_json(factors_json, true).map_err(py_err)
}

#[pyfunction]
fn conjugate(parts: Vec<usize>) -> Vec<usize> {
    Partition::new(parts).conjugate().parts().to_vec()
}

/// `<lambda, lambda>`, the sum of squared conjugate parts.
#[pyfunction]
fn pairing(parts: Vec<usize>) -> usize {
    Partition::new(parts).pairing()
}

#[pymodule]
fn higgs_dt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Curve>()?;
    m.add_class::<OmegaEntry>()?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(kac_positive, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_vol, m)?)?;
    m.add_function(wrap_pyfunction!(formula_vol, m)?)?;
    m.add_function(wrap_pyfunction!(hn_factorize, m)?)?;
    m.add_function(wrap_pyfunction!(hn_expand, m)?)?;
    m.add_function(wrap_pyfunction!(conjugate, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    Ok(())
}
