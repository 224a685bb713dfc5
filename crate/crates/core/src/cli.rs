//! Command line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curve::{CurveData, CurveSpec};
use crate::dt::{
    identity_suite, kac_positive, kac_stable, nil_vec_series, omega_rank_one, omega_table, positive_vec_series,
    torsion_series, x_r, Backend, Method, NumericBackend, SymbolicBackend, TwistSpec,
};
use crate::error::{Error, Result};
use crate::hall::{hn_expand, hn_factorize, pipeline_consistency, CheckResult, LatticePoint, QtSeries, QuiverLattice};
use crate::kernel::ResidueConvention;
use crate::oracle::{formula_vol, oracle_vol, DEFAULT_BUDGET};
use crate::ratfun::{RatFun, VarSet};
use crate::scalar::{eval_ratfun, Coef, QSqrt, Scalar, SymbolicScalar, TowerCtx, TowerScalar};
use crate::series::GradedSeries;

#[derive(Parser, Debug)]
#[command(name = "higgs-dt", version, about = "DT invariants and volumes of twisted Higgs bundles over finite fields")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// DT invariants Omega_D(r, d) per residue class of d.
    Omega(OmegaArgs),
    /// Positive and stable Kac polynomials.
    Kac(KacArgs),
    /// HN slope factors of a quantum torus series.
    #[command(name = "hn-factor")]
    HnFactor(HnArgs),
    /// Ordered product of HN slope factors.
    #[command(name = "hn-expand")]
    HnExpand(HnArgs),
    /// Genus-0 brute-force volumes against the series.
    Oracle(OracleArgs),
    /// Runs the invariant and identity suites.
    Selfcheck(SelfcheckArgs),
    /// Prints one of the generating series.
    Series(SeriesArgs),
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveArgs {
    #[arg(long)]
    pub genus: Option<usize>,
    /// Field size; together with --points selects the numeric backend.
    #[arg(long)]
    pub q: Option<u64>,
    /// Point counts N_1..N_g over F_q, ..., F_{q^g}.
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<i64>>,
    /// symbolic or numeric (default: numeric when q is given).
    #[arg(long)]
    pub backend: Option<String>,
    /// Residue convention for the kernel: ends (default) or leaders.
    #[arg(long)]
    pub convention: Option<String>,
    /// JSON file mirroring the flags; flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutArgs {
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OmegaArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<i64>,
    #[arg(long)]
    pub rmax: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Stabilized,
    Residue,
    Both,
}

#[derive(Args, Debug)]
pub struct KacArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long)]
    pub rmax: Option<usize>,
    #[arg(long)]
    pub dmax: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct HnArgs {
    /// QtSeries JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file (default stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub q: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub l: Vec<i64>,
    #[arg(long, default_value_t = 2)]
    pub rmax: usize,
    #[arg(long, default_value_t = 3)]
    pub dmax: usize,
    /// Cap on enumerated Higgs fields per bundle.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    ExpLog,
    Identities,
    Hn,
    Dt,
    Oracle,
}

#[derive(Args, Debug)]
pub struct SelfcheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SeriesKind {
    /// Nilpotent vector-bundle series, l <= 0.
    Nil,
    /// Positive vector-bundle series, l >= 2g-2.
    Positive,
    /// Nilpotent torsion factor.
    Torsion,
    /// The rational functions X_r.
    X,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, value_enum)]
    pub kind: SeriesKind,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub l: i64,
    #[arg(long, default_value_t = 2)]
    pub rmax: usize,
    #[arg(long, default_value_t = 4)]
    pub dmax: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Resolved job configuration after merging the optional config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct JobConfig {
    #[serde(flatten)]
    pub curve: CurveArgs,
    pub l: Option<i64>,
    pub rmax: Option<usize>,
    pub dmax: Option<usize>,
    pub method: Option<MethodArg>,
}

fn load_config(path: &Option<PathBuf>) -> Result<JobConfig> {
    match path {
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
        None => Ok(JobConfig::default()),
    }
}

fn merge_curve(flags: &CurveArgs, file: &CurveArgs) -> CurveArgs {
    CurveArgs {
        genus: flags.genus.or(file.genus),
        q: flags.q.or(file.q),
        points: flags.points.clone().or_else(|| file.points.clone()),
        backend: flags.backend.clone().or_else(|| file.backend.clone()),
        convention: flags.convention.clone().or_else(|| file.convention.clone()),
        config: None,
    }
}

fn convention(c: &CurveArgs) -> Result<ResidueConvention> {
    match c.convention.as_deref() {
        None | Some("ends") => Ok(ResidueConvention::Ends),
        Some("leaders") => Ok(ResidueConvention::Leaders),
        Some(o) => Err(Error::Parse(format!("unknown convention {o}"))),
    }
}

fn curve_of(c: &CurveArgs) -> Result<CurveData> {
    let genus = c.genus.ok_or_else(|| Error::Precondition("--genus is required".into()))?;
    let spec = CurveSpec { genus, backend: c.backend.clone(), q: c.q, point_counts: c.points.clone() };
    match c.backend.as_deref() {
        Some("symbolic") => CurveData::symbolic(genus),
        Some("numeric") if c.q.is_none() => Err(Error::Precondition("numeric backend needs --q".into())),
        None | Some("numeric") => CurveData::from_spec(&spec),
        Some(o) => Err(Error::Parse(format!("unknown backend {o}"))),
    }
}

/// Runs `$body` with `$b` bound to the backend selected by the curve.
macro_rules! with_backend {
    ($curve:expr, $conv:expr, |$b:ident| $body:expr) => {{
        let curve = $curve;
        if curve.is_symbolic() {
            let $b = SymbolicBackend::new(curve, $conv)?;
            $body
        } else {
            let $b = NumericBackend::new(curve, $conv)?;
            $body
        }
    }};
}

fn emit(out: &OutArgs, csv: &str, report: &Value) -> Result<()> {
    match &out.csv {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &out.json {
        fs::write(p, serde_json::to_string_pretty(report)? + "\n")?;
    }
    Ok(())
}

fn curve_json(c: &CurveData) -> Value {
    serde_json::to_value(c.spec()).unwrap_or(Value::Null)
}

fn cmd_omega(a: &OmegaArgs) -> Result<()> {
    let file = load_config(&a.curve.config)?;
    let curve = curve_of(&merge_curve(&a.curve, &file.curve))?;
    let conv = convention(&merge_curve(&a.curve, &file.curve))?;
    let l = a.l.or(file.l).ok_or_else(|| Error::Precondition("--l is required".into()))?;
    let rmax = a.rmax.or(file.rmax).unwrap_or(2);
    let method = match a.method.or(file.method).unwrap_or(MethodArg::Both) {
        MethodArg::Stabilized => Method::Stabilized,
        MethodArg::Residue => Method::Residue,
        MethodArg::Both => Method::Both,
    };
    let tw = TwistSpec::for_omega(curve.genus(), l)?;
    let cj = curve_json(&curve);
    with_backend!(curve, conv, |b| {
        let t = omega_table(&b, tw, rmax, method)?;
        let mut csv = String::from("r,d_mod_r,omega");
        if method == Method::Both {
            csv += ",agree";
        }
        csv += "\n";
        let mut entries = Vec::new();
        let mut failures = Vec::new();
        for e in &t.entries {
            let main = e.stabilized.as_ref().or(e.residue.as_ref()).expect("one method ran");
            write!(csv, "{},{},{}", e.r, e.d_mod_r, main).unwrap();
            let agree = match (&e.stabilized, &e.residue) {
                (Some(s), Some(r)) => Some(s == r),
                _ => None,
            };
            if let Some(ok) = agree {
                write!(csv, ",{ok}").unwrap();
                if !ok {
                    failures.push(format!("methods disagree at r={} d={}", e.r, e.d_mod_r));
                }
            }
            csv += "\n";
            entries.push(json!({
                "r": e.r, "d_mod_r": e.d_mod_r,
                "stabilized": e.stabilized.as_ref().map(|s| s.to_string()),
                "residue": e.residue.as_ref().map(|s| s.to_string()),
                "denominator_free": denominator_free(&b, main),
            }));
        }
        for a in t.audits.iter().filter(|a| !a.ok) {
            failures.push(format!("pole audit failed at r={}", a.r));
        }
        let report = json!({
            "curve": cj,
            "twist": {"l": tw.l, "flavor": tw.flavor},
            "truncation": {"rmax": rmax},
            "method": method,
            "convention": conv,
            "entries": entries,
            "rank_one_closed_form": omega_rank_one(&b, tw)?.to_string(),
            "pole_audit": t.audits,
            "stabilization": t.stabilization.iter().enumerate().map(|(i, s)| json!({
                "r": i + 1, "threshold": s.threshold, "first_periodic": s.first_periodic, "expanded_to": s.expanded_to,
            })).collect::<Vec<_>>(),
            "anomalies": b.anomalies().iter().map(|(p, o)| json!({"partition": p.to_string(), "orders": o})).collect::<Vec<_>>(),
        });
        emit(&a.out, &csv, &report)?;
        if !failures.is_empty() {
            return Err(Error::IdentityFailure(failures.join("; ")));
        }
        Ok(())
    })
}

fn cmd_kac(a: &KacArgs) -> Result<()> {
    let file = load_config(&a.curve.config)?;
    let ca = merge_curve(&a.curve, &file.curve);
    let curve = curve_of(&ca)?;
    let rmax = a.rmax.or(file.rmax).unwrap_or(2);
    let dmax = a.dmax.or(file.dmax).unwrap_or(4);
    let cj = curve_json(&curve);
    with_backend!(curve, convention(&ca)?, |b| {
        let t = kac_positive(&b, rmax, dmax)?;
        let mut csv = String::from("r,d,a_positive\n");
        for r in 0..=rmax {
            for d in 0..=dmax {
                if (r, d) != (0, 0) {
                    writeln!(csv, "{r},{d},{}", t.get(r, d)).unwrap();
                }
            }
        }
        let mut stable = Vec::new();
        for r in 1..=rmax {
            if let Ok(v) = kac_stable(&t, b.genus(), r) {
                for (dm, x) in v.iter().enumerate() {
                    stable.push(json!({"r": r, "d_mod_r": dm, "value": x.to_string()}));
                }
            }
        }
        let report = json!({"curve": cj, "truncation": {"rmax": rmax, "dmax": dmax}, "a_positive": t.to_json(), "stable": stable});
        emit(&a.out, &csv, &report)
    })
}

/// On-disk form of a [`QtSeries`].
#[derive(Serialize, Deserialize, Debug)]
pub struct QtFile {
    pub n: usize,
    #[serde(default = "builtin_skew")]
    pub skew: String,
    #[serde(default)]
    pub genus: usize,
    #[serde(default)]
    pub l: i64,
    pub rmax: i64,
    pub dmax: i64,
    /// Present for numeric values over `F_q`; `v` then stands for `sqrt q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    pub entries: Vec<QtEntry>,
}

fn builtin_skew() -> String {
    "builtin-quiver".into()
}

#[derive(Serialize, Deserialize, Debug)]
pub struct QtEntry {
    pub gamma: Vec<(i64, i64)>,
    pub value: String,
}

fn qt_from_file<S: Scalar>(f: &QtFile, one: S, parse: impl Fn(&str) -> Result<S>) -> Result<QtSeries<S>> {
    if f.skew != "builtin-quiver" {
        return Err(Error::Parse(format!("unsupported skew form {}", f.skew)));
    }
    let lat = QuiverLattice::new(f.n, f.genus, f.l)?;
    let mut s = QtSeries::unit(lat, f.rmax, f.dmax, one);
    for e in &f.entries {
        if e.gamma.len() != f.n {
            return Err(Error::Parse(format!("gamma {:?} does not have {} vertices", e.gamma, f.n)));
        }
        s.set(LatticePoint(e.gamma.clone()), parse(&e.value)?);
    }
    Ok(s)
}

fn qt_to_file<S: Scalar>(s: &QtSeries<S>, q: Option<u64>) -> QtFile {
    QtFile {
        n: s.lattice.n,
        skew: builtin_skew(),
        genus: s.lattice.g,
        l: s.lattice.l,
        rmax: s.rmax,
        dmax: s.dmax,
        q,
        entries: s.entries.iter().map(|(g, v)| QtEntry { gamma: g.0.clone(), value: v.to_string() }).collect(),
    }
}

/// Applies `hn_factorize` (or `hn_expand`) to a [`QtFile`] given as JSON text.
pub fn hn_json(text: &str, expand: bool) -> Result<String> {
    let f: QtFile = serde_json::from_str(text)?;
    let out = match f.q {
        None => {
            let ctx = SymbolicScalar::context(f.genus);
            let s = qt_from_file(&f, SymbolicScalar::one(&ctx), |t| Ok(SymbolicScalar(RatFun::parse(&ctx, t)?)))?;
            let r = if expand { hn_expand(&s)? } else { hn_factorize(&s)? };
            qt_to_file(&r, None)
        }
        Some(q) => {
            let ctx = TowerCtx { q, depth: 1 };
            let vars = VarSet::new(["v"]);
            let parse = |t: &str| -> Result<TowerScalar> {
                let f = RatFun::parse(&vars, t)?;
                let x = eval_ratfun(&f, &[QSqrt::sqrt_q(q)]).ok_or(Error::DivisionByZero)?;
                Ok(TowerScalar::from_levels(q, vec![x]))
            };
            let s = qt_from_file(&f, TowerScalar::one(&ctx), parse)?;
            let r = if expand { hn_expand(&s)? } else { hn_factorize(&s)? };
            qt_to_file(&r, Some(q))
        }
    };
    Ok(serde_json::to_string_pretty(&out)? + "\n")
}

fn cmd_hn(a: &HnArgs, expand: bool) -> Result<()> {
    let text = hn_json(&fs::read_to_string(&a.input)?, expand)?;
    match &a.output {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    let mut csv = String::from("q,l,r,d,volume_num,volume_den,formula_side,match\n");
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for &q in &a.q {
        for &l in &a.l {
            for r in 1..=a.rmax {
                for d in 0..=a.dmax {
                    let o = oracle_vol(q, l, r, d as i64, a.budget)?;
                    let f = formula_vol(q, l, r, d)?;
                    let ok = f == QSqrt::rational(o.clone(), q);
                    writeln!(csv, "{q},{l},{r},{d},{},{},{f},{ok}", o.numer(), o.denom()).unwrap();
                    rows.push(json!({"q": q, "l": l, "r": r, "d": d, "oracle": o.to_string(), "formula": f.to_string(), "match": ok}));
                    if !ok {
                        bad.push(format!("q={q} l={l} r={r} d={d}"));
                    }
                }
            }
        }
    }
    emit(&a.out, &csv, &json!({"rows": rows}))?;
    if !bad.is_empty() {
        return Err(Error::IdentityFailure(format!("oracle mismatch at {}", bad.join(", "))));
    }
    Ok(())
}

fn cmd_series(a: &SeriesArgs) -> Result<()> {
    let file = load_config(&a.curve.config)?;
    let ca = merge_curve(&a.curve, &file.curve);
    let curve = curve_of(&ca)?;
    with_backend!(curve, convention(&ca)?, |b| {
        let mut csv = String::new();
        let depth = a.rmax.max(a.dmax).max(1);
        match a.kind {
            SeriesKind::Nil | SeriesKind::Positive => {
                let s = match a.kind {
                    SeriesKind::Nil => nil_vec_series(&b, a.l, a.rmax, depth)?,
                    _ => positive_vec_series(&b, a.l, a.rmax, depth)?,
                };
                csv += "r,coefficient\n";
                for r in 0..=a.rmax {
                    writeln!(csv, "{r},{}", show_z(s.rank(r))).unwrap();
                }
            }
            SeriesKind::X => {
                csv += "r,x_r\n";
                let xs = x_r(&b, a.l, a.rmax)?;
                for (r, x) in xs.iter().enumerate().skip(1) {
                    writeln!(csv, "{r},{}", show_z(x)).unwrap();
                }
            }
            SeriesKind::Torsion => {
                csv += "d,coefficient\n";
                let t = torsion_series(&b, 0, a.dmax)?;
                for d in 0..=a.dmax {
                    writeln!(csv, "{d},{}", t.get(0, d)).unwrap();
                }
            }
        }
        emit(&a.out, &csv, &json!({"kind": format!("{:?}", a.kind), "l": a.l}))
    })
}

/// Prints a `z`-coefficient; numeric values show the base level.
fn show_z<Z: std::fmt::Debug + 'static>(z: &Z) -> String {
    let any = z as &dyn std::any::Any;
    if let Some(f) = any.downcast_ref::<RatFun>() {
        return format!("\"{f}\"");
    }
    if let Some(t) = any.downcast_ref::<crate::series::TowerZ>() {
        let l = &t.levels[0];
        return format!("\"({})/({})\"", upoly_str(l.num().coeffs()), upoly_str(l.den().coeffs()));
    }
    format!("{z:?}")
}

fn upoly_str(c: &[QSqrt]) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| !crate::ratfun::univariate::Field::is_zero_elem(*x))
        .map(|(i, x)| match i {
            0 => format!("({x})"),
            1 => format!("({x})*z"),
            _ => format!("({x})*z^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

// ---------------------------------------------------------------------------
// Self checks.

/// Random series with small rational coefficients; constant term zero.
pub fn random_series<S: Scalar>(rng: &mut StdRng, zero: &S, rmax: usize, dmax: usize, gen: impl Fn(&mut StdRng) -> S) -> GradedSeries<S> {
    let mut s = GradedSeries::zero(zero.clone(), rmax, dmax);
    for r in 0..=rmax {
        for d in 0..=dmax {
            if (r, d) != (0, 0) && rng.gen_bool(0.6) {
                s.set(r, d, gen(rng));
            }
        }
    }
    s
}

/// `Log(Exp f) = f`, `Exp(f + g) = Exp f Exp g` and `Log(FG) = Log F + Log G` on random series.
///
/// Sides are compared after `norm`; towers lose levels under Adams operations.
pub fn exp_log_checks<S: Scalar>(
    rng: &mut StdRng,
    zero: &S,
    count: usize,
    gen: impl Fn(&mut StdRng) -> S + Copy,
    norm: impl Fn(&GradedSeries<S>) -> GradedSeries<S>,
) -> Result<Vec<CheckResult>> {
    let same = |a: &GradedSeries<S>, b: &GradedSeries<S>| norm(a) == norm(b);
    let (mut round, mut hom, mut loghom) = (None, None, None);
    for i in 0..count {
        let (rmax, dmax) = (rng.gen_range(1..=3), rng.gen_range(0..=3));
        let f = random_series(rng, zero, rmax, dmax, gen);
        let g = random_series(rng, zero, rmax, dmax, gen);
        let ef = f.exp()?;
        if round.is_none() && !same(&ef.log()?, &f) {
            round = Some(format!("sample {i}"));
        }
        if hom.is_none() && !same(&f.add(&g)?.exp()?, &ef.mul(&g.exp()?)?) {
            hom = Some(format!("sample {i}"));
        }
        let gg = g.exp()?;
        if loghom.is_none() && !same(&ef.mul(&gg)?.log()?, &f.add(&g)?) {
            loghom = Some(format!("sample {i}"));
        }
    }
    Ok(vec![
        CheckResult::new("Log(Exp f) = f", round),
        CheckResult::new("Exp(f + g) = Exp f Exp g", hom),
        CheckResult::new("Log(F G) = Log F + Log G", loghom),
    ])
}

/// Projects a tower series to `F_q` itself.
pub fn base_level(s: &GradedSeries<TowerScalar>) -> GradedSeries<TowerScalar> {
    let zero = TowerScalar::zero(&TowerCtx { q: s.zero_elem().ctx().q, depth: 1 });
    let mut out = GradedSeries::zero(zero, s.rmax(), s.dmax());
    for (r, d, x) in s.entries() {
        out.set(r, d, x.truncate(1));
    }
    out
}

/// Symbolic genus-1 coefficients `c0 + c1 v + c2 a1` with small integers.
pub fn gen_symbolic(ctx: &std::sync::Arc<VarSet>) -> impl Fn(&mut StdRng) -> SymbolicScalar + Copy + '_ {
    move |rng: &mut StdRng| {
        let c = |k: i64| SymbolicScalar::from_i64(ctx, k);
        let v = SymbolicScalar::v(ctx);
        let a = SymbolicScalar::a(ctx, 0);
        c(rng.gen_range(-3..=3)).add(&v.mul(&c(rng.gen_range(-2..=2)))).add(&a.mul(&c(rng.gen_range(-2..=2))))
    }
}

/// Numeric tower coefficients with independent small integers per level.
pub fn gen_tower(ctx: TowerCtx) -> impl Fn(&mut StdRng) -> TowerScalar + Copy {
    move |rng: &mut StdRng| {
        let levels = (0..ctx.depth)
            .map(|_| QSqrt::new(crate::scalar::int(rng.gen_range(-4..=4)), crate::scalar::int(rng.gen_range(-2..=2)), ctx.q))
            .collect();
        TowerScalar::from_levels(ctx.q, levels)
    }
}

/// Random cone-truncated series for the HN round trip.
pub fn random_qt<S: Scalar>(rng: &mut StdRng, lat: QuiverLattice, rmax: i64, dmax: i64, one: &S) -> QtSeries<S> {
    let mut s = QtSeries::unit(lat, rmax, dmax, one.clone());
    for g in lat.cone_points(rmax, dmax) {
        if rng.gen_bool(0.5) {
            s.set(g, one.scale(&crate::scalar::rat(rng.gen_range(-5..=5), rng.gen_range(1..=3))));
        }
    }
    s
}

fn print_checks(tag: &str, checks: &[CheckResult], failed: &mut usize) {
    for c in checks {
        if !c.passed {
            *failed += 1;
        }
        let detail = c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
        println!("{} [{tag}] {}{detail}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
}

fn cmd_selfcheck(a: &SelfcheckArgs) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(a.seed);
    let mut failed = 0;
    let on = |s: Suite| a.suite == Suite::All || a.suite == s;
    if on(Suite::ExpLog) {
        let ctx = SymbolicScalar::context(1);
        let checks = exp_log_checks(&mut rng, &SymbolicScalar::zero(&ctx), 50, gen_symbolic(&ctx), Clone::clone)?;
        print_checks("exp-log symbolic", &checks, &mut failed);
        let tctx = TowerCtx { q: 3, depth: 4 };
        let checks = exp_log_checks(&mut rng, &TowerScalar::zero(&tctx), 50, gen_tower(tctx), base_level)?;
        print_checks("exp-log numeric", &checks, &mut failed);
    }
    if on(Suite::Identities) {
        for g in 0..=1 {
            let b = SymbolicBackend::new(CurveData::symbolic(g)?, ResidueConvention::Ends)?;
            print_checks(&format!("identities g={g}"), &identity_suite(&b, 3, 8, a.seed)?, &mut failed);
        }
    }
    if on(Suite::Hn) {
        let tctx = TowerCtx { q: 2, depth: 1 };
        let one = TowerScalar::one(&tctx);
        let mut diff = None;
        for (n, rmax, dmax) in [(1, 3, 4), (2, 2, 3), (3, 2, 2)] {
            for i in 0..25 {
                let lat = QuiverLattice::new(n, rng.gen_range(0..=2), rng.gen_range(-2..=3))?;
                let s = random_qt(&mut rng, lat, rmax, dmax, &one);
                if diff.is_none() && hn_expand(&hn_factorize(&s)?)? != s {
                    diff = Some(format!("n={n} sample {i}"));
                }
            }
        }
        print_checks("hn", &[CheckResult::new("hn_expand after hn_factorize is the identity", diff)], &mut failed);
        for g in 0..=1usize {
            let b = SymbolicBackend::new(CurveData::symbolic(g)?, ResidueConvention::Ends)?;
            print_checks(&format!("hn g={g}"), &pipeline_consistency(&b, 2 * g as i64, 3, 8)?, &mut failed);
        }
    }
    if on(Suite::Dt) {
        for g in 0..=1usize {
            let b = SymbolicBackend::new(CurveData::symbolic(g)?, ResidueConvention::Ends)?;
            for l in 2 * g as i64 - 2..=2 * g as i64 {
                let tw = TwistSpec::for_omega(g, l)?;
                let t = omega_table(&b, tw, 3, Method::Both)?;
                let mut diff = None;
                for e in &t.entries {
                    if e.stabilized != e.residue {
                        diff = Some(format!("r={} d={}", e.r, e.d_mod_r));
                    }
                }
                if t.audits.iter().any(|a| !a.ok) {
                    diff = Some("pole audit".into());
                }
                print_checks(&format!("dt g={g} l={l}"), &[CheckResult::new("residue = stabilized, audits clean", diff)], &mut failed);
            }
        }
    }
    if on(Suite::Oracle) {
        let mut diff = None;
        for q in [2, 3] {
            for l in [0, -1, -2] {
                for r in 1..=2 {
                    for d in 0..=3usize {
                        let o = oracle_vol(q, l, r, d as i64, DEFAULT_BUDGET)?;
                        if formula_vol(q, l, r, d)? != QSqrt::rational(o, q) {
                            diff = Some(format!("q={q} l={l} r={r} d={d}"));
                        }
                    }
                }
            }
        }
        print_checks("oracle", &[CheckResult::new("brute force equals the nilpotent series", diff)], &mut failed);
    }
    if failed > 0 {
        return Err(Error::IdentityFailure(format!("{failed} check(s) failed")));
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Precondition(e.to_string()))?;
    }
    match &cli.cmd {
        Command::Omega(a) => cmd_omega(a),
        Command::Kac(a) => cmd_kac(a),
        Command::HnFactor(a) => cmd_hn(a, false),
        Command::HnExpand(a) => cmd_hn(a, true),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Selfcheck(a) => cmd_selfcheck(a),
        Command::Series(a) => cmd_series(a),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_exit_code() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn denominator_free<B: Backend>(_b: &B, s: &B::S) -> bool {
    B::is_denominator_free(s)
}
