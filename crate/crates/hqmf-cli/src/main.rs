//! `hqmf`: JSON front end for the hqmf library.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a verification ran and failed
//! (its report is still printed).

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hqmf::boundary::{self, BoundaryData};
use hqmf::cycles::Cycles;
use hqmf::fpoly::{self, FFamily, FPoly};
use hqmf::hlattice::{self, disc_group, Definiteness, Domain, GramTarget, HermLattice};
use hqmf::linalg::Mat;
use hqmf::qfield::{self, make_field, parse_q, q_json, FieldElem, QuadField, Q, CLASS_NUMBER_ONE};
use hqmf::thetagen::{self, Evaluator, Point, SeriesKind, SeriesSpec};
use hqmf::torcoh::CohRing;
use hqmf::weilrep::{CMat, GroupGen, WeilRep};
use num_complex::Complex64;
use serde_json::{json, Value};

const EFFECTIVE_BITS: u32 = 53;

#[derive(Parser)]
#[command(name = "hqmf", version, about = "Hermitian theta series, cycle classes and their modularity checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// bits for exact-to-float conversions; values below 53 are rejected
    #[arg(long, global = true, default_value_t = 128)]
    precision: u32,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// truncation bound on Tr N (rational)
    #[arg(long, global = true)]
    trunc: Option<String>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// write the JSON here instead of stdout
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Args, Clone)]
struct LatticeArgs {
    /// lattice as JSON {"d", "gram", "signature"?}, inline or a file path
    #[arg(long, conflicts_with_all = ["d", "gram"])]
    lattice: Option<String>,
    #[arg(long)]
    d: Option<i64>,
    /// Gram matrix as JSON, entries rational or {"a", "b"} in the basis (1, ω)
    #[arg(long)]
    gram: Option<String>,
}

#[derive(Args, Clone)]
struct DiagArgs {
    #[arg(long)]
    d: i64,
    /// diagonal of the polarization, e.g. "[1,2]"
    #[arg(long)]
    diag: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cycles,
    Corrected,
    Weighted,
    Completed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    W,
    M,
    N,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassKind {
    Cycle,
    GramDet,
    Corrected,
}

#[derive(Subcommand)]
enum Cmd {
    /// Imaginary quadratic field data
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Hermitian lattices
    Lattice {
        #[command(subcommand)]
        cmd: LatticeCmd,
    },
    /// Weil representation matrices
    Weilrep {
        #[command(subcommand)]
        cmd: WeilCmd,
    },
    /// The spaces F_{n,g}
    Fspace {
        #[command(subcommand)]
        cmd: FspaceCmd,
    },
    /// Cohomology of the CM abelian variety
    Cohomology {
        #[command(subcommand)]
        cmd: CohCmd,
    },
    /// Special cycle classes
    Cycles {
        #[command(subcommand)]
        cmd: CyclesCmd,
    },
    /// Exact q-expansion of a theta series
    Qexp(SeriesArgs),
    /// Numeric functional equation checks
    Modularity {
        #[command(subcommand)]
        cmd: ModCmd,
    },
    /// Boundary data at an isotropic line
    Boundary {
        #[command(subcommand)]
        cmd: BoundaryCmd,
    },
}

#[derive(Subcommand)]
enum FieldCmd {
    Info {
        #[arg(long)]
        d: i64,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Vectors of L^∨ (or of one coset) with h(x,x) ≤ bound, or tuples with a Gram target
    Enum {
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(long)]
        bound: Option<String>,
        #[arg(long)]
        coset: Option<usize>,
        /// Gram target N as JSON; switches to tuple enumeration
        #[arg(long)]
        target: Option<String>,
    },
    /// Discriminant group L^∨/L
    Disc {
        #[command(flatten)]
        lat: LatticeArgs,
    },
}

#[derive(Subcommand)]
enum WeilCmd {
    Matrix {
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(short, long, default_value_t = 1)]
        g: usize,
        #[arg(long, value_enum)]
        generator: Generator,
        /// A for m(A), B for n(B)
        #[arg(long)]
        matrix: Option<String>,
    },
}

#[derive(Args, Clone)]
struct FamArgs {
    #[arg(short, long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: i64,
    /// Hermitian form H (default identity)
    #[arg(long)]
    gram: Option<String>,
}

#[derive(Subcommand)]
enum FspaceCmd {
    Dim {
        #[command(flatten)]
        fam: FamArgs,
        #[arg(short, long)]
        g: usize,
    },
    /// Exact check of the sl2 relations on F_{n,•}
    Sl2Check {
        #[command(flatten)]
        fam: FamArgs,
    },
    /// Π_{m,k} P, or the Lefschetz decomposition of P when --k is absent
    Project {
        #[command(flatten)]
        fam: FamArgs,
        /// polynomial JSON {"g", "coeffs": [{"I", "J", "c"}]} or "h"
        #[arg(long)]
        poly: String,
        #[arg(short, long)]
        k: Option<i64>,
    },
}

#[derive(Subcommand)]
enum CohCmd {
    Basis {
        #[command(flatten)]
        ring: DiagArgs,
        #[arg(short, long)]
        l: usize,
        #[arg(long)]
        primitive: bool,
    },
}

#[derive(Subcommand)]
enum CyclesCmd {
    Class {
        #[command(flatten)]
        ring: DiagArgs,
        /// g vectors as JSON
        #[arg(long)]
        tuple: String,
        #[arg(long, value_enum, default_value = "cycle")]
        kind: ClassKind,
    },
    Decompose {
        #[command(flatten)]
        ring: DiagArgs,
        #[arg(short, long)]
        g: usize,
    },
}

#[derive(Args, Clone)]
struct SeriesArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// weight polynomial for weighted/completed: JSON, "h" or "1"
    #[arg(long)]
    poly: Option<String>,
    #[command(flatten)]
    lat: LatticeArgs,
    #[arg(short, long, default_value_t = 1)]
    g: usize,
}

#[derive(Subcommand)]
enum ModCmd {
    Check {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_enum)]
        generator: Generator,
        #[arg(long)]
        matrix: Option<String>,
        /// "i", "<y>i", or a JSON matrix of [re, im] pairs / {"re","im"} objects
        #[arg(long, default_value = "i")]
        tau: String,
        /// test only the holomorphic part of a completed series
        #[arg(long)]
        holomorphic: bool,
    },
}

#[derive(Args, Clone)]
struct BoundaryLattice {
    #[command(flatten)]
    lat: LatticeArgs,
    /// hyperbolic plane ⊕ diag(a), e.g. "[1,1]"
    #[arg(long, conflicts_with_all = ["lattice", "gram"])]
    hyperbolic: Option<String>,
    /// isotropic vector as JSON (default: first one found)
    #[arg(long)]
    e: Option<String>,
}

#[derive(Subcommand)]
enum BoundaryCmd {
    Analyze {
        #[command(flatten)]
        b: BoundaryLattice,
        #[arg(long, default_value_t = 256)]
        arrow_limit: usize,
    },
    Correct {
        #[command(flatten)]
        b: BoundaryLattice,
        #[arg(short, long)]
        g: usize,
        /// coset indices of L^∨/L, one per slot
        #[arg(long)]
        nu: String,
        #[arg(long)]
        target: String,
    },
}

enum Failure {
    Invalid(String),
    Verification(Value),
}

impl From<hqmf::error::Error> for Failure {
    fn from(e: hqmf::error::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Invalid(msg.into()))
}

fn parse_json(s: &str) -> Res<Value> {
    let text = if s.trim_start().starts_with(['{', '[', '"']) || s.trim().parse::<f64>().is_ok() {
        s.to_string()
    } else {
        fs::read_to_string(s).map_err(|e| Failure::Invalid(format!("cannot read {s}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("malformed JSON: {e}")))
}

fn field_matrix(v: &Value, k: QuadField) -> Res<Mat<FieldElem>> {
    let rows = v.as_array().ok_or_else(|| Failure::Invalid("matrix must be an array of rows".into()))?;
    rows.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Failure::Invalid("matrix rows must be arrays".into()))?
                .iter()
                .map(|x| FieldElem::from_json(x, k).map_err(Failure::from))
                .collect()
        })
        .collect()
}

fn vectors(v: &Value, k: QuadField) -> Res<Vec<Vec<FieldElem>>> {
    field_matrix(v, k)
}

fn lattice(a: &LatticeArgs) -> Res<HermLattice> {
    if let Some(s) = &a.lattice {
        return Ok(HermLattice::from_json(&parse_json(s)?)?);
    }
    let (Some(d), Some(g)) = (a.d, &a.gram) else {
        return invalid("give --lattice, or both --d and --gram");
    };
    let k = make_field(d)?;
    Ok(HermLattice::positive(k, field_matrix(&parse_json(g)?, k)?)?)
}

fn int_list(s: &str) -> Res<Vec<i64>> {
    serde_json::from_str(s).map_err(|e| Failure::Invalid(format!("expected an integer list: {e}")))
}

fn ring(a: &DiagArgs) -> Res<CohRing> {
    Ok(CohRing::new(make_field(a.d)?, int_list(&a.diag)?)?)
}

fn rational(s: &str) -> Res<Q> {
    Ok(parse_q(s)?)
}

fn trunc(g: &Global) -> Res<Option<Q>> {
    let Some(t) = &g.trunc else { return Ok(None) };
    let t = rational(t)?;
    if t < Q::from_integer(0.into()) {
        return invalid("--trunc must be nonnegative");
    }
    Ok(Some(t))
}

fn family(a: &FamArgs) -> Res<FFamily> {
    let k = make_field(a.d)?;
    match &a.gram {
        None => Ok(FFamily::identity(k, a.n)?),
        Some(s) => {
            let g = field_matrix(&parse_json(s)?, k)?;
            if g.len() != a.n {
                return invalid(format!("gram has size {}, expected n = {}", g.len(), a.n));
            }
            Ok(FFamily::new(k, g)?)
        }
    }
}

fn poly(fam: &FFamily, s: &str, g: usize) -> Res<FPoly> {
    match s.trim() {
        "h" if g == 1 => Ok(fam.h_poly()),
        "h" => invalid("\"h\" is a genus-one polynomial"),
        "1" => Ok(fam.constant(hqmf::qfield::KElem::one(fam.k.d))),
        _ => Ok(fam.poly_from_json(&parse_json(s)?)?),
    }
}

fn generator(gen: Generator, matrix: &Option<String>, k: QuadField) -> Res<GroupGen> {
    let m = || -> Res<Mat<FieldElem>> {
        match matrix {
            Some(s) => field_matrix(&parse_json(s)?, k),
            None => invalid("--matrix is required for m and n"),
        }
    };
    Ok(match gen {
        Generator::W => GroupGen::W,
        Generator::M => GroupGen::M(m()?),
        Generator::N => GroupGen::N(m()?),
    })
}

fn complex(v: &Value) -> Res<Complex64> {
    match v {
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => invalid("complex entries are [re, im]"),
        },
        Value::Object(_) => match (v["re"].as_f64(), v["im"].as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => invalid("complex entries need re and im"),
        },
        Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(0.0), 0.0)),
        _ => invalid("bad complex entry"),
    }
}

fn tau(s: &str, g: usize) -> Res<Point> {
    let s = s.trim();
    if let Some(y) = s.strip_suffix('i') {
        let y: f64 = if y.is_empty() { 1.0 } else { y.parse().map_err(|_| Failure::Invalid(format!("bad τ {s:?}")))? };
        if y <= 0.0 {
            return invalid("τ must have positive imaginary part");
        }
        return Ok(Point::scalar(g, y));
    }
    let v = parse_json(s)?;
    let rows = v.as_array().ok_or_else(|| Failure::Invalid("τ must be a matrix".into()))?;
    let m: CMat = rows
        .iter()
        .map(|r| r.as_array().ok_or_else(|| Failure::Invalid("τ rows must be arrays".into()))?.iter().map(complex).collect())
        .collect::<Res<_>>()?;
    if m.len() != g {
        return invalid(format!("τ must be {g}×{g}"));
    }
    Ok(Point::new(m)?)
}

fn numeric_meta(g: &Global) -> Value {
    json!({"precision": g.precision, "effective_bits": EFFECTIVE_BITS})
}

fn series_spec(a: &SeriesArgs) -> Res<SeriesSpec> {
    let l = lattice(&a.lat)?;
    let fam = FFamily::new(l.k, l.gram.clone())?;
    let need = |p: &Option<String>| -> Res<FPoly> {
        match p {
            Some(s) => poly(&fam, s, a.g),
            None => invalid("--poly is required for weighted and completed series"),
        }
    };
    let kind = match a.kind {
        Kind::Cycles => SeriesKind::Cycles,
        Kind::Corrected => SeriesKind::Corrected,
        Kind::Weighted => SeriesKind::Weighted(need(&a.poly)?),
        Kind::Completed => SeriesKind::Completed(need(&a.poly)?),
    };
    Ok(SeriesSpec::new(kind, l, a.g)?)
}

fn boundary_data(b: &BoundaryLattice) -> Res<BoundaryData> {
    let l = match &b.hyperbolic {
        Some(a) => {
            let d = b.lat.d.ok_or_else(|| Failure::Invalid("--hyperbolic needs --d".into()))?;
            boundary::hyperbolic_plus(make_field(d)?, &int_list(a)?)?
        }
        None => match &b.lat.lattice {
            Some(s) => HermLattice::from_json(&parse_json(s)?)?,
            None => {
                let (Some(d), Some(g)) = (b.lat.d, &b.lat.gram) else {
                    return invalid("give --hyperbolic, --lattice, or --d with --gram");
                };
                let k = make_field(d)?;
                HermLattice::new(k, field_matrix(&parse_json(g)?, k)?, Definiteness::Lorentzian)?
            }
        },
    };
    let e = match &b.e {
        Some(s) => {
            let v = parse_json(s)?;
            let e = vectors(&json!([v]), l.k)?.remove(0);
            if e.len() != l.rank() {
                return invalid(format!("e must have {} entries", l.rank()));
            }
            e
        }
        None => boundary::find_isotropic(&l, 2)?
            .into_iter()
            .next()
            .ok_or_else(|| Failure::Invalid("no primitive isotropic vector in the search box".into()))?,
    };
    Ok(BoundaryData::new(&l, &e)?)
}

fn run(cli: Cli) -> Res<Value> {
    let g = &cli.global;
    if g.precision < EFFECTIVE_BITS {
        return invalid(format!("--precision {} is below the {EFFECTIVE_BITS} bits the numerics carry", g.precision));
    }
    if !(g.tol > 0.0) {
        return invalid("--tol must be positive");
    }
    match cli.cmd {
        Cmd::Field { cmd: FieldCmd::Info { d } } => {
            let k = make_field(d)?;
            let units: Vec<Value> = k.units().iter().map(|(u, ph)| json!({"unit": u.to_json(), "phase": q_json(ph)})).collect();
            let delta = k.delta();
            let emb = qfield::embed(&delta, g.precision)?;
            Ok(json!({
                "field": k.to_json(),
                "class_number_one": CLASS_NUMBER_ONE.contains(&k.d),
                "units": units,
                "delta": delta.to_json(),
                "delta_embedded": {"re": q_json(&emb.re), "im": q_json(&emb.im), "error_bound": q_json(&qfield::embed_error_bound(&delta, g.precision))},
                "numeric": numeric_meta(g),
            }))
        }
        Cmd::Lattice { cmd: LatticeCmd::Enum { lat, bound, coset, target } } => {
            let l = lattice(&lat)?;
            let dg = disc_group(&l)?;
            if let Some(t) = target {
                let n = GramTarget::new(field_matrix(&parse_json(&t)?, l.k)?)?;
                let cos: Option<Vec<usize>> = coset.map(|c| vec![c; n.genus()]);
                if let Some(c) = coset {
                    if c >= dg.order() {
                        return invalid(format!("coset {c} out of range 0..{}", dg.order()));
                    }
                }
                let tuples = hlattice::enumerate_tuples(&l, &dg, &n, cos.as_deref())?;
                let out: Vec<Value> = tuples.iter().map(|t| Value::Array(t.iter().map(|v| hlattice::vector_json(v)).collect())).collect();
                return Ok(json!({"lattice": l.to_json(), "count": out.len(), "tuples": out}));
            }
            let b = rational(bound.as_deref().unwrap_or("2"))?;
            let dom = match coset {
                Some(c) if c >= dg.order() => return invalid(format!("coset {c} out of range 0..{}", dg.order())),
                Some(c) => Domain::Coset(c),
                None => Domain::Dual,
            };
            let vs = hlattice::enumerate_in(&l, Some(&dg), dom, &b)?;
            let out: Vec<Value> = vs.iter().map(|v| json!({"v": hlattice::vector_json(v), "norm": q_json(&l.norm(v))})).collect();
            Ok(json!({"lattice": l.to_json(), "bound": q_json(&b), "count": out.len(), "vectors": out}))
        }
        Cmd::Lattice { cmd: LatticeCmd::Disc { lat } } => {
            let l = lattice(&lat)?;
            Ok(json!({"lattice": l.to_json(), "disc": disc_group(&l)?.to_json()}))
        }
        Cmd::Weilrep { cmd: WeilCmd::Matrix { lat, g: genus, generator: gen, matrix } } => {
            let l = lattice(&lat)?;
            let k = l.k;
            let rep = WeilRep::new(l, genus)?;
            if rep.dim() > 4096 {
                return invalid(format!("representation of dimension {} is too large to print", rep.dim()));
            }
            let gg = generator(gen, &matrix, k)?;
            let mut v = rep.matrix_json(&rep.rho(&gg)?)?;
            v["generator"] = json!(thetagen::generator_name(&gg));
            v["numeric"] = numeric_meta(g);
            Ok(v)
        }
        Cmd::Fspace { cmd: FspaceCmd::Dim { fam, g: genus } } => {
            let f = family(&fam)?;
            if genus > f.n {
                return invalid(format!("g = {genus} exceeds n = {}", f.n));
            }
            Ok(json!({"dim": fpoly::basis(f.n, genus, f.k, Some(f.gram.clone()))?.dim()}))
        }
        Cmd::Fspace { cmd: FspaceCmd::Sl2Check { fam } } => {
            let f = family(&fam)?;
            let bad = f.sl2_report();
            if bad.is_empty() {
                Ok(json!({"pass": true}))
            } else {
                Err(Failure::Verification(json!({"pass": false, "failures": bad})))
            }
        }
        Cmd::Fspace { cmd: FspaceCmd::Project { fam, poly: p, k } } => {
            let f = family(&fam)?;
            let genus = if p.trim() == "h" { 1 } else { parse_json(&p).ok().and_then(|v| v["g"].as_u64()).unwrap_or(0) as usize };
            let p = poly(&f, &p, genus)?;
            match k {
                Some(k) => {
                    let m = f.isotypic_projector(p.g, k)?;
                    let z = hqmf::qfield::KElem::zero(f.k.d);
                    let coeffs = hqmf::linalg::matvec(&m, &p.coeffs, &z);
                    let out = FPoly { n: p.n, g: p.g, coeffs };
                    Ok(json!({"weight": f.weight(p.g), "k": k, "projection": f.poly_to_json(&out)}))
                }
                None => {
                    let parts: Vec<Value> = f.lefschetz_decompose(&p).iter().map(|(l, q)| json!({"l": l, "primitive": f.poly_to_json(q)})).collect();
                    Ok(json!({"weight": f.weight(p.g), "components": parts}))
                }
            }
        }
        Cmd::Cohomology { cmd: CohCmd::Basis { ring: r, l, primitive } } => {
            let r = ring(&r)?;
            if l > r.n {
                return invalid(format!("ℓ = {l} exceeds n = {}", r.n));
            }
            let b = if primitive { r.primitive_hodge_basis(l)? } else { r.rational_hodge_basis(l)? };
            Ok(json!({"ring": r.descriptor(), "l": l, "primitive": primitive, "basis": b.iter().map(|x| r.class_to_json(x)).collect::<Vec<_>>()}))
        }
        Cmd::Cycles { cmd: CyclesCmd::Class { ring: r, tuple, kind } } => {
            let r = ring(&r)?;
            let t = vectors(&parse_json(&tuple)?, r.k)?;
            let c = Cycles::new(r)?;
            let class = match kind {
                ClassKind::Cycle => c.cycle_class(&t)?,
                ClassKind::GramDet => c.gram_det_class(&t)?,
                ClassKind::Corrected => c.corrected_class(&t)?,
            };
            Ok(json!({"ring": c.ring.descriptor(), "g": t.len(), "class": c.ring.class_to_json(&class)}))
        }
        Cmd::Cycles { cmd: CyclesCmd::Decompose { ring: r, g: genus } } => {
            let c = Cycles::new(ring(&r)?)?;
            if genus > c.ring.n {
                return invalid(format!("g = {genus} exceeds n = {}", c.ring.n));
            }
            let t = c.decompose_cycle_function(genus)?;
            Ok(c.table_to_json(t))
        }
        Cmd::Qexp(a) => {
            let spec = series_spec(&a)?;
            let t = trunc(g)?.unwrap_or_else(|| Q::from_integer(4.into()));
            let qe = thetagen::qexp(&spec, &t)?;
            let ring = match spec.kind {
                SeriesKind::Cycles | SeriesKind::Corrected => Some(spec.cycles()?.ring),
                _ => None,
            };
            Ok(qe.to_json(ring.as_ref()))
        }
        Cmd::Modularity { cmd: ModCmd::Check { series, generator: gen, matrix, tau: ts, holomorphic } } => {
            let spec = series_spec(&series)?;
            let gg = generator(gen, &matrix, spec.lattice.k)?;
            let pt = tau(&ts, spec.g)?;
            let t = match trunc(g)? {
                Some(t) => t,
                None => {
                    // smallest T whose tail bound at both points is far below the tolerance
                    let (comps, mode) = thetagen::test_components(&spec, holomorphic)?;
                    let ev = Evaluator::new(spec.lattice.clone(), spec.g, comps, mode)?;
                    let (pt2, _) = pt.act(&gg)?;
                    let target = g.tol * 1e-4;
                    let a = thetagen::auto_truncation(&ev, &pt, target, 200);
                    let b = thetagen::auto_truncation(&ev, &pt2, target, 200);
                    a.max(b)
                }
            };
            let r = thetagen::check_functional_equation(&spec, &gg, &pt, &t, g.tol, holomorphic)?;
            let mut v = r.to_json();
            v["kind"] = json!(spec.kind.name());
            v["numeric"] = numeric_meta(g);
            if r.pass {
                Ok(v)
            } else {
                Err(Failure::Verification(v))
            }
        }
        Cmd::Boundary { cmd: BoundaryCmd::Analyze { b, arrow_limit } } => {
            let bd = boundary_data(&b)?;
            Ok(bd.to_json(arrow_limit)?)
        }
        Cmd::Boundary { cmd: BoundaryCmd::Correct { b, g: genus, nu, target } } => {
            let bd = boundary_data(&b)?;
            let nu: Vec<usize> = serde_json::from_str(&nu).map_err(|e| Failure::Invalid(format!("--nu: {e}")))?;
            if nu.len() != genus {
                return invalid(format!("--nu needs {genus} entries"));
            }
            if let Some(&bad) = nu.iter().find(|&&x| x >= bd.dg_l.order()) {
                return invalid(format!("coset {bad} out of range 0..{}", bd.dg_l.order()));
            }
            let n = field_matrix(&parse_json(&target)?, bd.m.k)?;
            GramTarget::new(n.clone())?;
            let cyc = boundary::boundary_cycles(&bd)?;
            let c = boundary::assemble_correction(&bd, &cyc, genus, &nu, &n)?;
            let mut v = c.to_json(&cyc)?;
            v["r_J"] = q_json(&bd.r_j);
            v["M"] = bd.m.to_json();
            Ok(v)
        }
    }
}

fn emit(v: &Value, out: &Option<String>) -> std::io::Result<()> {
    let mut text = serde_json::to_string(v).expect("JSON values serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().expect("pool is built once");
    }
    let out = cli.global.out.clone();
    let (value, code) = match run(cli) {
        Ok(v) => (v, 0),
        Err(Failure::Verification(v)) => (v, 3),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&value, &out) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
