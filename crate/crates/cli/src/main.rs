//! `qholo` command-line front end.
//!
//! Every subcommand writes one JSON report to stdout and the wall time to stderr.
//! Exit codes: 0 success, 1 failed check, 2 usage or input error, 3 numerical failure.

use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use qholo::cauchy::{
    cauchy_derivative, laurent_components, qindex_from_topindex, quaternion_index,
    topological_index,
};
use qholo::crcheck::{check_conformal, check_cr, check_harmonic, DEFAULT_STEP, DEFAULT_TOL};
use qholo::elem::{arg, exp, ln_principal, log_near, polar};
use qholo::io::{parse_quaternion, PathJson, PhraseJson};
use qholo::paths::{integral_dln, line_integral_sum, stieltjes_integral};
use qholo::residues::{
    argument_principle_check, residue_closed_form, residue_numeric, residue_theorem_check,
};
use qholo::roots::{find_root, RootOptions, SearchBox};
use qholo::{Error, Path, Phrase, QuadOptions, QuadratureResult, Quaternion, I, J, K, L};

#[derive(Parser, Debug)]
#[command(name = "qholo", version, about = "Quaternion function theory toolkit")]
struct Cli {
    /// Quadrature stopping tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Maximum number of partition refinements.
    #[arg(long, global = true, default_value_t = 20)]
    max_refine: usize,
    /// Seed echoed in the report; every procedure is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Request file (`-` for stdin) whose keys supply inputs not given as flags.
    #[arg(long, global = true)]
    json: Option<String>,
    #[command(subcommand)]
    command: Command,
}

/// Inputs accept a file name, `-` for stdin, or inline JSON or a quaternion literal.
#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a phrase at a point.
    Eval {
        #[arg(long)]
        phrase: Option<String>,
        #[arg(long)]
        at: Option<String>,
    },
    /// Canonical form of a phrase.
    Simplify {
        #[arg(long)]
        phrase: Option<String>,
    },
    /// Quaternion exponential.
    Exp {
        #[arg(long)]
        at: Option<String>,
    },
    /// Principal logarithm, or the branch nearest `--near`.
    Ln {
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        near: Option<String>,
    },
    /// Polar decomposition `z = rho exp(2 pi arg)`.
    Polar {
        #[arg(long)]
        at: Option<String>,
    },
    /// Line integral of a sum of phrases, or the Stieltjes integral against `--against`.
    Integrate {
        #[arg(long)]
        phrase: Vec<String>,
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        against: Option<String>,
    },
    /// Integral of `d Ln(z - a)` along a path.
    Dln {
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        at: Option<String>,
    },
    /// Cauchy integral formula for `f^(k)(z)` over a circle.
    Cauchy {
        #[arg(long)]
        phrase: Option<String>,
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// Laurent components on the annulus `r1 < |z - a| < r2` around the phrase center.
    Laurent {
        #[arg(long)]
        phrase: Option<String>,
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
    },
    /// Residue at a point, or the residue theorem along `--path`.
    Residue(ResidueArgs),
    /// Quaternion and topological index of a closed path around a point.
    Index {
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        at: Option<String>,
    },
    /// Argument principle along a circle.
    Argp {
        #[arg(long)]
        phrase: Option<String>,
        #[arg(long)]
        path: Option<String>,
        /// A zero as a quaternion, or `{"at": q, "divisor": n}`.
        #[arg(long)]
        zero: Vec<String>,
        #[arg(long, default_value_t = 1e-6)]
        check_tol: f64,
    },
    /// Root of a polynomial phrase.
    Root {
        #[arg(long)]
        phrase: Option<String>,
        #[arg(long)]
        lo: Option<String>,
        #[arg(long)]
        hi: Option<String>,
        #[arg(long, default_value_t = 17)]
        grid: usize,
    },
    /// Finite-difference Cauchy-Riemann, harmonicity and conformality checks.
    Crcheck {
        #[arg(long)]
        phrase: Option<String>,
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        harmonic: bool,
        #[arg(long)]
        conformal: bool,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        check_tol: f64,
    },
}

#[derive(Args, Debug)]
struct ResidueArgs {
    #[arg(long)]
    phrase: Vec<String>,
    #[arg(long)]
    at: Option<String>,
    /// Generator of the residue circle.
    #[arg(long, default_value = "J")]
    m: String,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    #[arg(long)]
    path: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    check_tol: f64,
}

enum Fail {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        if e.is_numerical() {
            Fail::Numerical(e.to_string())
        } else {
            Fail::Usage(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Fail {
        Fail::Usage(format!("malformed JSON: {e}"))
    }
}

struct Outcome {
    body: Map<String, Value>,
    pass: Option<bool>,
}

struct Inputs {
    request: Option<Map<String, Value>>,
}

impl Inputs {
    fn load(json: Option<&str>) -> Result<Inputs, Fail> {
        let Some(src) = json else {
            return Ok(Inputs { request: None });
        };
        match serde_json::from_str::<Value>(&read_source(src)?)? {
            Value::Object(m) => Ok(Inputs { request: Some(m) }),
            _ => Err(Fail::Usage("request must be a JSON object".into())),
        }
    }

    /// Text of a flag value, or of the request entry `key`.
    fn text(&self, flag: Option<&String>, key: &str) -> Result<String, Fail> {
        if let Some(s) = flag {
            return read_source(s);
        }
        match self.request.as_ref().and_then(|m| m.get(key)) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(v) => Ok(v.to_string()),
            None => Err(Fail::Usage(format!("missing input `{key}`"))),
        }
    }

    fn texts(&self, flags: &[String], key: &str) -> Result<Vec<String>, Fail> {
        if !flags.is_empty() {
            return flags.iter().map(|s| read_source(s)).collect();
        }
        match self.request.as_ref().and_then(|m| m.get(key)) {
            Some(Value::Array(v)) => Ok(v.iter().map(Value::to_string).collect()),
            Some(v) => Ok(vec![v.to_string()]),
            None => Err(Fail::Usage(format!("missing input `{key}`"))),
        }
    }

    fn quat(&self, flag: Option<&String>, key: &str) -> Result<Quaternion, Fail> {
        Ok(parse_quaternion(&self.text(flag, key)?)?)
    }

    fn phrase(&self, flag: Option<&String>) -> Result<Phrase, Fail> {
        phrase_from(&self.text(flag, "phrase")?)
    }

    fn path(&self, flag: Option<&String>) -> Result<Path, Fail> {
        let j: PathJson = serde_json::from_str(&self.text(flag, "path")?)?;
        Ok(Path::try_from(&j)?)
    }
}

fn read_source(s: &str) -> Result<String, Fail> {
    if s == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Fail::Usage(format!("stdin: {e}")))?;
        return Ok(buf);
    }
    let p = std::path::Path::new(s);
    if p.is_file() {
        return std::fs::read_to_string(p).map_err(|e| Fail::Usage(format!("{s}: {e}")));
    }
    Ok(s.to_string())
}

/// Accepts a phrase or any object carrying one under `"phrase"`, such as a `simplify` report.
fn phrase_from(text: &str) -> Result<Phrase, Fail> {
    let mut v: Value = serde_json::from_str(text)?;
    if let Some(inner) = v.get_mut("phrase") {
        v = inner.take();
    }
    let j: PhraseJson = serde_json::from_value(v)?;
    Ok(Phrase::try_from(&j)?)
}

fn body(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("report bodies are objects"),
    }
}

fn quadrature(q: &QuadratureResult) -> Map<String, Value> {
    body(json!({
        "value": q.value,
        "error_estimate": q.error_estimate,
        "refinements": q.refinements,
        "trace": q.trace,
    }))
}

fn ok(body: Map<String, Value>) -> Result<Outcome, Fail> {
    Ok(Outcome { body, pass: None })
}

fn checked(mut body: Map<String, Value>, pass: bool) -> Result<Outcome, Fail> {
    body.insert("pass".into(), Value::Bool(pass));
    Ok(Outcome {
        body,
        pass: Some(pass),
    })
}

fn run(cli: &Cli, inp: &Inputs) -> Result<Outcome, Fail> {
    let opts = QuadOptions {
        tol: cli.tol,
        max_refine: cli.max_refine,
    };
    match &cli.command {
        Command::Eval { phrase, at } => {
            let p = inp.phrase(phrase.as_ref())?;
            let z = inp.quat(at.as_ref(), "at")?;
            ok(body(json!({ "at": z, "value": p.eval(z)? })))
        }
        Command::Simplify { phrase } => {
            let p = inp.phrase(phrase.as_ref())?.canonicalize();
            ok(body(
                json!({ "phrase": PhraseJson::try_from(&p)?, "length": p.length() }),
            ))
        }
        Command::Exp { at } => {
            let z = inp.quat(at.as_ref(), "at")?;
            ok(body(json!({ "at": z, "value": exp(z) })))
        }
        Command::Ln { at, near } => {
            let z = inp.quat(at.as_ref(), "at")?;
            let value = match near {
                Some(r) => log_near(z, parse_quaternion(&read_source(r)?)?)?,
                None => ln_principal(z)?,
            };
            ok(body(json!({ "at": z, "value": value })))
        }
        Command::Polar { at } => {
            let z = inp.quat(at.as_ref(), "at")?;
            let (rho, a) = polar(z)?;
            ok(body(
                json!({ "at": z, "rho": rho, "arg": arg(z)?, "arg_norm": a.norm() }),
            ))
        }
        Command::Integrate {
            phrase,
            path,
            against,
        } => {
            let ps = inp
                .texts(phrase, "phrase")?
                .iter()
                .map(|t| phrase_from(t))
                .collect::<Result<Vec<_>, _>>()?;
            let path = inp.path(path.as_ref())?;
            let q = match against {
                Some(a) => {
                    let [p] = ps.as_slice() else {
                        return Err(Fail::Usage(
                            "Stieltjes integral takes a single phrase".into(),
                        ));
                    };
                    stieltjes_integral(p, &phrase_from(&read_source(a)?)?, &path, &opts)?
                }
                None => line_integral_sum(&ps, &path, &opts)?,
            };
            ok(quadrature(&q))
        }
        Command::Dln { path, at } => {
            let path = inp.path(path.as_ref())?;
            let a = inp.quat(at.as_ref(), "at")?;
            ok(quadrature(&integral_dln(&path, a, &opts)?))
        }
        Command::Cauchy {
            phrase,
            path,
            at,
            k,
        } => {
            let f = inp.phrase(phrase.as_ref())?;
            let Path::Circle(c) = inp.path(path.as_ref())? else {
                return Err(Fail::Usage("Cauchy formula needs a circle".into()));
            };
            let z = inp.quat(at.as_ref(), "at")?;
            let mut b = quadrature(&cauchy_derivative(&f, &c, z, *k, &opts)?);
            b.insert("k".into(), json!(k));
            ok(b)
        }
        Command::Laurent {
            phrase,
            at,
            r1,
            r2,
            kmax,
        } => {
            let f = inp.phrase(phrase.as_ref())?;
            let z = inp.quat(at.as_ref(), "at")?;
            let lc = laurent_components(&f, f.center, *r1, *r2, z, *kmax, &opts)?;
            let mut b = body(serde_json::to_value(&lc)?);
            b.insert("value".into(), json!(lc.sum));
            b.insert("direct".into(), json!(f.eval(z)?));
            ok(b)
        }
        Command::Residue(a) => residue(a, inp, &opts),
        Command::Index { path, at } => {
            let path = inp.path(path.as_ref())?;
            let a = inp.quat(at.as_ref(), "at")?;
            let mut b = quadrature(&quaternion_index(&path, a, &opts)?);
            let t = topological_index(&path, a, &opts)?;
            b.insert("windings".into(), json!(t.windings));
            b.insert("degenerate".into(), json!(t.degenerate));
            if let Path::Circle(c) = &path {
                b.insert(
                    "from_windings".into(),
                    json!(qindex_from_topindex(&t, c.m * c.turns.signum())),
                );
            }
            ok(b)
        }
        Command::Argp {
            phrase,
            path,
            zero,
            check_tol,
        } => {
            let f = inp.phrase(phrase.as_ref())?;
            let Path::Circle(c) = inp.path(path.as_ref())? else {
                return Err(Fail::Usage("argument principle needs a circle".into()));
            };
            let zeros = inp
                .texts(zero, "zeros")?
                .iter()
                .map(|t| zero_from(t))
                .collect::<Result<Vec<_>, _>>()?;
            let r = argument_principle_check(&f, &c, &zeros, &opts)?;
            let mut b = body(serde_json::to_value(&r)?);
            b.insert("value".into(), json!(r.lhs));
            b.insert("check_tol".into(), json!(check_tol));
            checked(b, r.delta <= *check_tol)
        }
        Command::Root {
            phrase,
            lo,
            hi,
            grid,
        } => {
            let p = inp.phrase(phrase.as_ref())?;
            let search = match (lo, hi) {
                (Some(l), Some(h)) => Some(SearchBox {
                    lo: parse_quaternion(&read_source(l)?)?,
                    hi: parse_quaternion(&read_source(h)?)?,
                }),
                (None, None) => None,
                _ => return Err(Fail::Usage("--lo and --hi go together".into())),
            };
            let ro = RootOptions {
                grid: *grid,
                tol: cli.tol,
                ..RootOptions::default()
            };
            let r = find_root(&p, search, &ro)?;
            let mut b = body(serde_json::to_value(&r)?);
            b.insert("value".into(), json!(r.root));
            ok(b)
        }
        Command::Crcheck {
            phrase,
            at,
            harmonic,
            conformal,
            step,
            check_tol,
        } => {
            let f = inp.phrase(phrase.as_ref())?;
            let z = inp.quat(at.as_ref(), "at")?;
            let eval = |q: Quaternion| f.eval(q);
            let cr = check_cr(eval, z, *step, *check_tol)?;
            let mut pass = cr.pass;
            let mut b = body(json!({ "at": z, "cr": cr }));
            if *harmonic {
                let h = check_harmonic(eval, z, *step, *check_tol)?;
                pass &= h.pass;
                b.insert("harmonic".into(), json!(h));
            }
            if *conformal {
                let pairs = [(I, J), (J, K), (K, L), (I, L), (I + J, K - L)];
                match check_conformal(&f, z, &pairs, *check_tol) {
                    Ok(c) => {
                        pass &= c.pass;
                        b.insert("conformal".into(), json!(c));
                    }
                    Err(Error::Domain(msg)) => {
                        pass = false;
                        b.insert("conformal".into(), json!({ "pass": false, "reason": msg }));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            checked(b, pass)
        }
    }
}

fn zero_from(text: &str) -> Result<(Quaternion, Option<i32>), Fail> {
    if let Ok(q) = parse_quaternion(text) {
        return Ok((q, None));
    }
    let v: Value = serde_json::from_str(text)?;
    let at = v
        .get("at")
        .ok_or_else(|| Fail::Usage("zero needs `at`".into()))?;
    let q = parse_quaternion(&at.to_string())?;
    let d = match v.get("divisor") {
        Some(d) => Some(
            d.as_i64()
                .and_then(|d| i32::try_from(d).ok())
                .ok_or_else(|| Fail::Usage("divisor must be an integer".into()))?,
        ),
        None => None,
    };
    Ok((q, d))
}

fn residue(a: &ResidueArgs, inp: &Inputs, opts: &QuadOptions) -> Result<Outcome, Fail> {
    let fs = inp
        .texts(&a.phrase, "phrase")?
        .iter()
        .map(|t| phrase_from(t))
        .collect::<Result<Vec<_>, _>>()?;
    if a.path.is_some() || inp.request.as_ref().is_some_and(|m| m.contains_key("path")) {
        let gamma = inp.path(a.path.as_ref())?;
        let r = residue_theorem_check(&fs, &gamma, opts)?;
        let mut b = body(serde_json::to_value(&r)?);
        b.insert("value".into(), json!(r.rhs));
        b.insert("check_tol".into(), json!(a.check_tol));
        return checked(b, r.delta <= a.check_tol);
    }
    let [f] = fs.as_slice() else {
        return Err(Fail::Usage("a single residue takes one phrase".into()));
    };
    let p = match &a.at {
        Some(s) => parse_quaternion(&read_source(s)?)?,
        None => match inp.request.as_ref().and_then(|m| m.get("at")) {
            Some(v) => parse_quaternion(&v.to_string())?,
            None => f.center,
        },
    };
    let m = parse_quaternion(&a.m)?;
    let mut b = quadrature(&residue_numeric(f, p, m, a.radius, opts)?);
    b.insert("at".into(), json!(p));
    if f.is_left_form() {
        b.insert("closed_form".into(), json!(residue_closed_form(f, p)?));
    }
    ok(b)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = Inputs::load(cli.json.as_deref()).and_then(|inp| run(&cli, &inp));
    let elapsed = start.elapsed().as_secs_f64();
    let code = match result {
        Ok(out) => {
            let mut report = Map::new();
            report.insert(
                "command".into(),
                json!(std::env::args().skip(1).collect::<Vec<_>>()),
            );
            report.insert("tol".into(), json!(cli.tol));
            report.insert("max_refine".into(), json!(cli.max_refine));
            report.insert("seed".into(), json!(cli.seed));
            report.extend(out.body);
            println!(
                "{}",
                serde_json::to_string_pretty(&Value::Object(report)).expect("serializable report")
            );
            if out.pass == Some(false) {
                1
            } else {
                0
            }
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Fail::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            3
        }
    };
    eprintln!("wall_time_s: {elapsed:.6}");
    ExitCode::from(code)
}
