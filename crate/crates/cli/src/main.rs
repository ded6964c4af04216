use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use newton_socle::arith::fmt_q;
use newton_socle::combid::detlemma_trials;
use newton_socle::exec::Execution;
use newton_socle::facering::face_kbar;
use newton_socle::fan::{regularize, sigma_delta_fan, Fan};
use newton_socle::grobner::{nondegenerate, MonteCarlo};
use newton_socle::localalg::{part1_suite, socle_newton_order, verify_theorem_0_1_part1};
use newton_socle::pipeline::{exit_code_of, run_verify_all, text_summary, to_json_string, PipelineConfig};
use newton_socle::residue::{grothendieck_residue, koszul_random, trace_volume_check, verify_theorem_0_1_part2};
use newton_socle::{Error, FaceDescriptor, NewtonPolyhedron, Polytope, SparsePoly};

#[derive(Parser)]
#[command(name = "newton-socle", version, about = "Exact Newton-polyhedron invariants and verification checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutFormat::Json, global = true)]
    format: OutFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed; NEWTON_SOCLE_SEED takes precedence when set.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Number of variables for text polynomials (inferred when omitted).
    #[arg(long, global = true)]
    vars: Option<usize>,
    /// Run every data-parallel stage on the current thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Vertices, facets and interior compact faces of Γ₊(f).
    Polyhedron(PolyArg),
    /// The dual fan Σ_Δ and a regular refinement.
    Fan(PolyArg),
    /// Newton order ν(g) with respect to Γ₊(f).
    Nu {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        g: PathBuf,
    },
    /// Kouchnirenko nondegeneracy with per-face torus-zero verdicts.
    Nondeg {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value_t = 3)]
        primes: usize,
    },
    /// Newton order of the socle of P/i against n - ν(x1⋯xn).
    SocleOrder {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        trunc: Trunc,
    },
    /// Graded quotient K̄_σ for one interior compact face.
    Kbar {
        #[command(flatten)]
        poly: PolyArg,
        /// Index into the interior compact faces listed by `polyhedron`.
        #[arg(long)]
        face: usize,
    },
    /// Local residue Res₀[g dx / F₁,…,F_n].
    Residue {
        #[arg(long)]
        g: PathBuf,
        /// Denominators: a JSON array of polynomials or one polynomial per line.
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        trunc: Trunc,
    },
    /// Membership of h in i; without --h, a seeded sample of interior monomials.
    VerifyThm1 {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        trunc: Trunc,
    },
    /// Nonvanishing of the face residue of f^r·h.
    VerifyThm2 {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        face: usize,
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        trunc: Trunc,
    },
    /// Seeded random trials of the minor identities.
    Detlemma {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Top Koszul quotient dimension and trace for a lattice polytope.
    Koszul {
        /// JSON list of lattice points, e.g. [[0,0],[1,0],[0,1]].
        #[arg(long)]
        polytope: PathBuf,
    },
    /// Full pipeline with a single report.
    VerifyAll {
        #[command(flatten)]
        poly: PolyArg,
        /// Regular fan refining Σ_Δ; required for n ≥ 4.
        #[arg(long)]
        fan: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        primes: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[command(flatten)]
        trunc: Trunc,
    },
}

#[derive(Args)]
struct PolyArg {
    /// Polynomial file, text grammar or JSON.
    #[arg(long)]
    poly: PathBuf,
}

#[derive(Args)]
struct Trunc {
    /// Truncation degree D (at least 2); certified automatically when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    trunc: Option<u64>,
}

impl Trunc {
    fn get(&self) -> Option<usize> {
        self.trunc.map(|d| d as usize)
    }
}

struct Output {
    json: Value,
    text: String,
    pass: bool,
}

impl Output {
    fn new(json: Value, pass: bool) -> Output {
        let text = render_text(&json);
        Output { json, text, pass }
    }
}

fn render_text(v: &Value) -> String {
    match v {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}: {s}\n"),
                other => format!("{k}: {other}\n"),
            })
            .collect(),
        other => format!("{other}\n"),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_poly(path: &Path, vars: Option<usize>) -> anyhow::Result<SparsePoly> {
    Ok(SparsePoly::parse_any(read(path)?.trim(), vars)?)
}

/// A system of `n` polynomials in `n` variables, so `n` defaults to its length.
fn read_system(path: &Path, vars: Option<usize>) -> anyhow::Result<Vec<SparsePoly>> {
    let s = read(path)?;
    let items: Vec<String> = if s.trim_start().starts_with('[') {
        let items: Vec<Value> = serde_json::from_str(&s).map_err(|e| Error::Parse(format!("system JSON: {e}")))?;
        items
            .into_iter()
            .map(|v| match v {
                Value::String(t) => t,
                other => other.to_string(),
            })
            .collect()
    } else {
        s.lines().filter(|l| !l.trim().is_empty()).map(str::to_owned).collect()
    };
    let n = vars.unwrap_or(items.len());
    items.iter().map(|t| Ok(SparsePoly::parse_any(t.trim(), Some(n))?)).collect()
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn interior_face(delta: &NewtonPolyhedron, idx: usize) -> Result<FaceDescriptor, Error> {
    let faces = delta.interior_compact_faces();
    let count = faces.len();
    faces.into_iter().nth(idx).ok_or_else(|| Error::Precondition(format!("face index {idx} out of range (0..{count})")))
}

fn face_json(delta: &NewtonPolyhedron, idx: usize, f: &FaceDescriptor) -> Value {
    json!({
        "index": idx,
        "dim": f.dim,
        "vertices": f.vertex_subset.iter().map(|&i| delta.vertices()[i].0.clone()).collect::<Vec<_>>(),
        "normal_certificate": f.normal_certificate,
    })
}

fn seed(global: &Global) -> anyhow::Result<u64> {
    match std::env::var("NEWTON_SOCLE_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| anyhow!(Error::Parse(format!("NEWTON_SOCLE_SEED={s:?} is not an integer")))),
        Err(_) => Ok(global.seed),
    }
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let g = &cli.global;
    let vars = g.vars;
    let exec = if g.sequential { Execution::Sequential } else { Execution::default() };
    let seed = seed(g)?;
    let out = match &cli.command {
        Command::Polyhedron(p) => {
            let delta = NewtonPolyhedron::of(&read_poly(&p.poly, vars)?)?;
            let faces: Vec<Value> =
                delta.interior_compact_faces().iter().enumerate().map(|(i, f)| face_json(&delta, i, f)).collect();
            let mut j = to_value(&delta.to_json());
            j["interior_compact_faces"] = Value::Array(faces);
            Output::new(j, true)
        }
        Command::Fan(p) => {
            let delta = NewtonPolyhedron::of(&read_poly(&p.poly, vars)?)?;
            let sd = sigma_delta_fan(&delta)?;
            let reg = regularize(&sd)?;
            let ok = reg.is_regular()? && reg.refines(&sd);
            Output::new(json!({ "sigma_delta": sd, "regular": reg, "is_regular": ok }), ok)
        }
        Command::Nu { poly, g: gpath } => {
            let f = read_poly(&poly.poly, vars)?;
            let gp = read_poly(gpath, Some(f.nvars()))?;
            let delta = NewtonPolyhedron::of(&f)?;
            Output::new(json!({ "nu": delta.nu(&gp) }), true)
        }
        Command::Nondeg { poly, primes } => {
            let f = read_poly(&poly.poly, vars)?;
            let r = nondegenerate(&f, &MonteCarlo { primes: *primes, seed }, exec)?;
            let ok = r.nondegenerate;
            let mut out = Output::new(to_value(&r), ok);
            out.text = format!("nondegenerate: {ok}\naxis condition: {}\n", r.axis_condition);
            for face in r.faces.iter().filter(|f| f.verdict.has_zero) {
                out.text.push_str(&format!("torus zero on face {:?}\n", face.vertices.iter().map(|v| v.0.clone()).collect::<Vec<_>>()));
            }
            out
        }
        Command::SocleOrder { poly, trunc } => {
            let r = socle_newton_order(&read_poly(&poly.poly, vars)?, trunc.get())?;
            let ok = r.matches;
            let mut out = Output::new(to_value(&r), ok);
            out.text = format!(
                "socle Newton order: {}\nn - nu(x1*...*xn): {}\nmatch: {ok}\ncolength: {}\n",
                fmt_q(&r.nu_socle),
                fmt_q(&r.n_minus_nu_x),
                r.colength
            );
            out
        }
        Command::Kbar { poly, face } => {
            let f = read_poly(&poly.poly, vars)?;
            let delta = NewtonPolyhedron::of(&f)?;
            let k = face_kbar(&f, &delta, &interior_face(&delta, *face)?)?;
            let ok = k.matches_prediction() && k.socle_degree == k.expected_socle_degree();
            let mut out = Output::new(to_value(&k), ok);
            out.text = format!(
                "dim: {}\nsocle degree: {} (expected {})\nsocle basis: {:?}\n",
                k.total_dim,
                fmt_q(&k.socle_degree),
                fmt_q(&k.expected_socle_degree()),
                k.socle_basis.iter().map(|e| e.0.clone()).collect::<Vec<_>>()
            );
            out
        }
        Command::Residue { g: gpath, system, trunc } => {
            let sys = read_system(system, vars)?;
            let n = sys.first().map(SparsePoly::nvars).or(vars);
            let gp = read_poly(gpath, n)?;
            Output::new(to_value(&grothendieck_residue(&gp, &sys, trunc.get(), exec)?), true)
        }
        Command::VerifyThm1 { poly, h, samples, trunc } => {
            let f = read_poly(&poly.poly, vars)?;
            match h {
                Some(h) => {
                    let hp = read_poly(h, Some(f.nvars()))?;
                    let member = verify_theorem_0_1_part1(&f, &hp, trunc.get())?;
                    Output::new(json!({ "member": member }), member)
                }
                None => {
                    let r = part1_suite(&f, *samples, seed, trunc.get())?;
                    let ok = r.failures.is_empty();
                    Output::new(to_value(&r), ok)
                }
            }
        }
        Command::VerifyThm2 { poly, face, h, r, trunc } => {
            let f = read_poly(&poly.poly, vars)?;
            let delta = NewtonPolyhedron::of(&f)?;
            let hp = read_poly(h, Some(f.nvars()))?;
            let res = verify_theorem_0_1_part2(&f, &interior_face(&delta, *face)?, &hp, *r, trunc.get(), exec)?;
            Output::new(to_value(&res), true)
        }
        Command::Detlemma { rows, cols, trials } => {
            let r = detlemma_trials(*rows, *cols, *trials, seed, exec)?;
            let ok = r.pass;
            Output::new(to_value(&r), ok)
        }
        Command::Koszul { polytope } => {
            let pts: Vec<Vec<i64>> =
                serde_json::from_str(&read(polytope)?).map_err(|e| Error::Parse(format!("polytope JSON: {e}")))?;
            let p = Polytope::from_points(&pts)?;
            let k = koszul_random(&p, seed)?;
            let t = trace_volume_check(&p);
            let ok = k.dimension == 1 && t.agree;
            Output::new(json!({ "koszul": k, "trace": t }), ok)
        }
        Command::VerifyAll { poly, fan, primes, samples, trials, trunc } => {
            let f = read_poly(&poly.poly, vars)?;
            let mut cfg = PipelineConfig::new(f);
            if let Some(path) = fan {
                let fan: Fan = serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("fan JSON: {e}")))?;
                cfg.fan = Some(fan);
            }
            cfg.truncation = trunc.get();
            cfg.primes = *primes;
            cfg.seed = seed;
            cfg.part1_samples = *samples;
            cfg.detlemma_trials = *trials;
            cfg.exec = exec;
            let report = run_verify_all(&cfg);
            let code = report.exit_code();
            let text = text_summary(&report);
            let out = Output { json: to_value(&report), text, pass: code == 0 };
            if code > 1 {
                emit(g, &out)?;
                return Err(anyhow!(ReportedFailure(code)));
            }
            out
        }
    };
    Ok(out)
}

/// A failure whose report was already written.
#[derive(Debug)]
struct ReportedFailure(i32);

impl std::fmt::Display for ReportedFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "pipeline stopped with exit code {}", self.0)
    }
}

impl std::error::Error for ReportedFailure {}

fn emit(g: &Global, out: &Output) -> anyhow::Result<()> {
    let body = match g.format {
        OutFormat::Json => to_json_string(&out.json),
        OutFormat::Text => out.text.clone(),
    };
    match &g.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if let Some(ReportedFailure(code)) = e.downcast_ref() {
        return *code;
    }
    match e.downcast_ref::<Error>() {
        Some(err) => exit_code_of(err),
        // I/O and malformed files
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        emit(&cli.global, &out)?;
        Ok(out.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if e.downcast_ref::<ReportedFailure>().is_none() {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
