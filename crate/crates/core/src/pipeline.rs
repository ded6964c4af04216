//! End-to-end verification run on one polynomial, producing a single
//! deterministic JSON report.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{fmt_q, q, serde_q, Q};
use crate::combid::{choose_weights, detlemma_trials, thm_1_3_assumptions, AssumptionReport, DetLemmaReport};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::facering::{face_kbar, GradedDim};
use crate::fan::{regularize, sigma_delta_fan, Fan};
use crate::grobner::{nondegenerate, MonteCarlo, NondegReport};
use crate::localalg::{jacobian_multiplication_check, part1_suite, socle_newton_order, JacobianReport, Part1Report, SocleOrderReport};
use crate::poly::{Exponent, SparsePoly};
use crate::polylattice::{NewtonOrder, NewtonPolyhedron, PolyhedronJson};
use crate::residue::verify_theorem_0_1_part2;

/// Convenient nondegenerate isolated singularities used as the fixed
/// regression inputs; variables are `x1..xn`.
pub const REGRESSION_FAMILY: [(&str, usize); 6] = [
    ("x1^2 + x2^3", 2),
    ("x1^2 + x2^2", 2),
    ("x1^2 + x1*x2 + x2^3", 2),
    ("x1^3 + x2^3", 2),
    ("x1^2 + x2^5", 2),
    ("x1^2 + x2^2 + x3^2", 3),
];

pub fn regression_family() -> Vec<SparsePoly> {
    REGRESSION_FAMILY.iter().map(|(s, n)| SparsePoly::parse_any(s, Some(*n)).expect("fixed input parses")).collect()
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub poly: SparsePoly,
    /// A regular fan refining `Σ_Δ`; computed when absent.
    pub fan: Option<Fan>,
    pub truncation: Option<usize>,
    pub primes: usize,
    pub seed: u64,
    pub part1_samples: usize,
    pub detlemma_trials: usize,
    pub exec: Execution,
}

impl PipelineConfig {
    pub fn new(poly: SparsePoly) -> Self {
        PipelineConfig {
            poly,
            fan: None,
            truncation: None,
            primes: 3,
            seed: 0,
            part1_samples: 50,
            detlemma_trials: 50,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanReport {
    pub sigma_delta: Fan,
    pub regular: Fan,
    pub is_regular: bool,
    pub refines: bool,
    pub keeps_coordinate_rays: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbarSummary {
    pub total_dim: i64,
    #[serde(with = "serde_q")]
    pub socle_degree: Q,
    #[serde(with = "serde_q")]
    pub expected_socle_degree: Q,
    pub socle_basis: Vec<Exponent>,
    pub graded_dims: Vec<GradedDim>,
    pub matches_prediction: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceResidue {
    pub h: SparsePoly,
    #[serde(with = "serde_q")]
    pub value: Q,
    pub truncation_used: usize,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceReport {
    pub vertices: Vec<Exponent>,
    pub dim: usize,
    pub r: usize,
    pub kbar: KbarSummary,
    pub residue: FaceResidue,
    pub assumptions: AssumptionReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub poly: SparsePoly,
    pub nvars: usize,
    pub seed: u64,
    pub primes: usize,
    pub polyhedron: Option<PolyhedronJson>,
    pub nondegeneracy: Option<NondegReport>,
    pub fan: Option<FanReport>,
    pub faces: Vec<FaceReport>,
    pub nu_x: Option<NewtonOrder>,
    pub n_minus_nu_line: Option<String>,
    pub socle_order: Option<SocleOrderReport>,
    pub membership: Option<Part1Report>,
    pub jacobian: Option<JacobianReport>,
    pub detlemma: Option<DetLemmaReport>,
    pub checks: Vec<CheckLine>,
    pub status: Status,
    pub error: Option<StageError>,
}

impl VerifyReport {
    /// 0 all-pass, 1 failed check, 2 input error, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        match (&self.status, &self.error) {
            (Status::Pass, _) => 0,
            (_, Some(e)) => e.exit_code,
            _ => 1,
        }
    }
}

pub fn exit_code_of(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else if e.is_resource_error() {
        3
    } else {
        1
    }
}

struct Run {
    report: VerifyReport,
}

impl Run {
    fn check(&mut self, name: &str, pass: bool) {
        self.report.checks.push(CheckLine { name: name.into(), pass });
    }

    fn stage<T>(&mut self, stage: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.report.error = Some(StageError { stage: stage.into(), message: e.to_string(), exit_code: exit_code_of(&e) });
                None
            }
        }
    }
}

pub fn run_verify_all(cfg: &PipelineConfig) -> VerifyReport {
    let f = &cfg.poly;
    let n = f.nvars();
    let mut run = Run {
        report: VerifyReport {
            poly: f.clone(),
            nvars: n,
            seed: cfg.seed,
            primes: cfg.primes,
            polyhedron: None,
            nondegeneracy: None,
            fan: None,
            faces: vec![],
            nu_x: None,
            n_minus_nu_line: None,
            socle_order: None,
            membership: None,
            jacobian: None,
            detlemma: None,
            checks: vec![],
            status: Status::Error,
            error: None,
        },
    };
    stages(cfg, &mut run);
    let r = &mut run.report;
    r.status = if r.error.is_some() {
        if r.error.as_ref().is_some_and(|e| e.exit_code == 1) {
            Status::Fail
        } else {
            Status::Error
        }
    } else if r.checks.iter().all(|c| c.pass) {
        Status::Pass
    } else {
        Status::Fail
    };
    run.report
}

fn stages(cfg: &PipelineConfig, run: &mut Run) -> Option<()> {
    let f = &cfg.poly;
    let n = f.nvars();
    let mc = MonteCarlo { primes: cfg.primes, seed: cfg.seed };

    let delta = run.stage("polyhedron", NewtonPolyhedron::of(f))?;
    run.report.polyhedron = Some(delta.to_json());

    let nd = run.stage("nondegeneracy", nondegenerate(f, &mc, cfg.exec))?;
    let ok = nd.nondegenerate;
    run.report.nondegeneracy = Some(nd);
    run.check("nondegenerate", ok);
    if !ok {
        return None;
    }

    let sd = run.stage("fan", sigma_delta_fan(&delta))?;
    let regular = match &cfg.fan {
        Some(fan) => fan.clone(),
        None => run.stage("fan", regularize(&sd))?,
    };
    let is_regular = run.stage("fan", regular.is_regular())?;
    let fr = FanReport {
        refines: regular.refines(&sd),
        keeps_coordinate_rays: regular.has_coordinate_rays(),
        is_regular,
        sigma_delta: sd,
        regular,
    };
    run.check("regular fan refines Sigma_Delta", fr.is_regular && fr.refines && fr.keeps_coordinate_rays);
    let regular = fr.regular.clone();
    run.report.fan = Some(fr);

    for (idx, face) in delta.interior_compact_faces().iter().enumerate() {
        let stage = format!("face[{idx}]");
        let kbar = run.stage(&stage, face_kbar(f, &delta, face))?;
        let summary = KbarSummary {
            total_dim: kbar.total_dim,
            expected_socle_degree: kbar.expected_socle_degree(),
            socle_degree: kbar.socle_degree.clone(),
            socle_basis: kbar.socle_basis.clone(),
            graded_dims: kbar.graded_dims.iter().filter(|g| g.dim != 0).cloned().collect(),
            matches_prediction: kbar.matches_prediction(),
        };
        run.check(
            &format!("face[{idx}] socle degree and Poincare prediction"),
            summary.socle_degree == summary.expected_socle_degree && summary.matches_prediction,
        );
        let r = face.r(n);
        let m = summary.socle_basis.first().cloned();
        let m = run.stage(&stage, m.ok_or_else(|| Error::DegenerateFaceData("empty socle".into())))?;
        let h = SparsePoly::monomial(Exponent(m.iter().map(|x| x - 1).collect()), q(1));
        let res = run.stage(&stage, verify_theorem_0_1_part2(f, face, &h, r, cfg.truncation, cfg.exec))?;
        run.check(&format!("face[{idx}] residue nonzero"), !res.value.is_zero() && res.stable);
        let ws = run.stage(&stage, choose_weights(f, &delta, face, &regular, cfg.seed))?;
        let assumptions = run.stage(&stage, thm_1_3_assumptions(&regular, f, &ws, &mc))?;
        run.check(&format!("face[{idx}] weight hypotheses"), assumptions.all());
        run.report.faces.push(FaceReport {
            vertices: face.vertex_subset.iter().map(|&i| delta.vertices()[i].clone()).collect(),
            dim: face.dim,
            r,
            kbar: summary,
            residue: FaceResidue { h, value: res.value, truncation_used: res.truncation_used, stable: res.stable },
            assumptions,
        });
    }

    let nu_x = delta.nu_point(&Exponent::ones(n));
    run.report.nu_x = Some(nu_x.clone());
    let so = run.stage("socle-order", socle_newton_order(f, cfg.truncation))?;
    let nu = so.n_minus_nu_x.clone();
    run.report.n_minus_nu_line = Some(format!(
        "n - nu(x1*...*x{n}) = {n} - {nu_x} = {}; socle Newton order = {}",
        fmt_q(&nu),
        fmt_q(&so.nu_socle)
    ));
    run.check("socle Newton order equals n - nu(x1*...*xn)", so.matches);
    run.report.socle_order = Some(so);

    let p1 = run.stage("membership", part1_suite(f, cfg.part1_samples, cfg.seed, cfg.truncation))?;
    run.check("interior monomials lie in i", p1.failures.is_empty());
    run.report.membership = Some(p1);

    let jac = run.stage("jacobian", jacobian_multiplication_check(f, cfg.truncation))?;
    run.check("x1*...*xn : P/j -> P/i well defined and injective", jac.well_defined && jac.injective);
    run.report.jacobian = Some(jac);

    let rows = n.clamp(2, 4);
    let dl = run.stage("detlemma", detlemma_trials(rows, rows + 1, cfg.detlemma_trials, cfg.seed, cfg.exec))?;
    run.check("determinant identities", dl.pass);
    run.report.detlemma = Some(dl);
    Some(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::Parse(format!("unknown format {other:?}; expected json or text"))),
        }
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn text_summary(r: &VerifyReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("polynomial: {}\n", r.poly));
    if let Some(nd) = &r.nondegeneracy {
        out.push_str(&format!("nondegenerate: {}\n", nd.nondegenerate));
        for face in nd.faces.iter().filter(|f| f.verdict.has_zero) {
            out.push_str(&format!(
                "  torus zero on face {:?}\n",
                face.vertices.iter().map(|v| v.0.clone()).collect::<Vec<_>>()
            ));
        }
    }
    if let Some(fr) = &r.fan {
        out.push_str(&format!("Sigma_Delta rays: {:?}\n", fr.sigma_delta.rays()));
        out.push_str(&format!("regular fan: {} rays, {} cones\n", fr.regular.rays().len(), fr.regular.cones().len()));
    }
    for (i, face) in r.faces.iter().enumerate() {
        out.push_str(&format!(
            "face[{i}] dim {} r {}: dim Kbar = {}, socle degree {} (expected {}), residue of {} = {}\n",
            face.dim,
            face.r,
            face.kbar.total_dim,
            fmt_q(&face.kbar.socle_degree),
            fmt_q(&face.kbar.expected_socle_degree),
            face.residue.h,
            fmt_q(&face.residue.value)
        ));
    }
    if let Some(line) = &r.n_minus_nu_line {
        out.push_str(line);
        out.push('\n');
    }
    for c in &r.checks {
        out.push_str(&format!("[{}] {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name));
    }
    if let Some(e) = &r.error {
        out.push_str(&format!("error in stage {}: {}\n", e.stage, e.message));
    }
    out.push_str(&format!("status: {:?}\n", r.status).to_lowercase());
    out
}

pub fn emit_report(r: &VerifyReport, format: Format) -> String {
    match format {
        Format::Json => to_json_string(r),
        Format::Text => text_summary(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: &str, n: usize) -> PipelineConfig {
        let mut c = PipelineConfig::new(SparsePoly::parse_any(s, Some(n)).unwrap());
        c.part1_samples = 10;
        c.detlemma_trials = 5;
        c
    }

    #[test]
    fn cusp_passes() {
        let r = run_verify_all(&cfg("x1^2 + x2^3", 2));
        assert_eq!(r.status, Status::Pass, "{}", text_summary(&r));
        assert_eq!(r.socle_order.as_ref().unwrap().nu_socle, crate::arith::qr(7, 6));
        assert_eq!(r.faces.len(), 1);
        assert_eq!(r.faces[0].residue.value, crate::arith::qr(1, 6));
        let text = text_summary(&r);
        assert!(text.contains(r.n_minus_nu_line.as_ref().unwrap()));
    }

    #[test]
    fn degenerate_stops_at_nondegeneracy() {
        let r = run_verify_all(&cfg("x1^2 + 2*x1*x2 + x2^2", 2));
        assert_eq!(r.status, Status::Fail);
        assert!(r.fan.is_none());
        assert!(text_summary(&r).contains("torus zero on face"));
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn json_round_trip() {
        let r = run_verify_all(&cfg("x1^2 + x1*x2 + x2^3", 2));
        let back: VerifyReport = serde_json::from_str(&emit_report(&r, Format::Json)).unwrap();
        assert_eq!(back, r);
        assert!("yaml".parse::<Format>().is_err());
    }
}
