use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::analytic::analytic_finite_integral;
use super::mc::{mc_integral, GENERATOR_ID};
use super::random::random_bindings;
use super::OracleError;
use crate::engine::{canonicalize, catalog_case, evaluate, instantiate_closed_form, parse, Bindings, ClosedForm, QuadraticForm};

/// Description of how numeric checks map onto the engine's measure.
pub const COORDINATES: &str = "weighted: q~_i = sqrt(w_i) q_i, D[q] = prod dq~_i";

/// Slack added to the Monte Carlo band, relative to the engine value.
const MC_REL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum BindingSource {
    /// Fresh random bindings per dimension, derived from the case seed.
    Random,
    /// Fixed bindings; every requested dimension must match their grid.
    Explicit(Bindings),
}

#[derive(Debug, Clone)]
pub struct VerificationCase {
    pub name: String,
    pub dsl: String,
    pub bindings: BindingSource,
    pub dims: Vec<usize>,
    pub tolerance: f64,
    pub mc_samples: u64,
    pub seed: u64,
}

impl VerificationCase {
    /// Built-in case `A`..`J` with random bindings.
    pub fn catalog(id: &str, dims: &[usize], tolerance: f64, mc_samples: u64, seed: u64) -> Option<Self> {
        catalog_case(id).map(|c| VerificationCase {
            name: c.id.to_string(),
            dsl: c.dsl.to_string(),
            bindings: BindingSource::Random,
            dims: dims.to_vec(),
            tolerance,
            mc_samples,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub dim: usize,
    /// `[re, im]`.
    pub engine: Option<[f64; 2]>,
    pub analytic: Option<[f64; 2]>,
    pub mc: Option<[f64; 2]>,
    pub mc_stderr: Option<f64>,
    pub rel_err: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub seed: u64,
    pub samples: u64,
    pub tol: f64,
    pub generator_id: String,
    pub coordinates: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub case: String,
    pub dsl: String,
    pub closed_form: String,
    pub assumptions: Vec<String>,
    pub residual_tags: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub config: ReportConfig,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case {}: {}", self.case, self.dsl);
        let _ = writeln!(s, "  closed form: {}", self.closed_form);
        if !self.assumptions.is_empty() {
            let _ = writeln!(s, "  assumptions: {}", self.assumptions.join(", "));
        }
        if !self.residual_tags.is_empty() {
            let _ = writeln!(s, "  residual tags: {}", self.residual_tags.join(", "));
        }
        let c = |v: &Option<[f64; 2]>| v.map(|[re, im]| format!("{re:e}{im:+e}i")).unwrap_or_else(|| "-".into());
        let f = |v: &Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            let _ = write!(
                s,
                "  D={} engine={} analytic={} mc={} mc_stderr={} rel_err={} {}",
                r.dim,
                c(&r.engine),
                c(&r.analytic),
                c(&r.mc),
                f(&r.mc_stderr),
                f(&r.rel_err),
                if r.pass { "PASS" } else { "FAIL" }
            );
            if let Some(e) = &r.error {
                let _ = write!(s, " ({e})");
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "  seed={} samples={} tol={:e} generator={} coordinates={}",
            self.config.seed, self.config.samples, self.config.tol, self.config.generator_id, self.config.coordinates
        );
        s
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Per-row seed: case seed mixed with the case name, dimension and purpose.
fn derive_seed(seed: u64, name: &str, dim: usize, purpose: u64) -> u64 {
    let mut z = seed ^ fnv1a(name) ^ ((dim as u64) << 32) ^ (purpose << 56);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn run_row(vc: &VerificationCase, qf: &QuadraticForm, cf: &ClosedForm, dim: usize) -> Result<ReportRow, OracleError> {
    let generated;
    let bindings = match &vc.bindings {
        BindingSource::Random => {
            generated = random_bindings(qf, dim, derive_seed(vc.seed, &vc.name, dim, 0))?;
            &generated
        }
        BindingSource::Explicit(b) => b,
    };
    let analytic = analytic_finite_integral(qf, bindings, dim)?;
    let engine = instantiate_closed_form(cf, bindings, dim)?;
    let rel_err = (engine - analytic).norm() / analytic.norm();
    let mut pass = rel_err <= vc.tolerance;
    let (mut mc, mut mc_stderr) = (None, None);
    if vc.mc_samples > 0 {
        let est = mc_integral(qf, bindings, dim, vc.mc_samples, derive_seed(vc.seed, &vc.name, dim, 1))?;
        pass &= (engine - est.estimate).norm() <= 4.0 * est.stderr + MC_REL_SLACK * engine.norm();
        mc = Some(pair(est.estimate));
        mc_stderr = Some(est.stderr);
    }
    Ok(ReportRow {
        dim,
        engine: Some(pair(engine)),
        analytic: Some(pair(analytic)),
        mc,
        mc_stderr,
        rel_err: Some(rel_err),
        pass,
        error: None,
    })
}

fn failed_row(dim: usize, e: impl std::fmt::Display) -> ReportRow {
    ReportRow { dim, engine: None, analytic: None, mc: None, mc_stderr: None, rel_err: None, pass: false, error: Some(e.to_string()) }
}

/// Runs parse, canonicalize, evaluate and the numeric comparison for every
/// dimension. Upstream failures become failed rows; a report is always produced.
pub fn run_case(vc: &VerificationCase) -> VerificationReport {
    let config = ReportConfig {
        seed: vc.seed,
        samples: vc.mc_samples,
        tol: vc.tolerance,
        generator_id: GENERATOR_ID.to_string(),
        coordinates: COORDINATES.to_string(),
    };
    let mut report = VerificationReport {
        case: vc.name.clone(),
        dsl: vc.dsl.clone(),
        closed_form: String::new(),
        assumptions: Vec::new(),
        residual_tags: Vec::new(),
        rows: Vec::new(),
        config,
    };
    let symbolic = parse(&vc.dsl).and_then(|ast| canonicalize(&ast)).and_then(|qf| evaluate(&qf).map(|cf| (qf, cf)));
    let (qf, cf) = match symbolic {
        Ok(x) => x,
        Err(e) => {
            report.rows = vc.dims.iter().map(|&d| failed_row(d, &e)).collect();
            return report;
        }
    };
    report.closed_form = cf.to_string();
    report.assumptions = cf.assumptions.iter().map(|a| a.to_string()).collect();
    report.residual_tags = cf.residual_tags.iter().map(|t| t.to_string()).collect();
    report.rows = vc.dims.iter().map(|&d| run_row(vc, &qf, &cf, d).unwrap_or_else(|e| failed_row(d, e))).collect();
    report
}
