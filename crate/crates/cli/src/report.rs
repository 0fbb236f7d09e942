//! Serializable reports and their human-readable rendering.

use std::fmt::Write as _;

use arimoto_rate::local::{RateBranch, RatePrediction, Spectrum};
use arimoto_rate::solver::{CapacitySolution, IndexClassification};
use serde::{Deserialize, Serialize};

pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub tol_support: f64,
    pub tol_equal: f64,
    pub generated_at: String,
}

impl Provenance {
    pub fn now(tol_support: f64, tol_equal: f64) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            tol_support,
            tol_equal,
            generated_at: chrono::Utc::now().to_rfc3339(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub capacity_nats: f64,
    pub capacity_bits: f64,
    pub lambda_star: Vec<f64>,
    pub q_star: Vec<f64>,
    pub divergences: Vec<f64>,
    pub kkt_residual: f64,
}

impl From<&CapacitySolution> for SolutionSummary {
    fn from(s: &CapacitySolution) -> Self {
        SolutionSummary {
            capacity_nats: s.capacity,
            capacity_bits: s.capacity / std::f64::consts::LN_2,
            lambda_star: s.lambda_star.probs().to_vec(),
            q_star: s.q_star.probs().to_vec(),
            divergences: s.divergences.clone(),
            kkt_residual: s.kkt_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub type_i: Vec<usize>,
    pub type_ii: Vec<usize>,
    pub type_iii: Vec<usize>,
    pub tol_support: f64,
    pub tol_equal: f64,
}

impl From<&IndexClassification> for ClassificationReport {
    fn from(c: &IndexClassification) -> Self {
        ClassificationReport {
            type_i: c.type_i.clone(),
            type_ii: c.type_ii.clone(),
            type_iii: c.type_iii.clone(),
            tol_support: c.tol_support,
            tol_equal: c.tol_equal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub theta_max: f64,
    pub theta_sec: Option<f64>,
    pub multiplicity: usize,
    pub nu_max: Option<Vec<f64>>,
    pub nu_max_is_right: bool,
}

impl From<&Spectrum> for SpectrumReport {
    fn from(s: &Spectrum) -> Self {
        SpectrumReport {
            eigenvalues: s.eigenvalues.clone(),
            theta_max: s.theta_max,
            theta_sec: s.theta_sec,
            multiplicity: s.multiplicity,
            nu_max: s.nu_max().ok().map(<[f64]>::to_vec),
            nu_max_is_right: s.nu_max_is_right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime")]
pub enum PredictionReport {
    Exponential {
        theta: f64,
        neg_log_theta: f64,
        branch: String,
    },
    OneOverN {
        limits: Option<Vec<f64>>,
    },
}

impl From<&RatePrediction> for PredictionReport {
    fn from(p: &RatePrediction) -> Self {
        match p {
            RatePrediction::Exponential {
                theta,
                neg_log_theta,
                branch,
            } => PredictionReport::Exponential {
                theta: *theta,
                neg_log_theta: *neg_log_theta,
                branch: match branch {
                    RateBranch::Max => "largest".into(),
                    RateBranch::Second => "second".into(),
                },
            },
            RatePrediction::OneOverN { limits } => PredictionReport::OneOverN {
                limits: limits.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub iterations: usize,
    pub terminal_n: usize,
    /// `[L(N)]` or `N·μᴺ` at `terminal_n`.
    pub terminal: Vec<f64>,
    pub discrepancy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub name: String,
    pub solution: SolutionSummary,
    pub classification: ClassificationReport,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub name: String,
    pub solution: SolutionSummary,
    pub evaluation_point: Vec<f64>,
    pub initial_point: Vec<f64>,
    pub classification: ClassificationReport,
    pub jacobian: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessians: Option<Vec<Matrix>>,
    pub spectrum: SpectrumReport,
    pub prediction: PredictionReport,
    pub measurement: Option<MeasurementReport>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

fn v3(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("({})", cells.join(", "))
}

fn indices(v: &[usize]) -> String {
    let cells: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", cells.join(", "))
}

fn solution_lines(out: &mut String, s: &SolutionSummary) {
    let _ = writeln!(
        out,
        "capacity      {:.6} nats = {:.6} bits",
        s.capacity_nats, s.capacity_bits
    );
    let _ = writeln!(out, "λ*            {}", v3(&s.lambda_star));
    let _ = writeln!(out, "Q*            {}", v3(&s.q_star));
    let _ = writeln!(out, "KKT residual  {:.2e}", s.kkt_residual);
}

fn classification_lines(out: &mut String, c: &ClassificationReport) {
    let _ = writeln!(
        out,
        "index types   I {}  II {}  III {}  (tol_support {:e}, tol_equal {:e})",
        indices(&c.type_i),
        indices(&c.type_ii),
        indices(&c.type_iii),
        c.tol_support,
        c.tol_equal
    );
}

impl CapacityReport {
    pub fn render(&self) -> String {
        let mut out = format!("channel       {}\n", self.name);
        solution_lines(&mut out, &self.solution);
        classification_lines(&mut out, &self.classification);
        out
    }
}

impl AnalysisReport {
    pub fn render(&self) -> String {
        let mut out = format!("channel       {}\n", self.name);
        solution_lines(&mut out, &self.solution);
        classification_lines(&mut out, &self.classification);
        let _ = writeln!(out, "evaluated at  {}", v3(&self.evaluation_point));
        let _ = writeln!(out, "Jacobian");
        for row in &self.jacobian {
            let _ = writeln!(out, "  {}", v3(row));
        }
        let s = &self.spectrum;
        let _ = writeln!(out, "eigenvalues   {}", v3(&s.eigenvalues));
        if let Some(nu) = &s.nu_max {
            let _ = writeln!(
                out,
                "ν_max         {}{}",
                v3(nu),
                if s.nu_max_is_right {
                    " (also a right eigenvector)"
                } else {
                    ""
                }
            );
        }
        match &self.prediction {
            PredictionReport::Exponential {
                theta,
                neg_log_theta,
                branch,
            } => {
                let _ = writeln!(
                    out,
                    "prediction    exponential, θ = {theta:.3} ({branch} eigenvalue), −ln θ = {neg_log_theta:.3}"
                );
            }
            PredictionReport::OneOverN { limits } => {
                let lim = limits
                    .as_deref()
                    .map(v3)
                    .unwrap_or_else(|| "unavailable".into());
                let _ = writeln!(out, "prediction    1/N, limits of N·μᴺ {lim}");
            }
        }
        if let Some(m) = &self.measurement {
            let what = if m.terminal.len() == 1 {
                "L(N)"
            } else {
                "N·μᴺ"
            };
            let _ = writeln!(
                out,
                "measured      {what} at N = {}: {}, discrepancy {}",
                m.terminal_n,
                v3(&m.terminal),
                v3(&m.discrepancy)
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note          {n}");
        }
        out
    }
}
