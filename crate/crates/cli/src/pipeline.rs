//! Solve, analyze, iterate, measure and compare for one channel.

use arimoto_rate::arimoto::{iterate, DeviationMap, StoppingRule};
use arimoto_rate::empirics::{compare, exponential_curve_from, one_over_n_curve, Measured};
use arimoto_rate::local::{analyze, predict_rate, RatePrediction};
use arimoto_rate::slow_rate::slow_constants;
use arimoto_rate::solver::{solve_capacity, CapacitySolution, SolverOptions};
use arimoto_rate::{Distribution, Error};

use crate::failure::Failure;
use crate::io::{scalar_curve_csv, vector_curve_csv, ChannelFile};
use crate::report::{
    AnalysisReport, CapacityReport, MeasurementReport, PredictionReport, Provenance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalPoint {
    /// The solver's optimum as computed.
    Refined,
    /// The optimum with every non-support weight set to zero.
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub tol_support: f64,
    pub tol_equal: f64,
}

#[derive(Debug, Clone)]
pub struct AnalyzeSettings {
    pub tolerances: Settings,
    pub init: Option<Vec<f64>>,
    pub iters: usize,
    pub eval_point: EvalPoint,
    pub hessians: bool,
}

pub struct Analysis {
    pub report: AnalysisReport,
    /// Curve CSV, absent when nothing could be measured.
    pub curve: Option<String>,
}

fn solve(file: &ChannelFile, t: &Settings) -> Result<CapacitySolution, Failure> {
    let channel = file.channel()?;
    let opts = SolverOptions {
        tol_support: t.tol_support,
        tol_equal: t.tol_equal,
        ..SolverOptions::default()
    };
    Ok(solve_capacity(&channel, &opts)?)
}

pub fn capacity(file: &ChannelFile, t: &Settings) -> Result<CapacityReport, Failure> {
    let sol = solve(file, t)?;
    Ok(CapacityReport {
        name: file.name.clone(),
        solution: (&sol).into(),
        classification: (&sol.classification).into(),
        provenance: Provenance::now(t.tol_support, t.tol_equal),
    })
}

fn boundary_point(sol: &CapacitySolution, t: &Settings) -> Result<CapacitySolution, Failure> {
    let mut w = vec![0.0; sol.lambda_star.len()];
    for &i in &sol.classification.type_i {
        w[i] = sol.lambda_star.probs()[i];
    }
    let point = Distribution::normalized(w)?;
    Ok(CapacitySolution::at_point(
        &sol.channel,
        point,
        t.tol_support,
        t.tol_equal,
    )?)
}

pub fn analyze_channel(file: &ChannelFile, s: &AnalyzeSettings) -> Result<Analysis, Failure> {
    let t = &s.tolerances;
    let refined = solve(file, t)?;
    let channel = refined.channel.clone();
    let m = channel.inputs();
    let start = match &s.init {
        Some(v) => Distribution::new(v.clone()).map_err(|e| Failure::input("--init", e))?,
        None => Distribution::uniform(m),
    };
    if start.len() != m {
        return Err(Failure::input(
            "--init",
            Error::LengthMismatch {
                expected: m,
                found: start.len(),
            },
        ));
    }
    if let Some(i) = start.probs().iter().position(|&p| p <= 0.0) {
        return Err(Failure::input("--init", Error::NotInterior(i)));
    }
    let sol = match s.eval_point {
        EvalPoint::Refined => refined.clone(),
        EvalPoint::Boundary => boundary_point(&refined, t)?,
    };
    let local = analyze(&channel, &sol)?;
    let mu0: Vec<f64> = start
        .probs()
        .iter()
        .zip(sol.lambda_star.probs())
        .map(|(a, b)| a - b)
        .collect();
    let mut notes = Vec::new();
    let mut prediction = predict_rate(&local.spectrum, &sol.classification, &mu0);
    if let RatePrediction::OneOverN { limits: None } = prediction {
        match slow_constants(&local.dstar, &sol.classification) {
            Ok(k) => {
                prediction = RatePrediction::OneOverN {
                    limits: Some(k.limits.to_vec()),
                }
            }
            Err(e) => notes.push(format!("limits of N·μᴺ unavailable: {e}")),
        }
    }

    let measured = match &prediction {
        RatePrediction::Exponential { .. } => {
            let dev = DeviationMap::new(&channel, &sol.lambda_star, sol.capacity)?;
            let series = dev.series(&start, s.iters)?;
            match exponential_curve_from(&series) {
                Ok(c) => Some(Measured::Exponential(c)),
                Err(e) => {
                    notes.push(format!("no rate measured: {e}"));
                    None
                }
            }
        }
        RatePrediction::OneOverN { .. } => {
            let trace = iterate(&channel, &start, StoppingRule::iterations(s.iters))?;
            match one_over_n_curve(&trace, &sol.lambda_star) {
                Ok(c) => Some(Measured::OneOverN(c)),
                Err(e) => {
                    notes.push(format!("no 1/N curve: {e}"));
                    None
                }
            }
        }
    };

    let mut curve = None;
    let mut measurement = None;
    if let Some(measured) = measured {
        curve = Some(match &measured {
            Measured::Exponential(c) => scalar_curve_csv(&c.points),
            Measured::OneOverN(c) => vector_curve_csv(&c.points),
        });
        match compare(&prediction, measured) {
            Ok(r) => {
                measurement = Some(MeasurementReport {
                    iterations: s.iters,
                    terminal_n: r.terminal_n,
                    terminal: r.terminal,
                    discrepancy: r.discrepancy,
                })
            }
            Err(e) => notes.push(format!("no comparison: {e}")),
        }
    }

    let report = AnalysisReport {
        name: file.name.clone(),
        solution: (&refined).into(),
        evaluation_point: sol.lambda_star.probs().to_vec(),
        initial_point: start.probs().to_vec(),
        classification: (&sol.classification).into(),
        jacobian: local.jacobian.clone(),
        hessians: s.hessians.then(|| local.hessians.clone()),
        spectrum: (&local.spectrum).into(),
        prediction: PredictionReport::from(&prediction),
        measurement,
        notes,
        provenance: Provenance::now(t.tol_support, t.tol_equal),
    };
    Ok(Analysis { report, curve })
}
