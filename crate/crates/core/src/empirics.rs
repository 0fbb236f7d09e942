//! Convergence curves measured on iterations: `L(N) = −ln‖μᴺ‖ / N` for
//! geometric decay and `N·μᴺ` for `1/N` decay, and their comparison with
//! predictions.

use crate::arimoto::Trace;
use crate::channel::Distribution;
use crate::error::{Error, Result};
use crate::local::RatePrediction;
use crate::numeric::norm2;

/// `μᴺ = λᴺ − λ*` for every recorded iterate.
pub fn mu_series(trace: &Trace, lambda_star: &Distribution) -> Result<Vec<Vec<f64>>> {
    let m = trace.channel.inputs();
    if lambda_star.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: lambda_star.len(),
        });
    }
    Ok(trace
        .iterates
        .iter()
        .map(|l| {
            l.probs()
                .iter()
                .zip(lambda_star.probs())
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialCurve {
    /// `(N, L(N))` for `N ≥ 1` with `μᴺ ≠ 0`.
    pub points: Vec<(usize, f64)>,
    /// Steps where `μᴺ` was exactly zero and no value could be formed.
    pub exact_zeros: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneOverNCurve {
    /// `(N, N·μᴺ)` for `N ≥ 1`.
    pub points: Vec<(usize, Vec<f64>)>,
}

/// `L(N)` from a deviation series (`series[N] = μᴺ`).
pub fn exponential_curve_from(series: &[Vec<f64>]) -> Result<ExponentialCurve> {
    let mut points = Vec::new();
    let mut exact_zeros = Vec::new();
    for (n, mu) in series.iter().enumerate().skip(1) {
        let norm = norm2(mu);
        if norm == 0.0 {
            exact_zeros.push(n);
        } else {
            points.push((n, -norm.ln() / n as f64));
        }
    }
    if let Some(&last) = exact_zeros.last() {
        if last + 1 == series.len() {
            return Err(Error::ExactConvergence(last));
        }
    }
    Ok(ExponentialCurve {
        points,
        exact_zeros,
    })
}

pub fn exponential_curve(trace: &Trace, lambda_star: &Distribution) -> Result<ExponentialCurve> {
    exponential_curve_from(&mu_series(trace, lambda_star)?)
}

pub fn one_over_n_curve_from(series: &[Vec<f64>]) -> Result<OneOverNCurve> {
    if let Some(mu) = series.iter().find(|mu| mu.len() != 3) {
        return Err(Error::WrongShape(format!("{} inputs, need 3", mu.len())));
    }
    Ok(OneOverNCurve {
        points: series
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, mu)| (n, mu.iter().map(|x| n as f64 * x).collect()))
            .collect(),
    })
}

pub fn one_over_n_curve(trace: &Trace, lambda_star: &Distribution) -> Result<OneOverNCurve> {
    one_over_n_curve_from(&mu_series(trace, lambda_star)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measured {
    Exponential(ExponentialCurve),
    OneOverN(OneOverNCurve),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Exponential,
    OneOverN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub regime: Regime,
    /// `[θ, −ln θ]` for geometric decay, the limit vector for `1/N` decay
    /// (empty when unavailable).
    pub predicted: Vec<f64>,
    pub measured: Measured,
    pub terminal_n: usize,
    /// `[L(N)]` or `N·μᴺ` at the last recorded step.
    pub terminal: Vec<f64>,
    /// `|terminal − prediction|` per component: against `−ln θ` for geometric
    /// decay, against the limits for `1/N` decay.
    pub discrepancy: Vec<f64>,
}

pub fn compare(prediction: &RatePrediction, measured: Measured) -> Result<RateReport> {
    match (prediction, &measured) {
        (
            RatePrediction::Exponential {
                theta,
                neg_log_theta,
                ..
            },
            Measured::Exponential(curve),
        ) => {
            let &(n, l) = curve
                .points
                .last()
                .ok_or_else(|| Error::RegimeMismatch("empty curve".into()))?;
            Ok(RateReport {
                regime: Regime::Exponential,
                predicted: vec![*theta, *neg_log_theta],
                terminal_n: n,
                terminal: vec![l],
                discrepancy: vec![(l - neg_log_theta).abs()],
                measured,
            })
        }
        (RatePrediction::OneOverN { limits }, Measured::OneOverN(curve)) => {
            let (n, last) = curve
                .points
                .last()
                .cloned()
                .ok_or_else(|| Error::RegimeMismatch("empty curve".into()))?;
            let predicted = limits.clone().unwrap_or_default();
            let discrepancy = predicted
                .iter()
                .zip(&last)
                .map(|(p, x)| (x - p).abs())
                .collect();
            Ok(RateReport {
                regime: Regime::OneOverN,
                predicted,
                terminal_n: n,
                terminal: last,
                discrepancy,
                measured,
            })
        }
        _ => Err(Error::RegimeMismatch(
            "prediction and curve describe different regimes".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arimoto::{iterate, DeviationMap, StoppingRule};
    use crate::fixtures;
    use crate::local::RateBranch;
    use crate::solver::{solve_capacity, SolverOptions};

    #[test]
    fn series_at_the_fixed_point_is_zero() {
        let c = fixtures::symmetric3();
        let u = Distribution::uniform(3);
        let t = iterate(&c, &u, StoppingRule::iterations(3)).unwrap();
        let mu = mu_series(&t, &u).unwrap();
        assert!(mu.iter().flatten().all(|x| x.abs() < 1e-16));
        assert!(mu_series(&t, &Distribution::uniform(2)).is_err());
    }

    #[test]
    fn phi1_rate_and_vanishing_one_over_n() {
        let c = fixtures::phi1();
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let dev = DeviationMap::new(&c, &sol.lambda_star, sol.capacity).unwrap();
        let series = dev.series(&Distribution::uniform(3), 500).unwrap();
        let curve = exponential_curve_from(&series).unwrap();
        let l = |n: usize| curve.points[n - 1].1;
        assert!((l(500) - 0.161).abs() < 0.005);
        assert!((l(500) - l(400)).abs() < 0.01);
        let slow = one_over_n_curve_from(&series).unwrap();
        assert!(slow.points[499].1.iter().all(|x| x.abs() < 1e-6));
        for mu in &series {
            assert!(mu.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn exact_zero_terminal_is_an_error() {
        let s = vec![vec![0.1, -0.1], vec![0.01, -0.01], vec![0.0, 0.0]];
        assert_eq!(exponential_curve_from(&s), Err(Error::ExactConvergence(2)));
        let s = vec![vec![0.1, -0.1], vec![0.0, 0.0], vec![1e-3, -1e-3]];
        assert_eq!(exponential_curve_from(&s).unwrap().exact_zeros, vec![1]);
    }

    #[test]
    fn compare_guards_regimes() {
        let pred = RatePrediction::Exponential {
            theta: 0.855,
            neg_log_theta: -(0.855f64).ln(),
            branch: RateBranch::Max,
        };
        let empty = Measured::Exponential(ExponentialCurve {
            points: vec![],
            exact_zeros: vec![],
        });
        assert!(matches!(
            compare(&pred, empty),
            Err(Error::RegimeMismatch(_))
        ));
        let slow = Measured::OneOverN(OneOverNCurve { points: vec![] });
        assert!(matches!(
            compare(&pred, slow),
            Err(Error::RegimeMismatch(_))
        ));
        let curve = Measured::Exponential(ExponentialCurve {
            points: vec![(500, 0.161)],
            exact_zeros: vec![],
        });
        let r = compare(&pred, curve).unwrap();
        assert!((r.discrepancy[0] - 0.004).abs() < 1e-3);
    }
}
