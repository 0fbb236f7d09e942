//! The Arimoto update `F`, recorded iterations and the per-step capacity estimate.

use crate::channel::{kl_divergence, Channel, Distribution};
use crate::error::{Error, Result};
use crate::numeric::{max_abs, sum};

/// `F(λ)` with `λ` treated as free weights (no simplex requirement).
///
/// `F_i = λ_i exp(D_i) / Σ_k λ_k exp(D_k)`, evaluated with the largest `D`
/// factored out.
pub fn map_extended(channel: &Channel, weights: &[f64]) -> Result<Vec<f64>> {
    let d = channel.divergences_at(weights)?;
    let top = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = weights
        .iter()
        .zip(&d)
        .map(|(l, di)| l * (di - top).exp())
        .collect();
    let z = sum(w.iter().copied());
    Ok(w.into_iter().map(|x| x / z).collect())
}

pub fn arimoto_map(channel: &Channel, lambda: &Distribution) -> Result<Distribution> {
    if lambda.len() != channel.inputs() {
        return Err(Error::LengthMismatch {
            expected: channel.inputs(),
            found: lambda.len(),
        });
    }
    map_extended(channel, lambda.probs()).map(Distribution::from_trusted)
}

/// When to stop an iteration: whichever limit is hit first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub max_iters: Option<usize>,
    /// Threshold on `max_i |λ^{N+1}_i − λ^N_i|`.
    pub step_tol: Option<f64>,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            max_iters: Some(10_000),
            step_tol: Some(1e-13),
        }
    }
}

impl StoppingRule {
    pub fn iterations(n: usize) -> Self {
        Self {
            max_iters: Some(n),
            step_tol: None,
        }
    }
}

/// A recorded run: `iterates[k]` is `λ^k`, `estimates[k]` is `C(k+1, k)`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub channel: Channel,
    pub iterates: Vec<Distribution>,
    pub estimates: Vec<f64>,
}

impl Trace {
    pub fn last(&self) -> &Distribution {
        self.iterates.last().expect("trace holds the initial point")
    }

    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    /// First step violating `0 ≤ C − C(N+1,N) ≤ D(λ*‖λ⁰)/N`, with `slack`
    /// allowed on both sides. For a uniform start the budget is `ln m − h(λ*)`.
    pub fn sandwich_violation(
        &self,
        lambda_star: &Distribution,
        capacity: f64,
        slack: f64,
    ) -> Result<Option<usize>> {
        let budget = kl_divergence(lambda_star, &self.iterates[0])?;
        Ok(self.estimates.iter().enumerate().find_map(|(k, &est)| {
            let n = (k + 1) as f64;
            let gap = capacity - est;
            (gap < -slack || gap > budget / n + slack).then_some(k + 1)
        }))
    }
}

pub fn iterate(channel: &Channel, start: &Distribution, stop: StoppingRule) -> Result<Trace> {
    if start.len() != channel.inputs() {
        return Err(Error::LengthMismatch {
            expected: channel.inputs(),
            found: start.len(),
        });
    }
    if let Some(i) = start.probs().iter().position(|&p| p <= 0.0) {
        return Err(Error::NotInterior(i));
    }
    let mut iterates = vec![start.clone()];
    let mut estimates = Vec::new();
    loop {
        let n = iterates.len() - 1;
        if stop.max_iters.is_some_and(|cap| n >= cap) {
            break;
        }
        let prev = &iterates[n];
        let next = arimoto_map(channel, prev)?;
        estimates.push(capacity_estimate(channel, prev, &next)?);
        let step = max_abs(
            &next
                .probs()
                .iter()
                .zip(prev.probs())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        iterates.push(next);
        if stop.step_tol.is_some_and(|eps| step <= eps) {
            break;
        }
        if stop.max_iters.is_none() && stop.step_tol.is_none() {
            break;
        }
    }
    Ok(Trace {
        channel: channel.clone(),
        iterates,
        estimates,
    })
}

/// `C(N+1, N)`, the lower estimate of capacity from two consecutive iterates.
pub fn capacity_estimate(
    channel: &Channel,
    current: &Distribution,
    next: &Distribution,
) -> Result<f64> {
    let q = channel.output_masses(current.probs());
    let mut terms = Vec::new();
    for (i, (&a, &b)) in current.probs().iter().zip(next.probs()).enumerate() {
        if b <= 0.0 {
            continue;
        }
        if a <= 0.0 {
            return Err(Error::DomainError(i));
        }
        terms.push(-b * b.ln());
        for (j, &p) in channel.row(i).iter().enumerate() {
            if p > 0.0 {
                if q[j] <= 0.0 {
                    return Err(Error::ZeroOutputMass(j));
                }
                terms.push(b * p * (a * p / q[j]).ln());
            }
        }
    }
    Ok(sum(terms))
}

/// The Arimoto update written for the deviation `μ = λ − λ*` from a fixed point.
///
/// `μ ↦ F(λ* + μ) − λ*` is evaluated through `ln_1p`/`exp_m1`, so tiny
/// deviations keep their relative precision instead of being swamped by
/// `λ*`. Zero is an exact fixed point.
#[derive(Debug, Clone)]
pub struct DeviationMap {
    channel: Channel,
    lambda_star: Vec<f64>,
    q_star: Vec<f64>,
    /// `D_k(λ*) − C` for indices outside the support, zero on it.
    gaps: Vec<f64>,
}

impl DeviationMap {
    pub fn new(channel: &Channel, lambda_star: &Distribution, capacity: f64) -> Result<Self> {
        let q_star = channel.output_masses(lambda_star.probs());
        let d = channel.divergences_against(&q_star)?;
        let gaps = lambda_star
            .probs()
            .iter()
            .zip(&d)
            .map(|(&l, &dk)| if l > 0.0 { 0.0 } else { dk - capacity })
            .collect();
        Ok(Self {
            channel: channel.clone(),
            lambda_star: lambda_star.probs().to_vec(),
            q_star,
            gaps,
        })
    }

    pub fn apply(&self, mu: &[f64]) -> Result<Vec<f64>> {
        let dq = self.channel.output_masses(mu);
        let ratio: Vec<f64> = dq
            .iter()
            .zip(&self.q_star)
            .map(|(d, q)| (d / q).ln_1p())
            .collect();
        if let Some(j) = ratio.iter().position(|r| !r.is_finite()) {
            return Err(Error::ZeroOutputMass(j));
        }
        let h: Vec<f64> = self
            .channel
            .rows()
            .iter()
            .zip(&self.gaps)
            .map(|(row, g)| {
                let delta = -sum(row
                    .iter()
                    .zip(&ratio)
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(p, r)| p * r));
                (g + delta).exp_m1()
            })
            .collect();
        let num: Vec<f64> = (0..mu.len())
            .map(|i| sum([self.lambda_star[i] * h[i], mu[i] * (1.0 + h[i])]))
            .collect();
        let s = sum(num.iter().copied());
        Ok(num
            .iter()
            .zip(&self.lambda_star)
            .map(|(x, l)| sum([*x, -l * s]) / (1.0 + s))
            .collect())
    }

    /// `μ^0, μ^1, …, μ^steps` starting from `start − λ*`.
    pub fn series(&self, start: &Distribution, steps: usize) -> Result<Vec<Vec<f64>>> {
        let mut mu: Vec<f64> = start
            .probs()
            .iter()
            .zip(&self.lambda_star)
            .map(|(a, b)| a - b)
            .collect();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(mu.clone());
        for _ in 0..steps {
            mu = self.apply(&mu)?;
            out.push(mu.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn identical_rows_map_is_identity() {
        let c = Channel::unchecked(vec![vec![0.3, 0.7]; 3]);
        let l = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let f = arimoto_map(&c, &l).unwrap();
        for (a, b) in f.probs().iter().zip(l.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
        let t = iterate(&c, &l, StoppingRule::iterations(5)).unwrap();
        assert!(t.estimates.iter().all(|e| e.abs() < 1e-15));
    }

    #[test]
    fn one_step_from_uniform_matches_hand_evaluation() {
        let c = fixtures::phi1();
        let q = [
            (0.8 + 0.1 + 0.25) / 3.0,
            (0.1 + 0.8 + 0.25) / 3.0,
            (0.1 + 0.1 + 0.5) / 3.0,
        ];
        let w: Vec<f64> = c
            .rows()
            .iter()
            .map(|r| {
                let d: f64 = r.iter().zip(&q).map(|(p, qj)| p * (p / qj).ln()).sum();
                d.exp()
            })
            .collect();
        let z: f64 = w.iter().sum();
        let f = arimoto_map(&c, &Distribution::uniform(3)).unwrap();
        for (a, b) in f.probs().iter().zip(&w) {
            assert!((a - b / z).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coordinates_stay_zero() {
        let c = fixtures::phi1();
        let l = Distribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(arimoto_map(&c, &l).unwrap().probs()[2], 0.0);
    }

    #[test]
    fn iterate_rejects_boundary_start() {
        let c = fixtures::phi1();
        let l = Distribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(
            iterate(&c, &l, StoppingRule::default()).unwrap_err(),
            Error::NotInterior(2)
        );
    }

    #[test]
    fn phi1_trace_reaches_fixed_point() {
        let c = fixtures::phi1();
        let rule = StoppingRule {
            max_iters: Some(10_000),
            step_tol: Some(1e-12),
        };
        let t = iterate(&c, &Distribution::uniform(3), rule).unwrap();
        assert!(t.steps() < 10_000);
        for (a, b) in t.last().probs().iter().zip([0.431, 0.431, 0.138]) {
            assert!((a - b).abs() < 1e-3);
        }
        for w in t.estimates.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
        }
        for k in 0..t.steps() {
            let replay = arimoto_map(&c, &t.iterates[k]).unwrap();
            assert_eq!(replay, t.iterates[k + 1]);
        }
    }

    #[test]
    fn estimate_on_symmetric_channel_hits_closed_form() {
        let c = fixtures::symmetric3();
        let start = Distribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let t = iterate(&c, &start, StoppingRule::default()).unwrap();
        let h = -(0.8f64 * 0.8f64.ln() + 2.0 * 0.1 * 0.1f64.ln());
        let last = *t.estimates.last().unwrap();
        assert!((last - (3f64.ln() - h)).abs() < 1e-9);
    }

    #[test]
    fn deviation_map_agrees_with_direct_difference() {
        let c = fixtures::phi1();
        let sol = crate::solver::solve_capacity(&c, &Default::default()).unwrap();
        let dev = DeviationMap::new(&c, &sol.lambda_star, sol.capacity).unwrap();
        let mu = [0.01, -0.004, -0.006];
        let direct: Vec<f64> = {
            let w: Vec<f64> = sol
                .lambda_star
                .probs()
                .iter()
                .zip(&mu)
                .map(|(a, b)| a + b)
                .collect();
            map_extended(&c, &w)
                .unwrap()
                .iter()
                .zip(sol.lambda_star.probs())
                .map(|(a, b)| a - b)
                .collect()
        };
        let via = dev.apply(&mu).unwrap();
        for (a, b) in via.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(dev.apply(&[0.0; 3]).unwrap(), vec![0.0; 3]);
    }
}
