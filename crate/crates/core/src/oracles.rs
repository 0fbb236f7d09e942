//! Independent reference computations used to check the analytic code:
//! finite differences of the update map, exhaustive grid search for capacity,
//! and closed-form eigenvalues of 2×2 and 3×3 matrices.

use crate::arimoto::map_extended;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numeric::Matrix;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSettings {
    step: f64,
}

impl FdSettings {
    pub fn new(step: f64) -> Result<Self> {
        if (1e-8..=1e-3).contains(&step) {
            Ok(Self { step })
        } else {
            Err(Error::BadStep(step))
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl Default for FdSettings {
    fn default() -> Self {
        Self { step: 1e-5 }
    }
}

fn shifted(point: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = point.to_vec();
    for &(i, d) in moves {
        p[i] += d;
    }
    p
}

/// Central differences of `F` with each coordinate perturbed freely (no
/// renormalization): entry `(a, i)` approximates `∂F_i/∂λ_a`.
pub fn fd_jacobian(channel: &Channel, point: &[f64], s: FdSettings) -> Result<Matrix> {
    let h = s.step;
    (0..point.len())
        .map(|a| {
            let up = map_extended(channel, &shifted(point, &[(a, h)]))?;
            let down = map_extended(channel, &shifted(point, &[(a, -h)]))?;
            Ok(up
                .iter()
                .zip(&down)
                .map(|(u, d)| (u - d) / (2.0 * h))
                .collect())
        })
        .collect()
}

/// Second differences of every component of `F`; `result[i][a][b]`
/// approximates `∂²F_i/∂λ_a∂λ_b`.
pub fn fd_hessian(channel: &Channel, point: &[f64], s: FdSettings) -> Result<Vec<Matrix>> {
    let h = s.step;
    let m = point.len();
    let centre = map_extended(channel, point)?;
    let mut out = vec![vec![vec![0.0; m]; m]; m];
    for a in 0..m {
        for b in a..m {
            let entry: Vec<f64> = if a == b {
                let up = map_extended(channel, &shifted(point, &[(a, h)]))?;
                let down = map_extended(channel, &shifted(point, &[(a, -h)]))?;
                (0..m)
                    .map(|i| (up[i] - 2.0 * centre[i] + down[i]) / (h * h))
                    .collect()
            } else {
                let pp = map_extended(channel, &shifted(point, &[(a, h), (b, h)]))?;
                let pm = map_extended(channel, &shifted(point, &[(a, h), (b, -h)]))?;
                let mp = map_extended(channel, &shifted(point, &[(a, -h), (b, h)]))?;
                let mm = map_extended(channel, &shifted(point, &[(a, -h), (b, -h)]))?;
                (0..m)
                    .map(|i| (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h))
                    .collect()
            };
            for i in 0..m {
                out[i][a][b] = entry[i];
                out[i][b][a] = entry[i];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCapacity {
    pub lambda_best: Vec<f64>,
    /// Mutual information at the best grid point: a lower bound on capacity.
    pub c_lower: f64,
    /// `max_i D(P^i ‖ λΦ) − I(λ, Φ)` at the best point. Capacity never
    /// exceeds `c_lower + gap_bound`, by concavity of mutual information.
    pub gap_bound: f64,
}

fn info_and_top(channel: &Channel, lambda: &[f64]) -> (f64, f64) {
    let n = channel.outputs();
    let mut q = vec![0.0; n];
    for (l, row) in lambda.iter().zip(channel.rows()) {
        for (qj, p) in q.iter_mut().zip(row) {
            *qj += l * p;
        }
    }
    let mut info = 0.0;
    let mut top = f64::NEG_INFINITY;
    for (l, row) in lambda.iter().zip(channel.rows()) {
        let d: f64 = row
            .iter()
            .zip(&q)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, qj)| p * (p / qj).ln())
            .sum();
        info += l * d;
        top = top.max(d);
    }
    (info, top)
}

/// Exhaustive scan of the simplex grid with spacing `1/resolution` (m ≤ 3).
///
/// Ties go to the lexicographically first integer grid point.
pub fn grid_capacity(channel: &Channel, resolution: usize) -> Result<GridCapacity> {
    let m = channel.inputs();
    if m > 3 || resolution > 2000 || resolution == 0 {
        return Err(Error::TooLarge { m, resolution });
    }
    let r = resolution as f64;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |counts: &[usize]| {
        let lambda: Vec<f64> = counts.iter().map(|&c| c as f64 / r).collect();
        let (info, _) = info_and_top(channel, &lambda);
        if best.as_ref().is_none_or(|(b, _)| info > *b) {
            best = Some((info, lambda));
        }
    };
    if m == 2 {
        for i in 0..=resolution {
            consider(&[i, resolution - i]);
        }
    } else {
        for i in 0..=resolution {
            for j in 0..=resolution - i {
                consider(&[i, j, resolution - i - j]);
            }
        }
    }
    let (c_lower, lambda_best) = best.expect("grid is nonempty");
    let (_, top) = info_and_top(channel, &lambda_best);
    Ok(GridCapacity {
        lambda_best,
        c_lower,
        gap_bound: (top - c_lower).max(0.0),
    })
}

/// Real eigenvalues of a 2×2 or 3×3 matrix from its characteristic
/// polynomial, ascending.
pub fn charpoly_eigen(a: &Matrix) -> Result<Vec<f64>> {
    match a.len() {
        2 => {
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let disc = tr * tr - 4.0 * det;
            if disc < -1e-10 {
                return Err(Error::ComplexSpectrum(disc));
            }
            let root = disc.max(0.0).sqrt();
            Ok(vec![(tr - root) / 2.0, (tr + root) / 2.0])
        }
        3 => {
            let tr = a[0][0] + a[1][1] + a[2][2];
            let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2]
                - a[0][2] * a[2][0]
                + a[1][1] * a[2][2]
                - a[1][2] * a[2][1];
            let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
            // x³ + c2 x² + c1 x + c0, shifted to t³ + p t + q.
            let (c2, c1, c0) = (-tr, minors, -det);
            let shift = -c2 / 3.0;
            let p = c1 - c2 * c2 / 3.0;
            let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
            let disc = -(4.0 * p * p * p + 27.0 * q * q);
            if disc < -1e-10 {
                return Err(Error::ComplexSpectrum(disc));
            }
            let mut roots = if p.abs() < 1e-300 {
                vec![shift + (-q).cbrt(); 3]
            } else {
                let amp = 2.0 * (-p / 3.0).max(0.0).sqrt();
                let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).max(0.0).sqrt()).clamp(-1.0, 1.0);
                let phi = arg.acos() / 3.0;
                (0..3)
                    .map(|k| {
                        shift + amp * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()
                    })
                    .collect()
            };
            roots.sort_by(f64::total_cmp);
            Ok(roots)
        }
        k => Err(Error::WrongShape(format!("{k}x{k} matrix, need 2 or 3"))),
    }
}

/// A channel with rows drawn uniformly from the simplex, redrawn until it
/// validates (full rank).
pub fn random_channel<R: Rng>(rng: &mut R, m: usize, n: usize) -> Channel {
    loop {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|x| x / s).collect()
            })
            .collect();
        if let Ok(c) = Channel::new(rows) {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::local::analyze;
    use crate::numeric::max_abs_diff;
    use crate::solver::{solve_capacity, SolverOptions};

    #[test]
    fn step_range_is_enforced() {
        assert!(FdSettings::new(1e-9).is_err());
        assert!(FdSettings::new(1e-2).is_err());
        assert_eq!(FdSettings::new(1e-4).unwrap().step(), 1e-4);
    }

    #[test]
    fn fd_jacobian_agrees_and_converges_quadratically() {
        let c = fixtures::phi1();
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let j = analyze(&c, &sol).unwrap().jacobian;
        let at = sol.lambda_star.probs();
        let e1 = max_abs_diff(&j, &fd_jacobian(&c, at, FdSettings::default()).unwrap());
        assert!(e1 <= 1e-6);
        let coarse = max_abs_diff(
            &j,
            &fd_jacobian(&c, at, FdSettings::new(1e-3).unwrap()).unwrap(),
        );
        let fine = max_abs_diff(
            &j,
            &fd_jacobian(&c, at, FdSettings::new(5e-4).unwrap()).unwrap(),
        );
        let ratio = coarse / fine;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn fd_hessian_on_completed_phi2() {
        let c = fixtures::phi2_exact();
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let h = analyze(&c, &sol).unwrap().hessians;
        let fd = fd_hessian(&c, sol.lambda_star.probs(), FdSettings::new(1e-4).unwrap()).unwrap();
        for i in 0..3 {
            assert!(max_abs_diff(&h[i], &fd[i]) <= 1e-5);
            for a in 0..3 {
                for b in 0..3 {
                    assert!((fd[i][a][b] - fd[i][b][a]).abs() < 1e-6);
                }
            }
        }
        assert!((fd[2][0][2] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn grid_search_examples() {
        let g = grid_capacity(&fixtures::symmetric3(), 600).unwrap();
        let h = -(0.8f64 * 0.8f64.ln() + 2.0 * 0.1 * 0.1f64.ln());
        assert!((g.c_lower - (3f64.ln() - h)).abs() < 1e-5);
        let g = grid_capacity(&fixtures::phi1(), 1000).unwrap();
        for (a, b) in g.lambda_best.iter().zip([0.431, 0.431, 0.138]) {
            assert!((a - b).abs() < 2e-3);
        }
        assert!(grid_capacity(&fixtures::phi1(), 2001).is_err());
    }

    #[test]
    fn grid_on_identical_rows_is_zero() {
        let c = Channel::unchecked(vec![vec![0.4, 0.6], vec![0.4, 0.6]]);
        let g = grid_capacity(&c, 50).unwrap();
        assert!(g.c_lower.abs() < 1e-15);
    }

    #[test]
    fn closed_form_eigenvalues() {
        let d = vec![
            vec![0.1, 0.0, 0.0],
            vec![0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.9],
        ];
        let ev = charpoly_eigen(&d).unwrap();
        for (a, b) in ev.iter().zip([0.1, 0.5, 0.9]) {
            assert!((a - b).abs() < 1e-12);
        }
        let rot = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        assert!(matches!(
            charpoly_eigen(&rot),
            Err(Error::ComplexSpectrum(_))
        ));

        let c = fixtures::phi1();
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let la = analyze(&c, &sol).unwrap();
        let ev = charpoly_eigen(&la.jacobian).unwrap();
        for (a, b) in ev.iter().zip(&la.spectrum.eigenvalues) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
