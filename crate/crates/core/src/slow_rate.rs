//! Constants of the `1/N` regime for three inputs: two used inputs and one
//! unused input tied with them.
//!
//! Indices are relabelled internally so that the used inputs come first and
//! the tied input last; results are returned in the caller's labelling.

use crate::error::{Error, Result};
use crate::local::DStar;
use crate::numeric::{sum, Matrix};
use crate::solver::IndexClassification;

#[derive(Debug, Clone, PartialEq)]
pub struct SlowRateConstants {
    /// Decay factor of the fast mode, `−D*_{1,2}`.
    pub eta1: f64,
    /// Right eigenvector of the fast mode, normalized so that `a₁ − a₂ = 1`.
    pub a: [f64; 2],
    pub tau1: f64,
    pub tau2: f64,
    pub b1: f64,
    pub b2: f64,
    /// Curvature of the scalar recurrence `μ₃ ↦ μ₃ − ρ μ₃²`.
    pub rho: f64,
    /// Limits of `N·μᴺ` in the caller's labelling.
    pub limits: [f64; 3],
    /// `order[k]` is the caller's index playing role `k` (last is the tied input).
    pub order: [usize; 3],
}

fn relabel(classification: &IndexClassification, m: usize) -> Result<[usize; 3]> {
    if m != 3 {
        return Err(Error::WrongShape(format!("{m} inputs, need 3")));
    }
    match (
        classification.type_i.as_slice(),
        classification.type_ii.as_slice(),
        classification.m3(),
    ) {
        (&[i1, i2], &[i3], 0) => Ok([i1, i2, i3]),
        _ => Err(Error::WrongCase),
    }
}

struct Relabelled {
    d: [[f64; 3]; 3],
    l1: f64,
    l2: f64,
    order: [usize; 3],
}

fn prepare(dstar: &DStar, classification: &IndexClassification) -> Result<Relabelled> {
    let order = relabel(classification, dstar.first.len())?;
    let mut d = [[0.0; 3]; 3];
    for (r, &a) in order.iter().enumerate() {
        for (c, &b) in order.iter().enumerate() {
            d[r][c] = dstar.first[a][b];
        }
    }
    let l = dstar.evaluation_point.probs();
    Ok(Relabelled {
        d,
        l1: l[order[0]],
        l2: l[order[1]],
        order,
    })
}

/// The 2×2 matrix driving `(μ₁, μ₂)` once `μ₃` is eliminated, in the relabelled
/// coordinates. Its eigenvalues are `−D*_{1,2}` and 1.
pub fn reduced_jacobian(dstar: &DStar, classification: &IndexClassification) -> Result<Matrix> {
    let Relabelled { d, l1, l2, .. } = prepare(dstar, classification)?;
    Ok(vec![
        vec![
            1.0 + l1 * d[0][0] - l1 * d[0][2],
            l2 * d[0][1] - l2 * d[1][2],
        ],
        vec![
            l1 * d[0][1] - l1 * d[0][2],
            1.0 + l2 * d[1][1] - l2 * d[1][2],
        ],
    ])
}

pub fn slow_constants(
    dstar: &DStar,
    classification: &IndexClassification,
) -> Result<SlowRateConstants> {
    let Relabelled { d, l1, l2, order } = prepare(dstar, classification)?;
    let eta1 = -d[0][1];
    let tau1 = l1 * (d[0][1] - d[0][2]);
    let tau2 = l2 * (d[0][1] - d[1][2]);
    let total = tau1 + tau2;
    let b1 = tau1 / total;
    let b2 = tau2 / total;
    let rho = sum([d[0][2] * b1, d[1][2] * b2, -d[2][2]]);
    if rho <= 1e-12 {
        return Err(Error::NonpositiveRho(rho));
    }
    let mut limits = [0.0; 3];
    limits[order[0]] = -b1 / rho;
    limits[order[1]] = -b2 / rho;
    limits[order[2]] = 1.0 / rho;
    Ok(SlowRateConstants {
        eta1,
        a: [b2, -b1],
        tau1,
        tau2,
        b1,
        b2,
        rho,
        limits,
        order,
    })
}

impl SlowRateConstants {
    /// `(μ₁, μ₂)` implied by `μ₃` and the fast-mode amplitude `k`, in the
    /// relabelled coordinates.
    pub fn project_mu12(&self, mu3: f64, k: f64, n: u32) -> [f64; 2] {
        let fast = k * self.eta1.powi(n as i32);
        [-self.b1 * mu3 + fast, -self.b2 * mu3 - fast]
    }

    /// Least-squares amplitude of the fast mode over `series[from..=to]`,
    /// where `series[N]` is `μᴺ` in the caller's labelling.
    pub fn fit_amplitude(&self, series: &[Vec<f64>], from: usize, to: usize) -> f64 {
        let [i1, i2, _] = self.order;
        let [a1, a2] = self.a;
        let mut num = Vec::new();
        let mut den = Vec::new();
        for (n, mu) in series.iter().enumerate().take(to + 1).skip(from) {
            let basis = self.eta1.powi(n as i32);
            num.push((a1 * mu[i1] + a2 * mu[i2]) * basis);
            den.push(basis * basis);
        }
        sum(num) / sum(den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Distribution;
    use crate::fixtures;
    use crate::local::divergence_derivatives;
    use crate::oracles::charpoly_eigen;
    use crate::solver::{solve_capacity, CapacitySolution, SolverOptions};

    fn phi2_boundary() -> (DStar, IndexClassification) {
        let c = fixtures::phi2();
        let p = Distribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        let sol = CapacitySolution::at_point(&c, p, 5e-3, 5e-3).unwrap();
        (
            divergence_derivatives(&c, &sol).unwrap(),
            sol.classification,
        )
    }

    #[test]
    fn boundary_constants_match_hand_values() {
        let (ds, cls) = phi2_boundary();
        let k = slow_constants(&ds, &cls).unwrap();
        assert!((k.b1 - 0.5).abs() < 1e-15 && (k.b2 - 0.5).abs() < 1e-15);
        assert!((k.rho - 1.0).abs() < 1e-12);
        for (a, b) in k.limits.iter().zip([-0.5, -0.5, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((k.b1 + k.b2 - 1.0).abs() < 1e-12);
        assert!(k.a[0] - k.a[1] - 1.0 < 1e-12);
    }

    #[test]
    fn reduced_jacobian_eigenvalues() {
        let (ds, cls) = phi2_boundary();
        let jh = reduced_jacobian(&ds, &cls).unwrap();
        let ev = charpoly_eigen(&jh).unwrap();
        assert!((ev[0] - 0.456).abs() < 1e-3);
        assert!((ev[1] - 1.0).abs() < 1e-12);
        let eta = -ds.first[0][1];
        // det(Ĵ − ηI) = (η + D12)(η − 1) at two test points
        for x in [0.3, -0.7] {
            let det = (jh[0][0] - x) * (jh[1][1] - x) - jh[0][1] * jh[1][0];
            assert!((det - (x - eta) * (x - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn swapping_the_used_inputs_keeps_the_spectrum() {
        let c = fixtures::phi5_exact().permuted(&[1, 0, 2]).unwrap();
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let ds = divergence_derivatives(&c, &sol).unwrap();
        let jh = reduced_jacobian(&ds, &sol.classification).unwrap();
        let ev = charpoly_eigen(&jh).unwrap();
        assert!((ev[0] + ds.first[0][1]).abs() < 1e-10);
        assert!((ev[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wrong_shapes_and_cases_are_rejected() {
        let c = fixtures::phi1();
        let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let ds = divergence_derivatives(&c, &sol).unwrap();
        assert_eq!(
            slow_constants(&ds, &sol.classification),
            Err(Error::WrongCase)
        );
    }

    #[test]
    fn projection_without_fast_mode() {
        let (ds, cls) = phi2_boundary();
        let k = slow_constants(&ds, &cls).unwrap();
        assert_eq!(k.project_mu12(2e-3, 0.0, 10), [-k.b1 * 2e-3, -k.b2 * 2e-3]);
        let p = k.project_mu12(2e-3, 0.3, 400);
        assert!((p[0] + k.b1 * 2e-3).abs() <= 0.3 * k.eta1.powi(400) + 1e-18);
    }
}
