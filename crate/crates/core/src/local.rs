//! First and second derivatives of the Arimoto map at its fixed point, the
//! block spectrum of the Jacobian, and the convergence-rate predictor.
//!
//! Matrices follow the row-vector convention: `jacobian[a][i] = ∂F_i/∂λ_a`,
//! so a deviation evolves as `μ ↦ μ J`. Formulas use the classification of
//! the solution: unused inputs get zero mass, and tied unused inputs (type II)
//! are treated as exactly tied.

use crate::channel::{Channel, Distribution};
use crate::error::{Error, Result};
use crate::numeric::{dot, jacobi_eigen, norm2, sum, Matrix};
use crate::solver::{CapacitySolution, IndexClassification, IndexType};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const JACOBI_TOL: f64 = 1e-15;
const TIE: f64 = 1e-9;
const RIGHT_TOL: f64 = 1e-8;
const ORTHO_REL: f64 = 1e-10;

/// Derivatives of the row divergences `D_i(λ) = D(P^i ‖ λΦ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DStar {
    /// `first[a][i] = ∂D_i/∂λ_a = −Σ_j P^a_j P^i_j / Q_j`.
    pub first: Matrix,
    /// `second[i][a][b] = Σ_j P^a_j P^b_j P^i_j / Q_j²`.
    pub second: Vec<Matrix>,
    pub evaluation_point: Distribution,
}

pub fn divergence_derivatives(channel: &Channel, sol: &CapacitySolution) -> Result<DStar> {
    let q = sol.q_star.probs();
    if let Some(j) = q.iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroOutputMass(j));
    }
    let m = channel.inputs();
    let p = channel.rows();
    let first = (0..m)
        .map(|a| {
            (0..m)
                .map(|i| -sum((0..q.len()).map(|j| p[a][j] * p[i][j] / q[j])))
                .collect()
        })
        .collect();
    let second = (0..m)
        .map(|i| {
            (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            sum((0..q.len()).map(|j| p[a][j] * p[b][j] * p[i][j] / (q[j] * q[j])))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(DStar {
        first,
        second,
        evaluation_point: sol.lambda_star.clone(),
    })
}

/// Input masses and `exp(D_i − C)` as the derivative formulas see them.
struct Idealized {
    weights: Vec<f64>,
    ratio: Vec<f64>,
}

fn idealize(sol: &CapacitySolution) -> Idealized {
    let cls = &sol.classification;
    let m = sol.lambda_star.len();
    let weights = (0..m)
        .map(|i| match cls.kind(i) {
            IndexType::I => sol.lambda_star.probs()[i],
            _ => 0.0,
        })
        .collect();
    let ratio = (0..m)
        .map(|i| match cls.kind(i) {
            IndexType::III => (sol.divergences[i] - sol.capacity).exp(),
            _ => 1.0,
        })
        .collect();
    Idealized { weights, ratio }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

pub fn jacobian(channel: &Channel, sol: &CapacitySolution, dstar: &DStar) -> Matrix {
    let m = channel.inputs();
    let id = idealize(sol);
    let cls = &sol.classification;
    (0..m)
        .map(|a| {
            (0..m)
                .map(|i| match cls.kind(i) {
                    IndexType::I => {
                        delta(a, i) + id.weights[i] * (dstar.first[a][i] + 1.0 - id.ratio[a])
                    }
                    IndexType::II => delta(a, i),
                    IndexType::III => id.ratio[i] * delta(a, i),
                })
                .collect()
        })
        .collect()
}

/// `hessians[i][a][b] = ∂²F_i/∂λ_a∂λ_b` at the fixed point.
pub fn hessians(channel: &Channel, sol: &CapacitySolution, dstar: &DStar) -> Vec<Matrix> {
    let m = channel.inputs();
    let id = idealize(sol);
    let (w, e, d1, d2) = (&id.weights, &id.ratio, &dstar.first, &dstar.second);
    (0..m)
        .map(|i| {
            (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            let pooled = sum((0..m).map(|k| w[k] * d1[k][a] * d1[k][b]));
                            let curvature = sum([
                                d1[i][a] * d1[i][b],
                                d2[i][a][b],
                                d1[a][b],
                                -e[a] * d1[a][b],
                                -e[b] * d1[a][b],
                                -pooled,
                            ]);
                            e[i] * sum([
                                (1.0 - e[a] + d1[i][a]) * (delta(i, b) + w[i] * (1.0 - e[b])),
                                (1.0 - e[b] + d1[i][b]) * (delta(i, a) + w[i] * (1.0 - e[a])),
                                w[i] * curvature,
                            ])
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Eigenvalues grouped by the index type that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInfo {
    pub type_i: Vec<f64>,
    pub type_ii: Vec<f64>,
    pub type_iii: Vec<f64>,
}

impl BlockInfo {
    /// Support block in `[0, 1)`, its smallest value 0, tied unused inputs at
    /// exactly 1, strictly unused inputs in `(0, 1)`.
    pub fn ranges_hold(&self) -> bool {
        let lowest = self.type_i.iter().copied().fold(f64::INFINITY, f64::min);
        lowest.abs() <= TIE
            && self.type_i.iter().all(|t| (-TIE..1.0 - TIE).contains(t))
            && self.type_ii.iter().all(|&t| t == 1.0)
            && self.type_iii.iter().all(|&t| t > 0.0 && t < 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub theta_max: f64,
    /// Largest eigenvalue below `theta_max − 1e-9`.
    pub theta_sec: Option<f64>,
    pub multiplicity: usize,
    nu_max: Option<Vec<f64>>,
    pub nu_max_is_right: bool,
    pub blocks: BlockInfo,
}

impl Spectrum {
    /// Unit left eigenvector of `theta_max`, first significant entry negative.
    pub fn nu_max(&self) -> Result<&[f64]> {
        match &self.nu_max {
            Some(v) if self.multiplicity == 1 => Ok(v),
            _ => Err(Error::DegenerateSpectrum {
                theta: self.theta_max,
                multiplicity: self.multiplicity,
            }),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.multiplicity > 1
    }
}

/// Blockwise eigen-analysis of `J`.
///
/// The support block `I − ΓΛ` is similar to the symmetric `√Λ Γ √Λ`, which is
/// diagonalized by Jacobi rotations; unused inputs add their diagonal entries.
pub fn spectrum(j: &Matrix, classification: &IndexClassification, weights: &[f64]) -> Spectrum {
    let m = j.len();
    let sup = &classification.type_i;
    let k = sup.len();
    let root: Vec<f64> = sup.iter().map(|&i| weights[i].sqrt()).collect();
    let sym: Matrix = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let bij = delta(a, b) - j[sup[a]][sup[b]];
                    root[a] * bij / root[b]
                })
                .collect()
        })
        .collect();
    let eig = jacobi_eigen(&sym, JACOBI_TOL);
    let beta = &eig.values;
    let column = |c: usize| -> Vec<f64> { (0..k).map(|r| eig.vectors[r][c]).collect() };

    // (eigenvalue, left eigenvector)
    let mut modes: Vec<(f64, Option<Vec<f64>>)> = Vec::with_capacity(m);
    for c in 0..k {
        let w = column(c);
        let mut nu = vec![0.0; m];
        for (a, &i) in sup.iter().enumerate() {
            nu[i] = w[a] * root[a];
        }
        modes.push((1.0 - beta[c], Some(nu)));
    }
    let off: Vec<usize> = (0..m).filter(|i| !sup.contains(i)).collect();
    for &i in &off {
        let theta = j[i][i];
        let resolvent = beta.iter().all(|b| (1.0 - theta - b).abs() > 1e-12);
        let nu = resolvent.then(|| {
            // ν_I = −X (J^I − θ)⁻¹ with (J^I − θ)⁻¹ = √Λ⁻¹ W diag(1/(1−θ−β)) Wᵀ √Λ.
            let x: Vec<f64> = sup.iter().map(|&s| j[i][s]).collect();
            let xs: Vec<f64> = x.iter().zip(&root).map(|(a, r)| a / r).collect();
            let coeffs: Vec<f64> = (0..k)
                .map(|c| dot(&xs, &column(c)) / (1.0 - theta - beta[c]))
                .collect();
            let mut nu = vec![0.0; m];
            nu[i] = 1.0;
            for (a, &s) in sup.iter().enumerate() {
                let back = sum((0..k).map(|c| coeffs[c] * eig.vectors[a][c]));
                nu[s] = -back * root[a];
            }
            nu
        });
        modes.push((theta, nu));
    }

    let mut eigenvalues: Vec<f64> = modes.iter().map(|(t, _)| *t).collect();
    eigenvalues.sort_by(f64::total_cmp);
    let theta_max = *eigenvalues.last().expect("nonempty spectrum");
    let multiplicity = eigenvalues
        .iter()
        .filter(|&&t| t >= theta_max - TIE)
        .count();
    let theta_sec = eigenvalues
        .iter()
        .rev()
        .copied()
        .find(|&t| t < theta_max - TIE);

    let nu_max = if multiplicity == 1 {
        modes
            .iter()
            .find(|(t, _)| *t == theta_max)
            .and_then(|(_, v)| v.clone())
            .map(canonical)
    } else {
        None
    };
    let nu_max_is_right = nu_max.as_ref().is_some_and(|nu| {
        let residual: Vec<f64> = (0..m).map(|r| dot(&j[r], nu) - theta_max * nu[r]).collect();
        norm2(&residual) <= RIGHT_TOL
    });

    let blocks = BlockInfo {
        type_i: {
            let mut v: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
            v.sort_by(f64::total_cmp);
            v
        },
        type_ii: classification.type_ii.iter().map(|&i| j[i][i]).collect(),
        type_iii: classification.type_iii.iter().map(|&i| j[i][i]).collect(),
    };
    Spectrum {
        eigenvalues,
        theta_max,
        theta_sec,
        multiplicity,
        nu_max,
        nu_max_is_right,
        blocks,
    }
}

/// Unit length, first entry above 1e-9 in magnitude made negative.
fn canonical(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n);
    if v.iter().find(|x| x.abs() > 1e-9).is_some_and(|&x| x > 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBranch {
    Max,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatePrediction {
    /// `‖μᴺ‖` decays like `θᴺ`; `neg_log_theta` is the predicted `L(N)` limit.
    Exponential {
        theta: f64,
        neg_log_theta: f64,
        branch: RateBranch,
    },
    /// `μᴺ` decays like `1/N`; limits of `N·μᴺ` when computable.
    OneOverN { limits: Option<Vec<f64>> },
}

/// Picks the governing eigenvalue for a run started at `λ* + μ⁰`.
///
/// Any tied unused input forces `1/N` decay. Otherwise the second eigenvalue
/// governs only when `ν_max` is also a right eigenvector and the start has no
/// component along it; in every other case the largest does.
pub fn predict_rate(
    spectrum: &Spectrum,
    classification: &IndexClassification,
    mu0: &[f64],
) -> RatePrediction {
    if classification.m2() > 0 {
        return RatePrediction::OneOverN { limits: None };
    }
    let orthogonal = spectrum
        .nu_max()
        .is_ok_and(|nu| dot(mu0, nu).abs() <= ORTHO_REL * norm2(mu0));
    let (theta, branch) = match spectrum.theta_sec {
        Some(sec) if spectrum.nu_max_is_right && orthogonal => (sec, RateBranch::Second),
        _ => (spectrum.theta_max, RateBranch::Max),
    };
    RatePrediction::Exponential {
        theta,
        neg_log_theta: -theta.ln(),
        branch,
    }
}

/// Checks that `J` maps the orthogonal complement of `ν` into itself, on
/// `samples` random directions: `|(μJ)·ν| ≤ 1e-9` for unit `μ ⟂ ν`.
pub fn preserves_complement(j: &Matrix, nu: &[f64], samples: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = nu.len();
    let nn = dot(nu, nu);
    (0..samples).all(|_| {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let along = dot(&raw, nu) / nn;
        let mut mu: Vec<f64> = raw.iter().zip(nu).map(|(r, v)| r - along * v).collect();
        let n = norm2(&mu);
        mu.iter_mut().for_each(|x| *x /= n);
        let image = crate::numeric::vec_mat(&mu, j);
        dot(&image, nu).abs() <= 1e-9
    })
}

/// Everything local to the fixed point.
#[derive(Debug, Clone)]
pub struct LocalAnalysis {
    pub dstar: DStar,
    pub jacobian: Matrix,
    pub hessians: Vec<Matrix>,
    pub spectrum: Spectrum,
}

pub fn analyze(channel: &Channel, sol: &CapacitySolution) -> Result<LocalAnalysis> {
    let dstar = divergence_derivatives(channel, sol)?;
    let jacobian = jacobian(channel, sol, &dstar);
    let hessians = hessians(channel, sol, &dstar);
    let spectrum = spectrum(&jacobian, &sol.classification, sol.lambda_star.probs());
    Ok(LocalAnalysis {
        dstar,
        jacobian,
        hessians,
        spectrum,
    })
}
