//! Capacity-achieving input distribution and the type I/II/III index split.
//!
//! Arimoto iteration is only sublinear on the channels that matter here, so it
//! is used as a burn-in. The optimality equalities on the tentative support
//! are then solved by damped Newton steps, and the support is repaired until
//! the full optimality conditions hold.

use crate::arimoto::map_extended;
use crate::channel::{mutual_information, Channel, Distribution};
use crate::error::{Error, Result};
use crate::numeric::{cg_solve, max_abs, sum, Matrix};

/// Newton iterates at or below this mass leave the support.
const DROP_FLOOR: f64 = 1e-12;
/// Allowed excess of an off-support divergence over capacity.
const KKT_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 100;
const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub burn_in: usize,
    pub tol_support: f64,
    pub tol_equal: f64,
    /// Start of the burn-in; uniform when absent.
    pub start: Option<Distribution>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            burn_in: 2000,
            tol_support: 1e-6,
            tol_equal: 1e-6,
            start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexType {
    /// In the support.
    I,
    /// Outside the support, divergence equal to capacity.
    II,
    /// Outside the support, divergence below capacity.
    III,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexClassification {
    pub type_i: Vec<usize>,
    pub type_ii: Vec<usize>,
    pub type_iii: Vec<usize>,
    pub tol_support: f64,
    pub tol_equal: f64,
}

impl IndexClassification {
    pub fn m1(&self) -> usize {
        self.type_i.len()
    }

    pub fn m2(&self) -> usize {
        self.type_ii.len()
    }

    pub fn m3(&self) -> usize {
        self.type_iii.len()
    }

    pub fn kind(&self, i: usize) -> IndexType {
        if self.type_i.contains(&i) {
            IndexType::I
        } else if self.type_ii.contains(&i) {
            IndexType::II
        } else {
            IndexType::III
        }
    }
}

/// Partitions indices by support membership and closeness of `D_i` to `C`.
pub fn classify_indices(
    lambda: &[f64],
    divergences: &[f64],
    capacity: f64,
    tol_support: f64,
    tol_equal: f64,
) -> Result<IndexClassification> {
    let mut out = IndexClassification {
        type_i: Vec::new(),
        type_ii: Vec::new(),
        type_iii: Vec::new(),
        tol_support,
        tol_equal,
    };
    for (i, (&l, &d)) in lambda.iter().zip(divergences).enumerate() {
        if l > tol_support {
            out.type_i.push(i);
        } else if (d - capacity).abs() <= tol_equal {
            out.type_ii.push(i);
        } else if d < capacity {
            out.type_iii.push(i);
        } else {
            return Err(Error::KktViolation {
                index: i,
                excess: d - capacity,
            });
        }
    }
    if out.m1() < 2 {
        return Err(Error::EmptyTypeI(out.m1()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySolution {
    pub channel: Channel,
    pub lambda_star: Distribution,
    /// Nats.
    pub capacity: f64,
    pub q_star: Distribution,
    /// `D(P^i ‖ Q*)` for every row.
    pub divergences: Vec<f64>,
    pub kkt_residual: f64,
    pub classification: IndexClassification,
}

impl CapacitySolution {
    /// Builds the solution record at a prescribed input distribution, for
    /// example a rounded or idealized optimum. Capacity is taken as `I(λ, Φ)`.
    pub fn at_point(
        channel: &Channel,
        lambda: Distribution,
        tol_support: f64,
        tol_equal: f64,
    ) -> Result<Self> {
        let capacity = mutual_information(&lambda, channel)?;
        let q = channel.output_masses(lambda.probs());
        let divergences = channel.divergences_against(&q)?;
        let kkt_residual = kkt_residual(channel, &lambda)?;
        let classification = classify_indices(
            lambda.probs(),
            &divergences,
            capacity,
            tol_support,
            tol_equal,
        )?;
        Ok(Self {
            channel: channel.clone(),
            lambda_star: lambda,
            capacity,
            q_star: Distribution::from_trusted(q),
            divergences,
            kkt_residual,
            classification,
        })
    }

    pub fn reclassified(&self, tol_support: f64, tol_equal: f64) -> Result<Self> {
        let mut out = self.clone();
        out.classification = classify_indices(
            self.lambda_star.probs(),
            &self.divergences,
            self.capacity,
            tol_support,
            tol_equal,
        )?;
        Ok(out)
    }
}

/// Worst violation of the optimality conditions at `λ`.
///
/// With `C̃` the largest support divergence: the spread `|D_i − C̃|` on the
/// support and the excess `(D_i − C̃)₊` off it.
pub fn kkt_residual(channel: &Channel, lambda: &Distribution) -> Result<f64> {
    let d = channel.divergences_at(lambda.probs())?;
    let on: Vec<f64> = (0..d.len())
        .filter(|&i| lambda.probs()[i] > 0.0)
        .map(|i| d[i])
        .collect();
    let top = on.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = on.iter().fold(0.0f64, |m, x| m.max((x - top).abs()));
    let excess = (0..d.len())
        .filter(|&i| lambda.probs()[i] <= 0.0)
        .fold(0.0f64, |m, i| m.max(d[i] - top));
    Ok(spread.max(excess))
}

pub fn solve_capacity(channel: &Channel, opts: &SolverOptions) -> Result<CapacitySolution> {
    let m = channel.inputs();
    let mut lambda = match &opts.start {
        Some(s) if s.len() == m => s.probs().to_vec(),
        Some(s) => {
            return Err(Error::LengthMismatch {
                expected: m,
                found: s.len(),
            })
        }
        None => vec![1.0 / m as f64; m],
    };
    for _ in 0..opts.burn_in {
        lambda = map_extended(channel, &lambda)?;
    }

    let mut support: Vec<usize> = (0..m).filter(|&i| lambda[i] > opts.tol_support).collect();
    if support.len() < 2 {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]));
        support = order[..2].to_vec();
        support.sort_unstable();
    }
    restrict(&mut lambda, &support);

    let mut seen: Vec<Vec<usize>> = Vec::new();
    loop {
        if let Some(prev) = seen.last() {
            if seen.contains(&support) {
                return Err(Error::AmbiguousSupport {
                    first: prev.clone(),
                    second: support,
                });
            }
        }
        if seen.len() > 4 * m + 8 {
            return Err(Error::NoConvergence(
                "support repair budget exhausted".into(),
            ));
        }
        seen.push(support.clone());

        let c = newton(channel, &support, &mut lambda)?;
        let dropped: Vec<usize> = support
            .iter()
            .copied()
            .filter(|&i| lambda[i] <= DROP_FLOOR)
            .collect();
        if !dropped.is_empty() {
            support.retain(|i| !dropped.contains(i));
            if support.len() < 2 {
                return Err(Error::EmptyTypeI(support.len()));
            }
            restrict(&mut lambda, &support);
            continue;
        }
        let d = channel.divergences_at(&lambda)?;
        let worst = (0..m)
            .filter(|i| !support.contains(i))
            .map(|i| (i, d[i] - c))
            .filter(|&(_, excess)| excess > KKT_TOL)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((i, _)) => {
                support.push(i);
                support.sort_unstable();
            }
            None => break,
        }
    }

    let total = sum(lambda.iter().copied());
    let lambda = Distribution::new(lambda.into_iter().map(|l| l / total).collect())?;
    let sol = CapacitySolution::at_point(channel, lambda, opts.tol_support, opts.tol_equal)?;
    if sol.kkt_residual > 1e-9 {
        return Err(Error::NoConvergence(format!(
            "optimality residual {:e}",
            sol.kkt_residual
        )));
    }
    Ok(sol)
}

/// Zeroes coordinates outside `support` and rescales the rest to unit mass.
fn restrict(lambda: &mut [f64], support: &[usize]) {
    for (i, l) in lambda.iter_mut().enumerate() {
        if !support.contains(&i) {
            *l = 0.0;
        }
    }
    let total = sum(support.iter().map(|&i| lambda[i].max(0.0)));
    for &i in support {
        lambda[i] = if total > 0.0 {
            lambda[i].max(0.0) / total
        } else {
            1.0 / support.len() as f64
        };
    }
}

/// Solves `D_i(λ) = C` for `i ∈ support` with `Σ λ = 1`, in place.
///
/// Works on the extended domain, so support coordinates may go negative when
/// the true optimum excludes them. Returns the common value `C`.
fn newton(channel: &Channel, support: &[usize], lambda: &mut Vec<f64>) -> Result<f64> {
    let eval = |l: &[f64], c: f64| -> Option<(Vec<f64>, f64, f64)> {
        let d = channel.divergences_at(l).ok()?;
        let r: Vec<f64> = support.iter().map(|&i| d[i] - c).collect();
        let s = 1.0 - sum(support.iter().map(|&i| l[i]));
        let res = max_abs(&r).max(s.abs());
        res.is_finite().then_some((r, s, res))
    };
    let d0 = channel.divergences_at(lambda)?;
    let mut c = sum(support.iter().map(|&i| lambda[i] * d0[i]));
    let (mut r, mut s, mut res) = eval(lambda, c)
        .ok_or_else(|| Error::NoConvergence("Newton start outside domain".into()))?;

    for _ in 0..MAX_NEWTON {
        if res == 0.0 {
            break;
        }
        let q = channel.output_masses(lambda);
        let gram: Matrix = support
            .iter()
            .map(|&a| {
                support
                    .iter()
                    .map(|&b| {
                        sum((0..q.len()).map(|j| channel.row(a)[j] * channel.row(b)[j] / q[j]))
                    })
                    .collect()
            })
            .collect();
        let u = cg_solve(&gram, &r);
        let v = cg_solve(&gram, &vec![1.0; support.len()]);
        let dc = (sum(u.iter().copied()) - s) / sum(v.iter().copied());
        let dl: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - dc * b).collect();

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = lambda.clone();
            for (k, &i) in support.iter().enumerate() {
                trial[i] += t * dl[k];
            }
            let trial_c = c + t * dc;
            if let Some(e) = eval(&trial, trial_c) {
                if e.2 < res {
                    accepted = Some((trial, trial_c, e));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, trial_c, e)) => {
                let moved = t * max_abs(&dl);
                *lambda = trial;
                c = trial_c;
                (r, s, res) = e;
                if moved <= 1e-17 {
                    break;
                }
            }
            None if res < 1e-12 => break,
            None => {
                return Err(Error::NoConvergence(format!(
                    "Newton stalled at residual {res:e}"
                )))
            }
        }
    }
    if res > 1e-11 {
        return Err(Error::NoConvergence(format!(
            "Newton budget exhausted at residual {res:e}"
        )));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arimoto::arimoto_map;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn phi1_optimum() {
        let sol = solve_capacity(&fixtures::phi1(), &SolverOptions::default()).unwrap();
        assert!(close(sol.lambda_star.probs(), &[0.431, 0.431, 0.138], 1e-3));
        assert_eq!(sol.classification.type_i, vec![0, 1, 2]);
        assert!(sol.kkt_residual <= 1e-9);
        let p = sol.lambda_star.probs();
        assert_eq!(p[0].to_bits(), p[1].to_bits());
    }

    #[test]
    fn phi3_optimum_is_on_the_boundary() {
        let sol = solve_capacity(&fixtures::phi3(), &SolverOptions::default()).unwrap();
        assert!(close(sol.lambda_star.probs(), &[0.5, 0.5, 0.0], 1e-12));
        assert!(close(sol.q_star.probs(), &[0.45, 0.45, 0.1], 1e-12));
        assert!((sol.capacity - sol.divergences[0]).abs() < 1e-12);
        assert_eq!(sol.classification.type_i, vec![0, 1]);
        assert_eq!(sol.classification.type_iii, vec![2]);
    }

    #[test]
    fn phi2_classification_depends_on_tolerance() {
        let sol = solve_capacity(&fixtures::phi2(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.classification.m1(), 3);
        assert!((sol.lambda_star.probs()[2] - 1.3575539e-3).abs() < 1e-9);
        let loose = sol.reclassified(5e-3, 5e-3).unwrap();
        assert_eq!(loose.classification.type_i, vec![0, 1]);
        assert_eq!(loose.classification.type_ii, vec![2]);
    }

    #[test]
    fn completed_fixtures_are_exactly_type_ii() {
        for c in [fixtures::phi2_exact(), fixtures::phi5_exact()] {
            let sol = solve_capacity(&c, &SolverOptions::default()).unwrap();
            assert_eq!(sol.lambda_star.probs()[2], 0.0);
            assert_eq!(sol.classification.type_ii, vec![2]);
            assert!((sol.divergences[2] - sol.capacity).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetric_channel_has_uniform_optimum() {
        let sol = solve_capacity(&fixtures::symmetric3(), &SolverOptions::default()).unwrap();
        assert!(close(sol.lambda_star.probs(), &[1.0 / 3.0; 3], 1e-15));
        assert!(sol.kkt_residual < 1e-12);
    }

    #[test]
    fn kkt_residual_examples() {
        let half = Distribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        let r = kkt_residual(&fixtures::phi2(), &half).unwrap();
        assert!((r - (0.311239 - 0.309884)).abs() < 2e-6);
        let r = kkt_residual(&fixtures::symmetric3(), &Distribution::uniform(3)).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn optimum_is_a_fixed_point_and_unique() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in fixtures::all() {
            let base = solve_capacity(&c, &SolverOptions::default()).unwrap();
            let f = arimoto_map(&c, &base.lambda_star).unwrap();
            assert!(close(f.probs(), base.lambda_star.probs(), 1e-9));
            for _ in 0..10 {
                let start: Vec<f64> = (0..c.inputs()).map(|_| rng.gen_range(0.05..1.0)).collect();
                let opts = SolverOptions {
                    start: Some(Distribution::normalized(start).unwrap()),
                    ..Default::default()
                };
                let sol = solve_capacity(&c, &opts).unwrap();
                assert!(close(
                    sol.lambda_star.probs(),
                    base.lambda_star.probs(),
                    1e-8
                ));
            }
        }
    }

    #[test]
    fn classification_follows_row_permutation() {
        let c = fixtures::phi3();
        let perm = [2, 0, 1];
        let a = solve_capacity(&c, &SolverOptions::default()).unwrap();
        let b = solve_capacity(&c.permuted(&perm).unwrap(), &SolverOptions::default()).unwrap();
        let kinds_a: Vec<IndexType> = perm.iter().map(|&k| a.classification.kind(k)).collect();
        let kinds_b: Vec<IndexType> = (0..3).map(|k| b.classification.kind(k)).collect();
        assert_eq!(kinds_a, kinds_b);
        for (k, &old) in perm.iter().enumerate() {
            assert_eq!(
                b.lambda_star.probs()[k].to_bits(),
                a.lambda_star.probs()[old].to_bits()
            );
        }
    }
}
