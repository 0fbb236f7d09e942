//! Probability vectors, channel matrices and the divergence quantities built on them.
//!
//! Everything is in nats. Functions taking plain slices work on the extended
//! domain: inputs need not lie on the simplex as long as the induced output
//! masses stay positive.

use crate::error::{Error, Result};
use crate::numeric::sum;

const SUM_TOL: f64 = 1e-12;
const ROW_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

/// A probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Checks non-negativity and unit mass (within 1e-12).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
        }
        let total = sum(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self(probs))
    }

    /// Divides by the total mass first.
    pub fn normalized(probs: Vec<f64>) -> Result<Self> {
        let total = sum(probs.iter().copied());
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Self::new(probs.into_iter().map(|p| p / total).collect())
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    /// Wraps a vector already known to be a distribution up to rounding.
    pub(crate) fn from_trusted(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }
}

/// A validated row-stochastic matrix of full row rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        validate_channel(rows)
    }

    /// Skips validation; only for degenerate test channels such as identical rows.
    #[cfg(test)]
    pub(crate) fn unchecked(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// The same channel with rows reordered so that new row `k` is old row `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(perm.iter().map(|&k| self.rows[k].clone()).collect())
    }

    /// `Q = λΦ` for any weight vector.
    pub fn output_masses(&self, weights: &[f64]) -> Vec<f64> {
        (0..self.outputs())
            .map(|j| sum(weights.iter().zip(&self.rows).map(|(w, row)| w * row[j])))
            .collect()
    }

    /// `D(P^i ‖ λΦ)` for every row, with `λ` on the extended domain.
    pub fn divergences_at(&self, weights: &[f64]) -> Result<Vec<f64>> {
        let q = self.output_masses(weights);
        self.divergences_against(&q)
    }

    /// `D(P^i ‖ q)` for every row against a fixed output vector.
    pub fn divergences_against(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut terms = Vec::with_capacity(row.len());
                for (j, (&p, &qj)) in row.iter().zip(q).enumerate() {
                    if p > 0.0 {
                        if qj <= 0.0 {
                            return Err(Error::ZeroOutputMass(j));
                        }
                        terms.push(p * (p / qj).ln());
                    }
                }
                Ok(sum(terms))
            })
            .collect()
    }
}

/// Checks shape, entries, row sums, column usefulness and rank.
pub fn validate_channel(rows: Vec<Vec<f64>>) -> Result<Channel> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m < 2 || n < 2 {
        return Err(Error::TooSmall { rows: m, cols: n });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::RaggedRow {
                row: i,
                found: row.len(),
                expected: n,
            });
        }
        for (j, &p) in row.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if p < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: p,
                });
            }
        }
        let s = sum(row.iter().copied());
        if (s - 1.0).abs() > ROW_TOL {
            return Err(Error::RowNotNormalized { row: i, sum: s });
        }
    }
    if let Some(j) = (0..n).find(|&j| rows.iter().all(|r| r[j] == 0.0)) {
        return Err(Error::UselessOutputColumn(j));
    }
    let rank = numerical_rank(&rows);
    if rank < m {
        return Err(Error::RankDeficient { rank, rows: m });
    }
    Ok(Channel { rows })
}

/// Gaussian elimination with complete pivoting; pivots are compared against
/// the row's largest entry.
fn numerical_rank(rows: &[Vec<f64>]) -> usize {
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let scale = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            r.iter().map(|x| x / scale).collect()
        })
        .collect();
    let (m, n) = (a.len(), a[0].len());
    let mut rank = 0;
    for _ in 0..m.min(n) {
        let mut best = (0.0, 0, 0);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, &x) in row.iter().enumerate() {
                if x.abs() > best.0 {
                    best = (x.abs(), i, j);
                }
            }
        }
        if best.0 <= RANK_TOL {
            break;
        }
        a.swap(rank, best.1);
        let pivot_row = a[rank].clone();
        let p = pivot_row[best.2];
        for row in a.iter_mut().skip(rank + 1) {
            let f = row[best.2] / p;
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
        }
        rank += 1;
    }
    rank
}

/// `D(q ‖ q')` in nats; `+∞` when `q'` misses mass that `q` has.
pub fn kl_divergence(q: &Distribution, q2: &Distribution) -> Result<f64> {
    if q.len() != q2.len() {
        return Err(Error::LengthMismatch {
            expected: q.len(),
            found: q2.len(),
        });
    }
    let mut terms = Vec::with_capacity(q.len());
    for (&a, &b) in q.probs().iter().zip(q2.probs()) {
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            terms.push(a * (a / b).ln());
        }
    }
    Ok(sum(terms).max(0.0))
}

fn check_input(lambda: &Distribution, channel: &Channel) -> Result<()> {
    if lambda.len() != channel.inputs() {
        return Err(Error::LengthMismatch {
            expected: channel.inputs(),
            found: lambda.len(),
        });
    }
    Ok(())
}

pub fn output_distribution(lambda: &Distribution, channel: &Channel) -> Result<Distribution> {
    check_input(lambda, channel)?;
    Ok(Distribution::from_trusted(
        channel.output_masses(lambda.probs()),
    ))
}

/// `I(λ, Φ) = Σ λ_i D(P^i ‖ λΦ)`.
pub fn mutual_information(lambda: &Distribution, channel: &Channel) -> Result<f64> {
    let d = row_divergences(lambda, channel)?;
    Ok(sum(lambda
        .probs()
        .iter()
        .zip(&d)
        .filter(|(l, _)| **l > 0.0)
        .map(|(l, di)| l * di))
    .max(0.0))
}

pub fn row_divergences(lambda: &Distribution, channel: &Channel) -> Result<Vec<f64>> {
    check_input(lambda, channel)?;
    channel.divergences_at(lambda.probs())
}

pub fn entropy(lambda: &Distribution) -> f64 {
    sum(lambda
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln()))
    .max(0.0)
}
