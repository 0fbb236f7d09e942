//! Reference channels used throughout the tests, the CLI and the reproduction table.
//!
//! `phi1` … `phi5` are 3×3 channels given to three decimals. Two of them,
//! `phi2` and `phi5`, are meant to have a last row whose divergence equals
//! capacity exactly while carrying no input mass. At three decimals that
//! balance is lost, so [`complete_type_ii`] restores it and `phi2_exact` /
//! `phi5_exact` are the restored versions.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numeric::sum;
use crate::solver::{solve_capacity, SolverOptions};

fn build(rows: [[f64; 3]; 3]) -> Channel {
    Channel::new(rows.iter().map(|r| r.to_vec()).collect()).expect("fixture is a valid channel")
}

/// Exponential convergence, all inputs used.
pub fn phi1() -> Channel {
    build([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.25, 0.25, 0.5]])
}

/// Last input on the verge of the support (slow convergence).
pub fn phi2() -> Channel {
    build([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]])
}

/// Last input strictly unused.
pub fn phi3() -> Channel {
    build([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.35, 0.35, 0.3]])
}

/// Symmetric pair whose largest-eigenvalue mode is antisymmetric.
pub fn phi4() -> Channel {
    build([
        [0.793, 0.196, 0.011],
        [0.196, 0.793, 0.011],
        [0.25, 0.25, 0.5],
    ])
}

/// Asymmetric slow-convergence channel.
pub fn phi5() -> Channel {
    build([
        [0.72, 0.215, 0.065],
        [0.013, 0.431, 0.556],
        [0.25, 0.7, 0.05],
    ])
}

/// Rows `(0.8, 0.1, 0.1)` shifted cyclically.
pub fn symmetric3() -> Channel {
    build([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
}

/// `phi1` … `phi5` in order.
pub fn all() -> Vec<Channel> {
    vec![phi1(), phi2(), phi3(), phi4(), phi5()]
}

pub fn phi2_exact() -> Channel {
    complete_type_ii(&phi2(), 2).expect("phi2 completes")
}

pub fn phi5_exact() -> Channel {
    complete_type_ii(&phi5(), 2).expect("phi5 completes")
}

/// Moves row `r` the shortest way (in log-ratio coordinates) onto the set
/// where its divergence from the optimal output of the other rows equals
/// their capacity.
///
/// The result has an optimum with zero mass on `r` and `D_r = C` up to
/// rounding: an unused input that is still tied with the used ones.
pub fn complete_type_ii(channel: &Channel, r: usize) -> Result<Channel> {
    let m = channel.inputs();
    if r >= m || m < 3 {
        return Err(Error::WrongShape(format!("row {r} of a {m}-row channel")));
    }
    let rest = Channel::new(
        (0..m)
            .filter(|&i| i != r)
            .map(|i| channel.row(i).to_vec())
            .collect(),
    )?;
    let sub = solve_capacity(&rest, &SolverOptions::default())?;
    let q = sub.q_star.probs().to_vec();
    let row = channel.row(r).to_vec();
    if row.iter().any(|&p| p <= 0.0) {
        return Err(Error::WrongShape(format!("row {r} has a zero entry")));
    }
    let logs: Vec<f64> = row.iter().zip(&q).map(|(p, qj)| (p / qj).ln()).collect();
    let mean = sum(logs.iter().copied()) / logs.len() as f64;
    let dir: Vec<f64> = logs.iter().map(|l| l - mean).collect();

    let moved = |t: f64| -> Vec<f64> { row.iter().zip(&dir).map(|(p, g)| p - t * g).collect() };
    let excess = |t: f64| -> f64 {
        let p = moved(t);
        sum(p.iter().zip(&q).map(|(pj, qj)| pj * (pj / qj).ln())) - sub.capacity
    };

    let f0 = excess(0.0);
    if f0 == 0.0 {
        return Ok(channel.clone());
    }
    // Along +dir the divergence falls, so move with the sign of the excess.
    let sign = f0.signum();
    let reach = row
        .iter()
        .zip(&dir)
        .filter(|(_, g)| sign * **g > 0.0)
        .map(|(p, g)| p / (sign * g))
        .fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (0.0, 0.999 * reach.min(1e3));
    if excess(sign * hi).signum() == sign {
        return Err(Error::NoConvergence(format!(
            "row {r} cannot reach the capacity level"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(sign * mid).signum() == sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if excess(sign * lo).abs() <= excess(sign * hi).abs() {
        lo
    } else {
        hi
    };
    let mut rows: Vec<Vec<f64>> = channel.rows().to_vec();
    rows[r] = moved(sign * t);
    Channel::new(rows)
}
