//! Small dense linear algebra and order-independent summation.
//!
//! Every reduction in the crate goes through [`sum`], which sorts its terms
//! before a compensated accumulation. The result depends only on the multiset
//! of terms, so permuting channel rows permutes results bit for bit. Fixed
//! points of symmetric channels therefore stay exactly symmetric.

use std::cmp::Ordering;

fn by_magnitude(a: &f64, b: &f64) -> Ordering {
    a.abs().total_cmp(&b.abs()).then(a.total_cmp(b))
}

/// Compensated (Neumaier) sum of the terms in ascending magnitude.
pub fn sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut v: Vec<f64> = terms.into_iter().collect();
    v.sort_by(by_magnitude);
    let mut s = 0.0;
    let mut c = 0.0;
    for x in v {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    sum(a.iter().zip(b).map(|(x, y)| x * y))
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub type Matrix = Vec<Vec<f64>>;

pub fn identity(k: usize) -> Matrix {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

/// Row vector times matrix.
pub fn vec_mat(x: &[f64], a: &Matrix) -> Vec<f64> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| sum(x.iter().zip(a).map(|(xi, row)| xi * row[j])))
        .collect()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps continue until the largest off-diagonal magnitude is at most `tol`.
/// Returns eigenvalues and the matching eigenvectors as columns of `vectors`
/// (`vectors[row][k]` belongs to `values[k]`), unsorted.
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

pub fn jacobi_eigen(a: &Matrix, tol: f64) -> SymEigen {
    let k = a.len();
    let mut s: Matrix = (0..k)
        .map(|i| (0..k).map(|j| 0.5 * (a[i][j] + a[j][i])).collect())
        .collect();
    let mut v = identity(k);
    for _sweep in 0..100 {
        let off = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(0.0f64, |m, (i, j)| m.max(s[i][j].abs()));
        if off <= tol {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                if s[p][q] == 0.0 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for r in 0..k {
                    let srp = s[r][p];
                    let srq = s[r][q];
                    s[r][p] = c * srp - sn * srq;
                    s[r][q] = sn * srp + c * srq;
                }
                for r in 0..k {
                    let spr = s[p][r];
                    let sqr = s[q][r];
                    s[p][r] = c * spr - sn * sqr;
                    s[q][r] = sn * spr + c * sqr;
                }
                for r in 0..k {
                    let vrp = v[r][p];
                    let vrq = v[r][q];
                    v[r][p] = c * vrp - sn * vrq;
                    v[r][q] = sn * vrp + c * vrq;
                }
            }
        }
    }
    SymEigen {
        values: (0..k).map(|i| s[i][i]).collect(),
        vectors: v,
    }
}

/// Conjugate gradients for a symmetric positive definite system, followed
/// by refinement passes while the true residual keeps shrinking.
///
/// All control decisions use permutation-invariant quantities, so the solve
/// commutes with simultaneous row/column permutation of the system.
pub fn cg_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let mut x = cg_pass(a, b);
    let mut res = residual(a, &x, b);
    let mut res_norm = norm2(&res);
    for _ in 0..4 {
        if res_norm == 0.0 {
            break;
        }
        let dx = cg_pass(a, &res);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(u, v)| u + v).collect();
        let trial_res = residual(a, &trial, b);
        let trial_norm = norm2(&trial_res);
        if trial_norm >= res_norm {
            break;
        }
        x = trial;
        res = trial_res;
        res_norm = trial_norm;
    }
    x
}

fn residual(a: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    mat_vec(a, x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| bi - ax)
        .collect()
}

/// At most `dim` plain CG iterations, stopping early once the recursive
/// residual stops shrinking.
fn cg_pass(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut x = vec![0.0; k];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..k {
        if rr == 0.0 {
            break;
        }
        let ap = mat_vec(a, &p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..k {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..k {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_order_independent() {
        let a = [1e16, 1.0, -1e16, 3.5, 1e-3, -2.25];
        let mut b = a;
        b.reverse();
        assert_eq!(sum(a).to_bits(), sum(b).to_bits());
        assert!((sum(a) - 2.251).abs() < 1e-15);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ];
        let e = jacobi_eigen(&a, 1e-14);
        let mut vals = e.values.clone();
        vals.sort_by(f64::total_cmp);
        let r2 = 2f64.sqrt();
        for (got, want) in vals.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((got - want).abs() < 1e-12);
        }
        for k in 0..3 {
            let col: Vec<f64> = (0..3).map(|r| e.vectors[r][k]).collect();
            let av = mat_vec(&a, &col);
            for r in 0..3 {
                assert!((av[r] - e.values[k] * col[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ];
        let x = [0.3, -1.2, 2.0];
        let b = mat_vec(&a, &x);
        let y = cg_solve(&a, &b);
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
        // tiny right-hand side: no drift once converged
        let b = [
            9.575673587391975e-13,
            2.8468338797438264e-12,
            1.3898326933770022e-12,
        ];
        let y = cg_solve(&a, &b);
        let back = mat_vec(&a, &y);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-26);
        }
    }
}
