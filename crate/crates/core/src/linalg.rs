//! Exact rational dense linear algebra: elimination solves, rank, and
//! signatures of symmetric matrices by congruence diagonalization.

// in-place elimination reads and writes across rows; index loops stay
#![allow(clippy::needless_range_loop)]

use crate::rational::{sign, Rat};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Solve `A x = b` for square `A` by exact Gaussian elimination with partial
/// (first nonzero) pivoting.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Result<Vec<Rat>, LinalgError> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(LinalgError::Shape(format!("{}x? vs {}", n, b.len())));
    }
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(LinalgError::Singular)?;
        m.swap(col, pivot_row);
        let pivot = m[col][col].clone();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pivot;
            for c in col..=n {
                let delta = &f * &m[col][c];
                m[r][c] = &m[r][c] - &delta;
            }
        }
    }
    Ok(m.iter()
        .enumerate()
        .map(|(i, row)| &row[n] / &row[i])
        .collect())
}

/// Rank of an arbitrary rectangular matrix.
pub fn rank(a: &[Vec<Rat>]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let rows = a.len();
    let cols = a[0].len();
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &pivot;
            for j in c..cols {
                let delta = &f * &m[r][j];
                m[i][j] = &m[i][j] - &delta;
            }
        }
        r += 1;
    }
    r
}

/// Signature `(positive, negative, zero)` of a symmetric matrix, computed by
/// exact Lagrange congruence diagonalization (Sylvester's law of inertia).
///
/// The caller must pass a symmetric matrix.
pub fn signature(sym: &[Vec<Rat>]) -> (usize, usize, usize) {
    let n = sym.len();
    let mut m: Vec<Vec<Rat>> = sym.to_vec();
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    let mut k = 0;
    while k < n {
        // bring a nonzero entry onto the diagonal at (k, k)
        if m[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !m[i][i].is_zero()) {
                swap_sym(&mut m, k, i);
            } else {
                // all active diagonal entries vanish; look for an off-diagonal
                let mut found = None;
                'outer: for i in k..n {
                    for j in i + 1..n {
                        if !m[i][j].is_zero() {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                match found {
                    None => {
                        zero += n - k;
                        break;
                    }
                    Some((i, j)) => {
                        // congruence: row/col i += row/col j makes m[i][i] = 2 m[i][j]
                        for c in 0..n {
                            let v = m[j][c].clone();
                            m[i][c] = &m[i][c] + &v;
                        }
                        for r in 0..n {
                            let v = m[r][j].clone();
                            m[r][i] = &m[r][i] + &v;
                        }
                        if i != k {
                            swap_sym(&mut m, k, i);
                        }
                    }
                }
            }
        }
        let pivot = m[k][k].clone();
        match sign(&pivot) {
            1 => pos += 1,
            -1 => neg += 1,
            _ => unreachable!("pivot selected nonzero"),
        }
        for r in k + 1..n {
            if m[r][k].is_zero() {
                continue;
            }
            let f = &m[r][k] / &pivot;
            for c in k..n {
                let delta = &f * &m[k][c];
                m[r][c] = &m[r][c] - &delta;
            }
            for c in k..n {
                let delta = &f * &m[c][k].clone();
                m[c][r] = &m[c][r] - &delta;
            }
        }
        k += 1;
    }
    (pos, neg, zero)
}

fn swap_sym(m: &mut [Vec<Rat>], i: usize, j: usize) {
    m.swap(i, j);
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

/// Negative definiteness via the signature.
pub fn is_negative_definite(sym: &[Vec<Rat>]) -> bool {
    let n = sym.len();
    signature(sym) == (0, n, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| rat_int(x)).collect())
            .collect()
    }

    #[test]
    fn solve_small_system() {
        let a = mat(&[&[2, 1], &[1, 3]]);
        let b = vec![rat_int(5), rat_int(10)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, vec![rat_int(1), rat_int(3)]);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = mat(&[&[1, 2], &[2, 4]]);
        let b = vec![rat_int(1), rat_int(2)];
        assert_eq!(solve(&a, &b), Err(LinalgError::Singular));
    }

    #[test]
    fn signature_examples() {
        assert_eq!(signature(&mat(&[&[1, 0], &[0, -1]])), (1, 1, 0));
        assert_eq!(signature(&mat(&[&[1, 0], &[0, 1]])), (2, 0, 0));
        // zero diagonal, hyperbolic plane
        assert_eq!(signature(&mat(&[&[0, 1], &[1, 0]])), (1, 1, 0));
        assert_eq!(signature(&mat(&[&[-1, 1], &[1, 0]])), (1, 1, 0));
        assert_eq!(signature(&mat(&[&[0, 0], &[0, 0]])), (0, 0, 2));
        assert_eq!(
            signature(&mat(&[&[1, 0, 0], &[0, -1, 0], &[0, 0, -1]])),
            (1, 2, 0)
        );
    }

    #[test]
    fn negative_definite_detection() {
        assert!(is_negative_definite(&mat(&[&[-1, 0], &[0, -2]])));
        assert!(is_negative_definite(&mat(&[&[-2, 1], &[1, -2]])));
        assert!(!is_negative_definite(&mat(&[&[-1, 0], &[0, 0]])));
        assert!(!is_negative_definite(&mat(&[&[1]])));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&mat(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&mat(&[&[1, 0], &[1, -1]])), 2);
        assert_eq!(rank(&mat(&[&[0, 0]])), 0);
    }
}
