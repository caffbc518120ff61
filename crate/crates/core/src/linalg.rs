//! Dense Gauss-Jordan elimination over [`Scalar`].

use crate::scalar::Scalar;

pub type Matrix = Vec<Vec<Scalar>>;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Scalar::zero();
                    for k in 0..inner {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            acc += &(&a[i][k] * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut aug: Matrix = a.iter().zip(identity(n)).map(|(row, id)| row.iter().cloned().chain(id).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let inv = aug[col][col].inv().ok()?;
        for v in aug[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in 0..2 * n {
                    let delta = &factor * &aug[col][c];
                    aug[r][c] -= &delta;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Outcome of solving `A x = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    /// A particular solution with every free variable set to zero.
    Found(Vec<Scalar>),
    /// Row `row` of the original system cannot be satisfied.
    Inconsistent { row: usize },
}

/// Solves a possibly rectangular system. Free variables are set to zero, so a
/// homogeneous system always yields the zero solution.
pub fn solve(a: &Matrix, b: &[Scalar], unknowns: usize) -> Solution {
    let rows = a.len();
    // Each row remembers which original equation it came from for witnesses.
    let mut m: Vec<(usize, Vec<Scalar>)> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, rhs))| (i, row.iter().cloned().chain(std::iter::once(rhs.clone())).collect()))
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows).find(|&i| !m[i].1[col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r].1[col].inv().expect("nonzero pivot");
        for v in m[r].1.iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i].1[col].is_zero() {
                let factor = m[i].1[col].clone();
                for c in 0..=unknowns {
                    let delta = &factor * &m[r].1[c];
                    m[i].1[c] -= &delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if let Some((orig, _)) = m[r..].iter().find(|(_, row)| !row[unknowns].is_zero()) {
        return Solution::Inconsistent { row: *orig };
    }
    let mut x = vec![Scalar::zero(); unknowns];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = m[i].1[unknowns].clone();
    }
    Solution::Found(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    #[test]
    fn inverse_of_standard_form() {
        let omega = vec![vec![s(0), s(1)], vec![s(-1), s(0)]];
        let inv = inverse(&omega).unwrap();
        assert_eq!(mat_mul(&omega, &inv), identity(2));
        assert!(inverse(&vec![vec![s(1), s(2)], vec![s(2), s(4)]]).is_none());
    }

    #[test]
    fn solve_underdetermined_and_inconsistent() {
        let a = vec![vec![s(1), s(1)], vec![s(2), s(2)]];
        assert_eq!(solve(&a, &[s(2), s(4)], 2), Solution::Found(vec![s(2), s(0)]));
        assert_eq!(solve(&a, &[s(2), s(5)], 2), Solution::Inconsistent { row: 1 });
        let zero = vec![vec![s(0), s(0)]];
        assert_eq!(solve(&zero, &[s(1)], 2), Solution::Inconsistent { row: 0 });
        assert_eq!(solve(&zero, &[s(0)], 2), Solution::Found(vec![s(0), s(0)]));
    }
}
