//! Small dense linear algebra over [`Scalar`]: exact when every entry is exact.

use crate::scalar::{Scalar, Sign};

pub type Matrix = Vec<Vec<Scalar>>;

fn is_nonzero(x: &Scalar) -> bool {
    match x {
        Scalar::Exact(v) => !v.is_zero(),
        Scalar::Approx(v) => v.abs() > 1e-9,
    }
}

/// Outcome of the semidefiniteness test on a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    /// Positive semidefinite with a nontrivial kernel.
    Degenerate,
    Indefinite,
    Inconclusive,
}

/// Symmetric elimination with diagonal pivoting.
pub fn definiteness(m: &Matrix) -> Definiteness {
    let n = m.len();
    let mut a = m.clone();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut degenerate = false;
    while !alive.is_empty() {
        let mut pivot = None;
        for &i in &alive {
            match a[i][i].sign() {
                None => return Definiteness::Inconclusive,
                Some(Sign::Negative) => return Definiteness::Indefinite,
                Some(Sign::Positive) => {
                    pivot = Some(i);
                    break;
                }
                Some(Sign::Zero) => {}
            }
        }
        let Some(p) = pivot else {
            // All remaining diagonal entries vanish: PSD only if the block is zero.
            for &i in &alive {
                for &j in &alive {
                    match a[i][j].sign() {
                        None => return Definiteness::Inconclusive,
                        Some(Sign::Zero) => {}
                        Some(_) => return Definiteness::Indefinite,
                    }
                }
            }
            degenerate = true;
            break;
        };
        alive.retain(|&i| i != p);
        let piv = a[p][p].clone();
        let inv = piv.inv().expect("positive pivot");
        for &i in &alive {
            let f = &a[i][p] * &inv;
            if f.is_zero() {
                continue;
            }
            for &j in &alive {
                let t = &f * &a[p][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    if degenerate {
        Definiteness::Degenerate
    } else {
        Definiteness::PositiveDefinite
    }
}

/// Rank by Gaussian elimination; exact pivots on exact data.
pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let exact = a.iter().all(|row| row[c].is_exact());
        let pick = if exact {
            (r..rows).find(|&i| is_nonzero(&a[i][c]))
        } else {
            (r..rows)
                .filter(|&i| is_nonzero(&a[i][c]))
                .max_by(|&i, &j| a[i][c].to_f64().abs().total_cmp(&a[j][c].to_f64().abs()))
        };
        let Some(p) = pick else { continue };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("nonzero pivot");
        for i in (r + 1)..rows {
            let f = &a[i][c] * &inv;
            if f.is_zero() {
                continue;
            }
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
        r += 1;
    }
    r
}

/// Pivots of elimination without row exchanges; the k-th pivot equals the
/// ratio of consecutive leading principal minors. Stops at the first pivot
/// whose sign is not positive (or not decidable) and returns what it has.
pub fn leading_pivots(m: &Matrix) -> Vec<Scalar> {
    let n = m.len();
    let mut a = m.clone();
    let mut out = Vec::new();
    for k in 0..n {
        let p = a[k][k].clone();
        let positive = p.sign() == Some(Sign::Positive);
        out.push(p.clone());
        if !positive {
            break;
        }
        let inv = p.inv().expect("positive pivot");
        for i in (k + 1)..n {
            let f = &a[i][k] * &inv;
            if f.is_zero() {
                continue;
            }
            for j in (k + 1)..n {
                let t = &f * &a[k][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    out
}

/// Solves `A x = b` for square nonsingular `A`.
pub fn solve(a: &Matrix, b: &[Scalar]) -> Option<Vec<Scalar>> {
    let n = a.len();
    let mut m: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for c in 0..n {
        let exact = m.iter().all(|row| row[c].is_exact());
        let pick = if exact {
            (c..n).find(|&i| is_nonzero(&m[i][c]))
        } else {
            (c..n)
                .filter(|&i| is_nonzero(&m[i][c]))
                .max_by(|&i, &j| m[i][c].to_f64().abs().total_cmp(&m[j][c].to_f64().abs()))
        }?;
        m.swap(c, pick);
        let inv = m[c][c].inv().ok()?;
        for j in c..=n {
            m[c][j] = &m[c][j] * &inv;
        }
        for i in 0..n {
            if i == c {
                continue;
            }
            let f = m[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for j in c..=n {
                let t = &f * &m[c][j];
                m[i][j] = &m[i][j] - &t;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// A basis of the right kernel of `m` (each vector as a column list).
pub fn kernel(m: &Matrix, cols: usize) -> Vec<Vec<Scalar>> {
    let mut a = m.clone();
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let exact = a.iter().all(|row| row[c].is_exact());
        let pick = if exact {
            (r..rows).find(|&i| is_nonzero(&a[i][c]))
        } else {
            (r..rows)
                .filter(|&i| is_nonzero(&a[i][c]))
                .max_by(|&i, &j| a[i][c].to_f64().abs().total_cmp(&a[j][c].to_f64().abs()))
        };
        let Some(p) = pick else { continue };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("nonzero pivot");
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); cols];
            v[f] = Scalar::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -&a[row][f];
            }
            v
        })
        .collect()
}

pub fn dot(x: &[Scalar], y: &[Scalar]) -> Scalar {
    x.iter().zip(y).fold(Scalar::zero(), |acc, (a, b)| &acc + &(a * b))
}

pub fn to_f64(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect()
    }

    #[test]
    fn definiteness_cases() {
        assert_eq!(definiteness(&ints(&[&[2, -1], &[-1, 2]])), Definiteness::PositiveDefinite);
        let a2t = ints(&[&[2, -1, -1], &[-1, 2, -1], &[-1, -1, 2]]);
        assert_eq!(definiteness(&a2t), Definiteness::Degenerate);
        assert_eq!(definiteness(&ints(&[&[2, -3], &[-3, 2]])), Definiteness::Indefinite);
        assert_eq!(definiteness(&ints(&[&[0, 1], &[1, 0]])), Definiteness::Indefinite);
    }

    #[test]
    fn rank_and_kernel() {
        let a2t = ints(&[&[2, -1, -1], &[-1, 2, -1], &[-1, -1, 2]]);
        assert_eq!(rank(&a2t), 2);
        let k = kernel(&a2t, 3);
        assert_eq!(k.len(), 1);
        assert!(k[0].iter().all(|x| *x == k[0][0]));
        let x = solve(&ints(&[&[2, 1], &[1, 3]]), &[Scalar::int(3), Scalar::int(4)]).unwrap();
        assert_eq!(x, vec![Scalar::one(), Scalar::one()]);
    }
}
