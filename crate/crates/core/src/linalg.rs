//! Exact linear algebra over the rationals. Matrices are row-major `Vec<Vec<Rational>>`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::scalar::{lcm_of_denominators, Rational};

pub type Matrix = Vec<Vec<Rational>>;

/// Rank by fraction-free (Bareiss) elimination on integer-scaled rows.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = lcm_of_denominators(r.iter());
            r.iter().map(|q| (q * Rational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let nrows = m.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(piv) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let v = &m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c];
                m[r][c] = v / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
pub fn rref(rows: &[Vec<Rational>]) -> (Matrix, Vec<usize>) {
    let mut m: Matrix = rows.to_vec();
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r][c..ncols].to_vec();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, v) in row[c..ncols].iter_mut().zip(&pivot_row) {
                    *x -= &f * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

/// Basis of `{x : A x = 0}` for an `m × n` matrix `A`.
pub fn nullspace(a: &[Vec<Rational>], ncols: usize) -> Matrix {
    let (r, pivots) = rref(a);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Solve `A x = b` (any solution), `None` if inconsistent.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let ncols = a.first().map_or(0, Vec::len);
    let aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &p) in r.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Coefficients of `v` in the basis `basis` (rows), if `v` lies in their span.
pub fn coordinates_in(basis: &[Vec<Rational>], v: &[Rational]) -> Option<Vec<Rational>> {
    if basis.is_empty() {
        return v.iter().all(Zero::is_zero).then(Vec::new);
    }
    solve(&transpose(basis), v)
}

pub fn transpose(a: &[Vec<Rational>]) -> Matrix {
    let ncols = a.first().map_or(0, Vec::len);
    (0..ncols).map(|c| a.iter().map(|r| r[c].clone()).collect()).collect()
}

pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter().map(|r| dot(r, x)).collect()
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Matrix {
    let bt = transpose(b);
    a.iter().map(|r| bt.iter().map(|c| dot(r, c)).collect()).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

pub fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Basis of the orthogonal complement of `span(sub)` inside `span(ambient)`.
pub fn orthogonal_complement_in(sub: &[Vec<Rational>], ambient: &[Vec<Rational>]) -> Matrix {
    if ambient.is_empty() {
        return Vec::new();
    }
    // x = Σ a_k ambient_k with <x, s> = 0 for every s in sub.
    let g: Matrix = sub.iter().map(|s| ambient.iter().map(|w| dot(s, w)).collect()).collect();
    let coeffs = if g.is_empty() { identity(ambient.len()) } else { nullspace(&g, ambient.len()) };
    let n = ambient[0].len();
    coeffs
        .iter()
        .map(|a| {
            let mut x = vec![Rational::zero(); n];
            for (ak, w) in a.iter().zip(ambient) {
                if !ak.is_zero() {
                    for (xi, wi) in x.iter_mut().zip(w) {
                        *xi += ak * wi;
                    }
                }
            }
            x
        })
        .collect()
}

/// Minimum-norm solution of `A x = b` for full-row-rank `A`: `x = Aᵀ (A Aᵀ)⁻¹ b`.
pub fn min_norm_solution(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    if a.is_empty() {
        return Some(vec![Rational::zero(); ncols]);
    }
    let gram = mat_mul(a, &transpose(a));
    let y = solve(&gram, b)?;
    let at = transpose(a);
    Some(mat_vec(&at, &y))
}

pub fn max_abs(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
}

/// Inverse stereographic projection of u ∈ ℚ^{n−1} onto the sphere of radius r in ℚⁿ.
pub fn stereographic_point(u: &[Rational], r: &Rational) -> Vec<Rational> {
    let s = dot(u, u);
    let den = &s + Rational::one();
    let mut p: Vec<Rational> = u.iter().map(|x| r * Rational::from_integer(2.into()) * x / &den).collect();
    p.push(r * (&s - Rational::one()) / &den);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereographic_lands_on_sphere() {
        let r = crate::scalar::rat(3, 2);
        for u in [vec![], vec![crate::scalar::rat(1, 3)], vec![crate::scalar::int(2), crate::scalar::rat(-5, 7)]] {
            let p = stereographic_point(&u, &r);
            assert_eq!(p.len(), u.len() + 1);
            assert_eq!(dot(&p, &p), &r * &r);
        }
    }
    use crate::scalar::{int, rat};

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]])), 3);
        assert_eq!(rank(&m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])), 2);
        assert_eq!(rank(&m(&[&[0, 0], &[0, 0]])), 0);
        let fr = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(3, 2), int(1)]];
        assert_eq!(rank(&fr), 1);
    }

    #[test]
    fn rank_matches_rref() {
        let a = m(&[&[2, -1, 0, 3], &[4, -2, 1, 0], &[6, -3, 1, 3], &[0, 0, 5, 1]]);
        assert_eq!(rank(&a), rref(&a).0.len());
    }

    #[test]
    fn nullspace_annihilates() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(is_zero_vec(&mat_vec(&a, v)));
        }
    }

    #[test]
    fn solve_and_inconsistency() {
        let a = m(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve(&a, &[int(3), int(1)]), Some(vec![int(2), int(1)]));
        let s = m(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve(&s, &[int(1), int(3)]), None);
    }

    #[test]
    fn complement_is_orthogonal() {
        let amb = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let sub = m(&[&[1, 1, 0]]);
        let c = orthogonal_complement_in(&sub, &amb);
        assert_eq!(c.len(), 2);
        for v in &c {
            assert!(dot(v, &sub[0]).is_zero());
        }
    }

    #[test]
    fn min_norm() {
        let a = m(&[&[1, 1]]);
        assert_eq!(min_norm_solution(&a, &[int(2)], 2), Some(vec![int(1), int(1)]));
    }
}
