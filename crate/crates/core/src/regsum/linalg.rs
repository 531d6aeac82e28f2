//! Small exact linear algebra over Q and Z.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::exact::{big, int, lcm_denominators, Rational};

pub type QVec = Vec<Rational>;
pub type ZVec = Vec<i64>;

pub fn dot_q(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_z(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_zq(a: &[i64], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| int(*x) * y).sum()
}

pub fn to_q(v: &[i64]) -> QVec {
    v.iter().map(|x| int(*x)).collect()
}

/// Row echelon form; returns pivot columns.
fn echelon(m: &mut [QVec], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..m[i].len() {
                    let t = &f * &m[row][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &[QVec], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    echelon(&mut m, ncols).len()
}

/// Basis of {v : rows . v = 0}.
pub fn nullspace(rows: &[QVec], ncols: usize) -> Vec<QVec> {
    let mut m = rows.to_vec();
    let pivots = echelon(&mut m, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -m[i][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Unique solution of a square system, if nonsingular.
pub fn solve(rows: &[QVec], rhs: &[Rational]) -> Option<QVec> {
    let n = rows.len();
    let mut m: Vec<QVec> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect())
        .collect();
    let pivots = echelon(&mut m, n);
    if pivots.len() < n {
        return None;
    }
    Some(m.iter().map(|r| r[n].clone()).collect())
}

/// Some solution of a possibly non-square system with `ncols` unknowns;
/// free variables are set to zero.
pub fn solve_general(rows: &[QVec], rhs: &[Rational], ncols: usize) -> Option<QVec> {
    let mut m: Vec<QVec> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect())
        .collect();
    let pivots = echelon(&mut m, ncols);
    if m[pivots.len()..].iter().any(|r| !r[ncols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = m[i][ncols].clone();
    }
    Some(x)
}

/// Inverse of a square matrix, if nonsingular.
pub fn inverse(rows: &[QVec]) -> Option<Vec<QVec>> {
    let n = rows.len();
    let mut m: Vec<QVec> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    if echelon(&mut m, n).len() < n {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn transpose<T: Clone>(m: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

fn to_i64(x: &BigInt) -> i64 {
    x.to_i64().expect("integer coordinate out of range")
}

/// Positive integer multiple of `v` with coprime entries.
pub fn primitive(v: &[Rational]) -> ZVec {
    let l = lcm_denominators(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * big(&l)).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return vec![0; v.len()];
    }
    ints.iter().map(|x| to_i64(&(x / &g))).collect()
}

/// Scales `f . x >= c` (or `=`) to coprime integer coefficients.
pub fn integral_constraint(f: &[Rational], c: &Rational) -> (ZVec, Rational) {
    let l = lcm_denominators(f);
    let ints: Vec<BigInt> = f.iter().map(|x| (x * big(&l)).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return (vec![0; f.len()], c.clone());
    }
    let scale = big(&l) / big(&g);
    (ints.iter().map(|x| to_i64(&(x / &g))).collect(), c * scale)
}

pub fn floor_q(q: &Rational) -> i64 {
    to_i64(&q.floor().to_integer())
}

pub fn ceil_q(q: &Rational) -> i64 {
    to_i64(&q.ceil().to_integer())
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Unimodular U (columns) with g U = (gcd(g), 0, ..., 0).
pub fn unimodular_completion(g: &[i64]) -> Vec<ZVec> {
    let n = g.len();
    // column operations on an identity matrix, tracked alongside the row g
    let mut row = g.to_vec();
    let mut cols: Vec<ZVec> = (0..n)
        .map(|j| (0..n).map(|i| i64::from(i == j)).collect())
        .collect();
    for j in 1..n {
        if row[j] == 0 {
            continue;
        }
        let (d, x, y) = ext_gcd(row[0], row[j]);
        let (a, b) = (row[0] / d, row[j] / d);
        let c0: ZVec = (0..n).map(|i| x * cols[0][i] + y * cols[j][i]).collect();
        let cj: ZVec = (0..n).map(|i| -b * cols[0][i] + a * cols[j][i]).collect();
        cols[0] = c0;
        cols[j] = cj;
        row[0] = d;
        row[j] = 0;
    }
    if row[0] < 0 {
        cols[0] = cols[0].iter().map(|x| -x).collect();
    }
    cols
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn completion_is_unimodular(g in proptest::collection::vec(-9i64..10, 1..5)) {
            let u = unimodular_completion(&g);
            let rows = transpose(&u, g.len());
            let det = det_z(&rows);
            prop_assert_eq!(det.abs(), 1);
            let h = g.iter().fold(0i64, |acc, x| acc.gcd(x));
            for (j, c) in u.iter().enumerate() {
                let v = dot_z(&g, c);
                prop_assert_eq!(v, if j == 0 { h } else { 0 });
            }
        }
    }

    fn det_z(m: &[ZVec]) -> i64 {
        let q: Vec<QVec> = m.iter().map(|r| to_q(r)).collect();
        let n = q.len();
        let mut m = q;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return 0 };
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            det *= m[c][c].clone();
            for i in c + 1..n {
                let f = &m[i][c] / &m[c][c];
                for j in c..n {
                    let t = &f * &m[c][j];
                    m[i][j] -= t;
                }
            }
        }
        to_i64(&det.to_integer())
    }

    #[test]
    fn nullspace_of_plane() {
        let rows = vec![to_q(&[1, 1, 1])];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(dot_q(&rows[0], &v).is_zero());
        }
    }
}
