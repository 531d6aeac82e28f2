//! The boundary-weighted indicator c_Δ and its combinatorial identities.

use num_traits::{Signed, Zero};

use super::geometry::{Polytope, PolytopeFunction, Rel};
use super::linalg::{dot_q, QVec};
use crate::error::{Error, Result};
use crate::exact::{bernoulli_number, factorial_q, int, rat, sign_pow, Rational};

/// c_I(x) for the functionals `fs`: 1/(m+1) on the region where all are
/// nonnegative, m the number vanishing at x, and 0 off it.
pub fn c_independent(fs: &[QVec], x: &[Rational]) -> Rational {
    let mut zeros = 0;
    for f in fs {
        let v = dot_q(f, x);
        if v.is_negative() {
            return Rational::zero();
        }
        if v.is_zero() {
            zeros += 1;
        }
    }
    rat(1, zeros + 1)
}

/// Tail functionals x_i + ... + x_{r-1}, i = 1..r-1.
fn tails(r: usize) -> Vec<QVec> {
    (1..r).map(|i| (0..r).map(|j| int(i64::from(j >= i))).collect()).collect()
}

pub fn c_delta(x: &[Rational]) -> Result<Rational> {
    if !x.iter().sum::<Rational>().is_zero() {
        return Err(Error::Domain("c_delta needs a point with coordinate sum 0".into()));
    }
    Ok(c_independent(&tails(x.len()), x))
}

/// d - (d/r)(1, ..., 1) for a d-vector summing to d.
pub fn centre(ds: &[i64]) -> QVec {
    let r = ds.len() as i64;
    let d: i64 = ds.iter().sum();
    ds.iter().map(|x| int(*x) - rat(d, r)).collect()
}

/// c_Δ evaluated at the centred image of a d-vector.
pub fn c_delta_of_degrees(ds: &[i64]) -> Rational {
    c_independent(&tails(ds.len()), &centre(ds))
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// c_Δ = sum_I (-1)^{|I|}/(|I|+1) χ_{Δ_I}, where Δ_I turns the tails in I
/// into equalities; a polytope function on Q^r including x_0+...+x_{r-1} = 0.
pub fn c_delta_indicator_decomposition(r: usize) -> PolytopeFunction {
    c_delta_decomposition_shifted(r, &vec![Rational::zero(); r])
}

/// The decomposition pulled back along x -> x - shift, without the sum
/// constraint.
fn c_delta_decomposition_shifted(r: usize, shift: &[Rational]) -> PolytopeFunction {
    let ts = tails(r);
    let mut out = PolytopeFunction::new(r);
    for eqs in subsets(r.saturating_sub(1)) {
        let m = eqs.len() as i64;
        let mut p = Polytope::new(r);
        for (i, t) in ts.iter().enumerate() {
            let rel = if eqs.contains(&i) { Rel::Eq } else { Rel::Ge };
            p = p.with(t.clone(), rel, dot_q(t, shift));
        }
        out.push(rat(sign_pow(m), m + 1), p);
    }
    out
}

/// c_Δ on d-vectors of total degree d, as a polytope function on Q^r.
pub fn c_delta_on_degrees(r: usize, d: i64) -> PolytopeFunction {
    let shift: QVec = (0..r).map(|_| rat(d, r as i64)).collect();
    c_delta_decomposition_shifted(r, &shift)
}

/// Permutations α of {0..r-1}, as value lists, with
/// α(0) > ... > α(i) = 0 < ... < α(r-1).
pub fn valley_permutations(r: usize) -> Vec<Vec<usize>> {
    subsets(r.saturating_sub(1))
        .map(|before| {
            let before: Vec<usize> = before.iter().map(|x| x + 1).collect();
            let mut alpha: Vec<usize> = before.iter().rev().copied().collect();
            alpha.push(0);
            alpha.extend((1..r).filter(|v| !before.contains(v)));
            alpha
        })
        .collect()
}

/// The inclusion-exclusion modification c_α of (α^{-1})^* c_Δ.
pub fn c_alpha(alpha: &[usize], x: &[Rational]) -> Rational {
    let r = alpha.len();
    let mut inv = vec![0; r];
    for (p, v) in alpha.iter().enumerate() {
        inv[*v] = p;
    }
    let functional = |k: usize| -> QVec {
        (0..r).map(|pos| int(i64::from(alpha[pos] >= k))).collect()
    };
    let j_alpha: Vec<usize> = (1..r).filter(|&k| inv[k] < inv[0]).collect();
    let fixed: Vec<QVec> = (1..r).filter(|k| !j_alpha.contains(k)).map(functional).collect();
    let mut total = Rational::zero();
    for s in subsets(j_alpha.len()) {
        let mut fs = fixed.clone();
        fs.extend(s.iter().map(|&i| functional(j_alpha[i])));
        let sign = sign_pow((j_alpha.len() - s.len()) as i64);
        total += int(sign) * c_independent(&fs, x);
    }
    total
}

/// (-1)^i sum_{α in P_r, α^{-1}(0) = i} c_α(x) = c_Δ(x) at every point.
pub fn permutation_identity_check(r: usize, i: usize, points: &[QVec]) -> Result<bool> {
    if i >= r {
        return Err(Error::Domain(format!("position {i} out of range for rank {r}")));
    }
    let alphas: Vec<Vec<usize>> = valley_permutations(r)
        .into_iter()
        .filter(|a| a[i] == 0)
        .collect();
    for x in points {
        let lhs: Rational = alphas.iter().map(|a| c_alpha(a, x)).sum();
        if lhs * int(sign_pow(i as i64)) != c_delta(x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lengths of maximal runs of equal values.
fn run_lengths(slopes: &[Rational]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (k, s) in slopes.iter().enumerate() {
        if k > 0 && *s == slopes[k - 1] {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

fn inverse_run_factorials(slopes: &[Rational]) -> Rational {
    run_lengths(slopes)
        .iter()
        .map(|l| factorial_q(*l as u64).recip())
        .product()
}

fn non_increasing(s: &[Rational]) -> bool {
    s.windows(2).all(|w| w[0] >= w[1])
}

fn non_decreasing(s: &[Rational]) -> bool {
    s.windows(2).all(|w| w[0] <= w[1])
}

/// Splits 1 = k_0 < ... < k_m = r of a d-vector into blocks with
/// non-increasing slopes at least d/r, weighted by Bernoulli numbers,
/// reassemble c_Δ.
pub fn jigsaw_check(ds: &[i64]) -> bool {
    jigsaw_sum(ds) == c_delta_of_degrees(ds)
}

pub fn jigsaw_sum(ds: &[i64]) -> Rational {
    let r = ds.len();
    let d: i64 = ds.iter().sum();
    let mu = rat(d, r as i64);
    let mut total = Rational::zero();
    // interior cut points chosen among 2..r-1
    for cuts in subsets(r.saturating_sub(2)) {
        let mut ks = vec![1];
        ks.extend(cuts.iter().map(|c| c + 2));
        ks.push(r);
        if r == 1 {
            ks = vec![1];
        }
        let blocks: Vec<&[i64]> = ks.windows(2).map(|w| &ds[w[0]..w[1]]).collect();
        let slopes: Vec<Rational> = blocks
            .iter()
            .map(|b| rat(b.iter().sum(), b.len() as i64))
            .collect();
        if !non_increasing(&slopes) || slopes.last().is_some_and(|s| *s < mu) {
            continue;
        }
        let e = slopes.iter().filter(|s| **s == mu).count();
        let weight = int(sign_pow(e as i64)) * bernoulli_number(e) * inverse_run_factorials(&slopes);
        let inner: Rational = blocks.iter().map(|b| c_delta_of_degrees(b)).product();
        total += weight * inner;
    }
    total
}

/// The two Bernoulli identities behind wall-crossing for pairs, checked
/// on classes (r_0, d_0), ..., (r_m, d_m). The first is checked when no
/// partial slope (d_0+...+d_k)/(r_0+...+r_k), k < m, equals a slope
/// d_i/r_i; the second when the last slope equals the total slope. These
/// are the configurations in which the identities are applied.
pub fn wallcross_coefficient_identities(rs: &[i64], ds: &[i64]) -> Result<bool> {
    if rs.len() != ds.len() || rs.len() < 2 {
        return Err(Error::Domain("need m > 0 and matching rank and degree vectors".into()));
    }
    if rs.iter().any(|r| *r <= 0) {
        return Err(Error::Domain("ranks must be positive".into()));
    }
    let m = rs.len() - 1;
    let slope = |i: usize| rat(ds[i], rs[i]);
    let slopes: Vec<Rational> = (0..=m).map(slope).collect();
    let prefix = |k: usize| rat(ds[..=k].iter().sum(), rs[..=k].iter().sum());
    let total_slope = prefix(m);

    let mut first = Rational::zero();
    let mut second = Rational::zero();
    for mp in 0..=m {
        let mu = prefix(mp);
        let head = &slopes[1..=mp];
        let tail = &slopes[mp + 1..];
        if !non_increasing(head) || head.last().is_some_and(|s| *s < mu) {
            continue;
        }
        let sign = int(sign_pow(mp as i64));
        if non_decreasing(tail) && tail.first().is_none_or(|s| *s > mu) {
            first += &sign * inverse_run_factorials(head) * inverse_run_factorials(tail);
        }
        if tail.iter().all(|s| *s == mu) {
            let e = head.iter().filter(|s| **s == total_slope).count();
            second += &sign * int(sign_pow(e as i64)) * bernoulli_number(e) * inverse_run_factorials(head)
                / factorial_q((m - mp + 1) as u64);
        }
    }
    let generic = (0..m).all(|mp| (1..=m).all(|i| prefix(mp) != slopes[i]));
    let second_applies = slopes[m] == total_slope;
    Ok((!generic || first.is_zero()) && (!second_applies || second.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regsum::linalg::to_q;
    use proptest::prelude::*;

    #[test]
    fn c_delta_examples() {
        assert_eq!(c_delta(&to_q(&[0, 0, 0])).unwrap(), rat(1, 3));
        assert_eq!(c_delta(&to_q(&[-2, 1, 1])).unwrap(), int(1));
        assert_eq!(c_delta(&to_q(&[1, -1])).unwrap(), int(0));
        assert!(c_delta(&to_q(&[1, 1])).is_err());
    }

    #[test]
    fn valley_permutations_count() {
        for r in 1..6 {
            let ps = valley_permutations(r);
            assert_eq!(ps.len(), 1 << (r - 1));
            for a in ps {
                let z = a.iter().position(|v| *v == 0).unwrap();
                assert!(a[..=z].windows(2).all(|w| w[0] > w[1]));
                assert!(a[z..].windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn permutation_identity_on_boxes() {
        for r in 2..=3 {
            let mut pts = Vec::new();
            let range: Vec<i64> = (-2..=2).collect();
            for a in &range {
                for b in &range {
                    let mut v = vec![*a, *b];
                    v.truncate(r - 1);
                    let s: i64 = v.iter().sum();
                    v.push(-s);
                    pts.push(to_q(&v));
                }
            }
            for i in 0..r {
                assert!(permutation_identity_check(r, i, &pts).unwrap());
            }
        }
        let all_boundary = vec![to_q(&[0, 0, 0, 0])];
        assert_eq!(c_delta(&all_boundary[0]).unwrap(), rat(1, 4));
        for i in 0..4 {
            assert!(permutation_identity_check(4, i, &all_boundary).unwrap());
        }
    }

    #[test]
    fn jigsaw_examples() {
        assert_eq!(jigsaw_sum(&[0, 1]), int(1));
        assert_eq!(jigsaw_sum(&[0, 0]), rat(1, 2));
        assert_eq!(jigsaw_sum(&[0, 0, 0]), rat(1, 3));
        assert!(jigsaw_check(&[3]));
    }

    #[test]
    fn wallcross_single_step() {
        for d0 in -3..4 {
            for d1 in -3..4 {
                for r1 in 1..4 {
                    assert!(wallcross_coefficient_identities(&[1, r1], &[d0, d1]).unwrap());
                }
            }
        }
        assert!(wallcross_coefficient_identities(&[1], &[0]).is_err());
    }

    proptest! {
        #[test]
        fn decomposition_matches_pointwise(r in 1usize..6, coords in proptest::collection::vec(-3i64..4, 5)) {
            let mut x: Vec<i64> = coords[..r - 1].to_vec();
            x.push(-x.iter().sum::<i64>());
            let x = to_q(&x);
            prop_assert_eq!(c_delta_indicator_decomposition(r).eval(&x), c_delta(&x).unwrap());
        }

        #[test]
        fn degree_pullback_matches(r in 1usize..5, d in -4i64..5, coords in proptest::collection::vec(-3i64..4, 4)) {
            let mut ds: Vec<i64> = coords[..r - 1].to_vec();
            ds.push(d - ds.iter().sum::<i64>());
            prop_assert_eq!(c_delta_on_degrees(r, d).eval(&to_q(&ds)), c_delta_of_degrees(&ds));
        }

        #[test]
        fn jigsaw_on_small_vectors(ds in proptest::collection::vec(-2i64..3, 1..4)) {
            prop_assert!(jigsaw_check(&ds));
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn wallcross_identities(
            rs in proptest::collection::vec(1i64..4, 2..6),
            ds in proptest::collection::vec(-3i64..4, 6),
        ) {
            let ds = &ds[..rs.len()];
            prop_assert!(wallcross_coefficient_identities(&rs, ds).unwrap());
        }
    }
}
