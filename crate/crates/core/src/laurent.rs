//! Truncated Laurent series in ordered auxiliary variables with
//! supercommutative coefficients.
//!
//! Variables are listed innermost first (w, z_1, ..., z_{r-1}) and every
//! series is expanded in the region |v_0| < |v_1| < ... . Writing
//! v_i = x_i x_{i+1} ... x_{n-1}, such an expansion is a Laurent series in
//! the x's with exponents b_k = a_0 + ... + a_k. Truncation caps are
//! componentwise upper bounds on b; the iterated residue is the
//! coefficient at a = (-1, ..., -1).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{bernoulli_number, big, binomial, factorial_q, Rational};
use crate::superalg::SuperPoly;

pub type Exps = Vec<i32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laurent {
    pub nv: usize,
    pub terms: BTreeMap<Exps, SuperPoly>,
}

/// Partial sums of an exponent vector.
pub fn partial_sums(a: &[i32]) -> Exps {
    let mut acc = 0;
    a.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

pub fn within(b: &[i32], cap: &[i32]) -> bool {
    b.iter().zip(cap).all(|(x, c)| x <= c)
}

/// Cap target for the full iterated residue.
pub fn residue_target(nv: usize) -> Exps {
    (1..=nv as i32).map(|k| -k).collect()
}

pub fn vec_add(a: &[i32], b: &[i32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[i32], b: &[i32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_min(a: &[i32], b: &[i32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| *x.min(y)).collect()
}

pub fn vec_pos(a: &[i32]) -> Exps {
    a.iter().map(|x| (*x).max(0)).collect()
}

impl Laurent {
    pub fn zero(nv: usize) -> Laurent {
        Laurent { nv, terms: BTreeMap::new() }
    }

    pub fn constant(nv: usize, p: SuperPoly) -> Laurent {
        Laurent::monomial(vec![0; nv], p)
    }

    pub fn one(nv: usize) -> Laurent {
        Laurent::constant(nv, SuperPoly::one())
    }

    pub fn monomial(a: Exps, p: SuperPoly) -> Laurent {
        let mut out = Laurent::zero(a.len());
        out.add_term(a, &p);
        out
    }

    /// Sum of c_i v_i.
    pub fn linear(coeffs: &[Rational]) -> Laurent {
        let nv = coeffs.len();
        let mut out = Laurent::zero(nv);
        for (i, c) in coeffs.iter().enumerate() {
            let mut a = vec![0; nv];
            a[i] = 1;
            out.add_term(a, &SuperPoly::constant(c.clone()));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, a: Exps, p: &SuperPoly) {
        if p.is_zero() {
            return;
        }
        match self.terms.entry(a) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += p;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn coefficient(&self, a: &[i32]) -> SuperPoly {
        self.terms.get(a).cloned().unwrap_or_default()
    }

    pub fn truncate(&mut self, cap: &[i32]) {
        self.terms.retain(|a, _| within(&partial_sums(a), cap));
    }

    pub fn truncated(mut self, cap: &[i32]) -> Laurent {
        self.truncate(cap);
        self
    }

    /// Componentwise minimum of b over all terms.
    pub fn lower(&self) -> Option<Exps> {
        self.terms
            .keys()
            .map(|a| partial_sums(a))
            .reduce(|x, y| vec_min(&x, &y))
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (a, p) in &other.terms {
            out.add_term(a.clone(), p);
        }
        out
    }

    pub fn sub(&self, other: &Laurent) -> Laurent {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Laurent {
        if c.is_zero() {
            return Laurent::zero(self.nv);
        }
        Laurent {
            nv: self.nv,
            terms: self.terms.iter().map(|(a, p)| (a.clone(), p.scale(c))).collect(),
        }
    }

    /// Multiplies every coefficient by `q` on the right.
    pub fn mul_poly(&self, q: &SuperPoly) -> Laurent {
        let mut out = Laurent::zero(self.nv);
        for (a, p) in &self.terms {
            out.add_term(a.clone(), &p.mul(q));
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&SuperPoly) -> SuperPoly) -> Laurent {
        let mut out = Laurent::zero(self.nv);
        for (a, p) in &self.terms {
            out.add_term(a.clone(), &f(p));
        }
        out
    }

    pub fn shift(&self, by: &[i32]) -> Laurent {
        Laurent {
            nv: self.nv,
            terms: self.terms.iter().map(|(a, p)| (vec_add(a, by), p.clone())).collect(),
        }
    }

    /// Product keeping terms with b <= cap.
    pub fn mul(&self, other: &Laurent, cap: &[i32]) -> Laurent {
        let left: Vec<(Exps, Exps, &SuperPoly)> = self
            .terms
            .iter()
            .map(|(a, p)| (a.clone(), partial_sums(a), p))
            .collect();
        let right: Vec<(Exps, Exps, &SuperPoly)> = other
            .terms
            .iter()
            .map(|(a, p)| (a.clone(), partial_sums(a), p))
            .collect();
        let mut acc: BTreeMap<Exps, SuperPoly> = BTreeMap::new();
        for (a1, b1, p1) in &left {
            for (a2, b2, p2) in &right {
                if !b1.iter().zip(b2).zip(cap).all(|((x, y), c)| x + y <= *c) {
                    continue;
                }
                let prod = p1.mul(p2);
                if prod.is_zero() {
                    continue;
                }
                *acc.entry(vec_add(a1, a2)).or_default() += &prod;
            }
        }
        acc.retain(|_, p| !p.is_zero());
        Laurent { nv: self.nv, terms: acc }
    }

    /// Product of several factors, each restricted by what the others can
    /// still contribute.
    pub fn product(factors: &[Laurent], cap: &[i32]) -> Result<Laurent> {
        let nv = cap.len();
        if factors.iter().any(Laurent::is_zero) {
            return Ok(Laurent::zero(nv));
        }
        let lowers: Vec<Exps> = factors.iter().map(|f| f.lower().unwrap()).collect();
        let mut remaining: Exps = lowers.iter().fold(vec![0; nv], |acc, l| vec_add(&acc, l));
        let mut acc = Laurent::one(nv);
        for (f, l) in factors.iter().zip(&lowers) {
            remaining = vec_sub(&remaining, l);
            let step_cap = vec_sub(cap, &remaining);
            acc = acc.mul(f, &step_cap);
            if acc.is_zero() {
                return Ok(acc);
            }
        }
        Ok(acc)
    }

    pub fn pow(&self, n: u32, cap: &[i32]) -> Laurent {
        let mut acc = Laurent::one(self.nv);
        for _ in 0..n {
            acc = acc.mul(self, cap);
        }
        acc
    }

    /// exp(X) for X with every term at b >= 0, b != 0.
    pub fn exp_series(x: &Laurent, cap: &[i32]) -> Result<Laurent> {
        for a in x.terms.keys() {
            let b = partial_sums(a);
            if b.iter().any(|v| *v < 0) || b.iter().all(|v| *v == 0) {
                return Err(Error::NotInvertible(format!("exp argument has weight-zero term {a:?}")));
            }
            if !x.terms[a].is_even() {
                return Err(Error::Domain("exp argument must be even".into()));
            }
        }
        let x = x.clone().truncated(cap);
        let mut acc = Laurent::one(x.nv);
        let mut power = Laurent::one(x.nv);
        let mut n = 0u64;
        loop {
            n += 1;
            power = power.mul(&x, cap).scale(&Rational::new(1.into(), n.into()));
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc)
    }

    /// Term with lexicographically smallest b, innermost variable first.
    pub fn lead(&self) -> Option<(&Exps, &SuperPoly)> {
        self.terms.iter().min_by(|x, y| partial_sums(x.0).cmp(&partial_sums(y.0)))
    }

    /// Multiplicative inverse. The leading coefficient must be a rational
    /// multiple of an even monomial; `self` must be exact for
    /// b <= cap + 2 max(b_lead, 0).
    pub fn invert(&self, cap: &[i32]) -> Result<Laurent> {
        let (a_lead, c_lead) = self
            .lead()
            .ok_or_else(|| Error::NotInvertible("zero series".into()))?;
        if c_lead.len() != 1 {
            return Err(Error::NotInvertible(format!("leading coefficient {c_lead} is not a monomial")));
        }
        let (m, c) = c_lead.terms.iter().next().unwrap();
        let m_inv = m
            .even_part_pow(-1)
            .ok_or_else(|| Error::NotInvertible(format!("leading coefficient {c_lead} is odd")))?;
        let neg_a: Exps = a_lead.iter().map(|x| -x).collect();
        let lead_inv = Laurent::monomial(neg_a.clone(), SuperPoly::term(c.recip(), m_inv));
        let b_lead = partial_sums(a_lead);
        let inner_cap = vec_add(cap, &b_lead);
        let big_cap = vec_add(&inner_cap, &vec_pos(&b_lead));
        let mut n = self.mul(&lead_inv, &big_cap);
        n.add_term(vec![0; self.nv], &SuperPoly::constant(-Rational::one()));
        for a in n.terms.keys() {
            let b = partial_sums(a);
            if b.iter().any(|v| *v < 0) || b.iter().all(|v| *v == 0) {
                return Err(Error::NotInvertible(format!(
                    "series is not led by a single term (offending exponent {a:?})"
                )));
            }
        }
        let minus_n = n.truncated(&inner_cap).scale(&-Rational::one());
        let mut acc = Laurent::one(self.nv);
        let mut power = Laurent::one(self.nv);
        loop {
            power = power.mul(&minus_n, &inner_cap);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.mul(&lead_inv, cap))
    }

    /// 1/(1 - e^X) = -(1/X) sum_n B_n X^n / n!.
    pub fn expand_reciprocal_one_minus_exp(x: &Laurent, cap: &[i32]) -> Result<Laurent> {
        let inv_x = x.invert(cap)?;
        let inv_lower = inv_x
            .lower()
            .ok_or_else(|| Error::NotInvertible("empty inverse".into()))?;
        let inner_cap = vec_sub(cap, &inv_lower);
        let x = x.clone().truncated(&inner_cap);
        let mut series = Laurent::one(x.nv);
        let mut power = Laurent::one(x.nv);
        let mut n = 0u64;
        loop {
            n += 1;
            power = power.mul(&x, &inner_cap);
            if power.is_zero() {
                break;
            }
            let coeff = bernoulli_number(n as usize) / factorial_q(n);
            if !coeff.is_zero() {
                series = series.add(&power.scale(&coeff));
            }
        }
        Ok(inv_x.mul(&series, cap).scale(&-Rational::one()))
    }

    /// 1/(v_i - v_j)^p expanded in v_i/v_j; `i = None` stands for the
    /// frozen variable z_0 = 0.
    pub fn expand_inverse_difference(
        nv: usize,
        i: Option<usize>,
        j: usize,
        power: u32,
        cap: &[i32],
    ) -> Result<Laurent> {
        if let Some(i) = i {
            if i >= j {
                return Err(Error::Domain(format!("inverse difference needs i < j, got {i} >= {j}")));
            }
        }
        if j >= nv {
            return Err(Error::Domain(format!("variable {j} out of range")));
        }
        let sign = if power.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
        let mut out = Laurent::zero(nv);
        let p = power as i64;
        let mut k = 0i64;
        loop {
            let mut a = vec![0; nv];
            a[j] = -(p as i32) - k as i32;
            if let Some(i) = i {
                a[i] = k as i32;
            } else if k > 0 {
                break;
            }
            if !within(&partial_sums(&a), cap) {
                break;
            }
            let c = &sign * big(&binomial(p - 1 + k, k));
            out.add_term(a, &SuperPoly::constant(c));
            if i.is_none() {
                break;
            }
            k += 1;
        }
        Ok(out)
    }

    /// Coefficient of v_0^{-1}; the remaining variables keep their order.
    pub fn residue(&self, v: usize) -> Result<Laurent> {
        if v != 0 {
            return Err(Error::ResidueOrder(format!(
                "residues are taken innermost first; requested variable {v}"
            )));
        }
        if self.nv == 0 {
            return Err(Error::ResidueOrder("no variable left".into()));
        }
        let mut out = Laurent::zero(self.nv - 1);
        for (a, p) in &self.terms {
            if a[0] == -1 {
                out.add_term(a[1..].to_vec(), p);
            }
        }
        Ok(out)
    }

    /// All residues, innermost first.
    pub fn iterated_residue(&self) -> SuperPoly {
        self.coefficient(&vec![-1; self.nv])
    }

    /// Debug dump: polynomial JSON with an "aux" exponent field.
    pub fn to_json(&self, names: &[&str]) -> Value {
        let mut rows = Vec::new();
        for (a, p) in &self.terms {
            let aux: Vec<Value> = a
                .iter()
                .enumerate()
                .filter(|(_, e)| **e != 0)
                .map(|(i, e)| json!([names.get(i).copied().unwrap_or("?"), e]))
                .collect();
            if let Value::Object(obj) = p.to_json() {
                if let Some(Value::Array(ts)) = obj.get("terms") {
                    for t in ts {
                        let mut t = t.clone();
                        t["aux"] = Value::Array(aux.clone());
                        rows.push(t);
                    }
                }
            }
        }
        json!({ "terms": rows })
    }

    pub fn is_constant_in_aux(&self) -> bool {
        self.terms.keys().all(|a| a.iter().all(|x| *x == 0))
    }

    pub fn constant_part(&self) -> SuperPoly {
        self.coefficient(&vec![0; self.nv])
    }

    /// Checks poly-degree - 2 * (sum of aux exponents) is the same for all terms.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut deg = None;
        for (a, p) in &self.terms {
            let shift: i64 = a.iter().map(|x| *x as i64).sum::<i64>() * 2;
            for m in p.terms.keys() {
                let d = m.degree() - shift;
                match deg {
                    None => deg = Some(d),
                    Some(e) if e != d => return None,
                    _ => {}
                }
            }
        }
        deg
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (a, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{p}] v^{a:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use crate::superalg::{Mono, Var, S122};
    use proptest::prelude::*;

    fn q(c: Rational) -> SuperPoly {
        SuperPoly::constant(c)
    }

    #[test]
    fn inverse_difference_examples() {
        let cap = vec![10, 10];
        let f = Laurent::expand_inverse_difference(2, None, 1, 2, &cap).unwrap();
        assert_eq!(f, Laurent::monomial(vec![0, -2], q(int(1))));

        let cap = vec![2, -1];
        let f = Laurent::expand_inverse_difference(2, Some(0), 1, 1, &cap).unwrap();
        let mut expected = Laurent::zero(2);
        for k in 0..=2 {
            expected.add_term(vec![k, -1 - k], &q(int(-1)));
        }
        assert_eq!(f, expected);
        assert!(Laurent::expand_inverse_difference(2, Some(1), 1, 1, &cap).is_err());
    }

    #[test]
    fn inverse_difference_consistency() {
        let cap = vec![6, 0];
        let f = Laurent::expand_inverse_difference(2, Some(0), 1, 1, &cap).unwrap();
        let diff = Laurent::linear(&[int(1), int(-1)]);
        let prod = diff.mul(&f, &[5, 0]);
        assert_eq!(prod, Laurent::one(2));
    }

    #[test]
    fn exp_matches_rho() {
        let cap = vec![2];
        let mut x = Laurent::zero(1);
        x.add_term(vec![1], &SuperPoly::var(Var::pair(1)).scale(&int(-1)));
        x.add_term(vec![2], &SuperPoly::var(Var::pair(2)).scale(&rat(1, 2)));
        let e = Laurent::exp_series(&x, &cap).unwrap();
        let s1 = SuperPoly::var(Var::pair(1));
        let s2 = SuperPoly::var(Var::pair(2));
        let mut expected = Laurent::one(1);
        expected.add_term(vec![1], &s1.scale(&int(-1)));
        expected.add_term(vec![2], &(s1.pow(2).scale(&rat(1, 2)) + s2.scale(&rat(1, 2))));
        assert_eq!(e, expected);
        assert_eq!(Laurent::exp_series(&Laurent::zero(1), &cap).unwrap(), Laurent::one(1));
    }

    #[test]
    fn reciprocal_one_minus_exp_scalar() {
        let alpha = SuperPoly::var(Var::alpha(2));
        let x = Laurent::monomial(vec![1], alpha.clone());
        let r = Laurent::expand_reciprocal_one_minus_exp(&x, &[1]).unwrap();
        let inv = SuperPoly::term(int(-1), Mono(vec![(Var::alpha(2), -1)]));
        let mut expected = Laurent::monomial(vec![-1], inv);
        expected.add_term(vec![0], &q(rat(1, 2)));
        expected.add_term(vec![1], &alpha.scale(&rat(-1, 12)));
        assert_eq!(r, expected);
    }

    #[test]
    fn reciprocal_one_minus_exp_localized() {
        let mut x = Laurent::zero(1);
        x.add_term(vec![1], &SuperPoly::var(S122));
        x.add_term(vec![2], &SuperPoly::var(Var::sheaf(1, 2, 3)).scale(&rat(1, 2)));
        let cap = vec![3];
        let r = Laurent::expand_reciprocal_one_minus_exp(&x, &cap).unwrap();
        let (a, c) = r.lead().unwrap();
        assert_eq!(a, &vec![-1]);
        assert_eq!(c, &SuperPoly::term(int(-1), Mono(vec![(S122, -1)])));
        let generic = Laurent::one(1)
            .sub(&Laurent::exp_series(&x, &[5]).unwrap())
            .invert(&cap)
            .unwrap();
        assert_eq!(r, generic);
        let check = Laurent::one(1).sub(&Laurent::exp_series(&x, &[6]).unwrap()).mul(&r, &cap);
        assert_eq!(check, Laurent::one(1));
    }

    #[test]
    fn residue_minus_one_twelfth() {
        let z = Laurent::monomial(vec![1], q(int(1)));
        let r = Laurent::expand_reciprocal_one_minus_exp(&z, &[1]).unwrap();
        let f = r.shift(&[-2]);
        assert_eq!(f.residue(0).unwrap().constant_part(), q(rat(-1, 12)));
        assert_eq!(Laurent::monomial(vec![-1], q(int(1))).residue(0).unwrap(), Laurent::one(0));
        assert!(Laurent::linear(&[int(1)]).residue(0).unwrap().is_zero());
        assert!(Laurent::one(2).residue(1).is_err());
    }

    #[test]
    fn invert_rejects_non_unit_lead() {
        let p = SuperPoly::var(S122) + SuperPoly::var(Var::sheaf(1, 0, 2));
        let x = Laurent::monomial(vec![1], p);
        assert!(x.invert(&[3]).is_err());
    }

    proptest! {
        #[test]
        fn exp_is_homomorphism(c1 in -3i64..4, c2 in -3i64..4, d1 in -3i64..4) {
            let cap = vec![4];
            let a = Laurent::monomial(vec![1], SuperPoly::var(S122).scale(&int(c1)));
            let b = Laurent::monomial(vec![1], SuperPoly::var(Var::sheaf(1, 0, 2)).scale(&int(c2)))
                .add(&Laurent::monomial(vec![2], q(int(d1))));
            let lhs = Laurent::exp_series(&a.add(&b), &cap).unwrap();
            let rhs = Laurent::exp_series(&a, &cap).unwrap().mul(&Laurent::exp_series(&b, &cap).unwrap(), &cap);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn window_stability(k in 2i32..6) {
            // res_z of z^{-k} / (1 - e^z): enlarging the cap keeps the value
            let z = Laurent::monomial(vec![1], q(int(1)));
            let small = Laurent::expand_reciprocal_one_minus_exp(&z, &[k - 1]).unwrap().shift(&[-k]);
            let large = Laurent::expand_reciprocal_one_minus_exp(&z, &[k + 3]).unwrap().shift(&[-k]);
            prop_assert_eq!(small.iterated_residue(), large.iterated_residue());
            let expected = -bernoulli_number(k as usize) / factorial_q(k as u64);
            prop_assert_eq!(small.iterated_residue(), q(expected));
        }

        #[test]
        fn invert_roundtrip(c0 in 1i64..4, c1 in -3i64..4, c2 in -3i64..4) {
            let cap = vec![3, 2];
            let f = Laurent::linear(&[int(c1), int(c0)])
                .add(&Laurent::monomial(vec![0, 2], q(int(c2))));
            let inv = f.invert(&cap).unwrap();
            let lower = inv.lower().unwrap();
            let prod = f.mul(&inv, &vec_add(&cap, &lower));
            prop_assert_eq!(prod.truncated(&[2, 1]), Laurent::one(2));
        }
    }
}
