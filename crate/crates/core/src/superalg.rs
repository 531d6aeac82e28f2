//! Supercommutative polynomials in the variables s_{j,k,l}, the pair
//! variables s_{+,0,l} and formal scalars alpha_l.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{factorial_q, format_rational, int, parse_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Sheaf,
    Pair,
    Alpha,
}

/// Field order gives the canonical order: family, then (l, k, j).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub family: Family,
    pub l: i32,
    pub k: u8,
    pub j: u16,
}

impl Var {
    pub const fn sheaf(j: u16, k: u8, l: i32) -> Var {
        Var { family: Family::Sheaf, l, k, j }
    }

    pub const fn pair(l: i32) -> Var {
        Var { family: Family::Pair, l, k: 0, j: 0 }
    }

    /// Formal scalar standing in for s_{1,2,l}.
    pub const fn alpha(l: i32) -> Var {
        Var { family: Family::Alpha, l, k: 2, j: 1 }
    }

    pub fn degree(&self) -> i64 {
        2 * self.l as i64 - self.k as i64
    }

    pub fn is_odd(&self) -> bool {
        self.family == Family::Sheaf && self.k == 1
    }

    /// The variable one level up, as in the shift part of D.
    pub fn shifted(&self, by: i32) -> Var {
        Var { l: self.l + by, ..*self }
    }

    pub fn is_valid(&self, g: u16) -> bool {
        match self.family {
            Family::Sheaf => match self.k {
                0 => self.j == 1 && self.l >= 1,
                1 => self.j >= 1 && self.j <= 2 * g && self.l >= 1,
                2 => self.j == 1 && self.l >= 2,
                _ => false,
            },
            Family::Pair => self.l >= 1,
            Family::Alpha => self.l >= 2,
        }
    }
}

pub const S101: Var = Var::sheaf(1, 0, 1);
pub const S122: Var = Var::sheaf(1, 2, 2);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Sheaf => write!(f, "s_{{{},{},{}}}", self.j, self.k, self.l),
            Family::Pair => write!(f, "s_{{+,0,{}}}", self.l),
            Family::Alpha => write!(f, "alpha_{}", self.l),
        }
    }
}

/// Sorted factor list; odd variables carry exponent 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(pub Vec<(Var, i32)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn var(v: Var) -> Mono {
        Mono(vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(v, e)| v.degree() * *e as i64).sum()
    }

    pub fn odd_count(&self) -> usize {
        self.0.iter().filter(|(v, _)| v.is_odd()).count()
    }

    pub fn is_even(&self) -> bool {
        self.odd_count().is_multiple_of(2)
    }

    pub fn exponent(&self, v: &Var) -> i32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn has_negative(&self) -> bool {
        self.0.iter().any(|(_, e)| *e < 0)
    }

    /// Product with Koszul sign; None when an odd variable repeats.
    pub fn mul(&self, other: &Mono) -> Option<(bool, Mono)> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut negative = false;
        // odd factors of `a` not yet emitted
        let mut pending_odd_a = a.iter().filter(|(v, _)| v.is_odd()).count();
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
            let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
            if take_a {
                if a[i].0.is_odd() {
                    pending_odd_a -= 1;
                }
                out.push(a[i]);
                i += 1;
            } else if take_b {
                if b[j].0.is_odd() && pending_odd_a % 2 == 1 {
                    negative = !negative;
                }
                out.push(b[j]);
                j += 1;
            } else {
                if a[i].0.is_odd() {
                    return None;
                }
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
        Some((negative, Mono(out)))
    }

    pub fn even_part_pow(&self, n: i32) -> Option<Mono> {
        if self.odd_count() > 0 {
            return None;
        }
        Some(Mono(self.0.iter().map(|(v, e)| (*v, e * n)).collect()))
    }
}

/// Sorts an arbitrary factor sequence into canonical order.
/// Returns sign 0 when an odd variable repeats.
pub fn normalize_monomial(factors: &[(Var, i32)]) -> (i32, Mono) {
    let mut sign = 1;
    let mut acc = Mono::one();
    for &(v, e) in factors {
        if e == 0 {
            continue;
        }
        if v.is_odd() && e != 1 {
            return (0, Mono::one());
        }
        match acc.mul(&Mono(vec![(v, e)])) {
            None => return (0, Mono::one()),
            Some((neg, m)) => {
                if neg {
                    sign = -sign;
                }
                acc = m;
            }
        }
    }
    (sign, acc)
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SuperPoly {
    pub terms: BTreeMap<Mono, Rational>,
}

impl SuperPoly {
    pub fn zero() -> SuperPoly {
        SuperPoly::default()
    }

    pub fn one() -> SuperPoly {
        SuperPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> SuperPoly {
        SuperPoly::term(c, Mono::one())
    }

    pub fn term(c: Rational, m: Mono) -> SuperPoly {
        let mut p = SuperPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(v: Var) -> SuperPoly {
        SuperPoly::term(Rational::one(), Mono::var(v))
    }

    pub fn from_factors(c: Rational, factors: &[(Var, i32)]) -> SuperPoly {
        let (sign, m) = normalize_monomial(factors);
        if sign == 0 {
            return SuperPoly::zero();
        }
        SuperPoly::term(c * int(sign as i64), m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SuperPoly, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero();
        }
        SuperPoly {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn coeff(&self, m: &Mono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Mono::one())
    }

    pub fn mul(&self, other: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((neg, m)) = m1.mul(m2) {
                    let c = c1 * c2;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    pub fn mul_mono(&self, m2: &Mono, c2: &Rational) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m1, c1) in &self.terms {
            if let Some((neg, m)) = m1.mul(m2) {
                let c = c1 * c2;
                out.add_term(m, if neg { -c } else { c });
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> SuperPoly {
        let mut acc = SuperPoly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Graded left derivation.
    pub fn derive(&self, v: &Var) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            let Ok(pos) = m.0.binary_search_by(|(w, _)| w.cmp(v)) else {
                continue;
            };
            let e = m.0[pos].1;
            let mut factors = m.0.clone();
            let mut coeff = c * int(e as i64);
            if v.is_odd() {
                let before = m.0[..pos].iter().filter(|(w, _)| w.is_odd()).count();
                if before % 2 == 1 {
                    coeff = -coeff;
                }
                factors.remove(pos);
            } else if e == 1 {
                factors.remove(pos);
            } else {
                factors[pos].1 = e - 1;
            }
            out.add_term(Mono(factors), coeff);
        }
        out
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut ds: Vec<i64> = self.terms.keys().map(Mono::degree).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    pub fn is_homogeneous_of(&self, degree: i64) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(Mono::is_even)
    }

    pub fn is_odd_homogeneous(&self) -> bool {
        self.terms.keys().all(|m| !m.is_even())
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(Mono::has_negative)
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) != 0)
    }

    /// Drops every term containing an odd variable.
    pub fn even_only(&self) -> SuperPoly {
        SuperPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.odd_count() == 0)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Keeps only terms not containing variables of the given family.
    pub fn drop_family(&self, family: Family) -> SuperPoly {
        SuperPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0.iter().all(|(v, _)| v.family != family))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn map_terms(&self, f: impl Fn(&Mono, &Rational) -> Option<(Mono, Rational)>) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            if let Some((m2, c2)) = f(m, c) {
                out.add_term(m2, c2);
            }
        }
        out
    }

    /// Ring homomorphism extending a parity-preserving variable map.
    pub fn substitute(&self, rule: &BTreeMap<Var, SuperPoly>) -> Result<SuperPoly> {
        for (v, img) in rule {
            let ok = if v.is_odd() {
                img.is_odd_homogeneous()
            } else {
                img.is_even()
            };
            if !ok {
                return Err(Error::Domain(format!("substitution for {v} violates parity")));
            }
        }
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = SuperPoly::constant(c.clone());
            for (v, e) in &m.0 {
                let factor = match rule.get(v) {
                    None => SuperPoly::term(Rational::one(), Mono(vec![(*v, *e)])),
                    Some(img) if *e >= 0 => img.pow(*e as u32),
                    Some(img) => invert_monomial(img)?.pow((-*e) as u32),
                };
                acc = acc.mul(&factor);
                if acc.is_zero() {
                    break;
                }
            }
            out.add_scaled(&acc, &Rational::one());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Vec<Value> = m.0.iter().map(|(v, e)| var_to_json(v, *e)).collect();
                json!({"coeff": format_rational(c), "vars": vars})
            })
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(value: &Value) -> Result<SuperPoly> {
        let bad = |what: &str| Error::Parse(format!("polynomial json: {what}"));
        let terms = value
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing terms"))?;
        let mut out = SuperPoly::zero();
        for t in terms {
            let c = parse_rational(t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("coeff"))?)?;
            let vars = t.get("vars").and_then(Value::as_array).ok_or_else(|| bad("vars"))?;
            let mut factors = Vec::new();
            for v in vars {
                factors.push(var_from_json(v)?);
            }
            out.add_scaled(&SuperPoly::from_factors(c, &factors), &Rational::one());
        }
        Ok(out)
    }

    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let coef = if a.denom().is_one() {
                a.numer().to_string()
            } else {
                format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom())
            };
            if m.is_one() {
                out.push_str(&coef);
                continue;
            }
            if !a.is_one() {
                out.push_str(&coef);
                out.push(' ');
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{{{e}}}") })
                .collect();
            out.push_str(&vars.join(" "));
        }
        out
    }
}

fn var_to_json(v: &Var, e: i32) -> Value {
    match v.family {
        Family::Sheaf => json!(["s", v.j, v.k, v.l, e]),
        Family::Pair => json!(["+", "+", v.k, v.l, e]),
        Family::Alpha => json!(["alpha", v.j, v.k, v.l, e]),
    }
}

fn var_from_json(v: &Value) -> Result<(Var, i32)> {
    let bad = || Error::Parse(format!("variable json {v}"));
    let a = v.as_array().filter(|a| a.len() == 5).ok_or_else(bad)?;
    let num = |x: &Value| x.as_i64().ok_or_else(bad);
    let l = num(&a[3])? as i32;
    let e = num(&a[4])? as i32;
    let var = match a[0].as_str().ok_or_else(bad)? {
        "s" => Var::sheaf(num(&a[1])? as u16, num(&a[2])? as u8, l),
        "+" => Var::pair(l),
        "alpha" => Var::alpha(l),
        _ => return Err(bad()),
    };
    Ok((var, e))
}

fn invert_monomial(p: &SuperPoly) -> Result<SuperPoly> {
    if p.len() != 1 {
        return Err(Error::NotInvertible(format!("{p}")));
    }
    let (m, c) = p.terms.iter().next().unwrap();
    let inv = m
        .even_part_pow(-1)
        .ok_or_else(|| Error::NotInvertible(format!("{p}")))?;
    Ok(SuperPoly::term(c.recip(), inv))
}

/// Inverts p = c * unit^k * (1 + n) where every term of n has positive
/// relative degree, keeping powers of n up to `cap`.
pub fn invert_unit_led(p: &SuperPoly, unit: &Var, cap: u32) -> Result<SuperPoly> {
    let lead = p
        .terms
        .iter()
        .filter(|(m, _)| m.0.iter().all(|(v, _)| v == unit))
        .min_by_key(|(m, _)| m.degree())
        .ok_or_else(|| Error::NotInvertible(format!("{p} has no pure {unit} term")))?;
    let lead_inv = SuperPoly::term(lead.1.recip(), lead.0.even_part_pow(-1).unwrap());
    let mut n = p.mul(&lead_inv);
    n.add_term(Mono::one(), -Rational::one());
    if n.terms.keys().any(|m| m.degree() <= 0) {
        return Err(Error::NotInvertible(format!("{p} is not led by a power of {unit}")));
    }
    let minus_n = -n;
    let mut acc = SuperPoly::one();
    let mut power = SuperPoly::one();
    for _ in 0..cap {
        power = power.mul(&minus_n);
        if power.is_zero() {
            break;
        }
        acc = acc + power.clone();
    }
    Ok(acc.mul(&lead_inv))
}

/// <prod S^m, prod s^m'> with factorials and the odd-pair sign.
pub fn dual_pair(coh: &Mono, hom: &SuperPoly) -> Rational {
    let c = hom.coeff(coh);
    if c.is_zero() {
        return c;
    }
    let mut weight = Rational::one();
    for (_, e) in &coh.0 {
        weight *= factorial_q(*e as u64);
    }
    let n = coh.odd_count() as i64;
    if (n * (n - 1) / 2) % 2 == 1 {
        weight = -weight;
    }
    c * weight
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}) {}", format_rational(c), m)?;
        }
        Ok(())
    }
}

impl Add for SuperPoly {
    type Output = SuperPoly;
    fn add(mut self, rhs: SuperPoly) -> SuperPoly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl AddAssign<&SuperPoly> for SuperPoly {
    fn add_assign(&mut self, rhs: &SuperPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Sub for SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: SuperPoly) -> SuperPoly {
        self + (-rhs)
    }
}

impl Neg for SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        SuperPoly {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Mul for &SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &SuperPoly) -> SuperPoly {
        SuperPoly::mul(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn s(j: u16, k: u8, l: i32) -> SuperPoly {
        SuperPoly::var(Var::sheaf(j, k, l))
    }

    #[test]
    fn normalize_examples() {
        let (sign, m) = normalize_monomial(&[(Var::sheaf(2, 1, 1), 1), (Var::sheaf(1, 1, 1), 1)]);
        assert_eq!(sign, -1);
        assert_eq!(m, Mono(vec![(Var::sheaf(1, 1, 1), 1), (Var::sheaf(2, 1, 1), 1)]));
        let (sign, m) = normalize_monomial(&[(Var::sheaf(1, 1, 1), 1), (Var::sheaf(1, 1, 1), 1)]);
        assert_eq!((sign, m), (0, Mono::one()));
        let (sign, m) = normalize_monomial(&[(Var::sheaf(1, 0, 2), 2), (S122, 1)]);
        assert_eq!(sign, 1);
        assert_eq!(m.degree(), 10);
    }

    #[test]
    fn mul_examples() {
        let a = s(1, 1, 1);
        let b = s(2, 1, 1);
        let ab = a.mul(&b);
        assert_eq!(b.mul(&a), -ab.clone());
        let x = -s(1, 2, 2) + ab.clone();
        let sq = x.mul(&x);
        let expected = s(1, 2, 2).mul(&s(1, 2, 2)) - s(1, 2, 2).mul(&ab).scale(&int(2));
        assert_eq!(sq, expected);
    }

    #[test]
    fn derive_examples() {
        let cube = s(1, 2, 2).pow(3);
        assert_eq!(cube.derive(&S122), s(1, 2, 2).pow(2).scale(&int(3)));
        let ab = s(1, 1, 1).mul(&s(2, 1, 1));
        assert_eq!(ab.derive(&Var::sheaf(2, 1, 1)), -s(1, 1, 1));
        assert!(s(1, 2, 2).derive(&S101).is_zero());
    }

    #[test]
    fn dual_pair_examples() {
        let sq = s(1, 2, 2).pow(2);
        let m = sq.terms.keys().next().unwrap().clone();
        assert_eq!(dual_pair(&m, &sq), int(2));
        assert_eq!(dual_pair(&Mono::var(S122), &s(1, 0, 2)), int(0));
        let ab = s(1, 1, 1).mul(&s(2, 1, 1));
        let m = ab.terms.keys().next().unwrap().clone();
        assert_eq!(dual_pair(&m, &ab), int(-1));
    }

    #[test]
    fn substitute_examples() {
        let alpha = SuperPoly::var(Var::alpha(2));
        let rule = BTreeMap::from([(S122, alpha.clone())]);
        assert_eq!(s(1, 2, 2).pow(2).substitute(&rule).unwrap(), alpha.pow(2));

        let rule = BTreeMap::from([(S101, s(1, 0, 1) + s(1, 2, 2))]);
        assert_eq!(s(1, 0, 1).substitute(&rule).unwrap(), s(1, 0, 1) + s(1, 2, 2));

        let rule = BTreeMap::from([
            (Var::sheaf(1, 1, 1), -s(2, 1, 1)),
            (Var::sheaf(2, 1, 1), s(1, 1, 1)),
        ]);
        let ab = s(1, 1, 1).mul(&s(2, 1, 1));
        assert_eq!(ab.substitute(&rule).unwrap(), ab);

        let bad = BTreeMap::from([(Var::sheaf(1, 1, 1), s(1, 2, 2))]);
        assert!(s(1, 1, 1).substitute(&bad).is_err());
    }

    #[test]
    fn invert_examples() {
        let inv = invert_unit_led(&s(1, 2, 2), &S122, 4).unwrap();
        assert_eq!(inv, SuperPoly::term(int(1), Mono(vec![(S122, -1)])));
        assert_eq!(invert_unit_led(&SuperPoly::constant(int(2)), &S122, 4).unwrap(), SuperPoly::constant(rat(1, 2)));
        let t = s(1, 2, 3);
        let p = s(1, 2, 2).mul(&(SuperPoly::one() + t.clone()));
        let inv = invert_unit_led(&p, &S122, 2).unwrap();
        let unit_inv = SuperPoly::term(int(1), Mono(vec![(S122, -1)]));
        let expected = unit_inv.mul(&(SuperPoly::one() - t.clone() + t.pow(2)));
        assert_eq!(inv, expected);
        assert!(invert_unit_led(&s(1, 0, 2), &S122, 2).is_err());
    }

    #[test]
    fn json_roundtrip_fixed() {
        let p = s(1, 1, 1).mul(&s(2, 1, 1)).scale(&rat(-3, 2)) + SuperPoly::var(Var::pair(2));
        let back = SuperPoly::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.to_json().to_string(), back.to_json().to_string());
    }

    fn arb_var() -> impl Strategy<Value = Var> {
        prop_oneof![
            (1i32..4).prop_map(|l| Var::sheaf(1, 0, l)),
            (2i32..4).prop_map(|l| Var::sheaf(1, 2, l)),
            (1u16..5, 1i32..3).prop_map(|(j, l)| Var::sheaf(j, 1, l)),
            (1i32..3).prop_map(Var::pair),
        ]
    }

    fn arb_mono() -> impl Strategy<Value = (i32, Vec<(Var, i32)>)> {
        (-3i32..4, proptest::collection::vec((arb_var(), 1i32..3), 0..4))
    }

    fn arb_poly() -> impl Strategy<Value = SuperPoly> {
        proptest::collection::vec(arb_mono(), 0..4).prop_map(|terms| {
            let mut p = SuperPoly::zero();
            for (c, fs) in terms {
                let fs: Vec<_> = fs
                    .into_iter()
                    .map(|(v, e)| if v.is_odd() { (v, 1) } else { (v, e) })
                    .collect();
                p += &SuperPoly::from_factors(int(c as i64), &fs);
            }
            p
        })
    }

    fn parity_split(p: &SuperPoly) -> (SuperPoly, SuperPoly) {
        let even = p.map_terms(|m, c| m.is_even().then(|| (m.clone(), c.clone())));
        let odd = p.map_terms(|m, c| (!m.is_even()).then(|| (m.clone(), c.clone())));
        (even, odd)
    }

    proptest! {
        #[test]
        fn associative(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn supercommutative(a in arb_poly(), b in arb_poly()) {
            let (ae, ao) = parity_split(&a);
            let (be, bo) = parity_split(&b);
            prop_assert_eq!(ae.mul(&b), b.mul(&ae));
            prop_assert_eq!(ao.mul(&be), be.mul(&ao));
            prop_assert_eq!(ao.mul(&bo), -bo.mul(&ao));
        }

        #[test]
        fn grading_additive(a in arb_poly(), b in arb_poly()) {
            let prod = a.mul(&b);
            for m in prod.terms.keys() {
                let ok = a.terms.keys().any(|m1| b.terms.keys().any(|m2| m1.degree() + m2.degree() == m.degree()));
                prop_assert!(ok);
            }
        }

        #[test]
        fn leibniz_rule(a in arb_poly(), b in arb_poly(), v in arb_var()) {
            let (ae, ao) = parity_split(&a);
            let sign_odd = if v.is_odd() { -1 } else { 1 };
            let lhs = a.mul(&b).derive(&v);
            let rhs = ae.derive(&v).mul(&b)
                + ae.mul(&b.derive(&v))
                + ao.derive(&v).mul(&b)
                + ao.mul(&b.derive(&v)).scale(&int(sign_odd));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn substitute_multiplicative(a in arb_poly(), b in arb_poly()) {
            let rule = BTreeMap::from([
                (Var::sheaf(1, 0, 1), s(1, 0, 1) + s(1, 2, 2)),
                (Var::sheaf(1, 0, 2), s(1, 0, 2) + s(1, 2, 3)),
                (Var::sheaf(1, 1, 1), -s(2, 1, 1)),
                (Var::sheaf(2, 1, 1), s(1, 1, 1)),
            ]);
            let lhs = a.mul(&b).substitute(&rule).unwrap();
            let rhs = a.substitute(&rule).unwrap().mul(&b.substitute(&rule).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn json_roundtrip(a in arb_poly()) {
            prop_assert_eq!(SuperPoly::from_json(&a.to_json()).unwrap(), a);
        }

        #[test]
        fn dual_pair_vanishes_off_diagonal(a in arb_poly(), (c, fs) in arb_mono()) {
            let (sign, m) = normalize_monomial(&fs);
            prop_assume!(sign != 0 && c != 0);
            if !a.terms.contains_key(&m) {
                prop_assert!(dual_pair(&m, &a).is_zero());
            }
        }
    }
}
