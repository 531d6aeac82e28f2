//! Universal sums in Q(Λ) and regularized sums in a target ring.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::geometry::{decompose_coords, AffineLattice, LatticeSector, PolytopeFunction};
use super::linalg::ZVec;
use crate::error::{Error, Result};
use crate::exact::{format_rational, int, Rational};
use crate::laurent::{Exps, Laurent};
use crate::superalg::SuperPoly;

/// sum_a num_a t^a / prod_g (1 - t^g) in lattice coordinates, with every
/// denominator exponent lexicographically positive.
#[derive(Clone, Debug)]
pub struct FormalExpFraction {
    pub dim: usize,
    pub num: BTreeMap<ZVec, Rational>,
    pub den: Vec<ZVec>,
}

fn lex_positive(g: &[i64]) -> bool {
    g.iter().find(|x| **x != 0).is_some_and(|x| *x > 0)
}

fn multiset_max(a: &[ZVec], b: &[ZVec]) -> Vec<ZVec> {
    let mut out = a.to_vec();
    let mut rest = a.to_vec();
    for g in b {
        if let Some(p) = rest.iter().position(|x| x == g) {
            rest.remove(p);
        } else {
            out.push(g.clone());
        }
    }
    out.sort();
    out
}

fn multiset_minus(a: &[ZVec], b: &[ZVec]) -> Vec<ZVec> {
    let mut out = a.to_vec();
    for g in b {
        if let Some(p) = out.iter().position(|x| x == g) {
            out.remove(p);
        }
    }
    out
}

fn times_one_minus(num: &BTreeMap<ZVec, Rational>, g: &[i64]) -> BTreeMap<ZVec, Rational> {
    let mut out = num.clone();
    for (a, c) in num {
        let shifted: ZVec = a.iter().zip(g).map(|(x, y)| x + y).collect();
        let e = out.entry(shifted).or_insert_with(Rational::zero);
        *e -= c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Exact quotient num / (1 - t^g), if it exists.
fn divide_one_minus(num: &BTreeMap<ZVec, Rational>, g: &[i64]) -> Option<BTreeMap<ZVec, Rational>> {
    let k = g.iter().position(|x| *x != 0)?;
    let step = g[k];
    // chains a = rep + t g with 0 <= rep_k < step
    let mut chains: BTreeMap<ZVec, BTreeMap<i64, Rational>> = BTreeMap::new();
    for (a, c) in num {
        let t = a[k].div_euclid(step);
        let rep: ZVec = a.iter().zip(g).map(|(x, y)| x - t * y).collect();
        chains.entry(rep).or_default().insert(t, c.clone());
    }
    let mut out = BTreeMap::new();
    for (rep, coeffs) in chains {
        let lo = *coeffs.keys().next().unwrap();
        let hi = *coeffs.keys().last().unwrap();
        let mut running = Rational::zero();
        for t in lo..=hi {
            if let Some(c) = coeffs.get(&t) {
                running += c;
            }
            if t < hi && !running.is_zero() {
                out.insert(rep.iter().zip(g).map(|(x, y)| x + t * y).collect(), running.clone());
            }
        }
        if !running.is_zero() {
            return None;
        }
    }
    Some(out)
}

impl FormalExpFraction {
    pub fn zero(dim: usize) -> FormalExpFraction {
        FormalExpFraction { dim, num: BTreeMap::new(), den: Vec::new() }
    }

    /// e^{apex} / prod (1 - e^{g}).
    pub fn from_sector(s: &LatticeSector) -> FormalExpFraction {
        let mut apex = s.apex.clone();
        let mut sign = int(1);
        let mut den = Vec::new();
        for g in &s.gens {
            if lex_positive(g) {
                den.push(g.clone());
            } else {
                // 1/(1 - t^g) = -t^{-g}/(1 - t^{-g})
                sign = -sign;
                for (x, y) in apex.iter_mut().zip(g) {
                    *x -= y;
                }
                den.push(g.iter().map(|x| -x).collect());
            }
        }
        den.sort();
        FormalExpFraction { dim: s.apex.len(), num: BTreeMap::from([(apex, sign)]), den }
    }

    fn numerator_over(&self, den: &[ZVec]) -> BTreeMap<ZVec, Rational> {
        multiset_minus(den, &self.den)
            .iter()
            .fold(self.num.clone(), |acc, g| times_one_minus(&acc, g))
    }

    pub fn add(&self, other: &FormalExpFraction) -> FormalExpFraction {
        let den = multiset_max(&self.den, &other.den);
        let mut num = self.numerator_over(&den);
        for (a, c) in other.numerator_over(&den) {
            *num.entry(a).or_insert_with(Rational::zero) += c;
        }
        num.retain(|_, c| !c.is_zero());
        if num.is_empty() {
            return FormalExpFraction::zero(self.dim);
        }
        FormalExpFraction { dim: self.dim, num, den }
    }

    pub fn scale(&self, c: &Rational) -> FormalExpFraction {
        if c.is_zero() {
            return FormalExpFraction::zero(self.dim);
        }
        let num = self.num.iter().map(|(a, x)| (a.clone(), x * c)).collect();
        FormalExpFraction { dim: self.dim, num, den: self.den.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let num: Vec<Value> = self
            .num
            .iter()
            .map(|(a, c)| json!([a, format_rational(c)]))
            .collect();
        json!({ "numerator": num, "denominator": self.den })
    }

    /// Image under the homomorphism fixed by `ratios`. Denominator factors
    /// that do not invert are first cancelled against the numerator when
    /// possible.
    pub fn evaluate<R: RegRing>(&self, ring: &R, ratios: &[R::Ratio]) -> Option<R::Elem> {
        let mut num = self.num.clone();
        let mut factors = Vec::new();
        for g in &self.den {
            match ring.geometric(&ring.character(ratios, g)?) {
                Some(f) => factors.push(f),
                None => num = divide_one_minus(&num, g)?,
            }
        }
        let mut acc = ring.zero();
        for (a, c) in &num {
            let v = ring.value(&ring.character(ratios, a)?)?;
            acc = ring.add(&acc, &ring.scale(&v, c));
        }
        for f in &factors {
            acc = ring.mul(&acc, f);
        }
        Some(acc)
    }
}

impl PartialEq for FormalExpFraction {
    fn eq(&self, other: &FormalExpFraction) -> bool {
        self.dim == other.dim && self.add(&other.scale(&-int(1))).is_zero()
    }
}

/// Universal sum of a polytope function over a lattice.
pub fn s_sigma(c: &PolytopeFunction, lattice: &AffineLattice) -> Result<FormalExpFraction> {
    let mut acc = FormalExpFraction::zero(lattice.rank());
    for (coef, p) in &c.terms {
        for s in decompose_coords(p, lattice)? {
            acc = acc.add(&FormalExpFraction::from_sector(&s).scale(coef));
        }
    }
    Ok(acc)
}

/// Target ring of a regularized sum. `Ratio` carries the images of the
/// lattice generators, which multiply under `character`.
pub trait RegRing {
    type Elem: Clone;
    type Ratio: Clone;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, c: &Rational) -> Self::Elem;
    /// prod_j ratios_j^{v_j}; None when a needed inverse does not exist.
    fn character(&self, ratios: &[Self::Ratio], v: &[i64]) -> Option<Self::Ratio>;
    fn value(&self, r: &Self::Ratio) -> Option<Self::Elem>;
    /// 1/(1 - r); None when 1 - r is not invertible.
    fn geometric(&self, r: &Self::Ratio) -> Option<Self::Elem>;
}

/// sum_{a} c(x0 + E a) prod_j ratios_j^{a_j}, times the apex value.
pub struct RegSumSpec<R: RegRing> {
    pub lattice: AffineLattice,
    pub coefficient: PolytopeFunction,
    pub apex_value: R::Elem,
    pub ratios: Vec<R::Ratio>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RegValue<E> {
    Value(E),
    Divergent,
}

impl<E> RegValue<E> {
    pub fn value(self) -> Option<E> {
        match self {
            RegValue::Value(e) => Some(e),
            RegValue::Divergent => None,
        }
    }
}

fn sector_value<R: RegRing>(ring: &R, ratios: &[R::Ratio], s: &LatticeSector) -> Option<R::Elem> {
    let mut acc = ring.value(&ring.character(ratios, &s.apex)?)?;
    for g in &s.gens {
        acc = ring.mul(&acc, &ring.geometric(&ring.character(ratios, g)?)?);
    }
    Some(acc)
}

pub fn regularized_sum<R: RegRing>(ring: &R, spec: &RegSumSpec<R>) -> Result<RegValue<R::Elem>> {
    if spec.ratios.len() != spec.lattice.rank() {
        return Err(Error::Domain(format!(
            "{} ratios for a rank {} lattice",
            spec.ratios.len(),
            spec.lattice.rank()
        )));
    }
    let mut acc = Some(ring.zero());
    for (coef, p) in &spec.coefficient.terms {
        for s in decompose_coords(p, &spec.lattice)? {
            acc = match (acc, sector_value(ring, &spec.ratios, &s)) {
                (Some(a), Some(v)) => Some(ring.add(&a, &ring.scale(&v, coef))),
                _ => None,
            };
            if acc.is_none() {
                break;
            }
        }
    }
    let total = match acc {
        Some(t) => t,
        None => {
            let universal = s_sigma(&spec.coefficient, &spec.lattice)?;
            if universal.is_zero() {
                ring.zero()
            } else {
                match universal.evaluate(ring, &spec.ratios) {
                    Some(t) => t,
                    None => return Ok(RegValue::Divergent),
                }
            }
        }
    };
    Ok(RegValue::Value(ring.mul(&spec.apex_value, &total)))
}

/// Q with ratios in Q.
#[derive(Clone, Copy, Debug, Default)]
pub struct RationalField;

impl RegRing for RationalField {
    type Elem = Rational;
    type Ratio = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }

    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }

    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }

    fn scale(&self, a: &Rational, c: &Rational) -> Rational {
        a * c
    }

    fn character(&self, ratios: &[Rational], v: &[i64]) -> Option<Rational> {
        let mut acc = Rational::one();
        for (q, e) in ratios.iter().zip(v) {
            if q.is_zero() && *e < 0 {
                return None;
            }
            acc *= num_traits::pow::Pow::pow(q, *e as i32);
        }
        Some(acc)
    }

    fn value(&self, r: &Rational) -> Option<Rational> {
        Some(r.clone())
    }

    fn geometric(&self, r: &Rational) -> Option<Rational> {
        let d = Rational::one() - r;
        (!d.is_zero()).then(|| d.recip())
    }
}

/// Univariate rational function num(x)/den(x), coefficients lowest first.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: Vec<Rational>,
    pub den: Vec<Rational>,
}

fn poly_trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let z = Rational::zero();
    poly_trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(out)
}

impl RatFunc {
    pub fn constant(c: Rational) -> RatFunc {
        RatFunc { num: poly_trim(vec![c]), den: vec![Rational::one()] }
    }

    /// The variable x.
    pub fn x() -> RatFunc {
        RatFunc { num: vec![Rational::zero(), Rational::one()], den: vec![Rational::one()] }
    }

    pub fn from_polys(num: Vec<Rational>, den: Vec<Rational>) -> Result<RatFunc> {
        let den = poly_trim(den);
        if den.is_empty() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(RatFunc { num: poly_trim(num), den })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        RatFunc {
            num: poly_add(&poly_mul(&self.num, &o.den), &poly_mul(&o.num, &self.den)),
            den: poly_mul(&self.den, &o.den),
        }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc { num: poly_mul(&self.num, &o.num), den: poly_mul(&self.den, &o.den) }
    }

    pub fn recip(&self) -> Option<RatFunc> {
        (!self.is_zero()).then(|| RatFunc { num: self.den.clone(), den: self.num.clone() })
    }

    pub fn scale(&self, c: &Rational) -> RatFunc {
        self.mul(&RatFunc::constant(c.clone()))
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &RatFunc) -> bool {
        poly_mul(&self.num, &o.den) == poly_mul(&o.num, &self.den)
    }
}

/// Q(x) with ratios in Q(x).
#[derive(Clone, Copy, Debug, Default)]
pub struct RationalFunctions;

impl RegRing for RationalFunctions {
    type Elem = RatFunc;
    type Ratio = RatFunc;

    fn zero(&self) -> RatFunc {
        RatFunc::constant(Rational::zero())
    }

    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a.add(b)
    }

    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a.mul(b)
    }

    fn scale(&self, a: &RatFunc, c: &Rational) -> RatFunc {
        a.scale(c)
    }

    fn character(&self, ratios: &[RatFunc], v: &[i64]) -> Option<RatFunc> {
        let mut acc = RatFunc::constant(Rational::one());
        for (q, e) in ratios.iter().zip(v) {
            let base = if *e < 0 { q.recip()? } else { q.clone() };
            for _ in 0..e.unsigned_abs() {
                acc = acc.mul(&base);
            }
        }
        Some(acc)
    }

    fn value(&self, r: &RatFunc) -> Option<RatFunc> {
        Some(r.clone())
    }

    fn geometric(&self, r: &RatFunc) -> Option<RatFunc> {
        RatFunc::constant(Rational::one()).add(&r.scale(&-int(1))).recip()
    }
}

/// Truncated Laurent series; a ratio is stored by its logarithm X and
/// stands for e^X. All products are truncated at `cap`, so a result is
/// exact only below `cap` minus the lowers of the inverted factors.
#[derive(Clone, Debug)]
pub struct ExpLaurent {
    pub nv: usize,
    pub cap: Exps,
}

impl RegRing for ExpLaurent {
    type Elem = Laurent;
    type Ratio = Laurent;

    fn zero(&self) -> Laurent {
        Laurent::zero(self.nv)
    }

    fn add(&self, a: &Laurent, b: &Laurent) -> Laurent {
        a.add(b)
    }

    fn mul(&self, a: &Laurent, b: &Laurent) -> Laurent {
        a.mul(b, &self.cap)
    }

    fn scale(&self, a: &Laurent, c: &Rational) -> Laurent {
        a.scale(c)
    }

    fn character(&self, ratios: &[Laurent], v: &[i64]) -> Option<Laurent> {
        let mut acc = Laurent::zero(self.nv);
        for (x, e) in ratios.iter().zip(v) {
            if *e != 0 {
                acc = acc.add(&x.scale(&int(*e)));
            }
        }
        Some(acc)
    }

    fn value(&self, x: &Laurent) -> Option<Laurent> {
        if x.is_zero() {
            return Some(Laurent::constant(self.nv, SuperPoly::one()));
        }
        Laurent::exp_series(x, &self.cap).ok()
    }

    fn geometric(&self, x: &Laurent) -> Option<Laurent> {
        if x.is_zero() {
            return None;
        }
        Laurent::expand_reciprocal_one_minus_exp(x, &self.cap).ok()
    }
}
