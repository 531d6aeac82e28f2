//! The explicit vertex algebras on the homology of the stacks of sheaves
//! and pairs: Euler forms, translation operators, Y, Lie brackets, gauge
//! fixing and the tau map.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{factorial_q, int, Rational};
use crate::laurent::Laurent;
use crate::superalg::{Family, Mono, SuperPoly, Var, S101, S122};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KClass {
    pub r: i64,
    pub d: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairKClass {
    pub base: KClass,
    pub e: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassTag {
    Sheaf(KClass),
    Pair(PairKClass),
}

impl ClassTag {
    pub fn sheaf(r: i64, d: i64) -> ClassTag {
        ClassTag::Sheaf(KClass { r, d })
    }

    pub fn pair(r: i64, d: i64, e: i64) -> ClassTag {
        ClassTag::Pair(PairKClass { base: KClass { r, d }, e })
    }

    pub fn rde(&self) -> (i64, i64, i64) {
        match self {
            ClassTag::Sheaf(k) => (k.r, k.d, 0),
            ClassTag::Pair(p) => (p.base.r, p.base.d, p.e),
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, ClassTag::Pair(_))
    }

    pub fn add(&self, other: &ClassTag) -> ClassTag {
        let (r, d, e) = self.rde();
        let (r2, d2, e2) = other.rde();
        if self.is_pair() || other.is_pair() {
            ClassTag::pair(r + r2, d + d2, e + e2)
        } else {
            ClassTag::sheaf(r + r2, d + d2)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CurveContext {
    pub g: u16,
    pub nu: i64,
}

impl CurveContext {
    pub fn new(g: u16) -> CurveContext {
        CurveContext { g, nu: 0 }
    }

    pub fn with_nu(g: u16, nu: i64) -> CurveContext {
        CurveContext { g, nu }
    }

    /// Smallest nu with r nu + d > 0.
    pub fn minimal_nu(r: i64, d: i64) -> i64 {
        assert!(r > 0);
        crate::exact::floor_div(-d, r) + 1
    }

    /// M_{j,k}^{j',k'}, extended to the pair index (+,0) when `pair`.
    pub fn m_entry(&self, a: (u16, u8), b: (u16, u8), pair: bool) -> Rational {
        let g = self.g;
        let plus = |x: (u16, u8)| x == (0, 0);
        if plus(a) || plus(b) {
            if !pair {
                return Rational::zero();
            }
            return match (plus(a), plus(b)) {
                (true, true) => Rational::one(),
                (false, true) => Rational::zero(),
                (true, false) => match b {
                    (1, 0) => int(-self.nu),
                    (1, 2) => int(-1),
                    _ => Rational::zero(),
                },
                _ => unreachable!(),
            };
        }
        match (a, b) {
            ((1, 0), (1, 0)) => int(1 - g as i64),
            ((1, 0), (1, 2)) | ((1, 2), (1, 0)) => Rational::one(),
            ((j, 1), (jp, 1)) if j <= g && jp == j + g => Rational::one(),
            ((j, 1), (jp, 1)) if j > g && jp + g == j => -Rational::one(),
            _ => Rational::zero(),
        }
    }

    /// Index set J (or its pair extension) as (j, k) with (0, 0) for "+".
    pub fn index_set(&self, pair: bool) -> Vec<(u16, u8)> {
        let mut out = vec![(1, 0), (1, 2)];
        for j in 1..=2 * self.g {
            out.push((j, 1));
        }
        if pair {
            out.push((0, 0));
        }
        out
    }
}

pub fn chi(a: &KClass, b: &KClass, ctx: &CurveContext) -> i64 {
    (1 - ctx.g as i64) * a.r * b.r + a.r * b.d - a.d * b.r
}

pub fn chi_pair(a: &PairKClass, b: &PairKClass, ctx: &CurveContext) -> i64 {
    let (r, d, e) = (a.base.r, a.base.d, a.e);
    let (rp, dp, ep) = (b.base.r, b.base.d, b.e);
    (1 - ctx.g as i64) * r * rp + (r - e) * dp - (d + ctx.nu * e) * rp + e * ep
}

fn chi_tags(a: &ClassTag, b: &ClassTag, ctx: &CurveContext) -> i64 {
    let (r, d, e) = a.rde();
    let (rp, dp, ep) = b.rde();
    chi_pair(
        &PairKClass { base: KClass { r, d }, e },
        &PairKClass { base: KClass { r: rp, d: dp }, e: ep },
        ctx,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gauge {
    Xi,
    Normal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyClass {
    pub tag: ClassTag,
    pub rep: SuperPoly,
    pub gauge: Gauge,
    pub nu: Option<i64>,
}

impl HomologyClass {
    pub fn new(tag: ClassTag, rep: SuperPoly, gauge: Gauge) -> HomologyClass {
        HomologyClass { tag, rep, gauge, nu: None }
    }

    pub fn to_json(&self) -> Value {
        let (r, d, e) = self.tag.rde();
        let kclass = if self.tag.is_pair() { json!([r, d, e]) } else { json!([r, d]) };
        let gauge = match self.gauge {
            Gauge::Xi => "xi",
            Gauge::Normal => "normal",
        };
        let mut v = json!({"kclass": kclass, "gauge": gauge, "poly": self.rep.to_json()});
        if let Some(nu) = self.nu {
            v["nu"] = json!(nu);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<HomologyClass> {
        let bad = |w: &str| Error::Parse(format!("class json: {w}"));
        let k = v.get("kclass").and_then(Value::as_array).ok_or_else(|| bad("kclass"))?;
        let nums: Vec<i64> = k.iter().map(|x| x.as_i64().ok_or_else(|| bad("kclass entry"))).collect::<Result<_>>()?;
        let tag = match nums.as_slice() {
            [r, d] => ClassTag::sheaf(*r, *d),
            [r, d, e] => ClassTag::pair(*r, *d, *e),
            _ => return Err(bad("kclass length")),
        };
        let gauge = match v.get("gauge").and_then(Value::as_str) {
            Some("xi") => Gauge::Xi,
            Some("normal") => Gauge::Normal,
            _ => return Err(bad("gauge")),
        };
        let rep = SuperPoly::from_json(v.get("poly").ok_or_else(|| bad("poly"))?)?;
        let nu = v.get("nu").and_then(Value::as_i64);
        Ok(HomologyClass { tag, rep, gauge, nu })
    }
}

/// sum_v s_{v+1} d/ds_v over the variables selected by `keep`.
fn shift_derivation(p: &SuperPoly, keep: impl Fn(&Var) -> bool) -> SuperPoly {
    let mut out = SuperPoly::zero();
    for (m, c) in &p.terms {
        let mut odd_before = 0usize;
        for (idx, (v, e)) in m.0.iter().enumerate() {
            if keep(v) {
                let mut rest = m.0.clone();
                let mut coeff = c * int(*e as i64);
                if v.is_odd() {
                    if odd_before % 2 == 1 {
                        coeff = -coeff;
                    }
                    rest.remove(idx);
                } else if *e == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 -= 1;
                }
                if let Some((neg, mono)) = Mono::var(v.shifted(1)).mul(&Mono(rest)) {
                    out.add_term(mono, if neg { -coeff } else { coeff });
                }
            }
            if v.is_odd() {
                odd_before += 1;
            }
        }
    }
    out
}

fn is_unprimed(v: &Var) -> bool {
    v.j < PRIME && v.family != Family::Alpha
}

/// D_{(r,d)} (or the pair operator when e != 0 or the tag is a pair tag).
pub fn apply_d(rep: &SuperPoly, tag: &ClassTag) -> SuperPoly {
    apply_d_on(rep, tag, is_unprimed)
}

fn apply_d_on(rep: &SuperPoly, tag: &ClassTag, keep: impl Fn(&Var) -> bool) -> SuperPoly {
    let (r, d, e) = tag.rde();
    let mut mult = SuperPoly::zero();
    mult.add_term(Mono::var(S101), int(r));
    mult.add_term(Mono::var(S122), int(d));
    mult.add_term(Mono::var(Var::pair(1)), int(e));
    mult.mul(rep) + shift_derivation(rep, keep)
}

/// sum_n z^n/n! D^n rep in variable `var` of an `nv`-variable series.
pub fn exp_z_d(rep: &SuperPoly, tag: &ClassTag, nv: usize, var: usize, cap: &[i32]) -> Laurent {
    let max_n = cap[var..].iter().copied().min().unwrap_or(0);
    let mut out = Laurent::zero(nv);
    let mut cur = rep.clone();
    for n in 0..=max_n.max(-1) {
        if n < 0 || cur.is_zero() {
            break;
        }
        let mut a = vec![0; nv];
        a[var] = n;
        out.add_term(a, &cur);
        cur = apply_d(&cur, tag).scale(&Rational::new(1.into(), (n as i64 + 1).into()));
    }
    out
}

const PRIME: u16 = 500;

fn prime(v: &Var) -> Var {
    Var { j: v.j + PRIME, ..*v }
}

fn unprime_rule(p: &SuperPoly) -> BTreeMap<Var, SuperPoly> {
    let mut rule = BTreeMap::new();
    for m in p.terms.keys() {
        for (v, _) in &m.0 {
            if v.j >= PRIME {
                rule.insert(*v, SuperPoly::var(Var { j: v.j - PRIME, ..*v }));
            }
        }
    }
    rule
}

fn prime_poly(p: &SuperPoly) -> SuperPoly {
    p.map_terms(|m, c| Some((Mono(m.0.iter().map(|(v, e)| (prime(v), *e)).collect()), c.clone())))
}

fn var_of(jk: (u16, u8), l: i32, primed: bool) -> Var {
    let v = if jk == (0, 0) { Var::pair(l) } else { Var::sheaf(jk.0, jk.1, l) };
    if primed {
        prime(&v)
    } else {
        v
    }
}

/// Boundary value of the derivation at l = k/2, if any.
fn boundary_scalar(jk: (u16, u8), tag: &ClassTag) -> Option<i64> {
    let (r, d, e) = tag.rde();
    match jk {
        (1, 0) => Some(r),
        (1, 2) => Some(d),
        (0, 0) => Some(e),
        _ => None,
    }
}

fn lowest_level(jk: (u16, u8)) -> i32 {
    match jk.1 {
        0 => 0,
        1 => 1,
        _ => 1,
    }
}

struct Contraction {
    left: (u16, u8),
    right: (u16, u8),
    coeff: Rational,
}

fn contractions(ctx: &CurveContext, pair: bool) -> Vec<Contraction> {
    let idx = ctx.index_set(pair);
    let mut out = Vec::new();
    for &a in &idx {
        for &b in &idx {
            if (a.1 + b.1) % 2 == 1 {
                continue;
            }
            let kk = a.1 as i64 * b.1 as i64 + (a.1 as i64 + b.1 as i64) / 2;
            let sign = if kk % 2 == 0 { Rational::one() } else { -Rational::one() };
            let c = ctx.m_entry(a, b, pair) + sign * ctx.m_entry(b, a, pair);
            if !c.is_zero() {
                out.push(Contraction { left: a, right: b, coeff: c });
            }
        }
    }
    out
}

/// The operator d_{jkl} applied to p, with boundary scalars at l = k/2.
fn partial(p: &SuperPoly, jk: (u16, u8), l: i32, tag: &ClassTag, primed: bool) -> SuperPoly {
    if 2 * l == jk.1 as i32 {
        match boundary_scalar(jk, tag) {
            Some(s) => p.scale(&int(s)),
            None => SuperPoly::zero(),
        }
    } else {
        p.derive(&var_of(jk, l, primed))
    }
}

fn levels_present(p: &SuperPoly, jk: (u16, u8), primed: bool) -> Vec<i32> {
    let mut ls: Vec<i32> = Vec::new();
    if 2 * lowest_level(jk) == jk.1 as i32 || jk.1 == 0 {
        ls.push(jk.1 as i32 / 2);
    }
    for m in p.terms.keys() {
        for (v, _) in &m.0 {
            let base = if primed { v.j >= PRIME } else { v.j < PRIME };
            let vj = if primed && v.j >= PRIME { v.j - PRIME } else { v.j };
            let vjk = if v.family == Family::Pair { (0, 0) } else { (vj, v.k) };
            if base && v.family != Family::Alpha && vjk == jk {
                ls.push(v.l);
            }
        }
    }
    ls.sort_unstable();
    ls.dedup();
    ls
}

/// Y(A, z) B (sheaf or pair version) with z-exponents up to `cap`.
pub fn vertex_y_general(a: &HomologyClass, b: &HomologyClass, ctx: &CurveContext, cap: i32) -> Result<Laurent> {
    let pair = a.tag.is_pair() || b.tag.is_pair();
    let ta = a.tag;
    let tb = b.tag;
    let chi_ab = chi_tags(&ta, &tb, ctx);
    let chi_ba = chi_tags(&tb, &ta, ctx);
    let z_shift = (chi_ab + chi_ba) as i32;
    let sign = if chi_ab.rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };

    // exp(Omega) on p(s) p'(s') as a series in z^{-1}
    let ops = contractions(ctx, pair);
    let start = a.rep.mul(&prime_poly(&b.rep));
    let mut by_power: BTreeMap<i32, SuperPoly> = BTreeMap::new();
    by_power.insert(0, start.clone());
    let mut current: BTreeMap<i32, SuperPoly> = BTreeMap::from([(0, start)]);
    let mut m = 0i64;
    while !current.is_empty() {
        m += 1;
        let mut next: BTreeMap<i32, SuperPoly> = BTreeMap::new();
        for (pw, p) in &current {
            for op in &ops {
                for l in levels_present(p, op.left, false) {
                    let left = partial(p, op.left, l, &ta, false);
                    if left.is_zero() {
                        continue;
                    }
                    for lp in levels_present(&left, op.right, true) {
                        let n2 = 2 * (l + lp) - (op.left.1 + op.right.1) as i32;
                        if n2 <= 0 {
                            continue;
                        }
                        let n = n2 / 2;
                        let both = partial(&left, op.right, lp, &tb, true);
                        if both.is_zero() {
                            continue;
                        }
                        let sgn_l = if l % 2 == 0 { int(-1) } else { int(1) };
                        let c = sgn_l * factorial_q((n - 1) as u64) * &op.coeff / int(m);
                        next.entry(pw - n).or_default().add_scaled(&both, &c);
                    }
                }
            }
        }
        next.retain(|_, p| !p.is_zero());
        for (pw, p) in &next {
            *by_power.entry(*pw).or_default() += p;
        }
        current = next;
    }
    by_power.retain(|_, p| !p.is_zero());

    // exp(z D_alpha) on the unprimed variables, then s' = s
    let mut out = Laurent::zero(1);
    for (pw, p) in &by_power {
        let mut cur = p.clone();
        let mut n = 0i32;
        while pw + n + z_shift <= cap && !cur.is_zero() {
            let rule = unprime_rule(&cur);
            let merged = cur.substitute(&rule)?;
            out.add_term(vec![pw + n + z_shift], &merged.scale(&sign));
            n += 1;
            cur = apply_d_on(&cur, &ta, is_unprimed).scale(&Rational::new(1.into(), (n as i64).into()));
        }
    }
    Ok(out)
}

pub fn vertex_y(a: &HomologyClass, b: &HomologyClass, ctx: &CurveContext, cap: i32) -> Result<Laurent> {
    if a.tag.is_pair() || b.tag.is_pair() {
        return Err(Error::Domain("sheaf vertex operation on pair classes".into()));
    }
    vertex_y_general(a, b, ctx, cap)
}

pub fn vertex_y_pair(a: &HomologyClass, b: &HomologyClass, ctx: &CurveContext, cap: i32) -> Result<Laurent> {
    let lift = |c: &HomologyClass| {
        let (r, d, e) = c.tag.rde();
        HomologyClass { tag: ClassTag::pair(r, d, e), ..c.clone() }
    };
    vertex_y_general(&lift(a), &lift(b), ctx, cap)
}

/// res_z Y(A, z) B, raw gauge.
pub fn lie_bracket(a: &HomologyClass, b: &HomologyClass, ctx: &CurveContext) -> Result<HomologyClass> {
    let y = vertex_y_general(a, b, ctx, -1)?;
    let rep = y.coefficient(&[-1]);
    let mut out = HomologyClass::new(a.tag.add(&b.tag), rep, Gauge::Normal);
    out.nu = a.nu.or(b.nu);
    Ok(out)
}

/// sum_i 1/(i! (-r)^i) D^i (d/ds_{1,0,1})^i.
pub fn xi(rep: &SuperPoly, tag: &ClassTag) -> Result<SuperPoly> {
    let (r, _, _) = tag.rde();
    if r == 0 {
        return Err(Error::Domain("xi needs nonzero rank".into()));
    }
    let mut out = SuperPoly::zero();
    let mut derived = rep.clone();
    let mut i = 0u64;
    while !derived.is_zero() {
        let mut term = derived.clone();
        for _ in 0..i {
            term = apply_d(&term, tag);
        }
        let denom = factorial_q(i) * int(-r).pow(i as i32);
        out.add_scaled(&term, &denom.recip());
        derived = derived.derive(&S101);
        i += 1;
    }
    Ok(out)
}

pub fn xi_class(c: &HomologyClass) -> Result<HomologyClass> {
    Ok(HomologyClass { rep: xi(&c.rep, &c.tag)?, gauge: Gauge::Xi, ..c.clone() })
}

/// Monomials of a given degree in the variables of genus g.
pub fn monomials_of_degree(g: u16, degree: i64, pair: bool) -> Vec<Mono> {
    let mut vars: Vec<Var> = Vec::new();
    let maxl = (degree / 2 + 2) as i32;
    for l in 1..=maxl {
        vars.push(Var::sheaf(1, 0, l));
        if l >= 2 {
            vars.push(Var::sheaf(1, 2, l));
        }
        for j in 1..=2 * g {
            vars.push(Var::sheaf(j, 1, l));
        }
        if pair {
            vars.push(Var::pair(l));
        }
    }
    vars.retain(|v| v.degree() <= degree && v.degree() > 0);
    vars.sort();
    let mut out = Vec::new();
    fn rec(vars: &[Var], idx: usize, left: i64, cur: &mut Vec<(Var, i32)>, out: &mut Vec<Mono>) {
        if left == 0 {
            out.push(Mono(cur.clone()));
            return;
        }
        if idx >= vars.len() {
            return;
        }
        let v = vars[idx];
        let dv = v.degree();
        let max_e = if v.is_odd() { 1 } else { left / dv };
        for e in (0..=max_e).rev() {
            if e * dv > left {
                continue;
            }
            if e > 0 {
                cur.push((v, e as i32));
            }
            rec(vars, idx + 1, left - e * dv, cur, out);
            if e > 0 {
                cur.pop();
            }
        }
    }
    if degree == 0 {
        return vec![Mono::one()];
    }
    if degree < 0 {
        return out;
    }
    rec(&vars, 0, degree, &mut Vec::new(), &mut out);
    out
}

/// Echelon basis of D(degree - 2) inside degree, keyed by pivot monomial.
type Echelon = BTreeMap<Mono, SuperPoly>;

fn echelon_cache() -> &'static Mutex<HashMap<(u16, ClassTag, i64), Arc<Echelon>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u16, ClassTag, i64), Arc<Echelon>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn image_echelon(tag: &ClassTag, ctx: &CurveContext, degree: i64) -> Arc<Echelon> {
    let key = (ctx.g, *tag, degree);
    if let Some(e) = echelon_cache().lock().unwrap().get(&key) {
        return e.clone();
    }
    let mut basis: Echelon = BTreeMap::new();
    for m in monomials_of_degree(ctx.g, degree - 2, tag.is_pair()) {
        let mut v = apply_d(&SuperPoly::term(Rational::one(), m), tag);
        v = reduce_by(&v, &basis);
        if let Some((pivot, c)) = v.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            let v = v.scale(&c.recip());
            for row in basis.values_mut() {
                let k = row.coeff(&pivot);
                if !k.is_zero() {
                    row.add_scaled(&v, &-k);
                }
            }
            basis.insert(pivot, v);
        }
    }
    let arc = Arc::new(basis);
    echelon_cache().lock().unwrap().insert(key, arc.clone());
    arc
}

fn reduce_by(p: &SuperPoly, basis: &Echelon) -> SuperPoly {
    let mut out = p.clone();
    for (pivot, row) in basis.iter().rev() {
        let k = out.coeff(pivot);
        if !k.is_zero() {
            out.add_scaled(row, &-k);
        }
    }
    out
}

/// Canonical representative of rep + im D.
pub fn reduce_mod_im_d(rep: &SuperPoly, tag: &ClassTag, ctx: &CurveContext) -> Result<SuperPoly> {
    let (r, _, _) = tag.rde();
    if r != 0 {
        return xi(rep, tag);
    }
    let mut out = SuperPoly::zero();
    for deg in rep.degrees() {
        let part = rep.map_terms(|m, c| (m.degree() == deg).then(|| (m.clone(), c.clone())));
        let basis = image_echelon(tag, ctx, deg);
        out += &reduce_by(&part, &basis);
    }
    Ok(out)
}

pub fn equal_mod_im_d(a: &HomologyClass, b: &HomologyClass, ctx: &CurveContext) -> Result<bool> {
    if a.tag != b.tag {
        return Ok(false);
    }
    Ok(reduce_mod_im_d(&a.rep, &a.tag, ctx)? == reduce_mod_im_d(&b.rep, &b.tag, ctx)?)
}

/// tau: xi-gauge, then (-d/ds_{+,0,1})^{r nu + d - 1}, then s_{+,0,l} = 0.
pub fn tau(c: &HomologyClass, ctx: &CurveContext) -> Result<HomologyClass> {
    let (r, d, e) = c.tag.rde();
    if !c.tag.is_pair() || e != 1 {
        return Err(Error::Domain("tau needs a pair class with e = 1".into()));
    }
    if r <= 0 {
        return Err(Error::Domain("tau needs positive rank".into()));
    }
    let n = r * ctx.nu + d;
    if n <= 0 {
        return Err(Error::Domain(format!("tau needs r nu + d > 0, got {n}")));
    }
    let mut p = xi(&c.rep, &c.tag)?;
    for _ in 0..n - 1 {
        p = -p.derive(&Var::pair(1));
    }
    let p = p.drop_family(Family::Pair);
    Ok(HomologyClass { tag: ClassTag::sheaf(r, d), rep: p, gauge: Gauge::Xi, nu: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn s(j: u16, k: u8, l: i32) -> SuperPoly {
        SuperPoly::var(Var::sheaf(j, k, l))
    }

    fn sigma_minus_s122(g: u16) -> SuperPoly {
        let mut acc = SuperPoly::one();
        for j in 1..=g {
            acc = acc.mul(&(-s(1, 2, 2) + s(j, 1, 1).mul(&s(j + g, 1, 1))));
        }
        acc
    }

    #[test]
    fn chi_examples() {
        let c2 = CurveContext::new(2);
        assert_eq!(chi(&KClass { r: 1, d: 0 }, &KClass { r: 1, d: 0 }, &c2), -1);
        assert_eq!(chi(&KClass { r: 0, d: 3 }, &KClass { r: 0, d: -2 }, &c2), 0);
        let c0 = CurveContext::new(0);
        assert_eq!(chi(&KClass { r: 2, d: 1 }, &KClass { r: 1, d: 1 }, &c0), 3);
    }

    #[test]
    fn chi_pair_examples() {
        let ctx = CurveContext::with_nu(2, 3);
        let a = PairKClass { base: KClass { r: 2, d: 1 }, e: 0 };
        let b = PairKClass { base: KClass { r: 1, d: -1 }, e: 0 };
        assert_eq!(chi_pair(&a, &b, &ctx), chi(&a.base, &b.base, &ctx));
        let plus = PairKClass { base: KClass { r: 0, d: 0 }, e: 1 };
        let sheaf = PairKClass { base: KClass { r: 1, d: 5 }, e: 0 };
        assert_eq!(chi_pair(&plus, &sheaf, &ctx), -5 - 3);
        assert_eq!(chi_pair(&plus, &plus, &ctx), 1);
    }

    #[test]
    fn d_examples() {
        assert_eq!(apply_d(&SuperPoly::one(), &ClassTag::sheaf(1, 0)), s(1, 0, 1));
        assert_eq!(apply_d(&s(1, 2, 2), &ClassTag::sheaf(0, 0)), s(1, 2, 3));
        let lhs = apply_d(&s(1, 1, 1), &ClassTag::sheaf(2, 3));
        let rhs = (s(1, 0, 1).scale(&int(2)) + s(1, 2, 2).scale(&int(3))).mul(&s(1, 1, 1)) + s(1, 1, 2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn exp_z_d_examples() {
        let one = exp_z_d(&SuperPoly::one(), &ClassTag::sheaf(0, 0), 1, 0, &[5]);
        assert_eq!(one, Laurent::one(1));
        let e = exp_z_d(&SuperPoly::one(), &ClassTag::sheaf(1, 4), 1, 0, &[1]);
        let mut expected = Laurent::one(1);
        expected.add_term(vec![1], &(s(1, 0, 1) + s(1, 2, 2).scale(&int(4))));
        assert_eq!(e, expected);
    }

    #[test]
    fn exp_z_d_zassenhaus() {
        // exp(z D_{(r+r',d+d')}) 1 = exp(sum z^l/l! (r' s_{1,0,l} + d' s_{1,2,l+1})) exp(z D_{(r,d)}) 1
        let cap = [5];
        let (r, d, rp, dp) = (1, 2, 2, -1);
        let lhs = exp_z_d(&SuperPoly::one(), &ClassTag::sheaf(r + rp, d + dp), 1, 0, &cap);
        let mut x = Laurent::zero(1);
        for l in 1..=5 {
            let c = factorial_q(l as u64).recip();
            x.add_term(vec![l], &(s(1, 0, l).scale(&int(rp)) + s(1, 2, l + 1).scale(&int(dp))).scale(&c));
        }
        let rhs = Laurent::exp_series(&x, &cap)
            .unwrap()
            .mul(&exp_z_d(&SuperPoly::one(), &ClassTag::sheaf(r, d), 1, 0, &cap), &cap);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn xi_examples() {
        let tag = ClassTag::sheaf(1, 3);
        assert_eq!(xi(&s(1, 2, 2), &tag).unwrap(), s(1, 2, 2));
        assert_eq!(xi(&s(1, 0, 1), &tag).unwrap(), s(1, 2, 2).scale(&int(-3)));
        assert!(xi(&s(1, 0, 1), &ClassTag::sheaf(0, 1)).is_err());
    }

    #[test]
    fn reduce_examples() {
        let ctx = CurveContext::new(1);
        let tag = ClassTag::sheaf(0, 2);
        let d1 = apply_d(&SuperPoly::one(), &tag);
        assert!(reduce_mod_im_d(&d1, &tag, &ctx).unwrap().is_zero());
        let rep = s(1, 0, 1).scale(&int(5)) + s(1, 2, 2).scale(&int(7)) + s(1, 1, 1).mul(&s(2, 1, 1));
        let nf = reduce_mod_im_d(&rep, &tag, &ctx).unwrap();
        assert!(!nf.mentions(&S122));
        assert_eq!(nf, s(1, 0, 1).scale(&int(5)) + s(1, 1, 1).mul(&s(2, 1, 1)));
        let tag1 = ClassTag::sheaf(2, 1);
        assert_eq!(reduce_mod_im_d(&s(1, 0, 1), &tag1, &ctx).unwrap(), xi(&s(1, 0, 1), &tag1).unwrap());
    }

    #[test]
    fn pair_vertex_reproduces_rank_one_pair_integrand() {
        // res_w of Y'(e^{((0,0),1)}, -w) applied to the rank-1 class
        for (g, nu, d) in [(1u16, 0i64, 1i64), (1, 1, 0), (2, 1, 1), (0, 0, 2)] {
            let ctx = CurveContext::with_nu(g, nu);
            let plus = HomologyClass::new(ClassTag::pair(0, 0, 1), SuperPoly::one(), Gauge::Normal);
            let fund = HomologyClass::new(ClassTag::sheaf(1, d), sigma_minus_s122(g), Gauge::Xi);
            let bracket = lie_bracket(&plus, &fund, &ctx).unwrap();
            // -res_z Y(A, z) = res_w Y(A, -w), compared against the direct formula
            let expected = rank_one_pair_oracle(g, nu + d);
            let lhs = xi(&(-bracket.rep), &bracket.tag).unwrap();
            assert_eq!(lhs, expected, "g={g} nu={nu} d={d}");
        }
    }

    /// res_w w^{-n} rho(w) sigma(1/w - s_{1,2,2}) by direct expansion.
    fn rank_one_pair_oracle(g: u16, n: i64) -> SuperPoly {
        let mut acc = SuperPoly::zero();
        // sigma(1/w - s) = prod_j (w^{-1} + (-s + odd_j)) = sum_k w^{-k} e_{g-k}(...)
        let factors: Vec<SuperPoly> = (1..=g).map(|j| -s(1, 2, 2) + s(j, 1, 1).mul(&s(j + g, 1, 1))).collect();
        let mut by_k: BTreeMap<usize, SuperPoly> = BTreeMap::from([(0, SuperPoly::one())]);
        for f in &factors {
            let mut next: BTreeMap<usize, SuperPoly> = BTreeMap::new();
            for (k, p) in &by_k {
                *next.entry(k + 1).or_default() += p;
                *next.entry(*k).or_default() += &p.mul(f);
            }
            by_k = next;
        }
        // rho(w) coefficients
        let max = n + g as i64 + 2;
        let mut x = Laurent::zero(1);
        for l in 1..=max as i32 {
            let c = if l % 2 == 0 { int(1) } else { int(-1) };
            x.add_term(vec![l], &SuperPoly::var(Var::pair(l)).scale(&(c / factorial_q(l as u64))));
        }
        let rho = Laurent::exp_series(&x, &[max as i32]).unwrap();
        for (k, p) in &by_k {
            let need = n + *k as i64 - 1;
            if need < 0 {
                continue;
            }
            acc += &rho.coefficient(&[need as i32]).mul(p);
        }
        acc
    }

    #[test]
    fn g1_pair_rank_one_value() {
        let expected = -s(1, 2, 2) + s(1, 1, 1).mul(&s(2, 1, 1)) - SuperPoly::var(Var::pair(1));
        assert_eq!(rank_one_pair_oracle(1, 1), expected);
        assert_eq!(rank_one_pair_oracle(0, 1), SuperPoly::one());
    }

    #[test]
    fn rank_zero_bracket_vanishes() {
        for g in 0..=2u16 {
            let ctx = CurveContext::new(g);
            let mut rep = s(1, 0, 1);
            for j in 1..=g {
                rep += &s(j, 1, 1).mul(&s(j + g, 1, 1));
            }
            let a = HomologyClass::new(ClassTag::sheaf(0, 1), rep, Gauge::Normal);
            let br = lie_bracket(&a, &a, &ctx).unwrap();
            assert!(reduce_mod_im_d(&br.rep, &br.tag, &ctx).unwrap().is_zero(), "g={g}");
        }
    }

    #[test]
    fn tau_rejects_bad_input() {
        let ctx = CurveContext::with_nu(1, 0);
        let c = HomologyClass::new(ClassTag::pair(1, 0, 2), SuperPoly::one(), Gauge::Xi);
        assert!(tau(&c, &ctx).is_err());
        let c = HomologyClass::new(ClassTag::pair(1, 0, 1), SuperPoly::one(), Gauge::Xi);
        assert!(tau(&c, &ctx).is_err());
    }

    #[test]
    fn tau_inverts_bracket_rank_one() {
        for (g, d) in [(1u16, 0i64), (1, 2), (2, 1), (2, -1)] {
            let nu = CurveContext::minimal_nu(1, d) + 1;
            let ctx = CurveContext::with_nu(g, nu);
            let plus = HomologyClass::new(ClassTag::pair(0, 0, 1), SuperPoly::one(), Gauge::Normal);
            let fund = HomologyClass::new(ClassTag::sheaf(1, d), sigma_minus_s122(g), Gauge::Xi);
            let mut br = lie_bracket(&plus, &fund, &ctx).unwrap();
            br.rep = -br.rep;
            let back = tau(&br, &ctx).unwrap();
            assert_eq!(back.rep, fund.rep, "g={g} d={d}");
        }
    }

    #[test]
    fn json_roundtrip_class() {
        let c = HomologyClass { tag: ClassTag::pair(2, 1, 1), rep: s(1, 2, 2).scale(&rat(1, 3)), gauge: Gauge::Xi, nu: Some(2) };
        assert_eq!(HomologyClass::from_json(&c.to_json()).unwrap(), c);
    }

    fn arb_rep() -> impl Strategy<Value = SuperPoly> {
        // homogeneous degree-4 polynomials in a few variables
        proptest::collection::vec(-3i64..4, 6).prop_map(|c| {
            s(1, 0, 1).pow(2).scale(&int(c[0]))
                + s(1, 0, 1).mul(&s(1, 2, 2)).scale(&int(c[1]))
                + s(1, 0, 2).scale(&int(c[2]))
                + s(1, 2, 3).scale(&int(c[3]))
                + s(1, 0, 1).mul(&s(1, 1, 1)).mul(&s(2, 1, 1)).scale(&int(c[4]))
                + s(1, 1, 1).mul(&s(2, 1, 2)).scale(&int(c[5]))
        })
    }

    proptest! {
        #[test]
        fn xi_kills_s101_and_is_idempotent(rep in arb_rep(), r in 1i64..4, d in -3i64..4) {
            let tag = ClassTag::sheaf(r, d);
            let x = xi(&rep, &tag).unwrap();
            prop_assert!(x.derive(&S101).is_zero());
            prop_assert_eq!(xi(&x, &tag).unwrap(), x.clone());
            // same coset: difference reduces to zero in the rank-0-style normal form
            let ctx = CurveContext::new(1);
            let diff = rep.clone() - x;
            let basis = image_echelon(&tag, &ctx, 4);
            prop_assert!(reduce_by(&diff, &basis).is_zero());
        }

        #[test]
        fn translation_covariance(c in -2i64..3, d in -2i64..3) {
            // Y(D A, z) B = d/dz Y(A, z) B
            let ctx = CurveContext::new(1);
            let ta = ClassTag::sheaf(1, d);
            let a = HomologyClass::new(ta, s(1, 2, 2).scale(&int(c)) + s(1, 0, 2), Gauge::Normal);
            let b = HomologyClass::new(ClassTag::sheaf(1, 0), s(1, 0, 1) + s(1, 1, 1).mul(&s(2, 1, 1)), Gauge::Normal);
            let da = HomologyClass::new(ta, apply_d(&a.rep, &ta), Gauge::Normal);
            let cap = 3;
            let lhs = vertex_y(&da, &b, &ctx, cap - 1).unwrap();
            let y = vertex_y(&a, &b, &ctx, cap).unwrap();
            let mut deriv = Laurent::zero(1);
            for (e, p) in &y.terms {
                if e[0] != 0 && e[0] - 1 < cap {
                    deriv.add_term(vec![e[0] - 1], &p.scale(&int(e[0] as i64)));
                }
            }
            prop_assert_eq!(lhs, deriv);
        }

        #[test]
        fn skew_symmetry_mod_im_d(d1 in -2i64..3, d2 in -2i64..3, g in 0u16..3) {
            let ctx = CurveContext::new(g);
            let a = HomologyClass::new(ClassTag::sheaf(1, d1), sigma_minus_s122(g), Gauge::Xi);
            let b = HomologyClass::new(ClassTag::sheaf(1, d2), sigma_minus_s122(g).mul(&s(1, 0, 2)), Gauge::Xi);
            let ab = lie_bracket(&a, &b, &ctx).unwrap();
            let ba = lie_bracket(&b, &a, &ctx).unwrap();
            let lhs = reduce_mod_im_d(&ab.rep, &ab.tag, &ctx).unwrap();
            let rhs = reduce_mod_im_d(&ba.rep, &ba.tag, &ctx).unwrap();
            prop_assert_eq!(lhs, -rhs);
        }
    }

    #[test]
    fn jacobi_identity_mod_im_d() {
        for g in 0..=2u16 {
            let ctx = CurveContext::new(g);
            let a = HomologyClass::new(ClassTag::sheaf(1, 0), sigma_minus_s122(g), Gauge::Xi);
            let b = HomologyClass::new(ClassTag::sheaf(1, 1), sigma_minus_s122(g), Gauge::Xi);
            let c = HomologyClass::new(ClassTag::sheaf(0, 1), s(1, 0, 1), Gauge::Normal);
            let br = |x: &HomologyClass, y: &HomologyClass| lie_bracket(x, y, &ctx).unwrap();
            let t1 = br(&a, &br(&b, &c));
            let t2 = br(&b, &br(&c, &a));
            let t3 = br(&c, &br(&a, &b));
            let sum = t1.rep.clone() + t2.rep + t3.rep;
            assert!(reduce_mod_im_d(&sum, &t1.tag, &ctx).unwrap().is_zero(), "g={g}");
        }
    }
}
