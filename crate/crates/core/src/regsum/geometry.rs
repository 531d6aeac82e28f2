//! Affine lattices, rational polyhedra and their decomposition into
//! disjoint simple sectors.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use super::linalg::{
    ceil_q, dot_q, dot_z, dot_zq, floor_q, integral_constraint, inverse, nullspace, primitive,
    rank, solve_general, to_q, transpose, unimodular_completion, QVec, ZVec,
};
use crate::error::{Error, Result};
use crate::exact::{format_rational, int, parse_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Gt,
    Eq,
}

impl Rel {
    fn symbol(self) -> &'static str {
        match self {
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "=",
        }
    }

    fn parse(s: &str) -> Result<Rel> {
        match s {
            ">=" => Ok(Rel::Ge),
            ">" => Ok(Rel::Gt),
            "=" | "==" => Ok(Rel::Eq),
            _ => Err(Error::Parse(format!("unknown relation {s:?}"))),
        }
    }
}

/// `coeffs . x rel bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: QVec,
    pub rel: Rel,
    pub bound: Rational,
}

impl Constraint {
    pub fn new(coeffs: QVec, rel: Rel, bound: Rational) -> Constraint {
        Constraint { coeffs, rel, bound }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let v = dot_q(&self.coeffs, x);
        match self.rel {
            Rel::Ge => v >= self.bound,
            Rel::Gt => v > self.bound,
            Rel::Eq => v == self.bound,
        }
    }
}

/// Finite intersection of rational half-spaces (closed or open) and
/// hyperplanes in Q^dim.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub dim: usize,
    pub constraints: Vec<Constraint>,
}

impl Polytope {
    pub fn new(dim: usize) -> Polytope {
        Polytope { dim, constraints: Vec::new() }
    }

    pub fn with(mut self, coeffs: QVec, rel: Rel, bound: Rational) -> Polytope {
        self.constraints.push(Constraint::new(coeffs, rel, bound));
        self
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    pub fn to_json(&self) -> Value {
        let cs: Vec<Value> = self
            .constraints
            .iter()
            .map(|c| json!([qvec_json(&c.coeffs), c.rel.symbol(), format_rational(&c.bound)]))
            .collect();
        json!({ "dim": self.dim, "constraints": cs })
    }

    pub fn from_json(v: &Value) -> Result<Polytope> {
        let dim = v["dim"]
            .as_u64()
            .ok_or_else(|| Error::Parse("polytope needs \"dim\"".into()))? as usize;
        let mut p = Polytope::new(dim);
        for c in v["constraints"].as_array().into_iter().flatten() {
            let coeffs = qvec_from_json(&c[0])?;
            if coeffs.len() != dim {
                return Err(Error::Parse("constraint length does not match dim".into()));
            }
            let rel = Rel::parse(c[1].as_str().unwrap_or(""))?;
            let bound = parse_rational(c[2].as_str().unwrap_or(""))?;
            p = p.with(coeffs, rel, bound);
        }
        Ok(p)
    }
}

/// x0 + Z gens, with linearly independent generators.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLattice {
    pub base: QVec,
    pub gens: Vec<QVec>,
}

impl AffineLattice {
    pub fn new(base: QVec, gens: Vec<QVec>) -> Result<AffineLattice> {
        let n = base.len();
        if gens.iter().any(|g| g.len() != n) {
            return Err(Error::Domain("lattice generators have the wrong length".into()));
        }
        if rank(&gens, n) != gens.len() {
            return Err(Error::Domain("lattice generators are dependent".into()));
        }
        Ok(AffineLattice { base, gens })
    }

    /// Z^n.
    pub fn standard(n: usize) -> AffineLattice {
        let gens = (0..n).map(|i| unit_q(n, i)).collect();
        AffineLattice { base: vec![Rational::zero(); n], gens }
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn point(&self, a: &[i64]) -> QVec {
        let mut x = self.base.clone();
        for (ai, g) in a.iter().zip(&self.gens) {
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi += int(*ai) * gi;
            }
        }
        x
    }

    pub fn vector(&self, a: &[i64]) -> QVec {
        let mut x = vec![Rational::zero(); self.ambient_dim()];
        for (ai, g) in a.iter().zip(&self.gens) {
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi += int(*ai) * gi;
            }
        }
        x
    }

    /// Lattice coordinates of x, if x lies on the lattice.
    pub fn coords(&self, x: &[Rational]) -> Option<ZVec> {
        let rows = transpose(&self.gens, self.ambient_dim());
        let rhs: QVec = x.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let sol = solve_general(&rows, &rhs, self.rank())?;
        if sol.iter().all(|q| q.is_integer()) {
            Some(sol.iter().map(floor_q).collect())
        } else {
            None
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": qvec_json(&self.base),
            "gens": self.gens.iter().map(|g| qvec_json(g)).collect::<Vec<_>>(),
        })
    }
}

/// apex + Z_{>=0} gens with linearly independent generators.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleSector {
    pub apex: QVec,
    pub gens: Vec<QVec>,
}

impl SimpleSector {
    pub fn contains(&self, x: &[Rational]) -> bool {
        let rows = transpose(&self.gens, x.len());
        let rhs: QVec = x.iter().zip(&self.apex).map(|(a, b)| a - b).collect();
        match solve_general(&rows, &rhs, self.gens.len()) {
            Some(l) => {
                let back = (0..x.len())
                    .all(|t| dot_q(&rows[t], &l) == rhs[t]);
                back && l.iter().all(|q| q.is_integer() && !q.is_negative())
            }
            None => false,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "apex": qvec_json(&self.apex),
            "gens": self.gens.iter().map(|g| qvec_json(g)).collect::<Vec<_>>(),
        })
    }
}

/// Simple sector in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSector {
    pub apex: ZVec,
    pub gens: Vec<ZVec>,
}

impl LatticeSector {
    fn mapped(&self, a0: &[i64], basis: &[ZVec]) -> LatticeSector {
        let lift = |v: &[i64]| -> ZVec {
            let mut out = vec![0; a0.len()];
            for (c, b) in v.iter().zip(basis) {
                for (o, bi) in out.iter_mut().zip(b) {
                    *o += c * bi;
                }
            }
            out
        };
        let mut apex = lift(&self.apex);
        for (x, y) in apex.iter_mut().zip(a0) {
            *x += y;
        }
        LatticeSector { apex, gens: self.gens.iter().map(|g| lift(g)).collect() }
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        let s = SimpleSector {
            apex: to_q(&self.apex),
            gens: self.gens.iter().map(|g| to_q(g)).collect(),
        };
        s.contains(&to_q(a))
    }

    pub fn to_ambient(&self, lattice: &AffineLattice) -> SimpleSector {
        SimpleSector {
            apex: lattice.point(&self.apex),
            gens: self.gens.iter().map(|g| lattice.vector(g)).collect(),
        }
    }
}

/// Finite rational combination of polytope indicators.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeFunction {
    pub dim: usize,
    pub terms: Vec<(Rational, Polytope)>,
}

impl PolytopeFunction {
    pub fn new(dim: usize) -> PolytopeFunction {
        PolytopeFunction { dim, terms: Vec::new() }
    }

    pub fn indicator(p: Polytope) -> PolytopeFunction {
        PolytopeFunction { dim: p.dim, terms: vec![(int(1), p)] }
    }

    pub fn push(&mut self, c: Rational, p: Polytope) {
        self.terms.push((c, p));
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.terms
            .iter()
            .filter(|(_, p)| p.contains(x))
            .map(|(c, _)| c.clone())
            .sum()
    }

    pub fn to_json(&self) -> Value {
        let ts: Vec<Value> = self
            .terms
            .iter()
            .map(|(c, p)| json!([format_rational(c), p.to_json()]))
            .collect();
        json!({ "dim": self.dim, "terms": ts })
    }
}

fn qvec_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|q| Value::String(format_rational(q))).collect())
}

fn qvec_from_json(v: &Value) -> Result<QVec> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of rationals".into()))?
        .iter()
        .map(|x| match x {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => n
                .as_i64()
                .map(int)
                .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            _ => Err(Error::Parse(format!("bad rational {x}"))),
        })
        .collect()
}

fn unit_q(n: usize, i: usize) -> QVec {
    (0..n).map(|j| int(i64::from(i == j))).collect()
}

fn unit_z(n: usize, i: usize, s: i64) -> ZVec {
    (0..n).map(|j| if i == j { s } else { 0 }).collect()
}

/// Lattice points {a in Z^dim : g.a >= c for ineqs, g.a = c for eqs}.
#[derive(Clone, Debug)]
struct IntPoly {
    dim: usize,
    ineqs: Vec<(ZVec, i64)>,
    eqs: Vec<(ZVec, i64)>,
}

fn gcd_all(g: &[i64]) -> i64 {
    g.iter().fold(0i64, |acc, x| num_integer::Integer::gcd(&acc, x))
}

impl IntPoly {
    fn new(dim: usize) -> IntPoly {
        IntPoly { dim, ineqs: Vec::new(), eqs: Vec::new() }
    }

    /// Adds g.a >= c; false when the set becomes visibly empty.
    fn add_ineq(&mut self, g: ZVec, c: i64) -> bool {
        let h = gcd_all(&g);
        if h == 0 {
            return c <= 0;
        }
        let c = num_integer::Integer::div_ceil(&c, &h);
        self.ineqs.push((g.iter().map(|x| x / h).collect(), c));
        true
    }

    fn add_eq(&mut self, g: ZVec, c: i64) -> bool {
        let h = gcd_all(&g);
        if h == 0 {
            return c == 0;
        }
        if c % h != 0 {
            return false;
        }
        self.eqs.push((g.iter().map(|x| x / h).collect(), c / h));
        true
    }

    fn with_ineq(&self, g: ZVec, c: i64) -> Option<IntPoly> {
        let mut p = self.clone();
        p.add_ineq(g, c).then_some(p)
    }

    fn with_eq(&self, g: ZVec, c: i64) -> Option<IntPoly> {
        let mut p = self.clone();
        p.add_eq(g, c).then_some(p)
    }

    /// Pulls back along a = a0 + basis y.
    fn substitute(&self, a0: &[i64], basis: &[ZVec], skip_eq: usize) -> Option<IntPoly> {
        let mut p = IntPoly::new(basis.len());
        let pull = |g: &[i64]| -> ZVec { basis.iter().map(|b| dot_z(g, b)).collect() };
        for (g, c) in &self.ineqs {
            if !p.add_ineq(pull(g), c - dot_z(g, a0)) {
                return None;
            }
        }
        for (i, (g, c)) in self.eqs.iter().enumerate() {
            if i != skip_eq && !p.add_eq(pull(g), c - dot_z(g, a0)) {
                return None;
            }
        }
        Some(p)
    }

    fn rows(&self) -> Vec<QVec> {
        self.ineqs.iter().map(|(g, _)| to_q(g)).collect()
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

fn vertices(p: &IntPoly) -> Vec<QVec> {
    let rows = p.rows();
    let mut out: Vec<QVec> = Vec::new();
    for subset in combinations(rows.len(), p.dim) {
        let a: Vec<QVec> = subset.iter().map(|&i| rows[i].clone()).collect();
        let b: QVec = subset.iter().map(|&i| int(p.ineqs[i].1)).collect();
        let Some(inv) = inverse(&a) else { continue };
        let v: QVec = inv.iter().map(|r| dot_q(r, &b)).collect();
        let feasible = p.ineqs.iter().all(|(g, c)| dot_zq(g, &v) >= int(*c));
        if feasible && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Primitive extreme rays of the pointed cone {v : rows . v >= 0}.
fn extreme_rays(rows: &[QVec], dim: usize) -> Vec<ZVec> {
    let mut out: Vec<ZVec> = Vec::new();
    for subset in combinations(rows.len(), dim - 1) {
        let a: Vec<QVec> = subset.iter().map(|&i| rows[i].clone()).collect();
        let ns = nullspace(&a, dim);
        if ns.len() != 1 {
            continue;
        }
        let v = primitive(&ns[0]);
        for cand in [v.clone(), v.iter().map(|x| -x).collect::<ZVec>()] {
            let ok = rows.iter().all(|r| !dot_q(r, &to_q(&cand)).is_negative());
            if ok && !out.contains(&cand) {
                out.push(cand);
            }
        }
    }
    out
}

fn triangulate(rays: &[ZVec], s: &[usize], k: usize, normals: &[ZVec]) -> Vec<Vec<usize>> {
    if s.len() == k {
        return vec![s.to_vec()];
    }
    let r0 = s[0];
    let mut facets: Vec<Vec<usize>> = Vec::new();
    for g in normals {
        if dot_z(g, &rays[r0]) == 0 {
            continue;
        }
        let f: Vec<usize> = s.iter().copied().filter(|&j| dot_z(g, &rays[j]) == 0).collect();
        let fr: Vec<QVec> = f.iter().map(|&j| to_q(&rays[j])).collect();
        if !f.is_empty() && rank(&fr, rays[r0].len()) == k - 1 && !facets.contains(&f) {
            facets.push(f);
        }
    }
    let mut out = Vec::new();
    for f in facets {
        for mut t in triangulate(rays, &f, k - 1, normals) {
            t.insert(0, r0);
            out.push(t);
        }
    }
    out
}

/// Lattice points of v0 + C for a full-dimensional pointed cone C.
fn cone_sectors(v0: &[Rational], normals: &[ZVec], rays: &[ZVec]) -> Vec<LatticeSector> {
    let m = v0.len();
    let all: Vec<usize> = (0..rays.len()).collect();
    let simplices = triangulate(rays, &all, m, normals);
    let frames: Vec<(Vec<ZVec>, Vec<QVec>)> = simplices
        .iter()
        .map(|s| {
            let gens: Vec<ZVec> = s.iter().map(|&j| rays[j].clone()).collect();
            let cols: Vec<QVec> = gens.iter().map(|g| to_q(g)).collect();
            let h = inverse(&transpose(&cols, m)).expect("simplicial cone is nonsingular");
            (gens, h)
        })
        .collect();
    // moment-curve interior point avoiding every simplex facet hyperplane
    let mut t = 2i64;
    let y = loop {
        let mut y = vec![Rational::zero(); m];
        let mut w = int(1);
        for r in rays {
            for (yi, ri) in y.iter_mut().zip(r) {
                *yi += &w * int(*ri);
            }
            w *= int(t);
        }
        let generic = frames
            .iter()
            .all(|(_, h)| h.iter().all(|row| !dot_q(row, &y).is_zero()));
        if generic {
            break y;
        }
        t += 1;
    };
    let mut out = Vec::new();
    for (gens, h) in &frames {
        let closed: Vec<bool> = h.iter().map(|row| dot_q(row, &y).is_positive()).collect();
        let lo: ZVec = (0..m)
            .map(|i| ceil_q(&(v0[i].clone() + int(gens.iter().map(|g| g[i].min(0)).sum()))))
            .collect();
        let hi: ZVec = (0..m)
            .map(|i| floor_q(&(v0[i].clone() + int(gens.iter().map(|g| g[i].max(0)).sum()))))
            .collect();
        let mut a = lo.clone();
        'boxloop: loop {
            let diff: QVec = a.iter().zip(v0).map(|(x, v)| int(*x) - v).collect();
            let lam: QVec = h.iter().map(|row| dot_q(row, &diff)).collect();
            let inside = lam.iter().zip(&closed).all(|(l, &c)| {
                if c {
                    !l.is_negative() && *l < int(1)
                } else {
                    l.is_positive() && *l <= int(1)
                }
            });
            if inside {
                out.push(LatticeSector { apex: a.clone(), gens: gens.clone() });
            }
            for i in 0..m {
                if a[i] < hi[i] {
                    a[i] += 1;
                    continue 'boxloop;
                }
                a[i] = lo[i];
            }
            break;
        }
    }
    out
}

fn decompose_int(p: &IntPoly) -> Vec<LatticeSector> {
    if let Some((g, c)) = p.eqs.first() {
        let u = unimodular_completion(g);
        let a0: ZVec = u[0].iter().map(|x| x * c).collect();
        let basis: Vec<ZVec> = u[1..].to_vec();
        return match p.substitute(&a0, &basis, 0) {
            Some(q) => decompose_int(&q).iter().map(|s| s.mapped(&a0, &basis)).collect(),
            None => Vec::new(),
        };
    }
    let m = p.dim;
    if m == 0 {
        return if p.ineqs.iter().all(|(_, c)| *c <= 0) {
            vec![LatticeSector { apex: vec![], gens: vec![] }]
        } else {
            Vec::new()
        };
    }
    let rows = p.rows();
    if let Some(l) = nullspace(&rows, m).first() {
        let k = l.iter().position(|x| !x.is_zero()).unwrap();
        let mut out = Vec::new();
        if let Some(q) = p.with_ineq(unit_z(m, k, 1), 0) {
            out.extend(decompose_int(&q));
        }
        if let Some(q) = p.with_ineq(unit_z(m, k, -1), 1) {
            out.extend(decompose_int(&q));
        }
        return out;
    }
    let verts = vertices(p);
    if verts.is_empty() {
        return Vec::new();
    }
    let rays = extreme_rays(&rows, m);
    for (g, c) in &p.ineqs {
        if rays.iter().all(|r| dot_z(g, r) == 0) {
            let hi = verts.iter().map(|v| floor_q(&dot_zq(g, v))).max().unwrap();
            let mut out = Vec::new();
            for k in *c..=hi {
                if let Some(q) = p.with_eq(g.clone(), k) {
                    out.extend(decompose_int(&q));
                }
            }
            return out;
        }
    }
    let v0 = &verts[0];
    let cp: ZVec = p.ineqs.iter().map(|(g, _)| ceil_q(&dot_zq(g, v0))).collect();
    let normals: Vec<ZVec> = p.ineqs.iter().map(|(g, _)| g.clone()).collect();
    let mut out = cone_sectors(v0, &normals, &rays);
    for i in 0..p.ineqs.len() {
        if cp[i] <= p.ineqs[i].1 {
            continue;
        }
        let mut q = p.clone();
        for j in 0..i {
            q.ineqs[j].1 = q.ineqs[j].1.max(cp[j]);
        }
        let g = &p.ineqs[i].0;
        if let Some(q) = q.with_ineq(g.iter().map(|x| -x).collect(), 1 - cp[i]) {
            out.extend(decompose_int(&q));
        }
    }
    out
}

fn lattice_poly(c: &Polytope, lattice: &AffineLattice) -> Result<Option<IntPoly>> {
    if c.dim != lattice.ambient_dim() {
        return Err(Error::Domain(format!(
            "polytope lives in Q^{} but the lattice in Q^{}",
            c.dim,
            lattice.ambient_dim()
        )));
    }
    let mut p = IntPoly::new(lattice.rank());
    for con in &c.constraints {
        let f: QVec = lattice.gens.iter().map(|g| dot_q(&con.coeffs, g)).collect();
        let rhs = &con.bound - dot_q(&con.coeffs, &lattice.base);
        let (g, c) = integral_constraint(&f, &rhs);
        let ok = match con.rel {
            Rel::Ge => p.add_ineq(g, ceil_q(&c)),
            Rel::Gt => p.add_ineq(g, floor_q(&c) + 1),
            Rel::Eq => c.is_integer() && p.add_eq(g, floor_q(&c)),
        };
        if !ok {
            return Ok(None);
        }
    }
    Ok(Some(p))
}

/// Disjoint simple sectors, in lattice coordinates, whose union is the set
/// of lattice points of `c`.
pub fn decompose_coords(c: &Polytope, lattice: &AffineLattice) -> Result<Vec<LatticeSector>> {
    Ok(match lattice_poly(c, lattice)? {
        Some(p) => decompose_int(&p),
        None => Vec::new(),
    })
}

/// Disjoint simple sectors whose union is C ∩ Λ.
pub fn decompose(c: &Polytope, lattice: &AffineLattice) -> Result<Vec<SimpleSector>> {
    Ok(decompose_coords(c, lattice)?
        .iter()
        .map(|s| s.to_ambient(lattice))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn q(v: &[i64]) -> QVec {
        to_q(v)
    }

    fn check_cover(c: &Polytope, lattice: &AffineLattice, window: i64) {
        let sectors = decompose_coords(c, lattice).unwrap();
        let m = lattice.rank();
        let mut a = vec![-window; m];
        loop {
            let inside = c.contains(&lattice.point(&a));
            let count = sectors.iter().filter(|s| s.contains(&a)).count();
            assert_eq!(count, usize::from(inside), "point {a:?} of {c:?}");
            let mut i = 0;
            loop {
                if i == m {
                    return;
                }
                if a[i] < window {
                    a[i] += 1;
                    break;
                }
                a[i] = -window;
                i += 1;
            }
        }
    }

    #[test]
    fn half_plane_splits_along_the_line() {
        let c = Polytope::new(2).with(q(&[1, 0]), Rel::Ge, int(0));
        let sectors = decompose(&c, &AffineLattice::standard(2)).unwrap();
        assert_eq!(sectors.len(), 2);
        check_cover(&c, &AffineLattice::standard(2), 4);
    }

    #[test]
    fn empty_polytope_has_no_sectors() {
        let c = Polytope::new(1)
            .with(q(&[1]), Rel::Gt, rat(1, 3))
            .with(q(&[-1]), Rel::Ge, rat(-2, 3));
        assert!(decompose(&c, &AffineLattice::standard(1)).unwrap().is_empty());
    }

    #[test]
    fn whole_line_and_point() {
        let line = Polytope::new(1);
        check_cover(&line, &AffineLattice::standard(1), 5);
        let pt = Polytope::new(2).with(q(&[1, 1]), Rel::Eq, int(1)).with(q(&[1, -1]), Rel::Eq, int(3));
        let s = decompose(&pt, &AffineLattice::standard(2)).unwrap();
        assert_eq!(s, vec![SimpleSector { apex: q(&[2, -1]), gens: vec![] }]);
    }

    #[test]
    fn shifted_lattice_and_slanted_cone() {
        let lattice = AffineLattice::new(
            vec![rat(1, 3), rat(-1, 3), int(0)],
            vec![q(&[1, -1, 0]), q(&[0, 1, -1])],
        )
        .unwrap();
        let c = Polytope::new(3)
            .with(q(&[0, 0, 1]), Rel::Ge, rat(-1, 2))
            .with(q(&[1, 2, 0]), Rel::Gt, int(-2))
            .with(q(&[1, 0, 0]), Rel::Ge, int(-3));
        check_cover(&c, &lattice, 6);
    }

    #[test]
    fn polytope_json_roundtrip() {
        let c = Polytope::new(2)
            .with(q(&[1, 0]), Rel::Ge, rat(1, 2))
            .with(q(&[1, -1]), Rel::Gt, int(0))
            .with(q(&[0, 1]), Rel::Eq, int(2));
        assert_eq!(Polytope::from_json(&c.to_json()).unwrap(), c);
    }

    fn rel_strategy() -> impl Strategy<Value = Rel> {
        prop_oneof![Just(Rel::Ge), Just(Rel::Gt), Just(Rel::Eq)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sectors_cover_disjointly_in_the_plane(
            cons in proptest::collection::vec(
                ((-3i64..4, -3i64..4), rel_strategy(), (-6i64..7, 1i64..4)), 0..4),
        ) {
            let mut c = Polytope::new(2);
            for ((a, b), rel, (n, d)) in cons {
                c = c.with(q(&[a, b]), rel, rat(n, d));
            }
            check_cover(&c, &AffineLattice::standard(2), 7);
        }

        #[test]
        fn sectors_cover_disjointly_in_space(
            cons in proptest::collection::vec(
                ((-2i64..3, -2i64..3, -2i64..3), prop_oneof![Just(Rel::Ge), Just(Rel::Gt)], -3i64..4), 1..5),
        ) {
            let mut c = Polytope::new(3);
            for ((a, b, e), rel, n) in cons {
                c = c.with(q(&[a, b, e]), rel, int(n));
            }
            check_cover(&c, &AffineLattice::standard(3), 3);
        }
    }
}
