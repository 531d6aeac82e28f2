//! Closed-form invariants, pairings and volumes, together with the
//! independent oracle formulas used to cross-check them.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    bernoulli_polynomial, ceil_div, factorial_q, floor_div, frac, int, rat, sign_pow, Rational,
};
use crate::laurent::{residue_target, vec_add, vec_min, vec_sub, Exps, Laurent};
use crate::regsum::{c_delta_on_degrees, regularized_sum, AffineLattice, ExpLaurent, RegSumSpec, RegValue};
use crate::superalg::{dual_pair, normalize_monomial, Family, Mono, SuperPoly, Var, S122};
use crate::vertex::{exp_z_d, reduce_mod_im_d, xi, ClassTag, CurveContext, Gauge, HomologyClass};

/// Degree of the sheaf invariant class.
pub fn class_degree(g: u16, r: i64) -> i64 {
    2 * (g as i64 - 1) * r * r + 2
}

/// Degree of the fixed-determinant class.
pub fn fd_class_degree(g: u16, r: i64) -> i64 {
    2 * (r * r - 1) * (g as i64 - 1)
}

fn main_sign(g: u16, r: i64, d: i64) -> Rational {
    int(sign_pow((g as i64 - 1) * r * (r - 1) / 2 + (r - 1) * (d - 1)))
}

/// d_i = floor((i+1)d/r) - floor(id/r).
pub fn floor_apex(r: i64, d: i64) -> Vec<i64> {
    (0..r).map(|i| floor_div((i + 1) * d, r) - floor_div(i * d, r)).collect()
}

/// Apex of the open region used for pairs.
pub fn ceil_apex(r: i64, d: i64) -> Vec<i64> {
    (0..r)
        .map(|i| {
            ceil_div((i + 1) * d, r) - ceil_div(i * d, r) + i64::from(i == r - 1) - i64::from(i == 0)
        })
        .collect()
}

/// Indices 1 <= i <= r-1 with id/r integral.
pub fn boundary_indices(r: i64, d: i64) -> Vec<i64> {
    (1..r).filter(|i| (i * d).rem_euclid(r) == 0).collect()
}

fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for it in items {
        let mut more = out.clone();
        for s in &mut more {
            s.push(it.clone());
        }
        out.extend(more);
    }
    out
}

/// Auxiliary variable layout: optional w at index 0, then z_1, ..., z_{r-1}.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub nv: usize,
    pub r: i64,
    pub offset: usize,
    /// Use z_k itself where the centred variable would appear.
    pub raw: bool,
}

impl Frame {
    pub fn sheaf(r: i64) -> Frame {
        Frame { nv: (r - 1) as usize, r, offset: 0, raw: false }
    }

    pub fn pair(r: i64) -> Frame {
        Frame { nv: r as usize, r, offset: 1, raw: true }
    }

    pub fn idx(&self, k: i64) -> Option<usize> {
        (k > 0).then(|| self.offset + k as usize - 1)
    }

    /// 1 at positions >= from, i.e. the b-vector of the variable at `from`.
    pub fn ind(&self, from: Option<usize>) -> Exps {
        (0..self.nv).map(|p| i32::from(from.is_none_or(|f| p >= f))).collect()
    }

    pub fn scaled_ind(&self, from: Option<usize>, c: i64) -> Exps {
        self.ind(from).iter().map(|x| x * c as i32).collect()
    }

    pub fn z(&self, k: i64) -> Laurent {
        let mut coeffs = vec![Rational::zero(); self.nv];
        if let Some(i) = self.idx(k) {
            coeffs[i] = Rational::one();
        }
        Laurent::linear(&coeffs)
    }

    pub fn w(&self) -> Laurent {
        let mut coeffs = vec![Rational::zero(); self.nv];
        coeffs[0] = Rational::one();
        Laurent::linear(&coeffs)
    }

    /// z_k - (z_1 + ... + z_{r-1}) / r.
    pub fn zt(&self, k: i64) -> Laurent {
        if self.raw {
            return self.z(k);
        }
        let mut coeffs = vec![Rational::zero(); self.nv];
        for m in 1..self.r {
            coeffs[self.idx(m).unwrap()] = rat(-1, self.r);
        }
        if let Some(i) = self.idx(k) {
            coeffs[i] += Rational::one();
        }
        Laurent::linear(&coeffs)
    }

    /// Powers x^0, x^1, ... of a series with positive b, until they vanish under cap.
    pub fn powers(x: &Laurent, cap: &[i32]) -> Vec<Laurent> {
        let mut out = vec![Laurent::one(x.nv).truncated(cap)];
        loop {
            let next = out.last().unwrap().mul(x, cap);
            if next.is_zero() {
                break;
            }
            out.push(next);
        }
        out
    }

    /// sum_{n >= start} x^n / n! coeff(n).
    pub fn series(x: &Laurent, start: usize, coeff: impl Fn(usize) -> SuperPoly, cap: &[i32]) -> Laurent {
        let mut out = Laurent::zero(x.nv);
        for (n, p) in Frame::powers(x, cap).iter().enumerate().skip(start) {
            let c = coeff(n);
            if !c.is_zero() {
                out = out.add(&p.mul_poly(&c.scale(&factorial_q(n as u64).recip())));
            }
        }
        out
    }

    /// Factors (z_i - z_j)^{-(2g-2)} over 0 <= i < j <= r-1, exact up to `cap`
    /// for their joint product.
    pub fn pole_factors(&self, g: u16, cap: &[i32]) -> Result<Vec<Laurent>> {
        let p = 2 * g as i64 - 2;
        let total = self.pole_lower(g);
        let mut out = Vec::new();
        for j in 1..self.r {
            for i in 0..j {
                let cap = vec_sub(cap, &vec_sub(&total, &self.pole_lower_one(g, i, j)));
                let cap = cap.as_slice();
                let f = if p > 0 {
                    Laurent::expand_inverse_difference(self.nv, self.idx(i), self.idx(j).unwrap(), p as u32, cap)?
                } else if p < 0 {
                    let diff = self.z(i).sub(&self.z(j));
                    diff.pow((-p) as u32, cap)
                } else {
                    continue;
                };
                out.push(f);
            }
        }
        Ok(out)
    }

    fn pole_lower_one(&self, g: u16, _i: i64, j: i64) -> Exps {
        let p = 2 * g as i64 - 2;
        if p > 0 {
            self.scaled_ind(self.idx(j), -p)
        } else {
            vec![0; self.nv]
        }
    }

    pub fn pole_lower(&self, g: u16) -> Exps {
        let mut acc = vec![0; self.nv];
        for j in 1..self.r {
            for i in 0..j {
                acc = vec_add(&acc, &self.pole_lower_one(g, i, j));
            }
        }
        acc
    }

    /// (z_i - z_{i-1})^{-1}.
    fn inverse_step(&self, i: i64, cap: &[i32]) -> Result<Laurent> {
        Ok(Laurent::expand_inverse_difference(self.nv, self.idx(i - 1), self.idx(i).unwrap(), 1, cap)?
            .scale(&-Rational::one()))
    }

    /// Exponent of the i-th wall: sum_l (zt_i^l - zt_{i-1}^l)/l! a(l+1), as
    /// (z_i - z_{i-1}) * quotient.
    pub fn wall_quotient(&self, i: i64, a_coef: &dyn Fn(i32) -> SuperPoly, cap: &[i32]) -> Laurent {
        let x = self.zt(i);
        let y = self.zt(i - 1);
        let ys = Frame::powers(&y, cap);
        let top = Frame::powers(&x, cap).len().max(ys.len());
        // h_n(x, y) = x h_{n-1} + y^n
        let mut h = Laurent::one(self.nv).truncated(cap);
        let mut out = Laurent::zero(self.nv);
        for n in 0..top {
            if n > 0 {
                h = h.mul(&x, cap).add(&ys.get(n).cloned().unwrap_or_else(|| Laurent::zero(self.nv)));
            }
            let c = a_coef(n as i32 + 2);
            if !c.is_zero() {
                out = out.add(&h.mul_poly(&c.scale(&factorial_q(n as u64 + 1).recip())));
            }
        }
        out
    }

    pub fn wall_exponent(&self, i: i64, a_coef: &dyn Fn(i32) -> SuperPoly, cap: &[i32]) -> Laurent {
        let q = self.wall_quotient(i, a_coef, cap);
        self.z(i).sub(&self.z(i - 1)).mul(&q, cap)
    }

    /// 1/(1 - exp(wall exponent)); lower bound -ind(z_i).
    pub fn wall_reciprocal(&self, i: i64, a_coef: &dyn Fn(i32) -> SuperPoly, cap: &[i32]) -> Result<Laurent> {
        let bump = vec_add(cap, &self.ind(self.idx(i)));
        let q = self.wall_quotient(i, a_coef, &bump);
        let q_inv = q.invert(&bump)?;
        let x = self.z(i).sub(&self.z(i - 1)).mul(&q, &bump);
        let mut bern = Laurent::one(self.nv);
        let mut power = Laurent::one(self.nv);
        let mut n = 0u64;
        loop {
            n += 1;
            power = power.mul(&x, &bump);
            if power.is_zero() {
                break;
            }
            let c = crate::exact::bernoulli_number(n as usize) / factorial_q(n);
            if !c.is_zero() {
                bern = bern.add(&power.scale(&c));
            }
        }
        let step = self.inverse_step(i, cap)?;
        Ok(Laurent::product(&[step, q_inv, bern], cap)?.scale(&-Rational::one()))
    }

    pub fn wall_lower(&self, i: i64) -> Exps {
        self.scaled_ind(self.idx(i), -1)
    }

    /// 1/(v_i + v_j)^q with v_i inner (None is z_0 = 0); q may be <= 0.
    pub fn inverse_sum(&self, i: usize, j: Option<usize>, q: i64, cap: &[i32]) -> Result<Laurent> {
        let vi = {
            let mut c = vec![Rational::zero(); self.nv];
            c[i] = Rational::one();
            Laurent::linear(&c)
        };
        if q <= 0 {
            let base = match j {
                Some(j) => {
                    let mut c = vec![Rational::zero(); self.nv];
                    c[j] = Rational::one();
                    vi.add(&Laurent::linear(&c))
                }
                None => vi,
            };
            return Ok(base.pow((-q) as u32, cap));
        }
        match j {
            None => {
                let mut a = vec![0; self.nv];
                a[i] = -(q as i32);
                Ok(Laurent::monomial(a, SuperPoly::one()).truncated(cap))
            }
            Some(j) => {
                let diff = Laurent::expand_inverse_difference(self.nv, Some(i), j, q as u32, cap)?;
                let mut out = Laurent::zero(self.nv);
                for (a, p) in &diff.terms {
                    let s = sign_pow(q + a[i] as i64);
                    out.add_term(a.clone(), &p.scale(&int(s)));
                }
                Ok(out)
            }
        }
    }

    pub fn inverse_sum_lower(&self, i: usize, j: Option<usize>, q: i64) -> Exps {
        if q <= 0 {
            return vec![0; self.nv];
        }
        match j {
            None => self.scaled_ind(Some(i), -q),
            Some(j) => self.scaled_ind(Some(j), -q),
        }
    }

    /// exp(zt_i D_{(1,d_i)}) with the translation part split off:
    /// exp(sum_l sum_i zt_i^l/l! (d_i a(l+1) + b(l))).
    pub fn apex_exponential(
        &self,
        apex: &[i64],
        a_coef: &dyn Fn(i32) -> SuperPoly,
        b_coef: &dyn Fn(i32) -> SuperPoly,
        cap: &[i32],
    ) -> Result<Laurent> {
        let mut x = Laurent::zero(self.nv);
        for (i, di) in apex.iter().enumerate() {
            let zt = self.zt(i as i64);
            let s = Frame::series(
                &zt,
                1,
                |l| a_coef(l as i32 + 1).scale(&int(*di)) + b_coef(l as i32),
                cap,
            );
            x = x.add(&s);
        }
        Laurent::exp_series(&x, cap)
    }

    /// exp(zt_i Delta) sigma(c - s_{1,2,2}) with a(l) in place of s_{1,2,l}.
    pub fn sigma_factor(
        &self,
        g: u16,
        i: i64,
        c: &Laurent,
        a_coef: &dyn Fn(i32) -> SuperPoly,
        even_only: bool,
        cap: &[i32],
    ) -> Result<Laurent> {
        let zt = self.zt(i);
        let c_lower = vec_min(&c.lower().unwrap_or_else(|| vec![0; self.nv]), &vec![0; self.nv]);
        let others: Exps = c_lower.iter().map(|x| x * (g as i32 - 1).max(0)).collect();
        let f_cap = vec_sub(cap, &others);
        let a_part = Frame::series(&zt, 0, |n| a_coef(n as i32 + 2), &f_cap);
        let base = c.sub(&a_part);
        let mut fs = Vec::new();
        for j in 1..=g {
            let mut f = base.clone();
            if !even_only {
                let left = Frame::series(&zt, 0, |n| SuperPoly::var(Var::sheaf(j, 1, n as i32 + 1)), &f_cap);
                let right = Frame::series(&zt, 0, |n| SuperPoly::var(Var::sheaf(j + g, 1, n as i32 + 1)), &f_cap);
                f = f.add(&left.mul(&right, &f_cap));
            }
            fs.push(f);
        }
        Laurent::product(&fs, cap)
    }
}

/// Coefficient of `a` in the product of two series, without forming it.
pub(crate) fn product_coefficient(x: &Laurent, y: &Laurent, a: &[i32]) -> SuperPoly {
    let mut acc = SuperPoly::zero();
    for (ax, px) in &x.terms {
        let rest = vec_sub(a, ax);
        if let Some(py) = y.terms.get(&rest) {
            acc += &px.mul(py);
        }
    }
    acc
}

fn s122_coef(l: i32) -> SuperPoly {
    if l >= 2 {
        SuperPoly::var(Var::sheaf(1, 2, l))
    } else {
        SuperPoly::zero()
    }
}

fn s10_coef(l: i32) -> SuperPoly {
    if l >= 1 {
        SuperPoly::var(Var::sheaf(1, 0, l))
    } else {
        SuperPoly::zero()
    }
}

fn zero_coef(_: i32) -> SuperPoly {
    SuperPoly::zero()
}

fn check_rank(r: i64) -> Result<()> {
    if r < 1 {
        return Err(Error::Domain(format!("rank must be positive, got {r}")));
    }
    Ok(())
}

/// Whether (r, d) lies in the positive cone.
pub fn in_positive_cone(r: i64, d: i64) -> bool {
    r > 0 || (r == 0 && d > 0)
}

/// Rank-0 invariant in rank-0 normal form.
pub fn inv_rank0(g: u16, d: i64) -> Result<HomologyClass> {
    if d <= 0 {
        return Err(Error::Domain(format!("rank-0 invariant needs d > 0, got {d}")));
    }
    let mut rep = SuperPoly::var(Var::sheaf(1, 0, 1)).scale(&rat(1, d));
    for j in 1..=g {
        rep += &SuperPoly::var(Var::sheaf(j, 1, 1)).mul(&SuperPoly::var(Var::sheaf(j + g, 1, 1)));
    }
    let rep = rep.scale(&int(sign_pow(d - 1)));
    let tag = ClassTag::sheaf(0, d);
    let nf = reduce_mod_im_d(&rep, &tag, &CurveContext::new(g))?;
    Ok(HomologyClass::new(tag, nf, Gauge::Normal))
}

/// sigma(c - s_{1,2,2}) = prod_j (c - s_{1,2,2} + s_{j,1,1} s_{j+g,1,1}).
pub fn sigma(g: u16, c: &SuperPoly) -> SuperPoly {
    let mut acc = SuperPoly::one();
    for j in 1..=g {
        let f = c.clone() - SuperPoly::var(S122)
            + SuperPoly::var(Var::sheaf(j, 1, 1)).mul(&SuperPoly::var(Var::sheaf(j + g, 1, 1)));
        acc = acc.mul(&f);
    }
    acc
}

pub fn inv_rank1(g: u16, d: i64) -> HomologyClass {
    HomologyClass::new(ClassTag::sheaf(1, d), sigma(g, &SuperPoly::zero()), Gauge::Xi)
}

/// rho(w) = exp(sum_l (-w)^l / l! s_{+,0,l}) up to w^max.
pub fn rho_coefficients(max: i32) -> Vec<SuperPoly> {
    let mut x = Laurent::zero(1);
    for l in 1..=max {
        let c = int(sign_pow(l as i64)) / factorial_q(l as u64);
        x.add_term(vec![l], &SuperPoly::var(Var::pair(l)).scale(&c));
    }
    let e = Laurent::exp_series(&x, &[max]).expect("rho exponent has positive weight");
    (0..=max).map(|n| e.coefficient(&[n])).collect()
}

/// res_w w^{-(nu+d)} rho(w) sigma(1/w - s_{1,2,2}).
pub fn inv_pair_rank1(g: u16, d: i64, nu: i64) -> HomologyClass {
    let n = nu + d;
    let mut rep = SuperPoly::zero();
    // sigma(1/w - s) = sum_k w^{-k} e_{g-k}(-s + odd_j)
    let mut by_k: BTreeMap<i64, SuperPoly> = BTreeMap::from([(0, SuperPoly::one())]);
    for j in 1..=g {
        let f = -SuperPoly::var(S122)
            + SuperPoly::var(Var::sheaf(j, 1, 1)).mul(&SuperPoly::var(Var::sheaf(j + g, 1, 1)));
        let mut next: BTreeMap<i64, SuperPoly> = BTreeMap::new();
        for (k, p) in &by_k {
            *next.entry(k + 1).or_default() += p;
            *next.entry(*k).or_default() += &p.mul(&f);
        }
        by_k = next;
    }
    let max = (n + g as i64).max(0) as i32;
    let rho = rho_coefficients(max);
    for (k, p) in &by_k {
        let need = n + k - 1;
        if need >= 0 && need <= max as i64 {
            rep += &rho[need as usize].mul(p);
        }
    }
    let mut c = HomologyClass::new(ClassTag::pair(1, d, 1), rep, Gauge::Xi);
    c.nu = Some(nu);
    c
}

pub fn inv_sheaf(g: u16, r: i64, d: i64) -> Result<HomologyClass> {
    inv_sheaf_opts(g, r, d, false)
}

/// Closed residue formula; `even_only` sets the odd variables to zero.
pub fn inv_sheaf_opts(g: u16, r: i64, d: i64, even_only: bool) -> Result<HomologyClass> {
    check_rank(r)?;
    let frame = Frame::sheaf(r);
    let target = residue_target(frame.nv);
    let walls: Vec<i64> = (1..r).collect();
    let wall_lower = walls.iter().fold(vec![0; frame.nv], |acc, i| vec_add(&acc, &frame.wall_lower(*i)));
    let pole_lower = frame.pole_lower(g);

    let common_cap = vec_sub(&target, &wall_lower);
    let apex = floor_apex(r, d);
    let mut factors = frame.pole_factors(g, &common_cap)?;
    let body_cap = vec_sub(&common_cap, &pole_lower);
    factors.push(frame.apex_exponential(&apex, &s122_coef, &s10_coef, &body_cap)?);
    let zero = Laurent::zero(frame.nv);
    for i in 0..r {
        factors.push(frame.sigma_factor(g, i, &zero, &s122_coef, even_only, &body_cap)?);
    }
    let common = Laurent::product(&factors, &common_cap)?;

    let mut reciprocals = BTreeMap::new();
    for &i in &walls {
        let others = vec_sub(&wall_lower, &frame.wall_lower(i));
        let cap = vec_sub(&vec_sub(&target, &pole_lower), &others);
        reciprocals.insert(i, frame.wall_reciprocal(i, &s122_coef, &cap)?);
    }
    let den_cap = vec_sub(&target, &pole_lower);
    let a_target = vec![-1; frame.nv];
    let mut total = SuperPoly::zero();
    for omitted in subsets(&boundary_indices(r, d)) {
        let m = omitted.len() as i64;
        let dens: Vec<Laurent> = walls
            .iter()
            .filter(|i| !omitted.contains(i))
            .map(|i| reciprocals[i].clone())
            .collect();
        let den = if dens.is_empty() { Laurent::one(frame.nv) } else { Laurent::product(&dens, &den_cap)? };
        let c = int(sign_pow(m)) / int(m + 1);
        total.add_scaled(&product_coefficient(&common, &den, &a_target), &c);
    }
    let rep = total.scale(&(main_sign(g, r, d) / int(r)));
    finish_sheaf(rep, r, d)
}

/// The same invariant as a regularized sum of c_Δ over Λ_{r,d}, evaluated
/// in the truncated Laurent ring and followed by the iterated residue.
pub fn inv_sheaf_via_regsum(g: u16, r: i64, d: i64) -> Result<HomologyClass> {
    check_rank(r)?;
    if r == 1 {
        return Ok(inv_rank1(g, d));
    }
    let frame = Frame::sheaf(r);
    let nv = frame.nv;
    let target = residue_target(nv);
    let pole_lower = frame.pole_lower(g);
    let sum_cap = vec_sub(&target, &pole_lower);
    // each inverted generator lowers b by at most one per component
    let work_cap: Exps = sum_cap.iter().map(|c| c + r as i32 - 1).collect();
    let ratio_cap: Exps = work_cap.iter().map(|c| c + 2).collect();

    let apex = floor_apex(r, d);
    let ru = r as usize;
    let gens = (1..ru)
        .map(|j| (0..ru).map(|i| int(i64::from(i == j) - i64::from(i + 1 == j))).collect())
        .collect();
    let lattice = AffineLattice::new(apex.iter().map(|x| int(*x)).collect(), gens)?;
    let ring = ExpLaurent { nv, cap: work_cap };
    let spec = RegSumSpec::<ExpLaurent> {
        lattice,
        coefficient: c_delta_on_degrees(ru, d),
        apex_value: Laurent::one(nv),
        ratios: (1..r).map(|j| frame.wall_exponent(j, &s122_coef, &ratio_cap)).collect(),
    };
    let sum = match regularized_sum(&ring, &spec)? {
        RegValue::Value(v) => v.truncated(&sum_cap),
        RegValue::Divergent => return Err(Error::Divergent),
    };

    let sum_lower = sum.lower().unwrap_or_else(|| vec![0; nv]);
    let common_cap = vec_sub(&target, &sum_lower);
    let mut factors = frame.pole_factors(g, &common_cap)?;
    let body_cap = vec_sub(&common_cap, &pole_lower);
    factors.push(frame.apex_exponential(&apex, &s122_coef, &s10_coef, &body_cap)?);
    let zero = Laurent::zero(nv);
    for i in 0..r {
        factors.push(frame.sigma_factor(g, i, &zero, &s122_coef, false, &body_cap)?);
    }
    let common = Laurent::product(&factors, &common_cap)?;
    let value = product_coefficient(&common, &sum, &vec![-1; nv]);
    finish_sheaf(value.scale(&(main_sign(g, r, d) / int(r))), r, d)
}

fn finish_sheaf(rep: SuperPoly, r: i64, d: i64) -> Result<HomologyClass> {
    if rep.has_negative_exponents() {
        return Err(Error::Consistency("invariant is not localization-free".into()));
    }
    Ok(HomologyClass::new(ClassTag::sheaf(r, d), rep, Gauge::Xi))
}

/// Pair invariant with e = 1 and twist nu.
pub fn inv_pair(g: u16, r: i64, d: i64, nu: i64) -> Result<HomologyClass> {
    check_rank(r)?;
    let frame = Frame::pair(r);
    let target = residue_target(frame.nv);
    let apex = ceil_apex(r, d);
    let zero_lower = vec![0; frame.nv];

    // (lower bound, builder) for each factor
    type Builder<'a> = Box<dyn Fn(&[i32]) -> Result<Laurent> + 'a>;
    let mut parts: Vec<(Exps, Builder)> = Vec::new();
    let p = 2 * g as i64 - 2;
    for j in 1..r {
        for i in 0..j {
            let lower = frame.scaled_ind(frame.idx(j), -p.max(0));
            let fr = frame.clone();
            parts.push((
                lower,
                Box::new(move |cap: &[i32]| {
                    if p > 0 {
                        Laurent::expand_inverse_difference(fr.nv, fr.idx(i), fr.idx(j).unwrap(), p as u32, cap)
                    } else if p < 0 {
                        Ok(fr.z(i).sub(&fr.z(j)).pow((-p) as u32, cap))
                    } else {
                        Ok(Laurent::one(fr.nv))
                    }
                }),
            ));
        }
    }
    for (i, di) in apex.iter().enumerate() {
        let q = nu + di;
        let j = frame.idx(i as i64);
        let fr = frame.clone();
        parts.push((frame.inverse_sum_lower(0, j, q), Box::new(move |cap: &[i32]| fr.inverse_sum(0, j, q, cap))));
    }
    {
        let fr = frame.clone();
        parts.push((
            zero_lower.clone(),
            Box::new(move |cap: &[i32]| {
                let w = fr.w().scale(&-Rational::one());
                let x = Frame::series(&w, 1, |l| SuperPoly::var(Var::pair(l as i32)), cap);
                Laurent::exp_series(&x, cap)
            }),
        ));
    }
    for i in 1..r {
        let fr = frame.clone();
        parts.push((
            zero_lower.clone(),
            Box::new(move |cap: &[i32]| {
                if cap.iter().any(|c| *c < 0) {
                    return Ok(Laurent::zero(fr.nv));
                }
                let bump = vec_add(cap, &fr.ind(fr.idx(i)));
                let e = Laurent::exp_series(&fr.wall_exponent(i, &s122_coef, &bump), &bump)?;
                let num = fr.w().add(&fr.z(i - 1));
                let den = fr.inverse_sum(0, fr.idx(i), 1, cap)?;
                let ratio = Laurent::product(&[e, num, den], cap)?;
                Laurent::one(fr.nv).sub(&ratio).invert(cap)
            }),
        ));
    }
    {
        let fr = frame.clone();
        let apex = apex.clone();
        parts.push((
            zero_lower.clone(),
            Box::new(move |cap: &[i32]| fr.apex_exponential(&apex, &s122_coef, &s10_coef, cap)),
        ));
    }
    for i in 0..r {
        let fr = frame.clone();
        let j = frame.idx(i);
        let c_lower = frame.inverse_sum_lower(0, j, 1);
        let lower: Exps = c_lower.iter().map(|x| x * g as i32).collect();
        parts.push((
            lower,
            Box::new(move |cap: &[i32]| {
                let c_cap = vec_sub(cap, &fr.inverse_sum_lower(0, j, 1).iter().map(|x| x * (g as i32 - 1).max(0)).collect::<Vec<_>>());
                let c = fr.inverse_sum(0, j, 1, &c_cap)?;
                fr.sigma_factor(g, i, &c, &s122_coef, false, cap)
            }),
        ));
    }

    let total_lower = parts.iter().fold(vec![0; frame.nv], |acc, (l, _)| vec_add(&acc, l));
    let mut factors = Vec::new();
    for (lower, build) in &parts {
        let cap = vec_sub(&target, &vec_sub(&total_lower, lower));
        factors.push(build(&cap)?);
    }
    let last = factors.pop().unwrap();
    let last_lower = parts.last().unwrap().0.clone();
    let head = Laurent::product(&factors, &vec_sub(&target, &last_lower))?;
    let rep = product_coefficient(&head, &last, &vec![-1; frame.nv]).scale(&main_sign(g, r, d));
    if rep.has_negative_exponents() {
        return Err(Error::Consistency("pair invariant is not localization-free".into()));
    }
    let tag = ClassTag::pair(r, d, 1);
    let rep = xi(&rep, &tag)?;
    let mut c = HomologyClass::new(tag, rep, Gauge::Xi);
    c.nu = Some(nu);
    Ok(c)
}

/// Single-residue rank-2 formula with the translation operators applied directly.
pub fn inv_rank2_oracle(g: u16, d: i64) -> Result<HomologyClass> {
    let target = [-1];
    let p = 2 * g as i64 - 2;
    let cap_body = [-1 + p.max(0) as i32 + 1];
    let sig = sigma(g, &SuperPoly::zero());
    let half_exp = |dd: i64, c: Rational| {
        let e = exp_z_d(&sig, &ClassTag::sheaf(1, dd), 1, 0, &cap_body);
        let mut out = Laurent::zero(1);
        for (a, q) in &e.terms {
            out.add_term(a.clone(), &q.scale(&c.pow(a[0])));
        }
        out
    };
    let left = half_exp(floor_div(d, 2), rat(-1, 2));
    let right = half_exp(ceil_div(d, 2), rat(1, 2));
    // X = z * sum_{k odd} z^{k-1}/(2^{k-1} k!) s_{1,2,k+1}
    let bump = [cap_body[0] + 1];
    let mut q = Laurent::zero(1);
    for k in (1..=bump[0] + 1).step_by(2) {
        let c = factorial_q(k as u64) * int(1i64 << (k - 1));
        q.add_term(vec![k - 1], &SuperPoly::var(Var::sheaf(1, 2, k + 1)).scale(&c.recip()));
    }
    let q = q.truncated(&bump);
    let q_inv = q.invert(&bump)?;
    let z = Laurent::monomial(vec![1], SuperPoly::one());
    let x = z.mul(&q, &bump);
    let mut bern = Laurent::one(1);
    let mut power = Laurent::one(1);
    for n in 1.. {
        power = power.mul(&x, &bump);
        if power.is_zero() {
            break;
        }
        bern = bern.add(&power.scale(&(crate::exact::bernoulli_number(n) / factorial_q(n as u64))));
    }
    let recip = Laurent::product(&[Laurent::monomial(vec![-1], SuperPoly::one()), q_inv, bern], &cap_body)?
        .scale(&-Rational::one());
    let pole = if p >= 0 {
        Laurent::monomial(vec![-(p as i32)], SuperPoly::one())
    } else {
        Laurent::monomial(vec![(-p) as i32], SuperPoly::one())
    };
    let prod = Laurent::product(&[pole, recip, left, right], &target)?;
    let rep = prod.coefficient(&[-1]).scale(&(int(sign_pow(g as i64 + d)) / int(2)));
    finish_sheaf(rep, 2, d)
}

/// Elliptic closed form (-1)^{(r-1)(d-1)} (-s_{1,2,2}/r + s_{1,1,1} s_{2,1,1}), r > 0.
pub fn elliptic_inv_oracle(r: i64, d: i64) -> Result<HomologyClass> {
    check_rank(r)?;
    let rep = (SuperPoly::var(S122).scale(&rat(-1, r))
        + SuperPoly::var(Var::sheaf(1, 1, 1)).mul(&SuperPoly::var(Var::sheaf(2, 1, 1))))
    .scale(&int(sign_pow((r - 1) * (d - 1))));
    Ok(HomologyClass::new(ClassTag::sheaf(r, d), rep, Gauge::Xi))
}

pub fn elliptic_fd_oracle(r: i64, d: i64) -> Result<HomologyClass> {
    check_rank(r)?;
    Ok(HomologyClass::new(
        ClassTag::sheaf(r, d),
        SuperPoly::constant(int(sign_pow((r - 1) * (d - 1)))),
        Gauge::Xi,
    ))
}

/// prod_j d/ds_{j+g,1,1} d/ds_{j,1,1} applied to a class.
pub fn fixed_det_of(g: u16, class: &HomologyClass) -> Result<HomologyClass> {
    let mut p = xi(&class.rep, &class.tag)?;
    for j in (1..=g).rev() {
        p = p.derive(&Var::sheaf(j, 1, 1)).derive(&Var::sheaf(j + g, 1, 1));
    }
    Ok(HomologyClass::new(class.tag, p, Gauge::Xi))
}

pub fn inv_fixed_det(g: u16, r: i64, d: i64) -> Result<HomologyClass> {
    fixed_det_of(g, &inv_sheaf(g, r, d)?)
}

/// Which pairing formula to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingKind {
    Sheaf,
    FixedDeterminant,
}

/// The formal pairing variable alpha (stands for alpha_2).
pub fn alpha() -> Var {
    Var::alpha(2)
}

/// Pairing against prod S_{1,0,l}^{m_l} exp(alpha S_{1,2,2}) as a polynomial in alpha.
pub fn pairing_simple(g: u16, r: i64, d: i64, m: &BTreeMap<i32, u32>, kind: PairingKind) -> Result<SuperPoly> {
    check_rank(r)?;
    let frame = Frame::sheaf(r);
    let target = residue_target(frame.nv);
    let al = SuperPoly::var(alpha());
    let a_coef = |l: i32| if l == 2 { al.clone() } else { SuperPoly::zero() };
    let walls: Vec<i64> = (1..r).collect();
    let wall_lower = walls.iter().fold(vec![0; frame.nv], |acc, i| vec_add(&acc, &frame.wall_lower(*i)));
    let pole_lower = frame.pole_lower(g);
    let common_cap = vec_sub(&target, &wall_lower);
    let body_cap = vec_sub(&common_cap, &pole_lower);

    let mut factors = frame.pole_factors(g, &common_cap)?;
    for (&l, &e) in m {
        let mut s = Laurent::zero(frame.nv);
        for i in 0..r {
            let scale = match kind {
                PairingKind::Sheaf | PairingKind::FixedDeterminant => factorial_q(l as u64).recip(),
            };
            s = s.add(&frame.zt(i).pow(l as u32, &body_cap).scale(&scale));
        }
        factors.push(s.pow(e, &body_cap));
    }
    // exp(alpha sum_i dtilde_i z_i)
    let mut x = Laurent::zero(frame.nv);
    let apex = floor_apex(r, d);
    for (i, di) in apex.iter().enumerate() {
        let dt = int(*di) - rat(d, r);
        x = x.add(&frame.z(i as i64).mul_poly(&al.scale(&dt)));
    }
    factors.push(Laurent::exp_series(&x, &body_cap)?);
    let common = Laurent::product(&factors, &common_cap)?;

    let mut reciprocals = BTreeMap::new();
    for &i in &walls {
        let others = vec_sub(&wall_lower, &frame.wall_lower(i));
        let cap = vec_sub(&vec_sub(&target, &pole_lower), &others);
        reciprocals.insert(i, frame.wall_reciprocal(i, &a_coef, &cap)?);
    }
    let den_cap = vec_sub(&target, &pole_lower);
    let mut total = SuperPoly::zero();
    for omitted in subsets(&boundary_indices(r, d)) {
        let mm = omitted.len() as i64;
        let dens: Vec<Laurent> =
            walls.iter().filter(|i| !omitted.contains(i)).map(|i| reciprocals[i].clone()).collect();
        let den = if dens.is_empty() { Laurent::one(frame.nv) } else { Laurent::product(&dens, &den_cap)? };
        total.add_scaled(&product_coefficient(&common, &den, &vec![-1; frame.nv]), &(int(sign_pow(mm)) / int(mm + 1)));
    }
    let minus_alpha = al.scale(&-Rational::one());
    let prefactor = match kind {
        PairingKind::Sheaf => minus_alpha.pow((r * g as i64) as u32).scale(&(main_sign(g, r, d) / int(r))),
        PairingKind::FixedDeterminant => minus_alpha
            .pow(((r - 1) * g as i64) as u32)
            .scale(&(main_sign(g, r, d) * int(r).pow(g as i32 - 1))),
    };
    let out = total.mul(&prefactor);
    if out.has_negative_exponents() {
        return Err(Error::Consistency("pairing is not polynomial in alpha".into()));
    }
    Ok(out)
}

/// Pairing with prod S_{1,0,l}^{m_l} S_{1,2,2}^n: n! times the alpha^n coefficient.
pub fn pairing_monomial(g: u16, r: i64, d: i64, m: &BTreeMap<i32, u32>, n: u32, kind: PairingKind) -> Result<Rational> {
    let p = pairing_simple(g, r, d, m, kind)?;
    let mono = if n == 0 { Mono::one() } else { Mono(vec![(alpha(), n as i32)]) };
    Ok(p.coeff(&mono) * factorial_q(n as u64))
}

/// Pairing insertion data: S_{1,0,l} powers, odd S_{j,1,l} factors in the
/// order written, and formal weights alpha_l on S_{1,2,l}.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairingSpec {
    pub m: BTreeMap<i32, u32>,
    pub odd: Vec<(u16, i32)>,
}

impl PairingSpec {
    /// The cohomology monomial as a canonical monomial and reordering sign.
    pub fn monomial(&self) -> (i32, Mono) {
        let mut factors: Vec<(Var, i32)> = self.m.iter().map(|(l, e)| (Var::sheaf(1, 0, *l), *e as i32)).collect();
        factors.extend(self.odd.iter().map(|(j, l)| (Var::sheaf(*j, 1, *l), 1)));
        normalize_monomial(&factors)
    }

    pub fn with_fd_insertion(&self, g: u16) -> PairingSpec {
        let mut odd: Vec<(u16, i32)> = Vec::new();
        for j in 1..=g {
            odd.push((j, 1));
            odd.push((j + g, 1));
        }
        odd.extend(self.odd.iter().copied());
        PairingSpec { m: self.m.clone(), odd }
    }
}

fn alpha_coef(l: i32) -> SuperPoly {
    if l >= 2 {
        SuperPoly::var(Var::alpha(l))
    } else {
        SuperPoly::zero()
    }
}

/// Sign of the permutation taking sequence `from` to sequence `to`.
fn permutation_sign<T: PartialEq>(from: &[T], to: &[T]) -> i64 {
    let pos: Vec<usize> = from.iter().map(|x| to.iter().position(|y| y == x).unwrap()).collect();
    let mut inv = 0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            if pos[i] > pos[j] {
                inv += 1;
            }
        }
    }
    sign_pow(inv)
}

/// Assignments of odd insertions to the factors 0..r-1: each factor takes
/// for each j either nothing or one (j, l) and one (j+g, l').
fn odd_assignments(g: u16, r: i64, odd: &[(u16, i32)]) -> Vec<BTreeMap<(u16, i32), i64>> {
    let mut out = vec![BTreeMap::new()];
    for j in 1..=g {
        let lefts: Vec<(u16, i32)> = odd.iter().copied().filter(|x| x.0 == j).collect();
        let rights: Vec<(u16, i32)> = odd.iter().copied().filter(|x| x.0 == j + g).collect();
        if lefts.len() != rights.len() {
            return Vec::new();
        }
        let n = lefts.len();
        // injective maps of lefts to factors, and a bijection of rights onto the same factors
        let mut slots: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for s in &slots {
                for i in 0..r {
                    if !s.contains(&i) {
                        let mut t = s.clone();
                        t.push(i);
                        next.push(t);
                    }
                }
            }
            slots = next;
        }
        let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for p in &perms {
                for k in 0..n {
                    if !p.contains(&k) {
                        let mut t = p.clone();
                        t.push(k);
                        next.push(t);
                    }
                }
            }
            perms = next;
        }
        let mut next_out = Vec::new();
        for base in &out {
            for s in &slots {
                for p in &perms {
                    let mut a = base.clone();
                    for (k, x) in lefts.iter().enumerate() {
                        a.insert(*x, s[k]);
                    }
                    for (k, x) in rights.iter().enumerate() {
                        a.insert(*x, s[p[k]]);
                    }
                    next_out.push(a);
                }
            }
        }
        out = next_out;
    }
    out
}

/// General pairing via the residue formula, as a polynomial in the formal
/// weights alpha_l.
pub fn pairing(g: u16, r: i64, d: i64, spec: &PairingSpec) -> Result<SuperPoly> {
    check_rank(r)?;
    let mut seen = BTreeSet::new();
    for x in &spec.odd {
        if x.0 < 1 || x.0 > 2 * g || x.1 < 1 || !seen.insert(*x) {
            return Ok(SuperPoly::zero());
        }
    }
    // reorder the written odd factors into the (j, l) order
    let mut ordered = spec.odd.clone();
    ordered.sort();
    let written_sign = permutation_sign(&spec.odd, &ordered);

    let frame = Frame::sheaf(r);
    let target = residue_target(frame.nv);
    let walls: Vec<i64> = (1..r).collect();
    let wall_lower = walls.iter().fold(vec![0; frame.nv], |acc, i| vec_add(&acc, &frame.wall_lower(*i)));
    let pole_lower = frame.pole_lower(g);
    let common_cap = vec_sub(&target, &wall_lower);
    let body_cap = vec_sub(&common_cap, &pole_lower);

    let mut base = frame.pole_factors(g, &common_cap)?;
    for (&l, &e) in &spec.m {
        let mut s = Laurent::zero(frame.nv);
        for i in 0..r {
            s = s.add(&frame.zt(i).pow(l as u32, &body_cap).scale(&factorial_q(l as u64).recip()));
        }
        base.push(s.pow(e, &body_cap));
    }
    base.push(frame.apex_exponential(&floor_apex(r, d), &alpha_coef, &zero_coef, &body_cap)?);
    let a_series: Vec<Laurent> = (0..r)
        .map(|i| Frame::series(&frame.zt(i), 0, |n| alpha_coef(n as i32 + 2), &body_cap).scale(&-Rational::one()))
        .collect();

    let mut odd_sum = Laurent::zero(frame.nv);
    for assign in odd_assignments(g, r, &ordered) {
        let key2 = |x: &(u16, i32)| (assign[x], (x.0 - 1) % g, x.0, x.1);
        let mut second = ordered.clone();
        second.sort_by_key(key2);
        let sign = permutation_sign(&ordered, &second);
        let mut term = Laurent::one(frame.nv);
        for x in &ordered {
            let i = assign[x];
            let f = frame.zt(i).pow((x.1 - 1) as u32, &body_cap).scale(&factorial_q((x.1 - 1) as u64).recip());
            term = term.mul(&f, &body_cap);
        }
        for i in 0..r {
            let e = (1..=g).filter(|j| ordered.iter().any(|x| x.0 == *j && assign[x] == i)).count() as u32;
            term = term.mul(&a_series[i as usize].pow(g as u32 - e, &body_cap), &body_cap);
        }
        odd_sum = odd_sum.add(&term.scale(&int(sign)));
    }
    base.push(odd_sum);
    let common = Laurent::product(&base, &common_cap)?;

    let mut reciprocals = BTreeMap::new();
    for &i in &walls {
        let others = vec_sub(&wall_lower, &frame.wall_lower(i));
        let cap = vec_sub(&vec_sub(&target, &pole_lower), &others);
        reciprocals.insert(i, frame.wall_reciprocal(i, &alpha_coef, &cap)?);
    }
    let den_cap = vec_sub(&target, &pole_lower);
    let mut total = SuperPoly::zero();
    for omitted in subsets(&boundary_indices(r, d)) {
        let mm = omitted.len() as i64;
        let dens: Vec<Laurent> =
            walls.iter().filter(|i| !omitted.contains(i)).map(|i| reciprocals[i].clone()).collect();
        let den = if dens.is_empty() { Laurent::one(frame.nv) } else { Laurent::product(&dens, &den_cap)? };
        total.add_scaled(&product_coefficient(&common, &den, &vec![-1; frame.nv]), &(int(sign_pow(mm)) / int(mm + 1)));
    }
    let out = total.scale(&(main_sign(g, r, d) / int(r) * int(written_sign)));
    if out.has_negative_exponents() {
        return Err(Error::Consistency("pairing is not polynomial in the weights".into()));
    }
    Ok(out)
}

/// Pairing computed as the dual pairing against a class, with S_{1,2,l}
/// weights alpha_l.
pub fn pairing_via_class(class: &HomologyClass, spec: &PairingSpec) -> Result<SuperPoly> {
    let (sign, mono) = spec.monomial();
    if sign == 0 {
        return Ok(SuperPoly::zero());
    }
    let rep = xi(&class.rep, &class.tag)?;
    let mut out = SuperPoly::zero();
    for (m, c) in &rep.terms {
        let mut rest = Vec::new();
        let mut weights = Vec::new();
        for (v, e) in &m.0 {
            if v.family == Family::Sheaf && v.k == 2 {
                weights.push((Var::alpha(v.l), *e));
            } else {
                rest.push((*v, *e));
            }
        }
        let rest = Mono(rest);
        if rest != mono {
            continue;
        }
        let n = mono.odd_count() as i64;
        let value = dual_pair(&mono, &SuperPoly::term(c.clone(), rest)) * int(sign_pow(n * (n - 1) / 2));
        let mut w = SuperPoly::constant(value * int(sign as i64));
        for (v, e) in weights {
            w = w.mul(&SuperPoly::var(v).pow(e as u32));
        }
        out += &w;
    }
    Ok(out)
}

/// Rank-2 Bernoulli closed form for prod S_{1,0,l}^{m_l} S_{1,2,2}^{top}.
pub fn pairing_rank2_oracle(g: u16, d: i64, m: &BTreeMap<i32, u32>, kind: PairingKind) -> Rational {
    let g = g as i64;
    let h: i64 = m.iter().map(|(l, e)| *l as i64 * *e as i64).sum();
    let sum_m: i64 = m.values().map(|e| *e as i64).sum();
    if h > 2 * g - 2 || m.iter().any(|(l, e)| l % 2 == 1 && *e > 0) {
        return Rational::zero();
    }
    let mut lfact = Rational::one();
    for (l, e) in m {
        lfact *= factorial_q(*l as u64).pow(*e as i32);
    }
    let b = bernoulli_polynomial((2 * g - 2 - h) as usize, &frac(&rat(d, 2)));
    let (sign, top, two_pow) = match kind {
        PairingKind::Sheaf => (sign_pow(g + d - 1), 4 * g - 3 - h, h - sum_m + 1),
        PairingKind::FixedDeterminant => (sign_pow(d - 1), 3 * g - 3 - h, h - sum_m + 1 - g),
    };
    let two = if two_pow >= 0 { int(1i64 << two_pow) } else { rat(1, 1i64 << -two_pow) };
    int(sign) * factorial_q(top as u64) / (two * lfact * factorial_q((2 * g - 2 - h) as u64)) * b
}

/// Symplectic volume: the fixed-determinant pairing at alpha = -1.
pub fn volume_fd(g: u16, r: i64, d: i64) -> Result<Rational> {
    let p = pairing_simple(g, r, d, &BTreeMap::new(), PairingKind::FixedDeterminant)?;
    evaluate_alpha(&p, &-Rational::one())
}

pub fn evaluate_alpha(p: &SuperPoly, value: &Rational) -> Result<Rational> {
    let mut acc = Rational::zero();
    for (m, c) in &p.terms {
        let e = m.exponent(&alpha());
        if m.0.len() > usize::from(e != 0) {
            return Err(Error::Domain(format!("not a polynomial in alpha: {p}")));
        }
        acc += c * value.pow(e);
    }
    Ok(acc)
}

/// Rank-2 closed form of the volume: (-1)^{g+d} 2^{g-1}/(2g-2)! B_{2g-2}({d/2}).
pub fn volume_rank2_oracle(g: u16, d: i64) -> Rational {
    let g = g as i64;
    int(sign_pow(g + d)) * int(1i64 << (g - 1)) / factorial_q((2 * g - 2) as u64)
        * bernoulli_polynomial((2 * g - 2) as usize, &frac(&rat(d, 2)))
}

/// Volume in the variables y_i = z_{i-1} - z_i, residues y_{r-1} first.
pub fn volume_fd_jk(g: u16, r: i64, d: i64) -> Result<Rational> {
    check_rank(r)?;
    if r.gcd(&d) != 1 {
        return Err(Error::Domain(format!("volume_fd_jk needs coprime (r, d), got ({r}, {d})")));
    }
    let nv = (r - 1) as usize;
    // variable index of y_i is r-1-i, so y_{r-1} is innermost
    let y_idx = |i: i64| (r - 1 - i) as usize;
    let y = |i: i64| {
        let mut c = vec![Rational::zero(); nv];
        c[y_idx(i)] = Rational::one();
        Laurent::linear(&c)
    };
    // z_k = -(y_1 + ... + y_k)
    let z = |k: i64| (1..=k).fold(Laurent::zero(nv), |acc, i| acc.sub(&y(i)));
    let target = residue_target(nv);
    let p = 2 * g as i64 - 2;
    let pole_lower: Exps = {
        let mut acc = vec![0; nv];
        if p > 0 {
            for j in 1..r {
                for i in 0..j {
                    // lead term of z_i - z_j is -y_{i+1}
                    let lead = y_idx(i + 1);
                    for (pos, a) in acc.iter_mut().enumerate() {
                        if pos >= lead {
                            *a -= p as i32;
                        }
                    }
                }
            }
        }
        acc
    };
    let den_lower: Exps = (0..nv).map(|pos| -(pos as i32 + 1)).collect();
    let body_cap = vec_sub(&vec_sub(&target, &pole_lower), &den_lower);
    let mut factors = Vec::new();
    for j in 1..r {
        for i in 0..j {
            let diff = z(i).sub(&z(j));
            if p > 0 {
                let lead = y_idx(i + 1);
                let cap = vec_add(&vec_sub(&target, &vec_add(&pole_lower, &den_lower)), &vec![0; nv]);
                let own: Exps = (0..nv).map(|pos| if pos >= lead { -(p as i32) } else { 0 }).collect();
                let cap = vec_add(&cap, &own);
                let inv = diff.invert(&cap)?;
                factors.push(inv.pow(p as u32, &cap));
            } else if p < 0 {
                factors.push(diff.pow((-p) as u32, &body_cap));
            }
        }
    }
    for i in 1..r {
        let own: Exps = (0..nv).map(|pos| if pos >= y_idx(i) { -1 } else { 0 }).collect();
        let cap = vec_add(&vec_sub(&target, &vec_add(&pole_lower, &den_lower)), &own);
        // 1/(e^y - 1) = -1/(1 - e^y)
        factors.push(Laurent::expand_reciprocal_one_minus_exp(&y(i), &cap)?.scale(&-Rational::one()));
    }
    let mut x = Laurent::zero(nv);
    for (i, di) in floor_apex(r, d).iter().enumerate() {
        let dt = int(*di) - rat(d, r);
        x = x.add(&z(i as i64).scale(&-dt));
    }
    factors.push(Laurent::exp_series(&x, &body_cap)?);
    let prod = Laurent::product(&factors, &target)?;
    let value = prod.coefficient(&vec![-1; nv]).constant_term();
    Ok(value * int(sign_pow((g as i64 - 1) * r * (r - 1) / 2)) * int(r).pow(g as i32 - 1))
}

/// Pushforward along tensoring with a degree +-1 line bundle.
pub fn tensor_shift(class: &HomologyClass, direction: i64) -> Result<HomologyClass> {
    let (r, d, _) = class.tag.rde();
    if class.tag.is_pair() {
        return Err(Error::Domain("tensor shift acts on sheaf classes".into()));
    }
    if direction != 1 && direction != -1 {
        return Err(Error::Domain("direction must be +1 or -1".into()));
    }
    let mut rule = BTreeMap::new();
    for m in class.rep.terms.keys() {
        for (v, _) in &m.0 {
            if v.family == Family::Sheaf && v.k == 0 {
                rule.insert(
                    *v,
                    SuperPoly::var(*v) + SuperPoly::var(Var::sheaf(1, 2, v.l + 1)).scale(&int(direction)),
                );
            }
        }
    }
    let rep = class.rep.substitute(&rule)?;
    Ok(HomologyClass { tag: ClassTag::sheaf(r, d + direction * r), rep, gauge: Gauge::Normal, nu: None })
}

/// Fourier-Mukai pushforward on an elliptic curve: (r, d) -> (d, -r).
pub fn fm_transform(g: u16, class: &HomologyClass) -> Result<HomologyClass> {
    if g != 1 {
        return Err(Error::Domain(format!("Fourier-Mukai transform needs g = 1, got {g}")));
    }
    let (r, d, _) = class.tag.rde();
    let mut rule = BTreeMap::new();
    for m in class.rep.terms.keys() {
        for (v, _) in &m.0 {
            if v.family != Family::Sheaf {
                continue;
            }
            let image = match (v.j, v.k) {
                (1, 2) => SuperPoly::var(Var::sheaf(1, 0, v.l - 1)),
                (2, 1) => SuperPoly::var(Var::sheaf(1, 1, v.l)),
                (1, 1) => -SuperPoly::var(Var::sheaf(2, 1, v.l)),
                (1, 0) => -SuperPoly::var(Var::sheaf(1, 2, v.l + 1)),
                _ => continue,
            };
            rule.insert(*v, image);
        }
    }
    let rep = class.rep.substitute(&rule)?;
    Ok(HomologyClass { tag: ClassTag::sheaf(d, -r), rep, gauge: Gauge::Normal, nu: None })
}
