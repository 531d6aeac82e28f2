//! Individual computations, each producing a JSON payload.

use std::collections::BTreeMap;

use moduli_core::exact::format_rational;
use moduli_core::invariants::{
    alpha, elliptic_inv_oracle, fixed_det_of, in_positive_cone, inv_pair, inv_rank0, inv_rank2_oracle,
    inv_sheaf_opts, inv_sheaf_via_regsum, pairing, pairing_simple, volume_fd, volume_fd_jk, PairingKind,
    PairingSpec,
};
use moduli_core::vertex::{CurveContext, HomologyClass};
use moduli_core::{Error, Mono, Rational, SuperPoly, Var};
use serde_json::{json, Value};

use crate::cache::Cache;

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }

    pub fn compute(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Domain(_) | Error::Parse(_) => Failure::usage(e.to_string()),
            _ => Failure::compute(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Closed residue formula.
    Closed,
    /// Regularized sum over the degree lattice.
    Regsum,
    /// Independent closed forms (rank 2, or genus 1).
    Oracle,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Regsum => "regsum",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvariantJob {
    pub g: u16,
    pub r: i64,
    pub d: i64,
    pub pair: bool,
    pub nu: Option<i64>,
    pub fixed_det: bool,
    pub method: Method,
    pub even_only: bool,
}

impl InvariantJob {
    fn mode(&self) -> &'static str {
        match (self.pair, self.fixed_det) {
            (true, _) => "pair",
            (false, true) => "fixed-determinant",
            (false, false) => "sheaf",
        }
    }

    fn key(&self) -> String {
        Cache::key(&[
            ("cmd", "invariant".into()),
            ("g", self.g.to_string()),
            ("r", self.r.to_string()),
            ("d", self.d.to_string()),
            ("mode", self.mode().into()),
            ("nu", self.nu.map_or("-".into(), |n| n.to_string())),
            ("method", self.method.name().into()),
            ("even_only", self.even_only.to_string()),
        ])
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.pair && self.fixed_det {
            return Err(Failure::usage("--pair and --fixed-determinant are exclusive"));
        }
        if self.nu.is_some() && !self.pair {
            return Err(Failure::usage("--nu only applies with --pair"));
        }
        if self.pair && self.method != Method::Closed {
            return Err(Failure::usage("pair invariants support only --method closed"));
        }
        if self.r == 0 && (self.method != Method::Closed || self.pair || self.fixed_det) {
            return Err(Failure::usage("rank 0 supports only the plain closed invariant"));
        }
        if !self.pair && !in_positive_cone(self.r, self.d) {
            return Err(Failure::usage(format!("({}, {}) is outside the positive cone", self.r, self.d)));
        }
        Ok(())
    }

    fn class(&self) -> Result<HomologyClass, Failure> {
        let (g, r, d) = (self.g, self.r, self.d);
        if self.pair {
            let nu = self.nu.unwrap_or_else(|| CurveContext::minimal_nu(r, d));
            return Ok(inv_pair(g, r, d, nu)?);
        }
        if r == 0 {
            return Ok(inv_rank0(g, d)?);
        }
        let sheaf = match self.method {
            Method::Closed => inv_sheaf_opts(g, r, d, self.even_only && !self.fixed_det)?,
            Method::Regsum => inv_sheaf_via_regsum(g, r, d)?,
            Method::Oracle => match (g, r) {
                (1, _) => elliptic_inv_oracle(r, d)?,
                (_, 2) => inv_rank2_oracle(g, d)?,
                _ => return Err(Failure::usage("oracle method needs genus 1 or rank 2")),
            },
        };
        if self.fixed_det {
            return Ok(fixed_det_of(g, &sheaf)?);
        }
        Ok(sheaf)
    }

    pub fn run(&self, cache: &Cache) -> Result<Value, Failure> {
        self.validate()?;
        cache.get_or_compute(&self.key(), || {
            let mut c = self.class()?;
            if self.even_only {
                c.rep = c.rep.even_only();
            }
            let mut v = c.to_json();
            v["meta"] = json!({
                "genus": self.g,
                "mode": self.mode(),
                "method": self.method.name(),
                "engine": moduli_core::ENGINE_VERSION,
                "extrapolated": self.g == 0,
            });
            Ok(v)
        })
    }
}

#[derive(Clone, Debug)]
pub struct PairingJob {
    pub g: u16,
    pub r: i64,
    pub d: i64,
    pub fixed_det: bool,
    pub monomial: Vec<(Var, u32)>,
    pub alpha: bool,
}

fn monomial_text(m: &[(Var, u32)]) -> String {
    let parts: Vec<String> = m.iter().map(|(v, e)| format!("{v}^{e}")).collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::from_integer(1.into()), |acc, k| acc * Rational::from_integer(k.into()))
}

/// Coefficients of a polynomial in alpha, as [exponent, value] pairs.
fn alpha_poly(p: &SuperPoly) -> Result<Value, Failure> {
    let mut out = Vec::new();
    for (m, c) in &p.terms {
        let e = m.exponent(&alpha());
        if m.0.len() > usize::from(e != 0) {
            return Err(Failure::compute(format!("not a polynomial in alpha: {p}")));
        }
        out.push(json!([e.to_string(), format_rational(c)]));
    }
    Ok(json!({ "alpha_poly": out }))
}

impl PairingJob {
    fn key(&self) -> String {
        Cache::key(&[
            ("cmd", "pairing".into()),
            ("g", self.g.to_string()),
            ("r", self.r.to_string()),
            ("d", self.d.to_string()),
            ("mode", if self.fixed_det { "fixed-determinant" } else { "sheaf" }.into()),
            ("monomial", monomial_text(&self.monomial)),
            ("alpha", self.alpha.to_string()),
        ])
    }

    /// S_{1,0,l} powers and the remaining factors.
    fn split(&self) -> (BTreeMap<i32, u32>, Vec<(Var, u32)>) {
        let mut m = BTreeMap::new();
        let mut rest = Vec::new();
        for (v, e) in &self.monomial {
            if v.k == 0 {
                *m.entry(v.l).or_insert(0) += e;
            } else {
                rest.push((*v, *e));
            }
        }
        (m, rest)
    }

    fn compute(&self) -> Result<Value, Failure> {
        let (m, rest) = self.split();
        let kind = if self.fixed_det { PairingKind::FixedDeterminant } else { PairingKind::Sheaf };
        if self.alpha {
            if !rest.is_empty() {
                return Err(Failure::usage("--alpha takes only S_{1,0,l} factors in --monomial"));
            }
            return alpha_poly(&pairing_simple(self.g, self.r, self.d, &m, kind)?);
        }
        if self.fixed_det {
            // the fixed-determinant formula covers S_{1,0,l} and S_{1,2,2} insertions
            if rest.iter().any(|(v, _)| *v != Var::sheaf(1, 2, 2)) {
                return Err(Failure::usage("fixed-determinant pairings take S_{1,0,l} and S_{1,2,2} factors"));
            }
            let n: u32 = rest.iter().map(|(_, e)| e).sum();
            let p = pairing_simple(self.g, self.r, self.d, &m, kind)?;
            let mono = if n == 0 { Mono::one() } else { Mono(vec![(alpha(), n as i32)]) };
            let value = p.coeff(&mono) * factorial(n);
            return Ok(json!({ "value": format_rational(&value) }));
        }
        let odd: Vec<(u16, i32)> = rest.iter().filter(|(v, _)| v.is_odd()).map(|(v, _)| (v.j, v.l)).collect();
        let mut weights = Vec::new();
        let mut scale = Rational::from_integer(1.into());
        for (v, e) in rest.iter().filter(|(v, _)| v.k == 2) {
            weights.push((Var::alpha(v.l), *e as i32));
            scale *= factorial(*e);
        }
        let p = pairing(self.g, self.r, self.d, &PairingSpec { m, odd })?;
        let (_, mono) = moduli_core::superalg::normalize_monomial(&weights);
        Ok(json!({ "value": format_rational(&(p.coeff(&mono) * scale)) }))
    }

    pub fn run(&self, cache: &Cache) -> Result<Value, Failure> {
        if !in_positive_cone(self.r, self.d) || self.r < 1 {
            return Err(Failure::usage(format!("({}, {}) needs positive rank", self.r, self.d)));
        }
        cache.get_or_compute(&self.key(), || self.compute())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum VolumeMethod {
    /// Fixed-determinant pairing at alpha = -1.
    Residue,
    /// Also evaluate the y-variable residue form and compare.
    Jk,
}

pub fn volume(g: u16, r: i64, d: i64, method: VolumeMethod, cache: &Cache) -> Result<Value, Failure> {
    if r < 1 {
        return Err(Failure::usage(format!("volume needs positive rank, got {r}")));
    }
    let key = Cache::key(&[
        ("cmd", "volume".into()),
        ("g", g.to_string()),
        ("r", r.to_string()),
        ("d", d.to_string()),
        ("method", format!("{method:?}").to_lowercase()),
    ]);
    cache.get_or_compute(&key, || {
        let v = volume_fd(g, r, d)?;
        let mut out = json!({"genus": g, "rank": r, "degree": d, "value": format_rational(&v)});
        if method == VolumeMethod::Jk {
            out["jk"] = match volume_fd_jk(g, r, d) {
                Ok(j) => json!(format_rational(&j)),
                Err(Error::Domain(_)) => Value::Null,
                Err(e) => return Err(e.into()),
            };
        }
        Ok(out)
    })
}

/// Rows whose two volume evaluations disagree.
pub fn volume_mismatches(rows: &[Value]) -> Vec<String> {
    rows.iter()
        .filter(|row| matches!(row.get("jk"), Some(Value::String(j)) if Some(j.as_str()) != row["value"].as_str()))
        .map(|row| format!("g={} ({},{}): {} vs {}", row["genus"], row["rank"], row["degree"], row["value"], row["jk"]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatch_is_reported() {
        let good = json!({"genus": 2, "rank": 2, "degree": 1, "value": "1/12", "jk": "1/12"});
        let bad = json!({"genus": 2, "rank": 2, "degree": 1, "value": "1/12", "jk": "1/6"});
        let absent = json!({"genus": 2, "rank": 2, "degree": 0, "value": "1/6", "jk": null});
        assert!(volume_mismatches(&[good.clone(), absent]).is_empty());
        assert_eq!(volume_mismatches(&[good, bad]).len(), 1);
    }

    #[test]
    fn pairing_golden_value() {
        let job = PairingJob {
            g: 2,
            r: 2,
            d: 1,
            fixed_det: false,
            monomial: vec![(Var::sheaf(1, 2, 2), 5)],
            alpha: false,
        };
        assert_eq!(job.compute().unwrap(), json!({"value": "-5/2"}));
        let fd = PairingJob { fixed_det: true, monomial: vec![(Var::sheaf(1, 2, 2), 3)], ..job };
        assert_eq!(fd.compute().unwrap(), json!({"value": "-1/2"}));
    }
}
