//! Parsing of cohomology monomials such as `S_{1,0,2}^2*S_{1,2,2}^5`.

use std::sync::OnceLock;

use moduli_core::Var;
use regex::Regex;

/// Factors in the order written; odd factors must have exponent 1.
pub fn parse_monomial(text: &str) -> Result<Vec<(Var, u32)>, String> {
    static FACTOR: OnceLock<Regex> = OnceLock::new();
    let re = FACTOR.get_or_init(|| {
        Regex::new(r"^[sS]_\{?\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\}?(?:\^(\d+))?$").expect("valid regex")
    });
    let mut out = Vec::new();
    for tok in text.split(|c: char| c == '*' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        if tok == "1" {
            continue;
        }
        let caps = re.captures(tok).ok_or_else(|| format!("cannot parse factor '{tok}'"))?;
        let num = |i: usize| caps[i].parse::<u32>().map_err(|e| format!("'{tok}': {e}"));
        let (j, k, l) = (num(1)?, num(2)?, num(3)?);
        let e = caps.get(4).map_or(Ok(1), |m| m.as_str().parse::<u32>().map_err(|e| format!("'{tok}': {e}")))?;
        let v = match k {
            0 if j == 1 && l >= 1 => Var::sheaf(1, 0, l as i32),
            1 if j >= 1 && l >= 1 => Var::sheaf(j as u16, 1, l as i32),
            2 if j == 1 && l >= 2 => Var::sheaf(1, 2, l as i32),
            _ => return Err(format!("'{tok}' is not a generator S_{{1,0,l}}, S_{{j,1,l}} or S_{{1,2,l}}")),
        };
        if v.is_odd() && e != 1 {
            return Err(format!("odd factor '{tok}' squares to zero"));
        }
        if e > 0 {
            out.push((v, e));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_factors() {
        let f = parse_monomial("S_{1,0,2}^2 * s_{1,2,2}^5 S_{3,1,1}").unwrap();
        assert_eq!(f, vec![(Var::sheaf(1, 0, 2), 2), (Var::sheaf(1, 2, 2), 5), (Var::sheaf(3, 1, 1), 1)]);
        assert!(parse_monomial("1").unwrap().is_empty());
        assert!(parse_monomial("S_{1,1,1}^2").is_err());
        assert!(parse_monomial("S_{2,0,1}").is_err());
        assert!(parse_monomial("T_{1,0,1}").is_err());
    }
}
