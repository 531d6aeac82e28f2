//! Exact rationals, factorials, binomials and Bernoulli numbers.

use std::cell::RefCell;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn big(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Canonical "p/q" form, "p" when the denominator is 1.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        None => Ok(big(&s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn factorial_q(n: u64) -> Rational {
    big(&factorial(n))
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

thread_local! {
    static BERNOULLI: RefCell<Vec<Rational>> = RefCell::new(vec![Rational::one()]);
}

/// B_n with B_1 = -1/2.
pub fn bernoulli_number(n: usize) -> Rational {
    BERNOULLI.with(|cache| {
        let mut table = cache.borrow_mut();
        while table.len() <= n {
            let m = table.len();
            let mut acc = Rational::zero();
            for (k, b) in table.iter().enumerate() {
                acc += big(&binomial(m as i64 + 1, k as i64)) * b;
            }
            table.push(-acc / int(m as i64 + 1));
        }
        table[n].clone()
    })
}

pub fn bernoulli_polynomial(n: usize, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut pow = Rational::one();
    for k in (0..=n).rev() {
        acc += big(&binomial(n as i64, k as i64)) * bernoulli_number(k) * &pow;
        pow *= x;
    }
    acc
}

pub fn leibniz_entry(m: u64, mp: u64) -> Result<Rational> {
    if mp > m {
        return Err(Error::Domain(format!("leibniz_entry needs m' <= m, got ({m},{mp})")));
    }
    Ok(Rational::new(
        BigInt::one(),
        BigInt::from(m + 1) * binomial(m as i64, mp as i64),
    ))
}

/// Fractional part in [0, 1).
pub fn frac(q: &Rational) -> Rational {
    q - big(&q.floor().to_integer())
}

pub fn floor_div(a: i64, b: i64) -> i64 {
    Integer::div_floor(&a, &b)
}

pub fn ceil_div(a: i64, b: i64) -> i64 {
    -Integer::div_floor(&-a, &b)
}

pub fn sign_pow(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn lcm_denominators<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli_number(0), int(1));
        assert_eq!(bernoulli_number(1), rat(-1, 2));
        assert_eq!(bernoulli_number(2), rat(1, 6));
        assert_eq!(bernoulli_number(3), int(0));
        assert_eq!(bernoulli_number(4), rat(-1, 30));
        assert_eq!(bernoulli_number(12), rat(-691, 2730));
    }

    #[test]
    fn bernoulli_polys() {
        assert_eq!(bernoulli_polynomial(0, &rat(7, 3)), int(1));
        assert_eq!(bernoulli_polynomial(2, &rat(1, 2)), rat(-1, 12));
        assert_eq!(bernoulli_polynomial(2, &int(0)), rat(1, 6));
    }

    #[test]
    fn leibniz_values() {
        assert_eq!(leibniz_entry(0, 0).unwrap(), int(1));
        assert_eq!(leibniz_entry(1, 0).unwrap(), rat(1, 2));
        assert_eq!(leibniz_entry(2, 1).unwrap(), rat(1, 6));
        assert!(leibniz_entry(1, 2).is_err());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(format_rational(&int(5)), "5");
        assert_eq!(parse_rational("-3/2").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("4/2").unwrap(), int(2));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn bernoulli_generating_function() {
        // y/(e^y-1) * (e^y-1)/y = 1, coefficientwise
        for n in 1..15u64 {
            let mut acc = Rational::zero();
            for k in 0..=n {
                acc += bernoulli_number(k as usize) / factorial_q(k) / factorial_q(n - k + 1);
            }
            assert!(acc.is_zero());
        }
    }

    proptest! {
        #[test]
        fn pascal_recurrence(n in 1usize..30) {
            let mut acc = Rational::zero();
            for k in 0..=n {
                acc += big(&binomial(n as i64 + 1, k as i64)) * bernoulli_number(k);
            }
            prop_assert!(acc.is_zero());
        }

        #[test]
        fn leibniz_recurrence(m in 0u64..25, mp in 0u64..25) {
            prop_assume!(mp <= m);
            let lhs = leibniz_entry(m, mp).unwrap();
            let rhs = leibniz_entry(m + 1, mp).unwrap() + leibniz_entry(m + 1, mp + 1).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn bernoulli_argument_reduction(n in 0usize..12, d in -20i64..20) {
            let arg = frac(&rat(d, 2));
            let expected = if d.rem_euclid(2) == 0 { int(0) } else { rat(1, 2) };
            prop_assert_eq!(&arg, &expected);
            prop_assert_eq!(bernoulli_polynomial(n, &arg), bernoulli_polynomial(n, &expected));
        }

        #[test]
        fn rational_roundtrip(n in -1000i64..1000, d in 1i64..1000) {
            let q = rat(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
    }
}
