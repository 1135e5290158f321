//! Exact rational backend, used to cross-check the floating-point path on
//! small blocks.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Largest block on which exact outcome weights are computed.
pub const EXACT_MAX_BLOCK: usize = 16;

/// A probability held as a reduced fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactProbability(BigRational);

impl ExactProbability {
    pub fn new(value: BigRational) -> Result<Self> {
        if value < BigRational::zero() || value > BigRational::one() {
            return domain(format!("{value} is not a probability"));
        }
        // Ratio::new reduces and normalises the sign of the denominator.
        Ok(ExactProbability(BigRational::new(
            value.numer().clone(),
            value.denom().clone(),
        )))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn exact_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

fn ratio_of(n: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `C(n, a+b) C(a+b, a) 2^-(a+b)`, exactly.
pub fn exact_conditional_weight(n: usize, a: usize, b: usize) -> Result<ExactProbability> {
    if a + b > n {
        return domain(format!("outcome ({n},{a},{b}) has a+b > n"));
    }
    let k = a + b;
    let num = exact_binomial(n, k) * exact_binomial(k, a);
    let den = BigUint::one() << k;
    ExactProbability::new(BigRational::new(num.into(), den.into()))
}

/// `p^(a+b) (1-p)^(n-a-b) C(n,a+b) C(a+b,a) alpha2^a (1-alpha2)^b`, exactly.
pub fn exact_outcome_probability(
    p: &BigRational,
    alpha2: &BigRational,
    n: usize,
    a: usize,
    b: usize,
) -> Result<ExactProbability> {
    if n > EXACT_MAX_BLOCK {
        return domain(format!(
            "exact backend limited to n <= {EXACT_MAX_BLOCK}, got {n}"
        ));
    }
    if a + b > n {
        return domain(format!("outcome ({n},{a},{b}) has a+b > n"));
    }
    let one = BigRational::one();
    for (name, v) in [("p", p), ("alpha2", alpha2)] {
        if *v < BigRational::zero() || *v > one {
            return domain(format!("{name} = {v} outside [0, 1]"));
        }
    }
    let k = a + b;
    let q = &one - p;
    let beta2 = &one - alpha2;
    let counts = ratio_of(exact_binomial(n, k) * exact_binomial(k, a));
    let value = counts
        * Pow::pow(p, k as u32)
        * Pow::pow(&q, (n - k) as u32)
        * Pow::pow(alpha2, a as u32)
        * Pow::pow(&beta2, b as u32);
    ExactProbability::new(value)
}

/// Parses `"num/den"` or a plain decimal such as `"0.25"` or `"-1.5e-3"` into
/// an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .or_else(|_| domain(format!("bad numerator in {s:?}")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .or_else(|_| domain(format!("bad denominator in {s:?}")))?;
        if den.is_zero() {
            return domain(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(num, den));
    }
    parse_decimal(s)
}

fn not_a_number<T>(s: &str) -> Result<T> {
    domain(format!("not a number: {s:?}"))
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (
            &s[..i],
            s[i + 1..].parse::<i32>().or_else(|_| not_a_number(s))?,
        ),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return not_a_number(s);
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return not_a_number(s);
    }
    let digits: BigInt = format!("0{int_part}{frac_part}")
        .parse()
        .or_else(|_| not_a_number(s))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(digits, Pow::pow(&ten, (-scale) as u32))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binomials() {
        assert_eq!(exact_binomial(4, 2), BigUint::from(6u32));
        assert_eq!(exact_binomial(5, 6), BigUint::zero());
        assert_eq!(exact_binomial(20, 10), BigUint::from(184_756u32));
    }

    #[test]
    fn probability_is_reduced() {
        let w = exact_conditional_weight(4, 2, 2).unwrap();
        assert_eq!(w.as_ratio(), &r(3, 8));
        assert_eq!(w.numer(), &BigInt::from(3));
        assert!(ExactProbability::new(r(3, 2)).is_err());
        assert!(ExactProbability::new(r(-1, 2)).is_err());
    }

    #[test]
    fn outcome_probability_two_thirds() {
        let p = r(2, 3);
        let half = r(1, 2);
        let w = exact_outcome_probability(&p, &half, 2, 1, 1).unwrap();
        assert_eq!(w.as_ratio(), &r(2, 9));
        assert!(exact_outcome_probability(&p, &half, 32, 1, 1).is_err());
        assert!(exact_outcome_probability(&r(4, 3), &half, 2, 1, 1).is_err());
    }

    #[test]
    fn exact_distribution_normalised() {
        let p = r(2, 3);
        let alpha2 = r(1, 5);
        for n in [1usize, 2, 4, 8, 16] {
            let mut total = BigRational::zero();
            for a in 0..=n {
                for b in 0..=n - a {
                    total += exact_outcome_probability(&p, &alpha2, n, a, b)
                        .unwrap()
                        .as_ratio()
                        .clone();
                }
            }
            assert_eq!(total, BigRational::one());
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("2/3").unwrap(), r(2, 3));
        assert_eq!(parse_rational(" 4 / 6 ").unwrap(), r(2, 3));
        assert_eq!(parse_rational("0.25").unwrap(), r(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), r(1, 2));
        assert_eq!(parse_rational("1").unwrap(), r(1, 1));
        assert_eq!(parse_rational("2.5e-1").unwrap(), r(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), r(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("0.5.1").is_err());
    }
}
