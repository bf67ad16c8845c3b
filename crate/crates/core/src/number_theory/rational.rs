use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// High-precision rational stand-in for a real number.
///
/// Always stored in lowest terms with a positive denominator. `source_depth`
/// is the number of continued-fraction terms the value was built from, or 0
/// for values given exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalApprox {
    value: BigRational,
    source_depth: usize,
}

impl RationalApprox {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self {
            value: BigRational::new(numerator, denominator),
            source_depth: 0,
        })
    }

    pub fn from_ratio(numerator: i64, denominator: i64) -> Result<Self> {
        Self::new(BigInt::from(numerator), BigInt::from(denominator))
    }

    pub fn from_integer(n: i64) -> Self {
        Self {
            value: BigRational::from_integer(BigInt::from(n)),
            source_depth: 0,
        }
    }

    pub fn from_rational(value: BigRational) -> Self {
        Self {
            value,
            source_depth: 0,
        }
    }

    /// Exact conversion; every finite double is a dyadic rational.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Self::from_rational)
            .ok_or_else(|| Error::Domain(format!("{x} is not finite")))
    }

    /// Evaluates `[a0; a1, a2, ...]` and records the depth.
    pub fn from_continued_fraction(quotients: &[BigInt]) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::Domain("empty continued fraction".into()));
        }
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (quotients[0].clone(), BigInt::one());
        for a in &quotients[1..] {
            if !a.is_positive() {
                return Err(Error::Domain(
                    "partial quotients after the first must be positive".into(),
                ));
            }
            let p2 = a * &p1 + &p0;
            let q2 = a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
        }
        let mut r = Self::new(p1, q1)?;
        r.source_depth = quotients.len();
        Ok(r)
    }

    pub fn with_source_depth(mut self, depth: usize) -> Self {
        self.source_depth = depth;
        self
    }

    pub fn numerator(&self) -> &BigInt {
        self.value.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.value.denom()
    }

    pub fn source_depth(&self) -> usize {
        self.source_depth
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }

    /// Exact `{x} = x - floor(x)`.
    pub fn fractional_part(&self) -> RationalApprox {
        Self {
            value: rational_fract(&self.value),
            source_depth: self.source_depth,
        }
    }

    /// Exact `<x> = min({x}, 1 - {x})`.
    pub fn nearest_integer_distance(&self) -> RationalApprox {
        Self {
            value: rational_nearest_distance(&self.value),
            source_depth: self.source_depth,
        }
    }
}

impl fmt::Display for RationalApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.value.numer(), self.value.denom())
    }
}

impl FromStr for RationalApprox {
    type Err = Error;

    /// Accepts `p/q`, an integer, or a plain decimal such as `-0.6180339887`
    /// (read exactly as a terminating decimal).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("cannot parse '{s}' as a rational"));
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            return Self::new(p, q);
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let all_digits = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer = BigInt::from_str(&digits).map_err(|_| bad())?;
        if negative {
            numer = -numer;
        }
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        Self::new(numer, denom)
    }
}

/// `{x}` for doubles, always in `[0, 1)`.
pub fn fractional_part(x: f64) -> f64 {
    below_one(x - x.floor())
}

/// `<x>`, the distance to the nearest integer, in `[0, 1/2]`.
pub fn nearest_integer_distance(x: f64) -> f64 {
    let f = fractional_part(x);
    f.min(1.0 - f)
}

pub(crate) fn rational_fract(x: &BigRational) -> BigRational {
    x - x.floor()
}

pub(crate) fn rational_nearest_distance(x: &BigRational) -> BigRational {
    let f = rational_fract(x);
    let g = BigRational::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// `x - floor(x)` can round up to exactly 1.0 for tiny negative inputs.
pub(crate) fn below_one(f: f64) -> f64 {
    if f >= 1.0 {
        f64::from_bits(1.0f64.to_bits() - 1)
    } else {
        f
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out of f64 range; go through logarithms of the parts.
        let l = ln_bigint(r.numer()) - ln_bigint(r.denom());
        let s = if r.is_negative() { -1.0 } else { 1.0 };
        s * l.exp()
    })
}

/// Natural log of `|n|` without overflow for arbitrarily large integers.
pub(crate) fn ln_bigint(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

pub(crate) fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(r)` for positive rationals of any size.
pub(crate) fn ln_rational(r: &BigRational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Correctly rounded `r / q` for `0 <= r < q`, mapped into `[0, 1)`.
///
/// One division to 66 significant bits plus a sticky bit, then a single
/// round-to-nearest conversion.
pub(crate) fn unit_fraction_to_f64(r: &BigUint, q: &BigUint) -> f64 {
    debug_assert!(r < q);
    if r.is_zero() {
        return 0.0;
    }
    let gap = q.bits() as i64 - r.bits() as i64;
    let k = 66 + gap;
    if k > 1000 {
        return 0.0;
    }
    let scaled: BigUint = r << (k as u64);
    let (t, rem) = scaled.div_rem(q);
    let mut t = t.to_u128().expect("quotient fits in 68 bits");
    if !rem.is_zero() {
        t |= 1;
    }
    let v = t as f64 * pow2_neg(k as i32);
    below_one(v)
}

fn pow2_neg(k: i32) -> f64 {
    debug_assert!((0..1022).contains(&k));
    f64::from_bits(((1023 - k) as u64) << 52)
}

/// Non-negative residue of `a` modulo a positive `m`.
pub(crate) fn mod_positive(a: &BigInt, m: &BigUint) -> BigUint {
    let m_int = BigInt::from_biguint(Sign::Plus, m.clone());
    a.mod_floor(&m_int)
        .to_biguint()
        .expect("mod_floor with positive modulus is non-negative")
}

/// Output of [`continued_fraction`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    pub quotients: Vec<BigInt>,
    pub convergents: Vec<RationalApprox>,
    /// The expansion ended (exact rational) before the requested depth.
    pub terminated: bool,
}

/// Continued-fraction expansion to `depth` terms by the Euclidean algorithm.
pub fn continued_fraction(x: &RationalApprox, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    let mut num = x.numerator().clone();
    let mut den = x.denominator().clone();
    let mut quotients = Vec::new();
    let mut convergents = Vec::new();
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut terminated = false;
    while quotients.len() < depth {
        if den.is_zero() {
            terminated = true;
            break;
        }
        let (a, r) = num.div_mod_floor(&den);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        convergents.push(
            RationalApprox::new(p1.clone(), q1.clone())?.with_source_depth(quotients.len() + 1),
        );
        quotients.push(a);
        num = std::mem::replace(&mut den, r);
    }
    if !terminated && den.is_zero() {
        terminated = true;
    }
    Ok(ContinuedFraction {
        quotients,
        convergents,
        terminated,
    })
}

/// Continued fraction of a double, read exactly.
pub fn continued_fraction_f64(x: f64, depth: usize) -> Result<ContinuedFraction> {
    continued_fraction(&RationalApprox::from_f64(x)?, depth)
}

/// Named high-precision constants, built from their continued fractions.
pub mod constants {
    use super::*;

    /// Number of terms used for named constants on the command line.
    pub const DEFAULT_TERMS: usize = 200;

    fn repeated(first: i64, rest: i64, terms: usize) -> RationalApprox {
        let mut q = vec![BigInt::from(first)];
        q.extend(std::iter::repeat_n(BigInt::from(rest), terms.saturating_sub(1)));
        RationalApprox::from_continued_fraction(&q).expect("well-formed expansion")
    }

    /// The golden ratio `[1; 1, 1, ...]`.
    pub fn golden_ratio(terms: usize) -> RationalApprox {
        repeated(1, 1, terms)
    }

    /// `phi - 1 = [0; 1, 1, ...]`, the golden rotation number in `[0, 1)`.
    pub fn golden_conjugate(terms: usize) -> RationalApprox {
        repeated(0, 1, terms)
    }

    /// `sqrt(2) = [1; 2, 2, ...]`.
    pub fn sqrt2(terms: usize) -> RationalApprox {
        repeated(1, 2, terms)
    }

    /// Truncated Liouville-style sum `sum_{k=1}^{terms} 10^(-k!)`.
    pub fn liouville(terms: u32) -> RationalApprox {
        let mut acc = BigRational::zero();
        let mut fact: u32 = 1;
        for k in 1..=terms {
            fact *= k;
            acc += BigRational::new(BigInt::one(), BigInt::from(10u32).pow(fact));
        }
        RationalApprox::from_rational(acc)
    }

    /// `floor(pi * 2^bits) / 2^bits` via Machin's formula.
    pub fn pi(bits: u32) -> RationalApprox {
        let guard = 32;
        let scale = BigInt::one() << (bits + guard) as usize;
        let atan_inv = |n: u32| -> BigInt {
            // atan(1/n) = sum (-1)^k / ((2k+1) n^(2k+1))
            let n2 = BigInt::from(n) * BigInt::from(n);
            let mut term = &scale / BigInt::from(n);
            let mut sum = BigInt::zero();
            let mut k: u32 = 0;
            while !term.is_zero() {
                let t = &term / BigInt::from(2 * k + 1);
                if k % 2 == 0 {
                    sum += t;
                } else {
                    sum -= t;
                }
                term /= &n2;
                k += 1;
            }
            sum
        };
        let pi_scaled = BigInt::from(16) * atan_inv(5) - BigInt::from(4) * atan_inv(239);
        let truncated = pi_scaled >> guard as usize;
        RationalApprox::new(truncated, BigInt::one() << bits as usize)
            .expect("nonzero denominator")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> RationalApprox {
        s.parse().unwrap()
    }

    #[test]
    fn fractional_part_examples() {
        assert_eq!(fractional_part(2.75), 0.75);
        assert_eq!(fractional_part(-0.25), 0.75);
        assert_eq!(q("7/3").fractional_part(), q("1/3"));
        assert_eq!(q("-1/3").fractional_part(), q("2/3"));
        assert!(fractional_part(-1e-20) < 1.0);
    }

    #[test]
    fn nearest_integer_distance_examples() {
        assert_eq!(nearest_integer_distance(0.75), 0.25);
        assert_eq!(nearest_integer_distance(3.0), 0.0);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // <phi> = 1 - {phi} = (3 - sqrt 5)/2
        let expected = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((nearest_integer_distance(phi) - expected).abs() < 1e-15);
        assert!((expected - 0.381966).abs() < 1e-6);
        assert_eq!(q("7/10").nearest_integer_distance(), q("3/10"));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("0.25"), q("1/4"));
        assert_eq!(q("-1.5"), q("-3/2"));
        assert_eq!(q("3"), RationalApprox::from_integer(3));
        assert!("abc".parse::<RationalApprox>().is_err());
        assert!("1/0".parse::<RationalApprox>().is_err());
        assert!(".".parse::<RationalApprox>().is_err());
    }

    /// Independent Euclid on a 50-digit decimal approximation.
    fn euclid_oracle(num: &str, den_digits: u32, depth: usize) -> Vec<i64> {
        let mut a = num.parse::<BigInt>().unwrap();
        let mut b = BigInt::from(10).pow(den_digits);
        let mut out = vec![];
        for _ in 0..depth {
            let (qq, r) = a.div_rem(&b);
            out.push(qq.to_i64().unwrap());
            a = b;
            b = r;
        }
        out
    }

    #[test]
    fn continued_fraction_examples() {
        let phi50 = "161803398874989484820458683436563811772030917980576";
        let expected = euclid_oracle(phi50, 50, 5);
        assert_eq!(expected, vec![1, 1, 1, 1, 1]);
        let cf = continued_fraction(&constants::golden_ratio(60), 5).unwrap();
        let got: Vec<i64> = cf.quotients.iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(got, expected);
        assert!(!cf.terminated);

        let cf = continued_fraction(&q("7/3"), 10).unwrap();
        let got: Vec<i64> = cf.quotients.iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(got, vec![2, 3]);
        assert!(cf.terminated);
        assert_eq!(cf.convergents.last().unwrap().as_rational(), q("7/3").as_rational());

        let sqrt2_50 = "141421356237309504880168872420969807856967187537694";
        let expected = euclid_oracle(sqrt2_50, 50, 4);
        assert_eq!(expected, vec![1, 2, 2, 2]);
        let cf = continued_fraction_f64(std::f64::consts::SQRT_2, 4).unwrap();
        let got: Vec<i64> = cf.quotients.iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn continued_fraction_rejects_zero_depth() {
        assert!(continued_fraction(&q("1/2"), 0).is_err());
    }

    #[test]
    fn pi_is_accurate() {
        let p = constants::pi(128);
        assert!((p.to_f64() - std::f64::consts::PI).abs() < 1e-16);
        let digits = "3141592653589793238462643383279502884197";
        let oracle = BigRational::new(digits.parse().unwrap(), BigInt::from(10).pow(39));
        let diff = (p.as_rational() - oracle).abs();
        assert!(diff < BigRational::new(BigInt::one(), BigInt::from(10).pow(37)));
    }

    #[test]
    fn unit_fraction_is_correctly_rounded() {
        let cases = [(1u64, 3u64), (2, 3), (1, 7), (999_999, 1_000_000), (1, 1 << 60)];
        for (r, qq) in cases {
            let got = unit_fraction_to_f64(&BigUint::from(r), &BigUint::from(qq));
            assert_eq!(got, r as f64 / qq as f64, "{r}/{qq}");
        }
        // Values within half an ulp of 1 must stay below 1.
        let qq = BigUint::one() << 80u32;
        let r = &qq - BigUint::one();
        assert!(unit_fraction_to_f64(&r, &qq) < 1.0);
    }

    #[test]
    fn liouville_has_factorial_gaps() {
        let l = constants::liouville(4);
        assert_eq!(l.denominator(), &BigInt::from(10).pow(24));
    }
}
