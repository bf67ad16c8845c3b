use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::rational::{continued_fraction, ln_bigint, ln_rational, rational_nearest_distance, RationalApprox};
use crate::error::{Error, Result};

/// Finite-range estimate of the type `eta` of an irrational.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeEstimate {
    /// Least-squares exponent of `<q x>` against `q` over the convergents,
    /// clamped below at 1.
    pub eta_hat: f64,
    /// Convergent denominator with the largest single-point ratio
    /// `log(1/<q x>) / log q`.
    pub witness_q: u64,
    /// That largest single-point ratio.
    pub max_ratio: f64,
    pub q_max: u64,
    /// Number of convergent denominators in `[2, q_max]` used.
    pub convergents_used: usize,
}

/// Estimates the type of `x` from its convergent denominators `2 <= q_k <= q_max`.
///
/// For each convergent the point `(log q_k, log 1/<q_k x>)` is formed and
/// `eta_hat` is the least-squares slope through those points. The slope
/// removes the bounded factor `q <q x>` that makes single-point ratios
/// converge only like `1 + c / log q`.
pub fn irrational_type_estimate(x: &RationalApprox, q_max: u64) -> Result<TypeEstimate> {
    if q_max < 2 {
        return Err(Error::Domain("q_max must be at least 2".into()));
    }
    let q_max_big = BigInt::from(q_max);
    if x.denominator() <= &(&q_max_big * &q_max_big) {
        return Err(Error::Precision(format!(
            "denominator {} does not exceed q_max^2 = {}",
            x.denominator(),
            q_max as u128 * q_max as u128
        )));
    }
    // Convergent denominators grow at least like Fibonacci numbers.
    let depth = 4 + (q_max as f64).log(1.6).ceil() as usize;
    let cf = continued_fraction(x, depth)?;

    let mut points = Vec::new();
    let mut witness = (0u64, f64::NEG_INFINITY);
    for conv in &cf.convergents {
        let q = conv.denominator();
        if q > &q_max_big {
            break;
        }
        let qv = q.to_u64().expect("bounded by q_max");
        if qv < 2 {
            continue;
        }
        let dist = rational_nearest_distance(&(x.as_rational() * BigRational::from_integer(q.clone())));
        if dist.is_zero() {
            // Unreachable under the precision precondition.
            return Err(Error::Precision(format!("x is rational with denominator {qv}")));
        }
        let lx = ln_bigint(q);
        let ly = -ln_rational(&dist);
        let ratio = ly / lx;
        if ratio > witness.1 {
            witness = (qv, ratio);
        }
        points.push((lx, ly));
    }

    let eta_hat = match points.len() {
        0 => {
            return Err(Error::Domain(format!(
                "no convergent denominators in [2, {q_max}]"
            )))
        }
        1 => witness.1,
        _ => least_squares_slope(&points),
    };
    Ok(TypeEstimate {
        eta_hat: eta_hat.max(1.0),
        witness_q: witness.0,
        max_ratio: witness.1,
        q_max,
        convergents_used: points.len(),
    })
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::rational::constants;

    /// Brute-force `<q x>` over every q in range, in exact arithmetic, and
    /// the best ratio reached at the tail of the range.
    fn brute_force_tail_ratio(x: &RationalApprox, lo: u64, hi: u64) -> f64 {
        (lo..=hi)
            .map(|q| {
                let d = rational_nearest_distance(&(x.as_rational() * BigRational::from_integer(q.into())));
                -ln_rational(&d) / (q as f64).ln()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn golden_ratio_is_type_one() {
        let phi = constants::golden_ratio(200);
        let est = irrational_type_estimate(&phi, 10_000).unwrap();
        assert!((1.0..=1.05).contains(&est.eta_hat), "{est:?}");
        // The witness is a Fibonacci number and the brute-force tail agrees
        // with the single-point maximum over large q: log(1/<q phi>) tracks
        // log q + log sqrt 5.
        let tail = brute_force_tail_ratio(&phi, 5000, 10_000);
        assert!((tail - (1.0 + 5f64.sqrt().ln() / 6765f64.ln())).abs() < 1e-6);
    }

    #[test]
    fn sqrt2_is_type_one() {
        let est = irrational_type_estimate(&constants::sqrt2(200), 10_000).unwrap();
        assert!((1.0..=1.05).contains(&est.eta_hat), "{est:?}");
    }

    #[test]
    fn liouville_number_has_large_type() {
        let x = constants::liouville(5);
        let est = irrational_type_estimate(&x, 1_000_000).unwrap();
        assert!(est.eta_hat > 2.0, "{est:?}");
        // With only q = 9 and q = 100 below 10^3 the estimate is already far
        // from bounded type, and the single-point witness sits above 2.
        let est = irrational_type_estimate(&x, 1000).unwrap();
        assert!(est.eta_hat > 1.5, "{est:?}");
        assert!(est.max_ratio > 2.0);
        assert_eq!(est.witness_q, 9);
    }

    #[test]
    fn precision_is_checked() {
        let coarse = RationalApprox::from_ratio(13, 21).unwrap();
        assert!(matches!(
            irrational_type_estimate(&coarse, 100),
            Err(Error::Precision(_))
        ));
        assert!(irrational_type_estimate(&coarse, 1).is_err());
    }
}
