use std::f64::consts::{PI, TAU};

use crate::experiments::default_x_grid;
use crate::number_theory::{constants, RationalApprox};

/// Continued-fraction depth of the named constants.
pub const CONSTANT_TERMS: usize = 200;

/// A rational `p/q`, a decimal, or one of `golden`, `sqrt2`, `liouville`.
pub fn parse_beta(s: &str) -> Result<RationalApprox, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "golden" => Ok(constants::golden_ratio(CONSTANT_TERMS)),
        "sqrt2" => Ok(constants::sqrt2(CONSTANT_TERMS)),
        "liouville" => Ok(constants::liouville(6)),
        "" => Err("empty beta".into()),
        t => t.parse().map_err(|e: crate::Error| e.to_string()),
    }
}

/// A real number, also accepting `pi`, `a*pi`, `pi/b` and `a*pi/b`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let bad = || format!("cannot parse '{s}' as a number");
    let v = match t.find("pi") {
        None => t.parse::<f64>().map_err(|_| bad())?,
        Some(i) => {
            let coef = match t[..i].trim_end_matches('*') {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            let den = match &t[i + 2..] {
                "" => 1.0,
                d => d
                    .strip_prefix('/')
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(bad)?,
            };
            coef * PI / den
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

/// `a:b:k` for `k` log-spaced sizes from `a` to `b`, or a comma list.
/// Entries may use exponent notation, e.g. `1e3:1e6:4`.
pub fn parse_n_grid(s: &str) -> Result<Vec<u64>, String> {
    let int = |t: &str| -> Result<u64, String> {
        let v: f64 = t.trim().parse().map_err(|_| format!("bad size '{t}'"))?;
        if v >= 1.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
            Ok(v as u64)
        } else {
            Err(format!("size '{t}' is not a positive integer"))
        }
    };
    let grid: Vec<u64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, k] = parts[..] else {
            return Err(format!("range '{s}' must look like a:b:k"));
        };
        let (a, b) = (int(a)?, int(b)?);
        let k: usize = k.trim().parse().map_err(|_| format!("bad count in '{s}'"))?;
        if k < 2 || a >= b {
            return Err(format!("range '{s}' needs a < b and k >= 2"));
        }
        let (la, lb) = ((a as f64).log10(), (b as f64).log10());
        (0..k)
            .map(|i| match i {
                0 => a,
                i if i == k - 1 => b,
                i => 10f64.powf(la + (lb - la) * i as f64 / (k - 1) as f64).round() as u64,
            })
            .collect()
    } else {
        s.split(',').map(int).collect::<Result<_, _>>()?
    };
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("sizes in '{s}' must be strictly increasing"));
    }
    Ok(grid)
}

/// `default` or `default:K` for the golden grid, else a comma list in `(0, 2 pi)`.
pub fn parse_x_grid(s: &str) -> Result<Vec<f64>, String> {
    let t = s.trim();
    let grid = if t == "default" {
        default_x_grid(5)
    } else if let Some(k) = t.strip_prefix("default:") {
        let k: usize = k.parse().map_err(|_| format!("bad count in '{s}'"))?;
        if k == 0 {
            return Err("empty x grid".into());
        }
        default_x_grid(k)
    } else {
        parse_real_list(t)?
    };
    if let Some(x) = grid.iter().find(|&&x| !(x > 0.0 && x < TAU)) {
        return Err(format!("x = {x} outside (0, 2 pi)"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_n_grid("1e3:1e6:4").unwrap(), vec![1000, 10_000, 100_000, 1_000_000]);
        assert_eq!(parse_n_grid("1e3:1e5:4").unwrap(), vec![1000, 4642, 21544, 100_000]);
        assert_eq!(parse_n_grid("100:1000:2").unwrap(), vec![100, 1000]);
        assert_eq!(parse_n_grid("16, 32,64").unwrap(), vec![16, 32, 64]);
        for bad in ["", "10:5:3", "1:10", "1.5", "0,4", "8,4", "a:b:c", "1:2:1"] {
            assert!(parse_n_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn reals_and_betas() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_real("-pi").unwrap(), -PI);
        assert_eq!(parse_real("1.25").unwrap(), 1.25);
        assert!(parse_real("pi/").is_err());
        assert!(parse_real("x").is_err());
        assert_eq!(parse_beta("1/3").unwrap(), "1/3".parse().unwrap());
        assert_eq!(parse_beta("Golden").unwrap().source_depth(), CONSTANT_TERMS);
        assert!(parse_beta("tau").is_err());
    }

    #[test]
    fn x_grids() {
        assert_eq!(parse_x_grid("default").unwrap().len(), 5);
        assert_eq!(parse_x_grid("default:3").unwrap().len(), 3);
        assert_eq!(parse_x_grid("1,pi").unwrap(), vec![1.0, PI]);
        assert!(parse_x_grid("1,,2").is_err());
        assert!(parse_x_grid("7").is_err());
        assert!(parse_x_grid("default:0").is_err());
    }
}
