//! Exact rational helpers shared by the model, group and classifier code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"` with optional sign. Decimal points are rejected.
pub fn parse_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    let bad = || Error::Malformed(format!("not a rational: {text:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Parses rationals and terminating decimals such as `3.5` or `1e-4`.
pub fn parse_decimal_or_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    if s.contains('/') || !(s.contains('.') || s.contains('e') || s.contains('E')) {
        return parse_rational(s);
    }
    let bad = || Error::Malformed(format!("not a number: {text:?}"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// `p/q` when the denominator is not 1, `p` otherwise.
pub fn format_rational(r: &Q) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest double, robust for numerators and denominators beyond the f64 range.
pub fn to_f64(r: &Q) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = 60 - (nb - db);
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(-shift as i32)
}

pub fn from_f64(x: f64) -> Option<Q> {
    BigRational::from_float(x)
}

/// Rounds to a dyadic rational with `bits` significant bits.
pub fn round_to_bits(r: &Q, bits: u64) -> Q {
    if r.is_zero() {
        return r.clone();
    }
    let nb = r.numer().abs().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = bits as i64 - (nb - db);
    let one = BigInt::one();
    if shift >= 0 {
        let scaled = r.numer() << shift as usize;
        let (quo, _) = scaled.div_rem(r.denom());
        BigRational::new(quo, one << shift as usize)
    } else {
        let den = r.denom() << (-shift) as usize;
        let (quo, _) = r.numer().div_rem(&den);
        BigRational::from_integer(quo << (-shift) as usize)
    }
}

/// Basis of the rational nullspace of `rows` (each row a vector of length `n`).
pub fn nullspace(rows: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..n {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn rank(rows: &[Vec<Q>], n: usize) -> usize {
    n - nullspace(rows, n).len()
}

/// Scales a rational vector to a primitive integer vector with the same direction.
pub fn primitive_integer(v: &[Q]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), qi(-4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert_eq!(parse_decimal_or_rational("3.5").unwrap(), q(7, 2));
        assert_eq!(parse_decimal_or_rational("1e-4").unwrap(), q(1, 10000));
        assert_eq!(parse_decimal_or_rational("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_decimal_or_rational("2/3").unwrap(), q(2, 3));
    }

    #[test]
    fn formats_integers_without_denominator() {
        assert_eq!(format_rational(&q(6, 3)), "2");
        assert_eq!(format_rational(&q(1, 53)), "1/53");
    }

    #[test]
    fn nullspace_of_single_row() {
        let rows = vec![vec![qi(1), qi(1), qi(1)]];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let dot: Q = v.iter().fold(Q::zero(), |a, x| a + x);
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn huge_rationals_convert_to_f64() {
        let big = BigRational::new(BigInt::from(3) << 2000usize, BigInt::from(1) << 2001usize);
        assert!((to_f64(&big) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rounding_keeps_requested_bits() {
        let third = q(1, 3);
        let r = round_to_bits(&third, 200);
        assert!(to_f64(&(&r - &third).abs()) < 1e-59);
    }
}
