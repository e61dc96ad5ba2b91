//! Exact rational arithmetic helpers.
//!
//! Every length, cost and deviation in the crate is a [`Rational`]. Hot
//! kernels (shortest paths, the placement search) rescale their inputs to a
//! common denominator and run on machine integers when the scaled values fit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Largest decimal exponent accepted by [`parse_rational`].
const MAX_EXPONENT: i64 = 64;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses an integer, a decimal (`1.275`, `-0.5`, `2e3`) or a fraction
/// (`17/8`). Returns `None` on anything else.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_plain_int(num)?;
        let den = parse_plain_int(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    parse_decimal(text)
}

fn parse_plain_int(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix('-').unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp_text = &body[pos + 1..];
            let exp_digits = exp_text.strip_prefix(['+', '-']).unwrap_or(exp_text);
            if exp_digits.is_empty()
                || exp_digits.len() > 4
                || !exp_digits.bytes().all(|b| b.is_ascii_digit())
            {
                return None;
            }
            let exp: i64 = exp_text.parse().ok()?;
            if exp.abs() > MAX_EXPONENT {
                return None;
            }
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (whole, frac) = match mantissa.split_once('.') {
        Some((w, f)) => (w, f),
        None => (mantissa, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let shift = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let value = if shift >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, shift as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-shift) as usize))
    };
    Some(value)
}

/// Exact decimal rendering when the denominator has only factors 2 and 5,
/// `p/q` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    match decimal_places(value.denom()) {
        Some(places) => {
            let scale = num_traits::pow(BigInt::from(10), places);
            let scaled = value.numer() * (&scale / value.denom());
            let sign = if scaled.is_negative() { "-" } else { "" };
            let digits = scaled.abs().to_string();
            let digits = format!("{:0>width$}", digits, width = places + 1);
            let (whole, frac) = digits.split_at(digits.len() - places);
            format!("{sign}{whole}.{frac}")
        }
        None => format!("{}/{}", value.numer(), value.denom()),
    }
}

/// Number of decimal places needed to write `1/denom` exactly, if finite.
fn decimal_places(denom: &BigInt) -> Option<usize> {
    let mut d = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    d.is_one().then_some(twos.max(fives))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators of `values` (1 for none).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `value * denom` as an `i128`, if it is an integer that fits.
pub fn scale_to_i128(value: &Rational, denom: &BigInt) -> Option<i128> {
    let scaled = value * Rational::from_integer(denom.clone());
    if !scaled.is_integer() {
        return None;
    }
    scaled.numer().to_i128()
}

pub fn unscale(value: i128, denom: &BigInt) -> Rational {
    Rational::new(BigInt::from(value), denom.clone())
}

pub fn min_of<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if b < a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("12"), Some(int(12)));
        assert_eq!(parse_rational("-3"), Some(int(-3)));
        assert_eq!(parse_rational("1.275"), Some(ratio(1275, 1000)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("17/8"), Some(ratio(17, 8)));
        assert_eq!(parse_rational("2e3"), Some(int(2000)));
        assert_eq!(parse_rational("25E-2"), Some(ratio(1, 4)));
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "", "-", ".", "1/0", "1.2.3", "abc", "1e", "1e99999", "+-1", "1/ 2x",
        ] {
            assert_eq!(parse_rational(bad), None, "{bad:?}");
        }
    }

    #[test]
    fn formats_exactly() {
        assert_eq!(format_rational(&ratio(1275, 1000)), "1.275");
        assert_eq!(format_rational(&ratio(-1, 8)), "-0.125");
        assert_eq!(format_rational(&int(859)), "859");
        assert_eq!(format_rational(&ratio(1, 3)), "1/3");
    }

    #[test]
    fn scaling_round_trip() {
        let values = [ratio(1, 2), ratio(3, 4), int(5)];
        let denom = common_denominator(values.iter());
        assert_eq!(denom, BigInt::from(4));
        for v in &values {
            let s = scale_to_i128(v, &denom).unwrap();
            assert_eq!(&unscale(s, &denom), v);
        }
    }

    proptest::proptest! {
        #[test]
        fn format_then_parse_is_identity(n in -10_000i64..10_000, d in 1i64..2_000) {
            let v = ratio(n, d);
            proptest::prop_assert_eq!(parse_rational(&format_rational(&v)), Some(v));
        }
    }
}
