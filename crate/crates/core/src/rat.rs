//! Exact rational scalars.
//!
//! Program literals are decimal strings; they are kept as exact rationals in
//! the AST and only lowered to `f64` at evaluation or measure time.

use alloc::string::String;
use alloc::string::ToString;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rat = num_rational::BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parse a decimal literal (`"12"`, `"0.51"`, optionally signed) into an
/// exact rational. Returns `None` for anything else, including empty
/// fraction parts such as `"5."`.
pub fn parse_decimal(s: &str) -> Option<Rat> {
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if rest.contains('.') && (frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()))
    {
        return None;
    }
    let mut numer: BigInt = int_part.parse().ok()?;
    let mut denom = BigInt::one();
    for d in frac_part.bytes() {
        numer = numer * 10 + (d - b'0');
        denom *= 10;
    }
    if neg {
        numer = -numer;
    }
    Some(Rat::new(numer, denom))
}

/// Render a rational whose reduced denominator is of the form `2^a * 5^b`
/// as an exact decimal string; other denominators return `None`.
pub fn to_decimal_string(r: &Rat) -> Option<String> {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let digits = twos.max(fives);
    // Scale so the denominator becomes exactly 10^digits.
    let mut scaled = r.numer().clone();
    for _ in 0..digits.saturating_sub(twos) {
        scaled *= &two;
    }
    for _ in 0..digits.saturating_sub(fives) {
        scaled *= &five;
    }
    let neg = scaled.is_negative();
    let mut body = scaled.abs().to_string();
    let out = if digits == 0 {
        body
    } else {
        while body.len() <= digits as usize {
            body.insert(0, '0');
        }
        body.insert(body.len() - digits as usize, '.');
        body
    };
    Some(if neg {
        let mut s = String::from("-");
        s.push_str(&out);
        s
    } else {
        out
    })
}

/// Human-readable form: exact decimal when one exists, `num/den` otherwise.
pub fn display(r: &Rat) -> String {
    match to_decimal_string(r) {
        Some(s) => s,
        None => {
            let mut s = r.numer().to_string();
            s.push('/');
            s.push_str(&r.denom().to_string());
            s
        }
    }
}

/// Nearest double. Conversion happens only at evaluation or measure time.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The exact rational value of a double (every finite double is one);
/// `None` for infinities and NaN.
pub fn from_f64_exact(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_integers() {
        assert_eq!(parse_decimal("12"), Some(rat_int(12)));
        assert_eq!(parse_decimal("0"), Some(rat_int(0)));
        assert_eq!(parse_decimal("-3"), Some(rat_int(-3)));
    }

    #[test]
    fn parses_fractions_exactly() {
        assert_eq!(parse_decimal("0.51"), Some(rat(51, 100)));
        assert_eq!(parse_decimal("1.25"), Some(rat(5, 4)));
        assert_eq!(parse_decimal("-0.5"), Some(rat(-1, 2)));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", ".", "5.", ".5", "1.2.3", "1e3", "a", "--1"] {
            assert_eq!(parse_decimal(bad), None, "accepted {bad:?}");
        }
    }

    #[test]
    fn decimal_rendering_round_trips() {
        for s in ["0", "12", "0.51", "1.25", "-0.5", "200", "0.001"] {
            let r = parse_decimal(s).unwrap();
            let printed = to_decimal_string(&r).unwrap();
            assert_eq!(parse_decimal(&printed), Some(r));
        }
    }

    #[test]
    fn non_decimal_denominators_have_no_decimal_form() {
        assert_eq!(to_decimal_string(&rat(1, 3)), None);
        assert_eq!(display(&rat(1, 3)), "1/3");
        assert_eq!(display(&rat(-7, 20)), "-0.35");
    }

    #[test]
    fn f64_conversion_is_exactly_the_nearest_double() {
        assert_eq!(to_f64(&rat(1, 2)), 0.5);
        assert_eq!(to_f64(&rat(51, 100)), 0.51);
        assert_eq!(to_f64(&rat_int(1)), 1.0);
    }
}
