//! Exact parsing of numeric literals.

use rug::{Integer, Rational};

/// Parses an integer, a fraction `p/q`, or a decimal (`-1.25`, `3e-4`) exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = num.trim().parse().ok()?;
        let den: Integer = den.trim().parse().ok()?;
        if den.cmp0().is_eq() {
            return None;
        }
        return Some(Rational::from((num, den)));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(digits.parse::<Integer>().ok()?);
    let shift = exp - frac_part.len() as i32;
    let pow = Integer::from(Integer::u_pow_u(10, shift.unsigned_abs()));
    if shift >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    if neg {
        value = -value;
    }
    Some(value)
}
