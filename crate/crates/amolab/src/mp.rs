//! Extended-precision plumbing on top of MPFR floats.
//!
//! Every quantity that leaves the exact big-integer world is rounded once
//! into a [`Float`] of the caller's precision. The default of 128 bits gives
//! about 38 significant decimal digits, enough headroom for the 1e-20-level
//! residual checks used throughout.

use rug::float::Constant;
use rug::{Float, Integer, Rational};

/// Default mantissa size in bits.
pub const DEFAULT_PREC: u32 = 128;

/// Smallest accepted mantissa size.
pub const MIN_PREC: u32 = 64;

/// Reads `AMOLAB_PRECISION_BITS` if set, otherwise returns the default.
pub fn env_precision() -> u32 {
    std::env::var("AMOLAB_PRECISION_BITS")
        .ok()
        .and_then(|s| s.parse::<u32>().ok())
        .map(|p| p.max(MIN_PREC))
        .unwrap_or(DEFAULT_PREC)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn ln2(prec: u32) -> Float {
    Float::with_val(prec, Constant::Log2)
}

pub fn mpf(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn from_integer(prec: u32, n: &Integer) -> Float {
    Float::with_val(prec, n)
}

pub fn from_rational(prec: u32, r: &Rational) -> Float {
    Float::with_val(prec, r)
}

/// ln of a positive big integer, exact input, one rounding.
pub fn ln_integer(prec: u32, n: &Integer) -> Float {
    Float::with_val(prec, n).ln()
}

/// cos(2*pi*r) for an exact rational phase r (reduced mod 1 by the caller).
pub fn cos_2pi(prec: u32, r: &Rational) -> Float {
    let angle = Float::with_val(prec, r) * pi(prec) * 2u32;
    angle.cos()
}

/// (cos, sin) of 2*pi*r.
pub fn cos_sin_2pi(prec: u32, r: &Rational) -> (Float, Float) {
    let angle = Float::with_val(prec, r) * pi(prec) * 2u32;
    let (s, c) = angle.sin_cos(Float::new(prec));
    (c, s)
}

/// |sin(pi*r)| for an exact rational r.
pub fn abs_sin_pi(prec: u32, r: &Rational) -> Float {
    let angle = Float::with_val(prec, r) * pi(prec);
    angle.sin().abs()
}

/// Number of decimal digits that guarantee exact round-trip at `prec` bits.
pub fn roundtrip_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

/// Full-precision decimal serialization, round-trip exact at the stated precision.
pub fn to_decimal(x: &Float) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    x.to_string_radix(10, Some(roundtrip_digits(x.prec())))
}

/// Parses a decimal string produced by [`to_decimal`].
pub fn from_decimal(prec: u32, s: &str) -> Option<Float> {
    match s {
        "nan" => Some(Float::with_val(prec, f64::NAN)),
        "inf" => Some(Float::with_val(prec, f64::INFINITY)),
        "-inf" => Some(Float::with_val(prec, f64::NEG_INFINITY)),
        _ => Float::parse(s).ok().map(|v| Float::with_val(prec, v)),
    }
}

/// Reduces a rational to its fractional part in [0, 1).
pub fn frac_mod_one(r: &Rational) -> Rational {
    let (num, den) = (r.numer().clone(), r.denom().clone());
    let (_, rem) = num.div_rem_euc(den.clone());
    Rational::from((rem, den))
}
