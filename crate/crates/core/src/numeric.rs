//! Exact integers and rationals (GMP) and fixed-precision reals (MPFR).
//!
//! Every `Real` produced by this crate carries the binary precision derived
//! from a [`PrecisionConfig`]. MPFR rounds each operation to nearest, so a
//! computation repeated at the same precision is bit-identical.

use rug::float::Round;
use rug::{Assign, Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-negative arbitrary-precision integer.
pub type Natural = Integer;
/// Exact rational, always kept in lowest terms with a positive denominator.
pub type Rational = rug::Rational;
/// Binary floating-point number at a caller-chosen precision.
pub type Real = Float;

/// Euler-Mascheroni constant to 50 decimal places.
pub const EULER_GAMMA: &str = "0.57721566490153286060651209008240243104215933593992";
pub const EULER_GAMMA_DIGITS: u32 = 50;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrecisionConfig {
    digits: u32,
}

impl PrecisionConfig {
    pub const DEFAULT_DIGITS: u32 = 30;
    pub const MIN_DIGITS: u32 = 10;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::out_of_range(
                "precision",
                digits,
                format!(">= {}", Self::MIN_DIGITS),
            ));
        }
        Ok(PrecisionConfig { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision: enough bits that one rounding costs at most
    /// 10^-digits relative, plus a few guard bits.
    pub fn bits(&self) -> u32 {
        bits_for_digits(self.digits)
    }

    pub fn real<T>(&self, value: T) -> Real
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn zero(&self) -> Real {
        Float::new(self.bits())
    }

    /// Parses a decimal literal such as `"0.5"` or `"8192"` at this precision.
    pub fn parse(&self, text: &str) -> Result<Real> {
        let parsed = Float::parse(text.trim())
            .map_err(|e| Error::InvalidArgument(format!("cannot parse {text:?} as a real: {e}")))?;
        let value = Float::with_val(self.bits(), parsed);
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("{text:?} is not finite")));
        }
        Ok(value)
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            digits: Self::DEFAULT_DIGITS,
        }
    }
}

fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * LOG2_10).ceil() as u32 + 4
}

pub fn factorial(n: u32) -> Natural {
    Integer::from(Integer::factorial(n))
}

pub fn ln_real(x: &Real, prec: PrecisionConfig) -> Result<Real> {
    if x.is_nan() || *x <= 0 {
        return Err(Error::Domain(format!("ln of non-positive value {x}")));
    }
    Ok(Float::with_val(prec.bits(), x.ln_ref()))
}

/// e^(-γ) from the stored 50-digit literal of γ, at `digits` decimal digits.
pub fn exp_neg_gamma(digits: u32) -> Result<Real> {
    if digits > EULER_GAMMA_DIGITS {
        return Err(Error::PrecisionExceedsLiteral {
            requested: digits,
            available: EULER_GAMMA_DIGITS,
        });
    }
    if digits == 0 {
        return Err(Error::out_of_range("precision", 0, "1..=50"));
    }
    // Evaluate with headroom, then round once to the requested precision.
    let wide = bits_for_digits(EULER_GAMMA_DIGITS + 10);
    let gamma = Float::with_val(wide, Float::parse(EULER_GAMMA).expect("valid literal"));
    let value = (-gamma).exp();
    Ok(Float::with_val(bits_for_digits(digits), &value))
}

/// Correctly rounded conversion.
pub fn rational_to_real(q: &Rational, prec: PrecisionConfig) -> Real {
    Float::with_val(prec.bits(), q)
}

/// Positional decimal rendering with exactly `digits` significant digits,
/// rounded to nearest: `2/3` at 6 digits is `0.666667`, `4599.476` is `4599.48`.
pub fn format_significant(x: &Real, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_zero() {
        return if digits > 1 {
            format!("0.{}", "0".repeat(digits - 1))
        } else {
            "0".to_string()
        };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (negative, mantissa, exp) = x.to_sign_string_exp_round(10, Some(digits), Round::Nearest);
    let exp = exp.expect("finite non-zero value has an exponent");
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    // value = 0.<mantissa> × 10^exp
    if exp <= 0 {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp) as usize));
        out.push_str(&mantissa);
    } else {
        let exp = exp as usize;
        if exp >= mantissa.len() {
            out.push_str(&mantissa);
            out.push_str(&"0".repeat(exp - mantissa.len()));
        } else {
            out.push_str(&mantissa[..exp]);
            out.push('.');
            out.push_str(&mantissa[exp..]);
        }
    }
    out
}

/// Decimal text that reads back to the identical binary value at `bits`.
pub fn real_to_exact_string(x: &Real) -> String {
    x.to_string_radix(10, None)
}

pub fn real_from_exact_string(text: &str, bits: u32) -> Result<Real> {
    let parsed =
        Float::parse(text).map_err(|e| Error::CorruptPayload(format!("bad real {text:?}: {e}")))?;
    Ok(Float::with_val(bits, parsed))
}

pub fn natural_from_str(text: &str) -> Result<Natural> {
    let parsed = Integer::parse(text)
        .map_err(|e| Error::CorruptPayload(format!("bad integer {text:?}: {e}")))?;
    let value = Integer::from(parsed);
    if value < 0 {
        return Err(Error::CorruptPayload(format!("negative count {text:?}")));
    }
    Ok(value)
}
