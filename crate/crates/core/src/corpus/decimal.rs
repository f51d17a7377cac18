//! Exact non-negative decimal numbers for impact factors.
//!
//! Impact factors are kept as `mantissa / 10^scale` so that ratios between
//! them can be reduced to lowest terms before conversion to `f64`. Two inputs
//! that differ only by a common power-of-ten factor therefore produce
//! bit-identical ratios.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: u128,
    scale: u32,
}

const MAX_SCALE: u32 = 30;

impl Decimal {
    pub const ZERO: Decimal = Decimal {
        mantissa: 0,
        scale: 0,
    };

    pub fn new(mantissa: u128, scale: u32) -> Self {
        let mut d = Decimal { mantissa, scale };
        d.normalize();
        d
    }

    pub fn from_u64(value: u64) -> Self {
        Decimal::new(value as u128, 0)
    }

    fn normalize(&mut self) {
        if self.mantissa == 0 {
            self.scale = 0;
            return;
        }
        while self.scale > 0 && self.mantissa.is_multiple_of(10) {
            self.mantissa /= 10;
            self.scale -= 1;
        }
    }

    pub fn mantissa(&self) -> u128 {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.mantissa as f64 / 10f64.powi(self.scale as i32)
    }

    /// Multiplies by `10^exp`. Returns `None` on overflow.
    pub fn mul_pow10(&self, exp: i32) -> Option<Decimal> {
        if self.is_zero() {
            return Some(Decimal::ZERO);
        }
        if exp >= 0 {
            let factor = 10u128.checked_pow(exp as u32)?;
            Some(Decimal::new(self.mantissa.checked_mul(factor)?, self.scale))
        } else {
            let scale = self.scale.checked_add(exp.unsigned_abs())?;
            if scale > MAX_SCALE {
                return None;
            }
            Some(Decimal::new(self.mantissa, scale))
        }
    }

    /// Mantissa rescaled to `scale` (which must be >= self.scale).
    fn mantissa_at(&self, scale: u32) -> Option<u128> {
        let diff = scale.checked_sub(self.scale)?;
        self.mantissa.checked_mul(10u128.checked_pow(diff)?)
    }

    pub fn checked_add(&self, other: &Decimal) -> Option<Decimal> {
        let scale = self.scale.max(other.scale);
        let a = self.mantissa_at(scale)?;
        let b = other.mantissa_at(scale)?;
        Some(Decimal::new(a.checked_add(b)?, scale))
    }

    /// Sum of a sequence; `None` on overflow.
    pub fn checked_sum<'a>(values: impl IntoIterator<Item = &'a Decimal>) -> Option<Decimal> {
        values
            .into_iter()
            .try_fold(Decimal::ZERO, |acc, v| acc.checked_add(v))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Computes `multiplier * numerator / denominator` as an `f64`.
///
/// The exact rational is reduced to lowest terms first, so the result depends
/// only on the rational value, never on how it was written. Falls back to
/// plain floating-point arithmetic if the exact form overflows `u128`.
pub fn exact_ratio(numerator: &Decimal, multiplier: u64, denominator: &Decimal) -> f64 {
    debug_assert!(!denominator.is_zero());
    let exact = || -> Option<f64> {
        let scale = numerator.scale.max(denominator.scale);
        let p = numerator
            .mantissa_at(scale)?
            .checked_mul(multiplier as u128)?;
        let q = denominator.mantissa_at(scale)?;
        if p == 0 {
            return Some(0.0);
        }
        let g = gcd(p, q);
        Some((p / g) as f64 / (q / g) as f64)
    };
    exact().unwrap_or_else(|| multiplier as f64 * numerator.to_f64() / denominator.to_f64())
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        match (self.mantissa_at(scale), other.mantissa_at(scale)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let digits = self.mantissa.to_string();
        let scale = self.scale as usize;
        if digits.len() > scale {
            let (int, frac) = digits.split_at(digits.len() - scale);
            write!(f, "{int}.{frac}")
        } else {
            write!(f, "0.{}{}", "0".repeat(scale - digits.len()), digits)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid non-negative decimal {0:?}")]
pub struct ParseDecimalError(pub String);

impl FromStr for Decimal {
    type Err = ParseDecimalError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let err = || ParseDecimalError(raw.to_string());
        let s = raw.trim();
        let s = s.strip_prefix('+').unwrap_or(s);
        let (body, exp) = match s.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = s[pos + 1..].parse().map_err(|_| err())?;
                (&s[..pos], exp)
            }
            None => (s, 0),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let mut mantissa: u128 = 0;
        for b in int.bytes().chain(frac.bytes()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((b - b'0') as u128))
                .ok_or_else(err)?;
        }
        let scale = u32::try_from(frac.len()).map_err(|_| err())?;
        if scale > MAX_SCALE {
            return Err(err());
        }
        Decimal::new(mantissa, scale).mul_pow10(exp).ok_or_else(err)
    }
}
