//! The sparse digit-insertion construction: insertion positions
//! `n_k = ⌊exp(k^γ)⌋`, the conditions that fix the starting index `N₀`,
//! synthesis of words in the level set, the ratio `R_n` with its finite-depth
//! sandwich, and the deletion / insertion maps between constructed words and
//! bounded-digit words.

mod conditions;
mod holder;
mod ratio;
mod sparse;
mod synth;

pub use conditions::{find_n0, ConditionRecord, ConditionReport, EdgeNote};
pub use holder::{holder_witness_bounds, DigitGrowthCheck, HolderWitnessReport, ProductCheck};
pub use ratio::{attach_envelopes, ratio_envelope, ratio_series, Envelope, RatioSample};
pub use sparse::{
    lambda, sequence_diagnostics, sparse_index, DiagnosticMode, DiagnosticRow, SparseSpec,
    LOG_DOMAIN_EXPONENT,
};
pub use synth::{
    check_monotonicity, insert_apply, inserted_digit, insertion_positions, seed_delete, synthesize,
    BasePolicy, ConstructionParams, Insertion, MonotonicityEntry, MonotonicityReport, Synthesis,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serializer;

use crate::error::{Result, ThetaError};

/// Parses `"3/4"`, `"0.75"`, `"-2"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || ThetaError::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(ThetaError::DivisionByZero);
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    crate::interval::ratio_to_f64(r.numer(), r.denom())
}

pub(crate) fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn ser_rational<S: Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&render_rational(r))
}

pub(crate) fn positive(r: &BigRational) -> bool {
    r.is_positive()
}

pub(crate) fn to_u64(x: &BigInt, what: &str) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| ThetaError::Overflow(format!("{what} = {x} does not fit in 64 bits")))
}
