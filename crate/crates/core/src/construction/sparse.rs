use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use super::{rational_to_f64, ser_rational};
use crate::error::{Result, ThetaError};
use crate::interval::{log_loglog, ratio_to_f64, Interval};

/// Exponents `k^γ` at or above this switch diagnostics to the log domain.
pub const LOG_DOMAIN_EXPONENT: f64 = 512.0;

const START_PREC: u32 = 64;
const MAX_PREC: u32 = 1024;

/// The insertion sequence `n_k = ⌊exp(k^γ)⌋`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SparseSpec {
    #[serde(serialize_with = "ser_rational")]
    gamma: BigRational,
    k_min: u64,
}

impl SparseSpec {
    pub fn new(gamma: BigRational) -> Result<Self> {
        if !gamma.is_positive() || gamma >= BigRational::one() {
            return Err(ThetaError::InvalidParameter(format!(
                "gamma must lie in (0, 1), got {gamma}"
            )));
        }
        let three = BigInt::from(3);
        let mut k = 1;
        while floor_exp_power(k, &gamma)? < three {
            k += 1;
        }
        Ok(SparseSpec { gamma, k_min: k })
    }

    pub fn gamma(&self) -> &BigRational {
        &self.gamma
    }

    pub fn gamma_f64(&self) -> f64 {
        rational_to_f64(&self.gamma)
    }

    /// First index with `n_k ≥ 3`, so that `log log n_k > 0`.
    pub fn k_min(&self) -> u64 {
        self.k_min
    }

    /// `k^γ`, the logarithm of the unfloored `exp(k^γ)`.
    pub fn exponent(&self, k: u64) -> f64 {
        (k as f64).powf(self.gamma_f64())
    }

    pub fn index(&self, k: u64) -> Result<BigInt> {
        floor_exp_power(k, &self.gamma)
    }
}

impl Default for SparseSpec {
    fn default() -> Self {
        SparseSpec::new(BigRational::new(3.into(), 4.into())).expect("3/4 is valid")
    }
}

pub fn sparse_index(k: u64, spec: &SparseSpec) -> Result<BigInt> {
    spec.index(k)
}

fn floor_exp_power(k: u64, gamma: &BigRational) -> Result<BigInt> {
    if k == 0 {
        return Err(ThetaError::InvalidParameter(
            "sparse index k must be >= 1".into(),
        ));
    }
    let t = (k as f64).powf(rational_to_f64(gamma));
    let result_bits = (t * std::f64::consts::LOG2_E).ceil() as u32 + 2;
    let mut p = START_PREC;
    loop {
        let prec = p + result_bits + 8;
        let ln_k = Interval::from_int(&BigInt::from(k), prec).ln()?;
        let n = ln_k.mul(&Interval::from_rational(gamma, prec)).exp().exp();
        if let Some(f) = n.floor() {
            return Ok(f);
        }
        if p >= MAX_PREC {
            return Err(ThetaError::FloorAmbiguity(format!(
                "exp(k^γ) for k = {k}, γ = {gamma} is within 2^-{p} of an integer"
            )));
        }
        p *= 2;
    }
}

/// `log n · log log n` enclosed at `prec` bits.
pub fn lambda(n: u64, prec: u32) -> Result<Interval> {
    log_loglog(&BigInt::from(n), prec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticMode {
    Exact,
    LogDomain,
}

/// One row of the sparse-sequence diagnostics, comparing `n_k` and `n_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub k: u64,
    pub mode: DiagnosticMode,
    /// `n_k` in decimal; absent in log-domain mode.
    pub n_k: Option<String>,
    /// `k^γ`.
    pub exponent: f64,
    /// `n_{k+1} − n_k`; absent in log-domain mode.
    pub gap: Option<f64>,
    /// `(n_{k+1} − n_k)/n_k`.
    pub relative_gap: f64,
    /// `log n_{k+1} − log n_k`.
    pub log_increment: f64,
    /// `log n_{k+1} log log n_{k+1} − log n_k log log n_k`.
    pub loglog_increment: f64,
    /// log10 of the relative error from dropping the floor (log-domain only).
    pub floor_error_log10: Option<f64>,
}

/// Increments of the unfloored sequence `ñ_k = exp(k^γ)`:
/// relative gap, log increment and `log·loglog` increment.
pub fn log_domain_increments<F: Float>(k: F, gamma: F) -> (F, F, F) {
    let t0 = k.powf(gamma);
    let delta = t0 * (gamma * (F::one() / k).ln_1p()).exp_m1();
    let t1 = t0 + delta;
    let rel = delta.exp_m1();
    let loglog = delta * t1.ln() + t0 * (delta / t0).ln_1p();
    (rel, delta, loglog)
}

fn diagnostic_row(k: u64, spec: &SparseSpec) -> Result<DiagnosticRow> {
    if k < spec.k_min() {
        return Err(ThetaError::Domain(format!(
            "log log n_k is undefined for k = {k} < kMin = {}",
            spec.k_min()
        )));
    }
    let exponent = spec.exponent(k);
    if spec.exponent(k + 1) >= LOG_DOMAIN_EXPONENT {
        let (rel, inc, loglog) = log_domain_increments(k as f64, spec.gamma_f64());
        return Ok(DiagnosticRow {
            k,
            mode: DiagnosticMode::LogDomain,
            n_k: None,
            exponent,
            gap: None,
            relative_gap: rel,
            log_increment: inc,
            loglog_increment: loglog,
            floor_error_log10: Some(2f64.log10() - exponent / std::f64::consts::LN_10),
        });
    }
    let a = spec.index(k)?;
    let b = spec.index(k + 1)?;
    let gap = &b - &a;
    let rel = ratio_to_f64(&gap, &a);
    let la = log_loglog(&a, 128)?;
    let lb = log_loglog(&b, 128)?;
    Ok(DiagnosticRow {
        k,
        mode: DiagnosticMode::Exact,
        n_k: Some(a.to_string()),
        exponent,
        gap: Some(ratio_to_f64(&gap, &BigInt::one())),
        relative_gap: rel,
        log_increment: rel.ln_1p(),
        loglog_increment: lb.sub(&la).mid_f64(),
        floor_error_log10: None,
    })
}

/// Growth diagnostics of the sparse sequence at each requested `k`, evaluated in parallel.
pub fn sequence_diagnostics(ks: &[u64], spec: &SparseSpec) -> Result<Vec<DiagnosticRow>> {
    ks.par_iter().map(|&k| diagnostic_row(k, spec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: i64, d: i64) -> SparseSpec {
        SparseSpec::new(BigRational::new(n.into(), d.into())).unwrap()
    }

    #[test]
    fn three_quarter_sequence() {
        let s = SparseSpec::default();
        let got: Vec<BigInt> = (1..=12).map(|k| s.index(k).unwrap()).collect();
        let want = [2, 5, 9, 16, 28, 46, 73, 116, 180, 276, 419, 631];
        assert_eq!(
            got,
            want.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>()
        );
        assert_eq!(s.k_min(), 2);
    }

    #[test]
    fn quarter_sequence_has_repeats() {
        let s = spec(1, 4);
        assert_eq!(s.k_min(), 2);
        let got: Vec<BigInt> = [1, 8, 15, 22, 29]
            .iter()
            .map(|&k| s.index(k).unwrap())
            .collect();
        let want = [2, 5, 7, 8, 10];
        assert_eq!(
            got,
            want.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>()
        );
        assert_eq!(s.index(65).unwrap(), s.index(66).unwrap());
    }

    #[test]
    fn large_index_is_exact() {
        let s = SparseSpec::default();
        let n = s.index(1000).unwrap();
        assert_eq!(
            n.to_string(),
            "169704557710848011344976438499740302579891869677044518811279590847574808675105"
        );
    }

    #[test]
    fn rejects_bad_gamma() {
        assert!(SparseSpec::new(BigRational::one()).is_err());
        assert!(SparseSpec::new(BigRational::from_integer(0.into())).is_err());
        assert!(sparse_index(0, &SparseSpec::default()).is_err());
    }

    #[test]
    fn diagnostic_increment_matches_direct_value() {
        let s = SparseSpec::default();
        let rows = sequence_diagnostics(&[5], &s).unwrap();
        let r = &rows[0];
        assert_eq!(r.mode, DiagnosticMode::Exact);
        assert_eq!(r.gap, Some(18.0));
        assert!((r.loglog_increment - 1.129_234_436_172_422).abs() < 1e-12);
        assert!((r.relative_gap - 18.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn guarded_below_k_min() {
        assert!(sequence_diagnostics(&[1], &SparseSpec::default()).is_err());
    }

    #[test]
    fn log_domain_trends() {
        let s = SparseSpec::default();
        let rows = sequence_diagnostics(&[100, 100_000_000], &s).unwrap();
        assert_eq!(rows[0].mode, DiagnosticMode::Exact);
        assert_eq!(rows[1].mode, DiagnosticMode::LogDomain);
        assert!(rows[1].log_increment < rows[0].log_increment);
        assert!(rows[1].loglog_increment < rows[0].loglog_increment);
        // asymptotic γ k^{γ-1}(γ ln k + 1)
        let k = 1e8f64;
        let asym = 0.75 * k.powf(-0.25) * (0.75 * k.ln() + 1.0);
        assert!((rows[1].loglog_increment / asym - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_domain_agrees_with_exact_where_both_apply() {
        let s = SparseSpec::default();
        let exact = diagnostic_row(300, &s).unwrap();
        let (rel, inc, loglog) = log_domain_increments(300f64, 0.75);
        assert!((exact.relative_gap / rel - 1.0).abs() < 1e-9);
        assert!((exact.log_increment / inc - 1.0).abs() < 1e-9);
        assert!((exact.loglog_increment / loglog - 1.0).abs() < 1e-9);
    }
}
