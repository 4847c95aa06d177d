use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::sparse::{log_domain_increments, LOG_DOMAIN_EXPONENT};
use super::{positive, rational_to_f64, ser_rational, SparseSpec};
use crate::error::{Result, ThetaError};
use crate::interval::{log_loglog, ratio_to_f64, Interval};

/// The three conditions on the sparse sequence at a single index `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRecord {
    pub k: u64,
    /// `n_k` in decimal, or `exp(k^γ)` in log-domain rows.
    pub n_k: String,
    pub exact: bool,
    /// `α m (n_k − 1) / (log n_k log log n_k)`, compared against `M + 1`.
    pub a_value: f64,
    pub a_ok: bool,
    /// `Λ(n_{k+1}) − Λ(n_k)` with `Λ(n) = log n log log n`, compared against `α/2`.
    pub b_increment: f64,
    pub b_ok: bool,
    /// Gap `n_{k+1} − n_k` and the bound `n_k / k^{1/8}`; both divided by `n_k`
    /// in log-domain rows.
    pub c_gap: f64,
    pub c_bound: f64,
    pub c_ok: bool,
}

impl ConditionRecord {
    pub fn ok(&self) -> bool {
        self.a_ok && self.b_ok && self.c_ok
    }
}

/// The increment of condition (B) at the scan edge next to its asymptotic
/// form `γ k^{γ−1}(γ log k + 1)`, which decreases for large `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeNote {
    pub k: u64,
    pub b_increment: f64,
    pub b_asymptotic: f64,
    pub b_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub m: u64,
    pub big_m: u64,
    #[serde(serialize_with = "ser_rational")]
    pub alpha: BigRational,
    pub sparse: SparseSpec,
    pub scan_limit: u64,
    pub records: Vec<ConditionRecord>,
    /// Smallest `k*` such that every scanned `k ≥ k*` passes.
    pub n0: Option<u64>,
    pub edge: EdgeNote,
}

fn record(
    k: u64,
    pair: Option<(&BigInt, &BigInt)>,
    m: u64,
    big_m: u64,
    alpha: &BigRational,
    spec: &SparseSpec,
) -> Result<ConditionRecord> {
    let alpha_f = rational_to_f64(alpha);
    let eighth = (k as f64).powf(-0.125);
    let Some((a, b)) = pair else {
        let t = spec.exponent(k);
        let (rel, _, loglog) = log_domain_increments(k as f64, spec.gamma_f64());
        let log_a = (alpha_f * m as f64).ln() + t - (t * t.ln()).ln();
        return Ok(ConditionRecord {
            k,
            n_k: format!("exp({t})"),
            exact: false,
            a_value: log_a.exp(),
            a_ok: log_a > ((big_m + 1) as f64).ln(),
            b_increment: loglog,
            b_ok: loglog < alpha_f / 2.0,
            c_gap: rel,
            c_bound: eighth,
            c_ok: rel < eighth,
        });
    };
    let prec = 128;
    let la = log_loglog(a, prec)?;
    let lb = log_loglog(b, prec)?;
    let a_value = Interval::from_rational(alpha, prec)
        .mul_int(&(BigInt::from(m) * (a - 1)))
        .div(&la)?
        .mid_f64();
    let b_increment = lb.sub(&la).mid_f64();
    let c_gap = ratio_to_f64(&(b - a), &BigInt::from(1));
    let c_bound = ratio_to_f64(a, &BigInt::from(1)) * eighth;
    Ok(ConditionRecord {
        k,
        n_k: a.to_string(),
        exact: true,
        a_value,
        a_ok: a_value > (big_m + 1) as f64,
        b_increment,
        b_ok: b_increment < alpha_f / 2.0,
        c_gap,
        c_bound,
        c_ok: c_gap < c_bound,
    })
}

/// Scans `k = kMin..=scan_limit` for conditions (A), (B), (C).
pub fn find_n0(
    m: u64,
    big_m: u64,
    alpha: &BigRational,
    spec: &SparseSpec,
    scan_limit: u64,
) -> Result<ConditionReport> {
    if !positive(alpha) {
        return Err(ThetaError::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    if scan_limit < spec.k_min() {
        return Err(ThetaError::Domain(format!(
            "scan limit {scan_limit} is below kMin = {}",
            spec.k_min()
        )));
    }
    let exact_end = (spec.k_min()..=scan_limit + 1)
        .take_while(|&k| spec.exponent(k) < LOG_DOMAIN_EXPONENT)
        .last()
        .unwrap_or(spec.k_min());
    let indices = (spec.k_min()..=exact_end)
        .into_par_iter()
        .map(|k| spec.index(k))
        .collect::<Result<Vec<_>>>()?;
    let records = (spec.k_min()..=scan_limit)
        .into_par_iter()
        .map(|k| {
            let i = (k - spec.k_min()) as usize;
            let pair = (i + 1 < indices.len()).then(|| (&indices[i], &indices[i + 1]));
            record(k, pair, m, big_m, alpha, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let n0 = match records.iter().rposition(|r| !r.ok()) {
        None => Some(spec.k_min()),
        Some(i) if i + 1 < records.len() => Some(records[i + 1].k),
        Some(_) => None,
    };
    let last = records.last().expect("non-empty scan");
    let g = spec.gamma_f64();
    let kf = scan_limit as f64;
    let edge = EdgeNote {
        k: scan_limit,
        b_increment: last.b_increment,
        b_asymptotic: g * kf.powf(g - 1.0) * (g * kf.ln() + 1.0),
        b_threshold: rational_to_f64(alpha) / 2.0,
    };
    Ok(ConditionReport {
        m,
        big_m,
        alpha: alpha.clone(),
        sparse: spec.clone(),
        scan_limit,
        records,
        n0,
        edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn golden_parameters_start_at_two() {
        let spec = SparseSpec::default();
        let rep = find_n0(2, 10, &rat(4, 1), &spec, 1000).unwrap();
        assert_eq!(rep.n0, Some(2));
        let r2 = &rep.records[0];
        assert_eq!(r2.k, 2);
        assert!((r2.a_value - 41.780_510_209_700_41).abs() < 1e-9);
        assert_eq!(r2.c_gap, 4.0);
        assert!((r2.c_bound - 4.585_020_216_023_356).abs() < 1e-9);
        assert!((r2.b_increment - 0.963_736_865_684_132_6).abs() < 1e-12);
        assert!(rep.records.iter().all(|r| r.a_ok == (r.a_value > 11.0)));
    }

    #[test]
    fn alpha_one_has_no_candidate_at_three_quarters() {
        let spec = SparseSpec::default();
        let rep = find_n0(2, 10, &rat(1, 1), &spec, 1000).unwrap();
        assert_eq!(rep.n0, None);
        assert!(!rep.records.last().unwrap().b_ok);
        assert!(rep.edge.b_asymptotic > 0.5);
    }

    #[test]
    fn alpha_one_quarter_exponent() {
        let spec = SparseSpec::new(rat(1, 4)).unwrap();
        let rep = find_n0(2, 10, &rat(1, 1), &spec, 1000).unwrap();
        assert_eq!(rep.n0, Some(70));
        assert!(rep.edge.b_asymptotic < rep.edge.b_threshold);
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = SparseSpec::default();
        assert!(find_n0(2, 10, &rat(0, 1), &spec, 100).is_err());
        assert!(find_n0(2, 10, &rat(1, 1), &spec, 1).is_err());
    }
}
