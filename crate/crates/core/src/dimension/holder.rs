use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{insert_apply, insertion_positions, ConstructionParams};
use crate::error::{Result, ThetaError};
use crate::expansion::{value_of, DigitWord};
use crate::interval::ln_abs_quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    /// The two base words differ in a single digit before the first insertion.
    OneEarlyDigit,
    /// Independent uniformly random base words.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub mode: PairMode,
    pub truncation_depth: usize,
    pub pair_count: usize,
    pub skipped: usize,
    pub min_exponent: f64,
    pub median_exponent: f64,
    pub max_exponent: f64,
    pub all_positive: bool,
}

/// `log|f(y₁) − f(y₂)| / log|y₁ − y₂|` for the truncated constructed points
/// built from two base words; `None` for coincident bases.
pub fn pair_exponent(
    params: &ConstructionParams,
    base1: &[u64],
    base2: &[u64],
    depth: usize,
) -> Result<Option<f64>> {
    let y1 = insert_apply(base1, params, depth)?;
    let y2 = insert_apply(base2, params, depth)?;
    let kept = depth - y1.insertions.len();
    if base1[..kept] == base2[..kept] {
        return Ok(None);
    }
    let field = params.field;
    let f1 = value_of::<BigInt>(&DigitWord::new(base1[..kept].to_vec(), field)?)?;
    let f2 = value_of::<BigInt>(&DigitWord::new(base2[..kept].to_vec(), field)?)?;
    let v1 = value_of::<BigInt>(&y1.word)?;
    let v2 = value_of::<BigInt>(&y2.word)?;
    let dy = ln_abs_quad(&v1.try_sub(&v2)?)?;
    let df = ln_abs_quad(&f1.try_sub(&f2)?)?;
    Ok(Some(df / dy))
}

pub fn holder_exponent_estimate(
    params: &ConstructionParams,
    truncation_depth: usize,
    pairs: usize,
    seed: u64,
    mode: PairMode,
) -> Result<HolderEstimate> {
    let positions = insertion_positions(params, truncation_depth)?;
    if positions.len() < 2 {
        return Err(ThetaError::InvalidParameter(format!(
            "truncation depth {truncation_depth} covers {} insertion(s); need at least 2",
            positions.len()
        )));
    }
    if pairs < 2 {
        return Err(ThetaError::InvalidParameter("need at least 2 pairs".into()));
    }
    let (m, big_m) = (params.m(), params.big_m);
    let len = truncation_depth - positions.len();
    let early = positions[0].1 - 1;
    if mode == PairMode::OneEarlyDigit && (early == 0 || big_m == m) {
        return Err(ThetaError::InvalidParameter(
            "no base digit precedes the first insertion".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases: Vec<(Vec<u64>, Vec<u64>)> = (0..pairs)
        .map(|_| {
            let a: Vec<u64> = (0..len).map(|_| rng.gen_range(m..=big_m)).collect();
            let b = match mode {
                PairMode::Random => (0..len).map(|_| rng.gen_range(m..=big_m)).collect(),
                PairMode::OneEarlyDigit => {
                    let mut b = a.clone();
                    let i = rng.gen_range(0..early);
                    let shift = rng.gen_range(1..=big_m - m);
                    b[i] = m + (b[i] - m + shift) % (big_m - m + 1);
                    b
                }
            };
            (a, b)
        })
        .collect();
    let results = bases
        .par_iter()
        .map(|(a, b)| pair_exponent(params, a, b, truncation_depth))
        .collect::<Result<Vec<_>>>()?;
    let mut exps: Vec<f64> = results.iter().flatten().copied().collect();
    let skipped = results.len() - exps.len();
    if exps.is_empty() {
        return Err(ThetaError::InvalidParameter(
            "every sampled pair was coincident".into(),
        ));
    }
    exps.sort_by(f64::total_cmp);
    let n = exps.len();
    let median = if n % 2 == 1 {
        exps[n / 2]
    } else {
        (exps[n / 2 - 1] + exps[n / 2]) / 2.0
    };
    Ok(HolderEstimate {
        mode,
        truncation_depth,
        pair_count: n,
        skipped,
        min_exponent: exps[0],
        median_exponent: median,
        max_exponent: exps[n - 1],
        all_positive: exps[0] > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{BasePolicy, SparseSpec};
    use num_rational::BigRational;

    fn golden() -> ConstructionParams {
        ConstructionParams::new(
            2,
            10,
            BigRational::from_integer(4.into()),
            SparseSpec::default(),
            BasePolicy::Constant(2),
        )
        .unwrap()
        .with_n0(2)
        .unwrap()
    }

    #[test]
    fn identical_bases_are_skipped() {
        let p = golden();
        let b = vec![3; 20];
        assert_eq!(pair_exponent(&p, &b, &b, 12).unwrap(), None);
    }

    #[test]
    fn estimates_are_positive_and_ordered() {
        let p = golden();
        for mode in [PairMode::OneEarlyDigit, PairMode::Random] {
            let e = holder_exponent_estimate(&p, 12, 40, 1, mode).unwrap();
            assert!(e.all_positive);
            assert!(e.min_exponent <= e.median_exponent && e.median_exponent <= e.max_exponent);
            assert_eq!(e.pair_count + e.skipped, 40);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let p = golden();
        let a = holder_exponent_estimate(&p, 12, 20, 9, PairMode::Random).unwrap();
        let b = holder_exponent_estimate(&p, 12, 20, 9, PairMode::Random).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn preconditions() {
        let p = golden();
        assert!(holder_exponent_estimate(&p, 6, 20, 0, PairMode::Random).is_err());
        assert!(holder_exponent_estimate(&p, 12, 1, 0, PairMode::Random).is_err());
    }
}
