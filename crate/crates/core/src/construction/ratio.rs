use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::sparse::lambda;
use super::{ConstructionParams, Insertion, Synthesis};
use crate::error::{Result, ThetaError};
use crate::expansion::DigitWord;
use crate::interval::{log_loglog, Interval};

const PREC: u32 = 96;

/// `R_n = L_n log n log log n / (S_n − L_n)` at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSample {
    pub n: usize,
    pub max_digit: u64,
    pub sum: u128,
    /// `None` when `S_n = L_n`.
    pub ratio: Option<f64>,
    /// Bound on `|ratio − R_n|`.
    pub error_bound: Option<f64>,
    pub envelope_low: Option<f64>,
    pub envelope_high: Option<f64>,
    pub inside_envelope: Option<bool>,
}

fn ratio_interval(max_digit: u64, sum: u128, n: usize) -> Result<Option<Interval>> {
    let denom = sum - max_digit as u128;
    if denom == 0 {
        return Ok(None);
    }
    let r = lambda(n as u64, PREC)?
        .mul_int(&BigInt::from(max_digit))
        .div_int(&BigInt::from(denom));
    Ok(Some(r))
}

/// Ratio samples at the given checkpoints (sorted, deduplicated).
pub fn ratio_series(word: &DigitWord, checkpoints: &[usize]) -> Result<Vec<RatioSample>> {
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    if let Some(&bad) = cps.iter().find(|&&n| n < 3 || n > word.len()) {
        return Err(ThetaError::Domain(format!(
            "checkpoint {bad} outside 3..={}",
            word.len()
        )));
    }
    let mut out = Vec::with_capacity(cps.len());
    let (mut sum, mut max) = (0u128, 0u64);
    let mut pos = 0usize;
    for n in cps {
        while pos < n {
            let d = word.digits()[pos];
            sum += d as u128;
            max = max.max(d);
            pos += 1;
        }
        let iv = ratio_interval(max, sum, n)?;
        out.push(RatioSample {
            n,
            max_digit: max,
            sum,
            ratio: iv.as_ref().map(Interval::mid_f64),
            error_bound: iv
                .as_ref()
                .map(|i| i.radius_f64() + f64::EPSILON * i.mid_f64().abs()),
            envelope_low: None,
            envelope_high: None,
            inside_envelope: None,
        });
    }
    Ok(out)
}

/// Sandwich bounds for `R_n` on the block `[n_k, end)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Envelope {
    pub k: u64,
    pub start: usize,
    /// Exclusive end of the block inside the word.
    pub end: usize,
    /// Next insertion position `n_{k+1}` (may lie beyond the word).
    pub next_position: String,
    pub prefix_sum: u128,
    /// Largest `B_n` on the block (its value at the block's last position).
    pub block_sum: u128,
    pub low: f64,
    pub high: f64,
    #[serde(skip)]
    low_iv: Interval,
    #[serde(skip)]
    high_iv: Interval,
}

impl Envelope {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    /// `low ≤ R_n ≤ high` for every point of the enclosure `r`.
    fn contains(&self, r: &Interval) -> bool {
        let r = r.with_prec(PREC);
        r.lo() >= self.low_iv.lo() && r.hi() <= self.high_iv.hi()
    }
}

fn next_position(params: &ConstructionParams, ins: &Insertion) -> Result<BigInt> {
    let here = BigInt::from(ins.position);
    let mut k = ins.k + 1;
    loop {
        let n = params.sparse.index(k)?;
        if n > here {
            return Ok(n);
        }
        k += 1;
    }
}

fn envelope_for(
    params: &ConstructionParams,
    synth: &Synthesis,
    ins: &Insertion,
) -> Result<Envelope> {
    let word = &synth.word;
    let next = next_position(params, ins)?;
    let end = if next > BigInt::from(word.len()) {
        word.len() + 1
    } else {
        next.to_string().parse().expect("fits")
    };
    let block_sum: u128 = word.digits()[ins.position..end - 1]
        .iter()
        .map(|&d| d as u128)
        .sum();
    let a = BigInt::from(ins.prefix_sum);
    let lam_k = lambda(ins.position as u64, PREC)?;
    let lam_next = log_loglog(&next, PREC)?;
    let alpha = Interval::from_rational(&params.alpha, PREC);
    let one = Interval::from_i64(1, PREC);
    let low_iv = alpha
        .sub(&lam_k.div_int(&a))
        .div(&one.add(&Interval::from_ratio(&BigInt::from(block_sum), &a, PREC)))?;
    let high_iv = alpha
        .mul(&lam_next)
        .div(&lam_k)?
        .add(&lam_next.div_int(&a))
        .with_prec(PREC);
    let low_iv = low_iv.with_prec(PREC);
    Ok(Envelope {
        k: ins.k,
        start: ins.position,
        end,
        next_position: next.to_string(),
        prefix_sum: ins.prefix_sum,
        block_sum,
        low: low_iv.lo_f64(),
        high: high_iv.hi_f64(),
        low_iv,
        high_iv,
    })
}

/// The envelope of the block starting at `n_k`.
pub fn ratio_envelope(params: &ConstructionParams, synth: &Synthesis, k: u64) -> Result<Envelope> {
    let n = params.sparse.index(k)?;
    let ins = synth
        .insertions
        .iter()
        .find(|i| BigInt::from(i.position) == n)
        .ok_or_else(|| {
            ThetaError::Domain(format!(
                "k = {k} (n_k = {n}) is not an insertion of this word"
            ))
        })?;
    envelope_for(params, synth, ins)
}

/// Envelopes for every block, with each sample annotated by its block's
/// bounds and a rigorous containment flag.
pub fn attach_envelopes(
    params: &ConstructionParams,
    synth: &Synthesis,
    samples: &mut [RatioSample],
) -> Result<Vec<Envelope>> {
    let envs = synth
        .insertions
        .par_iter()
        .map(|ins| envelope_for(params, synth, ins))
        .collect::<Result<Vec<_>>>()?;
    for s in samples.iter_mut() {
        let Some(env) = envs.iter().find(|e| e.start <= s.n && s.n < e.end) else {
            continue;
        };
        s.envelope_low = Some(env.low);
        s.envelope_high = Some(env.high);
        s.inside_envelope = match ratio_interval(s.max_digit, s.sum, s.n)? {
            Some(r) => Some(env.contains(&r)),
            None => Some(false),
        };
    }
    Ok(envs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{synthesize, BasePolicy, SparseSpec};
    use crate::qfield::FieldSpec;
    use num_rational::BigRational;

    fn golden() -> (ConstructionParams, Synthesis) {
        let p = ConstructionParams::new(
            2,
            10,
            BigRational::from_integer(4.into()),
            SparseSpec::default(),
            BasePolicy::Constant(2),
        )
        .unwrap()
        .with_n0(2)
        .unwrap();
        let s = synthesize(&p, 9).unwrap();
        (p, s)
    }

    #[test]
    fn golden_ratio_at_nine() {
        let (_, s) = golden();
        let r = ratio_series(&s.word, &[9]).unwrap();
        assert_eq!(r[0].max_digit, 127);
        assert_eq!(r[0].sum, 182);
        let v = r[0].ratio.unwrap();
        assert!((v - 3.993_905_742_336_506).abs() < 1e-12);
        assert!(r[0].error_bound.unwrap() < 1e-12);
    }

    #[test]
    fn constant_word_closed_form() {
        let f = FieldSpec::new(2).unwrap();
        let w = DigitWord::new(vec![3; 1000], f).unwrap();
        let r = ratio_series(&w, &[3, 1000]).unwrap();
        let n = 1000f64;
        let want = 3.0 * n.ln() * n.ln().ln() / (999.0 * 3.0);
        assert!((r[1].ratio.unwrap() - want).abs() < 1e-12);
        let small = 3.0f64.ln() * 3.0f64.ln().ln() / 2.0;
        assert!((r[0].ratio.unwrap() - small).abs() < 1e-12);
        assert!(r[0].ratio.unwrap() >= 0.0);
    }

    #[test]
    fn degenerate_and_bad_checkpoints() {
        let f = FieldSpec::new(2).unwrap();
        let w = DigitWord::new(vec![2, 2, 2], f).unwrap();
        assert!(ratio_series(&w, &[2]).is_err());
        assert!(ratio_series(&w, &[4]).is_err());
        assert_eq!(ratio_series(&w, &[3]).unwrap()[0].sum, 6);
    }

    #[test]
    fn golden_envelopes_bracket_samples() {
        let (p, s) = golden();
        let mut samples = ratio_series(&s.word, &(5..=9).collect::<Vec<_>>()).unwrap();
        let envs = attach_envelopes(&p, &s, &mut samples).unwrap();
        assert_eq!(envs.len(), 2);
        assert!(samples.iter().all(|x| x.inside_envelope == Some(true)));
        assert!(envs.iter().all(|e| e.high >= e.low));
        assert!(envs[1].low > envs[0].low);
        let e2 = ratio_envelope(&p, &s, 2).unwrap();
        assert_eq!((e2.start, e2.end), (5, 9));
        assert_eq!(e2.block_sum, 6);
        assert!(ratio_envelope(&p, &s, 4).is_err());
    }
}
