//! The invariant measure of the generalized Gauss map, with density
//! `θ / ((1 + θx) log(1 + θ²))` on `[0, θ]`, and Monte Carlo digit statistics.

use num_bigint::BigInt;
use num_traits::{Float, FromPrimitive, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ThetaError};
use crate::expansion::digit_stream;
use crate::interval::Interval;
use crate::numeric::CompensatedSum;
use crate::qfield::FieldSpec;
use crate::Quad;

const CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussMeasure<F> {
    pub field: FieldSpec,
    theta: F,
    /// `log(1 + θ²) = log(1 + 1/m)`.
    pub normalizer: F,
}

impl<F: Float + FromPrimitive> GaussMeasure<F> {
    pub fn new(field: FieldSpec) -> Self {
        let m = F::from_u64(field.m()).unwrap();
        GaussMeasure {
            field,
            theta: m.sqrt().recip(),
            normalizer: m.recip().ln_1p(),
        }
    }

    pub fn theta(&self) -> F {
        self.theta
    }

    fn check(&self, a: F, b: F) -> Result<()> {
        let slack = F::one() + F::epsilon() * F::from_f64(4.0).unwrap();
        if !(a >= F::zero() && a <= b && b <= self.theta * slack) {
            return Err(ThetaError::Domain(format!(
                "[{}, {}] is not a subinterval of [0, θ]",
                a.to_f64().unwrap_or(f64::NAN),
                b.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(())
    }

    pub fn density(&self, x: F) -> F {
        self.theta / ((F::one() + self.theta * x) * self.normalizer)
    }

    /// `γ([0, x])`.
    pub fn cdf(&self, x: F) -> F {
        (self.theta * x).ln_1p() / self.normalizer
    }

    /// `((1 + θ²)^u − 1)/θ`.
    pub fn inverse_cdf(&self, u: F) -> F {
        (u * self.normalizer).exp_m1() / self.theta
    }

    pub fn measure_interval(&self, a: F, b: F) -> Result<F> {
        self.check(a, b)?;
        Ok(self.interval_unchecked(a, b))
    }

    fn interval_unchecked(&self, a: F, b: F) -> F {
        let t = self.theta;
        (t * (b - a) / (F::one() + t * a)).ln_1p() / self.normalizer
    }

    /// Probability that the first digit equals `j`.
    pub fn digit_law(&self, j: u64) -> Result<F> {
        if j < self.field.m() {
            return Err(ThetaError::Domain(format!(
                "digit {j} is below m = {}",
                self.field.m()
            )));
        }
        let jf = F::from_u64(j).unwrap();
        let two = F::one() + F::one();
        Ok((jf * (jf + two)).recip().ln_1p() / self.normalizer)
    }

    /// Probability that the first digit exceeds `j`.
    pub fn digit_tail(&self, j: u64) -> F {
        let jf = F::from_u64(j).unwrap();
        (jf + F::one()).recip().ln_1p() / self.normalizer
    }

    /// Measure of the branch-`ℓ` preimage `[1/(b + θℓ), 1/(a + θℓ)]`.
    fn branch(&self, a: F, b: F, l: F) -> F {
        let t = self.theta;
        (t * (b - a) / ((a + t * l) * (b + t * l + t))).ln_1p() / self.normalizer
    }

    /// Compares `γ([a, b])` with the measure of its preimage under the Gauss
    /// map, summing branches `m..=cutoff` and estimating the rest in closed
    /// form.
    pub fn invariance_defect(&self, a: F, b: F, cutoff: u64) -> Result<InvarianceReport<F>> {
        self.check(a, b)?;
        if cutoff < self.field.m() {
            return Err(ThetaError::InvalidParameter(format!(
                "cutoff {cutoff} is below m = {}",
                self.field.m()
            )));
        }
        let t = self.theta;
        let one = F::one();
        let two = one + one;
        let target = self.interval_unchecked(a, b);
        let mut acc = CompensatedSum::new();
        for l in self.field.m()..=cutoff {
            acc.add(self.branch(a, b, F::from_u64(l).unwrap()));
        }
        let partial = acc.value();
        let c = F::from_u64(cutoff).unwrap();
        let whole = a == F::zero() && b == t;
        let (tail, slack) = if whole {
            (self.digit_tail(cutoff), F::zero())
        } else {
            // midpoint rule: Σ_{ℓ>c} g(ℓ) ≈ ∫_{c+1/2}^∞ g, with
            // ∫_{t0}^∞ g = (D(b + θt0) − D(a + θt0)) / (θ N),
            // D(x) = (x + θ)log(x + θ) − x log x
            let t0 = c + one / two;
            let (pa, pb) = (a + t * t0, b + t * t0);
            let h = |x: F| x * (t / x).ln_1p();
            let diff = t * ((pb - pa) / (pa + t)).ln_1p() + (h(pb) - h(pa));
            let tail = diff / (t * self.normalizer);
            // |midpoint error| <= (g'' + |g'|)/24 at t0, doubled for safety;
            // with r = K/(pq), p = a + θu, q = b + θ + θu
            let (p, q) = (pa, pb + t);
            let k = t * (b - a);
            let r1 = k * t * (p + q) / (p * p * q * q);
            let r2 = k * t * t * two * (p * p + p * q + q * q) / (p * p * p * q * q * q);
            let quad = two * (r1 + r2) / (F::from_u64(24).unwrap() * self.normalizer);
            let cancel = F::from_u64(16).unwrap() * F::epsilon() * t / (t * self.normalizer);
            (tail, quad + cancel)
        };
        let rounding = F::from_u64(8).unwrap() * F::epsilon() * (partial + target);
        let defect = (target - partial - tail).abs() + slack + rounding;
        Ok(InvarianceReport {
            target,
            partial,
            tail,
            slack: slack + rounding,
            crude_tail_bound: self.digit_tail(cutoff),
            defect,
        })
    }

    /// `count` samples from the measure, generated in fixed chunks with one
    /// ChaCha stream per chunk so the output does not depend on thread count.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<F>
    where
        F: Send + Sync,
    {
        let chunks = count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let n = CHUNK.min(count - c * CHUNK);
                (0..n)
                    .map(|_| self.inverse_cdf(F::from_f64(rng.gen::<f64>()).unwrap()))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// First digit `⌊1/(θx)⌋` of a sample.
    pub fn first_digit(&self, x: F) -> Option<u64> {
        if x <= F::zero() {
            return None;
        }
        (x * self.theta).recip().floor().to_u64()
    }
}

pub fn sample_gamma<F: Float + FromPrimitive + Send + Sync>(
    field: FieldSpec,
    seed: u64,
    count: usize,
) -> Vec<F> {
    GaussMeasure::<F>::new(field).sample(seed, count)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvarianceReport<F> {
    pub target: F,
    /// Branches `m..=cutoff`.
    pub partial: F,
    /// Closed-form estimate of the branches beyond the cutoff.
    pub tail: F,
    /// Bound on the tail-estimate and rounding error, included in `defect`.
    pub slack: F,
    /// Measure of the union of all branches beyond the cutoff.
    pub crude_tail_bound: F,
    pub defect: F,
}

/// Empirical first-digit frequencies next to the digit law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitFrequency {
    pub digit: u64,
    pub count: u64,
    pub frequency: f64,
    pub expected: f64,
    pub sigma: f64,
    pub z: f64,
}

pub fn digit_frequencies<F: Float + FromPrimitive + Sync>(
    measure: &GaussMeasure<F>,
    samples: &[F],
    digits: std::ops::RangeInclusive<u64>,
) -> Result<Vec<DigitFrequency>> {
    let n = samples.len() as f64;
    digits
        .map(|j| {
            let count = samples
                .par_iter()
                .filter(|&&x| measure.first_digit(x) == Some(j))
                .count() as u64;
            let p = measure.digit_law(j)?.to_f64().unwrap();
            let sigma = (p * (1.0 - p) / n).sqrt();
            let frequency = count as f64 / n;
            Ok(DigitFrequency {
                digit: j,
                count,
                frequency,
                expected: p,
                sigma,
                z: (frequency - p) / sigma,
            })
        })
        .collect()
}

/// Running digit statistics at one orbit index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitPoint {
    pub n: usize,
    pub sum: u128,
    pub max_digit: u64,
    /// `L log n log log n / (S − L)` for `n ≥ 3` and `S > L`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitStats {
    pub digits: Vec<u64>,
    pub terminated: bool,
    /// Working precision (bits) of the last pass for interval orbits.
    pub precision: Option<u32>,
    pub series: Vec<OrbitPoint>,
}

fn running_stats(digits: &[u64]) -> Vec<OrbitPoint> {
    let (mut sum, mut max) = (0u128, 0u64);
    digits
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            sum += d as u128;
            max = max.max(d);
            let n = i + 1;
            let ratio = (n >= 3 && sum > max as u128).then(|| {
                let nf = n as f64;
                max as f64 * nf.ln() * nf.ln().ln() / (sum - max as u128) as f64
            });
            OrbitPoint {
                n,
                sum,
                max_digit: max,
                ratio,
            }
        })
        .collect()
}

/// Digit statistics along the exact orbit of a field element.
pub fn orbit_stats(x: &Quad, n: usize) -> Result<OrbitStats> {
    let e = digit_stream(x, n)?;
    let digits = e.word.digits().to_vec();
    Ok(OrbitStats {
        series: running_stats(&digits),
        digits,
        terminated: e.terminated,
        precision: None,
    })
}

const MAX_ORBIT_PREC: u32 = 1 << 24;
/// Bits kept below the current interval width.
const GUARD_BITS: u32 = 64;

/// Digit statistics along the orbit of a real point given exactly as the
/// dyadic value of `x`, iterated in interval arithmetic. When a digit is
/// ambiguous the orbit is recomputed from the start at a precision
/// extrapolated from how far the previous pass got.
pub fn orbit_stats_real(field: FieldSpec, x: f64, n: usize) -> Result<OrbitStats> {
    let theta = 1.0 / (field.m() as f64).sqrt();
    if !(x > 0.0 && x <= theta) {
        return Err(ThetaError::Domain(format!("x = {x} is outside (0, θ]")));
    }
    let (mant, exp2) = {
        let bits = x.to_bits();
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        if e == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), e - 1075)
        }
    };
    let mut prec = 128u32.saturating_add((n as u32).saturating_mul(4));
    loop {
        match interval_orbit(field, mant, exp2, n, prec)? {
            Ok((digits, terminated)) => {
                return Ok(OrbitStats {
                    series: running_stats(&digits),
                    digits,
                    terminated,
                    precision: Some(prec),
                })
            }
            Err(_) if prec >= MAX_ORBIT_PREC => {
                return Err(ThetaError::FloorAmbiguity(format!(
                    "orbit digit undecided at {prec} bits"
                )))
            }
            Err(reached) => {
                let rate = prec as f64 / reached.max(1) as f64;
                let want = (1.25 * rate * n as f64) as u32 + GUARD_BITS;
                prec = want
                    .clamp(prec + GUARD_BITS, prec.saturating_mul(4))
                    .min(MAX_ORBIT_PREC);
            }
        }
    }
}

/// Digits of the orbit, or the number of digits decided before precision ran out.
#[allow(clippy::type_complexity)]
fn interval_orbit(
    field: FieldSpec,
    mant: u64,
    exp2: i64,
    n: usize,
    prec: u32,
) -> Result<std::result::Result<(Vec<u64>, bool), usize>> {
    let sqrt_m = Interval::from_quad(&field.sqrt_m::<BigInt>(), prec);
    let theta = Interval::from_quad(&field.theta::<BigInt>(), prec);
    let m = BigInt::from(mant);
    let mut x = if exp2 >= 0 {
        Interval::from_int(&(m << exp2 as usize), prec)
    } else {
        Interval::from_ratio(&m, &(BigInt::from(1) << (-exp2) as usize), prec)
    };
    let mut digits = Vec::with_capacity(n);
    while digits.len() < n {
        if x.contains_zero() {
            if x.lo().is_zero() && x.hi().is_zero() {
                return Ok(Ok((digits, true)));
            }
            return Ok(Err(digits.len()));
        }
        let p = x.prec();
        let y = x.recip()?;
        let Some(d) = y.mul(&sqrt_m.with_prec(p)).floor() else {
            return Ok(Err(digits.len()));
        };
        let d = d
            .to_u64()
            .ok_or_else(|| ThetaError::Overflow("orbit digit".into()))?;
        digits.push(d);
        x = y.sub(&theta.with_prec(p).mul_int(&BigInt::from(d)));
        // drop bits far below the current uncertainty
        let width = (x.hi() - x.lo()).bits() as u32;
        let keep = (p + GUARD_BITS).saturating_sub(width).max(GUARD_BITS);
        if keep < p {
            x = x.with_prec(keep);
        }
    }
    Ok(Ok((digits, false)))
}
