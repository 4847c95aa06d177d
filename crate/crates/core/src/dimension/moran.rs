use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ThetaError};
use crate::numeric::{pairwise_sum, CompensatedSum};
use crate::qfield::FieldSpec;

pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Which length model the Moran sum uses for each depth-`n` cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthMode {
    /// `θ / ((1 + θ²) Q_n²)`
    Lower,
    /// `θ / Q_n²`
    Upper,
    /// The true length `θ / (Q_n (Q_n + θ Q_{n−1}))`.
    Exact,
}

/// A bisection interval for the root of `Σ |I|^s = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MoranRoot<F> {
    pub mode: LengthMode,
    pub lo: F,
    pub hi: F,
    /// `Σ|I|^lo − 1` (non-negative) and `Σ|I|^hi − 1` (non-positive).
    pub residual_lo: F,
    pub residual_hi: F,
    /// The sum still exceeds 1 at `s = 1`; the root is reported as 1.
    pub clamped: bool,
}

impl<F: Float> MoranRoot<F> {
    pub fn sign_change(&self) -> bool {
        self.clamped || (self.residual_lo >= F::zero() && self.residual_hi <= F::zero())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionBracket<F> {
    pub m: u64,
    pub big_m: u64,
    pub depth: usize,
    pub cylinder_count: u128,
    pub s_low: F,
    pub s_high: F,
    pub lower: MoranRoot<F>,
    pub upper: MoranRoot<F>,
    pub exact: MoranRoot<F>,
}

impl<F: Float> DimensionBracket<F> {
    pub fn width(&self) -> F {
        self.s_high - self.s_low
    }

    pub fn exact_inside(&self) -> bool {
        self.exact.lo >= self.s_low && self.exact.hi <= self.s_high
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.s_low <= other.s_high && other.s_low <= self.s_high
    }
}

/// `(M − m + 1)^depth`.
pub fn cylinder_count(m: u64, big_m: u64, depth: usize) -> Option<u128> {
    (big_m - m + 1).to_u128()?.checked_pow(depth as u32)
}

trait Counter:
    Clone + Send + Sync + Add<Output = Self> + Mul<Output = Self> + FromPrimitive + ToPrimitive
{
}
impl<T> Counter for T where
    T: Clone + Send + Sync + Add<Output = T> + Mul<Output = T> + FromPrimitive + ToPrimitive
{
}

struct Walk<F> {
    m: u64,
    big_m: u64,
    s: F,
    /// `s · log(θ mⁿ)`, shifted by `−s log(1 + 1/m)` in lower mode.
    shift: F,
    mode: LengthMode,
}

impl<F: Float + FromPrimitive> Walk<F> {
    fn leaf<T: Counter>(&self, a_prev: &T, a: &T) -> F {
        let la = F::from_f64(a.to_f64().expect("finite").ln()).unwrap();
        let log_len = match self.mode {
            LengthMode::Lower | LengthMode::Upper => la + la,
            LengthMode::Exact => {
                let sum = (a.clone() + a_prev.clone()).to_f64().expect("finite");
                la + F::from_f64(sum.ln()).unwrap()
            }
        };
        (self.shift - self.s * log_len).exp()
    }

    // a_n = ℓ a_{n−1} + m a_{n−2}, with Q_n = θⁿ a_n
    fn descend<T: Counter>(&self, a_prev: T, a: T, remaining: usize, acc: &mut CompensatedSum<F>) {
        if remaining == 0 {
            acc.add(self.leaf(&a_prev, &a));
            return;
        }
        let mm = T::from_u64(self.m).unwrap();
        for l in self.m..=self.big_m {
            let next = T::from_u64(l).unwrap() * a.clone() + mm.clone() * a_prev.clone();
            self.descend(a.clone(), next, remaining - 1, acc);
        }
    }
}

fn prefixes(m: u64, big_m: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (m..=big_m).map(move |d| {
                    let mut q = p.clone();
                    q.push(d);
                    q
                })
            })
            .collect();
    }
    out
}

fn sum_with<T: Counter, F: Float + FromPrimitive + Send + Sync>(walk: &Walk<F>, depth: usize) -> F {
    let plen = depth.min(2);
    let partial: Vec<F> = prefixes(walk.m, walk.big_m, plen)
        .par_iter()
        .map(|p| {
            let mm = T::from_u64(walk.m).unwrap();
            let (mut a_prev, mut a) = (T::from_u64(0).unwrap(), T::from_u64(1).unwrap());
            for &d in p {
                let next = T::from_u64(d).unwrap() * a.clone() + mm.clone() * a_prev;
                a_prev = a;
                a = next;
            }
            let mut acc = CompensatedSum::new();
            walk.descend(a_prev, a, depth - plen, &mut acc);
            acc.value()
        })
        .collect();
    pairwise_sum(&partial)
}

/// `Σ |I_n(w)|^s` over all words `w ∈ [m, M]^depth`.
pub fn moran_sum<F: Float + FromPrimitive + Send + Sync>(
    m: u64,
    big_m: u64,
    depth: usize,
    s: F,
    mode: LengthMode,
) -> Result<F> {
    FieldSpec::new(m)?;
    if big_m < m || depth == 0 {
        return Err(ThetaError::InvalidParameter(format!(
            "need M >= m and depth >= 1, got m = {m}, M = {big_m}, depth = {depth}"
        )));
    }
    let mf = m as f64;
    let mut shift = -0.5 * mf.ln() + depth as f64 * mf.ln();
    if mode == LengthMode::Lower {
        shift -= (1.0 / mf).ln_1p();
    }
    let walk = Walk {
        m,
        big_m,
        s,
        shift: s * F::from_f64(shift).unwrap(),
        mode,
    };
    // a_n <= (M + m)^n, which picks the narrowest exact counter
    let bound = (big_m + m) as f64;
    let bits = depth as f64 * bound.log2() + 2.0;
    Ok(if bits < 63.0 {
        sum_with::<u64, F>(&walk, depth)
    } else if bits < 127.0 {
        sum_with::<u128, F>(&walk, depth)
    } else {
        sum_with::<BigUint, F>(&walk, depth)
    })
}

fn bisect<F: Float + FromPrimitive + Send + Sync>(
    m: u64,
    big_m: u64,
    depth: usize,
    tol: F,
    mode: LengthMode,
) -> Result<MoranRoot<F>> {
    let f = |s: F| -> Result<F> { Ok(moran_sum(m, big_m, depth, s, mode)? - F::one()) };
    let at_one = f(F::one())?;
    if at_one >= F::zero() {
        return Ok(MoranRoot {
            mode,
            lo: F::one(),
            hi: F::one(),
            residual_lo: at_one,
            residual_hi: at_one,
            clamped: true,
        });
    }
    let two = F::one() + F::one();
    let (mut lo, mut hi) = (F::zero(), F::one());
    let (mut r_lo, mut r_hi) = (f(lo)?, at_one);
    while hi - lo > tol {
        let mid = (lo + hi) / two;
        let r = f(mid)?;
        if r > F::zero() {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    Ok(MoranRoot {
        mode,
        lo,
        hi,
        residual_lo: r_lo,
        residual_hi: r_hi,
        clamped: false,
    })
}

/// Solves the depth-`n` Moran equation with the lower, upper and exact
/// length models; `[s_low, s_high]` spans the lower-model and upper-model
/// roots.
pub fn moran_bracket<F: Float + FromPrimitive + Send + Sync>(
    m: u64,
    big_m: u64,
    depth: usize,
    tol: F,
    budget: u128,
) -> Result<DimensionBracket<F>> {
    if tol <= F::zero() {
        return Err(ThetaError::InvalidParameter(
            "tolerance must be positive".into(),
        ));
    }
    let count = cylinder_count(m, big_m, depth).unwrap_or(u128::MAX);
    if count > budget {
        return Err(ThetaError::BudgetExceeded {
            cylinders: count,
            budget,
        });
    }
    let lower = bisect(m, big_m, depth, tol, LengthMode::Lower)?;
    let upper = bisect(m, big_m, depth, tol, LengthMode::Upper)?;
    let exact = bisect(m, big_m, depth, tol, LengthMode::Exact)?;
    Ok(DimensionBracket {
        m,
        big_m,
        depth,
        cylinder_count: count,
        s_low: lower.lo,
        s_high: upper.hi,
        lower,
        upper,
        exact,
    })
}
