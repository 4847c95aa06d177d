//! Dyadic interval arithmetic over big integers.
//!
//! An [`Interval`] at precision `p` is the closed set `[lo·2⁻ᵖ, hi·2⁻ᵖ]`.
//! Every operation rounds `lo` down and `hi` up, so the true value of any
//! expression evaluated here is always enclosed. `exp` and `ln` are computed
//! from Taylor / atanh series with explicit truncation bounds.

use std::cmp::Ordering;
use std::sync::RwLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, ThetaError};
use crate::qfield::QuadraticNumber;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn shr_floor(a: &BigInt, bits: u32) -> BigInt {
    a.div_floor(&pow2(bits))
}

fn shr_ceil(a: &BigInt, bits: u32) -> BigInt {
    div_ceil(a, &pow2(bits))
}

/// `x · 2^exp2` as the nearest-ish f64 (exact up to f64 rounding of the
/// leading 64 bits).
pub fn scaled_to_f64(x: &BigInt, exp2: i64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits() as i64;
    let shift = (bits - 64).max(0);
    let head = (x >> shift as usize).to_f64().unwrap_or(f64::NAN);
    let e = shift + exp2;
    // split the exponent so intermediate powers do not overflow
    let mut v = head;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

/// `a / b` as f64 for big integers of any size.
pub fn ratio_to_f64(a: &BigInt, b: &BigInt) -> f64 {
    assert!(!b.is_zero(), "zero denominator");
    if a.is_zero() {
        return 0.0;
    }
    let shift = (b.bits() as i64 - a.bits() as i64 + 64).max(0);
    let q = (a << shift as usize) / b;
    scaled_to_f64(&q, -shift)
}

/// Natural logarithm of a positive big integer in f64.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let bits = x.bits() as i64;
    let shift = (bits - 64).max(0);
    let head = (x >> shift as usize).to_f64().unwrap();
    head.ln() + shift as f64 * std::f64::consts::LN_2
}

impl Interval {
    pub fn new(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi, prec }
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        let v = n << prec as usize;
        Interval {
            lo: v.clone(),
            hi: v,
            prec,
        }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::from_int(&BigInt::from(n), prec)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        let scaled = num << prec as usize;
        Interval {
            lo: scaled.div_floor(&den),
            hi: div_ceil(&scaled, &den),
            prec,
        }
    }

    pub fn from_rational(x: &BigRational, prec: u32) -> Self {
        Self::from_ratio(x.numer(), x.denom(), prec)
    }

    /// Encloses `(p + q√m)/r` using an integer square root bracket.
    pub fn from_quad(x: &QuadraticNumber<BigInt>, prec: u32) -> Self {
        let m = BigInt::from(x.field().m());
        let s = (m << (2 * prec as usize)).sqrt();
        let s1 = &s + 1u32;
        let (qlo, qhi) = if x.q().is_negative() {
            (x.q() * &s1, x.q() * &s)
        } else {
            (x.q() * &s, x.q() * &s1)
        };
        let base = x.p() << prec as usize;
        let nlo = &base + qlo;
        let nhi = &base + qhi;
        Interval {
            lo: nlo.div_floor(x.r()),
            hi: div_ceil(&nhi, x.r()),
            prec,
        }
    }

    #[inline]
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi(&self) -> &BigInt {
        &self.hi
    }

    /// Re-expresses the interval at another precision, rounding outward.
    pub fn with_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = (prec - self.prec) as usize;
                Interval {
                    lo: &self.lo << d,
                    hi: &self.hi << d,
                    prec,
                }
            }
            Ordering::Less => {
                let d = self.prec - prec;
                Interval {
                    lo: shr_floor(&self.lo, d),
                    hi: shr_ceil(&self.hi, d),
                    prec,
                }
            }
        }
    }

    fn align(&self, other: &Self) -> (Self, Self) {
        let p = self.prec.max(other.prec);
        (self.with_prec(p), other.with_prec(p))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        Interval {
            lo: a.lo + b.lo,
            hi: a.hi + b.hi,
            prec: a.prec,
        }
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let p = a.prec;
        if !a.lo.is_negative() && !b.lo.is_negative() {
            return Interval {
                lo: shr_floor(&(&a.lo * &b.lo), p),
                hi: shr_ceil(&(&a.hi * &b.hi), p),
                prec: p,
            };
        }
        let cands = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let min = cands.iter().min().unwrap();
        let max = cands.iter().max().unwrap();
        Interval {
            lo: shr_floor(min, p),
            hi: shr_ceil(max, p),
            prec: p,
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        let (lo, hi) = if k.is_negative() {
            (&self.hi * k, &self.lo * k)
        } else {
            (&self.lo * k, &self.hi * k)
        };
        Interval {
            lo,
            hi,
            prec: self.prec,
        }
    }

    pub fn div_int(&self, k: &BigInt) -> Self {
        assert!(!k.is_zero(), "division by zero");
        let (lo, hi) = if k.is_negative() {
            (&self.hi, &self.lo)
        } else {
            (&self.lo, &self.hi)
        };
        Interval {
            lo: lo.div_floor(k),
            hi: div_ceil(hi, k),
            prec: self.prec,
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(ThetaError::DivisionByZero);
        }
        let one = pow2(2 * self.prec);
        // 1/x is decreasing on each sign branch
        Ok(Interval {
            lo: one.div_floor(&self.hi),
            hi: div_ceil(&one, &self.lo),
            prec: self.prec,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other);
        if b.contains_zero() {
            return Err(ThetaError::DivisionByZero);
        }
        let p = a.prec;
        let nums = [&a.lo << p as usize, &a.hi << p as usize];
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for n in &nums {
            for d in [&b.lo, &b.hi] {
                let fl = n.div_floor(d);
                let ce = div_ceil(n, d);
                lo = Some(lo.map_or(fl.clone(), |v: BigInt| v.min(fl)));
                hi = Some(hi.map_or(ce.clone(), |v: BigInt| v.max(ce)));
            }
        }
        Ok(Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
            prec: p,
        })
    }

    /// `⌊x⌋` when it is the same for every point of the interval.
    pub fn floor(&self) -> Option<BigInt> {
        let a = shr_floor(&self.lo, self.prec);
        let b = shr_floor(&self.hi, self.prec);
        (a == b).then_some(a)
    }

    /// Sign when the interval excludes zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn mid_f64(&self) -> f64 {
        scaled_to_f64(&(&self.lo + &self.hi), -(self.prec as i64) - 1)
    }

    pub fn lo_f64(&self) -> f64 {
        scaled_to_f64(&self.lo, -(self.prec as i64))
    }

    pub fn hi_f64(&self) -> f64 {
        scaled_to_f64(&self.hi, -(self.prec as i64))
    }

    /// Half-width, an upper bound on the distance from the midpoint to the
    /// true value.
    pub fn radius_f64(&self) -> f64 {
        scaled_to_f64(&(&self.hi - &self.lo), -(self.prec as i64) - 1)
    }

    /// `true` when both endpoints are strictly below the other's.
    pub fn strictly_less(&self, other: &Self) -> bool {
        let (a, b) = self.align(other);
        a.hi < b.lo
    }

    pub fn exp(&self) -> Self {
        let (lo, hi) = if self.lo == self.hi {
            exp_bounds(&self.lo, self.prec)
        } else {
            (
                exp_bounds(&self.lo, self.prec).0,
                exp_bounds(&self.hi, self.prec).1,
            )
        };
        Interval {
            lo,
            hi,
            prec: self.prec,
        }
    }

    pub fn ln(&self) -> Result<Self> {
        if !self.lo.is_positive() {
            return Err(ThetaError::Domain(
                "logarithm of a non-positive interval".into(),
            ));
        }
        let (lo, hi) = if self.lo == self.hi {
            ln_bounds(&self.lo, self.prec)
        } else {
            (
                ln_bounds(&self.lo, self.prec).0,
                ln_bounds(&self.hi, self.prec).1,
            )
        };
        Ok(Interval {
            lo,
            hi,
            prec: self.prec,
        })
    }

    pub fn ln2(prec: u32) -> Self {
        let w = prec + 16;
        let (lo, hi) = ln2_scaled(w);
        Interval {
            lo: shr_floor(&lo, 16),
            hi: shr_ceil(&hi, 16),
            prec,
        }
    }
}

/// exp(|a|·2⁻ʷ) at scale 2ʷ for `|a|·2⁻ʷ ≤ 1/2`, as (lower, upper).
fn exp_small(a: &BigInt, w: u32) -> (BigInt, BigInt) {
    debug_assert!(!a.is_negative());
    let one = pow2(w);
    let mut term = one.clone();
    let mut sum = one;
    let mut n = 0u32;
    loop {
        n += 1;
        term = (&term * a).div_floor(&(pow2(w) * BigInt::from(n)));
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    // a floored term is within 2 ulp of the true term (errors halve as they
    // propagate); the dropped tail is below 6 ulp since consecutive terms
    // shrink by at least 1/2
    let upper = &sum + BigInt::from(2 * n + 8);
    (sum, upper)
}

/// Lower and upper bounds on exp(x) for the point x = a·2⁻ᵖ, at scale 2ᵖ.
fn exp_bounds(a: &BigInt, p: u32) -> (BigInt, BigInt) {
    if a.is_zero() {
        return (pow2(p), pow2(p));
    }
    let mag = a.abs();
    // reduce |x| / 2^s <= 1/2
    let int_bits = mag.bits() as i64 - p as i64;
    let s = (int_bits + 1).max(0) as u32;
    // result magnitude ~ 2^(1.45·|x|): the relative precision we need is
    // p plus the bits of the result itself, plus growth from squaring
    let xf = scaled_to_f64(&mag, -(p as i64));
    let extra = (xf * std::f64::consts::LOG2_E).ceil().max(0.0) as u32;
    let w = p + s + 64 + if a.is_negative() { extra } else { 0 };
    // r = |x| / 2^s at scale 2^w, exactly
    let r = &mag << (w - p - s) as usize;
    let (mut lo, mut hi) = exp_small(&r, w);
    for _ in 0..s {
        lo = shr_floor(&(&lo * &lo), w);
        hi = shr_ceil(&(&hi * &hi), w);
    }
    if a.is_negative() {
        // exp(-|x|) = 1 / exp(|x|)
        let one = pow2(2 * w);
        let (l, h) = (one.div_floor(&hi), div_ceil(&one, &lo));
        lo = l;
        hi = h;
    }
    (shr_floor(&lo, w - p), shr_ceil(&hi, w - p))
}

/// atanh(u) for u at scale 2ʷ, 0 <= u <= 1/3, as (lower, upper).
fn atanh_small(u: &BigInt, w: u32) -> (BigInt, BigInt) {
    let u2 = shr_floor(&(u * u), w);
    let mut power = u.clone();
    let mut sum = u.clone();
    let mut k = 1u32;
    loop {
        power = shr_floor(&(&power * &u2), w);
        if power.is_zero() {
            break;
        }
        sum += &power / BigInt::from(2 * k + 1);
        k += 1;
    }
    // each power is within 3 ulp of u^(2k+1) and each division loses one
    // more; the tail is bounded by the last term times 1/(1-u^2) <= 9/8
    let upper = &sum + BigInt::from(4 * k + 8);
    (sum, upper)
}

fn ln2_series(w: u32) -> (BigInt, BigInt) {
    // ln 2 = 2 atanh(1/3)
    let third_lo = pow2(w) / BigInt::from(3);
    let (lo, hi) = atanh_small(&third_lo, w);
    // atanh' <= 9/8 on [0, 1/3], so one ulp of argument costs at most 2
    (lo * 2u32, (hi + 2u32) * 2u32)
}

static LN2_CACHE: RwLock<Option<(u32, BigInt, BigInt)>> = RwLock::new(None);

fn ln2_scaled(w: u32) -> (BigInt, BigInt) {
    if let Some((cw, lo, hi)) = LN2_CACHE.read().expect("ln2 cache").as_ref() {
        if *cw >= w {
            return (shr_floor(lo, cw - w), shr_ceil(hi, cw - w));
        }
    }
    let cw = w.max(512).next_power_of_two();
    let (lo, hi) = ln2_series(cw);
    let out = (shr_floor(&lo, cw - w), shr_ceil(&hi, cw - w));
    *LN2_CACHE.write().expect("ln2 cache") = Some((cw, lo, hi));
    out
}

/// Lower and upper bounds on ln(x) for the point x = a·2⁻ᵖ > 0, at scale 2ᵖ.
fn ln_bounds(a: &BigInt, p: u32) -> (BigInt, BigInt) {
    debug_assert!(a.sign() == Sign::Plus);
    let bits = a.bits() as i64;
    // x = 2^e · z with z in [1, 2)
    let mut e = bits - 1 - p as i64;
    let w = p + 64 + (64 - e.unsigned_abs().leading_zeros());
    let shift = w as i64 - (bits - 1);
    let (z_lo, z_hi) = if shift >= 0 {
        let z = a << shift as usize;
        (z.clone(), z)
    } else {
        let d = (-shift) as u32;
        (shr_floor(a, d), shr_ceil(a, d))
    };
    let one = pow2(w);
    // move z into [1/√2, √2) so that |u| <= 0.172
    let two_sq = pow2(2 * w + 1);
    let c = if &z_lo * &z_lo > two_sq {
        e += 1;
        &one << 1usize
    } else {
        one
    };
    // u = (z - c)/(z + c), increasing in z; the series sees |u|
    let u_lo = ((&z_lo - &c) << w as usize).div_floor(&(&z_lo + &c));
    let u_hi = div_ceil(&((&z_hi - &c) << w as usize), &(&z_hi + &c));
    let atanh_bounds = |u: &BigInt| -> (BigInt, BigInt) {
        if u.is_negative() {
            let (l, h) = atanh_small(&-u, w);
            (-h, -l)
        } else {
            atanh_small(u, w)
        }
    };
    let (s_lo, s_hi) = if z_lo == z_hi {
        // the true u lies within one ulp above u_lo and atanh' < 1.04 here
        let (l, h) = atanh_bounds(&u_lo);
        (l, h + 2u32)
    } else {
        let (l, _) = atanh_bounds(&u_lo);
        let (_, h) = atanh_bounds(&u_hi);
        (l, h)
    };
    let (l2_lo, l2_hi) = ln2_scaled(w);
    let eb = BigInt::from(e);
    let (lo, hi) = if e >= 0 {
        (&eb * l2_lo + s_lo * 2u32, &eb * l2_hi + s_hi * 2u32)
    } else {
        (&eb * l2_hi + s_lo * 2u32, &eb * l2_lo + s_hi * 2u32)
    };
    (shr_floor(&lo, w - p), shr_ceil(&hi, w - p))
}

/// Encloses the value of a field element and refines until the enclosure has
/// at least `rel_bits` bits of relative accuracy; returns ln|x| in f64.
pub fn ln_abs_quad(x: &QuadraticNumber<BigInt>) -> Result<f64> {
    if x.is_zero() {
        return Err(ThetaError::Domain("logarithm of zero".into()));
    }
    let mut prec = 128u32;
    loop {
        let iv = Interval::from_quad(&x.abs(), prec);
        if iv.lo.is_positive() {
            let width = &iv.hi - &iv.lo;
            if width.bits() + 60 < iv.lo.bits() {
                let mid = (&iv.lo + &iv.hi) >> 1usize;
                return Ok(ln_bigint(&mid) - prec as f64 * std::f64::consts::LN_2);
            }
        }
        prec *= 2;
    }
}

pub fn quad_to_f64(x: &QuadraticNumber<BigInt>) -> f64 {
    let mut prec = 96u32;
    loop {
        let iv = Interval::from_quad(x, prec);
        let width = &iv.hi - &iv.lo;
        if iv.lo.is_zero() && iv.hi.is_zero() {
            return 0.0;
        }
        let mag = iv.lo.abs().max(iv.hi.abs());
        if width.bits() + 60 < mag.bits() {
            return iv.mid_f64();
        }
        prec *= 2;
    }
}

/// ln(n)·ln(ln(n)) enclosed at precision `prec`; requires n >= 3.
pub fn log_loglog(n: &BigInt, prec: u32) -> Result<Interval> {
    if n < &BigInt::from(3) {
        return Err(ThetaError::Domain(format!(
            "log log n is undefined or non-positive for n = {n}"
        )));
    }
    let ln = Interval::from_int(n, prec).ln()?;
    let lnln = ln.ln()?;
    Ok(ln.mul(&lnln))
}
