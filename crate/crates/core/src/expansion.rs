//! θ-expansion dynamics: the generalized Gauss map, digit extraction,
//! convergents, cylinder intervals and the exact metric bounds on them.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ThetaError};
use crate::qfield::{ExactInt, FieldSpec, QuadraticNumber};

/// A finite admissible digit sequence `(ℓ₁, …, ℓₙ)` with every `ℓᵢ ≥ m`.
///
/// Positions are 1-based. Words produced by the construction module carry the
/// set of positions that hold inserted digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitWord {
    digits: Vec<u64>,
    #[serde(skip)]
    field: FieldSpec,
    inserted: BTreeSet<usize>,
}

impl DigitWord {
    pub fn new(digits: Vec<u64>, field: FieldSpec) -> Result<Self> {
        Self::with_insertions(digits, field, BTreeSet::new())
    }

    pub fn with_insertions(
        digits: Vec<u64>,
        field: FieldSpec,
        inserted: BTreeSet<usize>,
    ) -> Result<Self> {
        check_admissible(&digits, field.m())?;
        if let Some(&bad) = inserted.iter().find(|&&p| p == 0 || p > digits.len()) {
            return Err(ThetaError::Domain(format!(
                "insertion position {bad} outside 1..={}",
                digits.len()
            )));
        }
        Ok(DigitWord {
            digits,
            field,
            inserted,
        })
    }

    pub fn empty(field: FieldSpec) -> Self {
        DigitWord {
            digits: Vec::new(),
            field,
            inserted: BTreeSet::new(),
        }
    }

    #[inline]
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Digit at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> u64 {
        self.digits[pos - 1]
    }

    pub fn insertions(&self) -> &BTreeSet<usize> {
        &self.inserted
    }

    pub fn is_inserted(&self, pos: usize) -> bool {
        self.inserted.contains(&pos)
    }

    pub fn prefix(&self, n: usize) -> DigitWord {
        DigitWord {
            digits: self.digits[..n].to_vec(),
            field: self.field,
            inserted: self.inserted.range(..=n).copied().collect(),
        }
    }

    pub fn extended(&self, d: u64) -> Result<DigitWord> {
        let mut digits = self.digits.clone();
        digits.push(d);
        DigitWord::with_insertions(digits, self.field, self.inserted.clone())
    }

    /// The word with the 1-based position `k` removed (insertion marks dropped).
    pub fn omit(&self, k: usize) -> DigitWord {
        let mut digits = self.digits.clone();
        digits.remove(k - 1);
        DigitWord {
            digits,
            field: self.field,
            inserted: BTreeSet::new(),
        }
    }

    pub fn sum(&self) -> u128 {
        self.digits.iter().map(|&d| d as u128).sum()
    }
}

fn check_admissible(digits: &[u64], m: u64) -> Result<()> {
    match digits.iter().position(|&d| d < m) {
        Some(i) => Err(ThetaError::Inadmissible {
            position: i + 1,
            digit: digits[i],
            min: m,
        }),
        None => Ok(()),
    }
}

/// Result of one application of the generalized Gauss map.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussStep<T> {
    pub digit: u64,
    pub next: QuadraticNumber<T>,
}

/// `T_θ(x) = 1/x − θ⌊1/(θx)⌋` for `0 < x ≤ θ`.
pub fn gauss_step<T: ExactInt>(x: &QuadraticNumber<T>) -> Result<GaussStep<T>> {
    let field = x.field();
    if x.is_zero() {
        return Err(ThetaError::OrbitTerminated);
    }
    let theta: QuadraticNumber<T> = field.theta();
    if x.signum() == Ordering::Less || x.compare_exact(&theta)? == Ordering::Greater {
        return Err(ThetaError::Domain(format!("x = {x} is outside (0, θ]")));
    }
    let inv = x.recip()?;
    let scaled = inv.try_mul(&field.sqrt_m())?; // 1/(θx) = √m / x
    let digit_t = scaled.floor_exact();
    let digit = digit_t
        .to_u64()
        .ok_or_else(|| ThetaError::Overflow(format!("digit {digit_t} exceeds u64")))?;
    let next = inv.try_sub(&theta.mul_int(&digit_t))?;
    Ok(GaussStep { digit, next })
}

/// First `n` digits of `x`, or fewer when the orbit reaches 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub word: DigitWord,
    pub terminated: bool,
}

pub fn digit_stream<T: ExactInt>(x: &QuadraticNumber<T>, n: usize) -> Result<Expansion> {
    let field = x.field();
    let mut digits = Vec::with_capacity(n);
    let mut cur = x.clone();
    let mut terminated = false;
    while digits.len() < n {
        let step = gauss_step(&cur)?;
        digits.push(step.digit);
        cur = step.next;
        if cur.is_zero() {
            terminated = true;
            break;
        }
    }
    Ok(Expansion {
        word: DigitWord::new(digits, field)?,
        terminated,
    })
}

/// Convergent state `(P_{n−1}, P_n, Q_{n−1}, Q_n)` after consuming a word.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Convergents<T: ExactInt> {
    pub p_prev: QuadraticNumber<T>,
    pub p: QuadraticNumber<T>,
    pub q_prev: QuadraticNumber<T>,
    pub q: QuadraticNumber<T>,
}

impl<T: ExactInt> Convergents<T> {
    /// Seeds `P₋₁ = 1, P₀ = 0, Q₋₁ = 0, Q₀ = 1`.
    pub fn seed(field: FieldSpec) -> Self {
        Convergents {
            p_prev: QuadraticNumber::one(field),
            p: QuadraticNumber::zero(field),
            q_prev: QuadraticNumber::zero(field),
            q: QuadraticNumber::one(field),
        }
    }

    pub fn push(&mut self, digit: u64) {
        let field = self.p.field();
        let coeff: QuadraticNumber<T> = field
            .theta::<T>()
            .mul_int(&T::from_u64(digit).expect("digit fits carrier"));
        let p_next = &(&coeff * &self.p) + &self.p_prev;
        let q_next = &(&coeff * &self.q) + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p, p_next);
        self.q_prev = std::mem::replace(&mut self.q, q_next);
    }

    pub fn of(digits: &[u64], field: FieldSpec) -> Self {
        let mut c = Self::seed(field);
        for &d in digits {
            c.push(d);
        }
        c
    }
}

/// The fundamental interval `I_n(ℓ₁,…,ℓₙ)` with its convergent state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cylinder<T: ExactInt> {
    pub word: DigitWord,
    pub convergents: Convergents<T>,
    pub left: QuadraticNumber<T>,
    pub right: QuadraticNumber<T>,
    pub length: QuadraticNumber<T>,
}

impl<T: ExactInt> Cylinder<T> {
    pub fn q(&self) -> &QuadraticNumber<T> {
        &self.convergents.q
    }

    pub fn value(&self) -> QuadraticNumber<T> {
        &self.convergents.p / &self.convergents.q
    }

    pub fn midpoint(&self) -> QuadraticNumber<T> {
        let two = T::from_u64(2).unwrap();
        let sum = &self.left + &self.right;
        &sum / &QuadraticNumber::from_int(two, sum.field())
    }

    /// `true` when `other` lies strictly inside this cylinder.
    pub fn strictly_contains(&self, other: &Cylinder<T>) -> bool {
        let lo = other.left.compare_exact(&self.left).unwrap();
        let hi = other.right.compare_exact(&self.right).unwrap();
        lo != Ordering::Less
            && hi != Ordering::Greater
            && (lo == Ordering::Greater || hi == Ordering::Less)
    }

    pub fn contains_point(&self, x: &QuadraticNumber<T>) -> bool {
        x.compare_exact(&self.left).unwrap() != Ordering::Less
            && x.compare_exact(&self.right).unwrap() != Ordering::Greater
    }
}

pub fn build_cylinder<T: ExactInt>(word: &DigitWord) -> Result<Cylinder<T>> {
    if word.is_empty() {
        return Err(ThetaError::EmptyWord);
    }
    check_admissible(word.digits(), word.field().m())?;
    let field = word.field();
    let conv = Convergents::<T>::of(word.digits(), field);
    let theta: QuadraticNumber<T> = field.theta();
    let a = &conv.p / &conv.q;
    let b = &(&conv.p + &(&theta * &conv.p_prev)) / &(&conv.q + &(&theta * &conv.q_prev));
    let (left, right) = if a.compare_exact(&b)? == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let length = &right - &left;
    Ok(Cylinder {
        word: word.clone(),
        convergents: conv,
        left,
        right,
        length,
    })
}

/// Exact value `P_n/Q_n` of the finite expansion `[ℓ₁,…,ℓₙ]_θ`.
pub fn value_of<T: ExactInt>(word: &DigitWord) -> Result<QuadraticNumber<T>> {
    if word.is_empty() {
        return Err(ThetaError::EmptyWord);
    }
    let conv = Convergents::<T>::of(word.digits(), word.field());
    conv.p.try_div(&conv.q)
}

/// One inequality `lower ≤ value ≤ upper` with its exact witnesses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck<T: ExactInt> {
    pub lower: QuadraticNumber<T>,
    pub value: QuadraticNumber<T>,
    pub upper: Option<QuadraticNumber<T>>,
    pub ok: bool,
}

impl<T: ExactInt> BoundCheck<T> {
    fn between(
        lower: QuadraticNumber<T>,
        value: QuadraticNumber<T>,
        upper: QuadraticNumber<T>,
    ) -> Self {
        let ok = lower <= value && value <= upper;
        BoundCheck {
            lower,
            value,
            upper: Some(upper),
            ok,
        }
    }

    fn at_least(lower: QuadraticNumber<T>, value: QuadraticNumber<T>) -> Self {
        let ok = lower <= value;
        BoundCheck {
            lower,
            value,
            upper: None,
            ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityCheck<T: ExactInt> {
    pub position: usize,
    #[serde(flatten)]
    pub check: BoundCheck<T>,
}

/// Exact verification of exponential growth, the length estimate and
/// multiplicative sensitivity for one word.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport<T: ExactInt> {
    pub digits: Vec<u64>,
    /// `Q_n² ≥ (m+1)^(n−1)`, compared squared so both sides are rational.
    pub growth: BoundCheck<T>,
    /// `θ/((1+θ²)Q_n²) ≤ |I_n| ≤ θ/Q_n²`.
    pub length: BoundCheck<T>,
    /// `(ℓ_k+m)θ/2 ≤ Q_n / Q_{n−1}(omit k) ≤ (ℓ_k+m)θ` for every k.
    pub sensitivity: Vec<SensitivityCheck<T>>,
    /// `Q_{n−1} ≤ θ Q_n`.
    pub prev_denominator: BoundCheck<T>,
}

impl<T: ExactInt> MetricReport<T> {
    pub fn q_growth_ok(&self) -> bool {
        self.growth.ok
    }

    pub fn length_bounds_ok(&self) -> bool {
        self.length.ok
    }

    pub fn sensitivity_ok(&self) -> Vec<bool> {
        self.sensitivity.iter().map(|s| s.check.ok).collect()
    }

    pub fn all_ok(&self) -> bool {
        self.growth.ok
            && self.length.ok
            && self.prev_denominator.ok
            && self.sensitivity.iter().all(|s| s.check.ok)
    }
}

pub fn verify_metric<T: ExactInt>(word: &DigitWord) -> Result<MetricReport<T>> {
    let cyl = build_cylinder::<T>(word)?;
    let field = word.field();
    let m = T::from_u64(field.m()).unwrap();
    let n = word.len();
    let theta: QuadraticNumber<T> = field.theta();
    let q = cyl.q().clone();
    let q2 = &q * &q;

    let growth_rhs = QuadraticNumber::from_int(T::one() + m.clone(), field).powi((n - 1) as u32);
    let growth = BoundCheck::at_least(growth_rhs, q2.clone());

    let upper = &theta / &q2;
    let one = QuadraticNumber::one(field);
    let lower = &upper / &(&one + &field.theta_squared());
    let length = BoundCheck::between(lower, cyl.length.clone(), upper);

    let mut sensitivity = Vec::with_capacity(n);
    for k in 1..=n {
        let omitted = word.omit(k);
        // recomputed from scratch on the deleted word
        let q_omit = Convergents::<T>::of(omitted.digits(), field).q;
        let ratio = &q / &q_omit;
        let coeff = theta.mul_int(&(T::from_u64(word.at(k)).unwrap() + m.clone()));
        let half = &coeff / &QuadraticNumber::from_int(T::from_u64(2).unwrap(), field);
        sensitivity.push(SensitivityCheck {
            position: k,
            check: BoundCheck::between(half, ratio, coeff),
        });
    }

    let prev_denominator = BoundCheck::at_least(cyl.convergents.q_prev.clone(), &theta * &q);

    Ok(MetricReport {
        digits: word.digits().to_vec(),
        growth,
        length,
        sensitivity,
        prev_denominator,
    })
}

/// Data-parallel [`verify_metric`] over a batch; output order matches input.
pub fn verify_metric_batch<T: ExactInt>(words: &[DigitWord]) -> Result<Vec<MetricReport<T>>> {
    words.par_iter().map(verify_metric::<T>).collect()
}

/// Gap between the sub-cylinders for digits `d` and `d+1` below `word`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport<T: ExactInt> {
    pub digit: u64,
    pub gap: QuadraticNumber<T>,
    /// `1/(θ Q² (d+1)(d+2))`.
    pub bound: QuadraticNumber<T>,
    pub ok: bool,
}

/// `Δ_d = θ / ((Q d θ + Q_{n−1})(Q (d+1) θ + Q_{n−1}))`; the empty word is
/// allowed and uses `Q₀ = 1, Q₋₁ = 0`.
pub fn adjacent_gap<T: ExactInt>(word: &DigitWord, d: u64) -> Result<GapReport<T>> {
    let field = word.field();
    if d < field.m() {
        return Err(ThetaError::Inadmissible {
            position: word.len() + 1,
            digit: d,
            min: field.m(),
        });
    }
    check_admissible(word.digits(), field.m())?;
    let conv = Convergents::<T>::of(word.digits(), field);
    let theta: QuadraticNumber<T> = field.theta();
    let dt = T::from_u64(d).unwrap();
    let d1 = dt.clone() + T::one();
    let d2 = d1.clone() + T::one();
    let left = &(&conv.q * &theta).mul_int(&dt) + &conv.q_prev;
    let right = &(&conv.q * &theta).mul_int(&d1) + &conv.q_prev;
    let gap = &theta / &(&left * &right);
    let bound = (&(&theta * &conv.q) * &conv.q)
        .mul_int(&(d1 * d2))
        .recip()?;
    let ok = gap.signum() == Ordering::Greater && gap >= bound;
    Ok(GapReport {
        digit: d,
        gap,
        bound,
        ok,
    })
}

/// Big-integer cylinder, the default carrier.
pub type BigCylinder = Cylinder<BigInt>;
