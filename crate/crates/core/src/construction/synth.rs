use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::sparse::lambda;
use super::{find_n0, positive, ser_rational, to_u64, ConditionReport, SparseSpec};
use crate::error::{Result, ThetaError};
use crate::expansion::DigitWord;
use crate::interval::Interval;
use crate::qfield::FieldSpec;

/// How the non-inserted digits of a constructed word are chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasePolicy {
    Constant(u64),
    Periodic(Vec<u64>),
    SeededRandom { seed: u64, lo: u64, hi: u64 },
}

impl BasePolicy {
    /// Parses `const:C`, `periodic:a,b,c` or `random:SEED:LO:HI`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || ThetaError::Parse(format!("unknown base policy {s:?}"));
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "const" | "constant" => Ok(BasePolicy::Constant(num(rest)?)),
            "periodic" => {
                let digits = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
                if digits.is_empty() {
                    return Err(bad());
                }
                Ok(BasePolicy::Periodic(digits))
            }
            "random" => {
                let parts: Vec<&str> = rest.split(':').collect();
                if parts.len() != 3 {
                    return Err(bad());
                }
                Ok(BasePolicy::SeededRandom {
                    seed: num(parts[0])?,
                    lo: num(parts[1])?,
                    hi: num(parts[2])?,
                })
            }
            _ => Err(bad()),
        }
    }

    pub fn digits(&self, len: usize) -> Vec<u64> {
        match self {
            BasePolicy::Constant(c) => vec![*c; len],
            BasePolicy::Periodic(p) => p.iter().copied().cycle().take(len).collect(),
            BasePolicy::SeededRandom { seed, lo, hi } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..len).map(|_| rng.gen_range(*lo..=*hi)).collect()
            }
        }
    }

    fn range(&self) -> (u64, u64) {
        match self {
            BasePolicy::Constant(c) => (*c, *c),
            BasePolicy::Periodic(p) => (*p.iter().min().unwrap(), *p.iter().max().unwrap()),
            BasePolicy::SeededRandom { lo, hi, .. } => (*lo, *hi),
        }
    }
}

impl fmt::Display for BasePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasePolicy::Constant(c) => write!(f, "const:{c}"),
            BasePolicy::Periodic(p) => {
                let s: Vec<String> = p.iter().map(u64::to_string).collect();
                write!(f, "periodic:{}", s.join(","))
            }
            BasePolicy::SeededRandom { seed, lo, hi } => write!(f, "random:{seed}:{lo}:{hi}"),
        }
    }
}

impl Serialize for BasePolicy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionParams {
    pub field: FieldSpec,
    pub big_m: u64,
    #[serde(serialize_with = "ser_rational")]
    pub alpha: BigRational,
    pub sparse: SparseSpec,
    pub n0: u64,
    /// `false` when `n0` was supplied by the caller rather than found by the
    /// condition scan.
    pub n0_verified: bool,
    pub base: BasePolicy,
}

impl ConstructionParams {
    /// Parameters with `N₀ = kMin`, unverified until [`Self::verified`] or
    /// [`Self::with_n0`] is applied.
    pub fn new(
        m: u64,
        big_m: u64,
        alpha: BigRational,
        sparse: SparseSpec,
        base: BasePolicy,
    ) -> Result<Self> {
        let field = FieldSpec::new(m)?;
        if big_m <= 2 * m + 1 {
            return Err(ThetaError::InvalidParameter(format!(
                "M = {big_m} must exceed 2m + 1 = {}",
                2 * m + 1
            )));
        }
        if !positive(&alpha) {
            return Err(ThetaError::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        let (lo, hi) = base.range();
        if lo < m || hi > big_m || lo > hi {
            return Err(ThetaError::InvalidParameter(format!(
                "base digits {base} must lie in [{m}, {big_m}]"
            )));
        }
        let n0 = sparse.k_min();
        Ok(ConstructionParams {
            field,
            big_m,
            alpha,
            sparse,
            n0,
            n0_verified: false,
            base,
        })
    }

    pub fn m(&self) -> u64 {
        self.field.m()
    }

    /// Forces the starting index; the result is flagged unverified.
    pub fn with_n0(mut self, n0: u64) -> Result<Self> {
        if n0 < self.sparse.k_min() {
            return Err(ThetaError::InvalidParameter(format!(
                "N0 = {n0} is below kMin = {}",
                self.sparse.k_min()
            )));
        }
        self.n0 = n0;
        self.n0_verified = false;
        Ok(self)
    }

    /// Runs the condition scan and adopts its `N₀`.
    pub fn verified(mut self, scan_limit: u64) -> Result<(Self, ConditionReport)> {
        let report = find_n0(self.m(), self.big_m, &self.alpha, &self.sparse, scan_limit)?;
        match report.n0 {
            Some(n0) => {
                self.n0 = n0;
                self.n0_verified = true;
                Ok((self, report))
            }
            None => Err(ThetaError::Construction(format!(
                "no N0 satisfies conditions (A)-(C) for k <= {scan_limit}"
            ))),
        }
    }
}

/// One inserted digit with the prefix sum `A_k` that determined it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Insertion {
    /// Smallest sparse index with `n_k` equal to this position.
    pub k: u64,
    pub position: usize,
    pub digit: u64,
    pub prefix_sum: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Synthesis {
    pub word: DigitWord,
    pub insertions: Vec<Insertion>,
    pub n0: u64,
    pub n0_verified: bool,
}

/// Distinct positions `n_k ≤ depth` for `k ≥ N₀`, each with its first `k`.
pub fn insertion_positions(params: &ConstructionParams, depth: usize) -> Result<Vec<(u64, usize)>> {
    let mut out: Vec<(u64, usize)> = Vec::new();
    let limit = BigInt::from(depth);
    let mut k = params.n0;
    loop {
        let n = params.sparse.index(k)?;
        if n > limit {
            break;
        }
        let pos = to_u64(&n, "insertion position")? as usize;
        if out.last().is_none_or(|&(_, p)| p != pos) {
            out.push((k, pos));
        }
        k += 1;
    }
    Ok(out)
}

/// `⌊α · prefix_sum / (log n log log n)⌋`.
pub fn inserted_digit(alpha: &BigRational, prefix_sum: u128, n: usize) -> Result<u64> {
    let num = BigInt::from(prefix_sum) * alpha.numer();
    let mut prec = 64 + num.bits() as u32;
    let cap = prec + 1024;
    loop {
        let lam = lambda(n as u64, prec)?.mul_int(alpha.denom());
        let v = Interval::from_int(&num, prec).div(&lam)?;
        if let Some(f) = v.floor() {
            return to_u64(&f, "inserted digit");
        }
        if prec >= cap {
            return Err(ThetaError::FloorAmbiguity(format!(
                "inserted digit at position {n} with prefix sum {prefix_sum}"
            )));
        }
        prec *= 2;
    }
}

/// The insertion map: plants the sparse digits into `base`, producing a word
/// of length `depth`.
pub fn insert_apply(base: &[u64], params: &ConstructionParams, depth: usize) -> Result<Synthesis> {
    let m = params.m();
    if let Some(i) = base.iter().position(|&d| d < m || d > params.big_m) {
        return Err(ThetaError::InvalidParameter(format!(
            "base digit {} at position {} is outside [{m}, {}]",
            base[i],
            i + 1,
            params.big_m
        )));
    }
    let positions = insertion_positions(params, depth)?;
    let needed = depth - positions.len();
    if base.len() < needed {
        return Err(ThetaError::Construction(format!(
            "base word has {} digits but depth {depth} needs {needed}",
            base.len()
        )));
    }
    let mut digits = Vec::with_capacity(depth);
    let mut insertions = Vec::with_capacity(positions.len());
    let mut sum: u128 = 0;
    let mut next = positions.iter().peekable();
    let mut base_iter = base.iter();
    for pos in 1..=depth {
        let d = match next.peek() {
            Some(&&(k, p)) if p == pos => {
                next.next();
                let d = inserted_digit(&params.alpha, sum, pos)?;
                if d < m {
                    return Err(ThetaError::Construction(format!(
                        "inserted digit {d} at position {pos} is below m = {m}"
                    )));
                }
                insertions.push(Insertion {
                    k,
                    position: pos,
                    digit: d,
                    prefix_sum: sum,
                });
                d
            }
            _ => *base_iter.next().expect("length checked"),
        };
        sum = sum
            .checked_add(d as u128)
            .ok_or_else(|| ThetaError::Overflow(format!("digit sum at position {pos}")))?;
        digits.push(d);
    }
    let mask: BTreeSet<usize> = insertions.iter().map(|i| i.position).collect();
    Ok(Synthesis {
        word: DigitWord::with_insertions(digits, params.field, mask)?,
        insertions,
        n0: params.n0,
        n0_verified: params.n0_verified,
    })
}

pub fn synthesize(params: &ConstructionParams, depth: usize) -> Result<Synthesis> {
    let first = params.sparse.index(params.n0)?;
    if BigInt::from(depth) < first {
        return Err(ThetaError::InvalidParameter(format!(
            "depth {depth} is below the first insertion position n_N0 = {first}"
        )));
    }
    let positions = insertion_positions(params, depth)?;
    let base = params.base.digits(depth - positions.len());
    insert_apply(&base, params, depth)
}

/// The seed map: removes the inserted positions.
pub fn seed_delete(word: &DigitWord, params: &ConstructionParams) -> Result<DigitWord> {
    let digits: Vec<u64> = word
        .digits()
        .iter()
        .enumerate()
        .filter(|(i, _)| !word.is_inserted(i + 1))
        .map(|(_, &d)| d)
        .collect();
    if let Some(&d) = digits.iter().find(|&&d| d > params.big_m) {
        return Err(ThetaError::Construction(format!(
            "remaining digit {d} exceeds M = {}",
            params.big_m
        )));
    }
    DigitWord::new(digits, word.field())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotonicityEntry {
    pub position: usize,
    pub digit: u64,
    /// `ℓ_{n_k} ≥ M`.
    pub at_least_big_m: bool,
    /// `ℓ_{n_k} ≥` the previous inserted digit (true for the first).
    pub nondecreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub entries: Vec<MonotonicityEntry>,
    pub ok: bool,
}

pub fn check_monotonicity(word: &DigitWord, params: &ConstructionParams) -> MonotonicityReport {
    let mut prev: Option<u64> = None;
    let entries: Vec<MonotonicityEntry> = word
        .insertions()
        .iter()
        .map(|&position| {
            let digit = word.at(position);
            let e = MonotonicityEntry {
                position,
                digit,
                at_least_big_m: digit >= params.big_m,
                nondecreasing: prev.is_none_or(|p| digit >= p),
            };
            prev = Some(digit);
            e
        })
        .collect();
    let ok = entries.iter().all(|e| e.at_least_big_m && e.nondecreasing);
    MonotonicityReport { entries, ok }
}
