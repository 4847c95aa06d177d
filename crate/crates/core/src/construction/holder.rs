use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use super::{seed_delete, ConstructionParams, Synthesis};
use crate::error::Result;
use crate::expansion::Convergents;
use crate::Quad;

/// `ℓ_{n_j} ≤ 2^{2j+5}` at one insertion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitGrowthCheck {
    pub j: u64,
    pub position: usize,
    pub digit: u64,
    pub log2_bound: u64,
    pub ok: bool,
}

/// `Q_n(y) ≤ Q_{n−t}(x) θ^t 2^{t²+Ct}` with `x` the deleted word, and the
/// sharper chained form `Q_n(y) ≤ Q_{n−t}(x) Π (ℓ_{n_j} + m)θ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductCheck {
    pub n: usize,
    pub t: usize,
    pub c: u64,
    pub q_full: Quad,
    pub q_deleted: Quad,
    pub bound: Quad,
    pub ok: bool,
    pub chain_bound: Quad,
    pub chain_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderWitnessReport {
    pub growth: Vec<DigitGrowthCheck>,
    /// Absent when the word has no insertions.
    pub product: Option<ProductCheck>,
    pub ok: bool,
}

pub fn holder_witness_bounds(
    synth: &Synthesis,
    params: &ConstructionParams,
) -> Result<HolderWitnessReport> {
    let growth: Vec<DigitGrowthCheck> = synth
        .insertions
        .iter()
        .map(|ins| {
            let log2_bound = 2 * ins.k + 5;
            let ok = log2_bound >= 64 || ins.digit <= 1u64 << log2_bound;
            DigitGrowthCheck {
                j: ins.k,
                position: ins.position,
                digit: ins.digit,
                log2_bound,
                ok,
            }
        })
        .collect();
    let t = synth.insertions.len();
    let product = if t == 0 {
        None
    } else {
        let field = params.field;
        let word = &synth.word;
        let q_full = Convergents::<BigInt>::of(word.digits(), field).q;
        let deleted = seed_delete(word, params)?;
        let q_deleted = Convergents::<BigInt>::of(deleted.digits(), field).q;
        let theta = field.theta::<BigInt>();
        let c = 2 * params.n0 + 5;
        let exp2 = (t * t) as u64 + c * t as u64;
        let bound = q_deleted
            .try_mul(&theta.powi(t as u32))?
            .mul_int(&(BigInt::one() << exp2 as usize));
        let mut chain_bound = q_deleted.clone();
        for ins in &synth.insertions {
            let factor = theta.mul_int(&BigInt::from(ins.digit + field.m()));
            chain_bound = chain_bound.try_mul(&factor)?;
        }
        let ok = q_full.compare_exact(&bound)? != Ordering::Greater;
        let chain_ok = q_full.compare_exact(&chain_bound)? != Ordering::Greater;
        Some(ProductCheck {
            n: word.len(),
            t,
            c,
            q_full,
            q_deleted,
            bound,
            ok,
            chain_bound,
            chain_ok,
        })
    };
    let ok = growth.iter().all(|g| g.ok) && product.as_ref().is_none_or(|p| p.ok && p.chain_ok);
    Ok(HolderWitnessReport {
        growth,
        product,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{insert_apply, synthesize, BasePolicy, SparseSpec};
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
    fn golden_witnesses() {
        let p = golden();
        let s = synthesize(&p, 9).unwrap();
        let rep = holder_witness_bounds(&s, &p).unwrap();
        assert!(rep.ok);
        assert_eq!(rep.growth[0].log2_bound, 9);
        assert_eq!(rep.growth[1].log2_bound, 11);
        let prod = rep.product.unwrap();
        assert_eq!(prod.t, 2);
        assert_eq!(prod.c, 9);
        assert!(prod.ok && prod.chain_ok);
    }

    #[test]
    fn no_insertions_is_vacuous() {
        let p = golden();
        let s = insert_apply(&[2, 2, 2], &p, 3).unwrap();
        let rep = holder_witness_bounds(&s, &p).unwrap();
        assert!(rep.ok && rep.growth.is_empty() && rep.product.is_none());
    }

    #[test]
    fn deeper_random_words() {
        let p = golden();
        for seed in 0..5 {
            let base = BasePolicy::SeededRandom {
                seed,
                lo: 2,
                hi: 10,
            }
            .digits(200);
            let s = insert_apply(&base, &p, 120).unwrap();
            let rep = holder_witness_bounds(&s, &p).unwrap();
            assert!(rep.product.as_ref().unwrap().chain_ok);
            assert!(rep.ok, "seed {seed}");
        }
    }
}
