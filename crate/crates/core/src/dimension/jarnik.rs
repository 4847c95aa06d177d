use num_traits::{Float, FromPrimitive};
use serde::Serialize;

use crate::error::{Result, ThetaError};

/// Lower and upper bounds on the dimension of the set of points whose
/// digits all lie in `[m, M]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JarnikBounds<F> {
    pub m: u64,
    pub big_m: u64,
    pub lower: F,
    pub upper: F,
}

/// `1 − 2(m+1)/((M+1) log(m+1))` and `1 − m/((M+2) log(2M(M+1)/m))`.
pub fn jarnik_bounds<F: Float + FromPrimitive>(m: u64, big_m: u64) -> Result<JarnikBounds<F>> {
    if m < 2 || big_m <= 2 * m + 1 {
        return Err(ThetaError::InvalidParameter(format!(
            "need m >= 2 and M > 2m + 1, got m = {m}, M = {big_m}"
        )));
    }
    let f = |x: u64| F::from_u64(x).expect("representable");
    let (mf, bf) = (f(m), f(big_m));
    let one = F::one();
    let two = one + one;
    let lower = one - two * (mf + one) / ((bf + one) * (mf + one).ln());
    let upper = one - mf / ((bf + two) * (two * bf * (bf + one) / mf).ln());
    Ok(JarnikBounds {
        m,
        big_m,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plug_in_values() {
        let b = jarnik_bounds::<f64>(2, 10).unwrap();
        assert!((b.lower - 0.503_505_876_385_361).abs() < 1e-12);
        assert!((b.upper - 0.964_542_631_029_888).abs() < 1e-12);
        let s = jarnik_bounds::<f32>(2, 10).unwrap();
        assert!((s.lower - 0.503_505_9).abs() < 1e-6);
    }

    #[test]
    fn approaches_one() {
        let b = jarnik_bounds::<f64>(2, 10_000).unwrap();
        assert!(b.lower > 0.999 && b.upper > 0.999);
        assert!((b.lower - (1.0 - 6.0 / (10_001.0 * 3f64.ln()))).abs() < 1e-15);
    }

    #[test]
    fn monotone_in_big_m() {
        let mut prev = jarnik_bounds::<f64>(2, 6).unwrap();
        for big_m in 7..2000 {
            let b = jarnik_bounds::<f64>(2, big_m).unwrap();
            assert!(b.lower > prev.lower && b.upper > prev.upper);
            assert!(0.0 < b.lower && b.lower < b.upper && b.upper < 1.0);
            prev = b;
        }
    }

    #[test]
    fn rejects_small_big_m() {
        assert!(jarnik_bounds::<f64>(2, 5).is_err());
        assert!(jarnik_bounds::<f64>(2, 6).is_ok());
    }
}
