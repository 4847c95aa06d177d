pub mod construction;
pub mod dimension;
pub mod error;
pub mod expansion;
pub mod interval;
pub mod measure;
pub mod numeric;
pub mod qfield;

pub use error::{Result, ThetaError};
pub use qfield::{ExactInt, FieldSpec, QuadraticNumber};

/// Field elements over arbitrary-precision integers.
pub type Quad = QuadraticNumber<num_bigint::BigInt>;
/// Field elements over machine integers, for enumeration depths where
/// convergents fit.
pub type Quad64 = QuadraticNumber<i128>;
pub type GaussMeasureF64 = measure::GaussMeasure<f64>;
pub type JarnikBoundsF64 = dimension::JarnikBounds<f64>;
pub type DimensionBracketF64 = dimension::DimensionBracket<f64>;
