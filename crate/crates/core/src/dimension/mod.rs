//! Dimension estimates for bounded-digit sets: the Jarník-type plug-in
//! bounds, a finite-depth Moran bracket from exhaustive cylinder enumeration,
//! and empirical Hölder exponents of the digit-deletion map.

mod holder;
mod jarnik;
mod moran;

pub use holder::{holder_exponent_estimate, pair_exponent, HolderEstimate, PairMode};
pub use jarnik::{jarnik_bounds, JarnikBounds};
pub use moran::{
    cylinder_count, moran_bracket, moran_sum, DimensionBracket, LengthMode, MoranRoot,
    DEFAULT_BUDGET,
};
