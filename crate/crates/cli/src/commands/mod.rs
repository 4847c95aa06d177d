use serde_json::Value;
use theta_core::{FieldSpec, Quad, Result, ThetaError};

mod construct;
mod dimension;
mod expand;
mod measure;
mod metric;

pub use construct::*;
pub use dimension::*;
pub use expand::*;
pub use measure::*;
pub use metric::*;

pub struct Ctx {
    pub precision: usize,
}

impl Ctx {
    /// Field element as `"p,q,r"` for the value `(p + q√m)/r`.
    pub fn triple(&self, x: &Quad) -> Value {
        let (p, q, r) = x.triple();
        Value::String(format!("{p},{q},{r}"))
    }

    pub fn decimal(&self, x: &Quad) -> Value {
        Value::String(x.to_decimal(self.precision))
    }
}

pub(crate) fn field(m: u64) -> Result<FieldSpec> {
    FieldSpec::new(m)
}

pub(crate) fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| ThetaError::Parse(format!("bad {what} '{t}'")))
        })
        .collect()
}

/// `auto` gives about 20 points per decade from 3 to `depth` plus `extra`;
/// otherwise a comma-separated list.
pub(crate) fn checkpoints(spec: &str, depth: usize, extra: &[usize]) -> Result<Vec<usize>> {
    let mut pts = if spec == "auto" {
        let mut v = Vec::new();
        let mut x = 3.0f64;
        while (x as usize) <= depth {
            v.push(x as usize);
            x *= 1.122;
        }
        v.push(depth);
        v.extend(extra.iter().copied().filter(|&n| n >= 3 && n <= depth));
        v
    } else {
        parse_list(spec, "checkpoint")?
    };
    pts.sort_unstable();
    pts.dedup();
    Ok(pts)
}

pub(crate) fn opt_f64(x: Option<f64>) -> Value {
    x.filter(|v| v.is_finite()).map_or(Value::Null, Value::from)
}

/// Exact integer, as a JSON number when it fits in u64.
pub(crate) fn big(x: u128) -> Value {
    u64::try_from(x).map_or_else(|_| Value::String(x.to_string()), Value::from)
}
