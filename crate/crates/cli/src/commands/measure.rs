use clap::Args;
use serde::Serialize;
use serde_json::json;
use theta_core::measure::digit_frequencies;
use theta_core::numeric::CompensatedSum;
use theta_core::{GaussMeasureF64, Result, ThetaError};

use super::{field, Ctx};
use crate::expr::parse_real;
use crate::output::{Report, Table};

const NORMALIZATION_TOL: f64 = 1e-14;
const TELESCOPE_TOL: f64 = 1e-12;

#[derive(Args, Debug, Serialize)]
pub struct MeasureArgs {
    #[arg(long)]
    pub m: u64,
    /// Left end of the invariance interval (expression).
    #[arg(long, default_value = "0")]
    pub a: String,
    /// Right end of the invariance interval (expression).
    #[arg(long, default_value = "theta")]
    pub b: String,
    #[arg(long, default_value_t = 100_000)]
    pub cutoff: u64,
    /// Largest invariance defect accepted.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Digits m..m+span-1 in the digit-law table.
    #[arg(long, default_value_t = 10)]
    pub span: u64,
    /// Partial sums of the digit law run to this digit before the tail.
    #[arg(long, default_value_t = 10_000)]
    pub telescope_to: u64,
}

pub fn measure(a: &MeasureArgs, _ctx: &Ctx) -> Result<Report> {
    let f = field(a.m)?;
    let g = GaussMeasureF64::new(f);
    let (x, y) = (parse_real(&a.a, f)?, parse_real(&a.b, f)?);
    let mass = g.measure_interval(0.0, g.theta())?;
    let inv = g.invariance_defect(x, y, a.cutoff)?;
    if a.telescope_to < a.m {
        return Err(ThetaError::InvalidParameter(
            "telescope-to must be >= m".into(),
        ));
    }
    let mut acc = CompensatedSum::new();
    for j in a.m..=a.telescope_to {
        acc.add(g.digit_law(j)?);
    }
    let telescoped = acc.value() + g.digit_tail(a.telescope_to);
    let mut r = Report::default();
    r.result("theta", g.theta());
    r.result("normalizer", g.normalizer);
    r.result("total_mass", mass);
    r.result("interval", [x, y]);
    r.result("interval_measure", g.measure_interval(x, y)?);
    r.result("invariance", inv);
    r.result("digit_law_total", telescoped);
    r.table = Table::new(&["digit", "probability", "tail_beyond"]);
    for j in a.m..a.m + a.span {
        r.table.push(vec![
            json!(j),
            json!(g.digit_law(j)?),
            json!(g.digit_tail(j)),
        ]);
    }
    r.check("normalization", (mass - 1.0).abs() <= NORMALIZATION_TOL);
    r.check(
        "digit_law_telescopes",
        (telescoped - 1.0).abs() <= TELESCOPE_TOL,
    );
    r.check("invariance_defect", inv.defect < a.tol);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub count: usize,
    /// First digits m..m+span-1 compared with the digit law.
    #[arg(long, default_value_t = 6)]
    pub span: u64,
    /// Emit the samples themselves instead of the frequency table.
    #[arg(long)]
    pub emit: bool,
}

pub fn sample(a: &SampleArgs, _ctx: &Ctx) -> Result<Report> {
    if a.count == 0 {
        return Err(ThetaError::InvalidParameter("count must be >= 1".into()));
    }
    let g = GaussMeasureF64::new(field(a.m)?);
    let xs = g.sample(a.seed, a.count);
    let freqs = digit_frequencies(&g, &xs, a.m..=a.m + a.span - 1)?;
    let mut r = Report::default();
    r.result("count", a.count);
    r.result("mean", xs.iter().sum::<f64>() / a.count as f64);
    if a.emit {
        r.result("frequencies", &freqs);
        r.table = Table::new(&["index", "x", "first_digit"]);
        for (i, &x) in xs.iter().enumerate() {
            r.table
                .push(vec![json!(i), json!(x), json!(g.first_digit(x))]);
        }
    } else {
        r.table = Table::new(&["digit", "count", "frequency", "expected", "sigma", "z"]);
        for f in &freqs {
            r.table.push(vec![
                json!(f.digit),
                json!(f.count),
                json!(f.frequency),
                json!(f.expected),
                json!(f.sigma),
                json!(f.z),
            ]);
        }
    }
    r.check(
        "frequencies_within_3_sigma",
        freqs.iter().all(|f| f.z.abs() <= 3.0),
    );
    Ok(r)
}
