use clap::Args;
use serde::Serialize;
use serde_json::json;
use theta_core::expansion::{digit_stream, Convergents};
use theta_core::measure::{orbit_stats, orbit_stats_real, GaussMeasure};
use theta_core::Result;

use super::{big, field, opt_f64, Ctx};
use crate::expr::parse_element;
use crate::output::{Report, Table};

#[derive(Args, Debug, Serialize)]
pub struct ExpandArgs {
    #[arg(long)]
    pub m: u64,
    /// Expression such as "sqrt(2)-1" or "(1+sqrt(8))/7".
    #[arg(long)]
    pub x: String,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
}

pub fn expand(a: &ExpandArgs, ctx: &Ctx) -> Result<Report> {
    let f = field(a.m)?;
    let x = parse_element(&a.x, f)?;
    let e = digit_stream(&x, a.n)?;
    let mut r = Report::default();
    r.result("x", ctx.triple(&x));
    r.result("x_decimal", ctx.decimal(&x));
    r.result("digits", e.word.digits());
    r.result("terminated", e.terminated);
    r.table = Table::new(&["n", "digit", "q_n", "q_n_decimal"]);
    let mut conv = Convergents::<num_bigint::BigInt>::seed(f);
    for (i, &d) in e.word.digits().iter().enumerate() {
        conv.push(d);
        r.table.push(vec![
            json!(i + 1),
            json!(d),
            ctx.triple(&conv.q),
            ctx.decimal(&conv.q),
        ]);
    }
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct OrbitArgs {
    #[arg(long)]
    pub m: u64,
    /// Field element to iterate exactly; without it a point is drawn from
    /// the Gauss measure with --seed.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Emit every k-th index (the last index is always emitted).
    #[arg(long, default_value_t = 1)]
    pub every: usize,
}

pub fn orbit(a: &OrbitArgs, ctx: &Ctx) -> Result<Report> {
    let f = field(a.m)?;
    let mut r = Report::default();
    let stats = match &a.x {
        Some(s) => {
            let x = parse_element(s, f)?;
            r.result("x", ctx.triple(&x));
            r.result("x_decimal", ctx.decimal(&x));
            orbit_stats(&x, a.n)?
        }
        None => {
            let x = GaussMeasure::<f64>::new(f).sample(a.seed, 1)[0];
            r.result("x_decimal", format!("{x:e}"));
            orbit_stats_real(f, x, a.n)?
        }
    };
    r.result("terminated", stats.terminated);
    r.result("precision_bits", stats.precision);
    r.table = Table::new(&["n", "digit", "sum", "max_digit", "ratio"]);
    let every = a.every.max(1);
    let last = stats.series.len();
    for (p, d) in stats.series.iter().zip(&stats.digits) {
        if p.n % every == 0 || p.n == last {
            r.table.push(vec![
                json!(p.n),
                json!(d),
                big(p.sum),
                json!(p.max_digit),
                opt_f64(p.ratio),
            ]);
        }
    }
    Ok(r)
}
