use clap::Args;
use serde::Serialize;
use serde_json::json;
use theta_core::dimension::{jarnik_bounds, moran_bracket, DEFAULT_BUDGET};
use theta_core::{DimensionBracketF64, JarnikBoundsF64, Result, ThetaError};

use super::{parse_list, Ctx};
use crate::output::{Report, Table};

/// Slack allowed between a finite-depth bracket and the Jarník interval.
const JARNIK_SLACK: f64 = 0.05;

#[derive(Args, Debug, Serialize)]
pub struct DimensionArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long = "M", value_name = "M")]
    #[serde(rename = "M")]
    pub big_m: u64,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// First depth reported; every depth up to --depth is solved.
    #[arg(long, default_value_t = 1)]
    pub from_depth: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Maximum number of cylinders enumerated at one depth.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
}

pub fn dimension(a: &DimensionArgs, _ctx: &Ctx) -> Result<Report> {
    if a.from_depth == 0 || a.from_depth > a.depth {
        return Err(ThetaError::InvalidParameter(
            "need 1 <= from-depth <= depth".into(),
        ));
    }
    let jb: JarnikBoundsF64 = jarnik_bounds(a.m, a.big_m)?;
    let brackets = (a.from_depth..=a.depth)
        .map(|d| moran_bracket(a.m, a.big_m, d, a.tol, a.budget))
        .collect::<Result<Vec<DimensionBracketF64>>>()?;
    let mut r = Report::default();
    r.result("jarnik", jb);
    r.table = Table::new(&[
        "depth",
        "cylinders",
        "s_low",
        "s_high",
        "width",
        "exact_lo",
        "exact_hi",
        "clamped",
    ]);
    for b in &brackets {
        r.table.push(vec![
            json!(b.depth),
            json!(b.cylinder_count),
            json!(b.s_low),
            json!(b.s_high),
            json!(b.width()),
            json!(b.exact.lo),
            json!(b.exact.hi),
            json!(b.lower.clamped || b.upper.clamped),
        ]);
    }
    let last = brackets.last().expect("at least one depth");
    r.check(
        "bisection_sign_change",
        brackets
            .iter()
            .all(|b| b.lower.sign_change() && b.upper.sign_change() && b.exact.sign_change()),
    );
    r.check(
        "exact_root_inside_bracket",
        brackets.iter().all(|b| b.exact_inside()),
    );
    r.check(
        "brackets_overlap",
        brackets.windows(2).all(|w| w[0].overlaps(&w[1])),
    );
    r.check(
        "widths_decrease",
        brackets.windows(2).all(|w| w[1].width() < w[0].width()),
    );
    r.check(
        "meets_jarnik_interval",
        last.s_low <= jb.upper + JARNIK_SLACK && last.s_high >= jb.lower - JARNIK_SLACK,
    );
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct JarnikArgs {
    #[arg(long)]
    pub m: u64,
    /// One value or a comma-separated increasing list.
    #[arg(long = "M", value_name = "M")]
    #[serde(rename = "M")]
    pub big_m: String,
}

pub fn jarnik(a: &JarnikArgs, _ctx: &Ctx) -> Result<Report> {
    let ms: Vec<u64> = parse_list(&a.big_m, "M")?;
    let bounds = ms
        .iter()
        .map(|&mm| jarnik_bounds::<f64>(a.m, mm))
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report {
        table: Table::new(&["M", "lower", "upper"]),
        ..Default::default()
    };
    for b in &bounds {
        r.table
            .push(vec![json!(b.big_m), json!(b.lower), json!(b.upper)]);
    }
    r.check(
        "bounds_in_unit_interval",
        bounds
            .iter()
            .all(|b| 0.0 < b.lower && b.lower <= b.upper && b.upper < 1.0),
    );
    r.check(
        "monotone_in_M",
        bounds.windows(2).all(|w| {
            w[0].big_m >= w[1].big_m || (w[0].lower < w[1].lower && w[0].upper < w[1].upper)
        }),
    );
    Ok(r)
}
