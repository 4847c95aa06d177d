use clap::Args;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use theta_core::expansion::{verify_metric_batch, DigitWord};
use theta_core::Result;

use super::{field, parse_list, Ctx};
use crate::output::{Report, Table};

#[derive(Args, Debug, Serialize)]
pub struct VerifyMetricArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 12)]
    pub max_depth: usize,
    /// Largest random digit (default m + 40).
    #[arg(long)]
    pub max_digit: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check a single comma-separated word instead of random ones.
    #[arg(long)]
    pub digits: Option<String>,
}

/// Random admissible words with depths `1..=max_depth`.
pub fn random_words(
    m: u64,
    count: usize,
    max_depth: usize,
    max_digit: u64,
    seed: u64,
) -> Result<Vec<DigitWord>> {
    let f = field(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_depth);
            DigitWord::new((0..n).map(|_| rng.gen_range(m..=max_digit)).collect(), f)
        })
        .collect()
}

pub fn verify_metric(a: &VerifyMetricArgs, _ctx: &Ctx) -> Result<Report> {
    let words = match &a.digits {
        Some(d) => vec![DigitWord::new(parse_list(d, "digit")?, field(a.m)?)?],
        None => random_words(
            a.m,
            a.count,
            a.max_depth.max(1),
            a.max_digit.unwrap_or(a.m + 40),
            a.seed,
        )?,
    };
    let reports = verify_metric_batch::<BigInt>(&words)?;
    let mut r = Report::default();
    r.result("words", words.len());
    r.table = Table::new(&[
        "index",
        "depth",
        "digits",
        "growth",
        "length",
        "sensitivity",
        "prev_denominator",
    ]);
    let (mut g, mut l, mut s, mut p) = (true, true, true, true);
    for (i, rep) in reports.iter().enumerate() {
        let sens = rep.sensitivity.iter().all(|c| c.check.ok);
        g &= rep.growth.ok;
        l &= rep.length.ok;
        s &= sens;
        p &= rep.prev_denominator.ok;
        let digits: Vec<String> = rep.digits.iter().map(u64::to_string).collect();
        r.table.push(vec![
            json!(i),
            json!(rep.digits.len()),
            json!(digits.join(" ")),
            json!(rep.growth.ok),
            json!(rep.length.ok),
            json!(sens),
            json!(rep.prev_denominator.ok),
        ]);
    }
    r.check("denominator_growth", g);
    r.check("cylinder_length_bounds", l);
    r.check("digit_sensitivity", s);
    r.check("previous_denominator", p);
    Ok(r)
}
