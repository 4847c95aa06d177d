use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use theta_core::construction::{
    attach_envelopes, check_monotonicity, find_n0, holder_witness_bounds, insert_apply,
    parse_rational, ratio_series, seed_delete, sequence_diagnostics, synthesize, BasePolicy,
    ConstructionParams, SparseSpec,
};
use theta_core::dimension::{holder_exponent_estimate, PairMode};
use theta_core::expansion::DigitWord;
use theta_core::Result;

use super::{big, checkpoints, field, opt_f64, parse_list, Ctx};
use crate::output::{Report, Table};

#[derive(Args, Debug, Serialize)]
pub struct ParamArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long = "M", value_name = "M")]
    #[serde(rename = "M")]
    pub big_m: u64,
    #[arg(long, default_value = "4")]
    pub alpha: String,
    #[arg(long, default_value = "3/4")]
    pub gamma: String,
    /// const:D, periodic:D1,D2,... or random:SEED:LO:HI (default const:m).
    #[arg(long)]
    pub base: Option<String>,
    /// Use this N0 without checking the sparse-sequence conditions.
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub scan_limit: u64,
}

impl ParamArgs {
    fn build(&self, r: &mut Report) -> Result<ConstructionParams> {
        let base = match &self.base {
            Some(s) => BasePolicy::parse(s)?,
            None => BasePolicy::Constant(self.m),
        };
        let sparse = SparseSpec::new(parse_rational(&self.gamma)?)?;
        let params = ConstructionParams::new(
            self.m,
            self.big_m,
            parse_rational(&self.alpha)?,
            sparse,
            base,
        )?;
        let params = match self.n0 {
            Some(n0) => params.with_n0(n0)?,
            None => params.verified(self.scan_limit)?.0,
        };
        r.result("n0", params.n0);
        r.result("n0_verified", params.n0_verified);
        Ok(params)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub depth: usize,
    /// "auto" or a comma-separated list of indices.
    #[arg(long, default_value = "auto")]
    pub checkpoints: String,
}

pub fn construct(a: &ConstructArgs, _ctx: &Ctx) -> Result<Report> {
    let mut r = Report::default();
    let params = a.params.build(&mut r)?;
    let synth = synthesize(&params, a.depth)?;
    let marks: Vec<usize> = synth
        .insertions
        .iter()
        .flat_map(|i| [i.position - 1, i.position])
        .collect();
    let cps = checkpoints(&a.checkpoints, a.depth, &marks)?;
    let mut samples = ratio_series(&synth.word, &cps)?;
    let envs = attach_envelopes(&params, &synth, &mut samples)?;
    let mono = check_monotonicity(&synth.word, &params);
    r.result("insertions", &synth.insertions);
    r.result(
        "envelopes",
        envs.iter()
            .map(|e| json!({"k": e.k, "start": e.start, "end": e.end, "low": e.low, "high": e.high, "width": e.width()}))
            .collect::<Vec<_>>(),
    );
    r.table = Table::new(&[
        "n",
        "max_digit",
        "sum",
        "ratio",
        "error_bound",
        "envelope_low",
        "envelope_high",
        "inside_envelope",
    ]);
    for s in &samples {
        r.table.push(vec![
            json!(s.n),
            json!(s.max_digit),
            big(s.sum),
            opt_f64(s.ratio),
            opt_f64(s.error_bound),
            opt_f64(s.envelope_low),
            opt_f64(s.envelope_high),
            json!(s.inside_envelope),
        ]);
    }
    r.check("inserted_digits_monotone", mono.ok);
    r.check(
        "ratio_inside_envelope",
        samples.iter().all(|s| s.inside_envelope != Some(false)),
    );
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct RatioArgs {
    #[arg(long)]
    pub m: u64,
    /// const:D, periodic:D1,D2,... or random:SEED:LO:HI (default const:m).
    #[arg(long)]
    pub base: Option<String>,
    /// Explicit comma-separated digits instead of --base.
    #[arg(long, conflicts_with = "base")]
    pub digits: Option<String>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value = "auto")]
    pub checkpoints: String,
}

pub fn ratio(a: &RatioArgs, _ctx: &Ctx) -> Result<Report> {
    let f = field(a.m)?;
    let digits: Vec<u64> = match (&a.digits, a.depth) {
        (Some(d), depth) => {
            let mut v = parse_list(d, "digit")?;
            if let Some(n) = depth {
                v.truncate(n);
            }
            v
        }
        (None, Some(n)) => match &a.base {
            Some(s) => BasePolicy::parse(s)?,
            None => BasePolicy::Constant(a.m),
        }
        .digits(n),
        (None, None) => {
            return Err(theta_core::ThetaError::InvalidParameter(
                "either --digits or --depth is required".into(),
            ))
        }
    };
    let word = DigitWord::new(digits, f)?;
    let cps = checkpoints(&a.checkpoints, word.len(), &[])?;
    let samples = ratio_series(&word, &cps)?;
    let mut r = Report::default();
    r.result("length", word.len());
    r.table = Table::new(&["n", "max_digit", "sum", "ratio", "error_bound"]);
    for s in &samples {
        r.table.push(vec![
            json!(s.n),
            json!(s.max_digit),
            big(s.sum),
            opt_f64(s.ratio),
            opt_f64(s.error_bound),
        ]);
    }
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct ConditionsArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long = "M", value_name = "M")]
    #[serde(rename = "M")]
    pub big_m: u64,
    #[arg(long, default_value = "4")]
    pub alpha: String,
    #[arg(long, default_value = "3/4")]
    pub gamma: String,
    #[arg(long, default_value_t = 1000)]
    pub scan_limit: u64,
    /// Comma-separated k values for sparse-sequence diagnostics.
    #[arg(long)]
    pub diagnose: Option<String>,
}

pub fn conditions(a: &ConditionsArgs, _ctx: &Ctx) -> Result<Report> {
    let spec = SparseSpec::new(parse_rational(&a.gamma)?)?;
    let rep = find_n0(
        a.m,
        a.big_m,
        &parse_rational(&a.alpha)?,
        &spec,
        a.scan_limit,
    )?;
    let mut r = Report::default();
    r.result("k_min", spec.k_min());
    r.result("n0", rep.n0);
    r.result("edge", &rep.edge);
    if let Some(ks) = &a.diagnose {
        r.result(
            "diagnostics",
            sequence_diagnostics(&parse_list(ks, "k")?, &spec)?,
        );
    }
    r.table = Table::new(&[
        "k",
        "n_k",
        "exact",
        "a_value",
        "a_ok",
        "b_increment",
        "b_ok",
        "c_gap",
        "c_bound",
        "c_ok",
    ]);
    for c in &rep.records {
        r.table.push(vec![
            json!(c.k),
            json!(c.n_k),
            json!(c.exact),
            json!(c.a_value),
            json!(c.a_ok),
            json!(c.b_increment),
            json!(c.b_ok),
            json!(c.c_gap),
            json!(c.c_bound),
            json!(c.c_ok),
        ]);
    }
    r.check("n0_found", rep.n0.is_some());
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyMonotoneArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub depth: usize,
}

pub fn verify_monotone(a: &VerifyMonotoneArgs, _ctx: &Ctx) -> Result<Report> {
    let mut r = Report::default();
    let params = a.params.build(&mut r)?;
    let synth = synthesize(&params, a.depth)?;
    let rep = check_monotonicity(&synth.word, &params);
    r.table = Table::new(&["position", "digit", "at_least_M", "nondecreasing"]);
    for e in &rep.entries {
        r.table.push(vec![
            json!(e.position),
            json!(e.digit),
            json!(e.at_least_big_m),
            json!(e.nondecreasing),
        ]);
    }
    r.check("inserted_digits_monotone", rep.ok);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyHolderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub depth: usize,
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random base words for the deletion round trip.
    #[arg(long, default_value_t = 1000)]
    pub roundtrip: usize,
    /// Fail unless every estimated exponent reaches this floor.
    #[arg(long)]
    pub min_exponent: Option<f64>,
}

pub fn verify_holder(a: &VerifyHolderArgs, ctx: &Ctx) -> Result<Report> {
    let mut r = Report::default();
    let params = a.params.build(&mut r)?;
    let synth = synthesize(&params, a.depth)?;
    let wit = holder_witness_bounds(&synth, &params)?;
    let estimates = [PairMode::OneEarlyDigit, PairMode::Random]
        .into_iter()
        .map(|mode| holder_exponent_estimate(&params, a.depth, a.pairs, a.seed, mode))
        .collect::<Result<Vec<_>>>()?;
    let (m, big_m) = (params.m(), params.big_m);
    let trips = (0..a.roundtrip)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rng.set_stream(i as u64 + 1);
            let base: Vec<u64> = (0..a.depth).map(|_| rng.gen_range(m..=big_m)).collect();
            let y = insert_apply(&base, &params, a.depth)?;
            let back = seed_delete(&y.word, &params)?;
            Ok(back.digits() == &base[..back.len()] && back.len() + y.insertions.len() == a.depth)
        })
        .collect::<Result<Vec<bool>>>()?;
    let trips_ok = trips.iter().all(|&b| b);
    r.result("estimates", &estimates);
    if let Some(p) = &wit.product {
        r.result(
            "product",
            json!({
                "n": p.n, "t": p.t, "c": p.c,
                "q_full": ctx.decimal(&p.q_full),
                "q_deleted": ctx.decimal(&p.q_deleted),
                "bound": ctx.decimal(&p.bound),
                "chain_bound": ctx.decimal(&p.chain_bound),
                "ok": p.ok, "chain_ok": p.chain_ok,
            }),
        );
    }
    r.result("roundtrip_words", a.roundtrip);
    r.table = Table::new(&["j", "position", "digit", "log2_bound", "ok"]);
    for g in &wit.growth {
        r.table.push(vec![
            json!(g.j),
            json!(g.position),
            json!(g.digit),
            json!(g.log2_bound),
            json!(g.ok),
        ]);
    }
    r.check("inserted_digit_growth", wit.growth.iter().all(|g| g.ok));
    if let Some(p) = &wit.product {
        r.check("denominator_product_bound", p.ok);
        r.check("denominator_chain_bound", p.chain_ok);
    }
    r.check(
        "exponents_positive",
        estimates.iter().all(|e| e.all_positive),
    );
    if let Some(floor) = a.min_exponent {
        r.check(
            "min_exponent_floor",
            estimates.iter().all(|e| e.min_exponent >= floor),
        );
    }
    r.check("delete_after_insert_identity", trips_ok);
    Ok(r)
}
