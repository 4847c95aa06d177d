//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theta_core::construction::{
    attach_envelopes, check_monotonicity, holder_witness_bounds, insert_apply, ratio_series,
    seed_delete, sequence_diagnostics, synthesize, BasePolicy, ConstructionParams, DiagnosticMode,
    SparseSpec,
};
use theta_core::dimension::{
    holder_exponent_estimate, jarnik_bounds, moran_bracket, moran_sum, LengthMode, PairMode,
    DEFAULT_BUDGET,
};
use theta_core::expansion::{verify_metric, DigitWord};
use theta_core::measure::{digit_frequencies, GaussMeasure};
use theta_core::numeric::CompensatedSum;
use theta_core::FieldSpec;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn golden() -> ConstructionParams {
    ConstructionParams::new(
        2,
        10,
        rational(4, 1),
        SparseSpec::default(),
        BasePolicy::Constant(2),
    )
    .unwrap()
    .with_n0(2)
    .unwrap()
}

fn c1_metric_suite() -> Outcome {
    const WORDS: usize = 10_000;
    const LIMIT: Duration = Duration::from_secs(30);
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = 0;
    for i in 0..WORDS {
        let m = [2u64, 3, 5][i % 3];
        let depth = rng.gen_range(1..=12);
        // mostly small digits, with occasional large ones
        let digits = (0..depth)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    rng.gen_range(m..=1_000_000)
                } else {
                    rng.gen_range(m..=m + 40)
                }
            })
            .collect();
        let word = DigitWord::new(digits, FieldSpec::new(m).unwrap()).unwrap();
        if !verify_metric::<BigInt>(&word).unwrap().all_ok() {
            failures += 1;
        }
    }
    let t = start.elapsed();
    ensure(
        failures == 0,
        format!("{failures} of {WORDS} words violate a bound"),
    )?;
    ensure(t < LIMIT, format!("took {t:.1?}, limit {LIMIT:?}"))?;
    Ok(format!(
        "{WORDS} words, 0 failures, {t:.1?} single-threaded"
    ))
}

fn c2_jarnik() -> Outcome {
    const LOWER: f64 = 0.503_505_876_385_361;
    const UPPER: f64 = 0.964_542_631_029_888;
    const TOL: f64 = 5e-7;
    let b = jarnik_bounds::<f64>(2, 10).map_err(|e| e.to_string())?;
    ensure((b.lower - LOWER).abs() < TOL, format!("lower {}", b.lower))?;
    ensure((b.upper - UPPER).abs() < TOL, format!("upper {}", b.upper))?;
    let seq: Vec<_> = [10u64, 100, 1000, 10_000]
        .iter()
        .map(|&mm| jarnik_bounds::<f64>(2, mm).unwrap())
        .collect();
    ensure(
        seq.windows(2)
            .all(|w| w[0].lower < w[1].lower && w[0].upper < w[1].upper),
        "not monotone in M",
    )?;
    ensure(
        seq.iter().all(|b| 0.0 < b.lower && b.upper < 1.0),
        "outside (0, 1)",
    )?;
    Ok(format!(
        "({:.6}, {:.6}), monotone for M = 10..10^4 (the quoted 0.503497 differs from the formula's 0.503506)",
        b.lower, b.upper
    ))
}

fn c3_moran() -> Outcome {
    const LIMIT: Duration = Duration::from_secs(10);
    let lo = moran_sum::<f64>(2, 10, 1, 0.5, LengthMode::Exact).unwrap();
    let hi = moran_sum::<f64>(2, 10, 1, 0.8, LengthMode::Exact).unwrap();
    ensure(
        (lo - 2.03).abs() < 0.01 && (hi - 0.93).abs() < 0.01,
        format!("depth-1 sums {lo}, {hi}"),
    )?;
    let mut brackets = Vec::new();
    let mut last = Duration::ZERO;
    for d in 1..=6 {
        let t = Instant::now();
        brackets.push(moran_bracket::<f64>(2, 10, d, 1e-9, DEFAULT_BUDGET).unwrap());
        last = t.elapsed();
    }
    let root = brackets[0].exact.lo;
    ensure(0.5 < root && root < 0.8, format!("depth-1 root {root}"))?;
    for (i, a) in brackets.iter().enumerate() {
        ensure(
            a.exact_inside(),
            format!("depth {} exact root outside bracket", a.depth),
        )?;
        for b in &brackets[i + 1..] {
            ensure(
                a.overlaps(b),
                format!("depths {} and {} disjoint", a.depth, b.depth),
            )?;
        }
    }
    ensure(
        brackets.windows(2).all(|w| w[1].width() < w[0].width()),
        "widths not decreasing",
    )?;
    let j = jarnik_bounds::<f64>(2, 10).unwrap();
    let b6 = &brackets[5];
    ensure(
        b6.s_low <= j.upper + 0.05 && b6.s_high >= j.lower - 0.05,
        "depth-6 bracket misses the widened Jarník interval",
    )?;
    ensure(last < LIMIT, format!("depth 6 took {last:.1?}"))?;
    Ok(format!(
        "depth-1 root {root:.4}, depth-6 bracket [{:.4}, {:.4}] in {last:.1?}",
        b6.s_low, b6.s_high
    ))
}

fn c4_golden() -> Outcome {
    let (params, _) = ConstructionParams::new(
        2,
        10,
        rational(4, 1),
        SparseSpec::default(),
        BasePolicy::Constant(2),
    )
    .unwrap()
    .verified(200)
    .map_err(|e| e.to_string())?;
    ensure(params.n0 == 2, format!("N0 = {}", params.n0))?;
    let s = synthesize(&params, 9).unwrap();
    ensure(
        s.word.at(5) == 41 && s.word.at(9) == 127,
        format!("digits {:?}", s.word.digits()),
    )?;
    let r9 = ratio_series(&s.word, &[9]).unwrap()[0].ratio.unwrap();
    ensure((r9 - 3.9941).abs() <= 0.0005, format!("R9 = {r9}"))?;
    ensure(
        check_monotonicity(&s.word, &params).ok,
        "monotonicity flags fail",
    )?;
    Ok(format!("l5 = 41, l9 = 127, R9 = {r9:.6}, monotone"))
}

fn c5_envelope() -> Outcome {
    const DEPTH: usize = 60;
    let (params, _) = ConstructionParams::new(
        2,
        10,
        rational(1, 1),
        SparseSpec::new(rational(1, 4)).unwrap(),
        BasePolicy::Constant(2),
    )
    .unwrap()
    .verified(1000)
    .map_err(|e| e.to_string())?;
    let s = synthesize(&params, DEPTH).unwrap();
    ensure(
        s.insertions.len() >= 6,
        format!("{} insertions", s.insertions.len()),
    )?;
    let cps: Vec<usize> = (3..=DEPTH).collect();
    let mut samples = ratio_series(&s.word, &cps).unwrap();
    let envs = attach_envelopes(&params, &s, &mut samples).unwrap();
    let covered: Vec<_> = samples
        .iter()
        .filter(|x| x.inside_envelope.is_some())
        .collect();
    ensure(
        covered.iter().all(|x| x.inside_envelope == Some(true)),
        "a ratio sample escapes its envelope",
    )?;
    let w: Vec<f64> = envs.iter().rev().take(3).map(|e| e.width()).collect();
    ensure(w[2] > w[1] && w[1] > w[0], format!("last widths {w:?}"))?;
    Ok(format!(
        "N0 = {}, {} insertions, {} samples inside, last widths {:.4} > {:.4} > {:.4}",
        params.n0,
        s.insertions.len(),
        covered.len(),
        w[2],
        w[1],
        w[0]
    ))
}

fn c6_bounded_ratio() -> Outcome {
    const DEPTH: usize = 100_000;
    let cps = [1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000];
    let f = FieldSpec::new(2).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let digits = BasePolicy::SeededRandom {
            seed,
            lo: 2,
            hi: 10,
        }
        .digits(DEPTH);
        let r: Vec<f64> = ratio_series(&DigitWord::new(digits, f).unwrap(), &cps)
            .unwrap()
            .iter()
            .map(|x| x.ratio.unwrap())
            .collect();
        ensure(
            r.windows(2).all(|w| w[1] < w[0]),
            format!("seed {seed}: not decreasing {r:?}"),
        )?;
        worst = worst.max(r[r.len() - 1]);
    }
    ensure(worst < 0.01, format!("max R = {worst}"))?;
    Ok(format!(
        "100 words, max R(10^5) = {worst:.5}, decreasing at all checkpoints"
    ))
}

fn c7_sparse_diagnostics() -> Outcome {
    let spec = SparseSpec::default();
    let rows = sequence_diagnostics(&[10, 100, 10_000, 100_000_000], &spec).unwrap();
    let (k10, k100, k1e4, k1e8) = (&rows[0], &rows[1], &rows[2], &rows[3]);
    ensure(
        k1e8.mode == DiagnosticMode::LogDomain,
        "k = 10^8 not in log-domain mode",
    )?;
    ensure(
        k1e8.log_increment < k100.log_increment,
        "log increment did not shrink",
    )?;
    ensure(
        k1e8.loglog_increment < k100.loglog_increment,
        "log·loglog increment did not shrink",
    )?;
    ensure(
        k1e4.relative_gap < k10.relative_gap,
        "relative gap did not shrink",
    )?;
    Ok(format!(
        "increments {:.4}/{:.4} at k=10^2 vs {:.2e}/{:.4} at k=10^8; relative gap {:.4} at k=10 vs {:.4} at k=10^4",
        k100.log_increment, k100.loglog_increment, k1e8.log_increment, k1e8.loglog_increment,
        k10.relative_gap, k1e4.relative_gap
    ))
}

fn c8_holder() -> Outcome {
    const DEPTH: usize = 20;
    let params = golden();
    let s = synthesize(&params, DEPTH).unwrap();
    let w = holder_witness_bounds(&s, &params).unwrap();
    ensure(w.growth.iter().all(|g| g.ok), "digit growth bound fails")?;
    let p = w.product.as_ref().ok_or("no product check")?;
    ensure(p.ok && p.chain_ok, "denominator product bound fails")?;
    let mut min = f64::INFINITY;
    for mode in [PairMode::OneEarlyDigit, PairMode::Random] {
        let e = holder_exponent_estimate(&params, DEPTH, 200, 3, mode).unwrap();
        ensure(
            e.pair_count >= 200 && e.all_positive,
            format!("{mode:?}: {e:?}"),
        )?;
        min = min.min(e.min_exponent);
    }
    ensure(min >= 0.8, format!("min exponent {min}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let base: Vec<u64> = (0..DEPTH).map(|_| rng.gen_range(2..=10)).collect();
        let y = insert_apply(&base, &params, DEPTH).unwrap();
        let back = seed_delete(&y.word, &params).unwrap();
        ensure(back.digits() == &base[..back.len()], "round trip failed")?;
    }
    Ok(format!(
        "{} growth checks, product bound at n={}, min exponent {min:.4}, 1000 round trips",
        w.growth.len(),
        p.n
    ))
}

fn c9_measure() -> Outcome {
    const LIMIT: Duration = Duration::from_secs(60);
    let start = Instant::now();
    let mut worst_defect = 0.0f64;
    let mut worst_z = 0.0f64;
    for m in [2u64, 3, 5] {
        let g = GaussMeasure::<f64>::new(FieldSpec::new(m).unwrap());
        let mass = g.measure_interval(0.0, g.theta()).unwrap();
        ensure((mass - 1.0).abs() <= 1e-14, format!("m={m}: mass {mass}"))?;
        let mut acc = CompensatedSum::new();
        for j in m..=100_000 {
            acc.add(g.digit_law(j).unwrap());
        }
        let total = acc.value() + g.digit_tail(100_000);
        ensure(
            (total - 1.0).abs() <= 1e-12,
            format!("m={m}: digit law sums to {total}"),
        )?;
        let mut rng = ChaCha8Rng::seed_from_u64(m);
        for _ in 0..100 {
            let (a, b) = (rng.gen_range(0.0..g.theta()), rng.gen_range(0.0..g.theta()));
            let d = g
                .invariance_defect(a.min(b), a.max(b), 100_000)
                .unwrap()
                .defect;
            worst_defect = worst_defect.max(d);
        }
        let xs = g.sample(m, 1_000_000);
        for f in digit_frequencies(&g, &xs, m..=m + 5).unwrap() {
            worst_z = worst_z.max(f.z.abs());
        }
    }
    let t = start.elapsed();
    ensure(
        worst_defect < 1e-8,
        format!("invariance defect {worst_defect}"),
    )?;
    ensure(worst_z <= 3.0, format!("|z| = {worst_z}"))?;
    ensure(t < LIMIT, format!("took {t:.1?}"))?;
    Ok(format!(
        "m = 2, 3, 5: max defect {worst_defect:.1e}, max |z| {worst_z:.2}, {t:.1?}"
    ))
}

fn run_cli(args: &[&str], jobs: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_theta"))
        .args(args)
        .args(["--jobs", jobs])
        .output()
        .expect("run theta");
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn c10_reproducible() -> Outcome {
    let runs: &[&[&str]] = &[
        &["dimension", "--m", "2", "--M", "10", "--depth", "4"],
        &[
            "sample", "--m", "3", "--count", "200000", "--emit", "--format", "json",
        ],
        &[
            "construct",
            "--m",
            "2",
            "--M",
            "10",
            "--alpha",
            "4",
            "--gamma",
            "0.75",
            "--depth",
            "2000",
            "--base",
            "const:2",
        ],
        &[
            "verify-holder",
            "--m",
            "2",
            "--M",
            "10",
            "--n0",
            "2",
            "--depth",
            "16",
            "--pairs",
            "100",
        ],
        &[
            "verify-metric",
            "--m",
            "5",
            "--count",
            "500",
            "--format",
            "json",
        ],
        &[
            "conditions",
            "--m",
            "2",
            "--M",
            "10",
            "--alpha",
            "1",
            "--gamma",
            "1/4",
            "--scan-limit",
            "200",
        ],
        &["orbit", "--m", "2", "--n", "300", "--seed", "4"],
        &["measure", "--m", "3", "--a", "1/10", "--b", "theta/2"],
    ];
    for args in runs {
        let a = run_cli(args, "1");
        let b = run_cli(args, "4");
        ensure(
            !a.is_empty() && a == b,
            format!("{} differs across --jobs", args[0]),
        )?;
    }
    Ok(format!(
        "{} commands byte-identical with --jobs 1 and 4",
        runs.len()
    ))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, c1_metric_suite),
        (2, c2_jarnik),
        (3, c3_moran),
        (4, c4_golden),
        (5, c5_envelope),
        (6, c6_bounded_ratio),
        (7, c7_sparse_diagnostics),
        (8, c8_holder),
        (9, c9_measure),
        (10, c10_reproducible),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
