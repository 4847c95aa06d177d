use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theta_core::measure::{digit_frequencies, orbit_stats_real, GaussMeasure};
use theta_core::FieldSpec;

#[test]
fn invariance_on_random_intervals() {
    for m in [2u64, 3, 5] {
        let g = GaussMeasure::<f64>::new(FieldSpec::new(m).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(m);
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(0.0..g.theta()), rng.gen_range(0.0..g.theta()));
            let r = g.invariance_defect(x.min(y), x.max(y), 100_000).unwrap();
            assert!(r.defect < 1e-8, "m={m} [{x}, {y}]: {r:?}");
        }
    }
}

#[test]
fn defect_shrinks_with_cutoff() {
    let g = GaussMeasure::<f64>::new(FieldSpec::new(2).unwrap());
    let mut prev = f64::INFINITY;
    for cutoff in [10, 100, 1000, 10_000, 100_000] {
        let d = g.invariance_defect(0.1, 0.5, cutoff).unwrap().defect;
        assert!(d < prev, "cutoff {cutoff}: {d} vs {prev}");
        prev = d;
    }
}

#[test]
fn sampled_digits_follow_digit_law() {
    let g = GaussMeasure::<f64>::new(FieldSpec::new(3).unwrap());
    let xs = g.sample(7, 200_000);
    for f in digit_frequencies(&g, &xs, 3..=8).unwrap() {
        assert!(f.z.abs() < 4.0, "{f:?}");
    }
}

#[test]
fn sampled_orbit_runs_long() {
    let g = GaussMeasure::<f64>::new(FieldSpec::new(2).unwrap());
    let x = g.sample(1, 1)[0];
    let s = orbit_stats_real(g.field, x, 2000).unwrap();
    assert_eq!(s.digits.len(), 2000);
    assert!(s.digits.iter().all(|&d| d >= 2));
    assert!(s.series[1999].ratio.unwrap() > 0.0);
}
