//! Frozen success counts for the m = n^2 allocator beyond the small-n range,
//! where the default margin first starts succeeding. Seed 2024, 200 trials.

use propfair_core::{run_experiment, DistributionSpec, ExperimentConfig, Growth, Regime};

#[test]
fn square_regime_success_floors() {
    let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let cfg = ExperimentConfig::new(Regime::Superlinear(Growth::Square), spec, vec![12, 20, 30], 200, 2024);
    let summary = run_experiment(&cfg).unwrap();
    let counts: Vec<usize> = summary.rows.iter().map(|r| r.alloc_successes).collect();
    for (got, floor) in counts.iter().zip([12, 191, 200]) {
        assert!(*got >= floor, "{counts:?}");
    }
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
}
