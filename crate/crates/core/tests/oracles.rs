//! Exact-oracle cross-checks against full enumeration, plus the
//! counterexample families.

use propfair_core::{
    exists_proportional, exists_proportional_matching_case, margin_for, remark1_instance,
    remark2_instance, run_experiment, sample_instance, theorem1_allocate, AllocatorConfig,
    Allocation, DistributionSpec, ExperimentConfig, Instance, MatchingCaseVerdict, Regime,
    SearchLimits, Verdict,
};

/// Tries all n^m assignments.
fn enumerate_exists(inst: &Instance) -> bool {
    let (n, m) = (inst.agents(), inst.goods());
    let mut owner = vec![0usize; m];
    loop {
        if inst.is_proportional(&Allocation::new(owner.clone())).unwrap() {
            return true;
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return false;
            }
            owner[pos] += 1;
            if owner[pos] < n {
                break;
            }
            owner[pos] = 0;
            pos += 1;
        }
    }
}

fn random_small_instances(count: u64) -> impl Iterator<Item = Instance> {
    let wide = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let narrow = DistributionSpec::uniform(0.4, 0.6).unwrap();
    let coin = DistributionSpec::bernoulli(0.6).unwrap();
    (0..count).map(move |s| {
        let n = 2 + (s % 2) as usize;
        let m = 1 + ((s / 2) % 9) as usize;
        let spec = match s % 3 {
            0 => &wide,
            1 => &narrow,
            _ => &coin,
        };
        sample_instance(spec, n, m, 1000 + s)
    })
}

#[test]
fn branch_and_bound_agrees_with_enumeration() {
    let limits = SearchLimits::default();
    let (mut yes, mut no) = (0, 0);
    for inst in random_small_instances(300) {
        let expected = enumerate_exists(&inst);
        match exists_proportional(&inst, &limits).unwrap() {
            Verdict::Yes { witness } => {
                assert!(expected);
                assert!(inst.is_proportional(&witness).unwrap());
                yes += 1;
            }
            Verdict::No => {
                assert!(!expected, "{inst:?}");
                no += 1;
            }
            Verdict::BudgetExceeded => panic!("budget exhausted on a tiny instance"),
        }
    }
    assert!(yes > 20 && no > 20, "yes={yes} no={no}");
}

#[test]
fn matching_case_agrees_with_branch_and_bound() {
    let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let limits = SearchLimits::default();
    let mut applicable = 0;
    for seed in 0..400 {
        let n = 2 + (seed % 5) as usize;
        let inst = sample_instance(&spec, n, n, seed);
        let fast = exists_proportional_matching_case(&inst);
        let slow = exists_proportional(&inst, &limits).unwrap();
        match (fast, slow) {
            (MatchingCaseVerdict::Yes { witness }, Verdict::Yes { .. }) => {
                assert!(inst.is_proportional(&witness).unwrap());
                applicable += 1;
            }
            (MatchingCaseVerdict::No, Verdict::No) => applicable += 1,
            (MatchingCaseVerdict::NotApplicable, _) => {}
            (f, s) => panic!("disagreement on seed {seed}: {f:?} vs {s:?}"),
        }
    }
    assert!(applicable > 300);
}

#[test]
fn theorem1_success_implies_existence() {
    let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let cfg = AllocatorConfig::new(margin_for(&spec, 0.3).unwrap()).unwrap();
    let limits = SearchLimits::default();
    let mut successes = 0;
    for seed in 0..300 {
        let n = 2 + (seed % 4) as usize;
        let k = 1 + (seed % 3) as usize;
        if n * k > limits.max_goods {
            continue;
        }
        let inst = sample_instance(&spec, n, n * k, seed);
        if theorem1_allocate(&inst, &cfg).unwrap().is_success() {
            successes += 1;
            assert!(matches!(
                exists_proportional(&inst, &limits).unwrap(),
                Verdict::Yes { .. }
            ));
        }
    }
    assert!(successes > 0);
}

#[test]
fn remark1_family_never_admits_proportional_allocations() {
    let limits = SearchLimits::default();
    for seed in 0..50 {
        let inst = remark1_instance(3, seed).unwrap();
        assert_eq!(exists_proportional(&inst, &limits).unwrap(), Verdict::No);
    }
    for seed in 0..5 {
        let inst = remark1_instance(4, seed).unwrap();
        assert_eq!(exists_proportional(&inst, &limits).unwrap(), Verdict::No);
    }
}

#[test]
fn remark2_family_never_admits_proportional_allocations() {
    let limits = SearchLimits::default();
    for seed in 0..50 {
        let inst = remark2_instance(4, seed).unwrap();
        assert_eq!(exists_proportional_matching_case(&inst), MatchingCaseVerdict::No);
        assert_eq!(exists_proportional(&inst, &limits).unwrap(), Verdict::No);
    }
    for seed in 0..50 {
        let inst = remark2_instance(6, seed).unwrap();
        assert_eq!(exists_proportional_matching_case(&inst), MatchingCaseVerdict::No);
    }
}

#[test]
fn allocator_frequency_never_exceeds_existence() {
    let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let mut cfg = ExperimentConfig::new(Regime::Multiple { k: 1 }, spec, vec![3, 5, 8], 100, 11);
    cfg.oracle_check = true;
    let summary = run_experiment(&cfg).unwrap();
    for row in &summary.rows {
        assert_eq!(row.oracle_trials, row.trials);
        assert!(row.alloc_success <= row.exists.unwrap());
        assert!(row.alloc_ci_lo <= row.alloc_success && row.alloc_success <= row.alloc_ci_hi);
    }
}

#[test]
fn experiment_output_independent_of_threads() {
    let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let mut cfg = ExperimentConfig::new(Regime::Multiple { k: 2 }, spec, vec![2, 3, 6], 40, 5);
    cfg.oracle_check = true;
    cfg.threads = Some(1);
    let one = run_experiment(&cfg).unwrap().to_csv();
    cfg.threads = Some(4);
    assert_eq!(one, run_experiment(&cfg).unwrap().to_csv());
}
