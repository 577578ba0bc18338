use proptest::prelude::*;

use propfair_core::{
    brute_force_matching_size, chernoff_bound, margin_for, maximum_matching, sample_instance,
    theorem1_allocate, theorem2_allocate, AllocatorConfig, Allocation, BipartiteGraph,
    DistributionSpec, Instance,
};

/// Instance with `n` in 1..=max_n, `m` in 0..=max_m, paired with a random allocation.
fn instance_and_allocation(max_n: usize, max_m: usize) -> impl Strategy<Value = (Instance, Allocation)> {
    (1..=max_n, 0..=max_m).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(0.0..=1.0f64, n * m),
            prop::collection::vec(0..n, m),
        )
            .prop_map(move |(u, owner)| {
                (Instance::from_flat(n, m, u).unwrap(), Allocation::new(owner))
            })
    })
}

fn graph(max_side: usize) -> impl Strategy<Value = BipartiteGraph> {
    (0..=max_side, 0..=max_side, 0.0..1.0f64).prop_flat_map(|(l, r, p)| {
        prop::collection::vec(prop::collection::vec(prop::bool::weighted(p), r), l).prop_map(
            move |rows| {
                let adjacency = rows
                    .into_iter()
                    .map(|row| row.into_iter().enumerate().filter(|(_, e)| *e).map(|(j, _)| j).collect())
                    .collect();
                BipartiteGraph::new(l, r, adjacency).unwrap()
            },
        )
    })
}

fn spec() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (0.0..0.9f64, 0.01..0.5f64)
            .prop_map(|(lo, w)| DistributionSpec::uniform(lo, (lo + w).min(1.0)).unwrap()),
        (0.01..0.99f64).prop_map(|p| DistributionSpec::bernoulli(p).unwrap()),
        prop::collection::vec((0.0..=1.0f64, 0.05..1.0f64), 2..6).prop_map(|pairs| {
            let total: f64 = pairs.iter().map(|p| p.1).sum();
            let mut probs: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
            let rest: f64 = probs[1..].iter().sum();
            probs[0] = 1.0 - rest;
            DistributionSpec::discrete(pairs.iter().map(|p| p.0).collect(), probs).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn envy_free_implies_proportional((inst, alloc) in instance_and_allocation(5, 12)) {
        if inst.is_envy_free(&alloc).unwrap() {
            prop_assert!(inst.is_proportional(&alloc).unwrap());
        }
    }

    #[test]
    fn bundles_add_up_to_total((inst, alloc) in instance_and_allocation(5, 12)) {
        for agent in 0..inst.agents() {
            let sum: f64 = (0..inst.agents())
                .map(|owner| inst.bundle_utility_of(&alloc, agent, owner).unwrap())
                .sum();
            prop_assert!((sum - inst.total_utility(agent).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn adding_a_good_never_hurts((inst, alloc) in instance_and_allocation(5, 12), pick in any::<prop::sample::Index>()) {
        prop_assume!(inst.goods() > 0 && inst.agents() > 1);
        let good = pick.index(inst.goods());
        let from = alloc.owner_of(good);
        let to = (from + 1) % inst.agents();
        let mut owners = alloc.owners().to_vec();
        owners[good] = to;
        let moved = Allocation::new(owners);
        prop_assert!(inst.bundle_utility(&moved, to).unwrap() >= inst.bundle_utility(&alloc, to).unwrap());
    }

    #[test]
    fn predicates_scale_invariant((inst, alloc) in instance_and_allocation(5, 12), c in 0.05..1.0f64, pick in any::<prop::sample::Index>()) {
        let agent = pick.index(inst.agents());
        let rows: Vec<Vec<f64>> = inst
            .rows()
            .enumerate()
            .map(|(i, r)| r.iter().map(|&u| if i == agent { u * c } else { u }).collect())
            .collect();
        let scaled = Instance::from_rows(inst.agents(), inst.goods(), rows).unwrap();
        // outcomes can only flip within the comparison tolerance
        let margin_ok = |x: &Instance| {
            let shares = x.shares();
            (0..x.agents()).all(|i| (x.bundle_utility(&alloc, i).unwrap() - shares[i]).abs() > 1e-7)
        };
        if margin_ok(&inst) && margin_ok(&scaled) {
            prop_assert_eq!(inst.is_proportional(&alloc).unwrap(), scaled.is_proportional(&alloc).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn hopcroft_karp_matches_brute_force(g in graph(8)) {
        let m = maximum_matching(&g);
        prop_assert!(m.is_valid_for(&g));
        prop_assert_eq!(m.size(), brute_force_matching_size(&g).unwrap());
        prop_assert!(m.size() <= g.left_count().min(g.right_count()));
        prop_assert_eq!(&m, &maximum_matching(&g));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn margin_satisfies_its_tail(spec in spec(), beta_floor in 0.01..0.99f64) {
        prop_assume!(!spec.is_degenerate());
        if let Ok(m) = margin_for(&spec, beta_floor) {
            prop_assert!(m.delta > 0.0);
            prop_assert!(m.beta >= beta_floor);
            prop_assert!(m.threshold() <= spec.support_max());
            prop_assert!(spec.tail(m.threshold()) >= m.beta);
            prop_assert_eq!(m.mean, spec.mean());
        }
    }

    #[test]
    fn chernoff_monotone(e1 in 0.001..0.999f64, e2 in 0.001..0.999f64, x1 in 0.0..100.0f64, x2 in 0.0..100.0f64) {
        let (elo, ehi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (xlo, xhi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        prop_assert!(chernoff_bound(ehi, xlo).unwrap() <= chernoff_bound(elo, xlo).unwrap());
        prop_assert!(chernoff_bound(elo, xhi).unwrap() <= chernoff_bound(elo, xlo).unwrap());
    }

    #[test]
    fn allocators_sound_and_deterministic(n in 1usize..12, k in 1usize..4, extra in 0usize..12, seed in any::<u64>()) {
        let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let cfg = AllocatorConfig::new(margin_for(&spec, 0.3).unwrap()).unwrap();
        let threshold = cfg.margin.threshold();

        let inst = sample_instance(&spec, n, k * n, seed);
        let out = theorem1_allocate(&inst, &cfg).unwrap();
        prop_assert_eq!(&out, &theorem1_allocate(&inst, &cfg).unwrap());
        if out.is_success() {
            let alloc = out.allocation.as_ref().unwrap();
            prop_assert!(inst.is_proportional(alloc).unwrap());
            prop_assert_eq!(alloc.bundle_sizes(n), vec![k; n]);
            if n > 1 {
                for g in 0..inst.goods() {
                    prop_assert!(inst.utility(alloc.owner_of(g), g) >= threshold);
                }
            }
        }

        let inst = sample_instance(&spec, n, k * n + extra, seed);
        let out = theorem2_allocate(&inst, &cfg).unwrap();
        prop_assert_eq!(&out, &theorem2_allocate(&inst, &cfg).unwrap());
        if out.is_success() {
            prop_assert!(inst.is_proportional(out.allocation.as_ref().unwrap()).unwrap());
        }
    }
}

#[test]
fn sample_moments() {
    for spec in [
        DistributionSpec::uniform(0.0, 1.0).unwrap(),
        DistributionSpec::bernoulli(0.5).unwrap(),
        DistributionSpec::discrete(vec![0.1, 0.6, 0.9], vec![0.2, 0.5, 0.3]).unwrap(),
    ] {
        let draws = 1_000_000;
        let inst = sample_instance(&spec, 1, draws, 99);
        let mean = inst.row(0).iter().sum::<f64>() / draws as f64;
        assert!((mean - spec.mean()).abs() < 0.01, "{spec}: {mean}");

        let margin = margin_for(&spec, 0.3).unwrap();
        let hits = inst.row(0).iter().filter(|&&u| u >= margin.threshold()).count();
        let freq = hits as f64 / draws as f64;
        assert!(freq >= margin.beta - 3.0 * (margin.beta / draws as f64).sqrt(), "{spec}: {freq}");
    }
}
