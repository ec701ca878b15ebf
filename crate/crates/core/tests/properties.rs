mod oracle;

use gbp_core::dispatch::{dispatch, Algo};
use gbp_core::error::SolveError;
use gbp_core::exact::{enumerate_feasible_sets, solve_exact};
use gbp_core::generate::{generate, GeneratorConfig, Regime};
use gbp_core::hardness::{gadget_case, map_gbp_to_vc, map_vc_to_gbp, solve_vc_exact, VcInstance};
use gbp_core::model::{Edge, Instance, InstanceFile};
use gbp_core::preprocess::preprocess_all;
use proptest::prelude::*;

fn regime() -> impl Strategy<Value = Regime> {
    prop_oneof![Just(Regime::Deg3), Just(Regime::Deg4h4), Just(Regime::PlanarH3)]
}

fn generated() -> impl Strategy<Value = Instance> {
    (regime(), 6usize..=14, 2usize..=10, any::<u64>())
        .prop_map(|(regime, n, r, seed)| generate(&GeneratorConfig::new(regime, n, r, seed)))
}

/// Small arbitrary graphs with arbitrary habitats, no structural promises.
fn arbitrary() -> impl Strategy<Value = Instance> {
    (3usize..=7)
        .prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let k = pairs.len();
            (
                Just(n),
                Just(pairs),
                proptest::collection::vec((any::<bool>(), 0u64..6, proptest::bool::weighted(0.1)), k),
                proptest::collection::vec(proptest::collection::btree_set(0..n, 2..=4.min(n)), 1..4),
            )
        })
        .prop_filter_map("valid instance", |(n, pairs, picks, habitats)| {
            let edges: Vec<Edge> = pairs
                .iter()
                .zip(&picks)
                .filter(|(_, p)| p.0)
                .map(|(&(u, v), &(_, cost, forced))| Edge { u, v, cost, forced })
                .collect();
            let habitats = habitats.into_iter().map(|h| h.into_iter().collect()).collect();
            Instance::new(n, edges, habitats, None, None).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn families_are_exactly_the_upward_closed_feasible_sets(inst in generated()) {
        for h in 0..inst.habitats().len() {
            let Ok(fam) = enumerate_feasible_sets(&inst, h) else { continue };
            let width = fam.edges.len();
            if width > 12 {
                continue;
            }
            let forced: u64 = (0..width).filter(|&i| inst.edge(fam.edges[i]).forced).fold(0, |m, i| m | 1 << i);
            for mask in 0u64..(1 << width) {
                if mask & forced != forced {
                    continue;
                }
                let chosen: Vec<usize> = (0..width).filter(|&i| mask >> i & 1 == 1).map(|i| fam.edges[i]).collect();
                let sub = Instance::new(inst.vertex_count(), inst.edges().to_vec(), vec![inst.habitat(h).to_vec()], None, None)
                    .unwrap();
                let mut all = chosen.clone();
                all.extend((0..sub.edge_count()).filter(|&e| sub.edge(e).forced));
                let expected = oracle::feasible(&sub, &all);
                prop_assert_eq!(fam.masks.binary_search(&mask).is_ok(), expected);
            }
            for &m in &fam.masks {
                for i in 0..width {
                    prop_assert!(fam.masks.binary_search(&(m | 1 << i)).is_ok());
                }
            }
        }
    }

    #[test]
    fn instance_json_round_trips(inst in generated()) {
        let text = serde_json::to_string(&InstanceFile::from(inst.clone())).unwrap();
        let back: Instance = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serde_json::to_string(&InstanceFile::from(back)).unwrap(), text);
    }

    #[test]
    fn restricting_to_all_edges_changes_nothing(inst in arbitrary()) {
        let all: Vec<usize> = (0..inst.edge_count()).collect();
        prop_assert_eq!(solve_exact(&inst, None).ok(), solve_exact(&inst, Some(&all)).ok());
    }

    #[test]
    fn exact_matches_exhaustive_search(inst in arbitrary()) {
        let brute = oracle::brute_min(&inst, 16).unwrap();
        let exact = solve_exact(&inst, None);
        prop_assert_eq!(exact.as_ref().ok().map(|s| s.cost), brute);
        if let Ok(s) = exact {
            prop_assert!(oracle::feasible(&inst, &s.edges));
        }
    }

    #[test]
    fn exact_matches_exhaustive_search_on_generated(inst in generated()) {
        if let Some(brute) = oracle::brute_min(&inst, 16) {
            prop_assert_eq!(solve_exact(&inst, None).ok().map(|s| s.cost), brute);
        }
    }

    #[test]
    fn preprocessing_preserves_the_optimum(inst in arbitrary()) {
        let (reduced, ledger) = preprocess_all(&inst);
        prop_assert_eq!(&ledger.replay(&inst), &reduced);
        let before = solve_exact(&inst, None).ok().map(|s| s.cost);
        if ledger.is_no_instance() {
            prop_assert_eq!(before, None);
        } else {
            let after = solve_exact(&reduced.clone().with_budget(None), None).unwrap();
            let lifted = ledger.lift(&after.edges);
            prop_assert!(oracle::feasible(&inst, &lifted));
            prop_assert_eq!(Some(oracle::cost(&inst, &lifted)), before);
        }
    }

    #[test]
    fn auto_dispatch_is_never_inapplicable(inst in prop_oneof![arbitrary(), generated()]) {
        let out = dispatch(&inst, Algo::Auto);
        prop_assert!(!matches!(out, Err(SolveError::Inapplicable(_))), "{:?}", out.err());
    }

    #[test]
    fn seeded_generation_is_reproducible(regime in regime(), n in 6usize..40, r in 1usize..20, seed in any::<u64>()) {
        let cfg = GeneratorConfig::new(regime, n, r, seed);
        prop_assert_eq!(generate(&cfg), generate(&cfg));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn vertex_cover_round_trips_through_gadgets(seed in any::<u64>()) {
        let case = gadget_case(seed);
        let vc: &VcInstance = &case.source;
        let cover = solve_vc_exact(vc);
        let edges = map_vc_to_gbp(&case.map, vc, &cover).unwrap();
        prop_assert!(oracle::feasible(&case.instance, &edges));
        prop_assert_eq!(oracle::cost(&case.instance, &edges), case.map.target(cover.len()));
        let back = map_gbp_to_vc(&case.map, vc, &case.instance, &edges).unwrap();
        prop_assert!(vc.uncovered_edge(&back).is_none());
        prop_assert!(back.len() <= cover.len());
    }
}
