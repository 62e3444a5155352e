//! Randomized invariants: every claim the library leans on, checked against
//! enumeration on instances small enough to enumerate.

use std::collections::HashSet;

use mrfmoves::energy::{instance_is_triangle, Labeling, PairwiseTable};
use mrfmoves::generators::{self, project_triangle};
use mrfmoves::mincut::{decompose, max_flow, solve_binary, BinaryEdge, BinaryProblem};
use mrfmoves::moves::{build_subproblem, optimal_move, truncate, MoveSpec};
use mrfmoves::oracle::{
    best_in_move_space, dominance_report, enumerate_move_set, MoveSetId,
};
use mrfmoves::schedule::{run, Method};
use mrfmoves::{Error, DEFAULT_EPS};
use proptest::prelude::*;

prop_compose! {
    /// Integer submodular binary problem: up to 8 nodes, parallel edges
    /// permitted, each table built with nonpositive diagonal excess.
    fn arb_binary_problem()
        (n in 2usize..=8)
        (n in Just(n),
         unaries in prop::collection::vec((-10i32..=10, -10i32..=10), n),
         raw_edges in prop::collection::vec(
             (0usize..8, 0usize..8, -5i32..=5, -5i32..=5, -5i32..=5, 0i32..=10),
             0..=12,
         ),
         constant in -5i32..=5)
        -> BinaryProblem
    {
        let mut bp = BinaryProblem::new(n);
        for (k, (u0, u1)) in unaries.into_iter().enumerate() {
            bp.unaries[k] = [u0 as f64, u1 as f64];
        }
        bp.constant = constant as f64;
        for (a, b, t01, t10, t00, slack) in raw_edges {
            let (i, j) = (a % n, b % n);
            if i == j {
                continue;
            }
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            let t11 = t10 + t01 - t00 - slack;
            bp.edges.push(BinaryEdge {
                i,
                j,
                table: [[t00 as f64, t01 as f64], [t10 as f64, t11 as f64]],
            });
        }
        bp
    }
}

fn option_vectors(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |mask| (0..n).map(|v| mask >> v & 1 == 1).collect())
}

fn all_specs(inst: &mrfmoves::Instance) -> Vec<MoveSpec> {
    [
        MoveSetId::Icm,
        MoveSetId::Swap,
        MoveSetId::Expansion,
        MoveSetId::ExpShrink,
    ]
    .into_iter()
    .flat_map(|id| id.specs(inst))
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Cut capacity plus the folded constant reproduces the energy of every
    /// option vector, not just the optimum.
    #[test]
    fn decomposition_reproduces_every_energy(bp in arb_binary_problem()) {
        let dec = decompose(&bp).unwrap();
        for y in option_vectors(bp.num_nodes) {
            let mut side = vec![false; bp.num_nodes + 2];
            for v in 0..bp.num_nodes {
                side[v] = !y[v];
            }
            side[bp.num_nodes] = true; // source
            let cut = dec.network.cut_capacity(&side);
            prop_assert!((cut + dec.constant - bp.energy(&y)).abs() < 1e-9);
        }
    }

    /// The min-cut solution is the enumeration minimum, and the max-flow
    /// value equals the capacity of the returned cut.
    #[test]
    fn binary_solver_is_exact(bp in arb_binary_problem()) {
        let best = option_vectors(bp.num_nodes)
            .map(|y| bp.energy(&y))
            .fold(f64::INFINITY, f64::min);
        let sol = solve_binary(&bp).unwrap();
        prop_assert_eq!(sol.energy, best);

        let dec = decompose(&bp).unwrap();
        let flow = max_flow(&dec.network);
        let cut = dec.network.cut_capacity(&flow.source_side);
        prop_assert!((flow.flow_value - cut).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Exact solve: on triangle-satisfying instances every move family's
    /// best move matches brute-force enumeration of its move space.
    #[test]
    fn moves_match_enumeration_on_triangle_instances(seed in any::<u64>()) {
        let inst = generators::random_small(seed, 5, 4, true);
        let x = generators::random_labeling(&inst, seed ^ 0x517c_c1b7_2722_0a95);
        for spec in all_specs(&inst) {
            let mv = optimal_move(&inst, &x, spec, false, DEFAULT_EPS).unwrap();
            let oracle = best_in_move_space(&inst, &x, spec).unwrap();
            prop_assert_eq!(mv.energy, oracle.energy, "{:?}", spec);
            prop_assert_eq!(mv.energy, inst.total_energy(&mv.labeling).unwrap());
        }
    }

    /// Every expansion-family subproblem built over triangle-satisfying
    /// tables is submodular edge by edge.
    #[test]
    fn triangle_tables_make_submodular_subproblems(seed in any::<u64>()) {
        let inst = generators::random_small(seed, 5, 4, true);
        let x = generators::random_labeling(&inst, seed ^ 0x9e37_79b9_7f4a_7c15);
        for id in [MoveSetId::Expansion, MoveSetId::ExpShrink] {
            for spec in id.specs(&inst) {
                let sub = build_subproblem(&inst, &x, spec).unwrap();
                for e in &sub.problem.edges {
                    prop_assert!(e.submodular_excess() <= 0.0);
                }
            }
        }
    }

    /// Descent holds for every input: exact moves descend, truncated moves
    /// still descend on the original energy, and swap moves either solve
    /// exactly or refuse with a named edge.
    #[test]
    fn no_move_ever_ascends(seed in any::<u64>()) {
        let inst = generators::random_small(seed, 5, 4, false);
        let x = generators::random_labeling(&inst, seed ^ 0x6b43_a9b5)
            ;
        let before = inst.total_energy(&x).unwrap();
        for spec in all_specs(&inst) {
            match optimal_move(&inst, &x, spec, true, DEFAULT_EPS) {
                Ok(mv) => {
                    prop_assert!(mv.energy <= before, "{:?} ascended", spec);
                    prop_assert_eq!(mv.energy, inst.total_energy(&mv.labeling).unwrap());
                    prop_assert!(mv.changed == (mv.energy < before));
                }
                Err(Error::NotSubmodular { .. }) => {
                    let refusal_is_swap = matches!(spec, MoveSpec::Swap { .. });
                    prop_assert!(refusal_is_swap);
                }
                Err(other) => return Err(TestCaseError::fail(format!("{other:?}"))),
            }
        }
    }

    /// Shrinking toward the expanding state itself degenerates to a plain
    /// expansion: equal optimal energies for every state.
    #[test]
    fn degenerate_shrink_equals_expansion(seed in any::<u64>()) {
        let inst = generators::random_small(seed, 5, 4, true);
        let x = generators::random_labeling(&inst, seed ^ 0x2545_f491);
        for alpha in 0..inst.num_states() {
            let exp = optimal_move(&inst, &x, MoveSpec::Expansion { alpha }, false, DEFAULT_EPS)
                .unwrap();
            let deg = optimal_move(
                &inst,
                &x,
                MoveSpec::ExpShrink { alpha, beta: alpha },
                false,
                DEFAULT_EPS,
            )
            .unwrap();
            prop_assert_eq!(exp.energy, deg.energy);
            prop_assert_eq!(&exp.labeling, &deg.labeling);
        }
    }

    /// On triangle-satisfying tables the per-move table rewrite never
    /// touches a bit.
    #[test]
    fn truncation_is_identity_under_triangle(seed in any::<u64>()) {
        let inst = generators::random_small(seed, 5, 4, true);
        let x = generators::random_labeling(&inst, seed ^ 0x94d0_49bb);
        for id in [MoveSetId::Expansion, MoveSetId::ExpShrink] {
            for spec in id.specs(&inst) {
                let tr = truncate(&inst, &x, spec).unwrap();
                prop_assert!(!tr.modified);
                for (t, e) in tr.tables.iter().zip(inst.edges()) {
                    let same = t
                        .values()
                        .iter()
                        .zip(e.table.values())
                        .all(|(a, b)| a.to_bits() == b.to_bits());
                    prop_assert!(same);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// As labeling sets: single-node moves sit inside swaps, and swaps and
    /// expansions sit inside expand-and-shrink moves.
    #[test]
    fn move_sets_nest(seed in any::<u64>()) {
        let inst = generators::random_small(seed, 4, 3, true);
        let x = generators::random_labeling(&inst, seed ^ 0xb549_2649);
        let family = |id| -> HashSet<Labeling> {
            enumerate_move_set(&inst, &x, id).unwrap().into_iter().collect()
        };
        let icm = family(MoveSetId::Icm);
        let swap = family(MoveSetId::Swap);
        let expansion = family(MoveSetId::Expansion);
        let shrink = family(MoveSetId::ExpShrink);
        prop_assert!(icm.is_subset(&swap));
        prop_assert!(swap.is_subset(&shrink));
        prop_assert!(expansion.is_subset(&shrink));
    }

    /// The richer family never loses: expand-and-shrink at least matches
    /// swap, expansion, and their union on every instance and labeling.
    #[test]
    fn shrink_family_dominates(seed in any::<u64>()) {
        let inst = generators::random_small(seed, 4, 3, true);
        let x = generators::random_labeling(&inst, seed ^ 0x8acb_13df);
        for b in [MoveSetId::Swap, MoveSetId::Expansion, MoveSetId::SwapOrExpansion] {
            let d = dominance_report(&inst, &x, MoveSetId::ExpShrink, b, 0.0).unwrap();
            prop_assert!(d.leq);
        }
    }

    /// Sweeps descend monotonically and, with integer energies, accept at
    /// most initial-minus-final moves before converging.
    #[test]
    fn runs_descend_and_terminate(seed in any::<u64>(), method_pick in 0usize..6) {
        let inst = generators::random_small(seed, 5, 3, false);
        let x = generators::random_labeling(&inst, seed ^ 0x0bad_5eed);
        let method = [
            Method::ExpansionSweep,
            Method::ExpShrinkRandomBeta { seed },
            Method::ExpShrinkBetaPrev,
            Method::ExpShrinkBetaNext,
            Method::ExpShrinkAllBeta,
            Method::SwapSweep,
        ][method_pick];
        if method_pick == 5 {
            let swap_safe = inst.edges().iter().all(|e| {
                mrfmoves::check_pairwise_submodular(&e.table, 0.0).is_none()
            });
            prop_assume!(swap_safe);
        }
        let rep = run(&inst, &x, method, 400, DEFAULT_EPS).unwrap();
        prop_assert!(rep.converged);
        let mut prev = rep.initial_energy;
        for m in &rep.moves {
            prop_assert!(m.energy_after <= prev);
            prev = m.energy_after;
        }
        prop_assert_eq!(rep.final_energy, prev);
        prop_assert!(
            (rep.accepted_moves as f64) <= rep.initial_energy - rep.final_energy + 1e-9
        );
        if rep.truncation_used {
            prop_assert!(!instance_is_triangle(&inst, DEFAULT_EPS));
        }
    }

    /// Equal seeds reproduce the random-shrink schedule record for record.
    #[test]
    fn random_beta_schedule_is_reproducible(seed in any::<u64>(), run_seed in any::<u64>()) {
        let inst = generators::random_small(seed, 4, 3, true);
        let x = generators::random_labeling(&inst, seed ^ 0x7f4a_7c15);
        let method = Method::ExpShrinkRandomBeta { seed: run_seed };
        let a = run(&inst, &x, method, 100, DEFAULT_EPS).unwrap();
        let b = run(&inst, &x, method, 100, DEFAULT_EPS).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Generators are pure functions of their seed.
    #[test]
    fn generation_is_deterministic(seed in any::<u64>()) {
        let a = generators::random_small(seed, 6, 4, false);
        let b = generators::random_small(seed, 6, 4, false);
        prop_assert_eq!(a.content_hash(), b.content_hash());
        for (ea, eb) in a.edges().iter().zip(b.edges()) {
            prop_assert_eq!(ea.table.values(), eb.table.values());
        }
        let la = generators::random_labeling(&a, seed);
        let lb = generators::random_labeling(&b, seed);
        prop_assert_eq!(la, lb);
    }

    /// Projecting onto the triangle condition lands on it and stays put.
    #[test]
    fn triangle_projection_is_idempotent(
        entries in prop::collection::vec(0u32..=30, 9),
    ) {
        let mut t = PairwiseTable::from_fn(3, |a, b| {
            if a == b { 0.0 } else { entries[a * 3 + b] as f64 }
        });
        project_triangle(&mut t);
        prop_assert!(mrfmoves::check_triangle(&t, 0.0).is_none());
        let again = {
            let mut u = t.clone();
            project_triangle(&mut u);
            u
        };
        let same = t
            .values()
            .iter()
            .zip(again.values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        prop_assert!(same);
    }
}
