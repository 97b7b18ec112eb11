//! Fuzzy controller, Q-learning and baseline strategies checked against
//! independent oracles and randomized inputs.

use fuzzyq_offload::fuzzy::{defuzzify_cog, FuzzyController, Label, TrapezoidalMF, ELAPSED_TERMS, RESOURCE_TERMS};
use fuzzyq_offload::qlearning::{select_action, update, Action, AgentConfig, AgentParams, QTable, StateKey};
use fuzzyq_offload::strategies::{greedy_decide, FpConfig, NeighborInfo, Observation, PacketHead, RsuContact};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mfs(table: [[f64; 4]; 3]) -> [TrapezoidalMF; 3] {
    table.map(|[a, b, c, d]| TrapezoidalMF::new(a, b, c, d).unwrap())
}

/// Midpoint rule with a very fine grid; independent of the closed form.
fn centroid_by_quadrature(mf: &TrapezoidalMF) -> f64 {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        let m = mf.membership(x);
        num += x * m;
        den += m;
    }
    num / den
}

#[test]
fn centroids_match_quadrature() {
    let fc = FuzzyController::default();
    for term in fc.theta_variable().terms() {
        let q = centroid_by_quadrature(&term.mf);
        assert!((defuzzify_cog(term) - q).abs() < 1e-9, "{:?}", term.label);
    }
    let [l, m, h] = fc.crisp_outputs();
    assert!((l - 0.176_190_476_190_476).abs() < 1e-12);
    assert_eq!(m, 0.5);
    assert!((l + h - 1.0).abs() < 1e-15);
}

#[test]
fn rule_firing_examples() {
    let fc = FuzzyController::default();
    let s = fc.fire_rules(0.1, 0.9);
    let rules = fc.rule_base().rules();
    for (r, &v) in rules.iter().zip(&s) {
        match (r.resource, r.elapsed) {
            (Label::Low, Label::High) => assert_eq!(v, 1.0),
            (Label::Medium | Label::High, _) => assert_eq!(v, 0.0),
            _ => {}
        }
    }
    let s = fc.fire_rules(1.0, 0.0);
    let hl = rules
        .iter()
        .position(|r| (r.resource, r.elapsed) == (Label::High, Label::Low))
        .unwrap();
    assert_eq!(s[hl], 1.0);

    let s = fc.fire_rules(0.25, 0.45);
    for (r, &v) in rules.iter().zip(&s) {
        let half = matches!(r.resource, Label::Low | Label::Medium) && matches!(r.elapsed, Label::Low | Label::Medium);
        assert!((v - if half { 0.5 } else { 0.0 }).abs() < 1e-12, "{r:?} {v}");
    }
}

proptest! {
    #[test]
    fn input_terms_cover_the_unit_interval(x in 0.0..=1.0f64) {
        for table in [RESOURCE_TERMS, ELAPSED_TERMS] {
            prop_assert!(mfs(table).iter().any(|m| m.membership(x) > 0.0));
        }
    }

    #[test]
    fn memberships_are_lipschitz(x in 0.0..1.0f64, h in 0.0..1e-3f64) {
        let y = (x + h).min(1.0);
        // steepest edge of the shipped tables rises over 0.1
        for table in [RESOURCE_TERMS, ELAPSED_TERMS] {
            for m in mfs(table) {
                prop_assert!((m.membership(y) - m.membership(x)).abs() <= 10.0 * (y - x) + 1e-12);
            }
        }
    }

    #[test]
    fn theta_is_one_of_three_constants(free in -5.0..40.0f64, cap in 1.0..40.0f64, waited in -1.0..80.0f64, delta in 1.0..30.0f64) {
        let fc = FuzzyController::default();
        let theta = fc.compute_theta(free, cap, waited, delta);
        prop_assert!(fc.crisp_outputs().contains(&theta));
    }

    #[test]
    fn starved_and_stale_outranks_idle_and_fresh(cap in 1.0..40.0f64, delta in 1.0..30.0f64) {
        let fc = FuzzyController::default();
        prop_assert!(fc.compute_theta(0.1 * cap, cap, 0.9 * delta, delta) >= fc.compute_theta(cap, cap, 0.0, delta));
    }

    #[test]
    fn greedy_choice_ignores_positive_scaling(row in prop::array::uniform4(-50.0..50.0f64), k in 0.01..100.0f64, b in -100.0..100.0f64) {
        let s = StateKey { elapsed_slots: 0, local_free: 1, neighbor_free: None, rsu_in_range: true };
        let mut q = QTable::new();
        let mut scaled = QTable::new();
        for (a, v) in Action::ALL.into_iter().zip(row) {
            q.set(s, a, v);
            scaled.set(s, a, k * v + b);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let plain = select_action(&q, &s, 0.0, &mut rng);
        // an exact tie can split under rounding; only compare clear winners
        let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if row.iter().filter(|&&v| top - v < 1e-6).count() == 1 {
            prop_assert_eq!(plain, select_action(&scaled, &s, 0.0, &mut rng));
        }
    }

    #[test]
    fn update_contracts_toward_target(old in -100.0..100.0f64, r in -100.0..100.0f64, next in -100.0..100.0f64, alpha in 0.0..=1.0f64, gamma in 0.0..=1.0f64) {
        let cfg = AgentConfig { alpha, gamma, ..AgentConfig::new(&AgentParams::default(), 10, 10.0, 25.0) };
        let s = StateKey { elapsed_slots: 0, local_free: 5, neighbor_free: Some(3), rsu_in_range: false };
        let n = StateKey { elapsed_slots: 1, ..s };
        let mut q = QTable::new();
        q.set(s, Action::SendNeighbor, old);
        for a in Action::ALL {
            q.set(n, a, next);
        }
        update(&mut q, s, Action::SendNeighbor, r, Some(&n), &cfg);
        let target = r + gamma * next;
        let got = (q.get(&s, Action::SendNeighbor) - target).abs();
        prop_assert!((got - (1.0 - alpha) * (old - target).abs()).abs() < 1e-9);
    }

    #[test]
    fn greedy_is_pure_and_never_keeps(
        rsu in proptest::option::of(0.0..250.0f64),
        nb in proptest::option::of((0.0..40.0f64, proptest::option::of(0.0..5000.0f64))),
        own in proptest::option::of(0.0..5000.0f64),
    ) {
        let obs = Observation {
            device: 0,
            packet: Some(PacketHead { id: 1, gen_slot: 0, size: 1.0 }),
            elapsed: 0.0,
            free: 10.0,
            neighbor: nb.map(|(distance, rsu_distance)| NeighborInfo { id: 1, distance, free: 5.0, rsu_distance }),
            rsu: rsu.map(|distance| RsuContact { id: 0, distance }),
            rsu_distance: own,
            slot: 0,
        };
        let a = greedy_decide(&obs);
        prop_assert_ne!(a, Action::Keep);
        prop_assert_eq!(a, greedy_decide(&obs));
    }
}

/// Every count within 3σ of its binomial expectation.
fn assert_frequencies(counts: [u64; 4], probs: [f64; 4], n: u64) {
    for (c, p) in counts.iter().zip(probs) {
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - mean).abs() <= 3.0 * sd, "{counts:?} vs {probs:?}");
    }
}

#[test]
fn full_exploration_is_uniform() {
    let s = StateKey {
        elapsed_slots: 0,
        local_free: 0,
        neighbor_free: None,
        rsu_in_range: false,
    };
    let mut q = QTable::new();
    q.set(s, Action::SendRsu, 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = [0u64; 4];
    for _ in 0..10_000 {
        counts[select_action(&q, &s, 1.0, &mut rng).index()] += 1;
    }
    assert_frequencies(counts, [0.25; 4], 10_000);
}

#[test]
fn fixed_probability_draws_follow_their_table() {
    for fp in [FpConfig::FP1, FpConfig::FP2, FpConfig::FP3] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0u64; 4];
        for _ in 0..10_000 {
            counts[fp.draw(&mut rng).index()] += 1;
        }
        assert_frequencies(counts, fp.probabilities(), 10_000);
    }
}
