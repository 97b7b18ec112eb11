//! Trace files, interpolation and RSU placement.

use fuzzyq_offload::mobility::{
    load_traces, place_rsus, synth_traces, write_traces, CenterRegion, Route, Spacing, SynthConfig, TraceSample,
};
use fuzzyq_offload::spatial::Point;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synth(seed: u64, n: usize) -> Vec<Route> {
    synth_traces(&SynthConfig {
        n_devices: n,
        width_m: 4000.0,
        height_m: 3000.0,
        block_m: 250.0,
        duration_slots: 240,
        seed,
        ..SynthConfig::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loading_written_traces_is_idempotent(seed in any::<u64>(), n in 1usize..12) {
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.csv");
        let second = dir.path().join("b.csv");
        write_traces(&synth(seed, n), std::fs::File::create(&first).unwrap()).unwrap();
        let once = load_traces(&first, 90.0).unwrap();
        write_traces(&once, std::fs::File::create(&second).unwrap()).unwrap();
        let twice = load_traces(&second, 90.0).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    }

    #[test]
    fn positions_move_continuously(seed in any::<u64>(), t in 0.0..14_000.0f64, dt in 0.0..1.0f64) {
        // speeds are at most 12 m/s
        for r in synth(seed, 3) {
            if let (Some(a), Some(b)) = (r.position_at_time(t), r.position_at_time(t + dt)) {
                let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                prop_assert!(d <= 12.0 * dt + 1e-6);
            }
        }
    }

    #[test]
    fn consecutive_rsus_respect_their_gap(
        legs in prop::collection::vec((0.0..6000.0f64, any::<bool>()), 1..6),
        cx in -20_000.0..20_000.0f64,
        radius in 0.0..8000.0f64,
        seed in any::<u64>(),
    ) {
        // a monotone staircase never comes back near an RSU it placed
        let mut pts = vec![(0.0, 0.0)];
        for (len, horizontal) in legs {
            let &(x, y) = pts.last().unwrap();
            pts.push(if horizontal { (x + len + 1.0, y) } else { (x, y + len + 1.0) });
        }
        let samples = pts
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| TraceSample { timestamp: k as f64 * 100.0, x, y })
            .collect();
        let route = Route::new(0, samples);
        let center = CenterRegion { x: cx, y: 0.0, radius };
        let spacing = Spacing::default();
        let plan = place_rsus(&[route], &center, &spacing, &mut ChaCha8Rng::seed_from_u64(seed));

        let along: Vec<f64> = plan.positions.iter().map(|&p| arc_position(&pts, p)).collect();
        prop_assert_eq!(along[0], 0.0);
        for (w, p) in along.windows(2).zip(&plan.positions) {
            let (lo, hi) = if center.contains(*p) { spacing.center } else { spacing.suburb };
            let gap = w[1] - w[0];
            prop_assert!(gap >= lo - 1e-6 && gap <= hi + 1e-6, "gap {} outside [{}, {}]", gap, lo, hi);
        }
        let total: f64 = pts.windows(2).map(|w| dist(w[0], w[1])).sum();
        let (_, widest) = spacing.suburb;
        prop_assert!(total - along.last().unwrap() <= widest + 1e-6);
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Arc length from the route start to a point lying on the polyline.
fn arc_position(pts: &[Point], p: Point) -> f64 {
    let mut walked = 0.0;
    for w in pts.windows(2) {
        let seg = dist(w[0], w[1]);
        let (to_p, from_p) = (dist(w[0], p), dist(p, w[1]));
        if (to_p + from_p - seg).abs() < 1e-6 {
            return walked + to_p;
        }
        walked += seg;
    }
    panic!("{p:?} is not on the route");
}

#[test]
fn scale_parity_with_the_reference_fleet() {
    let cfg = SynthConfig {
        duration_slots: 2880,
        ..SynthConfig::default()
    };
    let routes = synth_traces(&cfg);
    assert_eq!(routes.len(), 776);
    assert!(routes.iter().all(|r| r.window() == Some((0.0, 2880.0 * 60.0))));
}
