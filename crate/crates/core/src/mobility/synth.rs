use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trace::{Route, TraceSample};

/// Random-waypoint movement on a Manhattan street grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_devices: usize,
    pub width_m: f64,
    pub height_m: f64,
    /// Distance between parallel streets.
    pub block_m: f64,
    pub duration_slots: u64,
    pub slot_seconds: f64,
    /// Meters per second, drawn uniformly per trip.
    pub speed_min: f64,
    pub speed_max: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_devices: 776,
            width_m: 12_000.0,
            height_m: 12_000.0,
            block_m: 400.0,
            duration_slots: 2880,
            slot_seconds: 60.0,
            speed_min: 3.0,
            speed_max: 12.0,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut errs = Vec::new();
        if self.n_devices == 0 {
            errs.push("traces.synthetic.n_devices must be >= 1");
        }
        if !(self.width_m >= 0.0 && self.height_m >= 0.0) {
            errs.push("traces.synthetic.width_m/height_m must be >= 0");
        }
        if !(self.block_m > 0.0) {
            errs.push("traces.synthetic.block_m must be > 0");
        }
        if !(self.slot_seconds > 0.0) {
            errs.push("traces.synthetic.slot_seconds must be > 0");
        }
        if !(self.speed_min >= 0.0 && self.speed_min <= self.speed_max && self.speed_max.is_finite()) {
            errs.push("traces.synthetic: need 0 <= speed_min <= speed_max");
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs.join("; "))
        }
    }
}

pub fn synth_traces(cfg: &SynthConfig) -> Vec<Route> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nx = (cfg.width_m / cfg.block_m).floor() as u64 + 1;
    let ny = (cfg.height_m / cfg.block_m).floor() as u64 + 1;
    let end = cfg.duration_slots as f64 * cfg.slot_seconds;
    (0..cfg.n_devices)
        .map(|i| {
            let samples = drive(cfg, nx, ny, end, &mut rng);
            Route::new(i as u64, samples)
        })
        .collect()
}

fn drive(cfg: &SynthConfig, nx: u64, ny: u64, end: f64, rng: &mut ChaCha8Rng) -> Vec<TraceSample> {
    let node = |rng: &mut ChaCha8Rng| (rng.gen_range(0..nx), rng.gen_range(0..ny));
    let at = |n: (u64, u64)| (n.0 as f64 * cfg.block_m, n.1 as f64 * cfg.block_m);

    let mut here = node(rng);
    let mut pos = at(here);
    let mut t = 0.0;
    let mut out = vec![TraceSample {
        timestamp: 0.0,
        x: pos.0,
        y: pos.1,
    }];
    while t < end {
        let speed = if cfg.speed_min < cfg.speed_max {
            rng.gen_range(cfg.speed_min..=cfg.speed_max)
        } else {
            cfg.speed_min
        };
        let dest = node(rng);
        if speed <= 0.0 || (nx == 1 && ny == 1) {
            break;
        }
        if dest == here {
            continue;
        }
        let target = at(dest);
        let corner = if rng.gen_bool(0.5) {
            (target.0, pos.1)
        } else {
            (pos.0, target.1)
        };
        for leg in [corner, target] {
            let len = (leg.0 - pos.0).abs() + (leg.1 - pos.1).abs();
            if len == 0.0 {
                continue;
            }
            let arrive = t + len / speed;
            if arrive >= end {
                let f = (end - t) / (arrive - t);
                pos = (pos.0 + f * (leg.0 - pos.0), pos.1 + f * (leg.1 - pos.1));
                t = end;
                break;
            }
            pos = leg;
            t = arrive;
            out.push(TraceSample {
                timestamp: t,
                x: pos.0,
                y: pos.1,
            });
        }
        here = dest;
    }
    if out.last().is_none_or(|s| s.timestamp < end) {
        out.push(TraceSample {
            timestamp: end,
            x: pos.0,
            y: pos.1,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            n_devices: 5,
            width_m: 2000.0,
            height_m: 1000.0,
            block_m: 250.0,
            duration_slots: 120,
            seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(synth_traces(&small(3)), synth_traces(&small(3)));
        assert_ne!(synth_traces(&small(3)), synth_traces(&small(4)));
    }

    #[test]
    fn zero_speed_is_stationary() {
        let cfg = SynthConfig {
            speed_min: 0.0,
            speed_max: 0.0,
            ..small(1)
        };
        for r in synth_traces(&cfg) {
            let first = r.samples()[0];
            assert!(r.samples().iter().all(|s| (s.x, s.y) == (first.x, first.y)));
            assert_eq!(r.window(), Some((0.0, 120.0 * 60.0)));
        }
    }

    #[test]
    fn routes_stay_on_streets_and_cover_the_horizon() {
        let cfg = small(8);
        for r in synth_traces(&cfg) {
            assert_eq!(r.window(), Some((0.0, 120.0 * 60.0)));
            for w in r.samples().windows(2) {
                assert!(w[0].timestamp < w[1].timestamp);
                // axis-aligned legs only
                assert!(w[0].x == w[1].x || w[0].y == w[1].y);
            }
            for s in r.samples() {
                assert!((0.0..=2000.0).contains(&s.x) && (0.0..=1000.0).contains(&s.y));
                let on_street = |v: f64| (v / 250.0 - (v / 250.0).round()).abs() < 1e-9;
                assert!(on_street(s.x) || on_street(s.y));
            }
        }
    }
}
