//! Network contact rate as the device radio range grows.

use fuzzyq_offload::metrics::contact_rate;
use fuzzyq_offload::mobility::{synth_traces, SynthConfig};

fn main() {
    let cfg = SynthConfig {
        n_devices: 60,
        width_m: 3000.0,
        height_m: 3000.0,
        block_m: 300.0,
        duration_slots: 600,
        ..SynthConfig::default()
    };
    let routes = synth_traces(&cfg);
    println!("{:>8} {:>12}", "range_m", "contact_rate");
    for range in [10.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0] {
        let ranges = vec![range; routes.len()];
        let rate = contact_rate(&routes, &ranges, cfg.duration_slots, cfg.slot_seconds, 0.0);
        println!("{range:>8} {rate:>12.4}");
    }
}
