//! Ranks fixed-probability strategies by drop rate, then 4G share.

use fuzzyq_offload::experiment::{grid_search_fp, ScenarioConfig};

fn main() -> fuzzyq_offload::Result<()> {
    let base = ScenarioConfig {
        n_devices: 20,
        horizon: 720,
        ..ScenarioConfig::default()
    };
    let grid = grid_search_fp(&base, &[0.1, 0.2, 0.3, 0.4, 0.5])?;
    println!("{} combinations run, {} skipped\n", grid.rows.len(), grid.skipped.len());
    println!(
        "{:>6} {:>6} {:>6} {:>6} | {:>7} {:>7} {:>8}",
        "keep", "server", "rsu", "sensor", "r_drop", "r_delay", "r_server"
    );
    for r in grid.rows.iter().take(10) {
        println!(
            "{:>6.1} {:>6.1} {:>6.1} {:>6.1} | {:>7.4} {:>7.4} {:>8.4}",
            r.p_keep, r.p_server, r.p_rsu, r.p_sensor, r.r_drop, r.r_delay, r.r_server
        );
    }
    Ok(())
}
