//! One learning device next to a stationary RSU that it only reaches every
//! few slots. Prints the learned action per state and the exported table.

use fuzzyq_offload::fuzzy::FuzzyController;
use fuzzyq_offload::mobility::{Route, TraceSample};
use fuzzyq_offload::qlearning::{AgentConfig, AgentParams, FuzzyQAgent};
use fuzzyq_offload::sim::{World, WorldConfig};
use fuzzyq_offload::strategies::Strategy;

fn shuttle(slots: u64) -> Route {
    // back and forth along a 3 km street, one RSU at the west end
    let samples = (0..=slots / 8)
        .map(|k| TraceSample {
            timestamp: k as f64 * 8.0 * 60.0,
            x: if k % 2 == 0 { 0.0 } else { 3000.0 },
            y: 0.0,
        })
        .collect();
    Route::new(0, samples)
}

fn main() -> fuzzyq_offload::Result<()> {
    let horizon = 3000;
    let cfg = WorldConfig::default();
    let params = AgentParams {
        epsilon0: 0.3,
        max_time: Some(horizon * 3 / 2),
        ..AgentParams::default()
    };
    let agent = FuzzyQAgent::new(
        AgentConfig::new(&params, horizon, cfg.delta, cfg.capacity),
        FuzzyController::default(),
    );
    let mut world = World::new(
        cfg,
        vec![shuttle(horizon)],
        &[(0.0, 0.0)],
        vec![Strategy::fuzzy_q(agent)],
    )?;
    let report = world.run(horizon);
    println!(
        "delivered {} of {}, 4G share {:.3}, delayed {:.3}, dropped {:.3}",
        report.delivered, report.generated, report.r_server, report.r_delay, report.r_drop
    );

    let table = world.strategies()[0].agent().expect("learning strategy").table();
    println!("{} states visited\n", table.states());

    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    let text = String::from_utf8(buf).expect("utf-8");
    for line in text.lines().take(13) {
        println!("{line}");
    }
    println!("...");
    Ok(())
}
