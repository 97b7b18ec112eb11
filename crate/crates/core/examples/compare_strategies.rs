//! Greedy, fixed-probability and fuzzy Q-learning offloading on the same
//! synthetic city, five seeds each.

use fuzzyq_offload::experiment::{run_scenario, ScenarioConfig, StrategyKind};
use fuzzyq_offload::qlearning::AgentParams;
use rayon::prelude::*;

fn main() -> fuzzyq_offload::Result<()> {
    let base = ScenarioConfig {
        n_devices: 20,
        horizon: 2880,
        agent: AgentParams {
            epsilon0: 0.3,
            max_time: Some(4320),
            ..AgentParams::default()
        },
        ..ScenarioConfig::default()
    };
    println!(
        "{:<8} {:>5} {:>8} {:>8} {:>8} {:>10}",
        "strategy", "seed", "r_drop", "r_delay", "r_server", "energy_J"
    );
    for strategy in [StrategyKind::Greedy, StrategyKind::Fp, StrategyKind::Fuzzyq] {
        let rows: Vec<_> = (1..=5u64)
            .into_par_iter()
            .map(|seed| {
                let cfg = ScenarioConfig {
                    strategy,
                    seed,
                    ..base.clone()
                };
                run_scenario(&cfg).map(|r| (seed, r))
            })
            .collect::<Result<_, _>>()?;
        for (seed, r) in rows {
            println!(
                "{:<8} {:>5} {:>8.4} {:>8.4} {:>8.4} {:>10.3}",
                strategy.as_str(),
                seed,
                r.r_drop,
                r.r_delay,
                r.r_server,
                r.energy_total
            );
        }
    }
    Ok(())
}
