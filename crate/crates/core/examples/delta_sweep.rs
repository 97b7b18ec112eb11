//! How the freshness threshold moves the 4G share of the learning agent,
//! with greedy as the reference.

use fuzzyq_offload::experiment::{sweep, write_csv, ScenarioConfig, StrategyKind, SweepSpec, RESULT_HEADER};
use fuzzyq_offload::qlearning::AgentParams;
use serde_json::json;

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
    for strategy in [StrategyKind::Fuzzyq, StrategyKind::Greedy] {
        let spec = SweepSpec {
            axis: "delta".into(),
            values: [5, 10, 15, 20, 25].iter().map(|d| json!(d)).collect(),
            seeds: (1..=5).collect(),
            base: ScenarioConfig {
                strategy,
                scenario_id: strategy.as_str().into(),
                ..base.clone()
            },
        };
        let groups = sweep(&spec)?;
        let medians: Vec<_> = groups.iter().map(|g| &g.median).collect();
        write_csv(
            std::io::stdout().lock(),
            &RESULT_HEADER,
            &medians,
            strategy == StrategyKind::Fuzzyq,
        )?;
    }
    Ok(())
}
