//! Generates street-grid traces, places RSUs along them and writes both
//! as CSV into a directory (default: the system temp dir).

use std::fs::File;
use std::path::PathBuf;

use fuzzyq_offload::mobility::{
    load_traces, place_rsus, synth_traces, write_traces, CenterRegion, Spacing, SynthConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fuzzyq_offload::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let cfg = SynthConfig {
        n_devices: 50,
        duration_slots: 720,
        ..SynthConfig::default()
    };
    let routes = synth_traces(&cfg);

    let center = CenterRegion::from_routes(&routes);
    let plan = place_rsus(&routes, &center, &Spacing::default(), &mut ChaCha8Rng::seed_from_u64(7));
    let inside = plan.positions.iter().filter(|p| center.contains(**p)).count();
    println!(
        "{} devices, {} RSUs ({} in the {:.0} m center disc)",
        routes.len(),
        plan.positions.len(),
        inside,
        center.radius
    );

    let traces = dir.join("synthetic_traces.csv");
    let rsus = dir.join("synthetic_rsus.csv");
    write_traces(&routes, File::create(&traces).expect("create trace file"))?;
    plan.write_csv(File::create(&rsus).expect("create rsu file"))?;

    // read back with the default activity filter
    let back = load_traces(&traces, 90.0)?;
    println!("wrote {} and {}", traces.display(), rsus.display());
    println!("{} devices pass the 90 minute activity filter", back.len());
    Ok(())
}
