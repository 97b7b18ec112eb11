//! Device movement: recorded traces, RSU placement along routes, and a
//! seeded synthetic generator.

mod rsu;
mod synth;
mod trace;

pub use rsu::{place_rsus, CenterRegion, RsuPlan, Spacing};
pub use synth::{synth_traces, SynthConfig};
pub use trace::{load_traces, position_at, read_traces, write_traces, Route, TraceSample, TRACE_HEADER};
