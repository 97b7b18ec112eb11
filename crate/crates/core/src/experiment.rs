//! Scenario configuration and the experiment drivers behind the CLI: single
//! runs, the fixed-probability grid search and parameter sweeps.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fuzzy::{FuzzyController, FuzzySpec};
use crate::metrics::{EnergyModel, MetricsReport};
use crate::mobility::{load_traces, place_rsus, synth_traces, CenterRegion, Route, RsuPlan, Spacing, SynthConfig};
use crate::qlearning::{AgentConfig, AgentParams, FuzzyQAgent};
use crate::sim::{LinkModel, World, WorldConfig};
use crate::strategies::{FpConfig, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Fuzzyq,
    Greedy,
    Fp,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Fuzzyq => "fuzzyq",
            StrategyKind::Greedy => "greedy",
            StrategyKind::Fp => "fp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ranges {
    pub device: f64,
    pub rsu: f64,
}

impl Default for Ranges {
    fn default() -> Self {
        Self {
            device: 40.0,
            rsu: 250.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bandwidths {
    pub bw_4g: f64,
    pub bw_wifi: f64,
    pub bw_wired: f64,
}

impl Default for Bandwidths {
    fn default() -> Self {
        let l = LinkModel::default();
        Self {
            bw_4g: l.bw_4g,
            bw_wifi: l.bw_wifi,
            bw_wired: l.bw_wired,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Synthetic,
    File,
}

/// Street grid of the synthetic generator; device count, duration and
/// slot length come from the scenario itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub width_m: f64,
    pub height_m: f64,
    pub block_m: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Trace seed; the scenario seed when unset.
    pub seed: Option<u64>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let s = SynthConfig::default();
        Self {
            width_m: s.width_m,
            height_m: s.height_m,
            block_m: s.block_m,
            speed_min: s.speed_min,
            speed_max: s.speed_max,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSpec {
    pub source: TraceKind,
    pub path: Option<PathBuf>,
    /// Devices active for less than this many minutes are ignored.
    pub activity_threshold_min: f64,
    pub synthetic: SyntheticSpec,
}

impl Default for TraceSpec {
    fn default() -> Self {
        Self {
            source: TraceKind::Synthetic,
            path: None,
            activity_threshold_min: 90.0,
            synthetic: SyntheticSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsuSpec {
    pub spacing: Spacing,
    /// Dense-placement region; derived from the traces when unset.
    pub center: Option<CenterRegion>,
    /// Fixed positions (`rsu_id,x_m,y_m`) instead of placement.
    pub path: Option<PathBuf>,
    /// Placement seed; the scenario seed when unset.
    pub seed: Option<u64>,
}

/// Everything one run depends on. Missing keys take the base-scenario
/// values, so `{}` is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub seed: u64,
    pub strategy: StrategyKind,
    pub fp: FpConfig,
    /// Mb.
    pub packet_size: f64,
    pub ranges: Ranges,
    pub bandwidths: Bandwidths,
    pub slot_seconds: f64,
    /// Slots between two packets of one device.
    pub lambda_d: u64,
    /// Freshness threshold, slots.
    pub delta: f64,
    /// Queue capacity, Mb.
    pub capacity: f64,
    /// Device count for synthetic traces.
    pub n_devices: usize,
    /// Upper bound on RSUs kept from placement, in placement order. Unset
    /// keeps every RSU the placement walk produces.
    pub n_rsus: Option<usize>,
    pub horizon: u64,
    pub warmup_slots: u64,
    pub agent: AgentParams,
    /// Replaces the built-in membership tables and rule base.
    pub fuzzy: Option<FuzzySpec>,
    pub energy: EnergyModel,
    pub traces: TraceSpec,
    pub rsus: RsuSpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let link = LinkModel::default();
        Self {
            scenario_id: "base".into(),
            seed: 1,
            strategy: StrategyKind::Fuzzyq,
            fp: FpConfig::FP1,
            packet_size: 1.0,
            ranges: Ranges::default(),
            bandwidths: Bandwidths::default(),
            slot_seconds: link.slot_seconds,
            lambda_d: 1,
            delta: 10.0,
            capacity: 25.0,
            n_devices: 776,
            n_rsus: None,
            horizon: 1000,
            warmup_slots: 0,
            agent: AgentParams::default(),
            fuzzy: None,
            energy: EnergyModel::default(),
            traces: TraceSpec::default(),
            rsus: RsuSpec::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks every field and reports all offending keys at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut positive = |key: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{key} must be > 0, got {v}"));
            }
        };
        positive("packet_size", self.packet_size);
        positive("capacity", self.capacity);
        positive("slot_seconds", self.slot_seconds);
        positive("delta", self.delta);
        positive("ranges.rsu", self.ranges.rsu);
        positive("bandwidths.bw_4g", self.bandwidths.bw_4g);
        positive("bandwidths.bw_wifi", self.bandwidths.bw_wifi);
        positive("bandwidths.bw_wired", self.bandwidths.bw_wired);
        if !(self.ranges.device >= 0.0 && self.ranges.device.is_finite()) {
            errs.push(format!("ranges.device must be >= 0, got {}", self.ranges.device));
        }
        if self.packet_size > self.capacity {
            errs.push(format!(
                "packet_size ({}) exceeds capacity ({})",
                self.packet_size, self.capacity
            ));
        }
        if self.lambda_d == 0 {
            errs.push("lambda_d must be >= 1".into());
        }
        if self.warmup_slots > self.horizon {
            errs.push(format!(
                "warmup_slots ({}) exceeds horizon ({})",
                self.warmup_slots, self.horizon
            ));
        }
        for (key, v) in [
            ("agent.alpha", self.agent.alpha),
            ("agent.gamma", self.agent.gamma),
            ("agent.epsilon0", self.agent.epsilon0),
        ] {
            if !(0.0..=1.0).contains(&v) {
                errs.push(format!("{key} must be in [0, 1], got {v}"));
            }
        }
        if !(self.agent.penalty >= 0.0) {
            errs.push(format!("agent.penalty must be >= 0, got {}", self.agent.penalty));
        }
        if self.agent.max_time == Some(0) {
            errs.push("agent.max_time must be >= 1".into());
        }
        if self.strategy == StrategyKind::Fp {
            if let Err(e) = self.fp.validate() {
                errs.push(e);
            }
        }
        if let Some(spec) = &self.fuzzy {
            if let Err(e) = FuzzyController::from_spec(spec) {
                errs.push(format!("fuzzy: {e}"));
            }
        }
        match self.traces.source {
            TraceKind::File if self.traces.path.is_none() => {
                errs.push("traces.path is required when traces.source is \"file\"".into());
            }
            TraceKind::Synthetic => {
                if self.n_devices == 0 {
                    errs.push("n_devices must be >= 1".into());
                }
                if let Err(e) = self.synth_config().validate() {
                    errs.push(e);
                }
            }
            _ => {}
        }
        if let Err(e) = self.rsus.spacing.validate() {
            errs.push(e);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }

    pub fn link(&self) -> LinkModel {
        LinkModel {
            bw_4g: self.bandwidths.bw_4g,
            bw_wifi: self.bandwidths.bw_wifi,
            bw_wired: self.bandwidths.bw_wired,
            slot_seconds: self.slot_seconds,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        let s = &self.traces.synthetic;
        SynthConfig {
            n_devices: self.n_devices,
            width_m: s.width_m,
            height_m: s.height_m,
            block_m: s.block_m,
            duration_slots: self.horizon,
            slot_seconds: self.slot_seconds,
            speed_min: s.speed_min,
            speed_max: s.speed_max,
            seed: s.seed.unwrap_or(self.seed),
        }
    }

    /// Sets one field addressed by a dotted path (`delta`, `ranges.device`,
    /// `agent.epsilon0`, ...). `tx_range` is accepted for `ranges.device`.
    pub fn with_field(&self, path: &str, value: Value) -> Result<Self> {
        let path = if path == "tx_range" { "ranges.device" } else { path };
        let mut doc = serde_json::to_value(self)?;
        let pointer = format!("/{}", path.replace('.', "/"));
        let slot = doc
            .pointer_mut(&pointer)
            .ok_or_else(|| Error::UnknownAxis(path.to_string()))?;
        *slot = value;
        let cfg: Self = serde_json::from_value(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Traces and RSU positions a scenario runs on.
#[derive(Debug, Clone)]
pub struct Environment {
    pub routes: Vec<Route>,
    pub rsus: RsuPlan,
}

pub fn build_environment(cfg: &ScenarioConfig) -> Result<Environment> {
    let routes = match cfg.traces.source {
        TraceKind::Synthetic => synth_traces(&cfg.synth_config()),
        TraceKind::File => {
            let path = cfg.traces.path.as_deref().expect("validated");
            load_traces(path, cfg.traces.activity_threshold_min)?
        }
    };
    let center = cfg.rsus.center.unwrap_or_else(|| CenterRegion::from_routes(&routes));
    let mut rsus = match &cfg.rsus.path {
        Some(path) => RsuPlan {
            positions: RsuPlan::load_csv(path)?,
            center,
        },
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rsus.seed.unwrap_or(cfg.seed));
            rng.set_stream(u64::MAX);
            place_rsus(&routes, &center, &cfg.rsus.spacing, &mut rng)
        }
    };
    if let Some(m) = cfg.n_rsus {
        rsus.positions.truncate(m);
    }
    Ok(Environment { routes, rsus })
}

pub fn world_config(cfg: &ScenarioConfig, env: &Environment, record_packets: bool) -> WorldConfig {
    let time_origin = match cfg.traces.source {
        TraceKind::Synthetic => 0.0,
        TraceKind::File => env
            .routes
            .iter()
            .filter_map(|r| r.window().map(|w| w.0))
            .fold(f64::INFINITY, f64::min),
    };
    WorldConfig {
        packet_size: cfg.packet_size,
        capacity: cfg.capacity,
        device_range: cfg.ranges.device,
        rsu_range: cfg.ranges.rsu,
        link: cfg.link(),
        lambda_d: cfg.lambda_d,
        delta: cfg.delta,
        warmup_slots: cfg.warmup_slots,
        seed: cfg.seed,
        energy: cfg.energy,
        time_origin: if time_origin.is_finite() { time_origin } else { 0.0 },
        record_packets,
    }
}

pub fn make_strategy(cfg: &ScenarioConfig) -> Result<Strategy> {
    Ok(match cfg.strategy {
        StrategyKind::Greedy => Strategy::Greedy,
        StrategyKind::Fp => Strategy::Fp(cfg.fp),
        StrategyKind::Fuzzyq => {
            let fuzzy = match &cfg.fuzzy {
                Some(spec) => FuzzyController::from_spec(spec)?,
                None => FuzzyController::default(),
            };
            let agent_cfg = AgentConfig::new(&cfg.agent, cfg.horizon, cfg.delta, cfg.capacity);
            Strategy::fuzzy_q(FuzzyQAgent::new(agent_cfg, fuzzy))
        }
    })
}

/// A world ready to step, one independent strategy per device.
pub fn build_world(cfg: &ScenarioConfig, env: Environment, record_packets: bool) -> Result<World> {
    cfg.validate()?;
    let wcfg = world_config(cfg, &env, record_packets);
    let template = make_strategy(cfg)?;
    let strategies = vec![template; env.routes.len()];
    World::new(wcfg, env.routes, &env.rsus.positions, strategies)
}

/// Builds the environment, runs the full horizon and returns the report.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MetricsReport> {
    let env = build_environment(cfg)?;
    let mut world = build_world(cfg, env, false)?;
    Ok(world.run(cfg.horizon))
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    /// A seed, or `median` / `mean` for aggregate rows.
    pub seed: String,
    pub strategy: String,
    pub lambda_d: u64,
    pub delta: f64,
    pub packet_size: f64,
    pub tx_range: f64,
    pub r_drop: f64,
    pub r_delay: f64,
    pub r_server: f64,
    pub r_rsu: f64,
    pub energy_total_j: f64,
    pub energy_per_delivered_j: f64,
    pub contact_rate: f64,
}

pub const RESULT_HEADER: [&str; 14] = [
    "scenario_id",
    "seed",
    "strategy",
    "lambda_d",
    "delta",
    "packet_size",
    "tx_range",
    "r_drop",
    "r_delay",
    "r_server",
    "r_rsu",
    "energy_total_j",
    "energy_per_delivered_j",
    "contact_rate",
];

impl ResultRow {
    pub fn new(cfg: &ScenarioConfig, report: &MetricsReport) -> Self {
        Self {
            scenario_id: cfg.scenario_id.clone(),
            seed: cfg.seed.to_string(),
            strategy: cfg.strategy.as_str().into(),
            lambda_d: cfg.lambda_d,
            delta: cfg.delta,
            packet_size: cfg.packet_size,
            tx_range: cfg.ranges.device,
            r_drop: report.r_drop,
            r_delay: report.r_delay,
            r_server: report.r_server,
            r_rsu: report.r_rsu,
            energy_total_j: report.energy_total,
            energy_per_delivered_j: report.energy_per_delivered,
            contact_rate: report.contact_rate,
        }
    }

    fn metrics(&self) -> [f64; 7] {
        [
            self.r_drop,
            self.r_delay,
            self.r_server,
            self.r_rsu,
            self.energy_total_j,
            self.energy_per_delivered_j,
            self.contact_rate,
        ]
    }

    fn with_metrics(&self, seed: &str, m: [f64; 7]) -> Self {
        Self {
            seed: seed.into(),
            r_drop: m[0],
            r_delay: m[1],
            r_server: m[2],
            r_rsu: m[3],
            energy_total_j: m[4],
            energy_per_delivered_j: m[5],
            contact_rate: m[6],
            ..self.clone()
        }
    }
}

/// Appends serialized records to `path`, writing `header` only when the
/// file is new or empty.
pub fn append_csv<S: Serialize>(path: &Path, header: &[&str], rows: &[S]) -> Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    write_csv(file, header, rows, fresh)
}

pub fn write_csv<W: Write, S: Serialize>(out: W, header: &[&str], rows: &[S], with_header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if with_header {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport<'a> {
    pub scenario: &'a ScenarioConfig,
    pub metrics: &'a MetricsReport,
}

pub fn write_json_report(path: &Path, cfg: &ScenarioConfig, report: &MetricsReport) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(
        f,
        &RunReport {
            scenario: cfg,
            metrics: report,
        },
    )?;
    Ok(())
}

/// One cell of the fixed-probability grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub p_keep: f64,
    pub p_server: f64,
    pub p_rsu: f64,
    pub p_sensor: f64,
    pub r_drop: f64,
    pub r_delay: f64,
    pub r_server: f64,
    pub r_rsu: f64,
}

pub const GRID_HEADER: [&str; 8] = [
    "p_keep", "p_server", "p_rsu", "p_sensor", "r_drop", "r_delay", "r_server", "r_rsu",
];

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Sorted by drop rate, then 4G share.
    pub rows: Vec<GridRow>,
    /// `(p_keep, p_rsu, p_sensor)` combinations that sum above one.
    pub skipped: Vec<(f64, f64, f64)>,
}

/// Runs the base scenario under every feasible `(p_keep, p_rsu, p_sensor)`
/// drawn from `values`, with `p_server` taking the remaining mass.
pub fn grid_search_fp(base: &ScenarioConfig, values: &[f64]) -> Result<GridResult> {
    let env = build_environment(base)?;
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for &k in values {
        for &r in values {
            for &s in values {
                match FpConfig::from_axes(k, r, s) {
                    Some(fp) => cells.push(fp),
                    None => skipped.push((k, r, s)),
                }
            }
        }
    }
    let reports: Vec<Result<(FpConfig, MetricsReport)>> = cells
        .par_iter()
        .map(|&fp| {
            let cfg = ScenarioConfig {
                strategy: StrategyKind::Fp,
                fp,
                ..base.clone()
            };
            let mut world = build_world(&cfg, env.clone(), false)?;
            Ok((fp, world.run(cfg.horizon)))
        })
        .collect();
    let mut rows = Vec::with_capacity(reports.len());
    for r in reports {
        let (fp, m) = r?;
        rows.push(GridRow {
            p_keep: fp.p_keep,
            p_server: fp.p_server,
            p_rsu: fp.p_rsu,
            p_sensor: fp.p_sensor,
            r_drop: m.r_drop,
            r_delay: m.r_delay,
            r_server: m.r_server,
            r_rsu: m.r_rsu,
        });
    }
    rows.sort_by(|a, b| a.r_drop.total_cmp(&b.r_drop).then(a.r_server.total_cmp(&b.r_server)));
    Ok(GridResult { rows, skipped })
}

fn default_seeds() -> Vec<u64> {
    (1..=5).collect()
}

/// One axis varied over a list of values, each value replicated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted field path into the scenario, e.g. `delta` or `ranges.device`.
    pub axis: String,
    pub values: Vec<Value>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub base: ScenarioConfig,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Per-value results of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGroup {
    pub value: Value,
    pub runs: Vec<ResultRow>,
    pub median: ResultRow,
    pub mean: ResultRow,
}

impl SweepGroup {
    /// Seed rows followed by the median and mean rows.
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.runs.iter().chain([&self.median, &self.mean])
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn aggregate(runs: &[ResultRow]) -> (ResultRow, ResultRow) {
    let mut med = [0.0; 7];
    let mut avg = [0.0; 7];
    for k in 0..7 {
        let mut col: Vec<f64> = runs.iter().map(|r| r.metrics()[k]).collect();
        avg[k] = col.iter().sum::<f64>() / col.len().max(1) as f64;
        med[k] = median(&mut col);
    }
    (runs[0].with_metrics("median", med), runs[0].with_metrics("mean", avg))
}

/// Runs every (value, seed) cell in parallel and returns groups in value
/// order, runs in seed order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepGroup>> {
    if spec.values.is_empty() || spec.seeds.is_empty() {
        return Err(Error::InvalidConfig(vec![
            "sweep needs at least one value and one seed".into(),
        ]));
    }
    let mut cells = Vec::new();
    for v in &spec.values {
        let label = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let at_value = spec.base.with_field(&spec.axis, v.clone())?;
        for &seed in &spec.seeds {
            cells.push(ScenarioConfig {
                seed,
                scenario_id: format!("{}:{}={}", spec.base.scenario_id, spec.axis, label),
                ..at_value.clone()
            });
        }
    }
    let rows: Vec<Result<ResultRow>> = cells
        .par_iter()
        .map(|cfg| run_scenario(cfg).map(|r| ResultRow::new(cfg, &r)))
        .collect();
    let rows: Vec<ResultRow> = rows.into_iter().collect::<Result<_>>()?;
    Ok(spec
        .values
        .iter()
        .zip(rows.chunks(spec.seeds.len()))
        .map(|(v, runs)| {
            let (median, mean) = aggregate(runs);
            SweepGroup {
                value: v.clone(),
                runs: runs.to_vec(),
                median,
                mean,
            }
        })
        .collect())
}
