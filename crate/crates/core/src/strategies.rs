//! Offloading policies behind one decision interface.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlearning::{Action, DeviceView, Feedback, FuzzyQAgent, StateKey};
use crate::sim::ExecutionOutcome;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketHead {
    pub id: u64,
    pub gen_slot: u64,
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborInfo {
    pub id: usize,
    pub distance: f64,
    /// Free queue capacity of the neighbor in MB.
    pub free: f64,
    /// Distance from the neighbor to its own nearest RSU.
    pub rsu_distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsuContact {
    pub id: usize,
    pub distance: f64,
}

/// Everything a device may look at when deciding about one packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub device: usize,
    pub packet: Option<PacketHead>,
    /// Slots the packet has waited so far.
    pub elapsed: f64,
    /// Free queue capacity in MB.
    pub free: f64,
    /// Nearest other device within this device's range.
    pub neighbor: Option<NeighborInfo>,
    /// Nearest RSU covering this device.
    pub rsu: Option<RsuContact>,
    /// Distance to the nearest RSU, in range or not.
    pub rsu_distance: Option<f64>,
    pub slot: u64,
}

impl Observation {
    pub fn view(&self) -> DeviceView {
        DeviceView {
            elapsed: self.elapsed,
            free: self.free,
            neighbor_free: self.neighbor.map(|n| n.free),
            rsu_in_range: self.rsu.is_some(),
        }
    }
}

/// Fixed per-decision action probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpConfig {
    pub p_keep: f64,
    pub p_server: f64,
    pub p_rsu: f64,
    pub p_sensor: f64,
}

impl FpConfig {
    pub const FP1: FpConfig = FpConfig::raw(0.1, 0.7, 0.1, 0.1);
    pub const FP2: FpConfig = FpConfig::raw(0.1, 0.5, 0.3, 0.1);
    pub const FP3: FpConfig = FpConfig::raw(0.1, 0.3, 0.5, 0.1);

    const fn raw(p_keep: f64, p_server: f64, p_rsu: f64, p_sensor: f64) -> Self {
        Self {
            p_keep,
            p_server,
            p_rsu,
            p_sensor,
        }
    }

    pub fn new(p_keep: f64, p_server: f64, p_rsu: f64, p_sensor: f64) -> Result<Self> {
        let fp = Self::raw(p_keep, p_server, p_rsu, p_sensor);
        fp.validate().map_err(|e| Error::InvalidConfig(vec![e]))?;
        Ok(fp)
    }

    /// Grid-search form: `p_server` takes whatever mass is left. `None`
    /// when the three given probabilities already exceed one.
    pub fn from_axes(p_keep: f64, p_rsu: f64, p_sensor: f64) -> Option<Self> {
        // snap grid arithmetic like 1 - 0.3 to the decimal it stands for
        let rest = ((1.0 - p_keep - p_rsu - p_sensor) * 1e12).round() / 1e12;
        if rest < -1e-9 {
            return None;
        }
        Self::new(p_keep, rest.max(0.0), p_rsu, p_sensor).ok()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let ps = self.probabilities();
        if ps.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(format!("fp: probabilities must be non-negative, got {ps:?}"));
        }
        let sum: f64 = ps.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(format!("fp: probabilities must sum to 1, got {sum}"));
        }
        Ok(())
    }

    /// In [`Action::ALL`] order.
    pub fn probabilities(&self) -> [f64; 4] {
        [self.p_keep, self.p_server, self.p_rsu, self.p_sensor]
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, p) in Action::ALL.into_iter().zip(self.probabilities()) {
            acc += p;
            if u < acc {
                return a;
            }
        }
        // u landed in rounding slack above the cumulative sum
        Action::ALL
            .into_iter()
            .zip(self.probabilities())
            .rev()
            .find(|(_, p)| *p > 0.0)
            .map_or(Action::SendServer, |(a, _)| a)
    }
}

impl Default for FpConfig {
    fn default() -> Self {
        FpConfig::FP1
    }
}

impl fmt::Display for FpConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fp(keep={}, server={}, rsu={}, sensor={})",
            self.p_keep, self.p_server, self.p_rsu, self.p_sensor
        )
    }
}

/// RSU if covered, else a neighbor that is closer to an RSU than we are,
/// else straight to the server.
pub fn greedy_decide(obs: &Observation) -> Action {
    if obs.rsu.is_some() {
        return Action::SendRsu;
    }
    let nearer = match (obs.neighbor.and_then(|n| n.rsu_distance), obs.rsu_distance) {
        (Some(theirs), Some(ours)) => theirs < ours,
        _ => false,
    };
    if nearer {
        Action::SendNeighbor
    } else {
        Action::SendServer
    }
}

/// What happened to a packet after a device acted on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub packet: u64,
    pub chosen: Action,
    pub outcome: ExecutionOutcome,
    /// The device's view right after the action executed.
    pub post: DeviceView,
}

#[derive(Debug, Clone)]
pub enum Strategy {
    FuzzyQ {
        agent: Box<FuzzyQAgent>,
        last: Option<(u64, StateKey)>,
    },
    Greedy,
    Fp(FpConfig),
    /// Always the same action; handy for tests and calibration runs.
    Fixed(Action),
}

impl Strategy {
    pub fn fuzzy_q(agent: FuzzyQAgent) -> Self {
        Strategy::FuzzyQ {
            agent: Box::new(agent),
            last: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::FuzzyQ { .. } => "fuzzyq",
            Strategy::Greedy => "greedy",
            Strategy::Fp(_) => "fp",
            Strategy::Fixed(_) => "fixed",
        }
    }

    pub fn decide<R: Rng + ?Sized>(&mut self, obs: &Observation, rng: &mut R) -> Action {
        match self {
            Strategy::FuzzyQ { agent, last } => {
                let packet = obs.packet.expect("decide called without a packet").id;
                let (s, a) = agent.choose(packet, &obs.view(), obs.slot, rng);
                *last = Some((packet, s));
                a
            }
            Strategy::Greedy => greedy_decide(obs),
            Strategy::Fp(fp) => fp.draw(rng),
            Strategy::Fixed(a) => *a,
        }
    }

    /// Learning hook; only the Q agent does anything with it.
    pub fn on_outcome(&mut self, tr: &Transition) {
        let Strategy::FuzzyQ { agent, last } = self else {
            return;
        };
        let Some((packet, state)) = last.take() else {
            return;
        };
        debug_assert_eq!(packet, tr.packet);
        agent.learn(&Feedback {
            packet,
            state,
            chosen: tr.chosen,
            effective: tr.outcome.effective_action(),
            post: tr.post,
            departed: tr.outcome.departed(),
        });
    }

    pub fn agent(&self) -> Option<&FuzzyQAgent> {
        match self {
            Strategy::FuzzyQ { agent, .. } => Some(agent),
            _ => None,
        }
    }
}
