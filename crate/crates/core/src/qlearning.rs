//! Tabular Q-learning for a single device.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::FuzzyController;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    Keep,
    SendServer,
    SendRsu,
    SendNeighbor,
}

impl Action {
    /// Declaration order doubles as the argmax tie-break order.
    pub const ALL: [Action; 4] = [Action::Keep, Action::SendServer, Action::SendRsu, Action::SendNeighbor];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Keep => "KEEP",
            Action::SendServer => "SEND_SERVER",
            Action::SendRsu => "SEND_RSU",
            Action::SendNeighbor => "SEND_NEIGHBOR",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown action `{s}`"))
    }
}

/// Discretized observation: whole slots waited, whole MB free locally and at
/// the nearest neighbor, and RSU reachability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub elapsed_slots: u32,
    pub local_free: u32,
    pub neighbor_free: Option<u32>,
    pub rsu_in_range: bool,
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/", self.elapsed_slots, self.local_free)?;
        match self.neighbor_free {
            Some(n) => write!(f, "{n}")?,
            None => f.write_str("-")?,
        }
        write!(f, "/{}", u8::from(self.rsu_in_range))
    }
}

impl FromStr for StateKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split('/').collect();
        let [e, l, n, r] = parts[..] else {
            return Err(format!("state key `{s}` must have four `/`-separated fields"));
        };
        let num = |v: &str| v.parse::<u32>().map_err(|e| format!("`{v}`: {e}"));
        Ok(StateKey {
            elapsed_slots: num(e)?,
            local_free: num(l)?,
            neighbor_free: if n == "-" { None } else { Some(num(n)?) },
            rsu_in_range: match r {
                "0" => false,
                "1" => true,
                _ => return Err(format!("rsu flag `{r}` must be 0 or 1")),
            },
        })
    }
}

/// Raw (undiscretized) view of a device, before a decision or right after
/// an action executed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceView {
    /// Slots since the packet was generated, including any transmission
    /// time already spent as a slot fraction.
    pub elapsed: f64,
    /// Free queue capacity in MB.
    pub free: f64,
    pub neighbor_free: Option<f64>,
    pub rsu_in_range: bool,
}

fn round_half_up(x: f64) -> u32 {
    (x + 0.5).floor().max(0.0) as u32
}

pub fn discretize_state(view: &DeviceView, elapsed_cap: u32, capacity: f64) -> StateKey {
    let cap_mb = round_half_up(capacity);
    StateKey {
        elapsed_slots: round_half_up(view.elapsed).min(elapsed_cap),
        local_free: round_half_up(view.free).min(cap_mb),
        neighbor_free: view.neighbor_free.map(|c| round_half_up(c).min(cap_mb)),
        rsu_in_range: view.rsu_in_range,
    }
}

/// Linearly decaying exploration rate.
pub fn epsilon_at(epsilon0: f64, t: u64, max_time: u64) -> f64 {
    debug_assert!(max_time > 0);
    let remaining = max_time.saturating_sub(t) as f64;
    epsilon0 * (remaining / max_time as f64).max(0.0)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTable {
    rows: HashMap<StateKey, [f64; 4]>,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, s: &StateKey, a: Action) -> f64 {
        self.rows.get(s).map_or(0.0, |r| r[a.index()])
    }

    pub fn set(&mut self, s: StateKey, a: Action, q: f64) {
        self.rows.entry(s).or_insert([0.0; 4])[a.index()] = q;
    }

    pub fn row(&self, s: &StateKey) -> [f64; 4] {
        self.rows.get(s).copied().unwrap_or([0.0; 4])
    }

    pub fn max(&self, s: &StateKey) -> f64 {
        self.row(s).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn best_action(&self, s: &StateKey) -> Action {
        let row = self.row(s);
        let mut best = Action::Keep;
        for a in Action::ALL {
            if row[a.index()] > row[best.index()] {
                best = a;
            }
        }
        best
    }

    /// Number of materialized (state, action) entries.
    pub fn len(&self) -> usize {
        self.rows.len() * Action::ALL.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn states(&self) -> usize {
        self.rows.len()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["state_key", "action", "q_value"])?;
        let sorted: BTreeMap<_, _> = self.rows.iter().collect();
        for (s, row) in sorted {
            let key = s.to_string();
            for a in Action::ALL {
                w.write_record([key.as_str(), a.as_str(), &row[a.index()].to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<q-table>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let mut table = QTable::new();
        for rec in r.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |message: String| Error::MalformedTable {
                path: origin.to_path_buf(),
                line,
                message,
            };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let s: StateKey = rec[0].parse().map_err(bad)?;
            let a: Action = rec[1].parse().map_err(bad)?;
            let q: f64 = rec[2].parse().map_err(|e| bad(format!("q_value `{}`: {e}", &rec[2])))?;
            table.set(s, a, q);
        }
        Ok(table)
    }
}

/// ε-greedy choice; exploration draws uniformly over all four actions.
pub fn select_action<R: Rng + ?Sized>(q: &QTable, s: &StateKey, epsilon: f64, rng: &mut R) -> Action {
    if rng.gen::<f64>() < epsilon {
        Action::ALL[rng.gen_range(0..Action::ALL.len())]
    } else {
        q.best_action(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon0: f64,
    /// Slot at which exploration reaches zero; the run horizon when unset.
    pub max_time: Option<u64>,
    pub penalty: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            gamma: 0.9,
            epsilon0: 0.9,
            max_time: None,
            penalty: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon0: f64,
    pub max_time: u64,
    pub penalty: f64,
    /// δ in slots.
    pub delta_threshold: f64,
    /// C* in MB.
    pub capacity: f64,
    pub elapsed_cap: u32,
}

impl AgentConfig {
    pub fn new(params: &AgentParams, horizon: u64, delta_threshold: f64, capacity: f64) -> Self {
        Self {
            alpha: params.alpha,
            gamma: params.gamma,
            epsilon0: params.epsilon0,
            max_time: params.max_time.unwrap_or(horizon).max(1),
            penalty: params.penalty,
            delta_threshold,
            capacity,
            elapsed_cap: (2.0 * delta_threshold).ceil() as u32,
        }
    }
}

/// Immediate reward of `action` judged on the state after it executed.
pub fn reward(action: Action, post: &DeviceView, theta: f64, cfg: &AgentConfig) -> f64 {
    if post.free <= 1e-9 || post.elapsed > cfg.delta_threshold {
        return -cfg.penalty;
    }
    let decay = 1.0 + post.elapsed;
    match action {
        Action::Keep => 0.0,
        Action::SendServer => (theta * cfg.capacity - post.free) / decay,
        Action::SendRsu => (cfg.capacity - theta * post.free) / decay,
        Action::SendNeighbor => {
            let diff = post.neighbor_free.map_or(0.0, |n| n - post.free);
            if diff == 0.0 {
                0.0
            } else {
                diff.signum() / decay
            }
        }
    }
}

/// One Bellman backup. `next = None` marks a terminal transition.
pub fn update(q: &mut QTable, s: StateKey, a: Action, r: f64, next: Option<&StateKey>, cfg: &AgentConfig) {
    let future = next.map_or(0.0, |n| q.max(n));
    let old = q.get(&s, a);
    let new = (1.0 - cfg.alpha) * old + cfg.alpha * (r + cfg.gamma * future);
    q.set(s, a, new);
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    state: StateKey,
    action: Action,
    reward: f64,
}

/// What the agent needs to know after its action ran.
#[derive(Debug, Clone, Copy)]
pub struct Feedback {
    pub packet: u64,
    pub state: StateKey,
    pub chosen: Action,
    /// The action that actually took effect (a missed RSU/neighbor send
    /// that holds the packet behaves as KEEP; one forced onto 4G as
    /// SEND_SERVER).
    pub effective: Action,
    pub post: DeviceView,
    /// Whether the packet left this device.
    pub departed: bool,
}

/// Per-device learner. Transitions follow the packet: a packet that stays
/// queued is backed up against the state it is next decided in, and one
/// that leaves the device ends its episode.
#[derive(Debug, Clone)]
pub struct FuzzyQAgent {
    pub cfg: AgentConfig,
    table: QTable,
    fuzzy: FuzzyController,
    pending: HashMap<u64, Pending>,
}

impl FuzzyQAgent {
    pub fn new(cfg: AgentConfig, fuzzy: FuzzyController) -> Self {
        Self::with_table(cfg, fuzzy, QTable::new())
    }

    pub fn with_table(cfg: AgentConfig, fuzzy: FuzzyController, table: QTable) -> Self {
        Self {
            cfg,
            table,
            fuzzy,
            pending: HashMap::new(),
        }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn into_table(self) -> QTable {
        self.table
    }

    pub fn state_of(&self, view: &DeviceView) -> StateKey {
        discretize_state(view, self.cfg.elapsed_cap, self.cfg.capacity)
    }

    pub fn choose<R: Rng + ?Sized>(
        &mut self,
        packet: u64,
        view: &DeviceView,
        t: u64,
        rng: &mut R,
    ) -> (StateKey, Action) {
        let s = self.state_of(view);
        if let Some(p) = self.pending.remove(&packet) {
            update(&mut self.table, p.state, p.action, p.reward, Some(&s), &self.cfg);
        }
        let eps = epsilon_at(self.cfg.epsilon0, t, self.cfg.max_time);
        (s, select_action(&self.table, &s, eps, rng))
    }

    pub fn learn(&mut self, fb: &Feedback) -> f64 {
        let theta = self.fuzzy.compute_theta(
            fb.post.free,
            self.cfg.capacity,
            fb.post.elapsed,
            self.cfg.delta_threshold,
        );
        let r = reward(fb.effective, &fb.post, theta, &self.cfg);
        if fb.departed {
            update(&mut self.table, fb.state, fb.chosen, r, None, &self.cfg);
        } else {
            self.pending.insert(
                fb.packet,
                Pending {
                    state: fb.state,
                    action: fb.chosen,
                    reward: r,
                },
            );
        }
        r
    }

    /// Drop a pending transition for a packet that left without a decision.
    pub fn forget(&mut self, packet: u64) {
        self.pending.remove(&packet);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(alpha: f64, gamma: f64) -> AgentConfig {
        AgentConfig {
            alpha,
            gamma,
            epsilon0: 0.9,
            max_time: 100,
            penalty: 100.0,
            delta_threshold: 10.0,
            capacity: 25.0,
            elapsed_cap: 20,
        }
    }

    fn key(e: u32) -> StateKey {
        StateKey {
            elapsed_slots: e,
            local_free: 20,
            neighbor_free: None,
            rsu_in_range: false,
        }
    }

    fn view(elapsed: f64, free: f64, neighbor: Option<f64>) -> DeviceView {
        DeviceView {
            elapsed,
            free,
            neighbor_free: neighbor,
            rsu_in_range: false,
        }
    }

    #[test]
    fn discretize_examples() {
        let v = DeviceView {
            elapsed: 2.0,
            free: 24.0,
            neighbor_free: None,
            rsu_in_range: true,
        };
        let k = discretize_state(&v, 20, 25.0);
        assert_eq!(
            (k.elapsed_slots, k.local_free, k.neighbor_free, k.rsu_in_range),
            (2, 24, None, true)
        );
        let k = discretize_state(&view(2.6, 23.4, Some(10.7)), 20, 25.0);
        assert_eq!(
            (k.elapsed_slots, k.local_free, k.neighbor_free, k.rsu_in_range),
            (3, 23, Some(11), false)
        );
        assert_eq!(discretize_state(&view(2.5, 0.5, None), 20, 25.0).elapsed_slots, 3);
        assert_eq!(discretize_state(&view(57.0, 1.0, None), 20, 25.0).elapsed_slots, 20);
    }

    #[test]
    fn epsilon_schedule() {
        assert_eq!(epsilon_at(0.9, 0, 400), 0.9);
        assert_eq!(epsilon_at(0.9, 400, 400), 0.0);
        assert_eq!(epsilon_at(0.9, 900, 400), 0.0);
        assert!((epsilon_at(0.8, 100, 400) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn greedy_selection_and_ties() {
        let mut q = QTable::new();
        let s = key(1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(select_action(&q, &s, 0.0, &mut rng), Action::Keep);
        for (a, v) in Action::ALL.into_iter().zip([0.0, 5.0, 3.0, 1.0]) {
            q.set(s, a, v);
        }
        assert_eq!(select_action(&q, &s, 0.0, &mut rng), Action::SendServer);
        q.set(s, Action::SendRsu, 5.0);
        assert_eq!(select_action(&q, &s, 0.0, &mut rng), Action::SendServer);
    }

    #[test]
    fn reward_cases() {
        let c = cfg(0.5, 0.9);
        assert_eq!(reward(Action::SendRsu, &view(1.0, 0.0, None), 0.5, &c), -100.0);
        assert_eq!(reward(Action::Keep, &view(11.0, 10.0, None), 0.5, &c), -100.0);
        assert_eq!(reward(Action::Keep, &view(3.0, 10.0, None), 0.5, &c), 0.0);
        assert!((reward(Action::SendServer, &view(1.0, 10.0, None), 0.5, &c) - 1.25).abs() < 1e-12);
        assert!((reward(Action::SendRsu, &view(1.0, 10.0, None), 0.5, &c) - 10.0).abs() < 1e-12);
        assert_eq!(reward(Action::SendNeighbor, &view(0.0, 10.0, Some(20.0)), 0.5, &c), 1.0);
        assert_eq!(
            reward(Action::SendNeighbor, &view(1.0, 20.0, Some(10.0)), 0.5, &c),
            -0.5
        );
        assert_eq!(reward(Action::SendNeighbor, &view(1.0, 10.0, Some(10.0)), 0.5, &c), 0.0);
    }

    #[test]
    fn update_examples() {
        let s = key(1);
        let n = key(2);
        let mut q = QTable::new();
        q.set(s, Action::Keep, 7.0);
        q.set(n, Action::SendRsu, 3.0);
        update(&mut q, s, Action::Keep, 2.0, Some(&n), &cfg(1.0, 0.0));
        assert_eq!(q.get(&s, Action::Keep), 2.0);

        update(&mut q, s, Action::Keep, 42.0, Some(&n), &cfg(0.0, 0.9));
        assert_eq!(q.get(&s, Action::Keep), 2.0);

        let mut q = QTable::new();
        q.set(s, Action::Keep, 1.0);
        q.set(n, Action::SendRsu, 1.0);
        update(&mut q, s, Action::Keep, 2.0, Some(&n), &cfg(0.5, 0.9));
        assert!((q.get(&s, Action::Keep) - 1.95).abs() < 1e-12);
    }

    #[test]
    fn state_key_text_form() {
        let k = StateKey {
            elapsed_slots: 3,
            local_free: 23,
            neighbor_free: Some(11),
            rsu_in_range: false,
        };
        assert_eq!(k.to_string(), "3/23/11/0");
        assert_eq!("3/23/11/0".parse::<StateKey>().unwrap(), k);
        assert_eq!("0/25/-/1".parse::<StateKey>().unwrap().neighbor_free, None);
        assert!("1/2/3".parse::<StateKey>().is_err());
        assert!("1/2/3/2".parse::<StateKey>().is_err());
    }

    #[test]
    fn malformed_table_reports_line() {
        let text = "state_key,action,q_value\n1/2/-/0,KEEP,0.5\n1/2/-/0,JUMP,1\n";
        let err = QTable::read_csv(text.as_bytes(), Path::new("q.csv")).unwrap_err();
        match err {
            Error::MalformedTable { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn held_packet_bootstraps_from_its_next_state() {
        let mut agent = FuzzyQAgent::new(cfg(1.0, 0.9), FuzzyController::default());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s0 = key(9);
        let s1 = key(10);
        agent.table.set(s1, Action::SendServer, -4.0);
        agent.table.set(s1, Action::Keep, -10.0);
        agent.learn(&Feedback {
            packet: 5,
            state: s0,
            chosen: Action::SendRsu,
            effective: Action::Keep,
            post: view(9.0, 20.0, None),
            departed: false,
        });
        assert_eq!(agent.table().get(&s0, Action::SendRsu), 0.0);
        agent.cfg.epsilon0 = 0.0;
        agent.choose(5, &view(10.0, 20.0, None), 0, &mut rng);
        // r = 0 (held), target = 0.9 * max(-4, -10, 0, 0) = 0
        assert_eq!(agent.table().get(&s0, Action::SendRsu), 0.0);
        agent.table.set(s1, Action::SendRsu, -1.0);
        agent.table.set(s1, Action::SendNeighbor, -2.0);
        agent.learn(&Feedback {
            packet: 6,
            state: s0,
            chosen: Action::Keep,
            effective: Action::Keep,
            post: view(9.0, 20.0, None),
            departed: false,
        });
        agent.choose(6, &view(10.0, 20.0, None), 0, &mut rng);
        assert!((agent.table().get(&s0, Action::Keep) - -0.9).abs() < 1e-12);
    }
}
