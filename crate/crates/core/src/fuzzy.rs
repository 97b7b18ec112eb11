//! Fuzzy controller for the priority factor θ.
//!
//! Two inputs (normalized remaining queue capacity and normalized elapsed
//! time of the packet) are fuzzified with trapezoidal sets, combined by a
//! nine-rule AND (min) rule base, and the strongest rule's output set is
//! defuzzified by centre of gravity. Because the winning set is taken whole
//! (not clipped), θ is always one of three constants.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linguistic label shared by all three variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "L")]
    Low,
    #[serde(rename = "M")]
    Medium,
    #[serde(rename = "H")]
    High,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Low, Label::Medium, Label::High];

    fn index(self) -> usize {
        match self {
            Label::Low => 0,
            Label::Medium => 1,
            Label::High => 2,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Low => "L",
            Label::Medium => "M",
            Label::High => "H",
        })
    }
}

/// Trapezoid with breakpoints `a <= b <= c <= d` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct TrapezoidalMF {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TrapezoidalMF {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let bad = |reason| Error::InvalidMembership { a, b, c, d, reason };
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(bad("breakpoints must be finite"));
        }
        if !(a <= b && b <= c && c <= d) {
            return Err(bad("breakpoints must satisfy a <= b <= c <= d"));
        }
        if a < 0.0 || d > 1.0 {
            return Err(bad("breakpoints must lie in [0, 1]"));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Degree of membership of `x`. The plateau branch wins on shared
    /// breakpoints, so `[0, 0, c, d]` maps 0 to 1.
    pub fn membership(&self, x: f64) -> f64 {
        let Self { a, b, c, d } = *self;
        if b <= x && x <= c {
            1.0
        } else if x <= a || x >= d {
            0.0
        } else if x < b {
            (x - a) / (b - a)
        } else {
            (d - x) / (d - c)
        }
    }

    /// Centroid of the region under the whole trapezoid.
    pub fn centroid(&self) -> f64 {
        let Self { a, b, c, d } = *self;
        let rise = (b - a) / 2.0;
        let flat = c - b;
        let fall = (d - c) / 2.0;
        let area = rise + flat + fall;
        if area <= 0.0 {
            return a;
        }
        let moment = rise * (a + 2.0 * (b - a) / 3.0) + flat * (b + c) / 2.0 + fall * (c + (d - c) / 3.0);
        moment / area
    }
}

impl TryFrom<[f64; 4]> for TrapezoidalMF {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl From<TrapezoidalMF> for [f64; 4] {
    fn from(mf: TrapezoidalMF) -> Self {
        mf.breakpoints()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinguisticTerm {
    pub label: Label,
    pub mf: TrapezoidalMF,
}

/// A variable with exactly one term per label, stored in L, M, H order.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVariable {
    pub name: &'static str,
    terms: [LinguisticTerm; 3],
}

impl FuzzyVariable {
    pub fn new(name: &'static str, low: TrapezoidalMF, medium: TrapezoidalMF, high: TrapezoidalMF) -> Self {
        let term = |label, mf| LinguisticTerm { label, mf };
        Self {
            name,
            terms: [
                term(Label::Low, low),
                term(Label::Medium, medium),
                term(Label::High, high),
            ],
        }
    }

    fn from_table(name: &'static str, table: [[f64; 4]; 3]) -> Result<Self> {
        let [l, m, h] = table.map(TrapezoidalMF::try_from);
        Ok(Self::new(name, l?, m?, h?))
    }

    pub fn term(&self, label: Label) -> &LinguisticTerm {
        &self.terms[label.index()]
    }

    pub fn terms(&self) -> &[LinguisticTerm; 3] {
        &self.terms
    }

    pub fn membership(&self, label: Label, x: f64) -> f64 {
        self.term(label).mf.membership(x)
    }
}

/// `IF resource is .. AND elapsed is .. THEN theta is ..`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub resource: Label,
    pub elapsed: Label,
    pub theta: Label,
}

impl Rule {
    pub const fn new(resource: Label, elapsed: Label, theta: Label) -> Self {
        Self {
            resource,
            elapsed,
            theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyRuleBase {
    rules: Vec<Rule>,
}

use Label::{High as H, Low as L, Medium as M};

const DEFAULT_RULES: [Rule; 9] = [
    Rule::new(L, L, M),
    Rule::new(L, M, H),
    Rule::new(L, H, H),
    Rule::new(M, L, L),
    Rule::new(M, M, M),
    Rule::new(M, H, H),
    Rule::new(H, L, L),
    Rule::new(H, M, L),
    Rule::new(H, H, M),
];

pub const RESOURCE_TERMS: [[f64; 4]; 3] = [[0.0, 0.0, 0.2, 0.3], [0.2, 0.3, 0.5, 0.6], [0.5, 0.6, 1.0, 1.0]];

pub const ELAPSED_TERMS: [[f64; 4]; 3] = [[0.0, 0.0, 0.4, 0.5], [0.4, 0.5, 0.7, 0.8], [0.7, 0.8, 1.0, 1.0]];

pub const THETA_TERMS: [[f64; 4]; 3] = [[0.0, 0.0, 0.3, 0.4], [0.3, 0.4, 0.6, 0.7], [0.6, 0.7, 1.0, 1.0]];

impl FuzzyRuleBase {
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::InvalidRuleBase("at least one rule is required".into()));
        }
        for (i, r) in rules.iter().enumerate() {
            if rules[..i]
                .iter()
                .any(|o| o.resource == r.resource && o.elapsed == r.elapsed)
            {
                return Err(Error::InvalidRuleBase(format!(
                    "duplicate antecedent ({}, {}) in rule {}",
                    r.resource,
                    r.elapsed,
                    i + 1
                )));
            }
        }
        Ok(Self { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }
}

impl Default for FuzzyRuleBase {
    fn default() -> Self {
        Self {
            rules: DEFAULT_RULES.to_vec(),
        }
    }
}

/// Config-file form of the controller; every field defaults to the
/// compiled-in tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzySpec {
    pub resource: [[f64; 4]; 3],
    pub elapsed: [[f64; 4]; 3],
    pub theta: [[f64; 4]; 3],
    pub rules: Vec<Rule>,
}

impl Default for FuzzySpec {
    fn default() -> Self {
        Self {
            resource: RESOURCE_TERMS,
            elapsed: ELAPSED_TERMS,
            theta: THETA_TERMS,
            rules: DEFAULT_RULES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyController {
    resource: FuzzyVariable,
    elapsed: FuzzyVariable,
    theta: FuzzyVariable,
    rules: FuzzyRuleBase,
    crisp: [f64; 3],
}

impl Default for FuzzyController {
    fn default() -> Self {
        Self::from_spec(&FuzzySpec::default()).expect("built-in fuzzy tables are valid")
    }
}

impl FuzzyController {
    pub fn from_spec(spec: &FuzzySpec) -> Result<Self> {
        let resource = FuzzyVariable::from_table("remaining_resource", spec.resource)?;
        let elapsed = FuzzyVariable::from_table("elapsed_time", spec.elapsed)?;
        let theta = FuzzyVariable::from_table("theta", spec.theta)?;
        let rules = FuzzyRuleBase::new(spec.rules.clone())?;
        let crisp = Label::ALL.map(|l| defuzzify_cog(theta.term(l)));
        Ok(Self {
            resource,
            elapsed,
            theta,
            rules,
            crisp,
        })
    }

    pub fn rule_base(&self) -> &FuzzyRuleBase {
        &self.rules
    }

    pub fn theta_variable(&self) -> &FuzzyVariable {
        &self.theta
    }

    /// Min-combined firing strength of every rule, in rule-base order.
    pub fn fire_rules(&self, c_norm: f64, delta_norm: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rules.rules.len());
        self.fire_into(c_norm, delta_norm, |s| out.push(s));
        out
    }

    fn fire_into(&self, c_norm: f64, delta_norm: f64, mut sink: impl FnMut(f64)) {
        let mu_c = Label::ALL.map(|l| self.resource.membership(l, c_norm));
        let mu_d = Label::ALL.map(|l| self.elapsed.membership(l, delta_norm));
        for r in &self.rules.rules {
            sink(mu_c[r.resource.index()].min(mu_d[r.elapsed.index()]));
        }
    }

    /// Index of the strongest rule; the earliest rule wins ties.
    pub fn winning_rule(&self, c_norm: f64, delta_norm: f64) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        let mut i = 0;
        self.fire_into(c_norm, delta_norm, |s| {
            if s > best.1 {
                best = (i, s);
            }
            i += 1;
        });
        best.0
    }

    /// θ for a device with `free` of `capacity` remaining and a packet that
    /// has waited `elapsed` slots against threshold `delta`.
    pub fn compute_theta(&self, free: f64, capacity: f64, elapsed: f64, delta: f64) -> f64 {
        debug_assert!(capacity > 0.0 && delta > 0.0);
        let c_norm = (free / capacity).clamp(0.0, 1.0);
        let d_norm = (elapsed / delta).clamp(0.0, 1.0);
        let rule = self.rules.rules[self.winning_rule(c_norm, d_norm)];
        self.crisp[rule.theta.index()]
    }

    /// The three values θ can take, in L, M, H order.
    pub fn crisp_outputs(&self) -> [f64; 3] {
        self.crisp
    }
}

/// Centre of gravity of an output term's full trapezoid.
pub fn defuzzify_cog(term: &LinguisticTerm) -> f64 {
    term.mf.centroid()
}
