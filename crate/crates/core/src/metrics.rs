//! Delivery, freshness, cost and energy accounting.

use serde::{Deserialize, Serialize};

use crate::mobility::Route;
use crate::spatial::PointGrid;

/// Average transmit power per channel, watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub pw_4g: f64,
    pub pw_wifi: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            pw_4g: 2.26,
            pw_wifi: 1.75,
        }
    }
}

impl EnergyModel {
    /// Device-side energy of one transmission; wired hops cost the device
    /// nothing.
    pub fn hop_energy(&self, channel: Channel, seconds: f64) -> f64 {
        match channel {
            Channel::FourG => self.pw_4g * seconds,
            Channel::Wifi => self.pw_wifi * seconds,
            Channel::Wired => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    #[serde(rename = "4g")]
    FourG,
    Wifi,
    Wired,
}

/// Last leg a delivered packet took to the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinalRoute {
    #[serde(rename = "4g")]
    FourG,
    Rsu,
}

impl FinalRoute {
    pub fn as_str(self) -> &'static str {
        match self {
            FinalRoute::FourG => "4g",
            FinalRoute::Rsu => "rsu",
        }
    }

    /// Channel of the device-side transmission on this route.
    pub fn device_channel(self) -> Channel {
        match self {
            FinalRoute::FourG => Channel::FourG,
            FinalRoute::Rsu => Channel::Wifi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Generation,
    /// `device_seconds` is the sender's own transmission time on the final
    /// leg; `latency` is in slots.
    Delivery {
        route: FinalRoute,
        device_seconds: f64,
        latency: f64,
    },
    Drop,
    /// Device-to-device relay over Wi-Fi.
    Hop {
        seconds: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub queued: u64,
    pub relays: u64,
    pub delivered_4g: u64,
    pub delivered_rsu: u64,
    pub delayed_count: u64,
    pub r_drop: f64,
    pub r_delay: f64,
    pub r_server: f64,
    pub r_rsu: f64,
    pub energy_total: f64,
    pub energy_per_delivered: f64,
    /// `latency_histogram[k]` counts deliveries with latency in `[k, k+1)` slots.
    pub latency_histogram: Vec<u64>,
    pub contact_rate: f64,
    #[serde(skip)]
    latencies: Vec<f64>,
    #[serde(skip)]
    contact_sum: f64,
    #[serde(skip)]
    contact_devices: u64,
    #[serde(skip)]
    energy: EnergyModel,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    pub fn new(energy: EnergyModel) -> Self {
        Self {
            energy,
            ..Self::default()
        }
    }

    pub fn record_event(&mut self, event: Event) {
        match event {
            Event::Generation => self.generated += 1,
            Event::Drop => self.dropped += 1,
            Event::Hop { seconds } => {
                self.relays += 1;
                self.energy_total += self.energy.hop_energy(Channel::Wifi, seconds);
            }
            Event::Delivery {
                route,
                device_seconds,
                latency,
            } => {
                self.delivered += 1;
                match route {
                    FinalRoute::FourG => self.delivered_4g += 1,
                    FinalRoute::Rsu => self.delivered_rsu += 1,
                }
                self.energy_total += self.energy.hop_energy(route.device_channel(), device_seconds);
                self.latencies.push(latency);
            }
        }
    }

    /// Adds one device's contact rate to the network average.
    pub fn record_contact_rate(&mut self, device_rate: f64) {
        self.contact_sum += device_rate;
        self.contact_devices += 1;
    }

    pub fn energy_total(&self) -> f64 {
        self.energy_total
    }

    pub fn latencies(&self) -> &[f64] {
        &self.latencies
    }

    /// Computes every ratio; `delta` is the freshness threshold in slots.
    pub fn finalize(&mut self, delta: f64) {
        self.delayed_count = self.latencies.iter().filter(|&&l| l > delta).count() as u64;
        self.r_drop = ratio(self.dropped, self.generated);
        self.r_delay = ratio(self.delayed_count, self.delivered);
        self.r_server = ratio(self.delivered_4g, self.delivered);
        self.r_rsu = ratio(self.delivered_rsu, self.delivered);
        self.energy_per_delivered = if self.delivered == 0 {
            0.0
        } else {
            self.energy_total / self.delivered as f64
        };
        let top = self.latencies.iter().fold(0.0f64, |m, &l| m.max(l));
        let mut hist = vec![0u64; if self.latencies.is_empty() { 0 } else { top as usize + 1 }];
        for &l in &self.latencies {
            hist[l.max(0.0) as usize] += 1;
        }
        self.latency_histogram = hist;
        self.contact_rate = if self.contact_devices == 0 {
            0.0
        } else {
            self.contact_sum / self.contact_devices as f64
        };
    }

    /// Folds another run into this one; call [`finalize`](Self::finalize)
    /// afterwards.
    pub fn merge(&mut self, other: &MetricsReport) {
        self.generated += other.generated;
        self.delivered += other.delivered;
        self.dropped += other.dropped;
        self.queued += other.queued;
        self.relays += other.relays;
        self.delivered_4g += other.delivered_4g;
        self.delivered_rsu += other.delivered_rsu;
        self.energy_total += other.energy_total;
        self.latencies.extend_from_slice(&other.latencies);
        self.contact_sum += other.contact_sum;
        self.contact_devices += other.contact_devices;
    }
}

/// Mean over devices of the fraction of their active slots spent within
/// `ranges[i]` meters of at least one other active device. Devices that are
/// never active are left out of the mean.
pub fn contact_rate(routes: &[Route], ranges: &[f64], horizon: u64, slot_seconds: f64, origin: f64) -> f64 {
    assert_eq!(routes.len(), ranges.len());
    let per_device = per_device_contact(routes, ranges, horizon, slot_seconds, origin);
    let rates: Vec<f64> = per_device
        .iter()
        .filter(|(active, _)| *active > 0)
        .map(|&(active, contact)| contact as f64 / active as f64)
        .collect();
    if rates.is_empty() {
        0.0
    } else {
        rates.iter().sum::<f64>() / rates.len() as f64
    }
}

/// `(active_slots, contact_slots)` per device.
pub fn per_device_contact(
    routes: &[Route],
    ranges: &[f64],
    horizon: u64,
    slot_seconds: f64,
    origin: f64,
) -> Vec<(u64, u64)> {
    let reach = ranges.iter().copied().fold(1.0f64, f64::max);
    let mut grid = PointGrid::new(reach);
    let mut out = vec![(0u64, 0u64); routes.len()];
    let mut pos = vec![None; routes.len()];
    for t in 0..horizon {
        grid.clear();
        let time = origin + t as f64 * slot_seconds;
        for (i, r) in routes.iter().enumerate() {
            pos[i] = r.position_at_time(time);
            if let Some(p) = pos[i] {
                grid.insert(i, p);
            }
        }
        for (i, p) in pos.iter().enumerate() {
            let Some(p) = *p else { continue };
            out[i].0 += 1;
            if grid.any_within(p, ranges[i], |j| j != i) {
                out[i].1 += 1;
            }
        }
    }
    out
}
