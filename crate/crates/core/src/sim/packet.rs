use std::collections::VecDeque;

use crate::metrics::{Channel, FinalRoute};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketStatus {
    Queued,
    Delivered,
    Dropped,
}

impl PacketStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketStatus::Queued => "queued",
            PacketStatus::Delivered => "delivered",
            PacketStatus::Dropped => "dropped",
        }
    }
}

/// One transmission a packet went through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HopTag {
    Relay {
        from: usize,
        to: usize,
        slot: u64,
        seconds: f64,
    },
    Rsu {
        from: usize,
        rsu: usize,
        slot: u64,
        wifi_seconds: f64,
        wired_seconds: f64,
    },
    FourG {
        from: usize,
        slot: u64,
        seconds: f64,
    },
}

impl HopTag {
    /// Transmission time the sending device spent, with its channel.
    pub fn device_side(&self) -> (Channel, f64) {
        match *self {
            HopTag::Relay { seconds, .. } => (Channel::Wifi, seconds),
            HopTag::Rsu { wifi_seconds, .. } => (Channel::Wifi, wifi_seconds),
            HopTag::FourG { seconds, .. } => (Channel::FourG, seconds),
        }
    }

    pub fn total_seconds(&self) -> f64 {
        match *self {
            HopTag::Relay { seconds, .. } | HopTag::FourG { seconds, .. } => seconds,
            HopTag::Rsu {
                wifi_seconds,
                wired_seconds,
                ..
            } => wifi_seconds + wired_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub origin: usize,
    pub gen_slot: u64,
    pub size: f64,
    pub hops: Vec<HopTag>,
    pub status: PacketStatus,
    pub delivery_slot: Option<u64>,
    pub route: Option<FinalRoute>,
    /// Whether this packet is inside the measurement window.
    pub counted: bool,
}

impl Packet {
    pub fn transmission_seconds(&self) -> f64 {
        self.hops.iter().map(HopTag::total_seconds).sum()
    }

    /// Slots elapsed since generation at slot `t`, transmission time
    /// included as a slot fraction.
    pub fn elapsed(&self, t: u64, slot_seconds: f64) -> f64 {
        (t - self.gen_slot) as f64 + self.transmission_seconds() / slot_seconds
    }

    pub fn latency(&self, slot_seconds: f64) -> Option<f64> {
        self.delivery_slot.map(|d| self.elapsed(d, slot_seconds))
    }
}

/// FIFO queue bounded by total MB.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketQueue {
    pub(crate) packets: VecDeque<Packet>,
    used: f64,
    capacity: f64,
}

impl PacketQueue {
    pub fn new(capacity: f64) -> Self {
        Self {
            packets: VecDeque::new(),
            used: 0.0,
            capacity,
        }
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn used(&self) -> f64 {
        self.used
    }

    pub fn free(&self) -> f64 {
        (self.capacity - self.used).max(0.0)
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn fits(&self, size: f64) -> bool {
        self.used + size <= self.capacity + 1e-9
    }

    /// Appends if there is room, otherwise hands the packet back.
    pub fn push(&mut self, p: Packet) -> Result<(), Packet> {
        if !self.fits(p.size) {
            return Err(p);
        }
        self.used += p.size;
        self.packets.push_back(p);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.packets.iter()
    }

    /// Takes the head for a decision while its space stays reserved.
    pub(crate) fn take_front(&mut self) -> Option<Packet> {
        self.packets.pop_front()
    }

    /// Puts a held packet back at the tail (space is still reserved).
    pub(crate) fn put_back(&mut self, p: Packet) {
        self.packets.push_back(p);
    }

    /// Frees the space of a packet taken with `take_front` that left.
    pub(crate) fn release(&mut self, size: f64) {
        self.used = (self.used - size).max(0.0);
        if self.packets.is_empty() {
            self.used = 0.0;
        }
    }

    pub(crate) fn drain(&mut self) -> impl Iterator<Item = Packet> + '_ {
        self.used = 0.0;
        self.packets.drain(..)
    }
}
