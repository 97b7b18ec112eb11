use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spatial::Point;

pub const TRACE_HEADER: [&str; 4] = ["device_id", "timestamp_s", "x_m", "y_m"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
}

/// One device's movement: samples strictly increasing in time. The device
/// is active between its first and last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub device_id: u64,
    samples: Vec<TraceSample>,
}

impl Route {
    /// Sorts by time and keeps the first sample of any repeated timestamp.
    pub fn new(device_id: u64, mut samples: Vec<TraceSample>) -> Self {
        samples.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        samples.dedup_by(|later, earlier| later.timestamp == earlier.timestamp);
        Self { device_id, samples }
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.timestamp, self.samples.last()?.timestamp))
    }

    pub fn active_span(&self) -> f64 {
        self.window().map_or(0.0, |(a, b)| b - a)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.samples.iter().map(|s| (s.x, s.y))
    }

    /// Linear interpolation between the bracketing samples; `None` outside
    /// the active window.
    pub fn position_at_time(&self, t: f64) -> Option<Point> {
        let (first, last) = self.window()?;
        if t < first || t > last {
            return None;
        }
        let i = self.samples.partition_point(|s| s.timestamp <= t);
        let hi = self.samples.get(i).copied();
        let lo = self.samples[i - 1];
        match hi {
            None => Some((lo.x, lo.y)),
            Some(hi) => {
                let f = (t - lo.timestamp) / (hi.timestamp - lo.timestamp);
                Some((lo.x + f * (hi.x - lo.x), lo.y + f * (hi.y - lo.y)))
            }
        }
    }
}

pub fn position_at(route: &Route, t_slot: u64, slot_seconds: f64) -> Option<Point> {
    route.position_at_time(t_slot as f64 * slot_seconds)
}

/// Reads `device_id,timestamp_s,x_m,y_m` rows (header optional), groups them
/// per device and drops devices active for less than `activity_threshold_min`.
pub fn load_traces(path: &Path, activity_threshold_min: f64) -> Result<Vec<Route>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_traces(file, path, activity_threshold_min)
}

pub fn read_traces<R: Read>(input: R, origin: &Path, activity_threshold_min: f64) -> Result<Vec<Route>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut per_device: BTreeMap<u64, Vec<TraceSample>> = BTreeMap::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(idx as u64 + 1, |p| p.line());
        if idx == 0 && rec.iter().eq(TRACE_HEADER) {
            continue;
        }
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let bad = |message: String| Error::MalformedTrace {
            path: origin.to_path_buf(),
            line,
            message,
        };
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let device: u64 = rec[0]
            .parse()
            .map_err(|e| bad(format!("device_id `{}`: {e}", &rec[0])))?;
        let mut nums = [0.0; 3];
        for (slot, (field, name)) in nums.iter_mut().zip(rec.iter().skip(1).zip(&TRACE_HEADER[1..])) {
            *slot = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| bad(format!("{name} `{field}` is not a finite number")))?;
        }
        per_device.entry(device).or_default().push(TraceSample {
            timestamp: nums[0],
            x: nums[1],
            y: nums[2],
        });
    }
    let min_span = activity_threshold_min * 60.0;
    let routes: Vec<Route> = per_device
        .into_iter()
        .map(|(id, samples)| Route::new(id, samples))
        .filter(|r| r.active_span() >= min_span)
        .collect();
    if routes.is_empty() {
        return Err(Error::EmptyDataset(origin.to_path_buf()));
    }
    Ok(routes)
}

pub fn write_traces<W: Write>(routes: &[Route], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in routes {
        let id = r.device_id.to_string();
        for s in r.samples() {
            w.write_record([
                id.as_str(),
                &s.timestamp.to_string(),
                &s.x.to_string(),
                &s.y.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<traces>", e))?;
    Ok(())
}
