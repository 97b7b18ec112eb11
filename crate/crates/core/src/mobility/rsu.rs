use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trace::Route;
use crate::error::{Error, Result};
use crate::spatial::{distance, Point, PointGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterRegion {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl CenterRegion {
    pub fn contains(&self, p: Point) -> bool {
        distance(p, (self.x, self.y)) <= self.radius
    }

    /// Centroid of every trace point, with a radius of a quarter of the
    /// bounding-box diagonal.
    pub fn from_routes(routes: &[Route]) -> Self {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        let (mut lo, mut hi) = ((f64::MAX, f64::MAX), (f64::MIN, f64::MIN));
        for (x, y) in routes.iter().flat_map(Route::points) {
            sx += x;
            sy += y;
            n += 1;
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if n == 0 {
            return Self {
                x: 0.0,
                y: 0.0,
                radius: 0.0,
            };
        }
        Self {
            x: sx / n as f64,
            y: sy / n as f64,
            radius: 0.25 * distance(lo, hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spacing {
    /// Gap range between consecutive RSUs inside the center region, meters.
    pub center: (f64, f64),
    /// Gap range outside it.
    pub suburb: (f64, f64),
    /// RSUs closer than this are merged into one.
    pub merge_radius: f64,
}

impl Default for Spacing {
    fn default() -> Self {
        Self {
            center: (1000.0, 3000.0),
            suburb: (4000.0, 8000.0),
            merge_radius: 100.0,
        }
    }
}

impl Spacing {
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, (lo, hi)) in [("center", self.center), ("suburb", self.suburb)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(format!("rsus.spacing.{name}: need 0 < lo <= hi, got ({lo}, {hi})"));
            }
        }
        if !(self.merge_radius >= 0.0) {
            return Err("rsus.spacing.merge_radius must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsuPlan {
    pub positions: Vec<Point>,
    pub center: CenterRegion,
}

impl RsuPlan {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rsu_id", "x_m", "y_m"])?;
        for (i, (x, y)) in self.positions.iter().enumerate() {
            w.write_record([i.to_string(), x.to_string(), y.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<rsus>", e))?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Vec<Point>> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f, path)
    }

    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Vec<Point>> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut out = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::MalformedTable {
                        path: origin.to_path_buf(),
                        line,
                        message: format!("expected `rsu_id,x_m,y_m`, got {:?}", rec.iter().collect::<Vec<_>>()),
                    })
            };
            out.push((parse(1)?, parse(2)?));
        }
        Ok(out)
    }
}

/// Walking step used to notice RSUs already sitting on the path.
const WALK_STEP: f64 = 25.0;

/// Walks every route and drops an RSU at the route start and then every
/// `gap` meters of travel, the gap drawn from the center or suburb range
/// depending on where the previous RSU is. Passing an existing RSU (within
/// the merge radius) restarts the gap from there, so re-driven streets and
/// overlapping routes do not pile RSUs up.
pub fn place_rsus<R: Rng + ?Sized>(routes: &[Route], center: &CenterRegion, spacing: &Spacing, rng: &mut R) -> RsuPlan {
    let cell = spacing.merge_radius.max(WALK_STEP);
    let mut grid = PointGrid::new(cell);
    let mut positions: Vec<Point> = Vec::new();

    let draw = |p: Point, rng: &mut R| {
        let (lo, hi) = if center.contains(p) {
            spacing.center
        } else {
            spacing.suburb
        };
        if lo < hi {
            rng.gen_range(lo..=hi)
        } else {
            lo
        }
    };

    let claim = |p: Point, positions: &mut Vec<Point>, grid: &mut PointGrid| -> usize {
        match grid.nearest_within(p, spacing.merge_radius, |_| true) {
            Some((id, _)) => id,
            None => {
                let id = positions.len();
                positions.push(p);
                grid.insert(id, p);
                id
            }
        }
    };

    for route in routes {
        let pts: Vec<Point> = route.points().collect();
        let Some(&start) = pts.first() else {
            continue;
        };
        let mut last = claim(start, &mut positions, &mut grid);
        let mut gap = draw(positions[last], rng);
        let mut travelled = 0.0;

        for seg in pts.windows(2) {
            let (mut p, q) = (seg[0], seg[1]);
            loop {
                let left = distance(p, q);
                if left <= 0.0 {
                    break;
                }
                let step = left.min(WALK_STEP);
                let to_next = gap - travelled;
                let next = if to_next <= step {
                    let f = to_next / left;
                    let at = (p.0 + f * (q.0 - p.0), p.1 + f * (q.1 - p.1));
                    last = claim(at, &mut positions, &mut grid);
                    travelled = 0.0;
                    gap = draw(at, rng);
                    at
                } else {
                    let f = step / left;
                    travelled += step;
                    let at = if step == left {
                        q
                    } else {
                        (p.0 + f * (q.0 - p.0), p.1 + f * (q.1 - p.1))
                    };
                    if let Some((id, d)) = grid.nearest_within(at, spacing.merge_radius, |id| id != last) {
                        last = id;
                        travelled = -d;
                        gap = draw(positions[id], rng);
                    }
                    at
                };
                p = next;
            }
        }
    }
    RsuPlan {
        positions,
        center: *center,
    }
}

#[cfg(test)]
mod tests {
    use super::super::trace::TraceSample;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(id: u64, from: Point, to: Point) -> Route {
        Route::new(
            id,
            vec![
                TraceSample {
                    timestamp: 0.0,
                    x: from.0,
                    y: from.1,
                },
                TraceSample {
                    timestamp: 1000.0,
                    x: to.0,
                    y: to.1,
                },
            ],
        )
    }

    fn far_center() -> CenterRegion {
        CenterRegion {
            x: -1e6,
            y: -1e6,
            radius: 1.0,
        }
    }

    #[test]
    fn suburban_ten_km_gets_two_or_three() {
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plan = place_rsus(
                &[line(1, (0.0, 0.0), (10_000.0, 0.0))],
                &far_center(),
                &Spacing::default(),
                &mut rng,
            );
            let n = plan.positions.len();
            assert!((2..=3).contains(&n), "seed {seed}: {n} RSUs");
            for w in plan.positions.windows(2) {
                let gap = distance(w[0], w[1]);
                assert!((4000.0 - 1e-6..=8000.0 + 1e-6).contains(&gap), "gap {gap}");
            }
        }
    }

    #[test]
    fn short_central_route_gets_one() {
        let center = CenterRegion {
            x: 1000.0,
            y: 0.0,
            radius: 5000.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let plan = place_rsus(
            &[line(1, (0.0, 0.0), (2000.0, 0.0))],
            &center,
            &Spacing::default(),
            &mut rng,
        );
        assert!(!plan.positions.is_empty());
    }

    #[test]
    fn overlapping_routes_share_rsus() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = line(1, (0.0, 0.0), (20_000.0, 0.0));
        let b = line(2, (0.0, 30.0), (20_000.0, 30.0));
        let single = place_rsus(
            std::slice::from_ref(&a),
            &far_center(),
            &Spacing::default(),
            &mut ChaCha8Rng::seed_from_u64(4),
        );
        let both = place_rsus(&[a, b], &far_center(), &Spacing::default(), &mut rng);
        assert!(both.positions.len() >= single.positions.len());
        assert!(both.positions.len() < 2 * single.positions.len());
        for (i, p) in both.positions.iter().enumerate() {
            for q in &both.positions[i + 1..] {
                assert!(distance(*p, *q) > 100.0);
            }
        }
    }

    #[test]
    fn default_center_from_points() {
        let c = CenterRegion::from_routes(&[line(1, (0.0, 0.0), (400.0, 300.0))]);
        assert_eq!((c.x, c.y), (200.0, 150.0));
        assert!((c.radius - 125.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export_reads_back() {
        let plan = RsuPlan {
            positions: vec![(1.5, -2.0), (3000.25, 4.0)],
            center: far_center(),
        };
        let mut buf = Vec::new();
        plan.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"rsu_id,x_m,y_m\n0,1.5,-2\n"));
        let back = RsuPlan::read_csv(buf.as_slice(), Path::new("r.csv")).unwrap();
        assert_eq!(back, plan.positions);
    }
}
