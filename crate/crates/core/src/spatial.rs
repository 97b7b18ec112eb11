//! Uniform-grid point index used for contact and RSU lookups.

use std::collections::HashMap;

pub type Point = (f64, f64);

pub fn distance(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<(usize, Point)>>,
    lo: (i64, i64),
    hi: (i64, i64),
}

impl PointGrid {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        Self {
            cell,
            cells: HashMap::new(),
            lo: (i64::MAX, i64::MAX),
            hi: (i64::MIN, i64::MIN),
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.0 / self.cell).floor() as i64, (p.1 / self.cell).floor() as i64)
    }

    pub fn insert(&mut self, id: usize, p: Point) {
        let k = self.key(p);
        self.lo = (self.lo.0.min(k.0), self.lo.1.min(k.1));
        self.hi = (self.hi.0.max(k.0), self.hi.1.max(k.1));
        self.cells.entry(k).or_default().push((id, p));
    }

    pub fn clear(&mut self) {
        self.cells.clear();
        self.lo = (i64::MAX, i64::MAX);
        self.hi = (i64::MIN, i64::MIN);
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn better(best: Option<(usize, f64)>, id: usize, d: f64) -> bool {
        match best {
            None => true,
            Some((bid, bd)) => d < bd || (d == bd && id < bid),
        }
    }

    /// Nearest point within `radius` of `p` (inclusive) passing `keep`;
    /// equal distances go to the lowest id.
    pub fn nearest_within(&self, p: Point, radius: f64, mut keep: impl FnMut(usize) -> bool) -> Option<(usize, f64)> {
        let (kx, ky) = self.key(p);
        let reach = (radius / self.cell).ceil() as i64;
        let mut best = None;
        for cx in kx - reach..=kx + reach {
            for cy in ky - reach..=ky + reach {
                let Some(bucket) = self.cells.get(&(cx, cy)) else {
                    continue;
                };
                for &(id, q) in bucket {
                    let d = distance(p, q);
                    if d <= radius && keep(id) && Self::better(best, id, d) {
                        best = Some((id, d));
                    }
                }
            }
        }
        best
    }

    /// Whether any accepted point lies within `radius` of `p`.
    pub fn any_within(&self, p: Point, radius: f64, mut keep: impl FnMut(usize) -> bool) -> bool {
        self.nearest_within(p, radius, &mut keep).is_some()
    }

    /// Nearest point overall, searched ring by ring.
    pub fn nearest(&self, p: Point) -> Option<(usize, f64)> {
        if self.cells.is_empty() {
            return None;
        }
        let (kx, ky) = self.key(p);
        let max_ring = [
            (kx - self.lo.0).abs(),
            (self.hi.0 - kx).abs(),
            (ky - self.lo.1).abs(),
            (self.hi.1 - ky).abs(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=max_ring {
            if let Some((_, d)) = best {
                // everything in this ring or beyond is at least this far away
                if d < (ring - 1) as f64 * self.cell {
                    break;
                }
            }
            for cx in kx - ring..=kx + ring {
                for cy in ky - ring..=ky + ring {
                    if (cx - kx).abs() != ring && (cy - ky).abs() != ring {
                        continue;
                    }
                    let Some(bucket) = self.cells.get(&(cx, cy)) else {
                        continue;
                    };
                    for &(id, q) in bucket {
                        let d = distance(p, q);
                        if Self::better(best, id, d) {
                            best = Some((id, d));
                        }
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[Point], p: Point) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &q) in points.iter().enumerate() {
            let d = distance(p, q);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }

    proptest! {
        #[test]
        fn ring_search_matches_brute_force(
            pts in prop::collection::vec((-2000.0..2000.0f64, -2000.0..2000.0f64), 1..40),
            q in (-3000.0..3000.0f64, -3000.0..3000.0f64),
            cell in 50.0..700.0f64,
        ) {
            let mut g = PointGrid::new(cell);
            for (i, &p) in pts.iter().enumerate() {
                g.insert(i, p);
            }
            let (_, d) = g.nearest(q).unwrap();
            let (_, bd) = brute(&pts, q).unwrap();
            prop_assert!((d - bd).abs() < 1e-9);

            let r = 400.0;
            let within = g.nearest_within(q, r, |_| true).map(|x| x.1);
            let expect = brute(&pts, q).map(|x| x.1).filter(|d| *d <= r);
            prop_assert_eq!(within, expect);
        }
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let mut g = PointGrid::new(100.0);
        g.insert(5, (10.0, 0.0));
        g.insert(2, (-10.0, 0.0));
        assert_eq!(g.nearest_within((0.0, 0.0), 40.0, |_| true), Some((2, 10.0)));
        assert_eq!(g.nearest((0.0, 0.0)), Some((2, 10.0)));
    }
}
