//! Spokesman election for line blocks and plane blocks, and the geometric
//! checks behind the plane election.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LineRole {
    LeftBoundary,
    RightBoundary,
    LeftRange,
    RightRange,
    LeftPotential,
    RightPotential,
}

impl LineRole {
    /// Transmission order inside a block group.
    pub const ORDER: [LineRole; 6] = [
        LineRole::LeftBoundary,
        LineRole::RightBoundary,
        LineRole::LeftRange,
        LineRole::RightRange,
        LineRole::LeftPotential,
        LineRole::RightPotential,
    ];

    pub fn slot(self) -> usize {
        Self::ORDER.iter().position(|&r| r == self).unwrap()
    }
}

/// Interval on the line with per-end closedness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo)) && (x < self.hi || (self.hi_closed && x == self.hi))
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// Intersection with the half-open span `[a, b)`.
    pub fn clip(&self, a: f64, b: f64) -> Interval {
        let (lo, lo_closed) = if a > self.lo || (a == self.lo && !self.lo_closed) {
            if a == self.lo { (a, false) } else { (a, true) }
        } else {
            (self.lo, self.lo_closed)
        };
        let (hi, hi_closed) = if b <= self.hi { (b, false) } else { (self.hi, self.hi_closed) };
        Interval { lo, lo_closed, hi, hi_closed }
    }

    /// Whether `[a, b)` lies inside.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        (self.lo < a || (self.lo == a && self.lo_closed)) && self.hi >= b
    }

    /// Whether `[a, b)` meets the interval.
    pub fn meets(&self, a: f64, b: f64) -> bool {
        !self.clip(a, b).is_empty()
    }

    /// Orders intervals sharing an end by how far their other end reaches.
    fn starts_before(&self, other: &Interval) -> bool {
        self.lo < other.lo || (self.lo == other.lo && self.lo_closed && !other.lo_closed)
    }

    fn ends_after(&self, other: &Interval) -> bool {
        self.hi > other.hi || (self.hi == other.hi && self.hi_closed && !other.hi_closed)
    }
}

/// The two halves `[o-1, o-s)` and `(o+s, o+1]` of a unit-range transmitter at `o`.
pub fn reception_sides(origin: f64, s: f64) -> [Interval; 2] {
    [
        Interval { lo: origin - 1.0, lo_closed: true, hi: origin - s, hi_closed: false },
        Interval { lo: origin + s, lo_closed: false, hi: origin + 1.0, hi_closed: true },
    ]
}

/// A node's local picture of its block for line election.
#[derive(Clone, Debug)]
pub struct LineView<'a> {
    pub position: f64,
    pub home: usize,
    /// Block span `[a, b)`.
    pub block: (f64, f64),
    /// Occupied homes of the block `(home, a, b)`, sorted by home, including the node's own.
    pub homes: &'a [(usize, f64, f64)],
    /// Origins of every data message the node has received.
    pub origins: &'a [f64],
    pub s: f64,
    /// The block has a single home.
    pub single_home: bool,
}

/// Largest heard range sides through the node's own position that reach the
/// block's right end and left end, clipped to the block.
pub fn line_groups(view: &LineView) -> (Option<Interval>, Option<Interval>) {
    let (a, b) = view.block;
    let mut right: Option<Interval> = None;
    let mut left: Option<Interval> = None;
    for &o in view.origins {
        for side in reception_sides(o, view.s) {
            if !side.contains(view.position) {
                continue;
            }
            let c = side.clip(a, b);
            if c.is_empty() {
                continue;
            }
            if side.hi >= b && right.is_none_or(|r| c.starts_before(&r)) {
                right = Some(c);
            }
            if (side.lo < a || (side.lo == a && side.lo_closed)) && left.is_none_or(|l| c.ends_after(&l)) {
                left = Some(c);
            }
        }
    }
    (right, left)
}

/// Role assignment for one block group interval, as homes.
pub fn group_roles(group: &Interval, homes: &[(usize, f64, f64)], right_touching: bool) -> BTreeMap<LineRole, usize> {
    let mut out = BTreeMap::new();
    let covered: Vec<usize> = homes.iter().filter(|h| group.covers(h.1, h.2)).map(|h| h.0).collect();
    let partial: Vec<usize> = homes.iter().filter(|h| group.meets(h.1, h.2) && !group.covers(h.1, h.2)).map(|h| h.0).collect();
    if right_touching {
        if let Some(&h) = covered.last() {
            out.insert(LineRole::RightBoundary, h);
        }
        if let Some(&h) = covered.first() {
            out.insert(LineRole::LeftRange, h);
        }
        if let Some(&h) = partial.first() {
            out.insert(LineRole::LeftPotential, h);
        }
    } else {
        if let Some(&h) = covered.first() {
            out.insert(LineRole::LeftBoundary, h);
        }
        if let Some(&h) = covered.last() {
            out.insert(LineRole::RightRange, h);
        }
        if let Some(&h) = partial.last() {
            out.insert(LineRole::RightPotential, h);
        }
    }
    out
}

/// Roles held by the viewing node, in transmission order.
pub fn elect_line_spokesmen(view: &LineView) -> Vec<LineRole> {
    let (right, left) = line_groups(view);
    if view.single_home {
        let heard = view.origins.iter().any(|&o| reception_sides(o, view.s).iter().any(|i| i.contains(view.position)));
        return if heard { LineRole::ORDER.to_vec() } else { Vec::new() };
    }
    let mut roles = BTreeSet::new();
    for (group, rt) in [(right, true), (left, false)] {
        if let Some(g) = group {
            for (role, h) in group_roles(&g, view.homes, rt) {
                if h == view.home {
                    roles.insert(role);
                }
            }
        }
    }
    let mut v: Vec<LineRole> = roles.into_iter().collect();
    v.sort_by_key(|r| r.slot());
    v
}

/// Whole-block election from every node's view: role -> homes claiming it.
pub fn elect_line_block(views: &[LineView]) -> BTreeMap<LineRole, Vec<usize>> {
    let mut out: BTreeMap<LineRole, Vec<usize>> = BTreeMap::new();
    for v in views {
        for role in elect_line_spokesmen(v) {
            out.entry(role).or_default().push(v.home);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Compass {
    E,
    W,
    N,
    S,
    NE,
    SE,
    NW,
    SW,
}

/// A plane spokesman label such as `E_2` or `NW_3` (indices are 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlaneLabel {
    pub dir: Compass,
    pub index: usize,
}

impl PlaneLabel {
    /// Fixed per-block calendar: rows `E_i, W_i`, columns `N_i, S_i`, then
    /// diagonals `NE_i, SE_i, NW_i, SW_i`.
    pub fn calendar_slot(&self, k: usize) -> usize {
        let i = self.index - 1;
        match self.dir {
            Compass::E => 2 * i,
            Compass::W => 2 * i + 1,
            Compass::N => 2 * k + 2 * i,
            Compass::S => 2 * k + 2 * i + 1,
            Compass::NE => 4 * k + 4 * i,
            Compass::SE => 4 * k + 4 * i + 1,
            Compass::NW => 4 * k + 4 * i + 2,
            Compass::SW => 4 * k + 4 * i + 3,
        }
    }
}

impl std::fmt::Display for PlaneLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}_{}", self.dir, self.index)
    }
}

/// Slots per block in the plane calendar for `k x k` homes.
pub fn plane_calendar_len(k: usize) -> usize {
    12 * k - 4
}

/// Labels for every informed home. Homes are `(row, col)`, 0-based from the
/// north-west corner of a `k x k` block.
pub fn elect_plane_spokesmen(k: usize, informed: &BTreeSet<(usize, usize)>) -> BTreeMap<(usize, usize), Vec<PlaneLabel>> {
    let mut out: BTreeMap<(usize, usize), Vec<PlaneLabel>> = BTreeMap::new();
    let mut lines: BTreeMap<(u8, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for &(r, c) in informed {
        assert!(r < k && c < k, "home ({r}, {c}) outside a {k}x{k} block");
        lines.entry((0, r + 1)).or_default().push((r, c));
        lines.entry((1, c + 1)).or_default().push((r, c));
        lines.entry((2, r + c + 1)).or_default().push((r, c));
        lines.entry((3, c + k - r)).or_default().push((r, c));
    }
    for ((family, index), homes) in lines {
        // every family is ordered by column except columns, ordered by row
        let key = |h: &(usize, usize)| if family == 1 { h.0 } else { h.1 };
        let lo = *homes.iter().min_by_key(|h| key(h)).unwrap();
        let hi = *homes.iter().max_by_key(|h| key(h)).unwrap();
        let (lo_dir, hi_dir) = match family {
            0 => (Compass::W, Compass::E),
            1 => (Compass::N, Compass::S),
            2 => (Compass::SW, Compass::NE),
            _ => (Compass::NW, Compass::SE),
        };
        out.entry(lo).or_default().push(PlaneLabel { dir: lo_dir, index });
        out.entry(hi).or_default().push(PlaneLabel { dir: hi_dir, index });
    }
    for labels in out.values_mut() {
        labels.sort_by_key(|l| l.calendar_slot(k));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witnesses {
    /// Index of a spokesman strictly closer to the point than `u`.
    pub closer: Option<usize>,
    /// Index of a spokesman strictly farther from the point than `u`.
    pub farther: Option<usize>,
}

/// Finds spokesmen closer and farther than the non-spokesman `u` from `p`.
pub fn check_closer_farther(spokesmen: &[Point], u: Point, p: Point) -> Witnesses {
    let du = u.dist(&p);
    let mut closer = None;
    let mut farther = None;
    for (i, w) in spokesmen.iter().enumerate() {
        let d = w.dist(&p);
        if d < du && closer.is_none_or(|j: usize| d < spokesmen[j].dist(&p)) {
            closer = Some(i);
        }
        if d > du && farther.is_none_or(|j: usize| d > spokesmen[j].dist(&p)) {
            farther = Some(i);
        }
    }
    Witnesses { closer, farther }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homes(nu: usize, a: f64, g: f64, occupied: &[usize]) -> Vec<(usize, f64, f64)> {
        (1..=nu).filter(|h| occupied.contains(h)).map(|h| (h, a + (h - 1) as f64 * g, a + h as f64 * g)).collect()
    }

    #[test]
    fn sides() {
        let [l, r] = reception_sides(1.0, 0.5);
        assert!(l.contains(0.0) && !l.contains(0.5) && l.contains(0.49));
        assert!(r.contains(2.0) && !r.contains(1.5) && r.contains(1.51));
    }

    #[test]
    fn full_cover_gives_boundaries() {
        // s = 0.5: block [0, 0.5) with homes of 0.125; sender at -0.6 covers (-0.1, 0.4]
        // sender at 1.1 covers [0.1, 0.6)
        let hs = homes(4, 0.0, 0.125, &[1, 2, 4]);
        let pos = [(1, 0.05), (2, 0.2), (4, 0.45)];
        let origins = [-0.6, 1.1];
        let views: Vec<LineView> = pos
            .iter()
            .map(|&(h, x)| LineView { position: x, home: h, block: (0.0, 0.5), homes: &hs, origins: &origins, s: 0.5, single_home: false })
            .collect();
        let roles = elect_line_block(&views);
        for hs in roles.values() {
            assert_eq!(hs.len(), 1);
        }
        assert_eq!(roles[&LineRole::LeftBoundary], vec![1]);
        assert_eq!(roles[&LineRole::RightBoundary], vec![4]);
    }

    #[test]
    fn single_home_takes_everything() {
        let hs = homes(1, 0.0, 0.6, &[1]);
        let v = LineView { position: 0.3, home: 1, block: (0.0, 0.6), homes: &hs, origins: &[1.0], s: 0.2, single_home: true };
        assert_eq!(elect_line_spokesmen(&v), LineRole::ORDER.to_vec());
        let quiet = LineView { origins: &[], ..v };
        assert!(elect_line_spokesmen(&quiet).is_empty());
    }

    #[test]
    fn nothing_heard_no_roles() {
        let hs = homes(4, 0.0, 0.125, &[1, 2]);
        let v = LineView { position: 0.05, home: 1, block: (0.0, 0.5), homes: &hs, origins: &[], s: 0.5, single_home: false };
        assert!(elect_line_spokesmen(&v).is_empty());
    }

    #[test]
    fn plane_single_node_everything() {
        let one: BTreeSet<_> = [(1, 1)].into();
        let e = elect_plane_spokesmen(3, &one);
        let dirs: BTreeSet<Compass> = e[&(1, 1)].iter().map(|l| l.dir).collect();
        assert_eq!(dirs.len(), 8);
    }

    #[test]
    fn plane_two_by_two() {
        let two: BTreeSet<_> = [(0, 0), (1, 1)].into();
        let e = elect_plane_spokesmen(2, &two);
        let names = |h| e[&h].iter().map(|l: &PlaneLabel| l.to_string()).collect::<Vec<_>>();
        assert_eq!(names((0, 0)), ["E_1", "W_1", "N_1", "S_1", "NE_1", "SW_1", "NW_2"]);
        assert_eq!(names((1, 1)), ["E_2", "W_2", "N_2", "S_2", "SE_2", "NE_3", "SW_3"]);
    }

    #[test]
    fn plane_calendar_is_dense() {
        for k in 1..6 {
            let mut seen = BTreeSet::new();
            for i in 1..=k {
                for dir in [Compass::E, Compass::W, Compass::N, Compass::S] {
                    seen.insert(PlaneLabel { dir, index: i }.calendar_slot(k));
                }
            }
            for i in 1..2 * k {
                for dir in [Compass::NE, Compass::SE, Compass::NW, Compass::SW] {
                    seen.insert(PlaneLabel { dir, index: i }.calendar_slot(k));
                }
            }
            assert_eq!(seen, (0..plane_calendar_len(k)).collect());
        }
    }

    #[test]
    fn full_block_count() {
        for k in 1..6 {
            let all: BTreeSet<_> = (0..k).flat_map(|r| (0..k).map(move |c| (r, c))).collect();
            let e = elect_plane_spokesmen(k, &all);
            let labels: usize = e.values().map(|v| v.len()).sum();
            assert_eq!(labels, plane_calendar_len(k));
        }
    }

    #[test]
    fn witnesses_around_a_ring() {
        let ring: Vec<Point> = (0..8).map(|i| {
            let a = i as f64 * std::f64::consts::FRAC_PI_4;
            Point::new(a.cos(), a.sin())
        }).collect();
        let w = check_closer_farther(&ring, Point::new(0.0, 0.0), Point::new(0.0, 5.0));
        assert_eq!(w.closer, Some(2));
        assert_eq!(w.farther, Some(6));
    }
}
