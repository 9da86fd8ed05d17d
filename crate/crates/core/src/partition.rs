//! The three-level partitions of the line (regions of length 3, blocks of
//! length `l`, homes of length gamma) and of the plane (3x3 regions, `l x l`
//! blocks, `gamma/sqrt(2)` square homes).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Dim, Network, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("point ({x}, {y}) lies outside the partitioned domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("partition needs unit range, got r = {0}")]
    NotUnitRange(f64),
    #[error("invalid partition parameters: {0}")]
    BadParams(String),
    #[error("invalid label: {0}")]
    BadLabel(String),
}

/// `ceil` after nudging down by 1e-12, so values a hair above an integer do
/// not round up.
pub fn ceil_guarded(x: f64) -> usize {
    (x - 1e-12).ceil().max(0.0) as usize
}

fn floor_index(v: f64, count: usize) -> usize {
    let i = (v + 1e-9).floor();
    if i <= 0.0 {
        0
    } else {
        (i as usize).min(count - 1)
    }
}

const EDGE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionLabel {
    pub region: usize,
    /// 1-based.
    pub block: usize,
    /// 1-based.
    pub home: usize,
}

impl PartitionLabel {
    pub fn slot(&self) -> SlotLabel {
        SlotLabel { block: self.block, home: self.home }
    }
}

/// A `(block, home)` pair, the unit of every discovery schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotLabel {
    pub block: usize,
    pub home: usize,
}

/// Axis-aligned box, closed on the west/north side and open on the east/south
/// side. On the line `y0 = y1 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    /// South edge.
    pub y0: f64,
    /// North edge.
    pub y1: f64,
}

impl Rect {
    pub fn center(&self) -> Point {
        Point::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn dist_to(&self, p: &Point) -> f64 {
        let dx = (self.x0 - p.x).max(p.x - self.x1).max(0.0);
        let dy = (self.y0 - p.y).max(p.y - self.y1).max(0.0);
        dx.hypot(dy)
    }

    /// Largest distance from `p` to a point of the closure.
    pub fn far_dist(&self, p: &Point) -> f64 {
        let dx = (p.x - self.x0).abs().max((p.x - self.x1).abs());
        let dy = (p.y - self.y0).abs().max((p.y - self.y1).abs());
        dx.hypot(dy)
    }

    pub fn contains(&self, p: &Point) -> bool {
        let in_x = p.x >= self.x0 && p.x < self.x1;
        if self.y0 == self.y1 {
            in_x && p.y == self.y0
        } else {
            in_x && p.y <= self.y1 && p.y > self.y0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinePartition {
    pub origin: f64,
    pub extent: f64,
    pub gamma: f64,
    pub l: f64,
    pub mu: usize,
    pub nu: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanePartition {
    /// North-west corner of the domain.
    pub origin: Point,
    pub width: f64,
    pub height: f64,
    pub gamma: f64,
    pub l: f64,
    pub home_side: f64,
    /// Blocks per region side.
    pub blocks_per_side: usize,
    /// Homes per block side.
    pub homes_per_side: usize,
    pub mu: usize,
    pub nu: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Partition {
    Line(LinePartition),
    Plane(PlanePartition),
}

fn check(s: f64, gamma: f64) -> Result<(), PartitionError> {
    if !(0.0..1.0).contains(&s) || !(gamma > 0.0 && gamma <= 1.0) {
        return Err(PartitionError::BadParams(format!("need 0 <= s < 1 and 0 < gamma <= 1, got s={s}, gamma={gamma}")));
    }
    Ok(())
}

impl Partition {
    pub fn line(s: f64, gamma: f64, origin: f64, extent: f64) -> Result<Self, PartitionError> {
        check(s, gamma)?;
        let l = (1.0 - s).max(gamma);
        Ok(Partition::Line(LinePartition {
            origin,
            extent: extent.max(0.0),
            gamma,
            l,
            mu: ceil_guarded(3.0 / l),
            nu: ceil_guarded(l / gamma),
        }))
    }

    pub fn plane(s: f64, gamma: f64, origin: Point, width: f64, height: f64) -> Result<Self, PartitionError> {
        check(s, gamma)?;
        let sqrt2 = 2f64.sqrt();
        let l = ((1.0 - s) / (3.0 * sqrt2)).max(gamma / sqrt2);
        let blocks_per_side = ceil_guarded(3.0 / l);
        let homes_per_side = ceil_guarded(sqrt2 * l / gamma);
        Ok(Partition::Plane(PlanePartition {
            origin,
            width: width.max(0.0),
            height: height.max(0.0),
            gamma,
            l,
            home_side: gamma / sqrt2,
            blocks_per_side,
            homes_per_side,
            mu: blocks_per_side * blocks_per_side,
            nu: homes_per_side * homes_per_side,
        }))
    }

    /// Partition covering the network's bounding box; the network must use `r = 1`.
    pub fn for_network(net: &Network) -> Result<Self, PartitionError> {
        let p = net.params();
        if p.r != 1.0 {
            return Err(PartitionError::NotUnitRange(p.r));
        }
        let (lo, hi) = if net.is_empty() { (Point::new(0.0, 0.0), Point::new(0.0, 0.0)) } else { net.bounds() };
        match net.dim() {
            Dim::Line => Self::line(p.s, p.gamma, lo.x, hi.x - lo.x),
            Dim::Plane => Self::plane(p.s, p.gamma, Point::new(lo.x, hi.y), hi.x - lo.x, hi.y - lo.y),
        }
    }

    pub fn dim(&self) -> Dim {
        match self {
            Partition::Line(_) => Dim::Line,
            Partition::Plane(_) => Dim::Plane,
        }
    }

    pub fn l(&self) -> f64 {
        match self {
            Partition::Line(p) => p.l,
            Partition::Plane(p) => p.l,
        }
    }

    pub fn mu(&self) -> usize {
        match self {
            Partition::Line(p) => p.mu,
            Partition::Plane(p) => p.mu,
        }
    }

    pub fn nu(&self) -> usize {
        match self {
            Partition::Line(p) => p.nu,
            Partition::Plane(p) => p.nu,
        }
    }

    /// Length of one discovery procedure, `mu * nu`.
    pub fn slots(&self) -> usize {
        self.mu() * self.nu()
    }

    pub fn regions(&self) -> usize {
        let (cols, rows) = self.region_grid();
        cols * rows
    }

    /// `(columns, rows)` of the region mesh; the line has one row.
    pub fn region_grid(&self) -> (usize, usize) {
        match self {
            Partition::Line(p) => ((p.extent / 3.0).floor() as usize + 1, 1),
            Partition::Plane(p) => ((p.width / 3.0).floor() as usize + 1, (p.height / 3.0).floor() as usize + 1),
        }
    }

    pub fn label_of(&self, pt: &Point) -> Result<PartitionLabel, PartitionError> {
        let outside = PartitionError::OutsideDomain { x: pt.x, y: pt.y };
        match self {
            Partition::Line(p) => {
                let off = pt.x - p.origin;
                if pt.y != 0.0 || off < -EDGE_SLACK || off > p.extent + EDGE_SLACK {
                    return Err(outside);
                }
                let region = floor_index(off / 3.0, self.regions());
                let in_region = off - 3.0 * region as f64;
                let b = floor_index(in_region / p.l, p.mu);
                let h = floor_index((in_region - b as f64 * p.l) / p.gamma, p.nu);
                Ok(PartitionLabel { region, block: b + 1, home: h + 1 })
            }
            Partition::Plane(p) => {
                let dx = pt.x - p.origin.x;
                let dy = p.origin.y - pt.y;
                if dx < -EDGE_SLACK || dx > p.width + EDGE_SLACK || dy < -EDGE_SLACK || dy > p.height + EDGE_SLACK {
                    return Err(outside);
                }
                let (cols, rows) = self.region_grid();
                let rc = floor_index(dx / 3.0, cols);
                let rr = floor_index(dy / 3.0, rows);
                let (ix, iy) = (dx - 3.0 * rc as f64, dy - 3.0 * rr as f64);
                let bc = floor_index(ix / p.l, p.blocks_per_side);
                let br = floor_index(iy / p.l, p.blocks_per_side);
                let (jx, jy) = (ix - bc as f64 * p.l, iy - br as f64 * p.l);
                let hc = floor_index(jx / p.home_side, p.homes_per_side);
                let hr = floor_index(jy / p.home_side, p.homes_per_side);
                Ok(PartitionLabel {
                    region: rr * cols + rc,
                    block: br * p.blocks_per_side + bc + 1,
                    home: hr * p.homes_per_side + hc + 1,
                })
            }
        }
    }

    /// 0-based slot `(block - 1) * nu + (home - 1)`.
    pub fn schedule_index(&self, label: SlotLabel) -> usize {
        (label.block - 1) * self.nu() + (label.home - 1)
    }

    pub fn slot_label(&self, index: usize) -> SlotLabel {
        SlotLabel { block: index / self.nu() + 1, home: index % self.nu() + 1 }
    }

    pub fn validate(&self, label: SlotLabel) -> Result<(), PartitionError> {
        if label.block == 0 || label.block > self.mu() || label.home == 0 || label.home > self.nu() {
            return Err(PartitionError::BadLabel(format!("({}, {})", label.block, label.home)));
        }
        Ok(())
    }

    /// Row and column (0-based, from the north-west) of a home inside its block.
    /// On the line the row is always 0.
    pub fn home_coords(&self, home: usize) -> (usize, usize) {
        match self {
            Partition::Line(_) => (0, home - 1),
            Partition::Plane(p) => ((home - 1) / p.homes_per_side, (home - 1) % p.homes_per_side),
        }
    }

    pub fn homes_per_side(&self) -> usize {
        match self {
            Partition::Line(p) => p.nu,
            Partition::Plane(p) => p.homes_per_side,
        }
    }

    pub fn region_origin(&self, region: usize) -> Point {
        match self {
            Partition::Line(p) => Point::on_line(p.origin + 3.0 * region as f64),
            Partition::Plane(p) => {
                let cols = self.region_grid().0;
                Point::new(p.origin.x + 3.0 * (region % cols) as f64, p.origin.y - 3.0 * (region / cols) as f64)
            }
        }
    }

    /// Geometry of a block, clipped to its region.
    pub fn block_rect(&self, region: usize, block: usize) -> Rect {
        let o = self.region_origin(region);
        match self {
            Partition::Line(p) => {
                let x0 = o.x + (block - 1) as f64 * p.l;
                Rect { x0, x1: (x0 + p.l).min(o.x + 3.0), y0: 0.0, y1: 0.0 }
            }
            Partition::Plane(p) => {
                let (br, bc) = ((block - 1) / p.blocks_per_side, (block - 1) % p.blocks_per_side);
                let x0 = o.x + bc as f64 * p.l;
                let y1 = o.y - br as f64 * p.l;
                Rect { x0, x1: (x0 + p.l).min(o.x + 3.0), y0: (y1 - p.l).max(o.y - 3.0), y1 }
            }
        }
    }

    /// Geometry of a home, clipped to its block.
    pub fn home_rect(&self, region: usize, block: usize, home: usize) -> Rect {
        let b = self.block_rect(region, block);
        match self {
            Partition::Line(p) => {
                let x0 = b.x0 + (home - 1) as f64 * p.gamma;
                Rect { x0, x1: (x0 + p.gamma).min(b.x1), y0: 0.0, y1: 0.0 }
            }
            Partition::Plane(p) => {
                let (hr, hc) = self.home_coords(home);
                let x0 = b.x0 + hc as f64 * p.home_side;
                let y1 = b.y1 - hr as f64 * p.home_side;
                Rect { x0, x1: (x0 + p.home_side).min(b.x1), y0: (y1 - p.home_side).max(b.y0), y1 }
            }
        }
    }

    /// The copy of home `label` closest to `p`, searching the regions around `p`.
    pub fn nearest_home(&self, p: &Point, label: SlotLabel) -> (usize, Rect) {
        let (cols, rows) = self.region_grid();
        let here = self.label_of(p).map(|l| l.region).unwrap_or(0);
        let (hc, hr) = (here % cols, here / cols);
        let mut best: Option<(f64, usize, Rect)> = None;
        for r in hr.saturating_sub(1)..=(hr + 1).min(rows - 1) {
            for c in hc.saturating_sub(1)..=(hc + 1).min(cols - 1) {
                let region = r * cols + c;
                let rect = self.home_rect(region, label.block, label.home);
                let d = rect.dist_to(p);
                if best.as_ref().is_none_or(|b| d < b.0) {
                    best = Some((d, region, rect));
                }
            }
        }
        let (_, region, rect) = best.expect("at least one region");
        (region, rect)
    }
}
