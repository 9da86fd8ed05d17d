//! Node placements, the swamping link relation and placement generators.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;

/// Generators keep every pairwise distance at least this far from `s` and `r`.
pub const BOUNDARY_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid node id {0}")]
    InvalidNode(NodeId),
    #[error("link query on a single node {0}")]
    SelfLink(NodeId),
    #[error("invalid radio parameters: {0}")]
    BadParams(String),
    #[error("nodes {a} and {b} are {dist} apart, below gamma = {gamma}")]
    TooClose { a: NodeId, b: NodeId, dist: f64, gamma: f64 },
    #[error("non-finite coordinate for node {0}")]
    NonFinite(NodeId),
    #[error("mixed dimensions in placement")]
    MixedDim,
    #[error("infeasible placement: {0}")]
    Infeasible(String),
    #[error("placement parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub const fn on_line(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dim {
    Line,
    Plane,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub r: f64,
    pub s: f64,
    pub gamma: f64,
}

impl RadioParams {
    pub fn new(r: f64, s: f64, gamma: f64) -> Result<Self, GeometryError> {
        if !(r.is_finite() && s.is_finite() && gamma.is_finite()) {
            return Err(GeometryError::BadParams("non-finite value".into()));
        }
        if s < 0.0 || r <= 0.0 {
            return Err(GeometryError::BadParams(format!("need r > 0 and s >= 0, got r={r}, s={s}")));
        }
        if s >= r {
            return Err(GeometryError::BadParams(format!("need s < r, got r={r}, s={s}")));
        }
        if gamma <= 0.0 {
            return Err(GeometryError::BadParams(format!("need gamma > 0, got {gamma}")));
        }
        Ok(RadioParams { r, s, gamma })
    }

    /// Unit range, as used by the unknown-topology algorithms.
    pub fn unit(s: f64, gamma: f64) -> Result<Self, GeometryError> {
        Self::new(1.0, s, gamma)
    }

    /// Granularity `1 / gamma`.
    pub fn g(&self) -> f64 {
        1.0 / self.gamma
    }

    pub fn in_range(&self, d: f64) -> bool {
        d > self.s && d <= self.r
    }

    /// Swamping uses the inclusive convention `0 < d <= s`.
    pub fn swamps(&self, d: f64) -> bool {
        d > 0.0 && d <= self.s
    }
}

/// A placement together with its link relation.
#[derive(Clone, Debug)]
pub struct Network {
    params: RadioParams,
    dim: Dim,
    positions: Vec<Point>,
    links: Vec<Vec<NodeId>>,
    close: Vec<Vec<NodeId>>,
}

impl Network {
    pub fn new(params: RadioParams, dim: Dim, positions: Vec<Point>) -> Result<Self, GeometryError> {
        for (i, p) in positions.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(GeometryError::NonFinite(i));
            }
            if dim == Dim::Line && p.y != 0.0 {
                return Err(GeometryError::MixedDim);
            }
        }
        let n = positions.len();
        let mut links = vec![Vec::new(); n];
        let mut close = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                let d = positions[a].dist(&positions[b]);
                if d < params.gamma {
                    return Err(GeometryError::TooClose { a, b, dist: d, gamma: params.gamma });
                }
                if params.in_range(d) {
                    links[a].push(b);
                    links[b].push(a);
                } else if params.swamps(d) {
                    close[a].push(b);
                    close[b].push(a);
                }
            }
        }
        Ok(Network { params, dim, positions, links, close })
    }

    pub fn params(&self) -> &RadioParams {
        &self.params
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, u: NodeId) -> Result<Point, GeometryError> {
        self.positions.get(u).copied().ok_or(GeometryError::InvalidNode(u))
    }

    pub fn dist(&self, u: NodeId, v: NodeId) -> Result<f64, GeometryError> {
        Ok(self.position(u)?.dist(&self.position(v)?))
    }

    pub fn link(&self, u: NodeId, v: NodeId) -> Result<bool, GeometryError> {
        if u == v {
            self.position(u)?;
            return Err(GeometryError::SelfLink(u));
        }
        Ok(self.params.in_range(self.dist(u, v)?))
    }

    /// Sorted link neighbours of `u`.
    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId], GeometryError> {
        self.links.get(u).map(|v| v.as_slice()).ok_or(GeometryError::InvalidNode(u))
    }

    /// Sorted nodes within swamping distance of `u`.
    pub fn swampers(&self, u: NodeId) -> Result<&[NodeId], GeometryError> {
        self.close.get(u).map(|v| v.as_slice()).ok_or(GeometryError::InvalidNode(u))
    }

    pub(crate) fn links_unchecked(&self, u: NodeId) -> &[NodeId] {
        &self.links[u]
    }

    pub(crate) fn close_unchecked(&self, u: NodeId) -> &[NodeId] {
        &self.close[u]
    }

    /// Components of the link graph, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.links[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.positions {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PlacementSpec {
    LatticeLine { n: usize },
    /// `n` must be a perfect square.
    #[serde(rename = "lattice-2d", alias = "lattice2d")]
    Lattice2d { n: usize },
    RandomLine { length: f64, n: usize },
    RandomPlane { width: f64, height: f64, n: usize },
    /// Evenly spaced chain on `[0, length]`; spacing defaults to `gamma * CHAIN_PAD`.
    ChainLine { length: f64, spacing: Option<f64> },
    Explicit { points: Vec<Point>, dim: Dim },
    /// Point file in the `parse_points` format.
    File { path: String },
}

impl PlacementSpec {
    pub fn dim(&self) -> Dim {
        match self {
            PlacementSpec::LatticeLine { .. }
            | PlacementSpec::RandomLine { .. }
            | PlacementSpec::ChainLine { .. } => Dim::Line,
            PlacementSpec::Lattice2d { .. } | PlacementSpec::RandomPlane { .. } => Dim::Plane,
            PlacementSpec::Explicit { dim, .. } => *dim,
            PlacementSpec::File { path } => std::fs::read_to_string(path)
                .ok()
                .and_then(|t| parse_points(&t).ok())
                .map_or(Dim::Line, |(_, d)| d),
        }
    }
}

pub const RETRY_BUDGET: usize = 200;

/// Default chain spacing is gamma times this, which keeps pair distances off
/// the `s` and `r` boundaries for the usual decimal parameters.
pub const CHAIN_PAD: f64 = 1.0 + 1e-6;

pub fn generate_placement(spec: &PlacementSpec, params: RadioParams, seed: u64) -> Result<Network, GeometryError> {
    match spec {
        PlacementSpec::LatticeLine { n } => {
            let pts = (0..*n).map(|i| Point::on_line(i as f64)).collect();
            Network::new(params, Dim::Line, pts)
        }
        PlacementSpec::Lattice2d { n } => {
            let side = isqrt(*n).ok_or_else(|| GeometryError::Infeasible(format!("{n} is not a perfect square")))?;
            Network::new(params, Dim::Plane, lattice_points(side))
        }
        PlacementSpec::ChainLine { length, spacing } => {
            let step = spacing.unwrap_or(params.gamma * CHAIN_PAD);
            if step < params.gamma || *length < 0.0 {
                return Err(GeometryError::Infeasible(format!("chain spacing {step} is below gamma or length is negative")));
            }
            let count = (length / step + 1e-9).floor() as usize + 1;
            let pts: Vec<Point> = (0..count).map(|i| Point::on_line(i as f64 * step)).collect();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d = pts[j].x - pts[i].x;
                    if (d - params.s).abs() <= BOUNDARY_GUARD || (d - params.r).abs() <= BOUNDARY_GUARD {
                        return Err(GeometryError::Infeasible(format!("chain nodes {i} and {j} sit on a range boundary")));
                    }
                }
            }
            Network::new(params, Dim::Line, pts)
        }
        PlacementSpec::Explicit { points, dim } => Network::new(params, *dim, points.clone()),
        PlacementSpec::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Infeasible(format!("{path}: {e}")))?;
            let (pts, dim) = parse_points(&text)?;
            Network::new(params, dim, pts)
        }
        PlacementSpec::RandomLine { length, n } => {
            grow_random(params, Dim::Line, *length, 0.0, *n, seed)
        }
        PlacementSpec::RandomPlane { width, height, n } => {
            grow_random(params, Dim::Plane, *width, *height, *n, seed)
        }
    }
}

/// Points of the `side x side` integer grid, row-major from the origin.
pub fn lattice_points(side: usize) -> Vec<Point> {
    let mut pts = Vec::with_capacity(side * side);
    for j in 0..side {
        for i in 0..side {
            pts.push(Point::new(i as f64, j as f64));
        }
    }
    pts
}

pub fn isqrt(n: usize) -> Option<usize> {
    let mut k = (n as f64).sqrt().round() as usize;
    while k * k > n {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    (k * k == n).then_some(k)
}

/// Grows a connected placement: each new node is dropped at link distance
/// from a random existing node and kept only if it respects gamma and stays
/// clear of the `s` and `r` boundaries with respect to every placed node.
fn grow_random(params: RadioParams, dim: Dim, w: f64, h: f64, n: usize, seed: u64) -> Result<Network, GeometryError> {
    if n == 0 {
        return Network::new(params, dim, Vec::new());
    }
    if w < 0.0 || h < 0.0 {
        return Err(GeometryError::Infeasible("negative domain".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = |p: &Point| p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h;
    let tries_per_node = 400;
    for _ in 0..RETRY_BUDGET {
        let first = match dim {
            Dim::Line => Point::on_line(rng.gen_range(0.0..=w)),
            Dim::Plane => Point::new(rng.gen_range(0.0..=w), rng.gen_range(0.0..=h)),
        };
        let mut pts = vec![first];
        let mut failed = false;
        while pts.len() < n {
            let mut placed = false;
            for _ in 0..tries_per_node {
                let parent = pts[rng.gen_range(0..pts.len())];
                let d = params.s + (params.r - params.s) * (1.0 - rng.gen::<f64>());
                let cand = match dim {
                    Dim::Line => {
                        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        Point::on_line(parent.x + sign * d)
                    }
                    Dim::Plane => {
                        let a = rng.gen_range(0.0..std::f64::consts::TAU);
                        Point::new(parent.x + d * a.cos(), parent.y + d * a.sin())
                    }
                };
                if inside(&cand) && acceptable(&params, &pts, &cand) {
                    pts.push(cand);
                    placed = true;
                    break;
                }
            }
            if !placed {
                failed = true;
                break;
            }
        }
        if failed {
            continue;
        }
        if dim == Dim::Line {
            pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        }
        let net = Network::new(params, dim, pts)?;
        if net.is_connected() {
            return Ok(net);
        }
    }
    Err(GeometryError::Infeasible(format!(
        "could not place {n} connected nodes after {RETRY_BUDGET} attempts"
    )))
}

fn acceptable(params: &RadioParams, pts: &[Point], cand: &Point) -> bool {
    pts.iter().all(|p| {
        let d = p.dist(cand);
        d >= params.gamma + BOUNDARY_GUARD
            && (d - params.s).abs() > BOUNDARY_GUARD
            && (d - params.r).abs() > BOUNDARY_GUARD
    })
}

/// Parses one point per line: `x` or `x y`. Blank lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<(Vec<Point>, Dim), GeometryError> {
    let mut pts = Vec::new();
    let mut dim = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
        let parse = |f: &str| {
            f.parse::<f64>().map_err(|e| GeometryError::Parse { line: i + 1, msg: format!("{f:?}: {e}") })
        };
        let (p, d) = match fields.as_slice() {
            [x] => (Point::on_line(parse(x)?), Dim::Line),
            [x, y] => (Point::new(parse(x)?, parse(y)?), Dim::Plane),
            _ => {
                return Err(GeometryError::Parse { line: i + 1, msg: "expected one or two coordinates".into() })
            }
        };
        match dim {
            None => dim = Some(d),
            Some(prev) if prev != d => {
                return Err(GeometryError::Parse { line: i + 1, msg: "mixed dimensions".into() })
            }
            _ => {}
        }
        pts.push(p);
    }
    Ok((pts, dim.unwrap_or(Dim::Line)))
}

pub fn format_points(net: &Network) -> String {
    let mut out = String::new();
    for p in net.positions() {
        match net.dim() {
            Dim::Line => out.push_str(&format!("{}\n", p.x)),
            Dim::Plane => out.push_str(&format!("{} {}\n", p.x, p.y)),
        }
    }
    out
}
