//! Broadcast on the integer lattice line and the 2-D lattice when the topology is known.

use thiserror::Error;

use crate::engine::{self, EngineError, Round, RunOptions, ScheduledProgram, SimResult};
use crate::geometry::{generate_placement, isqrt, GeometryError, Network, NodeId, PlacementSpec, RadioParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("broadcast is impossible for r={r}, s={s}: {reason}")]
    Impossible { r: u32, s: u32, reason: String },
    #[error("lattice with n={n}, r={r}, s={s} is disconnected; {unreachable} nodes cannot be reached from {start}")]
    Disconnected { n: usize, r: u32, s: u32, start: usize, unreachable: usize },
    #[error("invalid lattice parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Distance between consecutive first-round transmitters of a local scheme.
///
/// `r = 1, s = 0` has no swamping and every node is a multiple of `r`, so a
/// unit step is used there.
pub fn step_size(r: u32, s: u32) -> Result<u32, LatticeError> {
    if r == 0 {
        return Err(LatticeError::BadParams("r must be positive".into()));
    }
    if s >= r {
        return Err(LatticeError::BadParams(format!("need s < r, got r={r}, s={s}")));
    }
    if s > 0 && r - s == 1 {
        return Err(LatticeError::Impossible {
            r,
            s,
            reason: "only multiples of r are reachable from node 0".into(),
        });
    }
    Ok((r - s - 1).max(1))
}

/// Number of steps `x = ceil(r / (r - (s + 1)))`.
pub fn steps(r: u32, s: u32) -> Result<u32, LatticeError> {
    let st = step_size(r, s)?;
    Ok(r.div_ceil(st))
}

pub fn lattice_line_bound(n: usize, r: u32, s: u32) -> Result<u64, LatticeError> {
    let x = steps(r, s)? as u64;
    Ok((n as u64) / r as u64 + 3 * (x + 1))
}

pub fn lattice_plane_bound(n: usize, r: u32, s: u32) -> Result<u64, LatticeError> {
    let side = isqrt(n).ok_or_else(|| LatticeError::BadParams(format!("{n} is not a perfect square")))?;
    let x = steps(r, s)? as u64;
    Ok(4 * (side as u64 / r as u64) + 12 * (x + 1))
}

/// The two-round-per-step scheme anchored at `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalScheme {
    pub k: i64,
    pub r: u32,
    pub s: u32,
    pub x: u32,
    pub starred: bool,
}

impl LocalScheme {
    pub fn new(k: i64, r: u32, s: u32, starred: bool) -> Result<Self, LatticeError> {
        if r <= s + 1 {
            return Err(LatticeError::Impossible { r, s, reason: "local scheme needs r - s > 1".into() });
        }
        Ok(LocalScheme { k, r, s, x: steps(r, s)?, starred })
    }

    pub fn step(&self) -> i64 {
        (self.r - self.s - 1) as i64
    }

    pub fn step_count(&self) -> u32 {
        self.x + self.starred as u32
    }

    pub fn rounds(&self) -> u64 {
        2 * self.step_count() as u64
    }

    pub fn a(&self, i: u32) -> i64 {
        self.k + i as i64 * self.step()
    }

    pub fn b(&self, i: u32) -> i64 {
        self.a(i) + self.r as i64
    }

    /// Nodes the scheme is guaranteed to inform: `A_k` and, when starred, `B_k`.
    pub fn targets(&self) -> Vec<i64> {
        let mut out: Vec<i64> = (0..self.x).map(|i| self.a(i)).collect();
        if self.starred {
            out.extend((0..self.x).map(|i| self.b(i)));
            out.push(self.a(self.x));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Per-round transmitter positions.
    pub fn schedule(&self) -> Vec<i64> {
        (0..self.step_count()).flat_map(|i| [self.a(i), self.b(i)]).collect()
    }
}

/// One program per lattice node for a standalone run of `scheme` on a line of `n` nodes.
pub fn local_scheme_programs(scheme: &LocalScheme, net: &Network) -> Vec<ScheduledProgram> {
    let n = net.len() as i64;
    let sched: Vec<Vec<NodeId>> = scheme
        .schedule()
        .into_iter()
        .map(|p| if (0..n).contains(&p) { vec![p as NodeId] } else { vec![] })
        .collect();
    let holders: Vec<NodeId> = if (0..n).contains(&scheme.k) { vec![scheme.k as NodeId] } else { vec![] };
    engine::scheduled_programs(net, &sched, &holders)
}

pub fn lattice_line(n: usize, r: u32, s: u32) -> Result<Network, LatticeError> {
    let params = RadioParams::new(r as f64, s as f64, 1.0)?;
    Ok(generate_placement(&PlacementSpec::LatticeLine { n }, params, 0)?)
}

pub fn lattice_2d(n: usize, r: u32, s: u32) -> Result<Network, LatticeError> {
    let params = RadioParams::new(r as f64, s as f64, 1.0)?;
    Ok(generate_placement(&PlacementSpec::Lattice2d { n }, params, 0)?)
}

/// Schedule of Algorithm A on a line of `n` nodes, as per-round lists of positions.
///
/// Sparse phase: the multiples of `r` relative to the source are informed one
/// per round, positives first. Fill phase: `x + 1` steps; in step `i` every
/// node at offset `i * (r - s - 1)` past a multiple transmits, split into three
/// rounds by the multiple's index mod 3 so that simultaneous senders are `3r`
/// apart. The second round of a classic step coincides with the first round of
/// the next multiple's scheme and is therefore folded in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePlanA {
    pub n: usize,
    pub r: u32,
    pub s: u32,
    pub source: usize,
    pub x: u32,
    pub sparse: Vec<usize>,
    pub fill: Vec<Vec<usize>>,
}

impl LatticePlanA {
    pub fn new(n: usize, r: u32, s: u32, source: usize) -> Result<Self, LatticeError> {
        if source >= n {
            return Err(LatticeError::BadParams(format!("source {source} outside 0..{n}")));
        }
        let st = step_size(r, s)? as i64;
        let x = steps(r, s)?;
        let (r_, src, n_) = (r as i64, source as i64, n as i64);

        let pos = (n_ - 1 - src) / r_;
        let neg = src / r_;
        let mut sparse = Vec::new();
        if pos > 0 || neg > 0 {
            sparse.push(source);
        }
        sparse.extend((1..pos).map(|j| (src + j * r_) as usize));
        sparse.extend((1..neg).map(|j| (src - j * r_) as usize));

        let mut fill = Vec::new();
        if r > 1 {
            let jmin = -neg - 1;
            let jmax = pos + 1;
            for i in 0..=x as i64 {
                for family in 0..3 {
                    let mut round = Vec::new();
                    for j in jmin..=jmax {
                        if j.rem_euclid(3) != family {
                            continue;
                        }
                        let p = src + j * r_ + i * st;
                        if (0..n_).contains(&p) {
                            round.push(p as usize);
                        }
                    }
                    round.sort_unstable();
                    fill.push(round);
                }
            }
        }
        Ok(LatticePlanA { n, r, s, source, x, sparse, fill })
    }

    pub fn rounds(&self) -> Vec<Vec<usize>> {
        self.sparse.iter().map(|&p| vec![p]).chain(self.fill.iter().cloned()).collect()
    }

    pub fn len(&self) -> usize {
        self.sparse.len() + self.fill.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One transmitter per round: the informed node with the most uninformed
/// neighbours, lowest id first. Used when the line is too short for the
/// multiple-of-`r` layout.
pub fn greedy_schedule(net: &Network, source: NodeId) -> Vec<Vec<NodeId>> {
    let n = net.len();
    let mut informed = vec![false; n];
    informed[source] = true;
    let mut out = Vec::new();
    loop {
        let best = (0..n)
            .filter(|&v| informed[v])
            .map(|v| (net.links_unchecked(v).iter().filter(|&&w| !informed[w]).count(), v))
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        match best {
            Some((gain, v)) if gain > 0 => {
                for &w in net.links_unchecked(v) {
                    informed[w] = true;
                }
                out.push(vec![v]);
            }
            _ => break,
        }
    }
    out
}

fn require_connected(net: &Network, source: usize, r: u32, s: u32) -> Result<(), LatticeError> {
    let comps = net.connected_components();
    let own = comps.iter().find(|c| c.binary_search(&source).is_ok()).map_or(0, |c| c.len());
    if own != net.len() {
        return Err(LatticeError::Disconnected { n: net.len(), r, s, start: source, unreachable: net.len() - own });
    }
    Ok(())
}

fn run_schedule(net: &Network, sched: &[Vec<NodeId>], source: usize, max_rounds: Round) -> Result<SimResult, LatticeError> {
    let mut progs = engine::scheduled_programs(net, sched, &[source]);
    Ok(engine::run(net, &mut progs, RunOptions::full(max_rounds.max(1)))?)
}

/// Algorithm A on the lattice line `0..n`.
pub fn run_algorithm_a(n: usize, r: u32, s: u32, source: usize) -> Result<SimResult, LatticeError> {
    let plan = LatticePlanA::new(n, r, s, source)?;
    let net = lattice_line(n, r, s)?;
    require_connected(&net, source, r, s)?;
    let bound = lattice_line_bound(n, r, s)?;
    let sched = if n < 4 * r as usize { greedy_schedule(&net, source) } else { plan.rounds() };
    run_schedule(&net, &sched, source, 16 * bound)
}

/// Algorithm A² on the `sqrt(n) x sqrt(n)` lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePlanA2 {
    pub side: usize,
    pub r: u32,
    pub s: u32,
    pub d: usize,
    pub source: (usize, usize),
    /// Column coordinates of the three vertical phases, after clamping to the grid.
    pub columns: [Vec<usize>; 3],
}

pub fn thick_line_radius(r: u32) -> usize {
    (3f64.sqrt() * r as f64 / 2.0).floor() as usize
}

impl LatticePlanA2 {
    pub fn new(n: usize, r: u32, s: u32, source: usize) -> Result<Self, LatticeError> {
        if r < 2 {
            return Err(LatticeError::Impossible { r, s, reason: "the 2-D lattice needs r >= 2".into() });
        }
        if r - s < 2 || s >= r {
            return Err(LatticeError::Impossible { r, s, reason: "line broadcast needs r - s >= 2".into() });
        }
        let side = isqrt(n).ok_or_else(|| LatticeError::BadParams(format!("{n} is not a perfect square")))?;
        if source >= n {
            return Err(LatticeError::BadParams(format!("source {source} outside 0..{n}")));
        }
        let d = thick_line_radius(r);
        let mut columns: [Vec<usize>; 3] = Default::default();
        let mut m = 0;
        while 2 * m * d < side {
            let c = ((2 * m + 1) * d).min(side - 1);
            columns[m % 3].push(c);
            m += 1;
        }
        for c in columns.iter_mut() {
            c.dedup();
        }
        Ok(LatticePlanA2 { side, r, s, d, source: (source % side, source / side), columns })
    }

    /// Unclamped column coordinates `d, 7d, ...`, `3d, 9d, ...`, `5d, 11d, ...` inside the grid.
    pub fn nominal_columns(&self) -> [Vec<usize>; 3] {
        let mut out: [Vec<usize>; 3] = Default::default();
        for (p, list) in out.iter_mut().enumerate() {
            let mut c = (2 * p + 1) * self.d;
            while c < self.side {
                list.push(c);
                c += 6 * self.d;
            }
        }
        out
    }

    pub fn node(&self, col: usize, row: usize) -> NodeId {
        row * self.side + col
    }

    pub fn rounds(&self) -> Result<Vec<Vec<NodeId>>, LatticeError> {
        let (sx, sy) = self.source;
        let row_plan = LatticePlanA::new(self.side, self.r, self.s, sx)?;
        let mut out: Vec<Vec<NodeId>> =
            row_plan.rounds().into_iter().map(|t| t.into_iter().map(|i| self.node(i, sy)).collect()).collect();
        let col_plan = LatticePlanA::new(self.side, self.r, self.s, sy)?;
        for cols in &self.columns {
            if cols.is_empty() {
                continue;
            }
            for t in col_plan.rounds() {
                let mut round: Vec<NodeId> =
                    cols.iter().flat_map(|&c| t.iter().map(move |&j| (c, j))).map(|(c, j)| self.node(c, j)).collect();
                round.sort_unstable();
                out.push(round);
            }
        }
        Ok(out)
    }
}

pub fn run_algorithm_a2(n: usize, r: u32, s: u32, source: usize) -> Result<SimResult, LatticeError> {
    let plan = LatticePlanA2::new(n, r, s, source)?;
    let net = lattice_2d(n, r, s)?;
    require_connected(&net, source, r, s)?;
    let bound = lattice_plane_bound(n, r, s)?;
    let sched = if plan.side < 4 * r as usize { greedy_schedule(&net, source) } else { plan.rounds()? };
    run_schedule(&net, &sched, source, 16 * bound)
}

/// Shortest covered stretch, on a line parallel to the transmitter's line at
/// distance `dist`: one side when the swamping disc still cuts it, the whole
/// chord otherwise.
pub fn annulus_line_coverage(r: f64, s: f64, dist: f64) -> f64 {
    if dist > r || dist < 0.0 {
        return 0.0;
    }
    let outer = (r * r - dist * dist).sqrt();
    if dist <= s {
        outer - (s * s - dist * dist).sqrt()
    } else {
        2.0 * outer
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_shape() {
        let sch = LocalScheme::new(0, 3, 1, false).unwrap();
        assert_eq!(sch.x, 3);
        assert_eq!((0..3).map(|i| sch.a(i)).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!((0..3).map(|i| sch.b(i)).collect::<Vec<_>>(), vec![3, 4, 5]);
        assert_eq!(sch.rounds(), 6);
        assert_eq!(LocalScheme::new(0, 2, 0, false).unwrap().x, 2);
        assert_eq!(LocalScheme::new(0, 3, 1, true).unwrap().rounds(), 8);
        assert!(matches!(LocalScheme::new(0, 3, 2, false), Err(LatticeError::Impossible { .. })));
    }

    #[test]
    fn degenerate_unit_range() {
        assert_eq!(steps(1, 0).unwrap(), 1);
        let res = run_algorithm_a(2, 1, 0, 0).unwrap();
        assert!(res.all_informed());
        assert!(res.rounds_to_complete().unwrap() <= 7);
    }

    #[test]
    fn line_bound_example() {
        assert_eq!(lattice_line_bound(20, 3, 1).unwrap(), 18);
        let res = run_algorithm_a(20, 3, 1, 0).unwrap();
        assert!(res.all_informed());
        assert!(res.rounds_to_complete().unwrap() <= 18);
        let mut informed = vec![0usize];
        for t in &res.rounds[..6] {
            informed.extend(t.deliveries.iter().map(|d| d.receiver));
        }
        for m in [0, 3, 6, 9, 12, 15, 18] {
            assert!(informed.contains(&m), "{m} not informed after the sparse phase");
        }
    }

    #[test]
    fn source_in_the_middle() {
        let res = run_algorithm_a(50, 4, 1, 23).unwrap();
        assert!(res.all_informed());
        assert!(res.rounds_to_complete().unwrap() <= lattice_line_bound(50, 4, 1).unwrap());
        assert!(res.rounds.iter().all(|t| t.collision_blocked.is_empty()));
    }

    #[test]
    fn impossibility() {
        assert!(matches!(run_algorithm_a(20, 3, 2, 0), Err(LatticeError::Impossible { .. })));
        assert!(matches!(run_algorithm_a2(100, 1, 0, 0), Err(LatticeError::Impossible { .. })));
    }

    #[test]
    fn a2_example() {
        assert_eq!(thick_line_radius(3), 2);
        assert_eq!(lattice_plane_bound(100, 3, 1).unwrap(), 60);
        let plan = LatticePlanA2::new(100, 3, 1, 0).unwrap();
        assert_eq!(plan.nominal_columns(), [vec![2], vec![6], vec![]]);
        assert_eq!(plan.columns, [vec![2], vec![6], vec![9]]);
        let res = run_algorithm_a2(100, 3, 1, 0).unwrap();
        assert!(res.all_informed());
        assert!(res.rounds_to_complete().unwrap() <= 60);
    }

    #[test]
    fn annulus_examples() {
        assert_eq!(annulus_line_coverage(3.0, 1.0, 0.0), 2.0);
        assert!((annulus_line_coverage(3.0, 1.0, 2.0) - 2.0 * 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(annulus_line_coverage(3.0, 1.0, 3.5), 0.0);
    }
}
