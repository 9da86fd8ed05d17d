//! Brute-force reference implementations and lemma audits.
//!
//! Nothing here calls the link predicates of `geometry`; distances are
//! compared squared, straight from coordinates.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discovery::KnowledgeSet;
use crate::geometry::{Dim, Network, NodeId, Point};
use crate::partition::{Partition, PartitionLabel};
use crate::spokesmen::{check_closer_farther, elect_plane_spokesmen};

fn d2(a: &Point, b: &Point) -> f64 {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    dx * dx + dy * dy
}

fn linked(net: &Network, a: &Point, b: &Point) -> bool {
    let p = net.params();
    let d = d2(a, b);
    d > p.s * p.s && d <= p.r * p.r
}

fn swamped(net: &Network, a: &Point, b: &Point) -> bool {
    let s = net.params().s;
    let d = d2(a, b);
    d > 0.0 && d <= s * s
}

pub fn oracle_neighbors(net: &Network, u: NodeId) -> BTreeSet<NodeId> {
    let pts = net.positions();
    (0..pts.len()).filter(|&v| v != u && linked(net, &pts[u], &pts[v])).collect()
}

/// Sender heard by each node when `transmitters` transmit together.
pub fn oracle_reception(net: &Network, transmitters: &[NodeId]) -> Vec<Option<NodeId>> {
    let pts = net.positions();
    let tx: BTreeSet<NodeId> = transmitters.iter().copied().collect();
    (0..pts.len())
        .map(|v| {
            if tx.contains(&v) {
                return None;
            }
            if tx.iter().any(|&t| swamped(net, &pts[v], &pts[t])) {
                return None;
            }
            let mut senders = tx.iter().filter(|&&t| linked(net, &pts[v], &pts[t]));
            match (senders.next(), senders.next()) {
                (Some(&t), None) => Some(t),
                _ => None,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flooding {
    /// Hop count from the source; `None` when unreachable.
    pub hops: Vec<Option<u32>>,
    /// Largest finite hop count.
    pub eccentricity: u32,
    pub connected: bool,
}

/// Collision-free flooding: BFS layers of the link graph.
pub fn flooding_baseline(net: &Network, source: NodeId) -> Flooding {
    let n = net.len();
    let mut hops = vec![None; n];
    if source >= n {
        return Flooding { hops, eccentricity: 0, connected: n == 0 };
    }
    hops[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let h = hops[u].unwrap();
        for v in oracle_neighbors(net, u) {
            if hops[v].is_none() {
                hops[v] = Some(h + 1);
                queue.push_back(v);
            }
        }
    }
    let eccentricity = hops.iter().flatten().copied().max().unwrap_or(0);
    let connected = hops.iter().all(|h| h.is_some());
    Flooding { hops, eccentricity, connected }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub cases: u64,
    /// Counterexamples, capped at a handful.
    pub witnesses: Vec<String>,
    pub failures: u64,
}

impl LemmaCheck {
    fn new(name: &str) -> Self {
        LemmaCheck { name: name.into(), cases: 0, witnesses: Vec::new(), failures: 0 }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < 5 {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Folds another run of the same lemma into this one.
    pub fn absorb(&mut self, other: LemmaCheck) {
        self.cases += other.cases;
        self.failures += other.failures;
        let room = 5usize.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
    }
}

/// No two nodes share a (region, block, home) label.
pub fn check_single_home(net: &Network, part: &Partition) -> LemmaCheck {
    let mut c = LemmaCheck::new("single-home");
    let mut seen: BTreeMap<PartitionLabel, NodeId> = BTreeMap::new();
    for (v, p) in net.positions().iter().enumerate() {
        match part.label_of(p) {
            Ok(l) => {
                let prev = seen.insert(l, v);
                c.record(prev.is_none(), || format!("nodes {} and {v} share {l:?}", prev.unwrap()));
            }
            Err(e) => c.record(false, || format!("node {v}: {e}")),
        }
    }
    c
}

/// Equal (block, home) labels in distinct regions are more than 2 apart.
pub fn check_no_cross_region_collision(net: &Network, part: &Partition) -> LemmaCheck {
    let mut c = LemmaCheck::new("no-cross-region-collision");
    let pts = net.positions();
    let labels: Vec<Option<PartitionLabel>> = pts.iter().map(|p| part.label_of(p).ok()).collect();
    for u in 0..pts.len() {
        for v in u + 1..pts.len() {
            if let (Some(a), Some(b)) = (labels[u], labels[v]) {
                if a.slot() == b.slot() {
                    let d = d2(&pts[u], &pts[v]);
                    c.record(d > 4.0, || format!("nodes {u} and {v} share slot {:?} at distance {}", a.slot(), d.sqrt()));
                }
            }
        }
    }
    c
}

/// On the line, nodes between two nodes at most `1 - s` apart reach no one
/// the two outer nodes miss.
pub fn check_range_overlap(net: &Network) -> LemmaCheck {
    let mut c = LemmaCheck::new("range-overlap");
    if net.dim() != Dim::Line {
        return c;
    }
    let pts = net.positions();
    let s = net.params().s;
    let mut order: Vec<NodeId> = (0..pts.len()).collect();
    order.sort_by(|a, b| pts[*a].x.total_cmp(&pts[*b].x));
    let nbrs: Vec<BTreeSet<NodeId>> = (0..pts.len()).map(|u| oracle_neighbors(net, u)).collect();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            let (u, v) = (order[i], order[j]);
            if pts[v].x - pts[u].x > 1.0 - s {
                break;
            }
            for &w in &order[i + 1..j] {
                let extra = nbrs[w].iter().find(|x| !nbrs[u].contains(x) && !nbrs[v].contains(x) && **x != u && **x != v);
                c.record(extra.is_none(), || format!("node {w} between {u} and {v} reaches {}", extra.unwrap()));
            }
        }
    }
    c
}

/// Half chord cut from the line at height `dist` by a circle of radius `rad`,
/// in the factored form that stays accurate near tangency.
fn half_chord(rad: f64, dist: f64) -> f64 {
    ((rad - dist) * (rad + dist)).max(0.0).sqrt()
}

/// Shortest covered stretch on the parallel line at height `dist`.
pub fn oracle_annulus_coverage(r: f64, s: f64, dist: f64) -> f64 {
    if dist > r {
        return 0.0;
    }
    if dist <= s {
        half_chord(r, dist) - half_chord(s, dist)
    } else {
        2.0 * half_chord(r, dist)
    }
}

/// Every integer distance up to `floor(sqrt(3) r / 2)` keeps `r - s` covered.
pub fn check_annulus(r_max: u32) -> LemmaCheck {
    let mut c = LemmaCheck::new("annulus-coverage");
    for r in 2..=r_max {
        for s in 0..=r - 2 {
            let d_max = (3f64.sqrt() * r as f64 / 2.0).floor() as u32;
            for d in 0..=d_max {
                let cov = oracle_annulus_coverage(r as f64, s as f64, d as f64);
                let need = (r - s) as f64;
                c.record(cov >= need - 1e-9, || format!("r={r} s={s} dist={d}: coverage {cov} < {need}"));
            }
        }
    }
    c
}

/// Discovery knowledge against geometry. `exact` demands `N_u = Γ(u)`,
/// otherwise `N_u` must be exactly the nodes within distance 1.
pub fn check_knowledge(net: &Network, part: &Partition, knowledge: &[KnowledgeSet], exact: bool) -> LemmaCheck {
    let mut c = LemmaCheck::new(if exact { "discovery-D-exact" } else { "discovery-Dstar-complete" });
    let pts = net.positions();
    let labels: Vec<Option<PartitionLabel>> = pts.iter().map(|p| part.label_of(p).ok()).collect();
    for u in 0..pts.len() {
        let want: BTreeSet<_> = (0..pts.len())
            .filter(|&v| v != u && if exact { linked(net, &pts[u], &pts[v]) } else { d2(&pts[u], &pts[v]) <= 1.0 })
            .filter_map(|v| labels[v].map(|l| l.slot()))
            .collect();
        let got: BTreeSet<_> = knowledge[u].labels().collect();
        let missing: Vec<_> = want.difference(&got).collect();
        let spurious: Vec<_> = got.difference(&want).collect();
        c.record(missing.is_empty() && spurious.is_empty(), || format!("node {u}: missing {missing:?}, spurious {spurious:?}"));
    }
    c
}

/// Plane block: informed nodes with their home coordinates.
#[derive(Clone, Debug)]
pub struct BlockSample {
    pub k: usize,
    pub block: crate::partition::Rect,
    pub nodes: Vec<(Point, (usize, usize))>,
}

/// Random gamma-separated nodes inside one plane block with `k x k` homes of side `h`.
pub fn sample_block(rng: &mut ChaCha8Rng, k: usize, h: f64, gamma: f64, tries: usize) -> BlockSample {
    let side = k as f64 * h;
    let mut nodes: Vec<(Point, (usize, usize))> = Vec::new();
    let mut taken = BTreeSet::new();
    for _ in 0..tries {
        let p = Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
        let home = (((side - p.y) / h).floor().min(k as f64 - 1.0) as usize, (p.x / h).floor().min(k as f64 - 1.0) as usize);
        if taken.contains(&home) || nodes.iter().any(|(q, _)| d2(q, &p) < gamma * gamma) {
            continue;
        }
        taken.insert(home);
        nodes.push((p, home));
    }
    BlockSample { k, block: crate::partition::Rect { x0: 0.0, x1: side, y0: 0.0, y1: side }, nodes }
}

fn spokesmen_of(sample: &BlockSample) -> (Vec<Point>, Vec<Point>) {
    let homes: BTreeSet<_> = sample.nodes.iter().map(|n| n.1).collect();
    let elected = elect_plane_spokesmen(sample.k, &homes);
    let mut sp = Vec::new();
    let mut rest = Vec::new();
    for (p, h) in &sample.nodes {
        if elected.contains_key(h) {
            sp.push(*p);
        } else {
            rest.push(*p);
        }
    }
    (sp, rest)
}

/// Closer and farther spokesman witnesses on `triples` sampled
/// (block, outside point, non-spokesman) triples.
pub fn check_closer_farther_sampled(seed: u64, triples: u64, k: usize, gamma: f64) -> (LemmaCheck, LemmaCheck) {
    let mut closer = LemmaCheck::new("closer-spokesman");
    let mut farther = LemmaCheck::new("farther-spokesman");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = gamma / 2f64.sqrt();
    let mut done = 0;
    let mut blocks = 0u64;
    while done < triples {
        let sample = sample_block(&mut rng, k, h, gamma, 40 * k * k);
        blocks += 1;
        let (sp, rest) = spokesmen_of(&sample);
        if rest.is_empty() {
            assert!(blocks < 100_000, "no block with a non-spokesman after {blocks} samples");
            continue;
        }
        let side = sample.block.x1;
        for _ in 0..100 {
            let u = rest[rng.gen_range(0..rest.len())];
            // outside point within unit range of the block
            let p = loop {
                let q = Point::new(rng.gen_range(-1.0..side + 1.0), rng.gen_range(-1.0..side + 1.0));
                if !(0.0..=side).contains(&q.x) || !(0.0..=side).contains(&q.y) {
                    break q;
                }
            };
            let w = check_closer_farther(&sp, u, p);
            closer.record(w.closer.is_some(), || format!("block sample {blocks}: u={u:?} p={p:?} spokesmen={sp:?}"));
            farther.record(w.farther.is_some(), || format!("block sample {blocks}: u={u:?} p={p:?} spokesmen={sp:?}"));
            done += 1;
            if done == triples {
                break;
            }
        }
    }
    (closer, farther)
}

/// Spokesmen of random informed subsets reach every neighbour of every informed node.
pub fn check_spokesman_coverage(net: &Network, part: &Partition, seed: u64, rounds: u32) -> LemmaCheck {
    let mut c = LemmaCheck::new("spokesman-coverage");
    if net.dim() != Dim::Plane {
        return c;
    }
    let k = part.homes_per_side();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<PartitionLabel> = match net.positions().iter().map(|p| part.label_of(p)).collect() {
        Ok(l) => l,
        Err(e) => {
            c.record(false, || e.to_string());
            return c;
        }
    };
    let mut blocks: BTreeMap<(usize, usize), Vec<NodeId>> = BTreeMap::new();
    for (v, l) in labels.iter().enumerate() {
        blocks.entry((l.region, l.block)).or_default().push(v);
    }
    let nbrs: Vec<BTreeSet<NodeId>> = (0..net.len()).map(|u| oracle_neighbors(net, u)).collect();
    for _ in 0..rounds {
        for (key, members) in &blocks {
            let informed: Vec<NodeId> = members.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            if informed.is_empty() {
                continue;
            }
            let homes: BTreeSet<_> = informed.iter().map(|&v| ((labels[v].home - 1) / k, (labels[v].home - 1) % k)).collect();
            let elected = elect_plane_spokesmen(k, &homes);
            let mut reach = BTreeSet::new();
            for &v in &informed {
                if elected.contains_key(&((labels[v].home - 1) / k, (labels[v].home - 1) % k)) {
                    reach.extend(nbrs[v].iter().copied());
                }
            }
            for &v in &informed {
                let miss = nbrs[v].iter().find(|x| !reach.contains(x));
                c.record(miss.is_none(), || format!("block {key:?}: neighbour {} of informed {v} unreached", miss.unwrap()));
            }
        }
    }
    c
}

/// Opposite corners of plane homes sit exactly `gamma` apart; they must
/// still get distinct labels.
pub fn check_corner_pairs(s: f64, gamma: f64) -> LemmaCheck {
    let mut c = LemmaCheck::new("single-home-corner-pair");
    let part = match Partition::plane(s, gamma, Point::new(0.0, 6.0), 6.0, 6.0) {
        Ok(p) => p,
        Err(e) => {
            c.record(false, || e.to_string());
            return c;
        }
    };
    for block in 1..=part.mu() {
        for home in 1..=part.nu() {
            let r = part.home_rect(0, block, home);
            let side = gamma / 2f64.sqrt();
            // homes clipped by the region edge are smaller than gamma across
            if r.x1 - r.x0 < side - 1e-12 || r.y1 - r.y0 < side - 1e-12 {
                continue;
            }
            for (a, b) in [(Point::new(r.x0, r.y0), Point::new(r.x1, r.y1)), (Point::new(r.x0, r.y1), Point::new(r.x1, r.y0))] {
                let (la, lb) = (part.label_of(&a), part.label_of(&b));
                c.record(matches!((&la, &lb), (Ok(x), Ok(y)) if x != y), || format!("{a:?} and {b:?} labelled {la:?} and {lb:?}"));
            }
        }
    }
    c
}

const LINE_FAMILIES: [(f64, f64); 5] = [(0.5, 0.1), (0.2, 0.1), (0.5, 0.25), (0.1, 0.05), (0.6, 0.1)];
const PLANE_FAMILIES: [(f64, f64); 4] = [(0.5, 0.25), (0.2, 0.5), (0.4, 0.2), (0.05, 0.2)];

fn keyed(into: &mut BTreeMap<String, LemmaCheck>, c: LemmaCheck) {
    match into.get_mut(&c.name) {
        Some(e) => e.absorb(c),
        None => {
            into.insert(c.name.clone(), c);
        }
    }
}

/// The full lemma battery: `lines` random line nets, `planes` random plane
/// nets, corner pairs, annulus arithmetic up to `r = 10`, and `triples`
/// closer/farther samples.
pub fn lemma_battery(seed: u64, lines: u64, planes: u64, triples: u64) -> Vec<LemmaCheck> {
    use crate::geometry::{generate_placement, PlacementSpec, RadioParams};
    let mut out: BTreeMap<String, LemmaCheck> = BTreeMap::new();
    let fail = |name: &str, msg: String| {
        let mut c = LemmaCheck::new(name);
        c.record(false, || msg);
        c
    };
    for i in 0..lines {
        let (s, g) = LINE_FAMILIES[(i % LINE_FAMILIES.len() as u64) as usize];
        let spec = PlacementSpec::RandomLine { length: 5.0, n: 10 };
        match generate_placement(&spec, RadioParams::unit(s, g).unwrap(), seed + i).map_err(|e| e.to_string()).and_then(|net| {
            let part = Partition::for_network(&net).map_err(|e| e.to_string())?;
            Ok((net, part))
        }) {
            Ok((net, part)) => {
                keyed(&mut out, check_single_home(&net, &part));
                keyed(&mut out, check_no_cross_region_collision(&net, &part));
                keyed(&mut out, check_range_overlap(&net));
            }
            Err(e) => keyed(&mut out, fail("placement", format!("line seed {}: {e}", seed + i))),
        }
    }
    for i in 0..planes {
        let (s, g) = PLANE_FAMILIES[(i % PLANE_FAMILIES.len() as u64) as usize];
        let spec = PlacementSpec::RandomPlane { width: 3.0, height: 3.0, n: 15 };
        match generate_placement(&spec, RadioParams::unit(s, g).unwrap(), seed + i).map_err(|e| e.to_string()).and_then(|net| {
            let part = Partition::for_network(&net).map_err(|e| e.to_string())?;
            Ok((net, part))
        }) {
            Ok((net, part)) => {
                keyed(&mut out, check_single_home(&net, &part));
                keyed(&mut out, check_no_cross_region_collision(&net, &part));
                keyed(&mut out, check_spokesman_coverage(&net, &part, seed + i, 3));
            }
            Err(e) => keyed(&mut out, fail("placement", format!("plane seed {}: {e}", seed + i))),
        }
    }
    for (s, g) in PLANE_FAMILIES {
        keyed(&mut out, check_corner_pairs(s, g));
    }
    keyed(&mut out, check_annulus(10));
    // homes per block side is 6 here, enough for interior non-spokesmen
    let (closer, farther) = check_closer_farther_sampled(seed, triples, 6, 0.05);
    keyed(&mut out, closer);
    keyed(&mut out, farther);
    out.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadioParams;
    use crate::lattice::lattice_line;

    #[test]
    fn lattice_neighbours() {
        let net = lattice_line(9, 3, 2).unwrap();
        assert_eq!(oracle_neighbors(&net, 0), BTreeSet::from([3]));
        let one = Network::new(RadioParams::unit(0.5, 0.1).unwrap(), Dim::Line, vec![Point::on_line(0.0)]).unwrap();
        assert!(oracle_neighbors(&one, 0).is_empty());
    }

    #[test]
    fn flooding_on_lattice() {
        let net = lattice_line(7, 2, 0).unwrap();
        let f = flooding_baseline(&net, 0);
        let want: Vec<Option<u32>> = (0..7u32).map(|i| Some(i.div_ceil(2))).collect();
        assert_eq!(f.hops, want);
        assert_eq!(f.eccentricity, 3);
        assert!(f.connected);
    }

    #[test]
    fn flooding_chain_fixture() {
        // s = 0.5: 0-2, 1-3 etc. link only across one neighbour
        let xs = [0.0, 0.3, 0.6, 0.9, 1.2, 1.5];
        let net = Network::new(RadioParams::unit(0.5, 0.25).unwrap(), Dim::Line, xs.iter().map(|&x| Point::on_line(x)).collect()).unwrap();
        let f = flooding_baseline(&net, 0);
        assert_eq!(f.hops, vec![Some(0), Some(2), Some(1), Some(1), Some(2), Some(2)]);
    }

    #[test]
    fn reception_rule() {
        let net = lattice_line(6, 2, 1).unwrap();
        // 0 and 5 transmit: 2 hears 0, 3 hears 5, 1 and 4 are swamped
        assert_eq!(oracle_reception(&net, &[0, 5]), vec![None, None, Some(0), Some(5), None, None]);
        // collision at 2 from 0 and 4
        assert_eq!(oracle_reception(&net, &[0, 4])[2], None);
    }

    #[test]
    fn corner_pairs_split() {
        let c = check_corner_pairs(0.4, 0.2);
        assert!(c.passed() && c.cases > 0, "{:?}", c.witnesses);
    }

    #[test]
    fn small_battery() {
        let all = lemma_battery(1, 5, 4, 500);
        assert!(all.iter().all(|c| c.passed()), "{all:?}");
        assert!(all.iter().any(|c| c.name == "farther-spokesman"));
    }

    #[test]
    fn annulus_small() {
        assert!(check_annulus(3).passed());
        assert!((oracle_annulus_coverage(3.0, 1.0, 1.0) - (8f64.sqrt())).abs() < 1e-9);
    }
}
