//! Broadcasting without topology knowledge: Procedures T and T², and the
//! full algorithms B (line) and B² (plane).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::discovery::{DiscoveryError, DiscoveryMode, DiscoveryProgram, KnowledgeSet};
use crate::engine::{
    self, Action, BlockGrant, Control, EngineError, GrantEntry, Message, MessageKind, NodeProgram, Observation, Round, RoundTrace, RunOptions,
    SimResult, Supervisor, Token, TraceMode,
};
use crate::geometry::{Dim, Network, NodeId, Point};
use crate::oracle::flooding_baseline;
use crate::partition::{Partition, PartitionError, PartitionLabel, SlotLabel};
use crate::spokesmen::{elect_line_spokesmen, elect_plane_spokesmen, plane_calendar_len, LineRole, LineView, PlaneLabel};

pub const SOURCE_TOKEN: Token = Token(1);
pub const DEFAULT_HORIZON_MULT: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BroadcastError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error("source {0} is not a node")]
    BadSource(NodeId),
    #[error("{0} needs a {1:?} network")]
    WrongDim(&'static str, Dim),
    #[error("expected {expected} knowledge sets, got {got}")]
    KnowledgeCount { expected: usize, got: usize },
}

/// Procedure T for one node.
#[derive(Clone, Debug)]
pub struct LineRelay {
    position: Point,
    label: PartitionLabel,
    block: (f64, f64),
    homes: Vec<(usize, f64, f64)>,
    single_home: bool,
    s: f64,
    mu: usize,
    start: Round,
    origins: Vec<f64>,
    holds: Option<Token>,
    source: bool,
    sent: bool,
    slot: Option<usize>,
}

impl LineRelay {
    pub fn new(
        position: Point,
        partition: &Partition,
        s: f64,
        knowledge: &KnowledgeSet,
        holds: Option<Token>,
        start: Round,
    ) -> Result<Self, PartitionError> {
        let label = partition.label_of(&position)?;
        let rect = partition.block_rect(label.region, label.block);
        let mut own: BTreeSet<usize> = knowledge.in_block(label.block).map(|(l, _)| l.home).collect();
        own.insert(label.home);
        let homes = own
            .into_iter()
            .map(|h| {
                let r = partition.home_rect(label.region, label.block, h);
                (h, r.x0, r.x1)
            })
            .collect();
        Ok(LineRelay {
            position,
            label,
            block: (rect.x0, rect.x1),
            homes,
            single_home: partition.nu() == 1,
            s,
            mu: partition.mu(),
            start,
            origins: Vec::new(),
            source: holds.is_some(),
            holds,
            sent: false,
            slot: None,
        })
    }

    pub fn sweep_len(&self) -> Round {
        6 * self.mu as Round
    }

    pub fn roles(&self) -> Vec<LineRole> {
        let view = LineView {
            position: self.position.x,
            home: self.label.home,
            block: self.block,
            homes: &self.homes,
            origins: &self.origins,
            s: self.s,
            single_home: self.single_home,
        };
        elect_line_spokesmen(&view)
    }
}

impl NodeProgram for LineRelay {
    fn step(&mut self, round: Round) -> Action {
        let Some(t) = round.checked_sub(self.start) else {
            return Action::Listen;
        };
        let data = |p: &Self| Action::Transmit(Message::data(p.holds.unwrap(), p.position));
        if t == 0 {
            if self.source {
                self.sent = true;
                return data(self);
            }
            return Action::Listen;
        }
        let within = (t - 1) % self.sweep_len();
        let block = (within / 6) as usize + 1;
        let sub = (within % 6) as usize;
        if block != self.label.block {
            return Action::Listen;
        }
        if sub == 0 {
            self.slot = if self.sent || self.holds.is_none() { None } else { self.roles().first().map(|r| r.slot()) };
        }
        if self.slot == Some(sub) {
            self.sent = true;
            self.slot = None;
            return data(self);
        }
        Action::Listen
    }

    fn observe(&mut self, _round: Round, obs: Observation) {
        if let Observation::Heard(Message { kind: MessageKind::Data { token }, origin }) = obs {
            self.holds.get_or_insert(token);
            self.origins.push(origin.x);
        }
    }

    fn informed(&self) -> bool {
        self.holds.is_some()
    }
}

/// Procedure T² for one node.
#[derive(Clone, Debug)]
pub struct PlaneRelay {
    position: Point,
    label: PartitionLabel,
    k: usize,
    mu: usize,
    start: Round,
    known: BTreeSet<usize>,
    holds: Option<Token>,
    sent: bool,
    slot: Option<usize>,
    labels: Vec<PlaneLabel>,
}

impl PlaneRelay {
    pub fn new(position: Point, partition: &Partition, knowledge: &KnowledgeSet, holds: Option<Token>, start: Round) -> Result<Self, PartitionError> {
        let label = partition.label_of(&position)?;
        let known = knowledge.in_block(label.block).map(|(l, _)| l.home).collect();
        Ok(PlaneRelay {
            position,
            label,
            k: partition.homes_per_side(),
            mu: partition.mu(),
            start,
            known,
            holds,
            sent: false,
            slot: None,
            labels: Vec::new(),
        })
    }

    pub fn calendar(&self) -> Round {
        plane_calendar_len(self.k) as Round
    }

    /// Labels from the most recent election in the node's block.
    pub fn labels(&self) -> &[PlaneLabel] {
        &self.labels
    }
}

impl NodeProgram for PlaneRelay {
    fn step(&mut self, round: Round) -> Action {
        let Some(t) = round.checked_sub(self.start) else {
            return Action::Listen;
        };
        let cal = self.calendar();
        let block = ((t % (cal * self.mu as Round)) / cal) as usize + 1;
        if block == self.label.block && self.slot == Some((t % cal) as usize) {
            self.sent = true;
            self.slot = None;
            return Action::Transmit(Message::data(self.holds.unwrap(), self.position));
        }
        Action::Listen
    }

    fn observe(&mut self, _round: Round, obs: Observation) {
        if let Observation::Heard(Message { kind: MessageKind::Data { token }, .. }) = obs {
            self.holds.get_or_insert(token);
        }
    }

    fn informed(&self) -> bool {
        self.holds.is_some()
    }

    fn accept_grant(&mut self, _round: Round, grant: &BlockGrant) -> Result<(), String> {
        if grant.block != self.label.block {
            return Err(format!("grant for block {} delivered to a node of block {}", grant.block, self.label.block));
        }
        let mut informed = BTreeSet::new();
        for e in &grant.entries {
            if e.home != self.label.home && !self.known.contains(&e.home) {
                return Err(format!("granted home {} is missing from the node's discovery knowledge", e.home));
            }
            if e.informed {
                informed.insert(((e.home - 1) / self.k, (e.home - 1) % self.k));
            }
        }
        let me = ((self.label.home - 1) / self.k, (self.label.home - 1) % self.k);
        self.labels = elect_plane_spokesmen(self.k, &informed).remove(&me).unwrap_or_default();
        self.slot = match (self.holds, self.sent) {
            (Some(_), false) => self.labels.first().map(|l| l.calendar_slot(self.k)),
            _ => None,
        };
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Relay {
    Line(LineRelay),
    Plane(PlaneRelay),
}

impl NodeProgram for Relay {
    fn step(&mut self, round: Round) -> Action {
        match self {
            Relay::Line(p) => p.step(round),
            Relay::Plane(p) => p.step(round),
        }
    }
    fn observe(&mut self, round: Round, obs: Observation) {
        match self {
            Relay::Line(p) => p.observe(round, obs),
            Relay::Plane(p) => p.observe(round, obs),
        }
    }
    fn informed(&self) -> bool {
        match self {
            Relay::Line(p) => p.informed(),
            Relay::Plane(p) => p.informed(),
        }
    }
    fn accept_grant(&mut self, round: Round, grant: &BlockGrant) -> Result<(), String> {
        match self {
            Relay::Line(_) => Err("knowledge grants are a plane-only facility".into()),
            Relay::Plane(p) => p.accept_grant(round, grant),
        }
    }
}

/// Builds the relay program for a node whose discovery knowledge is complete.
pub fn relay_program(
    position: Point,
    partition: &Partition,
    s: f64,
    knowledge: &KnowledgeSet,
    holds: Option<Token>,
    start: Round,
) -> Result<Relay, PartitionError> {
    Ok(match partition.dim() {
        Dim::Line => Relay::Line(LineRelay::new(position, partition, s, knowledge, holds, start)?),
        Dim::Plane => Relay::Plane(PlaneRelay::new(position, partition, knowledge, holds, start)?),
    })
}

/// D* followed by T or T² inside a single node.
#[derive(Clone, Debug)]
pub struct BroadcastProgram {
    discovery: Option<DiscoveryProgram>,
    relay: Option<Relay>,
    partition: Arc<Partition>,
    s: f64,
    switch_at: Round,
}

impl BroadcastProgram {
    pub fn new(position: Point, partition: Arc<Partition>, s: f64, holds: Option<Token>) -> Result<Self, PartitionError> {
        let d = DiscoveryProgram::new(position, partition.clone(), DiscoveryMode::DStar, KnowledgeSet::new(), holds)?;
        let switch_at = d.schedule_len();
        Ok(BroadcastProgram { discovery: Some(d), relay: None, partition, s, switch_at })
    }

    pub fn knowledge(&self) -> Option<&KnowledgeSet> {
        self.discovery.as_ref().map(|d| d.knowledge())
    }

    /// Swaps discovery for the relay program once D* is over.
    fn advance(&mut self, round: Round) {
        if round < self.switch_at {
            return;
        }
        if let Some(d) = self.discovery.take() {
            let (pos, holds) = (d.position(), d.holds());
            let knowledge = d.into_knowledge();
            let relay = relay_program(pos, &self.partition, self.s, &knowledge, holds, self.switch_at)
                .expect("label_of already succeeded for this position");
            self.relay = Some(relay);
        }
    }
}

impl NodeProgram for BroadcastProgram {
    fn step(&mut self, round: Round) -> Action {
        self.advance(round);
        match (&mut self.discovery, &mut self.relay) {
            (Some(d), _) => d.step(round),
            (None, Some(r)) => r.step(round),
            _ => Action::Listen,
        }
    }

    fn observe(&mut self, round: Round, obs: Observation) {
        match (&mut self.discovery, &mut self.relay) {
            (Some(d), _) => d.observe(round, obs),
            (None, Some(r)) => r.observe(round, obs),
            _ => {}
        }
    }

    fn informed(&self) -> bool {
        match (&self.discovery, &self.relay) {
            (Some(d), _) => d.informed(),
            (None, Some(r)) => r.informed(),
            _ => false,
        }
    }

    fn accept_grant(&mut self, round: Round, grant: &BlockGrant) -> Result<(), String> {
        self.advance(round);
        match &mut self.relay {
            Some(r) => r.accept_grant(round, grant),
            None => Err("grant arrived during discovery".into()),
        }
    }
}

/// A block whose spokesmen do not reach every neighbour of its informed nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageWitness {
    pub round: Round,
    pub region: usize,
    pub block: usize,
    /// Informed node of the block that links to `missed`.
    pub informed: NodeId,
    pub missed: NodeId,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Election {
    pub round: Round,
    pub region: usize,
    pub block: usize,
    pub spokesmen: Vec<(NodeId, Vec<String>)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelayAudit {
    pub iterations: u64,
    /// Collision-blocked receptions during the relay phase.
    pub collisions: u64,
    pub cross_region_collisions: u64,
    pub blocks_audited: u64,
    pub coverage_failures: Vec<CoverageWitness>,
    /// Only recorded for full traces.
    pub elections: Vec<Election>,
}

/// Drives the relay phase: plane grants, coverage audits and quiescence.
pub struct RelaySupervisor<'a> {
    net: &'a Network,
    partition: &'a Partition,
    labels: Vec<PartitionLabel>,
    by_block: BTreeMap<usize, Vec<(usize, Vec<NodeId>)>>,
    start: Round,
    lead: Round,
    group: Round,
    iteration: Round,
    sent_this_iteration: bool,
    record: bool,
    pub audit: RelayAudit,
}

impl<'a> RelaySupervisor<'a> {
    pub fn new(net: &'a Network, partition: &'a Partition, start: Round, record: bool) -> Result<Self, PartitionError> {
        let labels: Vec<PartitionLabel> = net.positions().iter().map(|p| partition.label_of(p)).collect::<Result<_, _>>()?;
        let mut grouped: BTreeMap<usize, BTreeMap<usize, Vec<NodeId>>> = BTreeMap::new();
        for (v, l) in labels.iter().enumerate() {
            grouped.entry(l.block).or_default().entry(l.region).or_default().push(v);
        }
        let by_block = grouped.into_iter().map(|(b, m)| (b, m.into_iter().collect())).collect();
        let (lead, group) = match partition.dim() {
            Dim::Line => (1, 6),
            Dim::Plane => (0, plane_calendar_len(partition.homes_per_side()) as Round),
        };
        Ok(RelaySupervisor {
            net,
            partition,
            labels,
            by_block,
            start,
            lead,
            group,
            iteration: group * partition.mu() as Round,
            sent_this_iteration: false,
            record,
            audit: RelayAudit::default(),
        })
    }

    pub fn iteration_len(&self) -> Round {
        self.iteration
    }

    /// Relay-phase offset of `round` past the announcement round, if any.
    fn offset(&self, round: Round) -> Option<Round> {
        round.checked_sub(self.start + self.lead)
    }

    fn audit_block(&mut self, round: Round, region: usize, block: usize, members: &[NodeId], holds: &[bool], elected: &BTreeMap<(usize, usize), Vec<PlaneLabel>>) {
        let k = self.partition.homes_per_side();
        let spokes: Vec<NodeId> = members
            .iter()
            .copied()
            .filter(|&v| elected.contains_key(&home_rc(self.labels[v].home, k)))
            .collect();
        if self.record && !spokes.is_empty() {
            let spokesmen = spokes
                .iter()
                .map(|&v| (v, elected[&home_rc(self.labels[v].home, k)].iter().map(|l| l.to_string()).collect()))
                .collect();
            self.audit.elections.push(Election { round, region, block, spokesmen });
        }
        let mut reach = BTreeSet::new();
        for &w in &spokes {
            reach.extend(self.net.neighbors(w).unwrap().iter().copied());
        }
        self.audit.blocks_audited += 1;
        for &v in members.iter().filter(|&&v| holds[v]) {
            if let Some(&missed) = self.net.neighbors(v).unwrap().iter().find(|x| !reach.contains(x)) {
                self.audit.coverage_failures.push(CoverageWitness { round, region, block, informed: v, missed });
            }
        }
    }
}

fn home_rc(home: usize, k: usize) -> (usize, usize) {
    ((home - 1) / k, (home - 1) % k)
}

impl Supervisor for RelaySupervisor<'_> {
    fn grants(&mut self, round: Round, holds: &[bool]) -> Result<Vec<(NodeId, BlockGrant)>, EngineError> {
        if self.partition.dim() != Dim::Plane {
            return Ok(Vec::new());
        }
        let Some(t) = self.offset(round) else {
            return Ok(Vec::new());
        };
        if t % self.group != 0 {
            return Ok(Vec::new());
        }
        let block = ((t % self.iteration) / self.group) as usize + 1;
        let k = self.partition.homes_per_side();
        let mut out = Vec::new();
        let regions = self.by_block.get(&block).cloned().unwrap_or_default();
        for (region, members) in regions {
            let entries: Vec<GrantEntry> = members.iter().map(|&v| GrantEntry { home: self.labels[v].home, informed: holds[v] }).collect();
            let informed: BTreeSet<(usize, usize)> = entries.iter().filter(|e| e.informed).map(|e| home_rc(e.home, k)).collect();
            if !informed.is_empty() {
                let elected = elect_plane_spokesmen(k, &informed);
                self.audit_block(round, region, block, &members, holds, &elected);
            }
            for &v in &members {
                out.push((v, BlockGrant { block, entries: entries.clone() }));
            }
        }
        Ok(out)
    }

    fn after_round(&mut self, trace: &RoundTrace, _holds: &[bool]) -> Control {
        if trace.round < self.start {
            return Control::Continue;
        }
        self.audit.collisions += trace.collision_blocked.len() as u64;
        for &v in &trace.collision_blocked {
            let regions: BTreeSet<usize> = trace
                .transmitters
                .iter()
                .filter(|t| self.net.link(v, t.node).unwrap_or(false))
                .map(|t| self.labels[t.node].region)
                .collect();
            if regions.len() > 1 {
                self.audit.cross_region_collisions += 1;
            }
        }
        let Some(t) = self.offset(trace.round) else {
            return Control::Continue;
        };
        if !trace.transmitters.is_empty() {
            self.sent_this_iteration = true;
        }
        if (t + 1) % self.iteration == 0 {
            self.audit.iterations += 1;
            if !std::mem::take(&mut self.sent_this_iteration) {
                return Control::Stop;
            }
        }
        Control::Continue
    }
}

#[derive(Clone, Debug)]
pub struct BroadcastRun {
    pub result: SimResult,
    /// Rounds spent in discovery before the relay phase (0 for bare T/T²).
    pub discovery_rounds: Round,
    /// Source eccentricity in hops (largest finite one if disconnected).
    pub eccentricity: u32,
    pub connected: bool,
    /// Round bound used for the horizon, before the multiplier.
    pub bound: Round,
    pub audit: RelayAudit,
}

impl BroadcastRun {
    /// Rounds from the start of the relay phase to completion, inclusive.
    pub fn relay_rounds(&self) -> Option<Round> {
        self.result.completion_round.map(|c| (c + 1).saturating_sub(self.discovery_rounds))
    }
}

/// Relay-phase round budget for eccentricity `d`.
pub fn relay_bound(partition: &Partition, d: u32) -> Round {
    let d = d as Round;
    match partition.dim() {
        Dim::Line => 1 + 6 * partition.mu() as Round * (d + 2),
        Dim::Plane => (plane_calendar_len(partition.homes_per_side()) * partition.mu()) as Round * (d + 2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BroadcastOptions {
    pub horizon_mult: u64,
    pub trace: TraceMode,
}

impl Default for BroadcastOptions {
    fn default() -> Self {
        BroadcastOptions { horizon_mult: DEFAULT_HORIZON_MULT, trace: TraceMode::Summary }
    }
}

fn check_source(net: &Network, source: NodeId) -> Result<(), BroadcastError> {
    if source >= net.len() {
        return Err(BroadcastError::BadSource(source));
    }
    Ok(())
}

/// Procedure T or T² from precomputed discovery knowledge.
pub fn run_relay(
    net: &Network,
    partition: &Arc<Partition>,
    knowledge: &[KnowledgeSet],
    source: NodeId,
    opts: BroadcastOptions,
) -> Result<BroadcastRun, BroadcastError> {
    check_source(net, source)?;
    if knowledge.len() != net.len() {
        return Err(BroadcastError::KnowledgeCount { expected: net.len(), got: knowledge.len() });
    }
    let s = net.params().s;
    let mut progs: Vec<Relay> = net
        .positions()
        .iter()
        .zip(knowledge)
        .enumerate()
        .map(|(v, (p, k))| relay_program(*p, partition, s, k, (v == source).then_some(SOURCE_TOKEN), 0))
        .collect::<Result<_, _>>()?;
    let flood = flooding_baseline(net, source);
    let bound = relay_bound(partition, flood.eccentricity);
    let mut sup = RelaySupervisor::new(net, partition, 0, opts.trace == TraceMode::Full)?;
    let result = engine::run_supervised(net, &mut progs, RunOptions { max_rounds: bound * opts.horizon_mult, trace: opts.trace }, &mut sup)?;
    Ok(BroadcastRun { result, discovery_rounds: 0, eccentricity: flood.eccentricity, connected: flood.connected, bound, audit: sup.audit })
}

pub fn run_procedure_t(
    net: &Network,
    partition: &Arc<Partition>,
    knowledge: &[KnowledgeSet],
    source: NodeId,
    opts: BroadcastOptions,
) -> Result<BroadcastRun, BroadcastError> {
    if partition.dim() != Dim::Line {
        return Err(BroadcastError::WrongDim("procedure T", Dim::Line));
    }
    run_relay(net, partition, knowledge, source, opts)
}

pub fn run_procedure_t2(
    net: &Network,
    partition: &Arc<Partition>,
    knowledge: &[KnowledgeSet],
    source: NodeId,
    opts: BroadcastOptions,
) -> Result<BroadcastRun, BroadcastError> {
    if partition.dim() != Dim::Plane {
        return Err(BroadcastError::WrongDim("procedure T2", Dim::Plane));
    }
    run_relay(net, partition, knowledge, source, opts)
}

/// Algorithm B or B² depending on the network's dimension.
pub fn run_broadcast(net: &Network, source: NodeId, opts: BroadcastOptions) -> Result<BroadcastRun, BroadcastError> {
    check_source(net, source)?;
    let partition = Arc::new(Partition::for_network(net)?);
    let s = net.params().s;
    let mut progs: Vec<BroadcastProgram> = net
        .positions()
        .iter()
        .enumerate()
        .map(|(v, p)| BroadcastProgram::new(*p, partition.clone(), s, (v == source).then_some(SOURCE_TOKEN)))
        .collect::<Result<_, _>>()?;
    let dstar = DiscoveryMode::DStar.rounds(partition.slots());
    let flood = flooding_baseline(net, source);
    let bound = dstar + relay_bound(&partition, flood.eccentricity);
    let mut sup = RelaySupervisor::new(net, &partition, dstar, opts.trace == TraceMode::Full)?;
    let result = engine::run_supervised(net, &mut progs, RunOptions { max_rounds: bound * opts.horizon_mult, trace: opts.trace }, &mut sup)?;
    Ok(BroadcastRun { result, discovery_rounds: dstar, eccentricity: flood.eccentricity, connected: flood.connected, bound, audit: sup.audit })
}

pub fn run_algorithm_b(net: &Network, source: NodeId, opts: BroadcastOptions) -> Result<BroadcastRun, BroadcastError> {
    if net.dim() != Dim::Line {
        return Err(BroadcastError::WrongDim("algorithm B", Dim::Line));
    }
    run_broadcast(net, source, opts)
}

pub fn run_algorithm_b2(net: &Network, source: NodeId, opts: BroadcastOptions) -> Result<BroadcastRun, BroadcastError> {
    if net.dim() != Dim::Plane {
        return Err(BroadcastError::WrongDim("algorithm B2", Dim::Plane));
    }
    run_broadcast(net, source, opts)
}

/// Knowledge grants are only defined on plane partitions.
pub fn grant_block_knowledge(net: &Network, partition: &Partition, block: usize, holds: &[bool]) -> Result<Vec<(NodeId, BlockGrant)>, BroadcastError> {
    if partition.dim() != Dim::Plane {
        return Err(EngineError::Grant("block knowledge grants need a plane partition".into()).into());
    }
    partition.validate(SlotLabel { block, home: 1 })?;
    let mut sup = RelaySupervisor::new(net, partition, 0, false)?;
    let at = (block as Round - 1) * sup.group;
    Ok(sup.grants(at, holds)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::run_procedure_d_star;
    use crate::geometry::RadioParams;

    fn line(s: f64, gamma: f64, xs: &[f64]) -> Network {
        Network::new(RadioParams::unit(s, gamma).unwrap(), Dim::Line, xs.iter().map(|&x| Point::on_line(x)).collect()).unwrap()
    }

    #[test]
    fn t_single_region() {
        let net = line(0.5, 0.25, &[0.0, 0.3, 0.9, 1.6, 2.2, 2.9]);
        let part = Arc::new(Partition::for_network(&net).unwrap());
        let d = run_procedure_d_star(&net, &part, TraceMode::Summary).unwrap();
        let run = run_procedure_t(&net, &part, &d.knowledge, 2, BroadcastOptions { trace: TraceMode::Full, ..Default::default() }).unwrap();
        assert!(run.result.all_informed());
        assert_eq!(run.result.stats.collision_blocked, 0);
        assert_eq!(run.result.stop, engine::StopReason::Supervisor);
    }

    #[test]
    fn b_example_round_count() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.6).collect();
        let net = line(0.5, 0.25, &xs);
        let run = run_algorithm_b(&net, 0, BroadcastOptions::default()).unwrap();
        assert_eq!(run.discovery_rounds, 156);
        assert!(run.result.all_informed());
        assert!(run.result.completion_round.unwrap() >= 156);
    }

    #[test]
    fn b2_small_plane() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(0.6, 0.0), Point::new(0.6, 0.6), Point::new(1.3, 0.3), Point::new(0.1, 0.5)];
        let net = Network::new(RadioParams::unit(0.2, 0.5).unwrap(), Dim::Plane, pts).unwrap();
        let run = run_algorithm_b2(&net, 0, BroadcastOptions { trace: TraceMode::Full, ..Default::default() }).unwrap();
        assert!(run.result.all_informed());
        assert!(run.audit.coverage_failures.is_empty());
        assert!(run.result.data_sent.iter().all(|&c| c <= 1));
    }

    #[test]
    fn grants_need_plane() {
        let net = line(0.5, 0.25, &[0.0, 0.7]);
        let part = Partition::for_network(&net).unwrap();
        assert!(grant_block_knowledge(&net, &part, 1, &[true, false]).is_err());
    }
}
