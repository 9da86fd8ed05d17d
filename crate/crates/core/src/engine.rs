//! Round-synchronous execution of node programs under the swamping reception rule.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{Network, NodeId, Point};

pub type Round = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid transmitter id {0}")]
    InvalidTransmitter(NodeId),
    #[error("node {0} listed twice as a transmitter")]
    DuplicateTransmitter(NodeId),
    #[error("program fault at node {node}, round {round}: {msg}")]
    ProgramFault { node: NodeId, round: Round, msg: String },
    #[error("expected {expected} programs, got {got}")]
    ProgramCount { expected: usize, got: usize },
    #[error("max_rounds must be positive")]
    NoRounds,
    #[error("knowledge grant unavailable: {0}")]
    Grant(String),
}

/// Opaque token standing in for the source message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MessageKind {
    Hello,
    Data { token: Token },
}

/// Every message is stamped with the sender's location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    #[serde(flatten)]
    pub kind: MessageKind,
    pub origin: Point,
}

impl Message {
    pub fn hello(origin: Point) -> Self {
        Message { kind: MessageKind::Hello, origin }
    }

    pub fn data(token: Token, origin: Point) -> Self {
        Message { kind: MessageKind::Data { token }, origin }
    }

    pub fn is_data(&self) -> bool {
        matches!(self.kind, MessageKind::Data { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    Transmit(Message),
    Listen,
}

/// What a listening node perceives. Collisions, swamping and background
/// noise all surface as `Silence`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observation {
    Heard(Message),
    Silence,
}

/// One co-block entry of a knowledge grant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrantEntry {
    pub home: usize,
    pub informed: bool,
}

/// Which co-block homes currently hold the source message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockGrant {
    pub block: usize,
    pub entries: Vec<GrantEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrantRecord {
    pub round: Round,
    pub node: NodeId,
    pub grant: BlockGrant,
}

/// A per-node state machine. Construction plays the role of `init`.
///
/// `observe` is only called in rounds where the node listened.
pub trait NodeProgram {
    fn step(&mut self, round: Round) -> Action;
    fn observe(&mut self, round: Round, obs: Observation);
    fn informed(&self) -> bool;

    /// Last round (exclusive) of the program's schedule, if it has one.
    fn horizon(&self) -> Option<Round> {
        None
    }

    fn accept_grant(&mut self, _round: Round, _grant: &BlockGrant) -> Result<(), String> {
        Err("program does not accept knowledge grants".into())
    }
}

impl<P: NodeProgram + ?Sized> NodeProgram for Box<P> {
    fn step(&mut self, round: Round) -> Action {
        (**self).step(round)
    }
    fn observe(&mut self, round: Round, obs: Observation) {
        (**self).observe(round, obs)
    }
    fn informed(&self) -> bool {
        (**self).informed()
    }
    fn horizon(&self) -> Option<Round> {
        (**self).horizon()
    }
    fn accept_grant(&mut self, round: Round, grant: &BlockGrant) -> Result<(), String> {
        (**self).accept_grant(round, grant)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Global observer of a run: may inject knowledge grants and request a stop.
pub trait Supervisor {
    fn grants(&mut self, _round: Round, _holds: &[bool]) -> Result<Vec<(NodeId, BlockGrant)>, EngineError> {
        Ok(Vec::new())
    }

    fn after_round(&mut self, _trace: &RoundTrace, _holds: &[bool]) -> Control {
        Control::Continue
    }
}

pub struct NoSupervisor;

impl Supervisor for NoSupervisor {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub node: NodeId,
    pub message: Message,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub receiver: NodeId,
    pub sender: NodeId,
    pub message: Message,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub deliveries: Vec<Delivery>,
    pub collision_blocked: Vec<NodeId>,
    pub swamp_blocked: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: Round,
    pub transmitters: Vec<Transmission>,
    pub deliveries: Vec<Delivery>,
    pub collision_blocked: Vec<NodeId>,
    pub swamp_blocked: Vec<NodeId>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub grants: Vec<GrantRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxRounds,
    Horizon,
    Supervisor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub transmissions: u64,
    pub data_transmissions: u64,
    pub deliveries: u64,
    pub collision_blocked: u64,
    pub swamp_blocked: u64,
    pub grants: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    /// Keep every `RoundTrace`.
    Full,
    /// Keep only counters and the digest.
    Summary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub max_rounds: Round,
    pub trace: TraceMode,
}

impl RunOptions {
    pub fn full(max_rounds: Round) -> Self {
        RunOptions { max_rounds, trace: TraceMode::Full }
    }

    pub fn summary(max_rounds: Round) -> Self {
        RunOptions { max_rounds, trace: TraceMode::Summary }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    /// Empty unless the run used `TraceMode::Full`.
    pub rounds: Vec<RoundTrace>,
    pub rounds_executed: Round,
    /// First round after which every node was informed.
    pub completion_round: Option<Round>,
    pub informed_final: BTreeSet<NodeId>,
    pub initially_informed: BTreeSet<NodeId>,
    /// Round in which each node first received the source message.
    pub first_informed: Vec<Option<Round>>,
    /// Number of data transmissions per node.
    pub data_sent: Vec<u32>,
    pub stats: RunStats,
    pub stop: StopReason,
    /// Hex SHA-256 over a canonical encoding of every round.
    pub digest: String,
}

impl SimResult {
    pub fn all_informed(&self) -> bool {
        self.informed_final.len() == self.first_informed.len()
    }

    /// Rounds needed to inform everyone, counting the completing round.
    pub fn rounds_to_complete(&self) -> Option<Round> {
        self.completion_round.map(|r| r + 1)
    }
}

/// Applies the reception rule to one round of transmissions.
pub fn deliveries_for_round(net: &Network, transmitters: &[Transmission]) -> Result<RoundOutcome, EngineError> {
    let mut scratch = Scratch::new(net.len());
    validate_transmitters(net, transmitters, &mut scratch.is_tx)?;
    let out = scratch.resolve(net, transmitters);
    scratch.reset(transmitters);
    Ok(out)
}

fn validate_transmitters(net: &Network, txs: &[Transmission], is_tx: &mut [bool]) -> Result<(), EngineError> {
    for t in txs {
        if t.node >= net.len() {
            for u in txs {
                if u.node < is_tx.len() {
                    is_tx[u.node] = false;
                }
            }
            return Err(EngineError::InvalidTransmitter(t.node));
        }
        if is_tx[t.node] {
            for u in txs {
                if u.node < is_tx.len() {
                    is_tx[u.node] = false;
                }
            }
            return Err(EngineError::DuplicateTransmitter(t.node));
        }
        is_tx[t.node] = true;
    }
    Ok(())
}

struct Scratch {
    is_tx: Vec<bool>,
    link_hits: Vec<u32>,
    swamp_hits: Vec<u32>,
    last_sender: Vec<usize>,
    touched: Vec<NodeId>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            is_tx: vec![false; n],
            link_hits: vec![0; n],
            swamp_hits: vec![0; n],
            last_sender: vec![usize::MAX; n],
            touched: Vec::new(),
        }
    }

    /// `is_tx` must already mark the transmitters.
    fn resolve(&mut self, net: &Network, txs: &[Transmission]) -> RoundOutcome {
        for (i, t) in txs.iter().enumerate() {
            for &v in net.links_unchecked(t.node) {
                if self.link_hits[v] == 0 && self.swamp_hits[v] == 0 {
                    self.touched.push(v);
                }
                self.link_hits[v] += 1;
                self.last_sender[v] = i;
            }
            for &v in net.close_unchecked(t.node) {
                if self.link_hits[v] == 0 && self.swamp_hits[v] == 0 {
                    self.touched.push(v);
                }
                self.swamp_hits[v] += 1;
            }
        }
        self.touched.sort_unstable();
        let mut out = RoundOutcome::default();
        for &v in &self.touched {
            if self.is_tx[v] {
                continue;
            }
            if self.swamp_hits[v] > 0 {
                out.swamp_blocked.push(v);
            } else if self.link_hits[v] >= 2 {
                out.collision_blocked.push(v);
            } else {
                let t = &txs[self.last_sender[v]];
                out.deliveries.push(Delivery { receiver: v, sender: t.node, message: t.message });
            }
        }
        out
    }

    fn reset(&mut self, txs: &[Transmission]) {
        for &v in &self.touched {
            self.link_hits[v] = 0;
            self.swamp_hits[v] = 0;
            self.last_sender[v] = usize::MAX;
        }
        self.touched.clear();
        for t in txs {
            self.is_tx[t.node] = false;
        }
    }
}

pub fn run<P: NodeProgram>(net: &Network, programs: &mut [P], opts: RunOptions) -> Result<SimResult, EngineError> {
    run_supervised(net, programs, opts, &mut NoSupervisor)
}

pub fn run_supervised<P: NodeProgram, S: Supervisor + ?Sized>(
    net: &Network,
    programs: &mut [P],
    opts: RunOptions,
    sup: &mut S,
) -> Result<SimResult, EngineError> {
    let n = net.len();
    if programs.len() != n {
        return Err(EngineError::ProgramCount { expected: n, got: programs.len() });
    }
    if opts.max_rounds == 0 {
        return Err(EngineError::NoRounds);
    }
    let horizon = programs.iter().map(|p| p.horizon()).collect::<Option<Vec<_>>>().map(|h| h.into_iter().max().unwrap_or(0));

    let mut holds: Vec<bool> = programs.iter().map(|p| p.informed()).collect();
    let initially_informed: BTreeSet<NodeId> = (0..n).filter(|&v| holds[v]).collect();
    let mut informed_count = initially_informed.len();
    let mut first_informed = vec![None; n];
    let mut data_sent = vec![0u32; n];
    let mut completion_round = None;
    let mut stats = RunStats::default();
    let mut rounds = Vec::new();
    let mut hasher = Sha256::new();
    let mut scratch = Scratch::new(n);
    let mut txs: Vec<Transmission> = Vec::new();
    let mut heard: Vec<Option<Message>> = vec![None; n];
    let positions = net.positions();
    let mut stop = StopReason::MaxRounds;
    let mut round: Round = 0;

    while round < opts.max_rounds {
        if horizon.is_some_and(|h| round >= h) {
            stop = StopReason::Horizon;
            break;
        }
        let fault = |node: NodeId, msg: String| EngineError::ProgramFault { node, round, msg };

        let mut grant_log = Vec::new();
        for (node, grant) in sup.grants(round, &holds)? {
            if node >= n {
                return Err(EngineError::Grant(format!("grant for unknown node {node}")));
            }
            programs[node].accept_grant(round, &grant).map_err(|m| fault(node, m))?;
            grant_log.push(GrantRecord { round, node, grant });
        }
        stats.grants += grant_log.len() as u64;

        txs.clear();
        for (v, prog) in programs.iter_mut().enumerate() {
            if let Action::Transmit(message) = prog.step(round) {
                if message.origin != positions[v] {
                    return Err(fault(v, "message origin does not match the sender's location".into()));
                }
                if message.is_data() && !holds[v] {
                    return Err(fault(v, "data transmitted before the message was received".into()));
                }
                txs.push(Transmission { node: v, message });
            }
        }
        for t in &txs {
            scratch.is_tx[t.node] = true;
        }
        let outcome = scratch.resolve(net, &txs);
        scratch.reset(&txs);

        for d in &outcome.deliveries {
            heard[d.receiver] = Some(d.message);
        }
        let is_listener = |v: NodeId, txs: &[Transmission]| txs.binary_search_by_key(&v, |t| t.node).is_err();
        for (v, prog) in programs.iter_mut().enumerate() {
            if !is_listener(v, &txs) {
                continue;
            }
            match heard[v].take() {
                Some(m) => prog.observe(round, Observation::Heard(m)),
                None => prog.observe(round, Observation::Silence),
            }
        }
        for d in &outcome.deliveries {
            if d.message.is_data() && !holds[d.receiver] {
                holds[d.receiver] = true;
                informed_count += 1;
                first_informed[d.receiver] = Some(round);
            }
        }
        for (v, prog) in programs.iter().enumerate() {
            if prog.informed() != holds[v] {
                return Err(fault(v, format!("informed() = {} disagrees with message possession", prog.informed())));
            }
        }
        for t in &txs {
            stats.transmissions += 1;
            if t.message.is_data() {
                stats.data_transmissions += 1;
                data_sent[t.node] += 1;
            }
        }
        stats.deliveries += outcome.deliveries.len() as u64;
        stats.collision_blocked += outcome.collision_blocked.len() as u64;
        stats.swamp_blocked += outcome.swamp_blocked.len() as u64;
        if completion_round.is_none() && informed_count == n && n > 0 {
            completion_round = Some(round);
        }

        let trace = RoundTrace {
            round,
            transmitters: std::mem::take(&mut txs),
            deliveries: outcome.deliveries,
            collision_blocked: outcome.collision_blocked,
            swamp_blocked: outcome.swamp_blocked,
            grants: grant_log,
        };
        digest_round(&mut hasher, &trace);
        let control = sup.after_round(&trace, &holds);
        round += 1;
        if opts.trace == TraceMode::Full {
            rounds.push(trace);
        } else {
            txs = trace.transmitters;
        }
        if control == Control::Stop {
            stop = StopReason::Supervisor;
            break;
        }
    }
    if round >= opts.max_rounds && horizon.is_some_and(|h| round >= h) {
        stop = StopReason::Horizon;
    }

    let informed_final = (0..n).filter(|&v| holds[v]).collect();
    Ok(SimResult {
        rounds,
        rounds_executed: round,
        completion_round,
        informed_final,
        initially_informed,
        first_informed,
        data_sent,
        stats,
        stop,
        digest: hex(&hasher.finalize()),
    })
}

fn digest_round(h: &mut Sha256, t: &RoundTrace) {
    h.update(t.round.to_le_bytes());
    let msg = |h: &mut Sha256, m: &Message| {
        match m.kind {
            MessageKind::Hello => h.update([0u8]),
            MessageKind::Data { token } => {
                h.update([1u8]);
                h.update(token.0.to_le_bytes());
            }
        }
        h.update(m.origin.x.to_bits().to_le_bytes());
        h.update(m.origin.y.to_bits().to_le_bytes());
    };
    h.update((t.transmitters.len() as u64).to_le_bytes());
    for x in &t.transmitters {
        h.update((x.node as u64).to_le_bytes());
        msg(h, &x.message);
    }
    h.update((t.deliveries.len() as u64).to_le_bytes());
    for d in &t.deliveries {
        h.update((d.receiver as u64).to_le_bytes());
        h.update((d.sender as u64).to_le_bytes());
    }
    for set in [&t.collision_blocked, &t.swamp_blocked] {
        h.update((set.len() as u64).to_le_bytes());
        for &v in set.iter() {
            h.update((v as u64).to_le_bytes());
        }
    }
    h.update((t.grants.len() as u64).to_le_bytes());
    for g in &t.grants {
        h.update((g.node as u64).to_le_bytes());
        for e in &g.grant.entries {
            h.update((e.home as u64).to_le_bytes());
            h.update([e.informed as u8]);
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Transmits on a fixed list of rounds, but only once it holds the message.
#[derive(Clone, Debug)]
pub struct ScheduledProgram {
    position: Point,
    rounds: Vec<Round>,
    next: usize,
    informed: bool,
    token: Token,
    horizon: Round,
}

impl ScheduledProgram {
    pub fn new(position: Point, mut rounds: Vec<Round>, informed: bool, horizon: Round) -> Self {
        rounds.sort_unstable();
        rounds.dedup();
        ScheduledProgram { position, rounds, next: 0, informed, token: Token(0), horizon }
    }

    pub fn schedule(&self) -> &[Round] {
        &self.rounds
    }
}

impl NodeProgram for ScheduledProgram {
    fn step(&mut self, round: Round) -> Action {
        while self.next < self.rounds.len() && self.rounds[self.next] < round {
            self.next += 1;
        }
        if self.informed && self.rounds.get(self.next) == Some(&round) {
            Action::Transmit(Message::data(self.token, self.position))
        } else {
            Action::Listen
        }
    }

    fn observe(&mut self, _round: Round, obs: Observation) {
        if let Observation::Heard(m) = obs {
            if let MessageKind::Data { token } = m.kind {
                self.informed = true;
                self.token = token;
            }
        }
    }

    fn informed(&self) -> bool {
        self.informed
    }

    fn horizon(&self) -> Option<Round> {
        Some(self.horizon)
    }
}

/// Programs for a schedule given as per-round transmitter lists.
pub fn scheduled_programs(net: &Network, schedule: &[Vec<NodeId>], holders: &[NodeId]) -> Vec<ScheduledProgram> {
    let mut per_node: Vec<Vec<Round>> = vec![Vec::new(); net.len()];
    for (t, txs) in schedule.iter().enumerate() {
        for &v in txs {
            per_node[v].push(t as Round);
        }
    }
    let horizon = schedule.len() as Round;
    per_node
        .into_iter()
        .enumerate()
        .map(|(v, rounds)| ScheduledProgram::new(net.positions()[v], rounds, holders.contains(&v), horizon))
        .collect()
}
