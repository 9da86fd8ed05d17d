//! Neighbourhood discovery: procedures D, D_(b,h) and D*.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{self, Action, EngineError, Message, MessageKind, NodeProgram, Observation, Round, RunOptions, SimResult, Token, TraceMode};
use crate::geometry::{Network, Point};
use crate::partition::{Partition, PartitionError, PartitionLabel, SlotLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscoveryError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("expected {expected} knowledge sets, got {got}")]
    KnowledgeCount { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownNode {
    /// Exact sender location when heard, otherwise the centre of its home.
    pub location: Point,
    /// Learned by receiving the node's own hello.
    pub heard: bool,
}

/// The set `N_u` of nodes known to `u`, keyed by `(block, home)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeSet {
    entries: BTreeMap<SlotLabel, KnownNode>,
}

impl KnowledgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry; an existing entry is only upgraded from inferred to heard.
    pub fn insert(&mut self, label: SlotLabel, node: KnownNode) -> bool {
        match self.entries.get_mut(&label) {
            None => {
                self.entries.insert(label, node);
                true
            }
            Some(e) if node.heard && !e.heard => {
                *e = node;
                false
            }
            Some(_) => false,
        }
    }

    pub fn contains(&self, label: &SlotLabel) -> bool {
        self.entries.contains_key(label)
    }

    pub fn heard(&self, label: &SlotLabel) -> bool {
        self.entries.get(label).is_some_and(|e| e.heard)
    }

    pub fn get(&self, label: &SlotLabel) -> Option<&KnownNode> {
        self.entries.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = SlotLabel> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SlotLabel, &KnownNode)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Known homes of block `block`.
    pub fn in_block(&self, block: usize) -> impl Iterator<Item = (&SlotLabel, &KnownNode)> {
        self.entries.range(SlotLabel { block, home: 0 }..SlotLabel { block: block + 1, home: 0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscoveryMode {
    D,
    /// One D_(b,h) pass; the guard uses the heard entries of the initial knowledge.
    Dbh(SlotLabel),
    /// D followed by D_(b,h) for every `(b,h)` in schedule order.
    DStar,
}

impl DiscoveryMode {
    pub fn rounds(&self, slots: usize) -> Round {
        let s = slots as Round;
        match self {
            DiscoveryMode::D | DiscoveryMode::Dbh(_) => s,
            DiscoveryMode::DStar => s * (1 + s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscoveryProgram {
    position: Point,
    label: PartitionLabel,
    partition: Arc<Partition>,
    mode: DiscoveryMode,
    knowledge: KnowledgeSet,
    holds: Option<Token>,
}

impl DiscoveryProgram {
    pub fn new(
        position: Point,
        partition: Arc<Partition>,
        mode: DiscoveryMode,
        knowledge: KnowledgeSet,
        holds: Option<Token>,
    ) -> Result<Self, PartitionError> {
        let label = partition.label_of(&position)?;
        Ok(DiscoveryProgram { position, label, partition, mode, knowledge, holds })
    }

    pub fn position(&self) -> Point {
        self.position
    }

    pub fn label(&self) -> PartitionLabel {
        self.label
    }

    pub fn knowledge(&self) -> &KnowledgeSet {
        &self.knowledge
    }

    pub fn into_knowledge(self) -> KnowledgeSet {
        self.knowledge
    }

    pub fn holds(&self) -> Option<Token> {
        self.holds
    }

    pub fn schedule_len(&self) -> Round {
        self.mode.rounds(self.partition.slots())
    }

    /// `(slot label, guard label)` active in `round`; the guard is `None` during D.
    fn phase(&self, round: Round) -> (SlotLabel, Option<SlotLabel>) {
        let slots = self.partition.slots() as Round;
        let slot = self.partition.slot_label((round % slots) as usize);
        let guard = match self.mode {
            DiscoveryMode::D => None,
            DiscoveryMode::Dbh(bh) => Some(bh),
            DiscoveryMode::DStar => match round / slots {
                0 => None,
                p => Some(self.partition.slot_label((p - 1) as usize)),
            },
        };
        (slot, guard)
    }
}

impl NodeProgram for DiscoveryProgram {
    fn step(&mut self, round: Round) -> Action {
        if round >= self.schedule_len() {
            return Action::Listen;
        }
        let own = self.label.slot();
        let (slot, guard) = self.phase(round);
        if own == slot || guard == Some(own) {
            Action::Transmit(Message::hello(self.position))
        } else {
            Action::Listen
        }
    }

    fn observe(&mut self, round: Round, obs: Observation) {
        if let Observation::Heard(Message { kind: MessageKind::Data { token }, .. }) = obs {
            self.holds = Some(token);
        }
        if round >= self.schedule_len() {
            return;
        }
        let (slot, guard) = self.phase(round);
        match (guard, obs) {
            (None, Observation::Heard(m)) if m.kind == MessageKind::Hello => {
                self.knowledge.insert(slot, KnownNode { location: m.origin, heard: true });
            }
            (Some(bh), Observation::Silence) if self.knowledge.heard(&bh) => {
                if !self.knowledge.contains(&slot) {
                    let (_, rect) = self.partition.nearest_home(&self.position, slot);
                    self.knowledge.insert(slot, KnownNode { location: rect.center(), heard: false });
                }
            }
            _ => {}
        }
    }

    fn informed(&self) -> bool {
        self.holds.is_some()
    }

    fn horizon(&self) -> Option<Round> {
        Some(self.schedule_len())
    }
}

#[derive(Clone, Debug)]
pub struct DiscoveryRun {
    pub knowledge: Vec<KnowledgeSet>,
    pub labels: Vec<PartitionLabel>,
    pub result: SimResult,
}

pub fn discovery_programs(
    net: &Network,
    partition: &Arc<Partition>,
    mode: DiscoveryMode,
    knowledge: Option<Vec<KnowledgeSet>>,
) -> Result<Vec<DiscoveryProgram>, DiscoveryError> {
    let mut initial = knowledge.unwrap_or_else(|| vec![KnowledgeSet::new(); net.len()]);
    if initial.len() != net.len() {
        return Err(DiscoveryError::KnowledgeCount { expected: net.len(), got: initial.len() });
    }
    net.positions()
        .iter()
        .zip(initial.drain(..))
        .map(|(p, k)| Ok(DiscoveryProgram::new(*p, partition.clone(), mode, k, None)?))
        .collect()
}

fn run_mode(
    net: &Network,
    partition: &Arc<Partition>,
    mode: DiscoveryMode,
    knowledge: Option<Vec<KnowledgeSet>>,
    trace: TraceMode,
) -> Result<DiscoveryRun, DiscoveryError> {
    let mut progs = discovery_programs(net, partition, mode, knowledge)?;
    let rounds = mode.rounds(partition.slots());
    let result = engine::run(net, &mut progs, RunOptions { max_rounds: rounds.max(1), trace })?;
    let labels = progs.iter().map(|p| p.label()).collect();
    Ok(DiscoveryRun { knowledge: progs.into_iter().map(|p| p.into_knowledge()).collect(), labels, result })
}

pub fn run_procedure_d(net: &Network, partition: &Arc<Partition>, trace: TraceMode) -> Result<DiscoveryRun, DiscoveryError> {
    run_mode(net, partition, DiscoveryMode::D, None, trace)
}

pub fn run_procedure_d_bh(
    net: &Network,
    partition: &Arc<Partition>,
    bh: SlotLabel,
    knowledge: Vec<KnowledgeSet>,
    trace: TraceMode,
) -> Result<DiscoveryRun, DiscoveryError> {
    partition.validate(bh)?;
    run_mode(net, partition, DiscoveryMode::Dbh(bh), Some(knowledge), trace)
}

pub fn run_procedure_d_star(net: &Network, partition: &Arc<Partition>, trace: TraceMode) -> Result<DiscoveryRun, DiscoveryError> {
    run_mode(net, partition, DiscoveryMode::DStar, None, trace)
}
