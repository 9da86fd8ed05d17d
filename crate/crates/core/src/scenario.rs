//! Scenario files, single runs with verification, sweeps and JSON-lines traces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::discovery::{run_procedure_d, run_procedure_d_star, DiscoveryError, DiscoveryMode};
use crate::engine::{Round, SimResult, TraceMode};
use crate::geometry::{generate_placement, Dim, GeometryError, Network, NodeId, PlacementSpec, RadioParams};
use crate::lattice::{self, LatticeError};
use crate::oracle::{self, LemmaCheck};
use crate::partition::{Partition, PartitionError};
use crate::unknown::{run_broadcast, BroadcastError, BroadcastOptions, Election, RelayAudit, DEFAULT_HORIZON_MULT};

pub const SEED_ENV: &str = "SWAMPCAST_SEED";
pub const TRACE_SCHEMA: u32 = 1;
/// `(id, reason)` of a grid point that failed validation.
pub type Skipped = (String, String);

pub const CSV_HEADER: [&str; 13] =
    ["id", "n", "r", "s", "gamma", "D", "rounds", "bound", "informed", "within_bound", "collision_free", "oracle", "pass"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Broadcast(#[from] BroadcastError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "A", alias = "a")]
    A,
    #[serde(rename = "A2", alias = "a2")]
    A2,
    #[serde(rename = "B", alias = "b")]
    B,
    #[serde(rename = "B2", alias = "b2")]
    B2,
    #[serde(rename = "D", alias = "d")]
    D,
    #[serde(rename = "Dstar", alias = "dstar", alias = "D*")]
    DStar,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::A => "A",
            Algorithm::A2 => "A2",
            Algorithm::B => "B",
            Algorithm::B2 => "B2",
            Algorithm::D => "D",
            Algorithm::DStar => "Dstar",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    #[serde(default = "one")]
    pub r: f64,
    pub s: f64,
    #[serde(default = "one")]
    pub gamma: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub name: Algorithm,
    #[serde(default)]
    pub source: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_id")]
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mult")]
    pub horizon_mult: u64,
    #[serde(default)]
    pub trace: bool,
}

fn default_id() -> String {
    "scenario".into()
}

fn default_mult() -> u64 {
    DEFAULT_HORIZON_MULT
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { id: default_id(), seed: 0, horizon_mult: DEFAULT_HORIZON_MULT, trace: false }
    }
}

/// Grid axes; an empty axis keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub r: Vec<f64>,
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub source: Vec<NodeId>,
    /// Seeds `run.seed .. run.seed + seeds`.
    #[serde(default = "one_seed")]
    pub seeds: u64,
    /// Run the oracle audit on every row.
    #[serde(default)]
    pub verify: bool,
}

fn one_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub placement: PlacementSpec,
    pub radio: RadioSection,
    pub algorithm: AlgorithmSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Scenario {
    /// Parses a scenario; errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            msg: e.message().trim().to_string(),
        })
    }

    /// Reads a file, resolves placement files against its directory and
    /// applies the seed override from the environment.
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io { path: path.display().to_string(), source: e })?;
        let mut sc = Scenario::parse(&text)?;
        if let PlacementSpec::File { path: p } = &mut sc.placement {
            if Path::new(p.as_str()).is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(p.as_str()).display().to_string();
                }
            }
        }
        sc.apply_seed_env(std::env::var(SEED_ENV).ok().as_deref())?;
        Ok(sc)
    }

    pub fn apply_seed_env(&mut self, value: Option<&str>) -> Result<(), ScenarioError> {
        if let Some(v) = value {
            self.run.seed = v.trim().parse().map_err(|_| ScenarioError::Invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<RadioParams, ScenarioError> {
        Ok(RadioParams::new(self.radio.r, self.radio.s, self.radio.gamma)?)
    }

    fn lattice_rs(&self) -> Result<(u32, u32), ScenarioError> {
        let (r, s) = (self.radio.r, self.radio.s);
        if r.fract() != 0.0 || s.fract() != 0.0 || r < 1.0 || s < 0.0 {
            return Err(ScenarioError::Invalid(format!("lattice algorithms need integer r >= 1 and s >= 0, got r={r}, s={s}")));
        }
        Ok((r as u32, s as u32))
    }

    fn lattice_n(&self) -> Result<usize, ScenarioError> {
        match (&self.placement, self.algorithm.name) {
            (PlacementSpec::LatticeLine { n }, Algorithm::A) | (PlacementSpec::Lattice2d { n }, Algorithm::A2) => Ok(*n),
            (_, name) => Err(ScenarioError::Invalid(format!(
                "algorithm {name} runs on the {} lattice placement",
                if name == Algorithm::A { "lattice-line" } else { "lattice-2d" }
            ))),
        }
    }

    /// Static checks that do not need a simulation.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params()?;
        match self.algorithm.name {
            Algorithm::A | Algorithm::A2 => {
                let (r, s) = self.lattice_rs()?;
                self.lattice_n()?;
                lattice::step_size(r, s)?;
            }
            Algorithm::B | Algorithm::B2 | Algorithm::D | Algorithm::DStar => {
                if self.radio.r != 1.0 {
                    return Err(ScenarioError::Invalid(format!("unknown-topology algorithms assume r = 1, got {}", self.radio.r)));
                }
                let want = match self.algorithm.name {
                    Algorithm::B => Some(Dim::Line),
                    Algorithm::B2 => Some(Dim::Plane),
                    _ => None,
                };
                if let Some(d) = want {
                    if self.placement.dim() != d {
                        return Err(ScenarioError::Invalid(format!("algorithm {} needs a {d:?} placement", self.algorithm.name)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the network the run will use.
    pub fn network(&self) -> Result<Network, ScenarioError> {
        match self.algorithm.name {
            Algorithm::A => {
                let (r, s) = self.lattice_rs()?;
                Ok(lattice::lattice_line(self.lattice_n()?, r, s)?)
            }
            Algorithm::A2 => {
                let (r, s) = self.lattice_rs()?;
                Ok(lattice::lattice_2d(self.lattice_n()?, r, s)?)
            }
            _ => Ok(generate_placement(&self.placement, self.params()?, self.run.seed)?),
        }
    }

    /// Expands the `[sweep]` grid. Rows failing `validate` are dropped and
    /// returned separately. Without a grid the scenario is its own single row.
    pub fn expand(&self) -> Result<(Vec<Scenario>, Vec<Skipped>), ScenarioError> {
        let Some(sw) = &self.sweep else {
            let mut one = self.clone();
            one.sweep = None;
            return Ok((vec![one], Vec::new()));
        };
        fn axis<T: Copy>(v: &[T], base: T) -> Vec<T> {
            if v.is_empty() { vec![base] } else { v.to_vec() }
        }
        let base_n = placement_n(&self.placement);
        if !sw.n.is_empty() && base_n.is_none() {
            return Err(ScenarioError::Invalid("sweep over n needs a placement with an `n` field".into()));
        }
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        let mut idx = 0usize;
        for &n in &axis(&sw.n, base_n.unwrap_or(0)) {
            for &r in &axis(&sw.r, self.radio.r) {
                for &s in &axis(&sw.s, self.radio.s) {
                    for &gamma in &axis(&sw.gamma, self.radio.gamma) {
                        for seed in self.run.seed..self.run.seed + sw.seeds.max(1) {
                            for &source in &axis(&sw.source, self.algorithm.source) {
                                let mut sc = self.clone();
                                sc.sweep = None;
                                sc.run.id = format!("{}-{idx:04}", self.run.id);
                                sc.run.seed = seed;
                                sc.radio = RadioSection { r, s, gamma };
                                sc.algorithm.source = source;
                                if base_n.is_some() {
                                    set_placement_n(&mut sc.placement, n);
                                }
                                idx += 1;
                                match sc.validate() {
                                    Ok(()) => rows.push(sc),
                                    Err(e) => skipped.push((sc.run.id, e.to_string())),
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok((rows, skipped))
    }
}

fn placement_n(p: &PlacementSpec) -> Option<usize> {
    match p {
        PlacementSpec::LatticeLine { n } | PlacementSpec::Lattice2d { n } => Some(*n),
        PlacementSpec::RandomLine { n, .. } | PlacementSpec::RandomPlane { n, .. } => Some(*n),
        _ => None,
    }
}

fn set_placement_n(p: &mut PlacementSpec, value: usize) {
    match p {
        PlacementSpec::LatticeLine { n } | PlacementSpec::Lattice2d { n } => *n = value,
        PlacementSpec::RandomLine { n, .. } | PlacementSpec::RandomPlane { n, .. } => *n = value,
        _ => {}
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Witness on failure, a short summary otherwise.
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }

    fn from_lemma(c: &LemmaCheck) -> Self {
        let detail = if c.passed() { format!("{} cases", c.cases) } else { format!("{}/{} failed; {}", c.failures, c.cases, c.witnesses.join("; ")) };
        Check { name: format!("lemma:{}", c.name), pass: c.passed(), detail }
    }

    fn is_oracle(&self) -> bool {
        self.name.starts_with("oracle-") || self.name.starts_with("lemma:")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub id: String,
    pub algorithm: Algorithm,
    pub n: usize,
    pub r: f64,
    pub s: f64,
    pub gamma: f64,
    pub source: NodeId,
    pub seed: u64,
    /// Source eccentricity from the flooding baseline.
    #[serde(rename = "D")]
    pub d: u32,
    pub connected: bool,
    pub rounds: Option<Round>,
    pub bound: Round,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub digest: String,
    #[serde(skip)]
    pub runtime_ms: u128,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn flag(&self, name: &str) -> &'static str {
        flag(self.check(name).map(|c| c.pass))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn csv_record(&self) -> Vec<String> {
        let oracle: Vec<bool> = self.checks.iter().filter(|c| c.is_oracle()).map(|c| c.pass).collect();
        let oracle = if oracle.is_empty() { None } else { Some(oracle.iter().all(|&p| p)) };
        vec![
            self.id.clone(),
            self.n.to_string(),
            self.r.to_string(),
            self.s.to_string(),
            self.gamma.to_string(),
            self.d.to_string(),
            self.rounds.map_or_else(|| "-".into(), |r| r.to_string()),
            self.bound.to_string(),
            self.flag("informed").into(),
            self.flag("within-bound").into(),
            self.flag("collision-free").into(),
            flag(oracle).into(),
            flag(Some(self.pass)).into(),
        ]
    }
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "1",
        Some(false) => "0",
        None => "-",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Audit {
    /// Algorithm checks only.
    Basic,
    /// Adds link-set and reception replays against the oracle plus lemma audits.
    Full,
}

/// Everything a run produced; the trace needs the full round log.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub scenario: Scenario,
    pub network: Network,
    pub result: SimResult,
    pub elections: Vec<Election>,
    pub report: VerificationReport,
}

fn uninformed_detail(res: &SimResult) -> String {
    let missing: Vec<usize> = (0..res.first_informed.len()).filter(|v| !res.informed_final.contains(v)).collect();
    if missing.is_empty() {
        format!("{} informed", res.informed_final.len())
    } else {
        format!("{} uninformed, first {:?}", missing.len(), &missing[..missing.len().min(5)])
    }
}

fn informed_check(res: &SimResult) -> Check {
    Check::new("informed", res.all_informed(), uninformed_detail(res))
}

fn bound_check(rounds: Option<Round>, bound: Round) -> Check {
    match rounds {
        Some(r) => Check::new("within-bound", r <= bound, format!("{r} <= {bound}")),
        None => Check::new("within-bound", false, format!("never completed; bound {bound}")),
    }
}

fn lattice_collision_check(net: &Network, res: &SimResult, min_sep: Option<f64>) -> Check {
    for t in &res.rounds {
        if let Some(&v) = t.collision_blocked.first() {
            return Check::new("collision-free", false, format!("round {}: node {v} collision-blocked", t.round));
        }
        if let Some(sep) = min_sep {
            for (i, a) in t.transmitters.iter().enumerate() {
                for b in &t.transmitters[i + 1..] {
                    let d = net.dist(a.node, b.node).unwrap_or(f64::INFINITY);
                    if d <= sep {
                        return Check::new("collision-free", false, format!("round {}: transmitters {} and {} only {d} apart", t.round, a.node, b.node));
                    }
                }
            }
        }
    }
    Check::new("collision-free", true, "no collision-blocked receptions")
}

fn relay_checks(audit: &RelayAudit, res: &SimResult, dim: Dim) -> Vec<Check> {
    let mut out = vec![Check::new(
        "collision-free",
        audit.collisions == 0 && audit.cross_region_collisions == 0,
        format!("{} relay collisions, {} across regions", audit.collisions, audit.cross_region_collisions),
    )];
    let repeat = res.data_sent.iter().position(|&c| c > 1);
    out.push(Check::new(
        "once-only",
        repeat.is_none(),
        repeat.map_or_else(|| "every node sent at most once".into(), |v| format!("node {v} sent {} times", res.data_sent[v])),
    ));
    if dim == Dim::Plane {
        let w = audit.coverage_failures.first();
        out.push(Check::new(
            "coverage",
            w.is_none(),
            w.map_or_else(
                || format!("{} block audits", audit.blocks_audited),
                |w| format!("{} failures; round {} region {} block {}: {} misses {}", audit.coverage_failures.len(), w.round, w.region, w.block, w.informed, w.missed),
            ),
        ));
    }
    out
}

/// Link sets of `net` against the brute-force oracle.
pub fn oracle_link_check(net: &Network) -> Check {
    for u in 0..net.len() {
        let want = oracle::oracle_neighbors(net, u);
        let got: BTreeSet<NodeId> = net.neighbors(u).unwrap_or(&[]).iter().copied().collect();
        if want != got {
            let diff: Vec<_> = want.symmetric_difference(&got).collect();
            return Check::new("oracle-links", false, format!("node {u}: link sets differ at {diff:?}"));
        }
    }
    Check::new("oracle-links", true, format!("{} nodes", net.len()))
}

/// Replays every traced round through the oracle reception rule.
pub fn oracle_reception_check(net: &Network, res: &SimResult) -> Check {
    let mut mismatches = 0u64;
    let mut witness = None;
    for t in &res.rounds {
        if t.transmitters.is_empty() {
            continue;
        }
        let tx: Vec<NodeId> = t.transmitters.iter().map(|x| x.node).collect();
        let want = oracle::oracle_reception(net, &tx);
        let mut got = vec![None; net.len()];
        for d in &t.deliveries {
            got[d.receiver] = Some(d.sender);
        }
        for v in 0..net.len() {
            if want[v] != got[v] {
                mismatches += 1;
                witness.get_or_insert_with(|| format!("round {}: node {v} engine {:?} oracle {:?}", t.round, got[v], want[v]));
            }
        }
    }
    match witness {
        None => Check::new("oracle-reception", true, format!("{} rounds replayed", res.rounds.len())),
        Some(w) => Check::new("oracle-reception", false, format!("{mismatches} mismatches; {w}")),
    }
}

/// Lemma audits that apply to one network.
pub fn instance_lemmas(net: &Network, seed: u64) -> Result<Vec<LemmaCheck>, ScenarioError> {
    let part = Partition::for_network(net)?;
    let mut out = vec![oracle::check_single_home(net, &part), oracle::check_no_cross_region_collision(net, &part)];
    match net.dim() {
        Dim::Line => out.push(oracle::check_range_overlap(net)),
        Dim::Plane => out.push(oracle::check_spokesman_coverage(net, &part, seed, 3)),
    }
    Ok(out)
}

/// Runs one scenario. `trace` keeps the full round log even without `Audit::Full`.
pub fn run_scenario(sc: &Scenario, audit: Audit, trace: bool) -> Result<Outcome, ScenarioError> {
    let start = Instant::now();
    sc.validate()?;
    let net = sc.network()?;
    let source = sc.algorithm.source;
    if source >= net.len() {
        return Err(ScenarioError::Invalid(format!("source {source} outside 0..{}", net.len())));
    }
    let mode = if trace || audit == Audit::Full { TraceMode::Full } else { TraceMode::Summary };
    let flood = oracle::flooding_baseline(&net, source);
    let mut checks = Vec::new();
    let mut elections = Vec::new();
    let (result, rounds, bound) = match sc.algorithm.name {
        Algorithm::A | Algorithm::A2 => {
            let (r, s) = sc.lattice_rs()?;
            let n = net.len();
            let (res, bound) = if sc.algorithm.name == Algorithm::A {
                (lattice::run_algorithm_a(n, r, s, source)?, lattice::lattice_line_bound(n, r, s)?)
            } else {
                (lattice::run_algorithm_a2(n, r, s, source)?, lattice::lattice_plane_bound(n, r, s)?)
            };
            let rounds = res.rounds_to_complete();
            checks.push(informed_check(&res));
            checks.push(bound_check(rounds, bound));
            let sep = (sc.algorithm.name == Algorithm::A2).then_some(2.0 * r as f64);
            checks.push(lattice_collision_check(&net, &res, sep));
            (res, rounds, bound)
        }
        Algorithm::B | Algorithm::B2 => {
            let run = run_broadcast(&net, source, BroadcastOptions { horizon_mult: sc.run.horizon_mult, trace: mode })?;
            let rounds = run.result.rounds_to_complete();
            checks.push(Check::new("connected", run.connected, format!("eccentricity {}", run.eccentricity)));
            checks.push(informed_check(&run.result));
            checks.push(bound_check(rounds, run.bound));
            checks.extend(relay_checks(&run.audit, &run.result, net.dim()));
            elections = run.audit.elections;
            (run.result, rounds, run.bound)
        }
        Algorithm::D | Algorithm::DStar => {
            let part = Arc::new(Partition::for_network(&net)?);
            let (run, dmode) = if sc.algorithm.name == Algorithm::D {
                (run_procedure_d(&net, &part, mode)?, DiscoveryMode::D)
            } else {
                (run_procedure_d_star(&net, &part, mode)?, DiscoveryMode::DStar)
            };
            let want = dmode.rounds(part.slots());
            let got = run.result.rounds_executed;
            checks.push(Check::new("rounds-exact", got == want, format!("{got} rounds, schedule {want}")));
            let k = oracle::check_knowledge(&net, &part, &run.knowledge, dmode == DiscoveryMode::D);
            let mut kc = Check::from_lemma(&k);
            kc.name = "knowledge".into();
            checks.push(kc);
            (run.result, Some(got), want)
        }
    };
    if audit == Audit::Full {
        checks.push(oracle_link_check(&net));
        checks.push(oracle_reception_check(&net, &result));
        match sc.algorithm.name {
            Algorithm::A | Algorithm::A2 => {
                if sc.algorithm.name == Algorithm::A2 {
                    let r = sc.lattice_rs()?.0;
                    checks.push(Check::from_lemma(&oracle::check_annulus(r.max(2))));
                }
            }
            _ => {
                for c in instance_lemmas(&net, sc.run.seed)? {
                    checks.push(Check::from_lemma(&c));
                }
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = VerificationReport {
        id: sc.run.id.clone(),
        algorithm: sc.algorithm.name,
        n: net.len(),
        r: sc.radio.r,
        s: sc.radio.s,
        gamma: sc.radio.gamma,
        source,
        seed: sc.run.seed,
        d: flood.eccentricity,
        connected: flood.connected,
        rounds,
        bound,
        checks,
        pass,
        digest: result.digest.clone(),
        runtime_ms: start.elapsed().as_millis(),
    };
    Ok(Outcome { scenario: sc.clone(), network: net, result, elections, report })
}

/// One sweep row: a report, or the error that stopped the run.
#[derive(Debug)]
pub struct SweepRow {
    pub id: String,
    pub outcome: Result<VerificationReport, String>,
}

impl SweepRow {
    pub fn pass(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.pass)
    }

    pub fn csv_record(&self, sc: &Scenario) -> Vec<String> {
        match &self.outcome {
            Ok(r) => r.csv_record(),
            Err(_) => {
                let n = placement_n(&sc.placement).map_or_else(|| "-".into(), |n| n.to_string());
                vec![
                    self.id.clone(),
                    n,
                    sc.radio.r.to_string(),
                    sc.radio.s.to_string(),
                    sc.radio.gamma.to_string(),
                    "-".into(),
                    "-".into(),
                    "-".into(),
                    "0".into(),
                    "0".into(),
                    "0".into(),
                    "-".into(),
                    "0".into(),
                ]
            }
        }
    }
}

#[derive(Debug)]
pub struct Sweep {
    pub scenarios: Vec<Scenario>,
    pub rows: Vec<SweepRow>,
    /// Grid points rejected before running, with the reason.
    pub skipped: Vec<Skipped>,
}

impl Sweep {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for (sc, row) in self.scenarios.iter().zip(&self.rows) {
            out.write_record(row.csv_record(sc))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }
}

/// Runs every grid point, in parallel over `threads` workers; rows come back
/// in id order.
pub fn sweep(base: &Scenario, threads: usize) -> Result<Sweep, ScenarioError> {
    let (scenarios, skipped) = base.expand()?;
    let audit = if base.sweep.as_ref().is_some_and(|s| s.verify) { Audit::Full } else { Audit::Basic };
    let slots: Vec<Mutex<Option<SweepRow>>> = scenarios.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(scenarios.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(sc) = scenarios.get(i) else { break };
                let outcome = run_scenario(sc, audit, false).map(|o| o.report).map_err(|e| e.to_string());
                *slots[i].lock().unwrap() = Some(SweepRow { id: sc.run.id.clone(), outcome });
            });
        }
    });
    let rows = slots.into_iter().map(|m| m.into_inner().unwrap().expect("every row ran")).collect();
    Ok(Sweep { scenarios, rows, skipped })
}

/// Writes the JSON-lines trace: a header, one line per active round, the
/// spokesman elections, then a summary.
pub fn write_trace<W: Write>(mut w: W, out: &Outcome) -> io::Result<()> {
    let sc = &out.scenario;
    let header = json!({
        "type": "header",
        "schema": TRACE_SCHEMA,
        "id": sc.run.id,
        "algorithm": sc.algorithm.name,
        "source": sc.algorithm.source,
        "seed": sc.run.seed,
        "dim": out.network.dim(),
        "params": { "r": sc.radio.r, "s": sc.radio.s, "gamma": sc.radio.gamma },
        "positions": out.network.positions().iter().map(|p| match out.network.dim() {
            Dim::Line => json!([p.x]),
            Dim::Plane => json!([p.x, p.y]),
        }).collect::<Vec<_>>(),
    });
    writeln!(w, "{header}")?;
    for t in &out.result.rounds {
        if t.transmitters.is_empty() && t.grants.is_empty() {
            continue;
        }
        let tx: Vec<_> = t.transmitters.iter().map(|x| json!([x.node, if x.message.is_data() { "data" } else { "hello" }])).collect();
        let rx: Vec<_> = t.deliveries.iter().map(|d| json!([d.receiver, d.sender])).collect();
        let line = json!({
            "type": "round",
            "round": t.round,
            "tx": tx,
            "rx": rx,
            "collision": t.collision_blocked,
            "swamped": t.swamp_blocked,
            "grants": t.grants.len(),
        });
        writeln!(w, "{line}")?;
    }
    for e in &out.elections {
        let spokesmen: BTreeMap<String, &Vec<String>> = e.spokesmen.iter().map(|(v, l)| (v.to_string(), l)).collect();
        let line = json!({ "type": "election", "round": e.round, "region": e.region, "block": e.block, "spokesmen": spokesmen });
        writeln!(w, "{line}")?;
    }
    let r = &out.report;
    let summary = json!({
        "type": "summary",
        "rounds_executed": out.result.rounds_executed,
        "completion_round": out.result.completion_round,
        "rounds": r.rounds,
        "bound": r.bound,
        "D": r.d,
        "informed": out.result.informed_final.len(),
        "stop": out.result.stop,
        "stats": out.result.stats,
        "checks": r.checks,
        "pass": r.pass,
        "digest": out.result.digest,
    });
    writeln!(w, "{summary}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[placement]
kind = "random-line"
length = 4.0
n = 12

[radio]
s = 0.5
gamma = 0.2

[algorithm]
name = "B"

[run]
id = "demo"
seed = 3
"#;

    #[test]
    fn parse_and_run() {
        let sc = Scenario::parse(BASIC).unwrap();
        assert_eq!(sc.run.horizon_mult, 16);
        assert_eq!(sc.radio.r, 1.0);
        let out = run_scenario(&sc, Audit::Full, false).unwrap();
        assert!(out.report.pass, "{:?}", out.report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn parse_error_line() {
        let bad = BASIC.replace("gamma = 0.2", "gamma = \"x\"");
        match Scenario::parse(&bad) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        match Scenario::parse("[radio]\ns = 0.5\n[algorithm]\nname = \"Z\"\n") {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_override() {
        let mut sc = Scenario::parse(BASIC).unwrap();
        sc.apply_seed_env(Some("99")).unwrap();
        assert_eq!(sc.run.seed, 99);
        assert!(sc.apply_seed_env(Some("-1")).is_err());
    }

    #[test]
    fn sweep_skips_invalid() {
        let text = r#"
[placement]
kind = "lattice-line"
n = 20
[radio]
r = 3
s = 0
[algorithm]
name = "A"
[run]
id = "t1"
[sweep]
s = [0, 1, 2, 3]
"#;
        let sc = Scenario::parse(text).unwrap();
        let sw = sweep(&sc, 2).unwrap();
        assert_eq!(sw.rows.len(), 2);
        assert_eq!(sw.skipped.len(), 2);
        assert!(sw.pass());
        let csv = String::from_utf8(sw.csv_bytes()).unwrap();
        assert!(csv.starts_with("id,n,r,s,gamma,D,rounds,bound,informed,within_bound,collision_free,oracle,pass\n"));
        assert!(csv.contains("t1-0000,20,3,0,1,"));
    }
}
