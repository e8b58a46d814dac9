//! Discrete-event loop over a scenario: interests, deliveries, caching,
//! fault injection and re-links.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use super::config::{Action, ConfigError, NodeKind, ScenarioConfig};
use super::store::{ChunkKey, ContentStore};
use super::{dispatch_protection, DataCategory};
use crate::envelope::{digest, Digest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotFoundReason {
    UnknownName,
    Unreachable,
    HopBudget,
}

impl NotFoundReason {
    pub fn name(&self) -> &'static str {
        match self {
            NotFoundReason::UnknownName => "unknown-name",
            NotFoundReason::Unreachable => "unreachable",
            NotFoundReason::HopBudget => "hop-budget",
        }
    }
}

impl FromStr for NotFoundReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [NotFoundReason::UnknownName, NotFoundReason::Unreachable, NotFoundReason::HopBudget]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown reason {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Served {
        from: String,
        kind: NodeKind,
        hops: u32,
        latency: u64,
        hit: bool,
    },
    NotFound(NotFoundReason),
}

/// One interest (one chunk of one request) and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterestRecord {
    pub id: u64,
    pub request: u64,
    pub time: u64,
    pub requester: String,
    pub name: String,
    pub chunk: u32,
    pub outcome: Outcome,
}

impl InterestRecord {
    pub fn hops(&self) -> Option<u32> {
        match self.outcome {
            Outcome::Served { hops, .. } => Some(hops),
            Outcome::NotFound(_) => None,
        }
    }
}

/// Per-request view: all chunks of one named content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestSummary {
    pub request: u64,
    pub requester: String,
    pub name: String,
    pub chunks: usize,
    pub complete: bool,
    /// Largest hop count over the served chunks.
    pub hops: u32,
    /// Sum of per-chunk latencies; chunks are fetched one after another.
    pub latency: u64,
    pub served_from: Vec<String>,
    pub served_kinds: Vec<NodeKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub interests: Vec<InterestRecord>,
    pub integrity_failures: u64,
}

impl Metrics {
    pub fn hits(&self) -> usize {
        self.interests
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::Served { hit: true, .. }))
            .count()
    }

    pub fn served(&self) -> usize {
        self.interests
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::Served { .. }))
            .count()
    }

    pub fn not_found(&self) -> usize {
        self.interests.len() - self.served()
    }

    /// Cache hits over all interests.
    pub fn hit_ratio(&self) -> f64 {
        if self.interests.is_empty() {
            0.0
        } else {
            self.hits() as f64 / self.interests.len() as f64
        }
    }

    pub fn requests(&self) -> Vec<RequestSummary> {
        let mut out: BTreeMap<u64, RequestSummary> = BTreeMap::new();
        for r in &self.interests {
            let s = out.entry(r.request).or_insert_with(|| RequestSummary {
                request: r.request,
                requester: r.requester.clone(),
                name: r.name.clone(),
                chunks: 0,
                complete: true,
                hops: 0,
                latency: 0,
                served_from: Vec::new(),
                served_kinds: Vec::new(),
            });
            s.chunks += 1;
            match &r.outcome {
                Outcome::Served {
                    from,
                    kind,
                    hops,
                    latency,
                    ..
                } => {
                    s.hops = s.hops.max(*hops);
                    s.latency += latency;
                    if !s.served_from.contains(from) {
                        s.served_from.push(from.clone());
                        s.served_kinds.push(*kind);
                    }
                }
                Outcome::NotFound(_) => s.complete = false,
            }
        }
        out.into_values().collect()
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "interests={} served={} not_found={} hits={} hit_ratio={:.4} integrity_failures={}",
            self.interests.len(),
            self.served(),
            self.not_found(),
            self.hits(),
            self.hit_ratio(),
            self.integrity_failures
        )?;
        for r in self.requests() {
            writeln!(
                f,
                "request={} node={} name={} chunks={} complete={} hops={} latency={} served_from={}",
                r.request,
                r.requester,
                r.name,
                r.chunks,
                r.complete,
                r.hops,
                r.latency,
                r.served_from.join(",")
            )?;
        }
        Ok(())
    }
}

/// One line of the event log: `<time> <kind> key=value ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub time: u64,
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl LogRecord {
    fn new(time: u64, kind: &str) -> Self {
        LogRecord {
            time,
            kind: kind.to_string(),
            fields: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.time, self.kind)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for LogRecord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut toks = s.split_whitespace();
        let time = toks
            .next()
            .ok_or("empty record")?
            .parse()
            .map_err(|_| "bad time".to_string())?;
        let kind = toks.next().ok_or("missing kind")?.to_string();
        let fields = toks
            .map(|t| {
                t.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| format!("bad field {t:?}"))
            })
            .collect::<Result<_, _>>()?;
        Ok(LogRecord { time, kind, fields })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
}

impl EventLog {
    fn push(&mut self, r: LogRecord) {
        self.records.push(r);
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a LogRecord> + 'a {
        self.records.iter().filter(move |r| r.kind == kind)
    }
}

impl fmt::Display for EventLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("log line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("interest {0} has no outcome")]
    Lost(u64),
    #[error("interest {0} has more than one outcome")]
    Duplicate(u64),
    #[error("outcome for unknown interest {0}")]
    Orphan(u64),
}

/// Recomputes metrics from a textual event log.
pub fn replay(text: &str) -> Result<Metrics, ReplayError> {
    let mut pending: BTreeMap<u64, (InterestRecord, bool)> = BTreeMap::new();
    let mut integrity_failures = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| ReplayError::Malformed { line: i + 1, message };
        let r: LogRecord = line.parse().map_err(bad)?;
        let field = |k: &str| r.get(k).ok_or_else(|| bad(format!("missing {k}")));
        let num = |k: &str| -> Result<u64, ReplayError> {
            field(k)?.parse().map_err(|_| bad(format!("bad {k}")))
        };
        match r.kind.as_str() {
            "interest" => {
                let id = num("id")?;
                let rec = InterestRecord {
                    id,
                    request: num("req")?,
                    time: r.time,
                    requester: field("node")?.to_string(),
                    name: field("name")?.to_string(),
                    chunk: num("chunk")? as u32,
                    outcome: Outcome::NotFound(NotFoundReason::Unreachable),
                };
                if pending.insert(id, (rec, false)).is_some() {
                    return Err(bad(format!("interest {id} issued twice")));
                }
            }
            "served" | "not-found" => {
                let id = num("id")?;
                let (rec, done) = pending.get_mut(&id).ok_or(ReplayError::Orphan(id))?;
                if *done {
                    return Err(ReplayError::Duplicate(id));
                }
                *done = true;
                rec.outcome = if r.kind == "served" {
                    Outcome::Served {
                        from: field("from")?.to_string(),
                        kind: field("kind")?.parse().map_err(bad)?,
                        hops: num("hops")? as u32,
                        latency: num("latency")?,
                        hit: field("hit")? == "true",
                    }
                } else {
                    Outcome::NotFound(field("reason")?.parse().map_err(bad)?)
                };
            }
            "integrity" => integrity_failures += 1,
            _ => {}
        }
    }
    let mut interests = Vec::with_capacity(pending.len());
    for (id, (rec, done)) in pending {
        if !done {
            return Err(ReplayError::Lost(id));
        }
        interests.push(rec);
    }
    Ok(Metrics {
        interests,
        integrity_failures,
    })
}

struct SimNode {
    id: String,
    kind: NodeKind,
    store: ContentStore,
}

struct Content {
    origin: usize,
    category: DataCategory,
    chunks: Vec<Vec<u8>>,
    /// Directory hash of each chunk.
    digests: Vec<Digest>,
}

enum Event {
    Action(Action),
    Interest {
        id: u64,
        issued: u64,
    },
    Delivery {
        id: u64,
        issued: u64,
        holder: usize,
        path: Vec<usize>,
        bytes: Vec<u8>,
    },
}

struct Pending {
    request: u64,
    requester: usize,
    name: String,
    chunk: u32,
    excluded: BTreeSet<usize>,
}

struct Route {
    holder: usize,
    /// From holder to requester, both included.
    path: Vec<usize>,
    latency: u64,
}

pub struct Simulation {
    nodes: Vec<SimNode>,
    index: BTreeMap<String, usize>,
    links: BTreeMap<usize, BTreeMap<usize, u64>>,
    contents: BTreeMap<String, Content>,
    hop_budget: u32,
    rng: ChaCha20Rng,
    now: u64,
    seq: u64,
    queue: BinaryHeap<Reverse<(u64, u64)>>,
    events: BTreeMap<u64, Event>,
    next_request: u64,
    next_interest: u64,
    pending: BTreeMap<u64, Pending>,
    records: BTreeMap<u64, InterestRecord>,
    integrity_failures: u64,
    log: EventLog,
}

/// Result of running a scenario to completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutput {
    pub metrics: Metrics,
    pub log: EventLog,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimOutput, ConfigError> {
    let mut sim = Simulation::new(cfg)?;
    sim.run();
    Ok(sim.finish())
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig) -> Result<Simulation, ConfigError> {
        cfg.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        let nodes: Vec<SimNode> = cfg
            .nodes
            .iter()
            .map(|n| SimNode {
                id: n.id.clone(),
                kind: n.kind,
                store: ContentStore::new(n.capacity),
            })
            .collect();
        let index: BTreeMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        let mut links: BTreeMap<usize, BTreeMap<usize, u64>> = BTreeMap::new();
        for l in &cfg.links {
            let (a, b) = (index[&l.a], index[&l.b]);
            links.entry(a).or_default().insert(b, l.latency);
            links.entry(b).or_default().insert(a, l.latency);
        }
        let mut contents = BTreeMap::new();
        for c in &cfg.contents {
            let mut bytes = vec![0u8; c.size];
            rng.fill_bytes(&mut bytes);
            let chunks: Vec<Vec<u8>> = if bytes.is_empty() {
                vec![Vec::new()]
            } else {
                bytes.chunks(c.chunk_size).map(<[u8]>::to_vec).collect()
            };
            let digests = chunks.iter().map(|c| digest(c)).collect();
            contents.insert(
                c.name.clone(),
                Content {
                    origin: index[&c.origin],
                    category: c.category,
                    chunks,
                    digests,
                },
            );
        }
        let mut sim = Simulation {
            nodes,
            index,
            links,
            contents,
            hop_budget: cfg.hop_budget,
            rng,
            now: 0,
            seq: 0,
            queue: BinaryHeap::new(),
            events: BTreeMap::new(),
            next_request: 1,
            next_interest: 1,
            pending: BTreeMap::new(),
            records: BTreeMap::new(),
            integrity_failures: 0,
            log: EventLog::default(),
        };
        for (node, name) in cfg.all_pins() {
            let n = sim.index[node];
            let content = &sim.contents[name];
            for (i, bytes) in content.chunks.iter().enumerate() {
                let key = ChunkKey::new(name, i as u32);
                sim.nodes[n]
                    .store
                    .insert(key, bytes.clone(), content.digests[i], true)
                    .map_err(|_| ConfigError::PinDoesNotFit {
                        node: node.to_string(),
                        name: name.to_string(),
                    })?;
                sim.log.push(
                    LogRecord::new(0, "pin")
                        .with("node", node)
                        .with("name", name)
                        .with("chunk", i),
                );
            }
        }
        for s in &cfg.schedule {
            sim.schedule(s.time, Event::Action(s.action.clone()));
        }
        Ok(sim)
    }

    fn schedule(&mut self, time: u64, e: Event) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse((time, seq)));
        self.events.insert(seq, e);
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    /// Processes events until the queue is empty.
    pub fn run(&mut self) {
        while let Some(Reverse((time, seq))) = self.queue.pop() {
            self.now = time;
            let e = self.events.remove(&seq).expect("scheduled event");
            self.handle(e);
        }
    }

    /// Issues a request now and runs to quiescence; returns the interests it
    /// produced.
    pub fn submit_interest(&mut self, requester: &str, name: &str) -> Result<Vec<InterestRecord>, ConfigError> {
        if !self.index.contains_key(requester) {
            return Err(ConfigError::UnknownNode(requester.to_string()));
        }
        let first = self.next_interest;
        self.schedule(
            self.now,
            Event::Action(Action::Request {
                node: requester.to_string(),
                name: name.to_string(),
            }),
        );
        self.run();
        Ok(self.records.range(first..).map(|(_, r)| r.clone()).collect())
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            interests: self.records.values().cloned().collect(),
            integrity_failures: self.integrity_failures,
        }
    }

    pub fn finish(self) -> SimOutput {
        SimOutput {
            metrics: self.metrics(),
            log: self.log,
        }
    }

    /// Read access to a node's content store.
    pub fn store(&self, node: &str) -> Option<&ContentStore> {
        self.index.get(node).map(|&i| &self.nodes[i].store)
    }

    fn handle(&mut self, e: Event) {
        match e {
            Event::Action(Action::Request { node, name }) => self.request(&node, &name),
            Event::Action(Action::Corrupt { node, name, chunk }) => {
                let position = self.rng.gen::<u32>() as usize;
                let bit = self.rng.gen_range(0..8u8);
                let n = self.index[&node];
                let applied = self.nodes[n].store.corrupt(&ChunkKey::new(&name, chunk), position, bit);
                self.log.push(
                    LogRecord::new(self.now, "corrupt")
                        .with("node", &node)
                        .with("name", &name)
                        .with("chunk", chunk)
                        .with("applied", applied),
                );
            }
            Event::Action(Action::Relink { node, to, latency }) => {
                let n = self.index[&node];
                if let Some(old) = self.links.remove(&n) {
                    for m in old.keys() {
                        if let Some(l) = self.links.get_mut(m) {
                            l.remove(&n);
                        }
                    }
                }
                for t in &to {
                    let m = self.index[t];
                    self.links.entry(n).or_default().insert(m, latency);
                    self.links.entry(m).or_default().insert(n, latency);
                }
                self.log.push(
                    LogRecord::new(self.now, "relink")
                        .with("node", &node)
                        .with("to", if to.is_empty() { "-".to_string() } else { to.join(",") })
                        .with("latency", latency),
                );
            }
            Event::Interest { id, issued } => self.interest(id, issued),
            Event::Delivery {
                id,
                issued,
                holder,
                path,
                bytes,
            } => self.deliver(id, issued, holder, path, bytes),
        }
    }

    fn request(&mut self, node: &str, name: &str) {
        let req = self.next_request;
        self.next_request += 1;
        let chunks = self.contents.get(name).map(|c| c.chunks.len()).unwrap_or(0);
        self.log.push(
            LogRecord::new(self.now, "request")
                .with("req", req)
                .with("node", node)
                .with("name", name)
                .with("chunks", chunks),
        );
        self.issue(req, self.index[node], name, 0);
    }

    fn issue(&mut self, request: u64, requester: usize, name: &str, chunk: u32) {
        let id = self.next_interest;
        self.next_interest += 1;
        self.log.push(
            LogRecord::new(self.now, "interest")
                .with("id", id)
                .with("req", request)
                .with("node", &self.nodes[requester].id)
                .with("name", name)
                .with("chunk", chunk),
        );
        self.pending.insert(
            id,
            Pending {
                request,
                requester,
                name: name.to_string(),
                chunk,
                excluded: BTreeSet::new(),
            },
        );
        self.interest(id, self.now);
    }

    fn interest(&mut self, id: u64, issued: u64) {
        let p = &self.pending[&id];
        let Some(content) = self.contents.get(&p.name) else {
            return self.not_found(id, issued, NotFoundReason::UnknownName);
        };
        let key = ChunkKey::new(&p.name, p.chunk);
        let mut holders = vec![content.origin];
        if dispatch_protection(content.category).cacheable() {
            holders.extend((0..self.nodes.len()).filter(|&n| self.nodes[n].store.contains(&key)));
        }
        holders.retain(|h| !p.excluded.contains(h));
        let Some(route) = self.nearest(p.requester, &holders) else {
            return self.not_found(id, issued, NotFoundReason::Unreachable);
        };
        if route.path.len() as u32 - 1 > self.hop_budget {
            return self.not_found(id, issued, NotFoundReason::HopBudget);
        }
        let bytes = if route.holder == content.origin {
            content.chunks[p.chunk as usize].clone()
        } else {
            self.nodes[route.holder]
                .store
                .get(&key)
                .expect("holder has the chunk")
                .bytes
                .clone()
        };
        self.schedule(
            self.now + route.latency,
            Event::Delivery {
                id,
                issued,
                holder: route.holder,
                path: route.path,
                bytes,
            },
        );
    }

    fn deliver(&mut self, id: u64, issued: u64, holder: usize, path: Vec<usize>, bytes: Vec<u8>) {
        let p = &self.pending[&id];
        let (name, chunk, requester, request) = (p.name.clone(), p.chunk, p.requester, p.request);
        let content = &self.contents[&name];
        let expected = content.digests[chunk as usize];
        let origin = content.origin;
        let chunks = content.chunks.len() as u32;
        let protection = dispatch_protection(content.category);
        let intact = digest(&bytes) == expected;
        let key = ChunkKey::new(&name, chunk);

        if protection.cacheable() {
            for &n in &path[1..] {
                if self.nodes[n].store.capacity() == 0 || self.nodes[n].store.contains(&key) {
                    continue;
                }
                if !intact {
                    self.log.push(self.cache_record("cache-reject", n, &key));
                    continue;
                }
                if let Ok(evicted) = self.nodes[n].store.insert(key.clone(), bytes.clone(), expected, false) {
                    for v in evicted {
                        self.log.push(self.cache_record("cache-evict", n, &v));
                    }
                    self.log.push(self.cache_record("cache-store", n, &key));
                }
            }
        }

        if !intact {
            self.integrity_failures += 1;
            self.nodes[holder].store.remove(&key);
            self.log.push(
                LogRecord::new(self.now, "integrity")
                    .with("id", id)
                    .with("holder", &self.nodes[holder].id)
                    .with("name", &name)
                    .with("chunk", chunk),
            );
            self.pending.get_mut(&id).expect("pending").excluded.insert(holder);
            self.schedule(self.now, Event::Interest { id, issued });
            return;
        }

        let hops = path.len() as u32 - 1;
        let outcome = Outcome::Served {
            from: self.nodes[holder].id.clone(),
            kind: self.nodes[holder].kind,
            hops,
            latency: self.now - issued,
            hit: holder != origin,
        };
        let mut rec = LogRecord::new(self.now, "served")
            .with("id", id)
            .with("req", request)
            .with("node", &self.nodes[requester].id)
            .with("name", &name)
            .with("chunk", chunk)
            .with("from", &self.nodes[holder].id)
            .with("kind", self.nodes[holder].kind)
            .with("hops", hops)
            .with("latency", self.now - issued)
            .with("hit", holder != origin)
            .with("protection", protection);
        rec = rec.with(
            "path",
            path.iter().map(|&n| self.nodes[n].id.as_str()).collect::<Vec<_>>().join(","),
        );
        self.log.push(rec);
        self.complete(id, issued, outcome);
        if chunk + 1 < chunks {
            self.issue(request, requester, &name, chunk + 1);
        }
    }

    fn cache_record(&self, kind: &str, node: usize, key: &ChunkKey) -> LogRecord {
        LogRecord::new(self.now, kind)
            .with("node", &self.nodes[node].id)
            .with("name", &key.name)
            .with("chunk", key.chunk)
    }

    fn not_found(&mut self, id: u64, issued: u64, reason: NotFoundReason) {
        let p = &self.pending[&id];
        self.log.push(
            LogRecord::new(self.now, "not-found")
                .with("id", id)
                .with("req", p.request)
                .with("node", &self.nodes[p.requester].id)
                .with("name", &p.name)
                .with("chunk", p.chunk)
                .with("reason", reason.name()),
        );
        self.complete(id, issued, Outcome::NotFound(reason));
    }

    fn complete(&mut self, id: u64, issued: u64, outcome: Outcome) {
        let p = self.pending.remove(&id).expect("pending");
        self.records.insert(
            id,
            InterestRecord {
                id,
                request: p.request,
                time: issued,
                requester: self.nodes[p.requester].id.clone(),
                name: p.name,
                chunk: p.chunk,
                outcome,
            },
        );
    }

    /// Latency-weighted shortest path from `from` to the closest holder; ties
    /// go to fewer hops, then the smaller node id.
    fn nearest(&self, from: usize, holders: &[usize]) -> Option<Route> {
        type Dist = (u64, u32);
        let mut best: BTreeMap<usize, (Dist, Option<usize>)> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        best.insert(from, ((0, 0), None));
        heap.push(Reverse(((0u64, 0u32), self.nodes[from].id.clone(), from)));
        let mut done = BTreeSet::new();
        while let Some(Reverse((d, _, n))) = heap.pop() {
            if !done.insert(n) {
                continue;
            }
            for (&m, &lat) in self.links.get(&n).into_iter().flatten() {
                let nd = (d.0 + lat, d.1 + 1);
                let better = match best.get(&m) {
                    None => true,
                    Some((old, Some(prev))) => {
                        nd < *old || (nd == *old && self.nodes[n].id < self.nodes[*prev].id)
                    }
                    Some((_, None)) => false,
                };
                if better && !done.contains(&m) {
                    best.insert(m, (nd, Some(n)));
                    heap.push(Reverse((nd, self.nodes[m].id.clone(), m)));
                }
            }
        }
        let holder = holders
            .iter()
            .filter_map(|&h| best.get(&h).map(|(d, _)| (*d, self.nodes[h].id.as_str(), h)))
            .min()?
            .2;
        let mut path = vec![holder];
        let mut cur = holder;
        while let Some((_, Some(prev))) = best.get(&cur) {
            path.push(*prev);
            cur = *prev;
        }
        Some(Route {
            holder,
            latency: best[&holder].0 .0,
            path,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::fixed_line;

    #[test]
    fn line_topology_caching() {
        let out = run_scenario(&fixed_line(4096, 1)).unwrap();
        let reqs = out.metrics.requests();
        assert_eq!(reqs.len(), 2);
        assert_eq!((reqs[0].hops, reqs[0].latency), (3, 30));
        assert_eq!(reqs[0].served_kinds, vec![NodeKind::AuthorityServer]);
        assert_eq!(reqs[1].hops, 1);
        assert_eq!(reqs[1].served_from, vec!["rsu2".to_string()]);
        assert_eq!(out.metrics.hit_ratio(), 0.5);
    }

    #[test]
    fn no_cache_no_gain() {
        let out = run_scenario(&fixed_line(0, 1)).unwrap();
        let reqs = out.metrics.requests();
        assert_eq!(reqs[0].hops, reqs[1].hops);
        assert_eq!(out.metrics.hits(), 0);
    }

    #[test]
    fn deterministic_and_replayable() {
        let cfg = fixed_line(4096, 9);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a.log.to_text(), b.log.to_text());
        assert_eq!(replay(&a.log.to_text()).unwrap(), a.metrics);
    }

    #[test]
    fn corrupted_cache_falls_back() {
        let mut cfg = fixed_line(4096, 2);
        cfg.schedule.insert(
            1,
            crate::sim::config::Scheduled {
                time: 50,
                action: Action::Corrupt {
                    node: "rsu2".into(),
                    name: "news.mp4".into(),
                    chunk: 0,
                },
            },
        );
        let out = run_scenario(&cfg).unwrap();
        assert_eq!(out.metrics.integrity_failures, 1);
        let second = &out.metrics.requests()[1];
        assert!(second.complete);
        assert_eq!(second.served_from, vec!["rsu1".to_string()]);
        assert_eq!(second.hops, 2);
        assert_eq!(replay(&out.log.to_text()).unwrap(), out.metrics);
    }

    #[test]
    fn unknown_name_and_private_data() {
        let mut cfg = fixed_line(4096, 0);
        cfg.contents[0].category = DataCategory::PrivateInfotainment;
        let mut sim = Simulation::new(&cfg).unwrap();
        sim.run();
        let m = sim.metrics();
        assert_eq!(m.hits(), 0);
        assert!(sim.store("rsu2").unwrap().is_empty());
        let delta = sim.submit_interest("car2", "nothing.mp4").unwrap();
        assert_eq!(delta.len(), 1);
        assert_eq!(delta[0].outcome, Outcome::NotFound(NotFoundReason::UnknownName));
    }

    #[test]
    fn relink_changes_routes() {
        let mut cfg = fixed_line(4096, 0);
        cfg.schedule = vec![
            crate::sim::config::Scheduled {
                time: 0,
                action: Action::Relink {
                    node: "car2".into(),
                    to: vec!["server".into()],
                    latency: 10,
                },
            },
            crate::sim::config::Scheduled {
                time: 1,
                action: Action::Request {
                    node: "car2".into(),
                    name: "news.mp4".into(),
                },
            },
        ];
        let out = run_scenario(&cfg).unwrap();
        assert_eq!(out.metrics.requests()[0].hops, 1);
    }
}
