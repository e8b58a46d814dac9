//! Line-oriented scenario files.
//!
//! ```text
//! seed 7
//! latency 10
//! hop-budget 8
//! node server authority-server capacity=0
//! node rsu1 rsu capacity=65536
//! node car1 vehicle
//! link server rsu1 latency=10
//! link rsu1 car1
//! content news.mp4 origin=server size=4096 chunk=1024 category=public-infotainment default
//! pin rsu1 news.mp4
//! at 0 request car1 news.mp4
//! at 5 corrupt rsu1 news.mp4 0
//! at 9 relink car1 rsu1 latency=20
//! ```
//!
//! `#` starts a comment. Capacities and sizes are bytes, latencies and times
//! milliseconds. A `default` content item is pinned on every RSU at start.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::DataCategory;

pub const DEFAULT_LATENCY_MS: u64 = 10;
pub const DEFAULT_HOP_BUDGET: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown content {0:?}")]
    UnknownContent(String),
    #[error("duplicate {what} {name:?}")]
    Duplicate { what: &'static str, name: String },
    #[error("topology is disconnected: {0:?} is unreachable from {1:?}")]
    Disconnected(String, String),
    #[error("{node:?} cannot hold pinned content {name:?}")]
    PinDoesNotFit { node: String, name: String },
    #[error("content {0:?} has chunk size 0")]
    ChunkSize(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    AuthorityServer,
    ThirdPartyServer,
    Rsu,
    Vehicle,
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::AuthorityServer => "authority-server",
            NodeKind::ThirdPartyServer => "third-party-server",
            NodeKind::Rsu => "rsu",
            NodeKind::Vehicle => "vehicle",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            NodeKind::AuthorityServer,
            NodeKind::ThirdPartyServer,
            NodeKind::Rsu,
            NodeKind::Vehicle,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown node kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub id: String,
    pub kind: NodeKind,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpec {
    pub a: String,
    pub b: String,
    pub latency: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentSpec {
    pub name: String,
    pub origin: String,
    pub size: usize,
    pub chunk_size: usize,
    pub category: DataCategory,
    /// Auto-downloaded to every RSU.
    pub default: bool,
}

impl ContentSpec {
    pub fn chunks(&self) -> u32 {
        self.size.div_ceil(self.chunk_size).max(1) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Request { node: String, name: String },
    Corrupt { node: String, name: String, chunk: u32 },
    /// Replaces all links of `node` with links to `to`.
    Relink { node: String, to: Vec<String>, latency: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheduled {
    pub time: u64,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub latency: u64,
    pub hop_budget: u32,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub contents: Vec<ContentSpec>,
    pub pins: Vec<(String, String)>,
    pub schedule: Vec<Scheduled>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            latency: DEFAULT_LATENCY_MS,
            hop_budget: DEFAULT_HOP_BUDGET,
            nodes: Vec::new(),
            links: Vec::new(),
            contents: Vec::new(),
            pins: Vec::new(),
            schedule: Vec::new(),
        }
    }
}

/// `server - rsu1 - rsu2 - car1 - car2` with 10 ms links, one 1 KiB public
/// infotainment file on the server, RSU caches of `rsu_capacity` bytes and
/// cache-less vehicles. car1 requests the file twice.
pub fn fixed_line(rsu_capacity: usize, seed: u64) -> ScenarioConfig {
    let node = |id: &str, kind, capacity| NodeSpec {
        id: id.into(),
        kind,
        capacity,
    };
    let link = |a: &str, b: &str| LinkSpec {
        a: a.into(),
        b: b.into(),
        latency: DEFAULT_LATENCY_MS,
    };
    let request = |time| Scheduled {
        time,
        action: Action::Request {
            node: "car1".into(),
            name: "news.mp4".into(),
        },
    };
    ScenarioConfig {
        seed,
        nodes: vec![
            node("server", NodeKind::AuthorityServer, 0),
            node("rsu1", NodeKind::Rsu, rsu_capacity),
            node("rsu2", NodeKind::Rsu, rsu_capacity),
            node("car1", NodeKind::Vehicle, 0),
            node("car2", NodeKind::Vehicle, 0),
        ],
        links: vec![
            link("server", "rsu1"),
            link("rsu1", "rsu2"),
            link("rsu2", "car1"),
            link("car1", "car2"),
        ],
        contents: vec![ContentSpec {
            name: "news.mp4".into(),
            origin: "server".into(),
            size: 1024,
            chunk_size: 1024,
            category: DataCategory::PublicInfotainment,
            default: false,
        }],
        schedule: vec![request(0), request(100)],
        ..ScenarioConfig::default()
    }
}

impl ScenarioConfig {
    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn content(&self, name: &str) -> Option<&ContentSpec> {
        self.contents.iter().find(|c| c.name == name)
    }

    /// Checks references, uniqueness, pin sizes and connectivity.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(ConfigError::Duplicate {
                    what: "node",
                    name: n.id.clone(),
                });
            }
        }
        let known = |id: &str| {
            if ids.contains(id) {
                Ok(())
            } else {
                Err(ConfigError::UnknownNode(id.to_string()))
            }
        };
        for l in &self.links {
            known(&l.a)?;
            known(&l.b)?;
        }
        let mut names = BTreeSet::new();
        for c in &self.contents {
            known(&c.origin)?;
            if c.chunk_size == 0 {
                return Err(ConfigError::ChunkSize(c.name.clone()));
            }
            if !names.insert(c.name.as_str()) {
                return Err(ConfigError::Duplicate {
                    what: "content",
                    name: c.name.clone(),
                });
            }
        }
        let mut pinned: BTreeMap<&str, usize> = BTreeMap::new();
        for (node, name) in self.all_pins() {
            known(node)?;
            let c = self
                .content(name)
                .ok_or_else(|| ConfigError::UnknownContent(name.to_string()))?;
            let total = pinned.entry(node).or_default();
            *total += c.size;
            if *total > self.node(node).expect("checked").capacity {
                return Err(ConfigError::PinDoesNotFit {
                    node: node.to_string(),
                    name: name.to_string(),
                });
            }
        }
        for s in &self.schedule {
            match &s.action {
                Action::Request { node, .. } | Action::Corrupt { node, .. } => known(node)?,
                Action::Relink { node, to, .. } => {
                    known(node)?;
                    for t in to {
                        known(t)?;
                    }
                }
            }
        }
        self.check_connected()
    }

    /// Explicit pins followed by `default` items on every RSU, deduplicated.
    pub fn all_pins(&self) -> Vec<(&str, &str)> {
        let mut out: Vec<(&str, &str)> = self.pins.iter().map(|(n, c)| (n.as_str(), c.as_str())).collect();
        for c in self.contents.iter().filter(|c| c.default) {
            for n in self.nodes.iter().filter(|n| n.kind == NodeKind::Rsu) {
                out.push((n.id.as_str(), c.name.as_str()));
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|p| seen.insert(*p));
        out
    }

    fn check_connected(&self) -> Result<(), ConfigError> {
        let Some(first) = self.nodes.first() else {
            return Ok(());
        };
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for l in &self.links {
            adj.entry(&l.a).or_default().push(&l.b);
            adj.entry(&l.b).or_default().push(&l.a);
        }
        let mut seen = BTreeSet::from([first.id.as_str()]);
        let mut stack = vec![first.id.as_str()];
        while let Some(n) = stack.pop() {
            for m in adj.get(n).into_iter().flatten() {
                if seen.insert(m) {
                    stack.push(m);
                }
            }
        }
        match self.nodes.iter().find(|n| !seen.contains(n.id.as_str())) {
            Some(n) => Err(ConfigError::Disconnected(n.id.clone(), first.id.clone())),
            None => Ok(()),
        }
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let cfg = parse_unchecked(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for ScenarioConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioConfig::parse(s)
    }
}

struct Line<'a> {
    number: usize,
    positional: Vec<&'a str>,
    options: BTreeMap<&'a str, &'a str>,
    flags: BTreeSet<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Syntax {
            line: self.number,
            message: message.into(),
        }
    }

    fn arg(&self, i: usize, what: &str) -> Result<&'a str, ConfigError> {
        self.positional
            .get(i)
            .copied()
            .ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn number<T: FromStr>(&self, text: &str, what: &str) -> Result<T, ConfigError> {
        text.parse()
            .map_err(|_| self.err(format!("{what} must be a non-negative integer, got {text:?}")))
    }

    fn option<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T, ConfigError> {
        match (self.options.get(key), default) {
            (Some(v), _) => self.number(v, key),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.err(format!("missing {key}="))),
        }
    }

    fn expect_len(&self, n: usize) -> Result<(), ConfigError> {
        if self.positional.len() > n {
            return Err(self.err(format!("unexpected {:?}", self.positional[n])));
        }
        Ok(())
    }

    fn only(&self, options: &[&str], flags: &[&str]) -> Result<(), ConfigError> {
        if let Some(k) = self.options.keys().find(|k| !options.contains(k)) {
            return Err(self.err(format!("unknown option {k}=")));
        }
        if let Some(f) = self.flags.iter().find(|f| !flags.contains(f)) {
            return Err(self.err(format!("unknown flag {f}")));
        }
        Ok(())
    }
}

fn split(number: usize, text: &str) -> Option<Line<'_>> {
    let text = text.split('#').next().unwrap_or("").trim();
    if text.is_empty() {
        return None;
    }
    let mut line = Line {
        number,
        positional: Vec::new(),
        options: BTreeMap::new(),
        flags: BTreeSet::new(),
    };
    for tok in text.split_whitespace() {
        match tok.split_once('=') {
            Some((k, v)) => {
                line.options.insert(k, v);
            }
            None => line.positional.push(tok),
        }
    }
    Some(line)
}

fn parse_unchecked(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut deferred_links = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let Some(mut line) = split(i + 1, raw) else {
            continue;
        };
        let keyword = line.positional.remove(0);
        match keyword {
            "seed" | "latency" | "hop-budget" => {
                line.only(&[], &[])?;
                let v = line.arg(0, "value")?;
                line.expect_len(1)?;
                match keyword {
                    "seed" => cfg.seed = line.number(v, "seed")?,
                    "latency" => cfg.latency = line.number(v, "latency")?,
                    _ => cfg.hop_budget = line.number(v, "hop-budget")?,
                }
            }
            "node" => {
                line.only(&["capacity"], &[])?;
                let id = line.arg(0, "node id")?;
                let kind = line.arg(1, "node kind")?.parse().map_err(|e: String| line.err(e))?;
                line.expect_len(2)?;
                cfg.nodes.push(NodeSpec {
                    id: id.into(),
                    kind,
                    capacity: line.option("capacity", Some(0))?,
                });
            }
            "link" => {
                line.only(&["latency"], &[])?;
                let a = line.arg(0, "first endpoint")?;
                let b = line.arg(1, "second endpoint")?;
                line.expect_len(2)?;
                let latency: Option<u64> = line.options.get("latency").map(|v| line.number(v, "latency")).transpose()?;
                deferred_links.push((a.to_string(), b.to_string(), latency));
            }
            "content" => {
                let extra: Vec<&str> = line.positional.drain(1.min(line.positional.len())..).collect();
                line.flags.extend(extra);
                line.only(&["origin", "size", "chunk", "category"], &["default"])?;
                let name = line.arg(0, "content name")?;
                line.expect_len(1)?;
                let origin = line
                    .options
                    .get("origin")
                    .ok_or_else(|| line.err("missing origin="))?;
                let category = line
                    .options
                    .get("category")
                    .ok_or_else(|| line.err("missing category="))?
                    .parse()
                    .map_err(|e: String| line.err(e))?;
                let size = line.option("size", None)?;
                cfg.contents.push(ContentSpec {
                    name: name.into(),
                    origin: origin.to_string(),
                    size,
                    chunk_size: line.option("chunk", Some(crate::envelope::DEFAULT_CHUNK_SIZE))?,
                    category,
                    default: line.flags.contains("default"),
                });
            }
            "pin" => {
                line.only(&[], &[])?;
                let node = line.arg(0, "node")?;
                let name = line.arg(1, "content name")?;
                line.expect_len(2)?;
                cfg.pins.push((node.into(), name.into()));
            }
            "at" => {
                let time = line.number(line.arg(0, "time")?, "time")?;
                let verb = line.arg(1, "action")?;
                let node = line.arg(2, "node")?.to_string();
                let action = match verb {
                    "request" => {
                        line.only(&[], &[])?;
                        let name = line.arg(3, "content name")?.into();
                        line.expect_len(4)?;
                        Action::Request { node, name }
                    }
                    "corrupt" => {
                        line.only(&[], &[])?;
                        let name = line.arg(3, "content name")?.into();
                        let chunk = line.number(line.arg(4, "chunk index")?, "chunk index")?;
                        line.expect_len(5)?;
                        Action::Corrupt { node, name, chunk }
                    }
                    "relink" => {
                        line.only(&["latency"], &[])?;
                        let to: Vec<String> = line.positional[3..].iter().map(|s| s.to_string()).collect();
                        let latency = line.option("latency", Some(cfg.latency))?;
                        Action::Relink { node, to, latency }
                    }
                    other => return Err(line.err(format!("unknown action {other:?}"))),
                };
                cfg.schedule.push(Scheduled { time, action });
            }
            other => return Err(line.err(format!("unknown keyword {other:?}"))),
        }
    }
    cfg.links = deferred_links
        .into_iter()
        .map(|(a, b, latency)| LinkSpec {
            a,
            b,
            latency: latency.unwrap_or(cfg.latency),
        })
        .collect();
    Ok(cfg)
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        writeln!(f, "latency {}", self.latency)?;
        writeln!(f, "hop-budget {}", self.hop_budget)?;
        for n in &self.nodes {
            writeln!(f, "node {} {} capacity={}", n.id, n.kind, n.capacity)?;
        }
        for l in &self.links {
            writeln!(f, "link {} {} latency={}", l.a, l.b, l.latency)?;
        }
        for c in &self.contents {
            write!(
                f,
                "content {} origin={} size={} chunk={} category={}",
                c.name, c.origin, c.size, c.chunk_size, c.category
            )?;
            if c.default {
                f.write_str(" default")?;
            }
            writeln!(f)?;
        }
        for (n, c) in &self.pins {
            writeln!(f, "pin {n} {c}")?;
        }
        for s in &self.schedule {
            match &s.action {
                Action::Request { node, name } => writeln!(f, "at {} request {node} {name}", s.time)?,
                Action::Corrupt { node, name, chunk } => {
                    writeln!(f, "at {} corrupt {node} {name} {chunk}", s.time)?
                }
                Action::Relink { node, to, latency } => {
                    writeln!(f, "at {} relink {node} {} latency={latency}", s.time, to.join(" "))?
                }
            }
        }
        Ok(())
    }
}
