use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use tsabe::envelope::{
    self, build_directory, verify_directory, ContentPackage, DirectoryEntry, EnvelopeError, KeyedDigestSigner,
    KeyedDigestTrust, SealParams, StreamDem, Verification,
};
use tsabe::group::{BilinearGroup, TransparentSuite};
use tsabe::lsss::{compile, parse_attribute_set, Attribute, Policy};
use tsabe::scheme::{
    self, decode_ciphertext, decode_master_key, decode_private_key, decode_public_params, encode_ciphertext,
    encode_master_key, encode_private_key, encode_public_params, BenchParams, DecryptError, Mode, PublicParams,
    Scheme, StepKind,
};
use tsabe::sim::{self, ScenarioConfig};
use tsabe::subscription::{derive_pseudo_id, Agent, PseudoIdentity, Revocation, RevocationLedger, Status};
use tsabe::time::{Calendar, Day, TimeCover, TimeNode};

use crate::{Cli, Command, SimCommand, TimeArgs};

pub const USAGE: i32 = 1;
pub const DENIED: i32 = 2;
pub const INTEGRITY: i32 = 3;
pub const VERIFICATION: i32 = 4;

/// Result of a command in both output styles.
#[derive(Debug, Default)]
pub struct Output {
    lines: Vec<String>,
    json: serde_json::Map<String, Value>,
}

impl Output {
    fn line(&mut self, l: impl Into<String>) -> &mut Self {
        self.lines.push(l.into());
        self
    }

    fn field(&mut self, k: &str, v: impl Into<Value>) -> &mut Self {
        self.json.insert(k.to_string(), v.into());
        self
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&Value::Object(self.json.clone())).expect("serializable");
            s.push('\n');
            s
        } else {
            self.lines.iter().map(|l| format!("{l}\n")).collect()
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// What to print on stdout alongside the error, if anything.
    pub output: Option<Output>,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
        output: None,
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    fail(USAGE, e.to_string())
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<Vec<u8>> {
    fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Res<()> {
    fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

struct Ctx {
    group: TransparentSuite,
    mode: Option<Mode>,
    rng: ChaCha20Rng,
}

impl Ctx {
    fn scheme(&self, recorded: Mode) -> Res<Scheme<TransparentSuite>> {
        match self.mode {
            Some(m) if m != recorded => Err(usage(format!(
                "--mode {m} does not match the artifacts, which were made in {recorded} mode"
            ))),
            _ => Ok(Scheme::new(self.group, recorded)),
        }
    }

    fn pk(&self, path: &Path) -> Res<PublicParams<TransparentSuite>> {
        decode_public_params(&self.group, &read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn day(text: &str) -> Res<Day> {
    Calendar::Gregorian.parse_day(text).map_err(usage)
}

fn cover(t: &TimeArgs) -> Res<(TimeCover, Option<Day>)> {
    let cal = Calendar::Gregorian;
    match (&t.window, &t.nodes) {
        (Some(w), None) => {
            let w = cal.parse_window(w).map_err(usage)?;
            Ok((cal.set_cover(&w).map_err(usage)?, Some(w.start)))
        }
        (None, Some(n)) => {
            let nodes = n
                .split(',')
                .map(|s| cal.parse_node(s.trim()))
                .collect::<Result<Vec<TimeNode>, _>>()
                .map_err(usage)?;
            Ok((cal.cover_from_nodes(nodes).map_err(usage)?, None))
        }
        _ => Err(usage("exactly one of --window or --nodes is required")),
    }
}

fn labels(c: &TimeCover) -> Vec<String> {
    c.nodes().iter().map(TimeNode::label).collect()
}

fn attrs(text: &str) -> Res<BTreeSet<Attribute>> {
    parse_attribute_set(text).map_err(usage)
}

fn pid(text: &str, modulus: u64) -> Res<PseudoIdentity> {
    PseudoIdentity::parse(text, modulus).map_err(usage)
}

fn load_ledger(path: &Path, create: bool) -> Res<RevocationLedger> {
    if create && !path.exists() {
        return Ok(RevocationLedger::new());
    }
    RevocationLedger::decode(&read(path)?).map_err(|e| fail(VERIFICATION, format!("{}: {e}", path.display())))
}

fn verified_ledger(path: &Path, create: bool) -> Res<RevocationLedger> {
    let ledger = load_ledger(path, create)?;
    ledger
        .verify()
        .map_err(|e| fail(VERIFICATION, format!("{}: {e}", path.display())))?;
    Ok(ledger)
}

pub fn run(cli: &Cli) -> Res<Output> {
    let g = &cli.global;
    let group = TransparentSuite::from_descriptor(&g.suite).map_err(|e| usage(format!("--suite: {e}")))?;
    let mode = g
        .mode
        .as_deref()
        .map(|m| m.parse::<Mode>().map_err(|e| usage(format!("--mode: {e}"))))
        .transpose()?;
    let mut ctx = Ctx {
        group,
        mode,
        rng: ChaCha20Rng::seed_from_u64(g.seed),
    };
    let mut out = Output::default();
    match &cli.command {
        Command::Setup {
            universe,
            depth,
            pk,
            mk,
        } => {
            let universe: Vec<Attribute> = universe
                .split(',')
                .map(|a| Attribute::new(a.trim()))
                .collect::<Result<_, _>>()
                .map_err(usage)?;
            let scheme = Scheme::new(group, ctx.mode.unwrap_or(Mode::Repaired));
            let (p, m) = scheme.setup(&universe, *depth, &mut ctx.rng).map_err(usage)?;
            write(pk, &encode_public_params(&group, &p))?;
            write(mk, &encode_master_key(&group, &m))?;
            let count = p.element_count();
            out.line(format!(
                "mode={} suite={} universe={} depth={} pk_source={} pk_target={}",
                scheme.mode(),
                group.suite_id(),
                universe.len(),
                depth,
                count.source,
                count.target
            ));
            out.field("mode", scheme.mode().to_string())
                .field("suite", group.suite_id())
                .field("universe", universe.len())
                .field("depth", *depth)
                .field("pk_source", count.source)
                .field("pk_target", count.target);
        }
        Command::Keygen {
            pk,
            mk,
            policy,
            time,
            id,
            pid: pid_text,
            user,
            nonce,
            out: path,
        } => {
            let p = ctx.pk(pk)?;
            let m = decode_master_key(&group, &read(mk)?).map_err(usage)?;
            let scheme = ctx.scheme(p.mode)?;
            let policy: Policy = policy.parse().map_err(usage)?;
            let (cover, start) = cover(time)?;
            let identity = match (id, pid_text, user) {
                (Some(v), None, None) => {
                    let s = group.scalar(*v);
                    if s.is_zero() {
                        return Err(usage("--id must be nonzero modulo the group order"));
                    }
                    PseudoIdentity::from_scalar(s)
                }
                (None, Some(t), None) => pid(t, group.order())?,
                (None, None, Some(u)) => {
                    let start = start.ok_or_else(|| usage("--user needs --window to fix the subscription start"))?;
                    let nonce = match nonce {
                        Some(h) => hex::decode(h).map_err(|e| usage(format!("--nonce: {e}")))?,
                        None => {
                            let mut n = vec![0u8; tsabe::subscription::NONCE_LEN];
                            ctx.rng.fill_bytes(&mut n);
                            n
                        }
                    };
                    derive_pseudo_id(u, &start, &nonce, group.order())
                }
                _ => return Err(usage("exactly one of --id, --pid or --user is required")),
            };
            let access = compile(&policy, group.order());
            let sk = scheme
                .keygen(&p, &m, identity.scalar(), &cover, &access, &mut ctx.rng)
                .map_err(usage)?;
            write(path, &encode_private_key(&group, &sk))?;
            let count = sk.element_count();
            out.line(format!("pid={identity}"))
                .line(format!("nodes={}", labels(&cover).join(",")))
                .line(format!(
                    "rows={} sk_source={} sk_target={}",
                    access.rows(),
                    count.source,
                    count.target
                ));
            out.field("pid", identity.to_string())
                .field("nodes", labels(&cover))
                .field("rows", access.rows())
                .field("sk_source", count.source)
                .field("sk_target", count.target);
        }
        Command::Encrypt {
            pk,
            attrs: a,
            time,
            message,
            out: path,
        } => {
            let p = ctx.pk(pk)?;
            let scheme = ctx.scheme(p.mode)?;
            let (cover, _) = cover(time)?;
            let msg = match message {
                Some(h) => {
                    let bytes = hex::decode(h).map_err(|e| usage(format!("--message: {e}")))?;
                    group.decode_target(&bytes).map_err(|e| usage(format!("--message: {e}")))?
                }
                None => group.random_target(&mut ctx.rng),
            };
            let ct = scheme
                .encrypt(&p, &msg, &cover, &attrs(a)?, &mut ctx.rng)
                .map_err(usage)?;
            write(path, &encode_ciphertext(&group, &ct))?;
            let count = ct.element_count();
            let m = hex::encode(group.encode_target(&msg));
            out.line(format!("message={m}"))
                .line(format!("nodes={}", labels(&cover).join(",")))
                .line(format!("ct_source={} ct_target={}", count.source, count.target));
            out.field("message", m)
                .field("nodes", labels(&cover))
                .field("ct_source", count.source)
                .field("ct_target", count.target);
        }
        Command::Decrypt { pk, sk, ct } => {
            let p = ctx.pk(pk)?;
            let scheme = ctx.scheme(p.mode)?;
            let k = decode_private_key(&group, &read(sk)?).map_err(usage)?;
            let c = decode_ciphertext(&group, &read(ct)?).map_err(usage)?;
            match scheme.decrypt_metered(&p, &c, &k) {
                Ok(d) => {
                    let m = hex::encode(group.encode_target(&d.message));
                    out.line(format!("message={m}")).line(format!(
                        "node={} rows_used={} pairings={}",
                        d.node.label(),
                        d.rows_used,
                        d.counters.pairings
                    ));
                    out.field("message", m)
                        .field("node", d.node.label())
                        .field("rows_used", d.rows_used)
                        .field("pairings", d.counters.pairings);
                }
                Err(DecryptError::Denied(why)) => return Err(fail(DENIED, format!("access denied: {why}"))),
                Err(DecryptError::Usage(e)) => return Err(usage(e)),
            }
        }
        Command::Cover { window } => {
            let cal = Calendar::Gregorian;
            let w = cal.parse_window(window).map_err(usage)?;
            let c = cal.set_cover(&w).map_err(usage)?;
            for l in labels(&c) {
                out.line(l);
            }
            out.field("window", w.to_string()).field("nodes", labels(&c));
        }
        Command::Audit { pk, sk, ct } => audit(&mut ctx, pk.as_deref(), sk.as_deref(), ct.as_deref(), &mut out)?,
        Command::Bench {
            universe,
            depth,
            rows,
            key_cover,
            ct_cover,
        } => {
            let scheme = Scheme::new(group, ctx.mode.unwrap_or(Mode::Repaired));
            let params = BenchParams {
                universe: *universe,
                depth: *depth,
                rows: *rows,
                key_cover: *key_cover,
                ct_cover: *ct_cover,
            };
            if params.universe == 0 || params.rows == 0 || params.key_cover == 0 || params.ct_cover == 0 {
                return Err(usage("--U, --l, --tk and --tc must be at least 1"));
            }
            let report = scheme::bench(&scheme, params, &mut ctx.rng).map_err(usage)?;
            for l in report.to_string().lines() {
                out.line(l);
            }
            let table: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "artifact": r.artifact,
                        "source": r.measured.source,
                        "target": r.measured.target,
                        "pairings": r.measured.pairings,
                        "predicted_source": r.predicted.source,
                        "predicted_target": r.predicted.target,
                        "predicted_pairings": r.predicted.pairings,
                        "match": r.matched,
                    })
                })
                .collect();
            out.field(
                "params",
                json!({"U": universe, "depth": depth, "l": params.rows, "tk": key_cover, "tc": ct_cover}),
            )
            .field("rows", table)
            .field("all_match", report.all_matched());
            if !report.all_matched() {
                return Err(Failure {
                    code: VERIFICATION,
                    message: "measured counts differ from the closed forms".into(),
                    output: Some(out),
                });
            }
        }
        Command::Seal {
            pk,
            input,
            name,
            attrs: a,
            time,
            chunk_size,
            out: path,
        } => {
            let p = ctx.pk(pk)?;
            let scheme = ctx.scheme(p.mode)?;
            let content = read(input)?;
            let (cover, _) = cover(time)?;
            let attributes = attrs(a)?;
            let name = name.clone().unwrap_or_else(|| {
                input
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let params = SealParams {
                name: &name,
                cover: &cover,
                attributes: &attributes,
                chunk_size: *chunk_size,
            };
            let pkg = envelope::seal(&scheme, &StreamDem, &p, &params, &content, &mut ctx.rng).map_err(usage)?;
            let bytes = pkg.encode(&group);
            write(path, &bytes)?;
            let digest = hex::encode(envelope::digest(&bytes));
            out.line(format!(
                "name={name} size={} chunks={} package_hash={digest}",
                content.len(),
                pkg.chunks.len()
            ));
            out.field("name", name)
                .field("size", content.len())
                .field("chunks", pkg.chunks.len())
                .field("package_hash", digest);
        }
        Command::Open {
            pk,
            sk,
            package,
            out: path,
        } => {
            let p = ctx.pk(pk)?;
            let scheme = ctx.scheme(p.mode)?;
            let k = decode_private_key(&group, &read(sk)?).map_err(usage)?;
            let pkg = ContentPackage::decode(&group, &read(package)?)
                .map_err(|e| fail(INTEGRITY, format!("{}: {e}", package.display())))?;
            let content = envelope::open(&scheme, &StreamDem, &p, &pkg, &k).map_err(|e| match e {
                EnvelopeError::Denied(_) => fail(DENIED, e.to_string()),
                EnvelopeError::Integrity(_) | EnvelopeError::Encoding(_) => fail(INTEGRITY, e.to_string()),
                _ => usage(e),
            })?;
            write(path, &content)?;
            out.line(format!("name={} size={}", pkg.manifest.name, content.len()));
            out.field("name", pkg.manifest.name.clone()).field("size", content.len());
        }
        Command::DirBuild {
            issuer,
            key,
            entries,
            updated,
            out: path,
        } => {
            let mut list = Vec::new();
            for e in entries {
                let (name, rest) = e
                    .split_once('=')
                    .ok_or_else(|| usage(format!("--entry {e:?}: expected name=path")))?;
                let mut parts = rest.splitn(3, ':');
                let file = parts.next().unwrap_or_default();
                let category = match parts.next() {
                    Some(c) => c.parse().map_err(usage)?,
                    None => sim::DataCategory::PublicInfotainment,
                };
                let description = parts.next().unwrap_or_default();
                let content = read(Path::new(file))?;
                list.push(DirectoryEntry::for_content(name, &content, *updated, description, category));
            }
            let signer = KeyedDigestSigner::new(issuer, key.as_bytes());
            let dir = build_directory(list, &signer).map_err(usage)?;
            write(path, &dir.encode())?;
            let mut listing = Vec::new();
            for e in dir.entries() {
                let h = hex::encode(e.hash);
                out.line(format!("entry name={} hash={h} category={}", e.name, e.category));
                listing.push(json!({"name": e.name, "hash": h, "category": e.category.name()}));
            }
            out.line(format!("issuer={issuer} entries={}", dir.entries().len()));
            out.field("issuer", issuer.clone()).field("entries", listing);
        }
        Command::DirVerify {
            dir,
            trust,
            lookup,
            file,
        } => {
            let d = envelope::SignedDirectory::decode(&read(dir)?)
                .map_err(|e| fail(VERIFICATION, format!("{}: {e}", dir.display())))?;
            let mut anchors = KeyedDigestTrust::new();
            for t in trust {
                let (issuer, key) = t
                    .split_once('=')
                    .ok_or_else(|| usage(format!("--trust {t:?}: expected issuer=key")))?;
                anchors.trust(issuer, key.as_bytes());
            }
            match verify_directory(&d, &anchors) {
                Verification::Valid => {}
                Verification::UnknownIssuer => {
                    return Err(fail(VERIFICATION, format!("issuer {:?} is not trusted", d.issuer)))
                }
                Verification::BadSignature => return Err(fail(VERIFICATION, "directory signature does not verify")),
            }
            out.line(format!("verified issuer={} entries={}", d.issuer, d.entries().len()));
            out.field("verified", true)
                .field("issuer", d.issuer.clone())
                .field("entries", d.entries().len());
            if let Some(name) = lookup {
                let e = d.lookup(name).ok_or_else(|| usage(format!("no directory entry {name:?}")))?;
                let h = hex::encode(e.hash);
                out.line(format!("entry name={} hash={h} updated={} category={}", e.name, e.updated, e.category));
                out.field("hash", h);
                if let Some(f) = file {
                    let matches = e.matches(&read(f)?);
                    out.line(format!("file_matches={matches}"));
                    out.field("file_matches", matches);
                    if !matches {
                        return Err(Failure {
                            code: INTEGRITY,
                            message: format!("{} does not match the directory hash", f.display()),
                            output: Some(out),
                        });
                    }
                }
            }
        }
        Command::Sim { command } => match command {
            SimCommand::Run {
                scenario,
                fixed_line,
                capacity,
                log,
            } => {
                let mut cfg = if *fixed_line {
                    sim::fixed_line(*capacity, cli.global.seed)
                } else {
                    let path = scenario.as_ref().expect("clap requires a scenario");
                    let text = String::from_utf8(read(path)?).map_err(usage)?;
                    ScenarioConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
                };
                if *fixed_line {
                    cfg.seed = cli.global.seed;
                }
                let result = sim::run_scenario(&cfg).map_err(usage)?;
                if let Some(p) = log {
                    write(p, result.log.to_text().as_bytes())?;
                }
                metrics(&result.metrics, &mut out);
            }
            SimCommand::Replay { log } => {
                let text = String::from_utf8(read(log)?).map_err(usage)?;
                let m = sim::replay(&text).map_err(|e| fail(VERIFICATION, e.to_string()))?;
                metrics(&m, &mut out);
            }
        },
        Command::Revoke {
            ledger,
            pid: p,
            expiry,
            now,
        } => {
            let mut l = verified_ledger(ledger, true)?;
            let id = pid(p, group.order())?;
            let r = l.revoke(&id, day(expiry)?, day(now)?).map_err(usage)?;
            let (status, e) = match &r {
                Revocation::Appended(e) => ("appended", e),
                Revocation::AlreadyRevoked(e) => {
                    eprintln!("warning: {id} is already revoked; ledger unchanged");
                    ("already-revoked", e)
                }
            };
            write(ledger, &l.encode())?;
            out.line(format!(
                "{status} pid={} expiry={} timestamp={} blocks={}",
                e.pid,
                e.expiry,
                e.timestamp,
                l.blocks().len()
            ));
            out.field("status", status)
                .field("pid", e.pid.to_string())
                .field("expiry", e.expiry.to_string())
                .field("timestamp", e.timestamp.to_string())
                .field("blocks", l.blocks().len());
        }
        Command::Check {
            ledger,
            pid: p,
            today,
        } => {
            let l = verified_ledger(ledger, false)?;
            let id = pid(p, group.order())?;
            let status = Agent::new(id).daily_check(&l, day(today)?);
            out.line(format!("pid={id} day={today} status={status}"));
            out.field("pid", id.to_string())
                .field("day", today.clone())
                .field("status", status.to_string());
            if status == Status::Revoked {
                return Err(Failure {
                    code: DENIED,
                    message: format!("{id} is revoked"),
                    output: Some(out),
                });
            }
        }
        Command::Prune { ledger, clock } => {
            let mut l = verified_ledger(ledger, false)?;
            let removed = l.prune(day(clock)?).map_err(usage)?;
            write(ledger, &l.encode())?;
            out.line(format!("removed={removed} blocks={}", l.blocks().len()));
            out.field("removed", removed).field("blocks", l.blocks().len());
        }
        Command::LedgerVerify { ledger } => {
            let l = verified_ledger(ledger, false)?;
            let entries = l.entries().count();
            out.line(format!("verified blocks={} live_entries={entries}", l.blocks().len()));
            out.field("verified", true)
                .field("blocks", l.blocks().len())
                .field("live_entries", entries);
        }
    }
    Ok(out)
}

fn metrics(m: &sim::Metrics, out: &mut Output) {
    for l in m.to_string().lines() {
        out.line(l);
    }
    let requests: Vec<Value> = m
        .requests()
        .iter()
        .map(|r| {
            json!({
                "request": r.request,
                "node": r.requester,
                "name": r.name,
                "chunks": r.chunks,
                "complete": r.complete,
                "hops": r.hops,
                "latency": r.latency,
                "served_from": r.served_from,
                "served_kinds": r.served_kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
            })
        })
        .collect();
    out.field("interests", m.interests.len())
        .field("served", m.served())
        .field("not_found", m.not_found())
        .field("hits", m.hits())
        .field("hit_ratio", m.hit_ratio())
        .field("integrity_failures", m.integrity_failures)
        .field("requests", requests);
}

fn audit(ctx: &mut Ctx, pk: Option<&Path>, sk: Option<&Path>, ct: Option<&Path>, out: &mut Output) -> Res<()> {
    let group = ctx.group;
    let (scheme, p, k, c) = match (pk, sk, ct) {
        (Some(pk), Some(sk), Some(ct)) => {
            let p = ctx.pk(pk)?;
            let scheme = ctx.scheme(p.mode)?;
            let k = decode_private_key(&group, &read(sk)?).map_err(usage)?;
            let c = decode_ciphertext(&group, &read(ct)?).map_err(usage)?;
            (scheme, p, k, c)
        }
        _ => {
            let scheme = Scheme::new(group, ctx.mode.unwrap_or(Mode::Repaired));
            let universe: Vec<Attribute> = ["gold", "silver"]
                .iter()
                .map(|a| Attribute::new(*a).expect("valid label"))
                .collect();
            let (p, m) = scheme.setup(&universe, 4, &mut ctx.rng).map_err(usage)?;
            let cal = Calendar::Gregorian;
            let window = cal.parse_window("2022-07-01..2022-09-02").expect("valid window");
            let key_cover = cal.set_cover(&window).expect("coverable");
            let policy: Policy = "gold AND silver".parse().expect("valid policy");
            let access = compile(&policy, group.order());
            let id = group.random_nonzero_scalar(&mut ctx.rng);
            let k = scheme
                .keygen(&p, &m, id, &key_cover, &access, &mut ctx.rng)
                .map_err(usage)?;
            let ct_cover = cal.cover_from_nodes([TimeNode::month(2022, 8)]).expect("single node");
            let msg = group.random_target(&mut ctx.rng);
            let attrs = parse_attribute_set("gold,silver").expect("valid set");
            let c = scheme.encrypt(&p, &msg, &ct_cover, &attrs, &mut ctx.rng).map_err(usage)?;
            (scheme, p, k, c)
        }
    };
    let report = scheme.audit(&p, &c, &k).map_err(|e| match e {
        scheme::AuditError::Denied(_) => fail(DENIED, e.to_string()),
        _ => usage(e),
    })?;
    let residual = |t: &<TransparentSuite as BilinearGroup>::Target| match group.target_log(t) {
        Some(l) => l.value().to_string(),
        None => hex::encode(group.encode_target(t)),
    };
    out.line(format!("mode={} node={}", report.mode, report.node.label()));
    let mut steps = Vec::new();
    for kind in StepKind::ALL {
        let s = report.step(kind);
        out.line(format!("step={} closed={} residual={}", kind, s.closed, residual(&s.residual)));
        steps.push(json!({"step": kind.name(), "closed": s.closed, "residual": residual(&s.residual)}));
    }
    out.line(format!("all_closed={}", report.all_closed()));
    out.field("mode", report.mode.to_string())
        .field("node", report.node.label())
        .field("steps", steps)
        .field("all_closed", report.all_closed());
    Ok(())
}
