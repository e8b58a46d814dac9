//! Single-writer, digest-chained revocation log.
//!
//! Each block commits to its predecessor's digest and to the leaf hash of
//! every entry it holds. Pruning replaces an entry body by its leaf hash and
//! appends a pruning record naming the removed positions, so the chain still
//! verifies end to end after old entries are gone.

use std::fmt;

use sha2::{Digest as _, Sha256};
use thiserror::Error;

use super::PseudoIdentity;
use crate::codec::{DecodeError, Reader, Writer};
use crate::envelope::Digest;
use crate::group::Scalar;
use crate::time::{Calendar, Day};

const LEDGER_MAGIC: &[u8; 4] = b"TSLG";
const LEDGER_VERSION: u8 = 1;
const GENESIS: Digest = [0; 32];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub pid: PseudoIdentity,
    /// Last day on which the revoked key is still algebraically valid.
    pub expiry: Day,
    /// Ledger day of the transaction.
    pub timestamp: Day,
}

impl LedgerEntry {
    fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u64(self.pid.scalar().modulus()).u64(self.pid.scalar().value());
        put_day(&mut w, &self.expiry);
        put_day(&mut w, &self.timestamp);
        w.finish()
    }

    fn decode(r: &mut Reader<'_>) -> Result<LedgerEntry, DecodeError> {
        let modulus = r.u64()?;
        let value = r.u64()?;
        if modulus == 0 || value == 0 || value >= modulus {
            return Err(DecodeError::Invalid("pseudo-identity out of range".into()));
        }
        Ok(LedgerEntry {
            pid: PseudoIdentity::from_scalar(Scalar::new(value, modulus)),
            expiry: get_day(r)?,
            timestamp: get_day(r)?,
        })
    }

    pub fn leaf(&self) -> Digest {
        let mut h = Sha256::new();
        h.update(b"tsabe/ledger-leaf/v1");
        h.update(self.encode());
        h.finalize().into()
    }
}

fn put_day(w: &mut Writer, d: &Day) {
    w.u32(d.year()).u8(d.month()).u8(d.day());
}

fn get_day(r: &mut Reader<'_>) -> Result<Day, DecodeError> {
    let (y, m, d) = (r.u32()?, r.u8()?, r.u8()?);
    Calendar::Gregorian
        .day(y, m, d)
        .map_err(|e| DecodeError::Invalid(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Live(LedgerEntry),
    Pruned(Digest),
}

impl Slot {
    pub fn leaf(&self) -> Digest {
        match self {
            Slot::Live(e) => e.leaf(),
            Slot::Pruned(d) => *d,
        }
    }

    pub fn entry(&self) -> Option<&LedgerEntry> {
        match self {
            Slot::Live(e) => Some(e),
            Slot::Pruned(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockBody {
    Revocations(Vec<Slot>),
    /// Positions `(block, slot)` pruned at `clock`, with their leaf hashes.
    Pruning { clock: Day, removed: Vec<(u64, u32, Digest)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub index: u64,
    pub day: Day,
    pub prev: Digest,
    pub body: BlockBody,
    pub digest: Digest,
}

impl Block {
    fn compute_digest(index: u64, day: &Day, prev: &Digest, body: &BlockBody) -> Digest {
        let mut w = Writer::new();
        w.raw(b"tsabe/ledger-block/v1").u64(index);
        put_day(&mut w, day);
        w.raw(prev);
        match body {
            BlockBody::Revocations(slots) => {
                w.u8(1).u32(slots.len() as u32);
                for s in slots {
                    w.raw(&s.leaf());
                }
            }
            BlockBody::Pruning { clock, removed } => {
                w.u8(2);
                put_day(&mut w, clock);
                w.u32(removed.len() as u32);
                for (b, s, leaf) in removed {
                    w.u64(*b).u32(*s).raw(leaf);
                }
            }
        }
        Sha256::digest(w.finish()).into()
    }

    fn encode(&self, w: &mut Writer) {
        w.u64(self.index);
        put_day(w, &self.day);
        w.raw(&self.prev);
        match &self.body {
            BlockBody::Revocations(slots) => {
                w.u8(1).u32(slots.len() as u32);
                for s in slots {
                    match s {
                        Slot::Live(e) => {
                            w.u8(1).raw(&e.encode());
                        }
                        Slot::Pruned(d) => {
                            w.u8(0).raw(d);
                        }
                    }
                }
            }
            BlockBody::Pruning { clock, removed } => {
                w.u8(2);
                put_day(w, clock);
                w.u32(removed.len() as u32);
                for (b, s, leaf) in removed {
                    w.u64(*b).u32(*s).raw(leaf);
                }
            }
        }
        w.raw(&self.digest);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Block, DecodeError> {
        let index = r.u64()?;
        let day = get_day(r)?;
        let prev = digest(r)?;
        let body = match r.u8()? {
            1 => {
                let n = r.u32()? as usize;
                let mut slots = Vec::with_capacity(n.min(r.remaining()));
                for _ in 0..n {
                    slots.push(match r.u8()? {
                        1 => Slot::Live(LedgerEntry::decode(r)?),
                        0 => Slot::Pruned(digest(r)?),
                        t => return Err(DecodeError::Invalid(format!("slot tag {t}"))),
                    });
                }
                BlockBody::Revocations(slots)
            }
            2 => {
                let clock = get_day(r)?;
                let n = r.u32()? as usize;
                let mut removed = Vec::with_capacity(n.min(r.remaining()));
                for _ in 0..n {
                    removed.push((r.u64()?, r.u32()?, digest(r)?));
                }
                BlockBody::Pruning { clock, removed }
            }
            t => return Err(DecodeError::Invalid(format!("block tag {t}"))),
        };
        Ok(Block {
            index,
            day,
            prev,
            body,
            digest: digest(r)?,
        })
    }
}

fn digest(r: &mut Reader<'_>) -> Result<Digest, DecodeError> {
    Ok(r.take(32)?.try_into().expect("fixed length"))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("block {block}: {reason}")]
    Broken { block: u64, reason: &'static str },
    #[error("time runs backwards: ledger is at {clock}, transaction at {now}")]
    ClockRegression { clock: Day, now: Day },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Revocation {
    Appended(LedgerEntry),
    /// The pseudo-identity already has a live entry; nothing was written.
    AlreadyRevoked(LedgerEntry),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RevocationLedger {
    blocks: Vec<Block>,
}

impl RevocationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Day of the most recent transaction, if any.
    pub fn clock(&self) -> Option<Day> {
        self.blocks.last().map(|b| b.day)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.blocks.iter().flat_map(|b| match &b.body {
            BlockBody::Revocations(slots) => slots.iter().filter_map(Slot::entry).collect(),
            BlockBody::Pruning { .. } => Vec::new(),
        })
    }

    pub fn lookup(&self, pid: &PseudoIdentity) -> Option<&LedgerEntry> {
        self.entries().find(|e| e.pid == *pid)
    }

    pub fn is_revoked(&self, pid: &PseudoIdentity) -> bool {
        self.lookup(pid).is_some()
    }

    fn check_clock(&self, now: Day) -> Result<(), LedgerError> {
        match self.clock() {
            Some(clock) if now < clock => Err(LedgerError::ClockRegression { clock, now }),
            _ => Ok(()),
        }
    }

    fn append(&mut self, day: Day, body: BlockBody) {
        let index = self.blocks.len() as u64;
        let prev = self.blocks.last().map(|b| b.digest).unwrap_or(GENESIS);
        let digest = Block::compute_digest(index, &day, &prev, &body);
        self.blocks.push(Block {
            index,
            day,
            prev,
            body,
            digest,
        });
    }

    pub fn revoke(&mut self, pid: &PseudoIdentity, expiry: Day, now: Day) -> Result<Revocation, LedgerError> {
        self.check_clock(now)?;
        if let Some(e) = self.lookup(pid) {
            return Ok(Revocation::AlreadyRevoked(e.clone()));
        }
        let entry = LedgerEntry {
            pid: *pid,
            expiry,
            timestamp: now,
        };
        self.append(now, BlockBody::Revocations(vec![Slot::Live(entry.clone())]));
        Ok(Revocation::Appended(entry))
    }

    /// Removes entries whose expiry day is strictly before `clock`.
    pub fn prune(&mut self, clock: Day) -> Result<usize, LedgerError> {
        self.check_clock(clock)?;
        let mut removed = Vec::new();
        for b in &mut self.blocks {
            if let BlockBody::Revocations(slots) = &mut b.body {
                for (i, s) in slots.iter_mut().enumerate() {
                    if let Slot::Live(e) = s {
                        if e.expiry < clock {
                            let leaf = e.leaf();
                            *s = Slot::Pruned(leaf);
                            removed.push((b.index, i as u32, leaf));
                        }
                    }
                }
            }
        }
        let n = removed.len();
        if n > 0 {
            self.append(clock, BlockBody::Pruning { clock, removed });
        }
        Ok(n)
    }

    /// Full-chain check: indices, links, digests, and that every pruned slot
    /// is accounted for by a later pruning record.
    pub fn verify(&self) -> Result<(), LedgerError> {
        let mut prev = GENESIS;
        let mut last_day: Option<Day> = None;
        let mut accounted = std::collections::BTreeSet::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let broken = |reason| LedgerError::Broken { block: b.index, reason };
            if b.index != i as u64 {
                return Err(broken("index out of sequence"));
            }
            if b.prev != prev {
                return Err(broken("does not link to its predecessor"));
            }
            if Block::compute_digest(b.index, &b.day, &b.prev, &b.body) != b.digest {
                return Err(broken("digest mismatch"));
            }
            if last_day.is_some_and(|d| b.day < d) {
                return Err(broken("timestamp precedes its predecessor"));
            }
            if let BlockBody::Pruning { removed, .. } = &b.body {
                for (blk, slot, leaf) in removed {
                    if *blk >= b.index {
                        return Err(broken("prunes a later block"));
                    }
                    let target = &self.blocks[*blk as usize];
                    let ok = match &target.body {
                        BlockBody::Revocations(slots) => match slots.get(*slot as usize) {
                            Some(Slot::Pruned(d)) => d == leaf,
                            _ => false,
                        },
                        BlockBody::Pruning { .. } => false,
                    };
                    if !ok {
                        return Err(broken("pruning record does not match the pruned slot"));
                    }
                    accounted.insert((*blk, *slot));
                }
            }
            prev = b.digest;
            last_day = Some(b.day);
        }
        for b in &self.blocks {
            if let BlockBody::Revocations(slots) = &b.body {
                for (i, s) in slots.iter().enumerate() {
                    if matches!(s, Slot::Pruned(_)) && !accounted.contains(&(b.index, i as u32)) {
                        return Err(LedgerError::Broken {
                            block: b.index,
                            reason: "entry removed without a pruning record",
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// `"TSLG" | version | count u32 | blocks`.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(LEDGER_MAGIC).u8(LEDGER_VERSION).u32(self.blocks.len() as u32);
        for b in &self.blocks {
            b.encode(&mut w);
        }
        w.finish()
    }

    /// Parses without verifying.
    pub fn decode(bytes: &[u8]) -> Result<RevocationLedger, LedgerError> {
        let mut r = Reader::new(bytes);
        r.expect(LEDGER_MAGIC)?;
        let v = r.u8()?;
        if v != LEDGER_VERSION {
            return Err(DecodeError::Version(v).into());
        }
        let n = r.u32()? as usize;
        let mut blocks = Vec::with_capacity(n.min(r.remaining()));
        for _ in 0..n {
            blocks.push(Block::decode(&mut r)?);
        }
        r.finish()?;
        Ok(RevocationLedger { blocks })
    }
}

impl fmt::Display for RevocationLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            match &b.body {
                BlockBody::Revocations(slots) => {
                    for s in slots {
                        match s {
                            Slot::Live(e) => writeln!(
                                f,
                                "block={} day={} revoke pid={} expiry={}",
                                b.index, b.day, e.pid, e.expiry
                            )?,
                            Slot::Pruned(_) => writeln!(f, "block={} day={} pruned-entry", b.index, b.day)?,
                        }
                    }
                }
                BlockBody::Pruning { clock, removed } => writeln!(
                    f,
                    "block={} day={} prune clock={} removed={}",
                    b.index,
                    b.day,
                    clock,
                    removed.len()
                )?,
            }
        }
        Ok(())
    }
}
