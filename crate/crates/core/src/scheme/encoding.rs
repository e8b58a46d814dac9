//! Canonical binary encodings of keys and ciphertexts.
//!
//! Every artifact starts with the header
//! `"TSKP" | version u8 | kind u8 | mode u8 | suite str | U u32 | T u32`
//! followed by length-prefixed component lists in the order of the key and
//! ciphertext definitions. Strings are `u32` length + UTF-8, elements use the
//! suite's fixed-width encoding, scalars are 8-byte big-endian.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Ciphertext, MasterKey, Mode, PrivateKey, PublicParams};
use crate::codec::{DecodeError, Reader, Writer};
use crate::group::{BilinearGroup, GroupError, Scalar};
use crate::lsss::{AccessStructure, Attribute};
use crate::time::{Calendar, TimeCover, TimeNode};

pub const MAGIC: &[u8; 4] = b"TSKP";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("expected a {expected:?} artifact, found {found:?}")]
    WrongKind {
        expected: ArtifactKind,
        found: ArtifactKind,
    },
    #[error("artifact is for suite {found}, decoder uses {expected}")]
    Suite { expected: String, found: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    PublicParams = 1,
    MasterKey = 2,
    PrivateKey = 3,
    Ciphertext = 4,
}

impl ArtifactKind {
    fn from_code(c: u8) -> Option<ArtifactKind> {
        match c {
            1 => Some(ArtifactKind::PublicParams),
            2 => Some(ArtifactKind::MasterKey),
            3 => Some(ArtifactKind::PrivateKey),
            4 => Some(ArtifactKind::Ciphertext),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub kind: ArtifactKind,
    pub mode: Mode,
    pub suite: String,
    pub universe: u32,
    pub depth: u32,
}

fn write_header(w: &mut Writer, h: &Header) {
    w.raw(MAGIC)
        .u8(VERSION)
        .u8(h.kind as u8)
        .u8(h.mode.code())
        .str(&h.suite)
        .u32(h.universe)
        .u32(h.depth);
}

fn read_header(r: &mut Reader<'_>) -> Result<Header, EncodingError> {
    r.expect(MAGIC)?;
    let version = r.u8()?;
    if version != VERSION {
        return Err(DecodeError::Version(version).into());
    }
    let kind = r.u8()?;
    let kind = ArtifactKind::from_code(kind)
        .ok_or_else(|| EncodingError::Invalid(format!("artifact kind {kind}")))?;
    let mode = r.u8()?;
    let mode = Mode::from_code(mode).ok_or_else(|| EncodingError::Invalid(format!("mode {mode}")))?;
    let suite = r.str()?.to_string();
    Ok(Header {
        kind,
        mode,
        suite,
        universe: r.u32()?,
        depth: r.u32()?,
    })
}

/// Reads only the header, e.g. to pick a suite before decoding.
pub fn peek_header(bytes: &[u8]) -> Result<Header, EncodingError> {
    read_header(&mut Reader::new(bytes))
}

fn open<'a, G: BilinearGroup>(
    group: &G,
    bytes: &'a [u8],
    expected: ArtifactKind,
) -> Result<(Header, Reader<'a>), EncodingError> {
    let mut r = Reader::new(bytes);
    let h = read_header(&mut r)?;
    if h.kind != expected {
        return Err(EncodingError::WrongKind {
            expected,
            found: h.kind,
        });
    }
    if h.suite != group.suite_id() {
        return Err(EncodingError::Suite {
            expected: group.suite_id(),
            found: h.suite,
        });
    }
    Ok((h, r))
}

fn scalar(r: &mut Reader<'_>, order: u64) -> Result<Scalar, EncodingError> {
    let v = r.u64()?;
    if v >= order {
        return Err(EncodingError::Invalid("scalar not reduced".into()));
    }
    Ok(Scalar::new(v, order))
}

fn count(r: &mut Reader<'_>) -> Result<usize, EncodingError> {
    let n = r.u32()? as usize;
    // every listed item occupies at least one byte
    if n > r.remaining() {
        return Err(DecodeError::Truncated(r.position()).into());
    }
    Ok(n)
}

fn source<G: BilinearGroup>(g: &G, r: &mut Reader<'_>) -> Result<G::Source, EncodingError> {
    Ok(g.decode_source(r.bytes()?)?)
}

fn target<G: BilinearGroup>(g: &G, r: &mut Reader<'_>) -> Result<G::Target, EncodingError> {
    Ok(g.decode_target(r.bytes()?)?)
}

fn attribute(r: &mut Reader<'_>) -> Result<Attribute, EncodingError> {
    Attribute::new(r.str()?).map_err(|e| EncodingError::Invalid(e.to_string()))
}

fn node(r: &mut Reader<'_>) -> Result<TimeNode, EncodingError> {
    Calendar::Gregorian
        .parse_node(r.str()?)
        .map_err(|e| EncodingError::Invalid(e.to_string()))
}

fn cover_of(nodes: impl IntoIterator<Item = TimeNode>) -> Result<TimeCover, EncodingError> {
    Calendar::Gregorian
        .cover_from_nodes(nodes)
        .map_err(|e| EncodingError::Invalid(e.to_string()))
}

pub fn encode_public_params<G: BilinearGroup>(g: &G, pk: &PublicParams<G>) -> Vec<u8> {
    let mut w = Writer::new();
    write_header(
        &mut w,
        &Header {
            kind: ArtifactKind::PublicParams,
            mode: pk.mode,
            suite: pk.suite.clone(),
            universe: pk.universe.len() as u32,
            depth: pk.depth as u32,
        },
    );
    w.u32(pk.universe.len() as u32);
    for a in &pk.universe {
        w.str(a.as_str());
    }
    for e in [&pk.g, &pk.g_alpha, &pk.g_alpha_sq, &pk.g_inv_alpha, &pk.g_beta, &pk.g_beta_sq] {
        w.bytes(&g.encode_source(e));
    }
    w.bytes(&g.encode_target(&pk.e_gg_alpha));
    for list in [&pk.h_beta, &pk.v] {
        w.u32(list.len() as u32);
        for e in list {
            w.bytes(&g.encode_source(e));
        }
    }
    w.finish()
}

pub fn decode_public_params<G: BilinearGroup>(
    g: &G,
    bytes: &[u8],
) -> Result<PublicParams<G>, EncodingError> {
    let (h, mut r) = open(g, bytes, ArtifactKind::PublicParams)?;
    let n = count(&mut r)?;
    let universe = (0..n).map(|_| attribute(&mut r)).collect::<Result<Vec<_>, _>>()?;
    let mut six = Vec::with_capacity(6);
    for _ in 0..6 {
        six.push(source(g, &mut r)?);
    }
    let e_gg_alpha = target(g, &mut r)?;
    let mut lists = Vec::with_capacity(2);
    for _ in 0..2 {
        let n = count(&mut r)?;
        lists.push((0..n).map(|_| source(g, &mut r)).collect::<Result<Vec<_>, _>>()?);
    }
    r.finish()?;
    let v = lists.pop().unwrap();
    let h_beta = lists.pop().unwrap();
    if universe.len() != h.universe as usize
        || h_beta.len() != universe.len()
        || v.len() != h.depth as usize + 1
    {
        return Err(EncodingError::Invalid("public parameter list lengths disagree with header".into()));
    }
    let mut six = six.into_iter();
    let mut next = || six.next().unwrap();
    Ok(PublicParams {
        mode: h.mode,
        suite: h.suite,
        universe,
        depth: h.depth as usize,
        g: next(),
        g_alpha: next(),
        g_alpha_sq: next(),
        g_inv_alpha: next(),
        g_beta: next(),
        g_beta_sq: next(),
        e_gg_alpha,
        h_beta,
        v,
    })
}

pub fn encode_master_key<G: BilinearGroup>(g: &G, mk: &MasterKey) -> Vec<u8> {
    let mut w = Writer::new();
    write_header(
        &mut w,
        &Header {
            kind: ArtifactKind::MasterKey,
            mode: mk.mode,
            suite: g.suite_id(),
            universe: 0,
            depth: 0,
        },
    );
    w.u64(mk.alpha.value()).u64(mk.beta.value());
    w.finish()
}

pub fn decode_master_key<G: BilinearGroup>(g: &G, bytes: &[u8]) -> Result<MasterKey, EncodingError> {
    let (h, mut r) = open(g, bytes, ArtifactKind::MasterKey)?;
    let alpha = scalar(&mut r, g.order())?;
    let beta = scalar(&mut r, g.order())?;
    r.finish()?;
    if alpha.is_zero() {
        return Err(EncodingError::Invalid("alpha is zero".into()));
    }
    Ok(MasterKey {
        mode: h.mode,
        alpha,
        beta,
    })
}

pub fn encode_private_key<G: BilinearGroup>(g: &G, sk: &PrivateKey<G>) -> Vec<u8> {
    let mut w = Writer::new();
    write_header(
        &mut w,
        &Header {
            kind: ArtifactKind::PrivateKey,
            mode: sk.mode,
            suite: sk.suite.clone(),
            universe: 0,
            depth: 0,
        },
    );
    w.bytes(&g.encode_target(&sk.d0));
    w.bytes(&g.encode_source(&sk.d0_prime));
    w.u32(sk.d_time.len() as u32);
    for (n, d) in &sk.d_time {
        w.str(&n.to_string()).bytes(&g.encode_source(d));
    }
    w.u32(sk.d_rows.len() as u32);
    for (d, d_prime) in &sk.d_rows {
        w.bytes(&g.encode_source(d)).bytes(&g.encode_source(d_prime));
    }
    w.u64(sk.id.value());
    let a = &sk.access;
    w.u32(a.rows() as u32).u32(a.columns() as u32);
    for i in 0..a.rows() {
        w.str(a.rho(i).as_str());
        for s in a.row(i) {
            w.u64(s.value());
        }
    }
    w.finish()
}

pub fn decode_private_key<G: BilinearGroup>(
    g: &G,
    bytes: &[u8],
) -> Result<PrivateKey<G>, EncodingError> {
    let (h, mut r) = open(g, bytes, ArtifactKind::PrivateKey)?;
    let p = g.order();
    let d0 = target(g, &mut r)?;
    let d0_prime = source(g, &mut r)?;
    let n = count(&mut r)?;
    let mut d_time = Vec::with_capacity(n);
    for _ in 0..n {
        d_time.push((node(&mut r)?, source(g, &mut r)?));
    }
    let n = count(&mut r)?;
    let mut d_rows = Vec::with_capacity(n);
    for _ in 0..n {
        d_rows.push((source(g, &mut r)?, source(g, &mut r)?));
    }
    let id = scalar(&mut r, p)?;
    let rows = count(&mut r)?;
    let cols = count(&mut r)?;
    let mut matrix = Vec::with_capacity(rows);
    let mut rho = Vec::with_capacity(rows);
    for _ in 0..rows {
        rho.push(attribute(&mut r)?);
        matrix.push((0..cols).map(|_| scalar(&mut r, p)).collect::<Result<Vec<_>, _>>()?);
    }
    r.finish()?;
    let access = AccessStructure::from_rows(matrix, rho, p)
        .ok_or_else(|| EncodingError::Invalid("malformed access structure".into()))?;
    if access.rows() != d_rows.len() {
        return Err(EncodingError::Invalid("row components disagree with access structure".into()));
    }
    if id.is_zero() {
        return Err(EncodingError::Invalid("pseudo-identity is zero".into()));
    }
    let cover = cover_of(d_time.iter().map(|(n, _)| *n))?;
    if cover.len() != d_time.len() {
        return Err(EncodingError::Invalid("duplicate time node".into()));
    }
    d_time.sort_by_key(|(n, _)| *n);
    Ok(PrivateKey {
        mode: h.mode,
        suite: h.suite,
        id,
        access,
        cover,
        d0,
        d0_prime,
        d_time,
        d_rows,
    })
}

pub fn encode_ciphertext<G: BilinearGroup>(g: &G, ct: &Ciphertext<G>) -> Vec<u8> {
    let mut w = Writer::new();
    write_header(
        &mut w,
        &Header {
            kind: ArtifactKind::Ciphertext,
            mode: ct.mode,
            suite: ct.suite.clone(),
            universe: 0,
            depth: 0,
        },
    );
    w.bytes(&g.encode_target(&ct.c0));
    w.bytes(&g.encode_source(&ct.c0_prime));
    w.u32(ct.c_time.len() as u32);
    for (n, c0, c1) in &ct.c_time {
        w.str(&n.to_string())
            .bytes(&g.encode_source(c0))
            .bytes(&g.encode_source(c1));
    }
    w.u32(ct.attributes.len() as u32);
    for a in &ct.attributes {
        w.str(a.as_str());
    }
    w.finish()
}

pub fn decode_ciphertext<G: BilinearGroup>(
    g: &G,
    bytes: &[u8],
) -> Result<Ciphertext<G>, EncodingError> {
    let (h, mut r) = open(g, bytes, ArtifactKind::Ciphertext)?;
    let c0 = target(g, &mut r)?;
    let c0_prime = source(g, &mut r)?;
    let n = count(&mut r)?;
    let mut c_time = Vec::with_capacity(n);
    for _ in 0..n {
        c_time.push((node(&mut r)?, source(g, &mut r)?, source(g, &mut r)?));
    }
    let n = count(&mut r)?;
    let mut attributes = BTreeSet::new();
    for _ in 0..n {
        if !attributes.insert(attribute(&mut r)?) {
            return Err(EncodingError::Invalid("duplicate attribute".into()));
        }
    }
    r.finish()?;
    let cover = cover_of(c_time.iter().map(|(n, _, _)| *n))?;
    if cover.len() != c_time.len() {
        return Err(EncodingError::Invalid("duplicate time node".into()));
    }
    c_time.sort_by_key(|(n, _, _)| *n);
    Ok(Ciphertext {
        mode: h.mode,
        suite: h.suite,
        cover,
        attributes,
        c0,
        c0_prime,
        c_time,
    })
}
