//! Hybrid content packaging and the signed resource directory.
//!
//! A random target-group element `M` is wrapped with the ABE scheme; the
//! media bytes are chunked and each chunk is encrypted under a key derived
//! from `M`. Chunk digests are over the encrypted bytes so that caches can
//! check them without any key.

use std::collections::BTreeMap;
use std::fmt;

use hmac::{Hmac, Mac};
use rand::RngCore;
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::codec::{DecodeError, Reader, Writer};
use crate::group::BilinearGroup;
use crate::lsss::Attribute;
use crate::scheme::{
    decode_ciphertext, encode_ciphertext, Ciphertext, DecryptError, Denial, EncodingError, PrivateKey,
    PublicParams, Scheme, SchemeError,
};
use crate::sim::DataCategory;
use crate::time::TimeCover;

type HmacSha256 = Hmac<Sha256>;

pub const DEFAULT_CHUNK_SIZE: usize = 1 << 20;
pub const DIGEST_LEN: usize = 32;

const KDF_LABEL: &[u8] = b"tsabe/content-key/v1";
const PACKAGE_MAGIC: &[u8; 4] = b"TSPK";
const DIRECTORY_MAGIC: &[u8; 4] = b"TSDR";
const FORMAT_VERSION: u8 = 1;

pub type Digest = [u8; DIGEST_LEN];

pub fn digest(bytes: &[u8]) -> Digest {
    Sha256::digest(bytes).into()
}

fn mac(key: &[u8], parts: &[&[u8]]) -> Digest {
    let mut m = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    for p in parts {
        m.update(p);
    }
    m.finalize().into_bytes().into()
}

fn mac_verify(key: &[u8], parts: &[&[u8]], tag: &[u8]) -> bool {
    let mut m = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    for p in parts {
        m.update(p);
    }
    m.verify_slice(tag).is_ok()
}

/// 256-bit symmetric key derived from the wrapped group element.
#[derive(Clone, PartialEq, Eq)]
pub struct ContentKey([u8; 32]);

impl ContentKey {
    pub fn derive<G: BilinearGroup>(group: &G, m: &G::Target) -> ContentKey {
        let mut h = Sha256::new();
        h.update(KDF_LABEL);
        h.update(group.encode_target(m));
        ContentKey(h.finalize().into())
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for ContentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ContentKey(..)")
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("chunk failed authentication")]
pub struct DemError;

/// Authenticated symmetric encryption of one chunk. `index` binds the chunk
/// to its position.
pub trait Dem {
    fn seal(&self, key: &ContentKey, index: u64, plaintext: &[u8]) -> Vec<u8>;
    fn open(&self, key: &ContentKey, index: u64, ciphertext: &[u8]) -> Result<Vec<u8>, DemError>;
}

/// SHA-256 counter-mode keystream with an appended HMAC-SHA256 tag.
/// A test double, not a vetted cipher.
#[derive(Debug, Clone, Copy, Default)]
pub struct StreamDem;

impl StreamDem {
    fn apply(key: &ContentKey, index: u64, data: &mut [u8]) {
        for (block, chunk) in data.chunks_mut(32).enumerate() {
            let mut h = Sha256::new();
            h.update(b"tsabe/dem-stream/v1");
            h.update(key.0);
            h.update(index.to_be_bytes());
            h.update((block as u64).to_be_bytes());
            let pad = h.finalize();
            for (b, p) in chunk.iter_mut().zip(pad.iter()) {
                *b ^= p;
            }
        }
    }
}

impl Dem for StreamDem {
    fn seal(&self, key: &ContentKey, index: u64, plaintext: &[u8]) -> Vec<u8> {
        let mut out = plaintext.to_vec();
        Self::apply(key, index, &mut out);
        let tag = mac(&key.0, &[&index.to_be_bytes(), &out]);
        out.extend_from_slice(&tag);
        out
    }

    fn open(&self, key: &ContentKey, index: u64, ciphertext: &[u8]) -> Result<Vec<u8>, DemError> {
        let split = ciphertext.len().checked_sub(DIGEST_LEN).ok_or(DemError)?;
        let (body, tag) = ciphertext.split_at(split);
        if !mac_verify(&key.0, &[&index.to_be_bytes(), body], tag) {
            return Err(DemError);
        }
        let mut out = body.to_vec();
        Self::apply(key, index, &mut out);
        Ok(out)
    }
}

/// Which part of a package failed its check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrityFault {
    Chunk(usize),
    ChunkCount { expected: usize, found: usize },
    Manifest,
    Content,
}

impl fmt::Display for IntegrityFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrityFault::Chunk(i) => write!(f, "chunk {i} does not match its digest"),
            IntegrityFault::ChunkCount { expected, found } => {
                write!(f, "manifest lists {expected} chunks, package has {found}")
            }
            IntegrityFault::Manifest => f.write_str("manifest authentication failed"),
            IntegrityFault::Content => f.write_str("reassembled content does not match its digest"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvelopeError {
    #[error("chunk size must be at least 1")]
    ChunkSize,
    #[error("access denied: {0}")]
    Denied(Denial),
    #[error("integrity failure: {0}")]
    Integrity(IntegrityFault),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

impl From<DecryptError> for EnvelopeError {
    fn from(e: DecryptError) -> Self {
        match e {
            DecryptError::Denied(d) => EnvelopeError::Denied(d),
            DecryptError::Usage(u) => EnvelopeError::Scheme(u),
        }
    }
}

impl From<DecodeError> for EnvelopeError {
    fn from(e: DecodeError) -> Self {
        EnvelopeError::Encoding(e.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest<G: BilinearGroup> {
    pub name: String,
    pub total_size: u64,
    pub chunk_size: u64,
    /// Digest of the plaintext.
    pub content_digest: Digest,
    /// Digests of the encrypted chunks, in order.
    pub chunk_digests: Vec<Digest>,
    pub wrapped_key: Ciphertext<G>,
    /// HMAC under the content key over all fields above.
    pub tag: Digest,
}

impl<G: BilinearGroup> Manifest<G> {
    fn body(&self, group: &G) -> Vec<u8> {
        let mut w = Writer::new();
        w.str(&self.name)
            .u64(self.total_size)
            .u64(self.chunk_size)
            .raw(&self.content_digest)
            .u32(self.chunk_digests.len() as u32);
        for d in &self.chunk_digests {
            w.raw(d);
        }
        w.bytes(&encode_ciphertext(group, &self.wrapped_key));
        w.finish()
    }

    pub fn encode(&self, group: &G) -> Vec<u8> {
        let mut out = self.body(group);
        out.extend_from_slice(&self.tag);
        out
    }

    pub fn decode(group: &G, bytes: &[u8]) -> Result<Manifest<G>, EnvelopeError> {
        let mut r = Reader::new(bytes);
        let name = r.str()?.to_string();
        let total_size = r.u64()?;
        let chunk_size = r.u64()?;
        let content_digest = digest_from(&mut r)?;
        let n = r.u32()? as usize;
        if n.saturating_mul(DIGEST_LEN) > r.remaining() {
            return Err(DecodeError::Truncated(r.position()).into());
        }
        let chunk_digests = (0..n).map(|_| digest_from(&mut r)).collect::<Result<_, _>>()?;
        let wrapped_key = decode_ciphertext(group, r.bytes()?)?;
        let tag = digest_from(&mut r)?;
        r.finish()?;
        Ok(Manifest {
            name,
            total_size,
            chunk_size,
            content_digest,
            chunk_digests,
            wrapped_key,
            tag,
        })
    }
}

fn digest_from(r: &mut Reader<'_>) -> Result<Digest, DecodeError> {
    Ok(r.take(DIGEST_LEN)?.try_into().expect("fixed length"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentPackage<G: BilinearGroup> {
    pub manifest: Manifest<G>,
    pub chunks: Vec<Vec<u8>>,
}

impl<G: BilinearGroup> ContentPackage<G> {
    /// Keyless check of the encrypted chunks against the manifest.
    pub fn verify_chunks(&self) -> Result<(), IntegrityFault> {
        let expected = self.manifest.chunk_digests.len();
        if self.chunks.len() != expected {
            return Err(IntegrityFault::ChunkCount {
                expected,
                found: self.chunks.len(),
            });
        }
        match (0..expected).find(|&i| digest(&self.chunks[i]) != self.manifest.chunk_digests[i]) {
            Some(i) => Err(IntegrityFault::Chunk(i)),
            None => Ok(()),
        }
    }

    /// `"TSPK" | version | manifest (len-prefixed) | count u32 | chunks (len-prefixed)`.
    pub fn encode(&self, group: &G) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(PACKAGE_MAGIC)
            .u8(FORMAT_VERSION)
            .bytes(&self.manifest.encode(group))
            .u32(self.chunks.len() as u32);
        for c in &self.chunks {
            w.bytes(c);
        }
        w.finish()
    }

    pub fn decode(group: &G, bytes: &[u8]) -> Result<ContentPackage<G>, EnvelopeError> {
        let mut r = Reader::new(bytes);
        r.expect(PACKAGE_MAGIC)?;
        let v = r.u8()?;
        if v != FORMAT_VERSION {
            return Err(DecodeError::Version(v).into());
        }
        let manifest = Manifest::decode(group, r.bytes()?)?;
        let n = r.u32()? as usize;
        if n > r.remaining() {
            return Err(DecodeError::Truncated(r.position()).into());
        }
        let chunks = (0..n).map(|_| r.bytes().map(<[u8]>::to_vec)).collect::<Result<_, _>>()?;
        r.finish()?;
        Ok(ContentPackage { manifest, chunks })
    }
}

pub fn chunk_count(size: usize, chunk_size: usize) -> usize {
    size.div_ceil(chunk_size).max(1)
}

#[derive(Debug, Clone)]
pub struct SealParams<'a> {
    pub name: &'a str,
    pub cover: &'a TimeCover,
    pub attributes: &'a std::collections::BTreeSet<Attribute>,
    pub chunk_size: usize,
}

pub fn seal<G: BilinearGroup>(
    scheme: &Scheme<G>,
    dem: &dyn Dem,
    pk: &PublicParams<G>,
    params: &SealParams<'_>,
    content: &[u8],
    rng: &mut dyn RngCore,
) -> Result<ContentPackage<G>, EnvelopeError> {
    if params.chunk_size == 0 {
        return Err(EnvelopeError::ChunkSize);
    }
    let group = scheme.group();
    let m = group.random_target(rng);
    let wrapped_key = scheme.encrypt(pk, &m, params.cover, params.attributes, rng)?;
    let key = ContentKey::derive(group, &m);
    let pieces: Vec<&[u8]> = if content.is_empty() {
        vec![&[]]
    } else {
        content.chunks(params.chunk_size).collect()
    };
    let chunks: Vec<Vec<u8>> = pieces
        .iter()
        .enumerate()
        .map(|(i, p)| dem.seal(&key, i as u64, p))
        .collect();
    let mut manifest = Manifest {
        name: params.name.to_string(),
        total_size: content.len() as u64,
        chunk_size: params.chunk_size as u64,
        content_digest: digest(content),
        chunk_digests: chunks.iter().map(|c| digest(c)).collect(),
        wrapped_key,
        tag: [0; DIGEST_LEN],
    };
    manifest.tag = mac(&key.0, &[&manifest.body(group)]);
    Ok(ContentPackage { manifest, chunks })
}

/// Unwraps the content key and returns the plaintext. A denial from the
/// scheme is reported as [`EnvelopeError::Denied`]; every other mismatch,
/// including a recovered key that does not authenticate the manifest, is an
/// [`EnvelopeError::Integrity`] failure.
pub fn open<G: BilinearGroup>(
    scheme: &Scheme<G>,
    dem: &dyn Dem,
    pk: &PublicParams<G>,
    pkg: &ContentPackage<G>,
    sk: &PrivateKey<G>,
) -> Result<Vec<u8>, EnvelopeError> {
    let group = scheme.group();
    let man = &pkg.manifest;
    let m = scheme.decrypt(pk, &man.wrapped_key, sk)?;
    let key = ContentKey::derive(group, &m);
    if !mac_verify(&key.0, &[&man.body(group)], &man.tag) {
        return Err(EnvelopeError::Integrity(IntegrityFault::Manifest));
    }
    pkg.verify_chunks().map_err(EnvelopeError::Integrity)?;
    let mut out = Vec::with_capacity(man.total_size as usize);
    for (i, c) in pkg.chunks.iter().enumerate() {
        let plain = dem
            .open(&key, i as u64, c)
            .map_err(|_| EnvelopeError::Integrity(IntegrityFault::Chunk(i)))?;
        out.extend_from_slice(&plain);
    }
    if out.len() as u64 != man.total_size || digest(&out) != man.content_digest {
        return Err(EnvelopeError::Integrity(IntegrityFault::Content));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectoryEntry {
    pub name: String,
    pub hash: Digest,
    /// Seconds since the Unix epoch.
    pub updated: u64,
    pub description: String,
    pub category: DataCategory,
}

impl DirectoryEntry {
    pub fn for_content(
        name: &str,
        content: &[u8],
        updated: u64,
        description: &str,
        category: DataCategory,
    ) -> DirectoryEntry {
        DirectoryEntry {
            name: name.to_string(),
            hash: digest(content),
            updated,
            description: description.to_string(),
            category,
        }
    }

    pub fn matches(&self, content: &[u8]) -> bool {
        digest(content) == self.hash
    }
}

pub trait Signer {
    fn issuer(&self) -> &str;
    fn sign(&self, message: &[u8]) -> Vec<u8>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Valid,
    UnknownIssuer,
    BadSignature,
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        *self == Verification::Valid
    }
}

/// Trusted issuer keys pre-loaded on a verifier.
pub trait TrustAnchors {
    fn verify(&self, issuer: &str, message: &[u8], signature: &[u8]) -> Verification;
}

/// HMAC-SHA256 stand-in for a signature scheme: signer and verifier share
/// the issuer key.
#[derive(Debug, Clone)]
pub struct KeyedDigestSigner {
    issuer: String,
    key: Vec<u8>,
}

impl KeyedDigestSigner {
    pub fn new(issuer: &str, key: &[u8]) -> Self {
        KeyedDigestSigner {
            issuer: issuer.to_string(),
            key: key.to_vec(),
        }
    }
}

impl Signer for KeyedDigestSigner {
    fn issuer(&self) -> &str {
        &self.issuer
    }

    fn sign(&self, message: &[u8]) -> Vec<u8> {
        mac(&self.key, &[message]).to_vec()
    }
}

#[derive(Debug, Clone, Default)]
pub struct KeyedDigestTrust {
    keys: BTreeMap<String, Vec<u8>>,
}

impl KeyedDigestTrust {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn trust(&mut self, issuer: &str, key: &[u8]) -> &mut Self {
        self.keys.insert(issuer.to_string(), key.to_vec());
        self
    }
}

impl TrustAnchors for KeyedDigestTrust {
    fn verify(&self, issuer: &str, message: &[u8], signature: &[u8]) -> Verification {
        match self.keys.get(issuer) {
            None => Verification::UnknownIssuer,
            Some(k) if mac_verify(k, &[message], signature) => Verification::Valid,
            Some(_) => Verification::BadSignature,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DirectoryError {
    #[error("duplicate directory entry {0:?}")]
    Duplicate(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedDirectory {
    entries: Vec<DirectoryEntry>,
    pub issuer: String,
    pub signature: Vec<u8>,
}

fn encode_entries(entries: &[DirectoryEntry]) -> Vec<u8> {
    let mut w = Writer::new();
    w.raw(DIRECTORY_MAGIC).u8(FORMAT_VERSION).u32(entries.len() as u32);
    for e in entries {
        w.str(&e.name)
            .raw(&e.hash)
            .u64(e.updated)
            .str(&e.description)
            .u8(e.category.code());
    }
    w.finish()
}

pub fn build_directory(
    mut entries: Vec<DirectoryEntry>,
    signer: &dyn Signer,
) -> Result<SignedDirectory, DirectoryError> {
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    if let Some(w) = entries.windows(2).find(|w| w[0].name == w[1].name) {
        return Err(DirectoryError::Duplicate(w[0].name.clone()));
    }
    let signature = signer.sign(&encode_entries(&entries));
    Ok(SignedDirectory {
        entries,
        issuer: signer.issuer().to_string(),
        signature,
    })
}

pub fn verify_directory(dir: &SignedDirectory, trust: &dyn TrustAnchors) -> Verification {
    trust.verify(&dir.issuer, &dir.encode_entries(), &dir.signature)
}

impl SignedDirectory {
    /// Entries sorted by name.
    pub fn entries(&self) -> &[DirectoryEntry] {
        &self.entries
    }

    /// Mutable access, e.g. to simulate tampering; the signature is not updated.
    pub fn entries_mut(&mut self) -> &mut Vec<DirectoryEntry> {
        &mut self.entries
    }

    pub fn lookup(&self, name: &str) -> Option<&DirectoryEntry> {
        self.entries
            .binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn encode_entries(&self) -> Vec<u8> {
        encode_entries(&self.entries)
    }

    /// Canonical entry encoding followed by the `issuer | signature` trailer.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(&self.encode_entries()).str(&self.issuer).bytes(&self.signature);
        w.finish()
    }

    /// Parses without verifying; entry order is kept as found so that a
    /// reordered file fails verification.
    pub fn decode(bytes: &[u8]) -> Result<SignedDirectory, DirectoryError> {
        let mut r = Reader::new(bytes);
        r.expect(DIRECTORY_MAGIC)?;
        let v = r.u8()?;
        if v != FORMAT_VERSION {
            return Err(DecodeError::Version(v).into());
        }
        let n = r.u32()? as usize;
        if n > r.remaining() {
            return Err(DecodeError::Truncated(r.position()).into());
        }
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let name = r.str()?.to_string();
            let hash = digest_from(&mut r)?;
            let updated = r.u64()?;
            let description = r.str()?.to_string();
            let code = r.u8()?;
            let category = DataCategory::from_code(code)
                .ok_or_else(|| DecodeError::Invalid(format!("category {code}")))?;
            entries.push(DirectoryEntry {
                name,
                hash,
                updated,
                description,
                category,
            });
        }
        let issuer = r.str()?.to_string();
        let signature = r.bytes()?.to_vec();
        r.finish()?;
        Ok(SignedDirectory {
            entries,
            issuer,
            signature,
        })
    }
}
