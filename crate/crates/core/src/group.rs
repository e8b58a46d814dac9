//! Symmetric bilinear group algebra.
//!
//! [`BilinearGroup`] is the contract the scheme is written against. The only
//! shipped instantiation is [`TransparentSuite`], where every element carries
//! its discrete logarithm: `g^x` is stored as `x`, `e(g,g)^y` as `y`, and the
//! pairing multiplies exponents mod `p`. It hides nothing and exists so that
//! every algebraic identity in the scheme can be checked exactly.
//!
//! [`Metered`] wraps a group and counts pairings, exponentiations and
//! multiplications for one measurement scope.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Version byte leading every canonical element encoding.
pub const ELEMENT_ENCODING_VERSION: u8 = 1;
/// Suite tag of the transparent instantiation.
pub const TRANSPARENT_SUITE_TAG: u8 = 1;
/// Mersenne prime 2^31 - 1, the default transparent modulus.
pub const DEFAULT_MODULUS: u64 = 2_147_483_647;

const HASH_TO_SCALAR_LABEL: &[u8] = b"tsabe/hash-to-scalar/v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("modulus {0} is not an odd prime below 2^63")]
    InvalidModulus(u64),
    #[error("element belongs to suite {found}, expected {expected}")]
    SuiteMismatch { expected: String, found: String },
    #[error("malformed element encoding: {0}")]
    Encoding(String),
    #[error("unknown suite descriptor {0:?}")]
    UnknownSuite(String),
}

/// An element of Z_p.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    value: u64,
    modulus: u64,
}

impl Scalar {
    pub fn new(value: u64, modulus: u64) -> Self {
        Scalar {
            value: value % modulus,
            modulus,
        }
    }

    /// Reduces a signed integer, so `from_i64(-1, p)` is `p - 1`.
    pub fn from_i64(value: i64, modulus: u64) -> Self {
        let m = modulus as i128;
        let v = (value as i128).rem_euclid(m);
        Scalar::new(v as u64, modulus)
    }

    pub fn zero(modulus: u64) -> Self {
        Scalar::new(0, modulus)
    }

    pub fn one(modulus: u64) -> Self {
        Scalar::new(1, modulus)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(&self, mut exp: u64) -> Scalar {
        let mut base = *self;
        let mut acc = Scalar::one(self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow(self.modulus - 2))
        }
    }

    fn check(&self, other: &Scalar) {
        assert_eq!(
            self.modulus, other.modulus,
            "scalar arithmetic across different moduli"
        );
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.check(&rhs);
        let s = (self.value as u128 + rhs.value as u128) % self.modulus as u128;
        Scalar::new(s as u64, self.modulus)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(self.modulus - self.value, self.modulus)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.check(&rhs);
        let m = (self.value as u128 * rhs.value as u128) % self.modulus as u128;
        Scalar::new(m as u64, self.modulus)
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(mut iter: I) -> Scalar {
        let first = iter.next().expect("sum of an empty scalar iterator");
        iter.fold(first, |a, b| a + b)
    }
}

/// Operation counts for one measurement scope.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub pairings: u64,
    pub source_exponentiations: u64,
    pub target_exponentiations: u64,
    pub multiplications: u64,
}

/// A symmetric (Type-1) bilinear group `e: G1 x G1 -> GT` of prime order.
pub trait BilinearGroup {
    type Source: Clone + PartialEq + fmt::Debug;
    type Target: Clone + PartialEq + fmt::Debug;

    /// Stable descriptor, e.g. `transparent:101`.
    fn suite_id(&self) -> String;
    fn order(&self) -> u64;
    fn generator(&self) -> Self::Source;
    fn source_identity(&self) -> Self::Source;
    fn target_identity(&self) -> Self::Target;

    fn source_mul(&self, a: &Self::Source, b: &Self::Source) -> Self::Source;
    fn source_inv(&self, a: &Self::Source) -> Self::Source;
    fn source_exp(&self, a: &Self::Source, s: &Scalar) -> Self::Source;
    fn target_mul(&self, a: &Self::Target, b: &Self::Target) -> Self::Target;
    fn target_inv(&self, a: &Self::Target) -> Self::Target;
    fn target_exp(&self, a: &Self::Target, s: &Scalar) -> Self::Target;

    /// Mixing suites is a usage error; see [`BilinearGroup::try_pair`].
    fn pair(&self, a: &Self::Source, b: &Self::Source) -> Self::Target;
    fn try_pair(&self, a: &Self::Source, b: &Self::Source) -> Result<Self::Target, GroupError>;

    fn random_source(&self, rng: &mut dyn RngCore) -> Self::Source;
    fn random_target(&self, rng: &mut dyn RngCore) -> Self::Target;

    fn encode_source(&self, a: &Self::Source) -> Vec<u8>;
    fn decode_source(&self, bytes: &[u8]) -> Result<Self::Source, GroupError>;
    fn encode_target(&self, a: &Self::Target) -> Vec<u8>;
    fn decode_target(&self, bytes: &[u8]) -> Result<Self::Target, GroupError>;
    /// Width of every canonical element encoding of this suite.
    fn element_len(&self) -> usize;

    /// Discrete log w.r.t. `g`, when the suite exposes it.
    fn source_log(&self, _a: &Self::Source) -> Option<Scalar> {
        None
    }

    /// Discrete log w.r.t. `e(g,g)`, when the suite exposes it.
    fn target_log(&self, _a: &Self::Target) -> Option<Scalar> {
        None
    }

    fn scalar(&self, value: u64) -> Scalar {
        Scalar::new(value, self.order())
    }

    fn random_scalar(&self, rng: &mut dyn RngCore) -> Scalar {
        uniform_scalar(rng, self.order())
    }

    fn random_nonzero_scalar(&self, rng: &mut dyn RngCore) -> Scalar {
        loop {
            let s = self.random_scalar(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// Deterministic map from bytes into `[1, p)`.
    fn hash_to_scalar(&self, bytes: &[u8]) -> Scalar {
        hash_to_scalar(bytes, self.order())
    }
}

/// Uniform element of Z_p.
pub fn uniform_scalar(rng: &mut dyn RngCore, modulus: u64) -> Scalar {
    // rejection sampling on the smallest covering power of two
    let bits = 64 - (modulus - 1).leading_zeros();
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    loop {
        let v = rng.next_u64() & mask;
        if v < modulus {
            return Scalar::new(v, modulus);
        }
    }
}

/// SHA-256 of `label || counter || input`, reduced from 128 bits; a zero
/// result bumps the counter and retries.
pub fn hash_to_scalar(bytes: &[u8], modulus: u64) -> Scalar {
    let mut counter: u32 = 0;
    loop {
        let mut h = Sha256::new();
        h.update(HASH_TO_SCALAR_LABEL);
        h.update(counter.to_be_bytes());
        h.update(bytes);
        let digest = h.finalize();
        let mut wide = [0u8; 16];
        wide.copy_from_slice(&digest[..16]);
        let v = (u128::from_be_bytes(wide) % modulus as u128) as u64;
        if v != 0 {
            return Scalar::new(v, modulus);
        }
        counter += 1;
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `G1` element of the transparent suite: stores `log_g`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransparentSource {
    modulus: u64,
    log: u64,
}

/// `GT` element of the transparent suite: stores `log_{e(g,g)}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransparentTarget {
    modulus: u64,
    log: u64,
}

impl TransparentSource {
    pub fn log(&self) -> Scalar {
        Scalar::new(self.log, self.modulus)
    }
}

impl TransparentTarget {
    pub fn log(&self) -> Scalar {
        Scalar::new(self.log, self.modulus)
    }
}

impl fmt::Debug for TransparentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g^{}", self.log)
    }
}

impl fmt::Debug for TransparentTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e(g,g)^{}", self.log)
    }
}

/// Exponent-tracking instantiation. Insecure by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransparentSuite {
    modulus: u64,
}

impl Default for TransparentSuite {
    fn default() -> Self {
        TransparentSuite {
            modulus: DEFAULT_MODULUS,
        }
    }
}

impl TransparentSuite {
    pub fn new(modulus: u64) -> Result<Self, GroupError> {
        if !(3..1 << 63).contains(&modulus) || !is_prime(modulus) {
            return Err(GroupError::InvalidModulus(modulus));
        }
        Ok(TransparentSuite { modulus })
    }

    /// Parses `transparent:<p>`.
    pub fn from_descriptor(text: &str) -> Result<Self, GroupError> {
        let rest = text
            .strip_prefix("transparent:")
            .ok_or_else(|| GroupError::UnknownSuite(text.to_string()))?;
        let p = rest
            .parse::<u64>()
            .map_err(|_| GroupError::UnknownSuite(text.to_string()))?;
        TransparentSuite::new(p)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `g^log`.
    pub fn source_from_log(&self, log: Scalar) -> TransparentSource {
        assert_eq!(log.modulus(), self.modulus, "scalar from another suite");
        TransparentSource {
            modulus: self.modulus,
            log: log.value(),
        }
    }

    /// `e(g,g)^log`.
    pub fn target_from_log(&self, log: Scalar) -> TransparentTarget {
        assert_eq!(log.modulus(), self.modulus, "scalar from another suite");
        TransparentTarget {
            modulus: self.modulus,
            log: log.value(),
        }
    }

    fn own_source(&self, a: &TransparentSource) -> Scalar {
        assert_eq!(a.modulus, self.modulus, "source element from another suite");
        a.log()
    }

    fn own_target(&self, a: &TransparentTarget) -> Scalar {
        assert_eq!(a.modulus, self.modulus, "target element from another suite");
        a.log()
    }

    fn encode_log(&self, log: u64) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.element_len());
        out.push(ELEMENT_ENCODING_VERSION);
        out.push(TRANSPARENT_SUITE_TAG);
        out.extend_from_slice(&self.modulus.to_be_bytes());
        out.extend_from_slice(&log.to_be_bytes());
        out
    }

    fn decode_log(&self, bytes: &[u8]) -> Result<u64, GroupError> {
        if bytes.len() != self.element_len() {
            return Err(GroupError::Encoding(format!(
                "expected {} bytes, got {}",
                self.element_len(),
                bytes.len()
            )));
        }
        if bytes[0] != ELEMENT_ENCODING_VERSION {
            return Err(GroupError::Encoding(format!("version {}", bytes[0])));
        }
        if bytes[1] != TRANSPARENT_SUITE_TAG {
            return Err(GroupError::Encoding(format!("suite tag {}", bytes[1])));
        }
        let modulus = u64::from_be_bytes(bytes[2..10].try_into().unwrap());
        if modulus != self.modulus {
            return Err(GroupError::SuiteMismatch {
                expected: self.suite_id(),
                found: format!("transparent:{modulus}"),
            });
        }
        let log = u64::from_be_bytes(bytes[10..18].try_into().unwrap());
        if log >= modulus {
            return Err(GroupError::Encoding("exponent not reduced".into()));
        }
        Ok(log)
    }
}

impl BilinearGroup for TransparentSuite {
    type Source = TransparentSource;
    type Target = TransparentTarget;

    fn suite_id(&self) -> String {
        format!("transparent:{}", self.modulus)
    }

    fn order(&self) -> u64 {
        self.modulus
    }

    fn generator(&self) -> TransparentSource {
        self.source_from_log(Scalar::one(self.modulus))
    }

    fn source_identity(&self) -> TransparentSource {
        self.source_from_log(Scalar::zero(self.modulus))
    }

    fn target_identity(&self) -> TransparentTarget {
        self.target_from_log(Scalar::zero(self.modulus))
    }

    fn source_mul(&self, a: &TransparentSource, b: &TransparentSource) -> TransparentSource {
        self.source_from_log(self.own_source(a) + self.own_source(b))
    }

    fn source_inv(&self, a: &TransparentSource) -> TransparentSource {
        self.source_from_log(-self.own_source(a))
    }

    fn source_exp(&self, a: &TransparentSource, s: &Scalar) -> TransparentSource {
        self.source_from_log(self.own_source(a) * *s)
    }

    fn target_mul(&self, a: &TransparentTarget, b: &TransparentTarget) -> TransparentTarget {
        self.target_from_log(self.own_target(a) + self.own_target(b))
    }

    fn target_inv(&self, a: &TransparentTarget) -> TransparentTarget {
        self.target_from_log(-self.own_target(a))
    }

    fn target_exp(&self, a: &TransparentTarget, s: &Scalar) -> TransparentTarget {
        self.target_from_log(self.own_target(a) * *s)
    }

    fn pair(&self, a: &TransparentSource, b: &TransparentSource) -> TransparentTarget {
        self.try_pair(a, b).expect("pairing across suites")
    }

    fn try_pair(
        &self,
        a: &TransparentSource,
        b: &TransparentSource,
    ) -> Result<TransparentTarget, GroupError> {
        for m in [a.modulus, b.modulus] {
            if m != self.modulus {
                return Err(GroupError::SuiteMismatch {
                    expected: self.suite_id(),
                    found: format!("transparent:{m}"),
                });
            }
        }
        Ok(self.target_from_log(a.log() * b.log()))
    }

    fn random_source(&self, rng: &mut dyn RngCore) -> TransparentSource {
        self.source_from_log(self.random_scalar(rng))
    }

    fn random_target(&self, rng: &mut dyn RngCore) -> TransparentTarget {
        self.target_from_log(self.random_scalar(rng))
    }

    fn encode_source(&self, a: &TransparentSource) -> Vec<u8> {
        self.encode_log(self.own_source(a).value())
    }

    fn decode_source(&self, bytes: &[u8]) -> Result<TransparentSource, GroupError> {
        let log = self.decode_log(bytes)?;
        Ok(TransparentSource {
            modulus: self.modulus,
            log,
        })
    }

    fn encode_target(&self, a: &TransparentTarget) -> Vec<u8> {
        self.encode_log(self.own_target(a).value())
    }

    fn decode_target(&self, bytes: &[u8]) -> Result<TransparentTarget, GroupError> {
        let log = self.decode_log(bytes)?;
        Ok(TransparentTarget {
            modulus: self.modulus,
            log,
        })
    }

    fn element_len(&self) -> usize {
        18
    }

    fn source_log(&self, a: &TransparentSource) -> Option<Scalar> {
        Some(self.own_source(a))
    }

    fn target_log(&self, a: &TransparentTarget) -> Option<Scalar> {
        Some(self.own_target(a))
    }
}

/// Counting view over a group. Counters only grow until [`Metered::reset`].
pub struct Metered<'a, G: BilinearGroup> {
    group: &'a G,
    counters: Cell<OpCounters>,
}

impl<'a, G: BilinearGroup> Metered<'a, G> {
    pub fn new(group: &'a G) -> Self {
        Metered {
            group,
            counters: Cell::new(OpCounters::default()),
        }
    }

    pub fn group(&self) -> &'a G {
        self.group
    }

    pub fn counters(&self) -> OpCounters {
        self.counters.get()
    }

    pub fn reset(&self) {
        self.counters.set(OpCounters::default());
    }

    fn bump(&self, f: impl FnOnce(&mut OpCounters)) {
        let mut c = self.counters.get();
        f(&mut c);
        self.counters.set(c);
    }

    pub fn pair(&self, a: &G::Source, b: &G::Source) -> G::Target {
        self.bump(|c| c.pairings += 1);
        self.group.pair(a, b)
    }

    pub fn source_exp(&self, a: &G::Source, s: &Scalar) -> G::Source {
        self.bump(|c| c.source_exponentiations += 1);
        self.group.source_exp(a, s)
    }

    pub fn target_exp(&self, a: &G::Target, s: &Scalar) -> G::Target {
        self.bump(|c| c.target_exponentiations += 1);
        self.group.target_exp(a, s)
    }

    pub fn source_mul(&self, a: &G::Source, b: &G::Source) -> G::Source {
        self.bump(|c| c.multiplications += 1);
        self.group.source_mul(a, b)
    }

    pub fn target_mul(&self, a: &G::Target, b: &G::Target) -> G::Target {
        self.bump(|c| c.multiplications += 1);
        self.group.target_mul(a, b)
    }

    pub fn source_inv(&self, a: &G::Source) -> G::Source {
        self.group.source_inv(a)
    }

    pub fn target_inv(&self, a: &G::Target) -> G::Target {
        self.group.target_inv(a)
    }

    /// `g^s`.
    pub fn g_to(&self, s: &Scalar) -> G::Source {
        self.source_exp(&self.group.generator(), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn p101() -> TransparentSuite {
        TransparentSuite::new(101).unwrap()
    }

    #[test]
    fn pairing_multiplies_exponents() {
        let s = p101();
        let g2 = s.source_from_log(s.scalar(2));
        let g3 = s.source_from_log(s.scalar(3));
        assert_eq!(s.pair(&g2, &g3), s.target_from_log(s.scalar(6)));
        // 50 * 3 = 150 = 49 mod 101
        let g50 = s.source_from_log(s.scalar(50));
        assert_eq!(s.target_log(&s.pair(&g50, &g3)).unwrap().value(), 49);
    }

    #[test]
    fn pairing_with_identity_is_identity() {
        let s = p101();
        assert_eq!(
            s.pair(&s.generator(), &s.source_identity()),
            s.target_identity()
        );
    }

    #[test]
    fn pairing_is_symmetric_and_nondegenerate() {
        let s = TransparentSuite::default();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let g = s.generator();
        for _ in 0..50 {
            let x = s.random_scalar(&mut rng);
            let gx = s.source_exp(&g, &x);
            assert_eq!(s.pair(&gx, &g), s.pair(&g, &gx));
        }
        assert_ne!(s.pair(&g, &g), s.target_identity());
    }

    #[test]
    fn exponentiation_edge_cases() {
        let s = p101();
        let g3 = s.source_from_log(s.scalar(3));
        assert_eq!(s.source_exp(&g3, &s.scalar(4)).log().value(), 12);
        assert_eq!(s.source_exp(&g3, &s.scalar(0)), s.source_identity());
        assert_eq!(s.source_exp(&g3, &s.scalar(1)), g3);
        let t = s.target_from_log(s.scalar(9));
        assert_eq!(s.target_exp(&t, &s.scalar(0)), s.target_identity());
    }

    #[test]
    fn group_laws() {
        let s = p101();
        let a = s.source_from_log(s.scalar(40));
        let b = s.source_from_log(s.scalar(77));
        let c = s.source_from_log(s.scalar(5));
        assert_eq!(
            s.source_mul(&s.source_mul(&a, &b), &c),
            s.source_mul(&a, &s.source_mul(&b, &c))
        );
        assert_eq!(s.source_mul(&a, &s.source_identity()), a);
        assert_eq!(s.source_mul(&a, &s.source_inv(&a)), s.source_identity());
        let t = s.target_from_log(s.scalar(33));
        assert_eq!(s.target_mul(&t, &s.target_inv(&t)), s.target_identity());
    }

    #[test]
    fn scalar_inverse() {
        let five = Scalar::new(5, 101);
        // 5 * 81 = 405 = 4 * 101 + 1
        assert_eq!(five.inverse().unwrap().value(), 81);
        assert!(Scalar::zero(101).inverse().is_none());
        assert_eq!(Scalar::from_i64(-3, 101).value(), 98);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(TransparentSuite::new(100).is_err());
        assert!(TransparentSuite::new(2).is_err());
        assert!(TransparentSuite::new(DEFAULT_MODULUS).is_ok());
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn mismatched_suites_are_rejected() {
        let a = p101();
        let b = TransparentSuite::new(103).unwrap();
        let err = a.try_pair(&a.generator(), &b.generator()).unwrap_err();
        assert!(matches!(err, GroupError::SuiteMismatch { .. }));
        let bytes = b.encode_source(&b.generator());
        assert!(a.decode_source(&bytes).is_err());
    }

    #[test]
    fn element_encoding_layout() {
        let s = p101();
        let e = s.source_from_log(s.scalar(42));
        let bytes = s.encode_source(&e);
        assert_eq!(bytes.len(), 18);
        assert_eq!(bytes[0], ELEMENT_ENCODING_VERSION);
        assert_eq!(bytes[1], TRANSPARENT_SUITE_TAG);
        assert_eq!(&bytes[2..10], &101u64.to_be_bytes());
        assert_eq!(&bytes[10..], &42u64.to_be_bytes());
        assert_eq!(s.decode_source(&bytes).unwrap(), e);
    }

    #[test]
    fn hash_to_scalar_contract() {
        let p = DEFAULT_MODULUS;
        assert_eq!(hash_to_scalar(b"abc", p), hash_to_scalar(b"abc", p));
        assert_eq!(hash_to_scalar(b"", p).value(), EMPTY_INPUT_GOLDEN);
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let mut buf = [0u8; 12];
            rng.fill_bytes(&mut buf);
            assert!(!hash_to_scalar(&buf, p).is_zero());
        }
        // with p = 3 a third of the digests reduce to 0 and must be resampled
        for i in 0u32..300 {
            assert!(!hash_to_scalar(&i.to_be_bytes(), 3).is_zero());
        }
    }

    // Computed once from the SHA-256 contract above and frozen.
    const EMPTY_INPUT_GOLDEN: u64 = 1_751_941_871;

    #[test]
    fn metered_counts() {
        let s = p101();
        let m = Metered::new(&s);
        let g = s.generator();
        let gx = m.g_to(&s.scalar(4));
        m.pair(&g, &gx);
        m.pair(&gx, &gx);
        let t = m.target_mul(&s.target_identity(), &s.target_identity());
        m.target_exp(&t, &s.scalar(2));
        let c = m.counters();
        assert_eq!(c.pairings, 2);
        assert_eq!(c.source_exponentiations, 1);
        assert_eq!(c.target_exponentiations, 1);
        assert_eq!(c.multiplications, 1);
        m.reset();
        assert_eq!(m.counters(), OpCounters::default());
    }
}
