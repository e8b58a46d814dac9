//! Subscription lifecycle: pseudo-identities, key issuance over a secure
//! channel, the revocation ledger and the on-vehicle daily check.

mod ledger;

use std::fmt;

use hmac::{Hmac, Mac};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::Sha256;
use thiserror::Error;

pub use ledger::{Block, BlockBody, LedgerEntry, LedgerError, Revocation, RevocationLedger, Slot};

use crate::codec::Writer;
use crate::group::{hash_to_scalar, BilinearGroup, Scalar};
use crate::lsss::{compile, Policy};
use crate::scheme::{
    decode_private_key, encode_private_key, EncodingError, MasterKey, PrivateKey, PublicParams, Scheme,
    SchemeError,
};
use crate::time::{Calendar, Day, TimeError, TimeWindow};

const PID_LABEL: &[u8] = b"tsabe/pseudo-id/v1";
pub const NONCE_LEN: usize = 16;

/// Per-subscription identifier; the revocation unit on the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PseudoIdentity(Scalar);

impl PseudoIdentity {
    pub fn from_scalar(s: Scalar) -> Self {
        assert!(!s.is_zero(), "pseudo-identity must be nonzero");
        PseudoIdentity(s)
    }

    pub fn scalar(&self) -> Scalar {
        self.0
    }
}

impl fmt::Display for PseudoIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pid-{:016x}", self.0.value())
    }
}

impl PseudoIdentity {
    /// Parses the `pid-<hex>` display form under a group order.
    pub fn parse(text: &str, modulus: u64) -> Result<Self, String> {
        let hex = text.strip_prefix("pid-").ok_or("expected pid-<hex>")?;
        let v = u64::from_str_radix(hex, 16).map_err(|e| e.to_string())?;
        if v == 0 || v >= modulus {
            return Err(format!("{text} is not a nonzero scalar below {modulus}"));
        }
        Ok(PseudoIdentity(Scalar::new(v, modulus)))
    }
}

/// `hash_to_scalar(label | user | start | nonce)`.
pub fn derive_pseudo_id(user: &str, start: &Day, nonce: &[u8], modulus: u64) -> PseudoIdentity {
    let mut w = Writer::new();
    w.raw(PID_LABEL)
        .str(user)
        .u32(start.year())
        .u8(start.month())
        .u8(start.day())
        .bytes(nonce);
    PseudoIdentity(hash_to_scalar(&w.finish(), modulus))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("peer {0:?} failed authentication")]
    Unauthenticated(String),
    #[error("message failed its integrity check")]
    Integrity,
}

/// Authenticated channel test double: both ends are identified and every
/// message carries a session MAC.
#[derive(Debug, Clone)]
pub struct SecureChannel {
    pub provider: String,
    pub user: String,
    session: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sealed {
    pub from: String,
    pub to: String,
    pub payload: Vec<u8>,
    pub tag: Vec<u8>,
}

impl SecureChannel {
    /// `credential_ok` stands in for the user authentication step.
    pub fn establish(
        provider: &str,
        user: &str,
        credential_ok: bool,
        rng: &mut dyn RngCore,
    ) -> Result<SecureChannel, ChannelError> {
        if !credential_ok {
            return Err(ChannelError::Unauthenticated(user.to_string()));
        }
        let mut session = [0u8; 32];
        rng.fill_bytes(&mut session);
        Ok(SecureChannel {
            provider: provider.to_string(),
            user: user.to_string(),
            session,
        })
    }

    fn tag(&self, from: &str, to: &str, payload: &[u8]) -> Vec<u8> {
        let mut m = Hmac::<Sha256>::new_from_slice(&self.session).expect("any key length");
        let mut w = Writer::new();
        w.str(from).str(to).bytes(payload);
        m.update(&w.finish());
        m.finalize().into_bytes().to_vec()
    }

    pub fn send_to_user(&self, payload: Vec<u8>) -> Sealed {
        let tag = self.tag(&self.provider, &self.user, &payload);
        Sealed {
            from: self.provider.clone(),
            to: self.user.clone(),
            payload,
            tag,
        }
    }

    pub fn receive_as_user(&self, msg: &Sealed) -> Result<Vec<u8>, ChannelError> {
        if msg.from != self.provider || msg.to != self.user {
            return Err(ChannelError::Unauthenticated(msg.from.clone()));
        }
        if self.tag(&msg.from, &msg.to, &msg.payload) != msg.tag {
            return Err(ChannelError::Integrity);
        }
        Ok(msg.payload.clone())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubscribeError {
    #[error("subscription window starts {start}, before the provider clock {clock}")]
    InThePast { start: Day, clock: Day },
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubscriptionRecord<G: BilinearGroup> {
    pub user: String,
    pub window: TimeWindow,
    pub policy: Policy,
    pub pid: PseudoIdentity,
    /// The key as received by the user over the channel.
    pub key: PrivateKey<G>,
}

/// Third-party service provider holding the master key.
pub struct Provider<G: BilinearGroup> {
    pub name: String,
    scheme: Scheme<G>,
    pk: PublicParams<G>,
    mk: MasterKey,
    clock: Day,
    rng: ChaCha20Rng,
}

impl<G: BilinearGroup> Provider<G> {
    pub fn new(name: &str, scheme: Scheme<G>, pk: PublicParams<G>, mk: MasterKey, clock: Day, seed: u64) -> Self {
        Provider {
            name: name.to_string(),
            scheme,
            pk,
            mk,
            clock,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn clock(&self) -> Day {
        self.clock
    }

    pub fn set_clock(&mut self, day: Day) {
        self.clock = day;
    }

    pub fn public_params(&self) -> &PublicParams<G> {
        &self.pk
    }

    pub fn scheme(&self) -> &Scheme<G> {
        &self.scheme
    }

    /// Issues a key for `window` under `policy` with a fresh pseudo-identity
    /// and delivers it over an authenticated channel.
    pub fn subscribe(
        &mut self,
        user: &str,
        window: &TimeWindow,
        policy: &Policy,
    ) -> Result<SubscriptionRecord<G>, SubscribeError> {
        if window.start < self.clock {
            return Err(SubscribeError::InThePast {
                start: window.start,
                clock: self.clock,
            });
        }
        let group = self.scheme.group();
        let mut nonce = [0u8; NONCE_LEN];
        self.rng.fill_bytes(&mut nonce);
        let pid = derive_pseudo_id(user, &window.start, &nonce, group.order());
        let cover = Calendar::Gregorian.set_cover(window)?;
        let access = compile(policy, group.order());
        let key = self
            .scheme
            .keygen(&self.pk, &self.mk, pid.scalar(), &cover, &access, &mut self.rng)?;
        let channel = SecureChannel::establish(&self.name, user, true, &mut self.rng)?;
        let msg = channel.send_to_user(encode_private_key(group, &key));
        let received = decode_private_key(group, &channel.receive_as_user(&msg)?)?;
        Ok(SubscriptionRecord {
            user: user.to_string(),
            window: *window,
            policy: policy.clone(),
            pid,
            key: received,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Active,
    Revoked,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Active => "active",
            Status::Revoked => "revoked",
        })
    }
}

/// Infotainment agent on a vehicle; queries the ledger at most once per
/// simulated day.
#[derive(Debug, Clone)]
pub struct Agent {
    pid: PseudoIdentity,
    verdict: Option<(Day, Status)>,
    queries: u64,
}

impl Agent {
    pub fn new(pid: PseudoIdentity) -> Self {
        Agent {
            pid,
            verdict: None,
            queries: 0,
        }
    }

    pub fn pid(&self) -> PseudoIdentity {
        self.pid
    }

    /// Installs a re-issued identity and drops the cached verdict.
    pub fn reissue(&mut self, pid: PseudoIdentity) {
        self.pid = pid;
        self.verdict = None;
    }

    /// Number of ledger queries made so far.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn daily_check(&mut self, ledger: &RevocationLedger, clock: Day) -> Status {
        if let Some((day, status)) = self.verdict {
            if day == clock {
                return status;
            }
        }
        self.queries += 1;
        let status = if ledger.is_revoked(&self.pid) {
            Status::Revoked
        } else {
            Status::Active
        };
        self.verdict = Some((clock, status));
        status
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::TransparentSuite;
    use crate::lsss::{parse_attribute_set, Attribute};
    use crate::scheme::Mode;
    use crate::time::TimeNode;
    use std::collections::BTreeSet;

    fn day(s: &str) -> Day {
        Calendar::Gregorian.parse_day(s).unwrap()
    }

    fn provider() -> Provider<TransparentSuite> {
        let g = TransparentSuite::default();
        let scheme = Scheme::new(g, Mode::Repaired);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let universe: Vec<Attribute> = ["gold", "silver"].iter().map(|a| Attribute::new(*a).unwrap()).collect();
        let (pk, mk) = scheme.setup(&universe, 4, &mut rng).unwrap();
        Provider::new("provider", scheme, pk, mk, day("2022-06-15"), 5)
    }

    #[test]
    fn pseudo_ids() {
        let p = (1u64 << 31) - 1;
        let d = day("2022-07-01");
        assert_eq!(derive_pseudo_id("alice", &d, b"n", p), derive_pseudo_id("alice", &d, b"n", p));
        assert_ne!(derive_pseudo_id("alice", &d, b"n", p), derive_pseudo_id("alice", &d, b"m", p));
        let mut seen = BTreeSet::new();
        let mut start = day("2000-01-01");
        for _ in 0..10_000 {
            let pid = derive_pseudo_id("alice", &start, b"n", p);
            assert!(!pid.scalar().is_zero());
            assert!(seen.insert(pid.scalar().value()));
            start = Calendar::Gregorian.next_day(&start).unwrap();
        }
        let pid = derive_pseudo_id("bob", &d, b"", p);
        assert_eq!(PseudoIdentity::parse(&pid.to_string(), p).unwrap(), pid);
        assert!(PseudoIdentity::parse("pid-0", p).is_err());
    }

    #[test]
    fn subscription_issues_covering_key() {
        let mut prov = provider();
        let policy: Policy = "gold".parse().unwrap();
        let w = Calendar::Gregorian.parse_window("2022-07-01..2022-09-02").unwrap();
        let rec = prov.subscribe("alice", &w, &policy).unwrap();
        assert_eq!(rec.key.d_time.len(), 4);
        assert_eq!(rec.key.id, rec.pid.scalar());

        let one = Calendar::Gregorian.parse_window("2022-07-04..2022-07-04").unwrap();
        assert_eq!(prov.subscribe("alice", &one, &policy).unwrap().key.d_time.len(), 1);

        let g = *prov.scheme().group();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let m = g.random_target(&mut rng);
        let cover = Calendar::Gregorian.cover_from_nodes([TimeNode::month(2022, 8)]).unwrap();
        let ct = prov
            .scheme()
            .encrypt(prov.public_params(), &m, &cover, &parse_attribute_set("gold").unwrap(), &mut rng)
            .unwrap();
        assert_eq!(prov.scheme().decrypt(prov.public_params(), &ct, &rec.key).unwrap(), m);

        let again = prov.subscribe("alice", &w, &policy).unwrap();
        assert_ne!(again.pid, rec.pid);

        let past = Calendar::Gregorian.parse_window("2022-06-01..2022-06-30").unwrap();
        assert!(matches!(
            prov.subscribe("alice", &past, &policy),
            Err(SubscribeError::InThePast { .. })
        ));
    }

    #[test]
    fn channel_flags() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(SecureChannel::establish("p", "u", false, &mut rng).is_err());
        let ch = SecureChannel::establish("p", "u", true, &mut rng).unwrap();
        let mut msg = ch.send_to_user(b"key".to_vec());
        assert_eq!(ch.receive_as_user(&msg).unwrap(), b"key");
        msg.payload[0] ^= 1;
        assert_eq!(ch.receive_as_user(&msg), Err(ChannelError::Integrity));
    }

    fn pid(n: u64) -> PseudoIdentity {
        PseudoIdentity::from_scalar(Scalar::new(n, 101))
    }

    #[test]
    fn revoke_check_and_reissue() {
        let mut ledger = RevocationLedger::new();
        let mut agent = Agent::new(pid(7));
        assert_eq!(agent.daily_check(&ledger, day("2022-08-01")), Status::Active);
        assert!(matches!(
            ledger.revoke(&pid(7), day("2022-09-02"), day("2022-08-01")).unwrap(),
            Revocation::Appended(_)
        ));
        assert_eq!(agent.daily_check(&ledger, day("2022-08-01")), Status::Active);
        assert_eq!(agent.daily_check(&ledger, day("2022-08-02")), Status::Revoked);
        assert_eq!(agent.queries(), 2);
        assert!(matches!(
            ledger.revoke(&pid(7), day("2022-09-02"), day("2022-08-02")).unwrap(),
            Revocation::AlreadyRevoked(_)
        ));
        assert_eq!(ledger.entries().count(), 1);
        agent.reissue(pid(8));
        assert_eq!(agent.daily_check(&ledger, day("2022-08-02")), Status::Active);
        ledger.verify().unwrap();
    }

    #[test]
    fn pruning_is_strict_and_verifiable() {
        let mut ledger = RevocationLedger::new();
        assert_eq!(ledger.prune(day("2022-01-01")).unwrap(), 0);
        ledger.revoke(&pid(1), day("2022-09-02"), day("2022-08-01")).unwrap();
        ledger.revoke(&pid(2), day("2022-12-31"), day("2022-08-03")).unwrap();
        assert_eq!(ledger.prune(day("2022-09-02")).unwrap(), 0);
        assert!(ledger.is_revoked(&pid(1)));
        assert_eq!(ledger.prune(day("2022-09-03")).unwrap(), 1);
        assert!(!ledger.is_revoked(&pid(1)));
        assert!(ledger.is_revoked(&pid(2)));
        ledger.verify().unwrap();

        let bytes = ledger.encode();
        let back = RevocationLedger::decode(&bytes).unwrap();
        assert_eq!(back, ledger);
        back.verify().unwrap();
        assert!(ledger.revoke(&pid(3), day("2023-01-01"), day("2022-01-01")).is_err());
    }

    #[test]
    fn any_entry_byte_mutation_breaks_the_chain() {
        let mut ledger = RevocationLedger::new();
        for i in 1..4 {
            ledger.revoke(&pid(i), day("2022-09-02"), day("2022-08-01")).unwrap();
        }
        let bytes = ledger.encode();
        for pos in 9..bytes.len() {
            for bit in 0..8 {
                let mut b = bytes.clone();
                b[pos] ^= 1 << bit;
                let ok = RevocationLedger::decode(&b).map(|l| l.verify().is_ok()).unwrap_or(false);
                assert!(!ok, "mutation at byte {pos} bit {bit} went unnoticed");
            }
        }
    }
}
