//! Time-bounded, attribute-based content protection for vehicular named-data
//! networks.
//!
//! The pieces, bottom-up: a bilinear group abstraction ([`group`]), the
//! day/month/year time tree ([`time`]), monotone span programs
//! ([`lsss`]), the ciphertext-policy scheme itself ([`scheme`]), hybrid
//! content packaging ([`envelope`]), a discrete-event network simulator
//! ([`sim`]) and the subscription and revocation ledger ([`subscription`]).

pub mod codec;
pub mod envelope;
pub mod group;
pub mod lsss;
pub mod scheme;
pub mod sim;
pub mod subscription;
pub mod time;
