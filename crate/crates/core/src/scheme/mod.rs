//! Time-sensitive key-policy ABE.
//!
//! Keys carry an LSSS access structure and a set of time-tree nodes; a
//! ciphertext carries an attribute set and its own set of time nodes.
//! Decryption needs the attributes to satisfy the key policy and at least one
//! node string shared exactly between the two covers.
//!
//! Two [`Mode`]s are provided:
//!
//! * [`Mode::PaperFaithful`] uses `D_i' = (g h_rho(i)^beta)^(lambda_i ID)` and
//!   `k_y = (g^beta h_y^beta)^-1`. The decryption equation does not return the
//!   message; [`audit`] reports by how much.
//! * [`Mode::Repaired`] uses `D_i' = g^(lambda_i ID)` and `k_y = g^-beta`, under
//!   which every line of the correctness chain holds and decryption is exact.
//!
//! In both modes the ciphertext has no component that depends on its
//! attribute set, so attribute enforcement is the procedural satisfiability
//! check in [`Scheme::decrypt`], not a cryptographic property.

mod audit;
mod encoding;
mod measure;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use thiserror::Error;

use crate::group::{BilinearGroup, Metered, OpCounters, Scalar};
use crate::lsss::{self, AccessStructure, Attribute, Coefficients};
use crate::time::{TimeCover, TimeNode};

pub use audit::{AuditError, AuditReport, AuditStep, StepKind};
pub use encoding::{
    decode_ciphertext, decode_master_key, decode_private_key, decode_public_params,
    encode_ciphertext, encode_master_key, encode_private_key, encode_public_params, peek_header,
    ArtifactKind, EncodingError, Header,
};
pub use measure::{bench, measure, predicted, BenchParams, BenchReport, BenchRow, ElementCount, MeasureKind, Measurement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    PaperFaithful,
    Repaired,
}

impl Mode {
    pub fn code(self) -> u8 {
        match self {
            Mode::PaperFaithful => 1,
            Mode::Repaired => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Mode> {
        match code {
            1 => Some(Mode::PaperFaithful),
            2 => Some(Mode::Repaired),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PaperFaithful => "paper",
            Mode::Repaired => "repaired",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" | "paper-faithful" => Ok(Mode::PaperFaithful),
            "repaired" => Ok(Mode::Repaired),
            other => Err(format!("unknown mode {other:?} (expected paper|repaired)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("attribute universe is empty")]
    EmptyUniverse,
    #[error("attribute {0} appears twice in the universe")]
    DuplicateAttribute(Attribute),
    #[error("time tree depth must be at least 2, got {0}")]
    DepthTooSmall(usize),
    #[error("pseudo-identity must be nonzero")]
    ZeroIdentity,
    #[error("attribute {0} is not in the universe")]
    UnknownAttribute(Attribute),
    #[error("time node {node} has depth {len}, tree allows fewer than {depth}")]
    NodeTooDeep { node: TimeNode, len: usize, depth: usize },
    #[error("time cover is empty")]
    EmptyCover,
    #[error("{what} was produced in {found} mode, scheme runs in {expected} mode")]
    ModeMismatch {
        what: &'static str,
        expected: Mode,
        found: Mode,
    },
    #[error("{what} belongs to suite {found}, scheme uses {expected}")]
    SuiteMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },
}

/// Reason for a `⊥` result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denial {
    /// The ciphertext attributes do not satisfy the key's access structure.
    AttributesUnsatisfied,
    /// No node string appears in both the key cover and the ciphertext cover.
    TimeNotCovered,
}

impl fmt::Display for Denial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Denial::AttributesUnsatisfied => "attributes do not satisfy the key policy",
            Denial::TimeNotCovered => "no key time node matches a ciphertext time node",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecryptError {
    #[error("access denied: {0}")]
    Denied(Denial),
    #[error(transparent)]
    Usage(#[from] SchemeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublicParams<G: BilinearGroup> {
    pub mode: Mode,
    pub suite: String,
    /// Attribute `universe[i]` is bound to `h_{i+1}`.
    pub universe: Vec<Attribute>,
    /// Tree depth `T`, root included.
    pub depth: usize,
    pub g: G::Source,
    pub g_alpha: G::Source,
    pub g_alpha_sq: G::Source,
    pub g_inv_alpha: G::Source,
    pub g_beta: G::Source,
    pub g_beta_sq: G::Source,
    pub e_gg_alpha: G::Target,
    /// `h_1^beta ... h_U^beta`.
    pub h_beta: Vec<G::Source>,
    /// `V_0 ... V_T`.
    pub v: Vec<G::Source>,
}

impl<G: BilinearGroup> PublicParams<G> {
    pub fn attribute_index(&self, a: &Attribute) -> Option<usize> {
        self.universe.iter().position(|u| u == a)
    }

    pub fn element_count(&self) -> ElementCount {
        ElementCount {
            source: 6 + self.h_beta.len() + self.v.len(),
            target: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterKey {
    pub mode: Mode,
    pub alpha: Scalar,
    pub beta: Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivateKey<G: BilinearGroup> {
    pub mode: Mode,
    pub suite: String,
    pub id: Scalar,
    pub access: AccessStructure,
    pub cover: TimeCover,
    pub d0: G::Target,
    pub d0_prime: G::Source,
    /// `D''_{0,tau}` in cover order.
    pub d_time: Vec<(TimeNode, G::Source)>,
    /// `(D_i, D_i')` per LSSS row.
    pub d_rows: Vec<(G::Source, G::Source)>,
}

impl<G: BilinearGroup> PrivateKey<G> {
    pub fn element_count(&self) -> ElementCount {
        ElementCount {
            source: 1 + self.d_time.len() + 2 * self.d_rows.len(),
            target: 1,
        }
    }

    fn time_component(&self, node: &TimeNode) -> Option<&G::Source> {
        self.d_time.iter().find(|(n, _)| n == node).map(|(_, d)| d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext<G: BilinearGroup> {
    pub mode: Mode,
    pub suite: String,
    pub cover: TimeCover,
    pub attributes: BTreeSet<Attribute>,
    pub c0: G::Target,
    pub c0_prime: G::Source,
    /// `(tau, C_{0,tau}, C_{1,tau})` in cover order.
    pub c_time: Vec<(TimeNode, G::Source, G::Source)>,
}

impl<G: BilinearGroup> Ciphertext<G> {
    pub fn element_count(&self) -> ElementCount {
        ElementCount {
            source: 1 + 2 * self.c_time.len(),
            target: 1,
        }
    }

    fn time_components(&self, node: &TimeNode) -> Option<(&G::Source, &G::Source)> {
        self.c_time
            .iter()
            .find(|(n, _, _)| n == node)
            .map(|(_, a, b)| (a, b))
    }
}

/// Output of a successful decryption together with its operation counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Decryption<T> {
    pub message: T,
    pub node: TimeNode,
    pub rows_used: usize,
    pub counters: OpCounters,
}

/// Checked preconditions of a decryption attempt.
pub(crate) struct Plan {
    pub node: TimeNode,
    pub coefficients: Coefficients,
}

#[derive(Debug, Clone)]
pub struct Scheme<G> {
    group: G,
    mode: Mode,
}

impl<G: BilinearGroup> Scheme<G> {
    pub fn new(group: G, mode: Mode) -> Self {
        Scheme { group, mode }
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn setup(
        &self,
        universe: &[Attribute],
        depth: usize,
        rng: &mut dyn RngCore,
    ) -> Result<(PublicParams<G>, MasterKey), SchemeError> {
        if universe.is_empty() {
            return Err(SchemeError::EmptyUniverse);
        }
        let mut seen = BTreeSet::new();
        for a in universe {
            if !seen.insert(a) {
                return Err(SchemeError::DuplicateAttribute(a.clone()));
            }
        }
        if depth < 2 {
            return Err(SchemeError::DepthTooSmall(depth));
        }
        let gr = &self.group;
        let alpha = gr.random_nonzero_scalar(rng);
        let beta = gr.random_nonzero_scalar(rng);
        let g = gr.generator();
        let pow = |s: Scalar| gr.source_exp(&g, &s);
        let h_beta = (0..universe.len())
            .map(|_| gr.source_exp(&gr.random_source(rng), &beta))
            .collect();
        let v = (0..=depth).map(|_| gr.random_source(rng)).collect();
        let pk = PublicParams {
            mode: self.mode,
            suite: gr.suite_id(),
            universe: universe.to_vec(),
            depth,
            g_alpha: pow(alpha),
            g_alpha_sq: pow(alpha * alpha),
            g_inv_alpha: pow(alpha.inverse().expect("alpha is nonzero")),
            g_beta: pow(beta),
            g_beta_sq: pow(beta * beta),
            e_gg_alpha: gr.target_exp(&gr.pair(&g, &g), &alpha),
            g,
            h_beta,
            v,
        };
        let mk = MasterKey {
            mode: self.mode,
            alpha,
            beta,
        };
        Ok((pk, mk))
    }

    pub fn keygen(
        &self,
        pk: &PublicParams<G>,
        mk: &MasterKey,
        id: Scalar,
        cover: &TimeCover,
        access: &AccessStructure,
        rng: &mut dyn RngCore,
    ) -> Result<PrivateKey<G>, SchemeError> {
        self.check_pk(pk)?;
        self.check_mode("master key", mk.mode)?;
        if id.is_zero() {
            return Err(SchemeError::ZeroIdentity);
        }
        self.check_cover(pk, cover)?;
        let rows: Vec<usize> = access
            .labels()
            .iter()
            .map(|a| {
                pk.attribute_index(a)
                    .ok_or_else(|| SchemeError::UnknownAttribute(a.clone()))
            })
            .collect::<Result<_, _>>()?;

        let m = Metered::new(&self.group);
        let gr = &self.group;
        let w = gr.random_nonzero_scalar(rng);
        let shares = lsss::share(access, w, rng);
        let inv_alpha = mk.alpha.inverse().expect("alpha is nonzero");

        let d0 = m.target_exp(&pk.e_gg_alpha, &w);
        let d0_prime = m.g_to(&(w * inv_alpha));
        let d_time = cover
            .nodes()
            .iter()
            .map(|n| (*n, m.source_exp(&v_term(&m, pk, n), &w)))
            .collect();
        let d_rows = rows
            .iter()
            .zip(&shares.shares)
            .map(|(&attr, &lambda)| {
                let d = m.g_to(&(mk.beta * lambda));
                let base = match self.mode {
                    Mode::PaperFaithful => m.source_mul(&pk.g, &pk.h_beta[attr]),
                    Mode::Repaired => pk.g.clone(),
                };
                (d, m.source_exp(&base, &(lambda * id)))
            })
            .collect();
        Ok(PrivateKey {
            mode: self.mode,
            suite: gr.suite_id(),
            id,
            access: access.clone(),
            cover: cover.clone(),
            d0,
            d0_prime,
            d_time,
            d_rows,
        })
    }

    pub fn encrypt(
        &self,
        pk: &PublicParams<G>,
        message: &G::Target,
        cover: &TimeCover,
        attributes: &BTreeSet<Attribute>,
        rng: &mut dyn RngCore,
    ) -> Result<Ciphertext<G>, SchemeError> {
        self.check_pk(pk)?;
        self.check_cover(pk, cover)?;
        if let Some(a) = attributes.iter().find(|a| pk.attribute_index(a).is_none()) {
            return Err(SchemeError::UnknownAttribute(a.clone()));
        }
        let m = Metered::new(&self.group);
        let gr = &self.group;
        let x = gr.random_scalar(rng);
        let c0 = m.target_mul(message, &m.target_exp(&pk.e_gg_alpha, &x));
        let c0_prime = m.source_exp(&pk.g_alpha_sq, &x);
        let fixed = m.source_mul(&m.source_exp(&pk.g_alpha, &x), &pk.g_beta_sq);
        let c_time = cover
            .nodes()
            .iter()
            .map(|n| {
                let v_tau = gr.random_scalar(rng);
                let c0_tau = m.g_to(&v_tau);
                let c1_tau = m.source_mul(&fixed, &m.source_exp(&v_term(&m, pk, n), &v_tau));
                (*n, c0_tau, c1_tau)
            })
            .collect();
        Ok(Ciphertext {
            mode: self.mode,
            suite: gr.suite_id(),
            cover: cover.clone(),
            attributes: attributes.clone(),
            c0,
            c0_prime,
            c_time,
        })
    }

    /// Returns the message, or `⊥` as [`DecryptError::Denied`].
    pub fn decrypt(
        &self,
        pk: &PublicParams<G>,
        ct: &Ciphertext<G>,
        sk: &PrivateKey<G>,
    ) -> Result<G::Target, DecryptError> {
        self.decrypt_metered(pk, ct, sk).map(|d| d.message)
    }

    pub fn decrypt_metered(
        &self,
        pk: &PublicParams<G>,
        ct: &Ciphertext<G>,
        sk: &PrivateKey<G>,
    ) -> Result<Decryption<G::Target>, DecryptError> {
        let plan = self.plan(pk, ct, sk)?;
        let m = Metered::new(&self.group);
        let message = self.evaluate(&m, pk, ct, sk, &plan);
        Ok(Decryption {
            message,
            node: plan.node,
            rows_used: plan.coefficients.terms.len(),
            counters: m.counters(),
        })
    }

    /// Both denial conditions, checked before any pairing.
    pub(crate) fn plan(
        &self,
        pk: &PublicParams<G>,
        ct: &Ciphertext<G>,
        sk: &PrivateKey<G>,
    ) -> Result<Plan, DecryptError> {
        self.check_pk(pk)?;
        self.check_suite("ciphertext", &ct.suite)?;
        self.check_suite("private key", &sk.suite)?;
        self.check_mode("ciphertext", ct.mode)?;
        self.check_mode("private key", sk.mode)?;
        let coefficients = lsss::reconstruct_coeffs(&sk.access, &ct.attributes)
            .ok_or(DecryptError::Denied(Denial::AttributesUnsatisfied))?;
        let node = sk
            .cover
            .first_common(&ct.cover)
            .ok_or(DecryptError::Denied(Denial::TimeNotCovered))?;
        for (row, _) in &coefficients.terms {
            let a = sk.access.rho(*row);
            if pk.attribute_index(a).is_none() {
                return Err(SchemeError::UnknownAttribute(a.clone()).into());
            }
        }
        Ok(Plan { node, coefficients })
    }

    /// `C0 e(D''_tau, C_{0,tau}) e(C0', D0')` over
    /// `e(C0', g^{1/alpha}) prod_{i in I} e(C_{1,tau}, D_i'^{omega_i/ID}) e(D_i, k_rho(i))^{omega_i}`.
    pub(crate) fn evaluate(
        &self,
        m: &Metered<'_, G>,
        pk: &PublicParams<G>,
        ct: &Ciphertext<G>,
        sk: &PrivateKey<G>,
        plan: &Plan,
    ) -> G::Target {
        let (c0_tau, c1_tau) = ct
            .time_components(&plan.node)
            .expect("planned node is in the ciphertext cover");
        let d_tau = sk
            .time_component(&plan.node)
            .expect("planned node is in the key cover");
        let numerator = m.target_mul(
            &m.target_mul(&ct.c0, &m.pair(d_tau, c0_tau)),
            &m.pair(&ct.c0_prime, &sk.d0_prime),
        );
        let denominator = m.target_mul(
            &m.pair(&ct.c0_prime, &pk.g_inv_alpha),
            &self.attribute_product(m, pk, c1_tau, sk, &plan.coefficients),
        );
        m.target_mul(&numerator, &m.target_inv(&denominator))
    }

    pub(crate) fn attribute_product(
        &self,
        m: &Metered<'_, G>,
        pk: &PublicParams<G>,
        c1_tau: &G::Source,
        sk: &PrivateKey<G>,
        coefficients: &Coefficients,
    ) -> G::Target {
        let inv_id = sk.id.inverse().expect("pseudo-identity is nonzero");
        let mut acc = self.group.target_identity();
        for (row, omega) in &coefficients.terms {
            let (d, d_prime) = &sk.d_rows[*row];
            let k = self.k_term(m, pk, sk.access.rho(*row));
            let first = m.pair(c1_tau, &m.source_exp(d_prime, &(*omega * inv_id)));
            let second = m.target_exp(&m.pair(d, &k), omega);
            acc = m.target_mul(&acc, &m.target_mul(&first, &second));
        }
        acc
    }

    /// `k_y`, recomputed from public values.
    pub(crate) fn k_term(&self, m: &Metered<'_, G>, pk: &PublicParams<G>, a: &Attribute) -> G::Source {
        match self.mode {
            Mode::PaperFaithful => {
                let idx = pk.attribute_index(a).expect("attribute checked in plan");
                m.source_inv(&m.source_mul(&pk.g_beta, &pk.h_beta[idx]))
            }
            Mode::Repaired => m.source_inv(&pk.g_beta),
        }
    }

    fn check_mode(&self, what: &'static str, found: Mode) -> Result<(), SchemeError> {
        if found != self.mode {
            return Err(SchemeError::ModeMismatch {
                what,
                expected: self.mode,
                found,
            });
        }
        Ok(())
    }

    fn check_suite(&self, what: &'static str, found: &str) -> Result<(), SchemeError> {
        let expected = self.group.suite_id();
        if found != expected {
            return Err(SchemeError::SuiteMismatch {
                what,
                expected,
                found: found.to_string(),
            });
        }
        Ok(())
    }

    fn check_pk(&self, pk: &PublicParams<G>) -> Result<(), SchemeError> {
        self.check_suite("public parameters", &pk.suite)?;
        self.check_mode("public parameters", pk.mode)
    }

    fn check_cover(&self, pk: &PublicParams<G>, cover: &TimeCover) -> Result<(), SchemeError> {
        if cover.is_empty() {
            return Err(SchemeError::EmptyCover);
        }
        for n in cover.nodes() {
            if n.depth() >= pk.depth {
                return Err(SchemeError::NodeTooDeep {
                    node: *n,
                    len: n.depth(),
                    depth: pk.depth,
                });
            }
        }
        Ok(())
    }
}

/// `V_0 prod_{j=1}^{k} V_j^{tau_j}`.
pub(crate) fn v_term<G: BilinearGroup>(
    m: &Metered<'_, G>,
    pk: &PublicParams<G>,
    node: &TimeNode,
) -> G::Source {
    let order = m.group().order();
    node.components()
        .iter()
        .enumerate()
        .fold(pk.v[0].clone(), |acc, (j, tau)| {
            m.source_mul(&acc, &m.source_exp(&pk.v[j + 1], &Scalar::new(*tau as u64, order)))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::TransparentSuite;
    use crate::lsss::{compile, parse_attribute_set};
    use crate::time::Calendar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn universe(names: &[&str]) -> Vec<Attribute> {
        names.iter().map(|n| Attribute::new(*n).unwrap()).collect()
    }

    fn cover(text: &str) -> TimeCover {
        let c = Calendar::Gregorian;
        c.set_cover(&c.parse_window(text).unwrap()).unwrap()
    }

    fn node_cover(text: &str) -> TimeCover {
        let c = Calendar::Gregorian;
        c.cover_from_nodes([c.parse_node(text).unwrap()]).unwrap()
    }

    struct Fixture {
        scheme: Scheme<TransparentSuite>,
        pk: PublicParams<TransparentSuite>,
        mk: MasterKey,
        rng: ChaCha20Rng,
    }

    fn fixture(mode: Mode, p: u64) -> Fixture {
        let scheme = Scheme::new(TransparentSuite::new(p).unwrap(), mode);
        let mut rng = ChaCha20Rng::seed_from_u64(2022);
        let (pk, mk) = scheme
            .setup(&universe(&["platinum", "gold", "silver"]), 4, &mut rng)
            .unwrap();
        Fixture { scheme, pk, mk, rng }
    }

    #[test]
    fn setup_sizes() {
        let f = fixture(Mode::Repaired, 101);
        assert_eq!(f.pk.element_count(), ElementCount { source: 14, target: 1 });
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (pk, _) = f.scheme.setup(&universe(&["a"]), 2, &mut rng).unwrap();
        assert_eq!(pk.element_count(), ElementCount { source: 10, target: 1 });
    }

    #[test]
    fn setup_publishes_inverse_of_alpha() {
        let f = fixture(Mode::Repaired, 101);
        let gr = f.scheme.group();
        let a = f.mk.alpha;
        assert_eq!(f.pk.g_alpha.log(), a);
        assert_eq!(f.pk.g_alpha_sq.log(), a * a);
        assert_eq!(f.pk.g_inv_alpha.log() * a, gr.scalar(1));
        assert_eq!(gr.pair(&f.pk.g_alpha, &f.pk.g_inv_alpha), gr.pair(&f.pk.g, &f.pk.g));
        // with alpha = 5 the published inverse exponent is 81
        assert_eq!(gr.scalar(5).inverse().unwrap().value(), 81);
    }

    #[test]
    fn setup_rejects_bad_parameters() {
        let f = fixture(Mode::Repaired, 101);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert_eq!(f.scheme.setup(&[], 4, &mut rng).unwrap_err(), SchemeError::EmptyUniverse);
        assert_eq!(
            f.scheme.setup(&universe(&["a"]), 1, &mut rng).unwrap_err(),
            SchemeError::DepthTooSmall(1)
        );
        assert!(matches!(
            f.scheme.setup(&universe(&["a", "a"]), 4, &mut rng),
            Err(SchemeError::DuplicateAttribute(_))
        ));
    }

    #[test]
    fn keygen_components() {
        let mut f = fixture(Mode::Repaired, 101);
        let access = compile(&"gold".parse().unwrap(), 101);
        let id = f.scheme.group().scalar(17);
        let sk = f
            .scheme
            .keygen(&f.pk, &f.mk, id, &cover("2022-07-01..2022-09-02"), &access, &mut f.rng)
            .unwrap();
        assert_eq!(sk.d_time.len(), 4);
        let sk = f
            .scheme
            .keygen(&f.pk, &f.mk, id, &node_cover("2022-08"), &access, &mut f.rng)
            .unwrap();
        assert_eq!(sk.element_count(), ElementCount { source: 4, target: 1 });
        // D0 = e(g,g)^(alpha w) with w = alpha * log(D0')
        let w = sk.d0_prime.log() * f.mk.alpha;
        assert_eq!(sk.d0.log(), f.mk.alpha * w);
    }

    #[test]
    fn keygen_rejects_zero_identity_and_unknown_attributes() {
        let mut f = fixture(Mode::Repaired, 101);
        let gr = *f.scheme.group();
        let access = compile(&"gold".parse().unwrap(), 101);
        let c = node_cover("2022-08");
        assert_eq!(
            f.scheme.keygen(&f.pk, &f.mk, gr.scalar(0), &c, &access, &mut f.rng).unwrap_err(),
            SchemeError::ZeroIdentity
        );
        let access = compile(&"bronze".parse().unwrap(), 101);
        assert!(matches!(
            f.scheme.keygen(&f.pk, &f.mk, gr.scalar(3), &c, &access, &mut f.rng),
            Err(SchemeError::UnknownAttribute(_))
        ));
    }

    #[test]
    fn encrypt_components() {
        let mut f = fixture(Mode::Repaired, 101);
        let gr = *f.scheme.group();
        let attrs = parse_attribute_set("gold").unwrap();
        let ct = f
            .scheme
            .encrypt(&f.pk, &gr.target_identity(), &node_cover("2022-08"), &attrs, &mut f.rng)
            .unwrap();
        assert_eq!(ct.element_count(), ElementCount { source: 3, target: 1 });
        // identity message leaves C0 = e(g,g)^(alpha x), x = log(C0') / alpha^2
        let a = f.mk.alpha;
        let x = ct.c0_prime.log() * (a * a).inverse().unwrap();
        assert_eq!(ct.c0.log(), a * x);
    }

    #[test]
    fn repaired_roundtrip_and_denials() {
        let mut f = fixture(Mode::Repaired, crate::group::DEFAULT_MODULUS);
        let gr = *f.scheme.group();
        let access = compile(&"platinum OR gold".parse().unwrap(), gr.order());
        let sk = f
            .scheme
            .keygen(&f.pk, &f.mk, gr.scalar(99), &cover("2022-07-01..2022-09-02"), &access, &mut f.rng)
            .unwrap();
        let msg = gr.random_target(&mut f.rng);
        let gold = parse_attribute_set("gold").unwrap();
        let ct = f.scheme.encrypt(&f.pk, &msg, &node_cover("2022-08"), &gold, &mut f.rng).unwrap();
        assert_eq!(f.scheme.decrypt(&f.pk, &ct, &sk).unwrap(), msg);

        let late = f.scheme.encrypt(&f.pk, &msg, &node_cover("2022-09-05"), &gold, &mut f.rng).unwrap();
        assert_eq!(
            f.scheme.decrypt(&f.pk, &late, &sk).unwrap_err(),
            DecryptError::Denied(Denial::TimeNotCovered)
        );
        let silver = parse_attribute_set("silver").unwrap();
        let wrong = f.scheme.encrypt(&f.pk, &msg, &node_cover("2022-08"), &silver, &mut f.rng).unwrap();
        assert_eq!(
            f.scheme.decrypt(&f.pk, &wrong, &sk).unwrap_err(),
            DecryptError::Denied(Denial::AttributesUnsatisfied)
        );
    }

    #[test]
    fn pairing_count_follows_rows_used() {
        let mut f = fixture(Mode::Repaired, crate::group::DEFAULT_MODULUS);
        let gr = *f.scheme.group();
        let access = compile(&"platinum AND gold".parse().unwrap(), gr.order());
        let c = node_cover("2022-08");
        let sk = f.scheme.keygen(&f.pk, &f.mk, gr.scalar(5), &c, &access, &mut f.rng).unwrap();
        let attrs = parse_attribute_set("platinum,gold").unwrap();
        let ct = f.scheme.encrypt(&f.pk, &gr.target_identity(), &c, &attrs, &mut f.rng).unwrap();
        let d = f.scheme.decrypt_metered(&f.pk, &ct, &sk).unwrap();
        assert_eq!(d.rows_used, 2);
        assert_eq!(d.counters.pairings, 7);
    }

    #[test]
    fn modes_do_not_mix() {
        let mut paper = fixture(Mode::PaperFaithful, 101);
        let repaired = Scheme::new(TransparentSuite::new(101).unwrap(), Mode::Repaired);
        let access = compile(&"gold".parse().unwrap(), 101);
        let err = repaired
            .keygen(&paper.pk, &paper.mk, repaired.group().scalar(1), &node_cover("2022-08"), &access, &mut paper.rng)
            .unwrap_err();
        assert!(matches!(err, SchemeError::ModeMismatch { .. }));
    }

    #[test]
    fn cover_nodes_must_fit_the_tree() {
        let mut f = fixture(Mode::Repaired, 101);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (shallow, mk) = f.scheme.setup(&universe(&["gold"]), 3, &mut rng).unwrap();
        let access = compile(&"gold".parse().unwrap(), 101);
        let err = f
            .scheme
            .keygen(&shallow, &mk, f.scheme.group().scalar(2), &node_cover("2022-08-01"), &access, &mut f.rng)
            .unwrap_err();
        assert!(matches!(err, SchemeError::NodeTooDeep { len: 3, depth: 3, .. }));
    }
}
