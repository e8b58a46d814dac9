//! Line-by-line check of the decryption correctness chain.
//!
//! Each step pairs the value the decryptor actually computes from key and
//! ciphertext components (`lhs`) with the closed form the chain claims for it
//! (`rhs`), the latter rebuilt from discrete logs. The residual
//! `lhs / rhs` is the target-group identity exactly when that line holds.
//! Only suites that expose discrete logs can be audited.

use std::fmt;

use thiserror::Error;

use super::{Ciphertext, DecryptError, Denial, Mode, PrivateKey, PublicParams, Scheme, SchemeError};
use crate::group::{BilinearGroup, Metered, Scalar};
use crate::time::TimeNode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("suite {0} does not expose discrete logs")]
    Unsupported(String),
    #[error("instance is not decryptable: {0}")]
    Denied(Denial),
    #[error("degenerate parameters: {0}")]
    Degenerate(&'static str),
    #[error(transparent)]
    Usage(#[from] SchemeError),
}

impl From<DecryptError> for AuditError {
    fn from(e: DecryptError) -> Self {
        match e {
            DecryptError::Denied(d) => AuditError::Denied(d),
            DecryptError::Usage(u) => AuditError::Usage(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// (a) `e(C0', g^{1/alpha}) = e(g,g)^{alpha x}`
    InverseAlpha,
    /// (b) `e(C0', D0') = e(g,g)^{alpha x w}`
    Blinding,
    /// (c) `e(D''_tau, C_{0,tau})` equals the V-term of `e(C_{1,tau}, g^w)`
    TimeCancellation,
    /// (d) the attribute product collapses to `e(C_{1,tau}, g^w) e(g^{beta w}, g^{-beta})`
    AttributeCollapse,
    /// the whole decryption equation returns the message
    EndToEnd,
}

impl StepKind {
    pub const ALL: [StepKind; 5] = [
        StepKind::InverseAlpha,
        StepKind::Blinding,
        StepKind::TimeCancellation,
        StepKind::AttributeCollapse,
        StepKind::EndToEnd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StepKind::InverseAlpha => "a-inverse-alpha",
            StepKind::Blinding => "b-blinding",
            StepKind::TimeCancellation => "c-time-cancellation",
            StepKind::AttributeCollapse => "d-attribute-collapse",
            StepKind::EndToEnd => "end-to-end",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditStep<T> {
    pub kind: StepKind,
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport<T> {
    pub mode: Mode,
    pub node: TimeNode,
    pub steps: Vec<AuditStep<T>>,
}

impl<T> AuditReport<T> {
    pub fn step(&self, kind: StepKind) -> &AuditStep<T> {
        self.steps
            .iter()
            .find(|s| s.kind == kind)
            .expect("every step is reported")
    }

    pub fn all_closed(&self) -> bool {
        self.steps.iter().all(|s| s.closed)
    }
}

impl<G: BilinearGroup> Scheme<G> {
    pub fn audit(
        &self,
        pk: &PublicParams<G>,
        ct: &Ciphertext<G>,
        sk: &PrivateKey<G>,
    ) -> Result<AuditReport<G::Target>, AuditError> {
        let gr = self.group();
        let log = |e: &G::Source| {
            gr.source_log(e)
                .ok_or_else(|| AuditError::Unsupported(gr.suite_id()))
        };
        let plan = self.plan(pk, ct, sk)?;
        let (c0_tau, c1_tau) = ct
            .time_components(&plan.node)
            .expect("planned node is in the ciphertext");
        let d_tau = sk.time_component(&plan.node).expect("planned node is in the key");

        let alpha = log(&pk.g_alpha)?;
        let beta = log(&pk.g_beta)?;
        let alpha_sq_inv = (alpha * alpha)
            .inverse()
            .ok_or(AuditError::Degenerate("alpha is zero"))?;
        let x = log(&ct.c0_prime)? * alpha_sq_inv;
        let w = log(&sk.d0_prime)? * alpha;
        let c1 = log(c1_tau)?;
        let message_log = gr
            .target_log(&ct.c0)
            .ok_or_else(|| AuditError::Unsupported(gr.suite_id()))?
            - alpha * x;

        let egg = gr.pair(&gr.generator(), &gr.generator());
        let closed_form = |e: Scalar| gr.target_exp(&egg, &e);
        let m = Metered::new(gr);

        let lines = [
            (
                StepKind::InverseAlpha,
                m.pair(&ct.c0_prime, &pk.g_inv_alpha),
                closed_form(alpha * x),
            ),
            (
                StepKind::Blinding,
                m.pair(&ct.c0_prime, &sk.d0_prime),
                closed_form(alpha * x * w),
            ),
            (
                StepKind::TimeCancellation,
                m.pair(d_tau, c0_tau),
                closed_form((c1 - alpha * x - beta * beta) * w),
            ),
            (
                StepKind::AttributeCollapse,
                self.attribute_product(&m, pk, c1_tau, sk, &plan.coefficients),
                closed_form(c1 * w - beta * beta * w),
            ),
            (
                StepKind::EndToEnd,
                self.evaluate(&m, pk, ct, sk, &plan),
                closed_form(message_log),
            ),
        ];
        let identity = gr.target_identity();
        let steps = lines
            .into_iter()
            .map(|(kind, lhs, rhs)| {
                let residual = gr.target_mul(&lhs, &gr.target_inv(&rhs));
                AuditStep {
                    kind,
                    closed: residual == identity,
                    lhs,
                    rhs,
                    residual,
                }
            })
            .collect();
        Ok(AuditReport {
            mode: self.mode(),
            node: plan.node,
            steps,
        })
    }
}
