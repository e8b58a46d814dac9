//! Size and pairing accounting, measured from constructed values.

use std::collections::BTreeSet;
use std::fmt;

use rand::RngCore;

use super::{Scheme, SchemeError};
use crate::group::BilinearGroup;
use crate::lsss::{compile, Attribute, Policy};
use crate::time::{Calendar, TimeCover, TimeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementCount {
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub source: usize,
    pub target: usize,
    /// Only set for decryption.
    pub pairings: Option<u64>,
}

impl From<ElementCount> for Measurement {
    fn from(c: ElementCount) -> Self {
        Measurement {
            source: c.source,
            target: c.target,
            pairings: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    PublicParams { universe: usize, depth: usize },
    PrivateKey { rows: usize, cover: usize },
    Ciphertext { cover: usize },
    Decryption { rows_used: usize },
}

/// Closed-form sizes: PK `(U + T + 7) G1 + GT`, SK `(2l + |T| + 1) G1 + GT`,
/// CT `(2|Tc| + 1) G1 + GT`, decryption `2I + 3` pairings.
pub fn predicted(kind: MeasureKind) -> Measurement {
    match kind {
        MeasureKind::PublicParams { universe, depth } => Measurement {
            source: universe + depth + 7,
            target: 1,
            pairings: None,
        },
        MeasureKind::PrivateKey { rows, cover } => Measurement {
            source: 2 * rows + cover + 1,
            target: 1,
            pairings: None,
        },
        MeasureKind::Ciphertext { cover } => Measurement {
            source: 2 * cover + 1,
            target: 1,
            pairings: None,
        },
        MeasureKind::Decryption { rows_used } => Measurement {
            source: 0,
            target: 0,
            pairings: Some(2 * rows_used as u64 + 3),
        },
    }
}

fn universe_of(size: usize) -> Vec<Attribute> {
    (1..=size)
        .map(|i| Attribute::new(format!("a{i}")).expect("generated label"))
        .collect()
}

/// `a1 AND a2 AND ...` with `rows` leaves, cycling through the universe.
fn and_chain(rows: usize, universe: &[Attribute]) -> Policy {
    (0..rows)
        .map(|i| Policy::Leaf(universe[i % universe.len()].clone()))
        .reduce(Policy::and)
        .expect("at least one row")
}

/// `len` consecutive day nodes starting on 2022-01-01.
pub(crate) fn day_cover(len: usize) -> TimeCover {
    let cal = Calendar::Gregorian;
    let mut day = cal.day(2022, 1, 1).expect("valid date");
    let mut nodes = Vec::with_capacity(len);
    for _ in 0..len {
        nodes.push(TimeNode::day(day));
        day = cal.next_day(&day).expect("inside the calendar range");
    }
    cal.cover_from_nodes(nodes).expect("consecutive days are disjoint")
}

/// Builds the artifact named by `kind` and counts what was built.
pub fn measure<G: BilinearGroup>(
    scheme: &Scheme<G>,
    kind: MeasureKind,
    rng: &mut dyn RngCore,
) -> Result<Measurement, SchemeError> {
    let size = match kind {
        MeasureKind::PublicParams { universe, .. } => universe,
        MeasureKind::PrivateKey { rows, .. } => rows,
        MeasureKind::Decryption { rows_used } => rows_used,
        MeasureKind::Ciphertext { .. } => 1,
    };
    let depth = match kind {
        MeasureKind::PublicParams { depth, .. } => depth,
        _ => 4,
    };
    let report = bench(
        scheme,
        BenchParams {
            universe: size.max(1),
            depth,
            rows: size.max(1),
            key_cover: match kind {
                MeasureKind::PrivateKey { cover, .. } => cover,
                _ => 1,
            },
            ct_cover: match kind {
                MeasureKind::Ciphertext { cover } => cover,
                _ => 1,
            },
        },
        rng,
    )?;
    let name = match kind {
        MeasureKind::PublicParams { .. } => "pk",
        MeasureKind::PrivateKey { .. } => "sk",
        MeasureKind::Ciphertext { .. } => "ct",
        MeasureKind::Decryption { .. } => "decrypt",
    };
    Ok(report.row(name).measured)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchParams {
    pub universe: usize,
    pub depth: usize,
    pub rows: usize,
    pub key_cover: usize,
    pub ct_cover: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub artifact: &'static str,
    pub kind: MeasureKind,
    pub measured: Measurement,
    pub predicted: Measurement,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchReport {
    pub params: BenchParams,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, artifact: &str) -> &BenchRow {
        self.rows
            .iter()
            .find(|r| r.artifact == artifact)
            .expect("bench reports every artifact")
    }

    pub fn all_matched(&self) -> bool {
        self.rows.iter().all(|r| r.matched)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "params U={} depth={} l={} tk={} tc={}",
            p.universe, p.depth, p.rows, p.key_cover, p.ct_cover
        )?;
        for r in &self.rows {
            match (r.measured.pairings, r.predicted.pairings) {
                (Some(m), Some(pr)) => writeln!(
                    f,
                    "{} rows_used={} pairings={} predicted_pairings={} match={}",
                    r.artifact, p.rows, m, pr, r.matched
                )?,
                _ => writeln!(
                    f,
                    "{} source={} target={} predicted_source={} predicted_target={} match={}",
                    r.artifact,
                    r.measured.source,
                    r.measured.target,
                    r.predicted.source,
                    r.predicted.target,
                    r.matched
                )?,
            }
        }
        Ok(())
    }
}

/// One instance with `U`, `T`, `l` rows, `|T|` key nodes and `|Tc|` ciphertext
/// nodes; both covers start on the same day so decryption can proceed, and
/// every row is used.
pub fn bench<G: BilinearGroup>(
    scheme: &Scheme<G>,
    params: BenchParams,
    rng: &mut dyn RngCore,
) -> Result<BenchReport, SchemeError> {
    let gr = scheme.group();
    let universe = universe_of(params.universe);
    let (pk, mk) = scheme.setup(&universe, params.depth, rng)?;
    let access = compile(&and_chain(params.rows, &universe), gr.order());
    let key_cover = day_cover(params.key_cover.max(1));
    let ct_cover = day_cover(params.ct_cover.max(1));
    let id = gr.random_nonzero_scalar(rng);
    let sk = scheme.keygen(&pk, &mk, id, &key_cover, &access, rng)?;
    let attrs: BTreeSet<Attribute> = access.labels().iter().cloned().collect();
    let msg = gr.random_target(rng);
    let ct = scheme.encrypt(&pk, &msg, &ct_cover, &attrs, rng)?;
    let dec = scheme
        .decrypt_metered(&pk, &ct, &sk)
        .expect("bench instance satisfies both conditions");

    let measured = [
        ("pk", MeasureKind::PublicParams { universe: params.universe, depth: params.depth }, pk.element_count().into()),
        ("sk", MeasureKind::PrivateKey { rows: params.rows, cover: key_cover.len() }, sk.element_count().into()),
        ("ct", MeasureKind::Ciphertext { cover: ct_cover.len() }, ct.element_count().into()),
        (
            "decrypt",
            MeasureKind::Decryption { rows_used: dec.rows_used },
            Measurement { source: 0, target: 0, pairings: Some(dec.counters.pairings) },
        ),
    ];
    let rows = measured
        .into_iter()
        .map(|(artifact, kind, measured): (&'static str, MeasureKind, Measurement)| {
            let predicted = predicted(kind);
            BenchRow {
                artifact,
                kind,
                measured,
                predicted,
                matched: measured == predicted,
            }
        })
        .collect();
    Ok(BenchReport { params, rows })
}
