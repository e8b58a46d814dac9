//! Python bindings for the `tsabe` core library.
//!
//! Artifacts cross the boundary as `bytes` in the same encoding the CLI
//! writes to disk, so files produced by either side are interchangeable.

use std::collections::BTreeSet;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use tsabe::envelope::{self, ContentPackage, EnvelopeError, SealParams, StreamDem};
use tsabe::group::{BilinearGroup, TransparentSuite};
use tsabe::lsss::{compile, Attribute, Policy};
use tsabe::scheme::{self, BenchParams, DecryptError, Mode, PublicParams, Scheme, StepKind};
use tsabe::sim;
use tsabe::subscription::{PseudoIdentity, RevocationLedger};
use tsabe::time::{Calendar, TimeCover, TimeNode};

create_exception!(tsabe_py, AccessDenied, PyException, "The key does not satisfy the ciphertext.");
create_exception!(tsabe_py, IntegrityError, PyException, "Content failed an integrity check.");
create_exception!(tsabe_py, VerificationError, PyException, "A signature or chain did not verify.");

const DEFAULT_SUITE: &str = "transparent:2147483647";

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn group(suite: &str) -> PyResult<TransparentSuite> {
    TransparentSuite::from_descriptor(suite).map_err(value_err)
}

fn load_pk(g: &TransparentSuite, pk: &[u8]) -> PyResult<PublicParams<TransparentSuite>> {
    scheme::decode_public_params(g, pk).map_err(value_err)
}

fn attributes(list: Vec<String>) -> PyResult<BTreeSet<Attribute>> {
    list.iter().map(Attribute::new).collect::<Result<_, _>>().map_err(value_err)
}

fn node_cover(nodes: Vec<String>) -> PyResult<TimeCover> {
    let cal = Calendar::Gregorian;
    let nodes = nodes
        .iter()
        .map(|n| cal.parse_node(n))
        .collect::<Result<Vec<TimeNode>, _>>()
        .map_err(value_err)?;
    cal.cover_from_nodes(nodes).map_err(value_err)
}

fn labels(c: &TimeCover) -> Vec<String> {
    c.nodes().iter().map(TimeNode::label).collect()
}

/// Minimal time-node cover of an inclusive `YYYY-MM-DD..YYYY-MM-DD` window.
#[pyfunction]
fn cover(window: &str) -> PyResult<Vec<String>> {
    let cal = Calendar::Gregorian;
    let w = cal.parse_window(window).map_err(value_err)?;
    Ok(labels(&cal.set_cover(&w).map_err(value_err)?))
}

/// Generate `(public_params, master_key)`.
#[pyfunction]
#[pyo3(signature = (universe, depth=4, mode="repaired", seed=0, suite=DEFAULT_SUITE))]
fn setup<'py>(
    py: Python<'py>,
    universe: Vec<String>,
    depth: usize,
    mode: &str,
    seed: u64,
    suite: &str,
) -> PyResult<(Bound<'py, PyBytes>, Bound<'py, PyBytes>)> {
    let g = group(suite)?;
    let mode: Mode = mode.parse().map_err(value_err)?;
    let universe: Vec<Attribute> = universe.iter().map(Attribute::new).collect::<Result<_, _>>().map_err(value_err)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (pk, mk) = Scheme::new(g, mode).setup(&universe, depth, &mut rng).map_err(value_err)?;
    Ok((
        PyBytes::new(py, &scheme::encode_public_params(&g, &pk)),
        PyBytes::new(py, &scheme::encode_master_key(&g, &mk)),
    ))
}

/// Issue a private key for `policy` over `window` to a nonzero identity.
#[pyfunction]
#[pyo3(signature = (pk, mk, policy, window, identity, seed=0))]
fn keygen<'py>(
    py: Python<'py>,
    pk: &[u8],
    mk: &[u8],
    policy: &str,
    window: &str,
    identity: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyBytes>> {
    let suite = scheme::peek_header(pk).map_err(value_err)?.suite;
    let g = group(&suite)?;
    let p = load_pk(&g, pk)?;
    let m = scheme::decode_master_key(&g, mk).map_err(value_err)?;
    let policy: Policy = policy.parse().map_err(value_err)?;
    let cal = Calendar::Gregorian;
    let c = cal
        .set_cover(&cal.parse_window(window).map_err(value_err)?)
        .map_err(value_err)?;
    let id = g.scalar(identity);
    if id.is_zero() {
        return Err(PyValueError::new_err("identity must be nonzero modulo the group order"));
    }
    let access = compile(&policy, g.order());
    let id = PseudoIdentity::from_scalar(id);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sk = Scheme::new(g, p.mode)
        .keygen(&p, &m, id.scalar(), &c, &access, &mut rng)
        .map_err(value_err)?;
    Ok(PyBytes::new(py, &scheme::encode_private_key(&g, &sk)))
}

/// Encrypt a random message; returns `(ciphertext, message)`.
#[pyfunction]
#[pyo3(signature = (pk, attrs, nodes, seed=0))]
fn encrypt<'py>(
    py: Python<'py>,
    pk: &[u8],
    attrs: Vec<String>,
    nodes: Vec<String>,
    seed: u64,
) -> PyResult<(Bound<'py, PyBytes>, Bound<'py, PyBytes>)> {
    let suite = scheme::peek_header(pk).map_err(value_err)?.suite;
    let g = group(&suite)?;
    let p = load_pk(&g, pk)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let msg = g.random_target(&mut rng);
    let ct = Scheme::new(g, p.mode)
        .encrypt(&p, &msg, &node_cover(nodes)?, &attributes(attrs)?, &mut rng)
        .map_err(value_err)?;
    Ok((
        PyBytes::new(py, &scheme::encode_ciphertext(&g, &ct)),
        PyBytes::new(py, &g.encode_target(&msg)),
    ))
}

/// Recover the message; raises `AccessDenied` when the key does not apply.
#[pyfunction]
fn decrypt<'py>(py: Python<'py>, pk: &[u8], sk: &[u8], ct: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let suite = scheme::peek_header(pk).map_err(value_err)?.suite;
    let g = group(&suite)?;
    let p = load_pk(&g, pk)?;
    let k = scheme::decode_private_key(&g, sk).map_err(value_err)?;
    let c = scheme::decode_ciphertext(&g, ct).map_err(value_err)?;
    match Scheme::new(g, p.mode).decrypt(&p, &c, &k) {
        Ok(m) => Ok(PyBytes::new(py, &g.encode_target(&m))),
        Err(DecryptError::Denied(why)) => Err(AccessDenied::new_err(why.to_string())),
        Err(DecryptError::Usage(e)) => Err(value_err(e)),
    }
}

/// Step-by-step correctness check; returns `[(step, closed)]`.
#[pyfunction]
fn audit(pk: &[u8], sk: &[u8], ct: &[u8]) -> PyResult<Vec<(String, bool)>> {
    let suite = scheme::peek_header(pk).map_err(value_err)?.suite;
    let g = group(&suite)?;
    let p = load_pk(&g, pk)?;
    let k = scheme::decode_private_key(&g, sk).map_err(value_err)?;
    let c = scheme::decode_ciphertext(&g, ct).map_err(value_err)?;
    let report = Scheme::new(g, p.mode).audit(&p, &c, &k).map_err(|e| match e {
        scheme::AuditError::Denied(_) => AccessDenied::new_err(e.to_string()),
        _ => value_err(e),
    })?;
    Ok(StepKind::ALL
        .iter()
        .map(|&s| (s.name().to_string(), report.step(s).closed))
        .collect())
}

type Counts = (usize, usize, Option<u64>);

/// Measured and predicted counts; returns `[(artifact, measured, predicted, matched)]`
/// where counts are `(source, target, pairings)`.
#[pyfunction(name = "bench")]
#[pyo3(signature = (universe=3, depth=4, rows=2, key_cover=4, ct_cover=1, seed=0))]
fn run_bench(
    universe: usize,
    depth: usize,
    rows: usize,
    key_cover: usize,
    ct_cover: usize,
    seed: u64,
) -> PyResult<Vec<(String, Counts, Counts, bool)>> {
    let g = group(DEFAULT_SUITE)?;
    let params = BenchParams {
        universe,
        depth,
        rows,
        key_cover,
        ct_cover,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let report = scheme::bench(&Scheme::new(g, Mode::Repaired), params, &mut rng).map_err(value_err)?;
    Ok(report
        .rows
        .iter()
        .map(|r| {
            (
                r.artifact.to_string(),
                (r.measured.source, r.measured.target, r.measured.pairings),
                (r.predicted.source, r.predicted.target, r.predicted.pairings),
                r.matched,
            )
        })
        .collect())
}

/// Package `content` for holders of keys matching `attrs` at one of `nodes`.
#[pyfunction]
#[pyo3(signature = (pk, name, content, attrs, nodes, chunk_size=envelope::DEFAULT_CHUNK_SIZE, seed=0))]
#[allow(clippy::too_many_arguments)]
fn seal<'py>(
    py: Python<'py>,
    pk: &[u8],
    name: &str,
    content: &[u8],
    attrs: Vec<String>,
    nodes: Vec<String>,
    chunk_size: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyBytes>> {
    let suite = scheme::peek_header(pk).map_err(value_err)?.suite;
    let g = group(&suite)?;
    let p = load_pk(&g, pk)?;
    let cover = node_cover(nodes)?;
    let attributes = attributes(attrs)?;
    let params = SealParams {
        name,
        cover: &cover,
        attributes: &attributes,
        chunk_size,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pkg = envelope::seal(&Scheme::new(g, p.mode), &StreamDem, &p, &params, content, &mut rng).map_err(value_err)?;
    Ok(PyBytes::new(py, &pkg.encode(&g)))
}

/// Recover packaged content, raising `AccessDenied` or `IntegrityError`.
#[pyfunction]
fn open_package<'py>(py: Python<'py>, pk: &[u8], sk: &[u8], package: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let suite = scheme::peek_header(pk).map_err(value_err)?.suite;
    let g = group(&suite)?;
    let p = load_pk(&g, pk)?;
    let k = scheme::decode_private_key(&g, sk).map_err(value_err)?;
    let pkg = ContentPackage::decode(&g, package).map_err(|e| IntegrityError::new_err(e.to_string()))?;
    let content = envelope::open(&Scheme::new(g, p.mode), &StreamDem, &p, &pkg, &k).map_err(|e| match e {
        EnvelopeError::Denied(_) => AccessDenied::new_err(e.to_string()),
        EnvelopeError::Integrity(_) | EnvelopeError::Encoding(_) => IntegrityError::new_err(e.to_string()),
        _ => value_err(e),
    })?;
    Ok(PyBytes::new(py, &content))
}

/// Run a scenario; returns `(metrics_text, log_text)`.
///
/// With no scenario text the built-in five-node line is used.
#[pyfunction]
#[pyo3(signature = (scenario=None, capacity=65536, seed=0))]
fn simulate(scenario: Option<&str>, capacity: usize, seed: u64) -> PyResult<(String, String)> {
    let cfg = match scenario {
        Some(text) => sim::ScenarioConfig::parse(text).map_err(value_err)?,
        None => sim::fixed_line(capacity, seed),
    };
    let out = sim::run_scenario(&cfg).map_err(value_err)?;
    Ok((out.metrics.to_string(), out.log.to_text()))
}

/// Recompute the metrics text from an event log.
#[pyfunction]
fn replay(log: &str) -> PyResult<String> {
    sim::replay(log)
        .map(|m| m.to_string())
        .map_err(|e| VerificationError::new_err(e.to_string()))
}

/// Hash-chained revocation list.
#[pyclass(name = "Ledger")]
struct PyLedger {
    inner: RevocationLedger,
}

fn parse_day(text: &str) -> PyResult<tsabe::time::Day> {
    Calendar::Gregorian.parse_day(text).map_err(value_err)
}

fn parse_pid(text: &str) -> PyResult<PseudoIdentity> {
    PseudoIdentity::parse(text, group(DEFAULT_SUITE)?.order()).map_err(value_err)
}

#[pymethods]
impl PyLedger {
    #[new]
    fn new() -> Self {
        PyLedger {
            inner: RevocationLedger::new(),
        }
    }

    /// Decode and verify a ledger.
    #[staticmethod]
    fn decode(bytes: &[u8]) -> PyResult<Self> {
        let inner = RevocationLedger::decode(bytes).map_err(|e| VerificationError::new_err(e.to_string()))?;
        inner.verify().map_err(|e| VerificationError::new_err(e.to_string()))?;
        Ok(PyLedger { inner })
    }

    fn encode<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.encode())
    }

    /// Returns False when the pid was already revoked.
    fn revoke(&mut self, pid: &str, expiry: &str, now: &str) -> PyResult<bool> {
        let r = self
            .inner
            .revoke(&parse_pid(pid)?, parse_day(expiry)?, parse_day(now)?)
            .map_err(value_err)?;
        Ok(matches!(r, tsabe::subscription::Revocation::Appended(_)))
    }

    fn is_revoked(&self, pid: &str) -> PyResult<bool> {
        Ok(self.inner.is_revoked(&parse_pid(pid)?))
    }

    fn prune(&mut self, clock: &str) -> PyResult<usize> {
        self.inner.prune(parse_day(clock)?).map_err(value_err)
    }

    fn verify(&self) -> PyResult<()> {
        self.inner.verify().map_err(|e| VerificationError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.blocks().len()
    }
}

#[pymodule]
fn tsabe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AccessDenied", m.py().get_type::<AccessDenied>())?;
    m.add("IntegrityError", m.py().get_type::<IntegrityError>())?;
    m.add("VerificationError", m.py().get_type::<VerificationError>())?;
    m.add_function(wrap_pyfunction!(cover, m)?)?;
    m.add_function(wrap_pyfunction!(setup, m)?)?;
    m.add_function(wrap_pyfunction!(keygen, m)?)?;
    m.add_function(wrap_pyfunction!(encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(decrypt, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(seal, m)?)?;
    m.add_function(wrap_pyfunction!(open_package, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_class::<PyLedger>()?;
    Ok(())
}
