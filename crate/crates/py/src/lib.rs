//! Python bindings for the kspt core.
//!
//! Scalar results come back as native Python values; structured results come
//! back as JSON strings in the same schemas the CLI emits (those schemas use
//! 1-based basis/slot indices). Direct method arguments are 0-based, matching
//! Python indexing.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kspt_core::coloring;
use kspt_core::harness;
use kspt_core::hvt2d;
use kspt_core::ks;
use kspt_core::quantum;
use kspt_core::strategies;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pretty(value: serde_json::Value) -> String {
    serde_json::to_string_pretty(&value).expect("reports serialize")
}

fn ray(coords: [i64; 4]) -> PyResult<ks::IntVec4> {
    ks::IntVec4::new(coords).map_err(value_err)
}

fn unit(v: (f64, f64, f64)) -> PyResult<hvt2d::UnitVec3> {
    hvt2d::UnitVec3::new(v.0, v.1, v.2).map_err(value_err)
}

/// A set of orthogonal 4-ray bases with its occurrence index.
#[pyclass(name = "KsSet", module = "kspt")]
struct PyKsSet {
    inner: ks::KsSet,
}

#[pymethods]
impl PyKsSet {
    /// The canonical 18-ray, 9-basis construction.
    #[staticmethod]
    fn builtin() -> Self {
        Self {
            inner: ks::cabello_set(),
        }
    }

    /// Parse a set from text: one basis per line, vectors as `(a,b,c,d)`,
    /// `#` comments allowed.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ks::setfile::parse_set(text).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| value_err(format!("cannot read {path}: {e}")))?;
        Self::from_text(&text)
    }

    fn num_bases(&self) -> usize {
        self.inner.num_bases()
    }

    /// The four rays of basis `index` (0-based), as stored.
    fn basis(&self, index: usize) -> PyResult<Vec<[i64; 4]>> {
        let basis = self.inner.basis(index).map_err(value_err)?;
        Ok(basis.vectors().iter().map(|v| v.coords()).collect())
    }

    /// Distinct rays in canonical form, in first-appearance order.
    fn distinct_vectors(&self) -> Vec<[i64; 4]> {
        self.inner.distinct().iter().map(|v| v.coords()).collect()
    }

    /// All (basis, slot) occurrences of a ray, 0-based.
    fn occurrences(&self, vector: [i64; 4]) -> PyResult<Vec<(usize, usize)>> {
        let canon = ray(vector)?.canonical();
        self.inner
            .occurrences_of(&canon)
            .map(|occ| occ.to_vec())
            .ok_or_else(|| value_err(format!("ray {canon} is not in the set")))
    }

    /// Structural validation report as JSON.
    fn validate_json(&self) -> String {
        pretty(ks::validate_ks_set(&self.inner).to_json_value())
    }

    fn __repr__(&self) -> String {
        format!(
            "KsSet(bases={}, distinct_rays={})",
            self.inner.num_bases(),
            self.inner.distinct().len()
        )
    }
}

/// Exhaustive noncontextual search plus the parity certificate, as JSON.
#[pyfunction]
fn search_noncontextual_json(set: &PyKsSet) -> PyResult<String> {
    let satisfying = coloring::search_noncontextual(&set.inner).map_err(value_err)?;
    let certificate = coloring::parity_certificate(&set.inner);
    Ok(pretty(serde_json::json!({
        "satisfying": satisfying.iter().map(|a| a.to_json_value()).collect::<Vec<_>>(),
        "parityCertificate": certificate.as_ref().map(|c| c.to_json_value()),
    })))
}

/// Minimum-contextuality search result as JSON.
#[pyfunction]
fn min_contextuality_json(set: &PyKsSet) -> PyResult<String> {
    let result = coloring::min_contextuality(&set.inner).map_err(value_err)?;
    Ok(pretty(result.to_json_value()))
}

/// The minimum number of rays forced to take context-dependent values.
#[pyfunction]
fn min_contextuality_defect(set: &PyKsSet) -> PyResult<usize> {
    Ok(coloring::min_contextuality(&set.inner)
        .map_err(value_err)?
        .defect)
}

/// Best deterministic strategy by exhaustive search, as JSON with its exact
/// win probability under "winProb".
#[pyfunction]
fn best_classical_json(set: &PyKsSet) -> PyResult<String> {
    let (win, strategy) = strategies::best_classical(&set.inner).map_err(value_err)?;
    let mut value = strategy.to_json_value();
    value["winProb"] = serde_json::json!(win.fraction());
    Ok(pretty(value))
}

/// Exact squared-overlap probability (u·v)²/(‖u‖²‖v‖²) as "num/den".
#[pyfunction]
fn overlap_prob(u: [i64; 4], v: [i64; 4]) -> PyResult<String> {
    Ok(quantum::overlap_prob(&ray(u)?, &ray(v)?).fraction())
}

/// Exact joint outcome distribution for a basis pair (0-based indices), as
/// JSON with "num/den" cells.
#[pyfunction]
fn joint_distribution_json(
    set: &PyKsSet,
    alice_basis: usize,
    bob_basis: usize,
) -> PyResult<String> {
    let d = quantum::joint_distribution(&set.inner, alice_basis, bob_basis).map_err(value_err)?;
    Ok(pretty(d.to_json_value()))
}

/// Exact win probability of a named strategy ("quantum", "one-cbit",
/// "best-classical") as "num/den".
#[pyfunction]
fn exact_win_probability(set: &PyKsSet, strategy: &str) -> PyResult<String> {
    let strategy = strategies::builtin(&set.inner, strategy).map_err(value_err)?;
    Ok(harness::exact_win_probability(strategy.as_ref())
        .map_err(value_err)?
        .fraction())
}

/// Play seeded rounds of a named strategy; returns the transcript JSON.
#[pyfunction]
#[pyo3(signature = (set, strategy, rounds = 10_000, seed = 0))]
fn play_json(set: &PyKsSet, strategy: &str, rounds: u64, seed: u64) -> PyResult<String> {
    let strategy = strategies::builtin(&set.inner, strategy).map_err(value_err)?;
    let transcript =
        harness::play_rounds(&set.inner, strategy.as_ref(), rounds, seed).map_err(value_err)?;
    Ok(transcript.to_json_string())
}

/// Born-rule probability ½(1 + n·m) for unit Bloch directions.
#[pyfunction]
fn born_prob(n: (f64, f64, f64), m: (f64, f64, f64)) -> PyResult<f64> {
    Ok(hvt2d::born_prob(&unit(n)?, &unit(m)?))
}

/// The hidden-variable model's definite value (0 or 1) at λ.
#[pyfunction]
fn hvt_value(n: (f64, f64, f64), m: (f64, f64, f64), lam: f64) -> PyResult<u8> {
    let h = hvt2d::HiddenVar::new(lam).map_err(value_err)?;
    Ok(hvt2d::hvt_value(&unit(n)?, &unit(m)?, h))
}

/// Closed-form λ-average of the model's value.
#[pyfunction]
fn hvt_prob_analytic(n: (f64, f64, f64), m: (f64, f64, f64)) -> PyResult<f64> {
    Ok(hvt2d::hvt_prob_analytic(&unit(n)?, &unit(m)?))
}

/// Monte Carlo λ-average: returns (estimate, standard_error).
#[pyfunction]
#[pyo3(signature = (n, m, samples = 100_000, seed = 0))]
fn hvt_prob_mc(
    n: (f64, f64, f64),
    m: (f64, f64, f64),
    samples: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    if samples == 0 {
        return Err(value_err("samples must be at least 1"));
    }
    Ok(hvt2d::hvt_prob_mc(&unit(n)?, &unit(m)?, samples, seed))
}

/// The model-vs-Born verification grid as JSON rows.
#[pyfunction]
#[pyo3(signature = (pairs = 101, samples = 10_000, seed = 0))]
fn hvt_grid_json(pairs: usize, samples: u64, seed: u64) -> PyResult<String> {
    if pairs < 2 {
        return Err(value_err("grid needs at least 2 pairs"));
    }
    if samples == 0 {
        return Err(value_err("samples must be at least 1"));
    }
    let rows = hvt2d::verification_table(pairs, samples, seed);
    Ok(pretty(serde_json::json!({
        "pairs": pairs,
        "samples": samples,
        "seed": seed,
        "rows": rows.iter().map(|r| r.to_json_value()).collect::<Vec<_>>(),
    })))
}

#[pymodule]
fn kspt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyKsSet>()?;
    m.add_function(wrap_pyfunction!(search_noncontextual_json, m)?)?;
    m.add_function(wrap_pyfunction!(min_contextuality_json, m)?)?;
    m.add_function(wrap_pyfunction!(min_contextuality_defect, m)?)?;
    m.add_function(wrap_pyfunction!(best_classical_json, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_prob, m)?)?;
    m.add_function(wrap_pyfunction!(joint_distribution_json, m)?)?;
    m.add_function(wrap_pyfunction!(exact_win_probability, m)?)?;
    m.add_function(wrap_pyfunction!(play_json, m)?)?;
    m.add_function(wrap_pyfunction!(born_prob, m)?)?;
    m.add_function(wrap_pyfunction!(hvt_value, m)?)?;
    m.add_function(wrap_pyfunction!(hvt_prob_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(hvt_prob_mc, m)?)?;
    m.add_function(wrap_pyfunction!(hvt_grid_json, m)?)?;
    Ok(())
}
