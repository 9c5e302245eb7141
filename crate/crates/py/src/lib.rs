//! Python bindings: sample-size bounds, the GF(2) solver, the interval
//! learners with exact risks, parity-ball geometry, and small MLPs.

use noisylab::data::inject_label_noise;
use noisylab::distributions::{IntervalParityModel, ParityBallModel};
use noisylab::interval::{Interval, IntervalSet};
use noisylab::learners::{self, Hypothesis, LinearClassifier, ParityHypothesis, UnionOfIntervals};
use noisylab::neural::Mlp;
use noisylab::risk::{self, Norm};
use noisylab::{Dataset, LabError, Point, Seed};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: LabError) -> PyErr {
    match e {
        LabError::InvalidParameter(_)
        | LabError::OutOfRange(_)
        | LabError::DimensionMismatch { .. }
        | LabError::NotOnSupport
        | LabError::UnsupportedHypothesis(_)
        | LabError::Precondition(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_norm(norm: &str) -> PyResult<Norm> {
    match norm {
        "l2" => Ok(Norm::L2),
        "linf" => Ok(Norm::Linf),
        _ => Err(PyValueError::new_err(format!("norm must be 'l2' or 'linf', not {norm:?}"))),
    }
}

fn line_dataset(xs: &[f64], ys: &[usize]) -> PyResult<Dataset> {
    let pts = xs.iter().map(|&x| Point::new(vec![x])).collect::<Result<Vec<_>, _>>().map_err(to_py)?;
    Dataset::from_points(pts, ys.to_vec(), 2).map_err(to_py)
}

#[pyfunction]
fn bound_majority(eta: f64, delta1: f64) -> PyResult<u64> {
    Ok(learners::bound_majority(eta, delta1).map_err(to_py)?.value)
}

#[pyfunction]
fn bound_minwt(zeta_size: usize, k: u64, delta2: f64) -> PyResult<u64> {
    Ok(learners::bound_minwt(zeta_size, k, delta2).map_err(to_py)?.value)
}

#[pyfunction]
fn bound_infected(zeta_size: usize, eta: f64, c2: f64, delta: f64) -> PyResult<u64> {
    Ok(learners::bound_infected(zeta_size, eta, c2, delta).map_err(to_py)?.value)
}

#[pyfunction]
fn bound_thm3(n: u32, eta: f64, gamma: f64, delta: f64) -> PyResult<u64> {
    Ok(learners::bound_thm3(n, eta, gamma, delta).map_err(to_py)?.value)
}

/// Solve `rows · x = targets` over GF(2). Returns `(x, free_vars)` or
/// `None` when inconsistent.
#[pyfunction]
fn gf2_solve(rows: Vec<Vec<bool>>, targets: Vec<bool>) -> PyResult<Option<(Vec<bool>, Vec<usize>)>> {
    if rows.len() != targets.len() {
        return Err(PyValueError::new_err("one target per row is required"));
    }
    let n = rows.first().map_or(0, Vec::len);
    let pairs = rows.iter().zip(targets).map(|(r, t)| (noisylab::gf2::BitRow::from_bools(r), t)).collect();
    let sys = noisylab::gf2::Gf2System::from_rows(n, pairs).map_err(to_py)?;
    Ok(noisylab::gf2::gf2_solve(&sys).solution().map(|s| (s.x.to_bools(), s.free_vars)))
}

#[pyfunction]
fn circular_segment_fraction(t: f64) -> PyResult<f64> {
    risk::circular_segment_fraction(t).map_err(to_py)
}

/// Exact `(natural, adversarial)` risks of `w·x + w0 > 0` on the parity-ball model.
#[pyfunction]
#[pyo3(signature = (w, w0, gamma, r, k, orientation=0, norm="l2"))]
fn linear_ball_risks(w: Vec<f64>, w0: f64, gamma: f64, r: f64, k: usize, orientation: u8, norm: &str) -> PyResult<(f64, f64)> {
    let model = ParityBallModel::new(r, k, orientation).map_err(to_py)?;
    let h = Hypothesis::Linear(LinearClassifier::new(w, w0).map_err(to_py)?);
    risk::parity_ball_risks(&h, &model, gamma, parse_norm(norm)?).map_err(to_py)
}

/// Exact risks of the planar parity rule that labels the model correctly.
#[pyfunction]
#[pyo3(signature = (gamma, r, k, orientation=0, norm="l2"))]
fn parity_ball_risks(gamma: f64, r: f64, k: usize, orientation: u8, norm: &str) -> PyResult<(f64, f64)> {
    let model = ParityBallModel::new(r, k, orientation).map_err(to_py)?;
    let h = Hypothesis::Parity(ParityHypothesis::plane(1 - orientation).map_err(to_py)?);
    risk::parity_ball_risks(&h, &model, gamma, parse_norm(norm)?).map_err(to_py)
}

/// Parity set recovered from noisy samples by voting and elimination.
#[pyfunction]
fn learn_parity(xs: Vec<f64>, ys: Vec<usize>, n: u32) -> PyResult<Vec<u32>> {
    let ds = line_dataset(&xs, &ys)?;
    Ok(learners::learn_parity(ds.view(), n).map_err(to_py)?.hypothesis.set)
}

/// Pieces `(lo, hi, lo_closed, hi_closed)` of the zero-training-error union.
#[pyfunction]
fn learn_union_intervals(xs: Vec<f64>, ys: Vec<usize>) -> PyResult<Vec<(f64, f64, bool, bool)>> {
    let ds = line_dataset(&xs, &ys)?;
    let h = learners::learn_union_intervals(ds.view()).map_err(to_py)?;
    Ok(h.intervals.pieces().iter().map(|p| (p.lo, p.hi, p.lo_closed, p.hi_closed)).collect())
}

#[pyclass(name = "IntervalParityModel", frozen)]
struct PyIntervalModel {
    inner: IntervalParityModel,
}

#[pymethods]
impl PyIntervalModel {
    #[new]
    fn new(n: u32, parity_set: Vec<u32>, zeta: Vec<u64>) -> PyResult<Self> {
        Ok(Self { inner: IntervalParityModel::new(n, parity_set, zeta).map_err(to_py)? })
    }

    #[staticmethod]
    fn random(n: u32, zeta_size: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: IntervalParityModel::random(n, zeta_size, Seed(seed)).map_err(to_py)? })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn parity_set(&self) -> Vec<u32> {
        self.inner.parity_set().to_vec()
    }

    #[getter]
    fn zeta(&self) -> Vec<u64> {
        self.inner.zeta().to_vec()
    }

    fn true_label(&self, x: f64) -> PyResult<usize> {
        self.inner.true_label(x).map_err(to_py)
    }

    /// `m` samples with labels flipped at rate `eta`.
    #[pyo3(signature = (m, eta=0.0, seed=0))]
    fn sample(&self, m: usize, eta: f64, seed: u64) -> PyResult<(Vec<f64>, Vec<usize>)> {
        let clean = self.inner.sample(m, Seed(seed)).map_err(to_py)?;
        let ds = inject_label_noise(&clean, eta, Seed(seed).trial(1)).map_err(to_py)?;
        Ok((ds.samples().iter().map(|s| s.x.coords()[0]).collect(), ds.labels()))
    }

    /// Exact `(natural, adversarial)` risks of the parity of bits `set`.
    fn parity_risks(&self, set: Vec<u32>, gamma: f64) -> PyResult<(f64, f64)> {
        let h = ParityHypothesis::line(self.inner.n(), set).map_err(to_py)?;
        risk::interval_risks(&h, &self.inner, gamma).map_err(to_py)
    }

    /// Exact risks of a union given as `(lo, hi, lo_closed, hi_closed)` pieces.
    fn union_risks(&self, pieces: Vec<(f64, f64, bool, bool)>, gamma: f64) -> PyResult<(f64, f64)> {
        let set = IntervalSet::from_intervals(pieces.into_iter().map(|(a, b, c, d)| Interval::new(a, b, c, d)));
        risk::interval_risks(&UnionOfIntervals::new(set), &self.inner, gamma).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("IntervalParityModel(n={}, parity_set={:?}, zeta={:?})", self.inner.n(), self.inner.parity_set(), self.inner.zeta())
    }
}

#[pyclass(name = "Mlp", frozen)]
struct PyMlp {
    inner: Mlp,
}

#[pymethods]
impl PyMlp {
    #[new]
    #[pyo3(signature = (widths, seed=0))]
    fn new(widths: Vec<usize>, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: Mlp::new(&widths, Seed(seed)).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self { inner: Mlp::from_json(s).map_err(to_py)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[getter]
    fn widths(&self) -> Vec<usize> {
        self.inner.widths().to_vec()
    }

    #[getter]
    fn num_params(&self) -> usize {
        self.inner.num_params()
    }

    fn forward(&self, xs: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let flat: Vec<f64> = xs.concat();
        let logits = self.inner.forward_batch(&flat).map_err(to_py)?;
        Ok(logits.chunks(self.inner.num_classes()).map(<[f64]>::to_vec).collect())
    }

    fn predict(&self, xs: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        self.inner.predict_batch(&xs.concat()).map_err(to_py)
    }

    fn loss(&self, xs: Vec<Vec<f64>>, ys: Vec<usize>) -> PyResult<f64> {
        self.inner.loss(&xs.concat(), &ys).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Mlp(widths={:?})", self.inner.widths())
    }
}

#[pymodule]
#[pyo3(name = "noisylab")]
fn noisylab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", noisylab::VERSION)?;
    m.add_function(wrap_pyfunction!(bound_majority, m)?)?;
    m.add_function(wrap_pyfunction!(bound_minwt, m)?)?;
    m.add_function(wrap_pyfunction!(bound_infected, m)?)?;
    m.add_function(wrap_pyfunction!(bound_thm3, m)?)?;
    m.add_function(wrap_pyfunction!(gf2_solve, m)?)?;
    m.add_function(wrap_pyfunction!(circular_segment_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(linear_ball_risks, m)?)?;
    m.add_function(wrap_pyfunction!(parity_ball_risks, m)?)?;
    m.add_function(wrap_pyfunction!(learn_parity, m)?)?;
    m.add_function(wrap_pyfunction!(learn_union_intervals, m)?)?;
    m.add_class::<PyIntervalModel>()?;
    m.add_class::<PyMlp>()?;
    Ok(())
}
