//! Python bindings: strategies, games, equilibrium checks and the
//! full-space counter-strategy tools.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use qgame_core::equilibrium::{search_ne, verify_ne, Profile, SearchConfig};
use qgame_core::fullspace::{counter_strategy, forcing_deviation, no_ne_certificate, nontriviality_check};
use qgame_core::game::{bos_matrix, classical_mixed_payoff, BosParams, PayoffMatrix, Player, QuantumGame};
use qgame_core::qlinalg::{Mat2, Outcome};
use qgame_core::scheme::{strategy_matrix, EntanglementParam, StrategyParams, StrategySpace};
use qgame_core::QgameError;
use serde::Serialize;
use serde_json::Value;

type PyMatrix = [[Complex64; 2]; 2];

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core<T>(r: Result<T, QgameError>) -> PyResult<T> {
    r.map_err(value_error)
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(json_to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, json_to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

/// Converts any report into plain dicts, lists and floats.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(py, &serde_json::to_value(value).map_err(value_error)?)
}

fn parse_space(s: &str) -> PyResult<StrategySpace> {
    s.parse().map_err(value_error)
}

fn parse_player(s: &str) -> PyResult<Player> {
    match s.to_ascii_lowercase().as_str() {
        "alice" => Ok(Player::Alice),
        "bob" => Ok(Player::Bob),
        _ => Err(PyValueError::new_err(format!("unknown player '{s}' (expected alice or bob)"))),
    }
}

fn matrix_in(m: PyMatrix) -> PyResult<Mat2> {
    core(Mat2::new(m))
}

/// A player's move `U(theta, phi, psi)`.
#[pyclass(name = "Strategy", module = "qgame", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyStrategy(StrategyParams);

#[pymethods]
impl PyStrategy {
    /// Classical unless `phi` is given; full SU(2) when `psi` is given.
    #[new]
    #[pyo3(signature = (theta = 0.0, phi = None, psi = None))]
    fn new(theta: f64, phi: Option<f64>, psi: Option<f64>) -> PyResult<Self> {
        let p = match (phi, psi) {
            (_, Some(psi)) => StrategyParams::full(theta, phi.unwrap_or(0.0), psi),
            (Some(phi), None) => StrategyParams::restricted(theta, phi),
            (None, None) => StrategyParams::classical(theta),
        };
        core(p).map(PyStrategy)
    }

    #[staticmethod]
    fn classical(theta: f64) -> PyResult<Self> {
        core(StrategyParams::classical(theta)).map(PyStrategy)
    }

    #[staticmethod]
    fn restricted(theta: f64, phi: f64) -> PyResult<Self> {
        core(StrategyParams::restricted(theta, phi)).map(PyStrategy)
    }

    #[staticmethod]
    fn full(theta: f64, phi: f64, psi: f64) -> PyResult<Self> {
        core(StrategyParams::full(theta, phi, psi)).map(PyStrategy)
    }

    /// Angles of a 2x2 unitary, up to global phase.
    #[staticmethod]
    fn from_matrix(m: PyMatrix) -> PyResult<Self> {
        core(StrategyParams::from_unitary(&matrix_in(m)?)).map(PyStrategy)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi()
    }

    #[getter]
    fn psi(&self) -> f64 {
        self.0.psi()
    }

    #[getter]
    fn space(&self) -> &'static str {
        self.0.space().name()
    }

    fn matrix(&self) -> PyMatrix {
        strategy_matrix(&self.0).0
    }

    fn __repr__(&self) -> String {
        format!("Strategy({}, space={})", self.0, self.0.space().name())
    }
}

/// A 2x2 bimatrix played through the entangling circuit.
#[pyclass(name = "Game", module = "qgame", frozen)]
struct PyGame(QuantumGame);

fn entanglement(delta: f64) -> PyResult<EntanglementParam> {
    core(EntanglementParam::new(delta))
}

#[pymethods]
impl PyGame {
    /// `cells` maps "OO", "OT", "TO", "TT" to (alice, bob) payoffs.
    #[new]
    #[pyo3(signature = (cells, delta = FRAC_PI_2))]
    fn new(cells: HashMap<String, (f64, f64)>, delta: f64) -> PyResult<Self> {
        let mut table = [(0.0, 0.0); 4];
        for o in Outcome::ALL {
            table[o.index()] =
                *cells.get(o.label()).ok_or_else(|| PyValueError::new_err(format!("missing cell {}", o.label())))?;
        }
        if cells.len() != 4 {
            return Err(PyValueError::new_err("cells must have exactly the keys OO, OT, TO, TT"));
        }
        Ok(PyGame(QuantumGame::new(entanglement(delta)?, core(PayoffMatrix::from_cells(table))?)))
    }

    #[staticmethod]
    #[pyo3(signature = (alpha = 5.0, beta = 3.0, gamma = 1.0, delta = FRAC_PI_2))]
    fn bos(alpha: f64, beta: f64, gamma: f64, delta: f64) -> PyResult<Self> {
        let m = core(BosParams::new(alpha, beta, gamma).and_then(|p| bos_matrix(&p)))?;
        Ok(PyGame(QuantumGame::new(entanglement(delta)?, m)))
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta().value()
    }

    /// (P_OO, P_OT, P_TO, P_TT).
    fn distribution(&self, alice: PyRef<'_, PyStrategy>, bob: PyRef<'_, PyStrategy>) -> (f64, f64, f64, f64) {
        let [a, b, c, d] = self.0.distribution(&strategy_matrix(&alice.0), &strategy_matrix(&bob.0)).as_array();
        (a, b, c, d)
    }

    fn payoffs(&self, alice: PyRef<'_, PyStrategy>, bob: PyRef<'_, PyStrategy>) -> (f64, f64) {
        let p = self.0.play(&alice.0, &bob.0);
        (p.alice, p.bob)
    }

    /// Equilibrium certificate for a profile. Both moves are embedded in
    /// `space` (default: the larger of their spaces).
    #[pyo3(signature = (alice, bob, space = None, epsilon = None, grid = None))]
    fn verify_ne<'py>(
        &self,
        py: Python<'py>,
        alice: PyRef<'_, PyStrategy>,
        bob: PyRef<'_, PyStrategy>,
        space: Option<&str>,
        epsilon: Option<f64>,
        grid: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let space = match space {
            Some(s) => parse_space(s)?,
            None => alice.0.space().max(bob.0.space()),
        };
        let profile = core(Profile::new(core(alice.0.embed(space))?, core(bob.0.embed(space))?))?;
        let cfg = config(space, epsilon, grid, None, 0);
        let game = self.0;
        let cert = core(py.detach(|| verify_ne(&game, &profile, &cfg)))?;
        to_py(py, &cert)
    }

    #[pyo3(signature = (space, epsilon = None, grid = None, profile_grid = None, seed = 0))]
    fn search_ne<'py>(
        &self,
        py: Python<'py>,
        space: &str,
        epsilon: Option<f64>,
        grid: Option<usize>,
        profile_grid: Option<usize>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let space = parse_space(space)?;
        let cfg = config(space, epsilon, grid, profile_grid, seed);
        let game = self.0;
        let report = core(py.detach(|| search_ne(&game, space, &cfg)))?;
        to_py(py, &report)
    }

    /// (nontrivial, strict cell labels).
    fn nontriviality(&self) -> (bool, Vec<&'static str>) {
        let check = nontriviality_check(self.0.payoffs());
        (check.nontrivial, check.strict_cells.iter().map(|o| o.label()).collect())
    }

    /// Refutes `samples` random full-SU(2) profiles. Needs maximal
    /// entanglement and a nontrivial game.
    #[pyo3(signature = (samples = 100, seed = 0))]
    fn no_ne_certificate<'py>(&self, py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        if !self.0.delta().is_max() {
            return Err(PyValueError::new_err("the certificate needs delta = pi/2"));
        }
        let cfg = SearchConfig { seed, ..SearchConfig::default() };
        let m = *self.0.payoffs();
        let report = core(py.detach(|| no_ne_certificate(&m, samples, &cfg)))?;
        to_py(py, &report)
    }
}

fn config(
    space: StrategySpace,
    epsilon: Option<f64>,
    grid: Option<usize>,
    profile_grid: Option<usize>,
    seed: u64,
) -> SearchConfig {
    let base = SearchConfig::for_space(space);
    SearchConfig {
        epsilon: epsilon.unwrap_or(base.epsilon),
        grid_points_per_axis: grid.unwrap_or(base.grid_points_per_axis),
        profile_grid_points: profile_grid.unwrap_or(base.profile_grid_points),
        seed,
        ..base
    }
}

/// Bob's move reproducing Alice's `matrix` on the maximally entangled state.
#[pyfunction(name = "counter_strategy")]
fn py_counter_strategy(matrix: PyMatrix) -> PyResult<PyMatrix> {
    Ok(core(counter_strategy(&matrix_in(matrix)?))?.0)
}

/// Move for `player` ("alice" or "bob") that forces outcome `target`
/// ("OO", "OT", "TO" or "TT") against `opponent`.
#[pyfunction(name = "forcing_deviation")]
fn py_forcing_deviation(opponent: PyMatrix, player: &str, target: &str) -> PyResult<PyMatrix> {
    let target: Outcome = target.parse().map_err(value_error)?;
    Ok(core(forcing_deviation(&matrix_in(opponent)?, parse_player(player)?, target))?.0)
}

#[pyfunction(name = "classical_mixed_payoff")]
fn py_classical_mixed_payoff(alpha: f64, beta: f64, gamma: f64) -> PyResult<f64> {
    Ok(classical_mixed_payoff(&core(BosParams::new(alpha, beta, gamma))?))
}

#[pymodule]
fn qgame(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStrategy>()?;
    m.add_class::<PyGame>()?;
    m.add_function(wrap_pyfunction!(py_counter_strategy, m)?)?;
    m.add_function(wrap_pyfunction!(py_forcing_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(py_classical_mixed_payoff, m)?)?;
    Ok(())
}
