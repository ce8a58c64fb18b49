//! Python extension module exposing the duotax toolkit: scenario
//! construction from JSON, trajectory simulation, income functionals, the
//! compromise tax search, and the predator-prey analytics.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use duotax::compromise::{compromise_point, CompromiseOptions};
use duotax::income::{income_at, IncomeMode};
use duotax::lotka_volterra::analyze;
use duotax::model::Scenario as CoreScenario;
use duotax::ode::integrate;
use duotax::{closed_form, EventKind, Survivor};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<IncomeMode> {
    match mode {
        "coupled" | "coupled-numeric" => Ok(IncomeMode::CoupledNumeric),
        "decoupled" | "decoupled-closed-form" => Ok(IncomeMode::DecoupledClosedForm),
        other => Err(PyValueError::new_err(format!(
            "unknown mode '{other}' (expected 'coupled' or 'decoupled')"
        ))),
    }
}

/// A validated simulation scenario.
#[pyclass(name = "Scenario", module = "duotax_py")]
struct PyScenario {
    inner: CoreScenario,
}

#[pymethods]
impl PyScenario {
    /// Builds a scenario from its JSON config form (same schema as the CLI).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: CoreScenario = serde_json::from_str(text).map_err(value_error)?;
        inner.validate().map_err(value_error)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(value_error)
    }

    /// Integrates the scenario; returns `(samples, events)` where samples
    /// are `(t, v1, v2)` tuples and events `(t, kind)` pairs.
    fn simulate(&self) -> PyResult<(Vec<(f64, f64, f64)>, Vec<(f64, String)>)> {
        let traj = integrate(&self.inner).map_err(value_error)?;
        let samples = traj.samples.iter().map(|p| (p.t, p.v1, p.v2)).collect();
        let events = traj
            .events
            .iter()
            .map(|e| {
                let kind = match e.kind {
                    EventKind::ExtinctionFirm1 => "extinction_firm1",
                    EventKind::ExtinctionFirm2 => "extinction_firm2",
                };
                (e.t, kind.to_string())
            })
            .collect();
        Ok((samples, events))
    }

    /// Incomes `(h1, h2, h3)` at the scenario's tax rate, or at `x` when given.
    #[pyo3(signature = (mode = "decoupled", x = None))]
    fn income(&self, mode: &str, x: Option<f64>) -> PyResult<PyIncomeReport> {
        let mode = parse_mode(mode)?;
        let report = match x {
            Some(x) => income_at(&self.inner, x, mode),
            None => match mode {
                IncomeMode::CoupledNumeric => duotax::income_numeric(&self.inner),
                IncomeMode::DecoupledClosedForm => duotax::income_closed_form(&self.inner),
            },
        }
        .map_err(value_error)?;
        Ok(PyIncomeReport {
            x: report.x,
            mode: report.mode.as_str().to_string(),
            h1: report.h1,
            h2: report.h2,
            h3: report.h3,
            total: report.total,
        })
    }

    /// Runs the minimax compromise search over the tax-rate grid.
    #[pyo3(signature = (grid_size = 101, mode = "decoupled", include_state = true))]
    fn compromise(
        &self,
        grid_size: usize,
        mode: &str,
        include_state: bool,
    ) -> PyResult<PyCompromise> {
        let options = CompromiseOptions {
            grid_size,
            mode: parse_mode(mode)?,
            include_state,
            ..Default::default()
        };
        let r = compromise_point(&self.inner, &options).map_err(value_error)?;
        Ok(PyCompromise {
            x_star: r.x_star,
            max_deviation: r.max_deviation,
            deviations: r.deviations.to_vec(),
            c1: r.c_values.c1,
            c2: r.c_values.c2,
            c3: r.c_values.c3,
            grid_size: r.grid_size,
            mode: r.mode.as_str().to_string(),
        })
    }

    /// Predator-prey analytics: equilibrium, conserved quantity, period,
    /// per-period time averages.
    fn analyze_lv(&self) -> PyResult<PyLvAnalysis> {
        let a = analyze(&self.inner).map_err(value_error)?;
        Ok(PyLvAnalysis {
            equilibrium: a.equilibrium,
            x_invariant: a.x_invariant,
            x_drift: a.x_drift,
            period: a.period,
            averages: a.averages,
        })
    }

    /// Which firm persists under shared demand: "firm1", "firm2", or
    /// "coexistence".
    fn survivor(&self) -> &'static str {
        match closed_form::survivor(&self.inner) {
            Survivor::Firm1Persists => "firm1",
            Survivor::Firm2Persists => "firm2",
            Survivor::Coexistence => "coexistence",
        }
    }

    /// The capital ratio `V1^kappa2 / V2^kappa1` predicted at time `t`.
    fn ratio_law(&self, t: f64) -> PyResult<f64> {
        closed_form::ratio_law(&self.inner, t).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(system={:?}, horizon={})",
            self.inner.system, self.inner.horizon
        )
    }
}

#[pyclass(name = "IncomeReport", module = "duotax_py")]
struct PyIncomeReport {
    #[pyo3(get)]
    x: f64,
    #[pyo3(get)]
    mode: String,
    #[pyo3(get)]
    h1: f64,
    #[pyo3(get)]
    h2: f64,
    #[pyo3(get)]
    h3: f64,
    #[pyo3(get)]
    total: f64,
}

#[pymethods]
impl PyIncomeReport {
    fn __repr__(&self) -> String {
        format!(
            "IncomeReport(x={}, h1={}, h2={}, h3={}, mode={})",
            self.x, self.h1, self.h2, self.h3, self.mode
        )
    }
}

#[pyclass(name = "CompromiseResult", module = "duotax_py")]
struct PyCompromise {
    #[pyo3(get)]
    x_star: f64,
    #[pyo3(get)]
    max_deviation: f64,
    #[pyo3(get)]
    deviations: Vec<f64>,
    #[pyo3(get)]
    c1: f64,
    #[pyo3(get)]
    c2: f64,
    #[pyo3(get)]
    c3: f64,
    #[pyo3(get)]
    grid_size: usize,
    #[pyo3(get)]
    mode: String,
}

#[pymethods]
impl PyCompromise {
    fn __repr__(&self) -> String {
        format!(
            "CompromiseResult(x_star={}, max_deviation={})",
            self.x_star, self.max_deviation
        )
    }
}

#[pyclass(name = "LvAnalysis", module = "duotax_py")]
struct PyLvAnalysis {
    #[pyo3(get)]
    equilibrium: (f64, f64),
    #[pyo3(get)]
    x_invariant: f64,
    #[pyo3(get)]
    x_drift: f64,
    #[pyo3(get)]
    period: Option<f64>,
    #[pyo3(get)]
    averages: (f64, f64),
}

#[pymethods]
impl PyLvAnalysis {
    fn __repr__(&self) -> String {
        format!(
            "LvAnalysis(equilibrium={:?}, period={:?})",
            self.equilibrium, self.period
        )
    }
}

/// Capital at time `t` under the decoupled growth law
/// `V' = V*(rho - x - kappa_sq*V)` started at `v0`.
#[pyfunction]
fn logistic_value(rho: f64, kappa_sq: f64, x: f64, v0: f64, t: f64) -> f64 {
    closed_form::logistic_solution(rho, kappa_sq, x, v0).value(t)
}

/// Running income `\int_0^{t_end} V dt` of the same law.
#[pyfunction]
fn logistic_income(rho: f64, kappa_sq: f64, x: f64, v0: f64, t_end: f64) -> f64 {
    closed_form::logistic_solution(rho, kappa_sq, x, v0).integral(t_end)
}

/// Time for the decoupled law to move from `v_from` to `v_to`.
#[pyfunction]
fn time_to_reach(rho: f64, kappa_sq: f64, x: f64, v_from: f64, v_to: f64) -> PyResult<f64> {
    closed_form::time_to_reach(rho, kappa_sq, x, v_from, v_to).map_err(value_error)
}

#[pymodule]
fn duotax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyIncomeReport>()?;
    m.add_class::<PyCompromise>()?;
    m.add_class::<PyLvAnalysis>()?;
    m.add_function(wrap_pyfunction!(logistic_value, m)?)?;
    m.add_function(wrap_pyfunction!(logistic_income, m)?)?;
    m.add_function(wrap_pyfunction!(time_to_reach, m)?)?;
    Ok(())
}
