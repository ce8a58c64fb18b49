//! Finite-horizon income functionals: firm incomes `h1`, `h2` and state tax
//! revenue `h3`, by quadrature on integrated trajectories or by the analytic
//! antiderivative of the decoupled closed forms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form::{taxed_pair_solution, ClosedFormError};
use crate::model::{ModelError, Scenario, SystemKind, TaxPolicy};
use crate::ode::{integrate, OdeError};
use crate::quad::simpson;

/// Which route produced an [`IncomeReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncomeMode {
    /// Quadrature over a numerically integrated trajectory. Honors the
    /// scenario's coupling switch.
    CoupledNumeric,
    /// Analytic antiderivatives of the per-firm decoupled solutions.
    DecoupledClosedForm,
}

impl IncomeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            IncomeMode::CoupledNumeric => "coupled-numeric",
            IncomeMode::DecoupledClosedForm => "decoupled-closed-form",
        }
    }
}

/// Incomes of the two firms and the state over `[0, horizon]` at tax rate `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomeReport {
    pub x: f64,
    pub mode: IncomeMode,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IncomeError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error("income functionals require a proportional (or absent) tax policy")]
    LumpSumUnsupported,
    #[error("income functionals are not defined for the lotka-volterra system")]
    UnsupportedSystem,
}

fn proportional_rate(scenario: &Scenario) -> Result<f64, IncomeError> {
    if scenario.system == SystemKind::LotkaVolterra {
        return Err(IncomeError::UnsupportedSystem);
    }
    match scenario.tax {
        TaxPolicy::Proportional { x } => Ok(x),
        TaxPolicy::NoTax => Ok(0.0),
        TaxPolicy::LumpSum { .. } => Err(IncomeError::LumpSumUnsupported),
    }
}

/// Incomes by composite Simpson quadrature on an integrated trajectory:
/// `h1 = ∫V1 dt`, `h2 = ∫V2 dt`, `h3 = ∫x(V1+V2) dt`.
pub fn income_numeric(scenario: &Scenario) -> Result<IncomeReport, IncomeError> {
    scenario.validate()?;
    let x = proportional_rate(scenario)?;
    let trajectory = integrate(scenario)?;
    let ts: Vec<f64> = trajectory.samples.iter().map(|p| p.t).collect();
    let v1: Vec<f64> = trajectory.samples.iter().map(|p| p.v1).collect();
    let v2: Vec<f64> = trajectory.samples.iter().map(|p| p.v2).collect();
    let tax_flow: Vec<f64> = trajectory
        .samples
        .iter()
        .map(|p| x * (p.v1 + p.v2))
        .collect();
    let h1 = simpson(&ts, &v1);
    let h2 = simpson(&ts, &v2);
    let h3 = simpson(&ts, &tax_flow);
    Ok(IncomeReport {
        x,
        mode: IncomeMode::CoupledNumeric,
        h1,
        h2,
        h3,
        total: h1 + h2 + h3,
    })
}

/// Incomes from the analytic antiderivative of each firm's decoupled
/// solution; `h3 = x*(h1 + h2)` holds exactly in this mode.
pub fn income_closed_form(scenario: &Scenario) -> Result<IncomeReport, IncomeError> {
    scenario.validate()?;
    let x = proportional_rate(scenario)?;
    let (s1, s2) = taxed_pair_solution(scenario)?;
    let h1 = s1.integral(scenario.horizon);
    let h2 = s2.integral(scenario.horizon);
    let h3 = x * (h1 + h2);
    Ok(IncomeReport {
        x,
        mode: IncomeMode::DecoupledClosedForm,
        h1,
        h2,
        h3,
        total: h1 + h2 + h3,
    })
}

/// Combined firm income `h1 + h2` of the untaxed decoupled model.
pub fn total_income_untaxed(scenario: &Scenario) -> Result<f64, IncomeError> {
    if scenario.tax != TaxPolicy::NoTax {
        return Err(IncomeError::Invalid(ModelError::Invalid {
            field: "tax".to_string(),
            requirement: "absent for the untaxed total",
        }));
    }
    let report = income_closed_form(scenario)?;
    Ok(report.h1 + report.h2)
}

/// Evaluates incomes at an overriding tax rate `x` in the requested mode,
/// leaving the rest of the scenario untouched.
pub fn income_at(scenario: &Scenario, x: f64, mode: IncomeMode) -> Result<IncomeReport, IncomeError> {
    let overridden = scenario.clone().with_tax(TaxPolicy::Proportional { x });
    match mode {
        IncomeMode::CoupledNumeric => income_numeric(&overridden),
        IncomeMode::DecoupledClosedForm => income_closed_form(&overridden),
    }
}
