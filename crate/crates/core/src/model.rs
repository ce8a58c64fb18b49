//! Domain types and right-hand sides for the two-firm capital dynamics.
//!
//! Capital and time are treated as dimensionless throughout; growth rates
//! `rho` are per unit time and saturation coefficients `kappa` per unit
//! capital.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::SolverSettings;

/// Default floor below which a firm's capital counts as extinguished.
pub const DEFAULT_EXTINCTION_FLOOR: f64 = 1e-12;

/// Validation failure; the message names the first violated invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be {requirement}")]
    Invalid {
        field: String,
        requirement: &'static str,
    },
    #[error("x out of [0,1)")]
    TaxRateOutOfRange { x: f64 },
    #[error("system 'taxed' requires a tax policy other than 'none'")]
    TaxedWithoutTax,
}

/// One firm's growth rate, demand-saturation coefficient, and initial capital.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmParams {
    /// Intrinsic capital growth rate (per unit time, > 0).
    pub rho: f64,
    /// Demand-saturation coefficient (per unit capital, > 0).
    pub kappa: f64,
    /// Initial capital (>= 0).
    pub v0: f64,
}

impl FirmParams {
    pub fn new(rho: f64, kappa: f64, v0: f64) -> Self {
        Self { rho, kappa, v0 }
    }

    fn validate(&self, which: &str) -> Result<(), ModelError> {
        check_positive(&format!("{which}.rho"), self.rho)?;
        check_positive(&format!("{which}.kappa"), self.kappa)?;
        check_nonnegative(&format!("{which}.v0"), self.v0)
    }
}

/// Weights of the linear total-demand function `F(V1, V2) = lambda1*V1 + lambda2*V2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSpec {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl DemandSpec {
    fn validate(&self) -> Result<(), ModelError> {
        check_positive("demand.lambda1", self.lambda1)?;
        check_positive("demand.lambda2", self.lambda2)
    }
}

/// How the state taxes the firms, if at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaxPolicy {
    #[default]
    #[serde(rename = "none")]
    NoTax,
    /// Fixed amounts collected per unit time from each firm.
    LumpSum { u1: f64, u2: f64 },
    /// A fixed share `x` of capital collected per unit time, `0 <= x < 1`.
    Proportional { x: f64 },
}

impl TaxPolicy {
    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            TaxPolicy::NoTax => Ok(()),
            TaxPolicy::LumpSum { u1, u2 } => {
                check_nonnegative("tax.u1", u1)?;
                check_nonnegative("tax.u2", u2)
            }
            TaxPolicy::Proportional { x } => {
                if x.is_finite() && (0.0..1.0).contains(&x) {
                    Ok(())
                } else {
                    Err(ModelError::TaxRateOutOfRange { x })
                }
            }
        }
    }
}

/// Which dynamical system drives the two capitals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// Shared saturation of total demand `F = kappa1*V1 + kappa2*V2`:
    /// `Vi' = Vi*(rhoi - kappai*F)`.
    Competing,
    /// Shared linear demand with explicit weights:
    /// `Vi' = Vi*(rhoi - kappai*(lambda1*V1 + lambda2*V2))`.
    LinearDemand,
    /// Classical predator-prey couple without self-saturation:
    /// `V1' = V1*(rho1 - kappa2*V2)`, `V2' = V2*(-rho2 + kappa1*V1)`.
    /// Ignores the tax policy and the coupling switch.
    LotkaVolterra,
    /// The competing system with a tax drain subtracted from each firm:
    /// `Vi' = Vi*(rhoi - kappai^2*Vi - kappa1*kappa2*Vj) - Ui`.
    Taxed,
}

/// Whether cross-firm terms enter the right-hand side.
///
/// `Decoupled` drops the competitor's contribution from each firm's
/// saturation term, which is the regime in which the closed forms hold.
/// Lotka-Volterra dynamics are always coupled; the switch is ignored there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    #[default]
    Coupled,
    Decoupled,
}

/// A complete, reproducible description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub firm1: FirmParams,
    pub firm2: FirmParams,
    /// Demand weights for [`SystemKind::LinearDemand`]; defaults to
    /// `lambdai = kappai`, which reduces linear demand to the competing system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<DemandSpec>,
    pub system: SystemKind,
    #[serde(default)]
    pub tax: TaxPolicy,
    /// End of the simulated time interval `[0, horizon]` (> 0).
    pub horizon: f64,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Capital level below which a firm is pinned to zero, modeling market exit.
    #[serde(default = "default_extinction_floor")]
    pub extinction_floor: f64,
    #[serde(default)]
    pub coupling: Coupling,
}

fn default_extinction_floor() -> f64 {
    DEFAULT_EXTINCTION_FLOOR
}

impl Scenario {
    /// A scenario with no tax, default solver settings, coupled dynamics,
    /// and the default extinction floor.
    pub fn new(firm1: FirmParams, firm2: FirmParams, system: SystemKind, horizon: f64) -> Self {
        Self {
            firm1,
            firm2,
            demand: None,
            system,
            tax: TaxPolicy::NoTax,
            horizon,
            solver: SolverSettings::default(),
            extinction_floor: DEFAULT_EXTINCTION_FLOOR,
            coupling: Coupling::Coupled,
        }
    }

    pub fn with_tax(mut self, tax: TaxPolicy) -> Self {
        self.tax = tax;
        self
    }

    pub fn with_demand(mut self, demand: DemandSpec) -> Self {
        self.demand = Some(demand);
        self
    }

    pub fn with_solver(mut self, solver: SolverSettings) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_extinction_floor(mut self, floor: f64) -> Self {
        self.extinction_floor = floor;
        self
    }

    /// Demand weights, falling back to `lambdai = kappai`.
    pub fn demand_or_default(&self) -> DemandSpec {
        self.demand.unwrap_or(DemandSpec {
            lambda1: self.firm1.kappa,
            lambda2: self.firm2.kappa,
        })
    }

    /// Checks every type invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.firm1.validate("firm1")?;
        self.firm2.validate("firm2")?;
        if let Some(d) = &self.demand {
            d.validate()?;
        }
        self.tax.validate()?;
        if self.system == SystemKind::Taxed && self.tax == TaxPolicy::NoTax {
            return Err(ModelError::TaxedWithoutTax);
        }
        check_positive("horizon", self.horizon)?;
        self.solver.validate(self.horizon)?;
        check_nonnegative("extinction_floor", self.extinction_floor)
    }

    /// Right-hand side of this scenario's own system.
    pub fn rhs(&self, state: [f64; 2], t: f64) -> [f64; 2] {
        rhs(self.system, self, state, t)
    }
}

/// Consuming validation: hands the scenario back unchanged iff it is valid.
pub fn validate(scenario: Scenario) -> Result<Scenario, ModelError> {
    scenario.validate()?;
    Ok(scenario)
}

/// Instantaneous growth rates `(dV1/dt, dV2/dt)` of the chosen system at `state`.
///
/// The tax drain applies to every system except Lotka-Volterra, which ignores
/// the tax policy. The systems are autonomous; `t` is accepted for interface
/// uniformity only.
pub fn rhs(system: SystemKind, scenario: &Scenario, state: [f64; 2], _t: f64) -> [f64; 2] {
    let [v1, v2] = state;
    let f1 = scenario.firm1;
    let f2 = scenario.firm2;

    let growth = match system {
        SystemKind::Competing => match scenario.coupling {
            Coupling::Coupled => {
                let f = f1.kappa * v1 + f2.kappa * v2;
                [v1 * (f1.rho - f1.kappa * f), v2 * (f2.rho - f2.kappa * f)]
            }
            Coupling::Decoupled => [
                v1 * (f1.rho - f1.kappa * f1.kappa * v1),
                v2 * (f2.rho - f2.kappa * f2.kappa * v2),
            ],
        },
        SystemKind::LinearDemand => {
            let d = scenario.demand_or_default();
            match scenario.coupling {
                Coupling::Coupled => {
                    let f = d.lambda1 * v1 + d.lambda2 * v2;
                    [v1 * (f1.rho - f1.kappa * f), v2 * (f2.rho - f2.kappa * f)]
                }
                Coupling::Decoupled => [
                    v1 * (f1.rho - f1.kappa * d.lambda1 * v1),
                    v2 * (f2.rho - f2.kappa * d.lambda2 * v2),
                ],
            }
        }
        SystemKind::LotkaVolterra => [
            v1 * (f1.rho - f2.kappa * v2),
            v2 * (-f2.rho + f1.kappa * v1),
        ],
        SystemKind::Taxed => match scenario.coupling {
            Coupling::Coupled => [
                v1 * (f1.rho - f1.kappa * f1.kappa * v1 - f1.kappa * f2.kappa * v2),
                v2 * (f2.rho - f2.kappa * f2.kappa * v2 - f1.kappa * f2.kappa * v1),
            ],
            Coupling::Decoupled => [
                v1 * (f1.rho - f1.kappa * f1.kappa * v1),
                v2 * (f2.rho - f2.kappa * f2.kappa * v2),
            ],
        },
    };

    let drain = if system == SystemKind::LotkaVolterra {
        [0.0, 0.0]
    } else {
        match scenario.tax {
            TaxPolicy::NoTax => [0.0, 0.0],
            TaxPolicy::LumpSum { u1, u2 } => [u1, u2],
            TaxPolicy::Proportional { x } => [x * v1, x * v2],
        }
    };

    [growth[0] - drain[0], growth[1] - drain[1]]
}

fn check_positive(field: &str, value: f64) -> Result<(), ModelError> {
    if !value.is_finite() {
        Err(ModelError::Invalid {
            field: field.to_string(),
            requirement: "finite",
        })
    } else if value <= 0.0 {
        Err(ModelError::Invalid {
            field: field.to_string(),
            requirement: "positive",
        })
    } else {
        Ok(())
    }
}

fn check_nonnegative(field: &str, value: f64) -> Result<(), ModelError> {
    if !value.is_finite() {
        Err(ModelError::Invalid {
            field: field.to_string(),
            requirement: "finite",
        })
    } else if value < 0.0 {
        Err(ModelError::Invalid {
            field: field.to_string(),
            requirement: "nonnegative",
        })
    } else {
        Ok(())
    }
}
