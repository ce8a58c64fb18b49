//! Analytic solutions and structural results for the saturation systems:
//! logistic trajectories, the capital-ratio law, single-firm equilibrium,
//! survivor determination, and time-to-reach.
//!
//! All closed forms apply to the decoupled reading of the dynamics (each
//! firm's equation with the cross term dropped); the coupled systems are
//! handled exclusively by [`crate::ode`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coupling, ModelError, Scenario, SystemKind, TaxPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("initial capitals must be positive for the ratio law")]
    ZeroInitialCapital,
    #[error("the ratio law requires a coupled shared-demand system")]
    SharedDemandRequired,
    #[error("requires a proportional (or absent) tax policy")]
    ProportionalTaxRequired,
    #[error("unreachable: the equilibrium is approached asymptotically and never crossed")]
    Unreachable,
}

/// Exact solution of the decoupled growth law `V' = V*(rho - x - kappa_sq*V)`.
///
/// The integration constant is fixed so that `value(0) = v0` holds exactly,
/// which forces the tax-adjusted form `D(x) = v0/(rho - x - kappa_sq*v0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticSolution {
    /// Effective growth rate `rho - x`; may be zero or negative.
    pub rho_eff: f64,
    /// Self-saturation coefficient (`kappa*lambda`, or `kappa^2` under taxation).
    pub kappa_sq: f64,
    /// The constant `D(x) = v0/(rho_eff - kappa_sq*v0)`; infinite when the
    /// solution starts exactly at its equilibrium.
    pub d_const: f64,
    pub v0: f64,
}

impl LogisticSolution {
    /// Long-run capital level `rho_eff/kappa_sq` (negative means decay to zero).
    pub fn equilibrium(&self) -> f64 {
        self.rho_eff / self.kappa_sq
    }

    /// Capital at time `t`; exact at `t = 0` and on the degenerate branches
    /// (`v0 = 0`, equilibrium start, `rho_eff = 0`).
    pub fn value(&self, t: f64) -> f64 {
        if t == 0.0 || self.v0 == 0.0 {
            return self.v0;
        }
        let r = self.rho_eff;
        let k = self.kappa_sq;
        let inv_d = (r - k * self.v0) / self.v0;
        if inv_d == 0.0 {
            return self.v0;
        }
        if r == 0.0 {
            // V' = -kappa_sq V^2
            return self.v0 / (1.0 + k * self.v0 * t);
        }
        r / (k + (-r * t).exp() * inv_d)
    }

    /// Analytic running income `\int_0^{t_end} value(t) dt`.
    ///
    /// Derived from the logistic form and accepted against quadrature; the
    /// degenerate branches integrate exactly (`v0*t_end` at equilibrium).
    pub fn integral(&self, t_end: f64) -> f64 {
        if self.v0 == 0.0 {
            return 0.0;
        }
        let r = self.rho_eff;
        let k = self.kappa_sq;
        let inv_d = (r - k * self.v0) / self.v0;
        if inv_d == 0.0 {
            return self.v0 * t_end;
        }
        if r == 0.0 {
            return (1.0 + k * self.v0 * t_end).ln() / k;
        }
        if r > 0.0 {
            (r * t_end + ((k + inv_d * (-r * t_end).exp()) * self.v0 / r).ln()) / k
        } else {
            ((k * (r * t_end).exp() + inv_d) * self.v0 / r).ln() / k
        }
    }
}

/// Builds the logistic solution for growth rate `rho`, self-saturation
/// `kappa_sq`, proportional tax rate `x`, and initial capital `v0`.
///
/// Preconditions (caller's responsibility): `rho > 0`, `kappa_sq > 0`,
/// `0 <= x < 1`, `v0 >= 0`, all finite.
pub fn logistic_solution(rho: f64, kappa_sq: f64, x: f64, v0: f64) -> LogisticSolution {
    debug_assert!(rho.is_finite() && rho > 0.0);
    debug_assert!(kappa_sq.is_finite() && kappa_sq > 0.0);
    debug_assert!(x.is_finite() && (0.0..1.0).contains(&x));
    debug_assert!(v0.is_finite() && v0 >= 0.0);
    let rho_eff = rho - x;
    LogisticSolution {
        rho_eff,
        kappa_sq,
        d_const: v0 / (rho_eff - kappa_sq * v0),
        v0,
    }
}

/// Diagnostic variant of the taxed closed form that keeps the constant at its
/// untaxed value `D = v0/(rho - kappa_sq*v0)`. It does not satisfy
/// `value(0) = v0` when `x != 0` and exists only for comparison reports.
pub fn uncorrected_taxed_value(rho: f64, kappa_sq: f64, x: f64, v0: f64, t: f64) -> f64 {
    let d = v0 / (rho - kappa_sq * v0);
    (rho - x) / (kappa_sq + (t * (x - rho)).exp() * d * rho - (t * (x - rho)).exp() * d * x)
}

/// Carrying capacity of an unopposed firm: the root of `rho - kappa*(lambda*V) = 0`.
pub fn equilibrium_single(rho: f64, kappa: f64, lambda: f64) -> Result<f64, ClosedFormError> {
    for (name, v) in [("rho", rho), ("kappa", kappa), ("lambda", lambda)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ClosedFormError::NotPositive(name));
        }
    }
    Ok(rho / (kappa * lambda))
}

/// The capital ratio `V1^kappa2 / V2^kappa1` at time `t`, which evolves as a
/// pure exponential with rate `rho1*kappa2 - rho2*kappa1` whenever both firms
/// saturate the same shared demand.
pub fn ratio_law(scenario: &Scenario, t: f64) -> Result<f64, ClosedFormError> {
    scenario.validate()?;
    let shared = matches!(
        scenario.system,
        SystemKind::Competing | SystemKind::LinearDemand
    ) && scenario.coupling == Coupling::Coupled;
    if !shared {
        return Err(ClosedFormError::SharedDemandRequired);
    }
    let (f1, f2) = (scenario.firm1, scenario.firm2);
    if f1.v0 <= 0.0 || f2.v0 <= 0.0 {
        return Err(ClosedFormError::ZeroInitialCapital);
    }
    let slope = f1.rho * f2.kappa - f2.rho * f1.kappa;
    Ok(f1.v0.powf(f2.kappa) / f2.v0.powf(f1.kappa) * (slope * t).exp())
}

/// Long-run outcome of the competing system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Survivor {
    Firm1Persists,
    Firm2Persists,
    Coexistence,
}

/// Which firm outlives the other under shared demand: determined by the sign
/// of `rho1*kappa2 - rho2*kappa1`. Assumes positive initial capitals.
pub fn survivor(scenario: &Scenario) -> Survivor {
    let d = scenario.firm1.rho * scenario.firm2.kappa - scenario.firm2.rho * scenario.firm1.kappa;
    if d > 0.0 {
        Survivor::Firm1Persists
    } else if d < 0.0 {
        Survivor::Firm2Persists
    } else {
        Survivor::Coexistence
    }
}

/// Elapsed time for the decoupled growth law to move from `v_from` to `v_to`.
///
/// Exact inverse of [`LogisticSolution::value`] on its valid domain; the
/// result is negative when `v_to` lies behind the direction of motion. Both
/// capitals must sit strictly on the same side of the equilibrium
/// `(rho - x)/kappa_sq`: the equilibrium itself is approached asymptotically
/// and is unreachable in finite time.
pub fn time_to_reach(
    rho: f64,
    kappa_sq: f64,
    x: f64,
    v_from: f64,
    v_to: f64,
) -> Result<f64, ClosedFormError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(ClosedFormError::NotPositive("rho"));
    }
    if !(kappa_sq.is_finite() && kappa_sq > 0.0) {
        return Err(ClosedFormError::NotPositive("kappa_sq"));
    }
    if !(v_from.is_finite() && v_from > 0.0) {
        return Err(ClosedFormError::NotPositive("v_from"));
    }
    if !(v_to.is_finite() && v_to > 0.0) {
        return Err(ClosedFormError::NotPositive("v_to"));
    }
    if v_to == v_from {
        return Ok(0.0);
    }
    let r = rho - x;
    let eq = r / kappa_sq;
    if v_from == eq || v_to == eq || ((v_from > eq) != (v_to > eq)) {
        return Err(ClosedFormError::Unreachable);
    }
    if r == 0.0 {
        // V(t) = v0/(1 + kappa_sq*v0*t)
        return Ok((v_from - v_to) / (kappa_sq * v_from * v_to));
    }
    Ok(
        ((v_to / (r - kappa_sq * v_to)) * ((r - kappa_sq * v_from) / v_from))
            .abs()
            .ln()
            / r,
    )
}

/// Per-firm logistic solutions of the proportionally taxed system in
/// decoupled mode, with self-saturation `kappai^2`.
///
/// `NoTax` is accepted as `x = 0`; lump-sum taxation admits no closed form.
pub fn taxed_pair_solution(
    scenario: &Scenario,
) -> Result<(LogisticSolution, LogisticSolution), ClosedFormError> {
    scenario.validate()?;
    let x = match scenario.tax {
        TaxPolicy::Proportional { x } => x,
        TaxPolicy::NoTax => 0.0,
        TaxPolicy::LumpSum { .. } => return Err(ClosedFormError::ProportionalTaxRequired),
    };
    let (f1, f2) = (scenario.firm1, scenario.firm2);
    Ok((
        logistic_solution(f1.rho, f1.kappa * f1.kappa, x, f1.v0),
        logistic_solution(f2.rho, f2.kappa * f2.kappa, x, f2.v0),
    ))
}
