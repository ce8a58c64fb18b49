//! Analytics for the predator-prey regime: first integral, equilibrium,
//! period detection on trajectories, and time averages over one period.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, Scenario, SystemKind};
use crate::ode::{integrate, OdeError, Trajectory};
use crate::quad::simpson;

/// Oscillation amplitudes below this count as sitting at the equilibrium.
const AMPLITUDE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LvError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("state must be strictly positive")]
    NonpositiveState,
    #[error("no return found: the horizon is too short to observe a full cycle")]
    NoReturnFound,
    #[error("at equilibrium: oscillation amplitude below {AMPLITUDE_FLOOR:e}")]
    AtEquilibrium,
    #[error("requires the lotka-volterra system")]
    WrongSystem,
}

/// The four rate coefficients of the predator-prey couple
/// `V1' = V1*(rho1 - kappa2*V2)`, `V2' = V2*(-rho2 + kappa1*V1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LvSystem {
    pub rho1: f64,
    pub kappa1: f64,
    pub rho2: f64,
    pub kappa2: f64,
}

impl From<&Scenario> for LvSystem {
    fn from(s: &Scenario) -> Self {
        Self {
            rho1: s.firm1.rho,
            kappa1: s.firm1.kappa,
            rho2: s.firm2.rho,
            kappa2: s.firm2.kappa,
        }
    }
}

impl LvSystem {
    /// Interior equilibrium `(rho2/kappa1, rho1/kappa2)`.
    pub fn equilibrium(&self) -> (f64, f64) {
        (self.rho2 / self.kappa1, self.rho1 / self.kappa2)
    }

    /// The conserved quantity
    /// `rho2*ln(V1) - kappa1*V1 + rho1*ln(V2) - kappa2*V2`.
    pub fn first_integral(&self, v1: f64, v2: f64) -> Result<f64, LvError> {
        if v1 <= 0.0 || v2 <= 0.0 {
            return Err(LvError::NonpositiveState);
        }
        Ok(self.rho2 * v1.ln() - self.kappa1 * v1 + self.rho1 * v2.ln() - self.kappa2 * v2)
    }

    /// `H(V1) = eq1*ln(V1) - V1`, one of the integral's concave building blocks.
    pub fn h_block(&self, v1: f64) -> f64 {
        self.equilibrium().0 * v1.ln() - v1
    }

    /// `G(V2) = eq2*ln(V2) - V2`.
    pub fn g_block(&self, v2: f64) -> f64 {
        self.equilibrium().1 * v2.ln() - v2
    }

    /// Analytic second derivatives `(-eq1/V1^2, -eq2/V2^2)` of the blocks.
    pub fn block_second_derivatives(&self, v1: f64, v2: f64) -> (f64, f64) {
        let (e1, e2) = self.equilibrium();
        (-e1 / (v1 * v1), -e2 / (v2 * v2))
    }

    /// Angular frequency of small oscillations about the equilibrium.
    pub fn linearized_frequency(&self) -> f64 {
        (self.rho1 * self.rho2).sqrt()
    }

    /// Largest first-integral drift along the trajectory's positive samples.
    pub fn integral_drift(&self, trajectory: &Trajectory) -> Result<f64, LvError> {
        let x0 = self.first_integral(trajectory.start().v1, trajectory.start().v2)?;
        let mut worst = 0.0f64;
        for p in &trajectory.samples {
            if p.v1 <= 0.0 || p.v2 <= 0.0 {
                continue;
            }
            worst = worst.max((self.first_integral(p.v1, p.v2)? - x0).abs());
        }
        Ok(worst)
    }
}

/// Detects the oscillation period of a trajectory from the time between
/// same-direction returns to the section `V1 = V1(0)`, with the crossing
/// times refined on the cubic interpolant. Returns the mean observed period.
///
/// A run started at a turning point of `V1` only touches that section
/// tangentially, so the section `V2 = V2(0)` serves as the fallback.
pub fn detect_period(trajectory: &Trajectory) -> Result<f64, LvError> {
    let s = trajectory.samples.as_slice();
    if s.len() < 4 {
        return Err(LvError::NoReturnFound);
    }
    let amplitude = s
        .iter()
        .map(|p| (p.v1 - s[0].v1).abs().max((p.v2 - s[0].v2).abs()))
        .fold(0.0f64, f64::max);
    if amplitude < AMPLITUDE_FLOOR {
        return Err(LvError::AtEquilibrium);
    }

    for component in [0usize, 1] {
        if let Some(period) = section_returns(trajectory, component)? {
            return Ok(period);
        }
    }
    Err(LvError::NoReturnFound)
}

fn section_returns(trajectory: &Trajectory, component: usize) -> Result<Option<f64>, LvError> {
    let s = trajectory.samples.as_slice();
    let pick = |p: &crate::ode::Sample| if component == 0 { p.v1 } else { p.v2 };
    let v_ref = pick(&s[0]);

    // direction the orbit initially leaves the section in
    let rising = match s.iter().map(pick).find(|&v| v != v_ref) {
        Some(v) => v > v_ref,
        None => return Ok(None),
    };

    let mut crossings = Vec::new();
    for w in s.windows(2) {
        let (f0, f1) = (pick(&w[0]) - v_ref, pick(&w[1]) - v_ref);
        let matches_direction = if rising {
            f0 < 0.0 && f1 >= 0.0
        } else {
            f0 > 0.0 && f1 <= 0.0
        };
        if matches_direction {
            crossings.push(refine_crossing(trajectory, component, w[0].t, w[1].t, v_ref)?);
        }
    }
    if crossings.is_empty() {
        return Ok(None);
    }

    let mut prev = 0.0;
    let mut periods = Vec::with_capacity(crossings.len());
    for c in crossings {
        periods.push(c - prev);
        prev = c;
    }
    Ok(Some(periods.iter().sum::<f64>() / periods.len() as f64))
}

fn refine_crossing(
    trajectory: &Trajectory,
    component: usize,
    t0: f64,
    t1: f64,
    v_ref: f64,
) -> Result<f64, LvError> {
    let at = |t: f64| -> Result<f64, LvError> {
        let (v1, v2) = trajectory.resample(&[t])?[0];
        Ok(if component == 0 { v1 } else { v2 } - v_ref)
    };
    let mut lo = t0;
    let mut hi = t1;
    let sign_lo = at(lo)? > 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (at(mid)? > 0.0) == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Quadrature means of `(V1, V2)` over `[0, period]`.
pub fn time_averages(trajectory: &Trajectory, period: f64) -> Result<(f64, f64), LvError> {
    const INTERVALS: usize = 2048;
    let times: Vec<f64> = (0..=INTERVALS)
        .map(|i| period * i as f64 / INTERVALS as f64)
        .collect();
    let values = trajectory.resample(&times)?;
    let v1: Vec<f64> = values.iter().map(|v| v.0).collect();
    let v2: Vec<f64> = values.iter().map(|v| v.1).collect();
    Ok((
        simpson(&times, &v1) / period,
        simpson(&times, &v2) / period,
    ))
}

/// Full §-style run summary: equilibrium, conserved quantity and its drift,
/// detected period (absent when starting at the equilibrium), and the
/// per-period time averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LvAnalysis {
    pub equilibrium: (f64, f64),
    /// First integral evaluated at the initial state.
    pub x_invariant: f64,
    /// Max first-integral drift observed along the run.
    pub x_drift: f64,
    /// Detected oscillation period; `None` when the run sits at equilibrium.
    pub period: Option<f64>,
    pub averages: (f64, f64),
}

/// Integrates a Lotka-Volterra scenario and assembles its analysis.
pub fn analyze(scenario: &Scenario) -> Result<LvAnalysis, LvError> {
    scenario.validate()?;
    if scenario.system != SystemKind::LotkaVolterra {
        return Err(LvError::WrongSystem);
    }
    let sys = LvSystem::from(scenario);
    let trajectory = integrate(scenario)?;
    let start = trajectory.start();
    let x_invariant = sys.first_integral(start.v1, start.v2)?;
    let x_drift = sys.integral_drift(&trajectory)?;
    match detect_period(&trajectory) {
        Ok(period) => {
            let averages = time_averages(&trajectory, period)?;
            Ok(LvAnalysis {
                equilibrium: sys.equilibrium(),
                x_invariant,
                x_drift,
                period: Some(period),
                averages,
            })
        }
        Err(LvError::AtEquilibrium) => Ok(LvAnalysis {
            equilibrium: sys.equilibrium(),
            x_invariant,
            x_drift,
            period: None,
            averages: (start.v1, start.v2),
        }),
        Err(e) => Err(e),
    }
}
