//! Reference numerical integrator for all systems.
//!
//! An embedded Dormand-Prince 5(4) pair with PI step-size control produces
//! the ground-truth trajectories the closed forms are accepted against.
//! Dense output between accepted steps is cubic Hermite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, Scenario};

/// Tolerances and step/sampling controls for [`integrate`].
///
/// `max_step` and `sample_dt` default to `horizon/100` and `horizon/1000`
/// when left unset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: None,
            sample_dt: None,
        }
    }
}

impl SolverSettings {
    pub fn max_step_for(&self, horizon: f64) -> f64 {
        self.max_step.unwrap_or(horizon / 100.0)
    }

    pub fn sample_dt_for(&self, horizon: f64) -> f64 {
        self.sample_dt.unwrap_or(horizon / 1000.0)
    }

    pub(crate) fn validate(&self, horizon: f64) -> Result<(), ModelError> {
        let positive = |field: &str, v: f64| -> Result<(), ModelError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::Invalid {
                    field: field.to_string(),
                    requirement: "positive and finite",
                })
            }
        };
        positive("solver.rel_tol", self.rel_tol)?;
        positive("solver.abs_tol", self.abs_tol)?;
        if let Some(h) = self.max_step {
            positive("solver.max_step", h)?;
        }
        if let Some(dt) = self.sample_dt {
            positive("solver.sample_dt", dt)?;
            if dt > horizon {
                return Err(ModelError::Invalid {
                    field: "solver.sample_dt".to_string(),
                    requirement: "at most the horizon",
                });
            }
        }
        Ok(())
    }
}

/// One time-stamped state sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ExtinctionFirm1,
    ExtinctionFirm2,
}

/// A firm's capital crossing the extinction floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

/// Sampled solution of one run, with any extinction events.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Strictly increasing in `t`; starts at `t = 0` with the initial capitals.
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("stiffness/underflow: step size collapsed at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("divergence: non-finite state at t = {t}")]
    Divergence { t: f64 },
    #[error("time {t} outside the sampled range [{min}, {max}]")]
    OutOfRange { t: f64, min: f64, max: f64 },
}

impl Trajectory {
    pub fn start(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn end(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }

    /// Cubic interpolation between stored samples; exact at sample points.
    pub fn resample(&self, times: &[f64]) -> Result<Vec<(f64, f64)>, OdeError> {
        let s = &self.samples;
        let t_min = s[0].t;
        let t_max = s[s.len() - 1].t;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if !(t_min..=t_max).contains(&t) {
                return Err(OdeError::OutOfRange {
                    t,
                    min: t_min,
                    max: t_max,
                });
            }
            // index of the first sample strictly after t
            let j = s.partition_point(|smp| smp.t <= t);
            if j > 0 && s[j - 1].t == t {
                out.push((s[j - 1].v1, s[j - 1].v2));
                continue;
            }
            let n = s.len().min(4);
            let w = (j.saturating_sub(2)).min(s.len() - n);
            let window = &s[w..w + n];
            out.push((
                lagrange(window, t, |p| p.v1),
                lagrange(window, t, |p| p.v2),
            ));
        }
        Ok(out)
    }

    /// Writes `t,V1,V2` rows with shortest round-trip decimal formatting.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,V1,V2")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s.t, s.v1, s.v2)?;
        }
        Ok(())
    }
}

fn lagrange(window: &[Sample], t: f64, pick: impl Fn(&Sample) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..window.len() {
        let mut li = 1.0;
        for j in 0..window.len() {
            if i != j {
                li *= (t - window[j].t) / (window[i].t - window[j].t);
            }
        }
        acc += pick(&window[i]) * li;
    }
    acc
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

type State = [f64; 2];

fn axpy(y: &State, h: f64, coeffs: &[f64], k: &[State]) -> State {
    let mut out = *y;
    for (c, ki) in coeffs.iter().zip(k) {
        out[0] += h * c * ki[0];
        out[1] += h * c * ki[1];
    }
    out
}

fn is_finite(y: &State) -> bool {
    y[0].is_finite() && y[1].is_finite()
}

/// Integrates the scenario's system over `[0, horizon]`.
///
/// Samples land on the `sample_dt` grid plus the exact endpoint. A step that
/// would take any live component below `-abs_tol` is rejected and halved.
/// When a component first drops below the extinction floor, an event is
/// recorded at the interpolated crossing time and the component is pinned to
/// zero from then on.
pub fn integrate(scenario: &Scenario) -> Result<Trajectory, OdeError> {
    scenario.validate()?;

    let t_end = scenario.horizon;
    let rel_tol = scenario.solver.rel_tol;
    let abs_tol = scenario.solver.abs_tol;
    let max_step = scenario.solver.max_step_for(t_end);
    let floor = scenario.extinction_floor;
    let h_floor = 1e-14 * t_end;

    let sample_times = sample_schedule(t_end, scenario.solver.sample_dt_for(t_end));

    let mut y: State = [scenario.firm1.v0, scenario.firm2.v0];
    let mut alive = [true, true];
    let mut extinct_at: [Option<f64>; 2] = [None, None];
    let mut events: Vec<Event> = Vec::new();

    let mut samples = Vec::with_capacity(sample_times.len());
    samples.push(Sample {
        t: 0.0,
        v1: y[0],
        v2: y[1],
    });
    let mut cursor = 1usize;

    // components starting below the floor are pinned immediately
    for i in 0..2 {
        if y[i] < floor {
            alive[i] = false;
            extinct_at[i] = Some(0.0);
            events.push(Event {
                t: 0.0,
                kind: event_kind(i),
            });
            y[i] = 0.0;
        }
    }

    let eval = |t: f64, y: &State, alive: &[bool; 2]| -> State {
        let mut ye = *y;
        for i in 0..2 {
            if !alive[i] {
                ye[i] = 0.0;
            }
        }
        let mut dy = scenario.rhs(ye, t);
        for i in 0..2 {
            if !alive[i] {
                dy[i] = 0.0;
            }
        }
        dy
    };

    let mut t = 0.0;
    let mut f_now = eval(t, &y, &alive);
    if !is_finite(&f_now) {
        return Err(OdeError::Divergence { t });
    }

    let mut h = initial_step(&y, &f_now, rel_tol, abs_tol, max_step, t_end, |tt, yy| {
        eval(tt, yy, &alive)
    });
    let mut err_prev: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        if h < h_floor {
            return Err(OdeError::StepUnderflow { t });
        }
        let is_last = t + h >= t_end;
        let h_eff = if is_last { t_end - t } else { h };

        let k1 = f_now;
        let k2 = eval(t + C[0] * h_eff, &axpy(&y, h_eff, &A2, &[k1]), &alive);
        let k3 = eval(t + C[1] * h_eff, &axpy(&y, h_eff, &A3, &[k1, k2]), &alive);
        let k4 = eval(t + C[2] * h_eff, &axpy(&y, h_eff, &A4, &[k1, k2, k3]), &alive);
        let k5 = eval(
            t + C[3] * h_eff,
            &axpy(&y, h_eff, &A5, &[k1, k2, k3, k4]),
            &alive,
        );
        let k6 = eval(
            t + h_eff,
            &axpy(&y, h_eff, &A6, &[k1, k2, k3, k4, k5]),
            &alive,
        );
        let mut y_new = axpy(&y, h_eff, &A7, &[k1, k2, k3, k4, k5, k6]);
        let k7 = eval(t + h_eff, &y_new, &alive);
        let err = axpy(&[0.0, 0.0], h_eff, &E, &[k1, k2, k3, k4, k5, k6, k7]);

        if !is_finite(&y_new) || !is_finite(&err) {
            h = h_eff * FAC_MIN;
            last_rejected = true;
            continue;
        }

        // a live component driven below -abs_tol rejects the step outright
        if (0..2).any(|i| alive[i] && y_new[i] < -abs_tol) {
            h = h_eff * 0.5;
            last_rejected = true;
            continue;
        }

        let mut err_norm = 0.0;
        for i in 0..2 {
            let sc = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
            err_norm += (err[i] / sc) * (err[i] / sc);
        }
        err_norm = (err_norm / 2.0).sqrt();

        if err_norm > 1.0 {
            h = h_eff * (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, 0.9);
            last_rejected = true;
            continue;
        }

        // accepted
        let t_new = if is_last { t_end } else { t + h_eff };
        let mut pinned_now = false;
        for i in 0..2 {
            if alive[i] && y_new[i] < floor {
                let t_cross = if y[i] <= floor {
                    t
                } else {
                    crossing_time(t, t_new, y[i], y_new[i], f_now[i], k7[i], floor)
                };
                events.push(Event {
                    t: t_cross,
                    kind: event_kind(i),
                });
                alive[i] = false;
                extinct_at[i] = Some(t_cross);
                pinned_now = true;
            }
        }

        while cursor < sample_times.len() && sample_times[cursor] <= t_new {
            let ts = sample_times[cursor];
            let mut v = if ts >= t_new {
                y_new
            } else {
                hermite(t, t_new, &y, &y_new, &f_now, &k7, ts)
            };
            for i in 0..2 {
                if extinct_at[i].is_some_and(|tc| ts >= tc) {
                    v[i] = 0.0;
                }
                v[i] = v[i].max(0.0);
            }
            samples.push(Sample {
                t: ts,
                v1: v[0],
                v2: v[1],
            });
            cursor += 1;
        }

        for i in 0..2 {
            if !alive[i] {
                y_new[i] = 0.0;
            }
        }
        f_now = if pinned_now {
            eval(t_new, &y_new, &alive)
        } else {
            k7 // first-same-as-last
        };
        y = y_new;
        t = t_new;

        let err_n = err_norm.max(1e-10);
        let fac_max = if last_rejected { 1.0 } else { FAC_MAX };
        let fac = (SAFETY * err_n.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)).clamp(FAC_MIN, fac_max);
        h = (h_eff * fac).min(max_step);
        err_prev = err_n;
        last_rejected = false;
    }

    debug_assert_eq!(cursor, sample_times.len());
    Ok(Trajectory { samples, events })
}

fn event_kind(i: usize) -> EventKind {
    if i == 0 {
        EventKind::ExtinctionFirm1
    } else {
        EventKind::ExtinctionFirm2
    }
}

fn sample_schedule(t_end: f64, dt: f64) -> Vec<f64> {
    let mut times = Vec::with_capacity((t_end / dt) as usize + 2);
    let cutoff = t_end * (1.0 - 1e-12);
    let mut k = 0u64;
    loop {
        let ts = k as f64 * dt;
        if ts >= cutoff {
            break;
        }
        times.push(ts);
        k += 1;
    }
    times.push(t_end);
    times
}

fn initial_step(
    y0: &State,
    f0: &State,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    t_end: f64,
    eval: impl Fn(f64, &State) -> State,
) -> f64 {
    let sc = [
        abs_tol + rel_tol * y0[0].abs(),
        abs_tol + rel_tol * y0[1].abs(),
    ];
    let rms = |v: &State| ((v[0] / sc[0]).powi(2) + (v[1] / sc[1]).powi(2)).sqrt() / 2f64.sqrt();
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(max_step).min(t_end);
    let y1 = [y0[0] + h0 * f0[0], y0[1] + h0 * f0[1]];
    let f1 = eval(h0, &y1);
    if !is_finite(&f1) {
        return (h0 * 1e-2).min(max_step).min(t_end);
    }
    let d2 = rms(&[f1[0] - f0[0], f1[1] - f0[1]]) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(0.2)
    };
    (100.0 * h0).min(h1).min(max_step).min(t_end)
}

fn hermite(t0: f64, t1: f64, y0: &State, y1: &State, f0: &State, f1: &State, t: f64) -> State {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    [
        h00 * y0[0] + h10 * h * f0[0] + h01 * y1[0] + h11 * h * f1[0],
        h00 * y0[1] + h10 * h * f0[1] + h01 * y1[1] + h11 * h * f1[1],
    ]
}

/// Bisection on the Hermite interpolant for the first time the component
/// falls to `floor` within an accepted step.
fn crossing_time(t0: f64, t1: f64, y0: f64, y1: f64, f0: f64, f1: f64, floor: f64) -> f64 {
    let value = |t: f64| -> f64 {
        let out = hermite(
            t0,
            t1,
            &[y0, 0.0],
            &[y1, 0.0],
            &[f0, 0.0],
            &[f1, 0.0],
            t,
        );
        out[0] - floor
    };
    let mut lo = t0;
    let mut hi = t1;
    // value(lo) > 0 >= value(hi) by construction
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if value(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coupling, FirmParams, SystemKind, TaxPolicy};

    fn logistic_scenario() -> Scenario {
        // V2 starts at zero, so firm 1 follows the pure logistic law
        Scenario::new(
            FirmParams::new(1.0, 1.0, 0.5),
            FirmParams::new(1.0, 1.0, 0.0),
            SystemKind::Competing,
            10.0,
        )
    }

    #[test]
    fn logistic_matches_closed_form_at_ln3() {
        let traj = integrate(&logistic_scenario()).unwrap();
        let t = 3f64.ln();
        let (v1, _) = traj.resample(&[t]).unwrap()[0];
        assert!((v1 - 0.75).abs() < 1e-6, "v1 = {v1}");
        // dense samples carry the cubic interpolant's error on top of the
        // integrator's, so the grid check sits an order above rel_tol
        for s in &traj.samples {
            let exact = 1.0 / (1.0 + (-s.t).exp());
            assert!((s.v1 - exact).abs() < 1e-7, "t = {}, err = {}", s.t, (s.v1 - exact).abs());
        }
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let mut s = logistic_scenario();
        s.firm1.v0 = 0.0;
        let traj = integrate(&s).unwrap();
        assert!(traj.samples.iter().all(|p| p.v1 == 0.0 && p.v2 == 0.0));
        assert_eq!(traj.samples[0].t, 0.0);
        assert_eq!(traj.end().t, 10.0);
    }

    #[test]
    fn lotka_volterra_equilibrium_is_constant() {
        let s = Scenario::new(
            FirmParams::new(1.0, 1.0, 1.0),
            FirmParams::new(1.0, 1.0, 1.0),
            SystemKind::LotkaVolterra,
            10.0,
        );
        let traj = integrate(&s).unwrap();
        for p in &traj.samples {
            assert!((p.v1 - 1.0).abs() < 1e-12 && (p.v2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_start_at_zero_and_strictly_increase() {
        let traj = integrate(&logistic_scenario()).unwrap();
        assert_eq!(traj.samples[0].t, 0.0);
        assert_eq!(traj.samples[0].v1, 0.5);
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(traj.end().t, 10.0);
    }

    #[test]
    fn resample_is_exact_at_sample_points() {
        let traj = integrate(&logistic_scenario()).unwrap();
        let times: Vec<f64> = traj.samples.iter().step_by(97).map(|p| p.t).collect();
        let vals = traj.resample(&times).unwrap();
        for (v, p) in vals.iter().zip(traj.samples.iter().step_by(97)) {
            assert_eq!(v.0, p.v1);
            assert_eq!(v.1, p.v2);
        }
    }

    #[test]
    fn resample_rejects_out_of_range_times() {
        let traj = integrate(&logistic_scenario()).unwrap();
        assert!(matches!(
            traj.resample(&[-0.1]),
            Err(OdeError::OutOfRange { .. })
        ));
        assert!(matches!(
            traj.resample(&[10.5]),
            Err(OdeError::OutOfRange { .. })
        ));
    }

    #[test]
    fn halving_rel_tol_moves_samples_within_bound() {
        // max_step small enough that the dense-output error sits well below
        // the convergence bound under test
        let mut s = Scenario::new(
            FirmParams::new(1.2, 0.9, 0.4),
            FirmParams::new(0.8, 1.1, 0.7),
            SystemKind::Taxed,
            10.0,
        )
        .with_tax(TaxPolicy::Proportional { x: 0.1 });
        s.solver.max_step = Some(10.0 / 500.0);
        s.solver.rel_tol = 1e-9;
        let coarse = integrate(&s).unwrap();
        s.solver.rel_tol = 0.5e-9;
        let fine = integrate(&s).unwrap();
        for (a, b) in coarse.samples.iter().zip(&fine.samples) {
            assert_eq!(a.t, b.t);
            assert!((a.v1 - b.v1).abs() < 10.0 * 1e-9 * b.v1.abs());
            assert!((a.v2 - b.v2).abs() < 10.0 * 1e-9 * b.v2.abs());
        }
    }

    #[test]
    fn lump_sum_tax_extinguishes_a_firm() {
        let s = Scenario::new(
            FirmParams::new(0.5, 1.0, 0.2),
            FirmParams::new(1.0, 1.0, 1.0),
            SystemKind::Taxed,
            10.0,
        )
        .with_tax(TaxPolicy::LumpSum { u1: 0.5, u2: 0.0 });
        let traj = integrate(&s).unwrap();
        let ev: Vec<_> = traj
            .events
            .iter()
            .filter(|e| e.kind == EventKind::ExtinctionFirm1)
            .collect();
        assert_eq!(ev.len(), 1);
        assert!(ev[0].t > 0.0 && ev[0].t < 10.0);
        assert!(traj.samples.iter().all(|p| p.v1 >= 0.0 && p.v2 >= 0.0));
        assert_eq!(traj.end().v1, 0.0);
        // pinned from the event onward
        for p in traj.samples.iter().filter(|p| p.t >= ev[0].t) {
            assert_eq!(p.v1, 0.0);
        }
    }

    #[test]
    fn zero_floor_with_lump_sum_underflows() {
        // with no extinction floor and an absolute tolerance too small to
        // absorb the crossing, the positivity guard shrinks the step forever
        let mut s = Scenario::new(
            FirmParams::new(0.5, 1.0, 0.2),
            FirmParams::new(1.0, 1.0, 1.0),
            SystemKind::Taxed,
            10.0,
        )
        .with_tax(TaxPolicy::LumpSum { u1: 0.5, u2: 0.0 })
        .with_extinction_floor(0.0);
        s.solver.abs_tol = 1e-300;
        match integrate(&s) {
            Err(OdeError::StepUnderflow { .. }) => {}
            other => panic!("expected step underflow, got {other:?}"),
        }
    }

    #[test]
    fn astronomically_large_state_diverges() {
        let s = Scenario::new(
            FirmParams::new(1.0, 1.0, 1e300),
            FirmParams::new(1.0, 1.0, 1.0),
            SystemKind::Competing,
            10.0,
        );
        match integrate(&s) {
            Err(OdeError::Divergence { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn log_ratio_law_holds_along_numerical_solution() {
        let s = Scenario::new(
            FirmParams::new(2.0, 1.0, 1.0),
            FirmParams::new(1.0, 1.0, 1.0),
            SystemKind::Competing,
            8.0,
        );
        let traj = integrate(&s).unwrap();
        let (k1, k2) = (s.firm1.kappa, s.firm2.kappa);
        let slope = s.firm1.rho * k2 - s.firm2.rho * k1;
        let c0 = k2 * s.firm1.v0.ln() - k1 * s.firm2.v0.ln();
        for p in &traj.samples {
            if p.v1 <= s.extinction_floor || p.v2 <= s.extinction_floor {
                break;
            }
            let resid = k2 * p.v1.ln() - k1 * p.v2.ln() - c0 - slope * p.t;
            assert!(resid.abs() < 1e-6, "t = {}, resid = {}", p.t, resid);
        }
    }

    #[test]
    fn lotka_volterra_time_reversal_returns_to_start() {
        // reversing time maps the system onto itself with the firms' roles
        // swapped, so a forward run of the swapped system from the swapped
        // endpoint must land back on the swapped initial state
        let fwd = Scenario::new(
            FirmParams::new(1.0, 0.8, 1.3),
            FirmParams::new(0.9, 1.1, 0.7),
            SystemKind::LotkaVolterra,
            10.0,
        );
        let traj = integrate(&fwd).unwrap();
        let end = traj.end();
        let back = Scenario::new(
            FirmParams::new(fwd.firm2.rho, fwd.firm2.kappa, end.v2),
            FirmParams::new(fwd.firm1.rho, fwd.firm1.kappa, end.v1),
            SystemKind::LotkaVolterra,
            10.0,
        );
        let rev = integrate(&back).unwrap();
        let re = rev.end();
        let tol = 1e3 * fwd.solver.rel_tol;
        assert!(
            (re.v2 - fwd.firm1.v0).abs() <= tol * (1.0 + fwd.firm1.v0),
            "v1 return error {}",
            (re.v2 - fwd.firm1.v0).abs()
        );
        assert!(
            (re.v1 - fwd.firm2.v0).abs() <= tol * (1.0 + fwd.firm2.v0),
            "v2 return error {}",
            (re.v1 - fwd.firm2.v0).abs()
        );
    }

    #[test]
    fn decoupled_mode_drops_cross_terms() {
        let s = Scenario::new(
            FirmParams::new(1.0, 1.0, 0.5),
            FirmParams::new(1.0, 1.0, 0.5),
            SystemKind::Competing,
            10.0,
        )
        .with_coupling(Coupling::Decoupled);
        let traj = integrate(&s).unwrap();
        // both firms follow the single-firm logistic independently
        for p in traj.samples.iter().step_by(50) {
            let exact = 1.0 / (1.0 + (-p.t).exp());
            assert!((p.v1 - exact).abs() < 1e-8);
            assert!((p.v2 - exact).abs() < 1e-8);
        }
    }
}
