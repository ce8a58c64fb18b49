//! Minimax compromise between the two firms and the state: each agent's best
//! achievable income over the tax-rate grid, the per-rate deviations from
//! those maxima, and the rate minimizing the largest deviation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::income::{income_at, IncomeError, IncomeMode, IncomeReport};
use crate::model::{ModelError, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompromiseError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("grid size must be at least 11")]
    GridTooSmall,
    #[error("income evaluation failed at x = {x}: {source}")]
    Income { x: f64, source: IncomeError },
}

/// How the state's best income `C3` is chosen.
///
/// The revenue curve `x*(h1(x) + h2(x))` peaks strictly inside `[0, 1)`
/// whenever heavy taxation kills the firms, so the endpoint value can sit
/// below the true maximum; a deviation measured from the endpoint would then
/// go negative. `Empirical` therefore takes the grid maximum and is the
/// default; `Endpoint` keeps the rightmost grid value. Both are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum C3Convention {
    #[default]
    Empirical,
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompromiseOptions {
    /// Number of uniform grid points over `[0, 1 - 1/grid_size]` (>= 11).
    pub grid_size: usize,
    pub mode: IncomeMode,
    /// `false` runs the two-agent variant in which the state's deviation is
    /// excluded from the objective.
    pub include_state: bool,
    pub c3_convention: C3Convention,
}

impl Default for CompromiseOptions {
    fn default() -> Self {
        Self {
            grid_size: 101,
            mode: IncomeMode::DecoupledClosedForm,
            include_state: true,
            c3_convention: C3Convention::Empirical,
        }
    }
}

/// Best incomes of the three agents over the searched rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CValues {
    /// Firm 1's maximum, attained at `x = 0`.
    pub c1: f64,
    /// Firm 2's maximum, attained at `x = 0`.
    pub c2: f64,
    /// The state's maximum under the selected convention.
    pub c3: f64,
    pub c3_empirical: f64,
    pub c3_endpoint: f64,
}

/// One grid row of the deviation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub x: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompromiseResult {
    /// The compromise tax rate in `[0, 1)`.
    pub x_star: f64,
    /// `max_i(C_i - h_i(x_star))` over the participating agents.
    pub max_deviation: f64,
    /// `(C1 - h1, C2 - h2, C3 - h3)` at `x_star`.
    pub deviations: [f64; 3],
    pub c_values: CValues,
    pub grid_size: usize,
    pub mode: IncomeMode,
    pub include_state: bool,
    /// Full grid sweep backing the search; emitted as CSV, not in reports.
    #[serde(skip_serializing)]
    pub sweep: Vec<GridPoint>,
}

fn grid_xs(grid_size: usize) -> Vec<f64> {
    (0..grid_size)
        .map(|j| j as f64 / grid_size as f64)
        .collect()
}

fn evaluate_grid(
    scenario: &Scenario,
    xs: &[f64],
    mode: IncomeMode,
) -> Result<Vec<IncomeReport>, CompromiseError> {
    // grid points are independent; rows come back in grid order either way
    xs.par_iter()
        .map(|&x| income_at(scenario, x, mode).map_err(|source| CompromiseError::Income { x, source }))
        .collect()
}

fn c_values_from(reports: &[IncomeReport], convention: C3Convention) -> CValues {
    let c1 = reports[0].h1;
    let c2 = reports[0].h2;
    let mut c3_empirical = f64::NEG_INFINITY;
    for r in reports {
        if r.h3 > c3_empirical {
            c3_empirical = r.h3;
        }
    }
    let c3_endpoint = reports[reports.len() - 1].h3;
    let c3 = match convention {
        C3Convention::Empirical => c3_empirical,
        C3Convention::Endpoint => c3_endpoint,
    };
    CValues {
        c1,
        c2,
        c3,
        c3_empirical,
        c3_endpoint,
    }
}

fn objective(report: &IncomeReport, c: &CValues, include_state: bool) -> f64 {
    let m = (c.c1 - report.h1).max(c.c2 - report.h2);
    if include_state {
        m.max(c.c3 - report.h3)
    } else {
        m
    }
}

/// Best achievable incomes `(C1, C2, C3)`: the firms peak at `x = 0`, the
/// state per the configured convention over the same grid.
pub fn max_incomes(
    scenario: &Scenario,
    options: &CompromiseOptions,
) -> Result<CValues, CompromiseError> {
    scenario.validate()?;
    if options.grid_size < 11 {
        return Err(CompromiseError::GridTooSmall);
    }
    let reports = evaluate_grid(scenario, &grid_xs(options.grid_size), options.mode)?;
    Ok(c_values_from(&reports, options.c3_convention))
}

/// Per-agent shortfalls `C_i - h_i(x)` at a single rate.
pub fn deviations(
    scenario: &Scenario,
    x: f64,
    c_values: &CValues,
    mode: IncomeMode,
) -> Result<[f64; 3], CompromiseError> {
    let r = income_at(scenario, x, mode).map_err(|source| CompromiseError::Income { x, source })?;
    Ok([
        c_values.c1 - r.h1,
        c_values.c2 - r.h2,
        c_values.c3 - r.h3,
    ])
}

/// Finds the tax rate minimizing the largest deviation: a uniform grid scan
/// over `[0, 1 - 1/grid_size]` followed by golden-section refinement of the
/// best bracket down to a width of 1e-6. Near-ties resolve to the smaller
/// rate.
pub fn compromise_point(
    scenario: &Scenario,
    options: &CompromiseOptions,
) -> Result<CompromiseResult, CompromiseError> {
    scenario.validate()?;
    if options.grid_size < 11 {
        return Err(CompromiseError::GridTooSmall);
    }
    let g = options.grid_size;
    let xs = grid_xs(g);
    let reports = evaluate_grid(scenario, &xs, options.mode)?;
    let c = c_values_from(&reports, options.c3_convention);

    let sweep: Vec<GridPoint> = xs
        .iter()
        .zip(&reports)
        .map(|(&x, r)| GridPoint {
            x,
            h1: r.h1,
            h2: r.h2,
            h3: r.h3,
            max_deviation: objective(r, &c, options.include_state),
        })
        .collect();

    let m_min = sweep
        .iter()
        .map(|p| p.max_deviation)
        .fold(f64::INFINITY, f64::min);
    let best = sweep
        .iter()
        .position(|p| p.max_deviation <= m_min + 1e-12)
        .expect("grid is non-empty");

    let eval = |x: f64| -> Result<f64, CompromiseError> {
        let r = income_at(scenario, x, options.mode)
            .map_err(|source| CompromiseError::Income { x, source })?;
        Ok(objective(&r, &c, options.include_state))
    };

    let lo = if best == 0 { xs[0] } else { xs[best - 1] };
    let hi = if best + 1 < g { xs[best + 1] } else { xs[g - 1] };
    let (x_refined, m_refined) = golden_section(&eval, lo, hi, 1e-6)?;

    // keep whichever of grid best and refined point wins; ties -> smaller x
    let (grid_x, grid_m) = (xs[best], sweep[best].max_deviation);
    let x_star = if m_refined < grid_m - 1e-12 {
        x_refined
    } else if grid_m < m_refined - 1e-12 || grid_x <= x_refined {
        grid_x
    } else {
        x_refined
    };

    let devs = deviations(scenario, x_star, &c, options.mode)?;
    let max_deviation = if options.include_state {
        devs[0].max(devs[1]).max(devs[2])
    } else {
        devs[0].max(devs[1])
    };

    Ok(CompromiseResult {
        x_star,
        max_deviation,
        deviations: devs,
        c_values: c,
        grid_size: g,
        mode: options.mode,
        include_state: options.include_state,
        sweep,
    })
}

fn golden_section(
    f: &dyn Fn(f64) -> Result<f64, CompromiseError>,
    mut a: f64,
    mut b: f64,
    width_tol: f64,
) -> Result<(f64, f64), CompromiseError> {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > width_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FirmParams, SystemKind, TaxPolicy};

    fn symmetric_benchmark() -> Scenario {
        Scenario::new(
            FirmParams::new(1.0, 1.0, 0.5),
            FirmParams::new(1.0, 1.0, 0.5),
            SystemKind::Taxed,
            10.0,
        )
        .with_tax(TaxPolicy::Proportional { x: 0.0 })
    }

    #[test]
    fn firms_alone_settle_on_zero_taxation() {
        let options = CompromiseOptions {
            include_state: false,
            ..Default::default()
        };
        let res = compromise_point(&symmetric_benchmark(), &options).unwrap();
        assert_eq!(res.x_star, 0.0);
        assert_eq!(res.max_deviation, 0.0);
    }

    #[test]
    fn firm_deviations_vanish_at_zero_and_match_under_symmetry() {
        let options = CompromiseOptions::default();
        let s = symmetric_benchmark();
        let c = max_incomes(&s, &options).unwrap();
        let d0 = deviations(&s, 0.0, &c, options.mode).unwrap();
        assert_eq!(d0[0], 0.0);
        assert_eq!(d0[1], 0.0);
        assert_eq!(d0[2], c.c3);
        for j in 0..10 {
            let d = deviations(&s, j as f64 * 0.09, &c, options.mode).unwrap();
            assert!((d[0] - d[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn state_deviation_is_zero_at_its_empirical_argmax() {
        let options = CompromiseOptions::default();
        let s = symmetric_benchmark();
        let res = compromise_point(&s, &options).unwrap();
        let best_h3_row = res
            .sweep
            .iter()
            .max_by(|a, b| a.h3.partial_cmp(&b.h3).unwrap())
            .unwrap();
        let d = deviations(&s, best_h3_row.x, &res.c_values, options.mode).unwrap();
        assert_eq!(d[2], 0.0);
        assert!(res.c_values.c3_empirical >= res.c_values.c3_endpoint);
    }

    #[test]
    fn minimax_point_beats_every_grid_point() {
        let res = compromise_point(&symmetric_benchmark(), &CompromiseOptions::default()).unwrap();
        for p in &res.sweep {
            assert!(
                res.max_deviation <= p.max_deviation + 1e-9,
                "worse than grid x = {}",
                p.x
            );
        }
        assert!(res.x_star >= 0.0 && res.x_star < 1.0);
        assert!(res.deviations.iter().all(|d| *d >= -1e-9));
        let expected = if res.include_state {
            res.deviations[0].max(res.deviations[1]).max(res.deviations[2])
        } else {
            res.deviations[0].max(res.deviations[1])
        };
        assert_eq!(res.max_deviation, expected);
    }

    #[test]
    fn minimax_argmin_equals_maximin_argmax_on_the_grid() {
        let res = compromise_point(&symmetric_benchmark(), &CompromiseOptions::default()).unwrap();
        let c = res.c_values;
        // objective restated the other way around: max_i(C_i - h_i) is the
        // exact negation of min_i(h_i - C_i)
        let mut argmin = 0usize;
        let mut argmax = 0usize;
        for (j, p) in res.sweep.iter().enumerate() {
            let maxdev = p.max_deviation;
            let mingain = (p.h1 - c.c1).min(p.h2 - c.c2).min(p.h3 - c.c3);
            assert_eq!(maxdev, -mingain);
            if maxdev < res.sweep[argmin].max_deviation {
                argmin = j;
            }
            let best_gain = (res.sweep[argmax].h1 - c.c1)
                .min(res.sweep[argmax].h2 - c.c2)
                .min(res.sweep[argmax].h3 - c.c3);
            if mingain > best_gain {
                argmax = j;
            }
        }
        assert_eq!(argmin, argmax);
    }

    #[test]
    fn compromise_sits_where_firm_and_state_deviations_cross() {
        let res = compromise_point(
            &symmetric_benchmark(),
            &CompromiseOptions {
                grid_size: 1001,
                ..Default::default()
            },
        )
        .unwrap();
        let c = res.c_values;
        let delta = |x: f64| {
            let d = deviations(&symmetric_benchmark(), x, &c, res.mode).unwrap();
            d[0] - d[2]
        };
        // d1 rises with x, d3 falls toward the revenue peak: they cross once
        // and the crossing is the minimax point
        let eps = 1e-4;
        assert!(delta(res.x_star - eps) < 0.0);
        assert!(delta(res.x_star + eps) > 0.0);
    }

    #[test]
    fn doubling_the_grid_barely_moves_the_answer() {
        let coarse = compromise_point(
            &symmetric_benchmark(),
            &CompromiseOptions {
                grid_size: 101,
                ..Default::default()
            },
        )
        .unwrap();
        let fine = compromise_point(
            &symmetric_benchmark(),
            &CompromiseOptions {
                grid_size: 202,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((coarse.x_star - fine.x_star).abs() < 2.0 / 101.0);
    }

    #[test]
    fn small_grids_are_rejected() {
        let options = CompromiseOptions {
            grid_size: 10,
            ..Default::default()
        };
        assert!(matches!(
            compromise_point(&symmetric_benchmark(), &options),
            Err(CompromiseError::GridTooSmall)
        ));
    }
}
