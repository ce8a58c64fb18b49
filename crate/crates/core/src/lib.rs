//! Capital dynamics of two competing firms under proportional or lump-sum
//! taxation: a reference ODE integrator, the decoupled closed-form solutions,
//! finite-horizon income functionals, predator-prey analytics, and the
//! minimax compromise tax search, behind a reproducible CLI.
//!
//! All quantities are dimensionless; see the README for the model family and
//! the command-line surface.

pub mod cli;
pub mod closed_form;
pub mod compromise;
pub mod income;
pub mod lotka_volterra;
pub mod model;
pub mod ode;
mod quad;

pub use closed_form::{
    equilibrium_single, logistic_solution, ratio_law, survivor, taxed_pair_solution, time_to_reach,
    ClosedFormError, LogisticSolution, Survivor,
};
pub use compromise::{
    compromise_point, deviations, max_incomes, C3Convention, CValues, CompromiseError,
    CompromiseOptions, CompromiseResult,
};
pub use income::{
    income_at, income_closed_form, income_numeric, total_income_untaxed, IncomeError, IncomeMode,
    IncomeReport,
};
pub use lotka_volterra::{analyze, detect_period, time_averages, LvAnalysis, LvError, LvSystem};
pub use model::{
    rhs, validate, Coupling, DemandSpec, FirmParams, ModelError, Scenario, SystemKind, TaxPolicy,
    DEFAULT_EXTINCTION_FLOOR,
};
pub use ode::{integrate, Event, EventKind, OdeError, Sample, SolverSettings, Trajectory};
