//! Scenario runner for multiplication-map surjectivity, addition-formula
//! coefficients and the infinitesimal Torelli implication.

pub mod catalog;
pub mod config;
pub mod report;
pub mod run;

pub use catalog::catalog;
pub use config::{random_period_matrix, Caps, ExtraCheck, LevelInput, OmegaInput, ScenarioConfig};
pub use report::{emit_report, CheckReport, Float, Format, IttVerdict, Report};
pub use run::{itt_verdict, run_scenario, run_scenario_timed};
