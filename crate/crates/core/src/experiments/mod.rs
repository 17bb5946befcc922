//! Simulation scenarios, the replication runner and the newsvendor study.

pub mod curves;
pub mod newsvendor;
pub mod runner;
pub mod scenarios;

pub use curves::{are_curve, risk_curve, CurvePoint};
pub use newsvendor::{newsvendor_run, synthetic_items, ItemSource, NewsvendorConfig, NewsvendorItem};
pub use runner::{
    aggregate, relative_efficiency, run_replication, run_scenario, Comparison, EvalReport, MethodOutcome, MethodSpec,
    RepOutcome, ReportRow, SummaryStats,
};
pub use scenarios::{
    gen_example1, gen_example2, gen_example3, Case3, CustomScenario, Replicate, Scenario, ScenarioSpec,
};
