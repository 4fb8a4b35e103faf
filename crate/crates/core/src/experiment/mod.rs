//! Strategy-grid experiments: plan files, the parallel runner, and the
//! result summaries.

mod plan;
mod report;
mod runner;

pub use plan::{parse_plan, parse_plan_str, Baseline, ExperimentPlan, GeneratorSettings, PlanError};
pub use report::{read_results, summarize, table1_report, write_summary, SummaryRow};
pub use runner::{run_plan, ResultRow, RESULT_COLUMNS};
