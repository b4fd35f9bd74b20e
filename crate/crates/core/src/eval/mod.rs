//! Confusion matrices, leave-one-person-out evaluation and comparison reports.

mod confusion;
mod lopo;
mod report;

pub use confusion::{evaluate, ConfusionMatrix};
pub use lopo::{default_workers, evaluate_both, fold_seed, run_fold, run_lopo, run_lopo_folds, FoldResult};
pub use report::{
    fmt_pp, fmt_rate, ComparisonReport, PersonAccuracy, ReportFormat, CLASS_CSV_HEADER, PERSON_CSV_HEADER,
};
