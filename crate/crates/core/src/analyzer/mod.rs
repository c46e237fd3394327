//! Orchestration: model analysis, pinching-hypothesis evaluation, randomized
//! property sweeps and report serialization.

mod config;
mod emit;
mod report;
mod sweep;

pub use config::{ChartConfig, RunConfig};
pub use emit::{fmt_f64, from_json_bytes, report_emit, to_json_bytes, Format, CSV_COLUMNS};
pub use report::{
    analyze, corollary_scan, Aggregate, Aggregates, AnalyzeOptions, Branch, Check, ConvergenceNote,
    CorollaryScan, DeltaSign, Hypotheses, PinchReport, PointRecord, Provenance, QuadratureSummary,
    Tolerances, Verdict, CLASS_TOL, CONST_TOL, FLAT_TOL, HYPOTHESIS_TOL, NORMAL_RANK_TOL,
};
pub use sweep::{
    sweep, sweep_with, Bound, Suite, SweepCheck, SweepOptions, SweepSummary,
    CURVATURE_IDENTITY_TOL, FRAME_DRIFT_TOL, GAP_FLOOR, M_RANGE, N_RANGE, RHO_FORMS_TOL,
};
