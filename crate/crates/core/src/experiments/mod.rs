//! Experiment harness: full pipeline runs, ablations, label-efficiency
//! curves and robustness sweeps.

mod config;
mod pipeline;
mod studies;

pub use config::{AblationVariant, DataSource, ExperimentConfig, ModelConfig};
pub use pipeline::{
    build_model, bundle_context, embeddings, embeddings_csv, encode_for_bundle, featurize_corpus, load_corpus, metrics_json,
    predictions_csv, report_cell, run_cell, run_pipeline, CellResult, FeatureContext, PipelineReport, Workspace,
};
pub use studies::{
    run_ablation, run_ablation_on, run_label_efficiency, run_label_efficiency_on, run_robustness, run_robustness_on, AblationRow,
    AblationTable, CurvePoint, LabelCurve, MeanStd, RobustnessCell, RobustnessReport,
};
