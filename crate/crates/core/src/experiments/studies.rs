use super::config::{AblationVariant, ExperimentConfig};
use super::pipeline::{run_cell, write_file, Workspace};
use crate::corpus::{resample_to_ratio, split_dataset, SplitRatios};
use crate::detector::Metrics;
use crate::error::{Error, Result, StageExt};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: AblationVariant,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub config_hash: String,
    pub rows: Vec<AblationRow>,
}

fn metrics_cols(m: &Metrics) -> String {
    format!("{:.6},{:.6},{:.6},{:.6},{},{},{},{}", m.acc, m.pre, m.rec, m.f1, m.tp, m.fp, m.fn_, m.tn)
}

const METRIC_HEADER: &str = "acc,pre,rec,f1,tp,fp,fn,tn";

impl AblationTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("config_hash,variant,{METRIC_HEADER}\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", self.config_hash, r.variant.as_str(), metrics_cols(&r.metrics)));
        }
        s
    }
}

/// One row per configured variant, all on the same split and seed.
pub fn run_ablation_on(ws: &Workspace) -> Result<AblationTable> {
    if ws.config.ablations.is_empty() {
        return Err(Error::Config("ablation study needs at least one variant".into()));
    }
    let split = ws.standard_split()?;
    let mut rows = Vec::new();
    for &variant in &ws.config.ablations {
        let cell = run_cell(ws, &split, variant)?;
        rows.push(AblationRow { variant, metrics: cell.metrics });
    }
    Ok(AblationTable { config_hash: ws.config.hash(), rows })
}

pub fn run_ablation(config: &ExperimentConfig) -> Result<AblationTable> {
    let ws = Workspace::prepare(config)?;
    let table = run_ablation_on(&ws)?;
    write_file(&config.output_dir, "ablation.csv", table.to_csv().as_bytes())?;
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd { mean, std: var.sqrt() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub runs: Vec<Metrics>,
    pub acc: MeanStd,
    pub pre: MeanStd,
    pub rec: MeanStd,
    pub f1: MeanStd,
}

impl CurvePoint {
    fn from_runs(fraction: f64, runs: Vec<Metrics>) -> Self {
        let col = |f: fn(&Metrics) -> f64| mean_std(&runs.iter().map(f).collect::<Vec<_>>());
        Self { fraction, acc: col(|m| m.acc), pre: col(|m| m.pre), rec: col(|m| m.rec), f1: col(|m| m.f1), runs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCurve {
    pub config_hash: String,
    pub points: Vec<CurvePoint>,
}

impl LabelCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("config_hash,fraction,runs,acc_mean,acc_std,pre_mean,pre_std,rec_mean,rec_std,f1_mean,f1_std\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                self.config_hash,
                p.fraction,
                p.runs.len(),
                p.acc.mean,
                p.acc.std,
                p.pre.mean,
                p.pre.std,
                p.rec.mean,
                p.rec.std,
                p.f1.mean,
                p.f1.std
            ));
        }
        s
    }
}

/// A seeded `fraction` of `ids`, kept in their original order.
fn subsample(ids: &[String], fraction: f64, seed: u64) -> Vec<String> {
    let k = ((ids.len() as f64) * fraction).round() as usize;
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let keep: HashSet<&String> = shuffled[..k.min(ids.len())].iter().collect();
    ids.iter().filter(|id| keep.contains(id)).cloned().collect()
}

/// Per fraction, `label_repeats` resampled training subsets; thresholds,
/// scaler and class weights are refit on each subset.
pub fn run_label_efficiency_on(ws: &Workspace) -> Result<LabelCurve> {
    let config = &ws.config;
    if config.label_fractions.is_empty() || config.label_repeats == 0 {
        return Err(Error::Config("label-efficiency study needs fractions and at least one repeat".into()));
    }
    if let Some(f) = config.label_fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::Config(format!("label fraction {f} outside (0, 1]")));
    }
    let split = ws.standard_split()?;
    let mut points = Vec::new();
    for &fraction in &config.label_fractions {
        let mut runs = Vec::new();
        for rep in 0..config.label_repeats {
            let seed = config.split_seed.wrapping_add(1000 * (rep as u64 + 1));
            let train = subsample(&split.train, fraction, seed);
            let counts = ws.class_counts(&train);
            if counts.iter().any(|&c| c < 2) {
                return Err(Error::Config(format!(
                    "label fraction {fraction} leaves {} humans and {} bots; need at least 2 per class",
                    counts[0], counts[1]
                )));
            }
            let cell = run_cell(ws, &split.with_train_validation(train, split.validation.clone()), config.variant)?;
            runs.push(cell.metrics);
        }
        points.push(CurvePoint::from_runs(fraction, runs));
    }
    Ok(LabelCurve { config_hash: config.hash(), points })
}

pub fn run_label_efficiency(config: &ExperimentConfig) -> Result<LabelCurve> {
    let ws = Workspace::prepare(config)?;
    let curve = run_label_efficiency_on(&ws)?;
    write_file(&config.output_dir, "curve.csv", curve.to_csv().as_bytes())?;
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCell {
    /// `"train_fraction"` or `"bot_human_ratio"`.
    pub sweep: String,
    pub setting: String,
    pub metrics: Metrics,
    /// Evaluated test labels, `[human, bot]`.
    pub test_counts: [usize; 2],
    /// Recount of the same test ids in the split before any resampling.
    pub expected_test_counts: [usize; 2],
    pub train_counts: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub config_hash: String,
    pub cells: Vec<RobustnessCell>,
}

impl RobustnessReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("config_hash,sweep,setting,{METRIC_HEADER},test_humans,test_bots,train_humans,train_bots\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                self.config_hash,
                c.sweep,
                c.setting,
                metrics_cols(&c.metrics),
                c.test_counts[0],
                c.test_counts[1],
                c.train_counts[0],
                c.train_counts[1]
            ));
        }
        s
    }

    /// Every cell evaluated exactly its untouched test partition.
    pub fn test_distribution_verified(&self) -> bool {
        self.cells.iter().all(|c| c.test_counts == c.expected_test_counts)
    }
}

/// Train-fraction sweep (validation and test split the remainder equally)
/// and bot:human ratio sweep on the standard split's training ids.
pub fn run_robustness_on(ws: &Workspace) -> Result<RobustnessReport> {
    let config = &ws.config;
    if config.train_fractions.is_empty() || config.ratio_grid.is_empty() {
        return Err(Error::Config("robustness study needs train fractions and a ratio grid".into()));
    }
    let labelled = ws.corpus.labeled_ids();
    let mut cells = Vec::new();
    for &f in &config.train_fractions {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("train fraction {f} outside (0, 1)")));
        }
        let rest = (1.0 - f) / 2.0;
        let base = split_dataset(&labelled, SplitRatios::new(1.0 - 2.0 * rest, rest, rest), config.split_seed).stage("split")?;
        let split = ws.balance(&base).stage("split")?;
        let cell = run_cell(ws, &split, config.variant)?;
        cells.push(RobustnessCell {
            sweep: "train_fraction".into(),
            setting: format!("{f}"),
            metrics: cell.metrics,
            test_counts: cell.test_counts,
            expected_test_counts: ws.class_counts(&base.test),
            train_counts: cell.train_counts,
        });
    }
    let standard = ws.standard_split()?;
    for &[bots, humans] in &config.ratio_grid {
        let train = resample_to_ratio(&ws.base_split.train, &ws.labels, bots, humans, config.split_seed).stage("split")?;
        let split = standard.with_train_validation(train, standard.validation.clone());
        let cell = run_cell(ws, &split, config.variant)?;
        cells.push(RobustnessCell {
            sweep: "bot_human_ratio".into(),
            setting: format!("{bots}:{humans}"),
            metrics: cell.metrics,
            test_counts: cell.test_counts,
            expected_test_counts: ws.class_counts(&ws.base_split.test),
            train_counts: cell.train_counts,
        });
    }
    Ok(RobustnessReport { config_hash: config.hash(), cells })
}

pub fn run_robustness(config: &ExperimentConfig) -> Result<RobustnessReport> {
    let ws = Workspace::prepare(config)?;
    let report = run_robustness_on(&ws)?;
    write_file(&config.output_dir, "robustness.csv", report.to_csv().as_bytes())?;
    Ok(report)
}
