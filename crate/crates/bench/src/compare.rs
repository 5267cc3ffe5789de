//! Time- or assignment-bounded comparison of inference strategies by
//! crossvalidated held-out score.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use subanneal_core::{Dataset, Strategy};

use crate::error::{Error, Result};
use crate::manifest::{fingerprint, BudgetSpec, ChainResult, InferenceConfig, RunManifest};
use crate::normalize::normalize_by_dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub strategies: Vec<String>,
    pub budgets: Vec<BudgetSpec>,
    pub chains: usize,
    pub seed: u64,
    pub inference: InferenceConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            strategies: ["prior-gibbs", "seq-gibbs", "anneal"].map(String::from).to_vec(),
            budgets: vec![BudgetSpec::Secs(0.5), BudgetSpec::Secs(1.0), BudgetSpec::Secs(3.0)],
            chains: 16,
            seed: 0,
            inference: InferenceConfig::default(),
        }
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub strategy: String,
    pub budget: String,
    pub chain: u64,
    pub raw_score: f64,
    pub norm_score: f64,
    pub wall_secs: f64,
    pub assigns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dataset: String,
    pub strategy: String,
    pub budget: String,
    pub chains: usize,
    pub mean: f64,
    /// Sample variance of the normalized scores.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResult {
    pub rows: Vec<ResultRow>,
    pub cells: Vec<CellSummary>,
}

impl CompareResult {
    pub fn cell(&self, strategy: &str, budget: &BudgetSpec) -> Option<&CellSummary> {
        let b = budget.to_string();
        self.cells.iter().find(|c| c.strategy == strategy && c.budget == b)
    }
}

pub fn compare_strategies(data: &Dataset, dataset_name: &str, cfg: &CompareConfig) -> Result<CompareResult> {
    if cfg.chains == 0 || cfg.strategies.is_empty() || cfg.budgets.is_empty() {
        return Err(Error::InvalidArgument("need at least one strategy, budget and chain".into()));
    }
    for s in &cfg.strategies {
        let parsed: Strategy = s.parse()?;
        if parsed == Strategy::Custom {
            return Err(Error::InvalidArgument("custom schedules cannot be benchmarked".into()));
        }
    }
    let fp = fingerprint(data);
    let mut manifests = Vec::new();
    for chain in 0..cfg.chains as u64 {
        for budget in &cfg.budgets {
            for strategy in &cfg.strategies {
                manifests.push(RunManifest {
                    strategy: strategy.clone(),
                    budget: *budget,
                    seed: cfg.seed,
                    chain,
                    dataset_fingerprint: fp.clone(),
                    config: cfg.inference.clone(),
                });
            }
        }
    }
    let results: Vec<ChainResult> = manifests
        .par_iter()
        .map(|m| {
            let r = m.run_unchecked(data)?;
            log::info!(
                "{} {} chain {}: score {:.3} ({} assigns, {:.2}s)",
                m.strategy,
                m.budget,
                m.chain,
                r.raw_score,
                r.assigns,
                r.wall_secs
            );
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(tabulate(dataset_name, &results))
}

/// Normalizes scores within the dataset and summarizes each
/// (strategy, budget) cell.
pub fn tabulate(dataset_name: &str, results: &[ChainResult]) -> CompareResult {
    let raw: Vec<f64> = results.iter().map(|r| r.raw_score).collect();
    let names = vec![dataset_name.to_string(); raw.len()];
    let norm = normalize_by_dataset(&names, &raw);
    let rows: Vec<ResultRow> = results
        .iter()
        .zip(&norm)
        .map(|(r, z)| ResultRow {
            dataset: dataset_name.to_string(),
            strategy: r.manifest.strategy.clone(),
            budget: r.manifest.budget.to_string(),
            chain: r.manifest.chain,
            raw_score: r.raw_score,
            norm_score: *z,
            wall_secs: r.wall_secs,
            assigns: r.assigns,
        })
        .collect();
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in &rows {
        let k = (r.strategy.clone(), r.budget.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let cells = keys
        .into_iter()
        .map(|(strategy, budget)| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.strategy == strategy && r.budget == budget)
                .map(|r| r.norm_score)
                .collect();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let variance = if v.len() > 1 {
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            CellSummary {
                dataset: dataset_name.to_string(),
                strategy,
                budget,
                chains: v.len(),
                mean,
                variance,
                min: v.iter().copied().fold(f64::INFINITY, f64::min),
                max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    CompareResult { rows, cells }
}

pub fn write_results_csv(path: &std::path::Path, result: &CompareResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in &result.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
