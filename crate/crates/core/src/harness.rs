//! Model comparison against the full-distribution baseline.
//!
//! The full empirical model keeps every member as an impulse, so its total
//! entropy is the target every reduced model is measured against. Reports
//! carry signed deltas, storage per vertex, and wall-clock fit/entropy times.

use std::time::Instant;

use rayon::prelude::*;

use crate::ensemble::EnsembleField;
use crate::entropy::entropy_field;
use crate::error::{Error, Result};
use crate::grid::GridDims;
use crate::models::{fit_model_with, storage_cost, FitOptions, ModelField, ModelKind};
use crate::noise::{inject_noise, NoiseKind, NoiseSpec};

/// Bin counts swept when none are given: 1 to 1000, roughly log-spaced.
pub const DEFAULT_SWEEP_BINS: [usize; 11] = [1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000];

/// Members in a noise-injected ensemble unless told otherwise.
pub const DEFAULT_NOISE_MEMBERS: usize = 50;

#[derive(Debug, Clone, Copy)]
pub struct HarnessOptions {
    pub fit: FitOptions,
    /// Evaluate models one after another so timings do not overlap.
    pub strict_timing: bool,
    /// Repeat every timed phase and keep the fastest run. Values below 1 act as 1.
    pub repeat: usize,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            strict_timing: false,
            repeat: 1,
        }
    }
}

impl HarnessOptions {
    fn runs(&self) -> usize {
        self.repeat.max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub kind: ModelKind,
    pub isovalue: f64,
    pub total_entropy: f64,
    pub delta_from_baseline: f64,
    pub storage_cost: usize,
    pub fit_seconds: f64,
    pub entropy_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub name: String,
    pub member_count: usize,
    pub isovalues: Vec<f64>,
    /// Full-distribution totals, one per isovalue.
    pub baseline: Vec<f64>,
    /// Baseline rows first, then each requested model; isovalues vary fastest.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, kind: ModelKind, isovalue: f64) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.isovalue == isovalue)
    }

    pub fn kinds(&self) -> Vec<ModelKind> {
        let mut out: Vec<ModelKind> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.kind) {
                out.push(r.kind);
            }
        }
        out
    }
}

/// Which binned model a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepModel {
    Histogram,
    Quantile,
}

impl SweepModel {
    pub fn with_bins(self, bins: usize) -> ModelKind {
        match self {
            SweepModel::Histogram => ModelKind::Histogram(bins),
            SweepModel::Quantile => ModelKind::Quantile(bins),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepModel::Histogram => "histogram",
            SweepModel::Quantile => "quantile",
        }
    }
}

impl TryFrom<ModelKind> for SweepModel {
    type Error = Error;

    fn try_from(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::Histogram(_) => Ok(SweepModel::Histogram),
            ModelKind::Quantile(_) => Ok(SweepModel::Quantile),
            other => Err(Error::Model(format!(
                "bin sweeps need histogram or quantile, got {other}"
            ))),
        }
    }
}

impl std::str::FromStr for SweepModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':').map_or(s, |(name, _)| name) {
            "histogram" => Ok(SweepModel::Histogram),
            "quantile" => Ok(SweepModel::Quantile),
            other => Err(Error::Model(format!(
                "bin sweeps need histogram or quantile, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub bins: usize,
    pub total_entropy: f64,
    pub fit_seconds: f64,
    pub entropy_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinSweepResult {
    pub model: SweepModel,
    pub isovalue: f64,
    pub member_count: usize,
    pub baseline: f64,
    pub points: Vec<SweepPoint>,
}

struct Evaluated {
    totals: Vec<(f64, f64)>,
    fit_seconds: f64,
}

fn fit_timed(
    field: &EnsembleField,
    kind: ModelKind,
    opts: &HarnessOptions,
) -> Result<(ModelField, f64)> {
    let mut best: Option<ModelField> = None;
    let mut fastest = f64::INFINITY;
    for _ in 0..opts.runs() {
        let m = fit_model_with(field, kind, &opts.fit)?;
        fastest = fastest.min(m.fit_seconds());
        best = Some(m);
    }
    Ok((best.expect("at least one run"), fastest))
}

fn evaluate(
    field: &EnsembleField,
    kind: ModelKind,
    isovalues: &[f64],
    opts: &HarnessOptions,
) -> Result<Evaluated> {
    let (models, fit_seconds) = fit_timed(field, kind, opts)?;
    let totals = isovalues
        .iter()
        .map(|&k| {
            let mut fastest = f64::INFINITY;
            let mut total = 0.0;
            for _ in 0..opts.runs() {
                let start = Instant::now();
                total = entropy_field(&models, k)?.total_entropy();
                fastest = fastest.min(start.elapsed().as_secs_f64());
            }
            Ok((total, fastest))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluated {
        totals,
        fit_seconds,
    })
}

pub fn compare_models(
    field: &EnsembleField,
    kinds: &[ModelKind],
    isovalues: &[f64],
    opts: &HarnessOptions,
) -> Result<ComparisonReport> {
    if kinds.is_empty() {
        return Err(Error::Invalid("no models to compare".into()));
    }
    if isovalues.is_empty() {
        return Err(Error::Invalid("isovalue list is empty".into()));
    }
    let mut all = vec![ModelKind::FullEmpirical];
    for &k in kinds {
        k.validate()?;
        if !all.contains(&k) {
            all.push(k);
        }
    }

    let results: Vec<Evaluated> = if opts.strict_timing {
        all.iter()
            .map(|&k| evaluate(field, k, isovalues, opts))
            .collect::<Result<_>>()?
    } else {
        all.par_iter()
            .map(|&k| evaluate(field, k, isovalues, opts))
            .collect::<Result<_>>()?
    };

    let baseline: Vec<f64> = results[0].totals.iter().map(|&(t, _)| t).collect();
    let m = field.member_count();
    let mut rows = Vec::with_capacity(all.len() * isovalues.len());
    for (&kind, eval) in all.iter().zip(&results) {
        for ((&k, &(total, entropy_seconds)), &base) in
            isovalues.iter().zip(&eval.totals).zip(&baseline)
        {
            rows.push(ComparisonRow {
                kind,
                isovalue: k,
                total_entropy: total,
                delta_from_baseline: total - base,
                storage_cost: storage_cost(kind, m),
                fit_seconds: eval.fit_seconds,
                entropy_seconds,
            });
        }
    }
    Ok(ComparisonReport {
        name: field.name().to_owned(),
        member_count: m,
        isovalues: isovalues.to_vec(),
        baseline,
        rows,
    })
}

pub fn bin_sweep(
    field: &EnsembleField,
    model: SweepModel,
    isovalue: f64,
    bins: &[usize],
    opts: &HarnessOptions,
) -> Result<BinSweepResult> {
    if bins.is_empty() {
        return Err(Error::Invalid("bin list is empty".into()));
    }
    if bins[0] < 1 || bins.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "bin counts must be at least 1 and strictly increasing".into(),
        ));
    }
    let baseline = evaluate(field, ModelKind::FullEmpirical, &[isovalue], opts)?.totals[0].0;
    let one = |b: usize| -> Result<SweepPoint> {
        let eval = evaluate(field, model.with_bins(b), &[isovalue], opts)?;
        let (total_entropy, entropy_seconds) = eval.totals[0];
        Ok(SweepPoint {
            bins: b,
            total_entropy,
            fit_seconds: eval.fit_seconds,
            entropy_seconds,
        })
    };
    let points = if opts.strict_timing {
        bins.iter().map(|&b| one(b)).collect::<Result<_>>()?
    } else {
        bins.par_iter().map(|&b| one(b)).collect::<Result<_>>()?
    };
    Ok(BinSweepResult {
        model,
        isovalue,
        member_count: field.member_count(),
        baseline,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseExperiment {
    pub gaussian_magnitude: f64,
    pub uniform_magnitude: f64,
    pub members: usize,
    pub seed: u64,
}

/// Builds a Gaussian-noise and a uniform-noise ensemble around `base` and
/// compares `kinds` on each. Returns `(gaussian, uniform)`.
pub fn noise_experiment(
    base: &[f64],
    dims: GridDims,
    experiment: &NoiseExperiment,
    isovalues: &[f64],
    kinds: &[ModelKind],
    opts: &HarnessOptions,
) -> Result<(ComparisonReport, ComparisonReport)> {
    let run = |kind: NoiseKind, magnitude: f64| -> Result<ComparisonReport> {
        let spec = NoiseSpec {
            kind,
            magnitude,
            member_count: experiment.members,
            seed: experiment.seed,
        };
        let field = inject_noise(base, dims, &spec)?;
        compare_models(&field, kinds, isovalues, opts)
    };
    Ok((
        run(NoiseKind::Gaussian, experiment.gaussian_magnitude)?,
        run(NoiseKind::Uniform, experiment.uniform_magnitude)?,
    ))
}
