//! Per-vertex distribution models and their sign-probability queries.
//!
//! Each model answers `D⁺ = P(D >= k)`; `D⁻` is always `1 - D⁺`. The five
//! kinds trade storage for fidelity:
//!
//! | kind         | stored values per vertex |
//! |--------------|--------------------------|
//! | full         | `M` (every member)       |
//! | uniform      | 2 (min, max)             |
//! | gaussian     | 2 (mean, std)            |
//! | histogram:B  | `B + 2` (masses, range)  |
//! | quantile:B   | `B + 1` (breakpoints)    |

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{f32_bytes, read_f32_file, read_manifest, resolve, EnsembleField};
use crate::error::{Error, Result};
use crate::grid::GridDims;
use crate::io::write_atomic;
use crate::normal::normal_sf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Every ensemble value kept as an equal-weight impulse; the baseline.
    FullEmpirical,
    Uniform,
    Gaussian,
    /// Equal-width bins over the per-vertex sample range.
    Histogram(usize),
    /// Breakpoints at levels `i/B`, uniform density inside each interval.
    Quantile(usize),
}

impl ModelKind {
    pub fn histogram(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Model("histogram needs at least 1 bin".into()));
        }
        Ok(ModelKind::Histogram(bins))
    }

    pub fn quantile(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Model("quantile needs at least 1 interval".into()));
        }
        Ok(ModelKind::Quantile(bins))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::FullEmpirical => "full",
            ModelKind::Uniform => "uniform",
            ModelKind::Gaussian => "gaussian",
            ModelKind::Histogram(_) => "histogram",
            ModelKind::Quantile(_) => "quantile",
        }
    }

    pub fn bins(&self) -> Option<usize> {
        match *self {
            ModelKind::Histogram(b) | ModelKind::Quantile(b) => Some(b),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelKind::Histogram(b) => Self::histogram(b).map(drop),
            ModelKind::Quantile(b) => Self::quantile(b).map(drop),
            _ => Ok(()),
        }
    }

    fn from_parts(name: &str, bins: Option<usize>) -> Result<Self> {
        let no_bins = |k: ModelKind| match bins {
            None => Ok(k),
            Some(_) => Err(Error::Model(format!("model {name:?} takes no bin count"))),
        };
        let need_bins = || {
            bins.ok_or_else(|| {
                Error::Model(format!("model {name:?} needs a bin count, e.g. {name}:5"))
            })
        };
        match name {
            "full" | "empirical" => no_bins(ModelKind::FullEmpirical),
            "uniform" => no_bins(ModelKind::Uniform),
            "gaussian" => no_bins(ModelKind::Gaussian),
            "histogram" => Self::histogram(need_bins()?),
            "quantile" => Self::quantile(need_bins()?),
            _ => Err(Error::Model(format!("unknown model {name:?}"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bins() {
            Some(b) => write!(f, "{}:{}", self.name(), b),
            None => f.write_str(self.name()),
        }
    }
}

/// Parses `full`, `uniform`, `gaussian`, `histogram:B`, `quantile:B`.
impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            None => Self::from_parts(s, None),
            Some((name, b)) => {
                let bins = b
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Model(format!("bad bin count in {s:?}")))?;
                Self::from_parts(name.trim(), Some(bins))
            }
        }
    }
}

/// Values stored per vertex by `kind` for an `M`-member ensemble.
pub fn storage_cost(kind: ModelKind, member_count: usize) -> usize {
    match kind {
        ModelKind::FullEmpirical => member_count,
        ModelKind::Uniform | ModelKind::Gaussian => 2,
        ModelKind::Histogram(b) => b + 2,
        ModelKind::Quantile(b) => b + 1,
    }
}

/// Denominator used for the Gaussian standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdEstimator {
    /// Divide by `M - 1`.
    #[default]
    Unbiased,
    /// Divide by `M`.
    Population,
}

/// Where the empirical quantile at level `p` sits among the `M` order
/// statistics (0-based position `h`, linear interpolation between
/// neighbours). Both schemes pin level 0 to the minimum and level 1 to the
/// maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantileScheme {
    /// `h = pM - 1/2`, clamped to `[0, M-1]`: the interpolated CDF passes
    /// through the midpoint of every step of the empirical CDF, so the
    /// model converges to the impulse distribution as `B` grows.
    #[default]
    Midpoint,
    /// `h = p(M-1)`: the interpolated CDF passes through `(x_(j), j/(M-1))`.
    /// The extreme samples carry half weight, which biases entropy low.
    Inclusive,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FitOptions {
    pub std_estimator: StdEstimator,
    pub quantile_scheme: QuantileScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VertexModel {
    /// Samples sorted ascending.
    FullEmpirical(Vec<f64>),
    Uniform {
        min: f64,
        max: f64,
    },
    Gaussian {
        mean: f64,
        std: f64,
    },
    Histogram {
        lo: f64,
        hi: f64,
        masses: Vec<f64>,
    },
    /// `B + 1` non-decreasing breakpoints, `1/B` mass per interval.
    Quantile(Vec<f64>),
}

impl VertexModel {
    /// Fits `kind` to `samples`, which are sorted in place.
    pub fn fit(samples: &mut [f64], kind: ModelKind, opts: &FitOptions) -> Self {
        assert!(!samples.is_empty(), "cannot fit a model to zero samples");
        samples.sort_unstable_by(f64::total_cmp);
        let m = samples.len();
        let min = samples[0];
        let max = samples[m - 1];
        match kind {
            ModelKind::FullEmpirical => VertexModel::FullEmpirical(samples.to_vec()),
            ModelKind::Uniform => VertexModel::Uniform { min, max },
            ModelKind::Gaussian => {
                if min == max {
                    return VertexModel::Gaussian {
                        mean: min,
                        std: 0.0,
                    };
                }
                let mean = samples.iter().sum::<f64>() / m as f64;
                let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
                let denom = match opts.std_estimator {
                    StdEstimator::Unbiased if m > 1 => (m - 1) as f64,
                    _ => m as f64,
                };
                VertexModel::Gaussian {
                    mean,
                    std: (ss / denom).sqrt(),
                }
            }
            ModelKind::Histogram(bins) => {
                let mut counts = vec![0usize; bins];
                if max > min {
                    let width = (max - min) / bins as f64;
                    for &x in samples.iter() {
                        let b = (((x - min) / width) as usize).min(bins - 1);
                        counts[b] += 1;
                    }
                } else {
                    counts[0] = m;
                }
                VertexModel::Histogram {
                    lo: min,
                    hi: max,
                    masses: counts.iter().map(|&c| c as f64 / m as f64).collect(),
                }
            }
            ModelKind::Quantile(bins) => {
                let scheme = opts.quantile_scheme;
                VertexModel::Quantile(
                    (0..=bins)
                        .map(|i| sorted_quantile(samples, i, bins, scheme))
                        .collect(),
                )
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            VertexModel::FullEmpirical(_) => ModelKind::FullEmpirical,
            VertexModel::Uniform { .. } => ModelKind::Uniform,
            VertexModel::Gaussian { .. } => ModelKind::Gaussian,
            VertexModel::Histogram { masses, .. } => ModelKind::Histogram(masses.len()),
            VertexModel::Quantile(q) => ModelKind::Quantile(q.len() - 1),
        }
    }

    /// `P(D >= k)` under this model.
    pub fn sign_prob_above(&self, k: f64) -> f64 {
        match self {
            VertexModel::FullEmpirical(sorted) => {
                let below = sorted.partition_point(|&x| x < k);
                (sorted.len() - below) as f64 / sorted.len() as f64
            }
            &VertexModel::Uniform { min, max } => {
                if k <= min {
                    1.0
                } else if k >= max {
                    0.0
                } else {
                    ((max - k) / (max - min)).clamp(0.0, 1.0)
                }
            }
            &VertexModel::Gaussian { mean, std } => {
                if std == 0.0 {
                    if k <= mean {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    normal_sf((k - mean) / std)
                }
            }
            VertexModel::Histogram { lo, hi, masses } => histogram_above(*lo, *hi, masses, k),
            VertexModel::Quantile(q) => quantile_above(q, k),
        }
    }

    /// `P(D < k) = 1 - D⁺`.
    pub fn sign_prob_below(&self, k: f64) -> f64 {
        1.0 - self.sign_prob_above(k)
    }

    /// Stored parameters, in the order used by the model-field file format.
    pub fn params(&self) -> Vec<f64> {
        match self {
            VertexModel::FullEmpirical(v) | VertexModel::Quantile(v) => v.clone(),
            &VertexModel::Uniform { min, max } => vec![min, max],
            &VertexModel::Gaussian { mean, std } => vec![mean, std],
            VertexModel::Histogram { lo, hi, masses } => {
                let mut out = Vec::with_capacity(masses.len() + 2);
                out.push(*lo);
                out.push(*hi);
                out.extend_from_slice(masses);
                out
            }
        }
    }

    /// Rebuilds a model from [`VertexModel::params`], checking its invariants.
    /// Histogram masses are renormalized to sum to one.
    pub fn from_params(kind: ModelKind, params: &[f64]) -> Result<Self> {
        let bad = |why: &str| Err(Error::Model(format!("{kind}: {why}")));
        if params.iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter");
        }
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]);
        match kind {
            ModelKind::FullEmpirical => {
                if params.is_empty() || !sorted(params) {
                    return bad("samples must be non-empty and ascending");
                }
                Ok(VertexModel::FullEmpirical(params.to_vec()))
            }
            ModelKind::Uniform | ModelKind::Gaussian => {
                let [a, b] = params else {
                    return bad("expected 2 parameters");
                };
                if kind == ModelKind::Uniform {
                    if a > b {
                        return bad("min exceeds max");
                    }
                    Ok(VertexModel::Uniform { min: *a, max: *b })
                } else {
                    if *b < 0.0 {
                        return bad("negative standard deviation");
                    }
                    Ok(VertexModel::Gaussian { mean: *a, std: *b })
                }
            }
            ModelKind::Histogram(bins) => {
                if params.len() != bins + 2 || params[0] > params[1] {
                    return bad("expected lo <= hi followed by one mass per bin");
                }
                let masses = &params[2..];
                let total: f64 = masses.iter().sum();
                if masses.iter().any(|&m| m < 0.0) || total <= 0.0 {
                    return bad("masses must be non-negative with positive total");
                }
                Ok(VertexModel::Histogram {
                    lo: params[0],
                    hi: params[1],
                    masses: masses.iter().map(|m| m / total).collect(),
                })
            }
            ModelKind::Quantile(bins) => {
                if params.len() != bins + 1 || !sorted(params) {
                    return bad("expected B+1 non-decreasing breakpoints");
                }
                Ok(VertexModel::Quantile(params.to_vec()))
            }
        }
    }
}

/// Empirical quantile at level `i/bins`. The position is kept as an exact
/// rational `num/den` so breakpoints land on order statistics whenever the
/// level does.
fn sorted_quantile(sorted: &[f64], i: usize, bins: usize, scheme: QuantileScheme) -> f64 {
    let m = sorted.len();
    let (num, den) = match scheme {
        QuantileScheme::Inclusive => (i * (m - 1), bins),
        // i*M/B - 1/2 over the common denominator 2B.
        QuantileScheme::Midpoint => ((2 * i * m).saturating_sub(bins), 2 * bins),
    };
    let lo = num / den;
    if lo >= m - 1 {
        return sorted[m - 1];
    }
    let rem = num % den;
    if rem == 0 {
        return sorted[lo];
    }
    let frac = rem as f64 / den as f64;
    let (a, b) = (sorted[lo], sorted[lo + 1]);
    (a + frac * (b - a)).clamp(a, b)
}

fn histogram_above(lo: f64, hi: f64, masses: &[f64], k: f64) -> f64 {
    if hi == lo {
        return if k <= lo { 1.0 } else { 0.0 };
    }
    if k <= lo {
        return 1.0;
    }
    if k >= hi {
        return 0.0;
    }
    let bins = masses.len();
    let width = (hi - lo) / bins as f64;
    let edge = |i: usize| {
        if i == 0 {
            lo
        } else if i == bins {
            hi
        } else {
            lo + i as f64 * width
        }
    };
    // Settle on the bin with edge(j) <= k < edge(j+1) under the same edge
    // arithmetic used below, so rounding cannot break monotonicity.
    let mut j = (((k - lo) / width) as usize).min(bins - 1);
    while j > 0 && k < edge(j) {
        j -= 1;
    }
    while j + 1 < bins && k >= edge(j + 1) {
        j += 1;
    }
    let (left, right) = (edge(j), edge(j + 1));
    let frac = ((right - k) / (right - left)).clamp(0.0, 1.0);
    let tail: f64 = masses[j + 1..].iter().rev().sum();
    tail + masses[j] * frac
}

fn quantile_above(q: &[f64], k: f64) -> f64 {
    let bins = q.len() - 1;
    // Intervals whose lower breakpoint is >= k lie wholly above k. A tied
    // (zero-width) interval is an atom at its breakpoint and falls under
    // the same rule.
    let below = q[..bins].partition_point(|&x| x < k);
    let mut above = (bins - below) as f64;
    if below > 0 {
        let (a, b) = (q[below - 1], q[below]);
        if b > k {
            above += ((b - k) / (b - a)).clamp(0.0, 1.0);
        }
    }
    above / bins as f64
}

/// One fitted model per grid vertex.
#[derive(Debug, Clone)]
pub struct ModelField {
    dims: GridDims,
    kind: ModelKind,
    member_count: usize,
    models: Vec<VertexModel>,
    fit_seconds: f64,
}

impl ModelField {
    pub fn new(
        dims: GridDims,
        kind: ModelKind,
        member_count: usize,
        models: Vec<VertexModel>,
    ) -> Result<Self> {
        if models.len() != dims.vertex_count() {
            return Err(Error::Model(format!(
                "{} vertex models for a grid of {} vertices",
                models.len(),
                dims.vertex_count()
            )));
        }
        if let Some(v) = models.iter().position(|m| m.kind() != kind) {
            return Err(Error::Model(format!(
                "vertex {v} holds a {} model in a {kind} field",
                models[v].kind()
            )));
        }
        Ok(Self {
            dims,
            kind,
            member_count,
            models,
            fit_seconds: 0.0,
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn member_count(&self) -> usize {
        self.member_count
    }

    pub fn models(&self) -> &[VertexModel] {
        &self.models
    }

    pub fn fit_seconds(&self) -> f64 {
        self.fit_seconds
    }

    pub fn storage_cost(&self) -> usize {
        storage_cost(self.kind, self.member_count)
    }

    /// `D⁺` for every vertex at isovalue `k`.
    pub fn sign_probs_above(&self, k: f64) -> Vec<f64> {
        self.models
            .par_iter()
            .map(|m| m.sign_prob_above(k))
            .collect()
    }
}

pub fn fit_model(field: &EnsembleField, kind: ModelKind) -> Result<ModelField> {
    fit_model_with(field, kind, &FitOptions::default())
}

/// Fits `kind` independently at every vertex, in parallel over vertices.
pub fn fit_model_with(
    field: &EnsembleField,
    kind: ModelKind,
    opts: &FitOptions,
) -> Result<ModelField> {
    kind.validate()?;
    let start = Instant::now();
    let m = field.member_count();
    let models = (0..field.dims().vertex_count())
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(m),
            |buf, v| {
                field.samples_at(v, buf);
                VertexModel::fit(buf, kind, opts)
            },
        )
        .collect();
    Ok(ModelField {
        dims: field.dims(),
        kind,
        member_count: m,
        models,
        fit_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFieldManifest {
    dims: [usize; 3],
    kind: String,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    bins: Option<usize>,
    member_count: usize,
    values_per_vertex: usize,
    dtype: String,
    order: String,
    data: String,
}

/// Writes `field` as a JSON manifest plus one raw float32 file holding each
/// vertex's parameters back to back (x-fastest vertex order).
pub fn write_model_field(field: &ModelField, manifest_path: impl AsRef<Path>) -> Result<()> {
    let path = manifest_path.as_ref();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let data = format!("{stem}.f32");
    let bytes = f32_bytes(field.models.iter().flat_map(|m| m.params()));
    write_atomic(&resolve(path, &data), &bytes)?;
    let manifest = ModelFieldManifest {
        dims: field.dims.as_array(),
        kind: field.kind.name().into(),
        bins: field.kind.bins(),
        member_count: field.member_count,
        values_per_vertex: field.storage_cost(),
        dtype: crate::ensemble::DTYPE_F32.into(),
        order: crate::ensemble::ORDER_X_FASTEST.into(),
        data,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_model_field(manifest_path: impl AsRef<Path>) -> Result<ModelField> {
    let path = manifest_path.as_ref();
    let manifest: ModelFieldManifest = read_manifest(path)?;
    let dims = GridDims::try_from(manifest.dims)?;
    let kind = ModelKind::from_parts(&manifest.kind, manifest.bins)?;
    let stride = storage_cost(kind, manifest.member_count);
    if stride != manifest.values_per_vertex {
        return Err(Error::Model(format!(
            "{}: values_per_vertex {} does not match {kind} with M = {}",
            path.display(),
            manifest.values_per_vertex,
            manifest.member_count
        )));
    }
    let values = read_f32_file(&resolve(path, &manifest.data), dims.vertex_count() * stride)?;
    let models = values
        .chunks_exact(stride)
        .map(|p| VertexModel::from_params(kind, p))
        .collect::<Result<Vec<_>>>()?;
    ModelField::new(dims, kind, manifest.member_count, models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fit(samples: &[f64], kind: ModelKind) -> VertexModel {
        VertexModel::fit(&mut samples.to_vec(), kind, &FitOptions::default())
    }

    /// Brute-force `P(D >= k)` for a piecewise-uniform density: midpoint-rule
    /// integration of each piece's density over `[k, ∞)`.
    fn integrate_pieces(pieces: &[(f64, f64, f64)], k: f64) -> f64 {
        let n = 200_000;
        pieces
            .iter()
            .map(|&(a, b, mass)| {
                let dx = (b - a) / n as f64;
                (0..n)
                    .map(|i| a + (i as f64 + 0.5) * dx)
                    .filter(|&x| x >= k)
                    .count() as f64
                    * dx
                    * mass
                    / (b - a)
            })
            .sum()
    }

    #[test]
    fn uniform_fit_and_query() {
        assert_eq!(
            fit(&[3.0, 1.0, 4.0, 2.0], ModelKind::Uniform),
            VertexModel::Uniform { min: 1.0, max: 4.0 }
        );
        let u = VertexModel::Uniform {
            min: 0.0,
            max: 10.0,
        };
        assert!((u.sign_prob_above(2.0) - 0.8).abs() < 1e-15);
        assert_eq!(u.sign_prob_above(-1.0), 1.0);
        assert_eq!(u.sign_prob_above(11.0), 0.0);
    }

    #[test]
    fn histogram_two_bins() {
        let h = fit(&[0.0, 1.0, 2.0, 3.0], ModelKind::Histogram(2));
        // Hand count: bin [0,1.5) holds {0,1}, bin [1.5,3] holds {2,3}.
        assert_eq!(
            h,
            VertexModel::Histogram {
                lo: 0.0,
                hi: 3.0,
                masses: vec![0.5, 0.5]
            }
        );
        let oracle = integrate_pieces(&[(0.0, 1.5, 0.5), (1.5, 3.0, 0.5)], 0.75);
        assert!((oracle - 0.75).abs() < 1e-4);
        assert!((h.sign_prob_above(0.75) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn quantile_two_intervals() {
        let q = fit(&[3.0, 0.0, 2.0, 1.0], ModelKind::Quantile(2));
        // Both schemes put the median at position 1.5, between order stats 1 and 2.
        assert_eq!(q, VertexModel::Quantile(vec![0.0, 1.5, 3.0]));
        let inclusive = FitOptions {
            quantile_scheme: QuantileScheme::Inclusive,
            ..Default::default()
        };
        assert_eq!(
            VertexModel::fit(
                &mut [3.0, 0.0, 2.0, 1.0],
                ModelKind::Quantile(2),
                &inclusive
            ),
            q
        );
        let oracle = integrate_pieces(&[(0.0, 1.5, 0.5), (1.5, 3.0, 0.5)], 2.25);
        assert!((oracle - 0.25).abs() < 1e-4);
        assert!((q.sign_prob_above(2.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gaussian_queries() {
        let g = VertexModel::Gaussian {
            mean: 0.0,
            std: 1.0,
        };
        assert_eq!(g.sign_prob_above(0.0), 0.5);
        assert!((g.sign_prob_above(1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
        // Unbounded support: still positive above the sample max.
        let g = fit(&[0.0, 1.0, 2.0], ModelKind::Gaussian);
        assert_eq!(
            g,
            VertexModel::Gaussian {
                mean: 1.0,
                std: 1.0
            }
        );
        assert!(g.sign_prob_above(2.5) > 0.0);
        let pop = VertexModel::fit(
            &mut [0.0, 1.0, 2.0],
            ModelKind::Gaussian,
            &FitOptions {
                std_estimator: StdEstimator::Population,
                ..Default::default()
            },
        );
        let VertexModel::Gaussian { std, .. } = pop else {
            unreachable!()
        };
        assert!((std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empirical_counts_ties_as_above() {
        let e = fit(&[4.0, 2.0, 1.0, 3.0], ModelKind::FullEmpirical);
        assert_eq!(e, VertexModel::FullEmpirical(vec![1.0, 2.0, 3.0, 4.0]));
        assert_eq!(e.sign_prob_above(2.5), 0.5);
        assert_eq!(e.sign_prob_above(2.0), 0.75);
        assert_eq!(e.sign_prob_above(0.0), 1.0);
        assert_eq!(e.sign_prob_above(4.5), 0.0);
    }

    #[test]
    fn degenerate_vertices() {
        let same = [2.5; 6];
        for kind in [
            ModelKind::FullEmpirical,
            ModelKind::Uniform,
            ModelKind::Gaussian,
            ModelKind::Histogram(4),
            ModelKind::Quantile(4),
        ] {
            let m = fit(&same, kind);
            assert_eq!(m.sign_prob_above(2.5), 1.0, "{kind}");
            assert_eq!(m.sign_prob_above(2.4), 1.0, "{kind}");
            assert_eq!(m.sign_prob_above(2.6), 0.0, "{kind}");
        }
        // 0.1 * 3 / 3 != 0.1 in floating point; the fit must still be exact.
        assert_eq!(
            fit(&[0.1, 0.1, 0.1], ModelKind::Gaussian),
            VertexModel::Gaussian {
                mean: 0.1,
                std: 0.0
            }
        );
    }

    #[test]
    fn quantile_schemes_differ_off_the_median() {
        let s = [0.0, 1.0, 2.0, 3.0];
        // Midpoint positions for B = 4: h = i - 1/2 clamped to [0, 3].
        assert_eq!(
            fit(&s, ModelKind::Quantile(4)),
            VertexModel::Quantile(vec![0.0, 0.5, 1.5, 2.5, 3.0])
        );
        let inclusive = FitOptions {
            quantile_scheme: QuantileScheme::Inclusive,
            ..Default::default()
        };
        assert_eq!(
            VertexModel::fit(&mut s.to_vec(), ModelKind::Quantile(4), &inclusive),
            VertexModel::Quantile(vec![0.0, 0.75, 1.5, 2.25, 3.0])
        );
        // B = 8 puts two breakpoints at the minimum: an atom of mass 1/8.
        let VertexModel::Quantile(q) = fit(&s, ModelKind::Quantile(8)) else {
            unreachable!()
        };
        assert_eq!(&q[..3], &[0.0, 0.0, 0.5]);
    }

    #[test]
    fn tied_quantile_breakpoints_are_atoms() {
        // Breakpoints 0, 1, 1, 2 with B = 3: middle interval is an atom at 1.
        let q = VertexModel::Quantile(vec![0.0, 1.0, 1.0, 2.0]);
        assert!((q.sign_prob_above(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((q.sign_prob_above(1.0 + 1e-12) - 1.0 / 3.0).abs() < 1e-9);
        assert!((q.sign_prob_above(0.5) - (2.0 / 3.0 + 0.5 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn storage_costs() {
        for m in [15, 20] {
            assert_eq!(storage_cost(ModelKind::Uniform, m), 2);
            assert_eq!(storage_cost(ModelKind::Gaussian, m), 2);
            assert_eq!(storage_cost(ModelKind::Histogram(5), m), 7);
            assert_eq!(storage_cost(ModelKind::Quantile(5), m), 6);
            assert_eq!(storage_cost(ModelKind::FullEmpirical, m), m);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "histogram:5".parse::<ModelKind>().unwrap(),
            ModelKind::Histogram(5)
        );
        assert_eq!(
            "quantile:100".parse::<ModelKind>().unwrap(),
            ModelKind::Quantile(100)
        );
        assert_eq!(
            "full".parse::<ModelKind>().unwrap(),
            ModelKind::FullEmpirical
        );
        assert_eq!(
            "gaussian".parse::<ModelKind>().unwrap(),
            ModelKind::Gaussian
        );
        for bad in ["histogram", "histogram:0", "quantile:x", "uniform:3", "kde"] {
            assert!(bad.parse::<ModelKind>().is_err(), "{bad}");
        }
        for k in [
            ModelKind::Histogram(7),
            ModelKind::Uniform,
            ModelKind::FullEmpirical,
        ] {
            assert_eq!(k.to_string().parse::<ModelKind>().unwrap(), k);
        }
    }

    #[test]
    fn model_field_file_roundtrip() {
        let dims = GridDims::new_2d(3, 2).unwrap();
        let members = (0..5)
            .map(|m| {
                (0..6)
                    .map(|v| ((v * 7 + m * 3) % 11) as f64 * 0.5)
                    .collect()
            })
            .collect();
        let field = EnsembleField::new("t", dims, members).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for kind in [
            ModelKind::FullEmpirical,
            ModelKind::Uniform,
            ModelKind::Gaussian,
            ModelKind::Histogram(3),
            ModelKind::Quantile(4),
        ] {
            let fitted = fit_model(&field, kind).unwrap();
            let path = dir.path().join(format!("{}.json", kind.name()));
            write_model_field(&fitted, &path).unwrap();
            let back = read_model_field(&path).unwrap();
            assert_eq!(back.kind(), kind);
            assert_eq!(back.member_count(), 5);
            for (a, b) in fitted.models().iter().zip(back.models()) {
                for k in [-0.3, 0.5, 1.25, 2.0, 4.9] {
                    assert!((a.sign_prob_above(k) - b.sign_prob_above(k)).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn from_params_rejects_broken_invariants() {
        assert!(VertexModel::from_params(ModelKind::Uniform, &[2.0, 1.0]).is_err());
        assert!(VertexModel::from_params(ModelKind::Gaussian, &[0.0, -1.0]).is_err());
        assert!(VertexModel::from_params(ModelKind::Quantile(2), &[0.0, 2.0, 1.0]).is_err());
        assert!(VertexModel::from_params(ModelKind::FullEmpirical, &[3.0, 1.0]).is_err());
        assert!(VertexModel::from_params(ModelKind::Histogram(2), &[0.0, 1.0, 0.5]).is_err());
    }

    fn samples() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, 2..40)
    }

    fn any_kind() -> impl Strategy<Value = ModelKind> {
        prop_oneof![
            Just(ModelKind::FullEmpirical),
            Just(ModelKind::Uniform),
            Just(ModelKind::Gaussian),
            (1usize..30).prop_map(ModelKind::Histogram),
            (1usize..30).prop_map(ModelKind::Quantile),
        ]
    }

    proptest! {
        #[test]
        fn probabilities_are_complementary_and_monotone(
            s in samples(),
            kind in any_kind(),
            mut ks in prop::collection::vec(-60.0f64..60.0, 1..40),
        ) {
            let m = fit(&s, kind);
            ks.sort_by(f64::total_cmp);
            let mut prev = 1.0;
            for &k in &ks {
                let up = m.sign_prob_above(k);
                prop_assert!((0.0..=1.0).contains(&up));
                prop_assert_eq!(up + m.sign_prob_below(k), 1.0);
                prop_assert!(up <= prev, "{kind}: D+ rose from {prev} to {up} at k = {k}");
                prev = up;
            }
        }

        #[test]
        fn outside_sample_range(s in samples(), kind in any_kind(), d in 0.001f64..10.0) {
            let m = fit(&s, kind);
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let below = m.sign_prob_above(lo - d);
            let above = m.sign_prob_above(hi + d);
            match m {
                // Unbounded support on both sides.
                VertexModel::Gaussian { mean, std } if std > 0.0 => {
                    prop_assert_eq!(below, normal_sf((lo - d - mean) / std));
                    prop_assert_eq!(above, normal_sf((hi + d - mean) / std));
                }
                _ => {
                    prop_assert_eq!(below, 1.0);
                    prop_assert_eq!(above, 0.0);
                }
            }
        }

        #[test]
        fn one_bin_models_collapse_to_uniform(s in samples(), k in -60.0f64..60.0) {
            let u = fit(&s, ModelKind::Uniform).sign_prob_above(k);
            let h = fit(&s, ModelKind::Histogram(1)).sign_prob_above(k);
            let q = fit(&s, ModelKind::Quantile(1)).sign_prob_above(k);
            prop_assert!((u - h).abs() <= 1e-12);
            prop_assert!((u - q).abs() <= 1e-12);
        }

        #[test]
        fn histogram_masses_sum_to_one(s in samples(), bins in 1usize..200) {
            let VertexModel::Histogram { masses, lo, hi } = fit(&s, ModelKind::Histogram(bins)) else {
                unreachable!()
            };
            prop_assert!(lo <= hi);
            prop_assert!((masses.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn quantile_breakpoints_span_samples(s in samples(), bins in 1usize..100) {
            let VertexModel::Quantile(q) = fit(&s, ModelKind::Quantile(bins)) else { unreachable!() };
            let mut sorted = s.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assert_eq!(q[0], sorted[0]);
            prop_assert_eq!(q[bins], *sorted.last().unwrap());
            prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        }

        /// With `B >= M` distinct samples each scheme stays within `1/B` of
        /// its piecewise-linear empirical CDF.
        #[test]
        fn quantile_tracks_interpolated_ecdf(
            raw in prop::collection::btree_set(-1000i32..1000, 2..25),
            extra in 0usize..40,
        ) {
            let s: Vec<f64> = raw.iter().map(|&v| v as f64 * 0.05).collect();
            let m = s.len();
            let bins = m + extra;
            let fit_with = |scheme| VertexModel::fit(
                &mut s.clone(),
                ModelKind::Quantile(bins),
                &FitOptions { quantile_scheme: scheme, ..Default::default() },
            );
            let mid = fit_with(QuantileScheme::Midpoint);
            let inc = fit_with(QuantileScheme::Inclusive);
            let (lo, hi) = (s[0], s[m - 1]);
            for i in 1..400 {
                let k = lo + (hi - lo) * i as f64 / 400.0;
                // Segment j-1..j of the order statistics holding k.
                let j = s.partition_point(|&x| x <= k).clamp(1, m - 1);
                let t = ((k - s[j - 1]) / (s[j] - s[j - 1])).clamp(0.0, 1.0);
                let cdf_inc = (j - 1) as f64 / (m - 1) as f64 + t / (m - 1) as f64;
                let cdf_mid = (j as f64 - 0.5 + t) / m as f64;
                let tol = 1.0 / bins as f64 + 1e-9;
                prop_assert!((inc.sign_prob_above(k) - (1.0 - cdf_inc)).abs() <= tol, "inclusive, k = {}", k);
                prop_assert!((mid.sign_prob_above(k) - (1.0 - cdf_mid)).abs() <= tol, "midpoint, k = {}", k);
            }
        }

        /// The midpoint scheme also tracks the impulse (step) distribution:
        /// within half a step plus one quantile interval.
        #[test]
        fn midpoint_quantile_tracks_step_ecdf(
            raw in prop::collection::btree_set(-1000i32..1000, 2..25),
            bins in 1usize..300,
        ) {
            let s: Vec<f64> = raw.iter().map(|&v| v as f64 * 0.05).collect();
            let m = s.len();
            let q = fit(&s, ModelKind::Quantile(bins));
            let e = fit(&s, ModelKind::FullEmpirical);
            for i in 0..=500 {
                let k = s[0] - 1.0 + (s[m - 1] - s[0] + 2.0) * i as f64 / 500.0;
                let diff = (q.sign_prob_above(k) - e.sign_prob_above(k)).abs();
                prop_assert!(diff <= 0.5 / m as f64 + 1.0 / bins as f64 + 1e-9, "k = {}: {}", k, diff);
            }
        }
    }
}
