//! Positional uncertainty of level sets in ensemble scalar fields.
//!
//! An [`EnsembleField`] is fitted per vertex with one of five distribution
//! models ([`ModelKind`]); each model yields the probability that a vertex
//! lies at or above an isovalue. Under vertex independence those
//! probabilities give every cell a distribution over its 16 (2D) or 256 (3D)
//! marching-squares/cubes sign configurations, and the Shannon entropy of that
//! distribution measures how uncertain the level set is inside the cell.
//!
//! ```
//! use isentropy::{entropy_field, fit_model, inject_noise, synthetic_base};
//! use isentropy::{GridDims, ModelKind, NoiseKind, NoiseSpec};
//!
//! let dims = GridDims::new_2d(32, 32).unwrap();
//! let spec = NoiseSpec { kind: NoiseKind::Gaussian, magnitude: 0.1, member_count: 20, seed: 7 };
//! let ensemble = inject_noise(&synthetic_base(dims), dims, &spec).unwrap();
//! let models = fit_model(&ensemble, ModelKind::Quantile(5)).unwrap();
//! let entropy = entropy_field(&models, 0.0).unwrap();
//! assert!(entropy.total_entropy() > 0.0);
//! ```

pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod grid;
pub mod harness;
mod io;
pub mod models;
pub mod noise;
pub mod normal;
pub mod render;
pub mod report;
mod sum;

pub use ensemble::{load_ensemble, write_ensemble, EnsembleField, EnsembleManifest};
pub use entropy::{
    cell_case_distribution, cell_entropy, entropy_field, entropy_field_sweep,
    entropy_from_sign_probs, read_entropy_field, sidecar_path, write_entropy_field,
    CaseDistribution, EntropyField,
};
pub use error::{Error, Result};
pub use grid::GridDims;
pub use harness::{
    bin_sweep, compare_models, noise_experiment, BinSweepResult, ComparisonReport, ComparisonRow,
    HarnessOptions, NoiseExperiment, SweepModel, SweepPoint, DEFAULT_NOISE_MEMBERS,
    DEFAULT_SWEEP_BINS,
};
pub use models::{
    fit_model, fit_model_with, read_model_field, storage_cost, write_model_field, FitOptions,
    ModelField, ModelKind, QuantileScheme, StdEstimator, VertexModel,
};
pub use noise::{inject_noise, relative_magnitude, synthetic_base, NoiseKind, NoiseSpec};
pub use normal::{normal_cdf, normal_sf};
pub use render::{entropy_map_pgm, render_entropy_map};
pub use report::{emit_comparison, emit_sweep, fmt_sig6, EmitOptions, ReportFormat};
pub use sum::neumaier_sum;
