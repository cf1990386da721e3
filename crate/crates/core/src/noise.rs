//! Seeded synthetic ensembles: a single base member plus i.i.d. per-vertex noise.
//!
//! Member `m` draws from its own ChaCha8 stream: the key is expanded from the
//! 64-bit seed (`SeedableRng::seed_from_u64`) and the stream id is `m`. The
//! output is a pure function of `(base, spec)` on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::ensemble::EnsembleField;
use crate::error::{Error, Result};
use crate::grid::GridDims;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Magnitude is the standard deviation.
    Gaussian,
    /// Magnitude is the half-width `a` of `[-a, a]`.
    Uniform,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Uniform => "uniform",
        })
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "uniform" => Ok(NoiseKind::Uniform),
            _ => Err(Error::Invalid(format!(
                "unknown noise kind {s:?} (expected gaussian or uniform)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub magnitude: f64,
    pub member_count: usize,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.magnitude > 0.0 && self.magnitude.is_finite()) {
            return Err(Error::Noise("magnitude must be positive and finite"));
        }
        if self.member_count < 2 {
            return Err(Error::Noise("member count must be at least 2"));
        }
        Ok(())
    }
}

/// `r * (max - min)` of `base`, the `--magnitude-relative` convenience.
pub fn relative_magnitude(base: &[f64], r: f64) -> f64 {
    let (lo, hi) = base
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    r * (hi - lo)
}

pub fn member_rng(seed: u64, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64);
    rng
}

pub fn inject_noise(base: &[f64], dims: GridDims, spec: &NoiseSpec) -> Result<EnsembleField> {
    spec.validate()?;
    if base.len() != dims.vertex_count() {
        return Err(Error::Invalid(format!(
            "base member has {} values, grid {dims} needs {}",
            base.len(),
            dims.vertex_count()
        )));
    }
    let a = spec.magnitude;
    let members = (0..spec.member_count)
        .map(|m| {
            let mut rng = member_rng(spec.seed, m);
            match spec.kind {
                NoiseKind::Gaussian => base
                    .iter()
                    .map(|&b| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        b + a * z
                    })
                    .collect(),
                NoiseKind::Uniform => {
                    let dist = Uniform::new_inclusive(-a, a).expect("validated magnitude");
                    base.iter().map(|&b| b + dist.sample(&mut rng)).collect()
                }
            }
        })
        .collect();
    EnsembleField::new(format!("{}-noise", spec.kind), dims, members)
}

/// A smooth deterministic test field on `[0,1]^3`, with values in about `[-1.5, 1.5]`.
pub fn synthetic_base(dims: GridDims) -> Vec<f64> {
    use std::f64::consts::TAU;
    let scale = |n: usize, i: usize| {
        if n > 1 {
            i as f64 / (n - 1) as f64
        } else {
            0.0
        }
    };
    let mut out = Vec::with_capacity(dims.vertex_count());
    for k in 0..dims.nz() {
        let z = scale(dims.nz(), k);
        for j in 0..dims.ny() {
            let y = scale(dims.ny(), j);
            for i in 0..dims.nx() {
                let x = scale(dims.nx(), i);
                out.push(
                    (TAU * 1.5 * x).sin() * (TAU * 1.25 * y).cos()
                        + 0.5 * (TAU * (x + 0.7 * y + 0.5 * z)).sin(),
                );
            }
        }
    }
    out
}
