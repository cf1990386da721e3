//! Per-cell topology-case distributions and level-set entropy.
//!
//! Local vertex `v` of a cell sits at offset `(dx, dy, dz)` with
//! `v = (dz * 2 + dy) * 2 + dx`. Bit `v` of a case index is set when that
//! vertex is positive (`>= k`). Vertices are independent, so
//! `P(c) = Π_v (bit v of c ? D⁺_v : 1 - D⁺_v)`.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{f32_bytes, read_f32_file, read_manifest, resolve, EnsembleField};
use crate::error::{Error, Result};
use crate::grid::GridDims;
use crate::io::write_atomic;
use crate::models::{fit_model, ModelField, ModelKind};
use crate::sum::neumaier_sum;

pub const MAX_CASES: usize = 256;

/// Probability of every sign configuration of one cell: 16 entries in 2D,
/// 256 in 3D.
#[derive(Clone, PartialEq)]
pub struct CaseDistribution {
    probs: [f64; MAX_CASES],
    len: usize,
}

impl std::fmt::Debug for CaseDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("CaseDistribution")
            .field(&self.probs())
            .finish()
    }
}

impl CaseDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs[..self.len]
    }

    pub fn case_count(&self) -> usize {
        self.len
    }

    /// Shannon entropy in bits; zero-probability cases contribute nothing.
    pub fn entropy(&self) -> f64 {
        entropy_bits(self.probs())
    }
}

/// Expands independent per-vertex `D⁺` into the joint case distribution by
/// repeated doubling: starting from `[1]`, vertex `v` splits every entry into
/// `(1 - p, p)` placed at offsets `c` and `c + 2^v`.
#[inline]
pub fn expand_cases(dplus: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), 1 << dplus.len());
    out[0] = 1.0;
    let mut len = 1;
    for &p in dplus {
        let q = 1.0 - p;
        let (lo, hi) = out[..2 * len].split_at_mut(len);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            *b = *a * p;
            *a *= q;
        }
        len *= 2;
    }
}

#[inline]
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let sum: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum();
    // `0.0 - x` rather than `-x` so a certain cell yields +0.
    0.0 - sum
}

pub fn cell_case_distribution(dplus: &[f64]) -> Result<CaseDistribution> {
    if dplus.len() != 4 && dplus.len() != 8 {
        return Err(Error::Invalid(format!(
            "a cell has 4 or 8 vertices, got {}",
            dplus.len()
        )));
    }
    if let Some((vertex, &value)) = dplus
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(Error::Probability { vertex, value });
    }
    let len = 1 << dplus.len();
    let mut probs = [0.0; MAX_CASES];
    expand_cases(dplus, &mut probs[..len]);
    Ok(CaseDistribution { probs, len })
}

pub fn cell_entropy(dist: &CaseDistribution) -> f64 {
    dist.entropy()
}

/// Vertex indices of cell `(i, j, k)` in local order.
#[inline]
pub fn cell_vertices(dims: GridDims, i: usize, j: usize, k: usize) -> ([usize; 8], usize) {
    let mut out = [0; 8];
    let n = dims.cell_vertex_count();
    for (v, slot) in out.iter_mut().enumerate().take(n) {
        let (dx, dy, dz) = (v & 1, (v >> 1) & 1, v >> 2);
        *slot = dims.index(i + dx, j + dy, k + dz);
    }
    (out, n)
}

/// Per-cell entropy over a grid plus its total.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyField {
    grid: GridDims,
    isovalue: f64,
    model: Option<ModelKind>,
    cell_entropy: Vec<f64>,
    total_entropy: f64,
    entropy_seconds: f64,
}

impl EntropyField {
    /// Wraps precomputed cell entropies (x-fastest cell order).
    pub fn from_cells(
        grid: GridDims,
        isovalue: f64,
        model: Option<ModelKind>,
        cell_entropy: Vec<f64>,
    ) -> Result<Self> {
        if cell_entropy.len() != grid.cell_count() {
            return Err(Error::Invalid(format!(
                "{} cell values for a grid with {} cells",
                cell_entropy.len(),
                grid.cell_count()
            )));
        }
        let total_entropy = neumaier_sum(&cell_entropy);
        Ok(Self {
            grid,
            isovalue,
            model,
            cell_entropy,
            total_entropy,
            entropy_seconds: 0.0,
        })
    }

    /// Vertex grid the cells were built on.
    pub fn grid(&self) -> GridDims {
        self.grid
    }

    /// Cells per axis (z pinned to 1 for 2D).
    pub fn cell_dims(&self) -> [usize; 3] {
        self.grid.cell_extents()
    }

    pub fn is_2d(&self) -> bool {
        self.grid.is_2d()
    }

    pub fn isovalue(&self) -> f64 {
        self.isovalue
    }

    pub fn model(&self) -> Option<ModelKind> {
        self.model
    }

    pub fn cell_entropy(&self) -> &[f64] {
        &self.cell_entropy
    }

    pub fn total_entropy(&self) -> f64 {
        self.total_entropy
    }

    pub fn entropy_seconds(&self) -> f64 {
        self.entropy_seconds
    }

    /// `log2` of the case count: 4 bits in 2D, 8 in 3D.
    pub fn max_bits(&self) -> f64 {
        self.grid.cell_vertex_count() as f64
    }
}

/// Entropy of every cell from per-vertex `D⁺` values.
///
/// Cells are processed in parallel one row at a time; every cell writes its
/// own slot and the total is a compensated sum in cell order, so the result
/// does not depend on the thread count.
pub fn entropy_from_sign_probs(
    dims: GridDims,
    dplus: &[f64],
    isovalue: f64,
    model: Option<ModelKind>,
) -> Result<EntropyField> {
    if dplus.len() != dims.vertex_count() {
        return Err(Error::Invalid(format!(
            "{} vertex probabilities for a grid of {} vertices",
            dplus.len(),
            dims.vertex_count()
        )));
    }
    if let Some((vertex, &value)) = dplus
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(Error::Probability { vertex, value });
    }
    let [cx, cy, _] = dims.cell_extents();
    let n = dims.cell_vertex_count();
    let cases = 1 << n;
    let mut cells = vec![0.0; dims.cell_count()];
    cells.par_chunks_mut(cx).enumerate().for_each(|(row, out)| {
        let (j, k) = (row % cy, row / cy);
        let mut local = [0.0; 8];
        let mut probs = [0.0; MAX_CASES];
        for (i, slot) in out.iter_mut().enumerate() {
            let (verts, _) = cell_vertices(dims, i, j, k);
            for v in 0..n {
                local[v] = dplus[verts[v]];
            }
            expand_cases(&local[..n], &mut probs[..cases]);
            *slot = entropy_bits(&probs[..cases]);
        }
    });
    EntropyField::from_cells(dims, isovalue, model, cells)
}

/// Evaluates `D⁺` once per vertex, then the entropy of every cell.
pub fn entropy_field(models: &ModelField, isovalue: f64) -> Result<EntropyField> {
    let start = Instant::now();
    let dplus = models.sign_probs_above(isovalue);
    let mut field = entropy_from_sign_probs(models.dims(), &dplus, isovalue, Some(models.kind()))?;
    field.entropy_seconds = start.elapsed().as_secs_f64();
    Ok(field)
}

/// Fits `kind` once and evaluates every isovalue in order.
pub fn entropy_field_sweep(
    field: &EnsembleField,
    kind: ModelKind,
    isovalues: &[f64],
) -> Result<Vec<EntropyField>> {
    if isovalues.is_empty() {
        return Err(Error::Invalid("isovalue list is empty".into()));
    }
    let models = fit_model(field, kind)?;
    isovalues
        .iter()
        .map(|&k| entropy_field(&models, k))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct EntropySidecar {
    cell_dims: [usize; 3],
    grid_dims: [usize; 3],
    isovalue: f64,
    #[serde(default)]
    model: Option<String>,
    total_entropy_bits: String,
    dtype: String,
    order: String,
    data: String,
}

/// Sidecar path for an entropy data file: `<data>.json`.
pub fn sidecar_path(data_path: &Path) -> std::path::PathBuf {
    let mut s = data_path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Writes the cell entropies as raw float32 to `data_path` and a JSON sidecar
/// next to it. The total is recorded as a decimal string at full precision.
pub fn write_entropy_field(field: &EntropyField, data_path: impl AsRef<Path>) -> Result<()> {
    let path = data_path.as_ref();
    let data = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Invalid(format!("bad output path {}", path.display())))?
        .to_owned();
    let sidecar = EntropySidecar {
        cell_dims: field.cell_dims(),
        grid_dims: field.grid.as_array(),
        isovalue: field.isovalue,
        model: field.model.map(|m| m.to_string()),
        total_entropy_bits: field.total_entropy.to_string(),
        dtype: crate::ensemble::DTYPE_F32.into(),
        order: crate::ensemble::ORDER_X_FASTEST.into(),
        data,
    };
    let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    text.push('\n');
    write_atomic(path, &f32_bytes(field.cell_entropy.iter().copied()))?;
    write_atomic(&sidecar_path(path), text.as_bytes())
}

/// Reads an entropy field back from its sidecar. Cell values come back at
/// float32 precision; the total is taken from the sidecar.
pub fn read_entropy_field(sidecar: impl AsRef<Path>) -> Result<EntropyField> {
    let path = sidecar.as_ref();
    let meta: EntropySidecar = read_manifest(path)?;
    let grid = GridDims::try_from(meta.grid_dims)?;
    if grid.cell_extents() != meta.cell_dims {
        return Err(Error::Invalid(format!(
            "{}: cell_dims {:?} inconsistent with grid {grid}",
            path.display(),
            meta.cell_dims
        )));
    }
    let cells = read_f32_file(&resolve(path, &meta.data), grid.cell_count())?;
    let model = meta.model.as_deref().map(str::parse).transpose()?;
    let total: f64 = meta
        .total_entropy_bits
        .parse()
        .map_err(|_| Error::Invalid(format!("{}: bad total_entropy_bits", path.display())))?;
    let mut field = EntropyField::from_cells(grid, meta.isovalue, model, cells)?;
    field.total_entropy = total;
    Ok(field)
}
