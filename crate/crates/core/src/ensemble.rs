//! Ensemble scalar fields on uniform grids and the raw float32 manifest format.
//!
//! A manifest is a JSON file naming the grid shape and one raw little-endian
//! float32 file per member, x-fastest then y then z:
//!
//! ```json
//! { "name": "wind", "dims": [68, 68, 1], "dtype": "f32",
//!   "order": "x-fastest", "members": ["wind_m000.f32", "wind_m001.f32"] }
//! ```
//!
//! Member paths are resolved relative to the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDims;
use crate::io::write_atomic;

pub const DTYPE_F32: &str = "f32";
pub const ORDER_X_FASTEST: &str = "x-fastest";

/// `M >= 2` co-registered members on one grid. Values are held as `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleField {
    name: String,
    dims: GridDims,
    members: Vec<Vec<f64>>,
}

impl EnsembleField {
    pub fn new(name: impl Into<String>, dims: GridDims, members: Vec<Vec<f64>>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::TooFewMembers(members.len()));
        }
        let n = dims.vertex_count();
        for (m, values) in members.iter().enumerate() {
            if values.len() != n {
                return Err(Error::Invalid(format!(
                    "member {m} has {} values, grid {dims} needs {n}",
                    values.len()
                )));
            }
            if let Some((vertex, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite())
            {
                return Err(Error::NonFinite {
                    member: m,
                    vertex,
                    value,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            dims,
            members,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn member(&self, m: usize) -> &[f64] {
        &self.members[m]
    }

    /// Copies the `M` samples at `vertex` into `out` (cleared first).
    pub fn samples_at(&self, vertex: usize, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.members.iter().map(|m| m[vertex]));
    }

    /// Global `(min, max)` over every member and vertex.
    pub fn value_range(&self) -> (f64, f64) {
        self.members
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The 2D plane `z_index` of every member.
    pub fn slice_z(&self, z_index: usize) -> Result<Self> {
        if self.dims.is_2d() {
            return Err(Error::AlreadyTwoD);
        }
        let nz = self.dims.nz();
        if z_index >= nz {
            return Err(Error::SliceOutOfRange { index: z_index, nz });
        }
        let dims = GridDims::new_2d(self.dims.nx(), self.dims.ny())?;
        let plane = dims.vertex_count();
        let start = z_index * plane;
        let members = self
            .members
            .iter()
            .map(|m| m[start..start + plane].to_vec())
            .collect();
        Ok(Self {
            name: format!("{}_z{}", self.name, z_index),
            dims,
            members,
        })
    }

    /// Keeps every `stride`-th vertex along each axis with extent > 1.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Stride { stride, extent: 0 });
        }
        let reduce = |n: usize| -> Result<usize> {
            if n == 1 {
                return Ok(1);
            }
            let kept = n.div_ceil(stride);
            if kept < 2 {
                return Err(Error::Stride { stride, extent: n });
            }
            Ok(kept)
        };
        let src = self.dims;
        let dims = GridDims::new(reduce(src.nx())?, reduce(src.ny())?, reduce(src.nz())?)?;
        let members = self
            .members
            .iter()
            .map(|m| {
                let mut out = Vec::with_capacity(dims.vertex_count());
                for k in 0..dims.nz() {
                    for j in 0..dims.ny() {
                        for i in 0..dims.nx() {
                            out.push(m[src.index(i * stride, j * stride, k * stride)]);
                        }
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            name: format!("{}_s{}", self.name, stride),
            dims,
            members,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub name: String,
    pub dims: [usize; 3],
    pub dtype: String,
    pub order: String,
    pub members: Vec<String>,
}

pub(crate) fn read_manifest<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Manifest {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn resolve(manifest_path: &Path, rel: &str) -> PathBuf {
    manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(rel)
}

/// Reads exactly `count` little-endian float32 values.
pub(crate) fn read_f32_file(path: &Path, count: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected_bytes = count as u64 * 4;
    if bytes.len() as u64 != expected_bytes {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected: count,
            expected_bytes,
            actual_bytes: bytes.len() as u64,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

pub(crate) fn f32_bytes(values: impl IntoIterator<Item = f64>) -> Vec<u8> {
    values
        .into_iter()
        .flat_map(|v| (v as f32).to_le_bytes())
        .collect()
}

pub fn load_ensemble(manifest_path: impl AsRef<Path>) -> Result<EnsembleField> {
    let path = manifest_path.as_ref();
    let manifest: EnsembleManifest = read_manifest(path)?;
    if manifest.dtype != DTYPE_F32 {
        return Err(Error::Invalid(format!(
            "{}: unsupported dtype {:?}, expected {DTYPE_F32:?}",
            path.display(),
            manifest.dtype
        )));
    }
    if manifest.order != ORDER_X_FASTEST {
        return Err(Error::Invalid(format!(
            "{}: unsupported order {:?}, expected {ORDER_X_FASTEST:?}",
            path.display(),
            manifest.order
        )));
    }
    let dims = GridDims::try_from(manifest.dims)?;
    if manifest.members.len() < 2 {
        return Err(Error::TooFewMembers(manifest.members.len()));
    }
    let members = manifest
        .members
        .iter()
        .map(|rel| read_f32_file(&resolve(path, rel), dims.vertex_count()))
        .collect::<Result<Vec<_>>>()?;
    EnsembleField::new(manifest.name, dims, members)
}

/// Writes `field` as a manifest plus one float32 file per member, placed
/// next to the manifest and named `<stem>_m<index>.f32`.
pub fn write_ensemble(field: &EnsembleField, manifest_path: impl AsRef<Path>) -> Result<()> {
    let path = manifest_path.as_ref();
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("member")
        .to_owned();
    let digits = field.member_count().to_string().len().max(3);
    let mut names = Vec::with_capacity(field.member_count());
    for (m, values) in field.members.iter().enumerate() {
        let rel = format!("{stem}_m{m:0digits$}.f32");
        write_atomic(&resolve(path, &rel), &f32_bytes(values.iter().copied()))?;
        names.push(rel);
    }
    let manifest = EnsembleManifest {
        name: field.name.clone(),
        dims: field.dims.as_array(),
        dtype: DTYPE_F32.into(),
        order: ORDER_X_FASTEST.into(),
        members: names,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
