use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex counts of a uniform grid. `nz == 1` marks a 2D field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct GridDims {
    nx: usize,
    ny: usize,
    nz: usize,
}

impl GridDims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        let reason = if nx < 2 || ny < 2 {
            Some("nx and ny must be at least 2")
        } else if nz < 1 {
            Some("nz must be at least 1")
        } else if nx.checked_mul(ny).and_then(|v| v.checked_mul(nz)).is_none() {
            Some("vertex count overflows")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::Dims { nx, ny, nz, reason }),
            None => Ok(Self { nx, ny, nz }),
        }
    }

    pub fn new_2d(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, 1)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn is_2d(&self) -> bool {
        self.nz == 1
    }

    pub fn vertex_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Cells per axis: `(nx-1, ny-1, nz-1)`, with the z count pinned to 1 in 2D.
    pub fn cell_extents(&self) -> [usize; 3] {
        [
            self.nx - 1,
            self.ny - 1,
            if self.is_2d() { 1 } else { self.nz - 1 },
        ]
    }

    pub fn cell_count(&self) -> usize {
        let [cx, cy, cz] = self.cell_extents();
        cx * cy * cz
    }

    /// Vertices per cell: 4 in 2D, 8 in 3D.
    pub fn cell_vertex_count(&self) -> usize {
        if self.is_2d() {
            4
        } else {
            8
        }
    }

    /// Linear index of vertex `(i, j, k)`, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Inverse of [`GridDims::index`].
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let i = index % self.nx;
        let j = (index / self.nx) % self.ny;
        let k = index / (self.nx * self.ny);
        (i, j, k)
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }
}

impl TryFrom<[usize; 3]> for GridDims {
    type Error = Error;

    fn try_from([nx, ny, nz]: [usize; 3]) -> Result<Self> {
        Self::new(nx, ny, nz)
    }
}

impl From<GridDims> for [usize; 3] {
    fn from(d: GridDims) -> Self {
        d.as_array()
    }
}

impl std::fmt::Display for GridDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}
