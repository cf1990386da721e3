//! Grayscale entropy maps.
//!
//! One pixel per cell, `round(255 * min(entropy / max_bits, 1))`, written as
//! binary PGM (P5). Image row 0 is the highest cell row (max y), so the
//! picture has y pointing up.

use std::path::Path;

use crate::entropy::EntropyField;
use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Encodes one cell plane of `field` as PGM bytes. 3D fields need `z_slice`;
/// 2D fields accept `None` or `Some(0)`.
pub fn entropy_map_pgm(
    field: &EntropyField,
    z_slice: Option<usize>,
    max_bits: f64,
) -> Result<Vec<u8>> {
    if !(max_bits > 0.0 && max_bits.is_finite()) {
        return Err(Error::Invalid(format!(
            "max bits must be positive, got {max_bits}"
        )));
    }
    let [cx, cy, cz] = field.cell_dims();
    let plane = match (field.is_2d(), z_slice) {
        (true, None | Some(0)) => 0,
        (true, Some(z)) => return Err(Error::SliceOutOfRange { index: z, nz: 1 }),
        (false, None) => {
            return Err(Error::Invalid(
                "3D entropy fields need a cell slice (z=<i>) to render".into(),
            ))
        }
        (false, Some(z)) if z >= cz => return Err(Error::SliceOutOfRange { index: z, nz: cz }),
        (false, Some(z)) => z,
    };
    let cells = field.cell_entropy();
    let mut out = format!("P5\n{cx} {cy}\n255\n").into_bytes();
    out.reserve(cx * cy);
    for row in 0..cy {
        let j = cy - 1 - row;
        let start = (plane * cy + j) * cx;
        out.extend(
            cells[start..start + cx]
                .iter()
                .map(|&e| (255.0 * (e / max_bits).clamp(0.0, 1.0)).round() as u8),
        );
    }
    Ok(out)
}

pub fn render_entropy_map(
    field: &EntropyField,
    out_path: impl AsRef<Path>,
    z_slice: Option<usize>,
    max_bits: f64,
) -> Result<()> {
    let bytes = entropy_map_pgm(field, z_slice, max_bits)?;
    write_atomic(out_path.as_ref(), &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDims;

    fn pixels(pgm: &[u8]) -> (String, Vec<u8>) {
        // Header is three newline-terminated lines.
        let mut seen = 0;
        let split = pgm
            .iter()
            .position(|&b| {
                seen += (b == b'\n') as usize;
                seen == 3
            })
            .unwrap()
            + 1;
        (
            String::from_utf8(pgm[..split].to_vec()).unwrap(),
            pgm[split..].to_vec(),
        )
    }

    #[test]
    fn zero_field_is_black() {
        let dims = GridDims::new_2d(5, 4).unwrap();
        let f = EntropyField::from_cells(dims, 0.0, None, vec![0.0; 12]).unwrap();
        let pgm = entropy_map_pgm(&f, None, 4.0).unwrap();
        let (header, px) = pixels(&pgm);
        assert_eq!(header, "P5\n4 3\n255\n");
        assert!(px.iter().all(|&p| p == 0));
    }

    #[test]
    fn single_saturated_cell() {
        let dims = GridDims::new_2d(2, 2).unwrap();
        let f = EntropyField::from_cells(dims, 0.0, None, vec![4.0]).unwrap();
        let (_, px) = pixels(&entropy_map_pgm(&f, None, 4.0).unwrap());
        assert_eq!(px, [255]);
        // Values above max_bits saturate.
        let (_, px) = pixels(&entropy_map_pgm(&f, None, 2.0).unwrap());
        assert_eq!(px, [255]);
    }

    #[test]
    fn checkerboard_and_orientation() {
        let dims = GridDims::new_2d(4, 3).unwrap();
        // 3x2 cells; bottom row (j=0) is 0,4,0 and top row (j=1) is 4,0,4.
        let cells = vec![0.0, 4.0, 0.0, 4.0, 0.0, 4.0];
        let f = EntropyField::from_cells(dims, 0.0, None, cells).unwrap();
        let pgm = entropy_map_pgm(&f, None, 4.0).unwrap();
        let (_, px) = pixels(&pgm);
        assert_eq!(px, [255, 0, 255, 0, 255, 0]);
        let partial = EntropyField::from_cells(dims, 0.0, None, vec![1.0; 6]).unwrap();
        let (_, px) = pixels(&entropy_map_pgm(&partial, None, 4.0).unwrap());
        assert!(px.iter().all(|&p| p == 64));
    }

    #[test]
    fn volume_needs_slice() {
        let dims = GridDims::new(3, 3, 3).unwrap();
        let cells: Vec<f64> = (0..8).map(|c| if c < 4 { 0.0 } else { 8.0 }).collect();
        let f = EntropyField::from_cells(dims, 0.0, None, cells).unwrap();
        assert!(entropy_map_pgm(&f, None, 8.0).is_err());
        assert!(entropy_map_pgm(&f, Some(2), 8.0).is_err());
        let (header, px) = pixels(&entropy_map_pgm(&f, Some(1), 8.0).unwrap());
        assert_eq!(header, "P5\n2 2\n255\n");
        assert_eq!(px, [255; 4]);
        assert!(entropy_map_pgm(&f, Some(0), 0.0).is_err());
    }
}
