use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graded one-dimensional mesh on `[0, L]`.
///
/// Faces are `L (j/N)^p` for `j = 0..=N`; centers are arithmetic midpoints.
/// A grading exponent `p > 1` clusters cells near the degenerate end `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    faces: Vec<f64>,
    centers: Vec<f64>,
    grading_exponent: f64,
}

/// Face positions `L (j/N)^grading` without the minimum-size check of [`build_grid`].
pub fn graded_faces(cells: usize, grading_exponent: f64, length: f64) -> Vec<f64> {
    let n = cells as f64;
    (0..=cells)
        .map(|j| {
            if j == cells {
                length
            } else {
                length * (j as f64 / n).powf(grading_exponent)
            }
        })
        .collect()
}

pub fn build_grid(cells: usize, grading_exponent: f64, length: f64) -> Result<Grid> {
    Grid::new(cells, grading_exponent, length)
}

impl Grid {
    pub const MIN_CELLS: usize = 8;

    pub fn new(cells: usize, grading_exponent: f64, length: f64) -> Result<Self> {
        if cells < Self::MIN_CELLS {
            return Err(Error::TooFewCells(cells));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if !(grading_exponent >= 1.0 && grading_exponent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grading exponent must be >= 1, got {grading_exponent}"
            )));
        }
        let faces = graded_faces(cells, grading_exponent, length);
        Self::from_faces_unchecked(faces, grading_exponent)
    }

    pub fn uniform(cells: usize, length: f64) -> Result<Self> {
        Self::new(cells, 1.0, length)
    }

    fn from_faces_unchecked(faces: Vec<f64>, grading_exponent: f64) -> Result<Self> {
        if faces.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "faces must be strictly increasing (grid too fine for f64?)".into(),
            ));
        }
        let centers = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Grid {
            faces,
            centers,
            grading_exponent,
        })
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    pub fn length(&self) -> f64 {
        *self.faces.last().unwrap()
    }

    pub fn grading_exponent(&self) -> f64 {
        self.grading_exponent
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn width(&self, i: usize) -> f64 {
        self.faces[i + 1] - self.faces[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.faces.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn min_width(&self) -> f64 {
        self.widths().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Index of the cell containing `x` (clamped to the domain).
    pub fn locate(&self, x: f64) -> usize {
        let j = self.faces.partition_point(|f| *f <= x);
        j.saturating_sub(1).min(self.cells() - 1)
    }

    /// Number of cells whose centers lie in `(a, b)`.
    pub fn cells_in(&self, a: f64, b: f64) -> usize {
        self.centers.iter().filter(|c| **c > a && **c < b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_faces() {
        assert_eq!(graded_faces(4, 1.0, 1.0), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn quadratic_grading() {
        assert_eq!(
            graded_faces(4, 2.0, 1.0),
            vec![0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0]
        );
        let g = Grid::new(8, 2.0, 1.0).unwrap();
        for (j, want) in [(2, 1.0 / 16.0), (4, 0.25), (6, 9.0 / 16.0)] {
            assert_eq!(g.faces()[j], want);
        }
    }

    #[test]
    fn uniform_centers() {
        let f = graded_faces(4, 1.0, 1.0);
        let c: Vec<f64> = f.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        assert_eq!(c, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn rejects_small_or_bad() {
        assert!(matches!(Grid::new(4, 1.0, 1.0), Err(Error::TooFewCells(4))));
        assert!(Grid::new(16, 1.0, 0.0).is_err());
        assert!(Grid::new(16, 1.0, -1.0).is_err());
        assert!(Grid::new(16, 0.5, 1.0).is_err());
    }

    #[test]
    fn invariants() {
        let g = Grid::new(100, 2.5, 3.0).unwrap();
        assert_eq!(g.faces()[0], 0.0);
        assert_eq!(g.length(), 3.0);
        for i in 0..g.cells() {
            assert!(g.centers()[i] > g.faces()[i] && g.centers()[i] < g.faces()[i + 1]);
        }
        assert_eq!(g.locate(0.0), 0);
        assert_eq!(g.locate(3.0), 99);
        assert_eq!(g.locate(g.centers()[37]), 37);
    }
}
