//! Three-point finite differences on a nonuniform cell-centered grid.
//!
//! Boundary cells use mirror ghosts across the end faces (`u_ghost = u_1`
//! at `-x_1`, and likewise at `L`), which realizes `u_x = u_xxx = 0`. All
//! stencils are written in terms of differences `u_{i+1} - u_i`, so constants
//! map to exactly zero.

use super::Grid;

#[derive(Debug, Clone)]
pub struct DiffOps {
    /// Distance to the left neighbour center (ghost at the first cell).
    hl: Vec<f64>,
    /// Distance to the right neighbour center (ghost at the last cell).
    hr: Vec<f64>,
}

impl DiffOps {
    pub fn new(grid: &Grid) -> Self {
        let x = grid.centers();
        let n = x.len();
        let l = grid.length();
        let mut hl = vec![0.0; n];
        let mut hr = vec![0.0; n];
        for i in 0..n {
            hl[i] = if i == 0 { 2.0 * x[0] } else { x[i] - x[i - 1] };
            hr[i] = if i + 1 == n {
                2.0 * (l - x[n - 1])
            } else {
                x[i + 1] - x[i]
            };
        }
        DiffOps { hl, hr }
    }

    pub fn len(&self) -> usize {
        self.hl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hl.is_empty()
    }

    /// Left and right differences at cell `i`, zero across the mirrored ends.
    #[inline]
    fn diffs(&self, u: &[f64], i: usize) -> (f64, f64) {
        let n = u.len();
        let dl = if i == 0 { 0.0 } else { u[i] - u[i - 1] };
        let dr = if i + 1 == n { 0.0 } else { u[i + 1] - u[i] };
        (dl, dr)
    }

    #[inline]
    pub fn d1_at(&self, u: &[f64], i: usize) -> f64 {
        let (dl, dr) = self.diffs(u, i);
        let (hl, hr) = (self.hl[i], self.hr[i]);
        (hl * hl * dr + hr * hr * dl) / (hl * hr * (hl + hr))
    }

    #[inline]
    pub fn d2_at(&self, u: &[f64], i: usize) -> f64 {
        let (dl, dr) = self.diffs(u, i);
        let (hl, hr) = (self.hl[i], self.hr[i]);
        2.0 / (hl + hr) * (dr / hr - dl / hl)
    }

    /// Second-order first derivative at every center.
    pub fn d1(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).map(|i| self.d1_at(u, i)).collect()
    }

    /// Second derivative at every center; exact for quadratics.
    pub fn d2(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).map(|i| self.d2_at(u, i)).collect()
    }

    /// `(u_{i+1} - u_i) / (x_{i+1} - x_i)` at the `N - 1` interior faces.
    pub fn face_gradient(&self, u: &[f64]) -> Vec<f64> {
        u.windows(2)
            .enumerate()
            .map(|(i, w)| (w[1] - w[0]) / self.hr[i])
            .collect()
    }

    /// Distance between centers across interior face `i + 1/2`.
    pub fn center_spacing(&self, i: usize) -> f64 {
        self.hr[i]
    }

    /// Dual cell widths `(hl + hr) / 2`; they sum to `L`.
    pub fn dual_widths(&self) -> Vec<f64> {
        self.hl
            .iter()
            .zip(&self.hr)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.centers().iter().map(|x| f(*x)).collect()
    }

    #[test]
    fn linear_and_quadratic_exact_interior() {
        let g = Grid::uniform(16, 1.0).unwrap();
        let ops = DiffOps::new(&g);
        let d1 = ops.d1(&sample(&g, |x| x));
        let d2 = ops.d2(&sample(&g, |x| x * x));
        for i in 1..15 {
            assert!((d1[i] - 1.0).abs() < 1e-12);
            assert!((d2[i] - 2.0).abs() < 1e-10);
        }
        // graded grids too
        let g = Grid::new(16, 2.0, 1.0).unwrap();
        let ops = DiffOps::new(&g);
        let d1 = ops.d1(&sample(&g, |x| 3.0 * x * x - x));
        let d2 = ops.d2(&sample(&g, |x| 3.0 * x * x - x));
        for i in 1..15 {
            let x = g.centers()[i];
            assert!((d1[i] - (6.0 * x - 1.0)).abs() < 1e-10);
            assert!((d2[i] - 6.0).abs() < 1e-8);
        }
    }

    #[test]
    fn constants_map_to_zero() {
        let g = Grid::new(20, 2.0, 1.0).unwrap();
        let ops = DiffOps::new(&g);
        let u = vec![0.37; 20];
        assert!(ops.d1(&u).iter().all(|v| *v == 0.0));
        assert!(ops.d2(&u).iter().all(|v| *v == 0.0));
        assert!(ops.face_gradient(&u).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cubic_boundary_error_is_first_order() {
        // x^3 has u_x(0) = 0; the mirror ghost leaves an O(h) error at the first cell.
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let g = Grid::uniform(n, 1.0).unwrap();
            let ops = DiffOps::new(&g);
            let d2 = ops.d2(&sample(&g, |x| x.powi(3)));
            let x0 = g.centers()[0];
            errs.push((d2[0] - 6.0 * x0).abs());
            for i in 1..n - 1 {
                let x = g.centers()[i];
                assert!((d2[i] - 6.0 * x).abs() < 1e-9);
            }
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() < 0.05, "{errs:?}");
        }
        // 3.25 h vs 3 h
        let h = 1.0 / 128.0;
        assert!((errs[2] - 0.25 * h).abs() < 1e-9);
    }

    #[test]
    fn graded_interior_second_order() {
        let mut errs = Vec::new();
        for n in [64, 128, 256, 512] {
            let g = Grid::new(n, 2.0, 1.0).unwrap();
            let ops = DiffOps::new(&g);
            let d2 = ops.d2(&sample(&g, |x| (2.0 * x).sin()));
            let e = g
                .centers()
                .iter()
                .zip(&d2)
                .filter(|(x, _)| **x > 0.1 && **x < 0.9)
                .map(|(x, d)| (d + 4.0 * (2.0 * x).sin()).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.8, "{errs:?}");
        }
    }

    #[test]
    fn face_gradient_and_dual_widths() {
        let g = Grid::new(12, 1.5, 2.0).unwrap();
        let ops = DiffOps::new(&g);
        let fg = ops.face_gradient(&sample(&g, |x| 2.0 * x + 1.0));
        assert_eq!(fg.len(), 11);
        assert!(fg.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let s: f64 = ops.dual_widths().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }
}
