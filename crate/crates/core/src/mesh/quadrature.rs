//! Quadrature rules: weighted midpoint sums on a [`Grid`], plus a few
//! general-purpose integrators used to build tables and oracles.

use crate::error::{Error, Result};

use super::Grid;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 30)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = n * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule with `panels` equal panels of the given order.
pub fn composite_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Integrates a function with an integrable singularity at `a` using the
/// substitution `x = a + (b - a) s^q`, which removes singularities up to
/// `|x - a|^{-1 + 1/q}`.
pub fn integrate_endpoint_singular<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: f64) -> f64 {
    let len = b - a;
    composite_gauss(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let x = a + len * s.powf(q);
            f(x) * len * q * s.powf(q - 1.0)
        },
        0.0,
        1.0,
        64,
        16,
    )
}

/// `int_a^b (x + shift)^w dx` in closed form.
pub fn power_integral(a: f64, b: f64, w: f64, shift: f64) -> f64 {
    if w == -1.0 {
        ((b + shift) / (a + shift)).ln()
    } else {
        ((b + shift).powf(w + 1.0) - (a + shift).powf(w + 1.0)) / (w + 1.0)
    }
}

fn check_weight(w: f64, shift: f64) -> Result<()> {
    if shift < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "weight shift must be nonnegative, got {shift}"
        )));
    }
    if shift == 0.0 && w <= -1.0 {
        return Err(Error::InvalidArgument(format!(
            "weight x^{w} is not integrable at the origin"
        )));
    }
    Ok(())
}

/// Per-cell quadrature weights of `(x + shift)^w` for the midpoint rule.
///
/// A singular weight (`shift = 0`, `w < 0`) is integrated exactly over every
/// cell instead; the midpoint rule would only converge like `N^{-p(1+w)}`.
pub fn cell_weights(grid: &Grid, w: f64, shift: f64) -> Result<Vec<f64>> {
    check_weight(w, shift)?;
    if shift == 0.0 && w < 0.0 {
        return exact_cell_weights(grid, w, shift);
    }
    Ok(grid
        .centers()
        .iter()
        .zip(grid.faces().windows(2))
        .map(|(x, f)| (x + shift).powf(w) * (f[1] - f[0]))
        .collect())
}

/// Per-cell exact integrals `int_cell (x + shift)^w dx`.
pub fn exact_cell_weights(grid: &Grid, w: f64, shift: f64) -> Result<Vec<f64>> {
    check_weight(w, shift)?;
    Ok(grid
        .faces()
        .windows(2)
        .map(|f| power_integral(f[0], f[1], w, shift))
        .collect())
}

/// `sum_i (x_i + shift)^w u_i dx_i` (midpoint rule; see [`cell_weights`]).
pub fn weighted_integral(grid: &Grid, values: &[f64], w: f64, shift: f64) -> Result<f64> {
    if values.len() != grid.cells() {
        return Err(Error::InvalidArgument(format!(
            "{} values for a grid of {} cells",
            values.len(),
            grid.cells()
        )));
    }
    let weights = cell_weights(grid, w, shift)?;
    Ok(weights.iter().zip(values).map(|(q, u)| q * u).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 15 is integrated exactly by 8 nodes
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_matches_closed_form() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-13);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn singular_endpoint() {
        let v = integrate_endpoint_singular(|x| x.powf(-0.7), 0.0, 1.0, 8.0);
        assert!((v - 1.0 / 0.3).abs() < 1e-10, "{v}");
    }

    #[test]
    fn constants_exact() {
        let g = Grid::new(37, 2.0, 1.0).unwrap();
        let u = vec![3.0; 37];
        let v = weighted_integral(&g, &u, 0.0, 0.0).unwrap();
        assert!((v - 3.0).abs() < 1e-14);
        let g = Grid::uniform(10, 2.5).unwrap();
        let v = weighted_integral(&g, &[1.0; 10], 0.0, 0.0).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn sqrt_weight_second_order() {
        let mut errs = Vec::new();
        for n in [64, 128, 256, 512] {
            let g = Grid::new(n, 2.0, 1.0).unwrap();
            let v = weighted_integral(&g, &vec![1.0; n], 0.5, 0.0).unwrap();
            errs.push((v - 2.0 / 3.0).abs());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn beta_weight_mass_of_constant() {
        let beta = -0.5;
        let g = Grid::new(400, 2.0, 2.0).unwrap();
        let v = weighted_integral(&g, &vec![1.5; 400], beta, 0.0).unwrap();
        let exact = 1.5 * 2f64.powf(beta + 1.0) / (beta + 1.0);
        assert!((v - exact).abs() < 1e-4 * exact, "{v} vs {exact}");
    }

    #[test]
    fn rejects_nonintegrable_weight() {
        let g = Grid::uniform(8, 1.0).unwrap();
        assert!(weighted_integral(&g, &[1.0; 8], -1.0, 0.0).is_err());
        assert!(weighted_integral(&g, &[1.0; 8], -1.5, 0.1).is_ok());
        assert!(weighted_integral(&g, &[1.0; 7], 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_cell_weights_sum() {
        let g = Grid::new(50, 3.0, 1.0).unwrap();
        let s: f64 = exact_cell_weights(&g, 0.3, 0.0).unwrap().iter().sum();
        assert!((s - 1.0 / 1.3).abs() < 1e-14);
    }
}
