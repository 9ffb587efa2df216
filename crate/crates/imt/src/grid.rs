//! Spatial grid and complex scalar fields sampled on it.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::params::Internal;

/// Uniform 2D grid: z ∈ [-z_half_extent, +z_half_extent], y ∈ [-L/2, +L/2].
/// Lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nz: usize,
    pub ny: usize,
    pub z_min: f64,
    pub y_min: f64,
    pub dz: f64,
    pub dy: f64,
}

impl Grid {
    /// z ∈ [−z_half_extent, +z_half_extent], y ∈ [−length/2, +length/2].
    pub fn new(nz: usize, ny: usize, z_half_extent: f64, length: f64) -> Self {
        assert!(nz >= 2 && ny >= 2);
        Grid {
            nz,
            ny,
            z_min: -z_half_extent,
            y_min: -length / 2.0,
            dz: 2.0 * z_half_extent / (nz - 1) as f64,
            dy: length / (ny - 1) as f64,
        }
    }

    pub fn from_internal(ip: &Internal) -> Self {
        let nz = ip.grid.nz;
        let ny = ip.grid.ny;
        let z_min = -ip.grid.z_half_extent;
        let y_min = -ip.l / 2.0;
        Grid {
            nz,
            ny,
            z_min,
            y_min,
            dz: 2.0 * ip.grid.z_half_extent / (nz - 1) as f64,
            dy: ip.l / (ny - 1) as f64,
        }
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy
    }

    pub fn z_axis(&self) -> Vec<f64> {
        (0..self.nz).map(|i| self.z(i)).collect()
    }

    pub fn y_axis(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Index of the grid point closest to z = 0.
    pub fn z_center_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.nz {
            if self.z(i).abs() < self.z(best).abs() {
                best = i;
            }
        }
        best
    }
}

/// A complex scalar sampled on the (z, y) grid; index order is [z, y].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub grid: Grid,
    pub data: Array2<C64>,
}

impl ComplexField2D {
    pub fn zeros(grid: Grid) -> Self {
        ComplexField2D {
            grid,
            data: Array2::zeros((grid.nz, grid.ny)),
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> C64) -> Self {
        let data = Array2::from_shape_fn((grid.nz, grid.ny), |(i, j)| f(grid.z(i), grid.y(j)));
        ComplexField2D { grid, data }
    }

    /// ∫∫ |f|² dz dy by the trapezoid rule.
    pub fn norm_sq(&self) -> f64 {
        let g = &self.grid;
        let mut total = 0.0;
        for i in 0..g.nz {
            let wz = trapz_weight(i, g.nz);
            for j in 0..g.ny {
                let wy = trapz_weight(j, g.ny);
                total += wz * wy * self.data[[i, j]].norm_sqr();
            }
        }
        total * g.dz * g.dy
    }

    pub fn scale(&mut self, c: C64) {
        self.data.mapv_inplace(|v| v * c);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// |f(z, y)|² integrated over y, as a function of z.
    pub fn density_z_profile(&self) -> Vec<f64> {
        let g = &self.grid;
        (0..g.nz)
            .map(|i| {
                (0..g.ny)
                    .map(|j| trapz_weight(j, g.ny) * self.data[[i, j]].norm_sqr())
                    .sum::<f64>()
                    * g.dy
            })
            .collect()
    }

    /// |f(z0, y)|² at the z-row closest to z = 0, as a function of y.
    pub fn density_y_slice_at_center(&self) -> Vec<f64> {
        let i0 = self.grid.z_center_index();
        (0..self.grid.ny)
            .map(|j| self.data[[i0, j]].norm_sqr())
            .collect()
    }
}

pub fn trapz_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// ∫ f dx for uniformly sampled f, trapezoid rule.
pub fn trapz(f: &[f64], dx: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    (inner + 0.5 * (f[0] + f[f.len() - 1])) * dx
}

/// L² overlap |⟨a|b⟩| / (‖a‖‖b‖) of two same-shape complex fields.
pub fn overlap(a: &ComplexField2D, b: &ComplexField2D) -> f64 {
    assert_eq!(a.grid, b.grid, "overlap requires identical grids");
    let g = &a.grid;
    let mut dot = C64::new(0.0, 0.0);
    for i in 0..g.nz {
        let wz = trapz_weight(i, g.nz);
        for j in 0..g.ny {
            let wy = trapz_weight(j, g.ny);
            dot += a.data[[i, j]].conj() * b.data[[i, j]] * wz * wy;
        }
    }
    dot.norm() * g.dz * g.dy / (a.norm_sq().sqrt() * b.norm_sq().sqrt())
}

/// L² overlap of two real 1D densities (abs of profiles), uniform grid.
pub fn overlap_1d(a: &[C64], b: &[C64], dx: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut dot = C64::new(0.0, 0.0);
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..n {
        let w = trapz_weight(i, n);
        dot += a[i].conj() * b[i] * w;
        na += a[i].norm_sqr() * w;
        nb += b[i].norm_sqr() * w;
    }
    dot.norm() * dx / ((na * dx).sqrt() * (nb * dx).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamSet;
    use approx::assert_relative_eq;

    fn grid() -> Grid {
        Grid::from_internal(&ParamSet::reference_defaults().internal().unwrap())
    }

    #[test]
    fn axes_span_expected_ranges() {
        let g = grid();
        assert_relative_eq!(g.z(0), -4.0);
        assert_relative_eq!(g.z(g.nz - 1), 4.0, max_relative = 1e-12);
        assert_relative_eq!(g.y(0), -2.5);
        assert_relative_eq!(g.y(g.ny - 1), 2.5, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_norm_matches_quadrature() {
        let g = grid();
        let f = ComplexField2D::from_fn(g, |z, y| {
            C64::new((-z * z - y * y).exp() / std::f64::consts::PI.sqrt(), 0.0)
        });
        // ∫∫ e^{-2z²-2y²}/π = 1/2 over infinite domain; grid truncates at y=±2.5.
        assert_relative_eq!(f.norm_sq(), 0.5, max_relative = 1e-4);
    }

    #[test]
    fn overlap_of_identical_fields_is_one() {
        let g = grid();
        let f = ComplexField2D::from_fn(g, |z, y| C64::new((-z * z - y * y).exp(), 0.3 * z));
        assert_relative_eq!(overlap(&f, &f), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn overlap_of_orthogonal_parity_fields_is_zero() {
        let g = grid();
        let even = ComplexField2D::from_fn(g, |z, _| C64::new((-z * z).exp(), 0.0));
        let odd = ComplexField2D::from_fn(g, |z, _| C64::new(z * (-z * z).exp(), 0.0));
        assert!(overlap(&even, &odd) < 1e-10);
    }
}
