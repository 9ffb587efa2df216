//! Synthetic masses, gauge potentials, the scalar potential, the
//! inhomogeneous mass trap (IMT) profile U_m(z), and the trap depth D_m.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fields::ControlFieldPair;
use crate::grid::{ComplexField2D, Grid};
use crate::params::Internal;

const I: C64 = C64::new(0.0, 1.0);

/// Floor on |V_F + V_B| below which the effective masses are treated as
/// singular, in units of Γ·mm.
pub const DEFAULT_VELOCITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("singular mass: |V_F + V_B| = {value:.3e} below floor {floor:.3e} at grid point ({i}, {j})")]
    SingularMass { value: f64, floor: f64, i: usize, j: usize },
    #[error("Rayleigh regime violated: L_r/L = {ratio:.2} below threshold {threshold}")]
    RegimeViolation { ratio: f64, threshold: f64 },
}

/// All potential fields entering the gauge-coupled Schrödinger equation,
/// evaluated pointwise from the control fields. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PotentialMap {
    /// Effective longitudinal mass M_z = k_p/(V_F + V_B). Real in exact
    /// arithmetic; stored complex.
    pub m_z: ComplexField2D,
    /// Effective transverse mass M_y = η/(2(2Δp - iΓ)(V_F + V_B)).
    pub m_y: ComplexField2D,
    /// Synthetic vector potential components.
    pub a_z: ComplexField2D,
    pub a_y: ComplexField2D,
    /// Synthetic scalar potential.
    pub u: ComplexField2D,
    /// Group velocities V_{F,B} = |Ω_c^{F,B}|²/(2η).
    pub v_f: ComplexField2D,
    pub v_b: ComplexField2D,
}

/// Centered finite differences on the interior, one-sided at the edges.
fn derivative(f: &ComplexField2D, axis: usize) -> ComplexField2D {
    let g = f.grid;
    let (n, h) = if axis == 0 { (g.nz, g.dz) } else { (g.ny, g.dy) };
    let mut out = ComplexField2D::zeros(g);
    let idx = |k: usize, i: usize, j: usize| if axis == 0 { [k, j] } else { [i, k] };
    for i in 0..g.nz {
        for j in 0..g.ny {
            let k = if axis == 0 { i } else { j };
            let d = if k == 0 {
                (f.data[idx(1, i, j)] - f.data[idx(0, i, j)]) / h
            } else if k + 1 == n {
                (f.data[idx(n - 1, i, j)] - f.data[idx(n - 2, i, j)]) / h
            } else {
                (f.data[idx(k + 1, i, j)] - f.data[idx(k - 1, i, j)]) / (2.0 * h)
            };
            out.data[[i, j]] = d;
        }
    }
    out
}

/// Evaluate the effective masses, gauge potentials, and scalar potential on
/// the grid from the (static) control fields.
pub fn potential_map(cf: &ControlFieldPair, ip: &Internal) -> Result<PotentialMap, SyntheticError> {
    potential_map_with_floor(cf, ip, DEFAULT_VELOCITY_FLOOR)
}

pub fn potential_map_with_floor(
    cf: &ControlFieldPair,
    ip: &Internal,
    floor: f64,
) -> Result<PotentialMap, SyntheticError> {
    let grid = cf.forward.grid;
    let eta = ip.eta;
    let k_p = ip.k_p;
    let det = C64::new(2.0 * ip.delta_p, -1.0); // 2Δp - iΓ, Γ = 1

    let mut v_f = ComplexField2D::zeros(grid);
    let mut v_b = ComplexField2D::zeros(grid);
    let mut m_z = ComplexField2D::zeros(grid);
    let mut m_y = ComplexField2D::zeros(grid);
    for i in 0..grid.nz {
        for j in 0..grid.ny {
            let vf = cf.forward.data[[i, j]].norm_sqr() / (2.0 * eta);
            let vb = cf.backward.data[[i, j]].norm_sqr() / (2.0 * eta);
            let vsum = vf + vb;
            if vsum.abs() < floor {
                return Err(SyntheticError::SingularMass { value: vsum.abs(), floor, i, j });
            }
            v_f.data[[i, j]] = C64::new(vf, 0.0);
            v_b.data[[i, j]] = C64::new(vb, 0.0);
            m_z.data[[i, j]] = C64::new(k_p / vsum, 0.0);
            m_y.data[[i, j]] = eta / (2.0 * det * vsum);
        }
    }

    let df_dz = derivative(&cf.forward, 0);
    let db_dz = derivative(&cf.backward, 0);
    let df_dy = derivative(&cf.forward, 1);
    let db_dy = derivative(&cf.backward, 1);

    let mut a_z = ComplexField2D::zeros(grid);
    let mut a_y = ComplexField2D::zeros(grid);
    let mut u_first = ComplexField2D::zeros(grid);
    for i in 0..grid.nz {
        for j in 0..grid.ny {
            let f = cf.forward.data[[i, j]];
            let b = cf.backward.data[[i, j]];
            a_z.data[[i, j]] = I * m_z.data[[i, j]] / (2.0 * eta * k_p)
                * (f.conj() * df_dz.data[[i, j]] + b.conj() * db_dz.data[[i, j]]);
            a_y.data[[i, j]] =
                m_y.data[[i, j]] * (v_b.data[[i, j]] - v_f.data[[i, j]]);
            u_first.data[[i, j]] = I / (2.0 * eta)
                * (b.conj() * db_dy.data[[i, j]] - f.conj() * df_dy.data[[i, j]]);
        }
    }

    let daz_dz = derivative(&a_z, 0);
    let day_dy = derivative(&a_y, 1);
    let mut u = ComplexField2D::zeros(grid);
    for i in 0..grid.nz {
        for j in 0..grid.ny {
            let mz = m_z.data[[i, j]];
            let my = m_y.data[[i, j]];
            let az = a_z.data[[i, j]];
            let ay = a_y.data[[i, j]];
            u.data[[i, j]] = u_first.data[[i, j]] - az * az / (2.0 * mz) - ay * ay / (2.0 * my)
                + daz_dz.data[[i, j]] / (2.0 * I * mz)
                + day_dy.data[[i, j]] / (2.0 * I * my);
        }
    }

    Ok(PotentialMap { m_z, m_y, a_z, a_y, u, v_f, v_b })
}

/// Closed-form 1D quantities of the uniform-in-y reduction, valid for
/// L_r ≫ L. All in internal units.
#[derive(Debug, Clone, Copy)]
pub struct Closed1D {
    pub m_z: f64,
    pub m_y: C64,
    pub a_y: C64,
}

/// S(z) = 1 + 2α cos²φ e^{-z²/w0²} + α² e^{-2z²/w0²}, the squared relative
/// control intensity entering every 1D closed form.
pub fn intensity_factor(ip: &Internal, z: f64) -> f64 {
    let g = (-z * z / (ip.w0 * ip.w0)).exp();
    1.0 + 2.0 * ip.alpha * ip.phi.cos().powi(2) * g + ip.alpha * ip.alpha * g * g
}

pub fn closed_1d(ip: &Internal, z: f64) -> Closed1D {
    let s = intensity_factor(ip, z);
    let det = C64::new(2.0 * ip.delta_p, -1.0);
    let m_z = ip.k_p * ip.eta / (ip.omega * ip.omega * s);
    let m_y = ip.eta * m_z / (2.0 * det * ip.k_p);
    let g = (-z * z / (ip.w0 * ip.w0)).exp();
    let a_y = -2.0 * ip.alpha * m_y * ip.omega * ip.omega * ip.phi.sin().powi(2) * g / ip.eta;
    Closed1D { m_z, m_y, a_y }
}

/// The 1D IMT potential U_m(z) = (m+½)²ħ²k_y²/(2M_y(z)) − A_y(z)²/(2M_y(z)).
pub fn imt_potential_at(ip: &Internal, m: u32, z: f64) -> C64 {
    let c = closed_1d(ip, z);
    let mh = m as f64 + 0.5;
    (mh * mh * ip.k_y * ip.k_y - c.a_y * c.a_y) / (2.0 * c.m_y)
}

/// U_m sampled on the z-grid, with the analytic trap depth.
#[derive(Debug, Clone)]
pub struct ImtProfile {
    pub z: Vec<f64>,
    pub u_m: Vec<C64>,
    pub m: u32,
    /// D_m = U_m(∞) − U_m(0), from the closed form.
    pub depth: C64,
}

pub fn imt_profile(
    ip: &Internal,
    m: u32,
    regime_threshold: f64,
) -> Result<ImtProfile, SyntheticError> {
    let ratio = ip.l_r / ip.l;
    if ratio < regime_threshold {
        return Err(SyntheticError::RegimeViolation { ratio, threshold: regime_threshold });
    }
    let grid = Grid::from_internal(ip);
    let z = grid.z_axis();
    let u_m = z.iter().map(|&zv| imt_potential_at(ip, m, zv)).collect();
    Ok(ImtProfile { z, u_m, m, depth: trap_depth(ip, m) })
}

/// Trap depth D_m = U_m|_{z=∞} − U_m|_{z=0}, evaluated exactly:
///
/// D_m = −ħα[α + 2cos²φ](2Δp − iΓ)(1 + 2m)²k_y²Ω²/(4η²)
///     + ħ(2Δp + iΓ)α²Ω²sin⁴φ / ((4Δp² + Γ²)[1 + 2αcos²φ + α²]).
pub fn trap_depth(ip: &Internal, m: u32) -> C64 {
    let a = ip.alpha;
    let c2 = ip.phi.cos().powi(2);
    let s2 = ip.phi.sin().powi(2);
    let beta = 1.0 + 2.0 * a * c2 + a * a;
    let om2 = ip.omega * ip.omega;
    let mm = (1.0 + 2.0 * m as f64).powi(2);
    let det_m = C64::new(2.0 * ip.delta_p, -1.0);
    let det_p = C64::new(2.0 * ip.delta_p, 1.0);
    let denom = 4.0 * ip.delta_p * ip.delta_p + 1.0;
    -a * (a + 2.0 * c2) * det_m * mm * ip.k_y * ip.k_y * om2 / (4.0 * ip.eta * ip.eta)
        + det_p * a * a * om2 * s2 * s2 / (denom * beta)
}
