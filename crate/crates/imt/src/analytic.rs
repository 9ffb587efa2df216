//! Closed-form predictions: the complex-frequency harmonic-oscillator
//! spectrum and eigenfunctions, the ground-state half width σ and decay rate
//! χ, the φ-dependent displacement ⟨y⟩, and the critical phase φ_c.
//!
//! All quantities in internal units (Γ = 1, ħ = 1, lengths in mm) unless
//! noted.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::params::Internal;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("singular denominator: 1 + 2αcos²φ + α² = {0:.3e}")]
    SingularDenominator(f64),
    #[error("no confining trap for alpha = {0} (requires alpha in (-1, 0))")]
    AlphaDomain(f64),
    #[error("no normalizable Gaussian branch: Re[M_z^c ω_m] = 0")]
    NonNormalizable,
    #[error("no splitting threshold: radicand {0:.3e} is negative")]
    NoThreshold(f64),
}

/// Floor for the denominator 1 + 2αcos²φ + α².
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Central (z = 0) effective masses and vector potential.
#[derive(Debug, Clone, Copy)]
pub struct CentralQuantities {
    /// Complex transverse mass M_y^c.
    pub m_y_c: C64,
    /// |M_y^c|.
    pub m_y_modulus: f64,
    /// Mass angle θ = cos⁻¹(2Δp/√(4Δp² + Γ²)).
    pub theta: f64,
    /// Real longitudinal mass M_z^c.
    pub m_z_c: f64,
    /// Central vector potential A_y^c.
    pub a_y_c: C64,
}

fn beta(ip: &Internal) -> f64 {
    1.0 + 2.0 * ip.alpha * ip.phi.cos().powi(2) + ip.alpha * ip.alpha
}

pub fn central_quantities(ip: &Internal) -> Result<CentralQuantities, AnalyticError> {
    let b = beta(ip);
    if b <= DENOMINATOR_FLOOR {
        return Err(AnalyticError::SingularDenominator(b));
    }
    let om2 = ip.omega * ip.omega;
    let d2 = 4.0 * ip.delta_p * ip.delta_p + 1.0;
    let det_p = C64::new(2.0 * ip.delta_p, 1.0);
    let m_y_c = ip.eta * ip.eta * det_p / (2.0 * om2 * b * d2);
    let m_z_c = ip.k_p * ip.eta / (om2 * b);
    let a_y_c = -ip.alpha * ip.eta * det_p * ip.phi.sin().powi(2) / (b * d2);
    Ok(CentralQuantities {
        m_y_c,
        m_y_modulus: ip.eta * ip.eta / (2.0 * om2 * b * d2.sqrt()),
        theta: (2.0 * ip.delta_p / d2.sqrt()).acos(),
        m_z_c,
        a_y_c,
    })
}

/// Spectrum and eigenfunctions of the quadratic expansion of U_m(z) around
/// z = 0: a harmonic oscillator with complex frequency ω_m.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicSolution {
    pub n: u32,
    pub m: u32,
    /// Complex trap frequency ω_m.
    pub omega_m: C64,
    /// Offset δ_m; eigenvalues are ν_nm = δ_m + (n + ½)ω_m.
    pub delta_m: C64,
    pub nu_nm: C64,
    /// M_z^c ω_m, the complex Gaussian exponent scale (Re > 0).
    pub exponent_scale: C64,
}

impl HarmonicSolution {
    /// ψ_nm(z) up to normalization: H_n(√(M_z^c ω_m) z) exp(−M_z^c ω_m z²/2).
    pub fn psi_unnormalized(&self, z: f64) -> C64 {
        let s = self.exponent_scale;
        let x = s.sqrt() * z;
        hermite(self.n, x) * (-s * z * z / 2.0).exp()
    }

    /// ψ_nm sampled on `zs` and normalized so ∫|ψ|²dz = 1 (trapezoid rule,
    /// uniform spacing assumed).
    pub fn psi_sampled(&self, zs: &[f64]) -> Vec<C64> {
        let mut psi: Vec<C64> = zs.iter().map(|&z| self.psi_unnormalized(z)).collect();
        let dz = zs[1] - zs[0];
        let norm: f64 = psi
            .iter()
            .enumerate()
            .map(|(i, v)| crate::grid::trapz_weight(i, psi.len()) * v.norm_sqr())
            .sum::<f64>()
            * dz;
        let c = 1.0 / norm.sqrt();
        psi.iter_mut().for_each(|v| *v *= c);
        psi
    }
}

/// Physicists' Hermite polynomial H_n at complex argument, by the three-term
/// recurrence. Stable for the small n used here.
pub fn hermite(n: u32, x: C64) -> C64 {
    match n {
        0 => C64::new(1.0, 0.0),
        1 => 2.0 * x,
        _ => {
            let mut hm = C64::new(1.0, 0.0);
            let mut h = 2.0 * x;
            for k in 1..n {
                let next = 2.0 * x * h - 2.0 * k as f64 * hm;
                hm = h;
                h = next;
            }
            h
        }
    }
}

pub fn harmonic_solution(ip: &Internal, n: u32, m: u32) -> Result<HarmonicSolution, AnalyticError> {
    if !(ip.alpha > -1.0 && ip.alpha < 0.0) {
        return Err(AnalyticError::AlphaDomain(ip.alpha));
    }
    let cq = central_quantities(ip)?;
    let b = beta(ip);
    let mh = m as f64 + 0.5;
    let c2 = ip.phi.cos().powi(2);
    let denom = cq.m_y_c * cq.m_z_c * ip.w0 * ip.w0 * b;
    let omega_sq = mh * mh * 2.0 * ip.k_y * ip.k_y * (-ip.alpha) * (ip.alpha + c2) / denom
        + 2.0 * cq.a_y_c * cq.a_y_c * (1.0 + ip.alpha * c2) / denom;
    // branch with Re[M_z^c ω_m] > 0 so the Gaussian decays
    let mut omega_m = omega_sq.sqrt();
    if (cq.m_z_c * omega_m).re < 0.0 {
        omega_m = -omega_m;
    }
    let scale = cq.m_z_c * omega_m;
    if scale.re <= 0.0 {
        return Err(AnalyticError::NonNormalizable);
    }
    let delta_m = mh * mh * ip.k_y * ip.k_y / (2.0 * cq.m_y_c)
        - cq.a_y_c * cq.a_y_c / (2.0 * cq.m_y_c);
    Ok(HarmonicSolution {
        n,
        m,
        omega_m,
        delta_m,
        nu_nm: delta_m + (n as f64 + 0.5) * omega_m,
        exponent_scale: scale,
    })
}

/// Ground-state half width σ (mm), defined by |ψ00|² ∝ exp(−z²/σ²):
///
/// σ = √(w0/k_y) · [2η(1+α) / (−α k_p (2Δp + √(Γ² + 4Δp²)))]^{1/4}.
///
/// Valid for φ = 0.
pub fn ground_width(ip: &Internal) -> Result<f64, AnalyticError> {
    if ip.alpha >= 0.0 {
        return Err(AnalyticError::AlphaDomain(ip.alpha));
    }
    let root = (1.0 + 4.0 * ip.delta_p * ip.delta_p).sqrt();
    let inner =
        2.0 * ip.eta * (1.0 + ip.alpha) / (-ip.alpha * ip.k_p * (2.0 * ip.delta_p + root));
    Ok((ip.w0 / ip.k_y).sqrt() * inner.powf(0.25))
}

/// Decay rate χ of the ground-state density |ψ00|² ∝ exp(−z²/σ² − χt), with a
/// breakdown into its two closed-form terms. Valid for φ = 0.
#[derive(Debug, Clone, Copy)]
pub struct DecayRate {
    pub chi: f64,
    /// Γ k_y² Ω² (1+α)² / (2η²) — detuning-independent.
    pub term1: f64,
    /// k_y Γ Ω² √(−α(1+α)³) / (w0 √(2 k_p η³ (2Δp + √(Γ² + 4Δp²)))).
    pub term2: f64,
}

pub fn decay_rate(ip: &Internal) -> Result<DecayRate, AnalyticError> {
    if ip.alpha >= 0.0 {
        return Err(AnalyticError::AlphaDomain(ip.alpha));
    }
    let a = ip.alpha;
    let om2 = ip.omega * ip.omega;
    let term1 = ip.k_y * ip.k_y * om2 * (1.0 + a).powi(2) / (2.0 * ip.eta * ip.eta);
    let root = (1.0 + 4.0 * ip.delta_p * ip.delta_p).sqrt();
    let term2 = ip.k_y * om2 * (-a * (1.0 + a).powi(3)).sqrt()
        / (ip.w0
            * (2.0 * ip.k_p * ip.eta.powi(3) * (2.0 * ip.delta_p + root)).sqrt());
    Ok(DecayRate { chi: term1 + term2, term1, term2 })
}

/// φ-dependent ground-state displacement along y:
///
/// ⟨y⟩ = (3k1² + k_y²)/(k1(k1² + k_y²)) − (π/k_y) coth(πk1/k_y),
///
/// with k1 = (2/ħ) Im[A_y]. The k1 → 0 limit is handled by series expansion
/// (value 0, leading behavior (2 − π²/3) k1/k_y²).
pub fn displacement_y(k1: f64, k_y: f64) -> f64 {
    assert!(k_y > 0.0, "k_y must be positive");
    let x = std::f64::consts::PI * k1 / k_y;
    if x.abs() < 1e-4 {
        // both 1/k1 pieces cancel; expand the remainder in k1
        let r = (k1 / k_y) * (k1 / k_y);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        return k1 / (k_y * k_y) * (2.0 / (1.0 + r) - pi2 / 3.0)
            + pi2 * pi2 * k1.powi(3) / (45.0 * k_y.powi(4));
    }
    (3.0 * k1 * k1 + k_y * k_y) / (k1 * (k1 * k1 + k_y * k_y))
        - std::f64::consts::PI / k_y / x.tanh()
}

/// Critical phase φ_c at which Im[D_0] changes sign (threshold for the
/// φ-induced splitting):
///
/// φ_c = tan⁻¹ √( −(2+α)(1+α)² /
///        (1 + α(1+α)² − √(1 − 4α(2+α)(1+α)²η² / (k_y²(Γ² + 4Δp²)))) ).
pub fn critical_phase(ip: &Internal) -> Result<f64, AnalyticError> {
    if ip.alpha >= 0.0 {
        return Err(AnalyticError::AlphaDomain(ip.alpha));
    }
    let a = ip.alpha;
    let one_a2 = (1.0 + a) * (1.0 + a);
    let inner = 1.0
        - 4.0 * a * (2.0 + a) * one_a2 * ip.eta * ip.eta
            / (ip.k_y * ip.k_y * (1.0 + 4.0 * ip.delta_p * ip.delta_p));
    if inner < 0.0 {
        return Err(AnalyticError::NoThreshold(inner));
    }
    let ratio = -(2.0 + a) * one_a2 / (1.0 + a * one_a2 - inner.sqrt());
    if ratio < 0.0 {
        return Err(AnalyticError::NoThreshold(ratio));
    }
    Ok(ratio.sqrt().atan())
}
