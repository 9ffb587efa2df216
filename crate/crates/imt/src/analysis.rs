//! Observables and statistical extraction: expectation values, widths,
//! decay rates, damped-cosine fitting. Pure, stateless estimators.
//!
//! Rates returned by the fitters are angular rates in the inverse time
//! units of the input series (rad per time unit). With times in μs, the
//! conventional "kHz" figure is `rate_to_khz`.

use thiserror::Error;

use crate::grid::{trapz_weight, ComplexField2D};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("field has zero (or non-finite) total norm")]
    ZeroNorm,
    #[error("time series must have strictly increasing times and finite values")]
    MalformedSeries,
    #[error("profile is multimodal; width is not defined")]
    Multimodal,
    #[error("profile has no usable central region for a width fit")]
    DegenerateProfile,
    #[error("series is degenerate (constant or too short) for a damped-cosine fit")]
    DegenerateSeries,
}

/// Angular rate in rad/μs → the conventional "kHz" figure (10³ rad/s).
pub fn rate_to_khz(rate_per_us: f64) -> f64 {
    rate_per_us * 1e3
}

/// A labelled scalar observable sampled in time.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self, AnalysisError> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(AnalysisError::MalformedSeries);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || !values.iter().all(|v| v.is_finite()) {
            return Err(AnalysisError::MalformedSeries);
        }
        Ok(TimeSeries { times, values, label: label.into() })
    }
}

/// Result of a damped-cosine fit A·e^{−κt}cos(ft) + offset.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    /// Oscillation angular frequency, rad per time unit, ≥ 0.
    pub f: f64,
    /// Decay rate, per time unit, ≥ 0 on the returned branch.
    pub kappa: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub rms_residual: f64,
    pub converged: bool,
}

fn weighted_mean(field: &ComplexField2D, axis_value: impl Fn(usize, usize) -> f64) -> Result<f64, AnalysisError> {
    let g = field.grid;
    let mut norm = 0.0;
    let mut sum = 0.0;
    for i in 0..g.nz {
        let wz = trapz_weight(i, g.nz);
        for j in 0..g.ny {
            let d = wz * trapz_weight(j, g.ny) * field.data[[i, j]].norm_sqr();
            norm += d;
            sum += d * axis_value(i, j);
        }
    }
    if !(norm.is_finite() && norm > 0.0) {
        return Err(AnalysisError::ZeroNorm);
    }
    Ok(sum / norm)
}

/// Density-weighted ⟨z⟩ over the full 2D field (trapezoid rule).
pub fn expectation_z(field: &ComplexField2D) -> Result<f64, AnalysisError> {
    let g = field.grid;
    weighted_mean(field, |i, _| g.z(i))
}

/// Density-weighted ⟨y⟩ over the full 2D field.
pub fn expectation_y(field: &ComplexField2D) -> Result<f64, AnalysisError> {
    let g = field.grid;
    weighted_mean(field, |_, j| g.y(j))
}

/// ⟨y⟩ restricted to the z = 0 row of the grid.
pub fn expectation_y_at_z0(field: &ComplexField2D) -> Result<f64, AnalysisError> {
    let g = field.grid;
    let i0 = g.z_center_index();
    let mut norm = 0.0;
    let mut sum = 0.0;
    for j in 0..g.ny {
        let d = trapz_weight(j, g.ny) * field.data[[i0, j]].norm_sqr();
        norm += d;
        sum += d * g.y(j);
    }
    if !(norm.is_finite() && norm > 0.0) {
        return Err(AnalysisError::ZeroNorm);
    }
    Ok(sum / norm)
}

/// Local maxima of a sampled density that clear `frac` of the global peak.
fn significant_maxima(density: &[f64], frac: f64) -> Vec<usize> {
    let peak = density.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for i in 1..density.len().saturating_sub(1) {
        if density[i] >= density[i - 1] && density[i] > density[i + 1] && density[i] >= frac * peak {
            // skip plateau duplicates
            if out.last().map_or(true, |&p: &usize| density[(p + 1)..i].iter().any(|&v| v < density[i])) {
                out.push(i);
            }
        }
    }
    out
}

/// Splitting detector: ≥ 2 local maxima each ≥ 20% of the global peak,
/// separated by a valley ≤ 80% of the smaller of the two.
pub fn is_split(density: &[f64]) -> bool {
    let maxima = significant_maxima(density, 0.2);
    for pair in maxima.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let smaller = density[a].min(density[b]);
        let valley = density[a + 1..b].iter().cloned().fold(f64::INFINITY, f64::min);
        if valley <= 0.8 * smaller {
            return true;
        }
    }
    false
}

/// Gaussian half width σ from a least-squares quadratic fit of log-density
/// over the central region (density ≥ 10⁻³ of peak): |ψ|² ∝ exp(−z²/σ²).
pub fn half_width(axis: &[f64], density: &[f64]) -> Result<f64, AnalysisError> {
    assert_eq!(axis.len(), density.len());
    if is_split(density) {
        return Err(AnalysisError::Multimodal);
    }
    let peak = density.iter().cloned().fold(0.0, f64::max);
    if !(peak.is_finite() && peak > 0.0) {
        return Err(AnalysisError::DegenerateProfile);
    }
    // normal equations for log d = a + b x + c x²
    let mut s = [0.0; 5]; // Σ x^k
    let mut r = [0.0; 3]; // Σ x^k log d
    let mut n = 0usize;
    // fit only the core of the peak (|x| ≲ 1.1σ for a Gaussian): the closed
    // forms describe the Gaussian core, and anharmonic tails would bias the
    // extracted width
    for (&x, &d) in axis.iter().zip(density) {
        if d >= 0.3 * peak {
            let l = d.ln();
            let mut xp = 1.0;
            for k in 0..5 {
                s[k] += xp;
                if k < 3 {
                    r[k] += xp * l;
                }
                xp *= x;
            }
            n += 1;
        }
    }
    if n < 5 {
        return Err(AnalysisError::DegenerateProfile);
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let sol = solve3(m, r).ok_or(AnalysisError::DegenerateProfile)?;
    let c = sol[2];
    if c >= 0.0 {
        return Err(AnalysisError::DegenerateProfile);
    }
    Ok((-1.0 / c).sqrt())
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut v = b[row];
        for k in row + 1..3 {
            v -= m[row][k] * x[k];
        }
        x[row] = v / m[row][row];
    }
    Some(x)
}

fn solven(m: &mut Vec<Vec<f64>>, b: &mut Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut v = b[row];
        for k in row + 1..n {
            v -= m[row][k] * x[k];
        }
        x[row] = v / m[row][row];
    }
    Some(x)
}

/// For fixed (f, κ): best (A, offset) by linear least squares, returning the
/// pair and the sum of squared residuals.
fn linear_subfit(times: &[f64], values: &[f64], f: f64, kappa: f64) -> (f64, f64, f64) {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &v) in times.iter().zip(values) {
        let basis = (-kappa * t).exp() * (f * t).cos();
        s11 += basis * basis;
        s12 += basis;
        s22 += 1.0;
        r1 += basis * v;
        r2 += v;
    }
    let det = s11 * s22 - s12 * s12;
    let (a, off) = if det.abs() > 1e-300 {
        ((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det)
    } else {
        (0.0, r2 / s22)
    };
    let mut ss = 0.0;
    for (&t, &v) in times.iter().zip(values) {
        let m = a * (-kappa * t).exp() * (f * t).cos() + off;
        ss += (m - v) * (m - v);
    }
    (a, off, ss)
}

/// Fit A·e^{−κt}cos(ft) + offset, with t measured from the first sample
/// (phase fixed to 0 there — prepared states start at rest). Frequency is
/// seeded from the dominant discrete-spectrum peak, κ from the log-envelope
/// of extrema, then a coarse grid search over (f, κ) and Gauss–Newton
/// refinement. Deterministic.
pub fn fit_damped_cosine(s: &TimeSeries) -> Result<FitResult, AnalysisError> {
    let n = s.times.len();
    if n < 20 {
        return Err(AnalysisError::DegenerateSeries);
    }
    let t_first = s.times[0];
    let times: Vec<f64> = s.times.iter().map(|t| t - t_first).collect();
    let s = &TimeSeries { times, values: s.values.clone(), label: s.label.clone() };
    let mean = s.values.iter().sum::<f64>() / n as f64;
    let spread = s.values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread == 0.0 {
        return Err(AnalysisError::DegenerateSeries);
    }
    let span = s.times[n - 1] - s.times[0];
    let dt_min = s.times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);

    // frequency seed: periodogram of the demeaned series on a fine ω grid
    let omega_max = std::f64::consts::PI / dt_min;
    let omega_min = std::f64::consts::PI / span;
    let mut f0 = omega_min;
    let mut best_pow = 0.0;
    // grid spacing must resolve the Fourier limit π/span, i.e. a few points
    // per ω_min step, or the seed can miss a slow oscillation entirely
    let ngrid = ((4.0 * omega_max / omega_min) as usize).clamp(600, 40_000);
    for k in 0..=ngrid {
        let omega = omega_min + (omega_max - omega_min) * k as f64 / ngrid as f64;
        let (mut cr, mut ci) = (0.0, 0.0);
        for (&t, &v) in s.times.iter().zip(&s.values) {
            cr += (v - mean) * (omega * t).cos();
            ci += (v - mean) * (omega * t).sin();
        }
        let pow = cr * cr + ci * ci;
        if pow > best_pow {
            best_pow = pow;
            f0 = omega;
        }
    }

    // κ seed: linear fit of log |extremum - mean| against time
    let mut ext_t = Vec::new();
    let mut ext_l = Vec::new();
    for i in 1..n - 1 {
        let a = (s.values[i - 1] - mean).abs();
        let b = (s.values[i] - mean).abs();
        let c = (s.values[i + 1] - mean).abs();
        if b >= a && b > c && b > 1e-12 * spread {
            ext_t.push(s.times[i]);
            ext_l.push(b.ln());
        }
    }
    let kappa0 = if ext_t.len() >= 2 {
        let m = ext_t.len() as f64;
        let st: f64 = ext_t.iter().sum();
        let sl: f64 = ext_l.iter().sum();
        let stt: f64 = ext_t.iter().map(|t| t * t).sum();
        let stl: f64 = ext_t.iter().zip(&ext_l).map(|(t, l)| t * l).sum();
        let slope = (m * stl - st * sl) / (m * stt - st * st);
        (-slope).max(0.0)
    } else {
        0.0
    };

    // coarse grid search around the seeds
    let mut best = (f0, kappa0, f64::INFINITY);
    for fi in -10..=10i32 {
        let f = f0 * (1.0 + 0.04 * fi as f64);
        for ki in 0..=12 {
            let kappa = if kappa0 > 0.0 {
                kappa0 * (0.4 + 0.2 * ki as f64)
            } else {
                f0 * 0.05 * ki as f64
            };
            let (_, _, ss) = linear_subfit(&s.times, &s.values, f, kappa);
            if ss < best.2 {
                best = (f, kappa, ss);
            }
        }
    }

    // Gauss–Newton on (f, κ, A, offset)
    let (mut f, mut kappa) = (best.0, best.1);
    let (mut a, mut off, mut ss) = linear_subfit(&s.times, &s.values, f, kappa);
    let mut converged = false;
    for _ in 0..60 {
        let mut jtj = vec![vec![0.0; 4]; 4];
        let mut jtr = vec![0.0; 4];
        for (&t, &v) in s.times.iter().zip(&s.values) {
            let e = (-kappa * t).exp();
            let (c, sn) = ((f * t).cos(), (f * t).sin());
            let model = a * e * c + off;
            let r = v - model;
            let jac = [-a * e * sn * t, -a * e * c * t, e * c, 1.0]; // d/df, d/dκ, d/dA, d/doff
            for p in 0..4 {
                jtr[p] += jac[p] * r;
                for q in 0..4 {
                    jtj[p][q] += jac[p] * jac[q];
                }
            }
        }
        // Levenberg damping for robustness far from the optimum
        for p in 0..4 {
            jtj[p][p] *= 1.0 + 1e-8;
        }
        let Some(step) = solven(&mut jtj, &mut jtr) else { break };
        let (nf, nk, na, noff) = (f + step[0], kappa + step[1], a + step[2], off + step[3]);
        let mut nss = 0.0;
        for (&t, &v) in s.times.iter().zip(&s.values) {
            let m = na * (-nk * t).exp() * (nf * t).cos() + noff;
            nss += (m - v) * (m - v);
        }
        if !nss.is_finite() || nss > ss * 1.000001 {
            break;
        }
        let rel = step.iter().map(|v| v.abs()).fold(0.0, f64::max) / (f.abs() + kappa.abs() + 1e-300);
        f = nf;
        kappa = nk;
        a = na;
        off = noff;
        ss = nss;
        if rel < 1e-12 {
            converged = true;
            break;
        }
    }
    // canonical branch: f ≥ 0 (cos is even), κ ≥ 0 unless genuinely growing
    f = f.abs();
    if kappa < 0.0 && kappa > -1e-9 * f {
        kappa = 0.0;
    }
    Ok(FitResult {
        f,
        kappa,
        amplitude: a,
        offset: off,
        rms_residual: (ss / n as f64).sqrt(),
        converged,
    })
}

/// Decay rate from a log-linear fit over the last half of the series.
/// Returns (rate, tail_monotone): a non-monotone tail is flagged, not fatal.
pub fn norm_decay_rate(s: &TimeSeries) -> Result<(f64, bool), AnalysisError> {
    let n = s.times.len();
    if n < 4 || s.values.iter().any(|&v| v <= 0.0) {
        return Err(AnalysisError::DegenerateSeries);
    }
    let start = n / 2;
    let t = &s.times[start..];
    let l: Vec<f64> = s.values[start..].iter().map(|v| v.ln()).collect();
    let m = t.len() as f64;
    let st: f64 = t.iter().sum();
    let sl: f64 = l.iter().sum();
    let stt: f64 = t.iter().map(|x| x * x).sum();
    let stl: f64 = t.iter().zip(&l).map(|(x, y)| x * y).sum();
    let slope = (m * stl - st * sl) / (m * stt - st * st);
    let monotone = s.values[start..].windows(2).all(|w| w[1] <= w[0]);
    Ok((-slope, monotone))
}
