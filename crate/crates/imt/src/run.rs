//! Run orchestration for the CLI: executes one mode against a resolved
//! config, writes CSV artifacts plus a JSON manifest, and provides the
//! artifact comparison used by the acceptance suite.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis;
use crate::analytic;
use crate::config::{parse_quantity, Config, ConfigError, Kind};
use crate::fields::control_fields;
use crate::grid::{trapz_weight, ComplexField2D, Grid};
use crate::io::{self, IoError};
use crate::obe;
use crate::params::{Internal, ParamSet};
use crate::schrodinger;
use crate::synthetic;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("i/o failure: {0}")]
    Fs(#[from] std::io::Error),
    #[error(transparent)]
    Synthetic(#[from] synthetic::SyntheticError),
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
    #[error(transparent)]
    Solver(#[from] schrodinger::SolverError),
    #[error(transparent)]
    Obe(#[from] obe::ObeError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
    #[error(transparent)]
    Params(#[from] crate::params::ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Potentials,
    AnalyticSweep,
    Eigen,
    EvolveDsp,
    EvolveObe,
    Landscape,
    GroundState,
    Oscillation,
    Splitting,
}

impl std::str::FromStr for Mode {
    type Err = RunError;
    fn from_str(s: &str) -> Result<Self, RunError> {
        Ok(match s {
            "potentials" => Mode::Potentials,
            "analytic-sweep" => Mode::AnalyticSweep,
            "eigen" => Mode::Eigen,
            "evolve-dsp" => Mode::EvolveDsp,
            "evolve-obe" => Mode::EvolveObe,
            "landscape" => Mode::Landscape,
            "groundstate" => Mode::GroundState,
            "oscillation" => Mode::Oscillation,
            "splitting" => Mode::Splitting,
            other => return Err(RunError::UnknownMode(other.to_string())),
        })
    }
}

/// Record of one completed run: inputs, environment, and every artifact.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub toolkit_version: String,
    /// Unix seconds; the only wall-clock-dependent output of a run.
    pub timestamp: u64,
    pub mode: Mode,
    pub params_si: ParamSet,
    pub params_internal: Internal,
    pub outputs: Vec<String>,
}

struct Artifacts {
    out_dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.out_dir.join(name)
    }
}

/// Execute one mode and write its artifacts plus `manifest.json`.
pub fn run(mode: Mode, cfg: &Config, out_dir: &Path, workers: usize) -> Result<RunManifest, RunError> {
    std::fs::create_dir_all(out_dir)?;
    let params = cfg.to_params()?;
    let ip = params.internal()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool");
    let mut art = Artifacts { out_dir: out_dir.to_path_buf(), files: Vec::new() };
    pool.install(|| -> Result<(), RunError> {
        match mode {
            Mode::Potentials => mode_potentials(&ip, &mut art),
            Mode::AnalyticSweep => mode_analytic_sweep(&params, &mut art),
            Mode::Eigen => mode_eigen(&ip, &mut art),
            Mode::EvolveDsp => mode_evolve_dsp(cfg, &ip, &mut art),
            Mode::EvolveObe => mode_evolve_obe(cfg, &ip, &mut art),
            Mode::Landscape => mode_landscape(&params, &mut art),
            Mode::GroundState => mode_groundstate(&params, &mut art),
            Mode::Oscillation => mode_oscillation(cfg, &params, &mut art),
            Mode::Splitting => mode_splitting(cfg, &params, &mut art),
        }
    })?;
    let manifest = RunManifest {
        config_hash: cfg.canonical_hash(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        mode,
        params_si: params,
        params_internal: ip,
        outputs: art.files.clone(),
    };
    std::fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap())?;
    Ok(manifest)
}

fn mode_potentials(ip: &Internal, art: &mut Artifacts) -> Result<(), RunError> {
    let profile = synthetic::imt_profile(ip, 0, 50.0)?;
    let rows = profile
        .z
        .iter()
        .zip(&profile.u_m)
        .map(|(&z, u)| vec![z, synthetic::intensity_factor(ip, z), u.re, u.im])
        .collect::<Vec<_>>();
    io::write_csv(&art.path("potentials.csv"), "imt/potentials/v1", &["z_mm", "s", "re_u0", "im_u0"], rows)?;
    let cq = analytic::central_quantities(ip)?;
    io::write_summary(
        &art.path("summary.csv"),
        &[
            ("depth_re".into(), profile.depth.re),
            ("depth_im".into(), profile.depth.im),
            ("m_z_c".into(), cq.m_z_c),
            ("m_y_modulus".into(), cq.m_y_modulus),
            ("mass_angle_rad".into(), cq.theta),
        ],
    )?;
    Ok(())
}

fn mode_analytic_sweep(params: &ParamSet, art: &mut Artifacts) -> Result<(), RunError> {
    let phis: Vec<f64> = (0..=80).map(|k| 0.2 * std::f64::consts::PI * k as f64 / 80.0).collect();
    let rows: Vec<Result<Vec<f64>, RunError>> = phis
        .par_iter()
        .map(|&phi| {
            let mut p = *params;
            p.phi = phi;
            let ip = p.internal()?;
            let d0 = synthetic::trap_depth(&ip, 0);
            let hs = analytic::harmonic_solution(&ip, 0, 0)?;
            let cq = analytic::central_quantities(&ip)?;
            let k1 = 2.0 * cq.a_y_c.im;
            Ok(vec![
                phi,
                d0.re,
                d0.im,
                ip.rate_to_khz(hs.omega_m.re),
                ip.rate_to_khz(hs.omega_m.im),
                analytic::displacement_y(k1, ip.k_y),
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    io::write_csv(
        &art.path("analytic_sweep.csv"),
        "imt/analytic-sweep/v1",
        &["phi_rad", "re_d0", "im_d0", "re_omega0_khz", "im_omega0_khz", "y_mean_mm"],
        rows,
    )?;
    let ip = params.internal()?;
    let mut summary = vec![
        ("sigma_mm".to_string(), analytic::ground_width(&ip)?),
        ("chi_khz".to_string(), ip.rate_to_khz(analytic::decay_rate(&ip)?.chi)),
    ];
    if let Ok(phi_c) = analytic::critical_phase(&ip) {
        summary.push(("phi_c_rad".into(), phi_c));
    }
    io::write_summary(&art.path("summary.csv"), &summary)?;
    Ok(())
}

fn write_modes(ip: &Internal, modes: &schrodinger::ModeSet, art: &mut Artifacts) -> Result<(), RunError> {
    let grid = Grid::from_internal(ip);
    let z = grid.z_axis();
    for (idx, vec) in modes.eigenvectors.iter().enumerate() {
        let rows = z
            .iter()
            .zip(vec)
            .map(|(&zv, psi)| vec![zv, psi.re, psi.im, psi.norm_sqr()])
            .collect::<Vec<_>>();
        io::write_csv(
            &art.path(&format!("mode_{idx}.csv")),
            "imt/mode/v1",
            &["z_mm", "re_psi", "im_psi", "density"],
            rows,
        )?;
    }
    let table = modes
        .eigenvalues
        .iter()
        .zip(&modes.residuals)
        .enumerate()
        .map(|(n, (nu, r))| vec![n as f64, nu.re, nu.im, *r])
        .collect::<Vec<_>>();
    io::write_csv(
        &art.path("eigenvalues.csv"),
        "imt/eigenvalues/v1",
        &["n", "re_nu", "im_nu", "residual"],
        table,
    )?;
    Ok(())
}

fn mode_eigen(ip: &Internal, art: &mut Artifacts) -> Result<(), RunError> {
    let modes = schrodinger::eigenmodes_for(ip, 0, 2, ip.grid.nz)?;
    write_modes(ip, &modes, art)?;
    // overlap of the numerical ground mode with the analytic profile
    let grid = Grid::from_internal(ip);
    let z = grid.z_axis();
    let analytic_psi = analytic::harmonic_solution(ip, 0, 0)?.psi_sampled(&z);
    let ov = crate::grid::overlap_1d(&modes.eigenvectors[0], &analytic_psi, grid.dz);
    io::write_summary(&art.path("summary.csv"), &[("ground_overlap".into(), ov)])?;
    Ok(())
}

fn trajectory_rows(ip: &Internal, traj: &schrodinger::Trajectory) -> Vec<Vec<f64>> {
    traj.times
        .iter()
        .zip(&traj.mean_z)
        .zip(&traj.mean_y)
        .zip(&traj.norm)
        .map(|(((&t, &z), &y), &n)| vec![ip.time_to_us(t), z, y, n])
        .collect()
}

const TRAJECTORY_COLUMNS: [&str; 4] = ["t_us", "mean_z_mm", "mean_y_mm", "norm"];

fn mode_evolve_dsp(cfg: &Config, ip: &Internal, art: &mut Artifacts) -> Result<(), RunError> {
    let z0 = parse_quantity("evolution.z0", &cfg.evolution.z0, Kind::Length, 1.0)? * 1e3;
    let cf = control_fields(ip);
    let pm = synthetic::potential_map(&cf, ip)?;
    let mut state = schrodinger::coherent_state(ip, z0)?;
    let dt = ip.grid.dt;
    let steps = (ip.us_to_time(cfg.evolution.t_total_us) / dt).round() as usize;
    let every = ((ip.us_to_time(cfg.evolution.sample_every_us) / dt).round() as usize).max(1);
    let traj = schrodinger::evolve_dsp(&mut state, &pm, dt, steps, every)?;
    io::write_csv(
        &art.path("trajectory.csv"),
        "imt/trajectory/v1",
        &TRAJECTORY_COLUMNS,
        trajectory_rows(ip, &traj),
    )?;
    let times_us: Vec<f64> = traj.times.iter().map(|&t| ip.time_to_us(t)).collect();
    let mut summary = Vec::new();
    if let Ok(series) = analysis::TimeSeries::new(times_us, traj.mean_z.clone(), "mean_z") {
        if let Ok(fit) = analysis::fit_damped_cosine(&series) {
            summary.push(("f_khz".to_string(), analysis::rate_to_khz(fit.f)));
            summary.push(("kappa_khz".to_string(), analysis::rate_to_khz(fit.kappa)));
            summary.push(("fit_rms".to_string(), fit.rms_residual));
            summary.push(("fit_converged".to_string(), fit.converged as u8 as f64));
        }
    }
    io::write_summary(&art.path("summary.csv"), &summary)?;
    Ok(())
}

/// |ρ̂21(z, y≈0)|² column, for steady-profile artifacts.
fn center_column_rows(profile: &ComplexField2D) -> Vec<Vec<f64>> {
    let g = profile.grid;
    let j0 = (0..g.ny).min_by(|&a, &b| g.y(a).abs().total_cmp(&g.y(b).abs())).unwrap();
    (0..g.nz)
        .map(|i| {
            let v = profile.data[[i, j0]];
            vec![g.z(i), v.re, v.im, v.norm_sqr()]
        })
        .collect()
}

fn mode_evolve_obe(cfg: &Config, ip: &Internal, art: &mut Artifacts) -> Result<(), RunError> {
    let cf = control_fields(ip);
    let stepper = obe::ObeStepper::new(&cf, ip, ip.grid.dt);
    let mut state = obe::broad_initial_state(ip);
    let check = ((ip.us_to_time(cfg.evolution.sample_every_us) / ip.grid.dt).round() as usize).max(1);
    let (profile, steps) =
        obe::relax_to_steady_profile(&mut state, &stepper, cfg.evolution.relax_tol, check, cfg.evolution.max_steps)?;
    io::write_csv(
        &art.path("steady_profile.csv"),
        "imt/mode/v1",
        &["z_mm", "re_psi", "im_psi", "density"],
        center_column_rows(&profile),
    )?;
    io::write_snapshot(&art.path("steady_profile.snap"), &profile, state.t)?;
    let psi00 = analytic_ground_2d(ip)?;
    io::write_summary(
        &art.path("summary.csv"),
        &[
            ("relax_steps".into(), steps as f64),
            ("t_final_us".into(), ip.time_to_us(state.t)),
            ("ground_overlap".into(), crate::grid::overlap(&profile, &psi00)),
        ],
    )?;
    Ok(())
}

/// Analytic ground state on the 2D grid: ψ00(z)·cos(k_y y/2), normalized.
pub fn analytic_ground_2d(ip: &Internal) -> Result<ComplexField2D, RunError> {
    let hs = analytic::harmonic_solution(ip, 0, 0)?;
    let grid = Grid::from_internal(ip);
    let mut f = ComplexField2D::from_fn(grid, |z, y| {
        hs.psi_unnormalized(z) * (ip.k_y * y / 2.0).cos()
    });
    let n = f.norm_sq().sqrt();
    f.scale(C64::new(1.0 / n, 0.0));
    Ok(f)
}

fn mode_landscape(params: &ParamSet, art: &mut Artifacts) -> Result<(), RunError> {
    let cases: Vec<(f64, f64)> = [-0.25, 0.25]
        .iter()
        .flat_map(|&a| [-1.0, 0.0, 1.0].iter().map(move |&d| (a, d)))
        .collect();
    let blocks: Vec<Result<Vec<Vec<f64>>, RunError>> = cases
        .par_iter()
        .map(|&(alpha, dp_gamma)| {
            let mut p = *params;
            p.alpha = alpha;
            p.delta_p = dp_gamma * p.gamma;
            let ip = p.internal()?;
            let profile = synthetic::imt_profile(&ip, 0, 50.0)?;
            Ok(profile
                .z
                .iter()
                .zip(&profile.u_m)
                .map(|(&z, u)| vec![alpha, dp_gamma, z, u.re, u.im])
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for block in blocks {
        rows.extend(block?);
    }
    io::write_csv(
        &art.path("landscape.csv"),
        "imt/landscape/v1",
        &["alpha", "delta_p_gamma", "z_mm", "re_u0", "im_u0"],
        rows,
    )?;
    Ok(())
}

fn mode_groundstate(params: &ParamSet, art: &mut Artifacts) -> Result<(), RunError> {
    // σ(Δp) and χ(Δp) table, plus ground/excited mode profiles at Δp = 0
    let detunings = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let rows: Vec<Result<Vec<f64>, RunError>> = detunings
        .par_iter()
        .map(|&d| {
            let mut p = *params;
            p.delta_p = d * p.gamma;
            let ip = p.internal()?;
            let sigma = analytic::ground_width(&ip)?;
            let chi = analytic::decay_rate(&ip)?.chi;
            let modes = schrodinger::eigenmodes_for(&ip, 0, 1, 512)?;
            let grid_z: Vec<f64> = (0..512)
                .map(|i| -ip.grid.z_half_extent + 2.0 * ip.grid.z_half_extent * i as f64 / 511.0)
                .collect();
            let density: Vec<f64> = modes.eigenvectors[0].iter().map(|v| v.norm_sqr()).collect();
            let sigma_eigen = analysis::half_width(&grid_z, &density)?;
            Ok(vec![d, sigma, sigma_eigen, ip.rate_to_khz(chi)])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    io::write_csv(
        &art.path("widths.csv"),
        "imt/widths/v1",
        &["delta_p_gamma", "sigma_mm", "sigma_eigen_mm", "chi_khz"],
        rows,
    )?;
    let ip = params.internal()?;
    let modes = schrodinger::eigenmodes_for(&ip, 0, 2, ip.grid.nz)?;
    write_modes(&ip, &modes, art)?;
    Ok(())
}

fn mode_oscillation(cfg: &Config, params: &ParamSet, art: &mut Artifacts) -> Result<(), RunError> {
    let detunings = [1.0, 2.0];
    let results: Vec<Result<(Vec<Vec<f64>>, Vec<(String, f64)>), RunError>> = detunings
        .par_iter()
        .map(|&d| {
            let mut p = *params;
            p.delta_p = d * p.gamma;
            let ip = p.internal()?;
            let z0 = parse_quantity("evolution.z0", &cfg.evolution.z0, Kind::Length, 1.0)? * 1e3;
            let cf = control_fields(&ip);
            let pm = synthetic::potential_map(&cf, &ip)?;
            let mut state = schrodinger::coherent_state(&ip, z0)?;
            let dt = ip.grid.dt;
            let steps = (ip.us_to_time(cfg.evolution.t_total_us) / dt).round() as usize;
            let every = ((ip.us_to_time(cfg.evolution.sample_every_us) / dt).round() as usize).max(1);
            let traj = schrodinger::evolve_dsp(&mut state, &pm, dt, steps, every)?;
            let times_us: Vec<f64> = traj.times.iter().map(|&t| ip.time_to_us(t)).collect();
            let series = analysis::TimeSeries::new(times_us, traj.mean_z.clone(), "mean_z")?;
            let fit = analysis::fit_damped_cosine(&series)?;
            let summary = vec![
                (format!("f_khz_dp{d}"), analysis::rate_to_khz(fit.f)),
                (format!("kappa_khz_dp{d}"), analysis::rate_to_khz(fit.kappa)),
            ];
            Ok((trajectory_rows(&ip, &traj), summary))
        })
        .collect();
    let mut summary = Vec::new();
    for (d, res) in detunings.iter().zip(results) {
        let (rows, fit_summary) = res?;
        io::write_csv(
            &art.path(&format!("trajectory_dp{d}.csv")),
            "imt/trajectory/v1",
            &TRAJECTORY_COLUMNS,
            rows,
        )?;
        summary.extend(fit_summary);
    }
    io::write_summary(&art.path("summary.csv"), &summary)?;
    Ok(())
}

fn mode_splitting(cfg: &Config, params: &ParamSet, art: &mut Artifacts) -> Result<(), RunError> {
    let phis = [0.0, 0.02, 0.06, 0.10, 0.12, 0.15];
    let results: Vec<Result<Vec<f64>, RunError>> = phis
        .par_iter()
        .map(|&phi_pi| {
            let mut p = *params;
            p.phi = phi_pi * std::f64::consts::PI;
            let ip = p.internal()?;
            let cf = control_fields(&ip);
            let pm = synthetic::potential_map(&cf, &ip)?;
            let mut field = obe::broad_initial_state(&ip).rho21;
            let dt = ip.grid.dt;
            let check = ((ip.us_to_time(cfg.evolution.sample_every_us) / dt).round() as usize).max(1);
            schrodinger::relax_to_ground(&mut field, &pm, dt, cfg.evolution.relax_tol, check, cfg.evolution.max_steps)?;
            let y_mean = analysis::expectation_y_at_z0(&field)?;
            let cq = analytic::central_quantities(&ip)?;
            let y_pred = analytic::displacement_y(2.0 * cq.a_y_c.im, ip.k_y);
            let split = analysis::is_split(&field.density_z_profile());
            Ok(vec![phi_pi, y_mean, y_pred, split as u8 as f64])
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    io::write_csv(
        &art.path("displacement.csv"),
        "imt/displacement/v1",
        &["phi_over_pi", "y_mean_mm", "y_eq_closed_mm", "split"],
        rows,
    )?;
    let ip = params.internal()?;
    io::write_summary(
        &art.path("summary.csv"),
        &[("phi_c_rad".into(), analytic::critical_phase(&ip)?)],
    )?;
    Ok(())
}

/// Comparison report between two CSV artifacts with identical schemas.
#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub schema: String,
    pub rows: usize,
    /// Max |a−b|/max(|a|,|b|,1e−300) over all shared cells.
    pub max_relative_error: f64,
    /// L² overlap of the final column (typically a density/profile).
    pub l2_overlap: f64,
}

pub fn compare(path_a: &Path, path_b: &Path) -> Result<CompareReport, RunError> {
    let schema_of = |p: &Path| -> Result<String, RunError> {
        use std::io::BufRead;
        let f = std::fs::File::open(p).map_err(IoError::Io)?;
        let first = std::io::BufReader::new(f).lines().next().transpose().map_err(IoError::Io)?;
        first
            .and_then(|l| l.strip_prefix("# schema: ").map(str::to_string))
            .ok_or_else(|| {
                RunError::Io(IoError::Malformed { what: "csv", detail: "missing schema header".into() })
            })
    };
    let schema = schema_of(path_a)?;
    let (cols_a, rows_a) = io::read_csv(path_a, &schema)?;
    let (cols_b, rows_b) = io::read_csv(path_b, &schema)?;
    if cols_a != cols_b || rows_a.len() != rows_b.len() {
        return Err(RunError::Io(IoError::SchemaMismatch {
            expected: format!("{schema} ({} cols, {} rows)", cols_a.len(), rows_a.len()),
            found: format!("{schema} ({} cols, {} rows)", cols_b.len(), rows_b.len()),
        }));
    }
    let mut max_rel = 0.0f64;
    for (ra, rb) in rows_a.iter().zip(&rows_b) {
        for (a, b) in ra.iter().zip(rb) {
            let denom = a.abs().max(b.abs()).max(1e-300);
            max_rel = max_rel.max((a - b).abs() / denom);
        }
    }
    let last = cols_a.len() - 1;
    let va: Vec<f64> = rows_a.iter().map(|r| r[last]).collect();
    let vb: Vec<f64> = rows_b.iter().map(|r| r[last]).collect();
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (i, (a, b)) in va.iter().zip(&vb).enumerate() {
        let w = trapz_weight(i, va.len());
        dot += w * a * b;
        na += w * a * a;
        nb += w * b * b;
    }
    let l2 = if na > 0.0 && nb > 0.0 { dot.abs() / (na * nb).sqrt() } else { 1.0 };
    Ok(CompareReport { schema, rows: rows_a.len(), max_relative_error: max_rel, l2_overlap: l2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    fn out_dir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("imt-run-tests").join(name);
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn potentials_mode_writes_artifacts() {
        let mut cfg = preset("landscape").unwrap();
        // Δp > 0: Re U0 is a genuine (convex) well; at Δp = 0 it vanishes
        cfg.apply_override("physics.delta_p=1.0 Gamma").unwrap();
        let dir = out_dir("potentials");
        let manifest = run(Mode::Potentials, &cfg, &dir, 1).unwrap();
        assert!(manifest.outputs.contains(&"potentials.csv".to_string()));
        for f in &manifest.outputs {
            assert!(dir.join(f).exists(), "{f} listed but missing");
        }
        assert!(dir.join("manifest.json").exists());
        let (_, rows) = io::read_csv(&dir.join("potentials.csv"), "imt/potentials/v1").unwrap();
        assert_eq!(rows.len(), cfg.to_params().unwrap().grid.nz);
        // α < 0, Δp = 0: convex real part (edges above center), Im U0 < 0 at edges
        let center = rows.len() / 2;
        assert!(rows[0][2] > rows[center][2]);
        assert!(rows[0][3] < rows[center][3]);
    }

    #[test]
    fn analytic_sweep_crosses_critical_phase() {
        let cfg = preset("splitting").unwrap();
        let dir = out_dir("sweep");
        run(Mode::AnalyticSweep, &cfg, &dir, 2).unwrap();
        let (_, rows) = io::read_csv(&dir.join("analytic_sweep.csv"), "imt/analytic-sweep/v1").unwrap();
        // Im[D0] must change sign once within the sweep, near 0.12π
        let crossing = rows.windows(2).find(|w| w[0][2].signum() != w[1][2].signum()).unwrap();
        let phi_cross = crossing[0][0];
        assert!((phi_cross / std::f64::consts::PI - 0.12).abs() < 0.01, "crossing at {phi_cross}");
    }

    #[test]
    fn identical_runs_are_byte_identical_and_compare_clean() {
        let cfg = preset("landscape").unwrap();
        let (da, db) = (out_dir("det-a"), out_dir("det-b"));
        run(Mode::Landscape, &cfg, &da, 2).unwrap();
        run(Mode::Landscape, &cfg, &db, 1).unwrap();
        assert_eq!(
            std::fs::read(da.join("landscape.csv")).unwrap(),
            std::fs::read(db.join("landscape.csv")).unwrap()
        );
        let report = compare(&da.join("landscape.csv"), &db.join("landscape.csv")).unwrap();
        assert_eq!(report.max_relative_error, 0.0);
        assert!((report.l2_overlap - 1.0).abs() < 1e-15);
    }

    #[test]
    fn landscape_covers_all_six_cases_in_order() {
        let cfg = preset("landscape").unwrap();
        let dir = out_dir("landscape");
        run(Mode::Landscape, &cfg, &dir, 3).unwrap();
        let (_, rows) = io::read_csv(&dir.join("landscape.csv"), "imt/landscape/v1").unwrap();
        let nz = cfg.to_params().unwrap().grid.nz;
        assert_eq!(rows.len(), 6 * nz);
        let mut seen = Vec::new();
        for chunk in rows.chunks(nz) {
            seen.push((chunk[0][0], chunk[0][1]));
        }
        assert_eq!(
            seen,
            vec![(-0.25, -1.0), (-0.25, 0.0), (-0.25, 1.0), (0.25, -1.0), (0.25, 0.0), (0.25, 1.0)]
        );
        // convexity signs: Re U0 convex (trap) for α<0, Δp>0; concave for α>0, Δp>0
        let block = |a: f64, d: f64| rows.iter().find(|r| r[0] == a && r[1] == d).is_some();
        assert!(block(-0.25, 1.0));
        let center = nz / 2;
        let re_at = |a: f64, d: f64, i: usize| {
            rows.iter().filter(|r| r[0] == a && r[1] == d).nth(i).unwrap()[3]
        };
        assert!(re_at(-0.25, 1.0, 0) > re_at(-0.25, 1.0, center));
        assert!(re_at(0.25, 1.0, 0) < re_at(0.25, 1.0, center));
    }

    #[test]
    fn eigen_mode_writes_modes_with_overlap() {
        let mut cfg = preset("groundstate").unwrap();
        cfg.apply_override("grid.nz=256").unwrap();
        let dir = out_dir("eigen");
        run(Mode::Eigen, &cfg, &dir, 1).unwrap();
        let summary = io::read_summary(&dir.join("summary.csv")).unwrap();
        let ov = summary.iter().find(|(n, _)| n == "ground_overlap").unwrap().1;
        assert!(ov >= 0.99, "ground overlap {ov}");
        assert!(dir.join("mode_0.csv").exists() && dir.join("mode_1.csv").exists());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = preset("landscape").unwrap();
        cfg.physics.alpha = -1.5;
        let err = run(Mode::Potentials, &cfg, &out_dir("invalid"), 1);
        assert!(matches!(err, Err(RunError::Config(_))));
    }

    #[test]
    fn compare_rejects_schema_mismatch() {
        let dir = out_dir("mismatch");
        std::fs::create_dir_all(&dir).unwrap();
        let a = dir.join("a.csv");
        let b = dir.join("b.csv");
        io::write_csv(&a, "imt/x/v1", &["c"], vec![vec![1.0]]).unwrap();
        io::write_csv(&b, "imt/y/v1", &["c"], vec![vec![1.0]]).unwrap();
        assert!(compare(&a, &b).is_err());
    }
}
