//! Run configuration: a TOML document with `[initial]`, `[solver]`,
//! `[output]` and `[checks]` sections. Every field has a default, and the
//! raw text is echoed verbatim into the output metadata so a run can be
//! reproduced from its own artifacts.

use serde::Deserialize;
use vfb_core::initial::{unit_mass_amplitude, InitialData, VelocityKind};
use vfb_core::solver::SolverConfig;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub checks: ChecksSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub alpha: f64,
    /// Profile amplitude C; omitted means "normalize the continuum mass to 1".
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub velocity: VelocitySection,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection { alpha: 1.0, amplitude: None, velocity: VelocitySection::default() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VelocitySection {
    pub kind: String,
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
    /// Calibrate the bump amplitude so the *discrete* initial momentum hits
    /// this value exactly.
    pub momentum: Option<f64>,
}

impl Default for VelocitySection {
    fn default() -> Self {
        VelocitySection {
            kind: "zero".into(),
            center: 0.5,
            radius: 0.2,
            amplitude: 0.0,
            momentum: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub theta: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub rho_floor: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::default();
        SolverSection {
            n: c.n,
            dt: c.dt,
            t_end: c.t_end,
            theta: c.theta,
            picard_tol: c.picard_tol,
            picard_max: c.picard_max,
            rho_floor: c.rho_floor,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    pub eulerian_resolution: usize,
    pub plots: bool,
    /// Record every k-th accepted step in diagnostics.csv (1 = all).
    pub record_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "out".into(),
            snapshot_times: vec![],
            eulerian_resolution: 801,
            plots: false,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSection {
    pub enabled: Vec<String>,
    pub momentum_tol: f64,
    pub energy_slack: f64,
    pub metric_min: f64,
    pub metric_max: f64,
    pub endpoint_metric_tol: f64,
    pub neumann_tol: f64,
    pub kinetic_floor_tol: f64,
}

impl Default for ChecksSection {
    fn default() -> Self {
        ChecksSection {
            enabled: vec![
                "momentum".into(),
                "metric".into(),
                "neumann".into(),
                "slope".into(),
                "h_max".into(),
                "v_sup".into(),
            ],
            momentum_tol: 1e-10,
            energy_slack: 1e-12,
            metric_min: 0.1,
            metric_max: 10.0,
            endpoint_metric_tol: 5e-2,
            neumann_tol: 1e-2,
            kinetic_floor_tol: 1e-9,
        }
    }
}

pub const KNOWN_CHECKS: &[&str] =
    &["momentum", "energy", "metric", "endpoint_metric", "neumann", "slope", "kinetic_floor", "h_max", "v_sup"];

/// Parse and validate; returns the config together with the raw text for
/// the metadata echo.
pub fn load(path: &std::path::Path) -> Result<(RunConfig, String), String> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let cfg: RunConfig = toml::from_str(&raw).map_err(|e| format!("config parse error: {e}"))?;
    validate(&cfg)?;
    Ok((cfg, raw))
}

fn validate(cfg: &RunConfig) -> Result<(), String> {
    let a = cfg.initial.alpha;
    if !(a > 0.0 && a <= 1.0) {
        return Err(format!("initial.alpha must lie in (0,1], got {a}"));
    }
    if cfg.solver.n < 16 {
        return Err(format!("solver.n must be at least 16, got {}", cfg.solver.n));
    }
    if cfg.solver.dt <= 0.0 || cfg.solver.t_end < 0.0 {
        return Err("solver.dt must be positive and t_end nonnegative".into());
    }
    if !(0.5..=1.0).contains(&cfg.solver.theta) {
        return Err(format!("solver.theta must lie in [1/2,1], got {}", cfg.solver.theta));
    }
    match cfg.initial.velocity.kind.as_str() {
        "zero" | "bump" | "integral_plus_bump" => {}
        k => return Err(format!("unknown velocity.kind '{k}'")),
    }
    if cfg.initial.velocity.momentum.is_some() && cfg.initial.velocity.kind == "zero" {
        return Err("velocity.momentum calibration needs a bump to scale".into());
    }
    if cfg.output.eulerian_resolution < 3 {
        return Err("output.eulerian_resolution must be at least 3".into());
    }
    if cfg.output.record_every == 0 {
        return Err("output.record_every must be positive".into());
    }
    for c in &cfg.checks.enabled {
        if !KNOWN_CHECKS.contains(&c.as_str()) {
            return Err(format!("unknown check '{c}' (known: {KNOWN_CHECKS:?})"));
        }
    }
    Ok(())
}

/// Materialize the initial data described by the config.
pub fn build_data(cfg: &RunConfig) -> InitialData {
    let alpha = cfg.initial.alpha;
    let amplitude = cfg.initial.amplitude.unwrap_or_else(|| unit_mass_amplitude(alpha));
    let grid = vfb_core::make_grid(cfg.solver.n);
    let v = &cfg.initial.velocity;
    let kind = |amp: f64| match v.kind.as_str() {
        "zero" => VelocityKind::Zero,
        "bump" => VelocityKind::Bump { center: v.center, radius: v.radius, amplitude: amp },
        "integral_plus_bump" => {
            VelocityKind::IntegralPlusBump { center: v.center, radius: v.radius, amplitude: amp }
        }
        _ => unreachable!("validated earlier"),
    };
    let data = InitialData::new(alpha, amplitude, kind(v.amplitude), grid.clone());
    if let Some(target) = v.momentum {
        // linear calibration: the discrete momentum of a bump scales with
        // its amplitude (exact for kind = bump)
        let unit = InitialData::new(alpha, amplitude, kind(1.0), grid.clone());
        let p_unit: f64 =
            (0..grid.n).map(|i| grid.quad_weight(i) * unit.rho0[i] * unit.u0[i]).sum();
        let p_base: f64 =
            (0..grid.n).map(|i| grid.quad_weight(i) * data.rho0[i] * data.u0[i]).sum();
        let p_fixed = p_base - v.amplitude * p_unit; // contribution independent of the bump
        let amp = (target - p_fixed) / p_unit;
        return InitialData::new(alpha, amplitude, kind(amp), grid);
    }
    data
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        n: cfg.solver.n,
        dt: cfg.solver.dt,
        t_end: cfg.solver.t_end,
        theta: cfg.solver.theta,
        picard_tol: cfg.solver.picard_tol,
        picard_max: cfg.solver.picard_max,
        rho_floor: cfg.solver.rho_floor,
    }
}
