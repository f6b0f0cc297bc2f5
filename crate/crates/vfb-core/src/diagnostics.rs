//! Structural diagnostics on the Lagrangian solution stream.
//!
//! Everything the continuum theory conserves, dissipates, or bounds is
//! monitored as a discrete quantity:
//!
//! - mass ∫rho0, momentum ∫rho0 U and kinetic energy ∫rho0 U²/2 (the
//!   change of variables makes these the moving-domain integrals exactly);
//! - the fundamental energy ∫(rho0 U² + rho0²/eta_x) with its dissipation
//!   ∫rho0 U_x²/eta_x², and the exactly dissipated functional
//!   ∫(rho0 U²/2 + rho0²/eta_x);
//! - the Bresch-Desjardins entropy ∫(rho0 V² + rho0²/eta_x) with its
//!   dissipation ∫H_x²/eta_x, finite for alpha < 1 and flagged divergent at
//!   alpha = 1;
//! - the effective velocity V = U + H_x/rho0, its damped transport law
//!   V_t + 2H(V - U) = 0, and the closed-form weighted solution of that law;
//! - boundary behavior: the emergent Neumann residual, the slope ratio
//!   |U_x|/d, and the weighted logarithm of the metric.
//!
//! V is never evaluated at the endpoints (every estimate that involves it
//! carries a vanishing weight there); integrands that stay finite but are
//! built from V get their endpoint values by quadratic extrapolation so
//! the quadrature keeps its second-order accuracy.

use crate::grid::{self, Grid};
use crate::initial::InitialData;
use crate::solver::{self, FluidState};

/// One time-stamped row of every monitored quantity.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub kinetic_energy: f64,
    pub fundamental_energy: f64,
    pub fundamental_dissipation: f64,
    /// The exactly non-increasing functional of the backward-Euler scheme.
    pub dissipative_energy: f64,
    pub bd_entropy: f64,
    pub bd_dissipation: f64,
    /// True when alpha = 1: the continuum BD functional diverges and the
    /// value must not be used as a pass/fail monitor.
    pub bd_divergent: bool,
    pub eta_x_min: f64,
    pub eta_x_max: f64,
    pub h_max: f64,
    pub neumann_residual: f64,
    pub slope_ratio: f64,
    pub v_transport_residual: f64,
    pub v_weighted_sup: f64,
    pub log_eta_weighted: f64,
    pub e_tilde_spatial: f64,
}

/// Which algebraic route produced an effective-velocity field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VForm {
    /// V = U + H_x/rho0 with H_x by the derivative stencil of the depth.
    HxForm,
    /// V = U + (1/alpha)(phi0)_x/(phi0 eta_x) - eta_xx/eta_x².
    MetricForm,
}

/// Effective velocity samples; endpoint entries are zero placeholders and
/// must not be read (interior-only by convention).
#[derive(Debug, Clone)]
pub struct EffectiveVelocityField {
    pub v: Vec<f64>,
    pub form_used: VForm,
}

/// Effective velocity V = U + H_x/rho0 on the interior nodes.
pub fn effective_velocity(
    state: &FluidState,
    data: &InitialData,
    form: VForm,
) -> EffectiveVelocityField {
    let g = &data.grid;
    let n = g.n;
    let mut v = vec![0.0; n];
    match form {
        VForm::MetricForm => {
            let eta_xx = grid::derivative(g, &state.eta, 2);
            for i in 1..n - 1 {
                let m = state.eta_x[i];
                v[i] = state.u[i] + data.phi0_dx[0][i] / (data.alpha * data.phi0[i] * m)
                    - eta_xx[i] / (m * m);
            }
        }
        VForm::HxForm => {
            let h = solver::depth(state, data);
            let hx = grid::derivative(g, &h, 1);
            for i in 1..n - 1 {
                v[i] = state.u[i] + hx[i] / data.rho0[i];
            }
        }
    }
    EffectiveVelocityField { v, form_used: form }
}

/// (mass, momentum, kinetic energy) in Lagrangian variables.
pub fn conserved_quantities(state: &FluidState, data: &InitialData) -> (f64, f64, f64) {
    let g = &data.grid;
    let mut m = 0.0;
    let mut p = 0.0;
    let mut k = 0.0;
    for i in 0..g.n {
        let w = g.quad_weight(i) * data.rho0[i];
        m += w;
        p += w * state.u[i];
        k += 0.5 * w * state.u[i] * state.u[i];
    }
    (m, p, k)
}

/// Fundamental energy ∫(rho0 U² + rho0²/eta_x) and its dissipation rate
/// ∫rho0 U_x²/eta_x².
pub fn fundamental_energy(state: &FluidState, data: &InitialData) -> (f64, f64) {
    let g = &data.grid;
    let ux = grid::derivative(g, &state.u, 1);
    let mut e = 0.0;
    let mut d = 0.0;
    for i in 0..g.n {
        let w = g.quad_weight(i);
        let m = state.eta_x[i];
        e += w * (data.rho0[i] * state.u[i] * state.u[i]
            + data.rho0[i] * data.rho0[i] / m);
        d += w * data.rho0[i] * ux[i] * ux[i] / (m * m);
    }
    (e, d)
}

/// The exactly dissipated functional ∫(rho0 U²/2 + rho0²/eta_x), evaluated
/// with the same face metric the scheme uses.
pub fn dissipative_energy(state: &FluidState, data: &InitialData) -> f64 {
    solver::dissipative_energy(state, data)
}

/// Trapezoid with endpoint values filled by quadratic extrapolation from
/// the first three interior nodes; for integrands that are only defined
/// (or only accurate) away from the degenerate endpoints.
fn trapz_extrapolated(g: &Grid, f: &mut [f64]) -> f64 {
    let n = g.n;
    f[0] = 3.0 * f[1] - 3.0 * f[2] + f[3];
    f[n - 1] = 3.0 * f[n - 2] - 3.0 * f[n - 3] + f[n - 4];
    g.integrate(f)
}

/// BD entropy ∫(rho0 V² + rho0²/eta_x) (metric-form V) and its dissipation
/// ∫H_x²/eta_x (stencil H_x). For alpha = 1 the continuum entropy is
/// infinite; the values are still computed but must be treated as flagged.
pub fn bd_entropy(state: &FluidState, data: &InitialData) -> (f64, f64) {
    let g = &data.grid;
    let v = effective_velocity(state, data, VForm::MetricForm).v;
    let mut ev = vec![0.0; g.n];
    for i in 1..g.n - 1 {
        ev[i] = data.rho0[i] * v[i] * v[i];
    }
    let mut entropy = trapz_extrapolated(g, &mut ev);
    for i in 0..g.n {
        entropy += g.quad_weight(i) * data.rho0[i] * data.rho0[i] / state.eta_x[i];
    }
    let h = solver::depth(state, data);
    let hx = grid::derivative(g, &h, 1);
    let diss: f64 =
        (0..g.n).map(|i| g.quad_weight(i) * hx[i] * hx[i] / state.eta_x[i]).sum();
    (entropy, diss)
}

/// Residual of the exact energy balance
/// d/dt ∫(rho0 U²/2 + rho0²/eta_x) + ∫rho0 U_x²/eta_x² = 0
/// across two consecutive states, with midpoint dissipation.
pub fn energy_identity_residual(
    prev: &FluidState,
    next: &FluidState,
    data: &InitialData,
) -> f64 {
    let g = &data.grid;
    let dt = next.t - prev.t;
    let e_of = |s: &FluidState| -> f64 {
        (0..g.n)
            .map(|i| {
                g.quad_weight(i)
                    * (0.5 * data.rho0[i] * s.u[i] * s.u[i]
                        + data.rho0[i] * data.rho0[i] / s.eta_x[i])
            })
            .sum()
    };
    let d_of = |s: &FluidState| -> f64 {
        let ux = grid::derivative(g, &s.u, 1);
        (0..g.n)
            .map(|i| {
                g.quad_weight(i) * data.rho0[i] * ux[i] * ux[i] / (s.eta_x[i] * s.eta_x[i])
            })
            .sum()
    };
    (e_of(next) - e_of(prev)) / dt + 0.5 * (d_of(prev) + d_of(next))
}

/// Residual of the BD identity
/// d/dt (1/2 ∫rho0 V² + ∫eta_x H²) + 2 ∫H_x²/eta_x = 0
/// across two consecutive states, with midpoint dissipation.
pub fn bd_identity_residual(prev: &FluidState, next: &FluidState, data: &InitialData) -> f64 {
    let g = &data.grid;
    let dt = next.t - prev.t;
    let g_of = |s: &FluidState| -> f64 {
        let v = effective_velocity(s, data, VForm::MetricForm).v;
        let mut ev = vec![0.0; g.n];
        for i in 1..g.n - 1 {
            ev[i] = 0.5 * data.rho0[i] * v[i] * v[i];
        }
        let mut total = trapz_extrapolated(g, &mut ev);
        for i in 0..g.n {
            // eta_x H² = rho0²/eta_x
            total += g.quad_weight(i) * data.rho0[i] * data.rho0[i] / s.eta_x[i];
        }
        total
    };
    let d_of = |s: &FluidState| -> f64 { bd_entropy(s, data).1 };
    (g_of(next) - g_of(prev)) / dt + 0.5 * (d_of(prev) + d_of(next)) * 2.0
}

/// Max over interior nodes, weighted by rho0^alpha, of the transport-law
/// residual |(V' - V)/dt + 2 H (V - U)| with midpoint averages.
pub fn v_transport_residual(prev: &FluidState, next: &FluidState, data: &InitialData) -> f64 {
    let g = &data.grid;
    let dt = next.t - prev.t;
    let v0 = effective_velocity(prev, data, VForm::MetricForm).v;
    let v1 = effective_velocity(next, data, VForm::MetricForm).v;
    let h0 = solver::depth(prev, data);
    let h1 = solver::depth(next, data);
    let mut worst = 0.0f64;
    for i in 1..g.n - 1 {
        let h_mid = 0.5 * (h0[i] + h1[i]);
        let v_mid = 0.5 * (v0[i] + v1[i]);
        let u_mid = 0.5 * (prev.u[i] + next.u[i]);
        let r = (v1[i] - v0[i]) / dt + 2.0 * h_mid * (v_mid - u_mid);
        worst = worst.max(data.phi0[i] * r.abs());
    }
    worst
}

/// Per-step history of the fields entering the closed-form solution of the
/// transport law, recorded at a fixed set of probe nodes.
#[derive(Debug, Clone)]
pub struct ProbeHistory {
    pub probes: Vec<usize>,
    pub times: Vec<f64>,
    /// h[k][j] = depth at probe j, step k; likewise for the others.
    pub depth: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub eta_x: Vec<Vec<f64>>,
}

impl ProbeHistory {
    pub fn new(probes: Vec<usize>) -> Self {
        ProbeHistory { probes, times: Vec::new(), depth: Vec::new(), u: Vec::new(), eta_x: Vec::new() }
    }

    /// Probe indices spread over the interior for a given grid.
    pub fn default_probes(grid: &Grid) -> Vec<usize> {
        [0.125, 0.25, 0.5, 0.75, 0.875]
            .iter()
            .map(|&x| ((grid.n - 1) as f64 * x).round() as usize)
            .collect()
    }

    pub fn record(&mut self, state: &FluidState, data: &InitialData) {
        let h = solver::depth(state, data);
        self.times.push(state.t);
        self.depth.push(self.probes.iter().map(|&i| h[i]).collect());
        self.u.push(self.probes.iter().map(|&i| state.u[i]).collect());
        self.eta_x.push(self.probes.iter().map(|&i| state.eta_x[i]).collect());
    }
}

/// Right side of the closed-form weighted solution
/// rho0^{r alpha} V(t) = e^{-∫2H} (rho0^{r alpha} V(0) + ∫ 2 rho0^{r alpha + 1} U/eta_x e^{∫2H} dτ),
/// quadrature by the composite trapezoid over the recorded steps.
pub fn duhamel_rhs(
    times: &[f64],
    depth: &[f64],
    u: &[f64],
    eta_x: &[f64],
    rho0: f64,
    r: f64,
    alpha: f64,
    weighted_v0: f64,
) -> f64 {
    let n = times.len();
    assert!(n >= 2);
    // cumulative ∫ 2H ds
    let mut i2h = vec![0.0; n];
    for k in 1..n {
        i2h[k] = i2h[k - 1] + (times[k] - times[k - 1]) * (depth[k] + depth[k - 1]);
    }
    let w = rho0.powf(r * alpha + 1.0);
    let integrand = |k: usize| 2.0 * w * u[k] / eta_x[k] * i2h[k].exp();
    let mut acc = 0.0;
    for k in 1..n {
        acc += 0.5 * (times[k] - times[k - 1]) * (integrand(k) + integrand(k - 1));
    }
    (-i2h[n - 1]).exp() * (weighted_v0 + acc)
}

/// Max deviation over the probes between the directly evaluated
/// rho0^{r alpha} V at the final recorded time and the closed-form right
/// side integrated along the recorded history.
pub fn v_duhamel_check(
    history: &ProbeHistory,
    v_initial: &EffectiveVelocityField,
    v_final: &EffectiveVelocityField,
    data: &InitialData,
    r: f64,
) -> f64 {
    let mut worst = 0.0f64;
    for (j, &i) in history.probes.iter().enumerate() {
        let w = data.rho0[i].powf(r * data.alpha);
        let depth_j: Vec<f64> = history.depth.iter().map(|row| row[j]).collect();
        let u_j: Vec<f64> = history.u.iter().map(|row| row[j]).collect();
        let m_j: Vec<f64> = history.eta_x.iter().map(|row| row[j]).collect();
        let rhs = duhamel_rhs(
            &history.times,
            &depth_j,
            &u_j,
            &m_j,
            data.rho0[i],
            r,
            data.alpha,
            w * v_initial.v[i],
        );
        worst = worst.max((w * v_final.v[i] - rhs).abs());
    }
    worst
}

/// (neumann_residual, slope_ratio, log_eta_weighted): the emergent-boundary
/// monitors. U_x via the one-sided stencils of `derivative`.
pub fn boundary_monitors(state: &FluidState, data: &InitialData) -> (f64, f64, f64) {
    let g = &data.grid;
    let ux = grid::derivative(g, &state.u, 1);
    let neumann = ux[0].abs().max(ux[g.n - 1].abs());
    let mut slope = 0.0f64;
    let mut logw = 0.0f64;
    let half_exp = 0.5 * (data.alpha + 2.0);
    for i in 1..g.n - 1 {
        let d = grid::distance(g.nodes[i]);
        slope = slope.max(ux[i].abs() / d);
        logw = logw.max(data.rho0[i].powf(half_exp) * state.eta_x[i].ln().abs());
    }
    (neumann, slope, logw)
}

/// Kinetic-energy floor E_k(t) >= P(0)²/(2 m(0)) - tol. Returns None when
/// the initial momentum vanishes (the bound is vacuous), otherwise
/// (passes, minimal margin over the series).
pub fn kinetic_floor_check(
    momentum0: f64,
    mass0: f64,
    kinetic_series: &[f64],
    tol: f64,
) -> Option<(bool, f64)> {
    if momentum0 == 0.0 {
        return None;
    }
    let floor = momentum0 * momentum0 / (2.0 * mass0);
    let mut margin = f64::INFINITY;
    for &ek in kinetic_series {
        margin = margin.min(ek - floor);
    }
    Some((margin >= -tol, margin))
}

/// Components of the high-order energy evaluated on a window of at least
/// three consecutive states (backward differences for the time entries).
#[derive(Debug, Clone)]
pub struct EnergyWindow {
    pub components: Vec<(String, f64)>,
    pub spatial_total: f64,
}

/// Weighted high-order energy entries on a state window. Spatial entries
/// use the derivative stencils; temporal entries come from backward
/// differences over the window.
pub fn weighted_energy_estimate(window: &[FluidState], data: &InitialData) -> EnergyWindow {
    assert!(window.len() >= 3, "need at least three states for U_tt");
    let g = &data.grid;
    let m = window.len();
    let s2 = &window[m - 3];
    let s1 = &window[m - 2];
    let s0 = &window[m - 1];
    let dt = s0.t - s1.t;
    let n = g.n;
    let tang_w = if data.alpha <= 1.0 / 3.0 { 2.0 } else { 1.0 / data.alpha };
    let ell_w = if data.alpha <= 1.0 / 3.0 { 2.0 } else { 3.0 - 2.0 * data.epsilon0 };
    let u_t: Vec<f64> = (0..n).map(|i| (s0.u[i] - s1.u[i]) / dt).collect();
    let u_tt: Vec<f64> =
        (0..n).map(|i| (s0.u[i] - 2.0 * s1.u[i] + s2.u[i]) / (dt * dt)).collect();
    let u_x = grid::derivative(g, &s0.u, 1);
    let u_tx = grid::derivative(g, &u_t, 1);
    let u_txx = grid::derivative(g, &u_t, 2);
    let mut components = Vec::new();
    let mut push = |label: &str, f: &[f64], w: f64| {
        let v = data.phi0_norm(f, w).powi(2);
        components.push((label.to_string(), v));
        v
    };
    push("|w U|^2", &s0.u, tang_w);
    push("|w U_t|^2", &u_t, tang_w);
    push("|w U_tt|^2", &u_tt, tang_w);
    push("|w U_x|^2", &u_x, tang_w);
    push("|w U_tx|^2", &u_tx, tang_w);
    push("|w dt U_xx|^2", &u_txx, ell_w);
    let mut spatial_total = 0.0;
    for k in 2..=4usize {
        let dk = grid::derivative(g, &s0.u, k);
        spatial_total += push(&format!("|w d^{k} U|^2"), &dk, ell_w);
    }
    EnergyWindow { components, spatial_total }
}

/// Spatial part of the high-order energy of a single state.
pub fn e_tilde_spatial(state: &FluidState, data: &InitialData) -> f64 {
    let ell_w = if data.alpha <= 1.0 / 3.0 { 2.0 } else { 3.0 - 2.0 * data.epsilon0 };
    let mut total = 0.0;
    for k in 2..=4usize {
        let dk = grid::derivative(&data.grid, &state.u, k);
        total += data.phi0_norm(&dk, ell_w).powi(2);
    }
    total
}

/// Assemble the full record for one accepted state. `prev` feeds the
/// transport-law residual (zero on the first row).
pub fn record(
    prev: Option<&FluidState>,
    state: &FluidState,
    data: &InitialData,
) -> DiagnosticsRecord {
    let (mass, momentum, kinetic_energy) = conserved_quantities(state, data);
    let (fundamental_energy, fundamental_dissipation) = fundamental_energy(state, data);
    let (bd_e, bd_d) = bd_entropy(state, data);
    let (neumann_residual, slope_ratio, log_eta_weighted) = boundary_monitors(state, data);
    let h = solver::depth(state, data);
    let h_max = h.iter().cloned().fold(0.0f64, f64::max);
    let v = effective_velocity(state, data, VForm::MetricForm);
    let mut v_weighted_sup = 0.0f64;
    for i in 1..data.grid.n - 1 {
        v_weighted_sup = v_weighted_sup.max(data.rho0[i].powf(data.alpha) * v.v[i].abs());
    }
    let v_transport = match prev {
        Some(p) => v_transport_residual(p, state, data),
        None => 0.0,
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &m in &state.eta_x {
        lo = lo.min(m);
        hi = hi.max(m);
    }
    DiagnosticsRecord {
        t: state.t,
        mass,
        momentum,
        kinetic_energy,
        fundamental_energy,
        fundamental_dissipation,
        dissipative_energy: dissipative_energy(state, data),
        bd_entropy: bd_e,
        bd_dissipation: bd_d,
        bd_divergent: data.alpha >= 1.0,
        eta_x_min: lo,
        eta_x_max: hi,
        h_max,
        neumann_residual,
        slope_ratio,
        v_transport_residual: v_transport,
        v_weighted_sup,
        log_eta_weighted,
        e_tilde_spatial: e_tilde_spatial(state, data),
    }
}

/// V_t(0,x) implied by the transport law: -2 rho0 (V(0) - u0) at the
/// interior nodes (H = rho0 at t = 0). The first-step transport residual of
/// the solver converges to zero against this rate at O(dt).
pub fn initial_transport_rate(data: &InitialData) -> Vec<f64> {
    let g = &data.grid;
    let s0 = FluidState {
        t: 0.0,
        u: data.u0.clone(),
        eta: g.nodes.clone(),
        eta_x: vec![1.0; g.n],
    };
    let v0 = effective_velocity(&s0, data, VForm::MetricForm).v;
    let mut out = vec![0.0; g.n];
    for i in 1..g.n - 1 {
        out[i] = -2.0 * data.rho0[i] * (v0[i] - data.u0[i]);
    }
    out
}
