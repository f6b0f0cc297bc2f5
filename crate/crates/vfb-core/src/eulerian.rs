//! Reconstruction of the Eulerian moving-domain solution from a Lagrangian
//! state.
//!
//! The flow map eta sends the reference node x_i to the physical position
//! eta_i; inverting it by monotone piecewise-cubic interpolation through the
//! pairs (eta_i, x_i) gives the reference coordinate of any physical point
//! y, after which
//!
//! ```text
//! rho(t,y) = rho0/eta_x,   u = U,   u_y = U_x/eta_x,
//! u_yy = U_xx/eta_x^2 - U_x eta_xx/eta_x^3,
//! ```
//!
//! all evaluated at the recovered reference coordinate. Monotone (Fritsch-
//! Carlson) interpolation keeps the inverse map monotone, so eta_x > 0
//! survives the reconstruction.

use crate::grid;
use crate::initial::InitialData;
use crate::solver::FluidState;

/// Eulerian fields on a uniform grid over the moving domain at one time.
#[derive(Debug, Clone)]
pub struct EulerianSnapshot {
    pub t: f64,
    pub gamma_left: f64,
    pub gamma_right: f64,
    pub y_nodes: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub u_y: Vec<f64>,
    pub u_yy: Vec<f64>,
}

impl EulerianSnapshot {
    /// Trapezoid mass ∫ rho dy over the moving domain.
    pub fn mass(&self) -> f64 {
        let m = self.y_nodes.len();
        let dy = (self.gamma_right - self.gamma_left) / (m - 1) as f64;
        let mut s = 0.5 * (self.rho[0] + self.rho[m - 1]);
        for v in &self.rho[1..m - 1] {
            s += v;
        }
        s * dy
    }
}

/// Shape-preserving cubic Hermite slopes (Fritsch-Carlson) for strictly
/// increasing abscissae.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 3);
    let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| -> f64 {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

/// Cubic Hermite evaluation with precomputed slopes.
fn pchip_eval(xs: &[f64], ys: &[f64], ms: &[f64], x: f64) -> f64 {
    let n = xs.len();
    // bracketing interval by binary search
    let mut lo = 0usize;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x { lo = mid } else { hi = mid }
    }
    let h = xs[lo + 1] - xs[lo];
    let s = (x - xs[lo]) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * ys[lo] + h10 * h * ms[lo] + h01 * ys[lo + 1] + h11 * h * ms[lo + 1]
}

/// Interpolant of node samples over the reference grid.
struct FieldInterp<'a> {
    xs: &'a [f64],
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl<'a> FieldInterp<'a> {
    fn new(xs: &'a [f64], ys: Vec<f64>) -> Self {
        let ms = pchip_slopes(xs, &ys);
        FieldInterp { xs, ys, ms }
    }
    fn at(&self, x: f64) -> f64 {
        pchip_eval(self.xs, &self.ys, &self.ms, x)
    }
}

/// Reference coordinate x with eta(t, x) = y, by monotone interpolation of
/// the inverse map through the node pairs (eta_i, x_i). The endpoints map
/// exactly.
pub fn invert_flow_map(state: &FluidState, grid: &crate::grid::Grid, y: f64) -> f64 {
    let n = grid.n;
    assert!(
        y >= state.eta[0] - 1e-12 && y <= state.eta[n - 1] + 1e-12,
        "y = {y} outside the moving domain [{}, {}]",
        state.eta[0],
        state.eta[n - 1]
    );
    let y = y.clamp(state.eta[0], state.eta[n - 1]);
    if y == state.eta[0] {
        return 0.0;
    }
    if y == state.eta[n - 1] {
        return 1.0;
    }
    let ms = pchip_slopes(&state.eta, &grid.nodes);
    pchip_eval(&state.eta, &grid.nodes, &ms, y)
}

/// Eulerian fields at one physical point y.
pub fn reconstruct_at(state: &FluidState, data: &InitialData, y: f64) -> (f64, f64, f64, f64) {
    let g = &data.grid;
    let x = invert_flow_map(state, g, y);
    let u_x = grid::derivative(g, &state.u, 1);
    let eta_xx = grid::derivative(g, &state.eta, 2);
    let fi = |ys: &[f64]| FieldInterp::new(&g.nodes, ys.to_vec()).at(x);
    let m = fi(&state.eta_x);
    let rho = fi(&data.rho0) / m;
    let u = fi(&state.u);
    let ux = fi(&u_x);
    let exx = fi(&eta_xx);
    (rho, u, ux / m, fi(&grid::derivative(g, &state.u, 2)) / (m * m) - ux * exx / (m * m * m))
}

/// Snapshot on a uniform Eulerian grid of `m` points spanning the moving
/// domain. rho vanishes exactly at both ends (the endpoint reference
/// coordinates are exact).
pub fn reconstruct(state: &FluidState, data: &InitialData, m: usize) -> EulerianSnapshot {
    assert!(m >= 3);
    let g = &data.grid;
    let gamma_left = state.eta[0];
    let gamma_right = state.eta[g.n - 1];
    assert!(gamma_left < gamma_right);
    let dy = (gamma_right - gamma_left) / (m - 1) as f64;

    // build the interpolants once, not per point
    let inv_ms = pchip_slopes(&state.eta, &g.nodes);
    let u_x = grid::derivative(g, &state.u, 1);
    let u_xx = grid::derivative(g, &state.u, 2);
    let eta_xx = grid::derivative(g, &state.eta, 2);
    let f_rho0 = FieldInterp::new(&g.nodes, data.rho0.clone());
    let f_m = FieldInterp::new(&g.nodes, state.eta_x.clone());
    let f_u = FieldInterp::new(&g.nodes, state.u.clone());
    let f_ux = FieldInterp::new(&g.nodes, u_x);
    let f_uxx = FieldInterp::new(&g.nodes, u_xx);
    let f_exx = FieldInterp::new(&g.nodes, eta_xx);

    let mut snap = EulerianSnapshot {
        t: state.t,
        gamma_left,
        gamma_right,
        y_nodes: Vec::with_capacity(m),
        rho: Vec::with_capacity(m),
        u: Vec::with_capacity(m),
        u_y: Vec::with_capacity(m),
        u_yy: Vec::with_capacity(m),
    };
    for j in 0..m {
        let y = if j == m - 1 { gamma_right } else { gamma_left + j as f64 * dy };
        let x = if j == 0 {
            0.0
        } else if j == m - 1 {
            1.0
        } else {
            pchip_eval(&state.eta, &g.nodes, &inv_ms, y)
        };
        let met = f_m.at(x);
        let rho = if j == 0 || j == m - 1 { 0.0 } else { f_rho0.at(x) / met };
        let ux = f_ux.at(x);
        snap.y_nodes.push(y);
        snap.rho.push(rho);
        snap.u.push(f_u.at(x));
        snap.u_y.push(ux / met);
        snap.u_yy.push(f_uxx.at(x) / (met * met) - ux * f_exx.at(x) / (met * met * met));
    }
    snap
}

/// Max deviation between the difference quotient of the boundary positions
/// and the boundary velocity, over a recorded trajectory of
/// (t, [left, right] positions, [left, right] velocities).
pub fn boundary_kinematics(samples: &[(f64, [f64; 2], [f64; 2])]) -> f64 {
    let mut worst = 0.0f64;
    for k in 1..samples.len() {
        let (t0, g0, v0) = samples[k - 1];
        let (t1, g1, _) = samples[k];
        let dt = t1 - t0;
        for side in 0..2 {
            worst = worst.max(((g1[side] - g0[side]) / dt - v0[side]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::initial::VelocityKind;
    use crate::solver::{initialize, run, step, SolverConfig};

    fn parabola(n: usize, velocity: VelocityKind) -> InitialData {
        InitialData::new(1.0, 6.0, velocity, make_grid(n))
    }

    fn cfg(n: usize, dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig { n, dt, t_end, theta: 1.0, ..SolverConfig::default() }
    }

    #[test]
    fn identity_map_inverts_to_itself() {
        let d = parabola(101, VelocityKind::Zero);
        let s = initialize(&d, &cfg(101, 1e-4, 0.0)).unwrap();
        for &y in &[0.0, 0.123, 0.5, 0.87, 1.0] {
            let x = invert_flow_map(&s, &d.grid, y);
            assert!((x - y).abs() < 1e-12, "y = {y} -> x = {x}");
        }
    }

    #[test]
    fn synthetic_map_round_trip() {
        let d = parabola(201, VelocityKind::Zero);
        let mut s = initialize(&d, &cfg(201, 1e-4, 0.0)).unwrap();
        for i in 0..201 {
            let x = d.grid.nodes[i];
            s.eta[i] = x + 0.1 * (std::f64::consts::PI * x).sin();
        }
        s.eta_x = grid::derivative(&d.grid, &s.eta, 1);
        for &x0 in &[0.1, 0.33, 0.5, 0.77, 0.9] {
            let y = x0 + 0.1 * (std::f64::consts::PI * x0).sin();
            let x = invert_flow_map(&s, &d.grid, y);
            let y_back = x + 0.1 * (std::f64::consts::PI * x).sin();
            assert!((y_back - y).abs() < 1e-8, "round trip at {x0}: {y} vs {y_back}");
        }
    }

    #[test]
    #[should_panic]
    fn outside_domain_rejected() {
        let d = parabola(101, VelocityKind::Zero);
        let s = initialize(&d, &cfg(101, 1e-4, 0.0)).unwrap();
        invert_flow_map(&s, &d.grid, 1.5);
    }

    #[test]
    fn snapshot_at_t0_reproduces_data() {
        let d = parabola(201, VelocityKind::Bump { center: 0.5, radius: 0.2, amplitude: 0.5 });
        let s = initialize(&d, &cfg(201, 1e-4, 0.0)).unwrap();
        let snap = reconstruct(&s, &d, 301);
        assert_eq!(snap.gamma_left, 0.0);
        assert_eq!(snap.gamma_right, 1.0);
        assert_eq!(snap.rho[0], 0.0);
        assert_eq!(*snap.rho.last().unwrap(), 0.0);
        for j in (0..301).step_by(25) {
            let y = snap.y_nodes[j];
            let expect_rho = if j == 0 || j == 300 { 0.0 } else { 6.0 * y * (1.0 - y) };
            assert!((snap.rho[j] - expect_rho).abs() < 1e-6, "rho at y = {y}");
        }
        // u_y(0, y) = (u0)_x(y)
        let ux = grid::derivative(&d.grid, &d.u0, 1);
        let mid = 150;
        let y = snap.y_nodes[mid];
        let i = ((d.grid.n - 1) as f64 * y).round() as usize;
        assert!((snap.u_y[mid] - ux[i]).abs() < 1e-4);
    }

    #[test]
    fn eulerian_mass_matches_lagrangian() {
        let d = parabola(201, VelocityKind::Bump { center: 0.5, radius: 0.2, amplitude: 0.5 });
        let c = cfg(201, 2e-4, 0.1);
        let end = run(&d, &c, |_, _| {}).unwrap();
        let snap = reconstruct(&end, &d, 401);
        let m_lag = d.grid.integrate(&d.rho0);
        assert!(
            (snap.mass() - m_lag).abs() < 1e-4 * m_lag,
            "Eulerian {} vs Lagrangian {}",
            snap.mass(),
            m_lag
        );
    }

    #[test]
    fn round_trip_recovers_nodal_velocity() {
        let d = parabola(201, VelocityKind::Bump { center: 0.5, radius: 0.2, amplitude: 0.5 });
        let c = cfg(201, 2e-4, 0.05);
        let end = run(&d, &c, |_, _| {}).unwrap();
        // sample the snapshot exactly at the particle positions eta(x_i)
        for &i in &[30usize, 77, 100, 140, 170] {
            let (_, u, _, _) = reconstruct_at(&end, &d, end.eta[i]);
            assert!(
                (u - end.u[i]).abs() < 1e-10,
                "node {i}: interpolated {u} vs nodal {}",
                end.u[i]
            );
        }
    }

    #[test]
    fn frozen_constant_velocity_moves_boundary_exactly() {
        let samples = vec![
            (0.0, [0.0, 1.0], [0.25, 0.25]),
            (0.1, [0.025, 1.025], [0.25, 0.25]),
            (0.2, [0.05, 1.05], [0.25, 0.25]),
        ];
        assert!(boundary_kinematics(&samples) < 1e-14);
    }

    #[test]
    fn boundary_kinematics_residual_refines_with_dt() {
        let mut res = Vec::new();
        for dt in [4e-4, 2e-4] {
            let d = parabola(101, VelocityKind::Bump { center: 0.5, radius: 0.2, amplitude: 0.5 });
            let c = cfg(101, dt, 0.05);
            let mut samples = Vec::new();
            run(&d, &c, |s, _| {
                samples.push((s.t, [s.eta[0], s.eta[100]], [s.u[0], s.u[100]]));
            })
            .unwrap();
            res.push(boundary_kinematics(&samples));
        }
        assert!(res[1] < 0.7 * res[0], "kinematics residual should halve: {res:?}");
    }

    #[test]
    fn continuity_residual_tends_to_zero() {
        // rho_t + (rho u)_y differenced between consecutive snapshots at
        // matched interior points, at two resolutions: the residual drops
        // when dt and h are refined together
        let mut worst = Vec::new();
        for (n, dt) in [(101usize, 4e-4), (201, 2e-4)] {
            let d = parabola(n, VelocityKind::Bump { center: 0.5, radius: 0.2, amplitude: 0.5 });
            let c = cfg(n, dt, 0.02);
            let mut s1 = initialize(&d, &c).unwrap();
            let steps = (c.t_end / c.dt).round() as usize;
            for _ in 0..steps {
                let (sn, _) = step(&s1, &d, &c, None).unwrap();
                s1 = sn;
            }
            let (s2, _) = step(&s1, &d, &c, None).unwrap();
            let flux_y = |s: &FluidState, y: f64, eps: f64| {
                let (ra, ua, _, _) = reconstruct_at(s, &d, y - eps);
                let (rb, ub, _, _) = reconstruct_at(s, &d, y + eps);
                (rb * ub - ra * ua) / (2.0 * eps)
            };
            let mut w: f64 = 0.0;
            let eps = 5.0 * d.grid.h;
            for &y in &[0.3, 0.5, 0.7] {
                let (r1, _, _, _) = reconstruct_at(&s1, &d, y);
                let (r2, _, _, _) = reconstruct_at(&s2, &d, y);
                // centered at t + dt/2
                let rho_t = (r2 - r1) / c.dt;
                let fy = 0.5 * (flux_y(&s1, y, eps) + flux_y(&s2, y, eps));
                w = w.max((rho_t + fy).abs());
            }
            worst.push(w);
        }
        assert!(worst[1] < 0.8 * worst[0], "continuity residual: {worst:?}");
    }
}
