//! Manufactured-solution forcing and convergence studies.
//!
//! Pick a smooth velocity field U*(t,x) = a(t) s(x) whose gradient vanishes
//! at the endpoints, let eta* be the flow map it generates, and feed the
//! solver the residual of the momentum equation as a body force:
//!
//! ```text
//! g = rho0 U*_t + (rho0^2/eta*_x^2)_x - (rho0 U*_x/eta*_x^2)_x.
//! ```
//!
//! The discrete solution then converges to U* at the scheme's rates:
//! first order in dt for backward Euler, second order in h (and in dt for
//! the midpoint scheme), measured in the sqrt(rho0)-weighted L2 norm.

use crate::grid::WeightSpec;
use crate::initial::InitialData;
use crate::solver::{self, FluidState, SolverConfig};

/// Separable manufactured velocity a(t) s(x) with s(x) = x^2 (1-x)^2 and
/// a(t) = amplitude * sin(pi t). The generated flow map perturbation stays
/// small enough that eta*_x remains positive for all time.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSolution {
    pub amplitude: f64,
}

impl ManufacturedSolution {
    pub fn new(amplitude: f64) -> Self {
        assert!(amplitude.abs() < 4.0, "amplitude too large: eta*_x would vanish");
        ManufacturedSolution { amplitude }
    }

    fn a(&self, t: f64) -> f64 {
        self.amplitude * (std::f64::consts::PI * t).sin()
    }

    fn a_dot(&self, t: f64) -> f64 {
        self.amplitude * std::f64::consts::PI * (std::f64::consts::PI * t).cos()
    }

    /// A(t) = ∫_0^t a, so eta*(t,x) = x + A(t) s(x).
    fn a_int(&self, t: f64) -> f64 {
        self.amplitude * (1.0 - (std::f64::consts::PI * t).cos()) / std::f64::consts::PI
    }

    fn s(x: f64) -> f64 {
        x * x * (1.0 - x) * (1.0 - x)
    }

    fn s1(x: f64) -> f64 {
        2.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
    }

    fn s2(x: f64) -> f64 {
        2.0 * (1.0 - 6.0 * x + 6.0 * x * x)
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        self.a(t) * Self::s(x)
    }

    pub fn u_t(&self, t: f64, x: f64) -> f64 {
        self.a_dot(t) * Self::s(x)
    }

    pub fn u_x(&self, t: f64, x: f64) -> f64 {
        self.a(t) * Self::s1(x)
    }

    pub fn u_xx(&self, t: f64, x: f64) -> f64 {
        self.a(t) * Self::s2(x)
    }

    pub fn eta_x(&self, t: f64, x: f64) -> f64 {
        1.0 + self.a_int(t) * Self::s1(x)
    }

    pub fn eta_xx(&self, t: f64, x: f64) -> f64 {
        self.a_int(t) * Self::s2(x)
    }

    /// Node samples of U*(t, .).
    pub fn sample_u(&self, data: &InitialData, t: f64) -> Vec<f64> {
        data.grid.nodes.iter().map(|&x| self.u(t, x)).collect()
    }
}

/// Forcing samples g(t, x_i) from the closed-form derivatives of the
/// manufactured fields and the exact profile derivatives of the data.
pub fn mms_forcing(ms: &ManufacturedSolution, data: &InitialData, t: f64) -> Vec<f64> {
    let g = &data.grid;
    (0..g.n)
        .map(|i| {
            let x = g.nodes[i];
            let r = data.rho0[i];
            let rx = data.rho0_dx1[i];
            let m = ms.eta_x(t, x);
            let mx = ms.eta_xx(t, x);
            let ux = ms.u_x(t, x);
            let uxx = ms.u_xx(t, x);
            let m2 = m * m;
            let m3 = m2 * m;
            // d/dx [rho0^2/m^2] = 2 r rx/m^2 - 2 r^2 mx/m^3
            // d/dx [rho0 ux/m^2] = rx ux/m^2 + r uxx/m^2 - 2 r ux mx/m^3
            r * ms.u_t(t, x) + 2.0 * r * rx / m2 - 2.0 * r * r * mx / m3
                - (rx * ux / m2 + r * uxx / m2 - 2.0 * r * ux * mx / m3)
        })
        .collect()
}

/// Drive the solver with manufactured forcing from U*(0,.) up to t_end and
/// return the weighted error |sqrt(rho0)(U - U*)|_2 at the final time.
pub fn run_mms(
    data: &InitialData,
    config: &SolverConfig,
    ms: &ManufacturedSolution,
    wrong_forcing: bool,
) -> f64 {
    let g = &data.grid;
    let mut state = FluidState {
        t: 0.0,
        u: ms.sample_u(data, 0.0),
        eta: g.nodes.clone(),
        eta_x: vec![1.0; g.n],
    };
    let steps = (config.t_end / config.dt).round() as usize;
    for k in 0..steps {
        let t_forcing = state.t + config.theta * config.dt;
        let mut forcing = mms_forcing(ms, data, t_forcing);
        if wrong_forcing {
            // negative control: a smooth O(1) perturbation that no grid
            // refinement can explain away
            for (i, f) in forcing.iter_mut().enumerate() {
                *f += 0.5 * data.rho0[i];
            }
        }
        let (next, _) = solver::step(&state, data, config, Some(&forcing))
            .unwrap_or_else(|e| panic!("manufactured run failed: {e}"));
        state = next;
        state.t = (k + 1) as f64 * config.dt;
    }
    let exact = ms.sample_u(data, state.t);
    let diff: Vec<f64> = (0..g.n).map(|i| state.u[i] - exact[i]).collect();
    g.weighted_norm(&diff, WeightSpec::rho0(1.0), 2.0, &data.phi0, &data.rho0)
}

/// Observed convergence order from a sequence of errors under successive
/// halving of the refined parameter.
pub fn observed_order(errors: &[f64]) -> f64 {
    assert!(errors.len() >= 2);
    let mut s = 0.0;
    for i in 0..errors.len() - 1 {
        s += (errors[i] / errors[i + 1]).log2();
    }
    s / (errors.len() - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::initial::VelocityKind;

    fn data(n: usize) -> InitialData {
        InitialData::new(1.0, 6.0, VelocityKind::Zero, make_grid(n))
    }

    #[test]
    fn forcing_reduces_to_pressure_gradient_at_rest() {
        // U* = 0, eta* = id: g = (rho0^2)_x = 2 rho0 (rho0)_x
        let d = data(101);
        let ms = ManufacturedSolution::new(0.0);
        let g = mms_forcing(&ms, &d, 0.3);
        for i in 0..d.grid.n {
            let expect = 2.0 * d.rho0[i] * d.rho0_dx1[i];
            assert!((g[i] - expect).abs() < 1e-13, "node {i}");
        }
    }

    #[test]
    fn forcing_matches_finite_differences() {
        // cross-check every term of g against central differences in x
        let d = data(101);
        let ms = ManufacturedSolution::new(0.8);
        let t = 0.37;
        let g = mms_forcing(&ms, &d, t);
        let eps = 1e-6;
        for i in [25usize, 50, 75] {
            let x = d.grid.nodes[i];
            let flux = |x: f64| {
                let r = 6.0 * x * (1.0 - x);
                let m = ms.eta_x(t, x);
                (r * r - r * ms.u_x(t, x)) / (m * m)
            };
            let fd = (flux(x + eps) - flux(x - eps)) / (2.0 * eps);
            let expect = d.rho0[i] * ms.u_t(t, x) + fd;
            assert!((g[i] - expect).abs() < 1e-6, "node {i}: {} vs {expect}", g[i]);
        }
    }

    #[test]
    fn temporal_first_order_backward_euler() {
        // fine grid so the O(h^2) floor stays below the temporal error
        let d = data(401);
        let ms = ManufacturedSolution::new(0.5);
        let mut errs = Vec::new();
        for dt in [8e-3, 4e-3, 2e-3] {
            let cfg = SolverConfig { n: 401, dt, t_end: 0.2, theta: 1.0, ..Default::default() };
            errs.push(run_mms(&d, &cfg, &ms, false));
        }
        let order = observed_order(&errs);
        assert!(order > 0.9, "temporal order {order}, errors {errs:?}");
    }

    #[test]
    fn spatial_second_order_midpoint() {
        let ms = ManufacturedSolution::new(0.5);
        let mut errs = Vec::new();
        for n in [51usize, 101, 201] {
            let d = data(n);
            let dt = 0.2 * (1.0 / (n - 1) as f64);
            let cfg = SolverConfig { n, dt, t_end: 0.2, theta: 0.5, ..Default::default() };
            errs.push(run_mms(&d, &cfg, &ms, false));
        }
        let order = observed_order(&errs);
        assert!(order > 1.8, "spatial order {order}, errors {errs:?}");
    }

    #[test]
    fn wrong_forcing_detected() {
        let ms = ManufacturedSolution::new(0.5);
        let mut errs = Vec::new();
        for n in [51usize, 101, 201] {
            let d = data(n);
            let dt = 0.2 * (1.0 / (n - 1) as f64);
            let cfg = SolverConfig { n, dt, t_end: 0.2, theta: 0.5, ..Default::default() };
            errs.push(run_mms(&d, &cfg, &ms, true));
        }
        let order = observed_order(&errs);
        assert!(order < 0.5, "mismatched forcing should not converge, got order {order}");
    }
}
