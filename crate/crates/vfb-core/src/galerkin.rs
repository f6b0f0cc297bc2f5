//! Independent spectral oracle for the linearized degenerate problem.
//!
//! The linearization freezes the flow map at a prescribed trajectory
//! eta_bar(t, x) and solves
//!
//! ```text
//! phi0^(1/a) U_t - (phi0^(1/a) U_x / eta_bar_x^2)_x + (phi0^(2/a)/eta_bar_x^2)_x = 0
//! ```
//!
//! for 1/3 < alpha <= 1, or the phi0^2-weighted reformulation with the
//! first-order cross term (coefficient K0 = 1/alpha - 2) for
//! alpha <= 1/3. Expanding in the Neumann eigenbasis of -d²/dx² + 1
//! (e_0 = 1, e_j = sqrt(2) cos(j pi x), eigenvalues 1 + j²pi²) turns the
//! weak form into a modal ODE system
//!
//! ```text
//! A mu' + B(t) mu = C(t),
//! ```
//!
//! with a symmetric positive definite Gram matrix A. The system is
//! integrated either by RK4 or by the contraction fixed-point iteration on
//! its integral form, and the reconstructed field cross-validates the
//! finite-volume stepper on the same frozen-coefficient problem.

use crate::grid::{Grid, WeightSpec};
use crate::initial::InitialData;
use crate::solver::{self, SolverConfig};

/// Sampled Neumann cosine basis with eigenvalues of -d²/dx² + 1.
#[derive(Debug, Clone)]
pub struct NeumannBasis {
    pub n_modes: usize,
    /// modes[j] = samples of e_j; e_0 = 1, e_j = sqrt(2) cos(j pi x).
    pub modes: Vec<Vec<f64>>,
    /// Analytic derivative samples (exactly zero at the endpoints).
    pub dmodes: Vec<Vec<f64>>,
    /// lambda_j = 1 + j² pi².
    pub eigenvalues: Vec<f64>,
}

/// Which weighted reformulation is being discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightForm {
    /// Weight phi0², cross-term coefficient K0 = 1/alpha - 2 (alpha <= 1/3).
    LowAlpha,
    /// Weight phi0^(1/alpha), no cross term (1/3 < alpha <= 1).
    HighAlpha,
}

impl WeightForm {
    pub fn for_alpha(alpha: f64) -> WeightForm {
        if alpha <= 1.0 / 3.0 { WeightForm::LowAlpha } else { WeightForm::HighAlpha }
    }
}

/// Build the sampled basis; `n_modes <= n/4` keeps every mode resolved.
pub fn build_basis(n_modes: usize, grid: &Grid) -> NeumannBasis {
    assert!(n_modes >= 1);
    assert!(
        4 * n_modes <= grid.n,
        "resolution guard: {n_modes} modes need at least {} nodes",
        4 * n_modes
    );
    let pi = std::f64::consts::PI;
    let sqrt2 = 2.0f64.sqrt();
    let mut modes = Vec::with_capacity(n_modes);
    let mut dmodes = Vec::with_capacity(n_modes);
    let mut eigenvalues = Vec::with_capacity(n_modes);
    for j in 0..n_modes {
        if j == 0 {
            modes.push(vec![1.0; grid.n]);
            dmodes.push(vec![0.0; grid.n]);
        } else {
            let k = j as f64 * pi;
            modes.push(grid.nodes.iter().map(|&x| sqrt2 * (k * x).cos()).collect());
            let mut dm: Vec<f64> =
                grid.nodes.iter().map(|&x| -sqrt2 * k * (k * x).sin()).collect();
            // the Neumann condition holds exactly, not to sin(j*pi) roundoff
            dm[0] = 0.0;
            dm[grid.n - 1] = 0.0;
            dmodes.push(dm);
        }
        eigenvalues.push(1.0 + (j as f64 * pi).powi(2));
    }
    NeumannBasis { n_modes, modes, dmodes, eigenvalues }
}

/// Modal system matrices at one time: mass A, operator B, load C.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub form: WeightForm,
}

/// Assemble the Galerkin matrices at time `t` against a frozen metric
/// trajectory eta_bar_x(t, x), which must stay within [1/2, 3/2].
pub fn assemble(
    basis: &NeumannBasis,
    data: &InitialData,
    eta_bar_x: &dyn Fn(f64, f64) -> f64,
    t: f64,
) -> GalerkinSystem {
    let g = &data.grid;
    let n = g.n;
    let form = WeightForm::for_alpha(data.alpha);
    let inv_a = 1.0 / data.alpha;
    // weight and load samples
    let mut weight = vec![0.0; n];
    let mut inv_m2 = vec![0.0; n];
    for i in 0..n {
        let m = eta_bar_x(t, g.nodes[i]);
        assert!(
            (0.5..=1.5).contains(&m),
            "frozen metric {m} at x = {} outside [1/2, 3/2]",
            g.nodes[i]
        );
        inv_m2[i] = 1.0 / (m * m);
        weight[i] = match form {
            WeightForm::LowAlpha => data.phi0[i] * data.phi0[i],
            WeightForm::HighAlpha => data.phi0[i].powf(inv_a),
        };
    }
    let nm = basis.n_modes;
    let mut a = vec![vec![0.0; nm]; nm];
    let mut b = vec![vec![0.0; nm]; nm];
    let mut c = vec![0.0; nm];
    let k0 = match form {
        WeightForm::LowAlpha => inv_a - 2.0,
        WeightForm::HighAlpha => 0.0,
    };
    for k in 0..nm {
        for j in k..nm {
            let mut akj = 0.0;
            for i in 0..n {
                akj += g.quad_weight(i) * weight[i] * basis.modes[k][i] * basis.modes[j][i];
            }
            a[k][j] = akj;
            a[j][k] = akj;
        }
    }
    for k in 0..nm {
        for j in 0..nm {
            let mut stiff = 0.0;
            let mut cross = 0.0;
            for i in 0..n {
                let w = g.quad_weight(i);
                stiff += w * weight[i] * basis.dmodes[k][i] * basis.dmodes[j][i] * inv_m2[i];
                if k0 != 0.0 {
                    cross += w
                        * data.phi0[i]
                        * data.phi0_dx[0][i]
                        * basis.dmodes[k][i]
                        * basis.modes[j][i]
                        * inv_m2[i];
                }
            }
            b[j][k] = stiff - k0 * cross; // row j: test function e_j
        }
    }
    for (j, cj) in c.iter_mut().enumerate() {
        let mut load = 0.0;
        for i in 0..n {
            let w = g.quad_weight(i);
            match form {
                WeightForm::HighAlpha => {
                    load += w * data.phi0[i].powf(2.0 * inv_a) * inv_m2[i] * basis.dmodes[j][i];
                }
                WeightForm::LowAlpha => {
                    load += w
                        * data.phi0[i].powf(2.0 + inv_a)
                        * inv_m2[i]
                        * basis.dmodes[j][i];
                    load += w
                        * (2.0 - inv_a)
                        * data.phi0[i].powf(1.0 + inv_a)
                        * data.phi0_dx[0][i]
                        * inv_m2[i]
                        * basis.modes[j][i];
                }
            }
        }
        *cj = load;
    }
    GalerkinSystem { a, b, c, form }
}

/// Dense Cholesky factor (lower triangular) of an SPD matrix.
pub fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                assert!(s > 0.0, "matrix not positive definite at pivot {i}");
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    l
}

/// Solve L L^T x = b.
pub fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Modal coefficients of f in the (unweighted) L² projection <f, e_j>.
pub fn project(basis: &NeumannBasis, grid: &Grid, f: &[f64]) -> Vec<f64> {
    (0..basis.n_modes)
        .map(|j| {
            (0..grid.n).map(|i| grid.quad_weight(i) * f[i] * basis.modes[j][i]).sum::<f64>()
        })
        .collect()
}

/// X(t, x) = Σ mu_k e_k(x).
pub fn reconstruct_field(basis: &NeumannBasis, mu: &[f64]) -> Vec<f64> {
    let n = basis.modes[0].len();
    let mut out = vec![0.0; n];
    for (k, m) in mu.iter().enumerate() {
        for i in 0..n {
            out[i] += m * basis.modes[k][i];
        }
    }
    out
}

/// Integration method for the modal system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModalMethod {
    Rk4,
    /// Fixed-point iteration on the integral form, sub-stepped so the
    /// contraction constant stays below 1/2.
    PicardIntegral,
}

/// Modal trajectory stored at every output time.
#[derive(Debug, Clone)]
pub struct ModalTrajectory {
    pub times: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
}

/// Integrate A mu' = C(t) - B(t) mu from mu0. `time_dependent` controls
/// whether B and C are reassembled along the way.
#[allow(clippy::too_many_arguments)]
pub fn solve_modal(
    basis: &NeumannBasis,
    data: &InitialData,
    eta_bar_x: &dyn Fn(f64, f64) -> f64,
    time_dependent: bool,
    mu0: &[f64],
    dt: f64,
    t_end: f64,
    method: ModalMethod,
) -> ModalTrajectory {
    let sys0 = assemble(basis, data, eta_bar_x, 0.0);
    let l = cholesky(&sys0.a);
    let nm = basis.n_modes;
    let steps = (t_end / dt).round().max(1.0) as usize;
    let ops_at = |t: f64| -> (Vec<Vec<f64>>, Vec<f64>) {
        if time_dependent {
            let s = assemble(basis, data, eta_bar_x, t);
            (s.b, s.c)
        } else {
            (sys0.b.clone(), sys0.c.clone())
        }
    };
    let rhs = |b: &[Vec<f64>], c: &[f64], mu: &[f64]| -> Vec<f64> {
        let mut r = vec![0.0; nm];
        for j in 0..nm {
            let mut s = c[j];
            for k in 0..nm {
                s -= b[j][k] * mu[k];
            }
            r[j] = s;
        }
        chol_solve(&l, &r)
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut out = Vec::with_capacity(steps + 1);
    let mut mu = mu0.to_vec();
    times.push(0.0);
    out.push(mu.clone());
    match method {
        ModalMethod::Rk4 => {
            for s in 0..steps {
                let t = s as f64 * dt;
                let (b0, c0) = ops_at(t);
                let (bh, ch) = if time_dependent { ops_at(t + 0.5 * dt) } else { (b0.clone(), c0.clone()) };
                let (b1, c1) = if time_dependent { ops_at(t + dt) } else { (b0.clone(), c0.clone()) };
                let k1 = rhs(&b0, &c0, &mu);
                let k2 = rhs(&bh, &ch, &axpy(&mu, &k1, 0.5 * dt));
                let k3 = rhs(&bh, &ch, &axpy(&mu, &k2, 0.5 * dt));
                let k4 = rhs(&b1, &c1, &axpy(&mu, &k3, dt));
                for j in 0..nm {
                    mu[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                times.push((s + 1) as f64 * dt);
                out.push(mu.clone());
            }
        }
        ModalMethod::PicardIntegral => {
            // contraction bound from the row sums of A^{-1} B at t = 0
            let bbar_norm = {
                let mut worst = 0.0f64;
                for k in 0..nm {
                    let col: Vec<f64> = (0..nm).map(|j| sys0.b[j][k]).collect();
                    let a_col = chol_solve(&l, &col);
                    let s: f64 = a_col.iter().map(|v| v.abs()).sum();
                    worst = worst.max(s);
                }
                worst
            };
            let tau = 1.0 / (2.0 * bbar_norm + 1.0);
            let inner = (tau / dt).floor().max(1.0) as usize; // dt-steps per substep
            let mut s = 0usize;
            while s < steps {
                let m = inner.min(steps - s);
                // iterate mu^{k+1}(t_j) = mu(t0) + ∫ (Cbar - Bbar mu^k)
                let t0 = s as f64 * dt;
                let grid_ts: Vec<f64> = (0..=m).map(|j| t0 + j as f64 * dt).collect();
                let ops: Vec<(Vec<Vec<f64>>, Vec<f64>)> =
                    grid_ts.iter().map(|&t| ops_at(t)).collect();
                let mut traj = vec![mu.clone(); m + 1];
                loop {
                    let mut next = vec![mu.clone(); m + 1];
                    // integrand f_j = A^{-1}(C - B mu) at each mesh point
                    let f: Vec<Vec<f64>> = (0..=m)
                        .map(|j| rhs(&ops[j].0, &ops[j].1, &traj[j]))
                        .collect();
                    let mut delta = 0.0f64;
                    for j in 1..=m {
                        for q in 0..nm {
                            next[j][q] = next[j - 1][q] + 0.5 * dt * (f[j - 1][q] + f[j][q]);
                        }
                        // cumulative form: next[j] = mu + ∫_{t0}^{t_j}
                    }
                    for j in 0..=m {
                        for q in 0..nm {
                            delta = delta.max((next[j][q] - traj[j][q]).abs());
                        }
                    }
                    traj = next;
                    if delta < 1e-13 {
                        break;
                    }
                }
                for j in 1..=m {
                    times.push(grid_ts[j]);
                    out.push(traj[j].clone());
                }
                mu = traj[m].clone();
                s += m;
            }
        }
    }
    ModalTrajectory { times, mu: out }
}

fn axpy(x: &[f64], d: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + s * b).collect()
}

/// Result of the spectral-vs-finite-volume comparison.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// sup over sampled times of |phi0^(1/(2 alpha)) (X - U_fv)|_2.
    pub discrepancy: f64,
    pub per_time: Vec<(f64, f64)>,
}

/// Solve the frozen-metric linearized problem by both routes and return
/// the weighted discrepancy. `sample_every` counts finite-volume steps
/// between comparisons.
pub fn cross_validate(
    data: &InitialData,
    eta_bar_x: &dyn Fn(f64, f64) -> f64,
    time_dependent: bool,
    n_modes: usize,
    fv: &SolverConfig,
    modal_dt: f64,
    sample_every: usize,
) -> CrossValidation {
    let g = &data.grid;
    let basis = build_basis(n_modes, g);
    let mu0 = project(&basis, g, &data.u0);
    let modal = solve_modal(
        &basis,
        data,
        eta_bar_x,
        time_dependent,
        &mu0,
        modal_dt,
        fv.t_end,
        ModalMethod::Rk4,
    );
    let mut u = data.u0.clone();
    let steps = (fv.t_end / fv.dt).round() as usize;
    let mut per_time = Vec::new();
    let mut worst = 0.0f64;
    let weight = WeightSpec::phi0(1.0 / data.alpha); // |phi0^(1/2a) g|_2
    for s in 0..=steps {
        let t = s as f64 * fv.dt;
        if s % sample_every == 0 || s == steps {
            // nearest modal sample (the modal grid is much finer or equal)
            let k = ((t / modal_dt).round() as usize).min(modal.mu.len() - 1);
            let x = reconstruct_field(&basis, &modal.mu[k]);
            let diff: Vec<f64> = (0..g.n).map(|i| x[i] - u[i]).collect();
            let d = g.weighted_norm(&diff, weight, 2.0, &data.phi0, &data.rho0);
            per_time.push((t, d));
            worst = worst.max(d);
        }
        if s < steps {
            u = solver::step_frozen(&u, t, data, fv.dt, fv.theta, eta_bar_x);
        }
    }
    CrossValidation { discrepancy: worst, per_time }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::initial::VelocityKind;

    fn identity(_t: f64, _x: f64) -> f64 {
        1.0
    }

    #[test]
    fn basis_orthonormal_under_trapezoid() {
        let g = make_grid(801);
        let b = build_basis(8, &g);
        for j in 0..8 {
            for k in 0..8 {
                let mut s = 0.0;
                for i in 0..g.n {
                    s += g.quad_weight(i) * b.modes[j][i] * b.modes[k][i];
                }
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10, "<e{j},e{k}> = {s}");
            }
        }
        // Neumann endpoints are exact
        for j in 0..8 {
            assert_eq!(b.dmodes[j][0], 0.0);
            assert_eq!(b.dmodes[j][g.n - 1], 0.0);
        }
        // eigenvalue formula
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((b.eigenvalues[1] - (1.0 + pi2)).abs() < 1e-12);
        assert!((b.eigenvalues[1] - 10.8696).abs() < 1e-3);
    }

    #[test]
    #[should_panic]
    fn resolution_guard() {
        let g = make_grid(64);
        build_basis(17, &g);
    }

    #[test]
    fn mass_matrix_entry_closed_form() {
        // alpha = 1, amplitude 1: weight = phi0 = x(1-x), A_00 = 1/6
        let g = make_grid(801);
        let d = InitialData::new(1.0, 1.0, VelocityKind::Zero, g);
        let b = build_basis(4, &d.grid);
        let sys = assemble(&b, &d, &identity, 0.0);
        assert!((sys.a[0][0] - 1.0 / 6.0).abs() < 1e-6, "A00 = {}", sys.a[0][0]);
        // symmetry to roundoff
        for j in 0..4 {
            for k in 0..4 {
                assert!((sys.a[j][k] - sys.a[k][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn modal_scalar_exponential_decay() {
        // A = 1, B = b, C = 0 (hand-built): mu(t) = mu0 e^{-bt}
        let l = cholesky(&[vec![1.0]]);
        let _ = l;
        let g = make_grid(64);
        let d = InitialData::new(1.0, 1.0, VelocityKind::Zero, g);
        let b = build_basis(1, &d.grid);
        // overwrite: run RK4 directly on the scalar system using solve_modal
        // machinery is overkill; integrate by hand to validate axpy etc.
        let bval = 2.3;
        let mut mu = 0.7;
        let dt = 1e-4;
        for _ in 0..10_000 {
            let k1 = -bval * mu;
            let k2 = -bval * (mu + 0.5 * dt * k1);
            let k3 = -bval * (mu + 0.5 * dt * k2);
            let k4 = -bval * (mu + dt * k3);
            mu += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let exact = 0.7 * (-bval * 1.0f64).exp();
        assert!((mu - exact).abs() < 1e-8, "{mu} vs {exact}");
        let _ = b;
    }

    #[test]
    fn zero_load_zero_data_stays_zero() {
        let g = make_grid(201);
        let d = InitialData::new(1.0, 6.0, VelocityKind::Zero, g);
        let b = build_basis(8, &d.grid);
        let mu0 = vec![0.0; 8];
        // kill the load by assembling with the real system but projecting the
        // trajectory of the homogeneous equation: use C = 0 via a custom run
        let sys = assemble(&b, &d, &identity, 0.0);
        let l = cholesky(&sys.a);
        let mut mu = mu0;
        let dt = 1e-4;
        for _ in 0..100 {
            let r: Vec<f64> = (0..8)
                .map(|j| -(0..8).map(|k| sys.b[j][k] * mu[k]).sum::<f64>())
                .collect();
            let f = chol_solve(&l, &r);
            for j in 0..8 {
                mu[j] += dt * f[j];
            }
        }
        for v in mu {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn parseval_for_reconstruction() {
        let g = make_grid(801);
        let b = build_basis(8, &g);
        let mu: Vec<f64> = (0..8).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let x = reconstruct_field(&b, &mu);
        let norm2 = g.norm(&x, 2.0).powi(2);
        let sum2: f64 = mu.iter().map(|v| v * v).sum();
        assert!((norm2 - sum2).abs() < 1e-8, "{norm2} vs {sum2}");
        // mu = (1, 0, ...) reconstructs the constant 1
        let one = reconstruct_field(&b, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        for v in one {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rk4_and_picard_agree() {
        let g = make_grid(201);
        let d = InitialData::new(
            1.0,
            6.0,
            VelocityKind::Bump { center: 0.5, radius: 0.25, amplitude: 1.0 },
            g,
        );
        let b = build_basis(8, &d.grid);
        let mu0 = project(&b, &d.grid, &d.u0);
        let dt = 2e-5;
        let t_end = 0.02;
        let a = solve_modal(&b, &d, &identity, false, &mu0, dt, t_end, ModalMethod::Rk4);
        let p =
            solve_modal(&b, &d, &identity, false, &mu0, dt, t_end, ModalMethod::PicardIntegral);
        let ka = a.mu.len() - 1;
        let kp = p.mu.len() - 1;
        for q in 0..8 {
            assert!(
                (a.mu[ka][q] - p.mu[kp][q]).abs() < 1e-6,
                "mode {q}: rk4 {} vs picard {}",
                a.mu[ka][q],
                p.mu[kp][q]
            );
        }
    }

    #[test]
    fn galerkin_energy_bounded_in_modes() {
        // |phi0^(1/2a) X|² + ∫ |phi0^(1/2a) X_x|² stays bounded as the mode
        // count grows (constants independent of n_modes)
        let mut worst = Vec::new();
        for n_modes in [8usize, 16, 32] {
            let g = make_grid(401);
            let d = InitialData::new(
                1.0,
                6.0,
                VelocityKind::Bump { center: 0.5, radius: 0.25, amplitude: 1.0 },
                g,
            );
            let b = build_basis(n_modes, &d.grid);
            let mu0 = project(&b, &d.grid, &d.u0);
            let tr = solve_modal(&b, &d, &identity, false, &mu0, 1e-5, 0.05, ModalMethod::Rk4);
            let mut peak = 0.0f64;
            for mu in tr.mu.iter().step_by(500) {
                let x = reconstruct_field(&b, mu);
                let e = d.phi0_norm(&x, 1.0 / d.alpha).powi(2);
                peak = peak.max(e);
            }
            worst.push(peak);
        }
        // monotone-in-n boundedness: no blow-up with mode count
        assert!(worst[2] < 1.1 * worst[0] + 1e-9, "energies {worst:?}");
    }
}
