//! Discretization of the reference interval I = (0,1).
//!
//! Everything downstream (initial data, the Lagrangian solver, diagnostics,
//! the spectral oracle, the inequality bench) shares one vertex-centered
//! uniform grid that includes both endpoints, so the degeneracy points
//! x = 0 and x = 1 are grid nodes where the depth vanishes exactly.
//!
//! Quadrature is composite trapezoid. Weighted norms follow one fixed
//! convention: `weighted_norm` computes (∫ w(x) |f(x)|^p dx)^(1/p) where the
//! supplied weight already carries its full exponent. Weights that blow up
//! at the endpoints contribute nothing there (the endpoint terms are
//! dropped); this is valid exactly when the weighted integrand extends
//! continuously by zero, which holds at every call site in this crate.

/// Uniform vertex-centered grid on [0, 1] with `n` nodes, including both
/// endpoints, and the n-1 face midpoints between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Node count (>= 16 for the difference stencils).
    pub n: usize,
    /// Node coordinates x_i = i*h.
    pub nodes: Vec<f64>,
    /// Face midpoints x_{i+1/2}.
    pub faces: Vec<f64>,
    /// Node spacing h = 1/(n-1).
    pub h: f64,
}

/// Base function of a quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightBase {
    /// Distance to the boundary, d(x) = min(x, 1-x).
    Distance,
    /// The profile phi0 = rho0^alpha of the attached initial data.
    Phi0,
    /// The initial depth rho0.
    Rho0,
}

/// A weight w(x) = base(x)^exponent used inside weighted norms.
///
/// The exponent is the *full* power of the integrand weight; callers that
/// want the norm |omega^{p/2} f|_2 pass the squared weight here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub base: WeightBase,
    pub exponent: f64,
}

impl WeightSpec {
    pub fn distance(exponent: f64) -> Self {
        WeightSpec { base: WeightBase::Distance, exponent }
    }
    pub fn phi0(exponent: f64) -> Self {
        WeightSpec { base: WeightBase::Phi0, exponent }
    }
    pub fn rho0(exponent: f64) -> Self {
        WeightSpec { base: WeightBase::Rho0, exponent }
    }
    /// The constant weight w = 1.
    pub fn one() -> Self {
        WeightSpec { base: WeightBase::Distance, exponent: 0.0 }
    }
}

/// Distance from x to the boundary of [0,1].
pub fn distance(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "coordinate {x} outside [0,1]");
    x.min(1.0 - x)
}

/// Build the uniform grid with `n >= 16` nodes.
pub fn make_grid(n: usize) -> Grid {
    assert!(n >= 16, "grid needs at least 16 nodes, got {n}");
    let h = 1.0 / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    nodes[n - 1] = 1.0; // exact endpoint regardless of rounding in h
    let faces: Vec<f64> = (0..n - 1).map(|i| 0.5 * (nodes[i] + nodes[i + 1])).collect();
    Grid { n, nodes, faces, h }
}

impl Grid {
    /// Trapezoid quadrature weight of node i (h/2 at the endpoints, h inside).
    pub fn quad_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 { 0.5 * self.h } else { self.h }
    }

    /// Composite-trapezoid integral of node samples.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n);
        let mut s = 0.5 * (f[0] + f[self.n - 1]);
        for v in &f[1..self.n - 1] {
            s += v;
        }
        s * self.h
    }

    /// Weight samples w(x_i) = base(x_i)^exponent.
    ///
    /// `phi0` supplies the profile samples when the base refers to them;
    /// it may be empty for distance weights. Endpoint values of singular
    /// weights (negative exponents) come out infinite here; the norm
    /// routines below drop those contributions.
    pub fn weight_samples(&self, w: WeightSpec, phi0: &[f64], rho0: &[f64]) -> Vec<f64> {
        let base_val = |i: usize| -> f64 {
            match w.base {
                WeightBase::Distance => distance(self.nodes[i]),
                WeightBase::Phi0 => phi0[i],
                WeightBase::Rho0 => rho0[i],
            }
        };
        (0..self.n)
            .map(|i| {
                if w.exponent == 0.0 {
                    1.0
                } else {
                    base_val(i).powf(w.exponent)
                }
            })
            .collect()
    }

    /// Weighted L^p norm (∫ w |f|^p dx)^(1/p); `p = f64::INFINITY` takes the
    /// max over nodes of w^(1/p)->1 ... i.e. max_i |w(x_i) f(x_i)| (or just
    /// max |f| when w is the constant weight).
    ///
    /// Endpoint terms where the weight is not finite are dropped.
    pub fn weighted_norm(&self, f: &[f64], w: WeightSpec, p: f64, phi0: &[f64], rho0: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n, "sample count must match grid");
        assert!(p >= 1.0, "p must be >= 1, got {p}");
        let ws = self.weight_samples(w, phi0, rho0);
        if p.is_infinite() {
            let unit = w.exponent == 0.0;
            let mut m: f64 = 0.0;
            for i in 0..self.n {
                let v = if unit { f[i].abs() } else { (ws[i] * f[i]).abs() };
                if v.is_finite() {
                    m = m.max(v);
                }
            }
            return m;
        }
        let mut s = 0.0;
        for i in 0..self.n {
            let term = ws[i] * f[i].abs().powf(p);
            if term.is_finite() {
                s += self.quad_weight(i) * term;
            }
        }
        s.powf(1.0 / p)
    }

    /// Convenience for unweighted norms against distance^0.
    pub fn norm(&self, f: &[f64], p: f64) -> f64 {
        self.weighted_norm(f, WeightSpec::one(), p, &[], &[])
    }
}

/// k-th derivative samples of `f` on the grid, second-order accurate:
/// centered stencils in the interior, one-sided (of the same order) at and
/// near the endpoints. Supports orders 1..=4.
pub fn derivative(grid: &Grid, f: &[f64], order: usize) -> Vec<f64> {
    assert!((1..=4).contains(&order), "derivative order {order} outside 1..=4");
    assert_eq!(f.len(), grid.n);
    assert!(grid.n >= order + 3, "grid too small for stencil of order {order}");
    let n = grid.n;
    let h = grid.h;
    // Centered window sizes giving O(h^2): 3 points for orders 1-2, 5 for 3-4.
    let centered = if order <= 2 { 3 } else { 5 };
    // Shifted windows lose the symmetry bonus; even orders need one more point.
    let shifted = order + 2 + if order % 2 == 0 { 1 } else { 0 };
    let mut out = vec![0.0; n];
    for i in 0..n {
        let half = centered / 2;
        let (start, len) = if i >= half && i + half < n {
            (i - half, centered)
        } else {
            let len = shifted.max(centered);
            (if i < half { 0 } else { n - len }, len)
        };
        let offsets: Vec<f64> = (0..len).map(|j| (start + j) as f64 - i as f64).collect();
        let w = fornberg_weights(&offsets, order);
        let mut acc = 0.0;
        for (j, wj) in w.iter().enumerate() {
            acc += wj * f[start + j];
        }
        out[i] = acc / h.powi(order as i32);
    }
    out
}

/// Finite-difference weights for the m-th derivative at offset 0 from node
/// offsets `z` (in units of h), by Fornberg's recursion.
pub fn fornberg_weights(z: &[f64], m: usize) -> Vec<f64> {
    let nd = z.len();
    assert!(nd > m, "need more than {m} points for the {m}-th derivative");
    // c[k][j]: weight of node j for the k-th derivative.
    let mut c = vec![vec![0.0; nd]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = z[0];
    for i in 1..nd {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = z[i];
        for j in 0..i {
            let c3 = z[i] - z[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c[m].clone()
}
