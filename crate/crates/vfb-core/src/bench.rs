//! Numerical exercise of the weighted functional inequalities.
//!
//! Each check evaluates the ratio left-side/right-side of one inequality
//! over a family of test functions and reports the worst case together
//! with its stability under one grid doubling. A finite, refinement-stable
//! maximal ratio is numerical evidence that the constant in the inequality
//! exists; the reported value is an empirical lower bound for it, not a
//! sharp constant.
//!
//! Weights d^beta with beta in (-1, 0) are singular at the endpoints;
//! plain trapezoid quadrature underestimates their near-boundary mass, so
//! the two endpoint intervals are integrated by the local power-law closed
//! form instead.

use crate::grid::{self, Grid};
use crate::initial::InitialData;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// A test function with analytic first derivative, sampled on demand.
#[derive(Clone)]
pub struct Member {
    pub name: String,
    pub f: fn(f64, &[f64]) -> f64,
    pub fx: fn(f64, &[f64]) -> f64,
    pub params: Vec<f64>,
}

impl Member {
    pub fn sample(&self, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
        let f = grid.nodes.iter().map(|&x| (self.f)(x, &self.params)).collect();
        let fx = grid.nodes.iter().map(|&x| (self.fx)(x, &self.params)).collect();
        (f, fx)
    }
}

impl fmt::Debug for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Member({})", self.name)
    }
}

/// Families of test functions.
#[derive(Debug, Clone)]
pub enum TestFamily {
    Polynomial { max_degree: usize },
    Trig { max_freq: usize },
    Bump { params: Vec<(f64, f64, f64)> },
    RandomSmooth { seed: u64, count: usize },
}

fn poly(x: f64, p: &[f64]) -> f64 {
    x.powi(p[0] as i32)
}
fn dpoly(x: f64, p: &[f64]) -> f64 {
    let d = p[0];
    if d == 0.0 { 0.0 } else { d * x.powi(d as i32 - 1) }
}
fn poly_mirror(x: f64, p: &[f64]) -> f64 {
    (1.0 - x).powi(p[0] as i32)
}
fn dpoly_mirror(x: f64, p: &[f64]) -> f64 {
    let d = p[0];
    if d == 0.0 { 0.0 } else { -d * (1.0 - x).powi(d as i32 - 1) }
}
fn cosk(x: f64, p: &[f64]) -> f64 {
    (p[0] * std::f64::consts::PI * x).cos()
}
fn dcosk(x: f64, p: &[f64]) -> f64 {
    let k = p[0] * std::f64::consts::PI;
    -k * (k * x).sin()
}
fn sink(x: f64, p: &[f64]) -> f64 {
    (p[0] * std::f64::consts::PI * x).sin()
}
fn dsink(x: f64, p: &[f64]) -> f64 {
    let k = p[0] * std::f64::consts::PI;
    k * (k * x).cos()
}
fn bumpf(x: f64, p: &[f64]) -> f64 {
    let s = (x - p[0]) / p[1];
    let u = 1.0 - s * s;
    if u <= 1e-8 { 0.0 } else { p[2] * (-1.0 / u).exp() }
}
fn dbumpf(x: f64, p: &[f64]) -> f64 {
    let s = (x - p[0]) / p[1];
    let u = 1.0 - s * s;
    if u <= 1e-8 { 0.0 } else { bumpf(x, p) * (-2.0 * s / (u * u)) / p[1] }
}
fn fourier(x: f64, p: &[f64]) -> f64 {
    let mut s = 0.0;
    for (k, c) in p.iter().enumerate() {
        s += c * (k as f64 * std::f64::consts::PI * x).cos();
    }
    s
}
fn dfourier(x: f64, p: &[f64]) -> f64 {
    let mut s = 0.0;
    for (k, c) in p.iter().enumerate() {
        let kp = k as f64 * std::f64::consts::PI;
        s -= c * kp * (kp * x).sin();
    }
    s
}
/// e^{-x}: the member that annihilates F + F_x identically.
pub fn exp_decay_member() -> Member {
    Member {
        name: "exp(-x)".into(),
        f: |x, _| (-x).exp(),
        fx: |x, _| -(-x).exp(),
        params: vec![],
    }
}

impl TestFamily {
    pub fn members(&self) -> Vec<Member> {
        match self {
            TestFamily::Polynomial { max_degree } => {
                let mut m = Vec::new();
                for d in 0..=*max_degree {
                    m.push(Member {
                        name: format!("x^{d}"),
                        f: poly,
                        fx: dpoly,
                        params: vec![d as f64],
                    });
                    if d > 0 {
                        m.push(Member {
                            name: format!("(1-x)^{d}"),
                            f: poly_mirror,
                            fx: dpoly_mirror,
                            params: vec![d as f64],
                        });
                    }
                }
                m
            }
            TestFamily::Trig { max_freq } => {
                let mut m = vec![Member {
                    name: "1".into(),
                    f: poly,
                    fx: dpoly,
                    params: vec![0.0],
                }];
                for k in 1..=*max_freq {
                    m.push(Member {
                        name: format!("cos({k}pi x)"),
                        f: cosk,
                        fx: dcosk,
                        params: vec![k as f64],
                    });
                    m.push(Member {
                        name: format!("sin({k}pi x)"),
                        f: sink,
                        fx: dsink,
                        params: vec![k as f64],
                    });
                }
                m
            }
            TestFamily::Bump { params } => params
                .iter()
                .map(|&(c, r, a)| Member {
                    name: format!("bump({c},{r},{a})"),
                    f: bumpf,
                    fx: dbumpf,
                    params: vec![c, r, a],
                })
                .collect(),
            TestFamily::RandomSmooth { seed, count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|i| {
                        let coefs: Vec<f64> = (0..7)
                            .map(|k| {
                                rng.gen_range(-1.0..1.0) / (1.0 + (k * k) as f64)
                            })
                            .collect();
                        Member {
                            name: format!("random[{i}]"),
                            f: fourier,
                            fx: dfourier,
                            params: coefs,
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Parameter rejected by an inequality's hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamError(pub String);

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "hypothesis violated: {}", self.0)
    }
}

impl std::error::Error for ParamError {}

/// Worst-case ratio of one inequality over a family, with its refinement
/// stability.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub case: String,
    pub params: String,
    pub max_ratio: f64,
    pub argmax: String,
    pub ratio_at_n: f64,
    pub ratio_at_2n: f64,
    pub stable: bool,
    /// Members skipped as degenerate (0/0) or flagged (finite numerator
    /// over vanishing denominator).
    pub notes: Vec<String>,
}

/// ∫ d(x)^beta g(x) dx with the endpoint intervals integrated by the local
/// power-law closed form when beta < 0 (g frozen at the first interior
/// node there). For beta >= 0 this is the plain dropped-endpoint trapezoid.
pub fn singular_distance_integral(grid: &Grid, g: &[f64], beta: f64) -> f64 {
    let n = grid.n;
    let h = grid.h;
    let mut s = 0.0;
    // interior trapezoid over [x_1, x_{n-2}]
    for i in 1..n - 2 {
        let wa = grid::distance(grid.nodes[i]).powf(beta) * g[i];
        let wb = grid::distance(grid.nodes[i + 1]).powf(beta) * g[i + 1];
        s += 0.5 * h * (wa + wb);
    }
    if beta < 0.0 {
        // ∫_0^h x^beta dx = h^(beta+1)/(beta+1), integrand frozen at x_1
        s += g[1] * h.powf(beta + 1.0) / (beta + 1.0);
        s += g[n - 2] * h.powf(beta + 1.0) / (beta + 1.0);
    } else {
        s += 0.5 * h * (grid::distance(grid.nodes[0]).powf(beta) * g[0]
            + grid::distance(grid.nodes[1]).powf(beta) * g[1]);
        s += 0.5 * h
            * (grid::distance(grid.nodes[n - 2]).powf(beta) * g[n - 2]
                + grid::distance(grid.nodes[n - 1]).powf(beta) * g[n - 1]);
    }
    s
}

fn dist_norm(grid: &Grid, f: &[f64], full_exponent: f64, p: f64) -> f64 {
    if p.is_infinite() {
        let mut m = 0.0f64;
        for i in 0..grid.n {
            let w = grid::distance(grid.nodes[i]).powf(full_exponent);
            let v = if full_exponent == 0.0 { f[i].abs() } else { (w * f[i]).abs() };
            if v.is_finite() {
                m = m.max(v);
            }
        }
        return m;
    }
    let g: Vec<f64> = f.iter().map(|v| v.abs().powf(p)).collect();
    singular_distance_integral(grid, &g, full_exponent).powf(1.0 / p)
}

struct RatioCase<'a> {
    name: String,
    params: String,
    family: &'a TestFamily,
    grid: &'a Grid,
}

impl<'a> RatioCase<'a> {
    /// Evaluate max ratio over the family at the given grid, via a closure
    /// (numerator, denominator) per member.
    fn max_ratio(
        &self,
        grid: &Grid,
        eval: &dyn Fn(&Member, &Grid) -> (f64, f64),
        notes: &mut Vec<String>,
    ) -> (f64, String) {
        let mut best = 0.0f64;
        let mut argmax = String::new();
        for m in self.family.members() {
            let (num, den) = eval(&m, grid);
            if den < 1e-13 {
                if num < 1e-13 {
                    notes.push(format!("{}: skipped (0/0 degenerate)", m.name));
                } else {
                    notes.push(format!(
                        "{}: excluded (right side vanishes on this member; \
                         discrete exception, not a counterexample)",
                        m.name
                    ));
                }
                continue;
            }
            let r = num / den;
            if r > best {
                best = r;
                argmax = m.name.clone();
            }
        }
        (best, argmax)
    }

    fn report(
        self,
        eval: &dyn Fn(&Member, &Grid) -> (f64, f64),
        extra_members: &[Member],
    ) -> RatioReport {
        let mut notes = Vec::new();
        let refined = grid::make_grid(2 * (self.grid.n - 1) + 1);
        // fold extra members in by a temporary family wrapper
        let (mut r1, mut arg1) = self.max_ratio(self.grid, eval, &mut notes);
        let (r2_base, _) = self.max_ratio(&refined, eval, &mut Vec::new());
        let mut r2 = r2_base;
        for m in extra_members {
            for (g, r, arg) in [
                (self.grid, &mut r1, Some(&mut arg1)),
                (&refined, &mut r2, None),
            ] {
                let (num, den) = eval(m, g);
                if den < 1e-13 {
                    if num >= 1e-13 && arg.is_some() {
                        notes.push(format!(
                            "{}: excluded (right side vanishes on this member; \
                             discrete exception, not a counterexample)",
                            m.name
                        ));
                    }
                    continue;
                }
                let v = num / den;
                if v > *r {
                    *r = v;
                    if let Some(a) = arg {
                        *a = m.name.clone();
                    }
                }
            }
        }
        let stable = (r2 - r1).abs() < 0.1 * r1.max(1e-12);
        RatioReport {
            case: self.name,
            params: self.params,
            max_ratio: r1,
            argmax: arg1,
            ratio_at_n: r1,
            ratio_at_2n: r2,
            stable,
            notes,
        }
    }
}

/// Weighted interpolation ratio
/// |d^(k/2) F|_2 / (|d^((k+1)/2) F|_2 + |d^((k+1)/2) F|_2^(1/2) |d^((k+1)/2) F_x|_2^(1/2)),
/// admissible for k > -1.
pub fn gn_check(k: f64, family: &TestFamily, grid: &Grid) -> Result<RatioReport, ParamError> {
    if k <= -1.0 {
        return Err(ParamError(format!("interpolation inequality needs k > -1, got {k}")));
    }
    let case = RatioCase { name: "gn".into(), params: format!("k={k}"), family, grid };
    Ok(case.report(
        &move |m: &Member, g: &Grid| {
            let (f, fx) = m.sample(g);
            let lhs = dist_norm(g, &f, k, 2.0);
            let a = dist_norm(g, &f, k + 1.0, 2.0);
            let b = dist_norm(g, &fx, k + 1.0, 2.0);
            (lhs, a + a.sqrt() * b.sqrt())
        },
        &[],
    ))
}

/// Hardy-inequality variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HardyVariant {
    /// |d^(k/2) F|_2 <= C |d^(k/2+1)(F + F_x)|_2, k > -1.
    A7 { k: f64 },
    /// |d^k F|_1 <= C |d^(k+3/2-eps)(F + F_x)|_2, k + 1 > eps > 0.
    A6 { k: f64, eps: f64 },
    /// |d^k F|_inf <= C |d^(k+1/2)(F + F_x)|_2, k > 0.
    A8 { k: f64 },
}

/// Hardy ratios; members with F + F_x = 0 are excluded with a note (the
/// continuum right side vanishes only for F = 0 in the weighted class).
pub fn hardy_check(
    variant: HardyVariant,
    family: &TestFamily,
    grid: &Grid,
    include_exp_member: bool,
) -> Result<RatioReport, ParamError> {
    let (name, params);
    match variant {
        HardyVariant::A7 { k } => {
            if k <= -1.0 {
                return Err(ParamError(format!("A7 needs k > -1, got {k}")));
            }
            name = "hardy-A7";
            params = format!("k={k}");
        }
        HardyVariant::A6 { k, eps } => {
            if !(eps > 0.0 && k + 1.0 > eps) {
                return Err(ParamError(format!("A6 needs k+1 > eps > 0, got k={k}, eps={eps}")));
            }
            name = "hardy-A6";
            params = format!("k={k},eps={eps}");
        }
        HardyVariant::A8 { k } => {
            if k <= 0.0 {
                return Err(ParamError(format!("A8 needs k > 0, got {k}")));
            }
            name = "hardy-A8";
            params = format!("k={k}");
        }
    }
    let case = RatioCase { name: name.into(), params, family, grid };
    let extras = if include_exp_member { vec![exp_decay_member()] } else { vec![] };
    Ok(case.report(
        &move |m: &Member, g: &Grid| {
            let (f, fx) = m.sample(g);
            let sum: Vec<f64> = f.iter().zip(&fx).map(|(a, b)| a + b).collect();
            match variant {
                HardyVariant::A7 { k } => {
                    (dist_norm(g, &f, k, 2.0), dist_norm(g, &sum, k + 2.0, 2.0))
                }
                HardyVariant::A6 { k, eps } => (
                    dist_norm(g, &f, k, 1.0),
                    dist_norm(g, &sum, 2.0 * (k + 1.5 - eps), 2.0),
                ),
                HardyVariant::A8 { k } => (
                    dist_norm(g, &f, k, f64::INFINITY),
                    dist_norm(g, &sum, 2.0 * k + 1.0, 2.0),
                ),
            }
        },
        &extras,
    ))
}

/// Cross-derivative embedding ratio
/// |phi0^s F_x|_2 / (|phi0^s F_x + kappa phi0^(s-1)(phi0)_x F|_2
///                   + |(phi0)_xx|_inf |phi0^s F|_2),
/// admissible for 1/2 < s <= (kappa+1)/2 and r in [s, (kappa+1)/2].
pub fn embedding_check(
    s: f64,
    kappa: f64,
    r: f64,
    family: &TestFamily,
    data: &InitialData,
) -> Result<RatioReport, ParamError> {
    if !(s > 0.5 && s <= 0.5 * (kappa + 1.0)) {
        return Err(ParamError(format!(
            "embedding needs 1/2 < s <= (kappa+1)/2, got s={s}, kappa={kappa}"
        )));
    }
    if !(r >= s && r <= 0.5 * (kappa + 1.0)) {
        return Err(ParamError(format!(
            "embedding needs r in [s, (kappa+1)/2], got r={r}"
        )));
    }
    let grid = &data.grid;
    let phi_xx_sup = data.phi0_dx[1].iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let case = RatioCase { name: "embedding".into(), params: format!("s={s},kappa={kappa},r={r}"), family, grid };
    let data = data.clone();
    Ok(case.report(
        &move |m: &Member, g: &Grid| {
            // resample the profile on the working grid
            let d = if g.n == data.grid.n { data.clone() } else { data.resample(g.n) };
            let (f, fx) = m.sample(g);
            let lhs_int: Vec<f64> =
                (0..g.n).map(|i| d.phi0[i].powf(2.0 * s) * fx[i] * fx[i]).collect();
            let lhs = g.integrate(&lhs_int).sqrt();
            // crossing term: integrand ~ phi0^(2s-2) near the boundary;
            // endpoint intervals by the local power law
            let mut cross = vec![0.0; g.n];
            for i in 1..g.n - 1 {
                let v = d.phi0[i].powf(s) * fx[i]
                    + kappa * d.phi0[i].powf(s - 1.0) * d.phi0_dx[0][i] * f[i];
                cross[i] = v * v;
            }
            let cross_scaled: Vec<f64> = (0..g.n)
                .map(|i| {
                    if i == 0 || i == g.n - 1 {
                        0.0
                    } else {
                        cross[i] / grid::distance(g.nodes[i]).powf(2.0 * s - 2.0)
                    }
                })
                .collect();
            let cross_norm =
                singular_distance_integral(g, &cross_scaled, 2.0 * s - 2.0).sqrt();
            let f_int: Vec<f64> =
                (0..g.n).map(|i| d.phi0[i].powf(2.0 * s) * f[i] * f[i]).collect();
            let f_norm = g.integrate(&f_int).sqrt();
            (lhs, cross_norm + phi_xx_sup * f_norm)
        },
        &[],
    ))
}

/// Sobolev embedding ratio |F|_inf / (|F|_1 + |F_x|_1).
pub fn sobolev_check(family: &TestFamily, grid: &Grid) -> RatioReport {
    let case = RatioCase { name: "sobolev".into(), params: String::new(), family, grid };
    case.report(
        &|m: &Member, g: &Grid| {
            let (f, fx) = m.sample(g);
            let sup = f.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            (sup, g.norm(&f, 1.0) + g.norm(&fx, 1.0))
        },
        &[],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::initial::VelocityKind;

    fn one_member() -> TestFamily {
        TestFamily::Polynomial { max_degree: 0 }
    }

    #[test]
    fn gn_unit_function_closed_form() {
        // F = 1, k = 0: lhs = 1, rhs = |d^(1/2)|_2 = 1/2, ratio = 2
        let g = make_grid(801);
        let r = gn_check(0.0, &one_member(), &g).unwrap();
        assert!((r.max_ratio - 2.0).abs() < 0.02, "ratio {}", r.max_ratio);
        assert!(r.stable);
    }

    #[test]
    fn gn_rejects_bad_k() {
        let g = make_grid(64);
        assert!(gn_check(-1.0, &one_member(), &g).is_err());
    }

    #[test]
    fn gn_stable_on_polynomials() {
        let g = make_grid(401);
        let fam = TestFamily::Polynomial { max_degree: 4 };
        let r = gn_check(0.0, &fam, &g).unwrap();
        assert!(r.stable, "{r:?}");
        // singular-weight case too
        let r = gn_check(-0.5, &fam, &g).unwrap();
        assert!(r.stable && r.max_ratio.is_finite(), "{r:?}");
    }

    #[test]
    fn hardy_a7_unit_function_closed_form() {
        // F = 1, k = 0: lhs = 1, rhs = |d|_2 = sqrt(1/12), ratio = sqrt(12)
        let g = make_grid(801);
        let r = hardy_check(HardyVariant::A7 { k: 0.0 }, &one_member(), &g, false).unwrap();
        assert!((r.max_ratio - 12.0f64.sqrt()).abs() < 0.035, "ratio {}", r.max_ratio);
        assert!((r.max_ratio - 3.4641).abs() < 0.035);
    }

    #[test]
    fn hardy_a8_unit_function() {
        // F = 1, k = 1: lhs = sup d = 1/2; rhs = |d^(3/2)|_2 = sqrt(1/32)
        let g = make_grid(801);
        let r = hardy_check(HardyVariant::A8 { k: 1.0 }, &one_member(), &g, false).unwrap();
        let expect = 0.5 / (1.0f64 / 32.0).sqrt();
        assert!((r.max_ratio - expect).abs() < 0.02, "ratio {} vs {expect}", r.max_ratio);
    }

    #[test]
    fn hardy_exponential_member_excluded() {
        // F = e^{-x} makes F + F_x = 0: flagged and excluded, not a failure
        let g = make_grid(401);
        let r = hardy_check(HardyVariant::A7 { k: 0.0 }, &one_member(), &g, true).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("exp(-x)")), "{:?}", r.notes);
        assert!(r.max_ratio.is_finite());
    }

    #[test]
    fn hardy_gates() {
        let g = make_grid(64);
        assert!(hardy_check(HardyVariant::A7 { k: -1.5 }, &one_member(), &g, false).is_err());
        assert!(
            hardy_check(HardyVariant::A6 { k: 0.0, eps: 1.5 }, &one_member(), &g, false)
                .is_err()
        );
        assert!(hardy_check(HardyVariant::A8 { k: 0.0 }, &one_member(), &g, false).is_err());
    }

    #[test]
    fn embedding_constant_function_ratio_zero() {
        let d = InitialData::new(1.0, 6.0, VelocityKind::Zero, make_grid(101));
        let r = embedding_check(1.0, 2.0, 1.0, &one_member(), &d).unwrap();
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn embedding_gate_rejects_small_s() {
        let d = InitialData::new(1.0, 6.0, VelocityKind::Zero, make_grid(101));
        assert!(embedding_check(0.4, 2.0, 0.4, &TestFamily::Polynomial { max_degree: 3 }, &d)
            .is_err());
    }

    #[test]
    fn embedding_finite_on_polynomials() {
        let d = InitialData::new(1.0, 6.0, VelocityKind::Zero, make_grid(401));
        let fam = TestFamily::Polynomial { max_degree: 4 };
        let r = embedding_check(1.0, 2.0, 1.0, &fam, &d).unwrap();
        assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
        assert!(r.stable, "{r:?}");
    }

    #[test]
    fn sobolev_closed_forms() {
        let g = make_grid(801);
        let r = sobolev_check(&one_member(), &g);
        assert!((r.max_ratio - 1.0).abs() < 1e-6, "ratio {}", r.max_ratio);
        let fam = TestFamily::Trig { max_freq: 2 };
        let r = sobolev_check(&fam, &g);
        // the family's worst case includes sin(2 pi x):
        // 1/(2/pi + 4) ~ 0.2157 is one of its ratios; the constant wins with 1.0
        assert!(r.max_ratio >= 1.0 - 1e-9);
    }

    #[test]
    fn sobolev_sin2pi_value() {
        let g = make_grid(801);
        let fam = TestFamily::Bump { params: vec![] };
        let _ = fam;
        let member = Member {
            name: "sin(2pi x)".into(),
            f: sink,
            fx: dsink,
            params: vec![2.0],
        };
        let (f, fx) = member.sample(&g);
        let sup = f.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        let ratio = sup / (g.norm(&f, 1.0) + g.norm(&fx, 1.0));
        assert!((ratio - 0.2157).abs() < 0.002, "ratio {ratio}");
    }

    #[test]
    fn ratios_scale_invariant() {
        // both sides of every check are 1-homogeneous in F
        let g = make_grid(201);
        let lam = 2.7;
        let base = Member { name: "x^3".into(), f: poly, fx: dpoly, params: vec![3.0] };
        let scaled = Member {
            name: "lam x^3".into(),
            f: |x, p| p[1] * x.powi(p[0] as i32),
            fx: |x, p| p[1] * p[0] * x.powi(p[0] as i32 - 1),
            params: vec![3.0, lam],
        };
        let (f, fx) = base.sample(&g);
        let (sf, sfx) = scaled.sample(&g);
        // gn ratio
        let ratio = |f: &[f64], fx: &[f64]| {
            let lhs = dist_norm(&g, f, 0.5, 2.0);
            let a = dist_norm(&g, f, 1.5, 2.0);
            let b = dist_norm(&g, fx, 1.5, 2.0);
            lhs / (a + a.sqrt() * b.sqrt())
        };
        let r1 = ratio(&f, &fx);
        let r2 = ratio(&sf, &sfx);
        assert!((r1 - r2).abs() < 1e-12 * r1, "{r1} vs {r2}");
    }

    #[test]
    fn singular_integral_matches_closed_form() {
        // ∫ d^(-1/2) dx = 2 ∫_0^(1/2) x^(-1/2) dx = 2 sqrt(2)
        let g = make_grid(801);
        let ones = vec![1.0; g.n];
        let v = singular_distance_integral(&g, &ones, -0.5);
        let exact = 2.0 * (0.5f64).sqrt() * 2.0;
        assert!((v - exact).abs() < 0.01, "{v} vs {exact}");
    }
}
