//! Truncated Taylor arithmetic: values together with derivatives up to
//! order four, propagated exactly through elementary operations.
//!
//! The initial-data profiles (mollifier bumps, power-law depth profiles,
//! cumulative-integral velocities) need spatial derivatives up to fourth
//! order at every node. Hand-expanding those is error prone; pushing a jet
//! of the coordinate through the closed-form profile gives them exactly.

/// Value and derivatives d^0..d^4 of a scalar function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    /// d[k] is the k-th derivative.
    pub d: [f64; 5],
}

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

impl Jet {
    pub fn constant(c: f64) -> Jet {
        Jet { d: [c, 0.0, 0.0, 0.0, 0.0] }
    }

    /// The identity function at x.
    pub fn variable(x: f64) -> Jet {
        Jet { d: [x, 1.0, 0.0, 0.0, 0.0] }
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut d = [0.0; 5];
        for k in 0..5 {
            d[k] = self.d[k] + o.d[k];
        }
        Jet { d }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let mut d = [0.0; 5];
        for k in 0..5 {
            d[k] = self.d[k] - o.d[k];
        }
        Jet { d }
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut d = self.d;
        for v in &mut d {
            *v *= c;
        }
        Jet { d }
    }

    /// Leibniz product rule.
    pub fn mul(&self, o: &Jet) -> Jet {
        let mut d = [0.0; 5];
        for k in 0..5 {
            for j in 0..=k {
                d[k] += BINOM[k][j] * self.d[j] * o.d[k - j];
            }
        }
        Jet { d }
    }

    /// Quotient; solves the Leibniz relations for the derivatives of self/o.
    pub fn div(&self, o: &Jet) -> Jet {
        let mut q = [0.0; 5];
        for k in 0..5 {
            let mut s = self.d[k];
            for j in 0..k {
                s -= BINOM[k][j] * q[j] * o.d[k - j];
            }
            q[k] = s / o.d[0];
        }
        Jet { d: q }
    }

    /// Composition with a univariate g given by its derivatives at self's
    /// value, via Faà di Bruno on the first four orders.
    fn compose(&self, g: [f64; 5]) -> Jet {
        let f1 = self.d[1];
        let f2 = self.d[2];
        let f3 = self.d[3];
        let f4 = self.d[4];
        let mut d = [0.0; 5];
        d[0] = g[0];
        d[1] = g[1] * f1;
        d[2] = g[2] * f1 * f1 + g[1] * f2;
        d[3] = g[3] * f1.powi(3) + 3.0 * g[2] * f1 * f2 + g[1] * f3;
        d[4] = g[4] * f1.powi(4) + 6.0 * g[3] * f1 * f1 * f2
            + g[2] * (3.0 * f2 * f2 + 4.0 * f1 * f3)
            + g[1] * f4;
        Jet { d }
    }

    pub fn exp(&self) -> Jet {
        let e = self.d[0].exp();
        self.compose([e, e, e, e, e])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.d[0].sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.d[0].sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    /// Real power; requires a strictly positive base value.
    pub fn powf(&self, r: f64) -> Jet {
        let x = self.d[0];
        assert!(x > 0.0, "powf needs a positive base, got {x}");
        let mut g = [0.0; 5];
        let mut coef = 1.0;
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = coef * x.powf(r - k as f64);
            coef *= r - k as f64;
        }
        self.compose(g)
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0).div(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_jet(j: Jet, expect: [f64; 5], tol: f64) {
        for k in 0..5 {
            assert!(
                (j.d[k] - expect[k]).abs() < tol,
                "derivative {k}: got {}, want {}",
                j.d[k],
                expect[k]
            );
        }
    }

    #[test]
    fn polynomial_product() {
        // f(x) = x^2 (1-x)^2 at x = 0.3
        let x = Jet::variable(0.3);
        let z = x.mul(&Jet::constant(1.0).sub(&x));
        let f = z.mul(&z);
        let xv: f64 = 0.3;
        let expect = [
            xv.powi(2) * (1.0 - xv).powi(2),
            2.0 * xv * (1.0 - xv) * (1.0 - 2.0 * xv),
            2.0 * (1.0 - 6.0 * xv + 6.0 * xv * xv),
            -12.0 + 24.0 * xv,
            24.0,
        ];
        assert_jet(f, expect, 1e-12);
    }

    #[test]
    fn exp_of_negative_reciprocal() {
        // the mollifier core g(u) = exp(-1/u) at u = 0.64
        let u = Jet::variable(0.64);
        let g = u.recip().scale(-1.0).exp();
        // check first derivative against (1/u^2) exp(-1/u)
        let uv: f64 = 0.64;
        let e = (-1.0 / uv).exp();
        assert!((g.d[0] - e).abs() < 1e-14);
        assert!((g.d[1] - e / (uv * uv)).abs() < 1e-12);
    }

    #[test]
    fn powf_matches_polynomial_square() {
        let x = Jet::variable(0.4);
        let sq = x.mul(&x);
        let p = x.powf(2.0);
        assert_jet(p, sq.d, 1e-10);
    }

    #[test]
    fn trig_derivatives() {
        let x = Jet::variable(0.7);
        let s = x.scale(std::f64::consts::PI).sin();
        let pi = std::f64::consts::PI;
        let xv = 0.7 * pi;
        assert_jet(
            s,
            [
                xv.sin(),
                pi * xv.cos(),
                -pi * pi * xv.sin(),
                -pi.powi(3) * xv.cos(),
                pi.powi(4) * xv.sin(),
            ],
            1e-9,
        );
    }

    #[test]
    fn quotient_rule() {
        // f = sin(x)/x at x = 1.1; cross-check with finite differences
        let f_of = |x: f64| x.sin() / x;
        let x0 = 1.1;
        let j = {
            let x = Jet::variable(x0);
            x.sin().div(&x)
        };
        let h = 1e-5;
        let fd1 = (f_of(x0 + h) - f_of(x0 - h)) / (2.0 * h);
        let fd2 = (f_of(x0 + h) - 2.0 * f_of(x0) + f_of(x0 - h)) / (h * h);
        assert!((j.d[1] - fd1).abs() < 1e-9);
        assert!((j.d[2] - fd2).abs() < 1e-5);
    }
}
