//! Order-2 truncated jets: value, gradient and hessian propagated forward.
//!
//! A [`Jet2`] carries the first two derivatives of a scalar with respect to a
//! fixed set of `n` independent variables. Arithmetic follows the Leibniz and
//! chain rules exactly, so metric derivatives up to second order come out at
//! machine precision.

/// Truncated second-order jet over `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    /// Gradient, length `n`.
    pub grad: Vec<f64>,
    /// Hessian, row-major `n * n`, kept symmetric.
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn nvars(&self) -> usize {
        self.grad.len()
    }

    pub fn constant(value: f64, nvars: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; nvars],
            hess: vec![0.0; nvars * nvars],
        }
    }

    /// Jet of the `i`-th coordinate variable evaluated at `value`.
    pub fn variable(value: f64, i: usize, nvars: usize) -> Self {
        let mut j = Jet2::constant(value, nvars);
        j.grad[i] = 1.0;
        j
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.nvars() + j]
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: zip(&self.grad, &o.grad, |a, b| a + b),
            hess: zip(&self.hess, &o.hess, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - o.value,
            grad: zip(&self.grad, &o.grad, |a, b| a - b),
            hess: zip(&self.hess, &o.hess, |a, b| a - b),
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|a| -a).collect(),
            hess: self.hess.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.nvars();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = self.hess[i * n + j] * o.value
                    + o.hess[i * n + j] * self.value
                    + self.grad[i] * o.grad[j]
                    + o.grad[i] * self.grad[j];
            }
        }
        Jet2 {
            value: self.value * o.value,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(a, b)| a * o.value + b * self.value)
                .collect(),
            hess,
        }
    }

    pub fn div(&self, o: &Jet2) -> Jet2 {
        self.mul(&o.recip())
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Composes with a scalar function given its value and first two
    /// derivatives at `self.value`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet2 {
        let n = self.nvars();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = df * self.hess[i * n + j] + d2f * self.grad[i] * self.grad[j];
            }
        }
        Jet2 {
            value: f,
            grad: self.grad.iter().map(|g| df * g).collect(),
            hess,
        }
    }

    pub fn sin(&self) -> Jet2 {
        let v = self.value;
        self.chain(v.sin(), v.cos(), -v.sin())
    }
    pub fn cos(&self) -> Jet2 {
        let v = self.value;
        self.chain(v.cos(), -v.sin(), -v.cos())
    }
    pub fn tan(&self) -> Jet2 {
        let v = self.value;
        let s = 1.0 / v.cos().powi(2);
        self.chain(v.tan(), s, 2.0 * v.tan() * s)
    }
    pub fn sinh(&self) -> Jet2 {
        let v = self.value;
        self.chain(v.sinh(), v.cosh(), v.sinh())
    }
    pub fn cosh(&self) -> Jet2 {
        let v = self.value;
        self.chain(v.cosh(), v.sinh(), v.cosh())
    }
    pub fn tanh(&self) -> Jet2 {
        let v = self.value;
        let s = 1.0 - v.tanh().powi(2);
        self.chain(v.tanh(), s, -2.0 * v.tanh() * s)
    }
    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    pub fn ln(&self) -> Jet2 {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    pub fn sqrt(&self) -> Jet2 {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }
    pub fn abs(&self) -> Jet2 {
        // Non-differentiable at 0; the sign rule is what catalog fields need.
        let s = if self.value < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.value.abs(), s, 0.0)
    }
    pub fn asin(&self) -> Jet2 {
        let v = self.value;
        let d = 1.0 / (1.0 - v * v).sqrt();
        self.chain(v.asin(), d, v * d * d * d)
    }
    pub fn acos(&self) -> Jet2 {
        let v = self.value;
        let d = -1.0 / (1.0 - v * v).sqrt();
        self.chain(v.acos(), d, v * d / (1.0 - v * v))
    }
    pub fn atan(&self) -> Jet2 {
        let v = self.value;
        let d = 1.0 / (1.0 + v * v);
        self.chain(v.atan(), d, -2.0 * v * d * d)
    }

    pub fn powi(&self, k: i32) -> Jet2 {
        let v = self.value;
        let (f, df, d2f) = if k == 0 {
            (1.0, 0.0, 0.0)
        } else if k == 1 {
            (v, 1.0, 0.0)
        } else {
            (
                v.powi(k),
                k as f64 * v.powi(k - 1),
                (k * (k - 1)) as f64 * v.powi(k - 2),
            )
        };
        self.chain(f, df, d2f)
    }

    pub fn powf(&self, p: f64) -> Jet2 {
        if p == p.round() && p.abs() < 64.0 {
            return self.powi(p as i32);
        }
        let v = self.value;
        self.chain(
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
        )
    }

    /// General power with a non-constant exponent, via exp(b ln a).
    pub fn pow_jet(&self, o: &Jet2) -> Jet2 {
        o.mul(&self.ln()).exp()
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn variable_has_unit_gradient_and_zero_hessian() {
        let x = Jet2::variable(3.0, 0, 2);
        assert_eq!(x.grad, vec![1.0, 0.0]);
        assert!(x.hess.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn leibniz_rule_exact() {
        // d(uv) = u dv + v du at both orders for u = x^2 y, v = sin(x) + y.
        let x = Jet2::variable(0.7, 0, 2);
        let y = Jet2::variable(-1.3, 1, 2);
        let u = x.mul(&x).mul(&y);
        let v = x.sin().add(&y);
        let p = u.mul(&v);
        // Hand derivative of x^2 y (sin x + y) wrt x: 2xy(sin x + y) + x^2 y cos x.
        let (xv, yv) = (0.7_f64, -1.3_f64);
        let expect = 2.0 * xv * yv * (xv.sin() + yv) + xv * xv * yv * xv.cos();
        assert_relative_eq!(p.grad[0], expect, epsilon = 1e-12);
        // Hessian symmetric.
        assert_relative_eq!(p.hess_at(0, 1), p.hess_at(1, 0), epsilon = 1e-12);
    }

    #[test]
    fn chain_matches_finite_differences() {
        let f = |t: f64| (t.sinh() / (1.0 + t * t)).cos();
        let t0 = 0.43;
        let t = Jet2::variable(t0, 0, 1);
        let j = t
            .sinh()
            .div(&Jet2::constant(1.0, 1).add(&t.mul(&t)))
            .cos();
        let h = 1e-5;
        let fd1 = (f(t0 + h) - f(t0 - h)) / (2.0 * h);
        let fd2 = (f(t0 + h) - 2.0 * f(t0) + f(t0 - h)) / (h * h);
        assert_relative_eq!(j.grad[0], fd1, epsilon = 1e-8);
        assert_relative_eq!(j.hess_at(0, 0), fd2, epsilon = 1e-4);
    }
}
