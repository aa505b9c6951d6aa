//! Second-order invariants of a framed null hypersurface: B, C, τ, the shape
//! operators A_N and A*_ξ, the mean curvature H, and the residuals of the
//! component and Codazzi identities.
//!
//! Frame fields are differentiated in parameter space with step `FD_STEP`;
//! ambient covariant corrections are added via Christoffel symbols. Boundary
//! points fall back to one-sided second-order stencils. Scalar derivatives are
//! Richardson-extrapolated once.

use crate::ambient::{GeomError, VectorField};
use crate::frame::{FrameError, FrameField, FrameSample};
use crate::tolerances::FD_STEP;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("finite-difference stencil leaves the domain at {u:?}")]
    Stencil { u: Vec<f64> },
    #[error("screen index {0} out of range")]
    ScreenIndex(usize),
}

/// Selector for one of the frame's fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameVec {
    Screen(usize),
    Xi,
    Transversal,
}

impl FrameVec {
    pub fn get(self, s: &FrameSample) -> DVector<f64> {
        match self {
            FrameVec::Screen(i) => s.screen[i].clone(),
            FrameVec::Xi => s.xi.clone(),
            FrameVec::Transversal => s.transversal.clone(),
        }
    }
}

/// All second-order data at one parameter point. Screen indices follow the
/// frame's screen basis; `b_xi` holds `B(ξ, e_j)` with `B(ξ,ξ)` last.
#[derive(Debug, Clone)]
pub struct ShapeSample {
    pub u: Vec<f64>,
    pub frame: FrameSample,
    pub b: DMatrix<f64>,
    pub b_xi: DVector<f64>,
    pub c: DMatrix<f64>,
    pub tau_screen: DVector<f64>,
    pub tau_xi: f64,
    pub a_n: DMatrix<f64>,
    pub a_star: DMatrix<f64>,
    pub h: f64,
    /// Worst deviation of A_N from the screen (should be ~0).
    pub a_n_screen_residual: f64,
}

impl ShapeSample {
    pub fn screen_dim(&self) -> usize {
        self.b.nrows()
    }

    /// A*_ξ e_i reassembled as an ambient vector.
    pub fn a_star_ambient(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.frame.x.len());
        for j in 0..self.screen_dim() {
            v += self.a_star[(j, i)] * &self.frame.screen[j];
        }
        v
    }

    /// A_N e_i reassembled as an ambient vector.
    pub fn a_n_ambient(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.frame.x.len());
        for j in 0..self.screen_dim() {
            v += self.a_n[(j, i)] * &self.frame.screen[j];
        }
        v
    }

    /// Max norm of `A*_ξ - (H/n) Id` on the screen (0 iff totally umbilical).
    pub fn umbilic_residual(&self) -> f64 {
        let n = self.screen_dim();
        let lambda = self.h / n as f64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { lambda } else { 0.0 };
                worst = worst.max((self.a_star[(i, j)] - delta).abs());
            }
        }
        worst
    }

    /// Max of `|C(e_i,e_j) - C(e_j,e_i)|`: the screen integrability residual.
    pub fn integrability_residual(&self) -> f64 {
        let n = self.screen_dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.c[(i, j)] - self.c[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Decomposition `Z = Z* + ḡ(Z,N)ξ + ḡ(Z,ξ)N` at one point.
#[derive(Debug, Clone)]
pub struct SplitField {
    /// Ambient components of the screen part.
    pub zstar: DVector<f64>,
    /// Coefficients `g(Z*, e_i)` on the screen basis.
    pub zstar_coeffs: DVector<f64>,
    /// ḡ(Z,N) — the ξ coefficient.
    pub z_xi_coef: f64,
    /// ḡ(Z,ξ) — the N coefficient.
    pub z_n_coef: f64,
    /// Sign of ḡ(Z,Z); 0 when Z is null within the floor.
    pub eps_z: i8,
    pub norm_z: f64,
    pub reassembly_residual: f64,
    pub prods_residual: f64,
}

pub fn split_field(s: &FrameSample, z: &DVector<f64>) -> SplitField {
    let z_xi_coef = s.inner(z, &s.transversal);
    let z_n_coef = s.inner(z, &s.xi);
    let zstar = z - z_xi_coef * &s.xi - z_n_coef * &s.transversal;
    let zstar_coeffs = DVector::from_fn(s.screen.len(), |i, _| s.inner(&zstar, &s.screen[i]));
    let gzz = s.inner(z, z);
    let eps_z = if gzz.abs() < 1e-10 {
        0
    } else if gzz > 0.0 {
        1
    } else {
        -1
    };
    let recon = &zstar + z_xi_coef * &s.xi + z_n_coef * &s.transversal;
    let prods = s.inner(&zstar, &zstar) + 2.0 * z_xi_coef * z_n_coef;
    SplitField {
        reassembly_residual: (recon - z).norm(),
        prods_residual: (prods - gzz).abs(),
        zstar,
        zstar_coeffs,
        z_xi_coef,
        z_n_coef,
        eps_z,
        norm_z: gzz.abs().sqrt(),
    }
}

/// Residuals of the three component identities of a closed conformal field,
/// maximized over the screen basis.
#[derive(Debug, Clone, Copy)]
pub struct ComponentsResiduals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// The conformal factor φ fitted at the ambient point.
    pub phi: f64,
}

pub struct ShapeEngine<'a> {
    pub frame: &'a FrameField<'a>,
}

impl<'a> ShapeEngine<'a> {
    pub fn new(frame: &'a FrameField<'a>) -> Self {
        ShapeEngine { frame }
    }

    fn sample(&self, u: &[f64]) -> Result<FrameSample, ShapeError> {
        Ok(self.frame.sample(u)?)
    }

    fn shifted(u: &[f64], a: &DVector<f64>, t: f64) -> Vec<f64> {
        u.iter().zip(a.iter()).map(|(&ui, &ai)| ui + t * ai).collect()
    }

    /// Second-order directional derivative of a sample-valued map along the
    /// parameter direction `a`, decomposed axis by axis so that corner points
    /// fall back to one-sided stencils per axis: D_a f = Σ_i a_i ∂_i f.
    fn fd_dir<T, F>(&self, u: &[f64], a: &DVector<f64>, h: f64, mut f: F) -> Result<T, ShapeError>
    where
        T: std::ops::Sub<Output = T>
            + std::ops::Add<Output = T>
            + std::ops::Mul<f64, Output = T>
            + Clone,
        F: FnMut(&[f64]) -> Result<T, ShapeError>,
    {
        let imm = self.frame.imm;
        let mut out: Option<T> = None;
        for i in 0..u.len() {
            if a[i] == 0.0 {
                continue;
            }
            let mut axis = DVector::zeros(u.len());
            axis[i] = 1.0;
            let fits = |t: f64| imm.in_domain(&Self::shifted(u, &axis, t));
            let partial: T = if fits(h) && fits(-h) {
                let fp = f(&Self::shifted(u, &axis, h))?;
                let fm = f(&Self::shifted(u, &axis, -h))?;
                (fp - fm) * (0.5 / h)
            } else if fits(2.0 * h) {
                let f0 = f(u)?;
                let f1 = f(&Self::shifted(u, &axis, h))?;
                let f2 = f(&Self::shifted(u, &axis, 2.0 * h))?;
                (f1 * 4.0 - f2 - f0 * 3.0) * (0.5 / h)
            } else if fits(-2.0 * h) {
                let f0 = f(u)?;
                let f1 = f(&Self::shifted(u, &axis, -h))?;
                let f2 = f(&Self::shifted(u, &axis, -2.0 * h))?;
                (f0 * 3.0 - f1 * 4.0 + f2) * (0.5 / h)
            } else {
                return Err(ShapeError::Stencil { u: u.to_vec() });
            };
            let scaled = partial * a[i];
            out = Some(match out {
                None => scaled,
                Some(acc) => acc + scaled,
            });
        }
        match out {
            Some(v) => Ok(v),
            // a = 0: derivative is zero; synthesize it from a null difference.
            None => {
                let f0 = f(u)?;
                Ok((f0.clone() - f0) * 0.0)
            }
        }
    }

    /// Richardson-extrapolated scalar derivative along `a`.
    pub fn scalar_deriv<F>(&self, u: &[f64], a: &DVector<f64>, mut f: F) -> Result<f64, ShapeError>
    where
        F: FnMut(&FrameSample) -> Result<f64, ShapeError>,
    {
        let mut g = |u2: &[f64]| f(&self.sample(u2)?);
        let d1 = self.fd_dir(u, a, FD_STEP, &mut g)?;
        let d2 = self.fd_dir(u, a, FD_STEP / 2.0, &mut g)?;
        Ok((4.0 * d2 - d1) / 3.0)
    }

    /// Ambient covariant derivative ∇̄_X W of a sample-valued ambient field,
    /// where X = J a is the pushforward of the parameter direction `a`.
    pub fn dbar<F>(&self, u: &[f64], a: &DVector<f64>, f: F) -> Result<DVector<f64>, ShapeError>
    where
        F: Fn(&FrameSample) -> DVector<f64>,
    {
        let s0 = self.sample(u)?;
        let d = self.fd_dir(u, a, FD_STEP, |u2| Ok(f(&self.sample(u2)?)))?;
        let gamma = s0.x.len();
        let chris = self.frame.imm.ambient.christoffel(&s0.x)?;
        let x_amb = &s0.jacobian * a;
        let w = f(&s0);
        let mut out = d;
        for k in 0..gamma {
            let mut corr = 0.0;
            for i in 0..gamma {
                for j in 0..gamma {
                    corr += chris.get(k, i, j) * x_amb[i] * w[j];
                }
            }
            out[k] += corr;
        }
        Ok(out)
    }

    fn coeffs_of(&self, s: &FrameSample, v: FrameVec) -> DVector<f64> {
        s.param_coeffs(&v.get(s))
    }

    /// B(X, W) = ḡ(∇̄_X Ŵ, ξ) for an arbitrary tangent direction X = J a and a
    /// frame field Ŵ.
    pub fn b_general(&self, u: &[f64], a: &DVector<f64>, w: FrameVec) -> Result<f64, ShapeError> {
        let s0 = self.sample(u)?;
        let d = self.dbar(u, a, |s| w.get(s))?;
        Ok(s0.inner(&d, &s0.xi))
    }

    pub fn second_fund_b(&self, u: &[f64], x: FrameVec, y: FrameVec) -> Result<f64, ShapeError> {
        let s0 = self.sample(u)?;
        self.b_general(u, &self.coeffs_of(&s0, x), y)
    }

    /// C(X, PY) = ḡ(∇̄_X PŶ, N).
    pub fn screen_fund_c(&self, u: &[f64], x: FrameVec, y: FrameVec) -> Result<f64, ShapeError> {
        let s0 = self.sample(u)?;
        let a = self.coeffs_of(&s0, x);
        let d = self.dbar(u, &a, |s| s.screen_project(&y.get(s)))?;
        Ok(s0.inner(&d, &s0.transversal))
    }

    /// τ(X) = ḡ(∇̄_X N, ξ).
    pub fn tau_general(&self, u: &[f64], a: &DVector<f64>) -> Result<f64, ShapeError> {
        let s0 = self.sample(u)?;
        let d = self.dbar(u, a, |s| s.transversal.clone())?;
        Ok(s0.inner(&d, &s0.xi))
    }

    pub fn tau_form(&self, u: &[f64], x: FrameVec) -> Result<f64, ShapeError> {
        let s0 = self.sample(u)?;
        self.tau_general(u, &self.coeffs_of(&s0, x))
    }

    /// All second-order invariants at `u`.
    pub fn shape_operators(&self, u: &[f64]) -> Result<ShapeSample, ShapeError> {
        let s0 = self.sample(u)?;
        let n = s0.screen_dim();
        let a_xi = s0.param_coeffs(&s0.xi);
        let a_scr: Vec<DVector<f64>> = (0..n).map(|i| s0.param_coeffs(&s0.screen[i])).collect();

        let mut b = DMatrix::zeros(n, n);
        let mut c = DMatrix::zeros(n, n);
        let mut a_n = DMatrix::zeros(n, n);
        let mut a_star = DMatrix::zeros(n, n);
        let mut tau_screen = DVector::zeros(n);
        let mut a_n_screen_residual: f64 = 0.0;

        for i in 0..n {
            let d_n = self.dbar(u, &a_scr[i], |s| s.transversal.clone())?;
            let d_xi = self.dbar(u, &a_scr[i], |s| s.xi.clone())?;
            let tau_i = s0.inner(&d_n, &s0.xi);
            tau_screen[i] = tau_i;
            // A_N e_i = -(∇̄_{e_i} N - τ(e_i) N); should land in the screen.
            let an_vec = -(&d_n - tau_i * &s0.transversal);
            a_n_screen_residual = a_n_screen_residual
                .max(s0.inner(&an_vec, &s0.xi).abs())
                .max(s0.inner(&an_vec, &s0.transversal).abs());
            // A*_ξ e_i = -P(∇̄_{e_i} ξ).
            let astar_vec = -s0.screen_project(&d_xi);
            for j in 0..n {
                a_n[(j, i)] = s0.inner(&an_vec, &s0.screen[j]);
                a_star[(j, i)] = s0.inner(&astar_vec, &s0.screen[j]);
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = self.dbar(u, &a_scr[i], |s| s.screen[j].clone())?;
                b[(i, j)] = s0.inner(&d, &s0.xi);
                c[(i, j)] = s0.inner(&d, &s0.transversal);
            }
        }
        let mut b_xi = DVector::zeros(n + 1);
        for j in 0..n {
            let d = self.dbar(u, &a_xi, |s| s.screen[j].clone())?;
            b_xi[j] = s0.inner(&d, &s0.xi);
        }
        let d = self.dbar(u, &a_xi, |s| s.xi.clone())?;
        b_xi[n] = s0.inner(&d, &s0.xi);
        let tau_xi = self.tau_general(u, &a_xi)?;
        let h = a_star.trace();
        Ok(ShapeSample {
            u: u.to_vec(),
            frame: s0,
            b,
            b_xi,
            c,
            tau_screen,
            tau_xi,
            a_n,
            a_star,
            h,
            a_n_screen_residual,
        })
    }

    /// Residuals of the closed-conformal component identities at `u`:
    /// (a) ‖φX - ∇*_X Z* + ḡ(Z,N)A*_ξX + ḡ(Z,ξ)A_N X‖
    /// (b) |C(X,Z*) + X·ḡ(Z,N) - ḡ(Z,N)τ(X)|
    /// (c) |B(X,Z*) + X·ḡ(Z,ξ) + ḡ(Z,ξ)τ(X)|
    /// maximized over the screen basis X = e_i.
    pub fn components_residual(
        &self,
        z: &VectorField,
        u: &[f64],
    ) -> Result<ComponentsResiduals, ShapeError> {
        let shape = self.shape_operators(u)?;
        let s0 = &shape.frame;
        let n = s0.screen_dim();
        let cc = self.frame.imm.ambient.cc_at(z, &s0.x)?;
        let phi = cc.phi;
        let split0 = split_field(s0, &z.eval(&s0.x));

        let mut res_a: f64 = 0.0;
        let mut res_b: f64 = 0.0;
        let mut res_c: f64 = 0.0;
        for i in 0..n {
            let x_amb = &s0.screen[i];
            let a = s0.param_coeffs(x_amb);
            // ∇*_X Z*: screen projection of the ambient derivative of the
            // pointwise screen part of Z.
            let d_zstar = self.dbar(u, &a, |s| split_field(s, &z.eval(&s.x)).zstar)?;
            let nab_star = s0.screen_project(&d_zstar);
            let va = phi * x_amb - nab_star
                + split0.z_xi_coef * shape.a_star_ambient(i)
                + split0.z_n_coef * shape.a_n_ambient(i);
            res_a = res_a.max(va.norm());

            let c_xz: f64 = (0..n).map(|j| split0.zstar_coeffs[j] * shape.c[(i, j)]).sum();
            let d_gzn = self.scalar_deriv(u, &a, |s| {
                Ok(s.inner(&z.eval(&s.x), &s.transversal))
            })?;
            res_b = res_b.max((c_xz + d_gzn - split0.z_xi_coef * shape.tau_screen[i]).abs());

            let b_xz: f64 = (0..n).map(|j| split0.zstar_coeffs[j] * shape.b[(i, j)]).sum();
            let d_gzxi = self.scalar_deriv(u, &a, |s| Ok(s.inner(&z.eval(&s.x), &s.xi)))?;
            res_c = res_c.max((b_xz + d_gzxi + split0.z_n_coef * shape.tau_screen[i]).abs());
        }
        Ok(ComponentsResiduals {
            a: res_a,
            b: res_b,
            c: res_c,
            phi,
        })
    }

    /// Codazzi residual
    /// |ḡ(R̄(X,Y)W, ξ) - [(∇_X B)(Y,W) - (∇_Y B)(X,W) + τ(X)B(Y,W) - τ(Y)B(X,W)]|.
    pub fn codazzi_residual(
        &self,
        u: &[f64],
        x: FrameVec,
        y: FrameVec,
        w: FrameVec,
    ) -> Result<f64, ShapeError> {
        let s0 = self.sample(u)?;
        let coeffs = self.frame.imm.ambient.riemann_coeffs(&s0.x)?;
        let xv = x.get(&s0);
        let yv = y.get(&s0);
        let wv = w.get(&s0);
        let lhs = s0.inner(&coeffs.apply(&xv, &yv, &wv), &s0.xi);

        let nabla_b = |x: FrameVec, y: FrameVec, w: FrameVec| -> Result<f64, ShapeError> {
            // (∇_X B)(Y,W) = X·B(Y,W) - B(∇_X Y, W) - B(Y, ∇_X W)
            let s0 = self.sample(u)?;
            let a_x = self.coeffs_of(&s0, x);
            let d_b = self.scalar_deriv(u, &a_x, |s| {
                let a_y = s.param_coeffs(&y.get(s));
                self.b_at(&s.u, &a_y, w)
            })?;
            let term2 = self.b_general(u, &s0.param_coeffs(&self.induced_deriv(u, x, y)?), w)?;
            let term3 = self.b_general(u, &s0.param_coeffs(&self.induced_deriv(u, x, w)?), y)?;
            Ok(d_b - term2 - term3)
        };
        let b_yw = self.second_fund_b(u, y, w)?;
        let b_xw = self.second_fund_b(u, x, w)?;
        let tau_x = self.tau_form(u, x)?;
        let tau_y = self.tau_form(u, y)?;
        let rhs = nabla_b(x, y, w)? - nabla_b(y, x, w)? + tau_x * b_yw - tau_y * b_xw;
        Ok((lhs - rhs).abs())
    }

    fn b_at(&self, u: &[f64], a: &DVector<f64>, w: FrameVec) -> Result<f64, ShapeError> {
        self.b_general(u, a, w)
    }

    /// Induced connection ∇_X Y = ∇̄_X Ŷ - B(X,Y)N as an ambient vector.
    pub fn induced_deriv(
        &self,
        u: &[f64],
        x: FrameVec,
        y: FrameVec,
    ) -> Result<DVector<f64>, ShapeError> {
        let s0 = self.sample(u)?;
        let a_x = self.coeffs_of(&s0, x);
        let d = self.dbar(u, &a_x, |s| y.get(s))?;
        let b = s0.inner(&d, &s0.xi);
        Ok(d - b * &s0.transversal)
    }

    /// |(∇_X g)(Y,W) - ḡ(h(X,Y),W) - ḡ(Y,h(X,W))| with h(X,Y) = B(X,Y)N.
    pub fn nonmetric_residual(
        &self,
        u: &[f64],
        x: FrameVec,
        y: FrameVec,
        w: FrameVec,
    ) -> Result<f64, ShapeError> {
        let s0 = self.sample(u)?;
        let a_x = self.coeffs_of(&s0, x);
        let d_g = self.scalar_deriv(u, &a_x, |s| Ok(s.inner(&y.get(s), &w.get(s))))?;
        let nab_y = self.induced_deriv(u, x, y)?;
        let nab_w = self.induced_deriv(u, x, w)?;
        let wv = w.get(&s0);
        let yv = y.get(&s0);
        let nabla_g = d_g - s0.inner(&nab_y, &wv) - s0.inner(&yv, &nab_w);
        let b_xy = self.second_fund_b(u, x, y)?;
        let b_xw = self.second_fund_b(u, x, w)?;
        let rhs = b_xy * s0.inner(&s0.transversal, &wv) + b_xw * s0.inner(&yv, &s0.transversal);
        Ok((nabla_g - rhs).abs())
    }

    /// Proof-side residual for the mixed-product identity:
    /// X·(ḡ(Z,ξ)ḡ(Z,N)) + ḡ(X, A_{Z⊥}Z*).
    pub fn zperp_residual(
        &self,
        z: &VectorField,
        u: &[f64],
        screen_index: usize,
    ) -> Result<f64, ShapeError> {
        let shape = self.shape_operators(u)?;
        let s0 = &shape.frame;
        if screen_index >= s0.screen_dim() {
            return Err(ShapeError::ScreenIndex(screen_index));
        }
        let split0 = split_field(s0, &z.eval(&s0.x));
        let a = s0.param_coeffs(&s0.screen[screen_index]);
        let d_prod = self.scalar_deriv(u, &a, |s| {
            let zv = z.eval(&s.x);
            Ok(s.inner(&zv, &s.xi) * s.inner(&zv, &s.transversal))
        })?;
        let azp = shape_azperp(&shape, &split0, &split0.zstar_coeffs);
        Ok((d_prod + s0.inner(&s0.screen[screen_index], &azp)).abs())
    }
}

/// Â_{Z⊥}X = ḡ(Z,N)·A*_ξX + ḡ(Z,ξ)·A_N X, for X given by screen coefficients.
pub fn shape_azperp(
    shape: &ShapeSample,
    split: &SplitField,
    x_coeffs: &DVector<f64>,
) -> DVector<f64> {
    let n = shape.screen_dim();
    let mut v = DVector::zeros(shape.frame.x.len());
    for i in 0..n {
        let amb = split.z_xi_coef * shape.a_star_ambient(i) + split.z_n_coef * shape.a_n_ambient(i);
        v += x_coeffs[i] * amb;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientManifold, GrwSpec, VectorField};
    use crate::expr::ExpressionField;
    use crate::frame::{FrameField, FrameRecipe};
    use crate::immersion::NullImmersion;
    use approx::assert_relative_eq;

    fn light_cone() -> NullImmersion {
        let m = AmbientManifold::minkowski(&["t", "x", "y"]);
        NullImmersion::parse(
            m,
            &["a1", "a2"],
            &["sqrt(a1^2+a2^2)", "a1", "a2"],
            vec![(0.5, 3.0), (0.5, 3.0)],
            vec![4, 4],
        )
        .unwrap()
    }

    fn hyperplane() -> NullImmersion {
        let m = AmbientManifold::minkowski(&["t", "x", "y"]);
        NullImmersion::parse(
            m,
            &["u", "v"],
            &["u", "u", "v"],
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            vec![4, 4],
        )
        .unwrap()
    }

    #[test]
    fn hyperplane_is_totally_geodesic() {
        let imm = hyperplane();
        let frame = FrameField::default_rigging(&imm);
        let eng = ShapeEngine::new(&frame);
        let s = eng.shape_operators(&[0.2, -0.3]).unwrap();
        assert!(s.b.amax() <= 1e-9);
        assert!(s.b_xi.amax() <= 1e-9);
        assert!(s.c.amax() <= 1e-9);
        assert!(s.a_n.amax() <= 1e-9);
        assert!(s.a_star.amax() <= 1e-9);
        assert!(s.h.abs() <= 1e-9);
        assert!(s.tau_screen.amax() <= 1e-9);
    }

    #[test]
    fn light_cone_shape_operators() {
        // With ξ = -p/r the cone is umbilic: A*_ξ = (1/r) Id, H = 1/r, B = (1/r) g.
        let imm = light_cone();
        let frame = FrameField::default_rigging(&imm);
        let eng = ShapeEngine::new(&frame);
        let u = [2.0, 1.0];
        let r = 5.0_f64.sqrt();
        let s = eng.shape_operators(&u).unwrap();
        assert_relative_eq!(s.a_star[(0, 0)], 1.0 / r, epsilon = 1e-6);
        assert_relative_eq!(s.h, 1.0 / r, epsilon = 1e-6);
        assert_relative_eq!(s.b[(0, 0)], 1.0 / r, epsilon = 1e-6);
        assert!(s.umbilic_residual() <= 1e-6);
        // Duality bridge and ξ-row.
        assert!((s.b[(0, 0)] - s.a_star[(0, 0)]).abs() <= 1e-6);
        assert!((s.c[(0, 0)] - s.a_n[(0, 0)]).abs() <= 1e-6);
        assert!(s.b_xi.amax() <= 1e-6);
        assert!(s.a_n_screen_residual <= 1e-6);
    }

    #[test]
    fn b_is_symmetric_and_kills_xi() {
        let imm = light_cone();
        let frame = FrameField::default_rigging(&imm);
        let eng = ShapeEngine::new(&frame);
        let u = [1.2, 2.3];
        let b_sx = eng
            .second_fund_b(&u, FrameVec::Screen(0), FrameVec::Xi)
            .unwrap();
        let b_xs = eng
            .second_fund_b(&u, FrameVec::Xi, FrameVec::Screen(0))
            .unwrap();
        assert!(b_sx.abs() <= 1e-6);
        assert!(b_xs.abs() <= 1e-6);
    }

    #[test]
    fn gauge_covariance_constant_factor() {
        let imm = light_cone();
        let u = [1.5, 1.0];
        let base = FrameField::default_rigging(&imm);
        let eng0 = ShapeEngine::new(&base);
        let s0 = eng0.shape_operators(&u).unwrap();
        let f = 2.5;
        let scaled = FrameField::default_rigging(&imm)
            .gauge(ExpressionField::constant(f, &["a1", "a2"]));
        let eng1 = ShapeEngine::new(&scaled);
        let s1 = eng1.shape_operators(&u).unwrap();
        assert_relative_eq!(s1.h, f * s0.h, epsilon = 1e-6);
        assert_relative_eq!(s1.b[(0, 0)], f * s0.b[(0, 0)], epsilon = 1e-6);
        assert_relative_eq!(s1.a_star[(0, 0)], f * s0.a_star[(0, 0)], epsilon = 1e-6);
        assert_relative_eq!(s1.a_n[(0, 0)], s0.a_n[(0, 0)] / f, epsilon = 1e-6);
    }

    #[test]
    fn gauge_tau_shift() {
        // τ'(X) = τ(X) - X·log f for f = 1 + a1²: with N' = N/f the cross term
        // ḡ(∂(1/f)N, fξ) contributes -X·log f.
        let imm = light_cone();
        let u = [1.5, 1.0];
        let base = FrameField::default_rigging(&imm);
        let eng0 = ShapeEngine::new(&base);
        let s = base.sample(&u).unwrap();
        let a = s.param_coeffs(&s.screen[0]);
        let tau0 = eng0.tau_general(&u, &a).unwrap();
        let scaled = FrameField::default_rigging(&imm)
            .gauge(ExpressionField::parse("1 + a1^2", &["a1", "a2"]).unwrap());
        let eng1 = ShapeEngine::new(&scaled);
        let tau1 = eng1.tau_general(&u, &a).unwrap();
        // X·log f = (2 a1 / (1+a1²)) · a[0]
        let expect = tau0 - 2.0 * u[0] / (1.0 + u[0] * u[0]) * a[0];
        assert_relative_eq!(tau1, expect, epsilon = 1e-6);
    }

    #[test]
    fn split_field_trivia() {
        let imm = light_cone();
        let frame = FrameField::default_rigging(&imm);
        let s = frame.sample(&[2.0, 1.0]).unwrap();
        let sp = split_field(&s, &s.xi);
        assert!(sp.zstar.norm() <= 1e-9);
        assert!((sp.z_xi_coef - 1.0).abs() <= 1e-9);
        assert!(sp.z_n_coef.abs() <= 1e-9);
        assert_eq!(sp.eps_z, 0);
        let e0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let sp0 = split_field(&s, &e0);
        assert!(sp0.reassembly_residual <= 1e-9);
        assert!(sp0.prods_residual <= 1e-9);
        assert_eq!(sp0.eps_z, -1);
    }

    #[test]
    fn components_residual_grw_graph() {
        // Z = ϱ(t)∂_t is CC over a GRW; over the graph its component equations
        // hold at FD accuracy.
        let warp = ExpressionField::parse("cosh(t)", &["t"]).unwrap();
        let fiber = vec![
            ExpressionField::parse("1", &["r", "th"]).unwrap(),
            ExpressionField::parse("0", &["r", "th"]).unwrap(),
            ExpressionField::parse("sin(r)^2", &["r", "th"]).unwrap(),
        ];
        let spec = GrwSpec {
            interval: (-3.0, 3.0),
            warp,
            fiber_coords: vec!["r".into(), "th".into()],
            fiber_metric: fiber,
        };
        let ambient = spec
            .assemble(vec![vec![0.3, 0.7, 0.2], vec![-0.5, 1.1, 2.0]])
            .unwrap();
        let z = VectorField::parse(&ambient, &["cosh(t)", "0", "0"]).unwrap();
        let imm = NullImmersion::parse(
            ambient,
            &["r", "th"],
            &["log(tan(r) + sqrt(tan(r)^2 + 1))", "r", "th"],
            vec![(0.3, 1.2), (0.1, 3.0)],
            vec![4, 4],
        )
        .unwrap();
        let frame = FrameField::new(&imm, FrameRecipe::GrwGraph);
        let eng = ShapeEngine::new(&frame);
        let res = eng.components_residual(&z, &[0.7, 1.4]).unwrap();
        assert!(res.a <= 1e-5, "residual (a) = {}", res.a);
        assert!(res.b <= 1e-5, "residual (b) = {}", res.b);
        assert!(res.c <= 1e-5, "residual (c) = {}", res.c);
    }

    #[test]
    fn components_residual_flags_non_cc() {
        // Z = t²∂_t is not closed conformal; residual (a) stays visible.
        let imm = light_cone();
        let z = VectorField::parse(&imm.ambient, &["t^2", "0", "0"]).unwrap();
        let frame = FrameField::default_rigging(&imm);
        let eng = ShapeEngine::new(&frame);
        let res = eng.components_residual(&z, &[2.0, 1.0]).unwrap();
        assert!(res.a > 1e-2, "expected visible residual, got {}", res.a);
    }

    #[test]
    fn codazzi_light_cone() {
        let imm = light_cone();
        let frame = FrameField::default_rigging(&imm);
        let eng = ShapeEngine::new(&frame);
        let r = eng
            .codazzi_residual(&[1.5, 1.1], FrameVec::Screen(0), FrameVec::Xi, FrameVec::Screen(0))
            .unwrap();
        assert!(r <= 1e-4, "codazzi residual {r}");
    }

    #[test]
    fn nonmetric_light_cone() {
        let imm = light_cone();
        let frame = FrameField::default_rigging(&imm);
        let eng = ShapeEngine::new(&frame);
        let r = eng
            .nonmetric_residual(
                &[1.5, 1.1],
                FrameVec::Screen(0),
                FrameVec::Screen(0),
                FrameVec::Screen(0),
            )
            .unwrap();
        assert!(r <= 1e-5, "nonmetric residual {r}");
        // Y = W = ξ: both sides vanish identically.
        let r2 = eng
            .nonmetric_residual(&[1.5, 1.1], FrameVec::Screen(0), FrameVec::Xi, FrameVec::Xi)
            .unwrap();
        assert!(r2 <= 1e-6);
    }

    #[test]
    fn grw_graph_shape_relation() {
        // (1/√2)(A_N - A*_ξ) = (ϱ'/ϱ) P on the screen for the transnormal graph.
        let warp = ExpressionField::parse("cosh(t)", &["t"]).unwrap();
        let fiber = vec![
            ExpressionField::parse("1", &["r", "th"]).unwrap(),
            ExpressionField::parse("0", &["r", "th"]).unwrap(),
            ExpressionField::parse("sin(r)^2", &["r", "th"]).unwrap(),
        ];
        let spec = GrwSpec {
            interval: (-3.0, 3.0),
            warp,
            fiber_coords: vec!["r".into(), "th".into()],
            fiber_metric: fiber,
        };
        let ambient = spec
            .assemble(vec![vec![0.3, 0.7, 0.2]])
            .unwrap();
        let imm = NullImmersion::parse(
            ambient,
            &["r", "th"],
            &["log(tan(r) + sqrt(tan(r)^2 + 1))", "r", "th"],
            vec![(0.3, 1.2), (0.1, 3.0)],
            vec![4, 4],
        )
        .unwrap();
        let frame = FrameField::new(&imm, FrameRecipe::GrwGraph);
        let eng = ShapeEngine::new(&frame);
        let u = [0.7, 1.4];
        let s = eng.shape_operators(&u).unwrap();
        let t = imm.ambient_point(&u)[0];
        let ratio = t.tanh(); // ϱ'/ϱ for ϱ = cosh
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let n = s.screen_dim();
        for i in 0..n {
            for j in 0..n {
                let lhs = inv_sqrt2 * (s.a_n[(i, j)] - s.a_star[(i, j)]);
                let delta = if i == j { ratio } else { 0.0 };
                assert_relative_eq!(lhs, delta, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn azperp_of_xi_is_a_star() {
        let imm = light_cone();
        let frame = FrameField::default_rigging(&imm);
        let eng = ShapeEngine::new(&frame);
        let u = [2.0, 1.0];
        let shape = eng.shape_operators(&u).unwrap();
        let split = split_field(&shape.frame, &shape.frame.xi.clone());
        let x = DVector::from_vec(vec![1.0]);
        let v = shape_azperp(&shape, &split, &x);
        let expect = shape.a_star_ambient(0);
        assert!((v - expect).norm() <= 1e-9);
    }
}
