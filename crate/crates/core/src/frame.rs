//! Null frame fields `(ξ, N, screen)` along a degenerate hypersurface.
//!
//! A frame sample bundles everything pointwise computations need: the ambient
//! point, the pushforward, the radical direction ξ, the transversal N with
//! ḡ(ξ,N) = 1 and ḡ(N,N) = 0, and a ḡ-orthonormal screen basis.

use crate::ambient::VectorField;
use crate::expr::ExpressionField;
use crate::immersion::{ImmersionError, NullImmersion};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error("closed conformal field is null at {u:?} (g(Z,Z) = {value:.3e}); cannot split")]
    CcFieldNull { u: Vec<f64>, value: f64 },
    #[error("closed conformal field is tangent at {u:?}; cannot split")]
    CcFieldTangent { u: Vec<f64> },
    #[error("screen candidate {index} is not tangent to the hypersurface at {u:?} (residual {residual:.3e})")]
    ScreenNotTangent {
        u: Vec<f64>,
        index: usize,
        residual: f64,
    },
    #[error("screen candidate {index} is not orthogonal to ξ at {u:?} (g = {value:.3e})")]
    ScreenMeetsRadical {
        u: Vec<f64>,
        index: usize,
        value: f64,
    },
    #[error("screen construction degenerated at {u:?}: kept {kept} of {needed} directions")]
    ScreenDegenerate { u: Vec<f64>, kept: usize, needed: usize },
    #[error("ambient metric is not in graph form (-dt² + spatial) at {u:?}")]
    NotGraphForm { u: Vec<f64> },
    #[error("immersion is not a graph t = f(fiber) over the parameters at {u:?}")]
    NotGraph { u: Vec<f64> },
    #[error("gauge factor vanishes at {u:?}")]
    GaugeZero { u: Vec<f64> },
}

/// How ξ, N and the screen are built at each point.
#[derive(Debug, Clone)]
pub enum FrameRecipe {
    /// Transversal from a rigging field ζ; ξ normalized by ḡ(ξ,ζ) = 1.
    Rigging { zeta: VectorField },
    /// Frame adapted to a closed conformal ambient field Z = ξ + θN.
    FromCc { z: VectorField },
    /// User-supplied screen fields (ambient components); N is solved for.
    Explicit {
        zeta: VectorField,
        screen: Vec<VectorField>,
    },
    /// Graph t = f(fiber) in a metric -dt² + (spatial block); ξ and N are the
    /// two natural null directions through the graph.
    GrwGraph,
    /// Rescale an inner recipe: ξ' = fξ, N' = N/f.
    Gauge {
        inner: Box<FrameRecipe>,
        factor: ExpressionField,
    },
}

/// Pointwise output of a frame recipe.
#[derive(Debug, Clone)]
pub struct FrameSample {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    pub xi: DVector<f64>,
    pub transversal: DVector<f64>,
    pub screen: Vec<DVector<f64>>,
}

impl FrameSample {
    pub fn inner(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * &self.metric * w)[(0, 0)]
    }

    /// Screen projector P(w) = w - ḡ(w,N)ξ - ḡ(w,ξ)N on tangent vectors.
    pub fn screen_project(&self, w: &DVector<f64>) -> DVector<f64> {
        w - self.inner(w, &self.transversal) * &self.xi - self.inner(w, &self.xi) * &self.transversal
    }

    /// Least-squares parameter coefficients `a` with `J a ≈ v`.
    pub fn param_coeffs(&self, v: &DVector<f64>) -> DVector<f64> {
        self.jacobian
            .clone()
            .svd(true, true)
            .solve(v, 1e-12)
            .expect("svd solve")
    }

    /// Distance of `v` from the tangent space, relative to |v|.
    pub fn tangency_residual(&self, v: &DVector<f64>) -> f64 {
        let a = self.param_coeffs(v);
        let r = v - &self.jacobian * a;
        r.norm() / v.norm().max(1.0)
    }

    pub fn screen_dim(&self) -> usize {
        self.screen.len()
    }
}

/// Worst-case frame identities at a sample. All entries should be ~0.
#[derive(Debug, Clone)]
pub struct FrameResiduals {
    pub xi_null: f64,
    pub n_null: f64,
    pub pairing: f64,
    pub xi_tangent: f64,
    pub screen_tangent: f64,
    pub screen_xi: f64,
    pub screen_n: f64,
    pub screen_gram: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        [
            self.xi_null,
            self.n_null,
            self.pairing,
            self.xi_tangent,
            self.screen_tangent,
            self.screen_xi,
            self.screen_n,
            self.screen_gram,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// The transversal determined by a rigging vector ζ with ḡ(ξ,ζ) ≠ 0:
/// N = (1/ḡ(ξ,ζ)) (ζ - (ḡ(ζ,ζ)/(2ḡ(ξ,ζ))) ξ).
pub fn rigging_transversal(
    g: &DMatrix<f64>,
    xi: &DVector<f64>,
    zeta: &DVector<f64>,
) -> DVector<f64> {
    let gxz = (xi.transpose() * g * zeta)[(0, 0)];
    let gzz = (zeta.transpose() * g * zeta)[(0, 0)];
    (zeta - (gzz / (2.0 * gxz)) * xi) / gxz
}

#[derive(Debug)]
pub struct FrameField<'a> {
    pub imm: &'a NullImmersion,
    pub recipe: FrameRecipe,
}

impl<'a> FrameField<'a> {
    pub fn new(imm: &'a NullImmersion, recipe: FrameRecipe) -> Self {
        FrameField { imm, recipe }
    }

    /// Rigging recipe against the first ambient coordinate axis.
    pub fn default_rigging(imm: &'a NullImmersion) -> Self {
        FrameField::new(
            imm,
            FrameRecipe::Rigging {
                zeta: imm.default_reference(),
            },
        )
    }

    /// Wrap this field's recipe in a gauge rescaling ξ' = fξ, N' = N/f.
    pub fn gauge(self, factor: ExpressionField) -> Self {
        FrameField {
            imm: self.imm,
            recipe: FrameRecipe::Gauge {
                inner: Box::new(self.recipe),
                factor,
            },
        }
    }

    pub fn sample(&self, u: &[f64]) -> Result<FrameSample, FrameError> {
        self.sample_recipe(&self.recipe, u)
    }

    fn sample_recipe(&self, recipe: &FrameRecipe, u: &[f64]) -> Result<FrameSample, FrameError> {
        let imm = self.imm;
        match recipe {
            FrameRecipe::Rigging { zeta } => {
                let xi = imm.radical_direction(u, zeta)?;
                let x = imm.ambient_point(u);
                let g = imm.ambient.metric_at(&x);
                let n = rigging_transversal(&g, &xi, &zeta.eval(&x));
                let mut s = FrameSample {
                    u: u.to_vec(),
                    x,
                    jacobian: imm.jacobian(u),
                    metric: g,
                    xi,
                    transversal: n,
                    screen: vec![],
                };
                s.screen = projected_screen(&s, imm.screen_dim())?;
                Ok(s)
            }
            FrameRecipe::FromCc { z } => {
                // ḡ(Z, ξ₀) = 1 by the radical normalization, so α = θ = ḡ(Z,Z)/2
                // and Z = ξ + θN with ξ = αξ₀, N = (Z - ξ)/θ.
                let xi0 = imm.radical_direction(u, z).map_err(|e| match e {
                    ImmersionError::CannotOrient { u } => FrameError::CcFieldTangent { u },
                    other => FrameError::Immersion(other),
                })?;
                let x = imm.ambient_point(u);
                let g = imm.ambient.metric_at(&x);
                let zv = z.eval(&x);
                let gzz = (zv.transpose() * &g * &zv)[(0, 0)];
                if gzz.abs() < 1e-10 {
                    return Err(FrameError::CcFieldNull {
                        u: u.to_vec(),
                        value: gzz,
                    });
                }
                let theta = gzz / 2.0;
                let xi = theta * xi0;
                let n = (zv - &xi) / theta;
                let mut s = FrameSample {
                    u: u.to_vec(),
                    x,
                    jacobian: imm.jacobian(u),
                    metric: g,
                    xi,
                    transversal: n,
                    screen: vec![],
                };
                s.screen = projected_screen(&s, imm.screen_dim())?;
                Ok(s)
            }
            FrameRecipe::Explicit { zeta, screen } => {
                let xi = imm.radical_direction(u, zeta)?;
                let x = imm.ambient_point(u);
                let g = imm.ambient.metric_at(&x);
                let j = imm.jacobian(u);
                let mut partial = FrameSample {
                    u: u.to_vec(),
                    x: x.clone(),
                    jacobian: j,
                    metric: g.clone(),
                    xi: xi.clone(),
                    transversal: DVector::zeros(imm.ambient.dim()),
                    screen: vec![],
                };
                let mut basis: Vec<DVector<f64>> = Vec::with_capacity(screen.len());
                for (index, field) in screen.iter().enumerate() {
                    let v = field.eval(&x);
                    let tr = partial.tangency_residual(&v);
                    if tr > 1e-7 {
                        return Err(FrameError::ScreenNotTangent {
                            u: u.to_vec(),
                            index,
                            residual: tr,
                        });
                    }
                    let gxv = partial.inner(&v, &xi);
                    if gxv.abs() > 1e-7 * v.norm().max(1.0) {
                        return Err(FrameError::ScreenMeetsRadical {
                            u: u.to_vec(),
                            index,
                            value: gxv,
                        });
                    }
                    let mut r = v;
                    for _ in 0..2 {
                        for b in &basis {
                            let c = partial.inner(&r, b);
                            r -= c * b;
                        }
                    }
                    let nrm2 = partial.inner(&r, &r);
                    if nrm2 < 1e-12 {
                        return Err(FrameError::ScreenDegenerate {
                            u: u.to_vec(),
                            kept: basis.len(),
                            needed: imm.screen_dim(),
                        });
                    }
                    basis.push(r / nrm2.sqrt());
                }
                if basis.len() != imm.screen_dim() {
                    return Err(FrameError::ScreenDegenerate {
                        u: u.to_vec(),
                        kept: basis.len(),
                        needed: imm.screen_dim(),
                    });
                }
                partial.transversal = solve_transversal(&partial, &basis);
                partial.screen = basis;
                Ok(partial)
            }
            FrameRecipe::GrwGraph => {
                let x = imm.ambient_point(u);
                let m = imm.ambient.dim();
                let g = imm.ambient.metric_at(&x);
                if (g[(0, 0)] + 1.0).abs() > 1e-10
                    || (1..m).any(|i| g[(0, i)].abs() > 1e-10)
                {
                    return Err(FrameError::NotGraphForm { u: u.to_vec() });
                }
                if m - 1 != u.len() || (1..m).any(|i| (x[i] - u[i - 1]).abs() > 1e-12) {
                    return Err(FrameError::NotGraph { u: u.to_vec() });
                }
                let spatial = g.view((1, 1), (m - 1, m - 1)).clone_owned();
                let grad_f = DVector::from_vec(imm.component(0).gradient(u));
                let w = spatial
                    .clone()
                    .lu()
                    .solve(&grad_f)
                    .ok_or(FrameError::NotGraphForm { u: u.to_vec() })?;
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                let mut xi = DVector::zeros(m);
                let mut n = DVector::zeros(m);
                xi[0] = inv_sqrt2;
                n[0] = -inv_sqrt2;
                for i in 1..m {
                    xi[i] = inv_sqrt2 * w[i - 1];
                    n[i] = inv_sqrt2 * w[i - 1];
                }
                let mut s = FrameSample {
                    u: u.to_vec(),
                    x,
                    jacobian: imm.jacobian(u),
                    metric: g,
                    xi,
                    transversal: n,
                    screen: vec![],
                };
                s.screen = projected_screen(&s, imm.screen_dim())?;
                Ok(s)
            }
            FrameRecipe::Gauge { inner, factor } => {
                let mut s = self.sample_recipe(inner, u)?;
                let f = factor.eval(u);
                if f.abs() < 1e-12 {
                    return Err(FrameError::GaugeZero { u: u.to_vec() });
                }
                s.xi *= f;
                s.transversal /= f;
                Ok(s)
            }
        }
    }

    /// All eight frame identities at `u`.
    pub fn validate(&self, u: &[f64]) -> Result<FrameResiduals, FrameError> {
        let s = self.sample(u)?;
        Ok(validate_sample(&s))
    }
}

pub fn validate_sample(s: &FrameSample) -> FrameResiduals {
    let mut screen_xi: f64 = 0.0;
    let mut screen_n: f64 = 0.0;
    let mut screen_gram: f64 = 0.0;
    let mut screen_tangent: f64 = 0.0;
    for (i, e) in s.screen.iter().enumerate() {
        screen_xi = screen_xi.max(s.inner(e, &s.xi).abs());
        screen_n = screen_n.max(s.inner(e, &s.transversal).abs());
        screen_tangent = screen_tangent.max(s.tangency_residual(e));
        for (j, f) in s.screen.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            screen_gram = screen_gram.max((s.inner(e, f) - delta).abs());
        }
    }
    FrameResiduals {
        xi_null: s.inner(&s.xi, &s.xi).abs(),
        n_null: s.inner(&s.transversal, &s.transversal).abs(),
        pairing: (s.inner(&s.xi, &s.transversal) - 1.0).abs(),
        xi_tangent: s.tangency_residual(&s.xi),
        screen_tangent,
        screen_xi,
        screen_n,
        screen_gram,
    }
}

/// Orthonormal screen basis from the projected pushforward columns, in
/// parameter-axis order (modified Gram-Schmidt with one re-orthogonalization
/// pass; exactly one near-zero direction is dropped).
fn projected_screen(s: &FrameSample, needed: usize) -> Result<Vec<DVector<f64>>, FrameError> {
    let q = s.jacobian.ncols();
    let projected: Vec<DVector<f64>> = (0..q)
        .map(|i| s.screen_project(&s.jacobian.column(i).clone_owned()))
        .collect();
    let scale = projected
        .iter()
        .map(|v| s.inner(v, v).abs())
        .fold(0.0, f64::max)
        .max(1e-30);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(needed);
    for c in &projected {
        if basis.len() == needed {
            break;
        }
        let mut r = c.clone();
        for _ in 0..2 {
            for b in &basis {
                let coef = s.inner(&r, b);
                r -= coef * b;
            }
        }
        let nrm2 = s.inner(&r, &r);
        if nrm2 <= 1e-12 * scale {
            continue;
        }
        basis.push(r / nrm2.sqrt());
    }
    if basis.len() != needed {
        return Err(FrameError::ScreenDegenerate {
            u: s.u.clone(),
            kept: basis.len(),
            needed,
        });
    }
    Ok(basis)
}

/// Solve for the unique null transversal: ḡ(w, e_i) = 0, ḡ(w, ξ) = 1, then
/// subtract (ḡ(w,w)/2) ξ to make it null.
fn solve_transversal(s: &FrameSample, basis: &[DVector<f64>]) -> DVector<f64> {
    let m = s.metric.nrows();
    let rows = basis.len() + 1;
    let mut a = DMatrix::zeros(rows, m);
    let mut rhs = DVector::zeros(rows);
    for (i, b) in basis.iter().enumerate() {
        let gb = &s.metric * b;
        for k in 0..m {
            a[(i, k)] = gb[k];
        }
    }
    let gx = &s.metric * &s.xi;
    for k in 0..m {
        a[(rows - 1, k)] = gx[k];
    }
    rhs[rows - 1] = 1.0;
    let w = a.svd(true, true).solve(&rhs, 1e-12).expect("svd solve");
    let gww = s.inner(&w, &w);
    w - (gww / 2.0) * &s.xi
}
