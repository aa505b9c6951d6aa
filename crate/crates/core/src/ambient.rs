//! Ambient Lorentzian manifolds given by closed-form metric components.
//!
//! The metric is stored as expression fields over the coordinate names; jets
//! supply the first and second derivatives that Christoffel symbols and the
//! curvature tensor need. The curvature sign convention is fixed so that on a
//! Lorentzian spaceform `R(X,Y)U = c (g(X,U) Y - g(Y,U) X)` with `c = +1` on
//! de Sitter space.

use crate::expr::ExpressionField;
use crate::jet::Jet2;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("singular metric at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("metric is not Lorentzian at {point:?}: {negative} negative eigenvalues")]
    NotLorentzian { point: Vec<f64>, negative: usize },
    #[error("every coordinate direction is null at {point:?}")]
    AllDirectionsNull { point: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("warp function must be positive on the interval, found {value} at t={t}")]
    NonPositiveWarp { t: f64, value: f64 },
}

fn pack(i: usize, j: usize) -> usize {
    let (a, b) = if i >= j { (i, j) } else { (j, i) };
    a * (a + 1) / 2 + b
}

/// An ambient manifold with Lorentzian metric given in closed form.
#[derive(Debug, Clone)]
pub struct AmbientManifold {
    coords: Vec<String>,
    /// Lower-triangle packed metric components; symmetry is structural.
    metric: Vec<ExpressionField>,
    signature_check_points: Vec<Vec<f64>>,
}

impl AmbientManifold {
    /// Builds a manifold from the lower triangle `g[i][j]`, `i >= j`, of the
    /// metric component expressions.
    pub fn new(
        coords: &[&str],
        lower_triangle: Vec<ExpressionField>,
        signature_check_points: Vec<Vec<f64>>,
    ) -> Result<Self, GeomError> {
        let dim = coords.len();
        let expected = dim * (dim + 1) / 2;
        if lower_triangle.len() != expected {
            return Err(GeomError::Dimension {
                expected,
                got: lower_triangle.len(),
            });
        }
        let m = AmbientManifold {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            metric: lower_triangle,
            signature_check_points,
        };
        m.check_signature()?;
        Ok(m)
    }

    /// Constant-diagonal metric, e.g. Minkowski `diag(-1, 1, ..., 1)`.
    pub fn diagonal(coords: &[&str], diag: &[f64]) -> Result<Self, GeomError> {
        let dim = coords.len();
        let mut tri = Vec::new();
        for i in 0..dim {
            for j in 0..=i {
                let v = if i == j { diag[i] } else { 0.0 };
                tri.push(ExpressionField::constant(v, coords));
            }
        }
        AmbientManifold::new(coords, tri, vec![vec![0.0; dim]])
    }

    pub fn minkowski(coords: &[&str]) -> Self {
        let mut diag = vec![1.0; coords.len()];
        diag[0] = -1.0;
        AmbientManifold::diagonal(coords, &diag).expect("constant diagonal metric")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> Vec<&str> {
        self.coords.iter().map(|s| s.as_str()).collect()
    }

    pub fn metric_component(&self, i: usize, j: usize) -> &ExpressionField {
        &self.metric[pack(i, j)]
    }

    fn check_signature(&self) -> Result<(), GeomError> {
        for p in &self.signature_check_points {
            let g = self.metric_at(p);
            let eig = g.symmetric_eigenvalues();
            let negative = eig.iter().filter(|&&l| l < 0.0).count();
            if negative != 1 {
                return Err(GeomError::NotLorentzian {
                    point: p.clone(),
                    negative,
                });
            }
        }
        Ok(())
    }

    pub fn metric_at(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.metric[pack(i, j)].eval(p))
    }

    fn metric_jets_at(&self, p: &[f64]) -> Vec<Jet2> {
        self.metric.iter().map(|f| f.eval_jet(p)).collect()
    }

    pub fn inverse_metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>, GeomError> {
        self.metric_at(p)
            .try_inverse()
            .ok_or_else(|| GeomError::SingularMetric { point: p.to_vec() })
    }

    pub fn inner(&self, p: &[f64], v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * self.metric_at(p) * w)[(0, 0)]
    }

    /// Christoffel symbols `gamma[k][i][j]` of the Levi-Civita connection.
    pub fn christoffel(&self, p: &[f64]) -> Result<Christoffel, GeomError> {
        let n = self.dim();
        let ginv = self.inverse_metric_at(p)?;
        let jets = self.metric_jets_at(p);
        // dg[c][i][j] = ∂_c g_ij
        let dg = |c: usize, i: usize, j: usize| jets[pack(i, j)].grad[c];
        let mut gamma = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..=i {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j));
                    }
                    let v = 0.5 * s;
                    gamma[(k * n + i) * n + j] = v;
                    gamma[(k * n + j) * n + i] = v;
                }
            }
        }
        Ok(Christoffel { dim: n, gamma })
    }

    /// Covariant derivative of an ambient vector field along tangent vector
    /// `x` at `p`.
    pub fn covariant_derivative(
        &self,
        field: &VectorField,
        p: &[f64],
        x: &DVector<f64>,
    ) -> Result<DVector<f64>, GeomError> {
        let gamma = self.christoffel(p)?;
        let n = self.dim();
        let v = field.eval(p);
        let dv = field.jacobian(p); // dv[(k, i)] = ∂_i V^k
        let mut out = DVector::zeros(n);
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += x[i] * dv[(k, i)];
                for j in 0..n {
                    s += gamma.get(k, i, j) * x[i] * v[j];
                }
            }
            out[k] = s;
        }
        Ok(out)
    }

    /// Curvature coefficients `r[l][i][j][k]` of `R(e_i, e_j) e_k` in the
    /// convention stated at module level.
    pub fn riemann_coeffs(&self, p: &[f64]) -> Result<RiemannCoeffs, GeomError> {
        let n = self.dim();
        let ginv = self.inverse_metric_at(p)?;
        let jets = self.metric_jets_at(p);
        let dg = |c: usize, i: usize, j: usize| jets[pack(i, j)].grad[c];
        let d2g = |c: usize, d: usize, i: usize, j: usize| jets[pack(i, j)].hess_at(c, d);

        // Γ and ∂Γ from metric first and second derivatives. Differentiating
        // Γ^k_ij = ½ g^kl (∂_i g_lj + ∂_j g_li - ∂_l g_ij) in direction c uses
        // ∂_c g^kl = -g^ka (∂_c g_ab) g^bl.
        let gamma = self.christoffel(p)?;
        let mut dgamma = vec![0.0; n * n * n * n]; // [c][k][i][j]
        for c in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            let mut dginv = 0.0;
                            for a in 0..n {
                                for b in 0..n {
                                    dginv -= ginv[(k, a)] * dg(c, a, b) * ginv[(b, l)];
                                }
                            }
                            s += dginv * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j));
                            s += ginv[(k, l)]
                                * (d2g(c, i, l, j) + d2g(c, j, l, i) - d2g(c, l, i, j));
                        }
                        dgamma[((c * n + k) * n + i) * n + j] = 0.5 * s;
                    }
                }
            }
        }
        let dga = |c: usize, k: usize, i: usize, j: usize| dgamma[((c * n + k) * n + i) * n + j];

        // Commutator-convention coefficients, then a global sign flip so the
        // spaceform identity holds with c = +1 on de Sitter.
        let mut r = vec![0.0; n * n * n * n]; // [l][i][j][k]
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut s = dga(i, l, j, k) - dga(j, l, i, k);
                        for m in 0..n {
                            s += gamma.get(l, i, m) * gamma.get(m, j, k)
                                - gamma.get(l, j, m) * gamma.get(m, i, k);
                        }
                        r[((l * n + i) * n + j) * n + k] = -s;
                    }
                }
            }
        }
        Ok(RiemannCoeffs { dim: n, r })
    }

    /// `R(x, y) u` at `p`.
    pub fn riemann(
        &self,
        p: &[f64],
        x: &DVector<f64>,
        y: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>, GeomError> {
        Ok(self.riemann_coeffs(p)?.apply(x, y, u))
    }

    /// Fits the closed-conformal factor and residual of `∇_X Z = φ X` over the
    /// coordinate basis at `p`.
    pub fn cc_at(&self, field: &VectorField, p: &[f64]) -> Result<CcSample, GeomError> {
        let n = self.dim();
        let g = self.metric_at(p);
        let gamma = self.christoffel(p)?;
        let v = field.eval(p);
        let dv = field.jacobian(p);
        // nabla[(k, i)] = (∇_{∂_i} Z)^k
        let mut nabla = DMatrix::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                let mut s = dv[(k, i)];
                for j in 0..n {
                    s += gamma.get(k, i, j) * v[j];
                }
                nabla[(k, i)] = s;
            }
        }
        // φ fitted on the first non-null coordinate direction.
        let i0 = (0..n).find(|&i| g[(i, i)].abs() > 1e-12);
        let Some(i0) = i0 else {
            return Err(GeomError::AllDirectionsNull { point: p.to_vec() });
        };
        let col = nabla.column(i0).into_owned();
        let e0 = DVector::from_fn(n, |r, _| if r == i0 { 1.0 } else { 0.0 });
        let phi = self.inner(p, &col, &e0) / g[(i0, i0)];
        let mut residual: f64 = 0.0;
        for i in 0..n {
            let mut col = nabla.column(i).into_owned();
            col[i] -= phi;
            residual = residual.max(col.norm());
        }
        Ok(CcSample { phi, residual })
    }

    /// Runs [`AmbientManifold::cc_at`] over a list of sample points.
    pub fn cc_test(&self, field: &VectorField, samples: &[Vec<f64>], tol: f64) -> CcReport {
        let mut phi = Vec::new();
        let mut residual = Vec::new();
        let mut skipped = Vec::new();
        for (idx, p) in samples.iter().enumerate() {
            match self.cc_at(field, p) {
                Ok(s) => {
                    phi.push(s.phi);
                    residual.push(s.residual);
                }
                Err(_) => skipped.push(idx),
            }
        }
        let is_cc = !residual.is_empty() && residual.iter().all(|&r| r <= tol);
        CcReport {
            is_cc,
            phi,
            residual,
            skipped,
        }
    }

    /// Max over the given random vector triples of the spaceform identity
    /// residual `‖R(X,Y)U - c (g(X,U) Y - g(Y,U) X)‖`.
    pub fn spaceform_residual(
        &self,
        c: f64,
        samples: &[Vec<f64>],
        triples_per_sample: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<f64, GeomError> {
        let n = self.dim();
        let mut max = 0.0_f64;
        for p in samples {
            let coeffs = self.riemann_coeffs(p)?;
            let g = self.metric_at(p);
            for _ in 0..triples_per_sample {
                let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let r = coeffs.apply(&x, &y, &u);
                let gxu = (x.transpose() * &g * &u)[(0, 0)];
                let gyu = (y.transpose() * &g * &u)[(0, 0)];
                let model = (&y * (c * gxu)) - (&x * (c * gyu));
                max = max.max((r - model).norm());
            }
        }
        Ok(max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CcSample {
    pub phi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct CcReport {
    pub is_cc: bool,
    pub phi: Vec<f64>,
    pub residual: Vec<f64>,
    pub skipped: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Christoffel {
    dim: usize,
    gamma: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.dim + i) * self.dim + j]
    }
}

#[derive(Debug, Clone)]
pub struct RiemannCoeffs {
    dim: usize,
    r: Vec<f64>,
}

impl RiemannCoeffs {
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.r[((l * self.dim + i) * self.dim + j) * self.dim + k]
    }

    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for l in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        s += self.get(l, i, j, k) * x[i] * y[j] * u[k];
                    }
                }
            }
            out[l] = s;
        }
        out
    }
}

/// An ambient vector field with expression-field components.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<ExpressionField>,
}

impl VectorField {
    pub fn new(components: Vec<ExpressionField>) -> Self {
        VectorField { components }
    }

    /// Parses each component over the manifold's coordinates.
    pub fn parse(m: &AmbientManifold, sources: &[&str]) -> Result<Self, crate::expr::ParseError> {
        let coords = m.coords();
        let components = sources
            .iter()
            .map(|s| ExpressionField::parse(s, &coords))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorField { components })
    }

    /// The coordinate basis field `e_i`.
    pub fn coordinate_axis(m: &AmbientManifold, i: usize) -> Self {
        let coords = m.coords();
        let components = (0..m.dim())
            .map(|k| ExpressionField::constant(if k == i { 1.0 } else { 0.0 }, &coords))
            .collect();
        VectorField { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, k: usize) -> &ExpressionField {
        &self.components[k]
    }

    pub fn eval(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.components.iter().map(|f| f.eval(p)))
    }

    /// `jac[(k, i)] = ∂_i V^k`.
    pub fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let grads: Vec<Vec<f64>> = self.components.iter().map(|f| f.gradient(p)).collect();
        DMatrix::from_fn(n, p.len(), |k, i| grads[k][i])
    }
}

/// A generalized Robertson-Walker warped product `-dt² + ϱ(t)² g_F`.
#[derive(Debug, Clone)]
pub struct GrwSpec {
    pub interval: (f64, f64),
    pub warp: ExpressionField,
    pub fiber_coords: Vec<String>,
    /// Lower-triangle packed fiber metric over the fiber coordinates.
    pub fiber_metric: Vec<ExpressionField>,
}

impl GrwSpec {
    /// Flat fiber `ℝ^k` with identity metric.
    pub fn flat_fiber(interval: (f64, f64), warp: ExpressionField, fiber_coords: &[&str]) -> Self {
        let k = fiber_coords.len();
        let mut tri = Vec::new();
        for i in 0..k {
            for j in 0..=i {
                tri.push(ExpressionField::constant(
                    if i == j { 1.0 } else { 0.0 },
                    fiber_coords,
                ));
            }
        }
        GrwSpec {
            interval,
            warp,
            fiber_coords: fiber_coords.iter().map(|s| s.to_string()).collect(),
            fiber_metric: tri,
        }
    }

    /// Assembles the ambient manifold with coordinates `(t, fiber...)`.
    pub fn assemble(&self, signature_check_points: Vec<Vec<f64>>) -> Result<AmbientManifold, GeomError> {
        // ϱ must stay positive on the interval.
        let (a, b) = self.interval;
        for s in 0..=16 {
            let t = a + (b - a) * s as f64 / 16.0;
            let v = self.warp.eval(&[t]);
            if v <= 0.0 {
                return Err(GeomError::NonPositiveWarp { t, value: v });
            }
        }
        let mut coords = vec!["t".to_string()];
        coords.extend(self.fiber_coords.iter().cloned());
        let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
        let warp = self.warp.embed(&coord_refs);
        let warp_sq = warp.product(&warp);
        let dim = coords.len();
        let mut tri = Vec::new();
        for i in 0..dim {
            for j in 0..=i {
                if i == 0 && j == 0 {
                    tri.push(ExpressionField::constant(-1.0, &coord_refs));
                } else if j == 0 {
                    tri.push(ExpressionField::constant(0.0, &coord_refs));
                } else {
                    let fib = self.fiber_metric[pack(i - 1, j - 1)].embed(&coord_refs);
                    tri.push(warp_sq.product(&fib));
                }
            }
        }
        AmbientManifold::new(&coord_refs, tri, signature_check_points)
    }
}
