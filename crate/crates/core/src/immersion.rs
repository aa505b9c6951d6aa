//! Parametrized degenerate hypersurfaces: rank diagnostics and the radical
//! direction.

use crate::ambient::{AmbientManifold, VectorField};
use crate::expr::ExpressionField;
use crate::tolerances::RADICAL_REL_TOL;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImmersionError {
    #[error("component count {got} does not match ambient dimension {expected}")]
    ComponentCount { expected: usize, got: usize },
    #[error("domain/grid specification does not match parameter count")]
    DomainShape,
    #[error("Jacobian is rank deficient at {u:?} (σ_min = {sigma_min:.3e}): not an immersion")]
    RankDeficient { u: Vec<f64>, sigma_min: f64 },
    #[error("induced metric is not degenerate of corank 1 at {u:?}: singular values {sv:?}")]
    NotDegenerate { u: Vec<f64>, sv: Vec<f64> },
    #[error("radical direction fails the null check at {u:?}: g(ξ,ξ) = {value:.3e}")]
    NotNull { u: Vec<f64>, value: f64 },
    #[error("reference field is orthogonal to the radical at {u:?}; cannot orient ξ")]
    CannotOrient { u: Vec<f64> },
    #[error(transparent)]
    Geom(#[from] crate::ambient::GeomError),
    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),
}

/// A parametrized immersion `Φ: domain → ambient` with degenerate pullback
/// metric.
#[derive(Debug, Clone)]
pub struct NullImmersion {
    pub ambient: AmbientManifold,
    params: Vec<String>,
    components: Vec<ExpressionField>,
    pub domain: Vec<(f64, f64)>,
    pub grid: Vec<usize>,
}

/// Induced Gram matrix together with its singular values.
#[derive(Debug, Clone)]
pub struct GramDiagnostics {
    pub gram: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

impl NullImmersion {
    pub fn new(
        ambient: AmbientManifold,
        params: &[&str],
        components: Vec<ExpressionField>,
        domain: Vec<(f64, f64)>,
        grid: Vec<usize>,
    ) -> Result<Self, ImmersionError> {
        if components.len() != ambient.dim() {
            return Err(ImmersionError::ComponentCount {
                expected: ambient.dim(),
                got: components.len(),
            });
        }
        if domain.len() != params.len() || grid.len() != params.len() {
            return Err(ImmersionError::DomainShape);
        }
        Ok(NullImmersion {
            ambient,
            params: params.iter().map(|s| s.to_string()).collect(),
            components,
            domain,
            grid,
        })
    }

    pub fn parse(
        ambient: AmbientManifold,
        params: &[&str],
        component_sources: &[&str],
        domain: Vec<(f64, f64)>,
        grid: Vec<usize>,
    ) -> Result<Self, ImmersionError> {
        let components = component_sources
            .iter()
            .map(|s| ExpressionField::parse(s, params))
            .collect::<Result<Vec<_>, _>>()?;
        NullImmersion::new(ambient, params, components, domain, grid)
    }

    pub fn params(&self) -> Vec<&str> {
        self.params.iter().map(|s| s.as_str()).collect()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Screen dimension `n = (ambient dim) - 2`.
    pub fn screen_dim(&self) -> usize {
        self.ambient.dim() - 2
    }

    pub fn component(&self, k: usize) -> &ExpressionField {
        &self.components[k]
    }

    pub fn ambient_point(&self, u: &[f64]) -> Vec<f64> {
        self.components.iter().map(|f| f.eval(u)).collect()
    }

    /// Pushforward matrix `J[(k, i)] = ∂Φ^k/∂u^i`.
    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let m = self.ambient.dim();
        let grads: Vec<Vec<f64>> = self.components.iter().map(|f| f.gradient(u)).collect();
        DMatrix::from_fn(m, u.len(), |k, i| grads[k][i])
    }

    /// `J^T ḡ J` with singular-value diagnostics.
    pub fn induced_gram(&self, u: &[f64]) -> Result<GramDiagnostics, ImmersionError> {
        let j = self.jacobian(u);
        let jsv = j.clone().svd(false, false);
        let jmin = jsv.singular_values.iter().cloned().fold(f64::MAX, f64::min);
        let jmax = jsv.singular_values.iter().cloned().fold(0.0, f64::max);
        if jmin <= 1e-10 * jmax {
            return Err(ImmersionError::RankDeficient {
                u: u.to_vec(),
                sigma_min: jmin,
            });
        }
        let x = self.ambient_point(u);
        let g = self.ambient.metric_at(&x);
        let gram = j.transpose() * g * &j;
        let mut sv: Vec<f64> = gram.clone().svd(false, false).singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(GramDiagnostics {
            gram,
            singular_values: sv,
        })
    }

    /// Checks corank-1 degeneracy of the induced metric at `u`.
    pub fn check_degenerate(&self, u: &[f64]) -> Result<GramDiagnostics, ImmersionError> {
        let d = self.induced_gram(u)?;
        let sv = &d.singular_values;
        let smax = sv[0];
        let tol_rad = RADICAL_REL_TOL * smax;
        let smallest = sv[sv.len() - 1];
        let second = if sv.len() >= 2 { sv[sv.len() - 2] } else { smax };
        if smallest > tol_rad || second < 100.0 * tol_rad {
            return Err(ImmersionError::NotDegenerate {
                u: u.to_vec(),
                sv: sv.clone(),
            });
        }
        Ok(d)
    }

    /// The radical direction at `u`, in ambient components, normalized so that
    /// `ḡ(ξ, ζ_ref) = 1` against the orientation reference field.
    pub fn radical_direction(
        &self,
        u: &[f64],
        zeta_ref: &VectorField,
    ) -> Result<DVector<f64>, ImmersionError> {
        self.check_degenerate(u)?;
        let j = self.jacobian(u);
        let x = self.ambient_point(u);
        let g = self.ambient.metric_at(&x);
        let gram = j.transpose() * &g * &j;
        let svd = gram.svd(false, true);
        // Right-singular vector of the smallest singular value spans the kernel.
        let vt = svd.v_t.as_ref().expect("svd with V requested");
        let idx = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .expect("non-empty singular values");
        let a = vt.row(idx).transpose();
        let xi0 = &j * a;
        let zeta = zeta_ref.eval(&x);
        let scale = (xi0.transpose() * &g * &zeta)[(0, 0)];
        if scale.abs() < 1e-12 {
            return Err(ImmersionError::CannotOrient { u: u.to_vec() });
        }
        let xi = xi0 / scale;
        let null_check = (xi.transpose() * &g * &xi)[(0, 0)];
        let xi_scale = (xi.transpose() * &xi)[(0, 0)];
        if null_check.abs() > 1e-7 * xi_scale.max(1.0) {
            return Err(ImmersionError::NotNull {
                u: u.to_vec(),
                value: null_check,
            });
        }
        Ok(xi)
    }

    /// Default orientation reference: the first ambient coordinate axis.
    pub fn default_reference(&self) -> VectorField {
        VectorField::coordinate_axis(&self.ambient, 0)
    }

    /// Row-major list of grid points over the domain box.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .domain
            .iter()
            .zip(&self.grid)
            .map(|(&(a, b), &count)| linspace(a, b, count))
            .collect();
        let mut out = vec![vec![]];
        for axis in &axes {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for &v in axis {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    pub fn in_domain(&self, u: &[f64]) -> bool {
        u.iter()
            .zip(&self.domain)
            .all(|(&v, &(a, b))| v >= a - 1e-12 && v <= b + 1e-12)
    }
}

pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![a];
    }
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientManifold;
    use approx::assert_relative_eq;

    fn null_hyperplane_r3() -> NullImmersion {
        // t = x in ℝ³₁, parametrized (u, u, v).
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

    fn light_cone_graph() -> NullImmersion {
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

    #[test]
    fn hyperplane_gram() {
        let imm = null_hyperplane_r3();
        let d = imm.induced_gram(&[0.3, -0.2]).unwrap();
        assert_relative_eq!(d.gram[(0, 0)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(d.gram[(0, 1)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(d.gram[(1, 1)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn light_cone_gram_is_rank_one() {
        let imm = light_cone_graph();
        let d = imm.induced_gram(&[1.0, 0.0]).unwrap();
        assert!(d.singular_values[1] <= 1e-12);
        assert!(d.singular_values[0] > 0.5);
        imm.check_degenerate(&[1.0, 0.0]).unwrap();
    }

    #[test]
    fn spacelike_slice_rejected() {
        // t = 0 plane is Riemannian, not degenerate.
        let m = AmbientManifold::minkowski(&["t", "x", "y"]);
        let imm = NullImmersion::parse(
            m,
            &["u", "v"],
            &["0", "u", "v"],
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            vec![4, 4],
        )
        .unwrap();
        assert!(matches!(
            imm.check_degenerate(&[0.2, 0.4]),
            Err(ImmersionError::NotDegenerate { .. })
        ));
    }

    #[test]
    fn hyperplane_radical_direction() {
        let imm = null_hyperplane_r3();
        let xi = imm
            .radical_direction(&[0.3, -0.2], &imm.default_reference())
            .unwrap();
        // ξ ∝ (1,1,0), normalized so ḡ(ξ, e₀) = 1, i.e. ξ = (-1,-1,0).
        assert_relative_eq!(xi[0], -1.0, epsilon = 1e-9);
        assert_relative_eq!(xi[1], -1.0, epsilon = 1e-9);
        assert_relative_eq!(xi[2], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn light_cone_radical_is_position() {
        // Null-space oracle: ξ must be proportional to the position vector.
        let imm = light_cone_graph();
        let u = [2.0, 1.0];
        let xi = imm.radical_direction(&u, &imm.default_reference()).unwrap();
        let x = imm.ambient_point(&u);
        let r = (u[0] * u[0] + u[1] * u[1]).sqrt();
        // ḡ(ξ, e₀) = -ξ⁰ = 1 forces ξ = -Φ/r.
        for k in 0..3 {
            assert_relative_eq!(xi[k], -x[k] / r, epsilon = 1e-9);
        }
    }

    #[test]
    fn grid_points_are_row_major_and_cover_domain() {
        let imm = null_hyperplane_r3();
        let pts = imm.grid_points();
        assert_eq!(pts.len(), 16);
        assert_eq!(pts[0], vec![-1.0, -1.0]);
        assert_eq!(pts[15], vec![1.0, 1.0]);
        assert_eq!(pts[1], vec![-1.0, -1.0 + 2.0 / 3.0]);
    }
}
