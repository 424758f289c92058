//! Unit tangent vector fields on S^{2k+1} and their covariant derivatives.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::expr::Expr;
use crate::sphere::{
    complete_adapted_frame, geodesic, project, project_tangent, standard_basis, uniform_point,
    SphereDim, SpherePoint, TangentVector,
};

/// Step for the central-difference covariant derivative.
pub const FD_STEP: f64 = 1e-5;
/// Allowed discrepancy between the step-h and step-h/2 estimates.
pub const FD_SMOOTHNESS_TOL: f64 = 1e-4;
/// Projected ambient vectors shorter than this are treated as zeros of the field.
const MIN_PROJECTED_NORM: f64 = 1e-8;
const VALIDATION_SAMPLES: usize = 1000;

type AmbientFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

#[derive(Clone)]
enum FieldKind {
    Hopf,
    Lambda(f64),
    /// Ambient formula, projected onto T_pS and normalized at evaluation.
    Formula(Arc<AmbientFn>),
}

/// A unit tangent vector field on S^{2k+1}.
#[derive(Clone)]
pub struct FieldDefinition {
    dim: SphereDim,
    label: String,
    kind: FieldKind,
}

impl fmt::Debug for FieldDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldDefinition")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

/// The Hopf field H(x) = i·x under R^{2k+2} ≅ C^{k+1}.
pub fn hopf(dim: SphereDim) -> FieldDefinition {
    let label = if dim.k() == 1 {
        "hopf".to_string()
    } else {
        format!("hopf:{}", dim.k())
    };
    FieldDefinition {
        dim,
        label,
        kind: FieldKind::Hopf,
    }
}

/// v_λ(x,y,z,w) = (−λy, λx, −w, z)/√(1+(λ²−1)(x²+y²)) on S³.
pub fn lambda_field(lambda: f64) -> Result<FieldDefinition> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "lambda must be >= 1, got {lambda}"
        )));
    }
    Ok(FieldDefinition {
        dim: SphereDim::three(),
        label: format!("lambda:{lambda}"),
        kind: FieldKind::Lambda(lambda),
    })
}

impl FieldDefinition {
    /// Parses `hopf`, `hopf:<k>`, `lambda:<λ>` or `custom:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        match (kind, arg) {
            ("hopf", "") => Ok(hopf(SphereDim::three())),
            ("hopf", k) => {
                let k = k
                    .parse::<usize>()
                    .map_err(|_| LabError::InvalidParameter(format!("bad sphere parameter in '{spec}'")))?;
                Ok(hopf(SphereDim::new(k)?))
            }
            ("lambda", l) if !l.is_empty() => {
                let l = l
                    .parse::<f64>()
                    .map_err(|_| LabError::InvalidParameter(format!("bad lambda in '{spec}'")))?;
                lambda_field(l)
            }
            ("custom", path) if !path.is_empty() => Self::from_file(Path::new(path)),
            _ => Err(LabError::InvalidParameter(format!("unknown field '{spec}'"))),
        }
    }

    /// Field given by an ambient formula `w`; evaluation returns the
    /// normalized tangential part of `w(p)`. Derivatives use finite
    /// differences.
    pub fn from_ambient_fn<F>(dim: SphereDim, label: impl Into<String>, w: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        FieldDefinition {
            dim,
            label: label.into(),
            kind: FieldKind::Formula(Arc::new(w)),
        }
    }

    /// Parses 2k+2 component expressions in the variables `x1..x{2k+2}`
    /// (plus `x y z w` on S³) and validates the result on a fixed sample of
    /// points.
    pub fn from_expressions(label: impl Into<String>, lines: &[&str]) -> Result<Self> {
        let dim = SphereDim::from_ambient(lines.len()).map_err(|_| LabError::Expression {
            line: 0,
            message: format!(
                "expected 4, 6 or 8 component expressions, found {}",
                lines.len()
            ),
        })?;
        let names = variable_names(dim.ambient());
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let exprs = lines
            .iter()
            .enumerate()
            .map(|(i, src)| {
                Expr::parse(src, &names).map_err(|e| LabError::Expression {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = dim.ambient();
        let field = FieldDefinition::from_ambient_fn(dim, label, move |x: &DVector<f64>| {
            // aliases x y z w occupy the slots after x1..x4 on S³
            let mut vars: Vec<f64> = x.iter().copied().collect();
            if n == 4 {
                vars.extend(x.iter().copied());
            }
            DVector::from_iterator(n, exprs.iter().map(|e| e.eval(&vars)))
        });
        field.validate()?;
        Ok(field)
    }

    /// Reads a custom field file: one expression per non-empty line, `#`
    /// starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .collect();
        Self::from_expressions(format!("custom:{}", path.display()), &lines)
    }

    /// Evaluates at a fixed pseudo-random sample and rejects fields that
    /// vanish or blow up there.
    pub fn validate(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f1e1d);
        for _ in 0..VALIDATION_SAMPLES {
            let p = uniform_point(self.dim, &mut rng);
            let v = self.evaluate(&p)?;
            if (v.norm() - 1.0).abs() > 1e-10 || v.vec().dot(p.coords()).abs() > 1e-10 {
                return Err(self.degenerate(&p, "not unit tangent after normalization"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> SphereDim {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True for the Hopf field (including v_λ at λ = 1).
    pub fn is_hopf(&self) -> bool {
        match self.kind {
            FieldKind::Hopf => true,
            FieldKind::Lambda(l) => l == 1.0,
            FieldKind::Formula(_) => false,
        }
    }

    pub fn has_exact_jacobian(&self) -> bool {
        !matches!(self.kind, FieldKind::Formula(_))
    }

    fn check_point(&self, p: &SpherePoint) -> Result<()> {
        if p.ambient_dim() != self.dim.ambient() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim.ambient(),
                actual: p.ambient_dim(),
            });
        }
        Ok(())
    }

    fn degenerate(&self, p: &SpherePoint, reason: &str) -> LabError {
        LabError::DegenerateField {
            label: self.label.clone(),
            point: p.coords().iter().copied().collect(),
            reason: reason.to_string(),
        }
    }

    /// The field vector at `p`.
    pub fn evaluate(&self, p: &SpherePoint) -> Result<TangentVector> {
        self.check_point(p)?;
        let x = p.coords();
        let v = match &self.kind {
            FieldKind::Hopf => complex_structure(x),
            FieldKind::Lambda(l) => {
                let (scale, _) = lambda_scale(*l, x);
                DVector::from_column_slice(&[-l * x[1], l * x[0], -x[3], x[2]]) * scale
            }
            FieldKind::Formula(w) => {
                let t = project(x, &w(x));
                let n = t.norm();
                if !n.is_finite() {
                    return Err(self.degenerate(p, "non-finite value"));
                }
                if n < MIN_PROJECTED_NORM {
                    return Err(self.degenerate(p, "tangential part vanishes"));
                }
                t / n
            }
        };
        Ok(TangentVector::new_unchecked(p.clone(), v))
    }

    /// Ambient Jacobian of the closed-form formula, when one is available.
    pub fn exact_jacobian(&self, p: &SpherePoint) -> Option<DMatrix<f64>> {
        let x = p.coords();
        match &self.kind {
            FieldKind::Hopf => {
                let n = self.dim.ambient();
                let mut j = DMatrix::zeros(n, n);
                for b in 0..n / 2 {
                    j[(2 * b, 2 * b + 1)] = -1.0;
                    j[(2 * b + 1, 2 * b)] = 1.0;
                }
                Some(j)
            }
            FieldKind::Lambda(l) => {
                let l = *l;
                let (g, dg) = lambda_scale(l, x);
                let w = [-l * x[1], l * x[0], -x[3], x[2]];
                let mut j = DMatrix::zeros(4, 4);
                j[(0, 1)] = -l * g;
                j[(1, 0)] = l * g;
                j[(2, 3)] = -g;
                j[(3, 2)] = g;
                // chain rule through r² = x² + y²
                for (i, wi) in w.iter().enumerate() {
                    j[(i, 0)] += wi * dg * 2.0 * x[0];
                    j[(i, 1)] += wi * dg * 2.0 * x[1];
                }
                Some(j)
            }
            FieldKind::Formula(_) => None,
        }
    }
}

/// (g, dg/d(r²)) for g(r²) = (1 + (λ²−1) r²)^{-1/2}.
fn lambda_scale(lambda: f64, x: &DVector<f64>) -> (f64, f64) {
    let c = lambda * lambda - 1.0;
    let r2 = x[0] * x[0] + x[1] * x[1];
    let base = 1.0 + c * r2;
    let g = 1.0 / base.sqrt();
    (g, -0.5 * c * g / base)
}

/// Multiplication by i on C^{k+1}: (x₁,y₁,…) ↦ (−y₁,x₁,…).
pub fn complex_structure(x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| if i % 2 == 0 { -x[i + 1] } else { x[i - 1] })
}

fn variable_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    if n == 4 {
        names.extend(["x", "y", "z", "w"].iter().map(|s| s.to_string()));
    }
    names
}

fn check_unit_tangent(p: &SpherePoint, u: &TangentVector) -> Result<()> {
    let norm = u.norm();
    if (norm - 1.0).abs() > crate::sphere::UNIT_TOL {
        return Err(LabError::NotUnit { norm });
    }
    let inner = u.vec().dot(p.coords());
    if inner.abs() > crate::sphere::TANGENT_TOL {
        return Err(LabError::NotTangent { inner });
    }
    Ok(())
}

/// ∇_u v at p. Uses the exact ambient Jacobian when the field has one and
/// central finite differences along the geodesic otherwise.
pub fn covariant_derivative(
    f: &FieldDefinition,
    p: &SpherePoint,
    u: &TangentVector,
) -> Result<TangentVector> {
    f.check_point(p)?;
    check_unit_tangent(p, u)?;
    match f.exact_jacobian(p) {
        Some(j) => project_tangent(p, &(j * u.vec())),
        None => covariant_derivative_fd(f, p, u),
    }
}

/// Finite-difference ∇_u v: central difference of v along the geodesic
/// through p with velocity u, projected onto T_pS. Errors with
/// [`LabError::NonSmooth`] when the step-h and step-h/2 estimates disagree.
pub fn covariant_derivative_fd(
    f: &FieldDefinition,
    p: &SpherePoint,
    u: &TangentVector,
) -> Result<TangentVector> {
    f.check_point(p)?;
    check_unit_tangent(p, u)?;
    let central = |h: f64| -> Result<DVector<f64>> {
        let plus = f.evaluate(&geodesic(p, u, h)?)?;
        let minus = f.evaluate(&geodesic(p, u, -h)?)?;
        Ok((plus.vec() - minus.vec()) / (2.0 * h))
    };
    let coarse = central(FD_STEP)?;
    let fine = central(FD_STEP / 2.0)?;
    let discrepancy = (&coarse - &fine).amax();
    if discrepancy.is_nan() || discrepancy > FD_SMOOTHNESS_TOL {
        return Err(LabError::NonSmooth { discrepancy });
    }
    project_tangent(p, &coarse)
}

/// div v = Σ_a ⟨∇_{e_a} v, e_a⟩ over an adapted frame with the standard seed.
pub fn divergence(f: &FieldDefinition, p: &SpherePoint) -> Result<f64> {
    let v = f.evaluate(p)?;
    let frame = complete_adapted_frame(p, &v, &standard_basis(p.ambient_dim()))?;
    frame
        .all()
        .map(|e| Ok(covariant_derivative(f, p, e)?.dot(e)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::complete_adapted_frame;

    fn pt(c: &[f64]) -> SpherePoint {
        SpherePoint::from_slice(c).unwrap()
    }

    fn tv(p: &SpherePoint, c: &[f64]) -> TangentVector {
        TangentVector::new(p.clone(), DVector::from_column_slice(c)).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn hopf_examples() {
        let h = hopf(SphereDim::three());
        let v = h.evaluate(&pt(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v.vec().as_slice(), &[0.0, 1.0, 0.0, 0.0]);
        let v = h.evaluate(&pt(&[0.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(v.vec().as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(hopf(SphereDim::new(2).unwrap()).label(), "hopf:2");
    }

    #[test]
    fn lambda_examples() {
        let f = lambda_field(2.0).unwrap();
        let v = f.evaluate(&pt(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((v.vec() - DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0])).amax() < 1e-15);
        let v = f.evaluate(&pt(&[0.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(v.vec().as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let s = 0.5f64.sqrt();
        let v = lambda_field(3.0).unwrap().evaluate(&pt(&[s, 0.0, s, 0.0])).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_rejects_below_one() {
        assert!(lambda_field(0.5).is_err());
        assert!(lambda_field(f64::NAN).is_err());
        assert!(lambda_field(1.0).unwrap().is_hopf());
    }

    #[test]
    fn lambda_one_is_hopf() {
        let mut r = rng();
        let (h, l) = (hopf(SphereDim::three()), lambda_field(1.0).unwrap());
        for _ in 0..100 {
            let p = uniform_point(SphereDim::three(), &mut r);
            let d = h.evaluate(&p).unwrap().vec() - l.evaluate(&p).unwrap().vec();
            assert!(d.amax() < 1e-15);
        }
    }

    #[test]
    fn catalog_fields_are_unit_and_tangent() {
        let mut r = rng();
        let fields = [
            hopf(SphereDim::three()),
            hopf(SphereDim::new(2).unwrap()),
            hopf(SphereDim::new(3).unwrap()),
            lambda_field(2.0).unwrap(),
            lambda_field(4.0).unwrap(),
        ];
        for f in &fields {
            for _ in 0..10_000 {
                let p = uniform_point(f.dim(), &mut r);
                let v = f.evaluate(&p).unwrap();
                assert!((v.norm() - 1.0).abs() < 1e-12);
                assert!(v.vec().dot(p.coords()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hopf_derivative_is_complex_structure() {
        let mut r = rng();
        for k in 1..=3 {
            let dim = SphereDim::new(k).unwrap();
            let h = hopf(dim);
            for _ in 0..200 {
                let p = uniform_point(dim, &mut r);
                let v = h.evaluate(&p).unwrap();
                let frame = complete_adapted_frame(&p, &v, &standard_basis(dim.ambient())).unwrap();
                for e in frame.e() {
                    let d = covariant_derivative(&h, &p, e).unwrap();
                    assert!((d.vec() - complex_structure(e.vec())).amax() < 1e-14);
                }
                let d = covariant_derivative(&h, &p, &v).unwrap();
                assert!(d.vec().amax() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_orthogonal_to_field() {
        let mut r = rng();
        let f = lambda_field(2.5).unwrap();
        for _ in 0..500 {
            let p = uniform_point(f.dim(), &mut r);
            let v = f.evaluate(&p).unwrap();
            let frame = complete_adapted_frame(&p, &v, &standard_basis(4)).unwrap();
            for e in frame.all() {
                let d = covariant_derivative(&f, &p, e).unwrap();
                assert!(d.vec().dot(v.vec()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_and_fd_derivatives_agree() {
        let mut r = rng();
        for lambda in [1.0, 2.0, 4.0] {
            let f = lambda_field(lambda).unwrap();
            for _ in 0..1000 {
                let p = uniform_point(f.dim(), &mut r);
                let v = f.evaluate(&p).unwrap();
                let frame = complete_adapted_frame(&p, &v, &standard_basis(4)).unwrap();
                for e in frame.all() {
                    let exact = covariant_derivative(&f, &p, e).unwrap();
                    let fd = covariant_derivative_fd(&f, &p, e).unwrap();
                    assert!((exact.vec() - fd.vec()).amax() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn fd_flags_non_smooth_fields() {
        // sign flip across the hyperplane x1 = 0
        let f = FieldDefinition::from_ambient_fn(SphereDim::three(), "kink", |x| {
            complex_structure(x) * x[0].signum()
        });
        let p = pt(&[0.0, 1.0, 0.0, 0.0]);
        let u = tv(&p, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            covariant_derivative(&f, &p, &u),
            Err(LabError::NonSmooth { .. })
        ));
    }

    #[test]
    fn divergence_of_solenoidal_catalog() {
        let mut r = rng();
        let h = hopf(SphereDim::three());
        for lambda in [1.0, 2.0, 4.0] {
            let f = lambda_field(lambda).unwrap();
            for _ in 0..1000 {
                let p = uniform_point(f.dim(), &mut r);
                assert!(divergence(&f, &p).unwrap().abs() < 1e-8);
                assert!(divergence(&h, &p).unwrap().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lambda_field_tangent_to_clifford_torus() {
        let mut r = rng();
        let s = 0.5f64.sqrt();
        for lambda in [1.0, 2.0, 4.0] {
            let f = lambda_field(lambda).unwrap();
            for _ in 0..200 {
                let (th, al): (f64, f64) = (rand::Rng::random::<f64>(&mut r) * 6.3, rand::Rng::random::<f64>(&mut r) * 6.3);
                let p = pt(&[s * th.cos(), s * th.sin(), s * al.cos(), s * al.sin()]);
                // outward conormal of the solid torus x² + y² ≤ 1/2
                let eta = DVector::from_column_slice(&[th.cos(), th.sin(), -al.cos(), -al.sin()]) * s;
                assert!(f.evaluate(&p).unwrap().vec().dot(&eta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn custom_field_from_expressions() {
        let f = FieldDefinition::from_expressions("h", &["-y", "x", "-w", "z"]).unwrap();
        let h = hopf(SphereDim::three());
        let mut r = rng();
        for _ in 0..100 {
            let p = uniform_point(f.dim(), &mut r);
            let d = f.evaluate(&p).unwrap().vec() - h.evaluate(&p).unwrap().vec();
            assert!(d.amax() < 1e-15);
            let u = h.evaluate(&p).unwrap();
            let a = covariant_derivative(&f, &p, &u).unwrap();
            assert!(a.vec().amax() < 1e-9);
        }
        assert!(!f.has_exact_jacobian());
        let g = FieldDefinition::from_expressions("h6", &["-x2", "x1", "-x4", "x3", "-x6", "x5"]).unwrap();
        assert_eq!(g.dim().k(), 2);
    }

    #[test]
    fn custom_field_errors() {
        assert!(matches!(
            FieldDefinition::from_expressions("bad", &["x", "y", "z"]),
            Err(LabError::Expression { line: 0, .. })
        ));
        assert!(matches!(
            FieldDefinition::from_expressions("bad", &["x", "y", "q", "w"]),
            Err(LabError::Expression { line: 3, .. })
        ));
        // purely radial: tangential part vanishes everywhere
        assert!(matches!(
            FieldDefinition::from_expressions("radial", &["x", "y", "z", "w"]),
            Err(LabError::DegenerateField { .. })
        ));
    }

    #[test]
    fn rejects_wrong_dimension_points() {
        let h = hopf(SphereDim::new(2).unwrap());
        assert!(matches!(
            h.evaluate(&pt(&[1.0, 0.0, 0.0, 0.0])),
            Err(LabError::DimensionMismatch { .. })
        ));
    }
}
