//! Pointwise shape quantities of a unit field: the matrix h_ij, the
//! symmetric functions σ_i, the volume and energy integrands, and the Milnor
//! map φ_t(x) = x + t·v(x) with its Jacobian determinant.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{covariant_derivative, FieldDefinition};
use crate::sphere::{complete_adapted_frame, geodesic, standard_basis, AdaptedFrame, SpherePoint};

/// Step used by the finite-difference Jacobian of the Milnor map.
pub const MILNOR_FD_STEP: f64 = 1e-5;
/// Agreement required between the closed-form and finite-difference Jacobians.
pub const MILNOR_FD_TOL: f64 = 1e-6;

/// Which terms enter the volume integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeForm {
    /// √det(I + AᵀA) with the ∇_v v row included.
    #[default]
    FullGram,
    /// √det(I + hᵀh), dropping the ∇_v v row.
    HBlock,
}

/// h, ⟨∇_v v, e_i⟩ and σ₁…σ_{2k} at one point, together with the frame they
/// were computed in.
#[derive(Debug, Clone)]
pub struct ShapeData {
    pub h: DMatrix<f64>,
    pub a_v: DVector<f64>,
    pub sigma: DVector<f64>,
    pub frame: AdaptedFrame,
}

pub fn shape_data(f: &FieldDefinition, p: &SpherePoint) -> Result<ShapeData> {
    shape_data_with_seed(f, p, &standard_basis(p.ambient_dim()))
}

/// As [`shape_data`], completing the frame from `seed_basis`.
pub fn shape_data_with_seed(
    f: &FieldDefinition,
    p: &SpherePoint,
    seed_basis: &[DVector<f64>],
) -> Result<ShapeData> {
    let v = f.evaluate(p)?;
    let frame = complete_adapted_frame(p, &v, seed_basis)?;
    let m = frame.e().len();
    let mut h = DMatrix::zeros(m, m);
    for (i, ei) in frame.e().iter().enumerate() {
        let d = covariant_derivative(f, p, ei)?;
        for (j, ej) in frame.e().iter().enumerate() {
            h[(i, j)] = d.dot(ej);
        }
    }
    let dv = covariant_derivative(f, p, frame.v())?;
    let a_v = DVector::from_iterator(m, frame.e().iter().map(|e| dv.dot(e)));
    let sigma = elementary_symmetric(&h);
    Ok(ShapeData { h, a_v, sigma, frame })
}

/// Coefficients σ₁…σ_n of det(I + t·A) = 1 + Σ σ_i tⁱ, by the
/// Faddeev–LeVerrier recursion.
pub fn elementary_symmetric(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    let mut sigma = DVector::zeros(n);
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut sign = -1.0;
    for k in 1..=n {
        let am = a * &m;
        let c = -am.trace() / k as f64;
        sigma[k - 1] = sign * c;
        sign = -sign;
        m = am;
        for i in 0..n {
            m[(i, i)] += c;
        }
    }
    sigma
}

impl ShapeData {
    pub fn k(&self) -> usize {
        self.h.nrows() / 2
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma[0]
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma[1]
    }

    pub fn h_frobenius_sq(&self) -> f64 {
        self.h.norm_squared()
    }

    /// The (2k+1)×2k matrix whose rows are the frame components of ∇_{e_a} v
    /// followed by those of ∇_v v.
    pub fn gram_rows(&self) -> DMatrix<f64> {
        let m = self.h.nrows();
        let mut a = DMatrix::zeros(m + 1, m);
        a.rows_mut(0, m).copy_from(&self.h);
        a.row_mut(m).copy_from(&self.a_v.transpose());
        a
    }

    pub fn volume_integrand(&self, form: VolumeForm) -> f64 {
        let a = match form {
            VolumeForm::FullGram => self.gram_rows(),
            VolumeForm::HBlock => self.h.clone(),
        };
        let m = a.ncols();
        let g = DMatrix::<f64>::identity(m, m) + a.transpose() * &a;
        g.determinant().sqrt()
    }

    /// Σ h_ij² + Σ (a_v)_i², i.e. ‖∇v‖² in the adapted frame.
    pub fn energy_integrand(&self) -> f64 {
        self.h.norm_squared() + self.a_v.norm_squared()
    }

    /// Closed-form det(dφ_t) = √(1+t²)·(1 + Σ σ_i tⁱ).
    pub fn milnor_jacobian(&self, t: f64) -> f64 {
        let mut poly = 1.0;
        let mut tp = 1.0;
        for s in self.sigma.iter() {
            tp *= t;
            poly += s * tp;
        }
        (1.0 + t * t).sqrt() * poly
    }
}

pub fn volume_integrand(f: &FieldDefinition, p: &SpherePoint, form: VolumeForm) -> Result<f64> {
    Ok(shape_data(f, p)?.volume_integrand(form))
}

pub fn energy_integrand(f: &FieldDefinition, p: &SpherePoint) -> Result<f64> {
    Ok(shape_data(f, p)?.energy_integrand())
}

/// Deformation parameter of the Milnor map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilnorMapConfig {
    t: f64,
}

impl MilnorMapConfig {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "Milnor parameter t must be finite and >= 0, got {t}"
            )));
        }
        Ok(MilnorMapConfig { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn target_radius(&self) -> f64 {
        (1.0 + self.t * self.t).sqrt()
    }
}

/// φ_t(p) = p + t·v(p), a point on the sphere of radius √(1+t²).
pub fn milnor_map(f: &FieldDefinition, p: &SpherePoint, cfg: MilnorMapConfig) -> Result<DVector<f64>> {
    Ok(p.coords() + f.evaluate(p)?.vec() * cfg.t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianStatus {
    Positive,
    /// φ_t fails to be a local diffeomorphism here.
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilnorJacobian {
    pub value: f64,
    pub status: JacobianStatus,
}

impl MilnorJacobian {
    pub fn from_value(value: f64) -> Self {
        let status = if value > 0.0 {
            JacobianStatus::Positive
        } else {
            JacobianStatus::NonPositive
        };
        MilnorJacobian { value, status }
    }
}

pub fn milnor_jacobian(f: &FieldDefinition, p: &SpherePoint, cfg: MilnorMapConfig) -> Result<MilnorJacobian> {
    Ok(MilnorJacobian::from_value(shape_data(f, p)?.milnor_jacobian(cfg.t)))
}

/// det(dφ_t) by central differences of φ_t along the geodesics of `frame`,
/// expressed in the orthonormal basis {e₁,…,e_{2k}, (v − t·p)/√(1+t²)} of
/// the tangent space of the target sphere.
pub fn milnor_jacobian_fd(
    f: &FieldDefinition,
    frame: &AdaptedFrame,
    cfg: MilnorMapConfig,
) -> Result<f64> {
    let p = frame.base();
    let t = cfg.t;
    let mut target: Vec<DVector<f64>> = frame.e().iter().map(|e| e.vec().clone()).collect();
    target.push((frame.v().vec() - p.coords() * t) / cfg.target_radius());
    let n = target.len();
    let mut jac = DMatrix::zeros(n, n);
    for (a, dir) in frame.all().enumerate() {
        let plus = milnor_map(f, &geodesic(p, dir, MILNOR_FD_STEP)?, cfg)?;
        let minus = milnor_map(f, &geodesic(p, dir, -MILNOR_FD_STEP)?, cfg)?;
        let d = (plus - minus) / (2.0 * MILNOR_FD_STEP);
        for (j, b) in target.iter().enumerate() {
            jac[(a, j)] = d.dot(b);
        }
    }
    Ok(jac.determinant())
}

/// Closed form against the finite-difference determinant at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianCrossCheck {
    pub closed_form: f64,
    pub finite_difference: f64,
    pub agrees: bool,
}

pub fn milnor_jacobian_crosscheck(
    f: &FieldDefinition,
    p: &SpherePoint,
    cfg: MilnorMapConfig,
) -> Result<JacobianCrossCheck> {
    let sd = shape_data(f, p)?;
    let closed_form = sd.milnor_jacobian(cfg.t);
    let finite_difference = milnor_jacobian_fd(f, &sd.frame, cfg)?;
    Ok(JacobianCrossCheck {
        closed_form,
        finite_difference,
        agrees: (closed_form - finite_difference).abs() <= MILNOR_FD_TOL,
    })
}
