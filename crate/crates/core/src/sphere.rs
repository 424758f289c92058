//! Points, tangent vectors, geodesics and adapted frames on the unit sphere
//! S^{2k+1} ⊂ R^{2k+2}.
//!
//! Everything is expressed in ambient coordinates. The Levi-Civita connection
//! of the round sphere is realized as the tangential projection of ambient
//! derivatives, so no charts are needed at this level.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LabError, Result};

pub const ON_SPHERE_TOL: f64 = 1e-12;
pub const TANGENT_TOL: f64 = 1e-10;
pub const UNIT_TOL: f64 = 1e-8;
/// Candidates shorter than this after orthogonalization are skipped during
/// frame completion.
pub const DEGENERATE_CANDIDATE: f64 = 1e-6;

/// The sphere S^{2k+1}, identified by `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SphereDim(usize);

impl SphereDim {
    pub const MAX_K: usize = 3;

    pub fn new(k: usize) -> Result<Self> {
        if (1..=Self::MAX_K).contains(&k) {
            Ok(SphereDim(k))
        } else {
            Err(LabError::UnsupportedDimension(k))
        }
    }

    /// S³.
    pub fn three() -> Self {
        SphereDim(1)
    }

    pub fn k(self) -> usize {
        self.0
    }

    /// Intrinsic dimension 2k+1.
    pub fn intrinsic(self) -> usize {
        2 * self.0 + 1
    }

    /// Ambient dimension 2k+2.
    pub fn ambient(self) -> usize {
        2 * self.0 + 2
    }

    /// Size of the h matrix, 2k.
    pub fn frame_len(self) -> usize {
        2 * self.0
    }

    /// vol(S^{2k+1}) = 2π^{k+1}/k!.
    pub fn unit_volume(self) -> f64 {
        let k = self.0;
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        2.0 * PI.powi(k as i32 + 1) / factorial
    }

    /// Volume of the sphere of the given radius in the same ambient space.
    pub fn volume_at_radius(self, radius: f64) -> f64 {
        self.unit_volume() * radius.powi(self.intrinsic() as i32)
    }

    pub fn from_ambient(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(LabError::InvalidParameter(format!(
                "ambient dimension {n} is not of the form 2k+2 with k >= 1"
            )));
        }
        SphereDim::new((n - 2) / 2)
    }
}

impl TryFrom<usize> for SphereDim {
    type Error = LabError;
    fn try_from(k: usize) -> Result<Self> {
        SphereDim::new(k)
    }
}

impl From<SphereDim> for usize {
    fn from(d: SphereDim) -> usize {
        d.0
    }
}

/// A point of the unit sphere in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        let deviation = coords.norm() - 1.0;
        if !deviation.is_finite() || deviation.abs() > ON_SPHERE_TOL {
            return Err(LabError::OffSphere { deviation });
        }
        Ok(SpherePoint(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// Radially projects a nonzero ambient vector onto the sphere.
    pub fn normalize(w: DVector<f64>) -> Result<Self> {
        let n = w.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(LabError::InvalidParameter(
                "cannot normalize a zero or non-finite vector onto the sphere".into(),
            ));
        }
        Ok(SpherePoint(w / n))
    }

    pub(crate) fn new_unchecked(coords: DVector<f64>) -> Self {
        SpherePoint(coords)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self) -> Result<SphereDim> {
        SphereDim::from_ambient(self.0.len())
    }
}

/// A vector tangent to the sphere at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    vec: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: SpherePoint, vec: DVector<f64>) -> Result<Self> {
        check_len(base.ambient_dim(), vec.len())?;
        let inner = vec.dot(base.coords());
        if !inner.is_finite() || inner.abs() > TANGENT_TOL {
            return Err(LabError::NotTangent { inner });
        }
        Ok(TangentVector { base, vec })
    }

    pub(crate) fn new_unchecked(base: SpherePoint, vec: DVector<f64>) -> Self {
        TangentVector { base, vec }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn vec(&self) -> &DVector<f64> {
        &self.vec
    }

    pub fn into_vec(self) -> DVector<f64> {
        self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.vec.dot(&other.vec)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(LabError::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}

/// Orthogonal projection of an ambient vector onto T_p S: w − ⟨w, p⟩p.
pub fn project_tangent(p: &SpherePoint, w: &DVector<f64>) -> Result<TangentVector> {
    check_len(p.ambient_dim(), w.len())?;
    Ok(TangentVector::new_unchecked(p.clone(), project(p.coords(), w)))
}

pub(crate) fn project(p: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    w - p * w.dot(p)
}

/// Great circle through `p` with unit initial velocity `u`, evaluated at arc
/// length `s`.
pub fn geodesic(p: &SpherePoint, u: &TangentVector, s: f64) -> Result<SpherePoint> {
    check_len(p.ambient_dim(), u.vec.len())?;
    let norm = u.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(LabError::NotUnit { norm });
    }
    let inner = u.vec.dot(p.coords());
    if inner.abs() > TANGENT_TOL {
        return Err(LabError::NotTangent { inner });
    }
    let (sin, cos) = s.sin_cos();
    Ok(SpherePoint::new_unchecked(p.coords() * cos + &u.vec * sin))
}

/// Orthonormal tangent frame {e₁,…,e_{2k}, v} whose last vector is the field
/// direction at `base`.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    base: SpherePoint,
    e: Vec<TangentVector>,
    v: TangentVector,
}

impl AdaptedFrame {
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    /// The 2k vectors orthogonal to the field.
    pub fn e(&self) -> &[TangentVector] {
        &self.e
    }

    pub fn v(&self) -> &TangentVector {
        &self.v
    }

    /// e₁,…,e_{2k}, v in order.
    pub fn all(&self) -> impl Iterator<Item = &TangentVector> {
        self.e.iter().chain(std::iter::once(&self.v))
    }

    /// Largest deviation of the Gram matrix of {e, v} from the identity, and
    /// of any frame vector from tangency.
    pub fn orthonormality_defect(&self) -> f64 {
        let vecs: Vec<&TangentVector> = self.all().collect();
        let mut defect = 0.0f64;
        for (i, a) in vecs.iter().enumerate() {
            defect = defect.max(a.vec.dot(self.base.coords()).abs());
            for (j, b) in vecs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((a.dot(b) - target).abs());
            }
        }
        defect
    }
}

/// Standard basis of R^n in index order, the default Gram–Schmidt seed.
pub fn standard_basis(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Completes `v` to an adapted orthonormal frame at `p` by Gram–Schmidt over
/// the projections of `seed_basis` onto {p, v}^⊥. Near-degenerate candidates
/// are skipped.
pub fn complete_adapted_frame(
    p: &SpherePoint,
    v: &TangentVector,
    seed_basis: &[DVector<f64>],
) -> Result<AdaptedFrame> {
    let n = p.ambient_dim();
    check_len(n, v.vec.len())?;
    let norm = v.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(LabError::NotUnit { norm });
    }
    let needed = n - 2;
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(n);
    accepted.push(p.coords().clone());
    accepted.push(v.vec.clone());

    for seed in seed_basis {
        if accepted.len() == n {
            break;
        }
        check_len(n, seed.len())?;
        let mut w = seed.clone();
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            for q in &accepted {
                let c = w.dot(q);
                w.axpy(-c, q, 1.0);
            }
        }
        let len = w.norm();
        if len < DEGENERATE_CANDIDATE {
            continue;
        }
        accepted.push(w / len);
    }

    if accepted.len() < n {
        return Err(LabError::DegenerateFrame {
            found: accepted.len() - 2,
            needed,
        });
    }
    let e = accepted
        .drain(2..)
        .map(|w| TangentVector::new_unchecked(p.clone(), w))
        .collect();
    Ok(AdaptedFrame {
        base: p.clone(),
        e,
        v: v.clone(),
    })
}

/// Uniform point on S^{2k+1} from a normalized standard Gaussian vector.
pub fn uniform_point<R: Rng + ?Sized>(dim: SphereDim, rng: &mut R) -> SpherePoint {
    loop {
        let g = DVector::from_fn(dim.ambient(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 1e-12 {
            return SpherePoint::new_unchecked(g / n);
        }
    }
}
