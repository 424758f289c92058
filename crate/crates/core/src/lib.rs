//! Volume and energy of unit vector fields on odd-dimensional unit spheres.
//!
//! The crate evaluates, for a unit tangent field v on a region K ⊂ S^{2k+1},
//!
//! * the volume vol(v) = ∫_K √det(I + (∇v)ᵀ∇v),
//! * the energy E(v) = (2k+1)/2·vol(K) + ½∫_K ‖∇v‖²,
//! * the volume of the image of K under φ_t(x) = x + t·v(x), whose Jacobian
//!   is √(1+t²)·(1 + Σ σ_i(v) tⁱ),
//!
//! and checks the known lower bounds for these functionals (Hopf fields are
//! the reference minimizers) on concrete fields and domains.
//!
//! Modules, bottom up: [`sphere`] (points, frames), [`field`] (field catalog
//! and covariant derivatives), [`shape`] (h_ij, σ_i and integrands),
//! [`domain`] + [`quadrature`] (charts, boundaries, integration), and
//! [`theorems`] (functionals and verification reports).

pub mod domain;
pub mod error;
pub mod expr;
pub mod field;
pub mod identities;
pub mod quadrature;
pub mod report;
pub mod shape;
pub mod sphere;
pub mod theorems;

pub use domain::{complement_torus, full_sphere_chart, solid_torus, Domain, Estimate, Region};
pub use error::{LabError, Result};
pub use field::{hopf, lambda_field, FieldDefinition};
pub use quadrature::{ExecMode, QuadratureSpec};
pub use shape::{shape_data, ShapeData, VolumeForm};
pub use sphere::{SphereDim, SpherePoint, TangentVector};
