//! Algebraic identities and inequalities for trace-free 2k×2k matrices that
//! underlie the energy bound for solenoidal fields (where h has zero trace).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::shape::elementary_symmetric;

pub const IDENTITY_TOL: f64 = 1e-12;

/// Σ_{i<j} (h_ii − h_jj)².
pub fn diagonal_spread(h: &DMatrix<f64>) -> f64 {
    pairs(h.nrows()).map(|(i, j)| (h[(i, i)] - h[(j, j)]).powi(2)).sum()
}

/// Σ_{i<j} h_ii h_jj.
pub fn diagonal_cross(h: &DMatrix<f64>) -> f64 {
    pairs(h.nrows()).map(|(i, j)| h[(i, i)] * h[(j, j)]).sum()
}

/// Σ_i h_ii².
pub fn diagonal_sq(h: &DMatrix<f64>) -> f64 {
    h.diagonal().norm_squared()
}

/// Σ_{i≠j} h_ij².
pub fn off_diagonal_sq(h: &DMatrix<f64>) -> f64 {
    h.norm_squared() - diagonal_sq(h)
}

/// Σ_{i<j} (h_ij + h_ji)².
pub fn symmetric_off_diagonal_sq(h: &DMatrix<f64>) -> f64 {
    pairs(h.nrows()).map(|(i, j)| (h[(i, j)] + h[(j, i)]).powi(2)).sum()
}

/// Σ_{i<j} h_ij h_ji.
pub fn off_diagonal_cross(h: &DMatrix<f64>) -> f64 {
    pairs(h.nrows()).map(|(i, j)| h[(i, j)] * h[(j, i)]).sum()
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    GreaterEqual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Identity {
    /// Σ_{i<j}(h_ii−h_jj)² = (2k−1)Σh_ii² − 2Σ_{i<j}h_ii h_jj
    DiagonalSpread,
    /// −2Σ_{i<j}h_ii h_jj = Σh_ii² (trace zero)
    TraceFreeCross,
    /// Σ_{i<j}(h_ii−h_jj)² = −4kΣ_{i<j}h_ii h_jj (trace zero)
    SpreadByCross,
    /// Σ_{i<j}(h_ij+h_ji)² = Σ_{i≠j}h_ij² + 2Σ_{i<j}h_ij h_ji
    SymmetrizedOffDiagonal,
    /// Σ_{i≠j}h_ij² ≥ 2σ₂ (trace zero)
    OffDiagonalBound,
    /// Σ h_ij² ≥ 2σ₂ (trace zero)
    FrobeniusBound,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::DiagonalSpread,
        Identity::TraceFreeCross,
        Identity::SpreadByCross,
        Identity::SymmetrizedOffDiagonal,
        Identity::OffDiagonalBound,
        Identity::FrobeniusBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::DiagonalSpread => "diagonal_spread",
            Identity::TraceFreeCross => "trace_free_cross",
            Identity::SpreadByCross => "spread_by_cross",
            Identity::SymmetrizedOffDiagonal => "symmetrized_off_diagonal",
            Identity::OffDiagonalBound => "off_diagonal_bound",
            Identity::FrobeniusBound => "frobenius_bound",
        }
    }

    pub fn relation(self) -> Relation {
        match self {
            Identity::OffDiagonalBound | Identity::FrobeniusBound => Relation::GreaterEqual,
            _ => Relation::Equal,
        }
    }

    /// (lhs, rhs) for a square matrix of even size 2k.
    pub fn sides(self, h: &DMatrix<f64>) -> (f64, f64) {
        let n = h.nrows() as f64;
        let k = n / 2.0;
        let sigma2 = || elementary_symmetric(h)[1];
        match self {
            Identity::DiagonalSpread => (diagonal_spread(h), (n - 1.0) * diagonal_sq(h) - 2.0 * diagonal_cross(h)),
            Identity::TraceFreeCross => (-2.0 * diagonal_cross(h), diagonal_sq(h)),
            Identity::SpreadByCross => (diagonal_spread(h), -4.0 * k * diagonal_cross(h)),
            Identity::SymmetrizedOffDiagonal => (
                symmetric_off_diagonal_sq(h),
                off_diagonal_sq(h) + 2.0 * off_diagonal_cross(h),
            ),
            Identity::OffDiagonalBound => (off_diagonal_sq(h), 2.0 * sigma2()),
            Identity::FrobeniusBound => (h.norm_squared(), 2.0 * sigma2()),
        }
    }
}

/// Uniform entries in [−1, 1] with the mean diagonal entry subtracted.
pub fn random_trace_free<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let shift = h.trace() / n as f64;
    for i in 0..n {
        h[(i, i)] -= shift;
    }
    h
}

/// Worst case of one identity over a random sample.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityOutcome {
    pub identity: Identity,
    pub name: &'static str,
    pub size: usize,
    pub samples: usize,
    pub relation: Relation,
    /// max |lhs − rhs| for equalities, min (lhs − rhs) for inequalities.
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Runs every identity on `samples` random trace-free matrices of size 2k.
pub fn check_trace_free_identities(k: usize, samples: usize, seed: u64) -> Vec<IdentityOutcome> {
    let n = 2 * k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats: Vec<DMatrix<f64>> = (0..samples).map(|_| random_trace_free(&mut rng, n)).collect();
    Identity::ALL
        .iter()
        .map(|&id| {
            let relation = id.relation();
            let worst = mats.iter().map(|h| id.sides(h)).fold(
                match relation {
                    Relation::Equal => 0.0,
                    Relation::GreaterEqual => f64::INFINITY,
                },
                |acc, (l, r)| match relation {
                    Relation::Equal => acc.max((l - r).abs()),
                    Relation::GreaterEqual => acc.min(l - r),
                },
            );
            let pass = match relation {
                Relation::Equal => worst <= IDENTITY_TOL,
                Relation::GreaterEqual => worst >= -IDENTITY_TOL,
            };
            IdentityOutcome {
                identity: id,
                name: id.name(),
                size: n,
                samples,
                relation,
                worst,
                tolerance: IDENTITY_TOL,
                pass,
            }
        })
        .collect()
}
