//! Independent reference computations for v_λ on the solid tori.
//!
//! v_λ commutes with rotations of the (x, y) and (z, w) planes, so every
//! pointwise quantity depends only on δ and a solid-torus integral reduces
//! to (2π)²∫ q(δ) δ dδ. The pointwise quantities are computed here from the
//! raw ambient formula with finite differences and a QR-built frame, sharing
//! no code with the library's exact Jacobian or Gram–Schmidt frame.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use std::f64::consts::PI;

pub fn v_lambda_ambient(lambda: f64, x: &Vector4<f64>) -> Vector4<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let g = 1.0 / (1.0 + (lambda * lambda - 1.0) * r2).sqrt();
    Vector4::new(-lambda * x[1], lambda * x[0], -x[3], x[2]) * g
}

/// Ambient derivative by central differences with step 1e-6.
fn ambient_jacobian(lambda: f64, x: &Vector4<f64>) -> Matrix4<f64> {
    let h = 1e-6;
    let mut j = Matrix4::zeros();
    for c in 0..4 {
        let mut e = Vector4::zeros();
        e[c] = h;
        let d = (v_lambda_ambient(lambda, &(x + e)) - v_lambda_ambient(lambda, &(x - e))) / (2.0 * h);
        j.set_column(c, &d);
    }
    j
}

pub struct Pointwise {
    pub sigma1: f64,
    pub sigma2: f64,
    pub volume: f64,
    pub energy: f64,
}

pub fn pointwise(lambda: f64, x: &Vector4<f64>) -> Pointwise {
    let v = v_lambda_ambient(lambda, x);
    // columns 3 and 4 of Q span the complement of {x, v}
    let seed = Matrix4::from_columns(&[*x, v, Vector4::new(0.3, -0.7, 0.2, 0.9), Vector4::new(-0.5, 0.1, 0.8, 0.4)]);
    let q = seed.qr().q();
    let e = [q.column(2).into_owned(), q.column(3).into_owned()];
    let jac = ambient_jacobian(lambda, x);
    let nabla = |u: &Vector4<f64>| {
        let w = jac * u;
        w - x * x.dot(&w)
    };
    let mut a = DMatrix::zeros(3, 2);
    for i in 0..2 {
        let d = nabla(&e[i]);
        for j in 0..2 {
            a[(i, j)] = d.dot(&e[j]);
        }
    }
    let dv = nabla(&v);
    for j in 0..2 {
        a[(2, j)] = dv.dot(&e[j]);
    }
    let h = a.rows(0, 2).into_owned();
    let gram = DMatrix::identity(2, 2) + a.transpose() * &a;
    Pointwise {
        sigma1: h.trace(),
        sigma2: h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)],
        volume: gram.determinant().sqrt(),
        energy: a.norm_squared(),
    }
}

/// Composite Simpson rule on [a, b] with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// ∫ over K(δmax) = {x²+y² ≤ δmax²} of a quantity of v_λ.
pub fn solid_torus_integral<Q: Fn(&Pointwise) -> f64>(lambda: f64, delta_max: f64, q: Q) -> f64 {
    let per_delta = |d: f64| {
        let x = Vector4::new(d, 0.0, (1.0 - d * d).sqrt(), 0.0);
        q(&pointwise(lambda, &x)) * d
    };
    4.0 * PI * PI * simpson(per_delta, 0.0, delta_max, 2000)
}

/// ∫ over the complement {x²+y² ≥ δmax²}.
pub fn complement_integral<Q: Fn(&Pointwise) -> f64>(lambda: f64, delta_max: f64, q: Q) -> f64 {
    let per_delta = |d: f64| {
        let x = Vector4::new((1.0 - d * d).sqrt(), 0.0, d, 0.0);
        q(&pointwise(lambda, &x)) * d
    };
    4.0 * PI * PI * simpson(per_delta, 0.0, (1.0 - delta_max * delta_max).sqrt(), 2000)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn to_dvector(x: &Vector4<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}
