//! Parametrized spherical domains, their boundary patches, and integration
//! over them.
//!
//! A [`Region`] is either a charted [`Domain`] (tensor-product quadrature) or
//! a whole sphere sampled by Monte Carlo. Node evaluation may run in
//! parallel; accumulation always runs sequentially in node-index order with
//! compensated summation, so results are bit-identical across thread counts.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::expr::Expr;
use crate::quadrature::{
    compensated_sum, map_indices, AxisRule, QuadratureSpec, Rule, TensorGrid, DEFAULT_GL_NODES,
    DEFAULT_HIGH_DIM_NODES, DEFAULT_PERIODIC_NODES,
};
use crate::sphere::{project, uniform_point, SphereDim, SpherePoint, TangentVector};

/// Step for finite-difference chart tangents.
const CHART_FD_STEP: f64 = 1e-5;
/// Samples drawn per RNG stream in Monte Carlo runs.
const MC_CHUNK: usize = 4096;

/// A map from a parameter box into the unit sphere.
pub trait Chart: Send + Sync + fmt::Debug {
    fn point(&self, u: &[f64]) -> DVector<f64>;

    /// ∂x/∂u_axis. Defaults to a central difference.
    fn tangent(&self, u: &[f64], axis: usize) -> DVector<f64> {
        fd_tangent(self, u, axis)
    }

    /// Closed-form volume element, when known.
    fn volume_element(&self, _u: &[f64]) -> Option<f64> {
        None
    }
}

fn fd_tangent<C: Chart + ?Sized>(chart: &C, u: &[f64], axis: usize) -> DVector<f64> {
    let mut up = u.to_vec();
    let mut down = u.to_vec();
    up[axis] += CHART_FD_STEP;
    down[axis] -= CHART_FD_STEP;
    (chart.point(&up) - chart.point(&down)) / (2.0 * CHART_FD_STEP)
}

fn gram_sqrt_det(tangents: &[DVector<f64>]) -> f64 {
    let m = tangents.len();
    let g = DMatrix::from_fn(m, m, |i, j| tangents[i].dot(&tangents[j]));
    g.determinant().max(0.0).sqrt()
}

/// x(θ, α, δ) = (δcosθ, δsinθ, √(1−δ²)cosα, √(1−δ²)sinα).
#[derive(Debug, Clone, Copy)]
struct SolidTorusChart;

impl Chart for SolidTorusChart {
    fn point(&self, u: &[f64]) -> DVector<f64> {
        let (st, ct) = u[0].sin_cos();
        let (sa, ca) = u[1].sin_cos();
        let d = u[2];
        let c = (1.0 - d * d).sqrt();
        DVector::from_column_slice(&[d * ct, d * st, c * ca, c * sa])
    }

    fn tangent(&self, u: &[f64], axis: usize) -> DVector<f64> {
        let (st, ct) = u[0].sin_cos();
        let (sa, ca) = u[1].sin_cos();
        let d = u[2];
        let c = (1.0 - d * d).sqrt();
        match axis {
            0 => DVector::from_column_slice(&[-d * st, d * ct, 0.0, 0.0]),
            1 => DVector::from_column_slice(&[0.0, 0.0, -c * sa, c * ca]),
            _ => DVector::from_column_slice(&[ct, st, -d / c * ca, -d / c * sa]),
        }
    }

    fn volume_element(&self, u: &[f64]) -> Option<f64> {
        Some(u[2])
    }
}

/// y(θ, α, δ) = (√(1−δ²)cosθ, √(1−δ²)sinθ, δcosα, δsinα), the chart of the
/// complementary solid torus around the (z, w) core circle.
#[derive(Debug, Clone, Copy)]
struct ComplementChart;

impl Chart for ComplementChart {
    fn point(&self, u: &[f64]) -> DVector<f64> {
        let p = SolidTorusChart.point(&[u[1], u[0], u[2]]);
        DVector::from_column_slice(&[p[2], p[3], p[0], p[1]])
    }

    fn tangent(&self, u: &[f64], axis: usize) -> DVector<f64> {
        let swapped = match axis {
            0 => 1,
            1 => 0,
            a => a,
        };
        let t = SolidTorusChart.tangent(&[u[1], u[0], u[2]], swapped);
        DVector::from_column_slice(&[t[2], t[3], t[0], t[1]])
    }

    fn volume_element(&self, u: &[f64]) -> Option<f64> {
        Some(u[2])
    }
}

/// (cosη cosθ, cosη sinθ, sinη cosα, sinη sinα) covering all of S³.
#[derive(Debug, Clone, Copy)]
struct FullSphereChart;

impl Chart for FullSphereChart {
    fn point(&self, u: &[f64]) -> DVector<f64> {
        let (st, ct) = u[0].sin_cos();
        let (sa, ca) = u[1].sin_cos();
        let (se, ce) = u[2].sin_cos();
        DVector::from_column_slice(&[ce * ct, ce * st, se * ca, se * sa])
    }

    fn tangent(&self, u: &[f64], axis: usize) -> DVector<f64> {
        let (st, ct) = u[0].sin_cos();
        let (sa, ca) = u[1].sin_cos();
        let (se, ce) = u[2].sin_cos();
        match axis {
            0 => DVector::from_column_slice(&[-ce * st, ce * ct, 0.0, 0.0]),
            1 => DVector::from_column_slice(&[0.0, 0.0, -se * sa, se * ca]),
            _ => DVector::from_column_slice(&[-se * ct, -se * st, ce * ca, ce * sa]),
        }
    }

    fn volume_element(&self, u: &[f64]) -> Option<f64> {
        Some(u[2].cos() * u[2].sin())
    }
}

/// Chart given by coordinate expressions in `u1..um`.
#[derive(Debug)]
struct ExprChart {
    coords: Vec<Expr>,
    volume_element: Option<Expr>,
}

impl Chart for ExprChart {
    fn point(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.coords.len(), self.coords.iter().map(|e| e.eval(u)))
    }

    fn volume_element(&self, u: &[f64]) -> Option<f64> {
        self.volume_element.as_ref().map(|e| e.eval(u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lo,
    Hi,
}

/// A parametrized region of S^{2k+1}.
#[derive(Debug, Clone)]
pub struct Domain {
    label: String,
    dim: SphereDim,
    chart: Arc<dyn Chart>,
    param_box: Vec<(f64, f64)>,
    periodic: Vec<bool>,
    faces: Vec<(usize, Side)>,
}

impl Domain {
    /// Builds and validates a domain. `faces` lists the (axis, side) pairs
    /// whose images form the boundary.
    pub fn new(
        label: impl Into<String>,
        dim: SphereDim,
        chart: Arc<dyn Chart>,
        param_box: Vec<(f64, f64)>,
        periodic: Vec<bool>,
        faces: Vec<(usize, Side)>,
    ) -> Result<Self> {
        if param_box.len() != dim.intrinsic() || periodic.len() != param_box.len() {
            return Err(LabError::InvalidParameter(format!(
                "a chart of S^{} needs {} parameters",
                dim.intrinsic(),
                dim.intrinsic()
            )));
        }
        if let Some((lo, hi)) = param_box.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && hi > lo)) {
            return Err(LabError::InvalidParameter(format!("bad parameter interval [{lo}, {hi}]")));
        }
        if let Some((axis, _)) = faces.iter().find(|(a, _)| *a >= param_box.len() || periodic[*a]) {
            return Err(LabError::InvalidParameter(format!(
                "boundary face on axis {} must be a non-periodic axis",
                axis + 1
            )));
        }
        let dom = Domain {
            label: label.into(),
            dim,
            chart,
            param_box,
            periodic,
            faces,
        };
        dom.validate()?;
        Ok(dom)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> SphereDim {
        self.dim
    }

    pub fn param_box(&self) -> &[(f64, f64)] {
        &self.param_box
    }

    pub fn periodic_axes(&self) -> Vec<usize> {
        (0..self.periodic.len()).filter(|&i| self.periodic[i]).collect()
    }

    pub fn chart_point(&self, u: &[f64]) -> DVector<f64> {
        self.chart.point(u)
    }

    pub fn tangent(&self, u: &[f64], axis: usize) -> DVector<f64> {
        self.chart.tangent(u, axis)
    }

    /// Volume element: closed form if the chart has one, else √det G from
    /// the chart tangents.
    pub fn volume_element(&self, u: &[f64]) -> f64 {
        self.chart.volume_element(u).unwrap_or_else(|| self.gram_volume_element(u))
    }

    /// √det G from the chart's tangents.
    pub fn gram_volume_element(&self, u: &[f64]) -> f64 {
        let t: Vec<_> = (0..u.len()).map(|a| self.chart.tangent(u, a)).collect();
        gram_sqrt_det(&t)
    }

    /// √det G from central-difference tangents, independent of any
    /// closed-form derivatives the chart supplies.
    pub fn fd_volume_element(&self, u: &[f64]) -> f64 {
        let t: Vec<_> = (0..u.len()).map(|a| fd_tangent(self.chart.as_ref(), u, a)).collect();
        gram_sqrt_det(&t)
    }

    fn rule(&self, axis: usize) -> Rule {
        if self.periodic[axis] {
            Rule::Periodic
        } else {
            Rule::GaussLegendre
        }
    }

    fn default_nodes(&self, axis: usize) -> usize {
        if self.param_box.len() > 3 {
            DEFAULT_HIGH_DIM_NODES
        } else if self.periodic[axis] {
            DEFAULT_PERIODIC_NODES
        } else {
            DEFAULT_GL_NODES
        }
    }

    /// Node count per axis resolved against `q`.
    pub fn resolve_nodes(&self, q: &QuadratureSpec) -> Result<Vec<usize>> {
        match &q.nodes_per_axis {
            Some(n) if n.len() != self.param_box.len() => Err(LabError::InvalidParameter(format!(
                "domain '{}' has {} axes but {} node counts were given",
                self.label,
                self.param_box.len(),
                n.len()
            ))),
            Some(n) => Ok(n.clone()),
            None => Ok((0..self.param_box.len()).map(|a| self.default_nodes(a)).collect()),
        }
    }

    fn grid(&self, nodes: &[usize], skip_axis: Option<usize>) -> Result<TensorGrid> {
        let axes = (0..self.param_box.len())
            .filter(|a| Some(*a) != skip_axis)
            .map(|a| {
                let (lo, hi) = self.param_box[a];
                AxisRule::new(self.rule(a), lo, hi, nodes[a])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorGrid { axes })
    }

    pub fn boundary(&self) -> Vec<BoundaryPatch> {
        self.faces
            .iter()
            .map(|&(axis, side)| BoundaryPatch {
                domain: self.clone(),
                axis,
                side,
            })
            .collect()
    }

    pub fn has_boundary(&self) -> bool {
        !self.faces.is_empty()
    }

    /// Checks that the chart lands on the sphere and that any closed-form
    /// volume element matches √det G, at a fixed pseudo-random sample of
    /// parameters.
    pub fn validate(&self) -> Result<()> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0xd0_4a1);
        for _ in 0..200 {
            let u: Vec<f64> = self
                .param_box
                .iter()
                .map(|(lo, hi)| lo + (hi - lo) * rng.random_range(0.02..0.98))
                .collect();
            let x = self.chart.point(&u);
            if x.len() != self.dim.ambient() {
                return Err(LabError::DimensionMismatch {
                    expected: self.dim.ambient(),
                    actual: x.len(),
                });
            }
            SpherePoint::new(x)?;
            if let Some(ve) = self.chart.volume_element(&u) {
                let gram = self.fd_volume_element(&u);
                if (ve - gram).abs() > 1e-8 * gram.abs().max(1.0) {
                    return Err(LabError::InvalidParameter(format!(
                        "volume element {ve} disagrees with sqrt(det G) = {gram} at {u:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Reads a chart description:
    ///
    /// ```text
    /// param <lo> <hi> [periodic]      one per axis, 2k+1 in total
    /// coord <expr in u1..um>          one per ambient coordinate
    /// volume_element <expr>           optional
    /// boundary <axis> lo|hi           optional, repeatable
    /// ```
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::parse_custom(&format!("custom:{}", path.display()), &text)
    }

    pub fn parse_custom(label: &str, text: &str) -> Result<Self> {
        let err = |line: usize, message: String| LabError::Expression { line, message };
        let mut params: Vec<(f64, f64, bool)> = Vec::new();
        let mut coords: Vec<(usize, String)> = Vec::new();
        let mut volume: Option<(usize, String)> = None;
        let mut faces: Vec<(usize, Side)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match key {
                "param" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    let periodic = match parts.len() {
                        2 => false,
                        3 if parts[2] == "periodic" => true,
                        _ => return Err(err(line_no, "expected 'param <lo> <hi> [periodic]'".into())),
                    };
                    let bound = |s: &str| {
                        Expr::parse(s, &[])
                            .map(|e| e.eval(&[]))
                            .map_err(|e| err(line_no, e.to_string()))
                    };
                    params.push((bound(parts[0])?, bound(parts[1])?, periodic));
                }
                "coord" => coords.push((line_no, rest.to_string())),
                "volume_element" => volume = Some((line_no, rest.to_string())),
                "boundary" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    let axis = parts
                        .first()
                        .and_then(|a| a.parse::<usize>().ok())
                        .filter(|a| *a >= 1)
                        .ok_or_else(|| err(line_no, "expected 'boundary <axis> lo|hi'".into()))?;
                    let side = match parts.get(1) {
                        Some(&"lo") => Side::Lo,
                        Some(&"hi") => Side::Hi,
                        _ => return Err(err(line_no, "boundary side must be 'lo' or 'hi'".into())),
                    };
                    faces.push((axis - 1, side));
                }
                other => return Err(err(line_no, format!("unknown key '{other}'"))),
            }
        }

        let dim = SphereDim::from_ambient(coords.len())
            .map_err(|_| err(0, format!("expected 4, 6 or 8 coord lines, found {}", coords.len())))?;
        let names: Vec<String> = (1..=params.len()).map(|i| format!("u{i}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let parse = |(line, src): &(usize, String)| Expr::parse(src, &names).map_err(|e| err(*line, e.to_string()));
        let chart = ExprChart {
            coords: coords.iter().map(parse).collect::<Result<_>>()?,
            volume_element: volume.as_ref().map(parse).transpose()?,
        };
        Domain::new(
            label,
            dim,
            Arc::new(chart),
            params.iter().map(|(lo, hi, _)| (*lo, *hi)).collect(),
            params.iter().map(|(_, _, p)| *p).collect(),
            faces,
        )
    }
}

fn check_delta(delta_max: f64) -> Result<()> {
    if !(delta_max > 0.0 && delta_max < 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "delta_max must lie in (0, 1), got {delta_max}"
        )));
    }
    Ok(())
}

/// Solid torus {x² + y² ≤ delta_max²} ⊂ S³ with boundary at δ = delta_max.
pub fn solid_torus(delta_max: f64) -> Result<Domain> {
    check_delta(delta_max)?;
    Domain::new(
        format!("solid_torus:{delta_max}"),
        SphereDim::three(),
        Arc::new(SolidTorusChart),
        vec![(0.0, TAU), (0.0, TAU), (0.0, delta_max)],
        vec![true, true, false],
        vec![(2, Side::Hi)],
    )
}

/// The closure of S³ minus `solid_torus(delta_max)`, charted around the
/// other core circle with δ ∈ [0, √(1 − delta_max²)].
pub fn complement_torus(delta_max: f64) -> Result<Domain> {
    check_delta(delta_max)?;
    Domain::new(
        format!("complement:{delta_max}"),
        SphereDim::three(),
        Arc::new(ComplementChart),
        vec![(0.0, TAU), (0.0, TAU), (0.0, (1.0 - delta_max * delta_max).sqrt())],
        vec![true, true, false],
        vec![(2, Side::Hi)],
    )
}

/// All of S³ in Hopf-torus coordinates (θ, α, η ∈ [0, π/2]).
pub fn full_sphere_chart() -> Domain {
    Domain::new(
        "sphere",
        SphereDim::three(),
        Arc::new(FullSphereChart),
        vec![(0.0, TAU), (0.0, TAU), (0.0, FRAC_PI_2)],
        vec![true, true, false],
        vec![],
    )
    .expect("catalog chart is valid")
}

/// One face of a domain's parameter box, mapped into the sphere.
#[derive(Debug, Clone)]
pub struct BoundaryPatch {
    domain: Domain,
    axis: usize,
    side: Side,
}

impl BoundaryPatch {
    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    fn full_params(&self, face: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.domain.param_box[self.axis];
        let fixed = match self.side {
            Side::Lo => lo,
            Side::Hi => hi,
        };
        let mut u = face.to_vec();
        u.insert(self.axis, fixed);
        u
    }

    fn face_tangents(&self, u: &[f64]) -> Vec<DVector<f64>> {
        (0..u.len())
            .filter(|a| *a != self.axis)
            .map(|a| self.domain.tangent(u, a))
            .collect()
    }

    /// Chart of the face in the remaining 2k parameters.
    pub fn point(&self, face: &[f64]) -> Result<SpherePoint> {
        SpherePoint::new(self.domain.chart_point(&self.full_params(face)))
    }

    /// √det of the face's first fundamental form.
    pub fn area_element(&self, face: &[f64]) -> f64 {
        gram_sqrt_det(&self.face_tangents(&self.full_params(face)))
    }

    /// Unit tangent to the sphere, normal to the face, pointing out of the
    /// domain.
    pub fn conormal(&self, face: &[f64]) -> Result<TangentVector> {
        let u = self.full_params(face);
        let p = SpherePoint::new(self.domain.chart_point(&u))?;
        let mut basis: Vec<DVector<f64>> = vec![p.coords().clone()];
        for t in self.face_tangents(&u) {
            let mut w = t;
            for _ in 0..2 {
                for b in &basis {
                    let c = w.dot(b);
                    w.axpy(-c, b, 1.0);
                }
            }
            let n = w.norm();
            if n > 1e-12 {
                basis.push(w / n);
            }
        }
        let mut n = project(p.coords(), &self.domain.tangent(&u, self.axis));
        for _ in 0..2 {
            for b in &basis[1..] {
                let c = n.dot(b);
                n.axpy(-c, b, 1.0);
            }
        }
        let len = n.norm();
        if len.is_nan() || len <= 1e-12 {
            return Err(LabError::InvalidParameter("degenerate boundary face".into()));
        }
        let sign = match self.side {
            Side::Hi => 1.0,
            Side::Lo => -1.0,
        };
        Ok(TangentVector::new_unchecked(p, n * (sign / len)))
    }
}

/// Where an integral is taken.
#[derive(Debug, Clone)]
pub enum Region {
    Chart(Domain),
    /// The whole of S^{2k+1}, integrated by Monte Carlo.
    MonteCarloSphere(SphereDim),
}

impl Region {
    /// The full sphere: a chart for S³, Monte Carlo above.
    pub fn sphere(dim: SphereDim) -> Region {
        if dim.k() == 1 {
            Region::Chart(full_sphere_chart())
        } else {
            Region::MonteCarloSphere(dim)
        }
    }

    /// Parses `solid_torus:<δ>`, `complement:<δ>`, `sphere`, `sphere:mc` or
    /// `custom:<path>`.
    pub fn from_spec(spec: &str, dim: SphereDim) -> Result<Region> {
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let delta = || {
            arg.parse::<f64>()
                .map_err(|_| LabError::InvalidParameter(format!("bad delta_max in domain '{spec}'")))
        };
        let need_s3 = |r: Region| {
            if dim.k() == 1 {
                Ok(r)
            } else {
                Err(LabError::InvalidParameter(format!("domain '{spec}' lives in S^3 but the field is on S^{}", dim.intrinsic())))
            }
        };
        match kind {
            "solid_torus" => need_s3(Region::Chart(solid_torus(delta()?)?)),
            "complement" => need_s3(Region::Chart(complement_torus(delta()?)?)),
            "sphere" if arg.is_empty() => Ok(Region::sphere(dim)),
            "sphere" if arg == "mc" => Ok(Region::MonteCarloSphere(dim)),
            "custom" if !arg.is_empty() => {
                let d = Domain::from_file(Path::new(arg))?;
                if d.dim() != dim {
                    return Err(LabError::InvalidParameter(format!(
                        "custom domain is in S^{} but the field is on S^{}",
                        d.dim().intrinsic(),
                        dim.intrinsic()
                    )));
                }
                Ok(Region::Chart(d))
            }
            _ => Err(LabError::InvalidParameter(format!("unknown domain '{spec}'"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Region::Chart(d) => d.label().to_string(),
            Region::MonteCarloSphere(dim) if dim.k() == 1 => "sphere:mc".to_string(),
            Region::MonteCarloSphere(dim) => format!("sphere:{}", dim.k()),
        }
    }

    pub fn dim(&self) -> SphereDim {
        match self {
            Region::Chart(d) => d.dim(),
            Region::MonteCarloSphere(dim) => *dim,
        }
    }

    pub fn boundary(&self) -> Vec<BoundaryPatch> {
        match self {
            Region::Chart(d) => d.boundary(),
            Region::MonteCarloSphere(_) => Vec::new(),
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Region::MonteCarloSphere(_))
    }

    /// The quadrature actually used for this region under `q`.
    pub fn echo(&self, q: &QuadratureSpec) -> Result<QuadratureEcho> {
        Ok(match self {
            Region::Chart(d) => QuadratureEcho {
                nodes_per_axis: d.resolve_nodes(q)?,
                rule_per_axis: (0..d.param_box.len()).map(|a| d.rule(a)).collect(),
                mc_samples: None,
                rng_seed: q.rng_seed,
            },
            Region::MonteCarloSphere(_) => QuadratureEcho {
                nodes_per_axis: Vec::new(),
                rule_per_axis: Vec::new(),
                mc_samples: Some(mc_samples(q)?),
                rng_seed: q.rng_seed,
            },
        })
    }
}

fn mc_samples(q: &QuadratureSpec) -> Result<usize> {
    match q.mc_samples {
        Some(n) if n >= 2 => Ok(n),
        Some(n) => Err(LabError::InvalidParameter(format!("mc_samples must be >= 2, got {n}"))),
        None => Err(LabError::InvalidParameter("Monte Carlo integration requires mc_samples".into())),
    }
}

/// Quadrature metadata attached to every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEcho {
    pub nodes_per_axis: Vec<usize>,
    pub rule_per_axis: Vec<Rule>,
    pub mc_samples: Option<usize>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingKind {
    Tensor,
    MonteCarlo { volume: f64 },
}

/// Per-node values with their quadrature weights, in node-index order.
#[derive(Debug, Clone)]
pub struct Weighted<T> {
    pub weights: Vec<f64>,
    pub values: Vec<T>,
    pub kind: SamplingKind,
}

/// An integral with its Monte Carlo standard error, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub nodes: usize,
}

impl<T> Weighted<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Σ wᵢ g(valueᵢ), accumulated in index order.
    pub fn integrate<G: Fn(&T) -> f64>(&self, g: G) -> Estimate {
        let value = compensated_sum(self.weights.iter().zip(&self.values).map(|(w, v)| w * g(v)));
        let std_error = match self.kind {
            SamplingKind::Tensor => None,
            SamplingKind::MonteCarlo { volume } => {
                let n = self.values.len() as f64;
                let mean = compensated_sum(self.values.iter().map(&g)) / n;
                let var = compensated_sum(self.values.iter().map(|v| (g(v) - mean).powi(2))) / (n - 1.0);
                Some(volume * (var / n).sqrt())
            }
        };
        Estimate {
            value,
            std_error,
            nodes: self.values.len(),
        }
    }

    pub fn max_abs<G: Fn(&T) -> f64>(&self, g: G) -> f64 {
        self.values.iter().map(|v| g(v).abs()).fold(0.0, f64::max)
    }

    pub fn min<G: Fn(&T) -> f64>(&self, g: G) -> f64 {
        self.values.iter().map(g).fold(f64::INFINITY, f64::min)
    }
}

fn collect_in_order<T>(
    results: Vec<(Vec<f64>, f64, Result<T>)>,
    kind: SamplingKind,
) -> Result<Weighted<T>> {
    let mut weights = Vec::with_capacity(results.len());
    let mut values = Vec::with_capacity(results.len());
    for (coords, w, r) in results {
        match r {
            Ok(v) => {
                weights.push(w);
                values.push(v);
            }
            Err(e) => return Err(LabError::at_node(&coords, e)),
        }
    }
    Ok(Weighted { weights, values, kind })
}

/// Evaluates `f` at every node of `region` under `q`.
pub fn map_region<T, F>(region: &Region, q: &QuadratureSpec, f: F) -> Result<Weighted<T>>
where
    T: Send,
    F: Fn(&SpherePoint) -> Result<T> + Sync + Send,
{
    match region {
        Region::Chart(d) => {
            let nodes = d.resolve_nodes(q)?;
            let grid = d.grid(&nodes, None)?;
            let results = map_indices(grid.len(), q.exec, |i| {
                let (u, w) = grid.node(i);
                let r = SpherePoint::new(d.chart_point(&u)).and_then(|p| f(&p));
                let weight = w * d.volume_element(&u);
                (u, weight, r)
            });
            collect_in_order(results, SamplingKind::Tensor)
        }
        Region::MonteCarloSphere(dim) => {
            let n = mc_samples(q)?;
            let volume = dim.unit_volume();
            let w = volume / n as f64;
            let chunks = n.div_ceil(MC_CHUNK);
            let per_chunk = map_indices(chunks, q.exec, |c| {
                let mut rng = mc_stream(q.rng_seed, c);
                let count = MC_CHUNK.min(n - c * MC_CHUNK);
                (0..count)
                    .map(|_| {
                        let p = uniform_point(*dim, &mut rng);
                        let r = f(&p);
                        (p.coords().iter().copied().collect(), w, r)
                    })
                    .collect::<Vec<_>>()
            });
            collect_in_order(per_chunk.into_iter().flatten().collect(), SamplingKind::MonteCarlo { volume })
        }
    }
}

fn mc_stream(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// The Monte Carlo sample stream: point `index` of a run seeded with `seed`.
pub fn monte_carlo_sample(dim: SphereDim, seed: u64, index: usize) -> SpherePoint {
    let mut rng = mc_stream(seed, index / MC_CHUNK);
    let mut p = uniform_point(dim, &mut rng);
    for _ in 0..index % MC_CHUNK {
        p = uniform_point(dim, &mut rng);
    }
    p
}

/// ∫ g over the region.
pub fn integrate<G>(region: &Region, q: &QuadratureSpec, g: G) -> Result<Estimate>
where
    G: Fn(&SpherePoint) -> Result<f64> + Sync + Send,
{
    Ok(map_region(region, q, g)?.integrate(|v| *v))
}

/// Monte Carlo ∫ over the whole sphere regardless of dimension.
pub fn monte_carlo_sphere<G>(dim: SphereDim, q: &QuadratureSpec, g: G) -> Result<Estimate>
where
    G: Fn(&SpherePoint) -> Result<f64> + Sync + Send,
{
    integrate(&Region::MonteCarloSphere(dim), q, g)
}

/// Evaluates `f(point, conormal)` at every node of a boundary face. Node
/// counts are those of the domain with the face axis dropped.
pub fn map_boundary<T, F>(b: &BoundaryPatch, q: &QuadratureSpec, f: F) -> Result<Weighted<T>>
where
    T: Send,
    F: Fn(&SpherePoint, &TangentVector) -> Result<T> + Sync + Send,
{
    let nodes = b.domain.resolve_nodes(q)?;
    let grid = b.domain.grid(&nodes, Some(b.axis))?;
    let results = map_indices(grid.len(), q.exec, |i| {
        let (u, w) = grid.node(i);
        let r = b.conormal(&u).and_then(|eta| f(eta.base(), &eta));
        let weight = w * b.area_element(&u);
        (b.full_params(&u), weight, r)
    });
    collect_in_order(results, SamplingKind::Tensor)
}

pub fn integrate_boundary<G>(b: &BoundaryPatch, q: &QuadratureSpec, g: G) -> Result<f64>
where
    G: Fn(&SpherePoint, &TangentVector) -> Result<f64> + Sync + Send,
{
    Ok(map_boundary(b, q, g)?.integrate(|v| *v).value)
}

/// Exact vol(S³) = 2π², used by the catalog checks.
pub fn s3_volume() -> f64 {
    2.0 * PI * PI
}
