//! One-dimensional rules, tensor grids, compensated accumulation and the
//! parallel node-evaluation driver.

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::num::NonZeroUsize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Equally spaced nodes with equal weights; exact for trigonometric
    /// polynomials of degree < n on periodic axes.
    Periodic,
    GaussLegendre,
}

/// How node evaluations are scheduled. Results never depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Node counts, Monte Carlo sample size and seed for one integration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Per chart axis; `None` selects the default for the domain.
    pub nodes_per_axis: Option<Vec<usize>>,
    pub mc_samples: Option<usize>,
    pub rng_seed: u64,
    #[serde(skip)]
    pub exec: ExecMode,
}

impl QuadratureSpec {
    pub fn with_nodes(nodes: Vec<usize>) -> Self {
        QuadratureSpec {
            nodes_per_axis: Some(nodes),
            ..Default::default()
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            mc_samples: Some(samples),
            rng_seed: seed,
            ..Default::default()
        }
    }

    pub fn exec(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }
}

pub const DEFAULT_PERIODIC_NODES: usize = 64;
pub const DEFAULT_GL_NODES: usize = 48;
/// Per-axis default for charts of dimension above three.
pub const DEFAULT_HIGH_DIM_NODES: usize = 12;

/// Nodes and weights of a rule mapped onto [lo, hi].
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    pub rule: Rule,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    pub fn new(rule: Rule, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let Some(count) = NonZeroUsize::new(n) else {
            return Err(LabError::InvalidParameter("quadrature needs at least one node per axis".into()));
        };
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(LabError::InvalidParameter(format!("bad axis interval [{lo}, {hi}]")));
        }
        let len = hi - lo;
        let (nodes, weights) = match rule {
            Rule::Periodic => {
                let h = len / n as f64;
                ((0..n).map(|i| lo + h * i as f64).collect(), vec![h; n])
            }
            Rule::GaussLegendre => {
                let gl = GaussLegendre::new(count);
                let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let half = 0.5 * len;
                pairs
                    .into_iter()
                    .map(|(x, w)| (lo + half * (x + 1.0), half * w))
                    .unzip()
            }
        };
        Ok(AxisRule { rule, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Row-major tensor product of axis rules (first axis varies slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub axes: Vec<AxisRule>,
}

impl TensorGrid {
    pub fn len(&self) -> usize {
        self.axes.iter().map(AxisRule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters and product weight of node `index`.
    pub fn node(&self, mut index: usize) -> (Vec<f64>, f64) {
        let mut params = vec![0.0; self.axes.len()];
        let mut weight = 1.0;
        for (a, axis) in self.axes.iter().enumerate().rev() {
            let i = index % axis.len();
            index /= axis.len();
            params[a] = axis.nodes[i];
            weight *= axis.weights[i];
        }
        (params, weight)
    }
}

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().total()
}

/// Evaluates `f` on `0..len` and returns results in index order. With
/// [`ExecMode::Parallel`] (and the `parallel` feature) evaluation runs on the
/// rayon pool.
pub fn map_indices<T, F>(len: usize, exec: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_rule_is_exact_for_low_harmonics() {
        let r = AxisRule::new(Rule::Periodic, 0.0, 2.0 * PI, 16).unwrap();
        let integral = |f: &dyn Fn(f64) -> f64| compensated_sum(r.nodes.iter().zip(&r.weights).map(|(x, w)| w * f(*x)));
        assert!((integral(&|x| (3.0 * x).cos().powi(2)) - PI).abs() < 1e-14);
        assert!(integral(&|x| (7.0 * x).sin()).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let r = AxisRule::new(Rule::GaussLegendre, 0.0, 0.5, 5).unwrap();
        // degree 9 is the exactness limit for 5 nodes
        let s = compensated_sum(r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(9)));
        assert!((s - 0.5f64.powi(10) / 10.0).abs() < 1e-16);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes[0] > 0.0 && r.nodes[4] < 0.5);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(AxisRule::new(Rule::Periodic, 0.0, 1.0, 0).is_err());
        assert!(AxisRule::new(Rule::GaussLegendre, 1.0, 1.0, 4).is_err());
    }

    #[test]
    fn tensor_grid_indexing_is_row_major() {
        let g = TensorGrid {
            axes: vec![
                AxisRule::new(Rule::Periodic, 0.0, 2.0, 2).unwrap(),
                AxisRule::new(Rule::Periodic, 0.0, 3.0, 3).unwrap(),
            ],
        };
        assert_eq!(g.len(), 6);
        assert_eq!(g.node(0), (vec![0.0, 0.0], 1.0));
        assert_eq!(g.node(1), (vec![0.0, 1.0], 1.0));
        assert_eq!(g.node(3), (vec![1.0, 0.0], 1.0));
        let total = compensated_sum((0..g.len()).map(|i| g.node(i).1));
        assert_eq!(total, 6.0);
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn map_indices_preserves_order_in_both_modes() {
        let seq = map_indices(1000, ExecMode::Sequential, |i| (i as f64).sqrt());
        let par = map_indices(1000, ExecMode::Parallel, |i| (i as f64).sqrt());
        assert_eq!(seq, par);
    }
}
