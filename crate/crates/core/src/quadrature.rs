//! Gauss–Legendre panels graded geometrically toward 0 and ±π.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of the p-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; p];
    let mut weights = vec![0.0; p];
    for i in 0..p.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (p as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (pn, d) = legendre_with_derivative(p, x);
            dp = d;
            let dx = pn / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(p, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[p - 1 - i] = x;
        weights[i] = w;
        weights[p - 1 - i] = w;
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Reference-panel operators acting on samples at the p Gauss–Legendre nodes.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// integration[j][k]: ∫_{-1}^{x_j} ℓ_k, ℓ_k the Lagrange basis
    pub integration: Vec<Vec<f64>>,
    /// differentiation[j][k]: ℓ_k'(x_j)
    pub differentiation: Vec<Vec<f64>>,
}

impl PanelRule {
    pub fn new(p: usize) -> Self {
        let (nodes, weights) = gauss_legendre(p);
        // Legendre values P_m and derivatives at every node, m = 0..=p
        let table: Vec<(Vec<f64>, Vec<f64>)> = nodes
            .iter()
            .map(|&x| {
                let mut vals = vec![0.0; p + 1];
                let mut ders = vec![0.0; p + 1];
                vals[0] = 1.0;
                if p >= 1 {
                    vals[1] = x;
                    ders[1] = 1.0;
                }
                for m in 1..p {
                    let mf = m as f64;
                    vals[m + 1] = ((2.0 * mf + 1.0) * x * vals[m] - mf * vals[m - 1]) / (mf + 1.0);
                    ders[m + 1] = ders[m - 1] + (2.0 * mf + 1.0) * vals[m];
                }
                (vals, ders)
            })
            .collect();

        // ∫_{-1}^{x} P_0 = x + 1; ∫_{-1}^{x} P_m = (P_{m+1} - P_{m-1}) / (2m + 1)
        let antiderivative = |j: usize, m: usize| {
            let (vals, _) = &table[j];
            if m == 0 {
                nodes[j] + 1.0
            } else {
                (vals[m + 1] - vals[m - 1]) / (2.0 * m as f64 + 1.0)
            }
        };
        let project = |m: usize, k: usize| (2.0 * m as f64 + 1.0) / 2.0 * weights[k] * table[k].0[m];

        let integration = (0..p)
            .map(|j| {
                (0..p)
                    .map(|k| (0..p).map(|m| antiderivative(j, m) * project(m, k)).sum())
                    .collect()
            })
            .collect();
        let differentiation = (0..p)
            .map(|j| {
                (0..p)
                    .map(|k| (0..p).map(|m| table[j].1[m] * project(m, k)).sum())
                    .collect()
            })
            .collect();
        Self {
            nodes,
            weights,
            integration,
            differentiation,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nodes_per_panel: usize,
    /// ratio between consecutive graded panel widths, in (0, 1)
    pub grading_ratio: f64,
    /// graded panels next to each singular point
    pub graded_levels: usize,
    /// uniform panels covering [span, π - span]
    pub uniform_panels: usize,
    /// width of each graded zone
    pub graded_span: f64,
}

impl Default for GridConfig {
    /// 2048 nodes over (-π, π): 16 nodes × 64 panels per half.
    fn default() -> Self {
        Self {
            nodes_per_panel: 16,
            grading_ratio: 0.5,
            graded_levels: 24,
            uniform_panels: 16,
            graded_span: PI / 4.0,
        }
    }
}

impl GridConfig {
    /// The default grid, refined for ε < 1/2 so that the weight
    /// tan(t/2)^{1/ε} varies by a bounded factor across every panel.
    pub fn for_epsilon(eps: f64) -> Self {
        let base = Self::default();
        let scale = (2.0 * eps).min(1.0);
        if scale.is_nan() || scale <= 0.0 {
            return base;
        }
        Self {
            grading_ratio: base.grading_ratio.powf(scale),
            graded_levels: (base.graded_levels as f64 / scale).ceil() as usize,
            uniform_panels: (base.uniform_panels as f64 / scale).ceil() as usize,
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 2 {
            return Err(Error::InvalidGrid("need at least 2 nodes per panel".into()));
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return Err(Error::InvalidGrid(format!(
                "grading ratio {} outside (0, 1)",
                self.grading_ratio
            )));
        }
        if self.graded_levels == 0 || self.uniform_panels == 0 {
            return Err(Error::InvalidGrid("panel counts must be positive".into()));
        }
        if !(self.graded_span > 0.0 && self.graded_span < PI / 2.0) {
            return Err(Error::InvalidGrid(format!(
                "graded span {} outside (0, π/2)",
                self.graded_span
            )));
        }
        Ok(())
    }

    /// Panels of [0, π] in ascending order, graded toward both ends.
    pub fn half_panels(&self) -> Vec<Panel> {
        let a = self.graded_span;
        let levels = self.graded_levels as i32;
        let ratio = self.grading_ratio;
        let mut panels = vec![Panel::near_zero(0.0, a * ratio.powi(levels - 1))];
        for k in (1..levels).rev() {
            panels.push(Panel::near_zero(a * ratio.powi(k), a * ratio.powi(k - 1)));
        }
        let width = (PI - 2.0 * a) / self.uniform_panels as f64;
        for k in 0..self.uniform_panels {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == self.uniform_panels { PI - a } else { lo + width };
            panels.push(Panel::near_zero(lo, hi));
        }
        for k in 0..levels {
            panels.push(Panel::near_pi(a * ratio.powi(k + 1), a * ratio.powi(k)));
        }
        panels.last_mut().unwrap().lo = 0.0;
        panels
    }
}

/// A panel of [0, π]. Panels in the right graded zone are described by
/// their distance to π so that nodes next to π keep full relative accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    /// endpoints: positions if `from_pi` is false, distances to π otherwise
    pub lo: f64,
    pub hi: f64,
    pub from_pi: bool,
}

/// Node geometry of one panel.
#[derive(Debug, Clone)]
pub struct PanelNodes {
    pub s: Vec<f64>,
    /// distance to the nearer anchor of the panel's description (s or π − s)
    pub r: Vec<f64>,
    pub sin: Vec<f64>,
    /// log tan(s/2)
    pub ell: Vec<f64>,
    pub half_width: f64,
}

impl Panel {
    fn near_zero(lo: f64, hi: f64) -> Self {
        Self { lo, hi, from_pi: false }
    }

    fn near_pi(lo: f64, hi: f64) -> Self {
        Self { lo, hi, from_pi: true }
    }

    /// Left and right ends as positions in [0, π].
    pub fn bounds(&self) -> (f64, f64) {
        if self.from_pi {
            (PI - self.hi, PI - self.lo)
        } else {
            (self.lo, self.hi)
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    /// Nodes in ascending s for reference nodes ξ in ascending order.
    pub fn nodes(&self, xi: &[f64]) -> PanelNodes {
        let h = self.half_width();
        let (mut s, mut r, mut sin, mut ell) = (vec![], vec![], vec![], vec![]);
        for &x in xi {
            if self.from_pi {
                let d = self.lo + h * (1.0 - x);
                s.push(PI - d);
                r.push(d);
                sin.push(d.sin());
                ell.push(-log_tan_half(d));
            } else {
                let t = self.lo + h * (1.0 + x);
                s.push(t);
                r.push(t);
                sin.push(t.sin());
                ell.push(log_tan_half(t));
            }
        }
        PanelNodes {
            s,
            r,
            sin,
            ell,
            half_width: h,
        }
    }

    /// log tan(s/2) at the left end; -∞ at 0.
    pub fn ell_left(&self) -> f64 {
        if self.from_pi {
            -log_tan_half(self.hi)
        } else if self.lo == 0.0 {
            f64::NEG_INFINITY
        } else {
            log_tan_half(self.lo)
        }
    }

    /// log tan(s/2) at the right end; +∞ at π.
    pub fn ell_right(&self) -> f64 {
        if self.from_pi {
            if self.lo == 0.0 {
                f64::INFINITY
            } else {
                -log_tan_half(self.lo)
            }
        } else {
            log_tan_half(self.hi)
        }
    }
}

/// Graded grid on (-π, π), symmetric about 0, with the log weight
/// (1/ε) log tan(|t|/2) tabulated at every node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub config: GridConfig,
    pub epsilon: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub log_weight: Vec<f64>,
    /// panels of the positive half; the negative half mirrors them
    pub half_panels: Vec<Panel>,
}

impl QuadratureGrid {
    pub fn new(config: GridConfig, epsilon: f64) -> Result<Self> {
        config.validate()?;
        let rule = PanelRule::new(config.nodes_per_panel);
        let panels = config.half_panels();
        let mut pos_nodes = Vec::new();
        let mut pos_weights = Vec::new();
        let mut pos_ell = Vec::new();
        for panel in &panels {
            let geo = panel.nodes(&rule.nodes);
            pos_nodes.extend_from_slice(&geo.s);
            pos_ell.extend_from_slice(&geo.ell);
            pos_weights.extend(rule.weights.iter().map(|w| w * geo.half_width));
        }
        let nodes: Vec<f64> = pos_nodes.iter().rev().map(|x| -x).chain(pos_nodes.iter().copied()).collect();
        let weights: Vec<f64> = pos_weights.iter().rev().chain(pos_weights.iter()).copied().collect();
        let log_weight = pos_ell.iter().rev().chain(pos_ell.iter()).map(|l| l / epsilon).collect();
        let grid = Self {
            config,
            epsilon,
            nodes,
            weights,
            log_weight,
            half_panels: panels,
        };
        grid.check_invariants()?;
        Ok(grid)
    }

    fn check_invariants(&self) -> Result<()> {
        let ordered = self.nodes.windows(2).all(|w| w[0] < w[1]);
        let interior = self.nodes.iter().all(|&x| x != 0.0 && x.abs() < PI);
        let finite = self.log_weight.iter().all(|v| v.is_finite());
        if ordered && interior && finite {
            Ok(())
        } else {
            Err(Error::InvalidGrid(
                "nodes must be strictly increasing, avoid 0 and ±π, and carry finite log weights".into(),
            ))
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_{-π}^{π} f by the panel rule applied to samples at the nodes.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }
}

/// log tan(t/2) for t in (0, π).
pub fn log_tan_half(t: f64) -> f64 {
    (t / 2.0).tan().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for p in [2, 5, 16, 31] {
            let (x, w) = gauss_legendre(p);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * p {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "p={p} deg={deg}");
            }
        }
    }

    #[test]
    fn panel_operators_are_exact_below_degree_p() {
        let rule = PanelRule::new(12);
        for deg in 0..12 {
            let f: Vec<f64> = rule.nodes.iter().map(|x| x.powi(deg)).collect();
            for (j, &xj) in rule.nodes.iter().enumerate() {
                let integ: f64 = rule.integration[j].iter().zip(&f).map(|(a, b)| a * b).sum();
                let exact = (xj.powi(deg + 1) - (-1f64).powi(deg + 1)) / (deg as f64 + 1.0);
                assert!((integ - exact).abs() < 1e-13, "deg={deg}");
                let diff: f64 = rule.differentiation[j].iter().zip(&f).map(|(a, b)| a * b).sum();
                let exact_d = if deg == 0 { 0.0 } else { deg as f64 * xj.powi(deg - 1) };
                assert!((diff - exact_d).abs() < 1e-11, "deg={deg}");
            }
        }
    }

    #[test]
    fn default_grid_shape() {
        let g = QuadratureGrid::new(GridConfig::default(), 0.5).unwrap();
        assert_eq!(g.len(), 2048);
        for (x, y) in g.nodes.iter().zip(g.nodes.iter().rev()) {
            assert_eq!(*x, -*y);
        }
        assert!((g.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-13);
        let cos2: Vec<f64> = g.nodes.iter().map(|x| (2.0 * x).cos().powi(2)).collect();
        assert!((g.integrate(&cos2) - PI).abs() < 1e-13);
        let p = &g.half_panels;
        assert_eq!(p.len(), 64);
        for w in p.windows(2) {
            assert!((w[0].bounds().1 - w[1].bounds().0).abs() < 1e-15);
        }
        assert!(p[0].hi < 1e-7 && p[63].hi < 1e-7 && p[63].lo == 0.0);
        assert!(g.nodes[2047] < PI && PI - g.nodes[2047] > 1e-12);
    }

    #[test]
    fn epsilon_refinement() {
        assert_eq!(GridConfig::for_epsilon(1.5), GridConfig::default());
        assert_eq!(GridConfig::for_epsilon(0.5), GridConfig::default());
        let fine = GridConfig::for_epsilon(0.1);
        assert!(fine.grading_ratio > 0.5 && fine.graded_levels == 120 && fine.uniform_panels == 80);
        let g = QuadratureGrid::new(fine, 0.1).unwrap();
        assert!((g.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = GridConfig {
            grading_ratio: 1.5,
            ..GridConfig::default()
        };
        assert!(matches!(QuadratureGrid::new(bad, 1.0), Err(Error::InvalidGrid(_))));
        let bad = GridConfig {
            nodes_per_panel: 1,
            ..GridConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
