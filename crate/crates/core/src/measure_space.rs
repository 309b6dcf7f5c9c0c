//! The one-particle space `(X, mu)` as a finite list of nodes and weights,
//! and windows (subsets of `X`) as node masks.
//!
//! Discrete measures are represented exactly. Continuous measures on an
//! interval are replaced by a (composite) Gauss-Legendre rule, so every
//! integral over `X` becomes a weighted sum over the nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Discrete,
    Quadrature {
        interval: (f64, f64),
        /// Nodes per panel.
        order: usize,
        /// Panel boundaries, including both interval ends.
        breakpoints: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedSpace {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: SpaceKind,
}

impl DiscretizedSpace {
    /// Exact discrete measure with point masses `masses` at `points`.
    pub fn discrete(points: &[f64], masses: &[f64]) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::InvalidSpace(format!(
                "{} points but {} masses",
                points.len(),
                masses.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one node".into()));
        }
        if let Some(w) = points.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpace(format!(
                "points must be strictly increasing ({} is followed by {})",
                w[0], w[1]
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidSpace(format!("masses must be positive, got {m}")));
        }
        Ok(Self {
            nodes: points.to_vec(),
            weights: masses.to_vec(),
            kind: SpaceKind::Discrete,
        })
    }

    /// Gauss-Legendre rule of the given order on `[a, b]` (Lebesgue measure).
    pub fn quadrature(a: f64, b: f64, order: usize) -> Result<Self> {
        Self::composite_quadrature(&[a, b], order)
    }

    /// Composite Gauss-Legendre rule with `order` nodes on every panel
    /// between consecutive `breakpoints`.
    ///
    /// Placing a breakpoint at a window boundary makes windows that end there
    /// exact instead of truncated at node granularity.
    pub fn composite_quadrature(breakpoints: &[f64], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidSpace("quadrature order must be at least 1".into()));
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidSpace("an interval needs two end points".into()));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidSpace("interval end points must be finite".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpace(format!(
                "degenerate interval [{}, {}]",
                w[0], w[1]
            )));
        }
        let (ref_nodes, ref_weights) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * (breakpoints.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in breakpoints.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            for (t, wt) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + half * t);
                weights.push(half * wt);
            }
        }
        Ok(Self {
            nodes,
            weights,
            kind: SpaceKind::Quadrature {
                interval: (breakpoints[0], *breakpoints.last().unwrap()),
                order,
                breakpoints: breakpoints.to_vec(),
            },
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Discrete { points, masses } => Self::discrete(points, masses),
            SpaceSpec::Quadrature {
                interval,
                order,
                breakpoints,
            } => {
                let mut bps = vec![interval[0]];
                for b in breakpoints.iter().flatten() {
                    if *b > interval[0] && *b < interval[1] {
                        bps.push(*b);
                    }
                }
                bps.push(interval[1]);
                bps.sort_by(f64::total_cmp);
                bps.dedup();
                if interval[0] >= interval[1] {
                    return Err(Error::InvalidSpace(format!(
                        "degenerate interval [{}, {}]",
                        interval[0], interval[1]
                    )));
                }
                Self::composite_quadrature(&bps, *order)
            }
        }
    }

    pub fn to_spec(&self) -> SpaceSpec {
        match &self.kind {
            SpaceKind::Discrete => SpaceSpec::Discrete {
                points: self.nodes.clone(),
                masses: self.weights.clone(),
            },
            SpaceKind::Quadrature {
                interval,
                order,
                breakpoints,
            } => SpaceSpec::Quadrature {
                interval: [interval.0, interval.1],
                order: *order,
                breakpoints: if breakpoints.len() > 2 {
                    Some(breakpoints[1..breakpoints.len() - 1].to_vec())
                } else {
                    None
                },
            },
        }
    }
}

/// JSON description of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Discrete {
        points: Vec<f64>,
        masses: Vec<f64>,
    },
    Quadrature {
        interval: [f64; 2],
        order: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        breakpoints: Option<Vec<f64>>,
    },
}

/// Gauss-Legendre nodes (increasing) and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut x = theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
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

/// A subset `I` of the space, stored as a node mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    mask: Vec<bool>,
}

impl Window {
    pub fn from_mask(space: &DiscretizedSpace, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != space.len() {
            return Err(Error::InvalidWindow(format!(
                "mask has {} entries, space has {} nodes",
                mask.len(),
                space.len()
            )));
        }
        Ok(Self { mask })
    }

    /// Nodes lying in the union of the closed intervals.
    pub fn from_intervals(space: &DiscretizedSpace, intervals: &[(f64, f64)]) -> Result<Self> {
        if let Some((a, b)) = intervals.iter().find(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidWindow(format!("interval [{a}, {b}] is reversed")));
        }
        let mask = space
            .nodes()
            .iter()
            .map(|x| intervals.iter().any(|(a, b)| a <= x && x <= b))
            .collect();
        Ok(Self { mask })
    }

    /// The half-line `[s, +inf)`.
    pub fn at_or_above(space: &DiscretizedSpace, s: f64) -> Self {
        Self {
            mask: space.nodes().iter().map(|x| *x >= s).collect(),
        }
    }

    pub fn empty(space: &DiscretizedSpace) -> Self {
        Self {
            mask: vec![false; space.len()],
        }
    }

    pub fn full(space: &DiscretizedSpace) -> Self {
        Self {
            mask: vec![true; space.len()],
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.mask.get(node).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }

    /// Indices of the member nodes, increasing.
    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
            .collect()
    }

    /// Weights multiplied by the indicator of the window.
    pub fn restrict_weights(&self, weights: &[f64]) -> Vec<f64> {
        weights
            .iter()
            .zip(&self.mask)
            .map(|(w, b)| if *b { *w } else { 0.0 })
            .collect()
    }

    pub fn from_spec(space: &DiscretizedSpace, spec: &WindowSpec) -> Result<Self> {
        match spec {
            WindowSpec::Intervals { intervals } => {
                let iv: Vec<(f64, f64)> = intervals.iter().map(|[a, b]| (*a, *b)).collect();
                Self::from_intervals(space, &iv)
            }
            WindowSpec::Mask { mask } => {
                Self::from_mask(space, mask.iter().map(|m| m.as_bool()).collect())
            }
        }
    }
}

/// A window per floor: `I_1, ..., I_M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WindowFamily {
    windows: Vec<Window>,
}

impl WindowFamily {
    pub fn new(space: &DiscretizedSpace, windows: Vec<Window>) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::InvalidWindow("a window family needs at least one floor".into()));
        }
        if let Some(w) = windows.iter().find(|w| w.len() != space.len()) {
            return Err(Error::InvalidWindow(format!(
                "window has {} entries, space has {} nodes",
                w.len(),
                space.len()
            )));
        }
        Ok(Self { windows })
    }

    pub fn empty(space: &DiscretizedSpace, floors: usize) -> Self {
        Self {
            windows: vec![Window::empty(space); floors],
        }
    }

    pub fn full(space: &DiscretizedSpace, floors: usize) -> Self {
        Self {
            windows: vec![Window::full(space); floors],
        }
    }

    pub fn floors(&self) -> usize {
        self.windows.len()
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn window(&self, floor: usize) -> &Window {
        &self.windows[floor]
    }

    pub fn complement(&self) -> Self {
        Self {
            windows: self.windows.iter().map(Window::complement).collect(),
        }
    }

    /// Complements the windows of the floors for which `flip[l]` is set.
    pub fn flip_floors(&self, flip: &[bool]) -> Self {
        Self {
            windows: self
                .windows
                .iter()
                .zip(flip)
                .map(|(w, f)| if *f { w.complement() } else { w.clone() })
                .collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.windows.iter().map(Window::count).sum()
    }

    pub fn is_all_empty(&self) -> bool {
        self.node_count() == 0
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .windows
            .iter()
            .enumerate()
            .map(|(l, w)| format!("I_{l}={:?}", w.indices()))
            .collect();
        parts.join(", ")
    }

    pub fn from_specs(space: &DiscretizedSpace, specs: &[WindowSpec]) -> Result<Self> {
        let windows = specs
            .iter()
            .map(|s| Window::from_spec(space, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, windows)
    }
}

/// JSON description of a window: `{"intervals": [[a, b], ...]}` or
/// `{"mask": [true, 0, 1, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum WindowSpec {
    Intervals { intervals: Vec<[f64; 2]> },
    Mask { mask: Vec<MaskEntry> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaskEntry {
    Bool(bool),
    Int(u8),
}

impl MaskEntry {
    fn as_bool(self) -> bool {
        match self {
            MaskEntry::Bool(b) => b,
            MaskEntry::Int(i) => i != 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn discrete_space_total_mass() {
        let s = DiscretizedSpace::discrete(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.total_mass(), 2.0);
        assert_eq!(s.integrate(|_| 1.0), 2.0);
        let single = DiscretizedSpace::discrete(&[0.0], &[1.0]).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn discrete_space_rejects_bad_input() {
        assert!(DiscretizedSpace::discrete(&[1.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(DiscretizedSpace::discrete(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(DiscretizedSpace::discrete(&[0.0, 1.0], &[1.0, 0.0]).is_err());
        assert!(DiscretizedSpace::discrete(&[0.0, 1.0], &[1.0]).is_err());
        assert!(DiscretizedSpace::discrete(&[], &[]).is_err());
    }

    #[test]
    fn gauss_legendre_order_one_is_midpoint() {
        let s = DiscretizedSpace::quadrature(-1.0, 1.0, 1).unwrap();
        assert_eq!(s.nodes(), &[0.0]);
        assert_relative_eq!(s.weights()[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_x_squared() {
        let s = DiscretizedSpace::quadrature(-1.0, 1.0, 16).unwrap();
        assert!((s.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_exponential() {
        let s = DiscretizedSpace::quadrature(0.0, 1.0, 32).unwrap();
        // Reference: e - 1 from the antiderivative.
        assert!((s.integrate(f64::exp) - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_exact_for_monomials_up_to_degree_2q_minus_1() {
        for q in [1usize, 2, 5, 12, 40, 100] {
            let s = DiscretizedSpace::quadrature(-0.5, 2.0, q).unwrap();
            for d in 0..(2 * q) as i32 {
                if d > 60 {
                    break;
                }
                let exact = (2f64.powi(d + 1) - (-0.5f64).powi(d + 1)) / (d as f64 + 1.0);
                let got = s.integrate(|x| x.powi(d));
                assert!(
                    (got - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                    "q={q} d={d}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn quadrature_nodes_strictly_increasing_across_panels() {
        let s = DiscretizedSpace::composite_quadrature(&[-6.0, -1.0, 0.0, 2.0, 6.0], 9).unwrap();
        assert_eq!(s.len(), 36);
        assert!(s.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!((s.total_mass() - 12.0).abs() < 1e-13);
    }

    #[test]
    fn quadrature_rejects_degenerate_input() {
        assert!(DiscretizedSpace::quadrature(1.0, 1.0, 4).is_err());
        assert!(DiscretizedSpace::quadrature(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn complement_is_an_involution() {
        let s = DiscretizedSpace::discrete(&[0.0, 1.0, 2.0], &[1.0; 3]).unwrap();
        let w = Window::from_mask(&s, vec![true, false, true]).unwrap();
        assert_eq!(w.complement().mask(), &[false, true, false]);
        assert_eq!(w.complement().complement(), w);
        assert_eq!(Window::full(&s).complement(), Window::empty(&s));
    }

    #[test]
    fn window_from_intervals_and_half_line() {
        let s = DiscretizedSpace::discrete(&[0.0, 1.0, 2.0, 3.0], &[1.0; 4]).unwrap();
        let w = Window::from_intervals(&s, &[(0.5, 1.0), (3.0, 9.0)]).unwrap();
        assert_eq!(w.indices(), vec![1, 3]);
        assert_eq!(Window::at_or_above(&s, 2.0).indices(), vec![2, 3]);
        assert!(Window::from_mask(&s, vec![true]).is_err());
    }

    #[test]
    fn space_and_window_json() {
        let spec: SpaceSpec =
            serde_json::from_str(r#"{"kind":"quadrature","interval":[-1,1],"order":4}"#).unwrap();
        let s = DiscretizedSpace::from_spec(&spec).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.to_spec(), spec);
        let d: SpaceSpec =
            serde_json::from_str(r#"{"kind":"discrete","points":[0,1,2],"masses":[1,1,1]}"#).unwrap();
        let d = DiscretizedSpace::from_spec(&d).unwrap();
        let w: WindowSpec = serde_json::from_str(r#"{"mask":[1,0,true]}"#).unwrap();
        assert_eq!(Window::from_spec(&d, &w).unwrap().indices(), vec![0, 2]);
        let w: WindowSpec = serde_json::from_str(r#"{"intervals":[[0.5,2]]}"#).unwrap();
        assert_eq!(Window::from_spec(&d, &w).unwrap().indices(), vec![1, 2]);
    }

    proptest::proptest! {
        #[test]
        fn complement_partitions_the_nodes(mask in proptest::collection::vec(proptest::bool::ANY, 1..20)) {
            let pts: Vec<f64> = (0..mask.len()).map(|i| i as f64).collect();
            let s = DiscretizedSpace::discrete(&pts, &vec![1.0; mask.len()]).unwrap();
            let w = Window::from_mask(&s, mask).unwrap();
            let c = w.complement();
            proptest::prop_assert!(w.mask().iter().zip(c.mask()).all(|(a, b)| a ^ b));
            proptest::prop_assert_eq!(c.complement(), w);
        }
    }
}
