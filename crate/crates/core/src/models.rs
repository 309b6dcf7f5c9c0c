//! Builders for concrete ensembles: unitary one-matrix ensembles, Hermitian
//! matrices coupled in a chain, non-intersecting Brownian paths
//! (Karlin-McGregor), explicit sampled data and seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{ChainEnsemble, EnsembleOptions};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::measure_space::{DiscretizedSpace, SpaceKind, SpaceSpec};

/// Monomial bases with more functions than this are orthonormalized on the
/// nodes before use. The kernel only depends on the spans, so this only
/// changes conditioning.
pub const MONOMIAL_ORTHONORMALIZE_ABOVE: usize = 8;

/// Lower and upper bound of the entries drawn by [`build_random`].
pub const RANDOM_ENTRY_RANGE: (f64, f64) = (0.2, 1.2);

/// `V(x) = Σ_k c_k x^k`, written `{"polynomial": [c0, c1, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Polynomial(Vec<f64>),
}

impl Potential {
    pub fn quadratic(a: f64) -> Self {
        Potential::Polynomial(vec![0.0, 0.0, a])
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ck| acc * x + ck),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// Standard Brownian motion.
    #[default]
    Heat,
}

/// A real or complex number in JSON: `1.5` or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn to_c64(self) -> C64 {
        match self {
            ComplexValue::Real(x) => C64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KarlinMcGregorSpec {
    #[serde(default)]
    pub transition: Transition,
    /// `t_0 < t_1 < ... < t_{M+1}`; floors sit at `t_1 .. t_M`.
    pub times: Vec<f64>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Gauss-Legendre nodes per panel of the automatic space.
    #[serde(default = "default_km_order")]
    pub order: usize,
    /// Panel count of the automatic space; chosen from the shortest time step
    /// when absent.
    #[serde(default)]
    pub panels: Option<usize>,
    /// Overrides the automatic space.
    #[serde(default)]
    pub space: Option<SpaceSpec>,
}

fn default_km_order() -> usize {
    20
}

/// Model description as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ChainModelSpec {
    Unitary {
        potential: Potential,
        n: usize,
        space: SpaceSpec,
    },
    CoupledChain {
        n: usize,
        potentials: Vec<Potential>,
        couplings: Vec<f64>,
        space: SpaceSpec,
    },
    KarlinMcgregor(KarlinMcGregorSpec),
    Random {
        seed: u64,
        nodes: usize,
        n: usize,
        floors: usize,
    },
    Explicit {
        space: SpaceSpec,
        f: Vec<Vec<ComplexValue>>,
        phi: Vec<Vec<ComplexValue>>,
        #[serde(default)]
        g: Vec<Vec<Vec<ComplexValue>>>,
    },
}

impl ChainModelSpec {
    pub fn build(&self, options: EnsembleOptions) -> Result<ChainEnsemble> {
        match self {
            ChainModelSpec::Unitary { potential, n, space } => {
                build_unitary(potential, *n, DiscretizedSpace::from_spec(space)?, options)
            }
            ChainModelSpec::CoupledChain {
                n,
                potentials,
                couplings,
                space,
            } => build_coupled_chain(*n, potentials, couplings, DiscretizedSpace::from_spec(space)?, options),
            ChainModelSpec::KarlinMcgregor(spec) => build_karlin_mcgregor(spec, options),
            ChainModelSpec::Random { seed, nodes, n, floors } => {
                build_random_with(*seed, *nodes, *n, *floors, options)
            }
            ChainModelSpec::Explicit { space, f, phi, g } => {
                let space = DiscretizedSpace::from_spec(space)?;
                let rows = |v: &[Vec<ComplexValue>]| -> Result<CMatrix> {
                    let ncols = v.first().map_or(0, Vec::len);
                    if v.iter().any(|r| r.len() != ncols) {
                        return Err(Error::InvalidEnsemble("ragged sample rows".into()));
                    }
                    Ok(CMatrix::from_fn(v.len(), ncols, |i, j| v[i][j].to_c64()))
                };
                let links = g.iter().map(|m| rows(m)).collect::<Result<Vec<_>>>()?;
                ChainEnsemble::new(space, rows(f)?, rows(phi)?, links, options)
            }
        }
    }

    /// Replaces the seed of a random model.
    pub fn with_seed(&self, new_seed: u64) -> Self {
        match self {
            ChainModelSpec::Random { nodes, n, floors, .. } => ChainModelSpec::Random {
                seed: new_seed,
                nodes: *nodes,
                n: *n,
                floors: *floors,
            },
            other => other.clone(),
        }
    }
}

/// Heat kernel `exp(-(y-x)²/(2t)) / sqrt(2πt)`.
pub fn heat_kernel(t: f64, x: f64, y: f64) -> f64 {
    (-(y - x).powi(2) / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt()
}

/// Rows `x^j · exp(-V(x)/2)`, `j = 0..n`.
fn weighted_monomials(space: &DiscretizedSpace, n: usize, potential: Option<&Potential>) -> CMatrix {
    CMatrix::from_fn(n, space.len(), |j, x| {
        let t = space.nodes()[x];
        let damp = potential.map_or(1.0, |v| (-0.5 * v.eval(t)).exp());
        C64::new(t.powi(j as i32) * damp, 0.0)
    })
}

/// Gram-Schmidt (twice) in the weighted inner product `Σ w conj(u) v`.
pub fn orthonormalize_rows(space: &DiscretizedSpace, rows: &CMatrix) -> CMatrix {
    let w = space.weights();
    let mut out = rows.clone();
    let inner = |a: &CMatrix, i: usize, b: &CMatrix, j: usize| -> C64 {
        (0..w.len()).map(|x| a[(i, x)].conj() * b[(j, x)] * w[x]).sum()
    };
    for i in 0..out.nrows() {
        for _ in 0..2 {
            for k in 0..i {
                let c = inner(&out, k, &out, i);
                for x in 0..w.len() {
                    let v = out[(k, x)];
                    out[(i, x)] -= c * v;
                }
            }
        }
        let norm = inner(&out, i, &out, i).re.sqrt();
        if norm > 0.0 {
            out.row_mut(i).unscale_mut(norm);
        }
    }
    out
}

fn check_rank(n: usize, space: &DiscretizedSpace) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidEnsemble("n must be at least 1".into()));
    }
    if n > space.len() {
        let what = match space.kind() {
            SpaceKind::Discrete => "the number of nodes",
            SpaceKind::Quadrature { .. } => "the quadrature size",
        };
        return Err(Error::InvalidEnsemble(format!(
            "n = {n} exceeds {what} ({}); A would be rank deficient",
            space.len()
        )));
    }
    Ok(())
}

fn basis(space: &DiscretizedSpace, n: usize, potential: Option<&Potential>) -> CMatrix {
    let rows = weighted_monomials(space, n, potential);
    if n > MONOMIAL_ORTHONORMALIZE_ABOVE {
        orthonormalize_rows(space, &rows)
    } else {
        rows
    }
}

/// One-matrix unitary ensemble: `f_j = φ_j = x^j e^{-V(x)/2}` on a single floor.
pub fn build_unitary(
    potential: &Potential,
    n: usize,
    space: DiscretizedSpace,
    options: EnsembleOptions,
) -> Result<ChainEnsemble> {
    check_rank(n, &space)?;
    let f = basis(&space, n, Some(potential));
    ChainEnsemble::new(space, f.clone(), f, Vec::new(), options)
}

/// Eigenvalues of Hermitian matrices coupled in a chain.
///
/// `f_j(x) = x^j e^{-V_0(x)/2}`, `φ_j(y) = y^j e^{-V_{M-1}(y)/2}` and
/// `g_{l,l+1}(x,y) = e^{c_l x y} e^{-V_{l+1}(y)}` for interior floors
/// `l+1 < M-1`; the last link carries no potential since `V_{M-1}/2` sits in
/// `φ`. With a single floor this is the unitary ensemble of `V_0`.
pub fn build_coupled_chain(
    n: usize,
    potentials: &[Potential],
    couplings: &[f64],
    space: DiscretizedSpace,
    options: EnsembleOptions,
) -> Result<ChainEnsemble> {
    let floors = potentials.len();
    if floors == 0 {
        return Err(Error::InvalidEnsemble("at least one potential is required".into()));
    }
    if couplings.len() + 1 != floors {
        return Err(Error::InvalidEnsemble(format!(
            "{} couplings for {floors} floors, expected {}",
            couplings.len(),
            floors - 1
        )));
    }
    check_rank(n, &space)?;
    let f = basis(&space, n, Some(&potentials[0]));
    let phi = basis(&space, n, Some(&potentials[floors - 1]));
    let nodes = space.nodes();
    let links = couplings
        .iter()
        .enumerate()
        .map(|(l, c)| {
            let interior = l + 1 < floors - 1;
            CMatrix::from_fn(nodes.len(), nodes.len(), |i, j| {
                let (x, y) = (nodes[i], nodes[j]);
                let mut v = c * x * y;
                if interior {
                    v -= potentials[l + 1].eval(y);
                }
                C64::new(v.exp(), 0.0)
            })
        })
        .collect();
    ChainEnsemble::new(space, f, phi, links, options)
}

/// Non-intersecting Brownian paths from `start` at `t_0` to `end` at
/// `t_{M+1}`, observed at the `M` interior times.
pub fn build_karlin_mcgregor(spec: &KarlinMcGregorSpec, options: EnsembleOptions) -> Result<ChainEnsemble> {
    let times = &spec.times;
    if times.len() < 3 {
        return Err(Error::InvalidEnsemble(
            "need at least three times (start, one floor, end)".into(),
        ));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidEnsemble("times must be strictly increasing".into()));
    }
    let n = spec.start.len();
    if n == 0 || spec.end.len() != n {
        return Err(Error::InvalidEnsemble(format!(
            "{} start points and {} end points; need the same positive number",
            n,
            spec.end.len()
        )));
    }
    for pts in [&spec.start, &spec.end] {
        if pts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidEnsemble("start and end points must be strictly increasing".into()));
        }
    }
    let space = match &spec.space {
        Some(s) => DiscretizedSpace::from_spec(s)?,
        None => {
            let total = times[times.len() - 1] - times[0];
            let lo = spec.start[0].min(spec.end[0]) - 6.0 * total.sqrt();
            let hi = spec.start[n - 1].max(spec.end[n - 1]) + 6.0 * total.sqrt();
            let min_dt = times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let panels = spec
                .panels
                .unwrap_or_else(|| ((hi - lo) / (3.0 * min_dt.sqrt())).ceil().max(1.0) as usize);
            let bps: Vec<f64> = (0..=panels)
                .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
                .collect();
            DiscretizedSpace::composite_quadrature(&bps, spec.order)?
        }
    };
    check_rank(n, &space)?;
    let floors = times.len() - 2;
    let nodes = space.nodes().to_vec();
    let p = nodes.len();
    let dt = |l: usize| times[l + 1] - times[l];
    let f = CMatrix::from_fn(n, p, |i, x| C64::new(heat_kernel(dt(0), spec.start[i], nodes[x]), 0.0));
    let phi = CMatrix::from_fn(n, p, |j, y| C64::new(heat_kernel(dt(floors), nodes[y], spec.end[j]), 0.0));
    let links = (1..floors)
        .map(|l| CMatrix::from_fn(p, p, |i, j| C64::new(heat_kernel(dt(l), nodes[i], nodes[j]), 0.0)))
        .collect();
    ChainEnsemble::new(space, f, phi, links, options)
}

/// Seeded random instance on `nodes` points `0, 1, ..`: masses, `f`, `φ` and
/// every link drawn uniformly from [`RANDOM_ENTRY_RANGE`].
pub fn build_random(seed: u64, nodes: usize, n: usize, floors: usize) -> Result<ChainEnsemble> {
    build_random_with(seed, nodes, n, floors, EnsembleOptions::default())
}

pub fn build_random_with(
    seed: u64,
    nodes: usize,
    n: usize,
    floors: usize,
    options: EnsembleOptions,
) -> Result<ChainEnsemble> {
    if n == 0 || floors == 0 {
        return Err(Error::InvalidEnsemble("n and the number of floors must be positive".into()));
    }
    if nodes < n {
        return Err(Error::InvalidEnsemble(format!(
            "{nodes} nodes cannot carry {n} particles per floor"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = RANDOM_ENTRY_RANGE;
    let mut draw = move || C64::new(rng.random_range(lo..hi), 0.0);
    let points: Vec<f64> = (0..nodes).map(|i| i as f64).collect();
    let masses: Vec<f64> = (0..nodes).map(|_| draw().re).collect();
    let space = DiscretizedSpace::discrete(&points, &masses)?;
    let f = CMatrix::from_fn(n, nodes, |_, _| draw());
    let phi = CMatrix::from_fn(n, nodes, |_, _| draw());
    let links = (1..floors)
        .map(|_| CMatrix::from_fn(nodes, nodes, |_, _| draw()))
        .collect();
    ChainEnsemble::new(space, f, phi, links, options)
}
