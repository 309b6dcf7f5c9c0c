//! Brute-force references: full enumeration of the joint density on
//! exact-discrete spaces and low-dimensional direct quadrature for single
//! floor ensembles.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::ChainEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CompensatedSum, C64};
use crate::measure_space::{DiscretizedSpace, SpaceKind, Window, WindowFamily};

/// Sorted node indices of one floor.
pub type FloorSet = Vec<usize>;

/// Probability masses of every configuration, keyed by the sorted node
/// indices on each floor.
///
/// Ordered configurations are enumerated in full; the `(n!)^M` orderings
/// of a configuration are accumulated into one entry.
#[derive(Clone, Debug)]
pub struct EnumeratedDistribution {
    n: usize,
    floors: usize,
    weights: Vec<f64>,
    masses: BTreeMap<Vec<FloorSet>, C64>,
    z_enumerated: C64,
    z_closed: C64,
    total: C64,
}

fn digits(mut t: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for d in out.iter_mut().rev() {
        *d = t % base;
        t /= base;
    }
    out
}

fn has_repeat(tuple: &[usize]) -> bool {
    (0..tuple.len()).any(|i| tuple[i + 1..].contains(&tuple[i]))
}

fn tuple_det(n: usize, entry: impl Fn(usize, usize) -> C64) -> C64 {
    linalg::det(&CMatrix::from_fn(n, n, entry))
}

/// Enumerates all `P^{M n}` ordered configurations.
///
/// Masses are normalized by the enumerated partition function; the closed
/// form `(n!)^M det A` is kept alongside for comparison.
pub fn enumerate_density(ens: &ChainEnsemble) -> Result<EnumeratedDistribution> {
    if !matches!(ens.space().kind(), SpaceKind::Discrete) {
        return Err(Error::InvalidSpace("enumeration needs an exact-discrete space".into()));
    }
    let (n, floors, p) = (ens.particles(), ens.floors(), ens.nodes());
    let budget = ens.options().budget;
    let required = (p as u128).checked_pow((floors * n) as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let w = ens.space().weights();
    let tuples: Vec<Vec<usize>> = (0..p.pow(n as u32))
        .map(|t| digits(t, p, n))
        .filter(|t| !has_repeat(t))
        .collect();
    let mass = |t: &[usize]| t.iter().map(|x| w[*x]).product::<f64>();
    let (f, phi) = (ens.f(), ens.phi());
    // det f_i(x_j) carries the first floor's weights, each link the weights
    // of the floor it ends on.
    let first: Vec<C64> = tuples
        .iter()
        .map(|t| tuple_det(n, |i, j| f[(i, t[j])]) * mass(t))
        .collect();
    let last: Vec<C64> = tuples.iter().map(|t| tuple_det(n, |i, j| phi[(j, t[i])])).collect();
    let links: Vec<Vec<C64>> = ens
        .links()
        .iter()
        .map(|g| {
            tuples
                .iter()
                .flat_map(|a| tuples.iter().map(move |b| (a, b)))
                .map(|(a, b)| tuple_det(n, |i, j| g[(a[i], b[j])]) * mass(b))
                .collect()
        })
        .collect();
    let count = tuples.len();

    // One accumulator per first-floor tuple, merged in a fixed order.
    let partials: Vec<Vec<(Vec<usize>, C64)>> = (0..count)
        .into_par_iter()
        .map(|t0| {
            let mut out = Vec::new();
            let mut path = vec![t0];
            walk(&mut path, first[t0], floors, count, &links, &last, &mut out);
            out
        })
        .collect();
    let mut sums: BTreeMap<Vec<FloorSet>, CompensatedSum> = BTreeMap::new();
    let mut z = CompensatedSum::default();
    for (path, value) in partials.into_iter().flatten() {
        z.add(value);
        let key = path
            .iter()
            .map(|t| {
                let mut s = tuples[*t].clone();
                s.sort_unstable();
                s
            })
            .collect();
        sums.entry(key).or_default().add(value);
    }
    let z_enumerated = z.value();
    let masses: BTreeMap<Vec<FloorSet>, C64> = sums.into_iter().map(|(k, s)| (k, s.value() / z_enumerated)).collect();
    let mut total = CompensatedSum::default();
    for v in masses.values() {
        total.add(*v);
    }
    Ok(EnumeratedDistribution {
        n,
        floors,
        weights: w.to_vec(),
        masses,
        z_enumerated,
        z_closed: ens.partition_function(),
        total: total.value(),
    })
}

fn walk(
    path: &mut Vec<usize>,
    value: C64,
    floors: usize,
    count: usize,
    links: &[Vec<C64>],
    last: &[C64],
    out: &mut Vec<(Vec<usize>, C64)>,
) {
    let here = *path.last().unwrap();
    if path.len() == floors {
        out.push((path.clone(), value * last[here]));
        return;
    }
    let table = &links[path.len() - 1];
    for next in 0..count {
        let v = value * table[here * count + next];
        path.push(next);
        walk(path, v, floors, count, links, last, out);
        path.pop();
    }
}

impl EnumeratedDistribution {
    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn floors(&self) -> usize {
        self.floors
    }

    /// Partition function by raw summation over ordered configurations.
    pub fn z_enumerated(&self) -> C64 {
        self.z_enumerated
    }

    /// `(n!)^M det A`.
    pub fn z_closed(&self) -> C64 {
        self.z_closed
    }

    /// Sum of all normalized masses.
    pub fn total(&self) -> C64 {
        self.total
    }

    /// Configurations (sorted node sets per floor) with their masses.
    pub fn configurations(&self) -> impl Iterator<Item = (&Vec<FloorSet>, &C64)> {
        self.masses.iter()
    }

    /// Mass of the configuration with the given node sets (any order).
    pub fn mass(&self, config: &[Vec<usize>]) -> C64 {
        let key: Vec<FloorSet> = config
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            })
            .collect();
        self.masses.get(&key).copied().unwrap_or_default()
    }

    fn sum_where(&self, keep: impl Fn(&[FloorSet]) -> bool) -> C64 {
        let mut s = CompensatedSum::default();
        for (k, v) in &self.masses {
            if keep(k) {
                s.add(*v);
            }
        }
        s.value()
    }

    fn check_points(&self, points: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
        let mut per_floor = vec![Vec::new(); self.floors];
        for &(l, x) in points {
            if l >= self.floors || x >= self.weights.len() {
                return Err(Error::IndexOutOfRange(format!("point (floor {l}, node {x})")));
            }
            per_floor[l].push(x);
        }
        if let Some(l) = per_floor.iter().position(|v| v.len() > self.n) {
            return Err(Error::InvalidArgument(format!("more than {} points on floor {l}", self.n)));
        }
        Ok(per_floor)
    }

    /// Correlation function at `points` by summing masses of configurations
    /// that contain them, with falling-factorial multiplicities, divided by
    /// the node weights of the points.
    pub fn brute_correlation(&self, points: &[(usize, usize)]) -> Result<C64> {
        let per_floor = self.check_points(points)?;
        let mut s = CompensatedSum::default();
        for (config, v) in &self.masses {
            let mut mult = 1.0;
            for (set, wanted) in config.iter().zip(&per_floor) {
                let mut seen: Vec<usize> = Vec::new();
                for x in wanted {
                    if seen.contains(x) {
                        continue;
                    }
                    let need = wanted.iter().filter(|y| *y == x).count();
                    let have = set.iter().filter(|y| *y == x).count();
                    mult *= (0..need).map(|i| have.saturating_sub(i) as f64).product::<f64>();
                    seen.push(*x);
                }
            }
            if mult != 0.0 {
                s.add(*v * mult);
            }
        }
        let w: f64 = points.iter().map(|(_, x)| self.weights[*x]).product();
        Ok(s.value() / w)
    }

    /// Janossy density: mass of configurations whose floor-`l` particles in
    /// `I_l` are exactly the given points, divided by their node weights.
    pub fn brute_janossy(&self, wf: &WindowFamily, points: &[(usize, usize)]) -> Result<C64> {
        self.check_family(wf)?;
        let per_floor = self.check_points(points)?;
        for &(l, x) in points {
            if !wf.window(l).contains(x) {
                return Err(Error::PointOutsideWindow { floor: l, node: x });
            }
        }
        let wanted: Vec<Vec<usize>> = per_floor
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                v
            })
            .collect();
        let m = self.sum_where(|config| {
            config.iter().zip(&wanted).enumerate().all(|(l, (set, want))| {
                let inside: Vec<usize> = set.iter().copied().filter(|x| wf.window(l).contains(*x)).collect();
                &inside == want
            })
        });
        let w: f64 = points.iter().map(|(_, x)| self.weights[*x]).product();
        Ok(m / w)
    }

    /// Probability of exactly `counts[l]` floor-`l` particles in `I_l`.
    pub fn brute_count_probability(&self, wf: &WindowFamily, counts: &[usize]) -> Result<C64> {
        self.check_family(wf)?;
        if counts.len() != self.floors {
            return Err(Error::InvalidArgument(format!("{} counts for {} floors", counts.len(), self.floors)));
        }
        Ok(self.sum_where(|config| {
            config
                .iter()
                .zip(counts)
                .enumerate()
                .all(|(l, (set, k))| set.iter().filter(|x| wf.window(l).contains(**x)).count() == *k)
        }))
    }

    fn check_family(&self, wf: &WindowFamily) -> Result<()> {
        if wf.floors() != self.floors || wf.windows().iter().any(|w| w.len() != self.weights.len()) {
            return Err(Error::InvalidWindow(format!(
                "window family {} does not fit {} floors x {} nodes",
                wf.describe(),
                self.floors,
                self.weights.len()
            )));
        }
        Ok(())
    }
}

/// `Pr(#[s, ∞) = k)` for a single-floor ensemble by direct `n`-fold
/// summation of the joint density over the ensemble's nodes.
pub fn quad_oracle_m1(ens: &ChainEnsemble, s: f64, k: usize) -> Result<f64> {
    if ens.floors() != 1 {
        return Err(Error::InvalidArgument("direct quadrature needs a single floor".into()));
    }
    let n = ens.particles();
    if n > 3 {
        return Err(Error::InvalidArgument(format!("direct quadrature supports n <= 3, got {n}")));
    }
    if k > n {
        return Ok(0.0);
    }
    let p = ens.nodes();
    let budget = ens.options().budget.max(1 << 24);
    let required = (p as u128).pow(n as u32);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let above = Window::at_or_above(ens.space(), s);
    let w = ens.space().weights();
    let (f, phi) = (ens.f(), ens.phi());
    let (all, hit) = (0..p.pow(n as u32))
        .into_par_iter()
        .with_min_len(256)
        .map(|t| {
            let x = digits(t, p, n);
            if has_repeat(&x) {
                return (0.0, 0.0);
            }
            let v = (tuple_det(n, |i, j| f[(i, x[j])]) * tuple_det(n, |i, j| phi[(i, x[j])])).re
                * x.iter().map(|y| w[*y]).product::<f64>();
            let inside = x.iter().filter(|y| above.contains(**y)).count();
            (v, if inside == k { v } else { 0.0 })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(hit / all)
}

/// `(1/n!) Σ_{x_1..x_n} det ψ_i(x_j) det χ_i(x_j) Π w(x_j)` by direct
/// summation over ordered node tuples.
pub fn heine_lhs(space: &DiscretizedSpace, psi: &CMatrix, chi: &CMatrix, budget: u64) -> Result<C64> {
    let n = psi.nrows();
    let p = space.len();
    if chi.nrows() != n || psi.ncols() != p || chi.ncols() != p {
        return Err(Error::InvalidArgument("function samples do not match the space".into()));
    }
    let required = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let w = space.weights();
    let mut s = CompensatedSum::default();
    for t in 0..p.pow(n as u32) {
        let x = digits(t, p, n);
        if has_repeat(&x) {
            continue;
        }
        let m: f64 = x.iter().map(|y| w[*y]).product();
        s.add(tuple_det(n, |i, j| psi[(i, x[j])]) * tuple_det(n, |i, j| chi[(i, x[j])]) * m);
    }
    Ok(s.value() / linalg::factorial(n))
}

/// One oracle/closed-form comparison.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRecord {
    pub seed: u64,
    pub instance: String,
    pub quantity: String,
    pub oracle: [f64; 2],
    pub closed_form: [f64; 2],
    pub abs_err: f64,
    pub rel_err: f64,
}

impl OracleRecord {
    pub fn new(seed: u64, instance: impl Into<String>, quantity: impl Into<String>, oracle: C64, closed_form: C64) -> Self {
        let abs_err = (oracle - closed_form).norm();
        let scale = oracle.norm().max(closed_form.norm());
        Self {
            seed,
            instance: instance.into(),
            quantity: quantity.into(),
            oracle: [oracle.re, oracle.im],
            closed_form: [closed_form.re, closed_form.im],
            abs_err,
            rel_err: if scale > 0.0 { abs_err / scale } else { 0.0 },
        }
    }
}
