//! Janossy kernels in closed form, Janossy densities, counting
//! probabilities and distributions of the k-th largest particle.
//!
//! The closed-form kernel is the correlation kernel of the same chain with
//! every floor's integrations restricted to the complement of its window:
//!
//! ```text
//! L(l,x; m,y) = -gᶜ_{l,m}(x,y) + Σ_ij (gᶜ_{l,M-1} *c φ_i)(x) · ((Aᶜ)⁻¹)_ij · (f_j *c gᶜ_{0,m})(y)
//! ```
//!
//! It is materialized on all nodes; only its values on window nodes are
//! Janossy-kernel values.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{ChainEnsemble, FloorMeasure, GramKind, GramMatrix, GramVariant};
use crate::error::{Error, Result};
use crate::kernels::{assemble_blocks, correlation_kernel, BlockKernel, KernelKind};
use crate::linalg::{self, CMatrix, C64};
use crate::measure_space::{Window, WindowFamily};

/// Complement Gram matrices better conditioned than this are used as given
/// by [`count_probability`]; otherwise the per-floor orientation with the
/// best-conditioned complement Gram matrix is chosen.
pub const ORIENTATION_SWITCH_CONDITION: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct JanossyKernel<'e> {
    kernel: BlockKernel<'e>,
    windows: WindowFamily,
    constant: C64,
    complement_gram: GramMatrix,
    complement_condition: f64,
}

/// Closed-form Janossy kernel for the window family `wf`.
///
/// The normalization `const(I) = det(Id - K_I)` is evaluated as
/// `det(Aᶜ) / det(A)`, which keeps its relative accuracy when it is tiny.
pub fn janossy_kernel_explicit<'e>(ens: &'e ChainEnsemble, wf: &WindowFamily) -> Result<JanossyKernel<'e>> {
    ens.check_family(wf)?;
    let measure = FloorMeasure::for_variant(ens.space(), ens.floors(), GramVariant::Complement(wf));
    let what = format!("complement Gram matrix A^c for windows {}", wf.describe());
    let assembled = assemble_blocks(ens, &measure, &what)?;
    let constant = assembled.work_det / ens.work_gram_det();
    let cond = assembled.condition;
    Ok(JanossyKernel {
        kernel: BlockKernel::from_blocks(ens, assembled.blocks, KernelKind::JanossyExplicit, Some(cond)),
        windows: wf.clone(),
        constant,
        complement_gram: GramMatrix {
            entries: assembled.gram,
            kind: GramKind::Complement,
            windows: Some(wf.clone()),
        },
        complement_condition: cond,
    })
}

impl<'e> JanossyKernel<'e> {
    pub fn kernel(&self) -> &BlockKernel<'e> {
        &self.kernel
    }

    pub fn windows(&self) -> &WindowFamily {
        &self.windows
    }

    /// `const(I)`: probability that every window is empty of its floor's particles.
    pub fn constant(&self) -> C64 {
        self.constant
    }

    pub fn complement_gram(&self) -> &GramMatrix {
        &self.complement_gram
    }

    pub fn complement_condition(&self) -> f64 {
        self.complement_condition
    }

    pub fn value(&self, l: usize, x: usize, m: usize, y: usize) -> C64 {
        self.kernel.value(l, x, m, y)
    }

    fn check_points(&self, points: &[(usize, usize)]) -> Result<()> {
        let floors = self.kernel.floors();
        let n = self.kernel.ensemble().particles();
        let mut per_floor = vec![0usize; floors];
        for &(l, x) in points {
            if l >= floors || x >= self.kernel.nodes() {
                return Err(Error::IndexOutOfRange(format!("point (floor {l}, node {x})")));
            }
            if !self.windows.window(l).contains(x) {
                return Err(Error::PointOutsideWindow { floor: l, node: x });
            }
            per_floor[l] += 1;
        }
        if let Some(l) = per_floor.iter().position(|k| *k > n) {
            return Err(Error::InvalidArgument(format!(
                "{} points on floor {l}, but only {n} particles per floor",
                per_floor[l]
            )));
        }
        Ok(())
    }

    /// Janossy density `const(I) · det(L(p_i; p_j))`; every point must lie
    /// in the window of its floor.
    pub fn janossy_density(&self, points: &[(usize, usize)]) -> Result<C64> {
        self.check_points(points)?;
        Ok(self.constant * self.kernel.point_determinant(points)?)
    }

    /// Probability of exactly `counts[l]` floor-`l` particles in `I_l`,
    /// summing Janossy densities over node subsets of the windows.
    ///
    /// Node multisets with a repeated node have a zero determinant, so only
    /// subsets contribute and each unordered subset stands for `k_l!`
    /// ordered tuples.
    pub fn count_probability(&self, counts: &[usize]) -> Result<C64> {
        let ens = self.kernel.ensemble();
        check_counts(ens, counts)?;
        let weights = ens.space().weights();
        let windows: Vec<Vec<usize>> = self.windows.windows().iter().map(Window::indices).collect();
        let required: u128 = windows
            .iter()
            .zip(counts)
            .map(|(w, k)| binomial(w.len(), *k))
            .product();
        if required > ens.options().budget as u128 {
            return Err(Error::BudgetExceeded {
                required,
                budget: ens.options().budget,
            });
        }
        if required == 0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let per_floor: Vec<Vec<Vec<(usize, usize)>>> = windows
            .iter()
            .zip(counts)
            .enumerate()
            .map(|(l, (w, k))| {
                w.iter()
                    .copied()
                    .combinations(*k)
                    .map(|c| c.into_iter().map(|x| (l, x)).collect())
                    .collect()
            })
            .collect();
        let mut sum = linalg::CompensatedSum::default();
        for choice in per_floor.iter().map(|v| v.iter()).multi_cartesian_product() {
            let points: Vec<(usize, usize)> = choice.into_iter().flatten().copied().collect();
            let mass: f64 = points.iter().map(|(_, x)| weights[*x]).product();
            sum.add(self.kernel.point_determinant(&points)? * mass);
        }
        Ok(self.constant * sum.value())
    }
}

fn check_counts(ens: &ChainEnsemble, counts: &[usize]) -> Result<()> {
    if counts.len() != ens.floors() {
        return Err(Error::InvalidArgument(format!(
            "{} counts for {} floors",
            counts.len(),
            ens.floors()
        )));
    }
    if let Some(k) = counts.iter().find(|k| **k > ens.particles()) {
        return Err(Error::InvalidArgument(format!(
            "count {k} exceeds the {} particles per floor",
            ens.particles()
        )));
    }
    Ok(())
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Janossy density for `wf` at `points` (closed-form kernel).
pub fn janossy_density(ens: &ChainEnsemble, wf: &WindowFamily, points: &[(usize, usize)]) -> Result<C64> {
    janossy_kernel_explicit(ens, wf)?.janossy_density(points)
}

/// Picks, per floor, whether to count particles in `I_l` or in its
/// complement (exactly `k` inside is exactly `n - k` outside), preferring
/// the given orientation while its complement Gram matrix is well
/// conditioned.
fn oriented_family(ens: &ChainEnsemble, wf: &WindowFamily) -> Result<Vec<bool>> {
    let floors = ens.floors();
    let cond_of = |flip: &[bool]| {
        let family = wf.flip_floors(flip);
        let measure = FloorMeasure::for_variant(ens.space(), floors, GramVariant::Complement(&family));
        linalg::condition_number(&ens.gram_with(&measure))
    };
    let direct = vec![false; floors];
    let direct_cond = cond_of(&direct);
    if direct_cond <= ORIENTATION_SWITCH_CONDITION || floors > 16 {
        return Ok(direct);
    }
    let mut best = (direct_cond, direct);
    for bits in 1u32..(1u32 << floors) {
        let flip: Vec<bool> = (0..floors).map(|l| bits >> l & 1 == 1).collect();
        let c = cond_of(&flip);
        if c < best.0 {
            best = (c, flip);
        }
    }
    Ok(best.1)
}

/// Probability of exactly `counts[l]` particles of floor `l` in `I_l`, for
/// all floors simultaneously (real part).
pub fn count_probability(ens: &ChainEnsemble, wf: &WindowFamily, counts: &[usize]) -> Result<f64> {
    Ok(count_probability_complex(ens, wf, counts)?.re)
}

pub fn count_probability_complex(ens: &ChainEnsemble, wf: &WindowFamily, counts: &[usize]) -> Result<C64> {
    ens.check_family(wf)?;
    check_counts(ens, counts)?;
    let flip = oriented_family(ens, wf)?;
    let family = wf.flip_floors(&flip);
    let n = ens.particles();
    let oriented: Vec<usize> = counts
        .iter()
        .zip(&flip)
        .map(|(k, f)| if *f { n - k } else { *k })
        .collect();
    janossy_kernel_explicit(ens, &family)?.count_probability(&oriented)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremeRow {
    pub s: f64,
    /// `Pr(#[s, ∞) = j)` for `j = 0..=k`.
    pub counts: Vec<f64>,
    /// `Pr(λ_k ≥ s)`.
    pub kth_at_least: f64,
    /// `Pr(λ_k < s)`.
    pub kth_cdf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremeCurve {
    pub floor: usize,
    pub k: usize,
    pub rows: Vec<ExtremeRow>,
}

impl ExtremeCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("schema:jk-csv-1,s");
        for j in 0..=self.k {
            out.push_str(&format!(",p_count_{j}"));
        }
        out.push_str(",p_kth_at_least,cdf_kth\n");
        for r in &self.rows {
            out.push_str(&format!("jk-csv-1,{:e}", r.s));
            for p in &r.counts {
                out.push_str(&format!(",{p:e}"));
            }
            out.push_str(&format!(",{:e},{:e}\n", r.kth_at_least, r.kth_cdf));
        }
        out
    }
}

/// Distribution of the `k`-th largest particle (`k = 1` is the largest) of
/// floor `floor` on the grid `s_grid`, from counting probabilities of the
/// half-lines `[s, ∞)`.
pub fn kth_extreme_distribution(
    ens: &ChainEnsemble,
    floor: usize,
    k: usize,
    s_grid: &[f64],
) -> Result<ExtremeCurve> {
    if floor >= ens.floors() {
        return Err(Error::IndexOutOfRange(format!("floor {floor}")));
    }
    if k == 0 || k > ens.particles() {
        return Err(Error::InvalidArgument(format!(
            "rank k = {k} must lie in 1..={}",
            ens.particles()
        )));
    }
    let marginal = ens.marginal(&[floor])?;
    let rows = s_grid
        .par_iter()
        .map(|&s| {
            let wf = WindowFamily::new(marginal.space(), vec![Window::at_or_above(marginal.space(), s)])?;
            let counts = (0..=k)
                .map(|j| count_probability(&marginal, &wf, &[j]))
                .collect::<Result<Vec<f64>>>()?;
            let below: f64 = counts[..k].iter().sum();
            Ok(ExtremeRow {
                s,
                counts,
                kth_at_least: 1.0 - below,
                kth_cdf: below,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtremeCurve { floor, k, rows })
}

/// Single-floor construction: biorthogonalize `{f_i}` and `{φ_i}` with
/// respect to the measure restricted to the complement of `window`, form
/// `Σ_i φ̃_i(x) f̃_i(y)` and extend it to all nodes.
///
/// The kernel is oriented like the correlation kernel (φ side in the first
/// argument), the transpose of `Σ f̃_i(x) φ̃_i(y)`; determinants agree.
pub fn biorthogonal_janossy_recipe<'e>(ens: &'e ChainEnsemble, window: &Window) -> Result<JanossyKernel<'e>> {
    if ens.floors() != 1 {
        return Err(Error::InvalidArgument(format!(
            "the biorthogonal construction needs a single floor, got {}",
            ens.floors()
        )));
    }
    let wf = WindowFamily::new(ens.space(), vec![window.clone()])?;
    let restricted = window.complement().restrict_weights(ens.space().weights());
    let gram = crate::ensemble::scale_columns(ens.f(), &restricted) * ens.phi().transpose();
    let cond = linalg::condition_number(&gram);
    if !(cond <= ens.options().max_condition) {
        return Err(Error::singular("Gram matrix on the complement of the window", cond));
    }
    // P G = L U  =>  f̃ = L⁻¹ P f, φ̃ = U⁻ᵀ φ are biorthonormal on the complement.
    let lu = gram.clone().lu();
    let mut pf: CMatrix = ens.f().clone();
    lu.p().permute_rows(&mut pf);
    let singular = || Error::singular("Gram matrix on the complement of the window", f64::INFINITY);
    let f_tilde = lu.l().solve_lower_triangular(&pf).ok_or_else(singular)?;
    let phi_tilde = lu.u().transpose().solve_lower_triangular(ens.phi()).ok_or_else(singular)?;
    let block = phi_tilde.transpose() * f_tilde;
    let constant = correlation_kernel(ens)?.restrict(&wf)?.fredholm_det();
    Ok(JanossyKernel {
        kernel: BlockKernel::from_blocks(ens, vec![block], KernelKind::JanossyExplicit, Some(cond)),
        windows: wf.clone(),
        constant,
        complement_gram: GramMatrix {
            entries: gram,
            kind: GramKind::Complement,
            windows: Some(wf),
        },
        complement_condition: cond,
    })
}

/// `det(Id - K_I)` of the correlation kernel: probability that every
/// window is empty.
pub fn gap_probability(ens: &ChainEnsemble, wf: &WindowFamily) -> Result<C64> {
    Ok(correlation_kernel(ens)?.restrict(wf)?.fredholm_det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleOptions;
    use crate::measure_space::DiscretizedSpace;
    use crate::models::{build_random, build_unitary, Potential};

    fn family(ens: &ChainEnsemble, masks: &[&[bool]]) -> WindowFamily {
        let ws = masks
            .iter()
            .map(|m| Window::from_mask(ens.space(), m.to_vec()).unwrap())
            .collect();
        WindowFamily::new(ens.space(), ws).unwrap()
    }

    #[test]
    fn empty_windows_give_the_correlation_kernel() {
        let ens = build_random(5, 4, 2, 3).unwrap();
        let k = correlation_kernel(&ens).unwrap();
        let jk = janossy_kernel_explicit(&ens, &WindowFamily::empty(ens.space(), 3)).unwrap();
        for l in 0..3 {
            for m in 0..3 {
                assert_eq!(jk.kernel().block(l, m), k.block(l, m));
            }
        }
        assert!((jk.constant() - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn full_windows_are_singular() {
        let ens = build_random(5, 4, 2, 2).unwrap();
        let err = janossy_kernel_explicit(&ens, &WindowFamily::full(ens.space(), 2)).unwrap_err();
        match err {
            Error::Singular { matrix, .. } => assert!(matrix.contains("A^c") && matrix.contains("I_0")),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn single_particle_two_nodes() {
        let space = DiscretizedSpace::discrete(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        let ens =
            ChainEnsemble::from_real(space, &[vec![1.0, 1.0]], &[vec![1.0, 1.0]], &[], EnsembleOptions::default())
                .unwrap();
        let wf = family(&ens, &[&[true, false]]);
        let jk = janossy_kernel_explicit(&ens, &wf).unwrap();
        let j = jk.janossy_density(&[(0, 0)]).unwrap();
        assert!((j - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((jk.janossy_density(&[]).unwrap() - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(matches!(
            jk.janossy_density(&[(0, 1)]).unwrap_err(),
            Error::PointOutsideWindow { floor: 0, node: 1 }
        ));
    }

    #[test]
    fn constant_matches_fredholm_determinant() {
        let ens = build_random(31, 5, 2, 3).unwrap();
        let wf = family(
            &ens,
            &[&[true, false, false, true, false], &[false; 5], &[false, true, true, false, false]],
        );
        let jk = janossy_kernel_explicit(&ens, &wf).unwrap();
        let fd = gap_probability(&ens, &wf).unwrap();
        assert!((jk.constant() - fd).norm() < 1e-10);
        assert!((jk.count_probability(&[0, 0, 0]).unwrap() - fd).norm() < 1e-10);
    }

    #[test]
    fn counting_probabilities_sum_to_one() {
        let ens = build_random(77, 5, 2, 2).unwrap();
        let wf = family(&ens, &[&[true, true, false, false, true], &[false, true, false, true, true]]);
        let mut total = 0.0;
        for a in 0..=2 {
            for b in 0..=2 {
                total += count_probability(&ens, &wf, &[a, b]).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
        assert!(count_probability(&ens, &wf, &[3, 0]).is_err());
        assert!(count_probability(&ens, &wf, &[0]).is_err());
    }

    #[test]
    fn counting_survives_windows_covering_a_floor() {
        let ens = build_random(78, 4, 2, 2).unwrap();
        let wf = family(&ens, &[&[true; 4], &[false, true, false, false]]);
        assert_eq!(count_probability(&ens, &wf, &[1, 0]).unwrap(), 0.0);
        let both: f64 = (0..=2).map(|b| count_probability(&ens, &wf, &[2, b]).unwrap()).sum();
        assert!((both - 1.0).abs() < 1e-10);
    }

    #[test]
    fn counting_budget_is_enforced() {
        let ens = build_random_with_budget(10);
        let wf = WindowFamily::new(ens.space(), vec![Window::from_mask(ens.space(), vec![true, true, true, true, true, true, false, false]).unwrap()]).unwrap();
        let jk = janossy_kernel_explicit(&ens, &wf).unwrap();
        assert!(matches!(jk.count_probability(&[2]).unwrap_err(), Error::BudgetExceeded { .. }));
    }

    fn build_random_with_budget(budget: u64) -> ChainEnsemble {
        crate::models::build_random_with(3, 8, 2, 1, EnsembleOptions { budget, ..Default::default() }).unwrap()
    }

    #[test]
    fn extremes_at_the_ends_of_the_grid() {
        let ens = build_random(12, 5, 2, 2).unwrap();
        let curve = kth_extreme_distribution(&ens, 1, 2, &[-1.0, 10.0]).unwrap();
        assert!((curve.rows[0].kth_at_least - 1.0).abs() < 1e-12);
        assert!(curve.rows[1].kth_at_least.abs() < 1e-12);
        assert!(kth_extreme_distribution(&ens, 1, 3, &[0.0]).is_err());
        assert!(kth_extreme_distribution(&ens, 1, 0, &[0.0]).is_err());
        let csv = curve.to_csv();
        assert!(csv.starts_with("schema:jk-csv-1,s,p_count_0,p_count_1,p_count_2,p_kth_at_least,cdf_kth\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn extremes_are_monotone_and_telescope() {
        // Ordered nodes and e^{cxy} links make every density factor positive.
        let space = DiscretizedSpace::discrete(&[-1.0, -0.5, 0.0, 0.5, 1.0, 1.5], &[1.0; 6]).unwrap();
        let ens = crate::models::build_coupled_chain(
            2,
            &[Potential::quadratic(1.0), Potential::quadratic(0.5), Potential::quadratic(1.0)],
            &[0.8, 0.6],
            space,
            EnsembleOptions::default(),
        )
        .unwrap();
        let grid: Vec<f64> = (0..10).map(|i| -1.5 + 0.375 * i as f64).collect();
        let c1 = kth_extreme_distribution(&ens, 2, 1, &grid).unwrap();
        let c2 = kth_extreme_distribution(&ens, 2, 2, &grid).unwrap();
        for w in c1.rows.windows(2) {
            assert!(w[1].kth_at_least <= w[0].kth_at_least + 1e-12);
        }
        for (a, b) in c1.rows.iter().zip(&c2.rows) {
            // Pr(λ1≥s) - Pr(λ2≥s) + Pr(λ2≥s) - 0 + Pr(# = 0) = 1
            let total = (a.kth_at_least - b.kth_at_least) + b.kth_at_least + b.counts[0];
            assert!((total - 1.0).abs() < 1e-9);
            assert!(a.kth_at_least > -1e-9 && a.kth_at_least < 1.0 + 1e-9);
        }
    }

    #[test]
    fn recipe_matches_explicit_kernel() {
        let ens = build_random(23, 6, 2, 1).unwrap();
        let w = Window::from_mask(ens.space(), vec![false, true, true, false, false, true]).unwrap();
        let recipe = biorthogonal_janossy_recipe(&ens, &w).unwrap();
        let wf = WindowFamily::new(ens.space(), vec![w]).unwrap();
        let explicit = janossy_kernel_explicit(&ens, &wf).unwrap();
        let diff = (recipe.kernel().block(0, 0) - explicit.kernel().block(0, 0)).map(|z| z.norm()).max();
        assert!(diff < 1e-10);
        assert!((recipe.constant() - explicit.constant()).norm() < 1e-10);
    }

    #[test]
    fn recipe_with_empty_window_is_the_correlation_kernel() {
        let ens = build_random(24, 5, 3, 1).unwrap();
        let recipe = biorthogonal_janossy_recipe(&ens, &Window::empty(ens.space())).unwrap();
        let k = correlation_kernel(&ens).unwrap();
        assert!((recipe.kernel().block(0, 0) - k.block(0, 0)).map(|z| z.norm()).max() < 1e-12);
        let multi = build_random(24, 5, 1, 2).unwrap();
        assert!(biorthogonal_janossy_recipe(&multi, &Window::empty(multi.space())).is_err());
    }

    #[test]
    fn recipe_is_the_christoffel_darboux_kernel() {
        let space = DiscretizedSpace::quadrature(-7.0, 7.0, 70).unwrap();
        let v = Potential::quadratic(1.0);
        let n = 4;
        let ens = build_unitary(&v, n, space.clone(), EnsembleOptions::default()).unwrap();
        let window = Window::at_or_above(&space, 0.7);
        let recipe = biorthogonal_janossy_recipe(&ens, &window).unwrap();

        // Orthonormal polynomials for e^{-V} restricted to the complement, by
        // the Stieltjes three-term recurrence on the nodes.
        let nodes = space.nodes();
        let mu: Vec<f64> = nodes
            .iter()
            .zip(window.complement().restrict_weights(space.weights()))
            .map(|(x, w)| w * (-v.eval(*x)).exp())
            .collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&mu).map(|((x, y), m)| x * y * m).sum::<f64>();
        let mut polys: Vec<Vec<f64>> = Vec::new();
        let mut prev = vec![0.0; nodes.len()];
        let mut cur = vec![1.0; nodes.len()];
        let norm = dot(&cur, &cur).sqrt();
        cur.iter_mut().for_each(|c| *c /= norm);
        let mut beta = 0.0;
        for _ in 0..n {
            polys.push(cur.clone());
            let xc: Vec<f64> = cur.iter().zip(nodes).map(|(c, x)| c * x).collect();
            let alpha = dot(&xc, &cur);
            let mut next: Vec<f64> = (0..nodes.len()).map(|i| xc[i] - alpha * cur[i] - beta * prev[i]).collect();
            beta = dot(&next, &next).sqrt();
            next.iter_mut().for_each(|c| *c /= beta);
            prev = std::mem::replace(&mut cur, next);
        }
        for x in (0..nodes.len()).step_by(5) {
            for y in (0..nodes.len()).step_by(3) {
                let cd: f64 = polys.iter().map(|p| p[x] * p[y]).sum::<f64>()
                    * (-0.5 * v.eval(nodes[x])).exp()
                    * (-0.5 * v.eval(nodes[y])).exp();
                assert!((recipe.value(0, x, 0, y).re - cd).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(64, 0), 1);
    }
}
