//! Multi-floor ensembles
//!
//! ```text
//! p(x) ∝ det f_i(x¹_j) · Π_l det g_{l,l+1}(xˡ_i, xˡ⁺¹_j) · det φ_j(xᴹ_i)
//! ```
//!
//! sampled on a [`DiscretizedSpace`], together with the chain convolutions
//! `g_{l,m}` and the Gram matrices of full-chain pairings.
//!
//! Floors are indexed from 0. A sampled function is a row of an `n × P`
//! matrix (P = number of nodes); a sampled kernel is a `P × P` matrix. Node
//! weights are never folded into samples; they are inserted at every
//! integration instead.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, factorial, CMatrix, C64};
use crate::measure_space::{DiscretizedSpace, Window, WindowFamily};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleOptions {
    /// Gram matrices with a larger 2-norm condition number are rejected.
    pub max_condition: f64,
    /// Upper bound on brute-force evaluations (configurations, subsets).
    pub budget: u64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            max_condition: 1e12,
            budget: 1_000_000,
        }
    }
}

/// Which integration domain each floor uses when pairing along the chain.
#[derive(Clone, Copy, Debug)]
pub enum GramVariant<'a> {
    /// Every floor integrates over all of `X`.
    Full,
    /// Floor `l` integrates over the complement of `I_l`.
    Complement(&'a WindowFamily),
    /// Floor `l` integrates over `I_l`.
    Window(&'a WindowFamily),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramKind {
    Full,
    Complement,
    Window,
}

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub entries: CMatrix,
    pub kind: GramKind,
    pub windows: Option<WindowFamily>,
}

impl GramMatrix {
    pub fn det(&self) -> C64 {
        linalg::det(&self.entries)
    }

    pub fn condition(&self) -> f64 {
        linalg::condition_number(&self.entries)
    }
}

/// Per-floor integration weights (node weights times an optional mask).
#[derive(Clone, Debug)]
pub(crate) struct FloorMeasure {
    pub(crate) weights: Vec<Vec<f64>>,
    full: bool,
}

impl FloorMeasure {
    pub(crate) fn full(space: &DiscretizedSpace, floors: usize) -> Self {
        Self {
            weights: vec![space.weights().to_vec(); floors],
            full: true,
        }
    }

    pub(crate) fn for_variant(space: &DiscretizedSpace, floors: usize, variant: GramVariant) -> Self {
        match variant {
            GramVariant::Full => Self::full(space, floors),
            GramVariant::Complement(wf) => Self {
                weights: wf
                    .windows()
                    .iter()
                    .map(|w| w.complement().restrict_weights(space.weights()))
                    .collect(),
                full: false,
            },
            GramVariant::Window(wf) => Self {
                weights: wf
                    .windows()
                    .iter()
                    .map(|w| w.restrict_weights(space.weights()))
                    .collect(),
                full: false,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainEnsemble {
    space: DiscretizedSpace,
    n: usize,
    floors: usize,
    f: CMatrix,
    phi: CMatrix,
    links: Vec<CMatrix>,
    /// `g_{l,m}` for `l < m`, stored at `l * floors + m`.
    chains: Vec<Option<CMatrix>>,
    gram: CMatrix,
    gram_condition: f64,
    /// Orthonormal rows spanning the same spaces as `f` and `phi`; kernels
    /// depend only on these spans and are assembled in this basis.
    f_work: CMatrix,
    phi_work: CMatrix,
    work_gram_det: C64,
    options: EnsembleOptions,
}

/// Which function rows a pairing is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Basis {
    Given,
    Orthonormal,
}

fn orthonormal_rows(m: &CMatrix) -> CMatrix {
    m.transpose().qr().q().transpose()
}

impl ChainEnsemble {
    /// Builds an ensemble from sampled data.
    ///
    /// `f` and `phi` are `n × P` (one function per row), `links[l]` samples
    /// `g_{l,l+1}` as a `P × P` matrix; the number of floors is
    /// `links.len() + 1`.
    pub fn new(
        space: DiscretizedSpace,
        f: CMatrix,
        phi: CMatrix,
        links: Vec<CMatrix>,
        options: EnsembleOptions,
    ) -> Result<Self> {
        let p = space.len();
        let n = f.nrows();
        if n == 0 {
            return Err(Error::InvalidEnsemble("at least one particle per floor is required".into()));
        }
        if phi.nrows() != n {
            return Err(Error::InvalidEnsemble(format!(
                "{} functions f but {} functions phi",
                n,
                phi.nrows()
            )));
        }
        if f.ncols() != p || phi.ncols() != p {
            return Err(Error::InvalidEnsemble(format!(
                "functions must be sampled on all {p} nodes"
            )));
        }
        if let Some((l, g)) = links
            .iter()
            .enumerate()
            .find(|(_, g)| g.nrows() != p || g.ncols() != p)
        {
            return Err(Error::InvalidEnsemble(format!(
                "link {l} is {}x{}, expected {p}x{p}",
                g.nrows(),
                g.ncols()
            )));
        }
        if !(options.max_condition > 0.0) {
            return Err(Error::InvalidArgument("condition threshold must be positive".into()));
        }
        let floors = links.len() + 1;
        let (f_work, phi_work) = (orthonormal_rows(&f), orthonormal_rows(&phi));
        let mut ens = Self {
            space,
            n,
            floors,
            f,
            phi,
            links,
            chains: Vec::new(),
            gram: CMatrix::zeros(n, n),
            gram_condition: f64::INFINITY,
            f_work,
            phi_work,
            work_gram_det: C64::new(0.0, 0.0),
            options,
        };
        ens.build_chain_cache();
        let full = FloorMeasure::full(&ens.space, floors);
        ens.gram = ens.gram_with(&full);
        ens.gram_condition = linalg::condition_number(&ens.gram);
        if !(ens.gram_condition <= options.max_condition) {
            return Err(Error::singular("Gram matrix A", ens.gram_condition));
        }
        ens.work_gram_det = linalg::det(&ens.gram_in(&full, Basis::Orthonormal));
        Ok(ens)
    }

    /// Convenience constructor from real samples.
    pub fn from_real(
        space: DiscretizedSpace,
        f: &[Vec<f64>],
        phi: &[Vec<f64>],
        links: &[Vec<Vec<f64>>],
        options: EnsembleOptions,
    ) -> Result<Self> {
        let rows = |v: &[Vec<f64>]| -> Result<CMatrix> {
            let ncols = v.first().map_or(0, Vec::len);
            if v.iter().any(|r| r.len() != ncols) {
                return Err(Error::InvalidEnsemble("ragged sample rows".into()));
            }
            Ok(CMatrix::from_fn(v.len(), ncols, |i, j| C64::new(v[i][j], 0.0)))
        };
        let links = links.iter().map(|g| rows(g)).collect::<Result<Vec<_>>>()?;
        Self::new(space, rows(f)?, rows(phi)?, links, options)
    }

    fn build_chain_cache(&mut self) {
        let m = self.floors;
        let w = self.space.weights().to_vec();
        let mut chains = vec![None; m * m];
        for l in 0..m.saturating_sub(1) {
            let mut acc = self.links[l].clone();
            chains[l * m + l + 1] = Some(acc.clone());
            for k in l + 2..m {
                acc = scale_columns(&acc, &w) * &self.links[k - 1];
                chains[l * m + k] = Some(acc.clone());
            }
        }
        self.chains = chains;
    }

    pub fn space(&self) -> &DiscretizedSpace {
        &self.space
    }

    /// Particles per floor.
    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn floors(&self) -> usize {
        self.floors
    }

    pub fn nodes(&self) -> usize {
        self.space.len()
    }

    pub fn f(&self) -> &CMatrix {
        &self.f
    }

    pub fn phi(&self) -> &CMatrix {
        &self.phi
    }

    pub fn links(&self) -> &[CMatrix] {
        &self.links
    }

    pub fn options(&self) -> EnsembleOptions {
        self.options
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn gram_condition(&self) -> f64 {
        self.gram_condition
    }

    fn check_floor(&self, l: usize) -> Result<()> {
        if l >= self.floors {
            return Err(Error::IndexOutOfRange(format!(
                "floor {l} (ensemble has {} floors)",
                self.floors
            )));
        }
        Ok(())
    }

    /// `g_{l,m}` with the integrations over floors strictly between `l` and
    /// `m` weighted by `measure`. Zero when `m <= l`.
    pub(crate) fn chain_for(&self, l: usize, m: usize, measure: &FloorMeasure) -> CMatrix {
        let p = self.nodes();
        if m <= l {
            return CMatrix::zeros(p, p);
        }
        if measure.full || m == l + 1 {
            return self.chains[l * self.floors + m].clone().expect("cached chain");
        }
        let mut acc = self.links[l].clone();
        for k in l + 1..m {
            acc = scale_columns(&acc, &measure.weights[k]) * &self.links[k];
        }
        acc
    }

    fn rows(&self, basis: Basis) -> (&CMatrix, &CMatrix) {
        match basis {
            Basis::Given => (&self.f, &self.phi),
            Basis::Orthonormal => (&self.f_work, &self.phi_work),
        }
    }

    /// Rows `(f_j * g_{0,m})(y)`; equals `f` on floor 0.
    pub(crate) fn left_rows(&self, m: usize, measure: &FloorMeasure) -> CMatrix {
        self.left_rows_in(m, measure, Basis::Given)
    }

    pub(crate) fn left_rows_in(&self, m: usize, measure: &FloorMeasure, basis: Basis) -> CMatrix {
        let f = self.rows(basis).0;
        if m == 0 {
            return f.clone();
        }
        scale_columns(f, &measure.weights[0]) * self.chain_for(0, m, measure)
    }

    /// Rows `(g_{l,M-1} * φ_s)(x)`; equals `φ` on the last floor.
    pub(crate) fn right_rows(&self, l: usize, measure: &FloorMeasure) -> CMatrix {
        self.right_rows_in(l, measure, Basis::Given)
    }

    pub(crate) fn right_rows_in(&self, l: usize, measure: &FloorMeasure, basis: Basis) -> CMatrix {
        let phi = self.rows(basis).1;
        let last = self.floors - 1;
        if l == last {
            return phi.clone();
        }
        scale_columns(phi, &measure.weights[last]) * self.chain_for(l, last, measure).transpose()
    }

    pub(crate) fn gram_with(&self, measure: &FloorMeasure) -> CMatrix {
        self.gram_in(measure, Basis::Given)
    }

    pub(crate) fn gram_in(&self, measure: &FloorMeasure, basis: Basis) -> CMatrix {
        let last = self.floors - 1;
        scale_columns(&self.left_rows_in(last, measure, basis), &measure.weights[last]) * self.rows(basis).1.transpose()
    }

    /// `det A` in the orthonormal working basis.
    pub(crate) fn work_gram_det(&self) -> C64 {
        self.work_gram_det
    }

    fn masks_to_measure(&self, assignments: &[(usize, &Window)]) -> Result<FloorMeasure> {
        let mut measure = FloorMeasure::full(&self.space, self.floors);
        measure.full = assignments.is_empty();
        for (floor, w) in assignments {
            if w.len() != self.nodes() {
                return Err(Error::InvalidWindow(format!(
                    "mask has {} entries, space has {} nodes",
                    w.len(),
                    self.nodes()
                )));
            }
            measure.weights[*floor] = w.restrict_weights(self.space.weights());
        }
        Ok(measure)
    }

    /// Chain convolution `g_{l,m}` (zero when `m <= l`).
    ///
    /// `restriction`, when given, supplies one mask per intermediate floor
    /// `l+1, ..., m-1`; each intermediate integration is then restricted to
    /// its mask.
    pub fn chain_convolve(&self, l: usize, m: usize, restriction: Option<&[Window]>) -> Result<CMatrix> {
        self.check_floor(l)?;
        self.check_floor(m)?;
        let inner = m.saturating_sub(l + 1);
        let assignments: Vec<(usize, &Window)> = match restriction {
            None => Vec::new(),
            Some(masks) => {
                if masks.len() != inner {
                    return Err(Error::InvalidArgument(format!(
                        "restriction has {} masks, {inner} intermediate floors",
                        masks.len()
                    )));
                }
                masks.iter().enumerate().map(|(i, w)| (l + 1 + i, w)).collect()
            }
        };
        let measure = self.masks_to_measure(&assignments)?;
        Ok(self.chain_for(l, m, &measure))
    }

    /// `(f_j * g_{0,m})(y)` as a node vector, with the floor-0 integration
    /// restricted to `first` and intermediate floors `1..m` to
    /// `intermediate` when given.
    pub fn left_convolve(
        &self,
        j: usize,
        m: usize,
        first: Option<&Window>,
        intermediate: Option<&[Window]>,
    ) -> Result<DVector<C64>> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange(format!("function {j} (n = {})", self.n)));
        }
        self.check_floor(m)?;
        let mut assignments = Vec::new();
        if let Some(w) = first {
            assignments.push((0, w));
        }
        if let Some(masks) = intermediate {
            if masks.len() != m.saturating_sub(1) {
                return Err(Error::InvalidArgument(format!(
                    "{} intermediate masks for {} intermediate floors",
                    masks.len(),
                    m.saturating_sub(1)
                )));
            }
            assignments.extend(masks.iter().enumerate().map(|(i, w)| (i + 1, w)));
        }
        let measure = self.masks_to_measure(&assignments)?;
        Ok(self.left_rows(m, &measure).row(j).transpose())
    }

    /// `(g_{l,M-1} * φ_s)(x)` as a node vector; mirror of [`Self::left_convolve`].
    pub fn right_convolve(
        &self,
        s: usize,
        l: usize,
        last: Option<&Window>,
        intermediate: Option<&[Window]>,
    ) -> Result<DVector<C64>> {
        if s >= self.n {
            return Err(Error::IndexOutOfRange(format!("function {s} (n = {})", self.n)));
        }
        self.check_floor(l)?;
        let top = self.floors - 1;
        let mut assignments = Vec::new();
        if let Some(w) = last {
            assignments.push((top, w));
        }
        if let Some(masks) = intermediate {
            let inner = top.saturating_sub(l + 1);
            if masks.len() != inner {
                return Err(Error::InvalidArgument(format!(
                    "{} intermediate masks for {inner} intermediate floors",
                    masks.len()
                )));
            }
            assignments.extend(masks.iter().enumerate().map(|(i, w)| (l + 1 + i, w)));
        }
        let measure = self.masks_to_measure(&assignments)?;
        Ok(self.right_rows(l, &measure).row(s).transpose())
    }

    /// `A_{jk}`: pairing of `f_j` with `φ_k` through the whole chain, with
    /// every floor integrated over the domain selected by `variant`.
    pub fn gram_matrix(&self, variant: GramVariant) -> Result<GramMatrix> {
        let (kind, windows) = match variant {
            GramVariant::Full => (GramKind::Full, None),
            GramVariant::Complement(wf) => (GramKind::Complement, Some(wf)),
            GramVariant::Window(wf) => (GramKind::Window, Some(wf)),
        };
        if let Some(wf) = windows {
            self.check_family(wf)?;
        }
        let entries = match kind {
            GramKind::Full => self.gram.clone(),
            _ => self.gram_with(&FloorMeasure::for_variant(&self.space, self.floors, variant)),
        };
        Ok(GramMatrix {
            entries,
            kind,
            windows: windows.cloned(),
        })
    }

    pub(crate) fn check_family(&self, wf: &WindowFamily) -> Result<()> {
        if wf.floors() != self.floors {
            return Err(Error::InvalidWindow(format!(
                "window family has {} floors, ensemble has {}",
                wf.floors(),
                self.floors
            )));
        }
        if wf.windows().iter().any(|w| w.len() != self.nodes()) {
            return Err(Error::InvalidWindow("window does not match the ensemble's space".into()));
        }
        Ok(())
    }

    /// `Z = (n!)^M · det A`.
    pub fn partition_function(&self) -> C64 {
        linalg::det(&self.gram) * factorial(self.n).powi(self.floors as i32)
    }

    /// The joint law of the selected floors, which is again a chain ensemble
    /// with `f̃ = f * g_{0,l_1}`, links `g_{l_k, l_{k+1}}` and
    /// `φ̃ = g_{l_m, M-1} * φ`. Its Gram matrix equals the parent's.
    pub fn marginal(&self, floors: &[usize]) -> Result<ChainEnsemble> {
        let (first, last) = match (floors.first(), floors.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::InvalidArgument("empty floor list".into())),
        };
        for l in floors {
            self.check_floor(*l)?;
        }
        if floors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("floors must be strictly increasing".into()));
        }
        let full = FloorMeasure::full(&self.space, self.floors);
        let f = self.left_rows(first, &full);
        let phi = self.right_rows(last, &full);
        let links = floors
            .windows(2)
            .map(|w| self.chain_for(w[0], w[1], &full))
            .collect();
        let mut marginal = ChainEnsemble::new(self.space.clone(), f, phi, links, self.options)?;
        // Carry the parent's working basis over instead of re-orthonormalizing
        // rows that were formed in the given basis.
        marginal.f_work = orthonormal_rows(&self.left_rows_in(first, &full, Basis::Orthonormal));
        marginal.phi_work = orthonormal_rows(&self.right_rows_in(last, &full, Basis::Orthonormal));
        let marginal_full = FloorMeasure::full(&marginal.space, marginal.floors);
        marginal.work_gram_det = linalg::det(&marginal.gram_in(&marginal_full, Basis::Orthonormal));
        Ok(marginal)
    }
}

/// `⟨ψ_i, χ_j⟩ = Σ_x ψ_i(x) χ_j(x) w_x` for function families sampled as rows.
pub fn pairing_matrix(space: &DiscretizedSpace, psi: &CMatrix, chi: &CMatrix) -> CMatrix {
    scale_columns(psi, space.weights()) * chi.transpose()
}

pub(crate) fn scale_columns(m: &CMatrix, w: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (j, wj) in w.iter().enumerate() {
        out.column_mut(j).scale_mut(*wj);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_random;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn two_node() -> DiscretizedSpace {
        DiscretizedSpace::discrete(&[0.0, 1.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn gram_single_floor() {
        let ens = ChainEnsemble::from_real(
            two_node(),
            &[vec![1.0, 2.0]],
            &[vec![3.0, 4.0]],
            &[],
            EnsembleOptions::default(),
        )
        .unwrap();
        assert_eq!(ens.gram()[(0, 0)], c(11.0));
    }

    #[test]
    fn gram_two_floors_identity_link() {
        let ens = ChainEnsemble::from_real(
            two_node(),
            &[vec![1.0, 1.0]],
            &[vec![1.0, 1.0]],
            &[vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
            EnsembleOptions::default(),
        )
        .unwrap();
        assert_eq!(ens.gram()[(0, 0)], c(2.0));
        assert_eq!(ens.partition_function(), c(2.0));
    }

    #[test]
    fn partition_function_indicator_basis() {
        let ens = ChainEnsemble::from_real(
            two_node(),
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[],
            EnsembleOptions::default(),
        )
        .unwrap();
        assert!((ens.partition_function() - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_gram_is_rejected() {
        let err = ChainEnsemble::from_real(
            two_node(),
            &[vec![1.0, 1.0], vec![2.0, 2.0]],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[],
            EnsembleOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn zero_particles_rejected() {
        let err = ChainEnsemble::new(
            two_node(),
            CMatrix::zeros(0, 2),
            CMatrix::zeros(0, 2),
            vec![],
            EnsembleOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidEnsemble(_)));
    }

    #[test]
    fn chain_conventions() {
        let ens = build_random(3, 4, 2, 3).unwrap();
        let zero = ens.chain_convolve(2, 1, None).unwrap();
        assert!(zero.iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert!(ens.chain_convolve(1, 1, None).unwrap().iter().all(|z| z.norm() == 0.0));
        assert_eq!(ens.chain_convolve(0, 1, None).unwrap(), ens.links()[0]);
        assert_eq!(ens.left_convolve(1, 0, None, None).unwrap(), ens.f().row(1).transpose());
        assert_eq!(ens.right_convolve(0, 2, None, None).unwrap(), ens.phi().row(0).transpose());
    }

    #[test]
    fn identity_chain_is_identity() {
        let space = DiscretizedSpace::discrete(&[0.0, 1.0, 2.0], &[1.0; 3]).unwrap();
        let id: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| (i == j) as u8 as f64).collect()).collect();
        let ens = ChainEnsemble::from_real(
            space,
            &[vec![1.0, 2.0, 3.0]],
            &[vec![0.5, 0.25, 1.0]],
            &[id.clone(), id],
            EnsembleOptions::default(),
        )
        .unwrap();
        assert_eq!(ens.chain_convolve(0, 2, None).unwrap(), CMatrix::identity(3, 3));
        assert_eq!(ens.right_convolve(0, 0, None, None).unwrap(), ens.phi().row(0).transpose());
    }

    #[test]
    fn chain_matches_direct_double_sum() {
        let ens = build_random(11, 4, 1, 3).unwrap();
        let (g1, g2, w) = (&ens.links()[0], &ens.links()[1], ens.space().weights());
        let g13 = ens.chain_convolve(0, 2, None).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let direct: C64 = (0..4).map(|z| g1[(x, z)] * w[z] * g2[(z, y)]).sum();
                assert!((direct - g13[(x, y)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn convolutions_match_direct_summation() {
        let ens = build_random(5, 4, 2, 3).unwrap();
        let w = ens.space().weights();
        let (g1, g2) = (&ens.links()[0], &ens.links()[1]);
        for j in 0..2 {
            let left = ens.left_convolve(j, 2, None, None).unwrap();
            let right = ens.right_convolve(j, 0, None, None).unwrap();
            for y in 0..4 {
                let mut l = C64::new(0.0, 0.0);
                let mut r = C64::new(0.0, 0.0);
                for a in 0..4 {
                    for b in 0..4 {
                        l += ens.f()[(j, a)] * w[a] * g1[(a, b)] * w[b] * g2[(b, y)];
                        r += g1[(y, a)] * w[a] * g2[(a, b)] * w[b] * ens.phi()[(j, b)];
                    }
                }
                assert!((l - left[y]).norm() < 1e-13);
                assert!((r - right[y]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gram_matches_triple_sum() {
        let ens = build_random(2, 4, 2, 3).unwrap();
        let w = ens.space().weights();
        let (g1, g2) = (&ens.links()[0], &ens.links()[1]);
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..4 {
                    for b in 0..4 {
                        for cc in 0..4 {
                            acc += ens.f()[(j, a)]
                                * g1[(a, b)]
                                * g2[(b, cc)]
                                * ens.phi()[(k, cc)]
                                * (w[a] * w[b] * w[cc]);
                        }
                    }
                }
                assert!((acc - ens.gram()[(j, k)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn restricted_grams_degenerate_to_full() {
        let ens = build_random(8, 5, 2, 3).unwrap();
        let empty = WindowFamily::empty(ens.space(), 3);
        let full = WindowFamily::full(ens.space(), 3);
        let a = ens.gram_matrix(GramVariant::Full).unwrap().entries;
        assert_eq!(ens.gram_matrix(GramVariant::Complement(&empty)).unwrap().entries, a);
        assert_eq!(ens.gram_matrix(GramVariant::Window(&full)).unwrap().entries, a);
        let zero = ens.gram_matrix(GramVariant::Complement(&full)).unwrap().entries;
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn restriction_length_mismatch_is_an_error() {
        let ens = build_random(8, 3, 1, 3).unwrap();
        let w = Window::full(ens.space());
        assert!(ens.chain_convolve(0, 2, Some(&[w.clone(), w.clone()])).is_err());
        assert!(ens.chain_convolve(0, 2, Some(&[w.clone()])).is_ok());
        assert!(ens.left_convolve(5, 1, None, None).is_err());
        assert!(ens.chain_convolve(0, 7, None).is_err());
    }

    #[test]
    fn chain_is_associative_consistent() {
        let ens = build_random(21, 5, 1, 5).unwrap();
        let w = ens.space().weights();
        for l in 0..5 {
            for m in l + 2..5 {
                let direct = ens.chain_convolve(l, m, None).unwrap();
                for k in l + 1..m {
                    let split = scale_columns(&ens.chain_convolve(l, k, None).unwrap(), w)
                        * ens.chain_convolve(k, m, None).unwrap();
                    let err = (&split - &direct).map(|z| z.norm()).max();
                    assert!(err <= 1e-12 * linalg::max_abs(&direct));
                }
            }
        }
    }

    #[test]
    fn marginal_keeps_gram_and_identity_selection() {
        let ens = build_random(4, 5, 2, 3).unwrap();
        let same = ens.marginal(&[0, 1, 2]).unwrap();
        assert_eq!(same.f(), ens.f());
        assert_eq!(same.phi(), ens.phi());
        for floors in [vec![0], vec![2], vec![0, 2], vec![1, 2]] {
            let m = ens.marginal(&floors).unwrap();
            assert_eq!(m.floors(), floors.len());
            let err = (m.gram() - ens.gram()).map(|z| z.norm()).max();
            assert!(err <= 1e-12 * linalg::max_abs(ens.gram()));
        }
        let top = ens.marginal(&[2]).unwrap();
        assert_eq!(top.f().row(0).transpose(), ens.left_convolve(0, 2, None, None).unwrap());
        assert!(ens.marginal(&[]).is_err());
        assert!(ens.marginal(&[1, 0]).is_err());
    }
}
