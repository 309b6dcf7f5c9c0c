//! The block correlation kernel
//!
//! ```text
//! K(l,x; m,y) = -g_{l,m}(x,y) + Σ_ij (g_{l,M-1} * φ_i)(x) · (A⁻¹)_ij · (f_j * g_{0,m})(y)
//! ```
//!
//! its determinantal correlation functions, and the restriction of the
//! kernel to a window family together with the Fredholm determinant and the
//! resolvent `K_I (Id - K_I)⁻¹`.
//!
//! Operators act on `L²` of the node weights. Every routine that needs a
//! determinant or an inverse works on the symmetrized matrix
//! `sqrt(w_x) K(x,y) sqrt(w_y)`; kernel samples themselves stay unweighted.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{Basis, ChainEnsemble, FloorMeasure};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::measure_space::WindowFamily;

/// Reciprocal condition numbers below this make the resolvent a hard error.
pub const RESOLVENT_RCOND_ERROR: f64 = 1e-12;
/// Reciprocal condition numbers below this attach a warning.
pub const RESOLVENT_RCOND_WARN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Correlation,
    JanossyExplicit,
    Resolvent,
}

/// An `M × M` array of `P × P` kernel samples.
#[derive(Clone, Debug)]
pub struct BlockKernel<'e> {
    ensemble: &'e ChainEnsemble,
    blocks: Vec<CMatrix>,
    kind: KernelKind,
    condition: Option<f64>,
    warnings: Vec<String>,
}

/// Blocks `-g^μ_{l,m} + R_lᵀ (A^μ)⁻¹ L_m` for a per-floor measure μ.
pub(crate) struct Assembled {
    pub(crate) blocks: Vec<CMatrix>,
    /// `A^μ` in the given basis.
    pub(crate) gram: CMatrix,
    pub(crate) condition: f64,
    /// `det A^μ` in the orthonormal working basis.
    pub(crate) work_det: C64,
}

/// Assembles the kernel blocks for the per-floor measure μ.
///
/// Fails when `A^μ` is above the ensemble's condition threshold; `what`
/// names the matrix in the error. The solve runs in the orthonormal
/// working basis, which leaves the kernel unchanged.
pub(crate) fn assemble_blocks(ens: &ChainEnsemble, measure: &FloorMeasure, what: &str) -> Result<Assembled> {
    let floors = ens.floors();
    let gram = ens.gram_with(measure);
    let condition = linalg::condition_number(&gram);
    if !(condition <= ens.options().max_condition) {
        return Err(Error::singular(what, condition));
    }
    let work = ens.gram_in(measure, Basis::Orthonormal);
    let work_det = linalg::det(&work);
    let lu = work.lu();
    let solved: Vec<CMatrix> = (0..floors)
        .map(|m| {
            lu.solve(&ens.left_rows_in(m, measure, Basis::Orthonormal))
                .ok_or_else(|| Error::singular(what, f64::INFINITY))
        })
        .collect::<Result<_>>()?;
    let right: Vec<CMatrix> = (0..floors)
        .map(|l| ens.right_rows_in(l, measure, Basis::Orthonormal))
        .collect();
    let blocks = (0..floors * floors)
        .into_par_iter()
        .map(|idx| {
            let (l, m) = (idx / floors, idx % floors);
            right[l].transpose() * &solved[m] - ens.chain_for(l, m, measure)
        })
        .collect();
    Ok(Assembled {
        blocks,
        gram,
        condition,
        work_det,
    })
}

/// The correlation kernel of `ens`.
pub fn correlation_kernel(ens: &ChainEnsemble) -> Result<BlockKernel<'_>> {
    let measure = FloorMeasure::full(ens.space(), ens.floors());
    let assembled = assemble_blocks(ens, &measure, "Gram matrix A")?;
    Ok(BlockKernel {
        ensemble: ens,
        blocks: assembled.blocks,
        kind: KernelKind::Correlation,
        condition: Some(assembled.condition),
        warnings: Vec::new(),
    })
}

impl<'e> BlockKernel<'e> {
    pub(crate) fn from_blocks(
        ensemble: &'e ChainEnsemble,
        blocks: Vec<CMatrix>,
        kind: KernelKind,
        condition: Option<f64>,
    ) -> Self {
        Self {
            ensemble,
            blocks,
            kind,
            condition,
            warnings: Vec::new(),
        }
    }

    pub fn ensemble(&self) -> &'e ChainEnsemble {
        self.ensemble
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn floors(&self) -> usize {
        self.ensemble.floors()
    }

    pub fn nodes(&self) -> usize {
        self.ensemble.nodes()
    }

    /// Condition number of the matrix inverted to build this kernel.
    pub fn condition(&self) -> Option<f64> {
        self.condition
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn block(&self, l: usize, m: usize) -> &CMatrix {
        &self.blocks[l * self.floors() + m]
    }

    pub fn value(&self, l: usize, x: usize, m: usize, y: usize) -> C64 {
        self.block(l, m)[(x, y)]
    }

    fn check_point(&self, (l, x): (usize, usize)) -> Result<()> {
        if l >= self.floors() || x >= self.nodes() {
            return Err(Error::IndexOutOfRange(format!(
                "point (floor {l}, node {x}) outside {} floors x {} nodes",
                self.floors(),
                self.nodes()
            )));
        }
        Ok(())
    }

    /// `det(K(p_i; p_j))` over the given (floor, node) points.
    pub(crate) fn point_determinant(&self, points: &[(usize, usize)]) -> Result<C64> {
        for p in points {
            self.check_point(*p)?;
        }
        let k = points.len();
        let m = CMatrix::from_fn(k, k, |i, j| {
            let (l, x) = points[i];
            let (mm, y) = points[j];
            self.value(l, x, mm, y)
        });
        Ok(linalg::det(&m))
    }

    /// Correlation function `ρ(points) = det(K(p_i; p_j))`.
    ///
    /// The empty point list gives 1; repeated points give 0.
    pub fn correlation_function(&self, points: &[(usize, usize)]) -> Result<C64> {
        if self.kind != KernelKind::Correlation {
            return Err(Error::InvalidArgument(format!(
                "correlation functions need a correlation kernel, got {:?}",
                self.kind
            )));
        }
        self.point_determinant(points)
    }

    /// Restriction to the window family, symmetrically weighted.
    pub fn restrict(&self, wf: &WindowFamily) -> Result<RestrictedOperator> {
        self.ensemble.check_family(wf)?;
        let weights = self.ensemble.space().weights();
        let mut indices = Vec::with_capacity(wf.node_count());
        for (l, w) in wf.windows().iter().enumerate() {
            indices.extend(w.indices().into_iter().map(|x| (l, x)));
        }
        let sqrt_w: Vec<f64> = indices.iter().map(|(_, x)| weights[*x].sqrt()).collect();
        let k = indices.len();
        let matrix = CMatrix::from_fn(k, k, |i, j| {
            let (l, x) = indices[i];
            let (m, y) = indices[j];
            self.value(l, x, m, y) * (sqrt_w[i] * sqrt_w[j])
        });
        Ok(RestrictedOperator {
            indices,
            matrix,
            sqrt_w,
        })
    }

    /// `L = K_I (Id - K_I)⁻¹` as a block kernel, zero outside the windows.
    pub fn resolvent_kernel(&self, wf: &WindowFamily) -> Result<BlockKernel<'e>> {
        let op = self.restrict(wf)?;
        let k = op.size();
        let floors = self.floors();
        let p = self.nodes();
        let mut blocks = vec![CMatrix::zeros(p, p); floors * floors];
        if k == 0 {
            return Ok(BlockKernel {
                ensemble: self.ensemble,
                blocks,
                kind: KernelKind::Resolvent,
                condition: Some(1.0),
                warnings: Vec::new(),
            });
        }
        let id_minus = op.id_minus();
        let cond = linalg::condition_number(&id_minus);
        if !(1.0 / cond >= RESOLVENT_RCOND_ERROR) {
            return Err(Error::singular("Id - K restricted to the windows", cond));
        }
        let mut warnings = Vec::new();
        if 1.0 / cond < RESOLVENT_RCOND_WARN {
            warnings.push(format!(
                "Id - K restricted to the windows is ill-conditioned (condition {cond:.3e})"
            ));
        }
        // S (Id - S)⁻¹ = (Id - S)⁻¹ S, one factorization for all columns.
        let sym = id_minus
            .lu()
            .solve(&op.matrix)
            .ok_or_else(|| Error::singular("Id - K restricted to the windows", f64::INFINITY))?;
        for i in 0..k {
            let (l, x) = op.indices[i];
            for j in 0..k {
                let (m, y) = op.indices[j];
                blocks[l * floors + m][(x, y)] = sym[(i, j)] / (op.sqrt_w[i] * op.sqrt_w[j]);
            }
        }
        Ok(BlockKernel {
            ensemble: self.ensemble,
            blocks,
            kind: KernelKind::Resolvent,
            condition: Some(cond),
            warnings,
        })
    }

    /// Residuals of the composition identity
    /// `Σ_l ∫ K(k,x;l,y) K(l,y;m,z) dμ(y) = (1 + (m-k)) K(k,x;m,z) + 2(m-k) g_{k,m}(x,z)`.
    ///
    /// `stated` compares against that right-hand side, `sign_flipped`
    /// against `(1 - (m-k)) K(k,x;m,z)`. Both vanish when `k == m`.
    pub fn dyson_mehta_check(&self, k: usize, m: usize, x: usize, z: usize) -> Result<DysonMehtaResidual> {
        if self.kind != KernelKind::Correlation {
            return Err(Error::InvalidArgument("composition check needs a correlation kernel".into()));
        }
        self.check_point((k, x))?;
        self.check_point((m, z))?;
        let w = self.ensemble.space().weights();
        let mut lhs = linalg::CompensatedSum::default();
        for l in 0..self.floors() {
            let a = self.block(k, l);
            let b = self.block(l, m);
            for (y, wy) in w.iter().enumerate() {
                lhs.add(a[(x, y)] * b[(y, z)] * *wy);
            }
        }
        let lhs = lhs.value();
        let kv = self.value(k, x, m, z);
        let d = m as f64 - k as f64;
        let g = if k < m {
            self.ensemble.chain_convolve(k, m, None)?[(x, z)]
        } else {
            C64::new(0.0, 0.0)
        };
        let stated = kv * (1.0 + d) + g * (2.0 * d);
        Ok(DysonMehtaResidual {
            stated: (lhs - stated).norm(),
            sign_flipped: (lhs - kv * (1.0 - d)).norm(),
        })
    }

    /// One row per `(l, x, m, y)`: `l,x,m,y,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("schema:jk-csv-1,l,x,m,y,re,im\n");
        for l in 0..self.floors() {
            for m in 0..self.floors() {
                let b = self.block(l, m);
                for x in 0..self.nodes() {
                    for y in 0..self.nodes() {
                        let v = b[(x, y)];
                        out.push_str(&format!("jk-csv-1,{l},{x},{m},{y},{:e},{:e}\n", v.re, v.im));
                    }
                }
            }
        }
        out
    }

    /// Block dump with `[re, im]` pairs, row-major per block.
    pub fn to_dump(&self) -> KernelDump {
        let p = self.nodes();
        KernelDump {
            kind: self.kind,
            floors: self.floors(),
            nodes: p,
            blocks: (0..self.floors())
                .map(|l| {
                    (0..self.floors())
                        .map(|m| {
                            let b = self.block(l, m);
                            (0..p)
                                .map(|x| (0..p).map(|y| [b[(x, y)].re, b[(x, y)].im]).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DysonMehtaResidual {
    pub stated: f64,
    pub sign_flipped: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelDump {
    pub kind: KernelKind,
    pub floors: usize,
    pub nodes: usize,
    /// `blocks[l][m][x][y] = [re, im]`.
    pub blocks: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

/// A kernel restricted to the nodes of a window family, in (floor, node)
/// lexicographic order, with entries `sqrt(w_x) K sqrt(w_y)`.
#[derive(Clone, Debug)]
pub struct RestrictedOperator {
    indices: Vec<(usize, usize)>,
    matrix: CMatrix,
    sqrt_w: Vec<f64>,
}

impl RestrictedOperator {
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn id_minus(&self) -> CMatrix {
        linalg::identity(self.size()) - &self.matrix
    }

    /// `det(Id - K_I)`; 1 for the empty restriction.
    pub fn fredholm_det(&self) -> C64 {
        linalg::det(&self.id_minus())
    }

    /// 2-norm condition number of `Id - K_I`.
    pub fn id_minus_condition(&self) -> f64 {
        linalg::condition_number(&self.id_minus())
    }
}
