//! Multiplicative Schwarz iteration operators for block-arrow systems.
//!
//! With the two overlapping subdomains `A_1` (top wing plus center) and `A_2`
//! (center plus bottom wing), one multiplicative sweep applies the projections
//! `P_i = R_i' A_i^{-1} R_i A` in sequence, and the error propagates through
//! `T = (I - P_2)(I - P_1)` or its reverse. Both products collapse to a rank
//! `n` matrix: a single nonzero block column. This module computes that block
//! column exactly from two block tridiagonal solves and exposes it as a
//! structured operator, plus dense reference routes for cross-checking.

use crate::block::{BlockArrowSystem, StripSide, Subdomain, MATERIALIZE_LIMIT};
use crate::dense::{Matrix, NormKind, Vector};
use crate::error::{Error, Result};

/// Order in which the two subdomain solves are applied within one sweep.
///
/// `T12` solves subdomain 1 (top) first, so the error operator is
/// `(I - P_2)(I - P_1)`; `T21` is the reverse sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepOrdering {
    T12,
    T21,
}

impl SweepOrdering {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepOrdering::T12 => "t12",
            SweepOrdering::T21 => "t21",
        }
    }
}

impl std::fmt::Display for SweepOrdering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SweepOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t12" | "T12" => Ok(SweepOrdering::T12),
            "t21" | "T21" => Ok(SweepOrdering::T21),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep ordering {other:?}, expected t12 or t21"
            ))),
        }
    }
}

/// Responses of the two subdomain matrices to the blocks coupling them to the
/// rest of the system.
///
/// `[p1; pi1]` stacked is `A_1^{-1} (e_{m+1} (x) B)` and `[pi2; p2]` stacked is
/// `A_2^{-1} (e_1 (x) C)`, where `B` couples the center row to the bottom wing
/// and `C` couples it to the top wing. Everything the low-rank error operator
/// needs is contained in these `2m + 2` blocks.
#[derive(Clone, Debug)]
pub struct SchwarzCore {
    n: usize,
    m: usize,
    /// Blocks 1..m of the subdomain-1 response, top to bottom.
    p1: Vec<Matrix>,
    /// Final (center row) block of the subdomain-1 response.
    pi1: Matrix,
    /// First (center row) block of the subdomain-2 response.
    pi2: Matrix,
    /// Blocks 1..m of the subdomain-2 response, top to bottom.
    p2: Vec<Matrix>,
}

impl SchwarzCore {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p1(&self) -> &[Matrix] {
        &self.p1
    }

    pub fn pi1(&self) -> &Matrix {
        &self.pi1
    }

    pub fn pi2(&self) -> &Matrix {
        &self.pi2
    }

    pub fn p2(&self) -> &[Matrix] {
        &self.p2
    }

    /// Last block of the subdomain-1 response, adjacent to the center row.
    pub fn p1_last(&self) -> &Matrix {
        &self.p1[self.m - 1]
    }

    /// First block of the subdomain-2 response, adjacent to the center row.
    pub fn p2_first(&self) -> &Matrix {
        &self.p2[0]
    }
}

/// Computes the subdomain responses by two block tridiagonal solves.
pub fn compute_core(sys: &BlockArrowSystem) -> Result<SchwarzCore> {
    let n = sys.block_dim();
    let m = sys.wing_rows();
    let local = n * (m + 1);

    let a1 = sys
        .subdomain_matrix(Subdomain::Top)
        .factor()
        .map_err(|e| wrap(e, "A1"))?;
    let mut rhs1 = Matrix::zeros(local, n);
    rhs1.set_block(m * n, 0, sys.coupling_b());
    let sol1 = a1.solve_matrix(&rhs1).map_err(|e| wrap(e, "A1"))?;

    let a2 = sys
        .subdomain_matrix(Subdomain::Bottom)
        .factor()
        .map_err(|e| wrap(e, "A2"))?;
    let mut rhs2 = Matrix::zeros(local, n);
    rhs2.set_block(0, 0, sys.coupling_c());
    let sol2 = a2.solve_matrix(&rhs2).map_err(|e| wrap(e, "A2"))?;

    let p1 = (0..m).map(|i| sol1.block(i * n, 0, n, n)).collect();
    let pi1 = sol1.block(m * n, 0, n, n);
    let pi2 = sol2.block(0, 0, n, n);
    let p2 = (1..=m).map(|i| sol2.block(i * n, 0, n, n)).collect();
    Ok(SchwarzCore { n, m, p1, pi1, pi2, p2 })
}

/// Computes the same responses through the Schur complements of the center
/// block against each wing, using one inverse column strip per wing.
///
/// This route requires both wings to be invertible on their own, which the
/// direct route does not; it exists as an independent cross-check.
pub fn schur_core(sys: &BlockArrowSystem) -> Result<SchwarzCore> {
    let n = sys.block_dim();
    let m = sys.wing_rows();
    let z_top = sys
        .wing_top()
        .inverse_column_strip(StripSide::Last)
        .map_err(|e| wrap(e, "top wing"))?;
    let z_bottom = sys
        .wing_bottom()
        .inverse_column_strip(StripSide::First)
        .map_err(|e| wrap(e, "bottom wing"))?;

    // pi1 = (A - C Z_mm B_H)^{-1} B, with the Schur complement taken in the
    // top subdomain; pi2 mirrors it through the bottom wing.
    let schur1 = sys
        .center()
        .sub(&sys.coupling_c().mul(&z_top.corner().mul(sys.coupling_bh())));
    let pi1 = schur1.lu().map_err(|e| wrap(e, "A1"))?.solve(sys.coupling_b())?;
    let schur2 = sys
        .center()
        .sub(&sys.coupling_b().mul(&z_bottom.corner().mul(sys.coupling_ch())));
    let pi2 = schur2.lu().map_err(|e| wrap(e, "A2"))?.solve(sys.coupling_c())?;

    let bh_pi1 = sys.coupling_bh().mul(&pi1);
    let ch_pi2 = sys.coupling_ch().mul(&pi2);
    let p1 = (0..m)
        .map(|i| z_top.block(i).mul(&bh_pi1).scale(-1.0))
        .collect();
    let p2 = (0..m)
        .map(|j| z_bottom.block(j).mul(&ch_pi2).scale(-1.0))
        .collect();
    Ok(SchwarzCore { n, m, p1, pi1, pi2, p2 })
}

fn wrap(e: Error, name: &str) -> Error {
    match e {
        Error::SingularMatrix(msg) => {
            Error::SingularMatrix(format!("local solve on {name} failed: {msg}"))
        }
        other => other,
    }
}

/// Exact low-rank form of a multiplicative sweep error operator.
///
/// The operator is `T = V (e_pick' (x) I_n)`: it reads only block `pick` of
/// its input and writes `V` times that block. Powers stay in the same family,
/// `T^{k+1} = V K^k (e_pick' (x) I_n)` with the `n x n` kernel `K`, so norms,
/// applications, and asymptotics of the sweep never require the full matrix.
#[derive(Clone, Debug)]
pub struct LowRankT {
    ordering: SweepOrdering,
    n: usize,
    m: usize,
    v: Vec<Matrix>,
    kernel: Matrix,
    pick: usize,
}

impl LowRankT {
    /// Assembles the block column and kernel from the subdomain responses.
    pub fn from_core(core: &SchwarzCore, ordering: SweepOrdering) -> Self {
        let n = core.n;
        let m = core.m;
        let mut v = Vec::with_capacity(2 * m + 1);
        let (kernel, pick) = match ordering {
            SweepOrdering::T12 => {
                for i in 0..m {
                    v.push(core.p1[i].scale(-1.0));
                }
                v.push(core.pi2.mul(core.p1_last()));
                for j in 0..m {
                    v.push(core.p2[j].mul(core.p1_last()));
                }
                (core.p2_first().mul(core.p1_last()), m + 1)
            }
            SweepOrdering::T21 => {
                for i in 0..m {
                    v.push(core.p1[i].mul(core.p2_first()));
                }
                v.push(core.pi1.mul(core.p2_first()));
                for j in 0..m {
                    v.push(core.p2[j].scale(-1.0));
                }
                (core.p1_last().mul(core.p2_first()), m - 1)
            }
        };
        LowRankT { ordering, n, m, v, kernel, pick }
    }

    pub fn ordering(&self) -> SweepOrdering {
        self.ordering
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total dimension the operator acts on.
    pub fn dim(&self) -> usize {
        self.n * (2 * self.m + 1)
    }

    /// The `2m + 1` blocks of the nonzero block column, top to bottom.
    pub fn v_blocks(&self) -> &[Matrix] {
        &self.v
    }

    /// Kernel `K` governing all powers of the operator.
    pub fn kernel(&self) -> &Matrix {
        &self.kernel
    }

    /// Zero-based index of the block of the input the operator reads.
    pub fn pick(&self) -> usize {
        self.pick
    }

    /// The block column stacked into a `(2m + 1) n x n` matrix.
    pub fn stacked_v(&self) -> Matrix {
        let mut out = Matrix::zeros(self.dim(), self.n);
        for (i, b) in self.v.iter().enumerate() {
            out.set_block(i * self.n, 0, b);
        }
        out
    }

    /// `T x` through the structure: read block `pick`, multiply by the column.
    pub fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.len(), self.dim(), "apply length mismatch");
        let picked = x.block_vector(self.pick, self.n);
        let mut out = Vector::zeros(self.dim());
        for (i, b) in self.v.iter().enumerate() {
            out.set_block(i, self.n, b.mul_vec(&picked).data());
        }
        out
    }

    /// `K^k` by repeated squaring; `K^0` is the identity.
    pub fn power_kernel(&self, k: usize) -> Matrix {
        let mut result = Matrix::identity(self.n);
        let mut base = self.kernel.clone();
        let mut exp = k;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `T^k x` without forming any power of the full operator.
    pub fn apply_power(&self, x: &Vector, k: usize) -> Vector {
        if k == 0 {
            return x.clone();
        }
        assert_eq!(x.len(), self.dim(), "apply length mismatch");
        let picked = x.block_vector(self.pick, self.n);
        let seed = self.power_kernel(k - 1).mul_vec(&picked);
        let mut out = Vector::zeros(self.dim());
        for (i, b) in self.v.iter().enumerate() {
            out.set_block(i, self.n, b.mul_vec(&seed).data());
        }
        out
    }

    /// Exact operator norm: equals the norm of the stacked block column for
    /// any norm induced by a vector norm.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        self.stacked_v().norm(kind)
    }

    /// Exact per-sweep contraction factor: the norm of the kernel.
    pub fn convergence_factor(&self, kind: NormKind) -> Result<f64> {
        self.kernel.norm(kind)
    }

    /// Dense form of the operator; refuses dimensions above 4000.
    pub fn materialize(&self) -> Result<Matrix> {
        if self.dim() > MATERIALIZE_LIMIT {
            return Err(Error::SizeLimitExceeded(format!(
                "dense materialization of dimension {} exceeds {}",
                self.dim(),
                MATERIALIZE_LIMIT
            )));
        }
        let mut out = Matrix::zeros(self.dim(), self.dim());
        for (i, b) in self.v.iter().enumerate() {
            out.set_block(i * self.n, self.pick * self.n, b);
        }
        Ok(out)
    }
}

/// Convenience: subdomain responses plus both sweep operators in one pass.
pub fn build_sweep_operator(
    sys: &BlockArrowSystem,
    ordering: SweepOrdering,
) -> Result<LowRankT> {
    let core = compute_core(sys)?;
    Ok(LowRankT::from_core(&core, ordering))
}

/// Exact convergence factor of the sweep: the norm of the low-rank kernel.
pub fn rho_exact(
    sys: &BlockArrowSystem,
    ordering: SweepOrdering,
    kind: NormKind,
) -> Result<f64> {
    build_sweep_operator(sys, ordering)?.convergence_factor(kind)
}

/// Dense reference route for `P_i = R_i' A_i^{-1} R_i A`, built from the
/// materialized system and a factorization of the principal submatrix.
pub fn dense_projection(sys: &BlockArrowSystem, which: Subdomain) -> Result<Matrix> {
    let full = sys.materialize_dense()?;
    let n = sys.block_dim();
    let m = sys.wing_rows();
    let local = n * (m + 1);
    let offset = match which {
        Subdomain::Top => 0,
        Subdomain::Bottom => n * m,
    };
    let rows = full.block(offset, 0, local, sys.dim());
    let factor = sys.subdomain_matrix(which).factor()?;
    let x = factor.solve_matrix(&rows)?;
    let mut p = Matrix::zeros(sys.dim(), sys.dim());
    p.set_block(offset, 0, &x);
    Ok(p)
}

/// Dense reference route for the sweep error operator.
pub fn dense_iteration_matrix(
    sys: &BlockArrowSystem,
    ordering: SweepOrdering,
) -> Result<Matrix> {
    let id = Matrix::identity(sys.dim());
    let q1 = id.sub(&dense_projection(sys, Subdomain::Top)?);
    let q2 = id.sub(&dense_projection(sys, Subdomain::Bottom)?);
    Ok(match ordering {
        SweepOrdering::T12 => q2.mul(&q1),
        SweepOrdering::T21 => q1.mul(&q2),
    })
}
