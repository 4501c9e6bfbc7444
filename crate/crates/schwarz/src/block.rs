//! Block-structured system types: block tridiagonal wings and the block-arrow
//! matrix built from two wings, a center block row, and four coupling blocks.
//!
//! A block-arrow matrix of block order `2m + 1` with `n x n` blocks has the
//! shape
//!
//! ```text
//! [ W_top          e_m (x) B_H    0     ]
//! [ e_m' (x) C     A              e_1' (x) B ]
//! [ 0              e_1 (x) C_h    W_bot ]
//! ```
//!
//! so the top wing couples to the center through its last block row, and the
//! bottom wing through its first. The two overlapping subdomain matrices
//! `A_1` (leading `n(m+1)` rows/columns) and `A_2` (trailing) are themselves
//! block tridiagonal, which is what every local solve in this crate exploits.

use crate::dense::{Matrix, Vector};
use crate::error::{Error, Result};

/// Largest total dimension a dense materialization may have.
pub const MATERIALIZE_LIMIT: usize = 4000;

/// A square block tridiagonal matrix with `m` block rows of `n x n` blocks.
#[derive(Clone, Debug)]
pub struct BlockTridiagonal {
    n: usize,
    m: usize,
    sub: Vec<Matrix>,
    diag: Vec<Matrix>,
    sup: Vec<Matrix>,
    toeplitz: bool,
}

impl BlockTridiagonal {
    /// General constructor; `sub` and `sup` hold `m - 1` blocks, `diag` holds `m`.
    pub fn new(sub: Vec<Matrix>, diag: Vec<Matrix>, sup: Vec<Matrix>) -> Result<Self> {
        let m = diag.len();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "block tridiagonal needs at least one diagonal block".into(),
            ));
        }
        let n = diag[0].rows();
        if sub.len() + 1 != m || sup.len() + 1 != m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} off-diagonal blocks per band, got sub={} sup={}",
                m - 1,
                sub.len(),
                sup.len()
            )));
        }
        for (name, list) in [("sub", &sub), ("diag", &diag), ("sup", &sup)] {
            for (i, b) in list.iter().enumerate() {
                if b.rows() != n || b.cols() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} block {i} is {}x{}, expected {n}x{n}",
                        b.rows(),
                        b.cols()
                    )));
                }
            }
        }
        Ok(Self { n, m, sub, diag, sup, toeplitz: false })
    }

    /// Block Toeplitz constructor: the same three blocks repeated `m` times.
    ///
    /// The Toeplitz flag is recorded so bound routines can assert that their
    /// single-symbol formulas apply.
    pub fn toeplitz(m: usize, sub: Matrix, diag: Matrix, sup: Matrix) -> Result<Self> {
        let subs = vec![sub; m.saturating_sub(1)];
        let sups = vec![sup; m.saturating_sub(1)];
        let diags = vec![diag; m];
        let mut bt = Self::new(subs, diags, sups)?;
        bt.toeplitz = true;
        Ok(bt)
    }

    pub fn block_dim(&self) -> usize {
        self.n
    }

    pub fn block_rows(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    pub fn is_toeplitz(&self) -> bool {
        self.toeplitz
    }

    pub fn diag_block(&self, i: usize) -> &Matrix {
        &self.diag[i]
    }

    /// Sub-diagonal block at position `(i+1, i)`, `i < m - 1`.
    pub fn sub_block(&self, i: usize) -> &Matrix {
        &self.sub[i]
    }

    /// Super-diagonal block at position `(i, i+1)`, `i < m - 1`.
    pub fn sup_block(&self, i: usize) -> &Matrix {
        &self.sup[i]
    }

    pub fn materialize(&self) -> Matrix {
        let mut out = Matrix::zeros(self.dim(), self.dim());
        let n = self.n;
        for i in 0..self.m {
            out.set_block(i * n, i * n, &self.diag[i]);
            if i + 1 < self.m {
                out.set_block((i + 1) * n, i * n, &self.sub[i]);
                out.set_block(i * n, (i + 1) * n, &self.sup[i]);
            }
        }
        out
    }

    /// Block LU factorization (no block pivoting across block rows).
    ///
    /// Falls back to a dense LU of the materialized matrix when some Schur
    /// block fails to factor, which can happen for matrices that are regular
    /// but not block-wise eliminable.
    pub fn factor(&self) -> Result<BlockTridiagFactor> {
        match self.factor_blockwise() {
            Ok(f) => Ok(f),
            Err(Error::SingularMatrix(_)) => {
                let dense = self.materialize().lu().map_err(|e| match e {
                    Error::SingularMatrix(msg) => {
                        Error::SingularMatrix(format!("block tridiagonal matrix: {msg}"))
                    }
                    other => other,
                })?;
                Ok(BlockTridiagFactor {
                    n: self.n,
                    m: self.m,
                    kind: FactorKind::Dense(dense),
                })
            }
            Err(e) => Err(e),
        }
    }

    fn factor_blockwise(&self) -> Result<BlockTridiagFactor> {
        let mut d_factors = Vec::with_capacity(self.m);
        let mut l_blocks = Vec::with_capacity(self.m.saturating_sub(1));
        let mut d = self.diag[0].clone();
        d_factors.push(d.lu()?);
        for i in 1..self.m {
            // L_i = C_{i-1} D_{i-1}^{-1}, via D_{i-1}' X' = C_{i-1}'.
            let li = d_factors[i - 1]
                .solve_transposed(&self.sub[i - 1].transpose())
                .map(|x| x.transpose())?;
            d = self.diag[i].sub(&li.mul(&self.sup[i - 1]));
            d_factors.push(d.lu()?);
            l_blocks.push(li);
        }
        Ok(BlockTridiagFactor {
            n: self.n,
            m: self.m,
            kind: FactorKind::Blockwise {
                d_factors,
                l_blocks,
                sup: self.sup.clone(),
            },
        })
    }

    /// Block column strip of the inverse against the first or last block
    /// column: solves the wing against `e_j (x) I_n`.
    pub fn inverse_column_strip(&self, side: StripSide) -> Result<InverseStrip> {
        let factor = self.factor()?;
        let mut rhs = Matrix::zeros(self.dim(), self.n);
        let j = match side {
            StripSide::First => 0,
            StripSide::Last => self.m - 1,
        };
        rhs.set_block(j * self.n, 0, &Matrix::identity(self.n));
        let sol = factor.solve_matrix(&rhs)?;
        let blocks = (0..self.m)
            .map(|i| sol.block(i * self.n, 0, self.n, self.n))
            .collect();
        Ok(InverseStrip { n: self.n, m: self.m, side, blocks })
    }
}

/// Which block column of the inverse a strip extraction targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StripSide {
    First,
    Last,
}

/// One block column of the inverse of a block tridiagonal matrix.
#[derive(Clone, Debug)]
pub struct InverseStrip {
    n: usize,
    m: usize,
    side: StripSide,
    blocks: Vec<Matrix>,
}

impl InverseStrip {
    pub fn side(&self) -> StripSide {
        self.side
    }

    pub fn block_rows(&self) -> usize {
        self.m
    }

    /// Block `Z_{i,j}` of the inverse, `i` zero-based, `j` fixed by the side.
    pub fn block(&self, i: usize) -> &Matrix {
        &self.blocks[i]
    }

    /// Corner block: `Z_{1,1}` for a first-column strip, `Z_{m,m}` for last.
    pub fn corner(&self) -> &Matrix {
        match self.side {
            StripSide::First => &self.blocks[0],
            StripSide::Last => &self.blocks[self.m - 1],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

enum FactorKind {
    Blockwise {
        d_factors: Vec<crate::dense::LuFactors>,
        l_blocks: Vec<Matrix>,
        sup: Vec<Matrix>,
    },
    Dense(crate::dense::LuFactors),
}

/// Factorization of a block tridiagonal matrix, reusable across solves.
pub struct BlockTridiagFactor {
    n: usize,
    m: usize,
    kind: FactorKind,
}

impl BlockTridiagFactor {
    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    /// Solves against a dense right-hand side with any number of columns.
    pub fn solve_matrix(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.rows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} rows, system has {}",
                rhs.rows(),
                self.dim()
            )));
        }
        match &self.kind {
            FactorKind::Dense(lu) => lu.solve(rhs),
            FactorKind::Blockwise { d_factors, l_blocks, sup } => {
                let n = self.n;
                let k = rhs.cols();
                // Forward sweep: y_i = r_i - L_i y_{i-1}.
                let mut y: Vec<Matrix> = Vec::with_capacity(self.m);
                y.push(rhs.block(0, 0, n, k));
                for i in 1..self.m {
                    let r = rhs.block(i * n, 0, n, k);
                    y.push(r.sub(&l_blocks[i - 1].mul(&y[i - 1])));
                }
                // Back sweep: x_m = D_m^{-1} y_m; x_i = D_i^{-1}(y_i - B_i x_{i+1}).
                let mut x: Vec<Option<Matrix>> = vec![None; self.m];
                x[self.m - 1] = Some(d_factors[self.m - 1].solve(&y[self.m - 1])?);
                for i in (0..self.m - 1).rev() {
                    let upd = y[i].sub(&sup[i].mul(x[i + 1].as_ref().unwrap()));
                    x[i] = Some(d_factors[i].solve(&upd)?);
                }
                let mut out = Matrix::zeros(self.dim(), k);
                for (i, xi) in x.into_iter().enumerate() {
                    out.set_block(i * n, 0, &xi.unwrap());
                }
                Ok(out)
            }
        }
    }

    pub fn solve_vec(&self, rhs: &Vector) -> Result<Vector> {
        let m = Matrix::new(rhs.len(), 1, rhs.data().to_vec())?;
        let x = self.solve_matrix(&m)?;
        Ok(Vector::new(x.data().to_vec())?)
    }
}

/// Identifies one of the two overlapping subdomains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subdomain {
    /// Leading `n(m+1)` rows/columns: top wing plus center.
    Top,
    /// Trailing `n(m+1)` rows/columns: center plus bottom wing.
    Bottom,
}

/// Block-arrow system with two wings of equal block order.
#[derive(Clone, Debug)]
pub struct BlockArrowSystem {
    n: usize,
    m: usize,
    wing_top: BlockTridiagonal,
    wing_bottom: BlockTridiagonal,
    center: Matrix,
    coupling_b: Matrix,
    coupling_c: Matrix,
    coupling_bh: Matrix,
    coupling_ch: Matrix,
}

impl BlockArrowSystem {
    /// Validates block shapes and assembles the system.
    ///
    /// `coupling_bh` sits at block position `(m, m+1)` (top wing to center),
    /// `coupling_c` at `(m+1, m)`, `coupling_b` at `(m+1, m+2)`, and
    /// `coupling_ch` at `(m+2, m+1)`, in one-based block coordinates.
    pub fn assemble(
        wing_top: BlockTridiagonal,
        wing_bottom: BlockTridiagonal,
        center: Matrix,
        coupling_b: Matrix,
        coupling_c: Matrix,
        coupling_bh: Matrix,
        coupling_ch: Matrix,
    ) -> Result<Self> {
        let n = wing_top.block_dim();
        let m = wing_top.block_rows();
        if wing_bottom.block_dim() != n || wing_bottom.block_rows() != m {
            return Err(Error::DimensionMismatch(format!(
                "wings disagree: top is {m} rows of {n}x{n}, bottom is {} rows of {}x{}",
                wing_bottom.block_rows(),
                wing_bottom.block_dim(),
                wing_bottom.block_dim()
            )));
        }
        for (name, b) in [
            ("center", &center),
            ("coupling_b", &coupling_b),
            ("coupling_c", &coupling_c),
            ("coupling_bh", &coupling_bh),
            ("coupling_ch", &coupling_ch),
        ] {
            if b.rows() != n || b.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(Self {
            n,
            m,
            wing_top,
            wing_bottom,
            center,
            coupling_b,
            coupling_c,
            coupling_bh,
            coupling_ch,
        })
    }

    pub fn block_dim(&self) -> usize {
        self.n
    }

    /// Number of block rows per wing.
    pub fn wing_rows(&self) -> usize {
        self.m
    }

    /// Total dimension `n (2m + 1)`.
    pub fn dim(&self) -> usize {
        self.n * (2 * self.m + 1)
    }

    pub fn wing_top(&self) -> &BlockTridiagonal {
        &self.wing_top
    }

    pub fn wing_bottom(&self) -> &BlockTridiagonal {
        &self.wing_bottom
    }

    pub fn center(&self) -> &Matrix {
        &self.center
    }

    pub fn coupling_b(&self) -> &Matrix {
        &self.coupling_b
    }

    pub fn coupling_c(&self) -> &Matrix {
        &self.coupling_c
    }

    pub fn coupling_bh(&self) -> &Matrix {
        &self.coupling_bh
    }

    pub fn coupling_ch(&self) -> &Matrix {
        &self.coupling_ch
    }

    /// Dense form of the whole system; refuses dimensions above 4000.
    pub fn materialize_dense(&self) -> Result<Matrix> {
        if self.dim() > MATERIALIZE_LIMIT {
            return Err(Error::SizeLimitExceeded(format!(
                "dense materialization of dimension {} exceeds {}",
                self.dim(),
                MATERIALIZE_LIMIT
            )));
        }
        let n = self.n;
        let m = self.m;
        let mut out = Matrix::zeros(self.dim(), self.dim());
        out.set_block(0, 0, &self.wing_top.materialize());
        out.set_block((m + 1) * n, (m + 1) * n, &self.wing_bottom.materialize());
        out.set_block(m * n, m * n, &self.center);
        // Couplings around the center block row/column.
        out.set_block((m - 1) * n, m * n, &self.coupling_bh);
        out.set_block(m * n, (m - 1) * n, &self.coupling_c);
        out.set_block(m * n, (m + 1) * n, &self.coupling_b);
        out.set_block((m + 1) * n, m * n, &self.coupling_ch);
        Ok(out)
    }

    /// The subdomain matrix `A_1` or `A_2` as a block tridiagonal of `m + 1`
    /// block rows; this is the exact principal submatrix of the system.
    pub fn subdomain_matrix(&self, which: Subdomain) -> BlockTridiagonal {
        let mut sub = Vec::with_capacity(self.m);
        let mut diag = Vec::with_capacity(self.m + 1);
        let mut sup = Vec::with_capacity(self.m);
        match which {
            Subdomain::Top => {
                for i in 0..self.m {
                    diag.push(self.wing_top.diag_block(i).clone());
                    if i + 1 < self.m {
                        sub.push(self.wing_top.sub_block(i).clone());
                        sup.push(self.wing_top.sup_block(i).clone());
                    }
                }
                sub.push(self.coupling_c.clone());
                sup.push(self.coupling_bh.clone());
                diag.push(self.center.clone());
            }
            Subdomain::Bottom => {
                diag.push(self.center.clone());
                sub.push(self.coupling_ch.clone());
                sup.push(self.coupling_b.clone());
                for i in 0..self.m {
                    diag.push(self.wing_bottom.diag_block(i).clone());
                    if i + 1 < self.m {
                        sub.push(self.wing_bottom.sub_block(i).clone());
                        sup.push(self.wing_bottom.sup_block(i).clone());
                    }
                }
            }
        }
        BlockTridiagonal::new(sub, diag, sup).expect("subdomain blocks are consistent")
    }

    /// Dense principal submatrix `A_1` (Top) or `A_2` (Bottom).
    pub fn restrict(&self, which: Subdomain) -> Matrix {
        self.subdomain_matrix(which).materialize()
    }

    /// Structured matrix-vector product with the full system.
    pub fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.len(), self.dim(), "apply length mismatch");
        let n = self.n;
        let m = self.m;
        let mut out = Vector::zeros(self.dim());
        let block = |i: usize| x.block_vector(i, n);
        // Top wing rows plus the B_H coupling on its last row.
        for i in 0..m {
            let mut acc = self.wing_top.diag_block(i).mul_vec(&block(i));
            if i > 0 {
                acc = acc.add(&self.wing_top.sub_block(i - 1).mul_vec(&block(i - 1)));
            }
            if i + 1 < m {
                acc = acc.add(&self.wing_top.sup_block(i).mul_vec(&block(i + 1)));
            } else {
                acc = acc.add(&self.coupling_bh.mul_vec(&block(m)));
            }
            out.set_block(i, n, acc.data());
        }
        // Center row.
        let mut acc = self.center.mul_vec(&block(m));
        acc = acc.add(&self.coupling_c.mul_vec(&block(m - 1)));
        acc = acc.add(&self.coupling_b.mul_vec(&block(m + 1)));
        out.set_block(m, n, acc.data());
        // Bottom wing rows plus the C_h coupling on its first row.
        for i in 0..m {
            let row = m + 1 + i;
            let mut acc = self.wing_bottom.diag_block(i).mul_vec(&block(row));
            if i > 0 {
                acc = acc.add(&self.wing_bottom.sub_block(i - 1).mul_vec(&block(row - 1)));
            } else {
                acc = acc.add(&self.coupling_ch.mul_vec(&block(m)));
            }
            if i + 1 < m {
                acc = acc.add(&self.wing_bottom.sup_block(i).mul_vec(&block(row + 1)));
            }
            out.set_block(row, n, acc.data());
        }
        out
    }
}

/// Factored subdomain matrices, reusable across Schwarz sweeps.
pub struct LocalSolvers {
    n: usize,
    m: usize,
    top: BlockTridiagFactor,
    bottom: BlockTridiagFactor,
}

impl LocalSolvers {
    pub fn new(sys: &BlockArrowSystem) -> Result<Self> {
        let top = sys
            .subdomain_matrix(Subdomain::Top)
            .factor()
            .map_err(|e| wrap_subdomain(e, "A1"))?;
        let bottom = sys
            .subdomain_matrix(Subdomain::Bottom)
            .factor()
            .map_err(|e| wrap_subdomain(e, "A2"))?;
        Ok(Self { n: sys.block_dim(), m: sys.wing_rows(), top, bottom })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn factor(&self, which: Subdomain) -> &BlockTridiagFactor {
        match which {
            Subdomain::Top => &self.top,
            Subdomain::Bottom => &self.bottom,
        }
    }

    /// `R_i' A_i^{-1} R_i r`: restrict, solve on the subdomain, pad with zeros.
    pub fn correction(&self, which: Subdomain, r: &Vector) -> Result<Vector> {
        let local_len = self.n * (self.m + 1);
        let offset = match which {
            Subdomain::Top => 0,
            Subdomain::Bottom => self.n * self.m,
        };
        let local = Vector::new(r.data()[offset..offset + local_len].to_vec())?;
        let sol = self.factor(which).solve_vec(&local)?;
        let mut out = Vector::zeros(r.len());
        for (i, v) in sol.data().iter().enumerate() {
            out[offset + i] = *v;
        }
        Ok(out)
    }
}

fn wrap_subdomain(e: Error, name: &str) -> Error {
    match e {
        Error::SingularMatrix(msg) => {
            Error::SingularMatrix(format!("local solve on {name} failed: {msg}"))
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 3x3 scalar chain tridiag(-1, 2, -1) as a block-arrow system with
    /// n = 1, m = 1.
    pub(crate) fn scalar_chain() -> BlockArrowSystem {
        let one = |v: f64| Matrix::new(1, 1, vec![v]).unwrap();
        let wing = |v: f64| BlockTridiagonal::toeplitz(1, one(0.0), one(v), one(0.0)).unwrap();
        BlockArrowSystem::assemble(
            wing(2.0),
            wing(2.0),
            one(2.0),
            one(-1.0),
            one(-1.0),
            one(-1.0),
            one(-1.0),
        )
        .unwrap()
    }

    #[test]
    fn scalar_chain_materializes_to_tridiag() {
        let sys = scalar_chain();
        let dense = sys.materialize_dense().unwrap();
        let expected = Matrix::tridiag_toeplitz(3, -1.0, 2.0, -1.0);
        assert_eq!(dense.data(), expected.data());
    }

    #[test]
    fn coupling_block_positions() {
        // n = 2, m = 3, distinct couplings; check placements in the dense form.
        let n = 2;
        let m = 3;
        let c = |v: f64| Matrix::scaled_identity(n, v);
        let wing = BlockTridiagonal::toeplitz(m, c(-1.0), c(4.0), c(-2.0)).unwrap();
        let sys = BlockArrowSystem::assemble(
            wing.clone(),
            wing,
            c(5.0),
            c(-7.0),
            c(-8.0),
            c(-9.0),
            c(-10.0),
        )
        .unwrap();
        let dense = sys.materialize_dense().unwrap();
        // B_H at block (m, m+1); C at (m+1, m); B at (m+1, m+2); C_h at (m+2, m+1).
        assert_eq!(dense[((m - 1) * n, m * n)], -9.0);
        assert_eq!(dense[(m * n, (m - 1) * n)], -8.0);
        assert_eq!(dense[(m * n, (m + 1) * n)], -7.0);
        assert_eq!(dense[((m + 1) * n, m * n)], -10.0);
        // Wing interior bands.
        assert_eq!(dense[(n, 0)], -1.0);
        assert_eq!(dense[(0, n)], -2.0);
    }

    #[test]
    fn restrict_matches_dense_principal_submatrix() {
        let n = 2;
        let m = 2;
        let c = |v: f64| Matrix::scaled_identity(n, v);
        let wing = BlockTridiagonal::toeplitz(m, c(-1.0), c(4.0), c(-1.0)).unwrap();
        let sys = BlockArrowSystem::assemble(
            wing.clone(),
            wing,
            c(4.0),
            c(-1.0),
            c(-1.0),
            c(-1.0),
            c(-1.0),
        )
        .unwrap();
        let dense = sys.materialize_dense().unwrap();
        let local = n * (m + 1);
        let top = sys.restrict(Subdomain::Top);
        let bottom = sys.restrict(Subdomain::Bottom);
        assert_eq!(top.data(), dense.block(0, 0, local, local).data());
        let off = n * m;
        assert_eq!(bottom.data(), dense.block(off, off, local, local).data());
    }

    #[test]
    fn poisson_like_restrict_shape() {
        // m = 1, W = tridiag(-1, 4, -1) of order 3: A_1 = [[W, -I], [-I, W]].
        let w = Matrix::tridiag_toeplitz(3, -1.0, 4.0, -1.0);
        let id = Matrix::scaled_identity(3, -1.0);
        let wing = BlockTridiagonal::toeplitz(1, Matrix::zeros(3, 3), w.clone(), Matrix::zeros(3, 3))
            .unwrap();
        let sys = BlockArrowSystem::assemble(
            wing.clone(),
            wing,
            w.clone(),
            id.clone(),
            id.clone(),
            id.clone(),
            id,
        )
        .unwrap();
        let top = sys.restrict(Subdomain::Top);
        assert_eq!(top.rows(), 6);
        assert_eq!(top[(0, 0)], 4.0);
        assert_eq!(top[(0, 3)], -1.0);
        assert_eq!(top[(3, 0)], -1.0);
        assert_eq!(top[(5, 5)], 4.0);
    }

    #[test]
    fn apply_matches_dense_matvec() {
        let n = 2;
        let mut next = 0.3_f64;
        let mut blk = || {
            // Deterministic, mildly varying blocks.
            let mut data = Vec::new();
            for _ in 0..n * n {
                next = (next * 997.0 + 0.123).rem_euclid(2.0) - 1.0;
                data.push(next);
            }
            let mut m = Matrix::new(n, n, data).unwrap();
            for i in 0..n {
                m[(i, i)] += 4.0;
            }
            m
        };
        let wing_top = BlockTridiagonal::new(
            vec![blk(), blk()],
            vec![blk(), blk(), blk()],
            vec![blk(), blk()],
        )
        .unwrap();
        let wing_bottom = BlockTridiagonal::new(
            vec![blk(), blk()],
            vec![blk(), blk(), blk()],
            vec![blk(), blk()],
        )
        .unwrap();
        let sys = BlockArrowSystem::assemble(
            wing_top,
            wing_bottom,
            blk(),
            blk(),
            blk(),
            blk(),
            blk(),
        )
        .unwrap();
        let x = Vector::new((0..sys.dim()).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let dense = sys.materialize_dense().unwrap();
        let want = dense.mul_vec(&x);
        let got = sys.apply(&x);
        let diff = want.sub(&got).inf_norm();
        assert!(diff < 1e-12 * want.inf_norm().max(1.0), "diff {diff}");
    }

    #[test]
    fn strip_of_single_block_wing_is_inverse() {
        let wing = BlockTridiagonal::toeplitz(
            1,
            Matrix::zeros(1, 1),
            Matrix::new(1, 1, vec![2.0]).unwrap(),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let strip = wing.inverse_column_strip(StripSide::First).unwrap();
        assert_eq!(strip.block(0)[(0, 0)], 0.5);
    }

    #[test]
    fn strip_of_scalar_wing_m2_last_column() {
        // tridiag(-1, 2, -1) of order 2: inverse is (1/3) [[2, 1], [1, 2]];
        // the last column strip is [1/3, 2/3].
        let one = |v: f64| Matrix::new(1, 1, vec![v]).unwrap();
        let wing = BlockTridiagonal::toeplitz(2, one(-1.0), one(2.0), one(-1.0)).unwrap();
        let strip = wing.inverse_column_strip(StripSide::Last).unwrap();
        assert!((strip.block(0)[(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!((strip.block(1)[(0, 0)] - 2.0 / 3.0).abs() < 1e-14);
        assert!((strip.corner()[(0, 0)] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn strip_matches_dense_inverse_columns() {
        let n = 3;
        let m = 4;
        let sub = Matrix::scaled_identity(n, -1.0);
        let diag = Matrix::tridiag_toeplitz(n, -1.0, 5.0, -1.0);
        let sup = Matrix::scaled_identity(n, -1.5);
        let wing = BlockTridiagonal::toeplitz(m, sub, diag, sup).unwrap();
        let inv = wing.materialize().inverse().unwrap();
        for (side, j) in [(StripSide::First, 0), (StripSide::Last, m - 1)] {
            let strip = wing.inverse_column_strip(side).unwrap();
            for i in 0..m {
                let want = inv.block(i * n, j * n, n, n);
                let diff = want.sub(strip.block(i)).inf_norm();
                assert!(diff < 1e-10, "strip block {i} differs by {diff}");
            }
        }
    }

    #[test]
    fn blockwise_solve_matches_dense_on_varied_blocks() {
        // Distinct non-symmetric blocks in every band, so the blockwise
        // elimination path is exercised with no structure to hide behind.
        let n = 2;
        let mut next = 0.41_f64;
        let mut blk = |shift: f64| {
            let mut data = Vec::new();
            for _ in 0..n * n {
                next = (next * 997.0 + 0.123).rem_euclid(1.0) - 0.5;
                data.push(next);
            }
            let mut m = Matrix::new(n, n, data).unwrap();
            for i in 0..n {
                m[(i, i)] += shift;
            }
            m
        };
        let bt = BlockTridiagonal::new(
            vec![blk(0.0), blk(0.0), blk(0.0)],
            vec![blk(4.0), blk(4.0), blk(4.0), blk(4.0)],
            vec![blk(0.0), blk(0.0), blk(0.0)],
        )
        .unwrap();
        let f = bt.factor().unwrap();
        let rhs = Matrix::from_fn(bt.dim(), 3, |i, j| ((i + 2 * j) as f64 * 0.29).sin());
        let got = f.solve_matrix(&rhs).unwrap();
        let want = bt.materialize().lu().unwrap().solve(&rhs).unwrap();
        let diff = got.sub(&want).inf_norm();
        assert!(diff < 1e-12, "blockwise solve differs by {diff}");
    }

    #[test]
    fn blockwise_factor_falls_back_to_dense() {
        // Leading diagonal block is singular, so blockwise elimination fails,
        // but the materialized matrix is regular.
        let zero = Matrix::zeros(1, 1);
        let one = |v: f64| Matrix::new(1, 1, vec![v]).unwrap();
        let bt = BlockTridiagonal::new(
            vec![one(1.0)],
            vec![zero, one(1.0)],
            vec![one(1.0)],
        )
        .unwrap();
        let f = bt.factor().unwrap();
        let x = f.solve_vec(&Vector::new(vec![1.0, 1.0]).unwrap()).unwrap();
        // [[0, 1], [1, 1]] x = [1, 1] has solution [0, 1].
        assert!((x[0] - 0.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn materialize_size_limit() {
        let one = Matrix::new(1, 1, vec![1.0]).unwrap();
        let wing =
            BlockTridiagonal::toeplitz(2100, one.clone(), one.clone(), one.clone()).unwrap();
        let sys = BlockArrowSystem::assemble(
            wing.clone(),
            wing,
            one.clone(),
            one.clone(),
            one.clone(),
            one.clone(),
            one,
        )
        .unwrap();
        assert!(matches!(
            sys.materialize_dense(),
            Err(Error::SizeLimitExceeded(_))
        ));
    }

    #[test]
    fn assemble_rejects_mismatched_coupling() {
        let one = Matrix::new(1, 1, vec![2.0]).unwrap();
        let wing = BlockTridiagonal::toeplitz(
            1,
            Matrix::zeros(1, 1),
            one.clone(),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let bad = Matrix::identity(2);
        let err = BlockArrowSystem::assemble(
            wing.clone(),
            wing,
            one.clone(),
            bad,
            one.clone(),
            one.clone(),
            one,
        )
        .unwrap_err();
        match err {
            Error::DimensionMismatch(msg) => assert!(msg.contains("coupling_b"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn local_solver_correction_is_padded_local_solve() {
        let sys = scalar_chain();
        let solvers = LocalSolvers::new(&sys).unwrap();
        let b = Vector::new(vec![1.0, 1.0, 1.0]).unwrap();
        // A_1 = [[2,-1],[-1,2]], A_1^{-1} [1,1]' = [1,1]'.
        let top = solvers.correction(Subdomain::Top, &b).unwrap();
        assert!((top[0] - 1.0).abs() < 1e-14);
        assert!((top[1] - 1.0).abs() < 1e-14);
        assert_eq!(top[2], 0.0);
        let bottom = solvers.correction(Subdomain::Bottom, &b).unwrap();
        assert_eq!(bottom[0], 0.0);
        assert!((bottom[1] - 1.0).abs() < 1e-14);
        assert!((bottom[2] - 1.0).abs() < 1e-14);
    }
}
