//! A-priori convergence machinery built from block diagonal dominance: row
//! and column dominance checks, the Neumann-series eta factors bounding the
//! extreme inverse blocks of the wings, convergence-factor and sweep-norm
//! bounds, per-iteration bound curves, and off-diagonal decay profiles for
//! inverses of block tridiagonal matrices.
//!
//! Everything here is a pure function of norms of single blocks; no routine
//! touches the assembled system, so bound evaluation stays cheap no matter
//! how long the wings are.

use serde::Serialize;

use crate::block::{BlockArrowSystem, BlockTridiagonal, StripSide};
use crate::dense::{Matrix, NormKind};
use crate::error::{Error, Result};
use crate::operator::SweepOrdering;

/// Tolerance band around 1 for dominance classification; systems sitting
/// exactly at equality must classify as weakly dominant.
pub const DOMINANCE_TOL: f64 = 1e-12;

/// Which side of the block was scaled by the inverse of the diagonal block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DominanceKind {
    Row,
    Column,
}

impl DominanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DominanceKind::Row => "row",
            DominanceKind::Column => "column",
        }
    }
}

/// Outcome of a block diagonal dominance check.
#[derive(Clone, Debug)]
pub struct DominanceReport {
    pub kind: DominanceKind,
    /// One sum per block row (or column): the off-diagonal block norms after
    /// scaling by the inverse diagonal block.
    pub sums: Vec<f64>,
    pub weakly_dominant: bool,
    pub strictly_dominant: bool,
    pub norm: NormKind,
}

fn classify(kind: DominanceKind, sums: Vec<f64>, norm: NormKind) -> DominanceReport {
    let weakly_dominant = sums.iter().all(|s| *s <= 1.0 + DOMINANCE_TOL);
    let strictly_dominant = sums.iter().all(|s| *s < 1.0 - DOMINANCE_TOL);
    DominanceReport { kind, sums, weakly_dominant, strictly_dominant, norm }
}

/// Norm of `inv(a) * x` without forming the inverse.
fn inv_times(a: &Matrix, x: &Matrix, norm: NormKind, what: &str) -> Result<f64> {
    let lu = a.lu().map_err(|e| name_block(e, what))?;
    lu.solve(x)?.norm(norm)
}

/// Norm of `x * inv(a)` without forming the inverse.
fn times_inv(x: &Matrix, a: &Matrix, norm: NormKind, what: &str) -> Result<f64> {
    let lu = a.lu().map_err(|e| name_block(e, what))?;
    Ok(lu.solve_transposed(&x.transpose())?.transpose().norm(norm)?)
}

fn name_block(e: Error, what: &str) -> Error {
    match e {
        Error::SingularMatrix(msg) => Error::SingularMatrix(format!("{what}: {msg}")),
        other => other,
    }
}

/// Evaluates row block diagonal dominance over every block row of the full
/// system, couplings included.
pub fn check_row_dominance(sys: &BlockArrowSystem, norm: NormKind) -> Result<DominanceReport> {
    let m = sys.wing_rows();
    let top = sys.wing_top();
    let bottom = sys.wing_bottom();
    let mut sums = Vec::with_capacity(2 * m + 1);
    for i in 0..m {
        let diag = top.diag_block(i);
        let what = format!("top wing diagonal block {i}");
        let mut s = 0.0;
        if i > 0 {
            s += inv_times(diag, top.sub_block(i - 1), norm, &what)?;
        }
        if i + 1 < m {
            s += inv_times(diag, top.sup_block(i), norm, &what)?;
        } else {
            s += inv_times(diag, sys.coupling_bh(), norm, &what)?;
        }
        sums.push(s);
    }
    {
        let what = "center diagonal block";
        let s = inv_times(sys.center(), sys.coupling_c(), norm, what)?
            + inv_times(sys.center(), sys.coupling_b(), norm, what)?;
        sums.push(s);
    }
    for i in 0..m {
        let diag = bottom.diag_block(i);
        let what = format!("bottom wing diagonal block {i}");
        let mut s = 0.0;
        if i == 0 {
            s += inv_times(diag, sys.coupling_ch(), norm, &what)?;
        } else {
            s += inv_times(diag, bottom.sub_block(i - 1), norm, &what)?;
        }
        if i + 1 < m {
            s += inv_times(diag, bottom.sup_block(i), norm, &what)?;
        }
        sums.push(s);
    }
    Ok(classify(DominanceKind::Row, sums, norm))
}

/// Evaluates column block diagonal dominance of a block tridiagonal matrix:
/// per column, the norms of the off-diagonal blocks postmultiplied by the
/// inverse of that column's diagonal block.
pub fn check_column_dominance(
    wing: &BlockTridiagonal,
    norm: NormKind,
) -> Result<DominanceReport> {
    let m = wing.block_rows();
    let mut sums = Vec::with_capacity(m);
    for j in 0..m {
        let diag = wing.diag_block(j);
        let what = format!("diagonal block {j}");
        let mut s = 0.0;
        if j > 0 {
            s += times_inv(wing.sup_block(j - 1), diag, norm, &what)?;
        }
        if j + 1 < m {
            s += times_inv(wing.sub_block(j), diag, norm, &what)?;
        }
        sums.push(s);
    }
    Ok(classify(DominanceKind::Column, sums, norm))
}

/// Neumann-series factors bounding the corner blocks of the wing inverses
/// next to the center row: `top` bounds the norm of `Z_mm * B_H` through the
/// top wing, `bottom` bounds `Z_11 * C_h` through the bottom wing. The `min`
/// variants take the smaller of the row-dominance route and the
/// column-dominance route, which can be far sharper.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EtaFactors {
    pub top: f64,
    pub bottom: f64,
    pub top_min: f64,
    pub bottom_min: f64,
    #[serde(skip)]
    pub norm: NormKind,
}

/// Selects between the plain eta factors and their min variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaVariant {
    Plain,
    Min,
}

impl EtaFactors {
    fn pick(&self, variant: EtaVariant) -> (f64, f64) {
        match variant {
            EtaVariant::Plain => (self.top, self.bottom),
            EtaVariant::Min => (self.top_min, self.bottom_min),
        }
    }
}

/// Computes the eta factors for a system with block Toeplitz wings.
///
/// An `m = 1` wing has no interior off-diagonal blocks; the Neumann
/// denominators are then 1 and the factor degenerates to a single scaled
/// block norm.
pub fn eta_factors(sys: &BlockArrowSystem, norm: NormKind) -> Result<EtaFactors> {
    if !sys.wing_top().is_toeplitz() || !sys.wing_bottom().is_toeplitz() {
        return Err(Error::PreconditionFailed(
            "eta factors are defined for block Toeplitz wings".into(),
        ));
    }
    let m = sys.wing_rows();
    let top_diag = sys.wing_top().diag_block(0);
    let bottom_diag = sys.wing_bottom().diag_block(0);

    // Top wing: coupling to the center through its super-diagonal side.
    let top_coupling = inv_times(top_diag, sys.coupling_bh(), norm, "top wing diagonal")?;
    let top_interior = if m >= 2 {
        inv_times(top_diag, sys.wing_top().sub_block(0), norm, "top wing diagonal")?
    } else {
        0.0
    };
    let denom_top = 1.0 - top_interior;
    if denom_top <= 0.0 {
        return Err(Error::DominanceViolated(format!(
            "top wing Neumann denominator 1 - {top_interior:.3e} is not positive"
        )));
    }
    let top = top_coupling / denom_top;

    // Bottom wing: coupling through its sub-diagonal side.
    let bottom_coupling =
        inv_times(bottom_diag, sys.coupling_ch(), norm, "bottom wing diagonal")?;
    let bottom_interior = if m >= 2 {
        inv_times(bottom_diag, sys.wing_bottom().sup_block(0), norm, "bottom wing diagonal")?
    } else {
        0.0
    };
    let denom_bottom = 1.0 - bottom_interior;
    if denom_bottom <= 0.0 {
        return Err(Error::DominanceViolated(format!(
            "bottom wing Neumann denominator 1 - {bottom_interior:.3e} is not positive"
        )));
    }
    let bottom = bottom_coupling / denom_bottom;

    // Column-dominance route: norm of the inverse diagonal block times the
    // coupling norm, against the column-scaled interior block.
    let top_min = {
        let inv_norm = top_diag.inverse()?.norm(norm)?;
        let col_interior = if m >= 2 {
            times_inv(sys.wing_top().sup_block(0), top_diag, norm, "top wing diagonal")?
        } else {
            0.0
        };
        let denom = 1.0 - col_interior;
        if denom > 0.0 {
            top.min(inv_norm * sys.coupling_bh().norm(norm)? / denom)
        } else {
            top
        }
    };
    let bottom_min = {
        let inv_norm = bottom_diag.inverse()?.norm(norm)?;
        let col_interior = if m >= 2 {
            times_inv(sys.wing_bottom().sub_block(0), bottom_diag, norm, "bottom wing diagonal")?
        } else {
            0.0
        };
        let denom = 1.0 - col_interior;
        if denom > 0.0 {
            bottom.min(inv_norm * sys.coupling_ch().norm(norm)? / denom)
        } else {
            bottom
        }
    };

    Ok(EtaFactors { top, bottom, top_min, bottom_min, norm })
}

/// Norms of the two center-row solves that appear in every bound here.
fn center_ratios(sys: &BlockArrowSystem, norm: NormKind) -> Result<(f64, f64)> {
    let b = inv_times(sys.center(), sys.coupling_b(), norm, "center diagonal block")?;
    let c = inv_times(sys.center(), sys.coupling_c(), norm, "center diagonal block")?;
    Ok((b, c))
}

/// A-priori bound on the exact convergence factor: the product of the two
/// per-subdomain contraction factors.
pub fn rho_bound(
    etas: &EtaFactors,
    sys: &BlockArrowSystem,
    variant: EtaVariant,
) -> Result<f64> {
    let (eta_top, eta_bottom) = etas.pick(variant);
    let (ac_b, ac_c) = center_ratios(sys, etas.norm)?;
    let denom_bottom = 1.0 - eta_bottom * ac_b;
    let denom_top = 1.0 - eta_top * ac_c;
    if denom_bottom <= 0.0 || denom_top <= 0.0 {
        return Err(Error::DominanceViolated(
            "a denominator in the convergence-factor bound is not positive".into(),
        ));
    }
    Ok((eta_bottom * ac_c / denom_bottom) * (eta_top * ac_b / denom_top))
}

/// A-priori bound on the sweep operator norm (with constant 1, exact for the
/// ∞-norm).
pub fn t_norm_bound(
    etas: &EtaFactors,
    sys: &BlockArrowSystem,
    ordering: SweepOrdering,
    variant: EtaVariant,
) -> Result<f64> {
    let (eta_top, eta_bottom) = etas.pick(variant);
    let (ac_b, ac_c) = center_ratios(sys, etas.norm)?;
    match ordering {
        SweepOrdering::T12 => {
            let denom = 1.0 - eta_top * ac_c;
            if denom <= 0.0 {
                return Err(Error::DominanceViolated(
                    "sweep-norm bound denominator is not positive".into(),
                ));
            }
            Ok(eta_top * ac_b / denom)
        }
        SweepOrdering::T21 => {
            let denom = 1.0 - eta_bottom * ac_b;
            if denom <= 0.0 {
                return Err(Error::DominanceViolated(
                    "sweep-norm bound denominator is not positive".into(),
                ));
            }
            Ok(eta_bottom * ac_c / denom)
        }
    }
}

/// A-priori bounds on the norms of the two center-row responses: the first
/// entry bounds the subdomain-1 response block, the second the subdomain-2
/// one.
pub fn pi_norm_bounds(etas: &EtaFactors, sys: &BlockArrowSystem) -> Result<(f64, f64)> {
    let (ac_b, ac_c) = center_ratios(sys, etas.norm)?;
    let denom1 = 1.0 - etas.top * ac_c;
    let denom2 = 1.0 - etas.bottom * ac_b;
    if denom1 <= 0.0 || denom2 <= 0.0 {
        return Err(Error::DominanceViolated(
            "a center-response bound denominator is not positive".into(),
        ));
    }
    Ok((ac_b / denom1, ac_c / denom2))
}

/// Per-iteration error-bound envelope: entry `k` bounds the relative error
/// reduction after `k + 1` sweeps, as the sweep-norm bound times the k-th
/// power of the convergence-factor bound (min variants).
pub fn error_bound_curve(
    etas: &EtaFactors,
    sys: &BlockArrowSystem,
    ordering: SweepOrdering,
    k_max: usize,
) -> Result<Vec<f64>> {
    let rho = rho_bound(etas, sys, EtaVariant::Min)?;
    let t_bound = t_norm_bound(etas, sys, ordering, EtaVariant::Min)?;
    Ok((0..=k_max).map(|k| t_bound * rho.powi(k as i32)).collect())
}

/// Intermediate convergence-factor bound using the measured norms of the
/// corner inverse blocks and center responses instead of their eta
/// estimates. Sits between the exact factor and the eta-based bound.
pub fn product_factor_bound(sys: &BlockArrowSystem, norm: NormKind) -> Result<f64> {
    let z_top = sys.wing_top().inverse_column_strip(StripSide::Last)?;
    let z_bottom = sys.wing_bottom().inverse_column_strip(StripSide::First)?;
    let zb = z_top.corner().mul(sys.coupling_bh());
    let zc = z_bottom.corner().mul(sys.coupling_ch());
    let pi1 = sys
        .center()
        .sub(&sys.coupling_c().mul(&zb))
        .lu()?
        .solve(sys.coupling_b())?;
    let pi2 = sys
        .center()
        .sub(&sys.coupling_b().mul(&zc))
        .lu()?
        .solve(sys.coupling_c())?;
    Ok(zc.norm(norm)? * pi2.norm(norm)? * zb.norm(norm)? * pi1.norm(norm)?)
}

/// Off-diagonal decay data for the inverse of a block tridiagonal matrix.
///
/// `tau_tilde[i]` and `omega_tilde[i]` hold the downward and upward decay
/// ratios of block row `i + 1`; products of consecutive ratios bound how fast
/// inverse blocks shrink away from the diagonal, relative to the diagonal
/// block they start from. `diag_lower` and `diag_upper` bracket the norms of
/// the diagonal inverse blocks; the upper bound is absent when its
/// denominator fails to stay positive.
#[derive(Clone, Debug)]
pub struct DecayProfile {
    pub tau_tilde: Vec<f64>,
    pub omega_tilde: Vec<f64>,
    pub diag_lower: Vec<f64>,
    pub diag_upper: Vec<Option<f64>>,
    pub norm: NormKind,
}

impl DecayProfile {
    /// Multiplier bounding `norm(Z_ij) / norm(Z_ii)` for zero-based block
    /// indices: the product of the decay ratios crossed moving from the
    /// diagonal at row `i` to column `j`.
    pub fn off_diagonal_factor(&self, i: usize, j: usize) -> f64 {
        if i < j {
            self.omega_tilde[i + 1..=j].iter().product()
        } else if i > j {
            self.tau_tilde[j..i].iter().product()
        } else {
            1.0
        }
    }
}

/// Computes the decay profile of a column block diagonally dominant block
/// tridiagonal matrix.
pub fn decay_profile(wing: &BlockTridiagonal, norm: NormKind) -> Result<DecayProfile> {
    let report = check_column_dominance(wing, norm)?;
    if !report.weakly_dominant {
        return Err(Error::DominanceViolated(format!(
            "column dominance fails: max sum {:.6}",
            report.sums.iter().cloned().fold(0.0, f64::max)
        )));
    }
    let m = wing.block_rows();
    // Per block row i (zero-based): norm of the sub block below the diagonal
    // scaled by the inverse diagonal, and of the super block above it.
    let mut below = vec![0.0; m];
    let mut above = vec![0.0; m];
    for i in 0..m {
        let diag = wing.diag_block(i);
        let what = format!("diagonal block {i}");
        if i + 1 < m {
            below[i] = times_inv(wing.sub_block(i), diag, norm, &what)?;
        }
        if i > 0 {
            above[i] = times_inv(wing.sup_block(i - 1), diag, norm, &what)?;
        }
    }
    if m >= 2 {
        if below[0] >= 1.0 {
            return Err(Error::PreconditionFailed(format!(
                "first-column end condition fails: scaled sub-block norm {:.6} >= 1",
                below[0]
            )));
        }
        if above[m - 1] >= 1.0 {
            return Err(Error::PreconditionFailed(format!(
                "last-column end condition fails: scaled super-block norm {:.6} >= 1",
                above[m - 1]
            )));
        }
    }
    let mut tau_tilde = vec![0.0; m];
    let mut omega_tilde = vec![0.0; m];
    for i in 0..m {
        let denom_tau = 1.0 - above[i];
        let denom_omega = 1.0 - below[i];
        if below[i] > 0.0 && denom_tau <= 0.0 {
            return Err(Error::DominanceViolated(format!(
                "downward decay denominator at block row {i} is not positive"
            )));
        }
        if above[i] > 0.0 && denom_omega <= 0.0 {
            return Err(Error::DominanceViolated(format!(
                "upward decay denominator at block row {i} is not positive"
            )));
        }
        tau_tilde[i] = if below[i] > 0.0 { below[i] / denom_tau } else { 0.0 };
        omega_tilde[i] = if above[i] > 0.0 { above[i] / denom_omega } else { 0.0 };
    }
    let mut diag_lower = Vec::with_capacity(m);
    let mut diag_upper = Vec::with_capacity(m);
    for i in 0..m {
        let sub_norm = if i + 1 < m { wing.sub_block(i).norm(norm)? } else { 0.0 };
        let sup_norm = if i > 0 { wing.sup_block(i - 1).norm(norm)? } else { 0.0 };
        // tau from the row above feeds the sup term, omega from the row
        // below feeds the sub term.
        let tau_prev = if i > 0 { tau_tilde[i - 1] } else { 0.0 };
        let omega_next = if i + 1 < m { omega_tilde[i + 1] } else { 0.0 };
        let a_norm = wing.diag_block(i).norm(norm)?;
        let inv_norm = wing.diag_block(i).inverse()?.norm(norm)?;
        diag_lower.push(1.0 / (a_norm + tau_prev * sup_norm + omega_next * sub_norm));
        let denom = 1.0 / inv_norm - tau_prev * sup_norm - omega_next * sub_norm;
        diag_upper.push(if denom > 0.0 { Some(1.0 / denom) } else { None });
    }
    Ok(DecayProfile { tau_tilde, omega_tilde, diag_lower, diag_upper, norm })
}

/// Row-sum bound on the ∞-norm of the inverse of a scalar tridiagonal
/// Toeplitz matrix with positive diagonal and nonpositive off-diagonals:
/// `1 / (diag + sub + sup)` whenever that sum is positive.
pub fn toeplitz_tridiag_inverse_inf_bound(sub: f64, diag: f64, sup: f64) -> Result<f64> {
    if !(diag > 0.0 && sub <= 0.0 && sup <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bound needs diag > 0 and sub, sup <= 0; got ({sub}, {diag}, {sup})"
        )));
    }
    let s = diag + sub + sup;
    if s <= 0.0 {
        return Err(Error::DominanceViolated(format!(
            "row sum {s} is not positive"
        )));
    }
    Ok(1.0 / s)
}

/// Everything the a-priori analysis says about one system, in exportable
/// form.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub kind: String,
    pub sums: Vec<f64>,
    pub weak: bool,
    pub strict: bool,
    pub eta: EtaFactors,
    pub rho_bound: f64,
    pub t_bound: TBounds,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TBounds {
    pub t12: f64,
    pub t21: f64,
}

/// Assembles the full report: row dominance, eta factors, and the plain
/// bounds for both sweep orderings.
pub fn bounds_report(sys: &BlockArrowSystem, norm: NormKind) -> Result<BoundsReport> {
    let dominance = check_row_dominance(sys, norm)?;
    let etas = eta_factors(sys, norm)?;
    let rho = rho_bound(&etas, sys, EtaVariant::Plain)?;
    let t12 = t_norm_bound(&etas, sys, SweepOrdering::T12, EtaVariant::Plain)?;
    let t21 = t_norm_bound(&etas, sys, SweepOrdering::T21, EtaVariant::Plain)?;
    Ok(BoundsReport {
        kind: dominance.kind.as_str().to_string(),
        sums: dominance.sums,
        weak: dominance.weakly_dominant,
        strict: dominance.strictly_dominant,
        eta: etas,
        rho_bound: rho,
        t_bound: TBounds { t12, t21 },
    })
}
