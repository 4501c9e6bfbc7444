//! Model problem generators: an upwind finite difference discretization of a
//! convection–diffusion equation on a Shishkin mesh, and the standard
//! five-point discrete Laplacian on the unit square. Both assemble directly
//! into block-arrow form with the transition line as the center block row.

use crate::block::{BlockArrowSystem, BlockTridiagonal};
use crate::dense::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::operator::SweepOrdering;

/// One row of the five-point upwind stencil: coefficients of the west, east,
/// south, north neighbors and the node itself.
#[derive(Clone, Copy, Debug)]
pub struct StencilRow {
    pub west: f64,
    pub center: f64,
    pub east: f64,
    pub south: f64,
    pub north: f64,
}

impl StencilRow {
    /// Sum of all five coefficients; equals the reaction coefficient for a
    /// consistent discretization of the model operator.
    pub fn row_sum(&self) -> f64 {
        self.west + self.center + self.east + self.south + self.north
    }
}

/// The three stencil rows of the Shishkin-mesh discretization: one for mesh
/// lines inside the coarse region, one for the transition line where the
/// vertical spacing changes, one for lines inside the fine layer region.
#[derive(Clone, Copy, Debug)]
pub struct UpwindStencil {
    pub coarse: StencilRow,
    pub transition: StencilRow,
    pub fine: StencilRow,
}

/// Upwind discretization of `-eps * lap(u) + u_y + beta * u = f` on the unit
/// square with Dirichlet boundary, on a mesh uniform in x and piecewise
/// uniform in y with a boundary layer of width `tau_y` at the top.
///
/// Mesh lines are ordered bottom first; unknowns within a line by increasing
/// x. The coarse lines form the top wing of the block-arrow system, the
/// transition line the center row, the fine-layer lines the bottom wing.
#[derive(Clone, Debug)]
pub struct ShishkinProblem {
    pub epsilon: f64,
    pub beta: f64,
    /// Number of x-intervals; each line carries `nx - 1` unknowns.
    pub nx: usize,
    /// Number of y-intervals, even and at least 4.
    pub my: usize,
    /// Layer width `min(1/2, 2 * epsilon * ln(my))`.
    pub tau_y: f64,
    pub hx: f64,
    /// Vertical spacing below the transition line.
    pub hy_coarse: f64,
    /// Vertical spacing inside the layer.
    pub hy_fine: f64,
    /// All `my + 1` mesh ordinates, from 0 to 1.
    pub y_nodes: Vec<f64>,
    pub stencil: UpwindStencil,
    pub system: BlockArrowSystem,
}

impl ShishkinProblem {
    /// Unknowns per mesh line.
    pub fn block_dim(&self) -> usize {
        self.nx - 1
    }

    /// Block rows per wing.
    pub fn wing_rows(&self) -> usize {
        self.my / 2 - 1
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn x_node(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    /// Closed-form convergence factor of the two-subdomain sweep for this
    /// discretization: the ratio of the north to south coupling strengths of
    /// a coarse line.
    pub fn rho_corollary(&self) -> f64 {
        self.epsilon / (self.epsilon + self.hy_coarse)
    }

    /// Closed-form bound on the sweep operator norm: the convergence factor
    /// itself when the coarse subdomain is corrected first, 1 otherwise.
    pub fn t_bound_corollary(&self, ordering: SweepOrdering) -> f64 {
        match ordering {
            SweepOrdering::T12 => self.rho_corollary(),
            SweepOrdering::T21 => 1.0,
        }
    }

    /// Bound on the relative error after `k` sweeps, normalized so entry 0
    /// is 1; directly comparable to an iteration's error history.
    pub fn corollary_error_curve(&self, ordering: SweepOrdering, k_max: usize) -> Vec<f64> {
        let rho = self.rho_corollary();
        let t = self.t_bound_corollary(ordering);
        (0..=k_max)
            .map(|k| if k == 0 { 1.0 } else { t * rho.powi(k as i32 - 1) })
            .collect()
    }
}

/// Builds the Shishkin-mesh problem. The mesh places `my / 2` intervals of
/// width `hy_coarse` below `1 - tau_y` and `my / 2` intervals of width
/// `hy_fine` above it; upwinding follows the convection direction +y, so
/// every row couples to its south neighbor more strongly than to its north
/// one.
pub fn build_shishkin(epsilon: f64, beta: f64, nx: usize, my: usize) -> Result<ShishkinProblem> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must be nonnegative and finite, got {beta}"
        )));
    }
    if nx < 3 {
        return Err(Error::InvalidParameter(format!(
            "nx must be at least 3, got {nx}"
        )));
    }
    if my < 4 || my % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "my must be even and at least 4, got {my}"
        )));
    }

    let tau_y = (0.5f64).min(2.0 * epsilon * (my as f64).ln());
    let hx = 1.0 / nx as f64;
    let hy_coarse = 2.0 * (1.0 - tau_y) / my as f64;
    let hy_fine = 2.0 * tau_y / my as f64;

    let half = my / 2;
    let y_nodes: Vec<f64> = (0..=my)
        .map(|j| {
            if j <= half {
                j as f64 * hy_coarse
            } else {
                1.0 - (my - j) as f64 * hy_fine
            }
        })
        .collect();

    let hy = hy_coarse;
    let hf = hy_fine;
    let bx = -epsilon / (hx * hx);
    let coarse = StencilRow {
        west: bx,
        east: bx,
        south: -epsilon / (hy * hy) - 1.0 / hy,
        north: -epsilon / (hy * hy),
        center: 2.0 * epsilon / (hx * hx) + 2.0 * epsilon / (hy * hy) + 1.0 / hy + beta,
    };
    let transition = StencilRow {
        west: bx,
        east: bx,
        south: -2.0 * epsilon / (hy * (hy + hf)) - 1.0 / hy,
        north: -2.0 * epsilon / (hf * (hy + hf)),
        center: 2.0 * epsilon / (hx * hx) + 2.0 * epsilon / (hy * hf) + 1.0 / hy + beta,
    };
    let fine = StencilRow {
        west: bx,
        east: bx,
        south: -epsilon / (hf * hf) - 1.0 / hf,
        north: -epsilon / (hf * hf),
        center: 2.0 * epsilon / (hx * hx) + 2.0 * epsilon / (hf * hf) + 1.0 / hf + beta,
    };
    let stencil = UpwindStencil { coarse, transition, fine };

    let n = nx - 1;
    let m = half - 1;
    let line = |row: &StencilRow| Matrix::tridiag_toeplitz(n, row.west, row.center, row.east);
    let scaled = |v: f64| Matrix::scaled_identity(n, v);

    let wing_top = BlockTridiagonal::toeplitz(
        m,
        scaled(coarse.south),
        line(&coarse),
        scaled(coarse.north),
    )?;
    let wing_bottom = BlockTridiagonal::toeplitz(
        m,
        scaled(fine.south),
        line(&fine),
        scaled(fine.north),
    )?;
    let system = BlockArrowSystem::assemble(
        wing_top,
        wing_bottom,
        line(&transition),
        scaled(transition.north),
        scaled(transition.south),
        scaled(coarse.north),
        scaled(fine.south),
    )?;

    Ok(ShishkinProblem {
        epsilon,
        beta,
        nx,
        my,
        tau_y,
        hx,
        hy_coarse,
        hy_fine,
        y_nodes,
        stencil,
        system,
    })
}

/// Boundary data and analytic solution of the layer example: odd in x about
/// the midline, with an exponential layer of width `O(epsilon)` at y = 1.
fn layer_solution(x: f64, y: f64, epsilon: f64) -> f64 {
    (2.0 * x - 1.0) * (1.0 - ((y - 1.0) / epsilon).exp()) / (1.0 - (-1.0 / epsilon).exp())
}

/// Assembles the right-hand side for the zero-source layer example by
/// folding the Dirichlet values of the analytic solution into the rows next
/// to the boundary, and samples that solution at the interior nodes in
/// system ordering. Corner-adjacent nodes receive two boundary
/// contributions.
///
/// The analytic formula solves the continuous problem only without reaction,
/// so nonzero `beta` is refused.
pub fn shishkin_rhs_and_exact(p: &ShishkinProblem) -> Result<(Vector, Vector)> {
    if p.beta != 0.0 {
        return Err(Error::PreconditionFailed(format!(
            "the layer example has zero reaction; got beta = {}",
            p.beta
        )));
    }
    let n = p.block_dim();
    let half = p.my / 2;
    let g = |x: f64, y: f64| layer_solution(x, y, p.epsilon);
    let mut rhs = Vector::zeros(p.dim());
    let mut exact = Vector::zeros(p.dim());
    for j in 1..p.my {
        let row = if j < half {
            p.stencil.coarse
        } else if j == half {
            p.stencil.transition
        } else {
            p.stencil.fine
        };
        let y = p.y_nodes[j];
        for i in 1..p.nx {
            let x = p.x_node(i);
            let idx = (j - 1) * n + (i - 1);
            exact[idx] = g(x, y);
            let mut b = 0.0;
            if i == 1 {
                b -= row.west * g(0.0, y);
            }
            if i == p.nx - 1 {
                b -= row.east * g(1.0, y);
            }
            if j == 1 {
                b -= row.south * g(x, 0.0);
            }
            if j == p.my - 1 {
                b -= row.north * g(x, 1.0);
            }
            rhs[idx] = b;
        }
    }
    Ok((rhs, exact))
}

/// Five-point discrete Laplacian on a square grid of `2m + 1` mesh lines
/// with `2m + 1` unknowns each, split at the middle line.
#[derive(Clone, Debug)]
pub struct PoissonProblem {
    pub m: usize,
    pub system: BlockArrowSystem,
}

impl PoissonProblem {
    pub fn block_dim(&self) -> usize {
        2 * self.m + 1
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Uniform mesh width in both directions.
    pub fn h(&self) -> f64 {
        1.0 / (self.block_dim() as f64 + 1.0)
    }

    /// Closed-form 2-norm bound on the convergence factor, built from the
    /// extreme eigenvalue of the discrete Laplacian line block; behaves like
    /// `1 / (1 + 3 pi^2 h^2)^2` for small h.
    pub fn two_norm_rho_bound(&self) -> f64 {
        let s = (std::f64::consts::PI * self.h() / 2.0).sin();
        let s2 = s * s;
        (1.0 / (1.0 + 6.0 * s2 + 4.0 * s2 * s2)).powi(2)
    }
}

/// Builds the discrete Poisson system: all wing diagonal blocks are
/// `tridiag(-1, 4, -1)`, every off-diagonal and coupling block is `-I`.
pub fn build_poisson(m: usize) -> Result<PoissonProblem> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let n = 2 * m + 1;
    let w = Matrix::tridiag_toeplitz(n, -1.0, 4.0, -1.0);
    let neg_id = Matrix::scaled_identity(n, -1.0);
    let wing = |_: ()| {
        BlockTridiagonal::toeplitz(m, neg_id.clone(), w.clone(), neg_id.clone())
    };
    let system = BlockArrowSystem::assemble(
        wing(())?,
        wing(())?,
        w.clone(),
        neg_id.clone(),
        neg_id.clone(),
        neg_id.clone(),
        neg_id,
    )?;
    Ok(PoissonProblem { m, system })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::check_row_dominance;
    use crate::dense::NormKind;
    use crate::operator::rho_exact;

    #[test]
    fn tau_clamps_to_uniform_mesh() {
        let p = build_shishkin(1.0, 0.0, 4, 4).unwrap();
        assert_eq!(p.tau_y, 0.5);
        assert!((p.hy_coarse - 0.25).abs() < 1e-15);
        assert!((p.hy_fine - 0.25).abs() < 1e-15);
        for (j, y) in p.y_nodes.iter().enumerate() {
            assert!((y - 0.25 * j as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn mesh_for_small_epsilon() {
        let p = build_shishkin(1e-8, 0.0, 20, 20).unwrap();
        let tau_want = 2e-8 * (20f64).ln();
        assert!((p.tau_y - tau_want).abs() < 1e-20);
        assert!((p.hy_coarse - 0.1).abs() < 1e-8);
        assert!((p.hy_fine - 5.99e-9).abs() < 2e-11);
        assert_eq!(p.y_nodes.len(), 21);
        assert_eq!(p.y_nodes[0], 0.0);
        assert_eq!(p.y_nodes[20], 1.0);
        assert!((p.y_nodes[10] - (1.0 - p.tau_y)).abs() < 1e-15);
        for w in p.y_nodes.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn rho_corollary_is_stencil_ratio() {
        let p = build_shishkin(1e-4, 0.0, 40, 40).unwrap();
        let rho = p.rho_corollary();
        let ratio = (p.stencil.coarse.north / p.stencil.coarse.south).abs();
        assert!((rho - ratio).abs() <= 1e-12 * rho);
        assert_eq!(format!("{:.1e}", rho), "2.0e-3");
    }

    #[test]
    fn stencil_row_sums_equal_beta() {
        for &beta in &[0.0, 1.0] {
            for &eps in &[1e-8, 1e-2] {
                let p = build_shishkin(eps, beta, 20, 20).unwrap();
                for row in [p.stencil.coarse, p.stencil.transition, p.stencil.fine] {
                    let defect = (row.row_sum() - beta).abs();
                    assert!(
                        defect <= 1e-12 * row.center.abs(),
                        "eps={eps} beta={beta}: defect {defect:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn stencil_sign_pattern() {
        for &eps in &[1e-8, 1e-4, 1e-1] {
            let p = build_shishkin(eps, 1.0, 12, 10).unwrap();
            for row in [p.stencil.coarse, p.stencil.transition, p.stencil.fine] {
                assert!(row.center > 0.0);
                assert!(row.west < 0.0 && row.east < 0.0);
                assert!(row.south < 0.0 && row.north < 0.0);
            }
        }
    }

    #[test]
    fn dimensions_follow_grid() {
        let p = build_shishkin(1e-4, 0.0, 20, 20).unwrap();
        assert_eq!(p.block_dim(), 19);
        assert_eq!(p.wing_rows(), 9);
        assert_eq!(p.dim(), 361);
        assert_eq!(p.system.wing_rows(), 9);
    }

    #[test]
    fn system_blocks_carry_stencil_values() {
        let p = build_shishkin(1e-2, 0.5, 6, 8).unwrap();
        let s = &p.stencil;
        let sys = &p.system;
        let top = sys.wing_top().diag_block(0);
        assert_eq!(top[(0, 0)], s.coarse.center);
        assert_eq!(top[(0, 1)], s.coarse.east);
        assert_eq!(top[(1, 0)], s.coarse.west);
        assert_eq!(sys.wing_top().sub_block(0)[(0, 0)], s.coarse.south);
        assert_eq!(sys.wing_top().sup_block(0)[(1, 1)], s.coarse.north);
        assert_eq!(sys.center()[(2, 2)], s.transition.center);
        assert_eq!(sys.coupling_b()[(0, 0)], s.transition.north);
        assert_eq!(sys.coupling_c()[(0, 0)], s.transition.south);
        assert_eq!(sys.coupling_bh()[(0, 0)], s.coarse.north);
        assert_eq!(sys.coupling_ch()[(0, 0)], s.fine.south);
        assert_eq!(sys.coupling_b()[(0, 1)], 0.0);
        let bottom = sys.wing_bottom().diag_block(0);
        assert_eq!(bottom[(0, 0)], s.fine.center);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            build_shishkin(0.0, 0.0, 20, 20),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            build_shishkin(1e-4, -1.0, 20, 20),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            build_shishkin(1e-4, 0.0, 2, 20),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            build_shishkin(1e-4, 0.0, 20, 7),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            build_shishkin(1e-4, 0.0, 20, 2),
            Err(Error::InvalidParameter(_))
        ));
    }

    // Applies the stencil to the exact solution over the full grid,
    // boundary values included. Must agree with the assembled route
    // A * exact - rhs to rounding, independent of discretization error.
    #[test]
    fn rhs_folding_matches_manual_stencil_application() {
        let p = build_shishkin(0.3, 0.0, 6, 8).unwrap();
        let (rhs, exact) = shishkin_rhs_and_exact(&p).unwrap();
        let lib_route = p.system.apply(&exact).sub(&rhs);

        let n = p.block_dim();
        let half = p.my / 2;
        let g = |x: f64, y: f64| layer_solution(x, y, p.epsilon);
        let mut manual = Vector::zeros(p.dim());
        for j in 1..p.my {
            let row = if j < half {
                p.stencil.coarse
            } else if j == half {
                p.stencil.transition
            } else {
                p.stencil.fine
            };
            for i in 1..p.nx {
                let x = p.x_node(i);
                let idx = (j - 1) * n + (i - 1);
                manual[idx] = row.center * g(x, p.y_nodes[j])
                    + row.west * g(x - p.hx, p.y_nodes[j])
                    + row.east * g(x + p.hx, p.y_nodes[j])
                    + row.south * g(x, p.y_nodes[j - 1])
                    + row.north * g(x, p.y_nodes[j + 1]);
            }
        }
        let scale = p.stencil.fine.center.abs();
        for k in 0..p.dim() {
            assert!(
                (lib_route[k] - manual[k]).abs() <= 1e-12 * scale,
                "entry {k}: {} vs {}",
                lib_route[k],
                manual[k]
            );
        }
    }

    #[test]
    fn exact_solution_symmetry_and_boundary() {
        let p = build_shishkin(0.2, 0.0, 6, 8).unwrap();
        let (_, exact) = shishkin_rhs_and_exact(&p).unwrap();
        let n = p.block_dim();
        // Odd symmetry in x puts zeros on the mid column when nx is even.
        for j in 0..p.my - 1 {
            assert!(exact[j * n + (p.nx / 2 - 1)].abs() < 1e-14);
        }
        assert!((layer_solution(0.75, 0.0, 0.2) - 0.5).abs() < 1e-15);
        assert_eq!(layer_solution(0.75, 1.0, 0.2), 0.0);
    }

    #[test]
    fn exact_sampler_refuses_reaction() {
        let p = build_shishkin(1e-2, 1.0, 6, 8).unwrap();
        assert!(matches!(
            shishkin_rhs_and_exact(&p),
            Err(Error::PreconditionFailed(_))
        ));
    }

    // First-order upwind consistency: the sampled analytic solution leaves a
    // mesh-sized residual, largest inside the layer. Measures 0.9418 at this
    // resolution; frozen with small headroom.
    #[test]
    fn discretization_defect_at_desk_scale() {
        let p = build_shishkin(1e-2, 0.0, 20, 20).unwrap();
        let (rhs, exact) = shishkin_rhs_and_exact(&p).unwrap();
        let residual = p.system.apply(&exact).sub(&rhs);
        let defect = residual.inf_norm() / rhs.inf_norm();
        assert!(defect < 0.95, "defect {defect}");
    }

    #[test]
    fn poisson_shapes_and_norms() {
        let p = build_poisson(1).unwrap();
        assert_eq!(p.block_dim(), 3);
        assert_eq!(p.dim(), 9);
        assert!((p.h() - 0.25).abs() < 1e-15);
        let w = p.system.center();
        assert_eq!(w[(0, 0)], 4.0);
        assert_eq!(w[(0, 1)], -1.0);
        let inv_norm = w.inverse().unwrap().inf_norm();
        assert!((inv_norm - 3.0 / 7.0).abs() < 1e-15);
        assert!(build_poisson(0).is_err());
    }

    #[test]
    fn poisson_is_strictly_dominant() {
        let p = build_poisson(3).unwrap();
        let report = check_row_dominance(&p.system, NormKind::Inf).unwrap();
        assert!(report.strictly_dominant);
        let w_inv = p.system.center().inverse().unwrap().inf_norm();
        assert!(w_inv < 0.5);
        for s in &report.sums {
            assert!(*s <= 2.0 * w_inv + 1e-14);
        }
    }

    #[test]
    fn poisson_two_norm_bound_holds() {
        let p = build_poisson(1).unwrap();
        let bound = p.two_norm_rho_bound();
        let exact = rho_exact(&p.system, SweepOrdering::T12, NormKind::Two).unwrap();
        assert!(exact <= bound + 1e-12, "{exact} vs {bound}");
        assert!(bound < 1.0);
    }
}
