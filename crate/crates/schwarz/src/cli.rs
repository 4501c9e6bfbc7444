//! Command implementations behind the `schwarz` binary. Each function takes
//! parsed inputs and returns the text it would print, so the logic stays
//! testable without a process boundary; the binary only does argument
//! parsing, file IO, and exit codes.

use serde_json::json;

use crate::bounds::{bounds_report, eta_factors, rho_bound, EtaVariant};
use crate::dense::{NormKind, Vector};
use crate::error::{Error, Result};
use crate::io::{residual_csv, rhs_from_json, system_from_json, table_csv, trace_csv, TableRow};
use crate::iteration::{iterate, IterationOptions, ReferenceSolution};
use crate::krylov::gmres_schwarz;
use crate::operator::{rho_exact, SweepOrdering};
use crate::problems::{build_poisson, build_shishkin, shishkin_rhs_and_exact};
use crate::verify::{run_verify, VerifyScale, TABLE_EPSILONS};

/// Parses a custom parameter grid: a JSON array of `[N, M]` pairs.
pub fn grid_from_json(text: &str) -> Result<Vec<(usize, usize)>> {
    let grid: Vec<(usize, usize)> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("grid file: {e}")))?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid file lists no mesh pairs".into()));
    }
    Ok(grid)
}

fn table_cell(nx: usize, my: usize, epsilon: f64) -> Result<TableRow> {
    let p = build_shishkin(epsilon, 0.0, nx, my)?;
    let rho12 = rho_exact(&p.system, SweepOrdering::T12, NormKind::Inf)?;
    Ok(TableRow {
        nx,
        my,
        epsilon,
        dim: p.dim(),
        rho12_exact_inf: rho12,
        rho_bound: p.rho_corollary(),
    })
}

/// One table row per grid pair and epsilon: the exact convergence factor of
/// the first ordering next to its closed-form bound. Cells are independent,
/// so they are computed on scoped threads and assembled in grid order.
pub fn table_rows(grid: &[(usize, usize)]) -> Result<Vec<TableRow>> {
    let cells: Vec<(usize, usize, f64)> = grid
        .iter()
        .flat_map(|&(nx, my)| TABLE_EPSILONS.iter().map(move |&e| (nx, my, e)))
        .collect();
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(cells.len())
        .max(1);
    let chunk = cells.len().div_ceil(workers);
    let mut slots: Vec<Option<Result<TableRow>>> = Vec::new();
    slots.resize_with(cells.len(), || None);
    std::thread::scope(|scope| {
        for (cell_chunk, slot_chunk) in cells.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (&(nx, my, eps), slot) in cell_chunk.iter().zip(slot_chunk.iter_mut()) {
                    *slot = Some(table_cell(nx, my, eps));
                }
            });
        }
    });
    slots.into_iter().map(|slot| slot.expect("all cells computed")).collect()
}

pub fn cmd_table(grid: &[(usize, usize)]) -> Result<String> {
    Ok(table_csv(&table_rows(grid)?))
}

/// Error history of the stationary iteration from a zero initial guess, with
/// the closed-form decay envelope in the bound column. Runs both orderings
/// when none is requested; multiple runs are emitted as blank-line-separated
/// CSV blocks, each preceded by a `# ordering=...` line.
pub fn cmd_converge(
    nx: usize,
    my: usize,
    epsilon: f64,
    ordering: Option<SweepOrdering>,
    max_iter: usize,
) -> Result<String> {
    let p = build_shishkin(epsilon, 0.0, nx, my)?;
    let (b, _) = shishkin_rhs_and_exact(&p)?;
    let orderings: &[SweepOrdering] = match ordering {
        Some(o) => match o {
            SweepOrdering::T12 => &[SweepOrdering::T12],
            SweepOrdering::T21 => &[SweepOrdering::T21],
        },
        None => &[SweepOrdering::T12, SweepOrdering::T21],
    };
    let mut out = String::new();
    for (i, &ord) in orderings.iter().enumerate() {
        let opts = IterationOptions { ordering: ord, max_iter, ..Default::default() };
        let mut trace = iterate(&p.system, &b, &Vector::zeros(p.dim()), &opts)?;
        trace.bound_curve = p.corollary_error_curve(ord, trace.error_norms.len() - 1);
        if orderings.len() > 1 {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("# ordering={ord}\n"));
        }
        out.push_str(&trace_csv(&trace));
    }
    Ok(out)
}

/// Runs the self-verification suites; the flag reports whether every group
/// passed.
pub fn cmd_verify(scale: VerifyScale, seed: u64) -> Result<(String, bool)> {
    let report = run_verify(scale, seed);
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Parse(format!("report serialization: {e}")))?;
    Ok((text, report.all_passed))
}

/// Exact factors and every applicable bound for one Poisson instance.
pub fn cmd_poisson(m: usize) -> Result<String> {
    let p = build_poisson(m)?;
    let w_inv = p.system.center().inverse()?.inf_norm();
    let etas = eta_factors(&p.system, NormKind::Inf)?;
    let report = json!({
        "m": m,
        "block_dim": p.block_dim(),
        "dim": p.dim(),
        "h": p.h(),
        "line_block_inverse_inf_norm": w_inv,
        "eta": { "top": etas.top, "bottom": etas.bottom },
        "rho12_exact_inf": rho_exact(&p.system, SweepOrdering::T12, NormKind::Inf)?,
        "rho12_exact_two": rho_exact(&p.system, SweepOrdering::T12, NormKind::Two)?,
        "rho_bound_inf": rho_bound(&etas, &p.system, EtaVariant::Plain)?,
        "rho_bound_two": p.two_norm_rho_bound(),
    });
    serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Parse(format!("report serialization: {e}")))
}

/// Residual history of Schwarz-preconditioned GMRES on the layer problem.
pub fn cmd_gmres(nx: usize, my: usize, epsilon: f64, tol: f64) -> Result<String> {
    let p = build_shishkin(epsilon, 0.0, nx, my)?;
    let (b, _) = shishkin_rhs_and_exact(&p)?;
    let result = gmres_schwarz(&p.system, &b, SweepOrdering::T12, tol, p.dim() + 2)?;
    Ok(residual_csv(&result))
}

/// Solves a user-supplied system against a user-supplied right-hand side and
/// reports the run as one JSON document.
pub fn cmd_custom(system_json: &str, rhs_json: &str) -> Result<String> {
    let sys = system_from_json(system_json)?;
    let b = rhs_from_json(rhs_json)?;
    if b.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {}, system has dimension {}",
            b.len(),
            sys.dim()
        )));
    }
    let opts = IterationOptions::default();
    let trace = iterate(&sys, &b, &Vector::zeros(sys.dim()), &opts)?;
    let reference = match trace.reference {
        ReferenceSolution::Direct => "direct".to_string(),
        ReferenceSolution::Stagnation { sweeps } => format!("stagnation after {sweeps} sweeps"),
    };
    let bounds = match bounds_report(&sys, NormKind::Inf) {
        Ok(report) => serde_json::to_value(&report)
            .map_err(|e| Error::Parse(format!("report serialization: {e}")))?,
        Err(_) => serde_json::Value::Null,
    };
    let report = json!({
        "dim": sys.dim(),
        "block_dim": sys.block_dim(),
        "ordering": opts.ordering.as_str(),
        "iterations": trace.iterations_run,
        "converged": trace.converged,
        "diverged": trace.diverged,
        "reference": reference,
        "relative_errors": trace.error_norms,
        "bound_curve": trace.bound_curve,
        "bounds": bounds,
        "solution": trace.solution.data(),
    });
    serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Parse(format!("report serialization: {e}")))
}
