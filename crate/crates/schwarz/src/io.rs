//! Serialization: JSON import/export for systems, right-hand sides, and
//! problem specs, plus the CSV renderers used by the command-line front end.
//! CSV output is deterministic byte-for-byte: fixed headers, '\n' line ends,
//! '.' decimal separator, scientific notation with 16 significant digits.

use serde::{Deserialize, Serialize};

use crate::block::{BlockArrowSystem, BlockTridiagonal};
use crate::dense::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::iteration::IterationTrace;
use crate::krylov::GmresResult;

/// A matrix as nested row arrays.
type MatrixDoc = Vec<Vec<f64>>;

/// A wing band: one matrix when the wing is Toeplitz, a list otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BandDoc {
    One(MatrixDoc),
    Many(Vec<MatrixDoc>),
}

#[derive(Serialize, Deserialize)]
struct WingDoc {
    toeplitz: bool,
    sub: BandDoc,
    diag: BandDoc,
    #[serde(rename = "super")]
    sup: BandDoc,
}

#[derive(Serialize, Deserialize)]
struct BlocksDoc {
    wing_top: WingDoc,
    wing_bottom: WingDoc,
    center: MatrixDoc,
    coupling_b: MatrixDoc,
    coupling_c: MatrixDoc,
    coupling_bh: MatrixDoc,
    coupling_ch: MatrixDoc,
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    n: usize,
    m: usize,
    blocks: BlocksDoc,
}

fn matrix_to_doc(m: &Matrix) -> MatrixDoc {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn matrix_from_doc(doc: &MatrixDoc, what: &str) -> Result<Matrix> {
    let rows = doc.len();
    if rows == 0 {
        return Err(Error::Parse(format!("{what}: empty matrix")));
    }
    let cols = doc[0].len();
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in doc.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        data.extend_from_slice(row);
    }
    Matrix::new(rows, cols, data)
        .map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn wing_to_doc(wing: &BlockTridiagonal) -> WingDoc {
    let m = wing.block_rows();
    if wing.is_toeplitz() {
        let zero = Matrix::zeros(wing.block_dim(), wing.block_dim());
        let sub = if m >= 2 { wing.sub_block(0) } else { &zero };
        let sup = if m >= 2 { wing.sup_block(0) } else { &zero };
        WingDoc {
            toeplitz: true,
            sub: BandDoc::One(matrix_to_doc(sub)),
            diag: BandDoc::One(matrix_to_doc(wing.diag_block(0))),
            sup: BandDoc::One(matrix_to_doc(sup)),
        }
    } else {
        WingDoc {
            toeplitz: false,
            sub: BandDoc::Many((0..m - 1).map(|i| matrix_to_doc(wing.sub_block(i))).collect()),
            diag: BandDoc::Many((0..m).map(|i| matrix_to_doc(wing.diag_block(i))).collect()),
            sup: BandDoc::Many((0..m - 1).map(|i| matrix_to_doc(wing.sup_block(i))).collect()),
        }
    }
}

fn band_from_doc(doc: &BandDoc, count: usize, what: &str) -> Result<Vec<Matrix>> {
    match doc {
        BandDoc::One(m) => {
            let block = matrix_from_doc(m, what)?;
            Ok(vec![block; count])
        }
        BandDoc::Many(list) => {
            if list.len() != count {
                return Err(Error::Parse(format!(
                    "{what}: expected {count} blocks, got {}",
                    list.len()
                )));
            }
            list.iter()
                .enumerate()
                .map(|(i, m)| matrix_from_doc(m, &format!("{what}[{i}]")))
                .collect()
        }
    }
}

fn wing_from_doc(doc: &WingDoc, m: usize, what: &str) -> Result<BlockTridiagonal> {
    if doc.toeplitz {
        let diag = match &doc.diag {
            BandDoc::One(d) => matrix_from_doc(d, &format!("{what}.diag"))?,
            BandDoc::Many(_) => {
                return Err(Error::Parse(format!(
                    "{what}: a Toeplitz wing stores each band as a single matrix"
                )))
            }
        };
        let sub = match &doc.sub {
            BandDoc::One(d) => matrix_from_doc(d, &format!("{what}.sub"))?,
            BandDoc::Many(_) => {
                return Err(Error::Parse(format!(
                    "{what}: a Toeplitz wing stores each band as a single matrix"
                )))
            }
        };
        let sup = match &doc.sup {
            BandDoc::One(d) => matrix_from_doc(d, &format!("{what}.super"))?,
            BandDoc::Many(_) => {
                return Err(Error::Parse(format!(
                    "{what}: a Toeplitz wing stores each band as a single matrix"
                )))
            }
        };
        BlockTridiagonal::toeplitz(m, sub, diag, sup)
    } else {
        let sub = band_from_doc(&doc.sub, m - 1, &format!("{what}.sub"))?;
        let diag = band_from_doc(&doc.diag, m, &format!("{what}.diag"))?;
        let sup = band_from_doc(&doc.sup, m - 1, &format!("{what}.super"))?;
        BlockTridiagonal::new(sub, diag, sup)
    }
}

/// Renders a system as a pretty-printed JSON document.
pub fn system_to_json(sys: &BlockArrowSystem) -> String {
    let doc = SystemDoc {
        n: sys.block_dim(),
        m: sys.wing_rows(),
        blocks: BlocksDoc {
            wing_top: wing_to_doc(sys.wing_top()),
            wing_bottom: wing_to_doc(sys.wing_bottom()),
            center: matrix_to_doc(sys.center()),
            coupling_b: matrix_to_doc(sys.coupling_b()),
            coupling_c: matrix_to_doc(sys.coupling_c()),
            coupling_bh: matrix_to_doc(sys.coupling_bh()),
            coupling_ch: matrix_to_doc(sys.coupling_ch()),
        },
    };
    serde_json::to_string_pretty(&doc).expect("system serialization cannot fail")
}

/// Parses a system from its JSON document and validates all block shapes.
pub fn system_from_json(text: &str) -> Result<BlockArrowSystem> {
    let doc: SystemDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("system JSON: {e}")))?;
    if doc.m == 0 {
        return Err(Error::Parse("system JSON: m must be at least 1".into()));
    }
    let wing_top = wing_from_doc(&doc.blocks.wing_top, doc.m, "wing_top")?;
    let wing_bottom = wing_from_doc(&doc.blocks.wing_bottom, doc.m, "wing_bottom")?;
    let sys = BlockArrowSystem::assemble(
        wing_top,
        wing_bottom,
        matrix_from_doc(&doc.blocks.center, "center")?,
        matrix_from_doc(&doc.blocks.coupling_b, "coupling_b")?,
        matrix_from_doc(&doc.blocks.coupling_c, "coupling_c")?,
        matrix_from_doc(&doc.blocks.coupling_bh, "coupling_bh")?,
        matrix_from_doc(&doc.blocks.coupling_ch, "coupling_ch")?,
    )?;
    if sys.block_dim() != doc.n {
        return Err(Error::Parse(format!(
            "system JSON: declared n = {} but blocks are {}x{}",
            doc.n,
            sys.block_dim(),
            sys.block_dim()
        )));
    }
    Ok(sys)
}

/// A right-hand side is a bare JSON array.
pub fn rhs_from_json(text: &str) -> Result<Vector> {
    let data: Vec<f64> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("rhs JSON: {e}")))?;
    Vector::new(data)
}

pub fn rhs_to_json(v: &Vector) -> String {
    serde_json::to_string(v.data()).expect("vector serialization cannot fail")
}

/// Problem selection parsed from a JSON spec: either the layer problem
/// parameters or a Poisson size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemSpec {
    Shishkin { epsilon: f64, beta: f64, nx: usize, my: usize },
    Poisson { m: usize },
}

impl ProblemSpec {
    /// Builds the described system.
    pub fn build_system(&self) -> Result<BlockArrowSystem> {
        match *self {
            ProblemSpec::Shishkin { epsilon, beta, nx, my } => {
                Ok(crate::problems::build_shishkin(epsilon, beta, nx, my)?.system)
            }
            ProblemSpec::Poisson { m } => Ok(crate::problems::build_poisson(m)?.system),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemSpecDoc {
    Shishkin {
        epsilon: f64,
        beta: f64,
        #[serde(rename = "Nx")]
        nx: usize,
        #[serde(rename = "My")]
        my: usize,
    },
    Poisson {
        poisson_m: usize,
    },
}

pub fn problem_spec_from_json(text: &str) -> Result<ProblemSpec> {
    let doc: ProblemSpecDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("problem spec JSON: {e}")))?;
    Ok(match doc {
        ProblemSpecDoc::Shishkin { epsilon, beta, nx, my } => {
            ProblemSpec::Shishkin { epsilon, beta, nx, my }
        }
        ProblemSpecDoc::Poisson { poisson_m } => ProblemSpec::Poisson { m: poisson_m },
    })
}

/// Scientific notation with 16 significant digits; the CSV number format.
pub fn csv_number(x: f64) -> String {
    format!("{x:.15e}")
}

/// One row of the convergence-factor table.
#[derive(Clone, Copy, Debug)]
pub struct TableRow {
    pub nx: usize,
    pub my: usize,
    pub epsilon: f64,
    pub dim: usize,
    pub rho12_exact_inf: f64,
    pub rho_bound: f64,
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("N,M,epsilon,dim,rho12_exact_inf,rho_bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.nx,
            r.my,
            csv_number(r.epsilon),
            r.dim,
            csv_number(r.rho12_exact_inf),
            csv_number(r.rho_bound)
        ));
    }
    out
}

/// Error history of one stationary run next to its a-priori envelope.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("k,relative_error_inf,theorem_bound\n");
    for (k, (e, b)) in trace
        .error_norms
        .iter()
        .zip(&trace.bound_curve)
        .enumerate()
    {
        out.push_str(&format!("{},{},{}\n", k, csv_number(*e), csv_number(*b)));
    }
    out
}

/// Residual history of a GMRES solve.
pub fn residual_csv(result: &GmresResult) -> String {
    let mut out = String::from("k,relative_residual\n");
    for (k, r) in result.residual_norms.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k, csv_number(*r)));
    }
    out
}
