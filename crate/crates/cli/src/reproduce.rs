//! Benchmark-table reproduction: re-solves each table's EL/FL/BL grid with
//! the published parameters (λ = 0.2·A) and compares every cost cell to the
//! published two-decimal value.

use anyhow::{bail, Result};
use rayon::prelude::*;

use capq_core::model::LoadPattern;
use capq_core::ProblemConfig64;

use crate::scenario::{run_scenario, Method};
use crate::tables::{paper_cells, table_spec, TableSpec};

/// Cells print two decimals, so half an ULP of the printed precision.
pub const PAPER_TOLERANCE: f64 = 0.005;

pub const CSV_HEADER: &str =
    "table,load,K,M,A,lambda,ce,co,method,avg_cost,paper_cost,abs_dev,note";

/// One comparison row: computed cost vs the published one, or a skip marker
/// for rows we cannot reproduce.
#[derive(Debug, Clone)]
pub struct ReproRow {
    pub table: u8,
    pub load: LoadPattern,
    pub horizon: u32,
    pub servers: u32,
    pub max_arrivals: u32,
    pub lambda: f64,
    pub early_cost: f64,
    pub overtime_cost: f64,
    pub method: Method,
    pub avg_cost: Option<f64>,
    pub paper_cost: Option<f64>,
    pub note: String,
}

impl ReproRow {
    pub fn abs_dev(&self) -> Option<f64> {
        Some((self.avg_cost? - self.paper_cost?).abs())
    }

    pub fn csv_row(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.table,
            self.load,
            self.horizon,
            self.servers,
            self.max_arrivals,
            self.lambda,
            self.early_cost,
            self.overtime_cost,
            self.method,
            fmt_opt(self.avg_cost),
            fmt_opt(self.paper_cost),
            fmt_opt(self.abs_dev()),
            self.note,
        )
    }
}

/// Outcome of a table reproduction: all rows plus the worst deviation.
#[derive(Debug)]
pub struct Reproduction {
    pub rows: Vec<ReproRow>,
    pub max_abs_dev: f64,
    pub cells_checked: usize,
}

impl Reproduction {
    pub fn within_tolerance(&self) -> bool {
        self.max_abs_dev <= PAPER_TOLERANCE + 1e-9
    }
}

/// The instances behind one table's published grid (EL/FL/BL only), with
/// the coupling λ = 0.2·A. `fast` restricts to A ≤ 3.
pub fn grid_configs(spec: &TableSpec, fast: bool) -> Vec<ProblemConfig64> {
    let loads = [LoadPattern::Equal, LoadPattern::Front, LoadPattern::Back];
    let mut out = Vec::new();
    for load in loads {
        for &a in spec.a_values {
            if fast && a > 3 {
                continue;
            }
            out.push(ProblemConfig64::new(
                spec.horizon,
                spec.servers,
                a,
                a as f64 / 5.0, // λ = 0.2·A without drift in the printed rate
                spec.early_cost,
                spec.overtime_cost,
                load,
            ));
        }
    }
    out
}

/// Re-solves one table and compares against the published values.
///
/// Cells run in parallel; rows come back in grid order (load, then A, then
/// the fixed method order) regardless of completion order. AL rows are
/// emitted as skips: their random preference vectors were never published.
pub fn reproduce_table(id: u8, fast: bool) -> Result<Reproduction> {
    let Some(spec) = table_spec(id) else {
        bail!("no such table: {id} (expected 1..=6)");
    };
    let cells = paper_cells(id);
    let configs = grid_configs(&spec, fast);

    let solved: Vec<_> = configs
        .par_iter()
        .map(|config| run_scenario("reproduce", config, &Method::ALL))
        .collect::<capq_core::Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut max_abs_dev = 0.0f64;
    let mut cells_checked = 0usize;
    for (config, results) in configs.iter().zip(&solved) {
        let cell = cells
            .iter()
            .find(|c| c.load == config.load && c.max_arrivals == config.max_arrivals)
            .expect("grid matches published cells");
        for (result, &paper) in results.iter().zip(&cell.costs) {
            let row = ReproRow {
                table: id,
                load: config.load,
                horizon: config.horizon,
                servers: config.servers,
                max_arrivals: config.max_arrivals,
                lambda: config.lambda,
                early_cost: config.early_cost,
                overtime_cost: config.overtime_cost,
                method: result.method,
                avg_cost: Some(result.avg_cost),
                paper_cost: Some(paper),
                note: String::new(),
            };
            max_abs_dev = max_abs_dev.max(row.abs_dev().unwrap());
            cells_checked += 1;
            rows.push(row);
        }
    }

    // AL rows: published without the q vectors that generated them.
    for &a in spec.a_values {
        if fast && a > 3 {
            continue;
        }
        for method in Method::ALL {
            rows.push(ReproRow {
                table: id,
                load: LoadPattern::Arbitrary,
                horizon: spec.horizon,
                servers: spec.servers,
                max_arrivals: a,
                lambda: a as f64 / 5.0,
                early_cost: spec.early_cost,
                overtime_cost: spec.overtime_cost,
                method,
                avg_cost: None,
                paper_cost: None,
                note: "skipped: unpublished q".to_string(),
            });
        }
    }

    Ok(Reproduction {
        rows,
        max_abs_dev,
        cells_checked,
    })
}
