//! Published benchmark values for the six cost tables. Each cell carries
//! the two-decimal average costs in method order (opt, dn, dn1s, th, th1s).
//! AL rows are present in the source but their random preference vectors
//! are unpublished, so they are listed without values and skipped.

use capq_core::model::LoadPattern;

/// Static description of one benchmark table's parameter grid.
#[derive(Debug, Clone, Copy)]
pub struct TableSpec {
    pub id: u8,
    pub horizon: u32,
    pub servers: u32,
    pub early_cost: f64,
    pub overtime_cost: f64,
    pub a_values: &'static [u32],
}

/// One published row: the five method costs at (load, A).
#[derive(Debug, Clone, Copy)]
pub struct PaperCell {
    pub load: LoadPattern,
    pub max_arrivals: u32,
    /// Costs in method order opt, dn, dn1s, th, th1s.
    pub costs: [f64; 5],
}

pub fn table_spec(id: u8) -> Option<TableSpec> {
    let spec = match id {
        1 => TableSpec { id, horizon: 4, servers: 1, early_cost: 5.0, overtime_cost: 20.0, a_values: &[1, 2, 3] },
        2 => TableSpec { id, horizon: 4, servers: 1, early_cost: 10.0, overtime_cost: 20.0, a_values: &[1, 2, 3] },
        3 => TableSpec { id, horizon: 4, servers: 5, early_cost: 10.0, overtime_cost: 20.0, a_values: &[1, 2, 3] },
        4 => TableSpec { id, horizon: 3, servers: 1, early_cost: 10.0, overtime_cost: 20.0, a_values: &[1, 2, 5, 10] },
        5 => TableSpec { id, horizon: 5, servers: 1, early_cost: 5.0, overtime_cost: 20.0, a_values: &[1, 2] },
        6 => TableSpec { id, horizon: 5, servers: 1, early_cost: 10.0, overtime_cost: 20.0, a_values: &[1, 2] },
        _ => return None,
    };
    Some(spec)
}

use LoadPattern::{Back as BL, Equal as EL, Front as FL};

const fn cell(load: LoadPattern, a: u32, costs: [f64; 5]) -> PaperCell {
    PaperCell { load, max_arrivals: a, costs }
}

const TABLE1: &[PaperCell] = &[
    cell(EL, 1, [0.18, 0.26, 0.19, 0.19, 0.18]),
    cell(EL, 2, [0.98, 1.38, 1.01, 1.01, 0.98]),
    cell(EL, 3, [2.27, 2.97, 2.30, 2.30, 2.27]),
    cell(FL, 1, [0.18, 0.21, 0.18, 0.18, 0.18]),
    cell(FL, 2, [1.18, 1.33, 1.18, 1.18, 1.18]),
    cell(FL, 3, [2.57, 2.95, 2.57, 2.57, 2.57]),
    cell(BL, 1, [0.09, 0.21, 0.10, 0.10, 0.09]),
    cell(BL, 2, [0.67, 1.33, 0.79, 0.79, 0.67]),
    cell(BL, 3, [1.78, 2.95, 1.92, 1.92, 1.78]),
];

const TABLE2: &[PaperCell] = &[
    cell(EL, 1, [0.21, 0.26, 0.21, 0.22, 0.21]),
    cell(EL, 2, [1.13, 1.38, 1.20, 1.24, 1.13]),
    cell(EL, 3, [2.55, 2.97, 2.63, 2.71, 2.55]),
    cell(FL, 1, [0.19, 0.21, 0.19, 0.19, 0.19]),
    cell(FL, 2, [1.23, 1.33, 1.24, 1.24, 1.23]),
    cell(FL, 3, [2.77, 2.95, 2.78, 2.79, 2.77]),
    cell(BL, 1, [0.13, 0.21, 0.14, 0.17, 0.13]),
    cell(BL, 2, [0.95, 1.33, 1.12, 1.27, 0.95]),
    cell(BL, 3, [2.32, 2.95, 2.53, 2.77, 2.32]),
];

const TABLE3: &[PaperCell] = &[
    cell(EL, 1, [0.00, 0.00, 0.00, 0.09, 0.00]),
    cell(EL, 2, [0.00, 0.00, 0.00, 0.04, 0.00]),
    cell(EL, 3, [0.00, 0.00, 0.00, 0.01, 0.00]),
    cell(FL, 1, [0.00, 0.00, 0.00, 0.02, 0.00]),
    cell(FL, 2, [0.00, 0.00, 0.00, 0.01, 0.00]),
    cell(FL, 3, [0.00, 0.00, 0.00, 0.00, 0.00]),
    cell(BL, 1, [0.00, 0.00, 0.00, 0.15, 0.00]),
    cell(BL, 2, [0.00, 0.00, 0.00, 0.09, 0.00]),
    cell(BL, 3, [0.00, 0.00, 0.00, 0.04, 0.00]),
];

const TABLE4: &[PaperCell] = &[
    cell(EL, 1, [0.20, 0.23, 0.20, 0.20, 0.20]),
    cell(EL, 2, [1.16, 1.36, 1.19, 1.19, 1.16]),
    cell(EL, 5, [6.81, 7.36, 6.86, 6.86, 6.81]),
    cell(EL, 10, [22.09, 22.71, 22.20, 22.20, 22.09]),
    cell(FL, 1, [0.16, 0.17, 0.16, 0.16, 0.16]),
    cell(FL, 2, [1.23, 1.30, 1.23, 1.24, 1.23]),
    cell(FL, 5, [7.16, 7.35, 7.17, 7.20, 7.16]),
    cell(FL, 10, [22.23, 22.71, 22.23, 22.23, 22.23]),
    cell(BL, 1, [0.12, 0.17, 0.12, 0.12, 0.12]),
    cell(BL, 2, [0.95, 1.30, 1.05, 1.05, 0.95]),
    cell(BL, 5, [6.46, 7.35, 6.59, 6.59, 6.46]),
    cell(BL, 10, [21.94, 22.71, 21.96, 21.98, 21.94]),
];

const TABLE5: &[PaperCell] = &[
    cell(EL, 1, [0.18, 0.28, 0.19, 0.19, 0.18]),
    cell(EL, 2, [0.92, 1.39, 1.00, 1.00, 0.92]),
    cell(FL, 1, [0.19, 0.24, 0.20, 0.20, 0.19]),
    cell(FL, 2, [1.14, 1.36, 1.15, 1.15, 1.14]),
    cell(BL, 1, [0.09, 0.24, 0.14, 0.14, 0.09]),
    cell(BL, 2, [0.64, 1.36, 0.89, 0.89, 0.64]),
];

const TABLE6: &[PaperCell] = &[
    cell(EL, 1, [0.22, 0.28, 0.22, 0.26, 0.22]),
    cell(EL, 2, [1.11, 1.39, 1.21, 1.32, 1.11]),
    cell(FL, 1, [0.21, 0.24, 0.21, 0.21, 0.21]),
    cell(FL, 2, [1.22, 1.36, 1.24, 1.24, 1.22]),
    cell(BL, 1, [0.15, 0.24, 0.20, 0.25, 0.15]),
    cell(BL, 2, [0.96, 1.36, 1.15, 1.57, 0.96]),
];

pub fn paper_cells(id: u8) -> &'static [PaperCell] {
    match id {
        1 => TABLE1,
        2 => TABLE2,
        3 => TABLE3,
        4 => TABLE4,
        5 => TABLE5,
        6 => TABLE6,
        _ => &[],
    }
}
