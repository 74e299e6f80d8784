//! Stored benchmark cases with high-precision reference values.
//!
//! `reference` values were computed with 40-digit arithmetic; `quoted` are the
//! 15-digit figures commonly cited for the same configurations.

use crate::cli::Model;
use crate::invz::{Method, Tuning};
use crate::wienerhopf::FilterOptions;

#[derive(Debug, Clone)]
pub struct MomentCase {
    pub name: &'static str,
    pub model: Model,
    pub n: u32,
    pub method: Method,
    pub tuning: Tuning,
    pub reference: f64,
    pub quoted: f64,
}

/// High-precision values of the stored moments.
pub const KOBOL_N100: f64 = 5.324_007_997_716_66e-5;
pub const KOBOL_N500: f64 = 8.872_342_965_228_332e-8;
pub const DRIFT_N100: f64 = 5.604_083_178_421_058e-5;
pub const MIXTURE_N100: f64 = 3.726_805_598_401_658e-5;
pub const NU15_N100: f64 = 3.008_592_414_949_358e-7;
pub const NTS_DRIFT_N100: f64 = 6.167_416_196_788_841e-5;

pub fn kobol_subordinator() -> Model {
    Model::kobol(0.1, 0.5, 1.01, 0.0)
}

pub fn kobol_drift() -> Model {
    Model::kobol(0.1, 0.5, 1.01, 0.05)
}

pub fn kobol_atom_mixture() -> Model {
    Model::mixture(0.3, 2.0, kobol_subordinator())
}

pub fn kobol_nu_above_one() -> Model {
    Model::kobol(0.1, 1.5, 1.01, 0.0)
}

pub fn nts_drift() -> Model {
    Model::nts(0.1, 0.5, 1.01, 0.05)
}

fn near_unit(reduce: f64) -> Tuning {
    Tuning { interval: Some((0.98, 1.0)), reduce, ..Default::default() }
}

fn trap(nodes: usize) -> Tuning {
    Tuning { trap_nodes: Some(nodes), ..Default::default() }
}

pub fn moment_cases() -> Vec<MomentCase> {
    let case = |name, model, n, method, tuning, reference, quoted| MomentCase {
        name,
        model,
        n,
        method,
        tuning,
        reference,
        quoted,
    };
    vec![
        case(
            "kobol_subordinator",
            kobol_subordinator(),
            100,
            Method::Trap,
            trap(1101),
            KOBOL_N100,
            5.32400799771669e-05,
        ),
        case(
            "kobol_subordinator",
            kobol_subordinator(),
            100,
            Method::Sinh1,
            near_unit(0.75),
            KOBOL_N100,
            5.32400799771669e-05,
        ),
        case(
            "kobol_subordinator_n500",
            kobol_subordinator(),
            500,
            Method::Sinh1,
            near_unit(0.75),
            KOBOL_N500,
            8.87234294030321e-08,
        ),
        case("kobol_drift", kobol_drift(), 100, Method::Sinh1, near_unit(0.8), DRIFT_N100, 5.60408317840114e-05),
        case("kobol_drift", kobol_drift(), 100, Method::Sinh2, near_unit(0.75), DRIFT_N100, 5.60408317840114e-05),
        case(
            "kobol_atom_mixture",
            kobol_atom_mixture(),
            100,
            Method::Trap,
            trap(1101),
            MIXTURE_N100,
            3.72680559839856e-05,
        ),
        case(
            "kobol_atom_mixture",
            kobol_atom_mixture(),
            100,
            Method::Sinh1,
            near_unit(0.8),
            MIXTURE_N100,
            3.72680559839856e-05,
        ),
        case(
            "kobol_atom_mixture",
            kobol_atom_mixture(),
            100,
            Method::Sinh2,
            near_unit(0.75),
            MIXTURE_N100,
            3.72680559839856e-05,
        ),
        case(
            "kobol_nu_above_one",
            kobol_nu_above_one(),
            100,
            Method::Sinh3,
            near_unit(0.85),
            NU15_N100,
            3.00859241487316e-07,
        ),
        case(
            "nts_drift",
            nts_drift(),
            100,
            Method::Trap,
            Tuning { trap_nodes: Some(900), radius: Some(0.98), ..Default::default() },
            NTS_DRIFT_N100,
            6.16741619667409e-05,
        ),
        case(
            "nts_drift",
            nts_drift(),
            100,
            Method::Log,
            Tuning { interval: Some((0.95, 1.0)), ..Default::default() },
            NTS_DRIFT_N100,
            6.16741619667409e-05,
        ),
    ]
}

/// Rational spectral density `(a₊−z)^{m₊}(a₊−1/z)^{m₊}(a₋+z)^{m₋}(a₋+1/z)^{m₋}` and grid sizes.
#[derive(Debug, Clone, Copy)]
pub struct FilterCase {
    pub name: &'static str,
    pub a_plus: f64,
    pub a_minus: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub n_lo: u32,
    pub n_hi: u32,
    pub n_half: usize,
    pub n_half_inner: usize,
    /// Required maximal relative error against the series expansion.
    pub tolerance: f64,
}

impl FilterCase {
    pub fn options(&self) -> FilterOptions {
        FilterOptions { n_half: Some(self.n_half), n_half_inner: Some(self.n_half_inner), ..Default::default() }
    }
}

pub fn filter_narrow() -> FilterCase {
    FilterCase {
        name: "filter_narrow",
        a_plus: 1.0001,
        a_minus: 1.00015,
        m_plus: 3.0,
        m_minus: -1.0,
        n_lo: 100,
        n_hi: 400,
        n_half: 172,
        n_half_inner: 237,
        tolerance: 5e-14,
    }
}

pub fn filter_double_pole() -> FilterCase {
    FilterCase { name: "filter_double_pole", m_plus: -1.0, tolerance: 1e-10, ..filter_narrow() }
}

pub fn filter_very_narrow() -> FilterCase {
    FilterCase {
        name: "filter_very_narrow",
        a_plus: 1.00001,
        a_minus: 1.000015,
        n_half: 575,
        n_half_inner: 626,
        tolerance: 5e-9,
        ..filter_double_pole()
    }
}

pub fn filter_cases() -> Vec<FilterCase> {
    vec![filter_narrow(), filter_double_pole(), filter_very_narrow()]
}
