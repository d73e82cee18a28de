//! Asymptotic formulas and their numerical evaluation.

mod estimates;
mod lambert;
mod theta;
mod zmean;

use std::io::Write;

pub use estimates::{
    alt_expansion, c_sigma, charlier_correction, mu_leading, ratio_checks, saddle_leading, t_m, tau, variance_asymptotic, AltCentre, AltExpansion,
    AsymptoticEstimate, EstimateOrder, LeadingEstimate, RatioReport, RatioRow, VarianceEstimate,
};
pub use lambert::{lambert_residual, lambert_w, SaddleData};
pub use theta::{
    m_series, m_series_residual, periodic_g, theta_F, theta_F_derivatives, theta_F_residual, theta_bound, theta_bound_residual, PeriodicG,
};
pub use zmean::{
    c_literal_partial, c_quadrature, fit_c, z_mean_asymptotic, z_mean_report, z_mean_with, ZMeanFit, ZMeanReport, A1_PRINTED, A2_PRINTED, C_PRINTED,
};

pub const GRID_CSV_HEADER: &str = "formula,n_or_x,p,value,log_value,reference,ratio";

/// One row of a grid evaluation; `reference` is the exact value the formula
/// is compared with, when there is one.
#[derive(Clone, Debug)]
pub struct GridRow {
    pub formula: String,
    pub n_or_x: f64,
    pub p: String,
    pub value: f64,
    pub log_value: f64,
    pub reference: Option<f64>,
}

impl GridRow {
    pub fn ratio(&self) -> Option<f64> {
        self.reference.map(|r| self.value / r)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

pub fn write_grid_csv<W: Write>(out: &mut W, rows: &[GridRow]) -> std::io::Result<()> {
    writeln!(out, "{GRID_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{:.12e},{:.12e},{},{}", r.formula, r.n_or_x, r.p, r.value, r.log_value, opt(r.reference), opt(r.ratio()))?;
    }
    Ok(())
}

/// `|ratio - 1|` shrinks along the sequence, with at most `allowed` steps
/// where it grows.
pub fn improves_toward_one(ratios: &[f64], allowed: usize) -> bool {
    crate::stats::shrinking(&ratios.iter().map(|r| r - 1.0).collect::<Vec<_>>(), allowed)
}
