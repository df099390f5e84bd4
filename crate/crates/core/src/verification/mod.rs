//! Manufactured solutions, convergence measurement and the `v`
//! identification experiment.

mod identification;
mod mms;

pub use identification::*;
pub use mms::*;

pub use crate::solver::stokes_oracle;

/// Errors and fitted orders of a refinement study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Grid spacing or time step of each member, coarsest first.
    pub sizes: Vec<f64>,
    /// Relative L² error of `(ρ, w)` at the final time.
    pub errors_l2: Vec<f64>,
    /// Relative L∞ error of `(ρ, w)` at the final time.
    pub errors_linf: Vec<f64>,
    /// Observed order between consecutive members.
    pub orders: Vec<f64>,
    /// Least-squares slope of `log e` against `log h`.
    pub fitted_order: f64,
    /// Set when the error failed to decrease above the round-off plateau.
    pub unresolved: bool,
}

/// Errors below this are treated as round-off.
pub const PLATEAU: f64 = 1e-11;

impl ConvergenceReport {
    pub fn from_errors(sizes: Vec<f64>, errors_l2: Vec<f64>, errors_linf: Vec<f64>) -> Self {
        let orders = (1..sizes.len())
            .map(|i| (errors_l2[i - 1] / errors_l2[i]).ln() / (sizes[i - 1] / sizes[i]).ln())
            .collect();
        let fitted_order = fit_slope(&sizes, &errors_l2);
        let unresolved = (1..sizes.len()).any(|i| errors_l2[i - 1] > PLATEAU && errors_l2[i] >= errors_l2[i - 1]);
        Self { sizes, errors_l2, errors_linf, orders, fitted_order, unresolved }
    }

    /// CSV with columns `size,error_l2,error_linf,order`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("size,error_l2,error_linf,order\n");
        for i in 0..self.sizes.len() {
            let order = if i == 0 { String::new() } else { format!("{:.16e}", self.orders[i - 1]) };
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{}\n",
                self.sizes[i], self.errors_l2[i], self.errors_linf[i], order
            ));
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
