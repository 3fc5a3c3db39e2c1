//! Parameter sweeps: exact values next to ladder predictions and residuals,
//! written as CSV or JSON with a fixed column contract.

use crate::model::{ModelParams, Regime};
use crate::series;
use crate::{exact, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::io::Write;

/// What a scan row reports. `Coeffs` and `Asymptotic` are n-independent
/// self-checks of the expansion machinery; the rest compare finite-n exact
/// values against ladder predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "qnplus")]
    QnPlus,
    #[serde(rename = "qn")]
    Qn,
    #[serde(rename = "pn")]
    Pn,
    #[serde(rename = "coeffs")]
    Coeffs,
    #[serde(rename = "asymptotic")]
    Asymptotic,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Z,
        Quantity::QnPlus,
        Quantity::Qn,
        Quantity::Pn,
        Quantity::Coeffs,
        Quantity::Asymptotic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Z => "z",
            Quantity::QnPlus => "qnplus",
            Quantity::Qn => "qn",
            Quantity::Pn => "pn",
            Quantity::Coeffs => "coeffs",
            Quantity::Asymptotic => "asymptotic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|q| q.name()).collect();
                Error::InvalidParams(format!("unknown quantity {s:?}; expected one of {names:?}"))
            })
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanFormat {
    Csv,
    Json,
}

/// A scan request: the cartesian product of the four parameter lists, per
/// requested quantity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSpec {
    pub d_list: Vec<u32>,
    pub beta_list: Vec<f64>,
    pub h_list: Vec<f64>,
    pub n_list: Vec<u64>,
    pub quantities: Vec<Quantity>,
    pub output_path: String,
    pub format: ScanFormat,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d_list.is_empty()
            || self.beta_list.is_empty()
            || self.h_list.is_empty()
            || self.n_list.is_empty()
            || self.quantities.is_empty()
        {
            return Err(Error::InvalidParams(
                "every scan list (d, beta, h, n, quantities) must be non-empty".into(),
            ));
        }
        if self.n_list.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams(
                "n_list must be sorted ascending".into(),
            ));
        }
        if self.output_path.is_empty() {
            return Err(Error::InvalidParams("output_path must be non-empty".into()));
        }
        Ok(())
    }
}

/// One scan result. Numeric cells are None when the point failed (wrong
/// parity, undefined ladder, ...); `error` carries the reason and is only
/// serialized in the JSON format — CSV shows empty cells.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub d: u32,
    pub beta: f64,
    pub h: f64,
    pub n: u64,
    pub quantity: Quantity,
    pub exact: Option<f64>,
    pub pred_m0: Option<f64>,
    pub pred_m1: Option<f64>,
    pub residual_m0: Option<f64>,
    pub residual_m1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fixed CSV header.
pub const CSV_HEADER: &str = "d,beta,h,n,quantity,exact,pred_M0,pred_M1,residual_M0,residual_M1";

impl ScanRow {
    fn empty(p: &ModelParams, n: u64, quantity: Quantity) -> Self {
        Self {
            d: p.d,
            beta: p.beta,
            h: p.h,
            n,
            quantity,
            exact: None,
            pred_m0: None,
            pred_m1: None,
            residual_m0: None,
            residual_m1: None,
            error: None,
        }
    }

    pub fn csv_line(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.d,
            self.beta,
            self.h,
            self.n,
            self.quantity,
            cell(self.exact),
            cell(self.pred_m0),
            cell(self.pred_m1),
            cell(self.residual_m0),
            cell(self.residual_m1),
        )
    }
}

fn compute_row(p: &ModelParams, n: u64, quantity: Quantity) -> ScanRow {
    let mut row = ScanRow::empty(p, n, quantity);
    let nf = n as f64;
    let outcome: Result<()> = (|| {
        match quantity {
            // Reduced log scale: ln(Z 2^{-n}), both for the exact value and
            // the ladder prediction; residuals are log-scale differences.
            Quantity::Z => {
                let exact = exact::reduced_log_partition(p, n)?;
                row.exact = Some(exact);
                let e = series::e_coeffs(p, 1)?;
                for (m, pred_cell, res_cell) in [
                    (0usize, &mut row.pred_m0, &mut row.residual_m0),
                    (1, &mut row.pred_m1, &mut row.residual_m1),
                ] {
                    let pred = e.predict_log(nf, m) - nf * LN_2;
                    *pred_cell = Some(pred);
                    *res_cell = Some(exact - pred);
                }
            }
            // The positive-weight supremum has a one-term asymptotic; M1
            // cells stay empty.
            Quantity::QnPlus => {
                let exact = exact::qn_plus_exact(p, n)?.probability;
                row.exact = Some(exact);
                let asym = series::qn_plus_asymptotic(p)?;
                let pred = asym.predict(nf, 0);
                row.pred_m0 = Some(pred);
                row.residual_m0 = Some(exact - pred);
            }
            Quantity::Qn => {
                let exact = exact::qn_even_exact(p, n)?.probability;
                row.exact = Some(exact);
                let qn = series::qn_coeffs(p, 1)?;
                for (m, pred_cell, res_cell) in [
                    (0usize, &mut row.pred_m0, &mut row.residual_m0),
                    (1, &mut row.pred_m1, &mut row.residual_m1),
                ] {
                    let pred = qn.predict(nf, m);
                    *pred_cell = Some(pred);
                    *res_cell = Some(exact - pred);
                }
            }
            // The odd-parity probability is exact-only: no ladder is exposed
            // for it, so prediction cells stay empty.
            Quantity::Pn => {
                row.exact = Some(exact::pn_odd_exact(p, n)?.probability);
            }
            // n-independent self-check: H0 from the ladder division against
            // the closed form sqrt(2/pi) cosh t*, with H1 reported as the M1
            // prediction.
            Quantity::Coeffs => {
                let qn = series::qn_coeffs(p, 1)?;
                let h0 = qn.values[0];
                row.exact = Some(h0);
                let closed = if p.regime() == Regime::Critical {
                    (2.0 / PI).sqrt()
                } else {
                    let sol = crate::model::solve_mean_field_default(p)?;
                    (2.0 / PI).sqrt() * sol.t_star.cosh()
                };
                row.pred_m0 = Some(closed);
                row.residual_m0 = Some(h0 - closed);
                row.pred_m1 = Some(qn.values[1]);
            }
            // Rescaled convergence check: n^{1/2} Qn+ (n^{3/4} at the
            // critical point) against its limit constant.
            Quantity::Asymptotic => {
                let asym = series::qn_plus_asymptotic(p)?;
                let exact = exact::qn_plus_exact(p, n)?.probability;
                let scaled = exact * nf.powf(-asym.powers[0].as_f64());
                row.exact = Some(scaled);
                row.pred_m0 = Some(asym.values[0]);
                row.residual_m0 = Some(scaled - asym.values[0]);
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

/// Evaluate the whole scan. Points run on the rayon pool; the returned rows
/// are in input order (d, then beta, then h, then n, then quantity).
pub fn run_scan(spec: &ScanSpec) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    let mut points = Vec::new();
    for &d in &spec.d_list {
        for &beta in &spec.beta_list {
            for &h in &spec.h_list {
                let p = ModelParams::new(d, beta, h)?;
                for &n in &spec.n_list {
                    for &q in &spec.quantities {
                        points.push((p, n, q));
                    }
                }
            }
        }
    }
    Ok(points
        .par_iter()
        .map(|(p, n, q)| compute_row(p, *n, *q))
        .collect())
}

/// Serialize rows in the requested format. CSV: fixed header, one line per
/// row, empty cells for failed values. JSON: array of row objects with
/// sorted keys and an `error` field on failed rows.
pub fn render_rows(format: ScanFormat, rows: &[ScanRow]) -> Result<String> {
    match format {
        ScanFormat::Csv => {
            let mut out = String::with_capacity(rows.len() * 64 + CSV_HEADER.len() + 1);
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in rows {
                out.push_str(&row.csv_line());
                out.push('\n');
            }
            Ok(out)
        }
        ScanFormat::Json => {
            // Through Value: object keys come out sorted.
            let value = serde_json::to_value(rows)?;
            let mut text = serde_json::to_string_pretty(&value)?;
            text.push('\n');
            Ok(text)
        }
    }
}

/// Run the scan and write the result to `spec.output_path`.
pub fn run_to_file(spec: &ScanSpec) -> Result<Vec<ScanRow>> {
    let rows = run_scan(spec)?;
    let text = render_rows(spec.format, &rows)?;
    let mut file = std::fs::File::create(&spec.output_path)?;
    file.write_all(text.as_bytes())?;
    Ok(rows)
}
