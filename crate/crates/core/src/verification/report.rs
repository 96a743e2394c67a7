use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::nelson::NelsonModel;

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub id: String,
    /// The identity being certified, written out.
    pub anchor: String,
    pub raw: f64,
    pub projected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub fingerprint: String,
}

impl IdentityReport {
    pub fn new(id: &str, anchor: &str, raw: f64, projected: f64, tolerance: f64, fingerprint: String) -> Self {
        Self {
            id: id.to_string(),
            anchor: anchor.to_string(),
            raw,
            projected,
            tolerance,
            pass: projected <= tolerance,
            fingerprint,
        }
    }

    pub fn csv_header() -> &'static str {
        "id,raw,projected,tolerance,pass,fingerprint,anchor"
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        write!(
            s,
            "{},{:e},{:e},{:e},{},{},\"{}\"",
            self.id,
            self.raw,
            self.projected,
            self.tolerance,
            self.pass,
            self.fingerprint,
            self.anchor.replace('"', "'")
        )
        .unwrap();
        s
    }
}

/// Short description of the parameters, grid size and truncation.
pub fn fingerprint(model: &NelsonModel) -> String {
    let p = model.params();
    format!(
        "M={} N={} P=({};{};{}) sigma={} kappa={} lambda={} alpha_bar={} quadratic={}",
        model.grid().len(),
        model.n_max(),
        p.p[0],
        p.p[1],
        p.p[2],
        p.sigma,
        p.kappa,
        p.lambda,
        p.alpha_bar,
        model.quadratic()
    )
}
