//! Result rows, their CSV form and the metadata sidecar.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::numerics::ToleranceBudget;

/// Which quantity the fourth CSV column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Gamma,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub method: String,
    pub epsilon: f64,
    pub theta_db: f64,
    /// γ for meta tables, the moment order for moment tables.
    pub x: f64,
    /// `None` when the method failed on this cell.
    pub value: Option<f64>,
    pub ci: Option<f64>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub seed: u64,
    pub bs_density: f64,
    pub tolerances: ToleranceBudget,
    pub n_realizations: usize,
    /// Messages of failed cells, in row order.
    pub failures: Vec<String>,
    /// Discarded simulation attempts.
    pub resampled_realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub axis: Axis,
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

impl ResultTable {
    pub fn header(&self) -> &'static str {
        match self.axis {
            Axis::Gamma => "method,epsilon,theta_db,gamma,value,ci,runtime_ms",
            Axis::B => "method,epsilon,theta_db,b,value,ci,runtime_ms",
        }
    }

    /// CSV text. Failed cells have an empty value.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(self.header());
        s.push('\n');
        for r in &self.rows {
            s += &format!(
                "{},{},{},{},{},{},{:.3}\n",
                r.method,
                r.epsilon,
                r.theta_db,
                r.x,
                opt(r.value),
                opt(r.ci),
                r.runtime_ms
            );
        }
        s
    }

    /// Writes the CSV and `<path>.meta.json` next to it.
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())?;
        let meta = serde_json::to_string_pretty(&self.metadata).map_err(std::io::Error::other)?;
        let mut f = std::fs::File::create(path.with_extension("meta.json"))?;
        writeln!(f, "{meta}")
    }

    pub fn values<'a>(&'a self, method: &'a str, epsilon: f64) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.method == method && r.epsilon == epsilon)
    }

    pub fn lookup(&self, method: &str, epsilon: f64, theta_db: f64, x: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.epsilon == epsilon && r.theta_db == theta_db && r.x == x)
            .and_then(|r| r.value)
    }
}
