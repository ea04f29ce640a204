use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Target {
    pub value: f64,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_err_est: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_evals: Option<u64>,
    pub seed: u64,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_target: Option<Target>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Value>,
}

/// Writes every float with 17 significant digits.
struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value == value.trunc() && value.abs() < 1e15 {
            write!(w, "{value:.1}")
        } else {
            write!(w, "{value:.16e}")
        }
    }
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
        self.serialize(&mut ser).expect("report serialises");
        String::from_utf8(buf).expect("utf-8 JSON")
    }

    pub fn append_csv(&self, path: &Path) -> io::Result<()> {
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut w = csv::Writer::from_writer(file);
        if fresh {
            w.write_record([
                "command", "params", "value", "std_error", "abs_err_est", "n_samples", "n_evals", "seed", "elapsed_ms",
            ])?;
        }
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let optn = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        let params = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        w.write_record([
            self.command.clone(),
            params,
            format!("{:.16e}", self.value),
            opt(self.std_error),
            opt(self.abs_err_est),
            optn(self.n_samples),
            optn(self.n_evals),
            self.seed.to_string(),
            self.elapsed_ms.to_string(),
        ])?;
        w.flush()
    }
}
