//! Artifact serialization: the JSON report envelope, CSV tables with a fixed
//! numeric format, and gnuplot script emission. Everything here is
//! deterministic byte-for-byte given the same inputs: struct field order fixes
//! the JSON layout, and floats print through one formatter.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    /// Exit code under the CLI contract: PASS → 0, FAIL → 2.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
        }
    }
}

/// The envelope every JSON artifact shares.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub rows: Vec<Value>,
    pub verdict: Verdict,
    pub constants: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config: config.clone(),
            rows: Vec::new(),
            verdict: Verdict::Pass,
            constants: Map::new(),
        }
    }

    pub fn push_row(&mut self, row: Value) {
        self.rows.push(row);
    }

    pub fn set_constant(&mut self, key: &str, value: Value) {
        self.constants.insert(key.to_string(), value);
    }

    pub fn set_verdict(&mut self, ok: bool) {
        self.verdict = Verdict::from_bool(ok);
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json()?)
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a CSV table: header row plus data rows, LF endings throughout.
pub fn csv_table(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for &x in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&fmt_sig17(x));
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text.as_bytes())?;
    Ok(())
}

/// A gnuplot script plotting columns of a CSV artifact. `y_columns` holds
/// (1-based column index, legend label) pairs.
pub fn plot_script(
    csv_file: &str,
    title: &str,
    x_column: usize,
    y_columns: &[(usize, &str)],
    log_x: bool,
    log_y: bool,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set key outside");
    match (log_x, log_y) {
        (true, true) => {
            let _ = writeln!(s, "set logscale xy");
        }
        (true, false) => {
            let _ = writeln!(s, "set logscale x");
        }
        (false, true) => {
            let _ = writeln!(s, "set logscale y");
        }
        (false, false) => {}
    }
    let mut first = true;
    let _ = write!(s, "plot");
    for (col, label) in y_columns {
        if !first {
            let _ = write!(s, ",");
        }
        first = false;
        let _ = write!(
            s,
            " '{csv_file}' using {x_column}:{col} with linespoints title '{label}'"
        );
    }
    s.push('\n');
    s
}

/// JSON value for a complex number: a [re, im] pair.
pub fn complex_value(z: &num_complex::Complex64) -> Value {
    Value::Array(vec![json_f64(z.re), json_f64(z.im)])
}

/// JSON value for a complex vector.
pub fn complex_vec_value(v: &[num_complex::Complex64]) -> Value {
    Value::Array(v.iter().map(complex_value).collect())
}

/// Total-order f64 → JSON number (NaN and infinities become null: JSON has
/// no encoding for them, and artifacts must stay machine-readable).
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}
