//! CSV, JSON and gnuplot emission.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Not computed for the selected method.
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            Cell::Num(v) if *v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) => format!("{v:e}"),
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# key = value` lines after the config.
    pub notes: Vec<String>,
    /// Structured results for the JSON outputs.
    pub details: Value,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self { command, columns, rows: Vec::new(), notes: Vec::new(), details: Value::Null }
    }

    pub fn to_csv(&self, cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(out, "# floquet-eikonal {} {}", env!("CARGO_PKG_VERSION"), self.command).map_err(io)?;
        writeln!(out, "# generated_unix = {ts}").map_err(io)?;
        for line in cfg.to_toml().lines() {
            writeln!(out, "# {line}").map_err(io)?;
        }
        for note in &self.notes {
            writeln!(out, "# {note}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(|e| CliError::io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(|e| CliError::io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::io(e.to_string()))
    }

    pub fn to_json(&self, cfg: &RunConfig) -> Vec<u8> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().map(Cell::json)).collect()))
            .collect();
        let doc = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "notes": self.notes,
            "rows": rows,
            "details": self.details,
        });
        let mut s = serde_json::to_vec_pretty(&doc).expect("JSON values always serialize");
        s.push(b'\n');
        s
    }

    /// Writes the primary output and any requested companions.
    pub fn emit(&self, cfg: &RunConfig) -> Result<(), CliError> {
        let primary = match cfg.format {
            Format::Csv => self.to_csv(cfg)?,
            Format::Json => self.to_json(cfg),
        };
        match &cfg.output {
            None => {
                if cfg.json_mirror || cfg.gnuplot {
                    return Err(CliError::invalid("json_mirror and gnuplot need an output path"));
                }
                std::io::stdout().write_all(&primary).map_err(io)?;
            }
            Some(path) => {
                write_file(path, &primary)?;
                if cfg.json_mirror {
                    write_file(&sibling(path, "json"), &self.to_json(cfg))?;
                }
                if cfg.gnuplot {
                    write_file(&sibling(path, "gp"), self.gnuplot(path).as_bytes())?;
                }
            }
        }
        Ok(())
    }

    fn gnuplot(&self, data: &Path) -> String {
        let name = data.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let col = |c: &str| self.columns.iter().position(|x| *x == c).map(|i| i + 1);
        let mut s = String::new();
        s.push_str("set datafile separator ','\nset datafile missing 'NaN'\nset key autotitle columnhead\n");
        match self.command {
            "sweep" => {
                let axis = match self.rows.first().and_then(|r| r.first()) {
                    Some(Cell::Text(a)) => a.clone(),
                    _ => "value".into(),
                };
                s.push_str(&format!("set xlabel '{axis}'\nset ylabel 'sigma_tot'\n"));
                let curves: Vec<String> = ["sigma_ea", "sigma_exact"]
                    .iter()
                    .filter_map(|c| col(c))
                    .map(|i| format!("'{name}' using 2:{i} with linespoints"))
                    .collect();
                s.push_str(&format!("plot {}\n", curves.join(", ")));
            }
            "amplitude" => {
                s.push_str("set xlabel 'theta'\nset ylabel '|f|'\n");
                let curves: Vec<String> = [("re_f", "im_f"), ("re_f_ea", "im_f_ea"), ("re_f_exact", "im_f_exact")]
                    .iter()
                    .filter_map(|(re, im)| Some((col(re)?, col(im)?, *re)))
                    .map(|(a, b, t)| format!("'{name}' using 2:(sqrt(${a}**2+${b}**2)) with lines title '{t}'"))
                    .collect();
                s.push_str(&format!("plot {}\n", curves.join(", ")));
            }
            _ => s.push_str(&format!("# no default plot for '{}'\n", self.command)),
        }
        s
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::io(e.to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
