use std::fs;
use std::path::{Path, PathBuf};

use cvngs_core::gaussian::CovMatrix;
use cvngs_core::phase_space::Grid;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::CliResult;
use crate::manifest::{Format, Manifest};

pub const CONVENTION: &str = "XM,PM,XC,PC; hbar=1; vac=1/2";

/// Output directory plus the list of files written so far.
#[derive(Debug)]
pub struct Sink {
    root: PathBuf,
    pub format: Format,
    pub artifacts: Vec<String>,
}

impl Sink {
    pub fn new(root: &Path, format: Format) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(Sink {
            root: root.to_path_buf(),
            format,
            artifacts: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn subdir(&self, name: &str) -> CliResult<Sink> {
        Sink::new(&self.root.join(name), self.format)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        fs::write(self.root.join(name), text)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// A table of numbers as `<stem>.csv` or `<stem>.json`; returns the file name.
    pub fn write_curve(
        &mut self,
        stem: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> CliResult<String> {
        match self.format {
            Format::Csv => {
                let name = format!("{stem}.csv");
                let mut w = csv::Writer::from_path(self.root.join(&name))?;
                w.write_record(header)?;
                for r in rows {
                    w.write_record(r.iter().map(|x| fmt_num(*x)))?;
                }
                w.flush()?;
                self.artifacts.push(name.clone());
                Ok(name)
            }
            Format::Json => {
                let name = format!("{stem}.json");
                let body = json!({ "columns": header, "rows": rows.iter().map(|r| r.iter().map(|x| num(*x)).collect::<Vec<_>>()).collect::<Vec<_>>() });
                self.write_json(&name, &body)?;
                Ok(name)
            }
        }
    }

    /// A sampled Wigner function. CSV mode writes `X,P,W` rows plus a JSON
    /// envelope; JSON mode puts the row-major values into the envelope.
    pub fn write_grid(
        &mut self,
        stem: &str,
        grid: &Grid,
        extra: Map<String, Value>,
    ) -> CliResult<()> {
        let s = &grid.spec;
        let mut env = Map::new();
        env.insert("convention".into(), json!(CONVENTION));
        env.insert("axes".into(), json!(["X_M", "P_M"]));
        env.insert(
            "x".into(),
            json!({ "min": s.x_min, "max": s.x_max, "n": s.nx }),
        );
        env.insert(
            "p".into(),
            json!({ "min": s.p_min, "max": s.p_max, "n": s.np }),
        );
        env.insert("riemann_sum".into(), num(grid.riemann_sum));
        env.insert("boundary_max".into(), num(grid.boundary_max));
        env.insert("grid_negativity".into(), num(grid.negativity()));
        for (k, v) in extra {
            env.insert(k, v);
        }
        match self.format {
            Format::Csv => {
                let name = format!("{stem}.csv");
                let mut w = csv::Writer::from_path(self.root.join(&name))?;
                w.write_record(["X", "P", "W"])?;
                let xs = s.x_points();
                for (ip, p) in s.p_points().iter().enumerate() {
                    for (ix, x) in xs.iter().enumerate() {
                        w.write_record([fmt_num(*x), fmt_num(*p), fmt_num(grid.at(ix, ip))])?;
                    }
                }
                w.flush()?;
                self.artifacts.push(name.clone());
                env.insert("data".into(), json!(name));
            }
            Format::Json => {
                env.insert("layout".into(), json!("rows of constant P, X fastest"));
                env.insert(
                    "values".into(),
                    Value::Array(grid.values.iter().map(|v| num(*v)).collect()),
                );
            }
        }
        self.write_json(&format!("{stem}.json"), &Value::Object(env))
    }

    /// The manifest that produced the files in this directory.
    pub fn write_manifest(&mut self, m: &Manifest) -> CliResult<()> {
        let mut text = m.to_json();
        text.push('\n');
        self.write_text("manifest.json", &text)
    }
}

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or a string for values JSON cannot hold.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(fmt_num(x)))
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn cov_json(v: &CovMatrix) -> Value {
    json!({ "convention": CONVENTION, "row_major": v.row_major().iter().map(|x| num(*x)).collect::<Vec<_>>() })
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub manifest_sha256: String,
    pub status: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: Map<String, Value>,
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(m: &Manifest) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: m.command.name().to_string(),
            manifest_sha256: m.sha256(),
            status: "ok",
            exit_code: 0,
            error: None,
            metrics: Map::new(),
            notes: Vec::new(),
            artifacts: Vec::new(),
        }
    }
}

/// Runs `f` on a pool of `jobs` workers (0 picks the default).
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
