//! File formats, manifests and the command-line driver built on `cvngs-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod figures;
pub mod manifest;
pub mod output;

pub use cvngs_core as core;

use std::path::Path;

use commands::Ctx;
use error::CliError;
use manifest::{Format, GridSection, Manifest};
use output::{Report, Sink};

/// Command-line overrides applied on top of a manifest.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub jobs: usize,
    pub grid: Option<GridSection>,
    pub format: Option<Format>,
}

/// Runs `m` into `out` and writes `report.json` whatever the outcome.
/// Returns the report and the process exit code.
pub fn execute(m: &Manifest, out: &Path, ov: &Overrides) -> (Report, i32) {
    let mut m = m.clone();
    if let Some(g) = &ov.grid {
        m.grid = Some(g.clone());
    }
    if let Some(f) = ov.format {
        m.output.format = Some(f);
    }
    let mut report = Report::new(&m);
    let result = m.validate().and_then(|_| {
        let mut sink = Sink::new(out, m.output.format.unwrap_or_default())?;
        let r = commands::dispatch(&m, &Ctx { jobs: ov.jobs }, &mut sink, &mut report);
        report.artifacts = sink.artifacts.clone();
        r
    });
    finish(report, result, out)
}

fn finish(mut report: Report, result: Result<(), CliError>, out: &Path) -> (Report, i32) {
    let mut code = 0;
    if let Err(e) = result {
        code = e.exit_code();
        report.status = "error";
        report.exit_code = code;
        report.error = Some(e.to_string());
    }
    let written = std::fs::create_dir_all(out).and_then(|_| {
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        std::fs::write(out.join("report.json"), text)
    });
    if written.is_err() && code == 0 {
        code = 1;
    }
    (report, code)
}

/// Report for a manifest that could not be loaded.
pub fn report_load_failure(path: &Path, err: CliError, out: &Path) -> (Report, i32) {
    let mut m = Manifest::new(manifest::Command::Figures);
    m.figures = vec![format!("<unparsed {}>", path.display())];
    let mut report = Report::new(&m);
    report.command = "unknown".into();
    report.manifest_sha256 = match std::fs::read(path) {
        Ok(bytes) => {
            use sha2::{Digest, Sha256};
            Sha256::digest(&bytes)
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect()
        }
        Err(_) => String::new(),
    };
    finish(report, Err(err), out)
}
