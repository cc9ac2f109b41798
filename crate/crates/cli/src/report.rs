//! Run directory: CSV/JSON artifacts and the manifest written at the end of
//! every run, successful or not.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Debug, Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Versions {
    chancomp: &'static str,
    chancomp_core: &'static str,
    os: &'static str,
    arch: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    command: String,
    argv: Vec<String>,
    inputs: Vec<InputRecord>,
    seed: Option<u64>,
    options: serde_json::Value,
    threads: Option<usize>,
    versions: Versions,
    outputs: Vec<String>,
    status: &'static str,
    exit_code: u8,
    message: Option<String>,
}

pub struct Run {
    dir: PathBuf,
    manifest: Manifest,
}

impl Run {
    pub fn new(dir: &Path, command: &str, argv: Vec<String>, seed: Option<u64>, threads: Option<usize>) -> Self {
        Self {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                command: command.to_string(),
                argv,
                inputs: Vec::new(),
                seed,
                options: serde_json::Value::Null,
                threads,
                versions: Versions {
                    chancomp: env!("CARGO_PKG_VERSION"),
                    chancomp_core: chancomp_core::VERSION,
                    os: std::env::consts::OS,
                    arch: std::env::consts::ARCH,
                },
                outputs: Vec::new(),
                status: "running",
                exit_code: 0,
                message: None,
            },
        }
    }

    /// Reads an input file and records its hash.
    pub fn input(&mut self, path: &Path) -> Result<String, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
        self.manifest.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
            bytes: text.len(),
        });
        Ok(text)
    }

    pub fn set_options(&mut self, options: &impl Serialize) {
        self.manifest.options = serde_json::to_value(options).unwrap_or(serde_json::Value::Null);
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| Failure::Validation(format!("cannot create {}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::Validation(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::Validation(e.to_string());
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Validation(e.to_string()))?;
        self.write(name, &bytes)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        self.write(name, body.as_bytes())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let body = serde_json::to_string_pretty(value).map_err(|e| Failure::Validation(e.to_string()))?;
        self.write(name, body.as_bytes())
    }

    /// Writes `manifest.json`; errors here are reported but do not change the
    /// exit code of the run.
    pub fn finish(mut self, outcome: &Result<(), Failure>) -> u8 {
        let code = match outcome {
            Ok(()) => 0,
            Err(f) => f.exit_code(),
        };
        self.manifest.status = if code == 0 { "ok" } else { "error" };
        self.manifest.exit_code = code;
        self.manifest.message = outcome.as_ref().err().map(|f| f.to_string());
        let body = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        let written = fs::create_dir_all(&self.dir).and_then(|_| fs::write(self.dir.join("manifest.json"), body));
        if let Err(e) = written {
            eprintln!("warning: manifest not written: {e}");
        }
        code
    }
}

/// Floats at 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub color: &'a str,
}

/// Minimal line chart.
pub fn line_plot(title: &str, x_label: &str, series: &[Series]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let all_x = series.iter().flat_map(|s| s.x.iter().copied());
    let all_y = series.iter().flat_map(|s| s.y.iter().copied());
    let (x0, x1) = all_x.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (y0, y1) = all_y.fold((0.0f64, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let sx = |v: f64| pad + (v - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - (v - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n\
         <line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\n",
        w / 2.0,
        h - pad,
        w - pad,
        h - pad,
        h - pad,
        w / 2.0,
        h - 12.0,
        pad - 4.0,
        sy(y1) + 4.0,
        y1,
        pad - 4.0,
        sy(y0) + 4.0,
        y0,
    );
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .x
            .iter()
            .zip(s.y)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out += &format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n",
            s.color,
            pts.join(" "),
            w - pad - 150.0,
            pad + 16.0 * k as f64,
            s.color,
            s.label
        );
    }
    out += "</svg>\n";
    out
}
