//! Output files: CSV tables and class-id rasters, each opened by a comment
//! block naming the config hash, seed, and crate versions.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use noisylab::learners::Classifier;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const HARNESS_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named output file, fully rendered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub fn header_lines(cfg: &ExperimentConfig) -> Vec<String> {
    vec![
        format!("lab {}", cfg.experiment),
        format!("config_sha256: {}", cfg.hash()),
        format!("seed: {}", cfg.seed),
        format!("versions: noisylab-core {}, noisylab-harness {}", noisylab::VERSION, HARNESS_VERSION),
    ]
}

pub trait CsvRow {
    const HEADER: &'static str;
    fn csv(&self) -> String;
}

pub fn csv_artifact<R: CsvRow>(cfg: &ExperimentConfig, name: &str, rows: &[R]) -> Artifact {
    let mut s = String::new();
    for line in header_lines(cfg) {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str(R::HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    Artifact { name: name.to_string(), contents: s }
}

/// `Some(v)` as `v`, `None` as an empty field.
pub fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents)?;
            Ok(path)
        })
        .collect()
}

/// Class ids of a 2D classifier at the centers of a `resolution²` grid.
/// Row 0 is the top (largest y), column 0 the left edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRaster {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: usize,
    pub grid: Vec<usize>,
}

impl BoundaryRaster {
    pub fn render<H: Classifier + ?Sized>(h: &H, x_range: (f64, f64), y_range: (f64, f64), resolution: usize) -> Self {
        let mut xs = Vec::with_capacity(2 * resolution * resolution);
        for row in 0..resolution {
            for col in 0..resolution {
                let [x, y] = Self::cell_center(x_range, y_range, resolution, row, col);
                xs.push(x);
                xs.push(y);
            }
        }
        let grid = h.label_batch(&xs);
        debug_assert_eq!(grid.len(), resolution * resolution);
        Self { x_range, y_range, resolution, grid }
    }

    fn cell_center(x: (f64, f64), y: (f64, f64), res: usize, row: usize, col: usize) -> [f64; 2] {
        let dx = (x.1 - x.0) / res as f64;
        let dy = (y.1 - y.0) / res as f64;
        [x.0 + (col as f64 + 0.5) * dx, y.1 - (row as f64 + 0.5) * dy]
    }

    pub fn center(&self, row: usize, col: usize) -> [f64; 2] {
        Self::cell_center(self.x_range, self.y_range, self.resolution, row, col)
    }

    pub fn at(&self, row: usize, col: usize) -> usize {
        self.grid[row * self.resolution + col]
    }

    /// Smallest distance from a disk to a cell center labeled other than
    /// `label`; cells inside the disk count as distance 0.
    pub fn margin_to_disk(&self, center: [f64; 2], radius: f64, label: usize) -> f64 {
        let mut best = f64::INFINITY;
        for row in 0..self.resolution {
            for col in 0..self.resolution {
                if self.at(row, col) != label {
                    let c = self.center(row, col);
                    let d = ((c[0] - center[0]).hypot(c[1] - center[1]) - radius).max(0.0);
                    best = best.min(d);
                }
            }
        }
        best
    }

    /// ASCII PGM with class ids spread over grey levels.
    pub fn to_pgm(&self, header: &[String], num_classes: usize) -> String {
        let max = num_classes.max(2) - 1;
        let scale = 255 / max;
        let mut s = String::from("P2\n");
        for line in header {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(
            s,
            "# x {} {} y {} {}",
            self.x_range.0, self.x_range.1, self.y_range.0, self.y_range.1
        );
        let _ = writeln!(s, "{} {}\n{}", self.resolution, self.resolution, max * scale);
        for row in self.grid.chunks(self.resolution) {
            let line: Vec<String> = row.iter().map(|&c| (c * scale).to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for line in header {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(
            s,
            "# x {} {} y {} {}; row 0 is the top edge",
            self.x_range.0, self.x_range.1, self.y_range.0, self.y_range.1
        );
        for row in self.grid.chunks(self.resolution) {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}
