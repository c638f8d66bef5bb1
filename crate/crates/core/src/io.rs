//! Small helpers shared by every CSV writer: number formatting and file IO
//! with path context in errors.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // normalize -0
        return "0".to_string();
    }
    format!("{x}")
}

/// Missing values become empty cells.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        }
    }
    fs::write(path, content).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}
