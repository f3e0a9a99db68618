//! CSV/JSON row writers shared by the subcommands.

use anyhow::{Context, Result};
use serde::Serialize;
use std::path::PathBuf;

pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(text: &str) -> Result<Self, crate::UsageError> {
        match text.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(crate::UsageError(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

/// Rows with a fixed column set, serializable either way.
pub trait Row: Serialize {
    fn csv_header() -> &'static str;
    fn csv_line(&self) -> String;
}

pub fn emit<R: Row>(rows: &[R], format: &Format, out: Option<&PathBuf>) -> Result<()> {
    let text = match format {
        Format::Csv => {
            let mut s = String::from(R::csv_header());
            s.push('\n');
            for r in rows {
                s.push_str(&r.csv_line());
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            s
        }
    };
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                }
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
