//! Minimal CSV reading and writing: numeric columns, 17 significant digits,
//! `\n` line endings.

use anyhow::{bail, Context, Result};
use std::fs;
use std::path::Path;

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 32 + 64);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (k, x) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format!("{x:.16e}"));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = match lines.next() {
        Some(h) => h.split(',').map(|s| s.trim().to_string()).collect(),
        None => bail!("{}: empty file", path.display()),
    };
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => bail!("{}:{}: {e}", path.display(), ln + 2),
        }
    }
    Ok((header, rows))
}
