//! Channel files in, reports and curve files out.

use std::fs;
use std::path::Path;

use arimoto_rate::Channel;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub name: String,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl ChannelFile {
    pub fn channel(&self) -> Result<Channel, Failure> {
        Channel::new(self.matrix.clone()).map_err(|e| Failure::input(&self.name, e))
    }
}

/// Reads JSON (`{"name", "matrix"}`) or headerless CSV, chosen by extension;
/// anything not ending in `.csv` is parsed as JSON.
pub fn read_channel(path: &Path) -> Result<ChannelFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(&path.display().to_string(), e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "channel".into());
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        Ok(ChannelFile {
            name: stem,
            matrix: parse_csv_matrix(&text)?,
            source: Some(path.display().to_string()),
            comment: None,
        })
    } else {
        serde_json::from_str(&text).map_err(|e| Failure::input(&path.display().to_string(), e))
    }
}

pub fn parse_csv_matrix(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(r, line)| {
            line.split(',')
                .enumerate()
                .map(|(c, cell)| {
                    cell.trim().parse::<f64>().map_err(|e| {
                        Failure::Input(format!(
                            "line {}, column {}: {e} ({:?})",
                            r + 1,
                            c + 1,
                            cell.trim()
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

/// `N,value` rows with 17 significant digits.
pub fn scalar_curve_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("N,value\n");
    for (n, v) in points {
        out.push_str(&format!("{n},{v:.16e}\n"));
    }
    out
}

/// `N,mu1,mu2,mu3` rows with 17 significant digits.
pub fn vector_curve_csv(points: &[(usize, Vec<f64>)]) -> String {
    let mut out = String::from("N,mu1,mu2,mu3\n");
    for (n, v) in points {
        let cells: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&format!("{n},{}\n", cells.join(",")));
    }
    out
}

/// Inverse of both curve writers: `(N, values)` per data row.
#[cfg(test)]
pub fn parse_curve_csv(text: &str) -> Result<Vec<(usize, Vec<f64>)>, Failure> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("N,") {
        return Err(Failure::Input(format!(
            "unexpected curve header {header:?}"
        )));
    }
    lines
        .enumerate()
        .map(|(r, line)| {
            let bad =
                |e: &dyn std::fmt::Display| Failure::Input(format!("curve line {}: {e}", r + 2));
            let mut cells = line.split(',');
            let n = cells
                .next()
                .unwrap_or_default()
                .parse::<usize>()
                .map_err(|e| bad(&e))?;
            let vals = cells
                .map(|c| c.parse::<f64>().map_err(|e| bad(&e)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((n, vals))
        })
        .collect()
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(&dir.display().to_string(), e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::input(&path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_matrix_errors_carry_positions() {
        assert_eq!(
            parse_csv_matrix("0.5,0.5\n1,0\n").unwrap(),
            vec![vec![0.5, 0.5], vec![1.0, 0.0]]
        );
        let err = parse_csv_matrix("0.5,0.5\n1,x\n").unwrap_err().to_string();
        assert!(err.contains("line 2, column 2"), "{err}");
    }

    #[test]
    fn curves_round_trip_exactly() {
        let pts = vec![(1, 0.1 + 0.2), (2, 1.0 / 3.0), (3, -2.5e-300)];
        let back = parse_curve_csv(&scalar_curve_csv(&pts)).unwrap();
        for ((n, v), (m, w)) in pts.iter().zip(&back) {
            assert_eq!(n, m);
            assert_eq!(v.to_bits(), w[0].to_bits());
        }
        let vpts = vec![(7, vec![-0.51, std::f64::consts::PI, 1e-17])];
        assert_eq!(parse_curve_csv(&vector_curve_csv(&vpts)).unwrap(), vpts);
    }
}
