//! Output formatting: CSV files with a fixed numeric format, aligned text
//! tables for the terminal, and JSON reports embedding the resolved
//! configuration.
//!
//! All tabular numbers are written with eight significant digits — enough
//! to compare runs across platforms without drowning diffs in round-off
//! noise. Records that lost layers (after a collision) pad the missing
//! columns with `nan`; gnuplot reads these with
//! `set datafile missing "nan"`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::layer_ode::Trajectory;
use crate::pde::{Diagnostics, Grid, PdeState};

/// Eight significant digits, scientific: the one number format of every
/// CSV cell and table entry.
pub fn format_number(x: f64) -> String {
    format!("{x:.7e}")
}

/// Assemble a CSV document. Rows shorter than the header are padded with
/// `nan`; longer rows are a caller bug and panic.
pub fn csv_string(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        assert!(
            row.len() <= header.len(),
            "row of {} cells under a {}-column header",
            row.len(),
            header.len()
        );
        for (i, _) in header.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match row.get(i) {
                Some(x) => {
                    let _ = write!(out, "{}", format_number(*x));
                }
                None => out.push_str("nan"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, csv_string(header, rows))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut document = serde_json::to_string_pretty(value).expect("report serializes");
    document.push('\n');
    fs::write(path, document)
}

/// Render an aligned right-justified text table for the terminal.
pub fn render_table(header: &[String], rows: &[Vec<f64>]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|row| row.iter().map(|x| format_number(*x)).collect())
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (i, cell) in row.iter().enumerate() {
            if i < widths.len() {
                widths[i] = widths[i].max(cell.len());
            }
        }
    }
    let mut out = String::new();
    for (i, h) in header.iter().enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        let _ = write!(out, "{h:>width$}", width = widths[i]);
    }
    out.push('\n');
    for row in &cells {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{cell:>width$}", width = widths[i]);
        }
        out.push('\n');
    }
    out
}

/// Diagnostics CSV: `t, mass, energy, cum_dissipation, layer_1..layer_k,
/// max_speed` with `k` the initial layer count.
pub fn diagnostics_csv(diagnostics: &Diagnostics) -> String {
    let layer_count = diagnostics.layers.first().map_or(0, Vec::len);
    let mut header = vec![
        "t".to_string(),
        "mass".to_string(),
        "energy".to_string(),
        "cum_dissipation".to_string(),
    ];
    for j in 1..=layer_count {
        header.push(format!("layer_{j}"));
    }
    header.push("max_speed".to_string());
    let rows: Vec<Vec<f64>> = (0..diagnostics.t.len())
        .map(|k| {
            let mut row = vec![
                diagnostics.t[k],
                diagnostics.mass[k],
                diagnostics.energy[k],
                diagnostics.cum_dissipation[k],
            ];
            for j in 0..layer_count {
                row.push(
                    diagnostics.layers[k].get(j).copied().unwrap_or(f64::NAN),
                );
            }
            row.push(diagnostics.max_speed[k]);
            row
        })
        .collect();
    csv_string(&header, &rows)
}

/// Final-state CSV: `x, u, v`.
pub fn state_csv(state: &PdeState, grid: Grid) -> String {
    let header = ["x", "u", "v"].map(String::from);
    let rows: Vec<Vec<f64>> = (0..grid.nodes())
        .map(|i| vec![grid.node(i), state.u[i], state.v[i]])
        .collect();
    csv_string(&header, &rows)
}

/// Trajectory CSV: `t, h_1..h_k[, hdot_1..hdot_k], l_plus, l_minus, psi`.
/// The `(l_plus, l_minus, psi)` triples are supplied per record (callers
/// decide how the barrier value is evaluated); `NaN` marks records where it
/// could not be.
pub fn trajectory_csv(trajectory: &Trajectory, lengths_psi: &[(f64, f64, f64)]) -> String {
    assert_eq!(trajectory.t.len(), lengths_psi.len());
    let layer_count = trajectory.h.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    for j in 1..=layer_count {
        header.push(format!("h_{j}"));
    }
    if trajectory.hdot.is_some() {
        for j in 1..=layer_count {
            header.push(format!("hdot_{j}"));
        }
    }
    header.push("l_plus".to_string());
    header.push("l_minus".to_string());
    header.push("psi".to_string());
    let rows: Vec<Vec<f64>> = (0..trajectory.t.len())
        .map(|k| {
            let mut row = vec![trajectory.t[k]];
            row.extend_from_slice(&trajectory.h[k]);
            if let Some(hdot) = &trajectory.hdot {
                row.extend_from_slice(&hdot[k]);
            }
            let (plus, minus, psi) = lengths_psi[k];
            row.push(plus);
            row.push(minus);
            row.push(psi);
            row
        })
        .collect();
    csv_string(&header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_eight_significant_digits_and_pads_short_rows() {
        let header = ["a", "b", "c"].map(String::from);
        let csv = csv_string(
            &header,
            &[vec![1.0 / 3.0, -2.5e-11, 4000.0], vec![1.0, 2.0]],
        );
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("a,b,c"));
        assert_eq!(lines.next(), Some("3.3333333e-1,-2.5000000e-11,4.0000000e3"));
        assert_eq!(lines.next(), Some("1.0000000e0,2.0000000e0,nan"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn tables_align_columns() {
        let header = ["t", "value"].map(String::from);
        let table = render_table(&header, &[vec![0.0, 12.5], vec![10.0, -0.125]]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        let width = lines[0].len();
        assert!(lines.iter().all(|l| l.len() == width));
        assert!(lines[1].ends_with("1.2500000e1"));
        assert!(lines[2].ends_with("-1.2500000e-1"));
    }
}
