//! Row records and their serializations. CSV is the primary format: a
//! fixed nine-column header, 15-significant-digit scientific notation,
//! LF line endings. Failed grid points keep their row (NaN sentinels) so
//! the output stays aligned with the grid; the failure reason rides in a
//! comment line just above the row.

use std::io::{self, Write};

use serde::Serialize;

use crate::spec::OutputFormat;

pub const CSV_HEADER: &str =
    "m_th,n_th,ea_over_omega0,ef_over_nu,e_int,c_atom,c_field,n_fock_used,residual";

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub m_th: f64,
    pub n_th: f64,
    pub ea_over_omega0: f64,
    pub ef_over_nu: f64,
    pub e_int: f64,
    pub c_atom: f64,
    pub c_field: f64,
    pub n_fock_used: usize,
    pub residual: f64,
    /// Failure reason or finite-difference warning; comment-only in CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl OutputRecord {
    /// Sentinel row for a grid point whose solve failed.
    pub fn failed(m_th: f64, n_th: f64, reason: String) -> Self {
        OutputRecord {
            m_th,
            n_th,
            ea_over_omega0: f64::NAN,
            ef_over_nu: f64::NAN,
            e_int: f64::NAN,
            c_atom: f64::NAN,
            c_field: f64::NAN,
            n_fock_used: 0,
            residual: f64::NAN,
            note: Some(reason),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.ea_over_omega0.is_nan()
    }

    fn csv_row(&self) -> String {
        format!(
            "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{},{:.14e}",
            self.m_th,
            self.n_th,
            self.ea_over_omega0,
            self.ef_over_nu,
            self.e_int,
            self.c_atom,
            self.c_field,
            self.n_fock_used,
            self.residual
        )
    }
}

/// Write records as CSV. The timestamp comment is optional so identical
/// runs can be compared byte for byte.
pub fn write_csv(
    records: &[OutputRecord],
    timestamp: bool,
    w: &mut impl Write,
) -> io::Result<()> {
    if timestamp {
        writeln!(w, "# generated {}", chrono::Utc::now().to_rfc3339())?;
    }
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        if let Some(note) = &r.note {
            writeln!(w, "# {}", note.replace('\n', " "))?;
        }
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_json(records: &[OutputRecord], w: &mut impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, records)?;
    writeln!(w)
}

pub fn write_records(
    records: &[OutputRecord],
    format: OutputFormat,
    timestamp: bool,
    w: &mut impl Write,
) -> io::Result<()> {
    match format {
        OutputFormat::Csv => write_csv(records, timestamp, w),
        OutputFormat::Json => write_json(records, w),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotCurve {
    /// Field energy solid, atomic energy dashed and scaled by 10.
    Energies,
    /// Both temperature responses plus a zero line.
    Responses,
}

/// A self-contained gnuplot script reading `csv_path`. Deterministic:
/// the same inputs yield byte-identical text.
pub fn emit_plot_script(csv_path: &str, curves: &[PlotCurve]) -> String {
    let mut out = String::new();
    out.push_str("# gnuplot script; run: gnuplot -p this_file\n");
    out.push_str("set datafile separator \",\"\n");
    out.push_str("set datafile commentschars \"#\"\n");
    out.push_str("set xlabel \"reservoir occupation\"\n");
    out.push_str("set grid\n");
    let mut parts: Vec<String> = Vec::new();
    for curve in curves {
        match curve {
            PlotCurve::Energies => {
                parts.push(format!(
                    "'{csv_path}' using 1:4 with lines lw 2 title 'E_f / nu'"
                ));
                // the atomic energy is an order of magnitude smaller;
                // scale it by 10 so both curves share one axis
                parts.push(format!(
                    "'{csv_path}' using 1:($3*10) with lines dashtype 2 lw 2 title '10 E_a / omega_0'"
                ));
            }
            PlotCurve::Responses => {
                parts.push(format!(
                    "'{csv_path}' using 1:6 with lines lw 2 title 'C_atom'"
                ));
                parts.push(format!(
                    "'{csv_path}' using 1:7 with lines lw 2 title 'C_field'"
                ));
                parts.push("0 with lines dashtype 3 lc 'gray' notitle".to_string());
            }
        }
    }
    if parts.is_empty() {
        out.push_str("set ylabel \"\"\n");
        out.push_str("plot [0:3] [-1:1] NaN notitle\n");
    } else {
        out.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
    }
    out
}
