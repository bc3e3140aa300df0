//! CSV and text rendering of sweep rows.
//!
//! Numbers use Rust's shortest round-trip decimal form, `,` as the field
//! separator and `\n` line endings; a header line is always written.

use std::fmt::Write as _;
use std::io::Write;

use crate::sweep::{SweepResult, SweepRow};

/// Output columns, in order.
pub const COLUMNS: [&str; 19] = [
    "L_km",
    "n_th",
    "sigma_theta",
    "eta_a",
    "eta_b",
    "lambda_a",
    "lambda_b",
    "p_s_a",
    "p_s_b",
    "r2",
    "q_z",
    "q_z_11",
    "e_z",
    "e_x_11",
    "skr",
    "skr_clamped",
    "q_z_xcheck",
    "q_z_11_xcheck",
    "e_z_xcheck",
];

/// A sweep row flattened into the fixed column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputRow(pub [f64; 19]);

impl From<&SweepRow> for OutputRow {
    fn from(r: &SweepRow) -> Self {
        let m = &r.metrics;
        OutputRow([
            r.l_km,
            r.n_th,
            r.sigma_theta,
            r.arm_a.eta,
            r.arm_b.eta,
            r.arm_a.lambda,
            r.arm_b.lambda,
            r.arm_a.p_s,
            r.arm_b.p_s,
            r.arm_a.r2,
            m.q_z,
            m.q_z_11,
            m.e_z,
            m.e_x_11,
            m.skr,
            m.skr_clamped,
            m.q_z_xcheck,
            m.q_z_11_xcheck,
            m.e_z_xcheck,
        ])
    }
}

impl OutputRow {
    pub fn get(&self, column: &str) -> Option<f64> {
        COLUMNS.iter().position(|c| *c == column).map(|i| self.0[i])
    }

    pub fn to_csv_line(&self) -> String {
        join(self.0.iter())
    }

    /// Parses one data line back into a row.
    pub fn parse_csv_line(line: &str) -> Option<Self> {
        let mut values = [0.0; 19];
        let mut fields = line.trim_end_matches('\n').split(',');
        for slot in values.iter_mut() {
            *slot = fields.next()?.parse().ok()?;
        }
        fields.next().is_none().then_some(OutputRow(values))
    }

    /// Aligned `key  value` lines.
    pub fn to_human(&self) -> String {
        let width = COLUMNS.iter().map(|c| c.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (name, v) in COLUMNS.iter().zip(self.0) {
            let _ = writeln!(s, "{name:<width$}  {v}");
        }
        s
    }
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn csv_header() -> String {
    COLUMNS.join(",")
}

/// Header plus one line per row.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", csv_header())?;
    for row in &result.rows {
        writeln!(out, "{}", OutputRow::from(row).to_csv_line())?;
    }
    out.flush()
}

/// Plot-ready layout: one line per distance, one `skr_clamped` column per
/// `(n_th, sigma_theta)` curve.
pub fn write_pivot<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    let cfg = &result.metadata.config;
    let curves: Vec<(f64, f64)> = cfg
        .n_th_values
        .iter()
        .flat_map(|&n| cfg.sigma_theta_values.iter().map(move |&s| (n, s)))
        .collect();
    let header = std::iter::once("L_km".to_string()).chain(
        curves
            .iter()
            .map(|(n, s)| format!("skr_clamped[n_th={n};sigma_theta={s}]")),
    );
    writeln!(out, "{}", join(header))?;
    // Rows are distance-major, so each distance occupies one contiguous chunk.
    for chunk in result.rows.chunks(curves.len().max(1)) {
        let line =
            std::iter::once(chunk[0].l_km).chain(chunk.iter().map(|r| r.metrics.skr_clamped));
        writeln!(out, "{}", join(line))?;
    }
    out.flush()
}

/// `key=value` description of how a result was produced.
pub fn write_metadata<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    let md = &result.metadata;
    let cfg = &md.config;
    writeln!(out, "version={}", md.version)?;
    writeln!(out, "arm_split={}", cfg.arm_split)?;
    writeln!(out, "arm_split_convention={}", md.arm_split_convention)?;
    writeln!(out, "alpha_db_per_km={}", cfg.alpha_db_per_km)?;
    writeln!(out, "f={}", cfg.f)?;
    writeln!(out, "distances_km={}", join(cfg.distances_km.iter()))?;
    writeln!(out, "n_th_values={}", join(cfg.n_th_values.iter()))?;
    writeln!(
        out,
        "sigma_theta_values={}",
        join(cfg.sigma_theta_values.iter())
    )?;
    writeln!(out, "rows={}", result.rows.len())?;
    writeln!(out, "note={}", md.grid_note)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{run_sweep, SweepConfig};

    fn small() -> SweepResult {
        run_sweep(&SweepConfig {
            distances_km: vec![0.0, 10.0],
            n_th_values: vec![0.0, 0.1],
            sigma_theta_values: vec![0.0, 0.3],
            ..SweepConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&small(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], csv_header());
        assert_eq!(lines.len(), 1 + 8 + 1);
        assert_eq!(*lines.last().unwrap(), "");
        assert!(!text.contains('\r'));
        assert!(lines[1].starts_with("0,0,0,1,1,0,0,1,1,1,1,2,0,0,2,2,1,1,0"));
    }

    #[test]
    fn csv_line_parses_back() {
        let res = small();
        for row in &res.rows {
            let out = OutputRow::from(row);
            assert_eq!(OutputRow::parse_csv_line(&out.to_csv_line()), Some(out));
        }
        assert_eq!(OutputRow::parse_csv_line("1,2,3"), None);
    }

    #[test]
    fn pivot_layout() {
        let mut buf = Vec::new();
        write_pivot(&small(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "L_km,skr_clamped[n_th=0;sigma_theta=0],skr_clamped[n_th=0;sigma_theta=0.3],\
             skr_clamped[n_th=0.1;sigma_theta=0],skr_clamped[n_th=0.1;sigma_theta=0.3]"
        );
        assert!(lines[1].starts_with("0,2,"));
        assert!(lines[2].starts_with("10,"));
    }

    #[test]
    fn human_lists_every_column() {
        let res = small();
        let text = OutputRow::from(&res.rows[0]).to_human();
        assert_eq!(text.lines().count(), COLUMNS.len());
        assert!(text
            .lines()
            .any(|l| l.starts_with("skr ") && l.ends_with(" 2")));
    }
}
