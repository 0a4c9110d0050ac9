//! CSV and sidecar writers.
//!
//! Every float is written as `{:.16e}` (17 significant digits), so a value
//! read back parses to the same `f64`. Missing values are empty fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use csv::Writer;

use crate::error::Result;
use crate::fock::OverlapMatrix;
use crate::marcus::MarcusResult;
use crate::rate::{ChannelRow, ChannelTable, Cutoffs, RateResult};

use super::sweep::{RunMetadata, SweepResult};

pub const SWEEP_HEADER: [&str; 9] =
    ["value", "rate", "direct_rate", "bridge_rate", "n_max", "l_max", "m_max", "skipped_poles", "status"];

pub const CHANNEL_HEADER: [&str; 8] = ["n", "m", "f_direct", "f_bridge", "f_total", "delta_g", "p_n", "partial_rate"];

pub const RATE_HEADER: [&str; 18] = [
    "kind",
    "mode",
    "pathway",
    "total_rate",
    "n_max",
    "l_max",
    "m_max",
    "converged",
    "rel_change",
    "skipped_poles",
    "n",
    "m",
    "f_direct",
    "f_bridge",
    "f_total",
    "delta_g",
    "p_n",
    "partial_rate",
];

pub const MARCUS_HEADER: [&str; 4] = ["v_eff", "delta_g", "activation", "rate"];

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn opt_usize(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cutoff_fields(c: &Cutoffs) -> [String; 3] {
    [c.n_max.to_string(), opt_usize(c.l_max), c.m_max.to_string()]
}

fn channel_fields(r: &ChannelRow<f64>) -> [String; 8] {
    [
        r.n.to_string(),
        r.m.to_string(),
        float(r.f_direct),
        float(r.f_bridge),
        float(r.f_total),
        float(r.delta_g),
        float(r.p_n),
        float(r.partial_rate),
    ]
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in &result.rows {
        let [n, l, m] = cutoff_fields(&row.truncation);
        w.write_record([
            float(row.value),
            float(row.rate),
            opt_float(row.direct_rate),
            opt_float(row.bridge_rate),
            n,
            l,
            m,
            row.skipped_poles.to_string(),
            row.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Channel rows only; an empty table gives a header-only file.
pub fn write_channel_csv<W: Write>(table: &ChannelTable<f64>, out: W) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(CHANNEL_HEADER)?;
    for row in table.iter() {
        w.write_record(channel_fields(row))?;
    }
    w.flush()?;
    Ok(())
}

/// One `summary` row, then one `channel` row per table entry, all under [`RATE_HEADER`].
pub fn write_rate_csv<W: Write>(result: &RateResult<f64>, out: W) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(RATE_HEADER)?;
    let [n, l, m] = cutoff_fields(&result.truncation_used);
    let mut summary = vec![
        "summary".to_string(),
        result.mode.as_str().to_string(),
        result.pathway.as_str().to_string(),
        float(result.total_rate),
        n,
        l,
        m,
        result.convergence.converged.to_string(),
        opt_float(result.convergence.rel_change),
        result.skipped_poles.to_string(),
    ];
    summary.extend(std::iter::repeat_n(String::new(), CHANNEL_HEADER.len()));
    w.write_record(&summary)?;
    for row in result.table.iter() {
        let mut fields = vec!["channel".to_string()];
        fields.extend(std::iter::repeat_n(String::new(), 9));
        fields.extend(channel_fields(row));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_marcus_csv<W: Write>(result: &MarcusResult<f64>, out: W) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(MARCUS_HEADER)?;
    w.write_record([float(result.v_eff), float(result.delta_g), float(result.activation), float(result.rate)])?;
    w.flush()?;
    Ok(())
}

/// Matrix with a header row of column indices and the row index in the first column.
pub fn write_overlap_csv<W: Write>(matrix: &OverlapMatrix<f64>, out: W) -> Result<()> {
    let mut w = Writer::from_writer(out);
    let size = matrix.size();
    let mut header = vec!["n\\m".to_string()];
    header.extend((0..size).map(|m| m.to_string()));
    w.write_record(&header)?;
    for n in 0..size {
        let mut fields = vec![n.to_string()];
        fields.extend(matrix.row(n).iter().map(|&x| float(x)));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// `<out>.meta.json` next to a CSV file.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_sidecar(csv_path: &Path, metadata: &RunMetadata) -> Result<PathBuf> {
    let path = sidecar_path(csv_path);
    let mut file = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut file, metadata)?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(path)
}

/// Writes a CSV via `emit` to `path`, or to stdout when `path` is `None`.
pub fn emit_to<F>(path: Option<&Path>, emit: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            emit(&mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{overlap_matrix, DisplacementParam};
    use crate::harness::sweep::{RowStatus, SweepAxis, SweepRow};
    use crate::model::CavityMode;
    use crate::rate::PathwayMode;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn float_format_round_trips() {
        for x in [2.75e6, -2.666_666_666_666_667e-4, 1.0 / 3.0, 0.0] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn empty_channel_table_is_header_only() {
        let s = text(|b| write_channel_csv(&ChannelTable::default(), b));
        assert_eq!(s, "n,m,f_direct,f_bridge,f_total,delta_g,p_n,partial_rate\n");
    }

    #[test]
    fn one_row_sweep_is_two_lines() {
        let result = SweepResult {
            axis: SweepAxis::GOverOmega,
            mode: CavityMode::Resonant,
            pathway: PathwayMode::Total,
            rows: vec![SweepRow {
                value: 0.0,
                rate: 2.75e6,
                direct_rate: None,
                bridge_rate: None,
                truncation: Cutoffs { n_max: 8, l_max: None, m_max: 8 },
                skipped_poles: 0,
                status: RowStatus::Ok,
            }],
            metadata: RunMetadata::new("sweep", "00".into()),
        };
        let s = text(|b| write_sweep_csv(&result, b));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], SWEEP_HEADER.join(","));
        assert_eq!(lines[1], "0.0000000000000000e0,2.7500000000000000e6,,,8,,8,0,ok");
    }

    #[test]
    fn overlap_csv_has_index_headers() {
        let m = overlap_matrix(DisplacementParam::new(0.5).unwrap(), 3).unwrap();
        let s = text(|b| write_overlap_csv(&m, b));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "n\\m,0,1,2");
        assert!(lines[2].starts_with("1,"));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/run.csv")), PathBuf::from("out/run.csv.meta.json"));
    }
}
