use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::run::ConvergenceRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "method",
    "p",
    "ndof",
    "h1_error",
    "l2_error",
    "cond2",
    "op_count",
    "iterations",
    "wall_ms",
    "status",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Writes `records` as CSV. Floats use Rust's shortest round-trip
/// scientific notation.
pub fn write_csv<W: Write>(records: &[ConvergenceRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.experiment.to_string(),
            r.method.clone(),
            r.p.to_string(),
            r.ndof.to_string(),
            format!("{:e}", r.h1_error),
            format!("{:e}", r.l2_error),
            format!("{:e}", r.cond2),
            r.op_count.to_string(),
            r.iterations.to_string(),
            format!("{:e}", r.wall_ms),
            r.status.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ConvergenceRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::Parse(e.to_string()))).collect()
}

pub fn emit_csv(records: &[ConvergenceRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
    write_csv(records, std::io::BufWriter::new(file))
}

const PLOT_TEMPLATE: &str = r#"import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = sys.argv[1] if len(sys.argv) > 1 else "@CSV@"
OUT = sys.argv[2] if len(sys.argv) > 2 else "@PNG@"

series = defaultdict(list)
with open(CSV_PATH, newline="") as f:
    for row in csv.DictReader(f):
        if not row["status"].startswith("ok"):
            continue
        series[row["method"]].append(
            (int(row["p"]), int(row["ndof"]), float(row["h1_error"]), float(row["cond2"]))
        )

fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
for method, rows in sorted(series.items()):
    rows.sort()
    p = [r[0] for r in rows]
    ndof = [r[1] for r in rows]
    err = [r[2] for r in rows]
    cond = [r[3] for r in rows]
    axes[0].semilogy(p, err, marker="o", label=method)
    axes[1].semilogy(p, cond, marker="o", label=method)
    axes[2].loglog(ndof, err, marker="o", label=method)
axes[0].set_xlabel("p")
axes[0].set_ylabel("H1 error")
axes[1].set_xlabel("p")
axes[1].set_ylabel("cond2")
axes[2].set_xlabel("ndof")
axes[2].set_ylabel("H1 error")
for ax in axes:
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
fig.suptitle("experiment @ID@")
fig.tight_layout()
fig.savefig(OUT, dpi=150)
"#;

/// Python/matplotlib script drawing error and condition number against
/// the degree, and error against the number of unknowns.
pub fn plot_script(experiment: u8, csv_path: &str) -> String {
    PLOT_TEMPLATE
        .replace("@CSV@", csv_path)
        .replace("@PNG@", &format!("experiment_{experiment}.png"))
        .replace("@ID@", &experiment.to_string())
}

/// Writes `plot_experiment_<id>.py` into `dir` and returns its path.
pub fn emit_plot_script(experiment: u8, csv_path: &Path, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", dir.display()))))?;
    let path = dir.join(format!("plot_experiment_{experiment}.py"));
    let csv_abs = std::fs::canonicalize(csv_path).unwrap_or_else(|_| csv_path.to_path_buf());
    std::fs::write(&path, plot_script(experiment, &csv_abs.to_string_lossy()))
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn record(h1: f64, cond: f64, status: &str) -> ConvergenceRecord {
        ConvergenceRecord {
            experiment: 1,
            method: "LG".into(),
            p: 4,
            ndof: 81,
            h1_error: h1,
            l2_error: h1 / 3.0,
            cond2: cond,
            op_count: 20 * 5u64.pow(6),
            iterations: 1,
            wall_ms: 0.0,
            status: status.into(),
        }
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "experiment,method,p,ndof,h1_error,l2_error,cond2,op_count,iterations,wall_ms,status\n"
        );
    }

    #[test]
    fn failed_rows_survive() {
        let rows = vec![record(f64::NAN, f64::INFINITY, "singular")];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert!(back[0].h1_error.is_nan());
        assert_eq!(back[0].cond2, f64::INFINITY);
        assert_eq!(back[0].status, "singular");
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn plot_script_uses_existing_columns() {
        let s = plot_script(3, "out.csv");
        let used: Vec<&str> = s.match_indices("row[\"").map(|(i, _)| {
            let rest = &s[i + 5..];
            &rest[..rest.find('"').unwrap()]
        }).collect();
        assert!(!used.is_empty());
        for c in used {
            assert!(CSV_HEADER.contains(&c), "{c}");
        }
        assert!(s.contains("out.csv") && s.contains("experiment_3.png"));
    }

    proptest! {
        #[test]
        fn csv_round_trip(h1 in 1e-300f64..1e300, cond in 1.0f64..1e300, p in 1usize..40) {
            let mut r = record(h1, cond, "ok");
            r.p = p;
            let rows = vec![r.clone(), record(h1 * 0.5, cond, "ok-budget")];
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, rows);
        }
    }
}
