//! Wall-time aggregation over a results CSV.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub ansatz: String,
    pub layers: usize,
    pub optimizer: String,
    /// CSV rows aggregated (one per seed).
    pub rows: usize,
    /// Optimizer runs behind those rows (BFGS restarts; one per TTOpt row).
    pub runs: usize,
    /// Mean wall time per optimizer run.
    pub mean_wall_time_s: f64,
}

const REQUIRED: [&str; 6] = [
    "ansatz",
    "layers",
    "optimizer",
    "wall_time_s",
    "restarts",
    "error",
];

pub fn timing_report(path: &Path) -> Result<Vec<TimingRow>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    timing_from_reader(file).with_context(|| format!("malformed results file {}", path.display()))
}

/// Groups successful rows by (ansatz, layers, optimizer). Each row's wall
/// time is already a per-run mean, so groups weight rows by their run count.
pub fn timing_from_reader<R: Read>(input: R) -> Result<Vec<TimingRow>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let headers = reader
        .headers()
        .context("line 1: unreadable header")?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("line 1: missing required column `{name}`"))
    };
    let idx: Vec<usize> = REQUIRED.iter().map(|c| col(c)).collect::<Result<_>>()?;

    let mut groups: BTreeMap<(String, usize, String), Vec<(f64, usize)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(p) => anyhow!("line {}: {e}", p.line()),
            None => anyhow!("{e}"),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        if !field(5).is_empty() {
            continue;
        }
        let parse_err =
            |name: &str, v: &str| anyhow!("line {line}: column `{name}` has invalid value {v:?}");
        let layers: usize = field(1)
            .parse()
            .map_err(|_| parse_err("layers", field(1)))?;
        let time: f64 = field(3)
            .parse()
            .map_err(|_| parse_err("wall_time_s", field(3)))?;
        let runs: usize = field(4)
            .parse()
            .map_err(|_| parse_err("restarts", field(4)))?;
        if time < 0.0 || !time.is_finite() {
            bail!("line {line}: wall_time_s must be a non-negative number, got {time}");
        }
        if runs == 0 {
            bail!("line {line}: restarts must be at least 1");
        }
        groups
            .entry((field(0).to_string(), layers, field(2).to_string()))
            .or_default()
            .push((time, runs));
    }

    Ok(groups
        .into_iter()
        .map(|((ansatz, layers, optimizer), entries)| {
            let runs: usize = entries.iter().map(|e| e.1).sum();
            let mean = entries
                .iter()
                .map(|&(t, r)| t * (r as f64 / runs as f64))
                .sum();
            TimingRow {
                ansatz,
                layers,
                optimizer,
                rows: entries.len(),
                runs,
                mean_wall_time_s: mean,
            }
        })
        .collect())
}

pub fn render(rows: &[TimingRow]) -> String {
    let mut out = String::from("ansatz,layers,optimizer,rows,runs,mean_wall_time_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.ansatz, r.layers, r.optimizer, r.rows, r.runs, r.mean_wall_time_s
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "n,ansatz,layers,optimizer,wall_time_s,restarts,error\n";

    #[test]
    fn single_row_passes_through() {
        let csv = format!("{HEADER}4,hva,4,ttopt,12.375,1,\n");
        let rows = timing_from_reader(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_wall_time_s, 12.375);
        assert_eq!(rows[0].runs, 1);
    }

    #[test]
    fn bfgs_rows_average_over_restarts() {
        // 10 restarts at 1 s mean and 30 restarts at 2 s mean.
        let csv =
            format!("{HEADER}4,hva,2,bfgs,1.0,10,\n6,hva,2,bfgs,2.0,30,\n4,hva,2,ttopt,5.0,1,\n");
        let rows = timing_from_reader(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        let bfgs = &rows[0];
        assert_eq!(
            (bfgs.optimizer.as_str(), bfgs.rows, bfgs.runs),
            ("bfgs", 2, 40)
        );
        assert!((bfgs.mean_wall_time_s - 1.75).abs() < 1e-15);
        assert_eq!(rows[1].mean_wall_time_s, 5.0);
    }

    #[test]
    fn failed_rows_are_skipped() {
        let csv = format!("{HEADER}4,hva,2,bfgs,,,no exact energy\n4,hva,2,bfgs,3.0,2,\n");
        let rows = timing_from_reader(csv.as_bytes()).unwrap();
        assert_eq!(rows[0].runs, 2);
    }

    #[test]
    fn diagnostics_name_the_line() {
        let cases = [
            (
                format!("{HEADER}4,hva,2,bfgs,1.0,10,\n4,hva,x,bfgs,1.0,10,\n"),
                "line 3",
            ),
            (
                format!("{HEADER}4,hva,2,bfgs,1.0,10,\n4,hva,2,bfgs,1.0\n"),
                "line 3",
            ),
            (format!("{HEADER}4,hva,2,bfgs,-1.0,10,\n"), "line 2"),
            ("n,ansatz,layers\n4,hva,2\n".to_string(), "line 1"),
        ];
        for (csv, want) in cases {
            let err = format!("{:#}", timing_from_reader(csv.as_bytes()).unwrap_err());
            assert!(err.contains(want), "{err}");
        }
    }
}
