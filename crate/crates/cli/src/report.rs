//! Tables and artifact files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use pointint::scaling::{strictly_decreasing, ConvergenceRecord, Trend};

/// 17 significant digits, enough to round-trip a double.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Plot-ready long format: one `(series, x, y)` triple per line.
#[derive(Debug, Clone, Default)]
pub struct LongTable(Table);

impl LongTable {
    pub fn new() -> Self {
        LongTable(Table::new(&["series", "x", "y"]))
    }

    pub fn point(&mut self, series: &str, x: f64, y: f64) {
        self.0.push(vec![series.to_string(), num(x), num(y)]);
    }

    pub fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

/// Output directory plus the human-readable log.
pub struct Artifacts {
    dir: PathBuf,
    log: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), log: Vec::new() })
    }

    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    pub fn write(&self, name: &str, contents: &str) -> io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }

    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(&self) -> io::Result<()> {
        let mut text = self.log.join("\n");
        text.push('\n');
        self.write("run.log", &text)
    }
}

pub const SWEEP_HEADER: [&str; 5] = ["epsilon", "wave_err", "resolvent_err", "min_sv", "seconds"];

/// Records sorted by `epsilon`, largest first.
pub fn sorted_records(records: &[ConvergenceRecord]) -> io::Result<Vec<ConvergenceRecord>> {
    if records.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no convergence records to report"));
    }
    let mut out = records.to_vec();
    out.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    Ok(out)
}

/// `decreasing` iff both error columns strictly decrease with `epsilon`.
pub fn trend(sorted: &[ConvergenceRecord]) -> Trend {
    let wave: Vec<f64> = sorted.iter().map(|r| r.wave_err).collect();
    let res: Vec<f64> = sorted.iter().map(|r| r.resolvent_err).collect();
    if strictly_decreasing(&wave) && strictly_decreasing(&res) {
        Trend::Decreasing
    } else {
        Trend::NotDecreasing
    }
}

pub fn sweep_table(sorted: &[ConvergenceRecord]) -> Table {
    let mut t = Table::new(&SWEEP_HEADER);
    for r in sorted {
        t.push(vec![num(r.epsilon), num(r.wave_err), num(r.resolvent_err), num(r.min_sv), num(r.seconds)]);
    }
    t
}

pub fn sweep_plot(sorted: &[ConvergenceRecord]) -> LongTable {
    let mut t = LongTable::new();
    for r in sorted {
        t.point("wave_err", r.epsilon, r.wave_err);
        t.point("resolvent_err", r.epsilon, r.resolvent_err);
        t.point("min_sv", r.epsilon, r.min_sv);
        for (p, e) in r.wave_errors.iter().enumerate() {
            t.point(&format!("wave_err[{p}]"), r.epsilon, *e);
        }
    }
    t
}

/// Writes `results.csv` and `plot.csv` for a sweep and returns the trend.
pub fn emit_report(out: &Artifacts, records: &[ConvergenceRecord]) -> io::Result<Trend> {
    let sorted = sorted_records(records)?;
    out.write("results.csv", &sweep_table(&sorted).to_csv())?;
    out.write("plot.csv", &sweep_plot(&sorted).to_csv())?;
    Ok(trend(&sorted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(epsilon: f64, wave_err: f64, resolvent_err: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            epsilon,
            wave_err,
            wave_errors: vec![wave_err],
            resolvent_err,
            min_sv: 0.5,
            seconds: 0.0,
            failure: None,
        }
    }

    #[test]
    fn one_record_gives_one_row() {
        let s = sorted_records(&[rec(0.1, 1e-2, 2e-2)]).unwrap();
        let csv = sweep_table(&s).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "epsilon,wave_err,resolvent_err,min_sv,seconds");
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 5);
    }

    #[test]
    fn rows_are_sorted_by_decreasing_epsilon() {
        let s = sorted_records(&[rec(0.05, 1.0, 1.0), rec(0.4, 3.0, 3.0), rec(0.1, 2.0, 2.0)]).unwrap();
        let eps: Vec<f64> = s.iter().map(|r| r.epsilon).collect();
        assert_eq!(eps, vec![0.4, 0.1, 0.05]);
    }

    #[test]
    fn empty_records_are_refused() {
        assert!(sorted_records(&[]).is_err());
    }

    #[test]
    fn trend_needs_both_columns() {
        let good = [rec(0.4, 3.0, 3.0), rec(0.2, 2.0, 2.0), rec(0.1, 1.0, 1.0)];
        assert_eq!(trend(&good), Trend::Decreasing);
        let bad = [rec(0.4, 3.0, 3.0), rec(0.2, 2.0, 3.5), rec(0.1, 1.0, 1.0)];
        assert_eq!(trend(&bad), Trend::NotDecreasing);
        let flat = [rec(0.4, 3.0, 3.0), rec(0.2, 3.0, 2.0), rec(0.1, 1.0, 1.0)];
        assert_eq!(trend(&flat), Trend::NotDecreasing);
    }

    #[test]
    fn numbers_round_trip() {
        let x = 0.1f64 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }
}
