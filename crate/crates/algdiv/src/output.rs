//! JSON summaries and CSV detail files. Both embed the resolved config and
//! seed; neither contains timestamps, so reruns are byte-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::ExperimentConfig;

/// Tabular per-trial or per-point detail.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip representation; keeps CSV output stable across runs.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn summary_json(cfg: &ExperimentConfig, result: Value) -> Value {
    json!({
        "command": cfg.command,
        "seed": cfg.seed,
        "config": cfg.to_json(),
        "result": result,
    })
}

pub fn render_json(cfg: &ExperimentConfig, result: Value) -> String {
    let mut s = serde_json::to_string_pretty(&summary_json(cfg, result)).expect("serializable");
    s.push('\n');
    s
}

/// Two `#` comment lines (seed, config JSON), then the header and rows.
/// Read back with a CSV reader that skips `#` comments.
pub fn render_csv(cfg: &ExperimentConfig, table: &Table) -> std::io::Result<String> {
    let mut out = Vec::new();
    writeln!(out, "# seed={}", cfg.seed)?;
    writeln!(out, "# config={}", cfg.to_json())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.header)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("utf8"))
}

/// Writes `<stem>.json` and, when the table has rows, `<stem>.csv` under
/// `dir`. Returns the paths written.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    cfg: &ExperimentConfig,
    result: Value,
    table: &Table,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let jp = dir.join(format!("{stem}.json"));
    fs::write(&jp, render_json(cfg, result))?;
    written.push(jp);
    if !table.header.is_empty() {
        let cp = dir.join(format!("{stem}.csv"));
        fs::write(&cp, render_csv(cfg, table)?)?;
        written.push(cp);
    }
    Ok(written)
}

/// Wall-clock timings go here, away from the deterministic outputs.
pub fn append_log(dir: &Path, line: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = fs::OpenOptions::new().create(true).append(true).open(dir.join("run.log"))?;
    writeln!(f, "{line}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::resolve;
    use std::collections::BTreeMap;

    fn cfg() -> ExperimentConfig {
        let mut p = BTreeMap::new();
        p.insert("tau".to_string(), json!(0.05));
        resolve("seqgevp", p, BTreeMap::new()).unwrap()
    }

    #[test]
    fn json_embeds_config_and_seed() {
        let v: Value = serde_json::from_str(&render_json(&cfg(), json!({"order": 24}))).unwrap();
        assert_eq!(v["seed"], 0);
        assert_eq!(v["config"]["tau"], 0.05);
        assert_eq!(v["result"]["order"], 24);
    }

    #[test]
    fn csv_round_trips_with_comments() {
        let mut t = Table::new(&["k", "value"]);
        t.push(vec!["0".into(), num(0.25)]);
        t.push(vec!["1".into(), num(1e-17)]);
        let text = render_csv(&cfg(), &t).unwrap();
        assert!(text.starts_with("# seed=0\n# config={"));
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["k", "value"]);
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1e-17);
    }
}
