//! Per-run result rows and the accuracy/saving summary table built from them.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::ExperimentError;

const RUNS_HEADER: &str = "run,variant,num_parts,alpha,epochs,best_epoch,val_hits,test_hits,k,feature_bytes,structure_bytes,setup_bytes";

/// Outcome of one point of a sweep. Byte counts are per-epoch traffic summed
/// over all epochs; setup traffic is kept apart.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub variant: String,
    pub num_parts: usize,
    /// `None` for variants that never sparsify.
    pub alpha: Option<f64>,
    pub epochs: usize,
    pub best_epoch: usize,
    pub val_hits: f64,
    pub test_hits: f64,
    pub k: usize,
    pub feature_bytes: u64,
    pub structure_bytes: u64,
    pub setup_bytes: u64,
}

impl RunRecord {
    pub fn total_bytes(&self) -> u64 {
        self.feature_bytes + self.structure_bytes
    }
}

/// Writes the runs table under a `# config_hash=… seed=…` line.
pub fn write_runs_csv(records: &[RunRecord], hash: &str, seed: u64, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# config_hash={hash} seed={seed}")?;
    writeln!(out, "{RUNS_HEADER}")?;
    for r in records {
        let alpha = r.alpha.map_or(String::new(), |a| a.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.variant,
            r.num_parts,
            alpha,
            r.epochs,
            r.best_epoch,
            r.val_hits,
            r.test_hits,
            r.k,
            r.feature_bytes,
            r.structure_bytes,
            r.setup_bytes
        )?;
    }
    Ok(())
}

/// Reads what [`write_runs_csv`] wrote; returns `(hash, seed, records)`.
pub fn parse_runs_csv(input: impl BufRead) -> Result<(String, u64, Vec<RunRecord>), ExperimentError> {
    let bad = |line: usize, msg: &str| ExperimentError::Report(format!("runs.csv line {line}: {msg}"));
    let mut lines = input.lines().enumerate();
    let mut next = || -> Result<Option<(usize, String)>, ExperimentError> {
        match lines.next() {
            Some((i, l)) => l.map(|l| Some((i + 1, l))).map_err(|e| ExperimentError::Report(e.to_string())),
            None => Ok(None),
        }
    };
    let (_, first) = next()?.ok_or_else(|| bad(1, "empty file"))?;
    let meta = first.strip_prefix("# ").ok_or_else(|| bad(1, "missing config_hash line"))?;
    let mut hash = None;
    let mut seed = None;
    for kv in meta.split_whitespace() {
        match kv.split_once('=') {
            Some(("config_hash", h)) => hash = Some(h.to_string()),
            Some(("seed", s)) => seed = s.parse().ok(),
            _ => {}
        }
    }
    let (hash, seed) = hash.zip(seed).ok_or_else(|| bad(1, "missing config_hash or seed"))?;
    match next()? {
        Some((_, h)) if h == RUNS_HEADER => {}
        _ => return Err(bad(2, "unexpected header")),
    }
    let mut records = Vec::new();
    while let Some((i, line)) = next()? {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(bad(i, "expected 12 fields"));
        }
        let num = |j: usize| -> Result<u64, ExperimentError> { f[j].parse().map_err(|_| bad(i, f[j])) };
        let real = |j: usize| -> Result<f64, ExperimentError> { f[j].parse().map_err(|_| bad(i, f[j])) };
        records.push(RunRecord {
            run: num(0)? as usize,
            variant: f[1].to_string(),
            num_parts: num(2)? as usize,
            alpha: if f[3].is_empty() { None } else { Some(real(3)?) },
            epochs: num(4)? as usize,
            best_epoch: num(5)? as usize,
            val_hits: real(6)?,
            test_hits: real(7)?,
            k: num(8)? as usize,
            feature_bytes: num(9)?,
            structure_bytes: num(10)?,
            setup_bytes: num(11)?,
        });
    }
    Ok((hash, seed, records))
}

/// One row per `(variant, alpha)`, one column per part count. Each cell is
/// test Hits@K, followed by the per-epoch byte saving against the
/// complete-sharing run with the same part count when one exists.
pub fn summary_table(records: &[RunRecord], hash: &str, seed: u64) -> String {
    let mut parts: Vec<usize> = records.iter().map(|r| r.num_parts).collect();
    parts.sort_unstable();
    parts.dedup();
    let mut rows: Vec<(&str, Option<f64>)> = Vec::new();
    for r in records {
        let key = (r.variant.as_str(), r.alpha);
        if !rows.contains(&key) {
            rows.push(key);
        }
    }
    let reference = |p: usize| {
        records
            .iter()
            .find(|r| r.variant == "splpg_plus" && r.num_parts == p)
            .map(RunRecord::total_bytes)
    };

    let mut out = String::new();
    let _ = writeln!(out, "# config_hash={hash} seed={seed}");
    let _ = writeln!(out, "# cell: test Hits@K [saving vs complete sharing, same p]");
    let _ = write!(out, "{:<18} {:>6}", "variant", "alpha");
    for p in &parts {
        let _ = write!(out, " {:>18}", format!("p={p}"));
    }
    out.push('\n');
    for (variant, alpha) in rows {
        let a = alpha.map_or("-".to_string(), |a| format!("{a:.2}"));
        let _ = write!(out, "{variant:<18} {a:>6}");
        for &p in &parts {
            let cell = records
                .iter()
                .find(|r| r.variant == variant && r.alpha == alpha && r.num_parts == p)
                .map_or("-".to_string(), |r| match reference(p) {
                    Some(full) if full > 0 => {
                        let saving = 100.0 * (1.0 - r.total_bytes() as f64 / full as f64);
                        format!("{:.4} [{saving:.1}%]", r.test_hits)
                    }
                    _ => format!("{:.4}", r.test_hits),
                });
            let _ = write!(out, " {cell:>18}");
        }
        out.push('\n');
    }
    out
}
