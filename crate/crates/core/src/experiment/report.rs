use std::fmt::Write as _;
use std::path::Path;

use super::runner::{ResultRow, RESULT_COLUMNS};
use crate::error::{invalid_input, Result};
use crate::strategy::{BalanceRule, ExclusionRule, InclusionRule};

/// Label used for summary rows pooled over all datasets.
pub const ALL_DATASETS: &str = "ALL";

/// Mean and standard error of the final balanced accuracy of one
/// strategy cell (or baseline).
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub include: String,
    pub exclude: String,
    pub balance: String,
    pub ksv: String,
    pub relabel: String,
    pub capacity: String,
    /// Runs with a defined balanced accuracy.
    pub n: usize,
    /// Runs that failed or had an undefined balanced accuracy.
    pub missing: usize,
    pub mean_ba: Option<f64>,
    /// Sample standard deviation over `√n`; needs `n ≥ 2`.
    pub se_ba: Option<f64>,
}

type CellKey = (String, String, String, String, String, String);

fn cell_key(r: &ResultRow) -> CellKey {
    (
        r.include.clone(),
        r.exclude.clone(),
        r.balance.clone(),
        r.ksv.clone(),
        r.relabel.clone(),
        r.capacity.clone(),
    )
}

fn aggregate(dataset: &str, key: &CellKey, values: &[Option<f64>]) -> SummaryRow {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    let mean = (n > 0).then(|| present.iter().sum::<f64>() / n as f64);
    let se = match (mean, n) {
        (Some(m), n) if n >= 2 => {
            let var = present.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
            Some((var / n as f64).sqrt())
        }
        _ => None,
    };
    SummaryRow {
        dataset: dataset.to_string(),
        include: key.0.clone(),
        exclude: key.1.clone(),
        balance: key.2.clone(),
        ksv: key.3.clone(),
        relabel: key.4.clone(),
        capacity: key.5.clone(),
        n,
        missing: values.len() - n,
        mean_ba: mean,
        se_ba: se,
    }
}

/// Per (dataset, cell) statistics over seeds, followed by the same cells
/// pooled over every dataset. Order follows first appearance in `rows`.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut per_dataset: Vec<((String, CellKey), Vec<Option<f64>>)> = Vec::new();
    let mut pooled: Vec<(CellKey, Vec<Option<f64>>)> = Vec::new();
    for r in rows {
        let key = cell_key(r);
        let dk = (r.dataset.clone(), key.clone());
        match per_dataset.iter_mut().find(|(k, _)| *k == dk) {
            Some((_, v)) => v.push(r.final_ba),
            None => per_dataset.push((dk, vec![r.final_ba])),
        }
        match pooled.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.final_ba),
            None => pooled.push((key, vec![r.final_ba])),
        }
    }
    let mut out: Vec<SummaryRow> = per_dataset
        .iter()
        .map(|((ds, key), vals)| aggregate(ds, key, vals))
        .collect();
    out.extend(pooled.iter().map(|(key, vals)| aggregate(ALL_DATASETS, key, vals)));
    out
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "dataset", "include", "exclude", "balance", "ksv", "relabel", "capacity", "n", "missing", "mean_ba", "se_ba",
    ])?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.include.clone(),
            r.exclude.clone(),
            r.balance.clone(),
            r.ksv.clone(),
            r.relabel.clone(),
            r.capacity.clone(),
            r.n.to_string(),
            r.missing.to_string(),
            r.mean_ba.map(|v| v.to_string()).unwrap_or_default(),
            r.se_ba.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a `results.csv` written by the runner.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(RESULT_COLUMNS.iter().copied()) {
        return Err(invalid_input(format!(
            "{} does not have the results.csv header",
            path.display()
        )));
    }
    reader
        .records()
        .map(|rec| ResultRow::from_record(&rec?))
        .collect()
}

fn code<T: std::str::FromStr>(s: &str, f: impl Fn(T) -> &'static str) -> String {
    s.parse::<T>().map(f).map(str::to_string).unwrap_or_else(|_| s.to_string())
}

fn pct(v: Option<f64>) -> String {
    v.map(|v| format!("{:.1}", 100.0 * v)).unwrap_or_else(|| "-".into())
}

/// Best strategy cell per dataset next to the static SVM and PA baselines.
///
/// Columns: DATASET, ADD, REM, BAL, KSV, REL, SIZE, PERF, SVM/PA, with
/// performance as balanced accuracy in percent. Ties on the mean go to the
/// smaller basket.
pub fn table1_report(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(invalid_input("no results to report"));
    }
    let summary = summarize(rows);
    let mut datasets: Vec<&str> = Vec::new();
    for r in rows {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
    }

    let mut out = String::new();
    let header = ["DATASET", "ADD", "REM", "BAL", "KSV", "REL", "SIZE", "PERF", "SVM/PA"];
    writeln!(
        out,
        "{:<14}{:<5}{:<5}{:<5}{:<5}{:<5}{:<7}{:<8}{}",
        header[0], header[1], header[2], header[3], header[4], header[5], header[6], header[7], header[8]
    )
    .unwrap();
    for ds in datasets {
        let of_ds: Vec<&SummaryRow> = summary.iter().filter(|s| s.dataset == ds).collect();
        let baseline = |name: &str| of_ds.iter().find(|s| s.include == name).and_then(|s| s.mean_ba);
        let best = of_ds
            .iter()
            .filter(|s| s.include != "STATIC" && s.include != "PA")
            .filter(|s| s.mean_ba.is_some())
            .fold(None::<&&SummaryRow>, |best, s| match best {
                None => Some(s),
                Some(b) => {
                    let (sm, bm) = (s.mean_ba.unwrap(), b.mean_ba.unwrap());
                    let smaller = s.capacity.parse::<usize>().unwrap_or(usize::MAX)
                        < b.capacity.parse::<usize>().unwrap_or(usize::MAX);
                    if sm > bm || (sm == bm && smaller) {
                        Some(s)
                    } else {
                        Some(b)
                    }
                }
            });
        let svm_pa = format!("{} / {}", pct(baseline("STATIC")), pct(baseline("PA")));
        match best {
            Some(b) => writeln!(
                out,
                "{:<14}{:<5}{:<5}{:<5}{:<5}{:<5}{:<7}{:<8}{}",
                ds,
                code::<InclusionRule>(&b.include, InclusionRule::code),
                code::<ExclusionRule>(&b.exclude, ExclusionRule::code),
                code::<BalanceRule>(&b.balance, BalanceRule::code),
                b.ksv,
                b.relabel,
                b.capacity,
                pct(b.mean_ba),
                svm_pa
            ),
            None => writeln!(
                out,
                "{:<14}{:<5}{:<5}{:<5}{:<5}{:<5}{:<7}{:<8}{}",
                ds, "-", "-", "-", "-", "-", "-", "-", svm_pa
            ),
        }
        .unwrap();
    }
    Ok(out)
}
