use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::power::PowerEstimate;
use crate::asymptotics::{contiguity_check, power_slopes, wilcoxon_power_closed, AsymptoticSetting, SlopeConvention};
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::sampling::LehmannKind;
use crate::scores::ScoreFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    PrettyText,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "pretty" | "pretty-text" | "text" => Ok(Self::PrettyText),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub keys: Vec<String>,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    /// `ok`, or the failure message of the cell.
    pub status: String,
}

impl TableRow {
    pub fn value(keys: Vec<String>, v: f64) -> Self {
        Self {
            keys,
            estimate: Some(v),
            std_error: None,
            replications: None,
            seed: None,
            status: "ok".into(),
        }
    }

    pub fn estimate(keys: Vec<String>, e: &PowerEstimate) -> Self {
        Self {
            keys,
            estimate: Some(e.rejection_rate),
            std_error: Some(e.std_error),
            replications: Some(e.replications),
            seed: Some(e.seed.seed),
            status: "ok".into(),
        }
    }

    pub fn failed(keys: Vec<String>, replications: usize, seed: RngSeed, message: &str) -> Self {
        Self {
            keys,
            estimate: None,
            std_error: None,
            replications: Some(replications),
            seed: Some(seed.seed),
            status: format!("failed: {message}"),
        }
    }
}

/// A long-format result table with an optional pivot for text display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub title: String,
    pub key_names: Vec<String>,
    pub rows: Vec<TableRow>,
    /// Key columns forming the row label of the pivoted display.
    pub pivot_rows: Vec<usize>,
    /// Key columns forming the column label of the pivoted display.
    pub pivot_cols: Vec<usize>,
}

const VALUE_COLUMNS: [&str; 5] = ["estimate", "std_error", "replications", "seed", "status"];

impl ResultTable {
    pub fn new(title: &str, key_names: &[&str]) -> Self {
        Self {
            title: title.into(),
            key_names: key_names.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            pivot_rows: Vec::new(),
            pivot_cols: Vec::new(),
        }
    }

    pub fn with_pivot(mut self, rows: &[usize], cols: &[usize]) -> Self {
        self.pivot_rows = rows.to_vec();
        self.pivot_cols = cols.to_vec();
        self
    }

    /// Layout of Monte Carlo power tables: one line per design row, one column per test and size.
    pub fn power(title: &str) -> Self {
        Self::new(title, &["row", "m", "n", "test"]).with_pivot(&[0], &[3, 1])
    }

    pub fn get(&self, keys: &[&str]) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.keys.len() == keys.len() && r.keys.iter().zip(keys).all(|(a, b)| a == b))
    }

    pub fn value(&self, keys: &[&str]) -> Option<f64> {
        self.get(keys).and_then(|r| r.estimate)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(|r| r.status != "ok")
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv<W: Write>(t: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = t.key_names.iter().map(String::as_str).chain(VALUE_COLUMNS).collect();
    w.write_record(&header)?;
    for r in &t.rows {
        let mut rec = r.keys.clone();
        // Display of f64 is the shortest string that parses back to the same value.
        rec.extend([
            opt(r.estimate),
            opt(r.std_error),
            opt(r.replications),
            opt(r.seed),
            r.status.clone(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<table output>".into(),
        source,
    })
}

/// Parses a table written in CSV format; pivot information is not stored in CSV.
pub fn read_table_csv<R: Read>(title: &str, input: R) -> Result<ResultTable> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let nkeys = header
        .len()
        .checked_sub(VALUE_COLUMNS.len())
        .filter(|&k| header[k..] == VALUE_COLUMNS)
        .ok_or_else(|| Error::Table("header does not end with the estimate columns".into()))?;
    let mut table = ResultTable {
        title: title.into(),
        key_names: header[..nkeys].to_vec(),
        rows: Vec::new(),
        pivot_rows: Vec::new(),
        pivot_cols: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        fn parse<T: std::str::FromStr>(s: &str) -> Result<Option<T>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| Error::Table(format!("cannot parse '{s}'")))
        }
        table.rows.push(TableRow {
            keys: (0..nkeys).map(|i| field(i).to_string()).collect(),
            estimate: parse(field(nkeys))?,
            std_error: parse(field(nkeys + 1))?,
            replications: parse(field(nkeys + 2))?,
            seed: parse(field(nkeys + 3))?,
            status: field(nkeys + 4).to_string(),
        });
    }
    Ok(table)
}

fn label(keys: &[String], idx: &[usize], names: &[String]) -> String {
    idx.iter()
        .map(|&i| match names[i].as_str() {
            "m" | "n" | "N" => format!("{}={}", names[i], keys[i]),
            _ => keys[i].clone(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn cell_text(r: &TableRow) -> String {
    match r.estimate {
        Some(v) => format!("{v:.4}"),
        None if r.status != "ok" => "FAILED".into(),
        None => String::new(),
    }
}

fn pretty(t: &ResultTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", t.title);
    if t.pivot_rows.is_empty() || t.pivot_cols.is_empty() {
        let mut header: Vec<String> = t.key_names.clone();
        header.extend(["estimate", "std_error", "reps"].map(String::from));
        let body: Vec<Vec<String>> = t
            .rows
            .iter()
            .map(|r| {
                let mut v = r.keys.clone();
                v.extend([cell_text(r), r.std_error.map(|e| format!("{e:.4}")).unwrap_or_default(), opt(r.replications)]);
                v
            })
            .collect();
        render(&mut s, &header, &body);
        return s;
    }
    let mut row_labels: Vec<String> = Vec::new();
    let mut col_labels: Vec<String> = Vec::new();
    for r in &t.rows {
        let rl = label(&r.keys, &t.pivot_rows, &t.key_names);
        let cl = label(&r.keys, &t.pivot_cols, &t.key_names);
        if !row_labels.contains(&rl) {
            row_labels.push(rl);
        }
        if !col_labels.contains(&cl) {
            col_labels.push(cl);
        }
    }
    let mut grid = vec![vec![String::new(); col_labels.len()]; row_labels.len()];
    for r in &t.rows {
        let i = row_labels.iter().position(|l| *l == label(&r.keys, &t.pivot_rows, &t.key_names));
        let j = col_labels.iter().position(|l| *l == label(&r.keys, &t.pivot_cols, &t.key_names));
        if let (Some(i), Some(j)) = (i, j) {
            grid[i][j] = cell_text(r);
        }
    }
    let corner = t.pivot_rows.iter().map(|&i| t.key_names[i].as_str()).collect::<Vec<_>>().join(" ");
    let header: Vec<String> = std::iter::once(corner).chain(col_labels).collect();
    let body: Vec<Vec<String>> = row_labels
        .into_iter()
        .zip(grid)
        .map(|(l, cells)| std::iter::once(l).chain(cells).collect())
        .collect();
    render(&mut s, &header, &body);
    s
}

fn render(s: &mut String, header: &[String], body: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |s: &mut String, cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(k, (c, &w))| if k == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(s, header);
    let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
    let _ = writeln!(s, "{}", "-".repeat(total));
    for row in body {
        line(s, row);
    }
}

/// Serializes `table` to a string in the requested format.
pub fn emit_table(table: &ResultTable, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(table, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Table(e.to_string()))
        }
        OutputFormat::Json => Ok(serde_json::to_string_pretty(table)? + "\n"),
        OutputFormat::PrettyText => Ok(pretty(table)),
    }
}

/// Writes `table` to `path`, reporting I/O errors with the path.
pub fn write_table(table: &ResultTable, format: OutputFormat, path: &Path) -> Result<()> {
    let text = emit_table(table, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Relative asymptotic efficiencies: alternatives as rows, tests as columns.
pub fn efficiency_table() -> Result<ResultTable> {
    let mut t = ResultTable::new("Relative asymptotic efficiencies", &["alternative", "test"]).with_pivot(&[0], &[1]);
    for (kind, row) in crate::asymptotics::efficiency_table()? {
        for (f, v) in ScoreFunction::ALL.iter().zip(row) {
            t.rows.push(TableRow::value(vec![kind.label().into(), f.label().into()], v));
        }
    }
    Ok(t)
}

/// Asymptotic Wilcoxon power under the Wilcoxon-type alternative at λ = ½,
/// next to the linearised Kolmogorov–Smirnov power `α + Δ₀·slope`.
pub fn wilcoxon_power_table(delta0: &[f64], alpha: f64) -> Result<ResultTable> {
    let mut t = ResultTable::new("Asymptotic powers", &["delta0", "column"]).with_pivot(&[0], &[1]);
    let ks_slope = power_slopes(alpha, SlopeConvention::Formula { lambda: 0.5 })?.ks;
    for &d in delta0 {
        let w = wilcoxon_power_closed(&AsymptoticSetting::new(0.5, d, alpha)?);
        let key = super::format_delta(d);
        t.rows.push(TableRow::value(vec![key.clone(), "As.W".into()], w));
        t.rows.push(TableRow::value(vec![key, "As.KS".into()], alpha + d * ks_slope));
    }
    Ok(t)
}

pub fn slope_table(alphas: &[f64], convention: SlopeConvention) -> Result<ResultTable> {
    let mut t = ResultTable::new("Slopes of the power functions at the hypothesis", &["alpha", "quantity"]).with_pivot(&[0], &[1]);
    for &a in alphas {
        let s = power_slopes(a, convention)?;
        for (q, v) in [("ks", s.ks), ("wilcoxon", s.wilcoxon), ("ratio", s.ratio)] {
            t.rows.push(TableRow::value(vec![a.to_string(), q.into()], v));
        }
    }
    Ok(t)
}

/// Hellinger sums against their bounds, plus the largest tail mass found
/// beyond the maximal density ratio (zero when the check passes).
pub fn contiguity_table(kinds: &[LehmannKind], delta0: f64, sizes: &[(usize, usize)]) -> Result<ResultTable> {
    let mut t = ResultTable::new("Contiguity check", &["family", "m", "n", "quantity"]).with_pivot(&[0, 1, 2], &[3]);
    for &kind in kinds {
        for &(m, n) in sizes {
            let r = contiguity_check(kind, delta0, m, n)?;
            let beyond = r
                .tail_grid
                .iter()
                .filter(|(c, _)| *c > r.max_ratio)
                .map(|&(_, q)| q)
                .fold(0.0, f64::max);
            let keys = |q: &str| vec![kind.label().to_string(), m.to_string(), n.to_string(), q.to_string()];
            t.rows.push(TableRow::value(keys("delta_n"), r.delta_n));
            t.rows.push(TableRow::value(keys("sum_h2"), r.sum_h2));
            t.rows.push(TableRow::value(keys("bound"), r.bound));
            t.rows.push(TableRow::value(keys("tail_beyond"), beyond));
            t.rows.push(TableRow::value(keys("pass"), if r.pass { 1.0 } else { 0.0 }));
        }
    }
    Ok(t)
}
