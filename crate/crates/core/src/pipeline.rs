//! Price ingestion, end-to-end analysis of a series and the tabular report
//! (`name, startDate, length, mean, p-value, variance, <p per assumption>`).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::innovations::{horizon_innovations, HORIZON_RULE};
use crate::kernels::KernelSpec;
use crate::series::ReturnKind;
use crate::stats::{mean_test, moments, variance_test, InnovationDistribution};

pub use crate::series::PriceSeries;

/// Innovations an analysis needs beyond the kernel warm-up.
pub const MIN_INNOVATIONS: usize = 100;

const DATE_FORMAT: &str = "%Y-%m-%d";

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).ok()
}

/// Reads `date,price` rows. A header row is recognised by a first field
/// that is not a date. Out-of-order rows are sorted and the series is
/// flagged as reordered; duplicate dates and non-positive prices are errors.
pub fn load_prices<R: Read>(reader: R, name: &str) -> Result<PriceSeries> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let first = record.get(0).unwrap_or("");
        let date = match parse_date(first) {
            Some(d) => d,
            None if i == 0 => continue,
            None => return Err(Error::Parse { line, msg: format!("invalid date `{first}`") }),
        };
        if record.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected 2 fields (date,price), found {}", record.len()) });
        }
        let price: f64 = record[1]
            .parse()
            .map_err(|_| Error::Parse { line, msg: format!("invalid price `{}`", &record[1]) })?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::Data(format!("{name}: non-positive price {price} on {date} (line {line})")));
        }
        rows.push((date, price));
    }
    let reordered = rows.windows(2).any(|w| w[1].0 < w[0].0);
    if reordered {
        rows.sort_by_key(|(d, _)| *d);
    }
    if let Some(w) = rows.windows(2).find(|w| w[1].0 == w[0].0) {
        return Err(Error::Data(format!("{name}: duplicate date {}", w[0].0)));
    }
    let (dates, prices) = rows.into_iter().unzip();
    Ok(PriceSeries::new(name, dates, prices)?.mark_reordered(reordered))
}

/// Loads a price file, naming the series after the file stem.
pub fn load_prices_file(path: &Path) -> Result<PriceSeries> {
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    load_prices(File::open(path)?, &name)
}

/// Writes `date,price` with a header, using the shortest representation
/// that reads back to the same `f64`.
pub fn save_prices<W: Write>(writer: W, series: &PriceSeries) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["date", "price"])?;
    for (d, p) in series.dates().iter().zip(series.prices()) {
        csv.write_record([d.format(DATE_FORMAT).to_string(), p.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub kernel: KernelSpec,
    pub assumptions: Vec<InnovationDistribution>,
    /// Innovation horizon in business days.
    pub horizon: usize,
    pub returns: ReturnKind,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            assumptions: vec![InnovationDistribution::student(6.0), InnovationDistribution::student(5.0)],
            horizon: 1,
            returns: ReturnKind::Log,
        }
    }
}

/// How the statistics of a report row were obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportSource {
    Analyzed { kernel: KernelSpec, returns: ReturnKind, horizon: usize, reordered: bool },
    /// `(n, mean, variance)` supplied directly.
    Published,
}

/// One row of the report table.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub start_date: Option<NaiveDate>,
    pub length: usize,
    pub mean: f64,
    pub p_mean: f64,
    pub variance: f64,
    /// Mean-free size estimator, when raw innovations were available.
    pub second_moment: Option<f64>,
    pub p_var: Vec<(InnovationDistribution, f64)>,
    pub source: ReportSource,
}

fn validate_assumptions(assumptions: &[InnovationDistribution]) -> Result<()> {
    for dist in assumptions {
        crate::stats::var_eps_squared(*dist)?;
    }
    Ok(())
}

/// Report row computed from `(n, mean, variance)`.
pub fn report_from_moments(
    name: &str,
    start_date: Option<NaiveDate>,
    n: usize,
    mean: f64,
    variance: f64,
    assumptions: &[InnovationDistribution],
) -> Result<TestReport> {
    let p_var = assumptions
        .iter()
        .map(|d| Ok((*d, variance_test(variance, n, *d)?.p)))
        .collect::<Result<_>>()?;
    Ok(TestReport {
        name: name.to_string(),
        start_date,
        length: n,
        mean,
        p_mean: mean_test(mean, n).p,
        variance,
        second_moment: None,
        p_var,
        source: ReportSource::Published,
    })
}

/// Smallest number of prices `analyze_series` accepts.
pub fn minimum_prices(kernel_len: usize, horizon: usize) -> usize {
    kernel_len + 1 + MIN_INNOVATIONS * horizon
}

/// Full chain for one series: returns, variance forecasts, innovations,
/// moments and the tests under each assumption.
pub fn analyze_series(prices: &PriceSeries, config: &AnalysisConfig) -> Result<TestReport> {
    validate_assumptions(&config.assumptions)?;
    let kernel = config.kernel.build()?;
    let required = minimum_prices(kernel.len(), config.horizon.max(1));
    if prices.len() < required {
        return Err(Error::InsufficientData(format!(
            "{}: {} prices, at least {required} are needed for kernel {} at horizon {}",
            prices.name(),
            prices.len(),
            config.kernel,
            config.horizon
        )));
    }
    let eps = horizon_innovations(prices, &kernel, config.horizon, config.returns)?;
    let m = moments(eps.eps())?;
    let mut report = report_from_moments(
        prices.name(),
        eps.dates().first().copied(),
        m.n,
        m.mu_hat,
        m.var_hat,
        &config.assumptions,
    )?;
    report.second_moment = Some(m.second_moment);
    report.source = ReportSource::Analyzed {
        kernel: config.kernel,
        returns: config.returns,
        horizon: config.horizon,
        reordered: prices.reordered(),
    };
    Ok(report)
}

/// Per-row settings that replace the batch defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kernel: Option<KernelSpec>,
    pub horizon: Option<usize>,
    pub returns: Option<ReturnKind>,
}

impl Overrides {
    /// Parses `key=value` pairs separated by `;`: `kernel`, `horizon`, `returns`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Overrides::default();
        for pair in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("override `{pair}` is not key=value")))?;
            match key.trim() {
                "kernel" => out.kernel = Some(value.parse()?),
                "horizon" => {
                    out.horizon = Some(value.trim().parse().map_err(|_| Error::Usage(format!("bad horizon `{value}`")))?)
                }
                "returns" => out.returns = Some(value.parse()?),
                other => return Err(Error::Usage(format!("unknown override `{other}`"))),
            }
        }
        Ok(out)
    }

    pub fn apply(&self, base: &AnalysisConfig) -> AnalysisConfig {
        AnalysisConfig {
            kernel: self.kernel.unwrap_or(base.kernel),
            assumptions: base.assumptions.clone(),
            horizon: self.horizon.unwrap_or(base.horizon),
            returns: self.returns.unwrap_or(base.returns),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
    pub overrides: Overrides,
}

/// Reads a `name,path[,overrides]` manifest; relative paths resolve
/// against `base_dir`.
pub fn parse_manifest<R: Read>(reader: R, base_dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut entries = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("name")) {
            continue;
        }
        if !(2..=3).contains(&record.len()) {
            return Err(Error::Parse { line, msg: "expected name,path[,overrides]".into() });
        }
        let path = PathBuf::from(&record[1]);
        entries.push(ManifestEntry {
            name: record[0].to_string(),
            path: if path.is_relative() { base_dir.join(path) } else { path },
            overrides: Overrides::parse(record.get(2).unwrap_or(""))?,
        });
    }
    Ok(entries)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    parse_manifest(File::open(path)?, path.parent().unwrap_or(Path::new(".")))
}

/// A failed report row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub name: String,
    pub message: String,
}

pub type RowOutcome = std::result::Result<TestReport, RowError>;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub assumptions: Vec<InnovationDistribution>,
    pub rows: Vec<RowOutcome>,
}

impl BatchReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.is_err()).count()
    }

    pub fn to_csv(&self) -> String {
        render_csv(&self.rows, &self.assumptions)
    }

    pub fn to_text(&self) -> String {
        render_text(&self.rows, &self.assumptions)
    }
}

fn analyze_entry(entry: &ManifestEntry, config: &AnalysisConfig) -> Result<TestReport> {
    let prices = load_prices(File::open(&entry.path)?, &entry.name)?;
    analyze_series(&prices, &entry.overrides.apply(config))
}

/// Analyzes every manifest entry; a failing entry yields an error row and
/// leaves the others untouched.
pub fn batch_report(entries: &[ManifestEntry], config: &AnalysisConfig) -> Result<BatchReport> {
    if entries.is_empty() {
        return Err(Error::Usage("the manifest lists no series".into()));
    }
    validate_assumptions(&config.assumptions)?;
    let rows = entries
        .par_iter()
        .map(|entry| {
            analyze_entry(entry, config).map_err(|e| RowError { name: entry.name.clone(), message: e.to_string() })
        })
        .collect();
    Ok(BatchReport { assumptions: config.assumptions.clone(), rows })
}

/// Row of published statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedRow {
    pub name: String,
    pub start_date: Option<NaiveDate>,
    pub length: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Reads published statistics; the header must name the columns `name`,
/// `startDate`, `length`, `mean` and `variance`. Other columns are ignored.
pub fn parse_published<R: Read>(reader: R) -> Result<Vec<PublishedRow>> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column `{name}`") })
    };
    let (name, start, length, mean, variance) =
        (column("name")?, column("startDate")?, column("length")?, column("mean")?, column("variance")?);
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let number = |i: usize, what: &str| -> Result<f64> {
            field(i).parse().map_err(|_| Error::Parse { line, msg: format!("invalid {what} `{}`", field(i)) })
        };
        rows.push(PublishedRow {
            name: field(name).to_string(),
            start_date: parse_date(field(start)),
            length: field(length)
                .parse()
                .map_err(|_| Error::Parse { line, msg: format!("invalid length `{}`", field(length)) })?,
            mean: number(mean, "mean")?,
            variance: number(variance, "variance")?,
        });
    }
    Ok(rows)
}

/// Recomputes the p-value columns for published `(n, mean, variance)` rows.
pub fn published_report(rows: &[PublishedRow], assumptions: &[InnovationDistribution]) -> Result<BatchReport> {
    if rows.is_empty() {
        return Err(Error::Usage("no published rows".into()));
    }
    validate_assumptions(assumptions)?;
    let rows = rows
        .iter()
        .map(|r| {
            report_from_moments(&r.name, r.start_date, r.length, r.mean, r.variance, assumptions)
                .map_err(|e| RowError { name: r.name.clone(), message: e.to_string() })
        })
        .collect();
    Ok(BatchReport { assumptions: assumptions.to_vec(), rows })
}

/// Column header of a report with the given assumptions.
pub fn report_header(assumptions: &[InnovationDistribution]) -> Vec<String> {
    let mut header: Vec<String> = ["name", "startDate", "length", "mean", "p-value", "variance"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(assumptions.iter().map(|d| d.label()));
    header.extend(["kernel", "returns", "horizon", "error"].iter().map(|s| s.to_string()));
    header
}

fn metadata(source: &ReportSource) -> [String; 3] {
    match source {
        ReportSource::Analyzed { kernel, returns, horizon, reordered } => {
            let mut horizon = if *horizon > 1 { format!("{horizon} ({HORIZON_RULE})") } else { "1".into() };
            if *reordered {
                horizon.push_str(" [input reordered]");
            }
            [kernel.to_string(), returns.to_string(), horizon]
        }
        ReportSource::Published => ["published".into(), String::new(), String::new()],
    }
}

fn row_fields(row: &RowOutcome, assumptions: &[InnovationDistribution], fmt: impl Fn(f64) -> String) -> Vec<String> {
    let blank = |n: usize| std::iter::repeat_n(String::new(), n);
    match row {
        Ok(r) => {
            let mut fields = vec![
                r.name.clone(),
                r.start_date.map(|d| d.to_string()).unwrap_or_default(),
                r.length.to_string(),
                fmt(r.mean),
                fmt(r.p_mean),
                fmt(r.variance),
            ];
            fields.extend(r.p_var.iter().map(|(_, p)| fmt(*p)));
            fields.extend(metadata(&r.source));
            fields.push(String::new());
            fields
        }
        Err(e) => {
            let mut fields = vec![e.name.clone()];
            fields.extend(blank(5 + assumptions.len() + 3));
            fields.push(e.message.clone());
            fields
        }
    }
}

/// CSV rendering at full precision.
pub fn render_csv(rows: &[RowOutcome], assumptions: &[InnovationDistribution]) -> String {
    let mut csv = csv::Writer::from_writer(Vec::new());
    let write = |csv: &mut csv::Writer<Vec<u8>>, fields: &[String]| csv.write_record(fields).expect("in-memory write");
    write(&mut csv, &report_header(assumptions));
    for row in rows {
        write(&mut csv, &row_fields(row, assumptions, |x| x.to_string()));
    }
    String::from_utf8(csv.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Aligned text table with three decimals. The metadata columns are
/// summarised once below the table.
pub fn render_text(rows: &[RowOutcome], assumptions: &[InnovationDistribution]) -> String {
    let numeric = 6 + assumptions.len();
    let header = report_header(assumptions);
    let mut table: Vec<Vec<String>> = vec![header[..numeric].to_vec()];
    let mut notes = Vec::new();
    for row in rows {
        let fields = row_fields(row, assumptions, |x| format!("{x:.3}"));
        match row {
            Ok(r) => {
                let [kernel, returns, horizon] = metadata(&r.source);
                let note = match &r.source {
                    ReportSource::Published => "published statistics".to_string(),
                    _ => format!("kernel {kernel}, {returns} returns, horizon {horizon}"),
                };
                if !notes.contains(&note) {
                    notes.push(note);
                }
                table.push(fields[..numeric].to_vec());
            }
            Err(e) => {
                let mut line = vec![e.name.clone()];
                line.push(format!("ERROR: {}", e.message));
                table.push(line);
            }
        }
    }
    let mut widths = vec![0; numeric];
    for line in table.iter().filter(|l| l.len() == numeric) {
        for (w, f) in widths.iter_mut().zip(line) {
            *w = (*w).max(f.chars().count());
        }
    }
    let mut out = String::new();
    for line in &table {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(i, f)| match (i, line.len() == numeric) {
                (0, _) => format!("{f:<w$}", w = widths[0]),
                (_, true) => format!("{f:>w$}", w = widths[i]),
                (_, false) => f.clone(),
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    for note in notes {
        let _ = writeln!(out, "# {note}");
    }
    out
}

/// Process exit status for an error: 1 usage, 2 data.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::InvalidParameter(_) | Error::Singularity { .. } => 1,
        _ => 2,
    }
}
