//! CSV input/output, synthetic designs, outlier injection and error metrics.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{LadError, Result};
use crate::model::{Coefficients, Dataset};
use crate::rng;

/// Which CSV column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    /// Zero-based position in the header.
    Index(usize),
}

impl ResponseColumn {
    /// A header name if it names a column, otherwise a numeric index.
    pub fn parse(spec: &str, header: &[String]) -> Self {
        if header.iter().any(|h| h == spec) {
            return Self::Name(spec.to_string());
        }
        spec.parse().map_or_else(|_| Self::Name(spec.to_string()), Self::Index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    pub response: ResponseColumn,
    /// Prepend an all-ones column and mark it as the intercept.
    pub intercept: bool,
    /// Drop rows with missing or non-numeric cells instead of failing.
    pub drop_na: bool,
}

/// A dataset read from CSV together with its column names (the intercept, if
/// added, is named `intercept`).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub dataset: Dataset,
    pub names: Vec<String>,
    pub response_name: String,
    /// 1-based file lines removed by `drop_na`.
    pub dropped_rows: Vec<usize>,
}

fn io_err(e: impl std::fmt::Display) -> LadError {
    LadError::Io(e.to_string())
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a header-first, comma-separated file. Every non-response column
/// becomes a predictor, in file order.
pub fn read_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<CsvData> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(LadError::FileNotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(io_err)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(io_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let resp = match &opts.response {
        ResponseColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LadError::MissingResponseColumn(name.clone()))?,
        ResponseColumn::Index(i) if *i < header.len() => *i,
        ResponseColumn::Index(i) => return Err(LadError::MissingResponseColumn(i.to_string())),
    };

    let width = header.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
    let mut first_bad: Option<(usize, String, String)> = None;
    let mut bad_rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        // Header is line 1.
        let line = k + 2;
        let record = record.map_err(|e| LadError::ParseError {
            row: line,
            column: String::new(),
            value: e.to_string(),
            bad_rows: vec![line],
        })?;
        let mut parsed = Vec::with_capacity(width);
        let mut row_ok = record.len() == width;
        for c in 0..width {
            let raw = record.get(c).unwrap_or("");
            match parse_cell(raw) {
                Some(v) => parsed.push(v),
                None => {
                    row_ok = false;
                    if first_bad.is_none() {
                        first_bad = Some((line, header[c].clone(), raw.to_string()));
                    }
                    break;
                }
            }
        }
        if !row_ok {
            if first_bad.is_none() {
                first_bad = Some((line, String::new(), format!("{} fields", record.len())));
            }
            bad_rows.push(line);
            continue;
        }
        for (col, v) in columns.iter_mut().zip(parsed) {
            col.push(v);
        }
    }
    if !opts.drop_na {
        if let Some((row, column, value)) = first_bad {
            return Err(LadError::ParseError {
                row,
                column,
                value,
                bad_rows,
            });
        }
    }

    let y = columns.remove(resp);
    if y.is_empty() {
        return Err(LadError::NoRows);
    }
    let mut names: Vec<String> = header.iter().enumerate().filter(|(c, _)| *c != resp).map(|(_, h)| h.clone()).collect();
    let intercept_col = if opts.intercept {
        columns.insert(0, vec![1.0; y.len()]);
        names.insert(0, "intercept".to_string());
        Some(0)
    } else {
        None
    };
    Ok(CsvData {
        dataset: Dataset::from_columns(columns, y, intercept_col)?,
        names,
        response_name: header[resp].clone(),
        dropped_rows: if opts.drop_na { bad_rows } else { Vec::new() },
    })
}

/// Reads a dataset; see [`read_csv`].
pub fn load_csv(path: impl AsRef<Path>, response: &ResponseColumn, intercept: bool) -> Result<Dataset> {
    let opts = LoadOptions {
        response: response.clone(),
        intercept,
        drop_na: false,
    };
    read_csv(path, &opts).map(|c| c.dataset)
}

/// Formats with 17 significant digits, which round-trips any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `x1,…,xp,y`, skipping the intercept column.
pub fn write_csv(path: impl AsRef<Path>, d: &Dataset) -> Result<()> {
    let mut out = String::new();
    let predictors: Vec<usize> = (0..d.p()).filter(|&j| !d.is_intercept(j)).collect();
    let mut header: Vec<String> = (1..=predictors.len()).map(|k| format!("x{k}")).collect();
    header.push("y".to_string());
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..d.n() {
        let mut cells: Vec<String> = predictors.iter().map(|&j| fmt_f64(d.get(i, j))).collect();
        cells.push(fmt_f64(d.y()[i]));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let mut f = File::create(path.as_ref()).map_err(io_err)?;
    f.write_all(out.as_bytes()).map_err(io_err)
}

/// Linear model `y = Xβ* + ε` with standard normal predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    /// Predictors, not counting the intercept.
    pub p: usize,
    pub sigma: f64,
    /// Intercept first when `add_intercept`; drawn i.i.d. `N(0,1)` if absent.
    pub beta_true: Option<Vec<f64>>,
    pub add_intercept: bool,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n: usize, p: usize, sigma: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            sigma,
            beta_true: None,
            add_intercept: true,
            seed,
        }
    }

    fn columns(&self) -> usize {
        self.p + usize::from(self.add_intercept)
    }
}

/// Draws a synthetic dataset and returns it with the true coefficients.
/// Design, noise and coefficients come from separate streams.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(Dataset, Coefficients)> {
    if spec.n == 0 || spec.columns() == 0 {
        return Err(LadError::EmptyData {
            n: spec.n,
            p: spec.columns(),
        });
    }
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
        return Err(LadError::InvalidConfig(format!("sigma must be >= 0, got {}", spec.sigma)));
    }
    let width = spec.columns();
    let beta = match &spec.beta_true {
        Some(b) if b.len() != width => {
            return Err(LadError::DimensionMismatch {
                what: "true coefficient length",
                expected: width,
                found: b.len(),
            })
        }
        Some(b) => b.clone(),
        None => {
            let mut rng = rng::stream(spec.seed, "beta", 0);
            (0..width).map(|_| rng::standard_normal(&mut rng)).collect()
        }
    };
    let beta = Coefficients::new(beta)?;

    let mut design = rng::stream(spec.seed, "design", 0);
    let mut columns = Vec::with_capacity(width);
    if spec.add_intercept {
        columns.push(vec![1.0; spec.n]);
    }
    for _ in 0..spec.p {
        columns.push((0..spec.n).map(|_| rng::standard_normal(&mut design)).collect::<Vec<_>>());
    }
    let mut noise = rng::stream(spec.seed, "noise", 0);
    let y = (0..spec.n)
        .map(|i| {
            let signal: f64 = columns.iter().zip(beta.iter()).map(|(c, b)| c[i] * b).sum();
            signal + spec.sigma * rng::standard_normal(&mut noise)
        })
        .collect();
    let intercept_col = spec.add_intercept.then_some(0);
    Ok((Dataset::from_columns(columns, y, intercept_col)?, beta))
}

/// Outlier injection: a random subset of responses is redrawn with inflated
/// noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContamSpec {
    pub fraction: f64,
    pub sigma_out: f64,
    /// Constant added to every contaminated response.
    #[serde(default)]
    pub shift: f64,
    /// Use `|ε|` instead of `ε`, so all outliers lie above the signal.
    #[serde(default)]
    pub one_sided: bool,
    pub seed: u64,
}

impl ContamSpec {
    pub fn new(fraction: f64, sigma_out: f64, seed: u64) -> Self {
        Self {
            fraction,
            sigma_out,
            shift: 0.0,
            one_sided: false,
            seed,
        }
    }
}

/// Replaces `⌊fraction·n⌋` distinct responses with
/// `x_iᵀβ* + shift + ε_i`, `ε_i ~ N(0, sigma_out²)`. `X` is unchanged.
pub fn contaminate(d: &Dataset, beta_true: &Coefficients, c: &ContamSpec) -> Result<Dataset> {
    contaminate_indexed(d, beta_true, c).map(|(d, _)| d)
}

/// [`contaminate`], also returning the replaced rows in ascending order.
pub fn contaminate_indexed(d: &Dataset, beta_true: &Coefficients, c: &ContamSpec) -> Result<(Dataset, Vec<usize>)> {
    beta_true.check_len(d.p())?;
    if !(0.0..=1.0).contains(&c.fraction) {
        return Err(LadError::InvalidConfig(format!("contamination fraction must be in [0, 1], got {}", c.fraction)));
    }
    if !(c.sigma_out >= 0.0 && c.sigma_out.is_finite() && c.shift.is_finite()) {
        return Err(LadError::InvalidConfig("contamination noise must be finite and >= 0".into()));
    }
    let n = d.n();
    let count = ((c.fraction * n as f64).floor() as usize).min(n);
    let mut pick = rng::stream(c.seed, "contamination-rows", 0);
    let mut rows = index::sample(&mut pick, n, count).into_vec();
    rows.sort_unstable();

    let mut noise = rng::stream(c.seed, "contamination-noise", 0);
    let fitted = d.predict(beta_true);
    let mut y = d.y().to_vec();
    for &i in &rows {
        let mut e = c.sigma_out * rng::standard_normal(&mut noise);
        if c.one_sided {
            e = e.abs();
        }
        y[i] = fitted[i] + c.shift + e;
    }
    Ok((d.with_response(y)?, rows))
}

/// `(1/n) Σ |a_i − b_i|`.
pub fn mae(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(LadError::DimensionMismatch {
            what: "mae operands",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(LadError::EmptyInput);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}
