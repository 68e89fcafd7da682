//! CSV tables and key-value configuration.
//!
//! Every CSV starts with optional `# key=value` metadata lines followed by a
//! header row. Angles are written in degrees.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mc::{DiskEnsembleConfig, RadiusSpec, RealizationStats, ThetaBins};
use crate::models::{CorrelationModel, ModelKind};
use crate::peaks::PeakReport;
use crate::scalar::Real;
use crate::transforms::{GridKind, PowerSpectrum, TabulatedCorrelation};

/// Ordered `# key=value` header lines.
pub type Metadata = Vec<(String, String)>;

fn write_metadata<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn fmt<T: Real>(x: T) -> String {
    format!("{}", x.to_f64_lossy())
}

/// Degrees converted from radians, rounded to 15 significant digits so that
/// conversion noise (`11.450000000000001`) does not reach the files.
fn fmt_deg<T: Real>(rad: T) -> String {
    let d = rad.deg().to_f64_lossy();
    let rounded: f64 = format!("{d:.14e}").parse().unwrap_or(d);
    format!("{rounded}")
}

fn fmt_opt<T: Real>(x: Option<T>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Splits text into metadata and a CSV reader over the remaining rows.
fn open_table(text: &str) -> (Metadata, csv::Reader<&[u8]>) {
    let meta = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| {
            let (k, v) = l.trim().split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect();
    let reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    (meta, reader)
}

fn header_line(reader: &mut csv::Reader<&[u8]>) -> Result<(u64, Vec<String>)> {
    let headers = reader.headers()?.clone();
    let line = headers.position().map_or(1, |p| p.line());
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::Parse {
            line,
            message: "missing header row".into(),
        });
    }
    Ok((line, headers.iter().map(str::to_string).collect()))
}

fn parse_field<T: Real>(record: &csv::StringRecord, col: usize, name: &str) -> Result<Option<T>> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(col).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column '{name}'"),
    })?;
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("column '{name}': '{raw}' is not a number"),
    })?;
    Ok(Some(T::lit(v)))
}

fn required<T: Real>(record: &csv::StringRecord, col: usize, name: &str) -> Result<T> {
    parse_field(record, col, name)?.ok_or_else(|| Error::Parse {
        line: record.position().map_or(0, |p| p.line()),
        message: format!("column '{name}' is empty"),
    })
}

fn read_text<R: Read>(mut r: R) -> Result<String> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    Ok(s)
}

/// Columns `theta_deg,value[,sigma]`.
pub fn write_correlation<T: Real, W: Write>(
    mut w: W,
    table: &TabulatedCorrelation<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_metadata(&mut w, meta)?;
    let mut out = csv::Writer::from_writer(w);
    match table.sigma() {
        Some(sigma) => {
            out.write_record(["theta_deg", "value", "sigma"])?;
            for ((t, v), s) in table.theta().iter().zip(table.values()).zip(sigma) {
                out.write_record([fmt_deg(*t), fmt(*v), fmt(*s)])?;
            }
        }
        None => {
            out.write_record(["theta_deg", "value"])?;
            for (t, v) in table.theta().iter().zip(table.values()) {
                out.write_record([fmt_deg(*t), fmt(*v)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_correlation<T: Real, R: Read>(r: R) -> Result<(TabulatedCorrelation<T>, Metadata)> {
    let text = read_text(r)?;
    let (meta, mut reader) = open_table(&text);
    let (line, headers) = header_line(&mut reader)?;
    let with_sigma = match headers
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .as_slice()
    {
        ["theta_deg", "value"] => false,
        ["theta_deg", "value", "sigma"] => true,
        _ => {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected header theta_deg,value[,sigma], found {}",
                    headers.join(",")
                ),
            })
        }
    };
    let mut theta = Vec::new();
    let mut values = Vec::new();
    let mut sigma = Vec::new();
    for record in reader.records() {
        let record = record?;
        theta.push(required::<T>(&record, 0, "theta_deg")?.rad());
        values.push(required(&record, 1, "value")?);
        if with_sigma {
            sigma.push(required(&record, 2, "sigma")?);
        }
    }
    let table = TabulatedCorrelation::new(theta, values, with_sigma.then_some(sigma))?;
    Ok((table, meta))
}

/// Columns `ell_or_k,value`; the grid kind is recorded as `grid` metadata.
pub fn write_spectrum<T: Real, W: Write>(
    mut w: W,
    spec: &PowerSpectrum<T>,
    meta: &[(String, String)],
) -> Result<()> {
    let kind = match spec.kind() {
        GridKind::Multipole => "multipole",
        GridKind::Frequency => "frequency",
    };
    let mut all = meta.to_vec();
    if !all.iter().any(|(k, _)| k == "grid") {
        all.push(("grid".into(), kind.into()));
    }
    write_metadata(&mut w, &all)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["ell_or_k", "value"])?;
    for (g, v) in spec.grid().iter().zip(spec.values()) {
        out.write_record([fmt(*g), fmt(*v)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a spectrum. Without `grid` metadata, integer grids are multipoles.
pub fn read_spectrum<T: Real, R: Read>(r: R) -> Result<(PowerSpectrum<T>, Metadata)> {
    let text = read_text(r)?;
    let (meta, mut reader) = open_table(&text);
    let (line, headers) = header_line(&mut reader)?;
    if headers != ["ell_or_k", "value"] {
        return Err(Error::Parse {
            line,
            message: format!(
                "expected header ell_or_k,value, found {}",
                headers.join(",")
            ),
        });
    }
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        grid.push(required::<T>(&record, 0, "ell_or_k")?);
        values.push(required(&record, 1, "value")?);
    }
    let kind = match meta
        .iter()
        .find(|(k, _)| k == "grid")
        .map(|(_, v)| v.as_str())
    {
        Some("multipole") => GridKind::Multipole,
        Some("frequency") => GridKind::Frequency,
        Some(other) => return Err(Error::Config(format!("unknown grid kind '{other}'"))),
        None if grid
            .iter()
            .all(|g| *g >= T::zero() && g.fract() == T::zero()) =>
        {
            GridKind::Multipole
        }
        None => GridKind::Frequency,
    };
    Ok((PowerSpectrum::new(kind, grid, values)?, meta))
}

/// Columns `theta_deg,mean,rms,n_pairs`; missing values are empty fields.
pub fn write_stats<T: Real, W: Write>(
    mut w: W,
    stats: &RealizationStats<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_metadata(&mut w, meta)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["theta_deg", "mean", "rms", "n_pairs"])?;
    for (i, c) in stats.bins.centers().into_iter().enumerate() {
        out.write_record([
            fmt_deg(c),
            fmt_opt(stats.mean[i]),
            fmt_opt(stats.rms[i]),
            stats.n_pairs[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Summary statistics of a peak report as key/value pairs.
pub fn peak_summary<T: Real>(report: &PeakReport<T>) -> Metadata {
    let mut s = vec![
        ("n_peaks".to_string(), report.peaks.len().to_string()),
        (
            "oscillation_detected".into(),
            report.oscillation.detected.to_string(),
        ),
        ("score".into(), fmt(report.oscillation.score)),
        ("regularity".into(), fmt(report.oscillation.regularity)),
    ];
    let q = report.quasi_period;
    s.push(("quasi_period".into(), fmt_opt(q.map(|q| q.mean))));
    s.push((
        "quasi_period_dispersion".into(),
        fmt_opt(q.map(|q| q.dispersion)),
    ));
    let e = report.envelope;
    s.push(("envelope_exponent".into(), fmt_opt(e.map(|e| e.slope))));
    s.push(("envelope_stderr".into(), fmt_opt(e.map(|e| e.stderr))));
    s
}

/// Renders pairs as a single `key=value key=value ...` line.
pub fn summary_line(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Peak rows `location,height,prominence` preceded by metadata and the
/// report summary as `#` lines.
pub fn write_peak_report<T: Real, W: Write>(
    mut w: W,
    report: &PeakReport<T>,
    meta: &[(String, String)],
) -> Result<()> {
    let mut all = meta.to_vec();
    all.extend(peak_summary(report));
    write_metadata(&mut w, &all)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["location", "height", "prominence"])?;
    for p in &report.peaks {
        out.write_record([fmt(p.location), fmt(p.height), fmt(p.prominence)])?;
    }
    out.flush()?;
    Ok(())
}

/// Flat `key = value` configuration (TOML syntax without tables). Angle keys
/// end in `_deg`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, toml::Value>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() as u64 + 1);
            match line {
                Some(line) => Error::Parse {
                    line,
                    message: e.message().to_string(),
                },
                None => Error::Config(e.message().to_string()),
            }
        })?;
        let mut entries = BTreeMap::new();
        for (k, v) in table {
            if v.is_table() || v.is_array() {
                return Err(Error::Config(format!(
                    "key '{k}': nested values are not supported"
                )));
            }
            entries.insert(k, v);
        }
        Ok(Self { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn set(&mut self, key: &str, value: toml::Value) {
        self.entries.insert(key.to_string(), value);
    }

    /// Setters override any earlier value of `key`.
    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.set(key, toml::Value::Float(value));
    }

    pub fn set_u64(&mut self, key: &str, value: u64) {
        self.set(key, toml::Value::Integer(value as i64));
    }

    pub fn set_bool(&mut self, key: &str, value: bool) {
        self.set(key, toml::Value::Boolean(value));
    }

    pub fn set_str(&mut self, key: &str, value: &str) {
        self.set(key, toml::Value::String(value.to_string()));
    }

    /// Errors on the first key outside `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::Config(format!("unknown config key '{k}'"))),
            None => Ok(()),
        }
    }

    fn type_error(key: &str, want: &str) -> Error {
        Error::Config(format!("key '{key}' must be {want}"))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(Self::type_error(key, "a number")),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(Self::type_error(key, "a non-negative integer")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.u64(key)?
            .map(|v| usize::try_from(v).map_err(|_| Self::type_error(key, "a smaller integer")))
            .transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Self::type_error(key, "true or false")),
        }
    }

    pub fn str(&self, key: &str) -> Result<Option<&str>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Self::type_error(key, "a quoted string")),
        }
    }
}

/// Config keys understood by [`ensemble_config`].
pub const ENSEMBLE_KEYS: &[&str] = &[
    "n_c",
    "n_p",
    "radius_deg",
    "radius_min_deg",
    "radius_max_deg",
    "patch_deg",
    "hard_core",
    "realizations",
    "seed",
    "bins",
    "theta_max_deg",
];

/// Ensemble configuration from defaults overridden by `kv`.
pub fn ensemble_config<T: Real>(kv: &KeyValues) -> Result<DiskEnsembleConfig<T>> {
    let mut cfg = DiskEnsembleConfig::<T>::default();
    if let Some(v) = kv.usize("n_c")? {
        cfg.n_c = v;
    }
    if let Some(v) = kv.usize("n_p")? {
        cfg.n_p = v;
    }
    let (rmin, rmax) = (kv.f64("radius_min_deg")?, kv.f64("radius_max_deg")?);
    cfg.radius = match (kv.f64("radius_deg")?, rmin, rmax) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::Config(
                "give either radius_deg or radius_min_deg/radius_max_deg".into(),
            ))
        }
        (Some(r), None, None) => RadiusSpec::Fixed(deg(r)),
        (None, Some(a), Some(b)) => RadiusSpec::Uniform {
            min: deg(a),
            max: deg(b),
        },
        (None, None, None) => cfg.radius,
        _ => {
            return Err(Error::Config(
                "radius_min_deg and radius_max_deg go together".into(),
            ))
        }
    };
    if let Some(v) = kv.f64("patch_deg")? {
        cfg.patch = deg(v);
    }
    if let Some(v) = kv.bool("hard_core")? {
        cfg.hard_core = v;
    }
    if let Some(v) = kv.usize("realizations")? {
        cfg.n_realizations = v;
    }
    if let Some(v) = kv.u64("seed")? {
        cfg.seed = v;
    }
    let n_bins = kv.usize("bins")?.unwrap_or(cfg.bins.len());
    let theta_max = match kv.f64("theta_max_deg")? {
        Some(v) => deg(v),
        None => T::lit(4.0) * cfg.radius.max(),
    };
    cfg.bins = ThetaBins::linear(n_bins, theta_max)?;
    cfg.validate()?;
    Ok(cfg)
}

fn deg<T: Real>(v: f64) -> T {
    T::lit(v.to_radians())
}

/// Fully resolved ensemble configuration as metadata, angles in degrees.
pub fn ensemble_metadata<T: Real>(cfg: &DiskEnsembleConfig<T>) -> Metadata {
    let mut m: Metadata = vec![
        ("n_c".into(), cfg.n_c.to_string()),
        ("n_p".into(), cfg.n_p.to_string()),
    ];
    match cfg.radius {
        RadiusSpec::Fixed(r) => m.push(("radius_deg".into(), fmt_deg(r))),
        RadiusSpec::Uniform { min, max } => {
            m.push(("radius_min_deg".into(), fmt_deg(min)));
            m.push(("radius_max_deg".into(), fmt_deg(max)));
        }
    }
    m.extend([
        ("patch_deg".into(), fmt_deg(cfg.patch)),
        ("hard_core".into(), cfg.hard_core.to_string()),
        ("realizations".into(), cfg.n_realizations.to_string()),
        ("seed".into(), cfg.seed.to_string()),
        ("bins".into(), cfg.bins.len().to_string()),
        ("theta_max_deg".into(), fmt_deg(cfg.bins.max())),
    ]);
    m
}

/// Model of `kind` with parameters from `kv` (missing keys take defaults).
/// Keys that are not parameters of `kind` are ignored.
pub fn model_config<T: Real>(kind: ModelKind, kv: &KeyValues) -> Result<CorrelationModel<T>> {
    let mut params = Vec::new();
    for &key in kind.param_keys() {
        if let Some(v) = kv.f64(key)? {
            params.push((key, v));
        }
    }
    CorrelationModel::from_params(kind, params)
}

/// Model parameters as metadata.
pub fn model_metadata<T: Real>(model: &CorrelationModel<T>) -> Metadata {
    let mut m = vec![("model".to_string(), model.kind().to_string())];
    m.extend(model.params().into_iter().map(|(k, v)| {
        let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
        (k.to_string(), rounded.to_string())
    }));
    m
}
