//! Frequency grids, operating points, frozen FRF datasets of the plant's
//! coprime factors, and per-channel weighting filters.
//!
//! Two interchange formats are supported for datasets:
//!
//! * CSV with the fixed column order `omega_rad_s,p,re_N,im_N,re_D,im_D`,
//!   grouped by operating point with strictly increasing frequency inside
//!   each group. An optional first line `# domain=discrete,Ts=0.005,range=0:1`
//!   carries the metadata the columns cannot.
//! * JSON `{grid:{domain,Ts,omegas[]}, points[], range, samples:{N[[..]],D[[..]]}}`
//!   where `N[k][j]` is the `[re, im]` sample at frequency `k`, point `j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

const NYQUIST_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "lowercase")]
pub enum Domain {
    Continuous,
    Discrete {
        #[serde(rename = "Ts")]
        ts: f64,
    },
}

impl Domain {
    pub fn sample_time(&self) -> Option<f64> {
        match self {
            Domain::Continuous => None,
            Domain::Discrete { ts } => Some(*ts),
        }
    }

    /// `i omega` in continuous time, `exp(i omega Ts)` in discrete time.
    pub fn lambda(&self, omega: f64) -> Complex64 {
        match self {
            Domain::Continuous => Complex64::new(0.0, omega),
            Domain::Discrete { ts } => Complex64::from_polar(1.0, omega * ts),
        }
    }

    /// Whether `lambda` lies strictly inside the stability region.
    pub fn is_stable_root(&self, lambda: Complex64) -> bool {
        match self {
            Domain::Continuous => lambda.re < 0.0,
            Domain::Discrete { .. } => lambda.norm() < 1.0,
        }
    }

    pub fn same_as(&self, other: &Domain) -> bool {
        match (self, other) {
            (Domain::Continuous, Domain::Continuous) => true,
            (Domain::Discrete { ts: a }, Domain::Discrete { ts: b }) => {
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
            }
            _ => false,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Continuous => write!(f, "continuous"),
            Domain::Discrete { ts } => write!(f, "discrete(Ts={ts})"),
        }
    }
}

/// Strictly increasing, non-negative angular frequencies (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
    domain: Domain,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>, domain: Domain) -> Result<Self> {
        if let Domain::Discrete { ts } = domain {
            if !(ts > 0.0 && ts.is_finite()) {
                return Err(Error::DomainMismatch(format!("sample time {ts} must be positive")));
            }
        }
        for (i, w) in omegas.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::NonMonotoneGrid { index: i });
            }
            if i > 0 && *w <= omegas[i - 1] {
                return Err(Error::NonMonotoneGrid { index: i });
            }
        }
        if let Domain::Discrete { ts } = domain {
            let nyquist = PI / ts;
            if let Some(&last) = omegas.last() {
                if last > nyquist * (1.0 + NYQUIST_SLACK) {
                    return Err(Error::AboveNyquist {
                        omega: last,
                        nyquist,
                    });
                }
            }
        }
        Ok(FrequencyGrid { omegas, domain })
    }

    /// `n` logarithmically spaced frequencies from `lo` to `hi`, both included.
    pub fn logspace(lo: f64, hi: f64, n: usize, domain: Domain) -> Result<Self> {
        let omegas = match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => {
                let (a, b) = (lo.log10(), hi.log10());
                let step = (b - a) / (n - 1) as f64;
                let mut v: Vec<f64> = (0..n).map(|k| 10f64.powf(a + step * k as f64)).collect();
                v[0] = lo;
                v[n - 1] = hi;
                v
            }
        };
        Self::new(omegas, domain)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn nyquist(&self) -> Option<f64> {
        self.domain.sample_time().map(|ts| PI / ts)
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        self.omegas.iter().map(|w| self.domain.lambda(*w)).collect()
    }
}

/// Scalar scheduling values at which frozen data was taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointSet {
    points: Vec<f64>,
    range: (f64, f64),
}

impl OperatingPointSet {
    pub fn new(points: Vec<f64>, range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = range;
        if !(lo <= hi) {
            return Err(Error::InvalidPoints(format!("empty range [{lo}, {hi}]")));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() || *p < lo || *p > hi {
                return Err(Error::InvalidPoints(format!("point {p} outside [{lo}, {hi}]")));
            }
            if points[..i].contains(p) {
                return Err(Error::InvalidPoints(format!("duplicate point {p}")));
            }
        }
        Ok(OperatingPointSet { points, range })
    }

    /// `n` equidistant points spanning the range, endpoints included.
    pub fn equidistant(n: usize, range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = range;
        let points = match n {
            0 => Vec::new(),
            1 => vec![hi],
            _ => (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect(),
        };
        Self::new(points, range)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.range.0 && p <= self.range.1
    }

    pub fn index_of(&self, p: f64) -> Option<usize> {
        self.points.iter().position(|q| *q == p)
    }
}

/// Frozen FRF samples of the plant factors `N_G`, `D_G` on grid x points.
#[derive(Debug, Clone, PartialEq)]
pub struct FrfDataset {
    grid: FrequencyGrid,
    points: OperatingPointSet,
    // freq-major: index k * n_points + j
    n: Vec<Complex64>,
    d: Vec<Complex64>,
}

impl FrfDataset {
    /// `n[k][j]`, `d[k][j]` are the samples at frequency `k` and point `j`.
    pub fn new(
        grid: FrequencyGrid,
        points: OperatingPointSet,
        n: Vec<Vec<Complex64>>,
        d: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let expected = (grid.len(), points.len());
        let flat = |rows: Vec<Vec<Complex64>>| -> Result<Vec<Complex64>> {
            let got = (rows.len(), rows.first().map_or(0, |r| r.len()));
            if rows.len() != expected.0 || rows.iter().any(|r| r.len() != expected.1) {
                return Err(Error::ShapeMismatch { got, expected });
            }
            Ok(rows.into_iter().flatten().collect())
        };
        let n = flat(n)?;
        let d = flat(d)?;
        let ds = FrfDataset { grid, points, n, d };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        for k in 0..self.grid.len() {
            for j in 0..self.points.len() {
                let (n, d) = (self.n(k, j), self.d(k, j));
                if !(n.re.is_finite() && n.im.is_finite() && d.re.is_finite() && d.im.is_finite()) {
                    return Err(Error::NanSample {
                        row: j * self.grid.len() + k,
                    });
                }
                if n.norm() + d.norm() <= 0.0 {
                    return Err(Error::NotCoprime {
                        omega: self.grid.omegas[k],
                        p: self.points.points[j],
                    });
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn points(&self) -> &OperatingPointSet {
        &self.points
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grid.len(), self.points.len())
    }

    pub fn n(&self, k: usize, j: usize) -> Complex64 {
        self.n[k * self.points.len() + j]
    }

    pub fn d(&self, k: usize, j: usize) -> Complex64 {
        self.d[k * self.points.len() + j]
    }

    /// `(N_G, D_G)` over the grid at operating point `j`.
    pub fn column(&self, j: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        (0..self.grid.len())
            .map(|k| (self.n(k, j), self.d(k, j)))
            .unzip()
    }

    pub fn save(&self, path: &Path, format: DataFormat) -> Result<()> {
        let text = match format {
            DataFormat::Csv => self.to_csv_string()?,
            DataFormat::Json => serde_json::to_string_pretty(&self.to_file())?,
        };
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&metadata_line(self.grid.domain, self.points.range));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for j in 0..self.points.len() {
            for k in 0..self.grid.len() {
                let (n, d) = (self.n(k, j), self.d(k, j));
                w.write_record(&[
                    self.grid.omegas[k].to_string(),
                    self.points.points[j].to_string(),
                    n.re.to_string(),
                    n.im.to_string(),
                    d.re.to_string(),
                    d.im.to_string(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?);
        Ok(out)
    }

    fn to_file(&self) -> DatasetFile {
        let rows = |v: &Vec<Complex64>| {
            v.chunks(self.points.len().max(1))
                .map(|r| r.to_vec())
                .collect::<Vec<_>>()
        };
        DatasetFile {
            grid: GridFile {
                domain: self.grid.domain,
                omegas: self.grid.omegas.clone(),
            },
            points: self.points.points.clone(),
            range: Some(self.points.range),
            samples: SamplesFile {
                n: if self.points.is_empty() { vec![vec![]; self.grid.len()] } else { rows(&self.n) },
                d: if self.points.is_empty() { vec![vec![]; self.grid.len()] } else { rows(&self.d) },
            },
        }
    }
}

const CSV_HEADER: [&str; 6] = ["omega_rad_s", "p", "re_N", "im_N", "re_D", "im_D"];

fn metadata_line(domain: Domain, range: (f64, f64)) -> String {
    match domain {
        Domain::Continuous => format!("# domain=continuous,range={}:{}\n", range.0, range.1),
        Domain::Discrete { ts } => {
            format!("# domain=discrete,Ts={ts},range={}:{}\n", range.0, range.1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "csv" => Ok(DataFormat::Csv),
            Some(ext) if ext == "json" => Ok(DataFormat::Json),
            _ => Err(Error::Parse(format!(
                "cannot infer data format from {}",
                path.display()
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    #[serde(flatten)]
    domain: Domain,
    omegas: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SamplesFile {
    #[serde(rename = "N")]
    n: Vec<Vec<Complex64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<Complex64>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    grid: GridFile,
    points: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<(f64, f64)>,
    samples: SamplesFile,
}

fn span(points: &[f64]) -> (f64, f64) {
    points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(*p), hi.max(*p)))
}

pub fn load_frf_dataset(path: &Path, format: DataFormat) -> Result<FrfDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        DataFormat::Csv => parse_csv(&text),
        DataFormat::Json => parse_json(&text),
    }
}

pub fn parse_json(text: &str) -> Result<FrfDataset> {
    let file: DatasetFile = serde_json::from_str(text)?;
    for (row, (rn, rd)) in file.samples.n.iter().zip(&file.samples.d).enumerate() {
        if rn.iter().chain(rd).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NanSample { row });
        }
    }
    let range = file.range.unwrap_or_else(|| span(&file.points));
    let grid = FrequencyGrid::new(file.grid.omegas, file.grid.domain)?;
    let points = OperatingPointSet::new(file.points, range)?;
    FrfDataset::new(grid, points, file.samples.n, file.samples.d)
}

fn parse_metadata(line: &str) -> Result<(Domain, Option<(f64, f64)>)> {
    let mut domain = Domain::Continuous;
    let mut ts = None;
    let mut discrete = false;
    let mut range = None;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
    for field in line.trim_start_matches('#').split(',') {
        let Some((key, value)) = field.split_once('=') else { continue };
        match key.trim() {
            "domain" => discrete = value.trim() == "discrete",
            "Ts" => ts = Some(num(value)?),
            "range" => {
                let (a, b) = value
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad range `{value}`")))?;
                range = Some((num(a)?, num(b)?));
            }
            _ => {}
        }
    }
    if discrete {
        let ts = ts.ok_or_else(|| Error::Parse("discrete domain without Ts".into()))?;
        domain = Domain::Discrete { ts };
    }
    Ok((domain, range))
}

pub fn parse_csv(text: &str) -> Result<FrfDataset> {
    let (domain, range) = match text.lines().next() {
        Some(first) if first.starts_with('#') => parse_metadata(first)?,
        _ => (Domain::Continuous, None),
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    // groups keyed by p in order of first appearance
    let mut groups: Vec<(f64, Vec<(f64, Complex64, Complex64)>)> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 6 {
            return Err(Error::Parse(format!("row {row}: expected 6 columns, got {}", record.len())));
        }
        let mut v = [0.0; 6];
        for (slot, field) in v.iter_mut().zip(record.iter()) {
            *slot = field
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {row}: `{field}`: {e}")))?;
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NanSample { row });
        }
        let [omega, p, nr, ni, dr, di] = v;
        let sample = (omega, Complex64::new(nr, ni), Complex64::new(dr, di));
        match groups.last_mut() {
            Some((q, rows)) if *q == p => {
                if omega <= rows.last().map_or(f64::NEG_INFINITY, |r| r.0) {
                    return Err(Error::NonMonotoneGrid { index: rows.len() });
                }
                rows.push(sample);
            }
            _ => {
                if groups.iter().any(|(q, _)| *q == p) {
                    return Err(Error::Parse(format!("rows for p={p} are not contiguous")));
                }
                groups.push((p, vec![sample]));
            }
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut omegas: Vec<f64> = groups.iter().flat_map(|(_, rows)| rows.iter().map(|r| r.0)).collect();
    omegas.sort_by(f64::total_cmp);
    omegas.dedup();
    let mut by_point: Vec<BTreeMap<u64, (Complex64, Complex64)>> = Vec::new();
    for (p, rows) in &groups {
        let map: BTreeMap<u64, _> = rows.iter().map(|r| (r.0.to_bits(), (r.1, r.2))).collect();
        if let Some(w) = omegas.iter().find(|w| !map.contains_key(&w.to_bits())) {
            return Err(Error::MissingCell { omega: *w, p: *p });
        }
        by_point.push(map);
    }

    let point_values: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let range = range.unwrap_or_else(|| span(&point_values));
    let grid = FrequencyGrid::new(omegas.clone(), domain)?;
    let points = OperatingPointSet::new(point_values, range)?;
    let (n, d): (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) = omegas
        .iter()
        .map(|w| by_point.iter().map(|m| m[&w.to_bits()]).unzip())
        .unzip();
    FrfDataset::new(grid, points, n, d)
}

/// The four closed-loop channels of the 1-DOF loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    S,
    SG,
    KS,
    T,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::S, Channel::SG, Channel::KS, Channel::T];

    pub fn name(&self) -> &'static str {
        match self {
            Channel::S => "S",
            Channel::SG => "SG",
            Channel::KS => "KS",
            Channel::T => "T",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S" => Ok(Channel::S),
            "SG" => Ok(Channel::SG),
            "KS" => Ok(Channel::KS),
            "T" => Ok(Channel::T),
            _ => Err(Error::UnknownChannel(s.to_string())),
        }
    }
}

/// A weighting filter for one channel.
///
/// Discrete rationals use ascending powers of `z^-1`; continuous rationals
/// ascending powers of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Weight {
    Constant { value: f64 },
    Discrete { num: Vec<f64>, den: Vec<f64> },
    Continuous { num: Vec<f64>, den: Vec<f64> },
    Samples { values: Vec<Complex64> },
}

impl Weight {
    fn validate(&self, channel: Channel) -> Result<()> {
        let bad = |reason: String| Error::InvalidWeight {
            channel: channel.to_string(),
            reason,
        };
        match self {
            Weight::Constant { value } if !value.is_finite() => Err(bad("non-finite gain".into())),
            Weight::Constant { .. } => Ok(()),
            Weight::Samples { values } => {
                if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    Err(bad("non-finite sample".into()))
                } else {
                    Ok(())
                }
            }
            Weight::Discrete { num, den } => {
                if den.first().copied().unwrap_or(0.0) == 0.0 {
                    return Err(bad("leading denominator coefficient must be nonzero".into()));
                }
                if num.iter().chain(den).any(|c| !c.is_finite()) {
                    return Err(bad("non-finite coefficient".into()));
                }
                for r in poly::roots_in_z_of_inverse_poly(den) {
                    if r.norm() >= 1.0 {
                        return Err(bad(format!("pole {r} outside the open unit disk")));
                    }
                }
                Ok(())
            }
            Weight::Continuous { num, den } => {
                let deg = |c: &[f64]| c.iter().rposition(|x| *x != 0.0);
                match (deg(num), deg(den)) {
                    (_, None) => return Err(bad("zero denominator".into())),
                    (Some(a), Some(b)) if a > b => return Err(bad("improper weight".into())),
                    _ => {}
                }
                let desc: Vec<f64> = den.iter().rev().copied().collect();
                for r in poly::roots_descending(&desc) {
                    if r.re >= 0.0 {
                        return Err(bad(format!("pole {r} not in the open left half-plane")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Frequency response on `grid`.
    pub fn frf(&self, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
        match self {
            Weight::Constant { value } => Ok(vec![Complex64::new(*value, 0.0); grid.len()]),
            Weight::Samples { values } => {
                if values.len() != grid.len() {
                    return Err(Error::ShapeMismatch {
                        got: (values.len(), 1),
                        expected: (grid.len(), 1),
                    });
                }
                Ok(values.clone())
            }
            Weight::Discrete { num, den } => {
                if !matches!(grid.domain(), Domain::Discrete { .. }) {
                    return Err(Error::DomainMismatch(
                        "discrete weight on a continuous grid".into(),
                    ));
                }
                Ok(grid
                    .lambdas()
                    .into_iter()
                    .map(|z| {
                        let zi = z.inv();
                        poly::eval_ascending(num, zi) / poly::eval_ascending(den, zi)
                    })
                    .collect())
            }
            Weight::Continuous { num, den } => {
                if grid.domain() != Domain::Continuous {
                    return Err(Error::DomainMismatch(
                        "continuous weight on a discrete grid".into(),
                    ));
                }
                Ok(grid
                    .lambdas()
                    .into_iter()
                    .map(|s| poly::eval_ascending(num, s) / poly::eval_ascending(den, s))
                    .collect())
            }
        }
    }

    /// Bilinear (Tustin) image of the first-order continuous filter
    /// `(b1 s + b0) / (a1 s + a0)`.
    pub fn tustin_first_order(b1: f64, b0: f64, a1: f64, a0: f64, ts: f64) -> Weight {
        let c = 2.0 / ts;
        let num = [b1 * c + b0, b0 - b1 * c];
        let den = [a1 * c + a0, a0 - a1 * c];
        let scale = den[0];
        Weight::Discrete {
            num: num.iter().map(|x| x / scale).collect(),
            den: den.iter().map(|x| x / scale).collect(),
        }
    }
}

/// One optional weight per four-block channel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightSet {
    channels: BTreeMap<Channel, Weight>,
}

impl WeightSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, channel: Channel, weight: Weight) -> Result<Self> {
        self.insert(channel, weight)?;
        Ok(self)
    }

    pub fn insert(&mut self, channel: Channel, weight: Weight) -> Result<()> {
        weight.validate(channel)?;
        self.channels.insert(channel, weight);
        Ok(())
    }

    pub fn get(&self, channel: Channel) -> Option<&Weight> {
        self.channels.get(&channel)
    }

    pub fn channels(&self) -> impl Iterator<Item = Channel> + '_ {
        self.channels.keys().copied()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: WeightSet = serde_json::from_str(text)?;
        let mut set = WeightSet::new();
        for (c, w) in raw.channels {
            set.insert(c, w)?;
        }
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// `W(e^{i omega Ts})` or `W(i omega)` for every grid frequency.
pub fn weight_frf(
    weights: &WeightSet,
    channel: Channel,
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    weights
        .get(channel)
        .ok_or_else(|| Error::UnknownChannel(channel.to_string()))?
        .frf(grid)
}
