//! Run settings gathered from an optional TOML file and command-line flags.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Deserialize;

/// A number of radians, written either plainly or as a multiple of π
/// (`0.2pi`, `pi/2`, `π`).
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase().replace('π', "pi");
    let t = t.replace(' ', "");
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().with_context(|| format!("bad angle '{text}'"));
    };
    let head = t[..pos].trim_end_matches('*');
    let tail = &t[pos + 2..];
    let factor = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().with_context(|| format!("bad angle '{text}'"))?,
    };
    let divisor = match tail {
        "" => 1.0,
        d => d.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).ok_or_else(|| anyhow!("bad angle '{text}'"))?,
    };
    Ok(factor * PI / divisor)
}

/// Comma-separated angles.
pub fn parse_angles(text: &str) -> Result<Vec<f64>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(parse_angle).collect()
}

/// `lo..hi`, `lo..=hi`, or a comma-separated list.
pub fn parse_indices(text: &str) -> Result<Vec<usize>> {
    let t = text.trim();
    if let Some((lo, hi)) = t.split_once("..") {
        let lo: usize = lo.trim().parse().with_context(|| format!("bad range '{text}'"))?;
        let (hi, inclusive) = match hi.strip_prefix('=') {
            Some(h) => (h, true),
            None => (hi, false),
        };
        let hi: usize = hi.trim().parse().with_context(|| format!("bad range '{text}'"))?;
        let end = if inclusive { hi + 1 } else { hi };
        return Ok((lo..end).collect());
    }
    t.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().with_context(|| format!("bad index list '{text}'")))
        .collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Angles {
    One(Scalar),
    Many(Vec<Scalar>),
}

impl Angles {
    fn resolve(&self) -> Result<Vec<f64>> {
        let one = |s: &Scalar| match s {
            Scalar::Number(x) => Ok(vec![*x]),
            Scalar::Text(t) => parse_angles(t),
        };
        match self {
            Angles::One(s) => one(s),
            Angles::Many(v) => Ok(v.iter().map(one).collect::<Result<Vec<_>>>()?.concat()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Indices {
    One(usize),
    Text(String),
    Many(Vec<usize>),
}

impl Indices {
    fn resolve(&self) -> Result<Vec<usize>> {
        match self {
            Indices::One(k) => Ok(vec![*k]),
            Indices::Text(t) => parse_indices(t),
            Indices::Many(v) => Ok(v.clone()),
        }
    }
}

// Aliases keep clap from treating these as repeated flags.
type IndexList = Vec<usize>;
type AngleList = Vec<f64>;

/// Every setting, each optional. The TOML file uses the flag names with
/// `_` in place of `-`.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// TOML file with default values for any of these flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Gate symmetry: none|u1|z2|su2
    #[arg(long)]
    pub symmetry: Option<String>,
    /// Symmetry whose sectors define the asymmetry (defaults to u1 for none)
    #[arg(long)]
    pub measured_symmetry: Option<String>,
    /// Translation mode: iid|t|f|ft
    #[arg(long)]
    pub mode: Option<String>,
    /// Number of qubits (a comma list for scan-theta)
    #[arg(long, value_parser = parse_indices_arg)]
    #[serde(default, deserialize_with = "indices_opt")]
    pub n: Option<IndexList>,
    /// Subsystem qubits, e.g. "0..4" or "0,1,5"
    #[arg(long, value_parser = parse_indices_arg)]
    #[serde(default, deserialize_with = "indices_opt")]
    pub subsystem: Option<IndexList>,
    /// Subsystem sizes for latetime and oracle, e.g. "1..12"
    #[arg(long, value_parser = parse_indices_arg)]
    #[serde(default, deserialize_with = "indices_opt")]
    pub sizes: Option<IndexList>,
    /// Initial state: ferro|neel|domain-wall|random-ferro|random-neel|ghz|staggered-ferro
    #[arg(long)]
    pub init: Option<String>,
    /// Tilt angle(s), e.g. "0.2pi" or "0.2pi,0.5pi"
    #[arg(long, value_parser = parse_angles_arg)]
    #[serde(default, deserialize_with = "angles_opt")]
    pub theta: Option<AngleList>,
    /// Half-width W of uniform random tilts
    #[arg(long)]
    pub tilt_width: Option<f64>,
    #[arg(long)]
    pub tilt_seed: Option<u64>,
    /// Reuse one draw of random tilts for every realization
    #[arg(long)]
    pub freeze_tilts: Option<bool>,
    /// Number of time steps (default 4N)
    #[arg(long)]
    pub depth: Option<usize>,
    /// Realizations
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measure the Rényi-2 asymmetry instead of von Neumann
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub renyi2: Option<bool>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv|json
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Memory bound in bytes
    #[arg(long)]
    pub memory_bound: Option<u64>,
    /// Subsystem fraction a/N for scan-theta
    #[arg(long)]
    pub a_fraction: Option<f64>,
    /// θ grid spacing for scan-theta, e.g. "0.001pi"
    #[arg(long, value_parser = parse_angle_arg)]
    #[serde(default, deserialize_with = "angle_opt")]
    pub resolution: Option<f64>,
}

fn parse_indices_arg(s: &str) -> std::result::Result<IndexList, String> {
    parse_indices(s).map_err(|e| e.to_string())
}

fn parse_angles_arg(s: &str) -> std::result::Result<AngleList, String> {
    parse_angles(s).map_err(|e| e.to_string())
}

fn parse_angle_arg(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn indices_opt<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<usize>>, D::Error> {
    let raw = Option::<Indices>::deserialize(d)?;
    raw.map(|i| i.resolve()).transpose().map_err(serde::de::Error::custom)
}

fn angles_opt<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    let raw = Option::<Angles>::deserialize(d)?;
    raw.map(|a| a.resolve()).transpose().map_err(serde::de::Error::custom)
}

fn angle_opt<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    let raw = Option::<Scalar>::deserialize(d)?;
    raw.map(|s| match s {
        Scalar::Number(x) => Ok(x),
        Scalar::Text(t) => parse_angle(&t),
    })
    .transpose()
    .map_err(serde::de::Error::custom)
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        Settings { config: None, $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid config file")
    }

    /// Flags win over file values.
    pub fn resolve(self) -> Result<Self> {
        let Some(path) = &self.config else { return Ok(self) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        Ok(self.over(file))
    }

    pub fn over(self, base: Settings) -> Settings {
        let top = self;
        overlay!(
            base,
            top,
            symmetry,
            measured_symmetry,
            mode,
            n,
            subsystem,
            sizes,
            init,
            theta,
            tilt_width,
            tilt_seed,
            freeze_tilts,
            depth,
            shots,
            seed,
            renyi2,
            out,
            format,
            workers,
            memory_bound,
            a_fraction,
            resolution
        )
    }

    pub fn single_n(&self) -> Result<usize> {
        match self.n.as_deref() {
            None => Ok(12),
            Some([n]) => Ok(*n),
            Some(_) => bail!("--n takes a single value for this command"),
        }
    }
}
