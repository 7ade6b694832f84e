//! Run configuration: a line-oriented `key = value` document with `[section]` headers.
//!
//! ```text
//! command = fidelity-scan
//!
//! [geometry]
//! kind = two-rings
//! n = 20
//! d = 0.1
//! polarization = tangential
//!
//! [physics]
//! m = 5
//!
//! [scan]
//! gaps = linspace(0.025, 0.3, 12)
//! widths = 0.01, 0.05, 0.2, inf
//! ```
//!
//! Keys given on the command line (`section.key=value`) replace those in the file.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::emfield::DipoleOrientation;
use crate::geometry::{Arrangement, PolarizationScheme};
use crate::transfer::FidelityMeasure;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("command-line override"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(origin: &Origin, key: &str, message: impl Into<String>) -> Self {
        Self { origin: Some(origin.clone()), key: Some(key.to_string()), message: message.into() }
    }

    fn missing(key: &str, why: &str) -> Self {
        Self { origin: None, key: Some(key.to_string()), message: format!("missing required key `{key}` ({why})") }
    }

    pub fn line(&self) -> Option<usize> {
        match self.origin {
            Some(Origin::Line(n)) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(o) => write!(f, "{o}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Parsed<T> = Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    DecayScan,
    Fieldmap,
    Coupling,
    Eta,
    Fidelity,
    FidelityScan,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Spectrum,
        Command::DecayScan,
        Command::Fieldmap,
        Command::Coupling,
        Command::Eta,
        Command::Fidelity,
        Command::FidelityScan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::DecayScan => "decay-scan",
            Command::Fieldmap => "fieldmap",
            Command::Coupling => "coupling",
            Command::Eta => "eta",
            Command::Fidelity => "fidelity",
            Command::FidelityScan => "fidelity-scan",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryKind {
    Ring,
    Chain,
    TwoRings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    SpinWave,
    Packet,
    Site,
    Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Series {
    Ring,
    Chain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayQuantity {
    /// Most subradiant rate at fixed spacing.
    Min,
    /// Brightest rate at fixed radius.
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaneKind {
    Xy,
    Xz,
    Yz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("expected csv or json, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryConfig {
    pub kind: GeometryKind,
    pub n: Option<usize>,
    pub d: Option<f64>,
    pub polarization: PolarizationScheme,
    /// Chain dipole, and the dipole of a `fixed` ring.
    pub dipole: [f64; 3],
    pub arrangement: Arrangement,
    pub gap: Option<f64>,
    pub angular_offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicsConfig {
    pub state: StateKind,
    pub m: Option<i64>,
    pub site: Option<usize>,
    pub mode: usize,
    pub delta_theta: f64,
    pub t_max: Option<f64>,
    pub t_steps: usize,
    pub fidelity: FidelityMeasure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub n_list: Vec<usize>,
    pub lambda_over_d: f64,
    pub series: Vec<Series>,
    pub quantity: DecayQuantity,
    pub radius: Option<f64>,
    pub gaps: Vec<f64>,
    pub widths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub plane: PlaneKind,
    /// Coordinate held fixed by the plane.
    pub offset: f64,
    pub u_min: Option<f64>,
    pub u_max: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub nu: usize,
    pub nv: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Format,
    pub precision: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub scan: ScanConfig,
    pub grid: GridConfig,
    pub output: OutputConfig,
}

const KEYS: &[(&str, &[&str])] = &[
    ("", &["command"]),
    ("geometry", &["kind", "n", "d", "polarization", "dipole", "arrangement", "gap", "angular_offset"]),
    ("physics", &["state", "m", "site", "mode", "delta_theta", "t_max", "t_steps", "fidelity"]),
    ("scan", &["n_list", "lambda_over_d", "series", "quantity", "radius", "gaps", "widths"]),
    ("grid", &["plane", "offset", "u_min", "u_max", "v_min", "v_max", "nu", "nv"]),
    ("output", &["path", "format", "precision"]),
];

fn known(key: &str) -> bool {
    let (section, name) = key.rsplit_once('.').unwrap_or(("", key));
    KEYS.iter().any(|(s, names)| *s == section && names.contains(&name))
}

/// Raw `section.key → (value, origin)` entries, checked against the known key set.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Parsed<Self> {
        let mut raw = RawConfig::default();
        let mut section = String::new();
        for (idx, line) in text.lines().enumerate() {
            let origin = Origin::Line(idx + 1);
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError {
                    origin: Some(origin.clone()),
                    key: None,
                    message: format!("malformed section header `{line}`"),
                })?;
                let name = name.trim();
                if !KEYS.iter().any(|(s, _)| *s == name && !s.is_empty()) {
                    return Err(ConfigError::at(&origin, name, format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                origin: Some(origin.clone()),
                key: None,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            raw.insert(full, value.trim(), origin)?;
        }
        Ok(raw)
    }

    /// Applies a `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Parsed<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError {
            origin: Some(Origin::Override),
            key: None,
            message: format!("override `{assignment}` is not of the form section.key=value"),
        })?;
        self.entries.remove(key.trim());
        self.insert(key.trim().to_string(), value.trim(), Origin::Override)
    }

    fn insert(&mut self, key: String, value: &str, origin: Origin) -> Parsed<()> {
        if !known(&key) {
            return Err(ConfigError::at(&origin, &key, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(ConfigError::at(&origin, &key, format!("`{key}` has no value")));
        }
        if let Some((_, first)) = self.entries.get(&key) {
            return Err(ConfigError::at(&origin, &key, format!("`{key}` already set at {first}")));
        }
        self.entries.insert(key, (value.to_string(), origin));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&(String, Origin)> {
        self.entries.get(key)
    }

    fn field<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Parsed<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((value, origin)) => parse(value).map(Some).map_err(|msg| {
                let name = key.rsplit('.').next().unwrap_or(key);
                ConfigError::at(origin, key, format!("`{name}`: {msg}"))
            }),
        }
    }

    fn origin(&self, key: &str) -> Origin {
        self.get(key).map_or(Origin::Override, |(_, o)| o.clone())
    }

    /// Resolves defaults and validates value ranges.
    pub fn resolve(&self) -> Parsed<RunConfig> {
        let command = self
            .field("command", |s| s.parse::<Command>())?
            .ok_or_else(|| ConfigError::missing("command", "one of spectrum, decay-scan, fieldmap, coupling, eta, fidelity, fidelity-scan"))?;

        let default_kind = match command {
            Command::Coupling | Command::Eta | Command::Fidelity | Command::FidelityScan => GeometryKind::TwoRings,
            _ => GeometryKind::Ring,
        };
        let dipole = self.field("geometry.dipole", parse_vec3)?.unwrap_or([0.0, 0.0, 1.0]);
        let geometry = GeometryConfig {
            kind: self.field("geometry.kind", parse_kind)?.unwrap_or(default_kind),
            n: self.field("geometry.n", positive_int)?,
            d: self.field("geometry.d", positive)?,
            polarization: self.field("geometry.polarization", |s| parse_polarization(s, dipole))?.unwrap_or(PolarizationScheme::Transverse),
            dipole,
            arrangement: self.field("geometry.arrangement", parse_arrangement)?.unwrap_or(Arrangement::SiteSite),
            gap: self.field("geometry.gap", positive)?,
            angular_offset: self.field("geometry.angular_offset", finite)?.unwrap_or(0.0),
        };

        let physics = PhysicsConfig {
            state: self.field("physics.state", parse_state)?.unwrap_or(StateKind::SpinWave),
            m: self.field("physics.m", |s| s.parse::<i64>().map_err(|e| e.to_string()))?,
            site: self.field("physics.site", |s| s.parse::<usize>().map_err(|e| e.to_string()))?,
            mode: self.field("physics.mode", |s| s.parse::<usize>().map_err(|e| e.to_string()))?.unwrap_or(0),
            delta_theta: self.field("physics.delta_theta", positive_or_inf)?.unwrap_or(f64::INFINITY),
            t_max: self.field("physics.t_max", positive)?,
            t_steps: self.field("physics.t_steps", positive_int)?.unwrap_or(2000),
            fidelity: self.field("physics.fidelity", parse_measure)?.unwrap_or_default(),
        };

        let scan = ScanConfig {
            n_list: self.field("scan.n_list", parse_int_list)?.unwrap_or_default(),
            lambda_over_d: self.field("scan.lambda_over_d", positive)?.unwrap_or(3.0),
            series: self.field("scan.series", parse_series)?.unwrap_or_else(|| vec![Series::Ring, Series::Chain]),
            quantity: self.field("scan.quantity", parse_quantity)?.unwrap_or(DecayQuantity::Min),
            radius: self.field("scan.radius", positive)?,
            gaps: self.field("scan.gaps", |s| parse_float_list(s, false))?.unwrap_or_default(),
            widths: self.field("scan.widths", |s| parse_float_list(s, true))?.unwrap_or_default(),
        };

        let grid = GridConfig {
            plane: self.field("grid.plane", parse_plane)?.unwrap_or(PlaneKind::Xy),
            offset: self.field("grid.offset", finite)?.unwrap_or(0.0),
            u_min: self.field("grid.u_min", finite)?,
            u_max: self.field("grid.u_max", finite)?,
            v_min: self.field("grid.v_min", finite)?,
            v_max: self.field("grid.v_max", finite)?,
            nu: self.field("grid.nu", |s| at_least(s, 2))?.unwrap_or(101),
            nv: self.field("grid.nv", |s| at_least(s, 2))?.unwrap_or(101),
        };

        let output = OutputConfig {
            path: self.field("output.path", |s| Ok(s.to_string()))?,
            format: self.field("output.format", |s| s.parse::<Format>())?.unwrap_or(Format::Csv),
            precision: self
                .field("output.precision", |s| match s.parse::<usize>() {
                    Ok(p) if (1..=17).contains(&p) => Ok(p),
                    _ => Err(format!("expected an integer in 1..=17, got `{s}`")),
                })?
                .unwrap_or(12),
        };

        let config = RunConfig { command, geometry, physics, scan, grid, output };
        self.check_requirements(&config)?;
        Ok(config)
    }

    fn check_requirements(&self, c: &RunConfig) -> Parsed<()> {
        let cmd = c.command.name();
        let why = format!("needed by `{cmd}`");
        let g = &c.geometry;
        let needs_geometry = !(c.command == Command::DecayScan);
        if needs_geometry {
            g.n.ok_or_else(|| ConfigError::missing("geometry.n", &why))?;
            g.d.ok_or_else(|| ConfigError::missing("geometry.d", &why))?;
        }
        let two_rings = matches!(c.command, Command::Coupling | Command::Eta | Command::Fidelity | Command::FidelityScan);
        if two_rings && g.kind != GeometryKind::TwoRings {
            return Err(ConfigError::at(&self.origin("geometry.kind"), "geometry.kind", format!("`kind`: `{cmd}` needs two-rings")));
        }
        let gap_scanned = c.command == Command::FidelityScan || (c.command == Command::Eta && !c.scan.gaps.is_empty());
        if two_rings && !gap_scanned {
            g.gap.ok_or_else(|| ConfigError::missing("geometry.gap", &why))?;
        }
        if g.kind == GeometryKind::TwoRings && g.n.is_some_and(|n| n < 2) {
            return Err(ConfigError::at(&self.origin("geometry.n"), "geometry.n", "`n`: each ring needs at least 2 emitters"));
        }
        match c.command {
            Command::Fidelity | Command::FidelityScan => {
                c.physics.m.ok_or_else(|| ConfigError::missing("physics.m", &why))?;
            }
            Command::Fieldmap if matches!(c.physics.state, StateKind::Site) => {
                c.physics.site.ok_or_else(|| ConfigError::missing("physics.site", "needed by state = site"))?;
            }
            _ => {}
        }
        if c.command == Command::DecayScan {
            if c.scan.n_list.is_empty() {
                return Err(ConfigError::missing("scan.n_list", &why));
            }
            if c.scan.quantity == DecayQuantity::Max {
                c.scan.radius.ok_or_else(|| ConfigError::missing("scan.radius", "needed by quantity = max"))?;
            }
        }
        if c.command == Command::FidelityScan {
            if c.scan.gaps.is_empty() {
                return Err(ConfigError::missing("scan.gaps", &why));
            }
            if c.scan.widths.is_empty() {
                return Err(ConfigError::missing("scan.widths", &why));
            }
        }
        for (lo, hi) in [("u_min", "u_max"), ("v_min", "v_max")] {
            let get = |k: &str| self.field(&format!("grid.{k}"), finite).ok().flatten();
            if let (Some(a), Some(b)) = (get(lo), get(hi)) {
                if b <= a {
                    let key = format!("grid.{hi}");
                    return Err(ConfigError::at(&self.origin(&key), &key, format!("`{hi}` must exceed `{lo}`")));
                }
            }
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|_| format!("expected a number, got `{s}`")),
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v.is_finite() { Ok(v) } else { Err(format!("must be finite, got `{s}`")) }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 0.0 { Ok(v) } else { Err(format!("must be positive, got {v}")) }
}

fn positive_or_inf(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 { Ok(v) } else { Err(format!("must be positive, got {v}")) }
}

fn at_least(s: &str, min: usize) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= min => Ok(v),
        _ => Err(format!("expected an integer ≥ {min}, got `{s}`")),
    }
}

fn positive_int(s: &str) -> Result<usize, String> {
    at_least(s, 1)
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

/// `10, 12, 20..30`, ranges inclusive.
fn parse_int_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in split_list(s) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (positive_int(a.trim())?, positive_int(b.trim())?);
            if b < a {
                return Err(format!("empty range `{item}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(positive_int(item)?);
        }
    }
    if out.is_empty() { Err("empty list".into()) } else { Ok(out) }
}

/// Comma-separated values, or `linspace(a, b, n)`.
fn parse_float_list(s: &str, allow_inf: bool) -> Result<Vec<f64>, String> {
    let check = |v: f64| {
        if v > 0.0 && (allow_inf || v.is_finite()) { Ok(v) } else { Err(format!("entries must be positive, got {v}")) }
    };
    if let Some(args) = s.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err("linspace takes (start, stop, count)".into());
        }
        let (a, b) = (finite(parts[0])?, finite(parts[1])?);
        let n = at_least(parts[2], 2)?;
        return (0..n).map(|i| check(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    }
    let out: Vec<f64> = split_list(s).map(|t| parse_f64(t).and_then(check)).collect::<Result<_, _>>()?;
    if out.is_empty() { Err("empty list".into()) } else { Ok(out) }
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = split_list(s).map(finite).collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] if x != 0.0 || y != 0.0 || z != 0.0 => Ok([x, y, z]),
        [_, _, _] => Err("dipole must be nonzero".into()),
        _ => Err(format!("expected three components, got `{s}`")),
    }
}

fn dipole_from(v: [f64; 3]) -> DipoleOrientation {
    DipoleOrientation::real(v[0], v[1], v[2]).expect("validated nonzero")
}

fn parse_polarization(s: &str, dipole: [f64; 3]) -> Result<PolarizationScheme, String> {
    match s {
        "transverse" => Ok(PolarizationScheme::Transverse),
        "tangential" => Ok(PolarizationScheme::Tangential),
        "radial" => Ok(PolarizationScheme::Radial),
        "fixed" => Ok(PolarizationScheme::Fixed(dipole_from(dipole))),
        _ => Err(format!("expected transverse, tangential, radial or fixed, got `{s}`")),
    }
}

fn parse_kind(s: &str) -> Result<GeometryKind, String> {
    match s {
        "ring" => Ok(GeometryKind::Ring),
        "chain" => Ok(GeometryKind::Chain),
        "two-rings" => Ok(GeometryKind::TwoRings),
        _ => Err(format!("expected ring, chain or two-rings, got `{s}`")),
    }
}

fn parse_arrangement(s: &str) -> Result<Arrangement, String> {
    match s {
        "site-site" => Ok(Arrangement::SiteSite),
        "site-edge" => Ok(Arrangement::SiteEdge),
        _ => Err(format!("expected site-site or site-edge, got `{s}`")),
    }
}

fn parse_state(s: &str) -> Result<StateKind, String> {
    match s {
        "spin-wave" => Ok(StateKind::SpinWave),
        "packet" => Ok(StateKind::Packet),
        "site" => Ok(StateKind::Site),
        "mode" => Ok(StateKind::Mode),
        _ => Err(format!("expected spin-wave, packet, site or mode, got `{s}`")),
    }
}

fn parse_measure(s: &str) -> Result<FidelityMeasure, String> {
    match s {
        "modulus" => Ok(FidelityMeasure::Modulus),
        "squared" => Ok(FidelityMeasure::Squared),
        _ => Err(format!("expected modulus or squared, got `{s}`")),
    }
}

fn parse_series(s: &str) -> Result<Vec<Series>, String> {
    let out: Vec<Series> = split_list(s)
        .map(|t| match t {
            "ring" => Ok(Series::Ring),
            "chain" => Ok(Series::Chain),
            _ => Err(format!("expected ring or chain, got `{t}`")),
        })
        .collect::<Result<_, _>>()?;
    if out.is_empty() { Err("empty list".into()) } else { Ok(out) }
}

fn parse_quantity(s: &str) -> Result<DecayQuantity, String> {
    match s {
        "min" => Ok(DecayQuantity::Min),
        "max" => Ok(DecayQuantity::Max),
        _ => Err(format!("expected min or max, got `{s}`")),
    }
}

fn parse_plane(s: &str) -> Result<PlaneKind, String> {
    match s {
        "xy" => Ok(PlaneKind::Xy),
        "xz" => Ok(PlaneKind::Xz),
        "yz" => Ok(PlaneKind::Yz),
        _ => Err(format!("expected xy, xz or yz, got `{s}`")),
    }
}

pub fn parse_config(text: &str) -> Parsed<RunConfig> {
    RawConfig::parse(text)?.resolve()
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Fully resolved document; re-parses to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv(&mut s, "command", self.command.name().into());

        let g = &self.geometry;
        s.push_str("\n[geometry]\n");
        kv(&mut s, "kind", match g.kind {
            GeometryKind::Ring => "ring",
            GeometryKind::Chain => "chain",
            GeometryKind::TwoRings => "two-rings",
        }
        .into());
        if let Some(n) = g.n {
            kv(&mut s, "n", n.to_string());
        }
        if let Some(d) = g.d {
            kv(&mut s, "d", d.to_string());
        }
        kv(&mut s, "polarization", match g.polarization {
            PolarizationScheme::Transverse => "transverse",
            PolarizationScheme::Tangential => "tangential",
            PolarizationScheme::Radial => "radial",
            PolarizationScheme::Fixed(_) => "fixed",
        }
        .into());
        kv(&mut s, "dipole", join(&g.dipole, |v| v.to_string()));
        kv(&mut s, "arrangement", match g.arrangement {
            Arrangement::SiteSite => "site-site",
            Arrangement::SiteEdge => "site-edge",
        }
        .into());
        if let Some(x) = g.gap {
            kv(&mut s, "gap", x.to_string());
        }
        kv(&mut s, "angular_offset", g.angular_offset.to_string());

        let p = &self.physics;
        s.push_str("\n[physics]\n");
        kv(&mut s, "state", match p.state {
            StateKind::SpinWave => "spin-wave",
            StateKind::Packet => "packet",
            StateKind::Site => "site",
            StateKind::Mode => "mode",
        }
        .into());
        if let Some(m) = p.m {
            kv(&mut s, "m", m.to_string());
        }
        if let Some(k) = p.site {
            kv(&mut s, "site", k.to_string());
        }
        kv(&mut s, "mode", p.mode.to_string());
        kv(&mut s, "delta_theta", p.delta_theta.to_string());
        if let Some(t) = p.t_max {
            kv(&mut s, "t_max", t.to_string());
        }
        kv(&mut s, "t_steps", p.t_steps.to_string());
        kv(&mut s, "fidelity", match p.fidelity {
            FidelityMeasure::Modulus => "modulus",
            FidelityMeasure::Squared => "squared",
        }
        .into());

        let sc = &self.scan;
        s.push_str("\n[scan]\n");
        if !sc.n_list.is_empty() {
            kv(&mut s, "n_list", join(&sc.n_list, |n| n.to_string()));
        }
        kv(&mut s, "lambda_over_d", sc.lambda_over_d.to_string());
        kv(&mut s, "series", join(&sc.series, |x| match x {
            Series::Ring => "ring".into(),
            Series::Chain => "chain".into(),
        }));
        kv(&mut s, "quantity", match sc.quantity {
            DecayQuantity::Min => "min",
            DecayQuantity::Max => "max",
        }
        .into());
        if let Some(r) = sc.radius {
            kv(&mut s, "radius", r.to_string());
        }
        if !sc.gaps.is_empty() {
            kv(&mut s, "gaps", join(&sc.gaps, |v| v.to_string()));
        }
        if !sc.widths.is_empty() {
            kv(&mut s, "widths", join(&sc.widths, |v| v.to_string()));
        }

        let gr = &self.grid;
        s.push_str("\n[grid]\n");
        kv(&mut s, "plane", match gr.plane {
            PlaneKind::Xy => "xy",
            PlaneKind::Xz => "xz",
            PlaneKind::Yz => "yz",
        }
        .into());
        kv(&mut s, "offset", gr.offset.to_string());
        for (k, v) in [("u_min", gr.u_min), ("u_max", gr.u_max), ("v_min", gr.v_min), ("v_max", gr.v_max)] {
            if let Some(v) = v {
                kv(&mut s, k, v.to_string());
            }
        }
        kv(&mut s, "nu", gr.nu.to_string());
        kv(&mut s, "nv", gr.nv.to_string());

        let o = &self.output;
        s.push_str("\n[output]\n");
        if let Some(path) = &o.path {
            kv(&mut s, "path", path.clone());
        }
        kv(&mut s, "format", match o.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
        .into());
        kv(&mut s, "precision", o.precision.to_string());
        s
    }

    pub fn chain_dipole(&self) -> DipoleOrientation {
        dipole_from(self.geometry.dipole)
    }
}
