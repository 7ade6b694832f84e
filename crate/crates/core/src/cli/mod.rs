//! Command-line front end.
//!
//! `nanoring [COMMAND] --config run.cfg [--set section.key=value ...]`. Every
//! command writes one table, preceded by the tool version, a units note and the
//! fully resolved configuration.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::emfield::Point3;
use crate::error::Error;
use crate::fieldmap::{intensity_map, GridSpec, Plane};
use crate::geometry::{build_chain, build_ring, build_two_rings, EmitterArray, TwoRingConfig};
use crate::spectrum::{
    assemble_heff, brightest_mode_scan, classify_modes, eigenmodes, light_line_threshold, min_decay_scan,
    spin_wave_state, ExcitationState, ScanGeometry,
};
use crate::transfer::{
    default_time_grid, edge_momentum, eta_distance_scan, eta_for_system, farthest_site, fidelity_scan,
    fidelity_trace, gaussian_packet, ring_ring_coupling, FidelityScanSpec, PacketSpec, TimeGrid,
};
pub use config::{parse_config, Command, ConfigError, RawConfig, RunConfig};
use config::{DecayQuantity, GeometryKind, PlaneKind, Series, StateKind};
use output::{Cell, Table};

#[derive(Debug, Parser)]
#[command(name = "nanoring", version, about = "Collective modes and excitation transfer in emitter rings")]
pub struct Args {
    /// spectrum, decay-scan, fieldmap, coupling, eta, fidelity or fidelity-scan; overrides `command` in the file.
    pub command: Option<String>,
    /// Configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Worker threads for scans and grids.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Replace a configuration value, e.g. `--set geometry.n=12`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Compute(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(Error::InvalidArgument(_) | Error::Unsupported(_)) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = Map::new();
        let (kind, message) = match self {
            CliError::Config(e) => {
                if let Some(line) = e.line() {
                    v.insert("line".into(), json!(line));
                }
                if let Some(key) = &e.key {
                    v.insert("key".into(), json!(key));
                }
                ("config", e.to_string())
            }
            CliError::Compute(e @ (Error::InvalidArgument(_) | Error::Unsupported(_))) => ("config", e.to_string()),
            CliError::Compute(e) => ("numeric", e.to_string()),
            CliError::Io(m) => ("io", m.clone()),
        };
        v.insert("error".into(), json!(kind));
        v.insert("message".into(), json!(message));
        v.insert("exit_code".into(), json!(self.exit_code()));
        Value::Object(v)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs, writes the result and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn execute(args: &Args) -> CliResult<()> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut raw = RawConfig::parse(&text)?;
    if let Some(c) = &args.command {
        raw.set(&format!("command={c}"))?;
    }
    if let Some(f) = &args.format {
        raw.set(&format!("output.format={f}"))?;
    }
    if let Some(p) = &args.out {
        raw.set(&format!("output.path={}", p.display()))?;
    }
    for s in &args.overrides {
        raw.set(s)?;
    }
    let config = raw.resolve()?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config(ConfigError {
                origin: Some(config::Origin::Override),
                key: Some("threads".into()),
                message: "`threads` must be at least 1".into(),
            }));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::warn!("thread pool already initialised; --threads ignored");
        }
    }
    let document = run(&config)?;
    match &config.output.path {
        Some(path) => std::fs::write(path, document).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        None => {
            print!("{document}");
            Ok(())
        }
    }
}

/// Runs `config` and renders the output document.
pub fn run(config: &RunConfig) -> CliResult<String> {
    let table = match config.command {
        Command::Spectrum => spectrum(config)?,
        Command::DecayScan => decay_scan(config)?,
        Command::Fieldmap => fieldmap(config)?,
        Command::Coupling => coupling(config)?,
        Command::Eta => eta(config)?,
        Command::Fidelity => fidelity(config)?,
        Command::FidelityScan => fidelity_scan_table(config)?,
    };
    // the destination does not affect results and is left out of the echoed config
    let mut echoed = config.clone();
    echoed.output.path = None;
    Ok(output::render(&table, &echoed))
}

fn geometry_values(config: &RunConfig) -> (usize, f64) {
    let g = &config.geometry;
    (g.n.expect("checked at resolve"), g.d.expect("checked at resolve"))
}

fn two_ring_config(config: &RunConfig, gap: f64) -> TwoRingConfig {
    let (n, d) = geometry_values(config);
    TwoRingConfig {
        arrangement: config.geometry.arrangement,
        gap,
        n,
        spacing: d,
        polarization: config.geometry.polarization,
    }
}

fn build_array(config: &RunConfig) -> CliResult<EmitterArray> {
    let (n, d) = geometry_values(config);
    let g = &config.geometry;
    Ok(match g.kind {
        GeometryKind::Ring => build_ring(n, d, g.polarization, Point3::zeros(), g.angular_offset)?,
        GeometryKind::Chain => build_chain(n, d, config.chain_dipole())?,
        GeometryKind::TwoRings => {
            let gap = g.gap.ok_or_else(|| ConfigError {
                origin: None,
                key: Some("geometry.gap".into()),
                message: "missing required key `geometry.gap` (needed by two-rings)".into(),
            })?;
            build_two_rings(&two_ring_config(config, gap))?
        }
    })
}

fn array_hash(array: &EmitterArray) -> String {
    let mut h = Sha256::new();
    for (r, p) in array.positions().iter().zip(array.dipoles()) {
        for x in r.iter() {
            h.update(x.to_le_bytes());
        }
        for c in p.vector().iter() {
            h.update(c.re.to_le_bytes());
            h.update(c.im.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn spectrum(config: &RunConfig) -> CliResult<Table> {
    let array = build_array(config)?;
    let mut spec = eigenmodes(&assemble_heff(&array)?)?;
    if config.geometry.kind == GeometryKind::Ring && config.geometry.polarization.is_symmetric() {
        spec = classify_modes(&spec, &array, 0)?;
    }
    let mut t = Table::new(vec!["index", "m_label", "J_over_Gamma0", "Gamma_over_Gamma0"]);
    for k in 0..spec.len() {
        let label = match spec.labels().map(|l| l[k]) {
            Some(l) if l.is_confident() => Cell::Int(l.m),
            _ => Cell::Text(String::new()),
        };
        t.push(vec![k.into(), label, spec.shift(k).into(), spec.decay_rate(k).into()]);
    }
    let digits = config.output.precision;
    let round = |v: f64| output::format_float(v, digits).parse::<f64>().unwrap_or(v);
    let vectors: Vec<Value> = (0..spec.len())
        .map(|k| {
            let v = spec.mode(k);
            Value::Array(v.amplitudes().iter().flat_map(|c| [json!(round(c.re)), json!(round(c.im))]).collect())
        })
        .collect();
    t.extra.insert("eigenvectors".into(), Value::Array(vectors));
    t.meta.insert("modes".into(), json!(spec.len()));
    t.meta.insert("array_sha256".into(), json!(array_hash(&array)));
    Ok(t)
}

fn decay_scan(config: &RunConfig) -> CliResult<Table> {
    let s = &config.scan;
    let mut t = Table::new(vec!["series", "n", "Gamma_over_Gamma0"]);
    match s.quantity {
        DecayQuantity::Min => {
            for series in &s.series {
                let (name, geom) = match series {
                    Series::Ring => ("ring", ScanGeometry::Ring(config.geometry.polarization)),
                    Series::Chain => ("chain", ScanGeometry::Chain(config.chain_dipole())),
                };
                for p in min_decay_scan(geom, &s.n_list, s.lambda_over_d)? {
                    t.push(vec![name.into(), p.n.into(), p.rate.into()]);
                }
            }
            t.meta.insert("quantity".into(), json!("most subradiant decay rate at fixed spacing"));
            t.meta.insert("lambda_over_d".into(), json!(s.lambda_over_d));
        }
        DecayQuantity::Max => {
            if s.series.contains(&Series::Chain) {
                return Err(Error::Unsupported("quantity = max is defined for rings only; set series = ring".into()).into());
            }
            let radius = s.radius.expect("checked at resolve");
            for p in brightest_mode_scan(config.geometry.polarization, radius, &s.n_list)? {
                t.push(vec!["ring".into(), p.n.into(), p.rate.into()]);
            }
            t.meta.insert("quantity".into(), json!("brightest decay rate at fixed radius"));
            t.meta.insert("radius".into(), json!(radius));
        }
    }
    Ok(t)
}

fn fieldmap_state(config: &RunConfig, array: &EmitterArray) -> CliResult<(ExcitationState, String)> {
    let p = &config.physics;
    let m = p.m.unwrap_or(0);
    Ok(match p.state {
        StateKind::SpinWave => (spin_wave_state(array, 0, m)?, format!("spin wave m = {m} on ring 1")),
        StateKind::Packet => {
            let site = p.site.unwrap_or(0);
            (
                gaussian_packet(array, 0, site, m, p.delta_theta)?,
                format!("gaussian packet m = {m}, site {site}, delta_theta = {} on ring 1", p.delta_theta),
            )
        }
        StateKind::Site => {
            let site = p.site.expect("checked at resolve");
            (ExcitationState::site(array.len(), site)?, format!("single excitation on emitter {site}"))
        }
        StateKind::Mode => {
            let spec = eigenmodes(&assemble_heff(array)?)?;
            if p.mode >= spec.len() {
                return Err(Error::InvalidArgument(format!("mode {} out of range ({} modes)", p.mode, spec.len())).into());
            }
            (spec.mode(p.mode), format!("eigenmode {} (sorted by shift, then rate)", p.mode))
        }
    })
}

fn default_extent(array: &EmitterArray, plane: PlaneKind) -> ((f64, f64), (f64, f64)) {
    let n = array.len() as f64;
    let centroid = array.positions().iter().fold(Point3::zeros(), |a, r| a + r) / n;
    let spread = array.positions().iter().map(|r| (r - centroid).norm()).fold(0.0, f64::max);
    let half = (1.5 * spread).max(0.5);
    let (cu, cv) = match plane {
        PlaneKind::Xy => (centroid.x, centroid.y),
        PlaneKind::Xz => (centroid.x, centroid.z),
        PlaneKind::Yz => (centroid.y, centroid.z),
    };
    ((cu - half, cu + half), (cv - half, cv + half))
}

fn fieldmap(config: &RunConfig) -> CliResult<Table> {
    let array = build_array(config)?;
    let (state, description) = fieldmap_state(config, &array)?;
    let gc = &config.grid;
    let ((u0, u1), (v0, v1)) = default_extent(&array, gc.plane);
    let u_range = (gc.u_min.unwrap_or(u0), gc.u_max.unwrap_or(u1));
    let v_range = (gc.v_min.unwrap_or(v0), gc.v_max.unwrap_or(v1));
    let plane = match gc.plane {
        PlaneKind::Xy => Plane::Xy { z: gc.offset },
        PlaneKind::Xz => Plane::Xz { y: gc.offset },
        PlaneKind::Yz => Plane::Yz { x: gc.offset },
    };
    let grid = GridSpec { plane, u_range, v_range, resolution: (gc.nu, gc.nv) };
    let map = intensity_map(&array, &state, &grid)?;
    let mut t = Table::new(vec!["x", "y", "z", "intensity", "masked"]);
    for (i, p) in map.points().enumerate() {
        t.push(vec![p.x.into(), p.y.into(), p.z.into(), map.values[i].into(), map.mask[i].into()]);
    }
    let plane_name = match gc.plane {
        PlaneKind::Xy => "xy",
        PlaneKind::Xz => "xz",
        PlaneKind::Yz => "yz",
    };
    t.meta.insert(
        "grid".into(),
        json!({
            "plane": plane_name,
            "offset": gc.offset,
            "u_range": [u_range.0, u_range.1],
            "v_range": [v_range.0, v_range.1],
            "resolution": [gc.nu, gc.nv],
            "order": "row-major, u fastest",
        }),
    );
    t.meta.insert("state".into(), json!(description));
    t.meta.insert("mask_radius".into(), json!(map.mask_radius));
    t.meta.insert("array_sha256".into(), json!(array_hash(&array)));
    Ok(t)
}

fn light_line(config: &RunConfig) -> f64 {
    let (n, d) = geometry_values(config);
    light_line_threshold(n, d)
}

fn coupling(config: &RunConfig) -> CliResult<Table> {
    let array = build_array(config)?;
    let c = ring_ring_coupling(&array)?;
    let mut t = Table::new(vec!["m1", "m2", "re_lambda", "im_lambda", "J", "Gamma"]);
    for &m1 in c.m_values() {
        for &m2 in c.m_values() {
            let l = c.lambda(m1, m2);
            t.push(vec![m1.into(), m2.into(), l.re.into(), l.im.into(), c.j(m1, m2).into(), c.gamma(m1, m2).into()]);
        }
    }
    t.meta.insert("light_line".into(), json!(light_line(config)));
    Ok(t)
}

fn eta(config: &RunConfig) -> CliResult<Table> {
    let m_star = light_line(config);
    if !config.scan.gaps.is_empty() {
        let base = two_ring_config(config, config.scan.gaps[0]);
        let mut t = Table::new(vec!["gap", "eta_max"]);
        for p in eta_distance_scan(&base, &config.scan.gaps)? {
            t.push(vec![p.gap.into(), p.eta.into()]);
        }
        let m = edge_momentum(base.n);
        t.meta.insert("modes".into(), json!({ "m1": m, "m2": m }));
        return Ok(t);
    }
    let array = build_array(config)?;
    let (c, eta) = eta_for_system(&array)?;
    let mut t = Table::new(vec!["m1", "m2", "J", "Gamma", "eta", "beyond_light_line"]);
    for &m1 in c.m_values() {
        for &m2 in c.m_values() {
            let beyond = (m1.abs() as f64) > m_star && (m2.abs() as f64) > m_star;
            t.push(vec![m1.into(), m2.into(), c.j(m1, m2).into(), c.gamma(m1, m2).into(), eta.get(m1, m2).into(), beyond.into()]);
        }
    }
    t.meta.insert("light_line".into(), json!(m_star));
    Ok(t)
}

fn time_grid(config: &RunConfig, array: &EmitterArray, m: i64) -> CliResult<TimeGrid> {
    Ok(match config.physics.t_max {
        Some(t_max) => TimeGrid { t_max, steps: config.physics.t_steps },
        None => TimeGrid { steps: config.physics.t_steps, ..default_time_grid(array, m)? },
    })
}

fn fidelity(config: &RunConfig) -> CliResult<Table> {
    let array = build_array(config)?;
    let m = config.physics.m.expect("checked at resolve");
    let site = match config.physics.site {
        Some(s) => s,
        None => farthest_site(&array)?,
    };
    let packet = PacketSpec { site, m, delta_theta: config.physics.delta_theta };
    let grid = time_grid(config, &array, m)?;
    let trace = fidelity_trace(&array, &packet, &grid.times())?;
    let measure = config.physics.fidelity;
    let mut t = Table::new(vec!["t", "fidelity", "argmax_site", "population"]);
    for i in 0..trace.times.len() {
        t.push(vec![
            trace.times[i].into(),
            measure.apply(trace.fidelity[i]).into(),
            trace.argmax_site[i].into(),
            trace.population[i].into(),
        ]);
    }
    let (t_at_max, f_max) = trace.max(measure);
    t.meta.insert("max_fidelity".into(), json!(f_max));
    t.meta.insert("t_at_max".into(), json!(t_at_max));
    t.meta.insert("start_site".into(), json!(site));
    t.meta.insert("method".into(), json!(format!("{:?}", trace.method).to_lowercase()));
    Ok(t)
}

fn fidelity_scan_table(config: &RunConfig) -> CliResult<Table> {
    let (n, d) = geometry_values(config);
    let p = &config.physics;
    if p.t_max.is_none() && p.t_steps != 2000 {
        log::warn!("t_steps only applies together with t_max in fidelity scans");
    }
    let spec = FidelityScanSpec {
        n,
        spacing: d,
        polarization: config.geometry.polarization,
        arrangement: config.geometry.arrangement,
        m: p.m.expect("checked at resolve"),
        gaps: config.scan.gaps.clone(),
        widths: config.scan.widths.clone(),
        time_grid: p.t_max.map(|t_max| TimeGrid { t_max, steps: p.t_steps }),
        measure: p.fidelity,
    };
    let scan = fidelity_scan(&spec)?;
    let mut t = Table::new(vec!["x", "width", "delta_theta", "max_fidelity", "t_at_max"]);
    for q in &scan.points {
        t.push(vec![q.gap.into(), q.width.into(), q.delta_theta.into(), q.max_fidelity.into(), q.t_at_max.into()]);
    }
    if let Some(best) = scan.best() {
        t.meta.insert("best".into(), json!({ "x": best.gap, "width": best.width, "max_fidelity": best.max_fidelity }));
    }
    Ok(t)
}
