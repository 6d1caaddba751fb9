//! Line-oriented `key = value` run configuration.
//!
//! Physical keys carry fixed units: Coulomb energies in meV, free-space
//! emission and injection rates in neV, every other energy or rate in μeV,
//! angles in rad, fields in mT. `two_hbar_*` keys are full rates and are
//! halved on the way in.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::params::{ModelParams, ParamError};
use crate::spectra::{Channel, FrequencyGrid, ResolventMethod};
use crate::transitions::{detuning_for_line, Line};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("{message}")]
    Invalid { message: String },
}

/// Quantity swept by a [`SweepSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    /// Shift added to the resolved `delta_omega_BX`, μeV.
    DeltaOmegaBx,
    /// Total pure dephasing 2ħγ_phase, μeV.
    TwoHbarGammaPhase,
    /// Injection 2ħP, neV.
    TwoHbarP,
    /// Equal-component Overhauser field (B, B, B), mT.
    BN,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::DeltaOmegaBx => "delta_omega_BX",
            SweepParameter::TwoHbarGammaPhase => "two_hbar_gamma_phase",
            SweepParameter::TwoHbarP => "two_hbar_P",
            SweepParameter::BN => "B_N",
        }
    }

    /// Copy of `base` at sweep value `v` (in the parameter's config units).
    pub fn apply(self, base: &ModelParams, v: f64) -> ModelParams {
        let mut p = base.clone();
        match self {
            SweepParameter::DeltaOmegaBx => p.delta_omega_bx += v,
            SweepParameter::TwoHbarGammaPhase => p.set_gamma_phase(v / 2.0),
            SweepParameter::TwoHbarP => p.pump = v * 1e-3 / 2.0,
            SweepParameter::BN => p.overhauser_mt = [v; 3],
        }
        p
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Self::DeltaOmegaBx, Self::TwoHbarGammaPhase, Self::TwoHbarP, Self::BN]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown sweep parameter `{s}` (expected delta_omega_BX, two_hbar_gamma_phase, two_hbar_P or B_N)"))
    }
}

/// One swept parameter and its values.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> Result<Self, ConfigError> {
        if values.is_empty() {
            return Err(ConfigError::Invalid { message: "sweep value list is empty".into() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid { message: format!("sweep value {v} is not finite") });
        }
        Ok(Self { parameter, values })
    }

    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn range(parameter: SweepParameter, start: f64, stop: f64, count: usize) -> Result<Self, ConfigError> {
        let values = match count {
            0 => vec![],
            1 => vec![start],
            n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
        };
        Self::new(parameter, values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverhauserMode {
    Fixed,
    MonteCarlo,
}

/// Overhauser field used by the DX activation study.
#[derive(Clone, Debug, PartialEq)]
pub struct OverhauserSpec {
    pub mode: OverhauserMode,
    /// Field in fixed mode and mean field in Monte Carlo mode, mT.
    pub field_mt: [f64; 3],
    /// Gaussian RMS per axis, mT.
    pub rms_mt: [f64; 3],
    pub samples: usize,
    pub seed: u64,
}

impl Default for OverhauserSpec {
    fn default() -> Self {
        Self { mode: OverhauserMode::Fixed, field_mt: [20.0; 3], rms_mt: [20.0; 3], samples: 32, seed: 0 }
    }
}

impl OverhauserSpec {
    pub const MAX_RMS_MT: f64 = 100.0;

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(r) = self.rms_mt.iter().find(|r| !(0.0..=Self::MAX_RMS_MT).contains(*r)) {
            return Err(ConfigError::Invalid { message: format!("overhauser_rms {r} mT outside [0, {}]", Self::MAX_RMS_MT) });
        }
        if self.samples == 0 {
            return Err(ConfigError::Invalid { message: "overhauser_samples must be at least 1".into() });
        }
        if self.field_mt.iter().any(|b| !b.is_finite()) {
            return Err(ConfigError::Invalid { message: "overhauser_field must be finite".into() });
        }
        Ok(())
    }
}

/// Which panel of the detuning figure gets the 30 μeV resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolutionReading {
    /// Dephasing-free panel broadened to match the dephased one.
    Physics,
    /// Dephased panel broadened, as the figure caption literally reads.
    Caption,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { min: -3000.0, max: 3000.0, points: 1200 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<FrequencyGrid, ConfigError> {
        FrequencyGrid::uniform(self.min, self.max, self.points).map_err(|e| ConfigError::Invalid { message: e.to_string() })
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub channels: Vec<Channel>,
    pub method: ResolventMethod,
    pub sweep: Option<SweepSpec>,
    pub overhauser: OverhauserSpec,
    pub reading: ResolutionReading,
    /// Line the cavity was tuned to and the cavity-minus-line offset, if any.
    pub tuning: Option<(Line, f64)>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: ModelParams::table_one(),
            grid: GridSpec::default(),
            channels: vec![Channel::Cav, Channel::X, Channel::Y, Channel::Total],
            method: ResolventMethod::default(),
            sweep: None,
            overhauser: OverhauserSpec::default(),
            reading: ResolutionReading::Physics,
            tuning: None,
        }
    }
}

/// Accepted keys with their units, for `--help` and the README.
pub const KEYS: &[(&str, &str)] = &[
    ("J_ee", "meV"),
    ("J_hh", "meV"),
    ("J_eh", "meV"),
    ("delta0", "μeV"),
    ("delta1", "μeV"),
    ("delta2", "μeV"),
    ("two_hbar_Gamma_cav", "μeV"),
    ("two_hbar_Gamma_spon", "neV"),
    ("two_hbar_gamma_phase", "μeV, split equally between electrons and holes"),
    ("two_hbar_gamma_phase_e", "μeV"),
    ("two_hbar_gamma_phase_h", "μeV"),
    ("two_hbar_P", "neV"),
    ("two_hbar_g", "μeV"),
    ("theta_cav", "rad"),
    ("delta_omega_BX", "μeV"),
    ("tune_to", "line name: X+, X-, BXx, BXy, XXx, XXy, DXa, DXb"),
    ("tune_offset", "μeV, cavity minus line"),
    ("B_N", "mT, three comma-separated components"),
    ("g_e", "dimensionless"),
    ("two_hbar_gamma_reso", "μeV"),
    ("p_max", "photons"),
    ("lambda_ref", "nm"),
    ("omega_min", "μeV"),
    ("omega_max", "μeV"),
    ("omega_points", "count"),
    ("channels", "comma list of cav, x, y, L, R, spon, total"),
    ("resolvent", "hessenberg, direct or eigen"),
    ("sweep_parameter", "delta_omega_BX, two_hbar_gamma_phase, two_hbar_P or B_N"),
    ("sweep_values", "comma list in the swept parameter's units"),
    ("sweep_range", "start, stop, count"),
    ("resolution_reading", "physics or caption"),
    ("overhauser_mode", "fixed or monte_carlo"),
    ("overhauser_field", "mT, three components"),
    ("overhauser_rms", "mT, three components"),
    ("overhauser_samples", "count"),
    ("seed", "integer"),
];

pub fn parse_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
    parse_config_str(&text)
}

struct Entry {
    line: usize,
    value: String,
}

pub fn parse_config_str(text: &str) -> Result<Config, ConfigError> {
    let mut entries: BTreeMap<&'static str, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected `key = value`, got `{content}`") })?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS
            .iter()
            .map(|(k, _)| *k)
            .find(|k| *k == key)
            .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
        if value.is_empty() {
            return Err(ConfigError::Value { line, key: key.into(), message: "missing value".into() });
        }
        if let Some(first) = entries.get(known) {
            return Err(ConfigError::Duplicate { line, key: key.into(), first: first.line });
        }
        entries.insert(known, Entry { line, value: value.to_string() });
    }
    resolve(&entries)
}

fn value_err(e: &Entry, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value { line: e.line, key: key.to_string(), message: message.into() }
}

fn number(entries: &BTreeMap<&'static str, Entry>, key: &str) -> Result<Option<f64>, ConfigError> {
    let Some(e) = entries.get(key) else { return Ok(None) };
    let v: f64 = e.value.parse().map_err(|_| value_err(e, key, format!("`{}` is not a number", e.value)))?;
    if !v.is_finite() {
        return Err(value_err(e, key, "must be finite"));
    }
    Ok(Some(v))
}

fn integer(entries: &BTreeMap<&'static str, Entry>, key: &str) -> Result<Option<u64>, ConfigError> {
    let Some(e) = entries.get(key) else { return Ok(None) };
    e.value.parse().map(Some).map_err(|_| value_err(e, key, format!("`{}` is not a non-negative integer", e.value)))
}

fn list(entries: &BTreeMap<&'static str, Entry>, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    let Some(e) = entries.get(key) else { return Ok(None) };
    e.value
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| value_err(e, key, format!("`{s}` is not a finite number")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn triple(entries: &BTreeMap<&'static str, Entry>, key: &str) -> Result<Option<[f64; 3]>, ConfigError> {
    match list(entries, key)? {
        None => Ok(None),
        Some(v) => <[f64; 3]>::try_from(v.as_slice())
            .map(Some)
            .map_err(|_| value_err(&entries[key], key, format!("expected three components, got {}", v.len()))),
    }
}

fn parsed<T: FromStr<Err = String>>(entries: &BTreeMap<&'static str, Entry>, key: &str) -> Result<Option<T>, ConfigError> {
    let Some(e) = entries.get(key) else { return Ok(None) };
    e.value.parse().map(Some).map_err(|m| value_err(e, key, m))
}

fn resolve(entries: &BTreeMap<&'static str, Entry>) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    let p = &mut cfg.params;
    let scaled: [(&str, f64, &mut f64); 11] = [
        ("J_ee", 1e3, &mut p.j_ee),
        ("J_hh", 1e3, &mut p.j_hh),
        ("J_eh", 1e3, &mut p.j_eh),
        ("delta0", 1.0, &mut p.delta0),
        ("delta1", 1.0, &mut p.delta1),
        ("delta2", 1.0, &mut p.delta2),
        ("two_hbar_Gamma_cav", 0.5, &mut p.gamma_cav),
        ("two_hbar_Gamma_spon", 0.5e-3, &mut p.gamma_spon),
        ("two_hbar_P", 0.5e-3, &mut p.pump),
        ("two_hbar_g", 0.5, &mut p.g),
        ("two_hbar_gamma_reso", 0.5, &mut p.gamma_reso),
    ];
    for (key, factor, slot) in scaled {
        if let Some(v) = number(entries, key)? {
            *slot = v * factor;
        }
    }
    for (key, slot) in [("theta_cav", &mut p.theta_cav), ("g_e", &mut p.g_e), ("lambda_ref", &mut p.lambda_ref)] {
        if let Some(v) = number(entries, key)? {
            *slot = v;
        }
    }
    let total = number(entries, "two_hbar_gamma_phase")?;
    let split = [number(entries, "two_hbar_gamma_phase_e")?, number(entries, "two_hbar_gamma_phase_h")?];
    if let Some(t) = total {
        if split.iter().any(Option::is_some) {
            let e = &entries["two_hbar_gamma_phase"];
            return Err(value_err(e, "two_hbar_gamma_phase", "cannot be combined with the per-species keys"));
        }
        p.set_gamma_phase(t / 2.0);
    }
    if let Some(v) = split[0] {
        p.gamma_phase_e = v / 2.0;
    }
    if let Some(v) = split[1] {
        p.gamma_phase_h = v / 2.0;
    }
    if let Some(b) = triple(entries, "B_N")? {
        p.overhauser_mt = b;
    }
    if let Some(n) = integer(entries, "p_max")? {
        p.p_max = n as usize;
    }

    // the frame is resolved after every energy is known
    if let Some(v) = number(entries, "delta_omega_BX")? {
        if entries.contains_key("tune_to") {
            return Err(value_err(&entries["delta_omega_BX"], "delta_omega_BX", "cannot be combined with tune_to"));
        }
        p.delta_omega_bx = v;
    } else {
        p.delta_omega_bx = p.default_detuning();
    }
    let offset = number(entries, "tune_offset")?;
    match parsed::<Line>(entries, "tune_to")? {
        Some(line) => {
            let off = offset.unwrap_or(0.0);
            p.delta_omega_bx = detuning_for_line(p, line, -off);
            cfg.tuning = Some((line, off));
        }
        None if offset.is_some() => {
            return Err(value_err(&entries["tune_offset"], "tune_offset", "requires tune_to"));
        }
        None => {}
    }

    if let Err(e) = p.validate() {
        let key = match &e {
            ParamError::Negative { name, .. } | ParamError::NotFinite { name, .. } => *name,
            ParamError::NoPhotonSpace => "p_max",
            ParamError::BadWavelength(_) => "lambda_ref",
        };
        return Err(match entries.get(key) {
            Some(entry) => value_err(entry, key, e.to_string()),
            None => ConfigError::Invalid { message: e.to_string() },
        });
    }

    if let Some(v) = number(entries, "omega_min")? {
        cfg.grid.min = v;
    }
    if let Some(v) = number(entries, "omega_max")? {
        cfg.grid.max = v;
    }
    if let Some(n) = integer(entries, "omega_points")? {
        cfg.grid.points = n as usize;
    }
    cfg.grid.build()?;

    if let Some(e) = entries.get("channels") {
        cfg.channels = e
            .value
            .split(',')
            .map(|s| s.trim().parse::<Channel>().map_err(|m| value_err(e, "channels", m)))
            .collect::<Result<_, _>>()?;
    }
    if let Some(m) = parsed::<ResolventMethod>(entries, "resolvent")? {
        cfg.method = m;
    }
    if let Some(e) = entries.get("resolution_reading") {
        cfg.reading = match e.value.as_str() {
            "physics" => ResolutionReading::Physics,
            "caption" => ResolutionReading::Caption,
            other => return Err(value_err(e, "resolution_reading", format!("`{other}` is not physics or caption"))),
        };
    }

    let parameter = parsed::<SweepParameter>(entries, "sweep_parameter")?;
    let values = list(entries, "sweep_values")?;
    let range = list(entries, "sweep_range")?;
    cfg.sweep = match (parameter, values, range) {
        (None, None, None) => None,
        (None, _, _) => return Err(ConfigError::Invalid { message: "sweep values given without sweep_parameter".into() }),
        (Some(_), Some(_), Some(_)) => {
            return Err(value_err(&entries["sweep_range"], "sweep_range", "cannot be combined with sweep_values"))
        }
        (Some(_), None, None) => {
            return Err(value_err(&entries["sweep_parameter"], "sweep_parameter", "needs sweep_values or sweep_range"))
        }
        (Some(param), Some(v), None) => {
            Some(SweepSpec::new(param, v).map_err(|e| value_err(&entries["sweep_values"], "sweep_values", e.to_string()))?)
        }
        (Some(param), None, Some(r)) => {
            let e = &entries["sweep_range"];
            let [start, stop, count] = <[f64; 3]>::try_from(r.as_slice())
                .map_err(|_| value_err(e, "sweep_range", "expected start, stop, count"))?;
            if count < 1.0 || count.fract() != 0.0 {
                return Err(value_err(e, "sweep_range", "count must be a positive integer"));
            }
            Some(SweepSpec::range(param, start, stop, count as usize).map_err(|err| value_err(e, "sweep_range", err.to_string()))?)
        }
    };

    let o = &mut cfg.overhauser;
    if let Some(e) = entries.get("overhauser_mode") {
        o.mode = match e.value.as_str() {
            "fixed" => OverhauserMode::Fixed,
            "monte_carlo" => OverhauserMode::MonteCarlo,
            other => return Err(value_err(e, "overhauser_mode", format!("`{other}` is not fixed or monte_carlo"))),
        };
    }
    if let Some(b) = triple(entries, "overhauser_field")? {
        o.field_mt = b;
    }
    if let Some(b) = triple(entries, "overhauser_rms")? {
        o.rms_mt = b;
    }
    if let Some(n) = integer(entries, "overhauser_samples")? {
        o.samples = n as usize;
    }
    if let Some(n) = integer(entries, "seed")? {
        o.seed = n;
    }
    if let Err(err) = o.validate() {
        let key = ["overhauser_rms", "overhauser_samples", "overhauser_field"]
            .into_iter()
            .find(|k| err.to_string().starts_with(k) && entries.contains_key(k));
        return Err(match key {
            Some(k) => value_err(&entries[k], k, err.to_string()),
            None => err,
        });
    }
    Ok(cfg)
}

/// Config-file rendering of resolved parameters, in config units.
pub fn describe_params(p: &ModelParams) -> Vec<(String, String)> {
    let [bx, by, bz] = p.overhauser_mt;
    vec![
        ("J_ee".into(), format!("{}", p.j_ee * 1e-3)),
        ("J_hh".into(), format!("{}", p.j_hh * 1e-3)),
        ("J_eh".into(), format!("{}", p.j_eh * 1e-3)),
        ("delta0".into(), format!("{}", p.delta0)),
        ("delta1".into(), format!("{}", p.delta1)),
        ("delta2".into(), format!("{}", p.delta2)),
        ("two_hbar_Gamma_cav".into(), format!("{}", 2.0 * p.gamma_cav)),
        ("two_hbar_Gamma_spon".into(), format!("{}", 2e3 * p.gamma_spon)),
        ("two_hbar_gamma_phase_e".into(), format!("{}", 2.0 * p.gamma_phase_e)),
        ("two_hbar_gamma_phase_h".into(), format!("{}", 2.0 * p.gamma_phase_h)),
        ("two_hbar_P".into(), format!("{}", 2e3 * p.pump)),
        ("two_hbar_g".into(), format!("{}", 2.0 * p.g)),
        ("theta_cav".into(), format!("{}", p.theta_cav)),
        ("delta_omega_BX".into(), format!("{}", p.delta_omega_bx)),
        ("B_N".into(), format!("{bx}, {by}, {bz}")),
        ("g_e".into(), format!("{}", p.g_e)),
        ("two_hbar_gamma_reso".into(), format!("{}", 2.0 * p.gamma_reso)),
        ("p_max".into(), format!("{}", p.p_max)),
        ("lambda_ref".into(), format!("{}", p.lambda_ref)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_table_one() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.params, ModelParams::table_one());
    }

    #[test]
    fn full_rates_are_halved() {
        let cfg = parse_config_str("two_hbar_g = 210\ntwo_hbar_P = 33 # neV\n").unwrap();
        assert_eq!(cfg.params.g, 105.0);
        assert!((cfg.params.pump - 0.0165).abs() < 1e-15);
    }

    #[test]
    fn negative_coulomb_rejected_with_line() {
        let err = parse_config_str("# header\n\nJ_ee = -1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Value { line: 3, ref key, .. } if key == "J_ee"), "{err}");
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert_eq!(parse_config_str("foo = 1").unwrap_err(), ConfigError::UnknownKey { line: 1, key: "foo".into() });
        let err = parse_config_str("p_max = 2\np_max = 3").unwrap_err();
        assert_eq!(err, ConfigError::Duplicate { line: 2, key: "p_max".into(), first: 1 });
        assert!(matches!(parse_config_str("p_max 2"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn tuning_places_cavity() {
        let cfg = parse_config_str("tune_to = X+\ntune_offset = 40").unwrap();
        assert!((Line::XPlus.energy(&cfg.params) + 40.0).abs() < 1e-9);
        assert_eq!(cfg.tuning, Some((Line::XPlus, 40.0)));
        assert!(parse_config_str("tune_offset = 4").is_err());
        assert!(parse_config_str("tune_to = BXy\ndelta_omega_BX = 1").is_err());
    }

    #[test]
    fn detuning_default_tracks_energies() {
        let cfg = parse_config_str("J_eh = 28").unwrap();
        assert!(Line::BrightY.energy(&cfg.params).abs() < 1e-9);
    }

    #[test]
    fn sweeps() {
        let cfg = parse_config_str("sweep_parameter = two_hbar_P\nsweep_values = 33, 330, 3300").unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.parameter, SweepParameter::TwoHbarP);
        assert!((s.parameter.apply(&cfg.params, 330.0).pump - 0.165).abs() < 1e-15);
        let cfg = parse_config_str("sweep_parameter = B_N\nsweep_range = 0, 20, 3").unwrap();
        assert_eq!(cfg.sweep.unwrap().values, vec![0.0, 10.0, 20.0]);
        assert!(parse_config_str("sweep_parameter = B_N").is_err());
        assert!(parse_config_str("sweep_values = 1").is_err());
        assert!(parse_config_str("sweep_parameter = nope\nsweep_values = 1").is_err());
    }

    #[test]
    fn overhauser_bounds() {
        assert!(parse_config_str("overhauser_rms = 10, 10, 150").is_err());
        assert!(parse_config_str("overhauser_samples = 0").is_err());
        let cfg = parse_config_str("overhauser_mode = monte_carlo\noverhauser_rms = 9.5, 9.5, 30\nseed = 7").unwrap();
        assert_eq!(cfg.overhauser.mode, OverhauserMode::MonteCarlo);
        assert_eq!(cfg.overhauser.seed, 7);
    }

    #[test]
    fn channels_and_method() {
        let cfg = parse_config_str("channels = cav, L, R\nresolvent = direct").unwrap();
        assert_eq!(cfg.channels, vec![Channel::Cav, Channel::L, Channel::R]);
        assert_eq!(cfg.method, ResolventMethod::Direct);
        assert!(parse_config_str("channels = cav, z").is_err());
    }

    #[test]
    fn description_round_trips() {
        let mut p = ModelParams::table_one();
        p.overhauser_mt = [1.0, 2.0, 3.0];
        p.p_max = 3;
        let text: String = describe_params(&p).iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let back = parse_config_str(&text).unwrap().params;
        for (a, b) in describe_params(&back).iter().zip(describe_params(&p)) {
            assert_eq!(a.1.parse::<f64>().ok().map(|x| (x * 1e9).round()), b.1.parse::<f64>().ok().map(|x| (x * 1e9).round()));
        }
        assert!((back.delta_omega_bx - p.delta_omega_bx).abs() < 1e-9);
    }
}
