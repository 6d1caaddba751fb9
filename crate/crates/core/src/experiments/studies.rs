//! File-producing runs behind the CLI subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::params::ModelParams;
use crate::spectra::{Channel, EmissionModel, FrequencyGrid, SpectrumSeries};
use crate::transitions::{tuned_to, Line};

use super::config::{describe_params, Config, OverhauserMode, ResolutionReading, SweepParameter, SweepSpec};
use super::measure::{aze_budget, cavity_and_y, dx_window, injection_point, triplet_intensities, vrs_dark_resonance};
use super::output::{fmt_omega, fmt_value, write_map_csv, write_spectrum_csv, write_table_csv, Manifest, MapRow};
use super::ExperimentError;

/// Cavity-minus-BX_y offset of the detuned scenario of the dephasing study, μeV.
pub const DETUNED_SCENARIO_OFFSET: f64 = 2500.0;
/// Dephasing values of the two detuning-map variants, 2ħγ_phase in μeV.
pub const DETUNING_MAP_DEPHASING: [f64; 2] = [0.0, 30.0];
/// Resolution 2ħγ_reso applied to the broadened detuning-map panel and to
/// the injection study, μeV.
pub const BROADENED_RESOLUTION: f64 = 30.0;

/// Files written by a study and the points that failed.
#[derive(Clone, Debug, Default)]
pub struct StudyReport {
    pub files: Vec<PathBuf>,
    pub failures: Vec<(f64, String)>,
    pub manifest: Manifest,
}

/// Runs `f` on a rayon pool with `workers` threads (all cores when `None`).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn base_manifest(study: &str, cfg: &Config) -> Manifest {
    let mut m = Manifest::new();
    m.push("study", study);
    for (k, v) in describe_params(&cfg.params) {
        m.push(k, v);
    }
    if let Some((line, off)) = cfg.tuning {
        m.push("tune_to", line);
        m.push("tune_offset", off);
    }
    m.push("omega_min", cfg.grid.min);
    m.push("omega_max", cfg.grid.max);
    m.push("omega_points", cfg.grid.points);
    m.push("channels", cfg.channels.iter().map(|c| c.name()).collect::<Vec<_>>().join(", "));
    m.push("resolvent", format!("{:?}", cfg.method).to_lowercase());
    for line in Line::ALL {
        m.push(format!("line_{}_ueV", line.name()), fmt_omega(line.energy(&cfg.params)));
    }
    m
}

fn finish(mut report: StudyReport, out: &Path, start: Instant) -> Result<StudyReport, ExperimentError> {
    report.manifest.push("failed_points", report.failures.len());
    for (v, msg) in &report.failures {
        report.manifest.push(format!("failure_{}", fmt_omega(*v)), msg);
    }
    report.manifest.push("wall_clock_s", format!("{:.3}", start.elapsed().as_secs_f64()));
    let path = report.manifest.write(&out.join("manifest.txt"))?;
    report.files.push(path);
    Ok(report)
}

fn sweep_or(cfg: &Config, expected: SweepParameter, default: SweepSpec) -> Result<SweepSpec, ExperimentError> {
    match &cfg.sweep {
        None => Ok(default),
        Some(s) if s.parameter == expected => Ok(s.clone()),
        Some(s) => Err(ExperimentError::Config(super::ConfigError::Invalid {
            message: format!("this study sweeps {expected}, config sets sweep_parameter = {}", s.parameter),
        })),
    }
}

fn relative_change(a: &SpectrumSeries, b: &SpectrumSeries) -> f64 {
    let scale = a.values.iter().chain(&b.values).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Steady state and all configured channels at one parameter point, with a
/// `p_max + 1` convergence check.
pub fn run_spectrum(cfg: &Config, out: &Path) -> Result<StudyReport, ExperimentError> {
    let start = Instant::now();
    let grid = cfg.grid.build()?;
    let p = &cfg.params;
    let model = EmissionModel::with_method(p, cfg.method)?;
    let series = model.spectra(&cfg.channels, &grid)?;
    let mut report = StudyReport { manifest: base_manifest("spectrum", cfg), ..Default::default() };
    for s in &series {
        report.files.push(write_spectrum_csv(&out.join(format!("spectrum_{}.csv", s.channel.name())), p, s)?);
    }
    let r = &model.steady.report;
    let m = &mut report.manifest;
    m.push("steady_residual", format!("{:e}", r.residual));
    m.push("steady_relative_residual", format!("{:e}", r.relative_residual()));
    m.push("steady_hermiticity", format!("{:e}", r.hermiticity));
    m.push("steady_trace_error", format!("{:e}", r.trace_error));
    m.push("steady_min_eigenvalue", format!("{:e}", r.min_eigenvalue));
    m.push("steady_null_gap", r.null_gap.map_or("n/a".into(), |g| format!("{g:e}")));
    for ch in [Channel::Cav, Channel::X, Channel::Y] {
        m.push(format!("occupation_{}", ch.name()), format!("{:e}", model.occupation(ch)));
    }
    let mut q = p.clone();
    q.p_max += 1;
    let finer = EmissionModel::with_method(&q, cfg.method)?.spectra(&cfg.channels, &grid)?;
    let delta = series.iter().zip(&finer).map(|(a, b)| relative_change(a, b)).fold(0.0, f64::max);
    m.push("convergence_p_max", q.p_max);
    m.push("convergence_delta", format!("{delta:e}"));
    finish(report, out, start)
}

/// Evaluates `f` at every sweep value in parallel. Results stay in sweep
/// order; failures are collected instead of aborting.
fn sweep_points<T: Send>(
    values: &[f64],
    f: impl Fn(f64) -> Result<T, ExperimentError> + Sync,
) -> (Vec<(f64, T)>, Vec<(f64, String)>) {
    let results: Vec<(f64, Result<T, ExperimentError>)> = values.par_iter().map(|&v| (v, f(v))).collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (v, r) in results {
        match r {
            Ok(t) => ok.push((v, t)),
            Err(e) => failed.push((v, e.to_string())),
        }
    }
    (ok, failed)
}

fn write_maps(
    out: &Path,
    prefix: &str,
    channels: &[Channel],
    rows: &[(f64, Vec<SpectrumSeries>)],
) -> Result<Vec<PathBuf>, ExperimentError> {
    channels
        .iter()
        .enumerate()
        .map(|(k, ch)| {
            let map: Vec<MapRow<'_>> =
                rows.iter().map(|(v, s)| MapRow { sweep_value: *v, series: &s[k], stderr: None }).collect();
            write_map_csv(&out.join(format!("{prefix}_{}.csv", ch.name())), &map)
        })
        .collect()
}

/// Resolution half-width for a detuning-map panel.
pub fn map_resolution(cfg: &Config, two_hbar_gamma_phase: f64) -> f64 {
    let dephased = two_hbar_gamma_phase > 0.0;
    let broadened = match cfg.reading {
        ResolutionReading::Physics => !dephased,
        ResolutionReading::Caption => dephased,
    };
    if broadened {
        BROADENED_RESOLUTION / 2.0
    } else {
        cfg.params.gamma_reso
    }
}

/// Detuning maps without and with pure dephasing.
pub fn sweep_detuning(cfg: &Config, out: &Path) -> Result<StudyReport, ExperimentError> {
    let start = Instant::now();
    let spec = sweep_or(cfg, SweepParameter::DeltaOmegaBx, SweepSpec::range(SweepParameter::DeltaOmegaBx, -3000.0, 3000.0, 121)?)?;
    let grid = cfg.grid.build()?;
    let mut report = StudyReport { manifest: base_manifest("sweep-detuning", cfg), ..Default::default() };
    report.manifest.push("sweep_parameter", spec.parameter);
    report.manifest.push("sweep_points", spec.values.len());
    for phase in DETUNING_MAP_DEPHASING {
        let reso = map_resolution(cfg, phase);
        report.manifest.push(format!("phase{phase}_two_hbar_gamma_reso"), 2.0 * reso);
        let (rows, failed) = sweep_points(&spec.values, |v| {
            let mut p = spec.parameter.apply(&cfg.params, v);
            p.set_gamma_phase(phase / 2.0);
            p.gamma_reso = reso;
            Ok(EmissionModel::with_method(&p, cfg.method)?.spectra(&cfg.channels, &grid)?)
        });
        report.files.extend(write_maps(out, &format!("detuning_phase{phase}"), &cfg.channels, &rows)?);
        report.failures.extend(failed);
    }
    finish(report, out, start)
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_default()
}

/// Lines with a nonzero cavity coupling, excluding `skip`.
pub fn coupled_lines(p: &ModelParams, skip: &[Line]) -> Vec<Line> {
    Line::ALL
        .into_iter()
        .filter(|l| !skip.contains(l) && l.cavity_coupling(p) > 1e-9 * p.g)
        .collect()
}

/// Bare-cavity intensity and F-factor prediction against pure dephasing,
/// for the cavity detuned from all lines (a) and tuned to BX_y (b).
pub fn sweep_dephasing(cfg: &Config, out: &Path) -> Result<StudyReport, ExperimentError> {
    let start = Instant::now();
    let spec = sweep_or(cfg, SweepParameter::TwoHbarGammaPhase, SweepSpec::range(SweepParameter::TwoHbarGammaPhase, 0.0, 50.0, 11)?)?;
    let mut report = StudyReport { manifest: base_manifest("sweep-dephasing", cfg), ..Default::default() };
    report.manifest.push("scenario_a_cavity_minus_BXy", DETUNED_SCENARIO_OFFSET);
    report.manifest.push("scenario_b_cavity_minus_BXy", 0.0);
    let header = ["scenario", "two_hbar_gamma_phase", "direct", "center", "r_minus", "r_plus", "prediction", "ratio"];
    let mut rows = Vec::new();
    for (name, offset) in [("a", DETUNED_SCENARIO_OFFSET), ("b", 0.0)] {
        let base = tuned_to(&cfg.params, Line::BrightY, offset);
        let skip: &[Line] = if offset == 0.0 { &[Line::BrightX, Line::BrightY] } else { &[] };
        let lines = coupled_lines(&base, skip);
        report.manifest.push(format!("scenario_{name}_lines"), lines.iter().map(|l| l.name()).collect::<Vec<_>>().join(", "));
        let (points, failed) = sweep_points(&spec.values, |v| {
            let p = spec.parameter.apply(&base, v);
            let budget = aze_budget(&p, &lines, cfg.method)?;
            let triplet = if offset == 0.0 { Some(triplet_intensities(&p, cfg.method)?) } else { None };
            Ok((budget, triplet))
        });
        report.failures.extend(failed);
        for (v, (budget, triplet)) in points {
            let direct = triplet.as_ref().map_or(budget.cavity, |t| t.center);
            let ratio = (direct > 0.0).then(|| budget.prediction / direct);
            rows.push(vec![
                name.to_string(),
                fmt_omega(v),
                fmt_value(direct),
                cell(triplet.as_ref().map(|t| t.center)),
                cell(triplet.as_ref().map(|t| t.r_minus)),
                cell(triplet.as_ref().map(|t| t.r_plus)),
                fmt_value(budget.prediction),
                cell(ratio),
            ]);
        }
    }
    report.files.push(write_table_csv(&out.join("dephasing.csv"), &header, &rows)?);
    finish(report, out, start)
}

/// `S_cav + S_y` around BX_y without dephasing at several injection rates.
pub fn sweep_injection(cfg: &Config, out: &Path) -> Result<StudyReport, ExperimentError> {
    let start = Instant::now();
    let spec = sweep_or(cfg, SweepParameter::TwoHbarP, SweepSpec::new(SweepParameter::TwoHbarP, vec![33.0, 330.0, 3300.0])?)?;
    let grid = cfg.grid.build()?;
    let mut report = StudyReport { manifest: base_manifest("sweep-injection", cfg), ..Default::default() };
    report.manifest.push("two_hbar_gamma_phase_forced", 0.0);
    report.manifest.push("two_hbar_gamma_reso_forced", BROADENED_RESOLUTION);
    let mut base = tuned_to(&cfg.params, Line::BrightY, 0.0);
    base.set_gamma_phase(0.0);
    base.gamma_reso = BROADENED_RESOLUTION / 2.0;
    let (points, failed) = sweep_points(&spec.values, |v| {
        let p = spec.parameter.apply(&base, v);
        let s = cavity_and_y(&EmissionModel::with_method(&p, cfg.method)?, &grid)?;
        let point = injection_point(&s);
        Ok((s.normalized(), point))
    });
    report.failures.extend(failed);
    let map: Vec<MapRow<'_>> = points.iter().map(|(v, (s, _))| MapRow { sweep_value: *v, series: s, stderr: None }).collect();
    report.files.push(write_map_csv(&out.join("injection_map.csv"), &map)?);
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|(v, (_, pt))| {
            let t = &pt.triplet;
            vec![fmt_omega(*v), fmt_value(t.r_minus), fmt_value(t.center), fmt_value(t.r_plus), fmt_value(t.center_ratio()), fmt_value(pt.fill)]
        })
        .collect();
    let header = ["two_hbar_P_neV", "r_minus", "center", "r_plus", "center_ratio", "fill"];
    report.files.push(write_table_csv(&out.join("injection_summary.csv"), &header, &rows)?);
    finish(report, out, start)
}

/// Field samples for the Overhauser study: the fixed field, or Gaussian
/// draws around it with one ChaCha stream per sample.
pub fn overhauser_fields(cfg: &Config) -> Vec<[f64; 3]> {
    let o = &cfg.overhauser;
    match o.mode {
        OverhauserMode::Fixed => vec![o.field_mt],
        OverhauserMode::MonteCarlo => (0..o.samples)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
                rng.set_stream(k as u64);
                std::array::from_fn(|i| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    o.field_mt[i] + o.rms_mt[i] * z
                })
            })
            .collect(),
    }
}

/// Sample mean and standard error of the mean, pointwise.
pub fn mean_and_stderr(samples: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let len = samples.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; len];
    for s in samples {
        mean.iter_mut().zip(s).for_each(|(m, v)| *m += v / n as f64);
    }
    let mut err = vec![0.0; len];
    if n > 1 {
        for s in samples {
            err.iter_mut().zip(s).zip(&mean).for_each(|((e, v), m)| *e += (v - m).powi(2));
        }
        err.iter_mut().for_each(|e| *e = (*e / ((n - 1) * n) as f64).sqrt());
    }
    (mean, err)
}

/// Averaged total spectrum over field samples.
pub struct AveragedSpectrum {
    pub series: SpectrumSeries,
    pub stderr: Vec<f64>,
    /// Dark-window integral per sample.
    pub window_samples: Vec<f64>,
}

pub fn averaged_spectrum(
    params: &ModelParams,
    fields: &[[f64; 3]],
    grid: &FrequencyGrid,
    cfg: &Config,
) -> Result<AveragedSpectrum, ExperimentError> {
    let (lo, hi) = dx_window(params);
    let mut samples = Vec::with_capacity(fields.len());
    let mut first = None;
    for &b in fields {
        let mut p = params.clone();
        p.overhauser_mt = b;
        let s = EmissionModel::with_method(&p, cfg.method)?.spectrum(Channel::Total, grid)?;
        samples.push(s.values.clone());
        first.get_or_insert(s);
    }
    let (mean, stderr) = mean_and_stderr(&samples);
    let mut series = first.expect("at least one field sample");
    let window_samples = samples
        .iter()
        .map(|v| SpectrumSeries::new(grid.clone(), v.clone(), Channel::Total, String::new()).integral_between(lo, hi))
        .collect();
    series.values = mean;
    series.fingerprint = String::from("field-average");
    Ok(AveragedSpectrum { series, stderr, window_samples })
}

/// Total spectra around BX_y with and without the Overhauser field, and the
/// field-induced emission in the dark-exciton window.
pub fn overhauser_study(cfg: &Config, out: &Path) -> Result<StudyReport, ExperimentError> {
    let start = Instant::now();
    let spec = sweep_or(cfg, SweepParameter::DeltaOmegaBx, SweepSpec::range(SweepParameter::DeltaOmegaBx, -200.0, 400.0, 61)?)?;
    let grid = cfg.grid.build()?;
    let fields = overhauser_fields(cfg);
    let mut report = StudyReport { manifest: base_manifest("overhauser", cfg), ..Default::default() };
    let o = &cfg.overhauser;
    let m = &mut report.manifest;
    m.push("overhauser_mode", format!("{:?}", o.mode));
    m.push("overhauser_field", format!("{}, {}, {}", o.field_mt[0], o.field_mt[1], o.field_mt[2]));
    if o.mode == OverhauserMode::MonteCarlo {
        m.push("overhauser_rms", format!("{}, {}, {}", o.rms_mt[0], o.rms_mt[1], o.rms_mt[2]));
        m.push("overhauser_samples", o.samples);
        m.push("seed", o.seed);
    }
    m.push("dx_energy_ueV", fmt_omega(0.5 * (Line::DarkA.energy(&cfg.params) + Line::DarkB.energy(&cfg.params))));
    m.push("vrs_dark_resonance_cavity_minus_BXy", fmt_omega(vrs_dark_resonance(&cfg.params)));
    let (points, failed) = sweep_points(&spec.values, |v| {
        let p = spec.parameter.apply(&cfg.params, v);
        let mut bare = p.clone();
        bare.overhauser_mt = [0.0; 3];
        let off = EmissionModel::with_method(&bare, cfg.method)?.spectrum(Channel::Total, &grid)?;
        let on = averaged_spectrum(&p, &fields, &grid, cfg)?;
        Ok((p, off, on))
    });
    report.failures.extend(failed);
    let off_rows: Vec<MapRow<'_>> = points.iter().map(|(v, (_, off, _))| MapRow { sweep_value: *v, series: off, stderr: None }).collect();
    report.files.push(write_map_csv(&out.join("overhauser_off.csv"), &off_rows)?);
    let mc = o.mode == OverhauserMode::MonteCarlo;
    let on_rows: Vec<MapRow<'_>> = points
        .iter()
        .map(|(v, (_, _, on))| MapRow { sweep_value: *v, series: &on.series, stderr: mc.then_some(on.stderr.as_slice()) })
        .collect();
    report.files.push(write_map_csv(&out.join("overhauser_on.csv"), &on_rows)?);
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|(v, (p, off, on))| {
            let (lo, hi) = dx_window(p);
            let without = off.integral_between(lo, hi);
            let (with, err) = {
                let (m, e) = mean_and_stderr(&on.window_samples.iter().map(|w| vec![*w]).collect::<Vec<_>>());
                (m[0], e[0])
            };
            vec![
                fmt_omega(*v),
                fmt_omega(-Line::BrightY.energy(p)),
                fmt_omega(0.5 * (Line::DarkA.energy(p) + Line::DarkB.energy(p))),
                fmt_value(with),
                fmt_value(without),
                fmt_value(with - without),
                fmt_value(err),
            ]
        })
        .collect();
    let header = ["sweep_value", "cavity_minus_BXy", "dx_energy_ueV", "with_field", "without_field", "excess", "excess_stderr"];
    report.files.push(write_table_csv(&out.join("overhauser_dx.csv"), &header, &rows)?);
    finish(report, out, start)
}
