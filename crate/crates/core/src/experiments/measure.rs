//! Scalar observables extracted from spectra: F-factor budgets, triplet
//! intensities, injection ratios and the dark-exciton feature.

use crate::analysis::{classify_triplet_with, f_factor_with_coupling, find_peaks, PeakLabel, PeakSet, TripletOptions};
use crate::params::ModelParams;
use crate::spectra::{Channel, EmissionModel, FrequencyGrid, ResolventMethod, SpectrumError, SpectrumSeries};
use crate::transitions::Line;

/// Sample spacing of intensity grids, μeV.
pub const INTENSITY_SPACING: f64 = 1.0;
/// Half-width of the extra Lorentzian applied before integrating. It keeps
/// every line resolvable on [`INTENSITY_SPACING`] and leaves integrals intact.
pub const INTENSITY_GAMMA_RESO: f64 = 2.5;
/// Margin beyond the outermost line of an intensity grid, μeV.
pub const INTENSITY_MARGIN: f64 = 800.0;
/// Half-window around the cavity searched for the triplet, μeV.
pub const TRIPLET_HALF_WINDOW: f64 = 300.0;
/// Relative prominence for triplet peaks.
pub const TRIPLET_PROMINENCE: f64 = 0.01;

/// Budget of one optically active line in the F-factor prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBudget {
    pub line: Line,
    pub detuning: f64,
    pub coupling: f64,
    pub f: f64,
    /// Integrated intensity in the window of the line.
    pub measured: f64,
    /// Emission attributed to the state, `measured / (1 − F)`.
    pub state: f64,
}

/// Bare-cavity intensity against the sum of F-weighted line emission.
#[derive(Clone, Debug, PartialEq)]
pub struct AzeBudget {
    /// `S_cav` integrated over the cavity window.
    pub cavity: f64,
    pub lines: Vec<LineBudget>,
    pub prediction: f64,
}

impl AzeBudget {
    pub fn ratio(&self) -> f64 {
        self.prediction / self.cavity
    }
}

/// Polarization channels that carry a line, next to the cavity channel.
fn line_channels(line: Line) -> &'static [Channel] {
    match line {
        Line::BrightY | Line::BiexcitonY => &[Channel::Cav, Channel::Y],
        Line::BrightX | Line::BiexcitonX => &[Channel::Cav, Channel::X],
        _ => &[Channel::Cav, Channel::X, Channel::Y],
    }
}

/// Spectra on a grid spanning the cavity and `lines` with one resolution
/// Lorentzian added; returns (grid, [cav, x, y]).
fn intensity_spectra(
    params: &ModelParams,
    lines: &[Line],
    method: ResolventMethod,
) -> Result<(FrequencyGrid, [SpectrumSeries; 3]), SpectrumError> {
    let mut p = params.clone();
    p.gamma_reso += INTENSITY_GAMMA_RESO;
    let energies: Vec<f64> = lines.iter().map(|l| l.energy(&p)).chain([0.0]).collect();
    let lo = energies.iter().cloned().fold(f64::MAX, f64::min) - INTENSITY_MARGIN;
    let hi = energies.iter().cloned().fold(f64::MIN, f64::max) + INTENSITY_MARGIN;
    let count = ((hi - lo) / INTENSITY_SPACING).round() as usize + 1;
    let grid = FrequencyGrid::uniform(lo, hi, count)?;
    let model = EmissionModel::with_method(&p, method)?;
    let mut s = model.spectra(&[Channel::Cav, Channel::X, Channel::Y], &grid)?.into_iter();
    let parts = [s.next().unwrap(), s.next().unwrap(), s.next().unwrap()];
    Ok((grid, parts))
}

fn window_integral(parts: &[SpectrumSeries; 3], channels: &[Channel], lo: f64, hi: f64) -> f64 {
    channels
        .iter()
        .map(|c| {
            let idx = match c {
                Channel::Cav => 0,
                Channel::X => 1,
                _ => 2,
            };
            parts[idx].integral_between(lo, hi)
        })
        .sum()
}

/// F-factor budget for the cavity and the given active lines. Each window
/// extends halfway to the neighboring line or cavity.
pub fn aze_budget(params: &ModelParams, lines: &[Line], method: ResolventMethod) -> Result<AzeBudget, SpectrumError> {
    let (grid, parts) = intensity_spectra(params, lines, method)?;
    let mut centers: Vec<f64> = lines.iter().map(|l| l.energy(params)).chain([0.0]).collect();
    centers.sort_by(|a, b| a.total_cmp(b));
    centers.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let window = |e: f64| {
        let i = centers.iter().position(|c| (c - e).abs() < 1e-9).expect("center listed");
        let lo = if i == 0 { grid.min() } else { 0.5 * (centers[i - 1] + e) };
        let hi = if i + 1 == centers.len() { grid.max() } else { 0.5 * (centers[i + 1] + e) };
        (lo, hi)
    };
    let (lo, hi) = window(0.0);
    let cavity = window_integral(&parts, &[Channel::Cav], lo, hi);
    let mut budget = Vec::with_capacity(lines.len());
    for &line in lines {
        let detuning = line.energy(params);
        let coupling = line.cavity_coupling(params);
        let (lo, hi) = window(detuning);
        let measured = window_integral(&parts, line_channels(line), lo, hi);
        let f = f_factor_with_coupling(params, detuning, coupling);
        budget.push(LineBudget { line, detuning, coupling, f, measured, state: measured / (1.0 - f) });
    }
    let prediction = budget.iter().map(|b| b.f * b.state).sum();
    Ok(AzeBudget { cavity, lines: budget, prediction })
}

/// Peak intensities of the vacuum-Rabi triplet around the cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct TripletIntensities {
    pub r_minus: f64,
    /// Zero when no center peak is found.
    pub center: f64,
    pub r_plus: f64,
    pub peaks: PeakSet,
}

impl TripletIntensities {
    pub fn from_series(series: &SpectrumSeries) -> Self {
        let opts = TripletOptions { half_window: TRIPLET_HALF_WINDOW, min_prominence: TRIPLET_PROMINENCE };
        let peaks = classify_triplet_with(series, 0.0, opts);
        let get = |l| peaks.labeled(l).map_or(0.0, |p| p.intensity);
        Self { r_minus: get(PeakLabel::RMinus), center: get(PeakLabel::Center), r_plus: get(PeakLabel::RPlus), peaks }
    }

    /// Center intensity over the summed VRS intensity.
    pub fn center_ratio(&self) -> f64 {
        let vrs = self.r_minus + self.r_plus;
        if vrs > 0.0 {
            self.center / vrs
        } else {
            0.0
        }
    }
}

/// `S_cav + S_y` of a model.
pub fn cavity_and_y(model: &EmissionModel, grid: &FrequencyGrid) -> Result<SpectrumSeries, SpectrumError> {
    let cav = model.spectrum(Channel::Cav, grid)?;
    let y = model.spectrum(Channel::Y, grid)?;
    cav.add(&y, Channel::Total)
}

/// Triplet of the fine `S_cav + S_y` spectrum used for the dephasing study.
pub fn triplet_intensities(params: &ModelParams, method: ResolventMethod) -> Result<TripletIntensities, SpectrumError> {
    let mut p = params.clone();
    p.gamma_reso += INTENSITY_GAMMA_RESO;
    let half = TRIPLET_HALF_WINDOW + INTENSITY_MARGIN;
    let grid = FrequencyGrid::around(0.0, half, (2.0 * half / INTENSITY_SPACING) as usize + 1)?;
    let model = EmissionModel::with_method(&p, method)?;
    Ok(TripletIntensities::from_series(&cavity_and_y(&model, &grid)?))
}

/// Injection-study observables of one `S_cav + S_y` spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct InjectionPoint {
    pub triplet: TripletIntensities,
    /// `S(0) / max S`: how far the gap between the VRS peaks fills in.
    pub fill: f64,
}

pub fn injection_point(series: &SpectrumSeries) -> InjectionPoint {
    let grid = &series.grid;
    let i0 = ((0.0 - grid.min()) / grid.spacing()).round().clamp(0.0, (grid.len() - 1) as f64) as usize;
    let max = series.max();
    let fill = if max > 0.0 { series.values[i0] / max } else { 0.0 };
    InjectionPoint { triplet: TripletIntensities::from_series(series), fill }
}

/// Emission near the dark-exciton lines with and without the Overhauser field.
#[derive(Clone, Debug, PartialEq)]
pub struct DxFeature {
    /// Centroid of the two dark lines.
    pub energy: f64,
    pub lo: f64,
    pub hi: f64,
    pub with_field: f64,
    pub without_field: f64,
}

impl DxFeature {
    /// Field-induced emission in the dark-exciton window.
    pub fn excess(&self) -> f64 {
        self.with_field - self.without_field
    }
}

/// Half-width added on each side of the dark doublet, μeV.
pub const DX_WINDOW: f64 = 25.0;

pub fn dx_window(params: &ModelParams) -> (f64, f64) {
    let a = Line::DarkA.energy(params);
    let b = Line::DarkB.energy(params);
    (a.min(b) - DX_WINDOW, a.max(b) + DX_WINDOW)
}

/// Total spectra with `params` and with its field removed, integrated over
/// the dark-exciton window.
pub fn dx_feature(params: &ModelParams, grid: &FrequencyGrid, method: ResolventMethod) -> Result<DxFeature, SpectrumError> {
    let mut bare = params.clone();
    bare.overhauser_mt = [0.0; 3];
    let (lo, hi) = dx_window(params);
    let integral = |p: &ModelParams| -> Result<f64, SpectrumError> {
        let m = EmissionModel::with_method(p, method)?;
        Ok(m.spectrum(Channel::Total, grid)?.integral_between(lo, hi))
    };
    Ok(DxFeature {
        energy: 0.5 * (Line::DarkA.energy(params) + Line::DarkB.energy(params)),
        lo,
        hi,
        with_field: integral(params)?,
        without_field: integral(&bare)?,
    })
}

/// Cavity-minus-BX_y offset at which the lower VRS branch of the y bright
/// exciton meets the dark-exciton centroid.
pub fn vrs_dark_resonance(params: &ModelParams) -> f64 {
    // energies relative to BX_y
    let d = 0.5 * (Line::DarkA.energy(params) + Line::DarkB.energy(params)) - Line::BrightY.energy(params);
    let g2 = Line::BrightY.cavity_coupling(params).powi(2);
    (d * d - g2) / d
}

/// Positions of the spontaneous-emission lines found in `S_x + S_y`.
pub fn spon_line_positions(model: &EmissionModel, grid: &FrequencyGrid, min_prominence: f64) -> Result<Vec<f64>, SpectrumError> {
    let s = model.spectrum(Channel::Spon, grid)?;
    Ok(find_peaks(&s, min_prominence).map(|ps| ps.peaks.iter().map(|p| p.center).collect()).unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transitions::tuned_to;

    #[test]
    fn vrs_dark_resonance_places_lower_branch() {
        let p = ModelParams::table_one();
        let c = vrs_dark_resonance(&p);
        let g = Line::BrightY.cavity_coupling(&p);
        let lower = c / 2.0 - (c * c / 4.0 + g * g).sqrt();
        let dark = 0.5 * (Line::DarkA.energy(&p) + Line::DarkB.energy(&p));
        assert!((lower - dark).abs() < 1e-9);
        assert!((c + 141.17).abs() < 0.01, "{c}");
    }

    #[test]
    fn dx_window_brackets_dark_lines() {
        let p = tuned_to(&ModelParams::table_one(), Line::BrightY, 100.0);
        let (lo, hi) = dx_window(&p);
        assert!((hi - lo - 60.0).abs() < 1e-9);
        assert!(lo < Line::DarkA.energy(&p) && Line::DarkB.energy(&p) < hi);
    }
}
