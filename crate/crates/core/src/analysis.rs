//! Post-processing of spectra: the F factor, peak finding, splittings and
//! triplet labelling.

use std::fmt;

use thiserror::Error;

use crate::params::ModelParams;
use crate::spectra::SpectrumSeries;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no peak pair found around ω = {0} μeV")]
    PeaksNotFound(f64),
    #[error("min_prominence must lie in (0, 1) (got {0})")]
    BadProminence(f64),
}

/// F factor of a two-level line at detuning `delta` from the cavity with
/// coupling `g_line`: the fraction of its emission that leaves at the
/// cavity energy.
pub fn f_factor_with_coupling(params: &ModelParams, delta: f64, g_line: f64) -> f64 {
    let gs = params.gamma_spon;
    let gp = params.gamma_phase();
    let num = gs + gp;
    if g_line == 0.0 {
        return if delta == 0.0 { num / (params.gamma_cav + num) } else { 0.0 };
    }
    num / (gs * (delta / g_line).powi(2) + params.gamma_cav + num)
}

/// F factor with the bare coupling `g`.
pub fn f_factor(params: &ModelParams, delta: f64) -> f64 {
    f_factor_with_coupling(params, delta, params.g)
}

/// An optically active line entering the F-factor prediction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActiveLine {
    /// Line energy minus cavity energy.
    pub detuning: f64,
    /// Coupling of the transition to the cavity.
    pub coupling: f64,
    /// Total emission attributed to the state.
    pub intensity: f64,
}

/// `Σ F(δ_i) I_i` over the supplied lines.
pub fn predict_cavity_intensity(params: &ModelParams, lines: &[ActiveLine]) -> f64 {
    lines
        .iter()
        .map(|l| f_factor_with_coupling(params, l.detuning, l.coupling) * l.intensity)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PeakLabel {
    RMinus,
    Center,
    RPlus,
    Unassigned,
}

impl fmt::Display for PeakLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeakLabel::RMinus => "R-",
            PeakLabel::Center => "center",
            PeakLabel::RPlus => "R+",
            PeakLabel::Unassigned => "unassigned",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Peak {
    /// Interpolated position of the maximum.
    pub center: f64,
    pub height: f64,
    /// Half width at half maximum from interpolated half-height crossings;
    /// `None` when neither crossing lies inside the peak's watershed.
    pub hwhm: Option<f64>,
    /// Height above the higher of the two bounding minima.
    pub prominence: f64,
    /// Integral over the watershed `[lower, upper]`.
    pub intensity: f64,
    pub lower: f64,
    pub upper: f64,
    pub label: PeakLabel,
}

/// Peaks sorted by center.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn labeled(&self, label: PeakLabel) -> Option<&Peak> {
        self.peaks.iter().find(|p| p.label == label)
    }

    pub fn has_center(&self) -> bool {
        self.labeled(PeakLabel::Center).is_some()
    }
}

/// Local maxima whose prominence exceeds `min_prominence · max(series)`.
pub fn find_peaks(series: &SpectrumSeries, min_prominence: f64) -> Result<PeakSet, AnalysisError> {
    if !(min_prominence > 0.0 && min_prominence < 1.0) {
        return Err(AnalysisError::BadProminence(min_prominence));
    }
    let v = &series.values;
    let n = v.len();
    let top = series.max();
    if n < 3 || !(top > 0.0) {
        return Ok(PeakSet::default());
    }
    let threshold = min_prominence * top;
    let mut maxima = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if v[i] > v[i - 1] {
            // walk across a plateau
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                maxima.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let prominent: Vec<(usize, f64)> = maxima
        .into_iter()
        .map(|m| (m, prominence(v, m)))
        .filter(|&(_, p)| p >= threshold)
        .collect();
    if prominent.is_empty() {
        return Ok(PeakSet::default());
    }
    // watershed boundaries: lowest sample between neighbouring peaks, and
    // the lowest sample towards each edge for the outer peaks
    let argmin = |lo: usize, hi: usize| (lo..=hi).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let mut bounds = Vec::with_capacity(prominent.len() + 1);
    bounds.push(argmin(0, prominent[0].0));
    for w in prominent.windows(2) {
        bounds.push(argmin(w[0].0, w[1].0));
    }
    bounds.push(argmin(prominent.last().unwrap().0, n - 1));

    let grid = &series.grid;
    let peaks = prominent
        .iter()
        .enumerate()
        .map(|(k, &(m, prom))| {
            let (lo, hi) = (bounds[k], bounds[k + 1]);
            let (center, height) = parabolic_vertex(series, m);
            let half = height / 2.0;
            let left = (lo..m).rev().find(|&j| v[j] <= half).map(|j| {
                let t = (half - v[j]) / (v[j + 1] - v[j]);
                grid.value(j) + t * grid.spacing()
            });
            let right = (m + 1..=hi).find(|&j| v[j] <= half).map(|j| {
                let t = (v[j - 1] - half) / (v[j - 1] - v[j]);
                grid.value(j - 1) + t * grid.spacing()
            });
            let hwhm = match (left, right) {
                (Some(l), Some(r)) => Some((r - l) / 2.0),
                (Some(l), None) => Some(center - l),
                (None, Some(r)) => Some(r - center),
                (None, None) => None,
            };
            let (lower, upper) = (grid.value(lo), grid.value(hi));
            Peak {
                center,
                height,
                hwhm,
                prominence: prom,
                intensity: series.integral_between(lower, upper).max(0.0),
                lower,
                upper,
                label: PeakLabel::Unassigned,
            }
        })
        .collect();
    Ok(PeakSet { peaks })
}

fn prominence(v: &[f64], m: usize) -> f64 {
    let h = v[m];
    let mut left_min = h;
    for j in (0..m).rev() {
        if v[j] > h {
            break;
        }
        left_min = left_min.min(v[j]);
    }
    let mut right_min = h;
    for &x in &v[m + 1..] {
        if x > h {
            break;
        }
        right_min = right_min.min(x);
    }
    h - left_min.max(right_min)
}

/// Vertex of the parabola through the maximum and its two neighbours.
fn parabolic_vertex(series: &SpectrumSeries, m: usize) -> (f64, f64) {
    let v = &series.values;
    let x = series.grid.value(m);
    if m == 0 || m + 1 >= v.len() {
        return (x, v[m]);
    }
    let (a, b, c) = (v[m - 1], v[m], v[m + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (x, b);
    }
    let offset = 0.5 * (a - c) / denom;
    (x + offset * series.grid.spacing(), b - 0.25 * (a - c) * offset)
}

/// Default relative prominence used by [`vrs_splitting`].
pub const VRS_PROMINENCE: f64 = 0.02;

/// Distance between the highest peak below and the highest peak above
/// `expected_center`.
pub fn vrs_splitting(series: &SpectrumSeries, expected_center: f64) -> Result<f64, AnalysisError> {
    vrs_splitting_within(series, expected_center, f64::INFINITY)
}

/// As [`vrs_splitting`], restricted to peaks within `half_window` of the
/// expected center.
pub fn vrs_splitting_within(series: &SpectrumSeries, expected_center: f64, half_window: f64) -> Result<f64, AnalysisError> {
    let peaks = find_peaks(series, VRS_PROMINENCE)?;
    let near = |p: &&Peak| (p.center - expected_center).abs() <= half_window;
    let below = highest(peaks.peaks.iter().filter(near).filter(|p| p.center < expected_center));
    let above = highest(peaks.peaks.iter().filter(near).filter(|p| p.center > expected_center));
    match (below, above) {
        (Some(l), Some(u)) => Ok(u.center - l.center),
        _ => Err(AnalysisError::PeaksNotFound(expected_center)),
    }
}

fn highest<'a>(it: impl Iterator<Item = &'a Peak>) -> Option<&'a Peak> {
    it.max_by(|a, b| a.height.total_cmp(&b.height))
}

/// Settings for [`classify_triplet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripletOptions {
    /// Only peaks within this distance of the cavity are considered.
    pub half_window: f64,
    pub min_prominence: f64,
}

impl Default for TripletOptions {
    fn default() -> Self {
        Self { half_window: f64::INFINITY, min_prominence: 0.01 }
    }
}

/// Labels a VRS doublet and, when present, the bare-cavity peak between it.
pub fn classify_triplet(series: &SpectrumSeries, cavity_position: f64) -> PeakSet {
    classify_triplet_with(series, cavity_position, TripletOptions::default())
}

pub fn classify_triplet_with(series: &SpectrumSeries, cavity_position: f64, opts: TripletOptions) -> PeakSet {
    let Ok(all) = find_peaks(series, opts.min_prominence) else {
        return PeakSet::default();
    };
    let mut peaks: Vec<Peak> =
        all.peaks.into_iter().filter(|p| (p.center - cavity_position).abs() <= opts.half_window).collect();
    if peaks.is_empty() {
        return PeakSet { peaks };
    }
    let nearest = (0..peaks.len())
        .min_by(|&a, &b| {
            (peaks[a].center - cavity_position).abs().total_cmp(&(peaks[b].center - cavity_position).abs())
        })
        .unwrap();
    let highest_in = |range: std::ops::Range<usize>, peaks: &[Peak]| {
        range.max_by(|&a, &b| peaks[a].height.total_cmp(&peaks[b].height))
    };
    let left = highest_in(0..nearest, &peaks);
    let right = highest_in(nearest + 1..peaks.len(), &peaks);
    match (left, right) {
        (Some(l), Some(r)) => {
            peaks[l].label = PeakLabel::RMinus;
            peaks[nearest].label = PeakLabel::Center;
            peaks[r].label = PeakLabel::RPlus;
        }
        _ => {
            // no bracketing pair around the nearest peak: the two highest
            // peaks form the doublet
            let mut order: Vec<usize> = (0..peaks.len()).collect();
            order.sort_by(|&a, &b| peaks[b].height.total_cmp(&peaks[a].height));
            if order.len() >= 2 {
                let (a, b) = (order[0].min(order[1]), order[0].max(order[1]));
                peaks[a].label = PeakLabel::RMinus;
                peaks[b].label = PeakLabel::RPlus;
            }
        }
    }
    PeakSet { peaks }
}
