//! Emission spectra from the quantum regression theorem.
//!
//! For a channel operator `A` with radiative half-rate `Γ`,
//!
//! `S_A(ω) = (2Γ/π) Re Tr[A · ((γ_reso − iω) − L)⁻¹ (ρ_ss A†)]`,
//!
//! the Laplace transform of `C(τ) = Tr[A e^{Lτ}(ρ_ss A†)] = ⟨A†(0) A(τ)⟩`.
//! `ω` is an energy offset from the cavity in the rotating frame, and a
//! line of the model appears at its rotating-frame transition energy.
//! `ρ_ss A†` lies in the emission sector of the generator, so every solve is
//! done on that block.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::hilbert::{Operator, OperatorSet, Spin};
use crate::liouvillian::{vectorize, LindbladGenerator, LiouvillianError, SectorLabel, SuperOperator};
use crate::params::ModelParams;
use crate::steady_state::{expectation, steady_state, DensityMatrix, SteadyState, SteadyStateError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("resolvent is singular at ω = {omega} μeV")]
    SingularResolvent { omega: f64 },
    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),
    #[error("time span too short: t_max × slowest decay = {0:.3} < 10")]
    InadequateTimeSpan(f64),
    #[error("time integration unstable at τ = {0}")]
    Unstable(f64),
    #[error("spectra are sampled on different grids")]
    GridMismatch,
    #[error("invalid frequency grid: {0}")]
    BadGrid(String),
    #[error("source operator leaks out of the solve sector ({0:e})")]
    OutsideSector(f64),
    #[error(transparent)]
    Steady(#[from] SteadyStateError),
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
}

/// Uniform grid of energy offsets from the cavity, μeV.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    /// `count` points from `min` to `max` inclusive.
    pub fn uniform(min: f64, max: f64, count: usize) -> Result<Self, SpectrumError> {
        if count < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(SpectrumError::BadGrid(format!("need count ≥ 2 and min < max (got {min}..{max}, {count})")));
        }
        Ok(Self { start: min, step: (max - min) / (count - 1) as f64, count })
    }

    /// `count` points spanning `center ± half_width`.
    pub fn around(center: f64, half_width: f64, count: usize) -> Result<Self, SpectrumError> {
        Self::uniform(center - half_width, center + half_width, count)
    }

    /// ±3 meV around the cavity with 1200 points.
    pub fn figure_default() -> Self {
        Self::uniform(-3000.0, 3000.0, 1200).expect("static grid")
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn spacing(&self) -> f64 {
        self.step
    }

    pub fn min(&self) -> f64 {
        self.start
    }

    pub fn max(&self) -> f64 {
        self.value(self.count - 1)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Radiation channel of the emitted light.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Leakage through the cavity, operator `a`.
    Cav,
    /// Direct emission, x polarization, operator `B_x`.
    X,
    /// Direct emission, y polarization, operator `B_y`.
    Y,
    /// Direct emission, circular, operator `d_↓ c_↑`.
    L,
    /// Direct emission, circular, operator `d_↑ c_↓`.
    R,
    /// `X + Y`.
    Spon,
    /// `Cav + Spon`.
    Total,
}

impl Channel {
    pub const ALL: [Channel; 7] = [Channel::Cav, Channel::X, Channel::Y, Channel::L, Channel::R, Channel::Spon, Channel::Total];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Cav => "cav",
            Channel::X => "x",
            Channel::Y => "y",
            Channel::L => "L",
            Channel::R => "R",
            Channel::Spon => "spon",
            Channel::Total => "total",
        }
    }

    /// Channel operator, for the channels that have a single one.
    pub fn operator(self, ops: &OperatorSet) -> Option<Operator> {
        match self {
            Channel::Cav => Some(ops.a.clone()),
            Channel::X => Some(ops.composites.b_x.clone()),
            Channel::Y => Some(ops.composites.b_y.clone()),
            Channel::L => Some(ops.pair_annihilator(Spin::Up)),
            Channel::R => Some(ops.pair_annihilator(Spin::Down)),
            Channel::Spon | Channel::Total => None,
        }
    }

    /// Radiative half-rate that multiplies the correlator.
    pub fn rate(self, p: &ModelParams) -> f64 {
        match self {
            Channel::Cav => p.gamma_cav,
            _ => p.gamma_spon,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown channel `{s}` (expected cav, x, y, L, R, spon or total)"))
    }
}

/// Sampled spectrum of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSeries {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
    pub channel: Channel,
    /// Identifies the parameter set the series was computed from.
    pub fingerprint: String,
}

impl SpectrumSeries {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>, channel: Channel, fingerprint: String) -> Self {
        assert_eq!(grid.len(), values.len());
        Self { grid, values, channel, fingerprint }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Whether the series is non-negative up to roundoff.
    pub fn is_nonnegative(&self) -> bool {
        self.min() >= -1e-9 * self.max().abs()
    }

    /// Pointwise sum, tagged with `channel`.
    pub fn add(&self, other: &SpectrumSeries, channel: Channel) -> Result<SpectrumSeries, SpectrumError> {
        if self.grid != other.grid {
            return Err(SpectrumError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SpectrumSeries::new(self.grid.clone(), values, channel, self.fingerprint.clone()))
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.spacing())
    }

    /// Trapezoid integral over `[lo, hi]`, interpolating partial intervals.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        let h = self.grid.spacing();
        let mut total = 0.0;
        for i in 0..self.values.len() - 1 {
            let (x0, x1) = (self.grid.value(i), self.grid.value(i + 1));
            let a = x0.max(lo);
            let b = x1.min(hi);
            if b <= a {
                continue;
            }
            let f = |x: f64| self.values[i] + (self.values[i + 1] - self.values[i]) * (x - x0) / h;
            total += 0.5 * (f(a) + f(b)) * (b - a);
        }
        total
    }

    /// Copy scaled to unit maximum (unchanged if identically zero).
    pub fn normalized(&self) -> SpectrumSeries {
        let m = self.max();
        let mut out = self.clone();
        if m > 0.0 {
            out.values.iter_mut().for_each(|v| *v /= m);
        }
        out
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Short stable tag of a parameter set.
pub fn params_fingerprint(p: &ModelParams) -> String {
    // FNV-1a over the exact bit patterns
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for x in [
        p.j_ee,
        p.j_hh,
        p.j_eh,
        p.delta0,
        p.delta1,
        p.delta2,
        p.gamma_cav,
        p.gamma_spon,
        p.gamma_phase_e,
        p.gamma_phase_h,
        p.pump,
        p.g,
        p.theta_cav,
        p.delta_omega_bx,
        p.overhauser_mt[0],
        p.overhauser_mt[1],
        p.overhauser_mt[2],
        p.g_e,
        p.gamma_reso,
        p.lambda_ref,
    ] {
        eat(x.to_bits());
    }
    eat(p.p_max as u64);
    format!("{h:016x}")
}

/// How each resolvent value is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResolventMethod {
    /// One LU factorization per frequency.
    Direct,
    /// Reduce to Hessenberg form once, then an O(n²) solve per frequency.
    #[default]
    Hessenberg,
    /// Diagonalize once, sum over poles. Checked by its residual.
    Eigen,
}

impl FromStr for ResolventMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Self::Direct),
            "hessenberg" => Ok(Self::Hessenberg),
            "eigen" => Ok(Self::Eigen),
            _ => Err(format!("unknown resolvent method `{s}` (expected direct, hessenberg or eigen)")),
        }
    }
}

/// Largest accepted `‖LV − VΛ‖_max / ‖L‖_max` for the eigen method.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Unitary Hessenberg reduction `L = Q H Q†` by Householder reflections.
#[derive(Clone, Debug)]
pub struct HessenbergForm {
    n: usize,
    /// Row-major upper Hessenberg matrix.
    h: Vec<Complex64>,
    /// Unit reflector vectors; reflector `k` acts on indices `k+1..n`.
    reflectors: Vec<Vec<Complex64>>,
}

impl HessenbergForm {
    pub fn new(l: &Mat<Complex64>) -> Self {
        let n = l.nrows();
        let mut h: Vec<Complex64> = (0..n * n).map(|i| l[(i / n, i % n)]).collect();
        let mut reflectors = Vec::new();
        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let mut v: Vec<Complex64> = (0..m).map(|i| h[(k + 1 + i) * n + k]).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                reflectors.push(vec![ZERO; m]);
                continue;
            }
            let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { Complex64::new(1.0, 0.0) };
            v[0] += phase * norm;
            let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= vn);
            // left: rows k+1.. ← (I − 2vv†) rows
            for c in 0..n {
                let mut s = ZERO;
                for i in 0..m {
                    s += v[i].conj() * h[(k + 1 + i) * n + c];
                }
                let s = s * 2.0;
                for i in 0..m {
                    h[(k + 1 + i) * n + c] -= v[i] * s;
                }
            }
            // right: columns k+1.. ← columns (I − 2vv†)
            for r in 0..n {
                let row = &mut h[r * n..(r + 1) * n];
                let mut s = ZERO;
                for i in 0..m {
                    s += row[k + 1 + i] * v[i];
                }
                let s = s * 2.0;
                for i in 0..m {
                    row[k + 1 + i] -= s * v[i].conj();
                }
            }
            for i in 1..m {
                h[(k + 1 + i) * n + k] = ZERO;
            }
            reflectors.push(v);
        }
        Self { n, h, reflectors }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn h(&self, r: usize, c: usize) -> Complex64 {
        self.h[r * self.n + c]
    }

    /// `Q† x`.
    pub fn apply_q_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            reflect(&mut y[k + 1..], v);
        }
        y
    }

    /// `Q x`.
    pub fn apply_q(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            reflect(&mut y[k + 1..], v);
        }
        y
    }

    /// Solves `(z − H) y = b` by Gaussian elimination with pivoting between
    /// adjacent rows. Returns `None` on an exactly singular pivot.
    pub fn solve_shifted(&self, z: Complex64, b: &[Complex64]) -> Option<Vec<Complex64>> {
        let n = self.n;
        let mut m: Vec<Complex64> = self.h.iter().map(|x| -x).collect();
        for i in 0..n {
            m[i * n + i] += z;
        }
        let mut y = b.to_vec();
        for k in 0..n.saturating_sub(1) {
            if m[(k + 1) * n + k].norm() > m[k * n + k].norm() {
                for c in k..n {
                    m.swap(k * n + c, (k + 1) * n + c);
                }
                y.swap(k, k + 1);
            }
            let piv = m[k * n + k];
            if piv == ZERO {
                return None;
            }
            let f = m[(k + 1) * n + k] / piv;
            if f != ZERO {
                for c in k..n {
                    let t = m[k * n + c];
                    m[(k + 1) * n + c] -= f * t;
                }
                let t = y[k];
                y[k + 1] -= f * t;
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..n {
                s -= m[k * n + c] * y[c];
            }
            let piv = m[k * n + k];
            if piv == ZERO {
                return None;
            }
            y[k] = s / piv;
        }
        if y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Some(y)
        } else {
            None
        }
    }
}

fn reflect(y: &mut [Complex64], v: &[Complex64]) {
    let mut s = ZERO;
    for (a, b) in v.iter().zip(y.iter()) {
        s += a.conj() * b;
    }
    let s = s * 2.0;
    for (a, b) in v.iter().zip(y.iter_mut()) {
        *b -= a * s;
    }
}

/// Source and functional of one regression problem restricted to the sector
/// of `l`: `S(ω) = (2Γ/π) Re w·((γ − iω) − L)⁻¹ b`.
#[derive(Clone, Debug)]
pub struct Correlator {
    /// `vec(ρ A†)` in sector coordinates.
    pub source: Vec<Complex64>,
    /// Trace functional `X ↦ Tr(A X)` in sector coordinates.
    pub functional: Vec<Complex64>,
    pub rate: f64,
}

impl Correlator {
    pub fn new(l: &SuperOperator, rho: &DensityMatrix, a: &Operator, rate: f64) -> Result<Self, SpectrumError> {
        let space = l.space;
        let dim = space.dim();
        let src = vectorize((rho.operator() * &a.adjoint()).matrix());
        let leak = l.sector.leakage(&src);
        if leak > 0.0 {
            return Err(SpectrumError::OutsideSector(leak));
        }
        let am = a.matrix();
        // Tr(A X) = Σ_{r,c} A[c,r] X[r,c]
        let functional = l
            .sector
            .indices
            .iter()
            .map(|&v| {
                let (r, c) = (v % dim, v / dim);
                am[(c, r)]
            })
            .collect();
        Ok(Self { source: l.sector.restrict(&src), functional, rate })
    }

    fn value(&self, x: &[Complex64]) -> Complex64 {
        self.functional.iter().zip(x).map(|(w, y)| w * y).sum()
    }

    fn scale(&self) -> f64 {
        2.0 * self.rate / std::f64::consts::PI
    }

    /// `C(0) = ⟨A†A⟩`.
    pub fn initial(&self) -> Complex64 {
        self.value(&self.source)
    }
}

/// Precomputed factorization of one sector generator.
pub struct ResolventSolver<'a> {
    l: &'a SuperOperator,
    method: ResolventMethod,
    hess: OnceLock<HessenbergForm>,
    eigen: OnceLock<Result<EigenForm, String>>,
}

struct EigenForm {
    values: Vec<Complex64>,
    vectors: Mat<Complex64>,
    lu: faer::linalg::solvers::PartialPivLu<Complex64>,
}

impl<'a> ResolventSolver<'a> {
    pub fn new(l: &'a SuperOperator, method: ResolventMethod) -> Self {
        Self { l, method, hess: OnceLock::new(), eigen: OnceLock::new() }
    }

    fn hessenberg(&self) -> &HessenbergForm {
        self.hess.get_or_init(|| HessenbergForm::new(&self.l.matrix))
    }

    fn eigen(&self) -> Result<&EigenForm, SpectrumError> {
        let form = self.eigen.get_or_init(|| {
            let e = self.l.matrix.eigen().map_err(|e| format!("{e:?}"))?;
            let values: Vec<Complex64> = (0..self.l.size()).map(|i| e.S()[i]).collect();
            let vectors = e.U().to_owned();
            let n = values.len();
            let lambda = Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO });
            let resid = (&self.l.matrix * &vectors - &vectors * &lambda).norm_max();
            let rel = resid / self.l.max_abs().max(f64::MIN_POSITIVE);
            if rel > EIGEN_RESIDUAL_TOL {
                return Err(format!("residual {rel:e}"));
            }
            let lu = vectors.partial_piv_lu();
            Ok(EigenForm { values, vectors, lu })
        });
        form.as_ref().map_err(|e| SpectrumError::EigenFailure(e.clone()))
    }

    /// Spectrum values of `corr` on `grid`, evaluated in parallel.
    pub fn spectrum(&self, corr: &Correlator, grid: &FrequencyGrid, gamma_reso: f64) -> Result<Vec<f64>, SpectrumError> {
        let n = self.l.size();
        let scale = corr.scale();
        if corr.source.iter().all(|z| *z == ZERO) {
            return Ok(vec![0.0; grid.len()]);
        }
        match self.method {
            ResolventMethod::Direct => (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let omega = grid.value(i);
                    let z = Complex64::new(gamma_reso, -omega);
                    let m = Mat::from_fn(n, n, |r, c| if r == c { z - self.l.matrix[(r, c)] } else { -self.l.matrix[(r, c)] });
                    let mut rhs = Mat::from_fn(n, 1, |r, _| corr.source[r]);
                    m.partial_piv_lu().solve_in_place(rhs.as_mut());
                    let x: Vec<Complex64> = (0..n).map(|r| rhs[(r, 0)]).collect();
                    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        return Err(SpectrumError::SingularResolvent { omega });
                    }
                    Ok(scale * corr.value(&x).re)
                })
                .collect(),
            ResolventMethod::Hessenberg => {
                let hf = self.hessenberg();
                let b = hf.apply_q_adjoint(&corr.source);
                // w·(Q y) = (Qᵀ w)·y, and Qᵀ w = conj(Q† conj w)
                let wc: Vec<Complex64> = corr.functional.iter().map(|z| z.conj()).collect();
                let w: Vec<Complex64> = hf.apply_q_adjoint(&wc).iter().map(|z| z.conj()).collect();
                (0..grid.len())
                    .into_par_iter()
                    .map(|i| {
                        let omega = grid.value(i);
                        let y = hf
                            .solve_shifted(Complex64::new(gamma_reso, -omega), &b)
                            .ok_or(SpectrumError::SingularResolvent { omega })?;
                        Ok(scale * w.iter().zip(&y).map(|(a, b)| a * b).sum::<Complex64>().re)
                    })
                    .collect()
            }
            ResolventMethod::Eigen => {
                let ef = self.eigen()?;
                let mut coef = Mat::from_fn(n, 1, |r, _| corr.source[r]);
                ef.lu.solve_in_place(coef.as_mut());
                let weights: Vec<Complex64> = (0..n)
                    .map(|k| {
                        let wv: Complex64 = (0..n).map(|r| corr.functional[r] * ef.vectors[(r, k)]).sum();
                        wv * coef[(k, 0)]
                    })
                    .collect();
                (0..grid.len())
                    .map(|i| {
                        let omega = grid.value(i);
                        let z = Complex64::new(gamma_reso, -omega);
                        let mut s = ZERO;
                        for (wk, lk) in weights.iter().zip(&ef.values) {
                            let d = z - lk;
                            if d == ZERO {
                                return Err(SpectrumError::SingularResolvent { omega });
                            }
                            s += wk / d;
                        }
                        Ok(scale * s.re)
                    })
                    .collect()
            }
        }
    }
}

/// Generator block on which emission correlators evolve.
pub fn emission_generator(ops: &OperatorSet, params: &ModelParams) -> Result<SuperOperator, SpectrumError> {
    Ok(LindbladGenerator::model(ops, params)?.sector_superoperator(SectorLabel::EMISSION))
}

/// `S_A` for a generator `l` (full space or a sector containing `ρ A†`).
pub fn resolvent_spectrum(
    l: &SuperOperator,
    rho: &DensityMatrix,
    a: &Operator,
    rate: f64,
    grid: &FrequencyGrid,
    gamma_reso: f64,
    method: ResolventMethod,
) -> Result<Vec<f64>, SpectrumError> {
    let corr = Correlator::new(l, rho, a, rate)?;
    ResolventSolver::new(l, method).spectrum(&corr, grid, gamma_reso)
}

/// Everything needed to evaluate spectra at one parameter point.
pub struct EmissionModel {
    pub params: ModelParams,
    pub ops: OperatorSet,
    pub steady: SteadyState,
    pub emission: SuperOperator,
    pub method: ResolventMethod,
    hess: OnceLock<HessenbergForm>,
}

impl EmissionModel {
    pub fn new(params: &ModelParams) -> Result<Self, SpectrumError> {
        Self::with_method(params, ResolventMethod::default())
    }

    pub fn with_method(params: &ModelParams, method: ResolventMethod) -> Result<Self, SpectrumError> {
        let ops = OperatorSet::new(crate::hilbert::enumerate_basis(params.p_max));
        let steady = steady_state(&ops, params)?;
        let emission = emission_generator(&ops, params)?;
        Ok(Self { params: params.clone(), ops, steady, emission, method, hess: OnceLock::new() })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.steady.rho
    }

    pub fn correlator(&self, channel: Channel) -> Result<Correlator, SpectrumError> {
        let a = channel.operator(&self.ops).expect("composite channel has no single operator");
        Correlator::new(&self.emission, &self.steady.rho, &a, channel.rate(&self.params))
    }

    /// `⟨A†A⟩` of a single-operator channel.
    pub fn occupation(&self, channel: Channel) -> f64 {
        let a = channel.operator(&self.ops).expect("composite channel has no single operator");
        expectation(&self.steady.rho, &(&a.adjoint() * &a)).expect("same space").re
    }

    fn solver(&self) -> ResolventSolver<'_> {
        let s = ResolventSolver::new(&self.emission, self.method);
        if self.method == ResolventMethod::Hessenberg {
            let form = self.hess.get_or_init(|| HessenbergForm::new(&self.emission.matrix)).clone();
            let _ = s.hess.set(form);
        }
        s
    }

    /// Spectrum of any channel, composite ones as sums.
    pub fn spectrum(&self, channel: Channel, grid: &FrequencyGrid) -> Result<SpectrumSeries, SpectrumError> {
        let parts: &[Channel] = match channel {
            Channel::Spon => &[Channel::X, Channel::Y],
            Channel::Total => &[Channel::Cav, Channel::X, Channel::Y],
            _ => &[channel],
        };
        let solver = self.solver();
        let mut values = vec![0.0; grid.len()];
        for &part in parts {
            let v = solver.spectrum(&self.correlator(part)?, grid, self.params.gamma_reso)?;
            values.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        Ok(SpectrumSeries::new(grid.clone(), values, channel, params_fingerprint(&self.params)))
    }

    /// Several channels sharing one factorization.
    pub fn spectra(&self, channels: &[Channel], grid: &FrequencyGrid) -> Result<Vec<SpectrumSeries>, SpectrumError> {
        channels.iter().map(|&c| self.spectrum(c, grid)).collect()
    }
}

pub fn s_cav(model: &EmissionModel, grid: &FrequencyGrid) -> Result<SpectrumSeries, SpectrumError> {
    model.spectrum(Channel::Cav, grid)
}

pub fn s_x(model: &EmissionModel, grid: &FrequencyGrid) -> Result<SpectrumSeries, SpectrumError> {
    model.spectrum(Channel::X, grid)
}

pub fn s_y(model: &EmissionModel, grid: &FrequencyGrid) -> Result<SpectrumSeries, SpectrumError> {
    model.spectrum(Channel::Y, grid)
}

pub fn s_l(model: &EmissionModel, grid: &FrequencyGrid) -> Result<SpectrumSeries, SpectrumError> {
    model.spectrum(Channel::L, grid)
}

pub fn s_r(model: &EmissionModel, grid: &FrequencyGrid) -> Result<SpectrumSeries, SpectrumError> {
    model.spectrum(Channel::R, grid)
}

/// `S_cav + S_x + S_y` from separately computed series.
pub fn s_total(cav: &SpectrumSeries, x: &SpectrumSeries, y: &SpectrumSeries) -> Result<SpectrumSeries, SpectrumError> {
    cav.add(x, Channel::Total)?.add(y, Channel::Total)
}

/// Sampled correlator `C(τ) e^{−γ_reso τ}` from RK4 integration.
#[derive(Clone, Debug)]
pub struct CorrelationTrace {
    pub dt: f64,
    pub values: Vec<Complex64>,
    /// Derivative at τ = 0 and at the last sample.
    pub slope_start: Complex64,
    pub slope_end: Complex64,
}

/// Integrates `x' = (L − γ_reso) x` from the correlator source.
pub fn correlation_trace(
    l: &SuperOperator,
    corr: &Correlator,
    gamma_reso: f64,
    t_max: f64,
    dt: f64,
) -> Result<CorrelationTrace, SpectrumError> {
    let steps = (t_max / dt).round() as usize;
    let deriv = |x: &[Complex64]| -> Vec<Complex64> {
        let mut y = l.apply(x);
        y.iter_mut().zip(x).for_each(|(a, b)| *a -= b * gamma_reso);
        y
    };
    let norm = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let limit = 1e3 * norm(&corr.source).max(f64::MIN_POSITIVE);
    let mut x = corr.source.clone();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(corr.value(&x));
    let slope_start = corr.value(&deriv(&x));
    let axpy = |x: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> { x.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    for step in 1..=steps {
        let k1 = deriv(&x);
        let k2 = deriv(&axpy(&x, &k1, dt / 2.0));
        let k3 = deriv(&axpy(&x, &k2, dt / 2.0));
        let k4 = deriv(&axpy(&x, &k3, dt));
        for i in 0..x.len() {
            x[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
        let nx = norm(&x);
        if !nx.is_finite() || nx > limit {
            return Err(SpectrumError::Unstable(step as f64 * dt));
        }
        values.push(corr.value(&x));
    }
    let slope_end = corr.value(&deriv(&x));
    Ok(CorrelationTrace { dt, values, slope_start, slope_end })
}

/// Reference spectrum from direct time integration of the correlator and a
/// trapezoid Fourier integral with endpoint and exponential-tail corrections.
/// Meant for validation only.
#[allow(clippy::too_many_arguments)]
pub fn time_domain_oracle(
    l: &SuperOperator,
    rho: &DensityMatrix,
    a: &Operator,
    rate: f64,
    grid: &[f64],
    gamma_reso: f64,
    t_max: f64,
    dt: f64,
) -> Result<Vec<f64>, SpectrumError> {
    let slowest = l
        .eigenvalues()
        .iter()
        .map(|z| -z.re)
        .fold(f64::MAX, f64::min)
        .max(0.0)
        + gamma_reso;
    if t_max * slowest < 10.0 {
        return Err(SpectrumError::InadequateTimeSpan(t_max * slowest));
    }
    let corr = Correlator::new(l, rho, a, rate)?;
    let trace = correlation_trace(l, &corr, gamma_reso, t_max, dt)?;
    Ok(grid.iter().map(|&omega| corr.scale() * fourier_half_line(&trace, omega).re).collect())
}

/// `∫₀^∞ e^{iωτ} C(τ) dτ` from samples.
pub fn fourier_half_line(trace: &CorrelationTrace, omega: f64) -> Complex64 {
    let h = trace.dt;
    let n = trace.values.len() - 1;
    let t_end = h * n as f64;
    let iw = Complex64::new(0.0, omega);
    let f = |k: usize| (iw * (h * k as f64)).exp() * trace.values[k];
    let mut sum = (f(0) + f(n)) * 0.5;
    for k in 1..n {
        sum += f(k);
    }
    let mut integral = sum * h;
    // Euler–Maclaurin h² endpoint term
    let d0 = iw * trace.values[0] + trace.slope_start;
    let d1 = (iw * t_end).exp() * (iw * trace.values[n] + trace.slope_end);
    integral -= (d1 - d0) * (h * h / 12.0);
    // tail beyond t_max assuming local exponential decay of C
    let c_end = trace.values[n];
    if c_end != ZERO {
        let mu = trace.slope_end / c_end;
        if mu.re < 0.0 {
            integral -= f(n) / (iw + mu);
        }
    }
    integral
}

/// Outcome of comparing `∫S dω` with `2Γ⟨A†A⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SumRuleReport {
    pub integral: f64,
    /// Integral plus the Lorentzian tail beyond both grid edges.
    pub corrected_integral: f64,
    pub expected: f64,
}

impl SumRuleReport {
    pub fn raw_discrepancy(&self) -> f64 {
        relative_gap(self.integral, self.expected)
    }

    pub fn discrepancy(&self) -> f64 {
        relative_gap(self.corrected_integral, self.expected)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Sum rule for a series computed at `γ_reso = 0`. The correction assumes
/// the Lorentzian `1/(ω − ω̄)²` tail of the spectrum outside the grid, with
/// `ω̄` the spectral centroid.
pub fn sum_rule_check(series: &SpectrumSeries, rho: &DensityMatrix, a: &Operator, rate: f64) -> SumRuleReport {
    let integral = series.integral();
    let expected = 2.0 * rate * expectation(rho, &(&a.adjoint() * a)).expect("same space").re;
    let grid = &series.grid;
    let mut corrected = integral;
    if integral > 0.0 {
        let moment: f64 =
            trapezoid(&series.values.iter().enumerate().map(|(i, v)| v * grid.value(i)).collect::<Vec<_>>(), grid.spacing());
        let centroid = moment / integral;
        let n = series.values.len();
        corrected += series.values[0] * (centroid - grid.min()).abs();
        corrected += series.values[n - 1] * (grid.max() - centroid).abs();
    }
    SumRuleReport { integral, corrected_integral: corrected, expected }
}
