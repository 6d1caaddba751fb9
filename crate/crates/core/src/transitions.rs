//! Closed-form positions of the optical lines in the rotating frame.
//!
//! Energies are offsets from the cavity (μeV) at zero light-matter coupling
//! and zero Overhauser field. They are used to place the cavity on a line
//! and to label spectral features; the dynamics never read them.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Line {
    /// Positive trion to single hole (two circular components, degenerate).
    XPlus,
    /// Negative trion to single electron.
    XMinus,
    /// x-polarized bright exciton to ground state.
    BrightX,
    /// y-polarized bright exciton to ground state.
    BrightY,
    /// Biexciton to x-polarized bright exciton.
    BiexcitonX,
    /// Biexciton to y-polarized bright exciton.
    BiexcitonY,
    /// Dark-exciton doublet members (no direct optical coupling).
    DarkA,
    DarkB,
}

impl Line {
    pub const ALL: [Line; 8] = [
        Line::XPlus,
        Line::XMinus,
        Line::BrightX,
        Line::BrightY,
        Line::BiexcitonX,
        Line::BiexcitonY,
        Line::DarkA,
        Line::DarkB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Line::XPlus => "X+",
            Line::XMinus => "X-",
            Line::BrightX => "BXx",
            Line::BrightY => "BXy",
            Line::BiexcitonX => "XXx",
            Line::BiexcitonY => "XXy",
            Line::DarkA => "DXa",
            Line::DarkB => "DXb",
        }
    }

    /// Energy offset from the cavity.
    pub fn energy(self, p: &ModelParams) -> f64 {
        let pair = p.delta_omega_bx - p.j_eh;
        let bright_y = p.delta0 / 2.0 + p.delta1 / 2.0;
        let bright_x = p.delta0 / 2.0 - p.delta1 / 2.0;
        let biexciton = 2.0 * p.delta_omega_bx + p.j_ee + p.j_hh - 4.0 * p.j_eh;
        match self {
            Line::XPlus => p.delta_omega_bx + p.j_hh - 2.0 * p.j_eh,
            Line::XMinus => p.delta_omega_bx + p.j_ee - 2.0 * p.j_eh,
            Line::BrightX => pair + bright_x,
            Line::BrightY => pair + bright_y,
            Line::BiexcitonX => biexciton - (pair + bright_x),
            Line::BiexcitonY => biexciton - (pair + bright_y),
            Line::DarkA => pair - p.delta0 / 2.0 + p.delta2 / 2.0,
            Line::DarkB => pair - p.delta0 / 2.0 - p.delta2 / 2.0,
        }
    }

    /// Coupling strength of the transition to the cavity mode, ħg_eff.
    pub fn cavity_coupling(self, p: &ModelParams) -> f64 {
        let (s, c) = p.theta_cav.sin_cos();
        match self {
            Line::XPlus | Line::XMinus => p.g,
            Line::BrightX | Line::BiexcitonX => SQRT_2 * p.g * c.abs(),
            Line::BrightY | Line::BiexcitonY => SQRT_2 * p.g * s.abs(),
            Line::DarkA | Line::DarkB => 0.0,
        }
    }

    /// Whether the line is circularly polarized (and therefore appears in
    /// both linear spontaneous-emission channels).
    pub fn is_circular(self) -> bool {
        matches!(self, Line::XPlus | Line::XMinus)
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Line {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Line::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown line `{s}` (expected one of X+, X-, BXx, BXy, XXx, XXy, DXa, DXb)"))
    }
}

/// `delta_omega_bx` that puts `line` at `offset` μeV from the cavity
/// (`offset = E_line − E_cav`).
pub fn detuning_for_line(params: &ModelParams, line: Line, offset: f64) -> f64 {
    // every line energy has unit slope in delta_omega_bx
    let mut p = params.clone();
    p.delta_omega_bx = 0.0;
    offset - line.energy(&p)
}

/// Copy of `params` with the cavity placed `cavity_minus_line` μeV above `line`.
pub fn tuned_to(params: &ModelParams, line: Line, cavity_minus_line: f64) -> ModelParams {
    let mut p = params.clone();
    p.delta_omega_bx = detuning_for_line(params, line, -cavity_minus_line);
    p
}
