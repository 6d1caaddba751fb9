//! Model parameters.
//!
//! Internal units: energies and rates in μeV with ħ = 1, so a rate stored as
//! `gamma_cav` means ħΓ_cav. Incoherent processes are quoted in the literature
//! as full rates (2ħΓ_cav, 2ħP, ...); the fields here hold the half-rates that
//! appear as Lindblad prefactors. Conversion happens once, in the config
//! parser and in [`ModelParams::table_one`].

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

/// Bohr magneton in μeV/T.
pub const MU_B: f64 = 57.883818;

/// hc in μeV·nm, used only for wavelength axes.
pub const HC_UEV_NM: f64 = 1.239_841_984e9;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be finite (got {value})")]
    NotFinite { name: &'static str, value: f64 },
    #[error("p_max must be at least 1 when the light-matter coupling is nonzero")]
    NoPhotonSpace,
    #[error("lambda_ref must be positive (got {0})")]
    BadWavelength(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Electron-electron Coulomb repulsion.
    pub j_ee: f64,
    /// Hole-hole Coulomb repulsion.
    pub j_hh: f64,
    /// Electron-hole Coulomb attraction (enters with a minus sign).
    pub j_eh: f64,
    /// Bright-dark exchange splitting.
    pub delta0: f64,
    /// Bright-exciton fine-structure parameter.
    pub delta1: f64,
    /// Dark-exciton fine-structure parameter.
    pub delta2: f64,
    /// ħΓ_cav.
    pub gamma_cav: f64,
    /// ħΓ_spon.
    pub gamma_spon: f64,
    /// ħγ_phase for electrons.
    pub gamma_phase_e: f64,
    /// ħγ_phase for holes.
    pub gamma_phase_h: f64,
    /// ħP, injection per spin channel and species.
    pub pump: f64,
    /// ħg.
    pub g: f64,
    /// Cavity polarization angle from the x axis, rad.
    pub theta_cav: f64,
    /// Detuning of the bare (Coulomb- and exchange-free) pair transition from
    /// the cavity.
    pub delta_omega_bx: f64,
    /// Overhauser field (x, y, z) in mT.
    pub overhauser_mt: [f64; 3],
    /// Electron g-factor.
    pub g_e: f64,
    /// ħγ_reso, half the spectral resolution.
    pub gamma_reso: f64,
    /// Fock cutoff.
    pub p_max: usize,
    /// Cavity wavelength for axis conversion, nm.
    pub lambda_ref: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::table_one()
    }
}

impl ModelParams {
    /// Standard parameter set. The cavity sits on the y-polarized bright
    /// exciton line.
    pub fn table_one() -> Self {
        let mut p = Self {
            j_ee: 26_000.0,
            j_hh: 30_000.0,
            j_eh: 29_000.0,
            delta0: 250.0,
            delta1: -30.0,
            delta2: -10.0,
            gamma_cav: 69.0 / 2.0,
            gamma_spon: 0.044 / 2.0,
            gamma_phase_e: 15.0 / 2.0,
            gamma_phase_h: 15.0 / 2.0,
            pump: 0.033 / 2.0,
            g: 210.0 / 2.0,
            theta_cav: FRAC_PI_2,
            delta_omega_bx: 0.0,
            overhauser_mt: [0.0; 3],
            // no value is given for InAs in the source model; typical magnitude
            g_e: 0.6,
            gamma_reso: 0.0,
            p_max: 2,
            lambda_ref: 920.0,
        };
        p.delta_omega_bx = p.default_detuning();
        p
    }

    /// `delta_omega_bx` that puts the y-polarized bright exciton on the cavity.
    pub fn default_detuning(&self) -> f64 {
        self.j_eh - self.delta0 / 2.0 - self.delta1 / 2.0
    }

    /// Total pair dephasing ħ(γ_e + γ_h).
    pub fn gamma_phase(&self) -> f64 {
        self.gamma_phase_e + self.gamma_phase_h
    }

    /// Splits a total pair dephasing rate equally between electrons and holes.
    pub fn set_gamma_phase(&mut self, total: f64) {
        self.gamma_phase_e = total / 2.0;
        self.gamma_phase_h = total / 2.0;
    }

    /// Overhauser field in tesla.
    pub fn overhauser_tesla(&self) -> [f64; 3] {
        self.overhauser_mt.map(|b| b * 1e-3)
    }

    /// Cavity photon energy in μeV, used for the wavelength axis.
    pub fn reference_energy(&self) -> f64 {
        HC_UEV_NM / self.lambda_ref
    }

    /// Wavelength of a rotating-frame energy offset, nm.
    pub fn wavelength_nm(&self, omega: f64) -> f64 {
        self.lambda_ref * (1.0 - omega / self.reference_energy())
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let nonneg = [
            ("J_ee", self.j_ee),
            ("J_hh", self.j_hh),
            ("J_eh", self.j_eh),
            ("two_hbar_Gamma_cav", self.gamma_cav),
            ("two_hbar_Gamma_spon", self.gamma_spon),
            ("two_hbar_gamma_phase_e", self.gamma_phase_e),
            ("two_hbar_gamma_phase_h", self.gamma_phase_h),
            ("two_hbar_P", self.pump),
            ("two_hbar_g", self.g),
            ("two_hbar_gamma_reso", self.gamma_reso),
        ];
        for (name, value) in nonneg {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
            if value < 0.0 {
                return Err(ParamError::Negative { name, value });
            }
        }
        let finite = [
            ("delta0", self.delta0),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("theta_cav", self.theta_cav),
            ("delta_omega_BX", self.delta_omega_bx),
            ("B_N", self.overhauser_mt[0]),
            ("B_N", self.overhauser_mt[1]),
            ("B_N", self.overhauser_mt[2]),
            ("g_e", self.g_e),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        if self.g > 0.0 && self.p_max == 0 {
            return Err(ParamError::NoPhotonSpace);
        }
        if !(self.lambda_ref > 0.0) {
            return Err(ParamError::BadWavelength(self.lambda_ref));
        }
        Ok(())
    }
}
