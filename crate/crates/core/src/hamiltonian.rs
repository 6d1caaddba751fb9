//! Coherent part of the model in the frame rotating at the cavity frequency.
//!
//! The frame transformation uses the conserved excitation number
//! `K = a†a + (N_e + N_h)/2`: every carrier is assigned half of the bare pair
//! detuning `delta_omega_bx`, the cavity has no diagonal term, and the
//! light-matter coupling becomes time independent. Transition energies of the
//! individual charge complexes then emerge from the frame term plus the
//! Coulomb and exchange operators.

use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{HilbertSpace, Operator, OperatorSet};
use crate::params::{ModelParams, MU_B};

/// Tolerance on `max |H - H†|` in μeV.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("assembled Hamiltonian is not Hermitian (max |H - H†| = {0:e} μeV)")]
    NonHermitian(f64),
}

/// `J_ee n_↓n_↑ + J_hh m_↓m_↑ − J_eh (n_↓+n_↑)(m_↓+m_↑)`.
pub fn build_coulomb(space: HilbertSpace, params: &ModelParams) -> Operator {
    Operator::diagonal(space, |s| {
        let ch = s.charge;
        let ne = ch.electrons() as f64;
        let nh = ch.holes() as f64;
        let ee = if ch.electrons() == 2 { params.j_ee } else { 0.0 };
        let hh = if ch.holes() == 2 { params.j_hh } else { 0.0 };
        ee + hh - params.j_eh * ne * nh
    })
}

/// Electron-hole exchange:
/// `−2δ0 s_h^z s_e^z + δ1 (s_h^+ s_e^− + s_h^− s_e^+)/2 + δ2 (s_h^+ s_e^+ + s_h^− s_e^−)/2`.
pub fn build_exchange(ops: &OperatorSet, params: &ModelParams) -> Operator {
    let c = &ops.composites;
    let zz = &c.sh_z * &c.se_z;
    let bright = &(&c.sh_plus * &c.se_minus) + &(&c.sh_minus * &c.se_plus);
    let dark = &(&c.sh_plus * &c.se_plus) + &(&c.sh_minus * &c.se_minus);
    let mut h = zz.scale_real(-2.0 * params.delta0);
    h += &bright.scale_real(params.delta1 / 2.0);
    h += &dark.scale_real(params.delta2 / 2.0);
    h
}

/// Circular coupling constants `(g_{+1}, g_{−1})` with `g_{±1} = ∓g(cos θ ∓ i sin θ)`.
pub fn circular_couplings(params: &ModelParams) -> (Complex64, Complex64) {
    let (s, c) = params.theta_cav.sin_cos();
    let g = params.g;
    (-g * Complex64::new(c, -s), g * Complex64::new(c, s))
}

/// Light-matter coupling in circular form:
/// `c_↓† d_↑† a g_{+1} + c_↑† d_↓† a g_{−1} + H.c.`
pub fn build_light_matter(ops: &OperatorSet, params: &ModelParams) -> Operator {
    let (g_plus, g_minus) = circular_couplings(params);
    let plus = &(&ops.c_down.adjoint() * &ops.d_up.adjoint()) * &ops.a;
    let minus = &(&ops.c_up.adjoint() * &ops.d_down.adjoint()) * &ops.a;
    let half = &plus.scale(g_plus) + &minus.scale(g_minus);
    &half + &half.adjoint()
}

/// Light-matter coupling written through the linearly polarized bright
/// operators: `√2 g cos θ B_x† a + i√2 g sin θ B_y† a + H.c.`. Equal to
/// [`build_light_matter`] as a matrix; kept as an independent construction.
pub fn build_light_matter_linear(ops: &OperatorSet, params: &ModelParams) -> Operator {
    let (s, c) = params.theta_cav.sin_cos();
    let root2g = std::f64::consts::SQRT_2 * params.g;
    let x = &ops.composites.b_x.adjoint() * &ops.a;
    let y = &ops.composites.b_y.adjoint() * &ops.a;
    let half = &x.scale_real(root2g * c) + &y.scale(Complex64::new(0.0, root2g * s));
    &half + &half.adjoint()
}

/// Rotating-frame term `delta_omega_bx (N_e + N_h)/2`.
pub fn build_frame_detuning(space: HilbertSpace, params: &ModelParams) -> Operator {
    Operator::diagonal(space, |s| params.delta_omega_bx * s.charge.carriers() as f64 / 2.0)
}

/// Electron Zeeman coupling to the Overhauser field,
/// `g_e μ_B (B_x s_e^x + B_y s_e^y + B_z s_e^z)`. Holes are unaffected.
pub fn build_overhauser(ops: &OperatorSet, params: &ModelParams) -> Operator {
    let [bx, by, bz] = params.overhauser_tesla();
    let k = params.g_e * MU_B;
    let c = &ops.composites;
    let mut h = c.se_x.scale_real(k * bx);
    h += &c.se_y.scale_real(k * by);
    h += &c.se_z.scale_real(k * bz);
    h
}

/// Full rotating-frame Hamiltonian `H_frame + H_CL + H_EX + H_LM + H_hf`.
pub fn assemble_hamiltonian(ops: &OperatorSet, params: &ModelParams) -> Result<Operator, HamiltonianError> {
    let space = ops.space;
    let mut h = build_frame_detuning(space, params);
    h += &build_coulomb(space, params);
    h += &build_exchange(ops, params);
    h += &build_light_matter(ops, params);
    h += &build_overhauser(ops, params);
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(HamiltonianError::NonHermitian(defect));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_basis, BasisState, ChargeConfig};
    use faer::{Mat, Side};
    use proptest::prelude::*;

    fn ops(p_max: usize) -> OperatorSet {
        OperatorSet::new(enumerate_basis(p_max))
    }

    fn diag(op: &Operator, charge: ChargeConfig) -> f64 {
        let s = BasisState::new(charge, 0);
        op.element(s, s).re
    }

    #[test]
    fn coulomb_values() {
        let p = ModelParams::table_one();
        let h = build_coulomb(enumerate_basis(1), &p);
        assert_eq!(diag(&h, ChargeConfig::BIEXCITON), 26_000.0 + 30_000.0 - 4.0 * 29_000.0);
        assert_eq!(diag(&h, ChargeConfig::GS), 0.0);
        assert_eq!(diag(&h, ChargeConfig::BRIGHT_PLUS), -29_000.0);
        // diagonal, so it commutes with every number operator
        let o = ops(1);
        for n in [&o.composites.n_up, &o.composites.n_down, &o.composites.m_up, &o.composites.m_down] {
            assert!(h.commutator(n).max_abs() < 1e-9);
        }
    }

    /// Exchange block eigenvalues against the closed form ±δ0/2 ± δ{1,2}/2.
    #[test]
    fn exchange_block_spectrum() {
        let p = ModelParams::table_one();
        let o = ops(0);
        let h = build_exchange(&o, &p);
        let idx = [
            ChargeConfig::BRIGHT_PLUS,
            ChargeConfig::BRIGHT_MINUS,
            ChargeConfig::DARK_PLUS,
            ChargeConfig::DARK_MINUS,
        ]
        .map(|c| c.index());
        let block = Mat::from_fn(4, 4, |i, j| h.get(idx[i], idx[j]));
        let mut eig = block.self_adjoint_eigenvalues(Side::Lower).unwrap();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (d0, d1, d2) = (p.delta0, p.delta1, p.delta2);
        let mut expected = vec![d0 / 2.0 + d1 / 2.0, d0 / 2.0 - d1 / 2.0, -d0 / 2.0 + d2 / 2.0, -d0 / 2.0 - d2 / 2.0];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-10 * b.abs());
        }
        // exchange vanishes outside the single-pair sector
        for c in ChargeConfig::all() {
            if c.electrons() != 1 || c.holes() != 1 {
                for r in 0..16 {
                    assert_eq!(h.get(r, c.index()).norm(), 0.0);
                }
            }
        }
    }

    /// The y-polarized bright state B_y†|GS> is an exchange eigenstate at
    /// δ0/2 + δ1/2 and the x state at δ0/2 − δ1/2.
    #[test]
    fn linear_bright_states() {
        let p = ModelParams::table_one();
        let o = ops(0);
        let h = build_exchange(&o, &p);
        let gs = Operator::ket(o.space, BasisState::new(ChargeConfig::GS, 0));
        for (b, energy) in [
            (&o.composites.b_y, p.delta0 / 2.0 + p.delta1 / 2.0),
            (&o.composites.b_x, p.delta0 / 2.0 - p.delta1 / 2.0),
        ] {
            let ket = b.adjoint().apply(&gs);
            let hk = h.apply(&ket);
            for (x, y) in hk.iter().zip(&ket) {
                assert!((x - y * energy).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coupling_constants() {
        let mut p = ModelParams::table_one();
        p.theta_cav = 0.0;
        let (gp, gm) = circular_couplings(&p);
        assert!((gp - Complex64::new(-p.g, 0.0)).norm() < 1e-12);
        assert!((gm - Complex64::new(p.g, 0.0)).norm() < 1e-12);
        p.theta_cav = std::f64::consts::FRAC_PI_2;
        let (gp, gm) = circular_couplings(&p);
        assert!((gp - Complex64::new(0.0, p.g)).norm() < 1e-12);
        assert!((gm - Complex64::new(0.0, p.g)).norm() < 1e-12);
        p.g = 0.0;
        assert_eq!(build_light_matter(&ops(1), &p).max_abs(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn circular_and_linear_forms_agree(theta in -6.3f64..6.3) {
            let mut p = ModelParams::table_one();
            p.theta_cav = theta;
            let o = ops(2);
            let a = build_light_matter(&o, &p);
            let b = build_light_matter_linear(&o, &p);
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
        }
    }

    #[test]
    fn light_matter_conserves_excitation() {
        let p = ModelParams::table_one();
        let o = ops(2);
        let k = o.excitation_number();
        assert!(build_light_matter(&o, &p).commutator(&k).max_abs() < 1e-12);
    }

    #[test]
    fn overhauser_matrix_elements() {
        let mut p = ModelParams::table_one();
        let o = ops(0);
        assert_eq!(build_overhauser(&o, &p).max_abs(), 0.0);

        p.overhauser_mt = [0.0, 0.0, 20.0];
        let h = build_overhauser(&o, &p);
        assert!(h.commutator(&o.composites.se_z).max_abs() < 1e-15);
        for bright in [ChargeConfig::BRIGHT_PLUS, ChargeConfig::BRIGHT_MINUS] {
            for dark in [ChargeConfig::DARK_PLUS, ChargeConfig::DARK_MINUS] {
                assert_eq!(h.element(BasisState::new(bright, 0), BasisState::new(dark, 0)).norm(), 0.0);
            }
        }

        p.overhauser_mt = [20.0, 20.0, 20.0];
        let h = build_overhauser(&o, &p);
        // |+1> = e↓h⇑ and |+2> = e↑h⇑ differ by one electron spin flip
        let el = h.element(BasisState::new(ChargeConfig::DARK_PLUS, 0), BasisState::new(ChargeConfig::BRIGHT_PLUS, 0));
        let b = 0.02;
        let expected = p.g_e * MU_B * (b * b + b * b as f64).sqrt() / 2.0;
        assert!((el.norm() - expected).abs() < 1e-12);
        assert!((el.re.abs() - p.g_e * MU_B * b / 2.0).abs() < 1e-12);
        assert!((el.re.abs() - 0.347).abs() < 5e-3);
        // holes untouched
        assert!(h.commutator(&o.composites.sh_z).max_abs() < 1e-15);
        assert!(h.commutator(&o.composites.m_up).max_abs() < 1e-15);
    }

    #[test]
    fn assembled_hamiltonian_properties() {
        let p = ModelParams::table_one();
        let o = ops(2);
        let h = assemble_hamiltonian(&o, &p).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12);
        // K-conservation scan over all entries
        for (r, c, _) in h.nonzeros() {
            let (a, b) = (o.space.state(r), o.space.state(c));
            assert_eq!(a.twice_excitation(), b.twice_excitation());
            assert_eq!(a.charge_imbalance(), b.charge_imbalance());
        }

        let mut q = p.clone();
        q.g = 0.0;
        q.delta1 = 0.0;
        q.delta2 = 0.0;
        let h = assemble_hamiltonian(&o, &q).unwrap();
        // only the diagonal s_z s_z exchange remains
        for (r, c, _) in h.nonzeros() {
            assert_eq!(r, c);
        }
    }

    #[test]
    fn frame_places_bare_pair_at_detuning() {
        let mut p = ModelParams::table_one();
        p.j_ee = 0.0;
        p.j_hh = 0.0;
        p.j_eh = 0.0;
        p.delta0 = 0.0;
        p.delta1 = 0.0;
        p.delta2 = 0.0;
        p.delta_omega_bx = 0.0;
        let o = ops(1);
        let h = assemble_hamiltonian(&o, &p).unwrap();
        for c in ChargeConfig::all() {
            assert_eq!(diag(&h, c), 0.0);
        }
        p.delta_omega_bx = 37.0;
        let h = build_frame_detuning(o.space, &p);
        assert_eq!(diag(&h, ChargeConfig::BRIGHT_MINUS) - diag(&h, ChargeConfig::GS), 37.0);
    }
}
