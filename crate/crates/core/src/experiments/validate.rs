//! Invariant suite run by `qdcavity validate` and by the acceptance target.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hamiltonian::{build_light_matter, build_light_matter_linear};
use crate::hilbert::{enumerate_basis, Operator, OperatorSet};
use crate::liouvillian::{build_l_spon, build_l_spon_linear, LindbladGenerator};
use crate::params::ModelParams;
use crate::spectra::{s_l, s_r, s_x, s_y, sum_rule_check, time_domain_oracle, Channel, EmissionModel, FrequencyGrid};
use crate::steady_state::{steady_state, DensityMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn bound(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, passed: value <= limit, detail: format!("{value:.3e} (limit {limit:.0e})") }
    }

    fn from_result(name: &'static str, r: Result<Check, String>) -> Self {
        r.unwrap_or_else(|e| Self { name, passed: false, detail: e })
    }
}

/// Compact `p_max = 1` parameter point whose lines sit within a few hundred
/// μeV of the cavity, so time-domain and sum-rule checks stay cheap.
pub fn compact_params() -> ModelParams {
    let mut p = ModelParams::table_one();
    p.j_ee = 150.0;
    p.j_hh = 120.0;
    p.j_eh = 100.0;
    p.delta0 = 40.0;
    p.delta1 = -12.0;
    p.delta2 = -4.0;
    p.g = 30.0;
    p.gamma_cav = 20.0;
    p.gamma_spon = 5.0;
    p.set_gamma_phase(10.0);
    p.pump = 2.0;
    p.gamma_reso = 5.0;
    p.p_max = 1;
    p.delta_omega_bx = p.default_detuning();
    p
}

fn fermion_algebra() -> Check {
    let space = enumerate_basis(2);
    let ops = OperatorSet::new(space);
    let modes = [&ops.c_up, &ops.c_down, &ops.d_up, &ops.d_down];
    let id = Operator::identity(space);
    let zero = Operator::zeros(space);
    let mut worst = 0.0f64;
    for (i, x) in modes.iter().enumerate() {
        for (j, y) in modes.iter().enumerate() {
            let expected = if i == j { &id } else { &zero };
            worst = worst.max(x.anticommutator(&y.adjoint()).max_abs_diff(expected));
            worst = worst.max(x.anticommutator(y).max_abs_diff(&zero));
        }
        worst = worst.max(x.commutator(&ops.a).max_abs_diff(&zero));
    }
    Check::bound("fermionic anticommutators", worst, 1e-14)
}

fn spontaneous_forms() -> Check {
    let ops = OperatorSet::new(enumerate_basis(2));
    let mut p = ModelParams::table_one();
    p.gamma_spon = 1.0;
    let diff = build_l_spon(&ops, &p)
        .and_then(|a| build_l_spon_linear(&ops, &p).map(|b| (&a.matrix - &b.matrix).norm_max()));
    match diff {
        Ok(d) => Check::bound("circular vs linear spontaneous emission", d, 1e-12),
        Err(e) => Check { name: "circular vs linear spontaneous emission", passed: false, detail: e.to_string() },
    }
}

fn trace_annihilation() -> Check {
    let ops = OperatorSet::new(enumerate_basis(2));
    let mut p = ModelParams::table_one();
    p.overhauser_mt = [20.0, -15.0, 10.0];
    match LindbladGenerator::model(&ops, &p) {
        Ok(g) => Check::bound("trace annihilation", g.superoperator().trace_defect(), 1e-10),
        Err(e) => Check { name: "trace annihilation", passed: false, detail: e.to_string() },
    }
}

fn steady_bounds() -> Check {
    let name = "steady-state hermiticity, trace, positivity";
    let run = || -> Result<Check, String> {
        let ops = OperatorSet::new(enumerate_basis(2));
        let s = steady_state(&ops, &ModelParams::table_one()).map_err(|e| e.to_string())?;
        let r = &s.report;
        let passed = r.hermiticity <= 1e-12 && r.trace_error <= 1e-10 && r.min_eigenvalue >= -1e-8;
        Ok(Check {
            name,
            passed,
            detail: format!("hermiticity {:.1e}, trace {:.1e}, min eigenvalue {:.1e}", r.hermiticity, r.trace_error, r.min_eigenvalue),
        })
    };
    Check::from_result(name, run())
}

fn light_matter_forms(seed: u64) -> Check {
    let ops = OperatorSet::new(enumerate_basis(2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ModelParams::table_one();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        p.theta_cav = rng.random_range(0.0..2.0 * PI);
        let d = build_light_matter(&ops, &p).max_abs_diff(&build_light_matter_linear(&ops, &p));
        worst = worst.max(d / p.g);
    }
    Check::bound("circular vs linear light-matter coupling (20 angles)", worst, 1e-12)
}

fn polarization_completeness() -> Check {
    let name = "S_x + S_y = S_L + S_R";
    let run = || -> Result<Check, String> {
        let mut p = compact_params();
        p.theta_cav = 0.4;
        p.overhauser_mt = [20.0, 20.0, 20.0];
        let model = EmissionModel::new(&p).map_err(|e| e.to_string())?;
        let grid = FrequencyGrid::uniform(-400.0, 400.0, 161).map_err(|e| e.to_string())?;
        let [x, y, l, r] = [s_x, s_y, s_l, s_r].map(|f| f(&model, &grid).map(|s| s.values));
        let (x, y, l, r) = (x.map_err(|e| e.to_string())?, y.map_err(|e| e.to_string())?, l.map_err(|e| e.to_string())?, r.map_err(|e| e.to_string())?);
        let scale = x.iter().chain(&y).fold(0.0f64, |m, v| m.max(*v));
        let worst = (0..grid.len()).map(|i| ((x[i] + y[i]) - (l[i] + r[i])).abs()).fold(0.0, f64::max) / scale;
        Ok(Check::bound(name, worst, 1e-10))
    };
    Check::from_result(name, run())
}

fn oracle_agreement() -> Check {
    let name = "resolvent vs time-domain oracle (p_max = 1)";
    let run = || -> Result<Check, String> {
        let p = compact_params();
        let model = EmissionModel::new(&p).map_err(|e| e.to_string())?;
        let grid = FrequencyGrid::uniform(-160.0, 120.0, 5).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for ch in [Channel::Cav, Channel::Y] {
            let a = ch.operator(&model.ops).expect("single-operator channel");
            let oracle = time_domain_oracle(&model.emission, model.rho(), &a, ch.rate(&p), &grid.values(), p.gamma_reso, 6.0, 5e-4)
                .map_err(|e| e.to_string())?;
            let direct = model.spectrum(ch, &grid).map_err(|e| e.to_string())?;
            for (o, r) in oracle.iter().zip(&direct.values) {
                worst = worst.max((o - r).abs() / r.abs());
            }
        }
        Ok(Check::bound(name, worst, 1e-6))
    };
    Check::from_result(name, run())
}

fn sum_rule() -> Check {
    let name = "sum rule at zero resolution";
    let run = || -> Result<Check, String> {
        let mut p = compact_params();
        p.gamma_reso = 0.0;
        let model = EmissionModel::new(&p).map_err(|e| e.to_string())?;
        let width = p.gamma_cav + p.g;
        let grid = FrequencyGrid::around(0.0, 20.0 * width, 8001).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for ch in [Channel::Cav, Channel::X, Channel::Y] {
            let a = ch.operator(&model.ops).expect("single-operator channel");
            let s = model.spectrum(ch, &grid).map_err(|e| e.to_string())?;
            worst = worst.max(sum_rule_check(&s, model.rho(), &a, ch.rate(&p)).discrepancy());
        }
        Ok(Check::bound(name, worst, 1e-3))
    };
    Check::from_result(name, run())
}

fn zero_pump_vacuum() -> Check {
    let name = "zero injection gives the vacuum";
    let run = || -> Result<Check, String> {
        let ops = OperatorSet::new(enumerate_basis(2));
        let mut p = ModelParams::table_one();
        p.pump = 0.0;
        let s = steady_state(&ops, &p).map_err(|e| e.to_string())?;
        let vacuum = DensityMatrix::vacuum(ops.space);
        let diff = s.rho.operator().max_abs_diff(vacuum.operator());
        let gen = LindbladGenerator::model(&ops, &p).map_err(|e| e.to_string())?;
        let residual = gen.apply(vacuum.operator()).max_abs();
        Ok(Check {
            name,
            passed: diff == 0.0 && residual <= 1e-14,
            detail: format!("distance {diff:.1e}, residual {residual:.1e}"),
        })
    };
    Check::from_result(name, run())
}

fn dissipativity(seed: u64) -> Check {
    let ops = OperatorSet::new(enumerate_basis(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::MIN;
    for _ in 0..10 {
        let mut p = ModelParams::table_one();
        let mut s = || rng.random_range(0.5..1.5);
        p.gamma_cav *= s();
        p.gamma_spon *= s();
        p.gamma_phase_e *= s();
        p.gamma_phase_h *= s();
        p.pump *= s();
        p.g *= s();
        p.delta0 *= s();
        p.delta1 *= s();
        match LindbladGenerator::model(&ops, &p) {
            Ok(g) => {
                let max_re = g.superoperator().eigenvalues().iter().map(|z: &Complex64| z.re).fold(f64::MIN, f64::max);
                worst = worst.max(max_re);
            }
            Err(e) => return Check { name: "dissipativity", passed: false, detail: e.to_string() },
        }
    }
    Check::bound("dissipativity (10 draws)", worst, 1e-10)
}

/// All invariant checks, in a fixed order.
pub fn invariant_suite(seed: u64) -> Vec<Check> {
    vec![
        fermion_algebra(),
        spontaneous_forms(),
        trace_annihilation(),
        steady_bounds(),
        light_matter_forms(seed),
        polarization_completeness(),
        oracle_agreement(),
        sum_rule(),
        zero_pump_vacuum(),
        dissipativity(seed),
    ]
}
