//! Steady state of the generator and observables on it.

use std::collections::BTreeMap;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{BasisState, ChargeConfig, HilbertSpace, Operator, OperatorSet};
use crate::liouvillian::{unvectorize, vec_index, LindbladGenerator, LiouvillianError, SectorLabel, SuperOperator};
use crate::params::ModelParams;

/// Relative gap `σ_{n−2}/σ_0` below which the null space counts as degenerate.
pub const UNIQUENESS_TOL: f64 = 1e-8;
/// Smallest eigenvalue of ρ that is accepted silently.
pub const POSITIVITY_WARN: f64 = -1e-8;
/// Smallest eigenvalue of ρ below which the solve fails.
pub const POSITIVITY_FAIL: f64 = -1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SteadyStateError {
    #[error("steady state is not unique (second-smallest singular value ratio {0:e})")]
    NonUniqueSteadyState(f64),
    #[error("steady-state solve failed: {0}")]
    SolveFailure(String),
    #[error("steady state has eigenvalue {0:e}, below the positivity bound")]
    NotPositive(f64),
    #[error("operator lives on a different Hilbert space")]
    SpaceMismatch,
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
}

/// Hermitian, unit-trace state on a [`HilbertSpace`].
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Wraps `op` after Hermitizing and normalizing it.
    pub fn from_operator(op: Operator) -> Result<Self, SteadyStateError> {
        let herm = (&op + &op.adjoint()).scale_real(0.5);
        let tr = herm.trace().re;
        if !(tr.abs() > 0.0) || !tr.is_finite() {
            return Err(SteadyStateError::SolveFailure(format!("trace {tr} cannot be normalized")));
        }
        Ok(Self { op: herm.scale_real(1.0 / tr) })
    }

    /// `|s⟩⟨s|`.
    pub fn pure_basis_state(space: HilbertSpace, s: BasisState) -> Self {
        Self { op: Operator::projector(space, s, s) }
    }

    /// Empty dot, empty cavity.
    pub fn vacuum(space: HilbertSpace) -> Self {
        Self::pure_basis_state(space, BasisState::new(ChargeConfig::GS, 0))
    }

    pub fn space(&self) -> HilbertSpace {
        self.op.space()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        self.op.matrix()
    }

    pub fn trace(&self) -> Complex64 {
        self.op.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.op
            .matrix()
            .self_adjoint_eigenvalues(Side::Lower)
            .expect("Hermitian eigenvalue iteration failed to converge")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// `Tr(O ρ)`.
pub fn expectation(rho: &DensityMatrix, o: &Operator) -> Result<Complex64, SteadyStateError> {
    if o.space() != rho.space() {
        return Err(SteadyStateError::SpaceMismatch);
    }
    let (a, b) = (o.matrix(), rho.matrix());
    let n = a.nrows();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(tr)
}

/// Reduced probabilities of the 16 charge configurations.
pub fn charge_populations(rho: &DensityMatrix) -> BTreeMap<ChargeConfig, f64> {
    let space = rho.space();
    let mut out: BTreeMap<ChargeConfig, f64> = ChargeConfig::all().map(|c| (c, 0.0)).collect();
    for (i, s) in space.states().enumerate() {
        *out.get_mut(&s.charge).unwrap() += rho.matrix()[(i, i)].re;
    }
    out
}

/// Quality numbers of a steady-state solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyReport {
    /// `max |L(ρ)|` of the returned state.
    pub residual: f64,
    /// `max |L|` of the generator that was solved.
    pub generator_scale: f64,
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    /// `σ_{n−2}/σ_0` of the generator, when the uniqueness check ran.
    pub null_gap: Option<f64>,
}

impl SteadyReport {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.generator_scale.max(f64::MIN_POSITIVE)
    }

    pub fn positivity_warning(&self) -> bool {
        self.min_eigenvalue < POSITIVITY_WARN
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SteadyOptions {
    /// Run the singular-value uniqueness check.
    pub check_uniqueness: bool,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { check_uniqueness: true }
    }
}

/// Steady state of a full generator or of its diagonal sector, by replacing
/// one equation of `L vec(ρ) = 0` with the trace condition.
pub fn solve_steady(l: &SuperOperator) -> Result<(DensityMatrix, SteadyReport), SteadyStateError> {
    solve_steady_with(l, SteadyOptions::default())
}

pub fn solve_steady_with(
    l: &SuperOperator,
    options: SteadyOptions,
) -> Result<(DensityMatrix, SteadyReport), SteadyStateError> {
    if let Some(label) = l.sector.label {
        assert_eq!(label, SectorLabel::DIAGONAL, "steady state lives in the diagonal sector");
    }
    let space = l.space;
    let dim = space.dim();
    let n = l.size();
    let diag_pos = diagonal_positions(l);
    let null_gap = if options.check_uniqueness {
        let sv = l
            .matrix
            .singular_values()
            .map_err(|e| SteadyStateError::SolveFailure(format!("{e:?}")))?;
        let gap = if n >= 2 { sv[n - 2] / sv[0] } else { 1.0 };
        if gap < UNIQUENESS_TOL {
            return Err(SteadyStateError::NonUniqueSteadyState(gap));
        }
        Some(gap)
    } else {
        None
    };

    let replaced = diag_pos[0];
    let mut a = l.matrix.clone();
    for j in 0..n {
        a[(replaced, j)] = Complex64::new(0.0, 0.0);
    }
    for &p in &diag_pos {
        a[(replaced, p)] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    rhs[(replaced, 0)] = Complex64::new(1.0, 0.0);
    let lu = a.partial_piv_lu();
    lu.solve_in_place(rhs.as_mut());
    let local: Vec<Complex64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if local.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SteadyStateError::SolveFailure("non-finite solution".into()));
    }
    let full = l.sector.embed(&local, dim * dim);
    let rho = DensityMatrix::from_operator(Operator::from_matrix(space, unvectorize(&full, dim)))?;
    let report = assess(l, &rho, null_gap);
    if report.min_eigenvalue < POSITIVITY_FAIL {
        return Err(SteadyStateError::NotPositive(report.min_eigenvalue));
    }
    Ok((rho, report))
}

/// Steady state as the right singular vector of the smallest singular
/// value. Independent of [`solve_steady`]; used as a cross-check.
pub fn solve_steady_svd(l: &SuperOperator) -> Result<DensityMatrix, SteadyStateError> {
    let space = l.space;
    let dim = space.dim();
    let n = l.size();
    let svd = l.matrix.svd().map_err(|e| SteadyStateError::SolveFailure(format!("{e:?}")))?;
    let v = svd.V();
    let local: Vec<Complex64> = (0..n).map(|i| v[(i, n - 1)]).collect();
    let full = l.sector.embed(&local, dim * dim);
    DensityMatrix::from_operator(Operator::from_matrix(space, unvectorize(&full, dim)))
}

fn diagonal_positions(l: &SuperOperator) -> Vec<usize> {
    let dim = l.space.dim();
    (0..dim)
        .map(|i| {
            l.sector
                .indices
                .binary_search(&vec_index(dim, i, i))
                .expect("sector does not contain the diagonal")
        })
        .collect()
}

/// Residual, Hermiticity, trace and positivity of `rho` against `l`.
pub fn assess(l: &SuperOperator, rho: &DensityMatrix, null_gap: Option<f64>) -> SteadyReport {
    let full = crate::liouvillian::vectorize(rho.matrix());
    let local = l.sector.restrict(&full);
    let residual = l.apply(&local).iter().map(|z| z.norm()).fold(0.0, f64::max);
    SteadyReport {
        residual,
        generator_scale: l.max_abs(),
        hermiticity: rho.operator().hermiticity_defect(),
        trace_error: (rho.trace() - Complex64::new(1.0, 0.0)).norm(),
        min_eigenvalue: rho.min_eigenvalue(),
        null_gap,
    }
}

/// Steady state of the full model together with its generator.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub report: SteadyReport,
}

/// Steady state of the model at `params`, solved in the diagonal sector.
///
/// Without injection every state with carriers that cannot recombine (lone
/// electrons, holes, trions, dark pairs) is stationary, so the null space is
/// degenerate. The physically relevant state from an empty dot is then the
/// vacuum, which is returned after checking that the generator annihilates it.
pub fn steady_state(ops: &OperatorSet, params: &ModelParams) -> Result<SteadyState, SteadyStateError> {
    steady_state_with(ops, params, SteadyOptions::default())
}

pub fn steady_state_with(
    ops: &OperatorSet,
    params: &ModelParams,
    options: SteadyOptions,
) -> Result<SteadyState, SteadyStateError> {
    let gen = LindbladGenerator::model(ops, params)?;
    let l = gen.sector_superoperator(SectorLabel::DIAGONAL);
    if params.pump == 0.0 {
        let rho = DensityMatrix::vacuum(ops.space);
        let report = assess(&l, &rho, None);
        if report.relative_residual() > 1e-12 {
            return Err(SteadyStateError::SolveFailure(format!(
                "vacuum is not stationary (residual {:e})",
                report.residual
            )));
        }
        return Ok(SteadyState { rho, report });
    }
    let (rho, report) = solve_steady_with(&l, options)?;
    Ok(SteadyState { rho, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::enumerate_basis;
    use crate::liouvillian::assemble_liouvillian;
    use proptest::prelude::*;

    fn ops(p_max: usize) -> OperatorSet {
        OperatorSet::new(enumerate_basis(p_max))
    }

    #[test]
    fn table_one_steady_state() {
        let ops = ops(2);
        let p = ModelParams::table_one();
        let ss = steady_state(&ops, &p).unwrap();
        let r = &ss.report;
        assert!(r.relative_residual() <= 1e-10, "{r:?}");
        assert!(r.hermiticity <= 1e-12);
        assert!(r.trace_error <= 1e-10);
        assert!(r.min_eigenvalue >= POSITIVITY_WARN, "{r:?}");
        let pops = charge_populations(&ss.rho);
        assert!((pops.values().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(pops.values().all(|&x| x >= -1e-10));
        let gs = pops[&ChargeConfig::GS];
        assert!(pops.values().all(|&x| x <= gs));
        let n = expectation(&ss.rho, &ops.photon_number()).unwrap();
        assert!(n.re > 0.0 && n.im.abs() < 1e-12);
    }

    #[test]
    fn sector_and_full_solves_agree() {
        let ops = ops(1);
        let mut p = ModelParams::table_one();
        p.pump = 3.0;
        p.overhauser_mt = [20.0, 20.0, 20.0];
        let full = assemble_liouvillian(&ops, &p).unwrap();
        let (a, _) = solve_steady(&full).unwrap();
        let b = steady_state(&ops, &p).unwrap().rho;
        assert!(a.operator().max_abs_diff(b.operator()) < 1e-9);
        let c = solve_steady_svd(&full).unwrap();
        assert!(a.operator().max_abs_diff(c.operator()) < 1e-8);
    }

    #[test]
    fn zero_pump_gives_vacuum() {
        let ops = ops(2);
        let mut p = ModelParams::table_one();
        p.pump = 0.0;
        let ss = steady_state(&ops, &p).unwrap();
        assert_eq!(ss.rho.operator().max_abs_diff(DensityMatrix::vacuum(ops.space).operator()), 0.0);
        let pops = charge_populations(&ss.rho);
        assert_eq!(pops[&ChargeConfig::GS], 1.0);
        // the null space is degenerate, so the general solver refuses
        let gen = LindbladGenerator::model(&ops, &p).unwrap();
        let err = solve_steady(&gen.sector_superoperator(SectorLabel::DIAGONAL)).unwrap_err();
        assert!(matches!(err, SteadyStateError::NonUniqueSteadyState(_)));
    }

    /// Injection without any loss channel fills the dot completely.
    #[test]
    fn pump_only_fills_the_dot() {
        let ops = ops(1);
        let mut p = ModelParams::table_one();
        p.g = 0.0;
        p.gamma_spon = 0.0;
        p.pump = 1.0;
        let ss = steady_state(&ops, &p).unwrap();
        let pops = charge_populations(&ss.rho);
        assert!((pops[&ChargeConfig::BIEXCITON] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expectation_basics() {
        let ops = ops(1);
        let vac = DensityMatrix::vacuum(ops.space);
        assert_eq!(expectation(&vac, &Operator::identity(ops.space)).unwrap().re, 1.0);
        assert_eq!(expectation(&vac, &ops.photon_number()).unwrap().norm(), 0.0);
        let other = Operator::identity(enumerate_basis(2));
        assert_eq!(expectation(&vac, &other), Err(SteadyStateError::SpaceMismatch));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn expectation_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, s in 0usize..5) {
            let ops = ops(1);
            let p = ModelParams::table_one();
            let rho = steady_state(&ops, &p).unwrap().rho;
            let x = [&ops.a, &ops.c_up, &ops.composites.b_x, &ops.composites.se_plus, &ops.d_down][s];
            let y = ops.photon_number();
            let combo = &x.scale_real(a) + &y.scale_real(b);
            let lhs = expectation(&rho, &combo).unwrap();
            let rhs = expectation(&rho, x).unwrap() * a + expectation(&rho, &y).unwrap() * b;
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
