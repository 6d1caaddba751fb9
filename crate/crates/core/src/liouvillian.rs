//! Lindblad generator as a matrix on vectorized density matrices.
//!
//! Vectorization is column-major: the matrix unit `|r⟩⟨c|` sits at index
//! `r + dim·c`. Every term of the generator has the form `X ↦ z·A X B`, whose
//! matrix is `z·(Bᵀ ⊗ A)`, so the generator is stored as a list of such
//! sandwich terms and assembled on demand, either on the full space or on a
//! symmetry sector.
//!
//! Sectors: every term conserves the excitation number
//! `K = a†a + (N_e + N_h)/2` and the charge imbalance `N_e − N_h` on the row
//! and column of a matrix unit in the same way, so the differences
//! `(2K(r) − 2K(c), Q(r) − Q(c))` are conserved. This holds with or without
//! an Overhauser field, which only rotates the electron spin.

use std::collections::BTreeMap;
use std::fmt;

use faer::Mat;
use num_complex::Complex64;
use thiserror::Error;

use crate::hamiltonian::{assemble_hamiltonian, HamiltonianError, HERMITICITY_TOL};
use crate::hilbert::{HilbertSpace, Operator, OperatorSet};
use crate::params::ModelParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, PartialEq)]
pub enum LiouvillianError {
    #[error("Lindblad rate must be non-negative (got {0})")]
    NegativeRate(f64),
    #[error("Hamiltonian is not Hermitian (max |H - H†| = {0:e})")]
    NonHermitian(f64),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// Column-major position of the matrix unit `|row⟩⟨col|`.
pub fn vec_index(dim: usize, row: usize, col: usize) -> usize {
    row + dim * col
}

/// Stacks the columns of `m` into one vector.
pub fn vectorize(m: &Mat<Complex64>) -> Vec<Complex64> {
    let dim = m.nrows();
    let mut v = vec![ZERO; dim * m.ncols()];
    for c in 0..m.ncols() {
        for r in 0..dim {
            v[vec_index(dim, r, c)] = m[(r, c)];
        }
    }
    v
}

/// Inverse of [`vectorize`] for a square matrix.
pub fn unvectorize(v: &[Complex64], dim: usize) -> Mat<Complex64> {
    assert_eq!(v.len(), dim * dim, "vector length does not match dim²");
    Mat::from_fn(dim, dim, |r, c| v[vec_index(dim, r, c)])
}

/// Conserved quantum numbers of a matrix unit, `(2ΔK, ΔQ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorLabel {
    pub twice_dk: i32,
    pub dq: i32,
}

impl SectorLabel {
    /// Sector of populations and the steady state.
    pub const DIAGONAL: Self = Self { twice_dk: 0, dq: 0 };
    /// Sector of `ρ A†` for any emission operator `A` that removes one
    /// excitation without changing the charge imbalance.
    pub const EMISSION: Self = Self { twice_dk: 2, dq: 0 };

    pub fn of_unit(space: &HilbertSpace, row: usize, col: usize) -> Self {
        let r = space.state(row);
        let c = space.state(col);
        Self {
            twice_dk: r.twice_excitation() - c.twice_excitation(),
            dq: r.charge_imbalance() - c.charge_imbalance(),
        }
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(2dK={}, dQ={})", self.twice_dk, self.dq)
    }
}

/// A subset of vectorized indices on which a generator is assembled.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub label: Option<SectorLabel>,
    /// Sorted vectorized indices.
    pub indices: Vec<usize>,
}

impl Sector {
    pub fn full(space: &HilbertSpace) -> Self {
        Self { label: None, indices: (0..space.dim() * space.dim()).collect() }
    }

    pub fn new(space: &HilbertSpace, label: SectorLabel) -> Self {
        let dim = space.dim();
        let indices = (0..dim * dim)
            .filter(|&v| SectorLabel::of_unit(space, v % dim, v / dim) == label)
            .collect();
        Self { label: Some(label), indices }
    }

    /// All nonempty sectors, ordered by label.
    pub fn all(space: &HilbertSpace) -> Vec<Self> {
        let dim = space.dim();
        let mut map: BTreeMap<SectorLabel, Vec<usize>> = BTreeMap::new();
        for v in 0..dim * dim {
            map.entry(SectorLabel::of_unit(space, v % dim, v / dim)).or_default().push(v);
        }
        map.into_iter().map(|(label, indices)| Self { label: Some(label), indices }).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Map from vectorized index to position in the sector.
    fn positions(&self, total: usize) -> Vec<Option<usize>> {
        let mut pos = vec![None; total];
        for (k, &v) in self.indices.iter().enumerate() {
            pos[v] = Some(k);
        }
        pos
    }

    /// Compresses a full vectorized operator onto the sector.
    pub fn restrict(&self, full: &[Complex64]) -> Vec<Complex64> {
        self.indices.iter().map(|&v| full[v]).collect()
    }

    /// Embeds a sector vector into the full space (zeros elsewhere).
    pub fn embed(&self, local: &[Complex64], total: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; total];
        for (&v, &x) in self.indices.iter().zip(local) {
            out[v] = x;
        }
        out
    }

    /// Largest entry of `full` outside the sector.
    pub fn leakage(&self, full: &[Complex64]) -> f64 {
        let pos = self.positions(full.len());
        full.iter()
            .enumerate()
            .filter(|(v, _)| pos[*v].is_none())
            .map(|(_, x)| x.norm())
            .fold(0.0, f64::max)
    }
}

/// Generator restricted to a sector (or the full space) as a dense matrix.
#[derive(Clone, Debug)]
pub struct SuperOperator {
    pub space: HilbertSpace,
    pub sector: Sector,
    pub matrix: Mat<Complex64>,
}

impl SuperOperator {
    pub fn zeros(space: HilbertSpace) -> Self {
        let n = space.dim() * space.dim();
        Self { space, sector: Sector::full(&space), matrix: Mat::zeros(n, n) }
    }

    pub fn is_full(&self) -> bool {
        self.sector.label.is_none()
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.size();
        let mut m = 0.0_f64;
        for c in 0..n {
            for r in 0..n {
                m = m.max(self.matrix[(r, c)].norm());
            }
        }
        m
    }

    /// Applies the matrix to a sector-local vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        assert_eq!(v.len(), n);
        let mut out = vec![ZERO; n];
        for (c, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(r, c)] * x;
            }
        }
        out
    }

    /// Applies a full-space superoperator to an operator.
    pub fn apply_operator(&self, x: &Operator) -> Operator {
        assert!(self.is_full(), "apply_operator needs a full-space superoperator");
        let out = self.apply(&vectorize(x.matrix()));
        Operator::from_matrix(self.space, unvectorize(&out, self.space.dim()))
    }

    /// `max_v |Tr L(e_v)|` over the matrix units of the sector.
    pub fn trace_defect(&self) -> f64 {
        let dim = self.space.dim();
        let pos = self.sector.positions(dim * dim);
        let diag: Vec<usize> = (0..dim).filter_map(|i| pos[vec_index(dim, i, i)]).collect();
        (0..self.size())
            .map(|c| diag.iter().map(|&r| self.matrix[(r, c)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.matrix.eigenvalues().expect("eigenvalue iteration failed to converge")
    }

    /// Splits a full-space superoperator into its sector blocks. Returns a
    /// single block with the original matrix when some entry couples two
    /// sectors.
    pub fn block_decompose(&self) -> Vec<(Option<SectorLabel>, SuperOperator)> {
        assert!(self.is_full(), "block_decompose needs a full-space superoperator");
        let space = self.space;
        let dim = space.dim();
        let label_of = |v: usize| SectorLabel::of_unit(&space, v % dim, v / dim);
        let n = self.size();
        for c in 0..n {
            let lc = label_of(c);
            for r in 0..n {
                if self.matrix[(r, c)] != ZERO && label_of(r) != lc {
                    return vec![(None, self.clone())];
                }
            }
        }
        Sector::all(&space)
            .into_iter()
            .map(|sector| {
                let idx = &sector.indices;
                let matrix = Mat::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])]);
                (sector.label, SuperOperator { space, sector, matrix })
            })
            .collect()
    }
}

impl std::ops::Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.space, rhs.space);
        assert_eq!(self.sector, rhs.sector);
        SuperOperator { space: self.space, sector: self.sector.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

/// `X ↦ coeff · left · X · right`.
#[derive(Clone, Debug)]
pub struct SandwichTerm {
    pub coeff: Complex64,
    pub left: Operator,
    pub right: Operator,
}

/// A generator stored as a sum of sandwich terms.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    pub space: HilbertSpace,
    terms: Vec<SandwichTerm>,
}

impl LindbladGenerator {
    pub fn empty(space: HilbertSpace) -> Self {
        Self { space, terms: Vec::new() }
    }

    pub fn terms(&self) -> &[SandwichTerm] {
        &self.terms
    }

    pub fn push(&mut self, coeff: Complex64, left: Operator, right: Operator) {
        assert_eq!(left.space(), self.space);
        assert_eq!(right.space(), self.space);
        self.terms.push(SandwichTerm { coeff, left, right });
    }

    pub fn extend(&mut self, other: LindbladGenerator) {
        assert_eq!(other.space, self.space);
        self.terms.extend(other.terms);
    }

    /// `−i[H, ·]`.
    pub fn hamiltonian(h: &Operator) -> Result<Self, LiouvillianError> {
        let defect = h.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(LiouvillianError::NonHermitian(defect));
        }
        let space = h.space();
        let mut gen = Self::empty(space);
        gen.push(-I, h.clone(), Operator::identity(space));
        gen.push(I, Operator::identity(space), h.clone());
        Ok(gen)
    }

    /// `−rate·(J†J X + X J†J − 2 J X J†)`.
    pub fn dissipator(jump: &Operator, rate: f64) -> Result<Self, LiouvillianError> {
        if !(rate >= 0.0) {
            return Err(LiouvillianError::NegativeRate(rate));
        }
        let space = jump.space();
        let mut gen = Self::empty(space);
        if rate == 0.0 {
            return Ok(gen);
        }
        let jd = jump.adjoint();
        let n = &jd * jump;
        gen.push(Complex64::new(2.0 * rate, 0.0), jump.clone(), jd);
        gen.push(Complex64::new(-rate, 0.0), n.clone(), Operator::identity(space));
        gen.push(Complex64::new(-rate, 0.0), Operator::identity(space), n);
        Ok(gen)
    }

    /// Full model generator. The anti-Hermitian parts of the dissipators are
    /// folded into an effective Hamiltonian so the term list stays short.
    pub fn model(ops: &OperatorSet, params: &ModelParams) -> Result<Self, LiouvillianError> {
        let space = ops.space;
        let h = assemble_hamiltonian(ops, params)?;
        let mut h_eff = h;
        let mut gen = Self::empty(space);
        for (jump, rate) in jump_operators(ops, params) {
            if rate < 0.0 {
                return Err(LiouvillianError::NegativeRate(rate));
            }
            if rate == 0.0 {
                continue;
            }
            let jd = jump.adjoint();
            h_eff = &h_eff - &(&jd * &jump).scale(Complex64::new(0.0, rate));
            gen.push(Complex64::new(2.0 * rate, 0.0), jump, jd);
        }
        let h_eff_dag = h_eff.adjoint();
        gen.push(-I, h_eff, Operator::identity(space));
        gen.push(I, Operator::identity(space), h_eff_dag);
        Ok(gen)
    }

    /// Applies the generator to an operator without assembling a matrix.
    pub fn apply(&self, x: &Operator) -> Operator {
        let mut out = Operator::zeros(self.space);
        for t in &self.terms {
            let y = &(&t.left * x) * &t.right;
            out += &y.scale(t.coeff);
        }
        out
    }

    pub fn superoperator(&self) -> SuperOperator {
        self.assemble(Sector::full(&self.space))
    }

    pub fn sector_superoperator(&self, label: SectorLabel) -> SuperOperator {
        self.assemble(Sector::new(&self.space, label))
    }

    /// Assembles the generator on `sector`. Entries that would leave the
    /// sector are dropped, so the caller is responsible for choosing a
    /// conserved sector.
    pub fn assemble(&self, sector: Sector) -> SuperOperator {
        let dim = self.space.dim();
        let pos = sector.positions(dim * dim);
        let n = sector.len();
        let mut matrix = Mat::<Complex64>::zeros(n, n);
        for t in &self.terms {
            let left = t.left.nonzeros();
            let right = t.right.nonzeros();
            // X ↦ A X B: entry [(r,c), (r',c')] += z A[r,r'] B[c',c]
            for &(cp, c, b) in &right {
                let zb = t.coeff * b;
                for &(r, rp, a) in &left {
                    if let (Some(i), Some(j)) = (pos[vec_index(dim, r, c)], pos[vec_index(dim, rp, cp)]) {
                        matrix[(i, j)] += zb * a;
                    }
                }
            }
        }
        SuperOperator { space: self.space, sector, matrix }
    }
}

/// Jump operators and half-rates of every dissipator in the model.
pub fn jump_operators(ops: &OperatorSet, p: &ModelParams) -> Vec<(Operator, f64)> {
    let c = &ops.composites;
    let mut jumps = vec![(ops.a.clone(), p.gamma_cav)];
    for spin in [crate::hilbert::Spin::Up, crate::hilbert::Spin::Down] {
        jumps.push((ops.pair_annihilator(spin), p.gamma_spon));
    }
    for n in [&c.n_up, &c.n_down] {
        jumps.push((n.clone(), p.gamma_phase_e));
    }
    for m in [&c.m_up, &c.m_down] {
        jumps.push((m.clone(), p.gamma_phase_h));
    }
    for f in [&ops.c_up, &ops.c_down, &ops.d_up, &ops.d_down] {
        jumps.push((f.adjoint(), p.pump));
    }
    jumps
}

pub fn lindblad_dissipator(jump: &Operator, rate: f64) -> Result<SuperOperator, LiouvillianError> {
    Ok(LindbladGenerator::dissipator(jump, rate)?.superoperator())
}

fn sum_of_dissipators(space: HilbertSpace, jumps: &[(&Operator, f64)]) -> Result<SuperOperator, LiouvillianError> {
    let mut gen = LindbladGenerator::empty(space);
    for &(j, rate) in jumps {
        gen.extend(LindbladGenerator::dissipator(j, rate)?);
    }
    Ok(gen.superoperator())
}

/// Photon escape through the cavity.
pub fn build_l_cav(ops: &OperatorSet, p: &ModelParams) -> Result<SuperOperator, LiouvillianError> {
    lindblad_dissipator(&ops.a, p.gamma_cav)
}

/// Direct emission of bright pairs, jump operators `d_{−σ} c_σ`.
pub fn build_l_spon(ops: &OperatorSet, p: &ModelParams) -> Result<SuperOperator, LiouvillianError> {
    use crate::hilbert::Spin;
    let up = ops.pair_annihilator(Spin::Up);
    let down = ops.pair_annihilator(Spin::Down);
    sum_of_dissipators(ops.space, &[(&up, p.gamma_spon), (&down, p.gamma_spon)])
}

/// Direct emission written with the linear bright operators `B_x`, `B_y`.
pub fn build_l_spon_linear(ops: &OperatorSet, p: &ModelParams) -> Result<SuperOperator, LiouvillianError> {
    let c = &ops.composites;
    sum_of_dissipators(ops.space, &[(&c.b_x, p.gamma_spon), (&c.b_y, p.gamma_spon)])
}

/// Pure dephasing through the carrier number operators.
pub fn build_l_phase(ops: &OperatorSet, p: &ModelParams) -> Result<SuperOperator, LiouvillianError> {
    let c = &ops.composites;
    sum_of_dissipators(
        ops.space,
        &[
            (&c.n_up, p.gamma_phase_e),
            (&c.n_down, p.gamma_phase_e),
            (&c.m_up, p.gamma_phase_h),
            (&c.m_down, p.gamma_phase_h),
        ],
    )
}

/// Incoherent injection of electrons and holes with random spin.
pub fn build_l_inj(ops: &OperatorSet, p: &ModelParams) -> Result<SuperOperator, LiouvillianError> {
    let creators = [&ops.c_up, &ops.c_down, &ops.d_up, &ops.d_down].map(|f| f.adjoint());
    let jumps: Vec<(&Operator, f64)> = creators.iter().map(|c| (c, p.pump)).collect();
    sum_of_dissipators(ops.space, &jumps)
}

/// `X ↦ −i(HX − XH)`.
pub fn hamiltonian_superoperator(h: &Operator) -> Result<SuperOperator, LiouvillianError> {
    Ok(LindbladGenerator::hamiltonian(h)?.superoperator())
}

/// Full generator on the full space.
pub fn assemble_liouvillian(ops: &OperatorSet, p: &ModelParams) -> Result<SuperOperator, LiouvillianError> {
    Ok(LindbladGenerator::model(ops, p)?.superoperator())
}

/// Sector blocks of a full-space generator.
pub fn block_decompose(l: &SuperOperator) -> Vec<(Option<SectorLabel>, SuperOperator)> {
    l.block_decompose()
}
