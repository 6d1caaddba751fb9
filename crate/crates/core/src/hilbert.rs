//! Basis and elementary operators for the quantum-dot S-shell coupled to a
//! single cavity mode.
//!
//! The S-shell holds four fermionic modes: electrons with spin ±1/2 and heavy
//! holes with pseudo-spin ±3/2. A basis state is a charge configuration (one
//! occupation bit per mode) times a truncated Fock state of the cavity.
//!
//! Index ordering: `index = charge_index + 16 * photons` with
//! `charge_index = i + 2j + 4k + 8l`, where `(i, j, k, l)` are the occupations
//! of `(c_up, c_down, d_up, d_down)`.
//!
//! All four fermionic modes share one Jordan-Wigner string in that same mode
//! order, so electrons and holes mutually anticommute. The ket of a charge
//! configuration is `(c_up†)^i (c_down†)^j (d_up†)^k (d_down†)^l |vac>`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use faer::Mat;
use num_complex::Complex64;

/// Number of distinct S-shell charge configurations.
pub const CHARGE_STATES: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    Electron,
    Hole,
}

/// Spin +1/2 (electrons) or pseudo-spin +3/2 (heavy holes) is `Up`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Position of a fermionic mode in the Jordan-Wigner ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub species: Species,
    pub spin: Spin,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::new(Species::Electron, Spin::Up),
        Mode::new(Species::Electron, Spin::Down),
        Mode::new(Species::Hole, Spin::Up),
        Mode::new(Species::Hole, Spin::Down),
    ];

    pub const fn new(species: Species, spin: Spin) -> Self {
        Self { species, spin }
    }

    pub const fn bit(self) -> u8 {
        let s = match self.species {
            Species::Electron => 0,
            Species::Hole => 2,
        };
        let t = match self.spin {
            Spin::Up => 0,
            Spin::Down => 1,
        };
        s + t
    }
}

/// Occupation of the four S-shell modes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChargeConfig(u8);

impl ChargeConfig {
    /// Empty dot.
    pub const GS: Self = Self(0);
    /// `|0_{1/2}, 1_{-1/2}> ⊗ |1_{3/2}, 0_{-3/2}>`, bright, J_z = +1.
    pub const BRIGHT_PLUS: Self = Self(0b0110);
    /// `|1_{1/2}, 0_{-1/2}> ⊗ |0_{3/2}, 1_{-3/2}>`, bright, J_z = -1.
    pub const BRIGHT_MINUS: Self = Self(0b1001);
    /// `|1_{1/2}, 0_{-1/2}> ⊗ |1_{3/2}, 0_{-3/2}>`, dark, J_z = +2.
    pub const DARK_PLUS: Self = Self(0b0101);
    /// `|0_{1/2}, 1_{-1/2}> ⊗ |0_{3/2}, 1_{-3/2}>`, dark, J_z = -2.
    pub const DARK_MINUS: Self = Self(0b1010);
    /// Fully occupied shell.
    pub const BIEXCITON: Self = Self(0b1111);

    pub fn new(i: bool, j: bool, k: bool, l: bool) -> Self {
        Self(i as u8 | (j as u8) << 1 | (k as u8) << 2 | (l as u8) << 3)
    }

    pub fn from_index(index: usize) -> Option<Self> {
        (index < CHARGE_STATES).then_some(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Self> + Clone {
        (0..CHARGE_STATES as u8).map(Self)
    }

    pub fn is_occupied(self, mode: Mode) -> bool {
        self.0 >> mode.bit() & 1 == 1
    }

    pub fn electrons(self) -> u32 {
        (self.0 & 0b0011).count_ones()
    }

    pub fn holes(self) -> u32 {
        (self.0 & 0b1100).count_ones()
    }

    pub fn carriers(self) -> u32 {
        self.0.count_ones()
    }

    /// Applies a fermionic ladder operator. Returns the Jordan-Wigner sign and
    /// the resulting configuration, or `None` when the result vanishes.
    pub fn apply(self, mode: Mode, ladder: Ladder) -> Option<(f64, Self)> {
        let bit = 1u8 << mode.bit();
        let occupied = self.0 & bit != 0;
        let next = match (ladder, occupied) {
            (Ladder::Annihilate, true) | (Ladder::Create, false) => self.0 ^ bit,
            _ => return None,
        };
        let parity = (self.0 & (bit - 1)).count_ones();
        let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, Self(next)))
    }

    pub fn kind(self) -> ChargeKind {
        match (self.electrons(), self.holes()) {
            (0, 0) => ChargeKind::Empty,
            (1, 0) => ChargeKind::Electron,
            (0, 1) => ChargeKind::Hole,
            (2, 0) => ChargeKind::TwoElectrons,
            (0, 2) => ChargeKind::TwoHoles,
            (1, 1) if self == Self::BRIGHT_PLUS || self == Self::BRIGHT_MINUS => {
                ChargeKind::BrightExciton
            }
            (1, 1) => ChargeKind::DarkExciton,
            (1, 2) => ChargeKind::PositiveTrion,
            (2, 1) => ChargeKind::NegativeTrion,
            _ => ChargeKind::Biexciton,
        }
    }

    /// Short human-readable label, e.g. `+1`, `X+(e↑)`, `XX0`.
    pub fn label(self) -> String {
        match self {
            Self::GS => "GS".into(),
            Self::BRIGHT_PLUS => "+1".into(),
            Self::BRIGHT_MINUS => "-1".into(),
            Self::DARK_PLUS => "+2".into(),
            Self::DARK_MINUS => "-2".into(),
            Self::BIEXCITON => "XX0".into(),
            _ => {
                let mut s = String::new();
                for (mode, tag) in Mode::ALL.iter().zip(["e↑", "e↓", "h⇑", "h⇓"]) {
                    if self.is_occupied(*mode) {
                        s.push_str(tag);
                    }
                }
                format!("{}({s})", self.kind().short_name())
            }
        }
    }
}

impl fmt::Debug for ChargeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ChargeConfig({}{}{}{})",
            self.0 & 1,
            self.0 >> 1 & 1,
            self.0 >> 2 & 1,
            self.0 >> 3 & 1
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChargeKind {
    Empty,
    Electron,
    Hole,
    TwoElectrons,
    TwoHoles,
    BrightExciton,
    DarkExciton,
    PositiveTrion,
    NegativeTrion,
    Biexciton,
}

impl ChargeKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ChargeKind::Empty => "GS",
            ChargeKind::Electron => "e",
            ChargeKind::Hole => "h",
            ChargeKind::TwoElectrons => "2e",
            ChargeKind::TwoHoles => "2h",
            ChargeKind::BrightExciton => "BX0",
            ChargeKind::DarkExciton => "DX0",
            ChargeKind::PositiveTrion => "X+",
            ChargeKind::NegativeTrion => "X-",
            ChargeKind::Biexciton => "XX0",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub charge: ChargeConfig,
    pub photons: usize,
}

impl BasisState {
    pub fn new(charge: ChargeConfig, photons: usize) -> Self {
        Self { charge, photons }
    }

    /// Twice the conserved excitation number `K = a†a + (N_e + N_h)/2`.
    pub fn twice_excitation(&self) -> i32 {
        2 * self.photons as i32 + self.charge.carriers() as i32
    }

    /// `N_e - N_h`, conserved by every coherent and incoherent process.
    pub fn charge_imbalance(&self) -> i32 {
        self.charge.electrons() as i32 - self.charge.holes() as i32
    }
}

/// Truncated product space: 16 charge configurations times photon numbers
/// `0..=p_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    p_max: usize,
}

impl HilbertSpace {
    pub fn new(p_max: usize) -> Self {
        Self { p_max }
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn dim(&self) -> usize {
        CHARGE_STATES * (self.p_max + 1)
    }

    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        (state.photons <= self.p_max).then(|| state.charge.index() + CHARGE_STATES * state.photons)
    }

    pub fn state(&self, index: usize) -> BasisState {
        assert!(index < self.dim(), "basis index {index} out of range");
        BasisState {
            charge: ChargeConfig((index % CHARGE_STATES) as u8),
            photons: index / CHARGE_STATES,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dim()).map(move |i| self.state(i))
    }
}

/// Enumerates the product basis with Fock cutoff `p_max`.
pub fn enumerate_basis(p_max: usize) -> HilbertSpace {
    HilbertSpace::new(p_max)
}

/// A linear operator on a [`HilbertSpace`], stored as a dense complex matrix.
#[derive(Clone)]
pub struct Operator {
    space: HilbertSpace,
    matrix: Mat<Complex64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("space", &self.space)
            .field("nonzeros", &self.nonzeros().len())
            .finish()
    }
}

impl Operator {
    pub fn zeros(space: HilbertSpace) -> Self {
        let n = space.dim();
        Self { space, matrix: Mat::zeros(n, n) }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let n = space.dim();
        Self { space, matrix: Mat::identity(n, n) }
    }

    pub fn from_fn(space: HilbertSpace, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let n = space.dim();
        Self { space, matrix: Mat::from_fn(n, n, f) }
    }

    /// Diagonal operator with entries computed from each basis state.
    pub fn diagonal(space: HilbertSpace, mut f: impl FnMut(BasisState) -> f64) -> Self {
        let mut op = Self::zeros(space);
        for i in 0..space.dim() {
            op.matrix[(i, i)] = Complex64::new(f(space.state(i)), 0.0);
        }
        op
    }

    pub fn from_matrix(space: HilbertSpace, matrix: Mat<Complex64>) -> Self {
        assert_eq!(matrix.nrows(), space.dim(), "matrix rows do not match the space");
        assert_eq!(matrix.ncols(), space.dim(), "matrix columns do not match the space");
        Self { space, matrix }
    }

    /// Outer product `|ket><bra|` of two basis states.
    pub fn projector(space: HilbertSpace, ket: BasisState, bra: BasisState) -> Self {
        let mut op = Self::zeros(space);
        let r = space.index_of(ket).expect("ket outside the truncated space");
        let c = space.index_of(bra).expect("bra outside the truncated space");
        op.matrix[(r, c)] = ONE;
        op
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<Complex64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.matrix[(row, col)] = value;
    }

    /// `<bra| O |ket>`.
    pub fn element(&self, bra: BasisState, ket: BasisState) -> Complex64 {
        match (self.space.index_of(bra), self.space.index_of(ket)) {
            (Some(r), Some(c)) => self.matrix[(r, c)],
            _ => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, matrix: self.matrix.adjoint().to_owned() }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let n = self.dim();
        Self {
            space: self.space,
            matrix: Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] * factor),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.matrix[(i, j)].norm());
            }
        }
        m
    }

    /// `max |O - O†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                m = m.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Nonzero entries as `(row, col, value)` in column-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, Complex64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = self.matrix[(i, j)];
                if v != ZERO {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Applies the operator to a state vector given in basis coordinates.
    pub fn apply(&self, ket: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(ket.len(), n);
        let mut out = vec![ZERO; n];
        for (j, &x) in ket.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * x;
            }
        }
        out
    }

    /// Basis vector for a single basis state.
    pub fn ket(space: HilbertSpace, state: BasisState) -> Vec<Complex64> {
        let mut v = vec![ZERO; space.dim()];
        v[space.index_of(state).expect("state outside the truncated space")] = ONE;
        v
    }

    fn check_same_space(&self, other: &Self) {
        assert_eq!(self.space, other.space, "operators act on different spaces");
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.check_same_space(rhs);
        Operator { space: self.space, matrix: &self.matrix + &rhs.matrix }
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.check_same_space(rhs);
        self.matrix += &rhs.matrix;
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.check_same_space(rhs);
        Operator { space: self.space, matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.check_same_space(rhs);
        Operator { space: self.space, matrix: &self.matrix * &rhs.matrix }
    }
}

impl Mul<&Operator> for Complex64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale_real(self)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Fermionic creation or annihilation operator for one S-shell mode. Acts as
/// the identity on the photon factor.
pub fn fermion_operator(space: HilbertSpace, species: Species, spin: Spin, kind: Ladder) -> Operator {
    let mode = Mode::new(species, spin);
    let mut op = Operator::zeros(space);
    for col in 0..space.dim() {
        let state = space.state(col);
        if let Some((sign, charge)) = state.charge.apply(mode, kind) {
            let row = space.index_of(BasisState::new(charge, state.photons)).unwrap();
            op.matrix[(row, col)] = Complex64::new(sign, 0.0);
        }
    }
    op
}

/// Cavity annihilation operator `a`, truncated at `p_max`.
pub fn photon_annihilator(space: HilbertSpace) -> Operator {
    let mut op = Operator::zeros(space);
    for col in 0..space.dim() {
        let state = space.state(col);
        if state.photons > 0 {
            let row = space
                .index_of(BasisState::new(state.charge, state.photons - 1))
                .unwrap();
            op.matrix[(row, col)] = Complex64::new((state.photons as f64).sqrt(), 0.0);
        }
    }
    op
}

/// Every operator the model is written in, built once per space.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub space: HilbertSpace,
    /// Electron annihilators `c_up`, `c_down`.
    pub c_up: Operator,
    pub c_down: Operator,
    /// Heavy-hole annihilators `d_up`, `d_down`.
    pub d_up: Operator,
    pub d_down: Operator,
    /// Cavity annihilator.
    pub a: Operator,
    pub composites: Composites,
}

/// Number, spin and bright-exciton operators built from the ladder operators.
#[derive(Clone, Debug)]
pub struct Composites {
    pub n_up: Operator,
    pub n_down: Operator,
    pub m_up: Operator,
    pub m_down: Operator,
    pub se_plus: Operator,
    pub se_minus: Operator,
    pub se_x: Operator,
    pub se_y: Operator,
    pub se_z: Operator,
    pub sh_plus: Operator,
    pub sh_minus: Operator,
    pub sh_z: Operator,
    /// `(d_down c_up - d_up c_down)/√2`
    pub b_x: Operator,
    /// `(d_down c_up + d_up c_down)/√2`
    pub b_y: Operator,
}

impl OperatorSet {
    pub fn new(space: HilbertSpace) -> Self {
        let ann = |species, spin| fermion_operator(space, species, spin, Ladder::Annihilate);
        let c_up = ann(Species::Electron, Spin::Up);
        let c_down = ann(Species::Electron, Spin::Down);
        let d_up = ann(Species::Hole, Spin::Up);
        let d_down = ann(Species::Hole, Spin::Down);
        let a = photon_annihilator(space);
        let composites = composite_operators_from(&c_up, &c_down, &d_up, &d_down);
        Self { space, c_up, c_down, d_up, d_down, a, composites }
    }

    pub fn annihilator(&self, species: Species, spin: Spin) -> &Operator {
        match (species, spin) {
            (Species::Electron, Spin::Up) => &self.c_up,
            (Species::Electron, Spin::Down) => &self.c_down,
            (Species::Hole, Spin::Up) => &self.d_up,
            (Species::Hole, Spin::Down) => &self.d_down,
        }
    }

    /// `d_{-σ} c_σ`, removal of a bright electron-hole pair.
    pub fn pair_annihilator(&self, electron_spin: Spin) -> Operator {
        self.annihilator(Species::Hole, electron_spin.flipped()) * self.annihilator(Species::Electron, electron_spin)
    }

    pub fn electron_number(&self) -> Operator {
        &self.composites.n_up + &self.composites.n_down
    }

    pub fn hole_number(&self) -> Operator {
        &self.composites.m_up + &self.composites.m_down
    }

    pub fn photon_number(&self) -> Operator {
        &self.a.adjoint() * &self.a
    }

    /// `K = a†a + (N_e + N_h)/2`.
    pub fn excitation_number(&self) -> Operator {
        let carriers = &self.electron_number() + &self.hole_number();
        &self.photon_number() + &carriers.scale_real(0.5)
    }
}

/// Builds the named composite operators on `space`.
pub fn composite_operators(space: HilbertSpace) -> Composites {
    OperatorSet::new(space).composites
}

fn composite_operators_from(c_up: &Operator, c_down: &Operator, d_up: &Operator, d_down: &Operator) -> Composites {
    let n_up = &c_up.adjoint() * c_up;
    let n_down = &c_down.adjoint() * c_down;
    let m_up = &d_up.adjoint() * d_up;
    let m_down = &d_down.adjoint() * d_down;
    let se_plus = &c_up.adjoint() * c_down;
    let se_minus = &c_down.adjoint() * c_up;
    let sh_plus = &d_up.adjoint() * d_down;
    let sh_minus = &d_down.adjoint() * d_up;
    let half = Complex64::new(0.5, 0.0);
    let se_x = half * &(&se_plus + &se_minus);
    let se_y = Complex64::new(0.0, -0.5) * &(&se_plus - &se_minus);
    let se_z = half * &(&n_up - &n_down);
    let sh_z = half * &(&m_up - &m_down);
    let down_up = d_down * c_up;
    let up_down = d_up * c_down;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let b_x = r * &(&down_up - &up_down);
    let b_y = r * &(&down_up + &up_down);
    Composites {
        n_up,
        n_down,
        m_up,
        m_down,
        se_plus,
        se_minus,
        se_x,
        se_y,
        se_z,
        sh_plus,
        sh_minus,
        sh_z,
        b_x,
        b_y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Operator, b: &Operator) -> bool {
        a.max_abs_diff(b) < 1e-14
    }

    #[test]
    fn dimensions() {
        assert_eq!(enumerate_basis(0).dim(), 16);
        assert_eq!(enumerate_basis(2).dim(), 48);
        let space = enumerate_basis(2);
        assert_eq!(space.index_of(BasisState::new(ChargeConfig::GS, 1)), Some(16));
        assert_eq!(space.index_of(BasisState::new(ChargeConfig::GS, 3)), None);
    }

    #[test]
    fn sixteen_distinct_configs_and_aliases() {
        let all: std::collections::HashSet<_> = ChargeConfig::all().collect();
        assert_eq!(all.len(), 16);
        assert_eq!(ChargeConfig::new(false, true, true, false), ChargeConfig::BRIGHT_PLUS);
        assert_eq!(ChargeConfig::new(true, false, false, true), ChargeConfig::BRIGHT_MINUS);
        assert_eq!(ChargeConfig::new(true, false, true, false), ChargeConfig::DARK_PLUS);
        assert_eq!(ChargeConfig::new(false, true, false, true), ChargeConfig::DARK_MINUS);
        assert_eq!(ChargeConfig::new(true, true, true, true), ChargeConfig::BIEXCITON);
        let trions_plus = ChargeConfig::all().filter(|c| c.kind() == ChargeKind::PositiveTrion);
        assert!(trions_plus.clone().all(|c| c.electrons() == 1 && c.holes() == 2));
        assert_eq!(trions_plus.count(), 2);
        let trions_minus = ChargeConfig::all().filter(|c| c.kind() == ChargeKind::NegativeTrion);
        assert!(trions_minus.clone().all(|c| c.electrons() == 2 && c.holes() == 1));
        assert_eq!(ChargeConfig::BRIGHT_PLUS.kind(), ChargeKind::BrightExciton);
        assert_eq!(ChargeConfig::DARK_MINUS.kind(), ChargeKind::DarkExciton);
    }

    proptest! {
        #[test]
        fn index_round_trips(p_max in 0usize..5, raw in 0usize..1000) {
            let space = enumerate_basis(p_max);
            let index = raw % space.dim();
            let state = space.state(index);
            prop_assert_eq!(space.index_of(state), Some(index));
            prop_assert_eq!(index, state.charge.index() + 16 * state.photons);
        }
    }

    #[test]
    fn canonical_anticommutation() {
        let space = enumerate_basis(1);
        let ops = OperatorSet::new(space);
        let modes = [&ops.c_up, &ops.c_down, &ops.d_up, &ops.d_down];
        let id = Operator::identity(space);
        let zero = Operator::zeros(space);
        for (i, x) in modes.iter().enumerate() {
            for (j, y) in modes.iter().enumerate() {
                let mixed = x.anticommutator(&y.adjoint());
                let expected = if i == j { &id } else { &zero };
                assert!(close(&mixed, expected), "{{f_{i}, f_{j}†}}");
                assert!(close(&x.anticommutator(y), &zero), "{{f_{i}, f_{j}}}");
            }
        }
    }

    #[test]
    fn annihilating_the_empty_mode() {
        let space = enumerate_basis(2);
        let ops = OperatorSet::new(space);
        for p in 0..=2 {
            let ket = Operator::ket(space, BasisState::new(ChargeConfig::GS, p));
            assert!(ops.c_up.apply(&ket).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn distinct_modes_anticommute_on_vacuum() {
        let space = enumerate_basis(0);
        let ops = OperatorSet::new(space);
        let gs = Operator::ket(space, BasisState::new(ChargeConfig::GS, 0));
        let up_dag = ops.c_up.adjoint();
        let down_dag = ops.c_down.adjoint();
        let lhs = down_dag.apply(&up_dag.apply(&gs));
        let rhs = up_dag.apply(&down_dag.apply(&gs));
        for (l, r) in lhs.iter().zip(&rhs) {
            assert_eq!(*l, -*r);
        }
        assert!(lhs.iter().any(|z| z.norm() > 0.5));
    }

    #[test]
    fn photon_ladder() {
        let space = enumerate_basis(2);
        let a = photon_annihilator(space);
        let one = Operator::ket(space, BasisState::new(ChargeConfig::GS, 1));
        let out = a.apply(&one);
        assert_eq!(out[space.index_of(BasisState::new(ChargeConfig::GS, 0)).unwrap()], ONE);
        let n = &a.adjoint() * &a;
        for state in space.states() {
            let i = space.index_of(state).unwrap();
            assert!((n.get(i, i).re - state.photons as f64).abs() < 1e-14);
        }
        // truncation row: <p_max| a a† |p_max> = 0
        let top = BasisState::new(ChargeConfig::BIEXCITON, 2);
        assert_eq!((&a * &a.adjoint()).element(top, top), ZERO);
        // [a, a†] = 1 below the cutoff
        let comm = a.commutator(&a.adjoint());
        for state in space.states() {
            let i = space.index_of(state).unwrap();
            let expected = if state.photons < 2 { 1.0 } else { -2.0 };
            assert!((comm.get(i, i).re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn bright_exciton_creation_from_ground_state() {
        let space = enumerate_basis(0);
        let c = composite_operators(space);
        let gs = BasisState::new(ChargeConfig::GS, 0);
        let plus = BasisState::new(ChargeConfig::BRIGHT_PLUS, 0);
        let minus = BasisState::new(ChargeConfig::BRIGHT_MINUS, 0);
        let bx_dag = c.b_x.adjoint();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // B_x†|GS> = -(|+1> - |-1>)/√2
        assert!((bx_dag.element(plus, gs) - Complex64::new(-r, 0.0)).norm() < 1e-15);
        assert!((bx_dag.element(minus, gs) - Complex64::new(r, 0.0)).norm() < 1e-15);
        let x = &c.b_x * &bx_dag;
        let y = &c.b_y * &c.b_y.adjoint();
        assert!((x.element(gs, gs) - ONE).norm() < 1e-15);
        assert!((y.element(gs, gs) - ONE).norm() < 1e-15);
    }

    #[test]
    fn spin_operators_on_excitons() {
        let space = enumerate_basis(0);
        let c = composite_operators(space);
        let dark_plus = BasisState::new(ChargeConfig::DARK_PLUS, 0);
        assert!((c.se_z.element(dark_plus, dark_plus).re - 0.5).abs() < 1e-15);
        let plus = BasisState::new(ChargeConfig::BRIGHT_PLUS, 0);
        let minus = BasisState::new(ChargeConfig::BRIGHT_MINUS, 0);
        let flip = &c.sh_plus * &c.se_minus;
        assert!((flip.element(plus, minus).norm() - 1.0).abs() < 1e-15);
        let ket = Operator::ket(space, minus);
        let out = flip.apply(&ket);
        let weight: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        assert!((weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fermions_act_as_identity_on_photons() {
        let space = enumerate_basis(2);
        let ops = OperatorSet::new(space);
        for op in [&ops.c_up, &ops.d_down, &ops.composites.b_y] {
            for (r, c, v) in op.nonzeros() {
                let (sr, sc) = (space.state(r), space.state(c));
                assert_eq!(sr.photons, sc.photons);
                // the same charge block repeats on every Fock sector
                for p in 0..=2 {
                    let rr = space.index_of(BasisState::new(sr.charge, p)).unwrap();
                    let cc = space.index_of(BasisState::new(sc.charge, p)).unwrap();
                    assert_eq!(op.get(rr, cc), v);
                }
            }
        }
        for (r, c, _) in ops.a.nonzeros() {
            assert_eq!(space.state(r).charge, space.state(c).charge);
        }
    }

    #[test]
    fn observables_independent_of_mode_order() {
        // Number operators and the bright-pair density B†B are even in the
        // fermions, so they must be diagonal/real regardless of JW phases.
        let space = enumerate_basis(0);
        let c = composite_operators(space);
        let bright = &(&c.b_x.adjoint() * &c.b_x) + &(&c.b_y.adjoint() * &c.b_y);
        let occ = |ch: ChargeConfig, s, sp| ch.is_occupied(Mode::new(s, sp)) as u8 as f64;
        for state in space.states() {
            let ch = state.charge;
            // number of optically active electron-hole pairs: n_up m_down + n_down m_up
            let expected = occ(ch, Species::Electron, Spin::Up) * occ(ch, Species::Hole, Spin::Down)
                + occ(ch, Species::Electron, Spin::Down) * occ(ch, Species::Hole, Spin::Up);
            let v = bright.element(state, state);
            assert!((v.re - expected).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }
}
