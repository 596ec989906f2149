//! Elementary operators on truncated Fock ⊗ spin spaces.
//!
//! Basis convention used everywhere in the crate: boson index major, spin
//! index minor. A spin index is the binary string q₁…q_N with qubit 1 the
//! most significant bit; bit value 0 is the lower level (σ₊σ₋ = 0) and 1
//! the upper level. Angular-momentum blocks are ordered m_z = −j, …, j.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Module, Result};
use crate::numerics::{C64, ComplexMatrix};

const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone)]
pub struct FockOperators {
    pub cutoff: usize,
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub n: ComplexMatrix,
}

pub fn fock(n_cut: usize) -> Result<FockOperators> {
    if n_cut < 2 {
        return Err(Error::validation(
            Module::Operators,
            "cutoff",
            format!("Fock cutoff must be at least 2, got {n_cut}"),
        ));
    }
    let mut a = ComplexMatrix::zeros(n_cut, n_cut);
    for m in 1..n_cut {
        a[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let n = ComplexMatrix::from_real_diag(&(0..n_cut).map(|m| m as f64).collect::<Vec<_>>());
    Ok(FockOperators {
        cutoff: n_cut,
        a,
        a_dag,
        n,
    })
}

/// Exact matrix elements ⟨m|D(β)|n⟩ of the displacement operator
/// D(β) = exp(βa† − β*a) for m, n < `dim`.
///
/// For m ≥ n the element is e^{−x/2} g(n, m−n) e^{i(m−n)arg β} with
/// x = |β|² and g(n, k) = √(n!/(n+k)!) x^{k/2} L_n^{(k)}(x). The scaled
/// Laguerre values obey a bounded three-term recurrence in n, which stays
/// accurate at cutoffs in the thousands where a column-by-column build from
/// the coherent state loses unitarity.
pub fn displacement_matrix(beta: C64, dim: usize) -> ComplexMatrix {
    let mut d = ComplexMatrix::zeros(dim, dim);
    let x = beta.norm_sqr();
    let damping = (-0.5 * x).exp();
    let angle = beta.arg();
    let mut g = vec![0.0; dim];
    for k in 0..dim {
        let len = dim - k;
        g[0] = if k == 0 {
            1.0
        } else if x == 0.0 {
            0.0
        } else {
            (0.5 * k as f64 * x.ln() - 0.5 * ln_factorial(k)).exp()
        };
        if len > 1 {
            g[1] = g[0] * (1.0 / (k as f64 + 1.0)).sqrt() * (1.0 + k as f64 - x);
        }
        for n in 1..len.saturating_sub(1) {
            let (nf, kf) = (n as f64, k as f64);
            let r = ((nf + 1.0) / (nf + kf + 1.0)).sqrt();
            let r_prev = (nf / (nf + kf)).sqrt();
            g[n + 1] = ((2.0 * nf + 1.0 + kf - x) * g[n] * r - (nf + kf) * g[n - 1] * r * r_prev) / (nf + 1.0);
        }
        let lower = C64::from_polar(damping, k as f64 * angle);
        let upper = C64::from_polar(damping, k as f64 * (std::f64::consts::PI - angle));
        for n in 0..len {
            d[(n + k, n)] = lower * g[n];
            if k > 0 {
                d[(n, n + k)] = upper * g[n];
            }
        }
    }
    d
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl Pauli {
    /// 2×2 matrix in the (lower, upper) basis.
    pub fn matrix(self) -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            Pauli::X => [z, one, one, z],
            Pauli::Y => [z, i, -i, z],
            Pauli::Z => [-one, z, z, one],
            Pauli::Plus => [z, z, one, z],
            Pauli::Minus => [z, one, z, z],
        };
        ComplexMatrix::from_vec(2, 2, entries.to_vec()).expect("2x2")
    }
}

#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub n_qubits: usize,
    pub s_x: ComplexMatrix,
    pub s_y: ComplexMatrix,
    pub s_z: ComplexMatrix,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Single-qubit operator `op` acting on `qubit` (0-based, qubit 0 the most
    /// significant bit), identity elsewhere.
    pub fn sigma(&self, qubit: usize, op: Pauli) -> ComplexMatrix {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        embed_single(self.n_qubits, qubit, &op.matrix())
    }

    /// S_x² + S_y² + S_z².
    pub fn total_squared(&self) -> ComplexMatrix {
        let mut s2 = self.s_x.matmul(&self.s_x);
        s2 = &s2 + &self.s_y.matmul(&self.s_y);
        &s2 + &self.s_z.matmul(&self.s_z)
    }

    pub fn s_plus(&self) -> ComplexMatrix {
        let mut p = self.s_x.clone();
        p.add_scaled(&self.s_y, C64::new(0.0, 1.0));
        p
    }
}

fn embed_single(n_qubits: usize, qubit: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let dim = 1usize << n_qubits;
    let shift = n_qubits - 1 - qubit;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let bit = (col >> shift) & 1;
        for new_bit in 0..2 {
            let amp = op[(new_bit, bit)];
            if amp != C64::new(0.0, 0.0) {
                let row = (col & !(1 << shift)) | (new_bit << shift);
                out[(row, col)] += amp;
            }
        }
    }
    out
}

pub fn spins(n_qubits: usize) -> Result<SpinOperators> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::validation(
            Module::Operators,
            "qubit_count",
            format!("qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"),
        ));
    }
    let dim = 1usize << n_qubits;
    let mut s = [
        ComplexMatrix::zeros(dim, dim),
        ComplexMatrix::zeros(dim, dim),
        ComplexMatrix::zeros(dim, dim),
    ];
    for q in 0..n_qubits {
        for (acc, op) in s.iter_mut().zip([Pauli::X, Pauli::Y, Pauli::Z]) {
            acc.add_scaled_real(&embed_single(n_qubits, q, &op.matrix()), 0.5);
        }
    }
    let [s_x, s_y, s_z] = s;
    Ok(SpinOperators {
        n_qubits,
        s_x,
        s_y,
        s_z,
    })
}

/// A non-negative half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfInt {
    twice: u32,
}

impl HalfInt {
    pub const fn from_twice(twice: u32) -> Self {
        HalfInt { twice }
    }

    pub fn new(value: f64) -> Result<Self> {
        let t = 2.0 * value;
        if !(t >= 0.0) || (t - t.round()).abs() > 1e-9 || t > u32::MAX as f64 {
            return Err(Error::validation(
                Module::Operators,
                "half_integer",
                format!("{value} is not a non-negative half-integer"),
            ));
        }
        Ok(HalfInt { twice: t.round() as u32 })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// 2j + 1
    pub fn multiplet_dim(self) -> usize {
        self.twice as usize + 1
    }

    /// j(j+1)
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        HalfInt::new(v)
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

#[derive(Debug, Clone)]
pub struct AngularMomentumBlock {
    pub j: HalfInt,
    pub j_x: ComplexMatrix,
    pub j_y: ComplexMatrix,
    pub j_z: ComplexMatrix,
    pub j_plus: ComplexMatrix,
    pub j_minus: ComplexMatrix,
}

impl AngularMomentumBlock {
    pub fn dim(&self) -> usize {
        self.j.multiplet_dim()
    }

    pub fn casimir(&self) -> f64 {
        self.j.casimir()
    }

    /// m_z of basis index k.
    pub fn m_z(&self, k: usize) -> f64 {
        k as f64 - self.j.value()
    }
}

pub fn angular_momentum_block(j: HalfInt) -> AngularMomentumBlock {
    let dim = j.multiplet_dim();
    let jv = j.value();
    let mut j_plus = ComplexMatrix::zeros(dim, dim);
    let mut z = Vec::with_capacity(dim);
    for k in 0..dim {
        let m = k as f64 - jv;
        z.push(m);
        if k + 1 < dim {
            j_plus[(k + 1, k)] = C64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let j_minus = j_plus.adjoint();
    let j_x = (&j_plus + &j_minus).scale_real(0.5);
    let j_y = (&j_plus - &j_minus).scale(C64::new(0.0, -0.5));
    AngularMomentumBlock {
        j,
        j_x,
        j_y,
        j_z: ComplexMatrix::from_real_diag(&z),
        j_plus,
        j_minus,
    }
}

/// Spin numbers j allowed for N spin-½ particles, ascending.
pub fn allowed_spins(n_qubits: usize) -> Vec<HalfInt> {
    let top = n_qubits as u32;
    (0..=top)
        .filter(|t| (top - t) % 2 == 0)
        .map(HalfInt::from_twice)
        .collect()
}

#[derive(Debug, Clone)]
pub struct SymmetryOperators {
    pub parity: ComplexMatrix,
    pub excitation: ComplexMatrix,
}

/// Π = e^{iπN̂} and N̂ = n ⊗ I + I ⊗ Σσ⁺σ⁻ on the full Fock ⊗ 2^N space.
pub fn symmetry_ops(n_cut: usize, n_qubits: usize) -> Result<SymmetryOperators> {
    fock(n_cut)?;
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::validation(
            Module::Operators,
            "qubit_count",
            format!("qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"),
        ));
    }
    let sdim = 1usize << n_qubits;
    let exc: Vec<f64> = (0..n_cut * sdim)
        .map(|idx| (idx / sdim) as f64 + (idx % sdim).count_ones() as f64)
        .collect();
    Ok(symmetry_from_excitations(&exc))
}

/// Π and N̂ on a Fock ⊗ angular-momentum block: N̂ = n + m_z + N/2.
pub fn block_symmetry_ops(n_cut: usize, j: HalfInt, n_qubits: usize) -> Result<SymmetryOperators> {
    fock(n_cut)?;
    if j.twice() as usize > n_qubits || (n_qubits - j.twice() as usize) % 2 != 0 {
        return Err(Error::validation(
            Module::Operators,
            "spin_number",
            format!("j = {j} is not allowed for {n_qubits} qubits"),
        ));
    }
    let dim = j.multiplet_dim();
    // m_z + N/2 = k − j + N/2 is an integer for allowed j
    let offset = (n_qubits as i64 - j.twice() as i64) / 2;
    let exc: Vec<f64> = (0..n_cut * dim)
        .map(|idx| ((idx / dim) as i64 + (idx % dim) as i64 + offset) as f64)
        .collect();
    Ok(symmetry_from_excitations(&exc))
}

fn symmetry_from_excitations(exc: &[f64]) -> SymmetryOperators {
    let parity: Vec<f64> = exc
        .iter()
        .map(|&e| if (e as i64) % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    SymmetryOperators {
        parity: ComplexMatrix::from_real_diag(&parity),
        excitation: ComplexMatrix::from_real_diag(exc),
    }
}
