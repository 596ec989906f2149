//! Full Hamiltonian matrices on truncated Fock ⊗ spin spaces.
//!
//! Every model is an instance of
//!
//! ```text
//! H = p_r ω_r b†b + p_q ω_q S_z − g_x (b+b†) S_x − i g_y (b−b†) S_y
//!     + s_x D_x S_x² + s_y D_y S_y²
//! ```
//!
//! with S_k = Σ σ_k/2. One qubit is p_r = p_q = 1, D = 0. The two-qubit
//! circuit model uses p_r = p_q = 1 and signs (−, +); after the local
//! rotation that flips the D_x sign it becomes p_r = 3, p_q = 2 with signs
//! (+, +), which is also the convention of the three-qubit and collective
//! models. Matrices keep every constant term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Module, Result};
use crate::numerics::{eigh, eigvalsh, kron, C64, ComplexMatrix, EigDecomposition};
use crate::operators::{angular_momentum_block, fock, spins, HalfInt};

/// Largest qubit count for the full tensor-product builder.
pub const MAX_TENSOR_QUBITS: usize = 4;

fn plus_one() -> i8 {
    1
}

fn one() -> u8 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub omega_r: f64,
    pub omega_q: f64,
    pub g_x: f64,
    pub g_y: f64,
    pub n_qubits: usize,
    #[serde(default)]
    pub d_x: f64,
    #[serde(default)]
    pub d_y: f64,
    #[serde(default = "plus_one")]
    pub sign_x: i8,
    #[serde(default = "plus_one")]
    pub sign_y: i8,
    /// 1 or 3.
    #[serde(default = "one")]
    pub resonator_prefactor: u8,
    /// 1 (ω_q S_z, i.e. ω_q σ_z/2 for one qubit) or 2 (2ω_q S_z).
    #[serde(default = "one")]
    pub qubit_prefactor: u8,
}

/// Sign and prefactor convention of the multi-qubit Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// As quantized from the circuit: ω_r d†d + ω_q S_z, signs (−, +).
    Circuit,
    /// After the D_x sign flip: 3ω_r d†d + 2ω_q S_z, signs (+, +).
    Rotated,
}

impl ModelParams {
    pub fn one_qubit(omega_r: f64, omega_q: f64, g_x: f64, g_y: f64) -> Self {
        Self {
            omega_r,
            omega_q,
            g_x,
            g_y,
            n_qubits: 1,
            d_x: 0.0,
            d_y: 0.0,
            sign_x: 1,
            sign_y: 1,
            resonator_prefactor: 1,
            qubit_prefactor: 1,
        }
    }

    /// One qubit from dimensionless couplings, ω_r = 1 and ω_q = `ratio`.
    pub fn one_qubit_lambda(ratio: f64, lambda_x: f64, lambda_y: f64) -> Self {
        let s = ratio.sqrt();
        Self::one_qubit(1.0, ratio, lambda_x * s, lambda_y * s)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn multi_qubit(
        convention: Convention,
        omega_r: f64,
        omega_q: f64,
        g_x: f64,
        g_y: f64,
        n_qubits: usize,
        d_x: f64,
        d_y: f64,
    ) -> Self {
        let (sign_x, resonator_prefactor, qubit_prefactor) = match convention {
            Convention::Circuit => (-1, 1, 1),
            Convention::Rotated => (1, 3, 2),
        };
        Self {
            omega_r,
            omega_q,
            g_x,
            g_y,
            n_qubits,
            d_x,
            d_y,
            sign_x,
            sign_y: 1,
            resonator_prefactor,
            qubit_prefactor,
        }
    }

    /// Multi-qubit model from λ′ with ω_r = 1, ω_q = `ratio` and the tied
    /// coefficients D_k = g_k²/ω_r = λ_k² ω_q.
    pub fn multi_qubit_lambda(
        convention: Convention,
        ratio: f64,
        n_qubits: usize,
        lambda_x: f64,
        lambda_y: f64,
    ) -> Self {
        let s = ratio.sqrt();
        Self::multi_qubit(
            convention,
            1.0,
            ratio,
            lambda_x * s,
            lambda_y * s,
            n_qubits,
            lambda_x * lambda_x * ratio,
            lambda_y * lambda_y * ratio,
        )
    }

    /// Symmetric N-qubit model: g = λ√(Ω_rΩ_q), D = λ²Ω_q.
    pub fn collective(omega_r: f64, omega_q: f64, lambda: f64, n_qubits: usize) -> Self {
        let g = lambda * (omega_r * omega_q).sqrt();
        let d = lambda * lambda * omega_q;
        Self::multi_qubit(Convention::Rotated, omega_r, omega_q, g, g, n_qubits, d, d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |code: &'static str, msg: String| Err(Error::validation(Module::Models, code, msg));
        if !(self.omega_r > 0.0 && self.omega_r.is_finite()) {
            return bad("omega_r", format!("omega_r must be positive, got {}", self.omega_r));
        }
        if !(self.omega_q > 0.0 && self.omega_q.is_finite()) {
            return bad("omega_q", format!("omega_q must be positive, got {}", self.omega_q));
        }
        for (name, v) in [("g_x", self.g_x), ("g_y", self.g_y), ("d_x", self.d_x), ("d_y", self.d_y)] {
            if !v.is_finite() {
                return bad("coupling", format!("{name} must be finite, got {v}"));
            }
        }
        if self.n_qubits == 0 {
            return bad("qubit_count", "n_qubits must be at least 1".into());
        }
        if !matches!(self.sign_x, -1 | 1) || !matches!(self.sign_y, -1 | 1) {
            return bad(
                "sign",
                format!("signs must be ±1, got ({}, {})", self.sign_x, self.sign_y),
            );
        }
        if !matches!(self.resonator_prefactor, 1 | 3) {
            return bad(
                "prefactor",
                format!("resonator_prefactor must be 1 or 3, got {}", self.resonator_prefactor),
            );
        }
        if !matches!(self.qubit_prefactor, 1 | 2) {
            return bad(
                "prefactor",
                format!("qubit_prefactor must be 1 or 2, got {}", self.qubit_prefactor),
            );
        }
        Ok(())
    }
}

/// Boson displacement b → b + α applied before the matrix is built.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameSpec {
    pub alpha: C64,
}

impl FrameSpec {
    pub fn lab() -> Self {
        Self::default()
    }

    pub fn displaced(alpha: C64) -> Self {
        Self { alpha }
    }
}

struct SpinSector {
    s_x: ComplexMatrix,
    s_y: ComplexMatrix,
    /// Every b-independent term: p_q ω_q S_z and the quadratic spin terms.
    qubit: ComplexMatrix,
}

fn assemble(p: &ModelParams, n_cut: usize, frame: FrameSpec, spin: SpinSector) -> Result<ComplexMatrix> {
    let f = fock(n_cut)?;
    let shift = ComplexMatrix::identity(n_cut).scale(frame.alpha);
    let b = &f.a + &shift;
    let b_dag = b.adjoint();
    let number = b_dag.matmul(&b);
    let x = &b + &b_dag;
    // i(b − b†)
    let y = (&b - &b_dag).scale(C64::new(0.0, 1.0));
    let sdim = spin.qubit.rows();

    let mut h = kron(&number, &ComplexMatrix::identity(sdim));
    h = h.scale_real(p.resonator_prefactor as f64 * p.omega_r);
    h.add_scaled_real(&kron(&ComplexMatrix::identity(n_cut), &spin.qubit), 1.0);
    h.add_scaled_real(&kron(&x, &spin.s_x), -p.g_x);
    h.add_scaled_real(&kron(&y, &spin.s_y), -p.g_y);
    Ok(h.hermitian_part())
}

/// ω_r b†b + ω_q σ_z/2 − g_x(b+b†)σ_x/2 − i g_y(b−b†)σ_y/2 on n_cut·2 states.
pub fn build_one_qubit(p: &ModelParams, n_cut: usize, frame: FrameSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    if p.n_qubits != 1 || p.d_x != 0.0 || p.d_y != 0.0 {
        return Err(Error::validation(
            Module::Models,
            "one_qubit",
            format!(
                "one-qubit model needs n_qubits = 1 and D_x = D_y = 0, got n_qubits = {}, D = ({}, {})",
                p.n_qubits, p.d_x, p.d_y
            ),
        ));
    }
    build_tensor(p, n_cut, frame)
}

/// Full tensor-product build for 2 ≤ N ≤ 4.
pub fn build_multi_qubit(p: &ModelParams, n_cut: usize, frame: FrameSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    if p.n_qubits < 2 || p.n_qubits > MAX_TENSOR_QUBITS {
        return Err(Error::validation(
            Module::Models,
            "qubit_count",
            format!(
                "build_multi_qubit supports 2..={MAX_TENSOR_QUBITS} qubits, got {}; use build_collective_block for larger symmetric models",
                p.n_qubits
            ),
        ));
    }
    build_tensor(p, n_cut, frame)
}

fn build_tensor(p: &ModelParams, n_cut: usize, frame: FrameSpec) -> Result<ComplexMatrix> {
    let s = spins(p.n_qubits)?;
    let mut qubit = s.s_z.scale_real(p.qubit_prefactor as f64 * p.omega_q);
    if p.d_x != 0.0 {
        qubit.add_scaled_real(&s.s_x.matmul(&s.s_x), p.sign_x as f64 * p.d_x);
    }
    if p.d_y != 0.0 {
        qubit.add_scaled_real(&s.s_y.matmul(&s.s_y), p.sign_y as f64 * p.d_y);
    }
    assemble(
        p,
        n_cut,
        frame,
        SpinSector {
            s_x: s.s_x,
            s_y: s.s_y,
            qubit,
        },
    )
}

/// The total-spin-j block of the symmetric model,
/// p_r Ω_r t†t + p_q Ω_q J_z + D(j(j+1) − J_z²) − g(t+t†)J_x − i g(t−t†)J_y.
pub fn build_collective_block(p: &ModelParams, j: HalfInt, n_cut: usize, frame: FrameSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    if p.g_x != p.g_y || p.d_x != p.d_y || p.sign_x != 1 || p.sign_y != 1 {
        return Err(Error::validation(
            Module::Models,
            "collective",
            format!(
                "collective blocks need g_x = g_y, D_x = D_y and signs (+, +), got g = ({}, {}), D = ({}, {}), signs ({}, {})",
                p.g_x, p.g_y, p.d_x, p.d_y, p.sign_x, p.sign_y
            ),
        ));
    }
    let twice = j.twice() as usize;
    if twice > p.n_qubits || (p.n_qubits - twice) % 2 != 0 {
        return Err(Error::validation(
            Module::Models,
            "spin_number",
            format!("j = {j} is not allowed for {} qubits", p.n_qubits),
        ));
    }
    let block = angular_momentum_block(j);
    let dim = block.dim();
    let diag: Vec<f64> = (0..dim)
        .map(|k| {
            let m = block.m_z(k);
            p.qubit_prefactor as f64 * p.omega_q * m + p.d_x * (block.casimir() - m * m)
        })
        .collect();
    assemble(
        p,
        n_cut,
        frame,
        SpinSector {
            s_x: block.j_x,
            s_y: block.j_y,
            qubit: ComplexMatrix::from_real_diag(&diag),
        },
    )
}

/// Cutoff-doubling policy shared by every exact-diagonalization caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    /// Number of lowest eigenvalues that must be stable.
    pub levels: usize,
    /// Allowed shift, in units of ω_r.
    pub tol: f64,
    pub max_cutoff: usize,
    /// Cap on the total matrix dimension n_cut·(spin dimension).
    pub max_dim: usize,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self {
            levels: 6,
            tol: 1e-8,
            max_cutoff: 4096,
            max_dim: 2048,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Converged {
    pub eig: EigDecomposition,
    pub n_cut: usize,
}

/// Diagonalizes `build(n_cut)` for n_cut, 2n_cut, … until the lowest
/// `policy.levels` eigenvalues move by less than `policy.tol·omega_r`.
/// `spin_dim` is the dimension of the non-boson factor.
pub fn diagonalize_converged(
    build: impl Fn(usize) -> Result<ComplexMatrix>,
    n_cut: usize,
    spin_dim: usize,
    omega_r: f64,
    policy: CutoffPolicy,
) -> Result<Converged> {
    let limit = policy.max_cutoff.min(policy.max_dim / spin_dim.max(1));
    if n_cut < 2 || n_cut > limit {
        return Err(Error::validation(
            Module::Models,
            "cutoff",
            format!("initial cutoff must be in 2..={limit}, got {n_cut}"),
        ));
    }
    // eigenvalues drive the doubling; vectors only at the accepted cutoff
    let mut cut = n_cut;
    let mut previous = eigvalsh(&build(cut)?)?;
    while cut < limit {
        let next_cut = (cut * 2).min(limit);
        let h = build(next_cut)?;
        let next = eigvalsh(&h)?;
        let k = policy.levels.min(previous.len());
        let shift = previous[..k]
            .iter()
            .zip(&next[..k])
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if shift < policy.tol * omega_r {
            return Ok(Converged {
                eig: eigh(&h)?,
                n_cut: next_cut,
            });
        }
        cut = next_cut;
        previous = next;
    }
    Err(Error::numerical(
        Module::Models,
        "cutoff_no_convergence",
        format!(
            "lowest {} levels not converged to {:.1e} at n_cut = {cut} (dimension {})",
            policy.levels,
            policy.tol,
            cut * spin_dim
        ),
    ))
}
