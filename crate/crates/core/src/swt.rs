//! Numerical Schrieffer–Wolff transformation to second order.
//!
//! The Hilbert space is partitioned into blocks, each spanned by the columns
//! of an isometry. H₀ must not couple different blocks and V must vanish
//! inside each block. The generator is built in the eigenbasis of H₀,
//! diagonalizing each block separately so that degeneracies across blocks
//! never mix their eigenvectors:
//!
//! ```text
//! S₁_ij = V_ij / (E_i − E_j)   for i, j in different blocks
//! H_eff = P (H₀ + ½[S₁, V]) P
//! ```

use crate::error::{Error, Module, Result};
use crate::models::ModelParams;
use crate::numerics::{commutator, eigh, kron, C64, ComplexMatrix};
use crate::operators::{angular_momentum_block, fock, spins, HalfInt, Pauli};

/// Relative tolerance for the block-structure checks.
pub const BLOCK_TOL: f64 = 1e-10;
/// Cross-block pairs closer than this (relative to ‖H₀‖) are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Couplings below this (relative to ‖V‖) are ignored by the degeneracy check.
pub const COUPLING_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BlockSplit {
    pub h0: ComplexMatrix,
    pub v: ComplexMatrix,
    /// Isometries whose column spaces partition the Hilbert space.
    pub blocks: Vec<ComplexMatrix>,
    /// Index of the low-energy block.
    pub low: usize,
}

impl BlockSplit {
    /// General partition. Checks orthonormality, completeness and the block
    /// conditions on H₀ and V.
    pub fn partition(h0: ComplexMatrix, v: ComplexMatrix, blocks: Vec<ComplexMatrix>, low: usize) -> Result<Self> {
        let dim = h0.rows();
        if !h0.is_square() || v.rows() != dim || v.cols() != dim {
            return Err(invalid("shape", format!("H₀ and V must be square of equal size, got {}×{} and {}×{}", h0.rows(), h0.cols(), v.rows(), v.cols())));
        }
        if low >= blocks.len() {
            return Err(invalid("low_block", format!("low block index {low} out of range for {} blocks", blocks.len())));
        }
        let total: usize = blocks.iter().map(|b| b.cols()).sum();
        if total != dim || blocks.iter().any(|b| b.rows() != dim || b.cols() == 0) {
            return Err(invalid("partition", format!("blocks must be non-empty isometries spanning dimension {dim}, got total rank {total}")));
        }
        let basis = hstack(&blocks);
        if basis.adjoint().matmul(&basis).max_abs_diff(&ComplexMatrix::identity(dim)) > BLOCK_TOL {
            return Err(invalid("partition", "block isometries are not mutually orthonormal"));
        }
        let h_scale = h0.max_abs().max(f64::MIN_POSITIVE);
        let v_scale = v.max_abs().max(f64::MIN_POSITIVE);
        for (a, ua) in blocks.iter().enumerate() {
            let inside = ua.adjoint().matmul(&v).matmul(ua).max_abs();
            if inside > BLOCK_TOL * v_scale {
                return Err(invalid("block_structure", format!("V has block-diagonal part {inside:.3e} in block {a}")));
            }
            for (b, ub) in blocks.iter().enumerate().skip(a + 1) {
                let cross = ua.adjoint().matmul(&h0).matmul(ub).max_abs();
                if cross > BLOCK_TOL * h_scale {
                    return Err(invalid("block_structure", format!("H₀ couples blocks {a} and {b} ({cross:.3e})")));
                }
            }
        }
        Ok(Self { h0, v, blocks, low })
    }

    /// Two blocks from a projector P onto the low subspace.
    pub fn two_block(p: &ComplexMatrix, h0: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        if p.adjoint().max_abs_diff(p) > BLOCK_TOL || p.matmul(p).max_abs_diff(p) > BLOCK_TOL {
            return Err(invalid("projector", "P must satisfy P² = P = P†"));
        }
        let e = eigh(p)?;
        let dim = p.rows();
        let (mut low, mut high) = (Vec::new(), Vec::new());
        for k in 0..dim {
            if e.eigenvalues[k] > 0.5 {
                low.push(k)
            } else {
                high.push(k)
            }
        }
        let all: Vec<usize> = (0..dim).collect();
        let mut blocks = vec![e.eigenvectors.select(&all, &low)];
        if !high.is_empty() {
            blocks.push(e.eigenvectors.select(&all, &high));
        }
        Self::partition(h0, v, blocks, 0)
    }

    /// Blocks made of computational basis states.
    pub fn from_indices(h0: ComplexMatrix, v: ComplexMatrix, indices: &[Vec<usize>], low: usize) -> Result<Self> {
        let dim = h0.rows();
        let blocks = indices
            .iter()
            .map(|idx| ComplexMatrix::from_fn(dim, idx.len(), |r, c| if idx[c] == r { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
            .collect();
        Self::partition(h0, v, blocks, low)
    }

    /// H₀ = PHP + QHQ and V = PHQ + QHP for a given projector.
    pub fn canonical(p: &ComplexMatrix, h: &ComplexMatrix) -> Result<Self> {
        let q = &ComplexMatrix::identity(p.rows()) - p;
        let h0 = &p.matmul(h).matmul(p) + &q.matmul(h).matmul(&q);
        let v = &p.matmul(h).matmul(&q) + &q.matmul(h).matmul(p);
        Self::two_block(p, h0, v)
    }

    pub fn projector(&self) -> ComplexMatrix {
        let u = &self.blocks[self.low];
        u.matmul(&u.adjoint())
    }

    pub fn low_basis(&self) -> &ComplexMatrix {
        &self.blocks[self.low]
    }
}

fn invalid(code: &'static str, msg: impl Into<String>) -> Error {
    Error::validation(Module::Swt, code, msg)
}

fn hstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks[0].rows();
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        for r in 0..rows {
            for c in 0..b.cols() {
                out[(r, offset + c)] = b[(r, c)];
            }
        }
        offset += b.cols();
    }
    out
}

#[derive(Debug, Clone)]
pub struct SwResult {
    /// Anti-Hermitian first-order generator.
    pub s1: ComplexMatrix,
    /// max |[S₁, H₀] + V|.
    pub residual: f64,
    /// H_eff in the basis of the low block's isometry; `None` from
    /// [`sw_generator`].
    pub h_eff: Option<ComplexMatrix>,
}

impl SwResult {
    /// P(H₀ + ½[S₁, V])P in the full space.
    pub fn h_eff_full(&self, split: &BlockSplit) -> Option<ComplexMatrix> {
        let u = split.low_basis();
        self.h_eff.as_ref().map(|h| u.matmul(h).matmul(&u.adjoint()))
    }
}

pub fn sw_generator(split: &BlockSplit) -> Result<SwResult> {
    let dim = split.h0.rows();
    let mut columns = Vec::with_capacity(split.blocks.len());
    let mut energies = Vec::with_capacity(dim);
    let mut owner = Vec::with_capacity(dim);
    for (k, u) in split.blocks.iter().enumerate() {
        let local = eigh(&u.adjoint().matmul(&split.h0).matmul(u).hermitian_part())?;
        columns.push(u.matmul(&local.eigenvectors));
        energies.extend(local.eigenvalues);
        owner.extend(std::iter::repeat(k).take(u.cols()));
    }
    let basis = hstack(&columns);
    let v_eig = basis.adjoint().matmul(&split.v).matmul(&basis);
    let h_scale = split.h0.max_abs();
    let v_scale = split.v.max_abs();

    let mut s = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if owner[i] == owner[j] {
                continue;
            }
            let vij = v_eig[(i, j)];
            if vij.norm() <= COUPLING_TOL * v_scale {
                continue;
            }
            let de = energies[i] - energies[j];
            if de.abs() < DEGENERACY_TOL * h_scale {
                return Err(Error::numerical(
                    Module::Swt,
                    "degenerate_coupling",
                    format!(
                        "levels {i} (E = {:.12e}, block {}) and {j} (E = {:.12e}, block {}) are degenerate but coupled by |V| = {:.3e}",
                        energies[i],
                        owner[i],
                        energies[j],
                        owner[j],
                        vij.norm()
                    ),
                ));
            }
            s[(i, j)] = vij / de;
        }
    }
    let s1 = basis.matmul(&s).matmul(&basis.adjoint());
    let mut check = commutator(&s1, &split.h0);
    check.add_scaled_real(&split.v, 1.0);
    Ok(SwResult {
        residual: check.max_abs(),
        s1,
        h_eff: None,
    })
}

pub fn sw_effective(split: &BlockSplit) -> Result<SwResult> {
    let mut result = sw_generator(split)?;
    let mut full = split.h0.clone();
    full.add_scaled_real(&commutator(&result.s1, &split.v), 0.5);
    let u = split.low_basis();
    result.h_eff = Some(u.adjoint().matmul(&full).matmul(u).hermitian_part());
    Ok(result)
}

fn coupling_free(p: &ModelParams) -> ModelParams {
    ModelParams {
        g_x: 0.0,
        g_y: 0.0,
        ..*p
    }
}

/// One-qubit split: H₀ = ω_r b†b + ω_q σ_z/2, low block spin-down.
pub fn one_qubit_split(p: &ModelParams, n_cut: usize) -> Result<BlockSplit> {
    use crate::models::{build_one_qubit, FrameSpec};
    let h = build_one_qubit(p, n_cut, FrameSpec::lab())?;
    let h0 = build_one_qubit(&coupling_free(p), n_cut, FrameSpec::lab())?;
    let v = &h - &h0;
    let down: Vec<usize> = (0..n_cut).map(|n| 2 * n).collect();
    let up: Vec<usize> = (0..n_cut).map(|n| 2 * n + 1).collect();
    BlockSplit::from_indices(h0, v, &[down, up], 0)
}

/// Multi-qubit split: one block per eigenvector of the qubit Hamiltonian
/// (tensored with the Fock space); the low block holds the qubit ground
/// state.
pub fn multi_qubit_split(p: &ModelParams, n_cut: usize) -> Result<BlockSplit> {
    use crate::models::{build_multi_qubit, FrameSpec};
    let h = build_multi_qubit(p, n_cut, FrameSpec::lab())?;
    let h0 = build_multi_qubit(&coupling_free(p), n_cut, FrameSpec::lab())?;
    let v = &h - &h0;
    let s = spins(p.n_qubits)?;
    let mut qubit = s.s_z.scale_real(p.qubit_prefactor as f64 * p.omega_q);
    qubit.add_scaled_real(&s.s_x.matmul(&s.s_x), p.sign_x as f64 * p.d_x);
    qubit.add_scaled_real(&s.s_y.matmul(&s.s_y), p.sign_y as f64 * p.d_y);
    let e = eigh(&qubit)?;
    let sdim = s.dim();
    let id = ComplexMatrix::identity(n_cut);
    let blocks = (0..sdim)
        .map(|k| kron(&id, &e.eigenvectors.select(&(0..sdim).collect::<Vec<_>>(), &[k])))
        .collect();
    BlockSplit::partition(h0, v, blocks, 0)
}

/// Collective-block split by m_z. With `with_resonator = false` the boson
/// energy is left out of H₀, which is the setting of the closed-form
/// coefficients in [`collective_coefficients`] with zero shift.
pub fn collective_split(p: &ModelParams, j: HalfInt, n_cut: usize, with_resonator: bool) -> Result<BlockSplit> {
    use crate::models::{build_collective_block, FrameSpec};
    let h = build_collective_block(p, j, n_cut, FrameSpec::lab())?;
    let mut h0 = build_collective_block(&coupling_free(p), j, n_cut, FrameSpec::lab())?;
    let v = &h - &h0;
    let dim = j.multiplet_dim();
    if !with_resonator {
        let f = fock(n_cut)?;
        h0.add_scaled_real(&kron(&f.n, &ComplexMatrix::identity(dim)), -(p.resonator_prefactor as f64) * p.omega_r);
    }
    let block = angular_momentum_block(j);
    let qubit_energy = |k: usize| {
        let m = block.m_z(k);
        p.qubit_prefactor as f64 * p.omega_q * m + p.d_x * (block.casimir() - m * m)
    };
    let low = (0..dim).min_by(|&a, &b| qubit_energy(a).total_cmp(&qubit_energy(b))).unwrap_or(0);
    let indices: Vec<Vec<usize>> = (0..dim).map(|k| (0..n_cut).map(|n| n * dim + k).collect()).collect();
    BlockSplit::from_indices(h0, v, &indices, low)
}

/// The leading-order one-qubit generator
/// (g_x+g_y)/(2ω_q)(b†σ₋ − bσ₊) + (g_x−g_y)/(2ω_q)(bσ₋ − b†σ₊).
pub fn one_qubit_generator(p: &ModelParams, n_cut: usize) -> Result<ComplexMatrix> {
    let f = fock(n_cut)?;
    let (sp, sm) = (Pauli::Plus.matrix(), Pauli::Minus.matrix());
    let plus = (p.g_x + p.g_y) / (2.0 * p.omega_q);
    let minus = (p.g_x - p.g_y) / (2.0 * p.omega_q);
    let mut s = kron(&f.a_dag, &sm).scale_real(plus);
    s.add_scaled_real(&kron(&f.a, &sp), -plus);
    s.add_scaled_real(&kron(&f.a, &sm), minus);
    s.add_scaled_real(&kron(&f.a_dag, &sp), -minus);
    Ok(s)
}

/// Coefficients (a_{j,m}, b_{j,m}) of the collective generator
/// Σ a t|j,m+1⟩⟨j,m| + b t†|j,m−1⟩⟨j,m|. `resonator_shift` is the boson
/// quantum p_rΩ_r included in H₀; zero gives the large-Ω_q form
/// a = g√(j(j+1)−m(m+1))/(−2Ω_q + D(1+2m)), b = g√(j(j+1)−m(m−1))/(2Ω_q + D(1−2m)).
pub fn collective_coefficients(
    j: HalfInt,
    m_z: f64,
    g: f64,
    omega_q: f64,
    d: f64,
    resonator_shift: f64,
) -> (f64, f64) {
    let c = j.casimir();
    let up = (c - m_z * (m_z + 1.0)).max(0.0).sqrt();
    let down = (c - m_z * (m_z - 1.0)).max(0.0).sqrt();
    let a = g * up / (-2.0 * omega_q + d * (1.0 + 2.0 * m_z) + resonator_shift);
    let b = g * down / (2.0 * omega_q + d * (1.0 - 2.0 * m_z) - resonator_shift);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::{normal_effective, two_qubit_gap, Couplings};
    use crate::models::Convention;
    use crate::numerics::{eigvalsh, expm, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_by_two_closed_form() {
        let (e1, e2, v) = (0.3, 2.1, c(0.2, -0.7));
        let h0 = ComplexMatrix::from_real_diag(&[e1, e2]);
        let vm = ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0), v, v.conj(), c(0.0, 0.0)]).unwrap();
        let split = BlockSplit::from_indices(h0, vm, &[vec![0], vec![1]], 0).unwrap();
        let r = sw_effective(&split).unwrap();
        let expected = ComplexMatrix::from_vec(
            2,
            2,
            vec![c(0.0, 0.0), v / (e1 - e2), -v.conj() / (e1 - e2), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(r.s1.max_abs_diff(&expected) < 1e-15);
        assert!(r.residual < 1e-15);
        let h = r.h_eff.unwrap();
        assert!((h[(0, 0)].re - (e1 + v.norm_sqr() / (e1 - e2))).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_gives_projected_h0() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(3, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let mut h0 = ComplexMatrix::zeros(7, 7);
        for i in 0..3 {
            for j in 0..3 {
                h0[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                h0[(3 + i, 3 + j)] = b[(i, j)];
            }
        }
        let split = BlockSplit::from_indices(h0, ComplexMatrix::zeros(7, 7), &[vec![0, 1, 2], vec![3, 4, 5, 6]], 0).unwrap();
        let r = sw_effective(&split).unwrap();
        assert_eq!(r.s1.max_abs(), 0.0);
        assert!(r.h_eff.unwrap().max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn one_dimensional_block_is_perturbation_theory() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 9;
        let energies: Vec<f64> = (0..n).map(|k| k as f64 * 1.3 + 0.1 * (k * k) as f64).collect();
        let h0 = ComplexMatrix::from_real_diag(&energies);
        let noise = random_hermitian(n, &mut rng);
        let v = ComplexMatrix::from_fn(n, n, |i, j| if (i == 0) != (j == 0) { noise[(i, j)].scale(0.05) } else { c(0.0, 0.0) });
        let split = BlockSplit::from_indices(h0, v.clone(), &[vec![0], (1..n).collect()], 0).unwrap();
        let shift = sw_effective(&split).unwrap().h_eff.unwrap()[(0, 0)].re - energies[0];
        let expected: f64 = (1..n).map(|k| v[(0, k)].norm_sqr() / (energies[0] - energies[k])).sum();
        assert!((shift - expected).abs() < 1e-10);
    }

    #[test]
    fn canonical_split_and_projector_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(6, &mut rng);
        let mut p = ComplexMatrix::zeros(6, 6);
        for k in 0..2 {
            p[(k, k)] = c(1.0, 0.0);
        }
        let split = BlockSplit::canonical(&p, &h).unwrap();
        assert!(split.projector().max_abs_diff(&p) < 1e-12);
        let r = sw_effective(&split).unwrap();
        assert!(r.residual < 1e-9 * split.v.max_abs());
        assert!(r.s1.adjoint().max_abs_diff(&r.s1.scale_real(-1.0)) < 1e-12);

        let not_projector = ComplexMatrix::identity(6).scale_real(0.5);
        assert_eq!(BlockSplit::canonical(&not_projector, &h).unwrap_err().code, "projector");
    }

    #[test]
    fn rejects_bad_structure_and_degeneracy() {
        let h0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.5, 0.5, 2.0]).unwrap();
        let err = BlockSplit::from_indices(h0, ComplexMatrix::zeros(2, 2), &[vec![0], vec![1]], 0).unwrap_err();
        assert_eq!(err.code, "block_structure");

        let h0 = ComplexMatrix::identity(2);
        let v = ComplexMatrix::from_real(2, 2, &[0.0, 0.3, 0.3, 0.0]).unwrap();
        let split = BlockSplit::from_indices(h0, v, &[vec![0], vec![1]], 0).unwrap();
        let err = sw_generator(&split).unwrap_err();
        assert_eq!(err.code, "degenerate_coupling");
        assert!(err.message.contains("levels 0"));
    }

    #[test]
    fn transform_preserves_spectrum() {
        let p = ModelParams::one_qubit_lambda(20.0, 0.3, 0.2);
        let split = one_qubit_split(&p, 10).unwrap();
        let r = sw_generator(&split).unwrap();
        let h = &split.h0 + &split.v;
        let u = expm(&r.s1);
        let rotated = u.matmul(&h).matmul(&u.adjoint()).hermitian_part();
        let (a, b) = (eigvalsh(&h).unwrap(), eigvalsh(&rotated).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn one_qubit_generator_matches_closed_form() {
        let r_ratio = 1e4;
        let p = ModelParams::one_qubit_lambda(r_ratio, 0.1, 0.05);
        let split = one_qubit_split(&p, 12).unwrap();
        let r = sw_generator(&split).unwrap();
        assert!(r.residual <= 1e-9 * split.v.max_abs());
        let paper = one_qubit_generator(&p, 12).unwrap();
        // the top Fock level is excluded: truncation removes its partner
        let keep: Vec<usize> = (0..22).collect();
        let ours = r.s1.select(&keep, &keep);
        let theirs = paper.select(&keep, &keep);
        assert!(ours.max_abs_diff(&theirs) <= 5.0 / r_ratio * theirs.max_abs());
    }

    fn quadratic_matrix(a: f64, b: f64, c0: f64, n_cut: usize) -> ComplexMatrix {
        let f = fock(n_cut).unwrap();
        let mut m = f.n.scale_real(a);
        m.add_scaled_real(&(&f.a.matmul(&f.a) + &f.a_dag.matmul(&f.a_dag)), b);
        m.add_scaled_real(&ComplexMatrix::identity(n_cut), c0);
        m
    }

    /// Compares the numerical H_eff with the quadratic form, ground-shifted,
    /// on all but the top Fock level; returns the error relative to the
    /// coupling-induced part.
    fn one_qubit_heff_error(lx: f64, ly: f64, ratio: f64, n_cut: usize) -> f64 {
        let p = ModelParams::one_qubit_lambda(ratio, lx, ly);
        let split = one_qubit_split(&p, n_cut).unwrap();
        let h = sw_effective(&split).unwrap().h_eff.unwrap();
        let q = normal_effective(&Couplings::new(lx, ly, ratio).unwrap());
        let analytic = quadratic_matrix(q.a, q.b, q.c0, n_cut);
        let bare = quadratic_matrix(1.0, 0.0, -0.5 * ratio, n_cut);
        let keep: Vec<usize> = (0..n_cut - 1).collect();
        let offset = h[(0, 0)] - analytic[(0, 0)];
        let shifted = &h.select(&keep, &keep) - &ComplexMatrix::identity(n_cut - 1).scale(offset);
        let err = shifted.max_abs_diff(&analytic.select(&keep, &keep));
        let induced = (&analytic - &bare).select(&keep, &keep).max_abs();
        err / induced
    }

    #[test]
    fn one_qubit_effective_matches_quadratic_form() {
        let err = one_qubit_heff_error(0.1, 0.05, 1e4, 12);
        assert!(err < 1e-3, "relative error {err}");
    }

    #[test]
    fn one_qubit_effective_error_scales_with_inverse_ratio() {
        // the discrepancy comes from the ω_r/ω_q terms dropped in the
        // closed form: independent of g, proportional to 1/R
        let e1 = one_qubit_heff_error(0.1, 0.05, 1e3, 12);
        let e2 = one_qubit_heff_error(0.05, 0.025, 1e3, 12);
        let e3 = one_qubit_heff_error(0.1, 0.05, 1e4, 12);
        assert!((e1 / e2 - 1.0).abs() < 0.05, "{e1} vs {e2}");
        assert!((e1 / e3 - 10.0).abs() < 0.5, "{e1} vs {e3}");
    }

    #[test]
    fn two_qubit_effective_gap_matches_closed_form() {
        let ratio = 1e3;
        for (lx, ly) in [(0.5, 0.3), (1.0, 0.0), (0.3, 1.2), (1.5, 1.0)] {
            let p = ModelParams::multi_qubit_lambda(Convention::Rotated, ratio, 2, lx, ly);
            let split = multi_qubit_split(&p, 16).unwrap();
            let r = sw_effective(&split).unwrap();
            assert!(r.residual <= 1e-9 * split.v.max_abs());
            let ev = eigvalsh(&r.h_eff.unwrap()).unwrap();
            let gap = ev[1] - ev[0];
            let expected = two_qubit_gap(lx, ly).unwrap().value;
            assert!((gap - expected).abs() < 1e-2 * expected, "({lx},{ly}): {gap} vs {expected}");
        }
    }

    fn collective_elements(with_resonator: bool) -> f64 {
        let (omega_r, omega_q, lambda) = (1.0, 40.0, 0.7);
        let p = ModelParams::collective(omega_r, omega_q, lambda, 3);
        let j = HalfInt::from_twice(3);
        let n_cut = 6;
        let split = collective_split(&p, j, n_cut, with_resonator).unwrap();
        let r = sw_generator(&split).unwrap();
        assert!(r.residual <= 1e-9 * split.v.max_abs());
        let shift = if with_resonator { 3.0 * omega_r } else { 0.0 };
        let dim = j.multiplet_dim();
        let mut worst = 0.0f64;
        for k in 0..dim {
            let m = k as f64 - 1.5;
            let (a, b) = collective_coefficients(j, m, p.g_x, omega_q, p.d_x, shift);
            for n in 0..n_cut {
                // t|n⟩ = √n|n−1⟩, t†|n⟩ = √(n+1)|n+1⟩
                if n >= 1 && k + 1 < dim {
                    let got = r.s1[((n - 1) * dim + k + 1, n * dim + k)];
                    worst = worst.max((got - C64::new(a * (n as f64).sqrt(), 0.0)).norm());
                }
                if n + 1 < n_cut && k >= 1 {
                    let got = r.s1[((n + 1) * dim + k - 1, n * dim + k)];
                    worst = worst.max((got - C64::new(b * ((n + 1) as f64).sqrt(), 0.0)).norm());
                }
            }
        }
        worst
    }

    #[test]
    fn collective_generator_matches_coefficients() {
        assert!(collective_elements(false) < 1e-10);
        assert!(collective_elements(true) < 1e-10);
    }
}
