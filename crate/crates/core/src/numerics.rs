//! Dense complex linear algebra.
//!
//! Everything the physics modules need lives here: a row-major
//! [`ComplexMatrix`], a Hermitian eigensolver ([`eigh`], [`eigvalsh`]),
//! Kronecker products, commutators, a matrix exponential and a
//! three-point second-derivative stencil.
//!
//! The eigensolver reduces the Hermitian input to a complex tridiagonal
//! matrix with Householder reflectors, rotates the off-diagonal phases
//! away with a diagonal unitary, and finishes with the implicit QL
//! iteration on the resulting real symmetric tridiagonal matrix.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Module, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative Hermiticity tolerance accepted by [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::validation(
                Module::Numerics,
                "shape",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }

    /// Largest entry magnitude, the norm every tolerance in the crate is
    /// expressed against.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest |M_ij - conj(M_ji)|.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square(), "hermitian_defect on non-square matrix");
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= rel_tol * self.max_abs()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let out_row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * p..(k + 1) * p];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix {
            rows: n,
            cols: p,
            data: out,
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// ⟨u|M|u⟩ for a column vector u.
    pub fn expectation(&self, u: &[C64]) -> C64 {
        let mu = self.mul_vec(u);
        u.iter().zip(&mu).map(|(a, b)| a.conj() * b).sum()
    }

    /// Sub-matrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        let n = self.rows;
        Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    fn check_same_shape(&self, other: &ComplexMatrix, op: &str) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "{op} shape mismatch"
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs, "add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs, "sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// In-place accumulation helper: `self += s * other`.
impl ComplexMatrix {
    pub fn add_scaled(&mut self, other: &ComplexMatrix, s: C64) {
        self.check_same_shape(other, "add_scaled");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add_scaled_real(&mut self, other: &ComplexMatrix, s: f64) {
        self.add_scaled(other, C64::new(s, 0.0));
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n, p, q) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(m * p, n * q);
    for i in 0..m {
        for j in 0..n {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// [A, B] = AB − BA.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &a.matmul(b) - &b.matmul(a)
}

#[derive(Debug, Clone)]
pub struct EigDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// V diag(λ) V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..self.eigenvalues.len())
                .map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

fn validate_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::validation(
            Module::Numerics,
            "not_square",
            format!("eigh needs a square matrix, got {}x{}", h.rows(), h.cols()),
        ));
    }
    let defect = h.hermitian_defect();
    let scale = h.max_abs();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::validation(
            Module::Numerics,
            "not_hermitian",
            format!("matrix is not Hermitian: max asymmetry {defect:.3e} (max entry {scale:.3e})"),
        ));
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh(h: &ComplexMatrix) -> Result<EigDecomposition> {
    validate_hermitian(h)?;
    let (values, vectors) = hermitian_eigen(h, true)?;
    Ok(EigDecomposition {
        eigenvalues: values,
        eigenvectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(h: &ComplexMatrix) -> Result<Vec<f64>> {
    validate_hermitian(h)?;
    Ok(hermitian_eigen(h, false)?.0)
}

fn hermitian_eigen(h: &ComplexMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    let n = h.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| ComplexMatrix::zeros(0, 0))));
    }
    let mut a = h.hermitian_part();
    let mut q = want_vectors.then(|| ComplexMatrix::identity(n));

    householder_tridiagonalize(&mut a, q.as_mut());

    // Rotate the complex sub-diagonal onto the positive reals:
    // T' = D† T D with D = diag(phase).
    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut phase = vec![ONE; n];
    for i in 0..n.saturating_sub(1) {
        let e = a[(i + 1, i)];
        let mag = e.norm();
        off[i] = mag;
        phase[i + 1] = if mag > 0.0 { phase[i] * (e / mag) } else { phase[i] };
    }

    // Rows of `zt` are the eigenvectors of T' (i.e. Z transposed).
    let mut zt = want_vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    tridiagonal_ql(&mut diag, &mut off, zt.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();

    let vectors = match (q, zt) {
        (Some(q), Some(zt)) => {
            // V = Q D Z
            let mut qd = q;
            for r in 0..n {
                for c in 0..n {
                    qd[(r, c)] *= phase[c];
                }
            }
            let mut v = ComplexMatrix::zeros(n, n);
            for r in 0..n {
                let qrow = qd.row(r).to_vec();
                for (col, &k) in order.iter().enumerate() {
                    let zrow = &zt[k * n..(k + 1) * n];
                    let mut acc = ZERO;
                    for (x, &z) in qrow.iter().zip(zrow) {
                        acc += x * z;
                    }
                    v[(r, col)] = acc;
                }
            }
            Some(v)
        }
        _ => None,
    };
    Ok((values, vectors))
}

/// Reduces Hermitian `a` in place to tridiagonal form A ← Q† A Q,
/// accumulating Q when requested.
fn householder_tridiagonalize(a: &mut ComplexMatrix, mut q: Option<&mut ComplexMatrix>) {
    let n = a.rows;
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let tail_norm_sq: f64 = (k + 2..n).map(|i| a.data[i * n + k].norm_sqr()).sum();
        if tail_norm_sq == 0.0 {
            continue;
        }
        let x0 = a.data[(k + 1) * n + k];
        let norm = (x0.norm_sqr() + tail_norm_sq).sqrt();
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -ph * norm;

        v.iter_mut().for_each(|x| *x = ZERO);
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a.data[i * n + k];
        }
        let vnorm = v[k + 1..].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut v[k + 1..] {
            *x /= vnorm;
        }

        // H A H with H = I − 2vv†:  A − 2(v w† + w v†),  w = Av − (v†Av) v.
        let tail = &v[k + 1..];
        for i in k..n {
            let row = &a.data[i * n + k + 1..(i + 1) * n];
            p[i] = row.iter().zip(tail).map(|(x, y)| x * y).sum();
        }
        let kappa: C64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        for i in k..n {
            p[i] -= kappa * v[i];
        }
        let vc: Vec<C64> = v[k..].iter().map(|x| x.conj()).collect();
        let pc: Vec<C64> = p[k..].iter().map(|x| x.conj()).collect();
        for i in k..n {
            let (vi, pi) = (v[i] * 2.0, p[i] * 2.0);
            let row = &mut a.data[i * n + k..(i + 1) * n];
            for ((x, &vj), &pj) in row.iter_mut().zip(&vc).zip(&pc) {
                *x -= vi * pj + pi * vj;
            }
        }
        a.data[(k + 1) * n + k] = alpha;
        a.data[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a.data[i * n + k] = ZERO;
            a.data[k * n + i] = ZERO;
        }

        if let Some(q) = q.as_deref_mut() {
            // Q ← Q H
            let tail = &v[k + 1..];
            let tail_c = &vc[1..];
            for r in 0..n {
                let row = &mut q.data[r * n + k + 1..(r + 1) * n];
                let qv: C64 = row.iter().zip(tail).map(|(x, y)| x * y).sum::<C64>() * 2.0;
                for (x, &vj) in row.iter_mut().zip(tail_c) {
                    *x -= qv * vj;
                }
            }
        }
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix (EISPACK tql2).
/// `off[i]` couples i and i+1; `off[n-1]` is ignored. Eigenvalues are left
/// in `diag` (unsorted); rotations are accumulated into the rows of `zt`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], mut zt: Option<&mut [f64]>) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n - 1 && off[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::numerical(
                        Module::Numerics,
                        "ql_no_convergence",
                        format!("tridiagonal QL did not converge for eigenvalue {l}"),
                    ));
                }
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in diag.iter_mut().skip(l + 2) {
                    *d -= h;
                }
                f += h;

                p = diag[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = off[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += f;
        off[l] = 0.0;
    }
    Ok(())
}

/// e^M by scaling and squaring with a truncated Taylor series.
pub fn expm(m: &ComplexMatrix) -> ComplexMatrix {
    assert!(m.is_square(), "expm on non-square matrix");
    let n = m.rows();
    // 1-norm bound via max row sum
    let norm = (0..n)
        .map(|i| m.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale_real(0.5f64.powi(squarings as i32));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=20 {
        term = term.matmul(&scaled).scale_real(1.0 / k as f64);
        result = &result + &term;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Central second difference (f₋ − 2f₀ + f₊)/h².
pub fn second_derivative(minus: f64, center: f64, plus: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::validation(
            Module::Numerics,
            "step",
            format!("finite-difference step must be positive, got {h}"),
        ));
    }
    Ok((minus - 2.0 * center + plus) / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        m.hermitian_part()
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }

    #[test]
    fn diagonal_input_sorted() {
        let e = eigh(&ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        let v = &e.eigenvectors;
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((v[(2, 1)].norm() - 1.0).abs() < 1e-14);
        assert!((v[(0, 2)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = eigh(&sigma_x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v0 = e.vector(0);
        // (1, -1)/√2 up to a phase
        let ratio = v0[1] / v0[0];
        assert!((ratio + 1.0).norm() < 1e-12);
        assert!((v0[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1usize, 2, 3, 8, 17, 64] {
            let h = random_hermitian(n, &mut rng);
            let e = eigh(&h).unwrap();
            let scale = h.max_abs();
            assert!(e.reconstruct().max_abs_diff(&h) <= 1e-10 * scale, "n={n}");
            let vhv = e.eigenvectors.adjoint().matmul(&e.eigenvectors);
            assert!(vhv.max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let vals = eigvalsh(&h).unwrap();
            for (a, b) in vals.iter().zip(&e.eigenvalues) {
                assert!((a - b).abs() < 1e-12 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn trace_matches_eigenvalue_sum_up_to_512() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[5usize, 40, 128, 512] {
            let h = random_hermitian(n, &mut rng);
            let sum: f64 = eigvalsh(&h).unwrap().iter().sum();
            assert!((sum - h.trace().re).abs() <= 1e-9 * h.max_abs() * n as f64, "n={n}");
        }
    }

    #[test]
    fn degenerate_and_already_tridiagonal_inputs() {
        let h = ComplexMatrix::identity(6).scale_real(2.5);
        let e = eigh(&h).unwrap();
        assert!(e.eigenvalues.iter().all(|&x| (x - 2.5).abs() < 1e-14));
        // complex tridiagonal
        let n = 5;
        let h = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else if i == j + 1 {
                C64::new(0.3, 0.4)
            } else if j == i + 1 {
                C64::new(0.3, -0.4)
            } else {
                ZERO
            }
        });
        let e = eigh(&h).unwrap();
        assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let err = eigh(&ComplexMatrix::zeros(2, 3)).unwrap_err();
        assert_eq!(err.code, "not_square");
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.5, 0.0]).unwrap();
        let err = eigh(&m).unwrap_err();
        assert_eq!(err.code, "not_hermitian");
        assert!(err.message.contains("5.000e-1"), "{}", err.message);
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zz = kron(&sigma_z(), &sigma_z());
        assert_eq!(zz, ComplexMatrix::from_real_diag(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rnd = |r: usize, c: usize| {
            ComplexMatrix::from_fn(r, c, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
        let (a, b, c, d) = (rnd(2, 2), rnd(2, 2), rnd(2, 2), rnd(2, 2));
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
        // dimension law
        for (m, n, p, q) in [(1, 3, 2, 5), (4, 1, 1, 2), (2, 3, 3, 2)] {
            let k = kron(&rnd(m, n), &rnd(p, q));
            assert_eq!((k.rows(), k.cols()), (m * p, n * q));
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-iθσx) = cosθ I − i sinθ σx
        let theta = 0.7;
        let g = sigma_x().scale(C64::new(0.0, -theta));
        let u = expm(&g);
        let expected = &ComplexMatrix::identity(2).scale_real(theta.cos())
            + &sigma_x().scale(C64::new(0.0, -theta.sin()));
        assert!(u.max_abs_diff(&expected) < 1e-14);
        // large argument exercises squaring
        let u = expm(&sigma_x().scale(C64::new(0.0, -25.0)));
        let expected = &ComplexMatrix::identity(2).scale_real(25f64.cos())
            + &sigma_x().scale(C64::new(0.0, -(25f64.sin())));
        assert!(u.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn second_derivative_stencil() {
        let h = 1e-3;
        let f = |x: f64| x * x;
        let d = second_derivative(f(0.3 - h), f(0.3), f(0.3 + h), h).unwrap();
        assert!((d - 2.0).abs() < 1e-6);
        let f = |x: f64| x.powi(4);
        let d = second_derivative(f(1.0 - h), f(1.0), f(1.0 + h), h).unwrap();
        assert!((d - 12.0).abs() < 1e-4);
        assert_eq!(second_derivative(4.0, 4.0, 4.0, 0.1).unwrap(), 0.0);
        assert!(second_derivative(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(second_derivative(0.0, 0.0, 0.0, -1.0).is_err());
    }
}

#[cfg(test)]
pub(crate) use tests::random_hermitian;
