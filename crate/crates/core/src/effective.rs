//! Closed-form low-energy theory in the large ω_q/ω_r limit.
//!
//! Energies are in units of ω_r (of ω_r′ and Ω_r for the multi-qubit
//! models) with ω_q = R·ω_r. The two-qubit level energies Λ are in units of
//! ω_q′.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Module, Result};
use crate::models::ModelParams;
use crate::numerics::C64;
use crate::operators::HalfInt;

/// Tolerance used to decide that a point lies on a phase boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub lambda_x: f64,
    pub lambda_y: f64,
    /// R = ω_q/ω_r.
    pub ratio: f64,
}

impl Couplings {
    pub fn new(lambda_x: f64, lambda_y: f64, ratio: f64) -> Result<Self> {
        if !(lambda_x >= 0.0 && lambda_y >= 0.0 && lambda_x.is_finite() && lambda_y.is_finite()) {
            return Err(Error::validation(
                Module::Effective,
                "coupling",
                format!("couplings must be finite and non-negative, got ({lambda_x}, {lambda_y})"),
            ));
        }
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::validation(
                Module::Effective,
                "ratio",
                format!("ratio ω_q/ω_r must be positive, got {ratio}"),
            ));
        }
        Ok(Self {
            lambda_x,
            lambda_y,
            ratio,
        })
    }

    /// λ_k = |g_k|/√(ω_rω_q).
    pub fn from_params(p: &ModelParams) -> Result<Self> {
        if !(p.omega_r > 0.0 && p.omega_q > 0.0) {
            return Err(Error::validation(
                Module::Effective,
                "frequency",
                format!("frequencies must be positive, got ω_r = {}, ω_q = {}", p.omega_r, p.omega_q),
            ));
        }
        let s = (p.omega_r * p.omega_q).sqrt();
        Self::new(p.g_x.abs() / s, p.g_y.abs() / s, p.omega_q / p.omega_r)
    }

    /// The symmetric-model λ when λ_x = λ_y.
    pub fn lambda(&self) -> Option<f64> {
        (self.lambda_x == self.lambda_y).then_some(self.lambda_x)
    }
}

/// A b†b + B(b² + b†²) + C0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticBosonForm {
    pub a: f64,
    pub b: f64,
    pub c0: f64,
}

/// Spin-down projection of the one-qubit model.
pub fn normal_effective(c: &Couplings) -> QuadraticBosonForm {
    let (x, y) = (c.lambda_x * c.lambda_x, c.lambda_y * c.lambda_y);
    QuadraticBosonForm {
        a: 1.0 - 0.5 * (x + y),
        b: 0.25 * (y - x),
        c0: -0.25 * (x + y) - 0.5 * c.ratio,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BogoliubovResult {
    /// η√(A² − 4B²); `None` when unstable.
    pub epsilon: Option<f64>,
    /// Squeezing ¼ ln((A−2B)/(A+2B)); `None` when the logarithm is undefined.
    pub r: Option<f64>,
    pub eta: i8,
    pub stable: bool,
    /// A − 2B or A + 2B vanishes.
    pub critical: bool,
}

/// Diagonalizes a quadratic form as ε c†c + const. The branch sign η is
/// +1 for λ_x² + λ_y² < 2 and −1 otherwise.
pub fn bogoliubov(q: &QuadraticBosonForm, eta_rule: &Couplings) -> BogoliubovResult {
    let eta = if eta_rule.lambda_x.powi(2) + eta_rule.lambda_y.powi(2) < 2.0 {
        1
    } else {
        -1
    };
    let disc = q.a * q.a - 4.0 * q.b * q.b;
    let stable = disc >= 0.0;
    let (minus, plus) = (q.a - 2.0 * q.b, q.a + 2.0 * q.b);
    let critical = minus.abs() <= BOUNDARY_TOL || plus.abs() <= BOUNDARY_TOL;
    let ratio = minus / plus;
    BogoliubovResult {
        epsilon: stable.then(|| eta as f64 * disc.sqrt()),
        r: (!critical && ratio > 0.0).then(|| 0.25 * ratio.ln()),
        eta,
        stable,
        critical,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    X,
    Y,
    U1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperradiantFrame {
    /// Displacement; the U1 branch reports the representative with ϑ = 0.
    pub alpha: C64,
    pub omega_q_tilde: f64,
    pub lambda_x_tilde: f64,
    pub lambda_y_tilde: f64,
    pub epsilon_tilde: f64,
    pub r_tilde: Option<f64>,
    pub branch: Branch,
}

pub fn superradiant_frame(c: &Couplings) -> Result<SuperradiantFrame> {
    let (lx, ly) = (c.lambda_x, c.lambda_y);
    let top = lx.max(ly);
    if top <= 1.0 {
        return Err(Error::validation(
            Module::Effective,
            "not_superradiant",
            format!("not in superradiant region: max(λ_x, λ_y) = {top} ≤ 1"),
        ));
    }
    let branch = if (lx - ly).abs() <= BOUNDARY_TOL {
        Branch::U1
    } else if lx > ly {
        Branch::X
    } else {
        Branch::Y
    };
    let magnitude = 0.5 * (c.ratio * (top * top - 1.0 / (top * top))).sqrt();
    let (alpha, tx, ty) = match branch {
        Branch::X => (C64::new(magnitude, 0.0), 1.0 / (lx * lx), ly / lx),
        Branch::Y => (C64::new(0.0, magnitude), lx / ly, 1.0 / (ly * ly)),
        Branch::U1 => (C64::new(magnitude, 0.0), 1.0 / (top * top), 1.0),
    };
    let (ax, ay) = (1.0 - tx * tx, 1.0 - ty * ty);
    let ratio = ay / ax;
    Ok(SuperradiantFrame {
        alpha,
        omega_q_tilde: c.ratio * top * top,
        lambda_x_tilde: tx,
        lambda_y_tilde: ty,
        epsilon_tilde: (ax * ay).max(0.0).sqrt(),
        r_tilde: (ratio > 0.0 && ratio.is_finite()).then(|| 0.25 * ratio.ln()),
        branch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Normal,
    SuperradiantX,
    SuperradiantY,
    /// λ_x = λ_y > 1, where the Goldstone mode appears.
    U1Line,
    /// On a λ = 1 boundary.
    Critical,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Normal => "normal",
            PhaseLabel::SuperradiantX => "superradiant_x",
            PhaseLabel::SuperradiantY => "superradiant_y",
            PhaseLabel::U1Line => "u1_line",
            PhaseLabel::Critical => "critical",
        }
    }
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_phase(c: &Couplings) -> PhaseLabel {
    let (lx, ly) = (c.lambda_x, c.lambda_y);
    let top = lx.max(ly);
    if (top - 1.0).abs() <= BOUNDARY_TOL {
        PhaseLabel::Critical
    } else if top < 1.0 {
        PhaseLabel::Normal
    } else if (lx - ly).abs() <= BOUNDARY_TOL {
        PhaseLabel::U1Line
    } else if lx > ly {
        PhaseLabel::SuperradiantX
    } else {
        PhaseLabel::SuperradiantY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateInfo {
    pub energy: f64,
    pub n_g: f64,
    pub phase: PhaseLabel,
}

pub fn ground_state(c: &Couplings) -> GroundStateInfo {
    let phase = classify_phase(c);
    let r = c.ratio;
    match phase {
        PhaseLabel::Normal | PhaseLabel::Critical => GroundStateInfo {
            energy: -0.5 * r,
            n_g: 0.0,
            phase,
        },
        _ => {
            let top = c.lambda_x.max(c.lambda_y);
            let l2 = top * top;
            GroundStateInfo {
                energy: -0.25 * r * (l2 + 1.0 / l2),
                n_g: 0.25 * r * (l2 - 1.0 / l2),
                phase,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoQubitRegime {
    /// λ_x′² ≥ λ_y′², λ_x′²λ_y′² < 4.
    SmallX,
    /// λ_x′² < λ_y′², λ_x′²λ_y′² < 4.
    SmallY,
    /// λ_x′² ≥ λ_y′², λ_x′²λ_y′² > 4.
    LargeX,
    /// λ_x′² < λ_y′², λ_x′²λ_y′² > 4.
    LargeY,
}

impl TwoQubitRegime {
    pub fn is_large(self) -> bool {
        matches!(self, TwoQubitRegime::LargeX | TwoQubitRegime::LargeY)
    }
}

/// Coefficients of the fermionized coupling, b_x = (b_x1, b_x2, b_x3) and
/// likewise for y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BCoefficients {
    pub x: [f64; 3],
    pub y: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitLevels {
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub xi_1: f64,
    pub xi_2: f64,
    pub w: f64,
    pub regime: TwoQubitRegime,
    pub b: BCoefficients,
    /// λ_x′²λ_y′² = 4 within tolerance; the regime is then ambiguous.
    pub boundary: bool,
}

/// Λ₁, Λ₂ (units of ω_q′) of H₃⁰ = 2ω_q′S_z + D_xS_x² + D_yS_y² with
/// D_k = λ_k′²ω_q′.
pub fn two_qubit_levels(lambda_x: f64, lambda_y: f64) -> Result<TwoQubitLevels> {
    if !(lambda_x >= 0.0 && lambda_y >= 0.0 && lambda_x.is_finite() && lambda_y.is_finite()) {
        return Err(Error::validation(
            Module::Effective,
            "coupling",
            format!("couplings must be finite and non-negative, got ({lambda_x}, {lambda_y})"),
        ));
    }
    let (x, y) = (lambda_x * lambda_x, lambda_y * lambda_y);
    let s = x + y;
    let w = ((x - y) * (x - y) + 16.0).sqrt();
    let product = x * y;
    let boundary = (product - 4.0).abs() <= BOUNDARY_TOL * 4.0;
    let large = product > 4.0;
    let (lambda_1, lambda_2) = if large {
        (0.5 * (s + w), 0.5 * (s - w))
    } else {
        (0.5 * (s + w), 0.5 * (w - s))
    };
    let (p, m) = ((1.0 + 4.0 / w).sqrt(), (1.0 - 4.0 / w).sqrt());
    let (xi_1, xi_2) = (p - m, p + m);
    let regime = match (large, x >= y) {
        (false, true) => TwoQubitRegime::SmallX,
        (false, false) => TwoQubitRegime::SmallY,
        (true, true) => TwoQubitRegime::LargeX,
        (true, false) => TwoQubitRegime::LargeY,
    };
    let b = match regime {
        TwoQubitRegime::SmallX => BCoefficients {
            x: [xi_1, -xi_1, xi_2],
            y: [xi_2, -xi_2, xi_1],
        },
        TwoQubitRegime::SmallY => BCoefficients {
            x: [-xi_2, xi_2, -xi_1],
            y: [-xi_1, xi_1, -xi_2],
        },
        TwoQubitRegime::LargeX => BCoefficients {
            x: [0.0, xi_1, -xi_2],
            y: [0.0, xi_2, xi_1],
        },
        TwoQubitRegime::LargeY => BCoefficients {
            x: [0.0, -xi_2, -xi_1],
            y: [0.0, xi_1, xi_2],
        },
    };
    Ok(TwoQubitLevels {
        lambda_1,
        lambda_2,
        xi_1,
        xi_2,
        w,
        regime,
        b,
        boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapBranch {
    TwoQubitSmallX,
    TwoQubitSmallY,
    TwoQubitLarge,
    /// λ² < 2: the qubits sit in |N/2, −N/2⟩.
    NQubitBelow,
    NQubitEvenAbove,
    NQubitOddAbove,
}

impl GapBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            GapBranch::TwoQubitSmallX => "two_qubit_small_x",
            GapBranch::TwoQubitSmallY => "two_qubit_small_y",
            GapBranch::TwoQubitLarge => "two_qubit_large",
            GapBranch::NQubitBelow => "n_qubit_below",
            GapBranch::NQubitEvenAbove => "n_qubit_even_above",
            GapBranch::NQubitOddAbove => "n_qubit_odd_above",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveGap {
    /// Signed: sign(P)·√|P| scaled, so an unstable point has a negative value.
    pub value: f64,
    pub stable: bool,
    pub branch: GapBranch,
    /// The input sits on a branch boundary.
    pub boundary: bool,
}

/// ϖ in units of ω_r′.
pub fn two_qubit_gap(lambda_x: f64, lambda_y: f64) -> Result<EffectiveGap> {
    let lv = two_qubit_levels(lambda_x, lambda_y)?;
    let (dx, dy) = (lambda_x * lambda_x, lambda_y * lambda_y);
    let (branch, product) = match lv.regime {
        TwoQubitRegime::SmallX => (
            GapBranch::TwoQubitSmallX,
            (1.0 - dx * lv.xi_1 * lv.xi_1 / (3.0 * lv.lambda_1)) * (1.0 - dy * lv.xi_2 * lv.xi_2 / (3.0 * lv.lambda_1)),
        ),
        TwoQubitRegime::SmallY => (
            GapBranch::TwoQubitSmallY,
            (1.0 - dx * lv.xi_2 * lv.xi_2 / (3.0 * lv.lambda_1)) * (1.0 - dy * lv.xi_1 * lv.xi_1 / (3.0 * lv.lambda_1)),
        ),
        _ => (GapBranch::TwoQubitLarge, 1.0),
    };
    Ok(EffectiveGap {
        value: 3.0 * product.signum() * product.abs().sqrt(),
        stable: product >= 0.0,
        branch,
        boundary: lv.boundary,
    })
}

/// Lowest excitation of the N-qubit model in units of Ω_r, with D = λ²Ω_q.
pub fn n_qubit_gap(lambda: f64, n_qubits: usize) -> Result<EffectiveGap> {
    if n_qubits == 0 {
        return Err(Error::validation(Module::Effective, "qubit_count", "N must be at least 1"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::validation(
            Module::Effective,
            "coupling",
            format!("λ must be finite and non-negative, got {lambda}"),
        ));
    }
    let l2 = lambda * lambda;
    let n = n_qubits as f64;
    let boundary = (l2 - 2.0).abs() <= BOUNDARY_TOL;
    let (branch, value) = if l2 < 2.0 || boundary {
        (GapBranch::NQubitBelow, 3.0 * (1.0 - n * l2 / (3.0 * ((n - 1.0) * l2 + 2.0))))
    } else if n_qubits % 2 == 0 {
        (GapBranch::NQubitEvenAbove, 3.0)
    } else {
        (GapBranch::NQubitOddAbove, 3.0 * (1.0 - l2 / 6.0))
    };
    Ok(EffectiveGap {
        value,
        stable: value >= 0.0,
        branch,
        boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitGroundLabel {
    pub j: HalfInt,
    pub m_z: f64,
    /// D = 2Ω_q: every |j, −j⟩ is degenerate.
    pub degenerate: bool,
}

/// Ground state of 2Ω_qJ_z + D(J² − J_z²) over all allowed j.
pub fn qubit_ground_label(n_qubits: usize, d: f64, omega_q: f64) -> Result<QubitGroundLabel> {
    if n_qubits == 0 {
        return Err(Error::validation(Module::Effective, "qubit_count", "N must be at least 1"));
    }
    if !(d > 0.0 && omega_q > 0.0) {
        return Err(Error::validation(
            Module::Effective,
            "energy",
            format!("D and Ω_q must be positive, got D = {d}, Ω_q = {omega_q}"),
        ));
    }
    let degenerate = n_qubits > 1 && (d - 2.0 * omega_q).abs() <= BOUNDARY_TOL * omega_q;
    let twice = if d < 2.0 * omega_q || degenerate {
        n_qubits as u32
    } else {
        (n_qubits % 2) as u32
    };
    let j = HalfInt::from_twice(twice);
    Ok(QubitGroundLabel {
        j,
        m_z: -j.value(),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eigh, eigvalsh, ComplexMatrix};
    use crate::operators::{angular_momentum_block, allowed_spins, spins};
    use proptest::prelude::*;

    fn c(lx: f64, ly: f64, r: f64) -> Couplings {
        Couplings::new(lx, ly, r).unwrap()
    }

    #[test]
    fn coupling_conversion() {
        let p = ModelParams::one_qubit(1.0, 100.0, 5.0, 0.0);
        let k = Couplings::from_params(&p).unwrap();
        assert_eq!((k.lambda_x, k.lambda_y, k.ratio), (0.5, 0.0, 100.0));
        let s = 7.3;
        let scaled = ModelParams::one_qubit(s, 100.0 * s, 5.0 * s, 0.0);
        let k2 = Couplings::from_params(&scaled).unwrap();
        assert!((k2.lambda_x - 0.5).abs() < 1e-15 && (k2.ratio - 100.0).abs() < 1e-12);
        assert!(Couplings::new(-0.1, 0.0, 1.0).is_err());
        assert!(Couplings::new(0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn quadratic_form_examples() {
        let q = normal_effective(&c(0.0, 0.0, 10.0));
        assert_eq!((q.a, q.b), (1.0, 0.0));
        let q = normal_effective(&c(1.0, 1.0, 10.0));
        assert_eq!((q.a, q.b), (0.0, 0.0));
        let q = normal_effective(&c(0.6, 0.0, 10.0));
        assert!((q.a - 0.82).abs() < 1e-15 && (q.b + 0.09).abs() < 1e-15);
    }

    #[test]
    fn bogoliubov_examples() {
        let k = c(0.0, 0.0, 1.0);
        let b = bogoliubov(&QuadraticBosonForm { a: 1.0, b: 0.0, c0: 0.0 }, &k);
        assert_eq!((b.epsilon, b.r, b.stable), (Some(1.0), Some(0.0), true));

        let k = c(0.6, 0.0, 1.0);
        let b = bogoliubov(&normal_effective(&k), &k);
        assert!((b.epsilon.unwrap() - 0.8).abs() < 1e-14);
        assert!((b.r.unwrap() - 0.111_571_775).abs() < 1e-8);

        let k = c(1.2, 0.5, 1.0);
        let b = bogoliubov(&normal_effective(&k), &k);
        assert!(!b.stable && b.epsilon.is_none());

        let k = c(1.0, 0.3, 1.0);
        assert!(bogoliubov(&normal_effective(&k), &k).critical);
        // both λ > 1: stable but negative branch
        let k = c(1.3, 1.2, 1.0);
        let b = bogoliubov(&normal_effective(&k), &k);
        assert_eq!(b.eta, -1);
        assert!(b.epsilon.unwrap() < 0.0);
    }

    #[test]
    fn epsilon_squared_matches_product_form_on_grid() {
        for i in 0..50 {
            for j in 0..50 {
                let (lx, ly) = (2.0 * i as f64 / 49.0, 2.0 * j as f64 / 49.0);
                let k = c(lx, ly, 1.0);
                let q = normal_effective(&k);
                let product = (1.0 - lx * lx) * (1.0 - ly * ly);
                let disc = q.a * q.a - 4.0 * q.b * q.b;
                assert!((disc - product).abs() < 1e-12);
                let b = bogoliubov(&q, &k);
                if let Some(e) = b.epsilon {
                    assert!((e * e - product).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn superradiant_frame_examples() {
        let f = superradiant_frame(&c(1.2, 0.0, 50.0)).unwrap();
        assert_eq!(f.branch, Branch::X);
        assert!((f.alpha.norm_sqr() - 9.319_444_444).abs() < 1e-6);
        assert_eq!(f.alpha.im, 0.0);
        assert!((f.lambda_x_tilde - 1.0 / 1.44).abs() < 1e-15);
        assert!((f.omega_q_tilde - 72.0).abs() < 1e-12);

        let f = superradiant_frame(&c(1.3, 1.3, 50.0)).unwrap();
        assert_eq!(f.branch, Branch::U1);
        assert_eq!(f.epsilon_tilde, 0.0);

        let f = superradiant_frame(&c(1.0 + 1e-9, 0.0, 50.0)).unwrap();
        assert!(f.alpha.norm() < 1e-3);
        let err = superradiant_frame(&c(1.0, 0.4, 50.0)).unwrap_err();
        assert_eq!(err.code, "not_superradiant");
    }

    #[test]
    fn ground_state_examples() {
        let g = ground_state(&c(0.5, 0.5, 3.0));
        assert_eq!((g.energy, g.n_g, g.phase), (-1.5, 0.0, PhaseLabel::Normal));
        let x = ground_state(&c(1.0 + 1e-10, 0.0, 1.0)).energy;
        assert!((x + 0.5).abs() < 1e-9);
        let g = ground_state(&c(2f64.sqrt(), 0.0, 1.0));
        assert!((g.energy + 0.625).abs() < 1e-14);
        assert_eq!(g.phase, PhaseLabel::SuperradiantX);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_phase(&c(0.5, 0.5, 1.0)), PhaseLabel::Normal);
        assert_eq!(classify_phase(&c(1.5, 0.2, 1.0)), PhaseLabel::SuperradiantX);
        assert_eq!(classify_phase(&c(0.2, 1.5, 1.0)), PhaseLabel::SuperradiantY);
        assert_eq!(classify_phase(&c(1.3, 1.3, 1.0)), PhaseLabel::U1Line);
        assert_eq!(classify_phase(&c(1.0, 0.7, 1.0)), PhaseLabel::Critical);
        assert_eq!(classify_phase(&c(1.0, 1.0, 1.0)), PhaseLabel::Critical);
    }

    #[test]
    fn ground_energy_kink_across_u1_line() {
        let (r, lam, h) = (20.0, 1.3, 1e-6);
        // crossing the diagonal along λ_x at fixed λ_y = λ
        let e = |lx: f64| ground_state(&c(lx, lam, r)).energy;
        let right = (e(lam + 2.0 * h) - e(lam + h)) / h;
        let left = (e(lam - h) - e(lam - 2.0 * h)) / h;
        let expected = 0.5 * r * (lam - 1.0 / lam.powi(3));
        assert!(((left - right) - expected).abs() < 1e-4 * expected);
        assert!((e(lam + 1e-13) - e(lam - 1e-13)).abs() < 1e-10);
    }

    fn brute_levels(lx: f64, ly: f64) -> Vec<f64> {
        let s = spins(2).unwrap();
        let mut h = s.s_z.scale_real(2.0);
        h.add_scaled_real(&s.s_x.matmul(&s.s_x), lx * lx);
        h.add_scaled_real(&s.s_y.matmul(&s.s_y), ly * ly);
        let ev = eigvalsh(&h).unwrap();
        ev.iter().map(|e| e - ev[0]).collect()
    }

    #[test]
    fn two_qubit_level_examples() {
        let lv = two_qubit_levels(0.0, 0.0).unwrap();
        assert_eq!((lv.lambda_1, lv.lambda_2), (2.0, 2.0));
        assert!((lv.xi_1 - 2f64.sqrt()).abs() < 1e-15 && (lv.xi_2 - 2f64.sqrt()).abs() < 1e-15);
        let lv = two_qubit_levels(2.0, 2.0).unwrap();
        assert!(lv.regime.is_large());
        assert!((lv.lambda_1 - 6.0).abs() < 1e-14 && (lv.lambda_2 - 2.0).abs() < 1e-14);
        assert!(two_qubit_levels(2f64.sqrt(), 2f64.sqrt()).unwrap().boundary);
        assert!(two_qubit_levels(-1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn two_qubit_levels_match_brute_force(lx in 0.0f64..3.0, ly in 0.0f64..3.0) {
            let lv = two_qubit_levels(lx, ly).unwrap();
            let mut ours = vec![0.0, lv.lambda_1, lv.lambda_2, lv.lambda_1 + lv.lambda_2];
            ours.sort_by(f64::total_cmp);
            let brute = brute_levels(lx, ly);
            for (a, b) in ours.iter().zip(&brute) {
                prop_assert!((a - b).abs() < 1e-10, "{:?} vs {:?}", ours, brute);
            }
        }

        #[test]
        fn mirror_symmetry(lx in 1.01f64..3.0, ly in 0.0f64..3.0, r in 1.0f64..200.0) {
            prop_assume!((lx - ly).abs() > 1e-6);
            let a = superradiant_frame(&c(lx, ly, r)).unwrap();
            let b = superradiant_frame(&c(ly, lx, r)).unwrap();
            let rotated = a.alpha * C64::new(0.0, 1.0);
            prop_assert!((rotated - b.alpha).norm() <= 1e-12 * (1.0 + a.alpha.norm()) || (rotated + b.alpha).norm() <= 1e-12 * (1.0 + a.alpha.norm()));
            prop_assert!((a.epsilon_tilde - b.epsilon_tilde).abs() < 1e-12);
            let (ga, gb) = (ground_state(&c(lx, ly, r)), ground_state(&c(ly, lx, r)));
            prop_assert_eq!(ga.energy, gb.energy);
            prop_assert_eq!(ga.n_g, gb.n_g);
        }
    }

    /// |⟨f|S_k|i⟩| on the eigenstates of H₃⁰ reproduces the magnitudes of the
    /// fermionized coupling table in every regime.
    #[test]
    fn b_table_matches_spin_matrix_elements() {
        let s = spins(2).unwrap();
        for (lx, ly) in [(1.0, 0.5), (0.5, 1.0), (2.5, 1.5), (1.5, 2.5), (0.3, 0.1), (3.0, 2.9)] {
            let lv = two_qubit_levels(lx, ly).unwrap();
            let mut h = s.s_z.scale_real(2.0);
            h.add_scaled_real(&s.s_x.matmul(&s.s_x), lx * lx);
            h.add_scaled_real(&s.s_y.matmul(&s.s_y), ly * ly);
            let e = eigh(&h).unwrap();
            let e0 = e.eigenvalues[0];
            let find = |target: f64| {
                (0..4)
                    .min_by(|&a, &b| {
                        ((e.eigenvalues[a] - e0) - target)
                            .abs()
                            .total_cmp(&((e.eigenvalues[b] - e0) - target).abs())
                    })
                    .unwrap()
            };
            let (g, one, two, both) = (0, find(lv.lambda_1), find(lv.lambda_2), find(lv.lambda_1 + lv.lambda_2));
            let elem = |o: &ComplexMatrix, a: usize, b: usize| {
                let ob = o.mul_vec(&e.vector(b));
                2.0 * e.vector(a).iter().zip(ob).map(|(x, y)| x.conj() * y).sum::<C64>().norm()
            };
            for (op, coeffs) in [(&s.s_x, lv.b.x), (&s.s_y, lv.b.y)] {
                let check = |got: f64, want: f64| assert!((got - want.abs()).abs() < 1e-10, "({lx},{ly}) {got} vs {want}");
                check(elem(op, one, g), coeffs[0]);
                check(elem(op, both, two), coeffs[0] + coeffs[1]);
                check(elem(op, both, one), coeffs[2]);
                check(elem(op, two, g), 0.0);
            }
        }
    }

    #[test]
    fn two_qubit_gap_examples() {
        let g = two_qubit_gap(0.0, 0.0).unwrap();
        assert!((g.value - 3.0).abs() < 1e-14);
        let g = two_qubit_gap(1.0, 0.0).unwrap();
        assert!((g.value - 2.688_08).abs() < 1e-5, "{}", g.value);
        let g = two_qubit_gap(2.5, 2.5).unwrap();
        assert_eq!((g.value, g.branch), (3.0, GapBranch::TwoQubitLarge));
    }

    #[test]
    fn two_qubit_gap_positive_on_grid() {
        for i in 0..40 {
            for j in 0..40 {
                let (lx, ly) = (3.0 * i as f64 / 39.0, 3.0 * j as f64 / 39.0);
                let g = two_qubit_gap(lx, ly).unwrap();
                if g.boundary {
                    continue;
                }
                assert!(g.stable && g.value > 0.0, "({lx}, {ly}) → {}", g.value);
            }
        }
    }

    #[test]
    fn n_qubit_gap_examples() {
        let g = n_qubit_gap(6f64.sqrt(), 3).unwrap();
        assert!(g.value.abs() < 1e-14);
        let g = n_qubit_gap(10f64.sqrt(), 2).unwrap();
        assert_eq!(g.value, 3.0);
        let g = n_qubit_gap(1.0, 4).unwrap();
        assert!((g.value - 2.2).abs() < 1e-14);
        assert!(n_qubit_gap(2f64.sqrt(), 4).unwrap().boundary);
        assert!(!n_qubit_gap(3.0, 3).unwrap().stable);
    }

    #[test]
    fn n_qubit_gap_at_level_crossing() {
        let below = |n| n_qubit_gap(2f64.sqrt() * (1.0 - 1e-12), n).unwrap().value;
        let above = |n| n_qubit_gap(2f64.sqrt() * (1.0 + 1e-12), n).unwrap().value;
        for n in 1..=9 {
            assert!((below(n) - 2.0).abs() < 1e-10, "N = {n}");
            if n % 2 == 1 {
                assert!((above(n) - 2.0).abs() < 1e-10, "odd N = {n} should be continuous");
            } else {
                // even N jumps by one resonator quantum
                assert!((above(n) - below(n) - 1.0).abs() < 1e-10, "even N = {n}");
            }
        }
    }

    #[test]
    fn ground_label_examples() {
        let l = qubit_ground_label(4, 1.0, 1.0).unwrap();
        assert_eq!((l.j.twice(), l.m_z), (4, -2.0));
        let l = qubit_ground_label(4, 3.0, 1.0).unwrap();
        assert_eq!((l.j.twice(), l.m_z), (0, 0.0));
        let l = qubit_ground_label(3, 3.0, 1.0).unwrap();
        assert_eq!((l.j.twice(), l.m_z), (1, -0.5));
        assert!(qubit_ground_label(3, 2.0, 1.0).unwrap().degenerate);
    }

    #[test]
    fn ground_label_matches_block_brute_force() {
        let omega_q = 1.0;
        for n in 1..=8 {
            for d in [0.5, 1.9, 2.1, 5.0] {
                let mut best = (f64::INFINITY, 0u32, 0.0);
                for j in allowed_spins(n) {
                    let b = angular_momentum_block(j);
                    let mut h = b.j_z.scale_real(2.0 * omega_q);
                    let jz2 = b.j_z.matmul(&b.j_z);
                    h.add_scaled_real(&(&ComplexMatrix::identity(b.dim()).scale_real(b.casimir()) - &jz2), d);
                    let e = eigh(&h).unwrap();
                    if e.eigenvalues[0] < best.0 - 1e-12 {
                        let v = e.vector(0);
                        let m: f64 = (0..b.dim()).map(|k| v[k].norm_sqr() * b.m_z(k)).sum();
                        best = (e.eigenvalues[0], j.twice(), m);
                    }
                }
                let label = qubit_ground_label(n, d, omega_q).unwrap();
                assert_eq!(label.j.twice(), best.1, "N = {n}, D = {d}");
                assert!((label.m_z - best.2).abs() < 1e-12);
            }
        }
    }
}
