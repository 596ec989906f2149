//! Circuit elements → quantized Hamiltonian parameters.
//!
//! Two topologies are supported: one fluxonium coupled inductively and
//! capacitively to a transmission-line cell, and two identical fluxoniums
//! sharing the same cell. All formulas are evaluated in natural units with
//! ħ = 1; [`SiElements::to_natural`] converts SI element values into that
//! system and records the scales needed to convert results back.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Module, Result};
use crate::numerics::{eigh, C64, ComplexMatrix};
use crate::operators::displacement_matrix;

/// Relative tolerance for the basis-doubling convergence test.
pub const FLUXONIUM_TOL: f64 = 1e-8;
/// Largest harmonic-oscillator basis tried before giving up.
pub const FLUXONIUM_MAX_BASIS: usize = 2048;

const HBAR_SI: f64 = 1.054_571_817e-34;
const ELECTRON_CHARGE_SI: f64 = 1.602_176_634e-19;

fn default_velocity_scale() -> f64 {
    1.0
}

/// Element values in natural units (ħ = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitElements {
    pub c_r: f64,
    pub c_q: f64,
    pub c_g: f64,
    pub l_r: f64,
    pub l_1: f64,
    pub l_2: f64,
    pub e_j: f64,
    /// Flux quantum Φ₀ = ħ/2e expressed in the chosen flux unit.
    pub flux_quantum: f64,
    /// External flux; `None` means the symmetric point π·Φ₀.
    #[serde(default)]
    pub phi_ext: Option<f64>,
    /// Qubit cell position along the resonator.
    pub x_i: f64,
    /// Resonator length.
    pub d: f64,
    /// The calibration constant `a` in Ω_r = aπ/(d√(L_r C_r)).
    #[serde(default = "default_velocity_scale")]
    pub mode_velocity_scale: f64,
}

impl CircuitElements {
    pub fn phi_ext(&self) -> f64 {
        self.phi_ext.unwrap_or(PI * self.flux_quantum)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("c_r", self.c_r),
            ("c_q", self.c_q),
            ("c_g", self.c_g),
            ("l_r", self.l_r),
            ("l_1", self.l_1),
            ("l_2", self.l_2),
            ("flux_quantum", self.flux_quantum),
            ("d", self.d),
            ("mode_velocity_scale", self.mode_velocity_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(
                    Module::Circuit,
                    "element",
                    format!("{name} must be positive and finite, got {v}"),
                ));
            }
        }
        if !(self.e_j >= 0.0) {
            return Err(Error::validation(
                Module::Circuit,
                "element",
                format!("e_j must be non-negative, got {}", self.e_j),
            ));
        }
        if !(self.x_i > 0.0 && self.x_i < self.d) {
            return Err(Error::validation(
                Module::Circuit,
                "position",
                format!("x_i must lie strictly inside (0, d), got {} with d = {}", self.x_i, self.d),
            ));
        }
        Ok(())
    }
}

/// Element values in SI units (F, H, J, Wb, m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiElements {
    pub c_r: f64,
    pub c_q: f64,
    pub c_g: f64,
    pub l_r: f64,
    pub l_1: f64,
    pub l_2: f64,
    pub e_j: f64,
    #[serde(default)]
    pub phi_ext: Option<f64>,
    pub x_i: f64,
    pub d: f64,
    #[serde(default = "default_velocity_scale")]
    pub mode_velocity_scale: f64,
}

/// Conversion factors from natural units back to SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScales {
    pub capacitance: f64,
    pub inductance: f64,
    /// Time unit √(L_r C_r); divide a natural-unit frequency by it for rad/s.
    pub time: f64,
    pub flux: f64,
    pub energy: f64,
}

impl SiElements {
    /// Natural units built on the resonator cell: C_r and L_r set the
    /// capacitance and inductance units, ħ = 1 fixes flux and energy.
    pub fn to_natural(&self) -> (CircuitElements, UnitScales) {
        let capacitance = self.c_r;
        let inductance = self.l_r;
        let time = (capacitance * inductance).sqrt();
        let impedance = (inductance / capacitance).sqrt();
        let flux = (HBAR_SI * impedance).sqrt();
        let energy = HBAR_SI / time;
        let flux_quantum = HBAR_SI / (2.0 * ELECTRON_CHARGE_SI) / flux;
        let elements = CircuitElements {
            c_r: self.c_r / capacitance,
            c_q: self.c_q / capacitance,
            c_g: self.c_g / capacitance,
            l_r: self.l_r / inductance,
            l_1: self.l_1 / inductance,
            l_2: self.l_2 / inductance,
            e_j: self.e_j / energy,
            flux_quantum,
            phi_ext: self.phi_ext.map(|p| p / flux),
            x_i: self.x_i,
            d: self.d,
            mode_velocity_scale: self.mode_velocity_scale,
        };
        (
            elements,
            UnitScales {
                capacitance,
                inductance,
                time,
                flux,
                energy,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxoniumLevels {
    /// E₁ − E₀.
    pub omega_q: f64,
    /// |⟨E₀|Φ̂|E₁⟩|.
    pub flux_element: f64,
    /// E₂ − E₁.
    pub upper_gap: f64,
    pub basis_used: usize,
    /// E₂ − E₁ < 3(E₁ − E₀): the two-level truncation is strained.
    pub two_level_strained: bool,
    #[serde(skip)]
    spectral_scale: f64,
}

/// Lowest levels of H = Q²/2C + Φ²/2L − E_J cos((Φ + Φ_ext)/Φ₀), solved in
/// the eigenbasis of the quadratic part with the basis doubled until the
/// splitting and flux matrix element are stable to [`FLUXONIUM_TOL`].
pub fn fluxonium_levels(
    c_q_bar: f64,
    l_q_bar: f64,
    e_j: f64,
    phi_ext: f64,
    flux_quantum: f64,
    basis: usize,
) -> Result<FluxoniumLevels> {
    if basis < 20 {
        return Err(Error::validation(
            Module::Circuit,
            "basis",
            format!("fluxonium basis must be at least 20, got {basis}"),
        ));
    }
    if !(c_q_bar > 0.0 && l_q_bar > 0.0 && flux_quantum > 0.0) {
        return Err(Error::validation(
            Module::Circuit,
            "element",
            "fluxonium capacitance, inductance and flux quantum must be positive",
        ));
    }
    let mut size = basis;
    let mut previous = solve_fluxonium(c_q_bar, l_q_bar, e_j, phi_ext, flux_quantum, size)?;
    while size < FLUXONIUM_MAX_BASIS {
        size = (size * 2).min(FLUXONIUM_MAX_BASIS);
        let next = solve_fluxonium(c_q_bar, l_q_bar, e_j, phi_ext, flux_quantum, size)?;
        // Deep double wells give exponentially small splittings, so the
        // relative test is floored at the eigensolver's roundoff level.
        let floor = 64.0 * f64::EPSILON * next.spectral_scale;
        let omega_ok = (next.omega_q - previous.omega_q).abs() <= FLUXONIUM_TOL * next.omega_q.abs() + floor;
        // eigenvector error within the lowest pair scales as roundoff/splitting
        let flux_ok = (next.flux_element - previous.flux_element).abs()
            <= (FLUXONIUM_TOL + floor / next.omega_q.abs()) * next.flux_element.abs();
        if omega_ok && flux_ok {
            return Ok(next);
        }
        previous = next;
    }
    Err(Error::numerical(
        Module::Circuit,
        "fluxonium_no_convergence",
        format!("fluxonium levels not converged at basis {FLUXONIUM_MAX_BASIS}"),
    ))
}

fn solve_fluxonium(
    c: f64,
    l: f64,
    e_j: f64,
    phi_ext: f64,
    flux_quantum: f64,
    size: usize,
) -> Result<FluxoniumLevels> {
    let omega0 = 1.0 / (l * c).sqrt();
    let phi_zpf = (1.0 / (2.0 * c * omega0)).sqrt();

    let mut h = ComplexMatrix::from_real_diag(
        &(0..size).map(|m| omega0 * (m as f64 + 0.5)).collect::<Vec<_>>(),
    );
    if e_j != 0.0 {
        // cos((Φ+Φ_ext)/Φ₀) = Re[e^{iΦ_ext/Φ₀} D(iβ)],  β = Φ_zpf/Φ₀
        let d = displacement_matrix(C64::new(0.0, phi_zpf / flux_quantum), size);
        let phase = C64::new(0.0, phi_ext / flux_quantum).exp();
        let cosine = ComplexMatrix::from_fn(size, size, |i, j| C64::new((phase * d[(i, j)]).re, 0.0));
        h.add_scaled_real(&cosine.hermitian_part(), -e_j);
    }
    let eig = eigh(&h)?;
    let e = &eig.eigenvalues;
    let v0 = eig.vector(0);
    let v1 = eig.vector(1);
    // Φ = Φ_zpf (a + a†)
    let mut element = C64::new(0.0, 0.0);
    for m in 0..size - 1 {
        let s = ((m + 1) as f64).sqrt();
        element += v0[m].conj() * v1[m + 1] * s + v0[m + 1].conj() * v1[m] * s;
    }
    let omega_q = e[1] - e[0];
    let upper_gap = e[2] - e[1];
    Ok(FluxoniumLevels {
        omega_q,
        flux_element: phi_zpf * element.norm(),
        upper_gap,
        basis_used: size,
        two_level_strained: upper_gap < 3.0 * omega_q,
        spectral_scale: e.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

/// Effective (barred) circuit quantities and quantized parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedCircuitParams {
    pub c_sigma_sq: f64,
    pub l_sigma_sq: f64,
    pub c_r_bar: f64,
    pub c_q_bar: f64,
    pub c_g_bar: f64,
    pub l_r_bar: f64,
    pub l_q_bar: f64,
    pub l_g_bar: f64,
    /// Two-qubit topology only.
    pub c_qq_bar: Option<f64>,
    pub l_qq_bar: Option<f64>,
    /// Bare resonator frequency Ω_r.
    pub omega_r_bare: f64,
    /// k = π/d.
    pub wavenumber: f64,
    pub omega_r: f64,
    pub omega_q: f64,
    /// Φ₀^q = |⟨g|Φ_q|e⟩|.
    pub flux_element: f64,
    pub g_x: f64,
    pub g_y: f64,
    /// Coefficient of −S_x² (two-qubit topology only).
    pub d_x: Option<f64>,
    /// Coefficient of +S_y² (two-qubit topology only).
    pub d_y: Option<f64>,
    pub two_level_strained: bool,
    pub fluxonium_basis_used: usize,
}

/// 2L₁L_r/(L₁ − L_r), the L₂ that makes D_x = g_x′²/ω_r′.
pub fn matched_inductance(l_1: f64, l_r: f64) -> Result<f64> {
    if !(l_1 > l_r) {
        return Err(Error::validation(
            Module::Circuit,
            "matched_inductance",
            format!("no positive matched inductance: need L_1 > L_r, got L_1 = {l_1}, L_r = {l_r}"),
        ));
    }
    Ok(2.0 * l_1 * l_r / (l_1 - l_r))
}

struct Barred {
    c_sigma_sq: f64,
    l_sigma_sq: f64,
    c_r: f64,
    c_q: f64,
    c_g: f64,
    l_r: f64,
    l_q: f64,
    l_g: f64,
}

fn quantize(
    el: &CircuitElements,
    b: &Barred,
    fluxonium_basis: usize,
) -> Result<(DerivedCircuitParams, FluxoniumLevels)> {
    let k = PI / el.d;
    let kx = k * el.x_i;
    let sin2 = (2.0 * kx).sin().abs();
    if sin2 < 1e-12 {
        return Err(Error::validation(
            Module::Circuit,
            "degenerate_position",
            format!("degenerate mode coupling position: sin(2k x_i) = 0 at x_i = {}", el.x_i),
        ));
    }
    let omega_r_bare = el.mode_velocity_scale * PI / (el.d * (el.l_r * el.c_r).sqrt());
    let omega_r = sin2 * omega_r_bare * (el.c_r * el.l_r / (b.c_r * b.l_r)).sqrt();

    let flux = fluxonium_levels(b.c_q, b.l_q, el.e_j, el.phi_ext(), el.flux_quantum, fluxonium_basis)?;
    let (omega_q, phi_q) = (flux.omega_q, flux.flux_element);

    let g_x = 2.0 * (kx.cos() / kx.sin()).abs().sqrt() * kx.sin() * (omega_r_bare * el.l_r).sqrt() / b.l_g
        * (el.c_r * b.l_r / (b.c_r * el.l_r)).powf(0.25)
        * phi_q;
    let g_y = 2.0 * kx.tan().abs().sqrt() * kx.cos() * (omega_r_bare * el.c_r).sqrt() * b.c_q / b.c_g
        * (b.c_r * el.l_r / (el.c_r * b.l_r)).powf(0.25)
        * omega_q
        * phi_q;

    Ok((
        DerivedCircuitParams {
            c_sigma_sq: b.c_sigma_sq,
            l_sigma_sq: b.l_sigma_sq,
            c_r_bar: b.c_r,
            c_q_bar: b.c_q,
            c_g_bar: b.c_g,
            l_r_bar: b.l_r,
            l_q_bar: b.l_q,
            l_g_bar: b.l_g,
            c_qq_bar: None,
            l_qq_bar: None,
            omega_r_bare,
            wavenumber: k,
            omega_r,
            omega_q,
            flux_element: phi_q,
            g_x,
            g_y,
            d_x: None,
            d_y: None,
            two_level_strained: flux.two_level_strained,
            fluxonium_basis_used: flux.basis_used,
        },
        flux,
    ))
}

/// Single fluxonium coupled to one resonator cell.
pub fn derive_one_qubit(el: &CircuitElements, fluxonium_basis: usize) -> Result<DerivedCircuitParams> {
    el.validate()?;
    let c_sigma_sq = el.c_r * el.c_g + el.c_r * el.c_q + el.c_g * el.c_q;
    let l_sigma_sq = el.l_r * el.l_1 + el.l_r * el.l_2 + el.l_1 * el.l_2;
    let barred = Barred {
        c_sigma_sq,
        l_sigma_sq,
        c_r: c_sigma_sq / (el.c_q + el.c_g),
        c_q: c_sigma_sq / (el.c_r + el.c_g),
        c_g: c_sigma_sq / el.c_g,
        l_r: l_sigma_sq / (el.l_1 + el.l_2),
        l_q: l_sigma_sq / (el.l_1 + el.l_r),
        l_g: l_sigma_sq / el.l_1,
    };
    Ok(quantize(el, &barred, fluxonium_basis)?.0)
}

/// Two identical fluxoniums on the same resonator cell, including the
/// induced qubit–qubit couplings.
pub fn derive_two_qubit(el: &CircuitElements, fluxonium_basis: usize) -> Result<DerivedCircuitParams> {
    el.validate()?;
    let c_sigma_sq = el.c_r * el.c_g + el.c_r * el.c_q + 2.0 * el.c_g * el.c_q;
    let l_sigma_sq = 2.0 * el.l_r * el.l_1 + el.l_r * el.l_2 + el.l_1 * el.l_2;
    let barred = Barred {
        c_sigma_sq,
        l_sigma_sq,
        c_r: c_sigma_sq / (el.c_q + el.c_g),
        c_q: c_sigma_sq / (el.c_r + el.c_g * (1.0 + el.c_q / (el.c_g + el.c_q))),
        c_g: c_sigma_sq / el.c_g,
        l_r: l_sigma_sq / (2.0 * el.l_1 + el.l_2),
        l_q: l_sigma_sq / (el.l_1 + el.l_r + el.l_1 * el.l_r / el.l_2),
        l_g: l_sigma_sq / el.l_1,
    };
    let c_qq = c_sigma_sq / (el.c_g * el.c_g / (el.c_g + el.c_q));
    let l_qq = l_sigma_sq / (el.l_1 * el.l_r / el.l_2);
    let (mut p, _) = quantize(el, &barred, fluxonium_basis)?;
    let phi_sq = p.flux_element * p.flux_element;
    // σ¹ₓσ²ₓ = 2S_x² − 1 and σ¹ᵧσ²ᵧ = 2S_y² − 1; constants dropped.
    p.d_x = Some(2.0 * phi_sq / l_qq);
    p.d_y = Some(2.0 * p.omega_q * p.omega_q * p.c_q_bar * p.c_q_bar * phi_sq / c_qq);
    p.c_qq_bar = Some(c_qq);
    p.l_qq_bar = Some(l_qq);
    Ok(p)
}
