//! Exact-diagonalization driver, grid scans and transition detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::{
    bogoliubov, classify_phase, ground_state, n_qubit_gap, normal_effective, superradiant_frame, two_qubit_gap,
    Couplings, PhaseLabel,
};
use crate::error::{Error, Module, Result};
use crate::models::{
    build_collective_block, build_multi_qubit, build_one_qubit, diagonalize_converged, Convention, CutoffPolicy,
    FrameSpec, ModelParams,
};
use crate::numerics::{C64, EigDecomposition};
use crate::operators::{allowed_spins, displacement_matrix, HalfInt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    OneQubit,
    MultiQubit,
    Collective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRequest {
    pub params: ModelParams,
    pub kind: ModelKind,
    pub frame: FrameSpec,
    pub initial_cutoff: usize,
    /// Collective models only; `None` picks the block with the lowest
    /// ground energy.
    pub block_j: Option<HalfInt>,
    pub policy: CutoffPolicy,
}

impl SpectrumRequest {
    pub fn new(params: ModelParams, kind: ModelKind) -> Self {
        Self {
            params,
            kind,
            frame: FrameSpec::lab(),
            initial_cutoff: 16,
            block_j: None,
            policy: CutoffPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// eigenvalues − ground_energy.
    pub relative: Vec<f64>,
    pub ground_energy: f64,
    /// Lab-frame ⟨b†b⟩ in the ground state.
    pub n_g: f64,
    /// Lab-frame ⟨b†b⟩ in the first excited state.
    pub n_g_first_excited: f64,
    pub parity: f64,
    pub excitation: f64,
    pub gap: f64,
    pub cutoff_used: usize,
    pub converged: bool,
    pub block_j: Option<HalfInt>,
}

pub fn spectrum(req: &SpectrumRequest) -> Result<SpectrumResult> {
    req.params.validate()?;
    match req.kind {
        ModelKind::OneQubit => {
            let p = req.params;
            let c = diagonalize_converged(
                |n| build_one_qubit(&p, n, req.frame),
                req.initial_cutoff,
                2,
                p.omega_r,
                req.policy,
            )?;
            Ok(observe(&c.eig, c.n_cut, &spin_excitations(1), req.frame.alpha, None))
        }
        ModelKind::MultiQubit => {
            let p = req.params;
            let sdim = 1usize << p.n_qubits.min(16);
            let c = diagonalize_converged(
                |n| build_multi_qubit(&p, n, req.frame),
                req.initial_cutoff,
                sdim,
                p.omega_r,
                req.policy,
            )?;
            Ok(observe(&c.eig, c.n_cut, &spin_excitations(p.n_qubits), req.frame.alpha, None))
        }
        ModelKind::Collective => {
            let blocks = match req.block_j {
                Some(j) => vec![j],
                None => allowed_spins(req.params.n_qubits),
            };
            let mut best: Option<SpectrumResult> = None;
            for j in blocks {
                let r = collective_block_spectrum(req, j)?;
                if best.as_ref().is_none_or(|b| r.ground_energy < b.ground_energy) {
                    best = Some(r);
                }
            }
            best.ok_or_else(|| Error::validation(Module::Scan, "qubit_count", "no spin blocks for zero qubits"))
        }
    }
}

fn collective_block_spectrum(req: &SpectrumRequest, j: HalfInt) -> Result<SpectrumResult> {
    let p = req.params;
    let dim = j.multiplet_dim();
    let c = diagonalize_converged(
        |n| build_collective_block(&p, j, n, req.frame),
        req.initial_cutoff,
        dim,
        p.omega_r,
        req.policy,
    )?;
    // N̂ = n + m_z + N/2 with m_z = k − j
    let offset = (p.n_qubits as f64 - j.twice() as f64) / 2.0;
    let exc: Vec<f64> = (0..dim).map(|k| k as f64 + offset).collect();
    Ok(observe(&c.eig, c.n_cut, &exc, req.frame.alpha, Some(j)))
}

fn spin_excitations(n_qubits: usize) -> Vec<f64> {
    (0..1usize << n_qubits).map(|s| s.count_ones() as f64).collect()
}

/// Lab-frame ⟨(b+α)†(b+α)⟩ for a state in the displaced frame.
fn photon_number(v: &[C64], n_cut: usize, sdim: usize, alpha: C64) -> f64 {
    let mut number = 0.0;
    let mut b = C64::new(0.0, 0.0);
    for n in 0..n_cut {
        for s in 0..sdim {
            let amp = v[n * sdim + s];
            number += n as f64 * amp.norm_sqr();
            if n + 1 < n_cut {
                b += amp.conj() * v[(n + 1) * sdim + s] * ((n + 1) as f64).sqrt();
            }
        }
    }
    (number + 2.0 * (alpha.conj() * b).re + alpha.norm_sqr()).max(0.0)
}

fn observe(eig: &EigDecomposition, n_cut: usize, spin_exc: &[f64], alpha: C64, block_j: Option<HalfInt>) -> SpectrumResult {
    let sdim = spin_exc.len();
    let v0 = eig.vector(0);
    let v1 = eig.vector(1);
    let n_g = photon_number(&v0, n_cut, sdim, alpha);

    // lab parity: D(α)†(Π_b ⊗ Π_s)D(α) = Π_b D(2α) ⊗ Π_s
    let shift = (alpha != C64::new(0.0, 0.0)).then(|| displacement_matrix(alpha * 2.0, n_cut));
    let mut parity = C64::new(0.0, 0.0);
    for m in 0..n_cut {
        let sign_b = if m % 2 == 0 { 1.0 } else { -1.0 };
        for s in 0..sdim {
            let sign = sign_b * if (spin_exc[s] as i64) % 2 == 0 { 1.0 } else { -1.0 };
            let left = v0[m * sdim + s].conj() * sign;
            let right = match &shift {
                None => v0[m * sdim + s],
                Some(d) => (0..n_cut).map(|n| d[(m, n)] * v0[n * sdim + s]).sum(),
            };
            parity += left * right;
        }
    }
    let spin_part: f64 = (0..n_cut)
        .flat_map(|n| (0..sdim).map(move |s| (n, s)))
        .map(|(n, s)| v0[n * sdim + s].norm_sqr() * spin_exc[s])
        .sum();

    let ground = eig.eigenvalues[0];
    SpectrumResult {
        relative: eig.eigenvalues.iter().map(|e| e - ground).collect(),
        eigenvalues: eig.eigenvalues.clone(),
        ground_energy: ground,
        n_g,
        n_g_first_excited: photon_number(&v1, n_cut, sdim, alpha),
        parity: parity.re.clamp(-1.0, 1.0),
        excitation: n_g + spin_part,
        gap: eig.eigenvalues[1] - ground,
        cutoff_used: n_cut,
        converged: true,
        block_j,
    }
}

/// Evenly spaced values start, …, stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn single(value: f64) -> Self {
        Self::new(value, value, 1)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::validation(Module::Scan, "range", format!("{name} range must be finite")));
        }
        if self.points == 0 || (self.points == 1 && self.start != self.stop) {
            return Err(Error::validation(
                Module::Scan,
                "range",
                format!(
                    "{name} needs at least 2 points (or 1 point with start = stop), got {} on [{}, {}]",
                    self.points, self.start, self.stop
                ),
            ));
        }
        if self.start < 0.0 || self.stop < 0.0 {
            return Err(Error::validation(Module::Scan, "range", format!("{name} couplings must be non-negative")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + i as f64 * step })
            .collect()
    }
}

fn default_cutoff() -> usize {
    16
}

fn default_convention() -> Convention {
    Convention::Rotated
}

fn default_qubits() -> usize {
    1
}

/// Grid over dimensionless couplings with ω_r = 1 and ω_q = `ratio`.
/// Rows are ordered with λ_x as the outer index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub model: ModelKind,
    pub ratio: f64,
    #[serde(default = "default_qubits")]
    pub n_qubits: usize,
    /// For the collective model this is the symmetric λ.
    pub lambda_x: AxisRange,
    /// Not allowed for the collective model.
    #[serde(default)]
    pub lambda_y: Option<AxisRange>,
    #[serde(default = "default_convention")]
    pub convention: Convention,
    /// Fixed qubit–qubit coefficients; when absent D_k = λ_k²·ratio.
    #[serde(default)]
    pub d_x: Option<f64>,
    #[serde(default)]
    pub d_y: Option<f64>,
    #[serde(default = "default_cutoff")]
    pub initial_cutoff: usize,
    /// Evaluate one-qubit superradiant points around the analytic α.
    #[serde(default)]
    pub displaced_frame: bool,
    #[serde(default)]
    pub block_j: Option<HalfInt>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return Err(Error::validation(Module::Scan, "ratio", format!("ratio must be positive, got {}", self.ratio)));
        }
        self.lambda_x.validate("lambda_x")?;
        if let Some(r) = &self.lambda_y {
            r.validate("lambda_y")?;
        }
        match self.model {
            ModelKind::OneQubit if self.n_qubits != 1 => {
                return Err(Error::validation(Module::Scan, "qubit_count", "one_qubit model needs n_qubits = 1"));
            }
            ModelKind::Collective if self.lambda_y.is_some() => {
                return Err(Error::validation(
                    Module::Scan,
                    "lambda_y",
                    "the collective model has a single coupling; give lambda_x only",
                ));
            }
            _ => {}
        }
        if self.block_j.is_some() && self.model != ModelKind::Collective {
            return Err(Error::validation(Module::Scan, "block_j", "block_j applies to the collective model only"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let ys = match (&self.lambda_y, self.model) {
            (_, ModelKind::Collective) => None,
            (Some(r), _) => Some(r.values()),
            (None, _) => Some(vec![0.0]),
        };
        let mut out = Vec::new();
        for x in self.lambda_x.values() {
            match &ys {
                None => out.push((x, x)),
                Some(ys) => out.extend(ys.iter().map(|&y| (x, y))),
            }
        }
        out
    }

    pub fn params_at(&self, lambda_x: f64, lambda_y: f64) -> ModelParams {
        let r = self.ratio;
        match self.model {
            ModelKind::OneQubit => ModelParams::one_qubit_lambda(r, lambda_x, lambda_y),
            ModelKind::MultiQubit => {
                let s = r.sqrt();
                ModelParams::multi_qubit(
                    self.convention,
                    1.0,
                    r,
                    lambda_x * s,
                    lambda_y * s,
                    self.n_qubits,
                    self.d_x.unwrap_or(lambda_x * lambda_x * r),
                    self.d_y.unwrap_or(lambda_y * lambda_y * r),
                )
            }
            ModelKind::Collective => ModelParams::collective(1.0, r, lambda_x, self.n_qubits),
        }
    }

    /// The request evaluated at one grid point.
    pub fn request_at(&self, lambda_x: f64, lambda_y: f64) -> Result<SpectrumRequest> {
        let params = self.params_at(lambda_x, lambda_y);
        let mut frame = FrameSpec::lab();
        if self.displaced_frame && self.model == ModelKind::OneQubit && lambda_x.max(lambda_y) > 1.0 {
            frame = FrameSpec::displaced(superradiant_frame(&Couplings::new(lambda_x, lambda_y, self.ratio)?)?.alpha);
        }
        Ok(SpectrumRequest {
            params,
            kind: self.model,
            frame,
            initial_cutoff: self.initial_cutoff,
            block_j: self.block_j,
            policy: CutoffPolicy::default(),
        })
    }

    fn analytic(&self, lambda_x: f64, lambda_y: f64) -> (String, Option<f64>) {
        match self.model {
            ModelKind::OneQubit => match Couplings::new(lambda_x, lambda_y, self.ratio) {
                Ok(c) => {
                    let (phase, gap) = one_qubit_analytic(&c);
                    (phase.as_str().to_string(), gap)
                }
                Err(_) => ("none".into(), None),
            },
            ModelKind::MultiQubit if self.n_qubits == 2 && self.convention == Convention::Rotated => {
                match two_qubit_gap(lambda_x, lambda_y) {
                    Ok(g) => (branch_name(&g), Some(g.value)),
                    Err(_) => ("none".into(), None),
                }
            }
            ModelKind::Collective => match n_qubit_gap(lambda_x, self.n_qubits) {
                Ok(g) => (branch_name(&g), Some(g.value)),
                Err(_) => ("none".into(), None),
            },
            ModelKind::MultiQubit => ("none".into(), None),
        }
    }
}

fn branch_name(g: &crate::effective::EffectiveGap) -> String {
    g.branch.as_str().to_string()
}

/// Phase label and lowest excitation energy (units of ω_r).
pub fn one_qubit_analytic(c: &Couplings) -> (PhaseLabel, Option<f64>) {
    let phase = classify_phase(c);
    let gap = match phase {
        PhaseLabel::Normal => bogoliubov(&normal_effective(c), c).epsilon,
        PhaseLabel::Critical => Some(0.0),
        _ => superradiant_frame(c).ok().map(|f| f.epsilon_tilde),
    };
    (phase, gap)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub g_x: f64,
    pub g_y: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub ground_energy: f64,
    pub gap: f64,
    pub n_g: f64,
    pub parity: f64,
    pub analytic_phase: String,
    pub analytic_gap: Option<f64>,
    /// Set when the numerical evaluation failed; numeric fields are NaN.
    pub error: Option<String>,
}

impl GridRow {
    fn from_result(spec: &GridSpec, lx: f64, ly: f64, result: Result<SpectrumResult>) -> Self {
        let p = spec.params_at(lx, ly);
        let (analytic_phase, analytic_gap) = spec.analytic(lx, ly);
        let mut row = GridRow {
            g_x: p.g_x,
            g_y: p.g_y,
            lambda_x: lx,
            lambda_y: ly,
            ground_energy: f64::NAN,
            gap: f64::NAN,
            n_g: f64::NAN,
            parity: f64::NAN,
            analytic_phase,
            analytic_gap,
            error: None,
        };
        match result {
            Ok(r) => {
                row.ground_energy = r.ground_energy;
                row.gap = r.gap;
                row.n_g = r.n_g;
                row.parity = r.parity;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

/// Evaluates every grid point (in parallel on the current rayon pool) and
/// returns rows in grid order. Per-point failures are recorded in the row.
pub fn scan_grid(spec: &GridSpec) -> Result<Vec<GridRow>> {
    spec.validate()?;
    let points = spec.points();
    Ok(points
        .par_iter()
        .map(|&(lx, ly)| {
            let result = spec.request_at(lx, ly).and_then(|req| spectrum(&req));
            GridRow::from_result(spec, lx, ly, result)
        })
        .collect())
}

pub const CSV_HEADER: &str = "gx,gy,lambda_x,lambda_y,ground_energy,gap,n_G,parity,analytic_phase,analytic_gap";

/// CSV text with a header row. Floats use the shortest round-trip form
/// (scientific notation for very small or large magnitudes); a missing
/// analytic gap is an empty field.
pub fn rows_to_csv(rows: &[GridRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let gap = r.analytic_gap.map(|g| format!("{g:?}")).unwrap_or_default();
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}\n",
            r.g_x, r.g_y, r.lambda_x, r.lambda_y, r.ground_energy, r.gap, r.n_g, r.parity, r.analytic_phase, gap
        ));
    }
    out
}

/// A row built from the one-qubit branch formulas instead of numerics.
pub fn analytic_row(ratio: f64, lambda_x: f64, lambda_y: f64) -> Result<GridRow> {
    let c = Couplings::new(lambda_x, lambda_y, ratio)?;
    let g = ground_state(&c);
    let (phase, gap) = one_qubit_analytic(&c);
    let s = ratio.sqrt();
    Ok(GridRow {
        g_x: lambda_x * s,
        g_y: lambda_y * s,
        lambda_x,
        lambda_y,
        ground_energy: g.energy,
        gap: gap.unwrap_or(f64::NAN),
        n_g: g.n_g,
        parity: f64::NAN,
        analytic_phase: phase.as_str().to_string(),
        analytic_gap: gap,
        error: None,
    })
}

/// Analytic rows on `points` evenly spaced samples of the segment from
/// `from` to `to` in the (λ_x, λ_y) plane.
pub fn analytic_line(ratio: f64, from: (f64, f64), to: (f64, f64), points: usize) -> Result<Vec<GridRow>> {
    if points < 2 {
        return Err(Error::validation(Module::Scan, "range", "a line needs at least 2 points"));
    }
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            analytic_row(ratio, from.0 + t * (to.0 - from.0), from.1 + t * (to.1 - from.1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    LambdaX,
    LambdaY,
    /// Distance along a straight line through the rows.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionPoint {
    /// Index into the input rows.
    pub index: usize,
    pub coordinate: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub order: TransitionOrder,
    /// Largest jump of the second derivative inside the flagged cluster.
    pub strength: f64,
    /// Slope jump across the cluster divided by the neighboring variation.
    pub slope_jump_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport {
    pub axis: Axis,
    pub threshold: f64,
    pub points: Vec<TransitionPoint>,
}

const MIN_POINTS: usize = 5;
/// Slope jump over neighboring variation beyond which a kink is first order.
pub const FIRST_ORDER_RATIO: f64 = 10.0;

pub fn detect_transitions(rows: &[GridRow], axis: Axis) -> Result<TransitionReport> {
    if rows.len() < MIN_POINTS {
        return Err(Error::validation(
            Module::Scan,
            "too_few_points",
            format!("transition detection needs at least {MIN_POINTS} points, got {}", rows.len()),
        ));
    }
    if let Some(bad) = rows.iter().position(|r| !r.ground_energy.is_finite()) {
        return Err(Error::validation(
            Module::Scan,
            "missing_energy",
            format!("row {bad} has no ground energy"),
        ));
    }
    let coords: Vec<f64> = match axis {
        Axis::LambdaX => rows.iter().map(|r| r.lambda_x).collect(),
        Axis::LambdaY => rows.iter().map(|r| r.lambda_y).collect(),
        Axis::Line => {
            let (x0, y0) = (rows[0].lambda_x, rows[0].lambda_y);
            let (dx, dy) = (rows[rows.len() - 1].lambda_x - x0, rows[rows.len() - 1].lambda_y - y0);
            let len = dx.hypot(dy);
            for r in rows {
                let cross = (r.lambda_x - x0) * dy - (r.lambda_y - y0) * dx;
                if cross.abs() > 1e-9 * len.max(1.0) * len.max(1.0) {
                    return Err(Error::validation(Module::Scan, "not_collinear", "rows do not lie on a line"));
                }
            }
            rows.iter().map(|r| (r.lambda_x - x0).hypot(r.lambda_y - y0)).collect()
        }
    };
    let energies: Vec<f64> = rows.iter().map(|r| r.ground_energy).collect();
    let (threshold, found) = detect_series(&coords, &energies)?;
    Ok(TransitionReport {
        axis,
        threshold,
        points: found
            .into_iter()
            .map(|(index, order, strength, ratio)| TransitionPoint {
                index,
                coordinate: coords[index],
                lambda_x: rows[index].lambda_x,
                lambda_y: rows[index].lambda_y,
                order,
                strength,
                slope_jump_ratio: ratio,
            })
            .collect(),
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

type Found = (usize, TransitionOrder, f64, f64);

/// Flags jumps of the second derivative along a uniformly sampled series.
fn detect_series(x: &[f64], e: &[f64]) -> Result<(f64, Vec<Found>)> {
    let n = x.len();
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    if !(h.abs() > 0.0) {
        return Err(Error::validation(Module::Scan, "spacing", "coordinates do not advance along the axis"));
    }
    for k in 1..n {
        if ((x[k] - x[k - 1]) - h).abs() > 1e-6 * h.abs() {
            return Err(Error::validation(Module::Scan, "spacing", "points are not evenly spaced along the axis"));
        }
    }
    // d2[k] at point k + 1, jumps[k] between d2[k] and d2[k + 1]
    let d2: Vec<f64> = (1..n - 1).map(|k| (e[k + 1] - 2.0 * e[k] + e[k - 1]) / (h * h)).collect();
    let jumps: Vec<f64> = d2.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if jumps.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let mut sorted = jumps.clone();
    sorted.sort_by(f64::total_cmp);
    let (q1, median, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.5), quantile(&sorted, 0.75));
    let scale = e.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-8 * scale / (h * h);
    let threshold = (median + 5.0 * (q3 - q1)).max(floor);

    let flagged: Vec<usize> = (0..jumps.len()).filter(|&k| jumps[k] > threshold).collect();
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for k in flagged {
        match clusters.last_mut() {
            Some((_, end)) if *end + 1 == k => *end = k,
            _ => clusters.push((k, k)),
        }
    }

    // forward slopes fd[k] = (e[k+1] − e[k])/h
    let fd: Vec<f64> = (0..n - 1).map(|k| (e[k + 1] - e[k]) / h).collect();
    let mut found = Vec::new();
    for (a, b) in clusters {
        // jumps a..=b involve points a..=b+3
        let (first, last) = (a, b + 3);
        let strength = jumps[a..=b].iter().fold(0.0f64, |m, v| m.max(*v));
        let center = (first + last + 1) / 2;
        let left_slope = if first >= 1 { fd[first - 1] } else { fd[0] };
        let right_slope = if last < n - 1 { fd[last] } else { fd[n - 2] };
        let jump = (right_slope - left_slope).abs();
        let mut variation = 0.0f64;
        for k in first.saturating_sub(4)..first.saturating_sub(1) {
            variation = variation.max((fd[k + 1] - fd[k]).abs());
        }
        for k in last..(last + 3).min(n.saturating_sub(2)) {
            variation = variation.max((fd[k + 1] - fd[k]).abs());
        }
        let ratio = if variation > 0.0 { jump / variation } else if jump > 0.0 { f64::INFINITY } else { 0.0 };
        let order = if ratio > FIRST_ORDER_RATIO { TransitionOrder::First } else { TransitionOrder::Second };
        found.push((center.min(n - 1), order, strength, ratio));
    }
    Ok((threshold, found))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_qubit(ratio: f64, lx: f64, ly: f64) -> SpectrumRequest {
        SpectrumRequest::new(ModelParams::one_qubit_lambda(ratio, lx, ly), ModelKind::OneQubit)
    }

    #[test]
    fn decoupled_spectrum() {
        let r = spectrum(&one_qubit(3.0, 0.0, 0.0)).unwrap();
        assert!((r.ground_energy + 1.5).abs() < 1e-12);
        assert_eq!(r.n_g, 0.0);
        assert!((r.gap - 1.0).abs() < 1e-12);
        assert!((r.parity - 1.0).abs() < 1e-12);
        let r = spectrum(&one_qubit(0.4, 0.0, 0.0)).unwrap();
        assert!((r.gap - 0.4).abs() < 1e-12);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(r.relative[0], 0.0);
    }

    #[test]
    fn superradiant_occupation_lab_and_displaced() {
        let alpha2 = 12.5 * (2.25 - 1.0 / 2.25);
        let lab = spectrum(&one_qubit(50.0, 1.5, 0.0)).unwrap();
        assert!((lab.n_g - alpha2).abs() < 0.05 * alpha2, "{}", lab.n_g);
        // doublet-symmetric order parameter
        assert!((lab.n_g - lab.n_g_first_excited).abs() < 0.01 * lab.n_g);

        let spec = GridSpec {
            model: ModelKind::OneQubit,
            ratio: 50.0,
            n_qubits: 1,
            lambda_x: AxisRange::single(1.5),
            lambda_y: Some(AxisRange::single(0.0)),
            convention: Convention::Rotated,
            d_x: None,
            d_y: None,
            initial_cutoff: 16,
            displaced_frame: true,
            block_j: None,
        };
        let req = spec.request_at(1.5, 0.0).unwrap();
        assert!(req.frame.alpha.re > 4.0);
        let shifted = spectrum(&req).unwrap();
        assert!((shifted.n_g - lab.n_g).abs() < 0.01 * lab.n_g, "{} vs {}", shifted.n_g, lab.n_g);
        assert!((shifted.ground_energy - lab.ground_energy).abs() < 1e-6);
        // a small Fock space already holds the displaced ground state
        let small = crate::numerics::eigvalsh(&build_one_qubit(&req.params, 16, req.frame).unwrap()).unwrap();
        assert!((small[0] - lab.ground_energy).abs() < 1e-9);
    }

    #[test]
    fn displaced_parity_matches_lab_parity() {
        // moderate coupling where both frames converge to the same state
        let p = ModelParams::one_qubit_lambda(4.0, 0.8, 0.3);
        let mut req = SpectrumRequest::new(p, ModelKind::OneQubit);
        let lab = spectrum(&req).unwrap();
        req.frame = FrameSpec::displaced(C64::new(0.4, 0.2));
        req.initial_cutoff = 32;
        let shifted = spectrum(&req).unwrap();
        assert!((lab.parity - shifted.parity).abs() < 1e-6, "{} vs {}", lab.parity, shifted.parity);
        assert!((lab.n_g - shifted.n_g).abs() < 1e-6);
        assert!((lab.excitation - shifted.excitation).abs() < 1e-6);
    }

    #[test]
    fn normal_phase_parity_is_sharp() {
        for (lx, ly) in [(0.3, 0.7), (0.7, 0.5), (0.9, 0.0)] {
            let r = spectrum(&one_qubit(50.0, lx, ly)).unwrap();
            assert!((r.parity.abs() - 1.0).abs() < 1e-8, "{}", r.parity);
        }
    }

    #[test]
    fn two_qubit_inhibition() {
        let p = ModelParams::multi_qubit_lambda(Convention::Rotated, 50.0, 2, 2.5, 2.5);
        let r = spectrum(&SpectrumRequest::new(p, ModelKind::MultiQubit)).unwrap();
        assert!(r.n_g < 5.0, "{}", r.n_g);
    }

    #[test]
    fn collective_block_choice() {
        let p = ModelParams::collective(1.0, 50.0, 2.6, 3);
        let r = spectrum(&SpectrumRequest::new(p, ModelKind::Collective)).unwrap();
        assert_eq!(r.block_j, Some(HalfInt::from_twice(1)));
        let mut req = SpectrumRequest::new(p, ModelKind::Collective);
        req.block_j = Some(HalfInt::from_twice(3));
        let top = spectrum(&req).unwrap();
        assert!(top.ground_energy > r.ground_energy);
    }

    #[test]
    fn grid_rows_and_thresholds() {
        let spec = GridSpec {
            model: ModelKind::OneQubit,
            ratio: 50.0,
            n_qubits: 1,
            lambda_x: AxisRange::new(0.0, 1.5, 3),
            lambda_y: Some(AxisRange::new(0.0, 1.5, 3)),
            convention: Convention::Rotated,
            d_x: None,
            d_y: None,
            initial_cutoff: 16,
            displaced_frame: false,
            block_j: None,
        };
        let rows = scan_grid(&spec).unwrap();
        assert_eq!(rows.len(), 9);
        for r in &rows {
            assert!(r.error.is_none());
            if r.lambda_x.max(r.lambda_y) < 1.0 {
                assert!(r.n_g < 0.5);
            }
        }
        let corner = rows.iter().find(|r| r.lambda_x == 1.5 && r.lambda_y == 0.0).unwrap();
        assert!(corner.n_g > 10.0);
        assert_eq!((rows[1].lambda_x, rows[1].lambda_y), (0.0, 0.75));
    }

    #[test]
    fn single_point_grid_equals_spectrum() {
        let spec = GridSpec {
            model: ModelKind::OneQubit,
            ratio: 20.0,
            n_qubits: 1,
            lambda_x: AxisRange::single(0.4),
            lambda_y: Some(AxisRange::single(0.2)),
            convention: Convention::Rotated,
            d_x: None,
            d_y: None,
            initial_cutoff: 16,
            displaced_frame: false,
            block_j: None,
        };
        let rows = scan_grid(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = spectrum(&one_qubit(20.0, 0.4, 0.2)).unwrap();
        assert_eq!(rows[0].ground_energy, direct.ground_energy);
        assert_eq!(rows[0].n_g, direct.n_g);
        assert_eq!(rows[0].gap, direct.gap);
    }

    #[test]
    fn csv_round_trips_floats() {
        let row = analytic_row(50.0, 0.1, 0.3).unwrap();
        let csv = rows_to_csv(&[row.clone()]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!(fields[4].parse::<f64>().unwrap(), row.ground_energy);
        assert_eq!(fields[5].parse::<f64>().unwrap(), row.gap);
        assert_eq!(fields[8], "normal");
        assert!(lines.next().is_none());
    }

    #[test]
    fn grid_spec_validation() {
        let mut spec = GridSpec {
            model: ModelKind::Collective,
            ratio: 20.0,
            n_qubits: 3,
            lambda_x: AxisRange::new(0.0, 1.0, 1),
            lambda_y: None,
            convention: Convention::Rotated,
            d_x: None,
            d_y: None,
            initial_cutoff: 16,
            displaced_frame: false,
            block_j: None,
        };
        assert_eq!(spec.validate().unwrap_err().code, "range");
        spec.lambda_x.points = 4;
        assert!(spec.validate().is_ok());
        spec.lambda_y = Some(AxisRange::single(0.0));
        assert_eq!(spec.validate().unwrap_err().code, "lambda_y");
        let json = r#"{"model":"one_qubit","ratio":10,"lambda_x":{"start":0,"stop":1,"points":2},"typo":1}"#;
        assert!(serde_json::from_str::<GridSpec>(json).is_err());
    }

    #[test]
    fn row_errors_do_not_abort() {
        let spec = GridSpec {
            model: ModelKind::OneQubit,
            ratio: 50.0,
            n_qubits: 1,
            lambda_x: AxisRange::new(0.5, 1.5, 2),
            lambda_y: None,
            convention: Convention::Rotated,
            d_x: None,
            d_y: None,
            // already beyond the dimension cap
            initial_cutoff: 2048,
            displaced_frame: false,
            block_j: None,
        };
        let rows = scan_grid(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error.is_some() && r.ground_energy.is_nan()));
    }

    #[test]
    fn second_order_transition_from_branch_formulas() {
        let rows = analytic_line(50.0, (0.5, 0.0), (1.5, 0.0), 101).unwrap();
        let report = detect_transitions(&rows, Axis::LambdaX).unwrap();
        assert_eq!(report.points.len(), 1, "{report:?}");
        let p = report.points[0];
        assert_eq!(p.order, TransitionOrder::Second);
        assert!((p.coordinate - 1.0).abs() <= 0.01 + 1e-12);
    }

    #[test]
    fn first_order_transition_on_the_u1_line() {
        let rows = analytic_line(50.0, (1.8, 0.8), (0.8, 1.8), 101).unwrap();
        let report = detect_transitions(&rows, Axis::Line).unwrap();
        assert_eq!(report.points.len(), 1, "{report:?}");
        let p = report.points[0];
        assert_eq!(p.order, TransitionOrder::First);
        assert!((p.lambda_x - 1.3).abs() <= 0.011);
    }

    #[test]
    fn constant_and_short_series() {
        let rows = analytic_line(50.0, (0.1, 0.0), (0.9, 0.0), 20).unwrap();
        assert!(detect_transitions(&rows, Axis::LambdaX).unwrap().points.is_empty());
        let short = analytic_line(50.0, (0.1, 0.0), (0.9, 0.0), 4).unwrap();
        assert_eq!(detect_transitions(&short, Axis::LambdaX).unwrap_err().code, "too_few_points");
    }
}
