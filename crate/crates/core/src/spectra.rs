//! Spectral certificates: frequency-localised cut-offs, windowed exponentials
//! as quasi-eigenvectors of translations, annulus certificates (residual
//! decay inside, Neumann resolvent bounds outside) and the inclusion of the
//! symbol's range in the spectrum of a kernel operator.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Result, WhError};
use crate::gridfn::{fft_friendly, forward_transform_len, linear_convolution, trapezoid, Grid, SampledFunction, C64, EXP_LIMIT};
use crate::linalg::HermitianTridiagonal;
use crate::operators::{apply_shift_fixed, spectral_radius, Direction};
use crate::profiles;
use crate::spaces::{translation_norm, SpaceSpec, Weight};
use crate::symbol::StripSpec;

const ZERO: C64 = C64::new(0.0, 0.0);

// ---------------------------------------------------------------------------
// Cut-off functions

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutoffRequest {
    pub epsilon: f64,
    pub eta0: f64,
    /// Half-width of `V = {|ξ - η₀| ≤ δ}`.
    pub delta: f64,
    pub c0: f64,
    pub step: f64,
    /// Largest admissible support `[0, 2t₀]`.
    pub max_span: f64,
}

impl CutoffRequest {
    pub fn new(epsilon: f64, eta0: f64, delta: f64, c0: f64) -> Self {
        Self {
            epsilon,
            eta0,
            delta,
            c0,
            step: 0.01,
            max_span: 2000.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.epsilon > 0.0
            && self.epsilon < 1.0
            && self.delta > 0.0
            && self.c0 > 0.0
            && self.step > 0.0
            && self.eta0.is_finite()
            && self.max_span > 0.0;
        if ok {
            Ok(())
        } else {
            Err(WhError::InvalidInput(format!("cut-off request out of range: {self:?}")))
        }
    }
}

/// Measured bounds. Transforms use the unitary normalisation
/// `(2π)^{-1/2} ∫ f e^{-iξt} dt`, the one under which `|g(t₀)| = 1` and
/// `∫|ĝ| = √(2π)` hold together.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutoffBounds {
    /// `∫_{ℝ∖V} |f̂|` against `ε/C₀`.
    pub outside_mass: f64,
    pub outside_bound: f64,
    /// `∫ |f̂|` against `2√(2π)`.
    pub total_mass: f64,
    pub total_bound: f64,
    /// `|f(t₀)|`
    pub peak: f64,
    /// `|g(t₀)|` before windowing.
    pub gaussian_peak: f64,
    /// Gaussian tail `∫_{ℝ∖V} |ĝ|` against `ε/(2C₀)`.
    pub gaussian_tail: f64,
    /// `sup (1+ξ²)|F̂|` for `F = (φ - 1)g`, against `ε/(2πC₀)`.
    pub remainder_sup: f64,
    pub remainder_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cutoff {
    #[serde(skip)]
    pub f: SampledFunction,
    /// Gaussian width parameter.
    pub a: f64,
    pub t0: f64,
    pub bounds: CutoffBounds,
    pub pass: bool,
}

fn gaussian_packet(t: f64, a: f64, t0: f64, eta0: f64) -> C64 {
    let y = t - t0;
    C64::from_polar((-0.5 * a * a * y * y).exp(), eta0 * y)
}

fn cutoff_window(t: f64, t0: f64) -> f64 {
    profiles::plateau(t, 0.5, 2.0 * t0 - 0.5, 0.5)
}

/// `f = φ·g` with `ĝ` a Gaussian of width `a` around `η₀` and `φ` a
/// window equal to 1 on `[1, 2t₀ - 1]`. `a` is the largest width whose
/// Gaussian tail outside `V` is at most `ε/(2C₀)`; `t₀` grows by 25% until
/// the windowing remainder satisfies `(1+ξ²)|F̂| ≤ ε/(2πC₀)`.
pub fn build_cutoff(req: &CutoffRequest) -> Result<Cutoff> {
    req.validate()?;
    let sqrt_2pi = (2.0 * PI).sqrt();
    let tail = |a: f64| sqrt_2pi * erfc(req.delta / (std::f64::consts::SQRT_2 * a));
    let target = req.epsilon / (2.0 * req.c0);
    let (mut lo, mut hi) = (1e-6 * req.delta, 10.0 * req.delta);
    if tail(lo) > target {
        return Err(WhError::InvalidInput("no Gaussian width meets the tail bound".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = lo;
    let h = req.step;
    let snap = |t: f64| (t / h).round() * h;
    let remainder_bound = req.epsilon / (2.0 * PI * req.c0);

    let mut t0 = snap(2.5);
    let remainder_sup = loop {
        if 2.0 * t0 > req.max_span {
            return Err(WhError::GridTooSmall {
                required: 2.0 * t0,
                available: req.max_span,
            });
        }
        let r = remainder_sup(a, t0, req.eta0, h)?;
        if r <= remainder_bound {
            break r;
        }
        t0 = snap(1.25 * t0);
    };

    let count = (2.0 * t0 / h).round() as usize + 1;
    let grid = Grid::new(0.0, h, count)?;
    let f = SampledFunction::from_fn(grid, |t| cutoff_window(t, t0) * gaussian_packet(t, a, t0, req.eta0))?;
    let spectrum = forward_transform_len(&f, fft_friendly(8 * count))?;
    let dxi = spectrum.grid().step();
    let (mut outside, mut total) = (0.0, 0.0);
    for (k, v) in spectrum.values().iter().enumerate() {
        let m = v.norm() / sqrt_2pi * dxi;
        total += m;
        if (spectrum.frequency(k) - req.eta0).abs() > req.delta {
            outside += m;
        }
    }
    let k0 = grid.index_of(t0).ok_or_else(|| WhError::InvalidGrid("t₀ is not a grid node".into()))?;
    let bounds = CutoffBounds {
        outside_mass: outside,
        outside_bound: req.epsilon / req.c0,
        total_mass: total,
        total_bound: 2.0 * sqrt_2pi,
        peak: f.values()[k0].norm(),
        gaussian_peak: gaussian_packet(t0, a, t0, req.eta0).norm(),
        gaussian_tail: tail(a),
        remainder_sup,
        remainder_bound,
    };
    let pass = bounds.outside_mass <= bounds.outside_bound
        && bounds.total_mass <= bounds.total_bound + 1e-6
        && (bounds.peak - 1.0).abs() <= 1e-9;
    Ok(Cutoff { f, a, t0, bounds, pass })
}

/// `sup_ξ (1+ξ²)|F̂(ξ)|` for `F = (φ - 1)g`, sampled on a window where `g`
/// is above `e^{-46}` and transformed with 8× padding.
fn remainder_sup(a: f64, t0: f64, eta0: f64, h: f64) -> Result<f64> {
    let reach = ((92.0f64).sqrt() / a).max(t0);
    let origin = ((t0 - reach) / h).floor() * h;
    let count = (2.0 * reach / h).ceil() as usize + 2;
    let grid = Grid::new(origin, h, count)?;
    let big_f = SampledFunction::from_fn(grid, |t| (cutoff_window(t, t0) - 1.0) * gaussian_packet(t, a, t0, eta0))?;
    let spectrum = forward_transform_len(&big_f, fft_friendly(8 * count))?;
    let scale = (2.0 * PI).sqrt();
    Ok((0..spectrum.len())
        .map(|k| {
            let xi = spectrum.frequency(k);
            (1.0 + xi * xi) * spectrum.values()[k].norm() / scale
        })
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Windowed exponentials

/// `ln ω` on a lattice, with direct evaluation off the lattice.
pub(crate) struct LogWeights<'a> {
    weight: &'a Weight,
    step: f64,
    table: Vec<f64>,
}

impl<'a> LogWeights<'a> {
    fn new(weight: &'a Weight, step: f64, extent: f64) -> Result<Self> {
        let n = (extent / step).ceil() as usize + 1;
        let table = (0..n)
            .map(|k| weight.checked_log_value(k as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { weight, step, table })
    }

    fn direct(weight: &'a Weight) -> Self {
        Self {
            weight,
            step: 1.0,
            table: vec![],
        }
    }

    fn at(&self, x: f64) -> Result<f64> {
        let k = (x / self.step).round();
        if k >= 0.0 && (k as usize) < self.table.len() && (k * self.step - x).abs() <= 1e-9 * self.step {
            Ok(self.table[k as usize])
        } else {
            self.weight.checked_log_value(x)
        }
    }
}

/// `ln ‖e^{σx} v‖` in `space`. Weighted `Lᵖ` norms are accumulated in
/// log-space; Orlicz norms need the function to be representable.
pub(crate) fn log_envelope_norm(v: &SampledFunction, sigma: f64, space: &SpaceSpec, lw: Option<&LogWeights>) -> Result<f64> {
    let grid = v.grid();
    match space {
        SpaceSpec::Lp { p, weight } => {
            let fallback = LogWeights::direct(weight);
            let lw = lw.unwrap_or(&fallback);
            let mut logs = Vec::with_capacity(v.len());
            let mut top = f64::NEG_INFINITY;
            for (k, z) in v.values().iter().enumerate() {
                let m = z.norm();
                let l = if m == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let x = grid.point(k);
                    m.ln() + sigma * x + lw.at(x)?
                };
                top = top.max(l);
                logs.push(l);
            }
            if top == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            let sum = trapezoid(logs.iter().map(|l| (p * (l - top)).exp()), grid.step());
            Ok(top + sum.ln() / p)
        }
        _ => {
            let f = materialize(v, sigma, 0.0)?;
            Ok(space.norm(&f)?.ln())
        }
    }
}

/// `e^{σx - c} v(x)`, failing when a sample would overflow.
fn materialize(v: &SampledFunction, sigma: f64, c: f64) -> Result<SampledFunction> {
    for (k, z) in v.values().iter().enumerate() {
        let x = v.grid().point(k);
        if *z != ZERO && sigma * x - c + z.norm().ln() > EXP_LIMIT {
            return Err(WhError::Overflow {
                index: k,
                x,
                context: "windowed exponential is not representable".into(),
            });
        }
    }
    v.map(|x, z| z * (sigma * x - c).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiConfig {
    pub step: f64,
    /// Ramp length as a fraction of the window length.
    pub ramp_fraction: f64,
    /// Zero padding kept on both sides of the window.
    pub margin: f64,
}

impl Default for QuasiConfig {
    fn default() -> Self {
        Self {
            step: 0.25,
            ramp_fraction: 1.0 / 3.0,
            margin: 2.0,
        }
    }
}

/// `f(x) = e^{-κx} η(x)` with `η` a degree-7 smoothstep plateau on the
/// window. Stored as the bounded profile `e^{-i Im κ x} η(x)` together with
/// the envelope rate `σ = -Re κ`, so that windows far from the origin stay
/// representable.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiEigenvector {
    pub kappa: C64,
    pub window: (f64, f64),
    pub ramp: f64,
    #[serde(skip)]
    pub profile: SampledFunction,
}

impl QuasiEigenvector {
    /// Windowed exponential on a lattice of step `config.step`.
    pub fn new(kappa: C64, window: (f64, f64), config: &QuasiConfig) -> Result<Self> {
        let (start, end) = window;
        let h = config.step;
        if !(end > start) {
            return Err(WhError::EmptyWindow { start, end });
        }
        if start < config.margin {
            return Err(WhError::InvalidInput(format!(
                "window start {start} must stay at least {} away from 0",
                config.margin
            )));
        }
        let origin = ((start - config.margin) / h).floor() * h;
        let count = ((end + config.margin - origin) / h).ceil() as usize + 1;
        let grid = Grid::new(origin, h, count)?;
        let ramp = config.ramp_fraction * (end - start);
        let profile = SampledFunction::from_fn(grid, |x| {
            C64::from_polar(profiles::plateau(x, start, end, ramp), -kappa.im * x)
        })?;
        Ok(Self {
            kappa,
            window,
            ramp,
            profile,
        })
    }

    pub fn envelope_rate(&self) -> f64 {
        -self.kappa.re
    }

    pub fn log_norm(&self, space: &SpaceSpec) -> Result<f64> {
        log_envelope_norm(&self.profile, self.envelope_rate(), space, None)
    }

    /// `f / ‖f‖` on `[0, window end + margin]`; overflow error when the
    /// envelope cannot be represented after normalisation.
    pub fn normalized(&self, space: &SpaceSpec) -> Result<SampledFunction> {
        let grid = self.profile.grid();
        let full = Grid::new(0.0, grid.step(), grid.count() + grid.steps_in(grid.origin()).unwrap_or(0) as usize)?;
        let padded = self.profile.transplant(full)?;
        let log_norm = log_envelope_norm(&padded, self.envelope_rate(), space, None)?;
        materialize(&padded, self.envelope_rate(), log_norm)
    }
}

/// Quasi-eigenvector for `S` (`f = λ^{-x}η`) or `S_{-1}` (`f = λ^{x}η`).
pub fn quasi_eigenvector(lambda: C64, window: (f64, f64), direction: Direction, config: &QuasiConfig) -> Result<QuasiEigenvector> {
    if lambda == ZERO {
        return Err(WhError::InvalidInput("λ = 0 has no windowed-exponential quasi-eigenvector".into()));
    }
    let kappa = match direction {
        Direction::Forward => lambda.ln(),
        Direction::Backward => -lambda.ln(),
    };
    QuasiEigenvector::new(kappa, window, config)
}

fn shift_residual_with(q: &QuasiEigenvector, shift: f64, mu: C64, space: &SpaceSpec, lw: Option<&LogWeights>) -> Result<f64> {
    let sigma = q.envelope_rate();
    // S_m f = e^{σx}·e^{-σm}·v(x - m) for f = e^{σx} v.
    let moved = apply_shift_fixed(&q.profile, shift)?;
    let factor = (-sigma * shift).exp();
    let diff = moved.combine(C64::new(factor, 0.0), &q.profile, -mu)?;
    let num = log_envelope_norm(&diff, sigma, space, lw)?;
    let den = log_envelope_norm(&q.profile, sigma, space, lw)?;
    Ok((num - den).exp())
}

/// `‖(S_shift - μ) f‖ / ‖f‖`.
pub fn shift_residual(q: &QuasiEigenvector, shift: f64, mu: C64, space: &SpaceSpec) -> Result<f64> {
    shift_residual_with(q, shift, mu, space, None)
}

// ---------------------------------------------------------------------------
// Annulus certificates

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowLadder {
    pub lengths: Vec<f64>,
    /// Windows lie inside `[margin, search_end]`.
    pub search_end: f64,
    /// Candidate starts are the multiples of `length · start_spacing`.
    pub start_spacing: f64,
    pub quasi: QuasiConfig,
}

impl Default for WindowLadder {
    fn default() -> Self {
        Self {
            lengths: vec![32.0, 64.0, 128.0, 256.0, 512.0, 1024.0],
            search_end: 4096.0,
            start_spacing: 1.0 / 16.0,
            quasi: QuasiConfig::default(),
        }
    }
}

impl WindowLadder {
    fn starts(&self, length: f64) -> Vec<f64> {
        let spacing = (length * self.start_spacing).max(self.quasi.step);
        let first = (self.quasi.margin / spacing).ceil().max(1.0) as usize;
        (first..)
            .map(|k| k as f64 * spacing)
            .take_while(|s| s + length <= self.search_end)
            .collect()
    }
}

/// `[1/ρ(S_{-1}), ρ(S)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnnulusBounds {
    pub rho_forward: f64,
    pub rho_backward: f64,
}

impl AnnulusBounds {
    const TOL: f64 = 1e-6;

    pub fn from_weight(w: &Weight, p: f64) -> Self {
        Self {
            rho_forward: spectral_radius(w, p, Direction::Forward).estimate,
            rho_backward: spectral_radius(w, p, Direction::Backward).estimate,
        }
    }

    pub fn inner(&self) -> f64 {
        1.0 / self.rho_backward
    }

    pub fn outer(&self) -> f64 {
        self.rho_forward
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.inner() * (1.0 - Self::TOL) && r <= self.outer() * (1.0 + Self::TOL)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRung {
    pub length: f64,
    pub window: (f64, f64),
    /// `‖(S - λ)f‖/‖f‖`
    pub residual: f64,
    /// `‖(S_{-1} - 1/λ)f‖/‖f‖` for the same `f`.
    pub backward_residual: f64,
    /// Smallest singular value of the rectangular section of `S - λ` on
    /// unit cells of the window (`L²` only).
    pub sigma_min: Option<f64>,
}

impl LadderRung {
    pub fn worst(&self) -> f64 {
        self.residual.max(self.backward_residual)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CertificateKind {
    /// `λ` lies in the annulus: a windowed exponential with small residual
    /// for both `S - λ` and `S_{-1} - 1/λ`.
    Inside {
        residual: f64,
        ladder: Vec<LadderRung>,
        witness: QuasiEigenvector,
    },
    /// Neumann bound on `‖(A - z)^{-1}‖` for `A = S` (`z = λ`) or
    /// `A = S_{-1}` (`z = 1/λ`); every quasi-eigenvector residual of `A`
    /// at `z` is at least `residual_floor = 1/resolvent_bound`.
    Outside {
        operator: Direction,
        at: C64,
        resolvent_bound: f64,
        residual_floor: f64,
        terms: usize,
        contraction: f64,
    },
    /// Outside the annulus but too close for a convergent Neumann bound.
    Undecided { reason: String },
    OutOfCharacterization { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralCertificate {
    pub lambda: C64,
    pub modulus: f64,
    pub bounds: AnnulusBounds,
    #[serde(flatten)]
    pub kind: CertificateKind,
}

impl SpectralCertificate {
    pub fn status(&self) -> &'static str {
        match self.kind {
            CertificateKind::Inside { .. } => "inside",
            CertificateKind::Outside { .. } => "outside",
            CertificateKind::Undecided { .. } => "undecided",
            CertificateKind::OutOfCharacterization { .. } => "out_of_characterization",
        }
    }

    /// Inside: the ladder-top residual. Outside: the residual floor.
    pub fn value(&self) -> f64 {
        match &self.kind {
            CertificateKind::Inside { residual, .. } => *residual,
            CertificateKind::Outside { residual_floor, .. } => *residual_floor,
            _ => f64::NAN,
        }
    }

    /// Recomputes `‖(S - λ)f‖/‖f‖` from the stored witness.
    pub fn recompute_residual(&self, space: &SpaceSpec) -> Option<Result<f64>> {
        match &self.kind {
            CertificateKind::Inside { witness, .. } => Some(shift_residual(witness, 1.0, self.lambda, space)),
            _ => None,
        }
    }
}

/// `‖(A - z)^{-1}‖ ≤ B_m / (1 - q)` with `B_m = Σ_{r<m} ‖A^r‖/|z|^{r+1}` and
/// `q = ‖A^m‖/|z|^m < 1`, minimised over `m ≤ 16`. Returns `(bound, m, q)`.
pub fn neumann_bound(w: &Weight, p: f64, direction: Direction, modulus: f64) -> Option<(f64, usize, f64)> {
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let log_norms: Vec<f64> = (0..=16).map(|r| translation_norm(w, p, sign * r as f64).ln()).collect();
    let lz = modulus.ln();
    let mut best: Option<(f64, usize, f64)> = None;
    let mut partial = 0.0;
    for m in 1..=16usize {
        let r = m - 1;
        partial += (log_norms[r] - (r as f64 + 1.0) * lz).exp();
        let q = (log_norms[m] - m as f64 * lz).exp();
        if q < 1.0 {
            let bound = partial / (1.0 - q);
            if best.is_none_or(|b| bound < b.0) {
                best = Some((bound, m, q));
            }
        }
    }
    best
}

/// `ln (∫_j^{j+1} ω^2)^{1/2}` for `count` consecutive unit cells.
fn cell_log_norms(w: &Weight, first: f64, count: usize) -> Result<Vec<f64>> {
    const SUB: usize = 16;
    (0..count)
        .map(|j| {
            let logs = (0..=SUB)
                .map(|k| w.checked_log_value(first + j as f64 + k as f64 / SUB as f64).map(|l| 2.0 * l))
                .collect::<Result<Vec<_>>>()?;
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum = trapezoid(logs.iter().map(|l| (l - top).exp()), 1.0 / SUB as f64);
            Ok(0.5 * (top + sum.ln()))
        })
        .collect()
}

/// Smallest singular value of `S - λ` compressed to `length` unit cells
/// starting at `first` (inputs) and the `length + 1` cells covering their
/// image (outputs), in `L²_ω`. On cell-normalised indicators `S` acts as a
/// weighted shift with ratios `N_{j+1}/N_j`, so this is exact for the
/// piecewise-constant subspace.
pub fn section_sigma_min(lambda: C64, w: &Weight, first: f64, length: usize) -> Result<f64> {
    let logs = cell_log_norms(w, first, length + 1)?;
    let ratios: Vec<f64> = logs.windows(2).map(|p| (p[1] - p[0]).exp()).collect();
    let d = ratios.iter().map(|r| lambda.norm_sqr() + r * r).collect();
    let e = ratios[..length - 1].iter().map(|r| -lambda * *r).collect();
    let (ev, _) = HermitianTridiagonal { d, e }.smallest_eigenpair();
    Ok(ev.max(0.0).sqrt())
}

fn best_rung(
    lambda: C64,
    space: &SpaceSpec,
    ladder: &WindowLadder,
    length: f64,
    lw: &LogWeights,
) -> Result<(LadderRung, QuasiEigenvector)> {
    let mut best: Option<(LadderRung, QuasiEigenvector)> = None;
    for start in ladder.starts(length) {
        let q = quasi_eigenvector(lambda, (start, start + length), Direction::Forward, &ladder.quasi)?;
        let residual = shift_residual_with(&q, 1.0, lambda, space, Some(lw))?;
        let backward_residual = shift_residual_with(&q, -1.0, lambda.inv(), space, Some(lw))?;
        let rung = LadderRung {
            length,
            window: q.window,
            residual,
            backward_residual,
            sigma_min: None,
        };
        if best.as_ref().is_none_or(|(b, _)| rung.worst() < b.worst()) {
            best = Some((rung, q));
        }
    }
    best.ok_or(WhError::EmptyWindow {
        start: ladder.quasi.margin,
        end: ladder.search_end,
    })
}

fn lp_parts(space: &SpaceSpec) -> Result<(f64, &Weight)> {
    match space {
        SpaceSpec::Lp { p, weight } => Ok((*p, weight)),
        _ => Err(WhError::InvalidInput(
            "annulus certificates use the exact translation norms of weighted Lᵖ".into(),
        )),
    }
}

/// Certificate for `λ` with respect to the annulus `[1/ρ(S_{-1}), ρ(S)]`.
///
/// Inside: the window ladder of quasi-eigenvectors, each window chosen to
/// minimise the worse of the `S` and `S_{-1}` residuals. Outside: a
/// Neumann resolvent bound for `S` at `λ` (`|λ| > ρ(S)`) or for `S_{-1}` at
/// `1/λ` (`|λ| < 1/ρ(S_{-1})`). `λ = 0` is outside the characterised set.
pub fn annulus_certificate(
    lambda: C64,
    space: &SpaceSpec,
    bounds: &AnnulusBounds,
    ladder: &WindowLadder,
) -> Result<SpectralCertificate> {
    let (p, w) = lp_parts(space)?;
    let modulus = lambda.norm();
    let kind = if modulus == 0.0 {
        CertificateKind::OutOfCharacterization {
            reason: "λ = 0: S is injective but not surjective, and 0 has no inverse in spec(S_{-1})^{-1}".into(),
        }
    } else if bounds.contains(modulus) {
        let extent = ladder.search_end + 2.0 * ladder.quasi.margin;
        let lw = LogWeights::new(w, ladder.quasi.step, extent)?;
        let mut rungs = Vec::with_capacity(ladder.lengths.len());
        let mut witness = None;
        for &length in &ladder.lengths {
            let (mut rung, q) = best_rung(lambda, space, ladder, length, &lw)?;
            if p == 2.0 {
                let first = rung.window.0.ceil();
                rung.sigma_min = Some(section_sigma_min(lambda, w, first, length.floor().max(2.0) as usize)?);
            }
            rungs.push(rung);
            witness = Some(q);
        }
        let witness = witness.ok_or(WhError::InvalidInput("empty window ladder".into()))?;
        CertificateKind::Inside {
            residual: rungs.last().map(LadderRung::worst).unwrap_or(f64::NAN),
            ladder: rungs,
            witness,
        }
    } else {
        let (direction, at, m) = if modulus > bounds.outer() {
            (Direction::Forward, lambda, modulus)
        } else {
            (Direction::Backward, lambda.inv(), 1.0 / modulus)
        };
        match neumann_bound(w, p, direction, m) {
            Some((bound, terms, contraction)) => CertificateKind::Outside {
                operator: direction,
                at,
                resolvent_bound: bound,
                residual_floor: 1.0 / bound,
                terms,
                contraction,
            },
            None => CertificateKind::Undecided {
                reason: format!("no m ≤ 16 with ‖A^m‖ < |z|^m at |z| = {m}"),
            },
        }
    };
    Ok(SpectralCertificate {
        lambda,
        modulus,
        bounds: *bounds,
        kind,
    })
}

/// Certificates for a batch of points, computed in parallel, returned in
/// input order.
pub fn certificate_batch(
    lambdas: &[C64],
    space: &SpaceSpec,
    bounds: &AnnulusBounds,
    ladder: &WindowLadder,
) -> Result<Vec<SpectralCertificate>> {
    lambdas
        .par_iter()
        .map(|&l| annulus_certificate(l, space, bounds, ladder))
        .collect()
}

/// `radii × angles` polar lattice, angles `2πk/angles`.
pub fn polar_lattice(radii: &[f64], angles: usize) -> Vec<C64> {
    radii
        .iter()
        .flat_map(|&r| (0..angles).map(move |k| C64::from_polar(r, 2.0 * PI * k as f64 / angles as f64)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateRow {
    pub re: f64,
    pub im: f64,
    pub status: String,
    pub value: f64,
}

pub fn certificate_rows(certs: &[SpectralCertificate]) -> Vec<CertificateRow> {
    certs
        .iter()
        .map(|c| CertificateRow {
            re: c.lambda.re,
            im: c.lambda.im,
            status: c.status().into(),
            value: c.value(),
        })
        .collect()
}

/// Separation between the annulus and its complement in a batch:
/// smallest outside residual floor over largest inside residual.
pub fn separation_factor(certs: &[SpectralCertificate]) -> Option<f64> {
    let worst_inside = certs
        .iter()
        .filter(|c| matches!(c.kind, CertificateKind::Inside { .. }))
        .map(|c| c.value())
        .reduce(f64::max)?;
    let best_floor = certs
        .iter()
        .filter(|c| matches!(c.kind, CertificateKind::Outside { .. }))
        .map(|c| c.value())
        .reduce(f64::min)?;
    Some(best_floor / worst_inside)
}

// ---------------------------------------------------------------------------
// Symbol range inside the spectrum

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionConfig {
    pub lengths: Vec<f64>,
    pub search_end: f64,
    pub start_spacing: f64,
    pub ramp_fraction: f64,
}

impl Default for InclusionConfig {
    fn default() -> Self {
        Self {
            lengths: vec![25.0, 50.0, 100.0, 200.0],
            search_end: 600.0,
            start_spacing: 1.0 / 8.0,
            ramp_fraction: 1.0 / 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionRung {
    pub length: f64,
    pub window: (f64, f64),
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionPoint {
    pub alpha: C64,
    /// `φ̂(α)`
    pub target: C64,
    pub ladder: Vec<InclusionRung>,
    pub residual: f64,
    /// Residuals non-increasing along the ladder, up to 5% slack.
    pub decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub strip: StripSpec,
    pub points: Vec<InclusionPoint>,
}

/// `‖T_φ f - φ̂(α) f‖ / ‖f‖` for `f = e^{iαx} η` on `window`.
///
/// With `ψ(y) = φ(y) e^{-iαy}`, `T_φ f - φ̂(α) f = e^{iαx}(ψ ∗ η - ψ̂(0) η)`,
/// which is evaluated without forming the exponential envelope.
pub fn inclusion_residual(
    phi: &SampledFunction,
    alpha: C64,
    window: (f64, f64),
    ramp_fraction: f64,
    space: &SpaceSpec,
) -> Result<(C64, f64)> {
    let h = phi.grid().step();
    let (start, end) = window;
    let reach_left = phi.grid().origin().min(0.0);
    let reach_right = phi.grid().end().max(0.0);
    let origin = ((start + reach_left) / h).floor() * h - h;
    if origin < 0.0 {
        return Err(WhError::InvalidInput(format!(
            "window start {start} is within the kernel's reach of 0"
        )));
    }
    let eta_origin = (start / h).floor() * h;
    let eta_count = ((end - eta_origin) / h).ceil() as usize + 1;
    let eta_grid = Grid::new(eta_origin, h, eta_count)?;
    let ramp = ramp_fraction * (end - start);
    let eta: Vec<C64> = eta_grid
        .points()
        .map(|x| C64::new(profiles::plateau(x, start, end, ramp), 0.0))
        .collect();
    let kappa = C64::new(0.0, -1.0) * alpha;
    let psi: Vec<C64> = phi
        .grid()
        .points()
        .zip(phi.values())
        .map(|(y, v)| v * (kappa * y).exp())
        .collect();
    let mu = psi.iter().sum::<C64>() * h;
    let conv = linear_convolution(&psi, &eta);

    let count = ((eta_grid.end() + reach_right - origin) / h).ceil() as usize + 2;
    let grid = Grid::new(origin, h, count)?;
    let conv_off = grid
        .steps_in(eta_origin + phi.grid().origin() - origin)
        .ok_or(WhError::Alignment { shift: phi.grid().origin(), step: h })?;
    let eta_off = grid
        .steps_in(eta_origin - origin)
        .ok_or(WhError::Alignment { shift: eta_origin, step: h })?;
    let mut resid = vec![ZERO; count];
    let mut base = vec![ZERO; count];
    for (m, c) in conv.iter().enumerate() {
        let i = conv_off + m as isize;
        if i >= 0 && (i as usize) < count {
            resid[i as usize] += c * h;
        }
    }
    for (m, e) in eta.iter().enumerate() {
        let i = (eta_off + m as isize) as usize;
        resid[i] -= mu * e;
        base[i] = *e;
    }
    let sigma = -kappa.re;
    let num = log_envelope_norm(&SampledFunction::new(grid, resid)?, sigma, space, None)?;
    let den = log_envelope_norm(&SampledFunction::new(grid, base)?, sigma, space, None)?;
    Ok((mu, (num - den).exp()))
}

/// For each `α` in the strip, windowed plane waves `e^{iαx}η` along a ladder
/// of window lengths, each placed where the envelope `|e^{iαx}|ω` keeps
/// the window edges light.
pub fn symbol_spectrum_inclusion(
    phi: &SampledFunction,
    space: &SpaceSpec,
    strip: &StripSpec,
    alphas: &[C64],
    config: &InclusionConfig,
) -> Result<InclusionReport> {
    let (_, w) = lp_parts(space)?;
    let reach = -phi.grid().origin().min(0.0) + 2.0;
    let coarse = QuasiConfig {
        step: 0.25,
        ramp_fraction: config.ramp_fraction,
        margin: reach,
    };
    let lw = LogWeights::new(w, coarse.step, config.search_end + 2.0 * reach)?;
    let points = alphas
        .par_iter()
        .map(|&alpha| {
            strip.check(alpha.im)?;
            let lambda = (C64::new(0.0, -1.0) * alpha).exp();
            let ladder = WindowLadder {
                lengths: config.lengths.clone(),
                search_end: config.search_end,
                start_spacing: config.start_spacing,
                quasi: coarse.clone(),
            };
            let mut rungs = vec![];
            let mut target = ZERO;
            for &length in &config.lengths {
                let (rung, _) = best_rung(lambda, space, &ladder, length, &lw)?;
                let (mu, residual) = inclusion_residual(phi, alpha, rung.window, config.ramp_fraction, space)?;
                target = mu;
                rungs.push(InclusionRung {
                    length,
                    window: rung.window,
                    residual,
                });
            }
            let residual = rungs.last().map(|r| r.residual).unwrap_or(f64::NAN);
            let decreasing = rungs.windows(2).all(|p| p[1].residual <= 1.05 * p[0].residual);
            Ok(InclusionPoint {
                alpha,
                target,
                ladder: rungs,
                residual,
                decreasing,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InclusionReport {
        strip: strip.clone(),
        points,
    })
}
