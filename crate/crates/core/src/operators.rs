//! Translations, modulations and Wiener–Hopf operators `T_φ f = P⁺(φ ∗ f)`,
//! together with norms, spectral radii, kernel recovery by probing and the
//! Fejér smoothing approximants.
//!
//! Functions on the half-line live on grids starting at 0. A kernel lives on
//! any grid with the same step whose nodes are aligned with the function's.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, WhError};
use crate::gridfn::{
    fft_friendly, forward_transform, forward_transform_len, inverse_transform, linear_convolution, Grid,
    SampledFunction, C64,
};
use crate::linalg::{dense_largest_singular_value, largest_singular_value, BandedWeighted};
use crate::profiles;
use crate::spaces::{log_translation_norm, SpaceSpec, Weight};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Relative size of output mass tolerated past the right end of the grid.
const ESCAPE_TOLERANCE: f64 = 1e-13;

pub type ApplyFn = Arc<dyn Fn(&SampledFunction) -> Result<SampledFunction> + Send + Sync>;

#[derive(Clone)]
pub enum OperatorKind {
    /// `f ↦ P⁺(φ ∗ f)`
    Kernel(SampledFunction),
    /// `S_a`; `a < 0` is the left translation `S_{-|a|}`.
    Shift(f64),
    BlackBox { name: String, apply: ApplyFn },
}

impl fmt::Debug for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kernel(phi) => write!(f, "Kernel({} samples from x = {})", phi.len(), phi.grid().origin()),
            Self::Shift(a) => write!(f, "Shift({a})"),
            Self::BlackBox { name, .. } => write!(f, "BlackBox({name})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WienerHopfOperator {
    pub kind: OperatorKind,
    pub space: SpaceSpec,
}

impl WienerHopfOperator {
    pub fn kernel(phi: SampledFunction, space: SpaceSpec) -> Self {
        Self {
            kind: OperatorKind::Kernel(phi),
            space,
        }
    }

    pub fn shift(a: f64, space: SpaceSpec) -> Self {
        Self {
            kind: OperatorKind::Shift(a),
            space,
        }
    }

    pub fn identity(space: SpaceSpec) -> Self {
        Self::shift(0.0, space)
    }

    pub fn black_box(
        name: impl Into<String>,
        apply: impl Fn(&SampledFunction) -> Result<SampledFunction> + Send + Sync + 'static,
        space: SpaceSpec,
    ) -> Self {
        Self {
            kind: OperatorKind::BlackBox {
                name: name.into(),
                apply: Arc::new(apply),
            },
            space,
        }
    }

    /// `Γ_a f = e^{iax} f` as a black box.
    pub fn modulation(a: f64, space: SpaceSpec) -> Self {
        Self::black_box(format!("modulation({a})"), move |f| apply_modulation(f, a), space)
    }

    /// The same operator seen only through its action.
    pub fn as_black_box(&self) -> Self {
        let inner = self.clone();
        Self::black_box(format!("black_box({})", self.name()), move |f| apply_wh(&inner, f), self.space.clone())
    }

    pub fn name(&self) -> String {
        match &self.kind {
            OperatorKind::Kernel(_) => "kernel".into(),
            OperatorKind::Shift(a) if *a == 0.0 => "identity".into(),
            OperatorKind::Shift(a) => format!("shift({a})"),
            OperatorKind::BlackBox { name, .. } => name.clone(),
        }
    }

    pub fn kernel_samples(&self) -> Option<&SampledFunction> {
        match &self.kind {
            OperatorKind::Kernel(phi) => Some(phi),
            _ => None,
        }
    }
}

fn require_half_line(f: &SampledFunction) -> Result<()> {
    if f.grid().origin().abs() > 1e-9 * f.grid().step() {
        return Err(WhError::InvalidGrid(format!(
            "half-line functions must start at 0 (origin {})",
            f.grid().origin()
        )));
    }
    Ok(())
}

/// `S_a f`, relocating samples exactly.
///
/// For `a > 0` the grid grows by `a/h` samples and `[0, a)` is zero-filled;
/// for `a < 0` the first `|a|/h` samples are dropped and the grid shrinks
/// accordingly. Hence `S_{-a} S_a f = f` exactly.
pub fn apply_shift(f: &SampledFunction, a: f64) -> Result<SampledFunction> {
    let k = f.grid().steps_in(a).ok_or(WhError::Alignment {
        shift: a,
        step: f.grid().step(),
    })?;
    if k == 0 {
        return Ok(f.clone());
    }
    let n = f.len();
    if k > 0 {
        let k = k as usize;
        let mut values = vec![ZERO; n + k];
        values[k..].copy_from_slice(f.values());
        SampledFunction::new(f.grid().with_count(n + k)?, values)
    } else {
        let k = (-k) as usize;
        if k + 2 > n {
            return Ok(SampledFunction::zeros(f.grid().with_count(2)?));
        }
        SampledFunction::new(f.grid().with_count(n - k)?, f.values()[k..].to_vec())
    }
}

/// `S_a f` on the same grid. Samples pushed past the right end must vanish
/// (support error otherwise); vacated samples are zero-filled.
pub fn apply_shift_fixed(f: &SampledFunction, a: f64) -> Result<SampledFunction> {
    let k = f.grid().steps_in(a).ok_or(WhError::Alignment {
        shift: a,
        step: f.grid().step(),
    })?;
    let n = f.len();
    let mut values = vec![ZERO; n];
    if k >= 0 {
        let k = k as usize;
        if k < n {
            if let Some(j) = f.values()[n - k..].iter().position(|v| *v != ZERO) {
                return Err(WhError::Support {
                    detail: format!("shift by {a} pushes the sample at x = {} off the grid", f.grid().point(n - k + j)),
                });
            }
            values[k..].copy_from_slice(&f.values()[..n - k]);
        } else if f.support().is_some() {
            return Err(WhError::Support {
                detail: format!("shift by {a} exceeds the grid"),
            });
        }
    } else {
        let k = (-k) as usize;
        if k < n {
            values[..n - k].copy_from_slice(&f.values()[k..]);
        }
    }
    SampledFunction::new(*f.grid(), values)
}

/// `Γ_a f = e^{iax} f`.
pub fn apply_modulation(f: &SampledFunction, a: f64) -> Result<SampledFunction> {
    if a == 0.0 {
        return Ok(f.clone());
    }
    f.map(|x, v| v * C64::from_polar(1.0, a * x))
}

/// Applies `T` to `f`. Kernel operators convolve and restrict to `[0, end]`;
/// shifts relocate samples on the same grid.
pub fn apply_wh(t: &WienerHopfOperator, f: &SampledFunction) -> Result<SampledFunction> {
    match &t.kind {
        OperatorKind::Kernel(phi) => {
            require_half_line(f)?;
            convolve_truncate(phi, f)
        }
        OperatorKind::Shift(a) => {
            require_half_line(f)?;
            apply_shift_fixed(f, *a)
        }
        OperatorKind::BlackBox { apply, .. } => {
            let out = apply(f)?;
            if out.grid() != f.grid() {
                return Err(WhError::InvalidInput(format!(
                    "black box returned {} samples on a different grid",
                    out.len()
                )));
            }
            Ok(out)
        }
    }
}

/// `h Σ_j φ(x_i - y_j) f(y_j)` at the nodes of `f`'s grid.
fn convolve_truncate(phi: &SampledFunction, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = *f.grid();
    if !grid.is_aligned_with(phi.grid()) {
        return Err(WhError::InvalidGrid(format!(
            "kernel grid (origin {}, step {}) is not aligned with the function grid (step {})",
            phi.grid().origin(),
            phi.grid().step(),
            grid.step()
        )));
    }
    let (Some((p0, p1)), Some((f0, f1))) = (phi.support(), f.support()) else {
        return Ok(SampledFunction::zeros(grid));
    };
    let conv = linear_convolution(&phi.values()[p0..=p1], &f.values()[f0..=f1]);
    // conv[m] sits at φ-index p0 + f-index f0 + m, i.e. at output index
    // base + m where base = kernel offset in steps + p0 + f0.
    let kernel_offset = grid.steps_in(phi.grid().origin() - grid.origin()).unwrap_or(0);
    let base = kernel_offset + (p0 + f0) as isize;
    let n = grid.count() as isize;
    let h = grid.step();
    let peak = conv.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut values = vec![ZERO; grid.count()];
    for (m, v) in conv.iter().enumerate() {
        let i = base + m as isize;
        if i < 0 {
            continue;
        }
        if i >= n {
            if v.norm() > ESCAPE_TOLERANCE * peak {
                return Err(WhError::Support {
                    detail: format!(
                        "convolution reaches x = {:.4} beyond the grid end {:.4}",
                        grid.origin() + i as f64 * h,
                        grid.end()
                    ),
                });
            }
            continue;
        }
        values[i as usize] = v * h;
    }
    SampledFunction::new(grid, values)
}

/// `max ‖S_{-a} T S_a f - T f‖ / ‖f‖` over probes and translations.
pub fn commutation_defect(t: &WienerHopfOperator, probes: &[SampledFunction], shifts: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in probes {
        let tf = apply_wh(t, f)?;
        let nf = t.space.norm(f)?;
        if nf == 0.0 {
            continue;
        }
        for &a in shifts {
            let g = apply_shift(&apply_wh(t, &apply_shift(f, a)?)?, -a)?;
            let d = t.space.norm(&g.sub(&tf)?)?;
            worst = worst.max(d / nf);
        }
    }
    Ok(worst)
}

/// Dense compression of `T` to a window pair, in weighted coordinates
/// `u = √h·ω·f` on both sides.
#[derive(Clone, Debug)]
pub struct FiniteSection {
    pub matrix: DMatrix<C64>,
    pub input_grid: Grid,
    pub output_grid: Grid,
}

fn window_indices(grid: &Grid, window: (f64, f64)) -> Result<(usize, usize)> {
    let (a, b) = window;
    let tol = 1e-9 * grid.step();
    if !(b > a) || a < grid.origin() - tol || b > grid.end() + tol {
        return Err(WhError::EmptyWindow { start: a, end: b });
    }
    let i0 = ((a - grid.origin()) / grid.step() - 1e-9).ceil().max(0.0) as usize;
    let i1 = (((b - grid.origin()) / grid.step() + 1e-9).floor() as usize).min(grid.count() - 1);
    if i1 <= i0 {
        return Err(WhError::EmptyWindow { start: a, end: b });
    }
    Ok((i0, i1))
}

fn space_log_weights(space: &SpaceSpec, grid: &Grid) -> Result<Vec<f64>> {
    match space.weight() {
        Some(w) => w.log_values_on(grid),
        None => Ok(vec![0.0; grid.count()]),
    }
}

pub fn finite_section(
    t: &WienerHopfOperator,
    grid: &Grid,
    in_window: (f64, f64),
    out_window: (f64, f64),
) -> Result<FiniteSection> {
    let (j0, j1) = window_indices(grid, in_window)?;
    let (i0, i1) = window_indices(grid, out_window)?;
    let logs = space_log_weights(&t.space, grid)?;
    let h = grid.step();
    let (rows, cols) = (i1 - i0 + 1, j1 - j0 + 1);
    let ratio = |i: usize, j: usize| (logs[i] - logs[j]).exp();
    let matrix = match &t.kind {
        OperatorKind::Kernel(phi) => {
            if !grid.is_aligned_with(phi.grid()) {
                return Err(WhError::InvalidGrid("kernel grid is not aligned with the section grid".into()));
            }
            let off = grid.steps_in(phi.grid().origin() - grid.origin()).unwrap_or(0);
            DMatrix::from_fn(rows, cols, |r, c| {
                let (i, j) = (i0 + r, j0 + c);
                let k = i as isize - j as isize - off;
                if k >= 0 && (k as usize) < phi.len() {
                    phi.values()[k as usize] * (h * ratio(i, j))
                } else {
                    ZERO
                }
            })
        }
        OperatorKind::Shift(a) => {
            let k = grid.steps_in(*a).ok_or(WhError::Alignment { shift: *a, step: h })?;
            DMatrix::from_fn(rows, cols, |r, c| {
                let (i, j) = (i0 + r, j0 + c);
                if i as isize - j as isize == k {
                    C64::new(ratio(i, j), 0.0)
                } else {
                    ZERO
                }
            })
        }
        OperatorKind::BlackBox { .. } => {
            let mut m = DMatrix::from_element(rows, cols, ZERO);
            for c in 0..cols {
                let j = j0 + c;
                let mut e = SampledFunction::zeros(*grid).into_values();
                e[j] = C64::new(1.0, 0.0);
                let col = apply_wh(t, &SampledFunction::new(*grid, e)?)?;
                for r in 0..rows {
                    let i = i0 + r;
                    m[(r, c)] = col.values()[i] * ratio(i, j);
                }
            }
            m
        }
    };
    Ok(FiniteSection {
        matrix,
        input_grid: Grid::new(grid.point(j0), h, cols)?,
        output_grid: Grid::new(grid.point(i0), h, rows)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormConfig {
    /// Target grid step for norm computations; kernels are decimated toward it
    /// when that does not alias their transform.
    pub norm_step: f64,
    pub min_window: f64,
    pub max_window: f64,
    pub rel_tol: f64,
    pub lanczos_iterations: usize,
    /// Grid step on which black-box operators are probed.
    pub black_box_step: f64,
    pub max_dense: usize,
    /// Number of random probes for the non-Hilbert lower bound.
    pub probes: usize,
    pub seed: u64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            norm_step: 0.25,
            min_window: 128.0,
            max_window: 1024.0,
            rel_tol: 1e-4,
            lanczos_iterations: 150,
            black_box_step: 0.05,
            max_dense: 512,
            probes: 64,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// True when `value` is only a certified lower bound (spaces other than `L²_ω`).
    pub lower_bound: bool,
    /// `(window length, estimate)` along the ladder.
    pub trend: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Largest kernel decimation stride that keeps the transform's sup-norm to 1e-7.
fn decimate_kernel(phi: &SampledFunction, target_step: f64) -> Result<SampledFunction> {
    let h = phi.grid().step();
    let max_stride = (target_step / h).floor().max(1.0) as usize;
    if max_stride == 1 {
        return Ok(phi.clone());
    }
    let reference = forward_transform(phi)?.sup_norm();
    // Phase keeps decimated nodes on multiples of the coarse step.
    for stride in (2..=max_stride).rev() {
        let origin_steps = (phi.grid().origin() / h).round() as isize;
        let phase = origin_steps.rem_euclid(stride as isize) as usize;
        let phase = (stride - phase) % stride;
        let values: Vec<C64> = phi.values().iter().skip(phase).step_by(stride).copied().collect();
        if values.len() < 2 {
            continue;
        }
        let grid = Grid::new(phi.grid().point(phase), h * stride as f64, values.len())?;
        let coarse = SampledFunction::new(grid, values)?;
        let sup = forward_transform(&coarse)?.sup_norm();
        if (sup - reference).abs() <= 1e-7 * reference.max(1e-300) {
            return Ok(coarse);
        }
    }
    Ok(phi.clone())
}

fn ladder(config: &NormConfig) -> Vec<f64> {
    let mut out = vec![];
    let mut l = config.min_window;
    while l <= config.max_window * (1.0 + 1e-12) {
        out.push(l);
        l *= 2.0;
    }
    out
}

fn finish_ladder(trend: Vec<(f64, f64)>, config: &NormConfig, lower_bound: bool) -> Result<NormEstimate> {
    let n = trend.len();
    let converged = n >= 2 && {
        let (a, b) = (trend[n - 2].1, trend[n - 1].1);
        (b - a).abs() <= config.rel_tol * b.abs().max(1e-300)
    };
    if !converged && n >= 2 {
        let text: Vec<String> = trend.iter().map(|(l, v)| format!("L={l}: {v:.9}")).collect();
        return Err(WhError::Windowing {
            trend: text.join(", "),
        });
    }
    Ok(NormEstimate {
        value: trend.last().map(|t| t.1).unwrap_or(0.0),
        lower_bound,
        trend,
        converged,
    })
}

/// `‖T‖` on the operator's space.
///
/// On `L²_ω` this is the largest singular value of growing finite sections
/// `[0, L]` in weighted coordinates, stopping once the relative change drops
/// below `rel_tol`. Elsewhere it is the best ratio `‖Tf‖/‖f‖` over seeded
/// random probes, flagged as a lower bound.
pub fn operator_norm(t: &WienerHopfOperator, config: &NormConfig) -> Result<NormEstimate> {
    if !t.space.is_hilbert() {
        return probe_norm(t, config);
    }
    let weight = t.space.weight().cloned().unwrap_or_else(Weight::constant);
    match &t.kind {
        OperatorKind::Kernel(phi) => {
            let coarse = decimate_kernel(phi, config.norm_step)?;
            let h = coarse.grid().step();
            let offset = -(coarse.grid().origin() / h).round() as isize;
            let mut trend = vec![];
            for l in ladder(config) {
                let n = (l / h).round() as usize + 1;
                let grid = Grid::new(0.0, h, n)?;
                let logs = weight.log_values_on(&grid)?;
                let op = BandedWeighted {
                    taps: coarse.values().to_vec(),
                    offset,
                    step: h,
                    log_in: logs.clone(),
                    log_out: logs,
                };
                let r = largest_singular_value(&op, config.lanczos_iterations, 1e-12, config.seed);
                trend.push((l, r.sigma));
                if stop_early(&trend, config) {
                    break;
                }
            }
            finish_ladder(trend, config, false)
        }
        OperatorKind::Shift(a) => {
            if *a == 0.0 {
                return Ok(NormEstimate {
                    value: 1.0,
                    lower_bound: false,
                    trend: vec![],
                    converged: true,
                });
            }
            let h = a.abs() / (a.abs() / config.norm_step).ceil();
            let k = (a / h).round() as isize;
            let mut trend = vec![];
            for l in ladder(config) {
                let n = (l / h).round() as usize + 1;
                let grid = Grid::new(0.0, h, n)?;
                let logs = weight.log_values_on(&grid)?;
                let ku = k.unsigned_abs();
                let best = (0..n.saturating_sub(ku))
                    .map(|j| if k > 0 { logs[j + ku] - logs[j] } else { logs[j] - logs[j + ku] })
                    .fold(f64::NEG_INFINITY, f64::max);
                trend.push((l, best.exp()));
                if stop_early(&trend, config) {
                    break;
                }
            }
            finish_ladder(trend, config, false)
        }
        OperatorKind::BlackBox { .. } => {
            let h = config.black_box_step;
            let mut trend = vec![];
            let mut nodes = 64usize;
            while nodes <= config.max_dense {
                let grid = Grid::new(0.0, h, nodes)?;
                let span = grid.end();
                let section = finite_section(t, &grid, (0.0, span), (0.0, span))?;
                trend.push((span, dense_largest_singular_value(&section.matrix)));
                if stop_early(&trend, config) {
                    break;
                }
                nodes *= 2;
            }
            finish_ladder(trend, config, false)
        }
    }
}

fn stop_early(trend: &[(f64, f64)], config: &NormConfig) -> bool {
    let n = trend.len();
    n >= 2 && (trend[n - 1].1 - trend[n - 2].1).abs() <= config.rel_tol * trend[n - 1].1.abs().max(1e-300)
}

/// Random smooth probes: sums of modulated Gaussian bumps.
pub fn random_probes(grid: &Grid, count: usize, seed: u64) -> Result<Vec<SampledFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = grid.span();
    let margin = 0.1 * span;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let terms: Vec<(f64, f64, f64, C64)> = (0..3)
            .map(|_| {
                let width = rng.random_range(0.02 * span..0.1 * span);
                let centre = rng.random_range(margin + 3.0 * width..(span - margin - 3.0 * width).max(margin + 3.0 * width + 1e-9));
                let freq = rng.random_range(-3.0..3.0);
                let amp = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (centre, width, freq, amp)
            })
            .collect();
        let f = SampledFunction::from_fn(*grid, |x| {
            terms
                .iter()
                .map(|&(c, w, k, a)| {
                    let window = profiles::bump((x - c + 3.0 * w) / (6.0 * w));
                    a * window * C64::from_polar(1.0, k * x)
                })
                .sum()
        })?;
        out.push(f);
    }
    Ok(out)
}

fn probe_norm(t: &WienerHopfOperator, config: &NormConfig) -> Result<NormEstimate> {
    let h = match &t.kind {
        OperatorKind::Kernel(phi) => phi.grid().step(),
        OperatorKind::Shift(a) if *a != 0.0 => a.abs() / (a.abs() / config.norm_step).ceil(),
        _ => config.black_box_step,
    };
    let span = config.min_window;
    let grid = Grid::new(0.0, h, (span / h).round() as usize + 1)?;
    let mut best = 0.0f64;
    for f in random_probes(&grid, config.probes, config.seed)? {
        let nf = t.space.norm(&f)?;
        if nf == 0.0 {
            continue;
        }
        let tf = match apply_wh(t, &f) {
            Ok(g) => g,
            Err(WhError::Support { .. }) => continue,
            Err(e) => return Err(e),
        };
        best = best.max(t.space.norm(&tf)? / nf);
    }
    Ok(NormEstimate {
        value: best,
        lower_bound: true,
        trend: vec![(span, best)],
        converged: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `S = S_1`
    Forward,
    /// `S_{-1}`
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralRadius {
    pub estimate: f64,
    /// `inf_n ‖S_{±n}‖^{1/n}` over the probed `n`.
    pub upper_bound: f64,
    /// `(n, ln‖S_{±n}‖ / n)`
    pub samples: Vec<(f64, f64)>,
}

/// Gelfand estimate of `ρ(S)` or `ρ(S_{-1})` from `‖S_{±n}‖`, `n = 1, 2, 4, …, 64`.
pub fn spectral_radius(w: &Weight, _p: f64, direction: Direction) -> SpectralRadius {
    spectral_radius_to(w, direction, 64)
}

pub fn spectral_radius_to(w: &Weight, direction: Direction, n_max: u32) -> SpectralRadius {
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let mut samples = vec![];
    let mut n = 1u32;
    while n <= n_max {
        let nf = n as f64;
        samples.push((nf, log_translation_norm(w, sign * nf) / nf));
        n *= 2;
    }
    let log_upper = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let k = samples.len();
    let log_est = if k >= 2 {
        2.0 * samples[k - 1].1 - samples[k - 2].1
    } else {
        samples[0].1
    };
    SpectralRadius {
        estimate: log_est.min(log_upper).exp(),
        upper_bound: log_upper.exp(),
        samples,
    }
}

/// Positive mollifier supported in `[0, 1/n]` with discrete unit mass on a
/// grid of step `h`. Falls back to a discrete delta at 0 when `(0, 1/n)`
/// contains no node.
pub fn mollifier(n: usize, h: f64) -> Result<SampledFunction> {
    if n == 0 {
        return Err(WhError::InvalidInput("mollifier scale must be positive".into()));
    }
    let width = 1.0 / n as f64;
    let inner = ((width / h) - 1e-9).ceil() as usize; // nodes 1..inner are < width
    let count = (inner + 1).max(2);
    let grid = Grid::new(0.0, h, count)?;
    let mut values: Vec<C64> = grid
        .points()
        .map(|x| C64::new(profiles::bump(x / width), 0.0))
        .collect();
    let mass: f64 = values.iter().map(|v| v.re).sum::<f64>() * h;
    if mass == 0.0 {
        values.iter_mut().for_each(|v| *v = ZERO);
        values[0] = C64::new(1.0 / h, 0.0);
    } else {
        values.iter_mut().for_each(|v| *v /= mass);
    }
    SampledFunction::new(grid, values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryConfig {
    /// Kernel window `[t_min, t_max]` to recover.
    pub window: (f64, f64),
    /// Distance between the two probe positions of the stationarity check.
    pub second_probe_offset: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct KernelRecovery {
    pub kernel: SampledFunction,
    pub mollifier: SampledFunction,
    pub probe_positions: (f64, f64),
    /// Max difference between the two probes' kernels, relative to the kernel's peak.
    pub mismatch: f64,
    /// False means the operator does not look translation invariant.
    pub stationary: bool,
}

/// Recovers `φ_n = μ_T ∗ θ_n` from a black box acting on `grid`.
///
/// By translation invariance, `(T S_{x₀} θ_n)(x₀ + t) = (μ_T ∗ θ_n)(t)`
/// whenever `x₀ + t_min ≥ 0`, so a single probe at `x₀` already sits in
/// the stationary regime. A second probe at `x₀ + offset` checks it.
pub fn recover_kernel(
    t: &WienerHopfOperator,
    grid: &Grid,
    n: usize,
    x0: f64,
    config: &RecoveryConfig,
) -> Result<KernelRecovery> {
    let theta = mollifier(n, grid.step())?;
    let first = probe_kernel(t, grid, &theta, x0, config.window)?;
    let x1 = x0 + config.second_probe_offset;
    let second = probe_kernel(t, grid, &theta, x1, config.window)?;
    let peak = first.max_abs().max(1e-300);
    let mismatch = first
        .values()
        .iter()
        .zip(second.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / peak;
    Ok(KernelRecovery {
        kernel: first,
        mollifier: theta,
        probe_positions: (x0, x1),
        mismatch,
        stationary: mismatch <= config.tolerance,
    })
}

fn probe_kernel(
    t: &WienerHopfOperator,
    grid: &Grid,
    theta: &SampledFunction,
    x0: f64,
    window: (f64, f64),
) -> Result<SampledFunction> {
    let h = grid.step();
    let k0 = grid
        .index_of(x0)
        .ok_or_else(|| WhError::Probe(format!("probe position {x0} is not a node of the grid")))?;
    let (t_min, t_max) = window;
    let lo = grid.steps_in(t_min).ok_or(WhError::Alignment { shift: t_min, step: h })?;
    let hi = grid.steps_in(t_max).ok_or(WhError::Alignment { shift: t_max, step: h })?;
    if hi <= lo {
        return Err(WhError::EmptyWindow { start: t_min, end: t_max });
    }
    let last_probe = k0 + theta.len() - 1;
    if k0 as isize + lo < 0 || (k0 as isize + hi) as usize >= grid.count() || last_probe >= grid.count() {
        return Err(WhError::Probe(format!(
            "probe at x0 = {x0} with window [{t_min}, {t_max}] does not fit in [0, {}]",
            grid.end()
        )));
    }
    let mut values = vec![ZERO; grid.count()];
    values[k0..=last_probe].copy_from_slice(theta.values());
    let out = apply_wh(t, &SampledFunction::new(*grid, values)?)?;
    let start = (k0 as isize + lo) as usize;
    let count = (hi - lo) as usize + 1;
    SampledFunction::new(Grid::new(t_min, h, count)?, out.values()[start..start + count].to_vec())
}

/// `γ_n(x) = (1 - cos nx) / (π n x²)`.
pub fn fejer_kernel_value(n: f64, x: f64) -> f64 {
    let u = n * x;
    if u.abs() < 1e-3 {
        // (1 - cos u)/u² = 1/2 - u²/24 + …
        n / PI * (0.5 - u * u / 24.0)
    } else {
        (1.0 - u.cos()) / (PI * n * x * x)
    }
}

pub fn fejer_kernel(n: f64, grid: &Grid) -> Result<SampledFunction> {
    SampledFunction::from_real_fn(*grid, |x| fejer_kernel_value(n, x))
}

/// `g_n(η) = (1 - |η|/n)₊`, the transform of `γ_n`.
pub fn fejer_multiplier(n: f64, eta: f64) -> f64 {
    (1.0 - eta.abs() / n).max(0.0)
}

/// `∫ γ_n` by composite Simpson on `[-X, X]` plus the analytic tail
/// `2/(π n X)`, with `nX = 4000π`.
pub fn fejer_mass(n: f64) -> f64 {
    let x_max = 4000.0 * PI / n;
    let panels = 64_000usize; // 16 per oscillation period
    let h = x_max / panels as f64;
    let mut acc = fejer_kernel_value(n, 0.0) + fejer_kernel_value(n, x_max);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * fejer_kernel_value(n, k as f64 * h);
    }
    2.0 * acc * h / 3.0 + 2.0 / (PI * n * x_max)
}

/// `T_{φ ∗ γ_n}`: the kernel operator whose level-0 symbol is `g_n·φ̂`.
///
/// The smoothed kernel is formed spectrally on a grid extending `reach` past
/// both ends of `φ`'s support, which is as far as it can matter for
/// functions on `[0, reach]`.
pub fn fejer_approximant(t: &WienerHopfOperator, n: f64, reach: f64) -> Result<WienerHopfOperator> {
    let phi = match &t.kind {
        OperatorKind::Kernel(phi) => phi.clone(),
        OperatorKind::Shift(a) => {
            let h = reach / 1000.0;
            let grid = Grid::new(*a, h, 2)?;
            SampledFunction::new(grid, vec![C64::new(1.0 / h, 0.0), ZERO])?
        }
        OperatorKind::BlackBox { .. } => {
            return Err(WhError::InvalidInput(
                "Fejér approximants need a kernel; recover one from the black box first".into(),
            ))
        }
    };
    let padded = padded_kernel(&phi, reach)?;
    let spectrum = forward_transform_len(&padded, padded.len())?;
    let smoothed = spectrum.map(|xi, v| v * fejer_multiplier(n, xi))?;
    let psi = inverse_transform(&smoothed)?;
    Ok(WienerHopfOperator::kernel(psi, t.space.clone()))
}

/// `(n, ‖Y_n f − T f‖ / ‖T f‖)` for the Fejér approximants `Y_n`, measured
/// on `f`'s grid in `T`'s space. `f` is zero-extended so that neither
/// convolution leaves its grid.
pub fn fejer_ladder(t: &WienerHopfOperator, f: &SampledFunction, ns: &[f64], reach: f64) -> Result<Vec<(f64, f64)>> {
    let h = f.grid().step();
    let mut approximants = Vec::with_capacity(ns.len());
    let mut right = 0.0f64;
    for &n in ns {
        let y = fejer_approximant(t, n, reach)?;
        if let OperatorKind::Kernel(psi) = &y.kind {
            right = right.max(psi.grid().end());
        }
        approximants.push((n, y));
    }
    if let OperatorKind::Kernel(phi) = &t.kind {
        right = right.max(phi.grid().end());
    }
    let extended = f.truncated(f.len() + (right.max(0.0) / h).ceil() as usize + 2)?;
    let restrict = |g: SampledFunction| g.truncated(f.len());
    let tf = restrict(apply_wh(t, &extended)?)?;
    let scale = t.space.norm(&tf)?;
    approximants
        .iter()
        .map(|(n, y)| {
            let yf = restrict(apply_wh(y, &extended)?)?;
            Ok((*n, t.space.norm(&yf.sub(&tf)?)? / scale))
        })
        .collect()
}

/// `φ` placed on an aligned grid with `reach` of zero padding on both sides
/// and an FFT-friendly length.
pub fn padded_kernel(phi: &SampledFunction, reach: f64) -> Result<SampledFunction> {
    let h = phi.grid().step();
    let pad = (reach / h).ceil() as usize;
    let count = fft_friendly(phi.len() + 2 * pad);
    let grid = Grid::new(phi.grid().origin() - pad as f64 * h, h, count)?;
    phi.transplant(grid)
}

/// Unit-mass normal density `N(centre, width²)` truncated where it drops below 1e-22 of its peak.
pub fn gaussian_kernel(centre: f64, width: f64, h: f64) -> Result<SampledFunction> {
    if !(width > 0.0) {
        return Err(WhError::InvalidInput(format!("gaussian width {width} must be positive")));
    }
    let reach = 10.0 * width;
    let norm = 1.0 / (width * (2.0 * PI).sqrt());
    aligned_kernel(centre - reach, centre + reach, h, |x| {
        norm * (-(x - centre).powi(2) / (2.0 * width * width)).exp()
    })
}

/// C^∞ bump on `[centre - radius, centre + radius]` with discrete unit mass.
pub fn bump_kernel(centre: f64, radius: f64, h: f64) -> Result<SampledFunction> {
    if !(radius > 0.0) {
        return Err(WhError::InvalidInput(format!("bump radius {radius} must be positive")));
    }
    let raw = aligned_kernel(centre - radius, centre + radius, h, |x| {
        profiles::bump((x - centre + radius) / (2.0 * radius))
    })?;
    let mass: f64 = raw.values().iter().map(|v| v.re).sum::<f64>() * h;
    if mass == 0.0 {
        return delta_kernel(centre, h);
    }
    raw.scaled(C64::new(1.0 / mass, 0.0))
}

/// Bump of total width `width` centred at `at`; a discrete delta when the
/// width does not reach past the neighbouring nodes.
pub fn mollified_delta(at: f64, width: f64, h: f64) -> Result<SampledFunction> {
    bump_kernel(at, width / 2.0, h)
}

/// Discrete delta at the node `at`.
pub fn delta_kernel(at: f64, h: f64) -> Result<SampledFunction> {
    let k = (at / h).round();
    if ((at / h) - k).abs() > 1e-7 {
        return Err(WhError::Alignment { shift: at, step: h });
    }
    let grid = Grid::new((k - 1.0) * h, h, 3)?;
    SampledFunction::new(grid, vec![ZERO, C64::new(1.0 / h, 0.0), ZERO])
}

/// Samples `f` on the nodes `k·h` covering `[lo, hi]`, with one zero node
/// added on each side.
fn aligned_kernel(lo: f64, hi: f64, h: f64, f: impl Fn(f64) -> f64) -> Result<SampledFunction> {
    let k0 = (lo / h).floor() - 1.0;
    let k1 = (hi / h).ceil() + 1.0;
    let count = (k1 - k0) as usize + 1;
    let grid = Grid::new(k0 * h, h, count)?;
    let mut values: Vec<C64> = grid
        .points()
        .map(|x| if x < lo || x > hi { ZERO } else { C64::new(f(x), 0.0) })
        .collect();
    values[0] = ZERO;
    values[count - 1] = ZERO;
    SampledFunction::new(grid, values)
}
