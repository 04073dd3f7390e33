//! Symbols `ν_a(ξ) = φ̂(ξ + ia)` of Wiener–Hopf operators on the strip, and the
//! checks that tie them to the operator: representation residuals, the
//! strip sup-bound and analyticity across levels.

use serde::Serialize;

use crate::error::{Result, WhError};
use crate::gridfn::{fft_friendly, forward_transform_len, inverse_transform_at, strip_eval, twist, FrequencyFunction, Grid, SampledFunction, C64};
use crate::operators::{apply_wh, recover_kernel, spectral_radius, Direction, KernelRecovery, OperatorKind, RecoveryConfig, WienerHopfOperator};
use crate::spaces::Weight;

const LEVEL_TOL: f64 = 1e-9;

/// The strip `[a_min, a_max] = [-ln ρ(S_{-1}), ln ρ(S)]` and the levels sampled in it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub levels: Vec<f64>,
}

impl StripSpec {
    /// `count` equally spaced levels including both endpoints (a single
    /// level when the strip is degenerate).
    pub fn new(a_min: f64, a_max: f64, count: usize) -> Result<Self> {
        if !(a_min.is_finite() && a_max.is_finite()) || a_min > a_max + LEVEL_TOL {
            return Err(WhError::InvalidInput(format!("strip [{a_min}, {a_max}] is not an interval")));
        }
        let levels = if (a_max - a_min).abs() <= LEVEL_TOL || count <= 1 {
            vec![0.5 * (a_min + a_max)]
        } else {
            (0..count)
                .map(|k| a_min + (a_max - a_min) * k as f64 / (count - 1) as f64)
                .collect()
        };
        Ok(Self { a_min, a_max, levels })
    }

    /// The strip of `L^p_ω` from the spectral radii of the two translations.
    /// Endpoints are rounded to 1e-9 so that closed-form radii give exact levels.
    pub fn from_weight(w: &Weight, p: f64, count: usize) -> Result<Self> {
        let forward = spectral_radius(w, p, Direction::Forward).estimate;
        let backward = spectral_radius(w, p, Direction::Backward).estimate;
        let round = |x: f64| (x * 1e9).round() / 1e9;
        Self::new(round(-backward.ln()), round(forward.ln()), count)
    }

    pub fn is_degenerate(&self) -> bool {
        (self.a_max - self.a_min).abs() <= LEVEL_TOL
    }

    pub fn contains(&self, a: f64) -> bool {
        a >= self.a_min - LEVEL_TOL && a <= self.a_max + LEVEL_TOL
    }

    pub fn check(&self, a: f64) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(WhError::Strip {
                a,
                a_min: self.a_min,
                a_max: self.a_max,
            })
        }
    }
}

/// `ν_a = F((φ)_a)` computed with `len` frequency nodes.
pub fn kernel_symbol(phi: &SampledFunction, a: f64, len: usize) -> Result<FrequencyFunction> {
    forward_transform_len(&twist(phi, a)?, len)
}

/// `ν_a(ξ) = φ̂(ξ + ia)` for `a` in the strip.
pub fn symbol_of_kernel(phi: &SampledFunction, a: f64, strip: &StripSpec) -> Result<FrequencyFunction> {
    strip.check(a)?;
    kernel_symbol(phi, a, fft_friendly(phi.len()))
}

/// `e^{sa - isξ}`, the level-`a` symbol of `S_s`, on `len` nodes of step `h`.
pub fn shift_symbol(s: f64, a: f64, h: f64, len: usize) -> Result<FrequencyFunction> {
    let spatial = Grid::new(0.0, h, len)?;
    FrequencyFunction::from_fn(spatial, |xi| C64::new(s * a, -s * xi).exp())
}

/// Number of frequency nodes needed to apply a symbol to functions on
/// `probe_grid` without wrap-around.
fn symbol_len(t: &WienerHopfOperator, probe_grid: &Grid) -> Result<usize> {
    let extra = match &t.kind {
        OperatorKind::Kernel(phi) => phi.len(),
        OperatorKind::Shift(s) => probe_grid
            .steps_in(*s)
            .ok_or(WhError::Alignment {
                shift: *s,
                step: probe_grid.step(),
            })?
            .unsigned_abs()
            + 1,
        OperatorKind::BlackBox { .. } => {
            return Err(WhError::InvalidInput(
                "black-box symbols come from extract_symbol".into(),
            ))
        }
    };
    Ok(fft_friendly(probe_grid.count() + extra))
}

/// Level-`a` symbol of a kernel or shift operator, sized for `probe_grid`.
pub fn operator_symbol(t: &WienerHopfOperator, a: f64, strip: &StripSpec, probe_grid: &Grid) -> Result<FrequencyFunction> {
    strip.check(a)?;
    let len = symbol_len(t, probe_grid)?;
    match &t.kind {
        OperatorKind::Kernel(phi) => kernel_symbol(phi, a, len),
        OperatorKind::Shift(s) => shift_symbol(*s, a, probe_grid.step(), len),
        OperatorKind::BlackBox { .. } => unreachable!("rejected by symbol_len"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub a: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `P⁺F⁻¹(ν·F((f)_a))` on `f`'s grid.
pub fn apply_symbol(nu: &FrequencyFunction, f: &SampledFunction, a: f64) -> Result<SampledFunction> {
    let grid = *f.grid();
    let m = nu.len();
    if (nu.spatial().step() - grid.step()).abs() > 1e-12 * grid.step() {
        return Err(WhError::InvalidInput("symbol and probe use different grid steps".into()));
    }
    if m < f.len() {
        return Err(WhError::InvalidInput(format!(
            "symbol has {m} nodes, fewer than the {} probe samples",
            f.len()
        )));
    }
    let fa = forward_transform_len(&twist(f, a)?, m)?;
    let product: Vec<C64> = nu.values().iter().zip(fa.values()).map(|(x, y)| x * y).collect();
    let origin = nu.spatial().origin() + grid.origin();
    let spectrum = FrequencyFunction::new(nu.spatial().with_origin(origin)?, product)?;
    let full = inverse_transform_at(&spectrum, origin)?;
    let off = grid
        .steps_in(origin - grid.origin())
        .ok_or(WhError::Alignment {
            shift: origin,
            step: grid.step(),
        })?;
    let values = (0..grid.count())
        .map(|i| {
            let j = i as isize - off;
            if j >= 0 && (j as usize) < m {
                full.values()[j as usize]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    SampledFunction::new(grid, values)
}

fn discrete_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Residual `‖(Tf)_a - P⁺F⁻¹(ν_a·(f)_a^)‖₂ / ‖(Tf)_a‖₂` per probe.
///
/// `ν_a` must have at least `N_f + N_φ` nodes (see [`operator_symbol`]) so
/// that the discrete product is a linear, not circular, convolution.
pub fn verify_representation(
    t: &WienerHopfOperator,
    nu: &FrequencyFunction,
    a: f64,
    probes: &[SampledFunction],
    tolerance: f64,
) -> Result<RepresentationReport> {
    let mut residuals = Vec::with_capacity(probes.len());
    for (k, f) in probes.iter().enumerate() {
        let n = f.len();
        if f.values()[0] != C64::new(0.0, 0.0) || f.values()[n - 1] != C64::new(0.0, 0.0) {
            return Err(WhError::Probe(format!("probe {k} touches the end of its grid")));
        }
        let lhs = twist(&apply_wh(t, f)?, a)?;
        let rhs = apply_symbol(nu, f, a)?;
        let diff: Vec<C64> = lhs.values().iter().zip(rhs.values()).map(|(x, y)| x - y).collect();
        let scale = discrete_norm(lhs.values());
        let d = discrete_norm(&diff);
        residuals.push(if scale > 0.0 { d / scale } else { d });
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(RepresentationReport {
        a,
        residuals,
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractConfig {
    pub grid: Grid,
    /// Mollifier scale `n` (support `[0, 1/n]`).
    pub scale: usize,
    pub probe_position: f64,
    pub recovery: RecoveryConfig,
    /// Frequencies with `|θ̂_n(ξ + ia)|` below this are discarded.
    pub cutoff: f64,
    /// Number of frequency nodes; defaults to kernel window plus grid length.
    pub len: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExtractedSymbol {
    /// `ν_a` on the validity window, zero elsewhere.
    pub symbol: FrequencyFunction,
    /// Node range `[lo, hi]` where `|θ̂_n| ≥ cutoff`.
    pub window: (usize, usize),
    pub xi_range: (f64, f64),
    pub recovery: KernelRecovery,
}

impl ExtractedSymbol {
    pub fn in_window(&self, k: usize) -> bool {
        k >= self.window.0 && k <= self.window.1
    }
}

/// Symbol of a black box through its mollified kernel: recover `φ_n`,
/// transform at level `a`, divide out `θ̂_n(ξ + ia)` where it is not small.
pub fn extract_symbol(t: &WienerHopfOperator, a: f64, config: &ExtractConfig) -> Result<ExtractedSymbol> {
    let recovery = recover_kernel(t, &config.grid, config.scale, config.probe_position, &config.recovery)?;
    let len = config
        .len
        .unwrap_or_else(|| fft_friendly(recovery.kernel.len() + config.grid.count()));
    let raw = kernel_symbol(&recovery.kernel, a, len)?;
    let theta_hat = kernel_symbol(&recovery.mollifier, a, len)?;
    let centre = len / 2;
    if theta_hat.values()[centre].norm() < config.cutoff {
        return Err(WhError::Scale { n: config.scale });
    }
    let ok = |k: usize| theta_hat.values()[k].norm() >= config.cutoff;
    let mut lo = centre;
    while lo > 0 && ok(lo - 1) {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < len && ok(hi + 1) {
        hi += 1;
    }
    let values = (0..len)
        .map(|k| {
            if k >= lo && k <= hi {
                raw.values()[k] / theta_hat.values()[k]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let symbol = FrequencyFunction::new(*raw.spatial(), values)?;
    Ok(ExtractedSymbol {
        xi_range: (symbol.frequency(lo), symbol.frequency(hi)),
        symbol,
        window: (lo, hi),
        recovery,
    })
}

/// Where the stored levels came from; used to recompute them independently.
#[derive(Clone, Debug)]
pub enum SymbolSource {
    Kernel(SampledFunction),
    Shift(f64),
    Other,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolLevel {
    pub a: f64,
    #[serde(skip)]
    pub symbol: FrequencyFunction,
    pub sup: f64,
    /// `‖ν_a‖∞ / ‖T‖` when the operator norm is known.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub strip: StripSpec,
    pub levels: Vec<SymbolLevel>,
    pub operator: String,
    pub operator_norm: Option<f64>,
    pub source: SymbolSource,
}

/// JSON view of a table: levels, frequency grid and `[re, im]` pairs.
#[derive(Serialize)]
pub struct SymbolTableJson {
    pub operator: String,
    pub strip: StripSpec,
    pub operator_norm: Option<f64>,
    pub frequency_grid: Grid,
    /// Inclusive node range exported.
    pub nodes: (usize, usize),
    pub levels: Vec<LevelJson>,
}

#[derive(Serialize)]
pub struct LevelJson {
    pub a: f64,
    pub sup: f64,
    pub ratio: Option<f64>,
    pub values: Vec<[f64; 2]>,
}

impl SymbolTable {
    /// Symbols of a kernel or shift operator at every level of `strip`.
    pub fn build(
        t: &WienerHopfOperator,
        strip: &StripSpec,
        probe_grid: &Grid,
        operator_norm: Option<f64>,
    ) -> Result<Self> {
        let levels = strip
            .levels
            .iter()
            .map(|&a| {
                let symbol = operator_symbol(t, a, strip, probe_grid)?;
                let sup = symbol.sup_norm();
                Ok(SymbolLevel {
                    a,
                    sup,
                    ratio: operator_norm.map(|n| sup / n),
                    symbol,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let source = match &t.kind {
            OperatorKind::Kernel(phi) => SymbolSource::Kernel(phi.clone()),
            OperatorKind::Shift(s) => SymbolSource::Shift(*s),
            OperatorKind::BlackBox { .. } => SymbolSource::Other,
        };
        Ok(Self {
            strip: strip.clone(),
            levels,
            operator: t.name(),
            operator_norm,
            source,
        })
    }

    /// Assemble from precomputed levels (all on the same frequency grid).
    pub fn from_levels(
        strip: StripSpec,
        levels: Vec<(f64, FrequencyFunction)>,
        operator: impl Into<String>,
        operator_norm: Option<f64>,
        source: SymbolSource,
    ) -> Result<Self> {
        if let Some((_, first)) = levels.first() {
            if levels.iter().any(|(_, s)| !s.same_nodes(first)) {
                return Err(WhError::InvalidInput("levels use different frequency grids".into()));
            }
        }
        let mut levels: Vec<SymbolLevel> = levels
            .into_iter()
            .map(|(a, symbol)| {
                let sup = symbol.sup_norm();
                SymbolLevel {
                    a,
                    sup,
                    ratio: operator_norm.map(|n| sup / n),
                    symbol,
                }
            })
            .collect();
        levels.sort_by(|x, y| x.a.total_cmp(&y.a));
        Ok(Self {
            strip,
            levels,
            operator: operator.into(),
            operator_norm,
            source,
        })
    }

    pub fn frequency_grid(&self) -> Option<&Grid> {
        self.levels.first().map(|l| l.symbol.grid())
    }

    /// Every level replaced by its complex conjugate: a table that is
    /// anti-analytic across levels.
    pub fn conjugated(&self) -> Result<Self> {
        let mut out = self.clone();
        for level in &mut out.levels {
            level.symbol = level.symbol.map(|_, v| v.conj())?;
        }
        Ok(out)
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.levels.iter().filter_map(|l| l.ratio).reduce(f64::max)
    }

    fn node_range(&self, band: Option<f64>) -> (usize, usize) {
        let Some(grid) = self.frequency_grid() else {
            return (0, 0);
        };
        match band {
            None => (0, grid.count() - 1),
            Some(b) => {
                let lo = grid.points().position(|xi| xi >= -b).unwrap_or(0);
                let hi = (0..grid.count()).rev().find(|&k| grid.point(k) <= b).unwrap_or(grid.count() - 1);
                (lo, hi.max(lo))
            }
        }
    }

    /// JSON view restricted to `|ξ| ≤ band` (all nodes when `None`).
    pub fn to_json(&self, band: Option<f64>) -> SymbolTableJson {
        let (lo, hi) = self.node_range(band);
        SymbolTableJson {
            operator: self.operator.clone(),
            strip: self.strip.clone(),
            operator_norm: self.operator_norm,
            frequency_grid: self.frequency_grid().copied().unwrap_or(Grid::new(0.0, 1.0, 2).unwrap()),
            nodes: (lo, hi),
            levels: self
                .levels
                .iter()
                .map(|l| LevelJson {
                    a: l.a,
                    sup: l.sup,
                    ratio: l.ratio,
                    values: l.symbol.values()[lo..=hi].iter().map(|v| [v.re, v.im]).collect(),
                })
                .collect(),
        }
    }

    /// `(ξ, re ν, im ν)` rows of one level.
    pub fn level_rows(&self, level: usize, band: Option<f64>) -> Vec<[f64; 3]> {
        let (lo, hi) = self.node_range(band);
        let s = &self.levels[level].symbol;
        (lo..=hi).map(|k| [s.frequency(k), s.values()[k].re, s.values()[k].im]).collect()
    }

    /// `(ξ, |ν|, arg ν)` rows of one level.
    pub fn plot_rows(&self, level: usize, band: Option<f64>) -> Vec<[f64; 3]> {
        let (lo, hi) = self.node_range(band);
        let s = &self.levels[level].symbol;
        (lo..=hi).map(|k| [s.frequency(k), s.values()[k].norm(), s.values()[k].arg()]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub levels: usize,
    pub frequencies: usize,
    pub xi_max: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            levels: 21,
            frequencies: 81,
            xi_max: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripBoundReport {
    pub max_symbol: f64,
    pub argmax: [f64; 2],
    pub operator_norm: f64,
    pub ratio: f64,
    pub points: usize,
    pub pass: bool,
}

/// `max |φ̂(α)|` over a lattice in the strip, against `‖T_φ‖·(1 + 1e-3)`.
pub fn verify_strip_bound(
    phi: &SampledFunction,
    strip: &StripSpec,
    operator_norm: f64,
    lattice: &LatticeSpec,
) -> Result<StripBoundReport> {
    let levels: Vec<f64> = if strip.is_degenerate() || lattice.levels <= 1 {
        vec![strip.levels[0]]
    } else {
        (0..lattice.levels)
            .map(|k| strip.a_min + (strip.a_max - strip.a_min) * k as f64 / (lattice.levels - 1) as f64)
            .collect()
    };
    let xis: Vec<f64> = if lattice.frequencies <= 1 {
        vec![0.0]
    } else {
        (0..lattice.frequencies)
            .map(|k| -lattice.xi_max + 2.0 * lattice.xi_max * k as f64 / (lattice.frequencies - 1) as f64)
            .collect()
    };
    let mut best = (0.0, [0.0, 0.0]);
    for &a in &levels {
        for &xi in &xis {
            let v = strip_eval(phi, C64::new(xi, a))?.norm();
            if v > best.0 {
                best = (v, [xi, a]);
            }
        }
    }
    let ratio = if operator_norm > 0.0 { best.0 / operator_norm } else if best.0 == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(StripBoundReport {
        max_symbol: best.0,
        argmax: best.1,
        operator_norm,
        ratio,
        points: levels.len() * xis.len(),
        pass: best.0 <= operator_norm * (1.0 + 1e-3),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticityConfig {
    pub cross_level_tolerance: f64,
    pub cauchy_riemann_tolerance: f64,
    /// Number of frequency nodes sampled by the cross-level check.
    pub cross_level_nodes: usize,
}

impl Default for AnalyticityConfig {
    fn default() -> Self {
        Self {
            cross_level_tolerance: 1e-6,
            cauchy_riemann_tolerance: 1e-4,
            cross_level_nodes: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticityReport {
    /// Set when the checks were not run, with the reason.
    pub skipped: Option<String>,
    /// `None` when the table has no independent source to recompute from.
    pub cross_level_residual: Option<f64>,
    pub cauchy_riemann_residual: Option<f64>,
    pub max_sup: f64,
    pub max_ratio: Option<f64>,
    pub pass: bool,
}

/// Interior consistency of the level stack: recomputation at interior
/// levels and the discrete Cauchy–Riemann equation `∂_a ν = i ∂_ξ ν`, both
/// relative to `max_a ‖ν_a‖∞`.
pub fn verify_analyticity(table: &SymbolTable, config: &AnalyticityConfig) -> Result<AnalyticityReport> {
    let max_sup = table.levels.iter().map(|l| l.sup).fold(0.0, f64::max);
    let skip = |reason: &str| AnalyticityReport {
        skipped: Some(reason.into()),
        cross_level_residual: None,
        cauchy_riemann_residual: None,
        max_sup,
        max_ratio: table.max_ratio(),
        pass: true,
    };
    if table.strip.is_degenerate() {
        return Ok(skip("degenerate strip: the open strip is empty, analyticity does not apply"));
    }
    let nl = table.levels.len();
    if nl < 3 {
        return Ok(skip("fewer than three levels"));
    }
    let da = table.levels[1].a - table.levels[0].a;
    if table
        .levels
        .windows(2)
        .any(|w| ((w[1].a - w[0].a) - da).abs() > 1e-9 * da.abs().max(1.0))
    {
        return Err(WhError::InvalidInput("analyticity check needs equally spaced levels".into()));
    }
    let scale = max_sup.max(1e-300);
    let grid = *table.levels[0].symbol.grid();
    let n = grid.count();

    // Cross-level recomputation on a spread of nodes near the centre.
    let cross = match &table.source {
        SymbolSource::Other => None,
        source => {
            let centre = n / 2;
            let half = (n / 4).max(1);
            let stride = ((2 * half) / config.cross_level_nodes.max(1)).max(1);
            let mut worst = 0.0f64;
            for level in &table.levels[1..nl - 1] {
                for k in (centre - half.min(centre)..(centre + half).min(n)).step_by(stride) {
                    let xi = grid.point(k);
                    let z = C64::new(xi, level.a);
                    let exact = match source {
                        SymbolSource::Kernel(phi) => strip_eval(phi, z)?,
                        SymbolSource::Shift(s) => (C64::new(0.0, -1.0) * z * *s).exp(),
                        SymbolSource::Other => unreachable!(),
                    };
                    worst = worst.max((exact - level.symbol.values()[k]).norm() / scale);
                }
            }
            Some(worst)
        }
    };

    // Cauchy–Riemann residual: central differences across levels, exact
    // differentiation of the trigonometric interpolant along ξ.
    let stencil: &[f64] = match nl {
        0..=4 => &[0.0, 0.5],
        5..=6 => &[0.0, 8.0 / 12.0, -1.0 / 12.0],
        _ => &[0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0],
    };
    let reach = stencil.len() - 1;
    let i = C64::new(0.0, 1.0);
    let mut cr = 0.0f64;
    for l in reach..nl - reach {
        let level = &table.levels[l].symbol;
        let d_xi = xi_derivative(level)?;
        for k in 0..n {
            let mut d_a = C64::new(0.0, 0.0);
            for (r, c) in stencil.iter().enumerate().skip(1) {
                d_a += (table.levels[l + r].symbol.values()[k] - table.levels[l - r].symbol.values()[k]) * *c;
            }
            d_a /= da;
            cr = cr.max((d_a - i * d_xi.values()[k]).norm() / scale);
        }
    }
    let pass = cross.is_none_or(|c| c <= config.cross_level_tolerance) && cr <= config.cauchy_riemann_tolerance;
    Ok(AnalyticityReport {
        skipped: None,
        cross_level_residual: cross,
        cauchy_riemann_residual: Some(cr),
        max_sup,
        max_ratio: table.max_ratio(),
        pass,
    })
}

/// `∂_ξ ν` of a sampled symbol: back to space, multiply by `-ix`, forward again.
fn xi_derivative(nu: &FrequencyFunction) -> Result<FrequencyFunction> {
    let origin = nu.spatial().origin();
    let g = inverse_transform_at(nu, origin)?;
    let weighted = g.map(|x, v| C64::new(0.0, -x) * v)?;
    forward_transform_len(&weighted, nu.len())
}
