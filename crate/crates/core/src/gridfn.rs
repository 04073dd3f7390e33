//! Uniform grids, sampled complex functions and the Fourier machinery used
//! throughout the crate.
//!
//! The transform convention is `f̂(ξ) = ∫ f(x) e^{-iξx} dx`. With this choice
//! the translation `S_1` has level-`a` symbol `e^{a - iξ}`, and the twisted
//! transform of a kernel is its continuation into the complex strip:
//! `F(e^{a·}φ)(ξ) = φ̂(ξ + ia)`.
//!
//! Integrals are trapezoidal sums on the uniform grid. All functions handled
//! here are compactly supported inside their grid, in which case the
//! trapezoid rule and the plain Riemann sum computed by the FFT coincide.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WhError};

pub type C64 = Complex64;

/// Largest exponent accepted before `exp` is considered to overflow.
pub(crate) const EXP_LIMIT: f64 = 709.0;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(len)
        } else {
            p.plan_fft_inverse(len)
        }
    })
}

/// Smallest integer `>= n` whose prime factors are all in {2, 3, 5, 7}.
pub fn fft_friendly(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// A uniform grid `origin + k·step`, `k = 0..count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    origin: f64,
    step: f64,
    count: usize,
}

impl Grid {
    pub fn new(origin: f64, step: f64, count: usize) -> Result<Self> {
        if !origin.is_finite() {
            return Err(WhError::InvalidGrid(format!("origin {origin} is not finite")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(WhError::InvalidGrid(format!("step {step} must be positive")));
        }
        if count < 2 {
            return Err(WhError::InvalidGrid(format!("count {count} must be at least 2")));
        }
        Ok(Self { origin, step, count })
    }

    /// Grid starting at `origin` covering at least `span`, with the sample
    /// count rounded up to an FFT-friendly length.
    pub fn covering(origin: f64, span: f64, step: f64) -> Result<Self> {
        if !(span.is_finite() && span > 0.0) {
            return Err(WhError::InvalidGrid(format!("span {span} must be positive")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(WhError::InvalidGrid(format!("step {step} must be positive")));
        }
        let requested = (span / step - 1e-9).ceil() as usize + 1;
        Self::new(origin, step, fft_friendly(requested))
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn span(&self) -> f64 {
        self.step * (self.count - 1) as f64
    }

    pub fn end(&self) -> f64 {
        self.origin + self.span()
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.origin + self.step * k as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }

    /// Index of the node at `x`, if `x` is a node (up to 1e-7 steps).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = (x - self.origin) / self.step;
        let r = k.round();
        if (k - r).abs() <= 1e-7 && r >= 0.0 && (r as usize) < self.count {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.origin) / self.step).round();
        k.clamp(0.0, (self.count - 1) as f64) as usize
    }

    /// Number of grid steps in `length`, if `length` is an integer multiple of the step.
    pub fn steps_in(&self, length: f64) -> Option<isize> {
        let k = length / self.step;
        let r = k.round();
        if (k - r).abs() <= 1e-7 {
            Some(r as isize)
        } else {
            None
        }
    }

    pub fn with_count(&self, count: usize) -> Result<Self> {
        Self::new(self.origin, self.step, count)
    }

    pub fn with_origin(&self, origin: f64) -> Result<Self> {
        Self::new(origin, self.step, self.count)
    }

    /// Whether `other` has the same step and nodes aligned with this grid.
    pub fn is_aligned_with(&self, other: &Grid) -> bool {
        if (self.step - other.step).abs() > 1e-12 * self.step {
            return false;
        }
        self.steps_in(other.origin - self.origin).is_some()
    }

    /// Frequency grid dual to this grid: step `2π/(N h)`, nodes
    /// `(k - ⌊N/2⌋)·Δξ`, covering `[-π/h, π/h)`.
    pub fn frequency_grid(&self) -> Grid {
        let n = self.count;
        let d = 2.0 * PI / (n as f64 * self.step);
        Grid {
            origin: -((n / 2) as f64) * d,
            step: d,
            count: n,
        }
    }
}

/// Complex samples of a function on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(WhError::InvalidInput(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.count()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(WhError::InvalidInput(format!(
                "non-finite value at sample {k} (x = {})",
                grid.point(k)
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.count()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// First and last nonzero sample indices.
    pub fn support(&self) -> Option<(usize, usize)> {
        let first = self.values.iter().position(|v| *v != C64::new(0.0, 0.0))?;
        let last = self.values.iter().rposition(|v| *v != C64::new(0.0, 0.0))?;
        Some((first, last))
    }

    /// Unweighted `‖f‖₂` by the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        trapezoid(self.values.iter().map(|v| v.norm_sqr()), self.grid.step()).sqrt()
    }

    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| f(self.grid.point(k), *v))
            .collect();
        Self::new(self.grid, values)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(WhError::InvalidInput("functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::new(self.grid, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::new(self.grid, values)
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Self::new(self.grid, values)
    }

    /// Re-express on another grid with the same step and aligned nodes;
    /// samples outside this function's grid are zero.
    pub fn transplant(&self, target: Grid) -> Result<Self> {
        if !self.grid.is_aligned_with(&target) {
            return Err(WhError::InvalidInput("target grid is not aligned".into()));
        }
        let offset = self.grid.steps_in(target.origin() - self.grid.origin()).unwrap_or(0);
        let mut values = vec![C64::new(0.0, 0.0); target.count()];
        for (i, v) in values.iter_mut().enumerate() {
            let j = i as isize + offset;
            if j >= 0 && (j as usize) < self.len() {
                *v = self.values[j as usize];
            }
        }
        Self::new(target, values)
    }

    /// Keep the first `count` samples.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        let grid = self.grid.with_count(count)?;
        if count > self.len() {
            return self.transplant(grid);
        }
        Self::new(grid, self.values[..count].to_vec())
    }
}

/// Trapezoid rule for equally spaced samples.
pub fn trapezoid(samples: impl ExactSizeIterator<Item = f64>, step: f64) -> f64 {
    let n = samples.len();
    let mut acc = 0.0;
    for (k, s) in samples.enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        acc += w * s;
    }
    acc * step
}

/// Samples of a transform on the frequency grid dual to `spatial`.
///
/// `spatial` records the spatial grid the transform was computed on (its
/// origin is where the inverse transform places its output by default).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyFunction {
    grid: Grid,
    spatial: Grid,
    values: Vec<C64>,
}

impl FrequencyFunction {
    pub fn new(spatial: Grid, values: Vec<C64>) -> Result<Self> {
        let grid = spatial.frequency_grid();
        if values.len() != grid.count() {
            return Err(WhError::InvalidInput(format!(
                "{} values for a frequency grid of {} nodes",
                values.len(),
                grid.count()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(WhError::InvalidInput(format!(
                "non-finite spectrum value at ξ = {}",
                grid.point(k)
            )));
        }
        Ok(Self { grid, spatial, values })
    }

    /// Build from a closed form evaluated at each frequency node.
    pub fn from_fn(spatial: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        let grid = spatial.frequency_grid();
        Self::new(spatial, grid.points().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spatial(&self) -> &Grid {
        &self.spatial
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.grid.point(k)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Whether two spectra share the same frequency nodes.
    pub fn same_nodes(&self, other: &Self) -> bool {
        self.grid.count() == other.grid.count()
            && (self.grid.step() - other.grid.step()).abs() <= 1e-12 * self.grid.step()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !self.same_nodes(other) {
            return Err(WhError::InvalidInput("spectra on different frequency grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::new(self.spatial, values)
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| f(self.grid.point(k), *v))
            .collect();
        Self::new(self.spatial, values)
    }

    pub fn with_spatial_origin(&self, origin: f64) -> Result<Self> {
        let spatial = self.spatial.with_origin(origin)?;
        Ok(Self {
            grid: self.grid,
            spatial,
            values: self.values.clone(),
        })
    }
}

/// `f̂` on the frequency grid dual to `f`'s grid, zero-padded to an
/// FFT-friendly length.
pub fn forward_transform(f: &SampledFunction) -> Result<FrequencyFunction> {
    forward_transform_len(f, fft_friendly(f.len()))
}

/// `f̂` computed after zero-padding `f` on the right to `len` samples.
pub fn forward_transform_len(f: &SampledFunction, len: usize) -> Result<FrequencyFunction> {
    if len < f.len() {
        return Err(WhError::InvalidInput(format!(
            "transform length {len} shorter than the {} samples",
            f.len()
        )));
    }
    if let Some(k) = f.values().iter().position(|v| !v.is_finite()) {
        return Err(WhError::InvalidInput(format!("non-finite sample {k}")));
    }
    let spatial = f.grid().with_count(len)?;
    let mut buf = vec![C64::new(0.0, 0.0); len];
    buf[..f.len()].copy_from_slice(f.values());
    plan(len, true).process(&mut buf);

    let h = spatial.step();
    let x0 = spatial.origin();
    let freq = spatial.frequency_grid();
    let centre = len / 2;
    let values = (0..len)
        .map(|k| {
            let xi = freq.point(k);
            let m = (k + len - centre) % len;
            buf[m] * C64::from_polar(h, -xi * x0)
        })
        .collect();
    FrequencyFunction::new(spatial, values)
}

/// Inverse of [`forward_transform`], placed on the transform's spatial grid.
pub fn inverse_transform(spectrum: &FrequencyFunction) -> Result<SampledFunction> {
    inverse_transform_at(spectrum, spectrum.spatial().origin())
}

/// Inverse transform evaluated on the grid of the same step and length
/// starting at `origin`. The discrete inverse is periodic with period
/// `N·h`; callers pick `origin` so the function of interest fits one period.
pub fn inverse_transform_at(spectrum: &FrequencyFunction, origin: f64) -> Result<SampledFunction> {
    let n = spectrum.len();
    let spatial = spectrum.spatial().with_origin(origin)?;
    let freq = spectrum.grid();
    let centre = n / 2;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for (k, v) in spectrum.values().iter().enumerate() {
        let xi = freq.point(k);
        let m = (k + n - centre) % n;
        buf[m] = v * C64::from_polar(1.0, xi * origin);
    }
    plan(n, false).process(&mut buf);
    let scale = 1.0 / (n as f64 * spatial.step());
    for v in buf.iter_mut() {
        *v *= scale;
    }
    SampledFunction::new(spatial, buf)
}

/// Full linear convolution `c[m] = Σ_j a[m-j] b[j]` of two sample sequences.
pub fn linear_convolution(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    // Direct sums keep every output accurate relative to its own terms; the
    // FFT spreads rounding error at the level of the largest output.
    if a.len().min(b.len()) <= 32 || a.len() * b.len() <= 30_000_000 {
        let mut out = vec![C64::new(0.0, 0.0); out_len];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let n = fft_friendly(out_len);
    let mut fa = vec![C64::new(0.0, 0.0); n];
    let mut fb = vec![C64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    let fwd = plan(n, true);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    plan(n, false).process(&mut fa);
    let scale = 1.0 / n as f64;
    fa.truncate(out_len);
    for v in fa.iter_mut() {
        *v *= scale;
    }
    fa
}

/// `(f)_a(x) = e^{ax} f(x)`.
///
/// Large factors are formed in log-space together with `|f(x)|`, so a huge
/// `e^{ax}` multiplying a tiny sample does not overflow spuriously.
pub fn twist(f: &SampledFunction, a: f64) -> Result<SampledFunction> {
    if !a.is_finite() {
        return Err(WhError::InvalidInput(format!("twist level {a} is not finite")));
    }
    if a == 0.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let mut values = Vec::with_capacity(f.len());
    for (k, v) in f.values().iter().enumerate() {
        let x = grid.point(k);
        let e = a * x;
        let out = if e <= EXP_LIMIT - 10.0 {
            v * e.exp()
        } else if *v == C64::new(0.0, 0.0) {
            *v
        } else {
            let log_mag = v.norm().ln() + e;
            if log_mag > EXP_LIMIT {
                return Err(WhError::Overflow {
                    index: k,
                    x,
                    context: format!("e^({a}·x)·|f(x)| exceeds the floating-point range"),
                });
            }
            C64::from_polar(log_mag.exp(), v.arg())
        };
        if !out.is_finite() {
            return Err(WhError::Overflow {
                index: k,
                x,
                context: format!("twist by a = {a}"),
            });
        }
        values.push(out);
    }
    SampledFunction::new(grid, values)
}

/// `φ̂(z) = ∫ φ(x) e^{-izx} dx` for complex `z`, by direct quadrature.
pub fn strip_eval(phi: &SampledFunction, z: C64) -> Result<C64> {
    let grid = phi.grid();
    let h = grid.step();
    let mut acc = C64::new(0.0, 0.0);
    for (k, v) in phi.values().iter().enumerate() {
        if *v == C64::new(0.0, 0.0) {
            continue;
        }
        let x = grid.point(k);
        // -i z x = z.im·x - i z.re·x
        let growth = z.im * x;
        if growth > EXP_LIMIT - 10.0 && v.norm().ln() + growth > EXP_LIMIT {
            return Err(WhError::Overflow {
                index: k,
                x,
                context: format!("e^(Im z · x) with Im z = {}", z.im),
            });
        }
        acc += v * C64::new(growth, -z.re * x).exp();
    }
    let out = acc * h;
    if !out.is_finite() {
        return Err(WhError::Overflow {
            index: 0,
            x: grid.origin(),
            context: format!("strip evaluation at z = {z}"),
        });
    }
    Ok(out)
}
