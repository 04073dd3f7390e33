//! Weights, Orlicz functions and the norms of the weighted Lᵖ, Orlicz and
//! weighted Orlicz spaces.
//!
//! Weights are evaluated in log-space (`ln ω`), so exponential and zigzag
//! weights can be handled far beyond the range where `ω` itself overflows.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, WhError};
use crate::gridfn::{trapezoid, Grid, SampledFunction, EXP_LIMIT};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Closed-form weight families plus user evaluators given as `x ↦ ln ω(x)`.
#[derive(Clone)]
pub enum WeightFamily {
    Constant,
    /// `ω(x) = (1 + x)^α`
    Power { alpha: f64 },
    /// `ω(x) = e^{βx}`
    Exponential { beta: f64 },
    /// `ω(x) = e^{β·min(x, cap)}`
    CappedExponential { beta: f64, cap: f64 },
    /// `ω(x) = e^{β·s(x)}` where `s` is piecewise linear with slope −1 on
    /// `[0, 1)` and slope `(−1)^k` on the dyadic blocks `[2^k, 2^{k+1})`.
    DyadicZigzag { beta: f64 },
    Custom {
        name: String,
        log_eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant => write!(f, "Constant"),
            Self::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            Self::Exponential { beta } => write!(f, "Exponential {{ beta: {beta} }}"),
            Self::CappedExponential { beta, cap } => {
                write!(f, "CappedExponential {{ beta: {beta}, cap: {cap} }}")
            }
            Self::DyadicZigzag { beta } => write!(f, "DyadicZigzag {{ beta: {beta} }}"),
            Self::Custom { name, .. } => write!(f, "Custom {{ name: {name:?} }}"),
        }
    }
}

/// Range and resolution of the coarse scan used for sampled suprema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupScan {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for SupScan {
    fn default() -> Self {
        Self {
            start: 0.0,
            end: 2048.0,
            step: 0.25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Weight {
    family: WeightFamily,
    scan: SupScan,
}

/// Slope-±1 zigzag profile with dyadically growing blocks.
pub fn zigzag_profile(x: f64) -> f64 {
    if x <= 1.0 {
        return -x;
    }
    let mut s = -1.0;
    let mut start = 1.0;
    let mut len = 1.0;
    let mut rising = true;
    loop {
        let seg = (x - start).min(len);
        s += if rising { seg } else { -seg };
        if x <= start + len {
            return s;
        }
        start += len;
        len *= 2.0;
        rising = !rising;
    }
}

impl Weight {
    pub fn new(family: WeightFamily) -> Self {
        Self {
            family,
            scan: SupScan::default(),
        }
    }

    pub fn constant() -> Self {
        Self::new(WeightFamily::Constant)
    }

    pub fn power(alpha: f64) -> Self {
        Self::new(WeightFamily::Power { alpha })
    }

    pub fn exponential(beta: f64) -> Self {
        Self::new(WeightFamily::Exponential { beta })
    }

    pub fn capped_exponential(beta: f64, cap: f64) -> Self {
        Self::new(WeightFamily::CappedExponential { beta, cap })
    }

    pub fn dyadic_zigzag(beta: f64) -> Self {
        Self::new(WeightFamily::DyadicZigzag { beta })
    }

    pub fn custom(name: impl Into<String>, log_eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(WeightFamily::Custom {
            name: name.into(),
            log_eval: Arc::new(log_eval),
        })
    }

    pub fn with_scan(mut self, scan: SupScan) -> Self {
        self.scan = scan;
        self
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn scan(&self) -> SupScan {
        self.scan
    }

    pub fn name(&self) -> String {
        match &self.family {
            WeightFamily::Constant => "constant".into(),
            WeightFamily::Power { alpha } => format!("power({alpha})"),
            WeightFamily::Exponential { beta } => format!("exponential({beta})"),
            WeightFamily::CappedExponential { beta, cap } => format!("capped_exponential({beta}, {cap})"),
            WeightFamily::DyadicZigzag { beta } => format!("dyadic_zigzag({beta})"),
            WeightFamily::Custom { name, .. } => name.clone(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, WeightFamily::Constant)
    }

    /// `ln ω(x)`.
    pub fn log_value(&self, x: f64) -> f64 {
        match &self.family {
            WeightFamily::Constant => 0.0,
            WeightFamily::Power { alpha } => alpha * (1.0 + x).ln(),
            WeightFamily::Exponential { beta } => beta * x,
            WeightFamily::CappedExponential { beta, cap } => beta * x.min(*cap),
            WeightFamily::DyadicZigzag { beta } => beta * zigzag_profile(x),
            WeightFamily::Custom { log_eval, .. } => log_eval(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.log_value(x).exp()
    }

    /// `ln ω` at `x`, rejecting non-positive or non-finite weights.
    pub fn checked_log_value(&self, x: f64) -> Result<f64> {
        let l = self.log_value(x);
        if l.is_nan() || l == f64::NEG_INFINITY {
            return Err(WhError::InvalidWeight {
                x,
                reason: "weight is not positive".into(),
            });
        }
        if l == f64::INFINITY {
            return Err(WhError::InvalidWeight {
                x,
                reason: "weight is infinite".into(),
            });
        }
        Ok(l)
    }

    /// `ln ω` at every node of `grid`.
    pub fn log_values_on(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.points().map(|x| self.checked_log_value(x)).collect()
    }

    /// Closed form of `ln sup_x ω(x+n)/ω(x)` (`n ≥ 0`) or
    /// `ln sup_x ω(x)/ω(x+|n|)` (`n < 0`), when the family has one.
    pub fn exact_log_ratio(&self, n: f64) -> Option<f64> {
        let m = n.abs();
        let forward = n >= 0.0;
        match &self.family {
            WeightFamily::Constant => Some(0.0),
            WeightFamily::Exponential { beta } => Some(beta * n),
            WeightFamily::Power { alpha } => {
                let grows = (*alpha >= 0.0) == forward;
                Some(if grows { alpha.abs() * (1.0 + m).ln() } else { 0.0 })
            }
            WeightFamily::CappedExponential { beta, cap } => {
                let grows = (*beta >= 0.0) == forward;
                Some(if grows { beta.abs() * m.min(*cap) } else { 0.0 })
            }
            WeightFamily::DyadicZigzag { .. } | WeightFamily::Custom { .. } => None,
        }
    }

    /// Log of the sampled ratio at `x` for translation `n` (see [`Self::exact_log_ratio`]).
    fn log_ratio_at(&self, x: f64, n: f64) -> f64 {
        if n >= 0.0 {
            self.log_value(x + n) - self.log_value(x)
        } else {
            self.log_value(x) - self.log_value(x - n)
        }
    }

    /// Sampled supremum of the translation ratio: coarse scan over the
    /// configured range followed by a golden-section refinement around the
    /// best node. Returns `(ln sup, argsup)`.
    pub fn sampled_log_ratio(&self, n: f64) -> (f64, f64) {
        let SupScan { start, end, step } = self.scan;
        let last = end - n.abs();
        let mut best = (f64::NEG_INFINITY, start);
        let mut x = start;
        while x <= last + 1e-12 {
            let r = self.log_ratio_at(x, n);
            if r > best.0 {
                best = (r, x);
            }
            x += step;
        }
        let lo = (best.1 - step).max(start);
        let hi = (best.1 + step).min(last.max(start));
        let refined = golden_max(|x| self.log_ratio_at(x, n), lo, hi, 60);
        if refined.0 > best.0 {
            best = refined;
        }
        best
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    if hi <= lo {
        return (f(lo), lo);
    }
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (fc, c)
    } else {
        (fd, d)
    }
}

/// `ln ‖S_n‖` on `L^p_ω`: `ess sup_x ω(x+n)/ω(x)` for `n ≥ 0`,
/// `sup_x ω(x)/ω(x+|n|)` for `n < 0`. Independent of `p`.
pub fn log_translation_norm(w: &Weight, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    match w.exact_log_ratio(n) {
        Some(r) => r,
        None => w.sampled_log_ratio(n).0,
    }
}

/// `‖S_n‖` on `L^p_ω`. The norm of a translation on `L^p_ω` does not depend
/// on `p`; the argument is kept so call sites read like the norm they mean.
pub fn translation_norm(w: &Weight, _p: f64, n: f64) -> f64 {
    log_translation_norm(w, n).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdmissibilityConfig {
    /// Largest ratio accepted as finite.
    pub ceiling: f64,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        Self { ceiling: 1e12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioProbe {
    pub offset: f64,
    pub up_ratio: f64,
    pub down_ratio: f64,
    pub pass: bool,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub weight: String,
    pub probes: Vec<RatioProbe>,
    pub pass: bool,
}

/// Sampled surrogate of the two-sided translation-ratio condition: for every
/// offset `y`, `sup ω(x+y)/ω(x)` and `sup ω(x)/ω(x+y)` over the grid must be
/// positive, below the ceiling, and must not keep growing toward the end of
/// the sampled range.
pub fn check_admissibility(
    w: &Weight,
    probe_offsets: &[f64],
    grid: &Grid,
    config: &AdmissibilityConfig,
) -> Result<AdmissibilityReport> {
    let logs = w.log_values_on(grid)?;
    let log_ceiling = config.ceiling.ln();
    let mut probes = Vec::with_capacity(probe_offsets.len());
    for &y in probe_offsets {
        if !(y > 0.0) {
            return Err(WhError::InvalidInput(format!("probe offset {y} must be positive")));
        }
        let shift = (y / grid.step()).round() as usize;
        if shift == 0 || shift >= grid.count() - 1 {
            return Err(WhError::InvalidInput(format!(
                "probe offset {y} does not fit the grid"
            )));
        }
        let usable = grid.count() - shift;
        let half = usable / 2;
        let mut up = Scan::default();
        let mut down = Scan::default();
        for i in 0..usable {
            let r = logs[i + shift] - logs[i];
            up.push(i, r, half);
            down.push(i, -r, half);
        }
        let mut problems = Vec::new();
        for (label, scan) in [("up", &up), ("down", &down)] {
            if scan.best > log_ceiling {
                problems.push(format!(
                    "{label}-ratio {:.3e} exceeds the ceiling {:.1e}",
                    scan.best.exp(),
                    config.ceiling
                ));
            } else if scan.best_index + usable / 20 >= usable && scan.best - scan.best_first_half > 1.0 {
                problems.push(format!(
                    "{label}-ratio keeps growing across the sampled range (×{:.3e} over the second half)",
                    (scan.best - scan.best_first_half).exp()
                ));
            }
        }
        probes.push(RatioProbe {
            offset: y,
            up_ratio: up.best.exp(),
            down_ratio: down.best.exp(),
            pass: problems.is_empty(),
            diagnostic: if problems.is_empty() { None } else { Some(problems.join("; ")) },
        });
    }
    let pass = probes.iter().all(|p| p.pass);
    Ok(AdmissibilityReport {
        weight: w.name(),
        probes,
        pass,
    })
}

struct Scan {
    best: f64,
    best_index: usize,
    best_first_half: f64,
}

impl Default for Scan {
    fn default() -> Self {
        Self {
            best: f64::NEG_INFINITY,
            best_index: 0,
            best_first_half: f64::NEG_INFINITY,
        }
    }
}

impl Scan {
    fn push(&mut self, i: usize, r: f64, half: usize) {
        if r > self.best {
            self.best = r;
            self.best_index = i;
        }
        if i <= half && r > self.best_first_half {
            self.best_first_half = r;
        }
    }
}

/// `(∫ |f|^p ω^p dx)^{1/p}` by the trapezoid rule, accumulated in log-space.
pub fn lp_norm(f: &SampledFunction, p: f64, w: &Weight) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(WhError::InvalidInput(format!("exponent p = {p} must lie in [1, ∞)")));
    }
    let grid = f.grid();
    let mut logs = Vec::with_capacity(f.len());
    let mut top = f64::NEG_INFINITY;
    for (k, v) in f.values().iter().enumerate() {
        let a = v.norm();
        let l = if a == 0.0 {
            f64::NEG_INFINITY
        } else {
            a.ln() + w.checked_log_value(grid.point(k))?
        };
        top = top.max(l);
        logs.push(l);
    }
    if top == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let sum = trapezoid(logs.iter().map(|l| (p * (l - top)).exp()), grid.step());
    let log_norm = top + sum.ln() / p;
    if log_norm > EXP_LIMIT {
        return Err(WhError::Overflow {
            index: 0,
            x: grid.origin(),
            context: format!("weighted L^{p} norm e^{log_norm:.1}"),
        });
    }
    Ok(log_norm.exp())
}

/// Young functions `A` with `A(0) = 0` and `A(y)/y` non-decreasing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum OrliczFunction {
    /// `A(y) = y^p`
    Power { p: f64 },
    /// `A(y) = e^y − 1`
    ExpMinusOne,
    /// `A(y) = y·ln(1 + y)`
    YLogOnePlusY,
}

impl OrliczFunction {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Self::Power { p } => y.powf(*p),
            Self::ExpMinusOne => y.exp_m1(),
            Self::YLogOnePlusY => y * y.ln_1p(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Power { p } => format!("orlicz:power({p})"),
            Self::ExpMinusOne => "orlicz:exp_minus_one".into(),
            Self::YLogOnePlusY => "orlicz:y_log_one_plus_y".into(),
        }
    }

    /// Checks `A(0) = 0` and monotonicity of `A(y)/y` on a log-spaced probe set.
    pub fn validate(&self) -> Result<()> {
        if let Self::Power { p } = self {
            if !(*p >= 1.0 && p.is_finite()) {
                return Err(WhError::InvalidInput(format!("Orlicz power p = {p} must be ≥ 1")));
            }
        }
        if self.eval(0.0) != 0.0 {
            return Err(WhError::InvalidInput(format!("{}: A(0) ≠ 0", self.name())));
        }
        let mut prev = 0.0;
        for k in -40..=40 {
            let y = 10f64.powf(k as f64 / 8.0);
            let r = self.eval(y) / y;
            if r.is_finite() && r < prev * (1.0 - 1e-12) {
                return Err(WhError::InvalidInput(format!(
                    "{}: A(y)/y decreases near y = {y:e}",
                    self.name()
                )));
            }
            prev = r;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LuxemburgConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub tolerance: f64,
}

impl Default for LuxemburgConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-200,
            t_max: 1e200,
            tolerance: 1e-10,
        }
    }
}

/// Luxemburg norm `inf{t > 0 : ∫ A(|f|/t) ω dx ≤ 1}` (ω ≡ 1 when `w` is `None`).
pub fn luxemburg_norm(f: &SampledFunction, a: &OrliczFunction, w: Option<&Weight>) -> Result<f64> {
    luxemburg_norm_with(f, a, w, &LuxemburgConfig::default())
}

pub fn luxemburg_norm_with(
    f: &SampledFunction,
    a: &OrliczFunction,
    w: Option<&Weight>,
    config: &LuxemburgConfig,
) -> Result<f64> {
    a.validate()?;
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let grid = f.grid();
    let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let weights: Vec<f64> = match w {
        Some(w) => grid
            .points()
            .map(|x| w.checked_log_value(x).map(f64::exp))
            .collect::<Result<_>>()?,
        None => vec![1.0; f.len()],
    };
    let modular = |t: f64| {
        trapezoid(
            mags.iter().zip(&weights).map(|(m, om)| a.eval(m / t) * om),
            grid.step(),
        )
    };

    let mut lo = top;
    let mut hi = top;
    while modular(hi) > 1.0 {
        hi *= 2.0;
        if hi > config.t_max {
            return Err(WhError::Bracket {
                t_min: config.t_min,
                t_max: config.t_max,
            });
        }
    }
    while modular(lo) <= 1.0 {
        lo /= 2.0;
        if lo < config.t_min {
            return Err(WhError::Bracket {
                t_min: config.t_min,
                t_max: config.t_max,
            });
        }
    }
    // modular(lo) > 1 ≥ modular(hi); bisect in log t down to machine precision.
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let v = modular(mid);
        if v > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = (modular(hi) - 1.0).abs();
    if residual > config.tolerance && modular(lo) <= 1.0 {
        return Err(WhError::Bracket { t_min: lo, t_max: hi });
    }
    Ok(hi)
}

/// The three model spaces over the half-line.
#[derive(Clone, Debug)]
pub enum SpaceSpec {
    Lp { p: f64, weight: Weight },
    Orlicz { a: OrliczFunction },
    WeightedOrlicz { a: OrliczFunction, weight: Weight },
}

impl SpaceSpec {
    pub fn l2(weight: Weight) -> Self {
        Self::Lp { p: 2.0, weight }
    }

    pub fn unweighted_l2() -> Self {
        Self::l2(Weight::constant())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Lp { p, .. } if !(*p >= 1.0 && p.is_finite()) => {
                Err(WhError::InvalidInput(format!("p = {p} must lie in [1, ∞)")))
            }
            Self::Lp { .. } => Ok(()),
            Self::Orlicz { a } | Self::WeightedOrlicz { a, .. } => a.validate(),
        }
    }

    pub fn weight(&self) -> Option<&Weight> {
        match self {
            Self::Lp { weight, .. } | Self::WeightedOrlicz { weight, .. } => Some(weight),
            Self::Orlicz { .. } => None,
        }
    }

    /// The Hilbert case `L²_ω`, where exact operator norms are computable.
    pub fn is_hilbert(&self) -> bool {
        matches!(self, Self::Lp { p, .. } if *p == 2.0)
    }

    pub fn norm(&self, f: &SampledFunction) -> Result<f64> {
        match self {
            Self::Lp { p, weight } => lp_norm(f, *p, weight),
            Self::Orlicz { a } => luxemburg_norm(f, a, None),
            Self::WeightedOrlicz { a, weight } => luxemburg_norm(f, a, Some(weight)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Lp { p, weight } => format!("L^{p}_{}", weight.name()),
            Self::Orlicz { a } => format!("L_{}", a.name()),
            Self::WeightedOrlicz { a, weight } => format!("L_{{{}, {}}}", a.name(), weight.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::C64;

    fn bump(grid: Grid, lo: f64, hi: f64, ramp: f64) -> SampledFunction {
        // ≈ 1 on [lo, hi] with C^∞ shoulders of width `ramp`.
        let step = |t: f64| {
            if t <= 0.0 {
                0.0
            } else if t >= 1.0 {
                1.0
            } else {
                let a = (-1.0 / t).exp();
                let b = (-1.0 / (1.0 - t)).exp();
                a / (a + b)
            }
        };
        SampledFunction::from_real_fn(grid, |x| step((x - lo + ramp) / ramp) * step((hi + ramp - x) / ramp)).unwrap()
    }

    #[test]
    fn zigzag_profile_shape() {
        assert_eq!(zigzag_profile(0.0), 0.0);
        assert_eq!(zigzag_profile(1.0), -1.0);
        assert_eq!(zigzag_profile(2.0), 0.0);
        assert_eq!(zigzag_profile(4.0), -2.0);
        assert_eq!(zigzag_profile(8.0), 2.0);
        assert_eq!(zigzag_profile(16.0), -6.0);
        assert_eq!(zigzag_profile(6.0), 0.0);
    }

    #[test]
    fn constant_weight_is_admissible_with_unit_ratios() {
        let grid = Grid::new(0.0, 0.1, 401).unwrap();
        let r = check_admissibility(&Weight::constant(), &[0.5, 1.0, 5.0], &grid, &Default::default()).unwrap();
        assert!(r.pass);
        for p in &r.probes {
            assert_eq!(p.up_ratio, 1.0);
            assert_eq!(p.down_ratio, 1.0);
        }
    }

    #[test]
    fn exponential_weight_ratios_are_closed_form() {
        let grid = Grid::new(0.0, 0.1, 401).unwrap();
        let r = check_admissibility(&Weight::exponential(1.0), &[1.0, 2.0], &grid, &Default::default()).unwrap();
        assert!(r.pass);
        for p in &r.probes {
            assert!((p.up_ratio - p.offset.exp()).abs() < 1e-9 * p.up_ratio);
            assert!((p.down_ratio - (-p.offset).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_growth_weight_fails_admissibility() {
        let grid = Grid::new(0.0, 0.1, 401).unwrap();
        let w = Weight::custom("exp(x^2)", |x| x * x);
        let r = check_admissibility(&w, &[1.0], &grid, &Default::default()).unwrap();
        assert!(!r.pass);
        assert!(r.probes[0].diagnostic.as_deref().unwrap().contains("up-ratio"));
    }

    #[test]
    fn non_positive_weight_is_rejected() {
        let grid = Grid::new(0.0, 0.1, 11).unwrap();
        let w = Weight::custom("zero", |_| f64::NEG_INFINITY);
        assert!(matches!(
            check_admissibility(&w, &[0.5], &grid, &Default::default()),
            Err(WhError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn lp_norm_of_plateau_bump() {
        let grid = Grid::new(-1.0, 0.001, 3001).unwrap();
        let f = bump(grid, 0.0, 1.0, 1e-3);
        let n = lp_norm(&f, 2.0, &Weight::constant()).unwrap();
        assert!((n - 1.0).abs() < 1e-3, "{n}");
        let z = SampledFunction::zeros(grid);
        assert_eq!(lp_norm(&z, 2.0, &Weight::constant()).unwrap(), 0.0);
        let twice = f.scaled(C64::new(2.0, 0.0)).unwrap();
        let n2 = lp_norm(&twice, 2.0, &Weight::constant()).unwrap();
        assert!((n2 - 2.0 * n).abs() <= 1e-12 * n2);
    }

    #[test]
    fn lp_norm_survives_huge_weights() {
        let grid = Grid::new(0.0, 0.5, 1201).unwrap();
        let f = SampledFunction::from_real_fn(grid, |x| (-x).exp()).unwrap();
        // ω(x) = e^{x+400} overflows alone; |f|ω ≡ e^{400} does not.
        let w = Weight::custom("shifted exp", |x| x + 400.0);
        let n = lp_norm(&f, 2.0, &w).unwrap();
        let expected = 400.0 + 0.5 * 600f64.ln();
        assert!((n.ln() - expected).abs() < 1e-9);
    }

    #[test]
    fn luxemburg_power_matches_lp() {
        let grid = Grid::new(0.0, 0.01, 1001).unwrap();
        let f = SampledFunction::from_real_fn(grid, |x| (x * 3.0).sin() * (-x).exp()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let lux = luxemburg_norm(&f, &OrliczFunction::Power { p }, None).unwrap();
            let lp = lp_norm(&f, p, &Weight::constant()).unwrap();
            assert!((lux - lp).abs() <= 1e-8 * lp, "p={p}: {lux} vs {lp}");
        }
        assert_eq!(
            luxemburg_norm(&SampledFunction::zeros(grid), &OrliczFunction::ExpMinusOne, None).unwrap(),
            0.0
        );
    }

    #[test]
    fn luxemburg_is_homogeneous() {
        let grid = Grid::new(0.0, 0.01, 1001).unwrap();
        let f = SampledFunction::from_real_fn(grid, |x| 1.0 + x * (-x).exp()).unwrap();
        for a in [OrliczFunction::ExpMinusOne, OrliczFunction::YLogOnePlusY] {
            let n = luxemburg_norm(&f, &a, None).unwrap();
            for c in [0.3, 2.5, 17.0] {
                let nc = luxemburg_norm(&f.scaled(C64::new(0.0, c)).unwrap(), &a, None).unwrap();
                assert!((nc - c * n).abs() <= 1e-8 * nc);
            }
        }
    }

    #[test]
    fn orlicz_validation() {
        assert!(OrliczFunction::ExpMinusOne.validate().is_ok());
        assert!(OrliczFunction::YLogOnePlusY.validate().is_ok());
        assert!(OrliczFunction::Power { p: 0.5 }.validate().is_err());
    }

    #[test]
    fn translation_norms_of_closed_form_families() {
        assert_eq!(translation_norm(&Weight::constant(), 2.0, 3.0), 1.0);
        let e = Weight::exponential(0.7);
        assert!((translation_norm(&e, 2.0, 2.0) - (1.4f64).exp()).abs() < 1e-12);
        assert!((translation_norm(&e, 2.0, -2.0) - (-1.4f64).exp()).abs() < 1e-12);
        let p = Weight::power(2.0);
        assert!((translation_norm(&p, 2.0, 3.0) - 16.0).abs() < 1e-12);
        assert_eq!(translation_norm(&p, 2.0, -3.0), 1.0);
    }

    #[test]
    fn exact_ratios_agree_with_sampled_scan() {
        for w in [
            Weight::power(1.5),
            Weight::power(-0.5),
            Weight::capped_exponential(0.8, 5.0),
            Weight::exponential(-0.3),
        ] {
            for n in [0.5, 2.0, 7.0, -0.5, -2.0, -7.0] {
                let exact = w.exact_log_ratio(n).unwrap();
                let (sampled, _) = w.sampled_log_ratio(n);
                // Sampled sups approach suprema at infinity from below.
                assert!(sampled <= exact + 1e-9, "{w:?} n={n}");
                // Suprema attained only at infinity are approached like 1/x.
                assert!(exact - sampled < 1e-2, "{w:?} n={n}: {exact} vs {sampled}");
            }
        }
    }

    #[test]
    fn zigzag_translation_norms_match_brute_force() {
        let w = Weight::dyadic_zigzag(1.0);
        for n in [1.0, 2.0, 5.0, 16.0, 64.0] {
            for signed in [n, -n] {
                // Brute-force oracle on a fine grid.
                let mut brute = f64::NEG_INFINITY;
                let mut x = 0.0;
                while x + n <= 2048.0 {
                    let r = if signed > 0.0 {
                        zigzag_profile(x + n) - zigzag_profile(x)
                    } else {
                        zigzag_profile(x) - zigzag_profile(x + n)
                    };
                    brute = brute.max(r);
                    x += 1.0 / 64.0;
                }
                let got = log_translation_norm(&w, signed);
                assert!((got - brute).abs() < 1e-9, "n={signed}: {got} vs {brute}");
                assert!((got - n).abs() < 1e-9);
            }
        }
    }
}
