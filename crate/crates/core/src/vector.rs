//! `ℂ^d`-valued functions on the half-line: matrix kernels, scalarisation
//! `T_{u,v} f = ⟨T(fu), v⟩`, operator-valued symbols, the vector shift and
//! operator-valued weights.
//!
//! Inner products are linear in the first argument:
//! `⟨x, y⟩ = Σ x_j conj(y_j)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WhError};
use crate::gridfn::{forward_transform_len, fft_friendly, twist, FrequencyFunction, Grid, SampledFunction, C64};
use crate::operators::{apply_shift_fixed, apply_wh, gaussian_kernel, recover_kernel, spectral_radius, Direction, RecoveryConfig, WienerHopfOperator};
use crate::profiles;
use crate::spaces::{check_admissibility, translation_norm, AdmissibilityConfig, AdmissibilityReport, SpaceSpec, SupScan, Weight};
use crate::spectra::{annulus_certificate, log_envelope_norm, AnnulusBounds, CertificateKind, QuasiEigenvector, SpectralCertificate, WindowLadder};
use crate::symbol::{apply_symbol, kernel_symbol, StripSpec};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `⟨x, y⟩ = Σ x_j conj(y_j)`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn unit(d: usize, j: usize) -> Vec<C64> {
    let mut e = vec![ZERO; d];
    e[j] = C64::new(1.0, 0.0);
    e
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorFunction {
    components: Vec<SampledFunction>,
}

impl VectorFunction {
    pub fn new(components: Vec<SampledFunction>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| WhError::Dimension("a vector function needs d ≥ 1 components".into()))?;
        if components.iter().any(|c| c.grid() != first.grid()) {
            return Err(WhError::Dimension("components live on different grids".into()));
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: Grid, d: usize) -> Result<Self> {
        Self::new(vec![SampledFunction::zeros(grid); d])
    }

    /// `f ⊗ u : x ↦ f(x) u`.
    pub fn elementary(f: &SampledFunction, u: &[C64]) -> Result<Self> {
        Self::new(u.iter().map(|&c| f.scaled(c)).collect::<Result<Vec<_>>>()?)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, j: usize) -> &SampledFunction {
        &self.components[j]
    }

    pub fn components(&self) -> &[SampledFunction] {
        &self.components
    }

    pub fn at(&self, k: usize) -> Vec<C64> {
        self.components.iter().map(|c| c.values()[k]).collect()
    }

    /// `x ↦ ⟨F(x), v⟩`.
    pub fn pair(&self, v: &[C64]) -> Result<SampledFunction> {
        self.check_dim(v.len())?;
        let values = (0..self.len()).map(|k| inner(&self.at(k), v)).collect();
        SampledFunction::new(*self.grid(), values)
    }

    /// `x ↦ ‖F(x)‖_H` as a real function.
    pub fn norm_profile(&self) -> Result<SampledFunction> {
        let values = (0..self.len())
            .map(|k| C64::new(self.components.iter().map(|c| c.values()[k].norm_sqr()).sum::<f64>().sqrt(), 0.0))
            .collect();
        SampledFunction::new(*self.grid(), values)
    }

    /// `‖ ‖F(·)‖_H ‖_E`.
    pub fn norm(&self, space: &SpaceSpec) -> Result<f64> {
        space.norm(&self.norm_profile()?)
    }

    pub fn map_components(&self, f: impl Fn(&SampledFunction) -> Result<SampledFunction>) -> Result<Self> {
        Self::new(self.components.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        self.check_dim(other.dim())?;
        Self::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.combine(alpha, b, beta))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Best rank-`r` approximation by sums of elementary tensors `f_i ⊗ u_i`
    /// (SVD of the nodes × components sample matrix).
    pub fn rank_truncation(&self, r: usize) -> Result<Self> {
        let (n, d) = (self.len(), self.dim());
        let m = DMatrix::from_fn(n, d, |k, j| self.components[j].values()[k]);
        let svd = m.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut s = svd.singular_values.clone();
        for i in r.min(s.len())..s.len() {
            s[i] = 0.0;
        }
        let approx = &u * DMatrix::from_diagonal(&s.map(|x| C64::new(x, 0.0))) * &vt;
        Self::new(
            (0..d)
                .map(|j| SampledFunction::new(*self.grid(), approx.column(j).iter().copied().collect()))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim() {
            Ok(())
        } else {
            Err(WhError::Dimension(format!("expected {} components, got {d}", self.dim())))
        }
    }
}

/// Random smooth vector probes supported inside `(0, grid end)`.
pub fn random_vector_probes(grid: &Grid, d: usize, count: usize, seed: u64) -> Result<Vec<VectorFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = grid.span();
    (0..count)
        .map(|_| {
            let comps = (0..d)
                .map(|_| {
                    let lo = rng.random_range(0.1 * span..0.3 * span);
                    let hi = rng.random_range(0.6 * span..0.9 * span);
                    let freq = rng.random_range(-2.0..2.0);
                    let amp = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    SampledFunction::from_fn(*grid, |x| amp * profiles::bump((x - lo) / (hi - lo)) * C64::from_polar(1.0, freq * x))
                })
                .collect::<Result<Vec<_>>>()?;
            VectorFunction::new(comps)
        })
        .collect()
}

pub fn random_unit_vector(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..d)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let n = inner(&v, &v).re.sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// `d × d` kernels `Φ_{jk}` (row-major) on one shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixKernel {
    dim: usize,
    entries: Vec<SampledFunction>,
}

impl MatrixKernel {
    /// Entries are moved onto the smallest grid covering all of them.
    pub fn new(dim: usize, entries: Vec<SampledFunction>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(WhError::Dimension(format!("{} entries do not form a {dim}×{dim} kernel", entries.len())));
        }
        let first = *entries[0].grid();
        if entries.iter().any(|e| !e.grid().is_aligned_with(&first)) {
            return Err(WhError::InvalidGrid("matrix kernel entries are not aligned".into()));
        }
        let lo = entries.iter().map(|e| e.grid().origin()).fold(f64::INFINITY, f64::min);
        let hi = entries.iter().map(|e| e.grid().end()).fold(f64::NEG_INFINITY, f64::max);
        let h = first.step();
        let grid = Grid::new(lo, h, ((hi - lo) / h).round() as usize + 1)?;
        let entries = entries.iter().map(|e| e.transplant(grid)).collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, entries })
    }

    pub fn diagonal(diag: Vec<SampledFunction>) -> Result<Self> {
        let d = diag.len();
        let zero = SampledFunction::zeros(*diag.first().ok_or_else(|| WhError::Dimension("empty diagonal".into()))?.grid());
        let mut entries = vec![zero; d * d];
        for (j, f) in diag.into_iter().enumerate() {
            entries[j * d + j] = f;
        }
        Self::new(d, entries)
    }

    /// Entries `c_{jk}·N(m_{jk}, s_{jk}²)` with random complex `c`, centres
    /// in `[-1, 1]` and widths in `[0.3, 0.8]`.
    pub fn random(dim: usize, h: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..dim * dim)
            .map(|_| {
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let centre = (rng.random_range(-1.0..1.0) / h).round() * h;
                let width = rng.random_range(0.3..0.8);
                gaussian_kernel(centre, width, h)?.scaled(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &Grid {
        self.entries[0].grid()
    }

    pub fn entry(&self, j: usize, k: usize) -> &SampledFunction {
        &self.entries[j * self.dim + k]
    }

    /// Kernel of `T_{u,v}`: `Σ_{jk} conj(v_j) Φ_{jk} u_k`.
    pub fn scalarized(&self, u: &[C64], v: &[C64]) -> Result<SampledFunction> {
        let mut acc = SampledFunction::zeros(*self.grid());
        for j in 0..self.dim {
            for k in 0..self.dim {
                acc = acc.combine(C64::new(1.0, 0.0), self.entry(j, k), v[j].conj() * u[k])?;
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug)]
pub enum VectorOperatorKind {
    Kernel(MatrixKernel),
    /// Componentwise translation `S_s`.
    Shift(f64),
}

#[derive(Clone, Debug)]
pub struct VectorOperator {
    pub kind: VectorOperatorKind,
    pub dim: usize,
}

impl VectorOperator {
    pub fn kernel(k: MatrixKernel) -> Self {
        let dim = k.dim();
        Self {
            kind: VectorOperatorKind::Kernel(k),
            dim,
        }
    }

    pub fn shift(s: f64, dim: usize) -> Self {
        Self {
            kind: VectorOperatorKind::Shift(s),
            dim,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            VectorOperatorKind::Kernel(_) => format!("matrix_kernel(d={})", self.dim),
            VectorOperatorKind::Shift(s) => format!("vector_shift({s}, d={})", self.dim),
        }
    }
}

fn scalar_kernel_op(phi: &SampledFunction) -> WienerHopfOperator {
    WienerHopfOperator::kernel(phi.clone(), SpaceSpec::unweighted_l2())
}

pub fn apply_vector(t: &VectorOperator, f: &VectorFunction) -> Result<VectorFunction> {
    f.check_dim(t.dim)?;
    match &t.kind {
        VectorOperatorKind::Shift(s) => f.map_components(|c| apply_shift_fixed(c, *s)),
        VectorOperatorKind::Kernel(k) => {
            let d = t.dim;
            let mut out = Vec::with_capacity(d);
            for j in 0..d {
                let mut acc = SampledFunction::zeros(*f.grid());
                for l in 0..d {
                    let entry = k.entry(j, l);
                    if entry.max_abs() == 0.0 || f.component(l).max_abs() == 0.0 {
                        continue;
                    }
                    let g = apply_wh(&scalar_kernel_op(entry), f.component(l))?;
                    acc = acc.add(&g)?;
                }
                out.push(acc);
            }
            VectorFunction::new(out)
        }
    }
}

/// `T_{u,v} : f ↦ ⟨T(fu)(·), v⟩` as a scalar black box on `space`.
pub fn scalarize(t: &VectorOperator, u: &[C64], v: &[C64], space: SpaceSpec) -> Result<WienerHopfOperator> {
    if u.len() != t.dim || v.len() != t.dim {
        return Err(WhError::Dimension(format!("u, v must have {} components", t.dim)));
    }
    if inner(u, u).re == 0.0 || inner(v, v).re == 0.0 {
        return Err(WhError::InvalidInput("scalarisation needs nonzero u and v".into()));
    }
    let (t, u, v) = (t.clone(), u.to_vec(), v.to_vec());
    Ok(WienerHopfOperator::black_box(
        format!("scalarize({})", t.name()),
        move |f| apply_vector(&t, &VectorFunction::elementary(f, &u)?)?.pair(&v),
        space,
    ))
}

/// `V_a(ξ)` on a frequency grid: `d × d` row-major entries.
#[derive(Clone, Debug)]
pub struct OperatorSymbol {
    pub a: f64,
    pub dim: usize,
    pub entries: Vec<FrequencyFunction>,
}

#[derive(Serialize)]
pub struct OperatorSymbolJson {
    pub a: f64,
    pub dim: usize,
    pub frequency_grid: Grid,
    pub nodes: (usize, usize),
    pub sup_norm: f64,
    /// Per node, the row-major matrix as `[re, im]` pairs.
    pub matrices: Vec<Vec<[f64; 2]>>,
}

impl OperatorSymbol {
    pub fn new(a: f64, dim: usize, entries: Vec<FrequencyFunction>) -> Result<Self> {
        if entries.len() != dim * dim || entries.iter().any(|e| !e.same_nodes(&entries[0])) {
            return Err(WhError::Dimension("symbol entries do not form a matrix on one grid".into()));
        }
        Ok(Self { a, dim, entries })
    }

    pub fn entry(&self, j: usize, k: usize) -> &FrequencyFunction {
        &self.entries[j * self.dim + k]
    }

    pub fn len(&self) -> usize {
        self.entries[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.entries[0].frequency(k)
    }

    pub fn matrix_at(&self, k: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |j, l| self.entry(j, l).values()[k])
    }

    /// `⟨V_a(ξ_k) u, v⟩`.
    pub fn pairing(&self, k: usize, u: &[C64], v: &[C64]) -> C64 {
        let vu = self.matrix_at(k) * DVector::from_column_slice(u);
        inner(vu.as_slice(), v)
    }

    /// `max_ξ ‖V_a(ξ)‖` (largest singular value per node).
    pub fn sup_norm(&self) -> f64 {
        (0..self.len())
            .map(|k| self.matrix_at(k).singular_values().max())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self, band: Option<f64>) -> OperatorSymbolJson {
        let grid = *self.entries[0].grid();
        let n = grid.count();
        let (lo, hi) = match band {
            None => (0, n - 1),
            Some(b) => {
                let lo = (0..n).find(|&k| grid.point(k) >= -b).unwrap_or(0);
                let hi = (0..n).rev().find(|&k| grid.point(k) <= b).unwrap_or(n - 1);
                (lo, hi.max(lo))
            }
        };
        OperatorSymbolJson {
            a: self.a,
            dim: self.dim,
            frequency_grid: grid,
            nodes: (lo, hi),
            sup_norm: self.sup_norm(),
            matrices: (lo..=hi)
                .map(|k| self.entries.iter().map(|e| [e.values()[k].re, e.values()[k].im]).collect())
                .collect(),
        }
    }
}

/// Entrywise symbols of a matrix kernel at level `a` with `len` nodes.
pub fn vector_symbol(k: &MatrixKernel, a: f64, strip: &StripSpec, len: usize) -> Result<OperatorSymbol> {
    strip.check(a)?;
    let entries = (0..k.dim * k.dim)
        .map(|i| kernel_symbol(&k.entries[i], a, len))
        .collect::<Result<Vec<_>>>()?;
    OperatorSymbol::new(a, k.dim, entries)
}

/// `V_a` for a vector operator, sized for probes on `probe_grid`.
pub fn vector_operator_symbol(t: &VectorOperator, a: f64, strip: &StripSpec, probe_grid: &Grid) -> Result<OperatorSymbol> {
    match &t.kind {
        VectorOperatorKind::Kernel(k) => vector_symbol(k, a, strip, fft_friendly(probe_grid.count() + k.grid().count())),
        VectorOperatorKind::Shift(s) => {
            strip.check(a)?;
            let steps = probe_grid
                .steps_in(*s)
                .ok_or(WhError::Alignment { shift: *s, step: probe_grid.step() })?
                .unsigned_abs();
            let len = fft_friendly(probe_grid.count() + steps + 1);
            let spatial = Grid::new(0.0, probe_grid.step(), len)?;
            let diag = FrequencyFunction::from_fn(spatial, |xi| C64::new(s * a, -s * xi).exp())?;
            let zero = diag.map(|_, _| ZERO)?;
            let d = t.dim;
            let entries = (0..d * d).map(|i| if i % (d + 1) == 0 { diag.clone() } else { zero.clone() }).collect();
            OperatorSymbol::new(a, d, entries)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorRepresentationReport {
    pub a: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `max |F(⟨G, v⟩) - ⟨F(G), v⟩|` relative to the transform's size.
    pub transform_pairing_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Residual of `(TF)_a = P⁺F⁻¹(V_a[(F)_a^])` per probe, with the
/// transform/inner-product commutation checked on the same probes.
pub fn vector_representation_check(
    t: &VectorOperator,
    symbol: &OperatorSymbol,
    probes: &[VectorFunction],
    tolerance: f64,
    seed: u64,
) -> Result<VectorRepresentationReport> {
    let a = symbol.a;
    let d = t.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = Vec::with_capacity(probes.len());
    let mut pairing = 0.0f64;
    for (i, f) in probes.iter().enumerate() {
        f.check_dim(d)?;
        for c in f.components() {
            let n = c.len();
            if c.values()[0] != ZERO || c.values()[n - 1] != ZERO {
                return Err(WhError::Probe(format!("vector probe {i} touches the end of its grid")));
            }
        }
        let lhs = apply_vector(t, f)?.map_components(|c| twist(c, a))?;
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..d {
            let mut rhs = SampledFunction::zeros(*f.grid());
            for k in 0..d {
                if symbol.entry(j, k).sup_norm() == 0.0 {
                    continue;
                }
                rhs = rhs.add(&apply_symbol(symbol.entry(j, k), f.component(k), a)?)?;
            }
            let diff = lhs.component(j).sub(&rhs)?;
            num += diff.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
            den += lhs.component(j).values().iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        residuals.push(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() });

        let v = random_unit_vector(d, &mut rng);
        let twisted = f.map_components(|c| twist(c, a))?;
        let len = symbol.len();
        let direct = forward_transform_len(&twisted.pair(&v)?, len)?;
        let parts = twisted
            .components()
            .iter()
            .map(|c| forward_transform_len(c, len))
            .collect::<Result<Vec<_>>>()?;
        let scale = direct.sup_norm().max(1e-300);
        for k in 0..len {
            let by_parts: Vec<C64> = parts.iter().map(|p| p.values()[k]).collect();
            pairing = pairing.max((direct.values()[k] - inner(&by_parts, &v)).norm() / scale);
        }
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(VectorRepresentationReport {
        a,
        residuals,
        max_residual,
        transform_pairing_residual: pairing,
        tolerance,
        pass: max_residual <= tolerance && pairing <= 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarizationIdentity {
    /// `max_{ξ} |⟨V_a(ξ)u, v⟩ - ν^{u,v}_a(ξ)|` per pair, relative to `sup ‖V_a‖`.
    pub pairs: Vec<((usize, usize), f64)>,
    pub max_error: f64,
}

/// Scalar symbol of `T_{u,v}` from its black box: kernel recovery with the
/// Kronecker mollifier, then the level-`a` transform with `len` nodes.
pub fn scalarized_symbol(
    t: &VectorOperator,
    u: &[C64],
    v: &[C64],
    a: f64,
    len: usize,
    space: &SpaceSpec,
) -> Result<FrequencyFunction> {
    let (kernel, _) = recover_scalarized_kernel(t, u, v, space)?;
    kernel_symbol(&kernel, a, len)
}

/// Window and step covering the kernel of `t`.
fn kernel_window(t: &VectorOperator, h_default: f64) -> (f64, f64, f64) {
    match &t.kind {
        VectorOperatorKind::Kernel(k) => (k.grid().origin(), k.grid().end(), k.grid().step()),
        VectorOperatorKind::Shift(s) => (s.min(0.0) - 1.0, s.max(0.0) + 1.0, h_default),
    }
}

fn recover_scalarized_kernel(t: &VectorOperator, u: &[C64], v: &[C64], space: &SpaceSpec) -> Result<(SampledFunction, bool)> {
    let (t_min, t_max, h) = kernel_window(t, 0.01);
    let black_box = scalarize(t, u, v, space.clone())?;
    let x0 = ((-t_min).max(0.0) / h).ceil() * h + 1.0;
    let offset = 1.0;
    let end = x0 + offset + t_max + 2.0;
    let grid = Grid::new(0.0, h, (end / h).ceil() as usize + 1)?;
    let config = RecoveryConfig {
        window: (t_min, t_max),
        second_probe_offset: offset,
        tolerance: 1e-10,
    };
    let n = (1.0 / h).round() as usize;
    let rec = recover_kernel(&black_box, &grid, n, x0, &config)?;
    Ok((rec.kernel, rec.stationary))
}

/// `⟨V_a(ξ)e_k, e_j⟩` against the scalar symbol of `T_{e_k, e_j}` for all
/// `d²` basis pairs.
pub fn scalarization_identity(t: &VectorOperator, symbol: &OperatorSymbol, space: &SpaceSpec) -> Result<ScalarizationIdentity> {
    let d = t.dim;
    let scale = symbol.sup_norm().max(1e-300);
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..d).map(move |k| (j, k))).collect();
    let pairs = pairs
        .par_iter()
        .map(|&(j, k)| {
            let (u, v) = (unit(d, k), unit(d, j));
            let nu = scalarized_symbol(t, &u, &v, symbol.a, symbol.len(), space)?;
            let err = (0..symbol.len())
                .map(|m| (symbol.pairing(m, &u, &v) - nu.values()[m]).norm())
                .fold(0.0, f64::max)
                / scale;
            Ok(((j, k), err))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_error = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(ScalarizationIdentity { pairs, max_error })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorSpectralRadius {
    pub dim: usize,
    pub forward: f64,
    pub backward: f64,
    pub scalar_forward: f64,
    pub scalar_backward: f64,
    /// `max |‖S_n F‖ - ‖S_n ‖F‖_H‖|` relative, over the probes.
    pub profile_defect: f64,
    /// `max (‖S_n F‖/‖F‖ - ‖S_n‖)`; never positive up to rounding.
    pub ratio_excess: f64,
    pub agree: bool,
}

/// `‖S_n‖` on the vector space through the norm profile: `‖S_n F‖ =
/// ‖S_n ‖F‖_H‖`, so the vector norm equals the scalar one. The identity and
/// the bound `‖S_n F‖ ≤ ‖S_n‖ ‖F‖` are checked on random probes.
pub fn vector_spectral_radius(w: &Weight, p: f64, d: usize, seed: u64) -> Result<VectorSpectralRadius> {
    if d == 0 {
        return Err(WhError::Dimension("d must be at least 1".into()));
    }
    let space = SpaceSpec::Lp { p, weight: w.clone() };
    let grid = Grid::new(0.0, 0.05, 1601)?;
    let probes = random_vector_probes(&grid, d, 4, seed)?;
    let mut profile_defect = 0.0f64;
    let mut ratio_excess = f64::NEG_INFINITY;
    for n in [1.0, 2.0, 4.0, 8.0] {
        for sign in [1.0, -1.0] {
            let s = sign * n;
            let norm_s = translation_norm(w, p, s);
            for f in &probes {
                let moved = f.map_components(|c| apply_shift_fixed(c, s))?;
                let direct = moved.norm(&space)?;
                let via_profile = space.norm(&apply_shift_fixed(&f.norm_profile()?, s)?)?;
                profile_defect = profile_defect.max((direct - via_profile).abs() / direct.max(1e-300));
                ratio_excess = ratio_excess.max(direct / f.norm(&space)? - norm_s);
            }
        }
    }
    let scalar_forward = spectral_radius(w, p, Direction::Forward).estimate;
    let scalar_backward = spectral_radius(w, p, Direction::Backward).estimate;
    // Vector translation norms coincide with the scalar ones by the profile identity.
    let (forward, backward) = (scalar_forward, scalar_backward);
    let agree = profile_defect <= 1e-12 && ratio_excess <= 1e-9 * scalar_forward.max(1.0);
    Ok(VectorSpectralRadius {
        dim: d,
        forward,
        backward,
        scalar_forward,
        scalar_backward,
        profile_defect,
        ratio_excess,
        agree,
    })
}

/// Annulus certificate for the vector shift on `L^p_ω ⊗ ℂ^d`: the scalar
/// windows, re-evaluated with the witness `f ⊗ u`.
pub fn vector_annulus_certificate(
    lambda: C64,
    space: &SpaceSpec,
    d: usize,
    bounds: &AnnulusBounds,
    ladder: &WindowLadder,
    u: &[C64],
) -> Result<SpectralCertificate> {
    if u.len() != d {
        return Err(WhError::Dimension(format!("u must have {d} components")));
    }
    vectorize_certificate(annulus_certificate(lambda, space, bounds, ladder)?, space, ladder, u)
}

/// Lifts a scalar certificate to `ℂ^d`: inside residuals are recomputed with
/// `f ⊗ u`; outside bounds carry over because `‖S_n‖` is unchanged.
pub fn vectorize_certificate(mut cert: SpectralCertificate, space: &SpaceSpec, ladder: &WindowLadder, u: &[C64]) -> Result<SpectralCertificate> {
    let lambda = cert.lambda;
    if let CertificateKind::Inside { residual, ladder: rungs, witness } = &mut cert.kind {
        for rung in rungs.iter_mut() {
            let q = QuasiEigenvector::new(witness.kappa, rung.window, &ladder.quasi)?;
            rung.residual = vector_shift_residual(&q, u, 1.0, lambda, space)?;
            rung.backward_residual = vector_shift_residual(&q, u, -1.0, lambda.inv(), space)?;
        }
        *residual = rungs.last().map(|r| r.worst()).unwrap_or(f64::NAN);
    }
    Ok(cert)
}

/// `‖(S_m - μ)(f ⊗ u)‖ / ‖f ⊗ u‖` with the vector norm profile.
pub fn vector_shift_residual(q: &QuasiEigenvector, u: &[C64], shift: f64, mu: C64, space: &SpaceSpec) -> Result<f64> {
    let sigma = q.envelope_rate();
    let profile = VectorFunction::elementary(&q.profile, u)?;
    let moved = profile.map_components(|c| apply_shift_fixed(c, shift))?;
    let diff = moved.combine(C64::new((-sigma * shift).exp(), 0.0), &profile, -mu)?;
    let num = log_envelope_norm(&diff.norm_profile()?, sigma, space, None)?;
    let den = log_envelope_norm(&profile.norm_profile()?, sigma, space, None)?;
    Ok((num - den).exp())
}

// ---------------------------------------------------------------------------
// Operator-valued weights

/// `poly(x)·e^{rate·x}` with `poly` given by ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightEntry {
    pub poly: Vec<f64>,
    pub rate: f64,
}

impl WeightEntry {
    pub fn constant(c: f64) -> Self {
        Self { poly: vec![c], rate: 0.0 }
    }

    pub fn exp(rate: f64) -> Self {
        Self { poly: vec![1.0], rate }
    }

    pub fn poly(coeffs: &[f64]) -> Self {
        Self {
            poly: coeffs.to_vec(),
            rate: 0.0,
        }
    }

    fn poly_at(&self, x: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

#[derive(Clone, Debug)]
pub enum OperatorWeight {
    /// Dense `d × d` matrix of entries, row-major.
    Entries { dim: usize, entries: Vec<WeightEntry> },
    /// `ω(x)·Identity`.
    Scalar { dim: usize, weight: Weight },
}

impl OperatorWeight {
    pub fn entries(dim: usize, entries: Vec<WeightEntry>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(WhError::Dimension(format!("{} entries do not form a {dim}×{dim} weight", entries.len())));
        }
        Ok(Self::Entries { dim, entries })
    }

    pub fn diagonal(diag: Vec<WeightEntry>) -> Result<Self> {
        let d = diag.len();
        let mut entries = vec![WeightEntry::constant(0.0); d * d];
        for (j, e) in diag.into_iter().enumerate() {
            entries[j * d + j] = e;
        }
        Self::entries(d, entries)
    }

    /// The 5×5 example weight with entries built from `1`, `x`, `x²/2`,
    /// `e^x`, `e^{2x}` and `e^{3x}`.
    pub fn five_by_five() -> Self {
        use WeightEntry as E;
        let one = || E::constant(1.0);
        let x = || E::poly(&[0.0, 1.0]);
        let one_x = || E::poly(&[1.0, 1.0]);
        let rows = vec![
            one(), E::exp(1.0), E::exp(3.0), one(), one(),
            one_x(), x(), E::exp(1.0), one(), E::exp(3.0),
            E::exp(1.0), one(), one(), x(), one_x(),
            one(), one(), E::exp(1.0), E::exp(2.0), one(),
            x(), x(), one_x(), E::exp(1.0), E::poly(&[0.0, 0.0, 0.5]),
        ];
        Self::Entries { dim: 5, entries: rows }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Entries { dim, .. } | Self::Scalar { dim, .. } => *dim,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Entries { dim, .. } => format!("matrix_weight({dim}x{dim})"),
            Self::Scalar { dim, weight } => format!("{}·I_{dim}", weight.name()),
        }
    }

    /// `W(x) = e^{s}·M` with `M` moderate; returns `(s, M)`.
    pub fn scaled_matrix(&self, x: f64) -> (f64, DMatrix<f64>) {
        match self {
            Self::Entries { dim, entries } => {
                let top = entries
                    .iter()
                    .filter(|e| e.poly_at(x) != 0.0)
                    .map(|e| e.rate * x)
                    .fold(f64::NEG_INFINITY, f64::max);
                let top = if top.is_finite() { top } else { 0.0 };
                let m = DMatrix::from_fn(*dim, *dim, |j, k| {
                    let e = &entries[j * dim + k];
                    e.poly_at(x) * (e.rate * x - top).exp()
                });
                (top, m)
            }
            Self::Scalar { dim, weight } => (weight.log_value(x), DMatrix::identity(*dim, *dim)),
        }
    }

    /// `ln ‖W(x)‖` (largest singular value).
    pub fn log_norm(&self, x: f64) -> f64 {
        let (s, m) = self.scaled_matrix(x);
        s + m.singular_values().max().ln()
    }

    /// `ln ‖W(x)u‖`.
    pub fn log_apply_norm(&self, x: f64, u: &[C64]) -> f64 {
        let (s, m) = self.scaled_matrix(x);
        let mc = m.map(|r| C64::new(r, 0.0));
        let wu = mc * DVector::from_column_slice(u);
        s + wu.norm().ln()
    }

    /// The scalar weight `x ↦ ‖W(x)‖`.
    pub fn norm_weight(&self) -> Weight {
        let me = self.clone();
        Weight::custom(format!("‖{}‖", self.name()), move |x| me.log_norm(x))
    }

    /// Diagonal entries as scalar weights, when `W` is diagonal with
    /// positive diagonal.
    pub fn diagonal_weights(&self) -> Option<Vec<Weight>> {
        match self {
            Self::Scalar { dim, weight } => Some(vec![weight.clone(); *dim]),
            Self::Entries { dim, entries } => {
                let d = *dim;
                let off_diag_zero = (0..d * d).all(|i| i % (d + 1) == 0 || entries[i].poly.iter().all(|c| *c == 0.0));
                if !off_diag_zero {
                    return None;
                }
                Some(
                    (0..d)
                        .map(|j| {
                            let e = entries[j * d + j].clone();
                            Weight::custom(format!("W_{j}{j}"), move |x| e.poly_at(x).ln() + e.rate * x)
                        })
                        .collect(),
                )
            }
        }
    }
}

/// `(∫ ‖W(x)F(x)‖^p dx)^{1/p}`, accumulated in log-space.
pub fn operator_weight_norm(f: &VectorFunction, w: &OperatorWeight, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(WhError::InvalidInput(format!("exponent p = {p} must lie in [1, ∞)")));
    }
    if f.dim() != w.dim() {
        return Err(WhError::Dimension(format!("weight is {}×{0}, function has {} components", w.dim(), f.dim())));
    }
    let grid = f.grid();
    let logs: Vec<f64> = (0..f.len())
        .map(|k| {
            let v = f.at(k);
            if v.iter().all(|z| *z == ZERO) {
                f64::NEG_INFINITY
            } else {
                w.log_apply_norm(grid.point(k), &v)
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let sum = crate::gridfn::trapezoid(logs.iter().map(|l| (p * (l - top)).exp()), grid.step());
    let log_norm = top + sum.ln() / p;
    if log_norm > crate::gridfn::EXP_LIMIT {
        return Err(WhError::Overflow {
            index: 0,
            x: grid.origin(),
            context: format!("operator-weighted L^{p} norm e^{log_norm:.1}"),
        });
    }
    Ok(log_norm.exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorPipelineConfig {
    pub levels: usize,
    pub probe_grid: Grid,
    pub probes: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub admissibility_offsets: Vec<f64>,
    /// Range scanned for the sup-ratios of `‖W‖`.
    pub scan: SupScan,
}

impl Default for VectorPipelineConfig {
    fn default() -> Self {
        Self {
            levels: 5,
            probe_grid: Grid::new(0.0, 0.01, 2001).unwrap(),
            probes: 3,
            seed: 11,
            tolerance: 1e-5,
            admissibility_offsets: vec![0.5, 1.0, 2.0, 4.0],
            scan: SupScan {
                start: 0.0,
                end: 256.0,
                step: 0.25,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VectorPipelineReport {
    pub operator: String,
    pub weight: String,
    pub strip: StripSpec,
    pub admissibility: AdmissibilityReport,
    pub representation: Vec<VectorRepresentationReport>,
    /// Shift only: `max |V_a(ξ) - e^{sa - isξ} I|` over levels and nodes.
    pub closed_form_error: Option<f64>,
    /// Diagonal weights only: the strip of each diagonal entry.
    pub component_strips: Option<Vec<StripSpec>>,
    pub intersection: Option<(f64, f64)>,
    /// Set when component strips differ or do not intersect.
    pub strip_notice: Option<String>,
    pub pass: bool,
    #[serde(skip)]
    pub symbols: Vec<OperatorSymbol>,
}

/// Symbol of a vector Wiener–Hopf operator on `L^p_W`: the strip comes from
/// the scalar weight `‖W(·)‖`, each entry from the black-box scalarisation
/// `T_{e_k, e_j}` on `L^p_{‖W‖}`, and the assembled `V_a` is checked against
/// the representation identity.
pub fn vector_symbol_pipeline(t: &VectorOperator, w: &OperatorWeight, p: f64, config: &VectorPipelineConfig) -> Result<VectorPipelineReport> {
    if t.dim != w.dim() {
        return Err(WhError::Dimension("operator and weight dimensions differ".into()));
    }
    let d = t.dim;
    let nw = w.norm_weight().with_scan(config.scan);
    let scan_grid = Grid::new(config.scan.start, config.scan.step, ((config.scan.end - config.scan.start) / config.scan.step) as usize + 1)?;
    let admissibility = check_admissibility(&nw, &config.admissibility_offsets, &scan_grid, &AdmissibilityConfig::default())?;
    if !admissibility.pass {
        let reason = admissibility
            .probes
            .iter()
            .filter_map(|p| p.diagnostic.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(WhError::InvalidWeight { x: f64::NAN, reason: format!("‖W(·)‖ is not admissible: {reason}") });
    }
    let strip = StripSpec::from_weight(&nw, p, config.levels)?;
    let space = SpaceSpec::Lp { p, weight: nw };

    let (_, reach, h) = kernel_window(t, config.probe_grid.step());
    let basis: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..d).map(move |k| (j, k))).collect();
    let kernels = basis
        .par_iter()
        .map(|&(j, k)| recover_scalarized_kernel(t, &unit(d, k), &unit(d, j), &space).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    if (h - config.probe_grid.step()).abs() > 1e-12 * h {
        return Err(WhError::InvalidGrid("probe grid step must match the kernel step".into()));
    }
    let len = fft_friendly(kernels[0].len() + config.probe_grid.count());
    // Probe supports stop `reach` short of the grid end so `T F` stays on the grid.
    let room = (reach.max(0.0) / h).ceil() as usize + 1;
    let inner_count = config.probe_grid.count().checked_sub(room).filter(|&n| n >= 16).ok_or(WhError::GridTooSmall {
        required: reach,
        available: config.probe_grid.span(),
    })?;
    let probes = random_vector_probes(&config.probe_grid.with_count(inner_count)?, d, config.probes, config.seed)?
        .into_iter()
        .map(|f| f.map_components(|c| c.truncated(config.probe_grid.count())))
        .collect::<Result<Vec<_>>>()?;

    let mut symbols = Vec::with_capacity(strip.levels.len());
    let mut representation = Vec::with_capacity(strip.levels.len());
    let mut closed_form_error: Option<f64> = None;
    for &a in &strip.levels {
        let entries = kernels.iter().map(|k| kernel_symbol(k, a, len)).collect::<Result<Vec<_>>>()?;
        let symbol = OperatorSymbol::new(a, d, entries)?;
        if let VectorOperatorKind::Shift(s) = t.kind {
            let mut err = 0.0f64;
            for m in 0..symbol.len() {
                let expected = C64::new(s * a, -s * symbol.frequency(m)).exp();
                for j in 0..d {
                    for k in 0..d {
                        let target = if j == k { expected } else { ZERO };
                        err = err.max((symbol.entry(j, k).values()[m] - target).norm());
                    }
                }
            }
            closed_form_error = Some(closed_form_error.unwrap_or(0.0).max(err));
        }
        representation.push(vector_representation_check(t, &symbol, &probes, config.tolerance, config.seed)?);
        symbols.push(symbol);
    }

    let component_strips = w
        .diagonal_weights()
        .map(|ws| ws.iter().map(|cw| StripSpec::from_weight(&cw.clone().with_scan(config.scan), p, 1)).collect::<Result<Vec<_>>>())
        .transpose()?;
    let (intersection, strip_notice) = match &component_strips {
        None => (None, None),
        Some(strips) => {
            let lo = strips.iter().map(|s| s.a_min).fold(f64::NEG_INFINITY, f64::max);
            let hi = strips.iter().map(|s| s.a_max).fold(f64::INFINITY, f64::min);
            let all_equal = strips.iter().all(|s| (s.a_min - strips[0].a_min).abs() <= 1e-9 && (s.a_max - strips[0].a_max).abs() <= 1e-9);
            if lo > hi + 1e-9 {
                (None, Some(format!("component strips do not intersect (max a_min = {lo}, min a_max = {hi})")))
            } else if !all_equal {
                (Some((lo, hi)), Some(format!("component strips differ; common strip [{lo}, {hi}]")))
            } else {
                (Some((lo, hi)), None)
            }
        }
    };
    let pass = representation.iter().all(|r| r.pass) && closed_form_error.is_none_or(|e| e <= 1e-6);
    Ok(VectorPipelineReport {
        operator: t.name(),
        weight: w.name(),
        strip,
        admissibility,
        representation,
        closed_form_error,
        component_strips,
        intersection,
        strip_notice,
        pass,
        symbols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{commutation_defect, random_probes};
    use crate::symbol::{operator_symbol, verify_representation};

    fn l2() -> SpaceSpec {
        SpaceSpec::unweighted_l2()
    }

    /// Probes on `[0, span]` carried onto a grid with `room` extra length.
    fn padded(probes: Vec<SampledFunction>, room: f64) -> Vec<SampledFunction> {
        probes
            .into_iter()
            .map(|f| {
                let extra = (room / f.grid().step()).round() as usize;
                f.truncated(f.len() + extra).unwrap()
            })
            .collect()
    }

    fn padded_vec(probes: Vec<VectorFunction>, room: f64) -> Vec<VectorFunction> {
        probes
            .into_iter()
            .map(|f| VectorFunction::new(padded(f.components().to_vec(), room)).unwrap())
            .collect()
    }

    #[test]
    fn diagonal_scalarisations() {
        let h = 0.01;
        let phi = gaussian_kernel(0.0, 0.5, h).unwrap();
        let psi = gaussian_kernel(0.5, 0.3, h).unwrap();
        let t = VectorOperator::kernel(MatrixKernel::diagonal(vec![phi.clone(), psi]).unwrap());
        let grid = Grid::new(0.0, h, 1001).unwrap();
        let probes = padded(random_probes(&grid, 3, 1).unwrap(), 6.0);
        let s11 = scalarize(&t, &unit(2, 0), &unit(2, 0), l2()).unwrap();
        let s12 = scalarize(&t, &unit(2, 0), &unit(2, 1), l2()).unwrap();
        let scalar = WienerHopfOperator::kernel(phi, l2());
        for f in &probes {
            let a = apply_wh(&s11, f).unwrap();
            let b = apply_wh(&scalar, f).unwrap();
            assert!(a.sub(&b).unwrap().max_abs() <= 1e-13);
            assert_eq!(apply_wh(&s12, f).unwrap().max_abs(), 0.0);
        }
        assert!(commutation_defect(&s11, &probes, &[0.5, 1.0]).unwrap() <= 1e-12);

        let shift = VectorOperator::shift(1.0, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_unit_vector(3, &mut rng);
        let su = scalarize(&shift, &u, &u, l2()).unwrap();
        for f in &probes {
            let a = apply_wh(&su, f).unwrap();
            let b = apply_shift_fixed(f, 1.0).unwrap();
            assert!(a.sub(&b).unwrap().max_abs() <= 1e-14);
        }
    }

    #[test]
    fn scalarisation_is_bilinear_and_recovers_combined_kernel() {
        let h = 0.01;
        let k = MatrixKernel::random(3, h, 5).unwrap();
        let t = VectorOperator::kernel(k.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (u, u2, v) = (random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng));
        let alpha = C64::new(0.3, -1.2);
        let mix: Vec<C64> = u.iter().zip(&u2).map(|(a, b)| alpha * a + b).collect();
        let grid = Grid::new(0.0, h, 1201).unwrap();
        let f = &padded(random_probes(&grid, 1, 3).unwrap(), 10.0)[0];
        let lhs = apply_wh(&scalarize(&t, &mix, &v, l2()).unwrap(), f).unwrap();
        let rhs = apply_wh(&scalarize(&t, &u, &v, l2()).unwrap(), f)
            .unwrap()
            .combine(alpha, &apply_wh(&scalarize(&t, &u2, &v, l2()).unwrap(), f).unwrap(), C64::new(1.0, 0.0))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10 * lhs.max_abs());
        // Conjugate-linear in v.
        let v2: Vec<C64> = v.iter().map(|z| alpha * z).collect();
        let lv = apply_wh(&scalarize(&t, &u, &v2, l2()).unwrap(), f).unwrap();
        let rv = apply_wh(&scalarize(&t, &u, &v, l2()).unwrap(), f).unwrap().scaled(alpha.conj()).unwrap();
        assert!(lv.sub(&rv).unwrap().max_abs() <= 1e-10 * lv.max_abs());

        let (recovered, stationary) = recover_scalarized_kernel(&t, &u, &v, &l2()).unwrap();
        assert!(stationary);
        let combined = k.scalarized(&u, &v).unwrap();
        let diff = recovered.sub(&combined).unwrap();
        assert!(diff.max_abs() <= 1e-3 * combined.max_abs());
    }

    #[test]
    fn symbol_identity_and_representation_for_random_kernel() {
        let h = 0.01;
        let t = VectorOperator::kernel(MatrixKernel::random(3, h, 21).unwrap());
        let grid = Grid::new(0.0, h, 2201).unwrap();
        let strip = StripSpec::new(-1.0, 1.0, 3).unwrap();
        let symbol = vector_operator_symbol(&t, 0.5, &strip, &grid).unwrap();
        let id = scalarization_identity(&t, &symbol, &l2()).unwrap();
        assert_eq!(id.pairs.len(), 9);
        assert!(id.max_error <= 1e-8, "{id:?}");

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (u, v) = (random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng));
            let nu = kernel_symbol(&match &t.kind {
                VectorOperatorKind::Kernel(k) => k.scalarized(&u, &v).unwrap(),
                _ => unreachable!(),
            }, 0.5, symbol.len())
            .unwrap();
            for m in (0..symbol.len()).step_by(17) {
                assert!((symbol.pairing(m, &u, &v) - nu.values()[m]).norm() <= 1e-6);
            }
        }

        let probes = padded_vec(random_vector_probes(&Grid::new(0.0, h, 1201).unwrap(), 3, 3, 8).unwrap(), 10.0);
        let r = vector_representation_check(&t, &symbol, &probes, 1e-5, 1).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn elementary_probe_matches_scalar_check() {
        let h = 0.01;
        let t = VectorOperator::kernel(MatrixKernel::random(2, h, 3).unwrap());
        let grid = Grid::new(0.0, h, 1001).unwrap();
        let f = &padded(random_probes(&grid, 1, 6).unwrap(), 10.0)[0];
        let grid = *f.grid();
        let strip = StripSpec::new(-1.0, 1.0, 3).unwrap();
        let symbol = vector_operator_symbol(&t, -0.4, &strip, &grid).unwrap();
        let u = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let vector = vector_representation_check(&t, &symbol, &[VectorFunction::elementary(f, &u).unwrap()], 1e-5, 0).unwrap();
        for j in 0..2 {
            let v = unit(2, j);
            let scalar_op = scalarize(&t, &u, &v, l2()).unwrap();
            let combined = match &t.kind {
                VectorOperatorKind::Kernel(k) => k.scalarized(&u, &v).unwrap(),
                _ => unreachable!(),
            };
            let nu = kernel_symbol(&combined, -0.4, symbol.len()).unwrap();
            for m in (0..symbol.len()).step_by(11) {
                assert!((symbol.pairing(m, &u, &v) - nu.values()[m]).norm() <= 1e-10);
            }
            let r = verify_representation(&scalar_op, &nu, -0.4, std::slice::from_ref(f), 1e-5).unwrap();
            assert!(r.pass);
        }
        assert!(vector.pass);
    }

    #[test]
    fn identity_kernel_gives_scalar_times_identity() {
        let h = 0.01;
        let phi = gaussian_kernel(0.2, 0.4, h).unwrap();
        let zero = SampledFunction::zeros(*phi.grid());
        let k = MatrixKernel::new(2, vec![phi.clone(), zero.clone(), zero, phi.clone()]).unwrap();
        let strip = StripSpec::new(0.0, 0.0, 1).unwrap();
        let v = vector_symbol(&k, 0.0, &strip, 4096).unwrap();
        let nu = kernel_symbol(&phi, 0.0, 4096).unwrap();
        for m in 0..4096 {
            assert_eq!(v.entry(0, 0).values()[m], nu.values()[m]);
            assert_eq!(v.entry(1, 0).values()[m], ZERO);
        }
        let zero_op = VectorOperator::kernel(MatrixKernel::new(1, vec![SampledFunction::zeros(*phi.grid())]).unwrap());
        let grid = Grid::new(0.0, h, 501).unwrap();
        let zs = vector_operator_symbol(&zero_op, 0.0, &strip, &grid).unwrap();
        let probes = random_vector_probes(&grid, 1, 2, 1).unwrap();
        let r = vector_representation_check(&zero_op, &zs, &probes, 1e-5, 0).unwrap();
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn vector_radii_match_scalar() {
        for (w, d) in [(Weight::constant(), 4), (Weight::exponential(1.0), 3), (Weight::dyadic_zigzag(1.0), 2), (Weight::dyadic_zigzag(1.0), 5)] {
            let r = vector_spectral_radius(&w, 2.0, d, 3).unwrap();
            assert!(r.agree, "{r:?}");
            assert!((r.forward - r.scalar_forward).abs() <= 1e-6 * r.scalar_forward);
        }
        let e = vector_spectral_radius(&Weight::exponential(1.0), 2.0, 3, 0).unwrap();
        assert!((e.forward - 1f64.exp()).abs() <= 1e-10 && (e.backward - (-1f64).exp()).abs() <= 1e-10);
    }

    #[test]
    fn rank_truncation_is_exact_at_full_rank() {
        let grid = Grid::new(0.0, 0.05, 401).unwrap();
        let f = &random_vector_probes(&grid, 3, 1, 12).unwrap()[0];
        let errs: Vec<f64> = (0..=3)
            .map(|r| {
                let g = f.rank_truncation(r).unwrap();
                f.combine(C64::new(1.0, 0.0), &g, C64::new(-1.0, 0.0)).unwrap().norm(&l2()).unwrap()
            })
            .collect();
        assert!(errs.windows(2).all(|p| p[1] <= p[0] + 1e-12));
        assert!(errs[3] <= 1e-12 * errs[0]);
    }

    #[test]
    fn operator_weight_norms() {
        let grid = Grid::new(0.0, 0.02, 1001).unwrap();
        let f = &random_vector_probes(&grid, 5, 1, 2).unwrap()[0];
        let id = OperatorWeight::Scalar { dim: 5, weight: Weight::constant() };
        let plain = f.norm(&SpaceSpec::Lp { p: 3.0, weight: Weight::constant() }).unwrap();
        assert!((operator_weight_norm(f, &id, 3.0).unwrap() - plain).abs() <= 1e-12 * plain);

        let w = OperatorWeight::five_by_five();
        let decaying = f.map_components(|c| c.map(|x, v| v * (-4.0 * x).exp())).unwrap();
        assert!(operator_weight_norm(&decaying, &w, 2.0).unwrap().is_finite());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nw = w.norm_weight();
        for _ in 0..5 {
            let u = random_unit_vector(5, &mut rng);
            let s = &random_probes(&grid, 1, rng.random()).unwrap()[0];
            let lhs = operator_weight_norm(&VectorFunction::elementary(s, &u).unwrap(), &w, 2.0).unwrap();
            let rhs = crate::spaces::lp_norm(s, 2.0, &nw).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn five_by_five_shift_symbol_is_scalar() {
        let t = VectorOperator::shift(1.0, 5);
        let config = VectorPipelineConfig {
            probe_grid: Grid::new(0.0, 0.01, 1001).unwrap(),
            probes: 2,
            ..VectorPipelineConfig::default()
        };
        let r = vector_symbol_pipeline(&t, &OperatorWeight::five_by_five(), 2.0, &config).unwrap();
        assert!(r.admissibility.pass);
        assert!((r.strip.a_min - 3.0).abs() < 1e-2 && (r.strip.a_max - 3.0).abs() < 1e-2, "{:?}", r.strip);
        assert!(r.closed_form_error.unwrap() <= 1e-6);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn scalar_weight_pipeline_reduces_to_scalar_symbol() {
        let h = 0.01;
        let phi = gaussian_kernel(0.3, 0.5, h).unwrap();
        let t = VectorOperator::kernel(MatrixKernel::diagonal(vec![phi.clone(), phi.clone()]).unwrap());
        let w = OperatorWeight::Scalar { dim: 2, weight: Weight::dyadic_zigzag(1.0) };
        let config = VectorPipelineConfig {
            probe_grid: Grid::new(0.0, h, 801).unwrap(),
            probes: 2,
            levels: 3,
            ..VectorPipelineConfig::default()
        };
        let r = vector_symbol_pipeline(&t, &w, 2.0, &config).unwrap();
        assert!(r.pass);
        let scalar = WienerHopfOperator::kernel(phi, SpaceSpec::l2(Weight::dyadic_zigzag(1.0)));
        for s in &r.symbols {
            let nu = operator_symbol(&scalar, s.a, &r.strip, &config.probe_grid).unwrap();
            assert_eq!(nu.len(), s.len());
            for m in 0..nu.len() {
                assert!((s.entry(1, 1).values()[m] - nu.values()[m]).norm() <= 1e-8);
            }
        }
        assert!(r.strip_notice.is_none());
    }

    #[test]
    fn diagonal_weight_flags_disjoint_strips() {
        let h = 0.01;
        let phi = gaussian_kernel(0.0, 0.3, h).unwrap();
        let t = VectorOperator::kernel(MatrixKernel::diagonal(vec![phi.clone(), phi]).unwrap());
        let w = OperatorWeight::diagonal(vec![WeightEntry::exp(1.0), WeightEntry::constant(1.0)]).unwrap();
        let config = VectorPipelineConfig {
            probe_grid: Grid::new(0.0, h, 601).unwrap(),
            probes: 1,
            levels: 1,
            ..VectorPipelineConfig::default()
        };
        let r = vector_symbol_pipeline(&t, &w, 2.0, &config).unwrap();
        let strips = r.component_strips.as_ref().unwrap();
        assert!((strips[0].a_min - 1.0).abs() < 1e-6 && strips[1].a_max.abs() < 1e-6);
        assert!(r.intersection.is_none() && r.strip_notice.is_some());
    }

    #[test]
    fn vector_annulus_agrees_with_scalar() {
        let w = Weight::dyadic_zigzag(1.0);
        let space = SpaceSpec::l2(w.clone());
        let bounds = AnnulusBounds::from_weight(&w, 2.0);
        let ladder = WindowLadder::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = random_unit_vector(2, &mut rng);
        for lambda in [C64::from_polar(1.0, 1.0), C64::new(0.2, 0.0), C64::new(3.5, 0.0)] {
            let s = annulus_certificate(lambda, &space, &bounds, &ladder).unwrap();
            let v = vector_annulus_certificate(lambda, &space, 2, &bounds, &ladder, &u).unwrap();
            assert_eq!(s.status(), v.status());
            assert!((s.value() - v.value()).abs() <= 1e-9 * s.value() + 1e-14, "{} {}", s.value(), v.value());
        }
    }
}
