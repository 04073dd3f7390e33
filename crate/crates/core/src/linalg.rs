//! Small linear-algebra kernels: matrix-free operators, Lanczos for the
//! largest singular value, and Hermitian tridiagonal eigen-solvers.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gridfn::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// A matrix known only through its action and the action of its adjoint.
pub trait LinearOp {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
    fn apply_adjoint(&self, y: &[C64]) -> Vec<C64>;
}

impl LinearOp for DMatrix<C64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows()];
        for (j, xj) in x.iter().enumerate() {
            if *xj == ZERO {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += self[(i, j)] * xj;
            }
        }
        y
    }

    fn apply_adjoint(&self, y: &[C64]) -> Vec<C64> {
        (0..self.ncols())
            .map(|j| (0..self.nrows()).map(|i| self[(i, j)].conj() * y[i]).sum())
            .collect()
    }
}

/// `M_ij = h · φ[i - j + offset] · exp(lo_i - li_j)` for `0 ≤ i - j + offset < taps`.
///
/// This is a convolution-truncation operator written in weighted
/// coordinates `u = √h·ω·f`. Weight ratios are formed block by block
/// against a local reference, so the individual weights may exceed the
/// floating-point range.
#[derive(Clone, Debug)]
pub struct BandedWeighted {
    pub taps: Vec<C64>,
    pub offset: isize,
    pub step: f64,
    pub log_in: Vec<f64>,
    pub log_out: Vec<f64>,
}

const BLOCK: usize = 64;

impl BandedWeighted {
    fn col_range(&self, i0: usize, i1: usize) -> (usize, usize) {
        let k = self.taps.len() as isize;
        let lo = (i0 as isize + self.offset - k + 1).max(0);
        let hi = (i1 as isize - 1 + self.offset + 1).min(self.log_in.len() as isize);
        (lo as usize, hi.max(lo) as usize)
    }

    fn row_range(&self, j0: usize, j1: usize) -> (usize, usize) {
        let k = self.taps.len() as isize;
        let lo = (j0 as isize - self.offset).max(0);
        let hi = (j1 as isize - 1 - self.offset + k).min(self.log_out.len() as isize);
        (lo as usize, hi.max(lo) as usize)
    }
}

impl LinearOp for BandedWeighted {
    fn nrows(&self) -> usize {
        self.log_out.len()
    }

    fn ncols(&self) -> usize {
        self.log_in.len()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.nrows();
        let k = self.taps.len() as isize;
        let mut y = vec![ZERO; n];
        let mut scaled = Vec::new();
        for i0 in (0..n).step_by(BLOCK) {
            let i1 = (i0 + BLOCK).min(n);
            let (j0, j1) = self.col_range(i0, i1);
            if j0 >= j1 {
                continue;
            }
            let r = self.log_out[i0];
            scaled.clear();
            scaled.extend((j0..j1).map(|j| x[j] * (r - self.log_in[j]).exp()));
            for i in i0..i1 {
                // taps index t = i - j + offset
                let jmin = (i as isize + self.offset - k + 1).max(j0 as isize);
                let jmax = (i as isize + self.offset).min(j1 as isize - 1);
                let mut acc = ZERO;
                for j in jmin..=jmax {
                    let t = (i as isize - j + self.offset) as usize;
                    acc += self.taps[t] * scaled[(j - j0 as isize) as usize];
                }
                y[i] = acc * (self.step * (self.log_out[i] - r).exp());
            }
        }
        y
    }

    fn apply_adjoint(&self, y: &[C64]) -> Vec<C64> {
        let m = self.ncols();
        let k = self.taps.len() as isize;
        let mut x = vec![ZERO; m];
        let mut scaled = Vec::new();
        for j0 in (0..m).step_by(BLOCK) {
            let j1 = (j0 + BLOCK).min(m);
            let (i0, i1) = self.row_range(j0, j1);
            if i0 >= i1 {
                continue;
            }
            let r = self.log_in[j0];
            scaled.clear();
            scaled.extend((i0..i1).map(|i| y[i] * (self.log_out[i] - r).exp()));
            for j in j0..j1 {
                let imin = (j as isize - self.offset).max(i0 as isize);
                let imax = (j as isize - self.offset + k - 1).min(i1 as isize - 1);
                let mut acc = ZERO;
                for i in imin..=imax {
                    let t = (i - j as isize + self.offset) as usize;
                    acc += self.taps[t].conj() * scaled[(i - i0 as isize) as usize];
                }
                x[j] = acc * (self.step * (r - self.log_in[j]).exp());
            }
        }
        x
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LanczosResult {
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of `op` by Lanczos on `op*·op` with full
/// reorthogonalisation. Ritz values increase monotonically toward the true
/// value, so the estimate is always a lower bound.
pub fn largest_singular_value(op: &dyn LinearOp, max_iter: usize, tol: f64, seed: u64) -> LanczosResult {
    let n = op.ncols();
    if n == 0 || op.nrows() == 0 {
        return LanczosResult {
            sigma: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let q_norm = norm(&q);
    q.iter_mut().for_each(|z| *z /= q_norm);

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut prev = 0.0;
    let mut stable = 0;
    let steps = max_iter.min(n);
    for it in 0..steps {
        let mut w = op.apply_adjoint(&op.apply(&q));
        let a = dot(&q, &w).re;
        basis.push(q.clone());
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let top = tridiagonal_eigenvalue(&alpha, &beta, alpha.len() - 1);
        let bnorm = norm(&w);
        if prev > 0.0 && (top - prev).abs() <= tol * top {
            stable += 1;
        } else {
            stable = 0;
        }
        prev = top;
        if stable >= 3 || bnorm <= 1e-14 * top.abs().max(1e-300) {
            return LanczosResult {
                sigma: top.max(0.0).sqrt(),
                iterations: it + 1,
                converged: true,
            };
        }
        beta.push(bnorm);
        q = w.into_iter().map(|z| z / bnorm).collect();
    }
    LanczosResult {
        sigma: prev.max(0.0).sqrt(),
        iterations: steps,
        converged: steps == n,
    }
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal
/// matrix with diagonal `d` and squared off-diagonal `e2`.
pub fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e2[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of a real symmetric tridiagonal
/// matrix given by diagonal `d` and off-diagonal `e`, by bisection.
pub fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let e2: Vec<f64> = e.iter().map(|x| x * x).collect();
    sturm_eigenvalue(d, &e2, k)
}

fn sturm_eigenvalue(d: &[f64], e2: &[f64], k: usize) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e2[i - 1].sqrt() } else { 0.0 };
        let right = if i + 1 < n { e2[i].sqrt() } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    let pad = 1e-14 * lo.abs().max(hi.abs()).max(1e-300);
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if sturm_count(d, e2, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Hermitian tridiagonal matrix with real diagonal `d` and complex
/// super-diagonal `e` (`A[i][i+1] = e[i]`, `A[i+1][i] = conj(e[i])`).
#[derive(Clone, Debug)]
pub struct HermitianTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<C64>,
}

impl HermitianTridiagonal {
    /// Smallest eigenvalue and a unit eigenvector.
    ///
    /// The eigenvalue comes from Sturm bisection on the unitarily similar
    /// real matrix with off-diagonal `|e|`; the vector from inverse
    /// iteration on that real matrix, rotated back by the accumulated phases.
    pub fn smallest_eigenpair(&self) -> (f64, Vec<C64>) {
        let n = self.d.len();
        let mags: Vec<f64> = self.e.iter().map(|z| z.norm()).collect();
        let e2: Vec<f64> = mags.iter().map(|x| x * x).collect();
        let lambda = sturm_eigenvalue(&self.d, &e2, 0);

        // Inverse iteration on T - μ with μ just below λ.
        let scale = self.d.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let mu = lambda - 1e-10 * scale;
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..4 {
            let mut w = thomas_solve(&self.d, &mags, mu, &v);
            let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(nw.is_finite() && nw > 0.0) {
                break;
            }
            w.iter_mut().for_each(|x| *x /= nw);
            v = w;
        }
        // A = D·R·D* with D_{i+1} = D_i·conj(e_i)/|e_i|.
        let mut phase = C64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(phase * v[i]);
            if i + 1 < n && mags[i] > 0.0 {
                phase *= self.e[i].conj() / mags[i];
            }
        }
        (lambda, out)
    }
}

/// Solves `(T - μ)x = b` for real symmetric tridiagonal `T` (diagonal `d`,
/// off-diagonal `e`) by the Thomas algorithm.
fn thomas_solve(d: &[f64], e: &[f64], mu: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let tiny = 1e-300;
    let mut piv = d[0] - mu;
    if piv.abs() < tiny {
        piv = tiny;
    }
    if n > 1 {
        c[0] = e[0] / piv;
    }
    y[0] = b[0] / piv;
    for i in 1..n {
        piv = d[i] - mu - e[i - 1] * c[i - 1];
        if piv.abs() < tiny {
            piv = tiny;
        }
        if i + 1 < n {
            c[i] = e[i] / piv;
        }
        y[i] = (b[i] - e[i - 1] * y[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

/// Largest singular value of a dense matrix.
pub fn dense_largest_singular_value(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_bisection_matches_closed_form() {
        // Second-difference matrix: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 50;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        for k in [0, 7, n - 1] {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((tridiagonal_eigenvalue(&d, &e, k) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn smallest_eigenpair_with_complex_offdiagonal() {
        let n = 40;
        let d = vec![2.0; n];
        let e: Vec<C64> = (0..n - 1).map(|i| C64::from_polar(1.0, 0.3 * i as f64)).collect();
        let t = HermitianTridiagonal { d: d.clone(), e: e.clone() };
        let (lambda, v) = t.smallest_eigenpair();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos();
        assert!((lambda - exact).abs() < 1e-12);
        // Residual of A v = λ v.
        let mut res = 0.0f64;
        for i in 0..n {
            let mut av = d[i] * v[i];
            if i + 1 < n {
                av += e[i] * v[i + 1];
            }
            if i > 0 {
                av += e[i - 1].conj() * v[i - 1];
            }
            res = res.max((av - lambda * v[i]).norm());
        }
        assert!(res < 1e-9, "{res}");
    }

    #[test]
    fn banded_operator_matches_dense_and_adjoint() {
        let taps: Vec<C64> = (0..7).map(|k| C64::new(1.0 + k as f64, 0.5 - k as f64)).collect();
        let log_in: Vec<f64> = (0..150).map(|j| 0.3 * j as f64).collect();
        let log_out: Vec<f64> = (0..140).map(|i| 0.3 * i as f64 - 1.0).collect();
        let op = BandedWeighted {
            taps: taps.clone(),
            offset: 2,
            step: 0.1,
            log_in: log_in.clone(),
            log_out: log_out.clone(),
        };
        let dense = DMatrix::from_fn(140, 150, |i, j| {
            let t = i as isize - j as isize + 2;
            if (0..7).contains(&t) {
                taps[t as usize] * 0.1 * (log_out[i] - log_in[j]).exp()
            } else {
                ZERO
            }
        });
        let x: Vec<C64> = (0..150).map(|j| C64::new((j as f64).sin(), (j as f64 * 0.7).cos())).collect();
        let y: Vec<C64> = (0..140).map(|i| C64::new((i as f64 * 0.3).cos(), 1.0)).collect();
        let a = op.apply(&x);
        let b = LinearOp::apply(&dense, &x);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() <= 1e-12 * q.norm().max(1.0));
        }
        let a = op.apply_adjoint(&y);
        let b = LinearOp::apply_adjoint(&dense, &y);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() <= 1e-12 * q.norm().max(1.0));
        }
    }

    #[test]
    fn lanczos_matches_dense_svd() {
        let m = DMatrix::from_fn(60, 50, |i, j| C64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, (i as f64 - j as f64) / 10.0));
        let dense = dense_largest_singular_value(&m);
        let lz = largest_singular_value(&m, 50, 1e-13, 1);
        assert!((lz.sigma - dense).abs() < 1e-9 * dense);
    }
}
