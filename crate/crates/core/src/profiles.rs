//! Smooth one-dimensional profiles used to build probes, windows and mollifiers.

/// `exp(-1/(t(1-t)))` on `(0, 1)`, zero elsewhere. C^∞ with compact support.
pub fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

/// C^∞ transition from 0 (`u ≤ 0`) to 1 (`u ≥ 1`).
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Degree-7 smoothstep `35t⁴ - 84t⁵ + 70t⁶ - 20t⁷`, clamped to `[0, 1]`.
/// Three derivatives vanish at both ends.
pub fn smoothstep7(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let t4 = t * t * t * t;
        t4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
    }
}

/// Plateau equal to 1 on `[start + ramp, end - ramp]`, rising and falling
/// with [`smoothstep7`] over `ramp`, zero outside `(start, end)`.
pub fn plateau(x: f64, start: f64, end: f64, ramp: f64) -> f64 {
    smoothstep7((x - start) / ramp) * smoothstep7((end - x) / ramp)
}

/// C^∞ plateau with [`smooth_step`] shoulders.
pub fn smooth_plateau(x: f64, start: f64, end: f64, ramp: f64) -> f64 {
    smooth_step((x - start) / ramp) * smooth_step((end - x) / ramp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep7_energy() {
        // ∫₀¹ S'(t)² dt = 1.632 (= 2.04·0.8).
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let t = (k as f64 + 0.5) * h;
            let d = 140.0 * t.powi(3) * (1.0 - t).powi(3);
            acc += d * d * h;
        }
        assert!((acc - 1.632).abs() < 1e-3, "{acc}");
        assert_eq!(smoothstep7(0.5), 0.5);
    }

    #[test]
    fn profiles_are_bounded_and_symmetric() {
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-15);
            assert!((smoothstep7(t) + smoothstep7(1.0 - t) - 1.0).abs() < 1e-12);
            assert!((bump(t) - bump(1.0 - t)).abs() < 1e-15);
        }
    }
}
