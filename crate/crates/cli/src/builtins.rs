//! Text for `whlab list-builtins`.

pub fn builtins_text() -> String {
    let sections: [(&str, &[(&str, &str)]); 6] = [
        (
            "weight families (space.weight.family)",
            &[
                ("constant", "ω(x) = 1"),
                ("power", "ω(x) = (1 + x)^alpha; params: alpha"),
                ("exponential", "ω(x) = e^{beta x}; params: beta"),
                ("capped_exponential", "ω(x) = e^{beta min(x, cap)}; params: beta, cap > 0"),
                ("dyadic_zigzag", "ω(x) = e^{beta s(x)}, s slope ±1 on blocks [2^k, 2^{k+1}); params: beta"),
            ],
        ),
        (
            "orlicz families (space.orlicz.family)",
            &[
                ("orlicz:power", "A(y) = y^p; params: p ≥ 1"),
                ("orlicz:exp_minus_one", "A(y) = e^y - 1"),
                ("orlicz:y_log_one_plus_y", "A(y) = y ln(1 + y)"),
            ],
        ),
        (
            "operators (operator.kind)",
            &[
                ("gaussian", "kernel N(centre, width²); params: centre, width"),
                ("bump", "smooth unit-mass bump; params: centre, radius"),
                ("mollified_delta", "narrow bump; params: at, width"),
                ("delta", "discrete point mass at a grid node; params: at"),
                ("shift", "translation S_by; params: by (multiple of the grid step)"),
                ("identity", "discrete point mass at 0"),
                ("samples", "kernel from CSV `x,re,im`; params: path"),
            ],
        ),
        (
            "matrix operators (experiment.matrix.kind)",
            &[
                ("random_kernel", "random Gaussian entries; params: seed"),
                ("diagonal_kernel", "the scalar operator kernel on the diagonal"),
                ("shift", "componentwise translation; params: by"),
            ],
        ),
        (
            "matrix weights (experiment.weight.kind)",
            &[
                ("scalar", "ω·Identity with ω from space.weight"),
                ("five_by_five", "built-in 5×5 weight with entries in {1, x, 1+x, x²/2, e^x, e^{2x}, e^{3x}}"),
                ("diagonal", "params: entries [{poly, rate}]"),
                ("matrix", "row-major dim×dim; params: entries [{poly, rate}]"),
            ],
        ),
        (
            "experiments (experiment.kind)",
            &[
                ("symbol", "symbols on the strip with representation, analyticity and strip-bound verdicts; params: levels, probes, band, controls"),
                ("annulus", "inside/outside certificates on a polar λ-lattice; params: radii, angles, dim"),
                ("cutoff", "concentrated cut-off function; params: epsilon, eta0, delta, c0"),
                ("inclusion", "approximate eigenvectors at φ̂(α); params: alphas [[re, im]]"),
                ("vector-symbol", "operator-valued symbol on L^p_W; params: dim, matrix, weight, levels, probes"),
                ("weights-report", "admissibility, radii, Orlicz consistency; params: offsets, expect, orlicz_powers, functions, vector_dims"),
            ],
        ),
    ];
    let mut out = String::new();
    for (title, items) in sections {
        out.push_str(title);
        out.push('\n');
        for (name, doc) in items {
            out.push_str(&format!("  {name:<26}{doc}\n"));
        }
        out.push('\n');
    }
    out
}
