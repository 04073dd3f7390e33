//! The experiments behind `whlab run`.

use std::path::Path;

use serde_json::json;
use whlab::gridfn::{Grid, SampledFunction, C64};
use whlab::operators::{operator_norm, random_probes, spectral_radius, Direction, NormConfig, OperatorKind, WienerHopfOperator};
use whlab::spaces::{check_admissibility, luxemburg_norm, lp_norm, translation_norm, AdmissibilityConfig, OrliczFunction, SpaceSpec, Weight};
use whlab::spectra::{
    build_cutoff, certificate_batch, polar_lattice, separation_factor, symbol_spectrum_inclusion, AnnulusBounds, CertificateKind, CutoffRequest,
    InclusionConfig, SpectralCertificate, WindowLadder,
};
use whlab::symbol::{verify_analyticity, verify_representation, verify_strip_bound, AnalyticityConfig, LatticeSpec, StripSpec, SymbolTable};
use whlab::vector::{
    random_unit_vector, scalarization_identity, vector_spectral_radius, vector_symbol_pipeline, vectorize_certificate, MatrixKernel, OperatorSymbol,
    VectorOperator, VectorPipelineConfig,
};

use crate::config::{AnnulusParams, CutoffParams, Experiment, ExperimentConfig, InclusionParams, MatrixConfig, SchemaError, SymbolParams, VectorSymbolParams, WeightsReportParams};
use crate::report::{Outcome, Table, Verdict};

/// Failure of an experiment before it could produce verdicts.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Schema(#[from] SchemaError),
    #[error("{0}")]
    Numeric(#[from] whlab::WhError),
}

type RunResult = Result<Outcome, RunError>;

/// Runs the configured experiment. Numerical errors become a failed
/// `experiment_completed` verdict; configuration errors are returned.
pub fn run_experiment(config: &ExperimentConfig, base: &Path) -> Result<Outcome, SchemaError> {
    let result = match &config.experiment {
        Experiment::Symbol(p) => symbol(config, p, base),
        Experiment::Annulus(p) => annulus(config, p),
        Experiment::Cutoff(p) => cutoff(p),
        Experiment::Inclusion(p) => inclusion(config, p, base),
        Experiment::VectorSymbol(p) => vector_symbol(config, p, base),
        Experiment::WeightsReport(p) => weights_report(config, p),
    };
    match result {
        Ok(outcome) => Ok(outcome),
        Err(RunError::Schema(e)) => Err(e),
        Err(RunError::Numeric(e)) => Ok(Outcome {
            verdicts: vec![Verdict::holds("experiment_completed", false).with_detail(e.to_string())],
            details: json!({ "error": e.to_string() }),
            ..Outcome::default()
        }),
    }
}

fn label(a: f64) -> String {
    format!("{a:.6}")
}

/// Random probes on `grid` whose supports end `reach` before the grid end.
fn probes_with_room(grid: &Grid, count: usize, seed: u64, reach: f64) -> Result<Vec<SampledFunction>, RunError> {
    let room = (reach.max(0.0) / grid.step()).ceil() as usize + 2;
    let inner = grid.count().saturating_sub(room);
    if inner < 64 {
        return Err(SchemaError::at("/grid/span", format!("span {} leaves no room for probes past the kernel reach {reach}", grid.span())).into());
    }
    Ok(random_probes(&grid.with_count(inner)?, count, seed)?
        .into_iter()
        .map(|f| f.truncated(grid.count()))
        .collect::<whlab::Result<Vec<_>>>()?)
}

fn right_reach(t: &WienerHopfOperator) -> f64 {
    match &t.kind {
        OperatorKind::Kernel(phi) => phi.grid().end(),
        OperatorKind::Shift(s) => *s,
        OperatorKind::BlackBox { .. } => 0.0,
    }
}

fn build_operator(config: &ExperimentConfig, base: &Path) -> Result<WienerHopfOperator, RunError> {
    let op = config.operator.as_ref().ok_or_else(|| SchemaError::at("/operator", "missing operator"))?;
    Ok(op.build(config.grid.step, config.space_spec(), base)?)
}

fn operator_norm_of(t: &WienerHopfOperator) -> Result<f64, RunError> {
    Ok(match (&t.kind, t.space.weight()) {
        (OperatorKind::Shift(s), Some(w)) => translation_norm(w, 2.0, *s),
        _ => operator_norm(t, &NormConfig::default())?.value,
    })
}

// ---------------------------------------------------------------------------

const ANALYTICITY_LEVELS: usize = 17;

fn symbol(config: &ExperimentConfig, params: &SymbolParams, base: &Path) -> RunResult {
    let SymbolParams { levels, probes, band, controls } = *params;
    let tol = &config.tolerances;
    let grid = config.grid()?;
    let t = build_operator(config, base)?;
    let strip = StripSpec::from_weight(&config.weight(), config.p(), levels)?;
    let probe_set = probes_with_room(&grid, probes, config.seed, right_reach(&t))?;
    let norm = operator_norm_of(&t)?;
    let table = SymbolTable::build(&t, &strip, &grid, Some(norm))?;

    let mut out = Outcome::default();
    let mut rep_table = Table::new("representation", &["a", "probe", "residual"]);
    let mut reports = vec![];
    for level in &table.levels {
        let r = verify_representation(&t, &level.symbol, level.a, &probe_set, tol.representation)?;
        for (i, res) in r.residuals.iter().enumerate() {
            rep_table.push_numbers(&[level.a, i as f64, *res]);
        }
        out.verdicts.push(Verdict::at_most(format!("representation_residual[a={}]", label(level.a)), r.max_residual, tol.representation));
        reports.push(r);
    }
    out.tables.push(rep_table);

    let acfg = AnalyticityConfig {
        cross_level_tolerance: tol.cross_level,
        cauchy_riemann_tolerance: tol.cauchy_riemann,
        ..AnalyticityConfig::default()
    };
    // Finite differences across levels need a fine level spacing.
    let dense = if levels >= ANALYTICITY_LEVELS || strip.is_degenerate() {
        None
    } else {
        let dense_strip = StripSpec::from_weight(&config.weight(), config.p(), ANALYTICITY_LEVELS)?;
        Some(SymbolTable::build(&t, &dense_strip, &grid, Some(norm))?)
    };
    let analytic_table = dense.as_ref().unwrap_or(&table);
    let analyticity = verify_analyticity(analytic_table, &acfg)?;
    match &analyticity.skipped {
        Some(reason) => out.notes.push(format!("analyticity not checked: {reason}")),
        None => {
            if let Some(v) = analyticity.cross_level_residual {
                out.verdicts.push(Verdict::at_most("analyticity_cross_level", v, tol.cross_level));
            }
            if let Some(v) = analyticity.cauchy_riemann_residual {
                out.verdicts.push(Verdict::at_most("analyticity_cauchy_riemann", v, tol.cauchy_riemann));
            }
        }
    }

    let mut strip_bound = None;
    if let (OperatorKind::Kernel(phi), true) = (&t.kind, t.space.is_hilbert()) {
        let sb = verify_strip_bound(phi, &strip, norm, &LatticeSpec::default())?;
        out.verdicts.push(Verdict::at_most("strip_bound_ratio", sb.ratio, 1.0 + 1e-3).with_detail(format!("{} lattice points", sb.points)));
        if config.weight().is_constant() {
            let sup = table.levels[0].sup;
            out.verdicts.push(Verdict::at_most("strip_bound_tightness", (sup - norm).abs() / norm, 1e-3));
        }
        strip_bound = Some(sb);
    }

    if controls {
        let level = &table.levels[table.levels.len() / 2];
        let corrupted = level.symbol.map(|xi, v| v * C64::new(1.0 + 0.01 * xi.cos(), 0.0))?;
        let r = verify_representation(&t, &corrupted, level.a, &probe_set, tol.representation)?;
        out.verdicts.push(
            Verdict::holds("control_corrupted_symbol_rejected", !r.pass)
                .with_detail(format!("corrupted symbol residual {:e} against tolerance {:e}", r.max_residual, tol.representation)),
        );
        if analyticity.skipped.is_some() {
            out.notes.push("non-analytic control needs at least three levels of a non-degenerate strip".into());
        } else {
            let c = verify_analyticity(&analytic_table.conjugated()?, &acfg)?;
            out.verdicts.push(Verdict::holds("control_non_analytic_table_rejected", !c.pass).with_detail(format!(
                "conjugated table: cross-level {:?}, Cauchy-Riemann {:?}",
                c.cross_level_residual, c.cauchy_riemann_residual
            )));
        }
    }

    for (k, _) in table.levels.iter().enumerate() {
        let mut tt = Table::new(format!("symbol_level_{k}"), &["xi", "re", "im"]);
        for r in table.level_rows(k, Some(band)) {
            tt.push_numbers(&r);
        }
        out.tables.push(tt);
        let mut pt = Table::new(format!("symbol_level_{k}"), &["xi", "abs", "arg"]);
        for r in table.plot_rows(k, Some(band)) {
            pt.push_numbers(&r);
        }
        out.plotdata.push(pt);
    }
    out.details = json!({
        "operator": t.name(),
        "space": t.space.describe(),
        "strip": strip,
        "operator_norm": norm,
        "levels": table.levels,
        "representation": reports,
        "analyticity": analyticity,
        "strip_bound": strip_bound,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------

/// `0.8·inner, inner, three geometric interior radii, outer, 1.2·outer`.
pub fn default_radii(bounds: &AnnulusBounds) -> Vec<f64> {
    let (lo, hi) = (bounds.inner(), bounds.outer());
    if hi <= lo * (1.0 + 1e-9) {
        return vec![0.8 * lo, lo, 1.2 * hi];
    }
    let mut r = vec![0.8 * lo, lo];
    for k in 1..=3 {
        r.push(lo * (hi / lo).powf(k as f64 / 4.0));
    }
    r.extend([hi, 1.2 * hi]);
    r
}

fn annulus(config: &ExperimentConfig, params: &AnnulusParams) -> RunResult {
    let AnnulusParams { radii, angles, dim } = params;
    let tol = &config.tolerances;
    let w = config.weight();
    let space = config.space_spec();
    let bounds = AnnulusBounds::from_weight(&w, config.p());
    let radii = radii.clone().unwrap_or_else(|| default_radii(&bounds));
    let lambdas = polar_lattice(&radii, *angles);
    let ladder = WindowLadder::default();
    let certs = certificate_batch(&lambdas, &space, &bounds, &ladder)?;

    let mut out = Outcome::default();
    let should_be_inside = |c: &SpectralCertificate| c.modulus > 0.0 && bounds.contains(c.modulus);
    let inside: Vec<&SpectralCertificate> = certs.iter().filter(|c| should_be_inside(c)).collect();
    let outside: Vec<&SpectralCertificate> = certs.iter().filter(|c| c.modulus > 0.0 && !should_be_inside(c)).collect();
    let uncharacterised = certs.len() - inside.len() - outside.len();
    if uncharacterised > 0 {
        out.notes.push(format!("{uncharacterised} point(s) at λ = 0 are outside the characterised set and carry no verdict"));
    }
    if !inside.is_empty() {
        let missing = inside.iter().filter(|c| !matches!(c.kind, CertificateKind::Inside { .. })).count();
        out.verdicts.push(Verdict::none_of("inside_points_certified", missing));
        let worst = inside.iter().map(|c| if matches!(c.kind, CertificateKind::Inside { .. }) { c.value() } else { f64::INFINITY }).fold(0.0, f64::max);
        out.verdicts.push(Verdict::at_most("inside_residual_max", worst, tol.inside_residual));
    }
    if !outside.is_empty() {
        let missing = outside.iter().filter(|c| !matches!(c.kind, CertificateKind::Outside { .. })).count();
        out.verdicts.push(Verdict::none_of("outside_points_certified", missing));
    }
    let separation = separation_factor(&certs);
    if let Some(s) = separation {
        out.verdicts.push(Verdict::at_least("separation_factor", s, tol.separation));
    }

    let vector = if *dim > 1 {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(config.seed);
        let u = random_unit_vector(*dim, &mut rng);
        let lifted = certs
            .iter()
            .map(|c| vectorize_certificate(c.clone(), &space, &ladder, &u))
            .collect::<whlab::Result<Vec<_>>>()?;
        let mismatches = certs.iter().zip(&lifted).filter(|(s, v)| s.status() != v.status()).count();
        out.verdicts.push(Verdict::none_of(format!("vector_verdicts_identical[d={dim}]"), mismatches));
        let worst = lifted
            .iter()
            .filter(|c| matches!(c.kind, CertificateKind::Inside { .. }))
            .map(|c| c.value())
            .fold(f64::NAN, f64::max);
        if !worst.is_nan() {
            out.verdicts.push(Verdict::at_most(format!("vector_inside_residual_max[d={dim}]"), worst, tol.inside_residual));
        }
        Some(lifted)
    } else {
        None
    };

    let mut header = vec!["re", "im", "modulus", "status", "value"];
    if vector.is_some() {
        header.extend(["vector_status", "vector_value"]);
    }
    let mut table = Table::new("certificates", &header);
    let mut plot = Table::new("lattice", &["re", "im", "class", "log10_value"]);
    for (i, c) in certs.iter().enumerate() {
        let mut row = vec![
            crate::report::fmt_number(c.lambda.re),
            crate::report::fmt_number(c.lambda.im),
            crate::report::fmt_number(c.modulus),
            c.status().to_string(),
            crate::report::fmt_number(c.value()),
        ];
        if let Some(v) = &vector {
            row.push(v[i].status().to_string());
            row.push(crate::report::fmt_number(v[i].value()));
        }
        table.push(row);
        let class = match c.kind {
            CertificateKind::Inside { .. } => 1.0,
            CertificateKind::Outside { .. } => -1.0,
            _ => 0.0,
        };
        plot.push_numbers(&[c.lambda.re, c.lambda.im, class, c.value().log10()]);
    }
    out.tables.push(table);
    out.plotdata.push(plot);

    let per_radius: Vec<_> = radii
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let group = &certs[k * angles..(k + 1) * angles];
            let statuses: std::collections::BTreeSet<&str> = group.iter().map(|c| c.status()).collect();
            json!({
                "radius": r,
                "statuses": statuses,
                "max_value": group.iter().map(|c| c.value()).fold(f64::NEG_INFINITY, f64::max),
                "min_value": group.iter().map(|c| c.value()).fold(f64::INFINITY, f64::min),
            })
        })
        .collect();
    out.details = json!({
        "space": space.describe(),
        "bounds": { "inner": bounds.inner(), "outer": bounds.outer(), "rho_forward": bounds.rho_forward, "rho_backward": bounds.rho_backward },
        "radii": radii,
        "angles": angles,
        "dim": dim,
        "ladder": ladder,
        "separation_factor": separation,
        "per_radius": per_radius,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------

fn cutoff(params: &CutoffParams) -> RunResult {
    let CutoffParams { epsilon, eta0, delta, c0 } = *params;
    let c = build_cutoff(&CutoffRequest::new(epsilon, eta0, delta, c0))?;
    let b = &c.bounds;
    let mut out = Outcome::default();
    out.verdicts.push(Verdict::at_most("cutoff_outside_mass", b.outside_mass, b.outside_bound));
    out.verdicts.push(Verdict::at_most("cutoff_total_mass", b.total_mass, b.total_bound + 1e-6));
    out.verdicts.push(Verdict::at_most("cutoff_peak_deviation", (b.peak - 1.0).abs(), 1e-9));
    out.notes.push("transforms use the unitary normalisation (2π)^{-1/2}∫ f e^{-iξt} dt".into());

    let mut table = Table::new("cutoff_bounds", &["quantity", "measured", "bound"]);
    for (name, m, bound) in [
        ("outside_mass", b.outside_mass, b.outside_bound),
        ("total_mass", b.total_mass, b.total_bound),
        ("peak", b.peak, 1.0),
        ("gaussian_tail", b.gaussian_tail, b.outside_bound / 2.0),
        ("remainder_sup", b.remainder_sup, b.remainder_bound),
    ] {
        table.push(vec![name.into(), crate::report::fmt_number(m), crate::report::fmt_number(bound)]);
    }
    out.tables.push(table);
    let mut plot = Table::new("cutoff_profile", &["t", "re", "im", "abs"]);
    let stride = (c.f.len() / 4000).max(1);
    for k in (0..c.f.len()).step_by(stride) {
        let v = c.f.values()[k];
        plot.push_numbers(&[c.f.grid().point(k), v.re, v.im, v.norm()]);
    }
    out.plotdata.push(plot);
    out.details = json!({ "request": { "epsilon": epsilon, "eta0": eta0, "delta": delta, "c0": c0 }, "cutoff": c });
    Ok(out)
}

// ---------------------------------------------------------------------------

fn inclusion(config: &ExperimentConfig, params: &InclusionParams, base: &Path) -> RunResult {
    let alphas = &params.alphas;
    let longest = params.lengths.iter().cloned().fold(0.0, f64::max);
    let ladder = InclusionConfig {
        lengths: params.lengths.clone(),
        search_end: (3.0 * longest).max(InclusionConfig::default().search_end),
        ..InclusionConfig::default()
    };
    let t = build_operator(config, base)?;
    let OperatorKind::Kernel(phi) = &t.kind else {
        return Err(SchemaError::at("/operator/kind", "inclusion needs a kernel operator").into());
    };
    let strip = StripSpec::from_weight(&config.weight(), config.p(), 3)?;
    let alphas: Vec<C64> = match alphas {
        Some(a) => a.iter().map(|z| C64::new(z[0], z[1])).collect(),
        None => strip.levels.iter().flat_map(|&a| [-1.0, 0.0, 1.0].map(|xi| C64::new(xi, a))).collect(),
    };
    let report = symbol_spectrum_inclusion(phi, &config.space_spec(), &strip, &alphas, &ladder)?;
    let tol = config.tolerances.inclusion;
    let mut out = Outcome::default();
    let mut table = Table::new("inclusion", &["alpha_re", "alpha_im", "target_re", "target_im", "residual"]);
    let mut plot = Table::new("inclusion_ladder", &["point", "length", "residual"]);
    for (i, p) in report.points.iter().enumerate() {
        out.verdicts.push(Verdict::at_most(format!("inclusion_residual[alpha={}{:+.6}i]", label(p.alpha.re), p.alpha.im), p.residual, tol));
        table.push_numbers(&[p.alpha.re, p.alpha.im, p.target.re, p.target.im, p.residual]);
        for r in &p.ladder {
            plot.push_numbers(&[i as f64, r.length, r.residual]);
        }
    }
    out.verdicts.push(Verdict::none_of("inclusion_ladders_decreasing", report.points.iter().filter(|p| !p.decreasing).count()));
    out.tables.push(table);
    out.plotdata.push(plot);
    out.details = json!({ "operator": t.name(), "space": t.space.describe(), "report": report });
    Ok(out)
}

// ---------------------------------------------------------------------------

fn vector_symbol(config: &ExperimentConfig, params: &VectorSymbolParams, base: &Path) -> RunResult {
    let VectorSymbolParams { dim, matrix, weight, levels, probes } = params;
    let tol = &config.tolerances;
    let h = config.grid.step;
    let op = match matrix {
        MatrixConfig::RandomKernel { seed } => VectorOperator::kernel(MatrixKernel::random(*dim, h, *seed)?),
        MatrixConfig::Shift { by } => VectorOperator::shift(*by, *dim),
        MatrixConfig::DiagonalKernel => {
            let t = build_operator(config, base)?;
            let OperatorKind::Kernel(phi) = t.kind else {
                return Err(SchemaError::at("/operator/kind", "diagonal_kernel needs a kernel operator").into());
            };
            VectorOperator::kernel(MatrixKernel::diagonal(vec![phi; *dim])?)
        }
    };
    let w = weight.to_weight(*dim, config.weight())?;
    let pcfg = VectorPipelineConfig {
        levels: *levels,
        probe_grid: config.grid()?,
        probes: *probes,
        seed: config.seed,
        tolerance: tol.representation,
        ..VectorPipelineConfig::default()
    };
    let mut out = Outcome::default();
    let report = match vector_symbol_pipeline(&op, &w, config.p(), &pcfg) {
        Ok(r) => r,
        Err(e @ whlab::WhError::InvalidWeight { .. }) => {
            out.verdicts.push(Verdict::holds("weight_admissible", false).with_detail(e.to_string()));
            out.details = json!({ "operator": op.name(), "weight": w.name(), "error": e.to_string() });
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    out.verdicts.push(Verdict::holds("weight_admissible", report.admissibility.pass));
    for r in &report.representation {
        out.verdicts.push(Verdict::at_most(format!("vector_representation_residual[a={}]", label(r.a)), r.max_residual, tol.representation));
    }
    let pairing = report.representation.iter().map(|r| r.transform_pairing_residual).fold(0.0, f64::max);
    out.verdicts.push(Verdict::at_most("transform_inner_product_commutation", pairing, 1e-12));
    if let Some(e) = report.closed_form_error {
        out.verdicts.push(Verdict::at_most("shift_symbol_closed_form", e, tol.closed_form));
    }
    let space = SpaceSpec::Lp {
        p: config.p(),
        weight: w.norm_weight().with_scan(pcfg.scan),
    };
    let mid = &report.symbols[report.symbols.len() / 2];
    let identity = scalarization_identity(&op, mid, &space)?;
    out.verdicts.push(Verdict::at_most(format!("scalarization_identity[a={}]", label(mid.a)), identity.max_error, tol.scalarization));
    let radius = vector_spectral_radius(space.weight().expect("weighted space"), config.p(), *dim, config.seed)?;
    let rel = (radius.forward - radius.scalar_forward).abs() / radius.scalar_forward;
    out.verdicts.push(Verdict::at_most("vector_radius_matches_scalar", rel, tol.radius));
    out.verdicts.push(Verdict::holds("vector_norm_profile_identity", radius.agree));
    if let Some(n) = &report.strip_notice {
        out.notes.push(n.clone());
    }

    for (k, s) in report.symbols.iter().enumerate() {
        let (table, plot) = vector_tables(k, s, 20.0);
        out.tables.push(table);
        out.plotdata.push(plot);
    }
    out.details = json!({
        "report": report,
        "scalarization": identity,
        "radius": radius,
    });
    Ok(out)
}

fn vector_tables(k: usize, s: &OperatorSymbol, band: f64) -> (Table, Table) {
    let d = s.dim;
    let mut header = vec!["xi".to_string()];
    for j in 0..d {
        for l in 0..d {
            header.push(format!("v{j}{l}_re"));
            header.push(format!("v{j}{l}_im"));
        }
    }
    let mut table = Table {
        name: format!("vector_symbol_level_{k}"),
        header,
        rows: vec![],
    };
    let mut plot = Table::new(format!("vector_symbol_norm_level_{k}"), &["xi", "norm"]);
    for m in 0..s.len() {
        let xi = s.frequency(m);
        if xi.abs() > band {
            continue;
        }
        let mut row = vec![xi];
        for e in &s.entries {
            row.push(e.values()[m].re);
            row.push(e.values()[m].im);
        }
        table.push_numbers(&row);
        plot.push_numbers(&[xi, s.matrix_at(m).singular_values().max()]);
    }
    (table, plot)
}

// ---------------------------------------------------------------------------

fn weights_report(config: &ExperimentConfig, params: &WeightsReportParams) -> RunResult {
    let WeightsReportParams {
        offsets,
        expect,
        orlicz_powers,
        functions,
        vector_dims,
    } = params;
    let tol = &config.tolerances;
    let w = config.weight();
    let p = config.p();
    let mut out = Outcome::default();

    let scan = w.scan();
    let scan_grid = Grid::new(scan.start, scan.step, ((scan.end - scan.start) / scan.step).round() as usize + 1)?;
    let adm = check_admissibility(&w, offsets, &scan_grid, &AdmissibilityConfig::default())?;
    out.verdicts.push(Verdict::holds("weight_admissible", adm.pass));

    let fwd = spectral_radius(&w, p, Direction::Forward);
    let bwd = spectral_radius(&w, p, Direction::Backward);
    out.verdicts.push(Verdict::at_least("radius_product", fwd.estimate * bwd.estimate, 1.0 - 1e-12));
    if let Some(e) = expect {
        out.verdicts.push(Verdict::at_most("rho_forward_error", (fwd.estimate - e.forward).abs(), e.tolerance));
        out.verdicts.push(Verdict::at_most("rho_backward_error", (bwd.estimate - e.backward).abs(), e.tolerance));
    }
    let strip = StripSpec::from_weight(&w, p, 1)?;

    let mut norms = Table::new("translation_norms", &["n", "forward", "backward", "forward_log_rate", "backward_log_rate"]);
    for (f, b) in fwd.samples.iter().zip(&bwd.samples) {
        norms.push_numbers(&[f.0, translation_norm(&w, p, f.0), translation_norm(&w, p, -f.0), f.1, b.1]);
    }
    out.tables.push(norms);

    let mut orlicz_rows = vec![];
    if !orlicz_powers.is_empty() {
        let grid = config.grid()?;
        let fs = random_probes(&grid, *functions, config.seed)?;
        let mut table = Table::new("orlicz_consistency", &["p", "max_relative_error"]);
        for &q in orlicz_powers {
            let mut worst = 0.0f64;
            for f in &fs {
                let lux = luxemburg_norm(f, &OrliczFunction::Power { p: q }, Some(&w))?;
                // ∫|f|^q ω dx = ∫|f ω^{1/q}|^q dx.
                let g = f.map(|x, v| v * (w.log_value(x) / q).exp())?;
                let lp = lp_norm(&g, q, &Weight::constant())?;
                worst = worst.max((lux - lp).abs() / lp);
            }
            out.verdicts.push(Verdict::at_most(format!("orlicz_power_matches_lp[p={q}]"), worst, tol.orlicz));
            table.push_numbers(&[q, worst]);
            orlicz_rows.push(json!({ "p": q, "max_relative_error": worst }));
        }
        out.tables.push(table);
    }

    let mut vector_rows = vec![];
    for &d in vector_dims {
        let r = vector_spectral_radius(&w, p, d, config.seed)?;
        let rel = ((r.forward - r.scalar_forward) / r.scalar_forward).abs().max(((r.backward - r.scalar_backward) / r.scalar_backward).abs());
        out.verdicts.push(Verdict::at_most(format!("vector_radius_matches_scalar[d={d}]"), rel, tol.radius));
        out.verdicts.push(Verdict::holds(format!("vector_norm_profile_identity[d={d}]"), r.agree));
        vector_rows.push(r);
    }

    let mut plot = Table::new("log_weight", &["x", "log_weight"]);
    for k in 0..=256 {
        let x = k as f64 * 0.25;
        plot.push_numbers(&[x, w.log_value(x)]);
    }
    out.plotdata.push(plot);
    out.details = json!({
        "weight": w.name(),
        "admissibility": adm,
        "rho_forward": fwd,
        "rho_backward": bwd,
        "strip": { "a_min": strip.a_min, "a_max": strip.a_max },
        "orlicz": orlicz_rows,
        "vector": vector_rows,
    });
    Ok(out)
}
