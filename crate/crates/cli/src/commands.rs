//! The six subcommands. Each writes its artifacts to the output directory
//! and returns a typed summary; printing is left to the caller.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use alr_core::oracle::energy_identity_check;
use alr_core::presets::{inverse_square_data, REFERENCE_MODES, REFERENCE_RADIUS};
use alr_core::problem1::{solve_sweep, truncation_order, SweepQuantity};
use alr_core::problem2::{core_energy, power_on_region};
use alr_core::rate::{check_sweep_grid, fit_power_law, log_grid, RateFit};
use alr_core::{
    classify_compatibility, localized_resonance_gap, solve_modes, Complex64, CoreShellSolution, ModalCoefficients,
    PlaneProblem, PlaneSolution, PolarPoint, Region, SolverConfig, TailDescriptor, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, Solve1Config, Solve2Config};
use crate::data::{parse_tail, problem1_data, problem2_data, DataSpec, Problem1Data, Problem2Data};
use crate::error::{exit, CliError, Result};
use crate::grid::{self, max_abs_in, quantiles, GridSpec, Quantiles, Sample};
use crate::io::{create_dir, delta_label, write_coefficients, write_json};
use crate::manifest::{ManifestBuilder, MANIFEST_FILE};
use crate::render::{render, Part};

/// Options shared by all commands.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
    pub strict: bool,
    pub render: bool,
}

impl Context {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Context { out: out.into(), strict: false, render: false }
    }
}

/// Outcome classes that map to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Success,
    Borderline,
    Indeterminate,
    Unreliable,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => exit::SUCCESS,
            Status::Borderline => exit::BORDERLINE,
            Status::Indeterminate => exit::INDETERMINATE,
            Status::Unreliable => exit::UNRELIABLE,
        }
    }

    fn of_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Borderline => Status::Borderline,
            Verdict::Indeterminate => Status::Indeterminate,
            _ => Status::Success,
        }
    }
}

/// Loss values of the Figure 1 experiment.
pub const FIGURE1_DELTAS: [f64; 3] = [1e-14, 1e-18, 1e-20];
pub const FIGURE1_EXTENT: f64 = 3.0;
/// Loss exponents of the Figure 2 experiment.
pub const FIGURE2_EXPONENTS: [f64; 3] = [-10.0, -10.4, -10.8];
pub const FIGURE2_EXTENT: f64 = 4.0;
pub const FIGURE_RESOLUTION: usize = 400;
/// Relative spread allowed for `max |u|` on `B_{1/6}` across the Figure 1 losses.
pub const FIGURE1_INNER_SPREAD: f64 = 0.10;
/// Expected `log10` ratio of consecutive Figure 2 energies and its tolerance
/// (2% of the exponent).
pub const FIGURE2_LOG_RATIO: f64 = 0.8;
pub const FIGURE2_LOG_RATIO_TOL: f64 = 0.016;

/// Test regions for complete resonance: inside the core, in the image of the
/// shell, and in the far field.
pub fn resonance_regions() -> Vec<(&'static str, Region)> {
    vec![
        ("inside_core", Region::Disk { radius: 0.5 }),
        ("shell_image", Region::AnnularSector { r_lo: 1.2, r_hi: 1.8, theta_lo: 0.0, theta_hi: PI / 4.0 }),
        ("far_field", Region::Rectangle { x_lo: 5.0, x_hi: 6.0, y_lo: 0.0, y_hi: 1.0 }),
    ]
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Compatible => "Compatible",
        Verdict::Incompatible => "Incompatible",
        Verdict::Borderline => "Borderline",
        Verdict::Indeterminate => "Indeterminate",
    }
}

/// Region label of a point in the core-shell geometry.
pub fn core_shell_region(r: f64, radius: f64) -> &'static str {
    if r < 1.0 / radius {
        "core"
    } else if r < 1.0 {
        "shell"
    } else if r <= radius {
        "matrix"
    } else {
        "exterior"
    }
}

pub fn sample_core_shell(sol: &CoreShellSolution, spec: &GridSpec) -> Vec<Sample> {
    let field = sol.field();
    let radius = sol.radius();
    grid::sample(spec, |x, y| {
        let p = PolarPoint::from_cartesian(x, y);
        let region = core_shell_region(p.r, radius);
        let u = if region == "exterior" {
            Complex64::new(f64::NAN, f64::NAN)
        } else {
            field.evaluate(p).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        };
        (u, region)
    })
}

/// Plane-problem grids: `core` inside the closed unit disk, `matrix` outside.
pub fn sample_plane(sol: &PlaneSolution, spec: &GridSpec) -> Vec<Sample> {
    grid::sample(spec, |x, y| {
        let region = if x.hypot(y) <= 1.0 { "core" } else { "matrix" };
        let u = sol.evaluate([x, y]).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        (u, region)
    })
}

fn emit_grid(
    ctx: &Context,
    manifest: &mut ManifestBuilder,
    name: &str,
    samples: &[Sample],
    spec: &GridSpec,
) -> Result<Quantiles> {
    grid::write_grid(&ctx.out.join(name), samples)?;
    manifest.output(name);
    let q = quantiles(samples);
    if ctx.render {
        let stem = name.trim_end_matches(".csv");
        for (part, tag) in [(Part::Re, "re"), (Part::Im, "im")] {
            let png = format!("{stem}_{tag}.png");
            render(&ctx.out.join(&png), samples, spec.resolution, part, q.q99)?;
            manifest.output(png);
        }
    }
    Ok(q)
}

fn fits_of(deltas: &[f64], series: &[(&str, Vec<f64>)]) -> Result<BTreeMap<String, RateFit>> {
    series
        .iter()
        .map(|(name, values)| Ok((name.to_string(), fit_power_law(deltas, values)?)))
        .collect()
}

// ---------------------------------------------------------------- figure 1

#[derive(Debug, Clone, Serialize)]
pub struct Figure1Run {
    pub delta: f64,
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "E_delta")]
    pub power: f64,
    pub grad_energy: f64,
    pub gap_h_half: f64,
    pub verdict: &'static str,
    pub grid: String,
    pub quantiles: Quantiles,
    /// `max |u|` over grid points in `B_{1/6}`.
    pub max_abs_inner: f64,
    /// `max |u|` over grid points in `B_3 \ B_{1/3}`.
    pub max_abs_annulus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure1Checks {
    pub inner_relative_spread: f64,
    pub inner_bounded: bool,
    pub annulus_growing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure1Summary {
    pub command: &'static str,
    pub manifest: &'static str,
    #[serde(rename = "R")]
    pub radius: f64,
    pub data: String,
    pub modes: usize,
    pub grid: GridSpec,
    pub runs: Vec<Figure1Run>,
    pub rate_fits: BTreeMap<String, RateFit>,
    pub checks: Figure1Checks,
}

pub fn figure1(ctx: &Context) -> Result<Figure1Summary> {
    figure1_with(ctx, FIGURE_RESOLUTION)
}

/// Figure 1 at a chosen grid resolution.
pub fn figure1_with(ctx: &Context, resolution: usize) -> Result<Figure1Summary> {
    create_dir(&ctx.out)?;
    let radius = REFERENCE_RADIUS;
    let h = inverse_square_data(REFERENCE_MODES)?;
    let spec = GridSpec { extent: FIGURE1_EXTENT, resolution };
    let mut manifest = ManifestBuilder::start(
        "figure1",
        serde_json::json!({ "R": radius, "data": format!("inverse_square:modes={REFERENCE_MODES}"),
            "deltas": FIGURE1_DELTAS, "grid": spec }),
    );
    let verdict = classify_compatibility(&h, radius, None)?;

    let solved: Vec<(CoreShellSolution, Vec<Sample>)> = FIGURE1_DELTAS
        .par_iter()
        .map(|&d| {
            let sol = solve_modes(&h, SolverConfig::new(radius, d, REFERENCE_MODES)?)?;
            let samples = sample_core_shell(&sol, &spec);
            Ok((sol, samples))
        })
        .collect::<Result<_>>()?;

    let mut runs = Vec::new();
    for (sol, samples) in &solved {
        let name = format!("field_delta_{}.csv", delta_label(sol.delta()));
        let q = emit_grid(ctx, &mut manifest, &name, samples, &spec)?;
        runs.push(Figure1Run {
            delta: sol.delta(),
            order: sol.config.order(),
            power: sol.power(),
            grad_energy: sol.grad_energy(),
            gap_h_half: localized_resonance_gap(sol),
            verdict: verdict_name(verdict.verdict),
            grid: name,
            quantiles: q,
            max_abs_inner: max_abs_in(samples, 0.0, 1.0 / 6.0),
            max_abs_annulus: max_abs_in(samples, 1.0 / 3.0, 3.0 + 1e-12),
        });
    }

    let inner: Vec<f64> = runs.iter().map(|r| r.max_abs_inner).collect();
    let (lo, hi) = inner.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = (hi - lo) / hi;
    // runs are ordered by decreasing loss
    let annulus_growing = runs.windows(2).all(|w| w[1].max_abs_annulus > w[0].max_abs_annulus);
    let deltas: Vec<f64> = runs.iter().map(|r| r.delta).collect();
    let rate_fits = fits_of(
        &deltas,
        &[
            ("grad_energy", runs.iter().map(|r| r.grad_energy).collect()),
            ("power", runs.iter().map(|r| r.power).collect()),
            ("gap_h_half", runs.iter().map(|r| r.gap_h_half).collect()),
        ],
    )?;
    let summary = Figure1Summary {
        command: "figure1",
        manifest: MANIFEST_FILE,
        radius,
        data: format!("inverse_square:modes={REFERENCE_MODES}"),
        modes: REFERENCE_MODES,
        grid: spec,
        runs,
        rate_fits,
        checks: Figure1Checks {
            inner_relative_spread: spread,
            inner_bounded: spread < FIGURE1_INNER_SPREAD,
            annulus_growing,
        },
    };
    write_json(&ctx.out.join("summary.json"), &summary)?;
    manifest.output("summary.json");
    manifest.finish(&ctx.out)?;
    Ok(summary)
}

// ---------------------------------------------------------------- figure 2

#[derive(Debug, Clone, Serialize)]
pub struct Figure2Run {
    pub delta: f64,
    #[serde(rename = "N")]
    pub order: usize,
    /// `δ ∫_{B_1} |∇u_δ|²`.
    #[serde(rename = "E_delta")]
    pub power: f64,
    /// `∫_{B_1} |∇u_δ|²`.
    pub grad_energy: f64,
    /// Not defined for the plane problem.
    pub gap_h_half: Option<f64>,
    pub verdict: &'static str,
    pub grid: String,
    pub quantiles: Quantiles,
    /// `∫_O |∇u_δ|²` on the resonance test regions.
    pub region_energies: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure2Checks {
    /// `log10` of consecutive ratios of the core energy.
    pub log_ratios: Vec<f64>,
    pub ratios_match: bool,
    pub real_and_imaginary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure2Summary {
    pub command: &'static str,
    pub manifest: &'static str,
    pub source: String,
    pub modes: usize,
    pub radial_nodes: usize,
    pub grid: GridSpec,
    pub runs: Vec<Figure2Run>,
    pub rate_fits: BTreeMap<String, RateFit>,
    pub checks: Figure2Checks,
}

pub fn figure2(ctx: &Context) -> Result<Figure2Summary> {
    figure2_with(ctx, FIGURE_RESOLUTION)
}

pub fn figure2_with(ctx: &Context, resolution: usize) -> Result<Figure2Summary> {
    create_dir(&ctx.out)?;
    let data = problem2_data(&DataSpec::new("cutoff_harmonic"), None)?;
    let spec = GridSpec { extent: FIGURE2_EXTENT, resolution };
    let deltas: Vec<f64> = FIGURE2_EXPONENTS.iter().map(|&e| 10f64.powf(e)).collect();
    let mut manifest = ManifestBuilder::start(
        "figure2",
        serde_json::json!({ "source": data.spec.to_string(), "order": data.order, "nodes": data.nodes,
            "delta_exponents": FIGURE2_EXPONENTS, "grid": spec }),
    );
    let problem = PlaneProblem::new(&data.source, data.order, data.nodes)?;
    let regions = resonance_regions();

    let solved: Vec<(PlaneSolution, Vec<Sample>, BTreeMap<String, f64>)> = deltas
        .par_iter()
        .map(|&d| {
            let sol = problem.at_delta(d)?;
            let samples = sample_plane(&sol, &spec);
            let energies = regions
                .iter()
                .map(|(name, region)| Ok((name.to_string(), power_on_region(&sol, region)?)))
                .collect::<Result<_>>()?;
            Ok((sol, samples, energies))
        })
        .collect::<Result<_>>()?;

    let mut runs = Vec::new();
    let mut both_parts = true;
    for (sol, samples, energies) in solved {
        let name = format!("field_delta_{}.csv", delta_label(sol.delta()));
        both_parts &= samples.iter().any(|s| s.u.re != 0.0) && samples.iter().any(|s| s.u.im != 0.0);
        let q = emit_grid(ctx, &mut manifest, &name, &samples, &spec)?;
        let e = core_energy(&sol);
        runs.push(Figure2Run {
            delta: sol.delta(),
            order: data.order,
            power: sol.delta() * e,
            grad_energy: e,
            gap_h_half: None,
            verdict: verdict_name(problem.verdict.verdict),
            grid: name,
            quantiles: q,
            region_energies: energies,
        });
    }
    let log_ratios: Vec<f64> = runs.windows(2).map(|w| (w[1].grad_energy / w[0].grad_energy).log10()).collect();
    let ratios_match = log_ratios.iter().all(|r| (r - FIGURE2_LOG_RATIO).abs() <= FIGURE2_LOG_RATIO_TOL);
    let mut series: Vec<(&str, Vec<f64>)> = vec![
        ("core", runs.iter().map(|r| r.grad_energy).collect()),
        ("power", runs.iter().map(|r| r.power).collect()),
    ];
    for (name, _) in &regions {
        series.push((name, runs.iter().map(|r| r.region_energies[*name]).collect()));
    }
    let rate_fits = fits_of(&deltas, &series)?;
    let summary = Figure2Summary {
        command: "figure2",
        manifest: MANIFEST_FILE,
        source: data.spec.to_string(),
        modes: data.order,
        radial_nodes: data.nodes,
        grid: spec,
        runs,
        rate_fits,
        checks: Figure2Checks { log_ratios, ratios_match, real_and_imaginary: both_parts },
    };
    write_json(&ctx.out.join("summary.json"), &summary)?;
    manifest.output("summary.json");
    manifest.finish(&ctx.out)?;
    Ok(summary)
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Clone, Serialize)]
pub struct Solve1Summary {
    pub command: &'static str,
    pub manifest: &'static str,
    #[serde(rename = "R")]
    pub radius: f64,
    pub delta: f64,
    #[serde(rename = "N")]
    pub order: usize,
    /// `n_δ`; the auto-sized order is `max(data order, 4 n_δ)`.
    pub transition_mode: usize,
    pub data: String,
    #[serde(rename = "E_delta")]
    pub power: f64,
    pub grad_energy: f64,
    pub core_energy: f64,
    pub h1_norm: f64,
    pub gap_h_half: f64,
    pub verdict: &'static str,
    pub decay_rate: Option<f64>,
    pub threshold: f64,
    pub evidence: String,
    pub energy_identity_residual: f64,
    pub grid: Option<String>,
    pub quantiles: Option<Quantiles>,
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn solve1(ctx: &Context, config_path: &Path, overrides: &[String]) -> Result<Solve1Summary> {
    let (cfg, table): (Solve1Config, _) = config::load(config_path, overrides)?;
    cfg.validate()?;
    let spec = cfg.data.to_spec(&["generator", "file"])?;
    let data = problem1_data(&spec, cfg.radius, &config_dir(config_path))?;
    let tail = match &cfg.tail {
        Some(t) => parse_tail(t)?,
        None => data.tail,
    };
    let mut manifest = ManifestBuilder::start("solve1", serde_json::to_value(&table)?);
    manifest.input(config_path)?;
    for p in &data.inputs {
        manifest.input(p)?;
    }
    create_dir(&ctx.out)?;
    solve1_run(ctx, manifest, &cfg, &data, tail)
}

fn solve1_run(
    ctx: &Context,
    mut manifest: ManifestBuilder,
    cfg: &Solve1Config,
    data: &Problem1Data,
    tail: Option<TailDescriptor>,
) -> Result<Solve1Summary> {
    let h = data.coefficients(cfg.radius, cfg.delta, cfg.order)?;
    let n_delta = truncation_order(cfg.delta, cfg.radius);
    if h.order() < n_delta {
        log::warn!("N = {} is below the transition mode n_δ = {n_delta}; the resonance is truncated", h.order());
    }
    let sol = solve_modes(&h, SolverConfig::new(cfg.radius, cfg.delta, h.order())?)?;
    let verdict = classify_compatibility(&h, cfg.radius, tail)?;
    for (name, c) in [("h.csv", &sol.h), ("c.csv", &sol.c), ("a.csv", &sol.a), ("b.csv", &sol.b)] {
        write_coefficients(&ctx.out.join(name), c)?;
        manifest.output(name);
    }
    let (grid_name, q) = match cfg.grid()? {
        Some(spec) => {
            let samples = sample_core_shell(&sol, &spec);
            let name = "field.csv".to_string();
            let q = emit_grid(ctx, &mut manifest, &name, &samples, &spec)?;
            (Some(name), Some(q))
        }
        None => (None, None),
    };
    let summary = Solve1Summary {
        command: "solve1",
        manifest: MANIFEST_FILE,
        radius: cfg.radius,
        delta: cfg.delta,
        order: h.order(),
        transition_mode: n_delta,
        data: data.spec.to_string(),
        power: sol.power(),
        grad_energy: sol.grad_energy(),
        core_energy: sol.core_energy(),
        h1_norm: sol.h1_norm(),
        gap_h_half: localized_resonance_gap(&sol),
        verdict: verdict_name(verdict.verdict),
        decay_rate: verdict.decay_rate,
        threshold: verdict.threshold,
        evidence: verdict.evidence,
        energy_identity_residual: energy_identity_check(&sol).residual,
        grid: grid_name,
        quantiles: q,
    };
    write_json(&ctx.out.join("summary.json"), &summary)?;
    manifest.output("summary.json");
    manifest.finish(&ctx.out)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct Solve2Summary {
    pub command: &'static str,
    pub manifest: &'static str,
    pub delta: f64,
    #[serde(rename = "N")]
    pub order: usize,
    pub radial_nodes: usize,
    pub source: String,
    /// `δ ∫_{B_1} |∇u_δ|²`.
    #[serde(rename = "E_delta")]
    pub power: f64,
    /// `∫_{B_1} |∇u_δ|²`.
    pub grad_energy: f64,
    pub gap_h_half: Option<f64>,
    pub verdict: &'static str,
    pub dominant_mode: Option<i64>,
    pub dominant_trace: Option<f64>,
    pub tolerance: f64,
    pub snapped: bool,
    pub source_norm: f64,
    pub w_origin: [f64; 2],
    pub grid: Option<String>,
    pub quantiles: Option<Quantiles>,
}

pub fn solve2(ctx: &Context, config_path: &Path, overrides: &[String]) -> Result<Solve2Summary> {
    let (cfg, table): (Solve2Config, _) = config::load(config_path, overrides)?;
    cfg.validate()?;
    let mut spec = cfg.source.to_spec(&["source", "generator"])?;
    if let Some(n) = cfg.nodes {
        spec = spec.with("nodes", n);
    }
    let data = problem2_data(&spec, cfg.order)?;
    let mut manifest = ManifestBuilder::start("solve2", serde_json::to_value(&table)?);
    manifest.input(config_path)?;
    create_dir(&ctx.out)?;

    let problem = PlaneProblem::new(&data.source, data.order, data.nodes)?;
    let sol = problem.at_delta(cfg.delta)?;
    for (name, c) in [("w_trace.csv", &problem.w_trace), ("a.csv", &sol.coefficients.a), ("b.csv", &sol.coefficients.b)]
    {
        write_coefficients(&ctx.out.join(name), c)?;
        manifest.output(name);
    }
    let (grid_name, q) = match cfg.grid()? {
        Some(spec) => {
            let samples = sample_plane(&sol, &spec);
            let name = "field.csv".to_string();
            let q = emit_grid(ctx, &mut manifest, &name, &samples, &spec)?;
            (Some(name), Some(q))
        }
        None => (None, None),
    };
    let e = core_energy(&sol);
    let w0 = problem.w.at_origin();
    let summary = Solve2Summary {
        command: "solve2",
        manifest: MANIFEST_FILE,
        delta: cfg.delta,
        order: data.order,
        radial_nodes: data.nodes,
        source: data.spec.to_string(),
        power: cfg.delta * e,
        grad_energy: e,
        gap_h_half: None,
        verdict: verdict_name(problem.verdict.verdict),
        dominant_mode: problem.verdict.dominant_mode.map(|d| d.0),
        dominant_trace: problem.verdict.dominant_mode.map(|d| d.1),
        tolerance: problem.verdict.tol,
        snapped: problem.snapped(),
        source_norm: problem.source_norm,
        w_origin: [w0.re, w0.im],
        grid: grid_name,
        quantiles: q,
    };
    write_json(&ctx.out.join("summary.json"), &summary)?;
    manifest.output("summary.json");
    manifest.finish(&ctx.out)?;
    Ok(summary)
}

// ---------------------------------------------------------------- rate

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    CoreShell,
    Plane,
}

#[derive(Debug, Clone)]
pub struct RateArgs {
    pub problem: Problem,
    pub data: DataSpec,
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
    pub radius: f64,
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub quantity: String,
    #[serde(flatten)]
    pub fit: RateFit,
    pub reliable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSummary {
    pub command: &'static str,
    pub manifest: &'static str,
    pub problem: u8,
    pub data: String,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    #[serde(rename = "N")]
    pub order: usize,
    pub deltas: Vec<f64>,
    pub samples: BTreeMap<String, Vec<f64>>,
    pub rate_fits: Vec<RateRow>,
    pub status: Status,
}

impl RateSummary {
    pub fn fit(&self, quantity: &str) -> Option<&RateFit> {
        self.rate_fits.iter().find(|r| r.quantity == quantity).map(|r| &r.fit)
    }
}

type Series = Vec<(String, Vec<f64>)>;

pub fn rate(ctx: &Context, args: &RateArgs) -> Result<RateSummary> {
    if !(args.delta_min > 0.0 && args.delta_max < 1.0 && args.delta_min < args.delta_max) {
        return Err(CliError::invalid(format!(
            "need 0 < delta_min < delta_max < 1, got [{}, {}]",
            args.delta_min, args.delta_max
        )));
    }
    if args.points < 2 {
        return Err(CliError::usage("a sweep needs >= 4 points over >= 3 decades"));
    }
    let deltas = log_grid(args.delta_min, args.delta_max, args.points);
    check_sweep_grid(&deltas).map_err(|e| CliError::usage(e.to_string()))?;
    create_dir(&ctx.out)?;

    let (samples, order, radius, problem_no): (Series, usize, Option<f64>, u8) = match args.problem {
        Problem::CoreShell => {
            if !(args.radius > 1.0 && args.radius.is_finite()) {
                return Err(CliError::invalid(format!("R must exceed 1, got {}", args.radius)));
            }
            let data = problem1_data(&args.data, args.radius, Path::new("."))?;
            let sweep = data.for_sweep(args.order)?;
            let sols = solve_sweep(&sweep, args.radius, &deltas)?;
            let order = sols[0].config.order();
            let series = [
                ("grad_energy", SweepQuantity::GradEnergy),
                ("power", SweepQuantity::Power),
                ("gap_h_half", SweepQuantity::Gap),
                ("h1_norm", SweepQuantity::H1Norm),
            ]
            .iter()
            .map(|(name, q)| (name.to_string(), sols.iter().map(|s| q.of(s)).collect()))
            .collect();
            (series, order, Some(args.radius), 1)
        }
        Problem::Plane => {
            let data: Problem2Data = problem2_data(&args.data, args.order)?;
            let problem = PlaneProblem::new(&data.source, data.order, data.nodes)?;
            let regions = resonance_regions();
            let rows: Vec<(f64, Vec<f64>)> = deltas
                .par_iter()
                .map(|&d| {
                    let sol = problem.at_delta(d)?;
                    let energies =
                        regions.iter().map(|(_, r)| power_on_region(&sol, r)).collect::<alr_core::Result<_>>()?;
                    Ok((core_energy(&sol), energies))
                })
                .collect::<Result<_>>()?;
            let mut series = vec![
                ("grad_energy".to_string(), rows.iter().map(|r| r.0).collect::<Vec<_>>()),
                ("power".to_string(), rows.iter().zip(&deltas).map(|(r, d)| d * r.0).collect()),
            ];
            for (k, (name, _)) in regions.iter().enumerate() {
                series.push((name.to_string(), rows.iter().map(|r| r.1[k]).collect()));
            }
            (series, data.order, None, 2)
        }
    };

    let mut rows = Vec::new();
    for (name, values) in &samples {
        let fit = fit_power_law(&deltas, values)?;
        rows.push(RateRow { quantity: name.clone(), reliable: fit.is_reliable(), fit });
    }
    let status = if ctx.strict && rows.iter().any(|r| !r.reliable) { Status::Unreliable } else { Status::Success };

    let mut manifest = ManifestBuilder::start(
        "rate",
        serde_json::json!({ "problem": problem_no, "data": args.data.to_string(), "delta_min": args.delta_min,
            "delta_max": args.delta_max, "points": args.points, "R": radius, "N": args.order }),
    );
    if let Some(p) = args.data.params.get("path").filter(|_| args.data.kind == "file") {
        manifest.input(Path::new(p))?;
    }
    write_rate_csv(&ctx.out.join("rate.csv"), &rows)?;
    manifest.output("rate.csv");
    let summary = RateSummary {
        command: "rate",
        manifest: MANIFEST_FILE,
        problem: problem_no,
        data: args.data.to_string(),
        radius,
        order,
        deltas,
        samples: samples.into_iter().collect(),
        rate_fits: rows,
        status,
    };
    write_json(&ctx.out.join("rate.json"), &summary)?;
    manifest.output("rate.json");
    manifest.finish(&ctx.out)?;
    Ok(summary)
}

fn write_rate_csv(path: &Path, rows: &[RateRow]) -> Result<()> {
    use crate::io::fmt_f64;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["quantity", "slope", "intercept", "max_residual", "delta_min", "delta_max", "points", "reliable"])?;
    for r in rows {
        w.write_record([
            r.quantity.clone(),
            fmt_f64(r.fit.slope),
            fmt_f64(r.fit.intercept),
            fmt_f64(r.fit.max_residual),
            fmt_f64(r.fit.delta_window[0]),
            fmt_f64(r.fit.delta_window[1]),
            r.fit.points.to_string(),
            r.reliable.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

// ---------------------------------------------------------------- check-compat

#[derive(Debug, Clone, Serialize)]
pub struct EvidenceRow {
    pub n: i64,
    pub magnitude: f64,
    /// `|h_n|^{1/n}` for boundary data; absent for source traces.
    pub root: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatReport {
    pub command: &'static str,
    pub problem: u8,
    pub data: String,
    pub verdict: &'static str,
    pub decay_rate: Option<f64>,
    pub threshold: f64,
    pub dominant_mode: Option<i64>,
    pub evidence: String,
    pub table: Vec<EvidenceRow>,
    pub status: Status,
}

/// Rows shown in the evidence table.
pub const EVIDENCE_ROWS: usize = 12;

pub fn check_compat(
    problem: Problem,
    spec: &DataSpec,
    radius: f64,
    tail: Option<Option<TailDescriptor>>,
    order: Option<usize>,
) -> Result<CompatReport> {
    match problem {
        Problem::CoreShell => {
            if !(radius > 1.0 && radius.is_finite()) {
                return Err(CliError::invalid(format!("R must exceed 1, got {radius}")));
            }
            let data = problem1_data(spec, radius, Path::new("."))?;
            // generators without a mode count are read at the reference order
            let h = data.coefficients(radius, 0.5, order.or(match data.data {
                alr_core::problem1::BoundaryData::Generator { min_order, .. } => Some(min_order),
                _ => None,
            }))?;
            let tail = tail.unwrap_or(data.tail);
            let v = classify_compatibility(&h, radius, tail)?;
            Ok(CompatReport {
                command: "check-compat",
                problem: 1,
                data: spec.to_string(),
                verdict: verdict_name(v.verdict),
                decay_rate: v.decay_rate,
                threshold: v.threshold,
                dominant_mode: None,
                evidence: v.evidence,
                table: tail_table(&h),
                status: Status::of_verdict(v.verdict),
            })
        }
        Problem::Plane => {
            let data = problem2_data(spec, order)?;
            let p = PlaneProblem::new(&data.source, data.order, data.nodes)?;
            let v = &p.verdict;
            let mut table: Vec<EvidenceRow> = (1..=p.raw_trace.order() as i64)
                .flat_map(|n| [n, -n])
                .map(|n| EvidenceRow { n, magnitude: p.raw_trace.get(n).norm(), root: None })
                .collect();
            table.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.n.cmp(&b.n)));
            table.truncate(EVIDENCE_ROWS);
            let evidence = match v.dominant_mode {
                Some((n, m)) => format!("largest trace mode n = {n}: |w_n(1)| = {m:e} against tolerance {:e}", v.tol),
                None => format!("boundary trace vanishes (tolerance {:e})", v.tol),
            };
            Ok(CompatReport {
                command: "check-compat",
                problem: 2,
                data: spec.to_string(),
                verdict: verdict_name(v.verdict),
                decay_rate: None,
                threshold: v.tol,
                dominant_mode: v.dominant_mode.filter(|d| d.1 > v.tol).map(|d| d.0),
                evidence,
                table,
                status: Status::of_verdict(v.verdict),
            })
        }
    }
}

fn tail_table(h: &ModalCoefficients) -> Vec<EvidenceRow> {
    let rows: Vec<EvidenceRow> = h
        .modes()
        .map(|(n, p, m)| {
            let mag = p.norm().max(m.norm());
            EvidenceRow { n: n as i64, magnitude: mag, root: (mag > 0.0).then(|| mag.powf(1.0 / n as f64)) }
        })
        .filter(|r| r.magnitude > 0.0)
        .collect();
    let skip = rows.len().saturating_sub(EVIDENCE_ROWS);
    rows.into_iter().skip(skip).collect()
}

pub fn write_report(ctx: &Context, report: &CompatReport) -> Result<()> {
    create_dir(&ctx.out)?;
    write_json(&ctx.out.join("check_compat.json"), report)
}
