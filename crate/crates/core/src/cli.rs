//! Command pipelines behind the `hodge-curves` binary.

use crate::affine::{affine_solution, agreement, check_solution, compact_solution, AffineCheck};
use crate::calibration::{cached, calibrate, default_cache_path, KernelCalibration};
use crate::cohomology::{cech_form_ref, class_rank, residual_to_cech, CechCover, CechFit};
use crate::config::{build_forms, RunConfig, Solver};
use crate::curve::{CurveSpec, PlaneCurveModel};
use crate::dbar::probe_points;
use crate::error::{Error, Result};
use crate::fields::{FormRef, FsForm, FsRational};
use crate::hodge::{hol_basis, Hodge};
use crate::kernels::exactness_test;
use crate::report::*;
use crate::residue::{dualizing_sections, monomials, residual_pairing, section_norm, RANK_CUT};
use crate::validate::{validate_curve, ValidationReport};
use crate::{CurveContext, C64};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "hodge-curves", version, about = "Hodge decomposition and dbar-solvers on plane curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the report and dumps.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Refines (> 1) or coarsens (< 1) the configured grid.
    #[arg(long, global = true)]
    pub grid_scale: Option<f64>,
    /// Seed for random probe points.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write CSV dumps of samples and probes.
    #[arg(long, global = true)]
    pub debug_dumps: bool,
    /// Calibration cache file; defaults to one per grid in the temp directory.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check nodes, singularities and points at infinity.
    Validate,
    /// Holomorphic basis, dualizing sections and pairing rank.
    Basis,
    /// Hodge decomposition of each configured form.
    Decompose,
    /// Solve dbar g = φ on the affine curve.
    SolveDbar,
    /// Round trip through Čech cohomology.
    Cech,
    /// Recompute the kernel constants.
    Calibrate,
    /// Everything that applies to the configuration.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Basis => "basis",
            Command::Decompose => "decompose",
            Command::SolveDbar => "solve-dbar",
            Command::Cech => "cech",
            Command::Calibrate => "calibrate",
            Command::Report => "report",
        }
    }
}

/// Where artifacts go.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub dumps: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

/// What a pipeline produced; `failure` carries a result that must not pass.
struct Outcome {
    result: CommandResult,
    breaches: Vec<Breach>,
    failure: Option<Error>,
}

impl Outcome {
    fn ok(result: CommandResult, breaches: Vec<Breach>) -> Self {
        Self { result, breaches, failure: None }
    }
}

fn breach_if(out: &mut Vec<Breach>, field: String, value: f64, limit: f64) {
    if !(value <= limit) {
        out.push(Breach { field, value, limit });
    }
}

/// Runs one command and assembles its report.
pub fn run_command(cfg: &RunConfig, command: Command, artifacts: &Artifacts) -> Report {
    let start = Instant::now();
    let outcome = dispatch(cfg, command, artifacts);
    let (status, error, breaches, result) = match outcome {
        Ok(o) => {
            let status = match &o.failure {
                Some(e) => Status::of_error(e),
                None if !o.breaches.is_empty() => Status::AcceptanceBreach,
                None => Status::Ok,
            };
            (status, o.failure.as_ref().map(ErrorRecord::from), o.breaches, Some(o.result))
        }
        Err(e) => (Status::of_error(&e), Some(ErrorRecord::from(&e)), Vec::new(), None),
    };
    Report {
        schema: REPORT_SCHEMA,
        command: command.name().into(),
        status,
        exit_code: status.exit_code(),
        curve_hash: cfg.curve.polynomial.hash_hex(),
        grid_hash: cfg.grid.hash_hex(),
        seed: cfg.options.seed,
        error,
        breaches,
        result,
        runtime_seconds: start.elapsed().as_secs_f64(),
    }
}

fn dispatch(cfg: &RunConfig, command: Command, art: &Artifacts) -> Result<Outcome> {
    if command == Command::Calibrate {
        return run_calibrate(cfg, art);
    }
    let (validation, model) = validated(&cfg.curve)?;
    if let Err(e) = validation.check() {
        return Ok(Outcome { result: CommandResult::Validate(validation), breaches: Vec::new(), failure: Some(e) });
    }
    if command == Command::Validate {
        return Ok(Outcome::ok(CommandResult::Validate(validation), Vec::new()));
    }
    drop(model);
    let ctx = CurveContext::new(cfg.curve.clone(), &cfg.grid)?;
    if let Some(dir) = &art.dumps {
        std::fs::create_dir_all(dir)?;
        dump_samples(&dir.join("samples.csv"), &ctx.set)?;
    }
    match command {
        Command::Basis => Ok(Outcome::ok(CommandResult::Basis(basis_report(&ctx)?), Vec::new())),
        Command::Decompose => {
            let cal = calibration(cfg, &ctx, art)?;
            let mut breaches = Vec::new();
            let r = decompose(cfg, &ctx, &cal, art, "decompose", &mut breaches)?;
            Ok(Outcome::ok(CommandResult::Decompose(r), breaches))
        }
        Command::SolveDbar => {
            let cal = calibration(cfg, &ctx, art)?;
            let mut breaches = Vec::new();
            let r = solve_dbar(cfg, &ctx, &cal, art, "solve_dbar", &mut breaches)?;
            Ok(Outcome::ok(CommandResult::SolveDbar(r), breaches))
        }
        Command::Cech => {
            let cal = calibration(cfg, &ctx, art)?;
            let mut breaches = Vec::new();
            let r = cech(cfg, &ctx, &cal, "cech", &mut breaches)?;
            Ok(Outcome::ok(CommandResult::Cech(r), breaches))
        }
        Command::Report => {
            let basis = basis_report(&ctx)?;
            let mut breaches = Vec::new();
            let (mut decomposition, mut cech_report, mut solve) = (None, None, None);
            if !cfg.forms.is_empty() {
                let cal = calibration(cfg, &ctx, art)?;
                decomposition = Some(decompose(cfg, &ctx, &cal, art, "report.decompose", &mut breaches)?);
                cech_report = Some(cech(cfg, &ctx, &cal, "report.cech", &mut breaches)?);
                if cfg.ell > ctx.degree() as i32 - 3 {
                    solve = Some(solve_dbar(cfg, &ctx, &cal, art, "report.solve_dbar", &mut breaches)?);
                }
            }
            let full = FullReport { validate: validation, basis, decompose: decomposition, cech: cech_report, solve_dbar: solve };
            Ok(Outcome::ok(CommandResult::Report(Box::new(full)), breaches))
        }
        Command::Validate | Command::Calibrate => unreachable!("handled above"),
    }
}

fn validated(spec: &CurveSpec) -> Result<(ValidationReport, PlaneCurveModel)> {
    let model = PlaneCurveModel::new(spec.clone())?;
    Ok((validate_curve(&model), model))
}

fn degree_ells(cfg: &RunConfig) -> Vec<(u32, i32)> {
    let d = cfg.curve.polynomial.degree();
    cfg.degree_ells().into_iter().filter(|&(_, ell)| ell <= d as i32 - 3).collect()
}

fn cache_path(cfg: &RunConfig, art: &Artifacts) -> PathBuf {
    art.cache.clone().unwrap_or_else(|| default_cache_path(&cfg.grid))
}

fn calibration(cfg: &RunConfig, ctx: &CurveContext, art: &Artifacts) -> Result<KernelCalibration> {
    let _ = ctx;
    cached(&cache_path(cfg, art), &cfg.grid, &degree_ells(cfg))
}

fn run_calibrate(cfg: &RunConfig, art: &Artifacts) -> Result<Outcome> {
    let cal = calibrate(&cfg.grid, &degree_ells(cfg))?;
    cal.save(&cache_path(cfg, art))?;
    Ok(Outcome::ok(CommandResult::Calibrate(cal), Vec::new()))
}

/// Twist-0 forms `h (ζ̄_i dζ̄_j − ζ̄_j dζ̄_i)/|ζ|⁴` with `h` a quadratic monomial.
pub fn residual_family() -> Vec<FormRef> {
    let mut out: Vec<FormRef> = Vec::new();
    for a in monomials(2) {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let h = FsRational::new(0, vec![(a, [0, 0, 0], C64::new(1.0, 0.0))]).expect("one term");
            out.push(Arc::new(FsForm { h, i, j }));
        }
    }
    out
}

fn basis_report(ctx: &CurveContext) -> Result<BasisReport> {
    let basis = hol_basis(ctx)?;
    let family = residual_family();
    let t = ctx.model.topology;
    Ok(BasisReport {
        degree: ctx.degree(),
        arithmetic_genus: t.arithmetic_genus,
        geometric_genus: t.geometric_genus,
        node_count: t.node_count,
        basis_size: basis.len(),
        gram_condition: basis.condition,
        dualizing_sections: dualizing_sections(&ctx.model, 0).len(),
        pairing_rank: class_rank(ctx, &family)?,
        family_size: family.len(),
    })
}

fn require_forms(cfg: &RunConfig) -> Result<()> {
    if cfg.forms.is_empty() {
        return Err(Error::Config("the configuration lists no forms".into()));
    }
    Ok(())
}

fn decompose(
    cfg: &RunConfig,
    ctx: &CurveContext,
    cal: &KernelCalibration,
    art: &Artifacts,
    prefix: &str,
    breaches: &mut Vec<Breach>,
) -> Result<DecompositionReport> {
    require_forms(cfg)?;
    let o = &cfg.options;
    let forms = build_forms(ctx, &cfg.forms)?;
    let hodge = Hodge::new(ctx, cal)?;
    let probes = probe_points(&ctx.model, o.probes, o.seed, o.probe_margin)?;
    let t = ctx.model.topology;
    let image_dimension = t.arithmetic_genus - hodge.nodes.len().min(t.arithmetic_genus);
    let mut rows = Vec::with_capacity(forms.len());
    for (k, form) in forms.iter().enumerate() {
        let ex = exactness_test(ctx, cal, form.as_ref())?;
        let d = hodge.decompose(form.clone(), &probes, o.fd_step)?;
        if let Some(dir) = &art.dumps {
            dump_probes(&dir.join(format!("decompose_form{k}.csv")), &d.probes)?;
        }
        let row = FormDecomposition::new(k, &d, ex.residual, o.exactness_threshold);
        let field = |name: &str| format!("{prefix}.forms[{k}].{name}");
        breach_if(breaches, field("homotopy_residual"), row.homotopy_residual, o.residual_threshold);
        breach_if(breaches, field("green_residual"), row.green_residual, o.residual_threshold);
        if image_dimension == 0 {
            breach_if(breaches, field("l_ratio"), row.l_ratio, o.exactness_threshold);
        }
        rows.push(row);
    }
    let flat: Vec<FormRef> = forms.iter().filter(|f| f.ell() == 0).cloned().collect();
    Ok(DecompositionReport {
        forms: rows,
        class_rank: class_rank(ctx, &flat)?,
        arithmetic_genus: t.arithmetic_genus,
        node_count: t.node_count,
        image_dimension,
        calibration: CalibrationSummary::of(cal, ctx.degree())?,
    })
}

fn solve_dbar(
    cfg: &RunConfig,
    ctx: &CurveContext,
    cal: &KernelCalibration,
    art: &Artifacts,
    prefix: &str,
    breaches: &mut Vec<Breach>,
) -> Result<SolveDbarReport> {
    require_forms(cfg)?;
    let o = &cfg.options;
    let forms = build_forms(ctx, &cfg.forms)?;
    let mut check = AffineCheck::seeded(ctx, o.probes, o.seed)?;
    check.h = o.fd_step;
    let (run_affine, run_compact) = match o.solver {
        Solver::Affine => (true, false),
        Solver::Compact => (false, true),
        Solver::Both => (true, true),
    };
    let mut report = SolveDbarReport { ell: cfg.ell, affine: Vec::new(), compact: Vec::new(), agreement: Vec::new() };
    for (k, form) in forms.iter().enumerate() {
        let field = |solver: &str, name: &str| format!("{prefix}.{solver}[{k}].{name}");
        let aff = if run_affine {
            let sol = affine_solution(ctx, form.clone(), cfg.ell)?;
            let r = check_solution(ctx, cal, &sol, &check, 0.0)?;
            breach_if(breaches, field("affine", "residual"), r.residual, o.residual_threshold);
            if let Some(g) = &r.growth {
                if !g.bounded {
                    breaches.push(Breach { field: field("affine", "growth.sup"), value: g.sup, limit: 10.0 * g.median });
                }
            }
            if let Some(dir) = &art.dumps {
                dump_affine(&dir.join(format!("affine_form{k}.csv")), &r.probes)?;
            }
            report.affine.push(r);
            Some(sol)
        } else {
            None
        };
        if run_compact {
            let (sol, h1) = compact_solution(ctx, form.clone(), cfg.ell)?;
            let plain = AffineCheck { growth: false, ..check.clone() };
            let r = check_solution(ctx, cal, &sol, &plain, h1)?;
            breach_if(breaches, field("compact", "residual"), r.residual, o.residual_threshold);
            if let Some(dir) = &art.dumps {
                dump_affine(&dir.join(format!("compact_form{k}.csv")), &r.probes)?;
            }
            report.compact.push(r);
            if let Some(a) = &aff {
                let spread = agreement(ctx, cal, a, &sol, &check.probes)?;
                breach_if(breaches, format!("{prefix}.agreement[{k}]"), spread, o.residual_threshold);
                report.agreement.push(spread);
            }
        }
    }
    Ok(report)
}

fn cech(
    cfg: &RunConfig,
    ctx: &CurveContext,
    cal: &KernelCalibration,
    prefix: &str,
    breaches: &mut Vec<Breach>,
) -> Result<CechReport> {
    require_forms(cfg)?;
    let forms: Vec<FormRef> = build_forms(ctx, &cfg.forms)?.into_iter().filter(|f| f.ell() == 0).collect();
    let cover = CechCover::default();
    let fit = CechFit::default();
    let sections = dualizing_sections(&ctx.model, 0);
    let gamma = sections.iter().map(|s| section_norm(ctx, s)).fold(0.0, f64::max);
    let mut round_trips = Vec::with_capacity(forms.len());
    let mut backs = Vec::with_capacity(forms.len());
    for (k, form) in forms.iter().enumerate() {
        let cocycle = residual_to_cech(ctx, cal, &cover, form.clone(), &fit)?;
        let back = cech_form_ref(&cover, &cocycle)?;
        let pair = |f: &FormRef| sections.iter().map(|s| residual_pairing(ctx, f.as_ref(), s)).collect::<Result<Vec<_>>>();
        let (p, q) = (pair(form)?, pair(&back)?);
        let diff = p.iter().zip(&q).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let size = p.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let bound = 4.0 * std::f64::consts::PI * ctx.norm(form.as_ref()) * gamma;
        let deviation = diff / size.max(RANK_CUT * bound).max(f64::MIN_POSITIVE);
        breach_if(breaches, format!("{prefix}.round_trips[{k}].deviation"), deviation, cfg.options.round_trip_threshold);
        round_trips.push(CechRoundTrip { form: k, terms: cocycle.entries.iter().map(|e| e.terms.len()).sum(), pairing: p, pairing_back: q, deviation });
        backs.push(back);
    }
    let rank = class_rank(ctx, &forms)?;
    let rank_back = class_rank(ctx, &backs)?;
    if rank != rank_back {
        breaches.push(Breach { field: format!("{prefix}.rank_back"), value: rank_back as f64, limit: rank as f64 });
    }
    Ok(CechReport { transitions: cover.transitions.clone(), round_trips, rank, rank_back })
}

/// Loads the configuration, applies the flags, runs the command and writes
/// `<out>/<command>.json`.
pub fn run(cli: &Cli) -> Report {
    let loaded = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Err(Error::Config("--config is required".into())),
    };
    let mut cfg = match loaded {
        Ok(c) => c,
        Err(e) => return write_or_warn(&cli.out, config_error(cli.command, e)),
    };
    if let Some(s) = cli.grid_scale {
        if !(s > 0.0 && s.is_finite()) {
            return write_or_warn(&cli.out, config_error(cli.command, Error::Config(format!("grid scale {s}"))));
        }
        cfg.grid = cfg.grid.scaled(s);
    }
    if let Some(seed) = cli.seed {
        cfg.options.seed = seed;
    }
    let art = Artifacts { dumps: cli.debug_dumps.then(|| cli.out.clone()), cache: cli.cache.clone() };
    write_or_warn(&cli.out, run_command(&cfg, cli.command, &art))
}

fn config_error(command: Command, e: Error) -> Report {
    let status = Status::of_error(&e);
    Report {
        schema: REPORT_SCHEMA,
        command: command.name().into(),
        status,
        exit_code: status.exit_code(),
        curve_hash: String::new(),
        grid_hash: String::new(),
        seed: 0,
        error: Some(ErrorRecord::from(&e)),
        breaches: Vec::new(),
        result: None,
        runtime_seconds: 0.0,
    }
}

fn write_or_warn(dir: &Path, report: Report) -> Report {
    if let Err(e) = write_report(dir, &report) {
        eprintln!("cannot write report: {e}");
    }
    report
}
