use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use delstab::complex::{star_isomorphic, IsomorphismReport, SimplicialComplex, VertexMap};
use delstab::datasets;
use delstab::genericity::{Analysis, ParameterMode, PjSelection};
use delstab::perturb::{
    run_batch, stability_budget, BatchSpec, MetricBudgetMode, TrialContext, TrialKind, TrialVerdict,
};
use delstab::pointio;
use delstab::points::{PointSet, VertexId};
use delstab::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::report::{self, ReportEnvelope};
use crate::{
    AnalyzeArgs, BudgetArgs, Command, CompareArgs, Format, GenArgs, Generator, MetricArgs,
    OutputArgs, RelaxArgs, StabilityArgs, EXIT_CHECK_FAILED, EXIT_IO, EXIT_PARSE,
    EXIT_PRECONDITION,
};

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Parse { .. } | Error::Json(_) => EXIT_PARSE,
        _ => EXIT_PRECONDITION,
    }
}

pub fn run(cmd: &Command) -> Result<u8> {
    let started = Instant::now();
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Analyze(a) => analyze(a, started),
        Command::Stability(a) => stability(a, started),
        Command::Relax(a) => relax(a, started),
        Command::Metric(a) => metric(a, started),
        Command::Compare(a) => compare(a, started),
        Command::Budget(a) => budget(a, started),
    }
}

fn finish(
    mut env: ReportEnvelope,
    out: &OutputArgs,
    started: Instant,
    csv: Option<String>,
    code: u8,
) -> Result<u8> {
    env.timings.total_seconds = started.elapsed().as_secs_f64();
    let text = match (out.format, csv) {
        (Format::Csv, Some(csv)) => csv,
        (Format::Csv, None) => {
            return Err(Error::InvalidArgument(
                "this command has no CSV output".into(),
            ))
        }
        (Format::Json, _) => env.to_json()?,
    };
    report::emit(out.out.as_deref(), &text)?;
    if code != 0 {
        eprintln!("{}", env.status);
    }
    Ok(code)
}

fn load(path: &Path) -> Result<(PointSet, String)> {
    let points = pointio::read(path)?;
    let digest = pointio::digest(&points);
    Ok((points, digest))
}

fn gen(a: &GenArgs) -> Result<u8> {
    let points = match a.generator {
        Generator::Grid => datasets::grid(&a.dims, a.spacing, a.jitter, a.seed)?,
        Generator::Uniform => datasets::uniform(a.n, a.dim, a.lo, a.hi, a.seed)?,
        Generator::DeltaSearch => {
            let s = datasets::delta_search(&a.dims, a.spacing, a.jitter, a.k, a.seed)?;
            if let Some(path) = &a.report {
                let text = serde_json::to_string_pretty(&json!({
                    "config": a,
                    "candidate_deltas": s.candidate_deltas,
                    "best_index": s.best_index,
                    "dataset_digest": pointio::digest(&s.best),
                }))?;
                std::fs::write(path, text + "\n")?;
            }
            s.best
        }
    };
    report::emit(a.out.as_deref(), &pointio::format(&points))?;
    Ok(0)
}

fn analyze(a: &AnalyzeArgs, started: Instant) -> Result<u8> {
    let (points, digest) = load(&a.input)?;
    let selection = PjSelection::parse(&a.pj)?;
    let mut env = ReportEnvelope::new("analyze", a, started)?;
    env.dataset_digest = Some(digest);
    let analysis = Analysis::new(points)?;
    if let Some(path) = &a.complex_out {
        let text = serde_json::to_string_pretty(&json!({
            "complex": analysis.delaunay.complex.to_vertex_lists(),
            "balls": analysis.delaunay.balls,
        }))?;
        std::fs::write(path, text + "\n")?;
    }
    let pj = analysis.select(&selection);
    let mut outputs = json!({
        "n": analysis.points.len(),
        "dim": analysis.points.dim(),
        "sampling": analysis.sampling,
        "delaunay": {
            "simplices": analysis.delaunay.balls.len(),
            "min_protection": analysis.delaunay.min_protection(),
            "generic": analysis.delaunay.generic,
            "degeneracy_flags": analysis.delaunay.degeneracy_flags,
            "tolerance": analysis.tolerance(),
        },
        "deep_interior": analysis.deep_interior,
        "p_j": pj,
    });
    let mut csv_rows = Vec::new();
    let code = if pj.is_empty() {
        env.status = "non-generic: P_J is empty (no deep interior points)".into();
        EXIT_PRECONDITION
    } else {
        let (protection, class) = analysis.classify(&pj)?;
        outputs["protection"] = json!({
            "delta_measured": protection.delta_measured,
            "delta": protection.delta,
            "nu_tilde": protection.nu_tilde,
            "generic": protection.generic,
            "audited_simplices": class.audited.len(),
            "max_audited_radius": class.max_audited_radius,
        });
        if !protection.generic {
            env.status = format!(
                "non-generic: delta = {:e} within tolerance",
                protection.delta_measured
            );
            EXIT_PRECONDITION
        } else {
            let cert = analysis.thickness_certificate(&pj)?;
            let audit = analysis.lemma_audit(&pj)?;
            for s in &audit.simplices {
                csv_rows.push(vec![
                    report::ids(s.vertices.vertices()),
                    format!("{:e}", s.radius),
                    format!("{:e}", s.protection),
                    format!("{:e}", s.thickness),
                    s.secure.to_string(),
                ]);
            }
            let ok = cert.valid && audit.checks.all_pass();
            outputs["certificate"] = json!({
                "upsilon0": cert.upsilon0,
                "nu_tilde": cert.nu_tilde,
                "min_thickness": cert.min_thickness,
                "margin": cert.margin,
                "valid": cert.valid,
                "witnesses": cert.witnesses.len(),
            });
            outputs["audit"] = serde_json::to_value(&audit)?;
            if ok {
                0
            } else {
                env.status = "check failed: thickness certificate or lemma audit".into();
                EXIT_CHECK_FAILED
            }
        }
    };
    env.outputs = outputs;
    let csv = report::csv(
        &["vertices", "radius", "protection", "thickness", "secure"],
        csv_rows,
    )?;
    finish(env, &a.output, started, Some(csv), code)
}

fn parse_kind(s: &str) -> Result<TrialKind> {
    serde_json::from_value(Value::String(s.trim().replace('-', "_")))
        .map_err(|_| Error::InvalidArgument(format!("unknown trial kind {s:?}")))
}

/// Loads the dataset and checks the audit unless forced.
fn prepare(
    input: &Path,
    selection: &PjSelection,
    force: bool,
) -> Result<(Analysis, TrialContext, String)> {
    let (points, digest) = load(input)?;
    let analysis = Analysis::new(points)?;
    let pj = analysis.select(selection);
    if pj.is_empty() {
        return Err(Error::Precondition(
            "P_J is empty (no deep interior points)".into(),
        ));
    }
    if !force {
        let audit = analysis.lemma_audit(&pj)?;
        if !audit.generic {
            return Err(Error::Precondition(format!(
                "point set is not generic (delta = {:e})",
                audit.delta
            )));
        }
        if !audit.checks.all_pass() {
            return Err(Error::Precondition(
                "lemma audit does not pass; use --force".into(),
            ));
        }
    }
    let ctx = TrialContext::new(
        &analysis,
        &PjSelection::Ids(pj.into_iter().collect()),
        ParameterMode::Measured,
    )?;
    Ok((analysis, ctx, digest))
}

#[derive(Serialize)]
struct SummaryRow {
    trial: String,
    budget_fraction: Option<f64>,
    trials: usize,
    passed: usize,
    in_budget: usize,
    in_budget_failed: usize,
    hard_failures: usize,
}

fn summarize(verdicts: &[TrialVerdict]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, u64), SummaryRow> = BTreeMap::new();
    for v in verdicts {
        let key = (v.trial.clone(), v.budget_fraction.unwrap_or(0.0).to_bits());
        let row = groups.entry(key).or_insert_with(|| SummaryRow {
            trial: v.trial.clone(),
            budget_fraction: v.budget_fraction,
            trials: 0,
            passed: 0,
            in_budget: 0,
            in_budget_failed: 0,
            hard_failures: 0,
        });
        row.trials += 1;
        row.passed += v.passed as usize;
        row.in_budget += v.in_budget as usize;
        row.in_budget_failed += (v.in_budget && !v.passed) as usize;
        row.hard_failures += v.hard_failure as usize;
    }
    groups.into_values().collect()
}

fn verdict_code(verdicts: &[TrialVerdict]) -> (u8, String) {
    let hard = verdicts.iter().filter(|v| v.hard_failure).count();
    let failed = verdicts.iter().filter(|v| v.in_budget && !v.passed).count();
    if hard > 0 {
        let first = verdicts.iter().find(|v| v.hard_failure).expect("counted");
        (
            EXIT_CHECK_FAILED,
            format!(
                "check failed: {hard} hard failure(s); {}",
                first.details.join("; ")
            ),
        )
    } else if failed > 0 {
        (
            EXIT_CHECK_FAILED,
            format!("check failed: {failed} in-budget trial(s) failed"),
        )
    } else {
        (0, "ok".into())
    }
}

fn verdict_csv(verdicts: &[TrialVerdict]) -> Result<String> {
    let rows = verdicts.iter().map(|v| {
        vec![
            v.trial.clone(),
            v.seed.map(|s| s.to_string()).unwrap_or_default(),
            v.budget_fraction.map(|f| f.to_string()).unwrap_or_default(),
            format!("{:e}", v.budget_used),
            format!("{:e}", v.budget),
            v.in_budget.to_string(),
            v.certified.to_string(),
            v.passed.to_string(),
            v.hard_failure.to_string(),
            v.measured
                .get("residual_protection")
                .map(|x| format!("{x:e}"))
                .unwrap_or_default(),
        ]
    });
    report::csv(
        &[
            "trial",
            "seed",
            "budget_fraction",
            "rho",
            "budget",
            "in_budget",
            "certified",
            "passed",
            "hard_failure",
            "residual_protection",
        ],
        rows,
    )
}

#[derive(Serialize)]
struct StabilityConfig<'a> {
    input: PathBuf,
    pj: &'a PjSelection,
    budget_fraction: &'a [f64],
    seeds_count: u64,
    seed: u64,
    models: &'a [TrialKind],
    force: bool,
}

fn stability(a: &StabilityArgs, started: Instant) -> Result<u8> {
    let (input, selection, fractions, seeds, kinds) = match &a.batch {
        Some(path) => {
            let spec: BatchSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let base = path.parent().unwrap_or(Path::new("."));
            (
                base.join(&spec.dataset),
                spec.pj,
                spec.budgets,
                spec.seeds,
                spec.models,
            )
        }
        None => {
            let input = a
                .input
                .clone()
                .ok_or_else(|| Error::InvalidArgument("stability needs --in or --batch".into()))?;
            let kinds = a
                .models
                .iter()
                .map(|m| parse_kind(m))
                .collect::<Result<Vec<_>>>()?;
            (
                input,
                PjSelection::parse(&a.pj)?,
                a.budget_fraction.clone(),
                a.seeds_count,
                kinds,
            )
        }
    };
    let config = StabilityConfig {
        input: input.clone(),
        pj: &selection,
        budget_fraction: &fractions,
        seeds_count: seeds,
        seed: a.seed,
        models: &kinds,
        force: a.force,
    };
    let mut env = ReportEnvelope::new("stability", &config, started)?;
    let (_, ctx, digest) = prepare(&input, &selection, a.force)?;
    env.dataset_digest = Some(digest);
    let verdicts = run_batch(&ctx, &kinds, &fractions, seeds, a.seed, a.inject_fault)?;
    if let Some(path) = &a.jsonl {
        let mut text = String::new();
        for v in &verdicts {
            text.push_str(&serde_json::to_string(v)?);
            text.push('\n');
        }
        std::fs::write(path, text)?;
    }
    let (code, status) = verdict_code(&verdicts);
    env.status = status;
    env.outputs = json!({
        "p_j": ctx.pj,
        "parameters": ctx.params,
        "budget": ctx.budget,
        "summary": summarize(&verdicts),
        "verdicts": verdicts,
    });
    let csv = verdict_csv(&verdicts)?;
    finish(env, &a.output, started, Some(csv), code)
}

fn relax(a: &RelaxArgs, started: Instant) -> Result<u8> {
    let mut env = ReportEnvelope::new("relax", a, started)?;
    let (_, ctx, digest) = prepare(&a.input, &PjSelection::parse(&a.pj)?, true)?;
    env.dataset_digest = Some(digest);
    let rho = a.rho.unwrap_or(a.budget_fraction * ctx.budget.rho_point);
    let v = ctx.relaxation_trial(rho, a.max_evaluations)?;
    let (code, status) = if !v.certified {
        (
            EXIT_CHECK_FAILED,
            "check failed: undecided memberships".to_string(),
        )
    } else {
        verdict_code(std::slice::from_ref(&v))
    };
    env.status = status;
    env.outputs = json!({ "p_j": ctx.pj, "budget": ctx.budget, "verdict": v });
    let csv = verdict_csv(std::slice::from_ref(&v))?;
    finish(env, &a.output, started, Some(csv), code)
}

fn metric(a: &MetricArgs, started: Instant) -> Result<u8> {
    let mut env = ReportEnvelope::new("metric", a, started)?;
    let (_, ctx, digest) = prepare(&a.input, &PjSelection::parse(&a.pj)?, true)?;
    env.dataset_digest = Some(digest);
    let (mode, budget) = if a.generic_budget {
        (MetricBudgetMode::Generic, ctx.budget.rho_generic)
    } else {
        (MetricBudgetMode::Secure, ctx.budget.rho_metric)
    };
    let rho = a
        .amplitude
        .map(|amp| 2.0 * amp)
        .unwrap_or(a.budget_fraction * budget);
    let field = ctx.metric_field(rho, a.seed)?;
    let mut v = ctx.metric_stability_trial(&field, mode, a.inject_fault)?;
    v.seed = Some(a.seed);
    let (code, status) = verdict_code(std::slice::from_ref(&v));
    env.status = status;
    env.outputs = json!({ "p_j": ctx.pj, "budget": ctx.budget, "field": field, "verdict": v });
    let csv = verdict_csv(std::slice::from_ref(&v))?;
    finish(env, &a.output, started, Some(csv), code)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexFile {
    Lists(Vec<Vec<VertexId>>),
    Report { complex: Vec<Vec<VertexId>> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MappingFile {
    Images(Vec<VertexId>),
    Pairs(BTreeMap<VertexId, VertexId>),
}

fn read_complex(path: &Path) -> Result<SimplicialComplex> {
    let file: ComplexFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let lists = match file {
        ComplexFile::Lists(l) | ComplexFile::Report { complex: l } => l,
    };
    SimplicialComplex::from_vertex_lists(&lists)
}

fn compare(a: &CompareArgs, started: Instant) -> Result<u8> {
    let k = read_complex(&a.k)?;
    let k2 = read_complex(&a.k2)?;
    let verts = k.vertices();
    let zeta = match &a.mapping {
        Some(path) => match serde_json::from_str(&std::fs::read_to_string(path)?)? {
            MappingFile::Images(v) => VertexMap::from_images(&v),
            MappingFile::Pairs(p) => VertexMap::from_pairs(p),
        },
        None => VertexMap::from_pairs(verts.iter().map(|&v| (v, v))),
    };
    let q: BTreeSet<VertexId> = match &a.pj {
        Some(s) => match PjSelection::parse(s)? {
            PjSelection::Ids(ids) => ids.into_iter().collect(),
            PjSelection::Auto(_) => verts.clone(),
        },
        None => verts.clone(),
    };
    let r = star_isomorphic(&k, &k2, &q, &zeta)?;
    let mut env = ReportEnvelope::new("compare", a, started)?;
    let top = k.dimension().unwrap_or(0).max(k2.dimension().unwrap_or(0));
    let by_dim: Vec<Value> = (0..=top)
        .map(|d| {
            json!({
                "dim": d,
                "missing": IsomorphismReport::count_of_dim(&r.missing, d),
                "extra": IsomorphismReport::count_of_dim(&r.extra, d),
            })
        })
        .collect();
    let code = if r.isomorphic {
        0
    } else {
        env.status = format!(
            "check failed: {} missing, {} extra simplices",
            r.missing.len(),
            r.extra.len()
        );
        EXIT_CHECK_FAILED
    };
    let rows = r
        .missing
        .iter()
        .map(|s| vec!["missing".to_string(), report::ids(s.vertices())])
        .chain(
            r.extra
                .iter()
                .map(|s| vec!["extra".to_string(), report::ids(s.vertices())]),
        )
        .collect::<Vec<_>>();
    env.outputs = json!({ "isomorphic": r.isomorphic, "by_dim": by_dim, "missing": r.missing, "extra": r.extra });
    let csv = report::csv(&["side", "vertices"], rows)?;
    finish(env, &a.output, started, Some(csv), code)
}

fn budget(a: &BudgetArgs, started: Instant) -> Result<u8> {
    let mut env = ReportEnvelope::new("budget", a, started)?;
    let params = match &a.input {
        Some(path) => {
            let (points, digest) = load(path)?;
            env.dataset_digest = Some(digest);
            let analysis = Analysis::new(points)?;
            let pj = analysis.select(&PjSelection::parse(&a.pj)?);
            let mode = if a.certified {
                ParameterMode::Certified
            } else {
                ParameterMode::Measured
            };
            let p = analysis.secure_parameters(&pj, mode)?;
            (p.upsilon0, p.mu0, p.delta, p.epsilon, p.nu_tilde)
        }
        None => {
            let need = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| Error::InvalidArgument(format!("budget needs --{name} or --in")))
            };
            (
                need(a.upsilon0, "upsilon0")?,
                need(a.mu0, "mu0")?,
                need(a.delta, "delta")?,
                need(a.eps, "eps")?,
                need(a.nu_tilde, "nu-tilde")?,
            )
        }
    };
    let b = stability_budget(params.0, params.1, params.2, params.3, params.4)?;
    env.outputs = json!({
        "upsilon0": params.0,
        "mu0": params.1,
        "delta": params.2,
        "epsilon": params.3,
        "nu_tilde": params.4,
        "budget": b,
    });
    let csv = report::csv(
        &[
            "rho_cc",
            "rho_point",
            "rho_metric_protect",
            "rho_metric",
            "rho_generic",
        ],
        [vec![
            format!("{:e}", b.rho_cc),
            format!("{:e}", b.rho_point),
            format!("{:e}", b.rho_metric_protect),
            format!("{:e}", b.rho_metric),
            format!("{:e}", b.rho_generic),
        ]],
    )?;
    finish(env, &a.output, started, Some(csv), 0)
}
