use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use dmk_core::io::{
    canonical_hash, from_json, DualMeasureDoc, McDoc, MeasureDoc, MeasureSpec, PolytopeDoc,
    ProblemSpec, SolutionDoc, StarBodyDesc, SCHEMA,
};
use dmk_core::{
    dual_curvature_measure, mc_dual_curvature, mc_dual_intrinsic_volume, solve_density,
    validate_measure, DirectionWeightMeasure, Error, HPolytope, MeasureOptions, SolveOptions,
    SolveReport, StarBody,
};
use serde::Serialize;
use serde_json::json;

use crate::render;
use crate::{Common, Failure};

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    from_json(text).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn emit<T: Serialize>(doc: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => {
            fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
        }
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

/// `--Q` is a file when one exists at that path, a shorthand otherwise.
fn star_desc(arg: &str) -> Result<StarBodyDesc, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        parse(path, &read(path)?)
    } else {
        Ok(StarBodyDesc::parse_shorthand(arg)?)
    }
}

fn star(common: &Common) -> Result<StarBody, Failure> {
    match &common.star {
        Some(arg) => Ok(star_desc(arg)?.build()?),
        None => Ok(StarBodyDesc::default().build()?),
    }
}

fn required(v: Option<f64>, name: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure {
        code: 1,
        message: format!("--{name} is required"),
    })
}

fn measure_options(common: &Common) -> MeasureOptions {
    common
        .rtol
        .map(MeasureOptions::with_rtol)
        .unwrap_or_default()
}

pub fn validate(path: &Path) -> Result<(), Failure> {
    let text = read(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    let mu: DirectionWeightMeasure = if value.get("measure").is_some() {
        match parse::<ProblemSpec>(path, &text)?.discrete_measure() {
            Err(Error::DegenerateDensity) => {
                return Err(Failure {
                    code: 2,
                    message: Error::DegenerateDensity.to_string(),
                })
            }
            r => r?,
        }
    } else {
        parse::<MeasureDoc>(path, &text)?.build()?
    };
    let check = validate_measure(&mu);
    let doc = json!({
        "schema": SCHEMA,
        "valid": check.valid,
        "atoms": mu.len(),
        "witness": check.witness,
    });
    emit(&doc, None)?;
    if check.valid {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: "measure is concentrated on a closed hemisphere".into(),
        })
    }
}

pub fn eval(path: &Path, common: &Common) -> Result<(), Failure> {
    let poly = parse::<PolytopeDoc>(path, &read(path)?)?.build()?;
    let q = required(common.q, "q")?;
    let p = common.p.unwrap_or(0.0);
    let opts = measure_options(common);
    let result = dual_curvature_measure(&poly, &star(common)?, q, p, &opts)?;
    let doc = DualMeasureDoc {
        schema: SCHEMA.into(),
        p,
        q,
        rtol: opts.rtol,
        result,
    };
    Ok(emit(&doc, common.out.as_deref())?)
}

/// The problem file with command-line overrides applied.
fn load_problem(
    path: &Path,
    common: &Common,
    max_iters: Option<usize>,
) -> Result<(ProblemSpec, String), Failure> {
    let text = read(path)?;
    let hash = canonical_hash(&text)?;
    let mut spec: ProblemSpec = parse(path, &text)?;
    if let Some(p) = common.p {
        spec.p = p;
    }
    if let Some(q) = common.q {
        spec.q = q;
    }
    if let Some(arg) = &common.star {
        spec.star_body = star_desc(arg)?;
    }
    if let Some(rtol) = common.rtol {
        spec.options.rtol = rtol;
    }
    if let Some(seed) = common.seed {
        spec.options.seed = seed;
    }
    if let Some(m) = max_iters {
        spec.options.max_iters = m;
    }
    Ok((spec, hash))
}

fn solution_doc(
    spec: &ProblemSpec,
    hash: &str,
    star: &StarBody,
    poly: &HPolytope,
    report: SolveReport,
    normalized: bool,
) -> Result<SolutionDoc, Failure> {
    let opts = MeasureOptions::with_rtol(spec.options.rtol);
    let m = dual_curvature_measure(poly, star, spec.q, spec.p, &opts)?;
    Ok(SolutionDoc {
        schema: SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        input_hash: hash.into(),
        dimension: poly.dim(),
        p: spec.p,
        q: spec.q,
        normalized,
        normals: poly
            .normals()
            .iter()
            .map(|u| u.as_slice().to_vec())
            .collect(),
        offsets: poly.offsets().to_vec(),
        vertices: poly
            .h_to_v()
            .vertices()
            .iter()
            .map(|v| v.as_slice().to_vec())
            .collect(),
        per_normal_cq: m.per_normal_cq,
        per_normal_cpq: m.per_normal_cpq,
        vq: m.vq,
        rtol: opts.rtol,
        report,
    })
}

pub fn solve(
    path: &Path,
    common: &Common,
    svg: Option<&Path>,
    max_iters: Option<usize>,
    normalized: bool,
) -> Result<(), Failure> {
    let (spec, hash) = load_problem(path, common, max_iters)?;
    let mu = spec.discrete_measure()?;
    let star = spec.star_body.build()?;
    let (poly, report) = if normalized {
        dmk_core::solve_normalized(&mu, &star, spec.p, spec.q, &spec.options)?
    } else {
        dmk_core::solve(&mu, &star, spec.p, spec.q, &spec.options)?
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let doc = solution_doc(&spec, &hash, &star, &poly, report, normalized)?;
    emit(&doc, common.out.as_deref())?;
    if let Some(path) = svg {
        let text = match poly.dim() {
            2 => render::svg(&poly, &doc.per_normal_cq),
            3 => {
                eprintln!("note: n = 3, writing an OFF mesh to {}", path.display());
                render::off(&poly)
            }
            n => {
                eprintln!("note: no drawing for n = {n}");
                return Ok(());
            }
        };
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

pub fn oracle(path: &Path, common: &Common, samples: usize) -> Result<(), Failure> {
    let poly = parse::<PolytopeDoc>(path, &read(path)?)?.build()?;
    let q = required(common.q, "q")?;
    let seed = common.seed.unwrap_or(0);
    let star = star(common)?;
    let doc = McDoc {
        schema: SCHEMA.into(),
        q,
        samples,
        seed,
        vq: mc_dual_intrinsic_volume(&poly, &star, q, samples, seed)?,
        atoms: mc_dual_curvature(&poly, &star, q, samples, seed)?,
    };
    Ok(emit(&doc, common.out.as_deref())?)
}

pub fn approx(path: &Path, common: &Common, max_iters: Option<usize>) -> Result<(), Failure> {
    let (spec, hash) = load_problem(path, common, max_iters)?;
    let MeasureSpec::Density {
        density,
        resolutions,
    } = &spec.measure
    else {
        return Err(Error::InvalidInput("approx needs a density measure".into()).into());
    };
    let star = spec.star_body.build()?;
    let opts: &SolveOptions = &spec.options;
    let (runs, summary) = solve_density(
        density,
        &star,
        spec.dimension,
        spec.p,
        spec.q,
        resolutions,
        opts,
    )?;
    let solutions = runs
        .into_iter()
        .map(|r| solution_doc(&spec, &hash, &star, &r.polytope, r.report, spec.p == spec.q))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = json!({
        "schema": SCHEMA,
        "summary": summary,
        "solutions": solutions,
    });
    Ok(emit(&doc, common.out.as_deref())?)
}
