//! Command implementations. Each returns whether the result met its
//! tolerances; hard failures are errors.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use mrpz_core::baselines::hankel_singular_values;
use mrpz_core::compare::{compare, to_csv, to_json, to_markdown, CompareOptions, MethodConfig};
use mrpz_core::complex::{format_complex, parse_complex, parse_complex_list};
use mrpz_core::constraints::{reduce, verify_constraints, ConstraintSpec, ReducedModel, SolveOptions};
use mrpz_core::io::{read_samples, read_system, write_loewner, write_model, write_samples, write_system, SampleFile};
use mrpz_core::loewner::{build_loewner_from_data, reduce_from_loewner, LoewnerData, SignConvention};
use mrpz_core::lti::{eval_tf, eval_tf_deriv, find_unpaired_sample, invariant_zeros};
use mrpz_core::metrics::{dc_gain, h2_norm, hinf_norm, max_real_pole, HINF_RTOL};
use mrpz_core::moments::{InterpolationPoint, InterpolationSpec};
use mrpz_core::synth::{random_stable_system, rng};
use mrpz_core::{Error, TransferSample};
use num_complex::Complex64;

use crate::report::{Analysis, Check, ModelReport};
use crate::{Cli, Command, ConstraintArgs, Format};

/// Reports are checked against this multiple of the solve tolerance.
const VERIFY_FACTOR: f64 = 100.0;

pub enum Outcome {
    Success,
    /// The run finished but a tolerance or stability requirement was missed.
    Degraded(String),
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        bail!("tolerance must be a positive number, got {}", cli.tol);
    }
    match &cli.command {
        Command::Analyze { system, format, out } => analyze(system, *format, out.as_deref()),
        Command::Reduce { system, constraints, out, format, require_stable, least_norm } => {
            let opts = SolveOptions { least_norm: *least_norm, tol: cli.tol, ..Default::default() };
            reduce_system(system, constraints, out, *format, *require_stable, &opts)
        }
        Command::ReduceData { samples, constraints, out, loewner, format, require_stable, paper_sign_compat } => {
            let convention = if *paper_sign_compat { SignConvention::PaperLiteral } else { SignConvention::Consistent };
            let loewner = loewner.clone().unwrap_or_else(|| out.with_extension("loewner.json"));
            reduce_data(samples, constraints, out, &loewner, *format, *require_stable, convention, cli.tol)
        }
        Command::Compare { system, methods, order, constraints, format, out, least_norm } => {
            let solve = SolveOptions { least_norm: *least_norm, tol: cli.tol, ..Default::default() };
            let opts = CompareOptions { solve, ..Default::default() };
            compare_methods(system, methods.as_deref(), *order, constraints, *format, out.as_deref(), &opts)
        }
        Command::Synth { order, seed, out, samples, constraints } => {
            synth(*order, *seed, out, samples.as_deref(), constraints)
        }
    }
}

fn list(flag: &str, text: &Option<String>) -> Result<Vec<Complex64>> {
    match text {
        Some(t) => parse_complex_list(t).with_context(|| format!("--{flag}")),
        None => Ok(Vec::new()),
    }
}

fn interpolation_spec(args: &ConstraintArgs) -> Result<InterpolationSpec> {
    let text = args.points.as_deref().context("--points is required")?;
    let points = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (value, mult) = match item.split_once(':') {
                Some((v, m)) => (v, m.parse::<usize>().with_context(|| format!("multiplicity in `{item}`"))?),
                None => (item, 1),
            };
            Ok(InterpolationPoint { point: parse_complex(value)?, multiplicity: mult })
        })
        .collect::<Result<Vec<_>>>()
        .context("--points")?;
    Ok(InterpolationSpec::new(points)?)
}

fn constraint_spec(args: &ConstraintArgs) -> Result<ConstraintSpec> {
    Ok(ConstraintSpec {
        poles: list("poles", &args.poles)?,
        zeros: list("zeros", &args.zeros)?,
        derivative_points: list("deriv-points", &args.deriv_points)?,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(report: &ModelReport, require_stable: bool) -> Outcome {
    if !report.within_tolerance {
        return Outcome::Degraded(format!(
            "largest relative residual {:.3e} exceeds {:.3e}",
            report.max_relative, report.tolerance
        ));
    }
    if require_stable && (report.max_real_pole.is_nan() || report.max_real_pole >= 0.0) {
        return Outcome::Degraded(format!(
            "reduced model is not stable: largest pole real part {:.6e}",
            report.max_real_pole
        ));
    }
    Outcome::Success
}

fn analyze(path: &Path, format: Format, out: Option<&Path>) -> Result<Outcome> {
    let sys = read_system(path).with_context(|| format!("reading {}", path.display()))?;
    let stable = sys.is_stable();
    let hsv = if stable { Some(hankel_singular_values(&sys)?) } else { None };
    let analysis = Analysis {
        order: sys.order(),
        stable,
        minimal: sys.is_minimal(),
        poles: sys.poles().iter().map(|&p| format_complex(p)).collect(),
        zeros: invariant_zeros(&sys).into_iter().map(format_complex).collect(),
        hankel_singular_values: hsv,
        h2_norm: stable.then(|| h2_norm(&sys)),
        hinf_norm: stable.then(|| hinf_norm(&sys, HINF_RTOL)),
        dc_gain: dc_gain(&sys).map(|z| z.re),
    };
    emit(&analysis.render(format)?, out)?;
    Ok(Outcome::Success)
}

fn reduce_system(
    path: &Path,
    args: &ConstraintArgs,
    out: &Path,
    format: Format,
    require_stable: bool,
    opts: &SolveOptions,
) -> Result<Outcome> {
    let sys = read_system(path).with_context(|| format!("reading {}", path.display()))?;
    sys.warn_if_not_minimal();
    let spec = interpolation_spec(args)?;
    let cons = constraint_spec(args)?;
    let model = reduce(&sys, &spec, &cons, opts)?;
    write_model(out, &model).with_context(|| format!("writing {}", out.display()))?;
    info!("wrote order-{} model to {}", model.order(), out.display());
    let checked = verify_constraints(&model, &spec, &cons, &sys);
    let report = ModelReport::from_constraints(model.order(), &checked, VERIFY_FACTOR * opts.tol);
    emit(&report.render(format)?, None)?;
    Ok(finish(&report, require_stable))
}

fn lines(file: &SampleFile, p: Complex64) -> String {
    let l: Vec<String> = file.lines_at(p).iter().map(u64::to_string).collect();
    if l.is_empty() {
        "none".into()
    } else {
        l.join(", ")
    }
}

/// Attaches CSV line numbers to sample-related failures.
fn locate(err: Error, file: &SampleFile, path: &Path) -> anyhow::Error {
    let at = path.display();
    match err {
        Error::MissingDerivative(p) => anyhow!(
            "{at}: no derivative (order 1) sample at {} (samples at this point on lines {})",
            format_complex(p),
            lines(file, p)
        ),
        Error::MissingSample(p) => anyhow!("{at}: no value (order 0) sample at {}", format_complex(p)),
        Error::NotConjugateSymmetric(msg) => match find_unpaired_sample(&file.samples) {
            Some(i) => anyhow!("{at}:{}: sample has no conjugate partner ({msg})", file.lines[i]),
            None => anyhow!("{at}: {msg}"),
        },
        Error::CoincidentPoints { left, right } => anyhow!(
            "{at}: point {} (lines {}) coincides with point {} (lines {})",
            format_complex(left),
            lines(file, left),
            format_complex(right),
            lines(file, right)
        ),
        other => anyhow::Error::new(other).context(format!("samples from {at}")),
    }
}

fn rel(abs: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        abs / reference
    } else {
        abs
    }
}

fn data_report(model: &ReducedModel, data: &LoewnerData, tolerance: f64) -> ModelReport {
    let spectrum = model.poles();
    let realization = model.complex();
    let mut checks: Vec<Check> = data
        .poles
        .iter()
        .map(|&p| {
            let abs = spectrum.iter().map(|&q| (q - p).norm()).fold(f64::INFINITY, f64::min);
            Check::new("pole", p, 0, abs, abs / p.norm().max(1.0))
        })
        .collect();
    let mut against = |kind, s: Complex64, order, want: Complex64| {
        let abs = realization.eval_deriv(s, order).map_or(f64::INFINITY, |v| (v - want).norm());
        checks.push(Check::new(kind, s, order, abs, rel(abs, want.norm())));
    };
    for (&s, &v) in data.points.iter().zip(&data.values) {
        against("value", s, 0, v);
    }
    for (&s, &d) in data.points[data.ell()..].iter().zip(&data.derivatives) {
        against("derivative", s, 1, d);
    }
    ModelReport::new(model.order(), max_real_pole(&spectrum), tolerance, checks, Vec::new())
}

#[allow(clippy::too_many_arguments)]
fn reduce_data(
    path: &Path,
    args: &ConstraintArgs,
    out: &Path,
    loewner: &Path,
    format: Format,
    require_stable: bool,
    convention: SignConvention,
    tol: f64,
) -> Result<Outcome> {
    if args.zeros.is_some() || args.deriv_points.is_some() {
        bail!("reduce-data takes --poles and --points only; derivatives are matched at every point after the pole block");
    }
    let file = read_samples(path).with_context(|| format!("reading {}", path.display()))?;
    let poles = list("poles", &args.poles)?;
    let points = match &args.points {
        Some(_) => Some(list("points", &args.points)?),
        None => None,
    };
    let data = LoewnerData::from_samples(&file.samples, &poles, points.as_deref()).map_err(|e| locate(e, &file, path))?;
    let pair = build_loewner_from_data(&data, convention).map_err(|e| locate(e, &file, path))?;
    write_loewner(loewner, &pair).with_context(|| format!("writing {}", loewner.display()))?;
    let (_, model) = reduce_from_loewner(&pair)?;
    write_model(out, &model).with_context(|| format!("writing {}", out.display()))?;
    info!("wrote order-{} model to {}", model.order(), out.display());
    let report = data_report(&model, &data, VERIFY_FACTOR * tol);
    emit(&report.render(format)?, None)?;
    Ok(finish(&report, require_stable))
}

fn compare_methods(
    path: &Path,
    methods: Option<&Path>,
    order: Option<usize>,
    args: &ConstraintArgs,
    format: Format,
    out: Option<&Path>,
    opts: &CompareOptions,
) -> Result<Outcome> {
    let sys = read_system(path).with_context(|| format!("reading {}", path.display()))?;
    let configs: Vec<MethodConfig> = match (methods, order) {
        (Some(m), _) => {
            let text = fs::read_to_string(m).with_context(|| format!("reading {}", m.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", m.display()))?
        }
        (None, Some(order)) => {
            let mut configs = Vec::new();
            if args.points.is_some() {
                configs.push(MethodConfig::MomentMatching {
                    name: None,
                    points: interpolation_spec(args)?,
                    constraints: constraint_spec(args)?,
                });
            }
            configs.push(MethodConfig::BalancedTruncation { order });
            configs.push(MethodConfig::Irka { order, init: Vec::new(), tol: None, max_iter: None });
            configs
        }
        (None, None) => bail!("compare needs --methods or --order"),
    };
    if configs.is_empty() {
        bail!("no methods to compare");
    }
    let rows = compare(&sys, &configs, opts)?;
    let text = match format {
        Format::Json => to_json(&rows)? + "\n",
        Format::Md => to_markdown(&rows),
        Format::Csv => to_csv(&rows)?,
    };
    emit(&text, out)?;
    Ok(Outcome::Success)
}

fn synth(order: usize, seed: u64, out: &Path, samples: Option<&Path>, args: &ConstraintArgs) -> Result<Outcome> {
    if order == 0 {
        bail!("order must be positive");
    }
    let sys = random_stable_system(&mut rng(seed), order)?;
    write_system(out, &sys).with_context(|| format!("writing {}", out.display()))?;
    if let Some(target) = samples {
        let points = list("points", &args.points)?;
        let poles = list("poles", &args.poles)?;
        let derivs = list("deriv-points", &args.deriv_points)?;
        let mut rows = Vec::new();
        for &p in points.iter().chain(&poles) {
            rows.push(TransferSample::new(p, eval_tf(&sys, p)?, 0));
        }
        for &p in &derivs {
            rows.push(TransferSample::new(p, eval_tf_deriv(&sys, p, 1)?, 1));
        }
        let target: PathBuf = target.to_path_buf();
        write_samples(&target, &rows).with_context(|| format!("writing {}", target.display()))?;
    }
    Ok(Outcome::Success)
}
