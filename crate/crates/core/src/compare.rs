//! Side-by-side comparison of reduction methods on one full model.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::baselines::{balanced_truncation, irka, IrkaOptions};
use crate::complex::serde_complex;
use crate::constraints::{reduce, ConstraintSpec, SolveOptions};
use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::metrics::{dc_gain, h2_error, hinf_error, max_real_pole, Realization, HINF_RTOL};
use crate::moments::InterpolationSpec;

/// One reduction run to include in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodConfig {
    MomentMatching {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        points: InterpolationSpec,
        #[serde(default, flatten)]
        constraints: ConstraintSpec,
    },
    BalancedTruncation {
        order: usize,
    },
    Irka {
        order: usize,
        /// Initial shifts; defaults to the mirrored balanced-truncation poles.
        #[serde(default, with = "serde_complex::vec", skip_serializing_if = "Vec::is_empty")]
        init: Vec<Complex64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iter: Option<usize>,
    },
}

impl MethodConfig {
    pub fn label(&self) -> String {
        match self {
            Self::MomentMatching { name: Some(n), .. } => n.clone(),
            Self::MomentMatching { constraints, .. } => {
                format!("moment matching (l={}, k={})", constraints.ell(), constraints.k())
            }
            Self::BalancedTruncation { .. } => "balanced truncation".into(),
            Self::Irka { .. } => "IRKA".into(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Self::MomentMatching { points, .. } => points.order(),
            Self::BalancedTruncation { order } | Self::Irka { order, .. } => *order,
        }
    }
}

fn ser_metric<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_metric(*x))
    }
}

fn fmt_metric(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.6e}")
    }
}

/// Metrics of one reduced model. A failed run keeps its row with `error`
/// set and the metrics at NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: String,
    pub order: usize,
    pub ell: usize,
    pub k: usize,
    #[serde(serialize_with = "ser_metric")]
    pub max_real_pole: f64,
    #[serde(serialize_with = "ser_metric")]
    pub h2_error: f64,
    #[serde(serialize_with = "ser_metric")]
    pub hinf_error: f64,
    /// Real part of `K_G(0)`; absent when zero is a pole of the model.
    pub dc_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub solve: SolveOptions,
    pub hinf_rtol: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), hinf_rtol: HINF_RTOL }
    }
}

fn measure(full: &StateSpace, model: &impl Realization, poles: &[Complex64], rtol: f64) -> (f64, f64, f64, Option<f64>) {
    (
        max_real_pole(poles),
        h2_error(full, model),
        hinf_error(full, model, rtol),
        dc_gain(model).map(|z| z.re),
    )
}

fn run(full: &StateSpace, config: &MethodConfig, opts: &CompareOptions) -> Result<ComparisonRow> {
    let mut row = ComparisonRow {
        method: config.label(),
        order: config.order(),
        ell: 0,
        k: 0,
        max_real_pole: f64::NAN,
        h2_error: f64::NAN,
        hinf_error: f64::NAN,
        dc_gain: None,
        status: None,
        error: None,
    };
    let (re, h2, hinf, dc) = match config {
        MethodConfig::MomentMatching { points, constraints, .. } => {
            row.ell = constraints.ell();
            row.k = constraints.k();
            let model = reduce(full, points, constraints, &opts.solve)?;
            measure(full, &model, &model.poles(), opts.hinf_rtol)
        }
        MethodConfig::BalancedTruncation { order } => {
            let (model, bound) = balanced_truncation(full, *order)?;
            row.status = Some(format!("error bound {bound:.6e}"));
            measure(full, &model, model.poles(), opts.hinf_rtol)
        }
        MethodConfig::Irka { order, init, tol, max_iter } => {
            let init = if init.is_empty() {
                let (bt, _) = balanced_truncation(full, *order)?;
                bt.poles().iter().map(|p| -p).collect()
            } else {
                init.clone()
            };
            let defaults = IrkaOptions::default();
            let irka_opts = IrkaOptions {
                tol: tol.unwrap_or(defaults.tol),
                max_iter: max_iter.unwrap_or(defaults.max_iter),
                ..defaults
            };
            let r = irka(full, *order, &init, &irka_opts)?;
            row.status = Some(format!("{:?} after {} iterations", r.status, r.iterations).to_lowercase());
            measure(full, &r.model, r.model.poles(), opts.hinf_rtol)
        }
    };
    row.max_real_pole = re;
    row.h2_error = h2;
    row.hinf_error = hinf;
    row.dc_gain = dc;
    Ok(row)
}

/// Runs every config concurrently; rows come back in config order and a
/// failing config yields a row carrying its error.
pub fn compare(full: &StateSpace, configs: &[MethodConfig], opts: &CompareOptions) -> Result<Vec<ComparisonRow>> {
    if configs.is_empty() {
        return Err(Error::Invalid("no methods to compare".into()));
    }
    Ok(configs
        .par_iter()
        .map(|cfg| {
            run(full, cfg, opts).unwrap_or_else(|e| ComparisonRow {
                method: cfg.label(),
                order: cfg.order(),
                ell: 0,
                k: 0,
                max_real_pole: f64::NAN,
                h2_error: f64::NAN,
                hinf_error: f64::NAN,
                dc_gain: None,
                status: None,
                error: Some(e.to_string()),
            })
        })
        .collect())
}

fn md_metric(x: f64) -> String {
    match x {
        f64::INFINITY => "∞".into(),
        x if x.is_nan() => "-".into(),
        x => format!("{x:.4e}"),
    }
}

/// Pipe-delimited table with one row per method.
pub fn to_markdown(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "| Method | ν | ℓ | k | Max Re(p) | ‖K−K_G‖₂ | ‖K−K_G‖∞ | K_G(0) | Notes |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        let notes = r.error.as_deref().or(r.status.as_deref()).unwrap_or("");
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.method,
            r.order,
            r.ell,
            r.k,
            md_metric(r.max_real_pole),
            md_metric(r.h2_error),
            md_metric(r.hinf_error),
            r.dc_gain.map_or("-".into(), |g| format!("{g:.6}")),
            notes.replace('|', "/"),
        ));
    }
    out
}

pub fn to_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method", "order", "ell", "k", "max_real_pole", "h2_error", "hinf_error", "dc_gain", "status", "error",
    ])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.order.to_string(),
            r.ell.to_string(),
            r.k.to_string(),
            fmt_metric(r.max_real_pole),
            fmt_metric(r.h2_error),
            fmt_metric(r.hinf_error),
            r.dc_gain.map_or(String::new(), |g| format!("{g:.6e}")),
            r.status.clone().unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn to_json(rows: &[ComparisonRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}
