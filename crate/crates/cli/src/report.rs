//! Text renderings of constraint and analysis reports.

use std::fmt::Write;

use anyhow::Result;
use mrpz_core::complex::format_complex;
use mrpz_core::constraints::{ConstraintReport, Residual};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::Format;

fn ser_float<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&x.to_string())
    }
}

/// One checked condition.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub kind: &'static str,
    pub point: String,
    pub order: usize,
    #[serde(serialize_with = "ser_float")]
    pub abs: f64,
    #[serde(serialize_with = "ser_float")]
    pub rel: f64,
}

impl Check {
    pub fn new(kind: &'static str, point: Complex64, order: usize, abs: f64, rel: f64) -> Self {
        Self { kind, point: format_complex(point), order, abs, rel }
    }
}

/// Residuals of a reduced model against the conditions it was built from.
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub order: usize,
    #[serde(serialize_with = "ser_float")]
    pub max_real_pole: f64,
    #[serde(serialize_with = "ser_float")]
    pub max_relative: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cancellations: Vec<String>,
    pub checks: Vec<Check>,
}

impl ModelReport {
    pub fn new(order: usize, max_real_pole: f64, tolerance: f64, checks: Vec<Check>, cancellations: Vec<String>) -> Self {
        let max_relative = checks.iter().map(|c| c.rel).fold(0.0, f64::max);
        let max_relative = if checks.iter().any(|c| c.rel.is_nan()) { f64::NAN } else { max_relative };
        Self {
            order,
            max_real_pole,
            max_relative,
            tolerance,
            within_tolerance: max_relative <= tolerance,
            cancellations,
            checks,
        }
    }

    pub fn from_constraints(order: usize, report: &ConstraintReport, tolerance: f64) -> Self {
        let tag = |kind: &'static str, rs: &[Residual]| -> Vec<Check> {
            rs.iter().map(|r| Check::new(kind, r.point, r.order, r.abs, r.rel)).collect()
        };
        let checks = [
            tag("pole", &report.poles),
            tag("zero", &report.zeros),
            tag("moment", &report.moments),
            tag("derivative", &report.derivatives),
        ]
        .concat();
        let cancellations = report.cancellations.iter().map(|&z| format_complex(z)).collect();
        Self::new(order, report.max_real_pole, tolerance, checks, cancellations)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut out = String::from("kind,point,order,abs,rel\n");
                for c in &self.checks {
                    writeln!(out, "{},{},{},{:.6e},{:.6e}", c.kind, c.point, c.order, c.abs, c.rel)?;
                }
                Ok(out)
            }
            Format::Md => {
                let mut out = String::new();
                writeln!(out, "order {}, max Re(pole) {:.6e}", self.order, self.max_real_pole)?;
                writeln!(
                    out,
                    "max relative residual {:.3e} (tolerance {:.3e}): {}",
                    self.max_relative,
                    self.tolerance,
                    if self.within_tolerance { "ok" } else { "exceeded" }
                )?;
                for z in &self.cancellations {
                    writeln!(out, "zero {z} is also a model pole")?;
                }
                writeln!(out)?;
                writeln!(out, "| kind | point | order | abs | rel |")?;
                writeln!(out, "|---|---|---|---|---|")?;
                for c in &self.checks {
                    writeln!(out, "| {} | {} | {} | {:.3e} | {:.3e} |", c.kind, c.point, c.order, c.abs, c.rel)?;
                }
                Ok(out)
            }
        }
    }
}

/// Structural facts and norms of a full system.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub order: usize,
    pub stable: bool,
    pub minimal: bool,
    pub poles: Vec<String>,
    pub zeros: Vec<String>,
    /// Present only for stable systems.
    pub hankel_singular_values: Option<Vec<f64>>,
    pub h2_norm: Option<f64>,
    pub hinf_norm: Option<f64>,
    pub dc_gain: Option<f64>,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6e}"))
}

impl Analysis {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut out = String::from("quantity,index,value\n");
                writeln!(out, "order,,{}", self.order)?;
                writeln!(out, "stable,,{}", self.stable)?;
                writeln!(out, "minimal,,{}", self.minimal)?;
                for (i, p) in self.poles.iter().enumerate() {
                    writeln!(out, "pole,{i},{p}")?;
                }
                for (i, z) in self.zeros.iter().enumerate() {
                    writeln!(out, "zero,{i},{z}")?;
                }
                for (i, h) in self.hankel_singular_values.iter().flatten().enumerate() {
                    writeln!(out, "hsv,{i},{h:.6e}")?;
                }
                writeln!(out, "h2_norm,,{}", opt(self.h2_norm))?;
                writeln!(out, "hinf_norm,,{}", opt(self.hinf_norm))?;
                writeln!(out, "dc_gain,,{}", opt(self.dc_gain))?;
                Ok(out)
            }
            Format::Md => {
                let mut out = String::new();
                writeln!(out, "| quantity | value |")?;
                writeln!(out, "|---|---|")?;
                writeln!(out, "| order | {} |", self.order)?;
                writeln!(out, "| stable | {} |", self.stable)?;
                writeln!(out, "| minimal | {} |", self.minimal)?;
                writeln!(out, "| H2 norm | {} |", opt(self.h2_norm))?;
                writeln!(out, "| Hinf norm | {} |", opt(self.hinf_norm))?;
                writeln!(out, "| DC gain | {} |", opt(self.dc_gain))?;
                writeln!(out, "| poles | {} |", self.poles.join(", "))?;
                writeln!(out, "| zeros | {} |", self.zeros.join(", "))?;
                if let Some(h) = &self.hankel_singular_values {
                    let h: Vec<String> = h.iter().map(|x| format!("{x:.3e}")).collect();
                    writeln!(out, "| Hankel singular values | {} |", h.join(", "))?;
                }
                Ok(out)
            }
        }
    }
}
