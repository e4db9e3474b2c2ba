//! File formats: state-space JSON, transfer-sample CSV, reduced-model JSON
//! and Loewner-pair dumps. Complex scalars are `a+bj` strings.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{format_complex, parse_complex};
use crate::constraints::ReducedModel;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CRow, CVec};
use crate::loewner::LoewnerPair;
use crate::lti::{StateSpace, TransferSample};

/// `{"A": [[..], ..], "B": [..], "C": [..]}` with `A` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
}

impl SystemFile {
    pub fn from_system(sys: &StateSpace) -> Self {
        Self {
            a: sys.a().row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: sys.b().iter().copied().collect(),
            c: sys.c().iter().copied().collect(),
        }
    }

    pub fn to_system(&self) -> Result<StateSpace> {
        let rows: Vec<&[f64]> = self.a.iter().map(Vec::as_slice).collect();
        StateSpace::from_rows(&rows, &self.b, &self.c)
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
        .read_to_string(&mut text)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn write_string(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_system(path: &Path) -> Result<StateSpace> {
    let file: SystemFile = serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    file.to_system()
}

pub fn system_to_json(sys: &StateSpace) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SystemFile::from_system(sys))?)
}

pub fn write_system(path: &Path, sys: &StateSpace) -> Result<()> {
    write_string(path, &(system_to_json(sys)? + "\n"))
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    point_re: f64,
    point_im: f64,
    order: usize,
    value_re: f64,
    value_im: f64,
}

/// Samples together with the 1-based CSV line each came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFile {
    pub samples: Vec<TransferSample>,
    pub lines: Vec<u64>,
}

impl SampleFile {
    /// CSV lines holding samples at `point` (any order).
    pub fn lines_at(&self, point: Complex64) -> Vec<u64> {
        self.samples
            .iter()
            .zip(&self.lines)
            .filter(|(s, _)| (s.point - point).norm() <= 1e-12 * point.norm().max(1.0))
            .map(|(_, &l)| l)
            .collect()
    }
}

/// Reads `point_re,point_im,order,value_re,value_im` rows.
pub fn parse_samples(text: &str) -> Result<SampleFile> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = SampleFile { samples: Vec::new(), lines: Vec::new() };
    for record in reader.deserialize::<SampleRecord>() {
        let r = record?;
        let line = out.lines.len() as u64 + 2;
        if ![r.point_re, r.point_im, r.value_re, r.value_im].iter().all(|x| x.is_finite()) {
            return Err(Error::Parse(format!("line {line}: non-finite sample")));
        }
        out.samples.push(TransferSample::new(
            Complex64::new(r.point_re, r.point_im),
            Complex64::new(r.value_re, r.value_im),
            r.order,
        ));
        out.lines.push(line);
    }
    Ok(out)
}

pub fn read_samples(path: &Path) -> Result<SampleFile> {
    parse_samples(&read_to_string(path)?)
}

pub fn samples_to_csv(samples: &[TransferSample]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in samples {
        w.serialize(SampleRecord {
            point_re: s.point.re,
            point_im: s.point.im,
            order: s.order,
            value_re: s.value.re,
            value_im: s.value.im,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_samples(path: &Path, samples: &[TransferSample]) -> Result<()> {
    write_string(path, &samples_to_csv(samples)?)
}

fn mat_strings(m: &CMat) -> Vec<Vec<String>> {
    m.row_iter().map(|r| r.iter().map(|z| format_complex(*z)).collect()).collect()
}

fn vec_strings<'a>(v: impl IntoIterator<Item = &'a Complex64>) -> Vec<String> {
    v.into_iter().map(|z| format_complex(*z)).collect()
}

fn parse_vec(v: &[String]) -> Result<Vec<Complex64>> {
    v.iter().map(|s| parse_complex(s)).collect()
}

fn parse_mat(m: &[Vec<String>]) -> Result<CMat> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged complex matrix".into()));
    }
    let flat: Vec<Complex64> = m.iter().flat_map(|r| r.iter()).map(|s| parse_complex(s)).collect::<Result<_>>()?;
    Ok(CMat::from_row_slice(rows, cols, &flat))
}

/// Reduced model on disk: the family coordinates `(S, L, G, W)` that define
/// it exactly, plus a real realization when one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub order: usize,
    pub poles: Vec<String>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none", default)]
    pub b: Option<Vec<f64>>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none", default)]
    pub c: Option<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<String>>,
    #[serde(rename = "L")]
    pub l: Vec<String>,
    #[serde(rename = "G")]
    pub g: Vec<String>,
    #[serde(rename = "W")]
    pub w: Vec<String>,
}

impl ModelFile {
    pub fn from_model(model: &ReducedModel) -> Self {
        let real = model.realify().ok().map(|r| SystemFile::from_system(&r));
        Self {
            order: model.order(),
            poles: vec_strings(&model.poles()),
            a: real.as_ref().map(|r| r.a.clone()),
            b: real.as_ref().map(|r| r.b.clone()),
            c: real.map(|r| r.c),
            s: mat_strings(&model.s),
            l: vec_strings(model.l.iter()),
            g: vec_strings(model.g.iter()),
            w: vec_strings(model.w.iter()),
        }
    }

    pub fn to_model(&self) -> Result<ReducedModel> {
        let s = parse_mat(&self.s)?;
        let nu = s.nrows();
        let l = parse_vec(&self.l)?;
        let g = parse_vec(&self.g)?;
        let w = parse_vec(&self.w)?;
        if !s.is_square() || l.len() != nu || g.len() != nu || w.len() != nu || nu != self.order {
            return Err(Error::Dimension("model file sizes disagree".into()));
        }
        Ok(ReducedModel {
            s,
            l: CRow::from_vec(l),
            g: CVec::from_vec(g),
            w: CRow::from_vec(w),
        })
    }

    /// The stored real realization, if any.
    pub fn real_system(&self) -> Option<Result<StateSpace>> {
        let (a, b, c) = (self.a.as_ref()?, self.b.as_ref()?, self.c.as_ref()?);
        let n = a.len();
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        if flat.len() != n * n {
            return Some(Err(Error::Dimension("A in model file is not square".into())));
        }
        Some(StateSpace::new(
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_column_slice(b),
            RowDVector::from_row_slice(c),
        ))
    }
}

pub fn model_to_json(model: &ReducedModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from_model(model))?)
}

pub fn write_model(path: &Path, model: &ReducedModel) -> Result<()> {
    write_string(path, &(model_to_json(model)? + "\n"))
}

pub fn read_model(path: &Path) -> Result<ReducedModel> {
    let file: ModelFile = serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    file.to_model()
}

/// Every matrix of a Loewner pair as complex strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoewnerFile {
    pub loewner: Vec<Vec<String>>,
    pub shifted_loewner: Vec<Vec<String>>,
    #[serde(rename = "V")]
    pub v: Vec<String>,
    #[serde(rename = "W")]
    pub w: Vec<String>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<String>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<String>>,
    #[serde(rename = "L")]
    pub l: Vec<String>,
    #[serde(rename = "R")]
    pub r: Vec<String>,
}

impl LoewnerFile {
    pub fn from_pair(p: &LoewnerPair) -> Self {
        Self {
            loewner: mat_strings(&p.ll),
            shifted_loewner: mat_strings(&p.sll),
            v: vec_strings(p.v.iter()),
            w: vec_strings(p.w.iter()),
            s: mat_strings(&p.s),
            q: mat_strings(&p.q),
            l: vec_strings(p.l.iter()),
            r: vec_strings(p.r.iter()),
        }
    }

    pub fn to_pair(&self) -> Result<LoewnerPair> {
        Ok(LoewnerPair {
            ll: parse_mat(&self.loewner)?,
            sll: parse_mat(&self.shifted_loewner)?,
            v: CVec::from_vec(parse_vec(&self.v)?),
            w: CRow::from_vec(parse_vec(&self.w)?),
            s: parse_mat(&self.s)?,
            q: parse_mat(&self.q)?,
            l: CRow::from_vec(parse_vec(&self.l)?),
            r: CVec::from_vec(parse_vec(&self.r)?),
        })
    }
}

pub fn write_loewner(path: &Path, pair: &LoewnerPair) -> Result<()> {
    write_string(path, &(serde_json::to_string_pretty(&LoewnerFile::from_pair(pair))? + "\n"))
}
