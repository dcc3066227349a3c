//! JSON encodings of problems, paths and chain reports.
//!
//! Floats are written with 17 significant digits so they parse back to the
//! same `f64`. Coordinate indices are 1-based; non-finite values become `null`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::covmodel::ProblemSpec;
use crate::error::{Error, Result};
use crate::geometry::ChainReport;
use crate::pathsolver::{EventKind, LassoPath};

type Num = Box<RawValue>;

/// `x` as a JSON number with 17 significant digits, or `null`.
pub fn num(x: f64) -> Num {
    let text = if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().map(|&x| num(x)).collect()
}

/// Formats `x` for CSV cells with 17 significant digits.
pub fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct EventOut<'a> {
    s: Num,
    t: Num,
    kind: &'a str,
    index: Option<usize>,
    new_sign: Option<i8>,
    beta: Vec<Num>,
}

#[derive(Serialize)]
struct SegmentOut<'a> {
    s_hi: Num,
    s_lo: Num,
    signs: &'a [i8],
    c: Vec<Num>,
    m: Vec<Num>,
}

#[derive(Serialize)]
struct PathOut<'a> {
    events: Vec<EventOut<'a>>,
    segments: Vec<SegmentOut<'a>>,
}

pub fn path_to_json(path: &LassoPath) -> String {
    let events = path
        .events()
        .iter()
        .map(|e| {
            let (kind, index, new_sign) = match e.kind {
                EventKind::Start => ("start", None, None),
                EventKind::Leave { index } => ("leave", Some(index + 1), None),
                EventKind::Enter { index, sign } => ("enter", Some(index + 1), Some(sign)),
                EventKind::Terminus { index } => ("terminus", index.map(|j| j + 1), None),
            };
            EventOut {
                s: num(e.s),
                t: num(e.t),
                kind,
                index,
                new_sign,
                beta: nums(e.beta.as_slice()),
            }
        })
        .collect();
    let segments = path
        .segments()
        .iter()
        .map(|seg| SegmentOut {
            s_hi: num(seg.s_hi),
            s_lo: num(seg.s_lo),
            signs: seg.state.signs(),
            c: nums(seg.intercept.as_slice()),
            m: nums(seg.slope.as_slice()),
        })
        .collect();
    serde_json::to_string_pretty(&PathOut { events, segments }).expect("path serializes")
}

#[derive(Serialize)]
struct MomentsOut<'a> {
    p: usize,
    #[serde(rename = "K1")]
    k1: Vec<Vec<Num>>,
    b: Vec<Num>,
    sigma_y_sq: Option<Num>,
    names: Option<&'a [String]>,
}

#[derive(Deserialize)]
struct MomentsIn {
    p: usize,
    #[serde(rename = "K1")]
    k1: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(default)]
    sigma_y_sq: Option<f64>,
    #[serde(default)]
    names: Option<Vec<String>>,
}

/// Moments file `{"p", "K1", "b", "sigma_y_sq", "names"}`.
pub fn spec_to_json(spec: &ProblemSpec) -> String {
    let k = spec.k1();
    let out = MomentsOut {
        p: spec.p(),
        k1: (0..spec.p())
            .map(|i| (0..spec.p()).map(|j| num(k[(i, j)])).collect())
            .collect(),
        b: nums(spec.b().as_slice()),
        sigma_y_sq: spec.sigma_y_sq().map(num),
        names: spec.names(),
    };
    serde_json::to_string_pretty(&out).expect("moments serialize")
}

pub fn spec_from_json(text: &str) -> Result<ProblemSpec> {
    let m: MomentsIn = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if m.k1.len() != m.p || m.k1.iter().any(|row| row.len() != m.p) {
        return Err(Error::DimensionMismatch(format!("K1 is not {0}x{0}", m.p)));
    }
    let k1 = DMatrix::from_fn(m.p, m.p, |i, j| m.k1[i][j]);
    let spec = ProblemSpec::from_moments(k1, DVector::from_vec(m.b), m.sigma_y_sq)?;
    match m.names {
        Some(names) => spec.with_names(names),
        None => Ok(spec),
    }
}

#[derive(Serialize)]
struct ChainReportOut<'a> {
    is_simple: bool,
    endpoints_ok: bool,
    parallel_pairs: &'a [(usize, usize)],
    orthant_count: usize,
    sign_change_counts: &'a [usize],
    enter_event_count: usize,
    resurgent_coordinates: Vec<usize>,
}

/// Chain report with 1-based coordinates; `parallel_pairs` holds segment
/// indices as in the path export.
pub fn chain_report_json(report: &ChainReport) -> serde_json::Value {
    let out = ChainReportOut {
        is_simple: report.is_simple,
        endpoints_ok: report.endpoints_ok,
        parallel_pairs: &report.parallel_pairs,
        orthant_count: report.orthant_count,
        sign_change_counts: &report.sign_change_counts,
        enter_event_count: report.enter_event_count,
        resurgent_coordinates: report.resurgent_coordinates.iter().map(|j| j + 1).collect(),
    };
    serde_json::to_value(out).expect("report serializes")
}
