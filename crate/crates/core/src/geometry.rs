//! Geometric checks on a traced path viewed as a polygonal chain from `β̂` to
//! the origin.

use nalgebra::DVector;
use serde::Serialize;

use crate::covmodel::ProblemSpec;
use crate::pathsolver::{EventKind, LassoPath};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub is_simple: bool,
    pub endpoints_ok: bool,
    /// Pairs of segment indices with parallel directions.
    pub parallel_pairs: Vec<(usize, usize)>,
    /// Number of distinct orthants whose interior the chain crosses.
    pub orthant_count: usize,
    pub sign_change_counts: Vec<usize>,
    pub enter_event_count: usize,
    /// Coordinate of each Enter event, in path order.
    pub resurgent_coordinates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl BoundCheck {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        BoundCheck {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Analyzes the chain of knots of `path`.
///
/// Segments of zero length (simultaneous events) are skipped. Two segments
/// count as parallel when their directions have `|cos| > 1 − tol`; the chain is
/// simple when non-adjacent segments stay more than `tol · t̂` apart.
pub fn analyze_chain(path: &LassoPath, tol: f64) -> ChainReport {
    let p = path.p();
    let events = path.events();
    let first = &events[0].beta;
    let last = &events[events.len() - 1].beta;
    let endpoints_ok = (first - &path.center().beta_hat).amax() <= tol && last.amax() <= tol;

    // (segment index, start knot, end knot) for segments of positive length.
    let pieces: Vec<(usize, &DVector<f64>, &DVector<f64>)> = events
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (&w[1].beta - &w[0].beta).amax() > 0.0)
        .map(|(i, w)| (i, &w[0].beta, &w[1].beta))
        .collect();

    let gap_tol = tol * path.t_hat();
    let mut is_simple = true;
    let mut parallel_pairs = Vec::new();
    for (a, &(i, p0, p1)) in pieces.iter().enumerate() {
        let d1 = p1 - p0;
        for (b, &(j, q0, q1)) in pieces.iter().enumerate().skip(a + 1) {
            let d2 = q1 - q0;
            let cos = d1.dot(&d2) / (d1.norm() * d2.norm());
            if cos.abs() > 1.0 - tol {
                parallel_pairs.push((i, j));
            }
            if b > a + 1 && segment_distance(p0, p1, q0, q1) <= gap_tol {
                is_simple = false;
            }
        }
    }

    let mut orthants: Vec<&[i8]> = path
        .segments()
        .iter()
        .filter(|seg| seg.state.is_orthant_interior() && seg.s_lo < seg.s_hi)
        .map(|seg| seg.state.signs())
        .collect();
    orthants.sort();
    orthants.dedup();

    let mut last_sign = path.center().delta_hat.clone();
    let mut sign_change_counts = vec![0; p];
    let mut resurgent_coordinates = Vec::new();
    for event in events {
        if let EventKind::Enter { index, sign } = event.kind {
            if last_sign[index] != 0 && last_sign[index] != sign {
                sign_change_counts[index] += 1;
            }
            last_sign[index] = sign;
            resurgent_coordinates.push(index);
        }
    }

    ChainReport {
        is_simple,
        endpoints_ok,
        parallel_pairs,
        orthant_count: orthants.len(),
        sign_change_counts,
        enter_event_count: resurgent_coordinates.len(),
        resurgent_coordinates,
    }
}

/// Minimum distance between the closed segments `[p0, p1]` and `[q0, q1]`.
pub fn segment_distance(
    p0: &DVector<f64>,
    p1: &DVector<f64>,
    q0: &DVector<f64>,
    q1: &DVector<f64>,
) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t) = if a == 0.0 && e == 0.0 {
        (0.0, 0.0)
    } else if a == 0.0 {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e == 0.0 {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t = (b * s + f) / e;
            if t < 0.0 {
                ((-c / a).clamp(0.0, 1.0), 0.0)
            } else if t > 1.0 {
                (((b - c) / a).clamp(0.0, 1.0), 1.0)
            } else {
                (s, t)
            }
        }
    };
    (r + d1 * s - d2 * t).norm()
}

/// Orthant and passing bounds that hold for every lasso path, plus the tighter
/// orthant bounds for unit-diagonal covariance with p = 2 or p = 3.
pub fn assert_dimension_bounds(report: &ChainReport, spec: &ProblemSpec) -> Vec<BoundCheck> {
    let p = spec.p();
    let mut checks = vec![
        BoundCheck::new(
            "enter_events_at_most_p_minus_1",
            report.enter_event_count < p.max(1),
            format!("{} enter events, p = {p}", report.enter_event_count),
        ),
        BoundCheck::new(
            "sign_changes_at_most_1",
            report.sign_change_counts.iter().all(|&c| c <= 1),
            format!("sign changes {:?}", report.sign_change_counts),
        ),
        BoundCheck::new(
            "orthants_at_most_p",
            report.orthant_count <= p,
            format!("{} orthants, p = {p}", report.orthant_count),
        ),
    ];
    if spec.is_normalized() && p == 2 {
        let full_support = spec
            .least_squares_center()
            .delta_hat
            .iter()
            .all(|&d| d != 0);
        let expected = usize::from(full_support);
        checks.push(BoundCheck::new(
            "normalized_p2_single_quadrant",
            report.orthant_count == expected,
            format!("{} quadrants", report.orthant_count),
        ));
    }
    if spec.is_normalized() && p == 3 {
        checks.push(BoundCheck::new(
            "normalized_p3_at_most_two_orthants",
            report.orthant_count <= 2,
            format!("{} orthants", report.orthant_count),
        ));
    }
    checks
}

/// Simplicity, endpoint and non-parallelism checks of a report.
pub fn chain_checks(report: &ChainReport) -> Vec<BoundCheck> {
    vec![
        BoundCheck::new("simple_chain", report.is_simple, String::new()),
        BoundCheck::new("endpoints", report.endpoints_ok, String::new()),
        BoundCheck::new(
            "no_parallel_segments",
            report.parallel_pairs.is_empty(),
            format!("{:?}", report.parallel_pairs),
        ),
    ]
}
