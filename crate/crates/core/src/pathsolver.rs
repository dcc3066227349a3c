//! Exact piecewise-linear lasso path by tangency tracing.
//!
//! The path is parameterized by the tangency multiplier `s <= 0`: on a sign
//! state with active set `A` and signs `δ_A`, the solution satisfies
//! `K1[A,A] β_A = b_A + s δ_A` with `β_j = 0` off `A`. Decreasing `s` from 0
//! moves the tangency point from the least-squares center toward the origin.
//! The penalty of the Lagrangian form is `λ = −s`.
//!
//! A segment ends when an active coefficient reaches zero (a *leave* event) or
//! when a zeroed coordinate's gradient reaches the boundary `|g_j| = |s|` and
//! the coordinate re-enters with sign `σ` (an *enter* event).

use std::collections::HashSet;

use nalgebra::DVector;

use crate::covmodel::{LeastSquaresCenter, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg;

/// Events closer than this are treated as simultaneous.
pub fn tie_tol(s: f64) -> f64 {
    1e-9 * (1.0 + s.abs())
}

/// Partition of the coordinates into an active set with signs and a zero set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignState {
    signs: Vec<i8>,
}

impl SignState {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|s| !matches!(s, -1..=1)) {
            return Err(Error::InvalidArgument(format!(
                "sign {bad} not in {{-1, 0, 1}}"
            )));
        }
        Ok(SignState { signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, j: usize) -> i8 {
        self.signs[j]
    }

    pub fn p(&self) -> usize {
        self.signs.len()
    }

    pub fn active(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.signs[j] != 0).collect()
    }

    pub fn zero_set(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.signs[j] == 0).collect()
    }

    pub fn is_terminal(&self) -> bool {
        self.signs.iter().all(|&s| s == 0)
    }

    pub fn is_orthant_interior(&self) -> bool {
        self.signs.iter().all(|&s| s != 0)
    }

    fn with_sign(&self, j: usize, sign: i8) -> SignState {
        let mut signs = self.signs.clone();
        signs[j] = sign;
        SignState { signs }
    }

    fn sign_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.signs.iter().map(|&s| f64::from(s)))
    }
}

/// Affine law `β(s) = c + s m` and `t(s) = t_intercept + s t_slope` of a sign state.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentLaw {
    pub intercept: DVector<f64>,
    pub slope: DVector<f64>,
    pub t_intercept: f64,
    pub t_slope: f64,
}

/// Solves `K1[A,A] c_A = b_A` and `K1[A,A] m_A = δ_A` on the active set.
pub fn segment_law(spec: &ProblemSpec, state: &SignState) -> Result<SegmentLaw> {
    if state.p() != spec.p() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} signs, spec has p = {}",
            state.p(),
            spec.p()
        )));
    }
    let active = state.active();
    if active.is_empty() {
        return Err(Error::InvalidArgument(
            "segment law needs a nonempty active set".into(),
        ));
    }
    let k_aa = linalg::principal_submatrix(spec.k1(), &active);
    let chol = linalg::cholesky(&k_aa).ok_or(Error::SingularSubmatrix)?;
    let c_a = chol.solve(&linalg::subvector(spec.b(), &active));
    let delta = state.sign_vector();
    let m_a = chol.solve(&linalg::subvector(&delta, &active));
    let intercept = linalg::scatter(spec.p(), &active, &c_a);
    let slope = linalg::scatter(spec.p(), &active, &m_a);
    Ok(SegmentLaw {
        t_intercept: intercept.dot(&delta),
        t_slope: slope.dot(&delta),
        intercept,
        slope,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSegment {
    pub state: SignState,
    /// Upper end of the segment (inclusive).
    pub s_hi: f64,
    /// Lower end of the segment.
    pub s_lo: f64,
    pub intercept: DVector<f64>,
    pub slope: DVector<f64>,
    pub t_intercept: f64,
    pub t_slope: f64,
}

impl PathSegment {
    fn new(state: SignState, s_hi: f64, s_lo: f64, law: SegmentLaw) -> Self {
        PathSegment {
            state,
            s_hi,
            s_lo,
            intercept: law.intercept,
            slope: law.slope,
            t_intercept: law.t_intercept,
            t_slope: law.t_slope,
        }
    }

    pub fn beta_at(&self, s: f64) -> DVector<f64> {
        &self.intercept + &self.slope * s
    }

    pub fn t_at(&self, s: f64) -> f64 {
        self.t_intercept + s * self.t_slope
    }

    pub fn contains_s(&self, s: f64) -> bool {
        self.s_lo <= s && s <= self.s_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Start,
    /// Active coordinate reaches zero.
    Leave {
        index: usize,
    },
    /// Zeroed coordinate becomes active with `sign`.
    Enter {
        index: usize,
        sign: i8,
    },
    /// Last active coordinate reaches zero; `index` is `None` when the path is
    /// degenerate (`β̂ = 0`).
    Terminus {
        index: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEvent {
    pub s: f64,
    pub t: f64,
    pub kind: EventKind,
    pub beta: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaveCandidate {
    pub index: usize,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnterCandidate {
    pub index: usize,
    pub s: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Candidate {
    Leave(LeaveCandidate),
    Enter(EnterCandidate),
}

impl Candidate {
    pub fn s(&self) -> f64 {
        match self {
            Candidate::Leave(c) => c.s,
            Candidate::Enter(c) => c.s,
        }
    }

    fn rank(&self) -> (u8, usize) {
        match self {
            Candidate::Leave(c) => (0, c.index),
            Candidate::Enter(c) => (1, c.index),
        }
    }
}

/// Zero crossings of active coefficients ahead of `s_hi`, sorted by
/// decreasing `s`.
///
/// Only coordinates whose magnitude shrinks as `s` decreases (`δ_j m_j > 0`)
/// can cross. A crossing within [`tie_tol`] above `s_hi` is reported at `s_hi`.
pub fn leave_candidates(segment: &PathSegment) -> Vec<LeaveCandidate> {
    let mut out: Vec<LeaveCandidate> = segment
        .state
        .active()
        .into_iter()
        .filter_map(|j| {
            let m = segment.slope[j];
            if f64::from(segment.state.sign(j)) * m <= 0.0 {
                return None;
            }
            let s = -segment.intercept[j] / m;
            (s <= 0.0 && s <= segment.s_hi + tie_tol(segment.s_hi)).then(|| LeaveCandidate {
                index: j,
                s: s.min(segment.s_hi),
            })
        })
        .collect();
    out.sort_by(|a, b| b.s.total_cmp(&a.s).then(a.index.cmp(&b.index)));
    out
}

/// Points where a zeroed coordinate's gradient `g_j(s) = (K1 β(s) − b)_j`
/// reaches `s σ` and leaves the band `|g_j| <= |s|`, sorted by decreasing `s`.
///
/// Every zeroed coordinate is scanned with both signs. A candidate is kept
/// only if the post-event law moves the coordinate strictly into sign `σ`.
pub fn enter_candidates(spec: &ProblemSpec, segment: &PathSegment) -> Result<Vec<EnterCandidate>> {
    let zero_set = segment.state.zero_set();
    if zero_set.is_empty() {
        return Ok(Vec::new());
    }
    let g0 = spec.k1() * &segment.intercept - spec.b();
    let g1 = spec.k1() * &segment.slope;
    let mut out = Vec::new();
    for j in zero_set {
        for sign in [-1_i8, 1] {
            let sigma = f64::from(sign);
            // The band is left through `g_j = s σ` only if σ g1_j > 1.
            if sigma * g1[j] <= 1.0 {
                continue;
            }
            let s = g0[j] / (sigma - g1[j]);
            if !(s <= 0.0 && s <= segment.s_hi + tie_tol(segment.s_hi)) {
                continue;
            }
            let next = segment.state.with_sign(j, sign);
            let law = segment_law(spec, &next)?;
            if law.slope[j] * sigma >= 0.0 {
                continue;
            }
            out.push(EnterCandidate {
                index: j,
                s: s.min(segment.s_hi),
                sign,
            });
        }
    }
    out.sort_by(|a, b| b.s.total_cmp(&a.s).then(a.index.cmp(&b.index)));
    Ok(out)
}

/// The first candidate reached as `s` decreases. Candidates within
/// [`tie_tol`] of the largest `s` are tied; ties prefer Leave over Enter, then
/// the lower index.
pub fn next_event(leave: &[LeaveCandidate], enter: &[EnterCandidate]) -> Option<Candidate> {
    let all = leave
        .iter()
        .copied()
        .map(Candidate::Leave)
        .chain(enter.iter().copied().map(Candidate::Enter));
    let s_max = all.clone().map(|c| c.s()).fold(f64::NEG_INFINITY, f64::max);
    if s_max == f64::NEG_INFINITY {
        return None;
    }
    let cutoff = s_max - tie_tol(s_max);
    all.filter(|c| c.s() >= cutoff).min_by_key(|c| c.rank())
}

/// The full solution path from `β̂` (s = 0) to the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    spec: ProblemSpec,
    center: LeastSquaresCenter,
    events: Vec<PathEvent>,
    segments: Vec<PathSegment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Query {
    AtS(f64),
    AtT(f64),
    /// `s = −lambda · lambda_scale`.
    AtLambda {
        lambda: f64,
        lambda_scale: f64,
    },
}

impl LassoPath {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn center(&self) -> &LeastSquaresCenter {
        &self.center
    }

    pub fn events(&self) -> &[PathEvent] {
        &self.events
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn p(&self) -> usize {
        self.spec.p()
    }

    /// Parameter value at which the path reaches the origin.
    pub fn s_end(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.s)
    }

    pub fn t_hat(&self) -> f64 {
        self.events[0].t
    }

    /// Solution at `s`, `t`, or `λ`.
    ///
    /// Beyond the ends of the path the solution is constant: `t >= t̂` gives
    /// `β̂`, and `s <= s_end` (equivalently `λ >= max_j |b_j|`) gives zero.
    pub fn evaluate(&self, query: Query) -> Result<DVector<f64>> {
        self.point(query).map(|pt| pt.beta)
    }

    /// Like [`LassoPath::evaluate`], also reporting the matching `s` and `t`.
    pub fn point(&self, query: Query) -> Result<PathPoint> {
        let (s, beta) = match query {
            Query::AtS(s) => self.at_s(s)?,
            Query::AtT(t) => self.at_t(t)?,
            Query::AtLambda {
                lambda,
                lambda_scale,
            } => {
                if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
                    return Err(Error::OutOfRange(format!("lambda_scale = {lambda_scale}")));
                }
                if lambda.is_nan() || lambda < 0.0 {
                    return Err(Error::OutOfRange(format!("lambda = {lambda}")));
                }
                self.at_s(-lambda * lambda_scale)?
            }
        };
        Ok(PathPoint {
            s,
            t: linalg::l1_norm(&beta),
            beta,
        })
    }

    fn at_s(&self, s: f64) -> Result<(f64, DVector<f64>)> {
        if s.is_nan() || s > 0.0 {
            return Err(Error::OutOfRange(format!("s = {s}")));
        }
        if s <= self.s_end() {
            return Ok((s, DVector::zeros(self.p())));
        }
        let seg = self
            .segments
            .iter()
            .find(|seg| seg.contains_s(s))
            .expect("segments cover [s_end, 0]");
        Ok((s, seg.beta_at(s)))
    }

    fn at_t(&self, t: f64) -> Result<(f64, DVector<f64>)> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::OutOfRange(format!("t = {t}")));
        }
        if t >= self.t_hat() {
            return Ok((0.0, self.events[0].beta.clone()));
        }
        if t == 0.0 {
            return Ok((self.s_end(), DVector::zeros(self.p())));
        }
        // Event t values never increase; segment i spans events i and i + 1.
        let i = self
            .events
            .windows(2)
            .position(|w| w[0].t > t && t >= w[1].t)
            .expect("t in (0, t_hat)");
        let seg = &self.segments[i];
        let s = ((t - seg.t_intercept) / seg.t_slope).clamp(seg.s_lo, seg.s_hi);
        Ok((s, seg.beta_at(s)))
    }
}

/// A solution on the path with its parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub s: f64,
    pub t: f64,
    pub beta: DVector<f64>,
}

/// Traces the lasso path of `spec` from `β̂` to the origin.
pub fn trace_path(spec: &ProblemSpec) -> Result<LassoPath> {
    let p = spec.p();
    let center = spec.least_squares_center();
    let mut state = SignState::new(center.delta_hat.clone())?;
    let mut events = Vec::new();
    let mut segments = Vec::new();

    if state.is_terminal() {
        events.push(PathEvent {
            s: 0.0,
            t: 0.0,
            kind: EventKind::Start,
            beta: DVector::zeros(p),
        });
        events.push(PathEvent {
            s: 0.0,
            t: 0.0,
            kind: EventKind::Terminus { index: None },
            beta: DVector::zeros(p),
        });
        return Ok(LassoPath {
            spec: spec.clone(),
            center,
            events,
            segments,
        });
    }

    let mut visited: HashSet<SignState> = HashSet::new();
    let mut s_hi = 0.0_f64;
    let mut law = segment_law(spec, &state)?;
    events.push(PathEvent {
        s: 0.0,
        t: center.t_hat,
        kind: EventKind::Start,
        beta: law.intercept.clone(),
    });

    loop {
        visited.insert(state.clone());
        let probe = PathSegment::new(state.clone(), s_hi, f64::NEG_INFINITY, law.clone());
        let leave = leave_candidates(&probe);
        let enter = enter_candidates(spec, &probe)?;
        let event = next_event(&leave, &enter).ok_or(Error::UnboundedTail { s: s_hi })?;
        let s = event.s();
        let mut beta = law.intercept.clone() + &law.slope * s;

        let next_state = match event {
            Candidate::Leave(c) => {
                beta[c.index] = 0.0;
                state.with_sign(c.index, 0)
            }
            Candidate::Enter(c) => state.with_sign(c.index, c.sign),
        };
        segments.push(PathSegment::new(state, s_hi, s, law));

        if next_state.is_terminal() {
            let index = match event {
                Candidate::Leave(c) => Some(c.index),
                Candidate::Enter(_) => unreachable!("enter events add an active coordinate"),
            };
            events.push(PathEvent {
                s,
                t: 0.0,
                kind: EventKind::Terminus { index },
                beta: DVector::zeros(p),
            });
            break;
        }

        if visited.contains(&next_state) {
            return Err(Error::StateRevisited { s });
        }
        let kind = match event {
            Candidate::Leave(c) => EventKind::Leave { index: c.index },
            Candidate::Enter(c) => EventKind::Enter {
                index: c.index,
                sign: c.sign,
            },
        };
        events.push(PathEvent {
            s,
            t: linalg::l1_norm(&beta),
            kind,
            beta,
        });
        state = next_state;
        law = segment_law(spec, &state)?;
        s_hi = s;
    }

    Ok(LassoPath {
        spec: spec.clone(),
        center,
        events,
        segments,
    })
}

/// One named inequality of the transition diagnostics; `holds` iff `value > 0`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TransitionCheck {
    pub name: String,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize)]
pub struct TransitionReport {
    pub checks: Vec<TransitionCheck>,
}

impl TransitionReport {
    fn push(&mut self, name: impl Into<String>, value: f64) {
        self.checks.push(TransitionCheck {
            name: name.into(),
            value,
            holds: value > 0.0,
        });
    }

    pub fn get(&self, name: &str) -> Option<&TransitionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn holds(&self, name: &str) -> Option<bool> {
        self.get(name).map(|c| c.holds)
    }
}

/// Closed-form necessary conditions for the tangency point to pass from a
/// face into an adjacent one, evaluated for `state` (p = 2, 3, 4).
///
/// Advisory only: [`trace_path`] decides events numerically.
///
/// For every active `α`, `face_passing[α]` is
/// `(Σ_{j≠α} C_jα δ_j)² − C_αα²` with `C` the cofactor matrix of `K1`.
/// Dimension-specific sets follow:
/// - p = 2: the vertex-passing conditions for a nonnormalized matrix, in the
///   orientation `β̂ > 0` with passing over `β₂ = 0`.
/// - p = 3 (unit diagonal required): `cond[l]` for the signs of `state`, plus
///   the six sign-free conditions `edge[l]+` / `edge[l]-`.
/// - p = 4: for each ordered pair of active coordinates, the sign conditions
///   on `K1⁻¹` for two successive passings, and the positive-definiteness
///   conditions on the corresponding block of `K1⁻¹`.
pub fn transition_diagnostics(spec: &ProblemSpec, state: &SignState) -> Result<TransitionReport> {
    let p = spec.p();
    if !(2..=4).contains(&p) {
        return Err(Error::UnsupportedDimension(p));
    }
    if state.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "state has {} signs, spec has p = {p}",
            state.p()
        )));
    }
    if p == 3 && !spec.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let k = spec.k1();
    let cof = linalg::cofactor_matrix(k);
    let delta: Vec<f64> = state.signs().iter().map(|&s| f64::from(s)).collect();
    let mut report = TransitionReport::default();

    for a in state.active() {
        let off: f64 = (0..p)
            .filter(|&j| j != a)
            .map(|j| cof[(j, a)] * delta[j])
            .sum();
        report.push(
            format!("face_passing[{}]", a + 1),
            off * off - cof[(a, a)] * cof[(a, a)],
        );
    }

    match p {
        2 => {
            let (j11, j12, j22) = (k[(0, 0)], k[(0, 1)], k[(1, 1)]);
            let (j13, j23) = (spec.b()[0], spec.b()[1]);
            let det = j11 * j22 - j12 * j12;
            let hat1 = (j22 * j13 - j12 * j23) / det;
            let hat2 = (-j12 * j13 + j11 * j23) / det;
            let xi = (j13 - j23) / (j11 - j12);
            let eta = (j13 + j23) / (j12 + j22);
            report.push("center_1_positive", j22 * j13 - j12 * j23);
            report.push("center_2_positive", -j12 * j13 + j11 * j23);
            report.push("xi_positive", xi);
            report.push("eta_negative", -eta);
            report.push("xi_dominates_eta", xi.abs() - eta.abs());
            report.push("vertex_passing_1", hat1 - xi);
            report.push("vertex_passing_2", hat1 - hat2 - xi);
        }
        3 => {
            let (j12, j13, j23) = (k[(0, 1)], k[(0, 2)], k[(1, 2)]);
            let d = &delta;
            let cond = |x: f64, z: f64| x * x - (1.0 + z) * (1.0 + z);
            report.push("cond[1]", cond(d[1] * j12 + d[2] * j13, d[1] * d[2] * j23));
            report.push("cond[2]", cond(d[0] * j12 + d[2] * j23, d[0] * d[2] * j13));
            report.push("cond[3]", cond(d[0] * j13 + d[1] * j23, d[0] * d[1] * j12));
            let pairs = [(1, j12, j13, j23), (2, j12, j23, j13), (3, j13, j23, j12)];
            for (l, x, y, z) in pairs {
                report.push(format!("edge[{l}]+"), (x + y).powi(2) - (1.0 + z).powi(2));
                report.push(format!("edge[{l}]-"), (x - y).powi(2) - (1.0 - z).powi(2));
            }
        }
        _ => {
            let inv = k.clone().try_inverse().ok_or(Error::SingularSubmatrix)?;
            let det_inv = inv.determinant();
            let active = state.active();
            for &a1 in &active {
                for &a2 in active.iter().filter(|&&a| a != a1) {
                    let row = |r: usize, d: &[f64]| (0..p).map(|j| inv[(r, j)] * d[j]).sum::<f64>();
                    let mut d1 = delta.clone();
                    d1[a1] = -d1[a1];
                    let mut d2 = d1.clone();
                    d2[a2] = -d2[a2];
                    let tag = format!("pass_two[{},{}]", a1 + 1, a2 + 1);
                    report.push(format!("{tag}.leave_first"), delta[a1] * row(a1, &delta));
                    report.push(format!("{tag}.enter_first"), delta[a1] * row(a1, &d1));
                    report.push(format!("{tag}.leave_second"), delta[a2] * row(a2, &d1));
                    report.push(format!("{tag}.enter_second"), delta[a2] * row(a2, &d2));
                    report.push(format!("{tag}.inverse_minor_1"), inv[(a1, a1)]);
                    report.push(
                        format!("{tag}.inverse_minor_2"),
                        inv[(a1, a1)] * inv[(a2, a2)] - inv[(a1, a2)] * inv[(a2, a1)],
                    );
                    report.push(format!("{tag}.inverse_det"), det_inv);
                }
            }
        }
    }
    Ok(report)
}
