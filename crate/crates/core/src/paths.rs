//! Càdlàg path representations on [0,1] and the geometric primitives built
//! from their graphs.
//!
//! A [`StepPath`] stores post-jump values (not increments) so that left and
//! right evaluation are exact table lookups. A [`PolylinePath`] is continuous
//! piecewise linear. [`GraphSet`] holds the completed graph of a path as a
//! finite union of segments and time-slice boxes in `[0,1] x R^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation side for càdlàg paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// Completion mode for discontinuities in [`completed_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    /// Straight segment from (tau, u(tau-)) to (tau, u(tau)).
    Segment,
    /// Time box {tau} x [[u(tau-), u(tau)]].
    Box,
}

/// Finite-jump step function [0,1] -> R^d, right-continuous with left limits.
///
/// Jump times are strictly increasing in (0,1]. A jump at exactly t=1 is
/// permitted so that processes of the form `t -> v_[tR]` can take their final
/// value at the right endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    dim: usize,
    u0: Vec<f64>,
    /// (time, post-jump value), times strictly increasing in (0,1].
    jumps: Vec<(f64, Vec<f64>)>,
}

impl StepPath {
    pub fn new(dim: usize, u0: Vec<f64>, jumps: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dim must be positive"));
        }
        if u0.len() != dim {
            return Err(Error::DimensionMismatch {
                left: u0.len(),
                right: dim,
            });
        }
        let mut prev = 0.0;
        for (t, v) in &jumps {
            if !(*t > prev && *t <= 1.0) {
                return Err(Error::domain(format!(
                    "jump times must be strictly increasing in (0,1], got {t}"
                )));
            }
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: v.len(),
                    right: dim,
                });
            }
            prev = *t;
        }
        Ok(StepPath { dim, u0, jumps })
    }

    pub fn constant(dim: usize, u0: Vec<f64>) -> Result<Self> {
        StepPath::new(dim, u0, Vec::new())
    }

    /// Scalar convenience constructor.
    pub fn scalar(u0: f64, jumps: &[(f64, f64)]) -> Result<Self> {
        StepPath::new(
            1,
            vec![u0],
            jumps.iter().map(|&(t, v)| (t, vec![v])).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn jumps(&self) -> &[(f64, Vec<f64>)] {
        &self.jumps
    }

    /// Value sequence u0, then post-jump values, in time order.
    pub fn value_seq(&self) -> Vec<Vec<f64>> {
        let mut seq = Vec::with_capacity(self.jumps.len() + 1);
        seq.push(self.u0.clone());
        seq.extend(self.jumps.iter().map(|(_, v)| v.clone()));
        seq
    }

    pub fn eval(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("t={t} outside [0,1]")));
        }
        if side == Side::Left && t == 0.0 {
            return Err(Error::domain("left limit requested at t=0"));
        }
        // Last jump with time <= t (right) or time < t (left).
        let mut val = &self.u0;
        for (tj, v) in &self.jumps {
            let take = match side {
                Side::Right => *tj <= t,
                Side::Left => *tj < t,
            };
            if take {
                val = v;
            } else {
                break;
            }
        }
        Ok(val.clone())
    }

    pub fn value_at_one(&self) -> Vec<f64> {
        self.jumps
            .last()
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| self.u0.clone())
    }

    /// Jump times where the value actually changes.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut prev = &self.u0;
        for (t, v) in &self.jumps {
            if v != prev {
                out.push(*t);
            }
            prev = v;
        }
        out
    }

    pub fn affine(&self, scale: f64, offset: &[f64]) -> Result<StepPath> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: offset.len(),
                right: self.dim,
            });
        }
        let map = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(offset)
                .map(|(x, b)| scale * x + b)
                .collect()
        };
        Ok(StepPath {
            dim: self.dim,
            u0: map(&self.u0),
            jumps: self
                .jumps
                .iter()
                .map(|(t, v)| (*t, map(v)))
                .collect(),
        })
    }
}

/// Continuous piecewise-linear path on [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct PolylinePath {
    dim: usize,
    /// (time, value); first time 0, last time 1, strictly increasing.
    breakpoints: Vec<(f64, Vec<f64>)>,
}

impl PolylinePath {
    pub fn new(dim: usize, breakpoints: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dim must be positive"));
        }
        if breakpoints.len() < 2 {
            return Err(Error::domain("polyline needs at least 2 breakpoints"));
        }
        if breakpoints[0].0 != 0.0 || breakpoints.last().unwrap().0 != 1.0 {
            return Err(Error::domain("polyline must span [0,1]"));
        }
        let mut prev = f64::NEG_INFINITY;
        for (t, v) in &breakpoints {
            if *t <= prev {
                return Err(Error::domain("breakpoint times must be strictly increasing"));
            }
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: v.len(),
                    right: dim,
                });
            }
            prev = *t;
        }
        Ok(PolylinePath { dim, breakpoints })
    }

    /// Scalar polyline from (t, v) pairs.
    pub fn scalar(points: &[(f64, f64)]) -> Result<Self> {
        PolylinePath::new(
            1,
            points.iter().map(|&(t, v)| (t, vec![v])).collect(),
        )
    }

    /// Linear path from `a` at t=0 to `b` at t=1.
    pub fn linear(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let dim = a.len();
        PolylinePath::new(dim, vec![(0.0, a), (1.0, b)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breakpoints(&self) -> &[(f64, Vec<f64>)] {
        &self.breakpoints
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("t={t} outside [0,1]")));
        }
        let i = match self
            .breakpoints
            .binary_search_by(|(tb, _)| tb.partial_cmp(&t).unwrap())
        {
            Ok(i) => return Ok(self.breakpoints[i].1.clone()),
            Err(i) => i,
        };
        let (t0, v0) = &self.breakpoints[i - 1];
        let (t1, v1) = &self.breakpoints[i];
        let w = (t - t0) / (t1 - t0);
        Ok(v0
            .iter()
            .zip(v1)
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    pub fn value_at_one(&self) -> Vec<f64> {
        self.breakpoints.last().unwrap().1.clone()
    }

    pub fn affine(&self, scale: f64, offset: &[f64]) -> Result<PolylinePath> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: offset.len(),
                right: self.dim,
            });
        }
        Ok(PolylinePath {
            dim: self.dim,
            breakpoints: self
                .breakpoints
                .iter()
                .map(|(t, v)| {
                    (
                        *t,
                        v.iter()
                            .zip(offset)
                            .map(|(x, b)| scale * x + b)
                            .collect(),
                    )
                })
                .collect(),
        })
    }

    /// Add the linear drift `t -> t * drift` pointwise. Closed for polylines.
    pub fn add_linear_drift(&self, drift: &[f64]) -> Result<PolylinePath> {
        if drift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: drift.len(),
                right: self.dim,
            });
        }
        Ok(PolylinePath {
            dim: self.dim,
            breakpoints: self
                .breakpoints
                .iter()
                .map(|(t, v)| {
                    (
                        *t,
                        v.iter().zip(drift).map(|(x, d)| x + t * d).collect(),
                    )
                })
                .collect(),
        })
    }
}

/// Uniform carrier for step and polyline paths.
#[derive(Debug, Clone, PartialEq)]
pub enum Path {
    Step(StepPath),
    Polyline(PolylinePath),
}

impl Path {
    pub fn dim(&self) -> usize {
        match self {
            Path::Step(p) => p.dim(),
            Path::Polyline(p) => p.dim(),
        }
    }

    pub fn eval(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        match self {
            Path::Step(p) => p.eval(t, side),
            Path::Polyline(p) => {
                if side == Side::Left && t == 0.0 {
                    return Err(Error::domain("left limit requested at t=0"));
                }
                p.eval(t)
            }
        }
    }

    pub fn value_at_zero(&self) -> Vec<f64> {
        match self {
            Path::Step(p) => p.u0().to_vec(),
            Path::Polyline(p) => p.breakpoints()[0].1.clone(),
        }
    }

    pub fn value_at_one(&self) -> Vec<f64> {
        match self {
            Path::Step(p) => p.value_at_one(),
            Path::Polyline(p) => p.value_at_one(),
        }
    }

    pub fn affine(&self, scale: f64, offset: &[f64]) -> Result<Path> {
        Ok(match self {
            Path::Step(p) => Path::Step(p.affine(scale, offset)?),
            Path::Polyline(p) => Path::Polyline(p.affine(scale, offset)?),
        })
    }

    /// Per-coordinate [min, max] over the path's values.
    ///
    /// Step paths: over u0 and post-jump values. Polylines: over breakpoints
    /// (extrema of a piecewise-linear function are at breakpoints).
    pub fn coordinate_range(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut absorb = |v: &[f64]| {
            for k in 0..d {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        };
        match self {
            Path::Step(p) => {
                absorb(p.u0());
                for (_, v) in p.jumps() {
                    absorb(v);
                }
            }
            Path::Polyline(p) => {
                for (_, v) in p.breakpoints() {
                    absorb(v);
                }
            }
        }
        (lo, hi)
    }

    /// Value sequence for the reparametrization-quotient metric: step values
    /// exactly; polyline breakpoint values. Consecutive duplicates collapsed.
    pub fn quotient_value_seq(&self) -> Vec<Vec<f64>> {
        let raw: Vec<Vec<f64>> = match self {
            Path::Step(p) => p.value_seq(),
            Path::Polyline(p) => p.breakpoints().iter().map(|(_, v)| v.clone()).collect(),
        };
        dedup_consecutive(raw)
    }
}

pub(crate) fn dedup_consecutive(seq: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(seq.len());
    for v in seq {
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

/// Segment between two points of R^{1+d} (first coordinate is time).
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// {t} x product of closed intervals in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBox {
    pub t: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphPrimitive {
    Segment(Segment),
    TimeBox(TimeBox),
}

/// Compact finite union of segments and time boxes in [0,1] x R^d.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphSet {
    pub primitives: Vec<GraphPrimitive>,
}

impl GraphSet {
    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn push_segment(&mut self, p: Vec<f64>, q: Vec<f64>) {
        self.primitives.push(GraphPrimitive::Segment(Segment { p, q }));
    }

    pub fn push_time_box(&mut self, t: f64, a: &[f64], b: &[f64]) {
        let lo: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.min(*y)).collect();
        let hi: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.max(*y)).collect();
        self.primitives.push(GraphPrimitive::TimeBox(TimeBox { t, lo, hi }));
    }
}

fn point(t: f64, v: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(v.len() + 1);
    p.push(t);
    p.extend_from_slice(v);
    p
}

/// Completed graph of a path: horizontal/linear segments for the continuous
/// pieces, plus one connector per discontinuity in the requested mode.
pub fn completed_graph(u: &Path, completion: Completion) -> GraphSet {
    let mut g = GraphSet::default();
    match u {
        Path::Polyline(p) => {
            let bp = p.breakpoints();
            for w in bp.windows(2) {
                g.push_segment(point(w[0].0, &w[0].1), point(w[1].0, &w[1].1));
            }
        }
        Path::Step(p) => {
            let mut t_prev = 0.0;
            let mut v_prev = p.u0().to_vec();
            for (t, v) in p.jumps() {
                g.push_segment(point(t_prev, &v_prev), point(*t, &v_prev));
                if v != &v_prev {
                    match completion {
                        Completion::Segment => {
                            g.push_segment(point(*t, &v_prev), point(*t, v))
                        }
                        Completion::Box => g.push_time_box(*t, &v_prev, v),
                    }
                }
                t_prev = *t;
                v_prev = v.clone();
            }
            if t_prev < 1.0 {
                g.push_segment(point(t_prev, &v_prev), point(1.0, &v_prev));
            }
        }
    }
    g
}

/// Normalized excursion shape: path from 0 to a terminal direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    path: Path,
    omega: Vec<f64>,
}

impl Profile {
    /// `path(0)` must be 0 and `|path(1)|` must be 1 (within 1e-9) or exactly 0
    /// for the degenerate zero profile.
    pub fn new(path: Path) -> Result<Self> {
        let z = path.value_at_zero();
        if z.iter().any(|x| *x != 0.0) {
            return Err(Error::domain("profile must start at 0"));
        }
        let omega = path.value_at_one();
        let norm = norm(&omega);
        if norm != 0.0 && (norm - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "profile terminal norm must be 0 or 1, got {norm}"
            )));
        }
        Ok(Profile { path, omega })
    }

    /// The degenerate profile used for ties in the nearest-direction map.
    pub fn zero(dim: usize) -> Self {
        Profile {
            path: Path::Polyline(
                PolylinePath::linear(vec![0.0; dim], vec![0.0; dim]).unwrap(),
            ),
            omega: vec![0.0; dim],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.omega.iter().all(|x| *x == 0.0)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// --- JSON wire format -------------------------------------------------------
//
// {"dim":d, "u0":[...], "kind":"step"|"polyline", "points":[{"t":..,"v":[..]}]}
// Round-trips doubles bit-exactly (serde_json shortest-representation).

#[derive(Serialize, Deserialize)]
struct PathJson {
    dim: usize,
    u0: Vec<f64>,
    kind: String,
    points: Vec<PointJson>,
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    t: f64,
    v: Vec<f64>,
}

impl Serialize for Path {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let j = match self {
            Path::Step(p) => PathJson {
                dim: p.dim(),
                u0: p.u0().to_vec(),
                kind: "step".into(),
                points: p
                    .jumps()
                    .iter()
                    .map(|(t, v)| PointJson { t: *t, v: v.clone() })
                    .collect(),
            },
            Path::Polyline(p) => PathJson {
                dim: p.dim(),
                u0: p.breakpoints()[0].1.clone(),
                kind: "polyline".into(),
                points: p
                    .breakpoints()
                    .iter()
                    .map(|(t, v)| PointJson { t: *t, v: v.clone() })
                    .collect(),
            },
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Path {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let j = PathJson::deserialize(d)?;
        match j.kind.as_str() {
            "step" => StepPath::new(
                j.dim,
                j.u0,
                j.points.into_iter().map(|p| (p.t, p.v)).collect(),
            )
            .map(Path::Step)
            .map_err(D::Error::custom),
            "polyline" => PolylinePath::new(
                j.dim,
                j.points.into_iter().map(|p| (p.t, p.v)).collect(),
            )
            .map(Path::Polyline)
            .map_err(D::Error::custom),
            other => Err(D::Error::custom(format!("unknown path kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_cadlag_convention() {
        let u = StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap();
        assert_eq!(u.eval(0.5, Side::Right).unwrap(), vec![1.0]);
        assert_eq!(u.eval(0.5, Side::Left).unwrap(), vec![0.0]);
    }

    #[test]
    fn eval_constant_vector() {
        let u = StepPath::new(2, vec![1.0, 2.0], vec![]).unwrap();
        assert_eq!(u.eval(0.7, Side::Right).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn left_limit_at_zero_is_error() {
        let u = StepPath::scalar(0.0, &[]).unwrap();
        assert!(u.eval(0.0, Side::Left).is_err());
    }

    #[test]
    fn completed_graph_single_jump_segment_mode() {
        let u = Path::Step(StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap());
        let g = completed_graph(&u, Completion::Segment);
        assert_eq!(g.primitives.len(), 3);
        match &g.primitives[1] {
            GraphPrimitive::Segment(s) => {
                assert_eq!(s.p, vec![0.5, 0.0]);
                assert_eq!(s.q, vec![0.5, 1.0]);
            }
            _ => panic!("expected vertical segment"),
        }
    }

    #[test]
    fn completed_graph_constant() {
        let u = Path::Step(StepPath::scalar(0.25, &[]).unwrap());
        let g = completed_graph(&u, Completion::Segment);
        assert_eq!(g.primitives.len(), 1);
        match &g.primitives[0] {
            GraphPrimitive::Segment(s) => {
                assert_eq!(s.p, vec![0.0, 0.25]);
                assert_eq!(s.q, vec![1.0, 0.25]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn completed_graph_box_mode_d2() {
        let u = Path::Step(
            StepPath::new(2, vec![0.0, 0.0], vec![(0.5, vec![1.0, 1.0])]).unwrap(),
        );
        let g = completed_graph(&u, Completion::Box);
        let has_box = g.primitives.iter().any(|p| match p {
            GraphPrimitive::TimeBox(b) => {
                b.t == 0.5 && b.lo == vec![0.0, 0.0] && b.hi == vec![1.0, 1.0]
            }
            _ => false,
        });
        assert!(has_box);
    }

    #[test]
    fn affine_identity_and_scale() {
        let p = Path::Step(StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap());
        let id = p.affine(1.0, &[0.0]).unwrap();
        assert_eq!(id, p);
        let q = p.affine(3.0, &[2.0]).unwrap();
        assert_eq!(q.value_at_one(), vec![5.0]);
    }

    #[test]
    fn affine_negation_flips_profile() {
        let p1 = Path::Step(StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap());
        let pm1 = p1.affine(-1.0, &[0.0]).unwrap();
        assert_eq!(pm1.value_at_one(), vec![-1.0]);
    }

    #[test]
    fn affine_round_trip_exact() {
        let p = Path::Step(StepPath::scalar(0.25, &[(0.3, 1.5), (0.8, -2.0)]).unwrap());
        let s = 4.0; // power of two: 1/s exact
        let f = p.affine(s, &[1.0]).unwrap();
        let back = f.affine(1.0 / s, &[-1.0 / s]).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn constancy_between_jumps() {
        let u = StepPath::scalar(0.0, &[(0.3, 2.0), (0.6, -1.0)]).unwrap();
        for t in [0.3, 0.4, 0.5, 0.59] {
            assert_eq!(u.eval(t, Side::Right).unwrap(), vec![2.0]);
        }
    }

    #[test]
    fn graph_contains_sampled_points() {
        // Every (t, u(t)) lies on the completed graph.
        let u = Path::Step(StepPath::scalar(0.0, &[(0.25, 1.0), (0.75, 0.5)]).unwrap());
        let g = completed_graph(&u, Completion::Segment);
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let v = u.eval(t, Side::Right).unwrap();
            let p = point(t, &v);
            let d = g
                .primitives
                .iter()
                .map(|prim| crate::metrics::dist_point_to_primitive(&p, prim))
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-12, "point at t={t} off graph by {d}");
        }
    }

    #[test]
    fn json_round_trip_bit_exact() {
        let p = Path::Step(
            StepPath::new(
                2,
                vec![0.1, -0.2],
                vec![(0.3333333333333333, vec![1.0 / 3.0, f64::MIN_POSITIVE])],
            )
            .unwrap(),
        );
        let s = serde_json::to_string(&p).unwrap();
        let q: Path = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn polyline_eval_interpolates() {
        let p = PolylinePath::scalar(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        assert_eq!(p.eval(0.25).unwrap(), vec![0.5]);
        assert_eq!(p.eval(0.5).unwrap(), vec![1.0]);
        assert_eq!(p.eval(0.75).unwrap(), vec![0.5]);
    }

    #[test]
    fn jump_times_strictness_enforced() {
        assert!(StepPath::scalar(0.0, &[(0.5, 1.0), (0.5, 2.0)]).is_err());
        assert!(StepPath::scalar(0.0, &[(0.0, 1.0)]).is_err());
        assert!(StepPath::scalar(0.0, &[(1.1, 1.0)]).is_err());
    }
}
