//! Distances on path and graph spaces.
//!
//! * [`hausdorff`] — Hausdorff distance between graph sets, certified by
//!   sampling: primitives are sampled at arc step <= delta and point-to-
//!   primitive distances are exact, so the reported value is within delta/2
//!   of the true distance (x -> dist(x, S) is 1-Lipschitz).
//! * [`d_tilde_d`] — the reparametrization-quotient metric on step paths,
//!   computed exactly as the pinned discrete Fréchet distance between value
//!   sequences.
//! * [`d_m2`] — Hausdorff between segment-completed graphs.
//! * [`d_j1_bracket`] — a [m, 2m] bracket for the strong J1 metric from a
//!   dynamic program over monotone jump couplings.
//! * [`classify_profile_mode`] — M1 / M2 / NONE for a profile, per the
//!   segment-containment and monotonicity conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{
    completed_graph, dist, Completion, GraphPrimitive, GraphSet, Path, Profile, StepPath,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
    Bracket,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    pub error_bound: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceMode {
    M1,
    M2,
    None,
}

impl std::fmt::Display for ConvergenceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvergenceMode::M1 => write!(f, "M1"),
            ConvergenceMode::M2 => write!(f, "M2"),
            ConvergenceMode::None => write!(f, "NONE"),
        }
    }
}

// --- exact point-to-primitive distances ------------------------------------

pub(crate) fn dist_point_to_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for k in 0..p.len() {
        let d = b[k] - a[k];
        ab2 += d * d;
        ap_ab += (p[k] - a[k]) * d;
    }
    let s = if ab2 == 0.0 {
        0.0
    } else {
        (ap_ab / ab2).clamp(0.0, 1.0)
    };
    let mut d2 = 0.0;
    for k in 0..p.len() {
        let c = a[k] + s * (b[k] - a[k]);
        d2 += (p[k] - c) * (p[k] - c);
    }
    d2.sqrt()
}

pub(crate) fn dist_point_to_primitive(p: &[f64], prim: &GraphPrimitive) -> f64 {
    match prim {
        GraphPrimitive::Segment(s) => dist_point_to_segment(p, &s.p, &s.q),
        GraphPrimitive::TimeBox(b) => {
            let mut d2 = (p[0] - b.t) * (p[0] - b.t);
            for k in 0..b.lo.len() {
                let x = p[k + 1];
                let c = x.clamp(b.lo[k], b.hi[k]);
                d2 += (x - c) * (x - c);
            }
            d2.sqrt()
        }
    }
}

fn primitive_time_span(prim: &GraphPrimitive) -> (f64, f64) {
    match prim {
        GraphPrimitive::Segment(s) => (s.p[0].min(s.q[0]), s.p[0].max(s.q[0])),
        GraphPrimitive::TimeBox(b) => (b.t, b.t),
    }
}

/// Sample a primitive so that every point of it is within delta/2 of a sample.
fn sample_primitive(prim: &GraphPrimitive, delta: f64, out: &mut Vec<Vec<f64>>) {
    match prim {
        GraphPrimitive::Segment(s) => {
            let len = dist(&s.p, &s.q);
            let n = (len / delta).ceil() as usize;
            for i in 0..=n {
                let w = if n == 0 { 0.0 } else { i as f64 / n as f64 };
                out.push(
                    s.p.iter()
                        .zip(&s.q)
                        .map(|(a, b)| a + w * (b - a))
                        .collect(),
                );
            }
        }
        GraphPrimitive::TimeBox(b) => {
            // Per-axis spacing delta/sqrt(d_eff) keeps grid points within
            // delta/2 of any box point.
            let active: Vec<usize> = (0..b.lo.len()).filter(|&k| b.hi[k] > b.lo[k]).collect();
            let d_eff = active.len().max(1) as f64;
            let spacing = delta / d_eff.sqrt();
            let counts: Vec<usize> = active
                .iter()
                .map(|&k| ((b.hi[k] - b.lo[k]) / spacing).ceil() as usize)
                .collect();
            let mut idx = vec![0usize; active.len()];
            loop {
                let mut p = Vec::with_capacity(b.lo.len() + 1);
                p.push(b.t);
                p.extend_from_slice(&b.lo);
                for (a, &k) in active.iter().enumerate() {
                    let n = counts[a];
                    let w = if n == 0 {
                        0.0
                    } else {
                        idx[a] as f64 / n as f64
                    };
                    p[k + 1] = b.lo[k] + w * (b.hi[k] - b.lo[k]);
                }
                out.push(p);
                // advance the mixed-radix counter
                let mut a = 0;
                loop {
                    if a == active.len() {
                        return;
                    }
                    idx[a] += 1;
                    if idx[a] <= counts[a] {
                        break;
                    }
                    idx[a] = 0;
                    a += 1;
                }
            }
        }
    }
}

/// Nearest-primitive queries accelerated by bucketing on the time axis.
/// Time separation lower-bounds distance, which lets the ring search stop.
pub struct GraphIndex<'a> {
    primitives: &'a [GraphPrimitive],
    buckets: Vec<Vec<u32>>,
    t_min: f64,
    width: f64,
    stamp: std::cell::RefCell<(Vec<u32>, u32)>,
}

impl<'a> GraphIndex<'a> {
    pub fn new(set: &'a GraphSet) -> Self {
        let prims = &set.primitives;
        let (mut t_min, mut t_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in prims {
            let (a, b) = primitive_time_span(p);
            t_min = t_min.min(a);
            t_max = t_max.max(b);
        }
        let n_buckets = prims.len().clamp(1, 1 << 16);
        let width = ((t_max - t_min) / n_buckets as f64).max(1e-12);
        let mut buckets = vec![Vec::new(); n_buckets];
        for (i, p) in prims.iter().enumerate() {
            let (a, b) = primitive_time_span(p);
            let lo = (((a - t_min) / width) as usize).min(n_buckets - 1);
            let hi = (((b - t_min) / width) as usize).min(n_buckets - 1);
            for bucket in buckets.iter_mut().take(hi + 1).skip(lo) {
                bucket.push(i as u32);
            }
        }
        GraphIndex {
            primitives: prims,
            buckets,
            t_min,
            width,
            stamp: std::cell::RefCell::new((vec![0; prims.len()], 0)),
        }
    }

    /// Exact distance from `p` to the nearest primitive.
    pub fn query(&self, p: &[f64]) -> f64 {
        let n = self.buckets.len();
        let center = (((p[0] - self.t_min) / self.width) as isize).clamp(0, n as isize - 1);
        let mut best = f64::INFINITY;
        let mut stamp = self.stamp.borrow_mut();
        stamp.1 += 1;
        let cur = stamp.1;
        for ring in 0.. {
            // Minimal time separation any primitive in this ring can have.
            let ring_sep = if ring <= 1 {
                0.0
            } else {
                (ring - 1) as f64 * self.width
            };
            if ring_sep > best {
                break;
            }
            let mut visited_any = false;
            let visit = |b: isize, stamp: &mut (Vec<u32>, u32), best: &mut f64| {
                if b < 0 || b >= n as isize {
                    return false;
                }
                for &i in &self.buckets[b as usize] {
                    if stamp.0[i as usize] == cur {
                        continue;
                    }
                    stamp.0[i as usize] = cur;
                    let d = dist_point_to_primitive(p, &self.primitives[i as usize]);
                    if d < *best {
                        *best = d;
                    }
                }
                true
            };
            if ring == 0 {
                visited_any |= visit(center, &mut stamp, &mut best);
            } else {
                visited_any |= visit(center - ring as isize, &mut stamp, &mut best);
                visited_any |= visit(center + ring as isize, &mut stamp, &mut best);
            }
            if !visited_any && ring > 0 && center - (ring as isize) < 0 && center + (ring as isize) >= n as isize {
                break;
            }
        }
        best
    }
}

/// Certified sampled Hausdorff distance between nonempty graph sets.
pub fn hausdorff(a: &GraphSet, b: &GraphSet, delta: f64) -> Result<MetricResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("hausdorff on empty GraphSet"));
    }
    if !(delta > 0.0) {
        return Err(Error::domain("sampling step delta must be > 0"));
    }
    let directed = |from: &GraphSet, to: &GraphSet| -> f64 {
        let index = GraphIndex::new(to);
        let mut samples = Vec::new();
        let mut worst: f64 = 0.0;
        for prim in &from.primitives {
            samples.clear();
            sample_primitive(prim, delta, &mut samples);
            for p in &samples {
                worst = worst.max(index.query(p));
            }
        }
        worst
    };
    let value = directed(a, b).max(directed(b, a));
    Ok(MetricResult {
        value,
        error_bound: delta / 2.0,
        method: Method::Sampled,
    })
}

// --- quotient metric d_{D~} -------------------------------------------------

/// Pinned discrete Fréchet distance between two value sequences: minimum over
/// monotone couplings (both endpoints matched) of the maximum pointwise
/// distance. Rolling-row dynamic program, O(len_a * len_b) time, O(len_b)
/// space.
pub fn discrete_frechet(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let n = b.len();
    let mut prev = vec![0.0f64; n];
    let mut row = vec![0.0f64; n];
    prev[0] = dist(&a[0], &b[0]);
    for j in 1..n {
        prev[j] = prev[j - 1].max(dist(&a[0], &b[j]));
    }
    for i in 1..a.len() {
        row[0] = prev[0].max(dist(&a[i], &b[0]));
        for j in 1..n {
            let reach = prev[j].min(prev[j - 1]).min(row[j - 1]);
            row[j] = reach.max(dist(&a[i], &b[j]));
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[n - 1]
}

/// d_{D~} between step paths: exact via discrete Fréchet on value sequences.
pub fn d_tilde_d(u1: &StepPath, u2: &StepPath) -> Result<MetricResult> {
    if u1.dim() != u2.dim() {
        return Err(Error::DimensionMismatch {
            left: u1.dim(),
            right: u2.dim(),
        });
    }
    let a = crate::paths::dedup_consecutive(u1.value_seq());
    let b = crate::paths::dedup_consecutive(u2.value_seq());
    Ok(MetricResult {
        value: discrete_frechet(&a, &b),
        error_bound: 0.0,
        method: Method::Exact,
    })
}

/// d_{D~} between arbitrary paths via their quotient value sequences
/// (step values exactly, polyline breakpoint values).
pub fn d_tilde_paths(u1: &Path, u2: &Path) -> Result<MetricResult> {
    if u1.dim() != u2.dim() {
        return Err(Error::DimensionMismatch {
            left: u1.dim(),
            right: u2.dim(),
        });
    }
    let a = u1.quotient_value_seq();
    let b = u2.quotient_value_seq();
    Ok(MetricResult {
        value: discrete_frechet(&a, &b),
        error_bound: 0.0,
        method: Method::Exact,
    })
}

/// M2 distance: Hausdorff between segment-completed graphs.
pub fn d_m2(u1: &Path, u2: &Path, delta: f64) -> Result<MetricResult> {
    if u1.dim() != u2.dim() {
        return Err(Error::DimensionMismatch {
            left: u1.dim(),
            right: u2.dim(),
        });
    }
    hausdorff(
        &completed_graph(u1, Completion::Segment),
        &completed_graph(u2, Completion::Segment),
        delta,
    )
}

/// Bracket [m, 2m] for the strong J1 distance.
///
/// m = min over monotone jump couplings of max(value mismatch, matched-jump
/// time displacement); since a+b lies in [max(a,b), 2 max(a,b)], the true J1
/// value lies in [m, 2m].
pub fn d_j1_bracket(u1: &StepPath, u2: &StepPath) -> Result<(f64, f64)> {
    if u1.dim() != u2.dim() {
        return Err(Error::DimensionMismatch {
            left: u1.dim(),
            right: u2.dim(),
        });
    }
    let a = u1.value_seq();
    let b = u2.value_seq();
    let sa: Vec<f64> = u1.jumps().iter().map(|(t, _)| *t).collect();
    let sb: Vec<f64> = u2.jumps().iter().map(|(t, _)| *t).collect();
    let m = a.len();
    let n = b.len();
    let mut prev = vec![0.0f64; n];
    let mut row = vec![0.0f64; n];
    prev[0] = dist(&a[0], &b[0]);
    for j in 1..n {
        prev[j] = prev[j - 1].max(dist(&a[0], &b[j]));
    }
    for i in 1..m {
        row[0] = prev[0].max(dist(&a[i], &b[0]));
        for j in 1..n {
            // diagonal move couples jump i of u1 with jump j of u2
            let diag = prev[j - 1].max((sa[i - 1] - sb[j - 1]).abs());
            let reach = prev[j].min(row[j - 1]).min(diag);
            row[j] = reach.max(dist(&a[i], &b[j]));
        }
        std::mem::swap(&mut prev, &mut row);
    }
    let v = prev[n - 1];
    Ok((v, 2.0 * v))
}

/// Convergence-mode classifier for a profile with |P(1)| = 1.
///
/// Decomposes P(t) = phi(t) P(1) + r(t) with r orthogonal to P(1); the range
/// condition (phi in [0,1], r = 0) gives M2, monotone phi additionally gives
/// M1, anything else NONE.
pub fn classify_profile_mode(p: &Profile, tol: f64) -> Result<ConvergenceMode> {
    let omega = p.omega();
    let n = crate::paths::norm(omega);
    if n == 0.0 {
        return Err(Error::domain("zero terminal direction"));
    }
    let omega: Vec<f64> = omega.iter().map(|x| x / n).collect();
    let values: Vec<Vec<f64>> = match p.path() {
        Path::Step(sp) => sp.value_seq(),
        Path::Polyline(pp) => pp.breakpoints().iter().map(|(_, v)| v.clone()).collect(),
    };
    let mut phis = Vec::with_capacity(values.len());
    let mut r_sup: f64 = 0.0;
    for v in &values {
        let phi: f64 = v.iter().zip(&omega).map(|(x, w)| x * w).sum();
        let r2: f64 = v
            .iter()
            .zip(&omega)
            .map(|(x, w)| {
                let r = x - phi * w;
                r * r
            })
            .sum();
        r_sup = r_sup.max(r2.sqrt());
        phis.push(phi);
    }
    let in_segment = r_sup <= tol
        && phis.iter().all(|&phi| phi >= -tol && phi <= 1.0 + tol);
    if !in_segment {
        return Ok(ConvergenceMode::None);
    }
    let monotone = phis.windows(2).all(|w| w[1] >= w[0] - tol);
    Ok(if monotone {
        ConvergenceMode::M1
    } else {
        ConvergenceMode::M2
    })
}

pub mod oracle {
    //! Independent reference evaluations used by the verification suites.
    //!
    //! These evaluate the defining infimum of d_{D~} directly: a concrete
    //! reparametrization lambda is constructed and sup |u1(lambda(t)) - u2(t)|
    //! is computed exactly for step paths. No dynamic-programming machinery
    //! from the implementation path is used.

    use rand::Rng;

    use crate::paths::{dist, Side, StepPath};

    /// Piecewise-linear strictly increasing bijection of [0,1], as knots.
    #[derive(Debug, Clone)]
    pub struct Reparam {
        /// (t, lambda(t)) with first (0,0) and last (1,1), both coordinates
        /// strictly increasing.
        pub knots: Vec<(f64, f64)>,
    }

    impl Reparam {
        pub fn apply(&self, t: f64) -> f64 {
            let i = self
                .knots
                .partition_point(|(x, _)| *x <= t)
                .clamp(1, self.knots.len() - 1);
            let (x0, y0) = self.knots[i - 1];
            let (x1, y1) = self.knots[i];
            if t <= x0 {
                return y0;
            }
            y0 + (t - x0) / (x1 - x0) * (y1 - y0)
        }

        pub fn invert(&self, y: f64) -> f64 {
            let i = self
                .knots
                .partition_point(|(_, v)| *v <= y)
                .clamp(1, self.knots.len() - 1);
            let (x0, y0) = self.knots[i - 1];
            let (x1, y1) = self.knots[i];
            if y <= y0 {
                return x0;
            }
            x0 + (y - y0) / (y1 - y0) * (x1 - x0)
        }
    }

    /// Exact sup_t |u1(lambda(t)) - u2(t)| for step paths.
    ///
    /// Both composed functions are piecewise constant; the sup is attained on
    /// the open intervals between critical times (evaluated at midpoints) or
    /// at the endpoints.
    pub fn sup_diff_under_lambda(u1: &StepPath, u2: &StepPath, lambda: &Reparam) -> f64 {
        let mut crit: Vec<f64> = vec![0.0, 1.0];
        for (t, _) in u2.jumps() {
            crit.push(*t);
        }
        for (s, _) in u1.jumps() {
            crit.push(lambda.invert(*s));
        }
        crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
        crit.dedup();
        let eval = |t: f64| -> f64 {
            let t = t.clamp(0.0, 1.0);
            let v1 = u1.eval(lambda.apply(t).clamp(0.0, 1.0), Side::Right).unwrap();
            let v2 = u2.eval(t, Side::Right).unwrap();
            dist(&v1, &v2)
        };
        let mut sup: f64 = eval(0.0).max(eval(1.0));
        for w in crit.windows(2) {
            sup = sup.max(eval(0.5 * (w[0] + w[1])));
        }
        sup
    }

    /// Random monotone reparametrization with `k` uniform interior knots.
    pub fn random_reparam<R: Rng>(rng: &mut R, k: usize) -> Reparam {
        let mut xs: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let mut ys: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut knots = vec![(0.0, 0.0)];
        for (x, y) in xs.into_iter().zip(ys) {
            let last = *knots.last().unwrap();
            if x > last.0 && y > last.1 && x < 1.0 && y < 1.0 {
                knots.push((x, y));
            }
        }
        knots.push((1.0, 1.0));
        Reparam { knots }
    }

    /// Random monotone jump-alignment reparametrization.
    ///
    /// Samples a monotone lattice path over the jump-index lattice of the two
    /// paths (moves: advance u1's jump, advance u2's jump, or both) and builds
    /// a lambda that realizes it: jumps coupled by a diagonal move are aligned
    /// exactly, uncoupled jumps are placed strictly between their neighbours.
    pub fn random_alignment_reparam<R: Rng>(
        rng: &mut R,
        u1: &StepPath,
        u2: &StepPath,
    ) -> Reparam {
        let s: Vec<f64> = u1.jumps().iter().map(|(t, _)| *t).collect();
        let t: Vec<f64> = u2.jumps().iter().map(|(t, _)| *t).collect();
        let (m, n) = (s.len(), t.len());
        // Targets for u1's jump times on u2's time axis.
        let mut targets: Vec<f64> = Vec::with_capacity(m);
        let (mut i, mut j) = (0usize, 0usize);
        let mut pending_between = 0usize; // u1 jumps waiting for a slot
        let mut last_fixed = 0.0f64;
        let place_pending = |upto: f64, pending: &mut usize, last: &mut f64, out: &mut Vec<f64>| {
            let k = *pending;
            for a in 0..k {
                out.push(*last + (upto - *last) * (a + 1) as f64 / (k + 1) as f64);
            }
            *pending = 0;
            *last = upto;
        };
        while i < m || j < n {
            let can_r = i < m;
            let can_u = j < n;
            let can_d = can_r && can_u;
            let mv = loop {
                let c = rng.gen_range(0..3);
                match c {
                    0 if can_r => break 0,
                    1 if can_u => break 1,
                    2 if can_d => break 2,
                    _ => {
                        if !can_d {
                            if can_r {
                                break 0;
                            }
                            break 1;
                        }
                    }
                }
            };
            match mv {
                0 => {
                    pending_between += 1;
                    i += 1;
                }
                1 => {
                    place_pending(t[j], &mut pending_between, &mut last_fixed, &mut targets);
                    j += 1;
                }
                _ => {
                    place_pending(t[j], &mut pending_between, &mut last_fixed, &mut targets);
                    targets.push(t[j]);
                    last_fixed = t[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        place_pending(1.0, &mut pending_between, &mut last_fixed, &mut targets);
        // Enforce strict increase with tiny separations.
        let mut prev = 0.0;
        for tgt in targets.iter_mut() {
            if *tgt <= prev {
                *tgt = prev + 1e-9;
            }
            prev = *tgt;
        }
        // lambda(target_i) = s_i, so u1(lambda(.)) jumps at target_i.
        let mut knots = vec![(0.0, 0.0)];
        for (si, tgt) in s.iter().zip(&targets) {
            let last = *knots.last().unwrap();
            if *tgt > last.0 && *si > last.1 && *tgt < 1.0 && *si < 1.0 {
                knots.push((*tgt, *si));
            }
        }
        knots.push((1.0, 1.0));
        Reparam { knots }
    }
}
