//! Decorated càdlàg paths: excursion triples, the projections to the
//! graph space (boxes) and to the spliced-excursion quotient space, the
//! combined pseudometric, jump-decoration functionals, and the running-max
//! functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, MetricResult, Method};
use crate::paths::{
    completed_graph, dist, norm, Completion, GraphSet, Path, PolylinePath, Profile, StepPath,
};
use crate::stable::LevyPath;

const ENDPOINT_TOL: f64 = 1e-12;

/// A càdlàg path decorated with one excursion per marked time.
///
/// Every discontinuity of `u` must be marked; an excursion at `tau` starts at
/// `u(tau-)` and ends at `u(tau)` (within 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct Decorated {
    u: Path,
    /// Marked times, strictly increasing in (0,1).
    times: Vec<f64>,
    /// One excursion per marked time, a path on [0,1].
    excursions: Vec<Path>,
}

impl Decorated {
    pub fn new(u: Path, times: Vec<f64>, excursions: Vec<Path>) -> Result<Self> {
        if times.len() != excursions.len() {
            return Err(Error::domain("one excursion per marked time required"));
        }
        let mut prev = 0.0;
        for t in &times {
            if !(*t > prev && *t < 1.0) {
                return Err(Error::domain(format!(
                    "marked times must be strictly increasing in (0,1), got {t}"
                )));
            }
            prev = *t;
        }
        let d = u.dim();
        for (t, e) in times.iter().zip(&excursions) {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: e.dim(),
                    right: d,
                });
            }
            let left = u.eval(*t, crate::paths::Side::Left)?;
            let right = u.eval(*t, crate::paths::Side::Right)?;
            let e0 = e.value_at_zero();
            let e1 = e.value_at_one();
            if dist(&e0, &left) > ENDPOINT_TOL {
                return Err(Error::domain(format!(
                    "excursion at {t} does not start at u(tau-)"
                )));
            }
            if dist(&e1, &right) > ENDPOINT_TOL {
                return Err(Error::domain(format!(
                    "excursion at {t} does not end at u(tau)"
                )));
            }
        }
        // every discontinuity of u must be marked (a jump at exactly t=1 is
        // legal and unmarked: marked times live in (0,1))
        if let Path::Step(sp) = &u {
            for tau in sp.discontinuities() {
                if tau < 1.0 && !times.iter().any(|t| *t == tau) {
                    return Err(Error::domain(format!(
                        "discontinuity at {tau} has no excursion"
                    )));
                }
            }
        }
        Ok(Decorated {
            u,
            times,
            excursions,
        })
    }

    /// Undecorated element: no marked times.
    pub fn bare(u: Path) -> Result<Self> {
        Decorated::new(u, Vec::new(), Vec::new())
    }

    pub fn u(&self) -> &Path {
        &self.u
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn excursions(&self) -> &[Path] {
        &self.excursions
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }
}

/// Projection to the graph space: the base path plus one box per marked time.
#[derive(Debug, Clone, PartialEq)]
pub struct EElement {
    pub u: Path,
    pub times: Vec<f64>,
    /// Componentwise [min, max] over the generating excursion's range.
    pub boxes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl EElement {
    /// Graph of the set-valued path: box-completed graph of u, union the
    /// excursion boxes.
    pub fn graph(&self) -> GraphSet {
        let mut g = completed_graph(&self.u, Completion::Box);
        for (t, (lo, hi)) in self.times.iter().zip(&self.boxes) {
            g.push_time_box(*t, lo, hi);
        }
        g
    }
}

/// Box projection: per-coordinate range of each excursion.
pub fn pi_e(x: &Decorated) -> EElement {
    let boxes = x
        .excursions
        .iter()
        .map(|e| e.coordinate_range())
        .collect();
    EElement {
        u: x.u.clone(),
        times: x.times.clone(),
        boxes,
    }
}

/// Step representation carrying a path's quotient value sequence: exact for
/// step paths; breakpoint values for polylines. The spliced projection is
/// consumed only through the reparametrization quotient, where a monotone
/// linear segment and its endpoint pair are interchangeable.
pub(crate) fn as_step(p: &Path) -> StepPath {
    match p {
        Path::Step(sp) => sp.clone(),
        Path::Polyline(pp) => {
            let u0 = pp.breakpoints()[0].1.clone();
            let jumps = pp
                .breakpoints()
                .iter()
                .filter(|(t, _)| *t > 0.0)
                .map(|(t, v)| (*t, v.clone()))
                .collect();
            StepPath::new(pp.dim(), u0, jumps).unwrap()
        }
    }
}

/// Splice projection: each excursion is inserted after its marked time into
/// an interval of length m^{-2} (m = time-order rank), and the result is
/// rescaled to [0,1]. Polyline components are densely sampled first; under
/// the reparametrization quotient only the value order matters.
pub fn pi_d(x: &Decorated) -> StepPath {
    let u = as_step(&x.u);
    let k = x.times.len();
    let lens: Vec<f64> = (1..=k).map(|m| 1.0 / ((m * m) as f64)).collect();
    let total: f64 = 1.0 + lens.iter().sum::<f64>();
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut offset = 0.0;
    let mut uj = u.jumps().iter().peekable();
    for (i, tau) in x.times.iter().enumerate() {
        while let Some((t, v)) = uj.peek() {
            if *t < *tau {
                out.push((*t + offset, v.clone()));
                uj.next();
            } else {
                break;
            }
        }
        // u's own jump at tau is replaced by the excursion
        if let Some((t, _)) = uj.peek() {
            if *t == *tau {
                uj.next();
            }
        }
        let e = as_step(&x.excursions[i]);
        for (s, v) in e.jumps() {
            out.push((tau + offset + s * lens[i], v.clone()));
        }
        offset += lens[i];
    }
    for (t, v) in uj {
        out.push((*t + offset, v.clone()));
    }
    let jumps = out
        .into_iter()
        .map(|(t, v)| ((t / total).min(1.0), v))
        .collect();
    StepPath::new(u.dim(), u.u0().to_vec(), jumps).expect("spliced times increase")
}

/// Pseudometric on decorated paths: Hausdorff distance between the box
/// graphs plus the quotient distance between the spliced projections.
pub fn d_fprime(x: &Decorated, y: &Decorated, delta: f64) -> Result<MetricResult> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let de = metrics::hausdorff(&pi_e(x).graph(), &pi_e(y).graph(), delta)?;
    let dd = metrics::d_tilde_d(&pi_d(x), &pi_d(y))?;
    Ok(MetricResult {
        value: de.value + dd.value,
        error_bound: de.error_bound,
        method: Method::Sampled,
    })
}

/// Nearest-direction profile: the profile whose terminal direction is closest
/// to y/|y|; the zero profile for y = 0 or ties (within 1e-12).
pub fn nearest_profile(y: &[f64], profiles: &[Profile]) -> Profile {
    let n = norm(y);
    if n == 0.0 {
        return Profile::zero(y.len());
    }
    let dir: Vec<f64> = y.iter().map(|v| v / n).collect();
    let mut best = (f64::INFINITY, 0usize);
    let mut second = f64::INFINITY;
    for (i, p) in profiles.iter().enumerate() {
        let d = dist(&dir, p.omega());
        if d < best.0 {
            second = best.0;
            best = (d, i);
        } else if d < second {
            second = d;
        }
    }
    if (second - best.0).abs() <= ENDPOINT_TOL && second.is_finite() {
        return Profile::zero(y.len());
    }
    profiles[best.1].clone()
}

/// Excursion u(tau-) + |J| P(t) + t (J - |J| P(1)) for jump vector J and
/// profile P.
///
/// The linear correction is exact for polyline profiles; for step profiles
/// with a nonzero correction the drift is folded in at the jump times (a
/// documented approximation) and the final value is snapped to u(tau-) + J.
pub(crate) fn jump_excursion(u_left: &[f64], jump: &[f64], p: &Profile) -> Path {
    let d = u_left.len();
    let target: Vec<f64> = u_left.iter().zip(jump).map(|(a, b)| a + b).collect();
    if p.is_zero() {
        return Path::Polyline(PolylinePath::linear(u_left.to_vec(), target).unwrap());
    }
    let j = norm(jump);
    let drift: Vec<f64> = jump
        .iter()
        .zip(p.omega())
        .map(|(x, w)| x - j * w)
        .collect();
    let drift_zero = norm(&drift) <= ENDPOINT_TOL * (1.0 + j);
    let scaled = p.path().affine(j, u_left).unwrap();
    let path = if drift_zero {
        scaled
    } else {
        match scaled {
            Path::Polyline(pp) => Path::Polyline(pp.add_linear_drift(&drift).unwrap()),
            Path::Step(sp) => {
                let jumps: Vec<(f64, Vec<f64>)> = sp
                    .jumps()
                    .iter()
                    .map(|(t, v)| {
                        (
                            *t,
                            v.iter().zip(&drift).map(|(x, dr)| x + t * dr).collect(),
                        )
                    })
                    .collect();
                Path::Step(StepPath::new(d, sp.u0().to_vec(), jumps).unwrap())
            }
        }
    };
    snap_terminal(path, &target)
}

/// Replace the terminal value by `target` when it is already within 1e-9.
fn snap_terminal(path: Path, target: &[f64]) -> Path {
    if dist(&path.value_at_one(), target) > 1e-9 {
        return path;
    }
    match path {
        Path::Step(sp) => {
            let mut jumps = sp.jumps().to_vec();
            if let Some(last) = jumps.last_mut() {
                if last.0 == 1.0 {
                    last.1 = target.to_vec();
                } else {
                    jumps.push((1.0, target.to_vec()));
                }
            } else {
                jumps.push((1.0, target.to_vec()));
            }
            Path::Step(StepPath::new(sp.dim(), sp.u0().to_vec(), jumps).unwrap())
        }
        Path::Polyline(pp) => {
            let mut bps = pp.breakpoints().to_vec();
            bps.last_mut().unwrap().1 = target.to_vec();
            Path::Polyline(PolylinePath::new(pp.dim(), bps).unwrap())
        }
    }
}

/// Decorate every discontinuity of `u` with the nearest-direction profile
/// excursion.
pub fn chi(u: &Path, profiles: &[Profile]) -> Result<Decorated> {
    let sp = match u {
        Path::Step(sp) => sp,
        Path::Polyline(_) => return Decorated::bare(u.clone()),
    };
    let mut times = Vec::new();
    let mut excursions = Vec::new();
    for tau in sp.discontinuities() {
        if tau >= 1.0 {
            continue;
        }
        let left = sp.eval(tau, crate::paths::Side::Left)?;
        let right = sp.eval(tau, crate::paths::Side::Right)?;
        let jump: Vec<f64> = right.iter().zip(&left).map(|(a, b)| a - b).collect();
        let p = nearest_profile(&jump, profiles);
        times.push(tau);
        excursions.push(jump_excursion(&left, &jump, &p));
    }
    Decorated::new(u.clone(), times, excursions)
}

/// Trivial embedding of a grid step path: every interior grid point is marked
/// and carries the two-valued excursion switching at t = 1/2.
pub fn embed_step_trivial(w: &StepPath, n: usize) -> Result<Decorated> {
    if n == 0 {
        return Err(Error::domain("grid size must be positive"));
    }
    for (t, _) in w.jumps() {
        let j = (t * n as f64).round();
        if (t - j / n as f64).abs() > ENDPOINT_TOL {
            return Err(Error::domain(format!("jump at {t} is off the 1/{n} grid")));
        }
    }
    let mut times = Vec::with_capacity(n.saturating_sub(1));
    let mut excursions = Vec::with_capacity(n.saturating_sub(1));
    for j in 1..n {
        let tau = j as f64 / n as f64;
        let left = w.eval(tau, crate::paths::Side::Left)?;
        let right = w.eval(tau, crate::paths::Side::Right)?;
        let e = StepPath::new(w.dim(), left, vec![(0.5, right)])?;
        times.push(tau);
        excursions.push(Path::Step(e));
    }
    Decorated::new(Path::Step(w.clone()), times, excursions)
}

/// Decorate a sampled stable path's jump component with the profile matching
/// each jump direction.
pub fn decorate_levy(l: &LevyPath, profiles: &[Profile]) -> Result<Decorated> {
    let sp = &l.jumps;
    let mut times = Vec::new();
    let mut excursions = Vec::new();
    for tau in sp.discontinuities() {
        if tau >= 1.0 {
            continue;
        }
        let left = sp.eval(tau, crate::paths::Side::Left)?;
        let right = sp.eval(tau, crate::paths::Side::Right)?;
        let jump: Vec<f64> = right.iter().zip(&left).map(|(a, b)| a - b).collect();
        let j = norm(&jump);
        let dir: Vec<f64> = jump.iter().map(|x| x / j).collect();
        let p = profiles
            .iter()
            .find(|p| dist(&dir, p.omega()) <= 1e-9)
            .ok_or_else(|| {
                Error::domain(format!("jump direction {dir:?} matches no profile"))
            })?;
        let scaled = p.path().affine(j, &left)?;
        times.push(tau);
        excursions.push(snap_terminal(scaled, &right));
    }
    Decorated::new(Path::Step(sp.clone()), times, excursions)
}

/// Running maximum of the set-valued box projection (d = 1 only).
pub fn psi_max(x: &Decorated) -> Result<StepPath> {
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: 1,
        });
    }
    let sp = match x.u() {
        Path::Step(sp) => sp,
        Path::Polyline(_) => return Err(Error::domain("psi_max requires a step base path")),
    };
    let e = pi_e(x);
    let mut m = sp.u0()[0];
    let mut jumps = Vec::new();
    for (t, (_, hi)) in e.times.iter().zip(&e.boxes) {
        let after = sp.eval(*t, crate::paths::Side::Right)?[0];
        let new_m = m.max(hi[0]).max(after);
        if new_m > m {
            jumps.push((*t, vec![new_m]));
            m = new_m;
        }
    }
    // discontinuities of u beyond the marked times (none when x is valid,
    // but a jump at t=1 is legal and unmarked)
    for (t, v) in sp.jumps() {
        if v[0] > m && !e.times.contains(t) {
            jumps.push((*t, vec![v[0]]));
            m = v[0];
        }
    }
    jumps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    StepPath::new(1, vec![sp.u0()[0]], jumps)
}

// --- JSON wire format -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ExcursionJson {
    t: f64,
    path: Path,
}

#[derive(Serialize, Deserialize)]
struct DecoratedJson {
    u: Path,
    excursions: Vec<ExcursionJson>,
}

impl Serialize for Decorated {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DecoratedJson {
            u: self.u.clone(),
            excursions: self
                .times
                .iter()
                .zip(&self.excursions)
                .map(|(t, e)| ExcursionJson {
                    t: *t,
                    path: e.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decorated {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let j = DecoratedJson::deserialize(d)?;
        let (times, excursions) = j
            .excursions
            .into_iter()
            .map(|e| (e.t, e.path))
            .unzip();
        Decorated::new(j.u, times, excursions).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::d_tilde_d;

    /// Step profile with values 1 - c^j at times 1 - 2^{-j} (one-sided case)
    /// or 1 - (-c)^j (alternating case when c < 0 is passed).
    fn geometric_profile(c: f64) -> Profile {
        let mut jumps = Vec::new();
        let mut j = 1;
        loop {
            let val = 1.0 - c.powi(j);
            let t = 1.0 - 0.5f64.powi(j);
            if (val - 1.0).abs() < 1e-13 || j > 60 {
                jumps.push((t, 1.0));
                break;
            }
            jumps.push((t, val));
            j += 1;
        }
        Profile::new(Path::Step(StepPath::scalar(0.0, &jumps).unwrap())).unwrap()
    }

    fn linear_profiles_d1() -> Vec<Profile> {
        vec![
            Profile::new(Path::Polyline(
                PolylinePath::linear(vec![0.0], vec![1.0]).unwrap(),
            ))
            .unwrap(),
            Profile::new(Path::Polyline(
                PolylinePath::linear(vec![0.0], vec![-1.0]).unwrap(),
            ))
            .unwrap(),
        ]
    }

    #[test]
    fn pi_e_trivial_excursion_box() {
        let w = StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap();
        let x = embed_step_trivial(&w, 2).unwrap();
        let e = pi_e(&x);
        assert_eq!(e.times, vec![0.5]);
        assert_eq!(e.boxes[0], (vec![0.0], vec![1.0]));
    }

    #[test]
    fn pi_e_overshoot_box() {
        // alternating values 1-(-1/9)^j span [0, 10/9]
        let p = geometric_profile(-1.0 / 9.0);
        let jump = 2.0;
        let e = jump_excursion(&[0.0], &[jump], &p);
        let x = Decorated::new(
            Path::Step(StepPath::scalar(0.0, &[(0.5, jump)]).unwrap()),
            vec![0.5],
            vec![e],
        )
        .unwrap();
        let boxes = pi_e(&x).boxes;
        assert!(boxes[0].0[0].abs() < 1e-12);
        assert!((boxes[0].1[0] - jump * 10.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn pi_e_diagonal_segment_box() {
        let e = Path::Polyline(PolylinePath::linear(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let u = Path::Step(
            StepPath::new(2, vec![0.0, 0.0], vec![(0.5, vec![1.0, 1.0])]).unwrap(),
        );
        let x = Decorated::new(u, vec![0.5], vec![e]).unwrap();
        let b = &pi_e(&x).boxes[0];
        assert_eq!(b.0, vec![0.0, 0.0]);
        assert_eq!(b.1, vec![1.0, 1.0]);
    }

    #[test]
    fn pi_d_empty_marks_is_identity() {
        let u = StepPath::scalar(0.3, &[]).unwrap();
        let x = Decorated::bare(Path::Step(u.clone())).unwrap();
        assert_eq!(pi_d(&x), u);
    }

    #[test]
    fn pi_d_identical_decorations_distance_zero() {
        let w = StepPath::scalar(0.0, &[(0.25, 1.0), (0.75, 0.5)]).unwrap();
        let x = embed_step_trivial(&w, 4).unwrap();
        let y = embed_step_trivial(&w, 4).unwrap();
        let d = d_tilde_d(&pi_d(&x), &pi_d(&y)).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn pi_d_linear_excursion_matches_trivial_quotient() {
        // A linear excursion and the two-valued trivial excursion traverse
        // the same value sequence, so their spliced projections coincide in
        // the quotient.
        let u = Path::Step(StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap());
        let e = Path::Polyline(PolylinePath::linear(vec![0.0], vec![1.0]).unwrap());
        let x = Decorated::new(u, vec![0.5], vec![e]).unwrap();
        let w = StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap();
        let y = embed_step_trivial(&w, 2).unwrap();
        let d = d_tilde_d(&pi_d(&x), &pi_d(&y)).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn chi_matches_explicit_decoration() {
        // Example 6.1 style: geometric step profile attached to a unit jump.
        let c = 0.25f64;
        let p1 = geometric_profile(c);
        let m1 = Profile::new(p1.path().affine(-1.0, &[0.0]).unwrap()).unwrap();
        let u = Path::Step(StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap());
        let x = chi(&u, &[p1.clone(), m1]).unwrap();
        let explicit = Decorated::new(
            u.clone(),
            vec![0.5],
            vec![p1.path().clone()],
        )
        .unwrap();
        let d = d_tilde_d(&pi_d(&x), &pi_d(&explicit)).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn chi_single_positive_jump_linear_profile() {
        let u = Path::Step(StepPath::scalar(0.2, &[(0.5, 3.2)]).unwrap());
        let x = chi(&u, &linear_profiles_d1()).unwrap();
        // excursion = u(tau-) + J * P_1, J = 3
        let e = &x.excursions()[0];
        assert_eq!(e.value_at_zero(), vec![0.2]);
        assert_eq!(e.value_at_one(), vec![3.2]);
        let mid = e.eval(0.5, crate::paths::Side::Right).unwrap();
        assert!((mid[0] - (0.2 + 1.5)).abs() < 1e-12);
    }

    #[test]
    fn chi_negative_jump_uses_negative_profile() {
        let u = Path::Step(StepPath::scalar(0.0, &[(0.5, -2.0)]).unwrap());
        let x = chi(&u, &linear_profiles_d1()).unwrap();
        let mid = x.excursions()[0].eval(0.5, crate::paths::Side::Right).unwrap();
        assert!((mid[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_tie_gives_linear_excursion() {
        // d=2 with omega_1=(1,0), omega_2=(0,1); jump (1,1) is equidistant
        let sqrt2 = std::f64::consts::SQRT_2;
        let p1 = Profile::new(Path::Polyline(
            PolylinePath::linear(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(),
        ))
        .unwrap();
        let p2 = Profile::new(Path::Polyline(
            PolylinePath::linear(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap(),
        ))
        .unwrap();
        let u = Path::Step(
            StepPath::new(2, vec![0.0, 0.0], vec![(0.5, vec![sqrt2, sqrt2])]).unwrap(),
        );
        let x = chi(&u, &[p1, p2]).unwrap();
        let mid = x.excursions()[0].eval(0.5, crate::paths::Side::Right).unwrap();
        assert!((mid[0] - sqrt2 / 2.0).abs() < 1e-12);
        assert!((mid[1] - sqrt2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn embed_constant_path() {
        let w = StepPath::scalar(0.7, &[]).unwrap();
        let x = embed_step_trivial(&w, 4).unwrap();
        assert_eq!(x.times().len(), 3);
        for e in x.excursions() {
            assert_eq!(e.value_at_zero(), vec![0.7]);
            assert_eq!(e.value_at_one(), vec![0.7]);
        }
    }

    #[test]
    fn embed_rejects_off_grid_jump() {
        let w = StepPath::scalar(0.0, &[(0.3, 1.0)]).unwrap();
        assert!(embed_step_trivial(&w, 4).is_err());
    }

    #[test]
    fn embed_pi_e_matches_box_completed_graph() {
        let w = StepPath::scalar(0.0, &[(0.25, 1.0), (0.5, 0.4)]).unwrap();
        let x = embed_step_trivial(&w, 4).unwrap();
        let g1 = pi_e(&x).graph();
        let g2 = completed_graph(&Path::Step(w), Completion::Box);
        let d = metrics::hausdorff(&g1, &g2, 1e-3).unwrap();
        assert!(d.value <= d.error_bound);
    }

    #[test]
    fn d_fprime_kernel_and_reparametrization() {
        let w = StepPath::scalar(0.0, &[(0.25, 1.0), (0.75, 0.5)]).unwrap();
        let x = embed_step_trivial(&w, 4).unwrap();
        let r = d_fprime(&x, &x, 1e-3).unwrap();
        assert!(r.value <= r.error_bound);

        // same decoration with excursions run at a different speed
        let mut exc2 = Vec::new();
        for e in x.excursions() {
            let sp = match e {
                Path::Step(sp) => sp,
                _ => unreachable!(),
            };
            let jumps: Vec<(f64, Vec<f64>)> = sp
                .jumps()
                .iter()
                .map(|(t, v)| (t * 0.6, v.clone()))
                .collect();
            exc2.push(Path::Step(
                StepPath::new(1, sp.u0().to_vec(), jumps).unwrap(),
            ));
        }
        let y = Decorated::new(x.u().clone(), x.times().to_vec(), exc2).unwrap();
        let r = d_fprime(&x, &y, 1e-3).unwrap();
        assert!(r.value <= r.error_bound);
    }

    #[test]
    fn trivial_embed_vs_chi_linear_profile() {
        let w = StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap();
        let x = embed_step_trivial(&w, 2).unwrap();
        let y = chi(&Path::Step(w), &linear_profiles_d1()).unwrap();
        let r = d_fprime(&x, &y, 1e-3).unwrap();
        assert!(r.value <= r.error_bound, "value {}", r.value);
    }

    #[test]
    fn psi_of_monotone_embedding_is_u() {
        let w = StepPath::scalar(0.0, &[(0.25, 0.5), (0.5, 0.7), (0.75, 1.0)]).unwrap();
        let x = embed_step_trivial(&w, 4).unwrap();
        let psi = psi_max(&x).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert_eq!(
                psi.eval(t, crate::paths::Side::Right).unwrap(),
                w.eval(t, crate::paths::Side::Right).unwrap()
            );
        }
    }

    #[test]
    fn psi_sees_excursion_overshoot() {
        let p = geometric_profile(-1.0 / 9.0);
        let jump = 0.9;
        let e = jump_excursion(&[0.0], &[jump], &p);
        let u = Path::Step(StepPath::scalar(0.0, &[(0.5, jump)]).unwrap());
        let x = Decorated::new(u, vec![0.5], vec![e]).unwrap();
        let psi = psi_max(&x).unwrap();
        let v = psi.eval(0.7, crate::paths::Side::Right).unwrap()[0];
        assert!((v - jump * 10.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn psi_constant_path() {
        let x = Decorated::bare(Path::Step(StepPath::scalar(0.4, &[]).unwrap())).unwrap();
        let psi = psi_max(&x).unwrap();
        assert_eq!(psi.eval(0.9, crate::paths::Side::Right).unwrap(), vec![0.4]);
    }

    #[test]
    fn decorate_levy_preserves_jump_sizes() {
        use rand::SeedableRng;
        let m = crate::stable::SpectralMeasure::symmetric(0.75, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let l = m.sample_path(&mut rng, 50).unwrap();
        let x = decorate_levy(&l, &linear_profiles_d1()).unwrap();
        for (t, e) in x.times().iter().zip(x.excursions()) {
            let left = l.jumps.eval(*t, crate::paths::Side::Left).unwrap();
            let right = l.jumps.eval(*t, crate::paths::Side::Right).unwrap();
            let jump = dist(&right, &left);
            let span = dist(&e.value_at_one(), &e.value_at_zero());
            assert!((span - jump).abs() <= 1e-9 * (1.0 + jump));
        }
    }

    #[test]
    fn decorated_json_round_trip() {
        let w = StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap();
        let x = embed_step_trivial(&w, 2).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let y: Decorated = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn invalid_decorations_rejected() {
        let u = Path::Step(StepPath::scalar(0.0, &[(0.5, 1.0)]).unwrap());
        // missing excursion for the discontinuity
        assert!(Decorated::bare(u.clone()).is_err());
        // endpoint mismatch
        let bad = Path::Polyline(PolylinePath::linear(vec![0.0], vec![0.5]).unwrap());
        assert!(Decorated::new(u, vec![0.5], vec![bad]).is_err());
    }
}
