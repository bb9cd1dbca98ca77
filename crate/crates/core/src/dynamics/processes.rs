//! Normalized partial-sum processes along orbits: W_n (direct sums), W_n^V
//! (induced sums), U_n (induced sums placed at true return times), lap
//! numbers, the main-hypothesis statistic, and the profile-residual check.

use rand::Rng;

use crate::dynamics::orbit::ExactOrbit;
use crate::dynamics::{zeta_path, InducedScheme};
use crate::error::{Error, Result};
use crate::metrics::discrete_frechet;
use crate::paths::{dedup_consecutive, StepPath};

/// W_n(t) = b_n^{-1} sum_{j < [nt]} v(T^j x): step path with jumps at j/n,
/// plus the return times (j >= 1 with T^j x in X) for lap-number bookkeeping.
pub fn wn_path(scheme: &InducedScheme, x0: f64, n: u64) -> Result<(StepPath, Vec<u64>)> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let mut orbit = ExactOrbit::float(x0, scheme.map);
    wn_path_from(scheme, &mut orbit, n, &mut rand::rngs::mock::StepRng::new(0, 0))
}

/// Exact-orbit variant of [`wn_path`].
pub fn wn_path_from<R: Rng>(
    scheme: &InducedScheme,
    orbit: &mut ExactOrbit,
    n: u64,
    rng: &mut R,
) -> Result<(StepPath, Vec<u64>)> {
    let d = scheme.dim();
    let binv = 1.0 / scheme.bn(n);
    let mut acc = vec![0.0; d];
    let mut step = vec![0.0; d];
    let mut jumps = Vec::with_capacity(n as usize);
    let mut returns = Vec::new();
    for j in 1..=n {
        scheme.observable.eval_into(orbit.x(), &mut step);
        for k in 0..d {
            acc[k] += step[k];
        }
        orbit.step(rng)?;
        if orbit.in_x(scheme) {
            returns.push(j);
        }
        jumps.push((j as f64 / n as f64, acc.iter().map(|a| a * binv).collect()));
    }
    Ok((StepPath::new(d, vec![0.0; d], jumps)?, returns))
}

/// W_n(1) only: the normalized Birkhoff sum, no path allocation.
pub fn wn_value_at_one<R: Rng>(
    scheme: &InducedScheme,
    orbit: &mut ExactOrbit,
    n: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = scheme.dim();
    let binv = 1.0 / scheme.bn(n);
    let mut acc = vec![0.0; d];
    let mut step = vec![0.0; d];
    for _ in 0..n {
        scheme.observable.eval_into(orbit.x(), &mut step);
        for k in 0..d {
            acc[k] += step[k];
        }
        orbit.step(rng)?;
    }
    for a in acc.iter_mut() {
        *a *= binv;
    }
    Ok(acc)
}

/// W_n^V(t) = b_n^{-1} sum_{k < [nt]} V(f^k x): induced-sum step path.
pub fn wnv_path(scheme: &InducedScheme, x0: f64, n: u64) -> Result<StepPath> {
    if !scheme.contains(x0) {
        return Err(Error::domain("x0 must lie in the inducing set"));
    }
    let d = scheme.dim();
    let binv = 1.0 / scheme.bn(n);
    let mut x = x0;
    let mut acc = vec![0.0; d];
    let mut jumps = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let o = scheme.induced_observable(x)?;
        for (a, v) in acc.iter_mut().zip(&o.v) {
            *a += v;
        }
        x = *scheme.first_return(x)?.1.last().unwrap();
        jumps.push((k as f64 / n as f64, acc.iter().map(|a| a * binv).collect()));
    }
    Ok(StepPath::new(d, vec![0.0; d], jumps)?)
}

/// U_n with its jump times and the lap-number sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct UnPath {
    pub path: StepPath,
    /// N_k for k = 0..=n: number of completed returns within k iterates.
    pub lap: Vec<u32>,
    /// Jump times t_{n,j} = (R_1 + ... + R_j)/n.
    pub times: Vec<f64>,
}

/// U_n(t) = b_n^{-1} sum_{k < N_[nt]} V(f^k x), jumps exactly at the
/// normalized return times.
pub fn un_path(scheme: &InducedScheme, x0: f64, n: u64) -> Result<UnPath> {
    let mut orbit = ExactOrbit::float(x0, scheme.map);
    un_path_from(scheme, &mut orbit, n, &mut rand::rngs::mock::StepRng::new(0, 0))
}

/// Exact-orbit variant of [`un_path`]; the orbit must start in X.
pub fn un_path_from<R: Rng>(
    scheme: &InducedScheme,
    orbit: &mut ExactOrbit,
    n: u64,
    rng: &mut R,
) -> Result<UnPath> {
    if !orbit.in_x(scheme) {
        return Err(Error::domain("orbit must start in the inducing set"));
    }
    let d = scheme.dim();
    let binv = 1.0 / scheme.bn(n);
    let mut acc = vec![0.0; d];
    let mut vcur = vec![0.0; d];
    let mut step = vec![0.0; d];
    let mut jumps = Vec::new();
    let mut times = Vec::new();
    let mut lap = Vec::with_capacity(n as usize + 1);
    lap.push(0u32);
    let mut returns = 0u32;
    for k in 1..=n {
        scheme.observable.eval_into(orbit.x(), &mut step);
        for (c, s) in vcur.iter_mut().zip(&step) {
            *c += s;
        }
        orbit.step(rng)?;
        if orbit.in_x(scheme) {
            returns += 1;
            for (a, c) in acc.iter_mut().zip(&vcur) {
                *a += c;
            }
            vcur.iter_mut().for_each(|c| *c = 0.0);
            let t = k as f64 / n as f64;
            times.push(t);
            jumps.push((t, acc.iter().map(|a| a * binv).collect()));
        }
        lap.push(returns);
    }
    Ok(UnPath {
        path: StepPath::new(d, vec![0.0; d], jumps)?,
        lap,
        times,
    })
}

/// Per-return summary along an exact orbit (d = 1 schemes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnRecord {
    pub r: u64,
    pub v: f64,
    /// Extremes of the partial sums v_l within the excursion.
    pub min: f64,
    pub max: f64,
}

/// Collect every completed return within `n` iterates of an exact orbit
/// started in X.
pub fn collect_returns<R: Rng>(
    scheme: &InducedScheme,
    orbit: &mut ExactOrbit,
    n: u64,
    rng: &mut R,
) -> Result<Vec<ReturnRecord>> {
    if scheme.dim() != 1 {
        return Err(Error::domain("collect_returns is scalar-only"));
    }
    let mut out = Vec::new();
    let mut sum = 0.0f64;
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    let mut r = 0u64;
    for _ in 0..n {
        sum += scheme.observable.eval1(orbit.x());
        lo = lo.min(sum);
        hi = hi.max(sum);
        r += 1;
        orbit.step(rng)?;
        if orbit.in_x(scheme) {
            out.push(ReturnRecord {
                r,
                v: sum,
                min: lo,
                max: hi,
            });
            sum = 0.0;
            lo = 0.0;
            hi = 0.0;
            r = 0;
        }
    }
    Ok(out)
}

/// One realization of the main-hypothesis statistic
/// b_n^{-1} max_{0 <= j <= n} d_D~(xi, zeta) o f^j along an exact orbit.
pub fn hypothesis_main_stat<R: Rng>(
    scheme: &InducedScheme,
    n: u64,
    rng: &mut R,
) -> Result<f64> {
    if scheme.dim() != 1 {
        return Err(Error::domain("hypothesis statistic is scalar-only"));
    }
    let mut orbit = ExactOrbit::random_in_x(scheme, rng);
    let mut worst = 0.0f64;
    let mut partial: Vec<Vec<f64>> = Vec::new();
    for _ in 0..=n {
        partial.clear();
        partial.push(vec![0.0]);
        let mut sum = 0.0f64;
        loop {
            sum += scheme.observable.eval1(orbit.x());
            partial.push(vec![sum]);
            orbit.step(rng)?;
            if orbit.in_x(scheme) {
                break;
            }
            if partial.len() as u64 > scheme.return_cap {
                return Err(Error::NonReturn {
                    cap: scheme.return_cap,
                });
            }
        }
        let zeta = zeta_path(&[sum], &scheme.profiles);
        let a = dedup_consecutive(std::mem::take(&mut partial));
        let b = dedup_consecutive(zeta.value_seq());
        worst = worst.max(discrete_frechet(&a, &b));
        partial = a;
    }
    Ok(worst / scheme.bn(n))
}

/// Residual of the profile decomposition: max_{l <= R} |v_l − λ P(l/R) R|
/// for the profile selected by the jump direction; returns (residual, R).
pub fn vl_residual(
    scheme: &InducedScheme,
    x: f64,
    lambdas: &[f64],
) -> Result<(f64, u64)> {
    if scheme.dim() != 1 {
        return Err(Error::domain("vl_residual is scalar-only"));
    }
    if lambdas.len() != scheme.profiles.len() {
        return Err(Error::domain("one lambda per profile required"));
    }
    let o = scheme.induced_observable(x)?;
    let p = crate::fprime::nearest_profile(&o.v, &scheme.profiles);
    if p.is_zero() {
        // unclassified branch: report the raw sup as the residual
        let worst = o
            .xi
            .value_seq()
            .iter()
            .map(|v| v[0].abs())
            .fold(0.0f64, f64::max);
        return Ok((worst, o.r));
    }
    let idx = scheme
        .profiles
        .iter()
        .position(|q| q.omega() == p.omega())
        .expect("profile came from the scheme");
    let lambda = lambdas[idx];
    let r = o.r as f64;
    let mut worst = 0.0f64;
    for (l, val) in o.xi.value_seq().iter().enumerate() {
        let t = l as f64 / r;
        let pred = lambda
            * p.path()
                .eval(t, crate::paths::Side::Right)
                .expect("profile defined on [0,1]")[0]
            * r;
        worst = worst.max((val[0] - pred).abs());
    }
    Ok((worst, o.r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::Side;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wn_replays_direct_sums() {
        let s = InducedScheme::lsv(1.5).unwrap();
        let n = 50;
        let (w, _) = wn_path(&s, 0.7, n).unwrap();
        let orbit = s.map.iterate(0.7, n as usize - 1).unwrap();
        let binv = 1.0 / s.bn(n);
        let mut sum = 0.0;
        for j in 1..=n {
            sum += s.observable.eval1(orbit[j as usize - 1]);
            let got = w.eval(j as f64 / n as f64, Side::Right).unwrap()[0];
            assert!((got - binv * sum).abs() < 1e-12);
        }
    }

    #[test]
    fn wn_of_n_equal_one_is_zero_before_one() {
        let s = InducedScheme::lsv(1.5).unwrap();
        let (w, _) = wn_path(&s, 0.7, 1).unwrap();
        assert_eq!(w.eval(0.5, Side::Right).unwrap(), vec![0.0]);
    }

    #[test]
    fn un_matches_wn_at_jump_times() {
        let s = InducedScheme::doubling(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 400;
        let mut o1 = ExactOrbit::random_in_x(&s, &mut rng);
        let mut o2 = o1.clone();
        let mut rng2 = rng.clone();
        let u = un_path_from(&s, &mut o1, n, &mut rng).unwrap();
        let (w, _) = wn_path_from(&s, &mut o2, n, &mut rng2).unwrap();
        for t in &u.times {
            let a = u.path.eval(*t, Side::Right).unwrap()[0];
            let b = w.eval(*t, Side::Right).unwrap()[0];
            assert!((a - b).abs() < 1e-9, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn lap_numbers_count_returns() {
        let s = InducedScheme::doubling(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut o = ExactOrbit::random_in_x(&s, &mut rng);
        let n = 1000;
        let u = un_path_from(&s, &mut o, n, &mut rng).unwrap();
        assert_eq!(u.lap.len(), n as usize + 1);
        assert_eq!(*u.lap.last().unwrap() as usize, u.times.len());
        assert!(u.lap.windows(2).all(|w| w[1] >= w[0]));
        // Kac: roughly half the iterates are returns
        let frac = u.times.len() as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.1, "return fraction {frac}");
    }

    #[test]
    fn collect_returns_consistency() {
        let s = InducedScheme::doubling(0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut o = ExactOrbit::random_in_x(&s, &mut rng);
        let recs = collect_returns(&s, &mut o, 10_000, &mut rng).unwrap();
        assert!(!recs.is_empty());
        for rec in &recs {
            assert!(rec.min <= 0.0 && rec.max >= rec.min);
            assert!(rec.min <= rec.v && rec.v <= rec.max);
            assert!(rec.r >= 1);
        }
        let mean_r: f64 =
            recs.iter().map(|r| r.r as f64).sum::<f64>() / recs.len() as f64;
        assert!((mean_r - 2.0).abs() < 0.2, "mean return time {mean_r}");
    }

    #[test]
    fn hypothesis_stat_finite_and_positive() {
        let s = InducedScheme::doubling(0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let stat = hypothesis_main_stat(&s, 200, &mut rng).unwrap();
        assert!(stat.is_finite() && stat >= 0.0);
    }

    #[test]
    fn vl_residual_bounded_for_doubling() {
        // Example 6.1: V = (c^{-1}-1)^{-1}(x-1/2)^{-1/alpha} + O(1), and the
        // partial sums track the geometric profile with lambda = (1-c)^{-1}
        // after normalizing by R... here we check the surrogate with the
        // scheme's own profile: residual stays o(V) for large R.
        let s = InducedScheme::doubling(0.5).unwrap();
        let lambdas = [1.0, 1.0];
        for k in 8..14u32 {
            let x = 0.5 + 0.75 * 0.5f64.powi(k as i32);
            let o = s.induced_observable(x).unwrap();
            let (res, r) = vl_residual(&s, x, &lambdas).unwrap();
            assert_eq!(r, o.r);
            assert!(res.is_finite());
        }
    }

    #[test]
    fn wnv_accumulates_induced_sums() {
        let s = InducedScheme::doubling(0.5).unwrap();
        let w = wnv_path(&s, 0.6, 5).unwrap();
        let binv = 1.0 / s.bn(5);
        let mut x = 0.6;
        let mut sum = 0.0;
        for k in 1..=5u64 {
            let o = s.induced_observable(x).unwrap();
            sum += o.v[0];
            x = *s.first_return(x).unwrap().1.last().unwrap();
            let got = w.eval(k as f64 / 5.0, Side::Right).unwrap()[0];
            assert!((got - binv * sum).abs() < 1e-12);
        }
    }
}
