//! Reference first eigenvalue of the radial p-Laplacian on a ball by shooting.
//!
//! With `u(0) = 1` and `u'(0) = 0` the radial solution is integrated in the
//! flux variable `rho = r^(n-1) |u'|^(p-2) u'`:
//!
//! ```text
//! rho' = -lambda r^(n-1) |u|^(p-2) u
//! u'   = sign(rho) (|rho| / r^(n-1))^(1/(p-1))
//! ```
//!
//! The first zero of `u` moves inwards as `lambda` grows, so `lambda` is
//! bisected until the zero sits on `R`.

use crate::error::{Error, Result};
use crate::kernel::classical_bound;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct ShootingConfig<T> {
    /// Relative local error target of the Dormand-Prince stepper.
    pub rtol: T,
    /// Integration starts at `start_frac * R` from the series start.
    pub start_frac: T,
    /// Bisection stops once the bracket is this narrow relative to `lambda`.
    pub lambda_rel_tol: T,
    /// Accepted `|first zero - R| / R` at convergence.
    pub zero_tol: T,
    /// Largest `lambda * R^p` tried while bracketing.
    pub lambda_max_scaled: T,
    pub max_steps: usize,
}

impl<T: Real> Default for ShootingConfig<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        Self {
            rtol: T::lit(1e-12).max(eps * T::lit(100.0)),
            start_frac: T::lit(1e-6),
            lambda_rel_tol: T::lit(1e-13).max(eps * T::lit(64.0)),
            zero_tol: T::lit(1e-8).max(eps.sqrt()),
            lambda_max_scaled: T::lit(1e12),
            max_steps: 1_000_000,
        }
    }
}

/// One trial shot: `first_zero` is `None` when `u` stays positive up to the
/// integration cap of `2R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot<T> {
    pub lambda: T,
    pub first_zero: Option<T>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenRefResult<T> {
    pub lambda_ref: T,
    pub zero_radius_error: T,
    pub bisection_iterations: usize,
    pub ode_steps: usize,
    /// Every shot taken, bracketing included, in order.
    pub trace: Vec<Shot<T>>,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// fifth-order weights minus the embedded fourth-order ones
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

struct Radial<T> {
    p: T,
    n_minus_1: T,
    lambda: T,
}

impl<T: Real> Radial<T> {
    fn rhs(&self, r: T, y: [T; 2]) -> [T; 2] {
        let [u, rho] = y;
        let one = T::one();
        let rn1 = r.powf(self.n_minus_1);
        let du = if rho == T::zero() {
            T::zero()
        } else {
            rho.signum() * (rho.abs() / rn1).powf((self.p - one).recip())
        };
        let drho = -self.lambda * rn1 * u.abs().powf(self.p - T::lit(2.0)) * u;
        [du, drho]
    }

    /// One Dormand-Prince step; returns the fifth-order state and the
    /// embedded error estimate.
    fn step(&self, r: T, y: [T; 2], h: T) -> ([T; 2], [T; 2]) {
        let mut k = [[T::zero(); 2]; 7];
        k[0] = self.rhs(r, y);
        for s in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                let a = T::lit(A[s][j]);
                ys[0] = ys[0] + h * a * kj[0];
                ys[1] = ys[1] + h * a * kj[1];
            }
            k[s + 1] = self.rhs(r + T::lit(C[s]) * h, ys);
        }
        // the last stage is evaluated at the fifth-order solution itself
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = T::lit(A[5][j]);
            y_new[0] = y_new[0] + h * a * kj[0];
            y_new[1] = y_new[1] + h * a * kj[1];
        }
        let mut err = [T::zero(); 2];
        for (j, kj) in k.iter().enumerate() {
            err[0] = err[0] + h * T::lit(E[j]) * kj[0];
            err[1] = err[1] + h * T::lit(E[j]) * kj[1];
        }
        (y_new, err)
    }
}

/// Integrates the radial problem for a fixed `lambda` until `u` first vanishes
/// or `r` reaches `r_cap`.
pub fn first_zero<T: Real>(
    p: T,
    n: usize,
    lambda: T,
    radius: T,
    r_cap: T,
    cfg: &ShootingConfig<T>,
) -> Result<Shot<T>> {
    let one = T::one();
    let nf = T::from_count(n);
    let sys = Radial {
        p,
        n_minus_1: nf - one,
        lambda,
    };
    let p_conj = p / (p - one);
    let eps = cfg.start_frac * radius;
    let c = (lambda / nf).powf((p - one).recip()) / p_conj;
    let mut r = eps;
    let mut y = [one - c * eps.powf(p_conj), -lambda * eps.powf(nf) / nf];
    let mut h = eps;
    let mut steps = 0;
    let tiny = T::min_positive_value();
    while r < r_cap {
        if steps >= cfg.max_steps {
            return Err(Error::StepUnderflow { r: r.as_f64() });
        }
        if h < T::epsilon() * T::lit(16.0) * r {
            return Err(Error::StepUnderflow { r: r.as_f64() });
        }
        let h_try = h.min(r_cap - r);
        let (y_new, e) = sys.step(r, y, h_try);
        let su = cfg.rtol * (one.min(y[0].abs().max(y_new[0].abs())).max(T::lit(1e-3)));
        let sr = cfg.rtol * y[1].abs().max(y_new[1].abs()) + tiny;
        let err = (e[0].abs() / su).max(e[1].abs() / sr);
        if !err.is_finite() {
            h = h_try * T::lit(0.25);
            continue;
        }
        if err > one {
            h = h_try * (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
            continue;
        }
        steps += 1;
        if y_new[0] <= T::zero() {
            let zero = locate_zero(&sys, r, y, h_try);
            return Ok(Shot {
                lambda,
                first_zero: Some(zero),
                steps,
            });
        }
        r = r + h_try;
        y = y_new;
        let grow = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0))
        };
        h = h_try * grow;
    }
    Ok(Shot {
        lambda,
        first_zero: None,
        steps,
    })
}

/// Bisects the step length `theta` in `(0, h]` on the sign of `u` after a
/// single step from `(r, y)`.
fn locate_zero<T: Real>(sys: &Radial<T>, r: T, y: [T; 2], h: T) -> T {
    let (mut lo, mut hi) = (T::zero(), h);
    let half = T::lit(0.5);
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if sys.step(r, y, mid).0[0] > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    r + (lo + hi) * half
}

/// First Dirichlet eigenvalue of the p-Laplacian on the ball of radius `R`
/// in dimension `n` (the interval `(-R, R)` when `n = 1`).
pub fn reference_eigenvalue_ball<T: Real>(p: T, n: usize, radius: T) -> Result<EigenRefResult<T>> {
    reference_eigenvalue_ball_with(p, n, radius, &ShootingConfig::default())
}

pub fn reference_eigenvalue_ball_with<T: Real>(
    p: T,
    n: usize,
    radius: T,
    cfg: &ShootingConfig<T>,
) -> Result<EigenRefResult<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidParams(format!("requires p > 1 (got p = {p})")));
    }
    if n < 1 {
        return Err(Error::InvalidParams("requires n >= 1 (got n = 0)".into()));
    }
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::InvalidParams(format!("requires R > 0 (got R = {radius})")));
    }
    let nf = T::from_count(n);
    let r_cap = radius * T::lit(2.0);
    let scale = radius.powf(-p);
    let lambda_max = cfg.lambda_max_scaled * scale;
    let (mut lo, mut hi) = if p > nf && n >= 2 {
        let classical = classical_bound(p, n, radius)?;
        (
            T::lit(0.5) * classical,
            T::lit(4.0) * classical * (p / (p - nf)).powf(p),
        )
    } else {
        (T::lit(0.5) * scale, T::lit(8.0) * scale)
    };
    hi = hi.min(lambda_max);

    let mut trace = Vec::new();
    let shoot = |lambda: T, trace: &mut Vec<Shot<T>>| -> Result<Shot<T>> {
        let shot = first_zero(p, n, lambda, radius, r_cap, cfg)?;
        trace.push(shot);
        Ok(shot)
    };
    let overshoots = |s: &Shot<T>| s.first_zero.is_some_and(|z| z < radius);

    // Widen until lo undershoots and hi overshoots.
    let floor = lambda_max * T::lit(1e-30);
    while overshoots(&shoot(lo, &mut trace)?) {
        hi = lo;
        lo = lo * T::lit(0.25);
        if lo < floor {
            return Err(Error::NoBracket {
                lambda_max: lambda_max.as_f64(),
            });
        }
    }
    while !overshoots(&shoot(hi, &mut trace)?) {
        lo = hi;
        if hi >= lambda_max {
            return Err(Error::NoBracket {
                lambda_max: lambda_max.as_f64(),
            });
        }
        hi = (hi * T::lit(4.0)).min(lambda_max);
    }

    let mut iterations = 0;
    while hi - lo > cfg.lambda_rel_tol * hi {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if overshoots(&shoot(mid, &mut trace)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda_ref = (lo + hi) * T::lit(0.5);
    let last = shoot(lambda_ref, &mut trace)?;
    let zero = last.first_zero.ok_or_else(|| {
        Error::Optimizer(format!("converged lambda = {lambda_ref} has no zero below 2R"))
    })?;
    let zero_radius_error = (zero - radius).abs();
    if zero_radius_error > cfg.zero_tol * radius {
        return Err(Error::Optimizer(format!(
            "shooting mismatch {zero_radius_error} at R = {radius} exceeds tolerance"
        )));
    }
    let ode_steps = trace.iter().map(|s| s.steps).sum();
    Ok(EigenRefResult {
        lambda_ref,
        zero_radius_error,
        bisection_iterations: iterations,
        ode_steps,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eigen_1d_closed_form;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// First zero of J0 from its power series, by bisection on [2, 3].
    fn j0_first_zero() -> f64 {
        let j0 = |x: f64| {
            let q = -(x * x) / 4.0;
            let (mut term, mut sum) = (1.0, 1.0);
            for k in 1..60 {
                term *= q / (k as f64 * k as f64);
                sum += term;
            }
            sum
        };
        let (mut a, mut b) = (2.0, 3.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if j0(a) * j0(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn bessel_zero_oracle_is_sane() {
        assert!((j0_first_zero() - 2.404_825_557_695_773).abs() < 1e-13);
    }

    #[test]
    fn disc_matches_bessel_zero() {
        let res = reference_eigenvalue_ball(2.0, 2, 1.0).unwrap();
        let j = j0_first_zero();
        assert!(rel(res.lambda_ref, j * j) < 1e-9, "{}", res.lambda_ref);
    }

    #[test]
    fn three_ball_gives_pi_squared() {
        let res = reference_eigenvalue_ball(2.0, 3, 1.0).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(rel(res.lambda_ref, pi2) < 1e-9, "{}", res.lambda_ref);
    }

    #[test]
    fn interval_matches_closed_form() {
        for p in [1.5, 3.0, 5.0] {
            let res = reference_eigenvalue_ball(p, 1, 1.0).unwrap();
            let exact = eigen_1d_closed_form(p).unwrap();
            assert!(rel(res.lambda_ref, exact) < 1e-8, "p={p}: {} vs {exact}", res.lambda_ref);
        }
    }

    #[test]
    fn scaling_law() {
        let one = reference_eigenvalue_ball(3.0, 2, 1.0).unwrap().lambda_ref;
        for r in [0.5, 2.0] {
            let lr = reference_eigenvalue_ball(3.0, 2, r).unwrap().lambda_ref;
            assert!(rel(lr, one * r.powf(-3.0)) < 1e-10);
        }
    }

    #[test]
    fn zero_radius_decreases_with_lambda() {
        let res = reference_eigenvalue_ball(4.0, 2, 1.0).unwrap();
        let mut with_zero: Vec<(f64, f64)> = res
            .trace
            .iter()
            .filter_map(|s| s.first_zero.map(|z| (s.lambda, z)))
            .collect();
        with_zero.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in with_zero.windows(2) {
            if w[1].0 > w[0].0 {
                assert!(w[1].1 < w[0].1, "{w:?}");
            }
        }
        // every shot without a zero lies below every shot with one
        let min_hit = with_zero.first().unwrap().0;
        assert!(res
            .trace
            .iter()
            .filter(|s| s.first_zero.is_none())
            .all(|s| s.lambda < min_hit));
    }

    #[test]
    fn diagnostics_are_filled() {
        let res = reference_eigenvalue_ball(2.5, 2, 1.0).unwrap();
        assert!(res.lambda_ref > 0.0);
        assert!(res.zero_radius_error <= 1e-8);
        assert!(res.bisection_iterations > 10);
        assert!(res.ode_steps > res.bisection_iterations);
    }

    #[test]
    fn tiny_lambda_cap_reports_no_bracket() {
        let cfg = ShootingConfig {
            lambda_max_scaled: 1.0,
            ..ShootingConfig::default()
        };
        let err = reference_eigenvalue_ball_with(6.0, 2, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }), "{err:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(reference_eigenvalue_ball(1.0, 2, 1.0).is_err());
        assert!(reference_eigenvalue_ball(2.0, 0, 1.0).is_err());
        assert!(reference_eigenvalue_ball(2.0, 2, 0.0).is_err());
    }

    #[test]
    fn f32_disc() {
        let res = reference_eigenvalue_ball(2.0f32, 2, 1.0).unwrap();
        assert!((res.lambda_ref - 5.783_186).abs() < 1e-3);
    }
}
