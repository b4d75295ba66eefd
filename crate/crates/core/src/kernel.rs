//! Closed-form radial ingredients of the logarithmically corrected Hardy
//! inequality: the barrier `phi`, the supersolution `w`, the forcing `G`, the
//! Poisson source `h` and the resulting Hardy weight.
//!
//! Everything is evaluated from a validated [`ProblemParams`], which carries
//! the derived constants
//!
//! * `kappa = (p - beta) / (p - 1)`,
//! * `p' = p / (p - 1)`,
//! * `x0`, the positive root of `1 - x - |b| x^2`,
//! * `phi_max = R^kappa`.
//!
//! Three printed constants are replaced by their derivation-consistent forms:
//! the Poisson source uses `kappa^(p-1) (n - beta)`, the first weight term
//! divides by `phi^p`, and the logarithmic bracket is always `1 - x - |b| x^2`
//! with `x = 1 / (1 + ln S - ln phi)`.

use crate::error::{Error, Result};
use crate::scalar::{one_minus_pow_from_gap, Real};

/// How the normalization `S` of the logarithm is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SPolicy<T> {
    /// `S = R^kappa * exp(1/x0)`; keeps `x < x0 / (1 + x0)` on the whole ball.
    #[default]
    Default,
    Explicit(T),
}

/// Unvalidated parameter tuple as it arrives from a caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams<T> {
    pub p: T,
    pub n: usize,
    pub beta: T,
    pub radius: T,
    /// `None` selects [`default_b`].
    pub b: Option<T>,
    pub s: SPolicy<T>,
}

impl<T: Real> RawParams<T> {
    pub fn new(p: T, n: usize, beta: T, radius: T) -> Self {
        RawParams {
            p,
            n,
            beta,
            radius,
            b: None,
            s: SPolicy::Default,
        }
    }

    pub fn with_b(mut self, b: T) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_s(mut self, s: SPolicy<T>) -> Self {
        self.s = s;
        self
    }
}

/// Validated parameters together with all derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams<T> {
    p: T,
    n: usize,
    beta: T,
    radius: T,
    b: T,
    s: T,
    s_policy: SPolicy<T>,
    kappa: T,
    p_conj: T,
    x0: T,
    phi_max: T,
    ln_s: T,
}

/// `-(p - 2) / (6 (p - 1))`; admissible `b` lie strictly below it.
pub fn b_threshold<T: Real>(p: T) -> T {
    -(p - T::lit(2.0)) / (T::lit(6.0) * (p - T::one()))
}

/// `b` used when the caller gives none: `min(threshold, 0) - 0.1`.
pub fn default_b<T: Real>(p: T) -> T {
    b_threshold(p).min(T::zero()) - T::lit(0.1)
}

/// Positive root of `1 - x - |b| x^2`.
pub fn positive_root_x0<T: Real>(b: T) -> T {
    let bb = b.abs();
    if bb.is_zero() {
        return T::one();
    }
    let four = T::lit(4.0);
    // 2 / (1 + sqrt(1 + 4|b|)) is the cancellation-free form of (sqrt(1+4|b|) - 1) / (2|b|).
    T::lit(2.0) / (T::one() + (T::one() + four * bb).sqrt())
}

/// Checks every hypothesis and computes the derived constants.
pub fn validate<T: Real>(raw: RawParams<T>) -> Result<ProblemParams<T>> {
    let RawParams {
        p,
        n,
        beta,
        radius,
        b,
        s,
    } = raw;
    let finite = |name: &str, v: T| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{name} must be finite (got {v})")))
        }
    };
    finite("p", p)?;
    finite("beta", beta)?;
    finite("R", radius)?;
    if p <= T::one() {
        return Err(Error::InvalidParams(format!("requires p > 1 (got p = {p})")));
    }
    if n < 1 {
        return Err(Error::InvalidParams("requires n >= 1 (got n = 0)".into()));
    }
    let nf = T::from_count(n);
    if !(beta > T::one() && beta < nf) {
        return Err(Error::InvalidParams(format!(
            "requires beta in (1, n) = (1, {n}) (got beta = {beta})"
        )));
    }
    if beta >= p {
        // kappa = (p - beta)/(p - 1) must be positive for phi to be positive
        return Err(Error::InvalidParams(format!(
            "requires beta < p so that kappa > 0 (got beta = {beta}, p = {p})"
        )));
    }
    if radius <= T::zero() {
        return Err(Error::InvalidParams(format!("requires R > 0 (got R = {radius})")));
    }
    let b = b.unwrap_or_else(|| default_b(p));
    finite("b", b)?;
    let threshold = b_threshold(p);
    if b >= threshold {
        return Err(Error::InvalidParams(format!(
            "b above threshold: requires b < -(p-2)/(6(p-1)) = {threshold} (got b = {b})"
        )));
    }
    if b >= T::zero() {
        return Err(Error::InvalidParams(format!("requires b < 0 (got b = {b})")));
    }

    let kappa = (p - beta) / (p - T::one());
    let p_conj = p / (p - T::one());
    let x0 = positive_root_x0(b);
    let phi_max = radius.powf(kappa);
    let s_min = phi_max * (x0.recip() - T::one()).exp();
    let s_value = match s {
        SPolicy::Default => phi_max * x0.recip().exp(),
        SPolicy::Explicit(v) => {
            finite("S", v)?;
            if v <= s_min {
                return Err(Error::InvalidParams(format!(
                    "requires S > R^kappa * exp(1/x0 - 1) = {s_min} so that w stays positive (got S = {v})"
                )));
            }
            v
        }
    };

    Ok(ProblemParams {
        p,
        n,
        beta,
        radius,
        b,
        s: s_value,
        s_policy: s,
        kappa,
        p_conj,
        x0,
        phi_max,
        ln_s: s_value.ln(),
    })
}

impl<T: Real> ProblemParams<T> {
    pub fn new(p: T, n: usize, beta: T, radius: T) -> Result<Self> {
        validate(RawParams::new(p, n, beta, radius))
    }

    /// Same problem with a different `beta`, re-deriving every constant
    /// (including the default `S`, which depends on `kappa`).
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        let mut raw = self.raw();
        raw.beta = beta;
        validate(raw)
    }

    pub fn raw(&self) -> RawParams<T> {
        RawParams {
            p: self.p,
            n: self.n,
            beta: self.beta,
            radius: self.radius,
            b: Some(self.b),
            s: self.s_policy,
        }
    }

    pub fn p(&self) -> T {
        self.p
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> T {
        T::from_count(self.n)
    }
    pub fn beta(&self) -> T {
        self.beta
    }
    pub fn radius(&self) -> T {
        self.radius
    }
    pub fn b(&self) -> T {
        self.b
    }
    pub fn s(&self) -> T {
        self.s
    }
    pub fn s_policy(&self) -> SPolicy<T> {
        self.s_policy
    }
    pub fn kappa(&self) -> T {
        self.kappa
    }
    pub fn p_conj(&self) -> T {
        self.p_conj
    }
    pub fn x0(&self) -> T {
        self.x0
    }
    pub fn phi_max(&self) -> T {
        self.phi_max
    }
    pub fn ln_s(&self) -> T {
        self.ln_s
    }

    fn check_closed_radius(&self, r: T) -> Result<()> {
        if r >= T::zero() && r <= self.radius {
            Ok(())
        } else {
            Err(Error::Domain(format!("r = {r} outside [0, R = {}]", self.radius)))
        }
    }

    fn check_open_radius(&self, r: T) -> Result<()> {
        if r > T::zero() && r < self.radius {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "r = {r} outside the open interval (0, R = {}); the weight is singular at both ends",
                self.radius
            )))
        }
    }

    /// `phi(r) = R^kappa - r^kappa`.
    pub fn phi(&self, r: T) -> Result<T> {
        self.check_closed_radius(r)?;
        if r == self.radius {
            return Ok(T::zero());
        }
        Ok(self.phi_max - r.powf(self.kappa))
    }

    /// `phi` at `r = R - gap`, without cancellation for small gaps.
    #[inline]
    pub(crate) fn phi_gap(&self, r: T, gap: T) -> T {
        self.phi_max * one_minus_pow_from_gap(r / self.radius, gap, self.radius, self.kappa)
    }

    /// `phi'(r) = -kappa r^(kappa - 1)`.
    pub fn phi_prime(&self, r: T) -> Result<T> {
        if r <= T::zero() || r > self.radius {
            return Err(Error::Domain(format!(
                "phi' needs r in (0, R = {}] (got r = {r}); it is unbounded at the origin",
                self.radius
            )));
        }
        Ok(self.phi_prime_unchecked(r))
    }

    #[inline]
    pub(crate) fn phi_prime_unchecked(&self, r: T) -> T {
        -self.kappa * r.powf(self.kappa - T::one())
    }

    /// `x(t) = 1 / (1 + ln S - t)`.
    #[inline]
    pub fn x_of_t(&self, t: T) -> T {
        (T::one() + self.ln_s - t).recip()
    }

    /// Inverse of [`Self::x_of_t`].
    #[inline]
    pub fn t_of_x(&self, x: T) -> T {
        T::one() + self.ln_s - x.recip()
    }

    /// Largest `x` reached on the ball, attained where `phi = phi_max`.
    pub fn x_reach(&self) -> T {
        self.x_of_t(self.phi_max.ln())
    }

    /// Supremum of admissible `t`: `1 + ln S - 1/x0`.
    pub fn t_admissible_bound(&self) -> T {
        self.t_of_x(self.x0)
    }

    fn check_w_domain(&self, t: T) -> Result<T> {
        if t.is_nan() || t >= self.t_admissible_bound() {
            return Err(Error::Domain(format!(
                "w nonpositive: S too small for this phi range (t = {t} >= {})",
                self.t_admissible_bound()
            )));
        }
        Ok(self.x_of_t(t))
    }

    #[inline]
    fn w_scale(&self) -> T {
        self.p_conj.recip().powf(self.p - T::one())
    }

    /// `w(t) = (1/p')^(p-1) (1 - x + b x^2)`.
    pub fn w_log(&self, t: T) -> Result<T> {
        let x = self.check_w_domain(t)?;
        Ok(self.w_at_x(x))
    }

    /// `w'(t) = (1/p')^(p-1) (-x^2 + 2 b x^3)`, using `dx/dt = x^2`.
    pub fn w_log_prime(&self, t: T) -> Result<T> {
        let x = self.check_w_domain(t)?;
        Ok(self.w_prime_at_x(x))
    }

    #[inline]
    pub(crate) fn w_at_x(&self, x: T) -> T {
        self.w_scale() * (T::one() - x + self.b * x * x)
    }

    #[inline]
    pub(crate) fn w_prime_at_x(&self, x: T) -> T {
        let x2 = x * x;
        self.w_scale() * (-x2 + T::lit(2.0) * self.b * x2 * x)
    }

    /// `G(t) = (1/p')^p (1 + p / (2(p-1)) x^2)`.
    pub fn g_forcing(&self, t: T) -> Result<T> {
        if t.is_nan() || t >= T::one() + self.ln_s {
            return Err(Error::Domain(format!(
                "G needs t < 1 + ln S = {} (got t = {t})",
                T::one() + self.ln_s
            )));
        }
        Ok(self.g_at_x(self.x_of_t(t)))
    }

    #[inline]
    pub(crate) fn g_at_x(&self, x: T) -> T {
        let c = self.p / (T::lit(2.0) * (self.p - T::one()));
        self.p_conj.recip().powf(self.p) * (T::one() + c * x * x)
    }

    /// `-w' + (p-1) w - (p-1) w^(p') - G`, nonnegative where the
    /// supersolution inequality holds.
    pub fn lemma2_residual(&self, t: T) -> Result<T> {
        if self.p < T::lit(2.0) {
            return Err(Error::Domain(format!(
                "the supersolution residual needs p >= 2 (got p = {})",
                self.p
            )));
        }
        let x = self.check_w_domain(t)?;
        Ok(self.residual_at_x(x))
    }

    pub(crate) fn residual_at_x(&self, x: T) -> T {
        let pm1 = self.p - T::one();
        let w = self.w_at_x(x);
        -self.w_prime_at_x(x) + pm1 * w - pm1 * w.powf(self.p_conj) - self.g_at_x(x)
    }

    /// Scans the residual on `points` equally spaced `x` in `[x_lo, x_hi]`.
    pub fn lemma2_scan(&self, x_lo: T, x_hi: T, points: usize) -> Result<ResidualScan<T>> {
        if !(x_lo > T::zero() && x_hi < self.x0 && x_lo <= x_hi) || points < 2 {
            return Err(Error::Domain(format!(
                "scan range [{x_lo}, {x_hi}] must lie in (0, x0 = {}) with at least 2 points",
                self.x0
            )));
        }
        let step = (x_hi - x_lo) / T::from_count(points - 1);
        let mut scan = ResidualScan {
            x_lo,
            x_hi,
            points,
            min_residual: T::infinity(),
            argmin_x: x_lo,
            first_negative_x: None,
        };
        for i in 0..points {
            let x = if i + 1 == points {
                x_hi
            } else {
                x_lo + step * T::from_count(i)
            };
            let t = self.t_of_x(x);
            let res = self.lemma2_residual(t)?;
            if res < scan.min_residual {
                scan.min_residual = res;
                scan.argmin_x = x;
            }
            if res < T::zero() && scan.first_negative_x.is_none() {
                scan.first_negative_x = Some(x);
            }
        }
        Ok(scan)
    }

    /// Radial source `h(r) = kappa^(p-1) (n - beta) r^(-beta)`, for which `phi`
    /// solves `-Delta_p phi = h` with `phi(R) = 0`.
    pub fn h_source(&self, r: T) -> Result<T> {
        if r <= T::zero() {
            return Err(Error::Domain(format!("h needs r > 0 (got r = {r})")));
        }
        Ok(self.h_source_unchecked(r))
    }

    #[inline]
    pub(crate) fn h_source_unchecked(&self, r: T) -> T {
        self.kappa.powf(self.p - T::one()) * (self.dim() - self.beta) * r.powf(-self.beta)
    }

    /// Source with the constant `kappa (n - beta)` in place of
    /// `kappa^(p-1) (n - beta)`; it only solves the Poisson problem for `p = 2`.
    pub fn h_source_printed(&self, r: T) -> Result<T> {
        if r <= T::zero() {
            return Err(Error::Domain(format!("h needs r > 0 (got r = {r})")));
        }
        Ok(self.kappa * (self.dim() - self.beta) * r.powf(-self.beta))
    }

    /// The Hardy weight `v(r)` in closed radial form.
    pub fn hardy_kernel(&self, r: T) -> Result<T> {
        self.check_open_radius(r)?;
        Ok(self.kernel_closed(r, self.phi_max - r.powf(self.kappa)))
    }

    /// Closed form with `phi` supplied by the caller (gap-accurate near `R`).
    pub(crate) fn kernel_closed(&self, r: T, phi: T) -> T {
        let one = T::one();
        let p = self.p;
        let pm1 = p - one;
        let base = (p - self.beta) / p;
        let x = (one + (self.s / phi).ln()).recip();
        let first = base.powf(p)
            * r.powf(-(self.beta - one) * p / pm1)
            * phi.powf(-p)
            * (one + p / (T::lit(2.0) * pm1) * x * x);
        let second = base.powf(pm1)
            * (self.dim() - self.beta)
            * r.powf(-self.beta)
            * phi.powf(-pm1)
            * (one - x + self.b * x * x);
        first + second
    }

    /// The same weight assembled from its ingredients,
    /// `|phi'/phi|^p G(ln phi) + h phi^(1-p) w(ln phi)`.
    pub fn hardy_kernel_compositional(&self, r: T) -> Result<T> {
        self.check_open_radius(r)?;
        let phi = self.phi_max - r.powf(self.kappa);
        self.kernel_compositional(r, phi)
    }

    pub(crate) fn kernel_compositional(&self, r: T, phi: T) -> Result<T> {
        let t = phi.ln();
        let ratio = (self.phi_prime_unchecked(r) / phi).abs().powf(self.p);
        let h = self.h_source_unchecked(r);
        Ok(ratio * self.g_forcing(t)? + h * phi.powf(T::one() - self.p) * self.w_log(t)?)
    }

    /// `v(r) |u|^p r^(n-1)` from the closed form, evaluated in log space so
    /// that vanishing `u` never meets an overflowing weight.
    pub(crate) fn weighted_kernel_closed(&self, r: T, phi: T, u_abs: T) -> T {
        let one = T::one();
        let p = self.p;
        let pm1 = p - one;
        let (lr, lu, lphi) = (r.ln(), u_abs.ln(), phi.ln());
        let base = (p - self.beta) / p;
        let x = (one + (self.s / phi).ln()).recip();
        let n1 = self.dim() - one;
        let first = base.powf(p)
            * (p * lu - (self.beta - one) * p / pm1 * lr - p * lphi + n1 * lr).exp()
            * (one + p / (T::lit(2.0) * pm1) * x * x);
        let second = base.powf(pm1)
            * (self.dim() - self.beta)
            * (p * lu - self.beta * lr - pm1 * lphi + n1 * lr).exp()
            * (one - x + self.b * x * x);
        first + second
    }

    /// Same quantity assembled from `|phi'/phi|^p G + h phi^(1-p) w`.
    pub(crate) fn weighted_kernel_compositional(&self, r: T, phi: T, u_abs: T) -> Result<T> {
        let one = T::one();
        let p = self.p;
        let (lr, lu, lphi) = (r.ln(), u_abs.ln(), phi.ln());
        let n1 = self.dim() - one;
        let grad = (p * self.kappa.ln() + (self.kappa - one) * p * lr + p * lu - p * lphi + n1 * lr).exp();
        let h_part = self.kappa.powf(p - one)
            * (self.dim() - self.beta)
            * (-self.beta * lr + p * lu - (p - one) * lphi + n1 * lr).exp();
        Ok(grad * self.g_forcing(lphi)? + h_part * self.w_log(lphi)?)
    }

    /// `|phi'/phi|^p |u|^p r^(n-1)` in log space.
    pub(crate) fn weighted_log_gradient(&self, r: T, phi: T, u_abs: T) -> T {
        let one = T::one();
        let p = self.p;
        let (lr, lu, lphi) = (r.ln(), u_abs.ln(), phi.ln());
        (p * self.kappa.ln() + (self.kappa - one) * p * lr + p * lu - p * lphi + (self.dim() - one) * lr).exp()
    }

    /// `|phi'/phi|^p`, the weight of the functional `K`.
    #[inline]
    pub(crate) fn log_gradient_weight(&self, r: T, phi: T) -> T {
        (self.kappa * r.powf(self.kappa - T::one()) / phi).powf(self.p)
    }
}

/// Outcome of [`ProblemParams::lemma2_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualScan<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub points: usize,
    pub min_residual: T,
    pub argmin_x: T,
    pub first_negative_x: Option<T>,
}

/// Classical double-singular-kernel bound
/// `R^(-p) (1/p)^p [(p-1)^(p-1) / (n-1)^(n-1)]^(p/(p-n))`.
pub fn classical_bound<T: Real>(p: T, n: usize, radius: T) -> Result<T> {
    let nf = T::from_count(n);
    if p <= T::one() || n < 2 || radius <= T::zero() {
        return Err(Error::InvalidParams(format!(
            "classical bound needs p > 1, n >= 2, R > 0 (got p = {p}, n = {n}, R = {radius})"
        )));
    }
    if p == nf {
        return Err(Error::InvalidParams(format!(
            "classical bound requires p != n (got p = n = {n})"
        )));
    }
    let one = T::one();
    let ratio = (p - one).powf(p - one) / (nf - one).powf(nf - one);
    Ok(radius.powf(-p) * p.recip().powf(p) * ratio.powf(p / (p - nf)))
}

/// First Dirichlet eigenvalue of the one-dimensional p-Laplacian on (-1, 1),
/// `(p-1) (pi / (p sin(pi/p)))^p`.
pub fn eigen_1d_closed_form<T: Real>(p: T) -> Result<T> {
    if p <= T::one() {
        return Err(Error::InvalidParams(format!("requires p > 1 (got p = {p})")));
    }
    let pi = T::PI();
    Ok((p - T::one()) * (pi / (p * (pi / p).sin())).powf(p))
}

/// First positive zero of the Bessel function `J_alpha`, `alpha > -1`.
///
/// Uses the entire series `sum_k (-x^2/4)^k / (k! (alpha+1)_k)`, which has
/// the zeros of `J_alpha` on `x > 0`, then brackets by a coarse scan and
/// bisects.
pub fn bessel_first_zero<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > -T::one()) || alpha > T::lit(40.0) {
        return Err(Error::InvalidParams(format!(
            "Bessel zero needs -1 < alpha <= 40 (got {alpha})"
        )));
    }
    let one = T::one();
    let series = |x: T| {
        let q = -(x * x) / T::lit(4.0);
        let (mut term, mut sum) = (one, one);
        for k in 1..400 {
            let kf = T::from_count(k);
            term = term * q / (kf * (alpha + kf));
            sum = sum + term;
            if kf > -q && term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        sum
    };
    let step = T::lit(0.05);
    let mut a = step;
    while series(a + step) > T::zero() {
        a = a + step;
    }
    let mut b = a + step;
    for _ in 0..200 {
        let m = (a + b) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        if series(m) > T::zero() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a + b) / T::lit(2.0))
}

/// First Dirichlet eigenvalue of the Laplacian (p = 2) on the ball of radius
/// `R` in dimension `n`: `(j_{n/2-1,1} / R)^2`.
pub fn eigen_2_ball_closed_form<T: Real>(n: usize, radius: T) -> Result<T> {
    if n < 1 || !(radius > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "requires n >= 1 and R > 0 (got n = {n}, R = {radius})"
        )));
    }
    let alpha = T::from_count(n) / T::lit(2.0) - T::one();
    let j = bessel_first_zero(alpha)?;
    Ok((j / radius).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, n: usize, beta: f64, r: f64, b: f64) -> ProblemParams<f64> {
        validate(RawParams::new(p, n, beta, r).with_b(b)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn validate_accepts_reference_tuple() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        assert_eq!(pp.kappa(), 0.75);
        assert_eq!(pp.p_conj(), 1.5);
    }

    #[test]
    fn validate_rejects_b_at_threshold() {
        let err = validate(RawParams::new(3.0, 2, 1.5, 1.0).with_b(-1.0 / 12.0)).unwrap_err();
        assert!(err.to_string().contains("b above threshold"), "{err}");
        assert_eq!(b_threshold(3.0), -1.0 / 12.0);
    }

    #[test]
    fn validate_names_each_hypothesis() {
        let cases: [(RawParams<f64>, &str); 6] = [
            (RawParams::new(1.0, 2, 1.5, 1.0), "p > 1"),
            (RawParams::new(3.0, 0, 1.5, 1.0), "n >= 1"),
            (RawParams::new(3.0, 2, 1.0, 1.0), "beta in (1, n)"),
            (RawParams::new(3.0, 2, 2.0, 1.0), "beta in (1, n)"),
            (RawParams::new(3.0, 2, 1.5, 0.0), "R > 0"),
            (
                RawParams::new(3.0, 2, 1.5, 1.0)
                    .with_b(-1.0)
                    .with_s(SPolicy::Explicit(1.0)),
                "S >",
            ),
        ];
        for (raw, needle) in cases {
            let err = validate(raw).unwrap_err();
            assert!(err.is_invalid_input());
            assert!(err.to_string().contains(needle), "{err} lacks {needle}");
        }
    }

    #[test]
    fn x0_golden_ratio() {
        // positive root of 1 - x - x^2 by the quadratic formula
        let expected = (5f64.sqrt() - 1.0) / 2.0;
        let x0 = positive_root_x0(-1.0f64);
        assert!((x0 - expected).abs() < 1e-15);
        assert!((1.0 - x0 - x0 * x0).abs() < 1e-14);
        assert!((x0 - 0.6180339887).abs() < 1e-10);
    }

    #[test]
    fn phi_values() {
        let pp = params(3.0, 3, 2.0, 1.0, -1.0);
        assert_eq!(pp.kappa(), 0.5);
        assert_eq!(pp.phi(0.0).unwrap(), 1.0);
        assert_eq!(pp.phi(1.0).unwrap(), 0.0);
        assert!((pp.phi(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(pp.phi(1.0 + 1e-12).is_err());
        assert!(pp.phi(-1e-12).is_err());
    }

    #[test]
    fn phi_prime_values_and_fd() {
        let pp = params(3.0, 3, 2.0, 1.0, -1.0);
        assert!((pp.phi_prime(0.25).unwrap() + 1.0).abs() < 1e-15);
        assert!(pp.phi_prime(0.0).is_err());
        let h = 1e-6;
        let fd = (pp.phi(0.5 + h).unwrap() - pp.phi(0.5 - h).unwrap()) / (2.0 * h);
        assert!(rel(fd, pp.phi_prime(0.5).unwrap()) < 1e-8);
    }

    #[test]
    fn phi_gap_matches_direct() {
        let pp = params(4.0, 3, 2.0, 2.0, -1.0);
        for r in [0.1, 1.0, 1.9, 1.999_999] {
            let direct = pp.phi(r).unwrap();
            let gap = pp.phi_gap(r, 2.0 - r);
            assert!(rel(gap, direct) < 1e-9, "r={r}");
        }
        // 1 - (1 - d)^(2/3) ~ (2/3) d for tiny d
        let d = 1e-14;
        let g = pp.phi_gap(2.0 - d, d);
        let expected = pp.phi_max() * (2.0 / 3.0) * (d / 2.0);
        assert!(rel(g, expected) < 1e-12);
    }

    #[test]
    fn w_limits_and_example() {
        let pp = params(2.0, 2, 1.5, 1.0, -1.0);
        // t -> -infinity: w -> (1/p')^(p-1) = 1/2 for p = 2
        assert!((pp.w_log(-1e12).unwrap() - 0.5).abs() < 1e-11);
        // p = 2, b = -1, S = e^(1/x0): admissible for R = 1 with default S.
        let x0 = pp.x0();
        assert!((pp.s() - (1.0 / x0).exp()).abs() < 1e-12);
        let w = pp.w_log(0.0).unwrap();
        let x = 1.0 / (1.0 + 1.0 / x0);
        let oracle = 0.5 * (1.0 - x - 1.0 * x * x);
        assert!((w - oracle).abs() < 1e-15);
        assert!(pp.w_log_prime(0.0).unwrap() < 0.0);
        assert!(pp.w_log(pp.t_admissible_bound()).is_err());
        let err = pp.w_log(pp.t_admissible_bound() + 1.0).unwrap_err();
        assert!(err.to_string().contains("S too small"));
    }

    #[test]
    fn g_forcing_values() {
        // S = e exceeds R^kappa e^(1/x0 - 1) = e^0.618..., so it is admissible.
        let pp = validate(
            RawParams::new(2.0, 2, 1.5, 1.0)
                .with_b(-1.0)
                .with_s(SPolicy::Explicit(std::f64::consts::E)),
        )
        .unwrap();
        // 1 + ln S - t = 1 and p / (2(p-1)) = 1
        assert!((pp.g_forcing(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((pp.g_forcing(-1e15).unwrap() - 0.25).abs() < 1e-15);
        assert!(pp.g_forcing(1.0 + pp.ln_s()).is_err());
    }

    #[test]
    fn residual_vanishes_at_minus_infinity() {
        for p in [2.0, 2.5, 3.0, 5.0] {
            let pp = params(p, 2, 1.5, 1.0, default_b(p));
            let r = pp.lemma2_residual(pp.t_of_x(1e-6)).unwrap();
            assert!(r.abs() < 1e-15, "p={p}: {r}");
        }
    }

    #[test]
    fn residual_positive_at_small_x() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        let x = 0.1;
        let res = pp.lemma2_residual(pp.t_of_x(x)).unwrap();
        assert!(res > 0.0);
        // Expanding (1 - x + b x^2)^(p') to third order leaves the cubic
        // p/(p-1) (-b - (p-2)/(6(p-1))) x^3 times (1/p')^p; positive below threshold.
        let cubic = 1.5 * (1.0 - 1.0 / 12.0);
        assert!(cubic > 0.0);
        // the cubic term dominates at small x
        let small = 1e-3;
        let res_small = pp.lemma2_residual(pp.t_of_x(small)).unwrap();
        let leading = (1.0 / 1.5f64).powf(3.0) * cubic * small.powi(3);
        assert!(rel(res_small, leading) < 0.05, "{res_small} vs {leading}");
    }

    #[test]
    fn residual_negative_control_at_threshold() {
        // b exactly at the threshold is rejected by validation, so build the
        // residual by hand at x = 0.3 for p = 3, b = -1/12.
        let p: f64 = 3.0;
        let b = -1.0 / 12.0;
        let pc = p / (p - 1.0);
        let x: f64 = 0.3;
        let c = (1.0 / pc).powf(p - 1.0);
        let w = c * (1.0 - x + b * x * x);
        let wp = c * (-x * x + 2.0 * b * x.powi(3));
        let g = (1.0 / pc).powf(p) * (1.0 + p / (2.0 * (p - 1.0)) * x * x);
        let res = -wp + (p - 1.0) * w - (p - 1.0) * w.powf(pc) - g;
        assert!(res < 0.0, "{res}");
    }

    #[test]
    fn residual_requires_p_at_least_two() {
        let pp = params(1.5, 2, 1.2, 1.0, -1.0);
        assert!(pp.lemma2_residual(-5.0).is_err());
    }

    #[test]
    fn h_source_values() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        assert!((pp.h_source(1.0).unwrap() - 0.28125).abs() < 1e-15);
        assert!(pp.h_source(0.0).is_err());
        let p2 = params(2.0, 3, 1.5, 1.0, -1.0);
        assert!(rel(p2.h_source(0.3).unwrap(), p2.h_source_printed(0.3).unwrap()) < 1e-15);
    }

    #[test]
    fn h_source_matches_fd_p_laplacian() {
        // -(r^(n-1) |phi'|^(p-2) phi')' by central differences of the closed-form phi
        for (p, n, beta) in [(3.0, 2, 1.5), (4.0, 3, 2.0), (2.5, 2, 1.2)] {
            let pp = params(p, n, beta, 1.0, default_b(p));
            let flux = |r: f64| {
                let d = pp.phi_prime(r).unwrap();
                r.powi(n as i32 - 1) * d.abs().powf(p - 2.0) * d
            };
            for r in [0.2, 0.5, 0.8] {
                let h = 1e-5;
                let fd = -(flux(r + h) - flux(r - h)) / (2.0 * h);
                let target = r.powi(n as i32 - 1) * pp.h_source(r).unwrap();
                assert!(rel(fd, target) < 1e-8, "p={p} r={r}: {fd} vs {target}");
            }
        }
    }

    #[test]
    fn kernel_brackets() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        for i in 1..1000 {
            let r = i as f64 / 1000.0;
            let phi = pp.phi(r).unwrap();
            let x = 1.0 / (1.0 + (pp.s() / phi).ln());
            assert!(x > 0.0 && x < pp.x0());
            let first = 1.0 + 3.0 / 4.0 * x * x;
            let second = 1.0 - x - x * x;
            assert!(first >= 1.0);
            assert!(second > 0.0 && second < 1.0);
        }
    }

    #[test]
    fn kernel_diverges_at_both_ends() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        let mid = pp.hardy_kernel(0.5).unwrap();
        assert!(pp.hardy_kernel(1e-9).unwrap() > 1e3 * mid);
        assert!(pp.hardy_kernel(1.0 - 1e-9).unwrap() > 1e3 * mid);
        assert!(pp.hardy_kernel(0.0).is_err());
        assert!(pp.hardy_kernel(1.0).is_err());
    }

    #[test]
    fn classical_bound_values() {
        assert!(rel(classical_bound(3.0, 2, 1.0).unwrap(), 64.0 / 27.0) < 1e-14);
        assert!(rel(classical_bound(3.0, 2, 2.0).unwrap(), 64.0 / 27.0 / 8.0) < 1e-14);
        assert!(rel(classical_bound(4.0, 2, 1.0).unwrap(), 729.0 / 256.0) < 1e-14);
        assert!(classical_bound(2.0, 2, 1.0).is_err());
    }

    #[test]
    fn eigen_1d_values() {
        let pi = std::f64::consts::PI;
        assert!(rel(eigen_1d_closed_form(2.0).unwrap(), pi * pi / 4.0) < 1e-15);
        let s3 = 3f64.sqrt() / 2.0;
        let expected = 2.0 * (pi / (3.0 * s3)).powi(3);
        assert!(rel(eigen_1d_closed_form(3.0).unwrap(), expected) < 1e-14);
        assert!((expected - 3.5364).abs() < 5e-4);
        let mut prev = 0.0;
        for p in [4.0, 8.0, 16.0, 32.0] {
            let v = eigen_1d_closed_form(p).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 20.0);
    }

    #[test]
    fn f32_instantiation() {
        let pp = validate(RawParams::new(3.0f32, 2, 1.5, 1.0).with_b(-1.0)).unwrap();
        let a = pp.hardy_kernel(0.3).unwrap();
        let b = pp.hardy_kernel_compositional(0.3).unwrap();
        assert!((a - b).abs() / b < 1e-5);
    }
    #[test]
    fn bessel_zeros_known_values() {
        let pi = std::f64::consts::PI;
        assert!((bessel_first_zero(-0.5f64).unwrap() - pi / 2.0).abs() < 1e-13);
        assert!((bessel_first_zero(0.0f64).unwrap() - 2.404_825_557_695_773).abs() < 1e-13);
        assert!((bessel_first_zero(0.5f64).unwrap() - pi).abs() < 1e-13);
        assert!((bessel_first_zero(1.0f64).unwrap() - 3.831_705_970_207_512).abs() < 1e-12);
        assert!(bessel_first_zero(-1.0f64).is_err());
    }

    #[test]
    fn laplacian_ball_matches_interval_and_scaling() {
        let pi = std::f64::consts::PI;
        // n = 1 is the interval (-R, R)
        assert!(rel(eigen_2_ball_closed_form(1, 1.0).unwrap(), eigen_1d_closed_form(2.0).unwrap()) < 1e-13);
        assert!(rel(eigen_2_ball_closed_form(3, 0.5).unwrap(), 4.0 * pi * pi) < 1e-13);
    }


    #[test]
    fn beta_must_stay_below_p() {
        let err = validate(RawParams::<f64>::new(2.1, 3, 2.5, 1.0)).unwrap_err();
        assert!(err.to_string().contains("requires beta < p"), "{err}");
        assert!(validate(RawParams::<f64>::new(2.1, 3, 2.0, 1.0)).is_ok());
    }

}
