//! The functionals
//!
//! ```text
//! L(u) = int |u'|^p,   K(u) = int |phi'/phi|^p |u|^p,   N(u) = int v |u|^p
//! ```
//!
//! over `B_R` for radial trial functions, and the two forms of the Hardy
//! inequality they satisfy: the linear form `L >= N` and the convex form
//! `L >= (1/p)^p [(p-1) K + N]^p / K^(p-1)`.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::kernel::{default_b, ProblemParams, RawParams};
use crate::quadrature::{integrate_nodes, sphere_area, Node, QuadConfig, QuadResult};
use crate::scalar::{one_minus_pow_from_gap, Real};

/// `u(r) = c (r/R)^gamma (1 - (r/R)^a)^m`, vanishing at `0` and at `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialFunction<T> {
    gamma: T,
    a: T,
    m: T,
    radius: T,
    scale: T,
}

impl<T: Real> TrialFunction<T> {
    /// Shape with `gamma >= 1`, `m >= 1`, `a > 0` and unit amplitude.
    pub fn new(gamma: T, a: T, m: T, radius: T) -> Result<Self> {
        if !(gamma >= T::one() && m >= T::one() && a > T::zero() && radius > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "trial function needs gamma >= 1, m >= 1, a > 0, R > 0 \
                 (got gamma = {gamma}, m = {m}, a = {a}, R = {radius})"
            )));
        }
        Ok(TrialFunction {
            gamma,
            a,
            m,
            radius,
            scale: T::one(),
        })
    }

    /// `u = 0`.
    pub fn zero(radius: T) -> Self {
        TrialFunction {
            gamma: T::one(),
            a: T::one(),
            m: T::one(),
            radius,
            scale: T::zero(),
        }
    }

    pub fn scaled(mut self, c: T) -> Self {
        self.scale = self.scale * c;
        self
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
    pub fn a(&self) -> T {
        self.a
    }
    pub fn m(&self) -> T {
        self.m
    }
    pub fn radius(&self) -> T {
        self.radius
    }
    pub fn scale(&self) -> T {
        self.scale
    }

    /// Whether `u'` extends continuously to `[0, R]`.
    pub fn has_continuous_derivative(&self) -> bool {
        self.gamma >= T::one() && self.a * self.m >= T::one()
    }

    pub fn label(&self) -> String {
        format!(
            "{}*(r/R)^{}*(1-(r/R)^{})^{}",
            self.scale, self.gamma, self.a, self.m
        )
    }

    pub fn value(&self, r: T) -> T {
        self.value_gap(r, self.radius - r)
    }

    pub fn derivative(&self, r: T) -> T {
        self.derivative_gap(r, self.radius - r)
    }

    #[inline]
    fn cap(&self, t: T, gap: T) -> T {
        one_minus_pow_from_gap(t, gap, self.radius, self.a).max(T::zero())
    }

    #[inline]
    pub(crate) fn value_gap(&self, r: T, gap: T) -> T {
        if self.scale.is_zero() {
            return T::zero();
        }
        let t = r / self.radius;
        self.scale * t.powf(self.gamma) * self.cap(t, gap).powf(self.m)
    }

    #[inline]
    pub(crate) fn derivative_gap(&self, r: T, gap: T) -> T {
        if self.scale.is_zero() {
            return T::zero();
        }
        let one = T::one();
        let t = r / self.radius;
        let q = self.cap(t, gap);
        let rising = self.gamma * t.powf(self.gamma - one) * q.powf(self.m);
        let falling = self.a * self.m * t.powf(self.gamma + self.a - one) * q.powf(self.m - one);
        self.scale * (rising - falling) / self.radius
    }
}

/// The 24 shapes `gamma in {1,2,3}`, `a in {1,2}`, `m in {1,2,3,4}`.
pub fn standard_trial_family<T: Real>(radius: T) -> Vec<TrialFunction<T>> {
    let mut out = Vec::with_capacity(24);
    for gamma in [1.0, 2.0, 3.0] {
        for a in [1.0, 2.0] {
            for m in [1.0, 2.0, 3.0, 4.0] {
                out.push(
                    TrialFunction::new(T::lit(gamma), T::lit(a), T::lit(m), radius)
                        .expect("fixed family is valid"),
                );
            }
        }
    }
    out
}

/// Parameter grid for the Hardy checks: `p in {2.5, 3, 4, 6}`, `n in {2, 3}`
/// with `p > n`, `beta in {1.2, 1.5, (1+n)/2}` (deduplicated),
/// `R in {0.5, 1, 2}`, default `b` and `S`.
pub fn standard_params_grid<T: Real>() -> Vec<RawParams<T>> {
    let mut out = Vec::new();
    for p in [2.5, 3.0, 4.0, 6.0] {
        for n in [2usize, 3] {
            if p <= n as f64 {
                continue;
            }
            let mut betas = vec![1.2, 1.5, (1.0 + n as f64) / 2.0];
            betas.dedup();
            for beta in betas {
                for radius in [0.5, 1.0, 2.0] {
                    out.push(
                        RawParams::new(T::lit(p), n, T::lit(beta), T::lit(radius))
                            .with_b(default_b(T::lit(p))),
                    );
                }
            }
        }
    }
    out
}

fn check_radius<T: Real>(u: &TrialFunction<T>, params: &ProblemParams<T>) -> Result<()> {
    if u.radius != params.radius() {
        return Err(Error::Domain(format!(
            "trial function lives on R = {} but the problem has R = {}",
            u.radius,
            params.radius()
        )));
    }
    Ok(())
}

fn radial_integral<T, F>(
    integrand: F,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Node<T>) -> Result<T>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let res = integrate_nodes(
        |node| match integrand(node) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::nan()
            }
        },
        T::zero(),
        params.radius(),
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let q = res?;
    let area = sphere_area::<T>(params.n());
    Ok(QuadResult {
        value: area * q.value,
        err_estimate: area * q.err_estimate,
        evaluations: q.evaluations,
    })
}

/// `L(u) = |S^(n-1)| int_0^R |u'|^p r^(n-1) dr`.
pub fn l_functional<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<QuadResult<T>> {
    check_radius(u, params)?;
    let n1 = params.dim() - T::one();
    let p = params.p();
    radial_integral(
        |node| Ok(u.derivative_gap(node.x, node.to_upper).abs().powf(p) * node.x.powf(n1)),
        params,
        cfg,
    )
}

/// `K(u) = |S^(n-1)| int_0^R |phi'/phi|^p |u|^p r^(n-1) dr`.
pub fn k_functional<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<QuadResult<T>> {
    check_radius(u, params)?;
    radial_integral(
        |node| {
            let phi = params.phi_gap(node.x, node.to_upper);
            let ua = u.value_gap(node.x, node.to_upper).abs();
            Ok(params.weighted_log_gradient(node.x, phi, ua))
        },
        params,
        cfg,
    )
}

/// `N(u) = |S^(n-1)| int_0^R v |u|^p r^(n-1) dr` with the closed-form weight.
pub fn n_functional<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<QuadResult<T>> {
    check_radius(u, params)?;
    radial_integral(
        |node| {
            let phi = params.phi_gap(node.x, node.to_upper);
            let ua = u.value_gap(node.x, node.to_upper).abs();
            Ok(params.weighted_kernel_closed(node.x, phi, ua))
        },
        params,
        cfg,
    )
}

/// `N(u)` with the weight assembled from `phi'`, `G`, `h` and `w`.
pub fn n_functional_expanded<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<QuadResult<T>> {
    check_radius(u, params)?;
    radial_integral(
        |node| {
            let phi = params.phi_gap(node.x, node.to_upper);
            let ua = u.value_gap(node.x, node.to_upper).abs();
            params.weighted_kernel_compositional(node.x, phi, ua)
        },
        params,
        cfg,
    )
}

fn slack<T: Real>(l: T) -> T {
    T::lit(1e-9) * l.max(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearReport<T> {
    pub l: T,
    pub n: T,
    /// `L - N`.
    pub margin: T,
    pub pass: bool,
}

/// Checks `L(u) >= N(u)` up to the slack `1e-9 max(L, 1)`.
pub fn verify_linear_hardy<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<LinearReport<T>> {
    let l = l_functional(u, params, cfg)?.value;
    let n = n_functional(u, params, cfg)?.value;
    let margin = l - n;
    Ok(LinearReport {
        l,
        n,
        margin,
        pass: margin >= -slack(l),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// `K = 0`, which only happens for `u = 0`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexReport<T> {
    pub l: T,
    pub k: T,
    pub n: T,
    /// `(1/p)^p [(p-1) K + N]^p / K^(p-1)`; zero when degenerate.
    pub rhs: T,
    pub margin: T,
    pub verdict: Verdict,
}

impl<T: Real> ConvexReport<T> {
    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Checks `L >= (1/p)^p [(p-1) K + N]^p / K^(p-1)` with the same slack as the
/// linear form.
pub fn verify_convex_hardy<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<ConvexReport<T>> {
    let l = l_functional(u, params, cfg)?.value;
    let k = k_functional(u, params, cfg)?.value;
    let n = n_functional(u, params, cfg)?.value;
    Ok(convex_report(params.p(), l, k, n))
}

/// `K_g(u) = |S^(n-1)| int_0^R |g|^(p') |u|^p r^(n-1) dr` for the field
/// `g = |phi'|^(p-2) phi' / phi^(p-1) w(ln phi)`, i.e. the `K` integrand
/// multiplied by `w(ln phi)^(p')`.
pub fn field_k_functional<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<QuadResult<T>> {
    check_radius(u, params)?;
    let p_conj = params.p_conj();
    radial_integral(
        |node| {
            let phi = params.phi_gap(node.x, node.to_upper);
            let ua = u.value_gap(node.x, node.to_upper).abs();
            let w = params.w_at_x(params.x_of_t(phi.ln()));
            Ok(params.weighted_log_gradient(node.x, phi, ua) * w.powf(p_conj))
        },
        params,
        cfg,
    )
}

/// The convex form with `K` replaced by [`field_k_functional`].
///
/// Scaling the field to `c g` and optimizing over `c > 0` gives exactly this
/// right side. With the plain `K` the same bound can overshoot `L` once
/// `N < K`, because `w^(p') < 1` makes `K_g` the smaller of the two.
pub fn verify_convex_hardy_field<T: Real>(
    u: &TrialFunction<T>,
    params: &ProblemParams<T>,
    cfg: QuadConfig<T>,
) -> Result<ConvexReport<T>> {
    let l = l_functional(u, params, cfg)?.value;
    let k = field_k_functional(u, params, cfg)?.value;
    let n = n_functional(u, params, cfg)?.value;
    Ok(convex_report(params.p(), l, k, n))
}

fn convex_report<T: Real>(p: T, l: T, k: T, n: T) -> ConvexReport<T> {
    if k <= T::zero() {
        return ConvexReport {
            l,
            k,
            n,
            rhs: T::zero(),
            margin: l,
            verdict: Verdict::Degenerate,
        };
    }
    let rhs = convex_rhs(p, k, n);
    let margin = l - rhs;
    ConvexReport {
        l,
        k,
        n,
        rhs,
        margin,
        verdict: if margin >= -slack(l) {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

/// `(1/p)^p [(p-1) K + N]^p / K^(p-1)`, computed as `K ((p-1 + N/K) / p)^p`.
pub fn convex_rhs<T: Real>(p: T, k: T, n: T) -> T {
    k * ((p - T::one() + n / k) / p).powf(p)
}

/// `-div g - (p-1)|g|^(p') - v` at radius `r` for the radial field
/// `g = |phi'|^(p-2) phi' / phi^(p-1) w(ln phi)`; it reduces to
/// `|phi'/phi|^p` times the supersolution residual.
pub fn pointwise_divergence_check<T: Real>(r: T, params: &ProblemParams<T>) -> Result<T> {
    if !(r > T::zero() && r < params.radius()) {
        return Err(Error::Domain(format!(
            "pointwise check needs r in (0, R = {}) (got {r})",
            params.radius()
        )));
    }
    let phi = params.phi_gap(r, params.radius() - r);
    let t = phi.ln();
    let x = params.x_of_t(t);
    if x >= params.x0() {
        return Err(Error::Domain(format!(
            "w nonpositive: S too small for this phi range (x = {x} >= x0)"
        )));
    }
    Ok(params.log_gradient_weight(r, phi) * params.residual_at_x(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::validate;

    fn params(p: f64, n: usize, beta: f64, r: f64, b: f64) -> ProblemParams<f64> {
        validate(RawParams::new(p, n, beta, r).with_b(b)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    #[test]
    fn trial_function_shape() {
        let u = TrialFunction::new(2.0, 2.0, 2.0, 1.5).unwrap();
        assert_eq!(u.value(0.0), 0.0);
        assert_eq!(u.value(1.5), 0.0);
        assert!((1..100).all(|i| u.value(1.5 * i as f64 / 100.0) > 0.0));
        assert!(u.has_continuous_derivative());
        let h = 1e-6;
        for r in [0.2, 0.7, 1.3] {
            let fd = (u.value(r + h) - u.value(r - h)) / (2.0 * h);
            assert!(rel(fd, u.derivative(r)) < 1e-8);
        }
        assert!(TrialFunction::new(0.5, 1.0, 1.0, 1.0).is_err());
        assert!(TrialFunction::new(1.0, 1.0, 0.5, 1.0).is_err());
        assert!(TrialFunction::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert_eq!(standard_trial_family(1.0f64).len(), 24);
    }

    #[test]
    fn l_of_parabola() {
        // u = 1 - r^2 is gamma = 0, outside the family; use u = r (1 - r) instead:
        // u' = 1 - 2r, int_0^1 (1-2r)^2 r dr = 1/6, L = 2 pi / 6.
        let pp = params(2.0, 2, 1.5, 1.0, -1.0);
        let u = TrialFunction::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let l = l_functional(&u, &pp, cfg()).unwrap().value;
        assert!(rel(l, std::f64::consts::PI / 3.0) < 1e-12, "{l}");
    }

    #[test]
    fn zero_function() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        let u = TrialFunction::zero(1.0);
        assert_eq!(l_functional(&u, &pp, cfg()).unwrap().value, 0.0);
        assert_eq!(k_functional(&u, &pp, cfg()).unwrap().value, 0.0);
        assert_eq!(n_functional(&u, &pp, cfg()).unwrap().value, 0.0);
        let lin = verify_linear_hardy(&u, &pp, cfg()).unwrap();
        assert_eq!(lin.margin, 0.0);
        assert!(lin.pass);
        let cvx = verify_convex_hardy(&u, &pp, cfg()).unwrap();
        assert_eq!(cvx.verdict, Verdict::Degenerate);
    }

    #[test]
    fn p_homogeneity() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        let u = TrialFunction::new(2.0, 2.0, 2.0, 1.0).unwrap();
        let u2 = u.scaled(2.0);
        let f = 2f64.powf(3.0);
        for func in [l_functional, k_functional, n_functional] {
            let a = func(&u, &pp, cfg()).unwrap().value;
            let b = func(&u2, &pp, cfg()).unwrap().value;
            assert!(rel(b, f * a) < 1e-9);
        }
    }

    #[test]
    fn two_routes_to_n_agree() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        let u = TrialFunction::new(2.0, 2.0, 2.0, 1.0).unwrap();
        let a = n_functional(&u, &pp, cfg()).unwrap().value;
        let b = n_functional_expanded(&u, &pp, cfg()).unwrap().value;
        assert!(rel(a, b) < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn linear_form_reference_case() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        let u = TrialFunction::new(2.0, 2.0, 2.0, 1.0).unwrap();
        let rep = verify_linear_hardy(&u, &pp, cfg()).unwrap();
        assert!(rep.margin > 0.0, "{rep:?}");
    }

    #[test]
    fn sweep_p4_n3() {
        let pp = params(4.0, 3, 2.0, 1.0, -1.0);
        for u in standard_trial_family(1.0) {
            let lin = verify_linear_hardy(&u, &pp, cfg()).unwrap();
            let cvx = verify_convex_hardy(&u, &pp, cfg()).unwrap();
            assert!(lin.pass, "{} {lin:?}", u.label());
            assert!(cvx.pass(), "{} {cvx:?}", u.label());
            // Young's inequality with m = 1: the convex right side dominates N
            assert!(cvx.rhs >= cvx.n * (1.0 - 1e-12));
        }
    }

    #[test]
    fn radius_mismatch_is_rejected() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        let u = TrialFunction::new(2.0, 2.0, 2.0, 2.0).unwrap();
        assert!(l_functional(&u, &pp, cfg()).is_err());
    }

    #[test]
    fn pointwise_check_positive_at_small_x() {
        let pp = params(3.0, 2, 1.5, 1.0, -1.0);
        // x(r) = 0.1 x0  <=>  ln phi = 1 + ln S - 1/(0.1 x0)
        let t = pp.t_of_x(0.1 * pp.x0());
        let phi = t.exp();
        let r = (pp.phi_max() - phi).powf(1.0 / pp.kappa());
        let v = pointwise_divergence_check(r, &pp).unwrap();
        assert!(v > 0.0);
        let near = pointwise_divergence_check(1.0 - 1e-12, &pp).unwrap();
        assert!(near.is_finite());
    }

    #[test]
    fn pointwise_check_matches_fd_divergence() {
        for (p, n, beta) in [(3.0, 2, 1.5), (4.0, 3, 2.0)] {
            let pp = params(p, n, beta, 1.0, -1.0);
            let n1 = n as i32 - 1;
            let field = |r: f64| {
                let phi = pp.phi(r).unwrap();
                let d = pp.phi_prime(r).unwrap();
                d.abs().powf(p - 2.0) * d / phi.powf(p - 1.0) * pp.w_log(phi.ln()).unwrap()
            };
            let r = 0.5;
            let h = 1e-5;
            let flux = |r: f64| r.powi(n1) * field(r);
            let div = (flux(r + h) - flux(r - h)) / (2.0 * h) / r.powi(n1);
            let g = field(r).abs();
            let v = pp.hardy_kernel(r).unwrap();
            let fd = -div - (p - 1.0) * g.powf(p / (p - 1.0)) - v;
            let exact = pointwise_divergence_check(r, &pp).unwrap();
            // the residual is a small difference of O(v) terms
            assert!((fd - exact).abs() < 1e-6 * v, "p={p}: {fd} vs {exact}");
            assert!(rel(fd, exact) < 1e-6, "rel {}", rel(fd, exact));
        }
    }

    #[test]
    fn plain_k_convex_form_overshoots_at_large_p() {
        // reference numbers from a plain quadrature of the closed forms
        let pp = validate(RawParams::<f64>::new(6.0, 2, 1.5, 1.0)).unwrap();
        let u = TrialFunction::new(2.0, 2.0, 1.0, 1.0).unwrap();
        let cfg = QuadConfig::default();
        let plain = verify_convex_hardy(&u, &pp, cfg).unwrap();
        assert!((plain.l - 11.967_972_01).abs() < 1e-7);
        assert!((plain.k - 24.219_160_39).abs() < 1e-7);
        assert!((plain.n - 8.520_666_40).abs() < 1e-7);
        assert_eq!(plain.verdict, Verdict::Fail);
        let field = verify_convex_hardy_field(&u, &pp, cfg).unwrap();
        assert!((field.k - 6.291_461_30).abs() < 1e-7);
        assert!(field.pass());
        assert!(field.rhs >= field.n);
    }

    #[test]
    fn field_convex_form_holds_on_sample_sweep() {
        for raw in standard_params_grid::<f64>().into_iter().step_by(5) {
            let pp = validate(raw).unwrap();
            for u in standard_trial_family(pp.radius()).into_iter().step_by(3) {
                let rep = verify_convex_hardy_field(&u, &pp, QuadConfig::default()).unwrap();
                assert!(rep.pass(), "{} {raw:?}: {rep:?}", u.label());
            }
        }
    }
}
