//! Radial solutions of `-div(|grad phi|^(p-2) grad phi) = h(|y|)` in `B_R`
//! with `phi = 0` on the sphere, built from the double-integral formula
//!
//! ```text
//! phi(r) = int_r^R theta^((1-n)/(p-1)) ( int_0^theta s^(n-1) h(s) ds )^(1/(p-1)) dtheta
//! ```
//!
//! and checked against the radial ODE `-(r^(n-1) |phi'|^(p-2) phi')' = r^(n-1) h`.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::ProblemParams;
use crate::quadrature::{fixed_kronrod, integrate, integrate_nodes, Node, QuadConfig};
use crate::scalar::Real;

/// A named radial source term `h(r)`.
#[derive(Clone)]
pub struct Source<T> {
    label: String,
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Real> Source<T> {
    pub fn new(label: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Source {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// `h(r) = kappa^(p-1) (n - beta) r^(-beta)`, whose solution is `R^kappa - r^kappa`.
    pub fn barrier(params: &ProblemParams<T>) -> Self {
        let pp = *params;
        Source::new("kappa^(p-1) (n-beta) r^-beta", move |r| {
            pp.h_source_unchecked(r)
        })
    }

    /// `h(r) = kappa (n - beta) r^(-beta)`; solves the problem only for `p = 2`.
    pub fn barrier_printed(params: &ProblemParams<T>) -> Self {
        let c = params.kappa() * (params.dim() - params.beta());
        let beta = params.beta();
        Source::new("kappa (n-beta) r^-beta", move |r: T| c * r.powf(-beta))
    }

    pub fn constant(c: T) -> Self {
        Source::new(format!("{c}"), move |_| c)
    }

    pub fn zero() -> Self {
        Source::constant(T::zero())
    }

    /// `c r^exponent`.
    pub fn power(c: T, exponent: T) -> Self {
        Source::new(format!("{c} r^{exponent}"), move |r: T| c * r.powf(exponent))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, r: T) -> T {
        (self.f)(r)
    }
}

impl<T> fmt::Debug for Source<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Source").field("label", &self.label).finish()
    }
}

/// `int_0^R s^(n-1) h(s) ds < infinity`, decided numerically.
///
/// Divergence shows up as a quadrature budget failure or a non-finite
/// integrand and yields `Ok(false)`; malformed input is still an error.
pub fn check_source_admissible<T, H>(h: H, params: &ProblemParams<T>, cfg: QuadConfig<T>) -> Result<bool>
where
    T: Real,
    H: Fn(T) -> T,
{
    let n1 = params.dim() - T::one();
    let res = integrate_nodes(
        |node: Node<T>| node.x.powf(n1) * h(node.x),
        T::zero(),
        params.radius(),
        cfg,
    );
    match res {
        Ok(r) => Ok(r.value.is_finite()),
        Err(Error::QuadratureBudget { .. }) | Err(Error::NonFinite { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Evaluates the double-integral solution at a single radius.
///
/// The inner integral is anchored on a geometric grid between `r` and `R`;
/// each outer node completes it with a short quadrature from its anchor.
pub fn solve_radial<T, H>(h: H, params: &ProblemParams<T>, r: T, cfg: QuadConfig<T>) -> Result<T>
where
    T: Real,
    H: Fn(T) -> T,
{
    let radius = params.radius();
    if !(r > T::zero() && r <= radius) {
        return Err(Error::Domain(format!("solve_radial needs r in (0, R = {radius}] (got {r})")));
    }
    if r == radius {
        return Ok(T::zero());
    }
    let n1 = params.dim() - T::one();
    let p1 = params.p() - T::one();
    let inner_cfg = QuadConfig {
        tol: cfg.tol / T::lit(10.0),
        ..cfg
    };
    let weight = |s: T| s.powf(n1) * h(s);

    const ANCHORS: usize = 32;
    let ratio = (radius / r).powf(T::from_count(ANCHORS).recip());
    let mut anchors = Vec::with_capacity(ANCHORS + 1);
    let mut acc = integrate(&weight, T::zero(), r, inner_cfg.tol)?.value;
    let mut theta = r;
    anchors.push((theta, acc));
    for k in 1..=ANCHORS {
        let next = if k == ANCHORS { radius } else { theta * ratio };
        acc = acc + integrate(&weight, theta, next, inner_cfg.tol)?.value;
        theta = next;
        anchors.push((theta, acc));
    }

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_at = |t: T| -> T {
        let idx = anchors.partition_point(|&(a, _)| a <= t).saturating_sub(1);
        let (a, base) = anchors[idx];
        if t <= a {
            return base;
        }
        match integrate(&weight, a, t, inner_cfg.tol) {
            Ok(q) => base + q.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::nan()
            }
        }
    };
    let outer = integrate(
        |t: T| {
            let inner = inner_at(t).max(T::zero());
            t.powf(-n1 / p1) * inner.powf(p1.recip())
        },
        r,
        radius,
        cfg.tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outer?.value)
}

/// Log-uniform radii from `r_min_frac * R` to `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid<T> {
    pub r_min_frac: T,
    pub cells: usize,
}

impl<T: Real> Default for LogGrid<T> {
    fn default() -> Self {
        LogGrid {
            r_min_frac: T::lit(1e-3),
            cells: 200,
        }
    }
}

enum Repr<T> {
    /// Inner integrals `int_0^r s^(n-1) h` at the grid nodes.
    Tabulated { inner: Vec<T> },
    Closed(Arc<dyn Fn(T) -> T + Send + Sync>),
}

/// A radial solution sampled on a log-spaced grid that can be evaluated
/// anywhere inside the grid range.
///
/// Tabulated solutions are accumulated cell by cell with fixed Kronrod rules,
/// so values are accurate to rounding and vary smoothly with `r`, which is what
/// finite differencing in [`ode_residual`] needs.
pub struct RadialSolution<T> {
    radii: Vec<T>,
    values: Vec<T>,
    source: Source<T>,
    repr: Repr<T>,
    p: T,
    n: usize,
    radius: T,
    log_step: T,
    /// Step of the finite-difference stencil in `ln r`.
    pub fd_step: T,
}

impl<T: Real> fmt::Debug for RadialSolution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialSolution")
            .field("source", &self.source)
            .field("points", &self.radii.len())
            .field("r_min", &self.radii[0])
            .field("radius", &self.radius)
            .finish()
    }
}

fn log_radii<T: Real>(radius: T, grid: LogGrid<T>) -> Result<(Vec<T>, T)> {
    if !(grid.r_min_frac > T::zero() && grid.r_min_frac < T::one()) || grid.cells < 8 {
        return Err(Error::Domain(
            "log grid needs r_min_frac in (0, 1) and at least 8 cells".into(),
        ));
    }
    let r_min = grid.r_min_frac * radius;
    let log_step = -grid.r_min_frac.ln() / T::from_count(grid.cells);
    let radii = (0..=grid.cells)
        .map(|k| {
            if k == grid.cells {
                radius
            } else {
                r_min * (log_step * T::from_count(k)).exp()
            }
        })
        .collect();
    Ok((radii, log_step))
}

impl<T: Real> RadialSolution<T> {
    /// Builds the solution for `source` on the log grid.
    pub fn tabulate(source: Source<T>, params: &ProblemParams<T>, grid: LogGrid<T>) -> Result<Self> {
        let radius = params.radius();
        let (radii, log_step) = log_radii(radius, grid)?;
        let n1 = params.dim() - T::one();
        let p1 = params.p() - T::one();
        let weight = |s: T| s.powf(n1) * source.eval(s);

        let mut inner = Vec::with_capacity(radii.len());
        inner.push(integrate(weight, T::zero(), radii[0], T::default_tol() / T::lit(10.0))?.value);
        for w in radii.windows(2) {
            let prev = *inner.last().expect("seeded");
            inner.push(prev + fixed_kronrod(weight, w[0], w[1]));
        }

        let mut values = vec![T::zero(); radii.len()];
        for k in (0..radii.len() - 1).rev() {
            let (a, b) = (radii[k], radii[k + 1]);
            let base = inner[k];
            let cell = fixed_kronrod(
                |t: T| {
                    let i = (base + fixed_kronrod(weight, a, t)).max(T::zero());
                    t.powf(-n1 / p1) * i.powf(p1.recip())
                },
                a,
                b,
            );
            values[k] = values[k + 1] + cell;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { x: radii[0].as_f64() });
        }

        Ok(RadialSolution {
            radii,
            values,
            source,
            repr: Repr::Tabulated { inner },
            p: params.p(),
            n: params.n(),
            radius,
            log_step,
            fd_step: T::lit(2e-3),
        })
    }

    /// Wraps a known closed-form candidate, e.g. to test it against a source.
    pub fn from_closed_form(
        phi: impl Fn(T) -> T + Send + Sync + 'static,
        source: Source<T>,
        params: &ProblemParams<T>,
        grid: LogGrid<T>,
    ) -> Result<Self> {
        let (radii, log_step) = log_radii(params.radius(), grid)?;
        let values = radii.iter().map(|&r| phi(r)).collect();
        Ok(RadialSolution {
            radii,
            values,
            source,
            repr: Repr::Closed(Arc::new(phi)),
            p: params.p(),
            n: params.n(),
            radius: params.radius(),
            log_step,
            fd_step: T::lit(2e-3),
        })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    /// Evaluates the solution at any `r` in `[r_min, R]`.
    pub fn value_at(&self, r: T) -> Result<T> {
        let r_min = self.radii[0];
        if !(r >= r_min && r <= self.radius) {
            return Err(Error::Domain(format!(
                "r = {r} outside the tabulated range [{r_min}, {}]",
                self.radius
            )));
        }
        let inner = match &self.repr {
            Repr::Closed(phi) => return Ok(phi(r)),
            Repr::Tabulated { inner } => inner,
        };
        if r == self.radius {
            return Ok(T::zero());
        }
        let cells = self.radii.len() - 1;
        let k = ((r / r_min).ln() / self.log_step)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(cells - 1);
        // the floor may land one cell off near node boundaries
        let k = if r < self.radii[k] {
            k.saturating_sub(1)
        } else if r > self.radii[k + 1] {
            (k + 1).min(cells - 1)
        } else {
            k
        };
        let (a, b) = (self.radii[k], self.radii[k + 1]);
        let n1 = T::from_count(self.n) - T::one();
        let p1 = self.p - T::one();
        let weight = |s: T| s.powf(n1) * self.source.eval(s);
        let base = inner[k];
        let piece = fixed_kronrod(
            |t: T| {
                let i = (base + fixed_kronrod(weight, a, t)).max(T::zero());
                t.powf(-n1 / p1) * i.powf(p1.recip())
            },
            r,
            b,
        );
        Ok(self.values[k + 1] + piece)
    }
}

/// `-(r^(n-1) |phi'|^(p-2) phi')' - r^(n-1) h(r)` by nested five-point
/// differences in `ln r`.
pub fn ode_residual<T: Real>(solution: &RadialSolution<T>, r: T) -> Result<T> {
    let step = solution.fd_step;
    let lo = r * (-T::lit(4.0) * step).exp();
    let hi = r * (T::lit(4.0) * step).exp();
    if !(lo >= solution.radii[0] && hi <= solution.radius) {
        return Err(Error::Stencil(format!(
            "grid too coarse for differentiation at r = {r}: stencil [{lo}, {hi}] leaves [{}, {}]",
            solution.radii[0], solution.radius
        )));
    }
    let mut phi = [T::zero(); 9];
    for (j, slot) in phi.iter_mut().enumerate() {
        let offset = T::lit(j as f64 - 4.0) * step;
        *slot = solution.value_at(r * offset.exp())?;
    }
    let twelve_step = T::lit(12.0) * step;
    let five_point = |f: &[T], c: usize| {
        (f[c - 2] - T::lit(8.0) * f[c - 1] + T::lit(8.0) * f[c + 1] - f[c + 2]) / twelve_step
    };
    let n1 = T::from_count(solution.n) - T::one();
    let p2 = solution.p - T::lit(2.0);
    let mut flux = [T::zero(); 5];
    for (i, slot) in flux.iter_mut().enumerate() {
        let c = i + 2;
        let rho = r * (T::lit(i as f64 - 2.0) * step).exp();
        let d = five_point(&phi, c) / rho;
        *slot = rho.powf(n1) * d.abs().powf(p2) * d;
    }
    let dflux = five_point(&flux, 2) / r;
    Ok(-dflux - r.powf(n1) * solution.source.eval(r))
}
