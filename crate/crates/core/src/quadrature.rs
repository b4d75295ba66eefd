//! Adaptive one-dimensional quadrature for integrands with integrable power
//! singularities at either endpoint, plus the geometric constants of the
//! unit ball.
//!
//! The interval is split at its midpoint and each half is mapped by
//! `x = a + (c - a) s^2` (resp. `x = b - (b - c) s^2`), which turns
//! `(x - a)^(-1/2)` type singularities into bounded integrands. The mapped
//! halves are then subdivided adaptively with the 21-point Gauss-Kronrod rule,
//! always splitting the panel with the largest error estimate.
//!
//! Integrands that need the distance to the endpoints with full relative
//! accuracy (anything involving `R^k - r^k` near `r = R`) can use
//! [`integrate_nodes`], which hands each evaluation a [`Node`] carrying both
//! gaps computed without cancellation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Endpoint, Error, Result};
use crate::scalar::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_140_931,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const PANEL_EVALS: usize = 21;

/// Default evaluation budget.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Value of a definite integral with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub err_estimate: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig<T> {
    /// Hybrid tolerance: the target is `max(tol * |value|, tol)`.
    pub tol: T,
    pub budget: usize,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        QuadConfig {
            tol: T::default_tol(),
            budget: DEFAULT_BUDGET,
        }
    }
}

impl<T: Real> QuadConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        QuadConfig {
            tol,
            ..Self::default()
        }
    }
}

/// An evaluation point together with its exact distances to both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    pub x: T,
    pub from_lower: T,
    pub to_upper: T,
}

/// Integrates `f` over `(a, b)` with the default budget.
pub fn integrate<T, F>(f: F, a: T, b: T, tol: T) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    integrate_nodes(|node: Node<T>| f(node.x), a, b, QuadConfig::with_tol(tol))
}

/// Integrates `f` over `(a, b)`; `f` receives gap-accurate [`Node`]s.
pub fn integrate_nodes<T, F>(f: F, a: T, b: T, cfg: QuadConfig<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Node<T>) -> T,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("integration needs finite a < b (got a = {a}, b = {b})")));
    }
    let tol = cfg.tol.max(T::lit(4.0) * T::epsilon());
    let mid = a + (b - a) / T::lit(2.0);
    let halves = [
        Half {
            side: Endpoint::Lower,
            width: mid - a,
            anchor: a,
            other: b - mid,
        },
        Half {
            side: Endpoint::Upper,
            width: b - mid,
            anchor: b,
            other: mid - a,
        },
    ];

    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment<T>> = Vec::new();
    let mut total = T::zero();
    let mut total_err = T::zero();

    for half in halves.iter() {
        let seg = panel(&f, half, T::zero(), T::one())?;
        evaluations += PANEL_EVALS;
        total = total + seg.value;
        total_err = total_err + seg.err;
        heap.push(seg);
    }

    // keeps mapped nodes far above the underflow range of the integrand
    let min_width = T::min_positive_value().sqrt().sqrt();
    let target = |v: T| (tol * v.abs()).max(tol);

    while total_err > target(total) {
        let Some(worst) = heap.pop() else {
            break;
        };
        let width = worst.hi - worst.lo;
        let resolution = T::lit(8.0) * T::epsilon() * worst.hi.abs().max(worst.lo.abs());
        if width <= min_width.max(resolution) {
            frozen.push(worst);
            continue;
        }
        if evaluations + 2 * PANEL_EVALS > cfg.budget {
            heap.push(worst);
            break;
        }
        let half = &halves[worst.half];
        let centre = worst.lo + width / T::lit(2.0);
        let left = panel(&f, half, worst.lo, centre)?;
        let right = panel(&f, half, centre, worst.hi)?;
        evaluations += 2 * PANEL_EVALS;
        total = total - worst.value + left.value + right.value;
        total_err = total_err - worst.err + left.err + right.err;
        heap.push(left);
        heap.push(right);
    }

    let (value, err_estimate) = heap
        .iter()
        .chain(frozen.iter())
        .fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.err));

    if err_estimate > target(value) {
        let worst = heap
            .iter()
            .chain(frozen.iter())
            .max_by(|l, r| l.err.partial_cmp(&r.err).unwrap_or(Ordering::Equal))
            .map(|s| halves[s.half].side)
            .unwrap_or(Endpoint::Lower);
        return Err(Error::QuadratureBudget {
            value: value.as_f64(),
            err_estimate: err_estimate.as_f64(),
            evaluations,
            endpoint: worst,
        });
    }

    Ok(QuadResult {
        value,
        err_estimate,
        evaluations,
    })
}

struct Half<T> {
    side: Endpoint,
    /// Length of this half.
    width: T,
    /// The endpoint this half's substitution is anchored at.
    anchor: T,
    /// Length of the other half.
    other: T,
}

impl<T: Real> Half<T> {
    fn index(&self) -> usize {
        match self.side {
            Endpoint::Lower => 0,
            Endpoint::Upper => 1,
        }
    }

    /// Maps `s` to a node and the Jacobian `2 w s`.
    #[inline]
    fn map(&self, s: T) -> (Node<T>, T) {
        let near = self.width * s * s;
        let far = self.other + self.width * (T::one() - s) * (T::one() + s);
        let jac = T::lit(2.0) * self.width * s;
        let node = match self.side {
            Endpoint::Lower => Node {
                x: self.anchor + near,
                from_lower: near,
                to_upper: far,
            },
            Endpoint::Upper => Node {
                x: self.anchor - near,
                from_lower: far,
                to_upper: near,
            },
        };
        (node, jac)
    }
}

struct Segment<T> {
    half: usize,
    lo: T,
    hi: T,
    value: T,
    err: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Segment<T> {}

impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.as_f64().total_cmp(&other.err.as_f64())
    }
}

fn panel<T, F>(f: &F, half: &Half<T>, lo: T, hi: T) -> Result<Segment<T>>
where
    T: Real,
    F: Fn(Node<T>) -> T,
{
    let eval = |s: T| -> Result<T> {
        let (node, jac) = half.map(s);
        if jac.is_zero() {
            return Ok(T::zero());
        }
        let v = f(node) * jac;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x: node.x.as_f64() })
        }
    };
    let (value, err) = kronrod_panel(eval, lo, hi)?;
    Ok(Segment {
        half: half.index(),
        lo,
        hi,
        value,
        err,
    })
}

/// One 21-point Gauss-Kronrod panel; returns the Kronrod value and the
/// rescaled error estimate.
fn kronrod_panel<T, F>(f: F, a: T, b: T) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let two = T::lit(2.0);
    let centre = (a + b) / two;
    let half_len = (b - a) / two;
    let f_centre = f(centre)?;
    let mut res_kronrod = f_centre * T::lit(WGK[10]);
    let mut res_gauss = T::zero();
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let abscissa = half_len * T::lit(XGK[j]);
        let f1 = f(centre - abscissa)?;
        let f2 = f(centre + abscissa)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let wk = T::lit(WGK[j]);
        res_kronrod = res_kronrod + wk * (f1 + f2);
        res_abs = res_abs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss = res_gauss + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = res_kronrod / two;
    let mut res_asc = T::lit(WGK[10]) * (f_centre - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half_len.abs();
    let err = ((res_kronrod - res_gauss) * half_len).abs();
    Ok((
        res_kronrod * half_len,
        rescale_error(err, res_abs * abs_half, res_asc * abs_half),
    ))
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err;
    if !res_asc.is_zero() && !scaled.is_zero() {
        let scale = (T::lit(200.0) * scaled / res_asc).powf(T::lit(1.5));
        scaled = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let fifty_eps = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        scaled = scaled.max(fifty_eps * res_abs);
    }
    scaled
}

/// Single 21-point Kronrod rule on `[a, b]` without adaptivity. Exact to
/// rounding for smooth integrands on short intervals.
pub fn fixed_kronrod<T, F>(f: F, a: T, b: T) -> T
where
    T: Real,
    F: Fn(T) -> T,
{
    let two = T::lit(2.0);
    let centre = (a + b) / two;
    let half_len = (b - a) / two;
    let mut acc = f(centre) * T::lit(WGK[10]);
    for j in 0..10 {
        let abscissa = half_len * T::lit(XGK[j]);
        acc = acc + T::lit(WGK[j]) * (f(centre - abscissa) + f(centre + abscissa));
    }
    acc * half_len
}

/// Surface area of the unit sphere in `R^n`, `2 pi^(n/2) / Gamma(n/2)`.
pub fn sphere_area<T: Real>(n: usize) -> T {
    // |S^0| = 2, |S^1| = 2 pi, |S^(n+1)| = 2 pi / n * |S^(n-1)|
    match n {
        0 => T::zero(),
        1 => T::lit(2.0),
        2 => T::lit(2.0) * T::PI(),
        _ => T::lit(2.0) * T::PI() / T::from_count(n - 2) * sphere_area::<T>(n - 2),
    }
}

/// Volume of the unit ball in `R^n`, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn ball_volume<T: Real>(n: usize) -> T {
    if n == 0 {
        return T::one();
    }
    sphere_area::<T>(n) / T::from_count(n)
}
