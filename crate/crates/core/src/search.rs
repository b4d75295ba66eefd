//! One-dimensional minimization: golden-section refinement of brackets found
//! on a caller-supplied grid.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `x_tol`.
pub fn golden_section<T, F>(mut f: F, lo: T, hi: T, x_tol: T, max_iter: usize) -> Result<Minimum<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    // 1/phi and 1/phi^2
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let inv_phi2 = T::lit(0.381_966_011_250_105_1);
    let (mut a, mut b) = (lo, hi);
    let mut c = a + inv_phi2 * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = a + inv_phi2 * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(Minimum {
        x,
        value,
        evaluations,
    })
}

/// Minimizes `f` over the span of `grid` (sorted ascending).
///
/// Every interior local minimum of the sampled values is refined by golden
/// section on its neighbouring grid cells and the best refinement wins, so a
/// multimodal profile degrades to exhaustive refinement instead of silently
/// picking the first basin. A minimum on the first or last grid point means
/// the optimum is not interior and is reported as an error.
pub fn bracket_and_refine<T, F>(mut f: F, grid: &[T], x_tol: T) -> Result<Minimum<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if grid.len() < 3 {
        return Err(Error::Optimizer("bracketing grid needs at least 3 points".into()));
    }
    let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<T>>>()?;
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Optimizer("objective is NaN on the bracketing grid".into()));
    }
    let argmin = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("no NaN"))
        .map(|(i, _)| i)
        .expect("non-empty");
    if argmin == 0 || argmin == grid.len() - 1 {
        return Err(Error::Optimizer(format!(
            "no interior bracket: smallest sample at grid end x = {}",
            grid[argmin]
        )));
    }
    let mut evaluations = grid.len();
    let mut best: Option<Minimum<T>> = None;
    for i in 1..grid.len() - 1 {
        if !(values[i] <= values[i - 1] && values[i] <= values[i + 1]) {
            continue;
        }
        let m = golden_section(&mut f, grid[i - 1], grid[i + 1], x_tol, 400)?;
        evaluations += m.evaluations;
        let m = if values[i] < m.value {
            Minimum {
                x: grid[i],
                value: values[i],
                evaluations: 0,
            }
        } else {
            m
        };
        if best.is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.expect("the interior argmin is a local minimum");
    Ok(Minimum {
        evaluations,
        ..best
    })
}

/// `count` equally spaced points on `[lo, hi]`, endpoints included.
pub fn linspace<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_count(count - 1);
            (0..count)
                .map(|i| if i + 1 == count { hi } else { lo + step * T::from_count(i) })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|x: f64| Ok((x - 0.3).powi(2) + 1.0), -1.0, 2.0, 1e-10, 200).unwrap();
        // an offset parabola is flat below sqrt(eps) in x, but its value is exact
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!((m.value - 1.0).abs() < 1e-15);
        let m = golden_section(|x: f64| Ok((x - 0.3).powi(2)), -1.0, 2.0, 1e-12, 200).unwrap();
        assert!((m.x - 0.3).abs() < 1e-11);
    }

    #[test]
    fn bracket_picks_global_basin() {
        // two basins; the deeper one is at x = 2.5
        let f = |x: f64| Ok(((x - 0.5).powi(2) - 0.1).min((x - 2.5).powi(2) - 0.2));
        let grid = linspace(-1.0, 4.0, 51);
        let m = bracket_and_refine(f, &grid, 1e-10).unwrap();
        assert!((m.x - 2.5).abs() < 1e-7, "{m:?}");
    }

    #[test]
    fn boundary_minimum_is_an_error() {
        let grid = linspace(0.0, 1.0, 11);
        let err = bracket_and_refine(|x: f64| Ok(x), &grid, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Optimizer(_)));
    }

    #[test]
    fn errors_propagate() {
        let grid = linspace(0.0, 1.0, 11);
        let r = bracket_and_refine(|_x: f64| Err(Error::Domain("x".into())), &grid, 1e-10);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(1.0, 2.0, 64);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[63], 2.0);
    }
}
