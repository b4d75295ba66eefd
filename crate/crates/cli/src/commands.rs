use rayon::prelude::*;
use serde::Serialize;

use heb_core::eigen::{beta_limit_bound, bound_for_ball, equivalent_radius, faber_krahn_bound};
use heb_core::shooting::{reference_eigenvalue_ball_with, ShootingConfig};
use heb_core::{eigen_1d_closed_form, eigen_2_ball_closed_form, BoundResult, Params, SPolicy};

use crate::output::{cell, emit, Format, Record, F};
use crate::{Common, Failure, Outcome};

#[derive(Serialize)]
pub struct ParamsEcho {
    p: F,
    n: usize,
    beta: F,
    #[serde(rename = "R")]
    radius: F,
    b: F,
    #[serde(rename = "S")]
    s: F,
    kappa: F,
    x0: F,
}

impl From<&Params> for ParamsEcho {
    fn from(pp: &Params) -> Self {
        ParamsEcho {
            p: F(pp.p()),
            n: pp.n(),
            beta: F(pp.beta()),
            radius: F(pp.radius()),
            b: F(pp.b()),
            s: F(pp.s()),
            kappa: F(pp.kappa()),
            x0: F(pp.x0()),
        }
    }
}

const PARAM_COLUMNS: [&str; 8] = ["p", "n", "beta", "R", "b", "S", "kappa", "x0"];

impl ParamsEcho {
    fn fields(&self) -> Vec<String> {
        vec![
            self.p.to_string(),
            self.n.to_string(),
            self.beta.to_string(),
            self.radius.to_string(),
            self.b.to_string(),
            self.s.to_string(),
            self.kappa.to_string(),
            self.x0.to_string(),
        ]
    }
}

#[derive(Serialize)]
pub struct BoundRecord {
    lambda_lower: F,
    beta_star: F,
    r_star: F,
    classical_eq6: F,
    improvement_ratio: F,
    params: ParamsEcho,
}

impl From<&BoundResult> for BoundRecord {
    fn from(b: &BoundResult) -> Self {
        BoundRecord {
            lambda_lower: F(b.lambda_lower),
            beta_star: F(b.beta_star),
            r_star: F(b.r_star),
            classical_eq6: F(b.classical_eq6),
            improvement_ratio: F(b.improvement_ratio),
            params: ParamsEcho::from(&b.params),
        }
    }
}

const BOUND_COLUMNS: [&str; 5] = ["lambda_lower", "beta_star", "r_star", "classical_eq6", "improvement_ratio"];

impl Record for BoundRecord {
    fn header() -> Vec<&'static str> {
        BOUND_COLUMNS.iter().chain(PARAM_COLUMNS.iter()).copied().collect()
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![
            self.lambda_lower.to_string(),
            self.beta_star.to_string(),
            self.r_star.to_string(),
            self.classical_eq6.to_string(),
            self.improvement_ratio.to_string(),
        ];
        out.extend(self.params.fields());
        out
    }
}

fn format_of(common: &Common) -> Format {
    common.format.unwrap_or(Format::Json)
}

pub fn bound(common: &Common, p: f64, n: usize, radius: f64, b: Option<f64>, s: SPolicy<f64>) -> Result<Outcome, Failure> {
    let res = bound_for_ball(p, n, radius, b, s)?;
    emit(&[BoundRecord::from(&res)], true, format_of(common), common.out.as_deref())?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct FkRecord {
    volume: F,
    #[serde(rename = "R_star")]
    r_star_radius: F,
    bound: BoundRecord,
}

impl Record for FkRecord {
    fn header() -> Vec<&'static str> {
        let mut h = vec!["volume", "R_star"];
        h.extend(BoundRecord::header());
        h
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.volume.to_string(), self.r_star_radius.to_string()];
        out.extend(self.bound.fields());
        out
    }
}

pub fn fk(common: &Common, volume: f64, p: f64, n: usize, b: Option<f64>, s: SPolicy<f64>) -> Result<Outcome, Failure> {
    let radius = equivalent_radius(volume, n)?;
    let res = faber_krahn_bound(volume, p, n, b, s)?;
    let rec = FkRecord {
        volume: F(volume),
        r_star_radius: F(radius),
        bound: BoundRecord::from(&res),
    };
    emit(&[rec], true, format_of(common), common.out.as_deref())?;
    Ok(Outcome::Pass)
}

fn shooting_config(common: &Common) -> ShootingConfig<f64> {
    let mut cfg = ShootingConfig::default();
    if let Some(t) = common.tol {
        cfg.rtol = t;
    }
    cfg
}

#[derive(Serialize)]
struct EigenRefRecord {
    p: F,
    n: usize,
    #[serde(rename = "R")]
    radius: F,
    lambda_ref: F,
    zero_radius_error: F,
    bisection_iterations: usize,
    ode_steps: usize,
    closed_form: Option<F>,
    closed_form_kind: Option<&'static str>,
    closed_form_rel_deviation: Option<F>,
}

impl Record for EigenRefRecord {
    fn header() -> Vec<&'static str> {
        vec![
            "p",
            "n",
            "R",
            "lambda_ref",
            "zero_radius_error",
            "bisection_iterations",
            "ode_steps",
            "closed_form",
            "closed_form_kind",
            "closed_form_rel_deviation",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.p.to_string(),
            self.n.to_string(),
            self.radius.to_string(),
            self.lambda_ref.to_string(),
            self.zero_radius_error.to_string(),
            self.bisection_iterations.to_string(),
            self.ode_steps.to_string(),
            cell(self.closed_form),
            self.closed_form_kind.unwrap_or_default().to_string(),
            cell(self.closed_form_rel_deviation),
        ]
    }
}

/// Closed-form cross-checks exist for the interval and for p = 2; the
/// command fails (exit 1) if shooting disagrees with one by more than this.
const CLOSED_FORM_AGREEMENT: f64 = 1e-5;

pub fn eigen_ref(common: &Common, p: f64, n: usize, radius: f64) -> Result<Outcome, Failure> {
    let res = reference_eigenvalue_ball_with(p, n, radius, &shooting_config(common))?;
    let closed = if n == 1 {
        Some((eigen_1d_closed_form(p)? * radius.powf(-p), "interval"))
    } else if p == 2.0 {
        Some((eigen_2_ball_closed_form(n, radius)?, "bessel_zero"))
    } else {
        None
    };
    let deviation = closed.map(|(c, _)| (res.lambda_ref - c).abs() / c);
    let rec = EigenRefRecord {
        p: F(p),
        n,
        radius: F(radius),
        lambda_ref: F(res.lambda_ref),
        zero_radius_error: F(res.zero_radius_error),
        bisection_iterations: res.bisection_iterations,
        ode_steps: res.ode_steps,
        closed_form: closed.map(|c| F(c.0)),
        closed_form_kind: closed.map(|c| c.1),
        closed_form_rel_deviation: deviation.map(F),
    };
    emit(&[rec], true, format_of(common), common.out.as_deref())?;
    Ok(match deviation {
        Some(d) if d > CLOSED_FORM_AGREEMENT => Outcome::Fail,
        _ => Outcome::Pass,
    })
}

#[derive(Serialize)]
struct SweepRow {
    p: F,
    n: usize,
    #[serde(rename = "R")]
    radius: F,
    b: F,
    beta_star: F,
    r_star: F,
    lambda_lower: F,
    classical_eq6: F,
    beta_limit_bound: F,
    lambda_ref: Option<F>,
    improvement_ratio: F,
    bound_over_limit: F,
    bound_over_ref: Option<F>,
    classical_over_ref: Option<F>,
    limit_over_ref: Option<F>,
}

impl Record for SweepRow {
    fn header() -> Vec<&'static str> {
        vec![
            "p",
            "n",
            "R",
            "b",
            "beta_star",
            "r_star",
            "lambda_lower",
            "classical_eq6",
            "beta_limit_bound",
            "lambda_ref",
            "improvement_ratio",
            "bound_over_limit",
            "bound_over_ref",
            "classical_over_ref",
            "limit_over_ref",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.p.to_string(),
            self.n.to_string(),
            self.radius.to_string(),
            self.b.to_string(),
            self.beta_star.to_string(),
            self.r_star.to_string(),
            self.lambda_lower.to_string(),
            self.classical_eq6.to_string(),
            self.beta_limit_bound.to_string(),
            cell(self.lambda_ref),
            self.improvement_ratio.to_string(),
            self.bound_over_limit.to_string(),
            cell(self.bound_over_ref),
            cell(self.classical_over_ref),
            cell(self.limit_over_ref),
        ]
    }
}

fn sweep_row(
    p: f64,
    n: usize,
    radius: f64,
    b: Option<f64>,
    s: SPolicy<f64>,
    reference: Option<&ShootingConfig<f64>>,
) -> Result<SweepRow, Failure> {
    let bound = bound_for_ball(p, n, radius, b, s)?;
    let limit = beta_limit_bound(p, n, radius, b, s)?.value;
    let lref = match reference {
        Some(cfg) => Some(reference_eigenvalue_ball_with(p, n, radius, cfg)?.lambda_ref),
        None => None,
    };
    let over = |v: f64| lref.map(|l| F(v / l));
    Ok(SweepRow {
        p: F(p),
        n,
        radius: F(radius),
        b: F(bound.params.b()),
        beta_star: F(bound.beta_star),
        r_star: F(bound.r_star),
        lambda_lower: F(bound.lambda_lower),
        classical_eq6: F(bound.classical_eq6),
        beta_limit_bound: F(limit),
        lambda_ref: lref.map(F),
        improvement_ratio: F(bound.improvement_ratio),
        bound_over_limit: F(bound.lambda_lower / limit),
        bound_over_ref: over(bound.lambda_lower),
        classical_over_ref: over(bound.classical_eq6),
        limit_over_ref: over(limit),
    })
}

pub fn sweep(
    common: &Common,
    p: &crate::range::Grid,
    n: usize,
    radius: &crate::range::Grid,
    b: Option<&crate::range::Grid>,
    s: SPolicy<f64>,
    with_ref: bool,
) -> Result<Outcome, Failure> {
    // grid order: p outermost, then R, then b
    let b_values: Vec<Option<f64>> = match b {
        Some(g) => g.values().iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    let mut cells = Vec::new();
    for &pv in p.values() {
        for &rv in radius.values() {
            for &bv in &b_values {
                cells.push((pv, rv, bv));
            }
        }
    }
    let cfg = shooting_config(common);
    let reference = with_ref.then_some(&cfg);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = common.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Numeric(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<SweepRow, Failure>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(pv, rv, bv)| sweep_row(pv, n, rv, bv, s, reference))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    emit(&rows, false, common.format.unwrap_or(Format::Csv), common.out.as_deref())?;
    Ok(Outcome::Pass)
}
