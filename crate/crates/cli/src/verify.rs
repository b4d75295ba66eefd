//! The `verify` subcommand: supersolution residual, Poisson closed form and
//! Hardy inequality suites over a parameter grid.

use std::io::Write;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use heb_core::hardy::{
    standard_trial_family, verify_convex_hardy, verify_convex_hardy_field, verify_linear_hardy,
};
use heb_core::poisson::{solve_radial, Source};
use heb_core::{validate, Params, QuadConfig, Raw, SPolicy, TrialFunction};

use crate::output::{emit, Record, F};
use crate::range::{Grid, SArg};
use crate::{Common, Failure, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma2,
    Poisson,
    Hardy,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, env = "HEB_P", allow_hyphen_values = true, default_value = "2.5,3,4")]
    p: Grid,
    #[arg(long, env = "HEB_N", default_value = "2,3")]
    n: Grid,
    /// Defaults to 1.2, 1.5 and (1+n)/2 for each n, keeping those below n and p
    #[arg(long, env = "HEB_BETA")]
    beta: Option<Grid>,
    #[arg(long = "R", env = "HEB_R", default_value = "0.5,1,2")]
    radius: Grid,
    /// Defaults to threshold - 0.1 for each p
    #[arg(long, env = "HEB_B", allow_hyphen_values = true)]
    b: Option<Grid>,
    #[arg(long, env = "HEB_S", default_value = "default")]
    s: SArg,
    /// Extra random trial functions per Hardy cell, drawn from --seed
    #[arg(long, default_value_t = 0)]
    trials: usize,
}

/// Residuals above `-RESIDUAL_SLACK` count as nonnegative.
const RESIDUAL_SLACK: f64 = 1e-12;
const SCAN_POINTS: usize = 10_000;
const POISSON_REL_TOL: f64 = 1e-8;

#[derive(Serialize)]
struct Check {
    suite: &'static str,
    check: &'static str,
    status: &'static str,
    p: F,
    n: usize,
    beta: F,
    #[serde(rename = "R")]
    radius: F,
    b: F,
    value: F,
    threshold: F,
    detail: String,
}

impl Record for Check {
    fn header() -> Vec<&'static str> {
        vec!["suite", "check", "status", "p", "n", "beta", "R", "b", "value", "threshold", "detail"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.suite.into(),
            self.check.into(),
            self.status.into(),
            self.p.to_string(),
            self.n.to_string(),
            self.beta.to_string(),
            self.radius.to_string(),
            self.b.to_string(),
            self.value.to_string(),
            self.threshold.to_string(),
            self.detail.clone(),
        ]
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

struct Cell {
    p: f64,
    n: usize,
    beta: f64,
    radius: f64,
    b: Option<f64>,
}

fn params(cell: &Cell, s: SPolicy<f64>) -> Result<Params, Failure> {
    let mut raw = Raw::new(cell.p, cell.n, cell.beta, cell.radius).with_s(s);
    if let Some(b) = cell.b {
        raw = raw.with_b(b);
    }
    Ok(validate(raw)?)
}

fn check(suite: &'static str, name: &'static str, pp: &Params, pass: bool, value: f64, threshold: f64, detail: String) -> Check {
    Check {
        suite,
        check: name,
        status: status(pass),
        p: F(pp.p()),
        n: pp.n(),
        beta: F(pp.beta()),
        radius: F(pp.radius()),
        b: F(pp.b()),
        value: F(value),
        threshold: F(threshold),
        detail,
    }
}

/// The residual is a function of `p`, `b` and `x` only, so this suite runs
/// one block per `(p, b)`. The scan covers the `x` range the weight reaches
/// under the chosen S; the minimum over the full `[1e-6, 0.999 x0]` is
/// reported alongside.
fn lemma2(pp: &Params) -> Result<Check, Failure> {
    let reached = pp.lemma2_scan(1e-6, pp.x_reach(), SCAN_POINTS)?;
    let full = pp.lemma2_scan(1e-6, 0.999 * pp.x0(), SCAN_POINTS)?;
    let pass = reached.min_residual >= -RESIDUAL_SLACK;
    let detail = format!(
        "min residual {:.3e} on x in [1e-6, {:.6}]; over [1e-6, 0.999 x0 = {:.6}] min {:.3e} at x = {:.6}",
        reached.min_residual,
        pp.x_reach(),
        0.999 * pp.x0(),
        full.min_residual,
        full.argmin_x
    );
    Ok(check("lemma2", "residual", pp, pass, reached.min_residual, -RESIDUAL_SLACK, detail))
}

fn poisson(pp: &Params, cfg: QuadConfig<f64>) -> Result<Check, Failure> {
    let h = Source::barrier(pp);
    let mut worst: f64 = 0.0;
    for i in 1..=9 {
        let r = pp.radius() * i as f64 / 10.0;
        let got = solve_radial(|x| h.eval(x), pp, r, cfg)?;
        let exact = pp.phi(r)?;
        worst = worst.max((got - exact).abs() / exact.abs());
    }
    let pass = worst <= POISSON_REL_TOL;
    let detail = format!("max relative deviation from R^kappa - r^kappa at r = 0.1R..0.9R: {worst:.3e}");
    Ok(check("poisson", "closed_form", pp, pass, worst, POISSON_REL_TOL, detail))
}

fn hardy(pp: &Params, extra: &[(f64, f64, f64)], cfg: QuadConfig<f64>) -> Result<[Check; 2], Failure> {
    let mut trials = standard_trial_family(pp.radius());
    for &(gamma, a, m) in extra {
        trials.push(TrialFunction::new(gamma, a, m, pp.radius())?);
    }
    let total = trials.len();
    let (mut lin_ok, mut cvx_ok, mut field_ok) = (0, 0, 0);
    let (mut lin_worst, mut cvx_worst) = (f64::INFINITY, f64::INFINITY);
    for u in &trials {
        let lin = verify_linear_hardy(u, pp, cfg)?;
        let cvx = verify_convex_hardy(u, pp, cfg)?;
        let field = verify_convex_hardy_field(u, pp, cfg)?;
        lin_ok += usize::from(lin.pass);
        cvx_ok += usize::from(cvx.pass());
        field_ok += usize::from(field.pass());
        lin_worst = lin_worst.min(lin.margin / lin.l.max(1.0));
        cvx_worst = cvx_worst.min(cvx.margin / cvx.l.max(1.0));
    }
    Ok([
        check(
            "hardy",
            "linear",
            pp,
            lin_ok == total,
            lin_worst,
            -1e-9,
            format!("{lin_ok}/{total} trials with L >= N; smallest (L-N)/max(L,1) {lin_worst:.3e}"),
        ),
        check(
            "hardy",
            "convex",
            pp,
            cvx_ok == total,
            cvx_worst,
            -1e-9,
            format!(
                "{cvx_ok}/{total} trials; smallest margin/max(L,1) {cvx_worst:.3e}; \
                 with field-weighted K {field_ok}/{total}"
            ),
        ),
    ])
}

fn random_trials(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                rng.random_range(1.0..4.0),
                rng.random_range(0.5..3.0),
                rng.random_range(1.0..4.0),
            )
        })
        .collect()
}

pub fn run(common: &Common, args: &VerifyArgs) -> Result<Outcome, Failure> {
    let ns = args.n.counts().map_err(Failure::Invalid)?;
    let bs: Vec<Option<f64>> = match &args.b {
        Some(g) => g.values().iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    let betas_for = |n: usize, p: f64| -> Vec<f64> {
        match &args.beta {
            Some(g) => g.values().to_vec(),
            None => {
                let mut v = vec![1.2, 1.5, (1.0 + n as f64) / 2.0];
                v.retain(|&b| b < n as f64 && b < p);
                v.dedup();
                v
            }
        }
    };
    let mut cfg = QuadConfig::default();
    if let Some(t) = common.tol {
        cfg = QuadConfig::with_tol(t);
    }
    let s = args.s.0;
    let extra = random_trials(common.seed, args.trials);
    let wants = |suite: Suite| args.suite == suite || args.suite == Suite::All;

    // Validate the whole grid first so bad input exits before any work.
    let mut cells = Vec::new();
    for &p in args.p.values() {
        for &n in &ns {
            for beta in betas_for(n, p) {
                for &radius in args.radius.values() {
                    for &b in &bs {
                        let cell = Cell { p, n, beta, radius, b };
                        params(&cell, s)?;
                        cells.push(cell);
                    }
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Failure::Invalid("empty parameter grid (every beta must lie in (1, min(n, p)))".into()));
    }

    let mut checks = Vec::new();
    if wants(Suite::Lemma2) {
        let mut seen: Vec<(f64, Option<f64>)> = Vec::new();
        for cell in &cells {
            if seen.contains(&(cell.p, cell.b)) {
                continue;
            }
            seen.push((cell.p, cell.b));
            checks.push(lemma2(&params(cell, s)?)?);
        }
    }
    for cell in &cells {
        let pp = params(cell, s)?;
        if wants(Suite::Poisson) {
            checks.push(poisson(&pp, cfg)?);
        }
        if wants(Suite::Hardy) && cell.p != cell.n as f64 {
            checks.extend(hardy(&pp, &extra, cfg)?);
        }
    }

    let passed = checks.iter().filter(|c| c.status == "PASS").count();
    match common.format {
        Some(format) => emit(&checks, false, format, common.out.as_deref())?,
        None => {
            let mut text = String::new();
            for c in &checks {
                text.push_str(&format!(
                    "{} {}/{} p={} n={} beta={} R={} b={}: {}\n",
                    c.status, c.suite, c.check, c.p.0, c.n, c.beta.0, c.radius.0, c.b.0, c.detail
                ));
            }
            text.push_str(&format!("summary: {passed}/{} checks passed\n", checks.len()));
            write_text(&text, common)?;
        }
    }
    Ok(if passed == checks.len() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn write_text(text: &str, common: &Common) -> Result<(), Failure> {
    let res = match &common.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::Numeric(format!("write failed: {e}")))
}
