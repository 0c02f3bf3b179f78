//! Gradient-based baseline: BFGS with central finite-difference gradients,
//! a strong-Wolfe line search, and a seeded multistart driver.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{OptRecord, Termination};

const MAX_LINE_SEARCH_TRIALS: usize = 25;
const MAX_STEP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BfgsConfig {
    pub max_iters: usize,
    pub grad_step: f64,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            grad_step: 1e-6,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            grad_tol: 1e-8,
            restarts: 100,
            seed: 0,
        }
    }
}

impl BfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "Wolfe constants need 0 < c1 < c2 < 1, got c1 = {}, c2 = {}",
                self.wolfe_c1, self.wolfe_c2
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if !(self.grad_step > 0.0) {
            return Err(Error::InvalidConfig("grad_step must be positive".into()));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::InvalidConfig("grad_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Central differences, two objective calls per coordinate.
pub fn fd_gradient<F>(f: &F, theta: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut x = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            x[i] = theta[i] + step;
            let up = f(&x);
            x[i] = theta[i] - step;
            let down = f(&x);
            x[i] = theta[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Objective wrapper that counts calls and tracks the best point seen.
struct Counted<'a, F: ?Sized> {
    f: &'a F,
    calls: Cell<u64>,
    best: RefCell<(f64, Vec<f64>)>,
    trace: RefCell<Vec<(u64, f64)>>,
}

impl<'a, F> Counted<'a, F>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    fn new(f: &'a F, d: usize) -> Self {
        Self {
            f,
            calls: Cell::new(0),
            best: RefCell::new((f64::INFINITY, vec![0.0; d])),
            trace: RefCell::new(Vec::new()),
        }
    }

    fn call(&self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        self.calls.set(self.calls.get() + 1);
        let mut best = self.best.borrow_mut();
        if v < best.0 {
            *best = (v, x.to_vec());
            self.trace.borrow_mut().push((self.calls.get(), v));
        }
        v
    }

    fn grad(&self, x: &[f64], step: f64) -> Vec<f64> {
        fd_gradient(&|y: &[f64]| self.call(y), x, step)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

/// A line-search trial point.
#[derive(Clone)]
struct Trial {
    alpha: f64,
    value: f64,
    /// Directional derivative and full gradient, when computed.
    slope: Option<(f64, Vec<f64>)>,
}

enum Step {
    /// Strong Wolfe conditions hold.
    Wolfe(Trial),
    /// Only sufficient decrease holds (trial cap reached).
    Armijo(Trial),
    Failed,
}

struct LineSearch<'a, 'f, F: ?Sized> {
    obj: &'a Counted<'f, F>,
    x: &'a [f64],
    p: &'a [f64],
    f0: f64,
    d0: f64,
    cfg: &'a BfgsConfig,
    trials: usize,
    /// Best point satisfying sufficient decrease, for the Armijo fallback.
    armijo: Option<Trial>,
}

impl<'a, 'f, F> LineSearch<'a, 'f, F>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    fn value(&mut self, alpha: f64) -> Trial {
        self.trials += 1;
        let value = self.obj.call(&axpy(self.x, alpha, self.p));
        let t = Trial {
            alpha,
            value,
            slope: None,
        };
        if self.sufficient(&t) && self.armijo.as_ref().is_none_or(|a| t.value < a.value) {
            self.armijo = Some(t.clone());
        }
        t
    }

    fn with_slope(&mut self, mut t: Trial) -> Trial {
        let g = self
            .obj
            .grad(&axpy(self.x, t.alpha, self.p), self.cfg.grad_step);
        let s = dot(&g, self.p);
        if let Some(a) = self.armijo.as_mut() {
            if a.alpha == t.alpha {
                a.slope = Some((s, g.clone()));
            }
        }
        t.slope = Some((s, g));
        t
    }

    fn sufficient(&self, t: &Trial) -> bool {
        t.value <= self.f0 + self.cfg.wolfe_c1 * t.alpha * self.d0 && t.value < self.f0
    }

    fn curvature(&self, slope: f64) -> bool {
        slope.abs() <= -self.cfg.wolfe_c2 * self.d0
    }

    fn exhausted(&self) -> bool {
        self.trials >= MAX_LINE_SEARCH_TRIALS
    }

    fn fallback(&mut self) -> Step {
        match self.armijo.take() {
            Some(t) => {
                let t = if t.slope.is_some() {
                    t
                } else {
                    self.with_slope(t)
                };
                Step::Armijo(t)
            }
            None => Step::Failed,
        }
    }

    fn search(mut self) -> Step {
        let start = Trial {
            alpha: 0.0,
            value: self.f0,
            slope: Some((self.d0, Vec::new())),
        };
        let mut prev = start;
        let mut alpha = 1.0;
        loop {
            if self.exhausted() {
                return self.fallback();
            }
            let t = self.value(alpha);
            if !t.value.is_finite() {
                return self.fallback();
            }
            if !self.sufficient(&t) || (prev.alpha > 0.0 && t.value >= prev.value) {
                return self.zoom(prev, t);
            }
            let t = self.with_slope(t);
            let slope = t.slope.as_ref().expect("slope").0;
            if self.curvature(slope) {
                return Step::Wolfe(t);
            }
            if slope >= 0.0 {
                return self.zoom(t, prev);
            }
            if alpha >= MAX_STEP {
                return self.fallback();
            }
            prev = t;
            alpha = (2.0 * alpha).min(MAX_STEP);
        }
    }

    fn zoom(mut self, mut lo: Trial, mut hi: Trial) -> Step {
        loop {
            if self.exhausted() || (hi.alpha - lo.alpha).abs() < 1e-16 {
                return self.fallback();
            }
            let alpha = interpolate(&lo, &hi);
            let t = self.value(alpha);
            if !self.sufficient(&t) || t.value >= lo.value {
                hi = t;
                continue;
            }
            let t = self.with_slope(t);
            let slope = t.slope.as_ref().expect("slope").0;
            if self.curvature(slope) {
                return Step::Wolfe(t);
            }
            if slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
    }
}

/// Minimizer of the cubic (or quadratic) model between two trials, kept
/// inside the central 80% of the bracket.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let width = b - a;
    let d_lo = lo.slope.as_ref().map(|s| s.0).unwrap_or(f64::NAN);
    let candidate = match &hi.slope {
        Some((d_hi, _)) if d_lo.is_finite() => {
            let d1 = d_lo + d_hi - 3.0 * (lo.value - hi.value) / (a - b);
            let disc = d1 * d1 - d_lo * d_hi;
            if disc >= 0.0 {
                let d2 = width.signum() * disc.sqrt();
                b - width * (d_hi + d2 - d1) / (d_hi - d_lo + 2.0 * d2)
            } else {
                f64::NAN
            }
        }
        _ if d_lo.is_finite() => {
            let curv = hi.value - lo.value - d_lo * width;
            if curv > 0.0 {
                a - d_lo * width * width / (2.0 * curv)
            } else {
                f64::NAN
            }
        }
        _ => f64::NAN,
    };
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    if candidate.is_finite() {
        candidate.clamp(left + margin, right - margin)
    } else {
        0.5 * (a + b)
    }
}

/// BFGS from `theta0`. Every objective call, including those made by finite
/// differences and the line search, is counted in the returned record.
pub fn bfgs_minimize<F>(f: &F, theta0: &[f64], cfg: &BfgsConfig) -> Result<OptRecord>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    cfg.validate()?;
    let d = theta0.len();
    if d == 0 {
        return Err(Error::InvalidConfig(
            "BFGS needs at least one parameter".into(),
        ));
    }
    let start = Instant::now();
    let obj = Counted::new(f, d);
    let mut x = theta0.to_vec();
    let mut fx = obj.call(&x);
    let mut g = obj.grad(&x, cfg.grad_step);
    let g0 = norm(&g);
    let mut h = scaled_identity(d, if g0 > 0.0 { 1.0 / g0 } else { 1.0 });
    let mut skipped_updates = 0u64;
    let mut status = Termination::IterationCap;

    for _ in 0..cfg.max_iters {
        if norm(&g) < cfg.grad_tol {
            status = Termination::Converged;
            break;
        }
        let mut p = mat_vec(&h, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
        let mut d0 = dot(&g, &p);
        if !(d0 < 0.0) {
            h = scaled_identity(d, 1.0 / norm(&g));
            p = g.iter().map(|v| -v / norm(&g)).collect();
            d0 = dot(&g, &p);
        }
        let ls = LineSearch {
            obj: &obj,
            x: &x,
            p: &p,
            f0: fx,
            d0,
            cfg,
            trials: 0,
            armijo: None,
        };
        let trial = match ls.search() {
            Step::Wolfe(t) | Step::Armijo(t) => t,
            Step::Failed => {
                status = Termination::LineSearchFailed;
                break;
            }
        };
        let (_, g_new) = trial.slope.expect("accepted steps carry a gradient");
        let x_new = axpy(&x, trial.alpha, &p);
        let improvement = fx - trial.value;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            bfgs_update(&mut h, &s, &y, sy);
        } else {
            skipped_updates += 1;
        }
        x = x_new;
        fx = trial.value;
        g = g_new;
        if improvement <= f64::EPSILON * fx.abs().max(1.0) {
            status = Termination::NoImprovement;
            break;
        }
    }
    let (best_value, best_theta) = obj.best.into_inner();
    Ok(OptRecord {
        best_theta,
        best_value,
        evals_used: obj.calls.get(),
        cache_hits: 0,
        trace: obj.trace.into_inner(),
        wall_time: start.elapsed().as_secs_f64(),
        status,
        skipped_updates,
    })
}

fn scaled_identity(d: usize, s: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = s;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|i| dot(&m[i * d..(i + 1) * d], v)).collect()
}

/// `H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`, with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let d = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..d {
        for j in 0..d {
            h[i * d + j] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Summary statistics of final values across restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartSummary {
    pub best: f64,
    pub median: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub finals: Vec<f64>,
}

impl MultistartSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let k = sorted.len();
        let median = if k % 2 == 1 {
            sorted[k / 2]
        } else {
            0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
        };
        Self {
            best: sorted[0],
            median,
            mean: values.iter().sum::<f64>() / k as f64,
            min: sorted[0],
            max: sorted[k - 1],
            finals: values.to_vec(),
        }
    }

    pub fn dispersion(&self) -> f64 {
        self.max - self.min
    }
}

/// Uniform starting points in `[0, 2π)^d`, drawn in order from the seed.
pub fn starting_points(d: usize, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..restarts)
        .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 * PI).collect())
        .collect()
}

/// Runs [`bfgs_minimize`] from `cfg.restarts` random starts (in parallel)
/// and summarizes the final values.
pub fn multistart<F>(
    f: &F,
    d: usize,
    cfg: &BfgsConfig,
) -> Result<(Vec<OptRecord>, MultistartSummary)>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    cfg.validate()?;
    let starts = starting_points(d, cfg.restarts, cfg.seed);
    let records = starts
        .par_iter()
        .map(|x0| bfgs_minimize(f, x0, cfg))
        .collect::<Result<Vec<_>>>()?;
    let finals: Vec<f64> = records.iter().map(|r| r.best_value).collect();
    Ok((records, MultistartSummary::from_values(&finals)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn gradient_of_quadratic_and_constant() {
        let g = fd_gradient(&|t: &[f64]| dot(t, t), &[1.0, 2.0], 1e-6);
        assert!((g[0] - 2.0).abs() < 1e-6 && (g[1] - 4.0).abs() < 1e-6);
        let g = fd_gradient(&|_: &[f64]| 3.5, &[0.3, -1.0, 2.0], 1e-6);
        assert!(g.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn quadratic_converges_quickly() {
        let a = [0.7, -1.3, 2.2];
        let f = |t: &[f64]| t.iter().zip(&a).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let cfg = BfgsConfig {
            max_iters: 5,
            ..BfgsConfig::default()
        };
        for start in [[0.0, 0.0, 0.0], [5.0, -4.0, 1.0], [-10.0, 3.0, 30.0]] {
            let rec = bfgs_minimize(&f, &start, &cfg).unwrap();
            for (x, y) in rec.best_theta.iter().zip(&a) {
                assert!((x - y).abs() < 1e-8, "{:?}", rec.best_theta);
            }
        }
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let rec = bfgs_minimize(&rosenbrock, &[-1.2, 1.0], &BfgsConfig::default()).unwrap();
        assert!((rec.best_theta[0] - 1.0).abs() < 1e-5, "{rec:?}");
        assert!((rec.best_theta[1] - 1.0).abs() < 1e-5);
        assert!(rec.trace_is_monotone());
        assert_eq!(rosenbrock(&rec.best_theta), rec.best_value);
    }

    #[test]
    fn calls_are_counted_exactly() {
        let calls = Cell::new(0u64);
        let f = |t: &[f64]| {
            calls.set(calls.get() + 1);
            rosenbrock(t)
        };
        let rec = bfgs_minimize(&f, &[0.5, 0.5], &BfgsConfig::default()).unwrap();
        assert_eq!(rec.evals_used, calls.get());
    }

    #[test]
    fn config_checks() {
        let bad = BfgsConfig {
            wolfe_c1: 0.95,
            ..BfgsConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = BfgsConfig {
            restarts: 0,
            ..BfgsConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(bfgs_minimize(&rosenbrock, &[], &BfgsConfig::default()).is_err());
    }

    #[test]
    fn single_restart_summary_is_the_record() {
        let cfg = BfgsConfig {
            restarts: 1,
            ..BfgsConfig::default()
        };
        let (recs, summary) = multistart(&|t: &[f64]| t[0].cos() + t[1].sin(), 2, &cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(summary.best, recs[0].best_value);
        assert_eq!(summary.median, recs[0].best_value);
        assert_eq!(summary.mean, recs[0].best_value);
        assert_eq!(summary.dispersion(), 0.0);
    }

    #[test]
    fn multistart_is_seed_deterministic() {
        let f = |t: &[f64]| (t[0] * 3.0).sin() * (t[1] * 2.0).cos() + 0.1 * t[0];
        let cfg = BfgsConfig {
            restarts: 8,
            seed: 11,
            ..BfgsConfig::default()
        };
        let (_, a) = multistart(&f, 2, &cfg).unwrap();
        let (_, b) = multistart(&f, 2, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn even_median() {
        let s = MultistartSummary::from_values(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 2.5);
        assert_eq!((s.min, s.max), (1.0, 4.0));
    }
}
