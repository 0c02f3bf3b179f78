//! Fast invariant checks runnable from the binary.

use std::f64::consts::TAU;

use anyhow::{ensure, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttvqe::pauli::TFIM_CRITICAL_GROUND_ENERGIES;
use ttvqe::tt::maxvol::dominance;
use ttvqe::tt::{cross_approx_2d, maxvol, CrossConfig};
use ttvqe::{
    build_hva, depolarize, make_objective, run_noisy, run_pure, run_vqe, tfim, ttopt_minimize,
    AnsatzKind, BfgsConfig, DensityMatrix, GridSpec, NoiseModel, Optimizer, StateVector,
    TTOptConfig, VqeProblem,
};

pub struct Check {
    pub name: &'static str,
    pub outcome: Result<()>,
}

type Probe = fn() -> Result<()>;

pub fn run() -> Vec<Check> {
    let checks: [(&'static str, Probe); 8] = [
        ("ground energies", ground_energies),
        ("pure and noiseless density runs agree", pure_vs_density),
        ("depolarizing channel", channel),
        ("variational bound", variational_bound),
        ("maxvol dominance", maxvol_dominance),
        ("cross approximation", cross),
        ("ttopt separable minimum", ttopt_separable),
        ("counter integrity", counters),
    ];
    checks
        .into_iter()
        .map(|(name, f)| Check { name, outcome: f() })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ground_energies() -> Result<()> {
    let e2 = tfim(2, 1.0)?.ground_energy()?;
    ensure!((e2 + 5f64.sqrt()).abs() < 1e-12, "n=2 gives {e2}");
    ensure!(tfim(1, 1.0)?.ground_energy()? == -1.0, "n=1 is not -1");
    for &(n, e) in TFIM_CRITICAL_GROUND_ENERGIES.iter().filter(|f| f.0 <= 6) {
        let dense = tfim(n, 1.0)?.ground_energy()?;
        ensure!((dense - e).abs() < 1e-12, "fixture n={n}: {e} vs {dense}");
    }
    Ok(())
}

fn pure_vs_density() -> Result<()> {
    let mut r = rng(1);
    let c = build_hva(4, 2)?;
    let h = tfim(4, 1.0)?;
    for _ in 0..5 {
        let theta: Vec<f64> = (0..4).map(|_| r.random::<f64>() * TAU).collect();
        let psi = run_pure(&c, &theta, &StateVector::zero(4))?;
        ensure!((psi.norm() - 1.0).abs() < 1e-12, "norm drift");
        let rho = run_noisy(&c, &theta, &NoiseModel::depolarizing(0.0)?)?;
        ensure!(
            rho.max_abs_diff(&psi.to_density()) < 1e-10,
            "state mismatch"
        );
        let (a, b) = (h.expectation_pure(&psi)?, h.expectation_mixed(&rho)?);
        ensure!((a - b).abs() < 1e-10, "energy mismatch {a} vs {b}");
    }
    Ok(())
}

fn channel() -> Result<()> {
    let c = build_hva(3, 1)?;
    let rho = run_noisy(&c, &[0.4, 1.1], &NoiseModel::depolarizing(0.05)?)?;
    for (l1, l2) in [(0.1, 0.3), (0.005, 0.7)] {
        let out = depolarize(&rho, &[1, 2], l1)?;
        ensure!((out.trace().re - 1.0).abs() < 1e-12, "trace not preserved");
        let twice = depolarize(&out, &[1, 2], l2)?;
        let once = depolarize(&rho, &[1, 2], 1.0 - (1.0 - l1) * (1.0 - l2))?;
        ensure!(
            twice.max_abs_diff(&once) < 1e-12,
            "composition law violated"
        );
    }
    let e = tfim(5, 1.0)?.expectation_mixed(&DensityMatrix::maximally_mixed(5))?;
    ensure!(e.abs() < 1e-12, "maximally mixed energy {e}");
    Ok(())
}

fn variational_bound() -> Result<()> {
    let mut r = rng(2);
    for lambda in [0.0, 0.005] {
        for kind in [AnsatzKind::Hva, AnsatzKind::Hea] {
            let noise = if lambda > 0.0 {
                NoiseModel::depolarizing(lambda)?
            } else {
                NoiseModel::noiseless()
            };
            let p = VqeProblem::tfim(4, 1.0, kind, 2, noise)?;
            let exact = p.exact_energy()?;
            let obj = make_objective(&p)?;
            for _ in 0..5 {
                let theta: Vec<f64> = (0..p.dim()).map(|_| r.random::<f64>() * TAU).collect();
                let e = obj.energy(&theta)?;
                ensure!(e >= exact - 1e-10, "{kind} λ={lambda}: {e} below {exact}");
            }
        }
    }
    Ok(())
}

fn maxvol_dominance() -> Result<()> {
    let mut r = rng(3);
    for _ in 0..50 {
        let b = DMatrix::from_fn(64, 4, |_, _| r.random::<f64>() * 2.0 - 1.0);
        let rows = maxvol(&b, 0.01)?;
        let dom = dominance(&b, &rows)?;
        ensure!(dom <= 1.01 + 1e-12, "dominance {dom}");
    }
    Ok(())
}

fn cross() -> Result<()> {
    let mut r = rng(4);
    let u = DMatrix::from_fn(40, 2, |_, _| r.random::<f64>() * 2.0 - 1.0);
    let v = DMatrix::from_fn(2, 30, |_, _| r.random::<f64>() * 2.0 - 1.0);
    let a = u * v;
    let cfg = CrossConfig {
        rank: 2,
        ..CrossConfig::default()
    };
    let res = cross_approx_2d(|i, j| a[(i, j)], (40, 30), &cfg)?;
    let err = (res.reconstruct()? - &a).amax();
    ensure!(err < 1e-8, "reconstruction error {err}");
    ensure!(res.best_value.abs() == a.amax(), "missed the largest entry");
    Ok(())
}

fn ttopt_separable() -> Result<()> {
    let grid = GridSpec::angles(4);
    let phases = [0.3, 1.7, 2.9, 4.4];
    let f = |t: &[f64]| {
        t.iter()
            .zip(phases)
            .map(|(x, p)| (x + p).sin())
            .sum::<f64>()
    };
    let rec = ttopt_minimize(&f, &grid, &TTOptConfig::default())?;
    // Separable: the grid minimum is the sum of per-axis minima.
    let exact: f64 = phases
        .iter()
        .map(|p| {
            (0..256)
                .map(|k| (TAU * k as f64 / 256.0 + p).sin())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    ensure!(
        (rec.best_value - exact).abs() < 1e-12,
        "{} vs grid minimum {exact}",
        rec.best_value
    );
    Ok(())
}

fn counters() -> Result<()> {
    let p = VqeProblem::tfim(3, 1.0, AnsatzKind::Hva, 2, NoiseModel::noiseless())?;
    let opt = Optimizer::Bfgs(BfgsConfig {
        restarts: 4,
        ..BfgsConfig::default()
    });
    let res = run_vqe(&p, &opt)?;
    let obj = make_objective(&p)?;
    let (records, _) = ttvqe::multistart(
        &|t: &[f64]| obj.value(t),
        p.dim(),
        &BfgsConfig {
            restarts: 4,
            ..BfgsConfig::default()
        },
    )?;
    let total: u64 = records.iter().map(|r| r.evals_used).sum();
    ensure!(
        total == obj.calls(),
        "records count {total}, objective counted {}",
        obj.calls()
    );
    ensure!(
        res.record.evals_used == total,
        "run_vqe reports {}",
        res.record.evals_used
    );
    ensure!(
        res.rel_error == res.rel_error_of(res.best_energy()),
        "stored rel_error disagrees"
    );
    Ok(())
}
