//! Quantitative stability checks: weighted resolvent-norm scans with
//! growth-exponent fits, decay-rate fits on energy traces, the extremal
//! recurrence verifier, and the polynomial-decay certificate.

use ndarray::{Array1, Array2};
use ndarray_linalg::solve::LUFactorized;
use ndarray_linalg::types::c64;
use ndarray_linalg::{Factorize, Inverse, Solve, SVD};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{energy_trace, simulate, EnergyTrace};
use crate::error::{Error, Result};
use crate::generator::{assemble_generator, BlockGenerator, GeneratorKind};
use crate::operators::OperatorSet;
use crate::spectral::{eigen, Spectrum};
use crate::states::decaying_random_state;

/// Certified relative accuracy of the smallest-singular-value iteration.
const SIGMA_CERT_TOL: f64 = 1e-10;
/// Distance below which `i beta` is treated as colliding with the spectrum.
const COLLISION_TOL: f64 = 1e-12;

/// Reusable resolvent evaluator for one generator: caches the weighted
/// operator `B = L^T G L^{-T}` (so that the energy-metric operator norm
/// of the resolvent is the plain 2-norm of `(i beta - B)^{-1}`) and the
/// spectrum for collision checks.
pub struct ResolventProbe {
    weighted: Array2<f64>,
    spectrum: Spectrum,
}

impl ResolventProbe {
    pub fn new(gen: &BlockGenerator) -> Result<Self> {
        let lt = gen.metric.chol.t().to_owned();
        let lt_inv = lt.inv()?;
        let weighted = lt.dot(&gen.g).dot(&lt_inv);
        let spectrum = eigen(gen)?;
        Ok(ResolventProbe { weighted, spectrum })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `||(i beta - A)^{-1}||` in the energy metric.
    pub fn norm_at(&self, beta: f64) -> Result<f64> {
        let (dist, which) = self.spectrum.distance_to(beta);
        if dist < COLLISION_TOL {
            return Err(Error::EigenvalueCollision {
                beta,
                re: which.re,
                im: which.im,
                distance: dist,
            });
        }
        let dim = self.weighted.nrows();
        let mut a = self.weighted.mapv(|x| c64::new(-x, 0.0));
        for i in 0..dim {
            a[[i, i]] += c64::new(0.0, beta);
        }
        let sigma = smallest_singular_value(&a, beta)?;
        Ok(1.0 / sigma)
    }
}

/// Smallest singular value by inverse iteration on `A^{-1} A^{-H}` with an
/// independent residual certificate, falling back to a full SVD when the
/// iteration stalls.
fn smallest_singular_value(a: &Array2<c64>, seed_salt: f64) -> Result<f64> {
    let dim = a.nrows();
    let fac: LUFactorized<_> = match a.factorize() {
        Ok(f) => f,
        Err(_) => return svd_smallest(a),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed_salt.to_bits());
    let mut v: Array1<c64> = Array1::from_iter(
        (0..dim).map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
    );
    let nv = crate::linalg::cnorm(&v);
    v.mapv_inplace(|z| z / nv);
    let mut sigma_prev = f64::INFINITY;
    for _ in 0..100 {
        let w = fac.solve_h(&v)?;
        let u = fac.solve(&w)?;
        let nu = crate::linalg::cnorm(&u);
        if !nu.is_finite() || nu == 0.0 {
            return svd_smallest(a);
        }
        v = u.mapv(|z| z / nu);
        // certificate: sigma = ||A v||, residual ||A^H u - sigma v||
        let av = a.dot(&v);
        let sigma = crate::linalg::cnorm(&av);
        let u_left = av.mapv(|z| z / sigma);
        let ahu = a.t().mapv(|z| z.conj()).dot(&u_left);
        let resid = crate::linalg::cnorm(&(&ahu - &v.mapv(|z| z * sigma)));
        if resid <= SIGMA_CERT_TOL * sigma && (sigma_prev - sigma).abs() <= 1e-12 * sigma {
            return Ok(sigma);
        }
        sigma_prev = sigma;
    }
    svd_smallest(a)
}

fn svd_smallest(a: &Array2<c64>) -> Result<f64> {
    let (_, s, _) = a.svd(false, false)?;
    Ok(s[s.len() - 1])
}

/// One-off resolvent norm; prefer `ResolventProbe` when scanning.
pub fn resolvent_norm(gen: &BlockGenerator, beta: f64) -> Result<f64> {
    ResolventProbe::new(gen)?.norm_at(beta)
}

#[derive(Debug, Clone)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub residual: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct ResolventScan {
    pub betas: Vec<f64>,
    pub norms: Vec<f64>,
    pub kind: GeneratorKind,
    /// Least-squares exponent of `log r` vs `log beta` over the top decade;
    /// absent when spikes disable the fit.
    pub fit: Option<ExponentFit>,
    pub spike_detected: bool,
}

impl ResolventScan {
    pub fn sup_norm(&self) -> f64 {
        self.norms.iter().cloned().fold(0.0, f64::max)
    }
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    (slope, intercept, (ss / n).sqrt())
}

/// Scan the weighted resolvent norm along `i R+` and fit the growth
/// exponent over the top decade. A spike (a window point exceeding 10x
/// the window median) marks an eigenfrequency crossing and disables the
/// fit.
pub fn resolvent_scan(gen: &BlockGenerator, betas: &[f64]) -> Result<ResolventScan> {
    if betas.is_empty() || betas.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::invalid("betas", "need a positive grid"));
    }
    if betas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("betas", "grid must be strictly increasing"));
    }
    let probe = ResolventProbe::new(gen)?;
    let mut norms = Vec::with_capacity(betas.len());
    for &b in betas {
        norms.push(probe.norm_at(b)?);
    }
    let beta_max = betas[betas.len() - 1];
    let lo = beta_max / 10.0;
    let window: Vec<(f64, f64)> = betas
        .iter()
        .zip(&norms)
        .filter(|(b, _)| **b >= lo)
        .map(|(b, r)| (*b, *r))
        .collect();
    let mut sorted: Vec<f64> = norms.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    // an imaginary-axis pole shows as an interior local maximum towering
    // over the scan; monotone growth or decay is ordinary behavior
    let spike_detected = (1..norms.len() - 1).any(|i| {
        norms[i] > norms[i - 1] && norms[i] > norms[i + 1] && norms[i] > 10.0 * median
    });
    let fit = if spike_detected || window.len() < 3 {
        None
    } else {
        let xs: Vec<f64> = window.iter().map(|(b, _)| b.ln()).collect();
        let ys: Vec<f64> = window.iter().map(|(_, r)| r.ln()).collect();
        let (slope, intercept, residual) = fit_line(&xs, &ys);
        Some(ExponentFit {
            exponent: slope,
            intercept,
            residual,
            window: (lo, beta_max),
        })
    };
    Ok(ResolventScan {
        betas: betas.to_vec(),
        norms,
        kind: gen.kind,
        fit,
        spike_detected,
    })
}

/// Log-spaced grid helper.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min) || points < 2 {
        return Err(Error::invalid("beta_grid", "need 0 < min < max, points >= 2"));
    }
    let l0 = min.ln();
    let l1 = max.ln();
    Ok((0..points)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `E(t) ~ M exp(-omega t)`.
    Exponential,
    /// `E(t) ~ C (1+t)^(-p)`; the unit shift regularizes t = 0.
    Polynomial,
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    pub model: DecayModel,
    pub amplitude: f64,
    /// `omega` for the exponential model, the power `p` for the polynomial.
    pub rate: f64,
    /// `1/p` for polynomial fits.
    pub alpha_hat: Option<f64>,
    pub residual: f64,
    pub window: (f64, f64),
    /// Positive fitted rate.
    pub accepted: bool,
}

/// Fraction of the horizon excluded as initial transient.
pub const DECAY_TRANSIENT_FRACTION: f64 = 0.1;

pub fn decay_fit(trace: &EnergyTrace, model: DecayModel) -> Result<DecayFit> {
    let t_end = *trace.times.last().expect("nonempty trace");
    decay_fit_windowed(trace, model, DECAY_TRANSIENT_FRACTION * t_end, t_end)
}

pub fn decay_fit_windowed(
    trace: &EnergyTrace,
    model: DecayModel,
    t_lo: f64,
    t_hi: f64,
) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, e) in trace.times.iter().zip(&trace.energy) {
        if *t < t_lo || *t > t_hi {
            continue;
        }
        if !(*e > 0.0) {
            return Err(Error::invalid(
                "trace",
                format!("non-positive energy {e} at t = {t} inside the fit window"),
            ));
        }
        xs.push(match model {
            DecayModel::Exponential => *t,
            DecayModel::Polynomial => (1.0 + *t).ln(),
        });
        ys.push(e.ln());
    }
    if xs.len() < 3 {
        return Err(Error::invalid("trace", "fewer than 3 samples in the window"));
    }
    let (slope, intercept, residual) = fit_line(&xs, &ys);
    let rate = -slope;
    Ok(DecayFit {
        model,
        amplitude: intercept.exp(),
        rate,
        alpha_hat: match model {
            DecayModel::Polynomial => Some(1.0 / rate),
            DecayModel::Exponential => None,
        },
        residual,
        window: (t_lo, t_hi),
        accepted: rate > 0.0,
    })
}

#[derive(Debug, Clone)]
pub struct RussellRun {
    pub c: f64,
    pub delta: f64,
    pub energies: Vec<f64>,
    /// `M = max_k E_k (k+1)^(1/(1+delta))`.
    pub bound_constant: f64,
    pub max_recurrence_residual: f64,
}

/// Generate the extremal sequence of the recurrence
/// `E_{k+1} = E_k - C E_{k+1}^(2+delta)` by bisection and certify the
/// decay bound `E_k <= M (k+1)^(-1/(1+delta))`. The normalized sequence
/// must be non-increasing past a burn-in of a tenth of the horizon.
pub fn russell_verify(c: f64, delta: f64, e0: f64, horizon: usize) -> Result<RussellRun> {
    if !(c > 0.0) {
        return Err(Error::invalid("c", format!("must be > 0, got {c}")));
    }
    if !(delta > -1.0) {
        return Err(Error::invalid("delta", format!("must be > -1, got {delta}")));
    }
    if !(e0 > 0.0) {
        return Err(Error::invalid("e0", format!("must be > 0, got {e0}")));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be >= 1"));
    }
    let p = 2.0 + delta;
    let mut energies = Vec::with_capacity(horizon + 1);
    energies.push(e0);
    let mut max_resid = 0.0f64;
    let mut prev = e0;
    for _ in 0..horizon {
        // x + C x^p is strictly increasing with a sign change on (0, prev)
        let (mut lo, mut hi) = (0.0f64, prev);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + c * mid.powf(p) > prev {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let x = 0.5 * (lo + hi);
        if !(x > 0.0 && x < prev) {
            return Err(Error::NonFinite("russell bisection bracket".into()));
        }
        max_resid = max_resid.max((prev - (x + c * x.powf(p))).abs() / prev);
        energies.push(x);
        prev = x;
    }
    let power = 1.0 / (1.0 + delta);
    let normalized: Vec<f64> = energies
        .iter()
        .enumerate()
        .map(|(k, e)| e * ((k + 1) as f64).powf(power))
        .collect();
    let bound_constant = normalized.iter().cloned().fold(0.0, f64::max);
    if !bound_constant.is_finite() {
        return Err(Error::NonFinite("russell bound constant".into()));
    }
    let burn_in = horizon / 10;
    for k in burn_in..horizon {
        if normalized[k + 1] > normalized[k] * (1.0 + 1e-9) {
            return Err(Error::invalid(
                "russell",
                format!("normalized sequence increases at k = {k}"),
            ));
        }
    }
    Ok(RussellRun {
        c,
        delta,
        energies,
        bound_constant,
        max_recurrence_residual: max_resid,
    })
}

#[derive(Debug, Clone)]
pub struct DecayCertificate {
    pub alpha: f64,
    pub window: f64,
    /// `E(kT) (k+1)^(1/alpha)` normalized by the squared graph norm,
    /// worst case over the ensemble.
    pub normalized: Vec<f64>,
    pub sup_normalized: f64,
    pub energies_monotone: bool,
    /// Fitted polynomial power of the worst-decaying member.
    pub fitted_power: f64,
    /// Exponential model fits at least as well as the polynomial one.
    pub exponential_dominates: bool,
    pub satisfied: bool,
}

/// Sample `E(kT)` along damped trajectories of smooth data, normalize by
/// the squared graph norm, and check the bound shape of polynomial decay
/// with exponent `1/alpha`. Monotonicity of `E(kT)` is asserted; the rest
/// is report-only: either the fitted power reaches half of `1/alpha` or
/// the exponential model dominates outright.
pub fn polynomial_decay_certificate(
    ops: &OperatorSet,
    alpha: f64,
    window: f64,
    dt: f64,
    ensemble: usize,
    seed: u64,
) -> Result<DecayCertificate> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be > 0"));
    }
    let gen = assemble_generator(ops, GeneratorKind::DampedCattaneo)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let intervals = 8usize;
    let t_final = window * intervals as f64;
    let steps_per_window = (window / dt).round() as usize;
    let mut worst_normalized = vec![0.0f64; intervals + 1];
    let mut monotone = true;
    let mut fitted_power = f64::INFINITY;
    let mut exp_dominates = true;
    for _ in 0..ensemble.max(1) {
        let z0 = decaying_random_state(ops, &gen, 8, &mut rng);
        let traj = simulate(&gen, &z0, t_final, dt)?;
        // discrete graph norm ||z||^2 + ||G z||^2
        let gz = gen.g.dot(&z0);
        let graph_sq = gen.metric.inner(z0.view(), z0.view())
            + gen.metric.inner(gz.view(), gz.view());
        let samples: Vec<f64> = (0..=intervals)
            .map(|k| gen.metric.energy(traj.states[k * steps_per_window].view()))
            .collect();
        for w in samples.windows(2) {
            if w[1] > w[0] * (1.0 + 1e-12) {
                monotone = false;
            }
        }
        for (k, e) in samples.iter().enumerate() {
            let norm = e / graph_sq * ((k + 1) as f64).powf(1.0 / alpha);
            worst_normalized[k] = worst_normalized[k].max(norm);
        }
        let trace = energy_trace(&gen, ops, &traj);
        let fe = decay_fit(&trace, DecayModel::Exponential)?;
        let fp = decay_fit(&trace, DecayModel::Polynomial)?;
        fitted_power = fitted_power.min(fp.rate);
        if fe.residual > fp.residual {
            exp_dominates = false;
        }
    }
    let sup = worst_normalized.iter().cloned().fold(0.0, f64::max);
    if !monotone {
        return Err(Error::invalid(
            "certificate",
            "sampled energies are not non-increasing",
        ));
    }
    let satisfied = sup.is_finite() && (fitted_power >= 0.5 / alpha || exp_dominates);
    Ok(DecayCertificate {
        alpha,
        window,
        normalized: worst_normalized,
        sup_normalized: sup,
        energies_monotone: monotone,
        fitted_power,
        exponential_dominates: exp_dominates,
        satisfied,
    })
}

/// Energy trace of a damped run started on the slowest-decaying
/// oscillatory eigenpair (single decay rate, so the exponential model is
/// the right one); shared by the decay experiments and the CLI.
pub fn damped_energy_experiment(
    ops: &OperatorSet,
    kind: GeneratorKind,
    t_final: f64,
    dt: f64,
) -> Result<EnergyTrace> {
    if !kind.is_damped() {
        return Err(Error::invalid("kind", "decay experiments need a damped kind"));
    }
    let gen = assemble_generator(ops, kind)?;
    let spectrum = eigen(&gen)?;
    let mut best: Option<(f64, usize)> = None;
    for (i, l) in spectrum.eigenvalues.iter().enumerate() {
        if l.norm() < 1e-8 || l.im <= 1e-8 {
            continue; // conserved mode and lower half-plane twins
        }
        if best.map_or(true, |(re, _)| l.re > re) {
            best = Some((l.re, i));
        }
    }
    let (_, idx) = best.ok_or_else(|| Error::invalid("spectrum", "no oscillatory eigenpair"))?;
    let vecs = spectrum.eigenvectors.as_ref().expect("eigen keeps vectors");
    let z0 = vecs.column(idx).mapv(|z| z.re);
    let scale = gen.metric.norm(z0.view());
    let z0 = z0.mapv(|x| x / scale);
    let traj = simulate(&gen, &z0, t_final, dt)?;
    Ok(energy_trace(&gen, ops, &traj))
}

/// Measured two-sided implication of the resolvent-growth transfer: when
/// the damped Cattaneo scan exponent stays below `eps_cattaneo`, the
/// Fourier scan exponent must stay below `2 + eps_fourier`.
pub fn growth_implication(
    cattaneo_fit: &Option<ExponentFit>,
    fourier_fit: &Option<ExponentFit>,
    eps_cattaneo: f64,
    eps_fourier: f64,
) -> Option<bool> {
    match (cattaneo_fit, fourier_fit) {
        (Some(c), Some(f)) => {
            if c.exponent <= eps_cattaneo {
                Some(f.exponent <= 2.0 + eps_fourier)
            } else {
                Some(true)
            }
        }
        _ => None,
    }
}
