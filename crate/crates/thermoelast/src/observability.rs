//! Observability of the conservative flow through the flux output.
//!
//! The Gramian `G_T` with `x' G_T x = \int_0^T h ||(S(t)x)_4||^2 dt` is
//! assembled by propagating the full basis with the midpoint scheme and
//! accumulating trapezoid outer products. Its near-null directions (the
//! flow-to-output kernel; in the 1D realization the constant-temperature
//! equilibrium) are removed before the smallest metric-relative
//! eigenvalue is reported as the observability constant.

use ndarray::{Array1, Array2};
use ndarray_linalg::types::c64;
use ndarray_linalg::{Eigh, UPLO};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::Stepper;
use crate::error::{Error, Result};
use crate::generator::{BlockGenerator, GeneratorKind};
use crate::linalg::generalized_eigh;
use crate::metric::{fractional_metric, Metric};
use crate::operators::OperatorSet;
use crate::spectral::{modal_eigenvector, modal_matrix_at, rational_approx};

/// Relative eigenvalue threshold below which a Gramian direction counts
/// as unobservable.
pub const KERNEL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ObservabilityGramian {
    pub horizon: f64,
    pub dt: f64,
    pub matrix: Array2<f64>,
    /// Ascending eigenvalues of the Gramian.
    pub eigenvalues: Array1<f64>,
    /// Orthonormal eigenvectors, columns matching `eigenvalues`.
    pub basis: Array2<f64>,
    /// Number of leading eigenvalues below the kernel threshold.
    pub kernel_dim: usize,
}

impl ObservabilityGramian {
    /// Basis of the numerically unobservable subspace.
    pub fn kernel(&self) -> Array2<f64> {
        self.basis.slice(ndarray::s![.., ..self.kernel_dim]).to_owned()
    }

    pub fn quadratic_form(&self, x: &Array1<f64>) -> f64 {
        x.dot(&self.matrix.dot(x))
    }
}

/// Observability Gramian of the conservative generator over one horizon.
pub fn gramian(
    gen: &BlockGenerator,
    ops: &OperatorSet,
    horizon: f64,
    dt: f64,
) -> Result<ObservabilityGramian> {
    gramian_multi(gen, ops, &[horizon], dt).map(|mut v| v.pop().expect("one horizon"))
}

/// Gramians over several nested horizons from a single matrix flow.
/// Horizons must be ascending multiples of `dt` (within rounding).
pub fn gramian_multi(
    gen: &BlockGenerator,
    ops: &OperatorSet,
    horizons: &[f64],
    dt: f64,
) -> Result<Vec<ObservabilityGramian>> {
    if gen.kind != GeneratorKind::ConservativeCattaneo {
        return Err(Error::invalid("kind", "gramian needs the conservative kind"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("horizons", "need an ascending nonempty list"));
    }
    if horizons[0] < 0.0 {
        return Err(Error::invalid("horizons", "must be nonnegative"));
    }
    let dim = gen.dim();
    let output = gen.output_matrix(ops);
    let h = ops.quad_weight;
    let snapshots: Vec<usize> = horizons
        .iter()
        .map(|t| (t / dt).round() as usize)
        .collect();
    let total_steps = *snapshots.last().expect("nonempty");

    let mut flow = Array2::<f64>::eye(dim);
    let mut acc = Array2::<f64>::zeros((dim, dim));
    let y0 = output.dot(&flow);
    let first_term = y0.t().dot(&y0).mapv(|v| v * dt * h);
    acc += &first_term;
    let mut results = Vec::with_capacity(horizons.len());
    let emit = |acc: &Array2<f64>, last_term: &Array2<f64>, horizon: f64| {
        // trapezoid: full-weight sum minus half the end terms
        let g = acc - &(0.5 * &first_term) - &(0.5 * last_term);
        let g = 0.5 * (&g + &g.t());
        build_gramian(g, horizon, dt)
    };
    if snapshots[0] == 0 {
        // zero steps: the trapezoid corrections cancel the single term
        results.push(emit(&acc, &first_term, horizons[0])?);
    }
    if total_steps > 0 {
        let stepper = Stepper::new(&gen.g, dt)?;
        let mut last_term;
        for k in 1..=total_steps {
            flow = stepper.step_block(&flow);
            let y = output.dot(&flow);
            last_term = y.t().dot(&y).mapv(|v| v * dt * h);
            acc += &last_term;
            if let Some(pos) = snapshots.iter().position(|&s| s == k) {
                results.push(emit(&acc, &last_term, horizons[pos])?);
            }
        }
    }
    if results.len() != horizons.len() {
        return Err(Error::invalid(
            "horizons",
            "horizons must be distinct multiples of dt",
        ));
    }
    Ok(results)
}

fn build_gramian(g: Array2<f64>, horizon: f64, dt: f64) -> Result<ObservabilityGramian> {
    let (vals, vecs) = g.eigh(UPLO::Lower)?;
    let vmax = vals.iter().cloned().fold(0.0f64, f64::max);
    let kernel_dim = vals.iter().filter(|&&v| v < KERNEL_THRESHOLD * vmax.max(1e-300)).count();
    Ok(ObservabilityGramian {
        horizon,
        dt,
        matrix: g,
        eigenvalues: vals,
        basis: vecs,
        kernel_dim,
    })
}

#[derive(Debug, Clone)]
pub struct ObservabilityReport {
    pub horizon: f64,
    pub alpha: f64,
    pub c_obs: f64,
    pub kernel_dim: usize,
    pub restricted: bool,
    pub metric_label: String,
    /// Per-slot energy-norm shares of the minimizing direction.
    pub minimizing_direction_norms: Vec<f64>,
    pub minimizer: Array1<f64>,
}

fn slot_norms(gen_layout: &crate::generator::Layout, metric: &Metric, x: &Array1<f64>) -> Vec<f64> {
    (0..gen_layout.slot_count())
        .map(|s| {
            let r = gen_layout.range(s);
            let mut masked = Array1::<f64>::zeros(x.len());
            masked.slice_mut(ndarray::s![r.clone()]).assign(&x.slice(ndarray::s![r]));
            metric.norm(masked.view())
        })
        .collect()
}

/// Smallest generalized eigenvalue of `(G_T, M)`, optionally restricted to
/// the orthogonal complement of the Gramian kernel.
pub fn observability_constant(
    g: &ObservabilityGramian,
    layout: &crate::generator::Layout,
    metric: &Metric,
    restrict_kernel: bool,
) -> Result<ObservabilityReport> {
    let dim = g.matrix.nrows();
    if metric.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "metric dim {} != gramian dim {dim}",
            metric.dim()
        )));
    }
    let (c_obs, minimizer) = if restrict_kernel && g.kernel_dim > 0 {
        let q = g.basis.slice(ndarray::s![.., g.kernel_dim..]).to_owned();
        let a = q.t().dot(&g.matrix).dot(&q);
        let b = q.t().dot(&metric.m).dot(&q);
        let (vals, vecs) = generalized_eigh(&a, &b)?;
        (vals[0].max(0.0), q.dot(&vecs.column(0).to_owned()))
    } else {
        let (vals, vecs) = generalized_eigh(&g.matrix, &metric.m)?;
        (vals[0].max(0.0), vecs.column(0).to_owned())
    };
    Ok(ObservabilityReport {
        horizon: g.horizon,
        alpha: match metric.label {
            crate::metric::MetricLabel::Fractional(a) => a,
            _ => 0.0,
        },
        c_obs,
        kernel_dim: g.kernel_dim,
        restricted: restrict_kernel,
        metric_label: metric.label.as_str(),
        minimizing_direction_norms: slot_norms(layout, metric, &minimizer),
        minimizer,
    })
}

/// Observability constant in the weakened negative-order metric.
pub fn weak_observability_constant(
    g: &ObservabilityGramian,
    layout: &crate::generator::Layout,
    ops: &OperatorSet,
    alpha: f64,
    restrict_kernel: bool,
) -> Result<ObservabilityReport> {
    let metric = fractional_metric(ops, alpha)?;
    observability_constant(g, layout, &metric, restrict_kernel)
}

/// One exponential of the two-branch eigenfamily.
#[derive(Debug, Clone)]
pub struct InghamMode {
    pub mode: usize,
    pub lambda: c64,
    /// Flux amplitude of the unit-displacement eigenvector.
    pub output_amp: c64,
}

/// The modal eigenfamily of the conservative system up to `n_max`
/// (four branches per mode: both frequencies, both signs).
pub fn ingham_family(tau: f64, n_max: usize) -> Result<Vec<InghamMode>> {
    use ndarray_linalg::Eig;
    let mut fam = Vec::with_capacity(4 * n_max);
    for mode in 1..=n_max {
        let mu = mode as f64 * std::f64::consts::PI;
        let m = modal_matrix_at(mu, tau, GeneratorKind::ConservativeCattaneo);
        let (vals, _vecs): (Array1<c64>, Array2<c64>) = m.eig()?;
        let mut vals: Vec<c64> = vals.to_vec();
        vals.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).expect("finite"));
        for lambda in vals {
            let v = modal_eigenvector(mu, lambda);
            fam.push(InghamMode {
                mode,
                lambda,
                output_amp: v[3],
            });
        }
    }
    Ok(fam)
}

/// Ratio of the output energy of an eigenfamily superposition to the
/// weighted coefficient norm `sum |lambda_j a_j|^2`. The spatial integral
/// uses exact sine orthogonality; the time integral composite Simpson.
pub fn exponential_sum_ratio(
    family: &[InghamMode],
    coeffs: &[c64],
    horizon: f64,
    quad_points: usize,
) -> f64 {
    assert_eq!(family.len(), coeffs.len());
    let nq = quad_points.max(4) / 2 * 2;
    let dtq = horizon / nq as f64;
    let n_max = family.iter().map(|f| f.mode).max().unwrap_or(0);
    let mut numerator = 0.0;
    for mode in 1..=n_max {
        let members: Vec<usize> = (0..family.len()).filter(|&i| family[i].mode == mode).collect();
        if members.is_empty() {
            continue;
        }
        let mut sq = vec![0.0f64; nq + 1];
        for (q, s) in sq.iter_mut().enumerate() {
            let t = q as f64 * dtq;
            let mut f = c64::new(0.0, 0.0);
            for &i in &members {
                f += coeffs[i] * family[i].output_amp * (family[i].lambda * t).exp();
            }
            *s = f.norm_sqr();
        }
        let mut integral = sq[0] + sq[nq];
        for (q, s) in sq.iter().enumerate().take(nq).skip(1) {
            integral += if q % 2 == 1 { 4.0 * s } else { 2.0 * s };
        }
        integral *= dtq / 3.0;
        numerator += 0.5 * integral; // \int_0^1 sin^2(n pi x) dx = 1/2
    }
    let denominator: f64 = family
        .iter()
        .zip(coeffs)
        .map(|(f, c)| (f.lambda * c).norm_sqr())
        .sum();
    numerator / denominator
}

#[derive(Debug, Clone)]
pub struct InghamReport {
    pub tau: f64,
    pub horizon: f64,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_ratio: f64,
    pub frequency_source: &'static str,
}

/// Probe the lower bound of the output energy over random eigenfamily
/// superpositions. Refused when `sqrt(tau/(1+tau))` is rational or the
/// family has (near-)duplicate frequencies: the gap hypothesis behind
/// the bound fails.
pub fn ingham_direct_check(
    tau: f64,
    horizon: f64,
    n_max: usize,
    trials: usize,
    seed: u64,
) -> Result<InghamReport> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", "must be > 0"));
    }
    if !(horizon > 2.0) {
        return Err(Error::invalid("horizon", "the bound needs T > 2"));
    }
    if n_max == 0 || trials == 0 {
        return Err(Error::invalid("n_max/trials", "must be >= 1"));
    }
    let ratio = (tau / (1.0 + tau)).sqrt();
    if let Some((p, q)) = rational_approx(ratio, 64) {
        return Err(Error::GapHypothesis(format!(
            "sqrt(tau/(1+tau)) = {p}/{q} is rational; branch frequencies collide"
        )));
    }
    let family = ingham_family(tau, n_max)?;
    let mut freqs: Vec<f64> = family.iter().map(|f| f.lambda.im.abs()).collect();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup_by(|a, b| *a == *b); // signed pairs share |Im|
    let fmax = *freqs.last().expect("nonempty");
    for w in freqs.windows(2) {
        if w[1] - w[0] < 1e-8 * fmax {
            return Err(Error::GapHypothesis(format!(
                "duplicate frequencies {} and {}",
                w[0], w[1]
            )));
        }
    }
    let quad_points = ((fmax * horizon / 0.15).ceil() as usize).clamp(4096, 1 << 20);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..trials {
        let coeffs: Vec<c64> = (0..family.len())
            .map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let r = exponential_sum_ratio(&family, &coeffs, horizon, quad_points);
        min_ratio = min_ratio.min(r);
    }
    Ok(InghamReport {
        tau,
        horizon,
        n_max,
        trials,
        seed,
        min_ratio,
        frequency_source: "modal_oracle",
    })
}

/// Random M-normalized state, shared by Gramian tests.
pub fn random_unit_state(metric: &Metric, rng: &mut impl Rng) -> Array1<f64> {
    let z: Array1<f64> =
        Array1::from_iter((0..metric.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let n = metric.norm(z.view());
    z.mapv(|x| x / n)
}
