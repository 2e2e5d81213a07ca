//! Initial-state constructors for the 1D realization.
//!
//! The staggered trigonometric families `sin(m pi x)` on the nodes and
//! `cos(m pi x)` on the midpoints block-diagonalize the discrete
//! generators exactly, so states built from the lowest modes are the
//! discrete analogue of smooth initial data.

use ndarray::{s, Array1};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::generator::{BlockGenerator, GeneratorKind};
use crate::metric::Metric;
use crate::operators::OperatorSet;

/// `sin(m pi x)` sampled at the interior nodes `x_j = j h`.
pub fn sine_nodes(n_interior: usize, mode: usize) -> Array1<f64> {
    let h = 1.0 / (n_interior as f64 + 1.0);
    Array1::from_iter(
        (1..=n_interior).map(|j| (mode as f64 * std::f64::consts::PI * j as f64 * h).sin()),
    )
}

/// `cos(m pi x)` sampled at the midpoints `(j + 1/2) h`.
pub fn cosine_midpoints(n_interior: usize, mode: usize) -> Array1<f64> {
    let h = 1.0 / (n_interior as f64 + 1.0);
    Array1::from_iter((0..=n_interior).map(|j| {
        (mode as f64 * std::f64::consts::PI * (j as f64 + 0.5) * h).cos()
    }))
}

pub fn zero_state(ops: &OperatorSet, kind: GeneratorKind) -> Array1<f64> {
    if kind.is_fourier() {
        Array1::zeros(ops.fourier_dim())
    } else {
        Array1::zeros(ops.cattaneo_dim())
    }
}

/// State with the given real modal amplitudes on mode `m`:
/// `(a sin_m, a' sin_m, b cos_m, c sin_m)`, the flux slot dropped for the
/// Fourier layout.
pub fn modal_state(ops: &OperatorSet, kind: GeneratorKind, mode: usize, amps: &[f64]) -> Array1<f64> {
    let n = ops.dims.velocity;
    let sin_m = sine_nodes(n, mode);
    let cos_m = cosine_midpoints(n, mode);
    let mut z = zero_state(ops, kind);
    z.slice_mut(s![0..n]).assign(&(amps[0] * &sin_m));
    z.slice_mut(s![n..2 * n]).assign(&(amps[1] * &sin_m));
    z.slice_mut(s![2 * n..2 * n + ops.dims.temperature])
        .assign(&(amps[2] * &cos_m));
    if !kind.is_fourier() {
        let off = ops.flux_offset();
        z.slice_mut(s![off..off + n]).assign(&(amps[3] * &sin_m));
    }
    z
}

/// Random combination of the lowest `n_modes` modal subspaces. The `w1`
/// amplitude is scaled by `1/(m pi)` so the energy is spread evenly.
pub fn smooth_random_state(
    ops: &OperatorSet,
    kind: GeneratorKind,
    n_modes: usize,
    rng: &mut impl Rng,
) -> Array1<f64> {
    let mut z = zero_state(ops, kind);
    for m in 1..=n_modes {
        let mu = m as f64 * std::f64::consts::PI;
        let amps = [
            rng.sample::<f64, _>(StandardNormal) / mu,
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ];
        z = z + modal_state(ops, kind, m, &amps);
    }
    z
}

/// Constant-temperature direction: the kernel of every generator kind
/// (an equilibrium with zero damping output).
pub fn constant_temperature_state(ops: &OperatorSet, kind: GeneratorKind) -> Array1<f64> {
    let mut z = zero_state(ops, kind);
    let n = ops.dims.velocity;
    z.slice_mut(s![2 * n..2 * n + ops.dims.temperature]).fill(1.0);
    z
}

/// Remove the M-orthogonal components of `z` along the given directions.
pub fn project_out(metric: &Metric, z: &Array1<f64>, directions: &[Array1<f64>]) -> Array1<f64> {
    let mut out = z.clone();
    for d in directions {
        let coeff = metric.inner(out.view(), d.view()) / metric.inner(d.view(), d.view());
        out = out - coeff * d;
    }
    out
}

/// Convenience: smooth random data with the conserved constant-temperature
/// component removed, suitable for decay experiments.
pub fn decaying_random_state(
    ops: &OperatorSet,
    gen: &BlockGenerator,
    n_modes: usize,
    rng: &mut impl Rng,
) -> Array1<f64> {
    let z = smooth_random_state(ops, gen.kind, n_modes, rng);
    let kernel = constant_temperature_state(ops, gen.kind);
    project_out(&gen.metric, &z, &[kernel])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::assemble_generator;
    use crate::grid::Grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_temperature_is_generator_kernel() {
        let ops = OperatorSet::example1(&Grid::new(17).unwrap(), 1.4).unwrap();
        for kind in [
            GeneratorKind::DampedCattaneo,
            GeneratorKind::ConservativeCattaneo,
            GeneratorKind::Fourier,
        ] {
            let gen = assemble_generator(&ops, kind).unwrap();
            let k = constant_temperature_state(&ops, kind);
            let gk = gen.g.dot(&k);
            assert!(gk.iter().all(|x| x.abs() < 1e-12), "{kind:?}");
        }
    }

    #[test]
    fn projection_removes_kernel_component() {
        let ops = OperatorSet::example1(&Grid::new(12).unwrap(), 1.0).unwrap();
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = decaying_random_state(&ops, &gen, 4, &mut rng);
        let k = constant_temperature_state(&ops, gen.kind);
        let overlap = gen.metric.inner(z.view(), k.view()).abs();
        assert!(overlap <= 1e-12 * gen.metric.norm(z.view()) * gen.metric.norm(k.view()));
    }

    #[test]
    fn modal_states_are_invariant_subspaces() {
        // a mode-m state stays in its 4-dimensional modal subspace
        let ops = OperatorSet::example1(&Grid::new(14).unwrap(), 1.0).unwrap();
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let z = modal_state(&ops, gen.kind, 3, &[1.0, 0.5, -0.3, 0.2]);
        let gz = gen.g.dot(&z);
        // G z must again be a combination of (sin_3, sin_3, cos_3, sin_3)
        let n = ops.dims.velocity;
        let sin3 = sine_nodes(n, 3);
        let cos3 = cosine_midpoints(n, 3);
        let check_parallel = |v: ndarray::ArrayView1<f64>, b: &Array1<f64>| {
            let bn = b.dot(b);
            let coef = v.dot(b) / bn;
            let resid = &v.to_owned() - &(coef * b);
            assert!(resid.iter().all(|x| x.abs() < 1e-9));
        };
        check_parallel(gz.slice(s![0..n]), &sin3);
        check_parallel(gz.slice(s![n..2 * n]), &sin3);
        check_parallel(gz.slice(s![2 * n..2 * n + ops.dims.temperature]), &cos3);
        check_parallel(gz.slice(s![ops.flux_offset()..]), &sin3);
    }
}
