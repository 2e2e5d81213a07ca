//! State-space inner products.
//!
//! The energy metric realizes the inner product
//! `<u,v> = <A1^(1/2) u1, A1^(1/2) v1> + <u2,v2> + <u3,v3> + tau <u4,v4>`
//! with all slot products weighted by the quadrature weight `h`, so that
//! `E(z) = z' M z / 2` is the physical energy. Fractional variants weigh
//! each slot by a (possibly negative) power of its governing operator.

use ndarray::{s, Array1, Array2, ArrayView1};
use ndarray_linalg::types::c64;
use ndarray_linalg::{Cholesky, UPLO};

use crate::error::{Error, Result};
use crate::generator::GeneratorKind;
use crate::linalg::sym_power;
use crate::operators::OperatorSet;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricLabel {
    /// Full Cattaneo energy space.
    Energy,
    /// Fourier energy space (three slots).
    EnergyFourier,
    /// Negative-order space with slot weights A1^(1-a), A1^(-a), A^(-a), A1^(-a).
    Fractional(f64),
}

impl MetricLabel {
    pub fn as_str(&self) -> String {
        match self {
            MetricLabel::Energy => "H".to_string(),
            MetricLabel::EnergyFourier => "H0".to_string(),
            MetricLabel::Fractional(a) => format!("H_minus_alpha({a})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Metric {
    /// Symmetric positive definite Gram matrix.
    pub m: Array2<f64>,
    /// Lower-triangular Cholesky factor, `m = chol * chol^T`.
    pub chol: Array2<f64>,
    pub label: MetricLabel,
}

impl Metric {
    pub fn from_matrix(m: Array2<f64>, label: MetricLabel) -> Result<Self> {
        let chol = m.cholesky(UPLO::Lower)?;
        Ok(Metric { m, chol, label })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn inner(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        x.dot(&self.m.dot(&y))
    }

    pub fn norm(&self, x: ArrayView1<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Energy `z' M z / 2`.
    pub fn energy(&self, z: ArrayView1<f64>) -> f64 {
        0.5 * self.inner(z, z)
    }

    pub fn complex_norm(&self, z: &Array1<c64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += (z[i].conj() * self.m[[i, j]] * z[j]).re;
            }
        }
        acc.max(0.0).sqrt()
    }
}

fn place_block(m: &mut Array2<f64>, offset: usize, block: &Array2<f64>, scale: f64) {
    let k = block.nrows();
    let mut view = m.slice_mut(s![offset..offset + k, offset..offset + k]);
    view.assign(block);
    view.mapv_inplace(|x| x * scale);
}

fn place_scaled_identity(m: &mut Array2<f64>, offset: usize, k: usize, scale: f64) {
    for j in 0..k {
        m[[offset + j, offset + j]] = scale;
    }
}

/// Energy metric `h * blockdiag(A1, I, I, tau I)` (Cattaneo) or
/// `h * blockdiag(A1, I, I)` (Fourier).
pub fn energy_metric(ops: &OperatorSet, kind: GeneratorKind) -> Result<Metric> {
    let h = ops.quad_weight;
    let n1 = ops.dims.velocity;
    let n2 = ops.dims.temperature;
    let (dim, label) = if kind.is_fourier() {
        (ops.fourier_dim(), MetricLabel::EnergyFourier)
    } else {
        (ops.cattaneo_dim(), MetricLabel::Energy)
    };
    let mut m = Array2::zeros((dim, dim));
    place_block(&mut m, 0, &ops.a1, h);
    place_scaled_identity(&mut m, n1, n1, h);
    place_scaled_identity(&mut m, 2 * n1, n2, h);
    if !kind.is_fourier() {
        place_scaled_identity(&mut m, 2 * n1 + n2, ops.dims.flux, h * ops.tau);
    }
    Metric::from_matrix(m, label)
}

/// Negative-order metric for the Cattaneo layout. Slot weights:
/// `A1^(1-a)` on `w1`, `A1^(-a)` on the velocity, `A^(-a)` on the
/// temperature (grounded on its constant kernel), `A1^(-a)` on the flux.
/// `alpha = 0` reproduces `energy_metric` exactly.
pub fn fractional_metric(ops: &OperatorSet, alpha: f64) -> Result<Metric> {
    if alpha < 0.0 {
        return Err(Error::invalid("alpha", format!("must be >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        let base = energy_metric(ops, GeneratorKind::DampedCattaneo)?;
        return Metric::from_matrix(base.m, MetricLabel::Fractional(0.0));
    }
    if ops.dims.flux != ops.dims.velocity {
        return Err(Error::DimensionMismatch(
            "fractional flux weight needs matching flux/velocity slot sizes".into(),
        ));
    }
    let h = ops.quad_weight;
    let n1 = ops.dims.velocity;
    let n2 = ops.dims.temperature;
    let dim = ops.cattaneo_dim();

    let slot1 = sym_power(&ops.a1, 1.0 - alpha, false)?;
    let slot2 = sym_power(&ops.a1, -alpha, false)?;
    let slot3 = sym_power(&ops.heat_operator(), -alpha, true)?;
    let slot4 = slot2.clone();

    let mut m = Array2::zeros((dim, dim));
    place_block(&mut m, 0, &slot1, h);
    place_block(&mut m, n1, &slot2, h);
    place_block(&mut m, 2 * n1, &slot3, h);
    place_block(&mut m, 2 * n1 + n2, &slot4, h * ops.tau);
    let m = 0.5 * (&m + &m.t());
    Metric::from_matrix(m, MetricLabel::Fractional(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::linalg::fro;
    use ndarray::Array1;
    use ndarray_linalg::{Eigh, UPLO};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn ops(n: usize, tau: f64) -> OperatorSet {
        OperatorSet::example1(&Grid::new(n).unwrap(), tau).unwrap()
    }

    #[test]
    fn cholesky_factorization_invariant() {
        let o = ops(10, 1.5);
        let m = energy_metric(&o, GeneratorKind::DampedCattaneo).unwrap();
        let rec = m.chol.dot(&m.chol.t());
        assert!(fro(&(&rec - &m.m)) <= 1e-13 * fro(&m.m));
    }

    #[test]
    fn flux_block_is_h_tau_identity() {
        let o = ops(3, 1.0);
        let m = energy_metric(&o, GeneratorKind::DampedCattaneo).unwrap();
        let h = o.quad_weight;
        let off = o.flux_offset();
        for j in 0..o.dims.flux {
            assert_eq!(m.m[[off + j, off + j]], h);
        }
    }

    #[test]
    fn displacement_energy_is_discrete_gradient_norm() {
        // z = (w1, 0, 0, 0): 2E = h w1' A1 w1 = h ||C* w1||^2 (discrete gradient)
        let o = ops(14, 1.0);
        let m = energy_metric(&o, GeneratorKind::DampedCattaneo).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w1: Array1<f64> =
            Array1::from_iter((0..o.dims.velocity).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let mut z = Array1::zeros(o.cattaneo_dim());
        z.slice_mut(s![0..o.dims.velocity]).assign(&w1);
        let grad = o.c_star.dot(&w1);
        let e2 = o.quad_weight * grad.dot(&grad);
        assert!((2.0 * m.energy(z.view()) - e2).abs() <= 1e-12 * e2);
    }

    #[test]
    fn tau_scales_flux_contribution_linearly() {
        let o1 = ops(9, 1.0);
        let o2 = ops(9, 2.0);
        let m1 = energy_metric(&o1, GeneratorKind::DampedCattaneo).unwrap();
        let m2 = energy_metric(&o2, GeneratorKind::DampedCattaneo).unwrap();
        let mut z = Array1::zeros(o1.cattaneo_dim());
        let off = o1.flux_offset();
        for j in 0..o1.dims.flux {
            z[off + j] = (j + 1) as f64;
        }
        assert!((m2.energy(z.view()) - 2.0 * m1.energy(z.view())).abs() < 1e-13);
    }

    #[test]
    fn fractional_alpha_zero_reproduces_energy_metric() {
        let o = ops(11, 0.8);
        let me = energy_metric(&o, GeneratorKind::DampedCattaneo).unwrap();
        let mf = fractional_metric(&o, 0.0).unwrap();
        assert_eq!(me.m, mf.m);
    }

    #[test]
    fn fractional_alpha_one_first_slot_identity() {
        let o = ops(7, 1.0);
        let mf = fractional_metric(&o, 1.0).unwrap();
        let n1 = o.dims.velocity;
        let h = o.quad_weight;
        let block = mf.m.slice(s![0..n1, 0..n1]).to_owned();
        let eye = Array2::<f64>::eye(n1) * h;
        assert!(fro(&(&block - &eye)) <= 1e-11 * h * (n1 as f64).sqrt());
    }

    #[test]
    fn fractional_norm_dominated_by_energy_norm() {
        // oracle: extreme-eigenvalue bound. With lambda_min(A1) > 1 the
        // negative powers contract, so c(alpha) <= 1 and the weaker norm
        // is dominated slot by slot.
        let o = ops(20, 1.3);
        let (vals, _) = o.a1.eigh(UPLO::Lower).unwrap();
        assert!(vals[0] > 1.0);
        let alpha = 0.5;
        let me = energy_metric(&o, GeneratorKind::DampedCattaneo).unwrap();
        let mf = fractional_metric(&o, alpha).unwrap();
        let c_alpha: f64 = 1.0; // lambda_min(A1)^(-alpha) < 1, kernel grounded at 1 <= 1
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let z: Array1<f64> = Array1::from_iter(
                (0..o.cattaneo_dim()).map(|_| rng.sample::<f64, _>(StandardNormal)),
            );
            assert!(mf.norm(z.view()) <= c_alpha * me.norm(z.view()) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn fractional_rejects_negative_alpha() {
        let o = ops(5, 1.0);
        assert!(fractional_metric(&o, -0.1).is_err());
    }
}
