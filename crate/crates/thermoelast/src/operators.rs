//! Discrete realizations of the abstract operator family (A1, A2, A2*, C, C*).
//!
//! The built-in 1D realization discretizes the coupled wave/heat system on
//! (0, 1) with a staggered grid: displacement `w1`, velocity, and heat flux
//! `w3` sit on the interior nodes and satisfy homogeneous Dirichlet
//! conditions; the temperature `w2` sits on the midpoints and is free. The
//! single staggered difference matrix `E` (midpoints -> nodes, entries
//! +-1/h) then realizes every first-order operator, and all adjoint
//! identities hold exactly under the uniform quadrature weight `h`:
//!
//!   A2* = E,   A2 = E^T,   C = E,   C* = E^T,   A1 = E E^T.
//!
//! `A = A2 A2* = E^T E` is the midpoint Laplacian; it is only positive
//! semi-definite (constant temperature spans its kernel), which is what
//! makes the constant-temperature equilibrium of the generators explicit.

use ndarray::{s, Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Sizes of the three field families: velocity-type slots (`w1` and its
/// derivative), the temperature slot, and the flux slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub velocity: usize,
    pub temperature: usize,
    pub flux: usize,
}

#[derive(Debug, Clone)]
pub struct OperatorSet {
    /// Symmetric positive definite stiffness operator on the `w1` slot.
    pub a1: Array2<f64>,
    /// Flux -> temperature coupling (continuum -d/dx with flux Dirichlet).
    pub a2: Array2<f64>,
    /// Temperature -> flux coupling (continuum d/dx), exact transpose of `a2`.
    pub a2_star: Array2<f64>,
    /// Temperature -> velocity coupling of the wave equation.
    pub c_mat: Array2<f64>,
    /// Velocity -> temperature coupling, exact transpose of `c_mat`.
    pub c_star: Array2<f64>,
    /// Flux relaxation time of the Cattaneo closure.
    pub tau: f64,
    pub dims: Dims,
    /// Uniform quadrature weight of all L2 inner products.
    pub quad_weight: f64,
}

/// Staggered difference matrix `E` (n x (n+1)): `(E theta)_j = (theta_{j+1} - theta_j)/h`,
/// the second-order derivative of midpoint data evaluated at node `j+1`.
fn staggered_difference(n: usize, h: f64) -> Array2<f64> {
    let mut e = Array2::zeros((n, n + 1));
    let inv_h = 1.0 / h;
    for j in 0..n {
        e[[j, j]] = -inv_h;
        e[[j, j + 1]] = inv_h;
    }
    e
}

impl OperatorSet {
    /// Assemble the 1D coupled wave/heat realization on `grid` with
    /// relaxation time `tau`.
    pub fn example1(grid: &Grid, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
        }
        let n = grid.n_interior();
        let h = grid.spacing();
        let e = staggered_difference(n, h);
        let a1 = e.dot(&e.t());
        Ok(OperatorSet {
            a1,
            a2: e.t().to_owned(),
            a2_star: e.clone(),
            c_mat: e.clone(),
            c_star: e.t().to_owned(),
            tau,
            dims: Dims {
                velocity: n,
                temperature: n + 1,
                flux: n,
            },
            quad_weight: h,
        })
    }

    /// `A = A2 A2*`, the induced operator on the temperature slot
    /// (symmetric positive semi-definite; constants span its kernel).
    pub fn heat_operator(&self) -> Array2<f64> {
        self.a2.dot(&self.a2_star)
    }

    /// State dimension of the Cattaneo layout (w1, w1', w2, w3).
    pub fn cattaneo_dim(&self) -> usize {
        2 * self.dims.velocity + self.dims.temperature + self.dims.flux
    }

    /// State dimension of the Fourier layout (w1, w1', w2).
    pub fn fourier_dim(&self) -> usize {
        2 * self.dims.velocity + self.dims.temperature
    }

    /// Offset of the flux slot in the Cattaneo layout.
    pub fn flux_offset(&self) -> usize {
        2 * self.dims.velocity + self.dims.temperature
    }

    /// Input map `B`: a flux-slot vector `k` enters the full Cattaneo state
    /// as `(0, 0, 0, k / sqrt(tau))`.
    pub fn input_map(&self) -> Array2<f64> {
        let dim = self.cattaneo_dim();
        let n3 = self.dims.flux;
        let off = self.flux_offset();
        let mut b = Array2::zeros((dim, n3));
        let scale = 1.0 / self.tau.sqrt();
        for j in 0..n3 {
            b[[off + j, j]] = scale;
        }
        b
    }

    /// Output map `B*`: recovers `w3 / sqrt(tau)` from a Cattaneo state.
    /// Adjoint of `input_map` when the input space carries the
    /// tau-weighted inner product `tau * h * <.,.>`.
    pub fn output_map(&self, z: ArrayView1<f64>) -> Result<Array1<f64>> {
        if z.len() != self.cattaneo_dim() {
            return Err(Error::DimensionMismatch(format!(
                "state length {} != {}",
                z.len(),
                self.cattaneo_dim()
            )));
        }
        let off = self.flux_offset();
        Ok(z.slice(s![off..off + self.dims.flux])
            .mapv(|x| x / self.tau.sqrt()))
    }

    /// Validate the exact structural invariants of the set.
    pub fn validate(&self) -> Result<()> {
        let Dims {
            velocity: n1,
            temperature: n2,
            flux: n3,
        } = self.dims;
        let shapes = [
            ("a1", self.a1.dim(), (n1, n1)),
            ("a2", self.a2.dim(), (n2, n3)),
            ("a2_star", self.a2_star.dim(), (n3, n2)),
            ("c_mat", self.c_mat.dim(), (n1, n2)),
            ("c_star", self.c_star.dim(), (n2, n1)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::DimensionMismatch(format!(
                    "{name}: got {got:?}, want {want:?}"
                )));
            }
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid("tau", "must be > 0"));
        }
        let scale = crate::linalg::fro(&self.a2).max(1.0);
        if crate::linalg::fro(&(&self.a2_star - &self.a2.t())) > 1e-14 * scale {
            return Err(Error::invalid("a2_star", "not the exact adjoint of a2"));
        }
        let cscale = crate::linalg::fro(&self.c_mat).max(1.0);
        if crate::linalg::fro(&(&self.c_star - &self.c_mat.t())) > 1e-14 * cscale {
            return Err(Error::invalid("c_star", "not the exact adjoint of c_mat"));
        }
        let sym = crate::linalg::fro(&(&self.a1 - &self.a1.t()));
        if sym > 1e-14 * crate::linalg::fro(&self.a1) {
            return Err(Error::invalid("a1", "not symmetric"));
        }
        Ok(())
    }
}
