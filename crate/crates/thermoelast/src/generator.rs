//! Block generators of the first-order evolution systems.
//!
//! Three kinds are assembled from an `OperatorSet`:
//!
//! * damped Cattaneo — rows `(w1', -A1 w1 - C w2, C* w1' - A2 w3,
//!   (A2* w2 - w3)/tau)`;
//! * conservative Cattaneo — same with the `-w3/tau` relaxation removed;
//! * Fourier — the three-slot limit with `-A w2 = -A2 A2* w2` closing the
//!   temperature equation.
//!
//! Each generator carries its energy metric. The damped kinds are
//! dissipative in that metric, the conservative kind is skew-adjoint.

use std::ops::Range;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{energy_metric, Metric};
use crate::operators::OperatorSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    DampedCattaneo,
    ConservativeCattaneo,
    Fourier,
}

impl GeneratorKind {
    pub fn is_fourier(self) -> bool {
        matches!(self, GeneratorKind::Fourier)
    }

    /// True for the kinds whose energy is non-increasing.
    pub fn is_damped(self) -> bool {
        !matches!(self, GeneratorKind::ConservativeCattaneo)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::DampedCattaneo => "damped_cattaneo",
            GeneratorKind::ConservativeCattaneo => "conservative_cattaneo",
            GeneratorKind::Fourier => "fourier",
        }
    }
}

/// Ordered slot sizes of a block state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    slots: Vec<usize>,
}

impl Layout {
    pub fn new(slots: Vec<usize>) -> Self {
        Layout { slots }
    }

    pub fn dim(&self) -> usize {
        self.slots.iter().sum()
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_sizes(&self) -> &[usize] {
        &self.slots
    }

    pub fn range(&self, slot: usize) -> Range<usize> {
        let start: usize = self.slots[..slot].iter().sum();
        start..start + self.slots[slot]
    }
}

#[derive(Debug, Clone)]
pub struct BlockGenerator {
    pub g: Array2<f64>,
    pub layout: Layout,
    pub kind: GeneratorKind,
    pub metric: Metric,
}

impl BlockGenerator {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Row range of the flux slot (Cattaneo layouts only).
    pub fn flux_range(&self) -> Result<Range<usize>> {
        if self.kind.is_fourier() {
            return Err(Error::invalid("kind", "Fourier layout has no flux slot"));
        }
        Ok(self.layout.range(3))
    }

    /// Matrix mapping a state to the damping output: the flux slot for
    /// Cattaneo kinds, `A2* w2` for the Fourier kind. The squared
    /// `h`-weighted norm of the output is the instantaneous dissipation.
    pub fn output_matrix(&self, ops: &OperatorSet) -> Array2<f64> {
        let dim = self.dim();
        if self.kind.is_fourier() {
            let n3 = ops.dims.flux;
            let r = self.layout.range(2);
            let mut p = Array2::zeros((n3, dim));
            p.slice_mut(s![.., r]).assign(&ops.a2_star);
            p
        } else {
            let r = self.layout.range(3);
            let n3 = r.len();
            let mut p = Array2::zeros((n3, dim));
            for (j, col) in r.enumerate() {
                p[[j, col]] = 1.0;
            }
            p
        }
    }
}

fn put(g: &mut Array2<f64>, rows: Range<usize>, cols: Range<usize>, block: &Array2<f64>, scale: f64) {
    let mut view = g.slice_mut(s![rows, cols]);
    view.assign(block);
    if scale != 1.0 {
        view.mapv_inplace(|x| x * scale);
    }
}

fn put_identity(g: &mut Array2<f64>, rows: Range<usize>, cols: Range<usize>, scale: f64) {
    for (i, j) in rows.zip(cols) {
        g[[i, j]] = scale;
    }
}

/// Assemble the block generator of the requested kind with its energy metric.
pub fn assemble_generator(ops: &OperatorSet, kind: GeneratorKind) -> Result<BlockGenerator> {
    ops.validate()?;
    let n1 = ops.dims.velocity;
    let n2 = ops.dims.temperature;
    let n3 = ops.dims.flux;
    let layout = if kind.is_fourier() {
        Layout::new(vec![n1, n1, n2])
    } else {
        Layout::new(vec![n1, n1, n2, n3])
    };
    let dim = layout.dim();
    let mut g = Array2::zeros((dim, dim));
    let r = |i: usize| layout.range(i);

    put_identity(&mut g, r(0), r(1), 1.0);
    put(&mut g, r(1), r(0), &ops.a1, -1.0);
    put(&mut g, r(1), r(2), &ops.c_mat, -1.0);
    put(&mut g, r(2), r(1), &ops.c_star, 1.0);

    match kind {
        GeneratorKind::Fourier => {
            put(&mut g, r(2), r(2), &ops.heat_operator(), -1.0);
        }
        GeneratorKind::DampedCattaneo | GeneratorKind::ConservativeCattaneo => {
            let inv_tau = 1.0 / ops.tau;
            put(&mut g, r(2), r(3), &ops.a2, -1.0);
            put(&mut g, r(3), r(2), &ops.a2_star, inv_tau);
            if kind == GeneratorKind::DampedCattaneo {
                put_identity(&mut g, r(3), r(3), -inv_tau);
            }
        }
    }

    let metric = energy_metric(ops, kind)?;
    Ok(BlockGenerator {
        g,
        layout,
        kind,
        metric,
    })
}

/// The adjoint of the damped Cattaneo generator in the energy metric:
/// the skew part flips sign, the relaxation term survives. Satisfies
/// `<G x, y>_H = <x, G* y>_H` exactly and equals `M^{-1} G^T M`.
pub fn adjoint_generator(ops: &OperatorSet) -> Result<BlockGenerator> {
    ops.validate()?;
    let n1 = ops.dims.velocity;
    let n2 = ops.dims.temperature;
    let n3 = ops.dims.flux;
    let layout = Layout::new(vec![n1, n1, n2, n3]);
    let dim = layout.dim();
    let mut g = Array2::zeros((dim, dim));
    let r = |i: usize| layout.range(i);
    let inv_tau = 1.0 / ops.tau;

    put_identity(&mut g, r(0), r(1), -1.0);
    put(&mut g, r(1), r(0), &ops.a1, 1.0);
    put(&mut g, r(1), r(2), &ops.c_mat, 1.0);
    put(&mut g, r(2), r(1), &ops.c_star, -1.0);
    put(&mut g, r(2), r(3), &ops.a2, 1.0);
    put(&mut g, r(3), r(2), &ops.a2_star, -inv_tau);
    put_identity(&mut g, r(3), r(3), -inv_tau);

    let metric = energy_metric(ops, GeneratorKind::DampedCattaneo)?;
    Ok(BlockGenerator {
        g,
        layout,
        kind: GeneratorKind::DampedCattaneo,
        metric,
    })
}

/// Symmetric part of `M G` — the dissipation form. For the damped
/// Cattaneo kind this is exactly `-h * I` on the flux slot and zero
/// elsewhere; evaluating `Re<Gz,z>_M` through it avoids the large
/// cancelling magnitudes of the naive quadratic form.
pub fn dissipation_form(gen: &BlockGenerator) -> Array2<f64> {
    let mg = gen.metric.m.dot(&gen.g);
    0.5 * (&mg + &mg.t())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::linalg::{dot_compensated, fro};
    use ndarray::Array1;
    use ndarray_linalg::Solve;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn setup(n: usize, tau: f64) -> OperatorSet {
        OperatorSet::example1(&Grid::new(n).unwrap(), tau).unwrap()
    }

    fn randn(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
        Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
    }

    #[test]
    fn damped_block_pattern() {
        let ops = setup(3, 2.0);
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let r = |i| gen.layout.range(i);
        let g = &gen.g;
        // row 1: identity into the velocity slot
        assert_eq!(g[[0, 3]], 1.0);
        // row 2: -A1 and -C
        assert_eq!(
            g.slice(s![r(1), r(0)]).to_owned(),
            ops.a1.mapv(|x| -x)
        );
        assert_eq!(
            g.slice(s![r(1), r(2)]).to_owned(),
            ops.c_mat.mapv(|x| -x)
        );
        // row 3: C* and -A2
        assert_eq!(g.slice(s![r(2), r(1)]).to_owned(), ops.c_star);
        assert_eq!(g.slice(s![r(2), r(3)]).to_owned(), ops.a2.mapv(|x| -x));
        // row 4: A2*/tau and -I/tau
        assert_eq!(
            g.slice(s![r(3), r(2)]).to_owned(),
            ops.a2_star.mapv(|x| x / 2.0)
        );
        let d = g.slice(s![r(3), r(3)]).to_owned();
        assert_eq!(d[[0, 0]], -0.5);
        assert_eq!(d[[0, 1]], 0.0);
        // conservative drops only the relaxation entry
        let gc = assemble_generator(&ops, GeneratorKind::ConservativeCattaneo).unwrap();
        assert_eq!(gc.g.slice(s![r(3), r(3)]).sum(), 0.0);
        let mut diff = gc.g.clone() - g;
        diff.slice_mut(s![r(3), r(3)]).fill(0.0);
        assert_eq!(fro(&diff), 0.0);
    }

    #[test]
    fn fourier_third_block_is_minus_heat_operator() {
        let ops = setup(5, 1.0);
        let gen = assemble_generator(&ops, GeneratorKind::Fourier).unwrap();
        let r2 = gen.layout.range(2);
        let block = gen.g.slice(s![r2.clone(), r2]).to_owned();
        assert_eq!(block, ops.heat_operator().mapv(|x| -x));
    }

    #[test]
    fn dissipation_identity_damped() {
        // Re<Gz,z>_H = -h ||z4||^2, via the symmetrized form
        let ops = setup(50, 1.0);
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let sform = dissipation_form(&gen);
        let h = ops.quad_weight;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z = randn(&mut rng, gen.dim());
            let lhs = dot_compensated(z.view(), sform.dot(&z).view());
            let z4 = z.slice(s![gen.flux_range().unwrap()]);
            let rhs = -h * dot_compensated(z4, z4);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.abs(),
                "dissipation identity: {lhs:e} vs {rhs:e}"
            );
        }
    }

    #[test]
    fn conservative_skew_adjoint() {
        let ops = setup(30, 0.7);
        let gen = assemble_generator(&ops, GeneratorKind::ConservativeCattaneo).unwrap();
        let mg = gen.metric.m.dot(&gen.g);
        let resid = fro(&(&mg + &mg.t()));
        assert!(resid <= 1e-12 * fro(&mg));
    }

    #[test]
    fn damped_dissipation_form_negative_semidefinite() {
        use ndarray_linalg::{Eigh, UPLO};
        let ops = setup(20, 1.0);
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let s = dissipation_form(&gen);
        let (vals, _) = s.eigh(UPLO::Lower).unwrap();
        assert!(vals[vals.len() - 1] <= 1e-12);
    }

    #[test]
    fn adjoint_identity_and_oracle() {
        let ops = setup(25, 1.0);
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let adj = adjoint_generator(&ops).unwrap();
        let m = &gen.metric.m;

        // oracle: G* = M^{-1} G^T M, solved column by column
        let gtm = gen.g.t().dot(m);
        let mut oracle = Array2::zeros((gen.dim(), gen.dim()));
        for j in 0..gen.dim() {
            let col = m.solve(&gtm.column(j).to_owned()).unwrap();
            oracle.column_mut(j).assign(&col);
        }
        let scale = fro(&oracle).max(1.0);
        assert!(fro(&(&adj.g - &oracle)) <= 1e-10 * scale);

        // <G x, y>_H = <x, G* y>_H on random pairs
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let x = randn(&mut rng, gen.dim());
            let y = randn(&mut rng, gen.dim());
            let lhs = dot_compensated(gen.g.dot(&x).view(), m.dot(&y).view());
            let rhs = dot_compensated(x.view(), m.dot(&adj.g.dot(&y)).view());
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
        }

        // zero pair degenerates to 0 = 0
        let zero = Array1::zeros(gen.dim());
        assert_eq!(gen.g.dot(&zero).dot(&m.dot(&zero)), 0.0);
    }
}
