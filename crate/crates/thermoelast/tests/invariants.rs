//! Property-based invariants of the discrete realization.

use ndarray::Array1;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thermoelast::dynamics::{energy_balance_residual, energy_trace, simulate};
use thermoelast::generator::dissipation_form;
use thermoelast::linalg::dot_compensated;
use thermoelast::stability::russell_verify;
use thermoelast::{assemble_generator, fractional_metric, GeneratorKind, Grid, OperatorSet};

fn randn(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_scaling(n in 2usize..240) {
        let g = Grid::new(n).unwrap();
        prop_assert!((g.spacing() * (n as f64 + 1.0) - 1.0).abs() <= 4.0 * f64::EPSILON);
        prop_assert!(g.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
        prop_assert!(g.midpoints().iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn adjointness_and_dissipation(n in 2usize..80, tau in 0.05f64..8.0, seed in 0u64..1000) {
        let grid = Grid::new(n).unwrap();
        let ops = OperatorSet::example1(&grid, tau).unwrap();
        let h = ops.quad_weight;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // exact discrete adjointness of A2/A2* and C/C*
        let q = randn(&mut rng, ops.dims.flux);
        let theta = randn(&mut rng, ops.dims.temperature);
        let lhs = h * dot_compensated(ops.a2.dot(&q).view(), theta.view());
        let rhs = h * dot_compensated(q.view(), ops.a2_star.dot(&theta).view());
        let scale = (q.dot(&q).sqrt() * theta.dot(&theta).sqrt() * h).max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);

        // dissipation identity through the symmetrized form
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let sform = dissipation_form(&gen);
        let z = randn(&mut rng, gen.dim());
        let got = dot_compensated(z.view(), sform.dot(&z).view());
        let flux = gen.flux_range().unwrap();
        let z4 = z.slice(ndarray::s![flux]);
        let want = -h * dot_compensated(z4, z4);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn fractional_zero_matches_energy(n in 2usize..50, tau in 0.1f64..4.0) {
        let ops = OperatorSet::example1(&Grid::new(n).unwrap(), tau).unwrap();
        let me = thermoelast::energy_metric(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let mf = fractional_metric(&ops, 0.0).unwrap();
        prop_assert_eq!(me.m, mf.m);
    }

    #[test]
    fn russell_bound_certified(c in 0.01f64..5.0, delta in -0.9f64..4.0, e0 in 0.1f64..20.0) {
        let run = russell_verify(c, delta, e0, 500).unwrap();
        prop_assert!(run.max_recurrence_residual <= 1e-12);
        let power = 1.0 / (1.0 + delta);
        for (k, e) in run.energies.iter().enumerate() {
            prop_assert!(*e <= run.bound_constant / ((k + 1) as f64).powf(power) * (1.0 + 1e-12));
        }
        for w in run.energies.windows(2) {
            prop_assert!(w[1] > 0.0 && w[1] < w[0]);
        }
    }

    #[test]
    fn damped_energy_balance_any_data(seed in 0u64..500, tau in 0.2f64..4.0) {
        let ops = OperatorSet::example1(&Grid::new(24).unwrap(), tau).unwrap();
        let gen = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z0 = randn(&mut rng, gen.dim());
        let traj = simulate(&gen, &z0, 1.0, 5e-3).unwrap();
        let res = energy_balance_residual(&gen, &ops, &traj).unwrap();
        prop_assert!(res <= 1e-9, "residual {}", res);
        let trace = energy_trace(&gen, &ops, &traj);
        for w in trace.energy.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}
