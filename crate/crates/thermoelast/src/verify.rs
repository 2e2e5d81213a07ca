//! The verification suite: every numerically checkable claim about the
//! system family, run at pinned sizes and tolerances. Each criterion
//! produces one `CheckRecord`; the CLI `verify` command and the
//! acceptance test target both drive `run_acceptance`.

use ndarray::{s, Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{
    energy_balance_residual, energy_trace, inegdub_ensemble, simulate, splitting_check,
};
use crate::error::Error;
use crate::generator::{adjoint_generator, assemble_generator, dissipation_form, GeneratorKind};
use crate::grid::Grid;
use crate::linalg::dot_compensated;
use crate::metric::{energy_metric, fractional_metric};
use crate::observability::{
    gramian, gramian_multi, ingham_direct_check, observability_constant,
    weak_observability_constant,
};
use crate::operators::OperatorSet;
use crate::report::CheckRecord;
use crate::spectral::{eigen, modal_frequencies};
use crate::stability::{growth_implication, log_grid, resolvent_scan, russell_verify};
use crate::states::{modal_state, smooth_random_state};

/// Suite configuration: the seed feeds every random ensemble; `quick`
/// scales the problem sizes down for smoke runs and determinism tests.
#[derive(Debug, Clone, Copy)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub quick: bool,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            seed: 42,
            quick: false,
        }
    }
}

pub struct CheckOutcome {
    pub record: CheckRecord,
    pub runtime_s: f64,
}

fn randn_vec(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn ops_for(n: usize, tau: f64) -> OperatorSet {
    OperatorSet::example1(&Grid::new(n).expect("valid n"), tau).expect("valid tau")
}

fn timed(f: impl FnOnce() -> CheckRecord) -> CheckOutcome {
    let start = std::time::Instant::now();
    let record = f();
    CheckOutcome {
        record,
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

fn fail_record(name: &str, operation: &str, err: &Error) -> CheckRecord {
    CheckRecord::new(name, operation, &format!("errored: {err}")).passed(false)
}

/// Run the full suite. Records appear in criterion order.
pub fn run_acceptance(cfg: &AcceptanceConfig) -> Vec<CheckOutcome> {
    vec![
        timed(|| dissipation_identity(cfg)),
        timed(|| adjoint_identity(cfg)),
        timed(|| energy_balance(cfg)),
        timed(|| conservative_invariance(cfg)),
        timed(|| splitting_decomposition(cfg)),
        timed(|| two_sided_inequality(cfg)),
        timed(|| spectral_convergence(cfg)),
        timed(|| resolvent_growth(cfg)),
        timed(|| observability_monotone(cfg)),
        timed(|| ingham_direct(cfg)),
        timed(|| russell_recurrence(cfg)),
        timed(|| fractional_metric_sanity(cfg)),
    ]
}

/// 1. `Re<A_d z, z>_H = -h ||z4||^2` to 1e-12 relative, 100 random states.
fn dissipation_identity(cfg: &AcceptanceConfig) -> CheckRecord {
    let n = if cfg.quick { 40 } else { 100 };
    let ops = ops_for(n, 1.0);
    let gen = match assemble_generator(&ops, GeneratorKind::DampedCattaneo) {
        Ok(g) => g,
        Err(e) => return fail_record("dissipation_identity", "operator-assembly::assemble_generator", &e),
    };
    let sform = dissipation_form(&gen);
    let h = ops.quad_weight;
    let flux = gen.flux_range().expect("cattaneo");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x01);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let z = randn_vec(&mut rng, gen.dim());
        let lhs = dot_compensated(z.view(), sform.dot(&z).view());
        let z4 = z.slice(s![flux.clone()]);
        let rhs = -h * dot_compensated(z4, z4);
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
    }
    CheckRecord::new(
        "dissipation_identity",
        "operator-assembly::assemble_generator",
        "relative error <= 1e-12 over 100 random states",
    )
    .value("n_interior", n as f64)
    .value("max_relative_error", worst)
    .passed(worst <= 1e-12)
}

/// 2. `<A_d x, y>_H = <x, A_d* y>_H` to 1e-12 relative, 100 random pairs.
fn adjoint_identity(cfg: &AcceptanceConfig) -> CheckRecord {
    let n = if cfg.quick { 40 } else { 100 };
    let ops = ops_for(n, 1.0);
    let (gen, adj) = match (
        assemble_generator(&ops, GeneratorKind::DampedCattaneo),
        adjoint_generator(&ops),
    ) {
        (Ok(g), Ok(a)) => (g, a),
        (Err(e), _) | (_, Err(e)) => {
            return fail_record("adjoint_identity", "operator-assembly::adjoint_generator", &e)
        }
    };
    let m = &gen.metric.m;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x02);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = randn_vec(&mut rng, gen.dim());
        let y = randn_vec(&mut rng, gen.dim());
        let lhs = dot_compensated(gen.g.dot(&x).view(), m.dot(&y).view());
        let rhs = dot_compensated(x.view(), m.dot(&adj.g.dot(&y)).view());
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
    }
    CheckRecord::new(
        "adjoint_identity",
        "operator-assembly::adjoint_generator",
        "relative error <= 1e-12 over 100 random pairs",
    )
    .value("n_interior", n as f64)
    .value("max_relative_error", worst)
    .passed(worst <= 1e-12)
}

/// 3. Energy balance to 1e-6 for both damped kinds at dt = 1e-3, T = 5,
/// plus second-order self-convergence of the energy trace under dt halving.
fn energy_balance(cfg: &AcceptanceConfig) -> CheckRecord {
    let n = if cfg.quick { 40 } else { 100 };
    let t_final = 5.0;
    let mut rec = CheckRecord::new(
        "energy_balance",
        "dynamics::energy_balance_residual",
        "residual <= 1e-6 at dt=1e-3; trace self-convergence order >= 1.9",
    )
    .value("n_interior", n as f64);
    let ops = ops_for(n, 1.0);
    let mut ok = true;
    for kind in [GeneratorKind::DampedCattaneo, GeneratorKind::Fourier] {
        let gen = match assemble_generator(&ops, kind) {
            Ok(g) => g,
            Err(e) => return fail_record("energy_balance", "dynamics::energy_balance_residual", &e),
        };
        // smooth deterministic data: lowest mode only
        let z0 = modal_state(&ops, kind, 1, &[1.0, 0.0, 0.5, 0.25]);
        let mut traces = Vec::new();
        for dt in [1e-3, 5e-4, 2.5e-4] {
            match simulate(&gen, &z0, t_final, dt) {
                Ok(traj) => {
                    if dt == 1e-3 {
                        match energy_balance_residual(&gen, &ops, &traj) {
                            Ok(r) => {
                                rec = rec.value(&format!("residual_{}", kind.as_str()), r);
                                ok &= r <= 1e-6;
                            }
                            Err(e) => return fail_record("energy_balance", "dynamics::energy_balance_residual", &e),
                        }
                    }
                    traces.push(energy_trace(&gen, &ops, &traj));
                }
                Err(e) => return fail_record("energy_balance", "dynamics::simulate", &e),
            }
        }
        // Richardson self-convergence at shared sample times
        let err_pair = |coarse: &crate::dynamics::EnergyTrace, fine: &crate::dynamics::EnergyTrace, r: usize| {
            coarse
                .energy
                .iter()
                .enumerate()
                .map(|(k, e)| (e - fine.energy[k * r]).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = err_pair(&traces[0], &traces[1], 2);
        let e2 = err_pair(&traces[1], &traces[2], 2);
        let order = (e1 / e2).log2();
        rec = rec.value(&format!("order_{}", kind.as_str()), order);
        ok &= order >= 1.9;
    }
    rec.passed(ok)
}

/// 4. Conservative energy invariance: relative drift <= 1e-10 over T = 10.
fn conservative_invariance(cfg: &AcceptanceConfig) -> CheckRecord {
    let n = if cfg.quick { 30 } else { 50 };
    let ops = ops_for(n, 1.0);
    let gen = match assemble_generator(&ops, GeneratorKind::ConservativeCattaneo) {
        Ok(g) => g,
        Err(e) => return fail_record("conservative_invariance", "dynamics::simulate", &e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x04);
    let z0 = randn_vec(&mut rng, gen.dim());
    let traj = match simulate(&gen, &z0, 10.0, 1e-2) {
        Ok(t) => t,
        Err(e) => return fail_record("conservative_invariance", "dynamics::simulate", &e),
    };
    let e0 = gen.metric.energy(z0.view());
    let drift = traj
        .states
        .iter()
        .map(|z| (gen.metric.energy(z.view()) - e0).abs() / e0)
        .fold(0.0f64, f64::max);
    CheckRecord::new(
        "conservative_invariance",
        "dynamics::simulate",
        "relative energy drift <= 1e-10 over T = 10",
    )
    .value("n_interior", n as f64)
    .value("max_relative_drift", drift)
    .passed(drift <= 1e-10)
}

/// 5. Trajectory decomposition: damped = conservative + forced. The
/// midpoint scheme satisfies the identity exactly, so refinement checks
/// the O(dt^2) bound against a roundoff floor.
fn splitting_decomposition(cfg: &AcceptanceConfig) -> CheckRecord {
    let n = if cfg.quick { 40 } else { 100 };
    let ops = ops_for(n, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x05);
    let z0 = smooth_random_state(&ops, GeneratorKind::DampedCattaneo, 8, &mut rng);
    let (r1, r2) = match (
        splitting_check(&ops, &z0, 2.0, 1e-3),
        splitting_check(&ops, &z0, 2.0, 5e-4),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return fail_record("splitting_decomposition", "dynamics::splitting_check", &e)
        }
    };
    let refined_ok = r2 <= (0.35 * r1).max(2e-9);
    CheckRecord::new(
        "splitting_decomposition",
        "dynamics::splitting_check",
        "residual <= 1e-6 at dt=1e-3; O(dt^2) bound (roundoff floor 2e-9) under halving",
    )
    .value("n_interior", n as f64)
    .value("residual_dt_1e-3", r1)
    .value("residual_dt_5e-4", r2)
    .passed(r1 <= 1e-6 && refined_ok)
}

/// 6. Two-sided output comparison over an ensemble: `I_w <= 4.004 I_phi`,
/// `I_phi/I_w` bounded below, both stable to 1e-3 under dt halving.
fn two_sided_inequality(cfg: &AcceptanceConfig) -> CheckRecord {
    let (n, members) = if cfg.quick { (40, 10) } else { (100, 30) };
    let ops = ops_for(n, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x06);
    let dim = ops.cattaneo_dim();
    let mut block = Array2::zeros((dim, members));
    for j in 0..members {
        let z = smooth_random_state(&ops, GeneratorKind::DampedCattaneo, 8, &mut rng);
        block.column_mut(j).assign(&z);
    }
    let run = |dt: f64| inegdub_ensemble(&ops, &block, 3.0, dt);
    let (coarse, fine) = match (run(1e-3), run(5e-4)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return fail_record("two_sided_inequality", "dynamics::inegdub_check", &e)
        }
    };
    let max_upper = coarse.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let min_lower = coarse.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_upper_f = fine.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let min_lower_f = fine.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let drift = (max_upper - max_upper_f)
        .abs()
        .max((min_lower - min_lower_f).abs());
    CheckRecord::new(
        "two_sided_inequality",
        "dynamics::inegdub_check",
        "max I_w/I_phi <= 4.004, min I_phi/I_w > 0, stable to 1e-3 under dt halving",
    )
    .value("n_interior", n as f64)
    .value("ensemble", members as f64)
    .value("max_upper_ratio", max_upper)
    .value("min_lower_ratio", min_lower)
    .value("dt_halving_drift", drift)
    .passed(max_upper <= 4.004 && min_lower > 0.0 && drift <= 1e-3)
}

/// 7. Six smallest conservative eigenfrequencies converge to the modal
/// oracle at observed order within [1.7, 2.3] across a grid doubling.
fn spectral_convergence(cfg: &AcceptanceConfig) -> CheckRecord {
    let sizes: [usize; 3] = if cfg.quick { [40, 80, 160] } else { [100, 200, 400] };
    let tau = 1.0;
    let mut freqs = Vec::new();
    for &n in &sizes {
        let ops = ops_for(n, tau);
        let gen = match assemble_generator(&ops, GeneratorKind::ConservativeCattaneo) {
            Ok(g) => g,
            Err(e) => return fail_record("spectral_convergence", "spectral::eigen", &e),
        };
        match eigen(&gen) {
            Ok(sp) => freqs.push(sp.positive_frequencies()),
            Err(e) => return fail_record("spectral_convergence", "spectral::eigen", &e),
        }
    }
    let mut oracle: Vec<f64> = Vec::new();
    for m in 1..=6 {
        let (a, b) = modal_frequencies(tau, m);
        oracle.push(a);
        oracle.push(b);
    }
    oracle.sort_by(f64::total_cmp);
    let h = |n: usize| 1.0 / (n as f64 + 1.0);
    let mut rec = CheckRecord::new(
        "spectral_convergence",
        "spectral::eigen + spectral::modal_reduce",
        "observed order in [1.7, 2.3] for the 6 smallest frequencies",
    );
    let mut ok = true;
    let mut min_order = f64::INFINITY;
    let mut max_order = f64::NEG_INFINITY;
    for i in 0..6 {
        let e: Vec<f64> = (0..3).map(|s| (freqs[s][i] - oracle[i]).abs()).collect();
        let p1 = (e[0] / e[1]).ln() / (h(sizes[0]) / h(sizes[1])).ln();
        let p2 = (e[1] / e[2]).ln() / (h(sizes[1]) / h(sizes[2])).ln();
        for p in [p1, p2] {
            min_order = min_order.min(p);
            max_order = max_order.max(p);
            ok &= (1.7..=2.3).contains(&p);
        }
        rec = rec.value(&format!("order_freq_{i}"), p2);
    }
    rec.value("min_order", min_order)
        .value("max_order", max_order)
        .passed(ok)
}

/// 8. Resolvent growth along the imaginary axis: the Fourier exponent over
/// the top decade of [10, 1e3] stays <= 2.3, the damped Cattaneo scan is
/// bounded with its exponent reported, and the measured implication
/// (bounded Cattaneo => quadratically bounded Fourier) holds.
fn resolvent_growth(cfg: &AcceptanceConfig) -> CheckRecord {
    let n = if cfg.quick { 100 } else { 200 };
    let ops = ops_for(n, 1.0);
    let betas = match log_grid(10.0, 1e3, 25) {
        Ok(b) => b,
        Err(e) => return fail_record("resolvent_growth", "stability::resolvent_scan", &e),
    };
    let scan_for = |kind: GeneratorKind| -> Result<crate::stability::ResolventScan, Error> {
        let gen = assemble_generator(&ops, kind)?;
        resolvent_scan(&gen, &betas)
    };
    let (catt, four) = match (
        scan_for(GeneratorKind::DampedCattaneo),
        scan_for(GeneratorKind::Fourier),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return fail_record("resolvent_growth", "stability::resolvent_scan", &e)
        }
    };
    let catt_exp = catt.fit.as_ref().map(|f| f.exponent);
    let four_exp = four.fit.as_ref().map(|f| f.exponent);
    let implication = growth_implication(&catt.fit, &four.fit, 0.5, 0.3);
    let ok = catt.sup_norm().is_finite()
        && four_exp.is_some_and(|e| e <= 2.3)
        && implication == Some(true);
    CheckRecord::new(
        "resolvent_growth",
        "stability::resolvent_scan",
        "fourier exponent <= 2.3 over top decade; cattaneo sup finite; implication holds",
    )
    .value("n_interior", n as f64)
    .value("cattaneo_sup_norm", catt.sup_norm())
    .value("cattaneo_exponent", catt_exp.unwrap_or(f64::NAN))
    .value("fourier_exponent", four_exp.unwrap_or(f64::NAN))
    .value(
        "implication_holds",
        match implication {
            Some(true) => 1.0,
            Some(false) => 0.0,
            None => f64::NAN,
        },
    )
    .passed(ok)
}

/// 9. Restricted observability constant positive at T = 3 and monotone
/// over T in {2, 2.5, 3}.
fn observability_monotone(cfg: &AcceptanceConfig) -> CheckRecord {
    let (n, dt) = if cfg.quick { (40, 1e-2) } else { (100, 5e-3) };
    let ops = ops_for(n, 1.0);
    let gen = match assemble_generator(&ops, GeneratorKind::ConservativeCattaneo) {
        Ok(g) => g,
        Err(e) => return fail_record("observability", "observability::gramian", &e),
    };
    let gs = match gramian_multi(&gen, &ops, &[2.0, 2.5, 3.0], dt) {
        Ok(g) => g,
        Err(e) => return fail_record("observability", "observability::gramian", &e),
    };
    let mut consts = Vec::new();
    for g in &gs {
        match observability_constant(g, &gen.layout, &gen.metric, true) {
            Ok(rep) => consts.push(rep.c_obs),
            Err(e) => {
                return fail_record("observability", "observability::observability_constant", &e)
            }
        }
    }
    let monotone = consts[0] <= consts[1] + 1e-12 && consts[1] <= consts[2] + 1e-12;
    CheckRecord::new(
        "observability",
        "observability::observability_constant",
        "restricted c_obs(3) > 0 and c_obs(2) <= c_obs(2.5) <= c_obs(3)",
    )
    .value("n_interior", n as f64)
    .value("c_obs_T2", consts[0])
    .value("c_obs_T2.5", consts[1])
    .value("c_obs_T3", consts[2])
    .passed(consts[2] > 0.0 && monotone)
}

/// 10. Direct lower-bound probe for the eigenfamily output energy:
/// positive minimum over trials, stable under doubling, and refusal of
/// the rational-ratio relaxation time.
fn ingham_direct(cfg: &AcceptanceConfig) -> CheckRecord {
    let trials = if cfg.quick { 50 } else { 200 };
    let n_max = if cfg.quick { 10 } else { 20 };
    let seed = cfg.seed ^ 0x0a;
    let (r1, r2) = match (
        ingham_direct_check(1.0, 3.0, n_max, trials, seed),
        ingham_direct_check(1.0, 3.0, n_max, 2 * trials, seed),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return fail_record("ingham_direct", "observability::ingham_direct_check", &e)
        }
    };
    let drift = (r2.min_ratio - r1.min_ratio).abs() / r1.min_ratio;
    let refused = matches!(
        ingham_direct_check(1.0 / 3.0, 3.0, n_max, trials, seed),
        Err(Error::GapHypothesis(_))
    );
    CheckRecord::new(
        "ingham_direct",
        "observability::ingham_direct_check",
        "min ratio > 0, < 20% drift when trials double, tau = 1/3 refused",
    )
    .value("trials", trials as f64)
    .value("min_ratio", r1.min_ratio)
    .value("min_ratio_doubled", r2.min_ratio)
    .value("relative_drift", drift)
    .value("rational_tau_refused", if refused { 1.0 } else { 0.0 })
    .passed(r1.min_ratio > 0.0 && drift < 0.2 && refused)
}

/// 11. Extremal recurrence sequences: certified decay bound over 10^4
/// steps with per-step residual <= 1e-12 for three parameter sets.
fn russell_recurrence(_cfg: &AcceptanceConfig) -> CheckRecord {
    let configs = [(1.0, 0.0, 1.0), (0.1, 1.0, 5.0), (2.0, -0.5, 1.0)];
    let mut rec = CheckRecord::new(
        "russell_recurrence",
        "stability::russell_verify",
        "E_k <= M/(k+1)^{1/(1+delta)} for k <= 1e4, residual <= 1e-12",
    );
    let mut ok = true;
    for (i, (c, delta, e0)) in configs.into_iter().enumerate() {
        match russell_verify(c, delta, e0, 10_000) {
            Ok(run) => {
                let power = 1.0 / (1.0 + delta);
                let bound_holds = run.energies.iter().enumerate().all(|(k, e)| {
                    *e <= run.bound_constant / ((k + 1) as f64).powf(power) * (1.0 + 1e-12)
                });
                ok &= bound_holds
                    && run.bound_constant.is_finite()
                    && run.max_recurrence_residual <= 1e-12;
                rec = rec
                    .value(&format!("bound_constant_{i}"), run.bound_constant)
                    .value(&format!("max_residual_{i}"), run.max_recurrence_residual);
            }
            Err(e) => return fail_record("russell_recurrence", "stability::russell_verify", &e),
        }
    }
    rec.passed(ok)
}

/// 12. Fractional-metric sanity: alpha = 0 reproduces the energy metric
/// entrywise and the weak observability constant matches the full one.
fn fractional_metric_sanity(cfg: &AcceptanceConfig) -> CheckRecord {
    let n = if cfg.quick { 24 } else { 60 };
    let ops = ops_for(n, 1.0);
    let me = match energy_metric(&ops, GeneratorKind::DampedCattaneo) {
        Ok(m) => m,
        Err(e) => return fail_record("fractional_metric_sanity", "operator-assembly::energy_metric", &e),
    };
    let mf = match fractional_metric(&ops, 0.0) {
        Ok(m) => m,
        Err(e) => return fail_record("fractional_metric_sanity", "operator-assembly::fractional_metric", &e),
    };
    let entry_diff = (&me.m - &mf.m)
        .iter()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max);
    let gen = match assemble_generator(&ops, GeneratorKind::ConservativeCattaneo) {
        Ok(g) => g,
        Err(e) => return fail_record("fractional_metric_sanity", "operator-assembly::assemble_generator", &e),
    };
    let g = match gramian(&gen, &ops, 2.0, 1e-2) {
        Ok(g) => g,
        Err(e) => return fail_record("fractional_metric_sanity", "observability::gramian", &e),
    };
    let (full, weak) = match (
        observability_constant(&g, &gen.layout, &gen.metric, true),
        weak_observability_constant(&g, &gen.layout, &ops, 0.0, true),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return fail_record("fractional_metric_sanity", "observability::weak_observability_constant", &e)
        }
    };
    let const_diff = (full.c_obs - weak.c_obs).abs() / full.c_obs.max(1e-300);
    CheckRecord::new(
        "fractional_metric_sanity",
        "operator-assembly::fractional_metric",
        "alpha=0 metric entrywise <= 1e-12; weak constant matches full to 1e-10",
    )
    .value("n_interior", n as f64)
    .value("metric_entry_diff", entry_diff)
    .value("constant_relative_diff", const_diff)
    .passed(entry_diff <= 1e-12 && const_diff <= 1e-10)
}
