//! Spectra of the block generators and the exact single-mode reduction.
//!
//! Substituting `w1 = a sin(n pi x)`, `w2 = b cos(n pi x)`,
//! `w3 = c sin(n pi x)` into the 1D system closes it into a constant
//! 4x4 (Cattaneo) or 3x3 (Fourier) system per mode. That reduction is the
//! trusted oracle for continuum frequencies; the discrete staggered
//! realization reproduces it exactly with the dispersion-corrected
//! frequency `sigma_m = (2/h) sin(m pi h / 2)` in place of `m pi`.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::types::c64;
use ndarray_linalg::Eig;

use crate::error::{Error, Result};
use crate::generator::{assemble_generator, BlockGenerator, GeneratorKind};
use crate::grid::Grid;
use crate::linalg::cnorm;
use crate::operators::OperatorSet;
use crate::states::{cosine_midpoints, sine_nodes};

/// Dense eigensolves are refused above this dimension.
pub const EIGEN_DIM_CAP: usize = 2000;

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues sorted by (Im, Re).
    pub eigenvalues: Vec<c64>,
    /// Right eigenvectors, columns matching `eigenvalues`.
    pub eigenvectors: Option<Array2<c64>>,
    /// Independently recomputed residuals `||G v - lambda v|| / ||v||`.
    pub residuals: Vec<f64>,
    pub kind: GeneratorKind,
    pub dim: usize,
}

impl Spectrum {
    /// Positive imaginary parts in ascending order (the eigenfrequencies).
    pub fn positive_frequencies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .eigenvalues
            .iter()
            .filter(|l| l.im > 1e-6)
            .map(|l| l.im)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Smallest distance from the spectrum to `i beta`.
    pub fn distance_to(&self, beta: f64) -> (f64, c64) {
        let mut best = f64::INFINITY;
        let mut which = c64::new(0.0, 0.0);
        for l in &self.eigenvalues {
            let d = (c64::new(0.0, beta) - l).norm();
            if d < best {
                best = d;
                which = *l;
            }
        }
        (best, which)
    }
}

/// All eigenpairs of the generator with residual certificates.
pub fn eigen(gen: &BlockGenerator) -> Result<Spectrum> {
    let dim = gen.dim();
    if dim > EIGEN_DIM_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: EIGEN_DIM_CAP,
        });
    }
    let (vals, vecs): (Array1<c64>, Array2<c64>) = gen.g.eig()?;
    let gc = gen.g.mapv(|x| c64::new(x, 0.0));
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        (vals[i].im, vals[i].re)
            .partial_cmp(&(vals[j].im, vals[j].re))
            .expect("finite eigenvalues")
    });
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut residuals = Vec::with_capacity(dim);
    let mut sorted_vecs = Array2::zeros((dim, dim));
    for (col, &i) in order.iter().enumerate() {
        let v = vecs.column(i).to_owned();
        let gv = gc.dot(&v);
        let resid = cnorm(&(&gv - &v.mapv(|x| x * vals[i]))) / cnorm(&v);
        if !resid.is_finite() {
            return Err(Error::NonFinite(format!("residual of eigenpair {i}")));
        }
        eigenvalues.push(vals[i]);
        residuals.push(resid);
        sorted_vecs.column_mut(col).assign(&v);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(sorted_vecs),
        residuals,
        kind: gen.kind,
        dim,
    })
}

/// Exact single-mode reduction of the continuum system at frequency
/// parameter `mu` (the derivative factor of the mode).
pub fn modal_matrix_at(mu: f64, tau: f64, kind: GeneratorKind) -> Array2<f64> {
    match kind {
        GeneratorKind::Fourier => {
            let mut g = Array2::zeros((3, 3));
            g[[0, 1]] = 1.0;
            g[[1, 0]] = -mu * mu;
            g[[1, 2]] = mu;
            g[[2, 1]] = -mu;
            g[[2, 2]] = -mu * mu;
            g
        }
        _ => {
            let mut g = Array2::zeros((4, 4));
            g[[0, 1]] = 1.0;
            g[[1, 0]] = -mu * mu;
            g[[1, 2]] = mu;
            g[[2, 1]] = -mu;
            g[[2, 3]] = mu;
            g[[3, 2]] = -mu / tau;
            if kind == GeneratorKind::DampedCattaneo {
                g[[3, 3]] = -1.0 / tau;
            }
            g
        }
    }
}

/// Dispersion-corrected frequency parameter of the discrete mode `m`.
pub fn discrete_mode_frequency(n_interior: usize, mode: usize) -> f64 {
    let h = 1.0 / (n_interior as f64 + 1.0);
    2.0 / h * (mode as f64 * std::f64::consts::PI * h / 2.0).sin()
}

#[derive(Debug, Clone)]
pub struct ModalSystem {
    pub mode: usize,
    /// Eigenvalue of the stiffness operator on this mode, `(n pi)^2`.
    pub stiffness: f64,
    pub matrix: Array2<f64>,
    /// Eigenvalues sorted by (Im, Re).
    pub eigenvalues: Vec<c64>,
    pub kind: GeneratorKind,
}

/// Single-mode reduction at the continuum frequency `mu = n pi`.
pub fn modal_reduce(mode: usize, tau: f64, kind: GeneratorKind) -> Result<ModalSystem> {
    if mode == 0 {
        return Err(Error::invalid("mode", "mode index must be >= 1"));
    }
    if !(tau > 0.0) && !kind.is_fourier() {
        return Err(Error::invalid("tau", "must be > 0"));
    }
    let mu = mode as f64 * std::f64::consts::PI;
    let matrix = modal_matrix_at(mu, tau, kind);
    let (vals, _vecs): (Array1<c64>, Array2<c64>) = matrix.eig()?;
    let mut eigenvalues: Vec<c64> = vals.to_vec();
    eigenvalues.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).expect("finite"));
    Ok(ModalSystem {
        mode,
        stiffness: mu * mu,
        matrix,
        eigenvalues,
        kind,
    })
}

/// Eigenvector of the Cattaneo modal matrix for eigenvalue `lambda`,
/// normalized to unit `w1` amplitude: `(1, lambda, b, c)` with
/// `b = (lambda^2 + mu^2)/mu` and `c = lambda (b + mu)/mu`.
pub fn modal_eigenvector(mu: f64, lambda: c64) -> [c64; 4] {
    let mu_c = c64::new(mu, 0.0);
    let b = (lambda * lambda + mu_c * mu_c) / mu_c;
    let c = lambda * (b + mu_c) / mu_c;
    [c64::new(1.0, 0.0), lambda, b, c]
}

/// Continuum conservative eigenfrequencies of mode `n`, both branches
/// ascending: `n pi sqrt(eta)` with `eta` the roots of
/// `eta^2 - (2 + 1/tau) eta + 1/tau = 0`.
pub fn modal_frequencies(tau: f64, mode: usize) -> (f64, f64) {
    let mu = mode as f64 * std::f64::consts::PI;
    let s = 2.0 + 1.0 / tau;
    let disc = (s * s - 4.0 / tau).sqrt();
    let eta_slow = 0.5 * (s - disc);
    let eta_fast = 0.5 * (s + disc);
    (mu * eta_slow.sqrt(), mu * eta_fast.sqrt())
}

/// One row of the explicit-formula comparison report.
#[derive(Debug, Clone)]
pub struct FormulaRow {
    pub mode: usize,
    pub branch: usize,
    /// Claimed eigenvalue of this mode and branch.
    pub lambda_claimed: c64,
    /// Nearest eigenvalue of the single-mode oracle.
    pub lambda_oracle: c64,
    pub discrepancy: f64,
    /// `||A_c phi - lambda phi||_H / ||phi||_H` for the claimed
    /// eigenfunction evaluated on the grid.
    pub eigenfunction_residual: f64,
}

#[derive(Debug, Clone)]
pub struct FormulaReport {
    pub rows: Vec<FormulaRow>,
    /// Whether sqrt(tau/(1+tau)) was detected as rational (the explicit
    /// formulas assume it is not).
    pub ratio_rational: bool,
}

/// Rational detection by continued fractions: accepts denominators up to
/// `max_den` matching to within 1e-10/q^2.
pub(crate) fn rational_approx(r: f64, max_den: u64) -> Option<(i64, u64)> {
    let mut x = r;
    let (mut p0, mut q0, mut p1, mut q1): (i64, u64, i64, u64) = (1, 0, x.floor() as i64, 1);
    for _ in 0..64 {
        let err = r - p1 as f64 / q1 as f64;
        if err.abs() < 1e-10 / (q1 as f64 * q1 as f64) {
            return (q1 <= max_den).then_some((p1, q1));
        }
        let frac = x - x.floor();
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
        let a = x.floor() as i64;
        let p2 = a * p1 + p0;
        let q2 = a as u64 * q1 + q0;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

/// Compare the claimed two-branch eigenvalue family
/// `{i n pi sqrt((1+tau)/tau)} U {i n pi}` and its eigenfunctions with
/// the single-mode oracle and the discrete generator. Report only: the
/// two families genuinely disagree and no assertion is made.
pub fn validate_explicit_formulas(tau: f64, n_max: usize, grid: &Grid) -> Result<FormulaReport> {
    let ops = OperatorSet::example1(grid, tau)?;
    let gen = assemble_generator(&ops, GeneratorKind::ConservativeCattaneo)?;
    let ratio = (tau / (1.0 + tau)).sqrt();
    let ratio_rational = rational_approx(ratio, 64).is_some();
    let n = grid.n_interior();
    let mut rows = Vec::new();
    for mode in 1..=n_max {
        let npi = mode as f64 * std::f64::consts::PI;
        let claimed = [
            c64::new(0.0, npi),
            c64::new(0.0, npi * ((1.0 + tau) / tau).sqrt()),
        ];
        let oracle = modal_reduce(mode, tau, GeneratorKind::ConservativeCattaneo)?;
        for (branch, &lambda) in claimed.iter().enumerate() {
            let nearest = oracle
                .eigenvalues
                .iter()
                .min_by(|a, b| {
                    (**a - lambda)
                        .norm()
                        .partial_cmp(&(**b - lambda).norm())
                        .expect("finite")
                })
                .copied()
                .expect("nonempty");
            // claimed eigenfunction on the grid
            let sin_m = sine_nodes(n, mode).mapv(|x| c64::new(x, 0.0));
            let cos_m = cosine_midpoints(n, mode).mapv(|x| c64::new(x, 0.0));
            let npi_c = c64::new(npi, 0.0);
            let tau_c = c64::new(tau, 0.0);
            let flux_amp = (lambda - npi_c / lambda) / tau_c;
            let temp_amp = -npi_c * (flux_amp / lambda + c64::new(1.0, 0.0));
            let mut phi = Array1::<c64>::zeros(gen.dim());
            phi.slice_mut(s![0..n]).assign(&sin_m);
            phi.slice_mut(s![n..2 * n]).assign(&sin_m.mapv(|x| x * lambda));
            phi.slice_mut(s![2 * n..2 * n + ops.dims.temperature])
                .assign(&cos_m.mapv(|x| x * temp_amp));
            phi.slice_mut(s![ops.flux_offset()..])
                .assign(&sin_m.mapv(|x| x * flux_amp));
            let gc = gen.g.mapv(|x| c64::new(x, 0.0));
            let resid_vec = &gc.dot(&phi) - &phi.mapv(|x| x * lambda);
            let residual =
                gen.metric.complex_norm(&resid_vec) / gen.metric.complex_norm(&phi);
            rows.push(FormulaRow {
                mode,
                branch,
                lambda_claimed: lambda,
                lambda_oracle: nearest,
                discrepancy: (lambda - nearest).norm(),
                eigenfunction_residual: residual,
            });
        }
    }
    Ok(FormulaReport {
        rows,
        ratio_rational,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencySource {
    /// The claimed family `{n pi} U {n pi sqrt((1+tau)/tau)}`.
    PaperSet,
    /// Frequencies of the single-mode oracle.
    ModalOracle,
}

#[derive(Debug, Clone)]
pub struct GapEntry {
    pub branch_i: usize,
    pub branch_j: usize,
    pub n_i: usize,
    pub n_j: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct GapTable {
    pub entries: Vec<GapEntry>,
    pub min_gap: f64,
    pub source: FrequencySource,
}

/// Positive frequencies of the chosen family for `n = 1..=n_max`, as
/// `(branch, n, frequency)`.
pub fn frequency_family(tau: f64, n_max: usize, source: FrequencySource) -> Vec<(usize, usize, f64)> {
    let mut fam = Vec::with_capacity(2 * n_max);
    for n in 1..=n_max {
        match source {
            FrequencySource::PaperSet => {
                let npi = n as f64 * std::f64::consts::PI;
                fam.push((0, n, npi));
                fam.push((1, n, npi * ((1.0 + tau) / tau).sqrt()));
            }
            FrequencySource::ModalOracle => {
                let (slow, fast) = modal_frequencies(tau, n);
                fam.push((0, n, slow));
                fam.push((1, n, fast));
            }
        }
    }
    fam
}

/// Minimal pairwise distance within the two-branch frequency family.
/// Duplicate frequencies are reported as zero gaps rather than dropped.
pub fn frequency_gap(tau: f64, n_max: usize, source: FrequencySource) -> Result<GapTable> {
    if n_max < 2 {
        return Err(Error::invalid("n_max", "need n_max >= 2"));
    }
    let fam = frequency_family(tau, n_max, source);
    let mut entries = Vec::with_capacity(fam.len() * (fam.len() - 1) / 2);
    let mut min_gap = f64::INFINITY;
    for i in 0..fam.len() {
        for j in i + 1..fam.len() {
            let gap = (fam[i].2 - fam[j].2).abs();
            min_gap = min_gap.min(gap);
            entries.push(GapEntry {
                branch_i: fam[i].0,
                branch_j: fam[j].0,
                n_i: fam[i].1,
                n_j: fam[j].1,
                gap,
            });
        }
    }
    Ok(GapTable {
        entries,
        min_gap,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro;
    use std::f64::consts::PI;

    fn gen(n: usize, tau: f64, kind: GeneratorKind) -> BlockGenerator {
        let ops = OperatorSet::example1(&Grid::new(n).unwrap(), tau).unwrap();
        assemble_generator(&ops, kind).unwrap()
    }

    #[test]
    fn conservative_spectrum_on_imaginary_axis() {
        let s = eigen(&gen(50, 1.0, GeneratorKind::ConservativeCattaneo)).unwrap();
        let max_mod = s.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let worst_re = s.eigenvalues.iter().map(|l| l.re.abs()).fold(0.0, f64::max);
        assert!(worst_re <= 1e-9 * max_mod);
        assert!(s.residuals.iter().all(|&r| r <= 1e-8));
    }

    #[test]
    fn damped_spectra_in_left_half_plane() {
        for kind in [GeneratorKind::DampedCattaneo, GeneratorKind::Fourier] {
            let s = eigen(&gen(50, 1.0, kind)).unwrap();
            let worst = s.eigenvalues.iter().map(|l| l.re).fold(f64::MIN, f64::max);
            assert!(worst <= 1e-10, "{kind:?}: max Re = {worst:e}");
            // exactly one conserved direction (constant temperature)
            let zero_count = s
                .eigenvalues
                .iter()
                .filter(|l| l.norm() < 1e-8)
                .count();
            assert_eq!(zero_count, 1);
            // spectral gap on the complement reported > 0
            let gap = s
                .eigenvalues
                .iter()
                .filter(|l| l.norm() >= 1e-8)
                .map(|l| -l.re)
                .fold(f64::INFINITY, f64::min);
            assert!(gap > 0.0, "{kind:?} gap {gap}");
        }
    }

    #[test]
    fn eigen_is_deterministic_and_capped() {
        let g = gen(20, 1.0, GeneratorKind::DampedCattaneo);
        let a = eigen(&g).unwrap();
        let b = eigen(&g).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);

        let ops = OperatorSet::example1(&Grid::new(500).unwrap(), 1.0).unwrap();
        let big = assemble_generator(&ops, GeneratorKind::DampedCattaneo).unwrap();
        assert!(matches!(eigen(&big), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn discrete_spectrum_matches_modal_matrices_exactly() {
        // the staggered realization block-diagonalizes into the modal
        // systems at sigma_m; compare full spectra
        let n = 20;
        let tau = 1.0;
        let g = gen(n, tau, GeneratorKind::DampedCattaneo);
        let s = eigen(&g).unwrap();
        let mut predicted: Vec<c64> = vec![c64::new(0.0, 0.0)];
        for m in 1..=n {
            let mu = discrete_mode_frequency(n, m);
            let (vals, _): (Array1<c64>, Array2<c64>) =
                modal_matrix_at(mu, tau, GeneratorKind::DampedCattaneo).eig().unwrap();
            predicted.extend(vals.iter().copied());
        }
        predicted.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).unwrap());
        assert_eq!(predicted.len(), s.eigenvalues.len());
        let scale = predicted.iter().map(|l| l.norm()).fold(0.0, f64::max);
        for (got, want) in s.eigenvalues.iter().zip(predicted.iter()) {
            assert!((got - want).norm() <= 1e-9 * scale, "{got} vs {want}");
        }
    }

    #[test]
    fn modal_fourier_satisfies_characteristic_cubic() {
        // oracle: direct polynomial evaluation; for the 3x3 reduction
        // p(l) = l^3 + mu^2 l^2 + 2 mu^2 l + mu^4
        let ms = modal_reduce(1, 1.0, GeneratorKind::Fourier).unwrap();
        let mu2 = PI * PI;
        for l in &ms.eigenvalues {
            let p = l * l * l + l * l * mu2 + l * (2.0 * mu2) + mu2 * mu2;
            let scale = l.norm().powi(3).max(mu2 * mu2);
            assert!(p.norm() <= 1e-12 * scale, "p({l}) = {p}");
        }
    }

    #[test]
    fn modal_conservative_purely_imaginary() {
        for n in [1usize, 2, 7] {
            for tau in [0.3, 1.0, 2.5] {
                let ms = modal_reduce(n, tau, GeneratorKind::ConservativeCattaneo).unwrap();
                let scale = ms.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
                for l in &ms.eigenvalues {
                    assert!(l.re.abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn modal_damped_trace_is_minus_inverse_tau() {
        for tau in [0.5, 1.0, 3.0] {
            let ms = modal_reduce(1, tau, GeneratorKind::DampedCattaneo).unwrap();
            let trace: f64 = (0..4).map(|i| ms.matrix[[i, i]]).sum();
            assert!((trace + 1.0 / tau).abs() < 1e-14);
        }
    }

    #[test]
    fn modal_eigenvector_solves_the_system() {
        let ms = modal_reduce(2, 1.3, GeneratorKind::ConservativeCattaneo).unwrap();
        let mu = 2.0 * PI;
        for l in &ms.eigenvalues {
            let v = modal_eigenvector(mu, *l);
            let a = ms.matrix.mapv(|x| c64::new(x, 0.0));
            let v_arr = Array1::from_vec(v.to_vec());
            let resid = &a.dot(&v_arr) - &v_arr.mapv(|x| x * *l);
            assert!(cnorm(&resid) <= 1e-10 * cnorm(&v_arr) * l.norm().max(mu));
        }
    }

    #[test]
    fn explicit_formula_report_shows_discrepancy() {
        // claimed set at tau=1: {i pi sqrt2, i pi}; the oracle disagrees
        // on both branches, and the report records it without asserting
        let grid = Grid::new(60).unwrap();
        let rep = validate_explicit_formulas(1.0, 2, &grid).unwrap();
        assert!(!rep.ratio_rational);
        assert_eq!(rep.rows.len(), 4);
        for row in &rep.rows {
            // claimed values are purely imaginary, as displayed
            assert_eq!(row.lambda_claimed.re, 0.0);
            assert!(row.discrepancy > 0.1, "discrepancy {}", row.discrepancy);
            assert!(row.eigenfunction_residual > 1e-3);
        }
    }

    #[test]
    fn discrete_frequencies_converge_to_oracle_at_second_order() {
        // Richardson refinement over n in {40, 80, 160}
        let tau = 1.0;
        let mut freqs = Vec::new();
        for n in [40usize, 80, 160] {
            let s = eigen(&gen(n, tau, GeneratorKind::ConservativeCattaneo)).unwrap();
            freqs.push(s.positive_frequencies());
        }
        let mut oracle: Vec<f64> = Vec::new();
        for m in 1..=6 {
            let (a, b) = modal_frequencies(tau, m);
            oracle.push(a);
            oracle.push(b);
        }
        oracle.sort_by(f64::total_cmp);
        let h = |n: usize| 1.0 / (n as f64 + 1.0);
        for i in 0..6 {
            let e40 = (freqs[0][i] - oracle[i]).abs();
            let e80 = (freqs[1][i] - oracle[i]).abs();
            let e160 = (freqs[2][i] - oracle[i]).abs();
            let p1 = (e40 / e80).ln() / (h(40) / h(80)).ln();
            let p2 = (e80 / e160).ln() / (h(80) / h(160)).ln();
            assert!((1.7..=2.3).contains(&p1), "order {p1}");
            assert!((1.7..=2.3).contains(&p2), "order {p2}");
        }
    }

    #[test]
    fn gap_table_paper_set_tau_one() {
        // exhaustive pairwise scan oracle, frozen closed form pi(5 sqrt2 - 7)
        let t = frequency_gap(1.0, 10, FrequencySource::PaperSet).unwrap();
        let expect = PI * (5.0 * 2.0f64.sqrt() - 7.0);
        assert!((t.min_gap - expect).abs() <= 1e-12);
        // brute-force oracle over the same family
        let fam = frequency_family(1.0, 10, FrequencySource::PaperSet);
        let mut brute = f64::INFINITY;
        for i in 0..fam.len() {
            for j in i + 1..fam.len() {
                brute = brute.min((fam[i].2 - fam[j].2).abs());
            }
        }
        assert_eq!(t.min_gap, brute);
    }

    #[test]
    fn gap_table_rational_ratio_collides() {
        // tau = 1/3: branch ratio sqrt((1+tau)/tau) = 2, so branches
        // coincide at finite n and the zero gap is reported
        let t = frequency_gap(1.0 / 3.0, 4, FrequencySource::PaperSet).unwrap();
        assert!(t.min_gap <= 1e-12);
        let zero_entries = t.entries.iter().filter(|e| e.gap <= 1e-12).count();
        assert!(zero_entries >= 1);
    }

    #[test]
    fn gap_table_counts() {
        let t = frequency_gap(1.0, 2, FrequencySource::PaperSet).unwrap();
        assert_eq!(t.entries.len(), 6); // C(4,2)
        assert!(frequency_gap(1.0, 1, FrequencySource::PaperSet).is_err());
    }

    #[test]
    fn rational_detection() {
        assert!(rational_approx(0.5, 64).is_some());
        assert!(rational_approx((1.0f64 / 3.0), 64).is_some());
        assert!(rational_approx(0.5f64.sqrt(), 64).is_none());
        assert!(rational_approx((1.0f64 / 2.0).sqrt(), 64).is_none());
    }

    #[test]
    fn modal_matrix_skew_in_modal_metric() {
        // conservative reduction is skew in diag(mu^2, 1, 1, tau)
        let tau = 0.8;
        let mu = 3.0 * PI;
        let g = modal_matrix_at(mu, tau, GeneratorKind::ConservativeCattaneo);
        let mut m = Array2::<f64>::eye(4);
        m[[0, 0]] = mu * mu;
        m[[3, 3]] = tau;
        let mg = m.dot(&g);
        assert!(fro(&(&mg + &mg.t())) <= 1e-12 * fro(&mg));
    }
}
