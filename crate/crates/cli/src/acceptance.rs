//! Acceptance checks: every reference number and invariant the build is
//! required to reproduce, with pinned tolerances, evaluated against a
//! configuration and reported machine-readably.

use cavity_ps::*;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SweepConfig;
use crate::jobs::{fig4_pairs, FIG4_COUPLINGS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The configured grid cannot resolve the feature; the check was
    /// skipped rather than failed.
    UnderResolved,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub target: String,
    pub measured: String,
    pub tolerance: String,
    pub verdict: Verdict,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn line(&self) -> String {
        let tag = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::UnderResolved => "UNDER-RESOLVED",
        };
        format!(
            "[{tag}] {}: measured {} (target {}, tolerance {})",
            self.name, self.measured, self.target, self.tolerance
        )
    }
}

fn result(
    name: &str,
    target: &str,
    tolerance: &str,
    measured: String,
    pass: bool,
) -> CheckResult {
    CheckResult {
        name: name.into(),
        target: target.into(),
        measured,
        tolerance: tolerance.into(),
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    }
}

fn failure(name: &str, target: &str, tolerance: &str, error: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        name: name.into(),
        target: target.into(),
        measured: format!("error: {error}"),
        tolerance: tolerance.into(),
        verdict: Verdict::Fail,
    }
}

fn under_resolved(name: &str, target: &str, tolerance: &str, reason: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        target: target.into(),
        measured: reason,
        tolerance: tolerance.into(),
        verdict: Verdict::UnderResolved,
    }
}

fn params_for(config: &SweepConfig, r: f64, atoms: u32) -> Result<ProtocolParams> {
    let params = ProtocolParams::new(config.alpha, r, atoms)?.with_phase(config.phi);
    match config.cutoff {
        Some(c) => params.with_cutoff(c),
        None => Ok(params),
    }
}

/// Run the full suite; one result per criterion.
pub fn run_all(config: &SweepConfig) -> Vec<CheckResult> {
    vec![
        success_probabilities(config),
        probability_curve_shape(config),
        squeezing_depth(config),
        mandel_windows(config),
        wigner_negativity_onset(config),
        oracle_equivalence(config),
        conservation_suite(config),
        identity_cases(config),
    ]
}

/// P_1 ~ 6.38%, P_2 ~ 1.14%, P_5 ~ 0.06% at r = 0.51; tolerance five units
/// at the last quoted digit of each percentage.
pub fn success_probabilities(config: &SweepConfig) -> CheckResult {
    let name = "success-probabilities-r051";
    let target = "P1=0.0638 P2=0.0114 P5=0.0006";
    let tol = "5e-4 absolute";
    let expected = [(1u32, 0.0638), (2, 0.0114), (5, 0.0006)];
    let mut measured = Vec::new();
    let mut pass = true;
    for (atoms, reference) in expected {
        let p = match params_for(config, 0.51, atoms).and_then(|p| success_probability(&p)) {
            Ok(p) => p,
            Err(e) => return failure(name, target, tol, e),
        };
        pass &= (p - reference).abs() <= 5e-4;
        measured.push(format!("P{atoms}={p:.6}"));
    }
    result(name, target, tol, measured.join(" "), pass)
}

/// P_1(r) equals 1 at r = 0, oscillates, and dips below 0.1 only near
/// r = 0.5 on the configured grid over [0, 3].
pub fn probability_curve_shape(config: &SweepConfig) -> CheckResult {
    let name = "success-probability-curve-shape";
    let target = "P1(0)=1; oscillation; P1<0.1 only within |r-0.5|<0.25";
    let tol = "1e-12 at r=0";
    if config.r_step > 0.05 || config.r_min > 0.0 || config.r_max < 3.0 {
        return under_resolved(
            name,
            target,
            tol,
            format!(
                "grid [{}, {}] step {} cannot resolve the dip (need step <= 0.05 over [0, 3])",
                config.r_min, config.r_max, config.r_step
            ),
        );
    }
    let grid = config.r_grid();
    let cutoff = config.effective_cutoff();
    let curve: Result<Vec<(f64, f64)>> = grid
        .iter()
        .map(|&r| {
            let p = ProtocolParams::new(config.alpha, r, 1)?.with_cutoff(cutoff)?;
            Ok((r, success_probability(&p)?))
        })
        .collect();
    let curve = match curve {
        Ok(c) => c,
        Err(e) => return failure(name, target, tol, e),
    };
    let at_zero = curve[0].1;
    let dips: Vec<f64> = curve.iter().filter(|(_, p)| *p < 0.1).map(|(r, _)| *r).collect();
    let extrema = curve
        .windows(3)
        .filter(|w| {
            (w[1].1 > w[0].1 && w[1].1 > w[2].1) || (w[1].1 < w[0].1 && w[1].1 < w[2].1)
        })
        .count();
    let pass = (at_zero - 1.0).abs() <= 1e-12
        && extrema >= 4
        && !dips.is_empty()
        && dips.iter().all(|r| (r - 0.5).abs() < 0.25);
    result(
        name,
        target,
        tol,
        format!(
            "P1(0)={at_zero}; {extrema} extrema; {} dip points in [{:.3}, {:.3}]",
            dips.len(),
            dips.first().copied().unwrap_or(f64::NAN),
            dips.last().copied().unwrap_or(f64::NAN)
        ),
        pass,
    )
}

/// Minimum squeezing for N = 5 over 0.7 < r < 1.3 lies in [-4.5, -3.5] dB;
/// N = 1 and N = 2 also squeeze somewhere in that window.
pub fn squeezing_depth(config: &SweepConfig) -> CheckResult {
    let name = "squeezing-depth";
    let target = "min dB(N=5) in [-4.5, -3.5] over 0.7<r<1.3; N=1,2 reach dB<0";
    let tol = "window [-4.5, -3.5] dB";
    if config.r_step > 0.05 {
        return under_resolved(
            name,
            target,
            tol,
            format!("r step {} cannot resolve the minimum (need <= 0.05)", config.r_step),
        );
    }
    let window: Vec<f64> = config
        .r_grid()
        .into_iter()
        .filter(|&r| r > 0.7 && r < 1.3)
        .collect();
    if window.len() < 5 {
        return under_resolved(
            name,
            target,
            tol,
            "configured grid leaves fewer than 5 points in (0.7, 1.3)".into(),
        );
    }
    let min_db = |atoms: u32| -> Result<f64> {
        let mut best = f64::INFINITY;
        for &r in &window {
            let p = params_for(config, r, atoms)?;
            best = best.min(quadrature_moments_closed_form(&p, 0.0).squeezing_db);
        }
        Ok(best)
    };
    let (m1, m2, m5) = match (min_db(1), min_db(2), min_db(5)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), ..) | (_, Err(e), _) | (.., Err(e)) => return failure(name, target, tol, e),
    };
    let pass = (-4.5..=-3.5).contains(&m5) && m1 < 0.0 && m2 < 0.0;
    result(
        name,
        target,
        tol,
        format!("min dB: N=1 {m1:.3}, N=2 {m2:.3}, N=5 {m5:.3}"),
        pass,
    )
}

/// Q_M < 0 at r = 1.0 and r = 2.0 for N in {1, 2, 5}; Q_M(0) = 0.
pub fn mandel_windows(config: &SweepConfig) -> CheckResult {
    let name = "mandel-sub-poissonian";
    let target = "Q<0 at r=1.0 and r=2.0 for N in {1,2,5}; Q(0)=0";
    let tol = "1e-10 at r=0";
    let mut measured = Vec::new();
    let mut pass = true;
    for atoms in [1u32, 2, 5] {
        for r in [1.0, 2.0] {
            let q = match params_for(config, r, atoms).and_then(|p| mandel_q(&p)) {
                Ok(q) => q,
                Err(e) => return failure(name, target, tol, e),
            };
            pass &= q < 0.0;
            measured.push(format!("Q({r},N={atoms})={q:.4}"));
        }
    }
    let q0 = match params_for(config, 0.0, 1).and_then(|p| mandel_q(&p)) {
        Ok(q) => q,
        Err(e) => return failure(name, target, tol, e),
    };
    pass &= q0.abs() <= 1e-10;
    measured.push(format!("Q(0)={q0:.1e}"));
    result(name, target, tol, measured.join(" "), pass)
}

/// Wigner negativity onset: none at (r=0.2, N=1), present at (r=0.4, all N)
/// on the configured grid.
pub fn wigner_negativity_onset(config: &SweepConfig) -> CheckResult {
    let name = "wigner-negativity-onset";
    let target = "min W > -1e-3 at (0.2, 1); min W < -1e-3 at (0.4, {1,2,5})";
    let tol = "threshold 1e-3";
    let spec = match config.grid_spec() {
        Ok(s) => s,
        Err(e) => return failure(name, target, tol, e),
    };
    let jobs: Vec<(f64, u32)> = vec![(0.2, 1), (0.4, 1), (0.4, 2), (0.4, 5)];
    let mins: Result<Vec<f64>> = jobs
        .par_iter()
        .map(|&(r, atoms)| {
            let p = params_for(config, r, atoms)?;
            Ok(wigner_grid(&p, &spec)?.min_value)
        })
        .collect();
    let mins = match mins {
        Ok(m) => m,
        Err(e) => return failure(name, target, tol, e),
    };
    let pass = mins[0] > -1e-3 && mins[1..].iter().all(|&m| m < -1e-3);
    result(
        name,
        target,
        tol,
        format!(
            "min(0.2,1)={:.2e}; min(0.4,N=1,2,5)={:.2e},{:.2e},{:.2e}",
            mins[0], mins[1], mins[2], mins[3]
        ),
        pass,
    )
}

/// Dual-route agreement over the full fig4 preset matrix: closed-form
/// conditioning vs iteration (1e-10), branch maps vs the joint
/// matrix-exponential evolution (1e-8), Laguerre series vs displaced parity
/// on a 5x5 subgrid (1e-8).
pub fn oracle_equivalence(config: &SweepConfig) -> CheckResult {
    let name = "oracle-equivalence";
    let target = "closed=iterative (1e-10); branches=expm (1e-8); series=parity (1e-8)";
    let tol = "1e-10 / 1e-8 / 1e-8";
    let inner = || -> Result<(f64, f64, f64)> {
        // closed form vs iteration, all 18 pairs
        let mut worst_iter = 0.0f64;
        for (r, atoms) in fig4_pairs() {
            let p = params_for(config, r, atoms)?;
            let closed = ps_state(&p)?;
            let input = coherent_state(config.alpha, p.cutoff)?;
            let iterated = iterate_ps(&input, r, atoms)?;
            for n in 0..closed.state.dim() {
                for m in 0..closed.state.dim() {
                    let d = (closed.state.entry(n, m) - iterated.state.entry(n, m)).norm();
                    worst_iter = worst_iter.max(d);
                }
            }
            worst_iter =
                worst_iter.max((closed.success_probability - iterated.success_probability).abs());
        }
        // branch maps vs joint evolution
        let cutoff = config.effective_cutoff();
        let state = coherent_state(config.alpha, cutoff)?;
        let mut worst_blocks = 0.0f64;
        for &r in &FIG4_COUPLINGS {
            let oracle = joint_evolution_oracle(&state, r)?;
            let closed = closed_form_blocks(&state, r);
            let keep = state.dim() - 2;
            for (o, c) in [
                (&oracle.rho11, &closed.rho11),
                (&oracle.rho12, &closed.rho12),
                (&oracle.rho21, &closed.rho21),
                (&oracle.rho22, &closed.rho22),
            ] {
                for n in 0..keep {
                    for m in 0..keep {
                        worst_blocks = worst_blocks.max((o[(n, m)] - c[(n, m)]).norm());
                    }
                }
            }
        }
        // series vs displaced parity on a 5x5 subgrid shared by all pairs;
        // one kernel per point serves all 18 states
        let xs = [-0.5, 0.75, 2.0, 3.25, 4.5];
        let ys = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let points: Vec<Complex64> = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .collect();
        let states: Vec<(ProtocolParams, FieldState)> = fig4_pairs()
            .into_iter()
            .map(|(r, atoms)| {
                let p = params_for(config, r, atoms)?;
                let state = ps_state(&p)?.state;
                Ok((p, state))
            })
            .collect::<Result<_>>()?;
        let worst_wigner = points
            .par_iter()
            .map(|&gamma| {
                let kernel = DisplacedParity::build(gamma, cutoff)?;
                let mut worst = 0.0f64;
                for (p, state) in &states {
                    let series = wigner_point(p, gamma);
                    let oracle = kernel.expectation(state)?;
                    worst = worst.max((series - oracle).abs());
                }
                Ok(worst)
            })
            .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
        Ok((worst_iter, worst_blocks, worst_wigner))
    };
    match inner() {
        Ok((wi, wb, ww)) => result(
            name,
            target,
            tol,
            format!("worst: iter {wi:.2e}, blocks {wb:.2e}, wigner {ww:.2e}"),
            wi <= 1e-10 && wb <= 1e-8 && ww <= 1e-8,
        ),
        Err(e) => failure(name, target, tol, e),
    }
}

/// Deterministic xorshift64* stream for the random conservation sample.
struct Rng(u64);

impl Rng {
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Trace preservation, photon-statistics normalization, the uncertainty
/// floor and the conditioning correlation on a 50-point random sample, plus
/// the fine-grid Wigner normalization.
pub fn conservation_suite(config: &SweepConfig) -> CheckResult {
    let name = "conservation-suite";
    let target = "traces 1e-10; photon sum 1e-10; uncertainty >= 1-1e-9; P_N >= p1^N; fine integral 1e-6";
    let tol = "per-part as stated";
    let inner = || -> Result<(f64, f64, f64, f64, f64)> {
        let mut rng = Rng(0x5EED_CAFE_F00D_2024);
        let mut worst_trace = 0.0f64;
        let mut worst_photon = 0.0f64;
        let mut worst_uncertainty = f64::INFINITY;
        let mut worst_correlation = f64::INFINITY;
        for _ in 0..50 {
            let alpha = Complex64::new(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
            let r = rng.uniform(0.0, 3.0);
            let atoms = 1 + (rng.uniform(0.0, 6.0) as u32).min(5);
            let params = ProtocolParams::new(alpha, r, atoms)?;
            let state = coherent_state(alpha, params.cutoff)?;
            let blocks = joint_evolution_oracle(&state, r)?;
            worst_trace = worst_trace.max((blocks.trace_sum() - 1.0).abs());
            let photon = photon_statistics(&params)?;
            let total: f64 = photon.probabilities.iter().sum();
            worst_photon = worst_photon.max((total - 1.0).abs());
            let conditioned = ps_state(&params)?.state;
            worst_uncertainty = worst_uncertainty.min(uncertainty_product(&conditioned, 0.0)?);
            let p_n = success_probability(&params)?;
            let p_1 = success_probability(&ProtocolParams { atoms: 1, ..params })?;
            worst_correlation = worst_correlation.min(p_n - p_1.powi(atoms as i32));
        }
        let mut worst_integral = 0.0f64;
        for (r, atoms) in [(0.51, 5u32), (2.5, 2)] {
            let p = params_for(config, r, atoms)?;
            let grid = wigner_grid(&p, &GridSpec::fine_view())?;
            worst_integral = worst_integral.max((grid.total_integral - 1.0).abs());
        }
        Ok((worst_trace, worst_photon, worst_uncertainty, worst_correlation, worst_integral))
    };
    match inner() {
        Ok((tr, ph, un, co, int)) => result(
            name,
            target,
            tol,
            format!(
                "trace dev {tr:.2e}; photon dev {ph:.2e}; min uncertainty {un:.10}; \
                 min P_N - p1^N {co:.2e}; fine integral dev {int:.2e}"
            ),
            tr <= 1e-10 && ph <= 1e-10 && un >= 1.0 - 1e-9 && co >= -1e-12 && int <= 1e-6,
        ),
        Err(e) => failure(name, target, tol, e),
    }
}

/// r = 0 leaves the state, variance, Mandel Q and Wigner function at their
/// coherent-state values.
pub fn identity_cases(config: &SweepConfig) -> CheckResult {
    let name = "identity-at-zero-coupling";
    let target = "state, variance, Q, Wigner at coherent values";
    let tol = "1e-10";
    let inner = || -> Result<(f64, f64, f64, f64)> {
        let p = params_for(config, 0.0, 1)?;
        let outcome = ps_state(&p)?;
        let reference = coherent_state(config.alpha, p.cutoff)?;
        let mut state_dev = 0.0f64;
        for n in 0..reference.dim() {
            for m in 0..reference.dim() {
                state_dev =
                    state_dev.max((outcome.state.entry(n, m) - reference.entry(n, m)).norm());
            }
        }
        let mut variance_dev = 0.0f64;
        for phi in [0.0, 0.9] {
            variance_dev = variance_dev
                .max((quadrature_moments_closed_form(&p, phi).variance - 1.0).abs());
        }
        let q_dev = mandel_q(&p)?.abs();
        let mut wigner_dev = 0.0f64;
        for ix in 0..5 {
            for iy in 0..5 {
                let gamma = Complex64::new(-1.0 + 1.5 * ix as f64, -1.0 + 0.5 * iy as f64);
                let exact =
                    2.0 / std::f64::consts::PI * (-2.0 * (gamma - config.alpha).norm_sqr()).exp();
                wigner_dev = wigner_dev.max((wigner_point(&p, gamma) - exact).abs());
            }
        }
        Ok((state_dev, variance_dev, q_dev, wigner_dev))
    };
    match inner() {
        Ok((s, v, q, w)) => result(
            name,
            target,
            tol,
            format!("state dev {s:.2e}; variance dev {v:.2e}; Q dev {q:.2e}; Wigner dev {w:.2e}"),
            s <= 1e-10 && v <= 1e-10 && q <= 1e-10 && w <= 1e-10,
        ),
        Err(e) => failure(name, target, tol, e),
    }
}
