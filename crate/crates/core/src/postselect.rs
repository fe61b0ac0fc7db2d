//! N-atom post-selected state construction and success probability.
//!
//! The production path is the closed form — one pass over (n, m) with all
//! factorial-bearing factors accumulated in log space. The iterative
//! cosine-sandwich path exists as an oracle and accepts arbitrary
//! (non-coherent) initial states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{coherent_log_amplitudes, FieldState, ProtocolParams, TRUNCATION_LIMIT};
use crate::jc::ground_branch;
use crate::math::{ln_factorial_table, poisson_tail};

/// Result of conditioning on every atom exiting in the ground state.
#[derive(Debug, Clone)]
pub struct PsOutcome {
    /// The normalized conditional field state.
    pub state: FieldState,
    /// Trace of the unnormalized conditioned matrix, i.e. the probability
    /// that all atoms are detected in the ground state.
    pub success_probability: f64,
    /// The protocol inputs, when the outcome was produced from them.
    /// `None` for iterations started from an arbitrary state, where no
    /// coherent amplitude exists.
    pub params: Option<ProtocolParams>,
}

/// Closed-form conditioning coefficient
/// c_nm = alpha^n conj(alpha)^m / sqrt(n! m!) cos^N(r sqrt(n)) cos^N(r sqrt(m)),
/// evaluated as a log-space magnitude plus phase.
pub fn ps_coefficient(alpha: Complex64, r: f64, atoms: u32, n: usize, m: usize) -> Complex64 {
    assert!(atoms >= 1, "atom count must be >= 1");
    let lambda = alpha.norm_sqr();
    if lambda == 0.0 {
        return if n == 0 && m == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let lnf = ln_factorial_table(n.max(m));
    let cn = (r * (n as f64).sqrt()).cos();
    let cm = (r * (m as f64).sqrt()).cos();
    if cn == 0.0 || cm == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let ln_mag = (n + m) as f64 * alpha.norm().ln() - 0.5 * (lnf[n] + lnf[m])
        + atoms as f64 * (cn.abs().ln() + cm.abs().ln());
    let mut sign = 1.0;
    if atoms % 2 == 1 {
        if cn < 0.0 {
            sign = -sign;
        }
        if cm < 0.0 {
            sign = -sign;
        }
    }
    let phase = (n as f64 - m as f64) * alpha.arg();
    Complex64::from_polar(sign * ln_mag.exp(), phase)
}

/// Coherent amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) together with
/// their conditioned counterparts g_n = amp_n cos^N(r sqrt(n)). The
/// unnormalized conditioned matrix is the outer product g g†; at r = 0 the
/// two vectors are bit-identical, which keeps the r = 0 success probability
/// exactly 1.
fn amplitude_pair(params: &ProtocolParams) -> (Vec<Complex64>, Vec<Complex64>) {
    let n_atoms = params.atoms as i32;
    let base: Vec<Complex64> = coherent_log_amplitudes(params.alpha, params.cutoff)
        .into_iter()
        .map(|(ln_mag, phase)| {
            if ln_mag.is_finite() {
                Complex64::from_polar(ln_mag.exp(), phase)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let conditioned = base
        .iter()
        .enumerate()
        .map(|(n, amp)| {
            let c = (params.r * (n as f64).sqrt()).cos();
            amp * Complex64::new(c.powi(n_atoms), 0.0)
        })
        .collect();
    (base, conditioned)
}

/// Closed-form N-atom post-selected state and its success probability.
///
/// The success probability is referenced to the truncated, renormalized
/// coherent input, so r = 0 yields exactly 1 and the value agrees with
/// [`iterate_ps`] started from [`crate::fock::coherent_state`].
pub fn ps_state(params: &ProtocolParams) -> Result<PsOutcome> {
    params.validate()?;
    let lambda = params.alpha.norm_sqr();
    let tail = poisson_tail(lambda, params.cutoff);
    if tail > TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            cutoff: params.cutoff,
            tail_mass: tail,
            limit: TRUNCATION_LIMIT,
        });
    }
    let (base, g) = amplitude_pair(params);
    let trace: f64 = g.iter().map(|z| z.norm_sqr()).sum();
    if trace.is_nan() || trace <= 1e-300 {
        return Err(Error::DegenerateTrace { trace });
    }
    let input_mass: f64 = base.iter().map(|z| z.norm_sqr()).sum();
    let d = params.cutoff + 1;
    let mut matrix = DMatrix::zeros(d, d);
    for n in 0..d {
        for m in 0..d {
            matrix[(n, m)] = g[n] * g[m].conj() / Complex64::new(trace, 0.0);
        }
    }
    Ok(PsOutcome {
        state: FieldState::from_matrix_unchecked(matrix, true),
        success_probability: trace / input_mass,
        params: Some(params.clone()),
    })
}

/// Iterative conditioning with a per-atom coupling schedule: each step
/// applies the cosine sandwich and renormalizes; the success probability is
/// the product of the per-step traces.
pub fn iterate_ps_schedule(state: &FieldState, couplings: &[f64]) -> Result<PsOutcome> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized { trace: state.trace().re });
    }
    if couplings.is_empty() {
        return Err(Error::InvalidParams {
            field: "couplings",
            message: "at least one atom required".into(),
        });
    }
    let mut current = state.clone();
    let mut probability = 1.0f64;
    for &r in couplings {
        let unnormalized = ground_branch(&current, r);
        let step_trace = unnormalized.trace().re;
        if step_trace.is_nan() || step_trace <= 1e-300 {
            return Err(Error::DegenerateTrace { trace: step_trace });
        }
        probability *= step_trace;
        current = unnormalized.normalize()?;
    }
    Ok(PsOutcome { state: current, success_probability: probability, params: None })
}

/// Iterative conditioning with the same coupling for every atom.
pub fn iterate_ps(state: &FieldState, r: f64, atoms: u32) -> Result<PsOutcome> {
    assert!(r >= 0.0, "coupling parameter r must be >= 0, got {r}");
    if atoms == 0 {
        return Err(Error::InvalidParams {
            field: "atoms",
            message: "at least one atom required".into(),
        });
    }
    iterate_ps_schedule(state, &vec![r; atoms as usize])
}

/// Success probability alone, without building the state matrix.
pub fn success_probability(params: &ProtocolParams) -> Result<f64> {
    params.validate()?;
    let lambda = params.alpha.norm_sqr();
    let tail = poisson_tail(lambda, params.cutoff);
    if tail > TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            cutoff: params.cutoff,
            tail_mass: tail,
            limit: TRUNCATION_LIMIT,
        });
    }
    let amps = coherent_log_amplitudes(params.alpha, params.cutoff);
    let mut conditioned = 0.0f64;
    let mut input_mass = 0.0f64;
    for (n, (ln_mag, _)) in amps.iter().enumerate() {
        if !ln_mag.is_finite() {
            continue;
        }
        let w = (2.0 * ln_mag).exp();
        input_mass += w;
        let c = (params.r * (n as f64).sqrt()).cos();
        conditioned += w * c.powi(2 * params.atoms as i32);
    }
    if conditioned.is_nan() || conditioned <= 1e-300 {
        return Err(Error::DegenerateTrace { trace: conditioned });
    }
    Ok(conditioned / input_mass)
}

/// Success probability over a coupling grid, one (r, P_N) pair per grid
/// point, in the order given.
pub fn success_probability_curve(
    alpha: Complex64,
    atoms: u32,
    r_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if r_grid.is_empty() {
        return Err(Error::InvalidParams {
            field: "r_grid",
            message: "grid must be nonempty".into(),
        });
    }
    let template = ProtocolParams::new(alpha, 0.0, atoms)?;
    r_grid
        .iter()
        .map(|&r| {
            if r.is_nan() || r < 0.0 {
                return Err(Error::InvalidParams {
                    field: "r_grid",
                    message: format!("grid values must be >= 0, got {r}"),
                });
            }
            let params = ProtocolParams { r, ..template.clone() };
            Ok((r, success_probability(&params)?))
        })
        .collect()
}
