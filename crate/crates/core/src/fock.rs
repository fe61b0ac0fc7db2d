//! Truncated Fock-space representation of the cavity field.
//!
//! Everything downstream works with dense complex density matrices indexed by
//! photon numbers (n, m) with 0 <= n, m <= cutoff. At the cutoffs this crate
//! uses (a few hundred at most) dense storage is simpler and faster than any
//! sparse scheme.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{ln_factorial_table, poisson_tail};

/// Largest Poisson tail mass tolerated above the cutoff when building states.
pub const TRUNCATION_LIMIT: f64 = 1e-9;

/// Smallest cutoff ever returned by [`choose_cutoff`].
pub const CUTOFF_FLOOR: usize = 32;

/// Density matrix of the cavity mode on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    matrix: DMatrix<Complex64>,
    cutoff: usize,
    normalized: bool,
}

impl FieldState {
    /// Wrap a matrix after checking shape, hermiticity (1e-12) and, for
    /// normalized states, unit trace (1e-10).
    pub fn from_matrix(matrix: DMatrix<Complex64>, normalized: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidParams {
                field: "matrix",
                message: format!("expected nonempty square matrix, got {}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let state = Self::from_matrix_unchecked(matrix, normalized);
        let herm = state.hermiticity_defect();
        if herm > 1e-12 {
            return Err(Error::InvalidParams {
                field: "matrix",
                message: format!("hermiticity defect {herm:.3e} exceeds 1e-12"),
            });
        }
        if normalized {
            let tr = state.trace();
            if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-12 {
                return Err(Error::NotNormalized { trace: tr.re });
            }
        }
        Ok(state)
    }

    /// Wrap a matrix without validation. Needed to represent deliberately
    /// defective states for [`validate_state`] and raw deserialization.
    pub fn from_matrix_unchecked(matrix: DMatrix<Complex64>, normalized: bool) -> Self {
        let cutoff = matrix.nrows().saturating_sub(1);
        Self { matrix, cutoff, normalized }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Highest retained photon number.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Matrix dimension, cutoff + 1.
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn entry(&self, n: usize, m: usize) -> Complex64 {
        self.matrix[(n, m)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diagonal().iter().sum()
    }

    /// Tr[rho^2]; equals 1 for pure states.
    pub fn purity(&self) -> f64 {
        // Tr[rho rho] = sum_{nm} rho_nm rho_mn = sum |rho_nm|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real parts of the diagonal (the photon-number distribution for a
    /// normalized state).
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Divide by the trace; fails when the trace is numerically degenerate.
    pub fn normalize(mut self) -> Result<Self> {
        let tr = self.trace().re;
        if tr.is_nan() || tr <= 1e-300 {
            return Err(Error::DegenerateTrace { trace: tr });
        }
        self.matrix /= Complex64::new(tr, 0.0);
        self.normalized = true;
        Ok(self)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for n in 0..m.nrows() {
            for k in n..m.ncols() {
                let d = (m[(n, k)] - m[(k, n)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Serialize as the documented JSON schema
    /// `{"cutoff": .., "re": [..], "im": [..]}` with row-major entries.
    pub fn to_json(&self) -> String {
        let schema = FieldStateJson::from(self);
        serde_json::to_string(&schema).expect("field state serialization cannot fail")
    }

    /// Parse the JSON schema produced by [`FieldState::to_json`]. The
    /// normalized flag is re-derived from the data (unit trace and
    /// hermiticity within tolerance).
    pub fn from_json(text: &str) -> Result<Self> {
        let schema: FieldStateJson =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        schema.into_state()
    }
}

/// JSON schema for [`FieldState`]: `cutoff` plus row-major `re`/`im` arrays
/// of length (cutoff + 1)^2.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldStateJson {
    pub cutoff: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&FieldState> for FieldStateJson {
    fn from(state: &FieldState) -> Self {
        let d = state.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for n in 0..d {
            for m in 0..d {
                let z = state.matrix[(n, m)];
                re.push(z.re);
                im.push(z.im);
            }
        }
        FieldStateJson { cutoff: state.cutoff, re, im }
    }
}

impl FieldStateJson {
    pub fn into_state(self) -> Result<FieldState> {
        let d = self.cutoff + 1;
        if self.re.len() != d * d || self.im.len() != d * d {
            return Err(Error::Format(format!(
                "expected {} entries for cutoff {}, got re: {}, im: {}",
                d * d,
                self.cutoff,
                self.re.len(),
                self.im.len()
            )));
        }
        let mut matrix = DMatrix::zeros(d, d);
        for n in 0..d {
            for m in 0..d {
                matrix[(n, m)] = Complex64::new(self.re[n * d + m], self.im[n * d + m]);
            }
        }
        let state = FieldState::from_matrix_unchecked(matrix, false);
        let tr = state.trace();
        let normalized = state.hermiticity_defect() <= 1e-12
            && (tr.re - 1.0).abs() <= 1e-10
            && tr.im.abs() <= 1e-12;
        Ok(FieldState { normalized, ..state })
    }
}

/// Which ladder operator a [`LadderMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Annihilation,
    Creation,
    Number,
}

/// Dense matrix of a ladder operator on the truncated space.
///
/// The annihilation matrix has sqrt(n) at (n - 1, n); creation is its
/// conjugate transpose; number is diagonal n.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMatrix {
    matrix: DMatrix<Complex64>,
    kind: LadderKind,
}

impl LadderMatrix {
    pub fn annihilation(cutoff: usize) -> Self {
        let d = cutoff + 1;
        let mut m = DMatrix::zeros(d, d);
        for n in 1..d {
            m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        Self { matrix: m, kind: LadderKind::Annihilation }
    }

    pub fn creation(cutoff: usize) -> Self {
        let matrix = Self::annihilation(cutoff).matrix.adjoint();
        Self { matrix, kind: LadderKind::Creation }
    }

    pub fn number(cutoff: usize) -> Self {
        let d = cutoff + 1;
        let mut m = DMatrix::zeros(d, d);
        for n in 0..d {
            m[(n, n)] = Complex64::new(n as f64, 0.0);
        }
        Self { matrix: m, kind: LadderKind::Number }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> LadderKind {
        self.kind
    }
}

/// Inputs of the post-selection protocol.
///
/// The dimensionless coupling `r` subsumes the vacuum Rabi frequency and the
/// transit time; neither appears separately anywhere in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    /// Coherent amplitude of the initial cavity field.
    pub alpha: Complex64,
    /// Dimensionless atom-field coupling, r >= 0.
    pub r: f64,
    /// Number of post-selected atoms, 1..=64.
    pub atoms: u32,
    /// Highest retained photon number.
    pub cutoff: usize,
    /// Quadrature phase (radians) used as the default analysis angle.
    pub phase: f64,
}

/// Hard cap on the atom count; the physics of interest saturates long before.
pub const MAX_ATOMS: u32 = 64;

impl ProtocolParams {
    /// Build params with the default cutoff policy
    /// `max(32, ceil(|alpha|^2 + 8|alpha| + 16))` and phase 0.
    pub fn new(alpha: Complex64, r: f64, atoms: u32) -> Result<Self> {
        let params = Self {
            alpha,
            r,
            atoms,
            cutoff: default_cutoff(alpha),
            phase: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Override the cutoff. Values below the default policy are accepted;
    /// state constructors still reject cutoffs whose Poisson tail exceeds
    /// [`TRUNCATION_LIMIT`].
    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParams {
                field: "cutoff",
                message: "cutoff must be positive".into(),
            });
        }
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.re.is_finite() || !self.alpha.im.is_finite() {
            return Err(Error::InvalidParams {
                field: "alpha",
                message: format!("must be finite, got {}", self.alpha),
            });
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParams {
                field: "r",
                message: format!("must be finite and >= 0, got {}", self.r),
            });
        }
        if self.atoms == 0 || self.atoms > MAX_ATOMS {
            return Err(Error::InvalidParams {
                field: "atoms",
                message: format!("must be in 1..={MAX_ATOMS}, got {}", self.atoms),
            });
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidParams {
                field: "cutoff",
                message: "cutoff must be positive".into(),
            });
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParams {
                field: "phase",
                message: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Default cutoff policy: `max(32, ceil(|alpha|^2 + 8|alpha| + 16))`.
///
/// For |alpha|^2 = 10 this yields 52, where the Poisson tail is near 1e-21;
/// the conditioning cosines only shrink amplitudes, so nothing downstream
/// needs more headroom.
pub fn default_cutoff(alpha: Complex64) -> usize {
    let a = alpha.norm();
    let needed = (a * a + 8.0 * a + 16.0).ceil() as usize;
    needed.max(CUTOFF_FLOOR)
}

/// Smallest cutoff in whose own level and above less than `tail_epsilon` of
/// the Poisson(|alpha|^2) mass remains, floored at [`CUTOFF_FLOOR`]; the
/// retained top level is then itself already negligible.
///
/// Panics when `tail_epsilon` is outside (0, 1).
pub fn choose_cutoff(alpha: Complex64, tail_epsilon: f64) -> usize {
    assert!(
        tail_epsilon > 0.0 && tail_epsilon < 1.0,
        "tail_epsilon must lie in (0, 1), got {tail_epsilon}"
    );
    let lambda = alpha.norm_sqr();
    if lambda == 0.0 {
        return CUTOFF_FLOOR;
    }
    // mass at-and-above n is poisson_tail(lambda, n - 1), monotone
    // decreasing in n: bisect.
    let mut lo = 1usize;
    let mut hi = (lambda + 20.0 * lambda.sqrt() + 200.0).ceil() as usize;
    debug_assert!(poisson_tail(lambda, hi - 1) < tail_epsilon);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if poisson_tail(lambda, mid - 1) < tail_epsilon {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo.max(CUTOFF_FLOOR)
}

/// Log-magnitudes and phases of the coherent amplitudes
/// e^{-|alpha|^2/2} alpha^n / sqrt(n!), n = 0..=cutoff.
///
/// Returned as (ln magnitude, phase) pairs; for alpha = 0 only n = 0 is
/// finite. Shared by the coherent-state constructor and the closed-form
/// post-selection path so the two stay bit-compatible.
pub(crate) fn coherent_log_amplitudes(alpha: Complex64, cutoff: usize) -> Vec<(f64, f64)> {
    let lambda = alpha.norm_sqr();
    let lnf = ln_factorial_table(cutoff);
    let (ln_a, arg_a) = if lambda > 0.0 {
        (alpha.norm().ln(), alpha.arg())
    } else {
        (f64::NEG_INFINITY, 0.0)
    };
    (0..=cutoff)
        .map(|n| {
            if lambda == 0.0 {
                if n == 0 {
                    (0.0, 0.0)
                } else {
                    (f64::NEG_INFINITY, 0.0)
                }
            } else {
                (-lambda / 2.0 + n as f64 * ln_a - 0.5 * lnf[n], n as f64 * arg_a)
            }
        })
        .collect()
}

/// Coherent state |alpha><alpha| truncated at `cutoff` and renormalized so
/// the trace is exactly 1 on the truncated space.
///
/// Fails when the Poisson tail above the cutoff exceeds
/// [`TRUNCATION_LIMIT`].
pub fn coherent_state(alpha: Complex64, cutoff: usize) -> Result<FieldState> {
    let lambda = alpha.norm_sqr();
    let tail = poisson_tail(lambda, cutoff);
    if tail > TRUNCATION_LIMIT {
        return Err(Error::Truncation { cutoff, tail_mass: tail, limit: TRUNCATION_LIMIT });
    }
    let amps: Vec<Complex64> = coherent_log_amplitudes(alpha, cutoff)
        .into_iter()
        .map(|(ln_mag, phase)| {
            if ln_mag.is_finite() {
                Complex64::from_polar(ln_mag.exp(), phase)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let d = cutoff + 1;
    let mut matrix = DMatrix::zeros(d, d);
    for n in 0..d {
        for m in 0..d {
            matrix[(n, m)] = amps[n] * amps[m].conj() / Complex64::new(norm, 0.0);
        }
    }
    Ok(FieldState { matrix, cutoff, normalized: true })
}

/// Defect measures of a candidate density matrix. Diagnostics are values,
/// not failures; use them to decide whether a matrix is a physical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    /// max |rho(n,m) - conj(rho(m,n))|
    pub hermiticity_defect: f64,
    /// |Tr rho - 1|
    pub trace_defect: f64,
    /// Smallest eigenvalue of the Hermitian part (rho + rho†)/2.
    pub min_eigenvalue: f64,
}

/// Compute hermiticity, trace and positivity diagnostics without mutating
/// the input.
pub fn validate_state(state: &FieldState) -> StateDiagnostics {
    let hermiticity_defect = state.hermiticity_defect();
    let tr = state.trace();
    let trace_defect = (tr - Complex64::new(1.0, 0.0)).norm();
    // Eigenvalues of the Hermitian part; for a Hermitian input this is the
    // spectrum itself.
    let herm = (state.matrix() + state.matrix().adjoint()).scale(0.5);
    let eigenvalues = herm.symmetric_eigen().eigenvalues;
    let min_eigenvalue = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    StateDiagnostics { hermiticity_defect, trace_defect, min_eigenvalue }
}
