//! Resonant Jaynes-Cummings branch maps and a brute-force joint-evolution
//! oracle.
//!
//! A ground-state atom crossing the cavity splits the field density matrix
//! into two branches: the atom stays in the ground state (a cosine sandwich
//! on the photon index) or absorbs one photon (an index-lowering sine
//! sandwich). Sign convention: writing the interaction picture operators with
//! their -i prefactors, the excited-branch map evaluates to
//!
//! ```text
//! rho11(n-1, m-1) = sin(r sqrt(n)) rho(n, m) sin(r sqrt(m))
//! ```
//!
//! with a +1 overall sign — the two -i factors cancel the leading minus of
//! the operator product. This is the manifestly positive-semidefinite form,
//! and it is the one the matrix-exponential oracle reproduces.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FieldState;

/// Diagonal of the ground-branch coupling operator, cos(r sqrt(n)) for
/// n = 0..=cutoff.
pub fn cosine_coupling_diag(r: f64, cutoff: usize) -> Vec<f64> {
    assert!(r >= 0.0, "coupling parameter r must be >= 0, got {r}");
    (0..=cutoff).map(|n| (r * (n as f64).sqrt()).cos()).collect()
}

/// Diagonal sin(r sqrt(n)) for n = 0..=cutoff.
fn sine_coupling_diag(r: f64, cutoff: usize) -> Vec<f64> {
    (0..=cutoff).map(|n| (r * (n as f64).sqrt()).sin()).collect()
}

/// Ground branch (atom exits in the ground state), unnormalized:
/// entry(n, m) = cos(r sqrt(n)) rho(n, m) cos(r sqrt(m)).
pub fn ground_branch(state: &FieldState, r: f64) -> FieldState {
    let cos = cosine_coupling_diag(r, state.cutoff());
    let d = state.dim();
    let mut out = DMatrix::zeros(d, d);
    for n in 0..d {
        for m in 0..d {
            out[(n, m)] = Complex64::new(cos[n] * cos[m], 0.0) * state.entry(n, m);
        }
    }
    FieldState::from_matrix_unchecked(out, false)
}

/// Excited branch (atom absorbs one photon), unnormalized:
/// entry(n - 1, m - 1) = sin(r sqrt(n)) rho(n, m) sin(r sqrt(m)).
pub fn excited_branch(state: &FieldState, r: f64) -> FieldState {
    assert!(r >= 0.0, "coupling parameter r must be >= 0, got {r}");
    let sin = sine_coupling_diag(r, state.cutoff());
    let d = state.dim();
    let mut out = DMatrix::zeros(d, d);
    for n in 1..d {
        for m in 1..d {
            out[(n - 1, m - 1)] = Complex64::new(sin[n] * sin[m], 0.0) * state.entry(n, m);
        }
    }
    FieldState::from_matrix_unchecked(out, false)
}

/// The four field-operator blocks of the joint atom-field density matrix
/// after one transit, in the (excited, ground) atomic basis. All blocks are
/// unnormalized; `rho11 + rho22` traces preserve the input trace.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBlocks {
    pub rho11: DMatrix<Complex64>,
    pub rho12: DMatrix<Complex64>,
    pub rho21: DMatrix<Complex64>,
    pub rho22: DMatrix<Complex64>,
}

impl JointBlocks {
    /// Tr[rho11] + Tr[rho22]; equals the input trace for unitary evolution.
    pub fn trace_sum(&self) -> f64 {
        (self.rho11.trace() + self.rho22.trace()).re
    }
}

/// All four blocks from the closed-form operator sandwiches.
///
/// The cross blocks carry the -i / +i prefactors of the index-shifting
/// operators: rho12(n-1, m) = -i sin(r sqrt(n)) rho(n, m) cos(r sqrt(m)) and
/// rho21 = rho12†.
pub fn closed_form_blocks(state: &FieldState, r: f64) -> JointBlocks {
    let cutoff = state.cutoff();
    let cos = cosine_coupling_diag(r, cutoff);
    let sin = sine_coupling_diag(r, cutoff);
    let d = state.dim();
    let mut rho12 = DMatrix::zeros(d, d);
    let mut rho21 = DMatrix::zeros(d, d);
    for n in 1..d {
        for m in 0..d {
            rho12[(n - 1, m)] =
                Complex64::new(0.0, -1.0) * Complex64::new(sin[n] * cos[m], 0.0) * state.entry(n, m);
            rho21[(m, n - 1)] =
                Complex64::new(0.0, 1.0) * Complex64::new(cos[m] * sin[n], 0.0) * state.entry(m, n);
        }
    }
    JointBlocks {
        rho11: excited_branch(state, r).matrix().clone(),
        rho12,
        rho21,
        rho22: ground_branch(state, r).matrix().clone(),
    }
}

/// Kronecker product with the first factor as the slow index.
fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Brute-force oracle: build the joint interaction generator
/// r (sigma+ ⊗ a + sigma- ⊗ a†) on the 2(cutoff+1)-dimensional space,
/// exponentiate it numerically, evolve rho_F ⊗ |g><g| and read off the four
/// field blocks.
///
/// Kept deliberately independent of the closed forms above: the only shared
/// ingredient is the ladder matrix.
pub fn joint_evolution_oracle(state: &FieldState, r: f64) -> Result<JointBlocks> {
    assert!(r >= 0.0, "coupling parameter r must be >= 0, got {r}");
    if !state.is_normalized() {
        return Err(Error::NotNormalized { trace: state.trace().re });
    }
    let d = state.dim();
    let a = crate::fock::LadderMatrix::annihilation(state.cutoff());
    let adag = crate::fock::LadderMatrix::creation(state.cutoff());
    // atomic basis (excited, ground): sigma+ = |e><g|, sigma- = |g><e|
    let mut sigma_p = DMatrix::zeros(2, 2);
    sigma_p[(0, 1)] = Complex64::new(1.0, 0.0);
    let sigma_m = sigma_p.adjoint();
    let generator = kron(&sigma_p, a.matrix()) + kron(&sigma_m, adag.matrix());
    // U = exp(-i r K); nalgebra uses Padé with scaling and squaring
    let u = (generator * Complex64::new(0.0, -r)).exp();
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical(
            "matrix exponential of the joint generator produced non-finite entries".into(),
        ));
    }
    // rho(0) = |g><g| ⊗ rho_F lives in the lower-right block
    let mut rho0 = DMatrix::zeros(2 * d, 2 * d);
    rho0.view_mut((d, d), (d, d)).copy_from(state.matrix());
    let rho_t = &u * rho0 * u.adjoint();
    Ok(JointBlocks {
        rho11: rho_t.view((0, 0), (d, d)).into_owned(),
        rho12: rho_t.view((0, d), (d, d)).into_owned(),
        rho21: rho_t.view((d, 0), (d, d)).into_owned(),
        rho22: rho_t.view((d, d), (d, d)).into_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, FieldState};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn sqrt10() -> Complex64 {
        Complex64::new(10.0f64.sqrt(), 0.0)
    }

    fn fock_state(n: usize, cutoff: usize) -> FieldState {
        let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        FieldState::from_matrix(m, true).unwrap()
    }

    #[test]
    fn cosine_diag_examples() {
        let diag = cosine_coupling_diag(0.0, 10);
        assert!(diag.iter().all(|&c| c == 1.0));
        let diag = cosine_coupling_diag(std::f64::consts::PI, 1);
        assert_abs_diff_eq!(diag[1], -1.0, epsilon = 1e-15);
        let diag = cosine_coupling_diag(0.51, 10);
        assert_abs_diff_eq!(diag[10], (0.51 * 10.0f64.sqrt()).cos(), epsilon = 1e-15);
    }

    #[test]
    fn zero_coupling_is_the_identity_channel() {
        let state = coherent_state(Complex64::new(1.4, -0.2), 40).unwrap();
        let ground = ground_branch(&state, 0.0);
        assert_eq!(ground.matrix(), state.matrix());
        let excited = excited_branch(&state, 0.0);
        assert!(excited.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn vacuum_cannot_excite_the_atom() {
        let vac = coherent_state(Complex64::new(0.0, 0.0), 8).unwrap();
        for r in [0.3, 1.0, 2.7] {
            let excited = excited_branch(&vac, r);
            assert!(excited.matrix().iter().all(|z| z.norm() == 0.0));
            assert_abs_diff_eq!(ground_branch(&vac, r).trace().re, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ground_trace_matches_paperlike_value_at_r051() {
        let state = coherent_state(sqrt10(), 60).unwrap();
        let tr = ground_branch(&state, 0.51).trace().re;
        assert_abs_diff_eq!(tr, 0.0638, epsilon = 5e-4);
        let tr_exc = excited_branch(&state, 0.51).trace().re;
        assert_abs_diff_eq!(tr_exc, 1.0 - 0.0638, epsilon = 5e-4);
    }

    #[test]
    fn ground_trace_matches_direct_scalar_sum() {
        // coherent(1, 20), r = 1: trace = e^{-1} sum cos^2(sqrt(n)) / n!
        let state = coherent_state(Complex64::new(1.0, 0.0), 20).unwrap();
        let mut expected = 0.0;
        let mut weight = (-1.0f64).exp();
        for n in 0..=20usize {
            if n > 0 {
                weight /= n as f64;
            }
            expected += weight * (n as f64).sqrt().cos().powi(2);
        }
        // the constructor renormalizes by the retained mass
        let retained: f64 = {
            let mut s = 0.0;
            let mut w = (-1.0f64).exp();
            for n in 0..=20usize {
                if n > 0 {
                    w /= n as f64;
                }
                s += w;
            }
            s
        };
        let tr = ground_branch(&state, 1.0).trace().re;
        assert_abs_diff_eq!(tr, expected / retained, epsilon = 1e-12);
    }

    #[test]
    fn branch_traces_preserve_total() {
        for (alpha, r) in [
            (Complex64::new(1.0, 0.0), 0.7),
            (Complex64::new(2.0, 1.0), 1.9),
            (sqrt10(), 0.51),
        ] {
            let state = coherent_state(alpha, 64).unwrap();
            let total = ground_branch(&state, r).trace().re + excited_branch(&state, r).trace().re;
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_photon_rabi_periodicity() {
        let one = fock_state(1, 6);
        for r in [0.0, 0.4, 1.0, std::f64::consts::PI, 4.4] {
            let tr = ground_branch(&one, r).trace().re;
            assert_abs_diff_eq!(tr, r.cos().powi(2), epsilon = 1e-12);
            let tr_period = ground_branch(&one, r + std::f64::consts::PI).trace().re;
            assert_abs_diff_eq!(tr_period, tr, epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_r0_returns_input_in_ground_block() {
        let state = coherent_state(Complex64::new(1.0, 0.5), 32).unwrap();
        let blocks = joint_evolution_oracle(&state, 0.0).unwrap();
        for n in 0..state.dim() {
            for m in 0..state.dim() {
                assert_abs_diff_eq!(blocks.rho22[(n, m)].re, state.entry(n, m).re, epsilon = 1e-12);
                assert_abs_diff_eq!(blocks.rho22[(n, m)].im, state.entry(n, m).im, epsilon = 1e-12);
                assert_abs_diff_eq!(blocks.rho11[(n, m)].norm(), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(blocks.rho12[(n, m)].norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn oracle_single_photon_full_rabi_cycle() {
        let one = fock_state(1, 6);
        let blocks = joint_evolution_oracle(&one, std::f64::consts::PI).unwrap();
        assert_abs_diff_eq!(blocks.rho22[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(blocks.rho11[(0, 0)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_matches_closed_form_blocks() {
        let state = coherent_state(sqrt10(), 66).unwrap();
        for r in [0.51, 1.0] {
            let oracle = joint_evolution_oracle(&state, r).unwrap();
            let closed = closed_form_blocks(&state, r);
            // exclude the top two Fock rows/columns: the truncated generator
            // clips the top excited-branch coupling
            let keep = state.dim() - 2;
            for n in 0..keep {
                for m in 0..keep {
                    for (o, c) in [
                        (&oracle.rho11, &closed.rho11),
                        (&oracle.rho12, &closed.rho12),
                        (&oracle.rho21, &closed.rho21),
                        (&oracle.rho22, &closed.rho22),
                    ] {
                        assert_abs_diff_eq!(o[(n, m)].re, c[(n, m)].re, epsilon = 1e-8);
                        assert_abs_diff_eq!(o[(n, m)].im, c[(n, m)].im, epsilon = 1e-8);
                    }
                }
            }
            assert_abs_diff_eq!(oracle.trace_sum(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn oracle_rejects_unnormalized_input() {
        let state = coherent_state(sqrt10(), 60).unwrap();
        let unnorm = ground_branch(&state, 0.9);
        assert!(joint_evolution_oracle(&unnorm, 0.5).is_err());
    }

    #[test]
    fn cross_blocks_are_mutually_adjoint() {
        let state = coherent_state(Complex64::new(1.3, 0.7), 40).unwrap();
        let blocks = closed_form_blocks(&state, 1.2);
        let diff = (&blocks.rho12 - blocks.rho21.adjoint()).norm();
        assert!(diff < 1e-12, "rho12 vs rho21 adjoint defect {diff:e}");
    }
}
