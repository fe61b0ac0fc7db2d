//! Cross-route checks at the working point alpha = sqrt(10): every closed
//! form against its independent brute-force evaluation.

use cavity_ps::*;
use num_complex::Complex64;

fn sqrt10() -> Complex64 {
    Complex64::new(10.0f64.sqrt(), 0.0)
}

fn params(r: f64, atoms: u32) -> ProtocolParams {
    ProtocolParams::new(sqrt10(), r, atoms).unwrap()
}

fn max_block_diff(
    a: &nalgebra::DMatrix<Complex64>,
    b: &nalgebra::DMatrix<Complex64>,
    keep: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..keep {
        for m in 0..keep {
            worst = worst.max((a[(n, m)] - b[(n, m)]).norm());
        }
    }
    worst
}

#[test]
fn branch_maps_match_joint_evolution() {
    let state = coherent_state(sqrt10(), 52).unwrap();
    for r in [0.2, 0.51, 1.0, 1.7, 2.5, 3.0] {
        let oracle = joint_evolution_oracle(&state, r).unwrap();
        let closed = closed_form_blocks(&state, r);
        let keep = state.dim() - 2;
        for (name, o, c) in [
            ("rho11", &oracle.rho11, &closed.rho11),
            ("rho12", &oracle.rho12, &closed.rho12),
            ("rho21", &oracle.rho21, &closed.rho21),
            ("rho22", &oracle.rho22, &closed.rho22),
        ] {
            let diff = max_block_diff(o, c, keep);
            assert!(diff < 1e-8, "{name} at r={r}: oracle deviates by {diff:e}");
        }
        assert!((oracle.trace_sum() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn conditioned_state_passes_full_validation() {
    for (r, atoms) in [(1.0, 5u32), (0.51, 1), (2.5, 2)] {
        let outcome = ps_state(&params(r, atoms)).unwrap();
        let diag = validate_state(&outcome.state);
        assert!(diag.hermiticity_defect < 1e-10, "hermiticity {:e}", diag.hermiticity_defect);
        assert!(diag.trace_defect < 1e-10, "trace {:e}", diag.trace_defect);
        assert!(diag.min_eigenvalue > -1e-10, "min eigenvalue {:e}", diag.min_eigenvalue);
    }
}

#[test]
fn closed_form_conditioning_matches_iteration_at_scale() {
    for (r, atoms) in [(1.0, 5u32), (0.51, 2), (2.2, 4)] {
        let p = params(r, atoms);
        let closed = ps_state(&p).unwrap();
        let input = coherent_state(sqrt10(), p.cutoff).unwrap();
        let iterated = iterate_ps(&input, r, atoms).unwrap();
        let diff = max_block_diff(closed.state.matrix(), iterated.state.matrix(), p.cutoff + 1);
        assert!(diff < 1e-10, "closed vs iterated at (r={r}, N={atoms}): {diff:e}");
        assert!(
            (closed.success_probability - iterated.success_probability).abs() < 1e-10,
            "success probability mismatch"
        );
    }
}

#[test]
fn quadrature_closed_form_matches_trace_route_at_scale() {
    for (r, atoms, phi) in [(1.0, 1u32, 0.0), (0.9, 5, 0.0), (1.9, 2, 0.5)] {
        let p = params(r, atoms);
        let closed = quadrature_moments_closed_form(&p, phi);
        let state = ps_state(&p).unwrap().state;
        let traced = quadrature_moments_trace(&state, phi).unwrap();
        assert!((closed.mean - traced.mean).abs() < 1e-9);
        assert!((closed.second_moment - traced.second_moment).abs() < 1e-9);
    }
}

#[test]
fn wigner_series_matches_parity_oracle_on_axis() {
    let p = params(1.0, 1);
    let state = ps_state(&p).unwrap().state;
    for x in [-1.0, 0.0, 1.2, 2.4, 3.6, 4.8] {
        let gamma = Complex64::new(x, 0.0);
        let series = wigner_point(&p, gamma);
        let oracle = wigner_parity_oracle(&state, gamma).unwrap();
        assert!(
            (series - oracle).abs() < 1e-8,
            "series {series:e} vs oracle {oracle:e} at x={x}"
        );
    }
}

#[test]
fn negativity_deepens_when_success_probability_drops() {
    // (r = 1.5, N = 2) has a far lower success probability than
    // (r = 1.0, N = 2) and a correspondingly more negative Wigner minimum
    let spec = GridSpec::new(-6.5, 6.5, 261, -3.0, 3.0, 121).unwrap();
    let deep = wigner_grid(&params(1.5, 2), &spec).unwrap();
    let shallow = wigner_grid(&params(1.0, 2), &spec).unwrap();
    assert!(deep.min_value < shallow.min_value);
    assert!(deep.min_value < -0.3 && shallow.min_value > -0.1);
    let p_deep = success_probability(&params(1.5, 2)).unwrap();
    let p_shallow = success_probability(&params(1.0, 2)).unwrap();
    assert!(p_deep < p_shallow);
}

#[test]
fn negativity_onset_location_moves_inward() {
    // at r = 0.4 the negative region sits to the right of the distribution
    // center (Re alpha ~ 3.16); by r = 0.51 it has moved to the center
    let spec = GridSpec::new(-1.0, 6.5, 151, -2.5, 2.5, 101).unwrap();
    let locate_min = |grid: &WignerGrid| {
        let mut best = (0.0f64, 0.0f64, f64::INFINITY);
        for (iy, &y) in grid.im_axis.iter().enumerate() {
            for (ix, &x) in grid.re_axis.iter().enumerate() {
                if grid.value(iy, ix) < best.2 {
                    best = (x, y, grid.value(iy, ix));
                }
            }
        }
        best
    };
    let early = wigner_grid(&params(0.4, 1), &spec).unwrap();
    let metrics = negativity_metrics(&early);
    assert!(metrics.negative_region_count >= 1);
    let (x_early, _, w_early) = locate_min(&early);
    assert!(w_early < -1e-3);
    assert!(x_early > 3.3, "minimum at {x_early}, expected right of the center");

    let center = wigner_grid(&params(0.51, 1), &spec).unwrap();
    let (x_center, _, w_center) = locate_min(&center);
    assert!(w_center < w_early);
    assert!((x_center - 10.0f64.sqrt()).abs() < 0.3, "minimum at {x_center}");

    // the five-atom state at the same coupling is deeply negative
    let deep = wigner_grid(&params(0.51, 5), &spec).unwrap();
    assert!(deep.summary().min_value < -0.05, "min {}", deep.summary().min_value);
}

#[test]
fn negative_region_count_grows_with_atom_number() {
    let spec = GridSpec::new(-6.5, 6.5, 261, -3.5, 3.5, 141).unwrap();
    for r in [0.4, 1.5, 2.5] {
        let counts: Vec<usize> = [1u32, 2, 5]
            .iter()
            .map(|&n| {
                negativity_metrics(&wigner_grid(&params(r, n), &spec).unwrap())
                    .negative_region_count
            })
            .collect();
        assert!(
            counts[0] <= counts[1] && counts[1] <= counts[2] && counts[0] >= 1,
            "counts {counts:?} at r={r} do not grow with N"
        );
    }
    // r = 1.0, N = 5: multiple distinct regions
    let spec_small = GridSpec::new(-2.0, 6.0, 161, -2.5, 2.5, 101).unwrap();
    let grid = wigner_grid(&params(1.0, 5), &spec_small).unwrap();
    assert!(negativity_metrics(&grid).negative_region_count >= 2);
}
