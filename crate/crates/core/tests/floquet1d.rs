use std::f64::consts::PI;

use aowqed_core::floquet1d::*;
use aowqed_core::scales::K_A;
use proptest::prelude::*;

fn residual_norm(matrix: &impl std::ops::Index<(usize, usize), Output = f64>, n: usize, v: &[f64], value: f64) -> f64 {
    (0..n)
        .map(|i| {
            let row: f64 = (0..n).map(|j| matrix[(i, j)] * v[j]).sum();
            (row - value * v[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

#[test]
fn floquet_matrix_reads_off_entries() {
    let m = build_floquet_matrix(0.0, 0.2, 0.4, 1);
    let expected = [[1.4, 0.1, 0.0], [0.1, 0.0, 0.1], [0.0, 0.1, 0.6]];
    for (i, row) in expected.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            assert!((m[(i, j)] - e).abs() < 1e-15, "({i},{j}) = {}", m[(i, j)]);
        }
    }
}

#[test]
fn unmodulated_matrix_is_diagonal() {
    let k = 0.7;
    let m = build_floquet_matrix(k, 0.0, 0.3, 4);
    for i in 0..9 {
        for j in 0..9 {
            let l = i as f64 - 4.0;
            let want = if i == j { (l + k / K_A).powi(2) - 0.3 * l } else { 0.0 };
            assert_eq!(m[(i, j)], want);
        }
    }
    let spec = LatticeSpec1D::superlattice(0.0, 0.3, 0.0, 2, 0.0);
    let s = build_superlattice_matrix(k, &spec, 2, 4);
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            if i != j {
                assert_eq!(s[(i, j)], 0.0);
            }
        }
    }
}

#[test]
fn static_superlattice_is_block_diagonal_in_floquet_index() {
    let (l_max, nu_max) = (3, 10);
    let basis = Basis::Superlattice { l_max, nu_max, period_ratio: 3 };
    let spec_a = LatticeSpec1D::superlattice(0.0, 0.3, 2.5, 3, 0.1);
    let spec_b = LatticeSpec1D::superlattice(0.0, 0.0, 2.5, 3, 0.1);
    let m = basis.matrix(0.4, &spec_a);
    for i in 0..basis.dim() {
        for j in 0..basis.dim() {
            if basis.floquet_index(i) != basis.floquet_index(j) {
                assert_eq!(m[(i, j)], 0.0);
            }
        }
    }
    // each ℓ block is the static Bloch problem shifted by -Ωℓ
    let bloch = Basis::Superlattice { l_max: 0, nu_max, period_ratio: 3 };
    let statics = solve_at(&spec_b, &bloch, 0.4).values;
    let moving = solve_at(&spec_a, &basis, 0.4).values;
    let mut expected: Vec<f64> = Vec::new();
    for l in -(l_max as i64)..=(l_max as i64) {
        expected.extend(statics.iter().map(|e| e - 0.3 * l as f64));
    }
    expected.sort_by(f64::total_cmp);
    for (a, b) in moving.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn superlattice_without_static_part_contains_homogeneous_spectrum() {
    let spec = LatticeSpec1D::superlattice(0.3, 0.2, 0.0, 1, 0.0);
    let basis = Basis::Superlattice { l_max: 6, nu_max: 6, period_ratio: 1 };
    let k = 1.1;
    let full = solve_at(&spec, &basis, k).values;
    let homogeneous = solve_at(&LatticeSpec1D::homogeneous(0.3, 0.2), &Basis::Homogeneous { l_max: 6 }, k).values;
    for e in homogeneous {
        let nearest = full.iter().map(|f| (f - e).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-10);
    }
    // with Ω ≠ 0 the static and travelling parts are not interchangeable
    let mixed = LatticeSpec1D::superlattice(0.3, 0.2, 0.3, 1, 0.0);
    let a = solve_at(&mixed, &basis, k).values;
    let b = build_floquet_matrix(k, 0.6, 0.2, 6);
    let lowest_b = aowqed_core::linalg::eigvalsh_real(b)[0];
    assert!(a.iter().all(|e| (e - lowest_b).abs() > 1e-6));
}

#[test]
fn floquet_copies_are_eigenpairs() {
    // homogeneous: (ω̃ + mΩ, u^(ℓ+m)) at k + m k_a
    let (v_a, omega, l_max) = (0.6, 0.3, 24);
    let k = 0.9;
    let basis = Basis::Homogeneous { l_max };
    let spec = LatticeSpec1D::homogeneous(v_a, omega);
    let sys = solve_at(&spec, &basis, k);
    let n = basis.dim();
    let mut checked = 0;
    for j in 0..n {
        let u = sys.vector(j);
        let interior: f64 = u.iter().enumerate().filter(|(i, _)| (*i as i64 - l_max as i64).abs() > 8).map(|(_, x)| x * x).sum();
        if interior > 1e-20 {
            continue;
        }
        for m in [-2i64, 1, 3] {
            let shifted: Vec<f64> = (0..n)
                .map(|i| {
                    let src = i as i64 + m;
                    if (0..n as i64).contains(&src) { u[src as usize] } else { 0.0 }
                })
                .collect();
            let h = build_floquet_matrix(k + K_A * m as f64, v_a, omega, l_max);
            assert!(residual_norm(&h, n, &shifted, sys.values[j] + omega * m as f64) < 1e-8);
            checked += 1;
        }
    }
    assert!(checked > 10);

    // superlattice: (ω̃ - mΩ, u^(ℓ-m, ν)) at the same k
    let spec = LatticeSpec1D::superlattice(0.3, 0.4, 2.5, 3, 1.0 / 12.0);
    let basis = Basis::Superlattice { l_max: 12, nu_max: 14, period_ratio: 3 };
    let sys = solve_at(&spec, &basis, 0.5);
    let h = basis.matrix(0.5, &spec);
    let n = basis.dim();
    let block = 29;
    let mut checked = 0;
    for j in 0..n {
        let u = sys.vector(j);
        let far: f64 = (0..n).filter(|&i| basis.floquet_index(i).abs() > 6).map(|i| u[i] * u[i]).sum();
        if far > 1e-24 || checked > 20 {
            continue;
        }
        let m = 2i64;
        let shifted: Vec<f64> = (0..n)
            .map(|i| {
                let src = i as i64 - m * block as i64;
                if (0..n as i64).contains(&src) { u[src as usize] } else { 0.0 }
            })
            .collect();
        assert!(residual_norm(&h, n, &shifted, sys.values[j] - 0.4 * m as f64) < 1e-8);
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn static_lattice_spectrum_is_even_in_k() {
    let spec = LatticeSpec1D::homogeneous(0.7, 0.0);
    let basis = Basis::Homogeneous { l_max: 16 };
    for k in [0.1, 0.8, 2.0, 3.0] {
        let a = solve_at(&spec, &basis, k).values;
        let b = solve_at(&spec, &basis, -k).values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn travelling_modulation_breaks_k_symmetry() {
    let spec = LatticeSpec1D::homogeneous(0.2, 0.4);
    let basis = certify_truncation(&spec).unwrap().basis;
    let grid = zone_grid(64);
    let bands = quasi_energy_bands(&spec, &grid, None).unwrap();
    let mut asym: f64 = 0.0;
    for (i, &k) in grid.iter().enumerate() {
        let mirrored = solve_at(&spec, &basis, -k).values;
        for j in 0..bands.branch_count() {
            if bands.samples[i].is_edge_state(j) {
                continue;
            }
            let e = bands.samples[i].values[j];
            let nearest = mirrored.iter().map(|m| (m - e).abs()).fold(f64::INFINITY, f64::min);
            asym = asym.max(nearest);
        }
    }
    assert!(asym > 1e-3, "{asym}");
}

#[test]
fn weak_static_gap_equals_potential() {
    // nearly-free two-level oracle at the zone edge
    let v_a = 0.05;
    let sys = solve_at(&LatticeSpec1D::homogeneous(v_a, 0.0), &Basis::Homogeneous { l_max: 12 }, PI);
    let gap = sys.values[1] - sys.values[0];
    assert!((gap - v_a).abs() < 0.05 * v_a, "{gap}");
}

#[test]
fn free_bands_and_velocities() {
    let spec = LatticeSpec1D::homogeneous(0.0, 0.3);
    let bands = quasi_energy_bands(&spec, &zone_grid(32), None).unwrap();
    for (i, &k) in bands.k_grid.iter().enumerate() {
        // the ℓ = 0 state of the free problem
        let j = bands.samples[i]
            .values
            .iter()
            .position(|e| (e - (k / K_A).powi(2)).abs() < 1e-12)
            .expect("free branch present");
        assert!((group_velocity(&bands, j, i) - 2.0 * k / (K_A * K_A)).abs() < 1e-12);
    }
}

#[test]
fn hellmann_feynman_matches_finite_difference() {
    let h = 1e-5;
    for spec in [
        LatticeSpec1D::homogeneous(0.8, 0.2),
        LatticeSpec1D::homogeneous(0.2, 0.4),
        LatticeSpec1D::superlattice(0.3, 0.4, 1.5, 1, 0.2),
    ] {
        let basis = certify_truncation(&spec).unwrap().basis;
        for k in [-2.5, -0.7, 0.3, 1.9] {
            let sys = solve_at(&spec, &basis, k);
            let plus = solve_at(&spec, &basis, k + h).values;
            let minus = solve_at(&spec, &basis, k - h).values;
            for j in 0..8.min(sys.values.len()) {
                let fd = (plus[j] - minus[j]) / (2.0 * h);
                let hf = basis.group_velocity(&sys.vector(j), k);
                if hf.abs() < 1e-2 {
                    continue;
                }
                assert!(((fd - hf) / hf).abs() < 1e-6, "{spec:?} k={k} j={j}: {fd} vs {hf}");
            }
        }
    }
}

#[test]
fn static_lattice_velocity_vanishes_at_zone_edge() {
    let spec = LatticeSpec1D::homogeneous(0.5, 0.0);
    let basis = Basis::Homogeneous { l_max: 16 };
    let sys = solve_at(&spec, &basis, PI);
    assert!(basis.group_velocity(&sys.vector(0), PI).abs() < 1e-10);
}

#[test]
fn free_resonances() {
    let bands = quasi_energy_bands(&LatticeSpec1D::homogeneous(0.0, 0.2), &zone_grid(512), None).unwrap();
    for delta in [0.05, 0.3, 1.7] {
        let res = find_resonances(delta, &bands);
        assert_eq!(res.entries.len(), 2, "{delta}: {:?}", res.entries);
        let k_r = K_A * f64::sqrt(delta);
        let mut unfolded: Vec<f64> = res.entries.iter().map(|r| r.unfolded_k).collect();
        unfolded.sort_by(f64::total_cmp);
        assert!((unfolded[0] + k_r).abs() < 1e-8 && (unfolded[1] - k_r).abs() < 1e-8);
        for r in &res.entries {
            assert!((r.weight - 1.0).abs() < 1e-12);
            assert!(r.residual.abs() < RESONANCE_TOLERANCE);
        }
    }
    assert!(find_resonances(-0.01, &bands).entries.is_empty());
    let rates = emission_rates(&find_resonances(-0.3, &bands), 0.01).unwrap();
    assert_eq!((rates.gamma_r, rates.gamma_l), (0.0, 0.0));
}

#[test]
fn quarter_wavevector_rates_equal_gamma0() {
    let (_, rates) = rates_at(&LatticeSpec1D::homogeneous(0.0, 0.2), 1.0 / 16.0).unwrap();
    assert!((rates.gamma_r - 1.0).abs() < 1e-9 && (rates.gamma_l - 1.0).abs() < 1e-9);
    assert_eq!(rates.directionality, rates.gamma_r - rates.gamma_l);
}

#[test]
fn weak_modulation_recovers_free_rates() {
    for delta in [0.6, 1.3] {
        let (_, rates) = rates_at(&LatticeSpec1D::homogeneous(1e-3, 0.2), delta).unwrap();
        let free = 1.0 / (4.0 * PI * (2.0 * f64::sqrt(delta) / K_A));
        assert!((rates.gamma_r - free).abs() < 0.01 * free);
        assert!((rates.gamma_l - free).abs() < 0.01 * free);
    }
}

#[test]
fn static_lattice_rates_are_symmetric() {
    for (v_a, delta) in [(0.4, 0.1), (1.2, 0.5), (0.8, 1.3)] {
        let (_, rates) = rates_at(&LatticeSpec1D::homogeneous(v_a, 0.0), delta).unwrap();
        assert!((rates.gamma_r - rates.gamma_l).abs() < 1e-10 * rates.total().max(1.0), "{rates:?}");
    }
}

#[test]
fn strong_forward_emission_inside_the_gap() {
    let (_, rates) = rates_at(&LatticeSpec1D::homogeneous(0.8, 0.2), -0.2).unwrap();
    assert!(rates.gamma_r > 10.0 * rates.gamma_l, "{rates:?}");
    assert!(rates.gamma_r > 0.0);
}

#[test]
fn modulated_band_resonances_span_several_branches() {
    let spec = LatticeSpec1D::homogeneous(0.2, 0.4);
    let bands = quasi_energy_bands(&spec, &zone_grid(DEFAULT_K_POINTS), None).unwrap();
    let res = find_resonances(0.3, &bands);
    let mut branches: Vec<usize> = res.entries.iter().map(|r| r.branch).collect();
    branches.sort();
    branches.dedup();
    assert!(res.entries.len() >= 2 && branches.len() >= 2);
}

/// Sum over every raw eigenvalue of the truncated matrix crossing `δ`, with
/// the `ℓ = 0` component as weight. In this representation the Floquet copies
/// of a band sit at `k + m k_a`, so `k` runs over `zones` zones on each side.
fn raw_bookkeeping_rates(v_a: f64, omega: f64, delta: f64, l_max: usize, zones: usize) -> (f64, f64) {
    let spec = LatticeSpec1D::homogeneous(v_a, omega);
    let basis = Basis::Homogeneous { l_max };
    let intervals = 512 * (2 * zones + 1);
    let span = K_A * (2 * zones + 1) as f64;
    let ks: Vec<f64> = (0..=intervals).map(|i| -span / 2.0 + span * i as f64 / intervals as f64).collect();
    let values: Vec<Vec<f64>> = ks.iter().map(|&k| solve_at(&spec, &basis, k).values).collect();
    let (mut right, mut left) = (0.0, 0.0);
    for j in 0..basis.dim() {
        for i in 0..intervals {
            let (fa, fb) = (values[i][j] - delta, values[i + 1][j] - delta);
            if fa * fb > 0.0 {
                continue;
            }
            let (mut a, mut b, mut fa) = (ks[i], ks[i + 1], fa);
            for _ in 0..80 {
                let c = 0.5 * (a + b);
                let fc = solve_at(&spec, &basis, c).values[j] - delta;
                if (fc > 0.0) == (fa > 0.0) {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                }
            }
            let k = 0.5 * (a + b);
            let u = solve_at(&spec, &basis, k).vector(j);
            let weight = u[l_max] * u[l_max];
            let v: f64 = u
                .iter()
                .enumerate()
                .map(|(n, x)| x * x * 2.0 * ((n as f64 - l_max as f64) + k / K_A) / K_A)
                .sum();
            let rate = weight / (4.0 * PI * v.abs());
            if v > 0.0 {
                right += rate;
            } else {
                left += rate;
            }
        }
    }
    (right, left)
}

#[test]
fn channel_and_raw_bookkeeping_agree() {
    for (v_a, omega, delta) in [(0.2, 0.4, 0.3), (0.8, 0.2, -0.2), (0.5, 0.35, 0.11)] {
        let spec = LatticeSpec1D::homogeneous(v_a, omega);
        let (_, rates) = rates_at(&spec, delta).unwrap();
        let zones = 6;
        let l_max = certify_truncation(&spec).unwrap().basis.l_max() + 2 * zones;
        let (right, left) = raw_bookkeeping_rates(v_a, omega, delta, l_max, zones);
        assert!((rates.gamma_r - right).abs() < 1e-8 * right.max(1e-3), "{} vs {right}", rates.gamma_r);
        assert!((rates.gamma_l - left).abs() < 1e-8 * left.max(1e-3), "{} vs {left}", rates.gamma_l);
    }
}

#[test]
fn superlattice_truncation_is_certified() {
    let spec = LatticeSpec1D::superlattice(0.3, 0.4, 2.5, 3, 1.0 / 12.0);
    let cert = certify_truncation(&spec).unwrap();
    assert!(cert.discrepancy < 1e-8);
    match cert.basis {
        Basis::Superlattice { nu_max, period_ratio, .. } => {
            assert_eq!(period_ratio, 3);
            assert!(nu_max >= 3);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn directionality_map_trivial_rows_and_columns() {
    let detunings = [0.05, 0.15, 0.3, 0.6];
    let by_potential = directionality_map(MapAxis::Potential, 0.2, &detunings, &[0.0], 256).unwrap();
    assert!(by_potential.cells.iter().all(|c| c.directionality.abs() < 1e-10));
    let by_frequency = directionality_map(MapAxis::Frequency, 0.3, &detunings, &[0.0], 256).unwrap();
    assert!(by_frequency.cells.iter().all(|c| c.directionality.abs() < 1e-10));
    let below = directionality_map(MapAxis::Potential, 0.2, &[-1.0], &[0.4], 256).unwrap();
    assert_eq!(below.cells[0].flag, CellFlag::OutsideBand);
    assert_eq!(below.cells[0].directionality, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floquet_matrix_is_symmetric(k in -PI..PI, v_a in 0.0f64..3.0, omega in -1.0f64..1.0, l_max in 1usize..12) {
        let m = build_floquet_matrix(k, v_a, omega, l_max);
        prop_assert_eq!(m.clone(), m.transpose());
    }

    #[test]
    fn superlattice_matrix_is_symmetric(k in -PI..PI, v_a in 0.0f64..1.0, v_st in 0.0f64..3.0, period in 1usize..4) {
        let spec = LatticeSpec1D::superlattice(v_a, 0.3, v_st, period, 0.1);
        let m = build_superlattice_matrix(k, &spec, 3, 2 * period + 2);
        prop_assert_eq!(m.clone(), m.transpose());
    }

    #[test]
    fn eigenvectors_are_normalized(k in -PI..PI, v_a in 0.0f64..2.0, omega in -0.6f64..0.6) {
        let spec = LatticeSpec1D::homogeneous(v_a, omega);
        let basis = Basis::Homogeneous { l_max: 10 };
        let sys = solve_at(&spec, &basis, k);
        for j in 0..basis.dim() {
            let norm: f64 = sys.vector(j).iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rates_are_nonnegative(v_a in 0.0f64..1.0, omega in 0.05f64..0.5, delta in -0.3f64..1.0) {
        let spec = LatticeSpec1D::homogeneous(v_a, omega);
        let bands = quasi_energy_bands(&spec, &zone_grid(256), None).unwrap();
        let rates = rates_unchecked(&find_resonances(delta, &bands), 0.01, VELOCITY_FLOOR);
        prop_assert!(rates.gamma_r >= 0.0 && rates.gamma_l >= 0.0);
        prop_assert_eq!(rates.directionality, rates.gamma_r - rates.gamma_l);
    }
}
