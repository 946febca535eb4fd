use proptest::prelude::*;
use zeropi_core::ring::*;
use zeropi_core::spectral::{eigh, spectral_norm};
use zeropi_core::symmetry::Sector;

#[test]
fn charge_operator_diagonals() {
    let d = charge_op(&ChargeWindow::about_zero(1));
    assert_eq!(d.as_real().unwrap().diag().to_vec(), vec![-1.0, 0.0, 1.0]);
    let d = charge_op(&ChargeWindow::about_half(1));
    assert_eq!(d.as_real().unwrap().diag().to_vec(), vec![0.0, 1.0]);
}

#[test]
fn windows_validate_closure() {
    assert!(ChargeWindow::new(-2, 3, Closure::AboutHalf).is_ok());
    assert!(ChargeWindow::new(-2, 2, Closure::AboutHalf).is_err());
    assert!(ChargeWindow::new(-2, 3, Closure::AboutZero).is_err());
    let w = ChargeWindow::about_half(3);
    assert_eq!((w.n_lo(), w.n_hi(), w.len()), (-2, 3, 6));
    assert_eq!(w.index_of(0), Some(2));
    assert_eq!(w.index_of(4), None);
}

#[test]
fn cosine_second_harmonic_entries() {
    let w = ChargeWindow::about_zero(2);
    let c = cosine_op(2, &w);
    let m = c.as_real().unwrap();
    for i in 0..3 {
        assert_eq!(m[[i + 2, i]], 0.5);
        assert_eq!(m[[i, i + 2]], 0.5);
    }
    assert_eq!(m.sum(), 3.0);
}

#[test]
fn cosine_norm_approaches_one() {
    let mut prev = 0.0;
    for h in [4u32, 16, 64] {
        let c = cosine_op(2, &ChargeWindow::about_zero(h)).to_complex();
        let n = spectral_norm(&c);
        assert!(n < 1.0 && n > prev);
        prev = n;
    }
    assert!(1.0 - prev < 1e-2);
}

#[test]
fn harmonic_outside_window_warns() {
    let (op, warn) = cosine_op_checked(5, &ChargeWindow::about_zero(2));
    assert_eq!(warn, Some(TruncationWarning { k: 5, window_len: 5 }));
    assert!(op.as_real().unwrap().iter().all(|v| *v == 0.0));
    assert!(cosine_op_checked(2, &ChargeWindow::about_zero(2)).1.is_none());
}

#[test]
fn free_spectra() {
    let p = RingParams::free(1.0, 0.5).unwrap();
    let w = ChargeWindow::new(-2, 3, Closure::AboutHalf).unwrap();
    let ev = eigh(&build_ring_hamiltonian(&p, &w), 6).unwrap().eigenvalues;
    assert_eq!(ev, vec![1.0, 1.0, 9.0, 9.0, 25.0, 25.0]);

    let p = RingParams::free(1.0, 0.0).unwrap();
    let ev = eigh(&build_ring_hamiltonian(&p, &ChargeWindow::about_zero(3)), 5).unwrap().eigenvalues;
    assert_eq!(ev, vec![0.0, 4.0, 4.0, 16.0, 16.0]);
}

#[test]
fn doublet_at_half_with_second_harmonic() {
    let p = RingParams::cos2(1.0, 0.5, 8.0).unwrap();
    let w = ChargeWindow::about_half(suggested_half_width(&p));
    let ev = eigh(&build_ring_hamiltonian(&p, &w), 2).unwrap().eigenvalues;
    assert!((ev[1] - ev[0]).abs() < 1e-10);
}

#[test]
fn charge_commutes_with_h_only_when_free() {
    let w = ChargeWindow::about_zero(4);
    let n = charge_op(&w).to_complex();
    for (p, zero) in [(RingParams::free(1.0, 0.2).unwrap(), true), (RingParams::cos2(1.0, 0.2, 1.0).unwrap(), false)] {
        let h = build_ring_hamiltonian(&p, &w).to_complex();
        let c = spectral_norm(&(n.dot(&h) - h.dot(&n)));
        assert_eq!(c == 0.0, zero);
    }
}

#[test]
fn free_gap_values() {
    assert_eq!(free_gap(&RingParams::free(1.0, 0.5).unwrap()).unwrap(), 0.0);
    assert!((free_gap(&RingParams::free(1.0, 0.3).unwrap()).unwrap() - 1.6).abs() < 1e-15);
    assert_eq!(free_gap(&RingParams::free(2.0, 0.0).unwrap()).unwrap(), 8.0);
    assert!(free_gap(&RingParams::cos2(1.0, 0.3, 1.0).unwrap()).is_err());
}

#[test]
fn params_validation() {
    assert!(RingParams::new(1.0, 1.0, vec![], 0.0).is_err());
    assert!(RingParams::new(0.0, 0.5, vec![], 0.0).is_err());
    assert!(RingParams::new(1.0, 0.5, vec![(0, 1.0)], 0.0).is_err());
    assert!(RingParams::new(1.0, 0.5, vec![(2, 1.0), (2, 3.0)], 0.0).is_err());
}

#[test]
fn free_sector_charges() {
    let p = RingParams::free(1.0, 0.5).unwrap();
    let w = ChargeWindow::about_half(5);
    assert!(ground_charge_expectation(&p, &w, Some(Sector::Even)).unwrap().abs() < 1e-14);
    assert!((ground_charge_expectation(&p, &w, Some(Sector::Odd)).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn deep_potential_sector_charge_near_poisson_estimate() {
    let (e_cs, lam) = (1.0, 50.0);
    let p = RingParams::cos2(e_cs, 0.5, lam).unwrap();
    let w = ChargeWindow::about_half(suggested_half_width(&p));
    let n = ground_charge_expectation(&p, &w, Some(Sector::Even)).unwrap();
    let s = (lam / (2.0 * e_cs)).sqrt();
    let pi = std::f64::consts::PI;
    let estimate = 0.5 - (pi / 4.0) * s * (-(pi * pi / 4.0) * s).exp();
    assert!(((n - estimate) / estimate).abs() < 0.2, "{n} vs {estimate}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn offset_shift_by_one_is_isospectral(e_cs in 0.2f64..3.0, n_g in 0.0f64..0.999, v1 in -2.0f64..2.0, v2 in -2.0f64..2.0) {
        // H(n_g) on [−h,h] and H(n_g) on the window shifted by one charge
        // agree once truncation effects are negligible.
        let p = RingParams::new(e_cs, n_g, vec![(1, v1), (2, v2)], 0.0).unwrap();
        let a = eigh(&build_ring_hamiltonian(&p, &ChargeWindow::about_zero(30)), 4).unwrap().eigenvalues;
        let b = eigh(&build_ring_hamiltonian(&p, &ChargeWindow::about_half(30)), 4).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_offset_shifts_spectrum(c in -5.0f64..5.0, n_g in 0.0f64..0.999) {
        let w = ChargeWindow::about_zero(8);
        let p = RingParams::cos2(1.0, n_g, 1.0).unwrap();
        let q = RingParams { const_offset: c, ..p.clone() };
        let a = eigh(&build_ring_hamiltonian(&p, &w), 3).unwrap().eigenvalues;
        let b = eigh(&build_ring_hamiltonian(&q, &w), 3).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x + c - y).abs() < 1e-12);
        }
    }
}
