use ndarray::Array2;
use proptest::prelude::*;
use zeropi_core::quad::integrate;
use zeropi_core::spectral::{eigh_pairs, HermitianOperator};
use zeropi_core::special::*;
use zeropi_core::C64;

/// `exp(α a† − α* a)` at Fock truncation `n` via the Hermitian generator
/// `i(α a† − α* a)`.
fn brute_force_displacement(n: usize, alpha: C64) -> Array2<C64> {
    let mut g = Array2::<C64>::zeros((n, n));
    for k in 1..n {
        let s = (k as f64).sqrt();
        g[[k, k - 1]] += alpha * s;
        g[[k - 1, k]] -= alpha.conj() * s;
    }
    let h = HermitianOperator::symmetrized(g.mapv(|z| z * C64::i())).unwrap();
    let (spec, v) = eigh_pairs(&h, n).unwrap();
    let phases = ndarray::Array1::from_iter(spec.eigenvalues.iter().map(|l| C64::from_polar(1.0, -l)));
    let vd = v.t().mapv(|z| z.conj());
    (&v * &phases.view().insert_axis(ndarray::Axis(0))).dot(&vd)
}

#[test]
fn displacement_low_elements() {
    for a in [C64::new(0.3, 0.0), C64::new(-0.7, 1.1), C64::new(0.0, 1.9)] {
        let g = (-a.norm_sqr() / 2.0).exp();
        assert!((displacement_element(0, 0, a).unwrap() - g).norm() < 1e-15);
        assert!((displacement_element(1, 0, a).unwrap() - a * g).norm() < 1e-15);
        assert!((displacement_element(0, 1, a).unwrap() + a.conj() * g).norm() < 1e-15);
    }
    assert_eq!(displacement_element(3, 3, C64::new(0.0, 0.0)).unwrap(), C64::new(1.0, 0.0));
}

#[test]
fn displacement_matches_brute_force_exponential() {
    let alphas = [C64::new(0.0, 1.3), C64::new(1.2, -1.5), C64::new(-2.0, 0.0), C64::new(0.4, 0.2)];
    for a in alphas {
        let d = brute_force_displacement(120, a);
        let mut worst = 0.0f64;
        for m in 0..=40 {
            for n in 0..=40 {
                worst = worst.max((displacement_element(m, n, a).unwrap() - d[[m, n]]).norm());
            }
        }
        assert!(worst < 1e-8, "alpha = {a}: {worst:e}");
    }
}

#[test]
fn displacement_index_limit() {
    assert!(displacement_element(MAX_FOCK_INDEX + 1, 0, C64::new(0.1, 0.0)).is_err());
    assert!(displacement_element(MAX_FOCK_INDEX, MAX_FOCK_INDEX, C64::new(2.0, 0.0)).unwrap().is_finite());
}

#[test]
fn displacement_matrix_is_nearly_unitary_in_the_interior() {
    let d = displacement_matrix(80, C64::new(0.0, 1.0)).unwrap();
    for col in 0..20 {
        let norm: f64 = d.column(col).iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn laguerre_low_orders() {
    let x = 0.37;
    assert_eq!(laguerre(0, 2.5, x), 1.0);
    assert!((laguerre(1, 2.5, x) - (3.5 - x)).abs() < 1e-15);
    let l2 = 0.5 * (x * x - 2.0 * (2.5 + 2.0) * x + (2.5 + 1.0) * (2.5 + 2.0));
    assert!((laguerre(2, 2.5, x) - l2).abs() < 1e-14);
}

#[test]
fn laguerre_large_degree_scaling() {
    let (m, s) = laguerre_scaled(900, 0.0, 0.5);
    assert!(m.is_finite() && s.is_finite());
    let (m, s) = laguerre_scaled(1000, 30.0, 5000.0);
    assert!(m.is_finite() && s > 0.0);
}

/// `𝒰(−M, 1−M+N, z) = z^M Σ_k (−M)_k (−N)_k / k! · (−1/z)^k`.
fn kummer_u_oracle(m: usize, n: usize, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..m.min(n) {
        let kf = k as f64;
        term *= (kf - m as f64) * (kf - n as f64) / (kf + 1.0) * (-1.0 / z);
        sum += term;
    }
    z.powi(m as i32) * sum
}

#[test]
fn laguerre_u_examples() {
    for n in 0..6 {
        for x in [0.1, 1.0, 7.5] {
            assert_eq!(laguerre_u(0, n, x), 1.0);
        }
    }
    assert!((laguerre_u(1, 1, 2.75) - 1.75).abs() < 1e-15);
}

#[test]
fn laguerre_u_matches_terminating_series() {
    for m in 0..=20 {
        for n in 0..=20 {
            for x in [0.3, 1.0, 2.5, 6.0, 10.0] {
                let a = laguerre_u(m, n, x);
                let b = kummer_u_oracle(m, n, x);
                let scale = b.abs().max(a.abs()).max(1e-300);
                // cancellation in the alternating oracle limits its accuracy
                // relative to the largest term
                let big: f64 = x.powi(m as i32) * (0..=m.min(n)).map(|k| binom(m, k) * binom(n, k) * fact(k) / x.powi(k as i32)).sum::<f64>();
                assert!((a - b).abs() < 1e-10 * scale.max(1e-6 * big), "m={m} n={n} x={x}: {a} vs {b}");
            }
        }
    }
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    fact(n) / (fact(k) * fact(n - k))
}

fn chi_quad(x: f64) -> f64 {
    EULER_GAMMA + x.ln() + integrate(|t| if t == 0.0 { 0.0 } else { 2.0 * (0.5 * t).sinh().powi(2) / t }, 0.0, x, 1e-14)
}

fn shi_quad(x: f64) -> f64 {
    integrate(|t| if t == 0.0 { 1.0 } else { t.sinh() / t }, 0.0, x, 1e-14)
}

#[test]
fn chi_shi_against_quadrature() {
    for x in [0.05, 0.5, 1.0, 4.0, 9.5, 10.5, 20.0, 35.0] {
        let (c, q) = (chi(x).unwrap(), chi_quad(x));
        assert!((c - q).abs() < 1e-10 * q.abs().max(1.0), "Chi({x}) {c} vs {q}");
        let (s, q) = (shi(x).unwrap(), shi_quad(x));
        assert!((s - q).abs() < 1e-10 * q.abs(), "Shi({x}) {s} vs {q}");
    }
}

#[test]
fn chi_shi_reference_values() {
    // 20-digit references
    let table = [
        (0.01, -4.0279295209823915885, 0.010000055555722222714),
        (1.0, 0.83786694098020824089, 1.0572508753757285146),
        (4.0, 9.8135475588231855581, 9.8173269112330344646),
        (10.0, 1246.1144860424544147, 1246.1144901994233444),
        (30.0, 184486604703.63709853, 184486604703.63709853),
        (45.0, 397195801785222688.58, 397195801785222688.58),
    ];
    for (x, c, s) in table {
        assert!((chi(x).unwrap() - c).abs() < 1e-13 * c.abs().max(1.0), "Chi({x})");
        assert!((shi(x).unwrap() - s).abs() < 1e-13 * s.abs(), "Shi({x})");
    }
}

#[test]
fn chi_shi_small_argument() {
    assert_eq!(shi(0.0).unwrap(), 0.0);
    let x = 1e-6;
    assert!((chi(x).unwrap() - x.ln() - EULER_GAMMA).abs() < 1e-12);
    assert!(chi(0.0).is_err() && shi(-1.0).is_err());
    assert!(chi_reg_scaled(1e-8).unwrap() > 0.0);
}

#[test]
fn scaled_forms_continuous_at_switch() {
    let lo = 40.0 * (1.0 - 1e-12);
    let hi = 40.0 * (1.0 + 1e-12);
    assert!((chi_reg_scaled(lo).unwrap() - chi_reg_scaled(hi).unwrap()).abs() < 1e-13);
    assert!((shi_scaled(lo).unwrap() - shi_scaled(hi).unwrap()).abs() < 1e-13);
    let x: f64 = 800.0;
    let asym = 0.5 / x * (1.0 + 1.0 / x + 2.0 / (x * x) + 6.0 / x.powi(3) + 24.0 / x.powi(4));
    assert!((shi_scaled(x).unwrap() - asym).abs() < 1e-12 / x);
}

#[test]
fn pfq_trivial_cases() {
    assert_eq!(pfq(&[1.0, 2.0], &[3.0, 4.0, 5.0], 0.0, 1e-15).unwrap(), 1.0);
    let e = pfq(&[], &[], 1.5, 1e-16).unwrap();
    assert!((e - 1.5f64.exp()).abs() < 1e-14);
    assert!(pfq(&[1.0], &[-2.0], 1.0, 1e-12).is_err());
    assert!(pfq(&[1.0], &[2.0], -1.0, 1e-12).is_err());
}

#[test]
fn pfq_first_terms_of_2f3() {
    let z = 1e-3;
    let t1 = 0.5 * 0.5 / (1.5 * 1.5 * 1.5) * z;
    let t2 = t1 * (1.5 * 1.5) / (2.5 * 2.5 * 2.5) * z / 2.0;
    let t3 = t2 * (2.5 * 2.5) / (3.5 * 3.5 * 3.5) * z / 3.0;
    let v = pfq(&[0.5, 0.5], &[1.5, 1.5, 1.5], z, 1e-17).unwrap();
    assert!((v - (1.0 + t1 + t2 + t3)).abs() < 1e-16);
    assert!((t1 - 2.0 * z / 27.0).abs() < 1e-18);
}

#[test]
fn pfq_reference_values() {
    // 20-digit references
    let table = [
        (0.5, 1.0429263926304689207, 1.0384033153090272615),
        (4.0, 1.4266187778768259797, 1.4006789344063967137),
        (25.0, 13.30042326753320192, 17.122438372740384835),
        (100.0, 14389.914049465012018, 35975.145395938473866),
        (2500.0, 1.1087439475163321695e36, 1.3859299343954152118e37),
    ];
    for (z, f34, f23) in table {
        let a = pfq(&[1.0, 1.0, 1.0], &[1.5, 2.0, 2.0, 2.0], z, 1e-16).unwrap();
        let b = pfq(&[0.5, 0.5], &[1.5, 1.5, 1.5], z, 1e-16).unwrap();
        assert!(((a - f34) / f34).abs() < 1e-12, "3F4({z}) = {a}");
        assert!(((b - f23) / f23).abs() < 1e-12, "2F3({z}) = {b}");
    }
}

/// `(x²/8)·₃F₄(x²/4) = Σ_{k≥1} x^{2k}/((2k)!(2k)²)` and
/// `x·₂F₃(x²/4) = Σ_{k≥0} x^{2k+1}/((2k+1)!(2k+1)²)`.
fn series_oracles(x: f64) -> (f64, f64) {
    let mut even = KahanSum::new();
    let mut odd = KahanSum::new();
    let mut t = 1.0;
    for j in 1..2000 {
        t *= x / j as f64;
        let d = (j * j) as f64;
        if j % 2 == 0 {
            even.add(t / d);
        } else {
            odd.add(t / d);
        }
        if t < 1e-30 * (even.value() + odd.value()) {
            break;
        }
    }
    (even.value(), odd.value())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfq_matches_power_series(x in 0.01f64..60.0) {
        let (even, odd) = series_oracles(x);
        let z = x * x / 4.0;
        let a = x * x / 8.0 * pfq(&[1.0, 1.0, 1.0], &[1.5, 2.0, 2.0, 2.0], z, 1e-16).unwrap();
        let b = x * pfq(&[0.5, 0.5], &[1.5, 1.5, 1.5], z, 1e-16).unwrap();
        prop_assert!(((a - even) / even).abs() < 1e-10);
        prop_assert!(((b - odd) / odd).abs() < 1e-10);
    }

    #[test]
    fn displacement_symmetry(m in 0usize..60, n in 0usize..60, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        // ⟨M|D(α)|N⟩ = (−1)^{M−N} ⟨N|D(α)|M⟩*
        let a = C64::new(re, im);
        let x = displacement_element(m, n, a).unwrap();
        let y = displacement_element(n, m, a).unwrap().conj();
        let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((x - y * sign).norm() < 1e-12);
    }

    #[test]
    fn kahan_sum_beats_naive(n in 1usize..2000) {
        let mut k = KahanSum::new();
        k.add(1e16);
        for _ in 0..n {
            k.add(1.0);
        }
        k.add(-1e16);
        prop_assert_eq!(k.value(), n as f64);
    }

    #[test]
    fn ln_factorial_table_consistent(n in 0usize..300) {
        let t = ln_factorials(n);
        prop_assert!((t[n] - ln_factorial(n)).abs() < 1e-9 * t[n].max(1.0));
    }
}
