//! Schrieffer–Wolff effective θ-Hamiltonians for the lowest φ-oscillator
//! level, to third order in the coupling, with closed forms and asymptotics.
//!
//! The unperturbed part is the φ ladder `2√(E_CJ E_L) N̂`; the charging term
//! and the Josephson coupling are both treated as the perturbation, so the
//! block matrix elements are `c_{MN} = 4E_Cs(n̂−n_g)² δ_{MN} − 2E_J f_{MN} cos θ̂`
//! with `f_{MN} = ⟨M|cos(φ̂ − φ_ext/2)|N⟩`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::Array2;

use crate::circuit::{cos_phi_matrix, oscillator_length, FockTruncation, ZeroPiParams};
use crate::error::{Error, Result};
use crate::ring::{ring_matrix, ChargeWindow, RingParams};
use crate::special::{chi_reg_scaled, displacement_element, laguerre_u, ln_factorial, shi_scaled, KahanSum};
use crate::spectral::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SwConfig {
    pub n_cut: usize,
    pub series_tol: f64,
}

impl Default for SwConfig {
    fn default() -> Self {
        Self { n_cut: 40, series_tol: 1e-12 }
    }
}

impl SwConfig {
    pub fn new(n_cut: usize, series_tol: f64) -> Result<Self> {
        if n_cut < 4 || !(series_tol > 0.0) {
            return Err(Error::Invalid("SW config needs n_cut >= 4 and series_tol > 0".into()));
        }
        Ok(Self { n_cut, series_tol })
    }

    /// Cutoff large enough for the Poisson-like weights `x^N/N!` with
    /// `x = √(E_CJ/E_L)`.
    pub fn for_params(p: &ZeroPiParams) -> Self {
        let x = (p.e_cj / p.e_l).sqrt();
        let n_cut = (x + 12.0 * x.sqrt() + 40.0).ceil() as usize;
        Self { n_cut, series_tol: 1e-12 }
    }
}

/// Structured effective potential
/// `const + prefactor·4E_Cs(n̂−n_g)² + c₁ cos θ + c₂ cos²θ + s₂ sin²θ + c₃ cos³θ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EffectivePotential {
    pub const_term: f64,
    pub charging_prefactor: f64,
    /// Coefficient of `cos kθ` after expansion; `k = 0` holds the constant
    /// generated by the expansion identities.
    pub cos_coeffs: BTreeMap<u32, f64>,
    pub c_cos1: f64,
    pub c_cos2sq: f64,
    pub c_sin2sq: f64,
    pub c_cos3cu: f64,
    /// Magnitude estimate for the `cos³θ` contribution of the asymptotic
    /// third-order result; not part of the spectral pipeline.
    pub cos3_bound: Option<f64>,
    /// Closed-form evaluation of `c_cos2sq`, when computed.
    pub c_cos2sq_closed_form: Option<f64>,
}

impl EffectivePotential {
    /// Applies `cos² = (1+cos2θ)/2`, `sin² = (1−cos2θ)/2`,
    /// `cos³ = (3cosθ + cos3θ)/4` and stores the result in `cos_coeffs`.
    pub fn expand(&mut self) {
        let mut m = BTreeMap::new();
        m.insert(0, 0.5 * (self.c_cos2sq + self.c_sin2sq));
        m.insert(1, self.c_cos1 + 0.75 * self.c_cos3cu);
        m.insert(2, 0.5 * (self.c_cos2sq - self.c_sin2sq));
        m.insert(3, 0.25 * self.c_cos3cu);
        m.retain(|_, v| *v != 0.0);
        self.cos_coeffs = m;
    }

    pub fn expanded(mut self) -> Self {
        self.expand();
        self
    }

    /// Harmonics present with a nonzero coefficient.
    pub fn harmonics(&self) -> Vec<u32> {
        self.cos_coeffs.iter().filter(|(k, v)| **k > 0 && **v != 0.0).map(|(k, _)| *k).collect()
    }

    /// Adds the structured terms of `other` and its constant.
    pub fn plus(&self, other: &Self) -> Self {
        Self {
            const_term: self.const_term + other.const_term,
            charging_prefactor: self.charging_prefactor + other.charging_prefactor,
            cos_coeffs: BTreeMap::new(),
            c_cos1: self.c_cos1 + other.c_cos1,
            c_cos2sq: self.c_cos2sq + other.c_cos2sq,
            c_sin2sq: self.c_sin2sq + other.c_sin2sq,
            c_cos3cu: self.c_cos3cu + other.c_cos3cu,
            cos3_bound: other.cos3_bound.or(self.cos3_bound),
            c_cos2sq_closed_form: other.c_cos2sq_closed_form.or(self.c_cos2sq_closed_form),
        }
        .expanded()
    }
}

/// `f_{MN}` from the symmetrized displacement construction
/// `½(e^{−iφ_ext/2}⟨M|e^{iφ̂}|N⟩ + e^{iφ_ext/2}⟨N|e^{iφ̂}|M⟩*)`.
pub fn f_element(m: usize, n: usize, p: &ZeroPiParams) -> Result<C64> {
    let alpha = C64::new(0.0, oscillator_length(p) / std::f64::consts::SQRT_2);
    let e_mn = displacement_element(m, n, alpha)?;
    let e_nm = displacement_element(n, m, alpha)?;
    let ph = C64::from_polar(1.0, -p.varphi_ext / 2.0);
    Ok((ph * e_mn + ph.conj() * e_nm.conj()) * 0.5)
}

/// `f_{MN}` from the confluent-hypergeometric expression
/// `e^{−x/2} i^{M+N} x^{(N−M)/2} 𝒰(−M, 1−M+N, x)/√(M!N!)` times
/// `cos(φ_ext/2)` for even `M+N` and `−i sin(φ_ext/2)` for odd.
pub fn f_element_printed(m: usize, n: usize, p: &ZeroPiParams) -> C64 {
    let x = (p.e_cj / p.e_l).sqrt();
    let u = laguerre_u(m, n, x);
    let mag = (-0.5 * x + 0.5 * (n as f64 - m as f64) * x.ln() - 0.5 * (ln_factorial(m) + ln_factorial(n))).exp();
    let ipow = match (m + n) % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let trig = if (m + n) % 2 == 0 {
        C64::new((p.varphi_ext / 2.0).cos(), 0.0)
    } else {
        C64::new(0.0, -(p.varphi_ext / 2.0).sin())
    };
    ipow * trig * (mag * u)
}

/// Block element `c_{MN}` as `(δ_{MN}, −2E_J f_{MN})`: the coefficient of
/// `4E_Cs(n̂−n_g)²` and of `cos θ̂`.
pub fn c_element(m: usize, n: usize, p: &ZeroPiParams) -> Result<(f64, C64)> {
    let f = f_element(m, n, p)?;
    Ok((if m == n { 1.0 } else { 0.0 }, f * (-2.0 * p.e_j)))
}

/// `g_{MN} = −2E_J f_{MN}` for `M, N < n`.
fn coupling_matrix(p: &ZeroPiParams, n: usize) -> Array2<f64> {
    let t = FockTruncation::new(n.max(2)).expect("n >= 2");
    cos_phi_matrix(&t, oscillator_length(p), p.varphi_ext / 2.0) * (-2.0 * p.e_j)
}

/// First order: `√(E_CJ E_L) + 4E_Cs(n̂−n_g)² − 2E_J e^{−x/2} cos(φ_ext/2) cos θ̂`,
/// `x = √(E_CJ/E_L)`.
pub fn sw_order1(p: &ZeroPiParams) -> EffectivePotential {
    let x = (p.e_cj / p.e_l).sqrt();
    let half = p.varphi_ext / 2.0;
    let c = if (half - PI / 2.0).abs() < 1e-15 { 0.0 } else { half.cos() };
    EffectivePotential {
        const_term: (p.e_cj * p.e_l).sqrt(),
        charging_prefactor: 1.0,
        c_cos1: -2.0 * p.e_j * (-0.5 * x).exp() * c,
        ..Default::default()
    }
    .expanded()
}

fn order2_sum(g: &Array2<f64>, omega: f64, n: usize) -> f64 {
    let mut s = KahanSum::new();
    for k in 1..n {
        s.add(g[[0, k]] * g[[0, k]] / (omega * k as f64));
    }
    s.value()
}

/// Closed form of the second-order `cos²θ` coefficient:
/// `−2E_J² e^{−x}/√(E_CJ E_L)·[(Chi(x)−γ−ln x) cos²(φ_ext/2) + Shi(x) sin²(φ_ext/2)]`.
pub fn order2_closed_form(p: &ZeroPiParams) -> Result<f64> {
    let x = (p.e_cj / p.e_l).sqrt();
    let h = p.varphi_ext / 2.0;
    let bracket = chi_reg_scaled(x)? * h.cos().powi(2) + shi_scaled(x)? * h.sin().powi(2);
    Ok(-2.0 * p.e_j * p.e_j / (p.e_cj * p.e_l).sqrt() * bracket)
}

/// Second-order term `−Σ_{N≥1} c_{0N}c_{N0}/(2√(E_CJ E_L) N)`, a pure
/// `cos²θ` coefficient. The truncated sum is checked against the sum at
/// twice the cutoff and against the closed form.
pub fn sw_order2(p: &ZeroPiParams, cfg: &SwConfig) -> Result<EffectivePotential> {
    let omega = p.omega();
    let g = coupling_matrix(p, 2 * cfg.n_cut);
    let s1 = order2_sum(&g, omega, cfg.n_cut);
    let s2 = order2_sum(&g, omega, 2 * cfg.n_cut);
    let scale = s2.abs().max(f64::MIN_POSITIVE);
    if (s2 - s1).abs() > cfg.series_tol * scale {
        return Err(Error::Series(format!(
            "second-order sum not converged at n_cut = {}: tail estimate {:e}",
            cfg.n_cut,
            (s2 - s1).abs()
        )));
    }
    let closed = order2_closed_form(p)?;
    let tol = cfg.series_tol.max(1e-10);
    if (closed + s2).abs() > tol * closed.abs().max(f64::MIN_POSITIVE) && p.e_j != 0.0 {
        return Err(Error::Series(format!("second-order sum {:e} disagrees with closed form {:e}", -s2, closed)));
    }
    Ok(EffectivePotential { c_cos2sq: -s2, c_cos2sq_closed_form: Some(closed), ..Default::default() }.expanded())
}

struct Order3Sums {
    sin2: f64,
    cos3: f64,
}

fn order3_sums(g: &Array2<f64>, omega: f64, e_cs: f64, n: usize) -> Order3Sums {
    let mut s2 = KahanSum::new();
    for k in 1..n {
        s2.add(g[[0, k]] * g[[0, k]] / (omega * omega * (k * k) as f64));
    }
    let mut triple = KahanSum::new();
    for a in 1..n {
        if g[[0, a]] == 0.0 {
            continue;
        }
        for b in 1..n {
            let v = g[[0, a]] * g[[a, b]] * g[[b, 0]];
            if v != 0.0 {
                triple.add(v / (omega * omega * (a * b) as f64));
            }
        }
    }
    Order3Sums { sin2: 4.0 * e_cs * s2.value(), cos3: triple.value() - g[[0, 0]] * s2.value() }
}

/// Magnitude estimate of the `cos³θ` terms of the asymptotic third-order
/// result.
pub fn cos3_bound(p: &ZeroPiParams) -> f64 {
    let r = p.e_cj / p.e_l;
    let supp = (-0.5 * r.sqrt()).exp() * (p.varphi_ext / 2.0).cos().abs();
    let ej3 = p.e_j.powi(3);
    ej3 / (p.e_cj * (p.e_l * p.e_cj).sqrt()) * r.ln().abs() * supp + ej3 / (p.e_cj * p.e_cj) * supp
}

/// Third-order term
/// `Σ_{N,M≥1} c_{0N}c_{NM}c_{M0}/(ω²NM) − Σ_N (c_{00}c_{0N}c_{N0} + c_{0N}c_{N0}c_{00})/(2ω²N²)`.
/// Its charging part reduces to `4E_Cs S sin²θ` with `S = Σ g_{0N}²/(ω²N²)`
/// through `[cos θ, [cos θ, (n̂−n_g)²]] = −2 sin²θ`; the remaining terms are
/// `cos³θ`.
pub fn sw_order3(p: &ZeroPiParams, cfg: &SwConfig) -> Result<EffectivePotential> {
    let omega = p.omega();
    let g = coupling_matrix(p, 2 * cfg.n_cut);
    let a = order3_sums(&g, omega, p.e_cs, cfg.n_cut);
    let b = order3_sums(&g, omega, p.e_cs, 2 * cfg.n_cut);
    for (name, x, y) in [("sin^2", a.sin2, b.sin2), ("cos^3", a.cos3, b.cos3)] {
        let scale = y.abs().max(1e-300);
        if (x - y).abs() > cfg.series_tol * scale && (x - y).abs() > 1e-15 * b.sin2.abs().max(1e-300) {
            return Err(Error::Series(format!(
                "third-order {name} sum not converged at n_cut = {}: tail estimate {:e}",
                cfg.n_cut,
                (x - y).abs()
            )));
        }
    }
    Ok(EffectivePotential { c_sin2sq: b.sin2, c_cos3cu: b.cos3, cos3_bound: Some(cos3_bound(p)), ..Default::default() }
        .expanded())
}

/// Sum of orders one to three.
pub fn sw_effective(p: &ZeroPiParams, cfg: &SwConfig) -> Result<EffectivePotential> {
    Ok(sw_order1(p).plus(&sw_order2(p, cfg)?).plus(&sw_order3(p, cfg)?))
}

fn at_symmetric_point(p: &ZeroPiParams) -> bool {
    (p.n_g - 0.5).abs() < 1e-12 && (p.varphi_ext - PI).abs() < 1e-12
}

/// Large `E_CJ/E_L` asymptote at `(½, π)`:
/// `√(E_CJ E_L) − (E_J²/E_CJ)(1+√(E_L/E_CJ)) cos²θ + (E_J²E_Cs/E_CJ²)(1+3√(E_L/E_CJ)) sin²θ`.
pub fn hpert_asymptotic(p: &ZeroPiParams) -> Result<EffectivePotential> {
    if !at_symmetric_point(p) {
        return Err(Error::Invalid("asymptotic form holds at (n_g, φ_ext) = (1/2, π)".into()));
    }
    let s = (p.e_l / p.e_cj).sqrt();
    let ej2 = p.e_j * p.e_j;
    Ok(EffectivePotential {
        const_term: (p.e_cj * p.e_l).sqrt(),
        charging_prefactor: 1.0,
        c_cos2sq: -ej2 / p.e_cj * (1.0 + s),
        c_sin2sq: ej2 * p.e_cs / (p.e_cj * p.e_cj) * (1.0 + 3.0 * s),
        ..Default::default()
    }
    .expanded())
}

/// `Σ_{N≥1} f_{0N}²/N²` through the hypergeometric representation
/// `e^{−x}[(r/8) cos²(φ_ext/2) ₃F₄({1,1,1};{3/2,2,2,2};r/4) + √r sin²(φ_ext/2) ₂F₃({½,½};{3/2,3/2,3/2};r/4)]`,
/// `r = E_CJ/E_L`, `x = √r`.
pub fn order3_weight_hypergeometric(p: &ZeroPiParams, tol: f64) -> Result<f64> {
    use crate::special::pfq;
    let r = p.e_cj / p.e_l;
    let h = p.varphi_ext / 2.0;
    let f34 = pfq(&[1.0, 1.0, 1.0], &[1.5, 2.0, 2.0, 2.0], r / 4.0, tol)?;
    let f23 = pfq(&[0.5, 0.5], &[1.5, 1.5, 1.5], r / 4.0, tol)?;
    Ok((-r.sqrt()).exp() * (r / 8.0 * h.cos().powi(2) * f34 + r.sqrt() * h.sin().powi(2) * f23))
}

/// Maps the expanded potential onto a ring Hamiltonian
/// `4 e_cs' (n̂−n_g)² − Σ v_k cos kθ̂ + const` with `v_k = −coeff_k`.
pub fn effective_to_ring(ep: &EffectivePotential, p: &ZeroPiParams) -> Result<RingParams> {
    let mut ep = ep.clone();
    ep.expand();
    let k0 = ep.cos_coeffs.get(&0).copied().unwrap_or(0.0);
    let potential: Vec<(u32, f64)> =
        ep.cos_coeffs.iter().filter(|(k, v)| **k > 0 && **v != 0.0).map(|(k, v)| (*k, -v)).collect();
    let prefactor = if ep.charging_prefactor == 0.0 { 1.0 } else { ep.charging_prefactor };
    RingParams::new(p.e_cs * prefactor, p.n_g, potential, ep.const_term + k0)
}

/// Matrix of the structured potential on a charge window, built from
/// products of truncated `cos θ̂` and `sin θ̂` rather than the expansion.
pub fn structured_matrix(ep: &EffectivePotential, p: &ZeroPiParams, w: &ChargeWindow) -> Array2<f64> {
    use crate::ring::{cosine_matrix, shift_matrix};
    let d = w.len();
    let cth = cosine_matrix(1, w);
    let s = shift_matrix(1, w) - shift_matrix(-1, w);
    let sin2 = s.dot(&s) * (-0.25);
    let c2 = cth.dot(&cth);
    let c3 = c2.dot(&cth);
    let prefactor = if ep.charging_prefactor == 0.0 { 1.0 } else { ep.charging_prefactor };
    let kin = RingParams { e_cs: p.e_cs * prefactor, n_g: p.n_g, potential: vec![], const_offset: ep.const_term };
    let mut h = ring_matrix(&kin, w);
    h.scaled_add(ep.c_cos1, &cth);
    h.scaled_add(ep.c_cos2sq, &c2);
    h.scaled_add(ep.c_sin2sq, &sin2);
    h.scaled_add(ep.c_cos3cu, &c3);
    debug_assert_eq!(h.nrows(), d);
    h
}

/// Block-matrix Schrieffer–Wolff utilities for small explicit matrices:
/// block projections, the formal inverse `L` of `[H₀, ·]` and the
/// effective Hamiltonian to third order.
pub mod framework {
    use ndarray::Array2;

    /// `P X P + Q X Q`.
    pub fn block_diagonal(x: &Array2<f64>, in_p: &[bool]) -> Array2<f64> {
        Array2::from_shape_fn(x.dim(), |(i, j)| if in_p[i] == in_p[j] { x[[i, j]] } else { 0.0 })
    }

    /// `P X Q + Q X P`.
    pub fn off_diagonal(x: &Array2<f64>, in_p: &[bool]) -> Array2<f64> {
        Array2::from_shape_fn(x.dim(), |(i, j)| if in_p[i] != in_p[j] { x[[i, j]] } else { 0.0 })
    }

    /// `L(X)_{ij} = X_{ij}/(E_i − E_j)` on the off-diagonal blocks.
    pub fn l_super(x: &Array2<f64>, e0: &[f64], in_p: &[bool]) -> Array2<f64> {
        Array2::from_shape_fn(x.dim(), |(i, j)| if in_p[i] != in_p[j] { x[[i, j]] / (e0[i] - e0[j]) } else { 0.0 })
    }

    fn comm(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
        a.dot(b) - b.dot(a)
    }

    /// Effective Hamiltonian on the P block, orders 0..=order (≤ 3), for
    /// `H = diag(e0) + v`.
    pub fn effective_hamiltonian(e0: &[f64], v: &Array2<f64>, in_p: &[bool], order: usize) -> Array2<f64> {
        let p_idx: Vec<usize> = (0..e0.len()).filter(|&i| in_p[i]).collect();
        let vd = block_diagonal(v, in_p);
        let vo = off_diagonal(v, in_p);
        let mut h = Array2::from_diag(&ndarray::Array1::from(e0.to_vec()));
        if order >= 1 {
            h = h + &vd;
        }
        let s1 = l_super(&vo, e0, in_p);
        if order >= 2 {
            h = h + comm(&s1, &vo) * 0.5;
        }
        if order >= 3 {
            let s2 = l_super(&off_diagonal(&comm(&vd, &s1), in_p), e0, in_p) * -1.0;
            h = h + comm(&s2, &vo) * 0.5;
        }
        Array2::from_shape_fn((p_idx.len(), p_idx.len()), |(a, b)| h[[p_idx[a], p_idx[b]]])
    }
}
