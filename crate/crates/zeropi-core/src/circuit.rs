//! The 0-π circuit on Fock(φ) ⊗ charge(θ), its symmetry operators and the
//! unbalanced three-mode variant on Fock(φ) ⊗ Fock(ξ) ⊗ charge(θ).

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{cosine_matrix, shift_matrix, ChargeWindow, Closure};
use crate::special::{displacement_matrix, laguerre_scaled, ln_factorials};
use crate::spectral::{converge_levels, eigh, kron, ConvergenceConfig, HermitianOperator, Spectrum, C64};
use crate::symmetry::{
    check_anticommutation, check_commutation, u_pi, u_reflection, v_twisted_reflection,
    verify_d4_presentation, GroupCheckReport, SymLabel, SymmetryOperator, GROUP_TOL,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPiParams {
    pub e_cj: f64,
    pub e_cs: f64,
    pub e_l: f64,
    pub e_j: f64,
    pub n_g: f64,
    pub varphi_ext: f64,
}

impl ZeroPiParams {
    pub fn new(e_cj: f64, e_cs: f64, e_l: f64, e_j: f64, n_g: f64, varphi_ext: f64) -> Result<Self> {
        let p = Self { e_cj, e_cs, e_l, e_j, n_g, varphi_ext };
        p.validate()?;
        Ok(p)
    }

    /// Energies must be positive; `E_J = 0` is accepted as the decoupled limit.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e_cj", self.e_cj), ("e_cs", self.e_cs), ("e_l", self.e_l)] {
            if !(v > 0.0) {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.e_j >= 0.0) {
            return Err(Error::Invalid(format!("e_j must be nonnegative, got {}", self.e_j)));
        }
        if !(0.0..1.0).contains(&self.n_g) {
            return Err(Error::Invalid(format!("n_g must lie in [0,1), got {}", self.n_g)));
        }
        if !(0.0..2.0 * PI).contains(&self.varphi_ext) {
            return Err(Error::Invalid(format!("varphi_ext must lie in [0,2π), got {}", self.varphi_ext)));
        }
        Ok(())
    }

    /// `2√(E_CJ E_L)`, the φ-oscillator frequency.
    pub fn omega(&self) -> f64 {
        2.0 * (self.e_cj * self.e_l).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockTruncation {
    n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::Invalid(format!("Fock truncation needs n_max >= 2, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnbalanceParams {
    pub d_c: f64,
    pub d_cj: f64,
    pub d_ej: f64,
    pub d_l: f64,
    pub e_c: f64,
}

impl UnbalanceParams {
    pub fn balanced(e_c: f64) -> Self {
        Self { d_c: 0.0, d_cj: 0.0, d_ej: 0.0, d_l: 0.0, e_c }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d_c", self.d_c), ("d_cj", self.d_cj), ("d_ej", self.d_ej), ("d_l", self.d_l)] {
            if !(v.abs() < 0.5) {
                return Err(Error::Invalid(format!("{name} must satisfy |{name}| < 0.5, got {v}")));
            }
        }
        if !(self.e_c > 0.0) {
            return Err(Error::Invalid(format!("e_c must be positive, got {}", self.e_c)));
        }
        Ok(())
    }
}

/// `ℓ = (4 E_CJ / E_L)^{1/4}`.
pub fn oscillator_length(p: &ZeroPiParams) -> f64 {
    (4.0 * p.e_cj / p.e_l).powf(0.25)
}

/// `e^{iφ̂} = D(iℓ/√2)` on Fock states `0..n_max`.
pub fn exp_i_phi_op(t: &FockTruncation, ell: f64) -> Result<Array2<C64>> {
    displacement_matrix(t.n_max, C64::new(0.0, ell / std::f64::consts::SQRT_2))
}

/// Real magnitudes `r_{MN}` with `⟨M|e^{iφ̂}|N⟩ = i^{|M−N|} r_{MN}`.
fn displacement_magnitudes(n_max: usize, ell: f64) -> Array2<f64> {
    let x = 0.5 * ell * ell;
    let mut r = Array2::zeros((n_max, n_max));
    if x == 0.0 {
        for i in 0..n_max {
            r[[i, i]] = 1.0;
        }
        return r;
    }
    let lf = ln_factorials(n_max);
    let ln_a = 0.5 * x.ln();
    for hi in 0..n_max {
        for lo in 0..=hi {
            let d = hi - lo;
            let (mant, s) = laguerre_scaled(lo, d as f64, x);
            let v = mant * (0.5 * (lf[lo] - lf[hi]) + d as f64 * ln_a - 0.5 * x + s).exp();
            r[[hi, lo]] = v;
            r[[lo, hi]] = v;
        }
    }
    r
}

/// `cos(φ̂ − shift)` in the Fock basis: entries `r_{MN} cos(|M−N|π/2 − shift)`.
pub fn cos_phi_matrix(t: &FockTruncation, ell: f64, shift: f64) -> Array2<f64> {
    trig_phi_matrix(t, ell, |d| (d * PI / 2.0 - shift).cos())
}

/// `sin(φ̂ − shift)` in the Fock basis: entries `r_{MN} sin(|M−N|π/2 − shift)`.
pub fn sin_phi_matrix(t: &FockTruncation, ell: f64, shift: f64) -> Array2<f64> {
    trig_phi_matrix(t, ell, |d| (d * PI / 2.0 - shift).sin())
}

fn trig_phi_matrix(t: &FockTruncation, ell: f64, f: impl Fn(f64) -> f64) -> Array2<f64> {
    let n = t.n_max;
    let r = displacement_magnitudes(n, ell);
    let phases: Vec<f64> = (0..n).map(|d| round_unit(f(d as f64))).collect();
    Array2::from_shape_fn((n, n), |(i, j)| r[[i, j]] * phases[i.abs_diff(j)])
}

/// Snaps exact zeros and unit values of trigonometric phase factors.
fn round_unit(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else if (v.abs() - 1.0).abs() < 1e-15 {
        v.signum()
    } else {
        v
    }
}

fn ladder(n: usize) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for k in 1..n {
        a[[k - 1, k]] = (k as f64).sqrt();
    }
    a
}

/// `φ̂ = ℓ(a + a†)/√2`.
pub fn phi_matrix(t: &FockTruncation, ell: f64) -> Array2<f64> {
    let a = ladder(t.n_max);
    (&a + &a.t()) * (ell / std::f64::consts::SQRT_2)
}

/// `Q̂ = i(a† − a)/(√2 ℓ)`.
pub fn charge_matrix(t: &FockTruncation, ell: f64) -> Array2<C64> {
    let a = ladder(t.n_max);
    let d = (&a.t() - &a) * (1.0 / (std::f64::consts::SQRT_2 * ell));
    d.mapv(|v| C64::new(0.0, v))
}

/// `4E_CJ Q̂² + E_L φ̂²` built from truncated quadratures. With these
/// ladder conventions it equals `4√(E_CJ E_L)(N̂+½)` away from the top of
/// the ladder, twice [`harmonic_number_form`].
pub fn harmonic_quadrature_form(p: &ZeroPiParams, t: &FockTruncation) -> Array2<f64> {
    let ell = oscillator_length(p);
    let q = charge_matrix(t, ell);
    let q2 = q.dot(&q).mapv(|z| z.re);
    let ph = phi_matrix(t, ell);
    q2 * (4.0 * p.e_cj) + ph.dot(&ph) * p.e_l
}

/// `2√(E_CJ E_L)(N̂ + ½)`.
pub fn harmonic_number_form(p: &ZeroPiParams, t: &FockTruncation) -> Array2<f64> {
    let w = p.omega();
    Array2::from_diag(&ndarray::Array1::from_iter((0..t.n_max).map(|k| w * (k as f64 + 0.5))))
}

fn charging_diag(e_cs: f64, n_g: f64, w: &ChargeWindow) -> Vec<f64> {
    w.charges()
        .map(|n| {
            let x = n as f64 - n_g;
            4.0 * e_cs * x * x
        })
        .collect()
}

/// Balanced Hamiltonian `2√(E_CJ E_L)(N̂+½) + 4E_Cs(n̂−n_g)² − 2E_J cos(φ̂−φ_ext/2) cos θ̂`.
pub fn build_zeropi_hamiltonian(p: &ZeroPiParams, t: &FockTruncation, w: &ChargeWindow) -> Result<HermitianOperator> {
    p.validate()?;
    let nf = t.n_max;
    let nw = w.len();
    let omega = p.omega();
    let kin = charging_diag(p.e_cs, p.n_g, w);
    let mut h = Array2::<f64>::zeros((nf * nw, nf * nw));
    for m in 0..nf {
        for (i, k) in kin.iter().enumerate() {
            h[[m * nw + i, m * nw + i]] = omega * (m as f64 + 0.5) + k;
        }
    }
    if p.e_j != 0.0 {
        let cphi = cos_phi_matrix(t, oscillator_length(p), p.varphi_ext / 2.0);
        let cth = cosine_matrix(1, w);
        h.scaled_add(-2.0 * p.e_j, &kron(&cphi, &cth));
    }
    HermitianOperator::symmetrized_real(h)
}

/// `P_φ = diag((−1)^N)`.
pub fn p_phi_parity(t: &FockTruncation) -> SymmetryOperator {
    let d: Vec<C64> = (0..t.n_max).map(|k| C64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    SymmetryOperator::new(Array2::from_diag(&ndarray::Array1::from(d)), SymLabel::PPhi, 2)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

/// Builds the generator pair for the control point given by the window
/// closure (`n_g` reflection) and `φ_ext ∈ {0, π}`, then checks that both
/// commute with H and satisfy the D4 or ℤ₂×ℤ₂ relations.
pub fn zeropi_symmetry_suite(p: &ZeroPiParams, t: &FockTruncation, w: &ChargeWindow) -> Result<GroupCheckReport> {
    let at_pi = if near(p.varphi_ext, PI) {
        true
    } else if near(p.varphi_ext, 0.0) {
        false
    } else {
        return Err(Error::Invalid(format!("φ_ext = {} is not a symmetric control point", p.varphi_ext)));
    };
    let h = build_zeropi_hamiltonian(p, t, w)?;
    let i_f = SymmetryOperator::identity(t.n_max);
    let i_w = SymmetryOperator::identity(w.len());
    let pphi = p_phi_parity(t);
    let reflection = match w.closure() {
        Closure::AboutHalf => v_twisted_reflection(w)?,
        Closure::AboutZero => u_reflection(w)?,
    };
    let g1 = i_f.kron(&reflection);
    let g2 = if at_pi { pphi.kron(&u_pi(w)) } else { pphi.kron(&i_w) };
    let anomalous = at_pi && w.closure() == Closure::AboutHalf;
    let mut rel = vec![
        ("[g1, H]".to_string(), g1.commutator_with(&h)),
        ("[g2, H]".to_string(), g2.commutator_with(&h)),
        ("g1^2 = 1".to_string(), g1.order_residual()),
        ("g2^2 = 1".to_string(), g2.order_residual()),
    ];
    if anomalous {
        rel.push(("{g1, g2} = 0".to_string(), check_anticommutation(&g1, &g2)));
    } else {
        rel.push(("[g1, g2] = 0".to_string(), check_commutation(&g1, &g2)));
    }
    let mut rep = GroupCheckReport::from_relations(rel, 1e-10);
    if anomalous {
        let a = g2.then(&g1, 4);
        let d4 = verify_d4_presentation(&a.matrix, &g1.matrix, GROUP_TOL);
        let order = d4.group_order;
        rep = rep.merge(GroupCheckReport::from_relations(
            d4.relations.into_iter().map(|(l, r)| (format!("D4 {l}"), r)).collect(),
            1e-10,
        ));
        rep.group_order = order;
    }
    Ok(rep)
}

/// Truncation for a single growth parameter: `size` Fock states and a
/// charge window whose half-width grows as the square root of `size`.
pub fn zeropi_truncation(p: &ZeroPiParams, size: usize) -> (FockTruncation, ChargeWindow) {
    let (f0, h0) = zeropi_base_truncation(p);
    let n_max = size.max(2);
    let h = ((h0 as f64) * (n_max as f64 / f0 as f64).sqrt()).ceil().max(2.0) as u32;
    (FockTruncation { n_max }, ChargeWindow::for_offset(p.n_g, h))
}

/// Starting `(n_max, half_width)` from the oscillator spread and the
/// θ-potential depth.
pub fn zeropi_base_truncation(p: &ZeroPiParams) -> (usize, u32) {
    let x = (p.e_cj / p.e_l).sqrt();
    let depth = 2.0 * p.e_j / p.omega();
    let f0 = (6.0 + 1.5 * x + 4.0 * depth.sqrt()).ceil() as usize;
    let h0 = (3.0 + 1.5 * (2.0 * p.e_j / p.e_cs).powf(0.25)).ceil() as u32;
    (f0.max(4), h0)
}

/// Index sets of the two sectors of a diagonal parity commuting with the
/// balanced Hamiltonian: `(−1)^N (−1)^n` at `φ_ext = π`, `(−1)^N` at
/// `φ_ext = 0`. `None` elsewhere.
pub fn zeropi_parity_sectors(p: &ZeroPiParams, t: &FockTruncation, w: &ChargeWindow) -> Option<(Vec<usize>, Vec<usize>)> {
    let with_charge = if near(p.varphi_ext, PI) {
        true
    } else if near(p.varphi_ext, 0.0) {
        false
    } else {
        return None;
    };
    let nw = w.len();
    let (mut even, mut odd) = (Vec::new(), Vec::new());
    for m in 0..t.n_max {
        for (i, n) in w.charges().enumerate() {
            let q = if with_charge { m as i64 + n } else { m as i64 };
            if q.rem_euclid(2) == 0 {
                even.push(m * nw + i);
            } else {
                odd.push(m * nw + i);
            }
        }
    }
    Some((even, odd))
}

/// Lowest `count` levels of the balanced model at a fixed truncation,
/// diagonalizing the parity sectors separately when one exists.
pub fn zeropi_levels(p: &ZeroPiParams, t: &FockTruncation, w: &ChargeWindow, count: usize) -> Result<Vec<f64>> {
    let h = build_zeropi_hamiltonian(p, t, w)?;
    let count = count.min(h.dim());
    let mut ev = match zeropi_parity_sectors(p, t, w) {
        Some((even, odd)) => {
            let mut v = Vec::with_capacity(2 * count);
            for idx in [even, odd] {
                if idx.is_empty() {
                    continue;
                }
                let block = h.restricted(&idx)?;
                v.extend(eigh(&block, count.min(block.dim()))?.eigenvalues);
            }
            v
        }
        None => eigh(&h, count)?.eigenvalues,
    };
    ev.sort_by(|a, b| a.total_cmp(b));
    ev.truncate(count);
    Ok(ev)
}

/// Converged lowest `count` levels of the balanced model.
pub fn converge_zeropi(p: &ZeroPiParams, count: usize, abs_tol: f64, max_size: usize) -> Result<Spectrum> {
    p.validate()?;
    let (f0, _) = zeropi_base_truncation(p);
    let cfg = ConvergenceConfig::new(f0, abs_tol, max_size.max(f0 + 1));
    let mut s = converge_levels(
        |k| {
            let (t, w) = zeropi_truncation(p, k);
            let dim = t.n_max * w.len();
            if dim < count {
                return Ok((Vec::new(), dim));
            }
            Ok((zeropi_levels(p, &t, &w, count)?, dim))
        },
        count,
        &cfg,
    )?;
    let (t, w) = zeropi_truncation(p, s.basis_meta.size);
    s.basis_meta.label = format!("fock {} x charge [{}, {}]", t.n_max, w.n_lo(), w.n_hi());
    Ok(s)
}

/// Largest tensor dimension accepted by [`build_unbalanced_hamiltonian`].
pub const UNBALANCED_DIM_CAP: usize = 20_000;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron3(a: &Array2<C64>, b: &Array2<C64>, w: &Array2<C64>) -> Array2<C64> {
    kron(&kron(a, b), w)
}

/// Three-mode Hamiltonian with the imbalance couplings
/// `2E_Cs(n̂−n_g)(dC Q̂_ξ + dC_J Q̂_φ) − E_J dE_J sin θ̂ sin(φ̂−φ_ext/2) − 2E_L dL φ̂ ξ̂`.
/// Both oscillators use the number-operator form.
pub fn build_unbalanced_hamiltonian(
    p: &ZeroPiParams,
    u: &UnbalanceParams,
    t_phi: &FockTruncation,
    t_xi: &FockTruncation,
    w: &ChargeWindow,
) -> Result<HermitianOperator> {
    p.validate()?;
    u.validate()?;
    let (nf, nx, nw) = (t_phi.n_max, t_xi.n_max, w.len());
    let dim = nf * nx * nw;
    if dim > UNBALANCED_DIM_CAP {
        return Err(Error::Invalid(format!("tensor dimension {dim} exceeds cap {UNBALANCED_DIM_CAP}")));
    }
    let ell = oscillator_length(p);
    let ell_xi = (4.0 * u.e_c / p.e_l).powf(0.25);
    let omega_xi = 2.0 * (u.e_c * p.e_l).sqrt();
    let cz = |m: Array2<f64>| m.mapv(c);
    let i_f = Array2::from_diag_elem(nf, c(1.0));
    let i_x = Array2::from_diag_elem(nx, c(1.0));
    let i_w = Array2::from_diag_elem(nw, c(1.0));
    let nn = cz(Array2::from_diag(&ndarray::Array1::from_iter(w.charges().map(|n| n as f64 - p.n_g))));

    let mut h = Array2::<C64>::zeros((dim, dim));
    let kin = charging_diag(p.e_cs, p.n_g, w);
    for m in 0..nf {
        for k in 0..nx {
            for (i, e) in kin.iter().enumerate() {
                let idx = (m * nx + k) * nw + i;
                h[[idx, idx]] = c(p.omega() * (m as f64 + 0.5) + omega_xi * (k as f64 + 0.5) + e);
            }
        }
    }
    let shift = p.varphi_ext / 2.0;
    if p.e_j != 0.0 {
        let cphi = cz(cos_phi_matrix(t_phi, ell, shift));
        h.scaled_add(c(-2.0 * p.e_j), &kron3(&cphi, &i_x, &cz(cosine_matrix(1, w))));
    }
    if u.d_c != 0.0 {
        h.scaled_add(c(2.0 * p.e_cs * u.d_c), &kron3(&i_f, &charge_matrix(t_xi, ell_xi), &nn));
    }
    if u.d_cj != 0.0 {
        h.scaled_add(c(2.0 * p.e_cs * u.d_cj), &kron3(&charge_matrix(t_phi, ell), &i_x, &nn));
    }
    if u.d_ej != 0.0 && p.e_j != 0.0 {
        let sphi = cz(sin_phi_matrix(t_phi, ell, shift));
        let sth = (shift_matrix(1, w) - shift_matrix(-1, w)).mapv(|v| C64::new(0.0, -0.5 * v));
        h.scaled_add(c(-p.e_j * u.d_ej), &kron3(&sphi, &i_x, &sth));
    }
    if u.d_l != 0.0 {
        let ph = cz(phi_matrix(t_phi, ell));
        let xi = cz(phi_matrix(t_xi, ell_xi));
        h.scaled_add(c(-2.0 * p.e_l * u.d_l), &kron3(&ph, &xi, &i_w));
    }
    HermitianOperator::symmetrized(h)
}
