//! Instanton amplitudes with winding interference, and the sensitivity of
//! the even/odd gap to the offset charge.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::ring::{build_ring_hamiltonian, ground_charge_expectation, suggested_half_width, ChargeWindow, RingParams};
use crate::spectral::eigh;
use crate::symmetry::{sector_split_indices, Sector};

/// Ring with kinetic scale `eps`, potential `−λ cos 2θ` and offset `n_g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstantonParams {
    pub eps: f64,
    pub lam: f64,
    pub n_g: f64,
}

impl InstantonParams {
    pub fn new(eps: f64, lam: f64, n_g: f64) -> Result<Self> {
        if !(eps > 0.0 && lam > 0.0) {
            return Err(Error::Invalid("eps and lam must be positive".into()));
        }
        Ok(Self { eps, lam, n_g })
    }

    /// Rate `4√(2ελ)` of the kink.
    pub fn rate(&self) -> f64 {
        4.0 * (2.0 * self.eps * self.lam).sqrt()
    }
}

/// `θ_I(t) = 2 arctan(e^{4t√(2ελ)})`, running from 0 to π.
pub fn instanton_path(t: f64, ip: &InstantonParams) -> f64 {
    let u = ip.rate() * t;
    if u > 0.0 {
        PI - 2.0 * (-u).exp().atan()
    } else {
        2.0 * u.exp().atan()
    }
}

/// `R = √(2λ/ε)`.
pub fn instanton_action_real(ip: &InstantonParams) -> f64 {
    (2.0 * ip.lam / ip.eps).sqrt()
}

/// Euclidean Lagrangian `θ̇²/16ε + λ − λ cos 2θ` evaluated on the kink.
fn lagrangian_on_path(t: f64, ip: &InstantonParams) -> f64 {
    let th = instanton_path(t, ip);
    let thdot = ip.rate() * th.sin();
    thdot * thdot / (16.0 * ip.eps) + ip.lam * (1.0 - (2.0 * th).cos())
}

/// Real part of the action by quadrature on `|t| ≤ 10/(4√(2ελ))` plus the
/// analytic exponential tails.
pub fn instanton_action_quadrature(ip: &InstantonParams, tol: f64) -> f64 {
    let k = ip.rate();
    let t_max = 10.0 / k;
    let core = integrate(|t| lagrangian_on_path(t, ip), -t_max, t_max, tol);
    // Far from the centre sin θ ≈ 2e^{−k|t|}, so the integrand is 16λ e^{−2k|t|}.
    let tail = 2.0 * 16.0 * ip.lam * (-2.0 * k * t_max).exp() / (2.0 * k);
    core + tail
}

/// Residual of `θ̈ − 16ελ sin 2θ = 0` at time `t`, relative to the scale
/// `32ελ` of `θ̈`. The second derivative is a central difference with step
/// `h`, Richardson-extrapolated over `h, h/2, h/4`.
pub fn instanton_eom_residual(t: f64, ip: &InstantonParams, h: f64) -> f64 {
    let d2 = |h: f64| (instanton_path(t + h, ip) - 2.0 * instanton_path(t, ip) + instanton_path(t - h, ip)) / (h * h);
    let (a, b, c) = (d2(h), d2(h / 2.0), d2(h / 4.0));
    let ab = (4.0 * b - a) / 3.0;
    let bc = (4.0 * c - b) / 3.0;
    let acc = (16.0 * bc - ab) / 15.0;
    let scale = 32.0 * ip.eps * ip.lam;
    (acc - 16.0 * ip.eps * ip.lam * (2.0 * instanton_path(t, ip)).sin()) / scale
}

/// `2 e^{−R} cos(n_g π)`: both chiral paths from 0 to π.
pub fn pair_amplitude(r: f64, n_g: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Invalid("R must be positive".into()));
    }
    Ok(2.0 * (-r).exp() * interference(n_g))
}

/// `cos(n_g π)` with the exact zero at half-integers.
fn interference(n_g: f64) -> f64 {
    class_weight(0, n_g)
}

/// `cos[(2n+1) n_g π]`, the Aharonov–Bohm factor of the paths traversing
/// an angle `(2n+1)π`.
pub fn class_weight(n: i64, n_g: f64) -> f64 {
    let m = (2 * n + 1) as f64;
    let arg = m * n_g;
    let frac = arg - arg.floor();
    if (frac - 0.5).abs() < 1e-15 {
        return 0.0;
    }
    (arg * PI).cos()
}

/// `2 sinh R cos I / (cosh 2R − cos 2I)` with `I = −n_g π`.
pub fn winding_amplitude(r: f64, n_g: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Invalid("R must be positive".into()));
    }
    let i = -n_g * PI;
    Ok(2.0 * r.sinh() * interference(n_g) / ((2.0 * r).cosh() - (2.0 * i).cos()))
}

/// Complex action `S_N = (2|N|+1)(R + i sign(N) I)`; `N = 0` is the
/// direct path and its mirror carries the conjugate phase.
pub fn winding_action(n: i64, r: f64, n_g: f64) -> (f64, f64) {
    let m = (2 * n.abs() + 1) as f64;
    let i = -n_g * PI;
    (m * r, m * n.signum() as f64 * i)
}

/// `Σ_{N=0}^{n_max} e^{−(2N+1)R}·2cos((2N+1)I)`, the amplitude summed over
/// both chiralities up to winding `n_max`.
pub fn winding_partial_sum(r: f64, n_g: f64, n_max: u32) -> f64 {
    (0..=n_max as i64).map(|n| 2.0 * (-((2 * n + 1) as f64) * r).exp() * class_weight(n, n_g)).sum()
}

/// `2e^{−(2N+3)R}/(1 − e^{−2R})`, a bound on the omitted windings.
pub fn winding_tail_bound(r: f64, n_max: u32) -> f64 {
    2.0 * (-((2 * n_max + 3) as f64) * r).exp() / (1.0 - (-2.0 * r).exp())
}

fn sector_ground(p: &RingParams, w: &ChargeWindow, s: Sector) -> Result<f64> {
    let h = build_ring_hamiltonian(p, w);
    let block = h.restricted(&sector_split_indices(w, s))?;
    Ok(eigh(&block, 1)?.eigenvalues[0])
}

/// `Δ(n_g) = E(gs, even) − E(gs, odd)`.
pub fn even_odd_gap(p: &RingParams, w: &ChargeWindow) -> Result<f64> {
    if !p.only_even_harmonics() {
        return Err(Error::Invalid("even/odd sectors need only even harmonics".into()));
    }
    Ok(sector_ground(p, w, Sector::Even)? - sector_ground(p, w, Sector::Odd)?)
}

/// `(Δ(½+δ) − Δ(½−δ))/(2δ)` from sector spectra.
pub fn gap_slope_numeric(p: &RingParams, delta: f64) -> Result<f64> {
    if !(1e-6..=1e-2).contains(&delta) {
        return Err(Error::Invalid(format!("delta must lie in [1e-6, 1e-2], got {delta}")));
    }
    let w = ChargeWindow::about_half(suggested_half_width(p));
    let up = even_odd_gap(&p.with_n_g(0.5 + delta), &w)?;
    let dn = even_odd_gap(&p.with_n_g(0.5 - delta), &w)?;
    Ok((up - dn) / (2.0 * delta))
}

/// `16 E_Cs (½ − ⟨n̂⟩_{gs,e})` at `n_g = ½`.
pub fn gap_slope_feynman_hellmann(p: &RingParams) -> Result<f64> {
    let p = p.with_n_g(0.5);
    let w = ChargeWindow::about_half(suggested_half_width(&p));
    let n = ground_charge_expectation(&p, &w, Some(Sector::Even))?;
    Ok(16.0 * p.e_cs * (0.5 - n))
}

/// `4E_Cs π √(λ/2E_Cs) e^{−(π²/4)√(λ/2E_Cs)}`, evaluated as
/// `−16E_Cs ⟨n̂ − ½⟩` from [`gs_charge_semiclassical`].
pub fn gap_slope_semiclassical(lam: f64, e_cs: f64) -> f64 {
    -16.0 * e_cs * gs_charge_semiclassical(lam, e_cs)
}

/// `⟨gs_e|(n̂ − ½)|gs_e⟩ ≈ −(π/4)√(λ/2E_Cs) e^{−(π²/4)√(λ/2E_Cs)}`.
pub fn gs_charge_semiclassical(lam: f64, e_cs: f64) -> f64 {
    let s = (lam / (2.0 * e_cs)).sqrt();
    -(PI / 4.0) * s * (-(PI * PI / 4.0) * s).exp()
}
