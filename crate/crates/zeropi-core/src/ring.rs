//! Particle on a ring in the charge basis with a cosine-series potential.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{eigh_pairs, HermitianOperator};
use crate::symmetry::{sector_split_indices, Sector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingParams {
    pub e_cs: f64,
    pub n_g: f64,
    /// Pairs `(k, v_k)` entering as `−v_k cos kθ`.
    pub potential: Vec<(u32, f64)>,
    pub const_offset: f64,
}

impl RingParams {
    pub fn new(e_cs: f64, n_g: f64, potential: Vec<(u32, f64)>, const_offset: f64) -> Result<Self> {
        let p = Self { e_cs, n_g, potential, const_offset };
        p.validate()?;
        Ok(p)
    }

    pub fn free(e_cs: f64, n_g: f64) -> Result<Self> {
        Self::new(e_cs, n_g, Vec::new(), 0.0)
    }

    /// `ε = e_cs`, potential `−λ cos 2θ`.
    pub fn cos2(e_cs: f64, n_g: f64, lam: f64) -> Result<Self> {
        Self::new(e_cs, n_g, vec![(2, lam)], 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_cs > 0.0) {
            return Err(Error::Invalid(format!("e_cs must be positive, got {}", self.e_cs)));
        }
        if !(0.0..1.0).contains(&self.n_g) {
            return Err(Error::Invalid(format!("n_g must lie in [0,1), got {}", self.n_g)));
        }
        let mut ks: Vec<u32> = self.potential.iter().map(|(k, _)| *k).collect();
        if ks.iter().any(|k| *k == 0) {
            return Err(Error::Invalid("cosine harmonics start at k = 1".into()));
        }
        ks.sort_unstable();
        ks.dedup();
        if ks.len() != self.potential.len() {
            return Err(Error::Invalid("cosine harmonics must be distinct".into()));
        }
        Ok(())
    }

    pub fn only_even_harmonics(&self) -> bool {
        self.potential.iter().all(|(k, v)| k % 2 == 0 || *v == 0.0)
    }

    pub fn with_n_g(&self, n_g: f64) -> Self {
        Self { n_g, ..self.clone() }
    }

    fn potential_scale(&self) -> f64 {
        self.potential.iter().map(|(_, v)| v.abs()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    /// Closed under `n ↦ −n`.
    AboutZero,
    /// Closed under `n ↦ 1 − n`.
    AboutHalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeWindow {
    n_lo: i64,
    n_hi: i64,
    closure: Closure,
}

impl ChargeWindow {
    pub fn new(n_lo: i64, n_hi: i64, closure: Closure) -> Result<Self> {
        let ok = match closure {
            Closure::AboutZero => n_lo == -n_hi && n_hi >= 0,
            Closure::AboutHalf => n_lo == 1 - n_hi && n_hi >= 1,
        };
        if !ok {
            return Err(Error::Invalid(format!("window [{n_lo}, {n_hi}] is not closed under {closure:?}")));
        }
        Ok(Self { n_lo, n_hi, closure })
    }

    /// `[−h, h]`.
    pub fn about_zero(h: u32) -> Self {
        Self { n_lo: -(h as i64), n_hi: h as i64, closure: Closure::AboutZero }
    }

    /// `[1 − h, h]`, `h ≥ 1`.
    pub fn about_half(h: u32) -> Self {
        let h = h.max(1) as i64;
        Self { n_lo: 1 - h, n_hi: h, closure: Closure::AboutHalf }
    }

    /// Window of roughly `2h` states with the closure natural for `n_g`:
    /// about one half when `n_g` is closer to ½ than to an integer.
    pub fn for_offset(n_g: f64, h: u32) -> Self {
        let frac = n_g - n_g.floor();
        if (frac - 0.5).abs() <= 0.25 {
            Self::about_half(h)
        } else {
            Self::about_zero(h)
        }
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_hi
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn charges(&self) -> impl Iterator<Item = i64> {
        self.n_lo..=self.n_hi
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        (self.n_lo..=self.n_hi).contains(&n).then(|| (n - self.n_lo) as usize)
    }
}

pub fn charge_op(w: &ChargeWindow) -> HermitianOperator {
    let d: Vec<f64> = w.charges().map(|n| n as f64).collect();
    HermitianOperator::diagonal(&d).expect("window is non-empty")
}

/// Raised when a harmonic does not fit inside the window.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationWarning {
    pub k: u32,
    pub window_len: usize,
}

/// Truncated `e^{ikθ̂}`: `|n⟩ ↦ |n+k⟩`, entries leaving the window dropped.
/// Negative `k` shifts down.
pub fn shift_matrix(k: i64, w: &ChargeWindow) -> Array2<f64> {
    let d = w.len();
    let mut m = Array2::zeros((d, d));
    for j in 0..d {
        let i = j as i64 + k;
        if i >= 0 && (i as usize) < d {
            m[[i as usize, j]] = 1.0;
        }
    }
    m
}

pub(crate) fn cosine_matrix(k: u32, w: &ChargeWindow) -> Array2<f64> {
    (shift_matrix(k as i64, w) + shift_matrix(-(k as i64), w)) * 0.5
}

/// `cos kθ̂` with ½ on the ±k off-diagonals; zero matrix plus a warning
/// when `k` is at least the window length.
pub fn cosine_op_checked(k: u32, w: &ChargeWindow) -> (HermitianOperator, Option<TruncationWarning>) {
    let warn = (k as usize >= w.len()).then(|| TruncationWarning { k, window_len: w.len() });
    let op = HermitianOperator::from_real(cosine_matrix(k, w)).expect("symmetric by construction");
    (op, warn)
}

pub fn cosine_op(k: u32, w: &ChargeWindow) -> HermitianOperator {
    cosine_op_checked(k, w).0
}

pub(crate) fn ring_matrix(p: &RingParams, w: &ChargeWindow) -> Array2<f64> {
    let d = w.len();
    let mut h = Array2::zeros((d, d));
    for (i, n) in w.charges().enumerate() {
        let x = n as f64 - p.n_g;
        h[[i, i]] = 4.0 * p.e_cs * x * x + p.const_offset;
    }
    for &(k, v) in &p.potential {
        h.scaled_add(-v, &cosine_matrix(k, w));
    }
    h
}

/// `4 e_cs (n̂ − n_g)² − Σ v_k cos kθ̂ + const`.
pub fn build_ring_hamiltonian(p: &RingParams, w: &ChargeWindow) -> HermitianOperator {
    HermitianOperator::from_real(ring_matrix(p, w)).expect("symmetric by construction")
}

/// `4 e_cs |1 − 2 n_g|`, the free-particle gap.
pub fn free_gap(p: &RingParams) -> Result<f64> {
    if p.potential.iter().any(|(_, v)| *v != 0.0) {
        return Err(Error::Invalid("free gap requires an empty potential".into()));
    }
    Ok(4.0 * p.e_cs * (1.0 - 2.0 * p.n_g).abs())
}

/// Half-width of a charge window that comfortably holds the low-lying
/// states for these parameters.
pub fn suggested_half_width(p: &RingParams) -> u32 {
    let r = (p.potential_scale() / p.e_cs).max(0.0);
    let kmax = p.potential.iter().map(|(k, _)| *k).max().unwrap_or(1);
    (12.0 + 4.0 * r.powf(0.25) + 2.0 * kmax as f64).ceil() as u32
}

/// `⟨n̂⟩` in the ground state, optionally restricted to a `U_π` sector.
pub fn ground_charge_expectation(p: &RingParams, w: &ChargeWindow, sector: Option<Sector>) -> Result<f64> {
    let h = build_ring_hamiltonian(p, w);
    let charges: Vec<f64> = w.charges().map(|n| n as f64).collect();
    let idx: Vec<usize> = match sector {
        None => (0..w.len()).collect(),
        Some(s) => {
            if !p.only_even_harmonics() {
                return Err(Error::Invalid("sector split needs only even harmonics".into()));
            }
            sector_split_indices(w, s)
        }
    };
    let block = h.restricted(&idx)?;
    let (_, v) = eigh_pairs(&block, 1)?;
    Ok(idx.iter().enumerate().map(|(r, &i)| v[[r, 0]].norm_sqr() * charges[i]).sum())
}
