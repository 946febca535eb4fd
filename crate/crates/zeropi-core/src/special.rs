//! Special functions: Fock-space displacement elements, generalized
//! Laguerre polynomials, the hyperbolic sine and cosine integrals and
//! generalized hypergeometric series.

use crate::error::{Error, Result};
use crate::spectral::C64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Largest Fock index accepted by [`displacement_element`].
pub const MAX_FOCK_INDEX: usize = 1000;

/// `ln n!` by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Table of `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 2..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` returned as
/// `(mantissa, ln_scale)` with value `mantissa·e^{ln_scale}`.
pub fn laguerre_scaled(n: usize, k: f64, x: f64) -> (f64, f64) {
    const BIG: f64 = 1e200;
    let mut scale = 0.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * cur - (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            scale += BIG.ln();
        }
    }
    (cur, scale)
}

/// `L_n^{(k)}(x)`.
pub fn laguerre(n: usize, k: f64, x: f64) -> f64 {
    let (m, s) = laguerre_scaled(n, k, x);
    m * s.exp()
}

/// `𝒰(−M, 1 − M + N, x) = (−1)^M M! L_M^{(N−M)}(x)`; for `M > N` the
/// equivalent `(−1)^N x^{M−N} N! L_N^{(M−N)}(x)` avoids the negative order.
pub fn laguerre_u(m: usize, n: usize, x: f64) -> f64 {
    if m > n {
        let (mant, s) = laguerre_scaled(n, (m - n) as f64, x);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        return sign * mant * x.powi((m - n) as i32) * (s + ln_factorial(n)).exp();
    }
    let (mant, s) = laguerre_scaled(m, n as f64 - m as f64, x);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * mant * (s + ln_factorial(m)).exp()
}

/// `⟨M|D(α)|N⟩` with `D(α) = exp(α a† − α* a)`.
pub fn displacement_element(m: usize, n: usize, alpha: C64) -> Result<C64> {
    if m > MAX_FOCK_INDEX || n > MAX_FOCK_INDEX {
        return Err(Error::Overflow(format!("Fock index ({m}, {n}) exceeds {MAX_FOCK_INDEX}")));
    }
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return Ok(C64::new(if m == n { 1.0 } else { 0.0 }, 0.0));
    }
    let (lo, hi, base) = if m >= n { (n, m, alpha) } else { (m, n, -alpha.conj()) };
    let d = hi - lo;
    let (mant, s) = laguerre_scaled(lo, d as f64, x);
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + d as f64 * base.norm().ln() - 0.5 * x + s;
    let phase = C64::from_polar(1.0, d as f64 * base.arg());
    Ok(phase * mant * ln_mag.exp())
}

/// Matrix of `D(α)` on Fock states `0..n_max`.
pub fn displacement_matrix(n_max: usize, alpha: C64) -> Result<ndarray::Array2<C64>> {
    let mut out = ndarray::Array2::zeros((n_max, n_max));
    for m in 0..n_max {
        for n in 0..n_max {
            out[[m, n]] = displacement_element(m, n, alpha)?;
        }
    }
    Ok(out)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const SERIES_LIMIT: f64 = 40.0;

/// `Σ_{k≥1} x^{2k}/(2k·(2k)!)`, i.e. `Chi(x) − γ − ln x`.
fn chi_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0;
    let mut s = KahanSum::new();
    for k in 1..400 {
        let kk = 2.0 * k as f64;
        term *= x2 / ((kk - 1.0) * kk);
        let t = term / kk;
        s.add(t);
        if t < 1e-17 * s.value() {
            break;
        }
    }
    s.value()
}

/// `Σ_{k≥0} x^{2k+1}/((2k+1)·(2k+1)!)`.
fn shi_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut s = KahanSum::new();
    s.add(x);
    for k in 1..400 {
        let kk = 2.0 * k as f64 + 1.0;
        term *= x2 / ((kk - 1.0) * kk);
        let t = term / kk;
        s.add(t);
        if t < 1e-17 * s.value() {
            break;
        }
    }
    s.value()
}

/// `x e^{−x} Ei(x)` by the asymptotic series, truncated at its smallest term.
fn ei_asym_scaled(x: f64) -> f64 {
    let mut term = 1.0;
    let mut s = KahanSum::new();
    s.add(1.0);
    for k in 1..200 {
        let next = term * k as f64 / x;
        if next >= term {
            break;
        }
        term = next;
        s.add(term);
        if term < 1e-18 {
            break;
        }
    }
    s.value()
}

fn check_positive(x: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::Invalid(format!("argument must be positive, got {x}")));
    }
    Ok(())
}

/// Hyperbolic cosine integral `γ + ln x + ∫₀ˣ (cosh t − 1)/t dt`.
pub fn chi(x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(EULER_GAMMA + x.ln() + chi_reg_scaled(x)? * x.exp())
}

/// Hyperbolic sine integral `∫₀ˣ sinh t / t dt`; `shi(0) = 0`.
pub fn shi(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    check_positive(x)?;
    Ok(shi_scaled(x)? * x.exp())
}

/// `e^{−x} (Chi(x) − γ − ln x)`, free of cancellation and overflow.
pub fn chi_reg_scaled(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x < SERIES_LIMIT {
        return Ok(chi_series(x) * (-x).exp());
    }
    Ok(0.5 * ei_asym_scaled(x) / x - (-x).exp() * (EULER_GAMMA + x.ln()))
}

/// `e^{−x} Shi(x)`.
pub fn shi_scaled(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x < SERIES_LIMIT {
        return Ok(shi_series(x) * (-x).exp());
    }
    Ok(0.5 * ei_asym_scaled(x) / x)
}

/// Generalized hypergeometric series `pFq(a; b; z)` summed term by term
/// until the increment drops below `tol` times the partial sum.
pub fn pfq(a: &[f64], b: &[f64], z: f64, tol: f64) -> Result<f64> {
    if b.iter().any(|&bj| bj <= 0.0 && bj.fract() == 0.0) {
        return Err(Error::Invalid("lower parameter is a nonpositive integer".into()));
    }
    if z < 0.0 {
        return Err(Error::Invalid(format!("z must be nonnegative, got {z}")));
    }
    let mut term = 1.0;
    let mut s = KahanSum::new();
    s.add(1.0);
    for k in 0..1_000_000u32 {
        let kf = k as f64;
        let num: f64 = a.iter().map(|ai| ai + kf).product();
        let den: f64 = b.iter().map(|bj| bj + kf).product();
        term *= num / den * z / (kf + 1.0);
        s.add(term);
        if term == 0.0 || (term.abs() < tol * s.value().abs() && kf > z.abs()) {
            return Ok(s.value());
        }
    }
    Err(Error::Series("pFq did not converge in 1e6 terms".into()))
}
