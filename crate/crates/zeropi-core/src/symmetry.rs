//! Symmetry unitaries on the charge basis and checks of the group algebra:
//! ℤ₂×ℤ₂, D4, Pin(2), the projective ℤ₂×ℤ₂ multiplier and its Q8 lift.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::ring::{shift_matrix, ChargeWindow, Closure};
use crate::spectral::{kron, spectral_norm, HermitianOperator, C64};

/// Default residual tolerance for group relations.
pub const GROUP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymLabel {
    UPi,
    UP,
    VP,
    PPhi,
    URot(f64),
    Composite(String),
}

#[derive(Clone, Debug)]
pub struct SymmetryOperator {
    pub matrix: Array2<C64>,
    pub label: SymLabel,
    pub expected_order: u32,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn eye(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, c(1.0))
}

fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

fn diff_norm(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    spectral_norm(&(a - b))
}

fn power(m: &Array2<C64>, k: u32) -> Array2<C64> {
    let mut out = eye(m.nrows());
    for _ in 0..k {
        out = out.dot(m);
    }
    out
}

impl SymmetryOperator {
    pub fn new(matrix: Array2<C64>, label: SymLabel, expected_order: u32) -> Self {
        Self { matrix, label, expected_order }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖U†U − I‖₂`.
    pub fn unitarity_residual(&self) -> f64 {
        diff_norm(&dagger(&self.matrix).dot(&self.matrix), &eye(self.dim()))
    }

    /// `‖U^order − I‖₂`.
    pub fn order_residual(&self) -> f64 {
        diff_norm(&power(&self.matrix, self.expected_order), &eye(self.dim()))
    }

    pub fn dagger(&self) -> Self {
        Self::new(dagger(&self.matrix), self.label.clone(), self.expected_order)
    }

    pub fn then(&self, other: &Self, expected_order: u32) -> Self {
        let label = SymLabel::Composite(format!("{:?}*{:?}", self.label, other.label));
        Self::new(self.matrix.dot(&other.matrix), label, expected_order)
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let label = SymLabel::Composite(format!("{:?}(x){:?}", self.label, other.label));
        let order = lcm(self.expected_order, other.expected_order);
        Self::new(kron(&self.matrix, &other.matrix), label, order)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(eye(dim), SymLabel::Composite("I".into()), 1)
    }

    /// `‖[U, H]‖₂`.
    pub fn commutator_with(&self, h: &HermitianOperator) -> f64 {
        let hm = h.to_complex();
        spectral_norm(&(self.matrix.dot(&hm) - hm.dot(&self.matrix)))
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// `U_π = e^{iπn̂}`, diagonal `(−1)^n`.
pub fn u_pi(w: &ChargeWindow) -> SymmetryOperator {
    let d: Vec<C64> = w.charges().map(|n| c(if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 })).collect();
    SymmetryOperator::new(Array2::from_diag(&ndarray::Array1::from(d)), SymLabel::UPi, 2)
}

fn permutation(w: &ChargeWindow, f: impl Fn(i64) -> i64) -> Array2<C64> {
    let d = w.len();
    let mut m = Array2::zeros((d, d));
    for (j, n) in w.charges().enumerate() {
        let i = w.index_of(f(n)).expect("window closed under the map");
        m[[i, j]] = c(1.0);
    }
    m
}

/// `U_P|n⟩ = |−n⟩`.
pub fn u_reflection(w: &ChargeWindow) -> Result<SymmetryOperator> {
    if w.closure() != Closure::AboutZero {
        return Err(Error::Closure("about zero"));
    }
    Ok(SymmetryOperator::new(permutation(w, |n| -n), SymLabel::UP, 2))
}

/// `V_P|n⟩ = |1 − n⟩`.
pub fn v_twisted_reflection(w: &ChargeWindow) -> Result<SymmetryOperator> {
    if w.closure() != Closure::AboutHalf {
        return Err(Error::Closure("about one half"));
    }
    Ok(SymmetryOperator::new(permutation(w, |n| 1 - n), SymLabel::VP, 2))
}

/// The product `e^{iθ̂} U_P` on a window closed about zero. Agrees with
/// `V_P` on states whose image stays inside the window.
pub fn v_twisted_reflection_product(w: &ChargeWindow) -> Result<Array2<C64>> {
    let up = u_reflection(w)?;
    Ok(shift_matrix(1, w).mapv(c).dot(&up.matrix))
}

/// `U_R(α) = e^{−iαn̂}`.
pub fn u_rot(alpha: f64, w: &ChargeWindow) -> SymmetryOperator {
    let d: Vec<C64> = w.charges().map(|n| C64::from_polar(1.0, -alpha * n as f64)).collect();
    SymmetryOperator::new(Array2::from_diag(&ndarray::Array1::from(d)), SymLabel::URot(alpha), 1)
}

/// Truncated `e^{iθ̂}` as a complex matrix.
pub fn exp_i_theta(w: &ChargeWindow) -> Array2<C64> {
    shift_matrix(1, w).mapv(c)
}

/// D4 generator `a = e^{iπn̂} e^{iθ̂} U_P`, realized as `|n⟩ ↦ (−1)^{n+1}|1 − n⟩`.
pub fn d4_generator_a(w: &ChargeWindow) -> Result<SymmetryOperator> {
    let v = v_twisted_reflection(w)?;
    Ok(u_pi(w).then(&v, 4))
}

/// `‖ab + ba‖₂`.
pub fn check_anticommutation(a: &SymmetryOperator, b: &SymmetryOperator) -> f64 {
    spectral_norm(&(a.matrix.dot(&b.matrix) + b.matrix.dot(&a.matrix)))
}

/// `‖ab − ba‖₂`.
pub fn check_commutation(a: &SymmetryOperator, b: &SymmetryOperator) -> f64 {
    spectral_norm(&(a.matrix.dot(&b.matrix) - b.matrix.dot(&a.matrix)))
}

#[derive(Clone, Debug)]
pub struct GroupCheckReport {
    pub relations: Vec<(String, f64)>,
    pub passed: bool,
    pub tolerance: f64,
    /// Size of the matrix group generated, when it was enumerated.
    pub group_order: Option<usize>,
}

impl GroupCheckReport {
    pub fn from_relations(relations: Vec<(String, f64)>, tolerance: f64) -> Self {
        let passed = relations.iter().all(|(_, r)| *r < tolerance);
        Self { relations, passed, tolerance, group_order: None }
    }

    pub fn max_residual(&self) -> f64 {
        self.relations.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn merge(mut self, other: GroupCheckReport) -> Self {
        self.relations.extend(other.relations);
        self.passed = self.relations.iter().all(|(_, r)| *r < self.tolerance);
        self
    }

    /// True when the relations hold and the generated group has order 8.
    pub fn faithful_d4(&self) -> bool {
        self.passed && self.group_order == Some(8)
    }
}

/// Enumerates the matrix group generated by `gens`, up to `cap` elements.
pub fn generated_group_order(gens: &[&Array2<C64>], tol: f64, cap: usize) -> usize {
    let n = gens[0].nrows();
    let mut elems = vec![eye(n)];
    let mut frontier = vec![eye(n)];
    while let Some(g) = frontier.pop() {
        for h in gens {
            let p = g.dot(*h);
            if !elems.iter().any(|e| diff_norm(e, &p) < tol) {
                elems.push(p.clone());
                frontier.push(p);
                if elems.len() >= cap {
                    return elems.len();
                }
            }
        }
    }
    elems.len()
}

/// Checks `a⁴ = 1`, `b² = 1`, `ab = ba⁻¹` and counts the generated group.
pub fn verify_d4_presentation(a: &Array2<C64>, b: &Array2<C64>, tol: f64) -> GroupCheckReport {
    let n = a.nrows();
    let id = eye(n);
    let a_inv = dagger(a);
    let rel = vec![
        ("a^4 = 1".to_string(), diff_norm(&power(a, 4), &id)),
        ("b^2 = 1".to_string(), diff_norm(&power(b, 2), &id)),
        ("ab = ba^-1".to_string(), diff_norm(&a.dot(b), &b.dot(&a_inv))),
    ];
    let mut rep = GroupCheckReport::from_relations(rel, tol);
    rep.group_order = Some(generated_group_order(&[a, b], 1e-9, 64));
    rep
}

/// D4 relations plus the action on charge states: `a|n⟩ = (−1)^{n+1}|1 − n⟩`,
/// `b|n⟩ = |1 − n⟩`.
pub fn verify_d4_on_window(w: &ChargeWindow, tol: f64) -> Result<GroupCheckReport> {
    let a = d4_generator_a(w)?;
    let b = v_twisted_reflection(w)?;
    let mut rep = verify_d4_presentation(&a.matrix, &b.matrix, tol);
    let (mut ra, mut rb) = (0.0f64, 0.0f64);
    for (j, n) in w.charges().enumerate() {
        let i = w.index_of(1 - n).expect("closed window");
        let sign = if (n + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        for r in 0..w.len() {
            let ea = if r == i { c(sign) } else { c(0.0) };
            let eb = if r == i { c(1.0) } else { c(0.0) };
            ra = ra.max((a.matrix[[r, j]] - ea).norm());
            rb = rb.max((b.matrix[[r, j]] - eb).norm());
        }
    }
    rep.relations.push(("a|n> = (-1)^(n+1)|1-n>".into(), ra));
    rep.relations.push(("b|n> = |1-n>".into(), rb));
    rep.relations.push(("{U_pi, V_P} = 0".into(), check_anticommutation(&u_pi(w), &b)));
    rep.passed = rep.relations.iter().all(|(_, r)| *r < tol);
    Ok(rep)
}

/// `F(x) = e^{−2ix(n̂ − ½)}`.
pub fn pin2_f(x: f64, w: &ChargeWindow) -> Array2<C64> {
    let d: Vec<C64> = w.charges().map(|n| C64::from_polar(1.0, -2.0 * x * (n as f64 - 0.5))).collect();
    Array2::from_diag(&ndarray::Array1::from(d))
}

/// `E(x) = F(x)·iV_P`.
pub fn pin2_e(x: f64, w: &ChargeWindow) -> Result<Array2<C64>> {
    let v = v_twisted_reflection(w)?;
    Ok(pin2_f(x, w).dot(&v.matrix.mapv(|z| z * C64::i())))
}

/// Sample grid for the continuous family: eight uniform angles plus the
/// quarter turns.
pub fn pin2_default_samples() -> Vec<f64> {
    use std::f64::consts::PI;
    let mut v: Vec<f64> = (0..8).map(|k| 2.0 * PI * (k as f64 + 0.37) / 8.0).collect();
    v.extend([0.0, PI / 2.0, PI, 1.5 * PI]);
    v
}

/// All four composition laws on the sample grid and `E² = F(π)`, `E⁴ = 1`.
pub fn verify_pin2_table(xs: &[f64], ys: &[f64], w: &ChargeWindow, tol: f64) -> Result<GroupCheckReport> {
    use std::f64::consts::PI;
    let id = eye(w.len());
    let (mut ff, mut ee, mut ef, mut fe, mut e2, mut e4) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &x in xs {
        let fx = pin2_f(x, w);
        let ex = pin2_e(x, w)?;
        for &y in ys {
            let fy = pin2_f(y, w);
            let ey = pin2_e(y, w)?;
            ff = ff.max(diff_norm(&fx.dot(&fy), &pin2_f(x + y, w)));
            ee = ee.max(diff_norm(&ex.dot(&ey), &pin2_f(x - y + PI, w)));
            ef = ef.max(diff_norm(&ex.dot(&fy), &pin2_e(x - y, w)?));
            fe = fe.max(diff_norm(&fx.dot(&ey), &pin2_e(x + y, w)?));
        }
        let sq = ex.dot(&ex);
        e2 = e2.max(diff_norm(&sq, &pin2_f(PI, w)));
        e4 = e4.max(diff_norm(&sq.dot(&sq), &id));
    }
    let rel = vec![
        ("F(x)F(y) = F(x+y)".to_string(), ff),
        ("E(x)E(y) = F(x-y+pi)".to_string(), ee),
        ("E(x)F(y) = E(x-y)".to_string(), ef),
        ("F(x)E(y) = E(x+y)".to_string(), fe),
        ("E(x)^2 = F(pi)".to_string(), e2),
        ("E(x)^4 = 1".to_string(), e4),
    ];
    Ok(GroupCheckReport::from_relations(rel, tol))
}

/// Elements of ℤ₂×ℤ₂ in the order `e, a, b, ab`.
pub const KLEIN_LABELS: [&str; 4] = ["e", "a", "b", "ab"];

fn klein_mul(i: usize, j: usize) -> usize {
    i ^ j
}

fn pauli() -> (Array2<C64>, Array2<C64>, Array2<C64>) {
    let sx = ndarray::arr2(&[[c(0.0), c(1.0)], [c(1.0), c(0.0)]]);
    let sy = ndarray::arr2(&[[c(0.0), -C64::i()], [C64::i(), c(0.0)]]);
    let sz = ndarray::arr2(&[[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]);
    (sx, sy, sz)
}

/// Projective representation `a → σᶻ`, `b → σˣ`, `ab → σᶻσˣ`.
pub fn klein_projective_rep() -> [Array2<C64>; 4] {
    let (sx, _, sz) = pauli();
    [eye(2), sz.clone(), sx.clone(), sz.dot(&sx)]
}

#[derive(Clone, Debug)]
pub struct SchurTable {
    /// `phase[i][j]` with `L(g_i)L(g_j) = phase·L(g_i g_j)`.
    pub phase: [[C64; 4]; 4],
    /// Largest residual of `L(g_i)L(g_j) − phase·L(g_i g_j)`.
    pub factor_residual: f64,
    /// Largest violation of the multiplicative cocycle condition.
    pub cocycle_residual: f64,
}

pub fn schur_multiplier_table() -> SchurTable {
    let l = klein_projective_rep();
    let mut phase = [[c(0.0); 4]; 4];
    let mut factor_residual = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let p = l[i].dot(&l[j]);
            let k = klein_mul(i, j);
            let tr: C64 = (0..2).map(|r| (0..2).map(|s| l[k][[s, r]].conj() * p[[s, r]]).sum::<C64>()).sum();
            let ph = tr / 2.0;
            factor_residual = factor_residual.max(diff_norm(&p, &l[k].mapv(|z| z * ph)));
            phase[i][j] = ph;
        }
    }
    let mut cocycle_residual = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let lhs = phase[i][klein_mul(j, k)] * phase[j][k];
                let rhs = phase[klein_mul(i, j)][k] * phase[i][j];
                cocycle_residual = cocycle_residual.max((lhs - rhs).norm());
            }
        }
    }
    SchurTable { phase, factor_residual, cocycle_residual }
}

/// Quaternion lift `a = iσˣ`, `b = iσᶻ`: `a⁴ = 1`, `a² = b²`, `bab⁻¹ = a⁻¹`.
pub fn verify_q8_lift() -> GroupCheckReport {
    let (sx, _, sz) = pauli();
    let a = sx.mapv(|z| z * C64::i());
    let b = sz.mapv(|z| z * C64::i());
    let rel = vec![
        ("a^4 = 1".to_string(), diff_norm(&power(&a, 4), &eye(2))),
        ("a^2 = b^2".to_string(), diff_norm(&power(&a, 2), &power(&b, 2))),
        ("b a b^-1 = a^-1".to_string(), diff_norm(&b.dot(&a).dot(&dagger(&b)), &dagger(&a))),
    ];
    let mut rep = GroupCheckReport::from_relations(rel, GROUP_TOL);
    rep.group_order = Some(generated_group_order(&[&a, &b], 1e-9, 64));
    rep
}

/// Charge-basis indices of the even or odd `U_π` sector.
pub fn sector_split_indices(w: &ChargeWindow, s: Sector) -> Vec<usize> {
    let want = if s == Sector::Even { 0 } else { 1 };
    w.charges().enumerate().filter(|(_, n)| n.rem_euclid(2) == want).map(|(i, _)| i).collect()
}

/// Blocks of `h` on the +1 and −1 eigenspaces of a diagonal ±1 symmetry.
pub fn sector_split(h: &HermitianOperator, op: &SymmetryOperator) -> Result<(HermitianOperator, HermitianOperator)> {
    let n = op.dim();
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && op.matrix[[i, j]].norm() > 0.0 {
                return Err(Error::Invalid("sector split needs a diagonal symmetry".into()));
            }
        }
        let d = op.matrix[[i, i]];
        if (d - c(1.0)).norm() < 1e-14 {
            even.push(i);
        } else if (d + c(1.0)).norm() < 1e-14 {
            odd.push(i);
        } else {
            return Err(Error::Invalid("sector split needs eigenvalues ±1".into()));
        }
    }
    let r = op.commutator_with(h);
    if r >= 1e-12 {
        return Err(Error::SymmetryBroken(r));
    }
    Ok((h.restricted(&even)?, h.restricted(&odd)?))
}

/// Checks that `V_P e^{−iα(n̂−½)} V_P = e^{iα(n̂−½)}` for each α.
pub fn vp_conjugation_residual(alphas: &[f64], w: &ChargeWindow) -> Result<f64> {
    let v = v_twisted_reflection(w)?;
    let mut r = 0.0f64;
    for &a in alphas {
        let lhs = v.matrix.dot(&pin2_f(a / 2.0, w)).dot(&v.matrix);
        r = r.max(diff_norm(&lhs, &pin2_f(-a / 2.0, w)));
    }
    Ok(r)
}
