use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use zeropi_core::circuit::{converge_zeropi, zeropi_symmetry_suite, FockTruncation, ZeroPiParams};
use zeropi_core::ring::{ChargeWindow, RingParams};
use zeropi_core::semiclassics::*;
use zeropi_core::spectral::{blas_self_test, pair_degeneracies};
use zeropi_core::sw::{hpert_asymptotic, order2_closed_form, order3_weight_hypergeometric, sw_order2, sw_order3, SwConfig};
use zeropi_core::symmetry::{
    pin2_default_samples, schur_multiplier_table, verify_d4_on_window, verify_pin2_table, verify_q8_lift, GroupCheckReport,
    KLEIN_LABELS,
};
use zeropi_core::Error;

use crate::sweep::fmt_num;

/// Outcome of a report: printable text plus a machine-readable table.
#[derive(Serialize)]
pub struct Report {
    pub kind: String,
    pub passed: bool,
    pub rows: Vec<BTreeMap<String, serde_json::Value>>,
    #[serde(skip)]
    pub text: String,
}

impl Report {
    fn new(kind: &str) -> Self {
        Self { kind: kind.into(), passed: true, rows: Vec::new(), text: String::new() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn row(&mut self, kv: Vec<(&str, serde_json::Value)>) {
        self.rows.push(kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect());
    }

    fn check(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        self.passed &= ok;
        self.line(format!("{:<44} {:>24}  <= {:e}  {}", name, fmt_num(value), limit, if ok { "PASS" } else { "FAIL" }));
        self.row(vec![("check", name.into()), ("value", value.into()), ("limit", limit.into()), ("passed", ok.into())]);
    }

    fn group(&mut self, title: &str, rep: &GroupCheckReport) {
        self.line(format!("{title} (tolerance {:e})", rep.tolerance));
        for (label, r) in &rep.relations {
            let ok = *r < rep.tolerance;
            self.line(format!("  {:<40} {:>24}  {}", label, fmt_num(*r), if ok { "PASS" } else { "FAIL" }));
            self.row(vec![("group", title.into()), ("relation", label.as_str().into()), ("residual", (*r).into()), ("passed", ok.into())]);
        }
        if let Some(n) = rep.group_order {
            self.line(format!("  generated group order {n}"));
        }
        self.passed &= rep.passed;
    }

    fn finish(mut self) -> Self {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        self.line(format!("{} report: {verdict}", self.kind));
        self
    }
}

pub type Params = BTreeMap<String, f64>;

fn get(p: &Params, k: &str, default: f64) -> f64 {
    p.get(k).copied().unwrap_or(default)
}

fn check_keys(p: &Params, allowed: &[&str]) -> Result<(), Error> {
    for k in p.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Invalid(format!("unknown report parameter `{k}` (allowed: {})", allowed.join(", "))));
        }
    }
    Ok(())
}

fn zeropi_params(p: &Params, defaults: [f64; 6]) -> Result<ZeroPiParams, Error> {
    ZeroPiParams::new(
        get(p, "e_cj", defaults[0]),
        get(p, "e_cs", defaults[1]),
        get(p, "e_l", defaults[2]),
        get(p, "e_j", defaults[3]),
        get(p, "n_g", defaults[4]),
        get(p, "varphi_ext", defaults[5]),
    )
}

const ZP_KEYS: [&str; 6] = ["e_cj", "e_cs", "e_l", "e_j", "n_g", "varphi_ext"];

/// Symmetry suite of the circuit at a control point, plus the abstract
/// group checks on a charge window.
pub fn symmetry(p: &Params) -> Result<Report, Error> {
    let allowed: Vec<&str> = ZP_KEYS.iter().copied().chain(["fock", "half_width"]).collect();
    check_keys(p, &allowed)?;
    let zp = zeropi_params(p, [1.0, 1.0, 1.0, 1.0, 0.5, PI])?;
    let t = FockTruncation::new(get(p, "fock", 30.0) as usize)?;
    let w = ChargeWindow::for_offset(zp.n_g, get(p, "half_width", 6.0) as u32);
    let mut r = Report::new("symmetry");
    r.line(format!(
        "0-pi circuit at (n_g, phi_ext) = ({}, {}), Fock {}, charges [{}, {}]",
        zp.n_g,
        zp.varphi_ext,
        t.n_max(),
        w.n_lo(),
        w.n_hi()
    ));
    let suite = zeropi_symmetry_suite(&zp, &t, &w)?;
    r.group("circuit symmetries", &suite);
    let wh = ChargeWindow::about_half(4);
    r.group("D4 on charges [-3, 4]", &verify_d4_on_window(&wh, 1e-12)?);
    let xs = pin2_default_samples();
    r.group("Pin(2) composition table", &verify_pin2_table(&xs, &xs, &wh, 1e-12)?);
    r.group("Q8 lift", &verify_q8_lift());
    let s = schur_multiplier_table();
    r.line("Schur multiplier phases L(g)L(h) = c(g,h) L(gh)");
    for i in 0..4 {
        let cells: Vec<String> = (0..4).map(|j| format!("{:>3}", s.phase[i][j].re.round() as i64)).collect();
        r.line(format!("  {:<3}{}", KLEIN_LABELS[i], cells.join("")));
    }
    r.check("Schur factor residual", s.factor_residual, 1e-12);
    r.check("Schur cocycle residual", s.cocycle_residual, 1e-12);
    Ok(r.finish())
}

/// Sum/closed-form consistency of the second- and third-order effective
/// coefficients.
pub fn swcheck(p: &Params) -> Result<Report, Error> {
    check_keys(p, &ZP_KEYS)?;
    let zp = zeropi_params(p, [1.0, 1.0 / 20.0, 1.0 / 16.0, 0.2, 0.5, PI])?;
    let cfg = SwConfig::for_params(&zp);
    let mut r = Report::new("swcheck");
    r.line(format!(
        "E_CJ = {}, E_Cs = {}, E_L = {}, E_J = {}, (n_g, phi_ext) = ({}, {})",
        zp.e_cj, zp.e_cs, zp.e_l, zp.e_j, zp.n_g, zp.varphi_ext
    ));
    if zp.e_j == 0.0 {
        r.line("E_J = 0: all coupling terms vanish");
        return Ok(r.finish());
    }
    let o2 = sw_order2(&zp, &cfg)?;
    let closed = order2_closed_form(&zp)?;
    r.line(format!("order-2 cos^2 coefficient: sum {}, closed form {}", fmt_num(o2.c_cos2sq), fmt_num(closed)));
    r.check("order-2 sum vs closed form (relative)", ((o2.c_cos2sq - closed) / closed).abs(), 1e-8);
    let o3 = sw_order3(&zp, &cfg)?;
    let hyp = 16.0 * zp.e_cs * zp.e_j * zp.e_j / (zp.omega() * zp.omega()) * order3_weight_hypergeometric(&zp, 1e-16)?;
    r.line(format!("order-3 sin^2 coefficient: sum {}, hypergeometric {}", fmt_num(o3.c_sin2sq), fmt_num(hyp)));
    r.check("order-3 sum vs hypergeometric (relative)", ((o3.c_sin2sq - hyp) / hyp).abs(), 1e-8);
    r.line(format!("order-3 cos^3 coefficient {}", fmt_num(o3.c_cos3cu)));
    if let Ok(a) = hpert_asymptotic(&zp) {
        r.line("large E_CJ/E_L asymptote (informational):");
        r.line(format!("  cos^2: {} (sum/asymptote {:.6})", fmt_num(a.c_cos2sq), o2.c_cos2sq / a.c_cos2sq));
        r.line(format!("  sin^2: {} (sum/asymptote {:.6})", fmt_num(a.c_sin2sq), o3.c_sin2sq / a.c_sin2sq));
        r.row(vec![
            ("asymptote_cos2", a.c_cos2sq.into()),
            ("asymptote_sin2", a.c_sin2sq.into()),
            ("sum_cos2", o2.c_cos2sq.into()),
            ("sum_sin2", o3.c_sin2sq.into()),
        ]);
    }
    Ok(r.finish())
}

/// Winding sums against the closed form, and gap slopes of the cos 2θ ring.
pub fn semiclassics(p: &Params) -> Result<Report, Error> {
    check_keys(p, &["e_cs"])?;
    let e_cs = get(p, "e_cs", 1.0);
    if !(e_cs > 0.0) {
        return Err(Error::Invalid("e_cs must be positive".into()));
    }
    let mut r = Report::new("semiclassics");
    r.line(format!("{:>6} {:>6} {:>4} {:>24} {:>24} {:>12} {:>12}", "R", "n_g", "N", "partial sum", "closed form", "|diff|", "tail bound"));
    for rr in [0.5, 1.0, 2.0] {
        for n_g in [0.0, 0.25, 0.4, 0.5] {
            let closed = winding_amplitude(rr, n_g)?;
            for n in [0u32, 1, 5, 10, 50] {
                let s = winding_partial_sum(rr, n_g, n);
                let d = (s - closed).abs();
                let bound = winding_tail_bound(rr, n);
                let ok = d <= bound * (1.0 + 1e-12) + 8.0 * f64::EPSILON * closed.abs().max(1.0) && (n < 50 || d < 1e-12);
                r.passed &= ok;
                r.line(format!(
                    "{rr:>6} {n_g:>6} {n:>4} {:>24} {:>24} {d:>12.3e} {bound:>12.3e}{}",
                    fmt_num(s),
                    fmt_num(closed),
                    if ok { "" } else { "  FAIL" }
                ));
                r.row(vec![
                    ("R", rr.into()),
                    ("n_g", n_g.into()),
                    ("N", n.into()),
                    ("partial_sum", s.into()),
                    ("closed_form", closed.into()),
                    ("tail_bound", bound.into()),
                ]);
            }
        }
    }
    r.line(format!("gap slope at n_g = 1/2, E_Cs = {e_cs}"));
    r.line(format!("{:>8} {:>24} {:>24} {:>24} {:>12}", "lambda", "finite difference", "Feynman-Hellmann", "semiclassical", "sc/numeric"));
    for lam in [10.0, 50.0, 100.0, 200.0] {
        let rp = RingParams::cos2(e_cs, 0.5, lam * e_cs)?;
        let num = gap_slope_numeric(&rp, 1e-4)?;
        let fh = gap_slope_feynman_hellmann(&rp)?;
        let sc = gap_slope_semiclassical(lam * e_cs, e_cs);
        let ok = ((num - fh) / num).abs() < 1e-2;
        r.passed &= ok;
        r.line(format!(
            "{:>8} {:>24} {:>24} {:>24} {:>12.4e}{}",
            lam * e_cs,
            fmt_num(num),
            fmt_num(fh),
            fmt_num(sc),
            sc / num,
            if ok { "" } else { "  FAIL" }
        ));
        r.row(vec![("lambda", (lam * e_cs).into()), ("numeric", num.into()), ("feynman_hellmann", fh.into()), ("semiclassical", sc.into())]);
    }
    Ok(r.finish())
}

/// Runs the invariant suite: BLAS sanity, symmetry at the four control
/// points, effective-model consistency, semiclassics and two spectra.
pub fn selfcheck() -> Result<Report, Error> {
    let mut r = Report::new("selfcheck");
    r.check("linked BLAS product and eigensolver", blas_self_test(256), 1e-12);
    for (n_g, phi) in [(0.0, 0.0), (0.5, 0.0), (0.0, PI), (0.5, PI)] {
        let mut p = Params::new();
        p.insert("n_g".into(), n_g);
        p.insert("varphi_ext".into(), phi);
        p.insert("fock".into(), 20.0);
        let s = symmetry(&p)?;
        r.check(&format!("symmetry suite at ({n_g}, {phi:.4})"), if s.passed { 0.0 } else { 1.0 }, 0.0);
    }
    let sw = swcheck(&Params::new())?;
    r.check("effective-model consistency", if sw.passed { 0.0 } else { 1.0 }, 0.0);
    let sc = semiclassics(&Params::new())?;
    r.check("winding sums and gap slopes", if sc.passed { 0.0 } else { 1.0 }, 0.0);

    let zp = ZeroPiParams::new(1.0, 1.0 / 20.0, 1.0 / 16.0, 0.0, 0.5, PI)?;
    let s = converge_zeropi(&zp, 12, 1e-11, 120)?;
    let expect = [0.3, 0.3, 0.7, 0.7, 0.8, 0.8, 1.2, 1.2, 1.3, 1.3, 1.5, 1.5];
    let d = s.eigenvalues.iter().zip(expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    r.check("decoupled spectrum at Fig. 2 scales", d, 1e-9);
    let zp = ZeroPiParams::new(1.0, 1.0, 1.0, 1.0, 0.5, PI)?;
    let s = converge_zeropi(&zp, 12, 1e-8, 120)?;
    r.check("doublet splitting at (1/2, pi), E_J = 1", pair_degeneracies(&s, 1e-7)?.max_splitting, 1e-7);
    Ok(r.finish())
}
