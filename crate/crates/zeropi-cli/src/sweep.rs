use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use zeropi_core::circuit::{build_unbalanced_hamiltonian, converge_zeropi, zeropi_base_truncation, zeropi_truncation, FockTruncation};
use zeropi_core::ring::{build_ring_hamiltonian, suggested_half_width, ChargeWindow, RingParams};
use zeropi_core::spectral::{converge_spectrum, ConvergenceConfig, Spectrum};
use zeropi_core::sw::{effective_to_ring, sw_effective, SwConfig};
use zeropi_core::Error;

use crate::spec::{PointParams, SweepSpec, Tolerances};

#[derive(Clone, Debug)]
pub struct Row {
    pub axis: f64,
    pub eigenvalues: Vec<f64>,
    pub max_split: f64,
    pub conv_est: f64,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct FailedPoint {
    pub axis: f64,
    pub error: String,
}

fn converge_ring(p: &RingParams, count: usize, tol: &Tolerances) -> Result<Spectrum, Error> {
    let start = suggested_half_width(p) as usize;
    let cfg = ConvergenceConfig::new(start, tol.abs_tol, tol.max_size.max(start + 1));
    converge_spectrum(|h| Ok(build_ring_hamiltonian(p, &ChargeWindow::for_offset(p.n_g, h as u32))), count, &cfg)
}

fn solve(pp: &PointParams, count: usize, tol: &Tolerances) -> Result<Spectrum, Error> {
    match pp {
        PointParams::Ring(p) => converge_ring(p, count, tol),
        PointParams::Zeropi(p) => converge_zeropi(p, count, tol.abs_tol, tol.max_size),
        PointParams::SwEffective(p) => {
            let ep = sw_effective(p, &SwConfig::for_params(p))?;
            converge_ring(&effective_to_ring(&ep, p)?, count, tol)
        }
        PointParams::Unbalanced(p, u, fock_xi) => {
            let (f0, _) = zeropi_base_truncation(p);
            let t_xi = FockTruncation::new(*fock_xi)?;
            let cfg = ConvergenceConfig::new(f0, tol.abs_tol, tol.max_size.max(f0 + 1));
            converge_spectrum(
                |k| {
                    let (t, w) = zeropi_truncation(p, k);
                    build_unbalanced_hamiltonian(p, u, &t, &t_xi, &w)
                },
                count,
                &cfg,
            )
        }
    }
}

fn max_split(ev: &[f64]) -> f64 {
    ev.chunks_exact(2).map(|c| (c[1] - c[0]).abs()).fold(0.0, f64::max)
}

pub fn run_point(axis: f64, pp: &PointParams, count: usize, tol: &Tolerances) -> Row {
    match solve(pp, count, tol) {
        Ok(s) => Row {
            axis,
            max_split: max_split(&s.eigenvalues),
            conv_est: s.max_drift(),
            eigenvalues: s.eigenvalues,
            error: None,
        },
        Err(Error::NotConverged { drift, eigenvalues, size }) => {
            let mut ev = eigenvalues;
            ev.resize(count, f64::NAN);
            Row {
                axis,
                max_split: max_split(&ev),
                conv_est: drift.iter().cloned().fold(f64::NAN, f64::max),
                eigenvalues: ev,
                error: Some(format!("not converged at truncation size {size}")),
            }
        }
        Err(e) => Row { axis, eigenvalues: vec![f64::NAN; count], max_split: f64::NAN, conv_est: f64::NAN, error: Some(e.to_string()) },
    }
}

/// Runs every grid point; rows come back in grid order whatever the
/// thread count.
pub fn run_sweep(spec: &SweepSpec, points: &[PointParams], threads: usize) -> Vec<Row> {
    let work = || -> Vec<Row> {
        spec.axis
            .grid
            .par_iter()
            .zip(points.par_iter())
            .map(|(&x, pp)| run_point(x, pp, spec.count, &spec.tolerances))
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

/// `{:.16e}`: 17 significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn to_csv(rows: &[Row], count: usize) -> String {
    let mut out = String::from("axis");
    for k in 0..count {
        write!(out, ",E_{k}").unwrap();
    }
    out.push_str(",max_split,conv_est\n");
    for r in rows {
        out.push_str(&fmt_num(r.axis));
        for e in &r.eigenvalues {
            out.push(',');
            out.push_str(&fmt_num(*e));
        }
        write!(out, ",{},{}\n", fmt_num(r.max_split), fmt_num(r.conv_est)).unwrap();
    }
    out
}

#[derive(Serialize)]
pub struct Sidecar<'a> {
    pub spec: &'a SweepSpec,
    pub library: &'static str,
    pub version: &'static str,
    pub rows: usize,
    pub failed_points: Vec<FailedPoint>,
}

pub fn sidecar<'a>(spec: &'a SweepSpec, rows: &[Row]) -> Sidecar<'a> {
    Sidecar {
        spec,
        library: "zeropi-core",
        version: zeropi_core::VERSION,
        rows: rows.len(),
        failed_points: rows
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| FailedPoint { axis: r.axis, error: e.clone() }))
            .collect(),
    }
}
