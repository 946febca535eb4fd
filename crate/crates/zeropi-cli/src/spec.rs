use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use zeropi_core::circuit::{UnbalanceParams, ZeroPiParams};
use zeropi_core::ring::RingParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Ring,
    Zeropi,
    ZeropiUnbalanced,
    SwEffective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute eigenvalue drift between successive truncations.
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Truncation cap: Fock cutoff for the circuit models, charge
    /// half-width for the ring-based ones.
    #[serde(default = "default_max_size")]
    pub max_size: usize,
}

fn default_abs_tol() -> f64 {
    1e-8
}

fn default_max_size() -> usize {
    120
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs_tol: default_abs_tol(), max_size: default_max_size() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: Model,
    pub fixed: BTreeMap<String, f64>,
    pub axis: Axis,
    pub count: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Model parameters at one grid point.
#[derive(Clone, Debug)]
pub enum PointParams {
    Ring(RingParams),
    Zeropi(ZeroPiParams),
    Unbalanced(ZeroPiParams, UnbalanceParams, usize),
    SwEffective(ZeroPiParams),
}

const ZEROPI_KEYS: [&str; 6] = ["e_cj", "e_cs", "e_l", "e_j", "n_g", "varphi_ext"];
const UNBALANCE_KEYS: [&str; 6] = ["d_c", "d_cj", "d_ej", "d_l", "e_c", "fock_xi"];
const RING_KEYS: [&str; 11] = ["e_cs", "n_g", "offset", "v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8"];

impl Model {
    fn allowed(&self) -> Vec<&'static str> {
        match self {
            Model::Ring => RING_KEYS.to_vec(),
            Model::Zeropi | Model::SwEffective => ZEROPI_KEYS.to_vec(),
            Model::ZeropiUnbalanced => ZEROPI_KEYS.iter().chain(UNBALANCE_KEYS.iter()).copied().collect(),
        }
    }
}

fn need(m: &BTreeMap<String, f64>, k: &str) -> Result<f64, String> {
    m.get(k).copied().ok_or_else(|| format!("missing parameter `{k}`"))
}

fn zeropi_from(m: &BTreeMap<String, f64>) -> Result<ZeroPiParams, String> {
    let v: Vec<f64> = ZEROPI_KEYS.iter().map(|k| need(m, k)).collect::<Result<_, _>>()?;
    ZeroPiParams::new(v[0], v[1], v[2], v[3], v[4], v[5]).map_err(|e| e.to_string())
}

impl SweepSpec {
    /// Structural checks plus parameter validation at every grid point.
    pub fn validate(&self) -> Result<Vec<PointParams>, String> {
        if self.count == 0 {
            return Err("count must be at least 1".into());
        }
        if self.fixed.contains_key(&self.axis.name) {
            return Err(format!("axis parameter `{}` also appears in `fixed`", self.axis.name));
        }
        if self.axis.grid.iter().any(|x| !x.is_finite()) {
            return Err("grid values must be finite".into());
        }
        if self.axis.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err("grid must be strictly increasing".into());
        }
        if !(self.tolerances.abs_tol > 0.0) {
            return Err("tolerances.abs_tol must be positive".into());
        }
        let allowed = self.model.allowed();
        for k in self.fixed.keys().chain(std::iter::once(&self.axis.name)) {
            if !allowed.contains(&k.as_str()) {
                return Err(format!("unknown parameter `{k}` for this model (allowed: {})", allowed.join(", ")));
            }
        }
        self.axis.grid.iter().map(|&x| self.point(x)).collect()
    }

    pub fn point(&self, x: f64) -> Result<PointParams, String> {
        let mut m = self.fixed.clone();
        m.insert(self.axis.name.clone(), x);
        Ok(match self.model {
            Model::Ring => {
                let mut pot = Vec::new();
                for k in 1..=8u32 {
                    if let Some(&v) = m.get(&format!("v{k}")) {
                        if v != 0.0 {
                            pot.push((k, v));
                        }
                    }
                }
                let off = m.get("offset").copied().unwrap_or(0.0);
                PointParams::Ring(RingParams::new(need(&m, "e_cs")?, need(&m, "n_g")?, pot, off).map_err(|e| e.to_string())?)
            }
            Model::Zeropi => PointParams::Zeropi(zeropi_from(&m)?),
            Model::SwEffective => PointParams::SwEffective(zeropi_from(&m)?),
            Model::ZeropiUnbalanced => {
                let p = zeropi_from(&m)?;
                let g = |k: &str| m.get(k).copied().unwrap_or(0.0);
                let u = UnbalanceParams { d_c: g("d_c"), d_cj: g("d_cj"), d_ej: g("d_ej"), d_l: g("d_l"), e_c: need(&m, "e_c")? };
                u.validate().map_err(|e| e.to_string())?;
                let fx = m.get("fock_xi").copied().unwrap_or(6.0);
                if !(fx >= 1.0 && fx.fract() == 0.0) {
                    return Err(format!("fock_xi must be a positive integer, got {fx}"));
                }
                PointParams::Unbalanced(p, u, fx as usize)
            }
        })
    }
}

/// `num` points from `start` to `stop`, both included.
pub fn linspace(start: f64, stop: f64, num: usize) -> Vec<f64> {
    match num {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..num).map(|k| start + (stop - start) * k as f64 / (num - 1) as f64).collect(),
    }
}

/// `num` points on `[start, stop)`.
fn half_open(start: f64, stop: f64, num: usize) -> Vec<f64> {
    (0..num).map(|k| start + (stop - start) * k as f64 / num as f64).collect()
}

/// Parses `a,b,c` or `start:stop:num` (endpoints included). An empty string
/// is the empty grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid range must be start:stop:num, got `{s}`"));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| format!("bad grid start `{}`", parts[0]))?;
        let b: f64 = parts[1].trim().parse().map_err(|_| format!("bad grid stop `{}`", parts[1]))?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad grid count `{}`", parts[2]))?;
        return Ok(linspace(a, b, n));
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad grid value `{t}`"))).collect()
}

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub const NAMED_SPECS: [&str; 6] = ["fig1b", "fig2", "fig3a", "fig3b", "fig3c", "fig3d"];

/// Built-in specs reproducing the figure data.
pub fn named_spec(name: &str) -> Option<SweepSpec> {
    let unit = [("e_cj", 1.0), ("e_cs", 1.0), ("e_l", 1.0)];
    let kinetic = [("e_cj", 1.0), ("e_cs", 1.0 / 20.0), ("e_l", 1.0 / 16.0)];
    let fig3_note = "offset-charge sweeps use [0, 1) and flux sweeps [0, 2pi) on uniform grids without the right endpoint, which is equivalent to the left one".to_string();
    let spec = |fixed: Vec<(&str, f64)>, axis: &str, grid: Vec<f64>, count: usize, notes: Vec<String>| SweepSpec {
        name: Some(name.to_string()),
        model: Model::Zeropi,
        fixed: params(&fixed),
        axis: Axis { name: axis.to_string(), grid },
        count,
        tolerances: Tolerances::default(),
        output_path: None,
        notes,
    };
    let with = |base: &[(&'static str, f64)], extra: &[(&'static str, f64)]| -> Vec<(&'static str, f64)> {
        base.iter().chain(extra.iter()).copied().collect()
    };
    Some(match name {
        "fig1b" => spec(with(&unit, &[("n_g", 0.5), ("varphi_ext", PI)]), "e_j", linspace(0.0, 3.0, 31), 12, vec![]),
        "fig2" => spec(
            with(&kinetic, &[("n_g", 0.5), ("varphi_ext", PI)]),
            "e_j",
            linspace(0.0, 0.4, 21),
            12,
            vec!["E_J range 0..0.4 chosen for the figure; energies in units of E_CJ".into()],
        ),
        "fig3a" => spec(with(&unit, &[("e_j", 1.0), ("varphi_ext", PI)]), "n_g", half_open(0.0, 1.0, 50), 4, vec![fig3_note]),
        "fig3b" => spec(with(&unit, &[("e_j", 1.0), ("n_g", 0.5)]), "varphi_ext", half_open(0.0, 2.0 * PI, 50), 4, vec![fig3_note]),
        "fig3c" => spec(with(&kinetic, &[("e_j", 0.2), ("varphi_ext", PI)]), "n_g", half_open(0.0, 1.0, 50), 4, vec![fig3_note]),
        "fig3d" => spec(with(&kinetic, &[("e_j", 0.2), ("n_g", 0.5)]), "varphi_ext", half_open(0.0, 2.0 * PI, 50), 4, vec![fig3_note]),
        _ => return None,
    })
}
