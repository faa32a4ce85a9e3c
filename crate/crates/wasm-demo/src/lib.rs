//! Browser bindings. Every export returns a JSON string for the page to parse.

use coalition_core::channel::CdmaMac;
use coalition_core::game::Coalition;
use coalition_core::pdf::{pdf_rate_region, weight_fan, RateRegionSamples, RegionConfig};
use coalition_core::rx::{mud_game, Detector};
use coalition_core::verify::{cluster_mac, mac_stable_structures};
use coalition_core::Result;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest side of the stability map.
pub const MAX_MAP_STEPS: usize = 41;
/// Largest PDF grid the page may ask for.
pub const MAX_PDF_GRID: usize = 40;

#[derive(Serialize, Debug)]
pub struct StabilityMap {
    pub axis: Vec<f64>,
    /// `cells[i][j]`: stable structures with user 0 at `axis[i]`, user 1 at `axis[j]`.
    pub cells: Vec<Vec<Vec<String>>>,
}

pub fn stability_map(user2_db: f64, lo: f64, hi: f64, steps: usize) -> Result<StabilityMap> {
    let steps = steps.clamp(2, MAX_MAP_STEPS);
    let axis: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let mut cells = Vec::with_capacity(steps);
    for &a in &axis {
        let mut row = Vec::with_capacity(steps);
        for &b in &axis {
            let found = mac_stable_structures(&[a, b, user2_db])?;
            row.push(found.iter().map(|c| c.to_string()).collect());
        }
        cells.push(row);
    }
    Ok(StabilityMap { axis, cells })
}

#[derive(Serialize, Debug)]
pub struct Regions {
    /// Boundary of the {0,1} region, ordered by weight angle.
    pub pair: Vec<[f64; 2]>,
    /// Boundary of the grand-coalition region projected on users 0 and 1.
    pub grand: Vec<[f64; 2]>,
}

fn project(r: &RateRegionSamples, dirs: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let at = |u: usize| r.members.iter().position(|&m| m == u).expect("user in region");
    let (i, j) = (at(0), at(1));
    dirs.iter()
        .filter_map(|w| {
            r.points
                .iter()
                .map(|p| [p[i], p[j]])
                .max_by(|p, q| (w[0] * p[0] + w[1] * p[1]).total_cmp(&(w[0] * q[0] + w[1] * q[1])))
        })
        .collect()
}

/// Clustered-fixture regions; `pc_fraction` pins the cooperative share of users 0 and 1 in the pair.
pub fn cluster_regions(grid: usize, pc_fraction: f64) -> Result<Regions> {
    let mac = cluster_mac()?;
    let grid = grid.clamp(2, MAX_PDF_GRID);
    let pc = mac.power(0) * pc_fraction.clamp(0.0, 1.0);
    let pair_cfg = RegionConfig::with_grid(grid).fix(0, pc).fix(1, pc);
    let pair = pdf_rate_region(&mac, Coalition::from_members(&[0, 1]), &pair_cfg)?;
    let grand = pdf_rate_region(&mac, Coalition::full(3), &RegionConfig::with_grid(grid))?;
    let dirs = weight_fan(2, 64);
    Ok(Regions {
        pair: project(&pair, &dirs),
        grand: project(&grand, &dirs),
    })
}

#[derive(Serialize, Debug)]
pub struct MudSweep {
    pub sigma2: Vec<f64>,
    /// Per detector: user 0 rate alone, user 0 rate in the pair, whether the pair is stable.
    pub mmse: Vec<(f64, f64, bool)>,
    pub decorrelator: Vec<(f64, f64, bool)>,
}

/// Two-user CDMA sweep of the noise variance over `[10^lo_exp, 10^hi_exp]`.
pub fn mud_sweep(h: [f64; 2], power: f64, rho: f64, lo_exp: f64, hi_exp: f64, steps: usize) -> Result<MudSweep> {
    let steps = steps.clamp(2, 200);
    let sigma2: Vec<f64> = (0..steps)
        .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (steps - 1) as f64))
        .collect();
    let (alone, pair) = (Coalition::from_members(&[0]), Coalition::full(2));
    let mut out = MudSweep { sigma2: sigma2.clone(), mmse: vec![], decorrelator: vec![] };
    for &s2 in &sigma2 {
        let c = CdmaMac::new(h.to_vec(), power, rho, s2)?;
        for (det, dst) in [(Detector::Mmse, &mut out.mmse), (Detector::Decorrelator, &mut out.decorrelator)] {
            let g = mud_game(&c, det)?;
            let rate = |s| g.payoff(s, 0).expect("user 0 is a member");
            dst.push((rate(alone), rate(pair), g.gc_stable().holds()));
        }
    }
    Ok(out)
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = stabilityMap)]
pub fn stability_map_js(user2_db: f64, lo: f64, hi: f64, steps: usize) -> std::result::Result<String, JsError> {
    to_js(stability_map(user2_db, lo, hi, steps))
}

#[wasm_bindgen(js_name = clusterRegions)]
pub fn cluster_regions_js(grid: usize, pc_fraction: f64) -> std::result::Result<String, JsError> {
    to_js(cluster_regions(grid, pc_fraction))
}

#[wasm_bindgen(js_name = mudSweep)]
pub fn mud_sweep_js(
    h0: f64,
    h1: f64,
    power: f64,
    rho: f64,
    lo_exp: f64,
    hi_exp: f64,
    steps: usize,
) -> std::result::Result<String, JsError> {
    to_js(mud_sweep([h0, h1], power, rho, lo_exp, hi_exp, steps))
}
