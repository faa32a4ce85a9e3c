use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{check_coalition, cooperative_constraints, PdfPowerSplit};
use crate::channel::ClusteredMac;
use crate::error::{Error, Result};
use crate::game::simplex::{LinearProgram, Relation};
use crate::game::Coalition;

/// Largest coalition whose split space is gridded.
pub const MAX_REGION_S: usize = 3;

/// Relative jump between consecutive boundary samples that counts as coarse.
pub const COARSE_JUMP: f64 = 0.05;

const CONTAIN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RegionConfig {
    /// Grid points per cooperative-power axis, endpoints included.
    pub grid: usize,
    /// Users whose cooperative power is pinned instead of gridded.
    pub fixed_pc: BTreeMap<usize, f64>,
    /// Minimum number of weight directions.
    pub directions: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            grid: 40,
            fixed_pc: BTreeMap::new(),
            directions: 64,
        }
    }
}

impl RegionConfig {
    pub fn with_grid(grid: usize) -> Self {
        RegionConfig {
            grid,
            ..RegionConfig::default()
        }
    }

    pub fn fix(mut self, user: usize, pc: f64) -> Self {
        self.fixed_pc.insert(user, pc);
        self
    }
}

/// Sampled boundary of a coalition's rate region. Rate vectors are ordered
/// like `members`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateRegionSamples {
    pub members: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    pub boundary: Vec<(Vec<f64>, Vec<f64>)>,
    /// Neighbouring boundary samples further apart than [`COARSE_JUMP`].
    pub coarse_jumps: usize,
}

impl RateRegionSamples {
    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn grid_too_coarse(&self) -> bool {
        self.coarse_jumps > 0
    }

    /// Largest weighted sum over the sampled boundary.
    pub fn support(&self, w: &[f64]) -> f64 {
        self.points
            .iter()
            .chain(self.boundary.iter().map(|(_, r)| r))
            .map(|r| dot(w, r))
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let head: Vec<String> = self
            .members
            .iter()
            .map(|k| format!("w{k}"))
            .chain(self.members.iter().map(|k| format!("r{k}")))
            .collect();
        writeln!(out, "{}", head.join(",")).unwrap();
        for (w, r) in &self.boundary {
            let row: Vec<String> = w.iter().chain(r).map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    /// Parses [`to_csv`](Self::to_csv) output; `points` are rebuilt from the
    /// boundary rates.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let cols: Vec<&str> = head.split(',').map(str::trim).collect();
        if cols.len() % 2 != 0 || cols.is_empty() {
            return Err(Error::Schema(format!("bad CSV header '{head}'")));
        }
        let d = cols.len() / 2;
        let members = cols[..d]
            .iter()
            .map(|c| {
                c.strip_prefix('w')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| Error::Schema(format!("bad weight column '{c}'")))
            })
            .collect::<Result<Vec<usize>>>()?;
        let mut boundary = Vec::new();
        for line in lines {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{v}': {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != 2 * d {
                return Err(Error::Schema(format!("row '{line}' has {} columns", vals.len())));
            }
            boundary.push((vals[..d].to_vec(), vals[d..].to_vec()));
        }
        let mut s = RateRegionSamples {
            members,
            points: Vec::new(),
            boundary,
            coarse_jumps: 0,
        };
        s.points = distinct_points(&s.boundary, d);
        s.coarse_jumps = count_coarse(&s.boundary);
        Ok(s)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nonnegative weight vectors on the simplex lattice `{i / n}`, with `n` the
/// smallest lattice order giving at least `min_count` points.
pub fn weight_fan(dim: usize, min_count: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    if dim == 1 {
        return vec![vec![1.0]];
    }
    let mut n = 1;
    while lattice_size(n, dim) < min_count as u64 {
        n += 1;
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; dim];
    fill_lattice(n, 0, &mut cur, &mut out);
    out.into_iter()
        .map(|c| c.iter().map(|&v| v as f64 / n as f64).collect())
        .collect()
}

fn lattice_size(n: usize, dim: usize) -> u64 {
    // C(n + dim - 1, dim - 1)
    let mut c = 1u64;
    for i in 1..dim as u64 {
        c = c * (n as u64 + i) / i;
    }
    c
}

fn fill_lattice(left: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        fill_lattice(left - v, pos + 1, cur, out);
    }
}

/// Vertices of `{R >= 0 : sum_{i in G} R_i <= b_G}` in `dim <= 3` by
/// solving every choice of `dim` tight constraints.
pub(crate) fn polytope_vertices(dim: usize, rows: &[(Vec<f64>, f64)]) -> Vec<Vec<f64>> {
    let mut all: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for j in 0..dim {
        let mut a = vec![0.0; dim];
        a[j] = -1.0;
        all.push((a, 0.0));
    }
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut pick = vec![0usize; dim];
    combos(all.len(), dim, 0, 0, &mut pick, &mut |idx| {
        let Some(x) = solve_small(idx.iter().map(|&i| &all[i]).collect()) else {
            return;
        };
        let feasible = all.iter().all(|(a, b)| dot(a, &x) <= b + 1e-10 * (1.0 + b.abs()));
        if feasible {
            let x: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
            if !verts.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12)) {
                verts.push(x);
            }
        }
    });
    verts
}

fn combos(n: usize, k: usize, start: usize, depth: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if depth == k {
        f(pick);
        return;
    }
    for i in start..n {
        pick[depth] = i;
        combos(n, k, i + 1, depth + 1, pick, f);
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_small(rows: Vec<&(Vec<f64>, f64)>) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|(a, b)| a.iter().copied().chain([*b]).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                if f != 0.0 {
                    for j in c..=n {
                        m[r][j] -= f * m[c][j];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Constraint rows over member ranks.
pub(crate) fn rank_rows(s: Coalition, cons: &[(Coalition, f64)]) -> Vec<(Vec<f64>, f64)> {
    let members = s.members();
    cons.iter()
        .map(|&(g, b)| {
            let a = members.iter().map(|&k| if g.contains(k) { 1.0 } else { 0.0 }).collect();
            (a, b)
        })
        .collect()
}

/// Samples the region of `s` with no direct streams: every gridded split
/// gives a polytope, and the boundary keeps, per weight direction, the best
/// vertex over all of them.
pub fn pdf_rate_region(
    mac: &ClusteredMac,
    s: Coalition,
    cfg: &RegionConfig,
) -> Result<RateRegionSamples> {
    check_coalition(mac, s)?;
    if s.len() > MAX_REGION_S {
        return Err(Error::KTooLarge {
            k: s.len(),
            max: MAX_REGION_S,
        });
    }
    if cfg.grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points per axis".into()));
    }
    let members = s.members();
    let d = members.len();
    let axes: Vec<Vec<f64>> = members
        .iter()
        .map(|&k| {
            let p = mac.power(k);
            if d == 1 {
                // no partner to decode a cooperative stream
                return Ok(vec![0.0]);
            }
            match cfg.fixed_pc.get(&k) {
                Some(&pc) if (0.0..=p).contains(&pc) => Ok(vec![pc]),
                Some(&pc) => Err(Error::InvalidArgument(format!(
                    "fixed p_c = {pc} for user {k} outside [0, {p}]"
                ))),
                None => Ok((0..cfg.grid)
                    .map(|i| p * i as f64 / (cfg.grid - 1) as f64)
                    .collect()),
            }
        })
        .collect::<Result<_>>()?;
    let fan = weight_fan(d, cfg.directions);
    let mut best: Vec<(f64, Vec<f64>)> = vec![(0.0, vec![0.0; d]); fan.len()];
    let mut idx = vec![0usize; d];
    loop {
        let pc: Vec<f64> = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        let split = PdfPowerSplit::cooperative(mac, s, pc)?;
        let rows = rank_rows(s, &cooperative_constraints(mac, &split)?);
        for v in polytope_vertices(d, &rows) {
            for (w, slot) in fan.iter().zip(best.iter_mut()) {
                let val = dot(w, &v);
                if val > slot.0 + 1e-15 {
                    *slot = (val, v.clone());
                }
            }
        }
        // odometer over the split grid
        let mut pos = 0;
        loop {
            if pos == d {
                let boundary: Vec<(Vec<f64>, Vec<f64>)> =
                    fan.into_iter().zip(best.into_iter().map(|(_, r)| r)).collect();
                let points = distinct_points(&boundary, d);
                let coarse_jumps = count_coarse(&boundary);
                return Ok(RateRegionSamples {
                    members,
                    points,
                    boundary,
                    coarse_jumps,
                });
            }
            idx[pos] += 1;
            if idx[pos] < axes[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn distinct_points(boundary: &[(Vec<f64>, Vec<f64>)], d: usize) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = vec![vec![0.0; d]];
    for (_, r) in boundary {
        if !pts.iter().any(|p| p.iter().zip(r).all(|(a, b)| (a - b).abs() < 1e-12)) {
            pts.push(r.clone());
        }
    }
    pts
}

/// Jumps between samples whose weight vectors are lattice neighbours.
fn count_coarse(boundary: &[(Vec<f64>, Vec<f64>)]) -> usize {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let step = boundary
        .iter()
        .flat_map(|(w, _)| w.iter().copied())
        .filter(|&x| x > 1e-12)
        .fold(f64::INFINITY, f64::min);
    if !step.is_finite() {
        return 0;
    }
    let mut jumps = 0;
    for (i, (wa, a)) in boundary.iter().enumerate() {
        for (wb, b) in &boundary[i + 1..] {
            let l1: f64 = wa.iter().zip(wb).map(|(x, y)| (x - y).abs()).sum();
            if l1 > 2.0 * step * (1.0 + 1e-9) {
                continue;
            }
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let scale = norm(a).max(norm(b));
            if scale > 0.0 && norm(&diff) > COARSE_JUMP * scale {
                jumps += 1;
            }
        }
    }
    jumps
}

#[derive(Clone, Debug, PartialEq)]
pub enum Containment {
    Contained,
    /// Inner boundary point (projected) that no mix of outer points dominates.
    Witness(Vec<f64>),
}

impl Containment {
    pub fn is_contained(&self) -> bool {
        matches!(self, Containment::Contained)
    }
}

/// Whether the projection of `inner` onto `links` lies in the projection of
/// the convex, downward-closed hull of `outer`'s samples.
pub fn region_contains(
    outer: &RateRegionSamples,
    inner: &RateRegionSamples,
    links: &[usize],
) -> Result<Containment> {
    let locate = |r: &RateRegionSamples| {
        links
            .iter()
            .map(|k| {
                r.members.iter().position(|m| m == k).ok_or_else(|| {
                    Error::InvalidArgument(format!("link {k} is not a member of {:?}", r.members))
                })
            })
            .collect::<Result<Vec<usize>>>()
    };
    let oi = locate(outer)?;
    let ii = locate(inner)?;
    let project = |v: &[f64], idx: &[usize]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let mut hull: Vec<Vec<f64>> = vec![vec![0.0; links.len()]];
    for p in outer.points.iter().chain(outer.boundary.iter().map(|(_, r)| r)) {
        hull.push(project(p, &oi));
    }
    let dominated = |q: &[f64]| -> Result<bool> {
        if hull.iter().any(|p| p.iter().zip(q).all(|(a, b)| *a >= b - CONTAIN_TOL)) {
            return Ok(true);
        }
        let mut lp = LinearProgram::new(hull.len());
        lp.add(vec![1.0; hull.len()], Relation::Eq, 1.0);
        for (j, &qj) in q.iter().enumerate() {
            lp.add(hull.iter().map(|p| p[j]).collect(), Relation::Ge, qj - CONTAIN_TOL);
        }
        Ok(lp.phase_one()?.infeasibility <= 1e-9)
    };
    for (_, r) in &inner.boundary {
        let q = project(r, &ii);
        if !dominated(&q)? {
            return Ok(Containment::Witness(q));
        }
    }
    Ok(Containment::Contained)
}
