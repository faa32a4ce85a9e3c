//! Acceptance suite: the checkable claims, each runnable on its own.
//!
//! Every criterion draws its random instances from a ChaCha stream seeded by
//! `seed ^ id`, so a single criterion reproduces without running the rest.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{fixtures, load_scenario, CdmaMac, ClusteredMac, InterferenceChannel, Scenario, SnrMac};
use crate::error::{Error, Result};
use crate::game::{
    bell, core_feasible, enumerate_partitions, equal_split_stable_structures, Check, Coalition,
    CoalitionStructure, CoreStatus, TuGame,
};
use crate::jamming::{tx_game, value_tx_jamming, SaddleConfig};
use crate::pdf::{pdf_rate_region, pdf_direct_stream_check, region_contains, Containment, RegionConfig};
use crate::rx::{
    mac_corner_point, mud_game, rx_joint_game, single_receiver_mac_game, sinr_decorrelator,
    sinr_decorrelator_matrix, Detector,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: DEFAULT_SEED }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    /// Group name accepted by `--filter`, along with the name and id.
    pub tag: &'static str,
    pub budget: Duration,
    check: fn(&mut ChaCha8Rng) -> Result<Verdict>,
}

impl fmt::Debug for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Criterion({} {})", self.id, self.name)
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:02} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

impl Criterion {
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.trim().to_ascii_lowercase();
        f.is_empty() || self.tag == f || self.name.contains(&f) || f.parse() == Ok(self.id)
    }

    /// Runs the check; errors become failures instead of aborting the suite.
    pub fn run(&self, cfg: &VerifyConfig) -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ self.id as u64);
        let start = Instant::now();
        let verdict = (self.check)(&mut rng)
            .unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let mut passed = verdict.passed;
        let mut detail = verdict.detail;
        if elapsed > self.budget {
            passed = false;
            detail.push_str(&format!("; over the {} s budget", self.budget.as_secs()));
        }
        Outcome {
            id: self.id,
            name: self.name,
            passed,
            detail,
            elapsed,
            budget: self.budget,
        }
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, tag, secs, check| Criterion {
        id,
        name,
        tag,
        budget: Duration::from_secs(secs),
        check,
    };
    vec![
        c(1, "tx-lopsided-empty-core", "tx", 60, lopsided_empty_core as fn(&mut ChaCha8Rng) -> Result<Verdict>),
        c(2, "tx-cohesive", "tx", 300, tx_cohesive),
        c(3, "rx-superadditive", "rx", 10, rx_superadditive),
        c(4, "rx-dominant-face", "rx", 30, rx_dominant_face),
        c(5, "mmse-gc-stable", "mud", 30, mmse_gc_stable),
        c(6, "decorrelator-high-snr", "mud", 60, decorrelator_high_snr),
        c(7, "decorrelator-closed-form", "mud", 30, decorrelator_closed_form),
        c(8, "saddle-grid-oracle", "tx", 60, saddle_grid_oracle),
        c(9, "pdf-cluster-noncohesive", "pdf", 240, pdf_cluster),
        c(10, "pdf-no-direct-stream", "pdf", 120, pdf_no_direct_stream),
        c(11, "mac-equal-split-points", "mac", 10, mac_equal_split_points),
        c(12, "combinatorics-lp", "game", 1, combinatorics_lp),
    ]
}

/// Runs every criterion matching `filter` (all when `None`), in id order.
pub fn run_criteria(cfg: &VerifyConfig, filter: Option<&str>) -> Vec<Outcome> {
    criteria()
        .into_iter()
        .filter(|c| filter.map_or(true, |f| c.matches(f)))
        .map(|c| c.run(cfg))
        .collect()
}

/// Power gains uniform on (0, 1), powers uniform on (0.5, 2), unit noise.
pub fn random_ic<R: Rng>(rng: &mut R, k: usize) -> InterferenceChannel {
    let gains = (0..k)
        .map(|_| (0..k).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let powers = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
    InterferenceChannel::new(gains, powers, 1.0).expect("valid by construction")
}

/// Gains on (0.5, 1.5), unit power, `rho` on (0, 0.9), noise on (0.05, 1).
pub fn random_cdma<R: Rng>(rng: &mut R, k: usize) -> CdmaMac {
    let h = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
    let rho = rng.gen_range(0.01..0.9);
    let sigma2 = rng.gen_range(0.05..1.0);
    CdmaMac::new(h, 1.0, rho, sigma2).expect("valid by construction")
}

/// Weak direct links, intra-cluster links stronger than each direct one.
pub fn random_clustered<R: Rng>(rng: &mut R, k: usize) -> ClusteredMac {
    let hd: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..0.1)).collect();
    let hu = (0..k)
        .map(|m| {
            (0..k)
                .map(|j| if m == j { 0.0 } else { hd[j] + rng.gen_range(0.05..1.0) })
                .collect()
        })
        .collect();
    let powers = (0..k).map(|_| rng.gen_range(0.5..5.0)).collect();
    ClusteredMac::new(hd, hu, powers).expect("valid by construction")
}

fn lopsided_ic() -> Result<InterferenceChannel> {
    match load_scenario(fixtures::EXAMPLE_TX_EMPTY_CORE)? {
        Scenario::Ic(ic) => Ok(ic),
        other => Err(Error::Schema(format!("expected an ic fixture, got {}", other.model_name()))),
    }
}

pub fn cluster_mac() -> Result<ClusteredMac> {
    match load_scenario(fixtures::EXAMPLE_PDF_CLUSTER)? {
        Scenario::Clustered(m) => Ok(m),
        other => Err(Error::Schema(format!("expected a clustered fixture, got {}", other.model_name()))),
    }
}

fn lopsided_empty_core(_: &mut ChaCha8Rng) -> Result<Verdict> {
    let ic = lopsided_ic()?;
    let cfg = SaddleConfig::default();
    let tg = tx_game(&ic, &cfg)?;
    tg.require_converged()?;
    let core = core_feasible(&tg.game)?;
    let gap = tg.solves.iter().map(|(_, r)| r.gap_bits()).fold(0.0, f64::max);
    let detail = match (&core.status, &core.witness, &core.certificate) {
        (CoreStatus::Empty, _, Some(cert)) => {
            format!("core empty, balanced excess {:.3e} bits", cert.excess)
        }
        (_, Some(x), _) => format!(
            "core nonempty: v(K) = {:.6}, witness {:?}, largest saddle gap {gap:.1e} bits",
            tg.game.grand_value(),
            x.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
        _ => format!("core status {:?}", core.status),
    };
    Ok(Verdict::new(core.is_empty(), detail))
}

fn tx_cohesive(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let cfg = SaddleConfig::default();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50 {
        let ic = random_ic(rng, 3);
        let tg = tx_game(&ic, &cfg)?;
        tg.require_converged()?;
        let margin = tg.game.cohesion_margin()?;
        worst = worst.max(margin);
        if margin > 1e-4 {
            return Ok(Verdict::new(false, format!("instance {i}: partition beats v(K) by {margin:.3e}")));
        }
    }
    Ok(Verdict::new(true, format!("50 games, worst partition margin {worst:.3e} bits")))
}

fn rx_instances(rng: &mut ChaCha8Rng) -> Vec<InterferenceChannel> {
    (0..100)
        .map(|_| {
            let k = rng.gen_range(2..=4);
            random_ic(rng, k)
        })
        .collect()
}

fn rx_superadditive(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let mut worst = f64::INFINITY;
    for (i, ic) in rx_instances(rng).iter().enumerate() {
        let g = rx_joint_game(ic)?;
        let k = ic.k();
        for s1 in Coalition::all_nonempty(k) {
            for s2 in s1.complement(k).subsets().filter(|s| s.len() > 0) {
                let gain = g.value(s1.union(s2)) - g.value(s1) - g.value(s2);
                worst = worst.min(gain);
                if gain < -1e-9 {
                    return Ok(Verdict::new(false, format!("instance {i}: {s1} + {s2} loses {gain:.3e}")));
                }
            }
        }
    }
    Ok(Verdict::new(true, format!("100 games, smallest merge gain {worst:.3e} bits")))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn rx_dominant_face(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let mut worst = f64::INFINITY;
    for (i, ic) in rx_instances(rng).iter().enumerate() {
        let g = rx_joint_game(ic)?;
        let k = ic.k();
        for order in permutations(k) {
            let r = mac_corner_point(ic, &order)?;
            for s in Coalition::all_nonempty(k) {
                let excess: f64 = s.members().iter().map(|&m| r[m]).sum::<f64>() - g.value(s);
                worst = worst.min(excess);
                if excess < -1e-9 {
                    return Ok(Verdict::new(
                        false,
                        format!("instance {i}, order {order:?}: {s} short by {:.3e}", -excess),
                    ));
                }
            }
        }
        if core_feasible(&g)?.is_empty() {
            return Ok(Verdict::new(false, format!("instance {i}: core reported empty")));
        }
    }
    Ok(Verdict::new(true, format!("100 games, all corner points in the core (worst excess {worst:.3e})")))
}

fn cdma_instances(rng: &mut ChaCha8Rng) -> Vec<CdmaMac> {
    (0..100)
        .map(|_| {
            let k = rng.gen_range(2..=5);
            random_cdma(rng, k)
        })
        .collect()
}

fn mmse_gc_stable(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let mut worst = f64::INFINITY;
    for (i, c) in cdma_instances(rng).iter().enumerate() {
        let g = mud_game(c, Detector::Mmse)?;
        let full = Coalition::full(c.k());
        for s in Coalition::all_nonempty(c.k()) {
            for k in s.members() {
                let d = g.payoff(full, k).unwrap_or(f64::NAN) - g.payoff(s, k).unwrap_or(f64::NAN);
                worst = worst.min(d);
                if !(d >= -1e-12) {
                    return Ok(Verdict::new(false, format!("instance {i}: user {k} prefers {s} by {:.3e}", -d)));
                }
            }
        }
        if let Check::Violated(b) = g.gc_stable() {
            return Ok(Verdict::new(false, format!("instance {i}: {b} blocks the grand coalition")));
        }
    }
    Ok(Verdict::new(true, format!("100 games stable, smallest SINR advantage {worst:.3e}")))
}

/// Hand-checkable low-SNR case: a lone user sees `1 / (10 + 0.25)` while the
/// pair gives it `1 / 13.33`.
pub fn decorrelator_blocking_instance() -> CdmaMac {
    CdmaMac::new(vec![1.0, 1.0], 1.0, 0.5, 10.0).expect("valid")
}

fn decorrelator_high_snr(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let instances = cdma_instances(rng);
    for (i, c) in instances.iter().enumerate() {
        let c = c.with_sigma2(1e-6)?;
        let g = mud_game(&c, Detector::Decorrelator)?;
        let full = Coalition::full(c.k());
        for s in Coalition::all_nonempty(c.k()).filter(|&s| s != full) {
            for k in s.members() {
                let (own, gc) = (g.payoff(s, k), g.payoff(full, k));
                if !(own < gc) {
                    return Ok(Verdict::new(false, format!("instance {i}: user {k} gains nothing in the GC over {s}")));
                }
            }
        }
        if let Check::Violated(b) = g.gc_stable() {
            return Ok(Verdict::new(false, format!("instance {i}: {b} blocks at high SNR")));
        }
    }
    let mut found = None;
    'sweep: for (i, c) in instances.iter().enumerate() {
        for e in -6..=3 {
            let sigma2 = 10f64.powi(e);
            if let Check::Violated(b) = mud_game(&c.with_sigma2(sigma2)?, Detector::Decorrelator)?.gc_stable() {
                found = Some((i, sigma2, b));
                break 'sweep;
            }
        }
    }
    let pinned = mud_game(&decorrelator_blocking_instance(), Detector::Decorrelator)?.gc_stable();
    let pinned_ok = pinned == Check::Violated(Coalition::singleton(0));
    let detail = match &found {
        Some((i, s2, b)) => format!(
            "100 games stable at sigma2 = 1e-6; sweep: instance {i} blocked by {b} at sigma2 = {s2:e}; pinned instance {}",
            if pinned_ok { "blocked by {0}" } else { "NOT blocked" }
        ),
        None => "sweep found no low-SNR blocking coalition".into(),
    };
    Ok(Verdict::new(found.is_some() && pinned_ok, detail))
}

fn decorrelator_closed_form(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for c in cdma_instances(rng) {
        for s in Coalition::all_nonempty(c.k()) {
            for k in s.members() {
                let a = sinr_decorrelator(&c, s, k)?;
                let b = sinr_decorrelator_matrix(&c, s, k)?;
                worst = worst.max((a - b).abs() / b.abs());
            }
        }
    }
    Ok(Verdict::new(worst <= 1e-10, format!("100 instances, largest relative difference {worst:.2e}")))
}

/// `min_{q_c} max_{q_s}` on a grid for `S = {0}` with both receivers
/// pooled: `log2(1 + q_s h^T N^-1 h)` with `N = s2 I + q_c g g^T`, inverted
/// by Sherman-Morrison.
fn scalar_grid_value(ic: &InterferenceChannel, n: usize) -> f64 {
    let (p0, p1) = (ic.powers()[0], ic.powers()[1]);
    let s2 = ic.noise_var();
    let h = [ic.gain(0, 0).sqrt(), ic.gain(1, 0).sqrt()];
    let g = [ic.gain(0, 1).sqrt(), ic.gain(1, 1).sqrt()];
    let hh = h[0] * h[0] + h[1] * h[1];
    let gg = g[0] * g[0] + g[1] * g[1];
    let hg = h[0] * g[0] + h[1] * g[1];
    let axis = |p: f64, i: usize| p * i as f64 / (n - 1) as f64;
    (0..n)
        .map(|j| {
            let qc = axis(p1, j);
            let gain = (hh - qc * hg * hg / (s2 + qc * gg)) / s2;
            (0..n)
                .map(|i| (1.0 + axis(p0, i) * gain).log2())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn saddle_grid_oracle(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let cfg = SaddleConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let ic = random_ic(rng, 2);
        let r = value_tx_jamming(&ic, Coalition::singleton(0), &cfg)?;
        worst = worst.max((r.value_bits - scalar_grid_value(&ic, 200)).abs());
    }
    Ok(Verdict::new(worst <= 1e-3, format!("10 channels, largest deviation {worst:.3e} bits")))
}

fn cluster_verdict(mac: &ClusteredMac, grid: usize) -> Result<(Containment, Containment)> {
    let pair = Coalition::from_members(&[0, 1]);
    let pc = mac.power(0) / 6.0;
    let pair_cfg = RegionConfig::with_grid(grid).fix(0, pc).fix(1, pc);
    let pair_region = pdf_rate_region(mac, pair, &pair_cfg)?;
    let gc_region = pdf_rate_region(mac, Coalition::full(3), &RegionConfig::with_grid(grid))?;
    Ok((
        region_contains(&pair_region, &gc_region, &[0, 1])?,
        region_contains(&gc_region, &pair_region, &[0, 1])?,
    ))
}

fn pdf_cluster(_: &mut ChaCha8Rng) -> Result<Verdict> {
    let mac = cluster_mac()?;
    let mut notes = Vec::new();
    let mut ok = true;
    for grid in [40, 80] {
        let (forward, reverse) = cluster_verdict(&mac, grid)?;
        let this = forward.is_contained() && !reverse.is_contained();
        ok &= this;
        notes.push(match (&forward, &reverse) {
            (Containment::Contained, Containment::Witness(w)) => {
                format!("grid {grid}: GC inside {{0,1}}, witness ({:.4}, {:.4}) outside GC", w[0], w[1])
            }
            _ => format!("grid {grid}: forward {forward:?}, reverse {reverse:?}"),
        });
    }
    notes.push(if ok { "game is not cohesive".into() } else { "verdict not reproduced".into() });
    Ok(Verdict::new(ok, notes.join("; ")))
}

fn pdf_no_direct_stream(rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let mut macs = vec![cluster_mac()?];
    macs.extend((0..20).map(|_| random_clustered(rng, 3)));
    let mut worst = f64::INFINITY;
    for (i, mac) in macs.iter().enumerate() {
        let r = pdf_direct_stream_check(mac, Coalition::full(3), 100, 64, rng)?;
        worst = worst.min(r.worst_slack);
        if let Check::Violated(c) = r.check {
            return Ok(Verdict::new(false, format!("channel {i}: slack {:.3e} at weights {:?}", c.slack, c.weights)));
        }
    }
    Ok(Verdict::new(true, format!("21 channels x 100 splits, worst slack {worst:.3e}")))
}

/// Equal-split stable structures of the single-receiver MAC at one point.
pub fn mac_stable_structures(snr_db: &[f64]) -> Result<Vec<CoalitionStructure>> {
    let mac = SnrMac::new(snr_db.to_vec())?;
    equal_split_stable_structures(&single_receiver_mac_game(&mac.snr_linear())?)
}

fn mac_equal_split_points(_: &mut ChaCha8Rng) -> Result<Verdict> {
    let grand = CoalitionStructure::grand(3);
    let similar = mac_stable_structures(&[20.0, 20.0, 20.0])?;
    let spread = mac_stable_structures(&[40.0, -10.0, 20.0])?;
    let enc = |v: &[CoalitionStructure]| v.iter().map(|c| c.encode()).collect::<Vec<_>>().join(" ");
    let ok = similar.contains(&grand) && !spread.contains(&grand) && !spread.is_empty();
    Ok(Verdict::new(
        ok,
        format!("(20, 20) dB stable: [{}]; (40, -10) dB stable: [{}]", enc(&similar), enc(&spread)),
    ))
}

fn combinatorics_lp(_: &mut ChaCha8Rng) -> Result<Verdict> {
    const BELL: [u64; 8] = [1, 2, 5, 15, 52, 203, 877, 4140];
    for (i, &want) in BELL.iter().enumerate() {
        let k = i + 1;
        let n = enumerate_partitions(k)?.count() as u64;
        if n != want || bell(k) != want {
            return Ok(Verdict::new(false, format!("K = {k}: {n} partitions, expected {want}")));
        }
    }
    let pair_game = |vk: f64| {
        TuGame::from_fn(3, |s| match s.len() {
            1 => 0.0,
            2 => 1.0,
            _ => vk,
        })
    };
    let rich = core_feasible(&pair_game(1.5)?)?;
    let poor = core_feasible(&pair_game(1.4)?)?;
    let witness_ok = rich
        .witness
        .as_ref()
        .is_some_and(|x| x.iter().all(|v| (v - 0.5).abs() < 1e-9));
    let ok = !rich.is_empty() && witness_ok && poor.is_empty();
    Ok(Verdict::new(
        ok,
        format!(
            "Bell numbers K = 1..8; v(K) = 1.5 core {:?}, v(K) = 1.4 core {:?}",
            rich.status, poor.status
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters() {
        let all = criteria();
        assert_eq!(all.len(), 12);
        let pdf: Vec<u32> = all.iter().filter(|c| c.matches("pdf")).map(|c| c.id).collect();
        assert_eq!(pdf, vec![9, 10]);
        assert_eq!(all.iter().filter(|c| c.matches("7")).count(), 1);
        assert!(all.iter().all(|c| c.matches("")));
    }

    #[test]
    fn permutations_cover_orders() {
        assert_eq!(permutations(3).len(), 6);
        let mut p = permutations(3);
        p.sort();
        p.dedup();
        assert_eq!(p.len(), 6);
    }

    #[test]
    fn pinned_decorrelator_values() {
        let c = decorrelator_blocking_instance();
        let alone = sinr_decorrelator(&c, Coalition::singleton(0), 0).unwrap();
        let gc = sinr_decorrelator(&c, Coalition::full(2), 0).unwrap();
        assert!((alone - 1.0 / 10.25).abs() < 1e-14);
        assert!((gc - 0.075).abs() < 1e-14);
    }

    #[test]
    fn scalar_grid_hits_corner() {
        // orthogonal signatures: the jammer cannot touch the coalition
        let ic = InterferenceChannel::new(vec![vec![0.8, 0.0], vec![0.0, 0.5]], vec![1.5, 2.0], 1.0).unwrap();
        let want = (1.0f64 + 0.8 * 1.5).log2();
        assert!((scalar_grid_value(&ic, 11) - want).abs() < 1e-14);
        // aligned signatures: full jamming, a scalar link
        let ic = InterferenceChannel::new(vec![vec![0.8, 0.3], vec![0.0, 0.0]], vec![1.5, 2.0], 1.0).unwrap();
        let want = (1.0f64 + 0.8 * 1.5 / (1.0 + 0.3 * 2.0)).log2();
        assert!((scalar_grid_value(&ic, 11) - want).abs() < 1e-14);
    }

    #[test]
    fn fast_criteria_pass() {
        let cfg = VerifyConfig::default();
        for id in [3, 7, 11, 12] {
            let o = criteria()[id - 1].run(&cfg);
            assert!(o.passed, "{}", o.line());
        }
    }
}
