//! Perfect transmitter cooperation against worst-case jamming.
//!
//! A coalition `S` picks a transmit covariance `Q_S`, everyone outside picks
//! a jamming covariance `Q_c`, and the coalition's value is
//!
//! ```text
//! min_{Q_c} max_{Q_S} logdet(s2 I + H_S Q_S H_S^T + H_c Q_c H_c^T) - logdet(s2 I + H_c Q_c H_c^T)
//! ```
//!
//! subject to `Q >= 0` and `Q_kk <= P_k` on both sides. The objective is
//! concave in `Q_S` and convex in `Q_c`; we run projected gradient descent on
//! `phi(Q_c) = max_{Q_S} l(Q_S, Q_c)` with the inner maximum solved by
//! projected ascent, and stop when the gap between `phi(Q_c)` and
//! `min_{Q_c'} l(Q_S, Q_c')` drops below the tolerance.

use crate::channel::InterferenceChannel;
use crate::error::{Error, Result};
use crate::game::{Coalition, TuGame};
use crate::nats_to_bits;
use crate::numerics::{inverse_pd, logdet_pd, project_psd_capped_exact, Mat, SymMat};

pub const MAX_TX_K: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleConfig {
    pub max_iters: usize,
    pub step_init: f64,
    /// Gap tolerance in bits.
    pub tol: f64,
    pub inner_iters: usize,
}

impl Default for SaddleConfig {
    fn default() -> Self {
        SaddleConfig {
            max_iters: 5000,
            step_init: 0.1,
            tol: 1e-7,
            inner_iters: 200,
        }
    }
}

impl SaddleConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.inner_iters == 0 || !(self.step_init > 0.0) || !(self.tol > 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "saddle configuration must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleResult {
    pub value_bits: f64,
    /// `phi(Q_c)` at the returned jammer covariance.
    pub upper_bits: f64,
    /// `min_{Q_c'} l(Q_S, Q_c')` at the returned transmit covariance.
    pub lower_bits: f64,
    pub q_s: SymMat,
    /// `None` for the grand coalition.
    pub q_sc: Option<SymMat>,
    pub iterations: usize,
    pub converged: bool,
}

impl SaddleResult {
    pub fn gap_bits(&self) -> f64 {
        self.upper_bits - self.lower_bits
    }
}

/// Objective pieces for one coalition, in nats.
#[derive(Clone, Debug)]
pub struct JammingObjective {
    hs: Mat,
    hc: Option<Mat>,
    noise: f64,
    caps_s: Vec<f64>,
    caps_c: Vec<f64>,
}

impl JammingObjective {
    pub fn new(ic: &InterferenceChannel, s: Coalition) -> Result<Self> {
        let k = ic.k();
        let inside = s.members();
        if inside.is_empty() || !s.is_subset(Coalition::full(k)) {
            return Err(Error::InvalidArgument(format!("bad coalition {s} for K={k}")));
        }
        let outside = s.complement(k).members();
        let amp = ic.amplitudes();
        let rows: Vec<usize> = (0..k).collect();
        let p = ic.powers();
        Ok(JammingObjective {
            hs: amp.select(&rows, &inside),
            hc: (!outside.is_empty()).then(|| amp.select(&rows, &outside)),
            noise: ic.noise_var(),
            caps_s: inside.iter().map(|&i| p[i]).collect(),
            caps_c: outside.iter().map(|&i| p[i]).collect(),
        })
    }

    pub fn caps_s(&self) -> &[f64] {
        &self.caps_s
    }

    pub fn caps_c(&self) -> &[f64] {
        &self.caps_c
    }

    fn jam_cov(&self, qc: Option<&SymMat>) -> SymMat {
        let k = self.hs.rows();
        match (&self.hc, qc) {
            (Some(hc), Some(q)) => hc.sandwich(q).add_identity(self.noise),
            _ => SymMat::identity(k).scale(self.noise),
        }
    }

    /// `l(Q_S, Q_c)` in nats.
    pub fn value(&self, qs: &SymMat, qc: Option<&SymMat>) -> Result<f64> {
        let n = self.jam_cov(qc);
        let m = n.add(&self.hs.sandwich(qs));
        Ok(logdet_pd(&m)? - logdet_pd(&n)?)
    }

    /// `H_S^T M^-1 H_S`, positive semidefinite.
    pub fn grad_s(&self, qs: &SymMat, qc: Option<&SymMat>) -> Result<SymMat> {
        let n = self.jam_cov(qc);
        let m_inv = inverse_pd(&n.add(&self.hs.sandwich(qs)))?;
        Ok(self.hs.transpose().sandwich(&m_inv))
    }

    /// `H_c^T (M^-1 - N^-1) H_c`, negative semidefinite.
    pub fn grad_c(&self, qs: &SymMat, qc: &SymMat) -> Result<SymMat> {
        let hc = self.hc.as_ref().expect("jammers present");
        let n = self.jam_cov(Some(qc));
        let m_inv = inverse_pd(&n.add(&self.hs.sandwich(qs)))?;
        let n_inv = inverse_pd(&n)?;
        Ok(hc.transpose().sandwich(&m_inv.sub(&n_inv)))
    }
}

fn project(q: &SymMat, caps: &[f64]) -> SymMat {
    if q.dim() == 1 {
        return SymMat::diag(&[q.get(0, 0).clamp(0.0, caps[0])]);
    }
    project_psd_capped_exact(q, caps)
}

/// Projected gradient on `sign * f`, maximizing. Returns the final point and
/// its objective value (unsigned).
struct Ascent<'a> {
    caps: &'a [f64],
    iters: usize,
    step: f64,
    sign: f64,
}

impl Ascent<'_> {
    fn run(
        &self,
        start: SymMat,
        f: impl Fn(&SymMat) -> Result<f64>,
        grad: impl Fn(&SymMat) -> Result<SymMat>,
    ) -> Result<(SymMat, f64)> {
        let mut q = start;
        let mut fq = self.sign * f(&q)?;
        let mut step = self.step;
        for _ in 0..self.iters {
            let g = grad(&q)?.scale(self.sign);
            let mut accepted = false;
            while step > 1e-14 {
                let cand = project(&q.add(&g.scale(step)), self.caps);
                let d = cand.sub(&q);
                let dn = d.frobenius();
                if dn <= 1e-15 * (1.0 + q.frobenius()) {
                    return Ok((q, self.sign * fq));
                }
                let fc = self.sign * f(&cand)?;
                if fc >= fq + g.dot(&d) - dn * dn / (2.0 * step) - 1e-15 {
                    let gain = fc - fq;
                    q = cand;
                    fq = fc;
                    step = (step * 2.0).min(1e6);
                    accepted = true;
                    if gain.abs() <= 1e-16 * (1.0 + fq.abs()) {
                        return Ok((q, self.sign * fq));
                    }
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok((q, self.sign * fq))
    }
}

/// Worst-case-jamming value of coalition `s`.
pub fn value_tx_jamming(
    ic: &InterferenceChannel,
    s: Coalition,
    cfg: &SaddleConfig,
) -> Result<SaddleResult> {
    cfg.validate()?;
    let obj = JammingObjective::new(ic, s)?;
    let tol = cfg.tol * std::f64::consts::LN_2;
    let qs0 = SymMat::diag(&obj.caps_s);
    let inner_max = |start: SymMat, qc: Option<&SymMat>, iters: usize| {
        Ascent {
            caps: &obj.caps_s,
            iters,
            step: cfg.step_init,
            sign: 1.0,
        }
        .run(start, |q| obj.value(q, qc), |q| obj.grad_s(q, qc))
    };

    if obj.hc.is_none() {
        let (q, v) = inner_max(qs0, None, cfg.max_iters.max(cfg.inner_iters))?;
        // a further pass that cannot move means we sit at a fixed point
        let (q2, v2) = inner_max(q, None, 1)?;
        let bits = nats_to_bits(v2.max(0.0));
        return Ok(SaddleResult {
            value_bits: bits,
            upper_bits: bits,
            lower_bits: bits,
            converged: (v2 - v).abs() < tol,
            q_s: q2,
            q_sc: None,
            iterations: 1,
        });
    }

    let inner_min = |start: SymMat, qs: &SymMat| {
        Ascent {
            caps: &obj.caps_c,
            iters: cfg.inner_iters,
            step: cfg.step_init,
            sign: -1.0,
        }
        .run(start, |q| obj.value(qs, Some(q)), |q| obj.grad_c(qs, q))
    };

    let mut qc = SymMat::diag(&obj.caps_c);
    let (mut qs, mut upper) = inner_max(qs0, Some(&qc), cfg.inner_iters)?;
    let mut best_lower = f64::NEG_INFINITY;
    let mut step = cfg.step_init;
    let mut iterations = 0;
    let mut converged = false;
    let mut qc_response = qc.clone();
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let (resp, lower) = inner_min(qc_response.clone(), &qs)?;
        qc_response = resp;
        best_lower = best_lower.max(lower);
        if upper - best_lower < tol {
            converged = true;
            break;
        }
        let g = obj.grad_c(&qs, &qc)?;
        let mut moved = false;
        while step > 1e-14 {
            let cand = project(&qc.sub(&g.scale(step)), &obj.caps_c);
            let d = cand.sub(&qc);
            let dn = d.frobenius();
            if dn <= 1e-15 * (1.0 + qc.frobenius()) {
                break;
            }
            let (qs_c, phi_c) = inner_max(qs.clone(), Some(&cand), cfg.inner_iters)?;
            if phi_c <= upper + g.dot(&d) + dn * dn / (2.0 * step) + 1e-15 {
                qc = cand;
                qs = qs_c;
                upper = phi_c;
                step = (step * 2.0).min(1e6);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            // refine the inner maximum in place before giving up
            let (qs_r, up_r) = inner_max(qs.clone(), Some(&qc), cfg.inner_iters)?;
            let stalled = (up_r - upper).abs() <= 1e-15;
            qs = qs_r;
            upper = up_r;
            step = cfg.step_init;
            if stalled {
                let (_, lower) = inner_min(qc.clone(), &qs)?;
                best_lower = best_lower.max(lower);
                converged = upper - best_lower < tol;
                break;
            }
        }
    }
    let upper_bits = nats_to_bits(upper);
    let lower_bits = nats_to_bits(best_lower);
    Ok(SaddleResult {
        value_bits: (0.5 * (upper_bits + lower_bits)).max(0.0),
        upper_bits,
        lower_bits,
        q_s: qs,
        q_sc: Some(qc),
        iterations,
        converged,
    })
}

/// The TU game of worst-case-jamming values plus per-coalition diagnostics.
#[derive(Clone, Debug)]
pub struct TxGame {
    pub game: TuGame,
    pub solves: Vec<(Coalition, SaddleResult)>,
}

impl TxGame {
    pub fn unconverged(&self) -> Vec<(Coalition, f64)> {
        self.solves
            .iter()
            .filter(|(_, r)| !r.converged)
            .map(|(s, r)| (*s, r.gap_bits()))
            .collect()
    }

    /// Fails with `NotConverged` for the first coalition whose solve did not
    /// reach the gap tolerance.
    pub fn require_converged(&self) -> Result<()> {
        match self.unconverged().first() {
            Some(&(s, gap)) => Err(Error::NotConverged { mask: s.mask(), gap }),
            None => Ok(()),
        }
    }
}

pub fn tx_game(ic: &InterferenceChannel, cfg: &SaddleConfig) -> Result<TxGame> {
    let k = ic.k();
    if k > MAX_TX_K {
        return Err(Error::KTooLarge { k, max: MAX_TX_K });
    }
    let solves = Coalition::all_nonempty(k)
        .map(|s| value_tx_jamming(ic, s, cfg).map(|r| (s, r)))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; 1 << k];
    for (s, r) in &solves {
        values[s.mask() as usize] = r.value_bits;
    }
    Ok(TxGame {
        game: TuGame::from_values(k, values)?,
        solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ic(rng: &mut ChaCha8Rng, k: usize) -> InterferenceChannel {
        let gains = (0..k)
            .map(|_| (0..k).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let powers = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
        InterferenceChannel::new(gains, powers, 1.0).unwrap()
    }

    fn random_feasible(rng: &mut ChaCha8Rng, caps: &[f64]) -> SymMat {
        let n = caps.len();
        let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let raw = a.sandwich(&SymMat::identity(n));
        crate::numerics::project_psd_capped(&raw, caps)
    }

    #[test]
    fn single_link() {
        let ic = InterferenceChannel::new(vec![vec![1.0]], vec![1.0], 1.0).unwrap();
        let r = value_tx_jamming(&ic, Coalition::singleton(0), &SaddleConfig::default()).unwrap();
        assert!((r.value_bits - 1.0).abs() < 1e-9);
        assert!((r.q_s.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn parallel_channels_use_full_power() {
        let ic = InterferenceChannel::new(
            vec![vec![2.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 1.5]],
            vec![1.0, 2.0, 0.7],
            1.0,
        )
        .unwrap();
        let r = value_tx_jamming(&ic, Coalition::full(3), &SaddleConfig::default()).unwrap();
        let want: f64 = [(2.0, 1.0), (0.5, 2.0), (1.5, 0.7)]
            .iter()
            .map(|(h, p): &(f64, f64)| (1.0 + h * p).log2())
            .sum();
        assert!((r.value_bits - want).abs() < 1e-9, "{} vs {want}", r.value_bits);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let ic = random_ic(&mut rng, 3);
            let s = Coalition::from_members(&[0, 2]);
            let obj = JammingObjective::new(&ic, s).unwrap();
            let qs = random_feasible(&mut rng, obj.caps_s());
            let qc = random_feasible(&mut rng, obj.caps_c());
            let e = SymMat::from_upper(2, |_, _| rng.gen_range(-1.0..1.0));
            let h = 1e-5;
            let fd = (obj.value(&qs.add(&e.scale(h)), Some(&qc)).unwrap()
                - obj.value(&qs.sub(&e.scale(h)), Some(&qc)).unwrap())
                / (2.0 * h);
            let an = obj.grad_s(&qs, Some(&qc)).unwrap().dot(&e);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");

            let ec = SymMat::from_upper(1, |_, _| 1.0);
            let qc_plus = qc.add(&ec.scale(h));
            let qc_minus = qc.sub(&ec.scale(h));
            let fd = (obj.value(&qs, Some(&qc_plus)).unwrap()
                - obj.value(&qs, Some(&qc_minus)).unwrap())
                / (2.0 * h);
            let an = obj.grad_c(&qs, &qc).unwrap().dot(&ec);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
        }
    }

    #[test]
    fn block_diagonal_sandwich_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = Mat::from_fn(4, 5, |_, _| rng.gen_range(-2.0..2.0));
            let qs = random_feasible(&mut rng, &[1.0, 2.0]);
            let qc = random_feasible(&mut rng, &[0.5, 1.0, 3.0]);
            let whole = a.sandwich(&SymMat::block_diag(&qs, &qc));
            let rows = [0, 1, 2, 3];
            let split = a
                .select(&rows, &[0, 1])
                .sandwich(&qs)
                .add(&a.select(&rows, &[2, 3, 4]).sandwich(&qc));
            assert!(whole.max_abs_diff(&split) < 1e-12);
        }
    }

    fn grid_value(ic: &InterferenceChannel, n: usize) -> f64 {
        // scalar blocks: min over jam power of max over transmit power
        let obj = JammingObjective::new(ic, Coalition::singleton(0)).unwrap();
        let (p1, p2) = (ic.powers()[0], ic.powers()[1]);
        let axis = |p: f64, i: usize| p * i as f64 / (n - 1) as f64;
        (0..n)
            .map(|j| {
                let qc = SymMat::diag(&[axis(p2, j)]);
                (0..n)
                    .map(|i| obj.value(&SymMat::diag(&[axis(p1, i)]), Some(&qc)).unwrap())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
            / std::f64::consts::LN_2
    }

    #[test]
    fn matches_grid_oracle_for_two_links() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let ic = random_ic(&mut rng, 2);
            let r = value_tx_jamming(&ic, Coalition::singleton(0), &SaddleConfig::default())
                .unwrap();
            let g = grid_value(&ic, 200);
            assert!((r.value_bits - g).abs() < 1e-3, "{} vs {g}", r.value_bits);
        }
    }

    #[test]
    fn saddle_point_resists_unilateral_moves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = SaddleConfig::default();
        for _ in 0..4 {
            let ic = random_ic(&mut rng, 3);
            let s = Coalition::from_members(&[1, 2]);
            let r = value_tx_jamming(&ic, s, &cfg).unwrap();
            assert!(r.converged, "gap {}", r.gap_bits());
            let obj = JammingObjective::new(&ic, s).unwrap();
            let qc = r.q_sc.clone().unwrap();
            let at = nats_to_bits(obj.value(&r.q_s, Some(&qc)).unwrap());
            for _ in 0..20 {
                let qs2 = random_feasible(&mut rng, obj.caps_s());
                let qc2 = random_feasible(&mut rng, obj.caps_c());
                assert!(nats_to_bits(obj.value(&qs2, Some(&qc)).unwrap()) <= at + 1e-6);
                assert!(nats_to_bits(obj.value(&r.q_s, Some(&qc2)).unwrap()) >= at - 1e-6);
            }
        }
    }

    #[test]
    fn more_jamming_power_never_helps() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = SaddleConfig::default();
        for _ in 0..4 {
            let ic = random_ic(&mut rng, 3);
            let s = Coalition::singleton(0);
            let base = value_tx_jamming(&ic, s, &cfg).unwrap().value_bits;
            let mut p = ic.powers().to_vec();
            p[2] *= 2.0;
            let louder = value_tx_jamming(&ic.with_powers(p).unwrap(), s, &cfg)
                .unwrap()
                .value_bits;
            assert!(louder <= base + 1e-6, "{louder} > {base}");
        }
    }

    #[test]
    fn k_limit_and_config() {
        let ic = InterferenceChannel::new(vec![vec![1.0; 9]; 9], vec![1.0; 9], 1.0).unwrap();
        assert!(matches!(
            tx_game(&ic, &SaddleConfig::default()),
            Err(Error::KTooLarge { k: 9, .. })
        ));
        let one = InterferenceChannel::new(vec![vec![1.0]], vec![1.0], 1.0).unwrap();
        let bad = SaddleConfig {
            tol: 0.0,
            ..SaddleConfig::default()
        };
        assert!(value_tx_jamming(&one, Coalition::singleton(0), &bad).is_err());
    }
}
