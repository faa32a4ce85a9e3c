//! Receiver cooperation: joint decoding (TU) and linear multiuser
//! detection (NTU).

use crate::channel::{equicorrelated, rho_admissible, CdmaMac, InterferenceChannel};
use crate::error::{Error, Result};
use crate::game::{Coalition, NtuPointGame, TuGame};
use crate::nats_to_bits;
use crate::numerics::{logdet_pd, solve_pd, Mat, SymMat};

pub const MAX_RX_K: usize = 12;

/// Sum rate of `s` when its receivers decode jointly and treat every other
/// transmitter as Gaussian interference.
pub fn value_joint_decoding(ic: &InterferenceChannel, s: Coalition) -> Result<f64> {
    let inside = s.members();
    if inside.is_empty() {
        return Err(Error::InvalidArgument("coalition must be nonempty".into()));
    }
    let outside = s.complement(ic.k()).members();
    let amp = ic.amplitudes();
    let p = ic.powers();
    let n = received_covariance(&amp, &inside, &outside, p, ic.noise_var());
    let total = n.add(&received_covariance(&amp, &inside, &inside, p, 0.0));
    Ok(nats_to_bits(logdet_pd(&total)? - logdet_pd(&n)?))
}

/// `noise I + sum_{j in tx} P_j a_j a_j^T` restricted to receivers `rx`.
fn received_covariance(amp: &Mat, rx: &[usize], tx: &[usize], p: &[f64], noise: f64) -> SymMat {
    SymMat::from_upper(rx.len(), |a, b| {
        let cross: f64 = tx
            .iter()
            .map(|&j| amp[(rx[a], j)] * amp[(rx[b], j)] * p[j])
            .sum();
        cross + if a == b { noise } else { 0.0 }
    })
}

/// Successive-decoding corner point of the `K`-receiver SIMO-MAC region.
/// `order[0]` is decoded first and sees every later user as interference.
pub fn mac_corner_point(ic: &InterferenceChannel, order: &[usize]) -> Result<Vec<f64>> {
    let k = ic.k();
    let mut seen = vec![false; k];
    for &u in order {
        if u >= k || std::mem::replace(&mut seen[u], true) {
            return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of 0..{k}")));
        }
    }
    if order.len() != k {
        return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of 0..{k}")));
    }
    let amp = ic.amplitudes();
    let all: Vec<usize> = (0..k).collect();
    let mut rates = vec![0.0; k];
    for (i, &u) in order.iter().enumerate() {
        let later = &order[i + 1..];
        let n = received_covariance(&amp, &all, later, ic.powers(), ic.noise_var());
        let with_u = n.add(&received_covariance(&amp, &all, &[u], ic.powers(), 0.0));
        rates[u] = nats_to_bits(logdet_pd(&with_u)? - logdet_pd(&n)?);
    }
    Ok(rates)
}

pub fn rx_joint_game(ic: &InterferenceChannel) -> Result<TuGame> {
    if ic.k() > MAX_RX_K {
        return Err(Error::KTooLarge {
            k: ic.k(),
            max: MAX_RX_K,
        });
    }
    TuGame::try_from_fn(ic.k(), |s| value_joint_decoding(ic, s))
}

/// `v(S) = log2(1 + sum_S snr / (1 + sum_{not S} snr))`: one receiver,
/// joint decoding inside the coalition, outsiders as noise.
pub fn single_receiver_mac_value(snrs: &[f64], s: Coalition) -> f64 {
    let (inside, outside) = snrs
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(i, o), (k, &v)| if s.contains(k) { (i + v, o) } else { (i, o + v) });
    (1.0 + inside / (1.0 + outside)).log2()
}

pub fn single_receiver_mac_game(snrs: &[f64]) -> Result<TuGame> {
    if let Some(i) = snrs.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("snr[{i}] = {} must be > 0", snrs[i])));
    }
    TuGame::from_fn(snrs.len(), |s| single_receiver_mac_value(snrs, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detector {
    Mmse,
    Decorrelator,
}

impl std::str::FromStr for Detector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmse" => Ok(Detector::Mmse),
            "decorrelator" | "decorr" => Ok(Detector::Decorrelator),
            other => Err(Error::InvalidArgument(format!("unknown detector '{other}'"))),
        }
    }
}

fn member_rank(s: Coalition, k: usize) -> Result<usize> {
    s.rank_of(k)
        .ok_or_else(|| Error::InvalidArgument(format!("user {k} is not in {s}")))
}

fn outside_power(c: &CdmaMac, s: Coalition) -> f64 {
    (0..c.k())
        .filter(|&j| !s.contains(j))
        .map(|j| c.received_power(j))
        .sum()
}

/// SINR of user `k` after a linear detector `l` applied to the matched-filter
/// outputs of `s`; outsiders leak through the common correlation `rho`.
fn linear_detector_sinr(c: &CdmaMac, s: Coalition, k: usize, l: &Mat) -> Result<f64> {
    let members = s.members();
    let r = member_rank(s, k)?;
    let n = members.len();
    let rs = equicorrelated(n, c.rho());
    let lr = l.matmul(rs.as_mat());
    let lrl = lr.matmul(&l.transpose());
    let le: f64 = (0..n).map(|j| l[(r, j)]).sum();
    let own = lr[(r, r)] * lr[(r, r)] * c.received_power(k);
    let within: f64 = (0..n)
        .filter(|&j| j != r)
        .map(|j| lr[(r, j)] * lr[(r, j)] * c.received_power(members[j]))
        .sum();
    let rho = c.rho();
    let denom = c.sigma2() * lrl[(r, r)] + rho * rho * le * le * outside_power(c, s) + within;
    Ok(own / denom)
}

/// MMSE detector `L = (R_S + sigma^2 A_S^-2)^-1`.
pub fn sinr_mmse(c: &CdmaMac, s: Coalition, k: usize) -> Result<f64> {
    let members = s.members();
    member_rank(s, k)?;
    let n = members.len();
    let mut m = equicorrelated(n, c.rho());
    for (i, &u) in members.iter().enumerate() {
        let a2 = c.received_power(u);
        if !(a2 > 0.0) {
            return Err(Error::NotPositiveDefinite { index: i, pivot: a2 });
        }
        m.set(i, i, m.get(i, i) + c.sigma2() / a2);
    }
    let l = solve_pd(&m, &Mat::identity(n))?;
    linear_detector_sinr(c, s, k, &l)
}

/// Decorrelator SINR in closed form.
pub fn sinr_decorrelator(c: &CdmaMac, s: Coalition, k: usize) -> Result<f64> {
    member_rank(s, k)?;
    let n = s.len() as f64;
    let rho = c.rho();
    if !rho_admissible(rho, s.len()) {
        return Err(Error::RhoOutOfRange { rho, size: s.len() });
    }
    let d = 1.0 + rho * (n - 1.0);
    let noise = c.sigma2() / (1.0 - rho) * (1.0 + rho * (n - 2.0)) / d;
    let leak = (rho / d).powi(2) * outside_power(c, s);
    Ok(c.received_power(k) / (noise + leak))
}

/// Decorrelator SINR from `L = R_S^-1` applied to the full model.
pub fn sinr_decorrelator_matrix(c: &CdmaMac, s: Coalition, k: usize) -> Result<f64> {
    let n = s.len();
    let l = solve_pd(&equicorrelated(n, c.rho()), &Mat::identity(n))?;
    linear_detector_sinr(c, s, k, &l)
}

pub fn sinr(c: &CdmaMac, detector: Detector, s: Coalition, k: usize) -> Result<f64> {
    match detector {
        Detector::Mmse => sinr_mmse(c, s, k),
        Detector::Decorrelator => sinr_decorrelator(c, s, k),
    }
}

/// NTU game with payoffs `log2(1 + SINR_k(S))`.
pub fn mud_game(c: &CdmaMac, detector: Detector) -> Result<NtuPointGame> {
    if c.k() > MAX_RX_K {
        return Err(Error::KTooLarge {
            k: c.k(),
            max: MAX_RX_K,
        });
    }
    NtuPointGame::try_from_fn(c.k(), |s| {
        s.members()
            .into_iter()
            .map(|k| sinr(c, detector, s, k).map(|g| (1.0 + g).log2()))
            .collect()
    })
}
