//! Physical scenarios and their JSON form.
//!
//! Interference-channel and clustered-MAC gains are power gains; amplitudes
//! are their square roots. The CDMA model stores amplitudes `h_k` directly.

use serde::{Deserialize, Serialize};

use crate::db_to_linear;
use crate::error::{Error, Result};
use crate::numerics::{cholesky, Mat, SymMat};

/// `K` transmit/receive pairs with power gains `gains[m][k]` from
/// transmitter `k` to receiver `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterferenceChannel {
    gains: Vec<Vec<f64>>,
    powers: Vec<f64>,
    noise_var: f64,
}

impl InterferenceChannel {
    pub fn new(gains: Vec<Vec<f64>>, powers: Vec<f64>, noise_var: f64) -> Result<Self> {
        let k = gains.len();
        if k == 0 {
            return Err(Error::Schema("gains: at least one link required".into()));
        }
        if let Some(m) = gains.iter().position(|row| row.len() != k) {
            return Err(Error::Schema(format!("gains[{m}]: expected {k} entries")));
        }
        check_len("powers", &powers, k)?;
        for (m, row) in gains.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                check_nonneg(&format!("gains[{m}][{j}]"), g)?;
            }
        }
        for (i, &p) in powers.iter().enumerate() {
            check_positive(&format!("powers[{i}]"), p)?;
        }
        check_positive("noise_var", noise_var)?;
        Ok(InterferenceChannel {
            gains,
            powers,
            noise_var,
        })
    }

    pub fn k(&self) -> usize {
        self.powers.len()
    }

    /// Power gain from transmitter `k` to receiver `m`.
    pub fn gain(&self, m: usize, k: usize) -> f64 {
        self.gains[m][k]
    }

    pub fn gains(&self) -> &[Vec<f64>] {
        &self.gains
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// `K x K` amplitude matrix, receivers by transmitters.
    pub fn amplitudes(&self) -> Mat {
        let k = self.k();
        Mat::from_fn(k, k, |m, j| self.gains[m][j].sqrt())
    }

    pub fn with_powers(&self, powers: Vec<f64>) -> Result<Self> {
        InterferenceChannel::new(self.gains.clone(), powers, self.noise_var)
    }

    pub fn with_noise_var(&self, noise_var: f64) -> Result<Self> {
        InterferenceChannel::new(self.gains.clone(), self.powers.clone(), noise_var)
    }
}

/// Synchronous CDMA uplink with equicorrelated signatures.
#[derive(Clone, Debug, PartialEq)]
pub struct CdmaMac {
    h: Vec<f64>,
    power: f64,
    rho: f64,
    sigma2: f64,
}

impl CdmaMac {
    pub fn new(h: Vec<f64>, power: f64, rho: f64, sigma2: f64) -> Result<Self> {
        let k = h.len();
        if k == 0 {
            return Err(Error::Schema("h: at least one user required".into()));
        }
        for (i, &v) in h.iter().enumerate() {
            check_nonneg(&format!("h[{i}]"), v)?;
        }
        check_positive("P", power)?;
        check_positive("sigma2", sigma2)?;
        if !rho.is_finite() || !rho_admissible(rho, k) {
            return Err(Error::RhoOutOfRange { rho, size: k });
        }
        Ok(CdmaMac {
            h,
            power,
            rho,
            sigma2,
        })
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    /// Amplitude gains.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Received signal power `h_k^2 P`.
    pub fn received_power(&self, k: usize) -> f64 {
        self.h[k] * self.h[k] * self.power
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        CdmaMac::new(self.h.clone(), self.power, self.rho, sigma2)
    }
}

/// Equicorrelated `n x n` matrix: ones on the diagonal, `rho` elsewhere.
pub fn equicorrelated(n: usize, rho: f64) -> SymMat {
    SymMat::from_upper(n, |i, j| if i == j { 1.0 } else { rho })
}

/// `rho` in `(-1/(n-1), 1)`, i.e. the equicorrelated matrix is positive definite.
pub fn rho_admissible(rho: f64, n: usize) -> bool {
    if rho >= 1.0 {
        return false;
    }
    n <= 1 || rho > -1.0 / (n as f64 - 1.0)
}

/// Clustered MAC: `hd[k]` is the gain from user `k` to the destination and
/// `hu[m][k]` the gain from user `k` to user `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusteredMac {
    hd: Vec<f64>,
    hu: Vec<Vec<f64>>,
    powers: Vec<f64>,
}

impl ClusteredMac {
    /// Rejects gains unless `hu[m][k] > hd[k]` for every `m != k`.
    pub fn new(hd: Vec<f64>, hu: Vec<Vec<f64>>, powers: Vec<f64>) -> Result<Self> {
        let k = hd.len();
        if k == 0 {
            return Err(Error::Schema("hd: at least one user required".into()));
        }
        check_len("powers", &powers, k)?;
        if hu.len() != k {
            return Err(Error::Schema(format!("hu: expected {k} rows")));
        }
        if let Some(m) = hu.iter().position(|row| row.len() != k) {
            return Err(Error::Schema(format!("hu[{m}]: expected {k} entries")));
        }
        for (i, &g) in hd.iter().enumerate() {
            check_nonneg(&format!("hd[{i}]"), g)?;
        }
        for (i, &p) in powers.iter().enumerate() {
            check_positive(&format!("powers[{i}]"), p)?;
        }
        for m in 0..k {
            for j in 0..k {
                check_nonneg(&format!("hu[{m}][{j}]"), hu[m][j])?;
                if m != j && !(hu[m][j] > hd[j]) {
                    return Err(Error::InvariantViolation(format!(
                        "hu[{m}][{j}] = {} must exceed hd[{j}] = {} (clustered condition)",
                        hu[m][j], hd[j]
                    )));
                }
            }
        }
        Ok(ClusteredMac { hd, hu, powers })
    }

    pub fn k(&self) -> usize {
        self.hd.len()
    }

    pub fn hd(&self, k: usize) -> f64 {
        self.hd[k]
    }

    /// Gain from user `k` to user `m`.
    pub fn hu(&self, m: usize, k: usize) -> f64 {
        self.hu[m][k]
    }

    pub fn power(&self, k: usize) -> f64 {
        self.powers[k]
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }
}

/// Single-receiver MAC described by per-user received SNRs in dB.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrMac {
    snr_db: Vec<f64>,
}

impl SnrMac {
    pub fn new(snr_db: Vec<f64>) -> Result<Self> {
        if snr_db.is_empty() {
            return Err(Error::Schema("snr_db: at least one user required".into()));
        }
        if let Some(i) = snr_db.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(format!("snr_db[{i}] must be finite")));
        }
        Ok(SnrMac { snr_db })
    }

    pub fn k(&self) -> usize {
        self.snr_db.len()
    }

    pub fn snr_db(&self) -> &[f64] {
        &self.snr_db
    }

    pub fn snr_linear(&self) -> Vec<f64> {
        self.snr_db.iter().map(|&d| db_to_linear(d)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    Ic(InterferenceChannel),
    Cdma(CdmaMac),
    Clustered(ClusteredMac),
    Mac(SnrMac),
}

impl Scenario {
    pub fn k(&self) -> usize {
        match self {
            Scenario::Ic(c) => c.k(),
            Scenario::Cdma(c) => c.k(),
            Scenario::Clustered(c) => c.k(),
            Scenario::Mac(c) => c.k(),
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            Scenario::Ic(_) => "ic",
            Scenario::Cdma(_) => "cdma",
            Scenario::Clustered(_) => "clustered",
            Scenario::Mac(_) => "mac",
        }
    }

    pub fn to_json(&self) -> String {
        let doc = match self {
            Scenario::Ic(c) => ScenarioDoc::Ic {
                k: c.k(),
                gains: c.gains.clone(),
                powers: c.powers.clone(),
                noise_var: Some(c.noise_var),
            },
            Scenario::Cdma(c) => ScenarioDoc::Cdma {
                k: c.k(),
                h: c.h.clone(),
                p: c.power,
                rho: c.rho,
                sigma2: c.sigma2,
            },
            Scenario::Clustered(c) => ScenarioDoc::Clustered {
                k: c.k(),
                hd: c.hd.clone(),
                hu: c.hu.clone(),
                powers: c.powers.clone(),
            },
            Scenario::Mac(c) => ScenarioDoc::Mac {
                k: c.k(),
                snr_db: c.snr_db.clone(),
            },
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
enum ScenarioDoc {
    Ic {
        #[serde(rename = "K")]
        k: usize,
        gains: Vec<Vec<f64>>,
        powers: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise_var: Option<f64>,
    },
    Cdma {
        #[serde(rename = "K")]
        k: usize,
        h: Vec<f64>,
        #[serde(rename = "P")]
        p: f64,
        rho: f64,
        sigma2: f64,
    },
    Clustered {
        #[serde(rename = "K")]
        k: usize,
        hd: Vec<f64>,
        hu: Vec<Vec<f64>>,
        powers: Vec<f64>,
    },
    Mac {
        #[serde(rename = "K")]
        k: usize,
        snr_db: Vec<f64>,
    },
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            Error::Schema(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    })?;
    let check_k = |k: usize, actual: usize, field: &str| {
        if k == actual {
            Ok(())
        } else {
            Err(Error::Schema(format!("{field}: K = {k} but {actual} entries given")))
        }
    };
    Ok(match doc {
        ScenarioDoc::Ic {
            k,
            gains,
            powers,
            noise_var,
        } => {
            check_k(k, gains.len(), "gains")?;
            Scenario::Ic(InterferenceChannel::new(gains, powers, noise_var.unwrap_or(1.0))?)
        }
        ScenarioDoc::Cdma {
            k,
            h,
            p,
            rho,
            sigma2,
        } => {
            check_k(k, h.len(), "h")?;
            let c = CdmaMac::new(h, p, rho, sigma2)?;
            // belt and braces: the admissible range is exactly positive definiteness
            cholesky(&equicorrelated(k, rho))?;
            Scenario::Cdma(c)
        }
        ScenarioDoc::Clustered { k, hd, hu, powers } => {
            check_k(k, hd.len(), "hd")?;
            Scenario::Clustered(ClusteredMac::new(hd, hu, powers)?)
        }
        ScenarioDoc::Mac { k, snr_db } => {
            check_k(k, snr_db.len(), "snr_db")?;
            Scenario::Mac(SnrMac::new(snr_db)?)
        }
    })
}

fn check_len(field: &str, v: &[f64], k: usize) -> Result<()> {
    if v.len() != k {
        return Err(Error::Schema(format!("{field}: expected {k} entries, got {}", v.len())));
    }
    Ok(())
}

fn check_nonneg(field: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvariantViolation(format!("{field} = {v} must be finite and >= 0")));
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::InvariantViolation(format!("{field} = {v} must be finite and > 0")));
    }
    Ok(())
}

pub mod fixtures {
    //! Reference scenarios shipped with the crate.

    /// Three-link interference channel with a lopsided gain matrix, unit powers.
    pub const EXAMPLE_TX_EMPTY_CORE: &str = include_str!("../fixtures/tx_empty_core.json");
    /// Three-user clustered MAC where users 0 and 1 are close and user 2 is weak.
    pub const EXAMPLE_PDF_CLUSTER: &str = include_str!("../fixtures/pdf_cluster.json");
    /// Single-receiver MAC with every user at 20 dB.
    pub const MAC_BASE: &str = include_str!("../fixtures/mac_base.json");
}
