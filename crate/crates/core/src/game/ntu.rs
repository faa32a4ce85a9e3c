use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::coalition::{Coalition, MAX_LINKS};
use super::tu::{parse_mask, STRICT_TOL};
use super::Check;
use crate::error::{Error, Result};

/// Non-transferable point game: each coalition attains one rate per member.
#[derive(Clone, Debug, PartialEq)]
pub struct NtuPointGame {
    k: usize,
    // indexed by mask; payoffs[mask][i] belongs to the i-th smallest member
    payoffs: Vec<Vec<f64>>,
}

impl NtuPointGame {
    pub fn try_from_fn(
        k: usize,
        mut payoff: impl FnMut(Coalition) -> Result<Vec<f64>>,
    ) -> Result<Self> {
        if k == 0 || k > MAX_LINKS {
            return Err(Error::KTooLarge { k, max: MAX_LINKS });
        }
        let mut payoffs = vec![Vec::new()];
        for s in Coalition::all_nonempty(k) {
            let p = payoff(s)?;
            if p.len() != s.len() {
                return Err(Error::Dimension(format!(
                    "coalition {s} has {} members but {} payoffs",
                    s.len(),
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "payoffs of {s} must be finite and >= 0: {p:?}"
                )));
            }
            payoffs.push(p);
        }
        Ok(NtuPointGame { k, payoffs })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Payoff vector of `s`, ordered by ascending member index.
    pub fn payoffs(&self, s: Coalition) -> &[f64] {
        &self.payoffs[s.mask() as usize]
    }

    pub fn payoff(&self, s: Coalition, member: usize) -> Option<f64> {
        s.rank_of(member).map(|r| self.payoffs(s)[r])
    }

    /// Applies `f` to every payoff entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        NtuPointGame::try_from_fn(self.k, |s| Ok(self.payoffs(s).iter().map(|&v| f(v)).collect()))
    }

    /// Grand coalition is stable iff no proper coalition gives every member
    /// strictly more than the grand coalition does. The first blocking
    /// coalition in mask order is returned otherwise.
    pub fn gc_stable(&self) -> Check<Coalition> {
        let full = Coalition::full(self.k);
        for s in Coalition::all_nonempty(self.k).filter(|&s| s != full) {
            let blocks = s.members().iter().enumerate().all(|(r, &m)| {
                self.payoffs(s)[r] > self.payoff(full, m).expect("member of K") + STRICT_TOL
            });
            if blocks {
                return Check::Violated(s);
            }
        }
        Check::Holds
    }

    pub fn to_json(&self) -> String {
        let doc = NtuDoc {
            k: self.k,
            payoffs: Coalition::all_nonempty(self.k)
                .map(|s| (s.mask().to_string(), self.payoffs(s).to_vec()))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NtuDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut table: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
        for (key, v) in doc.payoffs {
            table.insert(parse_mask(&key)?, v);
        }
        if doc.k == 0 || doc.k > MAX_LINKS {
            return Err(Error::KTooLarge { k: doc.k, max: MAX_LINKS });
        }
        if let Some(&bad) = table.keys().find(|&&m| m == 0 || m > Coalition::full(doc.k).mask()) {
            return Err(Error::Schema(format!("mask {bad} out of range for K={}", doc.k)));
        }
        NtuPointGame::try_from_fn(doc.k, |s| {
            table
                .get(&s.mask())
                .cloned()
                .ok_or_else(|| Error::Schema(format!("missing payoffs for mask {}", s.mask())))
        })
    }
}

#[derive(Serialize, Deserialize)]
struct NtuDoc {
    #[serde(rename = "K")]
    k: usize,
    payoffs: BTreeMap<String, Vec<f64>>,
}
