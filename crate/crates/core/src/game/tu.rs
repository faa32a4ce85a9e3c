use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::coalition::{enumerate_partitions, Coalition, CoalitionStructure, MAX_LINKS};
use super::Check;
use crate::error::{Error, Result};

/// Strict-improvement slack for deviation tests.
pub const STRICT_TOL: f64 = 1e-9;

/// Default slack for cohesiveness, which usually consumes solver output.
pub const COHESIVE_TOL: f64 = 1e-6;

/// Transferable-utility game: one value per coalition, `v(empty) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TuGame {
    k: usize,
    // indexed by mask; values[0] is the empty coalition
    values: Vec<f64>,
}

impl TuGame {
    /// Builds the table by evaluating `value` on every nonempty coalition.
    pub fn from_fn(k: usize, mut value: impl FnMut(Coalition) -> f64) -> Result<Self> {
        Self::try_from_fn(k, |s| Ok(value(s)))
    }

    pub fn try_from_fn(
        k: usize,
        mut value: impl FnMut(Coalition) -> Result<f64>,
    ) -> Result<Self> {
        Self::check_k(k)?;
        let mut values = vec![0.0];
        for s in Coalition::all_nonempty(k) {
            values.push(value(s)?);
        }
        Self::from_values(k, values)
    }

    /// `values` indexed by mask, with `values[0] == 0`.
    pub fn from_values(k: usize, values: Vec<f64>) -> Result<Self> {
        Self::check_k(k)?;
        if values.len() != 1 << k {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                1usize << k,
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::InvariantViolation(
                "value of the empty coalition must be 0".into(),
            ));
        }
        if let Some((mask, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvariantViolation(format!(
                "value of coalition {} is {v}; values must be finite and >= 0",
                Coalition::from_mask(mask as u32)
            )));
        }
        Ok(TuGame { k, values })
    }

    fn check_k(k: usize) -> Result<()> {
        if k == 0 || k > MAX_LINKS {
            return Err(Error::KTooLarge { k, max: MAX_LINKS });
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn value(&self, s: Coalition) -> f64 {
        self.values[s.mask() as usize]
    }

    pub fn grand_value(&self) -> f64 {
        self.value(Coalition::full(self.k))
    }

    pub fn grand(&self) -> Coalition {
        Coalition::full(self.k)
    }

    /// Sum of block values under a structure.
    pub fn structure_value(&self, cs: &CoalitionStructure) -> f64 {
        cs.blocks().iter().map(|&b| self.value(b)).sum()
    }

    /// First disjoint pair (ascending mask order) that loses value when merged.
    pub fn is_superadditive(&self) -> Check<(Coalition, Coalition)> {
        let full = self.grand();
        for s1 in Coalition::all_nonempty(self.k) {
            for s2 in s1.complement(self.k).subsets() {
                if s2 < s1 {
                    continue;
                }
                debug_assert!(s1.union(s2).is_subset(full));
                if self.value(s1.union(s2)) < self.value(s1) + self.value(s2) - STRICT_TOL {
                    return Check::Violated((s1, s2));
                }
            }
        }
        Check::Holds
    }

    pub fn is_cohesive(&self) -> Result<Check<CoalitionStructure>> {
        self.is_cohesive_within(COHESIVE_TOL)
    }

    /// Checks `sum v(S_n) <= v(K) + tol` over every partition with two or
    /// more blocks.
    pub fn is_cohesive_within(&self, tol: f64) -> Result<Check<CoalitionStructure>> {
        let vk = self.grand_value();
        for p in enumerate_partitions(self.k)? {
            if p.len() < 2 {
                continue;
            }
            if self.structure_value(&p) > vk + tol {
                return Ok(Check::Violated(p));
            }
        }
        Ok(Check::Holds)
    }

    /// Largest `sum v(S_n) - v(K)` over nontrivial partitions.
    pub fn cohesion_margin(&self) -> Result<f64> {
        let vk = self.grand_value();
        let mut worst = f64::NEG_INFINITY;
        for p in enumerate_partitions(self.k)? {
            if p.len() >= 2 {
                worst = worst.max(self.structure_value(&p) - vk);
            }
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> String {
        let doc = TuGameDoc {
            k: self.k,
            values: Coalition::all_nonempty(self.k)
                .map(|s| (s.mask().to_string(), self.value(s)))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TuGameDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::check_k(doc.k)?;
        let mut values = vec![f64::NAN; 1 << doc.k];
        values[0] = 0.0;
        for (key, v) in doc.values {
            let mask = parse_mask(&key)?;
            if mask == 0 || mask as usize >= values.len() {
                return Err(Error::Schema(format!("mask {key} out of range for K={}", doc.k)));
            }
            values[mask as usize] = v;
        }
        if let Some(mask) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Schema(format!("missing value for mask {mask}")));
        }
        Self::from_values(doc.k, values)
    }
}

#[derive(Serialize, Deserialize)]
struct TuGameDoc {
    #[serde(rename = "K")]
    k: usize,
    values: BTreeMap<String, f64>,
}

/// Decimal or `0b`-prefixed binary coalition mask.
pub fn parse_mask(text: &str) -> Result<u32> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0b") {
        Some(bits) => u32::from_str_radix(bits, 2),
        None => t.parse::<u32>(),
    };
    parsed.map_err(|e| Error::Parse(format!("bad coalition mask '{text}': {e}")))
}
