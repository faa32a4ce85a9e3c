//! Partial decode-and-forward cooperation in a clustered MAC.
//!
//! Each member `k` of a coalition splits its power into a direct stream
//! `p_d` (decoded only at the destination), a cooperative stream `p_c`
//! (decoded by the partners and forwarded) and a share `p_u` of a common
//! stream sent coherently by everyone. Users outside the coalition jam with
//! independent full-power Gaussian noise.

mod region;
mod direct;

pub use region::{
    pdf_rate_region, region_contains, weight_fan, Containment, RateRegionSamples, RegionConfig,
};
pub use direct::{pd_positive_weighted_max, pdf_direct_stream_check, polytope_weighted_max};

use crate::channel::ClusteredMac;
use crate::error::{Error, Result};
use crate::game::{partitions_of, Coalition};

/// Coalitions larger than this make the partition/decoder search too wide.
pub const MAX_PDF_S: usize = 6;

const POWER_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Receiver {
    Destination,
    Member(usize),
}

/// Power split of every member of a coalition, stored by member rank.
#[derive(Clone, Debug, PartialEq)]
pub struct PdfPowerSplit {
    coalition: Coalition,
    pd: Vec<f64>,
    pc: Vec<f64>,
    pu: Vec<f64>,
}

impl PdfPowerSplit {
    pub fn new(
        mac: &ClusteredMac,
        coalition: Coalition,
        pd: Vec<f64>,
        pc: Vec<f64>,
        pu: Vec<f64>,
    ) -> Result<Self> {
        check_coalition(mac, coalition)?;
        let members = coalition.members();
        for (name, v) in [("p_d", &pd), ("p_c", &pc), ("p_u", &pu)] {
            if v.len() != members.len() {
                return Err(Error::Dimension(format!(
                    "{name}: expected {} entries, got {}",
                    members.len(),
                    v.len()
                )));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::InvalidArgument(format!("{name} entry {x} must be >= 0")));
            }
        }
        for (r, &k) in members.iter().enumerate() {
            let total = pd[r] + pc[r] + pu[r];
            if total > mac.power(k) * (1.0 + POWER_SLACK) {
                return Err(Error::InvalidArgument(format!(
                    "user {k} splits {total} but may use at most {}",
                    mac.power(k)
                )));
            }
        }
        Ok(PdfPowerSplit {
            coalition,
            pd,
            pc,
            pu,
        })
    }

    /// No direct stream; user `k` sends `pc_k` cooperatively and the rest of
    /// its power on the common stream.
    pub fn cooperative(mac: &ClusteredMac, coalition: Coalition, pc: Vec<f64>) -> Result<Self> {
        let members = coalition.members();
        if pc.len() != members.len() {
            return Err(Error::Dimension(format!(
                "p_c: expected {} entries, got {}",
                members.len(),
                pc.len()
            )));
        }
        let pu = members
            .iter()
            .zip(&pc)
            .map(|(&k, &c)| (mac.power(k) - c).max(0.0))
            .collect();
        PdfPowerSplit::new(mac, coalition, vec![0.0; members.len()], pc, pu)
    }

    pub fn coalition(&self) -> Coalition {
        self.coalition
    }

    fn rank(&self, k: usize) -> usize {
        self.coalition.rank_of(k).expect("member of the coalition")
    }

    pub fn pd(&self, k: usize) -> f64 {
        self.pd[self.rank(k)]
    }

    pub fn pc(&self, k: usize) -> f64 {
        self.pc[self.rank(k)]
    }

    pub fn pu(&self, k: usize) -> f64 {
        self.pu[self.rank(k)]
    }

    /// Same split with every direct stream folded into the cooperative one.
    pub fn without_direct(&self) -> PdfPowerSplit {
        let pc = self.pc.iter().zip(&self.pd).map(|(c, d)| c + d).collect();
        PdfPowerSplit {
            coalition: self.coalition,
            pd: vec![0.0; self.pd.len()],
            pc,
            pu: self.pu.clone(),
        }
    }

    pub fn has_direct(&self) -> bool {
        self.pd.iter().any(|&d| d > 0.0)
    }
}

fn check_coalition(mac: &ClusteredMac, s: Coalition) -> Result<()> {
    if s.is_empty() || !s.is_subset(Coalition::full(mac.k())) {
        return Err(Error::InvalidArgument(format!("bad coalition {s} for K={}", mac.k())));
    }
    Ok(())
}

fn check_subset(split: &PdfPowerSplit, g: Coalition) -> Result<()> {
    if g.is_empty() || !g.is_subset(split.coalition) {
        return Err(Error::InvalidArgument(format!(
            "{g} must be a nonempty subset of {}",
            split.coalition
        )));
    }
    Ok(())
}

/// `1 + sum_{j not in S} h_{r,j} P_j`: noise plus full-power jamming at `r`.
pub fn jamming_level(mac: &ClusteredMac, s: Coalition, receiver: Receiver) -> f64 {
    1.0 + (0..mac.k())
        .filter(|&j| !s.contains(j))
        .map(|j| {
            let h = match receiver {
                Receiver::Destination => mac.hd(j),
                Receiver::Member(m) => mac.hu(m, j),
            };
            h * mac.power(j)
        })
        .sum::<f64>()
}

/// Direct-stream bound `log2(1 + sum_G h_d p_d / J_d)`.
pub fn pdf_bound_b1(mac: &ClusteredMac, split: &PdfPowerSplit, g: Coalition) -> Result<f64> {
    check_subset(split, g)?;
    let jd = jamming_level(mac, split.coalition, Receiver::Destination);
    let signal: f64 = g.members().iter().map(|&i| mac.hd(i) * split.pd(i)).sum();
    Ok((1.0 + signal / jd).log2())
}

/// Rate of the cooperative streams of `block` decoded at member `m`.
fn b2_term(mac: &ClusteredMac, split: &PdfPowerSplit, block: Coalition, m: usize) -> f64 {
    let s = split.coalition;
    let signal: f64 = block.members().iter().map(|&i| mac.hu(m, i) * split.pc(i)).sum();
    let direct: f64 = s
        .members()
        .iter()
        .filter(|&&j| j != m)
        .map(|&j| mac.hu(m, j) * split.pd(j))
        .sum();
    (1.0 + signal / (jamming_level(mac, s, Receiver::Member(m)) + direct)).log2()
}

/// Cooperative-stream bound for an explicit partition of `g` with one
/// decoding partner per block.
pub fn pdf_bound_b2(
    mac: &ClusteredMac,
    split: &PdfPowerSplit,
    g: Coalition,
    blocks: &[(Coalition, usize)],
) -> Result<f64> {
    check_subset(split, g)?;
    let mut covered = Coalition::EMPTY;
    for &(b, m) in blocks {
        if b.is_empty() || !b.is_disjoint(covered) {
            return Err(Error::InvalidArgument(format!("blocks do not partition {g}")));
        }
        covered = covered.union(b);
        if !split.coalition.contains(m) || b.contains(m) {
            return Err(Error::InvalidDecoder { decoder: m });
        }
    }
    if covered != g {
        return Err(Error::InvalidArgument(format!("blocks do not partition {g}")));
    }
    Ok(blocks.iter().map(|&(b, m)| b2_term(mac, split, b, m)).sum())
}

/// Smallest cooperative-stream bound over partitions of `g` and decoders
/// outside each block.
pub fn pdf_min_b2(mac: &ClusteredMac, split: &PdfPowerSplit, g: Coalition) -> Result<f64> {
    check_subset(split, g)?;
    let s = split.coalition;
    if s.len() > MAX_PDF_S {
        return Err(Error::KTooLarge {
            k: s.len(),
            max: MAX_PDF_S,
        });
    }
    if s.len() == 1 {
        return Err(Error::NoValidDecoder(s.mask()));
    }
    let mut best = f64::INFINITY;
    'partitions: for blocks in partitions_of(g) {
        let mut total = 0.0;
        for b in blocks {
            let term = s
                .difference(b)
                .members()
                .into_iter()
                .map(|m| b2_term(mac, split, b, m))
                .fold(f64::INFINITY, f64::min);
            if term == f64::INFINITY {
                continue 'partitions;
            }
            total += term;
        }
        best = best.min(total);
    }
    Ok(best)
}

/// Destination bound on the coalition's total rate. The common stream adds
/// coherently: its amplitudes `sqrt(h_d p_u)` sum before squaring.
pub fn pdf_dest_sum_bound(mac: &ClusteredMac, split: &PdfPowerSplit) -> f64 {
    let s = split.coalition;
    let jd = jamming_level(mac, s, Receiver::Destination);
    let members = s.members();
    let private: f64 = members
        .iter()
        .map(|&k| mac.hd(k) * (split.pd(k) + split.pc(k)))
        .sum();
    let coherent: f64 = members.iter().map(|&k| (mac.hd(k) * split.pu(k)).sqrt()).sum();
    (1.0 + (private + coherent * coherent) / jd).log2()
}

/// Bounds `(G, sum_G R <= b)` of the region at a split with no direct stream.
/// The all-members row folds in the destination bound.
pub(crate) fn cooperative_constraints(
    mac: &ClusteredMac,
    split: &PdfPowerSplit,
) -> Result<Vec<(Coalition, f64)>> {
    let s = split.coalition;
    let dest = pdf_dest_sum_bound(mac, split);
    if s.len() == 1 {
        return Ok(vec![(s, dest)]);
    }
    s.subsets()
        .map(|g| {
            let b2 = pdf_min_b2(mac, split, g)?;
            Ok((g, if g == s { b2.min(dest) } else { b2 }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{load_scenario, Scenario};

    pub(crate) fn cluster() -> ClusteredMac {
        match load_scenario(crate::channel::fixtures::EXAMPLE_PDF_CLUSTER).unwrap() {
            Scenario::Clustered(c) => c,
            other => panic!("{other:?}"),
        }
    }

    fn pair() -> Coalition {
        Coalition::from_members(&[0, 1])
    }

    #[test]
    fn jamming_levels() {
        let mac = cluster();
        let full = Coalition::full(3);
        assert_eq!(jamming_level(&mac, full, Receiver::Destination), 1.0);
        assert!((jamming_level(&mac, pair(), Receiver::Destination) - 1.05).abs() < 1e-15);
        assert!((jamming_level(&mac, pair(), Receiver::Member(0)) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn direct_bound() {
        let mac = cluster();
        let s = Coalition::singleton(0);
        let z = PdfPowerSplit::new(&mac, s, vec![0.0], vec![0.0], vec![0.0]).unwrap();
        assert_eq!(pdf_bound_b1(&mac, &z, s).unwrap(), 0.0);
        let d = PdfPowerSplit::new(&mac, s, vec![5.0], vec![0.0], vec![0.0]).unwrap();
        let j: f64 = 1.0 + 0.05 * 5.0 + 0.025 * 2.0;
        let want = (1.0 + 0.05 * 5.0 / j).log2();
        assert!((pdf_bound_b1(&mac, &d, s).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn cooperative_bound_example() {
        let mac = cluster();
        let split = PdfPowerSplit::cooperative(&mac, pair(), vec![5.0 / 6.0; 2]).unwrap();
        let g = Coalition::singleton(0);
        let b = pdf_bound_b2(&mac, &split, g, &[(g, 1)]).unwrap();
        let want = (1.0 + (5.0 / 6.0) / 1.2f64).log2();
        assert!((b - want).abs() < 1e-14);
        assert!((pdf_min_b2(&mac, &split, g).unwrap() - want).abs() < 1e-14);
        assert!(matches!(
            pdf_bound_b2(&mac, &split, g, &[(g, 0)]),
            Err(Error::InvalidDecoder { decoder: 0 })
        ));
        // symmetric pair: both singletons have the same bound
        let other = Coalition::singleton(1);
        assert!((pdf_min_b2(&mac, &split, other).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn singleton_has_no_partner() {
        let mac = cluster();
        let s = Coalition::singleton(2);
        let split = PdfPowerSplit::cooperative(&mac, s, vec![0.0]).unwrap();
        assert!(matches!(pdf_min_b2(&mac, &split, s), Err(Error::NoValidDecoder(4))));
    }

    #[test]
    fn zero_cooperative_power() {
        let mac = cluster();
        let full = Coalition::full(3);
        let split = PdfPowerSplit::cooperative(&mac, full, vec![0.0; 3]).unwrap();
        for g in full.subsets() {
            assert_eq!(pdf_min_b2(&mac, &split, g).unwrap(), 0.0);
        }
    }

    #[test]
    fn destination_sum_forms() {
        let mac = cluster();
        let s = Coalition::singleton(0);
        let split = PdfPowerSplit::new(&mac, s, vec![1.0], vec![1.5], vec![2.0]).unwrap();
        let j: f64 = 1.0 + 0.05 * 5.0 + 0.025 * 2.0;
        let want = (1.0 + 0.05 * 4.5 / j).log2();
        assert!((pdf_dest_sum_bound(&mac, &split) - want).abs() < 1e-14);

        let all_u = PdfPowerSplit::new(&mac, pair(), vec![0.0; 2], vec![0.0; 2], vec![5.0, 5.0]).unwrap();
        let want = (1.0 + 0.05 * (5f64.sqrt() + 5f64.sqrt()).powi(2) / 1.05).log2();
        assert!((pdf_dest_sum_bound(&mac, &all_u) - want).abs() < 1e-14);

        let no_u = PdfPowerSplit::new(&mac, pair(), vec![1.0, 0.0], vec![1.0, 2.0], vec![0.0; 2]).unwrap();
        let want = (1.0f64 + 0.05 * 4.0 / 1.05).log2();
        assert!((pdf_dest_sum_bound(&mac, &no_u) - want).abs() < 1e-14);
    }

    #[test]
    fn split_validation() {
        let mac = cluster();
        assert!(PdfPowerSplit::new(&mac, pair(), vec![3.0, 0.0], vec![3.0, 0.0], vec![0.0; 2]).is_err());
        assert!(PdfPowerSplit::new(&mac, pair(), vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(PdfPowerSplit::new(&mac, pair(), vec![-1.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }
}
