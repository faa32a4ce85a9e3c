use rand::Rng;

use super::region::{polytope_vertices, rank_rows, weight_fan};
use super::{
    check_coalition, cooperative_constraints, pdf_bound_b1, pdf_dest_sum_bound, pdf_min_b2,
    PdfPowerSplit,
};
use crate::channel::ClusteredMac;
use crate::error::Result;
use crate::game::simplex::{LinearProgram, Relation};
use crate::game::{Check, Coalition};

/// `max w.R` over `{R >= 0 : rows}`.
pub fn polytope_weighted_max(rows: &[(Vec<f64>, f64)], w: &[f64]) -> Result<f64> {
    let mut lp = LinearProgram::new(w.len());
    for (a, b) in rows {
        lp.add(a.clone(), Relation::Le, *b);
    }
    Ok(lp.maximize(w, 1e-9)?.objective)
}

/// Largest `w.R` in the polytope of a split that may use direct streams,
/// with each rate split into a direct part and a cooperative part.
pub fn pd_positive_weighted_max(mac: &ClusteredMac, split: &PdfPowerSplit, w: &[f64]) -> Result<f64> {
    let s = split.coalition();
    let members = s.members();
    let d = members.len();
    let ind = |g: Coalition, offset: usize| {
        let mut a = vec![0.0; 2 * d];
        for (r, &k) in members.iter().enumerate() {
            if g.contains(k) {
                a[offset + r] = 1.0;
            }
        }
        a
    };
    let mut lp = LinearProgram::new(2 * d);
    for g in s.subsets() {
        lp.add(ind(g, 0), Relation::Le, pdf_bound_b1(mac, split, g)?);
        let b2 = if d == 1 { 0.0 } else { pdf_min_b2(mac, split, g)? };
        lp.add(ind(g, d), Relation::Le, b2);
    }
    lp.add(vec![1.0; 2 * d], Relation::Le, pdf_dest_sum_bound(mac, split));
    let c: Vec<f64> = w.iter().chain(w).copied().collect();
    Ok(lp.maximize(&c, 1e-9)?.objective)
}

/// Points per axis when the folded split alone does not dominate.
const FALLBACK_GRID: usize = 21;

/// `max w.R` over full-power splits without direct streams, on a grid of
/// cooperative powers.
fn grid_support(mac: &ClusteredMac, s: Coalition, w: &[f64], grid: usize) -> Result<f64> {
    let members = s.members();
    let d = members.len();
    let mut idx = vec![0usize; d];
    let mut best = 0.0f64;
    loop {
        let pc: Vec<f64> = members
            .iter()
            .zip(&idx)
            .map(|(&k, &i)| if d == 1 { 0.0 } else { mac.power(k) * i as f64 / (grid - 1) as f64 })
            .collect();
        let split = PdfPowerSplit::cooperative(mac, s, pc)?;
        for v in polytope_vertices(d, &rank_rows(s, &cooperative_constraints(mac, &split)?)) {
            best = best.max(w.iter().zip(&v).map(|(a, b)| a * b).sum());
        }
        let mut pos = 0;
        loop {
            if pos == d || d == 1 {
                return Ok(best);
            }
            idx[pos] += 1;
            if idx[pos] < grid {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub split: PdfPowerSplit,
    pub weights: Vec<f64>,
    /// `max_{p_d = 0} w.R - max_{p_d > 0} w.R`, negative here.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectStreamReport {
    pub trials: usize,
    pub worst_slack: f64,
    pub check: Check<Counterexample>,
}

/// Draws `trials` splits with a positive direct stream for every member and
/// compares, direction by direction, against the region without direct
/// streams: first the same split with the direct power moved to the
/// cooperative stream, then a grid of full-power splits.
///
/// Outsiders jam at full power, so for a proper coalition a jammed partner
/// can make direct transmission strictly better and the check may fail.
pub fn pdf_direct_stream_check<R: Rng>(
    mac: &ClusteredMac,
    s: Coalition,
    trials: usize,
    directions: usize,
    rng: &mut R,
) -> Result<DirectStreamReport> {
    check_coalition(mac, s)?;
    let members = s.members();
    let fan = weight_fan(members.len(), directions);
    let mut worst = f64::INFINITY;
    let mut first: Option<Counterexample> = None;
    for _ in 0..trials {
        let (mut pd, mut pc, mut pu) = (Vec::new(), Vec::new(), Vec::new());
        for &k in &members {
            let budget = mac.power(k) * rng.gen_range(0.2..=1.0);
            let a: f64 = rng.gen_range(0.01..1.0);
            let b: f64 = if members.len() == 1 { 0.0 } else { rng.gen_range(0.0..1.0) };
            let c: f64 = rng.gen_range(0.0..1.0);
            let t = a + b + c;
            pd.push(budget * a / t);
            pc.push(budget * b / t);
            pu.push(budget * c / t);
        }
        let split = PdfPowerSplit::new(mac, s, pd, pc, pu)?;
        let folded = split.without_direct();
        let rows = rank_rows(s, &cooperative_constraints(mac, &folded)?);
        for w in &fan {
            let target = pd_positive_weighted_max(mac, &split, w)?;
            let mut slack = polytope_weighted_max(&rows, w)? - target;
            if slack < -1e-9 {
                slack = grid_support(mac, s, w, FALLBACK_GRID)? - target;
            }
            if slack < worst {
                worst = slack;
            }
            if slack < -1e-9 && first.is_none() {
                first = Some(Counterexample {
                    split: split.clone(),
                    weights: w.clone(),
                    slack,
                });
            }
        }
    }
    Ok(DirectStreamReport {
        trials,
        worst_slack: worst,
        check: match first {
            Some(c) => Check::Violated(c),
            None => Check::Holds,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdf::tests::cluster;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_direct_split_matches_its_own_polytope() {
        let mac = cluster();
        let s = Coalition::full(3);
        let split = PdfPowerSplit::cooperative(&mac, s, vec![2.0, 1.0, 0.5]).unwrap();
        let rows = rank_rows(s, &cooperative_constraints(&mac, &split).unwrap());
        for w in weight_fan(3, 64) {
            let a = polytope_weighted_max(&rows, &w).unwrap();
            let b = pd_positive_weighted_max(&mac, &split, &w).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn grand_coalition_prefers_no_direct_stream() {
        let mac = cluster();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = pdf_direct_stream_check(&mac, Coalition::full(3), 20, 64, &mut rng).unwrap();
        assert!(r.check.holds(), "{:?}", r.check);
    }

    #[test]
    fn jammed_partner_favours_direct_stream() {
        // user 1 relays for user 2 while user 0 jams it at full power
        let mac = cluster();
        let s = Coalition::from_members(&[1, 2]);
        let direct = PdfPowerSplit::new(&mac, s, vec![1e-3, 2.0], vec![0.0; 2], vec![0.0; 2]).unwrap();
        let w = [0.0, 1.0];
        let got = pd_positive_weighted_max(&mac, &direct, &w).unwrap();
        let best_coop = grid_support(&mac, s, &w, 41).unwrap();
        let j_d: f64 = 1.0 + 0.05 * 5.0;
        let want_direct = (1.0 + 0.025 * 2.0 / j_d).log2();
        let want_coop = (1.0f64 + 0.1 * 2.0 / 6.0).log2();
        assert!((got - want_direct).abs() < 1e-12);
        assert!((best_coop - want_coop).abs() < 1e-12);
        assert!(got > best_coop + 5e-3);
    }
}
