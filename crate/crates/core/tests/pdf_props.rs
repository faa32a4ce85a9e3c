use coalition_core::channel::ClusteredMac;
use coalition_core::game::{partitions_of, Coalition};
use coalition_core::pdf::{
    jamming_level, pdf_bound_b1, pdf_bound_b2, pdf_dest_sum_bound, pdf_min_b2, pdf_rate_region,
    region_contains, PdfPowerSplit, RateRegionSamples, Receiver, RegionConfig,
};
use coalition_core::verify::cluster_mac;
use proptest::prelude::*;

fn clustered(k: usize) -> impl Strategy<Value = ClusteredMac> {
    (
        prop::collection::vec(0.01..0.1f64, k),
        prop::collection::vec(0.05..1.0f64, k * k),
        prop::collection::vec(0.5..5.0f64, k),
    )
        .prop_map(move |(hd, extra, p)| {
            let hu = (0..k)
                .map(|m| (0..k).map(|j| if m == j { 0.0 } else { hd[j] + extra[m * k + j] }).collect())
                .collect();
            ClusteredMac::new(hd, hu, p).unwrap()
        })
}

fn fractions(n: usize) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), n)
}

fn split(mac: &ClusteredMac, s: Coalition, f: &[(f64, f64, f64)]) -> PdfPowerSplit {
    let (mut pd, mut pc, mut pu) = (vec![], vec![], vec![]);
    for (r, &k) in s.members().iter().enumerate() {
        let (a, b, c) = f[r];
        let t = (a + b + c).max(1.0);
        let p = mac.power(k);
        pd.push(p * a / t);
        pc.push(if s.len() == 1 { 0.0 } else { p * b / t });
        pu.push(p * c / t);
    }
    PdfPowerSplit::new(mac, s, pd, pc, pu).unwrap()
}

/// Min over decoder-labelled partitions by peeling off the block holding the
/// lowest remaining member.
fn min_b2_oracle(mac: &ClusteredMac, sp: &PdfPowerSplit, g: &[usize]) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    let s = sp.coalition();
    let members = s.members();
    let (head, rest) = (g[0], &g[1..]);
    let mut best = f64::INFINITY;
    for bits in 0..1u32 << rest.len() {
        let mut block = vec![head];
        let mut left = vec![];
        for (i, &x) in rest.iter().enumerate() {
            if bits >> i & 1 == 1 { block.push(x) } else { left.push(x) }
        }
        for &m in members.iter().filter(|m| !block.contains(m)) {
            let jam = 1.0 + (0..mac.k()).filter(|j| !s.contains(*j)).map(|j| mac.hu(m, j) * mac.power(j)).sum::<f64>();
            let leak: f64 = members.iter().filter(|&&j| j != m).map(|&j| mac.hu(m, j) * sp.pd(j)).sum();
            let num: f64 = block.iter().map(|&i| mac.hu(m, i) * sp.pc(i)).sum();
            let term = (1.0 + num / (jam + leak)).log2();
            best = best.min(term + min_b2_oracle(mac, sp, &left));
        }
    }
    best
}

#[test]
fn cluster_levels_and_bounds() {
    let mac = cluster_mac().unwrap();
    let pair = Coalition::from_members(&[0, 1]);
    assert!((jamming_level(&mac, pair, Receiver::Member(0)) - 1.2).abs() < 1e-15);
    assert!((jamming_level(&mac, pair, Receiver::Destination) - 1.05).abs() < 1e-15);
    let sp = PdfPowerSplit::cooperative(&mac, pair, vec![5.0 / 6.0; 2]).unwrap();
    let g = Coalition::singleton(0);
    let want = (1.0f64 + (5.0 / 6.0) / 1.2).log2();
    assert!((pdf_bound_b2(&mac, &sp, g, &[(g, 1)]).unwrap() - want).abs() < 1e-14);
    // two users, equal direct gains, everything on the common stream
    let all_u = PdfPowerSplit::new(&mac, pair, vec![0.0; 2], vec![0.0; 2], vec![5.0; 2]).unwrap();
    let want = (1.0f64 + 0.05 * (2.0 * 5f64.sqrt()).powi(2) / 1.05).log2();
    assert!((pdf_dest_sum_bound(&mac, &all_u) - want).abs() < 1e-14);
}

#[test]
fn cluster_verdict_survives_refinement() {
    let mac = cluster_mac().unwrap();
    let pair = Coalition::from_members(&[0, 1]);
    for grid in [20, 40] {
        let cfg = RegionConfig::with_grid(grid).fix(0, 5.0 / 6.0).fix(1, 5.0 / 6.0);
        let pr = pdf_rate_region(&mac, pair, &cfg).unwrap();
        let gc = pdf_rate_region(&mac, Coalition::full(3), &RegionConfig::with_grid(grid)).unwrap();
        assert!(region_contains(&pr, &gc, &[0, 1]).unwrap().is_contained(), "grid {grid}");
        assert!(!region_contains(&gc, &pr, &[0, 1]).unwrap().is_contained(), "grid {grid}");
        // the pair's corner values from the fixed split
        assert!((pr.support(&[1.0, 0.0]) - 0.7608).abs() < 1e-3);
        assert!((gc.support(&[1.0, 0.0, 0.0]) - 3f64.log2() + 1.0).abs() < 1e-9);
    }
}

#[test]
fn zero_power_region_is_the_origin() {
    let mac = ClusteredMac::new(vec![0.05, 0.05], vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1e-300, 1e-300]).unwrap();
    let r = pdf_rate_region(&mac, Coalition::full(2), &RegionConfig::with_grid(4)).unwrap();
    assert!(r.points.iter().flatten().all(|v| v.abs() < 1e-200));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn min_b2_matches_enumeration(mac in clustered(4), f in fractions(4), smask in 3u32..16, gmask in 1u32..16) {
        let s = Coalition::from_mask(smask);
        prop_assume!(s.len() >= 2);
        let g = Coalition::from_mask(gmask).intersection(s);
        prop_assume!(!g.is_empty());
        let sp = split(&mac, s, &f);
        let got = pdf_min_b2(&mac, &sp, g).unwrap();
        let want = min_b2_oracle(&mac, &sp, &g.members());
        prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn min_b2_lower_bounds_every_choice(mac in clustered(3), f in fractions(3), pick in any::<u64>()) {
        let s = Coalition::full(3);
        let sp = split(&mac, s, &f);
        for g in s.subsets().filter(|g| !g.is_empty() && *g != s) {
            let min = pdf_min_b2(&mac, &sp, g).unwrap();
            for (n, parts) in partitions_of(g).into_iter().enumerate() {
                let choice: Vec<(Coalition, usize)> = parts.iter().enumerate().map(|(i, &b)| {
                    let dec = s.difference(b).members();
                    (b, dec[(pick as usize >> (2 * i + n)) % dec.len()])
                }).collect();
                prop_assert!(min <= pdf_bound_b2(&mac, &sp, g, &choice).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn bounds_grow_with_own_power(mac in clustered(3), f in fractions(3), scale in 1.0..2.0f64) {
        let s = Coalition::from_members(&[0, 1]);
        let sp = split(&mac, s, &f);
        let users = 0..2;
        let bigger = PdfPowerSplit::new(&mac, s,
            users.clone().map(|k| sp.pd(k)).collect(),
            users.clone().map(|k| sp.pc(k) * scale).collect(),
            users.map(|k| sp.pu(k)).collect());
        // scaling may exceed the budget; only compare when it fits
        if let Ok(bigger) = bigger {
            for g in s.subsets().filter(|g| !g.is_empty()) {
                prop_assert!(pdf_min_b2(&mac, &bigger, g).unwrap() >= pdf_min_b2(&mac, &sp, g).unwrap() - 1e-12);
                prop_assert!(pdf_bound_b1(&mac, &bigger, g).unwrap() >= pdf_bound_b1(&mac, &sp, g).unwrap() - 1e-12);
            }
            prop_assert!(pdf_dest_sum_bound(&mac, &bigger) >= pdf_dest_sum_bound(&mac, &sp) - 1e-12);
        }
    }

    #[test]
    fn bounds_shrink_with_jammer_power(mac in clustered(3), f in fractions(2), boost in 1.0..3.0f64) {
        let s = Coalition::from_members(&[0, 1]);
        let mut p = mac.powers().to_vec();
        p[2] *= boost;
        let hu = (0..3).map(|m| (0..3).map(|j| mac.hu(m, j)).collect()).collect();
        let loud = ClusteredMac::new((0..3).map(|k| mac.hd(k)).collect(), hu, p).unwrap();
        let sp = split(&mac, s, &f);
        for g in s.subsets().filter(|g| !g.is_empty()) {
            prop_assert!(pdf_min_b2(&loud, &sp, g).unwrap() <= pdf_min_b2(&mac, &sp, g).unwrap() + 1e-12);
            prop_assert!(pdf_bound_b1(&loud, &sp, g).unwrap() <= pdf_bound_b1(&mac, &sp, g).unwrap() + 1e-12);
        }
        prop_assert!(pdf_dest_sum_bound(&loud, &sp) <= pdf_dest_sum_bound(&mac, &sp) + 1e-12);
    }

    #[test]
    fn jammer_free_pair_covers_each_lone_user(mac in clustered(2)) {
        let gc = pdf_rate_region(&mac, Coalition::full(2), &RegionConfig::with_grid(6)).unwrap();
        for k in 0..2 {
            let alone = pdf_rate_region(&mac, Coalition::singleton(k), &RegionConfig::with_grid(6)).unwrap();
            prop_assert!(region_contains(&gc, &alone, &[k]).unwrap().is_contained());
        }
    }

    #[test]
    fn region_csv_roundtrip(mac in clustered(2)) {
        let r = pdf_rate_region(&mac, Coalition::full(2), &RegionConfig::with_grid(5)).unwrap();
        let back = RateRegionSamples::from_csv(&r.to_csv()).unwrap();
        prop_assert_eq!(&back.boundary, &r.boundary);
        prop_assert_eq!(back.points.len(), r.points.len());
    }
}
