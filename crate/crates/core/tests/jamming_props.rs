use coalition_core::channel::InterferenceChannel;
use coalition_core::game::Coalition;
use coalition_core::jamming::{tx_game, value_tx_jamming, SaddleConfig};
use proptest::prelude::*;

fn ic(k: usize) -> impl Strategy<Value = InterferenceChannel> {
    (
        prop::collection::vec(prop::collection::vec(0.0..1.0f64, k), k),
        prop::collection::vec(0.5..2.0f64, k),
    )
        .prop_map(|(g, p)| InterferenceChannel::new(g, p, 1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn jamming_power_never_helps(ic in (2usize..=3).prop_flat_map(ic), boost in 1.1..4.0f64) {
        let k = ic.k();
        let cfg = SaddleConfig::default();
        let s = Coalition::singleton(0);
        let mut p = ic.powers().to_vec();
        for j in 1..k {
            p[j] *= boost;
        }
        let loud = ic.with_powers(p).unwrap();
        let a = value_tx_jamming(&ic, s, &cfg).unwrap();
        let b = value_tx_jamming(&loud, s, &cfg).unwrap();
        prop_assert!(a.converged && b.converged);
        prop_assert!(b.value_bits <= a.value_bits + 2.0 * cfg.tol);
    }

    #[test]
    fn bounds_bracket_value(ic in (2usize..=3).prop_flat_map(ic), mask in 1u32..8) {
        let s = Coalition::from_mask(mask & ((1 << ic.k()) - 1));
        prop_assume!(!s.is_empty());
        let r = value_tx_jamming(&ic, s, &SaddleConfig::default()).unwrap();
        prop_assert!(r.lower_bits <= r.value_bits + 1e-15 && r.value_bits <= r.upper_bits + 1e-15);
        prop_assert!(r.gap_bits() <= 1e-7);
    }

    #[test]
    fn transmitter_game_is_cohesive(ic in ic(3)) {
        let tg = tx_game(&ic, &SaddleConfig::default()).unwrap();
        tg.require_converged().unwrap();
        prop_assert!(tg.game.is_cohesive_within(1e-4).unwrap().holds());
    }
}
