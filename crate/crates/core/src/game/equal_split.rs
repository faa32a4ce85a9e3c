use super::coalition::{enumerate_partitions, Coalition, CoalitionStructure};
use super::tu::{TuGame, STRICT_TOL};
use crate::error::{Error, Result};

pub const MAX_EQUAL_SPLIT_K: usize = 8;

/// First coalition (ascending mask) whose members would all strictly gain by
/// leaving their blocks and splitting its value equally, if any.
pub fn equal_split_deviation(g: &TuGame, cs: &CoalitionStructure) -> Option<Coalition> {
    let current: Vec<f64> = (0..g.k())
        .map(|i| {
            let b = cs.block_of(i);
            g.value(b) / b.len() as f64
        })
        .collect();
    Coalition::all_nonempty(g.k()).find(|&d| {
        let share = g.value(d) / d.len() as f64;
        d.members().iter().all(|&i| share > current[i] + STRICT_TOL)
    })
}

/// All coalition structures with no profitable equal-split group deviation.
pub fn equal_split_stable_structures(g: &TuGame) -> Result<Vec<CoalitionStructure>> {
    if g.k() > MAX_EQUAL_SPLIT_K {
        return Err(Error::KTooLarge {
            k: g.k(),
            max: MAX_EQUAL_SPLIT_K,
        });
    }
    Ok(enumerate_partitions(g.k())?
        .filter(|cs| equal_split_deviation(g, cs).is_none())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_link_is_stable() {
        let g = TuGame::from_values(1, vec![0.0, 1.0]).unwrap();
        let s = equal_split_stable_structures(&g).unwrap();
        assert_eq!(s, vec![CoalitionStructure::singletons(1)]);
    }

    #[test]
    fn symmetric_superadditive_prefers_grand() {
        let g = TuGame::from_fn(3, |s| (s.len() * s.len()) as f64).unwrap();
        let s = equal_split_stable_structures(&g).unwrap();
        assert_eq!(s, vec![CoalitionStructure::grand(3)]);
    }

    #[test]
    fn strong_player_leaves() {
        // link 0 alone earns 3, any coalition with it splits 4 at most
        let g = TuGame::from_fn(2, |s| match s.mask() {
            0b01 => 3.0,
            0b10 => 0.5,
            _ => 3.2,
        })
        .unwrap();
        let s = equal_split_stable_structures(&g).unwrap();
        assert_eq!(s, vec![CoalitionStructure::singletons(2)]);
    }

    #[test]
    fn k_limit() {
        let g = TuGame::from_fn(9, |s| s.len() as f64).unwrap();
        assert!(matches!(
            equal_split_stable_structures(&g),
            Err(Error::KTooLarge { k: 9, .. })
        ));
    }
}
