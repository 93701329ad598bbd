use std::collections::HashSet;

use geneo::grid::{mask_of, read_grid, write_grid};
use geneo::sampling::{corrupt, observe, percent_count, sample_uniform, SamplingSpec};
use geneo::GridSignal;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(seed: u64, w: usize, h: usize) -> GridSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridSignal::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

#[test]
fn full_size_sample_and_corruption_counts() {
    let gt = noise(1, 270, 270);
    for (m, expected) in [(1.0, 729), (3.0, 2187)] {
        let s = sample_uniform(&gt, &SamplingSpec::new(m, 0.0, 5).unwrap()).unwrap();
        assert_eq!(s.len(), expected);
        assert_eq!(mask_of(&s).count_ones(), expected);
    }
    let clean = sample_uniform(&gt, &SamplingSpec::new(3.0, 0.0, 5).unwrap()).unwrap();
    // floor(0.15 * 2187) = floor(328.05), floor(0.30 * 2187) = floor(656.1)
    for (q, expected) in [(15.0, 328), (30.0, 656)] {
        let dirty = corrupt(&clean, &SamplingSpec::new(3.0, q, 5).unwrap()).unwrap();
        let changed = clean
            .samples()
            .iter()
            .zip(dirty.samples())
            .filter(|(a, b)| a.value != b.value)
            .count();
        assert_eq!(changed, expected);
        assert_eq!(percent_count(q, clean.len()), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observations_follow_the_floor_rule(
        seed in any::<u64>(),
        w in 1usize..40,
        h in 1usize..40,
        m in 1.0f64..=100.0,
        q in 0.0f64..=100.0,
    ) {
        let gt = noise(seed, w, h);
        let k = percent_count(m, w * h);
        let spec = SamplingSpec::new(m, q, seed).unwrap();
        let obs = observe(&gt, &spec);
        if k == 0 {
            prop_assert!(obs.is_err());
            return Ok(());
        }
        let obs = obs.unwrap();
        prop_assert_eq!(obs.len(), k);
        let coords: HashSet<_> = obs.samples().iter().map(|s| s.coord).collect();
        prop_assert_eq!(coords.len(), k);
        prop_assert!(obs.samples().windows(2).all(|p| p[0].coord.row_major_key() < p[1].coord.row_major_key()));
        let changed = obs.samples().iter().filter(|s| s.value != gt.at(s.coord)).count();
        prop_assert_eq!(changed, percent_count(q, k));
        prop_assert_eq!(&obs, &observe(&gt, &spec).unwrap());
    }

    #[test]
    fn grid_files_round_trip(seed in any::<u64>(), w in 1usize..33, h in 1usize..33) {
        // single-precision storage: values that are already f32 survive exactly
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GridSignal::new(w, h, (0..w * h).map(|_| rng.gen::<f32>() as f64).collect()).unwrap();
        prop_assert_eq!(read_grid(&write_grid(&g)).unwrap(), g);
    }
}
