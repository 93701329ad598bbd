use geneo::scenario::{
    dbm_to_watts, noise_power, normalize_sinr, sinr, synth_urban, Building, PowerStack,
    RadioParams, RawGrid, PATH_LOSS_EXPONENT, WALL_LOSS_DB,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Proper crossing of segment `p-q` with segment `a-b`.
fn segments_cross(p: (f64, f64), q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let orient = |u: (f64, f64), v: (f64, f64), w: (f64, f64)| {
        (v.0 - u.0) * (w.1 - u.1) - (v.1 - u.1) * (w.0 - u.0)
    };
    let (d1, d2) = (orient(a, b, p), orient(a, b, q));
    let (d3, d4) = (orient(p, q, a), orient(p, q, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Walls hit by the segment, one edge of the footprint outline at a time.
fn walls_by_edges(b: &Building, p: (f64, f64), q: (f64, f64)) -> u32 {
    let (x0, y0, x1, y1) = (
        b.x0 as f64 - 0.5,
        b.y0 as f64 - 0.5,
        b.x1 as f64 - 0.5,
        b.y1 as f64 - 0.5,
    );
    let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    (0..4)
        .filter(|&i| segments_cross(p, q, corners[i], corners[(i + 1) % 4]))
        .count() as u32
}

#[test]
fn wall_counts_match_edge_intersections() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20_000 {
        let (x0, y0) = (rng.gen_range(0..20), rng.gen_range(0..20));
        let b = Building {
            x0,
            y0,
            x1: x0 + rng.gen_range(1..8),
            y1: y0 + rng.gen_range(1..8),
        };
        // off-lattice endpoints keep the configuration generic
        let mut pt = || (rng.gen_range(-2.0..30.0), rng.gen_range(-2.0..30.0));
        let (p, q) = (pt(), pt());
        assert_eq!(
            b.walls_crossed(p, q),
            walls_by_edges(&b, p, q),
            "{b:?} {p:?} {q:?}"
        );
    }
}

#[test]
fn scene_powers_follow_the_link_budget() {
    let params = RadioParams {
        n_tx: 3,
        ..RadioParams::default()
    };
    let scene = synth_urban(42, 48, 40, &params, 12).unwrap();
    let p_tx = dbm_to_watts(params.tx_power_dbm);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..300 {
        let (x, y) = (rng.gen_range(0..48), rng.gen_range(0..40));
        for (k, &(tx, ty)) in scene.transmitters.iter().enumerate() {
            let d = ((x as f64 - tx as f64).powi(2) + (y as f64 - ty as f64).powi(2))
                .sqrt()
                .max(1.0);
            let walls: u32 = scene
                .buildings
                .iter()
                .map(|b| b.walls_crossed((tx as f64, ty as f64), (x as f64, y as f64)))
                .sum();
            let db = -10.0 * PATH_LOSS_EXPONENT * d.log10() - WALL_LOSS_DB * walls as f64;
            let expected = p_tx * 10f64.powf(db / 10.0);
            let got = scene.powers.at(x, y)[k];
            assert!(
                (got - expected).abs() <= 1e-12 * expected,
                "{got} vs {expected}"
            );
        }
    }
}

#[test]
fn scenes_do_not_depend_on_thread_count() {
    let params = RadioParams::default();
    let build = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| synth_urban(7, 128, 128, &RadioParams { n_tx: 10, ..params }, 40).unwrap())
    };
    let (one, four) = (build(1), build(4));
    let bits = |s: &geneo::scenario::UrbanScene| {
        s.powers
            .powers()
            .iter()
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&one), bits(&four));
    assert_eq!(bits(&one), bits(&build(1)));
}

#[test]
fn noise_floor_scales_with_bandwidth() {
    let base = RadioParams::default();
    let wide = RadioParams {
        bandwidth: 2.0 * base.bandwidth,
        ..base
    };
    assert_eq!(noise_power(&wide), 2.0 * noise_power(&base));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinr_matches_per_pixel_formula(seed in any::<u64>(), n_tx in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (4, 4);
        let p: Vec<f64> = (0..w * h * n_tx).map(|_| rng.gen_range(1e-15..1e-9)).collect();
        let sigma2 = rng.gen_range(1e-14..1e-11);
        let g = sinr(&PowerStack::new(w, h, n_tx, p.clone()).unwrap(), sigma2).unwrap();
        for (i, px) in p.chunks(n_tx).enumerate() {
            let strongest = px.iter().cloned().fold(f64::MIN, f64::max);
            let others: f64 = px.iter().sum::<f64>() - strongest;
            let expected = strongest / (sigma2 + others);
            prop_assert!((g.values[i] - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn normalization_ignores_affine_rescaling(seed in any::<u64>(), scale in 0.1f64..100.0, shift in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..30).map(|_| rng.gen()).collect();
        let a = normalize_sinr(&RawGrid::new(6, 5, raw.clone()).unwrap()).unwrap();
        let b = normalize_sinr(&RawGrid::new(6, 5, raw.iter().map(|v| scale * v + shift).collect()).unwrap()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert_eq!(a.min_value(), 0.0);
        prop_assert_eq!(a.max_value(), 1.0);
    }
}
