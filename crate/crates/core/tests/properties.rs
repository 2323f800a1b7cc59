//! Map-level invariants: translation, determinism under different pool
//! sizes, distance monotonicity, and config round trips.

use irs_planner::coverage::{cell_edge_points, sinr_map_conventional, sinr_map_irs, SinrMap};
use irs_planner::placement::{optimize_placement, CandidateSpec, Objective};
use irs_planner::{parse_scenario, Position3D, Scenario};
use proptest::prelude::*;

fn coarse(resolution: f64) -> Scenario {
    Scenario {
        grid_resolution: resolution,
        ..Scenario::default()
    }
}

fn translate(s: &Scenario, by: [f64; 3]) -> Scenario {
    let mut t = s.clone();
    t.macro_extent = s.macro_extent.translated(by[0], by[1]);
    t.micro_extent = s.micro_extent.translated(by[0], by[1]);
    t.macro_bs.position = s.macro_bs.position.translated(by);
    t.micro_bs_position = s.micro_bs_position.translated(by);
    t.panel.position = s.panel.position.translated(by);
    t.user_height = s.user_height + by[2];
    t
}

fn assert_maps_close(a: &SinrMap, b: &SinrMap, tol: f64) {
    assert_eq!((a.nx(), a.ny()), (b.nx(), b.ny()));
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!(x == y || (x - y).abs() <= tol, "{x} vs {y}");
    }
}

#[test]
fn translation_leaves_maps_unchanged() {
    let s = Scenario {
        micro_bs_position: Position3D::new(0.0, 100.0, 5.0),
        ..coarse(5.0)
    };
    for by in [
        [37.5, -12.25, 3.0],
        [-400.0, 250.0, -1.0],
        [0.125, 0.0, 0.0],
    ] {
        let t = translate(&s, by);
        assert_maps_close(
            &sinr_map_conventional(&s).unwrap(),
            &sinr_map_conventional(&t).unwrap(),
            1e-9,
        );
        assert_maps_close(&sinr_map_irs(&s).unwrap(), &sinr_map_irs(&t).unwrap(), 1e-9);
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn maps_and_rankings_do_not_depend_on_pool_size() {
    let s = coarse(2.0);
    let spec = CandidateSpec::GridSweep {
        extent: s.micro_extent,
        step: 25.0,
        height: 6.0,
    };
    let run = || {
        (
            sinr_map_conventional(&s).unwrap(),
            sinr_map_irs(&s).unwrap(),
            optimize_placement(&s, &spec, Objective::EdgeMean).unwrap(),
        )
    };
    let single = in_pool(1, run);
    let many = in_pool(7, run);
    let bits = |m: &SinrMap| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&single.0), bits(&many.0));
    assert_eq!(bits(&single.1), bits(&many.1));
    assert_eq!(single.2, many.2);
}

#[test]
fn default_conventional_map_falls_off_along_rays_from_the_bs() {
    // Default scenario with the macro interferer active.
    let s = coarse(1.0);
    let map = sinr_map_conventional(&s).unwrap();
    for (di, dj) in [(1, 0), (0, 1), (1, 1), (2, 1), (1, 3)] {
        let mut prev = f64::INFINITY;
        let (mut i, mut j) = (0, 0);
        while i < map.nx() && j < map.ny() {
            let v = map.get(i, j);
            assert!(v < prev, "ray ({di},{dj}) at ({i},{j})");
            prev = v;
            i += di;
            j += dj;
        }
    }
}

#[test]
fn edge_points_lie_on_the_map() {
    let s = coarse(4.0);
    let map = sinr_map_conventional(&s).unwrap();
    for p in cell_edge_points(&s.micro_extent, s.grid_resolution, s.user_height).unwrap() {
        assert!(map.index_of(&p).is_some(), "{p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interference_free_map_decreases_with_bs_distance(
        bx in 0.0..200.0f64, by in 0.0..200.0f64, bz in 3.0..30.0f64,
    ) {
        let mut s = coarse(20.0);
        s.macro_bs.transmit_power = 0.0;
        s.micro_bs_position = Position3D::new(bx, by, bz);
        let map = sinr_map_conventional(&s).unwrap();
        let mut samples: Vec<(f64, f64)> = (0..map.ny())
            .flat_map(|j| (0..map.nx()).map(move |i| (i, j)))
            .map(|(i, j)| (map.position(i, j).distance_to(&s.micro_bs_position), map.get(i, j)))
            .collect();
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in samples.windows(2) {
            if w[1].0 > w[0].0 * (1.0 + 1e-12) {
                prop_assert!(w[1].1 < w[0].1, "{:?}", w);
            }
        }
    }

    #[test]
    fn config_round_trip(
        power in 0.1..40.0f64,
        height in 0.0..3.0f64,
        x in 0.0..200.0f64, y in 0.0..200.0f64, z in 1.0..20.0f64,
        theta in 0.0..1.5f64,
        mean in any::<bool>(),
        geometric in any::<bool>(),
    ) {
        let mut text = format!(
            "micro_power_irs = {power}\nuser_height = {height}\nirs_position = {x},{y},{z}\nobjective = {}\n",
            if mean { "mean" } else { "min" }
        );
        if geometric {
            text.push_str(&format!("irs_normal = {x},{},-{z}\n", y - 100.0));
        } else {
            text.push_str(&format!("irs_theta_t = {theta}\nirs_theta_r_deg = 30\n"));
        }
        let s = parse_scenario(&text).unwrap();
        prop_assert_eq!(parse_scenario(&s.to_config_string()).unwrap(), s);
    }
}
