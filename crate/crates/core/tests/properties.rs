use dhom::diagonal::{
    cascade_plane, initialize, match_distance, plane_equivalence_residual, run, Mode, RunOptions,
};
use dhom::fixtures::{random_dense, Example};
use dhom::linalg::{null_space_basis, AffinePlane, CMat, CVec, RANK_TOL};
use dhom::membership::member;
use dhom::random::{random_matrix, random_vector, seeded_rng};
use dhom::tracker::TrackSettings;
use dhom::witness::witness_hypersurface;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

fn max_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn null_basis_is_orthonormal_kernel(seed in any::<u64>(), rows in 1usize..6, extra in 0usize..5) {
        let mut rng = seeded_rng(seed);
        let m = random_matrix(&mut rng, rows, rows + extra);
        let n = null_space_basis(&m, RANK_TOL);
        prop_assert_eq!(n.ncols(), extra);
        prop_assert!((&m * &n).norm() <= 1e-10 * m.norm());
        let gram = n.adjoint() * &n;
        prop_assert!((gram - CMat::identity(extra, extra)).norm() <= 1e-12);
    }

    #[test]
    fn plane_embed_project_round_trip(seed in any::<u64>(), n in 2usize..8, d in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let d = d.min(n - 1);
        let plane = AffinePlane::new(random_vector(&mut rng, n), random_matrix(&mut rng, n, d)).unwrap();
        let y = random_vector(&mut rng, d);
        let x = plane.embed(&y).unwrap();
        let back = plane.project(&x, 1e-8).unwrap();
        prop_assert!((plane.embed(&back).unwrap() - x).norm() <= 1e-10);
    }

    #[test]
    fn plane_equivalence_on_random_runs(seed in any::<u64>()) {
        // random data from a real problem, at a random level pair
        let p = Example::CoordinatePlanes.problem(seed).unwrap();
        let rd = initialize(&p).unwrap();
        let mut rng = seeded_rng(seed);
        let i = rng.random_range(p.h0() + 1..=p.hmax());
        let j = rng.random_range(p.h0()..i);
        let plane = cascade_plane(&rd, i, j).unwrap();
        for _ in 0..10 {
            let t: f64 = rng.random();
            let y = random_vector(&mut rng, p.m());
            prop_assert!(plane_equivalence_residual(&rd, &plane, t, &y) <= 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn hypersurface_degree_is_total_degree(seed in any::<u64>(), k in 1usize..5, deg in 1u32..6) {
        let mut rng = seeded_rng(seed);
        let f = random_dense(&mut rng, k, deg);
        let first = f.polynomials()[0].clone();
        let single = dhom::polysys::PolySystem::new(f.variable_names().to_vec(), vec![first]).unwrap();
        let ws = witness_hypersurface(&single, seed).unwrap();
        prop_assert_eq!(ws.degree(), single.max_degree() as usize);
        // large roots of high-degree polynomials carry rounding in proportion
        // to their size, so the bound scales like the construction check
        for x in ws.points() {
            prop_assert!(ws.residual(x).unwrap() <= 1e-8 * (1.0 + max_norm(x)));
        }
    }

    #[test]
    fn cascade_runs_are_consistent(seed in 0u64..1000, ex in prop::sample::select(vec![Example::CylinderSphere, Example::CoordinatePlanes])) {
        let p = ex.problem(seed).unwrap();
        let opts = RunOptions::default();
        let i = run(&p, Mode::Intrinsic, &opts).unwrap();
        let e = run(&p, Mode::Extrinsic, &opts).unwrap();
        // intrinsic paths live in C^m, extrinsic ones in C^{3k}
        prop_assert_eq!(i.tracked_vars, p.m());
        prop_assert_eq!(e.tracked_vars, 3 * p.k());
        prop_assert!(match_distance(&i, &e) <= 1e-6);
        for s in [&i, &e] {
            prop_assert_eq!(s.failed_paths, 0);
            for l in &s.levels {
                prop_assert_eq!(l.slack_disagreements, 0);
                prop_assert!(l.max_residual <= 1e-6);
                prop_assert!(l.max_diagonal_gap <= 1e-6);
            }
            for ws in &s.witness_sets {
                for x in ws.points() {
                    prop_assert!(max_norm(&p.f_a().evaluate(x.as_slice()).unwrap()) <= 1e-6);
                    prop_assert!(max_norm(&p.f_b().evaluate(x.as_slice()).unwrap()) <= 1e-6);
                    prop_assert!(max_norm(&ws.slice().evaluate(x)) <= 1e-6);
                }
            }
        }
        prop_assert_eq!(i.count(1), if ex == Example::CylinderSphere { 4 } else { 0 });
    }

    #[test]
    fn witness_points_are_members_of_their_set(seed in 0u64..1000) {
        for ex in Example::ALL {
            let (a, b) = ex.witness_sets(seed).unwrap();
            for ws in [&a, &b] {
                for (n, x) in ws.points().iter().enumerate() {
                    let r = member(ws, x, 1e-6, seed ^ n as u64, &TrackSettings::default()).unwrap();
                    prop_assert!(r.member, "{} point {}", ex, n);
                }
            }
        }
    }
}

#[test]
fn large_root_of_quintic_passes_construction() {
    let seed = 13513983876363918866;
    let mut rng = seeded_rng(seed);
    let f = random_dense(&mut rng, 2, 5);
    let single = dhom::polysys::PolySystem::new(f.variable_names().to_vec(), vec![f.polynomials()[0].clone()]).unwrap();
    let ws = witness_hypersurface(&single, seed).unwrap();
    assert_eq!(ws.degree(), 5);
    assert!(ws.points().iter().any(|x| max_norm(x) > 10.0));
    for x in ws.points() {
        assert!(ws.residual(x).unwrap() <= 1e-8 * (1.0 + max_norm(x)));
    }
}
