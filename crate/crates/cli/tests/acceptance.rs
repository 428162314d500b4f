//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::process::Command;
use std::time::Instant;

use dhom::diagonal::{
    cascade_plane, match_distance, plane_equivalence_residual, run, DiagonalProblem, Mode, RandomData,
    RunOptions, WitnessSuperset,
};
use dhom::fixtures::{random_dense, Example};
use dhom::linalg::{basis_efg, particular_solution_epsilon, singular_values, CMat, CVec, C64};
use dhom::random::{random_matrix, random_unit, random_vector, seeded_rng};
use dhom::tracker::PathStatus;
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn max_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn intrinsic(ex: Example, seed: u64) -> Result<(DiagonalProblem, WitnessSuperset, f64), String> {
    let p = ex.problem(seed).map_err(|e| e.to_string())?;
    let clock = Instant::now();
    let s = run(&p, Mode::Intrinsic, &RunOptions::default()).map_err(|e| e.to_string())?;
    Ok((p, s, clock.elapsed().as_secs_f64()))
}

fn criterion_1() -> Check {
    let (p, s, secs) = intrinsic(Example::CylinderSphere, 0)?;
    if (p.hmax(), p.h0()) != (2, 1) {
        return Err(format!("levels {}..{}", p.hmax(), p.h0()));
    }
    let level = s.level(1).ok_or("no dim-1 level")?;
    let ws = s.witness_sets.iter().find(|w| w.dim() == 1).ok_or("no dim-1 witness set")?;
    let mut worst = 0.0f64;
    for x in &level.candidates {
        let f = p.f_a().evaluate(x.as_slice()).map_err(|e| e.to_string())?;
        let g = p.f_b().evaluate(x.as_slice()).map_err(|e| e.to_string())?;
        let l = ws.slice().evaluate(x);
        worst = worst.max(max_norm(&f)).max(max_norm(&g)).max(max_norm(&l));
    }
    ensure(
        level.count() == 4 && worst <= 1e-8 && level.max_diagonal_gap <= 1e-6 && secs < 5.0,
        format!(
            "{} dim-1 candidates, residual {worst:.1e}, |u-v| {:.1e}, {secs:.2} s",
            level.count(),
            level.max_diagonal_gap
        ),
    )
}

fn criterion_2() -> Check {
    let (_, s, _) = intrinsic(Example::CylinderSphere, 0)?;
    let shape: Vec<(usize, usize)> = s.stages.iter().map(|st| (st.paths, st.converged)).collect();
    let all = s.stages.iter().flat_map(|st| &st.statuses).all(|&st| st == PathStatus::Converged);
    ensure(shape == [(4, 4), (4, 4)] && all, format!("(paths, converged) per stage {shape:?}"))
}

fn criterion_3() -> Check {
    let (_, s, secs) = intrinsic(Example::CoordinatePlanes, 0)?;
    let zero = s.level(0).map(|l| l.candidates.clone()).unwrap_or_default();
    let dist = zero.first().map_or(f64::INFINITY, max_norm);
    ensure(
        s.stages.len() == 3 && s.count(1) == 0 && zero.len() == 1 && dist <= 1e-6 && secs < 5.0,
        format!(
            "{} stages, dim 1: {}, dim 0: {} at distance {dist:.1e} from origin, {secs:.2} s",
            s.stages.len(),
            s.count(1),
            zero.len()
        ),
    )
}

fn criterion_4() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for ex in [Example::CylinderSphere, Example::CoordinatePlanes] {
        let p = ex.problem(0).map_err(|e| e.to_string())?;
        let i = run(&p, Mode::Intrinsic, &RunOptions::default()).map_err(|e| e.to_string())?;
        let e = run(&p, Mode::Extrinsic, &RunOptions::default()).map_err(|e| e.to_string())?;
        let d = match_distance(&i, &e);
        ok &= d <= 1e-6;
        parts.push(format!("example {ex}: {d:.1e}"));
    }
    ensure(ok, format!("match distance {}", parts.join(", ")))
}

/// Random cascade data in the shape used by a run with dimensions `k, a, b`.
fn random_data(rng: &mut impl Rng, k: usize, a: usize, b: usize) -> RandomData {
    let abb = random_matrix(rng, a + b, k);
    let mut am = CMat::zeros(a + b, 2 * k);
    am.view_mut((0, 0), (a + b, k)).copy_from(&abb);
    am.view_mut((0, k), (a + b, k)).copy_from(&(-&abb));
    let bm = random_matrix(rng, a + b, k);
    let c = random_matrix(rng, k, 2 * k);
    let d = random_vector(rng, k);
    let epsilon = particular_solution_epsilon(&c, &d).expect("generic data").epsilon;
    RandomData {
        m: CMat::zeros(k - a, 1),
        n: CMat::zeros(k - b, 1),
        abb,
        a: am,
        b: bm,
        c,
        d,
        epsilon,
        gamma_start: random_unit(rng),
        gamma_cascade: (0..=k).map(|_| random_unit(rng)).collect(),
    }
}

fn criterion_5() -> Check {
    let clock = Instant::now();
    let mut rng = seeded_rng(0xacce);
    let (mut l22, mut l23, mut l24) = (0.0f64, 0.0f64, 0.0f64);
    let mut min_sigma = f64::INFINITY;
    for _ in 0..100 {
        let k: usize = rng.random_range(2..=8);
        let a = rng.random_range(1..k);
        let b = rng.random_range(1..=a);
        // a < k, so there are always at least two levels
        let (hmin, hmax) = ((a + b).saturating_sub(k), b);
        let rd = random_data(&mut rng, k, a, b);
        l22 = l22.max((&rd.a * &rd.epsilon).norm()).max((&rd.c * &rd.epsilon + &rd.d).norm());
        let i = rng.random_range(hmin + 1..=hmax);
        let j = rng.random_range(hmin..i);
        let (yi, yj) = (rd.y_h(i), rd.y_h(j));
        let efg = basis_efg(&yi, &yj, &rd.c, j, i).map_err(|e| format!("k={k} a={a} b={b} i={i} j={j}: {e}"))?;
        let m = 2 * k - a - b;
        let ef = CMat::from_columns(&efg.e.column_iter().chain(efg.f.column_iter()).collect::<Vec<_>>());
        let eg = CMat::from_columns(&efg.e.column_iter().chain(efg.g.column_iter()).collect::<Vec<_>>());
        if ef.ncols() != m || eg.ncols() != m {
            return Err(format!("basis sizes {} and {}, expected {m}", ef.ncols(), eg.ncols()));
        }
        // full column rank, so the bases span the whole null spaces
        for s in [singular_values(&ef), singular_values(&eg)] {
            min_sigma = min_sigma.min(s.iter().copied().fold(f64::INFINITY, f64::min));
        }
        let id = CMat::identity(i - j, i - j);
        let cond3 = ((&rd.c * &efg.f).rows(j, i - j) - &id).norm().max(((&rd.c * &efg.g).rows(j, i - j) - &id).norm());
        l23 = l23.max((&yi * &ef).norm()).max((&yj * &eg).norm()).max(cond3);
        let plane = cascade_plane(&rd, i, j).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let t: f64 = rng.random();
            let y = random_vector(&mut rng, m);
            l24 = l24.max(plane_equivalence_residual(&rd, &plane, t, &y));
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    ensure(
        l22 <= 1e-10 && l23 <= 1e-10 && l24 <= 1e-8 && min_sigma > 1e-8 && secs < 60.0,
        format!(
            "particular solution {l22:.1e}, null-space bases {l23:.1e} (min σ {min_sigma:.1e}), plane equivalence {l24:.1e}, {secs:.2} s"
        ),
    )
}

fn criterion_6() -> Check {
    let m: Vec<usize> = [Example::CylinderSphere, Example::CoordinatePlanes, Example::Synthetic3]
        .into_iter()
        .map(|ex| ex.problem(0).map(|p| p.m()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let p = Example::Synthetic3.problem(0).map_err(|e| e.to_string())?;
    ensure(
        m == [2, 4, 2] && (p.k(), p.a(), p.b()) == (5, 4, 4),
        format!("m = {}, {}, {} (synthetic k={} a={} b={})", m[0], m[1], m[2], p.k(), p.a(), p.b()),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn criterion_7() -> Check {
    let p = Example::Synthetic3.problem(0).map_err(|e| e.to_string())?;
    let (mut ti, mut te) = (Vec::new(), Vec::new());
    let mut same_paths = true;
    for _ in 0..5 {
        let i = run(&p, Mode::Intrinsic, &RunOptions::default()).map_err(|e| e.to_string())?;
        let e = run(&p, Mode::Extrinsic, &RunOptions::default()).map_err(|e| e.to_string())?;
        same_paths &= i.total_paths() == e.total_paths();
        ti.push(i.total_seconds);
        te.push(e.total_seconds);
    }
    let (mi, me) = (median(ti), median(te));
    ensure(
        same_paths && mi <= me,
        format!(
            "median intrinsic {mi:.3} s, extrinsic {me:.3} s, ratio {:.2} (reference 34.70/15.84 = {:.2})",
            me / mi,
            34.70 / 15.84
        ),
    )
}

fn criterion_8() -> Check {
    let mut rng = seeded_rng(0x8);
    let mut worst_fd = 0.0f64;
    for _ in 0..50 {
        let k: usize = rng.random_range(2..=5);
        let deg = rng.random_range(1..=4);
        let f = random_dense(&mut rng, k, deg);
        let x = random_vector(&mut rng, k);
        let jac = f.jacobian(x.as_slice()).map_err(|e| e.to_string())?;
        let h = 1e-6;
        for c in 0..k {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += C64::new(h, 0.0);
            xm[c] -= C64::new(h, 0.0);
            let fd = (f.evaluate(xp.as_slice()).unwrap() - f.evaluate(xm.as_slice()).unwrap()) / C64::new(2.0 * h, 0.0);
            let exact = jac.column(c);
            worst_fd = worst_fd.max((fd - exact).norm() / (1.0 + exact.norm()));
        }
    }

    let p = Example::CylinderSphere.problem(0).map_err(|e| e.to_string())?;
    let base = RunOptions::default();
    let mut halved = base;
    halved.track.max_step /= 2.0;
    halved.track.initial_step /= 2.0;
    halved.track.min_step /= 2.0;
    let x = run(&p, Mode::Intrinsic, &base).map_err(|e| e.to_string())?;
    let y = run(&p, Mode::Intrinsic, &halved).map_err(|e| e.to_string())?;
    let halving = match_distance(&x, &y);

    let z = run(&p, Mode::Intrinsic, &base).map_err(|e| e.to_string())?;
    let counts = |s: &WitnessSuperset| s.levels.iter().map(|l| l.count()).collect::<Vec<_>>();
    let repeat = match_distance(&x, &z);
    ensure(
        worst_fd <= 1e-6 && halving <= 1e-8 && counts(&x) == counts(&z) && repeat <= 1e-14,
        format!("finite differences {worst_fd:.1e}, step halving {halving:.1e}, repeat {repeat:.1e}"),
    )
}

fn criterion_9() -> Check {
    let p = Example::Disjoint.problem(0).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for mode in [Mode::Intrinsic, Mode::Extrinsic] {
        let s = run(&p, mode, &RunOptions::default()).map_err(|e| e.to_string())?;
        let last = s.stages.last().ok_or("no stages")?;
        ok &= s.is_empty() && last.statuses.iter().all(|&st| st == PathStatus::Diverged) && s.failed_paths == 0;
        parts.push(format!("{mode:?} cascade {}/{} diverged", last.diverged, last.paths));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_dhom"))
        .args(["intersect", "--example", "containment"])
        .env_remove("DHOM_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let code = out.status.code();
    ok &= code == Some(3) && text.contains("A∩B = B") && !text.contains("stage");
    parts.push(format!("containment exit {code:?}"));
    ensure(ok, format!("disjoint empty; {}", parts.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("cylinder/sphere witness points", criterion_1),
        ("cylinder/sphere stages and paths", criterion_2),
        ("coordinate planes need the cascade", criterion_3),
        ("intrinsic/extrinsic equivalence", criterion_4),
        ("null-space and plane identities", criterion_5),
        ("variable counts", criterion_6),
        ("timing direction", criterion_7),
        ("tracker invariants", criterion_8),
        ("degenerate inputs", criterion_9),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {tag} {name}: {detail}", n + 1);
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
