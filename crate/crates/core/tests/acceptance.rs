//! Acceptance suite: one PASS/FAIL line per criterion, exact equality
//! throughout. Runs as a plain binary so the lines always reach the output.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use newton_socle::arith::{primitive, q, qr};
use newton_socle::combid::{corollary_3_2_check, detlemma_trials, random_row_stochastic, MinorTable};
use newton_socle::exec::Execution;
use newton_socle::facering::{face_kbar, kbar_quotient, poincare_series, ClosedForm, GradedCone};
use newton_socle::fan::{regularize, sigma_delta_fan};
use newton_socle::grobner::{nondegenerate, MonteCarlo};
use newton_socle::linalg::rank_i64;
use newton_socle::localalg::{jacobian_multiplication_check, part1_suite, socle_newton_order};
use newton_socle::pipeline::{emit_report, regression_family, run_verify_all, Format, PipelineConfig};
use newton_socle::residue::{koszul_random, trace_volume_check, verify_theorem_0_1_part2};
use newton_socle::{Exponent, FaceDescriptor, NewtonOrder, NewtonPolyhedron, Polytope, SparsePoly, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn poly(s: &str, n: usize) -> SparsePoly {
    SparsePoly::parse_any(s, Some(n)).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(limit: Duration, label: &str, f: impl FnOnce() -> T) -> Result<T, String> {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    ensure(took < limit, || format!("{label} took {took:?}, limit {limit:?}"))?;
    Ok(out)
}

fn face_where(d: &NewtonPolyhedron, pred: impl Fn(&FaceDescriptor, Vec<Vec<i64>>) -> bool) -> FaceDescriptor {
    d.interior_compact_faces()
        .into_iter()
        .find(|f| pred(f, f.vertex_subset.iter().map(|&i| d.vertices()[i].0.clone()).collect()))
        .expect("face exists")
}

fn c1_dual_fan() -> Outcome {
    for (s, expect) in [
        ("x1^2 + x2^3", vec![vec![0, 1], vec![1, 0], vec![3, 2]]),
        ("x1^2 + x1*x2 + x2^3", vec![vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 1]]),
    ] {
        let rays = timed(Duration::from_secs(1), s, || {
            let d = NewtonPolyhedron::of(&poly(s, 2)).unwrap();
            let mut r = sigma_delta_fan(&d).unwrap().rays().to_vec();
            r.sort();
            r
        })?;
        ensure(rays == expect, || format!("{s}: rays {rays:?}"))?;
    }
    Ok("both ray sets exact".into())
}

fn c2_newton_order() -> Outcome {
    let d = NewtonPolyhedron::of(&poly("x1^2 + x2^3", 2)).unwrap();
    let nu = d.nu_point(&[1, 1]);
    ensure(nu == NewtonOrder::Finite(qr(5, 6)), || format!("nu(x1 x2) = {nu}"))?;
    for (s, n, expect) in [("x1^2 + x2^3", 2, qr(7, 6)), ("x1^2 + x2^2", 2, q(1)), ("x1^2 + x2^2 + x3^2", 3, qr(3, 2))] {
        let r = timed(Duration::from_secs(5), s, || socle_newton_order(&poly(s, n), None))?.map_err(|e| format!("{s}: {e}"))?;
        ensure(r.nu_socle == expect && r.n_minus_nu_x == expect && r.matches, || {
            format!("{s}: socle order {} vs n - nu {}", r.nu_socle, r.n_minus_nu_x)
        })?;
    }
    Ok("7/6, 1, 3/2".into())
}

fn c3_kbar() -> Outcome {
    let f = poly("x1^2 + x2^3", 2);
    let d = NewtonPolyhedron::of(&f).unwrap();
    let edge = face_where(&d, |f, _| f.dim == 1);
    let k = face_kbar(&f, &d, &edge).map_err(|e| e.to_string())?;
    ensure(
        k.total_dim == 6 && k.socle_basis == vec![Exponent(vec![2, 3])] && k.socle_degree == q(2) && k.matches_prediction(),
        || format!("edge: dim {} socle {:?} at {}", k.total_dim, k.socle_basis, k.socle_degree),
    )?;
    let f = poly("x1^2 + x1*x2 + x2^3", 2);
    let d = NewtonPolyhedron::of(&f).unwrap();
    let vertex = face_where(&d, |f, v| f.dim == 0 && v == vec![vec![1, 1]]);
    let k = face_kbar(&f, &d, &vertex).map_err(|e| e.to_string())?;
    ensure(k.total_dim == 1 && k.socle_degree == q(1), || format!("vertex: dim {} socle degree {}", k.total_dim, k.socle_degree))?;
    Ok("edge dim 6 socle x^2y^3 at 2; vertex dim 1 at 1".into())
}

fn c4_residues() -> Outcome {
    let mut out = vec![];
    let cases: [(&str, Vec<i64>, usize, Option<Q>); 3] = [
        ("x1^2 + x2^3", vec![1, 2], 0, Some(qr(1, 6))),
        ("x1^2 + x2^2", vec![1, 1], 0, Some(qr(1, 4))),
        ("x1^2 + x1*x2 + x2^3", vec![0, 0], 1, None),
    ];
    for (s, h, r, expect) in cases {
        let f = poly(s, 2);
        let d = NewtonPolyhedron::of(&f).unwrap();
        let face = face_where(&d, |fd, _| fd.r(2) == r);
        let h = SparsePoly::monomial(Exponent(h), q(1));
        let res = verify_theorem_0_1_part2(&f, &face, &h, r, None, Execution::default()).map_err(|e| format!("{s}: {e}"))?;
        ensure(res.stable, || format!("{s}: unstable between truncations"))?;
        match expect {
            Some(v) => ensure(res.value == v, || format!("{s}: residue {} expected {v}", res.value))?,
            None => ensure(res.value != q(0), || format!("{s}: residue vanished"))?,
        }
        out.push(format!("{}", res.value));
    }
    Ok(format!("residues {}", out.join(", ")))
}

fn c5_membership() -> Outcome {
    let mut total = 0;
    for f in regression_family() {
        let r = part1_suite(&f, 200, 5, None).map_err(|e| format!("{f}: {e}"))?;
        ensure(r.candidates > 0 && r.samples == 200, || format!("{f}: only {} candidates", r.candidates))?;
        ensure(r.failures.is_empty(), || format!("{f}: {} monomials outside i, e.g. {:?}", r.failures.len(), r.failures[0]))?;
        total += r.samples;
    }
    Ok(format!("{total} memberships, 0 failures"))
}

fn c6_determinants() -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    for rows in 1..=4 {
        for cols in rows..=6 {
            let r = detlemma_trials(rows, cols, 1000, 17, Execution::default()).map_err(|e| e.to_string())?;
            ensure(r.pass, || format!("{rows}x{cols}: {:?}", r.first_counterexample))?;
            checked += r.identities_checked;
            skipped += r.skipped_sets;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for size in 1..=4 {
        for _ in 0..1000 {
            let a = random_row_stochastic(size, &mut rng);
            let Ok(t) = MinorTable::new(a) else { continue };
            let c = corollary_3_2_check(&t).map_err(|e| e.to_string())?;
            ensure(c.ok && c.row_stochastic && c.det_a.as_ref() == Some(&c.ones_column_det), || format!("row-stochastic: {c:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} identities exact, {skipped} index sets skipped as singular"))
}

fn random_cone(rng: &mut ChaCha8Rng) -> (usize, Vec<Vec<i64>>, Vec<Q>) {
    let n = rng.gen_range(2..=3);
    let k = if n == 3 && rng.gen_bool(0.3) { 2 } else { n };
    loop {
        let gens: Vec<Vec<i64>> = (0..k)
            .map(|_| primitive(&(0..n).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>()))
            .collect();
        if gens.iter().all(|g| g.iter().any(|&x| x != 0)) && rank_i64(&gens) == k {
            let alphas = (0..k).map(|_| q(rng.gen_range(1..=4))).collect();
            return (n, gens, alphas);
        }
    }
}

fn c7_poincare() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let (n, gens, alphas) = random_cone(&mut rng);
        let k = gens.len();
        let gc = GradedCone::simplicial(n, &gens, &alphas).map_err(|e| e.to_string())?;
        let top: Q = alphas.iter().sum();
        let ps = poincare_series(&gc, &top).map_err(|e| e.to_string())?;
        let cf = ps.closed_form.as_ref().ok_or("simplicial cone without closed form")?;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        ensure(cf.k_at_infinity == Some(sign), || format!("trial {trial}: P(K)(inf) = {:?}", cf.k_at_infinity))?;
        let counts: BTreeMap<Q, i64> = ps.k_sigma.iter().filter(|g| g.dim != 0).map(|g| (g.degree.clone(), g.dim)).collect();
        ensure(ClosedForm::expand(&cf.numerator_k, &cf.alphas, &top) == counts, || format!("trial {trial}: closed form"))?;
        // P(K)·Π(1 - t^α) by direct multiplication of the counted series
        let mut prod = counts.clone();
        for a in &cf.alphas {
            let mut next = prod.clone();
            for (d, c) in &prod {
                let e = d + a;
                if e <= top {
                    *next.entry(e).or_insert(0) -= c;
                }
            }
            prod = next;
        }
        prod.retain(|_, c| *c != 0);
        let params: Vec<SparsePoly> = gc.sigma.rays.iter().map(|r| SparsePoly::monomial(Exponent(r.clone()), q(1))).collect();
        let kbar = kbar_quotient(&gc, &params, &top).map_err(|e| format!("trial {trial}: {e}"))?;
        let dims: BTreeMap<Q, i64> = kbar.graded_dims.iter().filter(|g| g.dim != 0).map(|g| (g.degree.clone(), g.dim)).collect();
        ensure(dims == prod && kbar.socle_degree == top, || format!("trial {trial}: K-bar {dims:?} vs {prod:?}"))?;
    }
    Ok("20 cones".into())
}

fn c8_koszul_trace() -> Outcome {
    let shapes: [(&str, Vec<Vec<i64>>, i64); 3] = [
        ("unit square", vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]], 2),
        ("triangle", vec![vec![0, 0], vec![2, 0], vec![0, 3]], 6),
        ("unit cube", (0..8).map(|i| vec![i & 1, (i >> 1) & 1, (i >> 2) & 1]).collect(), 6),
    ];
    let mut notes = vec![];
    for (name, pts, vol) in shapes {
        let p = Polytope::from_points(&pts).map_err(|e| e.to_string())?;
        for seed in 0..10 {
            let k = koszul_random(&p, seed).map_err(|e| format!("{name} seed {seed}: {e}"))?;
            ensure(k.dimension == 1, || format!("{name} seed {seed}: top dimension {}", k.dimension))?;
        }
        let t = trace_volume_check(&p);
        ensure(t.agree && t.trace == t.normalized_volume && t.by_counting == vol, || format!("{name}: {t:?}"))?;
        notes.push(format!("{name} {}", t.trace));
    }
    Ok(format!("top dimension 1 on 30 tuples; trace = n!Vol: {}", notes.join(", ")))
}

fn c9_nondegeneracy() -> Outcome {
    let mc = MonteCarlo { primes: 3, seed: 11 };
    let check = |s: &str, n: usize, expect: bool| -> Result<(), String> {
        let r = nondegenerate(&poly(s, n), &mc, Execution::default()).map_err(|e| format!("{s}: {e}"))?;
        ensure(r.nondegenerate == expect, || format!("{s}: nondegenerate = {}", r.nondegenerate))?;
        for face in &r.faces {
            let v = &face.verdict;
            ensure(v.method == "monomial" || (v.per_prime.len() == 3 && v.per_prime.iter().all(|&b| b == v.has_zero)), || {
                format!("{s}: primes {:?} gave {:?}", v.primes, v.per_prime)
            })?;
        }
        Ok(())
    };
    check("x1^2 + x2^3", 2, true)?;
    check("x1^2 + 2*x1*x2 + x2^2", 2, false)?;
    for f in regression_family() {
        check(&f.to_string(), f.nvars(), true)?;
    }
    Ok("verdicts agree across 3 primes".into())
}

fn c10_jacobian() -> Outcome {
    for f in regression_family() {
        let r = jacobian_multiplication_check(&f, None).map_err(|e| format!("{f}: {e}"))?;
        ensure(r.well_defined && r.injective, || format!("{f}: {r:?}"))?;
    }
    Ok("well defined and injective on the family".into())
}

fn c11_regularize() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let start = Instant::now();
    for trial in 0..20 {
        let mut pts = vec![Exponent(vec![rng.gen_range(2..=9), 0]), Exponent(vec![0, rng.gen_range(2..=9)])];
        for _ in 0..rng.gen_range(0..=3) {
            pts.push(Exponent(vec![rng.gen_range(1..=6), rng.gen_range(1..=6)]));
        }
        let d = NewtonPolyhedron::from_points(2, &pts).map_err(|e| e.to_string())?;
        let sd = sigma_delta_fan(&d).map_err(|e| e.to_string())?;
        let reg = regularize(&sd).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(
            reg.is_regular() == Ok(true) && reg.refines(&sd) && reg.covers_orthant() && reg.has_coordinate_rays(),
            || format!("trial {trial}: {pts:?}"),
        )?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("20 polyhedra in {took:.2?}"))
}

fn c12_determinism() -> Outcome {
    let mut cfg = PipelineConfig::new(poly("x1^2 + x2^3", 2));
    cfg.seed = 42;
    let a = emit_report(&run_verify_all(&cfg), Format::Json);
    let b = emit_report(&run_verify_all(&cfg), Format::Json);
    ensure(a == b, || "reports differ".into())?;
    cfg.exec = Execution::Sequential;
    let c = emit_report(&run_verify_all(&cfg), Format::Json);
    ensure(a == c, || "sequential report differs".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("dual fan rays", c1_dual_fan),
        ("Newton order of the socle", c2_newton_order),
        ("graded face quotient", c3_kbar),
        ("face residues", c4_residues),
        ("interior monomial membership", c5_membership),
        ("determinant identities", c6_determinants),
        ("Poincare series", c7_poincare),
        ("Koszul top degree and trace", c8_koszul_trace),
        ("nondegeneracy", c9_nondegeneracy),
        ("Jacobian multiplication map", c10_jacobian),
        ("fan regularization", c11_regularize),
        ("determinism", c12_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {label}: {detail} [{:.2?}]", start.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {detail} [{:.2?}]", start.elapsed());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
