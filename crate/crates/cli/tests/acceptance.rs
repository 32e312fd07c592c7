//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twistfix::deformation::{
    check_star_algebra, deformed_product, dft, BAND_LIMIT_TOL, deformed_product_quad, omega_j, GridFunction, Profile, SkewMatrix,
};
use twistfix::linalg::{rank_of, CMatrix, CVector};
use twistfix::proper::{analyze, preset};
use twistfix::torus::{
    bra_ket_defect, clutching_sections, distinguishes, example_subset, fixedpoint_bundle_report, Mask,
    SequenceVector,
};
use twistfix::twisted::{classical_fixed_points, decompose, left_regular_point, right_regular_point};
use twistfix::{coboundary, make_group, similar, Cocycle, GroupDescriptor, GroupElement, Phase};

type Outcome = Result<String, String>;

/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn random_orders(rng: &mut ChaCha8Rng) -> Vec<i64> {
    loop {
        let rank = rng.gen_range(1..=3);
        let orders: Vec<i64> = (0..rank).map(|_| rng.gen_range(1..=8)).collect();
        if orders.iter().product::<i64>() <= 64 {
            return orders;
        }
    }
}

fn random_bicharacter(rng: &mut ChaCha8Rng, orders: &[i64]) -> Cocycle {
    let g = make_group(orders).unwrap();
    let m = orders
        .iter()
        .map(|&a| {
            orders
                .iter()
                .map(|&b| {
                    let d = a.gcd(&b);
                    Rational64::new(rng.gen_range(0..d), d)
                })
                .collect()
        })
        .collect();
    Cocycle::from_bicharacter(&g, m).unwrap()
}

fn random_coboundary(rng: &mut ChaCha8Rng, g: &GroupDescriptor) -> Cocycle {
    let mut c: Vec<Phase> = (0..g.len()).map(|_| Phase::new(rng.gen_range(0..24), 24)).collect();
    c[0] = Phase::ZERO;
    coboundary(g, &c).unwrap()
}

fn is_subgroup(g: &GroupDescriptor, set: &[GroupElement]) -> bool {
    set.contains(&g.identity())
        && set.iter().all(|a| set.contains(&g.neg(a)) && set.iter().all(|b| set.contains(&g.add(a, b))))
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sample: Vec<(Vec<i64>, Cocycle)> = Vec::new();
    for _ in 0..200 {
        let orders = random_orders(&mut rng);
        let omega = random_bicharacter(&mut rng, &orders);
        check(omega.validate().valid, format!("invalid cocycle on {}", omega.group()))?;
        let g = omega.group().clone();
        let sym = omega.symmetrizer();
        check(is_subgroup(&g, &sym), format!("symmetrizer on {g} is not a subgroup"))?;
        let twisted = omega.multiply(&random_coboundary(&mut rng, &g)).map_err(err)?;
        let mut sym_twisted = twisted.symmetrizer();
        let mut sorted = sym.clone();
        sorted.sort_by(|a, b| a.coords().cmp(b.coords()));
        sym_twisted.sort_by(|a, b| a.coords().cmp(b.coords()));
        check(sorted == sym_twisted, format!("symmetrizer on {g} moved under a coboundary twist"))?;
        check(similar(&omega, &twisted).map_err(err)?, "a coboundary twist is not similar")?;
        sample.push((orders, omega));
        sample.push((g.orders().to_vec(), twisted));
    }
    let mut checked = 0usize;
    for (i, (oa, a)) in sample.iter().enumerate() {
        check(similar(a, a).map_err(err)?, "similarity is not reflexive")?;
        for (ob, b) in &sample[i + 1..] {
            if oa != ob {
                continue;
            }
            let ab = similar(a, b).map_err(err)?;
            check(ab == similar(b, a).map_err(err)?, "similarity is not symmetric")?;
            for (oc, c) in &sample {
                if oc != oa || !ab {
                    continue;
                }
                if similar(b, c).map_err(err)? {
                    check(similar(a, c).map_err(err)?, "similarity is not transitive")?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("200 cocycles valid, {checked} transitive triples, symmetrizers stable"))
}

fn clock_shift(n: usize) -> (CMatrix, CMatrix) {
    let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
    let clock = CMatrix::from_fn(n, n, |i, j| if i == j { zeta.powu(i as u32) } else { Complex64::new(0.0, 0.0) });
    let shift = CMatrix::from_fn(n, n, |i, j| {
        if i == (j + 1) % n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    (clock, shift)
}

/// Rank of the span of `C^a S^b`, which is `n²` exactly when they generate `M_n`.
fn clock_shift_span(n: usize) -> usize {
    let (c, s) = clock_shift(n);
    let mut vectors = Vec::new();
    let mut ca = CMatrix::identity(n, n);
    for _ in 0..n {
        let mut m = ca.clone();
        for _ in 0..n {
            vectors.push(CVector::from_iterator(n * n, m.iter().copied()));
            m = &m * &s;
        }
        ca = &ca * &c;
    }
    rank_of(&vectors, n * n)
}

/// `z` with `AB = zBA`, if the two matrices commute up to a scalar.
fn commutation_scalar(a: &CMatrix, b: &CMatrix) -> Option<Complex64> {
    let (ab, ba) = (a * b, b * a);
    let (i, j) = ba.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).map(|(k, _)| (k % ba.nrows(), k / ba.nrows()))?;
    let z = ab[(i, j)] / ba[(i, j)];
    ((ab - ba * z).iter().all(|v| v.norm() < 1e-12)).then_some(z)
}

fn criterion_2() -> Outcome {
    let mut tested = 0;
    for n in [2i64, 3, 4] {
        let omega = Cocycle::standard(n).map_err(err)?;
        let w = decompose(&omega).map_err(err)?;
        check(w.blocks == [n as usize], format!("Z{n}^2 blocks {:?}", w.blocks))?;
        check(clock_shift_span(n as usize) == (n * n) as usize, format!("clock and shift do not span M_{n}"))?;
        let g = omega.group().clone();
        let e1 = g.index_of(&GroupElement(vec![1, 0])).unwrap();
        let e2 = g.index_of(&GroupElement(vec![0, 1])).unwrap();
        let (u, v) = (left_regular_point(e1, &omega).to_matrix(), left_regular_point(e2, &omega).to_matrix());
        let z = commutation_scalar(&u, &v).ok_or("regular generators do not commute up to a scalar")?;
        let (c, s) = clock_shift(n as usize);
        let zc = commutation_scalar(&c, &s).unwrap();
        let primitive = |z: Complex64| (1..n).all(|k| (z.powi(k as i32) - 1.0).norm() > 1e-9) && (z.powi(n as i32) - 1.0).norm() < 1e-12;
        check(primitive(z) && primitive(zc), format!("Z{n}^2 commutation phase is not a primitive root"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cocycles: Vec<Cocycle> = (2..=4).map(|n| Cocycle::standard(n).unwrap()).collect();
    for orders in [vec![2], vec![6], vec![2, 2], vec![2, 4], vec![3, 3], vec![2, 2, 2], vec![4, 4]] {
        for _ in 0..3 {
            cocycles.push(random_bicharacter(&mut rng, &orders));
        }
        cocycles.push(Cocycle::trivial(&make_group(&orders).unwrap()).unwrap());
    }
    for omega in &cocycles {
        let fp = classical_fixed_points(omega).map_err(err)?;
        check(fp.dimension == 1, format!("fixed points of dimension {} on {}", fp.dimension, omega.group()))?;
        tested += 1;
    }
    Ok(format!("single blocks [2], [3], [4]; fixed points one-dimensional for {tested} cocycles"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cocycles: Vec<Cocycle> = (2..=8).map(|n| Cocycle::standard(n).unwrap()).collect();
    for _ in 0..24 {
        let orders = random_orders(&mut rng);
        cocycles.push(random_bicharacter(&mut rng, &orders));
        let omega = cocycles.last().unwrap().clone();
        let b = random_coboundary(&mut rng, omega.group());
        cocycles.push(omega.multiply(&b).unwrap());
    }
    let mut pairs = 0usize;
    for omega in &cocycles {
        let n = omega.order();
        let rights: Vec<_> = (0..n).map(|s| right_regular_point(s, omega)).collect();
        for t in 0..n {
            let l = left_regular_point(t, omega);
            for r in &rights {
                check(r.commutes_with(&l), format!("[ρ(s), λ(δ_t)] ≠ 0 on {}", omega.group()))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs commute exactly over {} cocycles", cocycles.len()))
}

const PRESETS: &[&str] = &[
    "dual:Z2",
    "dual:Z3",
    "dual:Z4",
    "dual:Z6",
    "dual:Z2xZ2",
    "dual:Z2xZ3",
    "dual:Z3xZ3",
    "dual:Z2xZ4",
    "dual:Z4xZ4",
    "dual:Z2xZ2xZ2",
    "swap",
    "tensor:swap+swap",
    "tensor:dual:Z2+dual:Z3",
    "tensor:dual:Z2+swap",
    "inflate:swap",
    "induced",
    "trivial:Z2",
    "trivial-m2:Z3",
];

fn criterion_4() -> Outcome {
    for name in PRESETS {
        let p = preset(name).map_err(err)?;
        let rep = analyze(&p.action, &p.generators, 0).map_err(err)?;
        let gram = &rep.gram;
        check(gram.min_eigenvalue >= -1e-10 * gram.norm, format!("{name}: Gram min {}", gram.min_eigenvalue))?;
        check(
            rep.fixed_point_algebra.fixed_defect <= 1e-12,
            format!("{name}: fix outside the fixed subspace by {}", rep.fixed_point_algebra.fixed_defect),
        )?;
        check(rep.imprimitivity_defect < 1e-10, format!("{name}: imprimitivity {}", rep.imprimitivity_defect))?;
        check(rep.module.equal, format!("{name}: ideal dimensions {:?}", rep.module.ideal_dims))?;
        if p.dual {
            let g = p.action.group().len();
            check(rep.saturation.saturated, format!("{name}: not saturated"))?;
            check(rep.crossed.dimension == g * g, format!("{name}: crossed dimension {}", rep.crossed.dimension))?;
            check(rep.fixed_point_algebra.blocks == [1], format!("{name}: blocks {:?}", rep.fixed_point_algebra.blocks))?;
        }
    }
    Ok(format!("{} presets", PRESETS.len()))
}

const STAR_PROFILES: &[&str] = &[
    "gaussian:1.0",
    "gaussian:1.5@1,-0.5",
    "gaussian:2.0",
    "gaussian:2.5@0.5,1",
    "gaussian:3.0@-1,-1",
];

/// Sample profiles whose spectra fit the grid; products of aliasing inputs are
/// not expected to associate or to reduce to the pointwise product.
fn band_limited(samples: usize, period: f64) -> Vec<GridFunction> {
    STAR_PROFILES
        .iter()
        .map(|s| GridFunction::from_profile(&Profile::parse(2, s).unwrap(), samples, period).unwrap())
        .filter(|f| dft(f).high_frequency_fraction() < BAND_LIMIT_TOL)
        .collect()
}

fn criterion_5() -> Outcome {
    let (period, dim) = (16.0, 2);
    let pairs = [("gaussian:1.0", "gaussian:2.0"), ("gaussian:1.5@1,-0.5", "gaussian:1.2@-1,2")];
    let mut worst = [0.0f64; 2];
    let mut star_samples = [0usize; 2];
    for (k, samples) in [32usize, 128].into_iter().enumerate() {
        let tol = [1e-4, 1e-6][k];
        for theta in [0.25, 0.5, 1.0] {
            let j = SkewMatrix::theta(theta);
            for (a, b) in pairs {
                let (pa, pb) = (Profile::parse(dim, a).map_err(err)?, Profile::parse(dim, b).map_err(err)?);
                let f = GridFunction::from_profile(&pa, samples, period).map_err(err)?;
                let g = GridFunction::from_profile(&pb, samples, period).map_err(err)?;
                let fft = deformed_product(&f, &g, &j).map_err(err)?.product;
                let quad = deformed_product_quad(&pa, &g, &j).map_err(err)?;
                let d = fft.rel_distance(&quad);
                worst[k] = worst[k].max(d);
                check(d < tol, format!("oracle defect {d:.2e} at N={samples}, θ={theta}, {a} × {b}"))?;
            }
            let gs = band_limited(samples, period);
            check(gs.len() >= 2, format!("fewer than two band-limited samples at N={samples}"))?;
            star_samples[k] = gs.len();
            let star = check_star_algebra(&j, &gs).map_err(err)?;
            check(
                star.associativity < 1e-8 && star.involution < 1e-8,
                format!("star defects {:?} at N={samples}, θ={theta}", star),
            )?;
            for (a, b) in [([1i64, -1], [2i64, 1]), ([-3, 0], [1, 3]), ([5, 2], [-4, 1])] {
                let ea = GridFunction::plane_wave(dim, samples, period, &a).map_err(err)?;
                let eb = GridFunction::plane_wave(dim, samples, period, &b).map_err(err)?;
                let ab = [a[0] + b[0], a[1] + b[1]];
                let expected = GridFunction::plane_wave(dim, samples, period, &ab)
                    .map_err(err)?
                    .scale(omega_j(&j, &a, &b, period));
                let d = deformed_product(&ea, &eb, &j).map_err(err)?.product.rel_distance(&expected);
                check(d < 1e-10, format!("plane-wave law defect {d:.2e}"))?;
            }
        }
        let zero = SkewMatrix::zero(dim);
        let gs = band_limited(samples, period);
        for f in &gs {
            for g in &gs {
                let d = deformed_product(f, g, &zero).map_err(err)?.product.rel_distance(&f.pointwise(g).map_err(err)?);
                check(d < 1e-10, format!("J=0 pointwise defect {d:.2e} at N={samples}"))?;
            }
        }
    }
    Ok(format!(
        "oracle defects {:.1e} (N=32), {:.1e} (N=128); star checks on {} and {} samples",
        worst[0], worst[1], star_samples[0], star_samples[1]
    ))
}

fn criterion_6() -> Outcome {
    let mut bra_ket = 0.0f64;
    for seed in 0..3 {
        let xi = SequenceVector::random(1, 48, 2, 5, seed).map_err(err)?;
        let eta = SequenceVector::random(1, 48, 2, 5, seed + 100).map_err(err)?;
        bra_ket = bra_ket.max(bra_ket_defect(&xi, &eta, 32).map_err(err)?);
    }
    let xi = SequenceVector::random(2, 6, 1, 2, 7).map_err(err)?;
    let eta = SequenceVector::random(2, 6, 1, 2, 8).map_err(err)?;
    bra_ket = bra_ket.max(bra_ket_defect(&xi, &eta, 8).map_err(err)?);
    check(bra_ket < 1e-10, format!("bra-ket defect {bra_ket:.2e}"))?;
    for seed in [0u64, 1, 7] {
        let mask = Mask::Disk(0.2).grid(2, 64).map_err(err)?;
        let rep = example_subset(&mask, 2, 64, 12, seed).map_err(err)?;
        check(rep.off_support_max < 1e-10, format!("inner products on the disk reach {:.2e}", rep.off_support_max))?;
        check(rep.commutator_max < 1e-10, format!("fixed-point commutators reach {:.2e}", rep.commutator_max))?;
        check(rep.separates_covered_points, format!("seed {seed}: covered points not separated"))?;
    }
    let mut reports = Vec::new();
    for m in -2..=3 {
        let s = clutching_sections(m, 64, 4).map_err(err)?;
        let rep = fixedpoint_bundle_report(&s).map_err(err)?;
        check(rep.chern_number == m, format!("chern_number(V_{m}) = {}", rep.chern_number))?;
        check(rep.fiber_dim == 4, format!("V_{m}: fiber algebra of dimension {}", rep.fiber_dim))?;
        reports.push(rep);
    }
    check(distinguishes(&reports), "bundles are not pairwise distinguished")?;
    Ok(format!("bra-ket defect {bra_ket:.1e}; disk subset clean; chern numbers -2..=3"))
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_twistfix"))
        .args(args)
        .env("TWISTFIX_THREADS", threads)
        .output()
        .map_err(err)?;
    let mut bytes = out.stdout;
    bytes.extend(out.status.code().unwrap_or(-1).to_le_bytes());
    Ok(bytes)
}

fn criterion_7() -> Outcome {
    let dir = std::env::temp_dir().join(format!("twistfix-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let csv = |k: usize| dir.join(format!("product{k}.csv")).display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["cocycle", "analyze", "--group", "Z4xZ4", "--matrix", "[[0,0],[1/4,0]]", "--seed", "3"],
        vec!["cocycle", "similar", "--group", "Z2xZ2", "--a", "[[0,0],[1/2,0]]", "--b", "[[0,1/2],[0,0]]", "--search"],
        vec!["twisted", "decompose", "--group", "Z3xZ3", "--matrix", "[[0,0],[1/3,0]]"],
        vec!["proper", "analyze", "--preset", "dual:Z2xZ4", "--seed", "11"],
        vec!["proper", "tensor", "--a", "swap", "--b", "dual:Z3", "--seed", "5"],
        vec!["deform", "check", "--N", "32", "--theta", "0.5", "--seed", "2"],
        vec!["torus", "subset", "--mask", "disk:0.2", "--seed", "9"],
        vec!["torus", "bundle", "--m=-1,0,2", "--grid", "64"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &runs {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run_cli(&a, "1")?;
        let second = run_cli(&a, "2")?;
        check(!first.is_empty() && first == second, format!("outputs differ for `{}`", args.join(" ")))?;
    }
    for k in 0..2 {
        let c = csv(k);
        run_cli(&["deform", "product", "--N", "32", "--theta", "1.0", "--out", &c, "--seed", "4"], &format!("{}", k + 1))?;
    }
    let (a, b) = (std::fs::read(csv(0)).map_err(err)?, std::fs::read(csv(1)).map_err(err)?);
    check(!a.is_empty() && a == b, "product CSV differs between runs")?;
    let _ = std::fs::remove_dir_all(Path::new(&dir));
    Ok(format!("{} commands byte-identical across runs", runs.len() + 1))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("cocycle algebra", criterion_1, Some(10)),
        ("twisted algebra structure", criterion_2, Some(30)),
        ("commutation", criterion_3, None),
        ("properness", criterion_4, Some(60)),
        ("deformation", criterion_5, Some(300)),
        ("lattice modules, subset and bundle examples", criterion_6, Some(60)),
        ("determinism", criterion_7, None),
    ];
    let mut failed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = run();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(secs)) = (&result, limit) {
            if elapsed > Duration::from_secs(*secs) {
                result = Err(format!("took {:.1}s, limit {secs}s", elapsed.as_secs_f64()));
            }
        }
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => {
                failed += 1;
                ("FAIL", d.clone())
            }
        };
        println!("criterion {} [{tag}] {name}: {detail} ({:.2}s)", k + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
