//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use boundary_lab::boundary::{
    contraction_diameter, estimate_flag, relevant_spectra, stationarity_defect, triviality_report,
    Verdict,
};
use boundary_lab::padic_linalg::{cartan_decompose, is_isometry, smith_valuations, Flag};
use boundary_lab::places::{
    abs_at, adelic_height, count_height_ball, factor, height_ball_profile, valuation,
    LogCombination,
};
use boundary_lab::walk_engine::catalog::{
    commuting_pair, diag_two_half, dyadic_affine, permutations, sl2z,
};
use boundary_lab::walk_engine::{
    estimate_lyapunov, exact_convolution_entropy, lln_residual, sample_path_stream, stream_rng,
    MeasureSpec, DEFAULT_GAP,
};
use boundary_lab::{Integer, Place, Prime, Rational, RationalMatrix};
use num_traits::{One, Signed, Zero};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn two() -> Place {
    Place::finite(2).unwrap()
}

fn random_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    loop {
        let n = rng.gen_range(-bound..=bound);
        if n != 0 {
            return Rational::new(Integer::from(n), Integer::from(rng.gen_range(1..=bound)));
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn product_formula() -> Outcome {
    let mut rng = stream_rng(1, 0);
    for _ in 0..1000 {
        let q = random_rational(&mut rng, 1_000_000);
        let mut product = abs_at(&q, Place::Infinity);
        let mut primes = BTreeSet::new();
        for part in [q.numer().abs(), q.denom().clone()] {
            for (p, _) in factor(&part.to_biguint().unwrap()) {
                primes.insert(u64::try_from(p).unwrap());
            }
        }
        for p in primes {
            product *= abs_at(&q, Place::finite(p).unwrap());
        }
        ensure(product.is_one(), || {
            format!("product {product} for q = {q}")
        })?;
    }
    Ok("1000 rationals, product over places = 1 exactly".into())
}

fn smith_oracle() -> Outcome {
    let mut rng = stream_rng(2, 0);
    let primes = [2u64, 3, 5, 7];
    let mut done = 0;
    while done < 500 {
        let d = rng.gen_range(2..=4);
        let entries = (0..d * d).map(|_| {
            let n = rng.gen_range(-100..=100i64);
            Rational::new(n.into(), rng.gen_range(1..=100i64).into())
        });
        let g = RationalMatrix::from_vec(d, d, entries.collect()).unwrap();
        if !g.is_invertible() {
            continue;
        }
        let p = Prime::new(primes[rng.gen_range(0..primes.len())]).unwrap();
        let a = smith_valuations(&g, p).map_err(|e| e.to_string())?;
        for k in 1..=d {
            // min over k x k minors of the valuation = valuation of their gcd.
            let oracle = g
                .exterior_power(k)
                .unwrap()
                .entries()
                .filter(|x| !x.is_zero())
                .map(|x| valuation(x, p).unwrap())
                .min()
                .unwrap();
            let sum: i64 = a[..k].iter().sum();
            ensure(sum == oracle, || {
                format!("k={k}, p={p}: {sum} vs oracle {oracle} for {g:?}")
            })?;
        }
        let cd = cartan_decompose(&g, p).map_err(|e| e.to_string())?;
        ensure(cd.reconstruct() == g, || {
            format!("reconstruction differs for {g:?}")
        })?;
        ensure(is_isometry(&cd.k1, p) && is_isometry(&cd.k2, p), || {
            format!("non-isometric factor for {g:?} at {p}")
        })?;
        done += 1;
    }
    Ok("500 matrices, d in {2,3,4}: elementary divisors match minors; k1 a k2 exact".into())
}

fn deterministic_spectra() -> Outcome {
    let mu = diag_two_half();
    let three = Place::finite(3).unwrap();
    for n in [1, 10, 100] {
        let s = estimate_lyapunov(&mu, two(), n, 3, 0).map_err(|e| e.to_string())?;
        let units: Vec<Rational> = vec![Rational::one(), -Rational::one()];
        ensure(s.log_p_units() == Some(&units[..]), || {
            format!("n={n}: p=2 units {:?}", s.log_p_units())
        })?;
        ensure(s.exponents() == [LN_2, -LN_2], || {
            format!("n={n}: p=2 {:?}", s.exponents())
        })?;
        let s = estimate_lyapunov(&mu, Place::Infinity, n, 3, 0).map_err(|e| e.to_string())?;
        let e = s.exponents();
        ensure(
            (e[0] - LN_2).abs() <= 1e-9 && (e[1] + LN_2).abs() <= 1e-9,
            || format!("n={n}: inf {e:?}"),
        )?;
        let s = estimate_lyapunov(&mu, three, n, 3, 0).map_err(|e| e.to_string())?;
        ensure(s.exponents() == [0.0, 0.0], || {
            format!("n={n}: p=3 {:?}", s.exponents())
        })?;
    }
    Ok("diag(2,1/2): (ln2, -ln2) at 2 (exact) and inf (1e-9), (0,0) at 3, n in {1,10,100}".into())
}

fn sl2z_vanishing() -> Outcome {
    let mu = sl2z();
    for p in [2, 3, 5] {
        let s = estimate_lyapunov(&mu, Place::finite(p).unwrap(), 300, 50, 0)
            .map_err(|e| e.to_string())?;
        let zero = s.log_p_units().unwrap().iter().all(Zero::is_zero);
        ensure(zero && s.exponents().iter().all(|&x| x == 0.0), || {
            format!("p={p}: {:?}", s.exponents())
        })?;
    }
    let s = estimate_lyapunov(&mu, Place::Infinity, 300, 50, 0).map_err(|e| e.to_string())?;
    let (l1, l2) = (s.exponents()[0], s.exponents()[1]);
    ensure(l1 > 0.05, || format!("lambda_1(inf) = {l1}"))?;
    ensure((l1 + l2).abs() <= 1e-6, || {
        format!("lambda_1 + lambda_2 = {}", l1 + l2)
    })?;
    Ok(format!(
        "zeros at 2,3,5; lambda_1(inf) = {l1:.4}, sum = {:.1e}",
        l1 + l2
    ))
}

fn test_measures() -> Vec<MeasureSpec> {
    let mut out = vec![
        diag_two_half(),
        sl2z(),
        dyadic_affine(),
        commuting_pair(),
        permutations(2),
        permutations(3),
    ];
    let mut rng = stream_rng(5, 0);
    while out.len() < 10 {
        let atoms: Vec<RationalMatrix> = (0..3)
            .map(|_| {
                RationalMatrix::from_vec(
                    2,
                    2,
                    (0..4).map(|_| random_rational(&mut rng, 12)).collect(),
                )
                .unwrap()
            })
            .filter(|m| m.is_invertible())
            .collect();
        if !atoms.is_empty() {
            out.push(MeasureSpec::uniform("random", atoms).unwrap());
        }
    }
    out
}

fn determinant_identity() -> Outcome {
    let mut checks = 0;
    for mu in test_measures() {
        let mut places: BTreeSet<Prime> = mu
            .relevant_places()
            .unwrap()
            .primes()
            .iter()
            .copied()
            .collect();
        places.extend([2, 3, 5].map(|p| Prime::new(p).unwrap()));
        for p in places {
            let place = Place::Finite(p);
            // Oracle: sum_i w_i * (-v_p(det a_i)), straight from the atoms.
            let expected = mu
                .weights()
                .iter()
                .zip(mu.atoms())
                .map(|(w, a)| {
                    let v = valuation(&a.determinant().unwrap(), p).unwrap();
                    w * Rational::from_integer((-v).into())
                })
                .fold(Rational::zero(), |acc, x| acc + x);
            for n in [1, 2, 7, 50] {
                let s = estimate_lyapunov(&mu, place, n, 4, n as u64).map_err(|e| e.to_string())?;
                let sum = s
                    .log_p_units()
                    .unwrap()
                    .iter()
                    .fold(Rational::zero(), |a, b| a + b);
                ensure(sum == expected, || {
                    format!("{} at {p}, n={n}: {sum} vs {expected}", mu.name())
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (measure, place, n) cases exact"))
}

fn lln() -> Outcome {
    let mu = dyadic_affine();
    let mut detail = Vec::new();
    for place in [two(), Place::Infinity] {
        let spec = estimate_lyapunov(&mu, place, 200, 100, 0)
            .map_err(|e| e.to_string())?
            .parabolic(DEFAULT_GAP);
        let wrong = Flag::reversed_coordinate(place, spec.dims()).unwrap();
        let paths: Vec<_> = (0..50)
            .map(|j| sample_path_stream(&mu, 200, 0, (1 << 40) + j))
            .collect();
        let at = |n: usize| -> Result<(f64, f64), String> {
            let mut right = Vec::new();
            let mut control = Vec::new();
            for path in &paths {
                let b = estimate_flag(path, &spec, n).map_err(|e| e.to_string())?;
                right.push(lln_residual(path, &b, &spec, n).map_err(|e| e.to_string())?);
                control.push(lln_residual(path, &wrong, &spec, n).map_err(|e| e.to_string())?);
            }
            Ok((median(right), median(control)))
        };
        let (r50, w50) = at(50)?;
        let (r100, w100) = at(100)?;
        let (r200, w200) = at(200)?;
        ensure(r200 <= 0.1, || format!("{place}: median {r200} at n=200"))?;
        ensure(r200 < r50, || {
            format!("{place}: median {r50} at 50 -> {r200} at 200")
        })?;
        let wmin = w50.min(w100).min(w200);
        ensure(wmin >= 0.3, || format!("{place}: wrong-flag median {wmin}"))?;
        detail.push(format!(
            "{place}: {r50:.3} -> {r100:.3} -> {r200:.3} (control >= {wmin:.2})"
        ));
    }
    Ok(detail.join("; "))
}

fn spec_at_two() -> Result<boundary_lab::padic_linalg::ParabolicSpec, String> {
    Ok(estimate_lyapunov(&dyadic_affine(), two(), 200, 100, 0)
        .map_err(|e| e.to_string())?
        .parabolic(DEFAULT_GAP))
}

fn contraction() -> Outcome {
    let diam = contraction_diameter(&dyadic_affine(), &spec_at_two()?, 100, 20, 0)
        .map_err(|e| e.to_string())?;
    ensure(diam <= 0.01, || format!("diameter {diam}"))?;
    Ok(format!("p=2, n=100, 20 flags: diameter {diam:.2e} <= 0.01"))
}

fn stationarity() -> Outcome {
    let bound = 3.0 / 2000f64.sqrt() + 0.05;
    let tv = stationarity_defect(&dyadic_affine(), &spec_at_two()?, 2000, 200, 6, 0)
        .map_err(|e| e.to_string())?;
    ensure(tv <= bound, || format!("defect {tv} > {bound}"))?;
    Ok(format!(
        "p=2, 2000 samples, depth 6: defect {tv:.4} <= {bound:.4}"
    ))
}

fn triviality() -> Outcome {
    let extra = |mu: &MeasureSpec| -> Result<Vec<_>, String> {
        let mut spectra = relevant_spectra(mu, 50, 10, 0).map_err(|e| e.to_string())?;
        for p in [2, 3, 5] {
            let place = Place::finite(p).unwrap();
            if spectra.iter().all(|s| s.place() != place) {
                spectra.push(estimate_lyapunov(mu, place, 50, 10, 0).map_err(|e| e.to_string())?);
            }
        }
        Ok(spectra)
    };
    for d in [2, 3] {
        let report = triviality_report(&extra(&permutations(d))?, DEFAULT_GAP);
        ensure(
            report.places.iter().all(|p| p.verdict == Verdict::Trivial),
            || {
                format!(
                    "permutations({d}): {:?}",
                    report.places.iter().map(|p| p.verdict).collect::<Vec<_>>()
                )
            },
        )?;
    }
    let report = triviality_report(&extra(&diag_two_half())?, DEFAULT_GAP);
    let got: BTreeSet<String> = report
        .nontrivial_places()
        .iter()
        .map(Place::to_string)
        .collect();
    let want: BTreeSet<String> = ["2", "inf"].map(String::from).into();
    ensure(got == want, || format!("diag(2,1/2) nontrivial at {got:?}"))?;
    ensure(
        report
            .places
            .iter()
            .all(|p| want.contains(&p.place.to_string()) || p.verdict == Verdict::Trivial),
        || "diag(2,1/2): other places not trivial".into(),
    )?;
    Ok("permutations trivial everywhere; diag(2,1/2) nontrivial exactly at {2, inf}".into())
}

fn ball_growth() -> Outcome {
    // Brute force over reduced fractions with |a|, b <= 60 (heights beyond ln 50 are excluded anyway).
    let mut heights = Vec::new();
    for a in -60i64..=60 {
        for b in 1i64..=60 {
            if a != 0 && num_integer::gcd(a, b) == 1 {
                heights.push(adelic_height(&Rational::new(a.into(), b.into())).unwrap());
            }
        }
    }
    let mut radii = vec![0.0, 0.3];
    for m in 2..=50 {
        radii.push((m as f64).ln());
        radii.push((m as f64 - 0.5).ln());
    }
    for r in radii {
        let brute = heights.iter().filter(|&&h| h <= r + 1e-12).count() as u64;
        let count = count_height_ball(r).map_err(|e| e.to_string())?;
        ensure(count == brute, || {
            format!("R={r}: {count} vs brute force {brute}")
        })?;
    }
    let profile = height_ball_profile(50f64.ln()).map_err(|e| e.to_string())?;
    let points: Vec<(f64, f64)> = profile
        .iter()
        .filter(|(m, _)| *m >= 10)
        .map(|&(m, c)| ((m as f64).ln(), (c as f64).ln()))
        .collect();
    let k = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    let slope = sxy / sxx;
    ensure((1.5..=2.5).contains(&slope), || {
        format!("fitted exponent {slope}")
    })?;
    Ok(format!(
        "brute force agrees for R <= ln 50; fitted growth exponent {slope:.3}"
    ))
}

fn entropy() -> Outcome {
    let h = exact_convolution_entropy(&commuting_pair(), 2).map_err(|e| e.to_string())?;
    let want = LogCombination::term(2, Rational::new(3.into(), 2.into()));
    ensure(h.exact == want, || format!("H_2 = {}", h.exact))?;
    let mut cases = 0;
    for mu in test_measures() {
        for n in 1..=4 {
            for m in n..=4 {
                let hn = exact_convolution_entropy(&mu, n)
                    .map_err(|e| e.to_string())?
                    .exact;
                let hm = exact_convolution_entropy(&mu, m)
                    .map_err(|e| e.to_string())?
                    .exact;
                let mut excess = exact_convolution_entropy(&mu, n + m)
                    .map_err(|e| e.to_string())?
                    .exact;
                excess.add(&hn.negated());
                excess.add(&hm.negated());
                ensure(excess.is_zero() || excess.to_f64() < 0.0, || {
                    format!("{}: H_{} - H_{n} - H_{m} = {excess}", mu.name(), n + m)
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!(
        "H_2 = 3/2 ln 2 exactly; subadditive on {cases} cases"
    ))
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_boundary-lab");
    let measures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../measures");
    let affine = measures.join("dyadic_affine.json").display().to_string();
    let pair = measures.join("commuting_pair.json").display().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["places", "--measure", &affine],
        vec![
            "lyapunov",
            "--measure",
            &affine,
            "--n",
            "60",
            "--trials",
            "20",
        ],
        vec!["flag", "--measure", &affine, "--n", "60", "--trials", "20"],
        vec![
            "lln",
            "--measure",
            &affine,
            "--n",
            "40",
            "--trials",
            "10",
            "--samples",
            "16",
        ],
        vec![
            "stationarity",
            "--measure",
            &affine,
            "--n",
            "40",
            "--trials",
            "10",
            "--samples",
            "100",
            "--place",
            "2",
        ],
        vec![
            "contraction",
            "--measure",
            &affine,
            "--n",
            "40",
            "--trials",
            "10",
            "--samples",
            "6",
        ],
        vec![
            "triviality",
            "--measure",
            &affine,
            "--n",
            "60",
            "--trials",
            "20",
        ],
        vec!["entropy", "--measure", &pair, "--n", "6"],
        vec!["ballcount", "--rmax", "3"],
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for args in &runs {
        for (dir, threads) in dirs.iter().zip(["1", "4"]) {
            let status = Command::new(bin)
                .args(args)
                .args(["--seed", "9", "--out"])
                .arg(dir.path())
                .env("BOUNDARY_LAB_THREADS", threads)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || {
                format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr))
            })?;
        }
        let cmd = args[0];
        for name in [
            format!("{cmd}.manifest.json"),
            format!("{cmd}.json"),
            format!("{cmd}.csv"),
        ] {
            let a = std::fs::read(dirs[0].path().join(&name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dirs[1].path().join(&name)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{name} differs between runs"))?;
        }
    }
    Ok(format!(
        "{} commands, 1 vs 4 threads: manifests, JSON and CSV byte-identical",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("product formula", product_formula),
        ("Smith oracle equivalence", smith_oracle),
        ("deterministic spectra", deterministic_spectra),
        ("SL2(Z) finite-place vanishing", sl2z_vanishing),
        ("determinant identity", determinant_identity),
        ("law of large numbers", lln),
        ("contraction", contraction),
        ("stationarity", stationarity),
        ("triviality", triviality),
        ("height-ball growth", ball_growth),
        ("entropy", entropy),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
