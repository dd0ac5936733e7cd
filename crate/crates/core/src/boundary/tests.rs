use std::f64::consts::LN_2;

use super::*;
use crate::padic_linalg::{flag_canonicalize, parabolic_member, Flag, ParabolicSpec};
use crate::places::rational::q;
use crate::places::Place;
use crate::walk_engine::catalog::*;
use crate::walk_engine::{
    estimate_lyapunov, lln_residual_for_basis, sample_path, sample_path_stream, LyapunovSpectrum,
    DEFAULT_GAP,
};
use crate::{Rational, RationalMatrix};

fn two() -> Place {
    Place::finite(2).unwrap()
}

fn line(place: Place, x: &str, y: &str) -> Flag {
    let v = RationalMatrix::from_rows(vec![vec![q(x)], vec![q(y)]]).unwrap();
    flag_canonicalize(&[v, RationalMatrix::identity(2)], &[1, 2], place).unwrap()
}

#[test]
fn diagonal_flags() {
    let mu = diag_two_half();
    let path = sample_path(&mu, 20, 0);
    let at2 = ParabolicSpec::from_log_p_units(two(), vec![q("1"), q("-1")]).unwrap();
    let at_inf = ParabolicSpec::from_exponents(Place::Infinity, vec![LN_2, -LN_2]).unwrap();
    for n in [1, 5, 20] {
        assert_eq!(
            estimate_flag(&path, &at2, n).unwrap(),
            line(two(), "0", "1")
        );
        assert_eq!(
            estimate_flag(&path, &at_inf, n).unwrap(),
            line(Place::Infinity, "1", "0")
        );
    }
}

#[test]
fn equal_exponents_give_trivial_flag() {
    let path = sample_path(&sl2z(), 30, 4);
    let spec = ParabolicSpec::trivial(two(), 2);
    let f = estimate_flag(&path, &spec, 30).unwrap();
    assert!(f.is_trivial());
    assert_eq!(f, Flag::trivial(two(), 2));
}

#[test]
fn boundary_point_examples() {
    let mu = diag_two_half();
    let spectra = relevant_spectra(&mu, 10, 2, 0).unwrap();
    let b = boundary_point(&mu, &spectra, 15, 3, DEFAULT_GAP).unwrap();
    assert_eq!(b.flag(two()).unwrap(), &line(two(), "0", "1"));
    assert_eq!(
        b.flag(Place::Infinity).unwrap(),
        &line(Place::Infinity, "1", "0")
    );
    assert_eq!(
        b.places.iter().find(|p| p.place == two()).unwrap().residual,
        0.0
    );

    let perms = permutations(3);
    let spectra = relevant_spectra(&perms, 10, 4, 0).unwrap();
    let b = boundary_point(&perms, &spectra, 10, 1, DEFAULT_GAP).unwrap();
    assert!(b.places.iter().all(|p| p.flag.is_trivial()));

    // Missing relevant place.
    assert!(boundary_point(&mu, &spectra[..0], 10, 1, DEFAULT_GAP).is_err());
}

#[test]
fn distinct_seeds_give_distinct_boundaries() {
    let mu = dyadic_affine();
    let spectra = relevant_spectra(&mu, 100, 20, 0).unwrap();
    for s in 0..20u64 {
        let a = boundary_point(&mu, &spectra, 60, 2 * s, DEFAULT_GAP).unwrap();
        let b = boundary_point(&mu, &spectra, 60, 2 * s + 1, DEFAULT_GAP).unwrap();
        assert_ne!(a, b, "seed pair {s}");
    }
}

#[test]
fn completions_differ_by_parabolic_and_agree_on_residual() {
    let mu = dyadic_affine();
    let spec = estimate_lyapunov(&mu, two(), 100, 20, 1)
        .unwrap()
        .parabolic(DEFAULT_GAP);
    let path = sample_path(&mu, 80, 6);
    let f = estimate_flag(&path, &spec, 80).unwrap();
    let (b1, b2) = (f.completion(), f.completion_reversed());
    assert!(parabolic_member(&(&b1.inverse().unwrap() * &b2), &spec).unwrap());
    let r1 = lln_residual_for_basis(&path, &b1, &spec, 80).unwrap();
    let r2 = lln_residual_for_basis(&path, &b2, &spec, 80).unwrap();
    // Completions differ by a bounded parabolic element: O(1/n) apart.
    assert!((r1 - r2).abs() <= 2.0 * LN_2 * 3.0 / 80.0, "{r1} vs {r2}");
}

#[test]
fn stationarity_examples() {
    let perms = permutations(2);
    let spec = ParabolicSpec::trivial(Place::Infinity, 2);
    assert_eq!(
        stationarity_defect(&perms, &spec, 100, 10, 6, 0).unwrap(),
        0.0
    );
    assert!(stationarity_defect(&perms, &spec, 99, 10, 6, 0).is_err());

    // A deterministic contracting measure: g b = b once b has converged.
    let mu = diag_two_half();
    let spec = ParabolicSpec::from_log_p_units(two(), vec![q("1"), q("-1")]).unwrap();
    assert_eq!(stationarity_defect(&mu, &spec, 100, 10, 6, 0).unwrap(), 0.0);
}

#[test]
fn bucket_cells() {
    let f = |x: &str| line(two(), "1", x);
    // 2-adic cells at depth 2: entries agreeing mod 2^2 share a cell.
    assert_eq!(bucket_tv(&[f("1")], &[f("5")], 2), 0.0);
    assert_eq!(bucket_tv(&[f("1")], &[f("3")], 2), 1.0);
    assert_eq!(bucket_tv(&[f("1/4")], &[f("1/4")], 2), 0.0);
    // Valuation below -depth: shared overflow cell.
    assert_eq!(bucket_tv(&[f("1/8")], &[f("3/16")], 2), 0.0);
    assert_eq!(bucket_tv(&[f("1/8")], &[f("1/4")], 2), 1.0);
    let g = |x: &str| line(Place::Infinity, "1", x);
    assert_eq!(bucket_tv(&[g("1/8")], &[g("3/16")], 2), 0.0);
    assert_eq!(bucket_tv(&[g("1/8")], &[g("1/4")], 2), 1.0);
    assert_eq!(bucket_tv(&[g("100")], &[g("1000")], 2), 0.0);
    assert_eq!(bucket_tv(&[g("1"), g("2")], &[g("1"), g("9/4")], 2), 0.5);
}

#[test]
fn contraction_examples() {
    let perms = permutations(2);
    let spec = ParabolicSpec::trivial(two(), 2);
    assert_eq!(contraction_diameter(&perms, &spec, 10, 5, 0).unwrap(), 0.0);

    // diag(2, 1/2)^n moves span(t, 1) to span(1, 4^-n / t), which converges to
    // span(e_2) at the edge of the echelon chart: the coordinate 1/s = 4^n t of
    // the limit's own chart is 2-adically small.
    let mu = diag_two_half();
    let p = two().prime().unwrap();
    let ts = ["1", "3", "1/2", "7/5"];
    let aux: Vec<Flag> = ts.iter().map(|t| line(two(), t, "1")).collect();
    for n in [4usize, 8, 16] {
        let x = sample_path(&mu, n, 0).product(n).clone();
        for f in &aux {
            let moved = f.act(&x).unwrap();
            let s = &moved.subspaces()[0][(1, 0)];
            assert!(crate::places::valuation(&s.recip(), p).unwrap() >= 2 * n as i64 - 1);
        }
    }
    // Mirrored measure: the limit span(e_1) sits inside the chart.
    let mirrored = diagonal_dirac(vec![q("1/2"), q("2")]);
    let aux: Vec<Flag> = ts.iter().map(|t| line(two(), "1", t)).collect();
    for n in [4usize, 8, 16] {
        let x = sample_path(&mirrored, n, 0).product(n).clone();
        let diam = contraction_diameter_of(&x, &aux).unwrap();
        assert!(diam <= 2f64.powi(-(n as i32) + 2), "n={n}: {diam}");
    }
}

#[test]
fn triviality_examples() {
    let gap = DEFAULT_GAP;
    let perms = permutations(3);
    let report = triviality_report(&relevant_spectra(&perms, 20, 5, 0).unwrap(), gap);
    assert!(report.places.iter().all(|p| p.verdict == Verdict::Trivial));

    let mu = diag_two_half();
    let mut spectra = relevant_spectra(&mu, 20, 3, 0).unwrap();
    let report = triviality_report(&spectra, gap);
    let mut nontrivial = report.nontrivial_places();
    nontrivial.sort_by_key(|p| p.to_string());
    assert_eq!(nontrivial, vec![two(), Place::Infinity]);
    // Adding an irrelevant place changes nothing.
    spectra.push(estimate_lyapunov(&mu, Place::finite(7).unwrap(), 20, 3, 0).unwrap());
    let extended = triviality_report(&spectra, gap);
    assert_eq!(
        extended.verdict(Place::finite(7).unwrap()),
        Some(Verdict::Trivial)
    );
    assert_eq!(&extended.places[..report.places.len()], &report.places[..]);

    let sl = sl2z();
    let spectra: Vec<LyapunovSpectrum> = [2, 3, 5]
        .iter()
        .map(|&p| estimate_lyapunov(&sl, Place::finite(p).unwrap(), 50, 5, 0).unwrap())
        .collect();
    let report = triviality_report(&spectra, gap);
    assert!(report.places.iter().all(|p| p.verdict == Verdict::Trivial));
}

#[test]
fn inconclusive_when_gap_is_within_noise() {
    let mu = dyadic_affine();
    let s = estimate_lyapunov(&mu, Place::Infinity, 2, 3, 0).unwrap();
    let report = triviality_report(std::slice::from_ref(&s), 0.05);
    let v = report.places[0].verdict;
    let spread = s.gap();
    let se = s.std_errors()[0] + s.std_errors()[1];
    match v {
        Verdict::Trivial => assert!(spread <= 0.05),
        Verdict::Nontrivial => assert!(spread - 2.0 * se > 0.05),
        Verdict::Inconclusive => assert!(spread > 0.05 && spread - 2.0 * se <= 0.05),
    }
}

#[test]
fn flag_estimates_use_exact_rationals_at_infinity() {
    let mu = dyadic_affine();
    let spec = estimate_lyapunov(&mu, Place::Infinity, 100, 20, 2)
        .unwrap()
        .parabolic(DEFAULT_GAP);
    assert_eq!(spec.dims(), &[1, 2]);
    let path = sample_path_stream(&mu, 150, 2, 9);
    let f = estimate_flag(&path, &spec, 150).unwrap();
    // The expanding line at infinity is span(B, 1) with B the limit translation.
    let v = &f.subspaces()[0];
    assert_eq!(f.pivots()[0], vec![0]);
    assert!(v[(1, 0)] != Rational::from_integer(0.into()));
}
