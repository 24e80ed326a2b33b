//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p tubetop --test acceptance`.

use std::time::{Duration, Instant};

use rand::Rng;
use tubetop::hardy::{
    extract_ab, gram_matrix, hardy_projection, multiplication_matrix, HardyModel, Truncation, LEAK_TOL,
};
use tubetop::jordan::{generic_norm, is_maximal_tripotent};
use tubetop::linalg::{ginibre, max_abs_diff, CMatrix};
use tubetop::pfaffian::{pfaffian, symplectic_j};
use tubetop::shilov::{random_element, rng_from_seed, sample_boundary};
use tubetop::symbol::{LaurentTerm, Symbol, SymbolSpec};
use tubetop::toeplitz::{
    block_index, finite_section_index, fredholm_proxy, gk_family, random_block_symbol, u2_reduction_check,
    AnalyticIndex, DEFAULT_BLOCK_SIZES, DEFAULT_SIZES,
};
use tubetop::verify::{jordan_identity_residual, SUITE_FACTORS};
use tubetop::winding::{factorize_check, uniqueness_search, winding_vector_with, LoopParams, WindingVector};
use tubetop::{Complex64, DomainFactor, Element, ProductDomain, Result, Tolerances};

const SEED: u64 = 20240601;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    let start = Instant::now();
    let out = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
    let took = start.elapsed();
    match limit {
        Some(l) if took >= l => Outcome::new(false, format!("{}; runtime {:.2?} over limit {:.0?}", out.detail, took, l)),
        Some(l) => Outcome::new(out.passed, format!("{}; runtime {:.2?} (limit {:.0?})", out.detail, took, l)),
        None => Outcome::new(out.passed, format!("{}; runtime {:.2?}", out.detail, took)),
    }
}

fn laurent(terms: &[(i64, f64, f64)]) -> Result<Symbol> {
    let coeffs = terms.iter().map(|&(p, re, im)| LaurentTerm(p, re, im)).collect();
    Symbol::from_spec(&ProductDomain::circle(), &SymbolSpec::NormLaurent { factor: 0, coeffs })
}

fn criterion_1() -> Result<Outcome> {
    let mut rng = rng_from_seed(SEED);
    let mut worst = 0.0f64;
    for &f in &SUITE_FACTORS {
        for _ in 0..100 {
            let e: Vec<Element> = (0..5).map(|_| random_element(f, &mut rng)).collect();
            worst = worst.max(jordan_identity_residual(&e[0], &e[1], &e[2], &e[3], &e[4])?);
        }
    }
    Ok(Outcome::new(worst <= 1e-10, format!("max residual {worst:.2e} <= 1e-10 over {} factor types", SUITE_FACTORS.len())))
}

fn criterion_2() -> Result<Outcome> {
    let mut rng = rng_from_seed(SEED + 2);
    let (mut homog, mut modulus) = (0.0f64, 0.0f64);
    let mut not_maximal = 0;
    let tol = Tolerances::default();
    for &f in &SUITE_FACTORS {
        for _ in 0..100 {
            let z = random_element(f, &mut rng);
            let lam = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let want = lam.powi(f.rank() as i32) * generic_norm(&z);
            homog = homog.max((generic_norm(&z.scale(lam)) - want).norm() / want.norm().max(1.0));
        }
        for _ in 0..1000 {
            let e = sample_boundary(f, &mut rng)?;
            modulus = modulus.max((generic_norm(&e).norm() - 1.0).abs());
            not_maximal += usize::from(!is_maximal_tripotent(&e, &tol));
        }
    }
    let mut pf = 0.0f64;
    for n in (2..=8).step_by(2) {
        for _ in 0..50 {
            let g = ginibre(n, &mut rng);
            let a = (&g - g.transpose()).scale(0.5);
            let (p, det) = (pfaffian(&a)?, a.determinant());
            pf = pf.max((p * p - det).norm() / det.norm().max(1.0));
        }
    }
    let mut j_exact = true;
    for n in 1..=4 {
        j_exact &= pfaffian(&symplectic_j(n))? == Complex64::new(1.0, 0.0);
    }
    let passed = homog <= 1e-10 && modulus <= 1e-9 && not_maximal == 0 && pf <= 1e-10 && j_exact;
    Ok(Outcome::new(
        passed,
        format!(
            "homogeneity {homog:.2e}, |N|-1 {modulus:.2e}, non-maximal samples {not_maximal}, Pf^2-det {pf:.2e}, Pf(J)=1 exact {j_exact}"
        ),
    ))
}

fn criterion_3() -> Result<Outcome> {
    let mut bad = Vec::new();
    let params = LoopParams::default();
    for &f in &SUITE_FACTORS {
        let dom = ProductDomain::single(f)?;
        for m in -3..=3 {
            let sym = Symbol::norm_power(&dom, &[m])?;
            let r = winding_vector_with(&sym, 8, SEED, &params)?;
            if r.k != WindingVector(vec![m]) || r.base_point_count != 8 {
                bad.push(format!("{f} m={m} -> {:?}", r.k.0));
            }
        }
        // on a two-factor domain the unit vector lands in its own slot
        let two = ProductDomain::new(vec![f, DomainFactor::TypeI(1)])?;
        for m in [-3, 2] {
            let sym = Symbol::norm_power(&two, &[m, 0])?;
            let r = winding_vector_with(&sym, 8, SEED, &params)?;
            if r.k != WindingVector::unit(2, 0, m) {
                bad.push(format!("{f}xI1 m={m} -> {:?}", r.k.0));
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{} mismatches {bad:?}", bad.len())))
}

fn criterion_4() -> Result<Outcome> {
    let mut rng = rng_from_seed(SEED + 4);
    let mut bad = Vec::new();
    for i in 0..50 {
        let n = 1 + i % 2;
        let factors: Vec<DomainFactor> = (0..n).map(|_| SUITE_FACTORS[rng.gen_range(0..SUITE_FACTORS.len())]).collect();
        let dom = ProductDomain::new(factors)?;
        let k: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        let spec = SymbolSpec::product(vec![
            SymbolSpec::norm_pow(k.clone()),
            SymbolSpec::ExpPoly { degree: 2, terms: 3, amplitude: 0.3, seed: rng.gen() },
        ]);
        let phi = Symbol::from_spec(&dom, &spec)?;
        let got = winding_vector_with(&phi, 4, SEED, &LoopParams::default())?.k;
        let want = WindingVector(k);
        if got != want {
            bad.push(format!("#{i} {dom}: {:?} != {:?}", got.0, want.0));
            continue;
        }
        if !factorize_check(&phi, &got, 4, SEED)?.passed {
            bad.push(format!("#{i} {dom}: factorization fails"));
            continue;
        }
        let hits = uniqueness_search(&phi, &got, 1, 2, SEED)?;
        if hits != vec![want] {
            bad.push(format!("#{i} {dom}: {} candidates", hits.len()));
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{}/50 recovered, factorized and unique {bad:?}", 50 - bad.len())))
}

fn criterion_5() -> Result<Outcome> {
    let t = Truncation::u2(-3, 3, 3)?;
    let n = t.len();
    let gram = max_abs_diff(&gram_matrix(&t)?, &CMatrix::identity(n, n));

    let dom = HardyModel::U2.domain();
    let op = multiplication_matrix(&Symbol::norm_power(&dom, &[1])?, &t, false)?;
    let shift = CMatrix::from_fn(n, n, |a, b| {
        let (ia, ib) = (op.indices[a], op.indices[b]);
        Complex64::new((ia.l == ib.l + 1 && (ia.d, ia.j, ia.k) == (ib.d, ib.j, ib.k)) as u8 as f64, 0.0)
    });
    let shift_res = max_abs_diff(&op.matrix, &shift);

    // P applied to every basis vector: l < 0 goes to exactly zero, l >= 0 is kept
    let p = hardy_projection(&t);
    let mut kills = true;
    for (b, idx) in p.indices.iter().enumerate() {
        let col = p.matrix.column(b);
        let expect_kept = idx.l >= 0;
        for (a, v) in col.iter().enumerate() {
            let want = if expect_kept && a == b { 1.0 } else { 0.0 };
            kills &= *v == Complex64::new(want, 0.0);
        }
    }
    let passed = gram <= 1e-8 && shift_res <= 1e-8 && kills;
    Ok(Outcome::new(passed, format!("dim {n}: |G-I| {gram:.2e}, N shift {shift_res:.2e}, P kills l<0 exactly {kills}")))
}

fn criterion_6() -> Result<Outcome> {
    let f = DomainFactor::TypeI(2);
    let mut us = Vec::new();
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        us.push(Element::from_fn(f, |a, b| Complex64::new(((a, b) == (i, j)) as u8 as f64, 0.0))?);
    }
    let mut rng = rng_from_seed(SEED + 6);
    for _ in 0..5 {
        us.push(Element::new(f, ginibre(2, &mut rng))?);
    }
    let t = Truncation::u2(-2, 2, 3)?;
    let mut worst = 0.0f64;
    for u in &us {
        worst = worst.max(match extract_ab(u, &t) {
            Ok(s) => s.leak,
            Err(tubetop::Error::Leak { leak }) => leak,
            Err(e) => return Err(e),
        });
    }
    Ok(Outcome::new(worst <= LEAK_TOL, format!("max leak {worst:.2e} <= 1e-8 over {} u", us.len())))
}

fn criterion_7() -> Result<Outcome> {
    let cases = gk_family(30, 4, SEED);
    let mut bad = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let f = Symbol::from_spec(&ProductDomain::circle(), &c.spec)?;
        let v = finite_section_index(&f, &DEFAULT_SIZES, SEED)?;
        if v.analytic_index != AnalyticIndex::Value(-c.k) || !v.matches {
            bad.push(format!("#{i} k={} index={:?}", c.k, v.analytic_index));
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{}/30 equal -k at sizes {DEFAULT_SIZES:?} {bad:?}", 30 - bad.len())))
}

fn criterion_8() -> Result<Outcome> {
    let t = Truncation::u2(0, 4, 2)?;
    let symbols: [(&[(i64, f64, f64)], i64); 5] = [
        (&[(1, 1.0, 0.0)], 1),
        (&[(2, 1.0, 0.0), (0, 0.1, 0.0)], 2),
        (&[(3, 1.0, 0.0), (1, 0.2, 0.1)], 3),
        (&[(-1, 1.0, 0.0), (1, 0.3, 0.0)], -1),
        (&[(0, 2.0, 0.0), (-3, 0.5, -0.5)], 0),
    ];
    let (mut worst, mut bad) = (0.0f64, Vec::new());
    for (terms, k) in symbols {
        let r = u2_reduction_check(&laurent(terms)?, &t, &DEFAULT_SIZES, SEED)?;
        worst = worst.max(r.max_residual);
        if r.per_sector_index != AnalyticIndex::Value(-k) || !r.matches {
            bad.push(format!("k={k} index={:?}", r.per_sector_index));
        }
    }
    Ok(Outcome::new(
        worst <= 1e-8 && bad.is_empty(),
        format!("max sector residual {worst:.2e} <= 1e-8, per-sector index -k on 5 symbols {bad:?}"),
    ))
}

fn criterion_9() -> Result<Outcome> {
    let mut bad = Vec::new();
    for i in 0..10u64 {
        let size = 2 + (i as usize % 2);
        let (m, k) = random_block_symbol(size, 2, SEED + i)?;
        let v = block_index(&m, &DEFAULT_BLOCK_SIZES, SEED)?;
        let winding = v.topological_index.as_ref().map(|w| w.0[0]);
        if v.analytic_index != AnalyticIndex::Value(-k) || winding != Some(k) || !v.matches {
            bad.push(format!("#{i} {size}x{size} k={k} index={:?}", v.analytic_index));
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{}/10 block index = -winding(det) {bad:?}", 10 - bad.len())))
}

fn criterion_10() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut passed = true;
    // symbols with a zero on the circle: simple and double zero at 1
    for (name, terms, need_small) in [
        ("l-1", vec![(1, 1.0, 0.0), (0, -1.0, 0.0)], false),
        ("(l-1)^2", vec![(2, 1.0, 0.0), (1, -2.0, 0.0), (0, 1.0, 0.0)], true),
    ] {
        let r = fredholm_proxy(&laurent(&terms)?, &DEFAULT_SIZES)?;
        let last = *r.sigma_min.last().unwrap_or(&f64::INFINITY);
        let ok = r.analytic_index == AnalyticIndex::Unstable && r.decaying && (!need_small || last < 1e-3);
        passed &= ok;
        parts.push(format!("{name}: unstable, sigma_min(256) {last:.2e}{}", if ok { "" } else { " FAILED" }));
    }
    // invertible symbols with min|f| >= 0.5
    for (name, terms) in [
        ("l-2", vec![(1, 1.0, 0.0), (0, -2.0, 0.0)]),
        ("1.5+l", vec![(1, 1.0, 0.0), (0, 1.5, 0.0)]),
        ("l^2+0.4l", vec![(2, 1.0, 0.0), (1, 0.4, 0.0)]),
    ] {
        let r = fredholm_proxy(&laurent(&terms)?, &DEFAULT_SIZES)?;
        let ok = r.min_abs_symbol >= 0.5 && r.lower_bound >= 0.1;
        passed &= ok;
        parts.push(format!("{name}: min|f| {:.2}, sigma_min >= {:.3}{}", r.min_abs_symbol, r.lower_bound, if ok { "" } else { " FAILED" }));
    }
    Ok(Outcome::new(passed, parts.join("; ")))
}

fn main() {
    rayon::ThreadPoolBuilder::new().num_threads(1).build_global().ok();
    let s = Duration::from_secs;
    let criteria: [(u32, Option<Duration>, fn() -> Result<Outcome>); 10] = [
        (1, Some(s(5)), criterion_1),
        (2, None, criterion_2),
        (3, Some(s(30)), criterion_3),
        (4, None, criterion_4),
        (5, None, criterion_5),
        (6, None, criterion_6),
        (7, Some(s(60)), criterion_7),
        (8, Some(s(120)), criterion_8),
        (9, None, criterion_9),
        (10, None, criterion_10),
    ];
    let mut failures = 0;
    for (n, limit, run) in criteria {
        let out = timed(limit, run);
        failures += usize::from(!out.passed);
        println!("criterion {n}: {} {}", if out.passed { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("acceptance: {}/10 passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
