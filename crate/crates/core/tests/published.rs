//! Published constants for d = 3, and frozen oracle values where the
//! published maximum is not the true one.

use nsconst::certify::{search_sup_km, AsymptoticModel};
use nsconst::kernel::{remainder_extrema, ExtremaOptions};
use nsconst::lattice::{LatticeVector, Radius};
use nsconst::sums::{k_m, SphereSearchOptions, SumConfig};
use nsconst::tail::delta_k;

fn cfg(n: f64, rho: f64) -> SumConfig {
    SumConfig::new(3, n, Radius::new(rho).unwrap()).unwrap()
}

fn lv(c: &[i64]) -> LatticeVector {
    LatticeVector::new(c.to_vec()).unwrap()
}

/// `x` starts with the digits of `published` (a truncation, e.g. "22.022...").
fn truncates_to(x: f64, published: f64, last_digit: f64) -> bool {
    if published >= 0.0 {
        x >= published && x < published + last_digit
    } else {
        x <= published && x > published - last_digit
    }
}

#[test]
fn k_m_at_reported_points() {
    let cases: [(f64, f64, &[i64], f64, f64); 5] = [
        (2.0, 20.0, &[9, 9, 9], 22.022, 1e-3),
        (3.0, 10.0, &[2, 1, 1], 25.301, 1e-3),
        (4.0, 10.0, &[2, 1, 0], 48.038, 1e-3),
        (5.0, 10.0, &[1, 1, 0], 64.455, 1e-3),
        (10.0, 10.0, &[1, 1, 0], 2048.0, 0.1),
    ];
    for (n, rho, k, expect, unit) in cases {
        let v = k_m(&lv(k), &cfg(n, rho)).unwrap();
        assert!(truncates_to(v, expect, unit), "n={n} k={k:?}: {v}");
    }
}

#[test]
fn sup_search_low_orders() {
    let r = search_sup_km(&cfg(3.0, 10.0), 20.0).unwrap();
    assert_eq!(r.argmax, lv(&[2, 1, 1]));
    assert!(truncates_to(r.max, 25.301, 1e-3));
    let r = search_sup_km(&cfg(4.0, 10.0), 20.0).unwrap();
    assert_eq!(r.argmax, lv(&[2, 1, 0]));
    assert!(truncates_to(r.max, 48.038, 1e-3));
}

#[test]
fn sup_search_n2() {
    let r = search_sup_km(&cfg(2.0, 20.0), 40.0).unwrap();
    assert_eq!(r.argmax, lv(&[9, 9, 9]));
    assert!(truncates_to(r.max, 22.022, 1e-3));
}

// Oracle: brute-force numpy evaluation of the cutoff sum over the cube,
// searched over all canonical |k| < 20.
const SUP_N5: f64 = 106.990_818_097_145_96;
const SUP_N10: f64 = 9_556.568_572_305_623;

#[test]
fn sup_search_high_orders_peaks_at_210() {
    for (n, oracle) in [(5.0, SUP_N5), (10.0, SUP_N10)] {
        let r = search_sup_km(&cfg(n, 10.0), 20.0).unwrap();
        assert_eq!(r.argmax, lv(&[2, 1, 0]), "n={n}");
        assert!(((r.max - oracle) / oracle).abs() < 1e-12, "n={n}: {}", r.max);
        // Two terms, h = (1,0,0) and (1,1,0), each |h∧k|² / 2^{n+1}.
        let two_terms = 5f64.powf(n) * 2.0 / 2f64.powf(n + 1.0);
        assert!(r.max > two_terms);
        let at_110 = k_m(&lv(&[1, 1, 0]), &cfg(n, 10.0)).unwrap();
        assert!(r.max > at_110);
    }
}

#[test]
fn far_region_bounds() {
    let cases = [
        (2.0, 20.0, 5.6856, 1e-4),
        (3.0, 10.0, 0.45295, 1e-5),
        (4.0, 10.0, 0.021561, 1e-6),
        (5.0, 10.0, 0.0012414, 1e-7),
        (10.0, 10.0, 2.1401e-9, 1e-13),
    ];
    for (n, rho, expect, unit) in cases {
        let v = delta_k(3, n, rho).unwrap();
        assert!(truncates_to(v, expect, unit), "n={n}: {v}");
    }
}

#[test]
fn remainder_extrema_published() {
    let opts = ExtremaOptions::default();
    let e2 = remainder_extrema(2.0, 6, &opts).unwrap();
    let e5 = remainder_extrema(5.0, 6, &opts).unwrap();
    let e10 = remainder_extrema(10.0, 6, &opts).unwrap();
    assert!(truncates_to(e2.mu_attained, -22.720, 1e-3));
    assert!(truncates_to(e2.mu, -22.720, 1e-3));
    assert!(truncates_to(e2.big_m_attained, 73.835, 1e-3));
    assert!(truncates_to(e5.big_m_attained, 7252.9, 0.1));
    assert!(truncates_to(e10.big_m_attained, 4.6371e6, 100.0));
    for e in [e2, e5, e10] {
        assert!(e.mu_width() <= 1e-3 * e.mu.abs());
        assert!(e.big_m_width() <= 1e-3 * e.big_m.abs());
    }
}

#[test]
fn asymptotic_coefficients_n2() {
    let c = cfg(2.0, 20.0);
    let model = AsymptoticModel::build(&c, 6, &ExtremaOptions::default(), &SphereSearchOptions::default()).unwrap();
    assert!(truncates_to(model.z_n, 21.204, 1e-3));
    let q2 = &model.q[0];
    assert_eq!(q2.ell, 2);
    assert!(truncates_to(q2.max_attained, 598.27, 1e-2));
    let third = 1.0 / 3f64.sqrt();
    for u in &q2.argmax {
        assert!((u.abs() - third).abs() < 1e-3, "{:?}", q2.argmax);
    }
    assert!(truncates_to(model.q[1].max_attained, 1.1506e5, 10.0));
    assert!(truncates_to(model.big_v, 1.1794e9, 1e5));
    assert!(model.majorant_at(40.0) <= 21.912);
}

#[test]
fn q22_coefficients() {
    let c = cfg(2.0, 20.0);
    let q = nsconst::sums::build_q(&c, 2).unwrap();
    // 2904.7... - 4569.7... Σ_{i<j} u_i²u_j² - 2349.8... Σ u_i⁴ on the sphere;
    // each coefficient is truncated, so it is known to within 0.1.
    let u = [0.3f64, -0.5, (1.0f64 - 0.34).sqrt()];
    let s4: f64 = u.iter().map(|x| x.powi(4)).sum();
    let s22 = u[0].powi(2) * u[1].powi(2) + u[0].powi(2) * u[2].powi(2) + u[1].powi(2) * u[2].powi(2);
    let published = 2904.7 - 4569.7 * s22 - 2349.8 * s4;
    let v = q.eval(&u);
    assert!((v - published).abs() <= 0.1 * (1.0 + s22 + s4), "{v} vs {published}");
}

#[test]
fn outer_bound_n4() {
    let c = cfg(4.0, 10.0);
    let model = AsymptoticModel::build(&c, 6, &ExtremaOptions::default(), &SphereSearchOptions::default()).unwrap();
    assert!(model.majorant_at(20.0) <= 9.6152);
}

#[test]
fn z_limit_n10() {
    let c = cfg(10.0, 10.0);
    assert!(truncates_to(nsconst::sums::z_n(&c), 8.0158, 1e-4));
}
