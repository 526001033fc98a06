use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsconst::certify::{certify_bounds, AsymptoticModel, CertifyOptions};
use nsconst::fields::{advect, leray_project, sobolev_norm, FourierField};
use nsconst::kernel::{eval_e, remainder_extrema, taylor_coeff, ExtremaOptions};
use nsconst::lattice::{wedge_norm_sq, LatticeVector, Radius};
use nsconst::sums::{k_m, kk_direct, SphereSearchOptions, SumConfig};

fn random_vector(rng: &mut ChaCha8Rng, d: usize, max_norm: i64) -> LatticeVector {
    loop {
        let c: Vec<i64> = (0..d).map(|_| rng.gen_range(-max_norm..=max_norm)).collect();
        let m: i64 = c.iter().map(|x| x * x).sum();
        if m > 0 && m <= max_norm * max_norm {
            return LatticeVector::new(c).unwrap();
        }
    }
}

/// A real field with `modes` random ± pairs in `|k| ≤ max_norm`, made
/// divergence-free when asked.
fn random_field(rng: &mut ChaCha8Rng, d: usize, max_norm: i64, modes: usize, solenoidal: bool) -> FourierField {
    let mut f = FourierField::zero(d);
    for _ in 0..modes {
        let k = random_vector(rng, d, max_norm);
        let c: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        f.insert_pair(k, c).unwrap();
    }
    if solenoidal {
        leray_project(&f)
    } else {
        f
    }
}

fn cfg(d: usize, n: f64, rho: f64) -> SumConfig {
    SumConfig::new(d, n, Radius::new(rho).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // |q·z| ≤ |p∧q| |z| / |p| whenever p·z = 0.
    #[test]
    fn projection_angle_inequality(
        d in 2usize..6,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let pp: f64 = p.iter().map(|x| x * x).sum();
        prop_assume!(pp > 1e-6);
        let raw: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let pz: Complex64 = raw.iter().zip(&p).map(|(z, x)| z * x).sum();
        let z: Vec<Complex64> = raw.iter().zip(&p).map(|(w, x)| w - pz * x / pp).collect();
        let qz: Complex64 = z.iter().zip(&q).map(|(w, x)| w * x).sum();
        let zz: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        let rhs = wedge_norm_sq(&p, &q) * zz / pp;
        prop_assert!(qz.norm_sqr() <= rhs * (1.0 + 1e-12) + 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn leray_contracts_and_is_idempotent(
        d in 2usize..5,
        modes in 1usize..8,
        n in 0.0f64..6.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_field(&mut rng, d, 5, modes, false);
        let p = leray_project(&v);
        prop_assert!(sobolev_norm(&p, n) <= sobolev_norm(&v, n) * (1.0 + 1e-14));
        let pp = leray_project(&p);
        for (k, c) in p.modes() {
            let c2 = pp.get(k).unwrap();
            for (a, b) in c.iter().zip(c2) {
                prop_assert!((a - b).norm() <= 1e-14 * (1.0 + a.norm()));
            }
        }
        prop_assert!(p.is_divergence_free(1e-12));
    }
}

#[test]
fn taylor_sandwich_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = 6;
    for n in [2.0, 3.5, 10.0] {
        let ex = remainder_extrema(n, t, &ExtremaOptions::default()).unwrap();
        let coeffs: Vec<_> = (0..t).map(|l| taylor_coeff(n, l)).collect();
        for _ in 0..10_000 {
            let c: f64 = rng.gen_range(-1.0..=1.0);
            let xi: f64 = rng.gen_range(0.0..=0.5);
            let e = eval_e(n, c, xi).unwrap();
            let mut poly = 0.0;
            let mut scale = e.abs();
            for (l, p) in coeffs.iter().enumerate() {
                let term = p.eval(c) * xi.powi(l as i32);
                poly += term;
                scale += term.abs();
            }
            let xt = xi.powi(t as i32);
            let slack = 1e-12 * scale;
            assert!(poly + ex.mu * xt <= e + slack, "n={n} c={c} xi={xi}");
            assert!(e <= poly + ex.big_m * xt + slack, "n={n} c={c} xi={xi}");
        }
    }
}

#[test]
fn asymptotic_sandwich_on_outer_shell() {
    let rho = 5.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (d, n) in [(3, 2.0), (3, 3.0), (2, 2.0)] {
        let c = cfg(d, n, rho);
        let model = AsymptoticModel::build(&c, 6, &ExtremaOptions::default(), &SphereSearchOptions::default()).unwrap();
        let mut checked = 0;
        while checked < 60 {
            let k = random_vector(&mut rng, d, 20);
            let x = k.norm();
            if !(2.0 * rho..=4.0 * rho).contains(&x) {
                continue;
            }
            let v = k_m(&k, &c).unwrap();
            let tol = 1e-12 * v;
            assert!(model.lower_at(x) <= v + tol, "d={d} n={n} k={k}");
            assert!(v <= model.upper_at(x) + tol, "d={d} n={n} k={k}");
            assert!(v <= model.majorant_at(2.0 * rho) + tol);
            checked += 1;
        }
        // Far out, both sides close in on Z_n.
        let far = LatticeVector::new([vec![100], vec![0; d - 1]].concat()).unwrap();
        let v = k_m(&far, &c).unwrap();
        assert!((v - model.z_n).abs() < 0.05 * model.z_n);
    }
}

#[test]
fn outer_argmax_is_stable_under_larger_search() {
    let c = cfg(3, 3.0, 5.0);
    let a = nsconst::certify::search_sup_km(&c, 10.0).unwrap();
    let b = nsconst::certify::search_sup_km(&c, 14.0).unwrap();
    assert_eq!(a.argmax, b.argmax);
    assert_eq!(a.max.to_bits(), b.max.to_bits());
}

/// `|k|^{2n} |(v·∂w)_k|² ≤ (2π)^{-d} KK_n(k) Σ_h |h|^{2n}|v_h|² |k-h|^{2n+2}|w_{k-h}|²`.
#[test]
fn holder_chain_at_random_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = 3;
    let n = 2.0;
    let c = cfg(d, n, 5.0);
    let v = random_field(&mut rng, d, 3, 4, true);
    let w = random_field(&mut rng, d, 3, 4, true);
    let adv = advect(&v, &w).unwrap();
    let ks: Vec<LatticeVector> = adv.modes().map(|(k, _)| k.clone()).take(10).collect();
    assert_eq!(ks.len(), 10);
    for k in ks {
        let coef = adv.get(&k).unwrap();
        let lhs = (k.norm_sq() as f64).powf(n) * coef.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut dsum = 0.0;
        for (h, vh) in v.modes() {
            let g = k.sub(h);
            if let Some(wg) = w.get(&g) {
                let hv: f64 = vh.iter().map(|z| z.norm_sqr()).sum();
                let gw: f64 = wg.iter().map(|z| z.norm_sqr()).sum();
                dsum += (h.norm_sq() as f64).powf(n) * hv * (g.norm_sq() as f64).powf(n + 1.0) * gw;
            }
        }
        let kk = kk_direct(&k, &c, 2.0 * (k.norm() + 5.0) + 1.0).unwrap();
        let rhs = (2.0 * PI).powi(-(d as i32)) * kk.upper * dsum;
        assert!(lhs <= rhs * (1.0 + 1e-12), "k={k}: {lhs} > {rhs}");
    }
}

#[test]
fn advection_bounded_by_k_plus() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 3.0;
    let cert = certify_bounds(&CertifyOptions::new(3, n)).unwrap();
    for _ in 0..20 {
        let v = random_field(&mut rng, 3, 5, 5, true);
        let w = random_field(&mut rng, 3, 5, 5, true);
        let adv = advect(&v, &w).unwrap();
        let lhs = sobolev_norm(&adv, n);
        let rhs = cert.k_plus * sobolev_norm(&v, n) * sobolev_norm(&w, n + 1.0);
        assert!(lhs <= rhs, "{lhs} > {rhs}");
        assert!(sobolev_norm(&leray_project(&adv), n) <= lhs * (1.0 + 1e-14));
    }
}
