//! Upper bounds for infinite lattice tails `Σ_{|h|≥ρ} |h|^{-ν}` and the
//! uniform far-region bound `δK_n`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::kernel::wedge_power_constant;
use crate::numeric::{binomial, gamma_half};

/// Validated inputs of [`tail_sum_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundInputs {
    d: usize,
    nu: f64,
    rho: f64,
}

impl TailBoundInputs {
    pub fn new(d: usize, nu: f64, rho: f64) -> Result<Self> {
        if d < 1 {
            return Err(invalid("dimension must be positive"));
        }
        if !(nu.is_finite() && nu > d as f64) {
            return Err(invalid(format!("tail exponent nu={nu} must exceed d={d}")));
        }
        let min_rho = 2.0 * (d as f64).sqrt();
        if !(rho.is_finite() && rho > min_rho) {
            return Err(invalid(format!("cutoff rho={rho} must exceed 2*sqrt(d)={min_rho:.6}")));
        }
        Ok(Self { d, nu, rho })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// `(2π^{d/2}/Γ(d/2)) Σ_{i<d} binom(d-1,i) d^{(d-1-i)/2} / ((ν-1-i)(ρ-2√d)^{ν-1-i})`,
/// an upper bound for `Σ_{h∈Z^d, |h|≥ρ} |h|^{-ν}`.
pub fn tail_sum_bound(inputs: &TailBoundInputs) -> f64 {
    let d = inputs.d;
    let df = d as f64;
    let gap = inputs.rho - 2.0 * df.sqrt();
    let mut s = 0.0;
    for i in 0..d {
        let e = inputs.nu - 1.0 - i as f64;
        s += binomial(d as u64 - 1, i as u64) as f64 * df.powf((df - 1.0 - i as f64) / 2.0) / (e * gap.powf(e));
    }
    2.0 * PI.powf(df / 2.0) / gamma_half(d as u32) * s
}

/// `δK_n = 2 B_n · tail_sum_bound(d, 2n, ρ)`, a uniform bound on the part of
/// the lattice sum outside the cutoff.
pub fn delta_k(d: usize, n: f64, rho: f64) -> Result<f64> {
    if !(n.is_finite() && 2.0 * n > d as f64) {
        return Err(invalid(format!("order n={n} must exceed d/2={}", d as f64 / 2.0)));
    }
    let inputs = TailBoundInputs::new(d, 2.0 * n, rho)?;
    Ok(2.0 * wedge_power_constant(n) * tail_sum_bound(&inputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::for_each_cube_point;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bound_dominates_partial_tail() {
        let inputs = TailBoundInputs::new(3, 6.0, 10.0).unwrap();
        let bound = tail_sum_bound(&inputs);
        let mut partial = 0.0;
        for_each_cube_point(3, 99, |p| {
            let m: i64 = p.iter().map(|x| x * x).sum();
            if (100..100 * 100).contains(&m) {
                partial += (m as f64).powf(-3.0);
            }
        });
        assert!(partial > 0.0 && partial < bound, "{partial} vs {bound}");
    }

    #[test]
    fn bound_decreases_with_rho() {
        let a = tail_sum_bound(&TailBoundInputs::new(3, 6.0, 20.0).unwrap());
        let b = tail_sum_bound(&TailBoundInputs::new(3, 6.0, 10.0).unwrap());
        assert!(a < b);
    }

    #[test]
    fn exponent_gate() {
        let ok = TailBoundInputs::new(3, 4.0, 10.0).unwrap();
        assert!(tail_sum_bound(&ok).is_finite() && tail_sum_bound(&ok) > 0.0);
        assert!(TailBoundInputs::new(3, 3.0, 10.0).is_err());
        assert!(TailBoundInputs::new(3, 6.0, 2.0 * 3f64.sqrt()).is_err());
        assert!(delta_k(3, 1.5, 10.0).is_err());
    }

    #[test]
    fn published_delta_values() {
        let cases = [
            (2.0, 20.0, 5.6856),
            (3.0, 10.0, 0.45295),
            (4.0, 10.0, 0.021561),
            (5.0, 10.0, 0.0012414),
            (10.0, 10.0, 2.1401e-9),
        ];
        for (n, rho, expect) in cases {
            let v = delta_k(3, n, rho).unwrap();
            // Published values are truncated, so the computed one sits just above.
            assert!(v >= expect && rel(v, expect) < 1e-4, "n={n}: {v}");
        }
    }

    proptest! {
        #[test]
        fn factorization(d in 2usize..6, excess in 0.1f64..8.0, gap in 0.5f64..30.0) {
            let n = d as f64 / 2.0 + excess;
            let rho = 2.0 * (d as f64).sqrt() + gap;
            let direct = delta_k(d, n, rho).unwrap();
            let t = tail_sum_bound(&TailBoundInputs::new(d, 2.0 * n, rho).unwrap());
            let b = wedge_power_constant(n);
            prop_assert!(rel(direct, 2.0 * b * t) < 1e-15);
        }
    }
}
