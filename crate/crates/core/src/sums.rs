//! Lattice sums: the finite part `K_m(k)` of the convolution sum, a truncated
//! direct evaluation of `KK_n(k)` with a certified tail, and the coefficients
//! `Z_n`, `Q_{nℓ}`, `v_{nt}`, `V_{nt}` of the large-`|k|` expansion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{substituted_coeff, RemainderExtrema};
use crate::lattice::{enumerate_ball, for_each_cube_point, BallEnumeration, LatticeVector, Radius};
use crate::numeric::{inv_pow, multinomial, par_exact_sum, pow_int_base, ExactSum};
use crate::poly::MultiPoly;
use crate::tail::{tail_sum_bound, TailBoundInputs};

/// Largest lookup table of `m^{-(n+1)}` kept per configuration.
const MAX_TABLE: u64 = 1 << 22;

/// Relative widening applied to directly summed values to cover the
/// rounding of individual summands.
pub const SUMMAND_ROUNDING: f64 = 1e-13;

/// Dimension, order, cutoff and the enumerated cutoff ball.
#[derive(Debug, Clone)]
pub struct SumConfig {
    d: usize,
    n: f64,
    rho: Radius,
    ball: BallEnumeration,
    /// `m^{-(n+1)}`, i.e. `|h|^{-(2n+2)}` at `|h|² = m`.
    weight_table: Vec<f64>,
}

impl SumConfig {
    pub fn new(d: usize, n: f64, rho: Radius) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {d}")));
        }
        if !(n.is_finite() && 2.0 * n > d as f64) {
            return Err(invalid(format!("order n={n} must exceed d/2={}", d as f64 / 2.0)));
        }
        let min_rho = 2.0 * (d as f64).sqrt();
        if !(rho.value() > min_rho) {
            return Err(invalid(format!("cutoff rho={rho} must exceed 2*sqrt(d)={min_rho:.6}")));
        }
        let ball = enumerate_ball(d, rho)?;
        let cap = ((16.0 * rho.value() * rho.value()).ceil() as u64 + 1).min(MAX_TABLE);
        let weight_table = (0..cap)
            .map(|m| if m == 0 { 0.0 } else { inv_pow(m, n + 1.0) })
            .collect();
        Ok(Self {
            d,
            n,
            rho,
            ball,
            weight_table,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn rho(&self) -> Radius {
        self.rho
    }

    pub fn ball(&self) -> &BallEnumeration {
        &self.ball
    }

    /// `m^{-(n+1)}`.
    #[inline]
    fn weight(&self, m: u64) -> f64 {
        match self.weight_table.get(m as usize) {
            Some(&w) => w,
            None => inv_pow(m, self.n + 1.0),
        }
    }

    /// `|k|^{2n} |h∧k|² / (|h|^{2n+2} |k-h|^{2n+2})` from the integer data
    /// `a = |h|²`, `b = |k-h|²`, `wedge = |h∧k|²`. The product is symmetric
    /// in `a` and `b`, so `h` and `k - h` give bitwise-identical terms.
    #[inline]
    fn summand(&self, kpow: f64, a: u64, b: u64, wedge: i128) -> f64 {
        (self.weight(a) * self.weight(b)) * (wedge as f64) * kpow
    }

    fn check_vector(&self, k: &LatticeVector) -> Result<()> {
        if k.dim() != self.d {
            return Err(invalid(format!(
                "vector {k} has dimension {}, expected {}",
                k.dim(),
                self.d
            )));
        }
        if k.is_zero() {
            return Err(invalid("k must be nonzero"));
        }
        Ok(())
    }

    /// `Σ_{h∈Z^d\{0}, |h|<ρ} |h|^{-p}`.
    pub fn radial_sum(&self, p: f64) -> f64 {
        let mut acc = ExactSum::new();
        for (&m, idx) in self.ball.by_norm_sq() {
            acc.add(idx.len() as f64 * inv_pow(m, p / 2.0));
        }
        acc.value()
    }
}

/// The finite part `K_m(k) = |k|^{2n} Σ_{|h|<ρ, h≠0,k} [1 + θ(|k-h| - ρ)] |h∧k|² / (|h|^{2n+2}|k-h|^{2n+2})`.
///
/// For `|k|² ≥ 4ρ²` every `h` in the ball has `|k - h| > ρ`, and the sum is
/// twice the sum over the whole ball. The terms are accumulated exactly, so
/// the result is independent of summation order and invariant bitwise under
/// signed permutations of `k`.
pub fn k_m(k: &LatticeVector, cfg: &SumConfig) -> Result<f64> {
    cfg.check_vector(k)?;
    Ok(k_m_unchecked(k.coords(), cfg))
}

pub(crate) fn k_m_unchecked(k: &[i64], cfg: &SumConfig) -> f64 {
    let d = cfg.d;
    let k_sq: i64 = k.iter().map(|x| x * x).sum();
    let k_sq = k_sq as u64;
    let far = !cfg.rho.scaled(2).contains(k_sq);
    let kpow = pow_int_base(k_sq, cfg.n);
    let mut acc = ExactSum::new();
    for (h, a) in cfg.ball.iter() {
        let mut b = 0i64;
        let mut dot = 0i64;
        for i in 0..d {
            let x = k[i] - h[i];
            b += x * x;
            dot += h[i] * k[i];
        }
        if b == 0 {
            continue;
        }
        let b = b as u64;
        let wedge = (a as i128) * (k_sq as i128) - (dot as i128) * (dot as i128);
        if wedge == 0 {
            continue;
        }
        let term = cfg.summand(kpow, a, b, wedge);
        if far || !cfg.rho.contains(b) {
            acc.add(2.0 * term);
        } else {
            acc.add(term);
        }
    }
    acc.value()
}

/// A closed interval of reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// An enclosure of the full sum `KK_n(k)`: the terms with `|h| < R` are
/// summed directly and the rest is bounded using `|k - h| ≥ |h|/2` and
/// `|h∧k| ≤ |h||k|`, giving the tail `(2|k|)^{2n+2} Σ_{|h|≥R} |h|^{-(4n+2)}`.
pub fn kk_direct(k: &LatticeVector, cfg: &SumConfig, truncation_radius: f64) -> Result<Interval> {
    cfg.check_vector(k)?;
    let k_norm = k.norm();
    let min_r = 2.0 * (k_norm + cfg.rho.value());
    if !(truncation_radius > min_r) {
        return Err(invalid(format!(
            "truncation radius {truncation_radius} must exceed 2(|k| + rho) = {min_r}"
        )));
    }
    let radius = Radius::new(truncation_radius)?;
    let r = radius.ceil();
    let d = cfg.d;
    let kc = k.coords();
    let k_sq = k.norm_sq() as u64;
    let kpow = pow_int_base(k_sq, cfg.n);
    let first: Vec<i64> = (-r..=r).collect();
    let s = par_exact_sum(0..first.len(), 1, |range, acc| {
        let mut h = vec![0i64; d];
        for idx in range {
            h[0] = first[idx];
            for_each_cube_point(d - 1, r, |rest| {
                h[1..].copy_from_slice(rest);
                let a: i64 = h.iter().map(|x| x * x).sum();
                if a == 0 || !radius.contains(a as u64) {
                    return;
                }
                let mut b = 0i64;
                let mut dot = 0i64;
                for i in 0..d {
                    let x = kc[i] - h[i];
                    b += x * x;
                    dot += h[i] * kc[i];
                }
                if b == 0 {
                    return;
                }
                let wedge = (a as i128) * (k_sq as i128) - (dot as i128) * (dot as i128);
                if wedge != 0 {
                    acc.add(cfg.summand(kpow, a as u64, b as u64, wedge));
                }
            });
        }
    });
    let tail_inputs = TailBoundInputs::new(d, 4.0 * cfg.n + 2.0, truncation_radius)?;
    let tail = (2.0 * k_norm).powf(2.0 * cfg.n + 2.0) * tail_sum_bound(&tail_inputs);
    Ok(Interval {
        lower: s * (1.0 - SUMMAND_ROUNDING),
        upper: (s * (1.0 + SUMMAND_ROUNDING) + tail).next_up(),
    })
}

/// `Z_n = 2(1 - 1/d) Σ_{|h|<ρ} |h|^{-2n}`, the limit of `K_m(k)` as `|k| → ∞`.
pub fn z_n(cfg: &SumConfig) -> f64 {
    2.0 * (1.0 - 1.0 / cfg.d as f64) * cfg.radial_sum(2.0 * cfg.n)
}

/// Exponent vectors `2β` with `|β| = half`, in lexicographic order.
fn even_exponents(d: usize, half: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == d - 1 {
            cur.push(2 * left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for b in (0..=left).rev() {
            cur.push(2 * b);
            rec(d, left - b, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, half, &mut Vec::with_capacity(d), &mut out);
    out
}

/// A polynomial on the unit sphere of `R^d` in which every variable appears
/// with even exponent, such as `Q_{nℓ}(u) = 2 Σ_{|h|<ρ} Ê_{nℓ}(u·ĥ) / |h|^{2n-ℓ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePolynomial {
    d: usize,
    ell: usize,
    poly: MultiPoly,
}

impl SpherePolynomial {
    pub fn from_poly(ell: usize, poly: MultiPoly) -> Result<Self> {
        let d = poly.nvars();
        if d < 2 {
            return Err(invalid("sphere polynomial needs at least two variables"));
        }
        if poly.terms().any(|(e, _)| e.iter().any(|&k| k % 2 == 1)) {
            return Err(invalid("sphere polynomial must have even exponents only"));
        }
        Ok(Self { d, ell, poly })
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self {
            d,
            ell: 0,
            poly: MultiPoly::constant(d, c),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.poly.eval(u)
    }

    /// Coefficient of `Π u_i^{e_i}`.
    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.poly.coeff(exps)
    }
}

/// Builds `Q_{nℓ}` in expanded form from the even moments
/// `Σ_{|h|<ρ} h^α / |h|^{2n-ℓ+|α|}` of the cutoff ball.
pub fn build_q(cfg: &SumConfig, ell: usize) -> Result<SpherePolynomial> {
    if ell % 2 == 1 || ell < 2 {
        return Err(invalid(format!("Q needs an even ell >= 2, got {ell}")));
    }
    let d = cfg.d;
    let n = cfg.n;
    let e_hat = substituted_coeff(n, ell, d)?;
    let mut poly = MultiPoly::zero(d);
    poly.add_term(vec![0; d], 2.0 * e_hat.coeff(0) * cfg.radial_sum(2.0 * n - ell as f64));

    let mut groups: Vec<(usize, f64, Vec<Vec<u32>>)> = Vec::new();
    for j in (4..=ell + 2).step_by(2) {
        let a = e_hat.coeff(j);
        if a != 0.0 {
            groups.push((j, a, even_exponents(d, j as u32 / 2)));
        }
    }
    let total: usize = groups.iter().map(|g| g.2.len()).sum();
    let mut moments: Vec<ExactSum> = vec![ExactSum::new(); total];
    for (h, m) in cfg.ball.iter() {
        let mut slot = 0;
        for (j, _, exps) in &groups {
            let w = inv_pow(m, (2.0 * n - ell as f64 + *j as f64) / 2.0);
            for e in exps {
                let mut mono = 1.0;
                for (x, &k) in h.iter().zip(e) {
                    mono *= (*x as f64).powi(k as i32);
                }
                moments[slot].add(w * mono);
                slot += 1;
            }
        }
    }
    let mut slot = 0;
    for (_, a, exps) in &groups {
        for e in exps {
            let coef = 2.0 * a * multinomial(e) as f64 * moments[slot].value();
            poly.add_term(e.clone(), coef);
            slot += 1;
        }
    }
    SpherePolynomial::from_poly(ell, poly)
}

/// `2 Σ_{|h|<ρ} Ê_{nℓ}(u·ĥ)/|h|^{2n-ℓ}` summed term by term; `u` must be a unit vector.
pub fn q_direct(cfg: &SumConfig, ell: usize, u: &[f64]) -> Result<f64> {
    if u.len() != cfg.d {
        return Err(invalid("direction has the wrong dimension"));
    }
    let e_hat = substituted_coeff(cfg.n, ell, cfg.d)?;
    let mut acc = ExactSum::new();
    for (h, m) in cfg.ball.iter() {
        let norm = (m as f64).sqrt();
        let c: f64 = h.iter().zip(u).map(|(&x, &y)| x as f64 * y).sum::<f64>() / norm;
        acc.add(e_hat.eval(c) * inv_pow(m, cfg.n - ell as f64 / 2.0));
    }
    Ok(2.0 * acc.value())
}

/// Tuning for [`extremize_q`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSearchOptions {
    /// Requested enclosure width relative to the extremal value.
    pub rel_width: f64,
    pub max_boxes: usize,
}

impl Default for SphereSearchOptions {
    fn default() -> Self {
        Self {
            rel_width: 1e-8,
            max_boxes: 2_000_000,
        }
    }
}

/// Enclosures `min_lower ≤ min ≤ min_attained`, `max_attained ≤ max ≤ max_upper`
/// over the unit sphere, with the points attaining the sampled extrema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereExtrema {
    pub min_lower: f64,
    pub min_attained: f64,
    pub argmin: Vec<f64>,
    pub max_attained: f64,
    pub max_upper: f64,
    pub argmax: Vec<f64>,
}

#[derive(Clone)]
struct SimplexBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SimplexBox {
    /// Necessary condition for meeting the sorted region
    /// `1 - Σx ≥ x_1 ≥ x_2 ≥ … ≥ 0`.
    fn may_meet_sorted_region(&self) -> bool {
        let sum_lo: f64 = self.lo.iter().sum();
        if 1.0 - sum_lo < self.lo[0] {
            return false;
        }
        self.hi.windows(2).zip(self.lo.windows(2)).all(|(h, l)| h[0] >= l[1])
    }

    fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    fn radii(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (b - a)).collect()
    }

    fn split(&self) -> [SimplexBox; 2] {
        let (i, _) =
            self.lo
                .iter()
                .zip(&self.hi)
                .map(|(a, b)| b - a)
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, w)| if w > acc.1 { (i, w) } else { acc },
                );
        let mid = 0.5 * (self.lo[i] + self.hi[i]);
        let mut a = self.clone();
        let mut b = self.clone();
        a.hi[i] = mid;
        b.lo[i] = mid;
        [a, b]
    }
}

/// Point on the sphere with `u_1² = 1 - Σx`, `u_{i+1}² = x_i`.
fn sphere_point(x: &[f64]) -> Vec<f64> {
    let first = (1.0 - x.iter().sum::<f64>()).max(0.0);
    std::iter::once(first.sqrt())
        .chain(x.iter().map(|v| v.max(0.0).sqrt()))
        .collect()
}

/// Extrema of a sphere polynomial by branch and bound.
///
/// Writing `s_i = u_i²` turns the polynomial into one on the simplex
/// `Σs = 1`; eliminating `s_1` leaves `d - 1` box variables. Symmetry
/// under signed permutations restricts the search to `s_1 ≥ s_2 ≥ … ≥ s_d`,
/// and each box is bounded by the shifted-coefficient spread of
/// [`MultiPoly::box_spread`].
pub fn extremize_q(q: &SpherePolynomial, opts: &SphereSearchOptions) -> Result<SphereExtrema> {
    let d = q.d;
    let m = d - 1;
    // polynomial in s = (s_1..s_d)
    let mut in_s = MultiPoly::zero(d);
    for (e, c) in q.poly.terms() {
        in_s.add_term(e.iter().map(|k| k / 2).collect(), c);
    }
    let mut subs = Vec::with_capacity(d);
    let mut first = MultiPoly::constant(m, 1.0);
    for i in 0..m {
        first = first.add(&MultiPoly::var(m, i).scale(-1.0));
    }
    subs.push(first);
    for i in 0..m {
        subs.push(MultiPoly::var(m, i));
    }
    let p = in_s.compose(&subs);

    // Vertices of the sorted region: s = (1/j, …, 1/j, 0, …, 0).
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for j in 1..=d {
        seeds.push((0..m).map(|i| if i + 1 < j { 1.0 / j as f64 } else { 0.0 }).collect());
    }

    let mut results: [(f64, f64, Vec<f64>); 2] = [(0.0, 0.0, Vec::new()), (0.0, 0.0, Vec::new())];
    for (slot, sign) in [(0usize, -1.0f64), (1, 1.0)] {
        let mut best = f64::NEG_INFINITY;
        let mut best_x = seeds[0].clone();
        let consider = |x: &[f64], best: &mut f64, best_x: &mut Vec<f64>| {
            if x.iter().sum::<f64>() <= 1.0 && x.iter().all(|&v| v >= 0.0) {
                let v = sign * p.eval(x);
                if v > *best {
                    *best = v;
                    *best_x = x.to_vec();
                }
            }
        };
        for s in &seeds {
            consider(s, &mut best, &mut best_x);
        }
        let root = SimplexBox {
            lo: vec![0.0; m],
            hi: (0..m).map(|i| 1.0 / (i + 2) as f64).collect(),
        };
        let mut work = vec![root];
        let mut bound = f64::NEG_INFINITY;
        let mut processed = 0usize;
        while let Some(bx) = work.pop() {
            processed += 1;
            if processed > opts.max_boxes {
                return Err(Error::EnclosureNotReached {
                    what: format!("sphere polynomial {}", ["minimum", "maximum"][slot]),
                    achieved: f64::NAN,
                    requested: opts.rel_width,
                });
            }
            let c = bx.center();
            consider(&c, &mut best, &mut best_x);
            let (v, spread) = p.box_spread(&c, &bx.radii());
            let upper = sign * v + spread;
            let tol = opts.rel_width * best.abs().max(f64::MIN_POSITIVE);
            if upper <= best + tol {
                bound = bound.max(upper);
                continue;
            }
            for child in bx.split() {
                if child.may_meet_sorted_region() {
                    work.push(child);
                }
            }
        }
        let bound = bound.max(best);
        results[slot] = (sign * best, sign * bound, sphere_point(&best_x));
    }
    let [(min_attained, min_lower, argmin), (max_attained, max_upper, argmax)] = results;
    Ok(SphereExtrema {
        min_lower,
        min_attained,
        argmin,
        max_attained,
        max_upper,
        argmax,
    })
}

/// `(v_{nt}, V_{nt}) = (2 μ_{nt} S, 2 M_{nt} S)` with `S = Σ_{|h|<ρ} |h|^{t-2n}`.
pub fn vv_nt(cfg: &SumConfig, t: usize, extrema: &RemainderExtrema) -> Result<(f64, f64)> {
    if t % 2 == 1 || t < 2 {
        return Err(invalid(format!("t must be even and at least 2, got {t}")));
    }
    if extrema.t != t || extrema.n != cfg.n {
        return Err(invalid(format!(
            "remainder extrema are for n={}, t={}, expected n={}, t={t}",
            extrema.n, extrema.t, cfg.n
        )));
    }
    let s = cfg.radial_sum(2.0 * cfg.n - t as f64);
    Ok((2.0 * extrema.mu * s, 2.0 * extrema.big_m * s))
}

/// Evaluates `K_m` for many vectors in parallel, preserving input order.
pub fn k_m_many(ks: &[LatticeVector], cfg: &SumConfig) -> Result<Vec<f64>> {
    for k in ks {
        cfg.check_vector(k)?;
    }
    Ok(ks.par_iter().map(|k| k_m_unchecked(k.coords(), cfg)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{remainder_extrema, taylor_coeff, ExtremaOptions};
    use crate::lattice::{apply_signed_permutation, signed_permutations};
    use crate::tail::delta_k;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::new(c.to_vec()).unwrap()
    }

    fn cfg(d: usize, n: f64, rho: f64) -> SumConfig {
        SumConfig::new(d, n, Radius::new(rho).unwrap()).unwrap()
    }

    /// The definition over the union domain `{|h| < ρ} ∪ {|k-h| < ρ}`,
    /// evaluated with plain powers.
    fn k_m_by_definition(k: &[i64], n: f64, rho: f64) -> f64 {
        let d = k.len();
        let r = rho.ceil() as i64 + k.iter().map(|x| x.abs()).max().unwrap();
        let kk: f64 = k.iter().map(|&x| (x * x) as f64).sum();
        let mut s = 0.0;
        for_each_cube_point(d, r, |h| {
            let a: f64 = h.iter().map(|&x| (x * x) as f64).sum();
            let b: f64 = h.iter().zip(k).map(|(&x, &y)| ((y - x) * (y - x)) as f64).sum();
            if a == 0.0 || b == 0.0 || (a >= rho * rho && b >= rho * rho) {
                return;
            }
            let dot: f64 = h.iter().zip(k).map(|(&x, &y)| (x * y) as f64).sum();
            let w = a * kk - dot * dot;
            s += kk.powf(n) * w / (a.powf(n + 1.0) * b.powf(n + 1.0));
        });
        s
    }

    #[test]
    fn config_validation() {
        assert!(SumConfig::new(3, 1.5, Radius::new(10.0).unwrap()).is_err());
        assert!(SumConfig::new(3, 2.0, Radius::new(3.0).unwrap()).is_err());
        assert!(SumConfig::new(1, 2.0, Radius::new(10.0).unwrap()).is_err());
        let c = cfg(3, 2.0, 10.0);
        assert!(k_m(&LatticeVector::zero(3), &c).is_err());
        assert!(k_m(&lv(&[1, 0]), &c).is_err());
    }

    #[test]
    fn split_lemma_matches_union_domain() {
        let c = cfg(3, 2.5, 6.0);
        for k in [[1, 0, 0], [2, 1, 0], [3, -2, 1], [5, 5, 1], [7, 6, 5], [12, 1, 0]] {
            let a = k_m(&lv(&k), &c).unwrap();
            let b = k_m_by_definition(&k, 2.5, 6.0);
            assert!((a - b).abs() <= 1e-12 * a, "k={k:?}: {a} vs {b}");
        }
    }

    #[test]
    fn symmetry_is_bitwise() {
        let c = cfg(3, 3.0, 7.0);
        let group = signed_permutations(3);
        for k in [[2, 1, 0], [3, 3, 1], [5, 2, 1], [9, 4, 7], [15, 1, 0]] {
            let k = lv(&k);
            let base = k_m(&k, &c).unwrap().to_bits();
            for (p, mask) in &group {
                let g = apply_signed_permutation(&k, p, *mask);
                assert_eq!(k_m(&g, &c).unwrap().to_bits(), base, "k={k} g={g}");
            }
        }
    }

    #[test]
    fn far_branch_is_twice_the_ball_sum() {
        let c = cfg(3, 2.0, 6.0);
        let k = lv(&[12, 0, 0]); // |k| = 2ρ exactly
        let a = k_m(&k, &c).unwrap();
        let b = k_m_by_definition(&[12, 0, 0], 2.0, 6.0);
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn direct_oracle_sandwich() {
        let c = cfg(3, 2.0, 6.0);
        let dk = delta_k(3, 2.0, 6.0).unwrap();
        for k in [[1, 0, 0], [2, 1, 1], [4, 0, 3], [9, 2, 2]] {
            let k = lv(&k);
            let km = k_m(&k, &c).unwrap();
            let iv = kk_direct(&k, &c, 2.0 * (k.norm() + 6.0) + 1.0).unwrap();
            assert!(km < iv.upper);
            assert!(iv.lower <= km + dk);
        }
    }

    #[test]
    fn direct_oracle_converges_for_large_n() {
        let c = cfg(3, 10.0, 10.0);
        let k = lv(&[1, 1, 0]);
        let wide = kk_direct(&k, &c, 30.0).unwrap();
        let narrow = kk_direct(&k, &c, 50.0).unwrap();
        assert!(narrow.width() < 1e-6);
        assert!(wide.overlaps(&narrow));
    }

    #[test]
    fn direct_oracle_symmetry_and_radius_gate() {
        let c = cfg(3, 2.0, 6.0);
        let a = kk_direct(&lv(&[2, 1, 0]), &c, 20.0).unwrap();
        let b = kk_direct(&lv(&[0, -1, 2]), &c, 20.0).unwrap();
        assert!(a.overlaps(&b));
        assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        assert!(kk_direct(&lv(&[2, 1, 0]), &c, 15.0).is_err());
    }

    #[test]
    fn z_n_limit_for_large_n() {
        let z = z_n(&cfg(3, 60.0, 10.0));
        assert!((z - 8.0).abs() < 1e-9);
    }

    #[test]
    fn q_matches_direct_sum() {
        let c = cfg(3, 2.0, 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ell in [2, 4] {
            let q = build_q(&c, ell).unwrap();
            for _ in 0..100 {
                let mut u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                u.iter_mut().for_each(|x| *x /= norm);
                let a = q.eval(&u);
                let b = q_direct(&c, ell, &u).unwrap();
                let scale = q.poly().terms().map(|(_, c)| c.abs()).sum::<f64>();
                assert!((a - b).abs() <= 1e-10 * scale, "ell={ell}: {a} vs {b}");
                let g = [u[1], -u[2], u[0]];
                assert!((q.eval(&g) - a).abs() <= 1e-10 * scale);
            }
        }
        assert!(build_q(&c, 3).is_err());
        assert!(build_q(&c, 0).is_err());
    }

    #[test]
    fn odd_coefficients_sum_to_zero() {
        let c = cfg(3, 2.0, 8.0);
        let u = [0.48, 0.6, 0.64];
        for ell in [1usize, 3, 5] {
            let e = taylor_coeff(2.0, ell);
            let mut s = 0.0;
            let mut scale = 0.0;
            for (h, m) in c.ball().iter() {
                let norm = (m as f64).sqrt();
                let cos: f64 = h.iter().zip(&u).map(|(&x, &y)| x as f64 * y).sum::<f64>() / norm;
                let term = e.eval(cos) * inv_pow(m, 2.0 - ell as f64 / 2.0);
                s += term;
                scale += term.abs();
            }
            assert!(s.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn constant_sphere_polynomial() {
        let q = SpherePolynomial::constant(3, 2.0 / 3.0);
        let ex = extremize_q(&q, &SphereSearchOptions::default()).unwrap();
        assert!((ex.min_lower - 2.0 / 3.0).abs() < 1e-14);
        assert!((ex.max_upper - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_extrema_of_known_polynomial() {
        // u1⁴ + u2⁴ + u3⁴ ranges over [1/3, 1].
        let mut p = MultiPoly::zero(3);
        for i in 0..3 {
            let mut e = vec![0; 3];
            e[i] = 4;
            p.add_term(e, 1.0);
        }
        let q = SpherePolynomial::from_poly(4, p).unwrap();
        let ex = extremize_q(&q, &SphereSearchOptions::default()).unwrap();
        assert!(ex.min_lower <= 1.0 / 3.0 && 1.0 / 3.0 <= ex.min_attained);
        assert!(ex.max_attained <= 1.0 && 1.0 <= ex.max_upper);
        assert!(ex.min_attained - ex.min_lower < 1e-7);
        assert!((ex.argmax[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vv_scales_with_extrema() {
        let c = cfg(3, 2.0, 8.0);
        let opts = ExtremaOptions {
            grid_c: 101,
            rel_width: 1e-3,
            ..Default::default()
        };
        let ex = remainder_extrema(2.0, 6, &opts).unwrap();
        let (v, big_v) = vv_nt(&c, 6, &ex).unwrap();
        assert!(v < 0.0 && 0.0 < big_v);
        let mut doubled = ex;
        doubled.mu *= 2.0;
        doubled.big_m *= 2.0;
        let (v2, big_v2) = vv_nt(&c, 6, &doubled).unwrap();
        assert_eq!(v2, 2.0 * v);
        assert_eq!(big_v2, 2.0 * big_v);
        assert!(vv_nt(&c, 4, &ex).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quadratic_identity(k in proptest::collection::vec(-30.0f64..30.0, 3), p in 0.5f64..6.0) {
            // Σ (h·k)² φ(|h|) = (|k|²/d) Σ |h|² φ(|h|) for radial φ
            let c = cfg(3, 2.0, 7.0);
            let kk: f64 = k.iter().map(|x| x * x).sum();
            let mut lhs = ExactSum::new();
            let mut rhs = ExactSum::new();
            for (h, m) in c.ball().iter() {
                let phi = inv_pow(m, p);
                let dot: f64 = h.iter().zip(&k).map(|(&x, y)| x as f64 * y).sum();
                lhs.add(dot * dot * phi);
                rhs.add(m as f64 * phi);
            }
            let l = lhs.value();
            let r = kk / 3.0 * rhs.value();
            prop_assert!((l - r).abs() <= 1e-12 * r.abs().max(1e-300));
        }
    }
}
