//! Small numeric utilities: exact order-independent summation, outward
//! decimal rounding, Gamma at half-integers, binomials.

use std::ops::Range;

use rayon::prelude::*;

/// Number of 64-bit limbs: every finite binary64 magnitude spans bits
/// 0..2098 of the scaled integer, leaving room for carries and a sign bit.
const LIMBS: usize = 35;

/// Exact accumulator for binary64 values.
///
/// Every added value is placed into a wide two's-complement fixed-point
/// integer without rounding, so the accumulated state, and hence
/// [`ExactSum::value`], does not depend on the order of additions or on how
/// partial sums are merged. The total is rounded once, to nearest.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactSum {
    limbs: [u64; LIMBS],
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for ExactSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ExactSum({})", self.value())
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self { limbs: [0; LIMBS] }
    }

    /// Adds a finite value. Panics on NaN or infinity.
    #[inline]
    pub fn add(&mut self, v: f64) {
        assert!(v.is_finite(), "ExactSum::add got a non-finite value");
        if v == 0.0 {
            return;
        }
        let bits = v.to_bits();
        let exp_bits = ((bits >> 52) & 0x7ff) as usize;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, pos) = if exp_bits == 0 {
            (frac, 0)
        } else {
            (frac | (1u64 << 52), exp_bits - 1)
        };
        let wide = (mant as u128) << (pos % 64);
        let i = pos / 64;
        if v > 0.0 {
            add_at(&mut self.limbs, i, wide as u64);
            add_at(&mut self.limbs, i + 1, (wide >> 64) as u64);
        } else {
            sub_at(&mut self.limbs, i, wide as u64);
            sub_at(&mut self.limbs, i + 1, (wide >> 64) as u64);
        }
    }

    pub fn merge(&mut self, other: &ExactSum) {
        let mut carry = false;
        for (a, &b) in self.limbs.iter_mut().zip(&other.limbs) {
            let (s1, c1) = a.overflowing_add(b);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *a = s2;
            carry = c1 || c2;
        }
    }

    /// The accumulated total, correctly rounded.
    pub fn value(&self) -> f64 {
        if self.limbs[LIMBS - 1] >> 63 == 1 {
            let mut neg = self.limbs.map(|l| !l);
            add_at_wrapping(&mut neg, 0, 1);
            -limbs_to_f64(&neg)
        } else {
            limbs_to_f64(&self.limbs)
        }
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = ExactSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[inline]
fn add_at(limbs: &mut [u64; LIMBS], i: usize, v: u64) {
    if v != 0 {
        add_at_wrapping(limbs, i, v);
    }
}

#[inline]
fn add_at_wrapping(limbs: &mut [u64; LIMBS], mut i: usize, v: u64) {
    let (s, mut carry) = limbs[i].overflowing_add(v);
    limbs[i] = s;
    while carry && i + 1 < LIMBS {
        i += 1;
        let (s, c) = limbs[i].overflowing_add(1);
        limbs[i] = s;
        carry = c;
    }
}

#[inline]
fn sub_at(limbs: &mut [u64; LIMBS], mut i: usize, v: u64) {
    if v == 0 {
        return;
    }
    let (s, mut borrow) = limbs[i].overflowing_sub(v);
    limbs[i] = s;
    while borrow && i + 1 < LIMBS {
        i += 1;
        let (s, b) = limbs[i].overflowing_sub(1);
        limbs[i] = s;
        borrow = b;
    }
}

/// Limb `i` holds bits `64i ..` of the integer `x·2^1074`.
fn limbs_to_f64(limbs: &[u64; LIMBS]) -> f64 {
    let Some(top) = limbs.iter().rposition(|&l| l != 0) else {
        return 0.0;
    };
    if top == 0 {
        return scale_pow2(limbs[0] as f64, -1074);
    }
    let mut head = ((limbs[top] as u128) << 64) | limbs[top - 1] as u128;
    // A sticky bit below the 128-bit window keeps round-to-nearest exact.
    if limbs[..top - 1].iter().any(|&l| l != 0) {
        head |= 1;
    }
    scale_pow2(head as f64, 64 * (top as i32 - 1) - 1074)
}

fn scale_pow2(mut x: f64, mut e: i32) -> f64 {
    while e > 600 {
        x *= 2f64.powi(600);
        e -= 600;
    }
    while e < -600 {
        x *= 2f64.powi(-600);
        e += 600;
    }
    x * 2f64.powi(e)
}

/// Exact sum of `f(i)` over `range`, evaluated in parallel chunks.
pub fn par_exact_sum<F>(range: Range<usize>, chunk: usize, f: F) -> f64
where
    F: Fn(Range<usize>, &mut ExactSum) + Sync,
{
    let chunk = chunk.max(1);
    let starts: Vec<usize> = range.clone().step_by(chunk).collect();
    starts
        .par_iter()
        .map(|&s| {
            let mut acc = ExactSum::new();
            f(s..(s + chunk).min(range.end), &mut acc);
            acc
        })
        .reduce(ExactSum::new, |mut a, b| {
            a.merge(&b);
            a
        })
        .value()
}

/// `m^{-p}` for a positive integer `m`, evaluated as `exp(-p ln m)`.
#[inline]
pub fn inv_pow(m: u64, p: f64) -> f64 {
    (-p * (m as f64).ln()).exp()
}

/// `m^{p}` for a positive integer `m`, evaluated as `exp(p ln m)`.
#[inline]
pub fn pow_int_base(m: u64, p: f64) -> f64 {
    (p * (m as f64).ln()).exp()
}

/// Direction of decimal rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Up,
    Down,
}

/// Rounds a positive `x` to `digits` significant decimal digits in the given
/// direction and returns the decimal string together with its value.
///
/// Upward rounding never returns a value below `x`, downward rounding never
/// returns one above it.
pub fn round_sig(x: f64, digits: u32, dir: Rounding) -> (String, f64) {
    assert!(x.is_finite() && x > 0.0, "round_sig expects a positive finite value");
    assert!(digits >= 1);
    let exponent = x.log10().floor() as i32;
    let decimals = digits as i32 - 1 - exponent;
    let scale = 10f64.powi(decimals);
    let scaled = x * scale;
    let mut mantissa = match dir {
        Rounding::Up => scaled.ceil(),
        Rounding::Down => scaled.floor(),
    };
    // the product above is itself rounded; nudge until the direction holds
    let back = |m: f64| {
        if decimals >= 0 {
            m / scale
        } else {
            m * 10f64.powi(-decimals)
        }
    };
    match dir {
        Rounding::Up => {
            while back(mantissa) < x {
                mantissa += 1.0;
            }
        }
        Rounding::Down => {
            while back(mantissa) > x {
                mantissa -= 1.0;
            }
        }
    }
    let value = back(mantissa);
    let text = if decimals > 0 {
        format!("{:.*}", decimals as usize, value)
    } else {
        format!("{}", value)
    };
    (text, value)
}

pub fn round_up_sig(x: f64, digits: u32) -> (String, f64) {
    round_sig(x, digits, Rounding::Up)
}

pub fn round_down_sig(x: f64, digits: u32) -> (String, f64) {
    round_sig(x, digits, Rounding::Down)
}

/// Exact binomial coefficient. Panics on overflow, which cannot happen for
/// the dimensions this crate supports.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// Multinomial coefficient `(Σ e)! / Π e_i!`.
pub fn multinomial(exponents: &[u32]) -> u64 {
    let mut total = 0u64;
    let mut acc = 1u64;
    for &e in exponents {
        total += e as u64;
        acc *= binomial(total, e as u64);
    }
    acc
}

/// `Γ(m/2)` for a positive integer `m`.
///
/// Only integer and half-integer arguments arise (from `Γ(d/2)`), so the
/// value is built from the recurrence `Γ(x+1) = xΓ(x)` starting at `Γ(1) = 1`
/// or `Γ(1/2) = √π`. The product has at most `m/2` roundings.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m >= 1, "gamma_half expects a positive argument");
    let (mut x, mut g) = if m.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, std::f64::consts::PI.sqrt())
    };
    let target = m as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_sum_is_exact() {
        let v = [1.0e300, 1.0, -1.0e300, 1.0e-300, 3.0, -0.5];
        let s: ExactSum = v.iter().copied().collect();
        assert_eq!(s.value(), 3.5);
        let tiny: ExactSum = [f64::from_bits(1), f64::from_bits(1)].into_iter().collect();
        assert_eq!(tiny.value(), f64::from_bits(2));
        let big: ExactSum = [f64::MAX, f64::MAX / 2.0, -f64::MAX].into_iter().collect();
        assert_eq!(big.value(), f64::MAX / 2.0);
    }

    #[test]
    fn exact_sum_rounds_correctly() {
        // 1 + 2^-53 + 2^-105: the sticky bit decides the rounding upward.
        let s: ExactSum = [1.0, 2f64.powi(-53), 2f64.powi(-105)].into_iter().collect();
        assert_eq!(s.value(), 1.0 + f64::EPSILON);
        let s: ExactSum = [1.0, 2f64.powi(-53)].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn exact_sum_is_order_independent() {
        let base: Vec<f64> = (1..2000).map(|i| 1.0 / (i as f64).powf(1.7)).collect();
        let a: ExactSum = base.iter().copied().collect();
        let mut b: ExactSum = base.iter().rev().copied().collect();
        assert_eq!(a, b);
        b.merge(&ExactSum::new());
        assert_eq!(a.value().to_bits(), b.value().to_bits());
    }

    #[test]
    fn parallel_exact_sum_matches_thread_counts() {
        let f = |r: Range<usize>, acc: &mut ExactSum| {
            for i in r {
                acc.add(((i as f64) * 0.37).sin());
            }
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| par_exact_sum(0..100_000, 1000, f));
        let b = four.install(|| par_exact_sum(0..100_000, 333, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    proptest! {
        #[test]
        fn exact_sum_matches_rational_oracle(
            xs in proptest::collection::vec((-1.0f64..1.0, -300i32..300), 1..60)
        ) {
            use num_rational::BigRational;
            use num_traits::ToPrimitive;
            let vals: Vec<f64> = xs.iter().map(|&(m, e)| m * 2f64.powi(e)).collect();
            let exact = vals
                .iter()
                .map(|&v| BigRational::from_float(v).unwrap())
                .fold(BigRational::from_integer(0.into()), |a, b| a + b);
            let s: ExactSum = vals.iter().copied().collect();
            // BigRational -> f64 is not guaranteed correctly rounded; one ulp suffices here.
            let oracle = exact.to_f64().unwrap();
            let got = s.value();
            prop_assert!(got == oracle || (got - oracle).abs() <= oracle.abs() * f64::EPSILON);
            let mut rev: ExactSum = vals.iter().rev().copied().collect();
            rev.merge(&ExactSum::new());
            prop_assert_eq!(rev.value().to_bits(), got.to_bits());
        }
    }

    #[test]
    fn rounding_directions() {
        assert_eq!(round_up_sig(0.334_23, 3).0, "0.335");
        assert_eq!(round_down_sig(0.126_99, 3).0, "0.126");
        assert_eq!(round_up_sig(2.873_39, 3).0, "2.88");
        assert_eq!(round_down_sig(2.031_80, 3).0, "2.03");
        assert_eq!(round_up_sig(0.51, 3).0, "0.510");
        assert_eq!(round_up_sig(1234.5, 3).0, "1240");
        let (_, up) = round_up_sig(0.1, 1);
        assert!(up >= 0.1);
    }

    #[test]
    fn gamma_half_values() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let cases = [
            (1, sqrt_pi),
            (2, 1.0),
            (3, sqrt_pi / 2.0),
            (4, 1.0),
            (5, 0.75 * sqrt_pi),
            (8, 6.0),
            (9, 11.631_728_396_567_448),
        ];
        for (m, expect) in cases {
            let g = gamma_half(m);
            assert!(((g - expect) / expect).abs() < 1e-13, "Γ({m}/2) = {g}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(2, 1), 2);
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(multinomial(&[2, 2, 0]), 6);
        assert_eq!(multinomial(&[4, 0, 0]), 1);
        assert_eq!(multinomial(&[2, 2, 2]), 90);
    }
}
