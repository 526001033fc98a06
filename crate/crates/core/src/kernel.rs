//! The kernel `E_n(c, ξ) = (1 - c²) / (1 - 2cξ + ξ²)^{n+1}`, its Taylor
//! coefficients in `ξ`, and certified extrema of the Taylor remainder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Below this `ξ` the remainder is summed from its Taylor tail instead of the
/// defining quotient, which loses about `ε/ξ^t` to cancellation.
pub const SERIES_SWITCH_XI: f64 = 0.1;

/// A univariate polynomial with ascending real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial1D {
    coeffs: Vec<f64>,
}

impl Polynomial1D {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `c^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, c: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * c + a)
    }

    fn mul_one_minus_c2(&self) -> Polynomial1D {
        let mut out = vec![0.0; self.coeffs.len() + 2];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] += a;
            out[i + 2] -= a;
        }
        Polynomial1D::new(out)
    }
}

fn check_order(n: f64) -> Result<()> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(invalid(format!("order n must be finite and nonnegative, got {n}")));
    }
    Ok(())
}

/// `E_n(c, ξ)`.
pub fn eval_e(n: f64, c: f64, xi: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c) || !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::Domain(format!(
            "E_n needs c in [-1,1] and finite xi >= 0, got c={c}, xi={xi}"
        )));
    }
    let denom = 1.0 - 2.0 * c * xi + xi * xi;
    if (c == 1.0 && xi == 1.0) || denom <= 0.0 {
        return Err(Error::Domain(format!("E_n is singular at c={c}, xi={xi}")));
    }
    Ok(e_unchecked(n, c, xi))
}

#[inline]
fn e_unchecked(n: f64, c: f64, xi: f64) -> f64 {
    let denom = 1.0 - 2.0 * c * xi + xi * xi;
    (1.0 - c * c) * (-(n + 1.0) * denom.ln()).exp()
}

/// Polynomials `C_0, …, C_max` in the expansion
/// `(1 - 2cξ + ξ²)^{-(n+1)} = Σ C_ℓ(c) ξ^ℓ`.
fn generating_polys(n: f64, max: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(max + 1);
    out.push(vec![1.0]);
    if max >= 1 {
        out.push(vec![0.0, 2.0 * (n + 1.0)]);
    }
    for l in 2..=max {
        let lf = l as f64;
        let mut next = vec![0.0; l + 1];
        for (i, &a) in out[l - 1].iter().enumerate() {
            next[i + 1] += 2.0 * (lf + n) * a / lf;
        }
        for (i, &a) in out[l - 2].iter().enumerate() {
            next[i] -= (lf + 2.0 * n) * a / lf;
        }
        out.push(next);
    }
    out
}

/// The Taylor coefficient `E_{nℓ}(c) = (1/ℓ!) ∂^ℓ_ξ E_n(c, 0)`.
pub fn taylor_coeff(n: f64, ell: usize) -> Polynomial1D {
    let polys = generating_polys(n, ell);
    Polynomial1D::new(polys[ell].clone()).mul_one_minus_c2()
}

/// `Ê_{nℓ}`: `E_{nℓ}` with its `c²` term replaced by the constant `1/d`.
pub fn substituted_coeff(n: f64, ell: usize, d: usize) -> Result<Polynomial1D> {
    if ell % 2 == 1 {
        return Err(invalid(format!("substituted coefficient needs even ell, got {ell}")));
    }
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    let e = taylor_coeff(n, ell);
    let mut c = e.coeffs().to_vec();
    if c.len() > 2 {
        c[0] += c[2] / d as f64;
        c[2] = 0.0;
    }
    Ok(Polynomial1D::new(c))
}

/// Values `C_0(c), …` of the generating-function coefficients, by the same
/// three-term recurrence as [`taylor_coeff`].
struct CoeffValues {
    n: f64,
    c: f64,
    prev: f64,
    cur: f64,
    l: usize,
}

impl CoeffValues {
    fn new(n: f64, c: f64) -> Self {
        Self {
            n,
            c,
            prev: 0.0,
            cur: 1.0,
            l: 0,
        }
    }

    /// Current index and value.
    fn get(&self) -> (usize, f64) {
        (self.l, self.cur)
    }

    fn advance(&mut self) {
        let l = (self.l + 1) as f64;
        let next = if self.l == 0 {
            2.0 * (self.n + 1.0) * self.c
        } else {
            (2.0 * self.c * (l + self.n) * self.cur - (l + 2.0 * self.n) * self.prev) / l
        };
        self.prev = self.cur;
        self.cur = next;
        self.l += 1;
    }
}

/// `R_{nt}(c, ξ) = ξ^{-t}(E_n(c, ξ) - Σ_{ℓ<t} E_{nℓ}(c) ξ^ℓ)`, equal to
/// `E_{nt}(c)` at `ξ = 0`.
pub fn eval_remainder(n: f64, t: usize, c: f64, xi: f64) -> f64 {
    debug_assert!(t >= 1);
    let w = 1.0 - c * c;
    if xi < SERIES_SWITCH_XI {
        return w * series_tail(n, t, c, xi);
    }
    let mut seq = CoeffValues::new(n, c);
    let mut partial = 0.0;
    let mut xp = 1.0;
    for _ in 0..t {
        partial += seq.get().1 * xp;
        xp *= xi;
        seq.advance();
    }
    (e_unchecked(n, c, xi) - w * partial) / xp
}

/// `Σ_{ℓ≥t} C_ℓ(c) ξ^{ℓ-t}` for small `ξ`, stopped once the remaining terms
/// are provably negligible using `|C_ℓ(c)| ≤ C_ℓ(1) = binom(ℓ+2n+1, ℓ)`.
fn series_tail(n: f64, t: usize, c: f64, xi: f64) -> f64 {
    let mut seq = CoeffValues::new(n, c);
    while seq.get().0 < t {
        seq.advance();
    }
    if xi == 0.0 {
        return seq.get().1;
    }
    // C_t(1) = binom(t+2n+1, t) as a real product.
    let mut bound_at_l = 1.0;
    for j in 1..=t {
        let jf = j as f64;
        bound_at_l *= (jf + 2.0 * n + 1.0) / jf;
    }
    let mut sum = 0.0;
    let mut scale = 0.0f64;
    let mut xp = 1.0;
    for _ in 0..10_000 {
        let (l, v) = seq.get();
        let term = v * xp;
        sum += term;
        scale = scale.max(term.abs());
        let lf = l as f64;
        let next_bound = bound_at_l * (lf + 2.0 * n + 2.0) / (lf + 1.0) * xp * xi;
        let ratio = (lf + 2.0 * n + 3.0) / (lf + 2.0) * xi;
        if ratio < 1.0 {
            let tail = next_bound / (1.0 - ratio);
            if tail <= 1e-17 * scale.max(sum.abs()) || tail == 0.0 {
                break;
            }
        }
        bound_at_l *= (lf + 2.0 * n + 2.0) / (lf + 1.0);
        xp *= xi;
        seq.advance();
    }
    sum
}

/// `b_n(c, ξ) = (1 - c²)(1 + 2cξ + ξ²)^n / (1 + ξ^{2n})`.
pub fn wedge_power_ratio(n: f64, c: f64, xi: f64) -> f64 {
    let num = (1.0 - c * c) * (n * (1.0 + 2.0 * c * xi + xi * xi).ln()).exp();
    num / (1.0 + xi.powf(2.0 * n))
}

/// `B_n = 2^{2n+1}(n+1)^{n+1}/(n+2)^{n+2}`, the supremum of [`wedge_power_ratio`].
pub fn wedge_power_constant(n: f64) -> f64 {
    ((2.0 * n + 1.0) * 2f64.ln() + (n + 1.0) * (n + 1.0).ln() - (n + 2.0) * (n + 2.0).ln()).exp()
}

/// Tuning for [`remainder_extrema`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaOptions {
    /// Grid points along `c ∈ [-1, 1]`; half as many (plus one) along `ξ`.
    pub grid_c: usize,
    /// Requested width of each enclosure, relative to the extremal value.
    pub rel_width: f64,
    /// Safety factor applied to finite-difference slope estimates.
    pub safety: f64,
    /// Cap on refined cells before giving up.
    pub max_cells: usize,
}

impl Default for ExtremaOptions {
    fn default() -> Self {
        Self {
            grid_c: 2001,
            rel_width: 1e-5,
            safety: 4.0,
            max_cells: 4_000_000,
        }
    }
}

/// Enclosures of the extrema of `R_{nt}` over `[-1, 1] × [0, 1/2]`:
/// `mu ≤ min R ≤ mu_attained` and `big_m_attained ≤ max R ≤ big_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderExtrema {
    pub n: f64,
    pub t: usize,
    pub mu: f64,
    pub mu_attained: f64,
    pub big_m_attained: f64,
    pub big_m: f64,
    pub grid_resolution: usize,
    /// Largest gap between an enclosure end and the attained sample value.
    pub margin: f64,
}

impl RemainderExtrema {
    pub fn mu_width(&self) -> f64 {
        self.mu_attained - self.mu
    }

    pub fn big_m_width(&self) -> f64 {
        self.big_m - self.big_m_attained
    }
}

#[derive(Clone, Copy)]
struct Cell {
    c0: f64,
    c1: f64,
    x0: f64,
    x1: f64,
    f: [f64; 4], // (c0,x0) (c1,x0) (c0,x1) (c1,x1)
}

impl Cell {
    /// Upper bound for `sign·R` on the cell: every point lies within half a
    /// step of some corner, and the slope is bounded by `safety` times the
    /// largest edge difference quotient.
    fn bound(&self, sign: f64, safety: f64) -> f64 {
        let g: [f64; 4] = self.f.map(|v| sign * v);
        let dc = (g[1] - g[0]).abs().max((g[3] - g[2]).abs());
        let dx = (g[2] - g[0]).abs().max((g[3] - g[1]).abs());
        let top = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + safety * (dc + dx) / 2.0
    }
}

/// Certified (grid plus slope margin, refined locally) enclosures of
/// `min R_{nt}` and `max R_{nt}` over `[-1, 1] × [0, 1/2]`.
pub fn remainder_extrema(n: f64, t: usize, opts: &ExtremaOptions) -> Result<RemainderExtrema> {
    check_order(n)?;
    if t == 0 {
        return Err(invalid("remainder order t must be at least 1"));
    }
    if opts.grid_c < 3 || !(opts.rel_width > 0.0) || !(opts.safety >= 1.0) {
        return Err(invalid("bad extrema options"));
    }
    let nc = opts.grid_c;
    let nx = nc / 2 + 1;
    let hc = 2.0 / (nc - 1) as f64;
    let hx = 0.5 / (nx - 1) as f64;
    let cs: Vec<f64> = (0..nc).map(|i| -1.0 + i as f64 * hc).collect();
    let xs: Vec<f64> = (0..nx).map(|j| j as f64 * hx).collect();
    let grid: Vec<f64> = (0..nx)
        .into_par_iter()
        .flat_map_iter(|j| {
            let x = xs[j];
            cs.iter().map(move |&c| eval_remainder(n, t, c, x))
        })
        .collect();
    let at = |i: usize, j: usize| grid[j * nc + i];

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &grid {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite remainder sample for n={n}, t={t}")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }

    let scale_floor = opts.rel_width * lo.abs().max(hi.abs()) * 1e-3;
    let mut out = [0.0f64; 2];
    let mut attained = [lo, hi];
    for (k, sign) in [-1.0f64, 1.0].into_iter().enumerate() {
        let mut best = sign * attained[k];
        let tol = (opts.rel_width * best.abs()).max(scale_floor).max(f64::MIN_POSITIVE);
        let mut bound = best;
        let mut work = Vec::new();
        for j in 0..nx - 1 {
            for i in 0..nc - 1 {
                let cell = Cell {
                    c0: cs[i],
                    c1: cs[i + 1],
                    x0: xs[j],
                    x1: xs[j + 1],
                    f: [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)],
                };
                let b = cell.bound(sign, opts.safety);
                if b > best + tol {
                    work.push(cell);
                } else {
                    bound = bound.max(b);
                }
            }
        }
        let mut processed = 0usize;
        while !work.is_empty() {
            processed += work.len();
            if processed > opts.max_cells {
                let achieved = work.iter().map(|c| c.bound(sign, opts.safety)).fold(bound, f64::max) - best;
                return Err(Error::EnclosureNotReached {
                    what: format!("remainder {} for n={n}, t={t}", ["minimum", "maximum"][k]),
                    achieved: achieved / best.abs().max(f64::MIN_POSITIVE),
                    requested: opts.rel_width,
                });
            }
            let children: Vec<[Cell; 4]> = work.par_iter().map(|cell| subdivide(n, t, cell)).collect();
            for kids in &children {
                for kid in kids {
                    for &v in &kid.f {
                        best = best.max(sign * v);
                    }
                }
            }
            let mut next = Vec::new();
            for kid in children.into_iter().flatten() {
                let b = kid.bound(sign, opts.safety);
                if b > best + tol {
                    next.push(kid);
                } else {
                    bound = bound.max(b);
                }
            }
            work = next;
        }
        attained[k] = sign * best;
        out[k] = sign * bound.max(best);
    }
    let (mu, big_m) = (out[0], out[1]);
    Ok(RemainderExtrema {
        n,
        t,
        mu,
        mu_attained: attained[0],
        big_m_attained: attained[1],
        big_m,
        grid_resolution: nc,
        margin: (attained[0] - mu).max(big_m - attained[1]),
    })
}

fn subdivide(n: f64, t: usize, cell: &Cell) -> [Cell; 4] {
    let cm = 0.5 * (cell.c0 + cell.c1);
    let xm = 0.5 * (cell.x0 + cell.x1);
    let [f00, f10, f01, f11] = cell.f;
    let fm0 = eval_remainder(n, t, cm, cell.x0);
    let fm1 = eval_remainder(n, t, cm, cell.x1);
    let f0m = eval_remainder(n, t, cell.c0, xm);
    let f1m = eval_remainder(n, t, cell.c1, xm);
    let fmm = eval_remainder(n, t, cm, xm);
    let mk = |c0, c1, x0, x1, f| Cell { c0, c1, x0, x1, f };
    [
        mk(cell.c0, cm, cell.x0, xm, [f00, fm0, f0m, fmm]),
        mk(cm, cell.c1, cell.x0, xm, [fm0, f10, fmm, f1m]),
        mk(cell.c0, cm, xm, cell.x1, [f0m, fmm, f01, fm1]),
        mk(cm, cell.c1, xm, cell.x1, [fmm, f1m, fm1, f11]),
    ]
}
