//! Integer-lattice geometry: lattice vectors, enumeration of lattice balls,
//! wedge norms, and the signed-permutation symmetry that reduces searches.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Upper bound on the number of points a single enumeration may hold.
pub const DEFAULT_MAX_POINTS: u64 = 40_000_000;

/// Largest coordinate magnitude accepted in hot loops; keeps every product
/// of squared norms well inside `i128`.
pub const MAX_COORD: i64 = 1 << 24;

/// A point of `Z^d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(Vec<i64>);

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(invalid(format!(
                "lattice dimension must be at least 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| c.abs() > MAX_COORD) {
            return Err(invalid(format!("coordinate magnitude exceeds {MAX_COORD}")));
        }
        Ok(Self(coords))
    }

    /// A nonzero vector, i.e. an element of `Z^d \ {0}`.
    pub fn nonzero(coords: Vec<i64>) -> Result<Self> {
        let v = Self::new(coords)?;
        if v.is_zero() {
            return Err(invalid("expected a nonzero lattice vector"));
        }
        Ok(v)
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn norm_sq(&self) -> i128 {
        norm_sq_i128(&self.0)
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn dot(&self, other: &LatticeVector) -> i128 {
        dot_i128(&self.0, &other.0)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }

    /// The reflection `R_r` flipping coordinate `r`.
    pub fn reflect(&self, r: usize) -> LatticeVector {
        let mut c = self.0.clone();
        c[r] = -c[r];
        LatticeVector(c)
    }

    /// The permutation `P_σ`: `(k_{σ(1)}, …, k_{σ(d)})`.
    pub fn permute(&self, sigma: &[usize]) -> LatticeVector {
        LatticeVector(sigma.iter().map(|&i| self.0[i]).collect())
    }

    pub fn is_canonical(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1]) && self.0.last().is_some_and(|&c| c >= 0)
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for LatticeVector {
    type Err = Error;

    /// Parses `1,2,3` or `(1,2,3)`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = body
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad coordinate {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LatticeVector::new(coords)
    }
}

#[inline]
pub(crate) fn norm_sq_i128(c: &[i64]) -> i128 {
    c.iter().map(|&x| (x as i128) * (x as i128)).sum()
}

#[inline]
pub(crate) fn dot_i128(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| (x as i128) * (y as i128)).sum()
}

/// A radius used for strict membership tests `|h| < ρ` on integer points.
///
/// Integer and rational radii compare exactly in integer arithmetic against
/// `|h|²`. Other radii fall back to the floating comparison
/// `(|h|² as f64) < ρ·ρ`, where `ρ·ρ` is rounded once to nearest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Radius {
    Rational { num: u64, den: u64 },
    Float(f64),
}

impl Radius {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(invalid(format!("radius must be positive and finite, got {value}")));
        }
        if value.fract() == 0.0 && value < (1u64 << 31) as f64 {
            Ok(Radius::Rational {
                num: value as u64,
                den: 1,
            })
        } else {
            Ok(Radius::Float(value))
        }
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num >= 1 << 31 || den >= 1 << 31 {
            return Err(invalid(format!("bad rational radius {num}/{den}")));
        }
        Ok(Radius::Rational { num, den })
    }

    pub fn value(&self) -> f64 {
        match *self {
            Radius::Rational { num, den } => num as f64 / den as f64,
            Radius::Float(r) => r,
        }
    }

    pub fn scaled(&self, factor: u64) -> Radius {
        match *self {
            Radius::Rational { num, den } => Radius::Rational { num: num * factor, den },
            Radius::Float(r) => Radius::Float(r * factor as f64),
        }
    }

    /// Strict membership `sqrt(norm_sq) < ρ`.
    #[inline]
    pub fn contains(&self, norm_sq: u64) -> bool {
        match *self {
            Radius::Rational { num, den } => {
                (norm_sq as u128) * (den as u128) * (den as u128) < (num as u128) * (num as u128)
            }
            Radius::Float(r) => (norm_sq as f64) < r * r,
        }
    }

    /// Smallest integer `R` such that every point with `|h| < ρ` lies in `[-R, R]^d`.
    pub fn ceil(&self) -> i64 {
        self.value().ceil() as i64
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Radius::Rational { num, den: 1 } => write!(f, "{num}"),
            Radius::Rational { num, den } => write!(f, "{num}/{den}"),
            Radius::Float(r) => write!(f, "{r}"),
        }
    }
}

impl std::str::FromStr for Radius {
    type Err = Error;

    /// Accepts `10`, `12.5` or `25/2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
            let q = q.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
            let g = gcd(p, q);
            return Radius::from_ratio(p / g.max(1), q / g.max(1));
        }
        let v = s
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad radius {s:?}: {e}")))?;
        Radius::new(v)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Estimated number of integer points in the ball of radius `r` in `Z^d`,
/// taken as the volume of the ball of radius `r + √d/2`.
pub fn estimated_ball_count(d: usize, r: f64) -> f64 {
    let rr = r + (d as f64).sqrt() / 2.0;
    let half = d as f64 / 2.0;
    let unit = std::f64::consts::PI.powf(half) / crate::numeric::gamma_half(d as u32 + 2);
    unit * rr.powi(d as i32)
}

/// The nonzero lattice points with `|h| < ρ`, stored flat in lexicographic order.
#[derive(Debug, Clone)]
pub struct BallEnumeration {
    d: usize,
    radius: Radius,
    coords: Vec<i64>,
    norms_sq: Vec<u64>,
    by_norm_sq: BTreeMap<u64, Vec<usize>>,
}

/// Enumerates `{h ∈ Z^d \ {0} : |h| < ρ}` with the default memory budget.
pub fn enumerate_ball(d: usize, rho: Radius) -> Result<BallEnumeration> {
    BallEnumeration::with_budget(d, rho, DEFAULT_MAX_POINTS)
}

impl BallEnumeration {
    pub fn with_budget(d: usize, rho: Radius, max_points: u64) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {d}")));
        }
        let r = rho.ceil();
        if r > MAX_COORD {
            return Err(invalid(format!("radius {rho} is too large")));
        }
        let estimate = estimated_ball_count(d, rho.value());
        if estimate > max_points as f64 {
            return Err(Error::ResourceExhausted(format!(
                "ball of radius {rho} in dimension {d} holds about {estimate:.3e} points, \
                 above the budget of {max_points}"
            )));
        }

        let mut coords = Vec::with_capacity(estimate as usize * d);
        let mut norms_sq = Vec::with_capacity(estimate as usize);
        let mut by_norm_sq: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for_each_cube_point(d, r, |p| {
            let m = norm_sq_i128(p) as u64;
            if m > 0 && rho.contains(m) {
                by_norm_sq.entry(m).or_default().push(norms_sq.len());
                coords.extend_from_slice(p);
                norms_sq.push(m);
            }
        });
        Ok(Self {
            d,
            radius: rho,
            coords,
            norms_sq,
            by_norm_sq,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> Radius {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.norms_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms_sq.is_empty()
    }

    /// Coordinates of the `i`-th point.
    #[inline]
    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn norm_sq(&self, i: usize) -> u64 {
        self.norms_sq[i]
    }

    pub fn norms_sq(&self) -> &[u64] {
        &self.norms_sq
    }

    pub fn coords_flat(&self) -> &[i64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], u64)> + '_ {
        self.coords.chunks_exact(self.d).zip(self.norms_sq.iter().copied())
    }

    pub fn points(&self) -> Vec<LatticeVector> {
        self.coords
            .chunks_exact(self.d)
            .map(|c| LatticeVector(c.to_vec()))
            .collect()
    }

    /// Index from `|h|²` to the points attaining it.
    pub fn by_norm_sq(&self) -> &BTreeMap<u64, Vec<usize>> {
        &self.by_norm_sq
    }

    pub fn max_norm_sq(&self) -> u64 {
        self.by_norm_sq.keys().next_back().copied().unwrap_or(0)
    }
}

/// Visits every point of the cube `[-r, r]^d` in lexicographic order.
pub(crate) fn for_each_cube_point<F: FnMut(&[i64])>(d: usize, r: i64, mut f: F) {
    let mut p = vec![-r; d];
    loop {
        f(&p);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if p[i] < r {
                p[i] += 1;
                break;
            }
            p[i] = -r;
        }
    }
}

/// `|p|²|q|² − (p·q)²`, clamped at zero against rounding.
pub fn wedge_norm_sq(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "wedge of vectors of different dimension");
    let pp: f64 = p.iter().map(|x| x * x).sum();
    let qq: f64 = q.iter().map(|x| x * x).sum();
    let pq: f64 = p.iter().zip(q).map(|(x, y)| x * y).sum();
    (pp * qq - pq * pq).max(0.0)
}

/// Exact `|p ∧ q|²` for integer vectors.
#[inline]
pub fn wedge_norm_sq_int(p: &[i64], q: &[i64]) -> i128 {
    let pq = dot_i128(p, q);
    norm_sq_i128(p) * norm_sq_i128(q) - pq * pq
}

/// Sorted absolute values, the representative of `k` under reflections and
/// coordinate permutations.
pub fn canonical_representative(k: &LatticeVector) -> Result<LatticeVector> {
    if k.is_zero() {
        return Err(invalid("the zero vector has no canonical representative"));
    }
    let mut c: Vec<i64> = k.coords().iter().map(|x| x.abs()).collect();
    c.sort_unstable_by(|a, b| b.cmp(a));
    Ok(LatticeVector(c))
}

/// Number of distinct images of a canonical vector under the signed
/// permutations: `d! / Π(mult!) · 2^{#nonzero}`.
pub fn orbit_size(k: &LatticeVector) -> Result<u64> {
    if k.is_zero() {
        return Err(invalid("orbit_size expects a nonzero vector"));
    }
    if !k.is_canonical() {
        return Err(invalid(format!("{k} is not canonical")));
    }
    let c = k.coords();
    let mut perms: u64 = (1..=c.len() as u64).product();
    let mut run = 1u64;
    for w in c.windows(2) {
        if w[0] == w[1] {
            run += 1;
            perms /= run;
        } else {
            run = 1;
        }
    }
    let nonzero = c.iter().filter(|&&x| x != 0).count() as u32;
    Ok(perms << nonzero)
}

/// Canonical representatives `k_1 ≥ … ≥ k_d ≥ 0`, `k ≠ 0`, with `|k| < radius`,
/// in lexicographic order.
pub fn canonical_ball(d: usize, radius: Radius) -> Result<Vec<LatticeVector>> {
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    let r = radius.ceil();
    let estimate = estimated_ball_count(d, radius.value()) / (1u64 << d) as f64;
    if estimate > DEFAULT_MAX_POINTS as f64 {
        return Err(Error::ResourceExhausted(format!(
            "about {estimate:.3e} canonical points below radius {radius}"
        )));
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn rec(d: usize, max: i64, acc_sq: u64, radius: &Radius, cur: &mut Vec<i64>, out: &mut Vec<LatticeVector>) {
        if cur.len() == d {
            if acc_sq > 0 {
                out.push(LatticeVector(cur.clone()));
            }
            return;
        }
        for c in 0..=max {
            let sq = acc_sq + (c * c) as u64;
            if !radius.contains(sq) {
                break;
            }
            cur.push(c);
            rec(d, c, sq, radius, cur, out);
            cur.pop();
        }
    }
    rec(d, r, 0, &radius, &mut cur, &mut out);
    out.sort();
    Ok(out)
}

/// All `2^d d!` signed permutation matrices, as (permutation, sign mask) pairs.
pub fn signed_permutations(d: usize) -> Vec<(Vec<usize>, u32)> {
    let mut perms = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    permutations_rec(0, &mut cur, &mut perms);
    let mut out = Vec::with_capacity(perms.len() << d);
    for p in perms {
        for mask in 0..(1u32 << d) {
            out.push((p.clone(), mask));
        }
    }
    out
}

fn permutations_rec(i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i == cur.len() {
        out.push(cur.clone());
        return;
    }
    for j in i..cur.len() {
        cur.swap(i, j);
        permutations_rec(i + 1, cur, out);
        cur.swap(i, j);
    }
}

/// Applies a signed permutation from [`signed_permutations`].
pub fn apply_signed_permutation(k: &LatticeVector, perm: &[usize], mask: u32) -> LatticeVector {
    let mut v = k.permute(perm);
    for r in 0..v.dim() {
        if mask >> r & 1 == 1 {
            v = v.reflect(r);
        }
    }
    v
}
