//! Exact equivariant Szegő and Toeplitz kernels on weighted ℂP^d.
//!
//! The `k`-th isotype of the Hardy space of `S^{2d+1}` under the weighted
//! action is spanned by monomials `x^α` with `⟨w,α⟩ = k`. Their squared
//! norms are `‖x^α‖² = π^d α!/(|α|+d)!` (so the sphere volume is `π^d/d!`),
//! and every kernel below is a finite sum over that basis.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::symbol::AdmissibleSymbol;

/// Terms per parallel work unit; fixed so that reductions are bit-stable.
const CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    #[default]
    Extended,
}

// ---- exact integers --------------------------------------------------------

fn factorial(n: usize) -> BigUint {
    static TABLE: OnceLock<Mutex<Vec<BigUint>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Mutex::new(vec![BigUint::one()]));
    let mut t = table.lock().expect("factorial table poisoned");
    while t.len() <= n {
        let next = t.last().expect("nonempty") * BigUint::from(t.len());
        t.push(next);
    }
    t[n].clone()
}

fn multi_factorial(a: &[u32]) -> BigUint {
    a.iter()
        .fold(BigUint::one(), |acc, &x| acc * factorial(x as usize))
}

fn degree(a: &[u32]) -> usize {
    a.iter().map(|&x| x as usize).sum()
}

/// `num / den = m · 2^e` with `m` a double-double near `2^0`.
fn ratio_scaled(num: &BigUint, den: &BigUint) -> (TwoFloat, i64) {
    if num.is_zero() {
        return (TwoFloat::from(0.0), 0);
    }
    let shift = 120 + den.bits() as i64 - num.bits() as i64;
    let q: BigUint = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let hi = q.to_f64().unwrap_or(f64::INFINITY);
    let rem = BigInt::from(q) - BigInt::from_f64(hi).unwrap_or_default();
    let lo = rem.to_f64().unwrap_or(0.0);
    let top = hi.log2().floor() as i32;
    let m = TwoFloat::new_add(hi, lo) * pow2(-top);
    (m, top as i64 - shift)
}

/// `2^e`, exact over the whole f64 range and zero below it.
fn pow2(e: i32) -> f64 {
    if e < -1074 {
        0.0
    } else if e < -1022 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        f64::from_bits(((e + 1023) as u64) << 52)
    }
}

/// `num / den` rounded to double-double.
fn ratio_to_dd(num: &BigUint, den: &BigUint) -> TwoFloat {
    let (m, e) = ratio_scaled(num, den);
    let mut out = m;
    let mut s = e;
    while s != 0 {
        let step = s.clamp(-1000, 1000);
        out *= pow2(step as i32);
        s -= step;
    }
    out
}

/// Squared norm `ratio · π^{pi_power}` with an exact rational ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactNorm {
    pub numer: BigUint,
    pub denom: BigUint,
    pub pi_power: u32,
}

impl ExactNorm {
    pub fn to_f64(&self) -> f64 {
        f64::from(ratio_to_dd(&self.numer, &self.denom)) * PI.powi(self.pi_power as i32)
    }
}

// ---- real scalars for the two precisions ------------------------------------

trait Real: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_f64(x: f64) -> Self;
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self;
    fn from_dd(x: TwoFloat) -> Self;
    fn pi() -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        f64::from(ratio_to_dd(num, den))
    }
    fn from_dd(x: TwoFloat) -> Self {
        f64::from(x)
    }
    fn pi() -> Self {
        PI
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        ratio_to_dd(num, den)
    }
    fn from_dd(x: TwoFloat) -> Self {
        x
    }
    fn pi() -> Self {
        twofloat::consts::PI
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

#[derive(Clone, Copy, Debug)]
struct Cx<T> {
    re: T,
    im: T,
}

impl<T: Real> Cx<T> {
    fn zero() -> Self {
        Cx {
            re: T::from_f64(0.0),
            im: T::from_f64(0.0),
        }
    }
    fn one() -> Self {
        Cx {
            re: T::from_f64(1.0),
            im: T::from_f64(0.0),
        }
    }
    fn from_c64(c: Complex64) -> Self {
        Cx {
            re: T::from_f64(c.re),
            im: T::from_f64(c.im),
        }
    }
    fn add(self, o: Self) -> Self {
        Cx {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
    fn mul(self, o: Self) -> Self {
        Cx {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    fn scale(self, r: T) -> Self {
        Cx {
            re: self.re * r,
            im: self.im * r,
        }
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// `v · 2^e` with `v` kept near unit size, so long products of tiny powers
/// and huge factorial ratios neither underflow nor overflow.
#[derive(Clone, Copy, Debug)]
struct Scaled<T> {
    v: Cx<T>,
    e: i64,
}

impl<T: Real> Scaled<T> {
    fn new(v: Cx<T>, e: i64) -> Self {
        let m = v.re.to_f64().abs().max(v.im.to_f64().abs());
        if m == 0.0 || !m.is_finite() {
            return Scaled { v, e };
        }
        let top = m.log2().floor() as i32;
        Scaled {
            v: v.scale(T::from_f64(pow2(-top))),
            e: e + top as i64,
        }
    }

    fn mul(self, o: Self) -> Self {
        Scaled::new(self.v.mul(o.v), self.e + o.e)
    }

    fn cx(self) -> Cx<T> {
        let e = self.e.clamp(-2000, 2000) as i32;
        // split so that neither factor leaves the normal range early
        let h = e / 2;
        self.v
            .scale(T::from_f64(pow2(h)))
            .scale(T::from_f64(pow2(e - h)))
    }
}

/// Sum of `f(i)` for `i < n`, chunked in parallel and reduced in order.
fn ordered_sum<T: Real, F>(n: usize, f: F) -> Cx<T>
where
    F: Fn(usize) -> Cx<T> + Sync,
{
    let chunks: Vec<Cx<T>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = Cx::zero();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                s = s.add(f(i));
            }
            s
        })
        .collect();
    chunks.into_iter().fold(Cx::zero(), |a, b| a.add(b))
}

/// Power tables `c_j^e` for `e ≤ max_e`.
fn power_tables<T: Real>(c: &[Complex64], max_e: &[u32]) -> Vec<Vec<Scaled<T>>> {
    c.iter()
        .zip(max_e)
        .map(|(&cj, &m)| {
            let base = Scaled::new(Cx::<T>::from_c64(cj), 0);
            let mut t = Vec::with_capacity(m as usize + 1);
            let mut p = Scaled::new(Cx::one(), 0);
            t.push(p);
            for _ in 0..m {
                p = p.mul(base);
                t.push(p);
            }
            t
        })
        .collect()
}

fn monomial<T: Real>(tables: &[Vec<Scaled<T>>], a: &[u32]) -> Scaled<T> {
    a.iter()
        .enumerate()
        .fold(Scaled::new(Cx::one(), 0), |acc, (j, &e)| {
            acc.mul(tables[j][e as usize])
        })
}

// ---- basis -------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct EquivariantBasis {
    pub k: i64,
    pub exponents: Vec<Vec<u32>>,
    pub norms_sq: Vec<ExactNorm>,
}

impl EquivariantBasis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }
}

/// Sparse matrix of a Toeplitz operator in the monomial basis, by columns:
/// `T_f x^β = Σ_α A[α][β] x^α`.
struct SparseToeplitz<T> {
    cols: Vec<Vec<(usize, Cx<T>)>>,
}

#[derive(Clone, Debug)]
pub struct WeightedProjectiveOracle {
    weights: Vec<u32>,
    precision: Precision,
}

/// Heisenberg-type chart at a sphere point: `v ↦ (x + Σ v_i e_i)/|·|` with
/// a unitary frame `e_i` of `x^⊥`.
#[derive(Clone, Debug)]
pub struct Hlc {
    pub base: Vec<Complex64>,
    pub frame: Vec<Vec<Complex64>>,
    /// `Φ` at the base point.
    pub phi: f64,
}

impl Hlc {
    pub fn point(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut p = self.base.clone();
        for (vi, e) in v.iter().zip(&self.frame) {
            for (pj, ej) in p.iter_mut().zip(e) {
                *pj += vi * ej;
            }
        }
        let n = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        p.iter().map(|c| c / n).collect()
    }
}

/// `ψ₂(v, w) = −i Im⟨v, w⟩ − ½ |v − w|²` with `⟨v, w⟩ = Σ v̄_j w_j`.
pub fn psi2(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    let inner: Complex64 = v.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
    let dist: f64 = v.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum();
    Complex64::new(-0.5 * dist, -inner.im)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

const SUPPORT_TOL: f64 = 1e-14;

impl WeightedProjectiveOracle {
    pub fn new(weights: &[u32], precision: Precision) -> Result<Self> {
        if weights.len() < 2 || weights.contains(&0) {
            return Err(Error::InvalidModel(format!("bad weights {weights:?}")));
        }
        if weights.iter().fold(0, |a, &w| gcd(a, w)) != 1 {
            return Err(Error::InvalidModel(format!(
                "weights {weights:?} must have gcd 1"
            )));
        }
        Ok(WeightedProjectiveOracle {
            weights: weights.to_vec(),
            precision,
        })
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// `Φ(x) = Σ w_j |x_j|²` on the unit sphere.
    pub fn phi(&self, x: &[Complex64]) -> f64 {
        x.iter()
            .zip(&self.weights)
            .map(|(c, &w)| w as f64 * c.norm_sqr())
            .sum()
    }

    pub fn monomial_norm_sq(&self, alpha: &[u32]) -> ExactNorm {
        let d = self.dim();
        ExactNorm {
            numer: multi_factorial(alpha),
            denom: factorial(degree(alpha) + d),
            pi_power: d as u32,
        }
    }

    /// All `α` with `⟨w, α⟩ = k`, ordered by descending `α_0`, then `α_1`, ….
    pub fn enumerate_basis(&self, k: i64) -> EquivariantBasis {
        let mut exponents = Vec::new();
        if k >= 0 {
            let mut cur = vec![0u32; self.weights.len()];
            self.enumerate_rec(0, k as u64, &mut cur, &mut exponents);
        }
        let norms_sq = exponents.iter().map(|a| self.monomial_norm_sq(a)).collect();
        EquivariantBasis {
            k,
            exponents,
            norms_sq,
        }
    }

    fn enumerate_rec(&self, j: usize, rest: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let w = self.weights[j] as u64;
        if j + 1 == self.weights.len() {
            if rest % w == 0 {
                cur[j] = (rest / w) as u32;
                out.push(cur.clone());
            }
            return;
        }
        for a in (0..=rest / w).rev() {
            cur[j] = a as u32;
            self.enumerate_rec(j + 1, rest - a * w, cur, out);
        }
        cur[j] = 0;
    }

    fn check_unit(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.weights.len() {
            return Err(Error::Dimension {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        let n: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::UnsupportedPoint(format!(
                "|x|² = {n}, expected a unit vector"
            )));
        }
        Ok(())
    }

    fn check_symbol(&self, f: &AdmissibleSymbol) -> Result<()> {
        if f.coords != self.weights.len() {
            return Err(Error::Dimension {
                expected: self.weights.len(),
                got: f.coords,
            });
        }
        f.check_invariant(&self.weights)
    }

    /// `π^d/‖x^α‖² = (|α|+d)!/α!`
    fn inv_norm<T: Real>(&self, alpha: &[u32]) -> Scaled<T> {
        let d = self.dim();
        let (m, e) = ratio_scaled(&factorial(degree(alpha) + d), &multi_factorial(alpha));
        let v = Cx {
            re: T::from_dd(m),
            im: T::from_f64(0.0),
        };
        Scaled::new(v, e)
    }

    fn pi_d<T: Real>(&self) -> T {
        (0..self.dim()).fold(T::from_f64(1.0), |acc, _| acc * T::pi())
    }

    fn max_exponents(&self, basis: &EquivariantBasis, extra: u32) -> Vec<u32> {
        (0..self.weights.len())
            .map(|j| basis.exponents.iter().map(|a| a[j]).max().unwrap_or(0) + extra)
            .collect()
    }

    fn szego_sum<T: Real>(&self, k: i64, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let basis = self.enumerate_basis(k);
        let prods: Vec<Complex64> = x.iter().zip(y).map(|(a, b)| a * b.conj()).collect();
        let tables = power_tables::<T>(&prods, &self.max_exponents(&basis, 0));
        let s: Cx<T> = ordered_sum(basis.len(), |i| {
            let a = &basis.exponents[i];
            monomial(&tables, a).mul(self.inv_norm::<T>(a)).cx()
        });
        s.scale(self.pi_d_recip::<T>()).to_c64()
    }

    /// `Π_k(x, y) = Σ_α x^α ȳ^α / ‖x^α‖²`.
    pub fn szego_offdiag(&self, k: i64, x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
        self.check_unit(x)?;
        self.check_unit(y)?;
        Ok(match self.precision {
            Precision::Double => self.szego_sum::<f64>(k, x, y),
            Precision::Extended => self.szego_sum::<TwoFloat>(k, x, y),
        })
    }

    pub fn szego_diag(&self, k: i64, x: &[Complex64]) -> Result<f64> {
        Ok(self.szego_offdiag(k, x, x)?.re)
    }

    fn sparse<T: Real>(&self, basis: &EquivariantBasis, f: &AdmissibleSymbol) -> SparseToeplitz<T> {
        let d = self.dim();
        let index: HashMap<&[u32], usize> = basis
            .exponents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_slice(), i))
            .collect();
        let cols = basis
            .exponents
            .par_iter()
            .map(|beta| {
                let mut col: Vec<(usize, Cx<T>)> = Vec::new();
                for t in &f.terms {
                    let pb: Vec<u32> = beta.iter().zip(&t.beta).map(|(b, p)| b + p).collect();
                    if pb.iter().zip(&t.gamma).any(|(x, q)| x < q) {
                        continue;
                    }
                    let alpha: Vec<u32> = pb.iter().zip(&t.gamma).map(|(x, q)| x - q).collect();
                    let Some(&ai) = index.get(alpha.as_slice()) else {
                        continue;
                    };
                    // ‖x^{p+β}‖² / ‖x^α‖²
                    let num = multi_factorial(&pb) * factorial(degree(&alpha) + d);
                    let den = factorial(degree(&pb) + d) * multi_factorial(&alpha);
                    let c = Cx::<T>::from_c64(t.coeff()).scale(T::from_ratio(&num, &den));
                    match col.iter_mut().find(|(i, _)| *i == ai) {
                        Some(e) => e.1 = e.1.add(c),
                        None => col.push((ai, c)),
                    }
                }
                col
            })
            .collect();
        SparseToeplitz { cols }
    }

    /// `π^{-d}`, one Newton step past the f64 reciprocal.
    fn pi_d_recip<T: Real>(&self) -> T {
        let pd = self.pi_d::<T>();
        let r = T::from_f64(1.0 / pd.to_f64());
        r * (T::from_f64(2.0) - pd * r)
    }

    fn toeplitz_sum<T: Real>(
        &self,
        k: i64,
        f: &AdmissibleSymbol,
        x: &[Complex64],
        y: &[Complex64],
    ) -> Complex64 {
        let basis = self.enumerate_basis(k);
        let a = self.sparse::<T>(&basis, f);
        let extra = f
            .terms
            .iter()
            .flat_map(|t| t.beta.iter().copied())
            .max()
            .unwrap_or(0);
        let me = self.max_exponents(&basis, extra);
        let tx = power_tables::<T>(x, &me);
        let yc: Vec<Complex64> = y.iter().map(|c| c.conj()).collect();
        let ty = power_tables::<T>(&yc, &me);
        let s: Cx<T> = ordered_sum(basis.len(), |b| {
            let beta = &basis.exponents[b];
            let right = monomial(&ty, beta).mul(self.inv_norm::<T>(beta));
            let mut acc = Cx::zero();
            for (ai, c) in &a.cols[b] {
                let t = monomial(&tx, &basis.exponents[*ai]).mul(right);
                acc = acc.add(t.cx().mul(*c));
            }
            acc
        });
        s.scale(self.pi_d_recip::<T>()).to_c64()
    }

    /// Kernel of `T_k[f] = Π_k f Π_k` at `(x, y)`.
    pub fn toeplitz_offdiag(
        &self,
        k: i64,
        f: &AdmissibleSymbol,
        x: &[Complex64],
        y: &[Complex64],
    ) -> Result<Complex64> {
        self.check_symbol(f)?;
        self.check_unit(x)?;
        self.check_unit(y)?;
        Ok(match self.precision {
            Precision::Double => self.toeplitz_sum::<f64>(k, f, x, y),
            Precision::Extended => self.toeplitz_sum::<TwoFloat>(k, f, x, y),
        })
    }

    pub fn toeplitz_diag(&self, k: i64, f: &AdmissibleSymbol, x: &[Complex64]) -> Result<f64> {
        Ok(self.toeplitz_offdiag(k, f, x, x)?.re)
    }

    /// Matrix of `T_k[f]` in the orthonormal basis `x^α/‖x^α‖`.
    pub fn toeplitz_matrix(&self, k: i64, f: &AdmissibleSymbol) -> Result<DMatrix<Complex64>> {
        self.check_symbol(f)?;
        let basis = self.enumerate_basis(k);
        let a = self.sparse::<TwoFloat>(&basis, f);
        let norms: Vec<f64> = basis.norms_sq.iter().map(|n| n.to_f64().sqrt()).collect();
        let n = basis.len();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (b, col) in a.cols.iter().enumerate() {
            for (ai, c) in col {
                m[(*ai, b)] += c.to_c64() * (norms[*ai] / norms[b]);
            }
        }
        Ok(m)
    }

    fn compose_sum<T: Real>(
        &self,
        k: i64,
        f: &AdmissibleSymbol,
        g: &AdmissibleSymbol,
        x: &[Complex64],
    ) -> Complex64 {
        let basis = self.enumerate_basis(k);
        let af = self.sparse::<T>(&basis, f);
        let ag = self.sparse::<T>(&basis, g);
        let me = self.max_exponents(&basis, 0);
        let tx = power_tables::<T>(x, &me);
        let xc: Vec<Complex64> = x.iter().map(|c| c.conj()).collect();
        let txc = power_tables::<T>(&xc, &me);
        let s: Cx<T> = ordered_sum(basis.len(), |b| {
            let beta = &basis.exponents[b];
            let right = monomial(&txc, beta).mul(self.inv_norm::<T>(beta));
            let mut acc = Cx::zero();
            for (gi, cg) in &ag.cols[b] {
                for (fi, cf) in &af.cols[*gi] {
                    let t = monomial(&tx, &basis.exponents[*fi]).mul(right);
                    acc = acc.add(t.cx().mul(cf.mul(*cg)));
                }
            }
            acc
        });
        s.scale(self.pi_d_recip::<T>()).to_c64()
    }

    /// Diagonal of the kernel of `T_k[f] ∘ T_k[g]`.
    pub fn compose_diag(
        &self,
        k: i64,
        f: &AdmissibleSymbol,
        g: &AdmissibleSymbol,
        x: &[Complex64],
    ) -> Result<Complex64> {
        self.check_symbol(f)?;
        self.check_symbol(g)?;
        self.check_unit(x)?;
        Ok(match self.precision {
            Precision::Double => self.compose_sum::<f64>(k, f, g, x),
            Precision::Extended => self.compose_sum::<TwoFloat>(k, f, g, x),
        })
    }

    /// Order of the stabilizer of the orbit through `x`.
    pub fn stabilizer_order(&self, x: &[Complex64]) -> u32 {
        x.iter()
            .zip(&self.weights)
            .filter(|(c, _)| c.norm() > SUPPORT_TOL)
            .fold(0, |acc, (_, &w)| gcd(acc, w))
    }

    /// Index `j` when `x` is a phase multiple of the coordinate point `e_j`.
    fn coordinate_point(&self, x: &[Complex64]) -> Option<usize> {
        let support: Vec<usize> = (0..x.len())
            .filter(|&j| x[j].norm() > SUPPORT_TOL)
            .collect();
        (support.len() == 1).then(|| support[0])
    }

    /// `Σ_{t ∈ T_m} t^k`.
    pub fn stabilizer_character_sum(&self, x: &[Complex64], k: i64) -> Result<Complex64> {
        let s = self.stabilizer_order(x);
        if s > 1 && self.coordinate_point(x).is_none() {
            return Err(Error::UnsupportedPoint(format!(
                "stabilizer of order {s} off the coordinate fixed points"
            )));
        }
        Ok((0..s)
            .map(|l| Complex64::from_polar(1.0, 2.0 * PI * (l as f64) * (k as f64) / s as f64))
            .sum())
    }

    /// Number of basis monomials not vanishing at `x`.
    pub fn support_count(&self, k: i64, x: &[Complex64]) -> usize {
        self.enumerate_basis(k)
            .exponents
            .iter()
            .filter(|a| {
                a.iter()
                    .zip(x)
                    .all(|(&e, c)| e == 0 || c.norm() > SUPPORT_TOL)
            })
            .count()
    }

    /// Heisenberg-type chart at the unit vector `x`.
    pub fn hlc(&self, x: &[Complex64]) -> Result<Hlc> {
        self.check_unit(x)?;
        let n = x.len();
        let frame: Vec<Vec<Complex64>> = match self.coordinate_point(x) {
            Some(j) => (0..n)
                .filter(|&i| i != j)
                .map(|i| {
                    let mut e = vec![Complex64::new(0.0, 0.0); n];
                    e[i] = Complex64::new(1.0, 0.0);
                    e
                })
                .collect(),
            None => {
                let mut frame: Vec<Vec<Complex64>> = Vec::new();
                let mut spanned: Vec<Vec<Complex64>> = vec![x.to_vec()];
                for i in 0..n {
                    let mut e = vec![Complex64::new(0.0, 0.0); n];
                    e[i] = Complex64::new(1.0, 0.0);
                    for u in &spanned {
                        let c: Complex64 = u.iter().zip(&e).map(|(a, b)| a.conj() * b).sum();
                        for (ej, uj) in e.iter_mut().zip(u) {
                            *ej -= c * uj;
                        }
                    }
                    let norm = e.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    if norm > 1e-8 && frame.len() < n - 1 {
                        let e: Vec<Complex64> = e.iter().map(|c| c / norm).collect();
                        spanned.push(e.clone());
                        frame.push(e);
                    }
                }
                frame
            }
        };
        Ok(Hlc {
            base: x.to_vec(),
            frame,
            phi: self.phi(x),
        })
    }

    /// Leading near-diagonal term
    /// `(k/π)^d Σ_{t ∈ T_m} t^k e^{ψ₂(dμ_{t⁻¹} v, w)/Φ} Φ^{−(d+1)} f(m)`.
    pub fn predicted_near_diag(
        &self,
        k: i64,
        x: &[Complex64],
        v: &[Complex64],
        w: &[Complex64],
        f: Option<&AdmissibleSymbol>,
    ) -> Result<Complex64> {
        let h = self.hlc(x)?;
        let d = self.dim() as i32;
        let s = self.stabilizer_order(x);
        let mut sum = Complex64::new(0.0, 0.0);
        if s == 1 {
            sum = (psi2(v, w) / h.phi).exp();
        } else {
            let j = self.coordinate_point(x).ok_or_else(|| {
                Error::UnsupportedPoint(format!(
                    "stabilizer of order {s} off the coordinate fixed points"
                ))
            })?;
            let others: Vec<usize> = (0..x.len()).filter(|&i| i != j).collect();
            for l in 0..s {
                let t = Complex64::from_polar(1.0, 2.0 * PI * l as f64 / s as f64);
                let rotated: Vec<Complex64> = v
                    .iter()
                    .zip(&others)
                    .map(|(vi, &i)| vi * t.powi(self.weights[i] as i32 - self.weights[j] as i32))
                    .collect();
                sum += t.powi((k % s as i64) as i32) * (psi2(&rotated, w) / h.phi).exp();
            }
        }
        let fm = f
            .map(|s| s.eval_sphere(x))
            .unwrap_or(Complex64::new(1.0, 0.0));
        Ok((k as f64 / PI).powi(d) * sum * h.phi.powi(-(d + 1)) * fm)
    }
}
