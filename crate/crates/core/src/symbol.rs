//! Monomial symbols on the unit sphere of ℂ^{d+1}.
//!
//! A symbol is a finite sum `Σ c x^β x̄^γ` restricted to `|x| = 1`, with
//! `|β| = |γ|` so that it descends to ℂP^d. It is invariant under a weighted
//! circle action when every term has `⟨w,β⟩ = ⟨w,γ⟩`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarized::PolarizedScalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub beta: Vec<u32>,
    pub gamma: Vec<u32>,
}

impl SymbolTerm {
    pub fn coeff(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn degree(&self) -> u32 {
        self.beta.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSymbol {
    pub coords: usize,
    pub terms: Vec<SymbolTerm>,
}

fn unit(coords: usize, j: usize) -> Vec<u32> {
    let mut v = vec![0; coords];
    v[j] = 1;
    v
}

impl AdmissibleSymbol {
    pub fn new(coords: usize, terms: Vec<SymbolTerm>) -> Result<Self> {
        for t in &terms {
            if t.beta.len() != coords || t.gamma.len() != coords {
                return Err(Error::Symbol(format!(
                    "term exponents must have {coords} entries"
                )));
            }
            if t.beta.iter().sum::<u32>() != t.gamma.iter().sum::<u32>() {
                return Err(Error::Symbol(format!(
                    "bidegree mismatch {:?} / {:?}",
                    t.beta, t.gamma
                )));
            }
        }
        Ok(AdmissibleSymbol { coords, terms })
    }

    pub fn constant(coords: usize, c: f64) -> Self {
        AdmissibleSymbol {
            coords,
            terms: vec![SymbolTerm {
                re: c,
                im: 0.0,
                beta: vec![0; coords],
                gamma: vec![0; coords],
            }],
        }
    }

    /// `Σ w_j |x_j|²`, the moment map restricted to the sphere.
    pub fn moment_map(weights: &[u32]) -> Self {
        let n = weights.len();
        let terms = (0..n)
            .map(|j| SymbolTerm {
                re: weights[j] as f64,
                im: 0.0,
                beta: unit(n, j),
                gamma: unit(n, j),
            })
            .collect();
        AdmissibleSymbol { coords: n, terms }
    }

    /// `|x_j|²`
    pub fn coordinate_density(coords: usize, j: usize) -> Self {
        AdmissibleSymbol {
            coords,
            terms: vec![SymbolTerm {
                re: 1.0,
                im: 0.0,
                beta: unit(coords, j),
                gamma: unit(coords, j),
            }],
        }
    }

    /// `x_a x̄_b + x_b x̄_a`
    pub fn pair_re(coords: usize, a: usize, b: usize) -> Self {
        let t = |beta, gamma| SymbolTerm {
            re: 1.0,
            im: 0.0,
            beta,
            gamma,
        };
        AdmissibleSymbol {
            coords,
            terms: vec![
                t(unit(coords, a), unit(coords, b)),
                t(unit(coords, b), unit(coords, a)),
            ],
        }
    }

    /// `(x_a x̄_b − x_b x̄_a)/i`
    pub fn pair_im(coords: usize, a: usize, b: usize) -> Self {
        AdmissibleSymbol {
            coords,
            terms: vec![
                SymbolTerm {
                    re: 0.0,
                    im: -1.0,
                    beta: unit(coords, a),
                    gamma: unit(coords, b),
                },
                SymbolTerm {
                    re: 0.0,
                    im: 1.0,
                    beta: unit(coords, b),
                    gamma: unit(coords, a),
                },
            ],
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.re *= c;
            t.im *= c;
        }
        out
    }

    pub fn add(&self, other: &AdmissibleSymbol) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    /// Product of two symbols (term-wise exponent addition).
    pub fn mul(&self, other: &AdmissibleSymbol) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let c = a.coeff() * b.coeff();
                terms.push(SymbolTerm {
                    re: c.re,
                    im: c.im,
                    beta: a.beta.iter().zip(&b.beta).map(|(x, y)| x + y).collect(),
                    gamma: a.gamma.iter().zip(&b.gamma).map(|(x, y)| x + y).collect(),
                });
            }
        }
        AdmissibleSymbol {
            coords: self.coords,
            terms,
        }
    }

    /// Returns a symbol error when a term breaks `⟨w,β⟩ = ⟨w,γ⟩`.
    pub fn check_invariant(&self, weights: &[u32]) -> Result<()> {
        if weights.len() != self.coords {
            return Err(Error::Dimension {
                expected: self.coords,
                got: weights.len(),
            });
        }
        for t in &self.terms {
            let wb: u32 = t.beta.iter().zip(weights).map(|(a, w)| a * w).sum();
            let wg: u32 = t.gamma.iter().zip(weights).map(|(a, w)| a * w).sum();
            if wb != wg {
                return Err(Error::Symbol(format!(
                    "term x^{:?} conj(x)^{:?} has weight {wb} vs {wg}",
                    t.beta, t.gamma
                )));
            }
        }
        Ok(())
    }

    /// True when the symbol is real-valued on the sphere.
    pub fn is_real(&self) -> bool {
        let x: Vec<Complex64> = (0..self.coords)
            .map(|j| {
                Complex64::from_polar(1.0 / (self.coords as f64).sqrt(), 0.37 + 1.3 * j as f64)
            })
            .collect();
        let y: Vec<Complex64> = (0..self.coords)
            .map(|j| Complex64::from_polar((0.3 + j as f64).sqrt(), -0.81 * j as f64))
            .collect();
        [x, y].iter().all(|p| {
            let v = self.eval_sphere(p);
            v.im.abs() <= 1e-12 * (1.0 + v.norm())
        })
    }

    /// `Σ c x^β x̄^γ` (the caller supplies a unit vector).
    pub fn eval_sphere(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coeff();
                for j in 0..self.coords {
                    v *= x[j].powu(t.beta[j]) * x[j].conj().powu(t.gamma[j]);
                }
                v
            })
            .sum()
    }

    /// Polarized kernel on the affine chart `x = (1, z)/|(1, z)|` of ℂP^d.
    pub fn to_affine_kernel(&self) -> PolarizedScalar {
        let d = self.coords - 1;
        let one = PolarizedScalar::real(d, 1.0);
        let norm = &one + &PolarizedScalar::flat_norm_sq(d);
        let mut acc = PolarizedScalar::real(d, 0.0);
        for t in &self.terms {
            let mut term = PolarizedScalar::constant(d, t.coeff());
            for j in 1..self.coords {
                if t.beta[j] > 0 {
                    term = &term * &PolarizedScalar::z(d, j - 1).powi(t.beta[j] as i32);
                }
                if t.gamma[j] > 0 {
                    term = &term * &PolarizedScalar::zeta(d, j - 1).powi(t.gamma[j] as i32);
                }
            }
            let m = t.degree() as i32;
            if m > 0 {
                term = &term * &norm.powi(-m);
            }
            acc = &acc + &term;
        }
        acc.with_hermitian(self.is_real())
    }

    /// Polarized kernel on a weighted slice chart, where the sphere point is
    /// `x_j = U^{w_j/2} λ_j` with `λ = (1, z)` and `U` the normalization kernel.
    pub fn to_slice_kernel(
        &self,
        weights: &[u32],
        normalization: &PolarizedScalar,
    ) -> PolarizedScalar {
        let d = self.coords - 1;
        let mut acc = PolarizedScalar::real(d, 0.0);
        for t in &self.terms {
            let mut term = PolarizedScalar::constant(d, t.coeff());
            for j in 1..self.coords {
                if t.beta[j] > 0 {
                    term = &term * &PolarizedScalar::z(d, j - 1).powi(t.beta[j] as i32);
                }
                if t.gamma[j] > 0 {
                    term = &term * &PolarizedScalar::zeta(d, j - 1).powi(t.gamma[j] as i32);
                }
            }
            // U^{(⟨w,β⟩+⟨w,γ⟩)/2} = U^{⟨w,β⟩} for invariant terms
            let wb: u32 = t.beta.iter().zip(weights).map(|(a, w)| a * w).sum();
            let wg: u32 = t.gamma.iter().zip(weights).map(|(a, w)| a * w).sum();
            let twice = wb + wg;
            if twice > 0 {
                let p = if twice % 2 == 0 {
                    normalization.powi((twice / 2) as i32)
                } else {
                    normalization.powf(twice as f64 / 2.0)
                };
                term = &term * &p;
            }
            acc = &acc + &term;
        }
        acc.with_hermitian(self.is_real())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bidegree_is_enforced() {
        let t = SymbolTerm {
            re: 1.0,
            im: 0.0,
            beta: vec![2, 0],
            gamma: vec![0, 1],
        };
        assert!(AdmissibleSymbol::new(2, vec![t]).is_err());
    }

    #[test]
    fn invariance_by_weight() {
        let s = AdmissibleSymbol::pair_re(3, 0, 1);
        assert!(s.check_invariant(&[1, 1, 2]).is_ok());
        assert!(s.check_invariant(&[1, 2, 2]).is_err());
    }

    #[test]
    fn pair_symbols_are_real() {
        assert!(AdmissibleSymbol::pair_re(3, 0, 1).is_real());
        assert!(AdmissibleSymbol::pair_im(3, 0, 1).is_real());
        let x = [c(0.6, 0.0), c(0.0, 0.8)];
        // (x0 x̄1 − x1 x̄0)/i = 2 Im(x0 x̄1) ... here x0 x̄1 = −0.48i
        let v = AdmissibleSymbol::pair_im(2, 0, 1).eval_sphere(&x);
        assert!((v - c(-0.96, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn affine_kernel_matches_sphere_values() {
        let s = AdmissibleSymbol::moment_map(&[1, 2]);
        let k = s.to_affine_kernel();
        let z = c(0.3, -0.7);
        let n = (1.0 + z.norm_sqr()).sqrt();
        let x = [c(1.0 / n, 0.0), z / n];
        assert!((k.value(&[z]).unwrap() - s.eval_sphere(&x)).norm() < 1e-15);
    }
}
