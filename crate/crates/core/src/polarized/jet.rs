//! Truncated multivariate Taylor polynomials with complex coefficients.
//!
//! A [`Jet`] in `n` variables of order `N` stores every Taylor coefficient of
//! total degree `<= N`. Arithmetic on jets is exact up to truncation, so
//! evaluating an expression on seeded jets yields all mixed partials up to
//! order `N` at machine precision.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Monomial bookkeeping shared by all jets of one `(nvars, order)` shape.
#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    degree: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    // (lhs, rhs, out) for every product landing at degree <= order
    products: Vec<(u32, u32, u32)>,
}

impl JetLayout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut monomials: Vec<Vec<u8>> = Vec::new();
        for deg in 0..=order {
            let mut current = vec![0u8; nvars];
            push_degree(&mut monomials, &mut current, 0, deg);
        }
        let degree: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut products = Vec::new();
        let mut sum = vec![0u8; nvars];
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degree[i] + degree[j] > order {
                    // later monomials only have higher degree
                    break;
                }
                for v in 0..nvars {
                    sum[v] = a[v] + b[v];
                }
                let k = index[&sum];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        JetLayout {
            nvars,
            order,
            monomials,
            degree,
            index,
            products,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn index_of(&self, multi: &[u8]) -> Option<usize> {
        self.index.get(multi).copied()
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, remaining: usize) {
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_degree(out, current, var + 1, remaining - e);
    }
    current[var] = 0;
}

/// Shared, lazily built layouts. Layouts are immutable once built.
pub fn layout(nvars: usize, order: usize) -> Arc<JetLayout> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(l) = cache
        .lock()
        .expect("layout cache poisoned")
        .get(&(nvars, order))
    {
        return Arc::clone(l);
    }
    let built = Arc::new(JetLayout::build(nvars, order));
    let mut guard = cache.lock().expect("layout cache poisoned");
    Arc::clone(guard.entry((nvars, order)).or_insert(built))
}

#[derive(Clone, Debug)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(layout: &Arc<JetLayout>, value: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); layout.len()];
        coeffs[0] = value;
        Jet {
            layout: Arc::clone(layout),
            coeffs,
        }
    }

    /// `value + eps_var`, the seed for differentiating along variable `var`.
    pub fn variable(layout: &Arc<JetLayout>, value: Complex64, var: usize) -> Self {
        let mut jet = Jet::constant(layout, value);
        if layout.order >= 1 {
            let mut m = vec![0u8; layout.nvars];
            m[var] = 1;
            let i = layout.index[&m];
            jet.coeffs[i] = Complex64::new(1.0, 0.0);
        }
        jet
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, multi: &[u8]) -> Complex64 {
        match self.layout.index_of(multi) {
            Some(i) => self.coeffs[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Mixed partial derivative at the expansion point.
    pub fn derivative(&self, multi: &[u8]) -> Complex64 {
        let fact: f64 = multi.iter().map(|&e| factorial(e as usize)).product();
        self.coefficient(multi) * fact
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs,
        }
    }

    pub fn neg(&self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        if self.coeffs.len() == 1 {
            return Jet {
                layout: Arc::clone(&self.layout),
                coeffs: vec![self.coeffs[0] * other.coeffs[0]],
            };
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in &self.layout.products {
            out[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs: out,
        }
    }

    /// Nilpotent part `self - self.value()`.
    fn nilpotent(&self) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        h
    }

    /// `sum_k series[k] * h^k` by Horner, where `h` is the nilpotent part.
    fn apply_series(&self, series: &[Complex64]) -> Jet {
        let h = self.nilpotent();
        let n = series.len() - 1;
        let mut acc = Jet::constant(&self.layout, series[n]);
        for k in (0..n).rev() {
            acc = acc.mul(&h).add_scalar(series[k]);
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let a = self.value();
        let ea = a.exp();
        let mut series = Vec::with_capacity(self.layout.order + 1);
        let mut f = 1.0;
        for k in 0..=self.layout.order {
            if k > 0 {
                f *= k as f64;
            }
            series.push(ea / f);
        }
        self.apply_series(&series)
    }

    /// Principal logarithm. Caller guarantees `value() != 0`.
    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut series = Vec::with_capacity(self.layout.order + 1);
        series.push(a.ln());
        let inv = a.inv();
        let mut p = inv;
        for k in 1..=self.layout.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(p * (sign / k as f64));
            p *= inv;
        }
        self.apply_series(&series)
    }

    /// Principal complex power. Caller guarantees `value() != 0`.
    pub fn powc(&self, p: Complex64) -> Jet {
        let a = self.value();
        let inv = a.inv();
        let mut series = Vec::with_capacity(self.layout.order + 1);
        let mut term = a.powc(p);
        series.push(term);
        for k in 0..self.layout.order {
            term = term * (p - k as f64) / (k as f64 + 1.0) * inv;
            series.push(term);
        }
        self.apply_series(&series)
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let inv = a.inv();
        let mut series = Vec::with_capacity(self.layout.order + 1);
        let mut term = inv;
        for _ in 0..=self.layout.order {
            series.push(term);
            term = -term * inv;
        }
        self.apply_series(&series)
    }

    /// Integer power by repeated squaring; exact at a zero base for `n >= 0`.
    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut result = Jet::constant(&self.layout, Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Taylor jet of `d^alpha F` in the same variables, truncated to
    /// `target.order()`. `self` must have order `>= target.order() + |alpha|`.
    pub fn shift_derivative(&self, alpha: &[u8], target: &Arc<JetLayout>) -> Jet {
        debug_assert_eq!(target.nvars, self.layout.nvars);
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        let mut shifted = vec![0u8; target.nvars];
        for (i, m) in target.monomials.iter().enumerate() {
            let mut factor = 1.0;
            for v in 0..target.nvars {
                shifted[v] = m[v] + alpha[v];
                // (m+a)!/m!
                for t in (m[v] as usize + 1)..=(shifted[v] as usize) {
                    factor *= t as f64;
                }
            }
            out[i] = self.coefficient(&shifted) * factor;
        }
        Jet {
            layout: Arc::clone(target),
            coeffs: out,
        }
    }

    /// Substitutes nilpotent jets `devs` (all in layout `out`) for the
    /// variables of `self`: returns `sum_m c_m prod_i devs[i]^{m_i}`.
    pub fn compose(&self, devs: &[Jet], out: &Arc<JetLayout>) -> Jet {
        debug_assert_eq!(devs.len(), self.layout.nvars);
        // Fast path: every deviation is zero or a unit monomial of degree one.
        let mut targets: Vec<Option<usize>> = Vec::with_capacity(devs.len());
        let mut simple = true;
        for d in devs {
            match unit_variable(d) {
                Some(t) => targets.push(t),
                None => {
                    simple = false;
                    break;
                }
            }
        }
        let mut result = vec![Complex64::new(0.0, 0.0); out.len()];
        if simple {
            let mut mono = vec![0u8; out.nvars];
            'outer: for (i, m) in self.layout.monomials.iter().enumerate() {
                let c = self.coeffs[i];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                mono.iter_mut().for_each(|e| *e = 0);
                let mut deg = 0usize;
                for (v, &e) in m.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    match targets[v] {
                        None => continue 'outer,
                        Some(t) => {
                            mono[t] += e;
                            deg += e as usize;
                        }
                    }
                }
                if deg > out.order {
                    continue;
                }
                let k = out.index[&mono];
                result[k] += c;
            }
            return Jet {
                layout: Arc::clone(out),
                coeffs: result,
            };
        }
        // General path: powers of each deviation, then one product per monomial.
        let max_e = self.layout.order.min(out.order);
        let powers: Vec<Vec<Jet>> = devs
            .iter()
            .map(|d| {
                let mut p = vec![Jet::constant(out, Complex64::new(1.0, 0.0))];
                for e in 1..=max_e {
                    let next = p[e - 1].mul(d);
                    p.push(next);
                }
                p
            })
            .collect();
        let mut acc = Jet {
            layout: Arc::clone(out),
            coeffs: result,
        };
        for (i, m) in self.layout.monomials.iter().enumerate() {
            let c = self.coeffs[i];
            if (c.re == 0.0 && c.im == 0.0) || self.layout.degree[i] > out.order {
                continue;
            }
            let mut term: Option<Jet> = None;
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = &powers[v][e as usize];
                term = Some(match term {
                    None => p.clone(),
                    Some(t) => t.mul(p),
                });
            }
            match term {
                None => acc.coeffs[0] += c,
                Some(t) => {
                    for (a, b) in acc.coeffs.iter_mut().zip(&t.coeffs) {
                        *a += c * b;
                    }
                }
            }
        }
        acc
    }
}

/// `Some(None)` for an identically zero jet, `Some(Some(v))` for exactly
/// `eps_v`, `None` otherwise.
fn unit_variable(d: &Jet) -> Option<Option<usize>> {
    let mut found: Option<usize> = None;
    for (i, c) in d.coeffs.iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        if d.layout.degree[i] != 1 || c.re != 1.0 || c.im != 0.0 || found.is_some() {
            return None;
        }
        let m = &d.layout.monomials[i];
        found = m.iter().position(|&e| e == 1);
    }
    Some(found)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn layout_counts_match_binomials() {
        // C(n + N, N)
        assert_eq!(layout(2, 3).len(), 10);
        assert_eq!(layout(4, 6).len(), 210);
        assert_eq!(layout(0, 0).len(), 1);
        assert_eq!(layout(3, 0).len(), 1);
    }

    #[test]
    fn product_of_variables() {
        let l = layout(2, 3);
        let x = Jet::variable(&l, c(2.0, 0.0), 0);
        let y = Jet::variable(&l, c(3.0, 0.0), 1);
        let p = x.mul(&y).mul(&y);
        // d/dx d^2/dy^2 (x y^2) = 2
        assert!((p.derivative(&[1, 2]) - c(2.0, 0.0)).norm() < 1e-14);
        assert!((p.value() - c(18.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exp_log_roundtrip() {
        let l = layout(2, 5);
        let x = Jet::variable(&l, c(0.3, 0.2), 0).add(&Jet::variable(&l, c(0.0, 0.0), 1));
        let back = x.exp().ln();
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn powi_at_zero_is_exact() {
        let l = layout(1, 4);
        let x = Jet::variable(&l, c(0.0, 0.0), 0);
        let p = x.powi(2);
        assert_eq!(p.derivative(&[2]), c(2.0, 0.0));
        assert_eq!(p.derivative(&[1]), c(0.0, 0.0));
    }

    #[test]
    fn powc_matches_powi() {
        let l = layout(2, 4);
        let x = Jet::variable(&l, c(1.3, -0.4), 0).mul(&Jet::variable(&l, c(0.7, 0.1), 1));
        let a = x.powc(c(-3.0, 0.0));
        let b = x.powi(-3);
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((p - q).norm() < 1e-12 * (1.0 + q.norm()));
        }
    }

    #[test]
    fn shift_then_compose_is_derivative() {
        // F = x^3 y, order 4 at (1, 2); d/dx F = 3 x^2 y
        let l4 = layout(2, 4);
        let x = Jet::variable(&l4, c(1.0, 0.0), 0);
        let y = Jet::variable(&l4, c(2.0, 0.0), 1);
        let f = x.powi(3).mul(&y);
        let l3 = layout(2, 3);
        let d = f.shift_derivative(&[1, 0], &l3);
        assert!((d.value() - c(6.0, 0.0)).norm() < 1e-14);
        assert!((d.derivative(&[1, 0]) - c(12.0, 0.0)).norm() < 1e-14);
        // compose with a nonlinear deviation (general path)
        let dev0 = Jet::variable(&l3, c(0.0, 0.0), 0).powi(2);
        let dev1 = Jet::constant(&l3, c(0.0, 0.0));
        let g = d.compose(&[dev0, dev1], &l3);
        // 3 (1 + t^2)^2 * 2 -> second derivative at 0 is 3*2*2*2 = 24
        assert!((g.derivative(&[2, 0]) - c(24.0, 0.0)).norm() < 1e-12);
    }
}
