//! Real-analytic functions in polarized form.
//!
//! A [`PolarizedScalar`] is a kernel `F(z, ζ)` holomorphic in both slots,
//! where `ζ` stands for `z̄`. The physical function is the diagonal
//! `f(z) = F(z, z̄)`, and `F(z, w̄)` is its sesquiholomorphic extension.
//! Kernels are expression graphs evaluated on [`Jet`]s, so every mixed slot
//! partial is available to machine precision.

pub mod jet;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

pub use jet::{layout, Jet, JetLayout};

use crate::error::{Error, Result};

/// Deepest mixed-derivative nesting a kernel may carry.
pub const MAX_ORDER: usize = 6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Scalar equation `g(t; args) = 0` whose root defines a kernel.
///
/// The base root comes from [`RootEquation::solve`]; higher Taylor
/// coefficients are propagated by the implicit function theorem, never by
/// differentiating the iteration.
pub trait RootEquation: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn residual(&self, t: &Jet, args: &[Jet]) -> Jet;
    /// `∂g/∂t` at base values.
    fn slope(&self, t: Complex64, args: &[Complex64]) -> Complex64;
    fn solve(&self, args: &[Complex64]) -> Result<Complex64>;
}

#[derive(Debug)]
pub(crate) enum Node {
    Const(Complex64),
    Var(usize),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Neg(Arc<Node>),
    Scale(Complex64, Arc<Node>),
    PowI(Arc<Node>, i32),
    Pow(Arc<Node>, Complex64),
    Log(Arc<Node>),
    Exp(Arc<Node>),
    Partial(Arc<Node>, Vec<u8>),
    Subst(Arc<Node>, Vec<Arc<Node>>),
    Root(Arc<dyn RootEquation>, Vec<Arc<Node>>),
}

/// Orders of a mixed slot partial `∂_z^holo ∂_ζ^anti`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivativeRequest {
    pub holo: Vec<u8>,
    pub anti: Vec<u8>,
}

impl DerivativeRequest {
    pub fn new(holo: Vec<u8>, anti: Vec<u8>) -> Self {
        DerivativeRequest { holo, anti }
    }

    /// `∂_{z_a}`
    pub fn holo(dim: usize, a: usize) -> Self {
        let mut holo = vec![0; dim];
        holo[a] = 1;
        DerivativeRequest {
            holo,
            anti: vec![0; dim],
        }
    }

    /// `∂_{ζ_b}`
    pub fn anti(dim: usize, b: usize) -> Self {
        let mut anti = vec![0; dim];
        anti[b] = 1;
        DerivativeRequest {
            holo: vec![0; dim],
            anti,
        }
    }

    /// `∂_{z_a} ∂_{ζ_b}`
    pub fn mixed(dim: usize, a: usize, b: usize) -> Self {
        let mut r = Self::holo(dim, a);
        r.anti[b] = 1;
        r
    }

    pub fn total(&self) -> usize {
        self.holo
            .iter()
            .chain(&self.anti)
            .map(|&o| o as usize)
            .sum()
    }

    fn slots(&self) -> Vec<u8> {
        self.holo.iter().chain(&self.anti).copied().collect()
    }
}

/// Caller-supplied validity region of a kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainHint {
    pub center: Option<Vec<Complex64>>,
    pub radius: f64,
    pub note: String,
}

impl DomainHint {
    pub fn unbounded() -> Self {
        DomainHint {
            center: None,
            radius: f64::INFINITY,
            note: "entire".into(),
        }
    }

    pub fn ball(center: Vec<Complex64>, radius: f64, note: impl Into<String>) -> Self {
        DomainHint {
            center: Some(center),
            radius,
            note: note.into(),
        }
    }

    pub fn contains(&self, p: &[Complex64]) -> bool {
        if p.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return false;
        }
        match &self.center {
            None => true,
            Some(c) => {
                let dist: f64 = p
                    .iter()
                    .zip(c)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                dist <= self.radius
            }
        }
    }

    fn describe(&self) -> String {
        match &self.center {
            None => self.note.clone(),
            Some(c) => format!(
                "{}: ball of radius {} about {:?}",
                self.note, self.radius, c
            ),
        }
    }

    fn meet(&self, other: &DomainHint) -> DomainHint {
        match (&self.center, &other.center) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            _ if other.radius < self.radius => other.clone(),
            _ => self.clone(),
        }
    }
}

/// A real-analytic kernel `F(z, ζ)` in `dim` complex variables.
#[derive(Clone)]
pub struct PolarizedScalar {
    dim: usize,
    // extra parameter slots appended after the 2·dim active slots
    params: usize,
    node: Arc<Node>,
    domain: DomainHint,
    hermitian: bool,
    depth: usize,
}

impl fmt::Debug for PolarizedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarizedScalar")
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("hermitian", &self.hermitian)
            .field("depth", &self.depth)
            .field("domain", &self.domain)
            .finish()
    }
}

impl PolarizedScalar {
    fn from_node(dim: usize, node: Node, hermitian: bool) -> Self {
        PolarizedScalar {
            dim,
            params: 0,
            node: Arc::new(node),
            domain: DomainHint::unbounded(),
            hermitian,
            depth: 0,
        }
    }

    fn derived(&self, node: Node, other: Option<&PolarizedScalar>, hermitian: bool) -> Self {
        let (params, domain, depth) = match other {
            Some(o) => {
                assert_eq!(self.dim, o.dim, "kernel dimension mismatch");
                (
                    self.params.max(o.params),
                    self.domain.meet(&o.domain),
                    self.depth.max(o.depth),
                )
            }
            None => (self.params, self.domain.clone(), self.depth),
        };
        PolarizedScalar {
            dim: self.dim,
            params,
            node: Arc::new(node),
            domain,
            hermitian,
            depth,
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::from_node(dim, Node::Const(c), c.im == 0.0)
    }

    pub fn real(dim: usize, c: f64) -> Self {
        Self::constant(dim, Complex64::new(c, 0.0))
    }

    /// The holomorphic slot `z_i`.
    pub fn z(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        Self::from_node(dim, Node::Var(i), false)
    }

    /// The anti-holomorphic slot `ζ_i` (stands for `z̄_i`).
    pub fn zeta(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        Self::from_node(dim, Node::Var(dim + i), false)
    }

    /// Parameter slot `k` (internal: kernels depending on a base point).
    pub(crate) fn param(dim: usize, total_params: usize, k: usize) -> Self {
        let mut s = Self::from_node(dim, Node::Var(2 * dim + k), false);
        s.params = total_params;
        s
    }

    /// `Σ_i z_i ζ_i`, the flat potential.
    pub fn flat_norm_sq(dim: usize) -> Self {
        let mut acc = Self::real(dim, 0.0);
        for i in 0..dim {
            acc = &acc + &(&Self::z(dim, i) * &Self::zeta(dim, i));
        }
        acc.with_hermitian(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn params(&self) -> usize {
        self.params
    }

    pub fn domain(&self) -> &DomainHint {
        &self.domain
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Nesting depth of slot derivatives inside this kernel.
    pub fn derivative_depth(&self) -> usize {
        self.depth
    }

    pub fn with_domain(mut self, domain: DomainHint) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_hermitian(mut self, hermitian: bool) -> Self {
        self.hermitian = hermitian;
        self
    }

    // ---- algebra ---------------------------------------------------------

    pub fn scale(&self, c: Complex64) -> Self {
        let h = self.hermitian && c.im == 0.0;
        self.derived(Node::Scale(c, Arc::clone(&self.node)), None, h)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn powi(&self, n: i32) -> Self {
        self.derived(Node::PowI(Arc::clone(&self.node), n), None, self.hermitian)
    }

    pub fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            return self.powi(p as i32);
        }
        self.powc(Complex64::new(p, 0.0))
    }

    pub fn powc(&self, p: Complex64) -> Self {
        let h = self.hermitian && p.im == 0.0;
        self.derived(Node::Pow(Arc::clone(&self.node), p), None, h)
    }

    pub fn ln(&self) -> Self {
        self.derived(Node::Log(Arc::clone(&self.node)), None, self.hermitian)
    }

    pub fn exp(&self) -> Self {
        self.derived(Node::Exp(Arc::clone(&self.node)), None, self.hermitian)
    }

    pub fn recip(&self) -> Self {
        self.powi(-1)
    }

    /// Slot partial `∂_z^holo ∂_ζ^anti F`, again a kernel.
    pub fn partial(&self, req: &DerivativeRequest) -> Result<Self> {
        if req.holo.len() != self.dim || req.anti.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: req.holo.len().max(req.anti.len()),
            });
        }
        let total = req.total();
        let depth = self.depth + total;
        if total > MAX_ORDER || depth > MAX_ORDER {
            return Err(Error::DerivativeOrder {
                requested: depth.max(total),
                max: MAX_ORDER,
            });
        }
        if total == 0 {
            return Ok(self.clone());
        }
        let hermitian = self.hermitian && req.holo == req.anti;
        let mut out = self.derived(
            Node::Partial(Arc::clone(&self.node), req.slots()),
            None,
            hermitian,
        );
        out.depth = depth;
        Ok(out)
    }

    /// `∂_{z_a} F`
    pub fn d_holo(&self, a: usize) -> Result<Self> {
        self.partial(&DerivativeRequest::holo(self.dim, a))
    }

    /// `∂_{ζ_b} F`
    pub fn d_anti(&self, b: usize) -> Result<Self> {
        self.partial(&DerivativeRequest::anti(self.dim, b))
    }

    /// Composition `F(g_1, …, g_{2d+p})` where each argument is a kernel of
    /// dimension `dim`.
    pub fn substitute(&self, args: &[PolarizedScalar]) -> Self {
        assert_eq!(args.len(), 2 * self.dim + self.params, "substitution arity");
        let dim = args[0].dim;
        let mut params = 0;
        let mut depth = self.depth;
        let mut domain = DomainHint::unbounded();
        for a in args {
            assert_eq!(a.dim, dim, "substitution argument dimension");
            params = params.max(a.params);
            depth = depth.max(a.depth);
            domain = domain.meet(&a.domain);
        }
        PolarizedScalar {
            dim,
            params,
            node: Arc::new(Node::Subst(
                Arc::clone(&self.node),
                args.iter().map(|a| Arc::clone(&a.node)).collect(),
            )),
            domain,
            hermitian: false,
            depth,
        }
    }

    /// Kernel defined by the root of `eq(t; args) = 0`.
    pub fn root(eq: Arc<dyn RootEquation>, args: &[PolarizedScalar]) -> Self {
        let dim = args[0].dim;
        let params = args.iter().map(|a| a.params).max().unwrap_or(0);
        let depth = args.iter().map(|a| a.depth).max().unwrap_or(0);
        PolarizedScalar {
            dim,
            params,
            node: Arc::new(Node::Root(
                eq,
                args.iter().map(|a| Arc::clone(&a.node)).collect(),
            )),
            domain: DomainHint::unbounded(),
            hermitian: false,
            depth,
        }
    }

    /// Holomorphic slot fixed at `p0`: the anti-holomorphic function
    /// `p ↦ f̃(p0, p)`.
    pub fn freeze_holo(&self, p0: &[Complex64]) -> Self {
        let d = self.dim;
        let mut args: Vec<PolarizedScalar> = p0.iter().map(|&c| Self::constant(d, c)).collect();
        args.extend((0..d).map(|i| Self::zeta(d, i)));
        self.substitute(&args).with_domain(self.domain.clone())
    }

    /// Anti-holomorphic slot fixed at `p̄0`: the holomorphic function
    /// `p ↦ f̃(p, p0)`.
    pub fn freeze_anti(&self, p0: &[Complex64]) -> Self {
        let d = self.dim;
        let mut args: Vec<PolarizedScalar> = (0..d).map(|i| Self::z(d, i)).collect();
        args.extend(p0.iter().map(|&c| Self::constant(d, c.conj())));
        self.substitute(&args).with_domain(self.domain.clone())
    }

    // ---- evaluation ------------------------------------------------------

    fn check_point(&self, z: &[Complex64], w: &[Complex64]) -> Result<()> {
        if z.len() != self.dim || w.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: z.len().min(w.len()),
            });
        }
        if self.params != 0 {
            return Err(Error::Capability(
                "kernel still depends on a base point; bind it before evaluating".into(),
            ));
        }
        for p in [z, w] {
            if !self.domain.contains(p) {
                return Err(Error::OutOfDomain {
                    point: p.to_vec(),
                    domain: self.domain.describe(),
                });
            }
        }
        Ok(())
    }

    /// Raw slot evaluation `F(z, ζ)`.
    pub fn eval_slots(&self, z: &[Complex64], zeta: &[Complex64]) -> Result<Complex64> {
        let w: Vec<Complex64> = zeta.iter().map(|c| c.conj()).collect();
        self.check_point(z, &w)?;
        let l = layout(0, 0);
        let env: Vec<Jet> = z
            .iter()
            .chain(zeta)
            .map(|&c| Jet::constant(&l, c))
            .collect();
        Ok(self.eval_env(&env)?.value())
    }

    /// Sesquiholomorphic extension `f̃(z, w) = F(z, w̄)`.
    pub fn eval_offdiag(&self, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
        let zeta: Vec<Complex64> = w.iter().map(|c| c.conj()).collect();
        self.eval_slots(z, &zeta)
    }

    /// Diagonal value `f(z) = F(z, z̄)`.
    pub fn value(&self, z: &[Complex64]) -> Result<Complex64> {
        self.eval_offdiag(z, z)
    }

    /// Real part of the diagonal value.
    pub fn real_value(&self, z: &[Complex64]) -> Result<f64> {
        Ok(self.value(z)?.re)
    }

    /// Full Taylor jet of order `order` at slots `(z, ζ)` in the `2·dim`
    /// slot variables (`z_0..z_{d-1}` then `ζ_0..ζ_{d-1}`).
    pub fn taylor(&self, z: &[Complex64], zeta: &[Complex64], order: usize) -> Result<Jet> {
        let w: Vec<Complex64> = zeta.iter().map(|c| c.conj()).collect();
        self.check_point(z, &w)?;
        let l = layout(2 * self.dim, order);
        let env: Vec<Jet> = z
            .iter()
            .chain(zeta)
            .enumerate()
            .map(|(i, &c)| Jet::variable(&l, c, i))
            .collect();
        self.eval_env(&env)
    }

    /// `∂^req F` evaluated on the diagonal at `z`.
    pub fn derivative_at(&self, z: &[Complex64], req: &DerivativeRequest) -> Result<Complex64> {
        let zeta: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
        let jet = self.taylor(z, &zeta, req.total())?;
        Ok(jet.derivative(&req.slots()))
    }

    pub(crate) fn eval_env(&self, env: &[Jet]) -> Result<Jet> {
        let l = Arc::clone(env.first().map(|j| j.layout()).unwrap_or(&layout(0, 0)));
        let mut frame = Frame {
            env,
            layout: l,
            cache: HashMap::new(),
        };
        eval_node(&self.node, &mut frame)
    }
}

struct Frame<'a> {
    env: &'a [Jet],
    layout: Arc<JetLayout>,
    cache: HashMap<usize, Jet>,
}

impl Frame<'_> {
    fn point(&self) -> Vec<Complex64> {
        self.env.iter().map(|j| j.value()).collect()
    }

    fn singular(&self, op: &'static str) -> Error {
        Error::Singular {
            op,
            point: self.point(),
        }
    }
}

fn on_branch_cut(c: Complex64) -> bool {
    c == ZERO || (c.im == 0.0 && c.re < 0.0)
}

fn eval_in(node: &Arc<Node>, env: &[Jet]) -> Result<Jet> {
    let l = Arc::clone(env.first().map(|j| j.layout()).unwrap_or(&layout(0, 0)));
    let mut frame = Frame {
        env,
        layout: l,
        cache: HashMap::new(),
    };
    eval_node(node, &mut frame)
}

fn eval_node(node: &Arc<Node>, frame: &mut Frame<'_>) -> Result<Jet> {
    let key = Arc::as_ptr(node) as *const () as usize;
    if let Some(j) = frame.cache.get(&key) {
        return Ok(j.clone());
    }
    let out = match node.as_ref() {
        Node::Const(c) => Jet::constant(&frame.layout, *c),
        Node::Var(i) => match frame.env.get(*i) {
            Some(j) => j.clone(),
            None => {
                return Err(Error::Capability(format!(
                    "slot {i} is unbound in an environment of {} slots",
                    frame.env.len()
                )))
            }
        },
        Node::Add(a, b) => eval_node(a, frame)?.add(&eval_node(b, frame)?),
        Node::Sub(a, b) => eval_node(a, frame)?.sub(&eval_node(b, frame)?),
        Node::Mul(a, b) => eval_node(a, frame)?.mul(&eval_node(b, frame)?),
        Node::Div(a, b) => {
            let num = eval_node(a, frame)?;
            let den = eval_node(b, frame)?;
            if den.value() == ZERO {
                return Err(frame.singular("div"));
            }
            num.mul(&den.recip())
        }
        Node::Neg(a) => eval_node(a, frame)?.neg(),
        Node::Scale(c, a) => eval_node(a, frame)?.scale(*c),
        Node::PowI(a, n) => {
            let base = eval_node(a, frame)?;
            if *n < 0 && base.value() == ZERO {
                return Err(frame.singular("pow"));
            }
            base.powi(*n)
        }
        Node::Pow(a, p) => {
            let base = eval_node(a, frame)?;
            if on_branch_cut(base.value()) {
                return Err(frame.singular("pow"));
            }
            base.powc(*p)
        }
        Node::Log(a) => {
            let arg = eval_node(a, frame)?;
            if on_branch_cut(arg.value()) {
                return Err(frame.singular("log"));
            }
            arg.ln()
        }
        Node::Exp(a) => eval_node(a, frame)?.exp(),
        Node::Partial(inner, orders) => eval_partial(inner, orders, frame)?,
        Node::Subst(inner, args) => {
            let mut jets = Vec::with_capacity(args.len());
            for a in args {
                jets.push(eval_node(a, frame)?);
            }
            eval_in(inner, &jets)?
        }
        Node::Root(eq, args) => {
            let mut jets = Vec::with_capacity(args.len());
            for a in args {
                jets.push(eval_node(a, frame)?);
            }
            let base: Vec<Complex64> = jets.iter().map(|j| j.value()).collect();
            let t0 = eq.solve(&base)?;
            let slope = eq.slope(t0, &base);
            if slope == ZERO || !slope.re.is_finite() {
                return Err(frame.singular(eq.name()));
            }
            let inv = slope.inv();
            let mut t = Jet::constant(&frame.layout, t0);
            // chord iteration with the base slope gains one order per step
            for _ in 0..frame.layout.order() {
                let r = eq.residual(&t, &jets);
                t = t.sub(&r.scale(inv));
            }
            t
        }
    };
    if !out.is_finite() {
        return Err(frame.singular("non-finite result"));
    }
    frame.cache.insert(key, out.clone());
    Ok(out)
}

fn eval_partial(inner: &Arc<Node>, orders: &[u8], frame: &mut Frame<'_>) -> Result<Jet> {
    let env = frame.env;
    let out_order = frame.layout.order();
    let total: usize = orders.iter().map(|&o| o as usize).sum();
    let bases: Vec<Complex64> = env.iter().map(|j| j.value()).collect();
    let order_of = |i: usize| orders.get(i).copied().unwrap_or(0);
    let seeded: Vec<usize> = (0..env.len())
        .filter(|&i| order_of(i) > 0 || !env[i].is_constant())
        .collect();
    let inner_layout = layout(seeded.len(), out_order + total);
    let mut pos = vec![usize::MAX; env.len()];
    for (p, &i) in seeded.iter().enumerate() {
        pos[i] = p;
    }
    let inner_env: Vec<Jet> = (0..env.len())
        .map(|i| {
            if pos[i] != usize::MAX {
                Jet::variable(&inner_layout, bases[i], pos[i])
            } else {
                Jet::constant(&inner_layout, bases[i])
            }
        })
        .collect();
    let r = eval_in(inner, &inner_env)?;
    let alpha: Vec<u8> = seeded.iter().map(|&i| order_of(i)).collect();
    let target = layout(seeded.len(), out_order);
    let d = r.shift_derivative(&alpha, &target);
    if out_order == 0 {
        return Ok(Jet::constant(&frame.layout, d.value()));
    }
    let devs: Vec<Jet> = seeded
        .iter()
        .map(|&i| env[i].add_scalar(-bases[i]))
        .collect();
    Ok(d.compose(&devs, &frame.layout))
}

// ---- operator sugar ------------------------------------------------------

impl Add for &PolarizedScalar {
    type Output = PolarizedScalar;
    fn add(self, rhs: &PolarizedScalar) -> PolarizedScalar {
        let h = self.hermitian && rhs.hermitian;
        self.derived(
            Node::Add(Arc::clone(&self.node), Arc::clone(&rhs.node)),
            Some(rhs),
            h,
        )
    }
}

impl Sub for &PolarizedScalar {
    type Output = PolarizedScalar;
    fn sub(self, rhs: &PolarizedScalar) -> PolarizedScalar {
        let h = self.hermitian && rhs.hermitian;
        self.derived(
            Node::Sub(Arc::clone(&self.node), Arc::clone(&rhs.node)),
            Some(rhs),
            h,
        )
    }
}

impl Mul for &PolarizedScalar {
    type Output = PolarizedScalar;
    fn mul(self, rhs: &PolarizedScalar) -> PolarizedScalar {
        let h = self.hermitian && rhs.hermitian;
        self.derived(
            Node::Mul(Arc::clone(&self.node), Arc::clone(&rhs.node)),
            Some(rhs),
            h,
        )
    }
}

impl Div for &PolarizedScalar {
    type Output = PolarizedScalar;
    fn div(self, rhs: &PolarizedScalar) -> PolarizedScalar {
        let h = self.hermitian && rhs.hermitian;
        self.derived(
            Node::Div(Arc::clone(&self.node), Arc::clone(&rhs.node)),
            Some(rhs),
            h,
        )
    }
}

impl Neg for &PolarizedScalar {
    type Output = PolarizedScalar;
    fn neg(self) -> PolarizedScalar {
        self.derived(Node::Neg(Arc::clone(&self.node)), None, self.hermitian)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PolarizedScalar {
            type Output = PolarizedScalar;
            fn $m(self, rhs: PolarizedScalar) -> PolarizedScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&PolarizedScalar> for PolarizedScalar {
            type Output = PolarizedScalar;
            fn $m(self, rhs: &PolarizedScalar) -> PolarizedScalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Operations under which kernels are closed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CombineOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow(f64),
    Log,
    Exp,
    Neg,
    ScalarMul(Complex64),
}

/// Applies `op` to `args` (two operands for binary ops, one otherwise).
pub fn combine(op: CombineOp, args: &[&PolarizedScalar]) -> Result<PolarizedScalar> {
    let arity = match op {
        CombineOp::Add | CombineOp::Sub | CombineOp::Mul | CombineOp::Div => 2,
        _ => 1,
    };
    if args.len() != arity {
        return Err(Error::Capability(format!(
            "{op:?} takes {arity} operand(s), got {}",
            args.len()
        )));
    }
    if arity == 2 && args[0].dim != args[1].dim {
        return Err(Error::Dimension {
            expected: args[0].dim,
            got: args[1].dim,
        });
    }
    Ok(match op {
        CombineOp::Add => args[0] + args[1],
        CombineOp::Sub => args[0] - args[1],
        CombineOp::Mul => args[0] * args[1],
        CombineOp::Div => args[0] / args[1],
        CombineOp::Pow(p) => args[0].powf(p),
        CombineOp::Log => args[0].ln(),
        CombineOp::Exp => args[0].exp(),
        CombineOp::Neg => -args[0],
        CombineOp::ScalarMul(c) => args[0].scale(c),
    })
}
