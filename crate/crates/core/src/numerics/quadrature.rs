//! Gaussian quadrature rules and an adaptive integrator.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Default Gauss–Legendre order for finite-interval integrals.
pub const DEFAULT_LEGENDRE_ORDER: usize = 30;
/// Default Gauss–Hermite order for Gaussian expectations.
pub const DEFAULT_HERMITE_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// ∫_{−1}^{1} f(x) dx
    Legendre,
    /// ∫ e^{−x²} f(x) dx
    Hermite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RuleKind,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Σ wᵢ f(xᵢ) over the reference domain.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// ∫_a^b f for a Legendre rule, by affine map from [−1, 1].
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        debug_assert_eq!(self.kind, RuleKind::Legendre);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.apply(|t| f(mid + half * t))
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&t, &w)| (mid + half * t, half * w))
    }
}

/// Gauss–Legendre rule of the given order, nodes from Newton iteration on P_n.
pub fn gauss_legendre(order: usize) -> QuadratureRule {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights, kind: RuleKind::Legendre }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
    }
    let dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss–Hermite rule (weight e^{−x²}) of the given order.
pub fn gauss_hermite(order: usize) -> QuadratureRule {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Eigenvalues of the symmetric Jacobi matrix seed the Newton polish.
    let jacobi =
        nalgebra::DMatrix::from_fn(
            n,
            n,
            |r, c| {
                if r + 1 == c || c + 1 == r {
                    (r.max(c) as f64 / 2.0).sqrt()
                } else {
                    0.0
                }
            },
        );
    let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    guesses.sort_by(f64::total_cmp);
    for i in 0..n.div_ceil(2) {
        let mut z = guesses[n - 1 - i];
        for _ in 0..100 {
            let (q, q_prev) = hermite_functions(n, z);
            let dz = q / ((2.0 * nf).sqrt() * q_prev);
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, q_prev) = hermite_functions(n, z);
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        // w = 2/p_n'(z)^2 with p_n' = sqrt(2n) p_{n-1} and p = q e^{z²/2}.
        let w = (-z * z).exp() / (nf * q_prev * q_prev);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights, kind: RuleKind::Hermite }
}

// Orthonormal Hermite polynomials times e^{-z²/2}, which stay bounded for
// large orders; returns (q_n, q_{n-1}).
fn hermite_functions(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25) * (-0.5 * z * z).exp();
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

type RuleCache = Mutex<HashMap<(RuleKind, usize), Arc<QuadratureRule>>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared, lazily built rule.
pub fn cached_rule(kind: RuleKind, order: usize) -> Arc<QuadratureRule> {
    let mut map = rule_cache().lock().expect("quadrature cache poisoned");
    map.entry((kind, order))
        .or_insert_with(|| {
            Arc::new(match kind {
                RuleKind::Legendre => gauss_legendre(order),
                RuleKind::Hermite => gauss_hermite(order),
            })
        })
        .clone()
}

/// Value and error estimate from an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-10 }
    }
}

const ADAPTIVE_ORDER: usize = 15;
const MAX_SEGMENTS: usize = 4000;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn segment(rule: &QuadratureRule, a: f64, b: f64, coarse: f64, f: &impl Fn(f64) -> f64) -> (Segment, f64, f64) {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let fine = left + right;
    (Segment { a, b, value: fine, error: (fine - coarse).abs() }, left, right)
}

/// Globally adaptive Gauss–Legendre integration over a finite interval.
///
/// Each segment is estimated by one rule on the whole segment and on its two
/// halves; the segment with the largest discrepancy is bisected until the
/// summed discrepancy meets the tolerance.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite limits required, got [{a}, {b}]")));
    }
    let rule = cached_rule(RuleKind::Legendre, ADAPTIVE_ORDER);
    let whole = rule.integrate(a, b, &f);
    let (first, _, _) = segment(&rule, a, b, whole, &f);
    let mut segs = vec![first];
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if error <= tol.target(value) {
            return Ok(Integral { value, error });
        }
        if segs.len() >= MAX_SEGMENTS {
            if error <= 100.0 * tol.target(value) {
                log::warn!("adaptive quadrature stopped at {MAX_SEGMENTS} segments with error {error:.3e}");
                return Ok(Integral { value, error });
            }
            return Err(Error::Quadrature(format!(
                "error estimate {error:.3e} above tolerance {:.3e} after {MAX_SEGMENTS} segments on [{a}, {b}]",
                tol.target(value)
            )));
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // Interval can no longer be split in floating point.
            segs.push(Segment { error: 0.0, ..s });
            continue;
        }
        let left_coarse = rule.integrate(s.a, m, &f);
        let right_coarse = rule.integrate(m, s.b, &f);
        let (l, _, _) = segment(&rule, s.a, m, left_coarse, &f);
        let (r, _, _) = segment(&rule, m, s.b, right_coarse, &f);
        segs.push(l);
        segs.push(r);
    }
}

/// ∫_0^∞ f, split at the given breakpoints with a mapped tail beyond the last one.
///
/// Breakpoints should sit at the scales where the integrand changes character.
/// The tail [b, ∞) is mapped onto [0, 1) by x = b + w t/(1 − t).
pub fn integrate_semi_infinite(f: impl Fn(f64) -> f64, breakpoints: &[f64], tol: Tolerance) -> Result<Integral> {
    let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|p| p.is_finite() && *p > 0.0).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = vec![0.0];
    edges.extend(pts);
    let last = *edges.last().expect("edges start with zero");
    // Split the absolute budget across pieces so the total still meets it.
    let pieces = edges.len() as f64;
    let piece_tol = Tolerance { abs: tol.abs / pieces, rel: tol.rel };
    let mut total = Integral { value: 0.0, error: 0.0 };
    for w in edges.windows(2) {
        let part = integrate_adaptive(&f, w[0], w[1], piece_tol)?;
        total.value += part.value;
        total.error += part.error;
    }
    let width = if last > 0.0 { last } else { 1.0 };
    let tail = integrate_adaptive(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let x = last + width * t / s;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * width / (s * s)
            }
        },
        0.0,
        1.0,
        piece_tol,
    )?;
    total.value += tail.value;
    total.error += tail.error;
    Ok(total)
}

/// Breakpoints at logarithmically spread multiples of each scale.
pub fn scale_breakpoints(scales: &[f64]) -> Vec<f64> {
    const MULTIPLES: [f64; 12] = [1e-6, 1e-4, 1e-3, 1e-2, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];
    let mut out = Vec::new();
    for &s in scales.iter().filter(|s| s.is_finite() && **s > 0.0) {
        out.extend(MULTIPLES.iter().map(|m| m * s));
    }
    out.sort_by(f64::total_cmp);
    // Merge points closer than 10% to keep the piece count down.
    let mut merged: Vec<f64> = Vec::with_capacity(out.len());
    for p in out {
        if merged.last().is_none_or(|&q| p > 1.1 * q) {
            merged.push(p);
        }
    }
    merged
}
