//! Independent reference routes used by the test suites.
//!
//! Everything here recomputes a quantity from its defining integral or
//! derivative, bypassing the closed forms in the sibling modules. Production
//! code must not call into this module; it exists so the tests can hold the
//! closed forms against a second, structurally different computation.

use crate::mat::{re, trace, CMat, DensityMatrix, Superop, C64};

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Newton iteration from the Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Legendre recurrence for P_n(x) and P_{n-1}(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                nodes[i] = 0.5 * (1.0 - x);
                weights[i] = 0.5 * w;
                nodes[n - 1 - i] = 0.5 * (1.0 + x);
                weights[n - 1 - i] = 0.5 * w;
                break;
            }
        }
    }
    (nodes, weights)
}

/// ∫₀¹ Tr(σ^s x† σ^{1-s} y) ds by quadrature.
pub fn bkm_quadrature(sigma: &DensityMatrix, x: &CMat, y: &CMat, npts: usize) -> C64 {
    let (nodes, weights) = gauss_legendre(npts);
    let mut acc = re(0.0);
    for (s, w) in nodes.iter().zip(weights.iter()) {
        let sp = sigma.pow(*s);
        let sq = sigma.pow(1.0 - *s);
        acc += trace(&(&sp * x.adjoint() * &sq * y)) * re(*w);
    }
    acc
}

/// Dirichlet form from its definition: -∫₀¹ Tr(X† σ^s L(X) σ^{1-s}) ds.
pub fn dirichlet_quadrature(sigma: &DensityMatrix, l: &Superop, x: &CMat, npts: usize) -> f64 {
    let lx = l.apply(x);
    let (nodes, weights) = gauss_legendre(npts);
    let mut acc = re(0.0);
    for (s, w) in nodes.iter().zip(weights.iter()) {
        let sp = sigma.pow(*s);
        let sq = sigma.pow(1.0 - *s);
        acc += trace(&(x.adjoint() * &sp * &lx * &sq)) * re(*w);
    }
    -acc.re
}

/// e^{tS} applied through the dense matrix exponential.
pub fn semigroup_step(s: &Superop, t: f64) -> Superop {
    Superop {
        n: s.n,
        mat: (&s.mat * re(t)).exp(),
    }
}

/// Richardson-extrapolated one-sided derivative of f at 0 from step sizes
/// h, h/2, h/4 (first-order differences, second-order extrapolation).
pub fn richardson_derivative(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let f0 = f(0.0);
    let d1 = (f(h) - f0) / h;
    let d2 = (f(h / 2.0) - f0) / (h / 2.0);
    let d4 = (f(h / 4.0) - f0) / (h / 4.0);
    // one-sided differences have an h-expansion; first sweep cancels the h
    // term, the second the h² term
    let r1 = 2.0 * d2 - d1;
    let r2 = 2.0 * d4 - d2;
    (4.0 * r2 - r1) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (n, w) = gauss_legendre(8);
        for p in 0..14u32 {
            let got: f64 = n.iter().zip(w.iter()).map(|(x, w)| w * x.powi(p as i32)).sum();
            let want = 1.0 / (p as f64 + 1.0);
            assert!((got - want).abs() < 1e-13, "degree {p}: {got} vs {want}");
        }
    }

    #[test]
    fn richardson_on_exp() {
        let d = richardson_derivative(|t| (2.5 * t).exp(), 1e-3);
        assert!((d - 2.5).abs() < 1e-9, "{d}");
    }
}
