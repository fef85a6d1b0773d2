use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::levy::KernelFn;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A test function `v` for the functional `𝓛v = ⟨v, uv₀⟩`, optionally with
/// its exact preimage `𝒢⁻¹*v` and a declared admissibility index `(ξ, β₂)`.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    v: RealFn,
    inverse_adjoint: Option<RealFn>,
    pub xi: f64,
    pub beta2: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("closed_form_preimage", &self.inverse_adjoint.is_some())
            .field("xi", &self.xi)
            .field("beta2", &self.beta2)
            .finish()
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, v: RealFn) -> Self {
        TestFunction {
            name: name.into(),
            v,
            inverse_adjoint: None,
            xi: 0.0,
            beta2: 0.0,
        }
    }

    pub fn zero() -> Self {
        let z: RealFn = Arc::new(|_| 0.0);
        Self::new("zero", z.clone())
            .with_inverse_adjoint(z)
            .with_index(f64::INFINITY, f64::INFINITY)
    }

    /// `v = 𝒢*h`, i.e. `v(y) = ∫ f(s) h(f(s) y) ds`, so that `𝒢⁻¹*v = h`
    /// is known exactly.
    pub fn from_inverse_adjoint(name: impl Into<String>, h: RealFn, f: &KernelFn) -> Self {
        let quad: Vec<(f64, f64)> = f.quad().to_vec();
        let hh = h.clone();
        let v: RealFn = Arc::new(move |y| quad.iter().map(|&(fv, w)| w * fv * hh(fv * y)).sum());
        Self::new(name, v).with_inverse_adjoint(h)
    }

    /// `𝒢⁻¹*v = x^k e^{−x²/(2σ²)}`, which vanishes at the origin for `k ≥ 1`
    /// and has a Gaussian-tailed Fourier transform.
    pub fn gaussian_moment(k: i32, sigma: f64, f: &KernelFn) -> Self {
        let s2 = 2.0 * sigma * sigma;
        let h: RealFn = Arc::new(move |x: f64| x.powi(k) * (-x * x / s2).exp());
        Self::from_inverse_adjoint(alloc::format!("gauss_moment(k={k},sigma={sigma})"), h, f)
            .with_index(f64::INFINITY, f64::INFINITY)
    }

    /// `v(x) = x⁻¹ 1{|x| > t}`.
    pub fn reciprocal_tail(t: f64) -> Self {
        Self::new(
            alloc::format!("reciprocal_tail(t={t})"),
            Arc::new(move |x: f64| if x.abs() > t { 1.0 / x } else { 0.0 }),
        )
    }

    pub fn with_inverse_adjoint(mut self, h: RealFn) -> Self {
        self.inverse_adjoint = Some(h);
        self
    }

    pub fn with_index(mut self, xi: f64, beta2: f64) -> Self {
        self.xi = xi;
        self.beta2 = beta2;
        self
    }

    /// `c·v`, with the preimage scaled alongside.
    pub fn scaled(&self, c: f64) -> Self {
        let v = self.v.clone();
        let mut out = Self::new(
            alloc::format!("{}*{c}", self.name),
            Arc::new(move |x| c * v(x)),
        );
        if let Some(h) = &self.inverse_adjoint {
            let h = h.clone();
            out.inverse_adjoint = Some(Arc::new(move |x| c * h(x)));
        }
        out.xi = self.xi;
        out.beta2 = self.beta2;
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.v)(x)
    }

    pub fn inverse_adjoint(&self, x: f64) -> Option<f64> {
        self.inverse_adjoint.as_ref().map(|h| h(x))
    }

    pub fn has_inverse_adjoint(&self) -> bool {
        self.inverse_adjoint.is_some()
    }

    /// Lower bound on `ξ` for a model with constants `(ε, τ)`:
    /// `2(1 − ε) − (½ − ε)(1 + τ)/(2 + τ)`.
    pub fn xi_lower_bound(eps: f64, tau: f64) -> f64 {
        2.0 * (1.0 - eps) - (0.5 - eps) * (1.0 + tau) / (2.0 + tau)
    }

    /// Whether the declared `ξ` exceeds [`Self::xi_lower_bound`].
    pub fn index_ok(&self, eps: f64, tau: f64) -> bool {
        self.xi > Self::xi_lower_bound(eps, tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_adjoint_is_identity() {
        let f = KernelFn::unit_cube(1).unwrap();
        let v = TestFunction::gaussian_moment(1, 1.0, &f);
        for x in [-2.0, 0.3, 1.7] {
            assert!((v.eval(x) - v.inverse_adjoint(x).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn index_bound_is_dominated_by_the_tau_free_form() {
        for eps in [0.05, 0.2, 0.4] {
            let simple = 1.75 - 1.5 * eps;
            assert!((TestFunction::xi_lower_bound(eps, 0.0) - simple).abs() < 1e-14);
            for tau in [0.5, 1.0, 10.0] {
                assert!(TestFunction::xi_lower_bound(eps, tau) < simple);
            }
        }
        let f = KernelFn::unit_cube(1).unwrap();
        let v = TestFunction::gaussian_moment(1, 1.0, &f).scaled(2.0);
        assert!(v.index_ok(0.1, 1.0));
        assert!((v.eval(1.0) - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!(!TestFunction::reciprocal_tail(1.0).index_ok(0.1, 1.0));
    }
}
