//! Bernoulli kernels, the analytic smoothing kernel with transfer
//! `1/cosh(εj)`, and the compactly supported node weights.
//!
//! Every kernel is described by its *transfer*: the factor by which
//! convolution with it multiplies the Fourier coefficient at frequency `j`.
//! For a kernel `K` that is `2π K̂(j)`.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::PeriodicFunction;

const MAX_BERNOULLI: usize = 24;

fn bernoulli_numbers() -> &'static [f64; MAX_BERNOULLI + 1] {
    static NUMBERS: OnceLock<[f64; MAX_BERNOULLI + 1]> = OnceLock::new();
    NUMBERS.get_or_init(|| {
        // Σ_{j=0}^{n} C(n+1, j) B_j = 0, B_0 = 1 (so B_1 = -1/2).
        let mut b = [0.0; MAX_BERNOULLI + 1];
        b[0] = 1.0;
        for n in 1..=MAX_BERNOULLI {
            let mut acc = 0.0;
            let mut binom = 1.0; // C(n+1, 0)
            for (j, bj) in b.iter().enumerate().take(n) {
                acc += binom * bj;
                binom *= (n + 1 - j) as f64 / (j + 1) as f64;
            }
            b[n] = -acc / (n + 1) as f64;
        }
        b
    })
}

/// Bernoulli polynomial `B_k(u)`.
pub fn bernoulli_polynomial(k: usize, u: f64) -> f64 {
    assert!(k <= MAX_BERNOULLI, "Bernoulli polynomial degree {k} unsupported");
    let b = bernoulli_numbers();
    // Horner over Σ_i C(k, i) B_{k-i} u^i
    let mut binom = vec![1.0; k + 1];
    for i in 1..=k {
        binom[i] = binom[i - 1] * (k + 1 - i) as f64 / i as f64;
    }
    (0..=k).rev().fold(0.0, |acc, i| acc * u + binom[i] * b[k - i])
}

/// Closed form of the periodic Bernoulli kernel
/// `(1/2π) Σ_{j≠0} e^{ijt} / (ij)^k = -(2π)^{k-1}/k! · B_k({t/2π})`.
///
/// For `k = 1` the value at `t ≡ 0` is the right limit `1/2`.
pub fn periodic_bernoulli(k: usize, t: f64) -> f64 {
    debug_assert!(k >= 1);
    let u = (t / TAU).rem_euclid(1.0);
    let u = if u >= 1.0 { 0.0 } else { u };
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    -TAU.powi(k as i32 - 1) / factorial * bernoulli_polynomial(k, u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BernoulliKernel {
    order: u32,
    bandwidth: usize,
}

impl BernoulliKernel {
    pub const DEFAULT_BANDWIDTH: usize = 4096;

    pub fn new(order: u32, bandwidth: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidProblem("Bernoulli kernel order must be >= 1".into()));
        }
        Ok(Self { order, bandwidth })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// `(ij)^{-r}` for `j ≠ 0`, zero at `j = 0`.
    pub fn transfer(&self, j: i64) -> Complex64 {
        if j == 0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, j as f64).powi(-(self.order as i32))
    }

    pub fn as_function(&self) -> PeriodicFunction {
        PeriodicFunction::from_fn(self.bandwidth, |j| self.transfer(j) / TAU)
    }

    /// Truncated series `(1/π) Σ_{j=1}^{J} cos(jt − rπ/2) / j^r`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = t.rem_euclid(TAU);
        if self.order == 1 && (t < 1e-8 || TAU - t < 1e-8) {
            return Err(Error::JumpPoint { t });
        }
        let shift = self.order as f64 * PI / 2.0;
        let step = Complex64::from_polar(1.0, t);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for j in 1..=self.bandwidth {
            if j % 256 == 0 {
                rot = Complex64::from_polar(1.0, j as f64 * t);
            } else {
                rot *= step;
            }
            // cos(jt - shift) = Re(e^{ijt} e^{-i shift})
            let phase = rot * Complex64::from_polar(1.0, -shift);
            acc += phase.re / (j as f64).powi(self.order as i32);
        }
        Ok(acc / PI)
    }

    pub fn closed_form(&self, t: f64) -> f64 {
        periodic_bernoulli(self.order as usize, t)
    }
}

/// The kernel `A_ε` with transfer `1/cosh(εj)`. `ε = 0` is the identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingKernel {
    eps: f64,
}

impl SmoothingKernel {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "smoothing parameter must be finite and >= 0, got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    pub fn identity() -> Self {
        Self { eps: 0.0 }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn transfer(&self, j: i64) -> f64 {
        1.0 / (self.eps * j as f64).cosh()
    }

    pub fn apply(&self, f: &PeriodicFunction) -> PeriodicFunction {
        f.apply_transfer(|j| Complex64::new(self.transfer(j), 0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Box,
    Triangle,
    Delta,
}

/// Even, nonnegative, unit-mass weight supported on `[-ε_k, ε_k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightFunction {
    kind: WeightKind,
    half_width: f64,
}

impl WeightFunction {
    pub fn new(kind: WeightKind, half_width: f64) -> Result<Self> {
        match kind {
            WeightKind::Delta if half_width != 0.0 => Err(Error::InvalidWeight(format!(
                "delta weight must have zero half-width, got {half_width}"
            ))),
            WeightKind::Box | WeightKind::Triangle
                if !(half_width > 0.0 && half_width < PI) =>
            {
                Err(Error::InvalidWeight(format!(
                    "half-width must lie in (0, π), got {half_width}"
                )))
            }
            _ => Ok(Self { kind, half_width }),
        }
    }

    pub fn boxcar(half_width: f64) -> Result<Self> {
        Self::new(WeightKind::Box, half_width)
    }

    pub fn triangle(half_width: f64) -> Result<Self> {
        Self::new(WeightKind::Triangle, half_width)
    }

    pub fn delta() -> Self {
        Self {
            kind: WeightKind::Delta,
            half_width: 0.0,
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn transfer(&self, j: i64) -> f64 {
        let e = self.half_width;
        let x = j as f64 * e;
        match self.kind {
            WeightKind::Delta => 1.0,
            _ if j == 0 => 1.0,
            WeightKind::Box => x.sin() / x,
            WeightKind::Triangle => {
                let s = (x / 2.0).sin() / (x / 2.0);
                s * s
            }
        }
    }

    /// Point density; `None` for the delta kind.
    pub fn density(&self, u: f64) -> Option<f64> {
        let e = self.half_width;
        match self.kind {
            WeightKind::Delta => None,
            WeightKind::Box => Some(if u.abs() <= e { 0.5 / e } else { 0.0 }),
            WeightKind::Triangle => Some(((e - u.abs()) / (e * e)).max(0.0)),
        }
    }

    /// `∫ φ(u) B_k(y + u) du` in closed form.
    ///
    /// On `(0, 2π)` the kernel is the polynomial `P_k(t) = -(2π)^{k-1}/k! ·
    /// B_k(t/2π)` with `P_k' = P_{k-1}`, and one period to the left it is
    /// `P_k(t) - t^{k-1}/(k-1)!`. The mean of `P_k` is a finite Taylor sum
    /// and the truncated power is integrated exactly, so nothing cancels
    /// for small half-widths.
    pub fn smooth_bernoulli(&self, k: usize, y: f64) -> f64 {
        let e = self.half_width;
        let mut y0 = y.rem_euclid(TAU);
        if y0 >= TAU {
            y0 = 0.0;
        }
        if self.kind == WeightKind::Delta {
            return polynomial_piece(k, y0);
        }
        if y0 > TAU - e {
            y0 -= TAU;
        }
        // Even moments of φ divided by n!.
        let moment = |n: usize| -> f64 {
            let en = e.powi(n as i32);
            match self.kind {
                WeightKind::Box => en / factorial(n + 1),
                _ => 2.0 * en / factorial(n + 2),
            }
        };
        let smooth: f64 = (0..=k).step_by(2).map(|n| polynomial_piece(k - n, y0) * moment(n)).sum();
        // Antiderivatives of the truncated power [v < 0] v^{k-1}/(k-1)!.
        let trunc = |v: f64, p: usize| if v < 0.0 { v.powi(p as i32) / factorial(p) } else { 0.0 };
        let correction = if y0 - e >= 0.0 {
            0.0
        } else {
            match self.kind {
                WeightKind::Box => (trunc(y0 + e, k) - trunc(y0 - e, k)) / (2.0 * e),
                _ => (trunc(y0 + e, k + 1) - 2.0 * trunc(y0, k + 1) + trunc(y0 - e, k + 1)) / (e * e),
            }
        };
        smooth - correction
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `P_k(t) = -(2π)^{k-1}/k! · B_k(t/2π)`, including `P_0 = -1/2π`.
fn polynomial_piece(k: usize, t: f64) -> f64 {
    -TAU.powi(k as i32 - 1) / factorial(k) * bernoulli_polynomial(k, t / TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bernoulli_numbers_known_values() {
        let b = bernoulli_numbers();
        assert_eq!(b[1], -0.5);
        assert!((b[2] - 1.0 / 6.0).abs() < 1e-16);
        assert!(b[3].abs() < 1e-16);
        assert!((b[4] + 1.0 / 30.0).abs() < 1e-16);
        assert!((b[12] + 691.0 / 2730.0).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_kernel_examples() {
        let b1 = BernoulliKernel::new(1, 1 << 16).unwrap();
        assert!((b1.closed_form(PI / 2.0) - 0.25).abs() < 1e-16);
        assert!((b1.eval(PI / 2.0).unwrap() - 0.25).abs() < 1e-4);
        let b2 = BernoulliKernel::new(2, 4096).unwrap();
        assert!((b2.closed_form(PI) - PI / 12.0).abs() < 1e-15);
        assert!((b2.eval(PI).unwrap() - PI / 12.0).abs() < 1e-7);
        assert_eq!(b2.transfer(0), Complex64::new(0.0, 0.0));
        assert!(matches!(b1.eval(TAU), Err(Error::JumpPoint { .. })));
        assert!(b2.eval(0.0).is_ok());
    }

    #[test]
    fn closed_form_r2_matches_quadratic() {
        for t in [0.1, 1.0, 3.0, 6.0] {
            let expected = -PI / 6.0 + t / 2.0 - t * t / (4.0 * PI);
            assert!((periodic_bernoulli(2, t) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn bernoulli_transfer_is_hermitian() {
        let k = BernoulliKernel::new(3, 10).unwrap();
        for j in 1..10 {
            assert_eq!(k.transfer(-j), k.transfer(j).conj());
        }
    }

    #[test]
    fn smoothing_examples() {
        let k = SmoothingKernel::new(1.0).unwrap();
        assert_eq!(k.transfer(0), 1.0);
        assert!((k.transfer(1) - 2.0 / (1f64.exp() + (-1f64).exp())).abs() < 1e-15);
        assert!((k.transfer(1) - 0.64805427).abs() < 1e-8);
        let id = SmoothingKernel::new(0.0).unwrap();
        assert_eq!(id.transfer(12345), 1.0);
        for j in 0..50 {
            assert!(k.transfer(j + 1) <= k.transfer(j));
            assert_eq!(k.transfer(-j), k.transfer(j));
        }
        assert!(SmoothingKernel::new(-1.0).is_err());
    }

    #[test]
    fn weight_examples() {
        let b = WeightFunction::boxcar(PI / 2.0).unwrap();
        assert!((b.transfer(1) - 2.0 / PI).abs() < 1e-15);
        assert_eq!(b.transfer(0), 1.0);
        assert_eq!(WeightFunction::delta().transfer(7), 1.0);
        let t = WeightFunction::triangle(0.4).unwrap();
        assert_eq!(t.transfer(0), 1.0);
        for j in 1..20 {
            assert_eq!(b.transfer(-j), b.transfer(j));
            assert_eq!(t.transfer(-j), t.transfer(j));
        }
        assert!(WeightFunction::boxcar(0.0).is_err());
        assert!(WeightFunction::new(WeightKind::Delta, 0.1).is_err());
    }

    #[test]
    fn weight_transfer_matches_quadrature() {
        for w in [WeightFunction::boxcar(0.3).unwrap(), WeightFunction::triangle(0.3).unwrap()] {
            for j in [1i64, 2, 5] {
                // midpoint rule on the density
                let n = 20000;
                let h = 0.6 / n as f64;
                let q: f64 = (0..n)
                    .map(|i| {
                        let u = -0.3 + (i as f64 + 0.5) * h;
                        w.density(u).unwrap() * (j as f64 * u).cos()
                    })
                    .sum::<f64>()
                    * h;
                assert!((q - w.transfer(j)).abs() < 1e-7, "{w:?} j={j}");
            }
        }
    }

    #[test]
    fn smooth_bernoulli_matches_series() {
        let y = 1.234;
        for w in [
            WeightFunction::boxcar(0.2).unwrap(),
            WeightFunction::triangle(0.3).unwrap(),
            WeightFunction::delta(),
        ] {
            for k in 2..5usize {
                let series: f64 = (1..20000)
                    .map(|j| {
                        let c = Complex64::new(0.0, j as f64).powi(-(k as i32))
                            * Complex64::from_polar(1.0, j as f64 * y);
                        2.0 * c.re * w.transfer(j)
                    })
                    .sum::<f64>()
                    / TAU;
                assert!((series - w.smooth_bernoulli(k, y)).abs() < 1e-8, "{w:?} k={k}");
            }
        }
    }

    #[test]
    fn r1_series_matches_closed_form_away_from_jump() {
        // The tail of Σ sin(jt)/j is bounded by 1/(2πJ sin(t/2)), about
        // 6.4/J at t = 0.05, so 1e-6 needs J of several million.
        let k = BernoulliKernel::new(1, 1 << 23).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let t = rng.gen_range(0.05..TAU - 0.05);
            assert!((k.eval(t).unwrap() - k.closed_form(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn smoothing_is_variation_diminishing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = SpectralGrid::new(512).unwrap();
        for _ in 0..100 {
            let terms: Vec<_> = (0..=6)
                .map(|j| (j, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let f = PeriodicFunction::from_harmonics(&terms);
            let nf = f.count_sign_changes(&grid, 1e-9).unwrap();
            for eps in [0.01, 0.1, 0.5] {
                let sm = SmoothingKernel::new(eps).unwrap().apply(&f);
                assert!(sm.count_sign_changes(&grid, 1e-9).unwrap() <= nf);
            }
        }
    }

    #[test]
    fn smoothing_converges_uniformly() {
        let f = PeriodicFunction::from_harmonics(&[(1, 0.3, -0.2), (4, 0.5, 0.1), (6, -0.7, 0.4)]);
        let grid = SpectralGrid::for_bandwidth(6);
        let mut prev = f64::INFINITY;
        for p in 1..=12 {
            let eps = 0.5f64.powi(p);
            let diff = SmoothingKernel::new(eps).unwrap().apply(&f).add_scaled(&f, -1.0);
            let d = diff.sup_norm(&grid);
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-5);
    }
}
