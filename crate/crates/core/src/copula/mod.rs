//! Parametric copulas represented through their conditional Markov kernels.
//!
//! A model is described by the right-continuous conditional distribution
//! function `y -> K(x, [0, y])` of the response given the covariates. Atoms
//! (Marshall–Olkin, completely dependent copulas, the quantile-bound kernels)
//! live implicitly in the jumps of that function. Covariates are always
//! independent uniforms, so the covariate measure is Lebesgue measure on
//! `[0, 1]` or `[0, 1]^2`.

pub mod family;
mod piecewise;
mod profile;
mod rule;

use alloc::boxed::Box;
use alloc::vec::Vec;

pub use piecewise::{AffinePiece, PiecewiseMap};
pub(crate) use profile::{LinearPiece, Profile, WeightedValue};
pub use rule::{CovariateNode, CovariateRule};

use crate::checkerboard::CheckerboardGrid;
use crate::error::{Error, Result};
use crate::numerics::{integrate_1d, invert_monotone, QuadratureSpec, RngStream, DEFAULT_INVERSION_TOL};

/// Analytic families are evaluated at `clamp(x, EPS, 1 - EPS)` on the
/// null set `x in {0, 1}` where their closed forms break down.
pub const BOUNDARY_EPS: f64 = 1e-12;

fn interior(x: f64) -> f64 {
    x.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS)
}

fn pow(x: f64, e: f64) -> f64 {
    libm::pow(x, e)
}

/// Zero-based index of the half-open cell `[(i)/n, (i+1)/n)` containing `x`;
/// the last cell is closed.
pub(crate) fn cell_index(x: f64, n: usize) -> usize {
    if x.is_nan() || x <= 0.0 {
        return 0;
    }
    let i = libm::floor(x * n as f64);
    if i >= n as f64 {
        n - 1
    } else {
        i as usize
    }
}

fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

/// Which of the two extremal kernels from the quantile-average bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundMode {
    /// Attains the lower bound `tau / 2`.
    Lower,
    /// Approaches the upper bound `(tau + 1) / 2` as `n` grows.
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CopulaModel {
    /// Independence copula with `covariate_dim` covariates (1 or 2).
    Product {
        covariate_dim: usize,
    },
    /// Upper Fréchet bound `M`.
    Comonotone,
    /// Completely dependent copula `C_h`.
    CompletelyDependent(PiecewiseMap),
    /// Checkerboard with density `N` on the cells `I_i x I_sigma(i)`; `sigma` is 1-based.
    CheckerboardPermutation {
        sigma: Vec<usize>,
    },
    /// Ordinal sum of `Π` on `(0, b)`, `(b, 1 - b)`, `(1 - b, 1)`.
    OrdinalSumPi {
        b: f64,
    },
    /// Three-dimensional cube copula with mass on four sub-cubes.
    Cube3D,
    MarshallOlkin {
        alpha: f64,
        beta: f64,
    },
    Clayton {
        theta: f64,
    },
    /// Two-atom kernel `t 1_E(t x) + (1 - t) 1_E(t + (1 - t) x)`.
    QuantileBoundKernel {
        tau: f64,
        n: u64,
        mode: BoundMode,
    },
    Grid(CheckerboardGrid),
    /// Flip in the response coordinate.
    Flipped(Box<CopulaModel>),
}

/// One observation: covariates followed by the response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    coords: [f64; 3],
    len: usize,
}

impl SamplePoint {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&coords.len()) {
            return Err(Error::InvalidParameter("sample points have 2 or 3 coordinates".into()));
        }
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParameter("sample coordinates must lie in [0, 1]".into()));
        }
        let mut buf = [0.0; 3];
        buf[..coords.len()].copy_from_slice(coords);
        Ok(Self { coords: buf, len: coords.len() })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.len]
    }

    pub fn covariates(&self) -> &[f64] {
        &self.coords[..self.len - 1]
    }

    pub fn response(&self) -> f64 {
        self.coords[self.len - 1]
    }
}

impl CopulaModel {
    pub fn product() -> Self {
        CopulaModel::Product { covariate_dim: 1 }
    }

    pub fn product_with_covariates(covariate_dim: usize) -> Result<Self> {
        if !(1..=2).contains(&covariate_dim) {
            return Err(Error::InvalidParameter("product copula supports 1 or 2 covariates".into()));
        }
        Ok(CopulaModel::Product { covariate_dim })
    }

    pub fn comonotone() -> Self {
        CopulaModel::Comonotone
    }

    pub fn completely_dependent(h: PiecewiseMap) -> Self {
        CopulaModel::CompletelyDependent(h)
    }

    pub fn checkerboard_permutation(sigma: Vec<usize>) -> Result<Self> {
        let m = sigma.len();
        if m < 2 {
            return Err(Error::InvalidParameter("permutation checkerboards need N >= 2".into()));
        }
        let mut seen = alloc::vec![false; m];
        for &s in &sigma {
            if s == 0 || s > m || seen[s - 1] {
                return Err(Error::InvalidParameter("sigma must be a permutation of 1..N".into()));
            }
            seen[s - 1] = true;
        }
        Ok(CopulaModel::CheckerboardPermutation { sigma })
    }

    pub fn ordinal_sum(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 0.5) {
            return Err(Error::InvalidParameter("ordinal sum needs b in (0, 1/2)".into()));
        }
        Ok(CopulaModel::OrdinalSumPi { b })
    }

    pub fn cube() -> Self {
        CopulaModel::Cube3D
    }

    /// Marshall–Olkin copula; the kernel is a distribution function only for
    /// `alpha, beta` in `(0, 1]`.
    pub fn marshall_olkin(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter("Marshall-Olkin parameters must lie in (0, 1]".into()));
        }
        Ok(CopulaModel::MarshallOlkin { alpha, beta })
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter("Clayton needs theta > 0".into()));
        }
        Ok(CopulaModel::Clayton { theta })
    }

    pub fn quantile_bound(tau: f64, n: u64, mode: BoundMode) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) || n == 0 {
            return Err(Error::InvalidParameter("quantile-bound kernel needs tau in (0,1), n >= 1".into()));
        }
        let model = CopulaModel::QuantileBoundKernel { tau, n, mode };
        let t = model.atom_weight();
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter("tau - 1/n must lie in (0, 1)".into()));
        }
        Ok(model)
    }

    pub fn grid(grid: CheckerboardGrid) -> Self {
        CopulaModel::Grid(grid)
    }

    fn atom_weight(&self) -> f64 {
        match *self {
            CopulaModel::QuantileBoundKernel { tau, n, mode } => match mode {
                BoundMode::Lower => tau,
                BoundMode::Upper => tau - 1.0 / n as f64,
            },
            _ => 0.0,
        }
    }

    fn segment(b: f64, x: f64) -> (f64, f64) {
        if x < b {
            (0.0, b)
        } else if x < 1.0 - b {
            (b, 1.0 - b)
        } else {
            (1.0 - b, 1.0)
        }
    }

    fn cube_lower_half(x: &[f64]) -> bool {
        (x[0] < 0.5) == (x[1] < 0.5)
    }

    pub fn covariate_dim(&self) -> usize {
        match self {
            CopulaModel::Product { covariate_dim } => *covariate_dim,
            CopulaModel::Cube3D => 2,
            CopulaModel::Grid(g) => g.dim() - 1,
            CopulaModel::Flipped(inner) => inner.covariate_dim(),
            _ => 1,
        }
    }

    /// Dimension of the copula (covariates plus response).
    pub fn dim(&self) -> usize {
        self.covariate_dim() + 1
    }

    /// Conditional distribution function `K(x, [0, y])`.
    pub fn kernel_cdf(&self, x: &[f64], y: f64) -> f64 {
        debug_assert!(x.len() >= self.covariate_dim());
        if y < 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        match self {
            CopulaModel::Product { .. } => y,
            CopulaModel::Comonotone => f64::from(u8::from(y >= x[0])),
            CopulaModel::CompletelyDependent(h) => f64::from(u8::from(h.eval(x[0]) <= y)),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len();
                let j = sigma[cell_index(x[0], m)] as f64;
                (m as f64 * y - (j - 1.0)).clamp(0.0, 1.0)
            }
            CopulaModel::OrdinalSumPi { b } => {
                let (lo, hi) = Self::segment(*b, x[0]);
                ((y - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
            CopulaModel::Cube3D => {
                if Self::cube_lower_half(x) {
                    (2.0 * y).clamp(0.0, 1.0)
                } else {
                    (2.0 * y - 1.0).clamp(0.0, 1.0)
                }
            }
            CopulaModel::MarshallOlkin { alpha, beta } => {
                let xi = interior(x[0]);
                let a = pow(xi, alpha / beta);
                if y < a {
                    (1.0 - alpha) * pow(xi, -alpha) * y
                } else {
                    pow(y, 1.0 - beta)
                }
            }
            CopulaModel::Clayton { theta } => {
                if y <= 0.0 {
                    return 0.0;
                }
                let xi = interior(x[0]);
                let inner = 1.0 + pow(xi, *theta) * (pow(y, -theta) - 1.0);
                pow(inner, -(1.0 + theta) / theta)
            }
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                let low = f64::from(u8::from(t * x[0] <= y));
                let high = f64::from(u8::from(t + (1.0 - t) * x[0] <= y));
                t * low + (1.0 - t) * high
            }
            CopulaModel::Grid(g) => g.kernel_cdf(x, y),
            CopulaModel::Flipped(inner) => 1.0 - inner.kernel_cdf_left(x, 1.0 - y),
        }
    }

    /// Left limit `K(x, [0, y))`.
    pub fn kernel_cdf_left(&self, x: &[f64], y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y > 1.0 {
            return 1.0;
        }
        match self {
            CopulaModel::Comonotone => f64::from(u8::from(y > x[0])),
            CopulaModel::CompletelyDependent(h) => f64::from(u8::from(h.eval(x[0]) < y)),
            CopulaModel::MarshallOlkin { alpha, beta } => {
                let xi = interior(x[0]);
                let a = pow(xi, alpha / beta);
                if y <= a {
                    (1.0 - alpha) * pow(xi, -alpha) * y
                } else {
                    pow(y, 1.0 - beta)
                }
            }
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                let low = f64::from(u8::from(t * x[0] < y));
                let high = f64::from(u8::from(t + (1.0 - t) * x[0] < y));
                t * low + (1.0 - t) * high
            }
            CopulaModel::Flipped(inner) => 1.0 - inner.kernel_cdf(x, 1.0 - y),
            // continuous in y
            _ => {
                if y >= 1.0 {
                    1.0
                } else {
                    self.kernel_cdf(x, y)
                }
            }
        }
    }

    /// Copula distribution function `C(u)`, `u = (x_1, .., x_{d-1}, y)`.
    pub fn copula_cdf(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim());
        let mut v = [0.0_f64; 3];
        for (dst, src) in v.iter_mut().zip(u) {
            *dst = src.clamp(0.0, 1.0);
        }
        let d = self.dim();
        let (x, y) = (v[0], v[d - 1]);
        match self {
            CopulaModel::Product { .. } => v[..d].iter().product(),
            CopulaModel::Comonotone => x.min(y),
            CopulaModel::CompletelyDependent(h) => h.joint_measure(x, y),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len() as f64;
                sigma
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| {
                        let ox = overlap(0.0, x, i as f64 / m, (i + 1) as f64 / m);
                        let oy = overlap(0.0, y, (s - 1) as f64 / m, s as f64 / m);
                        m * ox * oy
                    })
                    .sum()
            }
            CopulaModel::OrdinalSumPi { b } => [(0.0, *b), (*b, 1.0 - b), (1.0 - b, 1.0)]
                .iter()
                .map(|&(lo, hi)| overlap(0.0, x, lo, hi) * overlap(0.0, y, lo, hi) / (hi - lo))
                .sum(),
            CopulaModel::Cube3D => {
                // (x1 half, x2 half, y half) for each occupied sub-cube
                const CUBES: [[usize; 3]; 4] = [[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]];
                CUBES
                    .iter()
                    .map(|c| {
                        2.0 * (0..3)
                            .map(|k| overlap(0.0, v[k], 0.5 * c[k] as f64, 0.5 * (c[k] + 1) as f64))
                            .product::<f64>()
                    })
                    .sum()
            }
            CopulaModel::MarshallOlkin { alpha, beta } => (pow(x, 1.0 - alpha) * y).min(x * pow(y, 1.0 - beta)),
            CopulaModel::Clayton { theta } => {
                if x <= 0.0 || y <= 0.0 {
                    0.0
                } else {
                    pow(pow(x, -theta) + pow(y, -theta) - 1.0, -1.0 / theta)
                }
            }
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                let low = (y / t).clamp(0.0, x);
                let high = ((y - t) / (1.0 - t)).clamp(0.0, x);
                t * low + (1.0 - t) * high
            }
            CopulaModel::Grid(g) => g.copula_cdf(&v[..d]),
            CopulaModel::Flipped(inner) => {
                let cov: f64 = v[..d - 1].iter().product();
                let mut w = v;
                w[d - 1] = 1.0 - y;
                cov - inner.copula_cdf(&w[..d])
            }
        }
    }

    /// Copula of `(X, 1 - Y)`.
    pub fn flip(&self) -> Self {
        match self {
            CopulaModel::Product { .. } => self.clone(),
            CopulaModel::Comonotone => CopulaModel::CompletelyDependent(PiecewiseMap::reflection()),
            CopulaModel::CompletelyDependent(h) if h.is_reflection() => CopulaModel::Comonotone,
            CopulaModel::CompletelyDependent(h) => CopulaModel::CompletelyDependent(h.reflected()),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len();
                CopulaModel::CheckerboardPermutation { sigma: sigma.iter().map(|s| m + 1 - s).collect() }
            }
            CopulaModel::Grid(g) => CopulaModel::Grid(g.flipped()),
            CopulaModel::Flipped(inner) => (**inner).clone(),
            _ => CopulaModel::Flipped(Box::new(self.clone())),
        }
    }

    /// Mean regression `r(x) = ∫ K(x, (y, 1]) dy`.
    ///
    /// Closed forms are used wherever available; Clayton falls back to the
    /// midpoint rule on the survival form.
    pub fn regression(&self, x: &[f64], quad: QuadratureSpec) -> f64 {
        match self {
            CopulaModel::Product { .. } => 0.5,
            CopulaModel::Comonotone => x[0],
            CopulaModel::CompletelyDependent(h) => h.eval(x[0]),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len();
                (sigma[cell_index(x[0], m)] as f64 - 0.5) / m as f64
            }
            CopulaModel::OrdinalSumPi { b } => {
                let (lo, hi) = Self::segment(*b, x[0]);
                0.5 * (lo + hi)
            }
            CopulaModel::Cube3D => {
                if Self::cube_lower_half(x) {
                    0.25
                } else {
                    0.75
                }
            }
            CopulaModel::MarshallOlkin { alpha, beta } => {
                let xi = interior(x[0]);
                let e = pow(xi, alpha * (2.0 / beta - 1.0));
                1.0 - 0.5 * (1.0 - alpha) * e - (1.0 - e) / (2.0 - beta)
            }
            CopulaModel::Clayton { .. } => integrate_1d(|y| 1.0 - self.kernel_cdf(x, y), quad).unwrap_or(f64::NAN),
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                t * (t * x[0]) + (1.0 - t) * (t + (1.0 - t) * x[0])
            }
            CopulaModel::Grid(g) => g.regression_at(x),
            CopulaModel::Flipped(inner) => 1.0 - inner.regression(x, quad),
        }
    }

    /// Conditional `tau`-quantile `inf { y : K(x, [0, y]) >= tau }`, `tau` in `(0, 1]`.
    pub fn quantile(&self, x: &[f64], tau: f64) -> Result<f64> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Precondition("quantile level must lie in (0, 1]".into()));
        }
        let q = match self {
            CopulaModel::Product { .. } => tau,
            CopulaModel::Comonotone => x[0],
            CopulaModel::CompletelyDependent(h) => h.eval(x[0]),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len();
                (sigma[cell_index(x[0], m)] as f64 - 1.0 + tau) / m as f64
            }
            CopulaModel::OrdinalSumPi { b } => {
                let (lo, hi) = Self::segment(*b, x[0]);
                lo + tau * (hi - lo)
            }
            CopulaModel::Cube3D => {
                if Self::cube_lower_half(x) {
                    0.5 * tau
                } else {
                    0.5 * (tau + 1.0)
                }
            }
            CopulaModel::MarshallOlkin { alpha, beta } => {
                let xi = interior(x[0]);
                let upper = pow(xi, alpha * (1.0 / beta - 1.0));
                let lower = (1.0 - alpha) * upper;
                if tau < lower {
                    tau * pow(xi, *alpha) / (1.0 - alpha)
                } else if tau <= upper {
                    pow(xi, alpha / beta)
                } else {
                    pow(tau, 1.0 / (1.0 - beta))
                }
            }
            CopulaModel::Clayton { theta } => {
                let xi = interior(x[0]);
                let w = pow(tau, -theta / (theta + 1.0)) - 1.0;
                pow(1.0 + pow(xi, -theta) * w, -1.0 / theta)
            }
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                if tau <= t {
                    t * x[0]
                } else {
                    t + (1.0 - t) * x[0]
                }
            }
            CopulaModel::Grid(g) => g.quantile_at(x, tau),
            CopulaModel::Flipped(inner) => match inner.upper_quantile(x, 1.0 - tau) {
                Some(q) => 1.0 - q,
                None => invert_monotone(|y| self.kernel_cdf(x, y), tau, DEFAULT_INVERSION_TOL)?,
            },
        };
        Ok(q)
    }

    /// `inf { y : K(x, [0, y]) > s }` for `s` in `(0, 1)`, where known in closed form.
    fn upper_quantile(&self, x: &[f64], s: f64) -> Option<f64> {
        if !(s > 0.0 && s < 1.0) {
            return None;
        }
        match self {
            // strictly increasing on their support
            CopulaModel::OrdinalSumPi { .. }
            | CopulaModel::Cube3D
            | CopulaModel::MarshallOlkin { .. }
            | CopulaModel::Clayton { .. } => self.quantile(x, s).ok(),
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                Some(if s < t { t * x[0] } else { t + (1.0 - t) * x[0] })
            }
            _ => None,
        }
    }

    /// Draws `n` points: uniform covariates, response by conditional inversion.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<SamplePoint> {
        let d = self.covariate_dim();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut coords = [0.0; 3];
            for c in coords.iter_mut().take(d) {
                *c = rng.uniform();
            }
            let t = rng.uniform_open_closed();
            coords[d] = self.quantile(&coords[..d], t).expect("t lies in (0, 1]").clamp(0.0, 1.0);
            out.push(SamplePoint { coords, len: d + 1 });
        }
        out
    }

    /// Breakpoints per covariate axis between which the kernel does not depend
    /// on the covariates; `None` when it varies continuously.
    pub(crate) fn covariate_breaks(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            CopulaModel::Product { covariate_dim } => Some(alloc::vec![Vec::new(); *covariate_dim]),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len();
                Some(alloc::vec![(1..m).map(|i| i as f64 / m as f64).collect()])
            }
            CopulaModel::OrdinalSumPi { b } => Some(alloc::vec![alloc::vec![*b, 1.0 - b]]),
            CopulaModel::Cube3D => Some(alloc::vec![alloc::vec![0.5], alloc::vec![0.5]]),
            CopulaModel::Grid(g) => {
                let m = g.resolution();
                let axis: Vec<f64> = (1..m).map(|i| i as f64 / m as f64).collect();
                Some(alloc::vec![axis; g.dim() - 1])
            }
            CopulaModel::Flipped(inner) => inner.covariate_breaks(),
            _ => None,
        }
    }

    /// Quantile levels where `tau -> Q^tau(x)` jumps for a set of `x` of
    /// positive measure.
    pub(crate) fn level_breaks(&self) -> Vec<f64> {
        match self {
            CopulaModel::QuantileBoundKernel { .. } => alloc::vec![self.atom_weight()],
            CopulaModel::Flipped(inner) => inner.level_breaks().into_iter().map(|t| 1.0 - t).collect(),
            _ => Vec::new(),
        }
    }

    /// Covariate points where `x -> K(x, [0, y])` jumps or kinks away from
    /// [`Self::covariate_breaks`]. Only one-dimensional covariates have any.
    pub(crate) fn kernel_jumps(&self, y: f64) -> Vec<f64> {
        match self {
            CopulaModel::Comonotone => alloc::vec![y],
            CopulaModel::CompletelyDependent(h) => {
                h.pieces().iter().map(|p| if p.increasing { y - p.offset } else { p.offset - y }).collect()
            }
            CopulaModel::MarshallOlkin { alpha, beta } if y > 0.0 => alloc::vec![pow(y, beta / alpha)],
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                let mut v = alloc::vec![(y - t) / (1.0 - t)];
                if t > 0.0 {
                    v.push(y / t);
                }
                v
            }
            CopulaModel::Flipped(inner) => inner.kernel_jumps(1.0 - y),
            _ => Vec::new(),
        }
    }

    /// Shape of the regression function over the covariate space.
    pub(crate) fn regression_profile(&self) -> Profile {
        match self {
            CopulaModel::Product { .. } => Profile::Cells(alloc::vec![WeightedValue::new(1.0, 0.5)]),
            CopulaModel::Comonotone => Profile::Linear(alloc::vec![LinearPiece::new(0.0, 1.0, 1.0, 0.0)]),
            CopulaModel::CompletelyDependent(h) => Profile::from_map(h),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len() as f64;
                Profile::Cells(sigma.iter().map(|&s| WeightedValue::new(1.0 / m, (s as f64 - 0.5) / m)).collect())
            }
            CopulaModel::OrdinalSumPi { b } => Profile::Cells(alloc::vec![
                WeightedValue::new(*b, 0.5 * b),
                WeightedValue::new(1.0 - 2.0 * b, 0.5),
                WeightedValue::new(*b, 1.0 - 0.5 * b),
            ]),
            CopulaModel::Cube3D => {
                Profile::Cells(alloc::vec![WeightedValue::new(0.5, 0.25), WeightedValue::new(0.5, 0.75),])
            }
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                let slope = t * t + (1.0 - t) * (1.0 - t);
                Profile::Linear(alloc::vec![LinearPiece::new(0.0, 1.0, slope, t * (1.0 - t))])
            }
            CopulaModel::Grid(g) => {
                let w = g.strip_weight();
                Profile::Cells(g.strip_regressions().into_iter().map(|v| WeightedValue::new(w, v)).collect())
            }
            CopulaModel::Flipped(inner) => inner.regression_profile().reflect(),
            CopulaModel::MarshallOlkin { .. } | CopulaModel::Clayton { .. } => Profile::Smooth,
        }
    }

    /// Shape of the `tau`-quantile function over the covariate space.
    pub(crate) fn quantile_profile(&self, tau: f64) -> Profile {
        match self {
            CopulaModel::Product { .. } => Profile::Cells(alloc::vec![WeightedValue::new(1.0, tau)]),
            CopulaModel::Comonotone => Profile::Linear(alloc::vec![LinearPiece::new(0.0, 1.0, 1.0, 0.0)]),
            CopulaModel::CompletelyDependent(h) => Profile::from_map(h),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let m = sigma.len() as f64;
                Profile::Cells(sigma.iter().map(|&s| WeightedValue::new(1.0 / m, (s as f64 - 1.0 + tau) / m)).collect())
            }
            CopulaModel::OrdinalSumPi { b } => Profile::Cells(
                [(0.0, *b), (*b, 1.0 - b), (1.0 - b, 1.0)]
                    .iter()
                    .map(|&(lo, hi)| WeightedValue::new(hi - lo, lo + tau * (hi - lo)))
                    .collect(),
            ),
            CopulaModel::Cube3D => Profile::Cells(alloc::vec![
                WeightedValue::new(0.5, 0.5 * tau),
                WeightedValue::new(0.5, 0.5 * (tau + 1.0)),
            ]),
            CopulaModel::QuantileBoundKernel { .. } => {
                let t = self.atom_weight();
                let piece =
                    if tau <= t { LinearPiece::new(0.0, 1.0, t, 0.0) } else { LinearPiece::new(0.0, 1.0, 1.0 - t, t) };
                Profile::Linear(alloc::vec![piece])
            }
            CopulaModel::Grid(g) => {
                let w = g.strip_weight();
                Profile::Cells(g.strip_quantiles(tau).into_iter().map(|v| WeightedValue::new(w, v)).collect())
            }
            CopulaModel::MarshallOlkin { .. } | CopulaModel::Clayton { .. } | CopulaModel::Flipped(_) => {
                Profile::Smooth
            }
        }
    }
}
