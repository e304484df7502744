//! Mean and quantile regression functionals of copula models.
//!
//! Whenever the regression or quantile function of a model is a step function
//! or piecewise affine, integrals and level-set masses are computed exactly on
//! its pieces. Continuous families (Marshall–Olkin, Clayton and their flips)
//! go through the covariate midpoint rule.

use alloc::vec::Vec;

use crate::checkerboard::CheckerboardGrid;
use crate::copula::{CopulaModel, CovariateRule, Profile};
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;

const LEVEL_EPS: f64 = 1e-12;

/// Piecewise-constant function on the uniform partition of `[0, 1]` into `N`
/// pieces; value `i` lives on `[i/N, (i+1)/N)` (zero-based, last piece closed).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepFunction1D {
    values: Vec<f64>,
}

impl StepFunction1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("step functions need at least one piece".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("step function values must be finite".into()));
        }
        Ok(Self { values })
    }

    /// Step function taking `f` at the midpoint of each of `n` pieces.
    pub fn from_midpoints<F: FnMut(f64) -> f64>(n: usize, mut f: F) -> Result<Self> {
        Self::new((0..n).map(|i| f((i as f64 + 0.5) / n as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn piece_bounds(&self, i: usize) -> (f64, f64) {
        let n = self.values.len() as f64;
        (i as f64 / n, (i + 1) as f64 / n)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[crate::copula::cell_index(x, self.values.len())]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫_0^t f(u) du`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let n = self.values.len();
        let t = t.clamp(0.0, 1.0);
        let full = libm::floor(t * n as f64) as usize;
        let head: f64 = self.values[..full.min(n)].iter().sum::<f64>() / n as f64;
        if full >= n {
            return head;
        }
        head + self.values[full] * (t - full as f64 / n as f64)
    }

    /// Measure of `{f > v}` (strict) or `{f >= v}`.
    pub fn level_mass(&self, v: f64, strict: bool) -> f64 {
        let hits = self.values.iter().filter(|&&f| if strict { f > v } else { f >= v }).count();
        hits as f64 / self.values.len() as f64
    }
}

/// Values of `a -> μ{x : |r(x) - 1/2| >= a}` on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurvivalCurve {
    thresholds: Vec<f64>,
    masses: Vec<f64>,
}

impl SurvivalCurve {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.thresholds.iter().copied().zip(self.masses.iter().copied())
    }
}

pub fn regression(model: &CopulaModel, x: &[f64], quad: QuadratureSpec) -> f64 {
    model.regression(x, quad)
}

pub fn quantile(model: &CopulaModel, x: &[f64], tau: f64) -> Result<f64> {
    model.quantile(x, tau)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter("norm order p must be finite and >= 1".into()));
    }
    Ok(())
}

/// Regression values on the covariate rule for models without exact structure.
fn regression_nodes(model: &CopulaModel, quad: QuadratureSpec) -> Result<(CovariateRule, Vec<f64>)> {
    let rule = CovariateRule::for_models(&[model], quad)?;
    let values = rule.nodes().map(|(_, x)| model.regression(x, quad)).collect::<Vec<_>>();
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        let point = rule.nodes().nth(pos).map_or(f64::NAN, |(_, x)| x[0]);
        return Err(Error::NonFiniteIntegrand { point, value: values[pos] });
    }
    Ok((rule, values))
}

/// `‖r - 1/2‖_p` over the covariate space.
pub fn lp_deviation(model: &CopulaModel, p: f64, quad: QuadratureSpec) -> Result<f64> {
    check_p(p)?;
    let integral = match model.regression_profile().abs_moment(0.5, p) {
        Some(v) => v,
        None => {
            let (rule, values) = regression_nodes(model, quad)?;
            rule.nodes().zip(&values).map(|((w, _), r)| w * libm::pow((r - 0.5).abs(), p)).sum()
        }
    };
    Ok(libm::pow(integral.max(0.0), 1.0 / p))
}

/// `∫ r dμ`, which equals `1/2` for every copula.
pub fn mean_of_regression(model: &CopulaModel, quad: QuadratureSpec) -> Result<f64> {
    match model.regression_profile().mean() {
        Some(v) => Ok(v),
        None => {
            let (rule, values) = regression_nodes(model, quad)?;
            Ok(rule.nodes().zip(&values).map(|((w, _), r)| w * r).sum())
        }
    }
}

/// Survival curve of `|r - 1/2|`, using `m̄(a) = μ{r >= 1/2 + a} + μ{r <= 1/2 - a}` for `a > 0`.
pub fn survival_mbar(model: &CopulaModel, a_grid: &[f64], quad: QuadratureSpec) -> Result<SurvivalCurve> {
    if a_grid.iter().any(|a| !(0.0..=0.5).contains(a)) || a_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("a-grid must be increasing within [0, 1/2]".into()));
    }
    let profile = model.regression_profile();
    let nodes = match profile {
        Profile::Smooth => Some(regression_nodes(model, quad)?),
        _ => None,
    };
    let mut masses = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let m = if a == 0.0 {
            1.0
        } else if let Some((rule, values)) = &nodes {
            rule.nodes().zip(values).filter(|(_, r)| (*r - 0.5).abs() >= a - LEVEL_EPS).map(|((w, _), _)| w).sum()
        } else {
            let up = profile.upper_mass(0.5 + a, false).unwrap_or(0.0);
            let down = profile.lower_mass(0.5 - a).unwrap_or(0.0);
            up + down
        };
        masses.push(m.clamp(0.0, 1.0));
    }
    Ok(SurvivalCurve { thresholds: a_grid.to_vec(), masses })
}

/// Decreasing rearrangement `u -> sup{v : m(v) > u}` with `m(v) = λ{f > v}`
/// when `strict`, else `m̄(v) = λ{f >= v}`, evaluated at piece midpoints.
pub fn decreasing_rearrangement(f: &StepFunction1D, strict: bool) -> StepFunction1D {
    let mut levels: Vec<f64> = f.values().to_vec();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    // cumulative[k] = λ{f >= levels[k]}
    let cumulative: Vec<f64> = levels.iter().map(|&w| f.level_mass(w, false)).collect();
    let n = f.len();
    let values = (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            if strict {
                // smallest level w with λ{f > w} <= u
                let mut best = levels[0];
                for (k, &w) in levels.iter().enumerate() {
                    let above = if k == 0 { 0.0 } else { cumulative[k - 1] };
                    if above <= u {
                        best = w;
                    }
                }
                best
            } else {
                // largest level w with λ{f >= w} > u
                levels.iter().zip(&cumulative).find(|(_, &m)| m > u).map_or(0.0, |(&w, _)| w)
            }
        })
        .collect();
    StepFunction1D { values }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Precondition("quantile level must lie in (0, 1]".into()));
    }
    Ok(())
}

/// `∫ Q^τ dμ`, integrated directly over the covariates.
pub fn quantile_average(model: &CopulaModel, tau: f64, quad: QuadratureSpec) -> Result<f64> {
    check_tau(tau)?;
    if let Some(v) = model.quantile_profile(tau).mean() {
        return Ok(v);
    }
    let rule = CovariateRule::for_models(&[model], quad)?;
    let mut total = 0.0;
    for (w, x) in rule.nodes() {
        total += w * model.quantile(x, tau)?;
    }
    Ok(total)
}

/// `∫ Q^τ dμ` through the layer-cake form `∫_0^1 μ{x : K(x, [0, q]) < τ} dq`.
pub fn quantile_average_layer_cake(model: &CopulaModel, tau: f64, quad: QuadratureSpec) -> Result<f64> {
    check_tau(tau)?;
    let rule = CovariateRule::for_models(&[model], quad)?;
    Ok(rule.integrate(|x| sublevel_length(|q| model.kernel_cdf(x, q) < tau, quad)))
}

/// Subdivisions applied to the cell where a monotone indicator switches.
const LAYER_REFINE_STEPS: usize = 8;
const LAYER_REFINE_SPLIT: usize = 16;

/// Length of `{q in [0, 1] : below(q)}` for an indicator that is true on an
/// initial interval. Midpoint counting on `quad` nodes, then the one cell
/// holding the switch is refined by repeated subdivision.
fn sublevel_length<F: Fn(f64) -> bool>(below: F, quad: QuadratureSpec) -> f64 {
    let h = quad.weight();
    let count = quad.nodes().take_while(|&q| below(q)).count();
    if count == quad.cells() {
        return 1.0;
    }
    // The switch lies between the last true node and the first false node.
    let mut lo = if count == 0 { 0.0 } else { quad.node(count - 1) };
    let mut width = if count == 0 { 0.5 * h } else { h };
    for _ in 0..LAYER_REFINE_STEPS {
        let step = width / LAYER_REFINE_SPLIT as f64;
        let k = (1..LAYER_REFINE_SPLIT).take_while(|&k| below(lo + k as f64 * step)).count();
        lo += k as f64 * step;
        width = step;
    }
    lo + 0.5 * width
}

/// `∫_0^1 ∫ Q^τ dμ dτ`, which equals `1/2` for every copula.
///
/// The τ-rule is split at levels where the quantile jumps, so each piece is
/// integrated by the midpoint rule on a smooth integrand.
pub fn quantile_average_over_tau(model: &CopulaModel, quad: QuadratureSpec) -> Result<f64> {
    let mut edges = alloc::vec![0.0];
    edges.extend(model.level_breaks().into_iter().filter(|t| *t > 0.0 && *t < 1.0));
    edges.push(1.0);
    edges.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let k = (libm::round((hi - lo) * quad.cells() as f64) as usize).max(1);
        let h = (hi - lo) / k as f64;
        for j in 0..k {
            total += h * quantile_average(model, lo + (j as f64 + 0.5) * h, quad)?;
        }
    }
    Ok(total)
}

fn require_2d(grid: &CheckerboardGrid) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::Precondition("step-function output needs a 2-d grid".into()));
    }
    Ok(())
}

/// Regression function of a bivariate checkerboard copula.
pub fn grid_regression(grid: &CheckerboardGrid) -> Result<StepFunction1D> {
    require_2d(grid)?;
    StepFunction1D::new(grid.strip_regressions())
}

/// `τ`-quantile function of a bivariate checkerboard copula.
pub fn grid_quantile(grid: &CheckerboardGrid, tau: f64) -> Result<StepFunction1D> {
    require_2d(grid)?;
    check_tau(tau)?;
    StepFunction1D::new(grid.strip_quantiles(tau))
}
