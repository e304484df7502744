//! Distances between conditional laws and a report of the sharp inequalities
//! they satisfy.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::copula::{CopulaModel, CovariateRule};
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::regression::{lp_deviation, quantile_average, survival_mbar};

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter("norm order p must be finite and >= 1".into()));
    }
    Ok(())
}

fn check_pair(c1: &CopulaModel, c2: &CopulaModel) -> Result<()> {
    if c1.covariate_dim() != c2.covariate_dim() {
        return Err(Error::DimensionMismatch { expected: c1.covariate_dim(), found: c2.covariate_dim() });
    }
    Ok(())
}

fn pair_rule(c1: &CopulaModel, c2: &CopulaModel, quad: QuadratureSpec) -> Result<CovariateRule> {
    check_pair(c1, c2)?;
    CovariateRule::for_models(&[c1, c2], quad)
}

fn phi_on(c1: &CopulaModel, c2: &CopulaModel, y: f64, p: f64, quad: QuadratureSpec) -> Result<f64> {
    let rule = CovariateRule::for_kernels_at(&[c1, c2], y, quad)?;
    Ok(rule.integrate(|x| libm::pow((c1.kernel_cdf(x, y) - c2.kernel_cdf(x, y)).abs(), p)))
}

/// `Φ(y) = ∫ |K_1(x, [0, y]) - K_2(x, [0, y])|^p dμ(x)`.
pub fn phi(c1: &CopulaModel, c2: &CopulaModel, y: f64, p: f64, quad: QuadratureSpec) -> Result<f64> {
    check_p(p)?;
    check_pair(c1, c2)?;
    phi_on(c1, c2, y, p, quad)
}

/// `D_p(C_1, C_2) = (∫_0^1 Φ(y) dy)^(1/p)`.
pub fn d_metric(c1: &CopulaModel, c2: &CopulaModel, p: f64, quad: QuadratureSpec) -> Result<f64> {
    check_p(p)?;
    check_pair(c1, c2)?;
    let mut total = 0.0;
    for y in quad.nodes() {
        total += phi_on(c1, c2, y, p, quad)?;
    }
    total *= quad.weight();
    Ok(libm::pow(total, 1.0 / p))
}

/// `‖r_1 - r_2‖_p` over the covariate space.
pub fn regression_distance(c1: &CopulaModel, c2: &CopulaModel, p: f64, quad: QuadratureSpec) -> Result<f64> {
    check_p(p)?;
    let rule = pair_rule(c1, c2, quad)?;
    let total = rule.integrate(|x| libm::pow((c1.regression(x, quad) - c2.regression(x, quad)).abs(), p));
    Ok(libm::pow(total, 1.0 / p))
}

/// `‖Q^τ_1 - Q^τ_2‖_1` over the covariate space.
pub fn quantile_distance(c1: &CopulaModel, c2: &CopulaModel, tau: f64, quad: QuadratureSpec) -> Result<f64> {
    let rule = pair_rule(c1, c2, quad)?;
    let mut total = 0.0;
    for (w, x) in rule.nodes() {
        total += w * (c1.quantile(x, tau)? - c2.quantile(x, tau)?).abs();
    }
    Ok(total)
}

/// `(D_1(C_1, C_2), ∫_0^1 ‖Q^τ_1 - Q^τ_2‖_1 dτ)` on matching grids.
pub fn quantile_metric_identity(c1: &CopulaModel, c2: &CopulaModel, quad: QuadratureSpec) -> Result<(f64, f64)> {
    let lhs = d_metric(c1, c2, 1.0, quad)?;
    let mut rhs = 0.0;
    for tau in quad.nodes() {
        rhs += quantile_distance(c1, c2, tau, quad)?;
    }
    Ok((lhs, rhs * quad.weight()))
}

/// Inequalities that can be checked by [`verify_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundTag {
    /// `‖r - 1/2‖_p <= (p + 1)^(-1/p) / 2`.
    MeanLp,
    /// `m̄(a) <= min{1, 2 - 4a}`.
    Mbar,
    /// `τ/2 <= ∫ Q^τ dμ <= (τ + 1)/2`.
    QuantileAvg,
    /// `Φ(y) <= 2 min{y, 1 - y}`.
    Phi,
    /// `‖r_1 - r_2‖_p <= D_p`.
    RegressionVsMetric,
    /// `D_p <= 2^(-1/p)`.
    Diameter,
    /// `‖r_1 - r_2‖_p <= (p + 1)^(-1/p)`.
    RegressionDistance,
    /// `D_1 = ∫ ‖Q^τ_1 - Q^τ_2‖_1 dτ <= 1/2`.
    QuantileMetric,
}

impl BoundTag {
    pub const ALL: [BoundTag; 8] = [
        BoundTag::MeanLp,
        BoundTag::Mbar,
        BoundTag::QuantileAvg,
        BoundTag::Phi,
        BoundTag::RegressionVsMetric,
        BoundTag::Diameter,
        BoundTag::RegressionDistance,
        BoundTag::QuantileMetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundTag::MeanLp => "mean_lp",
            BoundTag::Mbar => "mbar",
            BoundTag::QuantileAvg => "quantile_avg",
            BoundTag::Phi => "phi",
            BoundTag::RegressionVsMetric => "regression_vs_metric",
            BoundTag::Diameter => "diameter",
            BoundTag::RegressionDistance => "regression_distance",
            BoundTag::QuantileMetric => "quantile_metric",
        }
    }

    /// Whether the check compares two models.
    pub fn is_pairwise(self) -> bool {
        !matches!(self, BoundTag::MeanLp | BoundTag::Mbar | BoundTag::QuantileAvg)
    }

    pub fn tolerance(self) -> f64 {
        match self {
            BoundTag::Mbar => 1e-9,
            BoundTag::QuantileMetric => 2e-3,
            _ => 1e-6,
        }
    }
}

impl fmt::Display for BoundTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundTag::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| Error::UnknownTag(s.into()))
    }
}

/// Parameter grids for [`verify_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub p_list: Vec<f64>,
    pub a_grid: Vec<f64>,
    pub tau_list: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub quad: QuadratureSpec,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            p_list: alloc::vec![1.0, 1.5, 2.0, 3.0],
            a_grid: (0..=10).map(|k| k as f64 * 0.05).collect(),
            tau_list: (1..=9).map(|k| k as f64 / 10.0).collect(),
            y_grid: (0..=100).map(|k| k as f64 / 100.0).collect(),
            quad: QuadratureSpec::default(),
        }
    }
}

/// One evaluated inequality. `pass` holds exactly when `slack >= -tolerance`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundCheck {
    pub tag: BoundTag,
    pub params: BTreeMap<String, f64>,
    /// `<=`, `>=` or `≈`.
    pub relation: String,
    pub computed: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub model: String,
    pub checks: Vec<BoundCheck>,
    pub tolerances: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Models a report is computed for.
#[derive(Debug, Clone, Copy)]
pub enum BoundTarget<'a> {
    Single(&'a CopulaModel),
    Pair(&'a CopulaModel, &'a CopulaModel),
}

struct Builder {
    checks: Vec<BoundCheck>,
}

impl Builder {
    fn push(&mut self, tag: BoundTag, params: &[(&str, f64)], relation: &str, computed: f64, bound: f64) {
        let slack = match relation {
            "<=" => bound - computed,
            ">=" => computed - bound,
            _ => -(computed - bound).abs(),
        };
        self.checks.push(BoundCheck {
            tag,
            params: params.iter().map(|(k, v)| (String::from(*k), *v)).collect(),
            relation: relation.into(),
            computed,
            bound,
            slack,
            pass: slack >= -tag.tolerance(),
        });
    }
}

fn single_checks(b: &mut Builder, tag: BoundTag, m: &CopulaModel, params: &BoundParams) -> Result<()> {
    let quad = params.quad;
    match tag {
        BoundTag::MeanLp => {
            for &p in &params.p_list {
                let bound = 0.5 * libm::pow(p + 1.0, -1.0 / p);
                b.push(tag, &[("p", p)], "<=", lp_deviation(m, p, quad)?, bound);
            }
        }
        BoundTag::Mbar => {
            let curve = survival_mbar(m, &params.a_grid, quad)?;
            for (a, mass) in curve.iter() {
                b.push(tag, &[("a", a)], "<=", mass, (2.0 - 4.0 * a).min(1.0));
            }
        }
        BoundTag::QuantileAvg => {
            for &tau in &params.tau_list {
                let avg = quantile_average(m, tau, quad)?;
                b.push(tag, &[("tau", tau)], ">=", avg, 0.5 * tau);
                b.push(tag, &[("tau", tau)], "<=", avg, 0.5 * (tau + 1.0));
            }
        }
        _ => unreachable!("pairwise tag"),
    }
    Ok(())
}

fn pair_checks(b: &mut Builder, tag: BoundTag, c1: &CopulaModel, c2: &CopulaModel, params: &BoundParams) -> Result<()> {
    let quad = params.quad;
    match tag {
        BoundTag::Phi => {
            for &p in &params.p_list {
                for &y in &params.y_grid {
                    b.push(tag, &[("p", p), ("y", y)], "<=", phi(c1, c2, y, p, quad)?, 2.0 * y.min(1.0 - y));
                }
            }
        }
        BoundTag::RegressionVsMetric => {
            for &p in &params.p_list {
                let d = d_metric(c1, c2, p, quad)?;
                b.push(tag, &[("p", p)], "<=", regression_distance(c1, c2, p, quad)?, d);
            }
        }
        BoundTag::Diameter => {
            for &p in &params.p_list {
                b.push(tag, &[("p", p)], "<=", d_metric(c1, c2, p, quad)?, libm::pow(2.0, -1.0 / p));
            }
        }
        BoundTag::RegressionDistance => {
            for &p in &params.p_list {
                let bound = libm::pow(p + 1.0, -1.0 / p);
                b.push(tag, &[("p", p)], "<=", regression_distance(c1, c2, p, quad)?, bound);
            }
        }
        BoundTag::QuantileMetric => {
            let (lhs, rhs) = quantile_metric_identity(c1, c2, quad)?;
            b.push(tag, &[], "≈", lhs, rhs);
            b.push(tag, &[], "<=", lhs.max(rhs), 0.5);
        }
        _ => unreachable!("single-model tag"),
    }
    Ok(())
}

/// Evaluates the requested inequalities; violations are reported, not raised.
pub fn verify_bounds(target: BoundTarget<'_>, tags: &[BoundTag], params: &BoundParams) -> Result<BoundReport> {
    let mut tags = tags.to_vec();
    tags.sort();
    tags.dedup();
    let mut b = Builder { checks: Vec::new() };
    let model = match target {
        BoundTarget::Single(m) => m.to_string(),
        BoundTarget::Pair(c1, c2) => alloc::format!("{c1} | {c2}"),
    };
    for &tag in &tags {
        match (target, tag.is_pairwise()) {
            (BoundTarget::Single(m), false) => single_checks(&mut b, tag, m, params)?,
            (BoundTarget::Pair(c1, c2), true) => pair_checks(&mut b, tag, c1, c2, params)?,
            (BoundTarget::Single(_), true) => {
                return Err(Error::Precondition(alloc::format!("`{tag}` compares two models")))
            }
            (BoundTarget::Pair(..), false) => {
                return Err(Error::Precondition(alloc::format!("`{tag}` applies to a single model")))
            }
        }
    }
    let tolerances = tags.iter().map(|t| (t.name().to_string(), t.tolerance())).collect();
    Ok(BoundReport { model, checks: b.checks, tolerances })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn phi_examples() {
        let m = CopulaModel::comonotone();
        let w = m.flip();
        assert_eq!(phi(&m, &m, 0.4, 1.0, q()).unwrap(), 0.0);
        assert_eq!(phi(&m, &w, 0.0, 1.0, q()).unwrap(), 0.0);
        assert_eq!(phi(&m, &w, 1.0, 2.0, q()).unwrap(), 0.0);
        assert!((phi(&m, &w, 0.3, 1.0, q()).unwrap() - 0.6).abs() < 1e-3);
        assert!(phi(&m, &CopulaModel::cube(), 0.3, 1.0, q()).is_err());
    }

    #[test]
    fn diameter_pair() {
        let m = CopulaModel::comonotone();
        assert!((d_metric(&m, &m.flip(), 1.0, q()).unwrap() - 0.5).abs() < 1e-5);
        assert!((regression_distance(&m, &m.flip(), 1.0, q()).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn cube_against_product() {
        let cube = CopulaModel::cube();
        let pi3 = CopulaModel::product_with_covariates(2).unwrap();
        assert!((d_metric(&cube, &pi3, 1.0, q()).unwrap() - 0.25).abs() < 1e-5);
        assert_eq!(regression_distance(&cube, &pi3, 1.0, q()).unwrap(), 0.25);
        let (lhs, rhs) = quantile_metric_identity(&cube, &pi3, q()).unwrap();
        assert!((lhs - 0.25).abs() < 1e-5 && (rhs - 0.25).abs() < 1e-12);
    }

    #[test]
    fn report_examples() {
        let cd: CopulaModel = "cd h=id".parse().unwrap();
        let params = BoundParams { p_list: alloc::vec![1.0], ..BoundParams::default() };
        let r = verify_bounds(BoundTarget::Single(&cd), &[BoundTag::MeanLp], &params).unwrap();
        let c = &r.checks[0];
        assert!((c.computed - 0.25).abs() < 1e-12 && c.bound == 0.25 && c.pass);

        let os = CopulaModel::ordinal_sum(0.2).unwrap();
        let params = BoundParams { a_grid: alloc::vec![0.4], ..BoundParams::default() };
        let r = verify_bounds(BoundTarget::Single(&os), &[BoundTag::Mbar], &params).unwrap();
        assert!((r.checks[0].computed - 0.4).abs() < 1e-12 && (r.checks[0].bound - 0.4).abs() < 1e-15);
        assert!(r.checks[0].pass);

        let params = BoundParams { tau_list: alloc::vec![0.3], ..BoundParams::default() };
        let r = verify_bounds(BoundTarget::Single(&CopulaModel::product()), &[BoundTag::QuantileAvg], &params).unwrap();
        assert_eq!(r.checks.len(), 2);
        assert!(r.all_pass());
    }

    #[test]
    fn tags_parse_and_arity_is_checked() {
        assert_eq!("mean_lp".parse::<BoundTag>().unwrap(), BoundTag::MeanLp);
        assert!(matches!("no_such_check".parse::<BoundTag>(), Err(Error::UnknownTag(_))));
        let m = CopulaModel::product();
        assert!(verify_bounds(BoundTarget::Single(&m), &[BoundTag::Phi], &BoundParams::default()).is_err());
    }
}
