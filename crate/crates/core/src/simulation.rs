//! Convergence experiments for the empirical checkerboard estimators.
//!
//! Each replication draws a sample from its own random stream (stream index =
//! replication index), so replications can run in any order or in parallel
//! and still produce the same table.

use alloc::vec::Vec;

use crate::checkerboard::{empirical_checkerboard, pseudo_ranks};
use crate::copula::CopulaModel;
use crate::error::{Error, Result};
use crate::numerics::{QuadratureSpec, RngStream};
use crate::regression::{grid_quantile, grid_regression, StepFunction1D};

/// Truth samples per estimator piece in L1 error integration.
pub const TRUTH_SUBCELLS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: CopulaModel,
    pub sizes: Vec<usize>,
    pub reps: usize,
    /// Resolution exponent, `N = floor(n^s)`.
    pub s: f64,
    pub tau_list: Vec<f64>,
    pub seed: u64,
    pub quad: QuadratureSpec,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 0.5) {
            return Err(Error::InvalidParameter("s must lie in (0, 1/2)".into()));
        }
        if self.sizes.is_empty() || self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("sizes must be positive and strictly increasing".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        if self.tau_list.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::InvalidParameter("quantile levels must lie in (0, 1]".into()));
        }
        if self.family.covariate_dim() != 1 {
            return Err(Error::InvalidParameter("convergence experiments need a bivariate family".into()));
        }
        for &n in &self.sizes {
            resolution(n, self.s)?;
        }
        Ok(())
    }

    fn estimators(&self) -> Vec<Estimator> {
        let mut out = alloc::vec![Estimator::Mean];
        out.extend(self.tau_list.iter().map(|&t| Estimator::Quantile(t)));
        out
    }
}

/// `N = floor(n^s)`, robust to rounding in `pow` at exact integer powers.
pub fn resolution(n: usize, s: f64) -> Result<usize> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter("resolution exponent must be positive".into()));
    }
    let nf = n as f64;
    let mut k = libm::floor(libm::pow(nf, s)) as usize;
    if libm::pow((k + 1) as f64, 1.0 / s) <= nf {
        k += 1;
    } else if k > 0 && libm::pow(k as f64, 1.0 / s) > nf * (1.0 + 1e-15) {
        k -= 1;
    }
    if k == 0 {
        return Err(Error::InvalidParameter(alloc::format!("n = {n} is too small for s = {s} (N would be 0)")));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Mean,
    Quantile(f64),
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Mean => "mean",
            Estimator::Quantile(_) => "quantile",
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            Estimator::Mean => None,
            Estimator::Quantile(t) => Some(*t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub rep: usize,
    pub estimator: Estimator,
    pub n_cells: usize,
    pub l1_error: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Rows ordered by `(n, rep)`, estimators in configuration order.
    pub fn sort(&mut self) {
        self.rows.sort_by_key(|r| (r.n, r.rep));
    }

    /// Errors of one estimator at one sample size, in row order.
    pub fn errors(&self, n: usize, estimator: Estimator) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n && r.estimator == estimator).map(|r| r.l1_error).collect()
    }
}

/// True regression and quantile functions sampled at `TRUTH_SUBCELLS`
/// midpoints inside each of `N` pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable {
    n_cells: usize,
    mean: Vec<f64>,
    quantiles: Vec<(f64, Vec<f64>)>,
}

impl TruthTable {
    pub fn new(model: &CopulaModel, n_cells: usize, tau_list: &[f64], quad: QuadratureSpec) -> Result<Self> {
        let points = n_cells * TRUTH_SUBCELLS;
        let xs: Vec<f64> = (0..points).map(|k| (k as f64 + 0.5) / points as f64).collect();
        let mean = xs.iter().map(|&x| model.regression(&[x], quad)).collect();
        let mut quantiles = Vec::with_capacity(tau_list.len());
        for &tau in tau_list {
            let q = xs.iter().map(|&x| model.quantile(&[x], tau)).collect::<Result<Vec<_>>>()?;
            quantiles.push((tau, q));
        }
        Ok(Self { n_cells, mean, quantiles })
    }

    pub fn resolution(&self) -> usize {
        self.n_cells
    }

    fn samples(&self, estimator: Estimator) -> &[f64] {
        match estimator {
            Estimator::Mean => &self.mean,
            Estimator::Quantile(t) => {
                &self.quantiles.iter().find(|(tau, _)| *tau == t).expect("level in truth table").1
            }
        }
    }
}

/// `∫ |step - truth|` with exact piecewise integration of the step function.
pub fn l1_error(step: &StepFunction1D, truth: &[f64]) -> f64 {
    let n = step.len();
    let sub = truth.len() / n;
    let w = 1.0 / truth.len() as f64;
    step.values()
        .iter()
        .enumerate()
        .map(|(i, v)| truth[i * sub..(i + 1) * sub].iter().map(|t| (v - t).abs()).sum::<f64>())
        .sum::<f64>()
        * w
}

/// Estimated step functions from one sample: mean regression first, then
/// one quantile regression per level.
pub fn estimate(
    model: &CopulaModel,
    n: usize,
    n_cells: usize,
    tau_list: &[f64],
    rng: &mut RngStream,
) -> Result<(StepFunction1D, Vec<StepFunction1D>)> {
    let sample = model.sample(n, rng);
    let grid = empirical_checkerboard(&pseudo_ranks(&sample)?, n_cells)?;
    let mean = grid_regression(&grid)?;
    let quantiles = tau_list.iter().map(|&t| grid_quantile(&grid, t)).collect::<Result<Vec<_>>>()?;
    Ok((mean, quantiles))
}

/// All rows of one `(n, rep)` cell of the experiment.
pub fn run_replication(config: &ExperimentConfig, truth: &TruthTable, n: usize, rep: usize) -> Result<Vec<ErrorRow>> {
    let n_cells = resolution(n, config.s)?;
    if truth.resolution() != n_cells {
        return Err(Error::Precondition("truth table resolution does not match N(n)".into()));
    }
    let mut rng = RngStream::new(config.seed, rep as u64);
    let (mean, quantiles) = estimate(&config.family, n, n_cells, &config.tau_list, &mut rng)?;
    let steps = core::iter::once(&mean).chain(quantiles.iter());
    Ok(config
        .estimators()
        .into_iter()
        .zip(steps)
        .map(|(estimator, step)| ErrorRow {
            n,
            rep,
            estimator,
            n_cells,
            l1_error: l1_error(step, truth.samples(estimator)),
            seconds: 0.0,
        })
        .collect())
}

/// Serial reference implementation of the experiment.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ErrorTable> {
    config.validate()?;
    let mut table = ErrorTable::default();
    for &n in &config.sizes {
        let truth = TruthTable::new(&config.family, resolution(n, config.s)?, &config.tau_list, config.quad)?;
        for rep in 0..config.reps {
            table.rows.extend(run_replication(config, &truth, n, rep)?);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxplotRow {
    pub n: usize,
    pub estimator: Estimator,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quantile of sorted data by linear interpolation between order statistics
/// at position `(m - 1) p`.
pub fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Five-number summary plus mean per `(n, estimator)`.
pub fn summarize_boxplot(table: &ErrorTable) -> Result<Vec<BoxplotRow>> {
    if table.rows.is_empty() {
        return Err(Error::Precondition("cannot summarize an empty error table".into()));
    }
    let mut keys: Vec<(usize, Estimator)> = Vec::new();
    for r in &table.rows {
        if !keys.iter().any(|&(n, e)| n == r.n && e == r.estimator) {
            keys.push((r.n, r.estimator));
        }
    }
    keys.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.tau().unwrap_or(-1.0).total_cmp(&b.1.tau().unwrap_or(-1.0))));
    Ok(keys
        .into_iter()
        .map(|(n, estimator)| {
            let mut v = table.errors(n, estimator);
            v.sort_by(f64::total_cmp);
            BoxplotRow {
                n,
                estimator,
                min: v[0],
                q1: interpolated_quantile(&v, 0.25),
                median: interpolated_quantile(&v, 0.5),
                q3: interpolated_quantile(&v, 0.75),
                max: v[v.len() - 1],
                mean: v.iter().sum::<f64>() / v.len() as f64,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, rep: usize, e: f64) -> ErrorRow {
        ErrorRow { n, rep, estimator: Estimator::Mean, n_cells: 1, l1_error: e, seconds: 0.0 }
    }

    #[test]
    fn resolution_law() {
        assert_eq!(resolution(100, 0.4).unwrap(), 6);
        assert_eq!(resolution(10_000, 0.4).unwrap(), 39);
        assert_eq!(resolution(10_000, 0.45).unwrap(), 63);
        assert_eq!(resolution(400, 0.4).unwrap(), 10);
        assert_eq!(resolution(1024, 0.4).unwrap(), 16);
        assert!(resolution(0, 0.4).is_err());
    }

    #[test]
    fn boxplot_conventions() {
        let t = ErrorTable { rows: (1..=5).map(|k| row(10, 5 - k, k as f64)).collect() };
        let b = summarize_boxplot(&t).unwrap();
        assert_eq!((b[0].q1, b[0].median, b[0].q3), (2.0, 3.0, 4.0));
        let single = ErrorTable { rows: alloc::vec![row(10, 0, 0.7)] };
        let b = summarize_boxplot(&single).unwrap()[0];
        assert!([b.min, b.q1, b.median, b.q3, b.max, b.mean].iter().all(|&v| v == 0.7));
        assert!(summarize_boxplot(&ErrorTable::default()).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig {
            family: CopulaModel::comonotone(),
            sizes: alloc::vec![100, 1000],
            reps: 2,
            s: 0.4,
            tau_list: alloc::vec![0.2],
            seed: 1,
            quad: QuadratureSpec::default(),
        };
        assert!(c.validate().is_ok());
        c.s = 0.5;
        assert!(c.validate().is_err());
        c.s = 0.4;
        c.sizes = alloc::vec![1000, 100];
        assert!(c.validate().is_err());
    }

    #[test]
    fn serial_run_shape() {
        let c = ExperimentConfig {
            family: CopulaModel::product(),
            sizes: alloc::vec![50, 200],
            reps: 3,
            s: 0.4,
            tau_list: alloc::vec![0.2, 0.5],
            seed: 9,
            quad: QuadratureSpec::default(),
        };
        let t = run_convergence(&c).unwrap();
        assert_eq!(t.rows.len(), 2 * 3 * 3);
        assert!(t.rows.iter().all(|r| r.l1_error >= 0.0 && r.n_cells == resolution(r.n, 0.4).unwrap()));
    }
}
