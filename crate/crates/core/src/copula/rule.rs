use alloc::vec::Vec;

use super::CopulaModel;
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;

/// One node of a covariate integration rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateNode {
    pub weight: f64,
    point: [f64; 2],
}

/// Integration rule over the covariate space `[0, 1]^(d-1)`.
///
/// When every model involved is constant between known breakpoints the rule
/// places one node per piece, which makes integrals of step functions exact.
/// Otherwise each piece between breakpoints is refined by the midpoint rule
/// so that the total node count per axis is about `quad.cells()`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateRule {
    dim: usize,
    nodes: Vec<CovariateNode>,
}

fn axis_nodes(breaks: &[f64], refine: Option<usize>) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut edges = alloc::vec![0.0];
    edges.extend(cuts);
    edges.push(1.0);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let k = match refine {
            None => 1,
            Some(cells) => (libm::round((hi - lo) * cells as f64) as usize).max(1),
        };
        let h = (hi - lo) / k as f64;
        for j in 0..k {
            out.push((h, lo + (j as f64 + 0.5) * h));
        }
    }
    out
}

impl CovariateRule {
    pub fn for_models(models: &[&CopulaModel], quad: QuadratureSpec) -> Result<Self> {
        Self::with_extra_breaks(models, &[], quad)
    }

    /// As [`Self::for_models`] for integrands in `x -> K(x, [0, y])`: the
    /// kernels' jump points at level `y` become piece boundaries as well.
    pub(crate) fn for_kernels_at(models: &[&CopulaModel], y: f64, quad: QuadratureSpec) -> Result<Self> {
        let jumps: Vec<f64> = models.iter().flat_map(|m| m.kernel_jumps(y)).collect();
        Self::with_extra_breaks(models, &jumps, quad)
    }

    fn with_extra_breaks(models: &[&CopulaModel], extra: &[f64], quad: QuadratureSpec) -> Result<Self> {
        let dim = models.first().map_or(1, |m| m.covariate_dim());
        if let Some(m) = models.iter().find(|m| m.covariate_dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: m.covariate_dim() });
        }
        let mut breaks: Vec<Vec<f64>> = alloc::vec![Vec::new(); dim];
        let mut all_steps = true;
        for m in models {
            match m.covariate_breaks() {
                Some(b) => {
                    for (axis, extra) in breaks.iter_mut().zip(b) {
                        axis.extend(extra);
                    }
                }
                None => all_steps = false,
            }
        }
        if dim == 1 {
            breaks[0].extend(extra.iter().copied().filter(|b| b.is_finite()));
        }
        let refine = (!all_steps).then_some(quad.cells());
        Ok(Self::from_axes(dim, &breaks, refine))
    }

    /// Plain tensor midpoint rule with `quad.cells()` cells per axis.
    pub fn midpoint(dim: usize, quad: QuadratureSpec) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidParameter("covariate dimension must be 1 or 2".into()));
        }
        Ok(Self::from_axes(dim, &alloc::vec![Vec::new(); dim], Some(quad.cells())))
    }

    fn from_axes(dim: usize, breaks: &[Vec<f64>], refine: Option<usize>) -> Self {
        let first = axis_nodes(&breaks[0], refine);
        let nodes = if dim == 1 {
            first.iter().map(|&(w, x)| CovariateNode { weight: w, point: [x, 0.0] }).collect()
        } else {
            let second = axis_nodes(&breaks[1], refine);
            let mut nodes = Vec::with_capacity(first.len() * second.len());
            for &(w1, x1) in &first {
                for &(w2, x2) in &second {
                    nodes.push(CovariateNode { weight: w1 * w2, point: [x1, x2] });
                }
            }
            nodes
        };
        Self { dim, nodes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.nodes.iter().map(move |n| (n.weight, &n.point[..self.dim]))
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes().map(|(w, x)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_models_get_one_node_per_piece() {
        let a = CopulaModel::checkerboard_permutation(alloc::vec![2, 3, 1]).unwrap();
        let b = CopulaModel::ordinal_sum(0.25).unwrap();
        let rule = CovariateRule::for_models(&[&a, &b], QuadratureSpec::default()).unwrap();
        assert_eq!(rule.len(), 5);
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_models_refine_each_piece() {
        let a = CopulaModel::comonotone();
        let b = CopulaModel::checkerboard_permutation(alloc::vec![2, 1]).unwrap();
        let rule = CovariateRule::for_models(&[&a, &b], QuadratureSpec::new(64).unwrap()).unwrap();
        assert_eq!(rule.len(), 64);
        assert!((rule.integrate(|x| x[0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let a = CopulaModel::cube();
        let b = CopulaModel::product();
        assert!(matches!(
            CovariateRule::for_models(&[&a, &b], QuadratureSpec::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
