#![allow(dead_code)]

use copreg_core::copula::PiecewiseMap;
use copreg_core::{BoundMode, CheckerboardGrid, CopulaModel, QuadratureSpec, RngStream};

/// Bivariate models covering every family with a one-dimensional covariate.
pub fn bivariate_models() -> Vec<(&'static str, CopulaModel)> {
    vec![
        ("product", CopulaModel::product()),
        ("comonotone", CopulaModel::comonotone()),
        ("countermonotone", CopulaModel::comonotone().flip()),
        ("shift", CopulaModel::completely_dependent(PiecewiseMap::shift(0.25).unwrap())),
        ("cbperm2", CopulaModel::checkerboard_permutation(vec![2, 1]).unwrap()),
        ("cbperm3", CopulaModel::checkerboard_permutation(vec![2, 3, 1]).unwrap()),
        ("ordsum", CopulaModel::ordinal_sum(0.25).unwrap()),
        ("mo", CopulaModel::marshall_olkin(0.35, 0.65).unwrap()),
        ("clayton", CopulaModel::clayton(2.0).unwrap()),
        ("qbk_lower", CopulaModel::quantile_bound(0.4, 1000, BoundMode::Lower).unwrap()),
        ("qbk_upper", CopulaModel::quantile_bound(0.4, 1000, BoundMode::Upper).unwrap()),
        ("grid", CopulaModel::grid(random_grid(2, 4, 7))),
    ]
}

/// Every model, including those with a two-dimensional covariate.
pub fn all_models() -> Vec<(&'static str, CopulaModel)> {
    let mut v = bivariate_models();
    v.push(("cube", CopulaModel::cube()));
    v.push(("product3", CopulaModel::product_with_covariates(2).unwrap()));
    v.push(("grid3", CopulaModel::grid(random_grid(3, 3, 11))));
    v
}

/// The pairwise model set used by the metric suites.
pub fn metric_models() -> Vec<(&'static str, CopulaModel)> {
    vec![
        ("product", CopulaModel::product()),
        ("comonotone", CopulaModel::comonotone()),
        ("countermonotone", CopulaModel::comonotone().flip()),
        ("clayton", CopulaModel::clayton(2.0).unwrap()),
        ("mo", CopulaModel::marshall_olkin(0.35, 0.65).unwrap()),
    ]
}

/// A random doubly stochastic grid: the product grid pushed around by random
/// mass-preserving swaps on 2x2 sub-rectangles (which keep every margin uniform).
pub fn random_grid(dim: usize, n: usize, seed: u64) -> CheckerboardGrid {
    let mut rng = RngStream::new(seed, 0);
    let cells = n.pow(dim as u32);
    let mut mass = vec![1.0 / cells as f64; cells];
    let idx = |c: &[usize]| c.iter().fold(0, |acc, &k| acc * n + k);
    let pick = |rng: &mut RngStream| ((rng.uniform() * n as f64) as usize).min(n - 1);
    for _ in 0..200 {
        // Move mass along the first and last axes, leaving middle axes fixed.
        let mid: Vec<usize> = (0..dim.saturating_sub(2)).map(|_| pick(&mut rng)).collect();
        let (i1, i2, j1, j2) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
        if i1 == i2 || j1 == j2 {
            continue;
        }
        let at = |i: usize, j: usize| {
            let mut c = vec![i];
            c.extend(&mid);
            c.push(j);
            idx(&c)
        };
        let (a, b, c, d) = (at(i1, j1), at(i2, j2), at(i1, j2), at(i2, j1));
        let room = mass[a].min(mass[b]);
        let eps = room * rng.uniform();
        mass[a] -= eps;
        mass[b] -= eps;
        mass[c] += eps;
        mass[d] += eps;
    }
    CheckerboardGrid::from_masses(dim, n, mass).unwrap()
}

pub fn quad(cells: usize) -> QuadratureSpec {
    QuadratureSpec::new(cells).unwrap()
}
