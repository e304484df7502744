mod common;

use common::random_grid;
use copreg_core::numerics::invert_monotone;
use copreg_core::regression::grid_quantile;
use copreg_core::{aggregate, empirical_checkerboard, pseudo_ranks, CopulaModel, RankedSample, RngStream};

fn random_permutation(n: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = ((rng.uniform() * (i + 1) as f64) as usize).min(i);
        v.swap(i, j);
    }
    v
}

/// Rank-based empirical copula on the lattice `{0, 1/n, ..., 1}^2`.
fn lattice_copula(x: &[usize], y: &[usize], a: usize, b: usize) -> f64 {
    let hits = x.iter().zip(y).filter(|(&rx, &ry)| rx <= a && ry <= b).count();
    hits as f64 / x.len() as f64
}

/// Bilinear interpolation of the lattice copula at `(u, v)`.
fn interpolated_copula(x: &[usize], y: &[usize], u: f64, v: f64) -> f64 {
    let n = x.len() as f64;
    let (su, sv) = (u * n, v * n);
    let (a, b) = (su.floor() as usize, sv.floor() as usize);
    let (fa, fb) = (su - a as f64, sv - b as f64);
    let at = |i: usize, j: usize| lattice_copula(x, y, i.min(x.len()), j.min(x.len()));
    (1.0 - fa) * (1.0 - fb) * at(a, b)
        + fa * (1.0 - fb) * at(a + 1, b)
        + (1.0 - fa) * fb * at(a, b + 1)
        + fa * fb * at(a + 1, b + 1)
}

#[test]
fn empirical_checkerboard_matches_corner_inclusion_exclusion() {
    let mut rng = RngStream::new(77, 0);
    let mut checked = 0;
    for trial in 0..100 {
        let n = 1 + trial % 20;
        let x = random_permutation(n, &mut rng);
        let y = random_permutation(n, &mut rng);
        let ranked = RankedSample::new(vec![x.clone(), y.clone()]).unwrap();
        for big_n in 1..=n.min(5) {
            let grid = empirical_checkerboard(&ranked, big_n).unwrap();
            let c = |i: usize, j: usize| interpolated_copula(&x, &y, i as f64 / big_n as f64, j as f64 / big_n as f64);
            for i in 0..big_n {
                for j in 0..big_n {
                    let vol = c(i + 1, j + 1) - c(i, j + 1) - c(i + 1, j) + c(i, j);
                    let got = grid.mass_at(&[i, j]);
                    assert!((got - vol).abs() < 1e-12, "n={n} N={big_n} cell ({i},{j}): {got} vs {vol}");
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 100);
}

#[test]
fn empirical_checkerboard_has_uniform_margins() {
    let mut rng = RngStream::new(5, 1);
    for n in [7usize, 50, 333] {
        let ranked = RankedSample::new(vec![random_permutation(n, &mut rng), random_permutation(n, &mut rng)]).unwrap();
        for big_n in [1, 2, 3, 6, 7] {
            let g = empirical_checkerboard(&ranked, big_n).unwrap();
            for i in 0..big_n {
                let row: f64 = (0..big_n).map(|j| g.mass_at(&[i, j])).sum();
                let col: f64 = (0..big_n).map(|j| g.mass_at(&[j, i])).sum();
                assert!((row - 1.0 / big_n as f64).abs() < 1e-12);
                assert!((col - 1.0 / big_n as f64).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn identity_ranks_at_full_resolution_give_a_diagonal_grid() {
    let ranks: Vec<usize> = (1..=6).collect();
    let g = empirical_checkerboard(&RankedSample::new(vec![ranks.clone(), ranks]).unwrap(), 6).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let want = if i == j { 1.0 / 6.0 } else { 0.0 };
            assert!((g.mass_at(&[i, j]) - want).abs() < 1e-15);
        }
    }
}

#[test]
fn resolution_above_sample_size_is_rejected() {
    let r = RankedSample::new(vec![vec![1, 2], vec![2, 1]]).unwrap();
    assert!(empirical_checkerboard(&r, 3).is_err());
    assert!(empirical_checkerboard(&r, 0).is_err());
}

/// Direct strip formula for the grid conditional distribution function.
fn strip_cdf(g: &copreg_core::CheckerboardGrid, i: usize, y: f64) -> f64 {
    let n = g.resolution();
    let fy = (y * n as f64).min(n as f64);
    (0..n).map(|j| n as f64 * g.mass_at(&[i, j]) * (fy - j as f64).clamp(0.0, 1.0)).sum()
}

#[test]
fn grid_quantile_matches_bisection_on_random_grids() {
    for seed in 0..10 {
        let g = random_grid(2, 3 + seed as usize % 5, 1000 + seed);
        let n = g.resolution();
        for tau in [0.05, 0.2, 0.5, 0.77, 0.999] {
            let q = grid_quantile(&g, tau).unwrap();
            for i in 0..n {
                let want = invert_monotone(|y| strip_cdf(&g, i, y), tau, 1e-13).unwrap();
                assert!((q.values()[i] - want).abs() < 1e-9, "seed={seed} tau={tau} strip {i}");
            }
        }
    }
}

#[test]
fn grid_kernel_agrees_with_direct_strip_formula() {
    let g = random_grid(2, 5, 3);
    let model = CopulaModel::grid(g.clone());
    for i in 0..5 {
        let x = (i as f64 + 0.3) / 5.0;
        for k in 0..=40 {
            let y = k as f64 / 40.0;
            assert!((model.kernel_cdf(&[x], y) - strip_cdf(&g, i, y)).abs() < 1e-12);
        }
    }
}

#[test]
fn aggregation_of_a_grid_at_its_own_resolution_is_the_identity() {
    for (dim, n) in [(2, 4), (3, 3)] {
        let g = random_grid(dim, n, 8);
        assert_eq!(aggregate(&CopulaModel::grid(g.clone()), n).unwrap(), g);
    }
}

#[test]
fn aggregated_comonotone_matches_min_copula_volumes() {
    let g = aggregate(&CopulaModel::comonotone(), 4).unwrap();
    let m = |u: f64, v: f64| u.min(v);
    for i in 0..4 {
        for j in 0..4 {
            let (u0, u1, v0, v1) = (i as f64 / 4.0, (i + 1) as f64 / 4.0, j as f64 / 4.0, (j + 1) as f64 / 4.0);
            let vol = m(u1, v1) - m(u0, v1) - m(u1, v0) + m(u0, v0);
            assert!((g.mass_at(&[i, j]) - vol).abs() < 1e-15);
        }
    }
}

#[test]
fn cube_marginal_is_the_product_grid() {
    let g = aggregate(&CopulaModel::cube(), 2).unwrap().marginalize_3d().unwrap();
    assert!(g.masses().iter().all(|&m| (m - 0.25).abs() < 1e-15));
}

#[test]
fn averaging_the_full_kernel_over_the_dropped_covariate_gives_the_marginal_kernel() {
    for seed in 0..5 {
        let n = 2 + seed as usize % 3;
        let g = random_grid(3, n, 40 + seed);
        let marginal = g.marginalize_3d().unwrap();
        for i in 0..n {
            let x1 = (i as f64 + 0.5) / n as f64;
            let strip: f64 = (0..n).flat_map(|k| (0..n).map(move |j| (k, j))).map(|(k, j)| g.mass_at(&[i, k, j])).sum();
            for step in 0..=20 {
                let y = step as f64 / 20.0;
                // weight of x2-cell k given x1-cell i
                let averaged: f64 = (0..n)
                    .map(|k| {
                        let w: f64 = (0..n).map(|j| g.mass_at(&[i, k, j])).sum::<f64>() / strip;
                        w * g.kernel_cdf(&[x1, (k as f64 + 0.5) / n as f64], y)
                    })
                    .sum();
                assert!((averaged - marginal.kernel_cdf(&[x1], y)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn empirical_kernels_approach_the_clayton_kernel() {
    let model = CopulaModel::clayton(2.0).unwrap();
    let mut medians = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let big_n = (n as f64).powf(0.4).floor() as usize;
        let mut sups: Vec<f64> = (0..20)
            .map(|rep| {
                let mut rng = RngStream::new(31, rep);
                let g = empirical_checkerboard(&pseudo_ranks(&model.sample(n, &mut rng)).unwrap(), big_n).unwrap();
                // Interior grid k/21. Near the origin the Clayton kernel varies on
                // the scale of x itself, so a probe at x = 0.025 measures where it
                // falls inside the first strip rather than the sample size.
                let mut sup: f64 = 0.0;
                for a in 1..=20 {
                    for b in 1..=20 {
                        let (x, y) = (a as f64 / 21.0, b as f64 / 21.0);
                        sup = sup.max((g.kernel_cdf(&[x], y) - model.kernel_cdf(&[x], y)).abs());
                    }
                }
                sup
            })
            .collect();
        sups.sort_by(f64::total_cmp);
        medians.push(0.5 * (sups[9] + sups[10]));
    }
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}
