//! Checkerboard copulas: piecewise-constant densities on an `N^d` grid.
//!
//! Masses are stored row-major with the response as the last (fastest) axis,
//! so a covariate cell owns a contiguous strip of `N` response cells.

use alloc::vec::Vec;

use crate::copula::{cell_index, CopulaModel, SamplePoint};
use crate::error::{Error, Result};

/// Tolerance on the total mass and on every one-cell slab.
pub const GRID_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckerboardGrid {
    dim: usize,
    n: usize,
    mass: Vec<f64>,
}

/// Per-axis pseudo-ranks of a sample, each a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedSample {
    n: usize,
    ranks: Vec<Vec<usize>>,
}

impl RankedSample {
    pub fn new(ranks: Vec<Vec<usize>>) -> Result<Self> {
        let n = ranks.first().map_or(0, Vec::len);
        if n == 0 || !(2..=3).contains(&ranks.len()) {
            return Err(Error::Precondition("ranked samples need n >= 1 and 2 or 3 axes".into()));
        }
        for axis in &ranks {
            let mut seen = alloc::vec![false; n];
            if axis.len() != n {
                return Err(Error::Precondition("rank vectors differ in length".into()));
            }
            for &r in axis {
                if r == 0 || r > n || seen[r - 1] {
                    return Err(Error::Precondition("each rank vector must be a permutation of 1..n".into()));
                }
                seen[r - 1] = true;
            }
        }
        Ok(Self { n, ranks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.ranks.len()
    }

    pub fn axis(&self, k: usize) -> &[usize] {
        &self.ranks[k]
    }
}

/// Ranks per axis; ties are broken by position in the sample.
pub fn pseudo_ranks(sample: &[SamplePoint]) -> Result<RankedSample> {
    let first = sample.first().ok_or_else(|| Error::Precondition("pseudo-ranks need n >= 1".into()))?;
    let dim = first.coords().len();
    if let Some(p) = sample.iter().find(|p| p.coords().len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim - 1, found: p.coords().len() - 1 });
    }
    let n = sample.len();
    let mut ranks = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sample[a].coords()[k].total_cmp(&sample[b].coords()[k]));
        let mut r = alloc::vec![0; n];
        for (pos, &idx) in order.iter().enumerate() {
            r[idx] = pos + 1;
        }
        ranks.push(r);
    }
    Ok(RankedSample { n, ranks })
}

impl CheckerboardGrid {
    /// Wraps a mass array after checking both copula invariants.
    pub fn from_masses(dim: usize, n: usize, mass: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&dim) || n == 0 {
            return Err(Error::InvalidGrid("dimension must be 2 or 3 and N >= 1".into()));
        }
        if mass.len() != n.pow(dim as u32) {
            return Err(Error::InvalidGrid("mass array has the wrong length".into()));
        }
        if let Some(pos) = mass.iter().position(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidGrid(alloc::format!("mass at position {pos} is negative or not finite")));
        }
        let grid = Self { dim, n, mass };
        grid.check_invariants()?;
        Ok(grid)
    }

    fn check_invariants(&self) -> Result<()> {
        let total: f64 = self.mass.iter().sum();
        if (total - 1.0).abs() > GRID_TOL {
            return Err(Error::InvalidGrid(alloc::format!("total mass {total} differs from 1")));
        }
        let target = 1.0 / self.n as f64;
        for axis in 0..self.dim {
            let mut slabs = alloc::vec![0.0; self.n];
            for (flat, m) in self.mass.iter().enumerate() {
                slabs[self.axis_index(flat, axis)] += m;
            }
            if let Some(i) = slabs.iter().position(|s| (s - target).abs() > GRID_TOL) {
                return Err(Error::InvalidGrid(alloc::format!(
                    "slab {} of axis {} has mass {}, expected 1/N",
                    i + 1,
                    axis + 1,
                    slabs[i]
                )));
            }
        }
        Ok(())
    }

    fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.n.pow((self.dim - 1 - axis) as u32)) % self.n
    }

    /// Independence grid `Π` at resolution `n`.
    pub fn product(dim: usize, n: usize) -> Result<Self> {
        let cells = n.pow(dim as u32);
        Self::from_masses(dim, n, alloc::vec![1.0 / cells as f64; cells])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Row-major masses, response axis last.
    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Mass of the cell with zero-based multi-index `idx`.
    pub fn mass_at(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.dim);
        self.mass[idx.iter().fold(0, |acc, &i| acc * self.n + i)]
    }

    /// Density value `N^d * mass` per cell.
    pub fn density(&self) -> Vec<f64> {
        let scale = self.n.pow(self.dim as u32) as f64;
        self.mass.iter().map(|m| m * scale).collect()
    }

    fn strip_count(&self) -> usize {
        self.n.pow((self.dim - 1) as u32)
    }

    /// Covariate measure of one strip, `N^-(d-1)`.
    pub fn strip_weight(&self) -> f64 {
        1.0 / self.strip_count() as f64
    }

    fn strip_of(&self, x: &[f64]) -> usize {
        x[..self.dim - 1].iter().fold(0, |acc, &v| acc * self.n + cell_index(v, self.n))
    }

    fn strip(&self, s: usize) -> &[f64] {
        &self.mass[s * self.n..(s + 1) * self.n]
    }

    /// Piecewise-linear conditional distribution function of the strip containing `x`.
    pub fn kernel_cdf(&self, x: &[f64], y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        let scale = self.strip_count() as f64;
        let strip = self.strip(self.strip_of(x));
        let j0 = cell_index(y, self.n);
        let below: f64 = strip[..j0].iter().sum();
        let frac = self.n as f64 * y - j0 as f64;
        (scale * (below + strip[j0] * frac)).clamp(0.0, 1.0)
    }

    /// Mean of the conditional law in the strip containing `x`.
    pub fn regression_at(&self, x: &[f64]) -> f64 {
        self.strip_regression(self.strip_of(x))
    }

    fn strip_regression(&self, s: usize) -> f64 {
        let scale = self.strip_count() as f64;
        let n = self.n as f64;
        self.strip(s).iter().enumerate().map(|(j, m)| scale * m * (j as f64 + 0.5) / n).sum()
    }

    pub fn strip_regressions(&self) -> Vec<f64> {
        (0..self.strip_count()).map(|s| self.strip_regression(s)).collect()
    }

    /// Exact inverse of the piecewise-linear strip distribution function.
    pub fn quantile_at(&self, x: &[f64], tau: f64) -> f64 {
        self.strip_quantile(self.strip_of(x), tau)
    }

    fn strip_quantile(&self, s: usize, tau: f64) -> f64 {
        let scale = self.strip_count() as f64;
        let n = self.n as f64;
        let mut below = 0.0;
        let mut last_positive = None;
        for (j, &m) in self.strip(s).iter().enumerate() {
            let p = scale * m;
            if p > 0.0 {
                if below + p >= tau {
                    let frac = ((tau - below) / p).clamp(0.0, 1.0);
                    return (j as f64 + frac) / n;
                }
                last_positive = Some(j);
            }
            below += p;
        }
        // rounding left the strip total just below tau
        last_positive.map_or(1.0, |j| (j as f64 + 1.0) / n)
    }

    pub fn strip_quantiles(&self, tau: f64) -> Vec<f64> {
        (0..self.strip_count()).map(|s| self.strip_quantile(s, tau)).collect()
    }

    /// `C(u)` of the checkerboard copula, multilinear within each cell.
    pub fn copula_cdf(&self, u: &[f64]) -> f64 {
        let n = self.n as f64;
        let frac = |k: usize, i: usize| (n * u[k].clamp(0.0, 1.0) - i as f64).clamp(0.0, 1.0);
        let mut total = 0.0;
        for (flat, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let mut w = m;
            for k in 0..self.dim {
                w *= frac(k, self.axis_index(flat, k));
                if w == 0.0 {
                    break;
                }
            }
            total += w;
        }
        total
    }

    /// Grid of `(X, 1 - Y)`.
    pub fn flipped(&self) -> Self {
        let mut mass = self.mass.clone();
        for strip in mass.chunks_mut(self.n) {
            strip.reverse();
        }
        Self { dim: self.dim, n: self.n, mass }
    }

    /// `(x_1, y)`-marginal of a three-dimensional grid.
    pub fn marginalize_3d(&self) -> Result<Self> {
        if self.dim != 3 {
            return Err(Error::Precondition("marginalization needs a 3-d grid".into()));
        }
        let n = self.n;
        let mut mass = alloc::vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    mass[i * n + j] += self.mass[(i * n + k) * n + j];
                }
            }
        }
        Ok(Self { dim: 2, n, mass })
    }
}

/// Checkerboard approximation of `model` at resolution `n`.
///
/// Cell masses are volumes of the model's copula distribution function, so
/// they are exact up to rounding for every implemented family.
pub fn aggregate(model: &CopulaModel, n: usize) -> Result<CheckerboardGrid> {
    if n == 0 {
        return Err(Error::InvalidParameter("resolution must be at least 1".into()));
    }
    if let CopulaModel::Grid(g) = model {
        if g.resolution() == n {
            return Ok(g.clone());
        }
    }
    let dim = model.dim();
    let side = n + 1;
    let corners = side.pow(dim as u32);
    let mut cdf = Vec::with_capacity(corners);
    let mut u = [0.0; 3];
    for flat in 0..corners {
        let mut rest = flat;
        for k in (0..dim).rev() {
            u[k] = (rest % side) as f64 / n as f64;
            rest /= side;
        }
        cdf.push(model.copula_cdf(&u[..dim]));
    }
    let corner = |idx: &[usize]| cdf[idx.iter().fold(0, |acc, &i| acc * side + i)];
    let cells = n.pow(dim as u32);
    let mut mass = Vec::with_capacity(cells);
    let mut idx = [0usize; 3];
    let mut probe = [0usize; 3];
    for flat in 0..cells {
        let mut rest = flat;
        for k in (0..dim).rev() {
            idx[k] = rest % n;
            rest /= n;
        }
        let mut vol = 0.0;
        for bits in 0..(1usize << dim) {
            let mut sign = 1.0;
            for k in 0..dim {
                let upper = bits >> k & 1 == 1;
                probe[k] = idx[k] + usize::from(upper);
                if !upper {
                    sign = -sign;
                }
            }
            vol += sign * corner(&probe[..dim]);
        }
        if !vol.is_finite() {
            return Err(Error::NonFiniteCell { cell: idx[..dim].iter().map(|i| i + 1).collect() });
        }
        mass.push(vol.max(0.0));
    }
    CheckerboardGrid::from_masses(dim, n, mass)
}

/// Empirical checkerboard of resolution `n_cells` from pseudo-ranks.
///
/// Observation `r` occupies the rank cell `prod_k [(r_k - 1)/n, r_k/n]` with
/// mass `1/n` spread uniformly; overlaps with checkerboard cells are integers
/// in units of `1/(n N)`, so every cell mass is a ratio of exact integers.
pub fn empirical_checkerboard(ranked: &RankedSample, n_cells: usize) -> Result<CheckerboardGrid> {
    let n = ranked.n();
    if n_cells == 0 || n_cells > n {
        return Err(Error::Precondition(alloc::format!("resolution N = {n_cells} must lie in 1..=n (n = {n})")));
    }
    let dim = ranked.dim();
    let big_n = n_cells as u64;
    let small_n = n as u64;
    let mut counts = alloc::vec![0u64; n_cells.pow(dim as u32)];
    // per axis: (cell, overlap) pairs, at most two because N <= n
    let mut spans: [[(usize, u64); 2]; 3] = [[(0, 0); 2]; 3];
    let mut span_len = [0usize; 3];
    for obs in 0..n {
        for k in 0..dim {
            let r = ranked.axis(k)[obs] as u64;
            let (lo, hi) = ((r - 1) * big_n, r * big_n);
            span_len[k] = 0;
            let first = (lo / small_n) as usize;
            let last = (((hi - 1) / small_n) as usize).min(n_cells - 1);
            for c in first..=last {
                let (a, b) = (c as u64 * small_n, (c as u64 + 1) * small_n);
                let ov = hi.min(b).saturating_sub(lo.max(a));
                if ov > 0 {
                    spans[k][span_len[k]] = (c, ov);
                    span_len[k] += 1;
                }
            }
        }
        if dim == 2 {
            for &(i, a) in &spans[0][..span_len[0]] {
                for &(j, b) in &spans[1][..span_len[1]] {
                    counts[i * n_cells + j] += a * b;
                }
            }
        } else {
            for &(i, a) in &spans[0][..span_len[0]] {
                for &(k, b) in &spans[1][..span_len[1]] {
                    for &(j, c) in &spans[2][..span_len[2]] {
                        counts[(i * n_cells + k) * n_cells + j] += a * b * c;
                    }
                }
            }
        }
    }
    let denom = small_n as f64 * big_n.pow(dim as u32) as f64;
    let mass = counts.iter().map(|&c| c as f64 / denom).collect();
    CheckerboardGrid::from_masses(dim, n_cells, mass)
}
