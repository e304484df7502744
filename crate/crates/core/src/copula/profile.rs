use alloc::vec::Vec;

use super::PiecewiseMap;

/// Tolerance for threshold comparisons on exactly represented step values.
pub(crate) const LEVEL_EPS: f64 = 1e-12;

/// A constant value carried by a set of covariate measure `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct WeightedValue {
    pub weight: f64,
    pub value: f64,
}

impl WeightedValue {
    pub fn new(weight: f64, value: f64) -> Self {
        Self { weight, value }
    }
}

/// `x -> intercept + slope * x` on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinearPiece {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl LinearPiece {
    pub fn new(start: f64, end: f64, slope: f64, intercept: f64) -> Self {
        Self { start, end, slope, intercept }
    }

    fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    fn len(&self) -> f64 {
        self.end - self.start
    }

    /// `∫ |v(x) - c|^p dx` over the piece.
    fn abs_moment(&self, c: f64, p: f64) -> f64 {
        let z1 = self.at(self.start) - c;
        let z2 = self.at(self.end) - c;
        if self.slope == 0.0 {
            return libm::pow(z1.abs(), p) * self.len();
        }
        let g = |z: f64| z.signum() * libm::pow(z.abs(), p + 1.0) / (p + 1.0);
        (g(z2) - g(z1)) / self.slope
    }

    /// Measure of `{x : v(x) >= t}` (or `> t` when `strict`) within the piece.
    fn upper_mass(&self, t: f64, strict: bool) -> f64 {
        if self.slope == 0.0 {
            let hit = if strict { self.intercept > t + LEVEL_EPS } else { self.intercept >= t - LEVEL_EPS };
            return if hit { self.len() } else { 0.0 };
        }
        let cross = (t - self.intercept) / self.slope;
        let (lo, hi) = if self.slope > 0.0 { (cross, self.end) } else { (self.start, cross) };
        (hi.min(self.end) - lo.max(self.start)).max(0.0)
    }
}

/// Shape of a function of the covariates, as far as it is known in closed form.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Profile {
    /// Finitely many values, each on a set of known measure.
    Cells(Vec<WeightedValue>),
    /// Affine on consecutive pieces of `[0, 1]` (one covariate).
    Linear(Vec<LinearPiece>),
    /// No exploitable structure; callers integrate numerically.
    Smooth,
}

impl Profile {
    pub fn from_map(h: &PiecewiseMap) -> Self {
        Profile::Linear(h.pieces().iter().map(|p| LinearPiece::new(p.start, p.end, p.slope(), p.offset)).collect())
    }

    /// Profile of `1 - f`.
    pub fn reflect(self) -> Self {
        match self {
            Profile::Cells(cells) => {
                Profile::Cells(cells.into_iter().map(|c| WeightedValue::new(c.weight, 1.0 - c.value)).collect())
            }
            Profile::Linear(pieces) => Profile::Linear(
                pieces.into_iter().map(|p| LinearPiece::new(p.start, p.end, -p.slope, 1.0 - p.intercept)).collect(),
            ),
            Profile::Smooth => Profile::Smooth,
        }
    }

    pub fn abs_moment(&self, c: f64, p: f64) -> Option<f64> {
        match self {
            Profile::Cells(cells) => Some(cells.iter().map(|w| w.weight * libm::pow((w.value - c).abs(), p)).sum()),
            Profile::Linear(pieces) => Some(pieces.iter().map(|q| q.abs_moment(c, p)).sum()),
            Profile::Smooth => None,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            Profile::Cells(cells) => Some(cells.iter().map(|w| w.weight * w.value).sum()),
            Profile::Linear(pieces) => Some(pieces.iter().map(|q| 0.5 * (q.at(q.start) + q.at(q.end)) * q.len()).sum()),
            Profile::Smooth => None,
        }
    }

    /// Measure of `{f >= t}`, or `{f > t}` when `strict`.
    pub fn upper_mass(&self, t: f64, strict: bool) -> Option<f64> {
        match self {
            Profile::Cells(cells) => Some(
                cells
                    .iter()
                    .filter(|w| if strict { w.value > t + LEVEL_EPS } else { w.value >= t - LEVEL_EPS })
                    .map(|w| w.weight)
                    .sum(),
            ),
            Profile::Linear(pieces) => Some(pieces.iter().map(|q| q.upper_mass(t, strict)).sum()),
            Profile::Smooth => None,
        }
    }

    /// Measure of `{f <= t}`.
    pub fn lower_mass(&self, t: f64) -> Option<f64> {
        let total = match self {
            Profile::Cells(cells) => cells.iter().map(|w| w.weight).sum(),
            _ => 1.0,
        };
        self.upper_mass(t, true).map(|m| (total - m).max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_moments_of_identity() {
        let id = Profile::Linear(alloc::vec![LinearPiece::new(0.0, 1.0, 1.0, 0.0)]);
        assert!((id.abs_moment(0.5, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((id.abs_moment(0.5, 2.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((id.mean().unwrap() - 0.5).abs() < 1e-15);
        let refl = id.clone().reflect();
        assert!((refl.abs_moment(0.5, 3.0).unwrap() - id.abs_moment(0.5, 3.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn linear_level_sets() {
        let down = Profile::Linear(alloc::vec![LinearPiece::new(0.0, 1.0, -1.0, 1.0)]);
        assert!((down.upper_mass(0.7, false).unwrap() - 0.3).abs() < 1e-15);
        assert!((down.lower_mass(0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn cell_thresholds_are_tolerant() {
        let p = Profile::Cells(alloc::vec![WeightedValue::new(0.5, 0.1), WeightedValue::new(0.5, 0.9)]);
        assert_eq!(p.upper_mass(0.5 + 0.4, false).unwrap(), 0.5);
        assert_eq!(p.upper_mass(0.9, true).unwrap(), 0.0);
    }
}
