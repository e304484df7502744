use alloc::vec::Vec;

use crate::error::{Error, Result};

const MATCH_TOL: f64 = 1e-12;

/// One affine piece `x -> offset + slope * x` on `[start, end)`, slope `±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffinePiece {
    pub start: f64,
    pub end: f64,
    pub increasing: bool,
    pub offset: f64,
}

impl AffinePiece {
    pub fn slope(&self) -> f64 {
        if self.increasing {
            1.0
        } else {
            -1.0
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.slope() * x
    }

    /// Image interval `(low, high)` of `[start, end)`.
    pub fn image(&self) -> (f64, f64) {
        let (a, b) = (self.eval(self.start), self.eval(self.end));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Sub-interval of the piece's domain mapped into `[lo, hi]`, if any.
    pub fn preimage(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let (a, b) =
            if self.increasing { (lo - self.offset, hi - self.offset) } else { (self.offset - hi, self.offset - lo) };
        let a = a.max(self.start);
        let b = b.min(self.end);
        (b > a).then_some((a, b))
    }
}

/// Lebesgue-measure-preserving, piecewise-affine map of `[0, 1]` onto itself.
///
/// Domains are consecutive half-open intervals covering `[0, 1]` (the last one
/// also contains `1`); images partition `[0, 1]` up to endpoints.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiecewiseMap {
    pieces: Vec<AffinePiece>,
}

impl PiecewiseMap {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter("piecewise map needs at least one piece".into()));
        }
        let mut cursor = 0.0;
        for p in &pieces {
            if (p.start - cursor).abs() > MATCH_TOL || p.end.is_nan() || p.end <= p.start {
                return Err(Error::InvalidParameter(
                    "piece domains must be consecutive, non-empty and start at 0".into(),
                ));
            }
            cursor = p.end;
        }
        if (cursor - 1.0).abs() > MATCH_TOL {
            return Err(Error::InvalidParameter("piece domains must end at 1".into()));
        }
        let mut images: Vec<(f64, f64)> = pieces.iter().map(AffinePiece::image).collect();
        images.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cursor = 0.0;
        for (lo, hi) in images {
            if (lo - cursor).abs() > MATCH_TOL {
                return Err(Error::InvalidParameter(
                    "piece images must partition [0, 1] (map is not measure preserving)".into(),
                ));
            }
            cursor = hi;
        }
        if (cursor - 1.0).abs() > MATCH_TOL {
            return Err(Error::InvalidParameter("piece images must cover [0, 1]".into()));
        }
        Ok(Self { pieces })
    }

    pub fn identity() -> Self {
        Self { pieces: alloc::vec![AffinePiece { start: 0.0, end: 1.0, increasing: true, offset: 0.0 }] }
    }

    /// `x -> 1 - x`.
    pub fn reflection() -> Self {
        Self { pieces: alloc::vec![AffinePiece { start: 0.0, end: 1.0, increasing: false, offset: 1.0 }] }
    }

    /// Rotation `x -> x + c (mod 1)` for `c` in `[0, 1)`.
    pub fn shift(c: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::InvalidParameter("shift must lie in [0, 1)".into()));
        }
        if c == 0.0 {
            return Ok(Self::identity());
        }
        Self::new(alloc::vec![
            AffinePiece { start: 0.0, end: 1.0 - c, increasing: true, offset: c },
            AffinePiece { start: 1.0 - c, end: 1.0, increasing: true, offset: c - 1.0 },
        ])
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    fn piece_at(&self, x: f64) -> &AffinePiece {
        self.pieces.iter().find(|p| x < p.end).unwrap_or_else(|| self.pieces.last().expect("non-empty"))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece_at(x).eval(x)
    }

    /// The map `1 - h`.
    pub fn reflected(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| AffinePiece { start: p.start, end: p.end, increasing: !p.increasing, offset: 1.0 - p.offset })
            .collect();
        Self { pieces }
    }

    /// `λ({t in [0, x] : h(t) <= y})`.
    pub fn joint_measure(&self, x: f64, y: f64) -> f64 {
        self.pieces.iter().filter_map(|p| p.preimage(f64::NEG_INFINITY, y)).map(|(a, b)| (b.min(x) - a).max(0.0)).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].increasing && self.pieces[0].offset == 0.0
    }

    pub fn is_reflection(&self) -> bool {
        self.pieces.len() == 1 && !self.pieces[0].increasing && self.pieces[0].offset == 1.0
    }
}
