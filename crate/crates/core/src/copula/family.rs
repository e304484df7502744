//! Text form of copula models, shared with the command line.
//!
//! ```text
//! product [dim=2|3]      comonotone          cube
//! cd h=id|flip|shift:c   cbperm N=3 sigma=2,3,1
//! ordsum b=0.25          mo alpha=0.35 beta=0.65
//! clayton theta=2        qbk tau=0.3 mode=lower|upper n=100
//! flip <family>
//! ```
//!
//! Grids are file-backed and parsed by the caller (`grid file=...`).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{BoundMode, CopulaModel, PiecewiseMap};
use crate::error::{Error, Result};

struct Params<'a> {
    family: &'a str,
    values: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn parse(family: &'a str, tokens: &[&'a str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for tok in tokens {
            let (k, v) =
                tok.split_once('=').ok_or_else(|| Error::Parse(alloc::format!("expected key=value, found `{tok}`")))?;
            if values.insert(k, v).is_some() {
                return Err(Error::Parse(alloc::format!("parameter `{k}` given twice")));
            }
        }
        Ok(Self { family, values })
    }

    fn take(&mut self, key: &str) -> Result<&'a str> {
        self.values.remove(key).ok_or_else(|| Error::Parse(alloc::format!("`{}` needs parameter `{key}`", self.family)))
    }

    fn take_f64(&mut self, key: &str) -> Result<f64> {
        let raw = self.take(key)?;
        raw.parse().map_err(|_| Error::Parse(alloc::format!("`{key}={raw}` is not a number")))
    }

    fn take_usize(&mut self, key: &str) -> Result<usize> {
        let raw = self.take(key)?;
        raw.parse().map_err(|_| Error::Parse(alloc::format!("`{key}={raw}` is not a non-negative integer")))
    }

    fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => Err(Error::Parse(alloc::format!("`{}` has no parameter `{k}`", self.family))),
            None => Ok(()),
        }
    }
}

fn parse_map(raw: &str) -> Result<PiecewiseMap> {
    match raw {
        "id" => Ok(PiecewiseMap::identity()),
        "flip" => Ok(PiecewiseMap::reflection()),
        _ => {
            let c = raw.strip_prefix("shift:").ok_or_else(|| Error::Parse(alloc::format!("unknown map `h={raw}`")))?;
            let c: f64 = c.parse().map_err(|_| Error::Parse(alloc::format!("bad shift `{c}`")))?;
            PiecewiseMap::shift(c)
        }
    }
}

impl FromStr for CopulaModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        parse_tokens(&tokens)
    }
}

fn parse_tokens(tokens: &[&str]) -> Result<CopulaModel> {
    let (&name, rest) = tokens.split_first().ok_or_else(|| Error::Parse("empty family specification".into()))?;
    if name == "flip" {
        return Ok(parse_tokens(rest)?.flip());
    }
    let mut p = Params::parse(name, rest)?;
    let model = match name {
        "product" => {
            let dim = if p.values.contains_key("dim") { p.take_usize("dim")? } else { 2 };
            if !(2..=3).contains(&dim) {
                return Err(Error::Parse("product needs dim=2 or dim=3".into()));
            }
            CopulaModel::product_with_covariates(dim - 1)?
        }
        "comonotone" => CopulaModel::comonotone(),
        "cube" => CopulaModel::cube(),
        "cd" => CopulaModel::completely_dependent(parse_map(p.take("h")?)?),
        "cbperm" => {
            let n = p.take_usize("N")?;
            let sigma = p
                .take("sigma")?
                .split(',')
                .map(|v| v.trim().parse::<usize>())
                .collect::<core::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse("sigma must be a comma-separated list of integers".into()))?;
            if sigma.len() != n {
                return Err(Error::Parse(alloc::format!("sigma has {} entries but N={n}", sigma.len())));
            }
            CopulaModel::checkerboard_permutation(sigma)?
        }
        "ordsum" => CopulaModel::ordinal_sum(p.take_f64("b")?)?,
        "mo" => {
            let alpha = p.take_f64("alpha")?;
            CopulaModel::marshall_olkin(alpha, p.take_f64("beta")?)?
        }
        "clayton" => CopulaModel::clayton(p.take_f64("theta")?)?,
        "qbk" => {
            let tau = p.take_f64("tau")?;
            let mode = match p.take("mode")? {
                "lower" => BoundMode::Lower,
                "upper" => BoundMode::Upper,
                other => return Err(Error::Parse(alloc::format!("mode must be lower or upper, found `{other}`"))),
            };
            let n = p.take_usize("n")? as u64;
            CopulaModel::quantile_bound(tau, n, mode)?
        }
        "grid" => return Err(Error::Parse("grid models are loaded from files by the caller".into())),
        other => return Err(Error::Parse(alloc::format!("unknown family `{other}`"))),
    };
    p.finish()?;
    Ok(model)
}

fn map_name(h: &PiecewiseMap) -> String {
    if h.is_identity() {
        return "id".into();
    }
    if h.is_reflection() {
        return "flip".into();
    }
    match h.pieces() {
        [a, b] if a.increasing && b.increasing && a.start == 0.0 && (b.offset - (a.offset - 1.0)).abs() < 1e-15 => {
            alloc::format!("shift:{}", a.offset)
        }
        pieces => alloc::format!("custom({} pieces)", pieces.len()),
    }
}

impl fmt::Display for CopulaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaModel::Product { covariate_dim: 1 } => f.write_str("product"),
            CopulaModel::Product { covariate_dim } => write!(f, "product dim={}", covariate_dim + 1),
            CopulaModel::Comonotone => f.write_str("comonotone"),
            CopulaModel::CompletelyDependent(h) => write!(f, "cd h={}", map_name(h)),
            CopulaModel::CheckerboardPermutation { sigma } => {
                let list: Vec<String> = sigma.iter().map(ToString::to_string).collect();
                write!(f, "cbperm N={} sigma={}", sigma.len(), list.join(","))
            }
            CopulaModel::OrdinalSumPi { b } => write!(f, "ordsum b={b}"),
            CopulaModel::Cube3D => f.write_str("cube"),
            CopulaModel::MarshallOlkin { alpha, beta } => write!(f, "mo alpha={alpha} beta={beta}"),
            CopulaModel::Clayton { theta } => write!(f, "clayton theta={theta}"),
            CopulaModel::QuantileBoundKernel { tau, n, mode } => {
                let mode = match mode {
                    BoundMode::Lower => "lower",
                    BoundMode::Upper => "upper",
                };
                write!(f, "qbk tau={tau} mode={mode} n={n}")
            }
            CopulaModel::Grid(g) => write!(f, "grid dim={} N={}", g.dim(), g.resolution()),
            CopulaModel::Flipped(inner) => write!(f, "flip {inner}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_family() {
        for spec in [
            "product",
            "product dim=3",
            "comonotone",
            "cube",
            "cd h=id",
            "cd h=flip",
            "cd h=shift:0.25",
            "cbperm N=2 sigma=2,1",
            "ordsum b=0.25",
            "mo alpha=0.35 beta=0.65",
            "clayton theta=2",
            "qbk tau=0.3 mode=lower n=100",
            "flip mo alpha=0.35 beta=0.65",
        ] {
            let m: CopulaModel = spec.parse().unwrap_or_else(|e| panic!("{spec}: {e}"));
            let again: CopulaModel = m.to_string().parse().unwrap();
            assert_eq!(again, m, "{spec}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            "",
            "gumbel theta=2",
            "mo alpha=0.3",
            "mo alpha=0.3 beta=0.5 gamma=1",
            "cbperm N=3 sigma=2,1",
            "cbperm N=2 sigma=1,1",
            "clayton theta=-1",
            "qbk tau=0.3 mode=middle n=10",
            "ordsum b",
            "grid file=x.csv",
        ] {
            assert!(spec.parse::<CopulaModel>().is_err(), "{spec}");
        }
    }

    #[test]
    fn flip_prefix_simplifies() {
        let m: CopulaModel = "flip comonotone".parse().unwrap();
        assert_eq!(m, CopulaModel::CompletelyDependent(PiecewiseMap::reflection()));
        let back: CopulaModel = "flip flip clayton theta=2".parse().unwrap();
        assert_eq!(back, CopulaModel::clayton(2.0).unwrap());
    }
}
