use std::path::Path;

use copreg_core::CopulaModel;

use crate::error::{CliError, CliResult};
use crate::formats::read_grid;

/// Parses a family specification, loading `grid file=<csv>` from disk.
pub fn parse_family(spec: &str) -> CliResult<CopulaModel> {
    let tokens: Vec<&str> = spec.split_whitespace().collect();
    let flips = tokens.iter().take_while(|t| **t == "flip").count();
    if tokens.get(flips) != Some(&"grid") {
        return spec.parse().map_err(CliError::from);
    }
    let file = match &tokens[flips + 1..] {
        [arg] => arg
            .strip_prefix("file=")
            .ok_or_else(|| CliError::Config(format!("grid family expects `file=<path>`, found `{arg}`")))?,
        _ => return Err(CliError::Config("grid family expects exactly one `file=<path>`".into())),
    };
    let mut model = CopulaModel::grid(read_grid(Path::new(file))?);
    for _ in 0..flips {
        model = model.flip();
    }
    Ok(model)
}
