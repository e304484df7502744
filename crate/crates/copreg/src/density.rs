use std::path::{Path, PathBuf};

use copreg_core::regression::{grid_quantile, grid_regression};
use copreg_core::simulation::resolution;
use copreg_core::{empirical_checkerboard, pseudo_ranks, CopulaModel, QuadratureSpec, RankedSample, RngStream};

use crate::error::{CliError, CliResult};
use crate::formats::{density_csv, step_csv, write_file, write_grid, xy_csv};

/// Points of the dense truth curves, `x = k / (TRUTH_POINTS - 1)`.
pub const TRUTH_POINTS: usize = 1024;

pub enum DensitySource {
    /// Draw `n` points from the model with stream `(seed, 0)`.
    Model { model: CopulaModel, n: usize, seed: u64 },
    /// Externally supplied ranks; the model, if any, only provides truth curves.
    Data { ranked: RankedSample, model: Option<CopulaModel> },
}

pub struct DensityRequest {
    pub source: DensitySource,
    pub s: f64,
    /// Overrides `N = floor(n^s)`.
    pub resolution: Option<usize>,
    pub tau: f64,
    pub quad: QuadratureSpec,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct DensityOutput {
    pub n: usize,
    pub n_cells: usize,
    pub files: Vec<PathBuf>,
}

pub fn emit_density(req: &DensityRequest) -> CliResult<DensityOutput> {
    let (ranked, model) = match &req.source {
        DensitySource::Model { model, n, seed } => {
            if model.covariate_dim() != 1 {
                return Err(CliError::Config("density output needs a bivariate family".into()));
            }
            let mut rng = RngStream::new(*seed, 0);
            (pseudo_ranks(&model.sample(*n, &mut rng))?, Some(model))
        }
        DensitySource::Data { ranked, model } => (ranked.clone(), model.as_ref()),
    };
    let n = ranked.n();
    let n_cells = match req.resolution {
        Some(r) => r,
        None => resolution(n, req.s)?,
    };
    let grid = empirical_checkerboard(&ranked, n_cells)?;
    let mut files = Vec::new();
    let mut put = |name: &str, contents: String| -> CliResult<()> {
        let path = req.out.join(name);
        write_file(&path, &contents)?;
        files.push(path);
        Ok(())
    };
    let grid_path = req.out.join("grid.csv");
    write_grid(&grid_path, &grid)?;
    put("density.csv", density_csv(&grid))?;
    put("mean_step.csv", step_csv(&grid_regression(&grid)?))?;
    put("quantile_step.csv", step_csv(&grid_quantile(&grid, req.tau)?))?;
    if let Some(model) = model {
        let xs = (0..TRUTH_POINTS).map(|k| k as f64 / (TRUTH_POINTS - 1) as f64);
        let mean: Vec<(f64, f64)> = xs.clone().map(|x| (x, model.regression(&[x], req.quad))).collect();
        let quant = xs.map(|x| Ok((x, model.quantile(&[x], req.tau)?))).collect::<CliResult<Vec<_>>>()?;
        put("truth_mean.csv", xy_csv("x,value", mean))?;
        put("truth_quantile.csv", xy_csv("x,value", quant))?;
    }
    files.insert(0, grid_path.with_extension("json"));
    files.insert(0, grid_path);
    Ok(DensityOutput { n, n_cells, files })
}

pub fn file_list(out: &DensityOutput) -> String {
    out.files.iter().map(|p| format!("{}\n", Path::new(p).display())).collect()
}
