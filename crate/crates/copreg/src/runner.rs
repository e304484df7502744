use std::time::Instant;

use copreg_core::simulation::{resolution, run_replication, ErrorTable, ExperimentConfig, TruthTable};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
    /// Record wall time per replication. Off by default so reruns are byte-identical.
    pub timing: bool,
}

/// Runs all replications in parallel. The table does not depend on the
/// number of workers: every replication owns its random stream and rows are
/// collected in `(n, rep)` order.
pub fn run_convergence_parallel(config: &ExperimentConfig, opts: RunOptions) -> CliResult<ErrorTable> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        let mut cells: Vec<usize> = config.sizes.iter().map(|&n| resolution(n, config.s)).collect::<Result<_, _>>()?;
        cells.dedup();
        let truths: Vec<TruthTable> = cells
            .par_iter()
            .map(|&nc| TruthTable::new(&config.family, nc, &config.tau_list, config.quad))
            .collect::<Result<_, _>>()?;
        let jobs: Vec<(usize, usize)> =
            config.sizes.iter().flat_map(|&n| (0..config.reps).map(move |rep| (n, rep))).collect();
        let chunks: Vec<_> = jobs
            .par_iter()
            .map(|&(n, rep)| {
                let nc = resolution(n, config.s)?;
                let truth = truths.iter().find(|t| t.resolution() == nc).expect("truth for every N");
                let start = Instant::now();
                let mut rows = run_replication(config, truth, n, rep)?;
                if opts.timing {
                    let secs = start.elapsed().as_secs_f64();
                    rows.iter_mut().for_each(|r| r.seconds = secs);
                }
                Ok(rows)
            })
            .collect::<Result<_, copreg_core::Error>>()?;
        let mut table = ErrorTable { rows: chunks.into_iter().flatten().collect() };
        table.sort();
        Ok(table)
    })
}
