//! Replicate sampling, parallel when the `parallel` feature is on.
//!
//! Replicate `i` always uses its own derived stream and results are
//! assembled by index, so the output does not depend on thread count. When
//! several replicates fail, the error of the lowest index is returned.

use immigration_core::process::{fdd_replicate, FddSample, Mode, StationaryOptions};
use immigration_core::{InterarrivalLaw, Kernel, ProcessSample, Result, StreamKey};

#[cfg(feature = "parallel")]
fn run_all(n: usize, f: impl Fn(usize) -> Result<ProcessSample> + Sync + Send) -> Vec<Result<ProcessSample>> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all(n: usize, f: impl Fn(usize) -> Result<ProcessSample>) -> Vec<Result<ProcessSample>> {
    (0..n).map(f).collect()
}

pub fn fdd_sample_parallel(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    mode: Mode,
    u_grid: &[f64],
    n_replicates: usize,
    base: StreamKey,
    opts: &StationaryOptions,
) -> Result<FddSample> {
    let results = run_all(n_replicates, |i| fdd_replicate(law, kernel, mode, u_grid, opts, base, i));
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FddSample::from_replicates(u_grid, mode, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use immigration_core::process::fdd_sample_keyed;
    use immigration_core::EtaLaw;

    #[test]
    fn matches_serial_sampler() {
        let law = InterarrivalLaw::exponential(1.0).unwrap();
        let kernel = Kernel::exp_decay(EtaLaw::exponential(1.0).unwrap(), 0.7).unwrap();
        let opts = StationaryOptions::default();
        let base = StreamKey::root(3);
        for mode in [Mode::Transient { t: 5.0 }, Mode::Stationary] {
            let a = fdd_sample_parallel(&law, &kernel, mode, &[0.0, 2.0], 64, base, &opts).unwrap();
            let b = fdd_sample_keyed(&law, &kernel, mode, &[0.0, 2.0], 64, base, &opts).unwrap();
            assert_eq!(a, b);
        }
    }
}
