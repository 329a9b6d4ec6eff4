//! Test AUC and redundancy across mixture coefficients.

use klrfs::pipeline::{gen_synthetic, run_delta_sweep, ExperimentConfig};

fn main() -> klrfs::Result<()> {
    let s = gen_synthetic(80, 100, 6, 1.5, 4)?;
    let cfg = ExperimentConfig {
        p_select: vec![5, 10],
        n_repeats: 3,
        ..Default::default()
    };
    let report = run_delta_sweep(&cfg, &s.data)?;
    print!("{}", report.summary_table());
    Ok(())
}
