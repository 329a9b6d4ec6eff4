//! KLR-FS against ANOVA and SVM-RFE on shared splits, written to disk.

use klrfs::pipeline::{gen_synthetic, run_benchmark, ExperimentConfig, Method};

fn main() -> klrfs::Result<()> {
    let s = gen_synthetic(100, 200, 8, 1.5, 12)?;
    let cfg = ExperimentConfig {
        methods: vec![Method::Klrfs, Method::Anova, Method::SvmRfe],
        p_select: vec![5, 10],
        n_repeats: 3,
        ..Default::default()
    };
    let report = run_benchmark(&cfg, &s.data)?;
    print!("{}", report.summary_table());

    let out = std::env::temp_dir().join("klrfs-benchmark-example");
    report.write(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
