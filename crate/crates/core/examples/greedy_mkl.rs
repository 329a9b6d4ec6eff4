//! Greedy alignment-maximizing selection of feature-wise kernels.

use klrfs::latent::{ComponentCount, HybridTarget};
use klrfs::mkl::{build_bank, compose_gram, greedy_select, DEFAULT_MIN_GAIN};
use klrfs::kernel::kta;
use klrfs::pipeline::{gen_synthetic, standardize};

fn main() -> klrfs::Result<()> {
    let s = gen_synthetic(80, 100, 5, 2.0, 3)?;
    println!("planted: {:?}", s.meta.planted);
    let (x, _) = standardize(s.data.values())?;

    let target = HybridTarget::fit(x.view(), s.data.labels(), ComponentCount::default())?.mix(0.6)?;
    let bank = build_bank(x.view(), &target.k_delta, &[0.01, 0.1, 1.0, 10.0])?;
    let solution = greedy_select(&bank, &target.k_delta, 10, DEFAULT_MIN_GAIN)?;

    for (step, ((f, w), a)) in solution
        .selected
        .iter()
        .zip(&solution.weights)
        .zip(&solution.kta_trace)
        .enumerate()
    {
        println!("step {step}: feature {f:>3} gamma {:>5} weight {w:.4} KTA {a:.5}", bank.gammas()[*f]);
    }
    let k = compose_gram(&solution, x.view())?;
    println!("recomputed KTA {:.5}", kta(&k, &target.k_delta)?);
    println!("first three kernels: {:?}", solution.truncate(3).weights);
    Ok(())
}
