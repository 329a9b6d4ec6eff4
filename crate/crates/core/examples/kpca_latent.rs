//! Kernel PCA coordinates, the latent kernel, and the hybrid target.

use klrfs::latent::{ComponentCount, HybridTarget, KpcaModel};
use klrfs::kernel::{kta, rbf_cross};
use klrfs::pipeline::{gen_synthetic, standardize};

fn main() -> klrfs::Result<()> {
    let s = gen_synthetic(60, 20, 3, 2.0, 7)?;
    let (x, _) = standardize(s.data.values())?;

    let model = KpcaModel::fit_rbf(x.view(), ComponentCount::default())?;
    println!(
        "kernel PCA: gamma {:.4}, {} components, captured variance {:.3}",
        model.train_gamma.unwrap_or(f64::NAN),
        model.num_components,
        model.captured_variance()
    );

    // out-of-sample projection of the first three rows
    let rows = x.slice(ndarray::s![..3, ..]);
    let z = model.transform(&rbf_cross(rows, x.view(), model.train_gamma.unwrap())?)?;
    println!("first latent coordinates:\n{:.3}", z.coords.slice(ndarray::s![.., ..3]));

    let h = HybridTarget::fit(x.view(), s.data.labels(), ComponentCount::default())?;
    for delta in [0.0, 0.5, 1.0] {
        let t = h.mix(delta)?;
        println!("delta {delta}: KTA(K_delta, K_yy) = {:.4}", kta(&t.k_delta, &h.k_yy)?);
    }
    Ok(())
}
