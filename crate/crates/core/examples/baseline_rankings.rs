//! ANOVA F-test and SVM-RFE rankings next to KLR-FS on the same data.

use klrfs::baselines::{anova_rank, svm_rfe, DEFAULT_DROP_FRACTION};
use klrfs::pipeline::{gen_synthetic, select_on_dataset, standardize, ExperimentConfig};

fn main() -> klrfs::Result<()> {
    let s = gen_synthetic(80, 60, 5, 1.5, 9)?;
    println!("planted:  {:?}", s.meta.planted);
    let (x, _) = standardize(s.data.values())?;
    let data = s.data.with_values(x)?;

    let anova = anova_rank(&data)?;
    println!("ANOVA:    {:?}", anova.top(5));

    let rfe = svm_rfe(&data, 5, 1.0, DEFAULT_DROP_FRACTION)?;
    println!("SVM-RFE:  {:?} after {} rounds", rfe.top(5), rfe.rounds);

    let sel = select_on_dataset(&ExperimentConfig::default(), &s.data, 0.6, 5)?;
    println!("KLR-FS:   {:?}", sel.selected);
    Ok(())
}
