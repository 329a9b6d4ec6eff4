//! RBF Gram matrices, the label kernel, and kernel-target alignment.

use klrfs::kernel::{alignment, kta, rbf_gram, target_from_labels, GramMatrix};
use ndarray::{array, Array2};

fn main() -> klrfs::Result<()> {
    let x = array![[0.0, 1.0], [0.2, 0.9], [2.0, -1.0], [2.1, -1.2]];
    let y = array![1.0, 1.0, -1.0, -1.0];
    let target = target_from_labels(y.view())?;
    println!("label kernel:\n{}", target.entries());

    for gamma in [0.01, 0.1, 1.0, 10.0] {
        let k = rbf_gram(x.view(), gamma)?;
        println!("gamma {gamma:>5}: KTA = {:.4}", kta(&k, &target)?);
    }

    let eye = GramMatrix::square(Array2::eye(2))?;
    let ones = GramMatrix::square(Array2::ones((2, 2)))?;
    println!("alignment(I, 11^T) = {:.5}", alignment(&eye, &ones)?);
    Ok(())
}
