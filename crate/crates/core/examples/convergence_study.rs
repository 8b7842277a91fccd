//! Sample-quadrupling convergence study on the toy problem: PDF residues
//! between successive runs shrink as n grows, while the low-order moment
//! residues sit far below them.
//!
//! Run with `cargo run --release --example convergence_study`.

use parmc::campaign::convergence_study;
use parmc::cost::PriceSheet;
use parmc::engine::RunConfig;

fn main() {
    let mut base = RunConfig::toy(4096, 11);
    base.n_serial = 256;
    base.n_workers = 2;
    base.output_dir = "out/convergence".into();

    let study = convergence_study(
        &base,
        &[4096, 16384, 65536, 262144],
        0.05,
        &base.output_dir,
        &PriceSheet::default(),
    )
    .expect("study failed");

    println!("n_list: {:?}", study.n_list);
    for p in &study.pairs {
        println!(
            "  n={:>7} -> 4n={:>7}: pdf residue {:.5}, mean residue {:.2e}, std residue {:.2e}",
            p.n_small, p.n_large, p.pdf.residue, p.mean_residue, p.std_residue
        );
    }
    println!("converged at tolerance 0.05: {}", study.converged);
    println!("artifacts in: {}", base.output_dir.display());
}
