//! Noise estimation, screening and the data-driven rank on one instance.
//!
//! cargo run --release --example rank_selection [seed]

use twoway_denoise::experiments::{generate_instance, GeneratorSpec};
use twoway_denoise::init::{estimate_sigma, initialize, rank_cutoff, InitConfig};

fn main() -> twoway_denoise::Result<()> {
    let seed = std::env::args().nth(1).map_or(5, |s| s.parse().expect("seed"));
    let spec = GeneratorSpec::table1(1.0).with_seed(seed);
    let (truth, x) = generate_instance(&spec)?;
    let (m, n) = x.shape();

    let noise = estimate_sigma(&x)?;
    let init = initialize(&x, noise.sigma, &InitConfig::default())?;
    let (rows, cols) = (init.sets.rows.len(), init.sets.cols.len());
    let delta = rank_cutoff(rows, cols, m, n).expect("nonempty screen");

    println!("sigma estimate {:.4} (true {})", noise.sigma, spec.sigma);
    let true_rows = init.sets.rows.iter().filter(|i| truth.row_support().contains(i)).count();
    let true_cols = init.sets.cols.iter().filter(|j| truth.col_support().contains(j)).count();
    println!("screened {rows} rows ({true_rows} in the true support) and {cols} columns ({true_cols})");
    println!("cutoff sigma*delta = {:.2}", noise.sigma * delta);
    for (s, v) in init.screened_spectrum.iter().take(init.r_hat + 3).enumerate() {
        let mark = if *v >= noise.sigma * delta { "keep" } else { "" };
        println!("  s_{:<3} {v:>9.2}  {mark}", s + 1);
    }
    println!("selected rank {} (true {})", init.r_hat, truth.rank());
    Ok(())
}
