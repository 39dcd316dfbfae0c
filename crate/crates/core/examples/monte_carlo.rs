//! Monte-Carlo runs over the signal-strength or sparsity sweep.
//!
//! cargo run --release --example monte_carlo -- [table1|table2] [desk|full] [reps] [seed]

use std::time::Instant;

use twoway_denoise::experiments::{run_experiment, table1_scenarios, table2_scenarios, ReplicationSettings, Scale};

fn main() -> twoway_denoise::Result<()> {
    let mut args = std::env::args().skip(1);
    let table = args.next().unwrap_or_else(|| "table1".into());
    let scale: Scale = args.next().as_deref().unwrap_or("desk").parse()?;
    let reps: usize = args.next().map_or(10, |s| s.parse().expect("reps"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));
    let settings = ReplicationSettings::default();

    let scenarios = match table.as_str() {
        "table2" => table2_scenarios(scale),
        _ => table1_scenarios(scale),
    };

    println!(
        "{:>16} {:>10} {:>8} {:>12} {:>8} {:>7} {:>7} {:>6} {:>7}",
        "setting", "mean L2", "se", "mean L1", "se", "L2/rsc", "L1/rsc", "r_hat", "secs"
    );
    for (label, spec) in scenarios {
        let start = Instant::now();
        let report = run_experiment(&label, &spec, reps, seed, &settings)?;
        println!(
            "{:>16} {:>10.2} {:>8.2} {:>12.2} {:>8.2} {:>7.3} {:>7.3} {:>6.2} {:>7.1}",
            label,
            report.mean_l2,
            report.se_l2,
            report.mean_l1,
            report.se_l1,
            report.rescaled_l2,
            report.rescaled_l1,
            report.rank_recovery_rate,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
