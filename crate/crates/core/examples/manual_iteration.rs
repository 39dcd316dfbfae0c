//! Drive the iteration one step at a time from a chosen start and watch the
//! supports and subspace changes settle.
//!
//! cargo run --release --example manual_iteration

use twoway_denoise::denoise::Iterate;
use twoway_denoise::experiments::{generate_instance, GeneratorSpec};
use twoway_denoise::init::{initialize, InitConfig};
use twoway_denoise::{compute_gamma, denoise_step, sin_theta, DenoiseConfig, StoppingPolicy, ThresholdRule};

fn main() -> twoway_denoise::Result<()> {
    let spec = GeneratorSpec::desk().with_seed(2);
    let (truth, x) = generate_instance(&spec)?;
    let init = initialize(&x, spec.sigma, &InitConfig { beta: 3.0, ..InitConfig::default() })?;
    let gamma = compute_gamma(init.rank, 3.0, x.nrows());
    let config = DenoiseConfig {
        rank: init.rank,
        sigma: spec.sigma,
        gamma_u: gamma,
        gamma_v: gamma,
        threshold_rule: ThresholdRule::Soft,
        stopping: StoppingPolicy::FixedSteps(12),
        max_iterations: 12,
    };

    let mut state = Iterate::start(Some(init.u0.clone()), init.v0.clone());
    println!("{:>4} {:>6} {:>6} {:>12} {:>12} {:>10}", "step", "rows", "cols", "dU", "dV", "sin(V,V*)");
    for _ in 0..12 {
        let (next, rec) = denoise_step(&x, &state, &config)?;
        let dist = sin_theta(&next.v, truth.right())?.frobenius_sin_theta;
        println!(
            "{:>4} {:>6} {:>6} {:>12.3e} {:>12.3e} {:>10.4}",
            rec.step,
            rec.u_rows_kept,
            rec.v_rows_kept,
            rec.u_subspace_delta.unwrap_or(f64::NAN),
            rec.v_subspace_delta,
            dist
        );
        state = next;
    }
    Ok(())
}
