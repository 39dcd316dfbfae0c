//! Schatten losses, subspace distances and the rate constants used to
//! rescale them.
//!
//! cargo run --release --example spectral_diagnostics

use twoway_denoise::experiments::{generate_instance, GeneratorSpec};
use twoway_denoise::spectral::{rate_psi_q, table2_rescale};
use twoway_denoise::{compose_signal, loss_lq, run_pipeline, sin_theta, PipelineConfig};

fn main() -> twoway_denoise::Result<()> {
    let spec = GeneratorSpec::desk().with_seed(21);
    let (truth, x) = generate_instance(&spec)?;
    let m = compose_signal(&truth);
    let out = run_pipeline(&x, &PipelineConfig::simulation())?;
    let res = out.result.as_ref().expect("signal detected");

    let start_v = sin_theta(&out.init.v0, truth.right())?;
    let final_v = sin_theta(&res.v_hat, truth.right())?;
    let final_u = sin_theta(&res.u_hat, truth.left())?;
    println!("right subspace sin-theta (frobenius / operator):");
    println!("  start  {:.4} / {:.4}", start_v.frobenius_sin_theta, start_v.operator_sin_theta);
    println!("  final  {:.4} / {:.4}", final_v.frobenius_sin_theta, final_v.operator_sin_theta);
    println!("left subspace after iteration: {:.4}", final_u.frobenius_sin_theta);

    let (k, l, r) = (spec.k, spec.l, spec.r);
    println!("{:>5} {:>12} {:>12} {:>10} {:>12}", "q", "loss", "rate", "loss/rate", "loss/rescale");
    for q in [1.0, 1.5, 2.0] {
        let loss = loss_lq(&m, &out.estimate, q)?;
        let psi = rate_psi_q(spec.m, spec.n, k, l, r, q)?;
        let resc = table2_rescale(q, spec.m, k, l, r);
        println!("{q:>5.1} {loss:>12.2} {psi:>12.2} {:>10.3} {:>12.3}", loss / psi, loss / resc);
    }
    Ok(())
}
