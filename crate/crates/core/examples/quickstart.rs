//! Draw a small sparse low-rank instance, denoise it and score the estimate.
//!
//! cargo run --release --example quickstart

use twoway_denoise::experiments::{generate_instance, GeneratorSpec};
use twoway_denoise::{compose_signal, loss_lq, run_pipeline, PipelineConfig};

fn main() -> twoway_denoise::Result<()> {
    let spec = GeneratorSpec::desk().with_seed(11);
    let (truth, x) = generate_instance(&spec)?;
    let m = compose_signal(&truth);

    let out = run_pipeline(&x, &PipelineConfig::simulation())?;
    let res = out.result.as_ref().expect("signal detected");

    println!("data {}x{}, true rank {}, selected rank {}", x.nrows(), x.ncols(), truth.rank(), out.rank());
    println!("noise estimate {:.4}, threshold {:.3}, step budget {}", out.sigma, out.sigma * out.gamma, out.t_hat.steps);
    println!(
        "stopped after {} steps ({:?}); kept {} rows and {} columns",
        res.iterations_run,
        res.stop_reason,
        res.row_support.len(),
        res.col_support.len()
    );
    println!("squared Frobenius error: raw {:.1}, denoised {:.1}", loss_lq(&m, x.matrix(), 2.0)?, loss_lq(&m, &out.estimate, 2.0)?);
    Ok(())
}
