//! Denoise a matrix stored as CSV and write the estimate back out; the same
//! path the `twoway denoise` command takes.
//!
//! cargo run --release --example csv_files

use twoway_denoise::experiments::{generate_instance, GeneratorSpec};
use twoway_denoise::io::{read_matrix_file, write_matrix_file};
use twoway_denoise::{run_pipeline, ObservedMatrix, PipelineConfig};

fn main() -> twoway_denoise::Result<()> {
    let dir = std::env::temp_dir().join("twoway-csv-example");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("x.csv");
    let output = dir.join("mhat.csv");

    // a wide matrix: the pipeline transposes internally and back
    let (_, x) = generate_instance(&GeneratorSpec::desk().with_seed(8))?;
    write_matrix_file(&input, &x.transpose().into_matrix())?;

    let x = ObservedMatrix::new(read_matrix_file(&input)?)?;
    let out = run_pipeline(&x, &PipelineConfig::default())?;
    write_matrix_file(&output, &out.estimate)?;

    let nonzero = out.estimate.iter().filter(|v| **v != 0.0).count();
    println!("read {}x{} from {}", x.nrows(), x.ncols(), input.display());
    println!("rank {}, transposed internally: {}", out.rank(), out.transposed);
    println!("wrote {} ({} nonzero entries)", output.display(), nonzero);
    Ok(())
}
