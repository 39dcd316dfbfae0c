//! The four shrinkage rules on scalars and on matrix rows.
//!
//! cargo run --example thresholding

use nalgebra::DMatrix;
use twoway_denoise::{threshold_rows, ThresholdRule};

fn main() -> twoway_denoise::Result<()> {
    let rules = [
        ThresholdRule::Hard,
        ThresholdRule::Soft,
        ThresholdRule::scad(3.7)?,
        ThresholdRule::mcp(3.0)?,
    ];
    let t = 2.0;
    print!("{:>6}", "x");
    for rule in &rules {
        print!("{:>14}", rule.to_string());
    }
    println!();
    for x in [0.5, 2.0, 2.5, 4.0, 6.0, 8.0, 12.0] {
        print!("{x:>6.1}");
        for rule in &rules {
            print!("{:>14.4}", rule.apply(x, t));
        }
        println!();
    }

    // rows are shrunk by their Euclidean length; directions are kept
    let a = DMatrix::from_row_slice(3, 2, &[3.0, 4.0, 0.3, -0.4, -6.0, 8.0]);
    for rule in &rules {
        let out = threshold_rows(&a, 3.0, *rule);
        let norms: Vec<String> = out.row_iter().map(|r| format!("{:.3}", r.norm())).collect();
        println!("{rule}: row norms 5, 0.5, 10 -> {}", norms.join(", "));
    }
    Ok(())
}
