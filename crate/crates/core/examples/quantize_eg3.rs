//! Lloyd quantizers on samples of μ and the fitted quantization dimension.

use overlap_quant::model::load_fixture;
use overlap_quant::quantization::{empirical_dimension, LloydOptions};

fn main() -> overlap_quant::Result<()> {
    let spec = load_fixture("eg3")?;
    let e = empirical_dimension(&spec, &[4, 8, 16, 32, 64], 20_000, 0, LloydOptions::default())?;
    for (k, d) in &e.rows {
        println!("k = {k:>3}  distortion {d:.5e}");
    }
    let (lo, hi) = e.fit.interval();
    println!("slope {:.4} in [{lo:.4}, {hi:.4}] ({} samples, depth {})", e.fit.slope, e.samples, e.depth);
    Ok(())
}
