//! Stream the anti-chain error curve of eg3 and regress its dimension.

use overlap_quant::model::load_fixture;
use overlap_quant::quantization::{curve_dimension, error_curve, DEFAULT_STATE_CAP};
use overlap_quant::spectral::{solve_dimension_root, RootKind, ROOT_TOL};

fn main() -> overlap_quant::Result<()> {
    let spec = load_fixture("eg3")?;
    let sr = solve_dimension_root(&spec, RootKind::Full, ROOT_TOL)?;
    let curve = error_curve(&spec, 1, 25, &[sr], DEFAULT_STATE_CAP)?;
    println!("{:>3} {:>12} {:>12} {:>9}", "k", "phi", "surrogate", "log F");
    for row in &curve.rows {
        println!("{:>3} {:>12} {:>12.4e} {:>9.4}", row.k, row.phi, row.surrogate(), row.log_f[0]);
    }
    let fit = curve_dimension(&curve, spec.r(), 5, 25)?;
    println!("slope {:.5} (r2 {:.5}), sr {sr:.5}, {} states", fit.slope, fit.r2, curve.states);
    Ok(())
}
