//! Sign of s2r − s1r over a log grid of r for a Case I system.

use overlap_quant::model::load_fixture;
use overlap_quant::spectral::small_r_scan;

fn main() -> overlap_quant::Result<()> {
    let spec = load_fixture("eg1-default")?;
    let grid: Vec<f64> = (0..=12).map(|i| 10f64.powf(-3.0 + i as f64 / 3.0)).collect();
    let (rows, prefix) = small_r_scan(&spec, &grid)?;
    for row in &rows {
        println!("r = {:<10.4e} s1r = {:.6}  s2r = {:.6}  sign {:+}", row.r, row.s1r, row.s2r, row.sign);
    }
    println!("s2r > s1r on the first {prefix} grid points");
    Ok(())
}
