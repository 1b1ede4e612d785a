//! Block roots, the full root and the pressure bracket for two fixtures.

use overlap_quant::model::load_fixture;
use overlap_quant::spectral::{dimension_report, DEFAULT_NMAX};

fn main() -> overlap_quant::Result<()> {
    for name in ["eg1-default", "eg3"] {
        let d = dimension_report(&load_fixture(name)?, DEFAULT_NMAX)?;
        println!("{name} (r = {})", d.r);
        println!("  s1r = {:?}  s2r = {:?}  sr = {:.10}", d.s1r, d.s2r, d.sr);
        if let Some((hat, a)) = d.ar {
            println!("  ar  = {a:.10} ({})", hat.name());
        }
        if let Some(t) = d.tr {
            println!("  tr  = {:.6} in [{:.6}, {:.6}] at n_max = {}", t.tr, t.tr_lo, t.tr_hi, t.n_max);
        }
    }
    Ok(())
}
