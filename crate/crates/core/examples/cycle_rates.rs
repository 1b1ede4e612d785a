//! Compare decay rates of μ along cycles with a Markov surrogate.

use overlap_quant::measure::{equivalence_probe, SurrogateKind};
use overlap_quant::model::load_fixture;

fn main() -> overlap_quant::Result<()> {
    let spec = load_fixture("eg5")?;
    let rep = equivalence_probe(&spec, SurrogateKind::PTilde, 3)?;
    for c in &rep.rows {
        println!("{:<10} rate {:.6}  surrogate {:?}", c.cycle.to_string(), c.rate, c.surrogate_rate);
    }
    println!("{:?}", rep.verdict);
    Ok(())
}
