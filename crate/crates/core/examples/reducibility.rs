//! Decide whether the projected measure is Markov on the base alphabet.

use overlap_quant::measure::{classify_reducibility, ReducibilityOptions, ReducibilityStatus};
use overlap_quant::model::load_fixture;

fn main() -> overlap_quant::Result<()> {
    for name in ["eg2-P2", "eg5"] {
        let v = classify_reducibility(&load_fixture(name)?, ReducibilityOptions::default())?;
        match v.status {
            ReducibilityStatus::Reducible(cert) => {
                println!("{name}: reducible via {cert:?}");
                if let Some((p, chi)) = v.reduced {
                    println!("  reduced kernel {p:?}, initial {chi:?}");
                }
            }
            ReducibilityStatus::NotReducible { witnesses, source } => {
                println!("{name}: not reducible ({source:?})");
                for w in witnesses.iter().take(3) {
                    println!("  {w}");
                }
            }
            ReducibilityStatus::Unknown { depth } => println!("{name}: unknown after depth {depth}"),
        }
    }
    Ok(())
}
