//! Classify every built-in fixture and list the conditions it fails.

use overlap_quant::model::{load_fixture, validate, FIXTURE_NAMES};

fn main() -> overlap_quant::Result<()> {
    for name in FIXTURE_NAMES {
        let spec = load_fixture(name)?;
        let rep = validate(&spec);
        let failing: Vec<String> = rep
            .flags()
            .iter()
            .filter(|f| !f.pass)
            .map(|f| match f.first_witness() {
                Some(w) => format!("{} at {w}", f.name),
                None => f.name.to_string(),
            })
            .collect();
        println!("{name:<12} N={} {:<7} failing: {}", spec.n_base(), rep.case.to_string(), failing.join("; "));
    }
    Ok(())
}
