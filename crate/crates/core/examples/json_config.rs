//! Build a system from a JSON document instead of a fixture.

use overlap_quant::model::{from_json_str, validate};
use overlap_quant::spectral::dimension_report;

const CONFIG: &str = r#"{
  "N": 2,
  "P": [["1/4", "1/4", "1/4", "1/4"],
        ["1/4", "1/4", "1/4", "1/4"],
        ["1/4", "1/4", "1/4", "1/4"],
        ["1/4", "1/4", "1/4", "1/4"]],
  "chi": ["1/4", "1/4", "1/4", "1/4"],
  "ratios": {"1,1": 0.3, "1,2": 0.2, "2,1": 0.25, "2,2": 0.3},
  "r": 1.5
}"#;

fn main() -> overlap_quant::Result<()> {
    let spec = from_json_str(CONFIG)?;
    let rep = validate(&spec);
    println!("case {}", rep.case);
    let d = dimension_report(&spec, 10)?;
    println!("sr = {:.8}", d.sr);
    if let Some(t) = d.tr {
        println!("tr = {:.6} in [{:.6}, {:.6}]", t.tr, t.tr_lo, t.tr_hi);
    }
    Ok(())
}
