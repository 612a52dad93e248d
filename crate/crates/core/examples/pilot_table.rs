//! Minimum-energy PSK pilots for the 64-point reference setup.
//!
//! ```text
//! cargo run --example pilot_table
//! ```

use uwofdm_lab::harness::run_pilot_table;
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    println!("{:>4}  {:>8}  exponents", "|A|", "N*E_p");
    for row in run_pilot_table(&cfg, &[2, 4, 6, 10, 20])? {
        println!("{:>4}  {:>8.4}  {:?}", row.cardinality, row.energy, row.exponents);
    }
    Ok(())
}
