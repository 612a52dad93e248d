//! Writes the reference configuration as TOML, edits it, and shows the
//! validation report for an inconsistent variant.

use uwofdm_lab::sysmodel::validate_config;
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let text = cfg.to_toml_string();
    println!("{text}");
    println!("hash {}", cfg.hash_hex());

    let broken = SystemConfig::from_toml_str(&text.replace("n_p = 4", "n_p = 3"))?;
    for problem in validate_config(&broken) {
        println!("invalid: {problem}");
    }
    Ok(())
}
