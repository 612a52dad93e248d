//! Saves a designed generator set, reloads it, and converts it to CSV text
//! and back.

use uwofdm_lab::design::{DescentOptions, InitKind};
use uwofdm_lab::genmat::archive::GeneratorArchive;
use uwofdm_lab::harness::design_generators;
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let opts = DescentOptions {
        max_iters: 300,
        ..Default::default()
    };
    let (gens, _, _) = design_generators(&cfg, InitKind::Permutation, &opts, 20)?;
    let archive = GeneratorArchive::new(gens, &cfg);

    let mut bytes = Vec::new();
    archive.write_to(&mut bytes)?;
    let back = GeneratorArchive::read_from(bytes.as_slice())?;
    back.check_config(&cfg)?;
    println!(
        "binary archive: {} bytes, identical after reload: {}",
        bytes.len(),
        back.set == archive.set
    );

    let mut csv = Vec::new();
    archive.export_csv(&mut csv)?;
    let from_csv = GeneratorArchive::import_csv(csv.as_slice(), &cfg)?;
    println!(
        "csv export: {} lines, identical after import: {}",
        csv.split(|b| *b == b'\n').count() - 1,
        from_csv.set == archive.set
    );
    Ok(())
}
