//! Writes the stock run configurations (desk and full profiles) into a
//! directory, default `configs/`:
//!
//! ```text
//! cargo run -p arst-core --example write_configs [-- <dir>]
//! ```

use std::path::PathBuf;

use arst_core::formats::RunConfig;

fn main() -> arst_core::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("configs"));
    std::fs::create_dir_all(&dir)?;
    RunConfig::desk().save(&dir.join("desk.json"))?;
    RunConfig::full().save(&dir.join("full.json"))?;
    println!("wrote {}/desk.json and {}/full.json", dir.display(), dir.display());
    Ok(())
}
