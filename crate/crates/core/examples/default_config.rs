//! Prints the default simulation config as TOML.
//!
//! ```text
//! cargo run --example default_config > my.toml
//! ```

fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!(
        "{}",
        toml::to_string(&idml::simulation::SimConfig::default())?
    );
    Ok(())
}
