//! Print the built-in default run configuration as JSON.

fn main() {
    let cfg = leosim_core::RunConfig::default();
    println!("{}", serde_json::to_string_pretty(&cfg).unwrap());
}
