use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = PathBuf::from(env::var("OUT_DIR").unwrap()).join("colloquy.h");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
            // Keep a browsable copy next to the sources for C consumers.
            let checked_in = PathBuf::from(&crate_dir).join("include/colloquy.h");
            let _ = fs::create_dir_all(checked_in.parent().unwrap());
            let _ = fs::copy(&header, &checked_in);
        }
        Err(e) => println!("cargo:warning=header generation failed: {e}"),
    }
}
