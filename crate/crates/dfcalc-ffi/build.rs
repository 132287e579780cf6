fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let out = std::path::Path::new(&crate_dir).join("include").join("dfcalc.h");
    std::fs::create_dir_all(out.parent().unwrap()).expect("create include/");
    cbindgen::generate(&crate_dir)
        .expect("cbindgen failed")
        .write_to_file(out);
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
