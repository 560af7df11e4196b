use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = PathBuf::from(&crate_dir).join("include");
    std::fs::create_dir_all(&out).expect("create include dir");

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("TAILIX_H".into()),
        cpp_compat: true,
        documentation: true,
        after_includes: Some("typedef struct TailixConfig TailixConfig;".into()),
        export: cbindgen::ExportConfig {
            exclude: vec!["TailixConfig".into()],
            ..Default::default()
        },
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            ..Default::default()
        },
        ..Default::default()
    };

    cbindgen::Builder::new()
        .with_config(config)
        .with_crate(&crate_dir)
        .generate()
        .expect("generate C bindings")
        .write_to_file(out.join("tailix.h"));

    println!("cargo:rerun-if-changed=src/lib.rs");
}
