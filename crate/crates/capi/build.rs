fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = std::path::Path::new(&crate_dir).join("include/evistate.h");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        header: Some("/* C ABI for the evistate engine. Generated by cbindgen; do not edit. */".into()),
        include_guard: Some("EVISTATE_H".into()),
        cpp_compat: true,
        documentation: true,
        export: cbindgen::ExportConfig {
            exclude: vec!["EvistateScenario".into()],
            ..Default::default()
        },
        after_includes: Some(
            "\n/* Opaque scenario handle. */\ntypedef struct EvistateScenario EvistateScenario;".into(),
        ),
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen generates the C header")
        .write_to_file(header);
    println!("cargo:rerun-if-changed=src/lib.rs");
}
