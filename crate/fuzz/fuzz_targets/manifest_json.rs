#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(manifest) = gfk_cli::manifest::parse_manifest(text) {
            let again = gfk_cli::manifest::parse_manifest(&manifest.to_json()).unwrap();
            assert_eq!(again, manifest);
        }
    }
});
