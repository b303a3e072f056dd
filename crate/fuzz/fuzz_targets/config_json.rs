#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = gfk_cli::config::parse_config(text) {
            // whatever parses must validate and survive a round trip
            config.validate().expect("parsed config validates");
            let again = serde_json::to_string(&config).unwrap();
            assert_eq!(gfk_cli::config::parse_config(&again).unwrap(), config);
        }
    }
});
