#![no_main]

use libfuzzer_sys::fuzz_target;
use regenloc::io::{load_instance, save_instance};

fuzz_target!(|data: &[u8]| {
    if let Ok(inst) = load_instance(data) {
        let again = load_instance(&save_instance(&inst)).expect("saved instance reloads");
        assert_eq!(inst, again);
    }
});
