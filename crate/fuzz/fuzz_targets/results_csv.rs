#![no_main]

use libfuzzer_sys::fuzz_target;
use regenloc_bench::experiment::{read_results, write_results};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_results(data) {
        let mut out = Vec::new();
        write_results(&mut out, &rows).expect("rows serialise");
        let again = read_results(out.as_slice()).expect("written rows reload");
        assert_eq!(rows.len(), again.len());
    }
});
