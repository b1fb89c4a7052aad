//! Regenerates every golden CSV and compares bytes. `FREEHARM_BLESS=1` rewrites them.

mod common;

use std::fs;

use common::{freeharm, golden_path, stdout, GOLDEN};

#[test]
fn golden_files_reproduce() {
    let bless = std::env::var("FREEHARM_BLESS").is_ok_and(|v| v == "1");
    let mut stale = Vec::new();
    for (name, args) in GOLDEN {
        let out = freeharm(args);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        let path = golden_path(name);
        if bless {
            fs::write(&path, &text).unwrap();
            continue;
        }
        match fs::read_to_string(&path) {
            Ok(expected) if expected == text => {}
            _ => stale.push(*name),
        }
    }
    assert!(stale.is_empty(), "golden files differ: {stale:?} (rerun with FREEHARM_BLESS=1 if intended)");
}
