//! Byte-for-byte regression of serialized certificates. Set
//! `TORAL_BLESS=1` to rewrite the stored files.

use std::path::PathBuf;

use toral::constructions::{non_expansivity_certificate, verify_non_expansivity, Budget};
use toral::io::to_canonical_json;
use toral::linalg::UnimodularMatrix;

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("TORAL_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "{} differs", path.display());
}

#[test]
fn finite_order_rotation_certificate() {
    let r = UnimodularMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
    let cert = non_expansivity_certificate(&r, 2, &Budget::default()).unwrap();
    verify_non_expansivity(&cert).unwrap();
    check("finite_order_rotation.json", &to_canonical_json(&cert));
}
