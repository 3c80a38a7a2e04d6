//! The eavesdropper code path must never touch key material.

#[test]
fn adversary_source_has_no_key_access() {
    let src = include_str!("../src/adversary.rs");
    let body = src.split("#[cfg(test)]").next().unwrap();
    for banned in ["KeyMaterial", "generate_tag", "regenerate_tag", "scenario_key", "receive_block"] {
        assert!(!body.contains(banned), "adversary uses {banned}");
    }
}
