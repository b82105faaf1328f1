use bea1::kat;

const KAT_TEXT: &str = include_str!("data/bea1_kat_100.txt");

#[test]
fn pinned_file_matches_default_generation() {
    let records = kat::generate(100, kat::DEFAULT_SEED);
    assert_eq!(kat::to_text(&records), KAT_TEXT);
}

#[test]
fn pinned_file_verifies() {
    let records = kat::parse(KAT_TEXT).unwrap();
    assert_eq!(records.len(), 100);
    kat::verify(&records).unwrap();
}
