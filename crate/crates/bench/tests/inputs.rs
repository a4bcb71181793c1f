use qdyn_bench::{general, hermitian, localized_bath, open_spin_pair, super_ohmic_bath};

#[test]
fn inputs_are_valid_and_reproducible() {
    for n in [4, 16, 64] {
        assert!(hermitian(n).is_hermitian(1e-14));
        assert_eq!(general(n), general(n));
        assert!(!general(n).is_hermitian(1e-3));
    }
    let (h, channels) = open_spin_pair().unwrap();
    assert_eq!((h.rows(), channels.len()), (4, 2));
    assert!(super_ohmic_bath().is_ok() && localized_bath().is_ok());
}
