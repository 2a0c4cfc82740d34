mod common;

#[test]
fn greedy_never_beats_exact_transport() {
    common::greedy_below_oracle().unwrap();
}

#[test]
fn strapsim_is_symmetric_for_symmetric_similarity() {
    common::symmetric_under_symmetric_matrix().unwrap();
}

#[test]
fn match_traces_conserve_mass() {
    common::mass_conservation().unwrap();
}

#[test]
fn exact_match_reduces_to_weighted_jaccard_numerator() {
    common::exact_match_is_weighted_jaccard_numerator().unwrap();
}

#[test]
fn jaccard_residual_is_complement() {
    common::jaccard_complements_residual().unwrap();
}

#[test]
fn proximity_matrix_structure() {
    common::proximity_structure().unwrap();
}

#[test]
fn spearman_ignores_monotone_transforms() {
    common::spearman_monotone_invariance().unwrap();
}
