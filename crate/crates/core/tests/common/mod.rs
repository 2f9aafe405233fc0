//! Shared fixtures: the worked example profiles used across the studies.

use star_moran::fitness::{FitnessProfile, PsiFunction};

/// Birth fitness crossing zero at 1/2 against a positive death gradient.
pub fn crossing_profile() -> FitnessProfile {
    FitnessProfile::new(
        PsiFunction::payoff_line(2.0, 0.5),
        PsiFunction::polynomial(&[1.0, 1.0]),
        1.0,
    )
    .unwrap()
}

/// Steep birth selection, no death selection.
pub fn steep_birth_profile() -> FitnessProfile {
    FitnessProfile::new(PsiFunction::payoff_line(10.0, 0.5), PsiFunction::zero(), 1.0).unwrap()
}

/// No birth selection, steep death selection of the opposite slope.
pub fn steep_death_profile() -> FitnessProfile {
    FitnessProfile::new(PsiFunction::zero(), PsiFunction::payoff_line(-10.0, 0.5), 1.0).unwrap()
}

/// All three worked-example profiles.
pub fn example_profiles() -> Vec<(&'static str, FitnessProfile)> {
    vec![
        ("crossing", crossing_profile()),
        ("steep-birth", steep_birth_profile()),
        ("steep-death", steep_death_profile()),
    ]
}
