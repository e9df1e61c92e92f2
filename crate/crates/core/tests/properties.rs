#[path = "common/properties.rs"]
mod properties;

const CASES: u32 = 64;

macro_rules! property_tests {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = properties::$name(CASES) {
                    panic!("{e}");
                }
            }
        )*
    };
}

property_tests!(
    bogoliubov_constraints,
    gaussian_state_positivity,
    propagator_unitarity,
    relaxation_fixed_point_and_monotonicity,
    regime_exclusivity,
    cycle_laws_and_carnot_bounds,
    power_law_fit_exactness,
    free_energy_energy_ordering,
);

#[test]
fn registry_lists_every_property() {
    assert_eq!(properties::ALL.len(), 8);
}
