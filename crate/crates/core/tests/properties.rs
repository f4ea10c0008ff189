#[path = "common/props.rs"]
mod props;

macro_rules! suites {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = props::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

suites!(
    h1_scaling_coherence,
    nonlinearity_symmetry,
    taylor_ratio_bounded,
    b_is_homogeneous_of_degree_two,
    b_equals_scaled_gradient_of_v,
    b_is_permutation_equivariant,
    constants_scale_like_cube,
    constants_are_deterministic_and_equivariant,
    flow_is_permutation_equivariant,
    prepared_data_sit_on_the_alpha_sphere,
);

#[test]
fn suite_table_is_complete() {
    let mut names: Vec<&str> = props::SUITES.iter().map(|s| s.0).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), 10);
}
