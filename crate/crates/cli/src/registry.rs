//! Which subcommand exposes each library operation.

/// Operation tags accepted in a spec's `"op"` field.
pub const OPERATION_TAGS: [&str; 9] = [
    "ball",
    "berezin",
    "carleson-test",
    "seq-analyze",
    "seq-decompose",
    "seq-escape",
    "seq-shells",
    "cover",
    "ek",
];

/// `(module, operation, subcommand path)`.
pub const REGISTRY: &[(&str, &str, &str)] = &[
    ("geometry_ball", "pseudo_distance", "ball"),
    ("geometry_ball", "ball_automorphism", "ball"),
    ("geometry_ball", "kobayashi_ball", "ball"),
    ("geometry_ball", "ball_volume", "ball"),
    ("geometry_ball", "sample_ball_uniform", "ball"),
    ("geometry_ball", "check_lemma_ball_inequality", "ball"),
    ("domains", "boundary_distance", "ball"),
    ("domains", "kobayashi_bounds", "ball"),
    ("domains", "estimate_boundary_constants", "ball"),
    ("domains", "check_distance_comparison", "ball"),
    ("domains", "check_defining_fn_inequality", "ball"),
    ("bergman", "kernel", "berezin"),
    ("bergman", "normalized_kernel", "berezin"),
    ("bergman", "berezin_transform", "berezin"),
    ("bergman", "check_kernel_upper", "verify"),
    ("bergman", "check_kernel_lower", "verify"),
    ("bergman", "check_submean", "verify"),
    ("measures", "measure_of_ball", "carleson-test"),
    ("measures", "carleson_ratio_test", "carleson-test"),
    ("measures", "carleson_berezin_test", "carleson-test"),
    ("measures", "carleson_functional_test", "carleson-test"),
    ("measures", "cross_check_equivalence", "carleson-test"),
    ("sequences", "separation_constant", "seq analyze"),
    ("sequences", "count_in_ball", "seq analyze"),
    ("sequences", "greedy_decompose", "seq decompose"),
    ("sequences", "greedy_cover", "cover"),
    ("sequences", "dirac_carleson_measure", "seq analyze"),
    ("sequences", "escape_sum", "seq escape"),
    ("sequences", "shell_counts", "seq shells"),
    ("invariant_measure", "ek_density", "ek"),
    ("invariant_measure", "ek_ball_measure", "ek"),
    ("integrate", "sample_unit_ball", "ball"),
    ("integrate", "integrate_density", "ek"),
    ("cli", "run", "run"),
    ("cli", "verify", "verify"),
];

/// Subcommand path for an operation tag.
pub fn subcommand_for(tag: &str) -> Option<&'static str> {
    Some(match tag {
        "ball" => "ball",
        "berezin" => "berezin",
        "carleson-test" => "carleson-test",
        "seq-analyze" => "seq analyze",
        "seq-decompose" => "seq decompose",
        "seq-escape" => "seq escape",
        "seq-shells" => "seq shells",
        "cover" => "cover",
        "ek" => "ek",
        _ => return None,
    })
}
