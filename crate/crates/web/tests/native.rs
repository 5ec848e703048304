use projflow_web::{curvature_map, fiber_psi_map, positivity_series, presets_json};

#[test]
fn presets_json_lists_every_preset() {
    let v: serde_json::Value = serde_json::from_str(&presets_json()).unwrap();
    let ids: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["id"].as_str().unwrap())
        .collect();
    assert!(
        ids.contains(&"torus-hym-flat") && ids.contains(&"cp1-kr"),
        "{ids:?}"
    );
    assert!(v[0]["t_end"].as_f64().unwrap() > 0.0);
}

#[test]
fn torus_curvature_map_matches_closed_form() {
    // g = e^{a cos x} ⇒ K = (a/4) cos x · e^{−a cos x}.
    let (a, n) = (0.3, 64);
    let k = curvature_map("torus", a, n).unwrap();
    assert_eq!(k.len(), n * n);
    assert!((k[0] - 0.055_561_366_551_128_84).abs() < 1e-6, "{}", k[0]);
    assert!(
        (k[32 * n] + 0.101_239_410_568_200_23).abs() < 1e-6,
        "{}",
        k[32 * n]
    );
}

#[test]
fn fubini_study_map_is_two_inside_and_nan_on_the_rim() {
    let n = 65;
    let k = curvature_map("cp1", 0.0, n).unwrap();
    assert!(k[0].is_nan());
    let centre = k[(n / 2) * n + n / 2];
    assert!((centre - 2.0).abs() < 1e-4, "{centre}");
    assert!(k
        .iter()
        .filter(|v| v.is_finite())
        .all(|v| (v - 2.0).abs() < 1e-2));
}

#[test]
fn bad_page_inputs_are_errors() {
    assert!(curvature_map("sphere", 0.1, 32)
        .unwrap_err()
        .contains("sphere"));
    assert!(curvature_map("torus", 0.1, 4).is_err());
    assert!(positivity_series("no-such-preset", 0.1)
        .unwrap_err()
        .contains("no-such-preset"));
    assert!(fiber_psi_map(0.0, 0.01, 16, -1.0).is_err());
    assert!(fiber_psi_map(0.0, 0.5, 16, 1.0)
        .unwrap_err()
        .contains("epsilon"));
}

#[test]
fn positivity_series_is_interleaved_and_starts_at_zero() {
    let s = positivity_series("curve-hym-semipositive", 0.05).unwrap();
    assert!(s.len() >= 4 && s.len().is_multiple_of(2));
    assert_eq!(s[0], 0.0);
    let t_last = s[s.len() - 2];
    assert!((t_last - 0.05).abs() < 1e-12, "{t_last}");
    assert!(s.chunks(2).all(|p| p[1] > -1e-5));
}

#[test]
fn fiber_map_is_finite_and_deterministic() {
    let a = fiber_psi_map(1.0, 0.02, 17, 2.0).unwrap();
    assert_eq!(a.len(), 17 * 17);
    assert!(a.iter().all(|v| v.is_finite()));
    assert_eq!(a, fiber_psi_map(1.0, 0.02, 17, 2.0).unwrap());
    let flat = fiber_psi_map(1.0, 0.0, 17, 2.0).unwrap();
    assert!(a.iter().zip(&flat).any(|(x, y)| (x - y).abs() > 1e-6));
}
