use mdlab::{LabConfig, LabError};

const DEFAULT: &str = include_str!("../../../configs/default.toml");

#[test]
fn default_config_loads_and_validates() {
    let c = LabConfig::from_toml_str(DEFAULT).unwrap();
    c.validate().unwrap();
    assert_eq!(c.model.n, 32);
    assert_eq!(c.model.time_grid.points, 401);
    assert_eq!(c.rng_seed, 20240917);
}

#[test]
fn unknown_key_is_rejected() {
    let text = DEFAULT.replace("mass = 1.0", "mass = 1.0\nmas = 2.0");
    let err = LabConfig::from_toml_str(&text).unwrap_err();
    assert!(matches!(err, LabError::Toml(_)), "{err}");
    assert!(err.to_string().contains("mas"), "{err}");
}

#[test]
fn missing_field_is_rejected() {
    let text = DEFAULT.replace("tol_eq = 1e-8\n", "");
    let err = LabConfig::from_toml_str(&text).unwrap_err();
    assert!(err.to_string().contains("tol_eq"), "{err}");
}

#[test]
fn overrides_replace_values() {
    let c = LabConfig::from_toml_with_overrides(
        DEFAULT,
        &["model.N=64".into(), "thermal.beta=2".into(), "sweep.checks=[\"purification\"]".into()],
    )
    .unwrap();
    assert_eq!(c.model.n, 64);
    assert_eq!(c.thermal.beta, 2.0);
    assert_eq!(c.sweep.checks, vec!["purification".to_string()]);
}

#[test]
fn override_of_unknown_key_is_rejected() {
    let err = LabConfig::from_toml_with_overrides(DEFAULT, &["model.width=3".into()]).unwrap_err();
    assert!(matches!(err, LabError::Override { .. }), "{err}");
    let err = LabConfig::from_toml_with_overrides(DEFAULT, &["model.N".into()]).unwrap_err();
    assert!(matches!(err, LabError::Override { .. }), "{err}");
}

#[test]
fn validation_catches_bad_values() {
    for (key, why) in [
        ("model.N=24", "N"),
        ("model.d=4", "d"),
        ("thermal.beta=0", "beta"),
        ("model.mass=-1", "mass"),
        ("region.base_halfwidth=11", "half-width"),
        ("tolerances.tol_eq=0", "tol_eq"),
        ("sweep.checks=[\"nope\"]", "nope"),
    ] {
        let res = LabConfig::from_toml_with_overrides(DEFAULT, &[key.to_string()]);
        let err = match res {
            Ok(c) => c.validate().unwrap_err(),
            Err(e) => e,
        };
        assert!(err.to_string().contains(why), "{key}: {err}");
    }
}

#[test]
fn serialized_config_round_trips() {
    let c = LabConfig::from_toml_str(DEFAULT).unwrap();
    let back = LabConfig::from_toml_str(&c.to_toml_string()).unwrap();
    assert_eq!(back, c);
}
