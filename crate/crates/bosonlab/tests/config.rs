use bosonlab::config::{parse_check_list, parse_config, CheckKind, Format, GridConfig, ModelKindConfig, ModelSpec, ModesConfig};
use bosonlab::pipeline::build_model;

#[test]
fn minimal_spin_boson_fills_defaults() {
    let cfg = parse_config("[model]\nkind = \"spin-boson\"\n").unwrap();
    match cfg.model.kind {
        ModelKindConfig::SpinBoson { epsilon, delta, beta, alpha, .. } => {
            assert_eq!((epsilon, delta, beta, alpha), (1.0, 0.5, 0.0, 0.1));
        }
        ref k => panic!("unexpected kind {k:?}"),
    }
    assert_eq!(cfg.model.n_max, 4);
    match &cfg.grid {
        GridConfig::Dispersion { k_min, k_max, modes, .. } => {
            assert_eq!((*k_min, *k_max), (0.5, 2.0));
            assert_eq!(*modes, ModesConfig::Count(3));
        }
        g => panic!("unexpected grid {g:?}"),
    }
    assert!(cfg.sweep.is_none());
    assert_eq!(cfg.output.formats, vec![Format::Json]);
    assert_eq!(cfg.config_hash.len(), 64);
    let m = build_model(&cfg).unwrap();
    assert_eq!(m.left_dim, 2);
    assert_eq!(m.basis.modes(), 3);
}

#[test]
fn model_section_is_required() {
    let err = parse_config("").unwrap_err();
    assert!(err.mentions("model"), "{err}");
}

#[test]
fn negative_n_max_names_the_field() {
    let err = parse_config("[model]\nn_max = -3\n").unwrap_err();
    assert!(err.mentions("model.n_max"), "{err}");
    assert_eq!(err.issues[0].line, Some(2));
}

#[test]
fn zero_k_min_is_rejected_for_negative_beta() {
    let text = "[model]\nbeta = -0.5\n[grid]\ndispersion = \"massless\"\nk_min = 0.0\n";
    let err = parse_config(text).unwrap_err();
    assert!(err.mentions("grid.k_min"), "{err}");
}

#[test]
fn every_error_is_reported_with_its_line() {
    let text = "\
[model]
n_max = -1
alpha = \"big\"
colour = 3

[grid]
k_min = 2.0
k_max = 1.0

[output]
format = \"xml\"
";
    let err = parse_config(text).unwrap_err();
    for (field, line) in [("model.n_max", 2), ("model.alpha", 3), ("model.colour", 4), ("grid.k_max", 8), ("output.format", 11)] {
        let issue = err.issues.iter().find(|i| i.field == field).unwrap_or_else(|| panic!("{field} missing from {err}"));
        assert_eq!(issue.line, Some(line), "{field}");
    }
}

#[test]
fn unknown_sections_and_keys_are_rejected() {
    let err = parse_config("[modle]\nkind = \"gsb\"\n").unwrap_err();
    assert!(err.mentions("modle"), "{err}");
    let err = parse_config("[checks]\npull_thru = true\n").unwrap_err();
    assert!(err.mentions("checks.pull_thru"), "{err}");
}

#[test]
fn syntax_errors_carry_a_line() {
    let err = parse_config("[model]\nalpha = 0.1\nn_max = = 4\n").unwrap_err();
    assert_eq!(err.issues.len(), 1);
    assert_eq!(err.issues[0].field, "<syntax>");
    assert_eq!(err.issues[0].line, Some(3));
}

#[test]
fn general_model_with_explicit_coupling() {
    let text = "\
[model]
kind = \"gsb\"
alpha = 0.3
n_max = 3
atom = [[-0.5, 0.0, 0.0], [0.0, 0.4, 0.0], [0.0, 0.0, 0.9]]

[[model.coupling]]
b = [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
beta = 0.5

[[model.coupling]]
b = [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]
lambda = [0.2, 0.1]

[grid]
mass = 1.0
modes = 2
";
    let cfg = parse_config(text).unwrap();
    assert!(matches!(cfg.model_spec().unwrap(), ModelSpec::Gsb(_)));
    let m = build_model(&cfg).unwrap();
    assert_eq!(m.left_dim, 3);
    assert_eq!(m.dim(), 3 * 10);
    assert_eq!(m.coupling, 0.3);
}

#[test]
fn non_hermitian_atom_is_rejected() {
    let text = "[model]\nkind = \"gsb\"\natom = [[0.0, 1.0], [0.0, 1.0]]\n[[model.coupling]]\nb = [[0.0, 1.0], [1.0, 0.0]]\n";
    let err = parse_config(text).unwrap_err();
    assert!(err.issues.iter().any(|i| i.field.starts_with("model")), "{err}");
}

#[test]
fn pf_toy_defaults_and_free_variant() {
    let cfg = parse_config("[model]\nkind = \"pf-toy\"\nn_max = 1\n[grid]\ndispersion = \"massless\"\nmodes = 2\n").unwrap();
    assert!(matches!(cfg.model_spec().unwrap(), ModelSpec::Pf(_)));
    let free = cfg.without_potential().unwrap();
    assert_ne!(free.model, cfg.model);
    let m = build_model(&cfg).unwrap();
    assert_eq!(m.left_dim, 2 * 16);
}

#[test]
fn checks_toggle_and_tolerances() {
    let cfg = parse_config("[model]\n[checks]\nalgebra = false\nresolvent = true\n[checks.tolerance]\npull_through = 1e-6\n").unwrap();
    assert!(!cfg.checks.is_enabled(CheckKind::Algebra));
    assert!(cfg.checks.is_enabled(CheckKind::Resolvent));
    assert!(!cfg.checks.is_enabled(CheckKind::IrProbe));
    assert_eq!(cfg.checks.tolerances, vec![("pull_through".to_string(), 1e-6)]);
}

#[test]
fn check_list_parsing() {
    assert_eq!(parse_check_list("pull_through, overlap").unwrap(), vec![CheckKind::PullThrough, CheckKind::Overlap]);
    assert!(parse_check_list("pull_through,nonsense").is_err());
    for k in CheckKind::ALL {
        assert_eq!(CheckKind::parse(k.name()), Some(k));
    }
}

#[test]
fn sweep_axes_are_validated() {
    let cfg = parse_config("[model]\n[sweep.axes]\nalpha = [0.1, 0.2]\nn_max = [2, 3, 4]\n").unwrap();
    let s = cfg.sweep.unwrap();
    assert_eq!(s.axes.len(), 2);
    assert_eq!(s.axes[1], ("n_max".to_string(), vec![2.0, 3.0, 4.0]));
    let err = parse_config("[model]\n[sweep.axes]\nwavelength = [1.0]\n").unwrap_err();
    assert!(err.issues.iter().any(|i| i.field.starts_with("sweep.axes")), "{err}");
    let err = parse_config("[model]\n[sweep]\ncell_cap = 3\n[sweep.axes]\nalpha = [0.1, 0.2, 0.3, 0.4]\n").unwrap_err();
    assert!(err.mentions("sweep.axes"), "{err}");
}

#[test]
fn set_param_changes_the_model() {
    let mut cfg = parse_config("[model]\n").unwrap();
    cfg.set_param("alpha", 0.4).unwrap();
    cfg.set_param("n_max", 2.0).unwrap();
    assert_eq!(cfg.coupling(), 0.4);
    assert_eq!(cfg.model.n_max, 2);
    assert!(cfg.set_param("n_max", 2.5).is_err());
    assert!(cfg.set_param("well_depth", 1.0).is_err());
}

#[test]
fn hash_tracks_the_text() {
    let a = parse_config("[model]\nalpha = 0.1\n").unwrap();
    let b = parse_config("[model]\nalpha = 0.1\n").unwrap();
    let c = parse_config("[model]\nalpha = 0.10\n").unwrap();
    assert_eq!(a.config_hash, b.config_hash);
    assert_ne!(a.config_hash, c.config_hash);
}
