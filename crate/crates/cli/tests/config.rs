use kef_cli::config::{parse_str, CaseConfig};
use kef_cli::CliError;

const MINIMAL: &str = r#"
[grid]
dim = 2
n = 16

[physics]
kappa = 0.5
mode = "reduced"
epsilon = 0.0
mollify_width = 0.0

[law]
kind = "power"
coefficient = 1.0
alpha = 1.0
r = 0.5
R = 2.0

[time]
dt = 1e-3
t_end = 0.01
scheme = "imex2"

[initial]
kind = "random"
rho_mean = 1.0
rho_amplitude = 0.3
velocity_rms = 0.5
"#;

fn edit(from: &str, to: &str) -> String {
    assert!(MINIMAL.contains(from), "{from}");
    MINIMAL.replacen(from, to, 1)
}

#[test]
fn minimal_config_parses_and_is_admissible() {
    let r = parse_str(MINIMAL).unwrap();
    assert!(r.admissibility.satisfied);
    // μ = ρ in d = 2: (1-d)/d μ + sμ' = s/2
    assert!((r.admissibility.infimum - 0.25).abs() < 1e-12, "{}", r.admissibility.infimum);
    assert_eq!(r.grid.n(), 16);
    assert_eq!(r.solver.num_steps(), 10);
    assert_eq!(r.seed(), Some(0));
}

#[test]
fn sqrt_law_in_three_dimensions_is_rejected_with_witness() {
    let text = edit("dim = 2", "dim = 3").replace("alpha = 1.0", "alpha = 0.5");
    match parse_str(&text) {
        Err(e @ CliError::Admissibility(_)) => {
            assert_eq!(e.exit_code(), 2);
            let msg = e.to_string();
            assert!(msg.contains("at s ="), "{msg}");
        }
        other => panic!("expected admissibility failure, got {other:?}"),
    }
}

#[test]
fn alpha_just_above_threshold_passes_in_three_dimensions() {
    let text = edit("dim = 2", "dim = 3").replace("alpha = 1.0", "alpha = 0.7");
    assert!(parse_str(&text).unwrap().admissibility.satisfied);
}

#[test]
fn empty_file_is_an_error() {
    assert!(matches!(parse_str(""), Err(CliError::Config(_))));
    assert!(matches!(parse_str("  \n"), Err(CliError::Config(_))));
}

#[test]
fn unknown_keys_are_rejected() {
    let text = edit("epsilon = 0.0", "epsilon = 0.0\nviscosity = 1.0");
    let e = parse_str(&text).unwrap_err();
    assert!(e.to_string().contains("viscosity"), "{e}");
    assert!(parse_str(&format!("{MINIMAL}\n[extra]\na = 1\n")).is_err());
}

#[test]
fn physics_parameters_have_no_defaults() {
    for key in ["kappa = 0.5\n", "R = 2.0\n", "n = 16\n", "dt = 1e-3\n", "mollify_width = 0.0\n"] {
        assert!(parse_str(&edit(key, "")).is_err(), "missing {key:?} accepted");
    }
}

#[test]
fn out_of_range_values_are_rejected() {
    assert!(parse_str(&edit("kappa = 0.5", "kappa = 1.5")).is_err());
    assert!(parse_str(&edit("n = 16", "n = 12")).is_err());
    assert!(parse_str(&edit("dt = 1e-3", "dt = -1e-3")).is_err());
    assert!(parse_str(&edit("mode = \"reduced\"", "mode = \"incompressible_ns\"")).is_err());
    assert!(parse_str(&edit("mode = \"reduced\"", "mode = \"ghost\"")).is_err());
}

#[test]
fn endpoint_modes_skip_the_admissibility_gate() {
    let text = edit("kappa = 0.5", "kappa = 0.0")
        .replace("mode = \"reduced\"", "mode = \"incompressible_ns\"")
        .replace("alpha = 1.0", "alpha = 0.0");
    let r = parse_str(&text).unwrap();
    assert!(!r.admissibility.satisfied);
}

#[test]
fn table_law_and_mixture_mode_parse() {
    let table = edit(
        "kind = \"power\"\ncoefficient = 1.0\nalpha = 1.0",
        "kind = \"table\"\ntable = [[0.25, 0.25], [1.0, 1.0], [4.0, 4.0]]",
    );
    assert!(parse_str(&table).unwrap().admissibility.satisfied);

    let mix = edit("mode = \"reduced\"", "mode = \"mixture\"")
        .replace("kind = \"power\"\ncoefficient = 1.0\nalpha = 1.0", "kind = \"mixture\"")
        + "\n[mixture]\nc0_tilde_coefficient = 2.0\nc0_tilde_exponent = 1.0\ny1_mean = 0.5\ny1_amplitude = 0.3\n";
    let r = parse_str(&mix).unwrap();
    assert!(r.mixture.is_some());
    // c̃₀ = 2ρ gives μ = ρ
    let (mu, dmu) = r.law.eval(1.3);
    assert!((mu - 1.3).abs() < 1e-14 && (dmu - 1.0).abs() < 1e-14);
}

#[test]
fn resolved_config_round_trips_through_json() {
    let r = parse_str(MINIMAL).unwrap();
    let json = serde_json::to_string(&r.raw).unwrap();
    let back: CaseConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r.raw);
}
