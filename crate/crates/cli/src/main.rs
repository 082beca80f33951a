//! Command-line runner: scenario reports, the locality-hierarchy classifier,
//! and the Fock factorization suite, all with deterministic output.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check, 2 on usage
//! errors.

mod fock_suite;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::process::ExitCode;

use regionstate::dynamics::DynamicsMode;
use regionstate::scenarios::{
    classify_preset, coleman_hepp, epr_scenario, narratability_demo, ClassifyPreset,
    ColemanHeppParams, EprParams, EprReport,
};

use report::Envelope;

#[derive(Parser)]
#[command(
    name = "regionstate",
    about = "Density operators for regions of a discrete spacetime",
    version
)]
struct Cli {
    /// Operator-comparison tolerance (also via REGIONSTATE_TOLERANCE).
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args, Clone)]
struct PairArgs {
    /// Amplitude of |0>|1> as "re,im" (or a bare real).
    #[arg(long, default_value = "0.70710678118654752440")]
    alpha: String,

    /// Amplitude of |1>|0> as "re,im" (or a bare real).
    #[arg(long, default_value = "0.70710678118654752440")]
    beta: String,

    /// Site distance between the two particles (>= 2).
    #[arg(long, default_value_t = 2)]
    separation: usize,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Entangled pair with spin flips on both particles.
    EprUnitary(PairArgs),
    /// Entangled pair with postselected measurements on both particles.
    EprCollapse {
        #[command(flatten)]
        pair: PairArgs,
        /// Postselected outcome of particle 1 (0 or 1).
        #[arg(long, default_value_t = 0)]
        outcome: usize,
        /// Draw the outcome from the Born distribution with this seed
        /// instead of postselecting it.
        #[arg(long, conflicts_with = "outcome")]
        sample_seed: Option<u64>,
    },
    /// Singlet histories: identical on flat foliations, split on a staircase.
    Narratability {
        /// Site distance between the two particles (>= 2).
        #[arg(long, default_value_t = 2)]
        separation: usize,
    },
    /// Moving spin copied onto a chain of fixed qubits; pointer decomposition.
    ColemanHepp {
        /// Chain length (number of regions, >= 2).
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Spin-up amplitude as "re,im".
        #[arg(long, default_value = "0.70710678118654752440")]
        a: String,
        /// Spin-down amplitude as "re,im".
        #[arg(long, default_value = "0.70710678118654752440")]
        b: String,
    },
    /// Classify a preset scenario against the locality hierarchy.
    Classify {
        #[arg(long)]
        preset: String,
        /// Census threshold separating contextuality from nihilism.
        #[arg(long, default_value_t = 0.5)]
        theta_nihil: f64,
    },
    /// Factorization checks for truncated Fock spaces.
    FockCheck {
        /// Modes per region, comma separated.
        #[arg(long, default_value = "2,2")]
        regions: String,
        /// Maximum total particle number.
        #[arg(long, default_value_t = 2)]
        cutoff: usize,
        /// Sweep every partition with joint dimension up to this cap.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 200)]
        max_dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.tolerance {
        if t <= 0.0 {
            eprintln!("error: tolerance must be positive");
            return ExitCode::from(2);
        }
        regionstate::set_eps_tol(t);
    } else if let Ok(env) = std::env::var("REGIONSTATE_TOLERANCE") {
        match env.parse::<f64>() {
            Ok(t) if t > 0.0 => regionstate::set_eps_tol(t),
            _ => {
                eprintln!("error: REGIONSTATE_TOLERANCE must be a positive real");
                return ExitCode::from(2);
            }
        }
    }

    match run(&cli) {
        Ok(code) => code,
        Err(UsageError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl From<regionstate::Error> for UsageError {
    fn from(e: regionstate::Error) -> Self {
        UsageError(e.to_string())
    }
}

fn run(cli: &Cli) -> Result<ExitCode, UsageError> {
    let envelope = match &cli.command {
        Command::EprUnitary(pair) => {
            let (alpha, beta) = parse_pair(&pair.alpha, &pair.beta)?;
            let params = EprParams {
                separation: pair.separation,
                ..EprParams::unitary(alpha, beta)
            };
            let report = epr_scenario(&params)?;
            epr_envelope("epr-unitary", "unitary-pair-region-states", &report)
        }
        Command::EprCollapse { pair, outcome, sample_seed } => {
            let (alpha, beta) = parse_pair(&pair.alpha, &pair.beta)?;
            if *outcome > 1 {
                return Err(UsageError("outcome must be 0 or 1".into()));
            }
            let realized = match sample_seed {
                Some(seed) => {
                    regionstate::scenarios::sample_epr_outcome(alpha, beta, pair.separation, *seed)?
                }
                None => *outcome,
            };
            let params = EprParams {
                separation: pair.separation,
                ..EprParams::collapse(alpha, beta, realized)
            };
            let report = epr_scenario(&params)?;
            let mut envelope = epr_envelope("epr-collapse", "collapse-pair-contextuality", &report);
            if let Some(seed) = sample_seed {
                envelope.parameters["sample_seed"] = json!(seed);
                envelope.parameters["sampled_outcome"] = json!(realized);
            }
            envelope
        }
        Command::Narratability { separation } => {
            let report = narratability_demo(*separation)?;
            let flat: Vec<Value> = report
                .flat_comparisons
                .iter()
                .map(|(layer, cmp)| {
                    json!({
                        "distances": cmp.distances.iter().map(|&d| report::num(d)).collect::<Vec<_>>(),
                        "equal": cmp.equal,
                        "event_layer": layer,
                    })
                })
                .collect();
            let staircase: Vec<Value> =
                report.staircase_comparison.distances.iter().map(|&d| report::num(d)).collect();
            Envelope {
                command: "narratability".into(),
                certifies: "history-underdetermination".into(),
                parameters: json!({ "separation": 2 }),
                results: json!({
                    "divergent_surface_index": report.divergent_surface_index,
                    "flat_foliations": flat,
                    "staircase_profile": staircase,
                }),
                checks: report.checks,
            }
        }
        Command::ColemanHepp { n, a, b } => {
            let (a, b) = parse_pair(a, b)?;
            let params = ColemanHeppParams { n: *n, a, b };
            let report = coleman_hepp(&params)?;
            let times: Vec<Value> = report
                .time_terms
                .iter()
                .map(|terms| {
                    Value::Array(
                        terms
                            .iter()
                            .map(|t| {
                                json!({
                                    "amplitude": report::complex(t.amplitude),
                                    "occupations": t.occupations,
                                })
                            })
                            .collect(),
                    )
                })
                .collect();
            Envelope {
                command: "coleman-hepp".into(),
                certifies: "pointer-decoherence-chain".into(),
                parameters: json!({
                    "a": report::complex(a),
                    "b": report::complex(b),
                    "n": n,
                }),
                results: json!({
                    "off_block_residual": report::num(report.decomposition.off_block_residual),
                    "omitted_components": report.decomposition.omitted,
                    "pointer_sites": report.pointer_region.sites(),
                    "pointer_state": report::density(&report.pointer_state),
                    "support": report.support_labels,
                    "times": times,
                    "weights": report.decomposition.weights.iter().map(|&w| report::num(w)).collect::<Vec<_>>(),
                }),
                checks: report.checks,
            }
        }
        Command::Classify { preset, theta_nihil } => {
            let preset = ClassifyPreset::parse(preset)
                .ok_or_else(|| UsageError(format!("unknown preset `{preset}`")))?;
            let out = classify_preset(preset, *theta_nihil)?;
            Envelope {
                command: "classify".into(),
                certifies: "locality-hierarchy".into(),
                parameters: json!({
                    "preset": preset.name(),
                    "theta_nihil": report::num(*theta_nihil),
                }),
                results: report::hierarchy(&out.report),
                checks: out.checks,
            }
        }
        Command::FockCheck { regions, cutoff, sweep, max_dim } => {
            if *sweep {
                let (summaries, checks) = fock_suite::sweep(*max_dim)?;
                Envelope {
                    command: "fock-check".into(),
                    certifies: "region-factorization".into(),
                    parameters: json!({ "max_dim": max_dim, "sweep": true }),
                    results: json!({ "spaces": summaries }),
                    checks,
                }
            } else {
                let modes = parse_modes(regions)?;
                let out = fock_suite::check_space(&modes, *cutoff)?;
                let checks = vec![
                    regionstate::scenarios::Check::distance(
                        "isometry",
                        "exact inner products",
                        "max deviation",
                        out.isometry_deviation,
                        1e-12,
                    ),
                    regionstate::scenarios::Check::flag(
                        "sector_bijection",
                        "basis bijection onto the truncated sector",
                        out.sector_bijection,
                    ),
                    regionstate::scenarios::Check::distance(
                        "number_conservation",
                        "joint counter maps to per-region sum",
                        "max matrix deviation",
                        out.number_conservation_deviation,
                        1e-10,
                    ),
                    regionstate::scenarios::Check::distance(
                        "cross_region_commutators",
                        "0 on the safe subspace",
                        "max column norm",
                        out.max_commutator_norm,
                        1e-10,
                    ),
                ];
                Envelope {
                    command: "fock-check".into(),
                    certifies: "region-factorization".into(),
                    parameters: json!({ "cutoff": cutoff, "modes_per_region": modes }),
                    results: json!({ "spaces": [out.summary] }),
                    checks,
                }
            }
        }
    };

    let mut envelope = envelope;
    envelope.parameters["tolerance"] = report::num(regionstate::eps_tol());

    let rendered = match cli.format {
        Format::Json => envelope.render_json(),
        Format::Text => envelope.render_text(),
        Format::Csv => match &cli.command {
            Command::Narratability { .. } => {
                let Value::Array(profile) = &envelope.results["staircase_profile"] else {
                    unreachable!("narratability always reports a staircase profile")
                };
                let distances: Vec<f64> =
                    profile.iter().map(|v| v.as_f64().unwrap_or(0.0)).collect();
                report::emit_csv(&distances)
            }
            _ => {
                return Err(UsageError(
                    "csv output is only available for the narratability profile".into(),
                ))
            }
        },
    };

    match &cli.output {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{rendered}"),
    }
    Ok(if envelope.overall_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn epr_envelope(command: &str, certifies: &str, report: &EprReport) -> Envelope {
    let surfaces: Vec<Value> = report
        .surfaces
        .iter()
        .map(|(label, sigma)| json!({ "cut": report::surface(sigma), "label": label }))
        .collect();
    let globals: Vec<Value> = report
        .global_states
        .iter()
        .map(|(label, state)| json!({ "label": label, "state": report::density(state) }))
        .collect();
    let regions: Vec<Value> = report
        .region_states
        .iter()
        .map(|entry| {
            json!({
                "label": entry.label,
                "sites": entry.region.sites(),
                "state": report::density(&entry.state),
                "surface": entry.surface_label,
            })
        })
        .collect();
    let consistency: Vec<Value> = report
        .consistency
        .iter()
        .map(|(label, rep)| json!({ "label": label, "report": report::consistency(rep) }))
        .collect();
    let mut parameters = json!({
        "alpha": report::complex(report.params.alpha),
        "beta": report::complex(report.params.beta),
        "mode": match report.params.mode {
            DynamicsMode::Unitary => "unitary",
            DynamicsMode::Frc => "collapse",
        },
        "separation": report.params.separation,
    });
    if let Some(k) = report.params.outcome {
        parameters["outcome"] = json!(k);
    }
    Envelope {
        command: command.into(),
        certifies: certifies.into(),
        parameters,
        results: json!({
            "branch_weight": report::num(report.branch_weight),
            "consistency": consistency,
            "global_states": globals,
            "hierarchy": report::hierarchy(&report.hierarchy),
            "region_states": regions,
            "surfaces": surfaces,
        }),
        checks: report.checks.clone(),
    }
}

/// Parses "re,im" (or a bare real) into a complex number.
fn parse_complex(text: &str) -> Result<Complex64, UsageError> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |s: &str| -> Result<f64, UsageError> {
        s.trim().parse::<f64>().map_err(|_| UsageError(format!("cannot parse `{s}` as a real")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(UsageError(format!("expected \"re,im\", got `{text}`"))),
    }
}

/// Parses an amplitude pair and renormalizes slight deviations (warning on
/// stderr); deviations beyond 1e-6 are usage errors.
fn parse_pair(a: &str, b: &str) -> Result<(Complex64, Complex64), UsageError> {
    let a = parse_complex(a)?;
    let b = parse_complex(b)?;
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(UsageError(format!(
            "amplitudes have norm {norm}; renormalization is only applied within 1e-6"
        )));
    }
    if (norm - 1.0).abs() > regionstate::eps_norm() {
        eprintln!("warning: renormalizing amplitudes (norm {norm})");
    }
    Ok((a / norm, b / norm))
}

fn parse_modes(text: &str) -> Result<Vec<usize>, UsageError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| UsageError(format!("cannot parse `{s}` as a mode count")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.5,-0.25").unwrap(), Complex64::new(0.5, -0.25));
        assert!(parse_complex("a,b").is_err());
        assert!(parse_complex("1,2,3").is_err());
    }

    #[test]
    fn pair_normalization_window() {
        // accepted and renormalized
        let (a, b) = parse_pair("0.6000001", "0.8").unwrap();
        assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
        // too far off
        assert!(parse_pair("1", "1").is_err());
    }

    #[test]
    fn mode_list_parsing() {
        assert_eq!(parse_modes("2,2,1").unwrap(), vec![2, 2, 1]);
        assert!(parse_modes("2,x").is_err());
    }
}
