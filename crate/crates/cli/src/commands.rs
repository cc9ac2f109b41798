use std::path::Path;

use chancomp_core::clifford::{norm_equivalence_check, pauli_resources, verify_contraction};
use chancomp_core::dynamics::{
    complexity_trajectory, default_grid, make_semigroup, return_time, ReturnNorm, SemigroupFamily, SemigroupKind,
};
use chancomp_core::engine::{
    cb_complexity_estimate, complexity_estimate, diamond_norm, expected_length, tensor_additivity, Certificate,
    LmoMethod,
};
use chancomp_core::groups::{
    cyclic_generator, group_closure, length_statistics, permutation_matrix, verify_expected_length_commutative,
    GroupTable,
};
use chancomp_core::linalg::paulis;
use chancomp_core::channel::superop_difference;
use chancomp_core::{
    ComplexMatrix, ComplexityEstimate, LipschitzStructure, NormVariant, QuantumChannel, ResourceKind, ResourceSet,
    SolveOptions,
};

use crate::args::{
    Command, GroupArgs, KindArg, LmoArg, QubitChannel, ReturnNormArg, SemigroupArgs, SemigroupPreset, SolveArgs,
    VariantArg, VerifyCommand,
};
use crate::failure::Failure;
use crate::report::{line_plot, num, Run, Series};

type Outcome = Result<(), Failure>;

pub fn execute(command: &Command, run: &mut Run, plot: bool) -> Outcome {
    match command {
        Command::Complexity {
            channel,
            resource,
            solve,
            ..
        } => {
            let (ch, structure) = channel_and_structure(run, channel, resource)?;
            let opts = solve_options(run, solve, &[])?;
            let e = complexity_estimate(&ch, &structure, &opts)?;
            write_estimate(run, "complexity", &e, "complexity-interval")
        }
        Command::ExpectedLength { resource, solve, .. } => {
            let structure = load_structure(run, resource)?;
            let opts = solve_options(run, solve, &[])?;
            let e = expected_length(&structure, &opts)?;
            write_estimate(run, "expected_length", &e, "expected-length-interval")
        }
        Command::CbComplexity {
            channel,
            resource,
            levels,
            solve,
            ..
        } => {
            let (ch, structure) = channel_and_structure(run, channel, resource)?;
            let opts = solve_options(run, solve, levels)?;
            let e = cb_complexity_estimate(&ch, &structure, &opts)?;
            write_estimate(run, "cb_complexity", &e, "cb-complexity-interval")
        }
        Command::Diamond { channel, reference, .. } => diamond(run, channel, reference.as_deref()),
        Command::ReturnTime {
            semigroup, eps, norm, seed, ..
        } => return_time_report(run, semigroup, *eps, *norm, *seed, plot),
        Command::Trajectory {
            semigroup,
            grid,
            points,
            solve,
            ..
        } => trajectory(run, semigroup, grid, *points, solve, plot),
        Command::GroupStats { group, .. } => {
            let table = load_group(run, group)?;
            let stats = length_statistics(&table);
            let rows: Vec<Vec<String>> = stats
                .histogram
                .iter()
                .enumerate()
                .map(|(l, &c)| {
                    vec![
                        l.to_string(),
                        c.to_string(),
                        stats.order.to_string(),
                        num(stats.mean),
                        stats.diameter.to_string(),
                        "word-length-statistics".into(),
                    ]
                })
                .collect();
            run.csv(
                "group_stats.csv",
                &["length", "count", "order", "mean", "diameter", "claim"],
                &rows,
            )?;
            run.json("group_stats.json", &stats)
        }
        Command::Verify { check } => verify(run, check),
    }
}

fn verify(run: &mut Run, check: &VerifyCommand) -> Outcome {
    match check {
        VerifyCommand::Pauli {
            qubits, samples, seed, ..
        } => {
            let r = norm_equivalence_check(*samples, *qubits, *seed)?;
            run.csv(
                "verify_pauli.csv",
                &["qubits", "samples", "checked", "skipped", "min_ratio", "max_ratio", "seed", "claim"],
                &[vec![
                    r.qubits.to_string(),
                    r.samples.to_string(),
                    r.checked.to_string(),
                    r.skipped.to_string(),
                    num(r.min_ratio),
                    num(r.max_ratio),
                    r.seed.to_string(),
                    "pauli-norm-equivalence".into(),
                ]],
            )?;
            run.json("verify_pauli.json", &r)
        }
        VerifyCommand::Clifford {
            qubits, samples, seed, ..
        } => {
            let p = pauli_resources(*qubits)?;
            let r = verify_contraction(&p, *samples, *seed)?;
            run.csv(
                "verify_clifford.csv",
                &[
                    "qubits",
                    "commutant_discrete",
                    "commutant_continuous",
                    "samples",
                    "max_excess",
                    "seed",
                    "claim",
                ],
                &[vec![
                    r.qubits.to_string(),
                    r.commutant_discrete.to_string(),
                    r.commutant_continuous.to_string(),
                    r.samples.to_string(),
                    num(r.max_excess),
                    seed.to_string(),
                    "logarithm-domination".into(),
                ]],
            )?;
            run.json("verify_clifford.json", &r)?;
            if r.commutant_discrete != r.commutant_continuous {
                return Err(Failure::Violation(format!(
                    "commutant dimensions differ: {} vs {}",
                    r.commutant_discrete, r.commutant_continuous
                )));
            }
            Ok(())
        }
        VerifyCommand::TensorAdditivity {
            first,
            second,
            tolerance,
            solve,
            ..
        } => {
            let opts = solve_options(run, solve, &[])?;
            let pauli = pauli_resources(1)?.resource_set()?;
            let (c1, c2) = (qubit_channel(*first)?, qubit_channel(*second)?);
            let r = tensor_additivity((&c1, &pauli), (&c2, &pauli), &opts, *tolerance)?;
            let row = |name: &str, e: &ComplexityEstimate| {
                vec![
                    name.to_string(),
                    num(e.lower),
                    num(e.upper),
                    solve.seed.to_string(),
                    "tensor-additivity".into(),
                ]
            };
            let rows = vec![
                row("first", &r.first),
                row("second", &r.second),
                row("product", &r.joint),
                vec![
                    "combined_witness".into(),
                    num(r.combined_witness_value),
                    String::new(),
                    solve.seed.to_string(),
                    "tensor-additivity".into(),
                ],
            ];
            run.csv("tensor_additivity.csv", &["system", "lower", "upper", "seed", "claim"], &rows)?;
            run.json("tensor_additivity.json", &r)?;
            if !(r.lower_ok && r.upper_ok) {
                return Err(Failure::Violation(format!(
                    "tensor additivity off by more than {tolerance} (lower ok: {}, upper ok: {})",
                    r.lower_ok, r.upper_ok
                )));
            }
            Ok(())
        }
        VerifyCommand::WordLength { group, solve, .. } => {
            let table = load_group(run, group)?;
            let opts = solve_options(run, solve, &[])?;
            let r = verify_expected_length_commutative(&table, &opts)?;
            run.csv(
                "verify_word_length.csv",
                &["order", "mean_length", "lower", "upper", "width", "seed", "claim"],
                &[vec![
                    r.order.to_string(),
                    num(r.mean_length),
                    num(r.estimate.lower),
                    num(r.estimate.upper),
                    num(r.estimate.width()),
                    solve.seed.to_string(),
                    "expected-length-equals-mean-word-length".into(),
                ]],
            )?;
            run.json("verify_word_length.json", &r)?;
            if !(r.lower_ok && r.upper_ok) {
                return Err(Failure::Violation(format!(
                    "interval [{}, {}] misses mean word length {}",
                    r.estimate.lower, r.estimate.upper, r.mean_length
                )));
            }
            Ok(())
        }
    }
}

fn load_channel(run: &mut Run, path: &Path) -> Result<QuantumChannel, Failure> {
    let text = run.input(path)?;
    Ok(QuantumChannel::from_json_str(&text)?)
}

fn load_resource(run: &mut Run, path: &Path) -> Result<ResourceSet, Failure> {
    let text = run.input(path)?;
    Ok(ResourceSet::from_json_str(&text)?)
}

fn load_structure(run: &mut Run, path: &Path) -> Result<LipschitzStructure, Failure> {
    let resource = load_resource(run, path)?;
    Ok(LipschitzStructure::build(&resource)?)
}

/// Reads both inputs before any solve starts.
fn channel_and_structure(
    run: &mut Run,
    channel: &Path,
    resource: &Path,
) -> Result<(QuantumChannel, LipschitzStructure), Failure> {
    let ch = load_channel(run, channel)?;
    let res = load_resource(run, resource)?;
    if ch.dim() != res.dim() {
        return Err(Failure::Validation(format!(
            "channel acts on dimension {} but resources on {}",
            ch.dim(),
            res.dim()
        )));
    }
    Ok((ch, LipschitzStructure::build(&res)?))
}

fn solve_options(run: &mut Run, args: &SolveArgs, levels: &[usize]) -> Result<SolveOptions, Failure> {
    let mut o = SolveOptions::new(args.seed);
    o.restarts = args.restarts;
    o.max_iter = args.max_iter;
    o.lmo_iter = args.lmo_iter;
    o.lmo = match args.lmo {
        LmoArg::Admm => LmoMethod::Admm,
        LmoArg::DykstraAscent => LmoMethod::DykstraAscent,
    };
    o.step = args.step;
    o.tol = args.tol;
    o.levels = levels.to_vec();
    o.variant = match args.variant {
        VariantArg::Inf => NormVariant::Inf,
        VariantArg::L2 => NormVariant::L2,
        VariantArg::Gradient => NormVariant::Gradient,
    };
    for c in &args.certificates {
        let (name, value) = c
            .split_once('=')
            .ok_or_else(|| Failure::Validation(format!("certificate `{c}` is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Validation(format!("certificate `{c}` has a non-numeric value")))?;
        o.certificates.push(Certificate::new(name.trim(), value));
    }
    o.validate()?;
    run.set_options(&o);
    Ok(o)
}

fn write_estimate(run: &mut Run, quantity: &str, e: &ComplexityEstimate, claim: &str) -> Outcome {
    run.csv(
        &format!("{quantity}.csv"),
        &["quantity", "lower", "upper", "certificate_min", "witness_level", "seed", "claim"],
        &[vec![
            quantity.to_string(),
            num(e.lower),
            num(e.upper),
            num(e.certificate_min()),
            e.witness_level.to_string(),
            e.seed.to_string(),
            claim.to_string(),
        ]],
    )?;
    let rows: Vec<Vec<String>> = e
        .certificates
        .iter()
        .map(|c| vec![c.name.clone(), num(c.value), e.seed.to_string(), "upper-certificate".into()])
        .collect();
    run.csv(
        &format!("{quantity}_certificates.csv"),
        &["certificate", "value", "seed", "claim"],
        &rows,
    )?;
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    run.json(&format!("{quantity}.json"), e)
}

fn diamond(run: &mut Run, channel: &Path, reference: Option<&Path>) -> Outcome {
    let ch = load_channel(run, channel)?;
    let reference = match reference {
        Some(p) => load_channel(run, p)?,
        None => QuantumChannel::identity(ch.dim()),
    };
    let s = superop_difference(&ch, &reference)?;
    let r = diamond_norm(&s)?;
    run.csv(
        "diamond.csv",
        &["value", "primal", "dual", "gap", "iterations", "claim"],
        &[vec![
            num(r.value),
            num(r.primal),
            num(r.dual),
            num(r.gap),
            r.iterations.to_string(),
            "diamond-norm".into(),
        ]],
    )?;
    run.json("diamond.json", &r)
}

fn semigroup(run: &mut Run, args: &SemigroupArgs) -> Result<SemigroupFamily, Failure> {
    let weights = (!args.weights.is_empty()).then_some(args.weights.as_slice());
    let (kind, resource) = match (args.semigroup, &args.resource) {
        (Some(preset), None) => {
            let [_, x, y, z] = paulis();
            match preset {
                SemigroupPreset::PauliMixture => (SemigroupKind::Discrete, ResourceSet::discrete(vec![x, y, z])?),
                SemigroupPreset::PauliLindblad => (SemigroupKind::Lindblad, ResourceSet::continuous(vec![x, y, z])?),
                SemigroupPreset::Dephasing => (SemigroupKind::Lindblad, ResourceSet::continuous(vec![z])?),
            }
        }
        (None, Some(path)) => {
            let res = load_resource(run, path)?;
            let kind = match args.kind {
                Some(KindArg::Discrete) => SemigroupKind::Discrete,
                Some(KindArg::Lindblad) => SemigroupKind::Lindblad,
                None => return Err(Failure::Validation("--resource needs --kind".into())),
            };
            (kind, res)
        }
        _ => {
            return Err(Failure::Validation(
                "give either --semigroup or --resource with --kind".into(),
            ))
        }
    };
    Ok(make_semigroup(kind, &resource, weights)?)
}

fn return_time_report(
    run: &mut Run,
    args: &SemigroupArgs,
    eps: f64,
    norm: ReturnNormArg,
    seed: u64,
    plot: bool,
) -> Outcome {
    let family = semigroup(run, args)?;
    let norm = match norm {
        ReturnNormArg::Diamond => ReturnNorm::Diamond,
        ReturnNormArg::InfInfUpper => ReturnNorm::InfInfUpper,
    };
    let gap = family.spectral_gap()?;
    let r = return_time(&family, eps, norm)?;
    run.csv(
        "return_time.csv",
        &[
            "eps",
            "norm",
            "time",
            "resolution",
            "upper_bound_only",
            "monotone",
            "spectral_gap",
            "seed",
            "claim",
        ],
        &[vec![
            num(eps),
            serde_json::to_value(norm)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            num(r.time),
            num(r.resolution),
            r.upper_bound_only.to_string(),
            r.monotone.to_string(),
            num(gap),
            seed.to_string(),
            "return-time".into(),
        ]],
    )?;
    run.json("return_time.json", &r)?;
    if plot {
        let ts: Vec<f64> = (0..=40).map(|i| 3.0 * r.time * i as f64 / 40.0).collect();
        let ds = ts
            .iter()
            .map(|&t| Ok(diamond_norm(&family.distance_superop(t)?)?.value))
            .collect::<Result<Vec<f64>, Failure>>()?;
        let level = vec![eps; ts.len()];
        let svg = line_plot(
            "distance to the fixed-point projection",
            "t",
            &[
                Series {
                    label: "diamond distance",
                    x: &ts,
                    y: &ds,
                    color: "steelblue",
                },
                Series {
                    label: "threshold",
                    x: &ts,
                    y: &level,
                    color: "gray",
                },
            ],
        );
        run.text("return_time.svg", &svg)?;
    }
    Ok(())
}

fn parse_grid(grid: &str) -> Result<Option<Vec<f64>>, Failure> {
    if grid == "auto" {
        return Ok(None);
    }
    grid.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Validation(format!("grid entry `{s}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn trajectory(run: &mut Run, args: &SemigroupArgs, grid: &str, points: usize, solve: &SolveArgs, plot: bool) -> Outcome {
    let explicit = parse_grid(grid)?;
    if explicit.is_none() && points == 0 {
        return Err(Failure::Validation("--points must be positive".into()));
    }
    let family = semigroup(run, args)?;
    let opts = solve_options(run, solve, &[])?;
    let grid = match explicit {
        Some(g) => g,
        None => {
            let k = return_time(&family, 0.5, ReturnNorm::Diamond)?.time;
            default_grid(k, points)
        }
    };
    let rec = complexity_trajectory(&family, &grid, &opts)?;
    let claim = match family.kind() {
        SemigroupKind::Discrete => "semigroup-upper-line",
        SemigroupKind::Lindblad => "complexity-profile",
    };
    run.text("trajectory.csv", &rec.to_csv(claim))?;
    run.json("trajectory.json", &rec)?;
    if plot {
        let lower: Vec<f64> = rec.estimates.iter().map(|e| e.lower).collect();
        let upper: Vec<f64> = rec.estimates.iter().map(|e| e.upper).collect();
        let el = vec![rec.plateau.lower; grid.len()];
        let mut series = vec![
            Series {
                label: "lower",
                x: &grid,
                y: &lower,
                color: "steelblue",
            },
            Series {
                label: "upper",
                x: &grid,
                y: &upper,
                color: "firebrick",
            },
            Series {
                label: "expected length (lower)",
                x: &grid,
                y: &el,
                color: "gray",
            },
        ];
        if family.kind() == SemigroupKind::Discrete {
            series.push(Series {
                label: "t",
                x: &grid,
                y: &grid,
                color: "darkgreen",
            });
        }
        run.text("trajectory.svg", &line_plot("complexity along the semigroup", "t", &series))?;
    }
    Ok(())
}

fn qubit_channel(c: QubitChannel) -> Result<QuantumChannel, Failure> {
    Ok(match c {
        QubitChannel::Depolarizing => QuantumChannel::completely_depolarizing(2),
        QubitChannel::AdX => QuantumChannel::unitary(&paulis()[1])?,
    })
}

fn load_group(run: &mut Run, args: &GroupArgs) -> Result<GroupTable, Failure> {
    let generators: Vec<ComplexMatrix> = match (&args.group, &args.resource) {
        (Some(name), None) => preset_group(name)?,
        (None, Some(path)) => {
            let res = load_resource(run, path)?;
            if res.kind() != ResourceKind::Discrete {
                return Err(Failure::Validation("group generators must be a discrete resource".into()));
            }
            res.generators().to_vec()
        }
        _ => return Err(Failure::Validation("give either --group or --resource".into())),
    };
    if generators.is_empty() {
        return Err(Failure::Validation("group has no non-scalar generators".into()));
    }
    Ok(group_closure(&generators, args.max_order)?)
}

fn preset_group(name: &str) -> Result<Vec<ComplexMatrix>, Failure> {
    let lower = name.to_ascii_lowercase();
    if lower == "s3" {
        return Ok(vec![permutation_matrix(&[1, 0, 2]), permutation_matrix(&[0, 2, 1])]);
    }
    match lower.strip_prefix('z').map(str::parse::<usize>) {
        Some(Ok(n)) if (2..=64).contains(&n) => Ok(vec![cyclic_generator(n)]),
        _ => Err(Failure::Validation(format!("unknown group `{name}`; use z<n> (2 ≤ n ≤ 64) or s3"))),
    }
}
