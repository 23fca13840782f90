use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use travesty_core::equilibrium::solve_static;
use travesty_core::ingest::{
    compare_with_preset, estimate_model, open_traffic, parse_records, TrafficSchema,
};
use travesty_core::json::real;
use travesty_core::metrics::{roc_sweep, write_roc_csv, RatePoint};
use travesty_core::receiver::best_response;
use travesty_core::{
    simulate, Belief, GameConfig, GameTrace, NumberFormat, ProspectPlan, SignalModel,
};

use crate::args::{
    IngestArgs, ModelArgs, OutputArgs, RespondArgs, RocArgs, SimulateArgs, SolveArgs,
};
use crate::manifest::RunManifest;
use crate::plot::{Chart, Series};

struct Artifact {
    name: &'static str,
    contents: Vec<u8>,
}

fn number_format(output: &OutputArgs) -> NumberFormat {
    if output.full_precision {
        NumberFormat::Full
    } else {
        NumberFormat::Significant
    }
}

fn model_config(args: &ModelArgs) -> Value {
    match &args.model_csv {
        Some(path) => json!({ "model_csv": path.display().to_string(), "ph1": args.ph1 }),
        None => json!({ "theta1": args.theta1, "theta0": args.theta0, "ph1": args.ph1 }),
    }
}

fn load_model(args: &ModelArgs) -> Result<(SignalModel, Belief)> {
    let model = match &args.model_csv {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            SignalModel::from_csv(BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))?
        }
        None => SignalModel::bernoulli(args.theta1, args.theta0)?,
    };
    Ok((model, Belief::new(args.ph1)?))
}

fn model_inputs(args: &ModelArgs) -> Vec<&Path> {
    args.model_csv.iter().map(|p| p.as_path()).collect()
}

fn full_config(model: &ModelArgs, output: &OutputArgs, extra: Value) -> Value {
    let mut config = model_config(model);
    let map = config.as_object_mut().expect("object");
    if let Value::Object(extra) = extra {
        map.extend(extra);
    }
    map.insert("full_precision".into(), json!(output.full_precision));
    map.insert(
        "out".into(),
        json!(output.out.as_ref().map(|p| p.display().to_string())),
    );
    config
}

/// Either prints the manifest (dry run) or writes the artifacts.
fn finish(output: &OutputArgs, mut manifest: RunManifest, artifacts: Vec<Artifact>) -> Result<()> {
    manifest.outputs = artifacts.iter().map(|a| a.name.to_string()).collect();
    match &output.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for a in &artifacts {
                let path = dir.join(a.name);
                fs::write(&path, &a.contents)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let mut text = serde_json::to_string_pretty(&manifest.to_json())?;
            text.push('\n');
            fs::write(dir.join("manifest.json"), text).context("writing manifest.json")?;
        }
        None => {
            let primary = artifacts.first().context("nothing to write")?;
            manifest.outputs = vec!["<stdout>".into()];
            io::stdout().write_all(&primary.contents)?;
            eprintln!("{}", serde_json::to_string_pretty(&manifest.to_json())?);
        }
    }
    Ok(())
}

fn dry_run(manifest: &RunManifest) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&manifest.to_json())?);
    Ok(())
}

fn json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    let config = full_config(
        &args.model,
        &args.output,
        json!({ "beta": args.beta.get(), "zeta": args.zeta.get(), "K": args.k }),
    );
    let manifest = RunManifest::new("solve", config, &model_inputs(&args.model))?;
    if args.output.dry_run {
        return dry_run(&manifest);
    }
    let (model, belief) = load_model(&args.model)?;
    let sol = solve_static(&belief, args.beta, args.zeta, args.k as usize, &model)?;
    let doc = sol.to_json(number_format(&args.output));
    finish(
        &args.output,
        manifest,
        vec![Artifact {
            name: "solution.json",
            contents: json_bytes(&doc)?,
        }],
    )
}

fn roc_chart(points: &[RatePoint]) -> String {
    let mut zetas: Vec<f64> = points.iter().map(|p| p.zeta).collect();
    zetas.dedup();
    let mut series: Vec<Series> = zetas
        .iter()
        .map(|&z| Series {
            name: format!("zeta = {z}"),
            points: points
                .iter()
                .filter(|p| p.zeta == z)
                .map(|p| (p.pf_bar, p.pd))
                .collect(),
            dashed: false,
        })
        .collect();
    if let Some(&z) = zetas.first() {
        series.push(Series {
            name: "classical".into(),
            points: points
                .iter()
                .filter(|p| p.zeta == z)
                .map(|p| (p.pf_bar, p.pd_bar))
                .collect(),
            dashed: true,
        });
    }
    Chart {
        title: "ROC of the manipulated attacker",
        x_label: "P_F (classical)",
        y_label: "P_D (quantum)",
        x_range: (0.0, 1.0),
        y_range: (0.0, 1.0),
        series,
    }
    .render()
}

pub fn roc(args: &RocArgs) -> Result<()> {
    let config = full_config(
        &args.model,
        &args.output,
        json!({
            "beta_grid": args.beta_grid.text,
            "beta_values": args.beta_grid.values.len(),
            "zeta": args.zeta.iter().map(|z| z.get()).collect::<Vec<_>>(),
            "K": travesty_core::metrics::SWEEP_MIND_STATES,
            "plot": args.plot,
        }),
    );
    let manifest = RunManifest::new("roc", config, &model_inputs(&args.model))?;
    if args.output.dry_run {
        return dry_run(&manifest);
    }
    let (model, belief) = load_model(&args.model)?;
    let points = roc_sweep(&model, &belief, &args.zeta, &args.beta_grid.values)?;
    let mut csv = Vec::new();
    write_roc_csv(&points, number_format(&args.output), &mut csv)?;
    let mut artifacts = vec![Artifact {
        name: "roc.csv",
        contents: csv,
    }];
    if args.plot {
        artifacts.push(Artifact {
            name: "roc.svg",
            contents: roc_chart(&points).into_bytes(),
        });
    }
    finish(&args.output, manifest, artifacts)
}

fn trajectory_chart(trace: &GameTrace) -> String {
    let stage_points = |f: &dyn Fn(&travesty_core::StageRecord) -> f64| -> Vec<(f64, f64)> {
        trace
            .stages
            .iter()
            .map(|r| (r.stage as f64, f(r)))
            .collect()
    };
    let mut series = vec![Series {
        name: "belief p(H1)".into(),
        points: stage_points(&|r| r.belief_after.p_h1()),
        dashed: false,
    }];
    for (s, label) in trace.signals.iter().enumerate() {
        series.push(Series {
            name: format!("u1({label})"),
            points: stage_points(&|r| r.u1[s]),
            dashed: false,
        });
        series.push(Series {
            name: format!("u0({label})"),
            points: stage_points(&|r| r.u0[s]),
            dashed: true,
        });
    }
    Chart {
        title: "Stage strategies and belief",
        x_label: "stage",
        y_label: "value",
        x_range: (1.0, trace.config.horizon.max(2) as f64),
        y_range: (0.0, 1.0),
        series,
    }
    .render()
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let config = full_config(
        &args.model,
        &args.output,
        json!({
            "beta": args.beta.get(),
            "zeta": args.zeta.get(),
            "K": args.k,
            "seed": args.seed,
            "horizon": args.horizon,
            "true_type": format!("{:?}", args.true_type).to_lowercase(),
            "u0_convention": match args.u0_convention {
                crate::args::Convention::Static => "static",
                crate::args::Convention::DynamicPaper => "dynamic-paper",
            },
            "plot": args.plot,
        }),
    );
    let manifest = RunManifest::new("simulate", config, &model_inputs(&args.model))?;
    if args.output.dry_run {
        return dry_run(&manifest);
    }
    let (model, belief) = load_model(&args.model)?;
    let mut game = GameConfig::constant(
        args.horizon as usize,
        args.true_type.into(),
        args.beta,
        args.zeta,
        args.k as usize,
        args.seed,
    );
    game.u0_convention = args.u0_convention.into();
    let trace = simulate(&game, &model, belief)?;
    let mut artifacts = vec![Artifact {
        name: "trace.jsonl",
        contents: trace.to_jsonl(number_format(&args.output)).into_bytes(),
    }];
    if args.plot {
        artifacts.push(Artifact {
            name: "trajectory.svg",
            contents: trajectory_chart(&trace).into_bytes(),
        });
    }
    finish(&args.output, manifest, artifacts)?;
    if let Some(reason) = &trace.aborted {
        bail!("simulation aborted: {reason}");
    }
    Ok(())
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let delimiter = match args.delimiter {
        b'\t' => "\\t".to_string(),
        d => (d as char).to_string(),
    };
    let config = json!({
        "input": args.input.display().to_string(),
        "label_col": args.label_col,
        "login_col": args.login_col,
        "delimiter": delimiter,
        "strict": args.strict,
        "full_precision": args.output.full_precision,
        "out": args.output.out.as_ref().map(|p| p.display().to_string()),
    });
    let manifest = RunManifest::new("ingest", config, &[args.input.as_path()])?;
    if args.output.dry_run {
        return dry_run(&manifest);
    }
    let schema = TrafficSchema {
        label_column: args.label_col,
        login_column: args.login_col,
        delimiter: args.delimiter,
        strict: args.strict,
        ..TrafficSchema::default()
    };
    let reader =
        open_traffic(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let summary = parse_records(reader, &schema)?;
    let (belief, model) = estimate_model(&summary)?;
    let comparison = compare_with_preset(&summary)?;
    let fmt = number_format(&args.output);
    let reals = |xs: &[f64]| xs.iter().map(|&x| real(x, fmt)).collect::<Vec<_>>();
    let doc = json!({
        "summary": serde_json::to_value(summary)?,
        "belief": belief.to_json(fmt),
        "model": {
            "signals": model.signals(),
            "polarity": { "0": "login success", "1": "login failure" },
            "f1": reals(model.f1()),
            "f0": reals(model.f0()),
        },
        "preset_comparison": {
            "p_h1_estimated": real(comparison.p_h1_estimated, fmt),
            "p_h1_preset": real(comparison.p_h1_preset, fmt),
            "attack_success_rate": real(comparison.attack_success_rate, fmt),
            "normal_success_rate": real(comparison.normal_success_rate, fmt),
            "theta1_preset": real(comparison.theta1_preset, fmt),
            "theta0_preset": real(comparison.theta0_preset, fmt),
            "theta1_gap": real(comparison.theta1_gap, fmt),
            "theta0_gap": real(comparison.theta0_gap, fmt),
        },
    });
    if summary.skipped > 0 {
        eprintln!("warning: skipped {} malformed rows", summary.skipped);
    }
    let mut csv = Vec::new();
    model.write_csv(&mut csv)?;
    finish(
        &args.output,
        manifest,
        vec![
            Artifact {
                name: "model.json",
                contents: json_bytes(&doc)?,
            },
            Artifact {
                name: "model.csv",
                contents: csv,
            },
        ],
    )
}

pub fn respond(args: &RespondArgs) -> Result<()> {
    let config = full_config(
        &args.model,
        &args.output,
        json!({ "beta": args.beta.get(), "plan": args.plan.display().to_string() }),
    );
    let mut inputs = model_inputs(&args.model);
    inputs.push(args.plan.as_path());
    let manifest = RunManifest::new("respond", config, &inputs)?;
    if args.output.dry_run {
        return dry_run(&manifest);
    }
    let (model, belief) = load_model(&args.model)?;
    let text = fs::read_to_string(&args.plan)
        .with_context(|| format!("reading {}", args.plan.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.plan.display()))?;
    // accept either a bare plan or a full solution document
    let plan = ProspectPlan::from_json(value.get("plan").unwrap_or(&value)).with_context(|| {
        format!(
            "invalid plan in {}; plans must be written with --full-precision",
            args.plan.display()
        )
    })?;
    let rule = best_response(&belief, args.beta, &model, &plan)?;
    let doc = rule.to_json(model.signals(), number_format(&args.output));
    finish(
        &args.output,
        manifest,
        vec![Artifact {
            name: "rule.json",
            contents: json_bytes(&doc)?,
        }],
    )
}
