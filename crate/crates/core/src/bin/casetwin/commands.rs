//! Subcommand handlers: resolve arguments, run the library, emit reports.

use std::path::{Path, PathBuf};

use serde_json::json;

use casetwin::augment::{cf_augment, retrain_eval, smote};
use casetwin::cf_series::{
    default_occlusion_window, native_guide_cf, occlusion_importance, series_nun,
};
use casetwin::cf_tabular::{
    generate_cf, mine_explanation_cases, wachter_cf, CfOptions, WachterConfig,
};
use casetwin::data::casebase::{Case, CaseBase};
use casetwin::data::io::{
    load_tabular_csv, load_tabular_csv_regression, load_timeseries_tsv, save_tabular_csv,
    save_timeseries_tsv, SchemaHint,
};
use casetwin::data::metric::euclidean;
use casetwin::data::synth::{synth_blobs, synth_imbalanced, synth_series};
use casetwin::data::DEFAULT_MATCH_TAU;
use casetwin::error::Error;
use casetwin::factual::{explain_factual, explain_factual_regression};
use casetwin::metrics::evaluate_explanation;
use casetwin::mlp::{
    load_model, save_model, train_classifier, train_regressor, train_series_classifier,
    TrainConfig,
};
use casetwin::report::{emit_report, feature_deltas, write_eval_csv, Report};
use casetwin::retrieval::{twin_fidelity, Space};
use casetwin::semifactual::{fit_hurdle, generate_sf_cf};

use crate::args::{
    parse_hidden, parse_means, AugmentArgs, BlobsArgs, CfArgs, Cli, Command, ConfigFile,
    EvalAugmentArgs, EvalCommand, ExplainCommand, FactualArgs, FidelityArgs, ImbalancedArgs,
    SeriesArgs, SfArgs, SynthCommand, TrainArgs, TsCfArgs,
};

/// Errors split by exit code: usage problems exit 1, data/model problems 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CmdResult = Result<(), CliError>;

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Globals resolved from flags and config.
struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    stdout: bool,
    threads: usize,
    cfg: ConfigFile,
}

impl Ctx {
    fn deliver(&self, report: &Report, default_name: &str) -> CmdResult {
        if self.stdout {
            println!(
                "{}",
                report.to_json_pretty().map_err(CliError::Data)?
            );
            if let Some(path) = &self.out {
                emit_report(report, path).map_err(CliError::Data)?;
            }
        } else {
            let path =
                self.out.clone().unwrap_or_else(|| PathBuf::from(default_name));
            emit_report(report, &path).map_err(CliError::Data)?;
            println!("{}", path.display());
        }
        Ok(())
    }

    fn artifact_path(&self, default_name: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default_name))
    }
}

pub fn run(cli: Cli) -> CmdResult {
    let cfg = ConfigFile::load(cli.config.as_ref()).map_err(usage)?;
    let ctx = Ctx {
        seed: cli.seed.or_else(|| cfg.u64("seed")).unwrap_or(0),
        out: cli.out.clone().or_else(|| cfg.path("out")),
        stdout: cli.stdout,
        threads: cli.threads.or_else(|| cfg.usize("threads")).unwrap_or(1).max(1),
        cfg,
    };
    match cli.command {
        Command::Train(args) => train(args, &ctx),
        Command::Explain(ExplainCommand::Factual(args)) => factual(args, &ctx),
        Command::Explain(ExplainCommand::Cf(args)) => counterfactual(args, &ctx),
        Command::Explain(ExplainCommand::Sf(args)) => semifactual(args, &ctx),
        Command::Explain(ExplainCommand::TsCf(args)) => series_cf(args, &ctx),
        Command::Augment(args) => augment(args, &ctx),
        Command::Eval(EvalCommand::Fidelity(args)) => fidelity(args, &ctx),
        Command::Eval(EvalCommand::Augment(args)) => eval_augment(args, &ctx),
        Command::Synth(SynthCommand::Blobs(args)) => synth_blobs_cmd(args, &ctx),
        Command::Synth(SynthCommand::Imbalanced(args)) => synth_imbalanced_cmd(args, &ctx),
        Command::Synth(SynthCommand::Series(args)) => synth_series_cmd(args, &ctx),
    }
}

fn load_cb(
    data: &Path,
    label: &str,
    hint: Option<&SchemaHint>,
    regression: bool,
) -> Result<CaseBase, CliError> {
    let cb = if regression {
        load_tabular_csv_regression(data, label)?
    } else {
        load_tabular_csv(data, label, hint)?
    };
    Ok(cb)
}

fn query_case(cb: &CaseBase, index: usize) -> Result<Case, CliError> {
    cb.cases()
        .get(index)
        .cloned()
        .ok_or_else(|| CliError::Data(Error::QueryIndexOutOfRange { index, len: cb.len() }))
}

fn train_config(
    ctx: &Ctx,
    epochs: Option<usize>,
    lr: Option<f64>,
    batch: Option<usize>,
    l2: Option<f64>,
) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        epochs: epochs.or_else(|| ctx.cfg.usize("epochs")).unwrap_or(d.epochs),
        learning_rate: lr.or_else(|| ctx.cfg.f64("lr")).unwrap_or(d.learning_rate),
        batch_size: batch.or_else(|| ctx.cfg.usize("batch-size")).unwrap_or(d.batch_size),
        seed: ctx.seed,
        l2: l2.or_else(|| ctx.cfg.f64("l2")).unwrap_or(d.l2),
    }
}

fn train(args: TrainArgs, ctx: &Ctx) -> CmdResult {
    let data = require(args.data.or_else(|| ctx.cfg.path("data")), "data")?;
    let hidden_s = args.hidden.or_else(|| ctx.cfg.string("hidden")).unwrap_or_else(|| "16".into());
    let hidden = parse_hidden(&hidden_s).map_err(usage)?;
    let cfg = train_config(ctx, args.epochs, args.lr, args.batch_size, args.l2);
    let (model, trace) = if args.series {
        let ds = load_timeseries_tsv(&data)?;
        train_series_classifier(&ds, &hidden, &cfg)?
    } else {
        let label = require(args.label.or_else(|| ctx.cfg.string("label")), "label")?;
        let hint = match args.schema.or_else(|| ctx.cfg.path("schema")) {
            Some(p) => Some(SchemaHint::from_file(p)?),
            None => None,
        };
        let cb = load_cb(&data, &label, hint.as_ref(), args.regression)?;
        if args.regression {
            train_regressor(&cb, &hidden, &cfg)?
        } else {
            train_classifier(&cb, &hidden, &cfg)?
        }
    };
    let path = ctx.artifact_path("model.json");
    save_model(&model, &path)?;
    eprintln!(
        "trained {} epochs, final loss {:.6}, model {}",
        trace.len(),
        trace.last().copied().unwrap_or(f64::NAN),
        model.fingerprint()
    );
    println!("{}", path.display());
    Ok(())
}

fn factual(args: FactualArgs, ctx: &Ctx) -> CmdResult {
    let model_path = require(args.model.or_else(|| ctx.cfg.path("model")), "model")?;
    let data = require(args.data.or_else(|| ctx.cfg.path("data")), "data")?;
    let label = require(args.label.or_else(|| ctx.cfg.string("label")), "label")?;
    let index = require(args.query_index.or_else(|| ctx.cfg.usize("query-index")), "query-index")?;
    let k = args.k.or_else(|| ctx.cfg.usize("k")).unwrap_or(3);

    let model = load_model(&model_path)?;
    let cb = load_cb(&data, &label, None, args.regression)?;
    let query = query_case(&cb, index)?;
    let exclude = if args.include_self { None } else { Some(query.id) };

    let config = json!({
        "command": "explain factual", "model": model_path, "data": data, "label": label,
        "query-index": index, "k": k, "include-self": args.include_self,
        "regression": args.regression, "seed": ctx.seed,
    });

    let payload = if args.regression {
        let neighbors = explain_factual_regression(&model, &cb, &query, k, exclude)?;
        let rows: Vec<_> = neighbors
            .iter()
            .map(|n| {
                let case = cb.case(n.case_id).expect("neighbor id");
                json!({
                    "case_id": n.case_id,
                    "distance": n.distance,
                    "outcome": n.outcome,
                    "values": case.features,
                })
            })
            .collect();
        json!({
            "query_index": index,
            "query_id": query.id,
            "query": query.features,
            "predicted_value": model.predict_value(&query)?,
            "neighbors": rows,
            "k": k,
        })
    } else {
        let x = model.encoder().encode(&query)?;
        let (query_class, query_contribs) = model.contributions(&x)?;
        let neighbors = explain_factual(&model, &cb, &query, k, exclude)?;
        let class_labels = cb.schema().class_labels();
        let rows: Vec<_> = neighbors
            .iter()
            .map(|n| {
                let case = cb.case(n.case_id).expect("neighbor id");
                json!({
                    "case_id": n.case_id,
                    "distance": n.distance,
                    "label": class_labels[case.label],
                    "values": case.features,
                    "contributions": n.contributions,
                    "attribution": n.attribution,
                })
            })
            .collect();
        json!({
            "query_index": index,
            "query_id": query.id,
            "query": query.features,
            "predicted_class": class_labels[query_class],
            "query_contributions": query_contribs,
            "query_attribution": model.input_attribution(&query)?,
            "neighbors": rows,
            "k": k,
        })
    };
    let report =
        Report::new("explain factual", ctx.seed, &config, Some(model.fingerprint()), payload);
    ctx.deliver(&report, "factual_report.json")
}

fn counterfactual(args: CfArgs, ctx: &Ctx) -> CmdResult {
    let method = args
        .method
        .or_else(|| ctx.cfg.string("method"))
        .unwrap_or_else(|| "casebased".into());
    if method != "casebased" && method != "wachter" {
        return Err(usage(format!("unknown --method '{method}' (casebased | wachter)")));
    }
    let model_path = require(args.model.or_else(|| ctx.cfg.path("model")), "model")?;
    let data = require(args.data.or_else(|| ctx.cfg.path("data")), "data")?;
    let label = require(args.label.or_else(|| ctx.cfg.string("label")), "label")?;
    let index = require(args.query_index.or_else(|| ctx.cfg.usize("query-index")), "query-index")?;
    let tau = args.tau.or_else(|| ctx.cfg.f64("tau")).unwrap_or(DEFAULT_MATCH_TAU);

    let model = load_model(&model_path)?;
    let cb = load_cb(&data, &label, None, false)?;
    let query = query_case(&cb, index)?;
    let target_class = match args.target_class.or_else(|| ctx.cfg.string("target-class")) {
        Some(s) => Some(cb.schema().resolve_class(&s)?),
        None => None,
    };

    let xcs = mine_explanation_cases(&cb, tau, 2);
    let (cf, config) = if method == "casebased" {
        let max_attempts =
            args.max_attempts.or_else(|| ctx.cfg.usize("max-attempts")).unwrap_or(50);
        let opts = CfOptions { tau, max_attempts, target: target_class };
        let config = json!({
            "command": "explain cf", "method": method, "model": model_path, "data": data,
            "label": label, "query-index": index, "tau": tau, "max-attempts": max_attempts,
            "target-class": target_class, "seed": ctx.seed,
        });
        (generate_cf(&query, &model, &cb, &xcs, &opts)?, config)
    } else {
        let query_class = model.predict_case(&query)?;
        let target = match target_class {
            Some(t) => t,
            None if cb.schema().class_count() == 2 => 1 - query_class,
            None => {
                return Err(usage(
                    "--target-class is required for the wachter method on multi-class data",
                ))
            }
        };
        let d = WachterConfig::default();
        let wcfg = WachterConfig {
            lambda_init: args.lambda_init.or_else(|| ctx.cfg.f64("lambda-init")).unwrap_or(d.lambda_init),
            lambda_double_every: args
                .lambda_double_every
                .or_else(|| ctx.cfg.usize("lambda-double-every"))
                .unwrap_or(d.lambda_double_every),
            step: args.step.or_else(|| ctx.cfg.f64("step")).unwrap_or(d.step),
            max_iters: args.max_iters.or_else(|| ctx.cfg.usize("max-iters")).unwrap_or(d.max_iters),
            tau,
        };
        let config = json!({
            "command": "explain cf", "method": method, "model": model_path, "data": data,
            "label": label, "query-index": index, "tau": tau, "target-class": target,
            "lambda-init": wcfg.lambda_init, "lambda-double-every": wcfg.lambda_double_every,
            "step": wcfg.step, "max-iters": wcfg.max_iters, "seed": ctx.seed,
        });
        (wachter_cf(&query, &model, target, &wcfg)?, config)
    };

    let metrics = evaluate_explanation(&query, &cf.instance, &model, &cb, &xcs, tau)?;
    let deltas = feature_deltas(cb.schema(), &query.features, &cf.instance, &cf.changed_features);
    let payload = json!({
        "method": method,
        "query_index": index,
        "counterfactual": cf,
        "metrics": metrics,
        "feature_deltas": deltas,
        "native_pair_count": xcs.len(),
    });
    let report =
        Report::new("explain cf", ctx.seed, &config, Some(model.fingerprint()), payload);
    ctx.deliver(&report, "cf_report.json")
}

fn semifactual(args: SfArgs, ctx: &Ctx) -> CmdResult {
    let model_path = require(args.model.or_else(|| ctx.cfg.path("model")), "model")?;
    let data = require(args.data.or_else(|| ctx.cfg.path("data")), "data")?;
    let label = require(args.label.or_else(|| ctx.cfg.string("label")), "label")?;
    let index = require(args.query_index.or_else(|| ctx.cfg.usize("query-index")), "query-index")?;
    let target_s =
        require(args.target_class.or_else(|| ctx.cfg.string("target-class")), "target-class")?;
    let alpha = args.alpha.or_else(|| ctx.cfg.f64("alpha")).unwrap_or(0.05);

    let model = load_model(&model_path)?;
    let cb = load_cb(&data, &label, None, false)?;
    let query = query_case(&cb, index)?;
    let target = cb.schema().resolve_class(&target_s)?;

    let stats = fit_hurdle(&model, &cb)?;
    let result = generate_sf_cf(&model, &stats, &cb, &query, target, alpha)?;

    let config = json!({
        "command": "explain sf", "model": model_path, "data": data, "label": label,
        "query-index": index, "target-class": target, "alpha": alpha, "seed": ctx.seed,
    });
    let sf_case = cb.case(result.semifactual.realized_case).expect("realized id");
    let cf_case = result
        .counterfactual
        .as_ref()
        .map(|c| cb.case(c.realized_case).expect("realized id"));
    let payload = json!({
        "query_index": index,
        "query": query.features,
        "target_class": cb.schema().class_labels()[target],
        "alpha": alpha,
        "exceptional_features": result.exceptional,
        "trace": result.trace,
        "steps_to_flip": result.steps_to_flip,
        "degenerate_semifactual": result.degenerate_semifactual,
        // Realized cases are retrieved training instances, not synthesized
        // points; the raw perturbed latents are included alongside.
        "realization": "retrieved-case",
        "semifactual": {
            "latent": result.semifactual.latent,
            "realized_case_id": result.semifactual.realized_case,
            "realized_values": sf_case.features,
        },
        "counterfactual": result.counterfactual.as_ref().map(|c| json!({
            "latent": c.latent,
            "realized_case_id": c.realized_case,
            "realized_values": cf_case.expect("present with counterfactual").features,
        })),
    });
    let report =
        Report::new("explain sf", ctx.seed, &config, Some(model.fingerprint()), payload);
    ctx.deliver(&report, "sf_report.json")
}

fn series_cf(args: TsCfArgs, ctx: &Ctx) -> CmdResult {
    let model_path = require(args.model.or_else(|| ctx.cfg.path("model")), "model")?;
    let data = require(args.data.or_else(|| ctx.cfg.path("data")), "data")?;
    let index = require(args.query_index.or_else(|| ctx.cfg.usize("query-index")), "query-index")?;

    let model = load_model(&model_path)?;
    let ds = load_timeseries_tsv(&data)?;
    let window = args
        .occlusion_window
        .or_else(|| ctx.cfg.usize("occlusion-window"))
        .unwrap_or_else(|| default_occlusion_window(ds.series_len()));
    let query = ds
        .instances()
        .get(index)
        .ok_or(Error::QueryIndexOutOfRange { index, len: ds.len() })?
        .clone();

    let mean_signal = ds.mean_signal();
    let importance = occlusion_importance(&model, &query.values, &mean_signal, window)?;
    let cf = native_guide_cf(&query.values, &model, &ds, &importance)?;
    let (nun_id, nun_distance) = series_nun(&query.values, &model, &ds)?;

    let config = json!({
        "command": "explain ts-cf", "model": model_path, "data": data,
        "query-index": index, "occlusion-window": window, "seed": ctx.seed,
    });
    let payload = json!({
        "query_index": index,
        "query_series": query.values,
        "counterfactual_series": cf.series,
        "window": { "start": cf.window.0, "end": cf.window.1 },
        "nun_id": nun_id,
        "nun_class": ds.class_labels()[cf.nun_class],
        "valid": cf.valid,
        "importance": importance,
        "distances": {
            "query_to_counterfactual": euclidean(&query.values, &cf.series),
            "query_to_nun": nun_distance,
        },
    });
    let report =
        Report::new("explain ts-cf", ctx.seed, &config, Some(model.fingerprint()), payload);
    ctx.deliver(&report, "ts_cf_report.json")
}

fn augment(args: AugmentArgs, ctx: &Ctx) -> CmdResult {
    let method =
        args.method.or_else(|| ctx.cfg.string("method")).unwrap_or_else(|| "cf".into());
    if method != "cf" && method != "smote" {
        return Err(usage(format!("unknown --method '{method}' (cf | smote)")));
    }
    let data = require(args.data.or_else(|| ctx.cfg.path("data")), "data")?;
    let label = require(args.label.or_else(|| ctx.cfg.string("label")), "label")?;
    let target_s =
        require(args.target_class.or_else(|| ctx.cfg.string("target-class")), "target-class")?;
    let count = require(args.count.or_else(|| ctx.cfg.usize("count")), "count")?;
    let tau = args.tau.or_else(|| ctx.cfg.f64("tau")).unwrap_or(DEFAULT_MATCH_TAU);

    let cb = load_cb(&data, &label, None, false)?;
    let target = cb.schema().resolve_class(&target_s)?;

    let synthetic = if method == "cf" {
        let model_path = require(args.model.or_else(|| ctx.cfg.path("model")), "model")?;
        let model = load_model(&model_path)?;
        cf_augment(&cb, &model, target, count, tau)?
    } else {
        let k = args.k.or_else(|| ctx.cfg.usize("k")).unwrap_or(5);
        smote(&cb, target, k, count, ctx.seed)?
    };

    // Emit only the synthetic cases, in the input CSV dialect.
    let synth_cb = CaseBase::new(cb.schema().clone(), synthetic)?;
    let path = ctx.artifact_path("synth.csv");
    save_tabular_csv(&synth_cb, &path)?;
    eprintln!("{} synthetic cases ({method})", synth_cb.len());
    println!("{}", path.display());
    Ok(())
}

fn fidelity(args: FidelityArgs, ctx: &Ctx) -> CmdResult {
    let model_path = require(args.model.or_else(|| ctx.cfg.path("model")), "model")?;
    let data = require(args.data.or_else(|| ctx.cfg.path("data")), "data")?;
    let label = require(args.label.or_else(|| ctx.cfg.string("label")), "label")?;
    let k = args.k.or_else(|| ctx.cfg.usize("k")).unwrap_or(3);

    let model = load_model(&model_path)?;
    let cb = load_cb(&data, &label, None, false)?;
    let contribution = twin_fidelity(&model, &cb, cb.cases(), k, Space::Contribution)?;
    let feature = twin_fidelity(&model, &cb, cb.cases(), k, Space::Feature)?;

    let config = json!({
        "command": "eval fidelity", "model": model_path, "data": data, "label": label,
        "k": k, "seed": ctx.seed,
    });
    let payload = json!({
        "fidelity": contribution,
        "feature_space_fidelity": feature,
        "k": k,
        "space": "contribution",
    });
    let report =
        Report::new("eval fidelity", ctx.seed, &config, Some(model.fingerprint()), payload);
    ctx.deliver(&report, "fidelity_report.json")
}

fn eval_augment(args: EvalAugmentArgs, ctx: &Ctx) -> CmdResult {
    let base = require(args.base.or_else(|| ctx.cfg.path("base")), "base")?;
    let holdout_path = require(args.holdout.or_else(|| ctx.cfg.path("holdout")), "holdout")?;
    let label = require(args.label.or_else(|| ctx.cfg.string("label")), "label")?;
    let variants_s = args.variants.or_else(|| ctx.cfg.string("variants")).unwrap_or_default();
    let hidden_s = args.hidden.or_else(|| ctx.cfg.string("hidden")).unwrap_or_else(|| "16".into());
    let hidden = parse_hidden(&hidden_s).map_err(usage)?;
    let cfg = train_config(ctx, args.epochs, args.lr, args.batch_size, args.l2);

    let base_cb = load_cb(&base, &label, None, false)?;
    let mut variants = vec![("base".to_string(), base_cb)];
    for part in variants_s.split(',').filter(|s| !s.trim().is_empty()) {
        let path = PathBuf::from(part.trim());
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| part.trim().to_string());
        variants.push((name, load_cb(&path, &label, None, false)?));
    }

    // The holdout comes from its own file, so its 0-based ids are remapped
    // past every training id; disjointness is then checked downstream.
    let holdout_raw = load_cb(&holdout_path, &label, None, false)?;
    let max_train_id = variants
        .iter()
        .flat_map(|(_, cb)| cb.max_id())
        .max()
        .unwrap_or(0);
    let shifted: Vec<Case> = holdout_raw
        .cases()
        .iter()
        .map(|c| Case { id: c.id + max_train_id + 1, ..c.clone() })
        .collect();
    let holdout = CaseBase::new(holdout_raw.schema().clone(), shifted)?;

    let rows = retrain_eval(&variants, &holdout, &hidden, &cfg, ctx.threads)?;
    if let Some(csv_path) = &args.csv {
        write_eval_csv(&rows, csv_path)?;
    }

    let config = json!({
        "command": "eval augment", "base": base, "variants": variants_s,
        "holdout": holdout_path, "label": label, "hidden": hidden_s,
        "epochs": cfg.epochs, "lr": cfg.learning_rate, "batch-size": cfg.batch_size,
        "l2": cfg.l2, "seed": ctx.seed, "threads": ctx.threads,
    });
    let payload = json!({
        "class_labels": variants[0].1.schema().class_labels(),
        "rows": rows,
    });
    let report = Report::new("eval augment", ctx.seed, &config, None, payload);
    ctx.deliver(&report, "eval_augment_report.json")
}

fn synth_blobs_cmd(args: BlobsArgs, ctx: &Ctx) -> CmdResult {
    let n = args.n_per_class.or_else(|| ctx.cfg.usize("n-per-class")).unwrap_or(100);
    let dims = args.dims.or_else(|| ctx.cfg.usize("dims")).unwrap_or(2);
    let means_s = args
        .means
        .or_else(|| ctx.cfg.string("means"))
        .unwrap_or_else(|| "0,0;3,3".into());
    let means = parse_means(&means_s).map_err(usage)?;
    let sigma = args.sigma.or_else(|| ctx.cfg.f64("sigma")).unwrap_or(1.0);
    let cb = synth_blobs(n, dims, &means, sigma, ctx.seed)?;
    let path = ctx.artifact_path("blobs.csv");
    save_tabular_csv(&cb, &path)?;
    println!("{}", path.display());
    Ok(())
}

fn synth_imbalanced_cmd(args: ImbalancedArgs, ctx: &Ctx) -> CmdResult {
    let majority = args.majority.or_else(|| ctx.cfg.usize("majority")).unwrap_or(95);
    let minority = args.minority.or_else(|| ctx.cfg.usize("minority")).unwrap_or(5);
    let cb = synth_imbalanced(majority, minority, ctx.seed)?;
    let path = ctx.artifact_path("imbalanced.csv");
    save_tabular_csv(&cb, &path)?;
    println!("{}", path.display());
    Ok(())
}

fn synth_series_cmd(args: SeriesArgs, ctx: &Ctx) -> CmdResult {
    let n = args.n_per_class.or_else(|| ctx.cfg.usize("n-per-class")).unwrap_or(100);
    let length = args.length.or_else(|| ctx.cfg.usize("length")).unwrap_or(64);
    let ds = synth_series(n, length, ctx.seed)?;
    let path = ctx.artifact_path("series.tsv");
    save_timeseries_tsv(&ds, &path)?;
    println!("{}", path.display());
    Ok(())
}
