use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use opprog_core::annotate::{dp_annotate, enumerate_programs, extract_rationale_trace, CandidateProgramSet};
use opprog_core::categorize::{classify, score_categories};
use opprog_core::datakit::{
    compute_stats, expand_annotations, find_near_duplicates, load_dataset, save_dataset, screen_solvability,
    validate_record, ProblemRecord,
};
use opprog_core::evalkit::{evaluate_predictions, load_beams};
use opprog_core::opcore::{evaluate, parse_program, validate_refs, Program};
use opprog_core::textnum::number_values;
use opprog_service::{build_platform, ServiceConfig};

use crate::config::CliConfig;
use crate::{CliError, Command};

pub fn run(command: Command, cfg: &CliConfig, json: bool) -> Result<String, CliError> {
    match command {
        Command::Exec { program, numbers, text } => exec(cfg, json, &program, numbers, text),
        Command::Parse { program, numbers_count } => parse(cfg, json, &program, numbers_count),
        Command::Categorize { text } => categorize(cfg, json, &text),
        Command::Annotate {
            problem,
            rationale,
            answer,
            dataset,
            max_len,
            constants,
        } => match (problem, rationale, answer) {
            (Some(p), Some(r), Some(a)) => annotate_one(cfg, json, &p, &r, a, max_len, constants),
            _ => annotate_dataset(cfg, json, dataset, max_len, constants),
        },
        Command::Enumerate {
            numbers,
            text,
            target,
            max_len,
            constants,
            order_variants,
        } => enumerate(cfg, json, numbers, text, target, max_len, constants, order_variants),
        Command::Stats { dataset } => stats(cfg, json, dataset),
        Command::Validate { dataset, fix } => validate(cfg, json, dataset, fix),
        Command::Duplicates { dataset, solvability } => duplicates(cfg, json, dataset, solvability),
        Command::Expand {
            annotated,
            unannotated,
            out,
        } => expand(cfg, json, &annotated, &unannotated, out),
        Command::Eval { dataset, beams } => eval(cfg, json, dataset, &beams),
        Command::Serve {
            service_config,
            host,
            port,
            problems,
            event_log,
        } => serve(cfg, service_config, host, port, problems, event_log),
    }
}

fn render(json: bool, value: Value, human: String) -> String {
    if json {
        format!("{value}\n")
    } else {
        human
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output serializes")
}

/// `-` reads stdin.
fn text_arg(arg: &str) -> Result<String, CliError> {
    let text = if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::new("io", format!("stdin: {e}")))?;
        s
    } else {
        arg.to_string()
    };
    if text.trim().is_empty() {
        return Err(CliError::new("usage", "input is empty"));
    }
    Ok(text.trim().to_string())
}

fn numbers_of(numbers: Vec<f64>, text: Option<String>) -> Vec<f64> {
    match text {
        Some(t) => number_values(&t),
        None => numbers,
    }
}

fn dataset_path(arg: Option<PathBuf>, cfg: &CliConfig) -> Result<PathBuf, CliError> {
    arg.or_else(|| cfg.dataset.clone()).ok_or_else(|| {
        CliError::new(
            "usage",
            "no dataset given (argument, OPPROG_DATASET or config `dataset`)",
        )
    })
}

fn load(path: &Path) -> Result<Vec<ProblemRecord>, CliError> {
    let (records, report) = load_dataset(path).map_err(|e| CliError::io(path, e))?;
    if !report.skipped.is_empty() || !report.program_errors.is_empty() {
        eprintln!(
            "{}: {} records skipped, {} programs unparseable",
            path.display(),
            report.skipped.len(),
            report.program_errors.len()
        );
    }
    Ok(records)
}

fn program_texts(programs: &[Program]) -> Vec<String> {
    programs.iter().map(Program::to_string).collect()
}

/// Maps `items` on `workers` threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if workers <= 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    let f = &f;
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn exec(
    cfg: &CliConfig,
    json: bool,
    program: &str,
    numbers: Vec<f64>,
    text: Option<String>,
) -> Result<String, CliError> {
    let source = text_arg(program)?;
    let p = parse_program(&source).map_err(|e| CliError::new("parse_error", e.to_string()))?;
    let numbers = numbers_of(numbers, text);
    let trace = evaluate(&p, &numbers, &cfg.load_registry()?, &cfg.load_constants()?)
        .map_err(|e| CliError::new("eval_error", e.to_string()))?;
    let mut human = String::new();
    for (k, (call, v)) in p.calls.iter().zip(&trace.step_values).enumerate() {
        let _ = writeln!(human, "#{k} {call} = {v}");
    }
    let _ = writeln!(human, "final = {}", trace.final_value);
    let value = json!({
        "program": p.to_string(),
        "numbers": numbers,
        "step_values": trace.step_values,
        "final_value": trace.final_value,
    });
    Ok(render(json, value, human))
}

fn parse(cfg: &CliConfig, json: bool, program: &str, numbers_count: Option<usize>) -> Result<String, CliError> {
    let source = text_arg(program)?;
    let p = parse_program(&source).map_err(|e| CliError::new("parse_error", e.to_string()))?;
    let n = numbers_count.unwrap_or_else(|| p.max_problem_ref().map_or(0, |m| m + 1));
    let report = validate_refs(&p, n, &cfg.load_registry()?, &cfg.load_constants()?);
    let mut human = format!("{p}\n");
    for v in &report.violations {
        let _ = writeln!(human, "violation: {v}");
    }
    let calls: Vec<Value> = p
        .calls
        .iter()
        .map(|c| json!({"op": c.op, "args": c.args.iter().map(|a| a.to_string()).collect::<Vec<_>>()}))
        .collect();
    let value = json!({"program": p.to_string(), "calls": calls, "violations": report.violations});
    Ok(render(json, value, human))
}

fn categorize(cfg: &CliConfig, json: bool, text: &str) -> Result<String, CliError> {
    let text = text_arg(text)?;
    let lexicon = cfg.load_lexicon()?;
    let scores = score_categories(&text, &lexicon);
    let category = classify(&text, &lexicon);
    let mut human = format!("{category}\n");
    for (c, s) in &scores.scores {
        let _ = writeln!(human, "  {c:<12} {s}");
    }
    let value = json!({"category": category, "scores": scores.scores});
    Ok(render(json, value, human))
}

fn candidates_json(set: &CandidateProgramSet) -> Value {
    json!({"status": set.status, "programs": program_texts(&set.programs)})
}

fn annotate_one(
    cfg: &CliConfig,
    json: bool,
    problem: &str,
    rationale: &str,
    answer: f64,
    max_len: Option<usize>,
    constants: Option<Vec<String>>,
) -> Result<String, CliError> {
    let search = cfg.search_cfg(max_len, constants.map(nonempty));
    let numbers = number_values(problem);
    let trace = extract_rationale_trace(rationale, &search.rationale_tol);
    let set = dp_annotate(
        &numbers,
        &trace,
        answer,
        &cfg.load_registry()?,
        &cfg.load_constants()?,
        &search,
    )
    .map_err(|e| CliError::new("search", e.to_string()))?;
    let mut human = format!("{}\n", to_value(&set.status).as_str().unwrap_or_default());
    for p in &set.programs {
        let _ = writeln!(human, "  {p}");
    }
    let mut value = candidates_json(&set);
    value["numbers"] = json!(numbers);
    value["trace"] = to_value(&trace);
    Ok(render(json, value, human))
}

fn nonempty(names: Vec<String>) -> Vec<String> {
    names.into_iter().filter(|s| !s.trim().is_empty()).collect()
}

fn annotate_dataset(
    cfg: &CliConfig,
    json: bool,
    dataset: Option<PathBuf>,
    max_len: Option<usize>,
    constants: Option<Vec<String>>,
) -> Result<String, CliError> {
    let records = load(&dataset_path(dataset, cfg)?)?;
    let search = cfg.search_cfg(max_len, constants.map(nonempty));
    let registry = cfg.load_registry()?;
    let consts = cfg.load_constants()?;
    let results = par_map(&records, cfg.workers, |r| {
        let Some(answer) = r.correct_value() else {
            return Err("correct option is not numeric".to_string());
        };
        let trace = extract_rationale_trace(&r.rationale, &search.rationale_tol);
        dp_annotate(&r.numbers(), &trace, answer, &registry, &consts, &search).map_err(|e| e.to_string())
    });
    let mut summary = serde_json::Map::new();
    let mut rows = Vec::new();
    let mut human = String::new();
    for (r, res) in records.iter().zip(&results) {
        let (key, row) = match res {
            Ok(set) => {
                let mut row = candidates_json(set);
                row["id"] = json!(r.id);
                (to_value(&set.status).as_str().unwrap_or_default().to_string(), row)
            }
            Err(e) => ("error".to_string(), json!({"id": r.id, "error": e})),
        };
        let n = row["programs"].as_array().map_or(0, Vec::len);
        let _ = writeln!(human, "{:<10} {:<22} {n}", r.id, key);
        *summary.entry(key).or_insert(json!(0)) = json!(summary.get(&key).and_then(Value::as_u64).unwrap_or(0) + 1);
        rows.push(row);
    }
    for (k, v) in &summary {
        let _ = writeln!(human, "{k}: {v}");
    }
    Ok(render(json, json!({"results": rows, "summary": summary}), human))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    cfg: &CliConfig,
    json: bool,
    numbers: Vec<f64>,
    text: Option<String>,
    target: f64,
    max_len: Option<usize>,
    constants: Option<Vec<String>>,
    order_variants: bool,
) -> Result<String, CliError> {
    let numbers = numbers_of(numbers, text);
    let ecfg = cfg.enumerate_cfg(max_len, constants.map(nonempty), order_variants);
    let programs = enumerate_programs(&numbers, &cfg.load_registry()?, &cfg.load_constants()?, target, &ecfg)
        .map_err(|e| CliError::new("search", e.to_string()))?;
    let texts = program_texts(&programs);
    let mut human = String::new();
    for t in &texts {
        let _ = writeln!(human, "{t}");
    }
    let _ = writeln!(human, "{} programs", texts.len());
    Ok(render(json, json!({"count": texts.len(), "programs": texts}), human))
}

fn stats(cfg: &CliConfig, json: bool, dataset: Option<PathBuf>) -> Result<String, CliError> {
    let records = load(&dataset_path(dataset, cfg)?)?;
    let s = compute_stats(&records);
    Ok(render(json, to_value(&s), s.to_table()))
}

fn validate(cfg: &CliConfig, json: bool, dataset: Option<PathBuf>, fix: Option<PathBuf>) -> Result<String, CliError> {
    let records = load(&dataset_path(dataset, cfg)?)?;
    let registry = cfg.load_registry()?;
    let consts = cfg.load_constants()?;
    let mcfg = cfg.match_cfg();
    let verdicts = par_map(&records, cfg.workers, |r| validate_record(r, &registry, &consts, &mcfg));
    let valid = verdicts.iter().filter(|v| v.is_valid()).count();
    let total = records.len();
    let fraction = if total == 0 { 0.0 } else { valid as f64 / total as f64 };
    let mut human = String::new();
    let mut invalid = Vec::new();
    for (r, v) in records.iter().zip(&verdicts) {
        if !v.is_valid() {
            let verdict = to_value(v);
            let _ = writeln!(human, "{} {verdict}", r.id);
            invalid.push(json!({"id": r.id, "verdict": verdict}));
        }
    }
    let _ = writeln!(human, "valid {valid}/{total} ({:.1}%)", 100.0 * fraction);
    let mut value = json!({
        "total": total,
        "valid": valid,
        "invalid": total - valid,
        "valid_fraction": fraction,
        "invalid_records": invalid,
    });
    if let Some(out) = fix {
        let kept: Vec<ProblemRecord> = records
            .into_iter()
            .zip(&verdicts)
            .filter(|(_, v)| v.is_valid())
            .map(|(r, _)| r)
            .collect();
        save_dataset(&kept, &out).map_err(|e| CliError::io(&out, e))?;
        let _ = writeln!(human, "wrote {} records to {}", kept.len(), out.display());
        value["fixed"] = json!({"path": out, "records": kept.len()});
    }
    Ok(render(json, value, human))
}

fn duplicates(cfg: &CliConfig, json: bool, dataset: Option<PathBuf>, solvability: bool) -> Result<String, CliError> {
    let records = load(&dataset_path(dataset, cfg)?)?;
    let dcfg = cfg.dedup_cfg();
    let texts: Vec<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    let clusters = find_near_duplicates(&texts, &dcfg).map_err(|e| CliError::new("budget", e.to_string()))?;
    let ids: Vec<Vec<&str>> = clusters
        .clusters
        .iter()
        .map(|c| c.iter().map(|&i| records[i].id.as_str()).collect())
        .collect();
    let mut human = String::new();
    for c in &ids {
        let _ = writeln!(human, "{}", c.join(" "));
    }
    let in_clusters: usize = ids.iter().map(Vec::len).sum();
    let _ = writeln!(human, "{} clusters, {in_clusters} records", ids.len());
    let mut value = json!({"clusters": ids, "records_in_clusters": in_clusters});
    if solvability {
        let labels = screen_solvability(&records, &dcfg).map_err(|e| CliError::new("budget", e.to_string()))?;
        let mut counts = std::collections::BTreeMap::<&str, usize>::new();
        for l in &labels {
            *counts.entry(l.as_str()).or_default() += 1;
        }
        for (k, n) in &counts {
            let _ = writeln!(human, "{k}: {n}");
        }
        let per_record: Vec<Value> = records
            .iter()
            .zip(&labels)
            .map(|(r, l)| json!({"id": r.id, "label": l}))
            .collect();
        value["solvability"] = json!({"counts": counts, "records": per_record});
    }
    Ok(render(json, value, human))
}

fn expand(
    cfg: &CliConfig,
    json: bool,
    annotated: &Path,
    unannotated: &Path,
    out: Option<PathBuf>,
) -> Result<String, CliError> {
    let donors = load(annotated)?;
    let targets = load(unannotated)?;
    let output = expand_annotations(
        &donors,
        &targets,
        &cfg.load_registry()?,
        &cfg.load_constants()?,
        &cfg.match_cfg(),
        &cfg.dedup_cfg(),
    )
    .map_err(|e| CliError::new("budget", e.to_string()))?;
    let r = &output.report;
    let mut human = format!(
        "attempted {} accepted {} rejected {}\n",
        r.attempted, r.accepted, r.rejected
    );
    let mut value = to_value(r);
    if let Some(path) = out {
        save_dataset(&output.records, &path).map_err(|e| CliError::io(&path, e))?;
        let _ = writeln!(human, "wrote {} records to {}", output.records.len(), path.display());
        value["written"] = json!(path);
    }
    Ok(render(json, value, human))
}

fn eval(cfg: &CliConfig, json: bool, dataset: Option<PathBuf>, beams: &str) -> Result<String, CliError> {
    let records = load(&dataset_path(dataset, cfg)?)?;
    let beams = if beams == "empty" {
        Vec::new()
    } else {
        let path = Path::new(beams);
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let (beams, dropped) = load_beams(&text).map_err(|e| CliError::new("beam_file", e.to_string()))?;
        if dropped > 0 {
            eprintln!("{dropped} unparseable beam programs dropped");
        }
        beams
    };
    let report = evaluate_predictions(
        &records,
        &beams,
        &cfg.load_registry()?,
        &cfg.load_constants()?,
        &cfg.match_cfg(),
    );
    Ok(render(json, to_value(&report), report.to_table()))
}

fn serve(
    cfg: &CliConfig,
    service_config: Option<PathBuf>,
    host: Option<String>,
    port: Option<u16>,
    problems: Option<PathBuf>,
    event_log: Option<PathBuf>,
) -> Result<String, CliError> {
    let svc_err = |e: opprog_service::ConfigError| CliError::new("config", e.to_string());
    let mut sc = match &service_config {
        Some(p) => ServiceConfig::from_file(p).map_err(svc_err)?,
        None => ServiceConfig::default(),
    };
    sc.apply_env(std::env::vars()).map_err(svc_err)?;
    if let Some(h) = host {
        sc.host = h;
    }
    if let Some(p) = port {
        sc.port = p;
    }
    sc.problems = problems.or(sc.problems).or_else(|| cfg.dataset.clone());
    sc.event_log = event_log.or(sc.event_log);
    sc.registry = cfg.registry.clone().or(sc.registry);
    sc.constants = cfg.constants.clone().or(sc.constants);
    sc.lexicon = cfg.lexicon.clone().or(sc.lexicon);
    let platform = build_platform(&sc).map_err(svc_err)?;
    let addr = format!("{}:{}", sc.host, sc.port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new("io", e.to_string()))?;
    rt.block_on(opprog_service::serve(platform, &addr))
        .map_err(|e| CliError::new("io", format!("{addr}: {e}")))?;
    Ok(String::new())
}
