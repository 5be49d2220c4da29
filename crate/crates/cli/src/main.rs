//! Command-line driver for the class-group pipeline: field inspection,
//! parameter reports, relation collection, class groups, ideal
//! decomposition, discrete logs, principality tests, and the
//! brute-force oracles.
//!
//! Exit codes: 0 on success, 2 on mathematical failure states (with a
//! machine-readable JSON error on standard output), 1 on usage errors.
//! Every result embeds the effective configuration and the version, and
//! identical configurations with identical seeds produce byte-identical
//! artifacts regardless of `--jobs`.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use nfclass::descent::{decompose, DescentConfig};
use nfclass::field::NumberField;
use nfclass::io::{
    field_spec_from_json, ideal_spec_from_json, relations_to_jsonl, write_int_matrix,
    write_real_matrix, FieldSpec,
};
use nfclass::ideals::Ideal;
use nfclass::oracle::{bqf_class_group, enumerate_class_group};
use nfclass::params::{derive_parameters, descent_schedule, ParamConfig, ParameterSet};
use nfclass::relations::{
    assemble_and_check, build_factor_base, build_relation_matrix_full_rank, sieve_relations,
    FactorBase, RelationMatrix,
};
use nfclass::solver::{class_group, discrete_log, is_principal, Principality};
use nfclass::{Error, Result};

#[derive(Parser)]
#[command(name = "nfclass", version, about = "Class groups, discrete logs and principality tests in monogenic number fields")]
struct Cli {
    /// Worker threads (0 keeps the library default); results do not
    /// depend on this
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a field and report its invariants
    Field {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Derived sieve parameters and the descent schedule
    Params {
        #[command(flatten)]
        field: FieldArgs,
        /// Schedule depth to print
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// List the factor base
    Factorbase {
        #[command(flatten)]
        field: FieldArgs,
        /// Factor-base bound (default: the derived smoothness bound)
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Collect verified relations into a JSON-lines file
    Relations {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Number of relations (default: the full-rank target)
        #[arg(long)]
        count: Option<usize>,
        /// Output file for the relations
        #[arg(long)]
        out: PathBuf,
        /// Also write the integer exponent block as matrix text
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        /// Also write the archimedean log block as matrix text
        #[arg(long)]
        logs_out: Option<PathBuf>,
    },
    /// Class number and invariant factors from the full pipeline
    Classgroup {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Cross-check against the enumeration oracle
        #[arg(long)]
        check_oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite an ideal over the factor base by descent
    Decompose {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Ideal spec: path to JSON, or inline JSON starting with '{'
        #[arg(long)]
        ideal: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrete log x with [b] = [a]^x in the class group
    Dlp {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Ideal spec for a (path or inline JSON)
        #[arg(long)]
        a: String,
        /// Ideal spec for b (path or inline JSON)
        #[arg(long)]
        b: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Principality test with a compact generator certificate
    Principal {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Ideal spec (path or inline JSON)
        #[arg(long)]
        ideal: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force class-group oracles
    Oracle {
        #[command(flatten)]
        field: FieldArgs,
        /// Negative quadratic-form discriminant for the form oracle
        #[arg(long, allow_hyphen_values = true)]
        disc: Option<i128>,
    },
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Field spec: path to JSON, or inline JSON starting with '{'
    #[arg(long, conflicts_with = "kummer")]
    field: Option<String>,
    /// Pure power field X^n - K, written as n,K
    #[arg(long, value_name = "N,K")]
    kummer: Option<String>,
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Factor-base bound (default: the derived smoothness bound)
    #[arg(long)]
    bound: Option<u64>,
    /// Master seed; subsystem streams are derived from it
    #[arg(long)]
    seed: u64,
    /// Bits of working precision for archimedean logs
    #[arg(long, default_value_t = 64)]
    precision: u32,
    /// Relation surplus constant override
    #[arg(long)]
    k_extra: Option<u32>,
}

impl FieldArgs {
    fn spec(&self) -> Result<FieldSpec> {
        match (&self.field, &self.kummer) {
            (Some(arg), None) => {
                if arg.trim_start().starts_with('{') {
                    field_spec_from_json(arg)
                } else {
                    field_spec_from_json(&fs::read_to_string(arg)?)
                }
            }
            (None, Some(nk)) => {
                let (n, k) = nk
                    .split_once(',')
                    .and_then(|(n, k)| Some((n.trim().parse().ok()?, k.trim().parse().ok()?)))
                    .ok_or_else(|| {
                        Error::InvalidInput("--kummer expects two integers as n,K".into())
                    })?;
                Ok(FieldSpec::from_kummer(n, k))
            }
            _ => Err(Error::InvalidInput(
                "exactly one of --field or --kummer is required".into(),
            )),
        }
    }
}

/// Derives a named subsystem seed from the master seed (FNV-1a fold of
/// the label, then a final mix), so streams can be re-seeded
/// independently without correlating.
fn stream(master: u64, label: &str) -> u64 {
    let mut h = master ^ 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^ (h >> 33)
}

fn big(v: &BigInt) -> Value {
    v.to_i64()
        .map(Value::from)
        .unwrap_or_else(|| Value::from(v.to_string()))
}

struct Pipeline {
    field: Arc<NumberField>,
    params: ParameterSet,
    fb: FactorBase,
    bound: u64,
}

fn setup(spec: &FieldSpec, pipe: &PipelineArgs) -> Result<Pipeline> {
    let field = spec.build()?;
    let mut params = derive_parameters(&field, &ParamConfig::default())?;
    if let Some(k) = pipe.k_extra {
        params.k_extra = k;
    }
    let bound = pipe.bound.unwrap_or(params.b);
    let fb = build_factor_base(&field, bound)?;
    Ok(Pipeline {
        field,
        params,
        fb,
        bound,
    })
}

fn load_ideal_arg(field: &Arc<NumberField>, arg: &str) -> Result<Ideal> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg)?
    };
    ideal_spec_from_json(&text)?.build(field)
}

// `--jobs` is deliberately absent: it only picks the worker count, and
// artifacts must stay byte-identical across it.
fn config_json(spec: &FieldSpec, pipe: Option<&PipelineArgs>, bound: Option<u64>) -> Value {
    let mut cfg = json!({
        "field": serde_json::to_value(spec).expect("spec serializes"),
    });
    if let Some(b) = bound {
        cfg["bound"] = json!(b);
    }
    if let Some(p) = pipe {
        cfg["seed"] = json!(p.seed);
        cfg["precision"] = json!(p.precision);
        if let Some(k) = p.k_extra {
            cfg["k_extra"] = json!(k);
        }
        cfg["streams"] = json!({
            "sieve": stream(p.seed, "sieve"),
            "descent": stream(p.seed, "descent"),
        });
    }
    cfg
}

fn emit(command: &str, config: Value, result: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "result": result,
    })
}

fn field_report(field: &Arc<NumberField>) -> Value {
    json!({
        "poly": field.poly.coeffs.iter().map(big).collect::<Vec<_>>(),
        "degree": field.degree,
        "disc": big(&field.disc),
        "real_places": field.real_places,
        "complex_places": field.complex_places,
        "unit_rank": field.unit_rank,
        "minkowski_bound": field.minkowski_bound,
    })
}

fn matrix_report(fb: &FactorBase, mat: &RelationMatrix) -> Result<(Value, BigInt)> {
    let check = assemble_and_check(mat)?;
    let invariants: Vec<Value> = class_group(mat)?.iter().map(big).collect();
    Ok((
        json!({
            "fb_size": fb.len(),
            "relations": mat.rows(),
            "rank": check.rank,
            "h": big(&check.hnf_det),
            "invariants": invariants,
        }),
        check.hnf_det,
    ))
}

fn run(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Field { field } => {
            let spec = field.spec()?;
            let f = spec.build()?;
            Ok(emit(
                "field",
                config_json(&spec, None, None),
                field_report(&f),
            ))
        }

        Command::Params { field, depth } => {
            let spec = field.spec()?;
            let f = spec.build()?;
            let p = derive_parameters(&f, &ParamConfig::default())?;
            let s = descent_schedule(p.kappa, *depth);
            Ok(emit(
                "params",
                config_json(&spec, None, None),
                json!({
                    "log2_disc": p.log2_disc,
                    "m": p.m,
                    "kappa": p.kappa,
                    "alpha": p.alpha,
                    "rho": p.rho,
                    "delta": p.delta,
                    "nu": p.nu,
                    "c_total": p.c_total,
                    "b": p.b,
                    "a": p.a,
                    "k": p.k,
                    "k_extra": p.k_extra,
                    "schedule": {
                        "e": s.e,
                        "chi": s.chi,
                        "sigma": s.sigma,
                        "c_inf": s.c_inf,
                        "e0": s.e0,
                        "taus": s.taus,
                        "cs": s.cs,
                        "sigmas": s.sigmas,
                    },
                }),
            ))
        }

        Command::Factorbase { field, bound } => {
            let spec = field.spec()?;
            let f = spec.build()?;
            let params = derive_parameters(&f, &ParamConfig::default())?;
            let bound = bound.unwrap_or(params.b);
            let fb = build_factor_base(&f, bound)?;
            let primes: Vec<Value> = fb
                .primes
                .iter()
                .map(|q| {
                    json!({
                        "p": q.p,
                        "g": q.g.coeffs,
                        "f": q.f,
                        "e": q.e,
                        "norm": big(&q.norm()),
                    })
                })
                .collect();
            Ok(emit(
                "factorbase",
                config_json(&spec, None, Some(bound)),
                json!({ "size": fb.len(), "primes": primes }),
            ))
        }

        Command::Relations {
            field,
            pipe,
            count,
            out,
            matrix_out,
            logs_out,
        } => {
            let spec = field.spec()?;
            let pl = setup(&spec, pipe)?;
            let r = pl.field.unit_rank;
            let count = count.unwrap_or_else(|| pl.params.relation_target(pl.fb.len(), r));
            let rels = sieve_relations(
                &pl.fb,
                &pl.params,
                count,
                stream(pipe.seed, "sieve"),
                pipe.precision,
            )?;
            fs::write(out, relations_to_jsonl(&rels)?)?;
            let mat = RelationMatrix::from_relations(pl.field.clone(), pl.fb.len(), &rels);
            if let Some(path) = matrix_out {
                write_int_matrix(path, &mat.mz)?;
            }
            if let Some(path) = logs_out {
                write_real_matrix(path, &mat.mr)?;
            }
            Ok(emit(
                "relations",
                config_json(&spec, Some(pipe), Some(pl.bound)),
                json!({
                    "count": rels.len(),
                    "fb_size": pl.fb.len(),
                    "out": out.display().to_string(),
                }),
            ))
        }

        Command::Classgroup {
            field,
            pipe,
            check_oracle,
            out,
        } => {
            let spec = field.spec()?;
            let pl = setup(&spec, pipe)?;
            let (mat, _) = build_relation_matrix_full_rank(
                &pl.fb,
                &pl.params,
                stream(pipe.seed, "sieve"),
                pipe.precision,
                6,
            )?;
            let (mut report, h) = matrix_report(&pl.fb, &mat)?;
            if *check_oracle {
                let (oh, oinv) = enumerate_class_group(&pl.field)?;
                let inv: Vec<Value> = class_group(&mat)?.iter().map(big).collect();
                let agrees = h == BigInt::from(oh)
                    && inv == oinv.iter().map(|d| json!(d)).collect::<Vec<_>>();
                report["oracle"] = json!({ "h": oh, "invariants": oinv });
                report["oracle_agrees"] = json!(agrees);
            }
            let value = emit(
                "classgroup",
                config_json(&spec, Some(pipe), Some(pl.bound)),
                report,
            );
            write_out(out.as_deref(), &value)?;
            Ok(value)
        }

        Command::Decompose {
            field,
            pipe,
            ideal,
            out,
        } => {
            let spec = field.spec()?;
            let pl = setup(&spec, pipe)?;
            let input = load_ideal_arg(&pl.field, ideal)?;
            let dec = decompose(
                &input,
                &pl.fb,
                &pl.params,
                stream(pipe.seed, "descent"),
                &DescentConfig::default(),
            )?;
            let exponents: Vec<Value> = dec
                .exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(i, &e)| {
                    let q = &pl.fb.primes[i];
                    json!({ "p": q.p, "g": q.g.coeffs, "norm": big(&q.norm()), "e": e })
                })
                .collect();
            let trace: Vec<Value> = dec
                .generator_trace
                .iter()
                .map(|(g, w)| {
                    json!({
                        "gamma": g.rep.coeffs.iter().map(big).collect::<Vec<_>>(),
                        "w": w,
                    })
                })
                .collect();
            let value = emit(
                "decompose",
                config_json(&spec, Some(pipe), Some(pl.bound)),
                json!({
                    "norm": big(&input.norm()),
                    "exponents": exponents,
                    "trace": trace,
                    "depth": dec.depth,
                    "max_exponent": dec.max_exponent,
                    "nodes": dec.visited.len(),
                }),
            );
            write_out(out.as_deref(), &value)?;
            Ok(value)
        }

        Command::Dlp {
            field,
            pipe,
            a,
            b,
            out,
        } => {
            let spec = field.spec()?;
            let pl = setup(&spec, pipe)?;
            let ideal_a = load_ideal_arg(&pl.field, a)?;
            let ideal_b = load_ideal_arg(&pl.field, b)?;
            let (mat, _) = build_relation_matrix_full_rank(
                &pl.fb,
                &pl.params,
                stream(pipe.seed, "sieve"),
                pipe.precision,
                6,
            )?;
            let x = discrete_log(
                &pl.fb,
                &mat,
                &pl.params,
                &ideal_a,
                &ideal_b,
                stream(pipe.seed, "descent"),
                pipe.precision,
                &DescentConfig::default(),
            )?;
            let value = emit(
                "dlp",
                config_json(&spec, Some(pipe), Some(pl.bound)),
                json!({ "x": big(&x) }),
            );
            write_out(out.as_deref(), &value)?;
            Ok(value)
        }

        Command::Principal {
            field,
            pipe,
            ideal,
            out,
        } => {
            let spec = field.spec()?;
            let pl = setup(&spec, pipe)?;
            let input = load_ideal_arg(&pl.field, ideal)?;
            let (mat, _) = build_relation_matrix_full_rank(
                &pl.fb,
                &pl.params,
                stream(pipe.seed, "sieve"),
                pipe.precision,
                6,
            )?;
            let verdict = is_principal(
                &pl.fb,
                &mat,
                &pl.params,
                &input,
                stream(pipe.seed, "descent"),
                &DescentConfig::default(),
            )?;
            let report = match verdict {
                Principality::Principal(rep) => {
                    let factors: Vec<Value> = rep
                        .factors
                        .iter()
                        .map(|(g, v)| {
                            json!({
                                "gamma": g.rep.coeffs.iter().map(big).collect::<Vec<_>>(),
                                "v": big(v),
                            })
                        })
                        .collect();
                    json!({ "principal": true, "rep": factors })
                }
                Principality::NonPrincipal => json!({ "principal": false }),
            };
            let value = emit(
                "principal",
                config_json(&spec, Some(pipe), Some(pl.bound)),
                report,
            );
            write_out(out.as_deref(), &value)?;
            Ok(value)
        }

        Command::Oracle { field, disc } => {
            match (disc, field.field.is_some() || field.kummer.is_some()) {
                (Some(d), false) => {
                    let (h, invariants, forms) = bqf_class_group(*d)?;
                    let forms: Vec<Value> = forms
                        .iter()
                        .map(|f| json!([f.a, f.b, f.c]))
                        .collect();
                    Ok(emit(
                        "oracle",
                        json!({ "disc": d.to_string() }),
                        json!({ "h": h, "invariants": invariants, "forms": forms }),
                    ))
                }
                (None, true) => {
                    let spec = field.spec()?;
                    let f = spec.build()?;
                    let (h, invariants) = enumerate_class_group(&f)?;
                    Ok(emit(
                        "oracle",
                        config_json(&spec, None, None),
                        json!({ "h": h, "invariants": invariants }),
                    ))
                }
                _ => Err(Error::InvalidInput(
                    "oracle takes either --disc or a field, not both".into(),
                )),
            }
        }
    }
}

fn write_out(path: Option<&std::path::Path>, value: &Value) -> Result<()> {
    if let Some(p) = path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(p, text)?;
    }
    Ok(())
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::RankDeficient { .. } => "rank_deficient",
        Error::DescentStuck { .. } => "descent_stuck",
        Error::NotInSubgroup => "not_in_subgroup",
        Error::NormTooLarge { .. } => "norm_too_large",
        Error::SearchSpaceExhausted { .. } => "search_space_exhausted",
        Error::NoSmoothFound => "no_smooth_found",
        Error::TooLarge(_) => "too_large",
        Error::BadDiscriminant(_) => "bad_discriminant",
        Error::InvalidInput(_) => "invalid_input",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        _ => "math_error",
    }
}

fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => 1,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let failed = e.use_stderr();
        let _ = e.print();
        std::process::exit(if failed { 1 } else { 0 });
    });
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .ok();
    }
    match run(&cli) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        }
        Err(e) => {
            let payload = json!({
                "error": { "kind": error_kind(&e), "message": e.to_string() },
                "version": env!("CARGO_PKG_VERSION"),
            });
            println!("{}", serde_json::to_string_pretty(&payload).expect("serializable"));
            std::process::exit(error_exit_code(&e));
        }
    }
}
