//! The staged pipeline behind `annealc run`: every stage writes its
//! artifact into the output directory, so any prefix can be inspected or
//! a later stage rerun by hand.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use annealc::analysis::histogram;
use annealc::chimera::EmbeddedIsing;
use annealc::frontends::{count_satisfied, encode_maxsat, encode_mmc_tree, parse_dimacs, parse_tree, MulticutEncoding};
use annealc::qubo_ising::{parse_model, ModelFile};
use annealc::reduce::{reduce_to_quadratic, ReductionRecord};
use annealc::solvers::solve_embedded;
use annealc::{parse_pbf, IsingModel, PseudoBooleanFunction, Qubo, SampleSet};
use clap::{Args, ValueEnum};

use crate::commands::{
    best_projections, bit_string, build_solver, cut_line, embed_model, embedding_summary, parse_file,
    reduction_summary, tts_block, write,
};
use crate::error::CliError;
use crate::{ChimeraOpts, SolverKind, SolverOpts, TtsOpts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Stage {
    Parse,
    Encode,
    Reduce,
    ToIsing,
    Embed,
    Solve,
    Analyze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Pbf,
    Cnf,
    Tree,
    /// `ising` or `qubo` model file.
    Ising,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    input: PathBuf,
    /// Input format [default: from the file extension].
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Last stage to run.
    #[arg(long, value_enum, default_value_t = Stage::Analyze)]
    until: Stage,
    /// Directory for the artifacts (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    /// Pass the embed stage through and sample the logical model.
    #[arg(long)]
    no_embed: bool,
    /// Multicut penalty [default: number of pairs].
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    solver: SolverOpts,
    #[command(flatten)]
    chimera: ChimeraOpts,
    #[command(flatten)]
    tts: TtsOpts,
    /// Equal-width energy bins when there are more levels than this.
    #[arg(long)]
    bins: Option<usize>,
}

fn guess_format(path: &Path) -> Result<InputFormat, CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pbf") => Ok(InputFormat::Pbf),
        Some("cnf") => Ok(InputFormat::Cnf),
        Some("tree") => Ok(InputFormat::Tree),
        Some("ising" | "qubo") => Ok(InputFormat::Ising),
        _ => Err(CliError::Contract(format!("cannot tell the format of {}; pass --format", path.display()))),
    }
}

enum Domain {
    Plain,
    Maxsat(annealc::frontends::CnfFormula),
    Multicut(annealc::frontends::TreeMulticutInstance, MulticutEncoding),
}

struct Artifacts<'a> {
    dir: &'a Path,
    log: String,
}

impl Artifacts<'_> {
    fn put(&mut self, stage: &str, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write(&path, text)?;
        let _ = writeln!(self.log, "{stage}: wrote {}", path.display());
        Ok(())
    }

    fn note(&mut self, stage: &str, text: &str) {
        for line in text.lines() {
            let _ = writeln!(self.log, "{stage}: {line}");
        }
    }
}

pub fn run(a: &RunArgs) -> Result<String, CliError> {
    let format = a.format.map_or_else(|| guess_format(&a.input), Ok)?;
    if a.solver.solver == SolverKind::Bf && !a.no_embed && a.until >= Stage::Embed {
        return Err(CliError::Contract("--solver bf cannot sample an embedded model; add --no-embed".into()));
    }
    std::fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io { path: a.out_dir.clone(), source })?;
    let mut out = Artifacts { dir: &a.out_dir, log: String::new() };

    // parse, then encode: a polynomial, or a ready model for model input
    let (objective, model_input, domain) = match format {
        InputFormat::Pbf => {
            let f = parse_file(&a.input, parse_pbf)?;
            out.put("parse", "input.pbf", &f.render())?;
            (Some(f), None, Domain::Plain)
        }
        InputFormat::Cnf => {
            let cnf = parse_file(&a.input, parse_dimacs)?;
            out.put("parse", "input.cnf", &cnf.render())?;
            (Some(encode_maxsat(&cnf)), None, Domain::Maxsat(cnf))
        }
        InputFormat::Tree => {
            let inst = parse_file(&a.input, parse_tree)?;
            out.put("parse", "input.tree", &inst.render())?;
            let (h, enc) = encode_mmc_tree(&inst, a.lambda)?;
            (Some(h), None, Domain::Multicut(inst, enc))
        }
        InputFormat::Ising => {
            let m = parse_file(&a.input, parse_model)?;
            let text = match &m {
                ModelFile::Qubo(q) => q.render(),
                ModelFile::Ising(i) => i.render(),
            };
            out.put("parse", "input.model", &text)?;
            (None, Some(m), Domain::Plain)
        }
    };
    if a.until == Stage::Parse {
        return Ok(out.log);
    }

    match &objective {
        Some(f) => out.put("encode", "objective.pbf", &f.render())?,
        None => out.note("encode", "skipped for model input"),
    }
    if a.until == Stage::Encode {
        return Ok(out.log);
    }

    let reduction: Option<ReductionRecord> = objective.as_ref().map(reduce_to_quadratic);
    match &reduction {
        Some(r) => {
            out.put("reduce", "reduced.pbf", &r.result.render())?;
            out.put("reduce", "reduced.aux", &r.render_sidecar())?;
            out.note("reduce", &reduction_summary(r));
        }
        None => out.note("reduce", "skipped for model input"),
    }
    if a.until == Stage::Reduce {
        return Ok(out.log);
    }

    let model: IsingModel = match (&reduction, model_input) {
        (Some(r), _) => Qubo::from_pbf(&r.result)?.to_ising(),
        (None, Some(m)) => m.into_ising(),
        (None, None) => unreachable!("every format yields a polynomial or a model"),
    };
    out.put("to-ising", "model.ising", &model.render())?;
    if a.until == Stage::ToIsing {
        return Ok(out.log);
    }

    let embedded: Option<EmbeddedIsing> = if a.no_embed {
        out.note("embed", "skipped (--no-embed)");
        None
    } else {
        let em = embed_model(&model, &a.chimera, a.solver.seed)?;
        out.put("embed", "embedding.txt", &em.embedding.render())?;
        out.put("embed", "physical.ising", &em.physical.render())?;
        out.note("embed", &embedding_summary(&em));
        Some(em)
    };
    if a.until == Stage::Embed {
        return Ok(out.log);
    }

    let set = solve_stage(a, &model, embedded.as_ref(), &mut out)?;
    let h = histogram(&set, a.bins);
    out.put("solve", "histogram.csv", &h.to_csv())?;
    if a.until == Stage::Solve {
        return Ok(out.log);
    }

    let mut report = h.to_table();
    let original = objective.as_ref().map_or(model.num_vars(), PseudoBooleanFunction::num_vars);
    for x in best_projections(&set, original) {
        match &domain {
            Domain::Plain => {
                let _ = writeln!(report, "best assignment {}", bit_string(&x));
            }
            Domain::Maxsat(cnf) => {
                let sat = count_satisfied(cnf, &x)?;
                let _ = writeln!(report, "best assignment {}: {sat}/{} clauses satisfied", bit_string(&x), cnf.clauses.len());
            }
            Domain::Multicut(inst, enc) => report.push_str(&cut_line(inst, enc, &x)?),
        }
    }
    report.push_str(&tts_block(&set, &a.solver, &a.tts)?);
    out.put("analyze", "report.txt", &report)?;
    Ok(out.log)
}

fn solve_stage(
    a: &RunArgs,
    model: &IsingModel,
    embedded: Option<&EmbeddedIsing>,
    out: &mut Artifacts<'_>,
) -> Result<SampleSet, CliError> {
    let solver = build_solver(&a.solver)?;
    let o = &a.solver;
    match embedded {
        Some(em) => {
            if o.gauges > 0 {
                return Err(CliError::Contract("--gauges needs --no-embed".into()));
            }
            let r = solve_embedded(em, &solver, o.readouts, o.seed)?;
            out.note("solve", &format!("chain breaks: {:.2}% of readouts", 100.0 * r.chain_break_rate));
            Ok(r.logical)
        }
        None if o.gauges > 0 => {
            Ok(annealc::analysis::gauge_average(model, &solver, o.readouts, o.gauges, o.seed)?.combined)
        }
        None => Ok(solver.sample(model, o.readouts, o.seed)?),
    }
}
