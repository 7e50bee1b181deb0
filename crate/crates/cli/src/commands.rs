use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use annealc::analysis::{gauge_average, histogram, time_to_solution, TimeModel};
use annealc::chimera::{
    build_chimera, default_chain_strength, embed_weights, find_embedding, parse_qubit_list, ChimeraGraph,
    EmbeddedIsing, LogicalGraph,
};
use annealc::frontends::{
    count_satisfied, decode_mmc, encode_maxsat, encode_mmc_tree, parse_dimacs, parse_tree, CnfFormula,
    MulticutEncoding, TreeMulticutInstance,
};
use annealc::qubo_ising::{bits_from_spins, ising_to_qubo, parse_model, ModelFile};
use annealc::reduce::{reduce_to_quadratic, GadgetKind, ReductionRecord};
use annealc::solvers::{minimize_pbf, solve_embedded, SaSchedule, SqaSchedule};
use annealc::{parse_pbf, IsingModel, PseudoBooleanFunction, Qubo, SampleSet, Solver};

use crate::error::CliError;
use crate::{ChimeraOpts, EmbedOpts, Format, ModelKind, OutputOpts, SolverKind, SolverOpts, TtsOpts};

/// Readout and programming times of the machine-time estimate.
const PROGRAMMING: Duration = Duration::from_millis(9);
const READOUT: Duration = Duration::from_micros(120);

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Reads `path` and parses it, tagging errors with the file name.
pub fn parse_file<T, E: Into<CliError>>(path: &Path, parse: impl FnOnce(&str) -> Result<T, E>) -> Result<T, CliError> {
    parse(&read(path)?).map_err(|e| e.into().in_file(path))
}

fn first_token(text: &str) -> Option<&str> {
    text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty())?.split_whitespace().next()
}

/// A quadratic model from either a `qubo`/`ising` model file or a
/// polynomial file of degree at most two.
pub fn load_quadratic(path: &Path) -> Result<ModelFile, CliError> {
    let text = read(path)?;
    let parsed = match first_token(&text) {
        Some("qubo" | "ising") => parse_model(&text).map_err(CliError::from),
        _ => parse_pbf(&text).map_err(CliError::from).and_then(|f| Ok(ModelFile::Qubo(Qubo::from_pbf(&f)?))),
    };
    parsed.map_err(|e| e.in_file(path))
}

pub fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

pub(crate) fn spin_string(spins: &[i8]) -> String {
    spins.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn build_solver(o: &SolverOpts) -> Result<Solver, CliError> {
    let misplaced = |flags: &[(&str, bool)], solver: &str| -> Result<(), CliError> {
        match flags.iter().find(|(_, set)| *set) {
            Some((flag, _)) => Err(CliError::Contract(format!("--{flag} does not apply to --solver {solver}"))),
            None => Ok(()),
        }
    };
    let sa_flags = [("t0", o.t0.is_some()), ("cooling", o.cooling.is_some()), ("steps", o.steps.is_some())];
    let sqa_flags = [
        ("trotter", o.trotter.is_some()),
        ("gamma0", o.gamma0.is_some()),
        ("gamma-final", o.gamma_final.is_some()),
        ("temp", o.temp.is_some()),
    ];
    match o.solver {
        SolverKind::Bf => {
            misplaced(&sa_flags, "bf")?;
            misplaced(&sqa_flags, "bf")?;
            misplaced(&[("sweeps", o.sweeps.is_some())], "bf")?;
            Ok(Solver::BruteForce { levels: o.levels })
        }
        SolverKind::Sa => {
            misplaced(&sqa_flags, "sa")?;
            let d = SaSchedule::default();
            Ok(Solver::Sa(SaSchedule {
                t0: o.t0.unwrap_or(d.t0),
                cooling: o.cooling.unwrap_or(d.cooling),
                sweeps_per_temp: o.sweeps.unwrap_or(d.sweeps_per_temp),
                steps: o.steps.unwrap_or(d.steps),
            }))
        }
        SolverKind::Sqa => {
            misplaced(&sa_flags, "sqa")?;
            let d = SqaSchedule::default();
            Ok(Solver::Sqa(SqaSchedule {
                trotter_slices: o.trotter.unwrap_or(d.trotter_slices),
                gamma0: o.gamma0.unwrap_or(d.gamma0),
                gamma_final: o.gamma_final.unwrap_or(d.gamma_final),
                temperature: o.temp.unwrap_or(d.temperature),
                sweeps: o.sweeps.unwrap_or(d.sweeps),
            }))
        }
    }
}

fn describe_solver(o: &SolverOpts, s: &Solver) -> String {
    match s {
        Solver::BruteForce { levels } => format!("bf (exact, {levels} lowest levels)"),
        Solver::Sa(sch) => format!(
            "sa (t0 {}, cooling {}, {} temperatures x {} sweeps; {} readouts, seed {})",
            sch.t0, sch.cooling, sch.steps, sch.sweeps_per_temp, o.readouts, o.seed
        ),
        Solver::Sqa(sch) => format!(
            "sqa ({} slices, gamma {} -> {}, T {}, {} sweeps; {} readouts, seed {})",
            sch.trotter_slices, sch.gamma0, sch.gamma_final, sch.temperature, sch.sweeps, o.readouts, o.seed
        ),
    }
}

pub fn chimera(o: &ChimeraOpts) -> Result<ChimeraGraph, CliError> {
    let dead = match &o.inoperable {
        Some(p) => parse_file(p, parse_qubit_list)?,
        None => Vec::new(),
    };
    Ok(build_chimera(o.rows, o.cols, o.shore, dead)?)
}

pub fn embed_model(m: &IsingModel, o: &ChimeraOpts, seed: u64) -> Result<EmbeddedIsing, CliError> {
    let c = chimera(o)?;
    let e = find_embedding(&LogicalGraph::from_ising(m), &c, seed, o.tries)?;
    let strength = o.chain_strength.unwrap_or_else(|| default_chain_strength(m));
    Ok(embed_weights(m, &c, &e, strength)?)
}

pub(crate) fn embedding_summary(em: &EmbeddedIsing) -> String {
    format!(
        "embedding: {} physical qubits, longest chain {}, chain strength {}\n",
        em.embedding.num_qubits_used(),
        em.embedding.max_chain_len(),
        em.chain_strength
    )
}

/// Samples `m` directly, under gauges, or through an embedding.
pub struct Sampled {
    pub set: SampleSet,
    pub notes: String,
}

pub fn sample(m: &IsingModel, o: &SolverOpts, embed: &EmbedOpts) -> Result<Sampled, CliError> {
    let solver = build_solver(o)?;
    let mut notes = format!("solver: {}\n", describe_solver(o, &solver));
    if embed.embed {
        if o.gauges > 0 {
            return Err(CliError::Contract("--gauges cannot be combined with --embed".into()));
        }
        let em = embed_model(m, &embed.chimera, o.seed)?;
        if let Some(p) = &embed.embedding_out {
            write(p, &em.embedding.render())?;
        }
        let out = solve_embedded(&em, &solver, o.readouts, o.seed)?;
        notes.push_str(&embedding_summary(&em));
        let _ = writeln!(notes, "chain breaks: {:.2}% of readouts", 100.0 * out.chain_break_rate);
        return Ok(Sampled { set: out.logical, notes });
    }
    if o.gauges > 0 {
        let avg = gauge_average(m, &solver, o.readouts, o.gauges, o.seed)?;
        let _ = writeln!(notes, "gauges: {} ({} readouts each)", avg.num_gauges, o.readouts);
        return Ok(Sampled { set: avg.combined, notes });
    }
    Ok(Sampled { set: solver.sample(m, o.readouts, o.seed)?, notes })
}

fn histogram_block(set: &SampleSet, out: &OutputOpts) -> Result<(String, String), CliError> {
    let h = histogram(set, out.bins);
    let csv = h.to_csv();
    if let Some(p) = &out.csv {
        write(p, &csv)?;
    }
    Ok((h.to_table(), csv))
}

pub(crate) fn tts_block(set: &SampleSet, o: &SolverOpts, tts: &TtsOpts) -> Result<String, CliError> {
    let Some(target) = tts.target_p else { return Ok(String::new()) };
    if o.solver == SolverKind::Bf {
        return Err(CliError::Contract("--target-p needs a sampling solver (sa or sqa)".into()));
    }
    if !(tts.anneal_us >= 0.0 && tts.anneal_us.is_finite()) {
        return Err(CliError::Contract(format!("anneal time must be non-negative, got {}", tts.anneal_us)));
    }
    let ground = set.min_energy().unwrap_or(0.0);
    let hits = set.frequency_at(ground, 1e-9 * ground.abs().max(1.0));
    let r = time_to_solution(hits as f64, set.readouts() as f64, tts.anneal_us * 1e-6, target)?;
    let machine = TimeModel { programming: PROGRAMMING, anneal: Duration::from_secs_f64(tts.anneal_us * 1e-6), readout: READOUT }
        .machine_time(u32::try_from(r.repetitions).unwrap_or(u32::MAX));
    Ok(format!(
        "time to solution (target {target}, lowest energy seen as ground): success probability {:.6}, \
         {} repetitions, {:.6} s annealing, {:.3} s machine time\n",
        r.success_probability,
        r.repetitions,
        r.total_time,
        machine.as_secs_f64()
    ))
}

pub fn reduce(input: &Path, output: &Path, sidecar: Option<&Path>) -> Result<String, CliError> {
    let f = parse_file(input, parse_pbf)?;
    let r = reduce_to_quadratic(&f);
    let sidecar: PathBuf = sidecar.map_or_else(|| output.with_extension("aux"), Path::to_owned);
    write(output, &r.result.render())?;
    write(&sidecar, &r.render_sidecar())?;
    Ok(format!("{}wrote {}\nwrote {}\n", reduction_summary(&r), output.display(), sidecar.display()))
}

pub fn reduction_summary(r: &ReductionRecord) -> String {
    let freedman = r.aux.iter().filter(|a| a.kind == GadgetKind::Freedman).count();
    format!(
        "reduced {} variables to {}: {} auxiliary ({} Freedman, {} Ishikawa)\n",
        r.original_vars,
        r.total_vars(),
        r.aux.len(),
        freedman,
        r.aux.len() - freedman
    )
}

pub fn render_model(model: ModelFile, to: ModelKind) -> String {
    match (model, to) {
        (ModelFile::Qubo(q), ModelKind::Qubo) => q.render(),
        (ModelFile::Ising(m), ModelKind::Qubo) => ising_to_qubo(&m).render(),
        (model, ModelKind::Ising) => model.into_ising().render(),
    }
}

pub fn convert(input: &Path, to: ModelKind, output: Option<&Path>) -> Result<String, CliError> {
    let text = render_model(load_quadratic(input)?, to);
    match output {
        Some(p) => {
            write(p, &text)?;
            Ok(format!("wrote {}\n", p.display()))
        }
        None => Ok(text),
    }
}

pub fn embed(
    input: &Path,
    o: &ChimeraOpts,
    seed: u64,
    output: &Path,
    physical: Option<&Path>,
) -> Result<String, CliError> {
    let m = load_quadratic(input)?.into_ising();
    let em = embed_model(&m, o, seed)?;
    write(output, &em.embedding.render())?;
    let mut out = format!("logical: {} variables, {} couplers\n", m.num_vars(), m.couplers().len());
    out.push_str(&embedding_summary(&em));
    let _ = writeln!(out, "wrote {}", output.display());
    if let Some(p) = physical {
        write(p, &em.physical.render())?;
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(out)
}

pub fn solve(input: &Path, o: &SolverOpts, embed: &EmbedOpts, out: &OutputOpts) -> Result<String, CliError> {
    let (kind, m) = match load_quadratic(input)? {
        ModelFile::Qubo(q) => ("qubo", q.to_ising()),
        ModelFile::Ising(m) => ("ising", m),
    };
    let sampled = sample(&m, o, embed)?;
    let (table, csv) = histogram_block(&sampled.set, out)?;
    if out.format == Format::Csv {
        return Ok(csv);
    }
    let mut s = format!("model: {} variables ({kind} input), Ising offset {}\n", m.num_vars(), m.offset);
    s.push_str(&sampled.notes);
    s.push_str(&table);
    if let Some(best) = sampled.set.lowest() {
        let _ = writeln!(
            s,
            "lowest: energy {} (adjusted {}), spins {}",
            best.energy,
            best.energy + m.offset,
            spin_string(&best.spins)
        );
    }
    Ok(s)
}

/// A compiled objective ready for sampling.
pub struct Compiled {
    pub reduction: ReductionRecord,
    pub model: IsingModel,
}

pub fn compile(f: &PseudoBooleanFunction) -> Result<Compiled, CliError> {
    let reduction = reduce_to_quadratic(f);
    let model = Qubo::from_pbf(&reduction.result)?.to_ising();
    Ok(Compiled { reduction, model })
}

fn compiled_summary(c: &Compiled) -> String {
    format!("{}Ising offset {}\n", reduction_summary(&c.reduction), c.model.offset)
}

/// Distinct assignments of the first `n` variables among the lowest-energy samples.
pub(crate) fn best_projections(set: &SampleSet, n: usize) -> Vec<Vec<u8>> {
    let Some(min) = set.min_energy() else { return Vec::new() };
    let mut out: Vec<Vec<u8>> = set
        .entries()
        .iter()
        .filter(|s| (s.energy - min).abs() <= 1e-9 * min.abs().max(1.0))
        .map(|s| bits_from_spins(&s.spins[..n]))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn no_embed_for_bf(o: &SolverOpts, embed: &EmbedOpts, tts: &TtsOpts) -> Result<(), CliError> {
    if o.solver == SolverKind::Bf && embed.embed {
        return Err(CliError::Contract("--embed needs a sampling solver (sa or sqa)".into()));
    }
    if o.solver == SolverKind::Bf && tts.target_p.is_some() {
        return Err(CliError::Contract("--target-p needs a sampling solver (sa or sqa)".into()));
    }
    build_solver(o).map(drop)
}

pub fn maxsat_report(
    cnf: &CnfFormula,
    o: &SolverOpts,
    embed: &EmbedOpts,
    tts: &TtsOpts,
    out: &OutputOpts,
) -> Result<String, CliError> {
    no_embed_for_bf(o, embed, tts)?;
    let h = encode_maxsat(cnf);
    let m = cnf.clauses.len();
    let mut s = format!("formula: {} variables, {m} clauses\n", cnf.num_vars);
    let sat_line = |x: &[u8]| -> Result<String, CliError> {
        Ok(format!("assignment {}: {}/{m} clauses satisfied\n", bit_string(x), count_satisfied(cnf, x)?))
    };
    if o.solver == SolverKind::Bf {
        let best = minimize_pbf(&h)?;
        if out.format == Format::Csv {
            return Ok(format!("assignment,satisfied\n{}", csv_rows(&best.argmins, |x| count_satisfied(cnf, x))?));
        }
        let _ = writeln!(s, "exact minimum {} over {} assignment(s)", best.value, best.argmins.len());
        for x in &best.argmins {
            s.push_str(&sat_line(x)?);
        }
        return Ok(s);
    }
    let c = compile(&h)?;
    let sampled = sample(&c.model, o, embed)?;
    let (table, csv) = histogram_block(&sampled.set, out)?;
    if out.format == Format::Csv {
        return Ok(csv);
    }
    s.push_str(&compiled_summary(&c));
    s.push_str(&sampled.notes);
    s.push_str(&table);
    for x in best_projections(&sampled.set, cnf.num_vars) {
        s.push_str("best ");
        s.push_str(&sat_line(&x)?);
    }
    s.push_str(&tts_block(&sampled.set, o, tts)?);
    Ok(s)
}

fn csv_rows<E: Into<CliError>>(xs: &[Vec<u8>], value: impl Fn(&[u8]) -> Result<usize, E>) -> Result<String, CliError> {
    let mut out = String::new();
    for x in xs {
        let _ = writeln!(out, "{},{}", bit_string(x), value(x).map_err(Into::into)?);
    }
    Ok(out)
}

pub(crate) fn cut_line(inst: &TreeMulticutInstance, enc: &MulticutEncoding, x: &[u8]) -> Result<String, CliError> {
    let d = decode_mmc(inst, enc, x)?;
    let vars: Vec<String> = d.cut_vars.iter().map(|v| format!("x{v}")).collect();
    let edges: Vec<String> =
        d.cut_edges.iter().map(|&k| format!("({},{})", inst.edges[k].0, inst.edges[k].1)).collect();
    Ok(format!(
        "cut {{{}}}: edges {} size {}, {}\n",
        vars.join(","),
        edges.join(" "),
        d.cut_edges.len(),
        if d.valid { "valid" } else { "INVALID" }
    ))
}

pub fn mmc_report(
    inst: &TreeMulticutInstance,
    lambda: Option<f64>,
    o: &SolverOpts,
    embed: &EmbedOpts,
    tts: &TtsOpts,
    out: &OutputOpts,
) -> Result<String, CliError> {
    no_embed_for_bf(o, embed, tts)?;
    let (h, enc) = encode_mmc_tree(inst, lambda)?;
    let mut s = format!(
        "tree: {} vertices, {} edges, {} pairs; {} edge variables, lambda {}\n",
        inst.num_vertices,
        inst.edges.len(),
        inst.pairs.len(),
        enc.var_edges.len(),
        enc.lambda
    );
    if o.solver == SolverKind::Bf {
        let best = minimize_pbf(&h)?;
        if out.format == Format::Csv {
            let rows = csv_rows(&best.argmins, |x| decode_mmc(inst, &enc, x).map(|d| d.cut_edges.len()))?;
            return Ok(format!("assignment,cut_size\n{rows}"));
        }
        let _ = writeln!(s, "exact minimum {} over {} assignment(s)", best.value, best.argmins.len());
        for x in &best.argmins {
            s.push_str(&cut_line(inst, &enc, x)?);
        }
        return Ok(s);
    }
    let c = compile(&h)?;
    let sampled = sample(&c.model, o, embed)?;
    let (table, csv) = histogram_block(&sampled.set, out)?;
    if out.format == Format::Csv {
        return Ok(csv);
    }
    s.push_str(&compiled_summary(&c));
    s.push_str(&sampled.notes);
    s.push_str(&table);
    s.push_str("solutions at the lowest energy seen:\n");
    for x in best_projections(&sampled.set, enc.var_edges.len()) {
        s.push_str("  ");
        s.push_str(&cut_line(inst, &enc, &x)?);
    }
    s.push_str(&tts_block(&sampled.set, o, tts)?);
    Ok(s)
}

pub fn maxsat(
    input: &Path,
    o: &SolverOpts,
    embed: &EmbedOpts,
    tts: &TtsOpts,
    out: &OutputOpts,
) -> Result<String, CliError> {
    maxsat_report(&parse_file(input, parse_dimacs)?, o, embed, tts, out)
}

pub fn mmc(
    input: &Path,
    lambda: Option<f64>,
    o: &SolverOpts,
    embed: &EmbedOpts,
    tts: &TtsOpts,
    out: &OutputOpts,
) -> Result<String, CliError> {
    mmc_report(&parse_file(input, parse_tree)?, lambda, o, embed, tts, out)
}
