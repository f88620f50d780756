//! Command dispatch for the `wmrep` binary.
//!
//! Every command prints one JSON report on stdout. Exit status is 0 on
//! success, 2 when the computation went fine but the verdict is negative,
//! and 1 on usage or operational errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use wmrep_core::circle::random_moebius;
use wmrep_core::constructions::{
    cancelling_triple, direct_sum, doubled_torus, elliptic_abelian, fuchsian_bounded, fuchsian_closed_genus2,
    heisenberg_extend, orientation_reverse, polydisk, random_free, sym_cube, HeisenbergOutcome,
};
use wmrep_core::invariants::{
    q_causal_check, rationality_check, toledo_with_lifts, wm_defect, wm_path_scan, write_scan_csv, Representation,
    WmVerdict, BOUNDARY_ITERS,
};
use wmrep_core::io::{load_representation, representation_json, Metadata, Report};
use wmrep_core::lift::DominanceVerdict;
use wmrep_core::order::{reconstruction_check, write_growth_csv, CircleOrder};
use wmrep_core::surface::SurfacePresentation;
use wmrep_core::symplectic::{kashiwara_index, maslov_beta, random_hamiltonian_exp, random_lagrangian, random_symmetric, SymplecticMatrix};
use wmrep_core::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "wmrep", version, about = "Toledo invariants and weak maximality of surface group representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RepArgs {
    /// Representation file.
    #[arg(long)]
    rep: PathBuf,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long)]
    rep: PathBuf,
    /// Hyperbolization (a PSL(2,R) representation with Toledo invariant +-|chi|).
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of sampled homologically trivial words.
    #[arg(long, default_value_t = 64)]
    count: usize,
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// Write the representation here and print a report; without it the
    /// representation itself goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Toledo invariant and Milnor-Wood margin.
    Toledo {
        #[command(flatten)]
        rep: RepArgs,
        /// Iterations for boundary translation numbers.
        #[arg(long, default_value_t = BOUNDARY_ITERS)]
        iters: usize,
        /// Denominator bound for the rationality check of T / |chi|.
        #[arg(long)]
        ell: Option<u32>,
    },
    /// Weak-maximality defect against a hyperbolization.
    Wm {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Dominance verdicts of trivial words with hyperbolic translation above q.
    Qcausal {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0)]
        q: u32,
    },
    /// Dominance verdict and translation quasimorphism of each generator image.
    Dominance {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample points for the displacement search.
        #[arg(long, default_value_t = 32)]
        count: usize,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
    },
    /// Growth function e_n(g, h) for a seeded pair of circle lifts.
    Growth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest n.
        #[arg(long, default_value_t = 100)]
        steps: i64,
        /// CSV table of the records.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kashiwara index checks on random transverse quadruples.
    Maslov {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Half-dimension of the symplectic space.
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Toledo invariant and defect along rep + doubled torus(exp(tX), exp(tY)).
    Scan {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// CSV table of the scan.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The genus-2 hyperbolization from the regular octagon.
    #[command(name = "build-fuchsian-genus2")]
    BuildFuchsianGenus2 {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// A hyperbolization of the one-holed torus.
    #[command(name = "build-fuchsian-torus")]
    BuildFuchsianTorus {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// A hyperbolization of the pair of pants.
    #[command(name = "build-fuchsian-pants")]
    BuildFuchsianPants {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Conjugate of a PSL(2,R) representation by diag(1,-1).
    #[command(name = "build-reversed")]
    BuildReversed {
        #[command(flatten)]
        rep: RepArgs,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Block-diagonal copies of the genus-2 hyperbolization.
    #[command(name = "build-polydisk")]
    BuildPolydisk {
        /// Number of factors.
        #[arg(long, default_value_t = 2)]
        count: usize,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// (hyperbolization, doubled torus, reversed doubled torus).
    #[command(name = "build-cancelling-triple")]
    BuildCancellingTriple {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// (elliptic abelian, doubled torus, elliptic abelian): a non-maximal control.
    #[command(name = "build-control")]
    BuildControl {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Third symmetric power of the genus-2 hyperbolization.
    #[command(name = "build-sym-cube")]
    BuildSymCube {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Unipotent extension of Sym^3 + reversed hyperbolization by a random cocycle.
    #[command(name = "build-heisenberg")]
    BuildHeisenberg {
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Random representation of the one-holed torus into Sp(2n,R).
    #[command(name = "build-random-free")]
    BuildRandomFree {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        build: BuildArgs,
    },
}

/// A value with its absolute error bound.
fn measured(value: f64, error: f64) -> Value {
    json!({ "value": value, "error_estimate": error })
}

fn exact(value: i64) -> Value {
    json!({ "value": value, "error_estimate": 0 })
}

fn digest(paths: &[&Path]) -> Result<String> {
    let mut hasher = Sha256::new();
    for p in paths {
        let bytes = std::fs::read(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

struct Outcome {
    report: String,
    code: i32,
}

fn report(command: &str, digest: Option<String>, seed: Option<u64>, results: Value, code: i32) -> Outcome {
    Outcome { report: Report::new(command, digest, seed, results).to_json(), code }
}

fn toledo_cmd(rep_path: &Path, iters: usize, ell: Option<u32>) -> Result<Outcome> {
    let rep = load_representation(rep_path)?;
    let t = toledo_with_lifts(&rep, &rep.base_lifts(), iters)?;
    let chi = rep.presentation().euler_characteristic();
    let mut results = json!({
        "T": measured(t.value, t.error_estimate),
        "method": t.method,
        "winding_integer": exact(t.winding_integer),
        "boundary_psi": t.boundary_psi.iter().map(|&p| measured(p, t.error_estimate)).collect::<Vec<_>>(),
        "mw_bound": measured(t.mw_bound, 0.0),
        "mw_margin": measured(t.mw_margin, t.error_estimate),
        "relator_residual": measured(rep.relator_residual(), 0.0),
        "k_iters": iters,
    });
    if let Some(ell) = ell {
        results["rationality"] = json!({
            "ell": ell,
            "distance": measured(rationality_check(t.value, ell, chi), t.error_estimate * ell as f64 / chi.abs() as f64),
        });
    }
    Ok(report("toledo", Some(digest(&[rep_path])?), None, results, EXIT_OK))
}

fn wm_cmd(p: &PairArgs) -> Result<Outcome> {
    let rep = load_representation(&p.rep)?;
    let hyp = load_representation(&p.hyp)?;
    let r = wm_defect(&rep, &hyp, p.seed, p.count)?;
    let chi = rep.presentation().euler_characteristic().abs() as f64;
    let t_error = toledo_with_lifts(&rep, &rep.base_lifts(), BOUNDARY_ITERS)?.error_estimate;
    let results = json!({
        "lambda": measured(r.lambda, t_error / chi),
        "T": measured(r.toledo, t_error),
        "defect": measured(r.defect, r.error_estimate + t_error / chi),
        "worst_word": r.worst_word,
        "sample_count": r.sample_count,
        "verdict": r.verdict,
        "tolerance": r.tolerance,
        "k_iters": r.k_iters,
    });
    let code = if r.verdict == WmVerdict::WeaklyMaximal { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(report("wm", Some(digest(&[&p.rep, &p.hyp])?), Some(p.seed), results, code))
}

fn qcausal_cmd(p: &PairArgs, q: u32) -> Result<Outcome> {
    let rep = load_representation(&p.rep)?;
    let hyp = load_representation(&p.hyp)?;
    let r = q_causal_check(&rep, &hyp, q, p.seed, p.count)?;
    let code = if r.refuted() { EXIT_NEGATIVE } else { EXIT_OK };
    let results = json!({
        "q": q,
        "drawn": r.drawn,
        "eligible": r.eligible,
        "certified_dominant": r.certified_dominant,
        "unknown": r.unknown,
        "not_dominant": r.not_dominant,
        "refuted": r.refuted(),
    });
    Ok(report("qcausal", Some(digest(&[&p.rep, &p.hyp])?), Some(p.seed), results, code))
}

fn dominance_cmd(rep_path: &Path, seed: u64, samples: usize, iters: usize) -> Result<Outcome> {
    let rep = load_representation(rep_path)?;
    let mut refuted = false;
    let mut generators = Vec::new();
    for (i, g) in rep.base_lifts().iter().enumerate() {
        let psi = g.psi(iters)?;
        let verdict = g.dominance_verdict(samples, seed, iters)?;
        refuted |= matches!(verdict, DominanceVerdict::NotDominant(_));
        generators.push(json!({
            "generator": rep.presentation().generator_name(i),
            "psi": measured(psi.value, psi.error),
            "verdict": verdict,
        }));
    }
    let results = json!({ "generators": generators, "samples": samples, "k_iters": iters });
    let code = if refuted { EXIT_NEGATIVE } else { EXIT_OK };
    Ok(report("dominance", Some(digest(&[rep_path])?), Some(seed), results, code))
}

fn growth_cmd(seed: u64, n_max: i64, out: Option<&Path>) -> Result<Outcome> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("--steps must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = loop {
        let g = random_moebius(&mut rng, 2.0, 3);
        if g.dominant_exact() {
            break g;
        }
    };
    let h = random_moebius(&mut rng, 2.0, 3);
    let r = reconstruction_check(&CircleOrder, &g, &h, n_max)?;
    if let Some(path) = out {
        let mut buf = Vec::new();
        write_growth_csv(&mut buf, &r.records).expect("write to memory");
        write_file(path, &buf)?;
    }
    let last = r.records.last().expect("n_max >= 1");
    let results = json!({
        "g": [g.a, g.b, g.c, g.d, g.winding as f64],
        "h": [h.a, h.b, h.c, h.d, h.winding as f64],
        "tau_g": measured(g.translation_number_exact(), 0.0),
        "tau_h": measured(h.translation_number_exact(), 0.0),
        "n_max": n_max,
        "e_n_max": exact(last.e_n),
        "ratio": measured(last.ratio, 0.0),
        "target": measured(last.target, 0.0),
        "bracket": [measured(last.low, 0.0), measured(last.high, 0.0)],
        "violations": r.violations,
        "outside_window": r.outside_window,
    });
    let code = if r.passed() { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(report("growth", None, Some(seed), results, code))
}

fn maslov_cmd(seed: u64, count: usize, n: usize) -> Result<Outcome> {
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = vec![0usize; 2 * n + 1];
    let (mut cocycle, mut alternation, mut invariance, mut half_integer, mut skipped) = (0, 0, 0, 0, 0);
    let mut found = 0;
    while found < count {
        let l: Vec<_> = (0..4).map(|_| random_lagrangian(&mut rng, n)).collect();
        let transverse = (0..4).all(|i| (i + 1..4).all(|j| l[i].transversality_margin(&l[j]).map(|m| m > 1e-6).unwrap_or(false)));
        if !transverse {
            skipped += 1;
            continue;
        }
        let idx = |a: usize, b: usize, c: usize| kashiwara_index(&l[a], &l[b], &l[c]);
        let (Ok(i234), Ok(i134), Ok(i124), Ok(i123)) = (idx(1, 2, 3), idx(0, 2, 3), idx(0, 1, 3), idx(0, 1, 2)) else {
            skipped += 1;
            continue;
        };
        found += 1;
        histogram[(i123 + n as i32) as usize] += 1;
        if i234 - i134 + i124 - i123 != 0 {
            cocycle += 1;
        }
        let swapped = [idx(1, 0, 2), idx(0, 2, 1), idx(2, 1, 0)];
        let rotated = [idx(1, 2, 0), idx(2, 0, 1)];
        if swapped.iter().any(|v| v.as_ref().ok() != Some(&-i123)) || rotated.iter().any(|v| v.as_ref().ok() != Some(&i123)) {
            alternation += 1;
        }
        let g: SymplecticMatrix = random_hamiltonian_exp(n, rng.random(), 1.0)?;
        if let Ok(moved) = kashiwara_index(&l[0].apply(&g), &l[1].apply(&g), &l[2].apply(&g)) {
            if moved != i123 {
                invariance += 1;
            }
        }
        let beta = maslov_beta(&l[0], &l[1], &l[2])?;
        if (2.0 * beta).fract() != 0.0 {
            half_integer += 1;
        }
    }
    let failures = cocycle + alternation + invariance + half_integer;
    let results = json!({
        "n": n,
        "quadruples": found,
        "skipped": skipped,
        "index_histogram": (0..=2 * n).map(|k| json!({"index": k as i64 - n as i64, "count": histogram[k]})).collect::<Vec<_>>(),
        "cocycle_failures": cocycle,
        "alternation_failures": alternation,
        "invariance_failures": invariance,
        "half_integer_failures": half_integer,
    });
    let code = if failures == 0 { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(report("maslov", None, Some(seed), results, code))
}

fn scan_cmd(p: &PairArgs, steps: usize, out: Option<&Path>) -> Result<Outcome> {
    let rep = load_representation(&p.rep)?;
    let hyp = load_representation(&p.hyp)?;
    let p20 = SurfacePresentation::new(2, 0)?;
    if rep.presentation() != &p20 {
        return Err(Error::InvalidArgument("scan needs a closed genus-2 representation".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let x = random_symmetric(2, &mut rng, 1.0);
    let y = random_symmetric(2, &mut rng, 1.0);
    let family = |t: f64| -> Result<Representation> {
        let a = SymplecticMatrix::exp_hamiltonian(&(&x * t))?;
        let b = SymplecticMatrix::exp_hamiltonian(&(&y * t))?;
        let torus = doubled_torus(a.matrix(), b.matrix())?;
        direct_sum(&rep.as_symplectic(), &torus.as_symplectic())
    };
    let rows = wm_path_scan(family, &hyp, steps, p.seed, p.count);
    if let Some(path) = out {
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &rows).expect("write to memory");
        write_file(path, &buf)?;
    }
    let results = json!({
        "steps": steps,
        "rows": rows.iter().map(|r| json!({
            "t": measured(r.t, 0.0),
            "T": r.toledo.map(|v| measured(v, 0.0)),
            "defect": r.defect.map(|v| measured(v, 0.0)),
            "error": r.error,
        })).collect::<Vec<_>>(),
    });
    Ok(report("scan", Some(digest(&[&p.rep, &p.hyp])?), Some(p.seed), results, EXIT_OK))
}

fn genus2_cancelling_factor() -> Result<Representation> {
    let f = fuchsian_closed_genus2();
    doubled_torus(&f.images()[0], &f.images()[1])
}

fn emit(command: &str, rep: &Representation, label: &str, seed: Option<u64>, build: &BuildArgs) -> Result<Outcome> {
    let text = representation_json(rep, Metadata { label: Some(label.into()), seed });
    match &build.out {
        None => Ok(Outcome { report: text.trim_end().to_string(), code: EXIT_OK }),
        Some(path) => {
            write_file(path, text.as_bytes())?;
            let results = json!({
                "path": path.display().to_string(),
                "label": label,
                "generators": rep.images().len(),
                "relator_residual": measured(rep.relator_residual(), 0.0),
            });
            Ok(report(command, Some(digest(&[path])?), seed, results, EXIT_OK))
        }
    }
}

fn heisenberg(seed: u64) -> Result<(Option<Representation>, HeisenbergOutcome)> {
    let f = fuchsian_closed_genus2();
    let pi = direct_sum(&sym_cube(&f)?, &orientation_reverse(&f))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * pi.order();
    let b: Vec<DVector<f64>> =
        (0..pi.images().len()).map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))).collect();
    heisenberg_extend(&pi, &b, Some(2))
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Toledo { rep, iters, ell } => toledo_cmd(&rep.rep, iters, ell),
        Command::Wm { pair } => wm_cmd(&pair),
        Command::Qcausal { pair, q } => qcausal_cmd(&pair, q),
        Command::Dominance { rep, seed, count, iters } => dominance_cmd(&rep.rep, seed, count, iters),
        Command::Growth { seed, steps, out } => growth_cmd(seed, steps, out.as_deref()),
        Command::Maslov { seed, count, n } => maslov_cmd(seed, count, n),
        Command::Scan { pair, steps, out } => scan_cmd(&pair, steps, out.as_deref()),
        Command::BuildFuchsianGenus2 { build } => {
            emit("build-fuchsian-genus2", &fuchsian_closed_genus2(), "fuchsian genus 2", None, &build)
        }
        Command::BuildFuchsianTorus { build } => {
            emit("build-fuchsian-torus", &fuchsian_bounded(1, 1, [3.0, 3.0, 3.5])?, "fuchsian one-holed torus", None, &build)
        }
        Command::BuildFuchsianPants { build } => {
            emit("build-fuchsian-pants", &fuchsian_bounded(0, 3, [3.0, 3.0, -3.0])?, "fuchsian pants", None, &build)
        }
        Command::BuildReversed { rep, build } => {
            let r = load_representation(&rep.rep)?;
            emit("build-reversed", &orientation_reverse(&r), "orientation reversed", None, &build)
        }
        Command::BuildPolydisk { count, build } => {
            if count == 0 {
                return Err(Error::InvalidArgument("--count must be positive".into()));
            }
            let f = fuchsian_closed_genus2();
            emit("build-polydisk", &polydisk(&vec![&f; count])?, "polydisk", None, &build)
        }
        Command::BuildCancellingTriple { build } => {
            let rep = cancelling_triple(&fuchsian_closed_genus2(), &genus2_cancelling_factor()?)?;
            emit("build-cancelling-triple", &rep, "cancelling triple", None, &build)
        }
        Command::BuildControl { build } => {
            let p = SurfacePresentation::new(2, 0)?;
            let reducible = elliptic_abelian(&p, &[0.3, 0.7, 1.1, 0.2])?;
            let rep = polydisk(&[&reducible, &genus2_cancelling_factor()?, &reducible])?;
            emit("build-control", &rep, "control", None, &build)
        }
        Command::BuildSymCube { build } => {
            emit("build-sym-cube", &sym_cube(&fuchsian_closed_genus2())?, "sym cube", None, &build)
        }
        Command::BuildHeisenberg { seed, build } => match heisenberg(seed)? {
            (Some(rep), _) => emit("build-heisenberg", &rep, "heisenberg extension", Some(seed), &build),
            (None, outcome) => Ok(report("build-heisenberg", None, Some(seed), json!({ "outcome": outcome }), EXIT_NEGATIVE)),
        },
        Command::BuildRandomFree { seed, n, build } => {
            let p = SurfacePresentation::new(1, 1)?;
            emit("build-random-free", &random_free(&p, n, seed, 1.0)?, "random free", Some(seed), &build)
        }
    }
}

/// Runs one command line and returns the exit status. Reports go to `out`,
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = write!(if e.use_stderr() { err as &mut dyn Write } else { out as &mut dyn Write }, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(o) => {
            let _ = writeln!(out, "{}", o.report);
            o.code
        }
        Err(e) => {
            let body = json!({ "error": e.code(), "message": e.to_string() });
            let _ = writeln!(err, "{}", serde_json::to_string_pretty(&body).expect("error serializes"));
            EXIT_ERROR
        }
    }
}
