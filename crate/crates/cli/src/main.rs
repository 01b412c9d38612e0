use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use clausal_core::builders::{
    build_ger_proof_of_h, build_rat_proof_of_g, build_sbc_proof_of_h, build_sbc_proof_of_php,
    gen_bphp, gen_cook_er_php, gen_php, transform_g, transform_h, BuilderRegistry, PairAllocation,
};
use clausal_core::check::check;
use clausal_core::cnf::{parse_dimacs, write_dimacs, Cnf};
use clausal_core::oracle::sat_brute;
use clausal_core::proof::{parse_proof, write_proof, ErProof, Proof, SystemTag};
use clausal_core::redundancy::kernel;
use clausal_core::simulation::{restrict_h_rat_proof, translate_rat_to_bc};

#[derive(Parser)]
#[command(
    name = "clausal",
    version,
    about = "Clausal proof generation, checking and translation"
)]
struct Cli {
    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Allow an output path to coincide with an input path.
    #[arg(long, global = true)]
    force: bool,
    /// Print a `family,n,t,cnf_clauses,proof_size` row for generated artifacts.
    #[arg(long, global = true)]
    stats: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a formula family member as DIMACS.
    Gen {
        family: Family,
        #[arg(short)]
        n: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a proof of PHP_n.
    Prove {
        kind: ProveKind,
        #[arg(short)]
        n: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write PHP_n here.
        #[arg(long)]
        cnf: Option<PathBuf>,
    },
    /// Write G(Γ) or H(Γ) for a CNF and an er proof of it.
    Transform {
        kind: TransformKind,
        #[command(flatten)]
        base: BaseArgs,
        #[arg(short, long)]
        output: PathBuf,
        /// Pair allocation output, required for `h`.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Build a proof of a transformed CNF from the base CNF and its er proof.
    Build {
        #[arg(value_parser = builder_names())]
        builder: String,
        #[command(flatten)]
        base: BaseArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a proof against a CNF.
    Check {
        #[arg(long)]
        system: SystemTag,
        #[arg(long)]
        cnf: PathBuf,
        proof: PathBuf,
    },
    /// Translate a rat proof into a bc proof.
    Simulate {
        kind: SimulateKind,
        #[arg(long)]
        cnf: PathBuf,
        proof: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Restrict a rat proof of H(Γ) to a rat proof of Γ.
    Restrict {
        kind: RestrictKind,
        /// The base CNF Γ.
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        proof: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the kernel size and the elimination order.
    Kernel { cnf: PathBuf },
    /// Print size statistics for a family as CSV.
    Stats {
        #[arg(long)]
        family: StatsFamily,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
    },
    #[command(hide = true)]
    Oracle { kind: OracleKind, cnf: PathBuf },
}

#[derive(Args)]
struct BaseArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    er: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Php,
    Bphp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProveKind {
    ErPhp,
    SbcPhp,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    G,
    H,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimulateKind {
    RatToBc,
}

#[derive(Clone, Copy, ValueEnum)]
enum RestrictKind {
    HProof,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Sat,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFamily {
    Php,
    Bphp,
    ErPhp,
    GPhp,
    HPhpGer,
    HPhpSbc,
}

const STATS_HEADER: &str = "family,n,t,cnf_clauses,proof_size";

fn builder_names() -> clap::builder::PossibleValuesParser {
    let names: Vec<&'static str> = BuilderRegistry::standard().names().collect();
    clap::builder::PossibleValuesParser::new(names)
}

/// Exit status of a successful run.
enum Status {
    Done,
    Rejected,
}

struct Ctx {
    quiet: bool,
    force: bool,
    stats: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn stats_row(&self, family: &str, n: usize, t: usize, clauses: usize, size: Option<usize>) {
        if self.stats {
            println!("{STATS_HEADER}");
            println!("{}", stats_line(family, n, t, clauses, size));
        }
    }

    /// Writes through a temporary file in the target directory.
    fn write(&self, path: &Path, inputs: &[&Path], contents: &str) -> Result<()> {
        if !self.force && path.exists() {
            let target = fs::canonicalize(path)?;
            for input in inputs {
                if fs::canonicalize(input).is_ok_and(|p| p == target) {
                    bail!(
                        "refusing to overwrite input {} without --force",
                        path.display()
                    );
                }
            }
        }
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
        tmp.write_all(contents.as_bytes())?;
        tmp.persist(path)
            .with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}

fn stats_line(family: &str, n: usize, t: usize, clauses: usize, size: Option<usize>) -> String {
    let size = size.map(|s| s.to_string()).unwrap_or_default();
    format!("{family},{n},{t},{clauses},{size}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_cnf(path: &Path) -> Result<Cnf> {
    parse_dimacs(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_proof(path: &Path) -> Result<Proof> {
    parse_proof(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_er(path: &Path) -> Result<ErProof> {
    let proof = read_proof(path)?;
    ErProof::from_proof(&proof).with_context(|| format!("{} is not an er proof", path.display()))
}

fn read_pairs(path: &Path) -> Result<PairAllocation> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<Status> {
    let ctx = Ctx {
        quiet: cli.quiet,
        force: cli.force,
        stats: cli.stats,
    };
    match cli.command {
        Command::Gen { family, n, output } => {
            let (name, cnf) = match family {
                Family::Php => ("php", gen_php(n)?),
                Family::Bphp => ("bphp", gen_bphp(n)?),
            };
            ctx.write(&output, &[], &write_dimacs(&cnf))?;
            ctx.stats_row(name, n, 0, cnf.len(), None);
        }
        Command::Prove {
            kind,
            n,
            output,
            cnf,
        } => {
            let php = gen_php(n)?;
            let (name, t, proof) = match kind {
                ProveKind::ErPhp => {
                    let er = gen_cook_er_php(n)?;
                    ("er-php", er.t(), er.to_proof())
                }
                ProveKind::SbcPhp => ("php", 0, build_sbc_proof_of_php(n)?),
            };
            ctx.write(&output, &[], &write_proof(&proof))?;
            if let Some(path) = cnf {
                ctx.write(&path, &[&output], &write_dimacs(&php))?;
            }
            ctx.stats_row(name, n, t, php.len(), Some(proof.size()));
        }
        Command::Transform {
            kind,
            base,
            output,
            pairs,
        } => {
            let gamma = read_cnf(&base.cnf)?;
            let er = read_er(&base.er)?;
            let inputs = [base.cnf.as_path(), base.er.as_path()];
            let out = match kind {
                TransformKind::G => transform_g(&gamma, &er)?,
                TransformKind::H => {
                    let path = pairs.ok_or_else(|| anyhow!("`transform h` needs --pairs"))?;
                    let (h, alloc) = transform_h(&gamma, &er)?;
                    ctx.write(&path, &inputs, &serde_json::to_string(&alloc)?)?;
                    h
                }
            };
            ctx.write(&output, &inputs, &write_dimacs(&out))?;
            ctx.stats_row(
                match kind {
                    TransformKind::G => "g",
                    TransformKind::H => "h",
                },
                0,
                er.t(),
                out.len(),
                None,
            );
        }
        Command::Build {
            builder,
            base,
            output,
        } => {
            let gamma = read_cnf(&base.cnf)?;
            let er = read_er(&base.er)?;
            let registry = BuilderRegistry::standard();
            let b = registry
                .get(&builder)
                .ok_or_else(|| anyhow!("unknown builder {builder}"))?;
            let built = b.build(&gamma, &er)?;
            ctx.write(&output, &[&base.cnf, &base.er], &write_proof(&built.proof))?;
            ctx.stats_row(
                &builder,
                0,
                er.t(),
                built.cnf.len(),
                Some(built.proof.size()),
            );
        }
        Command::Check { system, cnf, proof } => {
            let gamma = read_cnf(&cnf)?;
            let p = read_proof(&proof)?;
            if p.system != system {
                bail!(
                    "proof declares system {}, but --system is {}",
                    p.system,
                    system
                );
            }
            let report = check(&gamma, &p);
            ctx.say(report.to_string());
            if !report.is_verified() {
                if ctx.quiet {
                    eprintln!("{report}");
                }
                return Ok(Status::Rejected);
            }
        }
        Command::Simulate {
            kind: SimulateKind::RatToBc,
            cnf,
            proof,
            output,
            report,
        } => {
            let gamma = read_cnf(&cnf)?;
            let p = read_proof(&proof)?;
            let (bc, reports) = translate_rat_to_bc(&gamma, &p)?;
            let inputs = [cnf.as_path(), proof.as_path()];
            ctx.write(&output, &inputs, &write_proof(&bc))?;
            ctx.write(&report, &inputs, &serde_json::to_string_pretty(&reports)?)?;
            ctx.say(format!(
                "translated {} RAT steps; bc proof size {}",
                reports.len(),
                bc.size()
            ));
        }
        Command::Restrict {
            kind: RestrictKind::HProof,
            cnf,
            pairs,
            proof,
            output,
        } => {
            let gamma = read_cnf(&cnf)?;
            let alloc = read_pairs(&pairs)?;
            let p = read_proof(&proof)?;
            let out = restrict_h_rat_proof(&gamma, &alloc, &p)?;
            ctx.write(&output, &[&cnf, &pairs, &proof], &write_proof(&out))?;
            ctx.say(format!("restricted proof size {}", out.size()));
        }
        Command::Kernel { cnf } => {
            let gamma = read_cnf(&cnf)?;
            let k = kernel(&gamma);
            println!("kernel size {}", k.kernel.len());
            println!("eliminated {}", k.elimination_order.len());
            for (c, p) in k.elimination_order.iter().zip(&k.pivots) {
                let lits: Vec<String> = c.iter().map(|l| l.to_dimacs().to_string()).collect();
                println!("{} : {} 0", p.to_dimacs(), lits.join(" "));
            }
        }
        Command::Stats {
            family,
            n_from,
            n_to,
        } => {
            println!("{STATS_HEADER}");
            for n in n_from..=n_to {
                println!("{}", stats_for(family, n)?);
            }
        }
        Command::Oracle {
            kind: OracleKind::Sat,
            cnf,
        } => {
            let gamma = read_cnf(&cnf)?;
            let verdict = sat_brute(&gamma)?;
            match verdict.witness {
                Some(w) => {
                    println!("s SATISFIABLE");
                    let lits: Vec<String> =
                        w.literals().map(|l| l.to_dimacs().to_string()).collect();
                    println!("v {} 0", lits.join(" "));
                }
                None => println!("s UNSATISFIABLE"),
            }
        }
    }
    Ok(Status::Done)
}

fn stats_for(family: StatsFamily, n: usize) -> Result<String> {
    let php = || gen_php(n);
    let line = match family {
        StatsFamily::Php => {
            let proof = build_sbc_proof_of_php(n)?;
            stats_line("php", n, 0, php()?.len(), Some(proof.size()))
        }
        StatsFamily::Bphp => stats_line("bphp", n, 0, gen_bphp(n)?.len(), None),
        StatsFamily::ErPhp => {
            let er = gen_cook_er_php(n)?;
            stats_line("er-php", n, er.t(), php()?.len(), Some(er.size()))
        }
        StatsFamily::GPhp => {
            let (gamma, er) = (php()?, gen_cook_er_php(n)?);
            let g = transform_g(&gamma, &er)?;
            let proof = build_rat_proof_of_g(&gamma, &er)?;
            stats_line("g-php", n, er.t(), g.len(), Some(proof.size()))
        }
        StatsFamily::HPhpGer | StatsFamily::HPhpSbc => {
            let (gamma, er) = (php()?, gen_cook_er_php(n)?);
            let (h, pairs) = transform_h(&gamma, &er)?;
            let (name, proof) = match family {
                StatsFamily::HPhpGer => ("h-php-ger", build_ger_proof_of_h(&gamma, &er, &pairs)?),
                _ => ("h-php-sbc", build_sbc_proof_of_h(&gamma, &er, &pairs)?),
            };
            stats_line(name, n, er.t(), h.len(), Some(proof.size()))
        }
    };
    Ok(line)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Rejected) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
