use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use blockdct::bench::{operation_counts, time_paths, OperationCounts};
use blockdct::image::{filter_image, filter_image_with_plan};
use blockdct::operators::{build_set, merge_symmetric};
use blockdct::verify::{self, VerifyConfig};
use blockdct::{
    convolve, load_pgm, parse_dump, quantize_u8, save_pgm, to_dct_domain, write_dump, BlockMatrix,
    Domain, FilterPlan, Mask, OperatorDump, PaddingMode, PlanOptions,
};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "blockdct",
    version,
    about = "Filter image blocks directly in the DCT domain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a mask and write the spatial and DCT operator sets
    BuildOperators {
        #[command(flatten)]
        filter: FilterArgs,
        /// Output file for the operator dump (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter one block given as a whitespace-separated integer matrix
    FilterBlock {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value = "dct")]
        path: Domain,
        /// Block file with n rows of n integers in 0..=255
        #[arg(long)]
        input: PathBuf,
        /// Use the DCT operator set stored in this dump instead of compiling the mask
        #[arg(long)]
        operators: Option<PathBuf>,
        /// Report max-abs error and 8-bit mismatches against direct filtering
        #[arg(long)]
        compare_oracle: bool,
        /// Also print the input and filtered DCT coefficients
        #[arg(short, long)]
        verbose: bool,
    },
    /// Filter a PGM image block by block
    FilterImage {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value = "dct")]
        path: Domain,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        operators: Option<PathBuf>,
    },
    /// Run the randomized equivalence suites
    Verify {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Report operation counts and per-block timings
    Bench {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = 10_000)]
        blocks: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct FilterArgs {
    /// Block side length
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Inline weights, rows separated by ';' (e.g. "1 2 1; 2 4 2; 1 2 1")
    #[arg(long, group = "mask_source")]
    mask: Option<String>,
    /// File holding the mask weights, one row per line
    #[arg(long, group = "mask_source")]
    mask_file: Option<PathBuf>,
    /// Named mask: gaussian3, average3, identity, magic3
    #[arg(long, group = "mask_source")]
    preset: Option<String>,
    #[arg(long, default_value = "replicate")]
    padding: PaddingMode,
}

impl FilterArgs {
    fn mask(&self) -> Result<Mask> {
        let mask = match (&self.mask, &self.mask_file, &self.preset) {
            (Some(text), None, None) => text.parse()?,
            (None, Some(path), None) => fs::read_to_string(path)
                .with_context(|| format!("reading mask file {}", path.display()))?
                .parse()?,
            (None, None, Some(name)) => Mask::preset(name).ok_or_else(|| {
                anyhow!(
                    "unknown preset {name:?}; expected one of {}",
                    Mask::PRESETS.join(", ")
                )
            })?,
            (None, None, None) => bail!("one of --mask, --mask-file or --preset is required"),
            _ => bail!("give exactly one of --mask, --mask-file or --preset"),
        };
        if mask.k() > self.n {
            bail!(
                "a {0}x{0} mask does not fit a {1}x{1} block",
                mask.k(),
                self.n
            );
        }
        Ok(mask)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::BuildOperators { filter, out } => cmd_build_operators(&filter, out.as_deref()),
        Command::FilterBlock {
            filter,
            path,
            input,
            operators,
            compare_oracle,
            verbose,
        } => cmd_filter_block(
            &filter,
            path,
            &input,
            operators.as_deref(),
            compare_oracle,
            verbose,
        ),
        Command::FilterImage {
            filter,
            path,
            input,
            out,
            operators,
        } => cmd_filter_image(&filter, path, &input, &out, operators.as_deref()),
        Command::Verify {
            n,
            trials,
            seed,
            corrupt,
        } => cmd_verify(n, trials, seed, corrupt),
        Command::Bench { filter, blocks } => cmd_bench(&filter, blocks),
    }
}

fn cmd_build_operators(args: &FilterArgs, out: Option<&Path>) -> Result<u8> {
    let mask = args.mask()?;
    let opts = PlanOptions::for_padding(&mask, args.padding);
    let unmerged = build_set(&mask, args.n, opts.construction)?;
    let symmetric = mask.is_row_symmetric();
    let spatial = if symmetric {
        merge_symmetric(&unmerged)?
    } else {
        unmerged.clone()
    };
    let plan = FilterPlan::with_options(&mask, args.n, opts)?;
    let dct = to_dct_domain(&spatial, plan.basis())?;

    let dumps = [
        OperatorDump {
            mask: mask.clone(),
            set: spatial.clone(),
        },
        OperatorDump {
            mask: mask.clone(),
            set: dct,
        },
    ];
    let text = write_dump(&dumps);
    match out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }

    let report = |line: String| {
        if out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    report(format!("construction: {}", spatial.construction.as_str()));
    report(format!("row_symmetric: {symmetric}"));
    report(format!("symmetric_merged: {}", spatial.symmetric_merged));
    report(format!(
        "filter_pairs: {} (unmerged {})",
        spatial.pairs.len(),
        unmerged.pairs.len()
    ));
    report(format!(
        "correction_pairs: {} (unmerged {})",
        spatial.correction.len(),
        unmerged.correction.len()
    ));
    report(format!("total_sandwiches: {}", spatial.sandwich_count()));
    Ok(0)
}

fn parse_block(text: &str, n: usize) -> Result<BlockMatrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(r, line)| {
            line.split_whitespace()
                .map(|t| match t.parse::<u8>() {
                    Ok(v) => Ok(v as f64),
                    Err(_) => bail!("row {}: {t:?} is not an integer in 0..=255", r + 1),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("expected a {n}x{n} block, found {} rows", rows.len());
    }
    Ok(BlockMatrix::from_rows(&rows)?)
}

/// Compiles the mask, or takes the first DCT-domain set of a dump together
/// with the mask recorded next to it.
fn load_plan(args: &FilterArgs, operators: Option<&Path>) -> Result<(FilterPlan, Mask)> {
    match operators {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let dump = parse_dump(&text)
                .with_context(|| format!("parsing {}", path.display()))?
                .into_iter()
                .find(|d| d.set.domain == Domain::Dct)
                .ok_or_else(|| anyhow!("{} holds no DCT-domain operator set", path.display()))?;
            Ok((FilterPlan::from_dct_set(dump.set)?, dump.mask))
        }
        None => {
            let mask = args.mask()?;
            Ok((FilterPlan::new(&mask, args.n, args.padding)?, mask))
        }
    }
}

fn print_u8(samples: &[u8], n: usize) {
    for row in samples.chunks(n) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
        println!("{}", line.join(" "));
    }
}

fn print_real(m: &BlockMatrix) {
    for i in 0..m.n() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:>11.4}")).collect();
        println!("{}", line.join(" "));
    }
}

fn cmd_filter_block(
    args: &FilterArgs,
    path: Domain,
    input: &Path,
    operators: Option<&Path>,
    compare_oracle: bool,
    verbose: bool,
) -> Result<u8> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let (plan, mask) = load_plan(args, operators)?;
    let block = parse_block(&text, plan.n())?;
    let padding = plan.padding();

    let filtered = match path {
        Domain::Dct => {
            let coeffs = plan.basis().forward2d(&block)?;
            let out = plan.filter_block_dct(&coeffs)?;
            if verbose {
                println!("# input DCT coefficients");
                print_real(&coeffs);
                println!("# filtered DCT coefficients");
                print_real(&out);
            }
            plan.basis().inverse2d(&out)?
        }
        Domain::Spatial => convolve(&block, &mask, padding)?,
    };
    if verbose || compare_oracle {
        println!("# filtered block ({padding} padding, {path} path)");
    }
    let quantized = quantize_u8(&filtered)?;
    print_u8(&quantized, plan.n());

    if compare_oracle {
        let oracle = convolve(&block, &mask, padding)?;
        let err = filtered.max_abs_diff(&oracle)?;
        let mismatches = quantized
            .iter()
            .zip(quantize_u8(&oracle)?)
            .filter(|(a, b)| **a != *b)
            .count();
        println!("max_abs_error: {err:e}");
        println!("u8_mismatches: {mismatches}");
    }
    Ok(0)
}

fn cmd_filter_image(
    args: &FilterArgs,
    path: Domain,
    input: &Path,
    out: &Path,
    operators: Option<&Path>,
) -> Result<u8> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let image = load_pgm(&bytes).with_context(|| format!("parsing {}", input.display()))?;
    let filtered = match (path, operators) {
        (Domain::Dct, Some(_)) => filter_image_with_plan(&image, &load_plan(args, operators)?.0)?,
        (Domain::Spatial, Some(_)) => bail!("--operators only applies to --path dct"),
        (path, None) => filter_image(&image, &args.mask()?, args.padding, path, args.n)?,
    };
    fs::write(out, save_pgm(&filtered)).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {}x{} image to {}",
        filtered.width(),
        filtered.height(),
        out.display()
    );
    Ok(0)
}

fn cmd_verify(n: usize, trials: usize, seed: u64, corrupt: bool) -> Result<u8> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let report = verify::run(&VerifyConfig {
        trials,
        seed,
        n,
        corrupt,
    })?;
    println!(
        "{:<22} {:>7} {:>14} {:>12}  status",
        "suite", "cases", "max_float_err", "u8_mismatch"
    );
    for s in &report.suites {
        println!(
            "{:<22} {:>7} {:>14.3e} {:>12}  {}",
            s.name,
            s.cases,
            s.max_float_error,
            s.u8_mismatches,
            if s.passed() { "ok" } else { "FAIL" }
        );
    }
    if report.passed() {
        println!("verified: all suites passed");
        Ok(0)
    } else {
        println!("verification FAILED");
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn cmd_bench(args: &FilterArgs, blocks: usize) -> Result<u8> {
    let mask = args.mask()?;
    let counts = operation_counts(&mask, args.n)?;
    println!(
        "mask {0}x{0}, row_symmetric {1}",
        counts.k, counts.row_symmetric
    );
    println!(
        "filter_sandwiches: unmerged {} ({} matmuls), merged {} ({} matmuls)",
        counts.filter_sandwiches_unmerged,
        OperationCounts::matmuls(counts.filter_sandwiches_unmerged),
        counts.filter_sandwiches_merged,
        OperationCounts::matmuls(counts.filter_sandwiches_merged),
    );
    match (
        counts.replication_groups_unmerged,
        counts.replication_groups_merged,
    ) {
        (Some(u), Some(m)) => println!("replication_groups: unmerged {u}, merged {m}"),
        _ => println!("replication_groups: n/a (six-term correction needs a 3x3 mask)"),
    }
    for t in time_paths(&mask, args.n, args.padding, blocks)? {
        println!(
            "timing {:<8} {} blocks, {:.3} us/block",
            t.label,
            t.blocks,
            t.per_block().as_secs_f64() * 1e6
        );
    }
    Ok(0)
}
