//! `qmlab`: command-line front end for the filter-bank analysis library.

mod format;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qmlab_core::filters::{beta_family, highpass, symbol_cuntz_residual, validate_qmf_sampled};
use qmlab_core::fractal::{
    cantor_filter, hutchinson_check, triadic_masses, validate_on, Dyadic, MAX_HUTCHINSON_DEPTH,
};
use qmlab_core::measure::{
    daubechies_ratio_scan, fractal_ratio_scan, fractal_scale, measure_grid, mu0_interval, RatioScan,
};
use qmlab_core::operators::{cuntz_residual, restricted_family};
use qmlab_core::packets::{
    cascade, expansion_coefficients, parse_pairs, validate_tiling, Tiling, TilingVerdict, DEFAULT_HORIZON,
};
use qmlab_core::spectral::spectrum_f0;
use qmlab_core::{Error, FilterBank, NAdicInterval, SparseSequence, Subspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use format::{num, word, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "qmlab", version, about = "Cuntz-relation analysis of quadrature-mirror filter banks")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Absolute tolerance for validation verdicts.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    tolerance: f64,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Also render a chart to this SVG file (measure --depth, cantor, cascade).
    #[arg(long, global = true, value_name = "PATH")]
    svg: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// At most one bank source; β = 0 when none is given.
#[derive(Debug, Args)]
#[group(multiple = false)]
struct BankArgs {
    /// β-family member.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,

    /// Daubechies' four-tap filter.
    #[arg(long)]
    daubechies: bool,

    /// Haar variant 1..4 (genus 2), or 0 for the genus-1 Haar filter.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=4))]
    haar: Option<u8>,

    /// Real low-pass coefficients a_0,a_1,...
    #[arg(long, value_parser = parse_coeffs, allow_hyphen_values = true)]
    coeffs: Option<Coeffs>,

    /// The three-branch Cantor representation.
    #[arg(long)]
    cantor: bool,

    /// Bank from a JSON file {"N": 2, "coeffs": [[re, im], ...]}.
    #[arg(long, value_name = "FILE")]
    bank: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Coeffs(Vec<f64>);

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SubspaceArg {
    L,
    M,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the bank and its QMF / Cuntz residuals.
    Filter {
        #[command(flatten)]
        bank: BankArgs,
        /// Circle sample points.
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Random sparse sequences for the completeness check.
        #[arg(long, default_value_t = 50)]
        sequences: usize,
    },
    /// Print the restricted matrices F_i.
    Matrices {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long, value_enum, default_value = "m")]
        subspace: SubspaceArg,
    },
    /// μ0 of one interval (--digits) or of every interval at a depth (--depth).
    Measure {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long, required_unless_present = "digits", conflicts_with = "digits")]
        depth: Option<usize>,
        /// Interval address, most significant digit first.
        #[arg(long)]
        digits: Option<String>,
    },
    /// Scaled ratios μ0 of shrinking intervals under a base word.
    Scan {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long, default_value = "")]
        base: String,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
    },
    /// Spectrum of F_0, dominance and the dominant eigendata.
    Spectrum {
        #[command(flatten)]
        bank: BankArgs,
    },
    /// Wavelet-packet tilings.
    Tiling {
        #[command(subcommand)]
        command: TilingCommand,
    },
    /// Wavelet-packet expansion coefficients.
    Packets {
        #[command(subcommand)]
        command: PacketsCommand,
    },
    /// Cascade samples of the packet function φ_n.
    Cascade {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long, default_value_t = 0)]
        n: u64,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        #[arg(long, default_value_t = 1024)]
        res: usize,
        /// Write the samples to this CSV file instead of stdout.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Exact triadic masses of the Cantor measure.
    Cantor {
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Print only the largest self-similarity residual.
        #[arg(long)]
        check_hutchinson: bool,
    },
}

#[derive(Debug, Subcommand)]
enum TilingCommand {
    /// Check that the pairs partition [0, horizon).
    Validate {
        /// Comma-separated p:n pairs.
        #[arg(long, value_parser = parse_pair_list)]
        pairs: PairList,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
    },
}

#[derive(Debug, Clone)]
struct PairList(Vec<(u32, u64)>);

#[derive(Debug, Subcommand)]
enum PacketsCommand {
    /// Coefficients ⟨e_j | S_{i_p}*···S_{i_1}* e_k⟩ over all words of length p.
    Coeffs {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i64,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn parse_coeffs(s: &str) -> Result<Coeffs, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad coefficient {t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Coeffs)
}

fn parse_pair_list(s: &str) -> Result<PairList, String> {
    parse_pairs(s).map(PairList).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CmdResult = Result<bool, Failure>;

struct Ctx {
    format: Format,
    tolerance: f64,
    seed: u64,
    svg: Option<PathBuf>,
    out: String,
}

impl Ctx {
    fn print(&mut self, s: &str) {
        self.out.push_str(s);
        if !s.ends_with('\n') {
            self.out.push('\n');
        }
    }

    fn json(&mut self, v: &Value) {
        let s = serde_json::to_string_pretty(v).expect("JSON values serialize");
        self.print(&s);
    }

    fn write_svg(&self, content: impl FnOnce() -> String) -> Result<(), Failure> {
        if let Some(path) = &self.svg {
            write_file(path, &content())?;
        }
        Ok(())
    }

    fn reject_svg(&self, command: &str) -> Result<(), Failure> {
        match self.svg {
            Some(_) => Err(Failure::Usage(format!("--svg is not available for `{command}`"))),
            None => Ok(()),
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn load_bank(args: &BankArgs) -> Result<FilterBank, Failure> {
    if let Some(beta) = args.beta {
        return Ok(beta_family(beta));
    }
    if args.daubechies {
        return Ok(FilterBank::daubechies());
    }
    if let Some(v) = args.haar {
        return Ok(if v == 0 { FilterBank::haar() } else { FilterBank::haar_variant(v)? });
    }
    if let Some(Coeffs(c)) = &args.coeffs {
        return Ok(FilterBank::from_real_lowpass(c)?);
    }
    if args.cantor {
        return Ok(cantor_filter());
    }
    if let Some(path) = &args.bank {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("bad bank file {}: {e}", path.display())));
    }
    Ok(beta_family(0.0))
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", num(z.re), num(z.im.abs()))
    }
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cmd_filter(ctx: &mut Ctx, bank: &FilterBank, samples: usize, sequences: usize) -> CmdResult {
    ctx.reject_svg("filter")?;
    let tol = ctx.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let seqs: Vec<SparseSequence> = (0..sequences)
        .map(|i| {
            let lo = -(i as i64 % 13) - 4;
            SparseSequence::random(&mut rng, lo..=lo + 8 + (i as i64 % 7))
        })
        .collect();
    let cuntz = cuntz_residual(bank, &seqs);
    let symbol = symbol_cuntz_residual(bank, samples)?;
    let (validation, valid) = if bank.n_branches() == 2 {
        let r = validate_qmf_sampled(bank, tol, samples)?;
        let v = r.verdict.passed;
        (serde_json::to_value(&r).expect("report serializes"), v)
    } else {
        let r = validate_on(bank, samples, tol)?;
        let v = r.verdict.passed;
        (serde_json::to_value(r).expect("report serializes"), v)
    };
    let passed = valid && symbol <= tol && cuntz.max() <= tol;
    match ctx.format {
        Format::Json => {
            let v = json!({
                "bank": bank,
                "genus": bank.genus(),
                "branches": bank.branches().iter().map(|b| b.iter().map(|&z| pair(z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "validation": validation,
                "cuntz": {
                    "symbol_residual": symbol,
                    "orthogonality": cuntz.orthogonality,
                    "completeness": cuntz.completeness,
                    "sequences": sequences,
                    "seed": ctx.seed,
                },
                "passed": passed,
            });
            ctx.json(&v);
        }
        format => {
            let mut t = Table::new(vec!["branch", "k", "coefficient"]);
            for (i, b) in bank.branches().iter().enumerate() {
                for (k, &z) in b.iter().enumerate() {
                    t.push(vec![i.to_string(), k.to_string(), complex(z)]);
                }
            }
            let mut s = t.render(format);
            if format == Format::Text {
                s.push_str(&format!("N {}\ngenus {}\n", bank.n_branches(), bank.genus()));
                if bank.n_branches() == 2 {
                    let r = validate_qmf_sampled(bank, tol, samples)?;
                    s.push_str(&format!("sum_residual {}\n", num(r.sum_residual)));
                    s.push_str(&format!("orthogonality_residual {}\n", num(r.max_orthogonality_residual())));
                    s.push_str(&format!("unitarity_residual {}\n", num(r.unitarity_max_residual)));
                    debug_assert_eq!(highpass(bank)?, bank.branches()[1]);
                } else {
                    let r = validate_on(bank, samples, tol)?;
                    s.push_str(&format!("unitarity_residual {}\n", num(r.max_residual)));
                }
                s.push_str(&format!("symbol_cuntz_residual {}\n", num(symbol)));
                s.push_str(&format!("isometry_residual {}\n", num(cuntz.orthogonality)));
                s.push_str(&format!("completeness_residual {}\n", num(cuntz.completeness)));
                s.push_str(if passed { "valid\n" } else { "invalid\n" });
            }
            ctx.print(&s);
        }
    }
    Ok(passed)
}

fn cmd_matrices(ctx: &mut Ctx, bank: &FilterBank, subspace: Subspace) -> CmdResult {
    ctx.reject_svg("matrices")?;
    let family = restricted_family(bank, subspace);
    match ctx.format {
        Format::Json => {
            let v = serde_json::to_value(&family).expect("operators serialize");
            ctx.json(&v);
        }
        Format::Csv => {
            let mut t = Table::new(vec!["branch", "row", "col", "re", "im"]);
            for f in &family {
                for r in 0..f.dim() {
                    for c in 0..f.dim() {
                        let z = f.matrix()[(r, c)];
                        t.push(vec![f.branch().to_string(), r.to_string(), c.to_string(), num(z.re), num(z.im)]);
                    }
                }
            }
            ctx.print(&t.csv());
        }
        Format::Text => {
            let mut s = String::new();
            for f in &family {
                let w = f.window();
                s.push_str(&format!("F_{} on indices {}..0\n", f.branch(), w.lo));
                let cells: Vec<Vec<String>> = (0..f.dim())
                    .map(|r| (0..f.dim()).map(|c| complex(f.matrix()[(r, c)])).collect())
                    .collect();
                let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
                for row in cells {
                    let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
                    s.push_str(&format!("  {}\n", padded.join("  ")));
                }
            }
            ctx.print(&s);
        }
    }
    Ok(true)
}

fn parse_word(bank: &FilterBank, digits: &str) -> Result<NAdicInterval, Failure> {
    Ok(NAdicInterval::parse(bank.n_branches(), digits)?)
}

fn cmd_measure(ctx: &mut Ctx, bank: &FilterBank, depth: Option<usize>, digits: Option<&str>) -> CmdResult {
    if let Some(d) = digits {
        ctx.reject_svg("measure --digits")?;
        let interval = parse_word(bank, d)?;
        let mass = mu0_interval(bank, &interval)?;
        match ctx.format {
            Format::Json => ctx.json(&json!({
                "word": d,
                "left_endpoint": interval.left_endpoint(),
                "length": interval.length(),
                "mass": mass,
            })),
            Format::Csv => {
                let mut t = Table::new(vec!["word", "left_endpoint", "mass"]);
                t.push(vec![d.to_string(), num(interval.left_endpoint()), num(mass)]);
                ctx.print(&t.csv());
            }
            Format::Text => ctx.print(&num(mass)),
        }
        return Ok(true);
    }
    let depth = depth.expect("clap requires --depth or --digits");
    let grid = measure_grid(bank, depth)?;
    let rows: Vec<(NAdicInterval, f64)> = grid.iter().collect();
    match ctx.format {
        Format::Json => {
            let v = json!({
                "base": grid.base,
                "depth": grid.depth,
                "total": grid.total(),
                "rows": rows.iter().map(|(w, m)| json!({
                    "word": word(w.digits()),
                    "left_endpoint": w.left_endpoint(),
                    "mass": m,
                })).collect::<Vec<_>>(),
            });
            ctx.json(&v);
        }
        format => {
            let mut t = Table::new(vec!["word", "left_endpoint", "mass"]);
            for (w, m) in &rows {
                t.push(vec![word(w.digits()), num(w.left_endpoint()), num(*m)]);
            }
            ctx.print(&t.render(format));
        }
    }
    let width = (grid.base as f64).powi(-(depth as i32));
    ctx.write_svg(|| {
        let heights: Vec<f64> = grid.masses.iter().map(|m| m / width).collect();
        svg::bars(
            &format!("mu0 density, base {}, depth {depth}", grid.base),
            &vec![width; heights.len()],
            &heights,
        )
    })?;
    Ok(true)
}

fn cmd_scan(ctx: &mut Ctx, bank: &FilterBank, base: &str, n_max: usize) -> CmdResult {
    ctx.reject_svg("scan")?;
    let base_word = parse_word(bank, base)?;
    let (kind, scan): (&str, RatioScan) = if fractal_scale(bank)?.is_some() {
        ("fractal", fractal_ratio_scan(bank, &base_word, n_max)?)
    } else {
        ("daubechies", daubechies_ratio_scan(bank, &base_word, n_max)?)
    };
    match ctx.format {
        Format::Json => {
            let v = json!({
                "kind": kind,
                "base": base,
                "ratios": scan.ratios.iter().enumerate().map(|(i, r)| json!({"n": i + 1, "ratio": r})).collect::<Vec<_>>(),
                "settled_at": scan.settled_at,
                "estimate": scan.estimate,
                "residual": scan.residual,
                "predicted": scan.predicted,
                "relative_error": scan.relative_error(),
            });
            ctx.json(&v);
        }
        format => {
            let mut t = Table::new(vec!["n", "ratio"]);
            for (i, r) in scan.ratios.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), num(*r)]);
            }
            let mut s = t.render(format);
            if format == Format::Text {
                let settled = scan.settled_at.map_or("none".to_string(), |n| n.to_string());
                s.push_str(&format!(
                    "kind {kind}\nsettled_at {settled}\nestimate {}\nresidual {}\npredicted {}\nrelative_error {}\n",
                    num(scan.estimate),
                    num(scan.residual),
                    num(scan.predicted),
                    num(scan.relative_error())
                ));
            }
            ctx.print(&s);
        }
    }
    Ok(true)
}

fn cmd_spectrum(ctx: &mut Ctx, bank: &FilterBank) -> CmdResult {
    ctx.reject_svg("spectrum")?;
    let data = spectrum_f0(bank)?;
    match ctx.format {
        Format::Csv => {
            let mut t = Table::new(vec!["index", "re", "im", "modulus"]);
            for (i, z) in data.eigenvalues.iter().enumerate() {
                t.push(vec![i.to_string(), num(z.re), num(z.im), num(z.norm())]);
            }
            ctx.print(&t.csv());
        }
        _ => {
            let v = serde_json::to_value(&data).expect("spectral data serializes");
            ctx.json(&v);
        }
    }
    Ok(true)
}

fn cmd_tiling(ctx: &mut Ctx, pairs: Vec<(u32, u64)>, horizon: u64) -> CmdResult {
    ctx.reject_svg("tiling")?;
    let tiling = Tiling::new(pairs, horizon)?;
    let verdict = validate_tiling(&tiling)?;
    match ctx.format {
        Format::Json => {
            let mut v = serde_json::to_value(verdict).expect("verdict serializes");
            v["horizon"] = json!(horizon);
            ctx.json(&v);
        }
        Format::Csv => {
            let (name, at) = verdict_parts(verdict);
            let mut t = Table::new(vec!["verdict", "at", "horizon"]);
            t.push(vec![name.into(), at.map_or(String::new(), |a| a.to_string()), horizon.to_string()]);
            ctx.print(&t.csv());
        }
        Format::Text => {
            let s = match verdict_parts(verdict) {
                (name, Some(at)) => format!("{name} at {at}"),
                (name, None) => name.to_string(),
            };
            ctx.print(&s);
        }
    }
    Ok(verdict.is_valid())
}

fn verdict_parts(v: TilingVerdict) -> (&'static str, Option<u64>) {
    match v {
        TilingVerdict::Valid => ("valid", None),
        TilingVerdict::Gap(at) => ("gap", Some(at)),
        TilingVerdict::Overlap(at) => ("overlap", Some(at)),
    }
}

fn cmd_packets(ctx: &mut Ctx, bank: &FilterBank, p: usize, k: i64) -> CmdResult {
    ctx.reject_svg("packets")?;
    let map = expansion_coefficients(bank, p, k)?;
    match ctx.format {
        Format::Json => {
            let v = serde_json::to_value(&map).expect("coefficients serialize");
            ctx.json(&v);
        }
        format => {
            let mut t = Table::new(vec!["word", "j", "re", "im"]);
            for ((w, j), z) in &map.entries {
                t.push(vec![word(w), j.to_string(), num(z.re), num(z.im)]);
            }
            ctx.print(&t.render(format));
        }
    }
    Ok(true)
}

fn cmd_cascade(ctx: &mut Ctx, bank: &FilterBank, n: u64, iters: usize, res: usize, csv: Option<&Path>) -> CmdResult {
    let samples = cascade(bank, n, iters, res)?;
    let real = samples.is_real();
    let header = if real { vec!["x", "value"] } else { vec!["x", "re", "im"] };
    let mut t = Table::new(header);
    for (j, z) in samples.values.iter().enumerate() {
        let mut row = vec![num(samples.x(j)), num(z.re)];
        if !real {
            row.push(num(z.im));
        }
        t.push(row);
    }
    if let Some(path) = csv {
        write_file(path, &t.csv())?;
        ctx.print(&format!("wrote {} samples to {}", samples.values.len(), path.display()));
    } else {
        match ctx.format {
            Format::Json => {
                let v = json!({
                    "n": n,
                    "iterations": iters,
                    "resolution": samples.resolution,
                    "support": samples.support,
                    "samples": samples.values.iter().enumerate().map(|(j, z)| json!({
                        "x": samples.x(j),
                        "re": z.re,
                        "im": z.im,
                    })).collect::<Vec<_>>(),
                });
                ctx.json(&v);
            }
            format => ctx.print(&t.render(format)),
        }
    }
    ctx.write_svg(|| {
        let xs: Vec<f64> = (0..samples.values.len()).map(|j| samples.x(j)).collect();
        let ys: Vec<f64> = samples.values.iter().map(|z| z.re).collect();
        svg::line(&format!("cascade n = {n}, {iters} iterations"), &xs, &ys)
    })?;
    Ok(true)
}

fn exact_endpoint(w: &NAdicInterval) -> String {
    match w.left_endpoint_exact() {
        Some((0, _)) => "0".into(),
        Some((p, 1)) => p.to_string(),
        Some((p, q)) => format!("{p}/{q}"),
        None => num(w.left_endpoint()),
    }
}

fn cmd_cantor(ctx: &mut Ctx, depth: usize, check: bool) -> CmdResult {
    if depth > MAX_HUTCHINSON_DEPTH {
        return Err(Failure::Usage(format!("depth must be at most {MAX_HUTCHINSON_DEPTH}, got {depth}")));
    }
    if check {
        ctx.reject_svg("cantor --check-hutchinson")?;
        let residual = hutchinson_check(depth)?;
        match ctx.format {
            Format::Json => ctx.json(&json!({"depth": depth, "max_residual": residual})),
            Format::Csv => ctx.print(&format!("depth,max_residual\n{depth},{residual}")),
            Format::Text => ctx.print(&residual.to_string()),
        }
        return Ok(residual == Dyadic::ZERO);
    }
    let masses = triadic_masses(depth)?;
    let words: Vec<NAdicInterval> = (0..masses.len()).map(|i| triadic_word(depth, i)).collect();
    match ctx.format {
        Format::Json => {
            let v = json!({
                "depth": depth,
                "rows": words.iter().zip(&masses).map(|(w, m)| json!({
                    "word": word(w.digits()),
                    "left_endpoint": exact_endpoint(w),
                    "mass": m.to_f64(),
                    "mass_exact": m,
                })).collect::<Vec<_>>(),
            });
            ctx.json(&v);
        }
        format => {
            let mut t = Table::new(vec!["word", "left_endpoint", "mass"]);
            for (w, m) in words.iter().zip(&masses) {
                t.push(vec![word(w.digits()), exact_endpoint(w), num(m.to_f64())]);
            }
            ctx.print(&t.render(format));
        }
    }
    let width = 3f64.powi(-(depth as i32));
    ctx.write_svg(|| {
        let heights: Vec<f64> = masses.iter().map(|m| m.to_f64() / width).collect();
        svg::bars(&format!("Cantor measure density, depth {depth}"), &vec![width; heights.len()], &heights)
    })?;
    Ok(true)
}

fn triadic_word(depth: usize, mut index: usize) -> NAdicInterval {
    let mut digits = vec![0u8; depth];
    for slot in digits.iter_mut().rev() {
        *slot = (index % 3) as u8;
        index /= 3;
    }
    NAdicInterval::new(3, digits).expect("base-3 digits")
}

fn run(cli: Cli) -> (String, Result<bool, Failure>) {
    let mut ctx = Ctx {
        format: cli.format,
        tolerance: cli.tolerance,
        seed: cli.seed,
        svg: cli.svg,
        out: String::new(),
    };
    let result = (|| match cli.command {
        Command::Filter { bank, samples, sequences } => cmd_filter(&mut ctx, &load_bank(&bank)?, samples, sequences),
        Command::Matrices { bank, subspace } => {
            let s = match subspace {
                SubspaceArg::L => Subspace::L,
                SubspaceArg::M => Subspace::M,
            };
            cmd_matrices(&mut ctx, &load_bank(&bank)?, s)
        }
        Command::Measure { bank, depth, digits } => cmd_measure(&mut ctx, &load_bank(&bank)?, depth, digits.as_deref()),
        Command::Scan { bank, base, n_max } => cmd_scan(&mut ctx, &load_bank(&bank)?, &base, n_max),
        Command::Spectrum { bank } => cmd_spectrum(&mut ctx, &load_bank(&bank)?),
        Command::Tiling {
            command: TilingCommand::Validate { pairs, horizon },
        } => cmd_tiling(&mut ctx, pairs.0, horizon),
        Command::Packets {
            command: PacketsCommand::Coeffs { bank, p, k },
        } => cmd_packets(&mut ctx, &load_bank(&bank)?, p, k),
        Command::Cascade { bank, n, iters, res, csv } => {
            cmd_cascade(&mut ctx, &load_bank(&bank)?, n, iters, res, csv.as_deref())
        }
        Command::Cantor { depth, check_hutchinson } => cmd_cantor(&mut ctx, depth, check_hutchinson),
    })();
    (ctx.out, result)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let (out, result) = run(cli);
    print!("{out}");
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
    }
}
