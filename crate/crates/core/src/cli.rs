//! Command-line front end. Every command reads JSON documents (see
//! `docs/schema.md`), prints a human summary or, with `--json`, a JSON
//! report, and maps outcomes to exit codes:
//! 0 ok, 1 property violation, 2 input error, 3 precision error.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::RngExt;
use serde_json::{json, Value};

use crate::algebra::FqField;
use crate::bkmod::{check_exact_sd, is_strongly_divisible, sub_quotient, weights, weights_via_filtration, BKModule};
use crate::corpus::{
    random_conjugate, random_induced_submodule, random_irreducible_ambient, random_module, random_sd_extension, random_sd_module, seeded,
};
use crate::error::{Error, Result};
use crate::induct::{character_of_rank_one, induce, rank_one_normal_form, restrict};
use crate::inert::{inert_enumerate, inert_member, TameCharacter, WeightTuple, DEFAULT_BUDGET};
use crate::json::{matrix_doc, parse, ExtensionDoc, InducedDoc, InertDoc, MatrixFileDoc, ModuleDoc, RankOneDoc};
use crate::lattices::smith_form;
use crate::sdinduced::{extract_module, inertial_data, is_sd_via_explicit, worked_example, InducedSubmodule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bkweights", version, about = "Weights and strong divisibility of p-torsion Breuil-Kisin modules")]
pub struct Cli {
    /// Print a JSON report instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Lower the working precision of the input to `u^N`.
    #[arg(long, global = true, value_name = "N")]
    pub precision: Option<i64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weights per embedding, by Smith form and by the filtration scan.
    Weights { module: PathBuf },
    /// Strong divisibility verdict with an adapted-basis certificate.
    SdCheck { module: PathBuf },
    /// Smith exponents of a single matrix.
    Snf { matrix: PathBuf },
    /// Induce a module over `l` down to `k`.
    Induce { module: PathBuf, extension: PathBuf },
    /// Restrict a module over `k` to `l`.
    Restrict { module: PathBuf, extension: PathBuf },
    /// Normal form and character of a rank-one module, or the module of a
    /// normal form.
    RankOne { input: PathBuf },
    /// Inertial weight sets of a description.
    Inert {
        description: PathBuf,
        /// Search box `LO,HI`; defaults to `0,p` when enumerating.
        #[arg(long = "box", value_name = "LO,HI", allow_hyphen_values = true, value_parser = parse_box)]
        bounds: Option<(i64, i64)>,
        #[command(subcommand)]
        action: InertAction,
    },
    /// Run the induced-submodule pipeline on the worked example family or on
    /// a submodule document.
    VerifyExample {
        #[arg(long, default_value_t = 5)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        n: i64,
        #[arg(long, default_value_t = 3)]
        x: i64,
        /// Every `(p, n, x)` with `p ∈ {3, 5, 7}`, `1 ≤ n ≤ p`, `0 ≤ x ≤ p`.
        #[arg(long, conflicts_with = "input")]
        all: bool,
        /// A submodule document instead of the built-in family.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Seeded randomized check of the main invariants.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum InertAction {
    /// All weight tuples in the box.
    Enumerate,
    /// Membership of one tuple, as JSON (`[[-6,0]]`) or `a,b;c,d`.
    Member {
        #[arg(allow_hyphen_values = true)]
        weights: String,
    },
}

fn parse_box(s: &str) -> std::result::Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err("LO must not exceed HI".into());
    }
    Ok((lo, hi))
}

fn parse_tuple(s: &str) -> Result<WeightTuple> {
    let s = s.trim();
    if s.starts_with('[') {
        return Ok(WeightTuple::new(parse::<Vec<Vec<i64>>>(s)?));
    }
    let parts = s
        .split(';')
        .map(|part| {
            part.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<i64>().map_err(|e| Error::InvalidInput(format!("weight `{t}`: {e}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightTuple::new(parts))
}

/// Output of one command.
pub struct Report {
    pub text: String,
    pub json: Value,
    /// A checked property failed.
    pub violation: bool,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { text, json, violation: false }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// A module document, or an induced-submodule document standing for the
/// module it spans.
fn load_module(path: &Path, precision: Option<i64>) -> Result<BKModule> {
    let text = read_input(path)?;
    let m = match parse::<ModuleDoc>(&text) {
        Ok(doc) => doc.build()?,
        Err(module_err) => match parse::<InducedDoc>(&text) {
            Ok(mut doc) => {
                if precision.is_some() {
                    doc.precision = precision;
                }
                extract_module(&doc.build()?)?
            }
            Err(_) => return Err(module_err),
        },
    };
    match precision {
        Some(n) => m.truncate(n),
        None => Ok(m),
    }
}

fn profile_text(w: &[Vec<i64>]) -> String {
    w.iter().map(|ws| ws.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>().join(" | ")
}

fn character_json(c: &TameCharacter) -> Value {
    json!({ "level": c.level, "exponent": crate::json::BigInt(c.exponent), "unramified": c.unramified })
}

fn cmd_weights(path: &Path, precision: Option<i64>) -> Result<Report> {
    let m = load_module(path, precision)?;
    let (a, b) = (weights(&m)?, weights_via_filtration(&m)?);
    let agree = a == b;
    let mut text = format!("{:<10} {:<24} {}\n", "embedding", "smith", "filtration");
    for j in 0..m.residue_degree() {
        text += &format!("{:<10} {:<24} {}\n", j, profile_text(&a.0[j..=j]), profile_text(&b.0[j..=j]));
    }
    text += if agree { "routes agree\n" } else { "ROUTES DISAGREE\n" };
    Ok(Report { text, json: json!({ "weights": a.0, "via_filtration": b.0, "agree": agree }), violation: !agree })
}

fn cmd_sd_check(path: &Path, precision: Option<i64>) -> Result<Report> {
    let m = load_module(path, precision)?;
    let r = is_strongly_divisible(&m)?;
    let reason = if !r.weights_in_range {
        Some("weight out of range")
    } else if !r.filtered_iso {
        Some("filtrations differ")
    } else {
        None
    };
    let mut text = format!("strongly divisible: {}\n", if r.strongly_divisible { "yes" } else { "no" });
    if let Some(reason) = reason {
        text += &format!("reason: {reason}\n");
    }
    text += &format!("weights: {}\n", profile_text(&r.weights.0));
    let mut violation = false;
    let certificate = match &r.certificate {
        Some(cert) => {
            let verified = cert.verify(&m)?;
            violation = !verified;
            text += &format!("adapted bases ({}):\n", if verified { "verified" } else { "FAILED" });
            for (j, pair) in cert.pairs.iter().enumerate() {
                text += &format!("  embedding {j}: phi(g_i) = u^r_i f_i with r = {:?}\n", pair.exponents);
                for (i, g) in pair.source_basis.columns().iter().enumerate() {
                    let g: Vec<String> = g.iter().map(|s| s.to_string()).collect();
                    text += &format!("    g_{i} = ({})\n", g.join(", "));
                }
            }
            json!(cert
                .pairs
                .iter()
                .map(|pair| json!({
                    "exponents": pair.exponents,
                    "source_basis": matrix_doc(&pair.source_basis),
                    "target_basis": matrix_doc(&pair.target_basis),
                }))
                .collect::<Vec<_>>())
        }
        None => Value::Null,
    };
    let json = json!({
        "strongly_divisible": r.strongly_divisible,
        "reason": reason,
        "weights": r.weights.0,
        "filtered_iso": r.filtered_iso,
        "certificate": certificate,
    });
    Ok(Report { text, json, violation })
}

fn cmd_snf(path: &Path, precision: Option<i64>) -> Result<Report> {
    let mut a = parse::<MatrixFileDoc>(&read_input(path)?)?.build()?;
    if let Some(n) = precision {
        a = a.truncate(n);
    }
    let s = smith_form(&a)?;
    let text = format!("exponents: {:?}\n", s.exponents);
    Ok(Report::ok(text, json!({ "exponents": s.exponents, "u": matrix_doc(&s.u), "v": matrix_doc(&s.v) })))
}

fn cmd_change_field(module: &Path, extension: &Path, precision: Option<i64>, down: bool) -> Result<Report> {
    let m = load_module(module, precision)?;
    let ext = parse::<ExtensionDoc>(&read_input(extension)?)?.build()?;
    let out = if down { induce(&ext, &m)? } else { restrict(&ext, &m)? };
    let doc = serde_json::to_value(ModuleDoc::of(&out)).expect("module documents serialize");
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    Ok(Report::ok(text, doc))
}

fn cmd_rank_one(path: &Path, precision: Option<i64>) -> Result<Report> {
    let input = read_input(path)?;
    let (field, data, module) = match parse::<RankOneDoc>(&input) {
        Ok(doc) => {
            let (field, data) = doc.build()?;
            let m = data.to_module(&field)?;
            (field, data, m)
        }
        Err(_) => {
            let mut m = parse::<ModuleDoc>(&input)?.build()?;
            if let Some(n) = precision {
                m = m.truncate(n)?;
            }
            (m.field().clone(), rank_one_normal_form(&m)?, m)
        }
    };
    let chi = character_of_rank_one(&field, &data)?;
    let text = format!("normal form: x = {:?}, exponents = {:?}\ncharacter: {chi}\n", field.coords(data.x), data.exponents);
    let json = json!({
        "normal_form": RankOneDoc::of(&field, &data),
        "module": ModuleDoc::of(&module),
        "character": character_json(&chi),
    });
    Ok(Report::ok(text, json))
}

fn cmd_inert(path: &Path, bounds: Option<(i64, i64)>, action: &InertAction) -> Result<Report> {
    let desc = parse::<InertDoc>(&read_input(path)?)?.build()?;
    let mut text: String = desc.warnings().iter().map(|w| format!("warning: {w}\n")).collect();
    match action {
        InertAction::Enumerate => {
            let (lo, hi) = bounds.unwrap_or((0, desc.p as i64));
            let set = inert_enumerate(&desc, lo, hi, DEFAULT_BUDGET)?;
            for t in &set {
                text += &format!("{t}\n");
            }
            text += &format!("{} tuples in [{lo}, {hi}]\n", set.len());
            let tuples: Vec<&Vec<Vec<i64>>> = set.iter().map(|t| &t.0).collect();
            Ok(Report::ok(text, json!({ "box": [lo, hi], "tuples": tuples, "warnings": desc.warnings() })))
        }
        InertAction::Member { weights } => {
            let lambda = parse_tuple(weights)?;
            let witness = inert_member(&desc, &lambda, bounds)?;
            text += &format!("{lambda} member: {}\n", witness.is_some());
            if let Some(w) = &witness {
                text += &format!("witness: {w:?}\n");
            }
            Ok(Report::ok(text, json!({ "weights": lambda.0, "member": witness.is_some(), "witness": witness })))
        }
    }
}

/// Both SD routes, then for SD input the basepoint, predicted weights and
/// inertial membership.
fn induced_pipeline(m: &InducedSubmodule, expected: Option<Vec<i64>>) -> Result<(bool, String, Value)> {
    let explicit = is_sd_via_explicit(m)?;
    let report = is_strongly_divisible(&extract_module(m)?)?;
    let mut ok = explicit == report.strongly_divisible;
    let mut text = format!("SD (explicit conditions): {explicit}\nSD (filtrations): {}\n", report.strongly_divisible);
    text += &format!("weights: {}\n", profile_text(&report.weights.0));
    let mut json = json!({
        "sd_explicit": explicit,
        "sd_filtration": report.strongly_divisible,
        "weights": report.weights.0,
    });
    if let Some(e) = expected {
        let matches = report.weights.0 == vec![e.clone()];
        ok &= matches;
        text += &format!("expected: {e:?} ({})\n", if matches { "match" } else { "MISMATCH" });
        json["expected"] = json!(e);
    }
    if report.strongly_divisible {
        let d = inertial_data(m)?;
        ok &= d.consistent();
        text += &format!(
            "basepoint: {}\nX: {:?}\nadjusted exponents: {:?}\ncharacter: {}\npredicted weights: {}\ninertial member: {}\n",
            d.x_set.lambda,
            d.x_set.members,
            d.adjusted,
            d.character,
            profile_text(&d.predicted.0),
            d.membership.is_some()
        );
        json["basepoint"] = json!(d.x_set.lambda);
        json["x_set"] = json!(d.x_set.members);
        json["adjusted_exponents"] = json!(d.adjusted);
        json["character"] = character_json(&d.character);
        json["predicted_weights"] = json!(d.predicted.0);
        json["witness"] = json!(d.membership);
    }
    json["consistent"] = json!(ok);
    Ok((ok, text, json))
}

fn cmd_verify_example(p: u32, n: i64, x: i64, all: bool, input: Option<&Path>, precision: Option<i64>) -> Result<Report> {
    if let Some(path) = input {
        let mut doc = parse::<InducedDoc>(&read_input(path)?)?;
        if precision.is_some() {
            doc.precision = precision;
        }
        let (ok, text, json) = induced_pipeline(&doc.build()?, None)?;
        return Ok(Report { text, json, violation: !ok });
    }
    let cases: Vec<(u32, i64, i64)> = if all {
        [3u32, 5, 7].iter().flat_map(|&p| (1..=p as i64).flat_map(move |n| (0..=p as i64).map(move |x| (p, n, x)))).collect()
    } else {
        vec![(p, n, x)]
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut failures = 0;
    for &(p, n, x) in &cases {
        let m = worked_example(p, n, x, precision)?;
        let mut expected = vec![x, 0, n - 1, n, p as i64];
        expected.sort();
        let (ok, t, mut j) = induced_pipeline(&m, Some(expected))?;
        failures += usize::from(!ok);
        if all {
            let w: Vec<Vec<i64>> = serde_json::from_value(j["weights"].clone()).unwrap_or_default();
            text += &format!("p={p} n={n} x={x}: {} weights {}\n", if ok { "ok" } else { "FAIL" }, profile_text(&w));
        } else {
            text += &t;
        }
        j["p"] = json!(p);
        j["n"] = json!(n);
        j["x"] = json!(x);
        rows.push(j);
    }
    if all {
        text += &format!("{} cases, {failures} failures\n", cases.len());
    }
    let json = if all { json!({ "cases": rows, "failures": failures }) } else { rows.pop().expect("one case") };
    Ok(Report { text, json, violation: failures > 0 })
}

#[derive(Default)]
struct Tally {
    checked: usize,
    failures: usize,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        self.checked += 1;
        self.failures += usize::from(!ok);
    }
}

/// Four seeded properties per trial: Smith form against the filtration scan,
/// invariance under a change of basis, additivity along an SD extension, and
/// the induced-submodule pipeline.
pub fn selftest(seed: u64, trials: usize) -> Result<Report> {
    let mut rng = seeded(seed);
    let names = ["dual_weights", "conjugation_invariance", "extension_additivity", "induced_pipeline"];
    let mut tallies: [Tally; 4] = Default::default();
    let mut sd_induced = 0usize;
    for _ in 0..trials {
        let p = [2u32, 3, 5][rng.random_range(0..3)];
        let n = rng.random_range(1..=3usize);
        let f = rng.random_range(1..=2usize);
        let field = FqField::new(p, f)?;
        let prec = BKModule::default_precision(p, n);

        let m = random_module(&field, &mut rng, n, f, prec);
        tallies[0].record(weights(&m)? == weights_via_filtration(&m)?);

        let m = random_sd_module(&field, &mut rng, n, f, prec);
        let c = random_conjugate(&m, &mut rng, prec);
        let (a, b) = (is_strongly_divisible(&m)?, is_strongly_divisible(&c)?);
        tallies[1].record(a.strongly_divisible && b.strongly_divisible && a.weights == b.weights);

        let r1 = rng.random_range(1..=2usize);
        let e = random_sd_extension(&field, &mut rng, r1, 1, f, BKModule::default_precision(p, r1 + 1));
        let sq = sub_quotient(&e.middle, &e.sub)?;
        let r = check_exact_sd(&sq.sub, &e.middle, &sq.quotient)?;
        tallies[2].record(!r.middle_sd || (r.sub_sd && r.quot_sd && r.weights_additive && r.strict));

        let p = [3u32, 5][rng.random_range(0..2)];
        let fl = rng.random_range(2..=4usize);
        let fk = if fl == 4 && rng.random_bool(0.5) { 2 } else { 1 };
        let ambient = random_irreducible_ambient(p, fk, fl, &mut rng)?;
        let sub = random_induced_submodule(&ambient, &mut rng, BKModule::default_precision(p, fl))?;
        let (ok, _, j) = induced_pipeline(&sub, None)?;
        sd_induced += usize::from(j["sd_filtration"] == json!(true));
        tallies[3].record(ok);
    }
    let failures: usize = tallies.iter().map(|t| t.failures).sum();
    let mut text = format!("seed {seed}, {trials} trials\n");
    for (name, t) in names.iter().zip(&tallies) {
        text += &format!("{name:<24} {:>5} checked {:>5} failed\n", t.checked, t.failures);
    }
    text += &format!("strongly divisible induced submodules: {sd_induced}\n");
    text += &format!("failures: {failures}\n");
    let props: Vec<Value> =
        names.iter().zip(&tallies).map(|(name, t)| json!({ "name": name, "checked": t.checked, "failures": t.failures })).collect();
    let json = json!({ "seed": seed, "trials": trials, "properties": props, "sd_induced": sd_induced, "failures": failures });
    Ok(Report { text, json, violation: failures > 0 })
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let prec = cli.precision;
    if let Some(n) = prec {
        if n <= 0 {
            return Err(Error::InvalidInput("precision must be positive".into()));
        }
    }
    match &cli.command {
        Command::Weights { module } => cmd_weights(module, prec),
        Command::SdCheck { module } => cmd_sd_check(module, prec),
        Command::Snf { matrix } => cmd_snf(matrix, prec),
        Command::Induce { module, extension } => cmd_change_field(module, extension, prec, true),
        Command::Restrict { module, extension } => cmd_change_field(module, extension, prec, false),
        Command::RankOne { input } => cmd_rank_one(input, prec),
        Command::Inert { description, bounds, action } => cmd_inert(description, *bounds, action),
        Command::VerifyExample { p, n, x, all, input } => cmd_verify_example(*p, *n, *x, *all, input.as_deref(), prec),
        Command::Selftest { seed, trials } => selftest(*seed, *trials),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_precision() {
        EXIT_PRECISION
    } else {
        EXIT_INPUT
    }
}

/// Parse `args`, run, print, and return the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report.json).expect("serializable"))
            } else {
                write!(out, "{}", report.text)
            };
            if report.violation {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_and_tuple_parsing() {
        assert_eq!(parse_box("-1,5"), Ok((-1, 5)));
        assert!(parse_box("5,1").is_err());
        assert_eq!(parse_tuple("-6,0").unwrap(), WeightTuple::new(vec![vec![-6, 0]]));
        assert_eq!(parse_tuple("[[0,1],[2]]").unwrap(), WeightTuple::new(vec![vec![0, 1], vec![2]]));
        assert!(parse_tuple("1,a").is_err());
    }

    #[test]
    fn selftest_is_deterministic() {
        let a = selftest(11, 3).unwrap();
        let b = selftest(11, 3).unwrap();
        assert_eq!(a.text, b.text);
        assert!(!a.violation);
        let empty = selftest(0, 0).unwrap();
        assert_eq!(empty.json["failures"], json!(0));
        assert_eq!(empty.json["properties"][0]["checked"], json!(0));
    }

    #[test]
    fn usage_errors_exit_with_input_code() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["bkweights", "no-such-command"], &mut out, &mut err), EXIT_INPUT);
        assert_eq!(run(["bkweights", "weights", "/nonexistent.json"], &mut out, &mut err), EXIT_INPUT);
    }
}
