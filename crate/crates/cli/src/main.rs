use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use saf_core::flatsurf::{check_eigenform, kernel_move, TransversalPiece};
use saf_core::involutions::{decide_complete_periodicity, inverse_rauzy_sing};
use saf_core::suspension::{find_suspension_data, generic_lengths, natural_transversal, suspend};
use saf_core::{FlatSurface, GenPerm, KNum, LinearInvolution, PrototypeParams, VerdictKind};

/// Exact SAF invariants, Rauzy induction and flat-surface computations.
#[derive(Parser)]
#[command(name = "saf", version)]
struct Cli {
    /// Add a decimal companion with this many digits next to every exact number.
    #[arg(long, global = true, value_name = "DIGITS")]
    approx: Option<usize>,
    /// Include the wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generalized permutations.
    #[command(subcommand)]
    Perm(PermCmd),
    /// Linear involutions given as {"perm", "lengths"} JSON.
    #[command(subcommand)]
    Involution(InvCmd),
    /// Polygonal surfaces given as surface JSON.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Build the prototype surface with its Prym data and endomorphism.
    Prototype {
        #[arg(long, allow_hyphen_values = true)]
        w: i64,
        #[arg(long, allow_hyphen_values = true)]
        h: i64,
        #[arg(long, allow_hyphen_values = true)]
        e: i64,
        /// Defaults to λ/3.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
    },
    /// Suspend a permutation (text) or involution (JSON) file.
    Suspend { file: PathBuf },
}

#[derive(Subcommand)]
enum PermCmd {
    /// Permutation as "A B / B A" or a file holding it.
    Irreducible { perm: String },
    /// Rauzy steps on an involution file; the singular move is used on equal lengths.
    Rauzy {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long)]
        trace: bool,
    },
    InverseSing {
        perm: String,
        #[arg(long, default_value = "a")]
        letter: String,
    },
}

#[derive(Subcommand)]
enum InvCmd {
    Saf { file: PathBuf },
    /// Exit code 0 = CP, 1 = not CP, 2 = inconclusive.
    Decide {
        file: PathBuf,
        #[arg(long, default_value_t = saf_core::involutions::DEFAULT_BUDGET)]
        budget: usize,
    },
    Flux { file: PathBuf },
}

#[derive(Args)]
struct Jobs {
    /// Worker threads for independent directions.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// SAF of the foliation of slope K ("inf" for vertical); repeat --slope for several.
    Saf {
        file: PathBuf,
        #[arg(long, required = true, allow_hyphen_values = true)]
        slope: Vec<String>,
        #[command(flatten)]
        jobs: Jobs,
    },
    /// Cylinder decomposition in direction "p:q"; repeat --dir for several.
    Cylinders {
        file: PathBuf,
        #[arg(long, required = true, allow_hyphen_values = true)]
        dir: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[command(flatten)]
        jobs: Jobs,
    },
    Flux { file: PathBuf },
    /// Needs a file written by `prototype`.
    Eigencheck { file: PathBuf },
    /// Kernel move by v = "(s,t)"; needs a file written by `prototype`.
    KernelMove {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
    DoubleCover { file: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json(path: &Path) -> Result<Value> {
    let text = read(path)?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
}

fn knum(s: &str) -> Result<KNum> {
    s.trim().parse::<KNum>().map_err(|e| anyhow!("{s:?}: {e}"))
}

/// A literal, or a file whose first non-empty line is the permutation.
fn perm_arg(s: &str) -> Result<(GenPerm, String)> {
    let p = Path::new(s);
    if !p.is_file() {
        return Ok((GenPerm::parse(s)?, s.to_string()));
    }
    let text = read(p)?;
    let (n, line) = text
        .lines()
        .enumerate()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| anyhow!("{s}: empty file"))?;
    let col = line.len() - line.trim_start().len() + 1;
    let g = GenPerm::parse(line).map_err(|e| anyhow!("{s}:{}:{col}: {e}", n + 1))?;
    Ok((g, text))
}

fn involution(path: &Path) -> Result<(LinearInvolution, String)> {
    let text = read(path)?;
    let t = serde_json::from_str(&text).map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))?;
    Ok((t, text))
}

// a bare surface, or a report / object carrying one under "result" or "surface"
fn surface(path: &Path) -> Result<(FlatSurface, Value, String)> {
    let text = read(path)?;
    let mut v = read_json(path)?;
    while v.get("polygons").is_none() {
        match v.get("result").or_else(|| v.get("surface")) {
            Some(inner) => v = inner.clone(),
            None => bail!("{}: no surface found", path.display()),
        }
    }
    Ok((FlatSurface::from_json(&v)?, v, text))
}

fn prototype_of(v: &Value) -> Result<PrototypeParams> {
    let p = v.get("prototype").ok_or_else(|| anyhow!("not a prototype file; run `saf prototype` first"))?;
    let int = |k: &str| p[k].as_i64().ok_or_else(|| anyhow!("prototype.{k} missing"));
    let t = p["t"].as_str().map(knum).transpose()?;
    Ok(PrototypeParams::new(int("w")?, int("h")?, int("e")?, t)?)
}

fn slope(s: &str) -> Result<Option<KNum>> {
    if matches!(s, "inf" | "∞") {
        Ok(None)
    } else {
        knum(s).map(Some)
    }
}

fn direction(s: &str) -> Result<[KNum; 2]> {
    let (p, q) = s.split_once(':').ok_or_else(|| anyhow!("direction {s:?} is not p:q"))?;
    Ok([knum(p)?, knum(q)?])
}

// runs f over the items on `jobs` threads; output keeps the input order
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    let chunk = items.len().div_ceil(jobs).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn with_approx(v: Value, digits: usize) -> Value {
    match v {
        Value::Object(m) => {
            let mut out = serde_json::Map::new();
            for (k, x) in m {
                let companion = x.as_str().and_then(|s| s.parse::<KNum>().ok()).filter(|n| !n.is_rational() || !n.a.is_integer());
                if let Some(n) = companion {
                    out.insert(format!("{k}~"), Value::String(format!("{:.*}", digits, n.to_f64())));
                }
                out.insert(k, with_approx(x, digits));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(|x| with_approx(x, digits)).collect()),
        other => other,
    }
}

struct Outcome {
    input: String,
    result: Value,
    code: u8,
}

fn ok(input: String, result: Value) -> Result<Outcome> {
    Ok(Outcome { input, result, code: 0 })
}

fn perm_cmd(c: PermCmd) -> Result<Outcome> {
    match c {
        PermCmd::Irreducible { perm } => {
            let (g, input) = perm_arg(&perm)?;
            let dec = g.find_decomposition();
            ok(input, json!({ "perm": g.to_string(), "irreducible": dec.is_none(), "decomposition": dec }))
        }
        PermCmd::Rauzy { file, steps, trace } => {
            let (mut t, input) = involution(&file)?;
            let mut log = Vec::new();
            for _ in 0..steps {
                let (x, y) = t.last_syms();
                let (next, step) = if x == y {
                    t.erase_cylinder_letter()?
                } else if t.lengths[&x] == t.lengths[&y] {
                    t.rauzy_sing()?
                } else {
                    t.rauzy()?
                };
                if trace {
                    eprintln!("{:?} winner {} loser {}: {}", step.kind, step.winner, step.loser, next.perm);
                }
                log.push(json!({ "step": value(&step), "perm": next.perm.to_string() }));
                t = next;
            }
            ok(input, json!({ "involution": value(&t), "steps": log }))
        }
        PermCmd::InverseSing { perm, letter } => {
            let (g, input) = perm_arg(&perm)?;
            let pre: Vec<String> = inverse_rauzy_sing(&g, &letter)?.iter().map(|p| p.to_string()).collect();
            ok(input, json!({ "perm": g.to_string(), "count": pre.len(), "preimages": pre }))
        }
    }
}

fn inv_cmd(c: InvCmd) -> Result<Outcome> {
    match c {
        InvCmd::Saf { file } => {
            let (t, input) = involution(&file)?;
            let saf = t.saf();
            ok(input, json!({ "saf": saf.to_string(), "zero": saf.is_zero() }))
        }
        InvCmd::Decide { file, budget } => {
            let (t, input) = involution(&file)?;
            let v = decide_complete_periodicity(&t, budget);
            let code = match v.kind {
                VerdictKind::CP => 0,
                VerdictKind::NotCP => 1,
                VerdictKind::Inconclusive => 2,
            };
            Ok(Outcome { input, result: value(&v), code })
        }
        InvCmd::Flux { file } => {
            let (t, input) = involution(&file)?;
            ok(input, json!({ "galois_flux": t.galois_flux()?.to_string() }))
        }
    }
}

fn surface_cmd(c: SurfaceCmd) -> Result<Outcome> {
    match c {
        SurfaceCmd::Saf { file, slope: slopes, jobs } => {
            let (s, _, input) = surface(&file)?;
            let parsed = slopes.iter().map(|x| slope(x)).collect::<Result<Vec<_>>>()?;
            let out = par_map(&parsed, jobs.jobs, |m| s.saf_direction(m.as_ref()));
            let rows = slopes
                .iter()
                .zip(out)
                .map(|(m, r)| r.map(|w| json!({ "slope": m, "saf": w.to_string(), "zero": w.is_zero() })))
                .collect::<saf_core::Result<Vec<_>>>()?;
            ok(input, json!({ "directions": rows }))
        }
        SurfaceCmd::Cylinders { file, dir, budget, jobs } => {
            let (s, _, input) = surface(&file)?;
            let dirs = dir.iter().map(|d| direction(d)).collect::<Result<Vec<_>>>()?;
            let out = par_map(&dirs, jobs.jobs, |d| s.cylinder_decomposition(d, budget));
            let rows = out.into_iter().map(|r| r.map(|d| value(&d))).collect::<saf_core::Result<Vec<_>>>()?;
            ok(input, json!({ "decompositions": rows }))
        }
        SurfaceCmd::Flux { file } => {
            let (s, _, input) = surface(&file)?;
            let b = s.homology_basis()?;
            let pairing = s.galois_pairing(&b)?;
            let complex = s.complex_flux(&b).map(|z| z.to_string()).map_err(|e| e.to_string());
            ok(
                input,
                json!({
                    "galois_pairing": pairing.to_string(),
                    "complex_flux": complex.as_ref().ok(),
                    "complex_flux_error": complex.as_ref().err(),
                    "flux_re": s.flux_form(&b, false)?.to_string(),
                    "flux_im": s.flux_form(&b, true)?.to_string(),
                }),
            )
        }
        SurfaceCmd::Eigencheck { file } => {
            let (s, v, input) = surface(&file)?;
            let p = prototype_of(&v)?;
            let (_, prym) = p.prym()?;
            let per = s.periods(&prym.minus_basis)?;
            let r = check_eigenform(&prym.intersection, &p.endomorphism(), &per, p.d);
            let code = u8::from(!r.passed());
            Ok(Outcome { input, result: value(&r), code })
        }
        SurfaceCmd::KernelMove { file, v: vec } => {
            let (s, v, input) = surface(&file)?;
            let p = prototype_of(&v)?;
            let inner = vec.trim().trim_start_matches('(').trim_end_matches(')');
            let (a, b) = inner.split_once(',').ok_or_else(|| anyhow!("--v {vec:?} is not (s,t)"))?;
            let moved = kernel_move(&s, &p.kernel_template(), &[knum(a)?, knum(b)?])?;
            let mut out = moved.to_json();
            out["prototype"] = v["prototype"].clone();
            out["stratum"] = Value::String(moved.stratum());
            ok(input, out)
        }
        SurfaceCmd::DoubleCover { file } => {
            let (s, _, input) = surface(&file)?;
            let (cover, deck) = s.orientation_double_cover();
            let mut out = cover.to_json();
            out["deck"] = value(&deck);
            out["stratum"] = Value::String(cover.stratum());
            ok(input, out)
        }
    }
}

fn prototype_cmd(w: i64, h: i64, e: i64, t: Option<String>) -> Result<Outcome> {
    let t = t.as_deref().map(knum).transpose()?;
    let p = PrototypeParams::new(w, h, e, t)?;
    let (s, prym) = p.prym()?;
    let mut out = s.to_json();
    out["prototype"] = value(&p);
    out["prym"] = value(&prym);
    out["endomorphism"] = value(&p.endomorphism());
    out["stratum"] = Value::String(s.stratum());
    ok(format!("{w} {h} {e} {}", p.t), out)
}

fn suspend_cmd(file: &Path) -> Result<Outcome> {
    let text = read(file)?;
    let (g, lengths) = if text.trim_start().starts_with('{') {
        let (t, _) = involution(file)?;
        (t.perm, t.lengths)
    } else {
        let (g, _) = perm_arg(file.to_str().ok_or_else(|| anyhow!("path is not UTF-8"))?)?;
        let l = generic_lengths(&g)?;
        (g, l)
    };
    let data = find_suspension_data(&g, &lengths)?;
    let s = suspend(&data)?;
    let tr: Option<Vec<TransversalPiece>> = natural_transversal(&data)?;
    let mut out = s.to_json();
    out["suspension"] = value(&data);
    out["transversal"] = value(&tr);
    out["stratum"] = Value::String(s.stratum());
    ok(text, out)
}

fn run(cli: Cli) -> Result<(Value, u8)> {
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    let o = match cli.cmd {
        Cmd::Perm(c) => perm_cmd(c)?,
        Cmd::Involution(c) => inv_cmd(c)?,
        Cmd::Surface(c) => surface_cmd(c)?,
        Cmd::Prototype { w, h, e, t } => prototype_cmd(w, h, e, t)?,
        Cmd::Suspend { file } => suspend_cmd(&file)?,
    };
    let result = match cli.approx {
        Some(d) => with_approx(o.result, d),
        None => o.result,
    };
    let digest = Sha256::digest(o.input.as_bytes());
    let mut report = json!({
        "command": echo.join(" "),
        "input_digest": digest.iter().map(|b| format!("{b:02x}")).collect::<String>(),
        "result": result,
    });
    if cli.timing {
        report["timing_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok((report, o.code))
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as "inconclusive"
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok((report, code)) => {
            // a closed pipe downstream is not our error
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&report).expect("json"));
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_directions_and_slopes() {
        assert_eq!(direction("0:1").unwrap(), [KNum::zero(), KNum::one()]);
        assert!(direction("01").is_err());
        assert!(slope("inf").unwrap().is_none());
        assert_eq!(slope("-1/2").unwrap(), Some(KNum::frac(-1, 2)));
    }

    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<i32> = (0..10).collect();
        assert_eq!(par_map(&xs, 3, |x| x * 2), (0..10).map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn approx_adds_companions() {
        let v = with_approx(json!({ "x": "1/3", "n": "2", "p": "A B / B A" }), 3);
        assert_eq!(v["x~"], "0.333");
        assert!(v.get("n~").is_none() && v.get("p~").is_none());
    }
}
