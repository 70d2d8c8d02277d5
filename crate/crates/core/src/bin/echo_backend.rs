//! Stand-in solver for the external evaluator protocol.
//!
//! Reads one JSON request per line and answers with a deterministic energy
//! derived from a hash of the request contents (the id excluded).
//!
//! Flags:
//!   --sleep SECONDS   wait before each reply
//!   --reorder N       collect N requests, then answer them in reverse order
//!   --fail            print a message to stderr and exit with status 3 on the first request
//!   --nan             reply with a NaN energy
//!   --garbage         reply with a line that is not JSON
//!   --sizes           include n_ao and n_eri in replies

use std::io::{self, BufRead, Write};
use std::process::ExitCode;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Default)]
struct Options {
    sleep: f64,
    reorder: usize,
    fail: bool,
    nan: bool,
    garbage: bool,
    sizes: bool,
}

fn parse_args() -> Result<Options, String> {
    let mut o = Options { reorder: 1, ..Default::default() };
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--sleep" => {
                o.sleep = args.next().and_then(|s| s.parse().ok()).ok_or("--sleep needs seconds")?;
            }
            "--reorder" => {
                o.reorder = args.next().and_then(|s| s.parse().ok()).filter(|&n| n >= 1).ok_or("--reorder needs N >= 1")?;
            }
            "--fail" => o.fail = true,
            "--nan" => o.nan = true,
            "--garbage" => o.garbage = true,
            "--sizes" => o.sizes = true,
            other => return Err(format!("unknown argument {other}")),
        }
    }
    Ok(o)
}

fn reply(o: &Options, request: &Value) -> Result<String, String> {
    let id = request.get("id").and_then(Value::as_str).ok_or("request without id")?.to_string();
    if o.garbage {
        return Ok("this is not json".into());
    }
    let mut content = request.clone();
    content.as_object_mut().ok_or("request is not an object")?.remove("id");
    let digest = Sha256::digest(content.to_string().as_bytes());
    let frac = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes")) as f64 / u64::MAX as f64;
    let atoms = request.get("atoms").and_then(Value::as_array).ok_or("request without atoms")?;
    let links = request.get("link_atoms").and_then(Value::as_array).map_or(0, Vec::len);
    let electrons: u64 = atoms.iter().filter_map(|a| a.get("Z").and_then(Value::as_u64)).sum::<u64>() + links as u64;
    let energy = -0.5 * electrons as f64 - 0.01 * frac;
    if o.nan {
        return Ok(format!("{{\"id\":{},\"energy_hartree\":NaN}}", json!(id)));
    }
    let mut out = json!({"id": id, "energy_hartree": energy, "uncertainty_hartree": 1e-9});
    if o.sizes {
        let n = (atoms.len() + links) as u64;
        out["n_ao"] = json!(n * 10 + electrons);
        out["n_eri"] = json!(n * n * 100);
    }
    Ok(out.to_string())
}

fn main() -> ExitCode {
    let o = match parse_args() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("echo backend: {e}");
            return ExitCode::from(2);
        }
    };
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    let mut held: Vec<String> = Vec::new();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        if o.fail {
            eprintln!("echo backend: simulated solver failure");
            return ExitCode::from(3);
        }
        let request: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("echo backend: bad request: {e}");
                return ExitCode::from(2);
            }
        };
        match reply(&o, &request) {
            Ok(r) => held.push(r),
            Err(e) => {
                eprintln!("echo backend: {e}");
                return ExitCode::from(2);
            }
        }
        if held.len() >= o.reorder {
            if o.sleep > 0.0 {
                std::thread::sleep(Duration::from_secs_f64(o.sleep));
            }
            for r in held.drain(..).rev() {
                if writeln!(stdout, "{r}").and_then(|_| stdout.flush()).is_err() {
                    return ExitCode::SUCCESS;
                }
            }
        }
    }
    for r in held.drain(..).rev() {
        let _ = writeln!(stdout, "{r}");
    }
    ExitCode::SUCCESS
}
