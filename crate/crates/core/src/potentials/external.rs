use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::{geometry_digest, EvaluationRecord, Evaluator, Ledger, LedgerKey, SubproblemSpec, DEFAULT_UNCERTAINTY};
use crate::cost::{cost_of_method, sizes_for_centers, CostParams, SurrogateConfig};
use crate::error::{Error, Result};
use crate::fragment::{extract_subsystem, CovalentRadii, Fragmentation, Geometry};

/// Bytes of backend stderr kept for diagnostics.
const STDERR_TAIL: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestAtom {
    #[serde(rename = "Z")]
    pub z: u32,
    pub xyz: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestLinkAtom {
    pub xyz: [f64; 3],
}

/// One line sent to the backend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub atoms: Vec<RequestAtom>,
    pub link_atoms: Vec<RequestLinkAtom>,
    pub method_index: u32,
    pub basis_index: u32,
    pub charge: i32,
    pub spin: u32,
}

/// One line received from the backend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: String,
    pub energy_hartree: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty_hartree: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ao: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_eri: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExternalConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    /// Per-request limit in seconds.
    pub timeout_s: f64,
    /// Number of backend processes.
    pub concurrency: usize,
    pub charge: i32,
    pub spin: u32,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        ExternalConfig { command: Vec::new(), timeout_s: 3600.0, concurrency: 1, charge: 0, spin: 1 }
    }
}

type Reply = std::result::Result<Response, String>;

struct Worker {
    child: Mutex<Child>,
    stdin: Mutex<ChildStdin>,
    pending: Arc<Mutex<HashMap<String, Sender<Reply>>>>,
    stderr: Arc<Mutex<String>>,
    alive: Arc<AtomicBool>,
}

impl Worker {
    fn spawn(command: &[String]) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Config("external evaluator command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Config(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");
        let mut stderr_pipe = child.stderr.take().expect("piped");
        let pending: Arc<Mutex<HashMap<String, Sender<Reply>>>> = Arc::default();
        let stderr: Arc<Mutex<String>> = Arc::default();
        let alive = Arc::new(AtomicBool::new(true));

        let (p, a) = (pending.clone(), alive.clone());
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    continue;
                }
                dispatch(&p, &line);
            }
            a.store(false, Ordering::SeqCst);
            p.lock().clear();
        });
        let tail = stderr.clone();
        thread::spawn(move || {
            let mut buf = [0u8; 1024];
            while let Ok(n) = stderr_pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let mut t = tail.lock();
                t.push_str(&String::from_utf8_lossy(&buf[..n]));
                if t.len() > STDERR_TAIL {
                    let cut = t.len() - STDERR_TAIL;
                    let cut = (cut..t.len()).find(|&i| t.is_char_boundary(i)).unwrap_or(t.len());
                    t.drain(..cut);
                }
            }
        });
        Ok(Worker { child: Mutex::new(child), stdin: Mutex::new(stdin), pending, stderr, alive })
    }

    fn diagnostics(&self) -> String {
        let status = match self.child.lock().try_wait() {
            Ok(Some(s)) => format!("backend exited with {s}"),
            Ok(None) => "backend still running".to_string(),
            Err(e) => format!("backend status unknown: {e}"),
        };
        let tail = self.stderr.lock();
        if tail.trim().is_empty() {
            status
        } else {
            format!("{status}; stderr: {}", tail.trim())
        }
    }

    fn kill(&self) {
        self.alive.store(false, Ordering::SeqCst);
        let mut child = self.child.lock();
        let _ = child.kill();
        let _ = child.wait();
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        self.kill();
    }
}

fn dispatch(pending: &Mutex<HashMap<String, Sender<Reply>>>, line: &str) {
    let value: serde_json::Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => {
            // Without an id the reply cannot be routed; fail everything in flight.
            for (_, tx) in pending.lock().drain() {
                let _ = tx.send(Err(format!("malformed response {line:?}: {e}")));
            }
            return;
        }
    };
    let Some(id) = value.get("id").and_then(|v| v.as_str()).map(str::to_string) else {
        for (_, tx) in pending.lock().drain() {
            let _ = tx.send(Err(format!("response without id: {line:?}")));
        }
        return;
    };
    let Some(tx) = pending.lock().remove(&id) else {
        log::warn!("discarding response for unknown request {id}");
        return;
    };
    let reply = serde_json::from_value::<Response>(value).map_err(|e| format!("malformed response {line:?}: {e}"));
    let _ = tx.send(reply);
}

/// Evaluates subsystems by sending requests to external solver processes
/// and caching the answers in a ledger.
pub struct ExternalEvaluator {
    config: ExternalConfig,
    geometry: Arc<Geometry>,
    fragmentation: Arc<Fragmentation>,
    radii: CovalentRadii,
    surrogate: SurrogateConfig,
    cost: CostParams,
    ledger: Arc<Ledger>,
    workers: Vec<Mutex<Option<Arc<Worker>>>>,
    next_worker: AtomicU64,
    next_id: AtomicU64,
    calls: AtomicU64,
    id: String,
}

impl ExternalEvaluator {
    pub fn new(
        config: ExternalConfig,
        geometry: Arc<Geometry>,
        fragmentation: Arc<Fragmentation>,
        ledger: Arc<Ledger>,
    ) -> Result<Self> {
        if config.command.is_empty() {
            return Err(Error::Config("external evaluator command is empty".into()));
        }
        if !(config.timeout_s.is_finite() && config.timeout_s > 0.0) {
            return Err(Error::Config(format!("timeout must be positive, got {}", config.timeout_s)));
        }
        if config.concurrency == 0 {
            return Err(Error::Config("concurrency must be at least 1".into()));
        }
        if fragmentation.atom_count() != geometry.len() {
            return Err(Error::Config("fragmentation does not match the geometry".into()));
        }
        let id = format!("external:{}", config.command.join(" "));
        let workers = (0..config.concurrency).map(|_| Mutex::new(None)).collect();
        Ok(ExternalEvaluator {
            config,
            geometry,
            fragmentation,
            radii: CovalentRadii::default(),
            surrogate: SurrogateConfig::default(),
            cost: CostParams::default(),
            ledger,
            workers,
            next_worker: AtomicU64::new(0),
            next_id: AtomicU64::new(0),
            calls: AtomicU64::new(0),
            id,
        })
    }

    pub fn with_radii(mut self, radii: CovalentRadii) -> Self {
        self.radii = radii;
        self
    }

    pub fn with_surrogate(mut self, surrogate: SurrogateConfig) -> Self {
        self.surrogate = surrogate;
        self
    }

    pub fn with_cost_params(mut self, cost: CostParams) -> Self {
        self.cost = cost;
        self
    }

    /// Number of requests actually sent to a backend process.
    pub fn backend_calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// The request for `spec`, with an empty id.
    pub fn request_for(&self, spec: &SubproblemSpec) -> Result<Request> {
        let sub = extract_subsystem(&self.geometry, &self.fragmentation, &spec.subset, &self.radii)?;
        let all = self.geometry.atoms();
        Ok(Request {
            id: String::new(),
            atoms: sub
                .atoms
                .iter()
                .map(|a| RequestAtom { z: all[a as usize].z, xyz: all[a as usize].position })
                .collect(),
            link_atoms: sub.link_atoms.iter().map(|l| RequestLinkAtom { xyz: l.position }).collect(),
            method_index: spec.method_index,
            basis_index: spec.basis_index,
            charge: self.config.charge,
            spin: self.config.spin,
        })
    }

    fn centers(request: &Request) -> Vec<(u32, [f64; 3])> {
        request
            .atoms
            .iter()
            .map(|a| (a.z, a.xyz))
            .chain(request.link_atoms.iter().map(|l| (1, l.xyz)))
            .collect()
    }

    fn worker(&self) -> Result<Arc<Worker>> {
        let slot = (self.next_worker.fetch_add(1, Ordering::SeqCst) % self.workers.len() as u64) as usize;
        let mut guard = self.workers[slot].lock();
        if let Some(w) = guard.as_ref() {
            if w.alive.load(Ordering::SeqCst) {
                return Ok(w.clone());
            }
        }
        let w = Arc::new(Worker::spawn(&self.config.command)?);
        *guard = Some(w.clone());
        Ok(w)
    }

    fn retire(&self, worker: &Arc<Worker>) {
        worker.kill();
        for slot in &self.workers {
            let mut guard = slot.lock();
            if guard.as_ref().is_some_and(|w| Arc::ptr_eq(w, worker)) {
                *guard = None;
            }
        }
    }

    fn call(&self, spec: &SubproblemSpec, mut request: Request) -> Result<Response> {
        let fail = |msg: String| Error::Evaluation { element: spec.to_string(), msg };
        request.id = format!("req-{}", self.next_id.fetch_add(1, Ordering::SeqCst));
        let line = serde_json::to_string(&request).map_err(|e| fail(e.to_string()))? + "\n";
        let worker = self.worker()?;
        let (tx, rx) = mpsc::channel();
        worker.pending.lock().insert(request.id.clone(), tx);
        self.calls.fetch_add(1, Ordering::SeqCst);
        let sent = {
            let mut stdin = worker.stdin.lock();
            stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush())
        };
        if let Err(e) = sent {
            worker.pending.lock().remove(&request.id);
            // Give the reader a moment to observe the exit for a useful status.
            thread::sleep(Duration::from_millis(50));
            let diag = worker.diagnostics();
            self.retire(&worker);
            return Err(fail(format!("cannot write request: {e}; {diag}")));
        }
        let timeout = Duration::from_secs_f64(self.config.timeout_s);
        let started = Instant::now();
        match rx.recv_timeout(timeout) {
            Ok(Ok(resp)) => Ok(resp),
            Ok(Err(msg)) => {
                let diag = worker.diagnostics();
                self.retire(&worker);
                Err(fail(format!("{msg}; {diag}")))
            }
            Err(RecvTimeoutError::Timeout) => {
                worker.pending.lock().remove(&request.id);
                self.retire(&worker);
                Err(fail(format!(
                    "no response within {:.3} s (waited {:.3} s); backend killed",
                    self.config.timeout_s,
                    started.elapsed().as_secs_f64()
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let deadline = Instant::now() + Duration::from_millis(500);
                while worker.child.lock().try_wait().ok().flatten().is_none() && Instant::now() < deadline {
                    thread::sleep(Duration::from_millis(10));
                }
                let diag = worker.diagnostics();
                self.retire(&worker);
                Err(fail(format!("backend closed its output; {diag}")))
            }
        }
    }
}

impl Evaluator for ExternalEvaluator {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn evaluate(&self, spec: &SubproblemSpec) -> Result<EvaluationRecord> {
        let fail = |msg: String| Error::Evaluation { element: spec.to_string(), msg };
        if spec.subset.is_empty() {
            // The empty subsystem has no electrons and no energy.
            return Ok(EvaluationRecord {
                value: 0.0,
                uncertainty: 0.0,
                cost: 0.0,
                wall_time: 0.0,
                backend: self.id.clone(),
            });
        }
        let request = self.request_for(spec)?;
        let centers = Self::centers(&request);
        let digest = geometry_digest(&centers, self.config.charge, self.config.spin);
        let key = LedgerKey::new(&self.id, spec, &digest);
        if let Some(hit) = self.ledger.get(&key) {
            return Ok(hit);
        }
        let started = Instant::now();
        let resp = self.call(spec, request)?;
        let wall_time = started.elapsed().as_secs_f64();
        if !resp.energy_hartree.is_finite() {
            return Err(fail(format!("backend returned a non-finite energy {}", resp.energy_hartree)));
        }
        let uncertainty = resp.uncertainty_hartree.unwrap_or(DEFAULT_UNCERTAINTY);
        if !(uncertainty.is_finite() && uncertainty >= 0.0) {
            return Err(fail(format!("backend returned an invalid uncertainty {uncertainty}")));
        }
        let mut sizes = sizes_for_centers(&centers, spec.basis_index, &self.surrogate)?;
        if let Some(n_ao) = resp.n_ao {
            if n_ao < sizes.n_occ {
                return Err(fail(format!("reported n_ao {n_ao} is below {} occupied orbitals", sizes.n_occ)));
            }
            sizes.n_ao = n_ao;
            sizes.n_virt = n_ao - sizes.n_occ;
        }
        if let Some(n_eri) = resp.n_eri {
            sizes.n_eri = n_eri;
        }
        let record = EvaluationRecord {
            value: resp.energy_hartree,
            uncertainty,
            cost: cost_of_method(&self.cost, spec.method_index, &sizes)?,
            wall_time,
            backend: self.id.clone(),
        };
        self.ledger.put(&key, &record)?;
        Ok(record)
    }

    fn estimate_cost(&self, spec: &SubproblemSpec) -> Option<f64> {
        if spec.subset.is_empty() {
            return Some(0.0);
        }
        let request = self.request_for(spec).ok()?;
        let sizes = sizes_for_centers(&Self::centers(&request), spec.basis_index, &self.surrogate).ok()?;
        cost_of_method(&self.cost, spec.method_index, &sizes).ok()
    }
}
