//! Bounded job queue drained by a fixed pool of worker threads.
//!
//! Each job runs generation, then decimation to the configured vertex
//! budget, then glTF export. Callers poll [`GenerationService::job`] or block
//! in [`GenerationService::wait`].

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc::{self, Receiver, SyncSender, TrySendError};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    GenerationError, GenerationJob, GenerationRequest, GeneratorBackendKind, HttpGenerator, MeshGenerator, StubGenerator,
    StubParams,
};
use crate::meshops::{decimate, export_glb, DecimationParams};

/// Called once per job after it reaches a terminal state.
pub type JobHook = Arc<dyn Fn(&GenerationJob) + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub workers: usize,
    pub queue_capacity: usize,
    pub external_url: Option<String>,
    pub timeout_ms: u64,
    pub poll_interval_ms: u64,
    pub stub: StubParams,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            workers: 2,
            queue_capacity: 64,
            external_url: None,
            timeout_ms: 120_000,
            poll_interval_ms: 500,
            stub: StubParams::default(),
        }
    }
}

struct Task {
    job_id: String,
    request: GenerationRequest,
    backend: GeneratorBackendKind,
}

struct Shared {
    jobs: Mutex<HashMap<String, GenerationJob>>,
    changed: Condvar,
    generators: HashMap<GeneratorBackendKind, Arc<dyn MeshGenerator>>,
    decimation: Option<DecimationParams>,
    hook: Option<JobHook>,
}

pub struct GenerationService {
    shared: Arc<Shared>,
    sender: Option<SyncSender<Task>>,
    workers: Vec<JoinHandle<()>>,
}

impl GenerationService {
    /// Stub generator always available; the external one only when
    /// `cfg.external_url` is set.
    pub fn new(cfg: &GenerationConfig, decimation: Option<DecimationParams>, hook: Option<JobHook>) -> Self {
        let mut generators: Vec<(GeneratorBackendKind, Arc<dyn MeshGenerator>)> =
            vec![(GeneratorBackendKind::Stub, Arc::new(StubGenerator { params: cfg.stub }))];
        if let Some(url) = &cfg.external_url {
            generators.push((
                GeneratorBackendKind::External,
                Arc::new(HttpGenerator::new(
                    url,
                    Duration::from_millis(cfg.timeout_ms),
                    Duration::from_millis(cfg.poll_interval_ms),
                )),
            ));
        }
        Self::with_generators(cfg.workers, cfg.queue_capacity, generators, decimation, hook)
    }

    pub fn with_generators(
        workers: usize,
        queue_capacity: usize,
        generators: Vec<(GeneratorBackendKind, Arc<dyn MeshGenerator>)>,
        decimation: Option<DecimationParams>,
        hook: Option<JobHook>,
    ) -> Self {
        let shared = Arc::new(Shared {
            jobs: Mutex::new(HashMap::new()),
            changed: Condvar::new(),
            generators: generators.into_iter().collect(),
            decimation,
            hook,
        });
        let (sender, receiver) = mpsc::sync_channel::<Task>(queue_capacity.max(1));
        let receiver = Arc::new(Mutex::new(receiver));
        let workers = (0..workers.max(1))
            .map(|i| {
                let shared = Arc::clone(&shared);
                let receiver = Arc::clone(&receiver);
                thread::Builder::new()
                    .name(format!("generation-{i}"))
                    .spawn(move || worker_loop(&shared, &receiver))
                    .expect("spawn generation worker")
            })
            .collect();
        Self { shared, sender: Some(sender), workers }
    }

    /// Enqueues a job. Backend failures after this point are recorded on the
    /// job, not returned here.
    pub fn submit(&self, request: GenerationRequest, backend: GeneratorBackendKind) -> Result<String, GenerationError> {
        let job_id = uuid::Uuid::new_v4().simple().to_string();
        let job = GenerationJob::new(job_id.clone(), request.payload.label.clone(), backend);
        self.shared.jobs.lock().unwrap().insert(job_id.clone(), job);
        let task = Task { job_id: job_id.clone(), request, backend };
        let sender = self.sender.as_ref().expect("service is running");
        match sender.try_send(task) {
            Ok(()) => Ok(job_id),
            Err(TrySendError::Full(_)) | Err(TrySendError::Disconnected(_)) => {
                self.shared.jobs.lock().unwrap().remove(&job_id);
                Err(GenerationError::QueueFull)
            }
        }
    }

    pub fn job(&self, job_id: &str) -> Option<GenerationJob> {
        self.shared.jobs.lock().unwrap().get(job_id).cloned()
    }

    /// Blocks until the job is terminal or `timeout` passes; returns the
    /// latest snapshot either way.
    pub fn wait(&self, job_id: &str, timeout: Duration) -> Option<GenerationJob> {
        let deadline = Instant::now() + timeout;
        let mut jobs = self.shared.jobs.lock().unwrap();
        loop {
            let job = jobs.get(job_id)?;
            let now = Instant::now();
            if job.state().is_terminal() || now >= deadline {
                return Some(job.clone());
            }
            jobs = self.shared.changed.wait_timeout(jobs, deadline - now).unwrap().0;
        }
    }

    /// Records the client-reported load/render duration; a later report replaces it.
    pub fn record_load_render(&self, job_id: &str, ms: u64) -> bool {
        let mut jobs = self.shared.jobs.lock().unwrap();
        match jobs.get_mut(job_id) {
            Some(job) => {
                job.timings.load_render_ms = Some(ms);
                true
            }
            None => false,
        }
    }

    pub fn job_count(&self) -> usize {
        self.shared.jobs.lock().unwrap().len()
    }
}

impl Drop for GenerationService {
    fn drop(&mut self) {
        self.sender.take();
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

fn worker_loop(shared: &Shared, receiver: &Mutex<Receiver<Task>>) {
    loop {
        let task = match receiver.lock().unwrap().recv() {
            Ok(t) => t,
            Err(_) => return,
        };
        update(shared, &task.job_id, |j| {
            j.start();
        });
        let outcome = catch_unwind(AssertUnwindSafe(|| run_task(shared, &task)))
            .unwrap_or_else(|_| Err((GenerationError::PostProcess("worker panicked".into()), Default::default())));
        let finished = update(shared, &task.job_id, |j| match outcome {
            Ok((mesh, asset, timings, input_vertices)) => {
                j.timings = timings;
                j.input_vertices = Some(input_vertices);
                j.succeed(mesh, asset);
            }
            Err((e, timings)) => {
                j.timings = timings;
                j.fail(e.to_string());
            }
        });
        if let (Some(hook), Some(job)) = (&shared.hook, finished) {
            hook(&job);
        }
    }
}

type TaskOutput = (crate::mesh::Mesh, Vec<u8>, super::JobTimings, usize);

fn run_task(shared: &Shared, task: &Task) -> Result<TaskOutput, (GenerationError, super::JobTimings)> {
    let mut timings = super::JobTimings::default();
    let generator = shared.generators.get(&task.backend).ok_or_else(|| {
        (GenerationError::BackendUnavailable(format!("no {:?} generator configured", task.backend).to_lowercase()), timings)
    })?;

    let started = Instant::now();
    let generated = generator.generate(&task.request);
    timings.conversion_ms = Some(started.elapsed().as_millis() as u64);
    let mesh = generated.map_err(|e| (e, timings))?;
    let input_vertices = mesh.vertex_count();

    let started = Instant::now();
    let mesh = match &shared.decimation {
        Some(params) => decimate(&mesh, params).map_err(|e| (GenerationError::PostProcess(e.to_string()), timings))?,
        None => mesh,
    };
    timings.simplify_ms = Some(started.elapsed().as_millis() as u64);

    let started = Instant::now();
    let asset = export_glb(&mesh).map_err(|e| (GenerationError::PostProcess(e.to_string()), timings))?;
    timings.export_ms = Some(started.elapsed().as_millis() as u64);
    Ok((mesh, asset, timings, input_vertices))
}

fn update(shared: &Shared, job_id: &str, f: impl FnOnce(&mut GenerationJob)) -> Option<GenerationJob> {
    let mut jobs = shared.jobs.lock().unwrap();
    let snapshot = jobs.get_mut(job_id).map(|j| {
        f(j);
        j.clone()
    });
    drop(jobs);
    shared.changed.notify_all();
    snapshot
}
