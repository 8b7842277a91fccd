//! In-memory lease-based task queue with the same semantics as a cloud
//! queue: atomic pickup, lease timeout with re-queue, first-wins
//! completion.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::engine::{EngineError, TaskResult, TaskSpec};

#[derive(Debug, Clone)]
pub enum TaskState {
    Pending,
    Leased { deadline: Instant },
    Done,
}

#[derive(Debug)]
struct QueueEntry {
    spec: TaskSpec,
    state: TaskState,
    result: Option<TaskResult>,
}

/// Shared queue. All transitions happen under one lock so that acquire,
/// completion and lease expiry are atomic with respect to each other.
#[derive(Debug)]
pub struct TaskQueue {
    entries: Mutex<Vec<QueueEntry>>,
    lease_duration: Duration,
}

impl TaskQueue {
    pub fn new(specs: Vec<TaskSpec>, lease_duration: Duration) -> Self {
        let entries = specs
            .into_iter()
            .map(|spec| QueueEntry {
                spec,
                state: TaskState::Pending,
                result: None,
            })
            .collect();
        Self {
            entries: Mutex::new(entries),
            lease_duration,
        }
    }

    /// Lease the lowest-index Pending task, or None if no task is Pending.
    pub fn acquire_task(&self, now: Instant) -> Option<TaskSpec> {
        let mut entries = self.entries.lock().unwrap();
        for entry in entries.iter_mut() {
            if matches!(entry.state, TaskState::Pending) {
                entry.state = TaskState::Leased {
                    deadline: now + self.lease_duration,
                };
                return Some(entry.spec.clone());
            }
        }
        None
    }

    /// Return every expired lease to Pending; Done entries are terminal.
    pub fn expire_leases(&self, now: Instant) -> usize {
        let mut entries = self.entries.lock().unwrap();
        let mut requeued = 0;
        for entry in entries.iter_mut() {
            if let TaskState::Leased { deadline } = entry.state {
                if deadline < now {
                    entry.state = TaskState::Pending;
                    requeued += 1;
                }
            }
        }
        requeued
    }

    /// First completion wins; later duplicates are discarded so a slow
    /// original worker finishing after expiry cannot double-count.
    pub fn complete_task(&self, result: TaskResult) -> Result<bool, EngineError> {
        let mut entries = self.entries.lock().unwrap();
        let entry = entries
            .get_mut(result.task_index as usize)
            .ok_or(EngineError::UnknownTask(result.task_index))?;
        if matches!(entry.state, TaskState::Done) {
            return Ok(false);
        }
        entry.state = TaskState::Done;
        entry.result = Some(result);
        Ok(true)
    }

    pub fn all_done(&self) -> bool {
        self.entries
            .lock()
            .unwrap()
            .iter()
            .all(|e| matches!(e.state, TaskState::Done))
    }

    /// Force a task's lease to expire immediately. Fault-injection hook.
    pub fn force_expire(&self, task_index: u64) {
        let mut entries = self.entries.lock().unwrap();
        if let Some(entry) = entries.get_mut(task_index as usize) {
            if matches!(entry.state, TaskState::Leased { .. }) {
                entry.state = TaskState::Pending;
            }
        }
    }

    /// Drain all stored results, releasing the queue's intermediates.
    pub fn take_results(&self) -> Vec<TaskResult> {
        let mut entries = self.entries.lock().unwrap();
        entries.iter_mut().filter_map(|e| e.result.take()).collect()
    }
}
