use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::edge_energy;
use crate::distance::{apsp, DistanceCache, Trial};
use crate::graph::{Edge, Graph, ModelParams};
use crate::scalar::{PathExponent, Real};

/// Steps between from-scratch energy recomputations.
pub const AUDIT_INTERVAL: u64 = 100_000;
/// Relative tolerance of the energy audit.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    #[error("energy drift at step {step}: incremental {incremental}, recomputed {recomputed}")]
    EnergyDrift { step: u64, incremental: f64, recomputed: f64 },
    #[error("thinning interval must be positive")]
    ZeroThin,
    #[error("need at least one step")]
    NoSteps,
}

/// One observation of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub step: u64,
    pub h_p: f64,
    pub energy: f64,
    pub edges: usize,
    pub cost: f64,
}

/// First line of a JSONL trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ChainHeader {
    pub params: ModelParams<f64>,
    pub seed: u64,
    pub n_steps: u64,
    pub thin: u64,
}

/// Header line `{"header": …}` followed by one record per line.
pub fn write_jsonl<W: Write>(mut out: W, header: &ChainHeader, records: &[ChainRecord]) -> std::io::Result<()> {
    serde_json::to_writer(&mut out, &serde_json::json!({ "header": header }))?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub edge: Option<Edge>,
    pub added: bool,
    pub accepted: bool,
}

/// Metropolis chain over single edge flips with uniform proposals.
#[derive(Debug, Clone)]
pub struct ChainState<T: Real> {
    graph: Graph,
    cache: DistanceCache<T>,
    params: ModelParams<T>,
    energy: T,
    cost: T,
    seed: u64,
    step_count: u64,
    accepted: u64,
    rng: ChaCha8Rng,
    trial: Trial<T>,
    n_pow_b: T,
    /// `edge_energy(ℓ)` and `ℓ^γ` indexed by length.
    weight: Vec<T>,
    length_cost: Vec<T>,
}

impl<T: Real> ChainState<T> {
    /// Chain started from the ground graph.
    pub fn new(params: ModelParams<T>, seed: u64) -> Self {
        let graph = Graph::new(params.n).expect("validated params");
        Self::from_graph(params, graph, seed)
    }

    pub fn from_graph(params: ModelParams<T>, graph: Graph, seed: u64) -> Self {
        assert_eq!(graph.n(), params.n, "graph size must match params");
        let cache = apsp(&graph, params.p);
        let weight: Vec<T> = (0..params.n).map(|l| if l < 2 { T::zero() } else { edge_energy(l, params.gamma) }).collect();
        let length_cost: Vec<T> = (0..params.n).map(|l| T::of_usize(l).powf(params.gamma)).collect();
        let mut state = Self {
            energy: T::zero(),
            cost: T::zero(),
            n_pow_b: params.n_pow_b(),
            graph,
            cache,
            params,
            seed,
            step_count: 0,
            accepted: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            trial: Trial::default(),
            weight,
            length_cost,
        };
        state.energy = state.recompute_energy();
        state.cost = state.graph.cost(params.gamma);
        state
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cache(&self) -> &DistanceCache<T> {
        &self.cache
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn energy(&self) -> T {
        self.energy
    }

    pub fn h_p(&self) -> T {
        self.cache.h_p()
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.step_count == 0 {
            0.0
        } else {
            self.accepted as f64 / self.step_count as f64
        }
    }

    /// Number of non-ground pairs `C(N,2) - (N-1)`.
    pub fn num_candidates(&self) -> usize {
        let n = self.params.n;
        n * (n - 1) / 2 - (n - 1)
    }

    /// `U(g)` from a fresh all-pairs computation.
    pub fn recompute_energy(&self) -> T {
        let fresh = apsp(&self.graph, self.params.p);
        super::energy(&self.graph, &fresh, &self.params)
    }

    /// `ΔU` of flipping `e` in the current state, without changing it.
    pub fn delta_energy(&self, e: Edge) -> T {
        let mut trial = Trial::default();
        self.delta_with(e, &mut trial)
    }

    fn delta_with(&self, e: Edge, trial: &mut Trial<T>) -> T {
        let h = self.cache.h_p();
        let w = self.weight[e.len()];
        if self.graph.contains(e) {
            let mut g = self.graph.clone();
            g.remove(e).expect("present edge");
            self.cache.trial_recompute(&g, trial);
            self.n_pow_b * (self.cache.h_of_trial(trial) - h) - w
        } else {
            self.cache.trial_add(e, trial);
            self.n_pow_b * (self.cache.h_of_trial(trial) - h) + w
        }
    }

    fn propose(&mut self) -> Option<Edge> {
        let n = self.params.n;
        if n < 3 {
            return None;
        }
        loop {
            let x = self.rng.gen_range(0..n);
            let y = self.rng.gen_range(0..n);
            if x.abs_diff(y) >= 2 {
                return Some(Edge::new(x, y));
            }
        }
    }

    /// One Metropolis update: flip a uniform non-ground pair and accept with
    /// probability `min(1, exp(-ΔU))`.
    ///
    /// For insertions a cheap lower bound on `ΔU` is tried first; when the
    /// uniform variate already rejects against it, the distances are never
    /// updated. The accepted moves are the same as with the exact `ΔU`.
    pub fn metropolis_step(&mut self) -> StepOutcome {
        self.step_count += 1;
        let Some(e) = self.propose() else {
            return StepOutcome { edge: None, added: false, accepted: false };
        };
        let u = T::from_f64_lossy(self.rng.gen::<f64>());
        let present = self.graph.contains(e);
        let w = self.weight[e.len()];
        let h = self.cache.h_p();
        if !present {
            let h_lb = self.cache.h_lower_bound_after_add(e);
            let du_lb = self.n_pow_b * (h_lb - h) + w;
            if u >= (-du_lb).exp() {
                return StepOutcome { edge: Some(e), added: true, accepted: false };
            }
            if self.params.p.is_infinite() {
                // acceptance needs D' < D + (-ln u - w)/N^b; a small margin keeps
                // this filter strictly inside the exact rejection region
                let slack = ((-u.ln() - w) / self.n_pow_b).to_f64_lossy() + 1e-6;
                let t = self.cache.diameter() as f64 + slack;
                if t < u32::MAX as f64 && self.cache.diameter_after_add_reaches(e, t.ceil().max(0.0) as u32) {
                    return StepOutcome { edge: Some(e), added: true, accepted: false };
                }
            }
        }
        let mut trial = std::mem::take(&mut self.trial);
        let du = if present {
            let mut g = self.graph.clone();
            g.remove(e).expect("present edge");
            self.cache.trial_recompute(&g, &mut trial);
            self.n_pow_b * (self.cache.h_of_trial(&trial) - h) - w
        } else {
            self.cache.trial_add(e, &mut trial);
            self.n_pow_b * (self.cache.h_of_trial(&trial) - h) + w
        };
        let accepted = u < (-du).exp();
        if accepted {
            if present {
                self.graph.remove(e).expect("present edge");
                self.cost = self.cost - self.length_cost[e.len()];
            } else {
                self.graph.insert(e).expect("absent long edge");
                self.cost = self.cost + self.length_cost[e.len()];
            }
            self.cache.commit(&mut trial);
            self.energy = self.energy + du;
            self.accepted += 1;
        }
        self.trial = trial;
        StepOutcome { edge: Some(e), added: !present, accepted }
    }

    /// Compare the running energy with a recomputation and resynchronize.
    pub fn audit(&mut self) -> Result<(), ChainError> {
        let fresh = self.recompute_energy();
        let scale = fresh.abs().max(T::one());
        if (fresh - self.energy).abs() > scale * T::from_f64_lossy(AUDIT_TOLERANCE) {
            return Err(ChainError::EnergyDrift {
                step: self.step_count,
                incremental: self.energy.to_f64_lossy(),
                recomputed: fresh.to_f64_lossy(),
            });
        }
        self.energy = fresh;
        self.cost = self.graph.cost(self.params.gamma);
        Ok(())
    }

    /// `metropolis_step` followed by the periodic audit.
    pub fn step_audited(&mut self) -> Result<StepOutcome, ChainError> {
        let out = self.metropolis_step();
        if self.step_count % AUDIT_INTERVAL == 0 {
            self.audit()?;
        }
        Ok(out)
    }

    pub fn record(&self) -> ChainRecord {
        ChainRecord {
            step: self.step_count,
            h_p: self.h_p().to_f64_lossy(),
            energy: self.energy.to_f64_lossy(),
            edges: self.graph.num_long_edges(),
            cost: self.cost.to_f64_lossy(),
        }
    }
}

/// Run `n_steps` updates from the ground graph, recording every `thin` steps.
pub fn run_chain<T: Real>(
    params: ModelParams<T>,
    n_steps: u64,
    seed: u64,
    thin: u64,
) -> Result<Vec<ChainRecord>, ChainError> {
    if n_steps == 0 {
        return Err(ChainError::NoSteps);
    }
    if thin == 0 {
        return Err(ChainError::ZeroThin);
    }
    let mut state = ChainState::new(params, seed);
    let mut records = Vec::with_capacity((n_steps / thin) as usize);
    for _ in 0..n_steps {
        state.step_audited()?;
        if state.step_count() % thin == 0 {
            records.push(state.record());
        }
    }
    Ok(records)
}

impl ChainHeader {
    pub fn new<T: Real>(params: &ModelParams<T>, seed: u64, n_steps: u64, thin: u64) -> Self {
        let p = match params.p {
            PathExponent::Finite(p) => PathExponent::Finite(p.to_f64_lossy()),
            PathExponent::Infinite => PathExponent::Infinite,
        };
        Self {
            params: ModelParams { n: params.n, gamma: params.gamma.to_f64_lossy(), b: params.b.to_f64_lossy(), p },
            seed,
            n_steps,
            thin,
        }
    }
}
