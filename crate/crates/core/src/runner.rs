//! The per-step cognitive loop, experiment sweeps and run artifacts.

use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{match_devices, Assignment, MatchParams};
use crate::baselines::{circle_packing, p_median, score_placement};
use crate::clustering::{lloyd, ClusterSet, LloydSettings};
use crate::controller::{control_input, ControlParams};
use crate::dynamics::{step_dynamics, Discretization};
use crate::error::{Error, Result};
use crate::events::{apply_failure, step_mobility};
use crate::graph::{build_graph, laplacian, LinkParams, ProximityGraph};
use crate::metrics::{
    coverage_fraction, fiedler_value, info_penetration, recovery_report, MetricsRecord,
    RecoveryReport,
};
use crate::model::{
    sample_initial_state, FailureEvent, MapState, MsdState, ScenarioConfig, SimulationState,
};
use crate::rng::{RngStreams, Stream};
use crate::scalar::Scalar;

/// Parameter bundles derived once from a configuration.
#[derive(Clone, Debug)]
pub struct Pipeline<T> {
    pub matching: MatchParams<T>,
    pub link: LinkParams<T>,
    pub control: ControlParams<T>,
    pub discretization: Discretization<T>,
    pub spreading_rate: T,
}

/// Matching, graph and metrics of one state.
#[derive(Clone, Debug)]
pub struct Observation<T> {
    pub assignment: Assignment,
    pub graph: ProximityGraph<T>,
    pub record: MetricsRecord<T>,
}

impl<T: Scalar> Pipeline<T> {
    pub fn from_config(cfg: &ScenarioConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            matching: MatchParams {
                range: cfg.range,
                capacity: cfg.capacity,
                kappa: cfg.kappa,
                eta: cfg.eta,
            },
            link: LinkParams::new(cfg.range, cfg.epsilon, cfg.gamma)?,
            control: ControlParams::from_config(cfg)?,
            discretization: Discretization::new(cfg.sampling_interval, cfg.run.scheme)?,
            spreading_rate: cfg.spreading_rate,
        })
    }

    pub fn observe(
        &self,
        t: T,
        msds: &[MsdState<T>],
        maps: &[MapState<T>],
    ) -> Result<Observation<T>> {
        let assignment = match_devices(msds, maps, &self.matching);
        let graph = build_graph(maps, &self.link);
        let record = MetricsRecord {
            t,
            coverage: coverage_fraction(&assignment, msds.len())?,
            fiedler: fiedler_value(&laplacian(&graph))?,
            info_penetration: info_penetration(&graph, self.spreading_rate),
            alive_maps: graph.len(),
        };
        Ok(Observation {
            assignment,
            graph,
            record,
        })
    }
}

/// Sub-stages of one step, in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Cluster,
    Match,
    Control,
    Integrate,
    Failure,
    Mobility,
    Metrics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub stage: Stage,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Record the per-step stage sequence.
    pub trace: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunOutput<T> {
    pub seed: u64,
    pub config: ScenarioConfig<T>,
    #[serde(skip)]
    pub records: Vec<MetricsRecord<T>>,
    pub snapshots: Vec<SimulationState<T>>,
    pub recovery: Vec<RecoveryReport<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

impl<T: Scalar> RunOutput<T> {
    /// Metrics time series with columns `t, coverage, fiedler, info_penetration, alive_maps`.
    pub fn metrics_csv(&self) -> Result<String> {
        records_to_csv(&self.records)
    }

    /// Configuration echo, seed, snapshots and recovery reports.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Mean of every metric over the final `window` seconds.
    pub fn final_mean(&self, window: T) -> Option<MetricsRecord<T>> {
        final_window_mean(&self.records, window)
    }
}

pub fn records_to_csv<T: Scalar>(records: &[MetricsRecord<T>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn records_from_csv<T: Scalar>(text: &str) -> Result<Vec<MetricsRecord<T>>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Serialization(e.to_string()))
}

fn final_window_mean<T: Scalar>(
    records: &[MetricsRecord<T>],
    window: T,
) -> Option<MetricsRecord<T>> {
    let last = records.last()?;
    let slack = window.abs() * T::lit(1e-9) + T::lit(1e-9);
    let tail: Vec<_> = records
        .iter()
        .filter(|r| r.t >= last.t - window - slack)
        .collect();
    let n = T::from_count(tail.len());
    Some(MetricsRecord {
        t: last.t,
        coverage: tail.iter().map(|r| r.coverage).sum::<T>() / n,
        fiedler: tail.iter().map(|r| r.fiedler).sum::<T>() / n,
        info_penetration: tail.iter().map(|r| r.info_penetration).sum::<T>() / n,
        alive_maps: last.alive_maps,
    })
}

/// A running simulation. [`Simulation::step`] executes one pass of the loop:
/// cluster, match, control, integrate, failures, mobility, metrics.
pub struct Simulation<T: Scalar> {
    config: ScenarioConfig<T>,
    pipeline: Pipeline<T>,
    state: SimulationState<T>,
    clusters: ClusterSet<T>,
    observation: Observation<T>,
    events: Vec<(FailureEvent<T>, bool)>,
    mobility_rng: ChaCha8Rng,
    failure_rng: ChaCha8Rng,
    clustering_rng: ChaCha8Rng,
    lloyd: LloydSettings<T>,
    records: Vec<MetricsRecord<T>>,
    snapshots: Vec<SimulationState<T>>,
    trace: Option<Vec<TraceEntry>>,
    current_step: usize,
}

impl<T: Scalar> Simulation<T> {
    pub fn new(config: ScenarioConfig<T>, options: RunOptions) -> Result<Self> {
        let pipeline = Pipeline::from_config(&config)?;
        let streams = RngStreams::new(config.seed);
        let mut state = sample_initial_state(&config, &mut streams.stream(Stream::Placement))?;
        let mut clustering_rng = streams.stream(Stream::Clustering);
        let lloyd_settings = LloydSettings {
            max_iters: config.run.cluster_max_iters,
            tol: config.run.cluster_tol,
        };
        let clusters = lloyd(
            &state.msd_positions(),
            config.clusters,
            None,
            &mut clustering_rng,
            &lloyd_settings,
        )
        .map_err(|e| e.at_step(0))?;
        state.cluster_centers = clusters.centers.clone();
        let observation = pipeline
            .observe(T::zero(), &state.msds, &state.maps)
            .map_err(|e| e.at_step(0))?;
        observation
            .assignment
            .apply(&mut state.msds, &mut state.maps);

        let mut events: Vec<_> = config.failure_events.iter().map(|e| (*e, false)).collect();
        events.sort_by(|a, b| a.0.time.partial_cmp(&b.0.time).expect("validated time"));
        let mut sim = Self {
            pipeline,
            clusters,
            events,
            mobility_rng: streams.stream(Stream::Mobility),
            failure_rng: streams.stream(Stream::Failure),
            clustering_rng,
            lloyd: lloyd_settings,
            records: vec![observation.record],
            observation,
            snapshots: Vec::new(),
            trace: options.trace.then(Vec::new),
            current_step: 0,
            state,
            config,
        };
        sim.maybe_snapshot();
        Ok(sim)
    }

    pub fn state(&self) -> &SimulationState<T> {
        &self.state
    }

    pub fn records(&self) -> &[MetricsRecord<T>] {
        &self.records
    }

    pub fn observation(&self) -> &Observation<T> {
        &self.observation
    }

    pub fn clusters(&self) -> &ClusterSet<T> {
        &self.clusters
    }

    fn mark(&mut self, stage: Stage) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEntry {
                step: self.current_step,
                stage,
            });
        }
    }

    fn maybe_snapshot(&mut self) {
        let every = self.config.run.snapshot_every;
        if every > 0 && self.state.step_index % every == 0 {
            self.snapshots.push(self.state.clone());
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let step = self.state.step_index + 1;
        self.current_step = step;
        self.advance().map_err(|e| e.at_step(step))
    }

    fn advance(&mut self) -> Result<()> {
        // goals from warm-started clustering of the current device positions
        self.mark(Stage::Cluster);
        let positions = self.state.msd_positions();
        let warm = self.clusters.centers.clone();
        self.clusters = lloyd(
            &positions,
            self.config.clusters,
            Some(&warm),
            &mut self.clustering_rng,
            &self.lloyd,
        )?;
        self.state.cluster_centers = self.clusters.centers.clone();

        // the observation of the current state already holds its matching
        self.mark(Stage::Match);
        let loads = self.observation.assignment.loads.clone();

        self.mark(Stage::Control);
        let u = control_input(
            &self.state.maps,
            &self.observation.graph,
            &loads,
            &self.clusters,
            &self.pipeline.control,
        )?;

        self.mark(Stage::Integrate);
        step_dynamics(&mut self.state.maps, &u, &self.pipeline.discretization)?;
        self.state.step_index += 1;
        self.state.t = T::from_count(self.state.step_index) * self.config.sampling_interval;

        self.mark(Stage::Failure);
        let slack = self.config.sampling_interval * T::lit(1e-6);
        for i in 0..self.events.len() {
            let (event, applied) = self.events[i];
            if !applied && self.state.t + slack >= event.time {
                apply_failure(&mut self.state.maps, &event, &mut self.failure_rng)?;
                self.events[i].1 = true;
            }
        }

        self.mark(Stage::Mobility);
        step_mobility(
            &mut self.state.msds,
            self.config.mobility_scale,
            &mut self.mobility_rng,
        )?;

        self.mark(Stage::Metrics);
        self.observation =
            self.pipeline
                .observe(self.state.t, &self.state.msds, &self.state.maps)?;
        self.observation
            .assignment
            .apply(&mut self.state.msds, &mut self.state.maps);
        self.records.push(self.observation.record);
        self.maybe_snapshot();
        Ok(())
    }

    pub fn finish(mut self) -> Result<RunOutput<T>> {
        if self.snapshots.last().map(|s| s.step_index) != Some(self.state.step_index) {
            self.snapshots.push(self.state.clone());
        }
        let mut recovery = Vec::new();
        for (event, applied) in &self.events {
            if *applied {
                recovery.extend(recovery_report(
                    &self.records,
                    event.time,
                    self.config.run.recovery_window,
                )?);
            }
        }
        Ok(RunOutput {
            seed: self.config.seed,
            records: self.records,
            snapshots: self.snapshots,
            recovery,
            trace: self.trace.unwrap_or_default(),
            config: self.config,
        })
    }
}

/// Runs the scenario to its horizon.
pub fn run<T: Scalar>(config: &ScenarioConfig<T>) -> Result<RunOutput<T>> {
    run_with(config, RunOptions::default())
}

pub fn run_with<T: Scalar>(
    config: &ScenarioConfig<T>,
    options: RunOptions,
) -> Result<RunOutput<T>> {
    let mut sim = Simulation::new(config.clone(), options)?;
    for _ in 0..config.step_count() {
        sim.step()?;
    }
    sim.finish()
}

/// Scenario parameters a sweep may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    MapCount,
    FailureFraction,
    MobilityScale,
    Clusters,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "map_count" => Ok(Self::MapCount),
            "failure_fraction" | "fraction" => Ok(Self::FailureFraction),
            "s" | "mobility_scale" => Ok(Self::MobilityScale),
            "K" | "clusters" => Ok(Self::Clusters),
            other => Err(Error::Config(format!(
                "unknown sweep parameter {other:?} (expected L, failure_fraction, s or K)"
            ))),
        }
    }
}

impl SweepParam {
    /// Copy of `base` with this parameter set to `value`.
    pub fn apply<T: Scalar>(self, base: &ScenarioConfig<T>, value: T) -> Result<ScenarioConfig<T>> {
        let mut cfg = base.clone();
        let count = |v: T| {
            v.to_usize()
                .filter(|&n| T::from_count(n) == v)
                .ok_or_else(|| {
                    Error::Config(format!("{self:?} needs a non-negative integer, got {v}"))
                })
        };
        match self {
            SweepParam::MapCount => cfg.map_count = count(value)?,
            SweepParam::Clusters => cfg.clusters = count(value)?,
            SweepParam::MobilityScale => cfg.mobility_scale = value,
            SweepParam::FailureFraction => {
                if cfg.failure_events.is_empty() {
                    return Err(Error::Config(
                        "failure_fraction sweep needs a scheduled failure event".into(),
                    ));
                }
                cfg.failure_events
                    .iter_mut()
                    .for_each(|e| e.fraction = value);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepPoint<T> {
    pub value: T,
    pub result: MetricsRecord<T>,
}

/// One seeded run per value, summarized by its final-window means.
pub fn sweep<T: Scalar>(
    config: &ScenarioConfig<T>,
    param: SweepParam,
    values: &[T],
) -> Result<Vec<SweepPoint<T>>> {
    let configs = values
        .iter()
        .map(|&v| param.apply(config, v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(cfg, &value)| {
            let out = run(cfg)?;
            let result = out
                .final_mean(cfg.run.recovery_window)
                .expect("runs hold at least one record");
            Ok(SweepPoint { value, result })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ComparisonRow<T> {
    pub map_count: usize,
    pub dynamic: MetricsRecord<T>,
    pub p_median: MetricsRecord<T>,
    pub circle_packing: MetricsRecord<T>,
}

/// Dynamic method against the two static baselines, with device mobility
/// and failures switched off, for each access point count.
pub fn compare<T: Scalar>(
    config: &ScenarioConfig<T>,
    map_counts: &[usize],
) -> Result<Vec<ComparisonRow<T>>> {
    let mut base = config.clone();
    base.mobility_scale = T::zero();
    base.failure_events.clear();
    base.validate()?;
    let streams = RngStreams::new(base.seed);
    let devices = sample_initial_state(&base, &mut streams.stream(Stream::Placement))?.msds;
    let points: Vec<_> = devices.iter().map(|m| m.position).collect();

    map_counts
        .par_iter()
        .map(|&count| {
            let mut cfg = base.clone();
            cfg.map_count = count;
            let dynamic = run(&cfg)?
                .final_mean(cfg.run.recovery_window)
                .expect("runs hold at least one record");
            let mut rng = streams.stream(Stream::Baselines);
            let pm = p_median(&points, count, &mut rng, cfg.run.p_median_restarts)?;
            let cp = circle_packing(&points, count, cfg.separation, cfg.range, &mut rng)?;
            Ok(ComparisonRow {
                map_count: count,
                dynamic,
                p_median: score_placement(&pm, &devices, &cfg)?,
                circle_packing: score_placement(&cp, &devices, &cfg)?,
            })
        })
        .collect()
}
