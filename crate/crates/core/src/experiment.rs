//! Monte Carlo harness: parameter sweeps over seeded channel draws, the
//! no-RIS and random-RIS baselines, result CSV files and plot tables.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ambf::{ambf_solve, AmbfStatus};
use crate::bs_qos::solve_qos;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::linalg::{random_phases, to_db, CVector};
use crate::mmf_psa::{mmf_fixed_ris, mmf_solve};
use crate::model::{check_qos_feasible, min_weighted_sinr, sum_rate, BeamformerSet, EffectiveChannels};
use crate::scenario_gen::{generate_channels, read_cvector, read_len, write_c64, write_u64, ChannelSet, GeometryConfig};

pub const CSV_VERSION_LINE: &str = "# risbf results v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Qos,
    Mmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// RIS elements.
    M,
    /// BS antennas.
    N,
    /// Users per group.
    K,
    /// SINR target in dB.
    Gamma,
    /// Power budget in dBm.
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ambf,
    AmbfOneShot,
    Mmf,
    /// Relaxed objective of the joint MMF run, before final processing.
    MmfRelaxed,
    NoRis,
    RandomRis,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ambf => "ambf",
            Method::AmbfOneShot => "ambf_one_shot",
            Method::Mmf => "mmf",
            Method::MmfRelaxed => "mmf_relaxed",
            Method::NoRis => "no_ris",
            Method::RandomRis => "random_ris",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        [Method::Ambf, Method::AmbfOneShot, Method::Mmf, Method::MmfRelaxed, Method::NoRis, Method::RandomRis]
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown method '{name}'")))
    }

    fn valid_for(self, problem: Problem) -> bool {
        match problem {
            Problem::Qos => matches!(self, Method::Ambf | Method::AmbfOneShot | Method::NoRis | Method::RandomRis),
            Problem::Mmf => matches!(self, Method::Mmf | Method::MmfRelaxed | Method::NoRis | Method::RandomRis),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: RunConfig,
    pub problem: Problem,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Adds wall-clock times to the records; output is then not byte-stable.
    pub include_timing: bool,
    /// Per-trial channel and beamformer dumps.
    pub dump_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep value list is empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if let Some(m) = self.methods.iter().find(|m| !m.valid_for(self.problem)) {
            return Err(Error::Config(format!("method '{}' does not apply to this problem", m.name())));
        }
        for &v in &self.values {
            self.config_for(v)?.validate()?;
        }
        Ok(())
    }

    /// Base configuration with the sweep variable set to `value`.
    pub fn config_for(&self, value: f64) -> Result<RunConfig> {
        let mut cfg = self.base.clone();
        let count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::Config(format!("sweep value {value} must be a non-negative integer")))
            }
        };
        match self.sweep {
            SweepVariable::M => cfg.geometry.ris_grid = GeometryConfig::grid_for(count()?),
            SweepVariable::N => cfg.scenario.n_antennas = count()?,
            SweepVariable::K => {
                let k = count()?;
                let g = cfg.scenario.group_sizes.len();
                cfg.scenario.group_sizes = vec![k; g];
                cfg.scenario.sinr_targets_db = None;
            }
            SweepVariable::Gamma => {
                cfg.scenario.sinr_target_db = value;
                cfg.scenario.sinr_targets_db = None;
            }
            SweepVariable::P => cfg.scenario.power_budget_dbm = value,
        }
        Ok(cfg)
    }
}

/// One method on one channel realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub trial: usize,
    pub sweep_value: f64,
    pub method: String,
    pub status: String,
    pub power_dbm: Option<f64>,
    pub min_weighted_sinr_db: Option<f64>,
    pub sum_rate: Option<f64>,
    pub ao_iters: usize,
    pub psa_iters: usize,
    pub wall_time_s: Option<f64>,
}

/// Solver output before conversion to a record.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub bf: Option<BeamformerSet>,
    pub power: Option<f64>,
    pub min_weighted_sinr: Option<f64>,
    pub sum_rate: Option<f64>,
    pub ao_iters: usize,
    pub psa_iters: usize,
    pub status: String,
}

impl MethodOutcome {
    fn failed(status: impl Into<String>) -> Self {
        Self { bf: None, power: None, min_weighted_sinr: None, sum_rate: None, ao_iters: 0, psa_iters: 0, status: status.into() }
    }

    fn solved(channels: &ChannelSet, bf: BeamformerSet, targets: &[f64], noise_power: f64) -> Self {
        let eff = EffectiveChannels::new(channels, &bf.e);
        Self {
            power: Some(bf.total_power()),
            min_weighted_sinr: Some(min_weighted_sinr(channels, &bf, targets, noise_power).value),
            sum_rate: Some(sum_rate(&eff, &bf.w, noise_power)),
            bf: Some(bf),
            ao_iters: 0,
            psa_iters: 0,
            status: "ok".into(),
        }
    }
}

/// Problem data shared by every method on a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub targets: Vec<f64>,
    pub noise_power: f64,
    pub power_budget: f64,
}

/// QoS or MMF with the RIS path removed.
pub fn run_baseline_no_ris(channels: &ChannelSet, problem: Problem, inst: &Instance, cfg: &RunConfig) -> MethodOutcome {
    // an empty RIS vector leaves only the direct channels
    run_fixed_ris(&channels.without_ris(), &CVector::zeros(0), problem, inst, cfg)
}

/// One BS solve (or `a`-only MMF) at i.i.d. uniform random RIS phases.
pub fn run_baseline_random_ris(channels: &ChannelSet, problem: Problem, inst: &Instance, cfg: &RunConfig, seed: u64) -> MethodOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_phases(&mut rng, channels.n_ris());
    run_fixed_ris(channels, &e, problem, inst, cfg)
}

fn run_fixed_ris(channels: &ChannelSet, e: &CVector, problem: Problem, inst: &Instance, cfg: &RunConfig) -> MethodOutcome {
    match problem {
        Problem::Qos => {
            let eff = EffectiveChannels::new(channels, e);
            match solve_qos(&eff, &inst.targets, inst.noise_power, &cfg.qos) {
                Ok(sol) => MethodOutcome::solved(channels, BeamformerSet { w: sol.w, e: e.clone() }, &inst.targets, inst.noise_power),
                Err(err) => MethodOutcome::failed(status_of(&err)),
            }
        }
        Problem::Mmf => {
            let mut mc = cfg.mmf_config();
            mc.power_budget = inst.power_budget;
            match mmf_fixed_ris(channels, e, &inst.targets, inst.noise_power, &mc) {
                Ok(r) => {
                    let mut o = MethodOutcome::solved(channels, r.bf_final, &inst.targets, inst.noise_power);
                    o.psa_iters = r.iterations;
                    o
                }
                Err(err) => MethodOutcome::failed(status_of(&err)),
            }
        }
    }
}

fn status_of(err: &Error) -> String {
    match err {
        Error::Infeasible(_) => "infeasible".into(),
        Error::DegenerateChannel(_) => "degenerate".into(),
        _ => "error".into(),
    }
}

/// Stable 64-bit mix of `(seed, value, trial)` (SplitMix64 finalizer chain).
pub fn trial_seed(seed: u64, value: f64, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ value.to_bits()) ^ trial as u64)
}

/// Runs every requested method on one channel draw.
pub fn run_trial(spec: &ExperimentSpec, value: f64, trial: usize) -> Result<Vec<ResultRecord>> {
    let cfg = spec.config_for(value)?;
    let scenario = cfg.scenario()?;
    let seed = trial_seed(spec.seed, value, trial);
    let channels = generate_channels(&scenario, &cfg.geometry, &cfg.channel_params(), seed)?;
    let inst = Instance {
        targets: scenario.sinr_targets.clone(),
        noise_power: scenario.noise_power,
        power_budget: scenario.power_budget,
    };
    if let Some(dir) = &spec.dump_dir {
        std::fs::create_dir_all(dir)?;
        channels.write_dump(BufWriter::new(File::create(dump_path(dir, value, trial, None))?))?;
    }
    let mut records = Vec::new();
    let mut mmf_cache = None;
    for &method in &spec.methods {
        let start = Instant::now();
        let outcome = match method {
            Method::Ambf | Method::AmbfOneShot => {
                let mut ac = cfg.ambf_config();
                ac.seed = seed ^ 0xA5A5_0001;
                if method == Method::AmbfOneShot {
                    ac = ac.one_shot();
                }
                let r = ambf_solve(&channels, &inst.targets, inst.noise_power, &ac);
                if r.status == AmbfStatus::Infeasible {
                    let mut o = MethodOutcome::failed("infeasible");
                    o.ao_iters = r.ao_iters;
                    o.psa_iters = r.psa_iters;
                    o
                } else {
                    let mut o = MethodOutcome::solved(&channels, r.bf_final, &inst.targets, inst.noise_power);
                    o.ao_iters = r.ao_iters;
                    o.psa_iters = r.psa_iters;
                    o
                }
            }
            Method::Mmf | Method::MmfRelaxed => {
                if mmf_cache.is_none() {
                    let mut mc = cfg.mmf_config();
                    mc.seed = seed ^ 0xA5A5_0002;
                    mmf_cache = Some(mmf_solve(&channels, &inst.targets, inst.noise_power, &mc));
                }
                match mmf_cache.as_ref().expect("just filled") {
                    Ok(r) if method == Method::Mmf => {
                        let mut o = MethodOutcome::solved(&channels, r.bf_final.clone(), &inst.targets, inst.noise_power);
                        o.psa_iters = r.iterations + r.final_iterations;
                        o
                    }
                    Ok(r) => MethodOutcome {
                        bf: None,
                        power: None,
                        min_weighted_sinr: Some(r.relaxed_objective),
                        sum_rate: None,
                        ao_iters: 0,
                        psa_iters: r.iterations,
                        status: "ok".into(),
                    },
                    Err(err) => MethodOutcome::failed(status_of(err)),
                }
            }
            Method::NoRis => run_baseline_no_ris(&channels, spec.problem, &inst, &cfg),
            Method::RandomRis => run_baseline_random_ris(&channels, spec.problem, &inst, &cfg, seed ^ 0xA5A5_0003),
        };
        let elapsed = start.elapsed().as_secs_f64();
        if outcome.status != "ok" {
            warn!("trial {trial} at {value}: {} returned {}", method.name(), outcome.status);
        }
        if let (Some(dir), Some(bf)) = (&spec.dump_dir, &outcome.bf) {
            let dump = BeamformerDump { problem: spec.problem, noise_power: inst.noise_power, power_budget: inst.power_budget, targets: inst.targets.clone(), bf: bf.clone() };
            dump.write(BufWriter::new(File::create(dump_path(dir, value, trial, Some(method)))?))?;
        }
        records.push(ResultRecord {
            trial,
            sweep_value: value,
            method: method.name().into(),
            status: outcome.status,
            power_dbm: outcome.power.map(to_db),
            min_weighted_sinr_db: outcome.min_weighted_sinr.map(to_db),
            sum_rate: outcome.sum_rate,
            ao_iters: outcome.ao_iters,
            psa_iters: outcome.psa_iters,
            wall_time_s: spec.include_timing.then_some(elapsed),
        });
    }
    Ok(records)
}

/// Dump file name for a trial's channels (`method = None`) or one method's beamformers.
pub fn dump_path(dir: &Path, value: f64, trial: usize, method: Option<Method>) -> PathBuf {
    match method {
        None => dir.join(format!("v{value}_t{trial}.chan")),
        Some(m) => dir.join(format!("v{value}_t{trial}_{}.bf", m.name())),
    }
}

/// Runs all sweep values and trials in `(value, trial, method)` order and
/// writes the CSV when an output path is set. Trial failures are logged and
/// skipped.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let mut records = Vec::new();
    for &value in &spec.values {
        for trial in 0..spec.trials {
            match run_trial(spec, value, trial) {
                Ok(r) => records.extend(r),
                Err(err) => warn!("trial {trial} at {value} failed: {err}"),
            }
        }
        info!("finished sweep value {value}");
    }
    if let Some(path) = &spec.output {
        write_results_csv(&records, BufWriter::new(File::create(path)?))?;
    }
    Ok(records)
}

fn fmt6(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_results_csv<W: Write>(records: &[ResultRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "trial",
        "sweep_value",
        "method",
        "status",
        "power_dbm",
        "min_weighted_sinr_db",
        "sum_rate",
        "ao_iters",
        "psa_iters",
        "wall_time_s",
    ])?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            format!("{}", r.sweep_value),
            r.method.clone(),
            r.status.clone(),
            fmt6(r.power_dbm),
            fmt6(r.min_weighted_sinr_db),
            fmt6(r.sum_rate),
            r.ao_iters.to_string(),
            r.psa_iters.to_string(),
            fmt6(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PowerDbm,
    MinWeightedSinrDb,
    SumRate,
}

impl Metric {
    fn get(self, r: &ResultRecord) -> Option<f64> {
        match self {
            Metric::PowerDbm => r.power_dbm,
            Metric::MinWeightedSinrDb => r.min_weighted_sinr_db,
            Metric::SumRate => r.sum_rate,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::PowerDbm => "power_dbm",
            Metric::MinWeightedSinrDb => "min_weighted_sinr_db",
            Metric::SumRate => "sum_rate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub method: String,
    pub x: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub count: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median and interquartile range per `(method, x)`, sorted by method name then x.
pub fn aggregate(records: &[ResultRecord], metric: Metric) -> Vec<PlotRow> {
    let mut groups: BTreeMap<(String, u64), (f64, Vec<f64>)> = BTreeMap::new();
    for r in records {
        // order-preserving key for finite floats
        let bits = r.sweep_value.to_bits();
        let key = if r.sweep_value.is_sign_negative() { !bits } else { bits | (1 << 63) };
        let entry = groups.entry((r.method.clone(), key)).or_insert((r.sweep_value, Vec::new()));
        if let Some(v) = metric.get(r).filter(|v| v.is_finite()) {
            entry.1.push(v);
        }
    }
    let mut rows = Vec::new();
    for ((method, _), (x, mut vals)) in groups {
        if vals.is_empty() {
            warn!("no {} values for {method} at {x}; row omitted", metric.name());
            continue;
        }
        vals.sort_by(f64::total_cmp);
        rows.push(PlotRow {
            method,
            x,
            median: quantile(&vals, 0.5),
            q1: quantile(&vals, 0.25),
            q3: quantile(&vals, 0.75),
            count: vals.len(),
        });
    }
    rows
}

/// Tab-separated plot table: `method x median q1 q3 iqr count`.
pub fn emit_plot_data<W: Write>(records: &[ResultRecord], metric: Metric, mut out: W) -> Result<Vec<PlotRow>> {
    let rows = aggregate(records, metric);
    writeln!(out, "method\tx\t{0}_median\t{0}_q1\t{0}_q3\t{0}_iqr\tcount", metric.name())?;
    for r in &rows {
        writeln!(out, "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}", r.method, r.x, r.median, r.q1, r.q3, r.q3 - r.q1, r.count)?;
    }
    Ok(rows)
}

/// Beamformers together with what is needed to re-validate them.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerDump {
    pub problem: Problem,
    pub noise_power: f64,
    pub power_budget: f64,
    pub targets: Vec<f64>,
    pub bf: BeamformerSet,
}

const BEAM_MAGIC: &[u8; 8] = b"RISBEAM1";

impl BeamformerDump {
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(BEAM_MAGIC)?;
        write_u64(&mut out, matches!(self.problem, Problem::Mmf) as u64)?;
        out.write_all(&self.noise_power.to_le_bytes())?;
        out.write_all(&self.power_budget.to_le_bytes())?;
        write_u64(&mut out, self.targets.len() as u64)?;
        for t in &self.targets {
            out.write_all(&t.to_le_bytes())?;
        }
        let n = self.bf.w.first().map_or(0, |w| w.len());
        write_u64(&mut out, self.bf.w.len() as u64)?;
        write_u64(&mut out, n as u64)?;
        write_u64(&mut out, self.bf.e.len() as u64)?;
        for v in self.bf.w.iter().flat_map(|w| w.iter()).chain(self.bf.e.iter()) {
            write_c64(&mut out, *v)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != BEAM_MAGIC {
            return Err(Error::Format("bad beamformer dump magic".into()));
        }
        let problem = match read_len(&mut input)? {
            0 => Problem::Qos,
            1 => Problem::Mmf,
            other => return Err(Error::Format(format!("unknown problem tag {other}"))),
        };
        let noise_power = read_f64(&mut input)?;
        let power_budget = read_f64(&mut input)?;
        let k = read_len(&mut input)?;
        let targets = (0..k).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
        let g = read_len(&mut input)?;
        let n = read_len(&mut input)?;
        let m = read_len(&mut input)?;
        let w = (0..g).map(|_| read_cvector(&mut input, n)).collect::<Result<Vec<_>>>()?;
        let e = read_cvector(&mut input, m)?;
        Ok(Self { problem, noise_power, power_budget, targets, bf: BeamformerSet { w, e } })
    }

    /// QoS dumps must meet every target with unit-modulus `e`; MMF dumps
    /// must respect the budget with unit-modulus `e`.
    pub fn validate(&self, channels: &ChannelSet, tol: f64) -> Result<()> {
        let modulus_ok = self.bf.e.iter().all(|v| (v.norm() - 1.0).abs() <= tol);
        match self.problem {
            Problem::Qos => {
                let report = check_qos_feasible(channels, &self.bf, &self.targets, self.noise_power, tol);
                if !report.feasible {
                    return Err(Error::Infeasible(format!(
                        "{} SINR and {} modulus violations",
                        report.sinr_violations.len(),
                        report.modulus_violations.len()
                    )));
                }
            }
            Problem::Mmf => {
                if !modulus_ok || self.bf.total_power() > self.power_budget * (1.0 + tol) {
                    return Err(Error::Infeasible("MMF beamformers violate the budget or unit modulus".into()));
                }
            }
        }
        Ok(())
    }
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: &str, x: f64, power: f64) -> ResultRecord {
        ResultRecord {
            trial: 0,
            sweep_value: x,
            method: method.into(),
            status: "ok".into(),
            power_dbm: Some(power),
            min_weighted_sinr_db: None,
            sum_rate: None,
            ao_iters: 0,
            psa_iters: 0,
            wall_time_s: None,
        }
    }

    #[test]
    fn seeds_differ_and_are_stable() {
        let a = trial_seed(1, 16.0, 0);
        assert_eq!(a, trial_seed(1, 16.0, 0));
        assert_ne!(a, trial_seed(1, 16.0, 1));
        assert_ne!(a, trial_seed(1, 64.0, 0));
        assert_ne!(a, trial_seed(2, 16.0, 0));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn aggregate_sorts_and_handles_single_records() {
        let recs = vec![record("b", 2.0, 1.0), record("a", 10.0, 3.0), record("b", 1.0, 5.0), record("a", 2.0, 4.0)];
        let rows = aggregate(&recs, Metric::PowerDbm);
        let keys: Vec<(String, f64)> = rows.iter().map(|r| (r.method.clone(), r.x)).collect();
        assert_eq!(keys, vec![("a".into(), 2.0), ("a".into(), 10.0), ("b".into(), 1.0), ("b".into(), 2.0)]);
        assert!(rows.iter().all(|r| r.q3 - r.q1 == 0.0 && r.count == 1));
        let rows = aggregate(&[record("a", -3.0, 1.0), record("a", -1.0, 1.0)], Metric::PowerDbm);
        assert_eq!(rows[0].x, -3.0);
    }

    #[test]
    fn empty_groups_are_omitted() {
        let mut r = record("a", 1.0, 0.0);
        r.power_dbm = None;
        assert!(aggregate(&[r], Metric::PowerDbm).is_empty());
    }

    #[test]
    fn csv_roundtrip_keeps_six_decimals() {
        let recs = vec![record("ambf", 16.0, -3.123_456_789)];
        let mut buf = Vec::new();
        write_results_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(CSV_VERSION_LINE));
        assert!(text.contains("-3.123457"));
        let back = read_results_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0].power_dbm, Some(-3.123457));
        assert_eq!(back[0].wall_time_s, None);
    }

    #[test]
    fn method_names_roundtrip() {
        for m in [Method::Ambf, Method::AmbfOneShot, Method::Mmf, Method::MmfRelaxed, Method::NoRis, Method::RandomRis] {
            assert_eq!(Method::parse(m.name()).unwrap(), m);
        }
        assert!(Method::parse("sdr").is_err());
    }
}
