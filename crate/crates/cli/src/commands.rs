use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use tailsitter::aero::{CoefficientTable, DEFAULT_TABLE_TOLERANCE};
use tailsitter::alloc_probe::count_allocations;
use tailsitter::dataset::{generate_dataset, Dataset, Target};
use tailsitter::mission::{
    default_mission, run_mission, standard_segments, summary_to_csv, trace_to_csv,
};
use tailsitter::mlp::{InitScheme, Network, Topology};
use tailsitter::train::{gradient_check, rmse, train};

use crate::config::RunConfig;
use crate::error::CliError;

/// Largest gradient-check error accepted by `grad-check`.
pub const GRAD_CHECK_LIMIT: f64 = 1e-5;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Dataset::from_csv_str(&text).map_err(|e| CliError::io(path, e))
}

fn load_net(path: &Path) -> Result<Network, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Network::from_weight_str(&text).map_err(|e| CliError::io(path, e))
}

fn active_table(cfg: &RunConfig) -> Result<CoefficientTable, CliError> {
    match &cfg.table {
        None => Ok(CoefficientTable::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            CoefficientTable::from_csv_str(&text, DEFAULT_TABLE_TOLERANCE)
                .map_err(|e| CliError::io(path, e))
        }
    }
}

fn fresh_net(cfg: &RunConfig, seed: u64) -> Network {
    Network::init(
        Topology::standard(),
        seed,
        InitScheme::UniformXavier,
        cfg.biases,
    )
}

fn split(cfg: &RunConfig, data: &Dataset) -> Result<(Dataset, Dataset), CliError> {
    Ok(data.split(cfg.train_fraction, cfg.split_seed())?)
}

pub fn gen_data(cfg: &RunConfig) -> Result<(), CliError> {
    let table = active_table(cfg)?;
    let data = generate_dataset(
        cfg.samples,
        cfg.data_seed(),
        cfg.ranges,
        &cfg.params,
        &table,
    )?;
    let out = cfg.out.clone().unwrap_or_else(|| cfg.dataset.clone());
    write(&out, &data.to_csv_string())?;
    println!("wrote {} samples to {}", data.len(), out.display());
    Ok(())
}

pub fn train_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let data = read_dataset(&cfg.dataset)?;
    let (train_set, test_set) = split(cfg, &data)?;
    let mut net_f1 = fresh_net(cfg, cfg.init_seed());
    let mut net_f2 = fresh_net(cfg, cfg.init_seed().wrapping_add(1));
    let report = train(
        &mut net_f1,
        &mut net_f2,
        &train_set,
        &test_set,
        &cfg.train_config(),
    )?;
    write(&cfg.weights_f1, &net_f1.to_weight_string())?;
    write(&cfg.weights_f2, &net_f2.to_weight_string())?;
    let out = cfg.out.clone().unwrap_or_else(|| "train_report.csv".into());
    write(&out, &report.to_csv_string())?;
    println!("{}", report.summary_line());
    Ok(())
}

pub fn grad_check(cfg: &RunConfig) -> Result<(), CliError> {
    let table = active_table(cfg)?;
    let samples = generate_dataset(
        cfg.grad_inputs,
        cfg.data_seed(),
        cfg.ranges,
        &cfg.params,
        &table,
    )?;
    let mut worst: f64 = 0.0;
    for k in 0..cfg.grad_nets {
        let net = fresh_net(cfg, cfg.init_seed().wrapping_add(k as u64));
        for s in &samples.samples {
            let err = gradient_check(&net, &s.input(), s.f1, cfg.fd_step)?;
            worst = worst.max(err);
        }
    }
    println!(
        "max_relative_error={worst:e} nets={} inputs={} step={:e}",
        cfg.grad_nets, cfg.grad_inputs, cfg.fd_step
    );
    if worst.is_nan() || worst > GRAD_CHECK_LIMIT {
        return Err(CliError::Numerical(format!(
            "gradient check error {worst:e} exceeds {GRAD_CHECK_LIMIT:e}"
        )));
    }
    Ok(())
}

/// `trace.csv` → `trace.summary.csv`.
pub fn summary_path(trace: &Path) -> PathBuf {
    let stem = trace
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trace");
    trace.with_file_name(format!("{stem}.summary.csv"))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let table = active_table(cfg)?;
    let (net_f1, net_f2) = if cfg.zero_nets {
        let zero = Network::init(Topology::standard(), 0, InitScheme::Zeros, cfg.biases);
        (zero.clone(), zero)
    } else {
        (load_net(&cfg.weights_f1)?, load_net(&cfg.weights_f2)?)
    };
    let trace = run_mission(
        &default_mission(),
        &cfg.params,
        &table,
        &net_f1,
        &net_f2,
        cfg.dt,
    )?;
    let out = cfg.out.clone().unwrap_or_else(|| "trace.csv".into());
    write(&out, &trace_to_csv(&trace))?;
    let summary = summary_to_csv(&standard_segments(&trace));
    write(&summary_path(&out), &summary)?;
    println!("wrote {} records to {}", trace.len(), out.display());
    print!("{summary}");
    Ok(())
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

/// Forward-pass latency over `bench_calls` calls on a fresh network, timed in
/// blocks of 1000. Weight values do not affect the cost.
pub fn bench(cfg: &RunConfig) -> Result<(), CliError> {
    const BLOCK: usize = 1000;
    let net = fresh_net(cfg, cfg.init_seed());
    let mut scratch = net.scratch();
    let inputs: Vec<[f64; 2]> = (0..BLOCK)
        .map(|k| [(k % 181) as f64 * 0.1, (k % 51) as f64 * 0.1 - 1.0])
        .collect();
    let mut sink = 0.0;
    for x in inputs.iter().cycle().take(20 * BLOCK) {
        sink += net.forward(x, &mut scratch);
    }
    let blocks = cfg.bench_calls.div_ceil(BLOCK);
    let mut per_call = Vec::with_capacity(blocks);
    let (_, allocs) = count_allocations(|| {
        for _ in 0..blocks {
            let start = Instant::now();
            for x in &inputs {
                sink += net.forward(x, &mut scratch);
            }
            per_call.push(start.elapsed().as_secs_f64() / BLOCK as f64);
        }
    });
    if !sink.is_finite() {
        return Err(CliError::Numerical("non-finite network output".into()));
    }
    per_call.sort_by(f64::total_cmp);
    let mean = per_call.iter().sum::<f64>() / per_call.len() as f64;
    println!(
        "calls={} mean_ns={:.1} p50_ns={:.1} p99_ns={:.1} allocations={allocs}",
        blocks * BLOCK,
        mean * 1e9,
        percentile(&per_call, 0.5) * 1e9,
        percentile(&per_call, 0.99) * 1e9,
    );
    if allocs != 0 {
        return Err(CliError::Numerical(format!(
            "forward pass allocated {allocs} times in steady state"
        )));
    }
    Ok(())
}

pub fn dump_table(cfg: &RunConfig) -> Result<(), CliError> {
    let csv = active_table(cfg)?.to_csv_string();
    match &cfg.out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn eval(cfg: &RunConfig) -> Result<(), CliError> {
    let data = read_dataset(&cfg.dataset)?;
    let (_, test_set) = split(cfg, &data)?;
    let net_f1 = load_net(&cfg.weights_f1)?;
    let net_f2 = load_net(&cfg.weights_f2)?;
    let r1 = rmse(&net_f1, &test_set, Target::F1)?;
    let r2 = rmse(&net_f2, &test_set, Target::F2)?;
    if !(r1.is_finite() && r2.is_finite()) {
        return Err(CliError::Numerical("non-finite test error".into()));
    }
    println!(
        "test_samples={} rmse_f1={r1:e} rmse_f2={r2:e}",
        test_set.len()
    );
    Ok(())
}
