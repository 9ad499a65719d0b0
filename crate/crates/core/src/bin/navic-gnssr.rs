//! Command-line front end: scene simulation, two-channel acquisition, the
//! target table and the SNR sweep.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on data or parse
//! errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use navic_gnssr::acquisition::{AcquisitionResult, DEFAULT_THRESHOLD_DB};
use navic_gnssr::channel::{delay_samples_to_range_m, synthesize_scene_with, SceneOptions};
use navic_gnssr::experiments::{
    format_km, run_sweep, run_table1, snr_steps, sweep_csv, table1_csv, Receiver, DEFAULT_TABLE_SEED,
};
use navic_gnssr::io::{read_iq, save_ddm_csv, write_iq, write_report_csv, ReportRow};
use navic_gnssr::{CodeTable, Error, Result, ScenarioConfig};

#[derive(Parser)]
#[command(name = "navic-gnssr", version, about = "NavIC L5 passive reflectometry simulator and receiver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize DS and GRS captures from a scenario file
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_ds: PathBuf,
        #[arg(long)]
        out_grs: PathBuf,
        /// Code table (defaults to the built-in PRN 1-7 table)
        #[arg(long)]
        prn_table: Option<PathBuf>,
        /// Emulate an ADC of this word width
        #[arg(long)]
        quantize_bits: Option<u32>,
        /// Route both paths through the x8 interpolation and decimation chains
        #[arg(long)]
        full_chain: bool,
    },
    /// Coarse acquisition on a DS/GRS capture pair
    Acquire {
        #[arg(long)]
        ds: PathBuf,
        #[arg(long)]
        grs: PathBuf,
        #[arg(long)]
        prn_table: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_DB, allow_negative_numbers = true)]
        threshold_db: f64,
        /// Directory for the DS and GRS delay-Doppler map CSVs
        #[arg(long)]
        ddm_out: Option<PathBuf>,
        /// Report CSV (one row)
        #[arg(long)]
        report: Option<PathBuf>,
        /// Scenario file providing ground truth for the report row
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the three target-table scenarios
    Table1 {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TABLE_SEED)]
        seed: u64,
        #[arg(long)]
        prn_table: Option<PathBuf>,
    },
    /// Monte-Carlo detection-rate and RMSE sweep over SNR
    Sweep {
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        snr_from: f64,
        #[arg(long, default_value_t = -12.0, allow_negative_numbers = true)]
        snr_to: f64,
        #[arg(long, default_value_t = 1.0)]
        snr_step: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Per-trial report CSV
        #[arg(long)]
        trials_out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_DB, allow_negative_numbers = true)]
        threshold_db: f64,
    },
    /// Write the built-in code table
    PrnTable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_table(path: Option<&Path>) -> Result<CodeTable> {
    match path {
        Some(p) => CodeTable::from_file(p),
        None => Ok(CodeTable::default()),
    }
}

fn summary_line(channel: &str, r: &AcquisitionResult) -> String {
    format!(
        "{channel:<3} prn={} delay={} doppler={} Hz peak_to_floor={:.2} dB detected={}",
        r.prn_id, r.peak_delay_samples, r.peak_doppler_hz, r.peak_to_floor_db, r.detected
    )
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate {
            config,
            out_ds,
            out_grs,
            prn_table,
            quantize_bits,
            full_chain,
        } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let code = load_table(prn_table.as_deref())?.generate(cfg.prn_id)?;
            let (mut ds, mut grs) = synthesize_scene_with(&cfg, &code, SceneOptions { full_chain })?;
            if let Some(bits) = quantize_bits {
                ds = ds.quantize(bits)?;
                grs = grs.quantize(bits)?;
            }
            write_iq(&out_ds, &ds)?;
            write_iq(&out_grs, &grs)?;
            println!(
                "wrote {} samples at {} Hz per channel (prn={} k_d={} k_gr={} f_d={} f_gr={} snr_db={})",
                ds.len(),
                ds.sample_rate_hz(),
                cfg.prn_id,
                cfg.k_d,
                cfg.k_gr,
                cfg.f_d,
                cfg.f_gr,
                cfg.snr_db
            );
        }
        Command::Acquire {
            ds,
            grs,
            prn_table,
            threshold_db,
            ddm_out,
            report,
            config,
        } => {
            let receiver = Receiver::from_table(&load_table(prn_table.as_deref())?)?.with_threshold(threshold_db);
            let truth = config.as_deref().map(ScenarioConfig::from_file).transpose()?;
            let ds = read_iq(&ds)?;
            let grs = read_iq(&grs)?;
            let out = receiver.process(&ds, &grs)?;
            println!("{}", summary_line("DS", &out.ds));
            println!("{}", summary_line("GRS", &out.grs));
            if out.detected() {
                println!("range_offset={} m", out.estimate.range_offset_m);
            }
            if let Some(dir) = ddm_out {
                fs::create_dir_all(&dir)?;
                save_ddm_csv(&dir.join(format!("ddm_ds_prn{}.csv", out.ds.prn_id)), &out.ds_ddm)?;
                save_ddm_csv(&dir.join(format!("ddm_grs_prn{}.csv", out.grs.prn_id)), &out.grs_ddm)?;
            }
            if let Some(path) = report {
                let row = ReportRow {
                    snr_db: truth.as_ref().map(|t| t.snr_db),
                    truth_range_m: truth
                        .as_ref()
                        .map(|t| delay_samples_to_range_m(t.k_gr - t.k_d, t.sample_rate_hz)),
                    est_range_m: out.estimate.range_offset_m,
                    truth_f_d: truth.as_ref().map(|t| t.f_d),
                    est_f_d: out.estimate.doppler_ds_hz,
                    truth_f_gr: truth.as_ref().map(|t| t.f_gr),
                    est_f_gr: out.estimate.doppler_grs_hz,
                    detected: out.detected(),
                };
                write_report_csv(fs::File::create(path)?, &[row])?;
            }
        }
        Command::Table1 { out, seed, prn_table } => {
            let receiver = Receiver::from_table(&load_table(prn_table.as_deref())?)?;
            let reports = run_table1(&receiver, seed)?;
            fs::write(&out, table1_csv(&reports))?;
            for r in &reports {
                println!(
                    "snr={} dB range={} km f_d={} Hz f_gr={} Hz detected={}",
                    r.scenario.snr_db,
                    format_km(r.estimate.range_offset_m),
                    r.estimate.doppler_ds_hz,
                    r.estimate.doppler_grs_hz,
                    r.detected
                );
            }
        }
        Command::Sweep {
            snr_from,
            snr_to,
            snr_step,
            trials,
            seed,
            out,
            trials_out,
            threshold_db,
        } => {
            let receiver = Receiver::from_table(&CodeTable::default())?.with_threshold(threshold_db);
            let code = receiver.code(2).cloned().ok_or_else(|| Error::Config("no PRN 2".into()))?;
            let snrs = snr_steps(snr_from, snr_to, snr_step)?;
            let (points, reports) = run_sweep(&receiver, &code, &snrs, trials, seed)?;
            fs::write(&out, sweep_csv(&points))?;
            if let Some(path) = trials_out {
                let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
                write_report_csv(fs::File::create(path)?, &rows)?;
            }
            for p in &points {
                println!(
                    "snr={} dB detection_rate={:.2} rmse_range={:.1} m rmse_doppler={:.1} Hz",
                    p.snr_db, p.summary.detection_rate, p.summary.rmse_range_m, p.summary.rmse_doppler_hz
                );
            }
        }
        Command::PrnTable { out } => {
            let text = CodeTable::default().to_text();
            match out {
                Some(p) => fs::write(p, text)?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
}
