//! `locomanip`: batch driver for the loco-manipulation planner.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use locomanip::fmt::sig9;
use locomanip::fr_planner::Solution;
use locomanip::pipeline::{
    build_maps, first_solution_expansions, load_maps, replan, run_pipeline, save_maps, search_path,
    PipelineRun,
};
use locomanip::reachability::write_heatmap_csv;
use locomanip::scenario_io::{
    load_delta, load_result, load_scenario, save_result, write_sidecars, Scenario,
};
use locomanip::svg::{top_view, zmp_plot};
use locomanip::traj_sketch::sketch;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "locomanip",
    version,
    about = "Plan object transport by a walking robot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate reachability maps for both hands.
    GenRmap {
        #[command(flatten)]
        common: Common,
    },
    /// Run object path, footstep and regrasp search, and the dynamics sketch.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Directory written by gen-rmap; maps are generated when omitted.
        #[arg(long)]
        maps: Option<PathBuf>,
    },
    /// Repair a stored plan after an obstacle change.
    Replan {
        /// Result document of an earlier plan run.
        #[arg(long)]
        result: PathBuf,
        /// Obstacle delta file (`remove = [...]`, `[[add]]` tables).
        #[arg(long)]
        delta: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        maps: Option<PathBuf>,
    },
    /// Final footstep count at a fixed budget for several action-set sizes.
    SweepActions {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,50,100")]
        counts: Vec<usize>,
    },
    /// Expansions to the first solution with and without the nominal-pose term.
    AblateHeuristic {
        #[command(flatten)]
        common: Common,
        /// Further scenarios to include in the comparison table.
        #[arg(long = "also")]
        also: Vec<PathBuf>,
    },
    /// Dynamics sketch of a stored plan.
    Sketch {
        #[arg(long)]
        result: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Only the first N footsteps.
        #[arg(long)]
        steps: Option<usize>,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Object path planner budget in seconds.
    #[arg(long)]
    budget_op: Option<f64>,
    /// Footstep search budget in seconds.
    #[arg(long)]
    budget_fr: Option<f64>,
    #[arg(long)]
    epsilon_init: Option<f64>,
    #[arg(long)]
    epsilon_decay: Option<f64>,
    /// Number of footstep actions.
    #[arg(long)]
    actions: Option<usize>,
    #[arg(long)]
    no_nominal_heuristic: bool,
    #[arg(long)]
    no_step_cost: bool,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = load_scenario(&self.scenario)?;
        if let Some(v) = self.seed {
            s.op.rng_seed = v;
        }
        if let Some(v) = self.budget_op {
            s.op.time_budget = positive("--budget-op", v)?;
        }
        if let Some(v) = self.budget_fr {
            s.fr.time_budget = positive("--budget-fr", v)?;
        }
        if let Some(v) = self.epsilon_init {
            s.fr.epsilon_init = v;
        }
        if let Some(v) = self.epsilon_decay {
            s.fr.epsilon_decay = v;
        }
        if let Some(v) = self.actions {
            s.n_actions = v;
        }
        if self.no_nominal_heuristic {
            s.fr.w_nominal = 0.0;
        }
        if self.no_step_cost {
            s.fr.c_step = 0.0;
        }
        s.fr.validate().map_err(anyhow::Error::msg)?;
        Ok(s)
    }
}

fn positive(flag: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bail!("{flag} must be positive, got {v}")
    }
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).with_context(|| format!("cannot create {}", p.display()))
}

fn write(p: &Path, body: &str) -> Result<()> {
    std::fs::write(p, body).with_context(|| format!("cannot write {}", p.display()))
}

fn print_solution(s: &Solution) {
    println!(
        "  eps {:>8.3}  cost {:>9.4}  steps {:>4}  regrasps {:>3}  expansions {:>8}  t {:.3} s",
        s.epsilon, s.cost, s.steps, s.regrasps, s.expansions, s.elapsed
    );
}

fn finish(run: &PipelineRun, out: &Path) -> Result<bool> {
    let doc = &run.doc;
    save_result(&out.join("result.json"), doc)?;
    write_sidecars(out, doc, run.sketch.as_ref())?;
    write(&out.join("top_view.svg"), &top_view(doc))?;
    if let (Some(sk), Some(plan)) = (&run.sketch, &doc.plan) {
        let c = &doc.scenario.sketch;
        write(
            &out.join("zmp.svg"),
            &zmp_plot(&plan.footsteps, sk, c.foot_length, c.foot_width),
        )?;
    }
    println!("stage      status    seconds");
    for st in &doc.stages {
        let status = format!("{:?}", st.status).to_lowercase();
        println!("{:<10} {:<9} {:>8.3}", st.name, status, st.seconds);
        if let Some(m) = &st.message {
            println!("  {m}");
        }
    }
    if let Some(p) = &doc.plan {
        println!(
            "plan: cost {} at eps {}, {} footsteps, {} regrasps",
            sig9(p.cost),
            sig9(p.epsilon),
            p.steps,
            p.regrasps
        );
    }
    if let Some(r) = &doc.replan {
        println!(
            "repair: {} states changed, {} expansions, {:.3} s",
            r.changed_states, r.expansions, r.elapsed
        );
    }
    if let Some(sk) = &doc.sketch {
        println!(
            "sketch: ZMP tracking rms {:.4} m, worst support margin {:.4} m",
            sk.tracking_rms, sk.worst_margin
        );
    }
    println!("wrote {}", out.join("result.json").display());
    Ok(doc.succeeded())
}

fn gen_rmap(common: &Common) -> Result<bool> {
    let s = common.scenario()?;
    create_dir(&common.out)?;
    let t = Instant::now();
    let maps = build_maps(&s)?;
    let secs = t.elapsed().as_secs_f64();
    let files = save_maps(&common.out, &maps)?;
    let mut empty = 0;
    for (hm, name) in [(&maps.left, "left"), (&maps.right, "right")] {
        for (i, m) in hm.maps().iter().enumerate() {
            let cells = m.count();
            if cells == 0 {
                empty += 1;
            }
            let label = match m.rolled_distance {
                Some(d) => format!("{name}[{i}] d = {d:.4} m"),
                None => name.to_string(),
            };
            println!(
                "{label}: {cells} of {} cells reachable",
                m.spec.cell_count()
            );
            write_heatmap_csv(m, &common.out.join(format!("{name}_{i:02}_heatmap.csv")))?;
        }
    }
    println!(
        "{} maps generated in {secs:.3} s into {}",
        files.len(),
        common.out.display()
    );
    if empty > 0 {
        eprintln!("warning: {empty} maps have no reachable cells");
    }
    Ok(true)
}

fn plan(common: &Common, maps_dir: Option<&Path>) -> Result<bool> {
    let s = common.scenario()?;
    create_dir(&common.out)?;
    let maps = maps_dir.map(|d| load_maps(d, &s)).transpose()?;
    println!("planning {} (seed {})", s.name, s.op.rng_seed);
    let run = run_pipeline(&s, maps, print_solution);
    finish(&run, &common.out)
}

fn replan_cmd(result: &Path, delta: &Path, out: &Path, maps_dir: Option<&Path>) -> Result<bool> {
    let prev = load_result(result)?;
    let delta = load_delta(delta)?;
    create_dir(out)?;
    let maps = maps_dir.map(|d| load_maps(d, &prev.scenario)).transpose()?;
    let run = replan(&prev, &delta, maps, print_solution).map_err(anyhow::Error::msg)?;
    finish(&run, out)
}

/// Runs only the footstep search on the scenario's object path.
fn object_path(s: &Scenario) -> Result<locomanip::se2::DiscretePath> {
    Ok(locomanip::pipeline::object_path(s)
        .map_err(anyhow::Error::msg)?
        .path)
}

fn sweep_actions(common: &Common, counts: &[usize]) -> Result<bool> {
    let base = common.scenario()?;
    create_dir(&common.out)?;
    let path = object_path(&base)?;
    let mut csv = String::from("n_actions,steps,cost,epsilon,expansions,regrasps\n");
    println!("n_actions  steps  cost       eps      expansions");
    let mut ok = true;
    for &n in counts {
        let mut s = base.clone();
        s.n_actions = n;
        let (search, r) = search_path(&s, &path).map_err(anyhow::Error::msg)?;
        match (r, search.best()) {
            (_, Some(b)) => {
                println!(
                    "{n:>9}  {:>5}  {:>9.4}  {:>7.3}  {:>10}",
                    b.steps,
                    b.cost,
                    b.epsilon,
                    search.stats().expansions
                );
                csv.push_str(&format!(
                    "{n},{},{},{},{},{}\n",
                    b.steps,
                    sig9(b.cost),
                    sig9(b.epsilon),
                    search.stats().expansions,
                    b.regrasps
                ));
            }
            (Err(e), None) => {
                ok = false;
                println!("{n:>9}  no solution: {e}");
                csv.push_str(&format!("{n},,,,{},\n", search.stats().expansions));
            }
            (Ok(_), None) => unreachable!("a successful run has a best solution"),
        }
    }
    write(&common.out.join("sweep_actions.csv"), &csv)?;
    Ok(ok)
}

fn ablate(common: &Common, also: &[PathBuf]) -> Result<bool> {
    create_dir(&common.out)?;
    let mut csv = String::from("scenario,with_nominal,without_nominal,ratio\n");
    println!("scenario            with     without   ratio");
    let mut ok = true;
    let mut scenarios = vec![common.scenario()?];
    for p in also {
        let mut c = common.clone();
        c.scenario = p.clone();
        scenarios.push(c.scenario()?);
    }
    for s in scenarios {
        let path = object_path(&s)?;
        let with = first_solution_expansions(&s, &path).map_err(anyhow::Error::msg)?;
        let mut off = s.clone();
        off.fr.w_nominal = 0.0;
        let without = first_solution_expansions(&off, &path).map_err(anyhow::Error::msg)?;
        let (w, wo) = match (with, without) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                ok = false;
                println!("{:<18} no first solution within budget", s.name);
                continue;
            }
        };
        let ratio = wo as f64 / w.max(1) as f64;
        println!("{:<18} {w:>8} {wo:>10} {ratio:>7.2}", s.name);
        csv.push_str(&format!("{},{w},{wo},{}\n", s.name, sig9(ratio)));
    }
    write(&common.out.join("ablate_heuristic.csv"), &csv)?;
    Ok(ok)
}

fn sketch_cmd(result: &Path, out: &Path, steps: Option<usize>) -> Result<bool> {
    let doc = load_result(result)?;
    let Some(plan) = &doc.plan else {
        bail!("{} holds no footstep plan", result.display());
    };
    create_dir(out)?;
    let fp = match steps {
        Some(n) => plan.footsteps.truncated(n),
        None => plan.footsteps.clone(),
    };
    let c = &doc.scenario.sketch;
    let sk = sketch(&fp, c)?;
    write(
        &out.join("sketch.csv"),
        &locomanip::traj_sketch::sketch_csv(&sk),
    )?;
    write(
        &out.join("zmp.svg"),
        &zmp_plot(&fp, &sk, c.foot_length, c.foot_width),
    )?;
    println!(
        "{} footsteps, {} samples: tracking rms {:.4} m, worst margin {:.4} m at t = {:.3} s",
        fp.steps.len(),
        sk.zmp.samples.len(),
        sk.tracking_rms,
        sk.support.worst_margin,
        sk.support.worst_time
    );
    for ph in sk.support.phases.iter().filter(|p| !p.pass) {
        println!(
            "  step {} {:?}: margin {:.4} m",
            ph.step, ph.kind, ph.min_margin
        );
    }
    Ok(sk.support.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::GenRmap { common } => gen_rmap(common),
        Command::Plan { common, maps } => plan(common, maps.as_deref()),
        Command::Replan {
            result,
            delta,
            out,
            maps,
        } => replan_cmd(result, delta, out, maps.as_deref()),
        Command::SweepActions { common, counts } => sweep_actions(common, counts),
        Command::AblateHeuristic { common, also } => ablate(common, also),
        Command::Sketch { result, out, steps } => sketch_cmd(result, out, *steps),
    };
    match r {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
