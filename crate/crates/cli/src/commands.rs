//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use vcot_core::actions::{ActionConfig, Lexicon};
use vcot_core::bandit::{Policy, SamplerConfig, StopThresholds};
use vcot_core::env::random_scenes;
use vcot_core::eval::{build_worlds, check_unique_ids, eval_exploration, trace_action_counts, Bench};
use vcot_core::io::{load_dataset, load_scenes, save_dataset, save_ppm, save_scenes, write_file, SceneEntry};
use vcot_core::metrics::{action_entropy, mean, render_table, rm_loss_std};
use vcot_core::model::{ImageRecord, NUM_STATES};
use vcot_core::rm::{load_weights, save_weights, train_rm, InferMode, InferenceTrace, LossWeights, TrainConfig};
use vcot_core::{Error, Result};

use crate::settings::Settings;
use crate::{Command, Thresholds};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenScenes { n, seed, out, ppm_dir } => gen_scenes(n, seed, &out, ppm_dir.as_deref()),
        Command::Sample {
            scenes,
            lexicon,
            policy,
            lambda,
            eps,
            w_gt,
            seed,
            thresholds,
            config,
            out,
        } => {
            let s = Settings::load(config.as_deref())?;
            let lex = load_lexicon(lexicon.as_deref())?;
            let cfg = sampler_config(&s, policy, lambda, eps, w_gt, &thresholds)?;
            let seed = s.pick(seed, "seed", 0)?;
            sample(&scenes, &lex, &cfg, seed, &out)
        }
        Command::TrainRm {
            data,
            beta,
            gamma,
            epochs,
            lr,
            batch_size,
            hidden,
            seed,
            config,
            out,
            loss_out,
        } => {
            let s = Settings::load(config.as_deref())?;
            let d = TrainConfig::default();
            let cfg = TrainConfig {
                loss: LossWeights {
                    beta: s.pick(beta, "beta", d.loss.beta)?,
                    gamma: s.pick(gamma, "gamma", d.loss.gamma)?,
                },
                epochs: s.pick(epochs, "epochs", d.epochs)?,
                lr: s.pick(lr, "lr", d.lr)?,
                batch_size: s.pick(batch_size, "batch-size", d.batch_size)?,
                hidden: s.pick(hidden, "hidden", d.hidden)?,
                init_scale: d.init_scale,
            };
            let seed = s.pick(seed, "seed", 0)?;
            train(&data, &cfg, seed, &out, loss_out.as_deref())
        }
        Command::Infer {
            rm,
            scenes,
            lexicon,
            mode,
            alpha,
            w_gt,
            seed,
            thresholds,
            config,
            trace_out,
        } => {
            let s = Settings::load(config.as_deref())?;
            let lex = load_lexicon(lexicon.as_deref())?;
            let thr = stop_thresholds(&s, &thresholds)?;
            let mode = s.pick(mode, "mode", "policy".to_string())?;
            let alpha = s.pick_opt(alpha, "alpha")?;
            let w_gt = s.pick(w_gt, "w-gt", SamplerConfig::default().w_gt)?;
            let seed = s.pick(seed, "seed", 0)?;
            infer(rm.as_deref(), &scenes, &lex, &mode, alpha, w_gt, seed, &thr, &trace_out)
        }
        Command::EvalExploration {
            scenes,
            lexicon,
            strategies,
            seeds,
            lambda,
            eps,
            w_gt,
            thresholds,
            config,
            report,
        } => {
            let s = Settings::load(config.as_deref())?;
            let lex = load_lexicon(lexicon.as_deref())?;
            let base = sampler_config(&s, None, lambda, eps, w_gt, &thresholds)?;
            let policies = split_list(&strategies)
                .map(|name| with_overrides(Policy::parse(name, policy_lambda(&base))?, &s, eps))
                .collect::<Result<Vec<_>>>()?;
            let seeds = split_list(&seeds)
                .map(|v| v.parse::<u64>().map_err(|e| Error::validation(format!("seed {v:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            explore(&scenes, &lex, &base, &policies, &seeds, &report)
        }
        Command::Inspect { data, limit } => inspect(&data, limit),
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty())
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon> {
    path.map_or_else(|| Ok(Lexicon::builtin()), Lexicon::load)
}

fn stop_thresholds(s: &Settings, t: &Thresholds) -> Result<StopThresholds> {
    let d = StopThresholds::default();
    let thr = StopThresholds {
        delta_s: s.pick(t.delta_s, "delta-s", d.delta_s)?,
        delta_r: s.pick(t.delta_r, "delta-r", d.delta_r)?,
        eps_r: s.pick(t.eps_r, "eps-r", d.eps_r)?,
        eps_p: s.pick(t.eps_p, "eps-p", d.eps_p)?,
        h_max: s.pick(t.h_max, "h-max", d.h_max)?,
        e_max: s.pick(t.e_max, "e-max", d.e_max)?,
    };
    thr.validate()?;
    Ok(thr)
}

fn policy_lambda(cfg: &SamplerConfig) -> f64 {
    match cfg.policy {
        Policy::Ucb { lambda } => lambda,
        _ => Policy::DEFAULT_LAMBDA,
    }
}

fn with_overrides(policy: Policy, s: &Settings, eps: Option<f64>) -> Result<Policy> {
    match policy {
        Policy::EpsGreedy { eps: default } => {
            let eps = s.pick(eps, "eps", default)?;
            if !(0.0..=1.0).contains(&eps) {
                return Err(Error::validation(format!("eps must lie in [0, 1], got {eps}")));
            }
            Ok(Policy::EpsGreedy { eps })
        }
        p => Ok(p),
    }
}

fn sampler_config(
    s: &Settings,
    policy: Option<String>,
    lambda: Option<f64>,
    eps: Option<f64>,
    w_gt: Option<f64>,
    t: &Thresholds,
) -> Result<SamplerConfig> {
    let d = SamplerConfig::default();
    let lambda = s.pick(lambda, "lambda", Policy::DEFAULT_LAMBDA)?;
    let name = s.pick(policy, "policy", "ucb".to_string())?;
    let policy = with_overrides(Policy::parse(&name, lambda)?, s, eps)?;
    let w_gt = s.pick(w_gt, "w-gt", d.w_gt)?;
    if !(0.0..=1.0).contains(&w_gt) {
        return Err(Error::validation(format!("w-gt must lie in [0, 1], got {w_gt}")));
    }
    Ok(SamplerConfig {
        policy,
        thresholds: stop_thresholds(s, t)?,
        w_gt,
        actions: d.actions,
    })
}

fn gen_scenes(n: usize, seed: u64, out: &Path, ppm_dir: Option<&Path>) -> Result<()> {
    let lex = Lexicon::builtin();
    let mut entries = Vec::with_capacity(n);
    for spec in random_scenes(n, seed, &lex) {
        let image = match ppm_dir {
            Some(dir) => {
                let (img, _) = vcot_core::env::gen_scene(&spec)?;
                let path = dir.join(format!("{}.ppm", spec.image_id));
                save_ppm(&path, &img)?;
                Some(path)
            }
            None => None,
        };
        entries.push(SceneEntry { spec, image });
    }
    save_scenes(out, &entries)?;
    println!("wrote {n} scenes to {}", out.display());
    Ok(())
}

fn bench_worlds(scenes: &Path, lex: &Lexicon, actions: &ActionConfig, seed: u64) -> Result<Vec<vcot_core::env::World>> {
    let entries = load_scenes(scenes)?;
    if entries.is_empty() {
        return Err(Error::validation(format!("{}: no scenes", scenes.display())));
    }
    let worlds = build_worlds(&entries, lex, actions, seed)?;
    check_unique_ids(&worlds)?;
    Ok(worlds)
}

fn sample(scenes: &Path, lex: &Lexicon, cfg: &SamplerConfig, seed: u64, out: &Path) -> Result<()> {
    let worlds = bench_worlds(scenes, lex, &cfg.actions, seed)?;
    let bench = Bench {
        worlds: &worlds,
        lexicon: lex,
        actions: &cfg.actions,
        w_gt: cfg.w_gt,
    };
    let mut records: Vec<ImageRecord> = bench.sample(cfg, seed).into_iter().map(|r| r.record).collect();
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    save_dataset(out, &records)?;
    let episodes: usize = records.iter().map(ImageRecord::budget).sum();
    let steps: usize = records.iter().map(ImageRecord::step_count).sum();
    let topk: Vec<f64> = records.iter().map(vcot_core::metrics::topk_at_stop).collect();
    println!(
        "{}: {} images, {episodes} trajectories, {steps} steps, mean Top-K@Stop {:.4}",
        cfg.policy.name(),
        records.len(),
        mean(&topk)
    );
    Ok(())
}

fn train(data: &Path, cfg: &TrainConfig, seed: u64, out: &Path, loss_out: Option<&Path>) -> Result<()> {
    let records = load_dataset(data)?;
    let trained = train_rm(&records, cfg, seed)?;
    save_weights(&trained.weights, out)?;
    if let Some(path) = loss_out {
        let json = serde_json::to_vec_pretty(&trained.loss_history).map_err(|e| Error::io(path, e.into()))?;
        write_file(path, &json)?;
    }
    let last = trained.loss_history.last().copied().unwrap_or(0.0);
    println!(
        "trained on {} images: final loss {last:.6}, tail loss std {:.6}",
        records.len(),
        rm_loss_std(&trained.loss_history)
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn infer(
    rm: Option<&Path>,
    scenes: &Path,
    lex: &Lexicon,
    mode: &str,
    alpha: Option<f64>,
    w_gt: f64,
    seed: u64,
    thr: &StopThresholds,
    trace_out: &Path,
) -> Result<()> {
    let actions = ActionConfig::default();
    let random = mode.trim().eq_ignore_ascii_case("random");
    let parsed = if random { None } else { Some(InferMode::parse(mode, alpha)?) };
    let weights = match (parsed, rm) {
        (Some(_), Some(path)) => Some(load_weights(path)?),
        (Some(_), None) => return Err(Error::validation("--rm is required unless --mode random")),
        (None, _) => None,
    };
    let worlds = bench_worlds(scenes, lex, &actions, seed)?;
    let bench = Bench {
        worlds: &worlds,
        lexicon: lex,
        actions: &actions,
        w_gt,
    };
    let mut traces = match (parsed, &weights) {
        (Some(m), Some(w)) => bench.infer(w, m, thr),
        _ => bench.infer_random(thr, seed),
    };
    traces.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let mut buf = Vec::new();
    for t in &traces {
        serde_json::to_writer(&mut buf, t).map_err(|e| Error::io(trace_out, e.into()))?;
        buf.push(b'\n');
    }
    write_file(trace_out, &buf)?;
    let name = parsed.map_or("random", |m| m.name());
    println!("{}", infer_summary(name, &traces));
    Ok(())
}

fn infer_summary(name: &str, traces: &[InferenceTrace]) -> String {
    let col = |f: fn(&InferenceTrace) -> Option<f64>| traces.iter().filter_map(f).collect::<Vec<_>>();
    let steps: Vec<f64> = traces.iter().map(|t| t.actions.len() as f64).collect();
    let failed = traces.iter().filter(|t| t.error.is_some()).count();
    format!(
        "{name}: {} images, mean final reward {:.4}, mean final iou {:.4} (initial {:.4}), mean steps {:.2}, action entropy {:.4}, detector failures {failed}",
        traces.len(),
        mean(&col(|t| t.final_reward)),
        mean(&col(|t| t.final_iou)),
        mean(&col(|t| t.initial_iou)),
        mean(&steps),
        action_entropy(&trace_action_counts(traces)),
    )
}

fn explore(
    scenes: &Path,
    lex: &Lexicon,
    base: &SamplerConfig,
    policies: &[Policy],
    seeds: &[u64],
    report: &Path,
) -> Result<()> {
    let entries = load_scenes(scenes)?;
    let rep = eval_exploration(&entries, lex, &base.actions, base, policies, seeds)?;
    let mut json = serde_json::to_vec_pretty(&rep).map_err(|e| Error::io(report, e.into()))?;
    json.push(b'\n');
    write_file(report, &json)?;
    print!("{}", render_table(&rep.summary));
    Ok(())
}

fn inspect(data: &Path, limit: Option<usize>) -> Result<()> {
    let records = load_dataset(data)?;
    let shown = limit.unwrap_or(records.len()).min(records.len());
    let mut out = String::new();
    for rec in &records[..shown] {
        let _ = writeln!(
            out,
            "image {}: {} trajectories, {} steps, Top-K@Stop {:.4}",
            rec.image_id,
            rec.budget(),
            rec.step_count(),
            vcot_core::metrics::topk_at_stop(rec)
        );
        for (i, t) in rec.trajectories.iter().enumerate() {
            let _ = write!(out, "  #{i:<3} mean {:.4} |", t.mean_reward());
            for s in &t.steps {
                let _ = write!(out, " a{} {:.3}", s.action.number(), s.reward);
            }
            if t.aborted {
                out.push_str(" [aborted]");
            }
            out.push('\n');
        }
        out.push_str("  posterior (row = from state, column = to state)\n");
        for (r, row) in rec.transition_posterior.iter().enumerate() {
            let _ = write!(out, "    s{r}");
            for v in row.iter().take(NUM_STATES) {
                let _ = write!(out, " {v:.3}");
            }
            out.push('\n');
        }
    }
    if shown < records.len() {
        let _ = writeln!(out, "... {} more images", records.len() - shown);
    }
    print!("{out}");
    Ok(())
}
