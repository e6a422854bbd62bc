#![allow(dead_code)]

//! Boundary checks for the six stopping rules. Each check returns a
//! description of the first violation.

use vcot_core::bandit::stop::{image_stop_reason, traj_stop_reason, ImageStop, StopThresholds, TrajStop};
use vcot_core::model::{StateId, TransitionMatrix, WeakUnit, FEATURE_DIM, FEAT_MAX_SCORE};

pub type Check = Result<(), String>;

fn unit(max_score: f64) -> WeakUnit {
    let mut features = [0.0; FEATURE_DIM];
    features[FEAT_MAX_SCORE] = max_score;
    WeakUnit {
        state: StateId::INITIAL,
        features,
    }
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Check {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

/// Values just below, at and above `x`, walking `n` ulps each way.
fn around(x: f64, n: usize) -> Vec<f64> {
    let mut v = vec![x];
    let (mut lo, mut hi) = (x, x);
    for _ in 0..n {
        lo = lo.next_down();
        hi = hi.next_up();
        v.push(lo);
        v.push(hi);
    }
    v
}

const FAR: f64 = 0.5;

pub fn context_stable() -> Check {
    let thr = StopThresholds::default();
    let z = unit(0.0);
    for d in around(thr.delta_s, 64) {
        let got = traj_stop_reason(&z, &unit(d), 0.0, FAR, 1, &thr);
        let dist = z.context_distance(&unit(d));
        let want = (dist < thr.delta_s).then_some(TrajStop::ContextStable);
        expect(&format!("distance {d:e}"), got, want)?;
    }
    expect("at delta_s", traj_stop_reason(&z, &unit(0.02), 0.0, FAR, 1, &thr), None)?;
    expect(
        "just below delta_s",
        traj_stop_reason(&z, &unit(0.02f64.next_down()), 0.0, FAR, 1, &thr),
        Some(TrajStop::ContextStable),
    )?;
    expect("identical units", traj_stop_reason(&z, &z, 0.0, FAR, 1, &thr), Some(TrajStop::ContextStable))
}

pub fn reward_stable() -> Check {
    let thr = StopThresholds::default();
    let (a, b) = (unit(0.0), unit(FAR));
    for d in around(thr.delta_r, 64) {
        for (prev, cur) in [(0.0, d), (d, 0.0)] {
            let want = ((cur - prev).abs() < thr.delta_r).then_some(TrajStop::RewardStable);
            expect(&format!("|dr| {d:e}"), traj_stop_reason(&a, &b, prev, cur, 1, &thr), want)?;
        }
    }
    expect("at delta_r", traj_stop_reason(&a, &b, 0.0, 1e-3, 1, &thr), None)?;
    expect("5e-4", traj_stop_reason(&a, &b, 0.0, 5e-4, 1, &thr), Some(TrajStop::RewardStable))?;
    expect("large change", traj_stop_reason(&a, &b, 0.0, 0.3, 2, &thr), None)
}

pub fn step_limit() -> Check {
    let thr = StopThresholds::default();
    let (a, b) = (unit(0.0), unit(FAR));
    for t in 0..=64 {
        let want = (t >= 7).then_some(TrajStop::StepLimit);
        expect(&format!("t = {t}"), traj_stop_reason(&a, &b, 0.0, FAR, t, &thr), want)?;
    }
    for h_max in 1..=16 {
        let thr = StopThresholds { h_max, ..thr };
        expect("below limit", traj_stop_reason(&a, &b, 0.0, FAR, h_max - 1, &thr), None)?;
        expect("at limit", traj_stop_reason(&a, &b, 0.0, FAR, h_max, &thr), Some(TrajStop::StepLimit))?;
    }
    Ok(())
}

fn matrix(entry: f64) -> TransitionMatrix {
    let mut m = [[0.0; 8]; 8];
    m[1][1] = entry;
    m
}

pub fn reward_converged() -> Check {
    let thr = StopThresholds::default();
    let (p0, p1) = (matrix(0.0), matrix(FAR));
    // With two episodes [0, x] the running mean moves by x / 2.
    for x in around(2.0 * thr.eps_r, 64) {
        let want = (x / 2.0 < thr.eps_r).then_some(ImageStop::RewardConverged);
        expect(&format!("x = {x:e}"), image_stop_reason(&[0.0, x], &p0, &p1, 2, &thr), want)?;
    }
    expect("at eps_r", image_stop_reason(&[0.0, 2e-3], &p0, &p1, 2, &thr), None)?;
    expect("one episode", image_stop_reason(&[0.7], &p0, &p1, 1, &thr), None)?;
    expect(
        "repeated reward",
        image_stop_reason(&[0.2, 0.6, 0.4], &p0, &p1, 3, &thr),
        Some(ImageStop::RewardConverged),
    )
}

pub fn posterior_converged() -> Check {
    let thr = StopThresholds::default();
    let rewards = [0.0, 1.0];
    for d in around(thr.eps_p, 64) {
        let want = (d < thr.eps_p).then_some(ImageStop::PosteriorConverged);
        expect(&format!("delta {d:e}"), image_stop_reason(&rewards, &matrix(0.0), &matrix(d), 2, &thr), want)?;
    }
    expect("at eps_p", image_stop_reason(&rewards, &matrix(0.0), &matrix(1e-3), 2, &thr), None)?;
    expect(
        "identical posteriors",
        image_stop_reason(&rewards, &matrix(0.3), &matrix(0.3), 2, &thr),
        Some(ImageStop::PosteriorConverged),
    )
}

pub fn episode_limit() -> Check {
    let thr = StopThresholds::default();
    let (p0, p1) = (matrix(0.0), matrix(FAR));
    for e in 1..=200usize {
        // Alternating rewards keep the running mean moving by at least 1/(2e).
        let rewards: Vec<f64> = (0..e).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 }).collect();
        let want = (e >= 50).then_some(ImageStop::EpisodeLimit);
        expect(&format!("episode {e}"), image_stop_reason(&rewards, &p0, &p1, e, &thr), want)?;
    }
    for e_max in 1..=16 {
        let thr = StopThresholds { e_max, ..thr };
        expect("below", image_stop_reason(&[], &p0, &p1, e_max - 1, &thr), None)?;
        expect("at", image_stop_reason(&[], &p0, &p1, e_max, &thr), Some(ImageStop::EpisodeLimit))?;
    }
    Ok(())
}

pub const ALL: [(&str, fn() -> Check); 6] = [
    ("context stabilisation", context_stable),
    ("reward stabilisation", reward_stable),
    ("step limit", step_limit),
    ("mean reward convergence", reward_converged),
    ("posterior convergence", posterior_converged),
    ("episode limit", episode_limit),
];
