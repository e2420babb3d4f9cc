#![allow(dead_code)]

use neorl_core::harness::{RewardTrace, TRACE_HEADER};
use neorl_core::{Action, EnvParams, EnvState, ObjectColor, ObjectState, StepEvent, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent re-derivation of one object's free flight with wall bounces.
fn predict(obj: &ObjectState, lo: Vec2, hi: Vec2) -> ObjectState {
    fn axis(x: f64, v: f64, lo: f64, hi: f64) -> (f64, f64) {
        let x = x + v;
        if x < lo {
            ((2.0 * lo - x).min(hi), -v)
        } else if x > hi {
            ((2.0 * hi - x).max(lo), -v)
        } else {
            (x, v)
        }
    }
    let (px, vx) = axis(obj.position.x, obj.velocity.x, lo.x, hi.x);
    let (py, vy) = axis(obj.position.y, obj.velocity.y, lo.y, hi.y);
    ObjectState {
        position: Vec2::new(px, py),
        velocity: Vec2::new(vx, vy),
        color: obj.color,
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FuzzStats {
    pub steps: u64,
    pub greens: u64,
    pub reds: u64,
    pub resets: u64,
    pub bounces: u64,
}

/// How the fuzz run picks actions.
#[derive(Debug, Clone, Copy)]
pub enum Script {
    Uniform,
    /// Hold one action for long stretches, pinning the agent to walls.
    Sticky,
    /// Walk through every action in turn, `k` steps each.
    Cycle(u64),
}

/// Step a fresh environment and check every per-step invariant. Returns the
/// first violation as an error message.
pub fn fuzz(params: EnvParams, seed: u64, steps: u64, script: Script) -> Result<FuzzStats, String> {
    let mut env = EnvState::new(params.clone(), seed).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF022);
    let count = params.object_count;
    let lo = Vec2::new(params.object_radius, params.object_radius);
    let hi = Vec2::new(params.arena_width - params.object_radius, params.arena_height - params.object_radius);
    let reach = params.agent_radius + params.object_radius;
    let mut stats = FuzzStats::default();
    let mut held = Action::North;

    for t in 0..steps {
        let action = match script {
            Script::Uniform => Action::ALL[rng.gen_range(0..4)],
            Script::Sticky => {
                if rng.gen_bool(0.002) {
                    held = Action::ALL[rng.gen_range(0..4)];
                }
                held
            }
            Script::Cycle(k) => Action::ALL[((t / k) % 4) as usize],
        };
        let before = env.objects.clone();
        let result = env.step(action);
        let agent = env.agent_position;
        stats.steps += 1;

        if env.objects.len() != count {
            return Err(format!("step {t}: {} objects, expected {count}", env.objects.len()));
        }
        let predicted: Vec<_> = before.iter().map(|o| predict(o, lo, hi)).collect();
        let captured: Vec<bool> = predicted.iter().map(|o| o.position.distance(agent) < reach).collect();
        let greens = (0..count).filter(|&i| captured[i] && predicted[i].color == ObjectColor::Green).count();
        let reds = (0..count).filter(|&i| captured[i] && predicted[i].color == ObjectColor::Red).count();
        let greens_left = (0..count).any(|i| !captured[i] && predicted[i].color == ObjectColor::Green);
        let reset = greens > 0 && !greens_left;

        if result.greens() != greens || result.reds() != reds {
            return Err(format!(
                "step {t}: events report {}g/{}r, geometry says {greens}g/{reds}r",
                result.greens(),
                result.reds()
            ));
        }
        if result.reward != greens as f64 - reds as f64 {
            return Err(format!("step {t}: reward {} != {greens} - {reds}", result.reward));
        }
        if result.board_reset() != reset {
            return Err(format!("step {t}: reset event {} expected {reset}", result.board_reset()));
        }
        if result.events.iter().filter(|e| **e == StepEvent::BoardReset).count() > 1 {
            return Err(format!("step {t}: duplicate reset event"));
        }
        for i in 0..count {
            if captured[i] || reset {
                continue;
            }
            let (p, o, b) = (&predicted[i], &env.objects[i], &before[i]);
            if p.position != o.position || p.velocity != o.velocity {
                return Err(format!("step {t}: object {i} left its free-flight path"));
            }
            let drift = (o.velocity.norm() - b.velocity.norm()).abs();
            if drift > 1e-12 {
                return Err(format!("step {t}: object {i} speed changed by {drift:e}"));
            }
            if o.velocity != b.velocity {
                stats.bounces += 1;
            }
            if o.position.x < lo.x || o.position.x > hi.x || o.position.y < lo.y || o.position.y > hi.y {
                return Err(format!("step {t}: object {i} outside the arena"));
            }
        }
        stats.greens += greens as u64;
        stats.reds += reds as u64;
        stats.resets += u64::from(reset);
    }
    Ok(stats)
}

/// Parse one per-seed trace CSV back into (run_id, step, accumulated).
pub fn parse_trace(text: &str) -> Vec<(u64, u64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    lines
        .map(|l| {
            let f: Vec<_> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

pub fn trace_bytes(trace: &RewardTrace, steps_per_second: f64) -> Vec<u8> {
    let mut buf = Vec::new();
    neorl_core::harness::write_trace_csv(&mut buf, trace, steps_per_second).unwrap();
    buf
}
