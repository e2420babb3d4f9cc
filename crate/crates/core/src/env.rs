//! A deterministic, seedable WaterWorld: an agent accelerating in the four
//! cardinal directions among drifting circular objects. Green objects are
//! worth `+1`, red objects `-1`. Capturing the last green object on the board
//! respawns every remaining object.

use crate::action::Action;
use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Rejection-sampling budget when looking for a free spawn location.
const MAX_SPAWN_ATTEMPTS: usize = 10_000;

/// Physical constants of the arena. Units are arena lengths and steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    pub arena_width: f64,
    pub arena_height: f64,
    pub agent_radius: f64,
    pub object_radius: f64,
    pub object_count: usize,
    pub accel_per_step: f64,
    pub velocity_damping: f64,
    /// Per-axis object speed magnitude interval `[lo, hi]`.
    pub object_speed_range: [f64; 2],
    pub green_probability: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            arena_width: 1.0,
            arena_height: 1.0,
            agent_radius: 0.03,
            object_radius: 0.03,
            object_count: 3,
            accel_per_step: 0.012,
            velocity_damping: 0.975,
            object_speed_range: [0.001, 0.005],
            green_probability: 0.5,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and > 0, got {v}")))
            }
        }
        positive("arena_width", self.arena_width)?;
        positive("arena_height", self.arena_height)?;
        positive("agent_radius", self.agent_radius)?;
        positive("object_radius", self.object_radius)?;
        if self.object_count == 0 {
            return Err(Error::config("object_count", "must be at least 1"));
        }
        if !(self.accel_per_step.is_finite() && self.accel_per_step >= 0.0) {
            return Err(Error::config("accel_per_step", "must be finite and >= 0"));
        }
        if !(self.velocity_damping > 0.0 && self.velocity_damping <= 1.0) {
            return Err(Error::config("velocity_damping", "must lie in (0, 1]"));
        }
        let [lo, hi] = self.object_speed_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::config("object_speed_range", "need 0 <= lo <= hi"));
        }
        if !(0.0..=1.0).contains(&self.green_probability) {
            return Err(Error::config("green_probability", "must lie in [0, 1]"));
        }
        let diameter = 2.0 * self.agent_radius.max(self.object_radius);
        if diameter >= self.arena_width.min(self.arena_height) {
            return Err(Error::config("agent_radius", "bodies do not fit in the arena"));
        }
        Ok(())
    }

    pub fn bounds(&self) -> Rect {
        Rect::sized(self.arena_width, self.arena_height)
    }

    fn inset(&self, r: f64) -> Rect {
        Rect::new(
            Vec2::new(r, r),
            Vec2::new(self.arena_width - r, self.arena_height - r),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectColor {
    Green,
    Red,
}

impl ObjectColor {
    /// Reward on capture, also the valence the agent attaches to the object.
    pub fn valence(self) -> f64 {
        match self {
            ObjectColor::Green => 1.0,
            ObjectColor::Red => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub color: ObjectColor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepEvent {
    CapturedGreen,
    CapturedRed,
    BoardReset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Sum of capture valences this step.
    pub reward: f64,
    pub events: Vec<StepEvent>,
}

impl StepResult {
    pub fn greens(&self) -> usize {
        self.events.iter().filter(|e| **e == StepEvent::CapturedGreen).count()
    }

    pub fn reds(&self) -> usize {
        self.events.iter().filter(|e| **e == StepEvent::CapturedRed).count()
    }

    pub fn board_reset(&self) -> bool {
        self.events.contains(&StepEvent::BoardReset)
    }
}

/// Read-only snapshot handed to agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub agent_position: Vec2,
    pub agent_velocity: Vec2,
    pub objects: Vec<ObjectState>,
}

/// Full simulator state, including its generator.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    params: EnvParams,
    pub agent_position: Vec2,
    pub agent_velocity: Vec2,
    pub objects: Vec<ObjectState>,
    rng: ChaCha8Rng,
    pub step_counter: u64,
}

impl EnvState {
    /// Agent at the arena center at rest; objects at non-overlapping random spots.
    pub fn new(params: EnvParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut env = Self {
            agent_position: params.bounds().center(),
            agent_velocity: Vec2::ZERO,
            objects: Vec::with_capacity(params.object_count),
            rng: ChaCha8Rng::seed_from_u64(seed),
            step_counter: 0,
            params,
        };
        for _ in 0..env.params.object_count {
            let obj = env.sample_object(true);
            env.objects.push(obj);
        }
        Ok(env)
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn observe(&self) -> Observation {
        Observation {
            agent_position: self.agent_position,
            agent_velocity: self.agent_velocity,
            objects: self.objects.clone(),
        }
    }

    /// Advance one step under `action`.
    pub fn step(&mut self, action: Action) -> StepResult {
        let p = &self.params;

        self.agent_velocity = self.agent_velocity * p.velocity_damping + action.unit() * p.accel_per_step;
        let mut pos = self.agent_position + self.agent_velocity;
        let walls = p.inset(p.agent_radius);
        if pos.x < walls.min.x || pos.x > walls.max.x {
            pos.x = pos.x.clamp(walls.min.x, walls.max.x);
            self.agent_velocity.x = 0.0;
        }
        if pos.y < walls.min.y || pos.y > walls.max.y {
            pos.y = pos.y.clamp(walls.min.y, walls.max.y);
            self.agent_velocity.y = 0.0;
        }
        self.agent_position = pos;

        let walls = p.inset(p.object_radius);
        for obj in &mut self.objects {
            obj.position = obj.position + obj.velocity;
            reflect(&mut obj.position.x, &mut obj.velocity.x, walls.min.x, walls.max.x);
            reflect(&mut obj.position.y, &mut obj.velocity.y, walls.min.y, walls.max.y);
        }

        let reach = p.agent_radius + p.object_radius;
        let captured: Vec<usize> = (0..self.objects.len())
            .filter(|&i| self.objects[i].position.distance(self.agent_position) < reach)
            .collect();

        let mut reward = 0.0;
        let mut events = Vec::with_capacity(captured.len() + 1);
        let mut green_captured = false;
        for &i in &captured {
            let color = self.objects[i].color;
            reward += color.valence();
            green_captured |= color == ObjectColor::Green;
            events.push(match color {
                ObjectColor::Green => StepEvent::CapturedGreen,
                ObjectColor::Red => StepEvent::CapturedRed,
            });
        }
        let greens_left = (0..self.objects.len())
            .filter(|i| !captured.contains(i))
            .any(|i| self.objects[i].color == ObjectColor::Green);

        for &i in &captured {
            self.objects[i] = self.sample_object(false);
        }
        if green_captured && !greens_left {
            for i in 0..self.objects.len() {
                if !captured.contains(&i) {
                    self.objects[i] = self.sample_object(false);
                }
            }
            events.push(StepEvent::BoardReset);
        }

        self.step_counter += 1;
        StepResult { reward, events }
    }

    /// Fresh object clear of the agent (and, on initial placement, of the
    /// objects already placed).
    fn sample_object(&mut self, avoid_objects: bool) -> ObjectState {
        let p = &self.params;
        let area = p.inset(p.object_radius);
        let agent_clearance = p.agent_radius + p.object_radius;
        let object_clearance = 2.0 * p.object_radius;
        let mut position = area.center();
        for _ in 0..MAX_SPAWN_ATTEMPTS {
            position = Vec2::new(
                self.rng.gen_range(area.min.x..=area.max.x),
                self.rng.gen_range(area.min.y..=area.max.y),
            );
            let clear_of_agent = position.distance(self.agent_position) >= agent_clearance;
            let clear_of_objects = !avoid_objects
                || self
                    .objects
                    .iter()
                    .all(|o| o.position.distance(position) >= object_clearance);
            if clear_of_agent && clear_of_objects {
                break;
            }
        }
        let [lo, hi] = p.object_speed_range;
        let axis_speed = |rng: &mut ChaCha8Rng| {
            let magnitude = rng.gen_range(lo..=hi);
            if rng.gen_bool(0.5) {
                magnitude
            } else {
                -magnitude
            }
        };
        let velocity = Vec2::new(axis_speed(&mut self.rng), axis_speed(&mut self.rng));
        let color = if self.rng.gen_bool(p.green_probability) {
            ObjectColor::Green
        } else {
            ObjectColor::Red
        };
        ObjectState {
            position,
            velocity,
            color,
        }
    }
}

/// Mirror a coordinate back into `[lo, hi]`, negating the velocity component.
fn reflect(x: &mut f64, v: &mut f64, lo: f64, hi: f64) {
    if *x < lo {
        *x = (2.0 * lo - *x).min(hi);
        *v = -*v;
    } else if *x > hi {
        *x = (2.0 * hi - *x).max(lo);
        *v = -*v;
    }
}
