//! Seeded synthetic fight traces for desk testing.
//!
//! Two scripted players wander the stage, pick moves from a fixed pool and deal
//! damage when an attack completes in range. A round lasts until the clock runs out
//! or either HP reaches zero; rounds repeat until the requested duration is used up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{FrameSnapshot, LogEvent, PlayerState, RoundConfig, Side};

struct Move {
    id: &'static str,
    attack: bool,
    frames: u32,
    damage: i32,
    reach: f64,
    // Horizontal step per frame toward the opponent; negative retreats.
    step: f64,
}

const MOVES: &[Move] = &[
    Move { id: "STAND", attack: false, frames: 20, damage: 0, reach: 0.0, step: 0.0 },
    Move { id: "FORWARD_WALK", attack: false, frames: 30, damage: 0, reach: 0.0, step: 4.0 },
    Move { id: "DASH", attack: false, frames: 12, damage: 0, reach: 0.0, step: 10.0 },
    Move { id: "BACK_STEP", attack: false, frames: 15, damage: 0, reach: 0.0, step: -6.0 },
    Move { id: "CROUCH", attack: false, frames: 20, damage: 0, reach: 0.0, step: 0.0 },
    Move { id: "STAND_GUARD", attack: false, frames: 25, damage: 0, reach: 0.0, step: 0.0 },
    Move { id: "STAND_A", attack: true, frames: 14, damage: 5, reach: 120.0, step: 0.0 },
    Move { id: "STAND_B", attack: true, frames: 20, damage: 10, reach: 140.0, step: 0.0 },
    Move { id: "CROUCH_FB", attack: true, frames: 24, damage: 12, reach: 160.0, step: 0.0 },
    Move { id: "STAND_FA", attack: true, frames: 18, damage: 8, reach: 130.0, step: 1.0 },
    Move { id: "STAND_D_DF_FC", attack: true, frames: 60, damage: 40, reach: 900.0, step: 0.0 },
    Move { id: "STAND_F_D_DFB", attack: true, frames: 32, damage: 35, reach: 150.0, step: 2.0 },
    Move { id: "STAND_D_DB_BB", attack: true, frames: 30, damage: 30, reach: 200.0, step: 6.0 },
    Move { id: "STAND_D_DF_FB", attack: true, frames: 36, damage: 25, reach: 700.0, step: 0.0 },
];

pub fn move_pool() -> impl Iterator<Item = &'static str> {
    MOVES.iter().map(|m| m.id)
}

struct Fighter {
    hp: i32,
    x: f64,
    current: usize,
    left: u32,
}

impl Fighter {
    fn state(&self) -> PlayerState {
        let m = &MOVES[self.current];
        PlayerState::new(self.hp, self.x, m.id, m.attack)
    }
}

fn pick_move(rng: &mut ChaCha8Rng, gap: f64) -> usize {
    // Close players attack more often; distant ones mostly move.
    let attack_bias = if gap < 220.0 { 0.55 } else { 0.2 };
    let attacks: Vec<usize> = (0..MOVES.len()).filter(|&i| MOVES[i].attack).collect();
    let others: Vec<usize> = (0..MOVES.len()).filter(|&i| !MOVES[i].attack).collect();
    let pool = if rng.gen_bool(attack_bias) { &attacks } else { &others };
    pool[rng.gen_range(0..pool.len() as u32) as usize]
}

/// Generates `duration_s` seconds of frames at `config.fps`.
pub fn generate_trace(duration_s: f64, seed: u64, config: &RoundConfig) -> Vec<FrameSnapshot> {
    let total = (duration_s.max(0.0) * config.fps).round() as u64;
    let per_round = (config.round_duration_s * config.fps).floor() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::with_capacity(total as usize);
    let hp = config.initial_hp as i32;
    let center = config.stage_width / 2.0;

    let mut round_index = 0u32;
    let mut fighters = [
        Fighter { hp, x: center - 200.0, current: 0, left: 0 },
        Fighter { hp, x: center + 200.0, current: 0, left: 0 },
    ];
    let mut round_frame = 0u64;

    for frame_index in 0..total {
        for side in [Side::P1, Side::P2] {
            let me = side as usize;
            let gap = (fighters[0].x - fighters[1].x).abs();
            if fighters[me].left == 0 {
                fighters[me].current = pick_move(&mut rng, gap);
                fighters[me].left = MOVES[fighters[me].current].frames;
            }
            let other_x = fighters[1 - me].x;
            let f = &mut fighters[me];
            let m = &MOVES[f.current];
            let toward = if other_x >= f.x { 1.0 } else { -1.0 };
            f.x = (f.x + toward * m.step).clamp(0.0, config.stage_width);
            f.left -= 1;
        }
        // Attacks resolve on their final frame.
        for side in [Side::P1, Side::P2] {
            let me = side as usize;
            let m = &MOVES[fighters[me].current];
            let gap = (fighters[0].x - fighters[1].x).abs();
            if m.attack && fighters[me].left == 0 && gap <= m.reach && rng.gen_bool(0.7) {
                let target = &mut fighters[1 - me];
                target.hp = (target.hp - m.damage).max(0);
            }
        }

        frames.push(FrameSnapshot {
            frame_index,
            round_index,
            round_time_s: round_frame as f64 / config.fps,
            p1: fighters[0].state(),
            p2: fighters[1].state(),
        });

        round_frame += 1;
        let knocked_out = fighters.iter().any(|f| f.hp == 0);
        if knocked_out || round_frame >= per_round {
            round_index += 1;
            round_frame = 0;
            fighters = [
                Fighter { hp, x: center - 200.0, current: 0, left: 0 },
                Fighter { hp, x: center + 200.0, current: 0, left: 0 },
            ];
        }
    }
    frames
}

/// Wraps frames as a stream, inserting round markers.
pub fn to_events(frames: &[FrameSnapshot]) -> Vec<LogEvent> {
    let mut out = Vec::with_capacity(frames.len() + 4);
    let mut round = None;
    for f in frames {
        if round != Some(f.round_index) {
            round = Some(f.round_index);
            out.push(LogEvent::RoundStart {
                round_index: f.round_index,
            });
        }
        out.push(LogEvent::Frame(f.clone()));
    }
    out
}
