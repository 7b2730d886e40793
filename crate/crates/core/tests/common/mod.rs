#![allow(dead_code)]

use hypecast_core::game::{FrameSnapshot, LogEvent, PlayerState};
use hypecast_core::phonetics::PhoneticParams;
use hypecast_core::scheduler::{estimate_duration, CommentaryDirective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ACTIONS: [(&str, bool); 8] = [
    ("STAND_D_DF_FC", true),
    ("STAND_F_D_DFB", true),
    ("STAND_D_DB_BB", true),
    ("STAND_D_DF_FB", true),
    ("STAND_A", true),
    ("CROUCH_FB", true),
    ("FORWARD_WALK", false),
    ("STAND", false),
];

/// Random valid frames grouped into rounds of random length, in stream order.
pub fn random_frames(count: usize, seed: u64) -> Vec<FrameSnapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut round = 0u32;
    let mut left_in_round = 0usize;
    let mut t = 0.0f64;
    for i in 0..count {
        if left_in_round == 0 {
            if i > 0 {
                round += 1;
            }
            left_in_round = rng.gen_range(1..200);
            t = 0.0;
        }
        left_in_round -= 1;
        t = (t + rng.gen_range(0.0..0.6)).min(60.0);
        let mut player = || {
            let (id, attack) = ACTIONS[rng.gen_range(0..ACTIONS.len())];
            // The attack flag is occasionally wrong for ranked moves.
            let attack = if rng.gen_bool(0.1) { !attack } else { attack };
            let x = if rng.gen_bool(0.05) { 480.0 } else { rng.gen_range(0.0..=960.0) };
            PlayerState::new(rng.gen_range(0..=200), x, id, attack)
        };
        let p1 = player();
        let mut p2 = player();
        if rng.gen_bool(0.02) {
            p2.x_pos = p1.x_pos;
        }
        out.push(FrameSnapshot {
            frame_index: i as u64,
            round_index: round,
            round_time_s: t,
            p1,
            p2,
        });
    }
    out
}

/// Straight-line evaluation of the cue formulas with equal or given weights, written
/// without any library code. Returns (score, action, distance, highlight) per frame.
pub fn oracle_cues(frames: &[FrameSnapshot], weights: (f64, f64, f64)) -> Vec<[f64; 4]> {
    let ranked = ["STAND_D_DF_FC", "STAND_F_D_DFB", "STAND_D_DB_BB", "STAND_D_DF_FB"];
    let action_of = |id: &str, attack: bool| -> f64 {
        for (k, name) in ranked.iter().enumerate() {
            if *name == id {
                let mut p = 1.0;
                for _ in 0..=k {
                    p /= 2.0;
                }
                return 0.5 + p;
            }
        }
        if attack {
            0.5
        } else {
            0.0
        }
    };
    let mut out = Vec::with_capacity(frames.len());
    let mut running_max = 0.0f64;
    let mut current_round = None;
    for f in frames {
        if current_round != Some(f.round_index) {
            current_round = Some(f.round_index);
            running_max = 0.0;
        }
        let lost = (200.0 - 0.5 * (f.p1.hp as f64 + f.p2.hp as f64)) / 200.0;
        let score = (f.round_time_s / 60.0) * lost;
        let a1 = action_of(&f.p1.action_id, f.p1.is_attack);
        let a2 = action_of(&f.p2.action_id, f.p2.is_attack);
        let action = if a1 > a2 { a1 } else { a2 };
        let gap = (f.p1.x_pos - f.p2.x_pos).abs();
        if gap > running_max {
            running_max = gap;
        }
        let distance = if running_max == 0.0 { 1.0 } else { 1.0 - gap / running_max };
        let highlight = weights.0 * score + weights.1 * action + weights.2 * distance;
        out.push([score, action, distance, highlight]);
    }
    out
}

/// Speaking intervals on a continuous timeline: each round starts where the previous
/// round's last frame left off.
pub fn speaking_intervals(events: &[LogEvent], script: &[CommentaryDirective]) -> Vec<(f64, f64)> {
    let mut round_offset = std::collections::BTreeMap::new();
    let mut offset = 0.0;
    let mut last_t = 0.0;
    let mut first = true;
    for e in events {
        match e {
            LogEvent::RoundStart { round_index } => {
                if !first {
                    offset += last_t;
                }
                first = false;
                round_offset.insert(*round_index, offset);
            }
            LogEvent::Frame(f) => last_t = f.round_time_s,
        }
    }
    script
        .iter()
        .map(|d| {
            let start = round_offset[&d.round_index] + d.round_time_s;
            (start, start + estimate_duration(&d.text))
        })
        .collect()
}

/// Brute-force pairwise check that no two half-open intervals intersect. Touching
/// intervals may differ by rounding once rounds are laid end to end, hence the slack.
pub fn any_overlap(intervals: &[(f64, f64)]) -> Option<(usize, usize)> {
    const SLACK: f64 = 1e-9;
    for i in 0..intervals.len() {
        for j in i + 1..intervals.len() {
            let (a, b) = (intervals[i], intervals[j]);
            if a.0 < b.1 - SLACK && b.0 < a.1 - SLACK {
                return Some((i, j));
            }
        }
    }
    None
}

/// Directive with phonetics zeroed, for comparing scripts across designs.
pub fn strip_phonetics(d: &CommentaryDirective) -> CommentaryDirective {
    CommentaryDirective {
        phonetics: PhoneticParams {
            pitch: 0.0,
            volume_gain_db: 0.0,
        },
        design: hypecast_core::DesignId::D1,
        ..d.clone()
    }
}
