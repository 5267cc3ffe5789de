use rand::Rng;

use super::model::{UrnCounts, UrnModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Counts of a (sub)sample split by urn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplitCounts {
    pub r1: u32,
    pub b1: u32,
    pub r2: u32,
    pub b2: u32,
}

impl SplitCounts {
    pub fn full(c: UrnCounts, model: &UrnModel) -> Self {
        let p = model.params();
        Self {
            r1: c.r1,
            b1: c.b1,
            r2: p.red - c.r1,
            b2: p.blue - c.b1,
        }
    }

    pub fn total(&self) -> u32 {
        self.r1 + self.b1 + self.r2 + self.b2
    }

    pub fn projected(&self) -> UrnCounts {
        UrnCounts::new(self.r1, self.b1)
    }

    fn slot(&mut self, c: Color, s: Side) -> &mut u32 {
        match (c, s) {
            (Color::Red, Side::Left) => &mut self.r1,
            (Color::Red, Side::Right) => &mut self.r2,
            (Color::Blue, Side::Left) => &mut self.b1,
            (Color::Blue, Side::Right) => &mut self.b2,
        }
    }

    pub fn get(&self, c: Color, s: Side) -> u32 {
        match (c, s) {
            (Color::Red, Side::Left) => self.r1,
            (Color::Red, Side::Right) => self.r2,
            (Color::Blue, Side::Left) => self.b1,
            (Color::Blue, Side::Right) => self.b2,
        }
    }

    pub fn take(&mut self, c: Color, s: Side) {
        let v = self.slot(c, s);
        debug_assert!(*v > 0);
        *v -= 1;
    }

    pub fn put(&mut self, c: Color, s: Side) {
        *self.slot(c, s) += 1;
    }

    /// Uniformly random ball of the sample, identified by colour and urn.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> (Color, Side) {
        let u = rng.random_range(0..self.total());
        if u < self.r1 {
            (Color::Red, Side::Left)
        } else if u < self.r1 + self.r2 {
            (Color::Red, Side::Right)
        } else if u < self.r1 + self.r2 + self.b1 {
            (Color::Blue, Side::Left)
        } else {
            (Color::Blue, Side::Right)
        }
    }
}

/// Probability that a ball of colour `c` joins the left urn given the other
/// balls `rest`, with the likelihood factor raised to `beta_energy`.
pub fn left_probability(model: &UrnModel, rest: &SplitCounts, c: Color, beta_energy: f64) -> f64 {
    let pr = model.params();
    let a = pr.alpha_beta;
    let (same_l, same_r) = match c {
        Color::Red => (rest.r1, rest.r2),
        Color::Blue => (rest.b1, rest.b2),
    };
    let n1 = (rest.r1 + rest.b1) as f64;
    let n2 = (rest.r2 + rest.b2) as f64;
    let ll = (same_l as f64 + a) / (n1 + 2.0 * a);
    let lr = (same_r as f64 + a) / (n2 + 2.0 * a);
    let (wl, wr) = if beta_energy == 1.0 {
        (pr.p * ll, (1.0 - pr.p) * lr)
    } else {
        (pr.p * ll.powf(beta_energy), (1.0 - pr.p) * lr.powf(beta_energy))
    };
    wl / (wl + wr)
}

/// Places one ball of colour `c` conditionally on `counts`.
#[inline]
pub fn assign_ball<R: Rng + ?Sized>(model: &UrnModel, counts: &mut SplitCounts, c: Color, beta_energy: f64, rng: &mut R) {
    let pl = left_probability(model, counts, c, beta_energy);
    let side = if rng.random::<f64>() < pl { Side::Left } else { Side::Right };
    counts.put(c, side);
}

/// One full-data Gibbs step: remove a uniformly random ball and reassign it.
/// `beta_energy = 1` is the ordinary sampler; smaller values flatten the
/// likelihood (the prior `p` is left untempered).
pub fn urn_gibbs_step<R: Rng + ?Sized>(counts: UrnCounts, model: &UrnModel, beta_energy: f64, rng: &mut R) -> UrnCounts {
    let mut s = SplitCounts::full(counts, model);
    let (c, side) = s.pick(rng);
    s.take(c, side);
    assign_ball(model, &mut s, c, beta_energy, rng);
    s.projected()
}

/// Exact one-step transition distribution of [`urn_gibbs_step`].
pub fn gibbs_transitions(counts: UrnCounts, model: &UrnModel, beta_energy: f64) -> Vec<(UrnCounts, f64)> {
    let s = SplitCounts::full(counts, model);
    let n = s.total() as f64;
    let mut out = Vec::with_capacity(8);
    for c in [Color::Red, Color::Blue] {
        for side in [Side::Left, Side::Right] {
            let k = s.get(c, side);
            if k == 0 {
                continue;
            }
            let mut rest = s;
            rest.take(c, side);
            let pl = left_probability(model, &rest, c, beta_energy);
            for (dest, q) in [(Side::Left, pl), (Side::Right, 1.0 - pl)] {
                let mut next = rest;
                next.put(c, dest);
                out.push((next.projected(), k as f64 / n * q));
            }
        }
    }
    out
}

/// Proposal of the block move: colour, source urn and number of balls moved.
fn block_move(counts: UrnCounts, model: &UrnModel, color: Color, from: Side, block: u32) -> Option<(UrnCounts, bool)> {
    let s = SplitCounts::full(counts, model);
    let m = block.min(s.get(color, from));
    if m == 0 {
        return None;
    }
    let to = match from {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    };
    let mut next = s;
    *next.slot(color, from) -= m;
    *next.slot(color, to) += m;
    // The reverse proposal moves min(block, count) back; it only undoes this
    // move when that number is again m.
    let reversible = block.min(next.get(color, to)) == m;
    Some((next.projected(), reversible))
}

fn colors(model: &UrnModel) -> Vec<Color> {
    let p = model.params();
    let mut cs = Vec::with_capacity(2);
    if p.red > 0 {
        cs.push(Color::Red);
    }
    if p.blue > 0 {
        cs.push(Color::Blue);
    }
    cs
}

/// Metropolis-Hastings move of up to `block` same-coloured balls from a
/// random urn to the other. The proposal is symmetric whenever the reverse
/// move exists, so the acceptance ratio is the ratio of joint probabilities.
pub fn anneal_stepsize_step<R: Rng + ?Sized>(counts: UrnCounts, model: &UrnModel, block: u32, rng: &mut R) -> UrnCounts {
    let block = block.max(1);
    let cs = colors(model);
    let color = cs[rng.random_range(0..cs.len())];
    let from = if rng.random::<bool>() { Side::Left } else { Side::Right };
    match block_move(counts, model, color, from, block) {
        Some((next, true)) => {
            let log_ratio = model.joint_log_prob(next) - model.joint_log_prob(counts);
            if log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp() {
                next
            } else {
                counts
            }
        }
        _ => counts,
    }
}

/// Exact one-step transition distribution of [`anneal_stepsize_step`].
pub fn stepsize_transitions(counts: UrnCounts, model: &UrnModel, block: u32) -> Vec<(UrnCounts, f64)> {
    let block = block.max(1);
    let cs = colors(model);
    let q = 1.0 / (2 * cs.len()) as f64;
    let mut out = Vec::new();
    let mut stay = 0.0;
    for &color in &cs {
        for from in [Side::Left, Side::Right] {
            match block_move(counts, model, color, from, block) {
                Some((next, true)) => {
                    let a = (model.joint_log_prob(next) - model.joint_log_prob(counts)).exp().min(1.0);
                    out.push((next, q * a));
                    stay += q * (1.0 - a);
                }
                _ => stay += q,
            }
        }
    }
    out.push((counts, stay));
    out
}

/// Growing, churning subsample of the balls. Unassigned balls are kept as a
/// red/blue pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UrnSubsample {
    pub assigned: SplitCounts,
    pub pool_red: u32,
    pub pool_blue: u32,
}

impl UrnSubsample {
    pub fn empty(model: &UrnModel) -> Self {
        let p = model.params();
        Self {
            assigned: SplitCounts::default(),
            pool_red: p.red,
            pool_blue: p.blue,
        }
    }

    pub fn full(counts: UrnCounts, model: &UrnModel) -> Self {
        Self {
            assigned: SplitCounts::full(counts, model),
            pool_red: 0,
            pool_blue: 0,
        }
    }

    pub fn remove_random<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let (c, s) = self.assigned.pick(rng);
        self.assigned.take(c, s);
        match c {
            Color::Red => self.pool_red += 1,
            Color::Blue => self.pool_blue += 1,
        }
    }

    pub fn assign_random<R: Rng + ?Sized>(&mut self, model: &UrnModel, rng: &mut R) {
        let pool = self.pool_red + self.pool_blue;
        let c = if rng.random_range(0..pool) < self.pool_red {
            self.pool_red -= 1;
            Color::Red
        } else {
            self.pool_blue -= 1;
            Color::Blue
        };
        assign_ball(model, &mut self.assigned, c, 1.0, rng);
    }

    pub fn is_complete(&self) -> bool {
        self.pool_red + self.pool_blue == 0
    }
}
