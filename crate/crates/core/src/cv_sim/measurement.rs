//! Sequential projective measurement of a context.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{GridSpec, Representation};
use super::observables::diagonal_representation;
use super::wavefunction::{StateRef, WaveFunction};
use crate::error::{Error, Result};
use crate::weyl_algebra::{ContextId, ObservableId};

/// Branches below this probability are dropped from exact outcome trees.
const BRANCH_CUTOFF: f64 = 1e-14;

/// One run of a context: three eigenphase outcomes and their product.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotRecord {
    pub shot: usize,
    pub context: ContextId,
    /// Observables in the order they were measured.
    pub order: [ObservableId; 3],
    /// Lattice classes `n` with eigenphase `2πn/N`, in measurement order.
    pub classes: [u32; 3],
    /// Eigenphases in `[0, 2π)`, in measurement order.
    pub thetas: [f64; 3],
    #[serde(serialize_with = "serialize_complex")]
    pub product: Complex64,
}

impl ShotRecord {
    /// Outcome class of `id`, if it was measured in this shot.
    pub fn class_of(&self, id: ObservableId) -> Option<u32> {
        self.order.iter().position(|o| *o == id).map(|i| self.classes[i])
    }
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn shot_rng(seed: u64, ctx: ContextId, shot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((ctx.index() as u64) << 56) | shot as u64);
    rng
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

/// Zeroes amplitudes outside `class` and renormalizes.
fn project(psi: &mut WaveFunction, classes: &[u32], class: u32) {
    for (a, c) in psi.amps_mut().iter_mut().zip(classes) {
        if *c != class {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    psi.renormalize();
}

/// Measurement plan for one observable given the representation the state
/// is in when it is reached.
struct Step {
    rep: Representation,
    classes: Vec<u32>,
}

fn plan(ctx: ContextId, order: [ObservableId; 3], start: Representation, grid: &GridSpec) -> [Step; 3] {
    let mut rep = start;
    order.map(|id| {
        let (r, map) = diagonal_representation(id, rep, Some(ctx), grid);
        rep = r;
        Step { rep: r, classes: map.classes() }
    })
}

fn check_order(ctx: ContextId, order: [ObservableId; 3]) -> Result<()> {
    let mut members = ctx.members();
    let mut sorted = order;
    members.sort();
    sorted.sort();
    if members != sorted {
        return Err(Error::UnknownContext(format!(
            "order {:?} is not a permutation of {ctx}",
            order.map(ObservableId::name)
        )));
    }
    Ok(())
}

/// Measures `ctx` in its natural member order; see [`measure_context_ordered`].
pub fn measure_context<'a>(
    state: impl Into<StateRef<'a>>,
    ctx: ContextId,
    shots: usize,
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    measure_context_ordered(state, ctx, ctx.members(), shots, seed)
}

/// Runs `shots` independent sequential Lüders measurements of the three
/// members of `ctx` in the given order.
///
/// Shot `i` draws from its own ChaCha8 stream derived from `seed`, the
/// context and `i`, so results do not depend on thread scheduling. For a
/// mixture the member is drawn first by weight.
pub fn measure_context_ordered<'a>(
    state: impl Into<StateRef<'a>>,
    ctx: ContextId,
    order: [ObservableId; 3],
    shots: usize,
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    check_order(ctx, order)?;
    let state = state.into();
    state.check_normalized()?;
    let grid = *state.grid();

    let mut weights = Vec::new();
    let mut prepared = Vec::new();
    state.for_each_member(|w, psi| {
        let steps = plan(ctx, order, psi.representation(), &grid);
        weights.push(w);
        prepared.push((psi.transform(steps[0].rep), steps));
    });

    let records = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = shot_rng(seed, ctx, shot);
            let member = if prepared.len() == 1 {
                0
            } else {
                sample_index(&weights, rng.random::<f64>())
            };
            let (start, steps) = &prepared[member];
            let mut psi = start.clone();
            let mut classes = [0u32; 3];
            for (i, step) in steps.iter().enumerate() {
                psi.transform_in_place(step.rep);
                let map_probs = {
                    let mut probs = vec![0.0; grid.n()];
                    for (a, c) in psi.amplitudes().iter().zip(&step.classes) {
                        probs[*c as usize] += a.norm_sqr();
                    }
                    probs
                };
                let class = sample_index(&map_probs, rng.random::<f64>()) as u32;
                project(&mut psi, &step.classes, class);
                classes[i] = class;
            }
            let thetas = classes.map(|c| grid.class_phase(c));
            let product = thetas
                .iter()
                .map(|t| Complex64::from_polar(1.0, *t))
                .fold(Complex64::new(1.0, 0.0), |acc, z| acc * z);
            ShotRecord {
                shot,
                context: ctx,
                order,
                classes,
                thetas,
                product,
            }
        })
        .collect();
    Ok(records)
}

/// Exact joint outcome distribution of a sequential measurement, keyed by
/// the classes of the context members in [`ContextId::members`] order.
pub fn outcome_distribution<'a>(
    state: impl Into<StateRef<'a>>,
    ctx: ContextId,
    order: [ObservableId; 3],
) -> Result<BTreeMap<[u32; 3], f64>> {
    check_order(ctx, order)?;
    let state = state.into();
    state.check_normalized()?;
    let grid = *state.grid();
    let members = ctx.members();
    let slot = order.map(|id| members.iter().position(|m| *m == id).expect("checked permutation"));
    let mut out = BTreeMap::new();
    state.for_each_member(|w, psi| {
        let steps = plan(ctx, order, psi.representation(), &grid);
        branch(psi.clone(), w, &steps, 0, [0; 3], &slot, &mut out);
    });
    Ok(out)
}

fn branch(
    mut psi: WaveFunction,
    weight: f64,
    steps: &[Step; 3],
    depth: usize,
    key: [u32; 3],
    slot: &[usize; 3],
    out: &mut BTreeMap<[u32; 3], f64>,
) {
    if depth == 3 {
        *out.entry(key).or_insert(0.0) += weight;
        return;
    }
    let step = &steps[depth];
    psi.transform_in_place(step.rep);
    let mut probs = vec![0.0; psi.grid().n()];
    for (a, c) in psi.amplitudes().iter().zip(&step.classes) {
        probs[*c as usize] += a.norm_sqr();
    }
    for (class, p) in probs.iter().enumerate() {
        if *p * weight < BRANCH_CUTOFF {
            continue;
        }
        let mut next = psi.clone();
        project(&mut next, &step.classes, class as u32);
        let mut k = key;
        k[slot[depth]] = class as u32;
        branch(next, weight * p, steps, depth + 1, k, slot, out);
    }
}

/// Per-class probabilities of one observable read off a shot log.
pub fn empirical_marginal(records: &[ShotRecord], id: ObservableId, n: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n];
    let mut total = 0.0;
    for r in records {
        if let Some(c) = r.class_of(id) {
            counts[c as usize] += 1.0;
            total += 1.0;
        }
    }
    if total > 0.0 {
        counts.iter_mut().for_each(|c| *c /= total);
    }
    counts
}

/// Summary of a shot log for one context.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotSummary {
    pub context: ContextId,
    pub shots: usize,
    pub expected_sign: i8,
    #[serde(serialize_with = "serialize_complex")]
    pub mean_product: Complex64,
    /// Largest `|product − sign|` over all shots.
    pub max_product_deviation: f64,
}

pub fn summarize_shots(ctx: ContextId, records: &[ShotRecord]) -> Result<ShotSummary> {
    if records.is_empty() {
        return Err(Error::NoShots);
    }
    let sign = Complex64::new(f64::from(ctx.sign()), 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for r in records {
        sum += r.product;
        worst = worst.max((r.product - sign).norm());
    }
    Ok(ShotSummary {
        context: ctx,
        shots: records.len(),
        expected_sign: ctx.sign(),
        mean_product: sum / records.len() as f64,
        max_product_deviation: worst,
    })
}

/// CSV shot log with columns
/// `shot,context,theta1,theta2,theta3,product_re,product_im`.
pub fn shots_csv(records: &[ShotRecord]) -> String {
    let mut out = String::from("shot,context,theta1,theta2,theta3,product_re,product_im\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.shot, r.context, r.thetas[0], r.thetas[1], r.thetas[2], r.product.re, r.product.im
        );
    }
    out
}
