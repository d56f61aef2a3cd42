//! Finite-state simulator of the annealed evolutionary chain.
//!
//! A [`Landscape`] is a finite solution space with an objective `f` to minimize
//! and a symmetric neighbor relation. Each individual carries its current state
//! `g` and the best state seen so far `g_b`. One iteration picks a parent, draws
//! offspring uniformly from the parent's neighbors, keeps the best, and adopts it
//! under the Metropolis rule. The trainer maximizes fitness `F`; here `f = −F`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::ops::Range;

use rand::Rng;

use crate::annealing::{self, AnnealState};
use crate::error::{Error, Result};
use crate::seeding::{self, Stream};

/// Finite solution space with objective values and a neighbor graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    values: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl Landscape {
    /// Validates size, finiteness, neighbor symmetry and connectivity.
    pub fn new(values: Vec<f64>, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::argument("a landscape needs at least two states"));
        }
        if neighbors.len() != n {
            return Err(Error::argument(format!("{n} values but {} neighbor lists", neighbors.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("objective value of state {i}")));
        }
        let mut neighbors = neighbors;
        for (i, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.is_empty() {
                return Err(Error::argument(format!("state {i} has no neighbors")));
            }
            if let Some(&j) = list.iter().find(|&&j| j >= n || j == i) {
                return Err(Error::argument(format!("state {i} lists invalid neighbor {j}")));
            }
        }
        for (i, list) in neighbors.iter().enumerate() {
            if let Some(&j) = list.iter().find(|&&j| neighbors[j].binary_search(&i).is_err()) {
                return Err(Error::argument(format!("neighbor relation {i}-{j} is not symmetric")));
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::argument(format!("state {i} is unreachable from state 0")));
        }
        Ok(Self { values, neighbors })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn f(&self, state: usize) -> f64 {
        self.values[state]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn neighbors(&self, state: usize) -> &[usize] {
        &self.neighbors[state]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Every state attaining the minimum, by exhaustive scan.
    pub fn global_minima(&self) -> Vec<usize> {
        let min = self.min_value();
        (0..self.len()).filter(|&i| self.values[i] == min).collect()
    }

    /// States `0..n` on a path.
    pub fn line(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let neighbors = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        Self::new(values, neighbors)
    }

    /// States on a cycle.
    pub fn ring(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let neighbors = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
        Self::new(values, neighbors)
    }

    /// State 0 is the center; every other state is a leaf attached to it.
    pub fn star(center: f64, leaves: &[f64]) -> Result<Self> {
        let mut values = vec![center];
        values.extend_from_slice(leaves);
        let n = values.len();
        let mut neighbors = vec![(1..n).collect::<Vec<_>>()];
        neighbors.extend((1..n).map(|_| vec![0]));
        Self::new(values, neighbors)
    }

    /// Cycle plus antipodal chords, with `f ~ U[0,1)`.
    pub fn rugged(n: usize, seed: u64) -> Result<Self> {
        let mut rng = seeding::stream(seed, n as u64, "theory/rugged");
        let values = (0..n).map(|_| rng.random::<f64>()).collect();
        let neighbors = (0..n)
            .map(|i| {
                let mut v = vec![(i + n - 1) % n, (i + 1) % n];
                if n >= 4 {
                    v.push((i + n / 2) % n);
                }
                v
            })
            .collect();
        Self::new(values, neighbors)
    }

    /// Cycle with a wide funnel leading to a local minimum and, on the opposite
    /// side, a narrow global minimum fenced by high barrier states.
    pub fn trap(n: usize, seed: u64) -> Result<Self> {
        if n < 8 {
            return Err(Error::argument("a trap landscape needs at least 8 states"));
        }
        let mut rng = seeding::stream(seed, n as u64, "theory/trap");
        let optimum = rng.random_range(0..n);
        let trap = (optimum + n / 2) % n;
        let ring_dist = |a: usize, b: usize| {
            let d = a.abs_diff(b);
            d.min(n - d)
        };
        let half = (n / 2) as f64;
        let values = (0..n)
            .map(|i| {
                let d_opt = ring_dist(i, optimum);
                if d_opt == 0 {
                    0.0
                } else if d_opt <= 2 {
                    0.9 + 0.1 * rng.random::<f64>()
                } else {
                    0.2 + 0.5 * ring_dist(i, trap) as f64 / half + 0.02 * rng.random::<f64>()
                }
            })
            .collect();
        Self::ring(values)
    }

    /// `state,f,neighbors` with `;`-separated neighbor indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,f,neighbors\n");
        for i in 0..self.len() {
            let nb: Vec<String> = self.neighbors[i].iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{i},{:.17e},{}", self.values[i], nb.join(";"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "state,f,neighbors" => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "expected header `state,f,neighbors`".into(),
                })
            }
        }
        let mut rows: BTreeMap<usize, (f64, Vec<usize>)> = BTreeMap::new();
        for (idx, line) in lines {
            let err = |m: String| Error::Parse {
                line: idx + 1,
                message: m,
            };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(err(format!("expected 3 columns, found {}", cols.len())));
            }
            let state = cols[0].parse::<usize>().map_err(|_| err(format!("bad state `{}`", cols[0])))?;
            let f = cols[1].parse::<f64>().map_err(|_| err(format!("bad value `{}`", cols[1])))?;
            let nb = cols[2]
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().parse::<usize>().map_err(|_| err(format!("bad neighbor `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            if rows.insert(state, (f, nb)).is_some() {
                return Err(err(format!("state {state} listed twice")));
            }
        }
        if rows.keys().copied().ne(0..rows.len()) {
            return Err(Error::argument("states must be numbered 0..n without gaps"));
        }
        let (values, neighbors) = rows.into_values().unzip();
        Self::new(values, neighbors)
    }
}

/// Which member of `[g, g_b]` breeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentRule {
    Current,
    Elite,
}

/// How a worse best-offspring is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptanceRule {
    Metropolis,
    /// Only improvements (or ties) are adopted.
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_offspring: usize,
    pub t_init: f64,
    pub alpha: f64,
    pub parent: ParentRule,
    pub acceptance: AcceptanceRule,
    pub budget: usize,
    pub seed: u64,
    /// Initial state; drawn uniformly when absent.
    pub start: Option<usize>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_offspring: 3,
            t_init: 1.0,
            alpha: 0.999,
            parent: ParentRule::Current,
            acceptance: AcceptanceRule::Metropolis,
            budget: 5000,
            seed: 0,
            start: None,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self, land: &Landscape) -> Result<()> {
        if self.n_offspring == 0 {
            return Err(Error::argument("n_offspring must be at least 1"));
        }
        AnnealState::new(self.t_init, self.alpha)?;
        if let Some(s) = self.start.filter(|&s| s >= land.len()) {
            return Err(Error::argument(format!("start state {s} is outside the landscape")));
        }
        Ok(())
    }
}

/// `[g, g_b]` at iteration `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainState {
    pub g: usize,
    pub g_b: usize,
    pub iteration: usize,
}

impl ChainState {
    pub fn new(start: usize) -> Self {
        Self {
            g: start,
            g_b: start,
            iteration: 0,
        }
    }
}

/// Record of one chain transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub temperature: f64,
    pub g_cbest: usize,
    pub delta: f64,
    pub probability: f64,
    pub draw: f64,
    pub accepted: bool,
}

/// Best of `n_offspring` uniform neighbor draws (with replacement) of the parent.
/// Ties go to the lowest state index.
pub fn f_gen<R: Rng + ?Sized>(chain: &ChainState, land: &Landscape, cfg: &ChainConfig, rng: &mut R) -> usize {
    let parent = match cfg.parent {
        ParentRule::Current => chain.g,
        ParentRule::Elite => chain.g_b,
    };
    let nb = land.neighbors(parent);
    let mut best = nb[rng.random_range(0..nb.len())];
    for _ in 1..cfg.n_offspring {
        let c = nb[rng.random_range(0..nb.len())];
        let (fc, fb) = (land.f(c), land.f(best));
        if fc < fb || (fc == fb && c < best) {
            best = c;
        }
    }
    best
}

/// Metropolis adoption of `g_cbest` and strict-improvement elite update.
pub fn f_upd<R: Rng + ?Sized>(
    chain: &ChainState,
    land: &Landscape,
    g_cbest: usize,
    temperature: f64,
    rule: AcceptanceRule,
    rng: &mut R,
) -> Result<(ChainState, StepDecision)> {
    let (f_g, f_c) = (land.f(chain.g), land.f(g_cbest));
    // Fitness is −f.
    let d = annealing::metropolis(-f_g, -f_c, temperature, rng)?;
    let accepted = match rule {
        AcceptanceRule::Metropolis => d.accepted,
        AcceptanceRule::Greedy => f_c <= f_g,
    };
    let next = ChainState {
        g: if accepted { g_cbest } else { chain.g },
        g_b: if f_c < land.f(chain.g_b) { g_cbest } else { chain.g_b },
        iteration: chain.iteration + 1,
    };
    Ok((
        next,
        StepDecision {
            temperature,
            g_cbest,
            delta: d.delta,
            probability: if rule == AcceptanceRule::Greedy { (accepted as u8) as f64 } else { d.probability },
            draw: d.draw,
            accepted,
        },
    ))
}

/// States visited (`states[0]` is the start) and the decisions between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<ChainState>,
    pub decisions: Vec<StepDecision>,
}

fn chain_stream(cfg: &ChainConfig) -> Stream {
    seeding::stream(cfg.seed, 0, "theory/chain")
}

fn start_state(land: &Landscape, cfg: &ChainConfig, rng: &mut Stream) -> ChainState {
    ChainState::new(cfg.start.unwrap_or_else(|| rng.random_range(0..land.len())))
}

/// Iterates `F = F_upd ∘ F_gen` for `cfg.budget` steps with geometric cooling.
pub fn run_chain(land: &Landscape, cfg: &ChainConfig) -> Result<Trajectory> {
    cfg.validate(land)?;
    let mut rng = chain_stream(cfg);
    let mut state = start_state(land, cfg, &mut rng);
    let mut anneal = AnnealState::new(cfg.t_init, cfg.alpha)?;
    let mut states = Vec::with_capacity(cfg.budget + 1);
    let mut decisions = Vec::with_capacity(cfg.budget);
    states.push(state);
    for _ in 0..cfg.budget {
        let cbest = f_gen(&state, land, cfg, &mut rng);
        let (next, d) = f_upd(&state, land, cbest, anneal.temperature(), cfg.acceptance, &mut rng)?;
        anneal = anneal.cool();
        state = next;
        states.push(state);
        decisions.push(d);
    }
    Ok(Trajectory { states, decisions })
}

/// First iteration at which the elite sits on a global minimum, if any within budget.
/// Consumes the random stream exactly like [`run_chain`].
pub fn first_hit(land: &Landscape, cfg: &ChainConfig) -> Result<Option<usize>> {
    cfg.validate(land)?;
    let min = land.min_value();
    let mut rng = chain_stream(cfg);
    let mut state = start_state(land, cfg, &mut rng);
    let mut anneal = AnnealState::new(cfg.t_init, cfg.alpha)?;
    if land.f(state.g_b) == min {
        return Ok(Some(0));
    }
    for n in 1..=cfg.budget {
        let cbest = f_gen(&state, land, cfg, &mut rng);
        state = f_upd(&state, land, cbest, anneal.temperature(), cfg.acceptance, &mut rng)?.0;
        anneal = anneal.cool();
        if land.f(state.g_b) == min {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Result of [`check_monotone`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotoneCheck {
    pub monotone: bool,
    /// Index of the first state whose elite value exceeds its predecessor's.
    pub first_violation: Option<usize>,
}

/// Whether `f(g_b)` never increases along `states`.
pub fn check_monotone(land: &Landscape, states: &[ChainState]) -> MonotoneCheck {
    let first_violation = states
        .windows(2)
        .position(|w| land.f(w[1].g_b) > land.f(w[0].g_b))
        .map(|i| i + 1);
    MonotoneCheck {
        monotone: first_violation.is_none(),
        first_violation,
    }
}

type Pair = (usize, usize);
type Kernel = BTreeMap<Pair, BTreeMap<Pair, u64>>;

/// Total-variation distance between the kernels of one source pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistance {
    pub source: Pair,
    pub count_a: u64,
    pub count_b: u64,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    /// Largest distance over compared pairs; NaN when nothing could be compared.
    pub max_tv: f64,
    pub compared: Vec<PairDistance>,
    /// Source pairs seen in a window but lacking `min_count` samples in one of them.
    pub excluded: Vec<Pair>,
    pub samples_a: u64,
    pub samples_b: u64,
}

fn tv_distance(a: &BTreeMap<Pair, u64>, b: &BTreeMap<Pair, u64>) -> f64 {
    let (na, nb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    let keys: BTreeSet<&Pair> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let pa = a.get(k).copied().unwrap_or(0) as f64 / na;
            let pb = b.get(k).copied().unwrap_or(0) as f64 / nb;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

/// Estimates the one-step kernel on `(g, g_b)` pairs over two iteration windows
/// by pooling independent chains, and compares the estimates per source pair.
/// Transitions counted for iteration `t` go from state `t` to state `t + 1`.
pub fn check_homogeneity(
    land: &Landscape,
    cfg: &ChainConfig,
    window_a: Range<usize>,
    window_b: Range<usize>,
    samples_per_window: usize,
    min_count: u64,
) -> Result<HomogeneityReport> {
    let len = window_a.len().min(window_b.len());
    if len == 0 {
        return Err(Error::argument("homogeneity windows must be non-empty"));
    }
    let chains = samples_per_window.div_ceil(len);
    let budget = window_a.end.max(window_b.end);
    let mut kernels: [Kernel; 2] = [Kernel::new(), Kernel::new()];
    for c in 0..chains {
        let run_cfg = ChainConfig {
            budget,
            seed: seeding::derive_seed(cfg.seed, c as u64, "theory/homogeneity"),
            ..cfg.clone()
        };
        let traj = run_chain(land, &run_cfg)?;
        for (k, window) in [&window_a, &window_b].into_iter().enumerate() {
            for t in window.clone() {
                let (s, n) = (traj.states[t], traj.states[t + 1]);
                *kernels[k]
                    .entry((s.g, s.g_b))
                    .or_default()
                    .entry((n.g, n.g_b))
                    .or_default() += 1;
            }
        }
    }
    let count = |k: &Kernel, p: &Pair| k.get(p).map_or(0, |m| m.values().sum::<u64>());
    let sources: BTreeSet<Pair> = kernels[0].keys().chain(kernels[1].keys()).copied().collect();
    let mut compared = Vec::new();
    let mut excluded = Vec::new();
    for p in sources {
        let (ca, cb) = (count(&kernels[0], &p), count(&kernels[1], &p));
        if ca < min_count || cb < min_count {
            excluded.push(p);
            continue;
        }
        compared.push(PairDistance {
            source: p,
            count_a: ca,
            count_b: cb,
            tv: tv_distance(&kernels[0][&p], &kernels[1][&p]),
        });
    }
    let max_tv = compared
        .iter()
        .map(|d| d.tv)
        .fold(f64::NAN, |m, v| if m.is_nan() || v > m { v } else { m });
    Ok(HomogeneityReport {
        max_tv,
        compared,
        excluded,
        samples_a: kernels[0].values().flat_map(|m| m.values()).sum(),
        samples_b: kernels[1].values().flat_map(|m| m.values()).sum(),
    })
}

/// Monte-Carlo estimate of the probability that the elite reaches a global
/// minimum within the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct HitEstimate {
    pub runs: usize,
    pub hits: usize,
    pub fraction: f64,
    pub std_error: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// First hitting iteration of each run.
    pub first_hits: Vec<Option<usize>>,
}

impl HitEstimate {
    fn from_first_hits(first_hits: Vec<Option<usize>>, budget: usize) -> Self {
        let runs = first_hits.len();
        let hits = first_hits.iter().filter(|h| h.is_some_and(|n| n <= budget)).count();
        let p = if runs == 0 { 0.0 } else { hits as f64 / runs as f64 };
        let n = runs.max(1) as f64;
        let z = 1.959_963_984_540_054;
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        Self {
            runs,
            hits,
            fraction: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            ci_low: (centre - half).max(0.0),
            ci_high: (centre + half).min(1.0),
            first_hits,
        }
    }

    /// The estimate that a smaller budget would have produced on the same runs.
    pub fn at_budget(&self, budget: usize) -> HitEstimate {
        let clipped = self
            .first_hits
            .iter()
            .map(|h| h.filter(|&n| n <= budget))
            .collect();
        Self::from_first_hits(clipped, budget)
    }
}

/// Seed of run `index` in a hit-probability campaign.
pub fn run_seed(cfg: &ChainConfig, index: usize) -> u64 {
    seeding::derive_seed(cfg.seed, index as u64, "theory/run")
}

pub fn estimate_hit_probability(land: &Landscape, cfg: &ChainConfig, n_runs: usize) -> Result<HitEstimate> {
    let first_hits = (0..n_runs)
        .map(|i| {
            let run_cfg = ChainConfig {
                seed: run_seed(cfg, i),
                ..cfg.clone()
            };
            first_hit(land, &run_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HitEstimate::from_first_hits(first_hits, cfg.budget))
}

/// One-sided sign-test p-value: `P(X ≥ wins)` for `X ~ Binomial(n, 1/2)`.
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    if wins > n {
        return 0.0;
    }
    let mut binom = 1.0f64;
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        coeffs.push(binom);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    coeffs[wins..].iter().sum::<f64>() / 2f64.powi(n as i32)
}

/// `chains.csv`: one row per recorded state.
pub fn trajectory_csv(land: &Landscape, traj: &Trajectory) -> String {
    let mut out = String::from("iteration,g,g_b,f_g,f_b,t,g_cbest,delta,p,gamma,accepted\n");
    for (i, s) in traj.states.iter().enumerate() {
        let _ = write!(out, "{},{},{},{:.10e},{:.10e}", s.iteration, s.g, s.g_b, land.f(s.g), land.f(s.g_b));
        match i.checked_sub(1).map(|j| traj.decisions[j]) {
            Some(d) => {
                let _ = writeln!(
                    out,
                    ",{:.10e},{},{:.10e},{:.10e},{:.10e},{}",
                    d.temperature, d.g_cbest, d.delta, d.probability, d.draw, d.accepted as u8
                );
            }
            None => out.push_str(",,,,,,\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(Landscape::new(vec![1.0], vec![vec![]]).is_err());
        assert!(Landscape::new(vec![1.0, 2.0], vec![vec![1], vec![]]).is_err());
        assert!(Landscape::new(vec![1.0, 2.0, 3.0], vec![vec![1], vec![0], vec![]]).is_err());
        assert!(Landscape::new(vec![1.0, 2.0, 3.0, 4.0], vec![vec![1], vec![0], vec![3], vec![2]]).is_err());
        assert!(Landscape::new(vec![1.0, f64::NAN], vec![vec![1], vec![0]]).is_err());
        assert!(Landscape::line(vec![1.0, 0.5]).is_ok());
    }

    #[test]
    fn two_state_line_offspring() {
        let land = Landscape::line(vec![1.0, 0.5]).unwrap();
        let cfg = ChainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(f_gen(&ChainState::new(0), &land, &cfg, &mut rng), 1);
    }

    #[test]
    fn improving_offspring_always_accepted() {
        let land = Landscape::line(vec![1.0, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let (next, d) = f_upd(&ChainState::new(0), &land, 1, 1e-8, AcceptanceRule::Metropolis, &mut rng).unwrap();
            assert!(d.accepted);
            assert_eq!((next.g, next.g_b, next.iteration), (1, 1, 1));
        }
    }

    #[test]
    fn elite_ties_keep_incumbent() {
        let land = Landscape::ring(vec![0.5, 0.5, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (next, _) = f_upd(&ChainState::new(0), &land, 1, 1.0, AcceptanceRule::Metropolis, &mut rng).unwrap();
        assert_eq!(next.g_b, 0);
        assert_eq!(next.g, 1);
    }

    #[test]
    fn greedy_never_goes_uphill() {
        let land = Landscape::line(vec![0.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let (next, _) = f_upd(&ChainState::new(0), &land, 1, 1e6, AcceptanceRule::Greedy, &mut rng).unwrap();
            assert_eq!(next.g, 0);
        }
    }

    #[test]
    fn zero_budget_is_initial_state_only() {
        let land = Landscape::rugged(16, 1).unwrap();
        let cfg = ChainConfig { budget: 0, start: Some(3), ..ChainConfig::default() };
        let t = run_chain(&land, &cfg).unwrap();
        assert_eq!(t.states, vec![ChainState::new(3)]);
        assert!(t.decisions.is_empty());
        assert_eq!(trajectory_csv(&land, &t).lines().count(), 2);
    }

    #[test]
    fn chains_replay() {
        let land = Landscape::rugged(32, 4).unwrap();
        let cfg = ChainConfig { budget: 300, seed: 17, ..ChainConfig::default() };
        assert_eq!(run_chain(&land, &cfg).unwrap(), run_chain(&land, &cfg).unwrap());
    }

    #[test]
    fn first_hit_agrees_with_trajectory() {
        let land = Landscape::rugged(32, 5).unwrap();
        let min = land.min_value();
        for seed in 0..20 {
            let cfg = ChainConfig { budget: 400, seed, ..ChainConfig::default() };
            let traj = run_chain(&land, &cfg).unwrap();
            let expected = traj.states.iter().position(|s| land.f(s.g_b) == min);
            assert_eq!(first_hit(&land, &cfg).unwrap(), expected);
        }
    }

    #[test]
    fn monotone_examples() {
        let land = Landscape::line(vec![1.0, 0.5, 0.2]).unwrap();
        assert!(check_monotone(&land, &[ChainState::new(0)]).monotone);
        let states = [
            ChainState { g: 0, g_b: 0, iteration: 0 },
            ChainState { g: 1, g_b: 1, iteration: 1 },
            ChainState { g: 2, g_b: 2, iteration: 2 },
            ChainState { g: 1, g_b: 1, iteration: 3 },
        ];
        let c = check_monotone(&land, &states);
        assert!(!c.monotone);
        assert_eq!(c.first_violation, Some(3));
    }

    #[test]
    fn deterministic_chain_is_homogeneous() {
        let land = Landscape::line(vec![1.0, 0.0]).unwrap();
        let cfg = ChainConfig { t_init: 1e-8, alpha: 1.0, start: Some(0), ..ChainConfig::default() };
        let r = check_homogeneity(&land, &cfg, 2..6, 6..10, 400, 10).unwrap();
        assert_eq!(r.max_tv, 0.0);
        assert_eq!(r.compared.len(), 1);
    }

    #[test]
    fn everyone_next_to_the_optimum() {
        let land = Landscape::star(0.0, &[0.5, 0.7, 0.9, 0.6]).unwrap();
        let cfg = ChainConfig { budget: 50, ..ChainConfig::default() };
        let est = estimate_hit_probability(&land, &cfg, 200).unwrap();
        assert_eq!(est.fraction, 1.0);
        assert_eq!(est.hits, 200);
    }

    #[test]
    fn hit_fraction_grows_with_budget() {
        let land = Landscape::trap(32, 2).unwrap();
        let cfg = ChainConfig { budget: 2000, ..ChainConfig::default() };
        let est = estimate_hit_probability(&land, &cfg, 100).unwrap();
        let mut prev = 0.0;
        for b in [0, 10, 100, 500, 1000, 2000] {
            let f = est.at_budget(b).fraction;
            assert!(f >= prev);
            prev = f;
        }
        assert_eq!(est.at_budget(2000).fraction, est.fraction);
        // Nested budgets from independent runs on the same seeds agree with clipping.
        let short = estimate_hit_probability(&land, &ChainConfig { budget: 500, ..cfg.clone() }, 100).unwrap();
        assert_eq!(short.hits, est.at_budget(500).hits);
    }

    #[test]
    fn sign_test_values() {
        assert!((sign_test_p(0, 20) - 1.0).abs() < 1e-12);
        assert!((sign_test_p(20, 20) - 2f64.powi(-20)).abs() < 1e-18);
        // P(X >= 15), X ~ Bin(20, 1/2) = 21700 / 2^20
        assert!((sign_test_p(15, 20) - 21700.0 / 1048576.0).abs() < 1e-12);
    }

    #[test]
    fn landscape_csv_round_trip() {
        let land = Landscape::rugged(12, 3).unwrap();
        let back = Landscape::from_csv(&land.to_csv()).unwrap();
        assert_eq!(back, land);
        assert!(Landscape::from_csv("a,b\n").is_err());
        assert!(Landscape::from_csv("state,f,neighbors\n0,1.0,1\n1,2.0,\n").is_err());
    }

    #[test]
    fn trap_has_unique_optimum_fenced_by_barriers() {
        for seed in 0..10 {
            let land = Landscape::trap(64, seed).unwrap();
            let minima = land.global_minima();
            assert_eq!(minima.len(), 1);
            for &nb in land.neighbors(minima[0]) {
                assert!(land.f(nb) >= 0.9);
            }
        }
    }
}
