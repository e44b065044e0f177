//! Finite-population social game and strategy revision dynamics.
//!
//! Each player's social pay is the average pairwise payoff against its graph
//! neighbours. Against a fixed set of opponents this is a saw-shaped function
//! of the player's own strategy: it decreases linearly between consecutive
//! opponent values and jumps up just past each one. The best response is
//! therefore either `0` or `t + epsilon` for some observed opponent value `t`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::EquilibriumDensity;
use crate::error::{Error, Result};
use crate::game::{own_payoff, GameParams};
use crate::graph::InteractionGraph;
use crate::scalar::{cmp_real, Real};
use crate::stats::ks_distance;

/// How much of its neighbourhood a revising player gets to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    Full,
    /// `k` neighbours drawn uniformly without replacement.
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevisionPolicy<F> {
    epsilon: F,
    observation: Observation,
    revisions_per_round: usize,
    simultaneous: bool,
}

impl<F: Real> RevisionPolicy<F> {
    /// Default offset above an opponent's value, as a fraction of `T`.
    pub const DEFAULT_EPSILON_FRACTION: f64 = 1e-9;

    pub fn new(
        epsilon: F,
        observation: Observation,
        revisions_per_round: usize,
        params: &GameParams<F>,
        n: usize,
    ) -> Result<Self> {
        let cap = F::lit(1e-3) * params.horizon();
        if !(epsilon > F::zero() && epsilon <= cap) {
            return Err(Error::InvalidPolicy(format!(
                "epsilon {epsilon} must lie in (0, {cap}]"
            )));
        }
        if let Observation::Sampled(k) = observation {
            if k == 0 || k + 1 > n {
                return Err(Error::InvalidPolicy(format!(
                    "sample size {k} must lie in 1..={}",
                    n.saturating_sub(1)
                )));
            }
        }
        if revisions_per_round > n {
            return Err(Error::InvalidPolicy(format!(
                "{revisions_per_round} revisions per round exceeds {n} players"
            )));
        }
        Ok(Self {
            epsilon,
            observation,
            revisions_per_round,
            simultaneous: false,
        })
    }

    /// Full observation, one revision per round, default epsilon.
    pub fn full(params: &GameParams<F>, n: usize) -> Result<Self> {
        let eps = F::lit(Self::DEFAULT_EPSILON_FRACTION) * params.horizon();
        Self::new(eps, Observation::Full, 1.min(n), params, n)
    }

    /// All revisers respond to the state at the start of the round.
    pub fn with_simultaneous(mut self, simultaneous: bool) -> Self {
        self.simultaneous = simultaneous;
        self
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }
    pub fn observation(&self) -> Observation {
        self.observation
    }
    pub fn revisions_per_round(&self) -> usize {
        self.revisions_per_round
    }
    pub fn simultaneous(&self) -> bool {
        self.simultaneous
    }
}

/// A sorted multiset of opponent strategies with prefix sums of `T - t`,
/// answering summed pay queries in `O(log m)`.
#[derive(Debug, Clone)]
pub struct OpponentView<F> {
    sorted: Vec<F>,
    prefix: Vec<F>,
    params: GameParams<F>,
}

impl<F: Real> OpponentView<F> {
    pub fn new(values: impl IntoIterator<Item = F>, params: GameParams<F>) -> Self {
        let mut sorted: Vec<F> = values.into_iter().collect();
        sorted.sort_unstable_by(cmp_real);
        let t = params.horizon();
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        prefix.push(F::zero());
        let mut acc = F::zero();
        for &v in &sorted {
            acc = acc + (t - v);
            prefix.push(acc);
        }
        Self {
            sorted,
            prefix,
            params,
        }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[F] {
        &self.sorted
    }

    /// Sum over the view of the payoff earned by `candidate`.
    pub fn total_pay(&self, candidate: F) -> F {
        let below = self.sorted.partition_point(|&t| t < candidate);
        let rest = F::of_usize(self.sorted.len() - below);
        self.prefix[below] + self.params.rho() * (self.params.horizon() - candidate) * rest
    }

    pub fn mean_pay(&self, candidate: F) -> F {
        self.total_pay(candidate) / F::of_usize(self.len())
    }

    /// Best response against the view with one copy of `exclude` removed.
    ///
    /// Candidates are `0` and `t + epsilon` for every remaining value `t` with
    /// `t + epsilon <= T`; ties go to the smallest candidate.
    pub fn best_response(&self, exclude: Option<F>, epsilon: F) -> BestResponse<F> {
        let t_max = self.params.horizon();
        let m = self.len() - usize::from(exclude.is_some());
        let denom = F::of_usize(m.max(1));
        let pay = |c: F| {
            let mut total = self.total_pay(c);
            if let Some(x) = exclude {
                total = total - own_payoff(c, x, &self.params);
            }
            total / denom
        };

        let mut best = BestResponse {
            strategy: F::zero(),
            pay: pay(F::zero()),
        };
        let mut skipped = exclude.is_none();
        let mut last: Option<F> = None;
        for &t in &self.sorted {
            if !skipped && Some(t) == exclude {
                skipped = true;
                continue;
            }
            if last == Some(t) {
                continue;
            }
            last = Some(t);
            let c = t + epsilon;
            if c > t_max {
                break;
            }
            let p = pay(c);
            if p > best.pay {
                best = BestResponse { strategy: c, pay: p };
            }
        }
        best
    }
}

/// Maximiser of social pay and the pay it attains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse<F> {
    pub strategy: F,
    pub pay: F,
}

/// Best response against an explicit list of opponent strategies.
pub fn best_response_to<F: Real>(
    opponents: &[F],
    params: GameParams<F>,
    epsilon: F,
) -> BestResponse<F> {
    OpponentView::new(opponents.iter().copied(), params).best_response(None, epsilon)
}

/// How to populate the initial strategy profile.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<F> {
    /// Every player starts at the same value.
    Equal(F),
    /// Independent uniform draws on `[0, T]`.
    Uniform,
    /// Independent draws from the equilibrium density.
    Equilibrium,
    Explicit(Vec<F>),
}

/// Parses one decimal strategy per line; blank lines are ignored.
pub fn parse_strategies<F: Real>(text: &str, n: usize, params: &GameParams<F>) -> Result<Vec<F>> {
    let mut out = Vec::with_capacity(n);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|e| Error::InvalidStrategies(format!("line {}: {line:?}: {e}", i + 1)))?;
        let v = F::lit(v);
        params.check_strategy(v)?;
        out.push(v);
    }
    if out.len() != n {
        return Err(Error::InvalidStrategies(format!(
            "expected {n} strategies, found {}",
            out.len()
        )));
    }
    Ok(out)
}

/// A profile of strategies over an interaction graph, plus the random stream
/// that drives revisions.
#[derive(Debug, Clone)]
pub struct PopulationState<F> {
    strategies: Vec<F>,
    graph: InteractionGraph,
    params: GameParams<F>,
    seed: u64,
    rng: ChaCha8Rng,
    round: usize,
}

impl<F: Real> PopulationState<F> {
    pub fn new(
        strategies: Vec<F>,
        graph: InteractionGraph,
        params: GameParams<F>,
        seed: u64,
    ) -> Result<Self> {
        if strategies.len() != graph.len() {
            return Err(Error::InvalidStrategies(format!(
                "{} strategies for {} players",
                strategies.len(),
                graph.len()
            )));
        }
        for &s in &strategies {
            params.check_strategy(s)?;
        }
        Ok(Self {
            strategies,
            graph,
            params,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            round: 0,
        })
    }

    /// Builds the initial profile; random profiles draw from the seeded stream.
    pub fn initialize(
        init: &InitialCondition<F>,
        graph: InteractionGraph,
        params: GameParams<F>,
        seed: u64,
    ) -> Result<Self> {
        let n = graph.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let strategies = match init {
            InitialCondition::Equal(v) => vec![*v; n],
            InitialCondition::Uniform => (0..n)
                .map(|_| F::lit(rng.gen::<f64>()) * params.horizon())
                .collect(),
            InitialCondition::Equilibrium => {
                EquilibriumDensity::build(params).sample_with(&mut rng, n)
            }
            InitialCondition::Explicit(v) => v.clone(),
        };
        let mut state = Self::new(strategies, graph, params, seed)?;
        state.rng = rng;
        Ok(state)
    }

    pub fn strategies(&self) -> &[F] {
        &self.strategies
    }
    pub fn graph(&self) -> &InteractionGraph {
        &self.graph
    }
    pub fn params(&self) -> &GameParams<F> {
        &self.params
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn round(&self) -> usize {
        self.round
    }
    pub fn len(&self) -> usize {
        self.strategies.len()
    }
    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.len() {
            return Err(Error::PlayerOutOfRange {
                index: player,
                n: self.len(),
            });
        }
        if self.graph.degree(player) == 0 {
            return Err(Error::IsolatedPlayer(player));
        }
        Ok(())
    }

    /// Mean payoff `player` would earn by playing `candidate` against each
    /// neighbour's current strategy.
    pub fn social_pay(&self, player: usize, candidate: F) -> Result<F> {
        self.check_player(player)?;
        self.params.check_strategy(candidate)?;
        let (sum, count) = self
            .graph
            .neighbors(player)
            .fold((F::zero(), 0usize), |(sum, count), v| {
                (sum + own_payoff(candidate, self.strategies[v], &self.params), count + 1)
            });
        Ok(sum / F::of_usize(count))
    }

    /// Population average of every player's current social pay.
    ///
    /// On the complete graph this uses one sorted view of the profile, so the
    /// cost is `O(n log n)` rather than `O(n^2)`.
    pub fn mean_social_pay(&self) -> F {
        let n = self.len();
        let total = if self.graph.is_complete() {
            let view = OpponentView::new(self.strategies.iter().copied(), self.params);
            let others = F::of_usize(n - 1);
            self.strategies.iter().fold(F::zero(), |acc, &s| {
                // remove the self-pairing, which lands on the tie row
                acc + (view.total_pay(s) - own_payoff(s, s, &self.params)) / others
            })
        } else {
            (0..n).fold(F::zero(), |acc, p| {
                acc + self.social_pay(p, self.strategies[p]).expect("valid player")
            })
        };
        total / F::of_usize(n)
    }

    /// The strategies `player` observes under `observation`.
    pub fn observe<R: Rng + ?Sized>(
        &self,
        player: usize,
        observation: Observation,
        rng: &mut R,
    ) -> Vec<F> {
        match observation {
            Observation::Full => self.graph.neighbors(player).map(|v| self.strategies[v]).collect(),
            Observation::Sampled(k) => {
                let degree = self.graph.degree(player);
                index::sample(rng, degree, k.min(degree))
                    .into_iter()
                    .map(|i| self.strategies[self.graph.neighbor_at(player, i)])
                    .collect()
            }
        }
    }

    /// Best response of `player` under the policy's observation model, drawing
    /// any observation sample from `rng`. Pay is estimated over the observed
    /// opponents.
    pub fn best_response_with<R: Rng + ?Sized>(
        &self,
        player: usize,
        policy: &RevisionPolicy<F>,
        rng: &mut R,
    ) -> Result<BestResponse<F>> {
        self.check_player(player)?;
        if policy.observation == Observation::Full && self.graph.is_complete() {
            let view = OpponentView::new(self.strategies.iter().copied(), self.params);
            return Ok(view.best_response(Some(self.strategies[player]), policy.epsilon));
        }
        let seen = self.observe(player, policy.observation, rng);
        Ok(best_response_to(&seen, self.params, policy.epsilon))
    }

    /// Best response using a clone of the state's own random stream.
    pub fn best_response(&self, player: usize, policy: &RevisionPolicy<F>) -> Result<BestResponse<F>> {
        let mut rng = self.rng.clone();
        self.best_response_with(player, policy, &mut rng)
    }

    /// Checks every player for a profitable deviation under full observation.
    ///
    /// Reports the largest gain found as the witness.
    pub fn is_pure_equilibrium(&self, epsilon: F, improvement_tol: F) -> EquilibriumCheck<F> {
        let n = self.len();
        let complete_view = self
            .graph
            .is_complete()
            .then(|| OpponentView::new(self.strategies.iter().copied(), self.params));
        let mut witness: Option<Deviation<F>> = None;
        for p in 0..n {
            let own = self.strategies[p];
            let (br, current) = match &complete_view {
                Some(view) => {
                    let others = F::of_usize(n - 1);
                    let current = (view.total_pay(own) - own_payoff(own, own, &self.params)) / others;
                    (view.best_response(Some(own), epsilon), current)
                }
                None => {
                    let seen: Vec<F> = self.graph.neighbors(p).map(|v| self.strategies[v]).collect();
                    let view = OpponentView::new(seen, self.params);
                    (view.best_response(None, epsilon), view.mean_pay(own))
                }
            };
            let gain = br.pay - current;
            if gain > improvement_tol && witness.is_none_or(|w| gain > w.gain) {
                witness = Some(Deviation {
                    player: p,
                    from: own,
                    to: br.strategy,
                    current_pay: current,
                    deviation_pay: br.pay,
                    gain,
                });
            }
        }
        EquilibriumCheck {
            is_equilibrium: witness.is_none(),
            witness,
        }
    }

    /// Runs one revision round in place and reports what happened.
    ///
    /// Revisers are drawn without replacement and update in selection order,
    /// each seeing the moves made before it, unless the policy is simultaneous.
    pub fn advance(&mut self, policy: &RevisionPolicy<F>) -> RoundStats {
        let n = self.len();
        let k = policy.revisions_per_round.min(n);
        let mut rng = self.rng.clone();
        let chosen = index::sample(&mut rng, n, k).into_vec();
        let snapshot = policy.simultaneous.then(|| self.clone());
        let mut moved = 0;
        for p in chosen {
            let br = match &snapshot {
                Some(before) => before.best_response_with(p, policy, &mut rng),
                None => self.best_response_with(p, policy, &mut rng),
            }
            .expect("graph guarantees neighbours");
            if (br.strategy - self.strategies[p]).abs() > policy.epsilon {
                moved += 1;
            }
            self.strategies[p] = br.strategy;
        }
        self.rng = rng;
        self.round += 1;
        RoundStats { revised: k, moved }
    }

    /// Successor state after one revision round.
    pub fn step(&self, policy: &RevisionPolicy<F>) -> Self {
        let mut next = self.clone();
        next.advance(policy);
        next
    }

    /// Iterates [`Self::step`] for `rounds` rounds, recording churn, mean
    /// social pay and KS distance to `limit` after each.
    pub fn run(
        &self,
        policy: &RevisionPolicy<F>,
        rounds: usize,
        limit: &EquilibriumDensity<F>,
    ) -> Result<SimReport<F>> {
        if rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be at least 1".into()));
        }
        let mut state = self.clone();
        let mut records = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let stats = state.advance(policy);
            records.push(RoundRecord {
                round: state.round,
                churn: stats.churn(),
                mean_pay: state.mean_social_pay(),
                ks: ks_distance(&state.strategies, |x| limit.cdf_unchecked(x)),
            });
        }
        let mut final_strategies = state.strategies.clone();
        final_strategies.sort_unstable_by(cmp_real);
        Ok(SimReport {
            rounds: records,
            final_strategies,
            final_state: state,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub revised: usize,
    /// Revisers whose strategy changed by more than epsilon.
    pub moved: usize,
}

impl RoundStats {
    pub fn churn(&self) -> f64 {
        if self.revised == 0 {
            0.0
        } else {
            self.moved as f64 / self.revised as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation<F> {
    pub player: usize,
    pub from: F,
    pub to: F,
    pub current_pay: F,
    pub deviation_pay: F,
    pub gain: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumCheck<F> {
    pub is_equilibrium: bool,
    pub witness: Option<Deviation<F>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRecord<F> {
    pub round: usize,
    pub churn: f64,
    pub mean_pay: F,
    pub ks: F,
}

#[derive(Debug, Clone)]
pub struct SimReport<F> {
    pub rounds: Vec<RoundRecord<F>>,
    /// Final strategies sorted ascending.
    pub final_strategies: Vec<F>,
    pub final_state: PopulationState<F>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(rho: f64) -> GameParams<f64> {
        GameParams::new(rho, 1.0).unwrap()
    }

    fn complete(strategies: Vec<f64>, rho: f64) -> PopulationState<f64> {
        let n = strategies.len();
        PopulationState::new(strategies, InteractionGraph::complete(n).unwrap(), params(rho), 9).unwrap()
    }

    fn policy(rho: f64, n: usize, eps: f64) -> RevisionPolicy<f64> {
        RevisionPolicy::new(eps, Observation::Full, 1, &params(rho), n).unwrap()
    }

    #[test]
    fn social_pay_examples() {
        let st = complete(vec![0.2, 0.5, 0.8], 0.5);
        assert_abs_diff_eq!(st.social_pay(1, 0.5).unwrap(), 0.525, epsilon = 1e-15);
        // holding out to T outlasts everyone below T and earns T - t from each
        assert_abs_diff_eq!(st.social_pay(1, 1.0).unwrap(), (0.8 + 0.2) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.social_pay(0, 1.0).unwrap(), (0.5 + 0.2) / 2.0, epsilon = 1e-15);
        let tied = complete(vec![1.0, 1.0, 0.6], 0.5);
        assert_abs_diff_eq!(tied.social_pay(0, 1.0).unwrap(), 0.4 / 2.0, epsilon = 1e-15);
        let st = complete(vec![0.0, 0.3], 0.4);
        assert_abs_diff_eq!(st.social_pay(0, 0.3 + 1e-9).unwrap(), 0.7, epsilon = 1e-15);
        assert!(st.social_pay(2, 0.1).is_err());
        assert!(st.social_pay(0, 1.1).is_err());
    }

    #[test]
    fn best_response_examples() {
        let p = params(0.5);
        let br = best_response_to(&[0.5, 0.8], p, 1e-6);
        assert_eq!(br.strategy, 0.0);
        assert_abs_diff_eq!(br.pay, 0.5, epsilon = 1e-15);
        let br = best_response_to(&[0.1, 0.2], p, 1e-6);
        assert_abs_diff_eq!(br.strategy, 0.2 + 1e-6, epsilon = 1e-15);
        assert_abs_diff_eq!(br.pay, 0.85, epsilon = 1e-6);
        for rho in [0.1, 0.7] {
            let br = best_response_to(&[1.0], params(rho), 1e-9);
            assert_eq!(br.strategy, 0.0);
            assert_abs_diff_eq!(br.pay, rho, epsilon = 1e-15);
        }
    }

    #[test]
    fn view_exclusion_matches_rebuilt_view() {
        let vals = [0.1, 0.4, 0.4, 0.9, 0.0];
        let p = params(0.35);
        let full = OpponentView::new(vals.iter().copied(), p);
        for i in 0..vals.len() {
            let others: Vec<f64> = vals.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            let a = full.best_response(Some(vals[i]), 1e-9);
            let b = best_response_to(&others, p, 1e-9);
            assert_eq!(a.strategy, b.strategy);
            assert_abs_diff_eq!(a.pay, b.pay, epsilon = 1e-14);
        }
    }

    #[test]
    fn checker_examples() {
        let st = complete(vec![0.5, 0.5], 0.5);
        let check = st.is_pure_equilibrium(1e-9, 1e-12);
        assert!(!check.is_equilibrium);
        let w = check.witness.unwrap();
        assert_eq!(w.to, 0.0);
        assert_abs_diff_eq!(w.current_pay, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w.deviation_pay, 0.5, epsilon = 1e-15);

        let st = complete(vec![0.0, 1.0], 0.5);
        let check = st.is_pure_equilibrium(1e-9, 1e-12);
        assert!(check.is_equilibrium, "{check:?}");
        assert!(check.witness.is_none());
    }

    #[test]
    fn checker_on_explicit_graph_agrees_with_complete() {
        let strategies = vec![0.1, 0.35, 0.6, 0.62];
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let explicit = PopulationState::new(
            strategies.clone(),
            InteractionGraph::from_edges(4, &edges).unwrap(),
            params(0.5),
            1,
        )
        .unwrap();
        let a = explicit.is_pure_equilibrium(1e-9, 1e-12);
        let b = complete(strategies, 0.5).is_pure_equilibrium(1e-9, 1e-12);
        assert_eq!(a.is_equilibrium, b.is_equilibrium);
        let (wa, wb) = (a.witness.unwrap(), b.witness.unwrap());
        assert_eq!((wa.player, wa.to), (wb.player, wb.to));
        assert_abs_diff_eq!(wa.gain, wb.gain, epsilon = 1e-14);
    }

    #[test]
    fn step_examples() {
        let st = complete(vec![0.3, 0.6, 0.9], 0.5);
        let idle = RevisionPolicy::new(1e-9, Observation::Full, 0, &params(0.5), 3).unwrap();
        let next = st.step(&idle);
        assert_eq!(next.strategies(), st.strategies());
        assert_eq!(next.round(), 1);

        let st = complete(vec![0.5, 0.5], 0.5);
        let mut next = st.clone();
        let stats = next.advance(&policy(0.5, 2, 1e-9));
        assert_eq!(stats, RoundStats { revised: 1, moved: 1 });
        assert_eq!(next.strategies().iter().filter(|&&s| s == 0.0).count(), 1);

        let a = st.step(&policy(0.5, 2, 1e-9));
        let b = st.step(&policy(0.5, 2, 1e-9));
        assert_eq!(a.strategies(), b.strategies());
    }

    #[test]
    fn simultaneous_revision_uses_round_start_state() {
        let st = complete(vec![0.5, 0.5], 0.5);
        let both = RevisionPolicy::new(1e-9, Observation::Full, 2, &params(0.5), 2).unwrap();
        let seq = st.step(&both);
        let sim = st.step(&both.with_simultaneous(true));
        // simultaneously both see the tie and flee to 0
        assert_eq!(sim.strategies(), &[0.0, 0.0]);
        // sequentially the second reviser sees the first at 0 and moves just above it
        let mut s = seq.strategies().to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(s, vec![0.0, 1e-9]);
    }

    #[test]
    fn run_contracts() {
        let p = params(0.5);
        let d = EquilibriumDensity::build(p);
        let st = complete(vec![0.5, 0.5], 0.5);
        let pol = policy(0.5, 2, 1e-9);
        assert!(st.run(&pol, 0, &d).is_err());
        let r = st.run(&pol, 1, &d).unwrap();
        assert_eq!(r.rounds.len(), 1);
        assert_eq!(r.rounds[0].churn, 1.0);
        let r = st.run(&pol, 40, &d).unwrap();
        assert_eq!(r.rounds.len(), 40);
        for rec in &r.rounds {
            assert!((0.0..=1.0).contains(&rec.churn));
            assert!((0.0..=1.0).contains(&rec.ks));
        }
        let again = st.run(&pol, 40, &d).unwrap();
        assert_eq!(r.rounds, again.rounds);
        assert_eq!(r.final_strategies, again.final_strategies);
    }

    #[test]
    fn mean_social_pay_fast_path_matches_direct() {
        let p = params(0.3);
        let st = PopulationState::initialize(
            &InitialCondition::Uniform,
            InteractionGraph::complete(40).unwrap(),
            p,
            5,
        )
        .unwrap();
        let direct = (0..40).map(|i| st.social_pay(i, st.strategies()[i]).unwrap()).sum::<f64>() / 40.0;
        assert_abs_diff_eq!(st.mean_social_pay(), direct, epsilon = 1e-13);
    }

    #[test]
    fn initial_conditions() {
        let p = params(0.5);
        let g = InteractionGraph::complete(4).unwrap();
        let eq = PopulationState::initialize(&InitialCondition::Equal(0.25), g.clone(), p, 1).unwrap();
        assert_eq!(eq.strategies(), &[0.25; 4]);
        let ex = PopulationState::initialize(&InitialCondition::Explicit(vec![0.0, 0.1, 0.2, 1.0]), g.clone(), p, 1).unwrap();
        assert_eq!(ex.strategies()[3], 1.0);
        assert!(PopulationState::initialize(&InitialCondition::Explicit(vec![0.0]), g.clone(), p, 1).is_err());
        assert!(PopulationState::initialize(&InitialCondition::Equal(1.5), g.clone(), p, 1).is_err());
        let a = PopulationState::initialize(&InitialCondition::Equilibrium, g.clone(), p, 3).unwrap();
        let b = PopulationState::initialize(&InitialCondition::Equilibrium, g, p, 3).unwrap();
        assert_eq!(a.strategies(), b.strategies());
    }

    #[test]
    fn strategy_file_parsing() {
        let p = params(0.5);
        assert_eq!(parse_strategies::<f64>("0.1\n0.5\n\n1\n", 3, &p).unwrap(), vec![0.1, 0.5, 1.0]);
        assert!(parse_strategies::<f64>("0.1\n0.5\n", 3, &p).is_err());
        assert!(parse_strategies::<f64>("0.1\nabc\n0.2\n", 3, &p).is_err());
        assert!(parse_strategies::<f64>("0.1\n2\n0.2\n", 3, &p).is_err());
    }

    #[test]
    fn policy_validation() {
        let p = params(0.5);
        assert!(RevisionPolicy::new(0.0, Observation::Full, 1, &p, 5).is_err());
        assert!(RevisionPolicy::new(2e-3, Observation::Full, 1, &p, 5).is_err());
        assert!(RevisionPolicy::new(1e-9, Observation::Sampled(0), 1, &p, 5).is_err());
        assert!(RevisionPolicy::new(1e-9, Observation::Sampled(5), 1, &p, 5).is_err());
        assert!(RevisionPolicy::new(1e-9, Observation::Sampled(4), 1, &p, 5).is_ok());
        assert!(RevisionPolicy::new(1e-9, Observation::Full, 6, &p, 5).is_err());
    }

    #[test]
    fn sampled_observation_is_uniform_subset() {
        // player 0 of a 5-clique observes 2 of its 4 neighbours: 6 equally likely subsets
        let st = complete(vec![0.0, 0.1, 0.2, 0.3, 0.4], 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draws = 100_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let mut seen = st.observe(0, Observation::Sampled(2), &mut rng);
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            *counts.entry(format!("{seen:?}")).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 5 degrees of freedom, upper 0.1% point
        assert!(chi2 < 20.515, "chi2 = {chi2}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn saw_structure(
                rho in 0.05f64..0.95,
                mut opp in proptest::collection::vec(0.0f64..1.0, 1..10),
                frac in 0.01f64..0.99,
            ) {
                let p = params(rho);
                opp.sort_by(|a, b| a.partial_cmp(b).unwrap());
                opp.dedup();
                let view = OpponentView::new(opp.iter().copied(), p);
                let m = opp.len() as f64;
                let mut edges = vec![0.0];
                edges.extend(opp.iter().copied());
                edges.push(1.0);
                for w in edges.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    if hi - lo < 1e-6 { continue; }
                    let x = lo + frac * (hi - lo) * 0.5 + (hi - lo) * 0.25;
                    let h = (hi - lo) * 0.1;
                    let slope = (view.mean_pay(x + h) - view.mean_pay(x - h)) / (2.0 * h);
                    let above = opp.iter().filter(|&&t| t > x).count() as f64;
                    prop_assert!((slope + rho * above / m).abs() < 1e-7);
                }
                for &t in &opp {
                    if t > 1e-6 && t < 1.0 - 1e-6 {
                        prop_assert!(view.mean_pay(t + 1e-9) > view.mean_pay(t - 1e-9));
                    }
                }
            }

            #[test]
            fn view_matches_direct_social_pay(
                rho in 0.05f64..0.95,
                strat in proptest::collection::vec(0.0f64..1.0, 2..12),
                c in 0.0f64..1.0,
            ) {
                let n = strat.len();
                let st = complete(strat.clone(), rho);
                let others = strat[1..].iter().copied();
                let view = OpponentView::new(others, params(rho));
                prop_assert!((st.social_pay(0, c).unwrap() - view.mean_pay(c)).abs() < 1e-14);
                let _ = n;
            }
        }
    }
}
