//! Grounded Blocksworld: vocabulary, simulator, random states and a simple
//! unstack-then-rebuild plan generator.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::fluent::{apply_action, is_goal_satisfied, Fluent, FluentSet, GroundedAction, State};
use super::vocab::DomainVocabulary;
use crate::error::{Error, Result};
use crate::rng;

pub const ON: &str = "On";
pub const ON_TABLE: &str = "On-Table";
pub const CLEAR: &str = "Clear";
pub const HOLDING: &str = "Holding";
pub const ARM_EMPTY: &str = "Arm-Empty";

pub const PICK_UP: &str = "Pick-Up";
pub const PUT_DOWN: &str = "Put-Down";
pub const STACK: &str = "Stack";
pub const UNSTACK: &str = "Unstack";

/// `Block_A`, ..., `Block_Z`, `Block_AA`, ... (spreadsheet-style letters).
pub fn block_name(i: usize) -> String {
    let mut n = i + 1;
    let mut letters = Vec::new();
    while n > 0 {
        n -= 1;
        letters.push(b'A' + (n % 26) as u8);
        n /= 26;
    }
    letters.reverse();
    format!("Block_{}", String::from_utf8(letters).expect("ascii"))
}

pub fn on(x: &str, y: &str) -> Fluent {
    Fluent::new(ON, &[x, y])
}

pub fn on_table(x: &str) -> Fluent {
    Fluent::new(ON_TABLE, &[x])
}

pub fn clear(x: &str) -> Fluent {
    Fluent::new(CLEAR, &[x])
}

pub fn holding(x: &str) -> Fluent {
    Fluent::new(HOLDING, &[x])
}

pub fn arm_empty() -> Fluent {
    Fluent::new(ARM_EMPTY, &[])
}

fn expected_arity(predicate: &str) -> Option<usize> {
    match predicate {
        ON => Some(2),
        ON_TABLE | CLEAR | HOLDING => Some(1),
        ARM_EMPTY => Some(0),
        _ => None,
    }
}

fn set(fs: impl IntoIterator<Item = Fluent>) -> FluentSet {
    fs.into_iter().collect()
}

fn pick_up(x: &str) -> GroundedAction {
    GroundedAction::new(
        format!("({PICK_UP} {x})"),
        set([clear(x), on_table(x), arm_empty()]),
        set([holding(x)]),
        set([clear(x), on_table(x), arm_empty()]),
    )
    .expect("disjoint effects")
}

fn put_down(x: &str) -> GroundedAction {
    GroundedAction::new(
        format!("({PUT_DOWN} {x})"),
        set([holding(x)]),
        set([on_table(x), clear(x), arm_empty()]),
        set([holding(x)]),
    )
    .expect("disjoint effects")
}

fn stack(x: &str, y: &str) -> GroundedAction {
    GroundedAction::new(
        format!("({STACK} {x} {y})"),
        set([holding(x), clear(y)]),
        set([on(x, y), clear(x), arm_empty()]),
        set([holding(x), clear(y)]),
    )
    .expect("disjoint effects")
}

fn unstack(x: &str, y: &str) -> GroundedAction {
    GroundedAction::new(
        format!("({UNSTACK} {x} {y})"),
        set([on(x, y), clear(x), arm_empty()]),
        set([holding(x), clear(y)]),
        set([on(x, y), clear(x), arm_empty()]),
    )
    .expect("disjoint effects")
}

/// Fluent and action vocabulary for `n_blocks` blocks: `n(n-1) + 2n` goal
/// fluents (On, On-Table, Clear) and `2n + 2n(n-1)` actions, both in lexical
/// label order. Holding and Arm-Empty are simulator-only.
pub fn build_blocksworld_vocabulary(n_blocks: usize) -> Result<DomainVocabulary> {
    Blocksworld::new(n_blocks).map(|d| d.vocab)
}

pub fn domain_id(n_blocks: usize) -> String {
    format!("blocksworld-{n_blocks}")
}

/// Parses `blocksworld-<n>`.
pub fn parse_domain_id(id: &str) -> Option<usize> {
    id.strip_prefix("blocksworld-")?.parse().ok().filter(|&n| n >= 1)
}

/// The domain named by a `blocksworld-<n>` id.
pub fn domain_from_id(id: &str) -> Result<Blocksworld> {
    let n = parse_domain_id(id).ok_or_else(|| Error::InvalidDomain(format!("unknown domain {id:?}")))?;
    Blocksworld::new(n)
}

#[derive(Clone, Debug)]
pub struct Blocksworld {
    blocks: Vec<String>,
    vocab: DomainVocabulary,
    by_label: HashMap<String, usize>,
}

impl Blocksworld {
    pub fn new(n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 {
            return Err(Error::InvalidDomain("blocksworld needs at least one block".into()));
        }
        let blocks: Vec<String> = (0..n_blocks).map(block_name).collect();
        let mut fluents = Vec::with_capacity(n_blocks * (n_blocks + 1));
        let mut actions = Vec::with_capacity(2 * n_blocks * n_blocks);
        for x in &blocks {
            fluents.push(on_table(x));
            fluents.push(clear(x));
            actions.push(pick_up(x));
            actions.push(put_down(x));
            for y in blocks.iter().filter(|y| *y != x) {
                fluents.push(on(x, y));
                actions.push(stack(x, y));
                actions.push(unstack(x, y));
            }
        }
        actions.sort_by(|a, b| a.label.cmp(&b.label));
        let vocab = DomainVocabulary::new(domain_id(n_blocks), fluents, actions)?;
        let by_label = vocab
            .actions()
            .iter()
            .enumerate()
            .map(|(i, a)| (a.label.clone(), i))
            .collect();
        Ok(Self {
            blocks,
            vocab,
            by_label,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[String] {
        &self.blocks
    }

    pub fn vocabulary(&self) -> &DomainVocabulary {
        &self.vocab
    }

    pub fn action(&self, label: &str) -> Option<&GroundedAction> {
        self.by_label.get(label).map(|&i| &self.vocab.actions()[i])
    }

    fn act(&self, kind: &str, args: &[&str]) -> &GroundedAction {
        let label = format!("({kind} {})", args.join(" "));
        self.action(&label).expect("action exists for known blocks")
    }

    /// All On and On-Table fluents: the fluents a goal may contain.
    pub fn goal_fluents(&self) -> Vec<Fluent> {
        self.vocab
            .fluents()
            .iter()
            .filter(|f| f.predicate == ON || f.predicate == ON_TABLE)
            .cloned()
            .collect()
    }

    /// Checks the physical consistency of a Blocksworld state.
    pub fn check_state(&self, s: &State) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidState(msg));
        let mut support: HashMap<&str, Option<&str>> = HashMap::new();
        let mut above: HashMap<&str, &str> = HashMap::new();
        let mut held: Vec<&str> = Vec::new();
        let mut clear_set: BTreeSet<&str> = BTreeSet::new();
        let mut arm_empty_seen = false;
        for f in s.fluents() {
            if expected_arity(&f.predicate) != Some(f.args.len()) {
                return fail(format!("malformed fluent {f}"));
            }
            if f.args.iter().any(|a| !self.blocks.contains(a)) {
                return fail(format!("unknown block in {f}"));
            }
            match f.predicate.as_str() {
                ON => {
                    let (x, y) = (f.args[0].as_str(), f.args[1].as_str());
                    if support.insert(x, Some(y)).is_some() {
                        return fail(format!("{x} has two supports"));
                    }
                    if above.insert(y, x).is_some() {
                        return fail(format!("{y} carries two blocks"));
                    }
                }
                ON_TABLE => {
                    if support.insert(&f.args[0], None).is_some() {
                        return fail(format!("{} has two supports", f.args[0]));
                    }
                }
                HOLDING => held.push(&f.args[0]),
                CLEAR => {
                    clear_set.insert(&f.args[0]);
                }
                _ => arm_empty_seen = true,
            }
        }
        if held.len() > 1 {
            return fail("more than one block held".into());
        }
        if arm_empty_seen == !held.is_empty() {
            return fail("Arm-Empty must hold exactly when nothing is held".into());
        }
        for b in &self.blocks {
            let b = b.as_str();
            let is_held = held.contains(&b);
            if is_held == support.contains_key(b) {
                return fail(format!("{b} must be either held or on exactly one support"));
            }
            let should_be_clear = !is_held && !above.contains_key(b);
            if should_be_clear != clear_set.contains(b) {
                return fail(format!("Clear({b}) is inconsistent"));
            }
            if is_held && above.contains_key(b) {
                return fail(format!("held block {b} carries another block"));
            }
            // every tower must bottom out on the table
            let mut cur = b;
            for _ in 0..=self.blocks.len() {
                match support.get(cur) {
                    Some(Some(next)) => cur = next,
                    _ => break,
                }
            }
            if matches!(support.get(cur), Some(Some(_))) {
                return fail(format!("cyclic support chain through {b}"));
            }
        }
        Ok(())
    }

    /// Applies an action, insisting the result is a valid Blocksworld state.
    pub fn apply(&self, s: &State, a: &GroundedAction) -> Result<State> {
        let next = apply_action(s, a)?;
        debug_assert!(self.check_state(&next).is_ok());
        Ok(next)
    }

    /// State built from towers listed bottom to top, arm empty.
    pub fn state_from_towers(&self, towers: &[Vec<&str>]) -> State {
        let mut fs = FluentSet::new();
        for tower in towers {
            if let Some(bottom) = tower.first() {
                fs.insert(on_table(bottom));
            }
            for w in tower.windows(2) {
                fs.insert(on(w[1], w[0]));
            }
            if let Some(top) = tower.last() {
                fs.insert(clear(top));
            }
        }
        fs.insert(arm_empty());
        State(fs)
    }

    /// A configuration drawn uniformly from all arrangements of the blocks
    /// into towers, with the arm empty.
    pub fn random_state(&self, seed: u64) -> State {
        let towers = random_towers(self.blocks.len(), seed);
        let named: Vec<Vec<&str>> = towers
            .iter()
            .map(|t| t.iter().map(|&i| self.blocks[i].as_str()).collect())
            .collect();
        self.state_from_towers(&named)
    }

    /// Validates a goal: On/On-Table fluents over known blocks forming
    /// non-conflicting partial towers.
    pub fn check_goal(&self, goal: &FluentSet) -> Result<()> {
        let fail = |msg: String| Err(Error::UnsatisfiableGoal(msg));
        let mut support: HashMap<&str, Option<&str>> = HashMap::new();
        let mut above: HashMap<&str, &str> = HashMap::new();
        for f in goal {
            if !(f.predicate == ON || f.predicate == ON_TABLE)
                || expected_arity(&f.predicate) != Some(f.args.len())
                || self.vocab.fluent_index(&f.label()).is_none()
            {
                return fail(format!("{f} is not a valid goal fluent"));
            }
            let x = f.args[0].as_str();
            let y = f.args.get(1).map(String::as_str);
            if support.insert(x, y).is_some() {
                return fail(format!("{x} has two supports"));
            }
            if let Some(y) = y {
                if above.insert(y, x).is_some() {
                    return fail(format!("{y} would carry two blocks"));
                }
            }
        }
        for &start in support.keys() {
            let mut cur = start;
            for _ in 0..=support.len() {
                match support.get(cur) {
                    Some(Some(next)) => {
                        cur = next;
                        if cur == start {
                            return fail(format!("cyclic On chain through {start}"));
                        }
                    }
                    _ => break,
                }
            }
        }
        Ok(())
    }

    /// Plans for `goal` from `init`: put every stacked block on the table,
    /// then build the goal towers bottom-up. The seed picks among
    /// independent moves at each step. Already-satisfied goals get an empty
    /// plan.
    pub fn generate_plan(&self, init: &State, goal: &FluentSet, seed: u64) -> Result<Vec<GroundedAction>> {
        self.check_goal(goal)?;
        self.check_state(init)?;
        if is_goal_satisfied(init, goal) {
            return Ok(Vec::new());
        }
        let mut rng = rng::seeded(seed);
        let mut state = init.clone();
        let mut plan = Vec::new();
        let push = |state: &mut State, a: &GroundedAction, plan: &mut Vec<GroundedAction>| -> Result<()> {
            *state = self.apply(state, a)?;
            plan.push(a.clone());
            Ok(())
        };

        // a held block goes down first
        if let Some(h) = state.fluents().iter().find(|f| f.predicate == HOLDING).cloned() {
            push(&mut state, self.act(PUT_DOWN, &[&h.args[0]]), &mut plan)?;
        }

        loop {
            let movable: Vec<(String, String)> = state
                .fluents()
                .iter()
                .filter(|f| f.predicate == ON && state.contains(&clear(&f.args[0])))
                .map(|f| (f.args[0].clone(), f.args[1].clone()))
                .collect();
            let Some((x, y)) = movable.choose(&mut rng).cloned() else {
                break;
            };
            push(&mut state, self.act(UNSTACK, &[&x, &y]), &mut plan)?;
            push(&mut state, self.act(PUT_DOWN, &[&x]), &mut plan)?;
        }

        let mut pending: Vec<(String, String)> = goal
            .iter()
            .filter(|f| f.predicate == ON)
            .map(|f| (f.args[0].clone(), f.args[1].clone()))
            .collect();
        let uppers: BTreeMap<String, String> = pending.iter().cloned().collect();
        while !pending.is_empty() {
            // (x, y) is ready once y sits in its final position
            let ready: Vec<usize> = (0..pending.len())
                .filter(|&i| {
                    let y = &pending[i].1;
                    match uppers.get(y) {
                        None => true,
                        Some(z) => state.contains(&on(y, z)),
                    }
                })
                .collect();
            let &pick = ready.choose(&mut rng).ok_or_else(|| {
                Error::UnsatisfiableGoal("no buildable goal relation remains".into())
            })?;
            let (x, y) = pending.swap_remove(pick);
            push(&mut state, self.act(PICK_UP, &[&x]), &mut plan)?;
            push(&mut state, self.act(STACK, &[&x, &y]), &mut plan)?;
        }

        if !is_goal_satisfied(&state, goal) {
            return Err(Error::UnsatisfiableGoal(
                "plan does not reach the goal".into(),
            ));
        }
        Ok(plan)
    }

    /// Replays a plan from `init`, returning the final state.
    pub fn simulate(&self, init: &State, plan: &[GroundedAction]) -> Result<State> {
        plan.iter().try_fold(init.clone(), |s, a| {
            let next = apply_action(&s, a)?;
            self.check_state(&next)?;
            Ok(next)
        })
    }

    /// A random consistent goal of `size` On/On-Table fluents, taken from a
    /// random target configuration.
    pub fn random_goal(&self, size: usize, seed: u64) -> Result<FluentSet> {
        let target = self.random_state(rng::derive(seed, 1));
        let mut candidates: Vec<Fluent> = target
            .fluents()
            .iter()
            .filter(|f| f.predicate == ON || f.predicate == ON_TABLE)
            .cloned()
            .collect();
        if size == 0 || size > candidates.len() {
            return Err(Error::GenerationFailure(format!(
                "goal size {size} outside 1..={}",
                candidates.len()
            )));
        }
        let mut r = rng::seeded(rng::derive(seed, 2));
        candidates.shuffle(&mut r);
        candidates.truncate(size);
        Ok(candidates.into_iter().collect())
    }
}

/// Lah numbers `L(n, k)` for `k = 0..=n`: arrangements of `n` labeled blocks
/// into `k` non-empty towers.
fn lah_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 1..=n {
        let mut next = vec![0.0; m + 1];
        for k in 1..=m {
            let stay = if k < m { (m + k - 1) as f64 * row[k] } else { 0.0 };
            next[k] = stay + row[k - 1];
        }
        row = next;
    }
    row
}

/// Uniform random tower arrangement of blocks `0..n`, towers listed bottom
/// to top. A configuration with `k` towers corresponds to exactly `k!`
/// (permutation, cut set) pairs, so drawing `k` with weight `L(n, k)` and
/// then a permutation plus `k - 1` cut points is uniform.
pub fn random_towers(n: usize, seed: u64) -> Vec<Vec<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let mut r = rng::seeded(seed);
    let weights = lah_row(n);
    let total: f64 = weights.iter().sum();
    let mut u = r.gen::<f64>() * total;
    let mut k = n;
    for (i, &w) in weights.iter().enumerate().skip(1) {
        if u < w {
            k = i;
            break;
        }
        u -= w;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut cuts = rand::seq::index::sample(&mut r, n - 1, k - 1).into_vec();
    cuts.sort_unstable();
    let mut towers = Vec::with_capacity(k);
    let mut start = 0;
    for c in cuts {
        towers.push(order[start..=c].to_vec());
        start = c + 1;
    }
    towers.push(order[start..].to_vec());
    towers
}
