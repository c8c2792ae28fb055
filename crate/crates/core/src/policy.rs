//! The uniform decision interface every matching algorithm implements.
//!
//! A [`Policy`] is instance-independent configuration (a threshold, a trained
//! model). Binding it to an instance yields a [`BoundPolicy`], which may hold
//! per-instance precomputation such as a VTG memo table or an LP solution.

use rand::Rng as _;

use crate::error::Result;
use crate::model::{Action, Instance, MatchingState};
use crate::rng::Rng;

pub trait Policy: Send + Sync {
    fn id(&self) -> String;

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>>;
}

pub trait BoundPolicy {
    /// The action distribution at an arrival. Deterministic policies return a
    /// single entry with mass 1.
    fn distribution(&mut self, state: &MatchingState) -> Result<Vec<(Action, f64)>>;

    fn act(&mut self, state: &MatchingState, rng: &mut Rng) -> Result<Action> {
        let dist = self.distribution(state)?;
        Ok(sample_action(&dist, rng))
    }
}

/// Draw from an action distribution. A single-entry distribution consumes no
/// randomness.
pub fn sample_action(dist: &[(Action, f64)], rng: &mut Rng) -> Action {
    match dist {
        [] => Action::Skip,
        [(a, _)] => *a,
        _ => {
            let r: f64 = rng.random();
            let mut acc = 0.0;
            for &(a, p) in dist {
                acc += p;
                if r < acc {
                    return a;
                }
            }
            dist.last().map_or(Action::Skip, |&(a, _)| a)
        }
    }
}

/// Never matches anything.
#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysSkip;

impl Policy for AlwaysSkip {
    fn id(&self) -> String {
        "skip".into()
    }

    fn bind<'a>(&'a self, _inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        Ok(Box::new(AlwaysSkip))
    }
}

impl BoundPolicy for AlwaysSkip {
    fn distribution(&mut self, _state: &MatchingState) -> Result<Vec<(Action, f64)>> {
        Ok(vec![(Action::Skip, 1.0)])
    }
}

/// Adapts a per-state decision function into a deterministic policy.
pub struct FnPolicy<F> {
    name: String,
    decide: F,
}

impl<F> FnPolicy<F>
where
    F: Fn(&Instance, &MatchingState) -> Result<Action> + Send + Sync,
{
    pub fn new(name: impl Into<String>, decide: F) -> Self {
        FnPolicy { name: name.into(), decide }
    }
}

impl<F> Policy for FnPolicy<F>
where
    F: Fn(&Instance, &MatchingState) -> Result<Action> + Send + Sync,
{
    fn id(&self) -> String {
        self.name.clone()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        Ok(Box::new(BoundFn { inst, decide: &self.decide }))
    }
}

struct BoundFn<'a, F> {
    inst: &'a Instance,
    decide: &'a F,
}

impl<F> BoundPolicy for BoundFn<'_, F>
where
    F: Fn(&Instance, &MatchingState) -> Result<Action>,
{
    fn distribution(&mut self, state: &MatchingState) -> Result<Vec<(Action, f64)>> {
        Ok(vec![((self.decide)(self.inst, state)?, 1.0)])
    }
}
