//! Session topics: one classification category per action, chosen against a
//! session-wide category profile so that topics recur across the session.

use std::collections::HashMap;

use crate::annotate::{AnnotatedSession, LabelList};
use crate::scalar::Weight;

/// Topic given to actions for which no category can be found or inherited.
pub const UNCLASSIFIED: &str = "UNCLASSIFIED";

pub const DEFAULT_EPSILON: f64 = 0.2;

/// Category weights summed over all actions of a session, ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionProfile<W> {
    profile: LabelList<W>,
    rank: HashMap<String, usize>,
}

impl<W: Weight> SessionProfile<W> {
    pub fn from_lists<'a, I>(lists: I) -> Self
    where
        I: IntoIterator<Item = &'a LabelList<W>>,
    {
        let profile = LabelList::from_weights(
            lists
                .into_iter()
                .flat_map(|l| l.entries().iter().map(|(c, w)| (c.clone(), *w))),
        );
        let rank = profile
            .labels()
            .enumerate()
            .map(|(i, c)| (c.to_owned(), i))
            .collect();
        Self { profile, rank }
    }

    /// 0 is the heaviest category; unknown categories rank below all known ones.
    pub fn rank(&self, category: &str) -> usize {
        self.rank.get(category).copied().unwrap_or(usize::MAX)
    }

    pub fn list(&self) -> &LabelList<W> {
        &self.profile
    }
}

pub fn session_category_profile<W: Weight>(session: &AnnotatedSession<W>) -> SessionProfile<W> {
    SessionProfile::from_lists(session.actions.iter().map(|a| &a.categories))
}

/// Pushes session-common categories forward past neighbours of similar weight.
///
/// Adjacent entries `(a, wa), (b, wb)` are swapped while `wb >= (1 - epsilon) * wa`
/// and the profile ranks `b` strictly above `a`; passes repeat until stable.
/// Every swap removes one inversion with respect to the profile order, so at most
/// `n^2` swaps happen. Entries keep their original weights.
pub fn rerank_action_categories<W: Weight>(
    categories: &LabelList<W>,
    profile: &SessionProfile<W>,
    epsilon: W,
) -> LabelList<W> {
    let mut entries = categories.entries().to_vec();
    let keep = W::one() - epsilon;
    loop {
        let mut swapped = false;
        for i in 0..entries.len().saturating_sub(1) {
            let (ref a, wa) = entries[i];
            let (ref b, wb) = entries[i + 1];
            if wb >= keep * wa && profile.rank(b) < profile.rank(a) {
                entries.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    LabelList::from_ordered(entries)
}

/// Re-ranks every action's categories against the session profile (in place) and
/// sets `session_topic` on every action.
///
/// A search takes its top category. A document view inherits the topic of the
/// nearest preceding search; without one it takes its own top category. An action
/// left without a category inherits the previous action's topic, and the first
/// such action of a session gets [`UNCLASSIFIED`].
pub fn assign_session_topics<W: Weight>(session: &mut AnnotatedSession<W>, epsilon: W) {
    let profile = session_category_profile(session);
    let mut last_search_topic: Option<String> = None;
    let mut previous_topic: Option<String> = None;
    for action in &mut session.actions {
        action.categories = rerank_action_categories(&action.categories, &profile, epsilon);
        let own = action.categories.top().map(str::to_owned);
        let topic = if action.kind().is_search() {
            own
        } else {
            last_search_topic.clone().or(own)
        }
        .or_else(|| previous_topic.clone())
        .unwrap_or_else(|| UNCLASSIFIED.to_owned());
        if action.kind().is_search() {
            last_search_topic = Some(topic.clone());
        }
        previous_topic = Some(topic.clone());
        action.session_topic = Some(topic);
    }
}
