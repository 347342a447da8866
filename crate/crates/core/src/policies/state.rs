//! Per-prior ledgers and the surviving-set state shared by the
//! elimination-style policies.

/// Bookkeeping for one candidate prior: the steps on which it was the
/// acting prior, with running error and confidence-width sums.
#[derive(Clone, Debug)]
pub struct PriorLedger {
    pub prior_id: String,
    /// Iteration indices on which this prior was selected (`S^p`).
    pub selected_steps: Vec<u32>,
    /// Running sum of prediction errors over `selected_steps`.
    pub eta_sum: f64,
    /// Running sum of `beta_i * sigma_i` at the selection points.
    pub beta_sigma_sum: f64,
    /// Running sum of observed values over `selected_steps`.
    pub value_sum: f64,
    pub eliminated: bool,
    /// Threshold excess recorded when the prior was eliminated.
    pub violation: Option<f64>,
}

impl PriorLedger {
    fn new(prior_id: String) -> Self {
        Self {
            prior_id,
            selected_steps: Vec::new(),
            eta_sum: 0.0,
            beta_sigma_sum: 0.0,
            value_sum: 0.0,
            eliminated: false,
            violation: None,
        }
    }

    pub fn times_selected(&self) -> usize {
        self.selected_steps.len()
    }
}

/// Surviving prior set plus one ledger per registered prior. Prior indices
/// follow registration order and double as the tie-break order.
#[derive(Clone, Debug)]
pub struct PolicyState {
    ledgers: Vec<PriorLedger>,
}

impl PolicyState {
    pub fn new(prior_ids: impl IntoIterator<Item = String>) -> Self {
        Self {
            ledgers: prior_ids.into_iter().map(PriorLedger::new).collect(),
        }
    }

    pub fn num_priors(&self) -> usize {
        self.ledgers.len()
    }

    pub fn is_surviving(&self, index: usize) -> bool {
        !self.ledgers[index].eliminated
    }

    /// Indices of surviving priors, in registration order.
    pub fn surviving(&self) -> Vec<usize> {
        (0..self.ledgers.len()).filter(|&i| self.is_surviving(i)).collect()
    }

    pub fn num_surviving(&self) -> usize {
        self.ledgers.iter().filter(|l| !l.eliminated).count()
    }

    pub fn ledger(&self, index: usize) -> &PriorLedger {
        &self.ledgers[index]
    }

    pub fn ledger_mut(&mut self, index: usize) -> &mut PriorLedger {
        &mut self.ledgers[index]
    }

    pub fn ledgers(&self) -> &[PriorLedger] {
        &self.ledgers
    }

    /// Among eliminated priors, the one with the smallest recorded
    /// threshold excess; used by the fail-soft recovery path.
    pub fn smallest_violation(&self) -> Option<usize> {
        self.ledgers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.eliminated)
            .min_by(|(_, a), (_, b)| {
                let av = a.violation.unwrap_or(f64::INFINITY);
                let bv = b.violation.unwrap_or(f64::INFINITY);
                av.partial_cmp(&bv).unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surviving_tracks_elimination() {
        let mut st = PolicyState::new(["a".into(), "b".into(), "c".into()]);
        assert_eq!(st.surviving(), vec![0, 1, 2]);
        st.ledger_mut(1).eliminated = true;
        st.ledger_mut(1).violation = Some(0.5);
        assert_eq!(st.surviving(), vec![0, 2]);
        assert_eq!(st.num_surviving(), 2);
        assert_eq!(st.smallest_violation(), Some(1));
    }

    #[test]
    fn smallest_violation_picks_minimum() {
        let mut st = PolicyState::new(["a".into(), "b".into(), "c".into()]);
        st.ledger_mut(0).eliminated = true;
        st.ledger_mut(0).violation = Some(2.0);
        st.ledger_mut(2).eliminated = true;
        st.ledger_mut(2).violation = Some(0.25);
        assert_eq!(st.smallest_violation(), Some(2));
    }
}
