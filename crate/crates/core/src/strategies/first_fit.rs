use crate::engine::{ColorChoice, Rules, TokenState};
use crate::graph::bit;

use super::{AlgorithmStrategy, StrategyError};

/// Baseline: the lowest-indexed existing colour that can take the token,
/// otherwise a new colour.
#[derive(Debug, Clone, Default)]
pub struct FirstFit {
    /// Supports in first-use order.
    colors: Vec<u64>,
}

impl FirstFit {
    pub fn new() -> Self {
        Self::default()
    }
}

impl AlgorithmStrategy for FirstFit {
    fn name(&self) -> &'static str {
        "first-fit"
    }

    fn reset(&mut self) {
        self.colors.clear();
    }

    fn respond(&mut self, rules: &Rules, _state: &TokenState, v: usize) -> Result<ColorChoice, StrategyError> {
        let blocked = rules.graph().neighbors(v) | bit(v);
        match self.colors.iter().position(|&s| s & blocked == 0) {
            Some(i) => {
                let support = self.colors[i];
                self.colors[i] |= bit(v);
                Ok(ColorChoice::Extend(support))
            }
            None => {
                self.colors.push(bit(v));
                Ok(ColorChoice::New)
            }
        }
    }

    fn memo_key(&self) -> Vec<u64> {
        self.colors.clone()
    }

    fn clone_box(&self) -> Box<dyn AlgorithmStrategy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GameConfig;
    use crate::graph::NamedGraph;
    use crate::strategies::testing::play_sequence;

    #[test]
    fn examples() {
        let cfg = |g| GameConfig::named(g, 2).unwrap();
        assert_eq!(
            play_sequence(&mut FirstFit::new(), cfg(NamedGraph::Path(3)), &[1]),
            vec![0]
        );
        assert_eq!(
            play_sequence(&mut FirstFit::new(), cfg(NamedGraph::Path(3)), &[0, 2]),
            vec![0, 0]
        );
        assert_eq!(
            play_sequence(&mut FirstFit::new(), cfg(NamedGraph::Complete(2)), &[0, 1]),
            vec![0, 1]
        );
    }
}
