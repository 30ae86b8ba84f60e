//! Two agents that pass an unbounded counter back and forth.

use super::{parse_scenario, Scenario};
use crate::system::MultiAgentSystem;

/// `q :- not r(x)` and `s(x) :- r(x)` at one agent, `r(0)` and
/// `r(x+1) :- s(x)` at the other, over the integers `0..=n`.
pub fn chain_scenario(n: u32) -> Scenario {
    let text = format!(
        "[domain]
dmax {n}
var X : dist

[agent A1]
idb:
  q :- not r(X).
  s(X) :- r(X).
hin:
  r(X).

[agent A2]
idb:
  r(0).
  r(X+1) :- s(X).
hin:
  s(X).
"
    );
    parse_scenario(&text).expect("chain scenario parses")
}

pub fn chain_system(n: u32) -> MultiAgentSystem {
    chain_scenario(n)
        .build()
        .expect("chain scenario is well formed")
}
