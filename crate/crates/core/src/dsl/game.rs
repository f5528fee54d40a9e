use serde_json::{json, Value};

use super::{DslError, FORMAT_VERSION};
use crate::topical::{Action, GameError, GameSpec, GameState, Player};

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> DslError {
    DslError::Schema { pointer: pointer.into(), message: message.into() }
}

fn number(v: &Value, pointer: &str) -> Result<f64, DslError> {
    v.as_f64().ok_or_else(|| schema(pointer, "expected a number"))
}

/// Parses a `.game.json` document:
///
/// ```json
/// { "format": 1,
///   "states": [ { "player": "max",
///                 "actions": [ { "payoff": 1.5, "transition": [0.5, 0.5] } ] } ] }
/// ```
pub fn parse_game(text: &str) -> Result<GameSpec, DslError> {
    let root: Value = serde_json::from_str(text).map_err(|e| DslError::Parse {
        line: e.line(),
        column: e.column(),
        expected: vec!["JSON".into()],
        found: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| schema("", "expected an object"))?;
    match obj.get("format").and_then(Value::as_u64) {
        Some(f) if f as usize == FORMAT_VERSION => {}
        Some(f) => return Err(schema("/format", format!("unsupported format {f}, expected {FORMAT_VERSION}"))),
        None => return Err(schema("/format", "missing integer field")),
    }
    let states = obj.get("states").and_then(Value::as_array).ok_or_else(|| schema("/states", "expected an array"))?;
    let mut out = Vec::with_capacity(states.len());
    for (s, st) in states.iter().enumerate() {
        let base = format!("/states/{s}");
        let player = match st.get("player").and_then(Value::as_str) {
            Some("max") => Player::Max,
            Some("min") => Player::Min,
            Some(other) => {
                return Err(schema(format!("{base}/player"), format!("expected \"max\" or \"min\", found \"{other}\"")))
            }
            None => return Err(schema(format!("{base}/player"), "missing string field")),
        };
        let actions = st
            .get("actions")
            .and_then(Value::as_array)
            .ok_or_else(|| schema(format!("{base}/actions"), "expected an array"))?;
        let mut acts = Vec::with_capacity(actions.len());
        for (a, act) in actions.iter().enumerate() {
            let ab = format!("{base}/actions/{a}");
            let payoff = number(
                act.get("payoff").ok_or_else(|| schema(format!("{ab}/payoff"), "missing field"))?,
                &format!("{ab}/payoff"),
            )?;
            let row = act
                .get("transition")
                .and_then(Value::as_array)
                .ok_or_else(|| schema(format!("{ab}/transition"), "expected an array"))?;
            let transition = row
                .iter()
                .enumerate()
                .map(|(t, v)| number(v, &format!("{ab}/transition/{t}")))
                .collect::<Result<Vec<_>, _>>()?;
            acts.push(Action { payoff, transition });
        }
        out.push(GameState { player, actions: acts });
    }
    let game = GameSpec { states: out };
    game.validate().map_err(|e| {
        let pointer = match &e {
            GameError::NoStates => "/states".to_string(),
            GameError::NoActions { state } => format!("/states/{state}/actions"),
            GameError::TransitionLength { state, action, .. } | GameError::NotStochastic { state, action, .. } => {
                format!("/states/{state}/actions/{action}/transition")
            }
            GameError::BadProbability { state, action, target, .. } => {
                format!("/states/{state}/actions/{action}/transition/{target}")
            }
            GameError::NonFinitePayoff { state, action } => format!("/states/{state}/actions/{action}/payoff"),
        };
        schema(pointer, e.to_string())
    })?;
    Ok(game)
}

pub fn serialize_game(game: &GameSpec) -> String {
    let states: Vec<Value> = game
        .states
        .iter()
        .map(|st| {
            json!({
                "player": match st.player { Player::Max => "max", Player::Min => "min" },
                "actions": st.actions.iter().map(|a| json!({ "payoff": a.payoff, "transition": a.transition })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({ "format": FORMAT_VERSION, "states": states });
    serde_json::to_string_pretty(&doc).expect("game serializes") + "\n"
}
