//! Browser bindings. Every export takes numbers and returns a JSON string.

use serde_json::{json, Value};
use swampcast::engine::{deliveries_for_round, Message, Transmission};
use swampcast::geometry::{generate_placement, Network, PlacementSpec, Point, RadioParams};
use swampcast::lattice::{lattice_2d, run_algorithm_a2, lattice_plane_bound};
use swampcast::unknown::{run_broadcast, BroadcastOptions};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn positions(net: &Network) -> Value {
    net.positions().iter().map(|p| json!([p.x, p.y])).collect()
}

fn links(net: &Network) -> Value {
    let mut out = Vec::new();
    for u in 0..net.len() {
        for &v in net.neighbors(u).unwrap_or(&[]) {
            if u < v {
                out.push(json!([u, v]));
            }
        }
    }
    Value::Array(out)
}

/// A random plane network in a `side x side` square with unit range.
#[wasm_bindgen]
pub fn placement(side: f64, n: usize, s: f64, gamma: f64, seed: u64) -> Result<String, JsValue> {
    let params = RadioParams::unit(s, gamma).map_err(err)?;
    let net = generate_placement(&PlacementSpec::RandomPlane { width: side, height: side, n }, params, seed).map_err(err)?;
    Ok(json!({ "positions": positions(&net), "links": links(&net) }).to_string())
}

/// One round with the given transmitters on explicit plane points
/// (`xs`, `ys`). Per node: "tx", "heard:<sender>", "collision", "swamped" or "idle".
#[wasm_bindgen]
pub fn reception(xs: Vec<f64>, ys: Vec<f64>, s: f64, gamma: f64, transmitters: Vec<u32>) -> Result<String, JsValue> {
    let pts: Vec<Point> = xs.iter().zip(&ys).map(|(&x, &y)| Point::new(x, y)).collect();
    let net = Network::new(RadioParams::unit(s, gamma).map_err(err)?, swampcast::geometry::Dim::Plane, pts).map_err(err)?;
    if let Some(v) = transmitters.iter().find(|&&v| v as usize >= net.len()) {
        return Err(err(format!("no node {v}")));
    }
    let tx: Vec<Transmission> = transmitters
        .iter()
        .map(|&v| Transmission { node: v as usize, message: Message::hello(net.positions()[v as usize]) })
        .collect();
    let out = deliveries_for_round(&net, &tx).map_err(err)?;
    let mut state = vec!["idle".to_string(); net.len()];
    for &v in &transmitters {
        state[v as usize] = "tx".into();
    }
    for d in &out.deliveries {
        state[d.receiver] = format!("heard:{}", d.sender);
    }
    for &v in &out.collision_blocked {
        state[v] = "collision".into();
    }
    for &v in &out.swamp_blocked {
        state[v] = "swamped".into();
    }
    Ok(json!({ "state": state }).to_string())
}

/// Algorithm A² on the `sqrt(n) x sqrt(n)` lattice from the corner node.
#[wasm_bindgen]
pub fn lattice_wave(n: usize, r: u32, s: u32) -> Result<String, JsValue> {
    let net = lattice_2d(n, r, s).map_err(err)?;
    let res = run_algorithm_a2(n, r, s, 0).map_err(err)?;
    let bound = lattice_plane_bound(n, r, s).map_err(err)?;
    Ok(json!({
        "positions": positions(&net),
        "first": res.first_informed,
        "rounds": res.rounds_to_complete(),
        "bound": bound,
    })
    .to_string())
}

/// Algorithm B² from node 0 of a random plane network. `first` is null for
/// the source, which starts informed.
#[wasm_bindgen]
pub fn broadcast(side: f64, n: usize, s: f64, gamma: f64, seed: u64) -> Result<String, JsValue> {
    let params = RadioParams::unit(s, gamma).map_err(err)?;
    let net = generate_placement(&PlacementSpec::RandomPlane { width: side, height: side, n }, params, seed).map_err(err)?;
    let run = run_broadcast(&net, 0, BroadcastOptions::default()).map_err(err)?;
    Ok(json!({
        "positions": positions(&net),
        "links": links(&net),
        "first": run.result.first_informed,
        "discovery": run.discovery_rounds,
        "rounds": run.result.rounds_to_complete(),
        "bound": run.bound,
        "D": run.eccentricity,
        "coverage_failures": run.audit.coverage_failures.len(),
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reception_states() {
        // 0 -> 1 at distance 0.6; 2 is 0.1 from 0 and swamped
        let out = reception(vec![0.0, 0.6, 0.1], vec![0.0, 0.0, 0.0], 0.5, 0.1, vec![0]).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["state"], json!(["tx", "heard:0", "swamped"]));
    }

    #[test]
    fn wave_and_broadcast() {
        let v: Value = serde_json::from_str(&lattice_wave(64, 2, 0).unwrap()).unwrap();
        assert!(v["rounds"].as_u64().unwrap() <= v["bound"].as_u64().unwrap());
        let b: Value = serde_json::from_str(&broadcast(2.0, 8, 0.2, 0.5, 3).unwrap()).unwrap();
        assert!(b["first"].as_array().unwrap()[1..].iter().all(|x| !x.is_null()));
        assert!(placement(2.0, 8, 0.2, 0.5, 3).is_ok());
    }
}
