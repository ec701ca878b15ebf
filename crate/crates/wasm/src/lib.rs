//! Browser bindings: three operations returning JSON for the static demo page.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gbp_core::dispatch::{dispatch, Algo, RunReport};
use gbp_core::generate::{generate, GeneratorConfig, Regime};
use gbp_core::hardness::{catalog, construct1, construct2, solve_vc_exact, Construction};
use gbp_core::model::{Instance, SolutionFile};

#[derive(Serialize)]
pub struct View {
    pub instance: Instance,
    /// Vertex positions scaled into the unit square.
    pub layout: Vec<[f64; 2]>,
    pub report: RunReport,
    pub solution: Option<SolutionFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<u64>,
}

fn layout(instance: &Instance) -> Vec<[f64; 2]> {
    let n = instance.vertex_count();
    let raw: Vec<[f64; 2]> = match instance.embedding() {
        Some(pts) => pts.iter().map(|p| [p[0] as f64, -(p[1] as f64)]).collect(),
        None => (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n.max(1) as f64;
                [t.cos(), t.sin()]
            })
            .collect(),
    };
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in &raw {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    raw.iter().map(|p| [(p[0] - lo[0]) / span, (p[1] - lo[1]) / span]).collect()
}

fn view(instance: Instance, algo: Algo, predicted: Option<u64>) -> Result<View, String> {
    let out = dispatch(&instance, algo).map_err(|e| e.to_string())?;
    let solution = out.solution.as_ref().map(|s| s.to_file(&instance));
    Ok(View { layout: layout(&instance), report: out.report, solution, predicted, instance })
}

fn parse_algo(algo: &str) -> Result<Algo, String> {
    Algo::parse(algo).ok_or_else(|| format!("unknown algorithm {algo}"))
}

pub fn random_view(regime: &str, n: usize, r: usize, seed: u64, algo: &str) -> Result<View, String> {
    let regime = Regime::parse(regime).ok_or_else(|| format!("unknown regime {regime}"))?;
    if regime == Regime::Gadget {
        return Err("use the gadget operation for gadget instances".into());
    }
    view(generate(&GeneratorConfig::new(regime, n, r, seed)), parse_algo(algo)?, None)
}

pub fn instance_view(json: &str, algo: &str) -> Result<View, String> {
    let instance: Instance = serde_json::from_str(json).map_err(|e| e.to_string())?;
    instance.validate().map_err(|e| e.to_string())?;
    view(instance, parse_algo(algo)?, None)
}

pub fn gadget_view(source: &str, construction: u8) -> Result<View, String> {
    let (_, vc) = catalog().into_iter().find(|(name, _)| *name == source).ok_or_else(|| format!("unknown source graph {source}"))?;
    let construction = match construction {
        1 => Construction::One,
        2 => Construction::Two,
        c => return Err(format!("unknown construction {c}")),
    };
    let (instance, map) = match construction {
        Construction::One => construct1(&vc),
        Construction::Two => construct2(&vc).map_err(|e| e.to_string())?,
    };
    let predicted = map.target(solve_vc_exact(&vc).len());
    view(instance, Algo::Exact, Some(predicted))
}

fn to_js(result: Result<View, String>) -> Result<String, JsValue> {
    result.map(|v| serde_json::to_string(&v).expect("serializable")).map_err(|e| JsValue::from_str(&e))
}

/// Generates a seeded instance of a regime and solves it.
#[wasm_bindgen]
pub fn solve_random(regime: &str, n: usize, r: usize, seed: u64, algo: &str) -> Result<String, JsValue> {
    to_js(random_view(regime, n, r, seed, algo))
}

/// Solves a pasted instance.
#[wasm_bindgen]
pub fn solve_json(json: &str, algo: &str) -> Result<String, JsValue> {
    to_js(instance_view(json, algo))
}

/// Builds a gadget instance from a small cubic planar graph and solves it exactly.
#[wasm_bindgen]
pub fn gadget(source: &str, construction: u8) -> Result<String, JsValue> {
    to_js(gadget_view(source, construction))
}

#[wasm_bindgen]
pub fn gadget_sources() -> String {
    let names: Vec<&str> = catalog().into_iter().map(|(n, _)| n).collect();
    serde_json::to_string(&names).expect("serializable")
}
