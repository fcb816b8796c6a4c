//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page solves a small coherent-set problem once, then recolours and
//! recontours `u₀ + εu̇₀` as the user drags ε, and runs the Cheeger line
//! search on demand.

use dynlap::assembly::Method;
use dynlap::coherent::{extract_level_set, line_search_c, CurveTopology, LineSearchOptions};
use dynlap::dynamics::ModelSpec;
use dynlap::experiment::{preset, solve, Solved};
use wasm_bindgen::prelude::*;

/// Plain-Rust core of [`Session`], kept separate so it can be tested natively.
pub struct Demo {
    solved: Solved,
    u0: Vec<f64>,
    u_dot: Vec<f64>,
}

impl Demo {
    /// `model` is `double-gyre` (param = flow time t1) or `standard-map`
    /// (param = a); `cells` per direction; `method` is `cg` or `to`.
    pub fn new(model: &str, param: f64, cells: usize, method: &str) -> Result<Demo, String> {
        let mut config = preset(model).map_err(|e| e.to_string())?;
        config.model = match config.model {
            ModelSpec::DoubleGyre { t0, .. } => ModelSpec::double_gyre(t0, param),
            ModelSpec::StandardMap { .. } => ModelSpec::standard_map(param),
            other => other,
        };
        config.method = method.parse::<Method>().map_err(|e| e.to_string())?;
        if config.method == Method::Cg {
            config.quadrature_degree = 2;
        }
        config.mesh.nx = cells;
        config.mesh.ny = cells;
        config.eps.clear();
        let solved = solve(&config).map_err(|e| e.to_string())?;
        let u0 = solved.full(&solved.pair().u);
        let u_dot = solved.full(&solved.response.u_dot);
        Ok(Demo { solved, u0, u_dot })
    }

    pub fn lambda0(&self) -> f64 {
        self.solved.pair().lambda
    }

    pub fn lambda_dot(&self) -> f64 {
        self.solved.response.lambda_dot
    }

    /// Node coordinates as `[x0, y0, x1, y1, ...]`, ghost nodes included.
    pub fn nodes(&self) -> Vec<f64> {
        self.solved.mesh.nodes().iter().flat_map(|p| [p.x, p.y]).collect()
    }

    /// Triangle node indices, three per triangle.
    pub fn triangles(&self) -> Vec<u32> {
        self.solved
            .mesh
            .triangles()
            .iter()
            .flat_map(|t| t.map(|v| v as u32))
            .collect()
    }

    fn prediction(&self, eps: f64) -> Vec<f64> {
        self.u0.iter().zip(&self.u_dot).map(|(a, b)| a + eps * b).collect()
    }

    /// `u₀ + εu̇₀` at every node.
    pub fn field(&self, eps: f64) -> Vec<f64> {
        self.solved.mesh.expand_to_nodes(&self.prediction(eps))
    }

    /// Segments of `{u₀ + εu̇₀ = c}` as `[x0, y0, x1, y1, ...]`.
    pub fn contour(&self, eps: f64, c: f64) -> Result<Vec<f64>, String> {
        let curve = extract_level_set(&self.solved.mesh, &self.prediction(eps), c).map_err(|e| e.to_string())?;
        Ok(curve.segments.iter().flat_map(|[p, q]| [p.x, p.y, q.x, q.y]).collect())
    }

    /// Optimal Cheeger level of `u₀` and its value, `[c*, h*]`.
    pub fn line_search(&self, grid_size: usize) -> Result<Vec<f64>, String> {
        let opts = LineSearchOptions {
            grid_size,
            topology: CurveTopology::Contractible,
            ..Default::default()
        };
        let ls = line_search_c(&self.solved.mesh, &self.u0, self.solved.model.as_ref(), &opts)
            .map_err(|e| e.to_string())?;
        Ok(vec![ls.c_star, ls.h_star])
    }
}

#[wasm_bindgen]
pub struct Session(Demo);

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new(model: &str, param: f64, cells: usize, method: &str) -> Result<Session, JsError> {
        Demo::new(model, param, cells, method).map(Session).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(getter)]
    pub fn lambda0(&self) -> f64 {
        self.0.lambda0()
    }

    #[wasm_bindgen(getter, js_name = lambdaDot)]
    pub fn lambda_dot(&self) -> f64 {
        self.0.lambda_dot()
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.0.nodes()
    }

    pub fn triangles(&self) -> Vec<u32> {
        self.0.triangles()
    }

    pub fn field(&self, eps: f64) -> Vec<f64> {
        self.0.field(eps)
    }

    pub fn contour(&self, eps: f64, c: f64) -> Result<Vec<f64>, JsError> {
        self.0.contour(eps, c).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = lineSearch)]
    pub fn line_search(&self, grid_size: usize) -> Result<Vec<f64>, JsError> {
        self.0.line_search(grid_size).map_err(|e| JsError::new(&e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_gyre_demo() {
        let d = Demo::new("double-gyre", 0.6, 20, "to").unwrap();
        assert!(d.lambda0() < 0.0 && d.lambda_dot() < 0.0);
        let n = d.nodes().len() / 2;
        assert_eq!(d.field(0.1).len(), n);
        assert!(d.triangles().iter().all(|&v| (v as usize) < n));
        let cs = d.line_search(20).unwrap();
        assert!(cs[0] > 0.0 && cs[1] > 0.0);
        assert_eq!(d.contour(0.0, cs[0]).unwrap().len() % 4, 0);
    }

    #[test]
    fn standard_map_demo() {
        let d = Demo::new("standard-map", 0.98, 16, "cg").unwrap();
        assert!(d.lambda0() < 0.0);
        assert!(!d.contour(0.2, 0.0).unwrap().is_empty());
        assert!(Demo::new("nope", 1.0, 10, "to").is_err());
        assert!(Demo::new("double-gyre", 0.6, 10, "xx").is_err());
    }
}
