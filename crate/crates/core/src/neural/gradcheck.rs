//! Central-difference validation of analytic gradients.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{Graph, Var};
use super::param::ParamStore;
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub checked: usize,
}

/// Denominator floor for relative error; below it the comparison is absolute.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compare `d loss / d theta` from the tape against `(f(θ+ε) − f(θ−ε)) / 2ε`.
///
/// `loss` must build a scalar on the given graph deterministically.
/// `max_coords` caps the number of checked coordinates (sampled with
/// `seed`); `None` checks every coordinate.
pub fn finite_diff_check<F>(
    store: &mut ParamStore<f64>,
    loss: F,
    eps: f64,
    max_coords: Option<usize>,
    seed: u64,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<'_, f64>) -> Result<Var>,
{
    let grads = {
        let mut g = Graph::new(store);
        let out = loss(&mut g)?;
        g.backward(out)?
    };
    let mut coords: Vec<(usize, usize)> = store
        .iter()
        .flat_map(|(id, p)| (0..p.value.len()).map(move |j| (id.index(), j)))
        .collect();
    if let Some(cap) = max_coords {
        if coords.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            coords.shuffle(&mut rng);
            coords.truncate(cap);
        }
    }
    let eval = |store: &ParamStore<f64>| -> Result<f64> {
        let mut g = Graph::new(store);
        let out = loss(&mut g)?;
        Ok(g.value(out).data()[0])
    };
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: String::new(),
        checked: 0,
    };
    let ids: Vec<_> = store.iter().map(|(id, _)| id).collect();
    for (pi, j) in coords {
        let id = ids[pi];
        let analytic = grads.get(id).map_or(0.0, |g| g.data()[j]);
        let orig = store.get(id).value.data()[j];
        store.get_mut(id).value.data_mut()[j] = orig + eps;
        let plus = eval(store)?;
        store.get_mut(id).value.data_mut()[j] = orig - eps;
        let minus = eval(store)?;
        store.get_mut(id).value.data_mut()[j] = orig;
        let numeric = (plus - minus) / (2.0 * eps);
        let err = relative_error(analytic, numeric);
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_param = store.get(id).name.clone();
        }
        report.checked += 1;
    }
    Ok(report)
}
