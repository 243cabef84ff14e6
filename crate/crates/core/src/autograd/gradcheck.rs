use super::store::ParamStore;
use super::tape::{Tape, Var};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Coordinates compared.
    pub checked: usize,
    /// Coordinates whose perturbation came within ten steps of a kink.
    pub skipped: usize,
    /// Tensor name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
}

/// Compares tape gradients of `f` with central differences of step `h`
/// over every parameter coordinate of `store`.
///
/// `rel = |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)`.
/// A coordinate is skipped when moving it shifts some `max`/`abs` input that
/// sits within `10h` of its kink, since the two one-sided slopes differ there.
pub fn finite_diff_check<F>(f: F, store: &ParamStore, h: f64) -> GradCheckReport
where
    F: for<'t> Fn(&'t Tape, &ParamStore) -> Var<'t>,
{
    let tape = Tape::new();
    let root = f(&tape, store);
    let analytic = tape.backward(root).param_grads(store);
    let base_margins = tape.kink_margins();

    let eval = |s: &ParamStore| {
        let t = Tape::new();
        let v = f(&t, s).item();
        (v, t.kink_margins())
    };

    let mut report = GradCheckReport { max_rel_error: 0.0, checked: 0, skipped: 0, worst: None };
    let mut probe = store.clone();
    for tensor in store.tensors() {
        let id = store.id(&tensor.name).expect("tensor registered");
        for k in 0..tensor.data.len() {
            let orig = tensor.data[k];
            probe.data_mut(id)[k] = orig + h;
            let (up, m_up) = eval(&probe);
            probe.data_mut(id)[k] = orig - h;
            let (down, m_down) = eval(&probe);
            probe.data_mut(id)[k] = orig;

            if near_kink(&base_margins, &m_up, &m_down, h) {
                report.skipped += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * h);
            let a = analytic.get(id)[k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            report.checked += 1;
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(rel);
                report.worst = Some((tensor.name.clone(), k));
            }
        }
    }
    report
}

fn near_kink(base: &[f64], up: &[f64], down: &[f64], h: f64) -> bool {
    if base.len() != up.len() || base.len() != down.len() {
        return true;
    }
    base.iter().zip(up).zip(down).any(|((&b, &u), &d)| {
        let moved = (u - b).abs() > 1e-12 || (d - b).abs() > 1e-12;
        moved && (b.abs() < 10.0 * h || u.signum() != b.signum() || d.signum() != b.signum())
    })
}
