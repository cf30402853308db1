//! Channel kinetic schemes: states, class partition, rates and electrical
//! parameters of each state.

use super::generator::{
    stationary_distribution, stationary_unchecked, Distribution, GeneratorMatrix,
};
use super::rates::{RateFunction, VOLTAGE_BOX};
use super::KineticsError;

/// Voltages at which structural invariants are sampled.
const INVARIANT_SAMPLES: usize = 251;

/// Sodium maximal conductance (mS/cm²).
pub const NA_CONDUCTANCE: f64 = 120.0;
/// Sodium reversal potential relative to rest (mV).
pub const NA_REVERSAL: f64 = 115.0;
/// Axon radius (cm) and axial resistivity (Ω·cm) used for the diffusion
/// constant `a / (2R)` of the sodium example.
pub const AXON_RADIUS: f64 = 0.0238;
pub const AXIAL_RESISTIVITY: f64 = 34.5;

/// Diffusion coefficient `a / (2R)` of the sodium cable example.
pub fn na_diffusion() -> f64 {
    AXON_RADIUS / (2.0 * AXIAL_RESISTIVITY)
}

/// (child, parent, parent -> child, child -> parent).
type TreeEdge = (usize, usize, usize, usize);

/// One directed transition `from → to` at rate `factor · rate(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub factor: f64,
    pub rate: RateFunction,
}

impl Transition {
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        self.factor * self.rate.eval(v)
    }
}

/// A finite channel state space with a class partition into fast blocks.
#[derive(Debug, Clone)]
pub struct KineticScheme {
    name: String,
    states: Vec<String>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    /// Position of each state inside its class.
    class_pos: Vec<usize>,
    transitions: Vec<Transition>,
    /// Transition indices grouped by source state.
    outgoing: Vec<Vec<usize>>,
    /// Distinct rate functions, and the one each transition scales.
    kinds: Vec<RateFunction>,
    kind_of: Vec<usize>,
    /// Within-class transitions of each class as (entry, diagonal entry,
    /// transition) in the class generator's row-major layout.
    class_moves: Vec<Vec<(usize, usize, usize)>>,
    /// For classes whose transition graph is a tree of reversible pairs:
    /// (child, parent, parent -> child, child -> parent) in class positions
    /// and transition indices, parents first.
    class_trees: Vec<Option<Vec<TreeEdge>>>,
    conductance: Vec<f64>,
    reversal: Vec<f64>,
    rate_bound: f64,
    rate_floor: f64,
}

impl KineticScheme {
    /// Builds and validates a scheme. Class labels must cover `0..l`.
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        class_of: Vec<usize>,
        transitions: Vec<Transition>,
        conductance: Vec<f64>,
        reversal: Vec<f64>,
    ) -> Result<Self, KineticsError> {
        let m = states.len();
        let invalid = |msg: String| Err(KineticsError::InvalidScheme(msg));
        if m == 0 {
            return invalid("no states".into());
        }
        if class_of.len() != m || conductance.len() != m || reversal.len() != m {
            return invalid(format!(
                "{m} states but {} class labels, {} conductances, {} reversal potentials",
                class_of.len(),
                conductance.len(),
                reversal.len()
            ));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return invalid(format!("duplicate state `{s}`"));
            }
        }
        let n_classes = class_of.iter().max().map_or(0, |c| c + 1);
        let mut classes = vec![Vec::new(); n_classes];
        let mut class_pos = vec![0; m];
        for (s, &c) in class_of.iter().enumerate() {
            class_pos[s] = classes[c].len();
            classes[c].push(s);
        }
        if let Some(j) = classes.iter().position(Vec::is_empty) {
            return invalid(format!("class {j} is empty"));
        }
        if let Some((s, c)) = conductance.iter().enumerate().find(|(_, c)| !(**c >= 0.0)) {
            return invalid(format!("negative conductance {c} for `{}`", states[s]));
        }
        if reversal.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite reversal potential".into());
        }
        let mut outgoing = vec![Vec::new(); m];
        for (k, t) in transitions.iter().enumerate() {
            if t.from >= m || t.to >= m || t.from == t.to {
                return invalid(format!("bad transition {} -> {}", t.from, t.to));
            }
            if !(t.factor > 0.0 && t.factor.is_finite()) {
                return invalid(format!("bad multiplicity {}", t.factor));
            }
            if transitions[..k]
                .iter()
                .any(|u| u.from == t.from && u.to == t.to)
            {
                return invalid(format!(
                    "duplicate transition {} -> {}",
                    states[t.from], states[t.to]
                ));
            }
            outgoing[t.from].push(k);
        }
        let mut kinds: Vec<RateFunction> = Vec::new();
        let kind_of = transitions
            .iter()
            .map(|t| {
                kinds.iter().position(|k| *k == t.rate).unwrap_or_else(|| {
                    kinds.push(t.rate);
                    kinds.len() - 1
                })
            })
            .collect();
        let class_moves = classes
            .iter()
            .map(|members| {
                let n = members.len();
                transitions
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| {
                        class_of[t.from] == class_of[t.to] && members.contains(&t.from)
                    })
                    .map(|(k, t)| {
                        let a = class_pos[t.from];
                        (a * n + class_pos[t.to], a * n + a, k)
                    })
                    .collect()
            })
            .collect();

        let class_trees = classes
            .iter()
            .map(|members| tree_edges(members, &transitions, &class_pos))
            .collect();

        let mut scheme = Self {
            name: name.into(),
            states,
            class_of,
            classes,
            class_pos,
            transitions,
            outgoing,
            kinds,
            kind_of,
            class_moves,
            class_trees,
            conductance,
            reversal,
            rate_bound: 0.0,
            rate_floor: f64::INFINITY,
        };

        let (lo, hi) = VOLTAGE_BOX;
        let (mut max_rate, mut min_rate) = (0.0f64, f64::INFINITY);
        for k in 0..INVARIANT_SAMPLES {
            let v = lo + (hi - lo) * k as f64 / (INVARIANT_SAMPLES - 1) as f64;
            for t in &scheme.transitions {
                let r = t.eval(v);
                if !(r > 0.0 && r.is_finite()) {
                    return invalid(format!(
                        "rate {} -> {} is {r} at {v} mV",
                        scheme.states[t.from], scheme.states[t.to]
                    ));
                }
                max_rate = max_rate.max(r);
                min_rate = min_rate.min(r);
            }
            for j in 0..scheme.n_classes() {
                let blocks = scheme.class_generator(j, v)?.communicating_classes();
                if blocks.len() > 1 {
                    return Err(KineticsError::Reducible {
                        blocks: blocks
                            .into_iter()
                            .map(|b| b.into_iter().map(|p| scheme.classes[j][p]).collect())
                            .collect(),
                    });
                }
            }
        }
        scheme.rate_bound = 1.05 * max_rate;
        scheme.rate_floor = min_rate;
        Ok(scheme)
    }

    /// The eight-state sodium channel `m_i h_j`: class 0 holds the `h_0`
    /// states, class 1 the `h_1` states, `m_3 h_1` is the only open state.
    pub fn na8() -> Self {
        let mut states = Vec::new();
        let mut class_of = Vec::new();
        for h in 0..2 {
            for m in 0..4 {
                states.push(format!("m{m}h{h}"));
                class_of.push(h);
            }
        }
        let idx = |m: usize, h: usize| h * 4 + m;
        let mut tr = Vec::new();
        for h in 0..2 {
            for m in 0..3 {
                tr.push(Transition {
                    from: idx(m, h),
                    to: idx(m + 1, h),
                    factor: (3 - m) as f64,
                    rate: RateFunction::AlphaM,
                });
                tr.push(Transition {
                    from: idx(m + 1, h),
                    to: idx(m, h),
                    factor: (m + 1) as f64,
                    rate: RateFunction::BetaM,
                });
            }
        }
        for m in 0..4 {
            tr.push(Transition {
                from: idx(m, 0),
                to: idx(m, 1),
                factor: 1.0,
                rate: RateFunction::AlphaH,
            });
            tr.push(Transition {
                from: idx(m, 1),
                to: idx(m, 0),
                factor: 1.0,
                rate: RateFunction::BetaH,
            });
        }
        let mut conductance = vec![0.0; 8];
        let mut reversal = vec![0.0; 8];
        conductance[idx(3, 1)] = NA_CONDUCTANCE;
        reversal[idx(3, 1)] = NA_REVERSAL;
        Self::new("na8", states, class_of, tr, conductance, reversal)
            .expect("built-in sodium scheme is valid")
    }

    /// Two-state all-fast toy: closed ⇄ open at constant rates 2 and 1,
    /// open state with `c = 1`, `v = 1`.
    pub fn toy2() -> Self {
        Self::two_state("toy2", 2.0, 1.0, [0.0, 1.0], [0.0, 1.0])
    }

    /// Two-state all-fast scheme where both states share `c = 1`, `v = 1`,
    /// so that the full and averaged reaction terms coincide.
    pub fn shared2() -> Self {
        Self::two_state("shared2", 2.0, 1.0, [1.0, 1.0], [1.0, 1.0])
    }

    /// All-fast closed/open scheme with constant rates.
    pub fn two_state(
        name: &str,
        open_rate: f64,
        close_rate: f64,
        conductance: [f64; 2],
        reversal: [f64; 2],
    ) -> Self {
        Self::new(
            name,
            vec!["C".into(), "O".into()],
            vec![0, 0],
            vec![
                Transition {
                    from: 0,
                    to: 1,
                    factor: 1.0,
                    rate: RateFunction::Constant(open_rate),
                },
                Transition {
                    from: 1,
                    to: 0,
                    factor: 1.0,
                    rate: RateFunction::Constant(close_rate),
                },
            ],
            conductance.to_vec(),
            reversal.to_vec(),
        )
        .expect("two-state scheme with positive rates is valid")
    }

    /// Built-in schemes by name: `na8`, `na8-h1` (sodium restricted to class
    /// 1), `toy2`, `shared2`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "na8" => Some(Self::na8()),
            "na8-h1" => Some(Self::na8().restrict_to_class(1).ok()?),
            "toy2" => Some(Self::toy2()),
            "shared2" => Some(Self::shared2()),
            _ => None,
        }
    }

    /// The single-class scheme made of class `j` and its internal transitions.
    pub fn restrict_to_class(&self, j: usize) -> Result<Self, KineticsError> {
        let members = self.class_members(j)?.to_vec();
        let tr = self
            .transitions
            .iter()
            .filter(|t| self.class_of[t.from] == j && self.class_of[t.to] == j)
            .map(|t| Transition {
                from: self.class_pos[t.from],
                to: self.class_pos[t.to],
                ..*t
            })
            .collect();
        Self::new(
            format!("{}-class{j}", self.name),
            members.iter().map(|&s| self.states[s].clone()).collect(),
            vec![0; members.len()],
            tr,
            members.iter().map(|&s| self.conductance[s]).collect(),
            members.iter().map(|&s| self.reversal[s]).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn class_of(&self, state: usize) -> usize {
        self.class_of[state]
    }

    /// Position of `state` inside its class member list.
    pub fn position_in_class(&self, state: usize) -> usize {
        self.class_pos[state]
    }

    pub fn class_members(&self, j: usize) -> Result<&[usize], KineticsError> {
        self.classes
            .get(j)
            .map(Vec::as_slice)
            .ok_or(KineticsError::InvalidClass {
                class: j,
                n_classes: self.classes.len(),
            })
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, state: usize) -> impl Iterator<Item = &Transition> {
        self.outgoing[state].iter().map(|&k| &self.transitions[k])
    }

    pub fn is_within_class(&self, t: &Transition) -> bool {
        self.class_of[t.from] == self.class_of[t.to]
    }

    pub fn conductance(&self, state: usize) -> f64 {
        self.conductance[state]
    }

    pub fn reversal(&self, state: usize) -> f64 {
        self.reversal[state]
    }

    pub fn max_conductance(&self) -> f64 {
        self.conductance.iter().copied().fold(0.0, f64::max)
    }

    /// Upper rate bound α⁺: 1.05 × the largest sampled transition rate on
    /// the voltage box.
    pub fn rate_bound(&self) -> f64 {
        self.rate_bound
    }

    /// Lower rate bound α₋: smallest sampled non-zero transition rate.
    pub fn rate_floor(&self) -> f64 {
        self.rate_floor
    }

    /// Largest number of structural exits from a single state.
    pub fn max_out_degree(&self) -> usize {
        self.outgoing.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Transition rate `from → to` at `v`, 0 if structurally absent.
    pub fn rate(&self, from: usize, to: usize, v: f64) -> f64 {
        self.outgoing(from)
            .find(|t| t.to == to)
            .map_or(0.0, |t| t.eval(v))
    }

    /// Total exit rate of `state` at `v` with within-class rates scaled by
    /// `1/eps`.
    #[inline]
    pub fn exit_rate(&self, state: usize, v: f64, eps: f64) -> f64 {
        self.outgoing(state)
            .map(|t| {
                let r = t.eval(v);
                if self.is_within_class(t) {
                    r / eps
                } else {
                    r
                }
            })
            .sum()
    }

    /// Single-channel generator `ε⁻¹B + B̂` at voltage `v`.
    pub fn full_generator(&self, v: f64, eps: f64) -> Result<GeneratorMatrix, KineticsError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(KineticsError::InvalidEpsilon(eps));
        }
        GeneratorMatrix::from_rates(
            self.n_states(),
            self.transitions.iter().map(|t| {
                let r = t.eval(v);
                let r = if self.is_within_class(t) { r / eps } else { r };
                (t.from, t.to, r)
            }),
        )
    }

    /// Unscaled within-class generator `B_j(v)` on the members of class `j`.
    pub fn class_generator(&self, j: usize, v: f64) -> Result<GeneratorMatrix, KineticsError> {
        let members = self.class_members(j)?;
        GeneratorMatrix::from_rates(
            members.len(),
            members.iter().flat_map(|&s| {
                self.outgoing(s)
                    .filter(|t| self.class_of[t.to] == j)
                    .map(|t| (self.class_pos[t.from], self.class_pos[t.to], t.eval(v)))
            }),
        )
    }

    /// Quasi-stationary distribution `μ_j(v)` over the members of class `j`.
    pub fn quasi_stationary(&self, j: usize, v: f64) -> Result<Distribution, KineticsError> {
        let g = self.class_generator(j, v)?;
        if self.class_trees[j].is_none() {
            return stationary_distribution(&g);
        }
        let blocks = g.communicating_classes();
        if blocks.len() > 1 {
            return Err(KineticsError::Reducible { blocks });
        }
        let mut out = vec![0.0; g.dim()];
        self.quasi_stationary_into(j, v, &mut out, &mut Vec::new(), &mut Vec::new());
        Distribution::new(out)
    }

    /// Aggregated class generator: rate `j → k` is
    /// `Σ_{ζ∈E_j} μ_j(ζ) Σ_{ξ∈E_k} α_{ζ,ξ}(v)`.
    pub fn aggregated_generator(&self, v: f64) -> Result<GeneratorMatrix, KineticsError> {
        let l = self.n_classes();
        let mut rates = Vec::new();
        for j in 0..l {
            let mu = self.quasi_stationary(j, v)?;
            for (p, &z) in self.classes[j].iter().enumerate() {
                for t in self.outgoing(z) {
                    let k = self.class_of[t.to];
                    if k != j {
                        rates.push((j, k, mu[p] * t.eval(v)));
                    }
                }
            }
        }
        GeneratorMatrix::from_rates(l, rates)
    }

    /// Values of every distinct rate function at `v`, for the `*_with`
    /// fast paths.
    pub(crate) fn kind_values(&self, v: f64, out: &mut Vec<f64>) {
        out.resize(self.kinds.len(), 0.0);
        for (o, k) in out.iter_mut().zip(&self.kinds) {
            *o = k.eval(v);
        }
    }

    /// Rate of transition `k` from precomputed [`kind_values`](Self::kind_values).
    #[inline]
    pub(crate) fn transition_rate_with(&self, k: usize, kinds: &[f64]) -> f64 {
        self.transitions[k].factor * kinds[self.kind_of[k]]
    }

    /// Fast path for [`quasi_stationary`](Self::quasi_stationary) used by the
    /// engines; class irreducibility is structural and was checked at
    /// construction. `g` and `scratch` are caller-owned buffers.
    pub(crate) fn quasi_stationary_into(
        &self,
        j: usize,
        v: f64,
        out: &mut [f64],
        g: &mut Vec<f64>,
        scratch: &mut Vec<f64>,
    ) {
        let kinds: Vec<f64> = self.kinds.iter().map(|k| k.eval(v)).collect();
        self.quasi_stationary_with(j, &kinds, out, g, scratch);
    }

    /// As [`quasi_stationary_into`](Self::quasi_stationary_into), from
    /// precomputed rate values.
    pub(crate) fn quasi_stationary_with(
        &self,
        j: usize,
        kinds: &[f64],
        out: &mut [f64],
        g: &mut Vec<f64>,
        scratch: &mut Vec<f64>,
    ) {
        let n = self.classes[j].len();
        if let Some(tree) = &self.class_trees[j] {
            // detailed balance holds on a tree
            out[0] = 1.0;
            let mut ok = true;
            for &(child, parent, up, down) in tree {
                let back = self.transition_rate_with(down, kinds);
                ok &= back > 0.0;
                out[child] = out[parent] * self.transition_rate_with(up, kinds) / back;
            }
            let total: f64 = out[..n].iter().sum();
            if ok && total.is_finite() {
                out[..n].iter_mut().for_each(|p| *p /= total);
                return;
            }
        }
        g.clear();
        g.resize(n * n, 0.0);
        for &(entry, diag, k) in &self.class_moves[j] {
            let r = self.transition_rate_with(k, kinds);
            g[entry] += r;
            g[diag] -= r;
        }
        stationary_unchecked(n, g, &mut out[..n], scratch);
    }
}

/// Spanning edges of a class whose within-class transitions form a tree of
/// reversible pairs, rooted at position 0.
fn tree_edges(
    members: &[usize],
    transitions: &[Transition],
    class_pos: &[usize],
) -> Option<Vec<TreeEdge>> {
    let inside: Vec<(usize, &Transition)> = transitions
        .iter()
        .enumerate()
        .filter(|(_, t)| members.contains(&t.from) && members.contains(&t.to))
        .collect();
    if inside.len() != 2 * (members.len() - 1) {
        return None;
    }
    let mut seen = vec![false; members.len()];
    seen[0] = true;
    let mut queue = vec![0];
    let mut edges = Vec::new();
    while let Some(p) = queue.pop() {
        for &(up, t) in &inside {
            let c = class_pos[t.to];
            if class_pos[t.from] != p || seen[c] {
                continue;
            }
            let down = inside
                .iter()
                .find(|(_, b)| b.from == t.to && b.to == t.from)
                .map(|&(k, _)| k)?;
            seen[c] = true;
            edges.push((c, p, up, down));
            queue.push(c);
        }
    }
    seen.iter().all(|&s| s).then_some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn am(v: f64) -> f64 {
        RateFunction::AlphaM.eval(v)
    }
    fn bm(v: f64) -> f64 {
        RateFunction::BetaM.eval(v)
    }

    #[test]
    fn na8_shape() {
        let na = KineticScheme::na8();
        assert_eq!(na.n_states(), 8);
        assert_eq!(na.n_classes(), 2);
        assert_eq!(na.max_out_degree(), 3);
        assert_eq!(na.conductance(na.state_index("m3h1").unwrap()), 120.0);
        assert!(na.rate_floor() > 0.0);
        assert!(na.rate_bound() >= 3.0 * bm(-50.0));
        assert_abs_diff_eq!(na_diffusion(), 3.449_275_362_318_84e-4, epsilon = 1e-15);
    }

    #[test]
    fn tree_classes_match_the_general_solver() {
        let na = KineticScheme::na8();
        assert!(na.class_trees.iter().all(Option::is_some));
        let (mut g, mut scratch, mut out) = (Vec::new(), Vec::new(), [0.0; 4]);
        for j in 0..2 {
            for k in 0..=40 {
                let v = -20.0 + 4.0 * f64::from(k);
                na.quasi_stationary_into(j, v, &mut out, &mut g, &mut scratch);
                let reference =
                    stationary_distribution(&na.class_generator(j, v).unwrap()).unwrap();
                for (a, b) in out.iter().zip(reference.probs()) {
                    assert!(
                        (a - b).abs() <= 1e-13 * b.max(1e-300),
                        "{j} {v}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn cycles_are_not_trees() {
        let t = |from, to| Transition {
            from,
            to,
            factor: 1.0,
            rate: RateFunction::Constant(1.0),
        };
        let ring = [t(0, 1), t(1, 2), t(2, 0), t(1, 0)];
        assert!(tree_edges(&[0, 1, 2], &ring, &[0, 1, 2]).is_none());
        let path = [t(0, 1), t(1, 0), t(1, 2), t(2, 1)];
        let edges = tree_edges(&[0, 1, 2], &path, &[0, 1, 2]).unwrap();
        assert_eq!(edges, vec![(1, 0, 0, 1), (2, 1, 2, 3)]);
    }

    #[test]
    fn full_generator_entries() {
        let na = KineticScheme::na8();
        let m0h0 = na.state_index("m0h0").unwrap();
        let m1h0 = na.state_index("m1h0").unwrap();
        let m0h1 = na.state_index("m0h1").unwrap();
        let g = na.full_generator(0.0, 1.0).unwrap();
        approx::assert_relative_eq!(g.get(m0h0, m1h0), 0.670_684, max_relative = 5e-4);
        assert_abs_diff_eq!(g.get(m0h0, m1h0), 3.0 * am(0.0), epsilon = 1e-15);
        assert_eq!(g.max_row_sum(), 0.0);
        let g10 = na.full_generator(0.0, 0.1).unwrap();
        assert_abs_diff_eq!(g10.get(m0h0, m1h0), 10.0 * 3.0 * am(0.0), epsilon = 1e-13);
        assert_eq!(g10.get(m0h0, m0h1), 0.07);
        assert!(na.full_generator(0.0, 0.0).is_err());
        assert!(na.full_generator(0.0, -1.0).is_err());
    }

    #[test]
    fn class_generators_are_the_displayed_ladder() {
        let na = KineticScheme::na8();
        for v in [-10.0, 0.0, 33.3, 90.0] {
            let (a, b) = (am(v), bm(v));
            let expected = [
                [-3.0 * a, 3.0 * a, 0.0, 0.0],
                [b, -b - 2.0 * a, 2.0 * a, 0.0],
                [0.0, 2.0 * b, -2.0 * b - a, a],
                [0.0, 0.0, 3.0 * b, -3.0 * b],
            ];
            let g0 = na.class_generator(0, v).unwrap();
            let g1 = na.class_generator(1, v).unwrap();
            assert_eq!(g0, g1);
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(g1.get(i, j), expected[i][j], epsilon = 1e-13);
                }
            }
        }
        assert!(matches!(
            na.class_generator(2, 0.0),
            Err(KineticsError::InvalidClass { class: 2, .. })
        ));
    }

    #[test]
    fn singleton_class() {
        let s = KineticScheme::new(
            "single",
            vec!["A".into(), "B".into()],
            vec![0, 1],
            vec![
                Transition {
                    from: 0,
                    to: 1,
                    factor: 1.0,
                    rate: RateFunction::Constant(1.0),
                },
                Transition {
                    from: 1,
                    to: 0,
                    factor: 1.0,
                    rate: RateFunction::Constant(2.0),
                },
            ],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let g = s.class_generator(1, 3.0).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.get(0, 0), 0.0);
        assert_eq!(s.quasi_stationary(1, 3.0).unwrap().probs(), &[1.0]);
        let agg = s.aggregated_generator(0.0).unwrap();
        assert_eq!(agg.entries(), &[-1.0, 1.0, 2.0, -2.0]);
    }

    #[test]
    fn quasi_stationary_open_mass() {
        let na = KineticScheme::na8();
        let p = am(0.0) / (am(0.0) + bm(0.0));
        approx::assert_relative_eq!(p, 0.052_928_1, max_relative = 5e-4);
        let mu = na.quasi_stationary(1, 0.0).unwrap();
        approx::assert_relative_eq!(mu[3], 1.482_78e-4, max_relative = 5e-4);
        assert_abs_diff_eq!(mu[3], p.powi(3), epsilon = 1e-15);
        for v in [-20.0, 0.0, 25.0, 60.0, 140.0] {
            let mu = na.quasi_stationary(1, v).unwrap();
            let closed = 1.0 / (1.0 + bm(v) / am(v)).powi(3);
            assert_abs_diff_eq!(mu[3], closed, epsilon = 1e-12);
        }
    }

    #[test]
    fn aggregated_na_is_h_gate() {
        let na = KineticScheme::na8();
        let g = na.aggregated_generator(0.0).unwrap();
        assert_abs_diff_eq!(g.get(0, 1), 0.07, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(1, 0), 1.0 / (3f64.exp() + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(1, 0), 0.047_425_9, epsilon = 1e-7);
        let toy = KineticScheme::toy2();
        let g = toy.aggregated_generator(5.0).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.get(0, 0), 0.0);
    }

    #[test]
    fn fast_path_matches_checked_path() {
        let na = KineticScheme::na8();
        let (mut out, mut g, mut s) = (vec![0.0; 4], Vec::new(), Vec::new());
        for v in [-20.0, 0.0, 25.0, 115.0] {
            na.quasi_stationary_into(1, v, &mut out, &mut g, &mut s);
            let mu = na.quasi_stationary(1, v).unwrap();
            assert_eq!(&out[..], mu.probs());
        }
    }

    #[test]
    fn restriction() {
        let h1 = KineticScheme::na8().restrict_to_class(1).unwrap();
        assert_eq!(h1.n_states(), 4);
        assert_eq!(h1.n_classes(), 1);
        assert_eq!(h1.state_names()[3], "m3h1");
        assert_eq!(h1.conductance(3), 120.0);
        assert_eq!(
            h1.class_generator(0, 12.0).unwrap(),
            KineticScheme::na8().class_generator(1, 12.0).unwrap()
        );
    }

    #[test]
    fn rejects_bad_schemes() {
        let c = |r| RateFunction::Constant(r);
        // class {A, B} with only A -> B is not irreducible
        let err = KineticScheme::new(
            "bad",
            vec!["A".into(), "B".into()],
            vec![0, 0],
            vec![Transition {
                from: 0,
                to: 1,
                factor: 1.0,
                rate: c(1.0),
            }],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        )
        .unwrap_err();
        assert!(matches!(err, KineticsError::Reducible { .. }));
        // structurally present rate that vanishes
        assert!(KineticScheme::new(
            "zero",
            vec!["A".into(), "B".into()],
            vec![0, 1],
            vec![Transition {
                from: 0,
                to: 1,
                factor: 1.0,
                rate: c(0.0)
            }],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        )
        .is_err());
        // negative conductance
        assert!(KineticScheme::new(
            "neg",
            vec!["A".into()],
            vec![0],
            vec![],
            vec![-1.0],
            vec![0.0]
        )
        .is_err());
        // class labels with a gap
        assert!(KineticScheme::new(
            "gap",
            vec!["A".into(), "B".into()],
            vec![0, 2],
            vec![],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        )
        .is_err());
    }
}
