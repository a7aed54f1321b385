//! Refinement in an abstract lattice linked to the concrete one by a pair of
//! Galois insertions, with atom partitions of a powerset as the shipped
//! abstraction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{precision_leq, valid, AtomSet, AtomUniverse, Interval, Lattice, Powerset};
use crate::refine::{refine_step, refine_step_split, OperatorSpec, RefineConfig};

/// Two adjunctions between a concrete lattice `C` and an abstract one `A`:
/// `α^u ⊣ γ^u` and `γ^ℓ ⊣ α^ℓ`, both insertions (`α ∘ γ = id`).
pub trait GaloisPair: Send + Sync + 'static {
    type Concrete: Lattice;
    type Abstract: Lattice;

    fn concrete(&self) -> &Self::Concrete;
    fn abstract_lattice(&self) -> &Self::Abstract;
    fn alpha_lower(
        &self,
        x: &<Self::Concrete as Lattice>::Elem,
    ) -> <Self::Abstract as Lattice>::Elem;
    fn alpha_upper(
        &self,
        x: &<Self::Concrete as Lattice>::Elem,
    ) -> <Self::Abstract as Lattice>::Elem;
    fn gamma_lower(
        &self,
        a: &<Self::Abstract as Lattice>::Elem,
    ) -> <Self::Concrete as Lattice>::Elem;
    fn gamma_upper(
        &self,
        a: &<Self::Abstract as Lattice>::Elem,
    ) -> <Self::Concrete as Lattice>::Elem;

    /// `α(B) = [α^ℓ(lo), α^u(hi)]`.
    fn alpha_interval(
        &self,
        b: &Interval<<Self::Concrete as Lattice>::Elem>,
    ) -> Interval<<Self::Abstract as Lattice>::Elem> {
        Interval::new(self.alpha_lower(&b.lo), self.alpha_upper(&b.hi))
    }
}

/// Disjoint nonempty blocks covering an atom universe, in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    width: usize,
    blocks: Vec<AtomSet>,
}

impl Partition {
    pub fn new(width: usize, blocks: Vec<AtomSet>) -> Result<Self> {
        let mut seen = AtomSet::empty(width);
        for b in &blocks {
            if b.width() != width {
                return Err(Error::usage("block over a different universe"));
            }
            if b.is_empty() {
                return Err(Error::usage("partition blocks must be nonempty"));
            }
            if !b.is_disjoint(&seen) {
                return Err(Error::usage("partition blocks must be disjoint"));
            }
            seen.union_with(b);
        }
        if seen.len() != width {
            return Err(Error::usage("partition blocks must cover every atom"));
        }
        if blocks.len() > 64 {
            return Err(Error::cap("partition blocks", 64));
        }
        Ok(Partition { width, blocks })
    }

    /// Every atom in its own block.
    pub fn singletons(width: usize) -> Self {
        Partition {
            width,
            blocks: (0..width)
                .map(|i| AtomSet::from_indices(width, [i]))
                .collect(),
        }
    }

    /// A single block holding everything (nothing for an empty universe).
    pub fn one_block(width: usize) -> Self {
        Partition {
            width,
            blocks: if width == 0 {
                vec![]
            } else {
                vec![AtomSet::full(width)]
            },
        }
    }

    /// Blocks given as a JSON list of atom-name lists, e.g. `[["p","r"],["q","s"]]`.
    pub fn from_json(lat: &Powerset, text: &str) -> Result<Self> {
        let lists: Vec<Vec<String>> = serde_json::from_str(text)?;
        let blocks = lists
            .iter()
            .map(|l| lat.set(l.iter().map(String::as_str)))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(lat.width(), blocks)
    }

    pub fn blocks(&self) -> &[AtomSet] {
        &self.blocks
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(blocks inside s, blocks meeting s)`, as block-index sets.
    pub fn alpha_maps(&self, s: &AtomSet) -> (AtomSet, AtomSet) {
        let k = self.blocks.len();
        let lower = (0..k).filter(|&i| self.blocks[i].is_subset(s));
        let upper = (0..k).filter(|&i| !self.blocks[i].is_disjoint(s));
        (
            AtomSet::from_indices(k, lower),
            AtomSet::from_indices(k, upper),
        )
    }

    /// The union of the chosen blocks.
    pub fn gamma(&self, a: &AtomSet) -> AtomSet {
        let mut out = AtomSet::empty(self.width);
        for i in a.iter() {
            out.union_with(&self.blocks[i]);
        }
        out
    }
}

/// A partition seen as a Galois pair between the powerset of atoms and the
/// powerset of blocks (named `b1`, `b2`, ...).
#[derive(Clone, Debug)]
pub struct PartitionAbstraction {
    concrete: Powerset,
    abstract_lat: Powerset,
    partition: Partition,
}

impl PartitionAbstraction {
    pub fn new(concrete: Powerset, partition: Partition) -> Result<Self> {
        if partition.width() != concrete.width() {
            return Err(Error::usage("partition over a different universe"));
        }
        let names = (1..=partition.blocks().len()).map(|i| format!("b{i}"));
        let abstract_lat = Powerset::new(Arc::new(AtomUniverse::new(names)?));
        Ok(PartitionAbstraction {
            concrete,
            abstract_lat,
            partition,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }
}

impl GaloisPair for PartitionAbstraction {
    type Concrete = Powerset;
    type Abstract = Powerset;

    fn concrete(&self) -> &Powerset {
        &self.concrete
    }

    fn abstract_lattice(&self) -> &Powerset {
        &self.abstract_lat
    }

    fn alpha_lower(&self, x: &AtomSet) -> AtomSet {
        self.partition.alpha_maps(x).0
    }

    fn alpha_upper(&self, x: &AtomSet) -> AtomSet {
        self.partition.alpha_maps(x).1
    }

    fn gamma_lower(&self, a: &AtomSet) -> AtomSet {
        self.partition.gamma(a)
    }

    fn gamma_upper(&self, a: &AtomSet) -> AtomSet {
        self.partition.gamma(a)
    }
}

type AbsElem<G> = <<G as GaloisPair>::Abstract as Lattice>::Elem;
type ConElem<G> = <<G as GaloisPair>::Concrete as Lattice>::Elem;

/// `(f♭, f♯) = (α^ℓ ∘ f ∘ γ^ℓ, α^u ∘ f ∘ γ^u)`, tagged like `op`.
///
/// The composition keeps monotonicity and antimonotonicity because all four
/// maps are monotone.
pub fn best_transformers<G: GaloisPair>(
    g: &Arc<G>,
    op: &OperatorSpec<ConElem<G>>,
) -> (OperatorSpec<AbsElem<G>>, OperatorSpec<AbsElem<G>>) {
    let (g1, f1) = (Arc::clone(g), op.apply_fn());
    let flat = OperatorSpec::new(format!("{}♭", op.name), op.monotonicity, move |a| {
        g1.alpha_lower(&f1(&g1.gamma_lower(a)))
    });
    let (g2, f2) = (Arc::clone(g), op.apply_fn());
    let sharp = OperatorSpec::new(format!("{}♯", op.name), op.monotonicity, move |a| {
        g2.alpha_upper(&f2(&g2.gamma_upper(a)))
    });
    (flat, sharp)
}

/// `F♯(A)`: one refinement step in the abstract lattice, with `f♭` driving
/// the lower endpoint and `f♯` the upper one.
pub fn abstract_refine_step<G: GaloisPair>(
    g: &Arc<G>,
    op: &OperatorSpec<ConElem<G>>,
    a: &Interval<AbsElem<G>>,
    cfg: &RefineConfig,
) -> Result<Interval<AbsElem<G>>> {
    let (flat, sharp) = best_transformers(g, op);
    Ok(refine_step_split(g.abstract_lattice(), &flat, &sharp, a, cfg)?.result)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessReport<C, A> {
    /// `F(B)` in the concrete lattice.
    pub concrete: Interval<C>,
    /// `α(F(B))`.
    pub abstracted: Interval<A>,
    /// `F♯(α(B))`.
    pub abstract_step: Interval<A>,
    /// Whether the two abstract intervals coincide.
    pub exact: bool,
}

/// Computes `α(F(B))` and `F♯(α(B))` and checks that the first is at least
/// as precise as the second, and that the second is valid whenever the first
/// is. Either failure is an internal error.
///
/// Holds for monotone and antimonotone `op`; a general operator carries no
/// such guarantee and may be reported as a violation.
pub fn soundness_check<G: GaloisPair>(
    g: &Arc<G>,
    op: &OperatorSpec<ConElem<G>>,
    b: &Interval<ConElem<G>>,
    cfg: &RefineConfig,
) -> Result<SoundnessReport<ConElem<G>, AbsElem<G>>> {
    let concrete = refine_step(g.concrete(), op, b, cfg)?;
    let abstracted = g.alpha_interval(&concrete);
    let abstract_step = abstract_refine_step(g, op, &g.alpha_interval(b), cfg)?;
    let alat = g.abstract_lattice();
    if !precision_leq(alat, &abstracted, &abstract_step) {
        return Err(Error::Internal(format!(
            "abstract refinement lost soundness: α(F(B)) = [{}, {}] is not inside F♯(α(B)) = [{}, {}]",
            alat.render(&abstracted.lo),
            alat.render(&abstracted.hi),
            alat.render(&abstract_step.lo),
            alat.render(&abstract_step.hi),
        )));
    }
    if valid(alat, &abstracted) && !valid(alat, &abstract_step) {
        return Err(Error::Internal(
            "abstract refinement is invalid although α(F(B)) is valid".into(),
        ));
    }
    let exact = abstracted == abstract_step;
    Ok(SoundnessReport {
        concrete,
        abstracted,
        abstract_step,
        exact,
    })
}
