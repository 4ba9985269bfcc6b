//! Laws of the unit-mass tree attached at a jump of a given size.

use std::sync::Arc;

use crate::error::{check_open_unit, Error, Result};
use crate::rtree::FiniteRTree;

#[derive(Clone, Debug)]
pub enum DecorationKernel {
    /// The same tree for every size.
    Constant(Arc<FiniteRTree>),
    /// Depends on `x` only through the fractional part of `log_p x`, so the
    /// trees for `x` and `p x` coincide. The fractional part is bucketed
    /// into `table.len()` equal bins.
    LogPeriodic { p: f64, table: Vec<Arc<FiniteRTree>> },
}

fn unit_mass(tree: &FiniteRTree) -> Result<()> {
    let m = tree.total_mass();
    if (m - 1.0).abs() > 1e-9 {
        return Err(Error::NotProbability(m));
    }
    Ok(())
}

impl DecorationKernel {
    pub fn constant(tree: FiniteRTree) -> Result<Self> {
        unit_mass(&tree)?;
        Ok(DecorationKernel::Constant(Arc::new(tree)))
    }

    pub fn log_periodic(p: f64, table: Vec<FiniteRTree>) -> Result<Self> {
        check_open_unit("p", p)?;
        if table.is_empty() {
            return Err(Error::Parameter { name: "table", value: 0.0, range: "non-empty list" });
        }
        for t in &table {
            unit_mass(t)?;
        }
        Ok(DecorationKernel::LogPeriodic { p, table: table.into_iter().map(Arc::new).collect() })
    }

    /// The unit-mass tree used for size `x`.
    pub fn tree_for(&self, x: f64) -> &Arc<FiniteRTree> {
        match self {
            DecorationKernel::Constant(t) => t,
            DecorationKernel::LogPeriodic { p, table } => {
                let phase = (x.ln() / p.ln()).rem_euclid(1.0);
                let bin = ((phase * table.len() as f64) as usize).min(table.len() - 1);
                &table[bin]
            }
        }
    }

    /// The attached tree for a jump of size `x`: distances and mass scaled by `x`.
    pub fn attachment(&self, x: f64) -> FiniteRTree {
        self.tree_for(x).scale(x).expect("sizes are positive")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtree::Edge;

    #[test]
    fn needs_unit_mass() {
        assert!(DecorationKernel::constant(FiniteRTree::segment(2.0).unwrap()).is_err());
        assert!(DecorationKernel::log_periodic(0.5, vec![]).is_err());
    }

    #[test]
    fn log_periodic_is_invariant_under_p() {
        let mut bent = FiniteRTree::point();
        bent.add_edge(0, Edge::new(0.5).with_atom(0.5, 0.5)).unwrap();
        let k = DecorationKernel::log_periodic(0.5, vec![FiniteRTree::segment(1.0).unwrap(), bent]).unwrap();
        for x in [0.3, 1.7, 12.0, 1e-4] {
            assert!(Arc::ptr_eq(k.tree_for(x), k.tree_for(0.5 * x)));
        }
        assert!(!Arc::ptr_eq(k.tree_for(1.1), k.tree_for(1.1 * 2f64.sqrt())));
        assert!((k.attachment(3.0).total_mass() - 3.0).abs() < 1e-12);
    }
}
