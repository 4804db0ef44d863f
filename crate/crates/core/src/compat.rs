//! Blood-type rules, two-way feasibility and two-way HLA totals.

use crate::domain::{BloodType, Instance};
use crate::error::{Error, Result};

/// ABO donation rules: O gives to anyone, A to A/AB, B to B/AB, AB to AB.
pub fn blood_compatible(donor: BloodType, recipient: BloodType) -> bool {
    use BloodType::*;
    match donor {
        O => true,
        A => matches!(recipient, A | AB),
        B => matches!(recipient, B | AB),
        AB => recipient == AB,
    }
}

/// Whether the patient of pair `i` can receive the kidney of the donor of
/// pair `j`.
pub fn directional_feasible(inst: &Instance, i: usize, j: usize) -> Result<bool> {
    inst.check_index(i)?;
    inst.check_index(j)?;
    if i == j {
        return Err(Error::SelfMatch(i));
    }
    Ok(directional(inst, i, j))
}

fn directional(inst: &Instance, i: usize, j: usize) -> bool {
    blood_compatible(inst.pairs[j].donor_blood, inst.pairs[i].patient_blood) && inst.pra_compat[i][j] == 1
}

/// Two-way feasibility and two-way HLA totals over all pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatMatrix {
    /// `c[i][j]` iff both directed transplants between `i` and `j` are feasible.
    pub c: Vec<Vec<bool>>,
    /// `hla_score[i][j] + hla_score[j][i]` off the diagonal, 0 on it.
    pub hla_total: Vec<Vec<i64>>,
}

impl CompatMatrix {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Unordered feasible pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).filter(move |&j| self.c[i][j]).map(move |j| (i, j)))
    }
}

pub fn build_compat(inst: &Instance) -> Result<CompatMatrix> {
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let n = inst.len();
    let mut c = vec![vec![false; n]; n];
    let mut hla_total = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let both = directional(inst, i, j) && directional(inst, j, i);
            c[i][j] = both;
            c[j][i] = both;
            let total = inst.hla_score[i][j] + inst.hla_score[j][i];
            hla_total[i][j] = total;
            hla_total[j][i] = total;
        }
    }
    Ok(CompatMatrix { c, hla_total })
}
