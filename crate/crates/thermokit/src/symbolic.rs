//! Countable-state transition structures and their capped thermodynamics.
//!
//! The shifts here are the symbolic side of the interval families in
//! [`crate::maps`]: a full block of vertices stands for the expanding
//! branches, and a descending tail records how many more steps an orbit
//! will spend in the neutral branch before it re-enters the block.  Every
//! quantitative routine works on a *finite vertex cap*: the capped value is
//! the exact pressure of a finite subsystem, so it is a certified lower
//! bound that grows toward the countable-state value as the cap grows.
//! Nothing in this module extrapolates past its cap.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;
use crate::maps::MapModel;
use crate::Result;

/// Hard ceiling on vertex caps.  Row construction scans the predicate on a
/// `cap × cap` grid, so this keeps graph building well under a second.
const MAX_VERTEX_CAP: u64 = 8192;

/// Which transition structure to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// One full vertex `0`; every vertex `k ≥ 1` steps down to `k − 1`.
    /// The tail excursion of length `ℓ` is the only way to spend `ℓ`
    /// consecutive steps outside the full vertex.
    Renewal,
    /// Full block `{0, …, N}`, a fan vertex `N + 1` whose only moves are
    /// back into the block, and a descending tail above the fan.  `N = 0`
    /// would reproduce [`RuleKind::Renewal`], so the constructor rejects it.
    NRenewal(u32),
    /// Even vertices are full.  Odd vertex `2n − 1` (for `n ≥ 1`) steps to
    /// `2n − 2`, and vertex `1` additionally reaches every even vertex.
    /// The odd-row rules only make sense for `n ≥ 1`; that convention is
    /// fixed here once and the literal tables in the tests repeat it.
    InfiniteRenewal,
}

/// A 0/1 transition rule over vertex labels `0, 1, 2, …` given as a
/// predicate rather than a stored matrix, so callers can probe arbitrary
/// indices and build capped restrictions of any size.
#[derive(Clone, Copy, Debug)]
pub struct TransitionRule {
    pub kind: RuleKind,
}

/// Validate and wrap a rule kind.  The only rejected combination is
/// `NRenewal(0)`: the block parameter must be positive, and the plain
/// renewal kind already covers the degenerate case.
pub fn build_rule(kind: RuleKind) -> Result<TransitionRule> {
    if kind == RuleKind::NRenewal(0) {
        return Err(Error::config(
            "n_renewal needs N ≥ 1 (the N = 0 structure is the plain renewal rule)",
        ));
    }
    Ok(TransitionRule { kind })
}

/// Block-plus-tail predicate shared by the finite-block kinds: full rows
/// `0..=block`, fan row `block + 1` into the block, tail rows stepping down
/// by one.  The tail starts at `block + 2`; starting it any higher would
/// strand the first tail vertices without an exit.
fn block_rule(block: u64, i: u64, j: u64) -> bool {
    if i <= block {
        true
    } else if i == block + 1 {
        j <= block
    } else {
        j + 1 == i
    }
}

impl TransitionRule {
    /// Is the move `i → j` allowed?
    pub fn allowed(&self, i: u64, j: u64) -> bool {
        match self.kind {
            RuleKind::Renewal => block_rule(0, i, j),
            RuleKind::NRenewal(n) => block_rule(n as u64, i, j),
            RuleKind::InfiniteRenewal => {
                if i % 2 == 0 {
                    true
                } else if i == 1 {
                    j % 2 == 0
                } else {
                    j + 1 == i
                }
            }
        }
    }

    /// Outgoing-target lists for the restriction to vertices `< cap`.
    fn capped_rows(&self, cap: u64) -> Vec<Vec<u32>> {
        (0..cap)
            .map(|i| {
                (0..cap)
                    .filter(|&j| self.allowed(i, j))
                    .map(|j| j as u32)
                    .collect()
            })
            .collect()
    }
}

fn validate_cap(cap: u64) -> Result<usize> {
    if cap == 0 || cap > MAX_VERTEX_CAP {
        return Err(Error::config(format!(
            "vertex cap must be in 1..={MAX_VERTEX_CAP}, got {cap}"
        )));
    }
    Ok(cap as usize)
}

/// Vertex-weighted potential, read one symbol at a time: the weight of a
/// cycle is the sum of the vertex weights along it.  Depth-1 potentials are
/// all the pressure routine supports; anything finer belongs in a recoding
/// of the rule itself.
pub struct CyclePotential {
    /// Short human-readable tag, carried into run records and CSV output.
    pub tag: String,
    weight: Box<dyn Fn(u64) -> f64 + Send + Sync>,
}

impl CyclePotential {
    /// The zero potential: pressure reduces to cycle counting.
    pub fn zero() -> CyclePotential {
        CyclePotential {
            tag: "zero".to_string(),
            weight: Box::new(|_| 0.0),
        }
    }

    /// Constant weight `c` on every vertex.
    pub fn constant(c: f64) -> CyclePotential {
        CyclePotential {
            tag: format!("const({c})"),
            weight: Box::new(move |_| c),
        }
    }

    /// Arbitrary vertex weight with a caller-supplied tag.
    pub fn from_fn(
        tag: impl Into<String>,
        f: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> CyclePotential {
        CyclePotential {
            tag: tag.into(),
            weight: Box::new(f),
        }
    }

    /// Weight of a single vertex.
    pub fn weight(&self, v: u64) -> f64 {
        (self.weight)(v)
    }
}

impl fmt::Debug for CyclePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CyclePotential").field("tag", &self.tag).finish()
    }
}

/// One capped pressure run: the per-length estimates plus the stabilized
/// final value.
#[derive(Clone, Debug)]
pub struct GurevichRun {
    pub base: u64,
    pub vertex_cap: u64,
    pub phi_tag: String,
    /// `(n, (1/n)·log Z_n)` for every length `n ≤ n_max` with a positive
    /// return sum `Z_n`.  This running average is already Cesàro-smoothed:
    /// each entry averages the per-step log growth over its whole prefix.
    pub entries: Vec<(u32, f64)>,
    /// Tail slope of `log Z_n` over the last few lengths.  The running
    /// average in `entries` approaches the pressure only like `O(1/n)`
    /// because the eigenvector weight of the base enters as a constant
    /// offset; the slope form cancels that offset and converges at the
    /// spectral gap rate instead.
    pub estimate: f64,
}

/// Capped cycle pressure at a base vertex: `Z_n` sums `exp(Σ weight)` over
/// all length-`n` closed walks through `base` in the restriction to
/// vertices `< vertex_cap`, and the estimates track `(1/n) log Z_n`.
///
/// Errors if `base` lies outside the cap or on no closed walk of length
/// `≤ n_max` (a base with no return has no cycle pressure to estimate).
pub fn gurevich_pressure(
    rule: &TransitionRule,
    phi: &CyclePotential,
    base: u64,
    n_max: u32,
    vertex_cap: u64,
) -> Result<GurevichRun> {
    let cap = validate_cap(vertex_cap)?;
    if base >= vertex_cap {
        return Err(Error::config(format!(
            "base vertex {base} is outside the cap {vertex_cap}"
        )));
    }
    if n_max < 2 {
        return Err(Error::config("gurevich_pressure needs n_max ≥ 2"));
    }
    let rows = rule.capped_rows(vertex_cap);
    let wexp: Vec<f64> = (0..cap).map(|i| phi.weight(i as u64).exp()).collect();
    if wexp.iter().any(|w| !w.is_finite()) {
        return Err(Error::config("potential weight overflows exp on a capped vertex"));
    }
    // Rows that hit every capped vertex are applied as a single rank-one
    // update; only the sparse remainder is walked edge by edge.  This keeps
    // a step linear in the cap even when half the rows are full.
    let full: Vec<usize> = (0..cap).filter(|&i| rows[i].len() == cap).collect();
    let sparse: Vec<usize> = (0..cap).filter(|&i| rows[i].len() < cap).collect();

    let mut v = vec![0.0f64; cap];
    v[base as usize] = 1.0;
    let mut log_scale = 0.0f64;
    let mut log_z: Vec<(u32, f64)> = Vec::new();
    for n in 1..=n_max {
        let mut next = vec![0.0f64; cap];
        let s: f64 = full.iter().map(|&i| wexp[i] * v[i]).sum();
        if s > 0.0 {
            for slot in next.iter_mut() {
                *slot = s;
            }
        }
        for &i in &sparse {
            let contrib = wexp[i] * v[i];
            if contrib > 0.0 {
                for &j in &rows[i] {
                    next[j as usize] += contrib;
                }
            }
        }
        let peak = next.iter().cloned().fold(0.0f64, f64::max);
        if peak == 0.0 {
            break; // no walks survive under this cap
        }
        for slot in next.iter_mut() {
            *slot /= peak;
        }
        log_scale += peak.ln();
        v = next;
        let z = v[base as usize];
        if z > 0.0 {
            log_z.push((n, log_scale + z.ln()));
        }
    }
    if log_z.is_empty() {
        return Err(Error::config(format!(
            "base vertex {base} lies on no closed path of length ≤ {n_max} under cap {vertex_cap}"
        )));
    }
    let entries: Vec<(u32, f64)> = log_z.iter().map(|&(n, lz)| (n, lz / n as f64)).collect();
    let (n_last, lz_last) = *log_z.last().unwrap();
    let estimate = if log_z.len() == 1 {
        lz_last / n_last as f64
    } else {
        let w = (log_z.len() - 1).min(6);
        let (n0, lz0) = log_z[log_z.len() - 1 - w];
        (lz_last - lz0) / (n_last - n0) as f64
    };
    Ok(GurevichRun {
        base,
        vertex_cap,
        phi_tag: phi.tag.clone(),
        entries,
        estimate,
    })
}

/// Does the capped rule mix?  True when the strongly connected piece of the
/// capped graph containing vertex 0 is aperiodic, which is the same as some
/// power of the capped matrix being strictly positive on that piece.  The
/// period is read off breadth-first levels (gcd of `level(u) + 1 −
/// level(v)` over edges `u → v` inside the piece), so no matrix powers are
/// formed.
pub fn check_mixing(rule: &TransitionRule, vertex_cap: u64) -> Result<bool> {
    validate_cap(vertex_cap)?;
    let rows = rule.capped_rows(vertex_cap);
    Ok(primitive_from(&rows, 0))
}

/// Aperiodicity of the strongly connected component of `root` (false when
/// the component is a single vertex without a self-loop).
fn primitive_from(rows: &[Vec<u32>], root: usize) -> bool {
    let n = rows.len();
    // Forward reachability from the root.
    let mut fwd = vec![false; n];
    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    fwd[root] = true;
    level[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        for &t in &rows[u] {
            let t = t as usize;
            if !fwd[t] {
                fwd[t] = true;
                level[t] = level[u] + 1;
                queue.push_back(t);
            }
        }
    }
    // Backward reachability to the root.
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (u, targets) in rows.iter().enumerate() {
        for &t in targets {
            incoming[t as usize].push(u as u32);
        }
    }
    let mut bwd = vec![false; n];
    bwd[root] = true;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        for &s in &incoming[u] {
            let s = s as usize;
            if !bwd[s] {
                bwd[s] = true;
                queue.push_back(s);
            }
        }
    }
    let in_scc: Vec<bool> = (0..n).map(|v| fwd[v] && bwd[v]).collect();
    let mut g: u64 = 0;
    for (u, targets) in rows.iter().enumerate() {
        if !in_scc[u] {
            continue;
        }
        for &t in targets {
            let t = t as usize;
            if in_scc[t] {
                let d = (level[u] as i64 + 1 - level[t] as i64).unsigned_abs();
                g = gcd(g, d);
            }
        }
    }
    g == 1
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Symbolic image of one interval itinerary under the block-and-sojourn
/// dictionary for an `n_branches`-branch truncation (branch 1 neutral,
/// branches `2..=n_branches` expanding):
///
/// * expanding branch `b` ↦ block vertex `b − 2`;
/// * a neutral symbol with `r` sojourn steps remaining (itself included)
///   ↦ vertex `n_branches − 2 + r`, so the last neutral step before
///   re-entry sits on the fan vertex `n_branches − 1` and longer sojourns
///   climb the tail.
///
/// The word is read cyclically (it describes a periodic orbit), so an
/// all-neutral word has no image — that is the fixed point the symbolic
/// space deliberately omits — and is rejected.
pub fn encode_itinerary(n_branches: u64, word: &[u64]) -> Result<Vec<u64>> {
    if n_branches < 2 {
        return Err(Error::config("encoding needs at least 2 branches"));
    }
    if word.is_empty() {
        return Err(Error::config("cannot encode an empty itinerary"));
    }
    if let Some(&bad) = word.iter().find(|&&b| b == 0 || b > n_branches) {
        return Err(Error::config(format!(
            "branch label {bad} outside 1..={n_branches}"
        )));
    }
    if word.iter().all(|&b| b == 1) {
        return Err(Error::config(
            "the all-neutral itinerary is the omitted fixed point; it has no symbolic image",
        ));
    }
    let k = word.len();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        if word[i] >= 2 {
            out.push(word[i] - 2);
        } else {
            // Count the neutral run from position i forward, cyclically.
            let mut r = 0u64;
            while word[(i + r as usize) % k] == 1 {
                r += 1;
            }
            out.push(n_branches - 2 + r);
        }
    }
    Ok(out)
}

/// Inverse of [`encode_itinerary`]: block vertices name expanding branches,
/// everything at or above the fan decodes to the neutral branch.
pub fn decode_path(n_branches: u64, path: &[u64]) -> Result<Vec<u64>> {
    if n_branches < 2 {
        return Err(Error::config("decoding needs at least 2 branches"));
    }
    Ok(path
        .iter()
        .map(|&v| if v < n_branches - 1 { v + 2 } else { 1 })
        .collect())
}

/// Outcome of the exhaustive finite-depth conjugacy check.
#[derive(Clone, Debug)]
pub struct ConjugacyReport {
    pub n_branches: u64,
    pub depth: u32,
    /// Periodic branch words examined (all lengths `≤ depth`, the
    /// all-neutral words excluded).
    pub words_checked: u64,
    /// Closed vertex walks examined on the symbolic side.
    pub cycles_checked: u64,
    /// Human-readable descriptions of every failure; empty means the two
    /// sides matched move for move.
    pub mismatches: Vec<String>,
}

impl ConjugacyReport {
    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Exhaustively verify, to the given depth, that the truncation of `model`
/// to `n_branches` branches recodes onto its block-and-sojourn rule
/// ([`RuleKind::Renewal`] for two branches, [`RuleKind::NRenewal`]`(n_branches − 2)`
/// beyond) and back:
///
/// * every periodic branch word of length `≤ depth` owns an interval
///   periodic point whose forward itinerary really is that word, and its
///   encoded vertex path is admissible under the rule;
/// * every closed vertex walk of length `≤ depth` decodes to exactly one
///   such word (checked by re-encoding), and the two sides agree in count
///   length by length.
///
/// The all-neutral words and walks that never leave the tail are excluded
/// by construction — those are the omitted fixed point and its preimages.
pub fn itinerary_conjugacy_check(
    model: &MapModel,
    n_branches: u64,
    depth: u32,
) -> Result<ConjugacyReport> {
    if n_branches < 2 {
        return Err(Error::config("conjugacy check needs at least 2 branches"));
    }
    if depth == 0 || depth > 10 {
        return Err(Error::config("conjugacy depth must be in 1..=10 (the word count is N^depth)"));
    }
    if !model.is_parabolic() {
        return Err(Error::config(
            "conjugacy check applies to families with a neutral branch (branch 1)",
        ));
    }
    let trunc = model.truncate(n_branches)?;
    let rule = if n_branches == 2 {
        build_rule(RuleKind::Renewal)?
    } else {
        build_rule(RuleKind::NRenewal((n_branches - 2) as u32))?
    };
    let branches: Vec<_> = (1..=n_branches).map(|b| trunc.branch(b)).collect();

    let mut mismatches = Vec::new();
    let mut words_checked = 0u64;
    // Paths produced by the interval side, grouped by length.
    let mut seen: BTreeMap<u32, Vec<Vec<u64>>> = BTreeMap::new();

    for k in 1..=depth as usize {
        let mut word = vec![1u64; k];
        loop {
            if word.iter().any(|&b| b != 1) {
                words_checked += 1;
                check_one_word(&trunc, &branches, &rule, n_branches, &word, &mut mismatches);
                match encode_itinerary(n_branches, &word) {
                    Ok(path) => seen.entry(k as u32).or_default().push(path),
                    Err(e) => mismatches.push(format!("word {word:?}: encoding failed: {e}")),
                }
            }
            // Next word, counting in base n_branches.
            let mut pos = k;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                word[pos] += 1;
                if word[pos] <= n_branches {
                    break;
                }
                word[pos] = 1;
            }
            if pos == 0 && word[0] == 1 {
                break;
            }
        }
        seen.entry(k as u32).or_default().sort();
    }

    // Symbolic side: every closed walk must decode to a word the interval
    // side already produced.  Walks of length k never climb above the fan
    // plus k tail steps, so a cap of n_branches + depth sees them all.
    let cap = n_branches + depth as u64;
    let rows = rule.capped_rows(cap);
    let mut cycles_checked = 0u64;
    for k in 1..=depth {
        let mut walks = Vec::new();
        for start in 0..cap {
            let mut prefix = vec![start];
            closed_walks(&rows, start, k, &mut prefix, &mut walks);
        }
        walks.sort();
        cycles_checked += walks.len() as u64;
        for walk in &walks {
            let word = decode_path(n_branches, walk)?;
            match encode_itinerary(n_branches, &word) {
                Ok(back) if back == *walk => {}
                Ok(back) => mismatches.push(format!(
                    "walk {walk:?} decodes to {word:?} but re-encodes to {back:?}"
                )),
                Err(e) => mismatches.push(format!("walk {walk:?} decodes to {word:?}: {e}")),
            }
        }
        let interval_side = seen.get(&k).map(|v| v.as_slice()).unwrap_or(&[]);
        if interval_side != walks.as_slice() {
            mismatches.push(format!(
                "length {k}: interval side produced {} paths, symbolic side {}",
                interval_side.len(),
                walks.len()
            ));
        }
    }

    Ok(ConjugacyReport {
        n_branches,
        depth,
        words_checked,
        cycles_checked,
        mismatches,
    })
}

/// Interval-side verification of one periodic word: locate the periodic
/// point as the fixed point of the word's composed inverse branch, confirm
/// its forward itinerary, and confirm the encoded path is admissible.
fn check_one_word(
    trunc: &MapModel,
    branches: &[crate::maps::Branch],
    rule: &TransitionRule,
    n_branches: u64,
    word: &[u64],
    mismatches: &mut Vec<String>,
) {
    let k = word.len();
    let mut x = 0.5;
    for _ in 0..300 {
        let mut y = x;
        for &b in word.iter().rev() {
            y = branches[(b - 1) as usize].inverse(y);
        }
        if (y - x).abs() < 1e-15 {
            x = y;
            break;
        }
        x = y;
    }
    // Forward orbit must follow the word, branch label by branch label.
    let mut z = x;
    for (i, &b) in word.iter().enumerate() {
        match trunc.forward(z) {
            Some((next, label)) if label == b => z = next,
            Some((_, label)) => {
                mismatches.push(format!(
                    "word {word:?}: forward step {i} lands on branch {label}, expected {b} (x = {x:.6})"
                ));
                return;
            }
            None => {
                mismatches.push(format!(
                    "word {word:?}: forward step {i} leaves the truncated domain (x = {x:.6})"
                ));
                return;
            }
        }
    }
    if (z - x).abs() > 1e-6 * (1.0 + x.abs()) {
        mismatches.push(format!(
            "word {word:?}: orbit does not close up ({x:.9} → {z:.9})"
        ));
        return;
    }
    match encode_itinerary(n_branches, word) {
        Ok(path) => {
            for i in 0..k {
                let (u, v) = (path[i], path[(i + 1) % k]);
                if !rule.allowed(u, v) {
                    mismatches.push(format!(
                        "word {word:?}: encoded path {path:?} uses forbidden move {u} → {v}"
                    ));
                    return;
                }
            }
        }
        Err(e) => mismatches.push(format!("word {word:?}: {e}")),
    }
}

/// Depth-first enumeration of closed walks of exact length `k` from
/// `start`, recorded as their full vertex sequence (rotations count
/// separately, matching how periodic words are counted).
fn closed_walks(
    rows: &[Vec<u32>],
    start: u64,
    k: u32,
    prefix: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    let here = *prefix.last().unwrap();
    if prefix.len() as u32 == k {
        if rows[here as usize].contains(&(start as u32)) {
            out.push(prefix.clone());
        }
        return;
    }
    for &t in &rows[here as usize] {
        prefix.push(t as u64);
        closed_walks(rows, start, k, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Literal tables built straight from the defining entry lists, loop by
    // loop, independent of the predicate arithmetic above.

    fn renewal_table(m: usize) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; m]; m];
        a[0][0] = true;
        for n in 1..m {
            a[0][n] = true;
            a[n][n - 1] = true;
        }
        a
    }

    fn n_renewal_table(nn: usize, m: usize) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; m]; m];
        for i in 0..=nn {
            a[i][0] = true;
            for n in 1..m {
                a[i][n] = true;
            }
        }
        for k in 0..=nn {
            a[nn + 1][k] = true;
        }
        for row in nn + 2..m {
            a[row][row - 1] = true;
        }
        a
    }

    fn infinite_table(m: usize) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; m]; m];
        let mut n = 0;
        while 2 * n < m {
            for k in 0..m {
                a[2 * n][k] = true;
            }
            a[1][2 * n] = true;
            n += 1;
        }
        let mut n = 1;
        while 2 * n - 1 < m {
            a[2 * n - 1][2 * n - 2] = true;
            n += 1;
        }
        a
    }

    fn assert_table_matches(rule: &TransitionRule, table: &[Vec<bool>]) {
        for (i, row) in table.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert_eq!(
                    rule.allowed(i as u64, j as u64),
                    want,
                    "{:?} disagrees with the literal table at ({i}, {j})",
                    rule.kind
                );
            }
        }
    }

    #[test]
    fn literal_tables_match_the_predicates() {
        let m = 50;
        assert_table_matches(&build_rule(RuleKind::Renewal).unwrap(), &renewal_table(m));
        for nn in [1usize, 2, 3, 7] {
            assert_table_matches(
                &build_rule(RuleKind::NRenewal(nn as u32)).unwrap(),
                &n_renewal_table(nn, m),
            );
        }
        assert_table_matches(
            &build_rule(RuleKind::InfiniteRenewal).unwrap(),
            &infinite_table(m),
        );
    }

    #[test]
    fn pinned_entries_fix_the_fan_and_tail_edges() {
        let renewal = build_rule(RuleKind::Renewal).unwrap();
        assert!(renewal.allowed(0, 5));
        assert!(renewal.allowed(5, 4));
        assert!(!renewal.allowed(5, 3));

        let n2 = build_rule(RuleKind::NRenewal(2)).unwrap();
        for j in 0..=2 {
            assert!(n2.allowed(3, j), "fan vertex must reach block vertex {j}");
        }
        assert!(!n2.allowed(3, 3));
        assert!(n2.allowed(1, 17), "block rows are full");
        assert!(n2.allowed(7, 6));
        assert!(!n2.allowed(7, 5));

        let inf = build_rule(RuleKind::InfiniteRenewal).unwrap();
        for j in 0..50 {
            assert!(inf.allowed(4, j), "even rows are full");
        }
        assert!(inf.allowed(3, 2));
        assert!(!inf.allowed(3, 4));
        assert!(inf.allowed(1, 6));
        assert!(!inf.allowed(1, 7));
    }

    #[test]
    fn degenerate_block_parameter_is_rejected() {
        assert!(build_rule(RuleKind::NRenewal(0)).is_err());
        assert!(build_rule(RuleKind::NRenewal(1)).is_ok());
    }

    /// Straight dense power iteration on the capped 0/1 matrix — kept
    /// deliberately separate from the scaled sparse walk in
    /// `gurevich_pressure` so the two can disagree.
    fn spectral_radius_oracle(rule: &TransitionRule, cap: usize) -> f64 {
        let a: Vec<Vec<f64>> = (0..cap)
            .map(|i| {
                (0..cap)
                    .map(|j| if rule.allowed(i as u64, j as u64) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let mut v = vec![1.0f64; cap];
        let mut lambda = 0.0f64;
        for _ in 0..20_000 {
            let mut next = vec![0.0f64; cap];
            for i in 0..cap {
                let mut s = 0.0;
                for j in 0..cap {
                    s += a[i][j] * v[j];
                }
                next[i] = s;
            }
            let peak = next.iter().cloned().fold(0.0f64, f64::max);
            for slot in next.iter_mut() {
                *slot /= peak;
            }
            v = next;
            if (peak - lambda).abs() < 1e-13 * peak.max(1.0) {
                return peak;
            }
            lambda = peak;
        }
        lambda
    }

    #[test]
    fn zero_potential_pressure_is_the_log_spectral_radius() {
        for (kind, cap) in [
            (RuleKind::Renewal, 12u64),
            (RuleKind::NRenewal(2), 12),
            (RuleKind::InfiniteRenewal, 12),
        ] {
            let rule = build_rule(kind).unwrap();
            let run = gurevich_pressure(&rule, &CyclePotential::zero(), 0, 260, cap).unwrap();
            let oracle = spectral_radius_oracle(&rule, cap as usize).ln();
            assert!(
                (run.estimate - oracle).abs() < 1e-6,
                "{kind:?}: estimate {} vs log spectral radius {oracle}",
                run.estimate
            );
        }
    }

    #[test]
    fn constant_potentials_shift_the_pressure_exactly() {
        let rule = build_rule(RuleKind::Renewal).unwrap();
        let base_run = gurevich_pressure(&rule, &CyclePotential::zero(), 0, 120, 10).unwrap();
        let c = 0.37;
        let shifted = gurevich_pressure(&rule, &CyclePotential::constant(c), 0, 120, 10).unwrap();
        assert!((shifted.estimate - base_run.estimate - c).abs() < 1e-9);
        for (&(n0, e0), &(n1, e1)) in base_run.entries.iter().zip(&shifted.entries) {
            assert_eq!(n0, n1);
            assert!((e1 - e0 - c).abs() < 1e-9, "length {n0}: {e0} vs {e1}");
        }
    }

    #[test]
    fn estimates_are_base_independent_inside_the_block() {
        let rule = build_rule(RuleKind::NRenewal(3)).unwrap();
        let runs: Vec<f64> = [0u64, 2, 5, 9]
            .iter()
            .map(|&b| {
                gurevich_pressure(&rule, &CyclePotential::zero(), b, 300, 12)
                    .unwrap()
                    .estimate
            })
            .collect();
        for pair in runs.windows(2) {
            assert!(
                (pair[0] - pair[1]).abs() < 1e-9,
                "base dependence: {:?}",
                runs
            );
        }
    }

    #[test]
    fn estimates_grow_with_the_vertex_cap() {
        let rule = build_rule(RuleKind::NRenewal(2)).unwrap();
        let mut last = f64::NEG_INFINITY;
        for cap in [6u64, 9, 12, 16, 24] {
            let run = gurevich_pressure(&rule, &CyclePotential::zero(), 0, 300, cap).unwrap();
            let oracle = spectral_radius_oracle(&rule, cap as usize).ln();
            assert!((run.estimate - oracle).abs() < 1e-6);
            assert!(
                run.estimate > last - 1e-10,
                "cap {cap} dropped the estimate: {} after {last}",
                run.estimate
            );
            last = run.estimate;
        }
    }

    #[test]
    fn unreachable_and_returnless_bases_are_rejected() {
        let rule = build_rule(RuleKind::Renewal).unwrap();
        assert!(gurevich_pressure(&rule, &CyclePotential::zero(), 12, 60, 12).is_err());
        // Vertex 5 first returns after six steps (down the tail, then back
        // up through the full vertex), so a three-step window sees no cycle.
        assert!(gurevich_pressure(&rule, &CyclePotential::zero(), 5, 3, 12).is_err());
        assert!(gurevich_pressure(&rule, &CyclePotential::zero(), 5, 60, 12).is_ok());
    }

    #[test]
    fn renewal_structures_mix_but_a_bare_cycle_does_not() {
        assert!(check_mixing(&build_rule(RuleKind::Renewal).unwrap(), 10).unwrap());
        assert!(check_mixing(&build_rule(RuleKind::NRenewal(3)).unwrap(), 12).unwrap());
        assert!(check_mixing(&build_rule(RuleKind::InfiniteRenewal).unwrap(), 10).unwrap());
        // Diagnostic fixture: a plain 3-cycle is irreducible but periodic.
        let cycle = vec![vec![1u32], vec![2], vec![0]];
        assert!(!primitive_from(&cycle, 0));
        // A single vertex with no self-loop is not mixing either.
        assert!(!primitive_from(&[Vec::new()], 0));
    }

    #[test]
    fn dictionary_fixture_examples() {
        // Four-symbol itinerary of a 3-branch truncation: expanding branch,
        // two neutral steps, expanding branch.  The first neutral step has
        // two sojourn steps remaining so it sits one above the fan.
        assert_eq!(encode_itinerary(3, &[2, 1, 1, 3]).unwrap(), vec![0, 3, 2, 1]);
        assert_eq!(decode_path(3, &[0, 3, 2, 1]).unwrap(), vec![2, 1, 1, 3]);
        // Two branches: the single expanding branch is the lone block
        // vertex and sojourns climb straight up the tail.
        assert_eq!(encode_itinerary(2, &[2, 1, 1, 1]).unwrap(), vec![0, 3, 2, 1]);
        assert!(encode_itinerary(2, &[1, 1]).is_err());
        assert!(encode_itinerary(3, &[2, 4]).is_err());
    }

    #[test]
    fn truncated_itineraries_recode_onto_the_renewal_shifts() {
        let renyi = MapModel::renyi();
        let two = itinerary_conjugacy_check(&renyi, 2, 4).unwrap();
        assert!(two.clean(), "mismatches: {:?}", two.mismatches);
        // 2^k − 1 words per length k ≤ 4.
        assert_eq!(two.words_checked, 1 + 3 + 7 + 15);
        assert_eq!(two.cycles_checked, two.words_checked);

        let three = itinerary_conjugacy_check(&renyi, 3, 4).unwrap();
        assert!(three.clean(), "mismatches: {:?}", three.mismatches);
        assert_eq!(three.words_checked, 2 + 8 + 26 + 80);
        assert_eq!(three.cycles_checked, three.words_checked);
    }

    #[test]
    fn conjugacy_check_covers_other_neutral_families() {
        let mp = MapModel::infinite_mp(1.0).unwrap();
        let report = itinerary_conjugacy_check(&mp, 3, 3).unwrap();
        assert!(report.clean(), "mismatches: {:?}", report.mismatches);
        // Expanding-only families have no neutral branch to recode.
        assert!(itinerary_conjugacy_check(&MapModel::gauss(), 3, 3).is_err());
    }
}
