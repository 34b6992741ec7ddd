//! Exhaustive search for t-PDDS[H] on small tori, posed as exact cover of
//! the torus by radius-`t` neighbourhoods of H copies.
//!
//! Branching always covers the least uncovered vertex, trying placements in
//! canonical order, so node counts and first solutions are reproducible.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{PddsError, Result};
use crate::lattice::{box_shape, t_neighborhood, BoxSpec, Point, Shape, TorusDims, TorusIndex};
use crate::verifier::{verify_pdds, PddsInstance};

pub const DEFAULT_MAX_CELLS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientations {
    /// Every image of H under a permutation of the axes.
    AllAxisPermutations,
    /// H exactly as given.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchProblem {
    pub torus: TorusDims,
    pub t: u32,
    pub h_spec: BoxSpec,
    pub orientations: Orientations,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub max_cells: u64,
    pub jobs: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_cells: DEFAULT_MAX_CELLS,
            jobs: 1,
        }
    }
}

impl SearchOptions {
    /// Defaults, with the cell cap taken from `PDDS_MAX_CELLS` when set.
    pub fn from_env() -> Result<Self> {
        let mut opts = Self::default();
        if let Ok(raw) = std::env::var("PDDS_MAX_CELLS") {
            opts.max_cells = raw
                .trim()
                .parse()
                .map_err(|_| PddsError::InvalidInput(format!("PDDS_MAX_CELLS={raw:?}")))?;
        }
        Ok(opts)
    }
}

/// An H copy and the vertices within distance `t` of it, as sorted vertex
/// indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Placement {
    pub component: Vec<u64>,
    pub cells: Vec<u64>,
}

fn orientations(problem: &SearchProblem) -> Vec<BoxSpec> {
    match problem.orientations {
        Orientations::Fixed => vec![problem.h_spec.clone()],
        Orientations::AllAxisPermutations => problem.h_spec.axis_permutations(),
    }
}

fn check_problem(problem: &SearchProblem, max_cells: u64) -> Result<TorusIndex> {
    if problem.h_spec.dim() != problem.torus.dim() {
        return Err(PddsError::DimensionMismatch {
            expected: problem.torus.dim(),
            found: problem.h_spec.dim(),
        });
    }
    BoxSpec::new(problem.h_spec.extents.clone())?;
    if problem.t == 0 {
        return Err(PddsError::InvalidInput(
            "search needs t >= 1; with t = 0 a tiling by H is not a PDDS".into(),
        ));
    }
    TorusIndex::new(&problem.torus, max_cells)
}

/// `|H*|` on the infinite grid.
pub fn star_size(problem: &SearchProblem) -> Result<u64> {
    let h = box_shape(&problem.h_spec)?;
    Ok(t_neighborhood(&h, problem.t, None)?.len() as u64)
}

/// Placements whose H copy and neighbourhood embed in the torus without
/// wrapping onto themselves, sorted and deduplicated.
pub fn placement_indices(problem: &SearchProblem, max_cells: u64) -> Result<Vec<Placement>> {
    let ix = check_problem(problem, max_cells)?;
    let mut out = Vec::new();
    for spec in orientations(problem) {
        let h = box_shape(&spec)?;
        let star = t_neighborhood(&h, problem.t, None)?;
        let place = |anchor: &Point, offs: &Shape| -> Vec<u64> {
            let mut v: Vec<u64> = offs
                .iter()
                .map(|o| ix.index(&anchor.add(o).expect("same dimension")))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for a in 0..ix.volume() {
            let anchor = ix.point(a);
            let component = place(&anchor, &h);
            let cells = place(&anchor, &star);
            if component.len() == h.len() && cells.len() == star.len() {
                out.push(Placement { component, cells });
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// The placements as `(cells, component)` shapes on the torus.
pub fn enumerate_placements(problem: &SearchProblem) -> Result<Vec<(Shape, Shape)>> {
    let ix = TorusIndex::new(&problem.torus, u64::MAX)?;
    let n = problem.torus.dim();
    let to_shape = |v: &[u64]| Shape::new(n, v.iter().map(|&i| ix.point(i)));
    placement_indices(problem, u64::MAX)?
        .iter()
        .map(|p| Ok((to_shape(&p.cells)?, to_shape(&p.component)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Found(PddsInstance),
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub outcome: Outcome,
    /// Root node plus every node of the first-level subtrees up to and
    /// including the one holding the solution.
    pub nodes_explored: u64,
    /// Node counts of those first-level subtrees, in branching order.
    pub subproblem_nodes: Vec<u64>,
    pub wall_time_ms: u64,
}

impl SearchResult {
    pub fn found(&self) -> bool {
        matches!(self.outcome, Outcome::Found(_))
    }
}

impl Serialize for SearchResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match &self.outcome {
            Outcome::Found(inst) => {
                m.serialize_entry("outcome", "found")?;
                m.serialize_entry("instance", inst)?;
            }
            Outcome::Exhausted => m.serialize_entry("outcome", "exhausted")?,
        }
        m.serialize_entry("nodes_explored", &self.nodes_explored)?;
        m.serialize_entry("subproblem_nodes", &self.subproblem_nodes)?;
        m.serialize_entry("wall_time_ms", &self.wall_time_ms)?;
        m.end()
    }
}

struct Cover<'a> {
    placements: &'a [Placement],
    by_cell: &'a [Vec<u32>],
    covered: Vec<u64>,
    volume: u64,
    chosen: Vec<u32>,
    nodes: u64,
    abort: Option<&'a dyn Fn() -> bool>,
    halted: bool,
}

impl<'a> Cover<'a> {
    fn new(placements: &'a [Placement], by_cell: &'a [Vec<u32>], volume: u64) -> Self {
        Cover {
            placements,
            by_cell,
            covered: vec![0; volume.div_ceil(64) as usize],
            volume,
            chosen: Vec::new(),
            nodes: 0,
            abort: None,
            halted: false,
        }
    }

    fn is_covered(&self, c: u64) -> bool {
        self.covered[(c / 64) as usize] >> (c % 64) & 1 == 1
    }

    fn fits(&self, p: u32) -> bool {
        self.placements[p as usize]
            .cells
            .iter()
            .all(|&c| !self.is_covered(c))
    }

    fn toggle(&mut self, p: u32) {
        for &c in &self.placements[p as usize].cells {
            self.covered[(c / 64) as usize] ^= 1 << (c % 64);
        }
    }

    fn next_uncovered(&self, from: u64) -> Option<u64> {
        (from..self.volume).find(|&c| !self.is_covered(c))
    }

    /// Counts itself as one node; true once everything is covered.
    fn dfs(&mut self, from: u64) -> bool {
        self.nodes += 1;
        if self.halted {
            return false;
        }
        if self.nodes.is_multiple_of(4096) && self.abort.is_some_and(|f| f()) {
            self.halted = true;
            return false;
        }
        let Some(cell) = self.next_uncovered(from) else {
            return true;
        };
        for &p in &self.by_cell[cell as usize] {
            if !self.fits(p) {
                continue;
            }
            self.toggle(p);
            self.chosen.push(p);
            if self.dfs(cell + 1) {
                return true;
            }
            self.chosen.pop();
            self.toggle(p);
        }
        false
    }
}

/// Depth-first exact cover. A found instance is verified before returning.
/// Nodes of one first-level subtree, and the placements of its solution.
type SubResult = (u64, Option<Vec<u32>>);

pub fn exact_cover_search(problem: &SearchProblem) -> Result<SearchResult> {
    exact_cover_search_with(problem, &SearchOptions::default())
}

pub fn exact_cover_search_with(
    problem: &SearchProblem,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let start = Instant::now();
    let ix = check_problem(problem, opts.max_cells)?;
    let volume = ix.volume();
    let elapsed = |start: Instant| start.elapsed().as_millis() as u64;
    if volume % star_size(problem)? != 0 {
        return Ok(SearchResult {
            outcome: Outcome::Exhausted,
            nodes_explored: 0,
            subproblem_nodes: Vec::new(),
            wall_time_ms: elapsed(start),
        });
    }
    let placements = placement_indices(problem, opts.max_cells)?;
    let mut by_cell: Vec<Vec<u32>> = vec![Vec::new(); volume as usize];
    for (i, p) in placements.iter().enumerate() {
        for &c in &p.cells {
            by_cell[c as usize].push(i as u32);
        }
    }
    // vertex 0 is the least uncovered vertex at the root
    let first: Vec<u32> = by_cell[0].clone();
    let results: Vec<Mutex<Option<SubResult>>> = first.iter().map(|_| Mutex::new(None)).collect();
    let found_at = AtomicUsize::new(usize::MAX);
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= first.len() || i > found_at.load(Ordering::SeqCst) {
            return;
        }
        let stop = AtomicBool::new(false);
        let abort = || {
            if i > found_at.load(Ordering::SeqCst) {
                stop.store(true, Ordering::SeqCst);
            }
            stop.load(Ordering::SeqCst)
        };
        let mut cover = Cover::new(&placements, &by_cell, volume);
        cover.abort = Some(&abort);
        cover.toggle(first[i]);
        cover.chosen.push(first[i]);
        let solved = cover.dfs(1);
        if stop.load(Ordering::SeqCst) {
            return;
        }
        if solved {
            found_at.fetch_min(i, Ordering::SeqCst);
        }
        *results[i].lock().expect("no poisoned locks") =
            Some((cover.nodes, solved.then(|| cover.chosen.clone())));
    };
    let jobs = opts.jobs.max(1).min(first.len().max(1));
    if jobs == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(worker);
            }
        });
    }
    let mut nodes = 1u64;
    let mut per = Vec::new();
    let mut solution = None;
    for r in results {
        let Some((n, sol)) = r.into_inner().expect("no poisoned locks") else {
            break;
        };
        nodes += n;
        per.push(n);
        if sol.is_some() {
            solution = sol;
            break;
        }
    }
    let outcome = match solution {
        None => Outcome::Exhausted,
        Some(chosen) => {
            let n = problem.torus.dim();
            let comps = chosen
                .iter()
                .map(|&p| {
                    Shape::new(
                        n,
                        placements[p as usize]
                            .component
                            .iter()
                            .map(|&c| ix.point(c)),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let inst = PddsInstance::from_components(
                problem.torus.clone(),
                problem.t,
                problem.h_spec.clone(),
                comps,
            )?;
            if !verify_pdds(&inst)?.pass {
                return Err(PddsError::NotVerified);
            }
            Outcome::Found(inst)
        }
    };
    Ok(SearchResult {
        outcome,
        nodes_explored: nodes,
        subproblem_nodes: per,
        wall_time_ms: elapsed(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(torus: &[i64], t: u32, h: &[i64], o: Orientations) -> SearchProblem {
        SearchProblem {
            torus: TorusDims::new(torus.to_vec()).unwrap(),
            t,
            h_spec: BoxSpec::new(h.to_vec()).unwrap(),
            orientations: o,
        }
    }

    #[test]
    fn placement_counts() {
        let all = Orientations::AllAxisPermutations;
        assert_eq!(
            enumerate_placements(&problem(&[5, 5], 1, &[1, 1], all))
                .unwrap()
                .len(),
            25
        );
        assert_eq!(
            enumerate_placements(&problem(&[8, 8], 1, &[3, 3], all))
                .unwrap()
                .len(),
            64
        );
        assert_eq!(
            enumerate_placements(&problem(&[6, 6], 1, &[2, 3], all))
                .unwrap()
                .len(),
            72
        );
        let fixed = Orientations::Fixed;
        assert_eq!(
            enumerate_placements(&problem(&[6, 6], 1, &[2, 3], fixed))
                .unwrap()
                .len(),
            36
        );
        let (cells, comp) = &enumerate_placements(&problem(&[5, 5], 1, &[1, 1], all)).unwrap()[0];
        assert_eq!(cells.len(), 5);
        assert_eq!(comp.len(), 1);
    }

    #[test]
    fn perfect_lee_code_on_five_by_five() {
        let r = exact_cover_search(&problem(
            &[5, 5],
            1,
            &[1, 1],
            Orientations::AllAxisPermutations,
        ))
        .unwrap();
        let Outcome::Found(inst) = &r.outcome else {
            panic!("expected a code")
        };
        assert_eq!(inst.len(), 5);
        assert!(verify_pdds(inst).unwrap().pass);
    }

    #[test]
    fn divisibility_short_circuit() {
        let r = exact_cover_search(&problem(
            &[5, 6],
            1,
            &[3, 3],
            Orientations::AllAxisPermutations,
        ))
        .unwrap();
        assert_eq!(r.outcome, Outcome::Exhausted);
        assert_eq!(r.nodes_explored, 0);
    }

    #[test]
    fn thread_count_does_not_change_the_answer() {
        for (torus, h) in [
            (&[6, 7][..], &[3, 3][..]),
            (&[5, 5], &[1, 1]),
            (&[4, 4], &[2, 2]),
        ] {
            let p = problem(torus, 1, h, Orientations::AllAxisPermutations);
            let one = exact_cover_search(&p).unwrap();
            let many = exact_cover_search_with(
                &p,
                &SearchOptions {
                    jobs: 3,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(one.outcome, many.outcome);
            assert_eq!(one.nodes_explored, many.nodes_explored);
            assert_eq!(one.subproblem_nodes, many.subproblem_nodes);
        }
    }

    #[test]
    fn cap_and_radius_checks() {
        let p = problem(&[100, 100], 1, &[1, 1], Orientations::Fixed);
        assert!(matches!(
            exact_cover_search(&p),
            Err(PddsError::TorusTooLarge { .. })
        ));
        let p = problem(&[4, 4], 0, &[1, 1], Orientations::Fixed);
        assert!(exact_cover_search(&p).is_err());
    }

    #[test]
    fn result_json() {
        let r = exact_cover_search(&problem(&[5, 6], 1, &[3, 3], Orientations::Fixed)).unwrap();
        let js = serde_json::to_value(&r).unwrap();
        assert_eq!(js["outcome"], "exhausted");
        assert!(js.get("instance").is_none());
    }
}
