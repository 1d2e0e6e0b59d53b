//! Compressed quadtree over canonical squares, with per-node segment lists.
//!
//! Each segment `s` is *associated* with the canonical squares covering its
//! `Q_s`. A node keeps the segments meeting its square whose length is at
//! least its threshold `τ`, the shortest associated length, sorted by
//! decreasing length. The `S'` of a round is then a union of list prefixes.
//! Nodes without associated segments (the root, and branching nodes of the
//! compressed tree) have `τ = ∞` and empty lists.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::canonical::{
    as_canonical, grid_span, lca, level_for_side, CanonicalSquare, UnitTransform, MAX_COVER_SQUARES,
};
use crate::cover::ApproxFactor;
use crate::error::{CanonicalError, QuadtreeError};
use crate::estimate::DensityEstimate;
use crate::geometry::{
    build_qs, count_intersecting, segment_intersects_ball, segment_intersects_rect, AxisRect, Ball,
    Point, Segment, DEFAULT_EPS,
};
use crate::naive::evaluate_round;

pub type NodeId = u32;

const NONE: NodeId = NodeId::MAX;
const ROOT: NodeId = 0;

/// Location of one list inside a [`ListPool`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Span {
    start: u32,
    len: u32,
}

/// Slots reserved for a list of `len` items.
fn slots(len: u32) -> u32 {
    if len == 0 {
        0
    } else {
        len.next_power_of_two()
    }
}

/// Many short lists in one buffer. A list owns at least `slots(len)`
/// entries; outgrowing them moves it to the end.
#[derive(Debug, Clone, Default)]
struct ListPool {
    items: Vec<u32>,
}

impl ListPool {
    fn get(&self, s: Span) -> &[u32] {
        &self.items[s.start as usize..(s.start + s.len) as usize]
    }

    fn alloc(&mut self, list: impl ExactSizeIterator<Item = u32>) -> Span {
        let start = self.items.len();
        let len = list.len() as u32;
        self.items.extend(list);
        self.items.resize(start + slots(len) as usize, 0);
        Span {
            start: start as u32,
            len,
        }
    }

    fn insert(&mut self, s: &mut Span, at: usize, x: u32) {
        if s.len == slots(s.len) {
            let start = self.items.len();
            self.items
                .extend_from_within(s.start as usize..(s.start + s.len) as usize);
            self.items.resize(start + slots(s.len + 1) as usize, 0);
            s.start = start as u32;
        }
        let (base, len) = (s.start as usize, s.len as usize);
        self.items.copy_within(base + at..base + len, base + at + 1);
        self.items[base + at] = x;
        s.len += 1;
    }

    fn replace(&mut self, s: &mut Span, list: &[u32]) {
        if list.len() as u32 <= slots(s.len) {
            let base = s.start as usize;
            self.items[base..base + list.len()].copy_from_slice(list);
            s.len = list.len() as u32;
        } else {
            *s = self.alloc(list.iter().copied());
        }
    }

    fn bytes(&self) -> usize {
        4 * self.items.capacity()
    }
}

/// A node of the compressed quadtree. Its lists live in the index; see
/// [`DensityIndex::associated`] and [`DensityIndex::intersecting`].
#[derive(Debug, Clone)]
pub struct Node {
    kx: u64,
    ky: u64,
    threshold: f64,
    associated: Span,
    intersecting: Span,
    parent: NodeId,
    children: [NodeId; 4],
    level: u8,
}

impl Node {
    fn new(square: CanonicalSquare, parent: NodeId) -> Self {
        Node {
            kx: square.kx,
            ky: square.ky,
            threshold: f64::INFINITY,
            associated: Span::default(),
            intersecting: Span::default(),
            parent,
            children: [NONE; 4],
            level: square.level as u8,
        }
    }

    pub fn square(&self) -> CanonicalSquare {
        CanonicalSquare {
            level: self.level as u32,
            kx: self.kx,
            ky: self.ky,
        }
    }

    pub fn parent(&self) -> Option<NodeId> {
        (self.parent != NONE).then_some(self.parent)
    }

    /// Children by Z-order quadrant.
    pub fn children(&self) -> [Option<NodeId>; 4] {
        self.children.map(|c| (c != NONE).then_some(c))
    }

    /// Shortest associated length, `∞` for a node without associations.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Whether some segment's cover produced this square.
    pub fn is_canonical(&self) -> bool {
        self.associated.len > 0
    }
}

/// Size counters of a built index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexStats {
    pub segments: usize,
    /// Nodes carrying at least one associated segment.
    pub canonical_squares: usize,
    pub nodes: usize,
    /// Sum of all intersecting-list lengths.
    pub resident_list_total: usize,
    /// Rough heap footprint of nodes, lists and covers.
    pub approx_bytes: usize,
}

/// Canonical squares of `Q_s`, clipped to the unit square.
///
/// Same squares as [`crate::canonical::canonical_cover`], enumerated in closed form and left in
/// row order; the index sorts all squares at once.
pub fn preprocess(s: &Segment) -> Result<Vec<CanonicalSquare>, CanonicalError> {
    let mut out = Vec::new();
    preprocess_into(s, &mut out)?;
    Ok(out)
}

fn preprocess_into(s: &Segment, out: &mut Vec<CanonicalSquare>) -> Result<(), CanonicalError> {
    let before = out.len();
    match CoverPlan::of(s)? {
        CoverPlan::Exact(c) => out.push(c),
        plan => plan.for_each(|q| out.push(q)),
    }
    debug_assert!(out.len() - before <= MAX_COVER_SQUARES);
    Ok(())
}

/// How the cover of one segment is enumerated: `Q_s` clipped to the unit
/// square is either canonical itself or split into a grid at one level.
#[derive(Debug, Clone, Copy)]
enum CoverPlan {
    Exact(CanonicalSquare),
    Grid(AxisRect, u32),
}

impl CoverPlan {
    fn of(s: &Segment) -> Result<Self, CanonicalError> {
        let unit = AxisRect::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let q = build_qs(s)
            .to_rect()
            .intersection(&unit)
            .ok_or(CanonicalError::InvalidRegion)?;
        let level = level_for_side(s.length())?;
        Ok(match as_canonical(&q) {
            Some(c) if c.level >= level => CoverPlan::Exact(c),
            _ => CoverPlan::Grid(q, level),
        })
    }

    fn level(&self) -> u32 {
        match self {
            CoverPlan::Exact(c) => c.level,
            CoverPlan::Grid(_, level) => *level,
        }
    }

    fn for_each(&self, mut f: impl FnMut(CanonicalSquare)) {
        match *self {
            CoverPlan::Exact(c) => f(c),
            CoverPlan::Grid(q, level) => {
                let ((x0, x1), (y0, y1)) = grid_span(&q, level);
                for ky in y0..y1 {
                    for kx in x0..x1 {
                        f(CanonicalSquare { level, kx, ky });
                    }
                }
            }
        }
    }

    fn count(&self) -> usize {
        match *self {
            CoverPlan::Exact(_) => 1,
            CoverPlan::Grid(q, level) => {
                let ((x0, x1), (y0, y1)) = grid_span(&q, level);
                ((x1 - x0) * (y1 - y0)) as usize
            }
        }
    }
}

/// The fast 3-approximation, kept current under insertion.
#[derive(Debug, Clone)]
pub struct DensityIndex {
    eps: f64,
    transform: Option<UnitTransform>,
    /// Segments as given.
    originals: Vec<Segment>,
    /// Segments mapped into the unit square.
    segments: Vec<Segment>,
    bounds: Option<AxisRect>,
    covers: Vec<Vec<NodeId>>,
    nodes: Vec<Node>,
    assoc_pool: ListPool,
    list_pool: ListPool,
    /// Z-order key to node, built on the first dynamic insert.
    map: Option<BTreeMap<u128, NodeId>>,
    /// Segment indices by decreasing length, ties by ascending index.
    by_length: Vec<u32>,
    estimate: DensityEstimate,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Default for DensityIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl DensityIndex {
    /// An empty index. The first insert fixes the domain to a square four
    /// times the extent of that segment around it.
    pub fn new() -> Self {
        Self::with_eps(DEFAULT_EPS)
    }

    pub fn with_eps(eps: f64) -> Self {
        let mut map = BTreeMap::new();
        map.insert(CanonicalSquare::UNIT.zorder_key(), ROOT);
        DensityIndex {
            eps,
            transform: None,
            originals: Vec::new(),
            segments: Vec::new(),
            bounds: None,
            covers: Vec::new(),
            nodes: alloc::vec![Node::new(CanonicalSquare::UNIT, NONE)],
            assoc_pool: ListPool::default(),
            list_pool: ListPool::default(),
            map: Some(map),
            by_length: Vec::new(),
            estimate: DensityEstimate::empty(3),
            stamp: Vec::new(),
            epoch: 0,
        }
    }

    /// An empty index whose unit square holds `domain`.
    pub fn with_domain(domain: &AxisRect, eps: f64) -> Result<Self, QuadtreeError> {
        let mut idx = Self::with_eps(eps);
        idx.transform = Some(UnitTransform::fit(domain)?);
        Ok(idx)
    }

    pub fn build(segments: &[Segment]) -> Result<Self, QuadtreeError> {
        Self::build_with_eps(segments, DEFAULT_EPS)
    }

    /// Static construction: covers, one sort, stack-based tree assembly,
    /// push-down, then one round per segment.
    pub fn build_with_eps(segments: &[Segment], eps: f64) -> Result<Self, QuadtreeError> {
        let mut idx = Self::with_eps(eps);
        if segments.is_empty() {
            return Ok(idx);
        }
        let bounds = crate::canonical::bounds_of(segments).ok_or(CanonicalError::EmptyInput)?;
        let t = UnitTransform::fit(&bounds)?;
        idx.transform = Some(t);
        idx.bounds = Some(bounds);
        idx.originals = segments.to_vec();
        idx.segments = segments
            .iter()
            .map(|s| t.apply_segment(s))
            .collect::<Result<Vec<_>, _>>()?;
        idx.assemble()?;
        idx.estimate = idx.query_estimate_normalized();
        Ok(idx)
    }

    /// Rebuilds from scratch over a domain holding `domain` and every stored
    /// segment. The maintained estimate never decreases.
    pub fn rebuild_over(&mut self, domain: &AxisRect) -> Result<(), QuadtreeError> {
        let bounds = self.bounds.map_or(*domain, |b| b.union(domain));
        let previous = self.estimate;
        let mut fresh = Self::with_domain(&bounds, self.eps)?;
        fresh.bounds = Some(bounds);
        let t = fresh.transform.expect("domain fixed above");
        fresh.originals = self.originals.clone();
        fresh.segments = self
            .originals
            .iter()
            .map(|s| t.apply_segment(s))
            .collect::<Result<Vec<_>, _>>()?;
        fresh.assemble()?;
        fresh.estimate = fresh.query_estimate_normalized();
        if previous.value > fresh.estimate.value {
            fresh.estimate = previous;
        }
        *self = fresh;
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn transform(&self) -> Option<UnitTransform> {
        self.transform
    }

    /// Stored segments in original coordinates, by index.
    #[allow(clippy::misnamed_getters)]
    pub fn segments(&self) -> &[Segment] {
        &self.originals
    }

    /// Stored segments in unit-square coordinates, by index.
    pub fn normalized_segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        ROOT
    }

    /// Segments whose cover produced the square of `v`, ascending.
    pub fn associated(&self, v: NodeId) -> &[u32] {
        self.assoc_pool.get(self.nodes[v as usize].associated)
    }

    /// Segments meeting the square of `v` with length at least its
    /// threshold, by decreasing length, ties by ascending index.
    pub fn intersecting(&self, v: NodeId) -> &[u32] {
        self.list_pool.get(self.nodes[v as usize].intersecting)
    }

    /// Nodes associated with segment `i`.
    pub fn cover_of(&self, i: usize) -> &[NodeId] {
        &self.covers[i]
    }

    /// The maintained estimate, witness in original coordinates.
    pub fn estimate(&self) -> DensityEstimate {
        self.estimate
    }

    pub fn stats(&self) -> IndexStats {
        let resident: usize = self.nodes.iter().map(|n| n.intersecting.len as usize).sum();
        let cover_entries: usize = self.covers.iter().map(Vec::capacity).sum();
        IndexStats {
            segments: self.segments.len(),
            canonical_squares: self.nodes.iter().filter(|n| n.is_canonical()).count(),
            nodes: self.nodes.len(),
            resident_list_total: resident,
            approx_bytes: self.nodes.capacity() * core::mem::size_of::<Node>()
                + self.assoc_pool.bytes()
                + self.list_pool.bytes()
                + 4 * cover_entries
                + self.map.as_ref().map_or(0, BTreeMap::len) * 24
                + self.segments.capacity() * 2 * core::mem::size_of::<Segment>(),
        }
    }

    fn tol(&self, square: &CanonicalSquare) -> f64 {
        4.0 * self.eps * square.side()
    }

    fn meets(&self, s: &Segment, v: NodeId) -> bool {
        let sq = self.nodes[v as usize].square();
        segment_intersects_rect(s, &sq.to_rect(), self.tol(&sq))
    }

    /// Builds nodes, covers and lists for `self.segments` on a fresh tree.
    fn assemble(&mut self) -> Result<(), QuadtreeError> {
        let n = self.segments.len();
        let plans = self
            .segments
            .iter()
            .map(CoverPlan::of)
            .collect::<Result<Vec<_>, _>>()?;
        let sorted = sort_zorder(&plans);
        let mut per_segment = alloc::vec![0usize; n];
        for k in 0..sorted.len() {
            per_segment[sorted.owner(k) as usize] += 1;
        }
        drop(plans);

        self.covers = per_segment.into_iter().map(Vec::with_capacity).collect();
        // Each new square adds at most one branching node.
        self.nodes.reserve(2 * sorted.len());
        let mut stack: Vec<NodeId> = alloc::vec![ROOT];
        let mut k = 0;
        while k < sorted.len() {
            let q = sorted.square(k);
            let mut end = k + 1;
            while end < sorted.len() && sorted.same_square(k, end) {
                end += 1;
            }
            let id = if q == CanonicalSquare::UNIT {
                ROOT
            } else {
                while !self.nodes[*stack.last().unwrap() as usize]
                    .square()
                    .contains(&q)
                {
                    stack.pop();
                }
                let u = *stack.last().unwrap();
                let (id, branch) = self.attach(u, q);
                if let Some(b) = branch {
                    stack.push(b);
                }
                stack.push(id);
                id
            };
            let mut tau = f64::INFINITY;
            for j in k..end {
                let i = sorted.owner(j);
                tau = tau.min(self.segments[i as usize].length());
                self.covers[i as usize].push(id);
            }
            let node = &mut self.nodes[id as usize];
            node.threshold = tau;
            node.associated = self.assoc_pool.alloc((k..end).map(|j| sorted.owner(j)));
            k = end;
        }
        drop(sorted);

        self.map = None;

        // Push-down, shortest first; reversing yields decreasing length with
        // ties by ascending index, and a stable sort groups hits by node.
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| self.length_order(b, a));
        let mut hits: Vec<(NodeId, u32)> = Vec::new();
        let mut visit = Vec::new();
        for &i in &order {
            let s = self.segments[i as usize];
            visit.clear();
            visit.push(ROOT);
            while let Some(v) = visit.pop() {
                let node = &self.nodes[v as usize];
                if s.length() >= node.threshold {
                    hits.push((v, i));
                }
                for c in node.children {
                    if c != NONE && self.meets(&s, c) {
                        visit.push(c);
                    }
                }
            }
        }
        hits.reverse();
        hits.sort_by_key(|h| h.0);
        for group in hits.chunk_by(|a, b| a.0 == b.0) {
            let span = self.list_pool.alloc(group.iter().map(|h| h.1));
            self.nodes[group[0].0 as usize].intersecting = span;
        }
        order.reverse();
        self.by_length = order;
        self.stamp = alloc::vec![0; n];
        self.epoch = 0;
        Ok(())
    }

    /// Decreasing length, ties by ascending index.
    fn length_order(&self, a: u32, b: u32) -> core::cmp::Ordering {
        let (la, lb) = (
            self.segments[a as usize].length(),
            self.segments[b as usize].length(),
        );
        lb.total_cmp(&la).then(a.cmp(&b))
    }

    /// Links new square `q` below `u`, its deepest existing ancestor. Returns
    /// the new node and the branching node created for it, if any.
    fn attach(&mut self, u: NodeId, q: CanonicalSquare) -> (NodeId, Option<NodeId>) {
        let quadrant = self.nodes[u as usize].square().quadrant_of(&q);
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node::new(q, u));
        let w = self.nodes[u as usize].children[quadrant];
        if w == NONE {
            self.nodes[u as usize].children[quadrant] = id;
            return (id, None);
        }
        let ws = self.nodes[w as usize].square();
        if q.contains(&ws) {
            self.nodes[id as usize].children[q.quadrant_of(&ws)] = w;
            self.nodes[w as usize].parent = id;
            self.nodes[u as usize].children[quadrant] = id;
            return (id, None);
        }
        let b = lca(&q, &ws);
        let bid = self.nodes.len() as NodeId;
        let mut branch = Node::new(b, u);
        branch.children[b.quadrant_of(&ws)] = w;
        branch.children[b.quadrant_of(&q)] = id;
        self.nodes.push(branch);
        self.nodes[u as usize].children[quadrant] = bid;
        self.nodes[w as usize].parent = bid;
        self.nodes[id as usize].parent = bid;
        (id, Some(bid))
    }

    /// Finds or creates the node of `q`; `true` when created.
    fn insert_square(&mut self, q: CanonicalSquare) -> (NodeId, bool) {
        let key = q.zorder_key();
        let map = self.ordered_map();
        if let Some(&id) = map.get(&key) {
            return (id, false);
        }
        let (_, &p) = map
            .range(..key)
            .next_back()
            .expect("root precedes every square");
        let mut u = p;
        while !self.nodes[u as usize].square().contains(&q) {
            u = self.nodes[u as usize].parent;
        }
        let (id, branch) = self.attach(u, q);
        let branch_key = branch.map(|b| (self.nodes[b as usize].square().zorder_key(), b));
        let map = self.ordered_map();
        map.insert(key, id);
        if let Some((k, b)) = branch_key {
            map.insert(k, b);
        }
        (id, true)
    }

    fn ordered_map(&mut self) -> &mut BTreeMap<u128, NodeId> {
        let nodes = &self.nodes;
        self.map.get_or_insert_with(|| {
            let mut keyed: Vec<(u128, NodeId)> = nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (n.square().zorder_key(), i as NodeId))
                .collect();
            keyed.sort_unstable();
            keyed.into_iter().collect()
        })
    }

    /// Segment indices, other than `skip`, with length in `[lo, hi)` meeting
    /// the square of `v`, by decreasing length. Read from the nearest
    /// ancestor whose list is complete down to `lo`, or from all segments.
    fn collect_for(&self, v: NodeId, lo: f64, hi: f64, skip: u32) -> Vec<u32> {
        let mut a = self.nodes[v as usize].parent;
        while a != NONE && self.nodes[a as usize].threshold > lo {
            a = self.nodes[a as usize].parent;
        }
        let source: &[u32] = if a == NONE {
            &self.by_length
        } else {
            self.list_pool.get(self.nodes[a as usize].intersecting)
        };
        source
            .iter()
            .copied()
            .skip_while(|&j| self.segments[j as usize].length() >= hi)
            .take_while(|&j| self.segments[j as usize].length() >= lo)
            .filter(|&j| j != skip && self.meets(&self.segments[j as usize], v))
            .collect()
    }

    /// Inserts one segment, returning the updated estimate.
    pub fn insert(&mut self, s: Segment) -> Result<DensityEstimate, QuadtreeError> {
        let t = match self.transform {
            Some(t) => t,
            None => {
                let t = UnitTransform::fit(&first_domain(&s))?;
                self.transform = Some(t);
                t
            }
        };
        let ns = t.apply_segment(&s)?;
        let inside = |p: Point| (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y);
        if !inside(ns.a()) || !inside(ns.b()) {
            let required = self
                .bounds
                .map_or(s.bounding_rect(), |b| b.union(&s.bounding_rect()));
            return Err(QuadtreeError::OutOfDomain {
                id: s.id(),
                required: [
                    required.min.x,
                    required.min.y,
                    required.max.x,
                    required.max.y,
                ],
            });
        }
        let squares = preprocess(&ns)?;

        let i = self.segments.len() as u32;
        let len = ns.length();
        self.originals.push(s);
        self.segments.push(ns);
        self.bounds = Some(
            self.bounds
                .map_or(s.bounding_rect(), |b| b.union(&s.bounding_rect())),
        );
        self.stamp.push(0);
        let mut cover = Vec::with_capacity(squares.len());
        for q in squares {
            let (v, created) = self.insert_square(q);
            let old = self.nodes[v as usize].threshold;
            if len < old {
                let mut list = self.collect_for(v, len, old, i);
                if !created {
                    list.extend_from_slice(self.intersecting(v));
                    list.sort_unstable_by(|&a, &b| self.length_order(a, b));
                }
                let node = &mut self.nodes[v as usize];
                node.threshold = len;
                self.list_pool.replace(&mut node.intersecting, &list);
            }
            let node = &mut self.nodes[v as usize];
            let end = node.associated.len as usize;
            self.assoc_pool.insert(&mut node.associated, end, i);
            cover.push(v);
        }
        self.covers.push(cover);
        let pos = self
            .by_length
            .partition_point(|&j| self.length_order(j, i).is_lt());
        self.by_length.insert(pos, i);

        // Push s into every node it meets whose threshold admits it.
        let mut received = Vec::new();
        let mut visit = alloc::vec![ROOT];
        while let Some(v) = visit.pop() {
            if len >= self.nodes[v as usize].threshold {
                let at = self
                    .intersecting(v)
                    .partition_point(|&j| self.length_order(j, i).is_lt());
                self.list_pool
                    .insert(&mut self.nodes[v as usize].intersecting, at, i);
                received.push(v);
            }
            for c in self.nodes[v as usize].children {
                if c != NONE && self.meets(&ns, c) {
                    visit.push(c);
                }
            }
        }

        if let Some(w) = self.estimate.witness {
            if segment_intersects_ball(&s, &w, self.eps) {
                self.estimate.value += 1;
            }
        }
        let mut rounds = alloc::vec![i];
        for &v in &received {
            for &a in self.associated(v) {
                if self.segments[a as usize].length() <= len {
                    rounds.push(a);
                }
            }
        }
        rounds.sort_unstable();
        rounds.dedup();
        let mut scratch = Vec::new();
        for r in rounds {
            self.epoch += 1;
            let epoch = self.epoch;
            let mut stamp = core::mem::take(&mut self.stamp);
            self.gather(r, &mut stamp, epoch, &mut scratch);
            self.stamp = stamp;
            if let Some(round) = self.score(r, &scratch) {
                Self::offer(
                    &mut self.estimate,
                    &self.originals,
                    self.transform,
                    self.eps,
                    r,
                    round,
                );
            }
        }
        Ok(self.estimate)
    }

    /// `S'` of round `i` into `out`: the length-`≥ |s_i|` prefixes of the
    /// lists of its associated nodes.
    fn gather(&self, i: u32, stamp: &mut [u32], epoch: u32, out: &mut Vec<Segment>) {
        out.clear();
        let len = self.segments[i as usize].length();
        for &v in &self.covers[i as usize] {
            for &j in self.intersecting(v) {
                let t = &self.segments[j as usize];
                if t.length() < len {
                    break;
                }
                if stamp[j as usize] != epoch {
                    stamp[j as usize] = epoch;
                    out.push(*t);
                }
            }
        }
    }

    /// Indices of `S'` for segment `i`, ascending.
    pub fn candidates_for(&self, i: usize) -> Vec<u32> {
        let mut stamp = alloc::vec![0u32; self.segments.len()];
        let len = self.segments[i].length();
        let mut out = Vec::new();
        for &v in &self.covers[i] {
            for &j in self.intersecting(v) {
                if self.segments[j as usize].length() < len {
                    break;
                }
                if stamp[j as usize] == 0 {
                    stamp[j as usize] = 1;
                    out.push(j);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// `|S'|` of every round, by segment index.
    pub fn candidate_counts(&self) -> Vec<usize> {
        let mut stamp = alloc::vec![0u32; self.segments.len()];
        let mut scratch = Vec::new();
        (0..self.segments.len() as u32)
            .map(|i| {
                self.gather(i, &mut stamp, i + 1, &mut scratch);
                scratch.len()
            })
            .collect()
    }

    fn score(&self, i: u32, candidates: &[Segment]) -> Option<(u32, Ball)> {
        evaluate_round(
            &self.segments[i as usize],
            candidates,
            ApproxFactor::Three,
            self.eps,
        )
    }

    fn offer(
        estimate: &mut DensityEstimate,
        originals: &[Segment],
        transform: Option<UnitTransform>,
        eps: f64,
        i: u32,
        (count, ball): (u32, Ball),
    ) {
        if count <= estimate.value {
            return;
        }
        let ball = transform.map_or(ball, |t| t.invert_ball(&ball));
        let full = count_intersecting(originals, &ball, eps) as u32;
        estimate.value = full.max(count);
        estimate.witness = Some(ball);
        estimate.witness_segment_id = Some(originals[i as usize].id());
    }

    fn query_estimate_normalized(&self) -> DensityEstimate {
        let mut estimate = DensityEstimate::empty(3);
        let mut stamp = alloc::vec![0u32; self.segments.len()];
        let mut scratch = Vec::new();
        for i in 0..self.segments.len() as u32 {
            self.gather(i, &mut stamp, i + 1, &mut scratch);
            if scratch.len() as u32 <= estimate.value {
                continue;
            }
            if let Some(round) = self.score(i, &scratch) {
                Self::offer(
                    &mut estimate,
                    &self.originals,
                    self.transform,
                    self.eps,
                    i,
                    round,
                );
            }
        }
        estimate
    }

    /// Re-runs every round over the current lists. After inserts this can
    /// differ from [`Self::estimate`], which also keeps earlier maxima.
    pub fn query_estimate(&self) -> DensityEstimate {
        self.query_estimate_normalized()
    }

    /// Full structural and list check against brute force; quadratic, meant
    /// for tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (id, node) in self.nodes.iter().enumerate() {
            let id = id as NodeId;
            let square = node.square();
            if let Some(map) = &self.map {
                if map.get(&square.zorder_key()) != Some(&id) {
                    return Err(format!("node {id} missing from the ordered map"));
                }
            }
            let mut child_count = 0;
            for (q, &c) in node.children.iter().enumerate() {
                if c == NONE {
                    continue;
                }
                child_count += 1;
                let cs = self.nodes[c as usize].square();
                if cs.level <= square.level || !square.contains(&cs) {
                    return Err(format!("child {c} not strictly inside node {id}"));
                }
                if square.quadrant_of(&cs) != q {
                    return Err(format!("child {c} in the wrong quadrant of {id}"));
                }
                if self.nodes[c as usize].parent != id {
                    return Err(format!("child {c} has a stale parent link"));
                }
            }
            let associated = self.associated(id);
            if associated.is_empty() && id != ROOT && child_count < 2 {
                return Err(format!("branching node {id} has {child_count} children"));
            }
            if associated.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("node {id} associated list not ascending"));
            }
            if let Some(&a) = associated
                .iter()
                .find(|&&a| !self.covers[a as usize].contains(&id))
            {
                return Err(format!("node {id} missing from the cover of segment {a}"));
            }
            let tau = associated
                .iter()
                .map(|&a| self.segments[a as usize].length())
                .fold(f64::INFINITY, f64::min);
            if tau != node.threshold {
                return Err(format!("node {id} threshold {} != {tau}", node.threshold));
            }
            let expected: Vec<u32> = self
                .by_length
                .iter()
                .copied()
                .filter(|&j| {
                    self.segments[j as usize].length() >= tau
                        && self.meets(&self.segments[j as usize], id)
                })
                .collect();
            if expected.as_slice() != self.intersecting(id) {
                return Err(format!(
                    "node {id} list {:?} != brute force {:?}",
                    self.intersecting(id),
                    expected
                ));
            }
        }
        if let Some(map) = &self.map {
            if map.len() != self.nodes.len() {
                return Err(format!(
                    "map holds {} keys for {} nodes",
                    map.len(),
                    self.nodes.len()
                ));
            }
        }
        let mut sorted = self.by_length.clone();
        sorted.sort_unstable_by(|&a, &b| self.length_order(a, b));
        if sorted != self.by_length || sorted.len() != self.segments.len() {
            return Err(String::from("length index out of order"));
        }
        Ok(())
    }
}

/// Domain used when the first insert has to pick one.
fn first_domain(s: &Segment) -> AxisRect {
    let r = s.bounding_rect();
    let extent = r.width().max(r.height());
    r.expanded(1.5 * extent)
}

/// Deepest level whose squares get the compact 64-bit key.
const COMPACT_DEPTH: u32 = 29;

/// `(square, owner)` pairs in Z-order, ties in input order, kept as keys.
enum SortedSquares {
    Compact { keys: Vec<(u64, u32)>, depth: u32 },
    Wide(Vec<(u128, u32)>),
}

impl SortedSquares {
    fn len(&self) -> usize {
        match self {
            SortedSquares::Compact { keys, .. } => keys.len(),
            SortedSquares::Wide(keys) => keys.len(),
        }
    }

    fn square(&self, k: usize) -> CanonicalSquare {
        match self {
            SortedSquares::Compact { keys, depth } => square_from_compact(keys[k].0, *depth),
            SortedSquares::Wide(keys) => square_from_key(keys[k].0),
        }
    }

    fn owner(&self, k: usize) -> u32 {
        match self {
            SortedSquares::Compact { keys, .. } => keys[k].1,
            SortedSquares::Wide(keys) => keys[k].1,
        }
    }

    fn same_square(&self, a: usize, b: usize) -> bool {
        match self {
            SortedSquares::Compact { keys, .. } => keys[a].0 == keys[b].0,
            SortedSquares::Wide(keys) => keys[a].0 == keys[b].0,
        }
    }
}

fn sort_zorder(plans: &[CoverPlan]) -> SortedSquares {
    let depth = plans.iter().map(CoverPlan::level).max().unwrap_or(0);
    let total = plans.iter().map(CoverPlan::count).sum();
    if depth <= COMPACT_DEPTH {
        let mut keys: Vec<(u64, u32)> = Vec::with_capacity(total);
        for (i, p) in plans.iter().enumerate() {
            p.for_each(|q| keys.push((compact_key(&q, depth), i as u32)));
        }
        radix_sort(&mut keys);
        SortedSquares::Compact { keys, depth }
    } else {
        let mut keys: Vec<(u128, u32)> = Vec::with_capacity(total);
        for (i, p) in plans.iter().enumerate() {
            p.for_each(|q| keys.push((q.zorder_key(), i as u32)));
        }
        keys.sort_by_key(|p| p.0);
        SortedSquares::Wide(keys)
    }
}

/// [`CanonicalSquare::zorder_key`] with corners aligned at `depth` instead of
/// the maximum level; same order for squares no deeper than `depth`.
fn compact_key(q: &CanonicalSquare, depth: u32) -> u64 {
    let shift = depth - q.level;
    let morton = spread32((q.kx << shift) as u32) | (spread32((q.ky << shift) as u32) << 1);
    (morton << 6) | q.level as u64
}

fn square_from_compact(key: u64, depth: u32) -> CanonicalSquare {
    let level = (key & 0x3f) as u32;
    let morton = key >> 6;
    let shift = depth - level;
    CanonicalSquare {
        level,
        kx: (compact32(morton) >> shift) as u64,
        ky: (compact32(morton >> 1) >> shift) as u64,
    }
}

fn spread32(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn compact32(v: u64) -> u32 {
    let mut x = v & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    x = (x | (x >> 16)) & 0x0000_0000_ffff_ffff;
    x as u32
}

/// Stable LSD radix sort on the key, one byte per pass; passes where every
/// key shares the byte are skipped.
fn radix_sort(v: &mut Vec<(u64, u32)>) {
    let mut buf = alloc::vec![(0u64, 0u32); v.len()];
    for pass in 0..8 {
        let shift = pass * 8;
        let mut counts = [0usize; 256];
        for &(k, _) in v.iter() {
            counts[((k >> shift) & 0xff) as usize] += 1;
        }
        if counts.contains(&v.len()) {
            continue;
        }
        let mut offset = 0;
        for c in counts.iter_mut() {
            let here = *c;
            *c = offset;
            offset += here;
        }
        for &item in v.iter() {
            let d = ((item.0 >> shift) & 0xff) as usize;
            buf[counts[d]] = item;
            counts[d] += 1;
        }
        core::mem::swap(v, &mut buf);
    }
}

/// Inverse of [`CanonicalSquare::zorder_key`].
fn square_from_key(key: u128) -> CanonicalSquare {
    let level = (key & 0xff) as u32;
    let morton = key >> 8;
    let shift = crate::canonical::MAX_LEVEL - level;
    CanonicalSquare {
        level,
        kx: compact(morton) >> shift,
        ky: compact(morton >> 1) >> shift,
    }
}

fn compact(v: u128) -> u64 {
    let mut x = v & 0x5555_5555_5555_5555_5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333_3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff_00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff_0000_ffff_0000_ffff;
    x = (x | (x >> 16)) & 0x0000_0000_ffff_ffff_0000_0000_ffff_ffff;
    x = (x | (x >> 32)) & 0x0000_0000_0000_0000_ffff_ffff_ffff_ffff;
    x as u64
}
