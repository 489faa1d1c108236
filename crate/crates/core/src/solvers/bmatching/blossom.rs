//! Maximum-weight matching in general graphs (Edmonds' blossom algorithm with
//! the primal-dual O(n³) bookkeeping of Galil; structure follows J. van
//! Rantwijk's well-known reference implementation).
//!
//! Weights are integers; dual variables are kept doubled so all arithmetic
//! stays integral.

const NONE: usize = usize::MAX;

struct State<'e> {
    nvertex: usize,
    edges: &'e [(usize, usize, i64)],
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

fn wrap(j: isize, len: usize) -> usize {
    j.rem_euclid(len as isize) as usize
}

impl<'e> State<'e> {
    fn slack(&self, k: usize) -> i64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2 * w
    }

    fn leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                if t < self.nvertex {
                    out.push(t);
                } else {
                    self.leaves(t, out);
                }
            }
        }
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.leaves(b, &mut out);
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let l = self.blossom_leaves(b);
            self.queue.extend(l);
        } else if t == 2 {
            let base = self.blossombase[b];
            let mb = self.mate[base];
            debug_assert!(mb != NONE);
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Trace back from v and w to find a new blossom base or an augmenting path.
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert_eq!(self.label[b], 2);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom slot available");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        debug_assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;
        for v in self.blossom_leaves(b) {
            if self.label[self.inblossom[v]] == 2 {
                self.queue.push(v);
            }
            self.inblossom[v] = b;
        }

        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for &bv in &path {
            let nblists: Vec<Vec<usize>> = match self.blossombestedges[bv].take() {
                Some(list) => vec![list],
                None => self
                    .blossom_leaves(bv)
                    .into_iter()
                    .map(|v| self.neighbend[v].iter().map(|p| p / 2).collect())
                    .collect(),
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[bv] = NONE;
        }
        let list: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &list {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
        self.blossombestedges[b] = Some(list);
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.blossom_leaves(s) {
                    self.inblossom[v] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            let len = childs.len();
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = childs
                .iter()
                .position(|&c| c == entrychild)
                .expect("entry child") as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 == 1 {
                j -= len as isize;
                (1, 0)
            } else {
                (-1, 1)
            };
            let endps = self.blossomendps[b].clone();
            let ep = |j: isize| endps[wrap(j - endptrick as isize, len)];
            let mut p = self.labelend[b];
            while j != 0 {
                let a = self.endpoint[p ^ 1];
                self.label[a] = 0;
                let c = self.endpoint[ep(j) ^ endptrick ^ 1];
                self.label[c] = 0;
                self.assign_label(a, 2, p);
                self.allowedge[ep(j) / 2] = true;
                j += jstep;
                p = ep(j) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = childs[wrap(j, len)];
            let a = self.endpoint[p ^ 1];
            self.label[a] = 2;
            self.label[bv] = 2;
            self.labelend[a] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while childs[wrap(j, len)] != entrychild {
                let bv = childs[wrap(j, len)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let leaves = self.blossom_leaves(bv);
                if let Some(&v) = leaves.iter().find(|&&v| self.label[v] != 0) {
                    debug_assert_eq!(self.label[v], 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    let m = self.endpoint[self.mate[self.blossombase[bv]]];
                    self.label[m] = 0;
                    let le = self.labelend[v];
                    self.assign_label(v, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b] = Vec::new();
        self.blossomendps[b] = Vec::new();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len();
        let i = self.blossomchilds[b]
            .iter()
            .position(|&c| c == t)
            .expect("child") as isize;
        let mut j = i;
        let (jstep, endptrick): (isize, usize) = if i & 1 == 1 {
            j -= len as isize;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            let p = self.blossomendps[b][wrap(j - endptrick as isize, len)] ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        let i = i as usize;
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }
}

/// Maximum-weight matching; with `max_cardinality`, the maximum-weight
/// matching among those of maximum cardinality. Returns `mate[v]`.
pub fn max_weight_matching(
    nvertex: usize,
    edges: &[(usize, usize, i64)],
    max_cardinality: bool,
) -> Vec<Option<usize>> {
    if edges.is_empty() || nvertex == 0 {
        return vec![None; nvertex];
    }
    let nedge = edges.len();
    for &(i, j, _) in edges {
        assert!(
            i != j && i < nvertex && j < nvertex,
            "malformed edge ({i}, {j})"
        );
    }
    let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
    let endpoint: Vec<usize> = (0..2 * nedge)
        .map(|p| {
            if p % 2 == 0 {
                edges[p / 2].0
            } else {
                edges[p / 2].1
            }
        })
        .collect();
    let mut neighbend = vec![Vec::new(); nvertex];
    for (k, &(i, j, _)) in edges.iter().enumerate() {
        neighbend[i].push(2 * k + 1);
        neighbend[j].push(2 * k);
    }
    let mut blossombase: Vec<usize> = (0..nvertex).collect();
    blossombase.extend(std::iter::repeat_n(NONE, nvertex));
    let mut dualvar = vec![maxweight; nvertex];
    dualvar.extend(std::iter::repeat_n(0, nvertex));
    let mut s = State {
        nvertex,
        edges,
        endpoint,
        neighbend,
        mate: vec![NONE; nvertex],
        label: vec![0; 2 * nvertex],
        labelend: vec![NONE; 2 * nvertex],
        inblossom: (0..nvertex).collect(),
        blossomparent: vec![NONE; 2 * nvertex],
        blossomchilds: vec![Vec::new(); 2 * nvertex],
        blossombase,
        blossomendps: vec![Vec::new(); 2 * nvertex],
        bestedge: vec![NONE; 2 * nvertex],
        blossombestedges: vec![None; 2 * nvertex],
        unusedblossoms: (nvertex..2 * nvertex).collect(),
        dualvar,
        allowedge: vec![false; nedge],
        queue: Vec::new(),
    };

    for _ in 0..nvertex {
        s.label.iter_mut().for_each(|l| *l = 0);
        s.bestedge.iter_mut().for_each(|e| *e = NONE);
        for b in nvertex..2 * nvertex {
            s.blossombestedges[b] = None;
        }
        s.allowedge.iter_mut().for_each(|a| *a = false);
        s.queue.clear();
        for v in 0..nvertex {
            if s.mate[v] == NONE && s.label[s.inblossom[v]] == 0 {
                s.assign_label(v, 1, NONE);
            }
        }

        let mut augmented = false;
        loop {
            while !augmented {
                let Some(v) = s.queue.pop() else { break };
                debug_assert_eq!(s.label[s.inblossom[v]], 1);
                for idx in 0..s.neighbend[v].len() {
                    let p = s.neighbend[v][idx];
                    let k = p / 2;
                    let w = s.endpoint[p];
                    if s.inblossom[v] == s.inblossom[w] {
                        continue;
                    }
                    let mut kslack = 0;
                    if !s.allowedge[k] {
                        kslack = s.slack(k);
                        if kslack <= 0 {
                            s.allowedge[k] = true;
                        }
                    }
                    if s.allowedge[k] {
                        if s.label[s.inblossom[w]] == 0 {
                            s.assign_label(w, 2, p ^ 1);
                        } else if s.label[s.inblossom[w]] == 1 {
                            let base = s.scan_blossom(v, w);
                            if base != NONE {
                                s.add_blossom(base, k);
                            } else {
                                s.augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if s.label[w] == 0 {
                            debug_assert_eq!(s.label[s.inblossom[w]], 2);
                            s.label[w] = 2;
                            s.labelend[w] = p ^ 1;
                        }
                    } else if s.label[s.inblossom[w]] == 1 {
                        let b = s.inblossom[v];
                        if s.bestedge[b] == NONE || kslack < s.slack(s.bestedge[b]) {
                            s.bestedge[b] = k;
                        }
                    } else if s.label[w] == 0
                        && (s.bestedge[w] == NONE || kslack < s.slack(s.bestedge[w]))
                    {
                        s.bestedge[w] = k;
                    }
                }
            }
            if augmented {
                break;
            }

            // dual adjustment
            let mut deltatype = 0u8;
            let mut delta = 0i64;
            let mut deltaedge = NONE;
            let mut deltablossom = NONE;
            if !max_cardinality {
                deltatype = 1;
                delta = *s.dualvar[..nvertex].iter().min().expect("vertices");
            }
            for v in 0..nvertex {
                if s.label[s.inblossom[v]] == 0 && s.bestedge[v] != NONE {
                    let d = s.slack(s.bestedge[v]);
                    if deltatype == 0 || d < delta {
                        delta = d;
                        deltatype = 2;
                        deltaedge = s.bestedge[v];
                    }
                }
            }
            for b in 0..2 * nvertex {
                if s.blossomparent[b] == NONE && s.label[b] == 1 && s.bestedge[b] != NONE {
                    let kslack = s.slack(s.bestedge[b]);
                    debug_assert_eq!(kslack % 2, 0);
                    let d = kslack / 2;
                    if deltatype == 0 || d < delta {
                        delta = d;
                        deltatype = 3;
                        deltaedge = s.bestedge[b];
                    }
                }
            }
            for b in nvertex..2 * nvertex {
                if s.blossombase[b] != NONE
                    && s.blossomparent[b] == NONE
                    && s.label[b] == 2
                    && (deltatype == 0 || s.dualvar[b] < delta)
                {
                    delta = s.dualvar[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if deltatype == 0 {
                debug_assert!(max_cardinality);
                deltatype = 1;
                delta = (*s.dualvar[..nvertex].iter().min().expect("vertices")).max(0);
            }

            for v in 0..nvertex {
                match s.label[s.inblossom[v]] {
                    1 => s.dualvar[v] -= delta,
                    2 => s.dualvar[v] += delta,
                    _ => {}
                }
            }
            for b in nvertex..2 * nvertex {
                if s.blossombase[b] != NONE && s.blossomparent[b] == NONE {
                    match s.label[b] {
                        1 => s.dualvar[b] += delta,
                        2 => s.dualvar[b] -= delta,
                        _ => {}
                    }
                }
            }

            match deltatype {
                1 => break,
                2 => {
                    s.allowedge[deltaedge] = true;
                    let (mut i, mut j, _) = edges[deltaedge];
                    if s.label[s.inblossom[i]] == 0 {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = j;
                    s.queue.push(i);
                }
                3 => {
                    s.allowedge[deltaedge] = true;
                    let (i, _, _) = edges[deltaedge];
                    s.queue.push(i);
                }
                _ => s.expand_blossom(deltablossom, false),
            }
        }

        if !augmented {
            break;
        }
        for b in nvertex..2 * nvertex {
            if s.blossomparent[b] == NONE
                && s.blossombase[b] != NONE
                && s.label[b] == 1
                && s.dualvar[b] == 0
            {
                s.expand_blossom(b, true);
            }
        }
    }

    s.mate
        .iter()
        .map(|&p| (p != NONE).then(|| s.endpoint[p]))
        .collect()
}
