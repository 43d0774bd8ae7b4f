use std::collections::VecDeque;

use super::{GroupError, Letter};

/// A finite group given by its full multiplication table, verified at load.
#[derive(Clone, Debug)]
pub struct FiniteTable {
    table: Vec<Vec<u32>>,
    identity: u32,
    inverse: Vec<u32>,
    /// shortest word for each element in the chosen generators
    words: Vec<Vec<Letter>>,
}

impl FiniteTable {
    pub fn new(table: Vec<Vec<u32>>) -> Result<Self, GroupError> {
        let n = table.len();
        let invalid = |m: String| Err(GroupError::InvalidParameters(m));
        if n == 0 {
            return invalid("empty multiplication table".into());
        }
        if table.iter().any(|row| row.len() != n) {
            return invalid("multiplication table is not square".into());
        }
        if table.iter().flatten().any(|&x| x as usize >= n) {
            return invalid("multiplication table is not closed".into());
        }
        let identity = (0..n).find(|&e| {
            (0..n).all(|x| table[e][x] as usize == x && table[x][e] as usize == x)
        });
        let Some(identity) = identity else {
            return invalid("multiplication table has no identity".into());
        };
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b] as usize;
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c] as usize] {
                        return invalid(format!("table not associative at ({a},{b},{c})"));
                    }
                }
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for (a, row) in table.iter().enumerate() {
            match row.iter().position(|&x| x as usize == identity) {
                Some(b) => inverse.push(b as u32),
                None => return invalid(format!("element {a} has no inverse")),
            }
        }
        Ok(FiniteTable {
            table,
            identity: identity as u32,
            inverse,
            words: Vec::new(),
        })
    }

    pub fn cyclic(order: u32) -> Result<Self, GroupError> {
        if order == 0 {
            return Err(GroupError::InvalidParameters("cyclic group needs order >= 1".into()));
        }
        let table = (0..order)
            .map(|i| (0..order).map(|j| (i + j) % order).collect())
            .collect();
        Self::new(table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize][b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    pub(crate) fn generated_by(&self, gens: &[u32]) -> bool {
        self.bfs_words(gens).iter().all(Option::is_some)
    }

    fn bfs_words(&self, gens: &[u32]) -> Vec<Option<Vec<Letter>>> {
        let mut words: Vec<Option<Vec<Letter>>> = vec![None; self.order()];
        words[self.identity as usize] = Some(Vec::new());
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            let wx = words[x as usize].clone().expect("visited");
            for (i, &g) in gens.iter().enumerate() {
                for (inverse, h) in [(false, g), (true, self.inv(g))] {
                    let y = self.mul(x, h);
                    if words[y as usize].is_none() {
                        let mut w = wx.clone();
                        w.push(super::letter(i, inverse));
                        words[y as usize] = Some(w);
                        queue.push_back(y);
                    }
                }
            }
        }
        words
    }

    pub(crate) fn with_word_cache(mut self, gens: &[u32]) -> Self {
        self.words = self
            .bfs_words(gens)
            .into_iter()
            .map(|w| w.expect("generated"))
            .collect();
        self
    }

    pub(crate) fn word_of(&self, a: u32) -> &[Letter] {
        &self.words[a as usize]
    }
}
