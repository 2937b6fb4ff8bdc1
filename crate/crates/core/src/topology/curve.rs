use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Letter, TopologyError, Word};

/// Closed genus-g surface group ⟨a₁,b₁,…,a_g,b_g | ∏[aᵢ,bᵢ]⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfacePresentation {
    pub genus: usize,
}

impl SurfacePresentation {
    pub fn new(genus: usize) -> Result<Self, TopologyError> {
        if genus < 2 {
            return Err(TopologyError::Genus(genus));
        }
        Ok(SurfacePresentation { genus })
    }

    pub fn relator(&self) -> Word {
        let mut letters = Vec::new();
        for i in 1..=self.genus {
            letters.extend([Letter::a(i), Letter::b(i), Letter::a(i).inv(), Letter::b(i).inv()]);
        }
        Word::from_letters(letters)
    }

    pub fn generators(&self) -> Vec<Word> {
        (1..=2 * self.genus as i8).map(|k| Word::letter(Letter(k))).collect()
    }
}

/// Free homotopy class of a closed curve, carried by a cyclically reduced word.
#[derive(Clone, Debug)]
pub struct CurveClass {
    word: Word,
    genus: usize,
    simple: Option<bool>,
}

impl PartialEq for CurveClass {
    fn eq(&self, o: &Self) -> bool {
        self.genus == o.genus && self.word == o.word
    }
}
impl Eq for CurveClass {}

impl std::hash::Hash for CurveClass {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.genus.hash(h);
        self.word.hash(h);
    }
}

impl CurveClass {
    pub fn new(word: Word, genus: usize) -> Result<Self, TopologyError> {
        let word = word.cyclic_reduce();
        if word.is_empty() {
            return Err(TopologyError::EmptyCurve);
        }
        if word.max_generator() > 2 * genus {
            return Err(TopologyError::Parse(format!("{word} uses generators beyond genus {genus}")));
        }
        Ok(CurveClass { word, genus, simple: None })
    }

    pub fn parse(s: &str, genus: usize) -> Result<Self, TopologyError> {
        Self::new(s.parse()?, genus)
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn inverse(&self) -> CurveClass {
        CurveClass { word: self.word.inverse(), genus: self.genus, simple: self.simple }
    }

    pub fn homology(&self) -> Vec<i64> {
        self.word.homology(self.genus)
    }

    /// Null-homologous. For simple curves this is exactly "separating".
    pub fn is_separating(&self) -> bool {
        self.homology().iter().all(|&x| x == 0)
    }

    pub fn simple(&self) -> Option<bool> {
        self.simple
    }

    pub fn with_simple(mut self, simple: bool) -> Self {
        self.simple = Some(simple);
        self
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

impl Serialize for CurveClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.word.to_string())
    }
}

impl<'de> Deserialize<'de> for CurveClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let word: Word = Word::deserialize(d)?;
        let genus = word.max_generator().div_ceil(2).max(2);
        CurveClass::new(word, genus).map_err(serde::de::Error::custom)
    }
}
