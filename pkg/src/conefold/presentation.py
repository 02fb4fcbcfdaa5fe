"""Finitely presented groups with a marked peripheral pair (meridian, longitude).

The text format is line oriented:

    gens: a b m
    rels: m a m^-1 = a b , m b m^-1 = b a b a b a b a b
    meridian: m
    longitude: a b a^-1 b^-1
    subst: b = a^-1 m a m^-1      # optional, used by two-generator reduction

A word is a juxtaposition of generator tokens, each optionally followed by
``^<int>``.  Relators may be written as equations ``u = v`` (stored as
``u v^-1``) or as plain words; several relators are comma separated.
Lines starting with ``#`` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PresentationError(ValueError):
    """Malformed presentation source (carries line/column when known)."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Generator:
    name: str

    def __post_init__(self):
        if not self.name:
            raise PresentationError("empty generator name")


@dataclass(frozen=True)
class Word:
    """Sequence of (generator index, nonzero exponent) syllables."""

    letters: tuple = ()

    def __post_init__(self):
        for g, e in self.letters:
            if e == 0:
                raise ValueError("zero exponent in word")

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    def inverse(self):
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def reduced(self):
        return free_reduce(self)

    def is_reduced(self):
        return all(self.letters[i][0] != self.letters[i + 1][0]
                   for i in range(len(self.letters) - 1))

    def total_exponent(self, gen_index):
        return sum(e for g, e in self.letters if g == gen_index)

    def syllable_length(self):
        return sum(abs(e) for _, e in self.letters)


def free_reduce(w: Word) -> Word:
    """Cancel adjacent inverse pairs; merges same-generator syllables."""
    out = []
    for g, e in w:
        if out and out[-1][0] == g:
            e2 = out[-1][1] + e
            out.pop()
            if e2:
                out.append((g, e2))
        else:
            out.append((g, e))
    return Word(tuple(out))


def word_invert(w: Word) -> Word:
    return free_reduce(w.inverse())


@dataclass(frozen=True)
class Presentation:
    generators: tuple
    relators: tuple
    meridian: Word
    longitude: Word
    _index: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if not self.generators:
            raise PresentationError("empty generator list")
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise PresentationError("duplicate generator names")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})
        for w in (*self.relators, self.meridian, self.longitude):
            for g, _ in w:
                if not 0 <= g < len(names):
                    raise PresentationError(f"word uses undeclared generator index {g}")

    @property
    def names(self):
        return tuple(g.name for g in self.generators)

    def gen_index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise PresentationError(f"undeclared generator {name!r}") from None

    def word(self, text):
        """Parse a word string in this presentation's generators."""
        return _parse_word(text, self._index)

    def word_str(self, w):
        return _word_to_str(w, self.names)


# ---------------------------------------------------------------------------
# parsing

def _parse_word(text, index, line=None):
    letters = []
    for tok in text.split():
        name, _, expstr = tok.partition("^")
        if name not in index:
            raise PresentationError(f"undeclared generator {name!r}", line)
        if expstr:
            try:
                e = int(expstr)
            except ValueError:
                raise PresentationError(f"bad exponent {expstr!r}", line) from None
        else:
            e = 1
        if e:
            letters.append((index[name], e))
    return free_reduce(Word(tuple(letters)))


def _parse_relator(text, index, line):
    if "=" in text:
        lhs, _, rhs = text.partition("=")
        u = _parse_word(lhs, index, line)
        v = _parse_word(rhs, index, line)
        return free_reduce(u * v.inverse())
    return _parse_word(text, index, line)


def parse_source(text):
    """Parse presentation source, returning (Presentation, substitutions dict)."""
    fields = {}
    subst_lines = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("gens", "rels", "meridian", "longitude", "subst"):
            raise PresentationError(f"unrecognized line {raw!r}", ln)
        if key == "subst":
            subst_lines.append((ln, rest.strip()))
        elif key in fields:
            raise PresentationError(f"duplicate {key!r} line", ln)
        else:
            fields[key] = (ln, rest.strip())

    if "gens" not in fields:
        raise PresentationError("missing 'gens:' line")
    gen_names = fields["gens"][1].split()
    if not gen_names:
        raise PresentationError("empty generator list", fields["gens"][0])
    generators = tuple(Generator(n) for n in gen_names)
    index = {n: i for i, n in enumerate(gen_names)}

    relators = ()
    if "rels" in fields and fields["rels"][1]:
        ln, rest = fields["rels"]
        relators = tuple(_parse_relator(part, index, ln)
                         for part in rest.split(",") if part.strip())
        relators = tuple(r for r in relators if len(r))

    def peripheral(key):
        if key not in fields:
            raise PresentationError(f"missing '{key}:' line")
        ln, rest = fields[key]
        w = _parse_word(rest, index, ln)
        if not len(w):
            raise PresentationError(f"empty {key}", ln)
        return w

    pres = Presentation(generators, relators, peripheral("meridian"), peripheral("longitude"))

    subst = {}
    for ln, rest in subst_lines:
        name, sep, wtext = rest.partition("=")
        name = name.strip()
        if not sep or name not in index:
            raise PresentationError(f"bad substitution {rest!r}", ln)
        subst[name] = _parse_word(wtext, index, ln)
    return pres, subst


def parse_presentation(text) -> Presentation:
    """Parse presentation source text (ignores any substitution lines)."""
    return parse_source(text)[0]


def _word_to_str(w, names):
    if not len(w):
        return ""
    return " ".join(names[g] + (f"^{e}" if e != 1 else "") for g, e in w)


def presentation_to_text(pres, subst=None):
    """Serialize back to the line format; parse(serialize(p)) == p."""
    lines = ["gens: " + " ".join(pres.names)]
    lines.append("rels: " + " , ".join(_word_to_str(r, pres.names) for r in pres.relators))
    lines.append("meridian: " + _word_to_str(pres.meridian, pres.names))
    lines.append("longitude: " + _word_to_str(pres.longitude, pres.names))
    for name, w in (subst or {}).items():
        lines.append(f"subst: {name} = " + _word_to_str(w, pres.names))
    return "\n".join(lines) + "\n"


def exponent_sum_matrix(pres) -> np.ndarray:
    """Integer matrix (relators x generators) of total exponents."""
    n = len(pres.generators)
    rows = [[r.total_exponent(j) for j in range(n)] for r in pres.relators]
    return np.array(rows, dtype=int).reshape(len(pres.relators), n)
