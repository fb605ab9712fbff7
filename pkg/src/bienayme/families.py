"""Offspring distributions for multitype branching trees.

A family holds one offspring law per type. Types 1..K form the critical
block, types K+1..K+K' the subcritical block. Each law is a finite-support
distribution over ordered words of child types; parametric families
(Poisson / geometric products) are materialized by truncation at a
configurable tail mass and renormalized.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigError

# A typed word is a tuple of type indices in [1 .. K+K'], children in birth order.
TypedWord = tuple

PROB_TOL = 1e-12


def count_vector(word, num_types):
    """Per-type child counts of a word: entry j-1 is the number of j's in it."""
    counts = [0] * num_types
    for s in word:
        counts[s - 1] += 1
    return tuple(counts)


def canonical_word(counts):
    """The nondecreasing-type word with the given per-type counts."""
    w = []
    for j, k in enumerate(counts, start=1):
        w.extend([j] * k)
    return tuple(w)


@dataclass(frozen=True, eq=False)
class OffspringLaw:
    """Finite-support distribution over typed words for one parent type."""

    words: tuple
    probs: np.ndarray
    tail_mass_bound: float = 0.0
    renormalized: bool = False

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "words", tuple(tuple(w) for w in self.words))
        if len(self.words) != len(probs):
            raise ConfigError("words and probs length mismatch")
        if len(set(self.words)) != len(self.words):
            raise ConfigError("duplicate words in offspring law")
        if np.any(probs < 0):
            raise ConfigError("negative probability in offspring law")
        total = float(probs.sum())
        if self.renormalized:
            if abs(total - 1.0) > PROB_TOL:
                raise ConfigError(f"renormalized law sums to {total}, expected 1")
        elif self.tail_mass_bound > 0:
            if total < 1.0 - self.tail_mass_bound - PROB_TOL:
                raise ConfigError(
                    f"truncated law keeps mass {total} < 1 - {self.tail_mass_bound}"
                )
        elif abs(total - 1.0) > PROB_TOL:
            raise ConfigError(f"offspring law sums to {total}, expected 1 +- 1e-12")

    def max_symbol(self):
        return max((max(w) for w in self.words if w), default=0)

    def prob_of(self, word):
        word = tuple(word)
        for w, p in zip(self.words, self.probs):
            if w == word:
                return float(p)
        return 0.0


@dataclass(frozen=True, eq=False)
class OffspringFamily:
    """A K(+K')-type offspring family with conditioning weights lambda."""

    num_critical_types: int
    num_subcritical_types: int
    laws: tuple
    lam: np.ndarray
    name: str = ""

    def __post_init__(self):
        K, Kp = self.num_critical_types, self.num_subcritical_types
        if K < 1 or Kp < 0:
            raise ConfigError("need K >= 1 and K' >= 0")
        if len(self.laws) != K + Kp:
            raise ConfigError(f"expected {K + Kp} laws, got {len(self.laws)}")
        lam = np.asarray(self.lam, dtype=np.int64)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "laws", tuple(self.laws))
        if lam.shape != (K + Kp,):
            raise ConfigError("lambda length must equal K + K'")
        if np.any(lam < 0) or not lam.any():
            raise ConfigError("lambda must be nonnegative integers, not all zero")
        for i, law in enumerate(self.laws, start=1):
            if law.max_symbol() > K + Kp:
                raise ConfigError(f"law of type {i} produces unknown child types")
        # Non-degeneracy of the critical block: some type i <= K can die out of
        # the block (no offspring with type in [K]), and some type i <= K can
        # have two or more children.
        if not any(
            any(all(s > K for s in w) and p > 0 for w, p in zip(law.words, law.probs))
            for law in self.laws[:K]
        ):
            raise ConfigError(
                "no critical type has positive probability of zero critical-block offspring"
            )
        if not any(
            any(len(w) >= 2 and p > 0 for w, p in zip(law.words, law.probs))
            for law in self.laws[:K]
        ):
            raise ConfigError("no critical type can have two or more children")

    @property
    def num_types(self):
        return self.num_critical_types + self.num_subcritical_types

    def law(self, type_index):
        """Offspring law of a 1-based type index."""
        return self.laws[type_index - 1]

    def with_lambda(self, lam):
        return OffspringFamily(
            self.num_critical_types,
            self.num_subcritical_types,
            self.laws,
            np.asarray(lam, dtype=np.int64),
            name=self.name,
        )

    def family_hash(self):
        """Stable content hash used in manifests."""
        payload = to_json_dict(self)
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ProjectedLaw:
    """Order-insensitive marginal: per-type map from child-count vectors to probability."""

    num_types: int
    tables: tuple = field(default_factory=tuple)  # one dict per type

    def table(self, type_index):
        return self.tables[type_index - 1]


def projection(family):
    """Project each word law to its count-vector marginal."""
    m = family.num_types
    tables = []
    for law in family.laws:
        t = {}
        for w, p in zip(law.words, law.probs):
            c = count_vector(w, m)
            t[c] = t.get(c, 0.0) + float(p)
        tables.append(t)
    return ProjectedLaw(m, tuple(tables))


# -- parametric materialization ------------------------------------------------


def _poisson_pmf(mean, cap):
    k = np.arange(cap + 1)
    if mean == 0:
        p = np.zeros(cap + 1)
        p[0] = 1.0
        return p
    logs = -mean + k * math.log(mean) - np.array([math.lgamma(i + 1) for i in k])
    return np.exp(logs)


def _geometric_pmf(mean, cap):
    # Geometric on N0 with the given mean: P(k) = p (1-p)^k, p = 1/(1+mean).
    k = np.arange(cap + 1)
    if mean == 0:
        p = np.zeros(cap + 1)
        p[0] = 1.0
        return p
    p = 1.0 / (1.0 + mean)
    return p * np.power(1.0 - p, k)


def _product_count_law(means, tail_mass, pmf):
    """Truncated independent product over coordinates, renormalized.

    Per-coordinate caps are chosen so the union-bound truncation error is
    below tail_mass, then the boxed product law is renormalized.
    """
    active = [j for j, m in enumerate(means) if m > 0]
    per_coord = tail_mass / max(len(active), 1)
    caps = []
    for m in means:
        if m == 0:
            caps.append(0)
            continue
        cap = 1
        while True:
            mass = pmf(m, cap).sum()
            if 1.0 - mass <= per_coord:
                break
            cap += 1
        caps.append(cap)
    grids = [pmf(m, c) for m, c in zip(means, caps)]
    # fold coordinates one at a time
    prefixes = {(): 1.0}
    for g in grids:
        nxt = {}
        for pref, p in prefixes.items():
            for k, pk in enumerate(g):
                if pk <= 0.0:
                    continue
                nxt[pref + (k,)] = p * pk
        prefixes = nxt
    total = sum(prefixes.values())
    return {counts: p / total for counts, p in prefixes.items()}


def materialize_product_law(kind, means, num_types, tail_mass=1e-12):
    """Expand a per-coordinate product family into an explicit word law."""
    if len(means) != num_types:
        raise ConfigError("means length must equal the number of types")
    if any(m < 0 for m in means):
        raise ConfigError("means must be nonnegative")
    pmf = {"poisson_product": _poisson_pmf, "geometric_product": _geometric_pmf}[kind]
    table = _product_count_law(means, tail_mass, pmf)
    words = []
    probs = []
    for counts, p in sorted(table.items()):
        words.append(canonical_word(counts))
        probs.append(p)
    return OffspringLaw(
        tuple(words), np.array(probs), tail_mass_bound=tail_mass, renormalized=True
    )


# -- JSON configuration --------------------------------------------------------


def _law_from_json(entry, num_types, path):
    kind = entry.get("kind")
    if kind == "explicit":
        words = []
        probs = []
        for j, item in enumerate(entry.get("words", [])):
            if "w" not in item or "p" not in item:
                raise ConfigError(f"{path}.words[{j}]: need fields 'w' and 'p'")
            words.append(tuple(int(s) for s in item["w"]))
            probs.append(float(item["p"]))
        return OffspringLaw(tuple(words), np.array(probs))
    if kind in ("poisson_product", "geometric_product"):
        means = [float(m) for m in entry.get("means", [])]
        tail = float(entry.get("tail_mass", 1e-12))
        return materialize_product_law(kind, means, num_types, tail)
    raise ConfigError(f"{path}.kind: unknown kind {kind!r}")


def from_json_dict(doc, name=""):
    try:
        K = int(doc["K"])
        Kp = int(doc.get("Kprime", 0))
        lam = [int(x) for x in doc["lambda"]]
        types = doc["types"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"family document: {exc}") from exc
    if len(types) != K + Kp:
        raise ConfigError(f"types: expected {K + Kp} entries, got {len(types)}")
    laws = tuple(
        _law_from_json(entry, K + Kp, f"types[{i}]") for i, entry in enumerate(types)
    )
    return OffspringFamily(K, Kp, laws, np.array(lam), name=name)


def to_json_dict(family):
    types = []
    for law in family.laws:
        types.append(
            {
                "kind": "explicit",
                "words": [
                    {"w": list(w), "p": float(p)}
                    for w, p in zip(law.words, law.probs)
                ],
            }
        )
    return {
        "K": family.num_critical_types,
        "Kprime": family.num_subcritical_types,
        "lambda": [int(x) for x in family.lam],
        "types": types,
    }


def load_family(path):
    """Read a family from a JSON file; raises ConfigError with a field diagnostic."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read family file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return from_json_dict(doc, name=str(path))


def save_family(family, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(family), fh, indent=2)
        fh.write("\n")


PRESET_NAMES = (
    "monotype_binary",
    "monotype_ternary",
    "two_type_symmetric",
    "poisson_reducible",
    "localized_deterministic",
)


def load_preset(name):
    """Load a bundled preset family by name."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    ref = resources.files("bienayme").joinpath(f"presets/{name}.json")
    doc = json.loads(ref.read_text())
    return from_json_dict(doc, name=f"preset:{name}")
