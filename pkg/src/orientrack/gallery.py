"""Per-person appearance feature stores with interchangeable retention strategies.

Strategies:
  * ``full``     - keep every inserted feature (memory grows with detections)
  * ``averaged`` - one running-average slot per person
  * ``random``   - B running-average slots, bin drawn from a seeded generator
  * ``orient``   - B running-average slots indexed by orientation bin

Binned strategies keep memory proportional to persons x bins while the full
strategy grows with the total number of insertions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STRATEGIES = ("full", "averaged", "random", "orient")


@dataclass
class BinSlot:
    mean: np.ndarray
    count: int


class Gallery:
    """Appearance store keyed by person (or track) id.

    Single writer per instance; concurrent read-only queries are safe
    between mutations.
    """

    def __init__(self, strategy: str, bins: int = 1, seed: int = 0):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
        if bins < 1:
            raise ValueError(f"bin count must be >= 1, got {bins}")
        self.strategy = strategy
        self.bins = 1 if strategy == "averaged" else bins
        self._rng = np.random.default_rng(seed)
        self._dim: int | None = None
        # full: person -> list of features; binned: person -> list of B slots (None = empty)
        self._full: dict[int, list[np.ndarray]] = {}
        self._slots: dict[int, list[BinSlot | None]] = {}

    @property
    def dim(self) -> int | None:
        return self._dim

    def persons(self) -> list[int]:
        store = self._full if self.strategy == "full" else self._slots
        return sorted(store.keys())

    def __contains__(self, person: int) -> bool:
        return person in (self._full if self.strategy == "full" else self._slots)

    def _check_dim(self, feat: np.ndarray) -> np.ndarray:
        feat = np.asarray(feat, dtype=np.float64)
        if feat.ndim != 1:
            raise ValueError(f"feature must be 1-D, got shape {feat.shape}")
        if self._dim is None:
            self._dim = feat.shape[0]
        elif feat.shape[0] != self._dim:
            raise ValueError(f"feature dimension {feat.shape[0]} != gallery dimension {self._dim}")
        return feat

    def insert(self, person: int, feat: np.ndarray, bin: int | None = None) -> None:
        """Insert a feature for a person; binned strategies update a running mean."""
        feat = self._check_dim(feat)
        if self.strategy == "full":
            self._full.setdefault(person, []).append(feat.copy())
            return
        if self.strategy == "averaged":
            target = 0
        elif self.strategy == "random":
            target = int(self._rng.integers(self.bins))
        else:  # orient
            if bin is None:
                raise ValueError("orientation-binned gallery requires an explicit bin")
            if not 0 <= bin < self.bins:
                raise ValueError(f"bin {bin} out of range [0, {self.bins})")
            target = bin
        slots = self._slots.setdefault(person, [None] * self.bins)
        slot = slots[target]
        if slot is None:
            slots[target] = BinSlot(mean=feat.copy(), count=1)
        else:
            slot.mean = (slot.count * slot.mean + feat) / (slot.count + 1)
            slot.count += 1

    def _person_vectors(self, person: int) -> np.ndarray:
        if self.strategy == "full":
            stored = self._full.get(person)
            if not stored:
                raise KeyError(f"person {person} has no stored features")
            return np.stack(stored)
        slots = self._slots.get(person)
        means = [s.mean for s in slots or [] if s is not None]
        if not means:
            raise KeyError(f"person {person} has no stored features")
        return np.stack(means)

    def min_distance(self, person: int, feat: np.ndarray) -> float:
        """Euclidean distance from feat to the person's nearest stored feature."""
        feat = self._check_dim(feat)
        vectors = self._person_vectors(person)
        return float(np.min(np.linalg.norm(vectors - feat, axis=1)))

    def nearest_person(self, feat: np.ndarray) -> tuple[int, float]:
        """Person minimizing min_distance; ties broken by smallest person id."""
        people = self.persons()
        if not people:
            raise KeyError("empty gallery")
        feat = self._check_dim(feat)
        stacked, owners = self._all_vectors(people)
        distances = np.linalg.norm(stacked - feat, axis=1)
        # Vectors are concatenated in ascending person-id order and argmin
        # returns the first occurrence, so exact ties go to the smallest id.
        best = int(np.argmin(distances))
        return int(owners[best]), float(distances[best])

    def _all_vectors(self, people: list[int]) -> tuple[np.ndarray, np.ndarray]:
        blocks, owners = [], []
        for person in people:
            vectors = self._person_vectors(person)
            blocks.append(vectors)
            owners.append(np.full(len(vectors), person))
        return np.concatenate(blocks), np.concatenate(owners)

    def stored_vectors(self) -> int:
        """Total number of stored vectors (slot means count as one each)."""
        if self.strategy == "full":
            return sum(len(v) for v in self._full.values())
        return sum(1 for slots in self._slots.values() for s in slots if s is not None)
