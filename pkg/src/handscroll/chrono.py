"""Normalization of ancient Chinese date expressions to Gregorian years.

Dates on inscriptions come as an era name followed by either an ordinal
year within the era ("Yuanzhen second year") or a sexagenary cycle name
("Qianlong Wuchen"). The 60-year cycle pairs 10 heavenly stems with 12
earthly branches; only pairs of equal parity name a cycle year. Gregorian
year ``y`` has cycle index ``(y - 4) % 60``, anchored so that 1984 is
Jiazi (index 0).

All years are signed integers in the proleptic Gregorian calendar; the
source data resolves nothing finer than a year.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

CYCLE = 60
YEAR_ANCHOR = 4  # index(y) == (y - YEAR_ANCHOR) % 60


class ChronoError(ValueError):
    pass


class InvalidSexagenaryError(ChronoError):
    """Stem/branch pair of unequal parity: no cycle year carries it."""


class UnknownEraError(ChronoError):
    def __init__(self, message: str, homonyms: list[str] | None = None):
        super().__init__(message)
        self.homonyms = homonyms or []


class DateOutOfRangeError(ChronoError):
    pass


class DateParseError(ChronoError):
    pass


# ---------------------------------------------------------------------------
# Reference name lists


@dataclass(frozen=True)
class SexagenaryNames:
    """Romanized and original-script stem/branch name lists.

    Loaded from a JSON config so the test suite can run on the romanized
    forms alone; the script forms ride along for real corpora.
    """

    stems: tuple[str, ...]
    branches: tuple[str, ...]
    stems_script: tuple[str, ...] = ()
    branches_script: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.stems) != 10 or len(self.branches) != 12:
            raise ChronoError("need exactly 10 stems and 12 branches")

    @classmethod
    def load(cls, path: str | Path | None = None) -> "SexagenaryNames":
        if path is None:
            ref = resources.files("handscroll").joinpath("data/sexagenary_names.json")
            raw = json.loads(ref.read_text(encoding="utf-8"))
        else:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            stems=tuple(raw["stems"]),
            branches=tuple(raw["branches"]),
            stems_script=tuple(raw.get("stems_script", ())),
            branches_script=tuple(raw.get("branches_script", ())),
        )

    def stem_index(self, name: str) -> int | None:
        low = name.lower()
        for i, s in enumerate(self.stems):
            if s.lower() == low:
                return i
        for i, s in enumerate(self.stems_script):
            if s == name:
                return i
        return None

    def branch_index(self, name: str) -> int | None:
        low = name.lower()
        for i, b in enumerate(self.branches):
            if b.lower() == low:
                return i
        for i, b in enumerate(self.branches_script):
            if b == name:
                return i
        return None


_DEFAULT_NAMES: SexagenaryNames | None = None


def default_names() -> SexagenaryNames:
    global _DEFAULT_NAMES
    if _DEFAULT_NAMES is None:
        _DEFAULT_NAMES = SexagenaryNames.load()
    return _DEFAULT_NAMES


# ---------------------------------------------------------------------------
# Sexagenary cycle arithmetic


@dataclass(frozen=True)
class SexagenaryName:
    stem: int  # 0..9
    branch: int  # 0..11

    def __post_init__(self):
        if not 0 <= self.stem <= 9:
            raise ChronoError(f"stem index out of range: {self.stem}")
        if not 0 <= self.branch <= 11:
            raise ChronoError(f"branch index out of range: {self.branch}")

    @classmethod
    def parse(cls, text: str, names: SexagenaryNames | None = None) -> "SexagenaryName":
        """Split a compound name like "Wuchen" into stem + branch.

        Tries every stem name as a prefix and requires the remainder to be
        exactly a branch name. Separators (space, hyphen, middle dot) are
        ignored.
        """
        names = names or default_names()
        compact = re.sub(r"[\s\-·]+", "", text)
        for i, stem_name in enumerate(names.stems):
            if compact.lower().startswith(stem_name.lower()):
                rest = compact[len(stem_name):]
                j = names.branch_index(rest)
                if j is not None:
                    return cls(i, j)
        for i, stem_name in enumerate(names.stems_script):
            if compact.startswith(stem_name):
                rest = compact[len(stem_name):]
                j = names.branch_index(rest)
                if j is not None:
                    return cls(i, j)
        raise DateParseError(f"not a sexagenary cycle name: {text!r}")


def sexagenary_index(name: SexagenaryName) -> int:
    """Unique n in 0..59 with n % 10 == stem and n % 12 == branch."""
    if name.stem % 2 != name.branch % 2:
        raise InvalidSexagenaryError(
            f"stem {name.stem} and branch {name.branch} have unequal parity; "
            "no cycle year carries this pair"
        )
    n = (6 * name.stem - 5 * name.branch) % CYCLE
    assert n % 10 == name.stem and n % 12 == name.branch
    return n


def year_cycle_index(year: int) -> int:
    """Cycle index of a Gregorian year (1984 -> 0, Jiazi)."""
    return (year - YEAR_ANCHOR) % CYCLE


# ---------------------------------------------------------------------------
# Era table


@dataclass(frozen=True)
class EraEntry:
    era_name: str
    dynasty: str
    start_year: int
    end_year: int

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ChronoError(
                f"era {self.era_name!r}: start {self.start_year} after end {self.end_year}"
            )


@dataclass(frozen=True)
class EraTable:
    entries: tuple[EraEntry, ...]
    _by_name: dict[str, list[EraEntry]] = field(init=False, repr=False, hash=False)

    def __post_init__(self):
        seen = set()
        by_name: dict[str, list[EraEntry]] = {}
        for e in self.entries:
            key = (e.era_name.lower(), e.dynasty)
            if key in seen:
                raise ChronoError(f"duplicate era {e.era_name!r} in dynasty {e.dynasty!r}")
            seen.add(key)
            by_name.setdefault(e.era_name.lower(), []).append(e)
        object.__setattr__(self, "_by_name", by_name)

    @classmethod
    def from_records(cls, records: list[dict]) -> "EraTable":
        return cls(
            tuple(
                EraEntry(r["name"], r["dynasty"], int(r["start_year"]), int(r["end_year"]))
                for r in records
            )
        )

    def lookup(self, era_name: str, dynasty_hint: str | None = None) -> EraEntry:
        cands = self._by_name.get(era_name.lower(), [])
        if dynasty_hint is not None:
            cands = [e for e in cands if e.dynasty == dynasty_hint]
        if not cands:
            raise UnknownEraError(f"unknown era {era_name!r}"
                                  + (f" in dynasty {dynasty_hint!r}" if dynasty_hint else ""))
        if len(cands) > 1:
            homonyms = [f"{e.era_name} ({e.dynasty})" for e in cands]
            raise UnknownEraError(
                f"era name {era_name!r} is ambiguous across dynasties: {homonyms}; "
                "pass a dynasty hint",
                homonyms=homonyms,
            )
        return cands[0]

    def longest_prefix(self, text: str) -> tuple[str, str] | None:
        """(matched era name, remainder) for the longest era-name prefix."""
        low = text.lower()
        best: str | None = None
        for name in self._by_name:
            if low.startswith(name) and (best is None or len(name) > len(best)):
                best = name
        if best is None:
            return None
        return text[: len(best)], text[len(best):]


# ---------------------------------------------------------------------------
# Ordinal phrases ("second year", "13th year", "year 2")

_UNITS = ["", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"]
_TEENS = ["ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen",
          "seventeen", "eighteen", "nineteen"]
_TENS = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty",
         "ninety"]
_ORDINAL_UNITS = ["", "first", "second", "third", "fourth", "fifth", "sixth",
                  "seventh", "eighth", "ninth"]
_ORDINAL_TEENS = ["tenth", "eleventh", "twelfth", "thirteenth", "fourteenth",
                  "fifteenth", "sixteenth", "seventeenth", "eighteenth", "nineteenth"]
_ORDINAL_TENS = ["", "", "twentieth", "thirtieth", "fortieth", "fiftieth", "sixtieth",
                 "seventieth", "eightieth", "ninetieth"]


def _ordinal_words() -> dict[str, int]:
    words: dict[str, int] = {}
    for n in range(1, 100):
        tens, units = divmod(n, 10)
        if n < 10:
            words[_ORDINAL_UNITS[n]] = n
        elif n < 20:
            words[_ORDINAL_TEENS[n - 10]] = n
        elif units == 0:
            words[_ORDINAL_TENS[tens]] = n
        else:
            words[f"{_TENS[tens]}-{_ORDINAL_UNITS[units]}"] = n
            words[f"{_TENS[tens]} {_ORDINAL_UNITS[units]}"] = n
    return words


_ORDINALS = _ordinal_words()

_CN_DIGITS = {"一": 1, "二": 2, "三": 3, "四": 4, "五": 5, "六": 6, "七": 7,
              "八": 8, "九": 9}


def _parse_cn_numeral(text: str) -> int | None:
    """Chinese numerals 1..99 of the form [X]十[Y] or a single digit."""
    if not text:
        return None
    if "十" in text:
        head, _, tail = text.partition("十")
        tens = 1 if head == "" else _CN_DIGITS.get(head)
        units = 0 if tail == "" else _CN_DIGITS.get(tail)
        if tens is None or units is None:
            return None
        return tens * 10 + units
    return _CN_DIGITS.get(text)


def parse_ordinal_phrase(text: str) -> int | None:
    """Ordinal year number of an era, or None if the text is not one."""
    t = text.strip().lower()
    m = re.fullmatch(r"(?:year\s+)?(\d+)(?:st|nd|rd|th)?(?:\s+year)?", t)
    if m:
        return int(m.group(1))
    m = re.fullmatch(r"(.+?)\s+year", t)
    if m and m.group(1) in _ORDINALS:
        return _ORDINALS[m.group(1)]
    # Original-script forms: 元年 is "first year"; otherwise numeral + 年.
    raw = text.strip()
    if raw == "元年":
        return 1
    if raw.endswith("年"):
        return _parse_cn_numeral(raw[:-1])
    return None


# ---------------------------------------------------------------------------
# Full date expressions


@dataclass(frozen=True)
class DateResolution:
    year: int
    ambiguous: bool
    alternatives: tuple[int, ...]
    source_expression: str

    def __post_init__(self):
        if list(self.alternatives) != sorted(self.alternatives):
            raise ChronoError("alternatives must be sorted ascending")
        if self.ambiguous and self.year not in self.alternatives:
            raise ChronoError("ambiguous resolution must list its year")


def parse_era_date(
    text: str,
    eras: EraTable,
    dynasty_hint: str | None = None,
    names: SexagenaryNames | None = None,
) -> DateResolution:
    """Resolve one era-dated expression to Gregorian year(s).

    The era name is the longest-prefix match against the table; the
    remainder must be entirely an ordinal phrase or a sexagenary name.
    Sexagenary remainders may match several years inside long eras (>= 60
    calendar years); all matches are reported and the earliest is chosen,
    flagged ambiguous for interactive confirmation.
    """
    stripped = text.strip()
    hit = eras.longest_prefix(stripped)
    if hit is None:
        raise UnknownEraError(f"no era name prefixes {text!r}")
    era_name, remainder = hit
    era = eras.lookup(era_name, dynasty_hint)
    remainder = remainder.strip()
    if not remainder:
        raise DateParseError(f"{text!r}: era name without a year part")

    ordinal = parse_ordinal_phrase(remainder)
    if ordinal is not None:
        if ordinal < 1:
            raise DateParseError(f"{text!r}: ordinal year must be >= 1")
        year = era.start_year + (ordinal - 1)
        if year > era.end_year:
            raise DateOutOfRangeError(
                f"{text!r}: year {ordinal} of {era.era_name} falls after its end "
                f"({era.start_year}..{era.end_year})"
            )
        return DateResolution(year, False, (year,), text)

    cycle = SexagenaryName.parse(remainder, names)  # DateParseError if neither form
    target = sexagenary_index(cycle)
    matches = tuple(
        y for y in range(era.start_year, era.end_year + 1)
        if year_cycle_index(y) == target
    )
    if not matches:
        raise DateOutOfRangeError(
            f"{text!r}: no year in {era.era_name} ({era.start_year}..{era.end_year}) "
            f"carries cycle index {target}"
        )
    return DateResolution(matches[0], len(matches) > 1, matches, text)
