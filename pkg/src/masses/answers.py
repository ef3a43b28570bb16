"""Annotations, predictions, answer normalization and answer patterns."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Optional, Sequence

from masses.errors import InputError

QuestionId = Any  # str or int, kept verbatim

# Modeled on the public VQA evaluation tool. Keys and values are lowercase
# and no value is itself a key, so expansion is idempotent.
DEFAULT_CONTRACTIONS = {
    "aint": "ain't", "arent": "aren't", "cant": "can't", "couldve": "could've",
    "couldnt": "couldn't", "couldn'tve": "couldn't've", "couldnt've": "couldn't've",
    "didnt": "didn't", "doesnt": "doesn't", "dont": "don't", "hadnt": "hadn't",
    "hadnt've": "hadn't've", "hadn'tve": "hadn't've", "hasnt": "hasn't",
    "havent": "haven't", "hed": "he'd", "hed've": "he'd've", "he'dve": "he'd've",
    "hes": "he's", "howd": "how'd", "howll": "how'll", "hows": "how's",
    "id've": "i'd've", "i'dve": "i'd've", "im": "i'm", "ive": "i've",
    "isnt": "isn't", "itd": "it'd", "itd've": "it'd've", "it'dve": "it'd've",
    "itll": "it'll", "maam": "ma'am", "mightnt": "mightn't",
    "mightnt've": "mightn't've", "mightn'tve": "mightn't've", "mightve": "might've",
    "mustnt": "mustn't", "mustve": "must've", "neednt": "needn't", "notve": "not've",
    "oclock": "o'clock", "oughtnt": "oughtn't", "shant": "shan't",
    "shed've": "she'd've", "she'dve": "she'd've", "shouldve": "should've",
    "shouldnt": "shouldn't", "shouldnt've": "shouldn't've",
    "shouldn'tve": "shouldn't've", "somebodyd've": "somebody'd've",
    "somebody'dve": "somebody'd've", "somebodyll": "somebody'll",
    "somebodys": "somebody's", "someoned": "someone'd", "someoned've": "someone'd've",
    "someone'dve": "someone'd've", "someonell": "someone'll", "someones": "someone's",
    "somethingd": "something'd", "somethingd've": "something'd've",
    "something'dve": "something'd've", "somethingll": "something'll",
    "thats": "that's", "thered": "there'd", "thered've": "there'd've",
    "there'dve": "there'd've", "therere": "there're", "theres": "there's",
    "theyd": "they'd", "theyd've": "they'd've", "they'dve": "they'd've",
    "theyll": "they'll", "theyre": "they're", "theyve": "they've",
    "wasnt": "wasn't", "wed've": "we'd've", "we'dve": "we'd've", "weve": "we've",
    "werent": "weren't", "whatll": "what'll", "whatre": "what're", "whats": "what's",
    "whatve": "what've", "whens": "when's", "whered": "where'd", "wheres": "where's",
    "whereve": "where've", "whod": "who'd", "whod've": "who'd've",
    "who'dve": "who'd've", "wholl": "who'll", "whos": "who's", "whove": "who've",
    "whyll": "why'll", "whyre": "why're", "whys": "why's", "wont": "won't",
    "wouldve": "would've", "wouldnt": "wouldn't", "wouldnt've": "wouldn't've",
    "wouldn'tve": "wouldn't've", "yall": "y'all", "yall'll": "y'all'll",
    "y'allll": "y'all'll", "yall'd've": "y'all'd've", "y'alld've": "y'all'd've",
    "y'all'dve": "y'all'd've", "youd": "you'd", "youd've": "you'd've",
    "you'dve": "you'd've", "youll": "you'll", "youre": "you're", "youve": "you've",
}

DEFAULT_WORD_NUMBERS = {
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4", "five": "5",
    "six": "6", "seven": "7", "eight": "8", "nine": "9", "ten": "10",
}

DEFAULT_ARTICLES = ("a", "an", "the")

# Apostrophe, period and comma have their own rules below.
DEFAULT_PUNCTUATION = ";/[]\"{}()=+\\_-><@`?!:*#$%&^|~"

_PERIOD = re.compile(r"(?<!\d)\.|\.(?!\d)")
_DIGIT_COMMA = re.compile(r"(?<=\d),(?=\d)")
_STRAY_APOSTROPHE = re.compile(r"(?<![^\W\d_])'|'(?![^\W\d_])")


@dataclass(frozen=True)
class NormalizationConfig:
    """Switches for each normalization step plus the tables they use.

    With every flag off, :func:`normalize_answer` is the identity.
    """

    lowercase: bool = True
    punctuation_rules: bool = True
    word_numbers_to_digits: bool = True
    strip_articles: bool = True
    expand_contractions: bool = True
    collapse_whitespace: bool = True
    contractions: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_CONTRACTIONS))
    word_numbers: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_WORD_NUMBERS))
    articles: Sequence[str] = DEFAULT_ARTICLES
    punctuation: str = DEFAULT_PUNCTUATION

    @classmethod
    def disabled(cls) -> "NormalizationConfig":
        return cls(
            lowercase=False,
            punctuation_rules=False,
            word_numbers_to_digits=False,
            strip_articles=False,
            expand_contractions=False,
            collapse_whitespace=False,
        )

    def with_tables(self, path) -> "NormalizationConfig":
        """Replace lookup tables from a JSON file.

        Recognized keys: ``contractions``, ``word_numbers`` (objects),
        ``articles`` (array) and ``punctuation`` (string). Missing keys keep
        the current table.
        """
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read normalization tables: {exc}", path=path) from exc
        if not isinstance(data, dict):
            raise InputError("normalization tables must be a JSON object", path=path)
        updates = {}
        for key in ("contractions", "word_numbers"):
            if key in data:
                if not isinstance(data[key], dict):
                    raise InputError(f"{key!r} must be an object", path=path)
                updates[key] = {str(k): str(v) for k, v in data[key].items()}
        if "articles" in data:
            updates["articles"] = tuple(str(a) for a in data["articles"])
        if "punctuation" in data:
            updates["punctuation"] = str(data["punctuation"])
        return replace(self, **updates)

    def describe(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "punctuation_rules": self.punctuation_rules,
            "word_numbers_to_digits": self.word_numbers_to_digits,
            "strip_articles": self.strip_articles,
            "expand_contractions": self.expand_contractions,
            "collapse_whitespace": self.collapse_whitespace,
        }


DEFAULT_NORMALIZATION = NormalizationConfig()


def _apply_punctuation(text: str, punctuation: str) -> str:
    text = _DIGIT_COMMA.sub("", text)
    text = text.replace(",", " ")
    text = _PERIOD.sub("", text)
    text = _STRAY_APOSTROPHE.sub(" ", text)
    if punctuation:
        text = text.translate({ord(c): " " for c in punctuation})
    return text


def normalize_answer(raw: str, config: NormalizationConfig = DEFAULT_NORMALIZATION) -> str:
    """Canonicalize an answer string before any matching.

    Steps run in a fixed order (lowercase, punctuation, number words,
    articles, contractions, whitespace); each can be switched off.

    >>> normalize_answer("The red Apple.")
    'red apple'
    >>> normalize_answer("Two")
    '2'
    """
    text = raw
    if config.lowercase:
        text = text.lower()
    if config.punctuation_rules:
        # deletions can create new digit-separator-digit runs; settle them
        while True:
            nxt = _apply_punctuation(text, config.punctuation)
            if nxt == text:
                break
            text = nxt
    word_steps = config.word_numbers_to_digits or config.strip_articles or config.expand_contractions
    if word_steps:
        words = text.split() if config.collapse_whitespace else text.split(" ")
        if config.word_numbers_to_digits:
            words = [config.word_numbers.get(w, w) for w in words]
        if config.strip_articles:
            articles = set(config.articles)
            words = [w for w in words if w not in articles]
        if config.expand_contractions:
            words = [config.contractions.get(w, w) for w in words]
        text = " ".join(words)
    if config.collapse_whitespace:
        text = " ".join(text.split())
    return text


@dataclass(frozen=True)
class RawAnnotation:
    question_id: QuestionId
    answers: tuple
    question_text: Optional[str] = None
    answer_type: Optional[str] = None

    def __post_init__(self):
        if not self.answers:
            raise ValueError(f"annotation {self.question_id!r} has no answers")
        object.__setattr__(self, "answers", tuple(self.answers))

    @property
    def n(self) -> int:
        return len(self.answers)


@dataclass(frozen=True)
class Prediction:
    question_id: QuestionId
    answer: str


@dataclass(frozen=True)
class AnswerPattern:
    """Unique normalized answers with their frequencies.

    Entries are ordered by descending frequency, then answer, so every
    pattern built from the same multiset is identical.
    """

    entries: tuple

    def __post_init__(self):
        entries = tuple(sorted(((str(a), int(f)) for a, f in self.entries), key=lambda e: (-e[1], e[0])))
        if not entries:
            raise ValueError("empty answer pattern")
        answers = [a for a, _ in entries]
        if len(set(answers)) != len(answers):
            raise ValueError("duplicate answers in pattern")
        if any(f < 1 for _, f in entries):
            raise ValueError("frequencies must be positive")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_lookup", dict(entries))

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "AnswerPattern":
        return cls(tuple(counts.items()))

    @property
    def total(self) -> int:
        return sum(f for _, f in self.entries)

    @property
    def max_frequency(self) -> int:
        return self.entries[0][1]

    @property
    def answers(self) -> tuple:
        return tuple(a for a, _ in self.entries)

    @property
    def unique_count(self) -> int:
        return len(self.entries)

    def frequency(self, answer: str) -> int:
        return self._lookup.get(answer, 0)

    def modal_answers(self) -> tuple:
        return tuple(a for a, f in self.entries if f == self.max_frequency)

    def as_dict(self) -> dict:
        return dict(self.entries)


def build_pattern(
    annotation: RawAnnotation | Iterable[str],
    config: NormalizationConfig = DEFAULT_NORMALIZATION,
) -> AnswerPattern:
    """Tabulate normalized crowd answers into an :class:`AnswerPattern`."""
    answers = annotation.answers if isinstance(annotation, RawAnnotation) else tuple(annotation)
    if not answers:
        raise ValueError("cannot build a pattern from zero answers")
    counts = Counter(normalize_answer(a, config) for a in answers)
    return AnswerPattern.from_counts(counts)
