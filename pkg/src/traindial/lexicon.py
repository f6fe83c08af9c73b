"""Vocabulary, word classes, and tokenization.

The vocabulary is partitioned into word classes: most words sit alone in a
singleton class, while a handful of semantic classes (cities, stations,
numbers, ...) group interchangeable content words.  Multi-word surface forms
(two-word station names and the like) are stored with underscores and matched
greedily, longest first, at tokenization time.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

OOV_CLASS_ID = "<oov>"

_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)


class LexiconError(Exception):
    """Raised for malformed or inconsistent lexicon files."""


@dataclass(frozen=True)
class WordClass:
    """A group of words the language model treats identically."""

    id: str
    members: tuple[str, ...]
    semantic_tag: str | None = None

    @property
    def kind(self) -> str:
        return "semantic" if len(self.members) >= 2 else "singleton"


@dataclass
class Lexicon:
    """Immutable word -> class partition. Unknown words map to OOV, never error."""

    classes: dict[str, WordClass]
    class_of_word: dict[str, str]
    multiword: list[tuple[tuple[str, ...], str]] = field(default_factory=list)

    @property
    def words(self) -> set[str]:
        return set(self.class_of_word)

    @property
    def size(self) -> int:
        return len(self.class_of_word)

    def class_id_of(self, word: str) -> str:
        return self.class_of_word.get(word, OOV_CLASS_ID)

    def class_of(self, word: str) -> WordClass | None:
        """The class owning ``word``, or None for out-of-vocabulary words."""
        cid = self.class_of_word.get(word)
        return self.classes[cid] if cid is not None else None

    def members_of(self, class_id: str) -> tuple[str, ...]:
        return self.classes[class_id].members

    def members_of_tag(self, semantic_tag: str) -> tuple[str, ...]:
        out: list[str] = []
        for cls in self.classes.values():
            if cls.semantic_tag == semantic_tag:
                out.extend(cls.members)
        return tuple(sorted(out))

    def checksum(self) -> str:
        """Content hash used to pin trained language models to a vocabulary."""
        h = hashlib.sha256()
        for word in sorted(self.class_of_word):
            cid = self.class_of_word[word]
            tag = self.classes[cid].semantic_tag or ""
            h.update(f"{word}\t{cid}\t{tag}\n".encode("utf-8"))
        return h.hexdigest()


def load_lexicon(path) -> Lexicon:
    """Load a lexicon file: ``word<TAB>class_id[<TAB>semantic_tag]`` per line.

    ``#`` starts a comment; multi-word entries join their parts with
    underscores.  A word assigned to two classes is a load error.
    """
    members: dict[str, list[str]] = {}
    tags: dict[str, str | None] = {}
    class_of_word: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
                raise LexiconError(f"{path}:{lineno}: malformed lexicon line: {raw.rstrip()!r}")
            word, cid = parts[0], parts[1]
            tag = parts[2] if len(parts) == 3 and parts[2] else None
            if word in class_of_word:
                raise LexiconError(f"{path}:{lineno}: word {word!r} assigned to two classes "
                                   f"({class_of_word[word]!r} and {cid!r})")
            if cid == OOV_CLASS_ID:
                raise LexiconError(f"{path}:{lineno}: class id {cid!r} is reserved")
            prev_tag = tags.get(cid)
            if cid in tags and prev_tag != tag:
                raise LexiconError(f"{path}:{lineno}: class {cid!r} declared with conflicting "
                                   f"semantic tags {prev_tag!r} and {tag!r}")
            class_of_word[word] = cid
            members.setdefault(cid, []).append(word)
            tags[cid] = tag
    classes = {cid: WordClass(cid, tuple(words), tags[cid]) for cid, words in members.items()}
    multiword = sorted(
        ((tuple(w.split("_")), w) for w in class_of_word if "_" in w),
        key=lambda kv: -len(kv[0]),
    )
    return Lexicon(classes=classes, class_of_word=class_of_word, multiword=multiword)


def tokenize(text: str, lexicon: Lexicon) -> list[str]:
    """Lowercase, strip punctuation, and match multi-word entries longest-first.

    Unknown words are kept in place; callers detect them via
    ``lexicon.class_id_of(token) == OOV_CLASS_ID``.
    """
    raw = _PUNCT_RE.sub(" ", text.lower()).split()
    tokens: list[str] = []
    i = 0
    while i < len(raw):
        matched = False
        for parts, joined in lexicon.multiword:
            n = len(parts)
            if tuple(raw[i:i + n]) == parts:
                tokens.append(joined)
                i += n
                matched = True
                break
        if not matched:
            tokens.append(raw[i])
            i += 1
    return tokens


def detokenize(tokens: list[str]) -> str:
    """Inverse of tokenize for sequences without multi-word entries."""
    return " ".join(t.replace("_", " ") for t in tokens)


def class_sequence(tokens: list[str], lexicon: Lexicon) -> list[str]:
    return [lexicon.class_id_of(t) for t in tokens]
