"""Vernacular sentence splitting.

A sentence ends at ``.`` followed by whitespace or end of input. The
splitter tracks nested ``(* ... *)`` comments and string literals, so a
period inside either never ends a sentence. Bullet runs (``-``, ``+``,
``*``) and the focus braces ``{`` / ``}`` at the start of a sentence are
emitted as sentences of their own.

Re-joining the split sentences of a script that ends at a sentence
boundary reproduces the input up to comment removal and whitespace
normalization.
"""
from __future__ import annotations

from .model import normalize_text

BULLET_CHARS = "-+*"
#: Sentences that close a proof successfully.
PROOF_CLOSERS = frozenset({"Qed.", "Defined."})
#: Sentences that end a proof block without proving anything.
ABANDON_CLOSERS = frozenset({"Admitted.", "Abort."})
PROOF_END_SENTENCES = PROOF_CLOSERS | ABANDON_CLOSERS


def strip_comments(text: str) -> str:
    """Remove ``(* ... *)`` comments, honoring nesting and string literals."""
    out: list[str] = []
    i = 0
    n = len(text)
    depth = 0
    in_string = False
    while i < n:
        ch = text[i]
        if in_string:
            if depth == 0:
                out.append(ch)
            if ch == '"':
                in_string = False
            i += 1
            continue
        if text.startswith("(*", i):
            depth += 1
            i += 2
            continue
        if depth > 0 and text.startswith("*)", i):
            depth -= 1
            i += 2
            continue
        if ch == '"':
            in_string = True
            if depth == 0:
                out.append(ch)
            i += 1
            continue
        if depth == 0:
            out.append(ch)
        i += 1
    return "".join(out)


def split_sentences(text: str, keep_comments: bool = False) -> list[str]:
    """Split vernacular text into sentences.

    Comments are removed first unless ``keep_comments`` is set (in which
    case they stay attached to the sentence they appear in). Trailing text
    that never reaches a terminator is dropped.
    """
    if not keep_comments:
        text = strip_comments(text)
    sentences: list[str] = []
    pending: list[str] = []
    i = 0
    n = len(text)
    depth = 0
    in_string = False

    def pending_blank() -> bool:
        return not "".join(pending).strip()

    while i < n:
        ch = text[i]
        if in_string:
            pending.append(ch)
            if ch == '"':
                in_string = False
            i += 1
            continue
        if depth > 0:
            pending.append(ch)
            if text.startswith("(*", i):
                depth += 1
                pending.append(text[i + 1])
                i += 2
                continue
            if text.startswith("*)", i):
                depth -= 1
                pending.append(text[i + 1])
                i += 2
                continue
            if ch == '"':
                in_string = True
            i += 1
            continue
        if text.startswith("(*", i):
            depth += 1
            pending.append("(*")
            i += 2
            continue
        if ch == '"':
            in_string = True
            pending.append(ch)
            i += 1
            continue
        if ch in "{}" and pending_blank():
            sentences.append(ch)
            pending = []
            i += 1
            continue
        if ch in BULLET_CHARS and pending_blank():
            j = i
            while j < n and text[j] == ch:
                j += 1
            sentences.append(text[i:j])
            pending = []
            i = j
            continue
        if ch == "." and (i + 1 == n or text[i + 1].isspace()):
            pending.append(ch)
            sentences.append("".join(pending).strip())
            pending = []
            i += 1
            continue
        pending.append(ch)
        i += 1
    return sentences


def normalize_script(text: str) -> str:
    """Canonical one-line form of a script: split, strip, re-join."""
    return normalize_text(" ".join(split_sentences(text)))


def is_proof_end(sentence: str) -> bool:
    return normalize_text(sentence) in PROOF_END_SENTENCES


def closes_successfully(sentence: str) -> bool:
    return normalize_text(sentence) in PROOF_CLOSERS
