"""Task adapters: rule templates, instance loading, keyword extraction, and
the corpus coverage metric.

Two instance kinds are supported.  Lexical instances carry a concept list the
output must cover; dialogue instances carry persona sentences and a dialogue
history, and the rules reward persona keywords and words bridging both
speakers' interests.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

from .kb import FactBase, align_word_to_token
from .prover import EvalContext
from .stemming import IRREGULAR_FORMS, word_stem

__all__ = [
    "TaskInstance", "TemplateBinding", "DEFAULT_STOPWORDS",
    "load_instances", "extract_keywords",
    "lexical_rule_template", "dialogue_rule_template",
    "instance_coverage", "corpus_coverage", "template_text",
]

DEFAULT_STOPWORDS = frozenset("""
a an the and or but if then else of in on at to for with from by as is are was
were be been being am do does did have has had having i you he she it we they
me him her us them my your his its our their this that these those not no nor
so too very just like love want will would can could may might shall should
what who whom which when where why how about into over under again there here
""".split())

_WORD_RE = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class TaskInstance:
    kind: str                                   # "lexical" | "dialogue"
    instance_id: str = ""
    concepts: tuple[str, ...] = ()
    persona: tuple[str, ...] = ()
    history: tuple[str, ...] = ()
    reference: Optional[str] = None

    def __post_init__(self):
        if self.kind == "lexical" and not self.concepts:
            raise ValueError("lexical instance needs at least one concept")
        if self.kind == "dialogue" and not self.persona:
            raise ValueError("dialogue instance needs at least one persona sentence")
        if self.kind not in ("lexical", "dialogue"):
            raise ValueError(f"unknown instance kind {self.kind!r}")


def load_instances(path) -> list[TaskInstance]:
    """Read JSON-lines instances: ``{"kind": "lexical", "concepts": [...]}``
    or ``{"kind": "dialogue", "persona": [...], "history": [...],
    "reference": ...}``."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(TaskInstance(
                kind=rec["kind"],
                instance_id=str(rec.get("id", lineno)),
                concepts=tuple(rec.get("concepts", ())),
                persona=tuple(rec.get("persona", ())),
                history=tuple(rec.get("history", ())),
                reference=rec.get("reference"),
            ))
    return out


def extract_keywords(sentence: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS
                     ) -> tuple[str, ...]:
    """Deterministic keyword extraction: lowercase, split on
    whitespace/punctuation, drop stop-words and single characters, map
    irregular inflections to their base form, collapse duplicates keeping
    first occurrence."""
    seen = []
    for word in _WORD_RE.findall(sentence.lower()):
        if len(word) < 2 or word in stopwords:
            continue
        word = IRREGULAR_FORMS.get(word, word)
        if word not in seen:
            seen.append(word)
    return tuple(seen)


@dataclass
class TemplateBinding:
    source: str
    ctx: EvalContext
    rule: str = "R"
    skipped: tuple[str, ...] = ()        # words that did not align to tokens
    keywords: dict = field(default_factory=dict)


def template_text(name: str) -> str:
    """Shipped rule template text by name: ``commongen``, ``commongen_hard``
    or ``personachat``."""
    return resources.files("logicdec.templates").joinpath(f"{name}.rules").read_text("utf-8")


def _align_words(words: Iterable[str], facts: FactBase) -> tuple[list[int], list[str]]:
    ids, skipped = [], []
    for w in words:
        tid = align_word_to_token(w, facts.vocab)
        if tid is None:
            skipped.append(w)
        elif tid not in ids:
            ids.append(tid)
    return ids, skipped


def lexical_rule_template(concepts: Sequence[str], facts: FactBase,
                          gate: str = "avg") -> TemplateBinding:
    """Rules for covering target concepts.

    ``gate`` selects how un-coveredness combines with relatedness: ``"avg"``
    follows the averaging conjunction (covered concepts still contribute half
    their relatedness), ``"luk"`` uses the hard conjunction (covered concepts
    contribute nothing).  Both templates ship; neither is privileged.
    """
    if gate not in ("avg", "luk"):
        raise ValueError(f"gate must be 'avg' or 'luk', got {gate!r}")
    ids, skipped = _align_words(concepts, facts)
    if not ids:
        raise ValueError("none of the concepts aligned to vocabulary tokens")
    source = template_text("commongen" if gate == "avg" else "commongen_hard")
    ctx = EvalContext(facts=facts,
                      sets={"C": tuple(ids)},
                      covered=tuple(False for _ in ids))
    return TemplateBinding(source=source, ctx=ctx, skipped=tuple(skipped))


def dialogue_rule_template(persona: Sequence[str], history: Sequence[str],
                           facts: FactBase,
                           stopwords: frozenset[str] = DEFAULT_STOPWORDS
                           ) -> TemplateBinding:
    """Rules rewarding persona keywords and bridging words.

    P holds keywords extracted from the persona sentences, U keywords from
    the user's utterances.  A quantifier over an empty set is a bind-time
    error, so empty sides of the bridging conjunction are replaced by the
    constant 0, preserving the disjunctive structure of the top rule.
    """
    p_words: list[str] = []
    for sent in persona:
        for w in extract_keywords(sent, stopwords):
            if w not in p_words:
                p_words.append(w)
    u_words: list[str] = []
    for utterance in history:
        for w in extract_keywords(utterance, stopwords):
            if w not in u_words:
                u_words.append(w)

    p_ids, p_skipped = _align_words(p_words, facts)
    u_ids, u_skipped = _align_words(u_words, facts)
    if not p_ids:
        raise ValueError("persona produced no alignable keywords")

    p_branch = "(exists p in P, Edge(x, p))"
    u_branch = "(exists u in U, Edge(x, u))" if u_ids else "0"
    source = "\n".join([
        "R(x) :- Persona(x) | Common(x)",
        "Persona(x) :- exists p in P, Equal(x, p)",
        f"Common(x) :- {p_branch} ^ {u_branch}",
    ])
    sets = {"P": tuple(p_ids)}
    if u_ids:
        sets["U"] = tuple(u_ids)
    ctx = EvalContext(facts=facts, sets=sets)
    return TemplateBinding(source=source, ctx=ctx,
                           skipped=tuple(p_skipped + u_skipped),
                           keywords={"P": tuple(p_words), "U": tuple(u_words)})


# ---------------------------------------------------------------------------
# Coverage metric

def instance_coverage(output_text: str, concepts: Sequence[str]) -> float:
    """Fraction of concepts with a stem-mate among the output words."""
    if not concepts:
        return 1.0
    stems = {word_stem(w) for w in _WORD_RE.findall(output_text.lower())}
    hit = sum(1 for c in concepts if word_stem(c.lower()) in stems)
    return hit / len(concepts)


def corpus_coverage(outputs: Sequence[str], instances: Sequence[TaskInstance]) -> float:
    """Mean per-instance covered-concept fraction, in percent."""
    if len(outputs) != len(instances):
        raise ValueError(f"{len(outputs)} outputs vs {len(instances)} instances")
    if not instances:
        raise ValueError("no instances")
    total = sum(instance_coverage(out, inst.concepts)
                for out, inst in zip(outputs, instances))
    return 100.0 * total / len(instances)
