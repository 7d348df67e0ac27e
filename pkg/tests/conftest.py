import pathlib

import pytest

from logicdec import (FactBase, NgramScorer, Vocabulary, ingest_triples,
                      ngram_train)

DATA = pathlib.Path(__file__).resolve().parent.parent / "data" / "toy"


def read_words(path):
    return frozenset(w.strip() for w in open(path, encoding="utf-8") if w.strip())


@pytest.fixture(scope="session")
def toy_vocab() -> Vocabulary:
    return Vocabulary.from_file(DATA / "vocab.txt")


@pytest.fixture(scope="session")
def toy_facts(toy_vocab) -> FactBase:
    facts, _ = ingest_triples(DATA / "kg.tsv", toy_vocab, mode="soft",
                              stopwords=read_words(DATA / "stopwords.txt"),
                              blackwords=read_words(DATA / "blackwords.txt"))
    return facts


def corpus_ids(vocab: Vocabulary, path) -> list[list[int]]:
    bos, eos = vocab.id_of("<s>"), vocab.id_of("</s>")
    out = []
    for line in open(path, encoding="utf-8"):
        words = line.split()
        if words:
            out.append([bos] + [vocab.id_of(w) for w in words] + [eos])
    return out


@pytest.fixture(scope="session")
def lexical_scorer(toy_vocab) -> NgramScorer:
    lm = ngram_train(corpus_ids(toy_vocab, DATA / "corpus_lexical.txt"),
                     order=3, vocab_size=len(toy_vocab))
    return NgramScorer(lm)


@pytest.fixture(scope="session")
def dialogue_scorer(toy_vocab) -> NgramScorer:
    lm = ngram_train(corpus_ids(toy_vocab, DATA / "corpus_dialogue.txt"),
                     order=3, vocab_size=len(toy_vocab))
    return NgramScorer(lm)


@pytest.fixture(scope="session")
def sentinel_ids(toy_vocab):
    return toy_vocab.id_of("<s>"), toy_vocab.id_of("</s>")
