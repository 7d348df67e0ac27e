"""Operator command line: knowledge-base ingestion, decoding runs,
evaluation, and the logic-vector service.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
The ``LOGICDEC_LOG`` environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .decoder import (PRESETS, DecodingConfig, Hypothesis, _covered_mask,
                      coverage_of, decode, plain_beam_search)
from .kb import WORD_BOUNDARY, Vocabulary, ingest_triples, load_factbase
from .lm import NgramScorer, ngram_train
from .rules import parse_program
from .tasks import (DEFAULT_STOPWORDS, corpus_coverage, dialogue_rule_template,
                    lexical_rule_template, load_instances)
from .transformer import TinyTransformer, TransformerConfig, TransformerScorer, load_weights

log = logging.getLogger("logicdec")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _require_file(path: str, flag: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{flag}: no such file: {path}")
    return p


def _read_words(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def build_parser() -> _Parser:
    parser = _Parser(prog="logicdec",
                     description="Rule-controllable constrained decoding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ing = sub.add_parser("ingest-kg", help="build a fact-base snapshot from triples")
    p_ing.add_argument("--triples", required=True, help="TSV triples: head<TAB>relation<TAB>tail[<TAB>weight]")
    p_ing.add_argument("--vocab", required=True, help="vocabulary file, one token per line")
    p_ing.add_argument("--mode", choices=("soft", "hard"), default="soft", help="edge weight mode")
    p_ing.add_argument("--out", required=True, help="snapshot output path")
    p_ing.add_argument("--stopwords", help="stop-word list, one per line")
    p_ing.add_argument("--blackwords", help="black-word list, one per line")

    common_decode = argparse.ArgumentParser(add_help=False)
    common_decode.add_argument("--factbase", required=True, help="fact-base snapshot path")
    common_decode.add_argument("--instances", required=True, help="JSONL instance file")
    common_decode.add_argument("--out", required=True, help="JSONL results output path")
    common_decode.add_argument("--scorer", choices=("ngram", "transformer"), default="ngram", help="next-token scorer")
    common_decode.add_argument("--corpus", help="training corpus for the n-gram scorer")
    common_decode.add_argument("--ngram-order", type=int, default=3, help="n-gram order (1..5)")
    common_decode.add_argument("--discount", type=float, default=0.75, help="absolute discount")
    common_decode.add_argument("--weights", help="transformer weight file (omit for seeded init)")
    common_decode.add_argument("--seed", type=int, default=0, help="transformer init seed")
    common_decode.add_argument("--beam", type=int, help="beam size")
    common_decode.add_argument("--max-length", type=int, default=16, help="max generated tokens")
    common_decode.add_argument("--length-norm", type=float, default=0.7, help="length normalization exponent")

    p_dec = sub.add_parser("decode", parents=[common_decode], help="run constrained decoding")
    p_dec.add_argument("--task", choices=("lexical", "dialogue"), default="lexical", help="instance kind")
    p_dec.add_argument("--preset", choices=("commongen", "personachat", "custom"),
                       default="custom", help="named hyperparameter preset")
    p_dec.add_argument("--alpha1", type=float, help="prefix-attention intensity")
    p_dec.add_argument("--alpha2", type=float, help="target-attention intensity")
    p_dec.add_argument("--alpha3", type=float, help="prediction intensity")
    p_dec.add_argument("--rho", type=float, help="pruning ratio in (0, 1]")
    p_dec.add_argument("--group-k", type=int, help="per-group retention budget")
    p_dec.add_argument("--rules", help="override rule program file")
    p_dec.add_argument("--template", choices=("soft-gate", "hard-gate"), default="soft-gate",
                       help="lexical template gate variant")
    p_dec.add_argument("--trace", action="store_true", help="emit per-step top-5 before/after shifting")

    sub.add_parser("baseline-beam", parents=[common_decode],
                   help="run unconstrained beam search on the same scorer")

    p_eval = sub.add_parser("eval", help="score a results file")
    p_eval.add_argument("--results", required=True, help="JSONL results from decode")
    p_eval.add_argument("--instances", required=True, help="JSONL instance file")

    p_srv = sub.add_parser("serve", help="serve prove/decide over newline-delimited JSON")
    p_srv.add_argument("--factbase", required=True, help="fact-base snapshot path")
    p_srv.add_argument("--rules", required=True, help="rule program file")
    p_srv.add_argument("--bind", default="127.0.0.1:7350", help="host:port to listen on")

    return parser


# ---------------------------------------------------------------------------
# Helpers shared by decode/baseline

def _load_corpus_ids(path, vocab: Vocabulary) -> list[list[int]]:
    sequences = []
    bos = vocab.id_of("<s>")
    eos = vocab.id_of("</s>")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            words = line.split()
            if not words:
                continue
            ids = []
            for w in words:
                tid = vocab.id_of(w)
                if tid is None:
                    raise UsageError(f"--corpus: line {lineno}: token {w!r} not in vocabulary")
                ids.append(tid)
            if bos is not None and ids[0] != bos:
                ids.insert(0, bos)
            if eos is not None and ids[-1] != eos:
                ids.append(eos)
            sequences.append(ids)
    if not sequences:
        raise UsageError("--corpus: file contains no sentences")
    return sequences


def _build_scorer(args, facts):
    if args.scorer == "ngram":
        if not args.corpus:
            raise UsageError("--corpus is required with --scorer ngram")
        _require_file(args.corpus, "--corpus")
        corpus = _load_corpus_ids(args.corpus, facts.vocab)
        lm = ngram_train(corpus, order=args.ngram_order, discount=args.discount,
                         vocab_size=len(facts.vocab))
        return NgramScorer(lm)
    if args.weights:
        model = load_weights(_require_file(args.weights, "--weights"))
        if model.config.vocab_size != len(facts.vocab):
            raise UsageError("--weights: vocabulary size does not match the fact base")
    else:
        model = TinyTransformer(TransformerConfig(vocab_size=len(facts.vocab), seed=args.seed))
    return TransformerScorer(model)


def _detokenize(tokens, vocab: Vocabulary, bos: int, eos) -> str:
    words = []
    for tid in tokens:
        if tid == bos or (eos is not None and tid == eos):
            continue
        words.append(vocab.token(tid).removeprefix(WORD_BOUNDARY))
    return " ".join(words)


def _decode_config(args) -> DecodingConfig:
    if getattr(args, "preset", "custom") != "custom":
        base = PRESETS[args.preset]
    else:
        base = DecodingConfig()
    overrides = {}
    if args.beam is not None:
        overrides["beam_size"] = args.beam
    for flag, name in (("alpha1", "alpha1"), ("alpha2", "alpha2"), ("alpha3", "alpha3"),
                       ("rho", "prune_ratio"), ("group_k", "group_budget")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    overrides["max_length"] = args.max_length
    overrides["length_norm_power"] = args.length_norm
    return replace(base, **overrides)


def _result_line(instance, hyp, facts, config, concepts, completed, trace=None) -> dict:
    rec = {
        "id": instance.instance_id,
        "text": _detokenize(hyp.tokens, facts.vocab, config.bos_id, config.eos_id),
        "score": hyp.logp,
        "coverage": coverage_of(hyp, concepts),
        "finished": bool(hyp.finished and completed),
        "traced": trace is not None,
    }
    if trace is not None:
        rec["trace"] = trace
    return rec


def cmd_ingest_kg(args) -> int:
    triples = _require_file(args.triples, "--triples")
    vocab = Vocabulary.from_file(_require_file(args.vocab, "--vocab"))
    stop = _read_words(args.stopwords) if args.stopwords else DEFAULT_STOPWORDS
    black = _read_words(args.blackwords) if args.blackwords else frozenset()
    facts, report = ingest_triples(triples, vocab, mode=args.mode,
                                   stopwords=stop, blackwords=black)
    facts.save(args.out)
    print(f"triples read:      {report.lines_read}")
    print(f"relations kept:    {report.kept}")
    print(f"relations dropped: {report.discarded}")
    print(f"malformed lines:   {report.malformed}")
    print(f"edges stored:      {report.edges}")
    print(f"stem classes:      {report.stem_classes}")
    log.info("snapshot written to %s", args.out)
    return 0


def _decode_common(args, constrained: bool) -> int:
    facts = load_factbase(_require_file(args.factbase, "--factbase"))
    instances = load_instances(_require_file(args.instances, "--instances"))
    scorer = _build_scorer(args, facts)
    config = _decode_config(args)
    bos = facts.vocab.id_of("<s>")
    eos = facts.vocab.id_of("</s>")
    if bos is None:
        raise UsageError("--factbase: vocabulary lacks the '<s>' start token")
    config = replace(config, bos_id=bos, eos_id=eos)

    override_source = None
    if constrained and args.rules:
        override_source = Path(_require_file(args.rules, "--rules")).read_text("utf-8")

    written = 0
    with open(args.out, "w", encoding="utf-8") as out:
        for instance in instances:
            try:
                if not constrained:
                    result = plain_beam_search(
                        scorer, config.beam_size, config.max_length,
                        bos_id=bos, eos_id=eos,
                        length_norm_power=config.length_norm_power)
                    concepts = [tid for tid in
                                (facts.vocab.id_of(c) for c in instance.concepts)
                                if tid is not None]
                    best = result.best
                    best = Hypothesis(best.tokens, best.logp,
                                      _covered_mask(best.tokens, concepts, facts),
                                      best.finished)
                    rec = _result_line(instance, best, facts, config, concepts,
                                       result.completed)
                else:
                    if instance.kind != args.task:
                        raise ValueError(
                            f"instance kind {instance.kind!r} does not match --task {args.task!r}")
                    if instance.kind == "lexical":
                        gate = "luk" if args.template == "hard-gate" else "avg"
                        binding = lexical_rule_template(instance.concepts, facts, gate=gate)
                    else:
                        binding = dialogue_rule_template(instance.persona, instance.history, facts)
                    source = override_source if override_source is not None else binding.source
                    program = parse_program(source)
                    result = decode(scorer, program, binding.rule, binding.ctx,
                                    config, trace=args.trace)
                    concepts = binding.ctx.sets.get("C", ())
                    rec = _result_line(instance, result.best, facts, config, concepts,
                                       result.completed,
                                       trace=result.trace if args.trace else None)
            except Exception as exc:
                log.error("instance %s failed: %s", instance.instance_id, exc)
                rec = {"id": instance.instance_id, "error": f"{type(exc).__name__}: {exc}"}
            out.write(json.dumps(rec) + "\n")
            written += 1
    print(f"wrote {written} results to {args.out}")
    return 0


def cmd_decode(args) -> int:
    return _decode_common(args, constrained=True)


def cmd_baseline_beam(args) -> int:
    return _decode_common(args, constrained=False)


def cmd_eval(args) -> int:
    instances = load_instances(_require_file(args.instances, "--instances"))
    outputs, scores, lengths = [], [], []
    with open(_require_file(args.results, "--results"), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "error" in rec:
                outputs.append("")
                continue
            outputs.append(rec["text"])
            scores.append(rec["score"])
            lengths.append(len(rec["text"].split()))
    if len(outputs) != len(instances):
        raise UsageError(f"--results: {len(outputs)} results vs {len(instances)} instances")
    coverage = corpus_coverage(outputs, instances)
    mean_len = float(np.mean(lengths)) if lengths else 0.0
    mean_score = float(np.mean(scores)) if scores else 0.0
    print(f"{'metric':<14}{'value':>10}")
    print(f"{'coverage(%)':<14}{coverage:>10.1f}")
    print(f"{'mean length':<14}{mean_len:>10.2f}")
    print(f"{'mean score':<14}{mean_score:>10.3f}")
    print(json.dumps({"coverage_percent": coverage, "mean_length": mean_len,
                      "mean_score": mean_score}))
    return 0


def cmd_serve(args) -> int:
    from .service import serve_forever
    facts = load_factbase(_require_file(args.factbase, "--factbase"))
    program = parse_program(Path(_require_file(args.rules, "--rules")).read_text("utf-8"))
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"--bind: expected host:port, got {args.bind!r}")
    serve_forever(facts, program, host, int(port))
    return 0


_COMMANDS = {
    "ingest-kg": cmd_ingest_kg,
    "decode": cmd_decode,
    "baseline-beam": cmd_baseline_beam,
    "eval": cmd_eval,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LOGICDEC_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"logicdec: error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as exc:
        log.exception("command failed")
        print(f"logicdec: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
