"""Command-line entry points for the two-stage pipeline and its evaluations.

Stages hand off through files (JSONL/TSV/text) so each is independently
runnable and cacheable. All commands log line-delimited JSON events to
stderr and honor SWSDS_-prefixed environment variable overrides.
"""

from __future__ import annotations

import json
import sys

import click

from . import evaluate as ev
from . import kb as kbmod
from . import scoring
from . import sense_vectors
from . import wmd as wmdmod
from . import wsd as wsdmod
from .embeddings import (
    EmbeddingError,
    load_word2vec_text,
    save_word2vec_text,
)

EXIT_PARSE = 1
EXIT_IO = 2

PARSE_ERRORS = (
    kbmod.KbError,
    EmbeddingError,
    json.JSONDecodeError,
    ValueError,
    KeyError,
)


def log_event(event: str, **fields) -> None:
    sys.stderr.write(json.dumps({"event": event, **fields}, ensure_ascii=False) + "\n")


def _run(fn):
    try:
        fn()
    except OSError as exc:
        log_event("error", kind="io", message=str(exc))
        sys.exit(EXIT_IO)
    except PARSE_ERRORS as exc:
        log_event("error", kind="parse", message=str(exc))
        sys.exit(EXIT_PARSE)


def scorer_options(fn):
    fn = click.option("--scorer", "scorer_kind", type=click.Choice(["stub", "remote"]),
                      default="stub", show_default=True)(fn)
    fn = click.option("--endpoint", default=None, help="Remote scoring service URL.")(fn)
    fn = click.option("--stub-table", "stub_table", type=click.Path(), default=None,
                      help="JSON file of lemma -> score for the stub scorer.")(fn)
    fn = click.option("--stub-seed", "stub_seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--cache", "cache_path", type=click.Path(), default=None,
                      help="JSONL score cache path.")(fn)
    fn = click.option("--timeout", type=float, default=10.0, show_default=True)(fn)
    return fn


def build_scorer(scorer_kind, endpoint, stub_table, stub_seed, cache_path, timeout):
    """Returns (scorer, counter); the counter sits inside the cache layer so
    its call count reflects real backend invocations, not cache hits."""
    if scorer_kind == "remote":
        if not endpoint:
            raise click.UsageError("--endpoint is required with --scorer remote")
        inner: scoring.Scorer = scoring.RemoteScorer(endpoint, timeout=timeout)
    else:
        table = {}
        if stub_table:
            with open(stub_table, encoding="utf-8") as fh:
                table = json.load(fh)
        inner = scoring.StubScorer(table, seed=stub_seed)
    counter = scoring.CountingScorer(inner)
    scorer: scoring.Scorer = counter
    if cache_path:
        scorer = scoring.cached(counter, cache_path)
    return scorer, counter


@click.group(context_settings={"auto_envvar_prefix": "SWSDS"})
def main():
    """Sense disambiguation, sense vectors, and WMD similarity tooling."""


@main.group()
def kb():
    """Knowledge base utilities."""


@kb.command("dict")
@click.option("--kb", "kb_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def kb_dict(kb_path, out_path):
    """Write the polysemous-word dictionary as lemma<TAB>pos<TAB>count."""

    def run():
        base = kbmod.load_kb(kb_path)
        poly = kbmod.build_polysemy_dict(base)
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(poly.to_tsv())
        log_event("kb_dict", senses=len(base), entries=len(poly), out=out_path)

    _run(run)


@main.group()
def wsd():
    """Sense disambiguation over corpora."""


@wsd.command("annotate")
@click.option("--kb", "kb_path", type=click.Path(), required=True)
@click.option("--dict", "dict_path", type=click.Path(), required=True,
              help="Polysemy dictionary TSV from 'kb dict'.")
@click.option("--in", "in_path", type=click.Path(), required=True,
              help="JSONL of {tokens, pos_tags} sentences.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Result log JSONL.")
@click.option("--max-substitutes", type=int, default=10, show_default=True)
@scorer_options
def wsd_annotate(kb_path, dict_path, in_path, out_path, log_path, max_substitutes,
                 scorer_kind, endpoint, stub_table, stub_seed, cache_path, timeout):
    """Rewrite polysemous tokens as lemma=sense_id."""

    def run():
        base = kbmod.load_kb(kb_path)
        with open(dict_path, encoding="utf-8") as fh:
            poly = kbmod.PolysemyDictionary.from_tsv(fh.read())
        scorer, counter = build_scorer(scorer_kind, endpoint, stub_table,
                                       stub_seed, cache_path, timeout)
        config = wsdmod.WsdConfig(max_substitutes=max_substitutes)
        sentences = []
        with open(in_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                sentences.append((obj["tokens"], obj["pos_tags"]))
        annotated = wsdmod.annotate_corpus(sentences, base, poly, scorer, config)
        failures = 0
        with open(out_path, "w", encoding="utf-8") as fh:
            for sentence in annotated:
                fh.write(sentence.text() + "\n")
                failures += len(sentence.errors)
        if log_path:
            with open(log_path, "w", encoding="utf-8") as fh:
                for sentence in annotated:
                    for result in sentence.results:
                        fh.write(json.dumps(wsdmod.result_to_obj(result),
                                            ensure_ascii=False) + "\n")
        log_event("wsd_annotate", sentences=len(annotated),
                  scorer_calls=counter.calls, failures=failures, out=out_path)

    _run(run)


@main.group()
def embed():
    """Sense vector construction."""


@embed.command("senses")
@click.option("--kb", "kb_path", type=click.Path(), required=True)
@click.option("--vectors", "vectors_path", type=click.Path(), required=True)
@click.option("--annotated", "annotated_path", type=click.Path(), required=True,
              help="Annotated corpus text from 'wsd annotate'.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--k-synonyms", type=int, default=10, show_default=True)
@click.option("--strict-tenth", is_flag=True, default=False,
              help="Divide synonym sums by 10 instead of the used count.")
def embed_senses_cmd(kb_path, vectors_path, annotated_path, out_path, report_path,
                     k_synonyms, strict_tenth):
    """Register a mean-of-synonyms vector for every new sense key."""

    def run():
        base = kbmod.load_kb(kb_path)
        store = load_word2vec_text(vectors_path)
        corpus = []
        with open(annotated_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    corpus.append(line.split())
        reports, failures = sense_vectors.embed_senses(
            corpus, base, store, k=k_synonyms, strict_tenth=strict_tenth
        )
        save_word2vec_text(store, out_path)
        if report_path:
            with open(report_path, "w", encoding="utf-8") as fh:
                for report in reports:
                    fh.write(json.dumps(report.to_obj(), ensure_ascii=False) + "\n")
        log_event("embed_senses", new_keys=len(reports), failures=len(failures),
                  out=out_path)

    _run(run)


@main.group()
def sim():
    """Semantic similarity."""


@sim.command("wmd")
@click.option("--vectors", "vectors_path", type=click.Path(), required=True)
@click.option("--pairs", "pairs_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--threshold", type=float, default=None,
              help="Emit match decisions at this distance threshold.")
@click.option("--dump-plan", is_flag=True, default=False)
def sim_wmd(vectors_path, pairs_path, out_path, threshold, dump_plan):
    """Word Mover's Distance for every pair in the file."""

    def run():
        store = load_word2vec_text(vectors_path)
        pairs = ev.load_pairs(pairs_path)
        with open(out_path, "w", encoding="utf-8") as fh:
            for pair in pairs:
                distance, plan = wmdmod.wmd(
                    wmdmod.Document(pair.a), wmdmod.Document(pair.b), store
                )
                obj: dict = {"id": pair.id, "distance": distance}
                if threshold is not None:
                    obj["decision"] = "match" if distance <= threshold else "no-match"
                if dump_plan:
                    obj["plan"] = [
                        {"from": src, "to": dst, "mass": mass}
                        for (src, dst), mass in sorted(plan.flows.items())
                    ]
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
        log_event("sim_wmd", pairs=len(pairs), out=out_path)

    _run(run)


@main.group(name="eval")
def eval_group():
    """Evaluation harnesses."""


@eval_group.command("wsd")
@click.option("--kb", "kb_path", type=click.Path(), required=True)
@click.option("--gold", "gold_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--max-substitutes", type=int, default=10, show_default=True)
@scorer_options
def eval_wsd_cmd(kb_path, gold_path, out_path, max_substitutes,
                 scorer_kind, endpoint, stub_table, stub_seed, cache_path, timeout):
    """Micro/macro F1 and accuracy against gold sense annotations."""

    def run():
        base = kbmod.load_kb(kb_path)
        gold = ev.load_gold(gold_path)
        scorer, counter = build_scorer(scorer_kind, endpoint, stub_table,
                                       stub_seed, cache_path, timeout)
        config = wsdmod.WsdConfig(max_substitutes=max_substitutes)
        metrics = ev.eval_wsd(gold, base, scorer, config)
        report = {
            **metrics.to_obj(),
            "config": {"max_substitutes": max_substitutes, "scorer": scorer_kind},
        }
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, ensure_ascii=False, sort_keys=True, indent=2)
            fh.write("\n")
        log_event("eval_wsd", items=metrics.n_items, accuracy=metrics.accuracy,
                  scorer_calls=counter.calls)

    _run(run)


@eval_group.command("sim")
@click.option("--vectors", "vectors_path", type=click.Path(), required=True)
@click.option("--pairs", "pairs_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--split-ratio", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, required=True)
def eval_sim(vectors_path, pairs_path, out_path, split_ratio, seed):
    """Similarity accuracy with a dev-split-tuned threshold."""

    def run():
        store = load_word2vec_text(vectors_path)
        pairs = ev.load_pairs(pairs_path)
        metrics = ev.eval_similarity(pairs, store, split_ratio=split_ratio, seed=seed)
        report = {
            **metrics.to_obj(),
            "config": {"seed": seed, "split_ratio": split_ratio},
        }
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, ensure_ascii=False, sort_keys=True, indent=2)
            fh.write("\n")
        log_event("eval_sim", accuracy=metrics.accuracy, threshold=metrics.threshold)

    _run(run)


@eval_group.command("compare")
@click.option("--kb", "kb_path", type=click.Path(), required=True)
@click.option("--vectors", "vectors_path", type=click.Path(), required=True)
@click.option("--pairs", "pairs_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--split-ratio", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--k-synonyms", type=int, default=10, show_default=True)
@click.option("--max-substitutes", type=int, default=10, show_default=True)
@scorer_options
def eval_compare(kb_path, vectors_path, pairs_path, out_path, split_ratio, seed,
                 k_synonyms, max_substitutes,
                 scorer_kind, endpoint, stub_table, stub_seed, cache_path, timeout):
    """Baseline vs sense-annotated similarity, same seed for both arms."""

    def run():
        base = kbmod.load_kb(kb_path)
        poly = kbmod.build_polysemy_dict(base)
        store = load_word2vec_text(vectors_path)
        pairs = ev.load_pairs(pairs_path)
        scorer, counter = build_scorer(scorer_kind, endpoint, stub_table,
                                       stub_seed, cache_path, timeout)
        config = wsdmod.WsdConfig(max_substitutes=max_substitutes)
        comparison = ev.compare_pipelines(
            pairs, store, base, poly, scorer, config,
            k_synonyms=k_synonyms, split_ratio=split_ratio, seed=seed,
        )
        report = {
            **comparison.to_obj(),
            "config": {"seed": seed, "split_ratio": split_ratio,
                       "k_synonyms": k_synonyms, "scorer": scorer_kind},
        }
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, ensure_ascii=False, sort_keys=True, indent=2)
            fh.write("\n")
        log_event("eval_compare", baseline=comparison.baseline.accuracy,
                  swsds=comparison.swsds.accuracy, delta=comparison.delta)

    _run(run)


if __name__ == "__main__":
    main()
