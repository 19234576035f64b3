"""Command-line interface: train, eval, chat, inspect, serve."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import urllib.request
from pathlib import Path

from clarifier import corpus as corpus_io
from clarifier import data, encoder, engine as engine_mod, qgen
from clarifier.exceptions import ClarifierError


def _cmd_train(args) -> int:
    corpus = corpus_io.load_corpus(args.data)
    vectors = encoder.load_vectors(args.vectors)
    hypernyms = corpus_io.load_hypernyms(args.hypernyms)
    config = engine_mod.load_config(args.config) if args.config else engine_mod.EngineConfig()
    external = qgen.load_pairs(args.qa_pairs) if args.qa_pairs else None
    built = engine_mod.build_engine(corpus, config, vectors, hypernyms, external)
    built.save(args.out)
    print(f"artifact written to {args.out}")
    return 0


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path}")


def _cmd_eval(args) -> int:
    eng = engine_mod.load_engine(args.artifact)
    test = corpus_io.load_corpus(args.test)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    metrics = eng.evaluate_topk(test)
    _write_csv(
        out_dir / "topk.csv",
        ["metric", "top1", "top2"],
        [
            ["accuracy", metrics["accuracy_top1"], metrics["accuracy_top2"]],
            ["f1", metrics["f1_top1"], metrics["f1_top2"]],
        ],
    )
    print(
        f"top-1 accuracy {metrics['accuracy_top1']:.4f}  "
        f"top-2 accuracy {metrics['accuracy_top2']:.4f}"
    )

    if args.ambiguous:
        examples = corpus_io.load_ambiguous(args.ambiguous)
        t2_values = tuple(float(x) for x in args.sweep_t2.split(","))
        report = eng.evaluate_ambiguity(examples, t2_values)
        _write_csv(
            out_dir / "ambiguity.csv",
            ["t2", "total", "detected", "matched", "match_rate"],
            [
                [r["t2"], r["total"], r["detected"], r["matched"], r["match_rate"]]
                for r in report["sweep"]
            ],
        )
        histogram = report["margin_histogram"]
        _write_csv(
            out_dir / "margins.csv",
            ["bin_left", "bin_right", "count"],
            [
                [histogram["edges"][i], histogram["edges"][i + 1], c]
                for i, c in enumerate(histogram["counts"])
            ],
        )
        gates = tuple(float(x) for x in args.sweep_gate.split(","))
        coverage = eng.evaluate_coverage(examples, gates)
        _write_csv(
            out_dir / "coverage.csv",
            ["gate", "detected", "qg_fraction", "template_fraction"],
            [
                [r["gate"], r["detected"], r["qg_fraction"], r["template_fraction"]]
                for r in coverage
            ],
        )
        at_default = next(
            (r for r in report["sweep"] if abs(r["t2"] - eng.config.thresholds.t2) < 1e-9),
            report["sweep"][-1],
        )
        print(
            f"ambiguity: {at_default['matched']}/{at_default['total']} matched "
            f"at t2={at_default['t2']}"
        )
    return 0


def _cmd_inspect(args) -> int:
    eng = engine_mod.load_engine(args.artifact)
    report = eng.inspect(args.query)
    dist = report.distribution
    order = sorted(
        range(len(dist.probabilities)), key=lambda i: (-dist.probabilities[i], i)
    )
    print(f"verdict: {report.verdict.kind.value}")
    for rank, i in enumerate(order[:3], start=1):
        print(f"  top{rank}: {dist.intents[i]} p={dist.probabilities[i]:.4f}")
    if report.question is None:
        print("no clarification needed")
        return 0
    q = report.question
    print(f"provenance: {q.provenance.value}")
    print(f"applied_rule: {q.applied_rule or '-'}")
    print(f"question: {q.text}")
    print(f"option_j: {q.option_j}  ({q.intent_j})")
    print(f"option_k: {q.option_k}  ({q.intent_k})")
    if report.matrix:
        target = open(args.matrix_out, "w", newline="", encoding="utf-8") if args.matrix_out else sys.stdout
        try:
            writer = csv.DictWriter(target, fieldnames=list(report.matrix[0]))
            writer.writeheader()
            writer.writerows(report.matrix)
        finally:
            if args.matrix_out:
                target.close()
                print(f"score matrix written to {args.matrix_out}")
    return 0


def _chat_local(artifact: str) -> int:
    eng = engine_mod.load_engine(artifact)
    session = eng.new_session()
    interactive = sys.stdin.isatty()
    if interactive:
        print("type a query (ctrl-d to quit)")
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        try:
            session, reply = eng.handle_message(session, text)
        except ClarifierError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(_render_reply(engine_mod, reply))
        if session.state is engine_mod.SessionState.CLOSED:
            session = eng.new_session()
            if interactive:
                print("(new session)")
    return 0


def _render_reply(engine_mod, reply) -> str:
    if reply.kind is engine_mod.ReplyKind.FINAL:
        return f"final: {reply.intent} (confidence {reply.confidence:.3f})"
    if reply.kind is engine_mod.ReplyKind.CLARIFY:
        q = reply.question
        return f"clarify: {q.text} [{q.option_j} | {q.option_k}]"
    return f"rejected: {reply.reason}"


def _chat_remote(url: str) -> int:
    base = url.rstrip("/")

    def post(path, payload):
        request = urllib.request.Request(
            base + path,
            data=json.dumps(payload).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        with urllib.request.urlopen(request) as response:
            return json.loads(response.read().decode("utf-8"))

    session_id = post("/v1/sessions", {})["session_id"]
    if sys.stdin.isatty():
        print(f"connected, session {session_id} (ctrl-d to quit)")
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        wire = post(f"/v1/sessions/{session_id}/messages", {"text": text})
        if wire["kind"] == "final":
            print(f"final: {wire['intent']} (confidence {wire['confidence']:.3f})")
        elif wire["kind"] == "clarify":
            options = " | ".join(o["text"] for o in wire["options"])
            print(f"clarify: {wire['question']} [{options}]")
        else:
            print(f"rejected: {wire['reason']}")
        if wire["kind"] in ("final", "rejected"):
            session_id = post("/v1/sessions", {})["session_id"]
    return 0


def _cmd_chat(args) -> int:
    if args.url:
        return _chat_remote(args.url)
    return _chat_local(args.artifact)


def _cmd_serve(args) -> int:
    import uvicorn

    from clarifier.service import create_app

    eng = engine_mod.load_engine(args.artifact)
    host, _, port = args.bind.rpartition(":")
    app = create_app(
        eng,
        cors_origins=tuple(args.cors_origin),
        session_ttl_seconds=args.session_ttl,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def _cmd_dataset(args) -> int:
    paths = data.write_dataset(args.out_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clarifier",
        description="intent disambiguation engine with clarifying questions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="build an engine artifact from a corpus")
    p_train.add_argument("--data", required=True, help="training corpus (JSON lines)")
    p_train.add_argument("--vectors", required=True, help="word vector text file")
    p_train.add_argument("--hypernyms", required=True, help="hypernym lexicon TSV")
    p_train.add_argument("--qa-pairs", help="externally generated QA pairs (JSON lines)")
    p_train.add_argument("--out", required=True, help="artifact output path")
    p_train.add_argument("--config", help="engine config JSON")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate an artifact, emitting CSV tables")
    p_eval.add_argument("--artifact", required=True)
    p_eval.add_argument("--test", required=True, help="labeled test corpus")
    p_eval.add_argument("--ambiguous", help="ambiguous test set (intent_b records)")
    p_eval.add_argument("--sweep-t2", default="0.1,0.2,0.3,0.4")
    p_eval.add_argument("--sweep-gate", default="-inf,0.5,0.7,0.9,inf")
    p_eval.add_argument("--out-dir", default=".")
    p_eval.set_defaults(func=_cmd_eval)

    p_chat = sub.add_parser("chat", help="interactive chat (local artifact or remote server)")
    group = p_chat.add_mutually_exclusive_group(required=True)
    group.add_argument("--artifact")
    group.add_argument("--url", help="base URL of a running gateway")
    p_chat.set_defaults(func=_cmd_chat)

    p_inspect = sub.add_parser("inspect", help="trace one query through the pipeline")
    p_inspect.add_argument("--artifact", required=True)
    p_inspect.add_argument("--query", required=True)
    p_inspect.add_argument("--matrix-out", help="write the score matrix CSV here")
    p_inspect.set_defaults(func=_cmd_inspect)

    p_serve = sub.add_parser("serve", help="run the HTTP gateway")
    p_serve.add_argument("--artifact", required=True)
    p_serve.add_argument("--bind", default="127.0.0.1:8000")
    p_serve.add_argument("--cors-origin", action="append", default=["*"])
    p_serve.add_argument("--session-ttl", type=float, default=1800.0)
    p_serve.set_defaults(func=_cmd_serve)

    p_dataset = sub.add_parser("dataset", help="write the bundled synthetic dataset")
    p_dataset.add_argument("--out-dir", required=True)
    p_dataset.set_defaults(func=_cmd_dataset)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ClarifierError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
