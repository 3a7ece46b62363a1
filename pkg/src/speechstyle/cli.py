"""Command-line entry points: synth, build-refs, classify, evaluate, agreement.

Progress and errors go to standard error; data goes to files or stdout.
Exit codes: 0 on success, 1 on bad flags, 2 on data or processing errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .audio import SUPPORTED_RATES
from .classify import NormKind, classify_speaker, classify_utterance
from .corpus import SynthConfig, generate_synthetic_corpus, load_manifest
from .errors import ConfigMismatch, ParseError, RankOutOfRange, SpeechStyleError
from .evaluate import AgreementReport, LabelVector, agreement, evaluate_system
from .features import FrameConfig
from .reference import (
    build_reference_set,
    ingest_clip,
    load_reference_set,
    save_reference_set,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        raise _UsageError(message)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _rate(text: str) -> int:
    value = int(text)
    if value not in SUPPORTED_RATES:
        raise argparse.ArgumentTypeError(f"must be one of {SUPPORTED_RATES}")
    return value


def _parse_frame_config(text: str) -> FrameConfig:
    """Accept either a path to a JSON file or an inline JSON object."""
    try:
        if text.lstrip().startswith("{"):
            doc = json.loads(text)
        else:
            with open(text) as handle:
                doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"frame config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("frame config must be a JSON object")
    try:
        return FrameConfig.from_dict(doc)
    except TypeError as exc:
        raise ParseError(f"frame config has unknown fields: {exc}") from exc


def _frame_config_arg(args: argparse.Namespace) -> FrameConfig | None:
    return _parse_frame_config(args.frame_config) if args.frame_config else None


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    parser.add_argument(
        "--norm",
        choices=[n.value for n in NormKind],
        default="l2",
        help="scalarization norm (default l2)",
    )
    parser.add_argument(
        "--threshold",
        type=_nonneg_float,
        default=0.15,
        help="cell variation / cover threshold (default 0.15)",
    )
    parser.add_argument(
        "--frame-config",
        default=None,
        help="frame config as a JSON file path or an inline JSON object",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="speechstyle", description="Speaking-style classification toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--groups", type=_positive_int, default=5)
    p.add_argument("--speakers-per-group", type=_positive_int, default=6)
    p.add_argument("--prompts", type=_positive_int, default=4)
    p.add_argument("--sample-rate", type=_rate, default=16000)
    p.add_argument("--duration-ms", type=_positive_float, default=700.0)
    p.add_argument("--label-noise", type=_nonneg_float, default=0.0)
    p.add_argument("--telephone-band", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-refs", help="build a reference model from a labeled manifest")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_build_refs)

    p = sub.add_parser("classify", help="classify utterances against a model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="results CSV path")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="run the full split/classify/agree protocol")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="report JSON path (stdout when omitted)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("agreement", help="compare two label files")
    _add_common(p)
    p.add_argument("--a", required=True, help="first label CSV (subject,rank)")
    p.add_argument("--b", required=True, help="second label CSV (subject,rank)")
    p.set_defaults(func=cmd_agreement)

    return parser


def cmd_synth(args: argparse.Namespace) -> int:
    if args.label_noise > 1.0:
        raise _UsageError("--label-noise must lie in [0, 1]")
    cfg = SynthConfig(
        groups=args.groups,
        speakers_per_group=args.speakers_per_group,
        prompts=args.prompts,
        seed=args.seed,
        sample_rate=args.sample_rate,
        duration_ms=args.duration_ms,
        label_noise=args.label_noise,
        telephone_band=args.telephone_band,
    )
    manifest = generate_synthetic_corpus(cfg, args.out)
    count = cfg.groups * cfg.speakers_per_group * cfg.prompts
    _log(f"wrote {count} wav files under {args.out}")
    print(manifest)
    return 0


def cmd_build_refs(args: argparse.Namespace) -> int:
    cfg = _frame_config_arg(args) or FrameConfig()
    entries = load_manifest(args.manifest)
    refs = build_reference_set(entries, cfg, args.threshold, NormKind(args.norm))
    save_reference_set(refs, args.out)
    for cell in refs.cells:
        print(f"prompt {cell.prompt} group {cell.group}: {len(cell.ideals)} ideal(s)")
    _log(f"model written to {args.out}")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    refs = load_reference_set(args.model)
    override = _frame_config_arg(args)
    if override is not None and override != refs.config:
        raise ConfigMismatch("--frame-config differs from the config the model was built with")
    cfg = refs.config
    norm = NormKind(args.norm)
    entries = load_manifest(args.manifest)
    n_groups = refs.n_groups
    header = ["speaker", "prompt", "chosen", "dominant"] + [
        f"scalar_{g}" for g in range(n_groups)
    ]
    rows: list[list[str]] = []
    per_speaker: dict[str, list] = {}
    rate: int | None = None
    for entry in entries:
        bundle, rate = ingest_clip(entry.path, cfg, rate)
        result = classify_utterance(bundle, entry.prompt, refs, norm)
        per_speaker.setdefault(entry.speaker, []).append(result)
        rows.append(
            [
                entry.speaker,
                str(entry.prompt),
                str(result.chosen),
                "true" if result.dominant else "false",
                *(repr(s.scalar) for s in result.scores),
            ]
        )
    for speaker in sorted(per_speaker):
        results = per_speaker[speaker]
        label = classify_speaker(results)
        means = [
            repr(float(np.mean([r.scores[g].scalar for r in results])))
            for g in range(n_groups)
        ]
        rows.append([speaker, "", str(label), "", *means])
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    _log(f"classified {len(entries)} utterances from {args.manifest}")
    return 0


def _format_report_table(reports: dict[str, AgreementReport]) -> str:
    titles = {
        "system_vs_expert1": "System-Expert1",
        "system_vs_expert2": "System-Expert2",
        "expert1_vs_expert2": "Expert1-Expert2",
    }
    names = [titles.get(key, key) for key in reports]
    width = max(len(n) for n in names) + 3
    lines = ["".ljust(18) + "".join(n.ljust(width) for n in names)]
    for row_name, attr in (("Total agreement", "total_pct"), ("1-step agreement", "one_step_pct")):
        cells = [f"{getattr(rep, attr):.1f} %".ljust(width) for rep in reports.values()]
        lines.append(row_name.ljust(18) + "".join(cells))
    return "\n".join(lines)


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _frame_config_arg(args) or FrameConfig()
    evaluation = evaluate_system(
        args.manifest, cfg, args.threshold, NormKind(args.norm), args.seed
    )
    reports = evaluation.reports()
    print(_format_report_table(reports))
    doc = {key: rep.to_dict() for key, rep in reports.items()}
    if args.out:
        with open(args.out, "w") as handle:
            json.dump(doc, handle, indent=2)
            handle.write("\n")
        _log(f"report written to {args.out}")
    else:
        print(json.dumps(doc, indent=2))
    return 0


def _load_label_file(path: str | Path) -> LabelVector:
    entries: list[tuple[str, int]] = []
    seen: set[str] = set()
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != ("subject", "rank"):
            raise ParseError(f"{path}: header must be subject,rank")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: line {line}: expected 2 fields")
            subject, rank_text = row
            if subject in seen:
                raise ParseError(f"{path}: line {line}: duplicate subject {subject}")
            seen.add(subject)
            try:
                rank = int(rank_text)
            except ValueError:
                raise ParseError(f"{path}: line {line}: rank must be an integer") from None
            if rank < 0:
                raise RankOutOfRange(f"{path}: line {line}: rank {rank} is negative")
            entries.append((subject, rank))
    return LabelVector(entries=tuple(entries))


def cmd_agreement(args: argparse.Namespace) -> int:
    report = agreement(_load_label_file(args.a), _load_label_file(args.b))
    print(f"n                 {report.n}")
    print(f"Total agreement   {report.total_pct:.1f} %")
    print(f"1-step agreement  {report.one_step_pct:.1f} %")
    print("confusion:")
    for row in report.confusion:
        print("  " + " ".join(f"{x:4d}" for x in row))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return 1
    except SpeechStyleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
