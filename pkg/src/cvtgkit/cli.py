"""Command-line entry point.

Exit codes: 0 success, 2 input or usage error, 3 infeasible problem or
absent signal, 4 internal verification failure.  Results go to stdout as
JSON; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .corpus import CorpusError, corpus_stats, extract_targets, load_corpus
from .gate import AttentionError, GateConfig, average_maps, build_gate, load_map, save_map, synthesize_map
from .layout import InfeasibleLayout, LayoutError, LayoutProblem, solve_layout, verify_layout
from .layout.masks import box_mask
from .metrics import (
    Counts,
    MetricsReport,
    acr,
    aggregate_overall,
    clipscore_aggregate,
    effective_attention_efficiency,
    evaluate_record,
    load_annotations,
    macro_average,
)
from .ocr import load_ocr
from .reward import RewardConfig, ocr_reward

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_INTERNAL = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def _emit(obj, out: Optional[str]) -> None:
    text = _dump(obj)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}")
    return p


def _odd_kernel(text: str) -> int:
    k = int(text)
    if k < 1 or k % 2 == 0:
        raise argparse.ArgumentTypeError("kernel must be odd")
    return k


# -- subcommands ------------------------------------------------------------

def cmd_reward(args) -> int:
    ocr = load_ocr(_existing(args.ocr))
    if args.prompt is not None:
        targets = extract_targets(args.prompt)
    else:
        targets = list(args.target or [])
    if not targets:
        raise CliError("no targets: pass --prompt with quoted text or one or more --target")
    config = RewardConfig(args.lambda_bal, args.delta)
    report = ocr_reward(targets, ocr, config)
    body = report.to_json()
    body["targets"] = targets
    _emit(body, args.out)
    print(f"R_OCR={report.r_ocr!r}")
    return EXIT_OK


def cmd_gate(args) -> int:
    maps = [load_map(_existing(p)) for p in args.maps]
    config = GateConfig(args.kernel, args.qlow, args.qhigh, args.sigma_floor)
    gate = build_gate(maps, config, keep_stages=args.emit_stages)
    out = Path(args.out)
    if out.suffix == ".json":
        raise CliError("--out names the binary gate; the .json sidecar is derived from it")
    save_map(gate.values, out)
    sidecar = {
        "peak": list(gate.peak),
        "sigma": list(gate.sigma),
        "height": gate.height,
        "width": gate.width,
        "gate": str(out),
    }
    if args.emit_stages:
        stage_files = {}
        for name, stage in gate.stages.items():
            path = out.with_name(f"{out.stem}.{name}.atnm")
            save_map(stage, path)
            stage_files[name] = str(path)
        sidecar["stages"] = stage_files
    out.with_suffix(".json").write_text(_dump(sidecar) + "\n", encoding="utf-8")
    print(_dump(sidecar))
    return EXIT_OK


def cmd_layout(args) -> int:
    with open(_existing(args.problem), encoding="utf-8") as fh:
        data = json.load(fh)
    problem = LayoutProblem.from_json(
        data, a_min=args.a_min, r_min=args.r_min, r_max=args.r_max, area_cuts=args.area_cuts
    )
    solution = solve_layout(problem)
    check = verify_layout(solution, problem)
    if not check.ok:
        for v in check.violations:
            print(f"verification: {v}", file=sys.stderr)
        raise CliError("solver output failed independent verification", EXIT_INTERNAL)
    body = solution.to_json()
    body["verified"] = True
    body["problem"] = problem.to_json()
    _emit(body, args.out)
    return EXIT_OK


def _attention_files(attn_dir: Path, rid: str, k: int) -> List[Path]:
    found = sorted(attn_dir.glob(f"{rid}_{k}.*")) + sorted(attn_dir.glob(f"{rid}_{k}_*.*"))
    binary = {p.stem for p in found if p.suffix == ".atnm"}
    # a .json next to a same-named .atnm is the gate sidecar, not a map
    return [p for p in found if p.suffix == ".atnm" or (p.suffix == ".json" and p.stem not in binary)]


def _eval_one(record, args):
    """Counts plus attention metrics for one record, or ``None`` if its OCR is missing."""
    ocr_path = Path(args.ocr_dir) / f"{record.id}.json"
    if not ocr_path.exists():
        return None
    counts = evaluate_record(record.contents, load_ocr(ocr_path), args.recall_threshold)
    etas, acrs = [], []
    if args.gt_dir and args.attn_dir:
        gt_path = Path(args.gt_dir) / f"{record.id}.json"
        if gt_path.exists():
            for k, ann in enumerate(load_annotations(gt_path)):
                files = _attention_files(Path(args.attn_dir), record.id, k)
                if not files:
                    continue
                maps = [load_map(p) for p in files]
                phrase_map = average_maps(maps)
                etas.append(effective_attention_efficiency(phrase_map, ann.bbox))
                mask = box_mask(ann.bbox, phrase_map.height, phrase_map.width)
                if mask.any():
                    acrs.append(acr(maps, mask))
    return counts, etas, acrs


def _threads() -> Optional[int]:
    raw = os.environ.get("CVTG_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as exc:
        raise CliError(f"CVTG_THREADS must be an integer, got {raw!r}") from exc
    return None if n <= 0 else n


def _report(counts_list, etas, acrs, cosines, with_attention: bool) -> MetricsReport:
    total = Counts()
    for c in counts_list:
        total = total + c
    return MetricsReport.from_counts(
        total,
        eta=etas if with_attention else None,
        acr=acrs if with_attention else None,
        clipscore=clipscore_aggregate(cosines) if cosines else None,
    )


def cmd_eval(args) -> int:
    corpus = load_corpus(_existing(args.corpus))
    if not Path(args.ocr_dir).is_dir():
        raise CliError(f"no such directory: {args.ocr_dir}")
    cosines = {}
    if args.clip:
        with open(_existing(args.clip), encoding="utf-8") as fh:
            cosines = {str(k): float(v) for k, v in json.load(fh).items()}
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda r: _eval_one(r, args), corpus))
    missing = [r.id for r, res in zip(corpus, results) if res is None]
    if missing:
        print(f"warning: {len(missing)} record(s) without OCR output were skipped", file=sys.stderr)
    with_attention = bool(args.gt_dir and args.attn_dir)
    groups = {}
    for record, res in zip(corpus, results):
        if res is not None:
            groups.setdefault(record.region_count, []).append((record, res))
    by_region = {}
    for regions in sorted(groups):
        items = groups[regions]
        by_region[regions] = _report(
            [res[0] for _, res in items],
            [v for _, res in items for v in res[1]],
            [v for _, res in items for v in res[2]],
            [cosines[r.id] for r, _ in items if r.id in cosines],
            with_attention,
        )
    body = {
        "records": len(corpus),
        "evaluated": len(corpus) - len(missing),
        "missing": missing,
        "by_region": {str(k): v.to_json() for k, v in by_region.items()},
    }
    subsets = [r for r in by_region.values() if r.counts.words > 0]
    if subsets:
        body["overall"] = aggregate_overall(subsets).to_json()
        body["macro"] = macro_average(subsets)
    else:
        print("warning: no data to aggregate", file=sys.stderr)
        body["overall"] = None
        body["macro"] = None
        body["status"] = "no data"
    _emit(body, args.out)
    return EXIT_OK


def _blob(text: str) -> dict:
    try:
        x, y, sigma, amp = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("blob must be x,y,sigma,amplitude") from exc
    return {"center": (x, y), "sigma": sigma, "amplitude": amp}


def cmd_synth(args) -> int:
    amap = synthesize_map(args.blob or [], args.noise, (args.height, args.width), args.seed)
    save_map(amap, args.out)
    print(_dump({"map": args.out, "height": amap.height, "width": amap.width, "seed": args.seed}))
    return EXIT_OK


def cmd_stats(args) -> int:
    corpus = load_corpus(_existing(args.corpus))
    _emit(corpus_stats(corpus).to_json(), args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvtgkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reward", help="score OCR output against quoted targets")
    p.add_argument("ocr", help="OCR JSON file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--prompt", help="prompt whose single-quoted spans are the targets")
    src.add_argument("--target", action="append", help="target text (repeatable)")
    p.add_argument("--lambda-bal", type=float, default=0.3)
    p.add_argument("--delta", type=float, default=1.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("gate", help="build an attention gate from anchor maps")
    p.add_argument("maps", nargs="+", help="ATNM or JSON attention maps")
    p.add_argument("--out", required=True, help="gate output path (ATNM); sidecar goes next to it")
    p.add_argument("--kernel", type=_odd_kernel, default=5)
    p.add_argument("--qlow", type=float, default=0.80)
    p.add_argument("--qhigh", type=float, default=0.99)
    p.add_argument("--sigma-floor", type=float, default=1.0)
    p.add_argument("--emit-stages", action="store_true", help="also write intermediate maps")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("layout", help="solve the non-overlapping box layout")
    p.add_argument("problem", help="layout problem JSON")
    p.add_argument("--a-min", type=float)
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--area-cuts", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("eval", help="evaluate OCR (and attention) against a corpus")
    p.add_argument("corpus", help="corpus JSON")
    p.add_argument("--ocr-dir", required=True, help="directory of <record-id>.json OCR files")
    p.add_argument("--gt-dir", help="directory of <record-id>.json box annotations")
    p.add_argument("--attn-dir", help="directory of <record-id>_<k>.atnm phrase maps")
    p.add_argument("--clip", help="JSON object mapping record id to CLIP cosine")
    p.add_argument("--recall-threshold", type=float, default=0.8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic attention map")
    p.add_argument("--blob", type=_blob, action="append", help="x,y,sigma,amplitude (repeatable)")
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="summarize a corpus")
    p.add_argument("corpus")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InfeasibleLayout, AttentionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (CorpusError, LayoutError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
