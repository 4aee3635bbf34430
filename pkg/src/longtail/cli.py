"""Command-line entry point: ``longtail <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .adjust import DEFAULT_TAU, AdjustConfig, adjust_logits
from .core import LogitRecord, ObservationMeta, SpeciesVocab, ground_truth, validate_logits
from .ensemble import aggregate, group_records
from .errors import LongtailError
from .gradcheck import run_loss_check
from .locfilter import FilterPolicy, Locations2Species, build_l2s, filter_predict
from .metaenc import build_meta_vocab, encode_all
from .metrics import evaluate
from .pretrain import DEFAULT_ALPHA, DEFAULT_TEMPERATURE
from .priors import ClassPrior, SmoothingConfig, estimate_priors
from .synth import SynthConfig, SynthDataset, generate


def existing_path(text: str) -> Path:
    p = Path(text)
    if not p.exists():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return p


def non_negative(text: str) -> float:
    v = float(text)
    if not v >= 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a finite value >= 0, got {text}")
    return v


def _smoothing(args) -> SmoothingConfig | None:
    if args.smoothing == "auto":
        return None
    return SmoothingConfig(args.smoothing, args.laplace_alpha)


# subcommands

def cmd_priors(args) -> int:
    vocab = io.read_vocab(args.vocab)
    prior = estimate_priors(io.read_labels(args.labels), vocab, _smoothing(args))
    io.write_priors(args.out, prior, vocab)
    return 0


def cmd_adjust(args) -> int:
    vocab = io.read_vocab(args.vocab)
    prior = io.read_priors(args.priors, vocab)
    cfg = AdjustConfig(args.tau)
    records = validate_logits(io.read_logits(args.logits, vocab), vocab)
    out = [LogitRecord(*r.key, adjust_logits(r.scores, prior, cfg)) for r in records]
    io.write_logits(args.out, out, vocab)
    return 0


def ensemble_scores(records, prior: ClassPrior, tau: float) -> dict[str, np.ndarray]:
    cfg = AdjustConfig(tau)
    return {g.observation_id: aggregate(g, prior, cfg) for g in group_records(records)}


def cmd_ensemble(args) -> int:
    vocab = io.read_vocab(args.vocab)
    prior = io.read_priors(args.priors, vocab)
    records = []
    for path in args.logits:
        records.extend(io.read_logits(path, vocab))
    validate_logits(records, vocab)
    io.write_scores(args.out, ensemble_scores(records, prior, args.tau), vocab)
    return 0


def cmd_map_build(args) -> int:
    vocab = io.read_vocab(args.vocab)
    l2s = build_l2s(io.read_labels(args.labels), io.read_meta(args.meta), vocab)
    io.write_l2s(args.out, l2s, vocab)
    return 0


def filter_all(scores, meta_rows, l2s: Locations2Species, vocab: SpeciesVocab,
               policy: FilterPolicy) -> dict[str, int]:
    by_obs = {m.observation_id: m for m in meta_rows}
    return {
        obs: filter_predict(s, by_obs.get(obs) or ObservationMeta(obs), l2s, vocab, policy)
        for obs, s in sorted(scores.items())
    }


def cmd_filter(args) -> int:
    vocab = io.read_vocab(args.vocab)
    scores = io.read_scores(args.scores, vocab)
    l2s = io.read_l2s(args.l2s, vocab).check(vocab)
    policy = FilterPolicy(args.fallback, args.unknown_code)
    preds = filter_all(scores, io.read_meta(args.meta), l2s, vocab, policy)
    io.write_predictions(args.out, preds, vocab)
    return 0


def cmd_eval(args) -> int:
    vocab = io.read_vocab(args.vocab)
    gts = ground_truth(io.read_labels(args.labels))
    scores = io.read_scores(args.scores, vocab) if args.scores else None
    if args.pred:
        preds = io.read_predictions(args.pred)
    elif scores is not None:
        preds = {obs: int(np.argmax(s)) for obs, s in scores.items()}
    else:
        raise LongtailError("eval needs --pred or --scores")
    report = evaluate(preds, gts, vocab, scores, args.top_k if scores is not None else (),
                      present_only=args.present_only)
    io.write_report(args.out, report, vocab, args.csv)
    print(f"macro_f1={report.macro_f1:.6f}")
    return 0


def cmd_encode_meta(args) -> int:
    meta = io.read_meta(args.meta)
    if args.meta_vocab:
        mv = io.read_meta_vocab(args.meta_vocab)
    else:
        mv = build_meta_vocab(meta, include_unk=not args.no_unk)
    if args.vocab_out:
        io.write_meta_vocab(args.vocab_out, mv)
    io.write_features(args.out, meta, encode_all(meta, mv), mv)
    return 0


def synth_config(args) -> SynthConfig:
    return SynthConfig(
        num_classes=args.num_classes, num_train=args.num_train, num_test=args.num_test,
        zipf_s=args.zipf_s, signal_mu=args.signal_mu, prior_leak=args.prior_leak,
        num_codes=args.num_codes, num_views=args.num_views, seed=args.seed,
    )


def write_dataset(out_dir: Path, data: SynthDataset) -> dict[str, Path]:
    paths = {
        "vocab": out_dir / "vocab.json",
        "train_labels": out_dir / "train_labels.csv",
        "train_meta": out_dir / "train_meta.csv",
        "test_labels": out_dir / "test_labels.csv",
        "test_meta": out_dir / "test_meta.csv",
        "test_logits": out_dir / "test_logits.csv",
        "true_prior": out_dir / "true_prior.json",
    }
    io.write_vocab(paths["vocab"], data.vocab)
    io.write_labels(paths["train_labels"], data.train_labels)
    io.write_meta(paths["train_meta"], data.train_meta)
    io.write_labels(paths["test_labels"], data.test_labels)
    io.write_meta(paths["test_meta"], data.test_meta)
    io.write_logits(paths["test_logits"], data.test_logits, data.vocab)
    io.write_json(paths["true_prior"], {
        "species": list(data.vocab.names),
        "weights": [float(w) for w in data.weights],
    })
    return paths


def cmd_synth(args) -> int:
    write_dataset(Path(args.out_dir), generate(synth_config(args)))
    return 0


def cmd_loss_check(args) -> int:
    report = run_loss_check(range(args.seed, args.seed + args.seeds), tau=args.tau,
                            alpha=args.alpha, temperature=args.temperature)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        io.write_text(args.out, text)
    else:
        sys.stdout.write(text)
    if not report["passed"]:
        print("error: gradient check exceeded tolerance", file=sys.stderr)
        return 1
    return 0


def _tau_tag(tau: float) -> str:
    return format(tau, "g").replace(".", "p")


def cmd_pipeline(args) -> int:
    out = Path(args.out_dir)
    paths = write_dataset(out / "data", generate(synth_config(args)))

    vocab = io.read_vocab(paths["vocab"])
    train_labels = io.read_labels(paths["train_labels"])
    prior = estimate_priors(train_labels, vocab, _smoothing(args))
    io.write_priors(out / "priors.json", prior, vocab)
    l2s = build_l2s(train_labels, io.read_meta(paths["train_meta"]), vocab)
    io.write_l2s(out / "l2s.json", l2s, vocab)

    records = validate_logits(io.read_logits(paths["test_logits"], vocab), vocab)
    test_meta = io.read_meta(paths["test_meta"])
    gts = ground_truth(io.read_labels(paths["test_labels"]))
    policy = FilterPolicy(args.fallback, args.unknown_code)

    summary = {"seed": args.seed, "taus": {}}
    for tau in args.taus:
        tag = _tau_tag(tau)
        scores = ensemble_scores(records, prior, tau)
        io.write_scores(out / f"scores_tau{tag}.csv", scores, vocab)
        plain = {obs: int(np.argmax(s)) for obs, s in scores.items()}
        filtered = filter_all(scores, test_meta, l2s, vocab, policy)
        io.write_predictions(out / f"preds_tau{tag}.csv", filtered, vocab)
        rep_plain = evaluate(plain, gts, vocab, scores, args.top_k)
        rep_filt = evaluate(filtered, gts, vocab)
        io.write_report(out / f"report_tau{tag}.json", rep_filt, vocab)
        summary["taus"][format(tau, "g")] = {
            "macro_f1": rep_plain.macro_f1,
            "macro_f1_filtered": rep_filt.macro_f1,
            "top_k": {str(k): v for k, v in sorted(rep_plain.top_k.items())},
        }
        print(f"tau={tau:g} macro_f1={rep_plain.macro_f1:.6f} "
              f"macro_f1_filtered={rep_filt.macro_f1:.6f}")
    io.write_json(out / "summary.json", summary)
    return 0


# parser

def _add_synth_args(p):
    d = SynthConfig()
    p.add_argument("--num-classes", type=int, default=d.num_classes)
    p.add_argument("--num-train", type=int, default=d.num_train)
    p.add_argument("--num-test", type=int, default=d.num_test)
    p.add_argument("--zipf-s", type=float, default=d.zipf_s)
    p.add_argument("--signal-mu", type=float, default=d.signal_mu)
    p.add_argument("--prior-leak", type=float, default=d.prior_leak)
    p.add_argument("--num-codes", type=int, default=d.num_codes)
    p.add_argument("--num-views", type=int, default=d.num_views)
    p.add_argument("--seed", type=int, default=d.seed)


def _add_smoothing_args(p):
    p.add_argument("--smoothing", choices=("auto", "none", "laplace"), default="auto",
                   help="auto: laplace(1) only if some class is empty")
    p.add_argument("--laplace-alpha", type=float, default=1.0)


def _add_policy_args(p):
    p.add_argument("--fallback", choices=("argmax", "error"), default="argmax")
    p.add_argument("--unknown-code", choices=("argmax", "error"), default="argmax")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longtail", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("priors", help="estimate class priors from a labels file")
    p.add_argument("--labels", type=existing_path, required=True)
    p.add_argument("--vocab", type=existing_path, required=True)
    _add_smoothing_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_priors)

    p = sub.add_parser("adjust", help="post-hoc adjust every logit row")
    p.add_argument("--logits", type=existing_path, required=True)
    p.add_argument("--priors", type=existing_path, required=True)
    p.add_argument("--vocab", type=existing_path, required=True)
    p.add_argument("--tau", type=non_negative, default=DEFAULT_TAU)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("ensemble", help="average logits per observation, then adjust")
    p.add_argument("--logits", type=existing_path, action="append", required=True,
                   help="repeat once per model or view file")
    p.add_argument("--priors", type=existing_path, required=True)
    p.add_argument("--vocab", type=existing_path, required=True)
    p.add_argument("--tau", type=non_negative, default=DEFAULT_TAU)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("map-build", help="build the locations-to-species map")
    p.add_argument("--labels", type=existing_path, required=True)
    p.add_argument("--meta", type=existing_path, required=True)
    p.add_argument("--vocab", type=existing_path, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map_build)

    p = sub.add_parser("filter", help="location-filtered predictions")
    p.add_argument("--scores", type=existing_path, required=True)
    p.add_argument("--meta", type=existing_path, required=True)
    p.add_argument("--l2s", type=existing_path, required=True)
    p.add_argument("--vocab", type=existing_path, required=True)
    _add_policy_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval", help="per-class F1, macro-F1 and top-k accuracy")
    p.add_argument("--labels", type=existing_path, required=True)
    p.add_argument("--vocab", type=existing_path, required=True)
    p.add_argument("--pred", type=existing_path)
    p.add_argument("--scores", type=existing_path,
                   help="score file for top-k; argmax predictions if --pred is absent")
    p.add_argument("--top-k", type=int, nargs="+", default=[1, 5])
    p.add_argument("--present-only", action="store_true",
                   help="average F1 over classes present in the labels only")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("encode-meta", help="one-hot encode observation metadata")
    p.add_argument("--meta", type=existing_path, required=True)
    p.add_argument("--meta-vocab", type=existing_path, help="reuse an existing meta vocabulary")
    p.add_argument("--vocab-out")
    p.add_argument("--no-unk", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode_meta)

    p = sub.add_parser("synth", help="write a synthetic long-tailed dataset")
    _add_synth_args(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("loss-check", help="finite-difference check of the loss gradients")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--tau", type=non_negative, default=DEFAULT_TAU)
    p.add_argument("--alpha", type=non_negative, default=DEFAULT_ALPHA)
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    p.add_argument("--out")
    p.set_defaults(func=cmd_loss_check)

    p = sub.add_parser("pipeline", help="synth -> priors -> ensemble -> filter -> eval")
    _add_synth_args(p)
    _add_smoothing_args(p)
    _add_policy_args(p)
    p.add_argument("--taus", type=non_negative, nargs="+", default=[0.0, 1.0])
    p.add_argument("--top-k", type=int, nargs="+", default=[1, 5])
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LongtailError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        # config dataclasses reject out-of-range values
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
