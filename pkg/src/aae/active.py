"""Active-learning driver plus the evaluation harnesses built on it.

The loop alternates sampling-and-labeling with retirement: points the
current model classifies with confidence >= T leave the unlabeled pool
without spending a label. Reports track label spend and accuracy against
the pool's hidden labels.
"""
from __future__ import annotations

import math

import numpy as np

from .classifiers import Architecture, build, predict_batch, train
from .errors import ValidationError
from .features import EvaluationInstance


def evaluate(net, instances: list[EvaluationInstance]) -> float:
    """Fraction of hard-label matches on a labeled set."""
    if not instances:
        raise ValidationError("cannot evaluate on an empty set")
    if any(inst.label is None for inst in instances):
        raise ValidationError("evaluation instances must be labeled")
    probs = predict_batch(net, instances)
    labels = np.array([inst.label for inst in instances])
    return float(((probs >= 0.5) == (labels == 1)).mean())


def active_loop(pool: list[EvaluationInstance], arch: Architecture | str,
                threshold: float, sample_fraction: float,
                max_rounds: int = 20, seed: int = 0,
                uncertainty_sampling: bool = False,
                train_kwargs: dict | None = None):
    """Run the sample / train / retire loop over a hidden-label pool.

    Returns (trained network, per-round report rows). Pool labels are
    treated as hidden: they are revealed only for sampled instances; the
    reports additionally compare predictions on retired and remaining
    unlabeled points against the hidden labels.
    """
    if not pool:
        raise ValidationError("pool is empty")
    if not 0.5 < threshold <= 1.0:
        raise ValidationError("threshold must lie in (0.5, 1]")
    if not 0.0 < sample_fraction <= 1.0:
        raise ValidationError("sample_fraction must lie in (0, 1]")
    if any(inst.label is None for inst in pool):
        raise ValidationError("pool instances must carry oracle labels")
    train_kwargs = dict(train_kwargs or {})

    rng = np.random.default_rng(seed)
    input_len = pool[0].vector.size
    net = build(arch, input_len, seed=seed)

    per_round = max(1, math.ceil(sample_fraction * len(pool)))
    unlabeled = list(range(len(pool)))
    labeled: list[int] = []
    retired: list[int] = []
    report: list[dict] = []

    hidden = np.array([inst.label for inst in pool])
    rounds = 0
    while unlabeled and rounds < max_rounds:
        take = min(per_round, len(unlabeled))
        if uncertainty_sampling and labeled:
            probs = predict_batch(net, [pool[i] for i in unlabeled])
            confidence = np.maximum(probs, 1.0 - probs)
            picked = [unlabeled[i] for i in np.argsort(confidence)[:take]]
        else:
            picked = list(rng.choice(unlabeled, size=take, replace=False))
        picked_set = set(int(i) for i in picked)
        unlabeled = [i for i in unlabeled if i not in picked_set]
        labeled.extend(sorted(picked_set))

        train(net, [pool[i] for i in labeled],
              seed=seed + rounds, **train_kwargs)

        if unlabeled:
            probs = predict_batch(net, [pool[i] for i in unlabeled])
            confidence = np.maximum(probs, 1.0 - probs)
            confident = confidence >= threshold
            newly_retired = [u for u, c in zip(unlabeled, confident) if c]
            retired.extend(newly_retired)
            unlabeled = [u for u, c in zip(unlabeled, confident) if not c]

        rounds += 1
        acc_labeled = evaluate(net, [pool[i] for i in labeled])
        rest = retired + unlabeled
        if rest:
            probs = predict_batch(net, [pool[i] for i in rest])
            acc_unlabeled = float(
                ((probs >= 0.5) == (hidden[rest] == 1)).mean())
        else:
            acc_unlabeled = float("nan")
        report.append({
            "round": rounds,
            "labeled": len(labeled),
            "unlabeled": len(unlabeled),
            "retired": len(retired),
            "labeled_accuracy": acc_labeled,
            "unlabeled_accuracy": acc_unlabeled,
        })
    return net, report


def cross_validate(corpus: list[EvaluationInstance], arch: Architecture | str,
                   k: int, seed: int = 0,
                   train_kwargs: dict | None = None) -> dict:
    """Seeded k-fold cross-validation; returns fold accuracies, mean, std."""
    if k < 2:
        raise ValidationError("k must be >= 2")
    if len(corpus) < k:
        raise ValidationError(
            f"corpus of {len(corpus)} instances cannot form {k} folds")
    train_kwargs = dict(train_kwargs or {})
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    folds = np.array_split(order, k)

    input_len = corpus[0].vector.size
    accuracies = []
    for i, fold in enumerate(folds):
        test = [corpus[j] for j in fold]
        train_set = [corpus[j] for other in folds if other is not fold
                     for j in other]
        net = build(arch, input_len, seed=seed + i)
        train(net, train_set, seed=seed + i, **train_kwargs)
        accuracies.append(evaluate(net, test))
    return {
        "fold_accuracies": accuracies,
        "mean": float(np.mean(accuracies)),
        "std": float(np.std(accuracies)),
    }


def train_fraction_sweep(corpus: list[EvaluationInstance],
                         arch: Architecture | str, fractions,
                         seed: int = 0,
                         train_kwargs: dict | None = None) -> list[dict]:
    """Train on each fraction of the corpus, evaluate on the remainder."""
    train_kwargs = dict(train_kwargs or {})
    rows = []
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    input_len = corpus[0].vector.size if corpus else 0
    for fraction in fractions:
        fraction = float(fraction)
        if not 0.0 < fraction < 1.0:
            raise ValidationError("fractions must lie in (0, 1)")
        cut = round(fraction * len(corpus))
        if cut == 0 or cut == len(corpus):
            raise ValidationError(
                f"fraction {fraction} leaves an empty split")
        train_set = [corpus[i] for i in order[:cut]]
        test_set = [corpus[i] for i in order[cut:]]
        net = build(arch, input_len, seed=seed)
        train(net, train_set, seed=seed, **train_kwargs)
        rows.append({
            "fraction": fraction,
            "train_accuracy": evaluate(net, train_set),
            "test_accuracy": evaluate(net, test_set),
        })
    return rows
