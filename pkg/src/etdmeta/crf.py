"""Linear-chain conditional random field.

Every feature is a binary indicator ``name=value``. A model scores a label
path ``y`` over ``n`` tokens as::

    sum_t sum_{f active at t} emission[f, y_t] + sum_{t>0} transition[y_{t-1}, y_t]

and is fit by maximising the L2-penalised conditional log-likelihood with
mini-batch stochastic gradient ascent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import FIELDS
from .features import FeatureMap, feature_strings

FORMAT_VERSION = 1

LABELS: tuple[str, ...] = ("O",) + tuple(f"{p}-{f}" for f in FIELDS for p in ("B", "I"))


def check_label_set(labels: Sequence[str]) -> None:
    if "O" not in labels:
        raise ValueError("label set must contain 'O'")
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate labels")
    for lab in labels:
        if lab.startswith("I-") and "B-" + lab[2:] not in labels:
            raise ValueError(f"{lab} present without B-{lab[2:]}")


def is_valid_bio(labels: Sequence[str]) -> bool:
    prev = "O"
    for lab in labels:
        if lab.startswith("I-") and prev[2:] != lab[2:]:
            return False
        prev = lab
    return True


@dataclass(frozen=True)
class LabeledSequence:
    feature_maps: tuple[FeatureMap, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.feature_maps) != len(self.labels):
            raise ValueError("feature and label sequences differ in length")
        if not is_valid_bio(self.labels):
            raise ValueError(f"labels are not a valid BIO sequence: {self.labels}")


@dataclass(frozen=True)
class CrfParams:
    l2: float = 0.1
    epochs: int = 50
    batch_size: int = 8
    learning_rate: float = 0.1
    # inverse-time decay: rate / (1 + decay * epochs_elapsed)
    decay: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.l2 < 0 or self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError(f"invalid hyperparameters {self}")


@dataclass
class CrfModel:
    labels: tuple[str, ...]
    features: dict[str, int]
    emission: np.ndarray  # [num_features, num_labels]
    transition: np.ndarray  # [num_labels, num_labels], prev -> cur
    params: CrfParams = field(default_factory=CrfParams)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        L = len(self.labels)
        if self.emission.shape != (len(self.features), L) or self.transition.shape != (L, L):
            raise ValueError("weight shapes do not match label set / feature dictionary")
        if sorted(self.features.values()) != list(range(len(self.features))):
            raise ValueError("feature indices must be dense")
        if not (np.all(np.isfinite(self.emission)) and np.all(np.isfinite(self.transition))):
            raise ValueError("non-finite weights")

    @classmethod
    def zeros(cls, labels: Sequence[str], feature_names: Sequence[str], params: CrfParams | None = None):
        feats = {name: i for i, name in enumerate(feature_names)}
        L = len(labels)
        return cls(tuple(labels), feats, np.zeros((len(feats), L)), np.zeros((L, L)), params or CrfParams())

    @property
    def label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def observations(self, feature_maps: Sequence[FeatureMap]) -> list[np.ndarray]:
        """Active feature indices per position; unseen features are dropped."""
        out = []
        for fm in feature_maps:
            idx = [self.features[s] for s in feature_strings(fm) if s in self.features]
            out.append(np.array(idx, dtype=np.intp))
        return out

    def emission_scores(self, obs: Sequence[np.ndarray]) -> np.ndarray:
        E = np.zeros((len(obs), len(self.labels)))
        for t, idx in enumerate(obs):
            if idx.size:
                E[t] = self.emission[idx].sum(axis=0)
        return E

    def summary(self) -> tuple[float, float, float]:
        w = np.concatenate([self.emission.ravel(), self.transition.ravel()])
        return float(w.sum()), float(w.min()), float(w.max())


class CrfGradient(NamedTuple):
    emission: np.ndarray
    transition: np.ndarray


def _logsumexp(x: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(x - m), axis=axis))


def forward(E: np.ndarray, T: np.ndarray) -> tuple[np.ndarray, float]:
    """Log-space forward pass. Returns alphas ``[n, L]`` and log Z."""
    n = E.shape[0]
    alpha = np.empty_like(E)
    alpha[0] = E[0]
    for t in range(1, n):
        alpha[t] = _logsumexp(alpha[t - 1][:, None] + T, axis=0) + E[t]
    return alpha, float(_logsumexp(alpha[-1], axis=0))


def backward(E: np.ndarray, T: np.ndarray) -> tuple[np.ndarray, float]:
    n = E.shape[0]
    beta = np.zeros_like(E)
    for t in range(n - 2, -1, -1):
        beta[t] = _logsumexp(T + (E[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta, float(_logsumexp(E[0] + beta[0], axis=0))


def _marginals(E: np.ndarray, T: np.ndarray):
    alpha, log_z = forward(E, T)
    beta, _ = backward(E, T)
    node = np.exp(alpha + beta - log_z)
    if E.shape[0] > 1:
        # pairwise[t, i, j] = p(y_t = i, y_{t+1} = j)
        pair = alpha[:-1, :, None] + T[None, :, :] + (E[1:] + beta[1:])[:, None, :] - log_z
        edge = np.exp(pair).sum(axis=0)
    else:
        edge = np.zeros_like(T)
    return node, edge, log_z


def path_score(E: np.ndarray, T: np.ndarray, path: Sequence[int]) -> float:
    score = float(E[np.arange(len(path)), path].sum())
    for a, b in zip(path, path[1:]):
        score += float(T[a, b])
    return score


def _label_ids(model: CrfModel, labels: Sequence[str]) -> list[int]:
    index = model.label_index
    try:
        return [index[lab] for lab in labels]
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not in model label set") from None


def sequence_log_likelihood(model: CrfModel, seq: LabeledSequence) -> float:
    if not seq.labels:
        raise ValueError("empty sequence")
    y = _label_ids(model, seq.labels)
    E = model.emission_scores(model.observations(seq.feature_maps))
    _, log_z = forward(E, model.transition)
    return path_score(E, model.transition, y) - log_z


def marginals(model: CrfModel, feature_maps: Sequence[FeatureMap]) -> tuple[np.ndarray, np.ndarray]:
    """Per-position label marginals ``[n, L]`` and expected transition counts ``[L, L]``."""
    if not feature_maps:
        raise ValueError("empty sequence")
    E = model.emission_scores(model.observations(feature_maps))
    node, edge, _ = _marginals(E, model.transition)
    return node, edge


def _sparse_gradient(model: CrfModel, obs, y):
    """Log-likelihood and its gradient; emission part as a [n, L] per-position delta."""
    E = model.emission_scores(obs)
    node, edge, log_z = _marginals(E, model.transition)
    ll = path_score(E, model.transition, y) - log_z
    delta = -node
    delta[np.arange(len(y)), y] += 1.0
    g_trans = -edge
    for a, b in zip(y, y[1:]):
        g_trans[a, b] += 1.0
    return ll, delta, g_trans


def _scatter(target: np.ndarray, obs, delta: np.ndarray, scale: float = 1.0) -> None:
    for t, idx in enumerate(obs):
        if idx.size:
            np.add.at(target, idx, scale * delta[t])


def gradient(model: CrfModel, seq: LabeledSequence) -> CrfGradient:
    """Gradient of ``sequence_log_likelihood`` (empirical minus expected counts)."""
    if not seq.labels:
        raise ValueError("empty sequence")
    obs = model.observations(seq.feature_maps)
    _, delta, g_trans = _sparse_gradient(model, obs, _label_ids(model, seq.labels))
    g_emit = np.zeros_like(model.emission)
    _scatter(g_emit, obs, delta)
    return CrfGradient(g_emit, g_trans)


def build_feature_dict(data: Sequence[LabeledSequence]) -> dict[str, int]:
    index: dict[str, int] = {}
    for seq in data:
        for fm in seq.feature_maps:
            for s in feature_strings(fm):
                if s not in index:
                    index[s] = len(index)
    return index


def objective(model: CrfModel, data: Sequence[LabeledSequence]) -> float:
    """Penalised log-likelihood that ``train`` maximises."""
    ll = sum(sequence_log_likelihood(model, s) for s in data)
    sq = float(np.sum(model.emission**2) + np.sum(model.transition**2))
    return ll - 0.5 * model.params.l2 * sq


def train(
    data: Sequence[LabeledSequence],
    params: CrfParams | None = None,
    labels: Sequence[str] = LABELS,
    log=None,
) -> CrfModel:
    """Fit a CRF by mini-batch SGD. Deterministic for a given ``params.seed``."""
    params = params or CrfParams()
    data = list(data)
    if not data:
        raise ValueError("no training sequences")
    check_label_set(labels)
    features = build_feature_dict(data)
    if not features:
        raise ValueError("no features observed in training data")
    model = CrfModel.zeros(labels, list(features), params)
    cache = [(model.observations(s.feature_maps), _label_ids(model, s.labels)) for s in data if s.labels]
    N = len(cache)
    rng = np.random.default_rng(params.seed)
    reg = params.l2 / N
    for epoch in range(params.epochs):
        order = rng.permutation(N)
        total_ll = 0.0
        for start in range(0, N, params.batch_size):
            batch = order[start : start + params.batch_size]
            lr = params.learning_rate / (1.0 + params.decay * (epoch + start / N))
            g_emit = np.zeros_like(model.emission)
            g_trans = np.zeros_like(model.transition)
            for k in batch:
                obs, y = cache[k]
                ll, delta, gt = _sparse_gradient(model, obs, y)
                total_ll += ll
                _scatter(g_emit, obs, delta)
                g_trans += gt
            scale = lr / len(batch)
            # gradient step on the likelihood, then an implicit (proximal) L2 shrink
            shrink = 1.0 / (1.0 + lr * reg)
            model.emission += scale * g_emit
            model.emission *= shrink
            model.transition += scale * g_trans
            model.transition *= shrink
        if log is not None:
            log(f"epoch {epoch + 1}/{params.epochs} log-likelihood {total_ll:.4f}")
    return model


def bio_transition_mask(labels: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Allowed ``(start, transition)`` masks: I-x must follow B-x or I-x."""
    L = len(labels)
    start = np.ones(L, dtype=bool)
    trans = np.ones((L, L), dtype=bool)
    for j, cur in enumerate(labels):
        if cur.startswith("I-"):
            start[j] = False
            for i, prev in enumerate(labels):
                trans[i, j] = prev[2:] == cur[2:] and prev[:2] in ("B-", "I-")
    return start, trans


def viterbi_path(E: np.ndarray, T: np.ndarray, start_mask=None, trans_mask=None) -> list[int]:
    n, L = E.shape
    if start_mask is not None:
        T = np.where(trans_mask, T, -np.inf)
    delta = E[0] if start_mask is None else np.where(start_mask, E[0], -np.inf)
    back = np.zeros((n, L), dtype=np.intp)
    for t in range(1, n):
        cand = delta[:, None] + T
        # argmax keeps the first maximum, i.e. the lowest label index
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(L)] + E[t]
    best = int(np.argmax(delta))
    path = [best]
    for t in range(n - 1, 0, -1):
        best = int(back[t, best])
        path.append(best)
    path.reverse()
    return path


def viterbi(model: CrfModel, feature_maps: Sequence[FeatureMap], constrained: bool = False) -> list[str]:
    """Highest-scoring label path; ``constrained`` forbids invalid BIO moves."""
    if not feature_maps:
        raise ValueError("empty sequence")
    E = model.emission_scores(model.observations(feature_maps))
    masks = bio_transition_mask(model.labels) if constrained else (None, None)
    return [model.labels[i] for i in viterbi_path(E, model.transition, *masks)]


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_model(model: CrfModel, path) -> None:
    names = sorted(model.features, key=model.features.__getitem__)
    payload = {
        "format": "etdmeta-crf",
        "version": FORMAT_VERSION,
        "labels": list(model.labels),
        "features": names,
        "emission": model.emission.tolist(),
        "transition": model.transition.tolist(),
        "params": asdict(model.params),
        "meta": model.meta,
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_model(path) -> CrfModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "etdmeta-crf":
        raise ValueError(f"{path}: not a CRF model file")
    if payload.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model version {payload.get('version')}")
    L = len(payload["labels"])
    emission = np.array(payload["emission"], dtype=float).reshape(len(payload["features"]), L)
    return CrfModel(
        labels=tuple(payload["labels"]),
        features={name: i for i, name in enumerate(payload["features"])},
        emission=emission,
        transition=np.array(payload["transition"], dtype=float).reshape(L, L),
        params=CrfParams(**payload["params"]),
        meta=payload.get("meta", {}),
    )

