"""Evaluation metrics: style relevance, Fréchet distance, mIoU, LPIPS adapter."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch
import torch.nn.functional as F

from .errors import DimensionError, LabelRangeError
from .objectives import PerceptualBackbone


@dataclass
class EmbeddingSet:
    """Feature vectors for one side of a distribution comparison."""

    vectors: np.ndarray  # (n, d)
    source: str = ""

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise DimensionError(f"embeddings must be (n, d), got {self.vectors.shape}")
        if self.vectors.shape[0] < 2:
            raise DimensionError("need n >= 2 samples to estimate a covariance")


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric square root with eigenvalues clamped at zero."""
    sym = (matrix + matrix.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def frechet_distance(a: EmbeddingSet, b: EmbeddingSet) -> float:
    """||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

    The cross term is evaluated through the symmetric product
    S_b^(1/2) S_a S_b^(1/2), whose eigenvalues are clamped at zero before
    taking roots, so tiny negative modes from sampling noise cannot leak
    into the trace.
    """
    if a.vectors.shape[1] != b.vectors.shape[1]:
        raise DimensionError("embedding dimensions differ")
    mu_a = a.vectors.mean(axis=0)
    mu_b = b.vectors.mean(axis=0)
    cov_a = np.cov(a.vectors, rowvar=False)
    cov_b = np.cov(b.vectors, rowvar=False)
    cov_a = np.atleast_2d(cov_a)
    cov_b = np.atleast_2d(cov_b)
    sqrt_b = _psd_sqrt(cov_b)
    cross = _psd_sqrt(sqrt_b @ cov_a @ sqrt_b)
    mean_term = float(np.sum((mu_a - mu_b) ** 2))
    trace_term = float(np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross))
    return mean_term + trace_term


class ConfusionMatrix:
    """Pixel-count confusion accumulator (rows: ground truth, cols: prediction)."""

    def __init__(self, num_labels: int):
        self.num_labels = num_labels
        self.counts = np.zeros((num_labels, num_labels), dtype=np.int64)

    def add(self, pred: np.ndarray, gt: np.ndarray) -> None:
        pred = np.asarray(pred).reshape(-1)
        gt = np.asarray(gt).reshape(-1)
        if pred.shape != gt.shape:
            raise DimensionError("prediction and ground truth sizes differ")
        s = self.num_labels
        if pred.max(initial=0) >= s or gt.max(initial=0) >= s or pred.min(initial=0) < 0 or gt.min(initial=0) < 0:
            raise LabelRangeError(f"labels outside [0, {s})")
        flat = s * gt + pred
        self.counts += np.bincount(flat, minlength=s * s).reshape(s, s)

    def merge(self, other: "ConfusionMatrix") -> None:
        if other.num_labels != self.num_labels:
            raise LabelRangeError("cannot merge confusion matrices of different sizes")
        self.counts += other.counts

    def pixel_accuracy(self) -> float:
        total = self.counts.sum()
        return float(np.diag(self.counts).sum() / total) if total else 0.0

    def miou(self) -> float:
        """Mean IoU over labels with nonzero union (absent labels excluded)."""
        tp = np.diag(self.counts).astype(np.float64)
        union = self.counts.sum(axis=0) + self.counts.sum(axis=1) - tp
        valid = union > 0
        if not valid.any():
            return 0.0
        return float((tp[valid] / union[valid]).mean())


def segmentation_scores(pred_masks, gt_masks, num_labels: int) -> tuple[float, float]:
    """(mIoU, pixel accuracy) accumulated over aligned mask pairs."""
    cm = ConfusionMatrix(num_labels)
    for pred, gt in zip(pred_masks, gt_masks):
        cm.add(pred, gt)
    return cm.miou(), cm.pixel_accuracy()


def style_relevance(synth: np.ndarray, gt: np.ndarray,
                    backbone: PerceptualBackbone) -> float:
    """Shallow-feature cosine agreement between a synthesis and its target.

    Cosine similarity between the channel vectors of the backbone's two
    shallowest feature maps, averaged over positions and layers. This is a
    local definition of the color/style score: values are comparable within
    this toolkit, not across publications.
    """
    if synth.shape != gt.shape:
        raise DimensionError(f"shape mismatch {synth.shape} vs {gt.shape}")
    x = torch.from_numpy(np.asarray(synth, dtype=np.float32))[None]
    y = torch.from_numpy(np.asarray(gt, dtype=np.float32))[None]
    with torch.no_grad():
        feats_x = backbone.extract(x)[:2]
        feats_y = backbone.extract(y)[:2]
        scores = [F.cosine_similarity(fx, fy, dim=1, eps=1e-8).mean() for fx, fy in zip(feats_x, feats_y)]
    return float(torch.stack(scores).mean())


def pooled_color_embedding(images, grid: int = 4) -> EmbeddingSet:
    """Block-averaged RGB embedding: one 3*grid*grid vector per image.

    A deliberately simple, dependency-free embedding for distribution
    comparisons. Pretrained feature extractors plug into the same
    EmbeddingSet container when their weights are available.
    """
    vecs = []
    for img in images:
        t = torch.from_numpy(np.asarray(img, dtype=np.float32))[None]
        pooled = F.adaptive_avg_pool2d(t, grid)
        vecs.append(pooled.reshape(-1).numpy())
    return EmbeddingSet(np.stack(vecs), source=f"pooled-color-{grid}x{grid}")


@dataclass
class LpipsResult:
    value: float | None
    status: str  # "ok" or "unavailable"
    provenance: str

    def report_value(self):
        return self.value if self.status == "ok" else "unavailable"


def lpips_adapter(x: np.ndarray, y: np.ndarray,
                  scorer: Callable[[np.ndarray, np.ndarray], float] | None,
                  provenance: str = "") -> LpipsResult:
    """Delegate to an externally supplied patch-similarity scorer.

    A missing scorer yields an explicit "unavailable" result rather than a
    silent zero.
    """
    if scorer is None:
        return LpipsResult(None, "unavailable", provenance or "no scorer configured")
    return LpipsResult(float(scorer(x, y)), "ok", provenance or getattr(scorer, "__name__", "scorer"))


def evaluation_report(fid, lpips: LpipsResult | None, sr, miou, acc, n_images: int) -> dict:
    """Assemble the canonical metrics report payload."""
    if lpips is None:
        lpips = LpipsResult(None, "unavailable", "no scorer configured")
    return {
        "fid": fid,
        "lpips": lpips.report_value(),
        "sr": sr,
        "miou": miou,
        "acc": acc,
        "n_images": n_images,
        "scorer_provenance": lpips.provenance,
    }
