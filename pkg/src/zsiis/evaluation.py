"""Detection evaluation: accuracy reports, PSNR statistics, threshold
sweeps, an LSB-matching baseline embedder, and the residual-augmentation
ablation harness.

Evaluation-time stego images are clamped and quantized to the 8-bit grid
(they would travel as PNG); pass covers through `data.quantize8` as well to
keep the two classes format-symmetric.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
import torch

from .data import quantize8
from .errors import ConfigError, DataError, DimensionError
from .inn import InnModel
from .pipeline import conceal, detect, psnr, residual_augment, reveal

LAM_MODES = ("zero", "uniform", "fixed")


@dataclass
class PsnrStats:
    """Summary of a PSNR score distribution in dB."""

    mean: float
    std: float
    min: float
    max: float
    deciles: list = field(default_factory=list)

    @classmethod
    def from_scores(cls, scores) -> "PsnrStats":
        arr = np.asarray(list(scores), dtype=np.float64)
        if arr.size == 0:
            raise DataError("cannot summarize an empty score list")
        return cls(mean=float(arr.mean()), std=float(arr.std()),
                   min=float(arr.min()), max=float(arr.max()),
                   deciles=[float(np.percentile(arr, p)) for p in range(10, 100, 10)])

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "min": self.min,
                "max": self.max, "deciles": list(self.deciles)}


@dataclass
class EvalReport:
    """Detection outcome over a labelled cover/stego set."""

    n_cover: int
    n_stego: int
    accuracy: float
    true_positive_rate: float
    true_negative_rate: float
    threshold_db: float
    cover_psnr_stats: PsnrStats
    stego_psnr_stats: PsnrStats

    def to_dict(self) -> dict:
        return {"n_cover": self.n_cover, "n_stego": self.n_stego,
                "accuracy": self.accuracy,
                "true_positive_rate": self.true_positive_rate,
                "true_negative_rate": self.true_negative_rate,
                "threshold_db": self.threshold_db,
                "cover_psnr_stats": self.cover_psnr_stats.to_dict(),
                "stego_psnr_stats": self.stego_psnr_stats.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        d["cover_psnr_stats"] = PsnrStats(**d["cover_psnr_stats"])
        d["stego_psnr_stats"] = PsnrStats(**d["stego_psnr_stats"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(json.loads(text))


def generate_eval_stegos(model: InnModel, covers, secrets, lam_mode: str = "zero",
                         generator: torch.Generator | None = None,
                         lam: float = 0.0) -> list:
    """Conceal each (secret, cover) pair and prepare the stego for transit.

    lam_mode picks the residual factor per pair: "zero" keeps the pure
    network stego, "uniform" draws from U[0,1] via `generator`, "fixed"
    uses `lam`. Outputs are clamped and 8-bit quantized.
    """
    if lam_mode not in LAM_MODES:
        raise ConfigError(f"lam_mode must be one of {LAM_MODES}, got {lam_mode!r}")
    if len(covers) != len(secrets):
        raise DimensionError(f"{len(covers)} covers vs {len(secrets)} secrets")
    if lam_mode == "uniform" and generator is None:
        raise ConfigError("uniform lam_mode needs a generator")
    stegos = []
    with torch.no_grad():
        for cover, secret in zip(covers, secrets):
            init_stego = conceal(model, secret, cover)
            if lam_mode == "zero":
                lam_i = 0.0
            elif lam_mode == "uniform":
                lam_i = float(torch.rand((), generator=generator))
            else:
                lam_i = float(lam)
            stegos.append(quantize8(residual_augment(cover, init_stego, lam_i)))
    return stegos


def report_from_scores(cover_scores, stego_scores, threshold_db: float) -> EvalReport:
    """Build an EvalReport from already-computed per-image PSNR scores."""
    if not cover_scores or not stego_scores:
        raise DataError("need nonempty cover and stego score lists")
    tp = sum(s <= threshold_db for s in stego_scores)
    tn = sum(s > threshold_db for s in cover_scores)
    n_cover, n_stego = len(cover_scores), len(stego_scores)
    return EvalReport(
        n_cover=n_cover, n_stego=n_stego,
        accuracy=(tp + tn) / (n_cover + n_stego),
        true_positive_rate=tp / n_stego,
        true_negative_rate=tn / n_cover,
        threshold_db=float(threshold_db),
        cover_psnr_stats=PsnrStats.from_scores(cover_scores),
        stego_psnr_stats=PsnrStats.from_scores(stego_scores))


def evaluate_detection(model: InnModel, covers, stegos, threshold_db: float,
                       generator: torch.Generator) -> EvalReport:
    """Detect every image at the given threshold and tally per-class rates."""
    if not covers or not stegos:
        raise DataError("evaluate_detection needs nonempty cover and stego lists")
    cover_scores, stego_scores = [], []
    with torch.no_grad():
        for img in covers:
            cover_scores.append(detect(model, img, threshold_db, generator).psnr_db)
        for img in stegos:
            stego_scores.append(detect(model, img, threshold_db, generator).psnr_db)
    return report_from_scores(cover_scores, stego_scores, threshold_db)


def psnr_histogram(model: InnModel, images, generator: torch.Generator,
                   ids=None) -> list:
    """Score each image against its own reveal; returns (image_id, psnr_db)."""
    if not images:
        raise DataError("psnr_histogram needs a nonempty image list")
    if ids is None:
        ids = [str(i) for i in range(len(images))]
    if len(ids) != len(images):
        raise DataError("ids and images must have equal length")
    rows = []
    with torch.no_grad():
        for image_id, img in zip(ids, images):
            rows.append((image_id, psnr(img, reveal(model, img, generator))))
    return rows


def balanced_accuracy(cover_psnrs, stego_psnrs, threshold_db: float) -> float:
    """Mean of the two per-class rates under the stego-iff-score<=threshold rule."""
    cov = np.asarray(list(cover_psnrs), dtype=np.float64)
    stg = np.asarray(list(stego_psnrs), dtype=np.float64)
    if cov.size == 0 or stg.size == 0:
        raise DataError("balanced_accuracy needs nonempty score lists")
    tpr = float(np.mean(stg <= threshold_db))
    tnr = float(np.mean(cov > threshold_db))
    return 0.5 * (tpr + tnr)


def _sweep_candidates(cover_psnrs, stego_psnrs):
    """Candidate thresholds: one per open interval between sorted scores,
    plus one beyond each extreme. Returns (threshold, interval_width) pairs."""
    scores = sorted(set(list(cover_psnrs) + list(stego_psnrs)))
    out = [(scores[0] - 1.0, math.inf)]
    for a, b in zip(scores, scores[1:]):
        if math.isinf(b):
            mid = a + 1.0
        elif math.isinf(a):
            mid = b - 1.0
        else:
            mid = 0.5 * (a + b)
        out.append((mid, b - a))
    out.append((scores[-1] + 1.0, math.inf))
    return out


def sweep_table(cover_psnrs, stego_psnrs, extra_thresholds=()) -> list:
    """Balanced accuracy at every candidate threshold, sorted ascending."""
    cands = [thr for thr, _ in _sweep_candidates(cover_psnrs, stego_psnrs)]
    cands.extend(float(t) for t in extra_thresholds)
    return [(thr, balanced_accuracy(cover_psnrs, stego_psnrs, thr))
            for thr in sorted(set(cands))]


def threshold_sweep(cover_psnrs, stego_psnrs):
    """Best balanced-accuracy threshold; ties go to the widest score gap.

    Returns (best_threshold_db, best_balanced_accuracy).
    """
    best_thr, best_acc, best_width = None, -1.0, -1.0
    for thr, width in _sweep_candidates(cover_psnrs, stego_psnrs):
        acc = balanced_accuracy(cover_psnrs, stego_psnrs, thr)
        if acc > best_acc or (acc == best_acc and width > best_width):
            best_thr, best_acc, best_width = thr, acc, width
    return best_thr, best_acc


def lsb_embed(cover: torch.Tensor, generator: torch.Generator,
              payload_bpp: float = 1.0) -> torch.Tensor:
    """LSB matching: for a random payload_bpp fraction of pixels, add +-1 in
    8-bit units when the pixel's LSB disagrees with a random payload bit.

    Changed pixels differ by exactly 1/255; results stay in [0,1].
    """
    if not 0.0 < payload_bpp <= 1.0:
        raise ConfigError(f"payload_bpp must lie in (0,1], got {payload_bpp!r}")
    pix = torch.round(cover.clamp(0, 1) * 255.0).to(torch.int16).flatten()
    n = pix.numel()
    k = int(round(payload_bpp * n))
    sel = torch.randperm(n, generator=generator)[:k]
    bits = torch.randint(0, 2, (k,), generator=generator, dtype=torch.int16)
    signs = torch.randint(0, 2, (k,), generator=generator, dtype=torch.int16) * 2 - 1
    values = pix[sel]
    mismatch = (values % 2) != bits
    changed = (values + signs).clamp(0, 255)
    pix[sel] = torch.where(mismatch, changed, values)
    return (pix.to(cover.dtype) / 255.0).reshape(cover.shape)


@dataclass
class AblationReport:
    """Side-by-side detection reports for two models on two stego sources."""

    with_ra_inn: EvalReport
    with_ra_lsb: EvalReport
    without_ra_inn: EvalReport
    without_ra_lsb: EvalReport

    def to_dict(self) -> dict:
        return {"with_ra": {"inn": self.with_ra_inn.to_dict(),
                            "lsb": self.with_ra_lsb.to_dict()},
                "without_ra": {"inn": self.without_ra_inn.to_dict(),
                               "lsb": self.without_ra_lsb.to_dict()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def table(self) -> str:
        header = f"{'model':<12} {'stego source':<14} {'accuracy':>8} {'tpr':>6} {'tnr':>6}"
        lines = [header, "-" * len(header)]
        for name, inn_rep, lsb_rep in (
                ("with_ra", self.with_ra_inn, self.with_ra_lsb),
                ("without_ra", self.without_ra_inn, self.without_ra_lsb)):
            for source, rep in (("inn-uniform", inn_rep), ("lsb-match", lsb_rep)):
                lines.append(f"{name:<12} {source:<14} {rep.accuracy:>8.3f} "
                             f"{rep.true_positive_rate:>6.3f} "
                             f"{rep.true_negative_rate:>6.3f}")
        return "\n".join(lines)


def run_ablation(model_with_ra: InnModel, model_without_ra: InnModel,
                 covers, secrets, threshold_db: float,
                 generator: torch.Generator,
                 payload_bpp: float = 1.0) -> AblationReport:
    """Evaluate both models on one shared uniform-residual stego set and one
    shared LSB-matching stego set.

    Detection noise is drawn from per-phase seeds derived once from
    `generator`, so both models see identical noise streams; identical
    models therefore produce identical reports.
    """
    if len(covers) != len(secrets):
        raise DimensionError(f"{len(covers)} covers vs {len(secrets)} secrets")
    seeds = torch.randint(0, 2 ** 31 - 1, (3,), generator=generator).tolist()
    gen_stego = torch.Generator()
    gen_stego.manual_seed(seeds[0])
    covers_q = [quantize8(c) for c in covers]
    inn_stegos = generate_eval_stegos(model_with_ra, covers, secrets,
                                      lam_mode="uniform", generator=gen_stego)
    lsb_stegos = [lsb_embed(c, gen_stego, payload_bpp) for c in covers_q]

    reports = {}
    for name, model in (("with_ra", model_with_ra), ("without_ra", model_without_ra)):
        for source, stegos, seed in (("inn", inn_stegos, seeds[1]),
                                     ("lsb", lsb_stegos, seeds[2])):
            gen_eval = torch.Generator()
            gen_eval.manual_seed(seed)
            reports[f"{name}_{source}"] = evaluate_detection(
                model, covers_q, stegos, threshold_db, gen_eval)
    return AblationReport(with_ra_inn=reports["with_ra_inn"],
                          with_ra_lsb=reports["with_ra_lsb"],
                          without_ra_inn=reports["without_ra_inn"],
                          without_ra_lsb=reports["without_ra_lsb"])
