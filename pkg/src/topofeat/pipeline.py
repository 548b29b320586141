"""Staged end-to-end pipeline with on-disk artifacts and resumability.

Each stage reads its predecessor's files and writes its own; outputs that
already exist are not recomputed, so deleting any stage directory and
rerunning reproduces it byte-identically for a fixed seed.  Stage failures
surface as :class:`StageError` carrying the stage name and offending file.

Layout under ``out_dir``:

    manifest.json               segment inventory (+ rate, channels, window)
    labels.csv                  subject_id,label
    params.json                 embedding parameters in effect
    clouds/<sid>_<idx>_ch<c>.csv   per-channel embedded clouds
    joint/<sid>_<idx>.csv          denoised joint clouds
    diagrams/<sid>_<idx>.csv       per-segment persistence diagrams
    subject_diagrams/<sid>.csv     merged + density-filtered diagrams
    images/<sid>.csv               persistence images (when descriptor = pi)
    vectorize_meta.json            shared extent / sigma / weight knots
    features.csv                   one row per subject, final column = label
    report.json                    evaluation report
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .classify import (EvalReport, LabeledDataset, kfold_cv, load_features_csv,
                       save_features_csv, tune_hyperparameters)
from .cloud import PointCloud
from .config import PipelineConfig, validate_config
from .denoise import MassParams, remap_multichannel
from .diagrams import BandwidthSpec, merge_diagrams, mkde_density, filter_by_density, parse_bandwidth
from .embedding import EmbeddingParams, delay_embed, estimate_embedding_params
from .homology import PersistenceDiagram, rips_diagram
from .ingest import bandpass_filter, load_recording, save_segments, segment, select_channels
from .synth import SynthSpec, gen_two_class_signals
from .vectorize import (WeightParams, betti_curve, birth_persistence_transform,
                        entropy_summary, peak_split_knot, persistence_image,
                        persistence_landscape)


class StageError(RuntimeError):
    """Failure tagged with the pipeline stage (and file) that caused it."""

    def __init__(self, stage: str, message: str, file=None):
        self.stage = stage
        self.file = str(file) if file is not None else None
        loc = f" [{self.file}]" if self.file else ""
        super().__init__(f"stage {stage}: {message}{loc}")


def _out(cfg: PipelineConfig) -> Path:
    return Path(cfg.out_dir)


def _manifest(cfg: PipelineConfig) -> dict:
    path = _out(cfg) / "manifest.json"
    if not path.exists():
        raise StageError("ingest", "manifest.json missing; run the ingest or synth stage first", path)
    return json.loads(path.read_text())


def _labels(cfg: PipelineConfig) -> dict[str, int]:
    path = _out(cfg) / "labels.csv"
    if not path.exists():
        raise StageError("ingest", "labels.csv missing", path)
    out = {}
    for ln in path.read_text().splitlines()[1:]:
        if ln.strip():
            sid, lab = ln.split(",")
            out[sid] = int(lab)
    return out


def write_labels(out_dir, labels: dict[str, int]) -> None:
    lines = ["subject_id,label"] + [f"{sid},{lab}" for sid, lab in sorted(labels.items())]
    Path(out_dir, "labels.csv").write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------- ingest

def stage_ingest(cfg: PipelineConfig) -> Path:
    """Load recordings from input_dir, filter, select channels, cut segments.

    input_dir holds one ``<subject_id>.csv`` per recording plus a
    ``labels.csv`` (subject_id,label).
    """
    validate_config(cfg)
    src = Path(cfg.input_dir)
    if not src.is_dir():
        raise StageError("ingest", f"input directory not found: {src}")
    label_file = src / "labels.csv"
    if not label_file.exists():
        raise StageError("ingest", "labels.csv missing from input directory", label_file)
    out = _out(cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "labels.csv").write_text(label_file.read_text())

    segs = []
    for rec_path in sorted(src.glob("*.csv")):
        if rec_path.name == "labels.csv":
            continue
        try:
            rec = load_recording(rec_path, rate=cfg.rate)
            if cfg.apply_bandpass:
                rec = bandpass_filter(rec, cfg.band_low, cfg.band_high, cfg.filter_order)
            names = cfg.channel_list()
            if names:
                rec = select_channels(rec, names)
            segs.extend(segment(rec, cfg.window_samples()))
        except Exception as exc:
            raise StageError("ingest", str(exc), rec_path) from exc
    if not segs:
        raise StageError("ingest", "no segments produced (recordings shorter than one window?)")
    return save_segments(segs, out, cfg.rate)


def stage_synth(cfg: PipelineConfig, n_subjects: int = 40, segments_per_subject: int = 10,
                n_channels: int = 6, noise_a: float = 0.3, amp_low: float = 0.55,
                amp_high: float = 1.0) -> Path:
    """Write a two-class synthetic dataset in the ingest layout."""
    validate_config(cfg)
    out = _out(cfg)
    out.mkdir(parents=True, exist_ok=True)
    spec_a = SynthSpec("sine", 1, noise_a, seed=cfg.seed + 100, amp_range=(amp_low, amp_high))
    spec_b = SynthSpec("noise", 1, 1.0, seed=cfg.seed + 200)
    subjects = gen_two_class_signals(spec_a, spec_b, n_subjects, segments_per_subject,
                                     n_channels, window=cfg.window_samples(), rate=cfg.rate)
    segs = [s for sub in subjects for s in sub.segments]
    write_labels(out, {sub.subject_id: sub.label for sub in subjects})
    return save_segments(segs, out, cfg.rate)


# ---------------------------------------------------------------- embedding

def _segment_entries(cfg: PipelineConfig) -> list[dict]:
    entries = _manifest(cfg)["segments"]
    return sorted(entries, key=lambda e: (e["source_id"], e["index"]))


def _load_segment_data(cfg: PipelineConfig, entry: dict) -> np.ndarray:
    rec = load_recording(_out(cfg) / entry["file"], rate=cfg.rate)
    return rec.data


def stage_embed(cfg: PipelineConfig) -> EmbeddingParams:
    """Embed every channel of every segment; writes clouds/ and params.json."""
    validate_config(cfg)
    out = _out(cfg)
    entries = _segment_entries(cfg)
    params_path = out / "params.json"
    if params_path.exists():
        d = json.loads(params_path.read_text())
        params = EmbeddingParams(d["m"], d["tau"])
    else:
        if cfg.auto_params:
            first = _load_segment_data(cfg, entries[0])
            try:
                params = estimate_embedding_params(
                    list(first), max_lag=cfg.ami_max_lag, bins=cfg.ami_bins,
                    m_max=cfg.fnn_m_max, rtol=cfg.fnn_rtol, atol=cfg.fnn_atol)
            except Exception as exc:
                raise StageError("embed", f"parameter estimation failed: {exc}",
                                 entries[0]["file"]) from exc
        else:
            params = EmbeddingParams(cfg.m, cfg.tau)
        params_path.write_text(json.dumps({"m": params.dim, "tau": params.delay}) + "\n")

    cloud_dir = out / "clouds"
    cloud_dir.mkdir(exist_ok=True)
    for entry in entries:
        paths = [cloud_dir / f"{entry['source_id']}_{entry['index']:04d}_ch{c}.csv"
                 for c in range(len(entry["channels"]))]
        if all(p.exists() for p in paths):
            continue
        data = _load_segment_data(cfg, entry)
        for c, p in enumerate(paths):
            try:
                delay_embed(data[c], params).to_csv(p)
            except Exception as exc:
                raise StageError("embed", str(exc), entry["file"]) from exc
    return params


# ---------------------------------------------------------------- denoising

def _denoise_one(args) -> None:
    joint_path, cloud_paths, q, k, keep_n, iters, seed = args
    clouds = [PointCloud.from_csv(p) for p in cloud_paths]
    params = MassParams(q, k, iters, seed).capped(len(clouds[0]))
    if keep_n > len(clouds[0]):
        raise ValueError(f"keep_n={keep_n} exceeds cloud size {len(clouds[0])}")
    joint = remap_multichannel(clouds, keep_n, params)
    joint.to_csv(joint_path)


def stage_denoise(cfg: PipelineConfig) -> None:
    """Score, prune and fuse the per-channel clouds into joint clouds."""
    validate_config(cfg)
    out = _out(cfg)
    entries = _segment_entries(cfg)
    joint_dir = out / "joint"
    joint_dir.mkdir(exist_ok=True)
    jobs = []
    for entry in entries:
        joint_path = joint_dir / f"{entry['source_id']}_{entry['index']:04d}.csv"
        if joint_path.exists():
            continue
        cloud_paths = [out / "clouds" / f"{entry['source_id']}_{entry['index']:04d}_ch{c}.csv"
                       for c in range(len(entry["channels"]))]
        for p in cloud_paths:
            if not p.exists():
                raise StageError("denoise", "embedded cloud missing; run the embed stage", p)
        jobs.append((joint_path, cloud_paths, cfg.q, cfg.k, cfg.keep_n, cfg.iters, cfg.seed))
    _run_jobs("denoise", _denoise_one, jobs, cfg.jobs)


def _persist_one(args) -> None:
    diagram_path, joint_path = args
    cloud = PointCloud.from_csv(joint_path)
    rips_diagram(cloud.points).to_csv(diagram_path)


def stage_persist(cfg: PipelineConfig) -> None:
    """Rips persistence of every joint cloud."""
    validate_config(cfg)
    out = _out(cfg)
    entries = _segment_entries(cfg)
    dg_dir = out / "diagrams"
    dg_dir.mkdir(exist_ok=True)
    jobs = []
    for entry in entries:
        dpath = dg_dir / f"{entry['source_id']}_{entry['index']:04d}.csv"
        if dpath.exists():
            continue
        jpath = out / "joint" / f"{entry['source_id']}_{entry['index']:04d}.csv"
        if not jpath.exists():
            raise StageError("persist", "joint cloud missing; run the denoise stage", jpath)
        jobs.append((dpath, jpath))
    _run_jobs("persist", _persist_one, jobs, cfg.jobs)


def _run_jobs(stage: str, fn, jobs: list, n_workers: int) -> None:
    """Jobs are tuples whose first element is the output path (used in errors)."""
    if not jobs:
        return
    if n_workers <= 1:
        for job in jobs:
            try:
                fn(job)
            except Exception as exc:
                raise StageError(stage, str(exc), job[0]) from exc
        return
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        futures = [(job, pool.submit(fn, job)) for job in jobs]
        for job, fut in futures:
            try:
                fut.result()
            except Exception as exc:
                raise StageError(stage, str(exc), job[0]) from exc


# ------------------------------------------------------------------- filter

def stage_filter(cfg: PipelineConfig, emit_density=None) -> None:
    """Merge per-subject diagrams and drop the lowest-density fraction."""
    validate_config(cfg)
    out = _out(cfg)
    entries = _segment_entries(cfg)
    labels = _labels(cfg)
    sd_dir = out / "subject_diagrams"
    sd_dir.mkdir(exist_ok=True)
    subjects: dict[str, list[Path]] = {}
    for entry in entries:
        subjects.setdefault(entry["source_id"], []).append(
            out / "diagrams" / f"{entry['source_id']}_{entry['index']:04d}.csv")
    density_rows = []
    for sid in sorted(subjects):
        if sid not in labels:
            raise StageError("filter", f"subject {sid} missing from labels.csv")
        target = sd_dir / f"{sid}.csv"
        if target.exists() and emit_density is None:
            continue
        diagrams = []
        for p in subjects[sid]:
            if not p.exists():
                raise StageError("filter", "segment diagram missing; run the persist stage", p)
            diagrams.append(PersistenceDiagram.from_csv(p))
        points = merge_diagrams(diagrams)
        if len(points) == 0:
            PersistenceDiagram().to_csv(target)
            continue
        bw = parse_bandwidth(cfg.bandwidth)
        if bw == "cov10":
            bw = BandwidthSpec.from_covariance(points, 10.0)
        try:
            dens = mkde_density(points, bw)
        except Exception as exc:
            raise StageError("filter", str(exc), target) from exc
        if emit_density is not None:
            density_rows.extend(f"{sid},{float(b)!r},{float(d)!r},{float(v)!r}"
                                for (b, d), v in zip(points, dens))
        filter_by_density(points, dens, cfg.keep_fraction).to_csv(target)
    if emit_density is not None:
        Path(emit_density).write_text("subject_id,birth,death,density\n"
                                      + "\n".join(density_rows) + "\n")


# ---------------------------------------------------------------- vectorize

def _load_subject_diagrams(cfg: PipelineConfig) -> dict[str, PersistenceDiagram]:
    out = _out(cfg)
    sd_dir = out / "subject_diagrams"
    labels = _labels(cfg)
    result = {}
    for sid in sorted(labels):
        p = sd_dir / f"{sid}.csv"
        if not p.exists():
            raise StageError("vectorize", "subject diagram missing; run the filter stage", p)
        result[sid] = PersistenceDiagram.from_csv(p)
    return result


def resolve_weights(cfg: PipelineConfig, pooled_persistence: np.ndarray,
                    subject_peaks: np.ndarray | None = None) -> WeightParams:
    """Weight knots from config, auto-scaled to the data when left at 0.

    The default ``peaks`` mode places the first knot at the median of the
    per-subject peak persistences; the ``quantile`` mode (and the fallback)
    uses a quantile of the pooled persistence values.
    """
    if cfg.weight_ramp_start > 0:
        t1 = cfg.weight_ramp_start
    else:
        pos = pooled_persistence[pooled_persistence > 0]
        quantile_t1 = float(np.quantile(pos, cfg.knot_quantile)) if len(pos) else 1.0
        if cfg.knot_mode == "peaks" and subject_peaks is not None:
            t1 = peak_split_knot(subject_peaks, fallback=quantile_t1)
        else:
            t1 = quantile_t1
    t2 = cfg.weight_ramp_end if cfg.weight_ramp_end > 0 else 2.0 * t1
    return WeightParams(cfg.weight_plateau, cfg.weight_junction, t1, t2)


def stage_vectorize(cfg: PipelineConfig, weights: WeightParams | None = None) -> Path:
    """Turn subject diagrams into one feature row per subject."""
    validate_config(cfg)
    out = _out(cfg)
    feats_path = out / "features.csv"
    if feats_path.exists():
        return feats_path
    diagrams = _load_subject_diagrams(cfg)
    labels = _labels(cfg)

    all_bars = [d.finite_bars(1) for d in diagrams.values()]
    pooled = np.vstack([b for b in all_bars if len(b)]) if any(len(b) for b in all_bars) else np.empty((0, 2))
    pooled_pers = pooled[:, 1] - pooled[:, 0] if len(pooled) else np.empty(0)
    peaks = np.array([(b[:, 1] - b[:, 0]).max() for b in all_bars if len(b)])
    wp = weights or resolve_weights(cfg, pooled_pers, subject_peaks=peaks)

    if len(pooled):
        bp = birth_persistence_transform(pooled)
        sigma = cfg.pi_sigma if cfg.pi_sigma > 0 else (float(np.ptp(bp[:, 1])) / 20.0 or 1.0)
        pad = 3 * sigma
        extent = ((float(bp[:, 0].min() - pad), float(bp[:, 0].max() + pad)),
                  (float(bp[:, 1].min() - pad), float(bp[:, 1].max() + pad)))
        t_hi = float(pooled[:, 1].max())
    else:
        sigma, extent, t_hi = 1.0, ((0.0, 1.0), (0.0, 1.0)), 1.0
    tgrid = np.linspace(0.0, t_hi, cfg.curve_bins)

    meta = {"descriptor": cfg.descriptor, "sigma": sigma, "extent": extent,
            "weights": {"plateau": wp.plateau, "junction": wp.junction,
                        "ramp_start": wp.ramp_start, "ramp_end": wp.ramp_end}}
    (out / "vectorize_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    img_dir = out / "images"
    rows, ids, labs = [], [], []
    for sid, diagram in diagrams.items():
        try:
            if cfg.descriptor == "pi":
                bp = birth_persistence_transform(diagram.finite_bars(1))
                img = persistence_image(bp, (cfg.pi_rows, cfg.pi_cols), extent, sigma, wp)
                img_dir.mkdir(exist_ok=True)
                img.to_csv(img_dir / f"{sid}.csv")
                rows.append(img.flatten())
            elif cfg.descriptor == "landscape":
                rows.append(persistence_landscape(diagram, cfg.landscape_layers, tgrid))
            elif cfg.descriptor == "betti":
                rows.append(betti_curve(diagram.finite_bars(1), tgrid))
            else:
                rows.append(entropy_summary(diagram, tgrid))
        except Exception as exc:
            raise StageError("vectorize", str(exc), f"{sid}.csv") from exc
        ids.append(sid)
        labs.append(labels[sid])
    save_features_csv(feats_path, ids, np.array(rows), np.array(labs))
    return feats_path


# ----------------------------------------------------------------- classify

def stage_classify(cfg: PipelineConfig, features_path=None) -> EvalReport:
    validate_config(cfg)
    out = _out(cfg)
    report_path = out / "report.json"
    fpath = Path(features_path) if features_path else out / "features.csv"
    if not fpath.exists():
        raise StageError("classify", "features.csv missing; run the vectorize stage", fpath)
    try:
        data = load_features_csv(fpath)
        c, gamma = cfg.C, (cfg.gamma if cfg.gamma > 0 else None)
        if cfg.grid_search:
            c, gamma = tune_hyperparameters(data, seed=cfg.seed, kernel=cfg.kernel)
        report = kfold_cv(data, k=cfg.folds, seed=cfg.seed, kernel=cfg.kernel, C=c, gamma=gamma)
    except StageError:
        raise
    except Exception as exc:
        raise StageError("classify", str(exc), fpath) from exc
    report.save(report_path)
    return report


# ---------------------------------------------------------------------- run

def run_pipeline(cfg: PipelineConfig, synth: bool = False, **synth_kwargs) -> EvalReport:
    """Execute every stage in order; returns the final evaluation report."""
    validate_config(cfg)
    out = _out(cfg)
    if not (out / "manifest.json").exists():
        if synth:
            stage_synth(cfg, **synth_kwargs)
        else:
            stage_ingest(cfg)
    stage_embed(cfg)
    stage_denoise(cfg)
    stage_persist(cfg)
    stage_filter(cfg)
    stage_vectorize(cfg)
    return stage_classify(cfg)


def sweep_weights(cfg: PipelineConfig, plateau_values, junction_values) -> list[dict]:
    """Re-vectorise and re-classify for every (plateau, junction) pair.

    Requires diagrams to exist already; returns one report record per pair.
    """
    out = _out(cfg)
    results = []
    for a in plateau_values:
        for c in junction_values:
            sub = replace(cfg, weight_plateau=a, weight_junction=c,
                          out_dir=str(out / f"sweep_a{a}_c{c}"))
            Path(sub.out_dir).mkdir(parents=True, exist_ok=True)
            for name in ("manifest.json", "labels.csv"):
                Path(sub.out_dir, name).write_text((out / name).read_text())
            (Path(sub.out_dir) / "subject_diagrams").mkdir(exist_ok=True)
            for p in (out / "subject_diagrams").glob("*.csv"):
                Path(sub.out_dir, "subject_diagrams", p.name).write_text(p.read_text())
            stage_vectorize(sub)
            report = stage_classify(sub)
            results.append({"plateau": a, "junction": c,
                            "acc": report.acc, "se": report.se, "sp": report.sp})
    return results
