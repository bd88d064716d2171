"""Training loop for the conditional flow-matching estimator.

Each step draws a fresh pilot spacing and SNR per sample, simulates the
pilot transmission, builds the structural condition, and takes one AdamW
step on the velocity-regression loss under cosine learning-rate decay.
All randomness is derived from (seed, epoch, sample or step, purpose)
streams, so two runs with one config produce bit-identical checkpoints.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time

import numpy as np

from ..exceptions import TrainingDiverged
from ..nn import AdamW, cosine_lr, save_checkpoint
from ..perception.encoder import scene_features
from ..seeding import stream
from ..sim.channel import ChannelTensor
from ..sim.pilots import PilotPattern, transmit
from ..sim.scene import to_cav_frame
from .config import train_config_to_dict
from .flowmatch import flow_matching_loss
from .model import ChannelFlowModel, channel_target, pilot_condition

logger = logging.getLogger(__name__)

__all__ = ["build_model", "prepare_scene_cache", "train_model", "normalization_scale"]


def build_model(model_cfg, seed, dtype=np.float32):
    rng = stream(seed, purpose="model-init")
    return ChannelFlowModel(model_cfg, rng, dtype)


def normalization_scale(dataset):
    """Global scalar making angle-delay target elements unit-RMS.

    The transform is unitary and the real/imag split doubles the element
    count, so the angle-delay RMS equals sqrt(mean |H|^2 / 2) exactly.
    """
    return math.sqrt(dataset.signal_power() / 2.0)


def prepare_scene_cache(dataset, perception_cfg):
    """Precompute raw perception inputs (BEV, views, v_phy) per scene."""
    bevs, views, vphys = [], [], []
    for scene in dataset.scenes:
        aligned = to_cav_frame(scene)
        b, v, p = scene_features(aligned, perception_cfg)
        bevs.append(b)
        views.append(v)
        vphys.append(p)
    return np.stack(bevs), np.stack(views), np.stack(vphys)


def _batch_conditions(dataset, indices, patterns_by_spacing, cfg, p_sig, norm_scale, epoch):
    """Per-sample pilot simulation and condition construction for a batch."""
    model_cfg = cfg.model
    dims = model_cfg.channel_dims
    h1 = np.empty((len(indices),) + model_cfg.tensor_dims, dtype=np.float32)
    c_pilot = np.empty_like(h1)
    lo, hi = cfg.snr_range
    for row, i in enumerate(indices):
        rng = stream(cfg.seed, epoch, int(i), purpose="train-sample")
        spacing = cfg.spacings[rng.integers(0, len(cfg.spacings))]
        snr_db = rng.uniform(lo, hi)
        channel = ChannelTensor(data=dataset.channels[i].astype(np.complex128), delta_f=dataset.delta_f)
        obs = transmit(channel, patterns_by_spacing[spacing], snr_db, rng, signal_power=p_sig)
        c_pilot[row] = pilot_condition(obs, dims, norm_scale, model_cfg.angle_delay_mode)
        h1[row] = channel_target(channel.data, norm_scale, model_cfg.angle_delay_mode)
    return h1, c_pilot


def _dump_divergence(out_dir, step, lr, history, model):
    path = os.path.join(out_dir, "divergence_dump.json")
    norms = {name: float(np.sqrt(np.mean(p.data.astype(np.float64) ** 2))) for name, p in model.named_parameters()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"step": step, "lr": lr, "recent_losses": history[-50:], "param_rms": norms}, fh, indent=2)
    return path


def train_model(cfg, dataset, out_dir=None, model=None, scene_cache=None):
    """Train on a ChannelDataset; returns (model, metadata dict).

    When ``out_dir`` is given, writes the final checkpoint, the loss curve
    CSV and optional interval checkpoints there.
    """
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    model_cfg = cfg.model
    if tuple(dataset.dims) != model_cfg.channel_dims:
        raise ValueError(f"dataset dims {dataset.dims} do not match model {model_cfg.channel_dims}")

    model = model or build_model(model_cfg, cfg.seed)
    p_sig = dataset.signal_power()
    norm_scale = normalization_scale(dataset)
    if scene_cache is None:
        scene_cache = prepare_scene_cache(dataset, model_cfg.perception)
    bev_all, views_all, vphy_all = scene_cache

    patterns = {s: PilotPattern.interleaved(s, model_cfg.n_subcarriers, model_cfg.n_tx) for s in cfg.spacings}
    steps_per_epoch = len(dataset) // cfg.batch_size
    total_steps = cfg.epochs * steps_per_epoch
    optimizer = AdamW(
        model.parameters(),
        lr=cfg.lr_max,
        betas=(cfg.beta1, cfg.beta2),
        weight_decay=cfg.weight_decay,
    )

    losses = []
    curve = []
    step = 0
    t_start = time.time()
    for epoch in range(cfg.epochs):
        order = stream(cfg.seed, epoch, purpose="train-sample").permutation(len(dataset))
        for b in range(steps_per_epoch):
            indices = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            h1, c_pilot = _batch_conditions(dataset, indices, patterns, cfg, p_sig, norm_scale, epoch)
            scene_idx = dataset.scene_index[indices]
            env_inputs = (bev_all[scene_idx], views_all[scene_idx], vphy_all[scene_idx])

            loss_rng = stream(cfg.seed, epoch, b, purpose="flow-init")
            loss = flow_matching_loss(model, h1, c_pilot, env_inputs, cfg.p_drop, loss_rng)
            loss_value = float(loss.data)
            if not np.isfinite(loss_value):
                dump = _dump_divergence(out_dir, step, optimizer.lr, losses, model)
                raise TrainingDiverged(f"non-finite loss {loss_value} at step {step}; state dumped to {dump}")

            model.zero_grad()
            loss.backward()
            optimizer.lr = cosine_lr(step, max(total_steps, 1), cfg.lr_max, cfg.lr_min)
            optimizer.step()
            losses.append(loss_value)
            step += 1

            if step % cfg.log_interval == 0:
                window = float(np.mean(losses[-cfg.log_interval :]))
                curve.append((step, optimizer.lr, window))
                logger.info("step %d/%d loss %.4f lr %.2e", step, total_steps, window, optimizer.lr)
            if cfg.checkpoint_interval and step % cfg.checkpoint_interval == 0 and step < total_steps:
                _save(model, cfg, p_sig, norm_scale, step, losses, os.path.join(out_dir, f"ckpt_step{step}.mcfw"))

    metadata = {
        "p_sig": p_sig,
        "norm_scale": norm_scale,
        "steps": step,
        "final_loss": float(np.mean(losses[-cfg.log_interval :])) if losses else None,
        "wall_seconds": time.time() - t_start,
    }
    ckpt_path = os.path.join(out_dir, "model.mcfw")
    _save(model, cfg, p_sig, norm_scale, step, losses, ckpt_path)
    with open(os.path.join(out_dir, "loss_curve.csv"), "w", encoding="utf-8") as fh:
        fh.write("step,lr,loss\n")
        for s, lr, value in curve:
            fh.write(f"{s},{lr:.8e},{value:.6f}\n")
    metadata["checkpoint"] = ckpt_path
    return model, metadata


def _save(model, cfg, p_sig, norm_scale, step, losses, path):
    config = {
        "train": train_config_to_dict(cfg),
        "p_sig": p_sig,
        "norm_scale": norm_scale,
        "step": step,
        "final_loss": float(losses[-1]) if losses else None,
    }
    save_checkpoint(path, model.state_dict(), config)
