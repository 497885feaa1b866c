"""Rollout collection, generalized advantage estimation, and the clipped
surrogate policy update.

The update follows the standard recipe: probability ratio against the
behavior policy, surrogate clipped to [1-eps, 1+eps], mean-squared value
loss, entropy bonus, Adam on both networks. Advantages are normalized per
update batch right before the update, not inside the GAE pass.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .environment import N_ACTIONS, OBS_SIZE, EnvConfig, RunoffEnv
from .errors import NonFiniteLoss
from .grid import LulcGrid
from .neural import (
    POLICY_LAYERS,
    VALUE_LAYERS,
    AdamState,
    CategoricalDist,
    MlpParams,
    adam_update,
    backward,
    forward,
    init_mlp,
    log_softmax,
    masked_logits,
)
from .rng import Xoshiro256StarStar
from .runoff import CoefficientTable

log = logging.getLogger("lulc_ppo.train")

# RNG stream layout: 0 init, 1 minibatch shuffling, 2+k sampling for worker k.
STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_WORKER_BASE = 2


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    epochs_per_update: int = 4
    minibatch_size: int = 256
    rollout_horizon: int = 2048
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    learning_rate: float = 3e-4
    total_updates: int = 200
    seed: int = 1

    def __post_init__(self):
        if not 0 < self.clip_epsilon < 1:
            raise ValueError("clip_epsilon must be in (0, 1)")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must be in [0, 1]")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError("gae_lambda must be in [0, 1]")
        if self.rollout_horizon < 1 or self.minibatch_size < 1 or self.epochs_per_update < 1:
            raise ValueError("horizon, minibatch size and epochs must be >= 1")
        if self.total_updates < 0:
            raise ValueError("total_updates must be >= 0")


@dataclass
class RolloutBuffer:
    """Per-step records plus the bootstrap value for the state after the
    last step (zero when that step ended an episode)."""

    obs: np.ndarray  # (T, 15)
    actions: np.ndarray  # (T,)
    log_probs_old: np.ndarray  # (T,)
    rewards: np.ndarray  # (T,)
    values_old: np.ndarray  # (T,)
    dones: np.ndarray  # (T,) bool
    masks: np.ndarray  # (T, 7) bool, legality at sampling time
    bootstrap_value: float

    def __len__(self) -> int:
        return self.obs.shape[0]


@dataclass
class TrainStats:
    update: int
    mean_reward: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    final_episode_runoff: float


@dataclass
class TrainResult:
    policy: MlpParams
    value: MlpParams
    adam_policy: AdamState
    adam_value: AdamState
    stats: list
    rng_states: dict
    written: list  # paths produced when out_dir was given


def collect_rollout(
    env: RunoffEnv,
    policy: MlpParams,
    value_fn: MlpParams,
    horizon: int,
    rng: Xoshiro256StarStar,
) -> RolloutBuffer:
    """Step the env with masked sampled actions for ``horizon`` steps,
    auto-resetting on episode end."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    obs_buf = np.empty((horizon, OBS_SIZE))
    act_buf = np.empty(horizon, dtype=np.int64)
    logp_buf = np.empty(horizon)
    rew_buf = np.empty(horizon)
    val_buf = np.empty(horizon)
    done_buf = np.zeros(horizon, dtype=bool)
    mask_buf = np.empty((horizon, N_ACTIONS), dtype=bool)

    if env.state is None or env.state.done:
        obs = env.reset()
    else:
        obs = env.observation()

    for t in range(horizon):
        mask = env.action_mask()
        logits = forward(policy, obs)
        action, log_prob = CategoricalDist(logits, mask).sample(rng)
        value = forward(value_fn, obs)[0]

        obs_buf[t] = obs
        mask_buf[t] = mask
        act_buf[t] = action
        logp_buf[t] = log_prob
        val_buf[t] = value

        obs, reward, done = env.step(action)
        rew_buf[t] = reward
        done_buf[t] = done
        if done and t < horizon - 1:
            obs = env.reset()

    bootstrap = 0.0 if done_buf[-1] else float(forward(value_fn, obs)[0])
    return RolloutBuffer(obs_buf, act_buf, logp_buf, rew_buf, val_buf, done_buf, mask_buf, bootstrap)


def compute_gae(buffer: RolloutBuffer, gamma: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """GAE advantages and value targets (returns = advantages + values)."""
    T = len(buffer)
    advantages = np.empty(T)
    last_adv = 0.0
    next_value = buffer.bootstrap_value
    for t in range(T - 1, -1, -1):
        nonterminal = 0.0 if buffer.dones[t] else 1.0
        delta = buffer.rewards[t] + gamma * next_value * nonterminal - buffer.values_old[t]
        last_adv = delta + gamma * lam * nonterminal * last_adv
        advantages[t] = last_adv
        next_value = buffer.values_old[t]
    returns = advantages + buffer.values_old
    return advantages, returns


def normalize_advantages(advantages: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    return (advantages - advantages.mean()) / (advantages.std() + eps)


def clipped_surrogate(ratio, advantage, clip_epsilon):
    """Per-sample PPO objective min(ratio*A, clip(ratio)*A)."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * advantage
    return np.minimum(ratio * advantage, clipped)


def _entropy_terms(log_p: np.ndarray) -> np.ndarray:
    p = np.exp(log_p)
    return -np.sum(np.where(p > 0.0, p * log_p, 0.0), axis=-1)


def policy_minibatch(
    policy: MlpParams,
    obs: np.ndarray,
    actions: np.ndarray,
    masks: np.ndarray,
    advantages: np.ndarray,
    log_probs_old: np.ndarray,
    clip_epsilon: float,
    entropy_coef: float,
) -> tuple[float, float, np.ndarray, MlpParams]:
    """Clipped-surrogate loss, entropy, ratios, and exact gradients of
    (policy_loss - entropy_coef * entropy) for one minibatch."""
    B = obs.shape[0]
    logits = masked_logits(forward(policy, obs), masks)
    log_p = log_softmax(logits)
    p = np.exp(log_p)
    logp_new = log_p[np.arange(B), actions]
    ratio = np.exp(logp_new - log_probs_old)

    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * advantages
    policy_loss = float(-np.minimum(unclipped, clipped).mean())
    entropies = _entropy_terms(log_p)
    entropy = float(entropies.mean())

    # d(policy_loss)/d(logp_new): flows only while the unclipped term is the minimum
    g_lp = np.where(unclipped <= clipped, -advantages * ratio, 0.0) / B
    dlogits = g_lp[:, None] * (np.eye(p.shape[1])[actions] - p)
    # entropy regularizer: dH/dlogits = p * (-H - log p)
    dlogits += (-entropy_coef / B) * p * (-entropies[:, None] - log_p)
    return policy_loss, entropy, ratio, backward(policy, obs, dlogits)


def value_minibatch(
    value_fn: MlpParams, obs: np.ndarray, returns: np.ndarray, value_coef: float
) -> tuple[float, MlpParams]:
    """Mean-squared value loss and exact gradients of value_coef * loss."""
    B = obs.shape[0]
    values = forward(value_fn, obs)[:, 0]
    err = values - returns
    value_loss = float(np.mean(err**2))
    grads = backward(value_fn, obs, ((value_coef * 2.0 / B) * err)[:, None])
    return value_loss, grads


def ppo_update(
    policy: MlpParams,
    value_fn: MlpParams,
    batch: RolloutBuffer,
    advantages: np.ndarray,
    returns: np.ndarray,
    cfg: PpoConfig,
    adam_policy: AdamState,
    adam_value: AdamState,
    rng: Xoshiro256StarStar,
) -> tuple[float, float, float, float]:
    """Run the epoch/minibatch PPO step; mutates parameters in place.

    Returns (policy_loss, value_loss, entropy, clip_fraction) averaged over
    all minibatch passes.
    """
    n = len(batch)
    indices = np.arange(n)
    eps = cfg.clip_epsilon

    loss_p_sum = loss_v_sum = entropy_sum = clip_sum = 0.0
    n_batches = 0

    for _ in range(cfg.epochs_per_update):
        rng.shuffle(indices)
        for start in range(0, n, cfg.minibatch_size):
            mb = indices[start : start + cfg.minibatch_size]
            obs = batch.obs[mb]

            policy_loss, entropy, ratio, policy_grads = policy_minibatch(
                policy,
                obs,
                batch.actions[mb],
                batch.masks[mb],
                advantages[mb],
                batch.log_probs_old[mb],
                eps,
                cfg.entropy_coef,
            )
            value_loss, value_grads = value_minibatch(value_fn, obs, returns[mb], cfg.value_coef)

            total = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy
            if not np.isfinite(total):
                raise NonFiniteLoss(
                    f"non-finite loss: policy={policy_loss!r} value={value_loss!r} entropy={entropy!r}"
                )

            adam_update(policy, policy_grads, adam_policy)
            adam_update(value_fn, value_grads, adam_value)
            try:
                policy.assert_finite()
                value_fn.assert_finite()
            except FloatingPointError as exc:
                raise NonFiniteLoss(str(exc)) from exc

            loss_p_sum += policy_loss
            loss_v_sum += value_loss
            entropy_sum += entropy
            clip_sum += float(np.mean((ratio < 1.0 - eps) | (ratio > 1.0 + eps)))
            n_batches += 1

    return (
        loss_p_sum / n_batches,
        loss_v_sum / n_batches,
        entropy_sum / n_batches,
        clip_sum / n_batches,
    )


def init_networks(seed: int) -> tuple[MlpParams, MlpParams]:
    """Fresh actor/critic weights from the init stream of ``seed``."""
    rng = Xoshiro256StarStar(seed, stream=STREAM_INIT)
    policy = init_mlp(POLICY_LAYERS, rng, out_scale=0.01)
    value = init_mlp(VALUE_LAYERS, rng)
    return policy, value


def write_stats_csv(path, stats) -> None:
    from .persistence import atomic_write_text  # local import to avoid a cycle

    header = "update,mean_reward,policy_loss,value_loss,entropy,clip_fraction,final_episode_runoff"
    lines = [header]
    for s in stats:
        lines.append(
            f"{s.update},{s.mean_reward!r},{s.policy_loss!r},{s.value_loss!r},"
            f"{s.entropy!r},{s.clip_fraction!r},{s.final_episode_runoff!r}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def train(
    base: LulcGrid,
    table: CoefficientTable,
    env_cfg: EnvConfig,
    cfg: PpoConfig,
    *,
    workers: int = 1,
    out_dir=None,
    checkpoint_every: int = 50,
) -> TrainResult:
    """Full training loop: collect, GAE, update, repeat ``total_updates``
    times. Writes stats.csv and periodic + final checkpoints when
    ``out_dir`` is given. Deterministic for a fixed seed and worker count.
    """
    from .checkpoint import save_checkpoint  # local import to avoid a cycle

    if workers < 1:
        raise ValueError("workers must be >= 1")

    policy, value_fn = init_networks(cfg.seed)
    adam_policy = AdamState.for_params(policy, lr=cfg.learning_rate)
    adam_value = AdamState.for_params(value_fn, lr=cfg.learning_rate)
    update_rng = Xoshiro256StarStar(cfg.seed, stream=STREAM_SHUFFLE)
    worker_rngs = [Xoshiro256StarStar(cfg.seed, stream=STREAM_WORKER_BASE + k) for k in range(workers)]
    envs = [RunoffEnv(base, env_cfg, table) for _ in range(workers)]

    def rng_states() -> dict:
        return {
            "update_stream": list(update_rng.getstate()),
            "worker_streams": [list(r.getstate()) for r in worker_rngs],
        }

    written: list[Path] = []

    def save(tag: str, update_idx: int) -> None:
        if out_dir is None:
            return
        path = Path(out_dir) / f"checkpoint{tag}.json"
        save_checkpoint(
            path,
            policy=policy,
            value=value_fn,
            adam_policy=adam_policy,
            adam_value=adam_value,
            train_step=update_idx,
            rng_states=rng_states(),
        )
        written.append(path)

    stats: list[TrainStats] = []
    per_worker_horizon = cfg.rollout_horizon
    for update in range(cfg.total_updates):
        buffers = [
            collect_rollout(envs[k], policy, value_fn, per_worker_horizon, worker_rngs[k])
            for k in range(workers)
        ]
        adv_parts, ret_parts = [], []
        for buf in buffers:
            adv, ret = compute_gae(buf, cfg.gamma, cfg.gae_lambda)
            adv_parts.append(adv)
            ret_parts.append(ret)
        merged = RolloutBuffer(
            obs=np.concatenate([b.obs for b in buffers]),
            actions=np.concatenate([b.actions for b in buffers]),
            log_probs_old=np.concatenate([b.log_probs_old for b in buffers]),
            rewards=np.concatenate([b.rewards for b in buffers]),
            values_old=np.concatenate([b.values_old for b in buffers]),
            dones=np.concatenate([b.dones for b in buffers]),
            masks=np.concatenate([b.masks for b in buffers]),
            bootstrap_value=buffers[-1].bootstrap_value,
        )
        advantages = normalize_advantages(np.concatenate(adv_parts))
        returns = np.concatenate(ret_parts)

        loss_p, loss_v, entropy, clip_frac = ppo_update(
            policy, value_fn, merged, advantages, returns, cfg, adam_policy, adam_value, update_rng
        )

        final_runoff = None
        for env in envs:
            if env.last_final_runoff() is not None:
                final_runoff = env.last_final_runoff()
        if final_runoff is None:
            final_runoff = envs[-1].current_runoff()

        row = TrainStats(
            update=update,
            mean_reward=float(merged.rewards.mean()),
            policy_loss=loss_p,
            value_loss=loss_v,
            entropy=entropy,
            clip_fraction=clip_frac,
            final_episode_runoff=float(final_runoff),
        )
        stats.append(row)
        log.info(
            "update %d: mean_reward=%.4g entropy=%.3f clip=%.3f runoff=%.6g",
            update, row.mean_reward, row.entropy, row.clip_fraction, row.final_episode_runoff,
        )
        if checkpoint_every and (update + 1) % checkpoint_every == 0 and update + 1 < cfg.total_updates:
            save(f"_{update + 1:04d}", update + 1)

    save("", cfg.total_updates)
    if out_dir is not None:
        stats_path = Path(out_dir) / "stats.csv"
        write_stats_csv(stats_path, stats)
        written.append(stats_path)
    return TrainResult(policy, value_fn, adam_policy, adam_value, stats, rng_states(), written)
