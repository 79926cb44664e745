"""AdamW with decoupled weight decay."""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import torch
from torch.optim import Optimizer


@dataclass
class AdamWState:
    """First and second moment estimates plus the step counter."""

    step: int = 0
    exp_avg: Dict[str, torch.Tensor] = field(default_factory=dict)
    exp_avg_sq: Dict[str, torch.Tensor] = field(default_factory=dict)


def _update(
    param: torch.Tensor,
    grad: torch.Tensor,
    exp_avg: torch.Tensor,
    exp_avg_sq: torch.Tensor,
    step: int,
    lr: float,
    weight_decay: float,
    beta1: float,
    beta2: float,
    eps: float,
) -> None:
    # theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta), all in place
    exp_avg.mul_(beta1).add_(grad, alpha=1 - beta1)
    exp_avg_sq.mul_(beta2).addcmul_(grad, grad, value=1 - beta2)

    m_hat = exp_avg / (1 - beta1**step)
    v_hat = exp_avg_sq / (1 - beta2**step)
    update = m_hat / (v_hat.sqrt() + eps)
    if weight_decay != 0.0:
        update = update + weight_decay * param
    param.sub_(lr * update)


@torch.no_grad()
def adamw_step(
    params: Dict[str, torch.Tensor],
    grads: Dict[str, torch.Tensor],
    state: AdamWState,
    lr: float,
    weight_decay: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[Dict[str, torch.Tensor], AdamWState]:
    """One AdamW step on named tensors; returns updated copies and the advanced state."""
    step = state.step + 1
    new_params: Dict[str, torch.Tensor] = {}
    new_state = AdamWState(step=step)
    for name, value in params.items():
        param = value.detach().clone()
        exp_avg = state.exp_avg.get(name, torch.zeros_like(param)).clone()
        exp_avg_sq = state.exp_avg_sq.get(name, torch.zeros_like(param)).clone()
        _update(param, grads[name], exp_avg, exp_avg_sq, step, lr, weight_decay, beta1, beta2, eps)
        new_params[name] = param
        new_state.exp_avg[name] = exp_avg
        new_state.exp_avg_sq[name] = exp_avg_sq
    return new_params, new_state


class AdamW(Optimizer):
    """``torch.optim`` front end over the same update as :func:`adamw_step`."""

    def __init__(self, params, lr: float = 3e-4, betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8, weight_decay: float = 0.01):
        if lr <= 0.0:
            raise ValueError(f"Invalid learning rate: {lr}")
        if not (0.0 <= betas[0] < 1.0 and 0.0 <= betas[1] < 1.0):
            raise ValueError(f"Invalid betas: {betas}")
        if eps <= 0.0:
            raise ValueError(f"Invalid eps: {eps}")
        if weight_decay < 0.0:
            raise ValueError(f"Invalid weight decay: {weight_decay}")
        super().__init__(params, dict(lr=lr, betas=betas, eps=eps, weight_decay=weight_decay))

    @torch.no_grad()
    def step(self, closure: Optional[Callable] = None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()

        for group in self.param_groups:
            beta1, beta2 = group["betas"]
            for p in group["params"]:
                if p.grad is None:
                    continue
                state = self.state[p]
                if not state:
                    state["step"] = 0
                    state["exp_avg"] = torch.zeros_like(p, memory_format=torch.preserve_format)
                    state["exp_avg_sq"] = torch.zeros_like(p, memory_format=torch.preserve_format)
                state["step"] += 1
                _update(p, p.grad, state["exp_avg"], state["exp_avg_sq"], state["step"], group["lr"], group["weight_decay"], beta1, beta2, group["eps"])
        return loss

