#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Decoder-only transformer: RMS pre-normalization, rotary positions,
grouped-query attention, a gated SiLU feed-forward and an untied output
head.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from libdiachron.model import LanguageModel

INIT_STD = 0.02


class RMSNorm(nn.Module):
    def __init__(self, dim, eps=1e-5):
        super(RMSNorm, self).__init__()
        self.eps = eps
        self.weight = nn.Parameter(torch.ones(dim))

    def forward(self, x):
        norm = torch.rsqrt(x.pow(2).mean(-1, keepdim=True) + self.eps)
        return x * norm * self.weight


class RotaryEmbedding(nn.Module):
    """Cosine and sine tables of rotary positions, never serialized."""

    def __init__(self, head_dim, max_len, theta=10000.0):
        super(RotaryEmbedding, self).__init__()

        inv_freq = 1.0 / (theta ** (
            torch.arange(0, head_dim, 2, dtype=torch.float64) / head_dim
        ))
        freqs = torch.outer(torch.arange(max_len, dtype=torch.float64),
            inv_freq)

        self.register_buffer("cos", freqs.cos().float(), persistent=False)
        self.register_buffer("sin", freqs.sin().float(), persistent=False)

    def forward(self, length):
        return self.cos[:length], self.sin[:length]


def apply_rotary(x, cos, sin):
    """Rotates (even, odd) pairs of the last dimension of x."""

    x1, x2 = x[..., ::2], x[..., 1::2]
    return torch.stack([ x1 * cos - x2 * sin, x1 * sin + x2 * cos ],
        dim=-1).flatten(-2)


class Attention(nn.Module):
    def __init__(self, config):
        super(Attention, self).__init__()
        self.n_heads = config.n_heads
        self.n_kv_heads = config.n_kv_heads
        self.head_dim = config.head_dim

        self.q_proj = nn.Linear(config.d_model, config.d_model, bias=False)
        self.k_proj = nn.Linear(config.d_model, config.kv_dim, bias=False)
        self.v_proj = nn.Linear(config.d_model, config.kv_dim, bias=False)
        self.o_proj = nn.Linear(config.d_model, config.d_model, bias=False)

    def forward(self, x, cos, sin):
        batch, length, width = x.shape

        q = self.q_proj(x).view(batch, length, self.n_heads, self.head_dim)
        k = self.k_proj(x).view(batch, length, self.n_kv_heads,
            self.head_dim)
        v = self.v_proj(x).view(batch, length, self.n_kv_heads,
            self.head_dim)

        cos = cos[None, :, None, :]
        sin = sin[None, :, None, :]
        q = apply_rotary(q, cos, sin).transpose(1, 2)
        k = apply_rotary(k, cos, sin).transpose(1, 2)
        v = v.transpose(1, 2)

        groups = self.n_heads // self.n_kv_heads
        if groups > 1:
            k = k.repeat_interleave(groups, dim=1)
            v = v.repeat_interleave(groups, dim=1)

        out = F.scaled_dot_product_attention(q, k, v, is_causal=True)
        out = out.transpose(1, 2).reshape(batch, length, width)
        return self.o_proj(out)


class FeedForward(nn.Module):
    def __init__(self, config):
        super(FeedForward, self).__init__()
        self.gate_proj = nn.Linear(config.d_model, config.d_ff, bias=False)
        self.up_proj = nn.Linear(config.d_model, config.d_ff, bias=False)
        self.down_proj = nn.Linear(config.d_ff, config.d_model, bias=False)

    def forward(self, x):
        return self.down_proj(F.silu(self.gate_proj(x)) * self.up_proj(x))


class Block(nn.Module):
    def __init__(self, config):
        super(Block, self).__init__()
        self.attn_norm = RMSNorm(config.d_model, config.norm_eps)
        self.attn = Attention(config)
        self.mlp_norm = RMSNorm(config.d_model, config.norm_eps)
        self.mlp = FeedForward(config)

    def forward(self, x, cos, sin):
        x = x + self.attn(self.attn_norm(x), cos, sin)
        return x + self.mlp(self.mlp_norm(x))


class CausalLM(LanguageModel):
    """The per-slice language model."""

    def __init__(self, config):
        super(CausalLM, self).__init__(config)

        self.embed = nn.Embedding(config.vocab_size, config.d_model)
        self.blocks = nn.ModuleList(
            [ Block(config) for _ in range(config.n_layers) ]
        )
        self.norm = RMSNorm(config.d_model, config.norm_eps)
        self.lm_head = nn.Linear(config.d_model, config.vocab_size,
            bias=False)
        self.rotary = RotaryEmbedding(config.head_dim, config.context_length,
            config.rope_theta)

        self._init_weights(config.seed)

    def _init_weights(self, seed):
        generator = torch.Generator().manual_seed(seed)

        with torch.no_grad():
            for name, param in self.named_parameters():
                if name.endswith("norm.weight"):
                    param.fill_(1.0)
                else:
                    param.copy_(torch.randn(param.shape,
                        generator=generator) * INIT_STD)

    def forward(self, ids):
        self.check_length(ids.shape[1])

        cos, sin = self.rotary(ids.shape[1])
        x = self.embed(ids)
        for block in self.blocks:
            x = block(x, cos, sin)

        return self.lm_head(self.norm(x))
