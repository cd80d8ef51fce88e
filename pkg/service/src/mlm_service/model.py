"""Mask filling over a pretrained masked-LM.

Single-piece candidates are scored with the softmax probability at the mask;
a candidate tokenizing into n pieces expands the mask to n positions and is
scored as exp(mean log-probability across those positions), so longer
candidates carry no length penalty.
"""

from __future__ import annotations

import math
import threading

import torch
import torch.nn.functional as F
from transformers import AutoModelForMaskedLM, AutoTokenizer

WIRE_MASK = "<mask>"

DEFAULT_MODEL = "hfl/chinese-bert-wwm"


class SequenceTooLongError(ValueError):
    pass


class MaskFiller:
    """Loads a fill-mask model once and scores candidate words at a masked
    position. Model access is serialized; responses are deterministic in
    eval mode for identical requests."""

    def __init__(self, model_id: str = DEFAULT_MODEL, device: str = "cpu"):
        self.model_id = model_id
        self.device = device
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForMaskedLM.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        self._lock = threading.Lock()

    @property
    def vocab_size(self) -> int:
        return len(self.tokenizer)

    def _pieces(self, word: str) -> list[str]:
        pieces = self.tokenizer.tokenize(word)
        return pieces if pieces else [self.tokenizer.unk_token]

    def score(
        self, tokens: list[str], mask_index: int, candidates: list[str]
    ) -> dict[str, float]:
        prefix = [p for t in tokens[:mask_index] for p in self._pieces(t)]
        suffix = [p for t in tokens[mask_index + 1:] for p in self._pieces(t)]

        grouped: dict[int, list[tuple[str, list[int]]]] = {}
        for cand in candidates:
            pieces = self._pieces(cand)
            ids = self.tokenizer.convert_tokens_to_ids(pieces)
            grouped.setdefault(len(pieces), []).append((cand, ids))

        cls_tok = self.tokenizer.cls_token
        sep_tok = self.tokenizer.sep_token
        mask_tok = self.tokenizer.mask_token
        max_len = getattr(self.model.config, "max_position_embeddings", 512)

        scores: dict[str, float] = {}
        with self._lock, torch.no_grad():
            for n_pieces, group in sorted(grouped.items()):
                seq = ([cls_tok] + prefix + [mask_tok] * n_pieces
                       + suffix + [sep_tok])
                if len(seq) > max_len:
                    raise SequenceTooLongError(
                        f"input of {len(seq)} pieces exceeds model limit {max_len}"
                    )
                input_ids = torch.tensor(
                    [self.tokenizer.convert_tokens_to_ids(seq)], device=self.device
                )
                logits = self.model(input_ids=input_ids).logits[0]
                first = 1 + len(prefix)
                log_probs = F.log_softmax(
                    logits[first:first + n_pieces], dim=-1
                )
                for cand, piece_ids in group:
                    total = 0.0
                    for position, piece_id in enumerate(piece_ids):
                        total += float(log_probs[position, piece_id])
                    scores[cand] = math.exp(total / n_pieces)
        return scores
